//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sigfeed::baseline::{sine_mus, SineProfile};
use sigfeed::chordscan::{FeedrateScatter, ScatterPoint};
use sigfeed::geometry::DEFAULT_ARC_TOL;
use sigfeed::optimizer::{adjust_peak_junction, adjust_with_constant, classify_regime, compute_mus, Regime};
use sigfeed::pipeline::{self, RunConfig};
use sigfeed::segmentation::{find_breakpoints, segment};
use sigfeed::sprofile::SigmoidProfile;
use sigfeed::testcurves::{random_curve, CurveSpec};
use sigfeed::{BlockKind, Curve, Emit, Error, Limits, Method, ProfileFamily};

const CURVES: u64 = 25;
const PEAK_TOL: f64 = 1e-9;
const CHORD_HEADROOM: f64 = 1.05;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

// ---------------------------------------------------------------------------
// 1 and 2: random curves under both presets

struct CurveRun {
    seed: u64,
    sigmoid_time: f64,
    sine_time: f64,
}

fn constraint_suite(preset: &str, runs: &mut Vec<CurveRun>) -> Result<(usize, f64, f64, f64), String> {
    let limits = Limits::preset(preset).unwrap();
    let spec = CurveSpec::default();
    let mut violations = 0;
    let (mut worst_chord, mut worst_a, mut worst_j) = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..CURVES {
        let curve = random_curve(seed, &spec).map_err(|e| format!("seed {seed}: {e}"))?;
        let report = pipeline::plan(&curve, &limits, Method::Both).map_err(|e| format!("{preset} seed {seed}: {e}"))?;
        for o in &report.outcomes {
            for s in &o.samples {
                worst_chord = worst_chord.max(s.chord_err / limits.delta_max);
                if s.chord_err > CHORD_HEADROOM * limits.delta_max {
                    violations += 1;
                }
            }
            for b in &o.blocks {
                let (a, j) = o.family.build(b).map_err(|e| e.to_string())?.kinematic_peaks();
                worst_a = worst_a.max(a / limits.a_max);
                worst_j = worst_j.max(j / limits.j_max);
                if a > limits.a_max * (1.0 + PEAK_TOL) || j > limits.j_max * (1.0 + PEAK_TOL) {
                    violations += 1;
                }
            }
        }
        let time = |f| report.outcome(f).unwrap().summary.total_time;
        runs.push(CurveRun {
            seed,
            sigmoid_time: time(ProfileFamily::Sigmoid),
            sine_time: time(ProfileFamily::Sine),
        });
    }
    Ok((violations, worst_chord, worst_a, worst_j))
}

fn criterion_constraints(runs_hd: &mut Vec<CurveRun>) -> Verdict {
    let mut details = Vec::new();
    let mut pass = true;
    let mut scratch = Vec::new();
    for preset in ["standard", "high-dynamics"] {
        let sink = if preset == "high-dynamics" { &mut *runs_hd } else { &mut scratch };
        match constraint_suite(preset, sink) {
            Ok((violations, chord, a, j)) => {
                pass &= violations == 0;
                details.push(format!(
                    "{preset}: {violations} violations, max chord/delta {chord:.4}, A/A_max {a:.6}, J/J_max {j:.9}"
                ));
            }
            Err(e) => {
                pass = false;
                details.push(format!("{preset}: pipeline error {e}"));
            }
        }
    }
    verdict(pass, details.join("; "))
}

fn criterion_efficiency(runs: &[CurveRun]) -> Verdict {
    let regime = classify_regime(&Limits::high_dynamics());
    if runs.len() != CURVES as usize {
        return verdict(false, format!("only {} of {CURVES} curves ran", runs.len()));
    }
    let improvements: Vec<f64> = runs.iter().map(|r| 100.0 * (1.0 - r.sigmoid_time / r.sine_time)).collect();
    let slower: Vec<u64> = runs.iter().filter(|r| r.sigmoid_time > r.sine_time).map(|r| r.seed).collect();
    let mean = improvements.iter().sum::<f64>() / improvements.len() as f64;
    let min = improvements.iter().copied().fold(f64::INFINITY, f64::min);
    let max = improvements.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pass = matches!(regime, Ok(Regime::JerkStrict)) && slower.is_empty() && (0.5..=5.0).contains(&mean);
    verdict(
        pass,
        format!(
            "regime {:?}, mean improvement {mean:.3}% (range {min:.3}% to {max:.3}%), sigmoid slower on {slower:?}",
            regime.map(|r| r.as_str())
        ),
    )
}

// ---------------------------------------------------------------------------
// 3: optimizer against brute force, feasibility decided by profile peaks only

fn random_limits(rng: &mut ChaCha8Rng) -> Limits {
    if rng.gen_bool(0.5) {
        Limits::standard()
    } else {
        Limits::high_dynamics()
    }
}

/// Transition feasibility from the built profile's peaks.
fn profile_fits(v_a: f64, v_b: f64, length: f64, limits: &Limits) -> bool {
    if v_a == v_b {
        return true;
    }
    if length <= 0.0 {
        return false;
    }
    let kind = BlockKind::classify(v_a, v_b, limits.v_max);
    let Ok(p) = SigmoidProfile::new(v_a, v_b, length, limits.shape_s, kind) else {
        return false;
    };
    let (a, j) = p.kinematic_peaks();
    a <= limits.a_max * (1.0 + PEAK_TOL) && j <= limits.j_max * (1.0 + PEAK_TOL)
}

/// Shortest feasible transition by bisection on the profile peaks.
fn shortest_transition(v_a: f64, v_b: f64, limits: &Limits) -> f64 {
    if v_a == v_b {
        return 0.0;
    }
    let mut hi = 1.0;
    while !profile_fits(v_a, v_b, hi, limits) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if profile_fits(v_a, v_b, mid, limits) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn pair_time(l: f64, a: f64, b: f64) -> f64 {
    if l == 0.0 {
        0.0
    } else {
        2.0 * l / (a + b)
    }
}

const PEAK_GRID: f64 = 1e-3;

/// Returns Ok(true) on agreement.
fn peak_instance(rng: &mut ChaCha8Rng, infeasible: &mut usize) -> Result<bool, String> {
    let limits = random_limits(rng);
    let v1 = rng.gen_range(5.0..95.0);
    let v3 = rng.gen_range(5.0..95.0);
    let floor = f64::max(v1, v3);
    let v2 = rng.gen_range(floor..=100.0);
    let l1 = rng.gen_range(0.3..10.0);
    let l2 = rng.gen_range(0.3..10.0);
    let c = ProfileFamily::Sigmoid.coeffs(limits.shape_s).map_err(|e| e.to_string())?;
    let analytic = adjust_peak_junction(v1, v2, v3, l1, l2, &c, &limits);

    let time = |x: f64| pair_time(l1, v1, x) + pair_time(l2, x, v3);
    let feasible = |x: f64| profile_fits(v1, x, l1, &limits) && profile_fits(x, v3, l2, &limits);
    let steps = ((v2 - floor) / PEAK_GRID).floor() as usize;
    let mut best: Option<f64> = None;
    for k in (0..=steps).map(|k| floor + k as f64 * PEAK_GRID).chain(std::iter::once(v2)) {
        if feasible(k) && best.is_none_or(|b| time(k) < time(b)) {
            best = Some(k);
        }
    }
    if analytic.is_err() {
        *infeasible += 1;
    }
    match (analytic, best) {
        (Err(Error::InfeasibleJunction(_)), None) => Ok(true),
        (Err(Error::InfeasibleJunction(_)), Some(_)) => Ok(false),
        (Err(e), _) => Err(e.to_string()),
        // the grid can miss a feasible window narrower than one step above the floor
        (Ok(x), None) => Ok(x - floor < PEAK_GRID && feasible(x)),
        (Ok(x), Some(b)) => {
            let close = (x - b).abs() <= PEAK_GRID * (1.0 + 1e-9);
            let no_worse = time(x) <= time(b) * (1.0 + 1e-6);
            Ok(close && no_worse && feasible(x))
        }
    }
}

const SPAN_GRID: usize = 2000;
const COARSE_GRID: usize = 100;

fn span_instance(rng: &mut ChaCha8Rng, infeasible: &mut usize) -> Result<bool, String> {
    let limits = random_limits(rng);
    let v1 = rng.gen_range(5.0..95.0);
    let v3 = rng.gen_range(5.0..95.0);
    let v_lo = f64::max(v1, v3);
    let ceiling = rng.gen_range(v_lo..=100.0);
    let total = rng.gen_range(0.3..20.0);
    let c = ProfileFamily::Sigmoid.coeffs(limits.shape_s).map_err(|e| e.to_string())?;
    let analytic = adjust_with_constant(v1, v3, total, ceiling, &c, &limits);

    let objective = |l1: f64, v2: f64, l3: f64| pair_time(l1, v1, v2) + (total - l1 - l3) / v2 + pair_time(l3, v2, v3);
    // fine grid: shortest transitions found by bisection, the rest cruises
    let step = (ceiling - v_lo) / SPAN_GRID as f64;
    let mut best: Option<(f64, f64)> = None;
    for k in 0..=SPAN_GRID {
        let v2 = if k == SPAN_GRID { ceiling } else { v_lo + k as f64 * step };
        let (l1, l3) = (shortest_transition(v1, v2, &limits), shortest_transition(v2, v3, &limits));
        if l1 + l3 <= total * (1.0 + 1e-10) {
            let t = objective(l1, v2, l3);
            if best.is_none_or(|(_, bt)| t < bt) {
                best = Some((v2, t));
            }
        }
    }

    // coarse exhaustive grid over cruise feed and both transition lengths
    let mut coarse = f64::INFINITY;
    for i in 0..=COARSE_GRID {
        let v2 = v_lo + (ceiling - v_lo) * i as f64 / COARSE_GRID as f64;
        let lens: Vec<f64> = (0..=COARSE_GRID).map(|j| total * j as f64 / COARSE_GRID as f64).collect();
        let ok1: Vec<bool> = lens.iter().map(|&l| profile_fits(v1, v2, l, &limits)).collect();
        let ok3: Vec<bool> = lens.iter().map(|&l| profile_fits(v2, v3, l, &limits)).collect();
        for (a, &l1) in lens.iter().enumerate() {
            for (b, &l3) in lens.iter().enumerate() {
                if ok1[a] && ok3[b] && a + b <= COARSE_GRID {
                    coarse = coarse.min(objective(l1, v2, l3));
                }
            }
        }
    }

    if analytic.is_err() {
        *infeasible += 1;
    }
    match (analytic, best) {
        (Err(Error::InfeasibleJunction(_)), None) => Ok(coarse.is_infinite()),
        (Err(Error::InfeasibleJunction(_)), Some(_)) => Ok(false),
        (Err(e), _) => Err(e.to_string()),
        (Ok(out), found) => {
            let [l1, l2, l3] = out.lengths;
            let t = out.duration(v1, v3);
            let sums = (l1 + l2 + l3 - total).abs() <= 1e-9 * total;
            let fits = profile_fits(v1, out.v2, l1, &limits) && profile_fits(out.v2, v3, l3, &limits);
            let beats_coarse = t <= coarse * (1.0 + 1e-6);
            let matches_fine = match found {
                Some((v2, bt)) => (out.v2 - v2).abs() <= step * (1.0 + 1e-9) + 1e-12 && t <= bt * (1.0 + 1e-6),
                // a feasible set thinner than one grid step
                None => out.v2 - v_lo <= step,
            };
            Ok(sums && fits && beats_coarse && matches_fine)
        }
    }
}

fn criterion_optimizer() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut peak_ok, mut span_ok, mut errors) = (0, 0, Vec::new());
    let (mut peak_infeasible, mut span_infeasible) = (0, 0);
    for _ in 0..200 {
        match peak_instance(&mut rng, &mut peak_infeasible) {
            Ok(true) => peak_ok += 1,
            Ok(false) => {}
            Err(e) => errors.push(e),
        }
    }
    for _ in 0..200 {
        match span_instance(&mut rng, &mut span_infeasible) {
            Ok(true) => span_ok += 1,
            Ok(false) => {}
            Err(e) => errors.push(e),
        }
    }
    let pass = peak_ok >= 198 && span_ok >= 198 && errors.is_empty();
    verdict(
        pass,
        format!(
            "peak junction {peak_ok}/200 ({peak_infeasible} infeasible), \
             constant span {span_ok}/200 ({span_infeasible} infeasible), errors {errors:?}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 4

fn criterion_mus() -> Verdict {
    let (mu6, mu7) = sine_mus();
    let Ok(mus) = compute_mus(3.3) else {
        return verdict(false, "compute_mus(3.3) failed".into());
    };
    let pass = (mu6 - PI / 4.0).abs() <= 1e-9
        && (mu7 - PI * PI / 8.0).abs() <= 1e-9
        && (1.10..=1.14).contains(&mus.mu_m)
        && mus.mu_m < mu7;
    verdict(pass, format!("mu6 {mu6:.12}, mu7 {mu7:.12}, mu_m(3.3) {:.6}, mu_n(3.3) {:.6}", mus.mu_m, mus.mu_n))
}

// ---------------------------------------------------------------------------
// 5

/// Five-point Gauss-Legendre on `n` equal panels.
fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / n as f64;
    let mut sum = 0.0;
    for k in 0..n {
        let mid = a + (k as f64 + 0.5) * h;
        sum += X.iter().zip(W).map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h;
    }
    sum
}

/// Largest |g| over [a, b] sampled at n + 1 points.
fn sampled_max(g: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    (0..=n)
        .map(|i| g(if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).abs())
        .fold(0.0, f64::max)
}

fn criterion_profiles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_cond, mut worst_int, mut worst_gap) = (0.0f64, 0.0f64, 0.0f64);
    let mut under = 0;
    for _ in 0..1000 {
        let v_s = rng.gen_range(0.0..100.0);
        let mut v_e = rng.gen_range(0.0..100.0);
        if v_s == 0.0 && v_e == 0.0 {
            v_e = 1.0;
        }
        let length = rng.gen_range(0.01..50.0);
        let s = rng.gen_range(1.0..8.0);
        let kind = if v_e > v_s { BlockKind::Accel } else { BlockKind::Decel };
        let p = SigmoidProfile::new(v_s, v_e, length, s, kind).unwrap();
        let t_end = p.duration;
        let tau = t_end / 3.0;
        let v = |t: f64| p.velocity_at(t).unwrap();
        let a = |t: f64| p.acceleration_at(t).unwrap();
        let j = |t: f64| p.jerk_at(t).unwrap();
        let (a_pk, j_pk) = p.kinematic_peaks();

        // continuity at the thirds is checked against the uncapped law
        let dv = (v_e - v_s).abs();
        let conditions = [
            (v(0.0) - v_s) / dv,
            a(0.0) / a_pk,
            (v(tau) - p.core_velocity(tau)) / dv,
            (a(tau) - p.core_acceleration(tau)) / a_pk,
            (v(2.0 * tau) - p.core_velocity(2.0 * tau)) / dv,
            (a(2.0 * tau) - p.core_acceleration(2.0 * tau)) / a_pk,
            (v(t_end) - v_e) / dv,
            a(t_end) / a_pk,
        ];
        worst_cond = conditions.iter().fold(worst_cond, |m, c| m.max(c.abs()));

        let inner = (tau * (1.0 + 1e-12), 2.0 * tau * (1.0 - 1e-12));
        let integral = gauss(v, 0.0, tau, 4) + gauss(v, inner.0, inner.1, 64) + gauss(v, 2.0 * tau, t_end, 4);
        worst_int = worst_int.max((integral - length).abs() / length);

        let n = 4000;
        let sections = [(0.0, tau), inner, (2.0 * tau, t_end)];
        let sa = sections.iter().map(|&(x, y)| sampled_max(a, x, y, n)).fold(0.0, f64::max);
        let sj = sections.iter().map(|&(x, y)| sampled_max(j, x, y, n)).fold(0.0, f64::max);
        if a_pk < sa * (1.0 - 1e-12) || j_pk < sj * (1.0 - 1e-12) {
            under += 1;
        }
        worst_gap = worst_gap.max((a_pk - sa) / a_pk).max((j_pk - sj) / j_pk);
    }
    let pass = worst_cond < 1e-9 && worst_int < 1e-9 && under == 0 && worst_gap < 1e-6;
    verdict(
        pass,
        format!(
            "max boundary residual {worst_cond:.2e}, max |int v - L|/L {worst_int:.2e}, \
             peaks below sampling {under}, max peak-over-sampling gap {worst_gap:.2e}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 6

fn scatter(values: &[f64]) -> FeedrateScatter {
    let n = (values.len() - 1) as f64;
    FeedrateScatter::new(
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| ScatterPoint { u: i as f64 / n, v })
            .collect(),
    )
}

fn criterion_segmentation() -> Verdict {
    // a sharp dip between two rising runs, and a rising run with one irregular step
    let spike = scatter(&[100.0, 90.0, 80.0, 70.0, 20.0, 70.0, 80.0, 90.0, 100.0]);
    let run = scatter(&[20.0, 30.0, 40.0, 41.0, 70.0, 80.0, 90.0]);
    let spike_ok = find_breakpoints(&spike, 1.0).map(|b| b == vec![0, 4, 8]).unwrap_or(false);
    let run_ok = find_breakpoints(&run, 1.0).map(|b| b == vec![0, 6]).unwrap_or(false);

    let mut worst_rel = 0.0f64;
    let mut tiled = true;
    let limits = Limits::standard();
    for seed in 0..CURVES {
        let curve = random_curve(seed, &CurveSpec::default()).unwrap();
        let Ok(scan) = sigfeed::chordscan::scan_curve(&curve, &limits) else {
            tiled = false;
            continue;
        };
        let Ok(blocks) = segment(&curve, &scan, &limits) else {
            tiled = false;
            continue;
        };
        tiled &= blocks[0].u_s == 0.0 && blocks[blocks.len() - 1].u_e == 1.0;
        tiled &= blocks.windows(2).all(|w| w[0].u_e == w[1].u_s && w[0].u_s < w[0].u_e);
        let sum: f64 = blocks.iter().map(|b| b.length).sum();
        let total = curve.arc_length(0.0, 1.0, DEFAULT_ARC_TOL).unwrap();
        worst_rel = worst_rel.max((sum - total).abs() / total);
    }
    let pass = spike_ok && run_ok && tiled && worst_rel < 1e-8;
    verdict(
        pass,
        format!("spike selected {spike_ok}, monotone noise rejected {run_ok}, tiling {tiled}, max |sum L - arc|/arc {worst_rel:.2e}"),
    )
}

// ---------------------------------------------------------------------------
// 7

fn criterion_sine() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst, mut jerk_ok) = (0.0f64, true);
    for _ in 0..200 {
        let v_s = rng.gen_range(0.0..100.0);
        let v_e = rng.gen_range(0.0..100.0);
        let length = rng.gen_range(0.05..40.0);
        let Ok(p) = SineProfile::new(v_s, v_e, length) else {
            continue;
        };
        let t = p.duration;
        // the closed-form bound
        let bound = PI * (v_e - v_s).abs() / (2.0 * t);
        let sampled = sampled_max(|x| p.acceleration_at(x).unwrap(), 0.0, t, 100_000);
        worst = worst.max((bound - sampled).abs() / bound.max(f64::MIN_POSITIVE));
        jerk_ok &= (v_s == v_e) || p.jerk_at(0.0).unwrap() != 0.0;
    }
    verdict(worst < 1e-9 && jerk_ok, format!("max relative gap {worst:.2e}, jerk at t = 0 nonzero {jerk_ok}"))
}

// ---------------------------------------------------------------------------
// 8

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

fn criterion_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let curve_path = dir.path().join("curve.toml");
    let curve: Curve = random_curve(17, &CurveSpec::default()).unwrap();
    std::fs::write(&curve_path, sigfeed::io::format_curve(&curve).unwrap()).unwrap();
    let mut trees = Vec::new();
    for name in ["a", "b"] {
        let config = RunConfig {
            curve_path: curve_path.clone(),
            limits: Limits::high_dynamics(),
            method: Method::Both,
            out_dir: dir.path().join(name),
            emit: Emit::default(),
        };
        if let Err(e) = pipeline::run(&config) {
            return verdict(false, format!("run failed: {e}"));
        }
        trees.push(read_tree(&config.out_dir));
    }
    let n = trees[0].len();
    let same = trees[0] == trees[1];
    verdict(same && n >= 12, format!("{n} files compared, byte-identical {same}"))
}

fn main() -> ExitCode {
    let mut hd_runs = Vec::new();
    let results = [
        ("1 constraint suite", criterion_constraints(&mut hd_runs)),
        ("2 efficiency suite", criterion_efficiency(&hd_runs)),
        ("3 optimizer oracle", criterion_optimizer()),
        ("4 mu constants", criterion_mus()),
        ("5 profile invariants", criterion_profiles()),
        ("6 segmentation", criterion_segmentation()),
        ("7 sine fidelity", criterion_sine()),
        ("8 determinism", criterion_determinism()),
    ];
    let mut failed = 0;
    for (name, v) in &results {
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
