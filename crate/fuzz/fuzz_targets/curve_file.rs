#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(curve) = sigfeed::io::parse_curve(text, "fuzz") {
        // anything the parser accepts must evaluate and re-serialize
        let _ = curve.evaluate(0.5).expect("accepted curve evaluates");
        let again = sigfeed::io::format_curve(&curve).expect("accepted curve serializes");
        assert_eq!(sigfeed::io::parse_curve(&again, "again").expect("round trip"), curve);
    }
});
