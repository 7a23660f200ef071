#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(blocks) = sigfeed::io::parse_blocks(text, "fuzz") {
        let mut out = Vec::new();
        sigfeed::io::write_blocks(&mut out, &blocks).expect("parsed blocks are finite");
        let again = sigfeed::io::parse_blocks(std::str::from_utf8(&out).unwrap(), "again").expect("round trip");
        assert_eq!(again, blocks);
    }
});
