#![no_main]

use libfuzzer_sys::fuzz_target;
use setlab::formula::parse;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse(text) {
        // Printing must reparse to the same tree.
        let back = parse(&f.to_string()).expect("printed formula reparses");
        assert_eq!(back, f);
    }
});
