#![no_main]

use libfuzzer_sys::fuzz_target;
use setlab::srm::{assemble, disassemble};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = assemble(text) {
        assert_eq!(assemble(&disassemble(&p)).unwrap(), p);
    }
});
