#![no_main]

use libfuzzer_sys::fuzz_target;
use setlab::hfs::HSet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = text.parse::<HSet>() {
        assert_eq!(x.to_string().parse::<HSet>().unwrap(), x);
        assert_eq!(x.shorthand().parse::<HSet>().unwrap(), x);
    }
});
