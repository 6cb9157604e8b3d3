#![no_main]

use libfuzzer_sys::fuzz_target;
use num_bigint::BigUint;
use setlab::formula::{decode, encode, GodelCode};

fuzz_target!(|data: &[u8]| {
    let code = GodelCode(BigUint::from_bytes_be(data));
    if let Some(f) = decode(&code) {
        assert_eq!(encode(&f), code);
    }
});
