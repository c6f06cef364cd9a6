#![no_main]

use libfuzzer_sys::fuzz_target;
use locdyn::popmc::checkpoint::{decode, encode};

fuzz_target!(|data: &[u8]| {
    if let Ok(pop) = decode(data) {
        assert_eq!(encode(&pop), data);
        assert!(pop.localized_fraction() >= 0.0 && pop.localized_fraction() <= 1.0);
    }
});
