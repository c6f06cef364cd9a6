#![no_main]

use libfuzzer_sys::fuzz_target;
use locdyn::csvio::{read_density, write_density};

fuzz_target!(|data: &[u8]| {
    if let Ok((p, header)) = read_density(data) {
        assert!(p.values().iter().all(|v| v.is_finite() && *v >= 0.0));
        let mut buf = Vec::new();
        write_density(&mut buf, &p, &header).unwrap();
        let (q, _) = read_density(buf.as_slice()).unwrap();
        assert_eq!(p, q);
    }
});
