#![no_main]

use libfuzzer_sys::fuzz_target;
use locdyn::csvio::{read_trajectory, write_trajectory};
use locdyn::gamma::gamma_residual;

fuzz_target!(|data: &[u8]| {
    if let Ok((g, header)) = read_trajectory(data) {
        let r = gamma_residual(&g);
        assert!(r.max >= 0.0 || r.max.is_nan());
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &g, &header).unwrap();
        let (back, _) = read_trajectory(buf.as_slice()).unwrap();
        assert_eq!(g, back);
    }
});
