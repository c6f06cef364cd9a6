//! Replays the checked-in fuzz seeds through the same checks the fuzz
//! targets make.

use std::fs;
use std::path::PathBuf;

use locdyn::csvio::{read_density, read_trajectory, write_density, write_trajectory};
use locdyn::popmc::checkpoint::{decode, encode};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn density_seeds_round_trip() {
    for (path, data) in seeds("density_csv") {
        let (p, header) =
            read_density(data.as_slice()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let mut buf = Vec::new();
        write_density(&mut buf, &p, &header).unwrap();
        assert_eq!(read_density(buf.as_slice()).unwrap().0, p);
    }
}

#[test]
fn trajectory_seeds_round_trip() {
    for (path, data) in seeds("trajectory_csv") {
        let (g, header) =
            read_trajectory(data.as_slice()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &g, &header).unwrap();
        assert_eq!(read_trajectory(buf.as_slice()).unwrap().0, g);
    }
}

#[test]
fn checkpoint_seeds_reencode() {
    for (path, data) in seeds("checkpoint") {
        let mut pop = decode(&data).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(encode(&pop), data);
        let tau = pop.tau();
        pop.run_until(tau + 0.5).unwrap();
        assert!(decode(&encode(&pop)).is_ok());
    }
}
