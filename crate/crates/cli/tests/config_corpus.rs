use std::fs;
use std::path::PathBuf;

use locdyn_cli::config::{
    parse_text, RunConfig, FIG1, GAMMA, MC_STEADY, MC_TRANSIENT, ORACLE, STEADY, TRANSIENT,
};

#[test]
fn config_seeds_echo_round_trip() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/run_config");
    let mut resolved = 0;
    for e in fs::read_dir(dir).unwrap() {
        let text = fs::read_to_string(e.unwrap().path()).unwrap();
        let Ok(entries) = parse_text(&text) else {
            continue;
        };
        for (name, schema) in [
            ("gamma", GAMMA),
            ("steady", STEADY),
            ("transient", TRANSIENT),
            ("mc-steady", MC_STEADY),
            ("mc-transient", MC_TRANSIENT),
            ("oracle", ORACLE),
            ("fig1", FIG1),
        ] {
            if let Ok(cfg) = RunConfig::resolve(name, schema, &entries, &[]) {
                let body = cfg.echo().split_once('\n').unwrap().1.to_string();
                let again =
                    RunConfig::resolve(name, schema, &parse_text(&body).unwrap(), &[]).unwrap();
                assert_eq!(cfg, again);
                resolved += 1;
            }
        }
    }
    assert!(resolved >= 3);
}
