#![no_main]

use libfuzzer_sys::fuzz_target;
use locdyn_cli::config::{
    parse_text, RunConfig, FIG1, GAMMA, MC_STEADY, MC_TRANSIENT, ORACLE, STEADY, TRANSIENT,
};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(entries) = parse_text(text) {
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
                let echo = cfg.echo();
                let body = echo.split_once('\n').unwrap().1;
                let again =
                    RunConfig::resolve(name, schema, &parse_text(body).unwrap(), &[]).unwrap();
                assert_eq!(cfg, again);
            }
        }
    }
});
