#![no_main]
use entwalk_cli::{Experiment, ExperimentConfig, Overrides};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(o) = Overrides::parse_config(s) else { return };
    // Resolution may reject the values, but must not panic.
    for exp in [Experiment::Trace, Experiment::Cutoff, Experiment::Tripartite] {
        if let Ok(cfg) = ExperimentConfig::resolve(exp, o.clone()) {
            assert!(cfg.trials >= 1);
            assert!(!cfg.n.is_empty());
        }
    }
});
