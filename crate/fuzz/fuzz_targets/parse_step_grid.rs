#![no_main]
use entwalk_cli::StepGrid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(g) = s.parse::<StepGrid>() {
        assert!(!g.steps().is_empty());
        assert!(g.steps().windows(2).all(|w| w[0] < w[1]));
        let again: StepGrid = g.to_string().parse().expect("display output parses");
        assert_eq!(again, g);
    }
});
