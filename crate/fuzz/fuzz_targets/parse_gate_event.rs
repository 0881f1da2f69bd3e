#![no_main]
use entwalk_cli::output::GateLogEntry;
use entwalk_core::gates::GateEvent;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(ev) = s.parse::<GateEvent>() {
        assert_ne!(ev.control, ev.target);
        let again: GateEvent = ev.to_string().parse().expect("display output parses");
        assert_eq!(again.control, ev.control);
        assert_eq!(again.target, ev.target);
        assert_eq!(again.gate_c.is_clifford(), ev.gate_c.is_clifford());
    }
    // Gate-log lines wrap the same event grammar.
    if let Ok(entry) = s.parse::<GateLogEntry>() {
        let again: GateLogEntry = entry.to_string().parse().expect("display output parses");
        assert_eq!(again.realization, entry.realization);
        assert_eq!(again.step, entry.step);
    }
});
