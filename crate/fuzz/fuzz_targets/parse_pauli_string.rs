#![no_main]
use entwalk_core::pauli::PauliString;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(p) = s.parse::<PauliString>() {
        // Display must parse back to the same string.
        let again: PauliString = p.to_string().parse().expect("display output parses");
        assert_eq!(again, p);
        assert!(p.support().iter().all(|&q| q < p.len()));
    }
});
