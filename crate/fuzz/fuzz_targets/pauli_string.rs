#![no_main]

use libfuzzer_sys::fuzz_target;
use logipure::pauli::{pauli_operator, PauliString};

fuzz_target!(|data: &str| {
    let Ok(ps) = data.parse::<PauliString>() else {
        return;
    };
    // Display output parses back to the same string.
    let again: PauliString = ps.to_string().parse().expect("display round trip");
    assert_eq!(again, ps);
    if ps.n_qubits() <= 6 {
        let m = pauli_operator(&ps).expect("valid string builds");
        assert_eq!(m.dim(), 1 << ps.n_qubits());
    }
});
