#![no_main]

use libfuzzer_sys::fuzz_target;
use logipure::codes::CodeDefinition;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(def) = CodeDefinition::from_json(text) else {
        return;
    };
    let small = match &def {
        CodeDefinition::Stabilizer { stabilizers, .. } => {
            stabilizers.len() <= 6 && stabilizers.iter().all(|s| s.len() <= 6)
        }
        CodeDefinition::Heisenberg { n, .. } => *n <= 6,
    };
    // Building must return an error, never panic.
    if small {
        let _ = def.build();
    }
});
