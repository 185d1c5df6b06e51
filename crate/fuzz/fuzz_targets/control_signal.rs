#![no_main]

use libfuzzer_sys::{fuzz_target, Corpus};

fuzz_target!(|data: &[u8]| -> Corpus {
    let Ok(input) = std::str::from_utf8(data) else {
        return Corpus::Reject;
    };
    if let Ok(signal) = hpds_cli::literal::parse_signal(input) {
        // evaluating a parsed signal must not panic either
        let _ = signal.eval(0.0, 2);
        let _ = signal.eval(1e9, 2);
    }
    Corpus::Keep
});
