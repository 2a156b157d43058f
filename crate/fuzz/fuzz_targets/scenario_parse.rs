#![no_main]

use libfuzzer_sys::fuzz_target;
use tvp::scenario::Scenario;

fuzz_target!(|data: &[u8]| {
    if let Ok(src) = std::str::from_utf8(data) {
        let _ = Scenario::from_toml_str(src);
    }
});
