#![no_main]

use libfuzzer_sys::fuzz_target;
use tvp::oracle0d::OracleParams;

fuzz_target!(|data: &[u8]| {
    if let Ok(src) = std::str::from_utf8(data) {
        let _ = OracleParams::from_toml_str(src);
    }
});
