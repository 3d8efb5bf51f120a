#![no_main]

use ddehopf_cli::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|src: &str| {
    let _ = RunConfig::from_toml(src);
});
