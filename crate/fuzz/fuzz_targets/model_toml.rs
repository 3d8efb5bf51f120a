#![no_main]

use ddehopf::modelkit::ModelSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|src: &str| {
    let _ = ModelSpec::from_toml(src);
});
