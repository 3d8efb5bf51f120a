#![no_main]

use ddehopf::modelkit::parse;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|src: &str| {
    if let Ok(e) = parse(src) {
        // Whatever parses must print back to something that parses to the same tree.
        let again = parse(&e.to_string()).expect("printed expression parses");
        assert_eq!(again, e);
    }
});
