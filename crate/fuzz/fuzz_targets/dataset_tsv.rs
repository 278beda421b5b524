#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(entries) = taxenrich::formats::read_dataset(data) {
        let mut out = Vec::new();
        if taxenrich::formats::write_dataset(&mut out, &entries).is_ok() {
            assert_eq!(taxenrich::formats::read_dataset(out.as_slice()).unwrap(), entries);
        }
    }
});
