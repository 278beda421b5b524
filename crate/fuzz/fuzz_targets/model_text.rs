#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = taxenrich::LrModel::from_reader(data) {
        assert_eq!(taxenrich::LrModel::from_reader(model.to_text().as_bytes()).unwrap(), model);
    }
});
