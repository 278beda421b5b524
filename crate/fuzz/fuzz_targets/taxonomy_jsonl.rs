#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(taxonomy) = taxenrich::Taxonomy::from_reader(data) {
        let mut out = Vec::new();
        taxonomy.write_jsonl(&mut out).unwrap();
        let again = taxenrich::Taxonomy::from_reader(out.as_slice()).unwrap();
        assert_eq!(again.len(), taxonomy.len());
    }
});
