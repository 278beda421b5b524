#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = taxenrich::EmbeddingStore::from_reader(data, Some(64));
    if let Ok(store) = taxenrich::EmbeddingStore::from_reader(data, None) {
        let mut out = Vec::new();
        store.write_text(&mut out).unwrap();
        taxenrich::EmbeddingStore::from_reader(out.as_slice(), None).unwrap();
    }
});
