//! Writes the planted-structure fixture to a directory:
//!
//! ```text
//! cargo run -p taxenrich --example planted -- /tmp/planted
//! ```

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use taxenrich::synthetic::{planted, PlantedConfig};

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "planted".into()));
    std::fs::create_dir_all(&dir)?;
    let fixture = planted(&PlantedConfig::default());
    fixture.old.write_jsonl(BufWriter::new(File::create(dir.join("old.jsonl"))?))?;
    fixture.new.write_jsonl(BufWriter::new(File::create(dir.join("new.jsonl"))?))?;
    fixture.embeddings.write_text(BufWriter::new(File::create(dir.join("vectors.txt"))?))?;
    File::create(dir.join("wiktionary.jsonl"))?;
    println!("wrote {}", dir.display());
    Ok(())
}
