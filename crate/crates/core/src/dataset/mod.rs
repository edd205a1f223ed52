//! Sign examples, the record container, synthetic generation and splits.

mod example;
pub mod font;
pub mod records;
mod splits;
mod synth;

pub use example::{
    image_tensor, GeoPoint, SignExample, TileLayout, EARTH_RADIUS_M, KEY_CLASS, KEY_ENCODED,
    KEY_FORMAT, KEY_HEIGHT, KEY_LAT, KEY_LON, KEY_ORIG_WIDTH, KEY_TEXT, KEY_UNPADDED, KEY_VIEWS,
    KEY_WIDTH, RAW_FORMAT,
};
pub use records::{read_records, write_records, Record, RecordReader, RecordWriter, Value};
pub use splits::{
    corpus_stats, default_stop_words, filter_encodable, make_splits, stats_report, tokens,
    wall_degrees, Placed, SplitSet, SubsetStats, SUBSET_NAMES,
};
pub use synth::{generate_corpus, synth_sign, wrap_name, CorpusSpec, Style, Vocabulary};

use std::path::Path;

use crate::error::Result;

/// Writes examples as records, returning the count.
pub fn write_examples(path: impl AsRef<Path>, examples: &[SignExample]) -> Result<usize> {
    let mut w = RecordWriter::create(path)?;
    for e in examples {
        w.write(&e.to_record())?;
    }
    w.finish()
}

/// Streams examples from a record file.
pub fn example_reader(path: impl AsRef<Path>) -> Result<impl Iterator<Item = Result<SignExample>>> {
    let reader = RecordReader::open(path)?;
    Ok(reader
        .enumerate()
        .map(|(i, r)| r.and_then(|r| SignExample::from_record(&r, i))))
}

pub fn read_examples(path: impl AsRef<Path>) -> Result<Vec<SignExample>> {
    example_reader(path)?.collect()
}
