//! Model checkpoints in the record container: one configuration record,
//! then one record per parameter tensor.

use std::path::Path;

use crate::dataset::{Record, RecordReader, RecordWriter, Value};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::config::StreetConfig;
use super::network::StreetModel;

const KEY_CONFIG: &str = "model/config";
const KEY_NAME: &str = "param/name";
const KEY_SHAPE: &str = "param/shape";
const KEY_DATA: &str = "param/data";

pub fn save_checkpoint(model: &StreetModel<f32>, path: impl AsRef<Path>) -> Result<()> {
    let mut w = RecordWriter::create(path)?;
    let mut head = Record::new();
    head.push(KEY_CONFIG, Value::Text(model.config.to_text()));
    w.write(&head)?;
    for (name, t) in model.params.iter() {
        let mut r = Record::new();
        let data: Vec<u8> = t.data().iter().flat_map(|v| v.to_le_bytes()).collect();
        r.push(KEY_NAME, Value::Text(name.to_string()))
            .push(
                KEY_SHAPE,
                Value::Ints(t.shape().iter().map(|&d| d as i64).collect()),
            )
            .push(KEY_DATA, Value::Bytes(data));
        w.write(&r)?;
    }
    w.finish()?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<StreetModel<f32>> {
    let mut records = RecordReader::open(path)?;
    let schema = |index: usize, detail: &str| Error::Schema {
        index,
        detail: detail.to_string(),
    };
    let head = records
        .next()
        .ok_or_else(|| schema(0, "empty checkpoint"))??;
    let config = StreetConfig::from_text(
        head.text(KEY_CONFIG)
            .ok_or_else(|| schema(0, "missing model/config"))?,
    )?;
    let mut named = Vec::new();
    for (i, r) in records.enumerate() {
        let index = i + 1;
        let r = r?;
        let name = r
            .text(KEY_NAME)
            .ok_or_else(|| schema(index, "missing param/name"))?;
        let shape: Vec<usize> = r
            .ints(KEY_SHAPE)
            .ok_or_else(|| schema(index, "missing param/shape"))?
            .iter()
            .map(|&d| usize::try_from(d).map_err(|_| schema(index, "negative extent")))
            .collect::<Result<_>>()?;
        let bytes = r
            .bytes(KEY_DATA)
            .ok_or_else(|| schema(index, "missing param/data"))?;
        if bytes.len() % 4 != 0 {
            return Err(schema(
                index,
                "param/data is not a whole number of f32 values",
            ));
        }
        let data = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let t = Tensor::new(shape, data).map_err(|e| schema(index, &e.to_string()))?;
        named.push((name.to_string(), t));
    }
    StreetModel::from_params(config, named)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let m = StreetModel::<f32>::build(StreetConfig::mini(), 11).unwrap();
        save_checkpoint(&m, &path).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), m);
    }

    #[test]
    fn mismatched_shape_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let m = StreetModel::<f32>::build(StreetConfig::mini(), 11).unwrap();
        save_checkpoint(&m, &path).unwrap();
        // same parameters, wider declared model
        let mut records: Vec<Record> = RecordReader::open(&path)
            .unwrap()
            .map(|r| r.unwrap())
            .collect();
        let mut c = StreetConfig::mini();
        c.final_width = 50;
        records[0] = {
            let mut r = Record::new();
            r.push(KEY_CONFIG, Value::Text(c.to_text()));
            r
        };
        crate::dataset::write_records(&path, &records).unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}
