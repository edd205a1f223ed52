use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::text::{Charset, MAX_LABEL_LEN};

use super::records::{Record, Value};

pub const KEY_FORMAT: &str = "image/format";
pub const KEY_ENCODED: &str = "image/encoded";
pub const KEY_CLASS: &str = "image/class";
pub const KEY_UNPADDED: &str = "image/unpadded_class";
pub const KEY_WIDTH: &str = "image/width";
pub const KEY_ORIG_WIDTH: &str = "image/orig_width";
pub const KEY_HEIGHT: &str = "image/height";
pub const KEY_TEXT: &str = "image/text";
pub const KEY_LAT: &str = "geo/lat";
pub const KEY_LON: &str = "geo/lon";
pub const KEY_VIEWS: &str = "sign/n_views";

pub const RAW_FORMAT: &str = "RAW";

/// Square tiles laid out horizontally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileLayout {
    pub tile: usize,
    pub views: usize,
}

impl TileLayout {
    pub const FULL: TileLayout = TileLayout {
        tile: 150,
        views: 4,
    };

    pub fn width(&self) -> usize {
        self.tile * self.views
    }

    pub fn height(&self) -> usize {
        self.tile
    }

    pub fn image_bytes(&self) -> usize {
        self.width() * self.height() * 3
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        GeoPoint { lat, lon }
    }

    /// Equirectangular approximation, in metres.
    pub fn distance_m(&self, other: &GeoPoint) -> f64 {
        let mean_lat = ((self.lat + other.lat) / 2.0).to_radians();
        let dx = (other.lon - self.lon).to_radians() * mean_lat.cos();
        let dy = (other.lat - self.lat).to_radians();
        EARTH_RADIUS_M * dx.hypot(dy)
    }
}

/// One sign: an RGB raster of horizontally tiled views and its truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SignExample {
    pub format: String,
    /// Row-major `height × width × 3` bytes.
    pub encoded: Vec<u8>,
    pub class: Vec<usize>,
    pub unpadded_class: Vec<usize>,
    pub width: usize,
    pub orig_width: usize,
    pub height: usize,
    pub text: String,
    pub geo: Option<GeoPoint>,
    /// Fields this reader does not interpret, kept for rewriting.
    pub extra: Vec<(String, Value)>,
}

impl SignExample {
    pub fn real_views(&self) -> usize {
        self.orig_width / self.height.max(1)
    }

    pub fn layout(&self) -> TileLayout {
        TileLayout {
            tile: self.height,
            views: self.width / self.height.max(1),
        }
    }

    /// `1 × height × width × 3` with bytes scaled to [0, 1].
    pub fn image_tensor(&self) -> Tensor<f32> {
        image_tensor(&self.encoded, self.height, self.width)
    }

    /// Checks the schema against `layout`, and the labels against `charset`
    /// when given.
    pub fn validate(
        &self,
        layout: TileLayout,
        charset: Option<&Charset>,
        index: usize,
    ) -> Result<()> {
        let bad = |detail: String| Err(Error::Schema { index, detail });
        if self.format != RAW_FORMAT {
            return bad(format!("format {:?}, expected {RAW_FORMAT:?}", self.format));
        }
        if self.width != layout.width() || self.height != layout.height() {
            return bad(format!(
                "image {}x{}, expected {}x{}",
                self.width,
                self.height,
                layout.width(),
                layout.height()
            ));
        }
        if self.orig_width == 0
            || self.orig_width % layout.tile != 0
            || self.orig_width > self.width
        {
            return bad(format!(
                "orig_width {} is not a whole number of tiles",
                self.orig_width
            ));
        }
        if self.encoded.len() != layout.image_bytes() {
            return bad(format!(
                "encoded image has {} bytes, expected {}",
                self.encoded.len(),
                layout.image_bytes()
            ));
        }
        if self.class.len() != MAX_LABEL_LEN || self.unpadded_class.len() > MAX_LABEL_LEN {
            return bad("class lists have the wrong length".into());
        }
        if let Some(cs) = charset {
            let null = cs.null();
            if self.class[..self.unpadded_class.len()] != self.unpadded_class[..]
                || self.class[self.unpadded_class.len()..]
                    .iter()
                    .any(|&c| c != null)
            {
                return bad("class is not unpadded_class padded with nulls".into());
            }
            match cs.encode(&self.text) {
                Ok(seq) if seq.unpadded == self.unpadded_class => {}
                Ok(_) => {
                    return bad(format!(
                        "text {:?} does not encode to unpadded_class",
                        self.text
                    ))
                }
                Err(e) => return bad(format!("text {:?}: {e}", self.text)),
            }
        }
        Ok(())
    }

    pub fn to_record(&self) -> Record {
        let ints = |v: &[usize]| Value::Ints(v.iter().map(|&x| x as i64).collect());
        let mut r = Record::new();
        r.push(KEY_FORMAT, Value::Text(self.format.clone()))
            .push(KEY_ENCODED, Value::Bytes(self.encoded.clone()))
            .push(KEY_CLASS, ints(&self.class))
            .push(KEY_UNPADDED, ints(&self.unpadded_class))
            .push(KEY_WIDTH, Value::Ints(vec![self.width as i64]))
            .push(KEY_ORIG_WIDTH, Value::Ints(vec![self.orig_width as i64]))
            .push(KEY_HEIGHT, Value::Ints(vec![self.height as i64]))
            .push(KEY_TEXT, Value::Text(self.text.clone()));
        if let Some(g) = self.geo {
            r.push(KEY_LAT, Value::Bytes(g.lat.to_le_bytes().to_vec()))
                .push(KEY_LON, Value::Bytes(g.lon.to_le_bytes().to_vec()));
        }
        for (k, v) in &self.extra {
            r.push(k.clone(), v.clone());
        }
        r
    }

    pub fn from_record(record: &Record, index: usize) -> Result<Self> {
        let missing = |key: &str| Error::Schema {
            index,
            detail: format!("missing or mistyped field {key}"),
        };
        let ids = |key: &str| -> Result<Vec<usize>> {
            let v = record.ints(key).ok_or_else(|| missing(key))?;
            v.iter()
                .map(|&x| {
                    usize::try_from(x).map_err(|_| Error::Schema {
                        index,
                        detail: format!("negative id in {key}"),
                    })
                })
                .collect()
        };
        let scalar = |key: &str| -> Result<usize> {
            match ids(key)?.as_slice() {
                [x] => Ok(*x),
                _ => Err(missing(key)),
            }
        };
        let float = |key: &str| -> Result<Option<f64>> {
            match record.get(key) {
                None => Ok(None),
                Some(Value::Bytes(b)) if b.len() == 8 => {
                    Ok(Some(f64::from_le_bytes(b[..].try_into().unwrap())))
                }
                Some(_) => Err(missing(key)),
            }
        };
        let geo = match (float(KEY_LAT)?, float(KEY_LON)?) {
            (Some(lat), Some(lon)) => Some(GeoPoint { lat, lon }),
            _ => None,
        };
        const KNOWN: [&str; 10] = [
            KEY_FORMAT,
            KEY_ENCODED,
            KEY_CLASS,
            KEY_UNPADDED,
            KEY_WIDTH,
            KEY_ORIG_WIDTH,
            KEY_HEIGHT,
            KEY_TEXT,
            KEY_LAT,
            KEY_LON,
        ];
        let extra = record
            .fields
            .iter()
            .filter(|(k, _)| !KNOWN.contains(&k.as_str()))
            .cloned()
            .collect();
        Ok(SignExample {
            format: record
                .text(KEY_FORMAT)
                .ok_or_else(|| missing(KEY_FORMAT))?
                .to_string(),
            encoded: record
                .bytes(KEY_ENCODED)
                .ok_or_else(|| missing(KEY_ENCODED))?
                .to_vec(),
            class: ids(KEY_CLASS)?,
            unpadded_class: ids(KEY_UNPADDED)?,
            width: scalar(KEY_WIDTH)?,
            orig_width: scalar(KEY_ORIG_WIDTH)?,
            height: scalar(KEY_HEIGHT)?,
            text: record
                .text(KEY_TEXT)
                .ok_or_else(|| missing(KEY_TEXT))?
                .to_string(),
            geo,
            extra,
        })
    }
}

/// Scales an RGB8 raster to a `1 × h × w × 3` tensor in [0, 1].
pub fn image_tensor(rgb: &[u8], height: usize, width: usize) -> Tensor<f32> {
    let data = rgb.iter().map(|&b| f32::from(b) / 255.0).collect();
    Tensor::new(vec![1, height, width, 3], data).expect("raster size matches its dimensions")
}
