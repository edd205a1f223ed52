//! C ABI over `street-core`.
//!
//! Every function returns a [`StreetStatus`]; on failure a message is
//! kept per thread and can be read with [`street_last_error`]. Handles
//! are opaque and must be released with their matching `_free`.
//! Strings are NUL-terminated UTF-8. Functions that produce text copy it
//! into a caller buffer and always report the size needed, including
//! the terminator.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use street_core::dataset::{RecordReader, SignExample};
use street_core::metrics::{EvalPair, Scores};
use street_core::model::{closed_form_counts, load_checkpoint, StreetConfig};
use street_core::text::{full_charset, mini_charset, title_case_fold};
use street_core::Error;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreetStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    CorruptData = 4,
    InvalidArgument = 5,
    BufferTooSmall = 6,
    EndOfStream = 7,
    Panic = 8,
}

/// Built-in charsets.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreetCharsetKind {
    /// 134 classes for full-size models.
    Full = 0,
    /// 16 classes for the mini preset.
    Mini = 1,
}

/// Corpus scores, as fractions.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StreetScores {
    pub recall: f64,
    pub precision: f64,
    pub sequence_error: f64,
    pub examples: usize,
}

pub struct StreetCharset {
    inner: street_core::text::Charset,
}

pub struct StreetModel {
    inner: street_core::model::StreetModel<f32>,
}

pub struct StreetReader {
    inner: RecordReader<std::io::BufReader<std::fs::File>>,
    next_index: usize,
}

pub struct StreetExample {
    inner: SignExample,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(StreetStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io(_) => StreetStatus::Io,
            Error::CorruptRecord { .. } | Error::BadHeader(_) | Error::Schema { .. } => {
                StreetStatus::CorruptData
            }
            _ => StreetStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> StreetStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            StreetStatus::Ok
        }
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            StreetStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(StreetStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(StreetStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Copies `s` plus a terminator into `buf` when it fits.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Fail> {
    let size = s.len() + 1;
    if !needed.is_null() {
        needed.write(size);
    }
    if buf.is_null() || len < size {
        return Err(Fail(
            StreetStatus::BufferTooSmall,
            format!("buffer of {len} bytes, {size} needed"),
        ));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

/// Message for the last failed call on this thread, or null after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn street_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn street_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Map-style Title Case fold of `input`.
///
/// # Safety
/// `input` must be a NUL-terminated string; `buf` must hold `len` bytes;
/// `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn street_title_case_fold(
    input: *const c_char,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> StreetStatus {
    guard(|| {
        let s = text(input, "input")?;
        copy_out(&title_case_fold(s), buf, len, needed)
    })
}

/// Scores `count` parallel truth/output strings.
///
/// # Safety
/// `truths` and `outputs` must each point to `count` NUL-terminated
/// strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn street_score(
    truths: *const *const c_char,
    outputs: *const *const c_char,
    count: usize,
    out: *mut StreetScores,
) -> StreetStatus {
    guard(|| {
        if count > 0 && (truths.is_null() || outputs.is_null()) {
            return Err(null("truths or outputs"));
        }
        let mut pairs = Vec::with_capacity(count);
        for i in 0..count {
            let t = text(*truths.add(i), &format!("truths[{i}]"))?;
            let o = text(*outputs.add(i), &format!("outputs[{i}]"))?;
            pairs.push(EvalPair::new(t, o));
        }
        let s = Scores::of(&pairs);
        put(
            out,
            StreetScores {
                recall: s.recall,
                precision: s.precision,
                sequence_error: s.sequence_error,
                examples: s.examples,
            },
            "out",
        )
    })
}

/// Total weight count of a preset (`"full"` or `"mini"`).
///
/// # Safety
/// `preset` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn street_params_total(
    preset: *const c_char,
    out: *mut usize,
) -> StreetStatus {
    guard(|| {
        let c = StreetConfig::preset(text(preset, "preset")?)?;
        put(
            out,
            closed_form_counts(&c).iter().map(|r| r.weights).sum(),
            "out",
        )
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn street_charset_builtin(
    kind: StreetCharsetKind,
    out: *mut *mut StreetCharset,
) -> StreetStatus {
    guard(|| {
        let inner = match kind {
            StreetCharsetKind::Full => full_charset(),
            StreetCharsetKind::Mini => mini_charset(),
        };
        put(out, Box::into_raw(Box::new(StreetCharset { inner })), "out")
    })
}

/// Loads a `<id>\t<string>` charset file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn street_charset_load(
    path: *const c_char,
    out: *mut *mut StreetCharset,
) -> StreetStatus {
    guard(|| {
        let p = text(path, "path")?;
        let f = std::fs::File::open(p).map_err(|e| Fail(StreetStatus::Io, format!("{p}: {e}")))?;
        let inner = street_core::text::Charset::load(std::io::BufReader::new(f))?;
        put(out, Box::into_raw(Box::new(StreetCharset { inner })), "out")
    })
}

/// # Safety
/// `charset` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn street_charset_size(
    charset: *const StreetCharset,
    out: *mut usize,
) -> StreetStatus {
    guard(|| put(out, handle(charset, "charset")?.inner.size(), "out"))
}

/// # Safety
/// `charset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn street_charset_free(charset: *mut StreetCharset) {
    if !charset.is_null() {
        drop(Box::from_raw(charset));
    }
}

/// Loads a checkpoint written by `street train`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn street_model_load(
    path: *const c_char,
    out: *mut *mut StreetModel,
) -> StreetStatus {
    guard(|| {
        let inner = load_checkpoint(PathBuf::from(text(path, "path")?))?;
        put(out, Box::into_raw(Box::new(StreetModel { inner })), "out")
    })
}

/// Input image size in pixels: `height` rows of `width` RGB pixels.
///
/// # Safety
/// `model` must be a live handle; `height` and `width` must be writable.
#[no_mangle]
pub unsafe extern "C" fn street_model_input_size(
    model: *const StreetModel,
    height: *mut usize,
    width: *mut usize,
) -> StreetStatus {
    guard(|| {
        let layout = handle(model, "model")?.inner.config.layout();
        put(height, layout.height(), "height")?;
        put(width, layout.width(), "width")
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn street_model_classes(
    model: *const StreetModel,
    out: *mut usize,
) -> StreetStatus {
    guard(|| put(out, handle(model, "model")?.inner.config.classes, "out"))
}

/// Transcribes a row-major RGB image of the model's input size.
///
/// # Safety
/// Handles must be live; `rgb` must hold `rgb_len` bytes; `buf` must hold
/// `len` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn street_model_predict(
    model: *const StreetModel,
    charset: *const StreetCharset,
    rgb: *const u8,
    rgb_len: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> StreetStatus {
    guard(|| {
        let m = &handle(model, "model")?.inner;
        let cs = &handle(charset, "charset")?.inner;
        if rgb.is_null() {
            return Err(null("rgb"));
        }
        let layout = m.config.layout();
        if rgb_len != layout.image_bytes() {
            return Err(Fail(
                StreetStatus::InvalidArgument,
                format!(
                    "image has {rgb_len} bytes, model expects {}",
                    layout.image_bytes()
                ),
            ));
        }
        let pixels = std::slice::from_raw_parts(rgb, rgb_len);
        let image = street_core::dataset::image_tensor(pixels, layout.height(), layout.width());
        copy_out(&m.predict_text(&image, cs)?, buf, len, needed)
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn street_model_free(model: *mut StreetModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Opens a record file for sequential reading.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn street_reader_open(
    path: *const c_char,
    out: *mut *mut StreetReader,
) -> StreetStatus {
    guard(|| {
        let inner = RecordReader::open(text(path, "path")?)?;
        put(
            out,
            Box::into_raw(Box::new(StreetReader {
                inner,
                next_index: 0,
            })),
            "out",
        )
    })
}

/// Reads the next example. Returns `EndOfStream` after the last one.
///
/// # Safety
/// `reader` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn street_reader_next(
    reader: *mut StreetReader,
    out: *mut *mut StreetExample,
) -> StreetStatus {
    guard(|| {
        let r = reader.as_mut().ok_or_else(|| null("reader"))?;
        let record = match r.inner.next() {
            None => return Err(Fail(StreetStatus::EndOfStream, "no more records".into())),
            Some(rec) => rec?,
        };
        let inner = SignExample::from_record(&record, r.next_index)?;
        r.next_index += 1;
        put(out, Box::into_raw(Box::new(StreetExample { inner })), "out")
    })
}

/// # Safety
/// `reader` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn street_reader_free(reader: *mut StreetReader) {
    if !reader.is_null() {
        drop(Box::from_raw(reader));
    }
}

/// Truth text of an example.
///
/// # Safety
/// `example` must be a live handle; `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn street_example_text(
    example: *const StreetExample,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> StreetStatus {
    guard(|| copy_out(&handle(example, "example")?.inner.text, buf, len, needed))
}

/// Borrowed view of the example's RGB pixels, valid while the handle is.
///
/// # Safety
/// `example` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn street_example_image(
    example: *const StreetExample,
    rgb: *mut *const u8,
    rgb_len: *mut usize,
    height: *mut usize,
    width: *mut usize,
) -> StreetStatus {
    guard(|| {
        let ex = &handle(example, "example")?.inner;
        put(rgb, ex.encoded.as_ptr(), "rgb")?;
        put(rgb_len, ex.encoded.len(), "rgb_len")?;
        put(height, ex.height, "height")?;
        put(width, ex.width, "width")
    })
}

/// # Safety
/// `example` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn street_example_free(example: *mut StreetExample) {
    if !example.is_null() {
        drop(Box::from_raw(example));
    }
}
