use std::ffi::{c_char, CStr, CString};
use std::ptr;

use street_core::dataset::{generate_corpus, write_examples, CorpusSpec, Vocabulary};
use street_core::model::{save_checkpoint, StreetConfig, StreetModel as CoreModel};
use street_core::text::mini_charset;
use street_ffi::*;

fn last_error() -> String {
    let p = street_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn fold(s: &str) -> String {
    let input = CString::new(s).unwrap();
    let mut needed = 0;
    let status = unsafe { street_title_case_fold(input.as_ptr(), ptr::null_mut(), 0, &mut needed) };
    assert_eq!(status, StreetStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; needed];
    let status =
        unsafe { street_title_case_fold(input.as_ptr(), buf.as_mut_ptr(), buf.len(), &mut needed) };
    assert_eq!(status, StreetStatus::Ok);
    assert!(street_last_error().is_null());
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn title_case_through_the_abi() {
    assert_eq!(fold("RUE DE LA GARE"), "Rue de la Gare");
    assert_eq!(fold("IMPASSE DE L'ÉGLISE"), "Impasse de l'Église");
    assert_eq!(fold(""), "");
}

#[test]
fn null_and_bad_utf8_are_reported() {
    let mut needed = 0;
    let s = unsafe { street_title_case_fold(ptr::null(), ptr::null_mut(), 0, &mut needed) };
    assert_eq!(s, StreetStatus::NullArgument);
    assert!(last_error().contains("input"));

    let bad = [0xffu8, 0xfe, 0];
    let s = unsafe {
        street_title_case_fold(
            bad.as_ptr() as *const c_char,
            ptr::null_mut(),
            0,
            &mut needed,
        )
    };
    assert_eq!(s, StreetStatus::InvalidUtf8);
}

#[test]
fn scoring() {
    let truths = [
        CString::new("Rue de la Gare").unwrap(),
        CString::new("A B").unwrap(),
    ];
    let outputs = [
        CString::new("Rue de Gare").unwrap(),
        CString::new("A  B").unwrap(),
    ];
    let tp: Vec<*const c_char> = truths.iter().map(|s| s.as_ptr()).collect();
    let op: Vec<*const c_char> = outputs.iter().map(|s| s.as_ptr()).collect();
    let mut scores = StreetScores::default();
    let s = unsafe { street_score(tp.as_ptr(), op.as_ptr(), 2, &mut scores) };
    assert_eq!(s, StreetStatus::Ok);
    assert_eq!(scores.examples, 2);
    assert_eq!(scores.recall, 5.0 / 6.0);
    assert_eq!(scores.precision, 1.0);
    assert_eq!(scores.sequence_error, 0.5);

    let s = unsafe { street_score(ptr::null(), ptr::null(), 0, &mut scores) };
    assert_eq!(s, StreetStatus::Ok);
    assert_eq!(scores.examples, 0);
}

#[test]
fn params_totals() {
    let mut n = 0;
    let full = CString::new("full").unwrap();
    assert_eq!(
        unsafe { street_params_total(full.as_ptr(), &mut n) },
        StreetStatus::Ok
    );
    assert_eq!(n, 1_968_006);
    let bogus = CString::new("huge").unwrap();
    assert_eq!(
        unsafe { street_params_total(bogus.as_ptr(), &mut n) },
        StreetStatus::InvalidArgument
    );
    assert!(last_error().contains("huge"));
}

#[test]
fn charset_handles() {
    let mut cs = ptr::null_mut();
    assert_eq!(
        unsafe { street_charset_builtin(StreetCharsetKind::Full, &mut cs) },
        StreetStatus::Ok
    );
    let mut n = 0;
    assert_eq!(unsafe { street_charset_size(cs, &mut n) }, StreetStatus::Ok);
    assert_eq!(n, 134);
    unsafe { street_charset_free(cs) };
    unsafe { street_charset_free(ptr::null_mut()) };

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mini.txt");
    std::fs::write(&path, mini_charset().to_text()).unwrap();
    let p = CString::new(path.to_str().unwrap()).unwrap();
    let mut cs = ptr::null_mut();
    assert_eq!(
        unsafe { street_charset_load(p.as_ptr(), &mut cs) },
        StreetStatus::Ok
    );
    assert_eq!(unsafe { street_charset_size(cs, &mut n) }, StreetStatus::Ok);
    assert_eq!(n, 16);
    unsafe { street_charset_free(cs) };

    let missing = CString::new("/nonexistent/charset.txt").unwrap();
    assert_eq!(
        unsafe { street_charset_load(missing.as_ptr(), &mut cs) },
        StreetStatus::Io
    );
}

#[test]
fn read_records_and_predict() {
    let dir = tempfile::tempdir().unwrap();
    let charset = mini_charset();
    let config = StreetConfig::mini();
    let spec = CorpusSpec::new(3, config.layout(), Vocabulary::Mini);
    let examples = generate_corpus(4, &spec, &charset).unwrap();
    let data = dir.path().join("d.fsnl");
    write_examples(&data, &examples).unwrap();
    let ckpt = dir.path().join("m.ckpt");
    let model = CoreModel::<f32>::build(config, 1).unwrap();
    save_checkpoint(&model, &ckpt).unwrap();

    let mut m = ptr::null_mut();
    let p = CString::new(ckpt.to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { street_model_load(p.as_ptr(), &mut m) },
        StreetStatus::Ok
    );
    let (mut h, mut w, mut classes) = (0, 0, 0);
    assert_eq!(
        unsafe { street_model_input_size(m, &mut h, &mut w) },
        StreetStatus::Ok
    );
    assert_eq!((h, w), (36, 72));
    assert_eq!(
        unsafe { street_model_classes(m, &mut classes) },
        StreetStatus::Ok
    );
    assert_eq!(classes, 16);
    let mut cs = ptr::null_mut();
    unsafe { street_charset_builtin(StreetCharsetKind::Mini, &mut cs) };

    let mut r = ptr::null_mut();
    let p = CString::new(data.to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { street_reader_open(p.as_ptr(), &mut r) },
        StreetStatus::Ok
    );
    let mut seen = 0;
    loop {
        let mut ex = ptr::null_mut();
        let status = unsafe { street_reader_next(r, &mut ex) };
        if status == StreetStatus::EndOfStream {
            break;
        }
        assert_eq!(status, StreetStatus::Ok);
        let mut buf = [0 as c_char; 64];
        let mut needed = 0;
        assert_eq!(
            unsafe { street_example_text(ex, buf.as_mut_ptr(), buf.len(), &mut needed) },
            StreetStatus::Ok
        );
        let truth = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
        assert_eq!(truth, examples[seen].text);

        let (mut rgb, mut len, mut eh, mut ew) = (ptr::null(), 0, 0, 0);
        assert_eq!(
            unsafe { street_example_image(ex, &mut rgb, &mut len, &mut eh, &mut ew) },
            StreetStatus::Ok
        );
        assert_eq!((len, eh, ew), (36 * 72 * 3, 36, 72));
        let want = model
            .predict_text(&examples[seen].image_tensor(), &charset)
            .unwrap();
        let status = unsafe {
            street_model_predict(m, cs, rgb, len, buf.as_mut_ptr(), buf.len(), &mut needed)
        };
        assert_eq!(status, StreetStatus::Ok);
        assert_eq!(
            unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(),
            want
        );

        let status = unsafe {
            street_model_predict(
                m,
                cs,
                rgb,
                len - 1,
                buf.as_mut_ptr(),
                buf.len(),
                &mut needed,
            )
        };
        assert_eq!(status, StreetStatus::InvalidArgument);
        unsafe { street_example_free(ex) };
        seen += 1;
    }
    assert_eq!(seen, 3);
    unsafe {
        street_reader_free(r);
        street_model_free(m);
        street_charset_free(cs);
    }
}

#[test]
fn corrupt_file_is_corrupt_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.fsnl");
    let spec = CorpusSpec::new(2, StreetConfig::mini().layout(), Vocabulary::Mini);
    write_examples(&data, &generate_corpus(1, &spec, &mini_charset()).unwrap()).unwrap();
    let mut bytes = std::fs::read(&data).unwrap();
    let n = bytes.len();
    bytes[n - 10] ^= 0x40;
    std::fs::write(&data, bytes).unwrap();

    let p = CString::new(data.to_str().unwrap()).unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(
        unsafe { street_reader_open(p.as_ptr(), &mut r) },
        StreetStatus::Ok
    );
    let mut ex = ptr::null_mut();
    assert_eq!(unsafe { street_reader_next(r, &mut ex) }, StreetStatus::Ok);
    unsafe { street_example_free(ex) };
    assert_eq!(
        unsafe { street_reader_next(r, &mut ex) },
        StreetStatus::CorruptData
    );
    assert!(last_error().contains("record 1"), "{}", last_error());
    unsafe { street_reader_free(r) };
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(street_version()) }
        .to_str()
        .unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
