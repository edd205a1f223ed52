use proptest::prelude::*;

use street_core::ctc::{ctc_brute_force, ctc_greedy_decode, ctc_loss, min_frames, CtcProblem};
use street_core::dataset::{
    make_splits, GeoPoint, Placed, Record, RecordReader, RecordWriter, Value,
};
use street_core::metrics::{sequence_error, word_precision, word_recall, EvalPair};
use street_core::tensor::{reverse_axis, softmax_rows, Graph, ReshapeSpec, Tensor};
use street_core::text::{fold_spaces, full_charset, is_stop_word, title_case_fold, MAX_LABEL_LEN};
use street_core::trainer::clip_global_norm;

fn value() -> impl Strategy<Value = Value> {
    prop_oneof![
        prop::collection::vec(any::<u8>(), 0..40).prop_map(Value::Bytes),
        prop::collection::vec(any::<i64>(), 0..10).prop_map(Value::Ints),
        ".{0,20}".prop_map(Value::Text),
    ]
}

fn record() -> impl Strategy<Value = Record> {
    prop::collection::vec(("[a-z/_]{1,12}", value()), 0..6).prop_map(|fields| Record { fields })
}

fn write_all(records: &[Record]) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut w = RecordWriter::new(&mut buf).unwrap();
    for r in records {
        w.write(r).unwrap();
    }
    assert_eq!(w.finish().unwrap(), records.len());
    buf
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn records_round_trip(records in prop::collection::vec(record(), 0..5)) {
        let bytes = write_all(&records);
        let back: Vec<Record> = RecordReader::new(bytes.as_slice())
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        prop_assert_eq!(&back, &records);
        prop_assert_eq!(write_all(&back), bytes);
    }

    #[test]
    fn any_flipped_byte_is_an_error(records in prop::collection::vec(record(), 1..4), pick in any::<prop::sample::Index>(), bit in 0u8..8) {
        let mut bytes = write_all(&records);
        let i = pick.index(bytes.len());
        bytes[i] ^= 1 << bit;
        let result: Result<Vec<Record>, _> = RecordReader::new(bytes.as_slice()).and_then(|r| r.collect());
        prop_assert!(result.is_err());
    }

    #[test]
    fn title_case_is_idempotent(s in "[a-zA-Zéèêàçôî' -]{0,30}") {
        let once = title_case_fold(&s);
        prop_assert_eq!(title_case_fold(&once), once);
    }

    #[test]
    fn title_case_word_shapes(words in prop::collection::vec("[a-zA-Z]{1,8}", 1..6)) {
        let out = title_case_fold(&words.join(" "));
        for w in out.split(' ') {
            if is_stop_word(w) {
                prop_assert_eq!(w.to_lowercase(), w);
            } else {
                let first = w.chars().next().unwrap();
                if !(w.starts_with("d'") || w.starts_with("l'")) {
                    prop_assert!(first.is_uppercase(), "{:?}", w);
                }
            }
        }
    }

    #[test]
    fn encode_decode_round_trip(ids in prop::collection::vec(0usize..133, 0..=MAX_LABEL_LEN)) {
        let cs = full_charset();
        let text = cs.decode(&ids);
        let enc = cs.encode(&text).unwrap();
        prop_assert_eq!(enc.padded.len(), MAX_LABEL_LEN);
        prop_assert_eq!(cs.decode(&enc.unpadded), text);
        prop_assert!(enc.padded[enc.unpadded.len()..].iter().all(|&id| id == cs.null()));
    }

    #[test]
    fn metrics_duality_and_ranges(pairs in prop::collection::vec(("[ab ]{0,8}", "[ab ]{0,8}"), 0..6)) {
        let pairs: Vec<EvalPair> = pairs.into_iter().map(|(t, o)| EvalPair::new(t, o)).collect();
        let swapped: Vec<EvalPair> = pairs.iter().map(EvalPair::swapped).collect();
        prop_assert_eq!(word_recall(&pairs), word_precision(&swapped));
        for m in [word_recall(&pairs), word_precision(&pairs), sequence_error(&pairs)] {
            prop_assert!((0.0..=1.0).contains(&m));
        }
        if sequence_error(&pairs) == 0.0 {
            prop_assert_eq!(word_recall(&pairs), 1.0);
            prop_assert_eq!(word_precision(&pairs), 1.0);
        }
    }

    #[test]
    fn metrics_ignore_extra_spaces(pairs in prop::collection::vec(("[ab ]{0,8}", "[ab ]{0,8}"), 1..6)) {
        let pairs: Vec<EvalPair> = pairs.into_iter().map(|(t, o)| EvalPair::new(t, o)).collect();
        let padded: Vec<EvalPair> = pairs
            .iter()
            .map(|p| EvalPair::new(format!("  {} ", p.truth.replace(' ', "   ")), p.output.replace(' ', "  ")))
            .collect();
        prop_assert_eq!(word_recall(&pairs), word_recall(&padded));
        prop_assert_eq!(word_precision(&pairs), word_precision(&padded));
        prop_assert_eq!(sequence_error(&pairs), sequence_error(&padded));
        prop_assert_eq!(fold_spaces(&padded[0].truth), fold_spaces(&pairs[0].truth));
    }

    #[test]
    fn ctc_matches_brute_force(classes in 2usize..5, frames in 1usize..6, label_seed in prop::collection::vec(0usize..16, 0..3), logits_seed in prop::collection::vec(-2.0f64..2.0, 30)) {
        let label: Vec<usize> = label_seed.iter().map(|l| l % (classes - 1)).collect();
        prop_assume!(min_frames(&label) <= frames);
        let logits = &logits_seed[..frames * classes];
        let p = CtcProblem::new(logits, classes, &label);
        let (loss, grad) = ctc_loss(&p).unwrap();
        let brute = ctc_brute_force(&p).unwrap();
        prop_assert!(loss >= 0.0);
        prop_assert!(((loss - brute) / brute.max(1e-300)).abs() < 1e-9);
        // softmax-space gradient rows sum to zero
        for row in grad.chunks(classes) {
            prop_assert!(row.iter().sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn greedy_decode_never_emits_null(classes in 2usize..6, logits in prop::collection::vec(-2.0f64..2.0, 1..40)) {
        let n = logits.len() - logits.len() % classes;
        prop_assume!(n > 0);
        let out = ctc_greedy_decode(&logits[..n], classes);
        prop_assert!(out.iter().all(|&c| c < classes - 1));
        prop_assert!(out.len() <= n / classes);
    }

    #[test]
    fn softmax_rows_are_distributions(depth in 1usize..6, x in prop::collection::vec(-30.0f64..30.0, 1..30)) {
        let n = x.len() - x.len() % depth;
        prop_assume!(n > 0);
        let y = softmax_rows(&x[..n], depth);
        for row in y.chunks(depth) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn reverse_twice_is_identity(dims in prop::collection::vec(1usize..4, 4), axis in 0usize..4) {
        let n: usize = dims.iter().product();
        let t = Tensor::new(dims, (0..n).map(|i| i as f64).collect()).unwrap();
        prop_assert_eq!(reverse_axis(&reverse_axis(&t, axis), axis), t);
    }

    #[test]
    fn reshape_preserves_values(v in 1usize..4, w in 1usize..4) {
        let n = v * 2 * w * 3;
        let t = Tensor::new(vec![1, 2, v * w, 3], (0..n).map(|i| i as f64).collect()).unwrap();
        let mut g = Graph::new();
        let x = g.constant(t.clone());
        let y = g.generic_reshape(x, &ReshapeSpec::new(2, vec![(v, 0), (w, 2)])).unwrap();
        let mut sorted = g.value(y).data().to_vec();
        sorted.sort_by(f64::total_cmp);
        prop_assert_eq!(sorted, t.data().to_vec());
    }

    #[test]
    fn clipping_bounds_the_norm(values in prop::collection::vec(-100.0f64..100.0, 1..20), max in 0.1f64..50.0) {
        let mut grads = vec![Tensor::new(vec![values.len()], values).unwrap()];
        let before = clip_global_norm(&mut grads, max);
        let after = grads[0].data().iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(after <= before.min(max) * (1.0 + 1e-12));
    }
}

#[derive(Debug, Clone)]
struct Pin {
    at: GeoPoint,
    text: String,
}

impl Placed for Pin {
    fn position(&self) -> Option<GeoPoint> {
        Some(self.at)
    }

    fn truth(&self) -> &str {
        &self.text
    }
}

fn pins() -> impl Strategy<Value = Vec<Pin>> {
    prop::collection::vec((48.80f64..48.90, 2.30f64..2.40, 0usize..40), 0..120).prop_map(|v| {
        v.into_iter()
            .map(|(lat, lon, name)| Pin {
                at: GeoPoint::new(lat, lon),
                text: format!("Rue {name}"),
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn splits_are_disjoint_and_walled(examples in pins(), wall in 10.0f64..300.0) {
        let total = examples.len();
        let set = make_splits(examples, [0.7, 0.1, 0.1, 0.1], wall).unwrap();
        let kept: usize = set.subsets.iter().map(|(_, m)| m.len()).sum();
        prop_assert_eq!(kept + set.dropped_in_walls + set.dropped_duplicates + set.unassigned, total);
        for (i, (_, a)) in set.subsets.iter().enumerate() {
            for (_, b) in &set.subsets[i + 1..] {
                for x in a {
                    for y in b {
                        prop_assert_ne!(&x.text, &y.text);
                        prop_assert!(x.at.distance_m(&y.at) >= wall);
                    }
                }
            }
        }
    }
}
