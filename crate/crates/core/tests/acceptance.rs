//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use street_core::ctc::{ctc_brute_force, ctc_loss, min_frames, CtcProblem};
use street_core::dataset::{
    filter_encodable, generate_corpus, make_splits, read_examples, synth_sign, write_examples,
    CorpusSpec, Style, Vocabulary,
};
use street_core::metrics::{sequence_error, word_precision, word_recall, EvalPair};
use street_core::model::{StreetConfig, StreetModel};
use street_core::tensor::Tensor;
use street_core::text::{full_charset, mini_charset, title_case_fold, MAX_LABEL_LEN};
use street_core::trainer::{evaluate, train, AdamConfig, TrainOptions};
use street_core::Error;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    if took > limit {
        Err(format!(
            "took {:.1}s, limit {:.0}s",
            took.as_secs_f64(),
            limit.as_secs_f64()
        ))
    } else {
        Ok(took)
    }
}

fn ensure(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn params_report() -> Verdict {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_street"))
        .args(["params", "--preset", "full"])
        .output()
        .map_err(|e| e.to_string())?;
    let took = within(Duration::from_secs(1), start)?;
    ensure(
        out.status.success(),
        format!("exit {:?}", out.status.code()),
    )?;
    let text = String::from_utf8_lossy(&out.stdout);
    let counts: HashMap<&str, usize> = text
        .lines()
        .filter_map(|l| {
            let (k, v) = l.split_once(' ')?;
            Some((k, v.parse().ok()?))
        })
        .collect();
    let expected = [
        ("Conv0", 1216),
        ("Conv1", 25664),
        ("V-SumLSTM0", 33024),
        ("V-SumLSTM1", 33024),
        ("V-SumLSTM2", 33024),
        ("V-SumLSTM3", 33024),
        ("LTRLSTM0", 197120),
        ("RTLLSTM", 131584),
        ("LTRLSTM1", 787456),
        ("Softmax", 34438),
        ("BidiLSTM0", 197632),
        ("BidiLSTM1", 263168),
        ("BidiLSTM2", 197632),
    ];
    for (name, n) in expected {
        ensure(
            counts.get(name) == Some(&n),
            format!("{name}: got {:?}, want {n}", counts.get(name)),
        )?;
    }
    // independent closed form: 4n(i + n + 1) per LSTM direction
    let lstm = |i: usize, n: usize| 4 * n * (i + n + 1);
    ensure(lstm(64, 64) == 33024, "closed form, summarizer")?;
    ensure(lstm(64, 128) * 2 == 197632, "closed form, outer reader")?;
    ensure(lstm(128, 128) * 2 == 263168, "closed form, middle reader")?;
    let total: usize = expected.iter().map(|(_, n)| n).sum();
    ensure(total == 1_968_006, format!("rows sum to {total}"))?;
    ensure(
        text.lines().any(|l| l == "total 1968006 (1,968,006)"),
        "total line",
    )?;
    ensure(
        text.contains("263168x2 + 394240"),
        "missing published reader counts",
    )?;
    ensure(text.contains("2.2M"), "missing published total")?;
    Ok(format!(
        "13 rows exact, total 1,968,006, deviation noted, {:.0} ms",
        took.as_secs_f64() * 1e3
    ))
}

/// Independent oracle: collapse every path and sum the matching ones.
fn collapse(path: &[usize], null: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = None;
    for &c in path {
        if Some(c) != prev && c != null {
            out.push(c);
        }
        prev = Some(c);
    }
    out
}

fn paths_probability(logits: &[f64], classes: usize, label: &[usize]) -> f64 {
    let probs: Vec<Vec<f64>> = logits
        .chunks(classes)
        .map(|r| {
            let z: f64 = r.iter().map(|v| v.exp()).sum();
            r.iter().map(|v| v.exp() / z).collect()
        })
        .collect();
    let frames = probs.len();
    let mut total = 0.0;
    let mut path = vec![0; frames];
    for code in 0..classes.pow(frames as u32) {
        let mut c = code;
        let mut p = 1.0;
        for (t, slot) in path.iter_mut().enumerate() {
            *slot = c % classes;
            c /= classes;
            p *= probs[t][*slot];
        }
        if collapse(&path, classes - 1) == label {
            total += p;
        }
    }
    total
}

fn ctc_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let classes = rng.gen_range(2..=5);
        let (label, frames) = loop {
            let len = rng.gen_range(0..=3);
            let label: Vec<usize> = (0..len).map(|_| rng.gen_range(0..classes - 1)).collect();
            let frames = rng.gen_range(1..=8);
            if min_frames(&label) <= frames {
                break (label, frames);
            }
        };
        let logits: Vec<f64> = (0..frames * classes)
            .map(|_| rng.gen_range(-3.0..3.0))
            .collect();
        let p = CtcProblem::new(&logits, classes, &label);
        let (loss, _) = ctc_loss(&p).map_err(|e| format!("instance {i}: {e}"))?;
        let brute = ctc_brute_force(&p).map_err(|e| format!("instance {i}: {e}"))?;
        let oracle = -paths_probability(&logits, classes, &label).ln();
        for reference in [brute, oracle] {
            let rel = (loss - reference).abs() / reference.abs().max(1e-300);
            worst = worst.max(rel);
            if rel > 1e-9 {
                return Err(format!(
                    "instance {i}: loss {loss} vs {reference} (relative {rel:.2e})"
                ));
            }
        }
    }
    let took = within(Duration::from_secs(30), start)?;
    Ok(format!(
        "500 instances, worst relative {worst:.1e}, {:.1}s",
        took.as_secs_f64()
    ))
}

fn gradient_suite() -> Verdict {
    let start = Instant::now();
    let cases = common::grad::all_cases();
    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    for c in &cases {
        let (ok, w) = common::grad::passes(c);
        worst = worst.max(w);
        if !ok {
            failed.push(format!("{} ({w:.2e})", c.name));
        }
    }
    let took = within(Duration::from_secs(300), start)?;
    ensure(failed.is_empty(), format!("failed: {}", failed.join(", ")))?;
    Ok(format!(
        "{} cases, worst relative {worst:.1e}, {:.1}s",
        cases.len(),
        took.as_secs_f64()
    ))
}

fn overfit() -> Verdict {
    let start = Instant::now();
    let config = StreetConfig::mini();
    let charset = mini_charset();
    let names = Vocabulary::Mini.all_names();
    let examples = (0..32)
        .map(|i| {
            synth_sign(
                100 + i as u64,
                &names[i],
                1 + i % 2,
                &Style::clean(),
                config.layout(),
                &charset,
            )
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut model = StreetModel::<f32>::build(config, 7).map_err(|e| e.to_string())?;
    let opts = TrainOptions {
        steps: 5000,
        batch: 1,
        eval_every: 250,
        seed: 1,
        adam: AdamConfig {
            lr: 1e-3,
            ..AdamConfig::default()
        },
        clip: Some(10.0),
        checkpoint_dir: None,
        stop_when_perfect: true,
        timestamps: false,
    };
    let log = train(&mut model, &examples, &charset, &opts, |_| {}).map_err(|e| e.to_string())?;
    let report = evaluate(&model, &examples, &charset).map_err(|e| e.to_string())?;
    let took = within(Duration::from_secs(600), start)?;
    let s = report.scores;
    ensure(
        log.steps_run() <= 5000,
        format!("{} steps", log.steps_run()),
    )?;
    ensure(
        s.sequence_error == 0.0 && s.recall == 1.0 && s.precision == 1.0,
        format!(
            "after {} steps: sequence error {:.4}, recall {:.4}, precision {:.4}",
            log.steps_run(),
            s.sequence_error,
            s.recall,
            s.precision
        ),
    )?;
    Ok(format!(
        "32 signs perfect after {} steps, {:.0}s",
        log.steps_run(),
        took.as_secs_f64()
    ))
}

fn metrics_goldens() -> Verdict {
    let gare = [EvalPair::new("Rue de la Gare", "Rue de Gare")];
    ensure(
        word_recall(&gare) == 3.0 / 4.0,
        format!("recall {}", word_recall(&gare)),
    )?;
    ensure(
        word_precision(&gare) == 1.0,
        format!("precision {}", word_precision(&gare)),
    )?;
    let three = [
        EvalPair::new("Rue Roi", "Rue Roi"),
        EvalPair::new("Rue Roi", "Rue Rat"),
        EvalPair::new("le Pin", "le Pin"),
    ];
    ensure(
        sequence_error(&three) == 1.0 / 3.0,
        format!("sequence error {}", sequence_error(&three)),
    )?;
    let folded = [EvalPair::new("A B", "A  B")];
    ensure(sequence_error(&folded) == 0.0, "space folding")?;
    ensure(
        word_recall(&folded) == 1.0 && word_precision(&folded) == 1.0,
        "folding in word scores",
    )?;
    ensure(
        word_precision(&[EvalPair::new("X", "X Y")]) == 0.5,
        "X Y precision",
    )?;
    ensure(
        word_recall(&[EvalPair::new("Rue", "")]) == 0.0,
        "empty output recall",
    )?;
    ensure(
        word_precision(&[EvalPair::new("", "")]) == 1.0,
        "both empty precision",
    )?;
    Ok("3/4 recall, 1.0 precision, 1/3 sequence error, folding".into())
}

const NORMALIZER_CASES: [(&str, &str); 25] = [
    ("RUE DE LA GARE", "Rue de la Gare"),
    ("IMPASSE DE L'EGLISE", "Impasse de l'Eglise"),
    ("rue des lilas", "Rue des Lilas"),
    ("CHEMIN AU BOIS", "Chemin au Bois"),
    ("PLACE AUX HERBES", "Place aux Herbes"),
    ("RUE DU MOULIN", "Rue du Moulin"),
    ("RUE PIERRE ET MARIE CURIE", "Rue Pierre et Marie Curie"),
    ("ALLÉE LE NÔTRE", "Allée le Nôtre"),
    ("RUE LES ORMES", "Rue les Ormes"),
    ("CHEMIN SOUS LES VIGNES", "Chemin sous les Vignes"),
    ("QUAI SUR L'EAU", "Quai sur l'Eau"),
    ("RUE D'ALSACE", "Rue d'Alsace"),
    ("avenue d'italie", "Avenue d'Italie"),
    ("L'ORANGERIE", "l'Orangerie"),
    ("QUAI DE L'HÔTEL DE VILLE", "Quai de l'Hôtel de Ville"),
    ("école", "École"),
    ("ÉCOLE", "École"),
    ("RUE DES ÉCOLES", "Rue des Écoles"),
    ("À LA CARTE", "À la Carte"),
    ("ÇA VA", "Ça Va"),
    ("îLE DE FRANCE", "Île de France"),
    ("ÊTRE SUR MER", "Être sur Mer"),
    ("D'ÉTÉ", "d'Été"),
    ("LE CLOS", "le Clos"),
    ("Rue de la Gare", "Rue de la Gare"),
];

fn normalizer() -> Verdict {
    let mut stop_words = BTreeSet::new();
    let mut prefixes = BTreeSet::new();
    for (input, want) in NORMALIZER_CASES {
        let got = title_case_fold(input);
        ensure(got == want, format!("{input:?} -> {got:?}, want {want:?}"))?;
        let again = title_case_fold(&got);
        ensure(
            again == got,
            format!("not idempotent on {got:?}: {again:?}"),
        )?;
        for w in want.split(' ') {
            if [
                "au", "aux", "de", "des", "du", "et", "la", "le", "les", "sous", "sur",
            ]
            .contains(&w)
            {
                stop_words.insert(w);
            }
            if w.starts_with("d'") || w.starts_with("l'") {
                prefixes.insert(&w[..2]);
            }
        }
    }
    ensure(
        stop_words.len() == 11,
        format!("stop words covered: {stop_words:?}"),
    )?;
    ensure(
        prefixes.len() == 2,
        format!("prefixes covered: {prefixes:?}"),
    )?;
    Ok("25 cases, 11 stop words, 2 prefixes, idempotent".into())
}

fn pipeline() -> Verdict {
    let charset = full_charset();
    let layout = StreetConfig::mini().layout();
    let spec = CorpusSpec::new(1000, layout, Vocabulary::French);
    let examples = generate_corpus(11, &spec, &charset).map_err(|e| e.to_string())?;
    ensure(examples.len() == 1000, "corpus size")?;
    ensure(examples.iter().all(|e| e.geo.is_some()), "untagged example")?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = dir.path().join("a.fsnl");
    let second = dir.path().join("b.fsnl");
    write_examples(&first, &examples).map_err(|e| e.to_string())?;
    let back = read_examples(&first).map_err(|e| e.to_string())?;
    ensure(back == examples, "examples changed in round trip")?;
    write_examples(&second, &back).map_err(|e| e.to_string())?;
    let bytes = std::fs::read(&first).map_err(|e| e.to_string())?;
    ensure(
        bytes == std::fs::read(&second).map_err(|e| e.to_string())?,
        "rewrite not byte-identical",
    )?;

    let mut bad = bytes.clone();
    let mid = bad.len() / 2;
    bad[mid] ^= 0x01;
    std::fs::write(&second, &bad).map_err(|e| e.to_string())?;
    match read_examples(&second) {
        Err(Error::CorruptRecord { .. }) => {}
        other => {
            return Err(format!(
                "flipped byte not detected: {:?}",
                other.map(|v| v.len())
            ))
        }
    }

    let (kept, unencodable) = filter_encodable(examples, &charset);
    let set = make_splits(kept, [0.8, 0.1, 0.05, 0.05], 100.0).map_err(|e| e.to_string())?;
    let mut owner: HashMap<&str, &str> = HashMap::new();
    let mut survivors = 0;
    for (name, members) in &set.subsets {
        for e in members {
            survivors += 1;
            if let Some(prev) = owner.insert(&e.text, name) {
                ensure(prev == name, format!("{:?} in {prev} and {name}", e.text))?;
            }
            let ids = charset
                .encode_ids(&e.text)
                .map_err(|err| format!("{:?}: {err}", e.text))?;
            ensure(
                ids.len() <= MAX_LABEL_LEN,
                format!("{:?} needs {} ids", e.text, ids.len()),
            )?;
        }
    }
    let mut closest = f64::INFINITY;
    for (i, (_, a)) in set.subsets.iter().enumerate() {
        for (_, b) in &set.subsets[i + 1..] {
            for x in a {
                for y in b {
                    closest = closest.min(x.geo.unwrap().distance_m(&y.geo.unwrap()));
                }
            }
        }
    }
    ensure(
        closest >= 100.0,
        format!("subsets only {closest:.1} m apart"),
    )?;
    ensure(survivors > 0, "nothing survived")?;
    Ok(format!(
        "{survivors} survivors ({unencodable} unencodable), closest cross-subset pair {closest:.0} m, round trip exact, CRC fires"
    ))
}

fn shape_audit() -> Verdict {
    let model = StreetModel::<f32>::build(StreetConfig::full(), 0).map_err(|e| e.to_string())?;
    let image = Tensor::zeros(vec![1, 150, 600, 3]);
    let shapes = model.trace_shapes(&image).map_err(|e| e.to_string())?;
    let find = |name: &str| shapes.iter().find(|s| s.name == name);
    let expected: [(&str, &[usize], &[usize]); 14] = [
        ("Reshape0", &[1, 150, 600, 3], &[4, 150, 150, 3]),
        ("Conv0", &[4, 150, 150, 3], &[4, 150, 150, 16]),
        ("Maxpool0", &[4, 150, 150, 16], &[4, 75, 75, 16]),
        ("Conv1", &[4, 75, 75, 16], &[4, 75, 75, 64]),
        ("Maxpool1", &[4, 75, 75, 64], &[4, 25, 25, 64]),
        // 64 summary cells: 33024 weights = 4 * 64 * (64 + 64 + 1)
        ("V-SumLSTM0", &[4, 25, 25, 64], &[4, 1, 25, 64]),
        ("V-SumLSTM3", &[4, 25, 25, 64], &[4, 1, 25, 64]),
        ("BidiLSTM0", &[4, 1, 25, 64], &[4, 1, 25, 256]),
        ("BidiLSTM1", &[4, 1, 25, 128], &[4, 1, 25, 256]),
        ("XConcat", &[4, 1, 25, 256], &[4, 1, 75, 256]),
        ("LTRLSTM0", &[4, 1, 75, 256], &[4, 1, 75, 128]),
        ("RTLLSTM", &[4, 1, 75, 128], &[4, 1, 75, 128]),
        ("Reshape1", &[4, 1, 75, 128], &[1, 1, 75, 512]),
        ("Softmax", &[1, 1, 75, 256], &[1, 1, 75, 134]),
    ];
    for (name, input, output) in expected {
        let s = find(name).ok_or_else(|| format!("{name} missing from trace"))?;
        ensure(
            s.inputs.first().map(Vec::as_slice) == Some(input) && s.output == output,
            format!(
                "{name}: {:?} -> {:?}, want {input:?} -> {output:?}",
                s.inputs, s.output
            ),
        )?;
    }
    ensure(
        find("LTRLSTM1").map(|s| s.output.clone()) == Some(vec![1, 1, 75, 256]),
        "final LSTM",
    )?;
    ensure(2 * MAX_LABEL_LEN + 1 == 75, "75 frames")?;
    ensure(StreetConfig::full().frames() == 75, "config frames")?;
    Ok(format!(
        "{} traced layers match, 75 = 2*37+1",
        expected.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 params report", params_report),
        ("2 ctc oracle", ctc_oracle),
        ("3 gradient suite", gradient_suite),
        ("4 overfit", overfit),
        ("5 metrics goldens", metrics_goldens),
        ("6 normalizer", normalizer),
        ("7 pipeline", pipeline),
        ("8 shape audit", shape_audit),
    ];
    let only = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failures = 0;
    for (name, run) in criteria {
        if only.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
