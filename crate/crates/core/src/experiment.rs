//! Train/test protocol: build memories from labelled glyphs, score
//! recognition, and sweep the number of registered instances per class.
//!
//! Scoring follows the usual retrieval convention. For each class,
//! precision is correct selections over all selections of that class and
//! recall is correct selections over the class's test items. A rejected
//! item only lowers recall. A class that is never selected has precision 0.
//! Overall figures are macro averages over classes.

use std::collections::BTreeSet;
use std::io::Write;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::codec::{encode, QuantizerConfig};
use crate::corpus::Record;
use crate::error::{Error, Result};
use crate::memory::AssociativeMemory;
use crate::reduction::DEFAULT_SIGMA;
use crate::table::CueFunction;

/// Percentage of records assigned to the training side of the split.
pub const TRAIN_PERCENT: u64 = 80;
pub const DEFAULT_SPLIT_SEED: u64 = 0x5eed;
pub const DEFAULT_STEPS: &[usize] = &[1, 2, 5, 10, 25, 50, 100];

/// SplitMix64 finaliser of `seed + index`.
pub fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn is_train(index: usize, seed: u64) -> bool {
    mix(seed, index as u64) % 100 < TRAIN_PERCENT
}

pub type LabelledCue = (String, CueFunction);

/// Encodes every record; output order matches input order.
pub fn encode_records(records: &[Record], cfg: &QuantizerConfig) -> Result<Vec<LabelledCue>> {
    let enc = |(label, img): &Record| -> Result<LabelledCue> { Ok((label.clone(), encode(img, cfg)?)) };
    #[cfg(feature = "parallel")]
    {
        records.par_iter().map(enc).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        records.iter().map(enc).collect()
    }
}

/// Distinct labels in sorted order.
pub fn label_set<'a>(labels: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    labels
        .into_iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_owned)
        .collect()
}

/// Registers every item under its label. Unknown labels are an error.
pub fn build_memory(labels: &[String], items: &[LabelledCue], cfg: &QuantizerConfig) -> Result<AssociativeMemory> {
    let mut mem = AssociativeMemory::new(labels.iter().cloned(), cfg.n_cols(), cfg.levels)?;
    for (label, cue) in items {
        mem.register(label, cue)?;
    }
    Ok(mem)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ItemVerdict {
    pub index: usize,
    pub label: String,
    pub selected: Option<String>,
    pub accepted: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassScore {
    pub label: String,
    pub selected: usize,
    pub correct: usize,
    pub total: usize,
}

impl ClassScore {
    pub fn precision(&self) -> f64 {
        if self.selected == 0 {
            0.0
        } else {
            self.correct as f64 / self.selected as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scores {
    pub classes: Vec<ClassScore>,
}

impl Scores {
    fn macro_avg(&self, f: impl Fn(&ClassScore) -> f64) -> f64 {
        let scored: Vec<f64> = self.classes.iter().filter(|c| c.total > 0).map(f).collect();
        if scored.is_empty() {
            0.0
        } else {
            scored.iter().sum::<f64>() / scored.len() as f64
        }
    }

    pub fn precision(&self) -> f64 {
        self.macro_avg(ClassScore::precision)
    }

    pub fn recall(&self) -> f64 {
        self.macro_avg(ClassScore::recall)
    }
}

/// Presents every item to the memory and tallies per-class outcomes.
pub fn evaluate(mem: &AssociativeMemory, items: &[LabelledCue]) -> Result<(Vec<ItemVerdict>, Scores)> {
    let judge = |(index, (label, cue)): (usize, &LabelledCue)| -> Result<ItemVerdict> {
        mem.index_of(label)?;
        let rep = mem.recognize(cue)?;
        Ok(ItemVerdict {
            index,
            label: label.clone(),
            selected: rep.selected_label().map(str::to_owned),
            accepted: rep.accepted().map(str::to_owned).collect(),
        })
    };
    #[cfg(feature = "parallel")]
    let verdicts = items.par_iter().enumerate().map(judge).collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let verdicts = items.iter().enumerate().map(judge).collect::<Result<Vec<_>>>()?;

    let mut classes: Vec<ClassScore> = mem
        .labels()
        .iter()
        .map(|l| ClassScore {
            label: l.clone(),
            selected: 0,
            correct: 0,
            total: 0,
        })
        .collect();
    for v in &verdicts {
        classes[mem.index_of(&v.label)?].total += 1;
        if let Some(sel) = &v.selected {
            let k = mem.index_of(sel)?;
            classes[k].selected += 1;
            if sel == &v.label {
                classes[k].correct += 1;
            }
        }
    }
    Ok((verdicts, Scores { classes }))
}

/// Mean fraction of columns on which retrieval reproduces the cue, over
/// every probe and seed. Probes rejected by the memory are skipped; returns
/// `None` when nothing was retrieved.
pub fn retrieval_agreement(mem: &AssociativeMemory, probes: &[&CueFunction], seeds: &[u64], sigma: f64) -> Result<Option<f64>> {
    let run = |(p, cue): (usize, &&CueFunction)| -> Result<Vec<f64>> {
        seeds
            .iter()
            .filter_map(|&s| match mem.retrieve(cue, mix(s, p as u64), sigma) {
                Ok(r) => Some(Ok(r.function.agreement(cue))),
                Err(Error::RetrievalUndefined) => None,
                Err(e) => Some(Err(e)),
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let per_probe = probes.par_iter().enumerate().map(run).collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let per_probe = probes.iter().enumerate().map(run).collect::<Result<Vec<_>>>()?;
    let all: Vec<f64> = per_probe.into_iter().flatten().collect();
    if all.is_empty() {
        return Ok(None);
    }
    Ok(Some(all.iter().sum::<f64>() / all.len() as f64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub quantizer: QuantizerConfig,
    pub steps: Vec<usize>,
    pub seeds: Vec<u64>,
    pub sigma: f64,
    pub split_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            quantizer: QuantizerConfig::default(),
            steps: DEFAULT_STEPS.to_vec(),
            seeds: vec![1, 2, 3],
            sigma: DEFAULT_SIGMA,
            split_seed: DEFAULT_SPLIT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub instances_per_class: usize,
    pub mean_entropy: f64,
    pub precision: f64,
    pub recall: f64,
    pub agreement: f64,
    pub classes: Vec<ClassScore>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub labels: Vec<String>,
    pub train_size: usize,
    pub test_size: usize,
    pub rows: Vec<SweepRow>,
}

fn check_sweep(cfg: &SweepConfig) -> Result<()> {
    cfg.quantizer.validate()?;
    if cfg.steps.is_empty() || cfg.steps[0] == 0 {
        return Err(Error::InvalidSweep("steps must be non-empty and start at 1 or more".into()));
    }
    if cfg.steps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSweep(format!("steps {:?} must be strictly increasing", cfg.steps)));
    }
    if cfg.seeds.is_empty() {
        return Err(Error::InvalidSweep("at least one retrieval seed is required".into()));
    }
    if !(cfg.sigma.is_finite() && cfg.sigma > 0.0) {
        return Err(Error::InvalidSigma(cfg.sigma));
    }
    Ok(())
}

/// Splits the corpus, then for each step registers the first `step`
/// training instances of every class and measures entropy, recognition on
/// the held-out items, and retrieval agreement on the registered instances.
pub fn sweep(records: &[Record], cfg: &SweepConfig) -> Result<SweepResult> {
    check_sweep(cfg)?;
    let encoded = encode_records(records, &cfg.quantizer)?;
    let labels = label_set(encoded.iter().map(|(l, _)| l.as_str()));

    let mut train_by_class: Vec<Vec<&LabelledCue>> = vec![Vec::new(); labels.len()];
    let mut test = Vec::new();
    for (k, item) in encoded.iter().enumerate() {
        if is_train(k, cfg.split_seed) {
            let c = labels.binary_search(&item.0).expect("label set covers corpus");
            train_by_class[c].push(item);
        } else {
            test.push(item.clone());
        }
    }
    let largest = *cfg.steps.last().expect("checked non-empty");
    for (label, items) in labels.iter().zip(&train_by_class) {
        if items.len() < largest {
            return Err(Error::TooFewInstances {
                label: label.clone(),
                available: items.len(),
                required: largest,
            });
        }
    }

    let run_step = |&step: &usize| -> Result<SweepRow> {
        let train: Vec<LabelledCue> = train_by_class
            .iter()
            .flat_map(|items| items[..step].iter().map(|&i| i.clone()))
            .collect();
        let mem = build_memory(&labels, &train, &cfg.quantizer)?;
        let (_, scores) = evaluate(&mem, &test)?;
        let probes: Vec<&CueFunction> = train.iter().map(|(_, c)| c).collect();
        let agreement = retrieval_agreement(&mem, &probes, &cfg.seeds, cfg.sigma)?
            .expect("registered instances are always accepted");
        Ok(SweepRow {
            instances_per_class: step,
            mean_entropy: mem.mean_entropy(),
            precision: scores.precision(),
            recall: scores.recall(),
            agreement,
            classes: scores.classes,
        })
    };
    #[cfg(feature = "parallel")]
    let rows = cfg.steps.par_iter().map(run_step).collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let rows = cfg.steps.iter().map(run_step).collect::<Result<Vec<_>>>()?;

    Ok(SweepResult {
        labels,
        train_size: train_by_class.iter().map(Vec::len).sum(),
        test_size: test.len(),
        rows,
    })
}

/// Columns: `instances_per_class, mean_entropy, precision, recall,
/// agreement`, then `precision_<label>` and `recall_<label>` per class.
pub fn write_sweep_csv(w: impl Write, result: &SweepResult) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec![
        "instances_per_class".to_owned(),
        "mean_entropy".into(),
        "precision".into(),
        "recall".into(),
        "agreement".into(),
    ];
    header.extend(result.labels.iter().map(|l| format!("precision_{l}")));
    header.extend(result.labels.iter().map(|l| format!("recall_{l}")));
    out.write_record(&header)?;
    for row in &result.rows {
        let mut rec = vec![
            row.instances_per_class.to_string(),
            format!("{:.6}", row.mean_entropy),
            format!("{:.6}", row.precision),
            format!("{:.6}", row.recall),
            format!("{:.6}", row.agreement),
        ];
        rec.extend(row.classes.iter().map(|c| format!("{:.6}", c.precision())));
        rec.extend(row.classes.iter().map(|c| format!("{:.6}", c.recall())));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Columns: `index, label, selected, accepted` (accepted labels joined by `;`,
/// `selected` empty on rejection).
pub fn write_verdicts_csv(w: impl Write, verdicts: &[ItemVerdict]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "label", "selected", "accepted"])?;
    for v in verdicts {
        out.write_record([
            v.index.to_string(),
            v.label.clone(),
            v.selected.clone().unwrap_or_default(),
            v.accepted.join(";"),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Columns: `label, selected, correct, total, precision, recall`; a final
/// `overall` row holds the macro averages.
pub fn write_scores_csv(w: impl Write, scores: &Scores) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["label", "selected", "correct", "total", "precision", "recall"])?;
    for c in &scores.classes {
        out.write_record([
            c.label.clone(),
            c.selected.to_string(),
            c.correct.to_string(),
            c.total.to_string(),
            format!("{:.6}", c.precision()),
            format!("{:.6}", c.recall()),
        ])?;
    }
    let sum = |f: fn(&ClassScore) -> usize| scores.classes.iter().map(f).sum::<usize>().to_string();
    out.write_record([
        "overall".to_owned(),
        sum(|c| c.selected),
        sum(|c| c.correct),
        sum(|c| c.total),
        format!("{:.6}", scores.precision()),
        format!("{:.6}", scores.recall()),
    ])?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::GlyphImage;

    fn dark_light(per_class: usize) -> Vec<Record> {
        (0..per_class * 2)
            .map(|k| {
                let (label, base) = if k % 2 == 0 { ("dark", 10u8) } else { ("light", 240u8) };
                let px = (0..64).map(|p| base.wrapping_add(((k + p) % 5) as u8)).collect();
                (label.to_owned(), GlyphImage::new(8, 8, px).unwrap())
            })
            .collect()
    }

    #[test]
    fn split_is_deterministic_and_roughly_eighty_percent() {
        let train = (0..10_000).filter(|&k| is_train(k, 3)).count();
        assert!((7_700..8_300).contains(&train), "{train}");
        let again = (0..10_000).filter(|&k| is_train(k, 3)).count();
        assert_eq!(train, again);
        assert_ne!(
            (0..64).map(|k| is_train(k, 3)).collect::<Vec<_>>(),
            (0..64).map(|k| is_train(k, 4)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn separable_two_class_corpus_scores_perfectly() {
        let cfg = QuantizerConfig::new(2, 2, 4).unwrap();
        let recs = dark_light(10);
        let items = encode_records(&recs, &cfg).unwrap();
        let labels = label_set(items.iter().map(|(l, _)| l.as_str()));
        let mem = build_memory(&labels, &items, &cfg).unwrap();
        let (verdicts, scores) = evaluate(&mem, &items).unwrap();
        assert_eq!(verdicts.len(), 20);
        assert_eq!(scores.precision(), 1.0);
        assert_eq!(scores.recall(), 1.0);
    }

    #[test]
    fn rejections_only_cost_recall() {
        let mut mem = AssociativeMemory::new(["a", "b"], 1, 4).unwrap();
        mem.register("a", &CueFunction::total(vec![0])).unwrap();
        mem.register("b", &CueFunction::total(vec![3])).unwrap();
        let items = vec![
            ("a".to_owned(), CueFunction::total(vec![0])),
            ("a".to_owned(), CueFunction::total(vec![1])),
            ("b".to_owned(), CueFunction::total(vec![3])),
        ];
        let (v, s) = evaluate(&mem, &items).unwrap();
        assert_eq!(v[1].selected, None);
        assert_eq!(s.classes[0].precision(), 1.0);
        assert_eq!(s.classes[0].recall(), 0.5);
        assert_eq!(s.recall(), 0.75);

        let unknown = vec![("z".to_owned(), CueFunction::total(vec![0]))];
        assert!(matches!(evaluate(&mem, &unknown), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn sweep_validation() {
        let recs = dark_light(5);
        let base = SweepConfig {
            quantizer: QuantizerConfig::new(2, 2, 4).unwrap(),
            steps: vec![1, 2],
            ..SweepConfig::default()
        };
        assert!(sweep(&recs, &SweepConfig { steps: vec![2, 2], ..base.clone() }).is_err());
        assert!(sweep(&recs, &SweepConfig { steps: vec![], ..base.clone() }).is_err());
        assert!(sweep(&recs, &SweepConfig { seeds: vec![], ..base.clone() }).is_err());
        assert!(matches!(
            sweep(&recs, &SweepConfig { steps: vec![1, 50], ..base.clone() }),
            Err(Error::TooFewInstances { .. })
        ));
        let res = sweep(&recs, &SweepConfig { steps: vec![1], ..base }).unwrap();
        assert_eq!(res.rows.len(), 1);
        assert_eq!(res.rows[0].mean_entropy, 0.0);
        assert_eq!(res.rows[0].agreement, 1.0);
    }

    #[test]
    fn scores_csv_has_overall_row() {
        let scores = Scores {
            classes: vec![ClassScore {
                label: "x".into(),
                selected: 2,
                correct: 1,
                total: 4,
            }],
        };
        let mut buf = Vec::new();
        write_scores_csv(&mut buf, &scores).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "label,selected,correct,total,precision,recall\n\
             x,2,1,4,0.500000,0.250000\n\
             overall,2,1,4,0.500000,0.250000\n"
        );
    }
}
