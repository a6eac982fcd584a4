//! Experiment grids: (domain, training size, seed, τ) cells evaluated with
//! dispatch and [`token_f1`](super::token_f1), and the distractor sweep.
//!
//! Cells run on a rayon pool but results are merged by key, so the rendered
//! tables do not depend on scheduling.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::plan::{build_curriculum, StageSpec, TrainingPlan};
use super::{reference, token_f1, MetricsReport};
use crate::backend::{BackendConfig, GoldOracle, SpanExtractor};
use crate::dataset::{
    sample_few_shot, screen_qa_examples, train_test_split, AnnotatedUtterance, NegativePolicy, QaExample,
};
use crate::dispatch::SlotFiller;
use crate::question::{AblationMode, QuestionGenerator};
use crate::screen::{visible_elements, Screen};

/// One domain: its screen and annotated utterances.
#[derive(Debug, Clone)]
pub struct DomainCorpus {
    pub name: String,
    pub screen: Screen,
    pub utterances: Vec<AnnotatedUtterance>,
    /// Fixed (train, test) split; a seeded split is drawn otherwise.
    pub official_split: Option<(Vec<AnnotatedUtterance>, Vec<AnnotatedUtterance>)>,
}

impl DomainCorpus {
    pub fn new(name: impl Into<String>, screen: Screen, utterances: Vec<AnnotatedUtterance>) -> Self {
        DomainCorpus {
            name: name.into(),
            screen,
            utterances,
            official_split: None,
        }
    }

    pub fn split(&self, test_fraction: f64, seed: u64) -> (Vec<AnnotatedUtterance>, Vec<AnnotatedUtterance>) {
        match &self.official_split {
            Some(split) => split.clone(),
            None => train_test_split(&self.utterances, test_fraction, seed),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub train_sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub mode: AblationMode,
    pub tau_sweep: Vec<f64>,
    pub test_fraction: f64,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    /// Stage 1 of every plan.
    pub base_dataset: String,
    /// Slot-filling datasets trained before the target domain.
    pub auxiliary: Vec<String>,
    pub epochs: u32,
    pub negatives: NegativePolicy,
    pub generator: QuestionGenerator,
    pub backend: BackendConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            train_sizes: reference::TRAIN_SIZES.to_vec(),
            seeds: vec![0],
            mode: AblationMode::Full,
            tau_sweep: vec![0.5],
            test_fraction: 0.2,
            jobs: 0,
            base_dataset: "squad2".into(),
            auxiliary: Vec::new(),
            epochs: 2,
            negatives: NegativePolicy::All,
            generator: QuestionGenerator::default(),
            backend: BackendConfig::default(),
        }
    }
}

/// What a backend factory and a trainer see for one grid cell.
pub struct CellContext<'a> {
    pub domain: &'a str,
    pub screen: &'a Screen,
    pub k: usize,
    pub seed: u64,
    pub mode: AblationMode,
    pub generator: &'a QuestionGenerator,
    pub plan: &'a TrainingPlan,
    /// Training examples for the target stage (empty when k = 0).
    pub train: &'a [QaExample],
    pub test: &'a [AnnotatedUtterance],
}

/// Runs the trained stages of a plan. Never called for zero-shot cells.
pub trait Trainer: Sync {
    fn train(&self, cell: &CellContext<'_>) -> Result<(), String>;
}

pub type BackendFactory<'a> = dyn Fn(&CellContext<'_>) -> Result<Box<dyn SpanExtractor>, String> + Sync + 'a;

/// A factory answering from the gold annotations of each cell's test split.
pub fn oracle_factory() -> impl Fn(&CellContext<'_>) -> Result<Box<dyn SpanExtractor>, String> + Sync {
    |cell: &CellContext<'_>| {
        let gold = screen_qa_examples(cell.test, cell.screen, cell.generator, cell.mode, NegativePolicy::None)
            .map_err(|e| e.to_string())?;
        Ok(Box::new(GoldOracle::from_examples(&gold)) as Box<dyn SpanExtractor>)
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("no seeds configured")]
    NoSeeds,
    #[error("no domains given")]
    NoDomains,
    #[error("τ = {0} is outside [0, 1]")]
    Tau(f64),
    #[error("need {needed} distractor {unit} but only {available} are available")]
    InsufficientScreens {
        needed: usize,
        available: usize,
        unit: &'static str,
    },
    #[error("could not build the worker pool: {0}")]
    Pool(String),
    #[error("{0}")]
    Cell(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub domain: String,
    pub k: usize,
    pub seed: u64,
    pub tau: f64,
    pub trained: bool,
    pub n_test: usize,
    pub weighted_f1: Option<f64>,
    pub micro_f1: Option<f64>,
    pub rejection_accuracy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub domain: String,
    pub k: usize,
    pub tau: f64,
    pub n_seeds: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub errors: usize,
    /// Published visual slot QA score for the same domain and size.
    pub reference: Option<f64>,
    pub baseline_reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub mode: AblationMode,
    pub rows: Vec<SweepRow>,
    pub runs: Vec<RunRecord>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

impl SweepTable {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("tables serialize");
        s.push('\n');
        s
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("domain\tk\ttau\tn_seeds\tmean_f1\tsd\terrors\treference\tbaseline\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.domain,
                r.k,
                r.tau,
                r.n_seeds,
                fmt_opt(r.mean),
                fmt_opt(r.sd),
                r.errors,
                fmt_opt(r.reference),
                fmt_opt(r.baseline_reference)
            );
        }
        out
    }

    /// Whitespace-aligned rendering of [`to_tsv`](Self::to_tsv).
    pub fn to_table(&self) -> String {
        align_columns(&self.to_tsv())
    }
}

/// Pads tab-separated columns with spaces.
pub fn align_columns(tsv: &str) -> String {
    let rows: Vec<Vec<&str>> = tsv.lines().map(|l| l.split('\t').collect()).collect();
    let ncols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..ncols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().enumerate().map(|(c, s)| format!("{s:<w$}", w = widths[c])).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn mean_sd(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() < 2 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (Some(mean), Some(sd))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, SweepError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))
}

fn plan_for(cfg: &ExperimentConfig, domain: &str, k: usize, seed: u64) -> Result<TrainingPlan, String> {
    let mut specs = vec![StageSpec::general_qa(&cfg.base_dataset).with_epochs(cfg.epochs)];
    specs.extend(cfg.auxiliary.iter().map(|a| StageSpec::slot_filling(a).with_epochs(cfg.epochs)));
    specs.push(StageSpec::slot_filling(format!("{domain}/k{k}/seed{seed}.json")).with_epochs(cfg.epochs));
    let plan = build_curriculum(specs).map_err(|e| e.to_string())?;
    if k == 0 {
        plan.zero_shot().map_err(|e| e.to_string())
    } else {
        Ok(plan)
    }
}

fn evaluate(
    backend: &dyn SpanExtractor,
    backend_cfg: &BackendConfig,
    generator: &QuestionGenerator,
    screens: &[Screen],
    test: &[AnnotatedUtterance],
    mode: AblationMode,
) -> Result<MetricsReport, String> {
    let filler = SlotFiller::new(backend, backend_cfg.clone()).with_generator(generator.clone());
    let predictions = test
        .iter()
        .map(|u| filler.fill_utterance(screens, u, mode))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    token_f1(test, &predictions).map_err(|e| e.to_string())
}

fn run_cell(
    cfg: &ExperimentConfig,
    corpus: &DomainCorpus,
    k: usize,
    seed: u64,
    factory: &BackendFactory<'_>,
    trainer: Option<&dyn Trainer>,
) -> Vec<RunRecord> {
    let (train_pool, test) = corpus.split(cfg.test_fraction, seed);
    let record = |tau: f64, trained: bool, outcome: Result<MetricsReport, String>| {
        let (report, error) = match outcome {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e)),
        };
        RunRecord {
            domain: corpus.name.clone(),
            k,
            seed,
            tau,
            trained,
            n_test: test.len(),
            weighted_f1: report.as_ref().map(|r| r.weighted_f1),
            micro_f1: report.as_ref().map(|r| r.micro_f1),
            rejection_accuracy: report.as_ref().and_then(|r| r.rejection_accuracy),
            error,
        }
    };
    let fail_all = |e: String, trained: bool| cfg.tau_sweep.iter().map(|&t| record(t, trained, Err(e.clone()))).collect();

    let plan = match plan_for(cfg, &corpus.name, k, seed) {
        Ok(p) => p,
        Err(e) => return fail_all(e, false),
    };
    let sample = sample_few_shot(&train_pool, k, seed);
    let train = match screen_qa_examples(&sample, &corpus.screen, &cfg.generator, cfg.mode, cfg.negatives.with_seed(seed)) {
        Ok(t) => t,
        Err(e) => return fail_all(e.to_string(), false),
    };
    let ctx = CellContext {
        domain: &corpus.name,
        screen: &corpus.screen,
        k,
        seed,
        mode: cfg.mode,
        generator: &cfg.generator,
        plan: &plan,
        train: &train,
        test: &test,
    };
    let mut trained = false;
    if !plan.is_zero_shot() {
        if let Some(t) = trainer {
            if let Err(e) = t.train(&ctx) {
                return fail_all(format!("training failed: {e}"), false);
            }
            trained = true;
        }
    }
    let backend = match factory(&ctx) {
        Ok(b) => b,
        Err(e) => return fail_all(format!("backend: {e}"), trained),
    };
    let screens = [corpus.screen.clone()];
    cfg.tau_sweep
        .iter()
        .map(|&tau| {
            let bcfg = cfg.backend.clone().with_threshold(tau);
            record(tau, trained, evaluate(backend.as_ref(), &bcfg, &cfg.generator, &screens, &test, cfg.mode))
        })
        .collect()
}

/// Evaluates every (domain, k, seed, τ) cell. Failing cells are recorded and
/// the grid carries on.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    corpora: &[DomainCorpus],
    factory: &BackendFactory<'_>,
    trainer: Option<&dyn Trainer>,
) -> Result<SweepTable, SweepError> {
    if cfg.seeds.is_empty() {
        return Err(SweepError::NoSeeds);
    }
    if corpora.is_empty() {
        return Err(SweepError::NoDomains);
    }
    if let Some(&t) = cfg.tau_sweep.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(SweepError::Tau(t));
    }
    let sizes: BTreeSet<usize> = cfg.train_sizes.iter().copied().collect();
    let seeds: BTreeSet<u64> = cfg.seeds.iter().copied().collect();
    let mut cells: Vec<(&DomainCorpus, usize, u64)> = Vec::new();
    for c in corpora {
        for &k in &sizes {
            cells.extend(seeds.iter().map(|&s| (c, k, s)));
        }
    }

    let runs: Vec<RunRecord> = pool(cfg.jobs)?.install(|| {
        cells
            .par_iter()
            .flat_map_iter(|&(c, k, s)| run_cell(cfg, c, k, s, factory, trainer))
            .collect()
    });

    let mut grouped: BTreeMap<(String, usize, u64), Vec<&RunRecord>> = BTreeMap::new();
    for r in &runs {
        grouped.entry((r.domain.clone(), r.k, r.tau.to_bits())).or_default().push(r);
    }
    let rows = grouped
        .into_iter()
        .map(|((domain, k, tau_bits), rs)| {
            let scores: Vec<f64> = rs.iter().filter_map(|r| r.weighted_f1).collect();
            let (mean, sd) = mean_sd(&scores);
            SweepRow {
                reference: reference::visual_slot_f1(&domain, k, cfg.mode),
                baseline_reference: reference::baseline_f1(&domain, k),
                domain,
                k,
                tau: f64::from_bits(tau_bits),
                n_seeds: scores.len(),
                mean,
                sd,
                errors: rs.len() - scores.len(),
            }
        })
        .collect();
    Ok(SweepTable {
        mode: cfg.mode,
        rows,
        runs,
    })
}

/// Whether V counts whole screens or single elements.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistractorCounting {
    /// V - 1 extra screens.
    Screens,
    /// V - 1 extra visible elements.
    #[default]
    Elements,
}

#[derive(Debug, Clone)]
pub struct DistractorConfig {
    pub v_range: RangeInclusive<usize>,
    pub counting: DistractorCounting,
    pub seed: u64,
    pub mode: AblationMode,
    pub generator: QuestionGenerator,
    pub backend: BackendConfig,
}

impl Default for DistractorConfig {
    fn default() -> Self {
        DistractorConfig {
            v_range: 1..=5,
            counting: DistractorCounting::Elements,
            seed: 0,
            mode: AblationMode::Full,
            generator: QuestionGenerator::default(),
            backend: BackendConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistractorRow {
    pub v: usize,
    /// Visible elements beyond the target screen.
    pub distractor_elements: usize,
    pub weighted_f1: f64,
    pub micro_f1: f64,
    pub rejection_accuracy: Option<f64>,
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistractorTable {
    pub domain: String,
    pub counting: DistractorCounting,
    pub rows: Vec<DistractorRow>,
}

impl DistractorTable {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("tables serialize");
        s.push('\n');
        s
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("domain\tv\tdistractor_elements\tweighted_f1\tmicro_f1\trejection_accuracy\treference\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.4}\t{:.4}\t{}\t{}",
                self.domain,
                r.v,
                r.distractor_elements,
                r.weighted_f1,
                r.micro_f1,
                fmt_opt(r.rejection_accuracy),
                fmt_opt(r.reference)
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        align_columns(&self.to_tsv())
    }
}

/// Candidate distractor screens: other apps first, then other screens of
/// the target's app, each group in a seeded order. The screen with the
/// target's id is never used.
fn distractor_order<'a>(target: &Screen, pool: &'a [Screen], seed: u64) -> Vec<&'a Screen> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut foreign, mut same): (Vec<&Screen>, Vec<&Screen>) = pool
        .iter()
        .filter(|s| s.screen_id() != target.screen_id())
        .partition(|s| s.app_name() != target.app_name());
    foreign.shuffle(&mut rng);
    same.shuffle(&mut rng);
    foreign.extend(same);
    foreign
}

/// Distractor screens realising `extra` additional screens or elements.
/// Selections for smaller counts are prefixes of those for larger ones.
fn distractors(
    order: &[&Screen],
    counting: DistractorCounting,
    extra: usize,
    seed: u64,
) -> Result<Vec<Screen>, SweepError> {
    match counting {
        DistractorCounting::Screens => {
            let usable: Vec<&Screen> = order.iter().copied().filter(|s| !visible_elements(s).is_empty()).collect();
            if usable.len() < extra {
                return Err(SweepError::InsufficientScreens {
                    needed: extra,
                    available: usable.len(),
                    unit: "screens",
                });
            }
            Ok(usable[..extra].iter().map(|s| (*s).clone()).collect())
        }
        DistractorCounting::Elements => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let mut candidates: Vec<(usize, String)> = Vec::new();
            for (i, s) in order.iter().enumerate() {
                let mut ids: Vec<String> = visible_elements(s).into_iter().map(|e| e.element_id.clone()).collect();
                ids.shuffle(&mut rng);
                candidates.extend(ids.into_iter().map(|id| (i, id)));
            }
            if candidates.len() < extra {
                return Err(SweepError::InsufficientScreens {
                    needed: extra,
                    available: candidates.len(),
                    unit: "elements",
                });
            }
            let mut chosen: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
            for (i, id) in candidates.into_iter().take(extra) {
                chosen.entry(i).or_default().insert(id);
            }
            chosen
                .into_iter()
                .map(|(i, ids)| {
                    let s = order[i];
                    let visible = s
                        .elements()
                        .iter()
                        .filter(|e| ids.contains(&e.element_id))
                        .map(|e| e.element_id.clone())
                        .collect();
                    s.with_visible(visible).map_err(|e| SweepError::Cell(e.to_string()))
                })
                .collect()
        }
    }
}

/// Weighted F1 on `test` with the target screen plus V - 1 distractors, for
/// each V in the configured range.
pub fn distractor_sweep(
    domain: &str,
    target: &Screen,
    test: &[AnnotatedUtterance],
    pool: &[Screen],
    backend: &dyn SpanExtractor,
    cfg: &DistractorConfig,
) -> Result<DistractorTable, SweepError> {
    let order = distractor_order(target, pool, cfg.seed);
    let max_v = *cfg.v_range.end();
    // Fail before doing any work if the largest V cannot be realised.
    distractors(&order, cfg.counting, max_v.saturating_sub(1), cfg.seed)?;
    let mut rows = Vec::new();
    for v in cfg.v_range.clone().filter(|&v| v >= 1) {
        let mut screens = vec![target.clone()];
        screens.extend(distractors(&order, cfg.counting, v - 1, cfg.seed)?);
        let report = evaluate(backend, &cfg.backend, &cfg.generator, &screens, test, cfg.mode).map_err(SweepError::Cell)?;
        rows.push(DistractorRow {
            v,
            distractor_elements: screens[1..].iter().map(|s| visible_elements(s).len()).sum(),
            weighted_f1: report.weighted_f1,
            micro_f1: report.micro_f1,
            rejection_accuracy: report.rejection_accuracy,
            reference: reference::distractor_f1(domain, v),
        });
    }
    Ok(DistractorTable {
        domain: domain.to_string(),
        counting: cfg.counting,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn vl_corpus(n: usize) -> DomainCorpus {
        let utts = bundled::corpus("vehicle_logger").unwrap();
        DomainCorpus::new("vehicle_logger", bundled::vehicle_logger(), utts[..n].to_vec())
    }

    struct Counting(AtomicUsize);

    impl Trainer for Counting {
        fn train(&self, cell: &CellContext<'_>) -> Result<(), String> {
            assert!(cell.k > 0 && !cell.train.is_empty());
            self.0.fetch_add(1, Ordering::SeqCst);
            Ok(())
        }
    }

    #[test]
    fn grid_counts_runs_and_cells() {
        let cfg = ExperimentConfig {
            train_sizes: vec![0, 5],
            seeds: vec![1, 2],
            ..ExperimentConfig::default()
        };
        let trainer = Counting(AtomicUsize::new(0));
        let t = run_sweep(&cfg, &[vl_corpus(40)], &oracle_factory(), Some(&trainer)).unwrap();
        assert_eq!(t.runs.len(), 4);
        assert_eq!(t.rows.len(), 2);
        assert_eq!(trainer.0.load(Ordering::SeqCst), 2);
        assert!(t.runs.iter().all(|r| r.trained == (r.k > 0)));
        assert!(t.rows.iter().all(|r| r.mean == Some(1.0) && r.sd == Some(0.0) && r.n_seeds == 2));
        assert_eq!(t.rows[0].reference, Some(0.48));
    }

    #[test]
    fn failing_cells_are_recorded() {
        let cfg = ExperimentConfig {
            train_sizes: vec![0],
            seeds: vec![3],
            ..ExperimentConfig::default()
        };
        let broken = |_: &CellContext<'_>| -> Result<Box<dyn SpanExtractor>, String> { Err("no server".into()) };
        let t = run_sweep(&cfg, &[vl_corpus(10)], &broken, None).unwrap();
        assert_eq!(t.rows[0].errors, 1);
        assert_eq!(t.rows[0].mean, None);
        assert!(t.runs[0].error.as_deref().unwrap().contains("no server"));
    }

    #[test]
    fn config_errors() {
        let corpus = [vl_corpus(5)];
        let no_seeds = ExperimentConfig {
            seeds: vec![],
            ..ExperimentConfig::default()
        };
        assert!(matches!(run_sweep(&no_seeds, &corpus, &oracle_factory(), None), Err(SweepError::NoSeeds)));
        assert!(matches!(
            run_sweep(&ExperimentConfig::default(), &[], &oracle_factory(), None),
            Err(SweepError::NoDomains)
        ));
        let bad_tau = ExperimentConfig {
            tau_sweep: vec![1.5],
            ..ExperimentConfig::default()
        };
        assert!(matches!(run_sweep(&bad_tau, &corpus, &oracle_factory(), None), Err(SweepError::Tau(_))));
    }

    #[test]
    fn distractor_selection_is_prefix_stable() {
        let target = bundled::vehicle_logger();
        let pool = bundled::screens();
        let order = distractor_order(&target, &pool, 7);
        assert!(order.iter().all(|s| s.screen_id() != target.screen_id()));
        let four = distractors(&order, DistractorCounting::Elements, 4, 7).unwrap();
        let two = distractors(&order, DistractorCounting::Elements, 2, 7).unwrap();
        let ids = |ss: &[Screen]| -> BTreeSet<String> {
            ss.iter()
                .flat_map(|s| visible_elements(s).into_iter().map(move |e| format!("{}:{}", s.screen_id(), e.element_id)))
                .collect()
        };
        assert!(ids(&two).is_subset(&ids(&four)));
        assert_eq!(ids(&four).len(), 4);
        assert!(matches!(
            distractors(&order, DistractorCounting::Screens, 50, 7),
            Err(SweepError::InsufficientScreens { needed: 50, .. })
        ));
    }

    #[test]
    fn sd_is_the_sample_deviation() {
        let (m, sd) = mean_sd(&[1.0, 3.0]);
        assert_eq!(m, Some(2.0));
        assert!((sd.unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(mean_sd(&[]), (None, None));
    }

    #[test]
    fn columns_line_up() {
        assert_eq!(align_columns("a\tbb\nccc\td\n"), "a    bb\nccc  d\n");
    }
}
