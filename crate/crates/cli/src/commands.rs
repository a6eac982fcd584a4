use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use slotqa::backend::{Gazetteer, LexicalBackend, RemoteBackend};
use slotqa::dataset::{
    import_squad, read_bio_file, render_conll, sample_few_shot, sample_stratified, screen_qa_examples, slot_coverage,
    to_qa_examples, write_squad, AnnotatedUtterance, BioOptions, NegativePolicy, SlotSchema,
};
use slotqa::eval::{
    align_columns, build_curriculum, distractor_sweep, oracle_factory, run_sweep, token_f1_with, CellContext,
    DistractorConfig, DistractorCounting, DistractorTable, DomainCorpus, EvalOptions, ExperimentConfig, StageSpec,
    TrainingPlan, Trainer,
};
use slotqa::question::OverrideTable;
use slotqa::{bundled, load_screen, BackendConfig, GoldOracle, QuestionGenerator, Screen, SlotFillResult, SlotFiller, SpanExtractor};

use crate::{
    BackendArgs, BackendKind, Command, ConvertArgs, EvalArgs, FillArgs, GenqArgs, PlanArgs, QuestionArgs, SampleArgs,
    SweepArgs,
};

/// A bad combination of flags; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Convert(a) => convert(a),
        Command::Genq(a) => genq(a),
        Command::Fill(a) => fill(a),
        Command::Sample(a) => sample(a),
        Command::Plan(a) => plan(a),
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// A screen file, or a bundled screen when no such file exists.
fn screen(spec: &str) -> Result<Screen> {
    let path = Path::new(spec);
    if path.exists() {
        return load_screen(path).with_context(|| format!("loading screen {spec}"));
    }
    bundled::screen(spec).ok_or_else(|| {
        anyhow::anyhow!(
            "no screen file `{spec}` and no bundled screen of that name (bundled: {})",
            bundled::screens().iter().map(|s| s.screen_id().to_string()).collect::<Vec<_>>().join(", ")
        )
    })
}

fn screens(specs: &[String]) -> Result<Vec<Screen>> {
    specs.iter().map(|s| screen(s)).collect()
}

fn generator(q: &QuestionArgs) -> Result<QuestionGenerator> {
    let mut g = QuestionGenerator::new();
    if let Some(path) = &q.overrides {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let table = OverrideTable::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        g = g.with_overrides(table);
    }
    Ok(g)
}

fn bio(path: &Path) -> Result<Vec<AnnotatedUtterance>> {
    read_bio_file(path, BioOptions::default()).with_context(|| format!("reading {}", path.display()))
}

fn backend_config(b: &BackendArgs) -> Result<BackendConfig> {
    let cfg = BackendConfig {
        no_answer_threshold: b.tau,
        batch_size: b.batch_size,
        endpoint: b.endpoint.clone(),
        timeout_ms: b.timeout_ms,
        retries: b.retries,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn gazetteer(b: &BackendArgs) -> Result<Gazetteer> {
    match &b.gazetteer {
        None => Ok(bundled::gazetteer()),
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Gazetteer::parse_tsv(&text).with_context(|| format!("parsing {}", path.display()))
        }
    }
}

fn remote(cfg: &BackendConfig) -> Result<RemoteBackend> {
    if cfg.endpoint.is_none() {
        return Err(usage("the remote backend needs --endpoint or SLOTQA_ENDPOINT"));
    }
    Ok(RemoteBackend::new(cfg)?)
}

/// A backend for single-utterance work. `gold` is only consulted by the oracle.
fn backend(b: &BackendArgs, cfg: &BackendConfig, gold: impl FnOnce() -> Result<GoldOracle>) -> Result<Box<dyn SpanExtractor>> {
    Ok(match b.backend {
        BackendKind::Oracle => Box::new(gold()?),
        BackendKind::Lexical => Box::new(LexicalBackend::new(gazetteer(b)?)),
        BackendKind::Remote => Box::new(remote(cfg)?),
    })
}

fn convert(a: ConvertArgs) -> Result<()> {
    let utts = bio(&a.bio)?;
    let g = generator(&a.questions)?;
    let negatives = a.negatives.with_seed(a.seed);
    let examples = match &a.screen {
        Some(s) => screen_qa_examples(&utts, &screen(s)?, &g, a.questions.mode, negatives)?,
        None => {
            let schema = match &a.schema {
                Some(path) => SlotSchema::load(path).with_context(|| format!("loading {}", path.display()))?,
                None => SlotSchema::atis(),
            };
            to_qa_examples(&utts, &schema, &g, a.questions.mode, negatives)?
        }
    };
    let mut buf = Vec::new();
    write_squad(&examples, &a.title, &mut buf)?;
    buf.push(b'\n');
    emit(a.out.as_deref(), &String::from_utf8(buf)?)?;
    log::info!("{} utterances, {} examples", utts.len(), examples.len());
    Ok(())
}

fn genq(a: GenqArgs) -> Result<()> {
    let screens = screens(&a.screen)?;
    let oracle = GoldOracle::new();
    let filler = SlotFiller::new(&oracle, BackendConfig::default()).with_generator(generator(&a.questions)?);
    let questions = filler.questions(&screens, a.questions.mode)?;
    let text = if a.table {
        let mut tsv = String::from("slot\tquestion\n");
        for (key, q) in &questions {
            tsv.push_str(&format!("{key}\t{}\n", q.text));
        }
        align_columns(&tsv)
    } else {
        questions.iter().map(|(_, q)| format!("{}\n", q.text)).collect()
    };
    emit(a.out.as_deref(), &text)
}

fn oracle_from_bio(path: &Path, target: &Screen, g: &QuestionGenerator, mode: slotqa::AblationMode) -> Result<GoldOracle> {
    let gold = screen_qa_examples(&bio(path)?, target, g, mode, NegativePolicy::None)?;
    Ok(GoldOracle::from_examples(&gold))
}

fn fill_table(r: &SlotFillResult) -> String {
    let mut tsv = String::from("slot\tanswer\tscore\n");
    for (slot, f) in &r.fills {
        tsv.push_str(&format!("{slot}\t{}\t{:.4}\n", f.surface, f.span_score));
    }
    for (slot, s) in &r.rejections {
        tsv.push_str(&format!("{slot}\t-\t{s:.4}\n"));
    }
    align_columns(&tsv)
}

fn fill(a: FillArgs) -> Result<()> {
    let screens = screens(&a.screen)?;
    let g = generator(&a.questions)?;
    let cfg = backend_config(&a.backend)?;
    let mode = a.questions.mode;
    let backend = backend(&a.backend, &cfg, || match (&a.gold, &a.bio) {
        (Some(path), _) => {
            let examples = import_squad(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(GoldOracle::from_examples(&examples))
        }
        (None, Some(path)) => oracle_from_bio(path, &screens[0], &g, mode),
        (None, None) => Err(usage("the oracle backend needs --gold or --bio")),
    })?;
    let filler = SlotFiller::new(backend.as_ref(), cfg).with_generator(g.clone());
    let result = filler.fill_slots(&screens, &a.utterance, mode)?;
    let text = if a.table { fill_table(&result) } else { pretty(&result)? };
    emit(a.out.as_deref(), &text)
}

fn sample(a: SampleArgs) -> Result<()> {
    let utts = bio(&a.bio)?;
    let picked = if a.stratified {
        sample_stratified(&utts, a.k, a.seed)
    } else {
        sample_few_shot(&utts, a.k, a.seed)
    };
    if let Some(path) = &a.schema {
        let schema = SlotSchema::load(path).with_context(|| format!("loading {}", path.display()))?;
        let cov = slot_coverage(&picked, &schema);
        eprintln!(
            "{} of {} slot types covered; missing: {}",
            cov.covered(),
            schema.len(),
            if cov.missing.is_empty() { "none".to_string() } else { cov.missing.join(", ") }
        );
    }
    emit(a.out.as_deref(), &render_conll(&picked))
}

fn plan(a: PlanArgs) -> Result<()> {
    if let Some(path) = &a.check {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let plan = TrainingPlan::from_manifest(&text).with_context(|| format!("checking {}", path.display()))?;
        let serve = plan.serving_stage();
        let line = format!(
            "ok: {} stages, serving stage {} ({}){}\n",
            plan.len(),
            serve.index,
            serve.dataset_ref,
            if plan.is_zero_shot() { ", zero-shot" } else { "" }
        );
        return emit(a.out.as_deref(), &line);
    }
    let mut specs = vec![StageSpec::general_qa(&a.base).with_epochs(a.epochs)];
    specs.extend(a.aux.iter().map(|d| StageSpec::slot_filling(d).with_epochs(a.epochs)));
    specs.extend(a.target.iter().map(|d| StageSpec::slot_filling(d).with_epochs(a.epochs)));
    let mut plan = build_curriculum(specs)?;
    if a.zero_shot {
        if a.target.is_none() {
            return Err(usage("--zero-shot needs --target"));
        }
        plan = plan.zero_shot()?;
    }
    emit(a.out.as_deref(), &plan.to_manifest())
}

fn eval(a: EvalArgs) -> Result<()> {
    let gold = bio(&a.bio)?;
    let predictions: Vec<SlotFillResult> = match &a.predictions {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            if a.screen.is_empty() {
                return Err(usage("eval needs --screen unless --predictions is given"));
            }
            let screens = screens(&a.screen)?;
            let g = generator(&a.questions)?;
            let cfg = backend_config(&a.backend)?;
            let backend = backend(&a.backend, &cfg, || oracle_from_bio(&a.bio, &screens[0], &g, a.questions.mode))?;
            let filler = SlotFiller::new(backend.as_ref(), cfg).with_generator(g.clone());
            gold.iter()
                .map(|u| filler.fill_utterance(&screens, u, a.questions.mode))
                .collect::<Result<_, _>>()?
        }
    };
    if let Some(path) = &a.save_predictions {
        fs::write(path, pretty(&predictions)?).with_context(|| format!("writing {}", path.display()))?;
    }
    let report = token_f1_with(&gold, &predictions, EvalOptions { raw: a.raw })?;
    let text = if a.table {
        let mut t = align_columns(&report.to_tsv());
        t.push_str(&format!("micro f1 {:.4}", report.micro_f1));
        if let Some(acc) = report.rejection_accuracy {
            t.push_str(&format!(", rejection accuracy {acc:.4}"));
        }
        t.push('\n');
        t
    } else {
        pretty(&report)?
    };
    emit(a.out.as_deref(), &text)
}

/// Hands each trained cell's examples and manifest to an external trainer by
/// writing them below a directory. Dataset references in the manifest are
/// relative to that directory.
struct Export {
    dir: PathBuf,
}

impl Trainer for Export {
    fn train(&self, cell: &CellContext<'_>) -> Result<(), String> {
        let target = &cell.plan.stages().last().ok_or("empty plan")?.dataset_ref;
        let data = self.dir.join(target);
        let manifest = data.with_extension("plan.json");
        let write = || -> Result<()> {
            if let Some(parent) = data.parent() {
                fs::create_dir_all(parent)?;
            }
            write_squad(cell.train, target, fs::File::create(&data)?)?;
            fs::write(&manifest, cell.plan.to_manifest())?;
            Ok(())
        };
        write().map_err(|e| format!("{}: {e:#}", data.display()))
    }
}

fn corpora(a: &SweepArgs) -> Result<Vec<DomainCorpus>> {
    let mut out = Vec::new();
    for spec in &a.corpus {
        let (name, rest) = spec.split_once('=').ok_or_else(|| usage(format!("--corpus `{spec}` is not NAME=SCREEN:BIO")))?;
        let (screen_path, bio_path) = rest
            .rsplit_once(':')
            .ok_or_else(|| usage(format!("--corpus `{spec}` is not NAME=SCREEN:BIO")))?;
        out.push(DomainCorpus::new(name, screen(screen_path)?, bio(Path::new(bio_path))?));
    }
    let names: Vec<String> = if a.domain.is_empty() && a.corpus.is_empty() {
        bundled::DOMAINS.iter().map(|d| d.to_string()).collect()
    } else {
        a.domain.clone()
    };
    for d in names {
        out.push(bundled::domain_corpus(&d).ok_or_else(|| {
            usage(format!("unknown domain `{d}` (bundled: {})", bundled::DOMAINS.join(", ")))
        })?);
    }
    Ok(out)
}

fn sweep(a: SweepArgs) -> Result<()> {
    if a.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    if !(0.0..1.0).contains(&a.test_fraction) {
        return Err(usage("--test-fraction must be in [0, 1)"));
    }
    let corpora = corpora(&a)?;
    let g = generator(&a.questions)?;
    let bcfg = backend_config(&a.backend)?;
    let mut taus = vec![a.backend.tau];
    taus.extend(a.tau_sweep.iter().copied().filter(|t| *t != a.backend.tau));

    if let Some(v) = a.distractors {
        return distractors(&a, &corpora, g, bcfg, v);
    }

    let cfg = ExperimentConfig {
        train_sizes: a.sizes.clone(),
        seeds: (a.seed..a.seed + a.seeds).collect(),
        mode: a.questions.mode,
        tau_sweep: taus,
        test_fraction: a.test_fraction,
        jobs: a.jobs,
        base_dataset: a.base.clone(),
        auxiliary: a.aux.clone(),
        epochs: 2,
        negatives: a.negatives,
        generator: g,
        backend: bcfg.clone(),
    };
    let export = a.work_dir.clone().map(|dir| Export { dir });
    let trainer = export.as_ref().map(|e| e as &dyn Trainer);
    let table = match a.backend.backend {
        BackendKind::Oracle => run_sweep(&cfg, &corpora, &oracle_factory(), trainer)?,
        BackendKind::Lexical => {
            let gaz = gazetteer(&a.backend)?;
            let factory = move |_: &CellContext<'_>| Ok(Box::new(LexicalBackend::new(gaz.clone())) as Box<dyn SpanExtractor>);
            run_sweep(&cfg, &corpora, &factory, trainer)?
        }
        BackendKind::Remote => {
            remote(&bcfg)?;
            let factory = |_: &CellContext<'_>| {
                RemoteBackend::new(&bcfg).map(|b| Box::new(b) as Box<dyn SpanExtractor>).map_err(|e| e.to_string())
            };
            run_sweep(&cfg, &corpora, &factory, trainer)?
        }
    };
    for r in table.runs.iter().filter(|r| r.error.is_some()) {
        log::warn!("{} k={} seed={}: {}", r.domain, r.k, r.seed, r.error.as_deref().unwrap_or_default());
    }
    let text = if a.table {
        table.to_table()
    } else if a.tsv {
        table.to_tsv()
    } else {
        table.to_json()
    };
    emit(a.out.as_deref(), &text)
}

fn distractors(a: &SweepArgs, corpora: &[DomainCorpus], g: QuestionGenerator, bcfg: BackendConfig, v: usize) -> Result<()> {
    if v == 0 {
        return Err(usage("--distractors must be at least 1"));
    }
    let mut pool = bundled::screens();
    pool.extend(corpora.iter().map(|c| c.screen.clone()));
    let cfg = DistractorConfig {
        v_range: 1..=v,
        counting: if a.by_screen { DistractorCounting::Screens } else { DistractorCounting::Elements },
        seed: a.seed,
        mode: a.questions.mode,
        generator: g,
        backend: bcfg.clone(),
    };
    let mut tables: Vec<DistractorTable> = Vec::new();
    for c in corpora {
        let (_, test) = c.split(a.test_fraction, a.seed);
        let backend = backend(&a.backend, &bcfg, || {
            let gold = screen_qa_examples(&test, &c.screen, &cfg.generator, cfg.mode, NegativePolicy::None)?;
            Ok(GoldOracle::from_examples(&gold))
        })?;
        tables.push(distractor_sweep(&c.name, &c.screen, &test, &pool, backend.as_ref(), &cfg)?);
    }
    let text = if a.table || a.tsv {
        let mut tsv = String::new();
        for (i, t) in tables.iter().enumerate() {
            let body = t.to_tsv();
            tsv.push_str(if i == 0 { &body } else { body.split_once('\n').map_or("", |(_, rest)| rest) });
        }
        if a.table {
            align_columns(&tsv)
        } else {
            tsv
        }
    } else {
        pretty(&tables)?
    };
    emit(a.out.as_deref(), &text)
}
