use crate::observer_spec::parse_observer;
use crate::{FitArgs, Invalid, PlanArgs, ReportArgs, RunArgs, ScoreArgs, ServeArgs, StimgenArgs};
use anyhow::Context;
use psyscale::doc::{self, DocError};
use psyscale::jsonl::JsonlError;
use psyscale::metrics::{
    brainscore_comparison, chi_squared_null_test, psychophysical_score, read_brain_scores,
    variance_table_with, write_plot_data, ChiSquaredResult, ComparisonReport, MetricsError,
    ScoreReport, SkewnessSet, VarianceKind, VarianceRow,
};
use psyscale::mlds::MldsError;
use psyscale::observers::ObserverError;
use psyscale::pipeline::{
    fit_by_class_pair, random_null_sets, skewness_from_report, stimgen as run_stimgen, FitReport,
    PipelineError, SequenceDir, StimgenConfig,
};
use psyscale::stimuli::StimuliError;
use psyscale::trials::{
    build_plan, pool_responses, run_machine_session, save_session, Clock, LogicalClock,
    SessionError, SystemClock, TrialPlan, TrialsError,
};
use psyscale::{ClassPair, FitConfig};
use psyscale_service::{ServiceConfig, ServiceError};
use serde::Serialize;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

pub const PLAN_KIND: &str = "trial_plan";
pub const FIT_KIND: &str = "fit_report";
pub const SKEW_KIND: &str = "skewness_set";
pub const SCORE_KIND: &str = "score_report";
pub const REPORT_KIND: &str = "report";

/// 2 for inputs that fail validation, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(is_validation) {
        2
    } else {
        1
    }
}

fn is_validation(e: &(dyn std::error::Error + 'static)) -> bool {
    if e.is::<Invalid>() {
        return true;
    }
    if let Some(e) = e.downcast_ref::<DocError>() {
        return !matches!(e, DocError::Io { .. });
    }
    if let Some(e) = e.downcast_ref::<JsonlError>() {
        return matches!(e, JsonlError::Parse { .. });
    }
    if let Some(e) = e.downcast_ref::<MldsError>() {
        return mlds_invalid(e);
    }
    if let Some(e) = e.downcast_ref::<TrialsError>() {
        return matches!(e, TrialsError::InvalidParameter(_));
    }
    if let Some(e) = e.downcast_ref::<StimuliError>() {
        return stimuli_invalid(e);
    }
    if let Some(e) = e.downcast_ref::<MetricsError>() {
        return !matches!(e, MetricsError::Io { .. } | MetricsError::UndefinedCorrelation(_));
    }
    if let Some(e) = e.downcast_ref::<ObserverError>() {
        return observer_invalid(e);
    }
    if let Some(e) = e.downcast_ref::<PipelineError>() {
        return match e {
            PipelineError::Layout(_) => true,
            PipelineError::Stimuli(s) => stimuli_invalid(s),
            PipelineError::Mlds(m) => mlds_invalid(m),
            PipelineError::Doc(d) => !matches!(d, DocError::Io { .. }),
            PipelineError::Io { .. } => false,
        };
    }
    if let Some(e) = e.downcast_ref::<SessionError>() {
        return match e {
            SessionError::Plan(TrialsError::InvalidParameter(_)) => true,
            SessionError::Observer(o) => observer_invalid(o),
            _ => false,
        };
    }
    if let Some(e) = e.downcast_ref::<ServiceError>() {
        return matches!(e, ServiceError::Config(_));
    }
    false
}

fn mlds_invalid(e: &MldsError) -> bool {
    matches!(
        e,
        MldsError::InvalidConfig(_) | MldsError::MalformedResponse(_) | MldsError::InvalidScale(_)
    )
}

fn stimuli_invalid(e: &StimuliError) -> bool {
    matches!(e, StimuliError::MalformedImage(_) | StimuliError::InvalidParameter(_))
}

fn observer_invalid(e: &ObserverError) -> bool {
    !matches!(e, ObserverError::Io { .. } | ObserverError::MissingEmbedding(_))
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

pub fn stimgen(a: StimgenArgs) -> anyhow::Result<()> {
    let mut cfg = StimgenConfig::new(a.images, a.masks, a.out);
    cfg.pairs_per_instance = a.pairs_per_instance;
    cfg.seed = a.seed;
    if let Some(s) = a.blur_sigma {
        cfg.blur_sigma = s;
    }
    if cfg.pairs_per_instance == 0 {
        return Err(Invalid("--pairs-per-instance must be at least 1".into()).into());
    }
    let summary = run_stimgen(&cfg)?;
    print_json(&summary)
}

pub fn plan(a: PlanArgs) -> anyhow::Result<()> {
    let dir = SequenceDir::open(&a.sequences)?;
    if dir.ids().is_empty() {
        return Err(Invalid(format!("{}: no sequences found", a.sequences.display())).into());
    }
    let plan = build_plan(dir.ids().to_vec(), a.repetitions, a.seed)?;
    doc::write(&a.out, PLAN_KIND, &plan)?;
    tracing::info!(trials = plan.len(), out = %a.out.display(), "plan written");
    Ok(())
}

pub fn run(a: RunArgs) -> anyhow::Result<()> {
    let plan: TrialPlan = doc::read(&a.plan, PLAN_KIND)?;
    plan.validate()?;
    let observer = parse_observer(&a.observer)?;
    let dir = SequenceDir::open(&a.sequences)?;
    let clock: Box<dyn Clock> = if a.wall_clock {
        Box::new(SystemClock)
    } else {
        Box::new(LogicalClock::default())
    };
    let record = match run_machine_session(&plan, &observer, &dir, clock.as_ref()) {
        Ok(r) => r,
        Err(SessionError::Aborted { partial, source }) => {
            save_session(&partial, &a.out)?;
            return Err(anyhow::anyhow!(source).context(format!(
                "session aborted; {} responses saved to {}",
                partial.responses.len(),
                a.out.display()
            )));
        }
        Err(e) => return Err(e.into()),
    };
    let side = save_session(&record, &a.out)?;
    tracing::info!(
        responses = record.responses.len(),
        out = %a.out.display(),
        summary = %side.display(),
        "session finished"
    );
    Ok(())
}

/// Expands directories into their `*.jsonl` files, sorted by name.
fn response_files(inputs: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                .with_context(|| input.display().to_string())?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("jsonl"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        return Err(Invalid("no response files found".into()).into());
    }
    Ok(files)
}

pub fn fit(a: FitArgs) -> anyhow::Result<()> {
    let files = response_files(&a.responses)?;
    let responses = pool_responses(&files, None)?;
    let config = FitConfig {
        rng_seed: a.seed,
        ..FitConfig::default()
    };
    let report = fit_by_class_pair(&responses, &config, a.observer_id.as_deref(), a.qualify);
    doc::write(&a.out, FIT_KIND, &report)?;
    if let Some(path) = &a.skew_out {
        let mut set = skewness_from_report(&report);
        if a.negate_skew {
            set = set.negated();
        }
        doc::write(path, SKEW_KIND, &set)?;
    }
    tracing::info!(
        responses = responses.len(),
        fitted = report.entries.len(),
        failed = report.failures.len(),
        "fit finished"
    );
    Ok(())
}

/// Reads a skewness set, deriving it when given a fit report.
pub fn load_skew(path: &Path) -> anyhow::Result<SkewnessSet> {
    let text = doc::read_text(path)?;
    let origin = path.display().to_string();
    match doc::peek_kind(&text, &origin)?.as_str() {
        FIT_KIND => {
            let report: FitReport = doc::from_str(FIT_KIND, &text, &origin)?;
            Ok(skewness_from_report(&report))
        }
        _ => Ok(doc::from_str(SKEW_KIND, &text, &origin)?),
    }
}

pub fn score(a: ScoreArgs) -> anyhow::Result<()> {
    let human = load_skew(&a.human)?;
    let model = load_skew(&a.model)?;
    let report = psychophysical_score(&human, &model)?;
    match &a.out {
        Some(path) => doc::write(path, SCORE_KIND, &report)?,
        None => println!("{}", doc::to_string(SCORE_KIND, &report)),
    }
    Ok(())
}

#[derive(Serialize)]
struct NullTest {
    observer_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<ChiSquaredResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct Report {
    variance_kind: VarianceKind,
    variance: Vec<VarianceRow>,
    n_null_sets: usize,
    null_tests: Vec<NullTest>,
    comparison: ComparisonReport,
}

pub fn report(a: ReportArgs) -> anyhow::Result<()> {
    let scores: Vec<ScoreReport> = a
        .scores
        .iter()
        .map(|p| doc::read(p, SCORE_KIND))
        .collect::<Result<_, _>>()?;
    let sets: Vec<SkewnessSet> = a.skew.iter().map(|p| load_skew(p)).collect::<Result<_, _>>()?;

    let mut null: Vec<SkewnessSet> = a.null.iter().map(|p| load_skew(p)).collect::<Result<_, _>>()?;
    if a.null_sets > 0 {
        let pairs: BTreeSet<ClassPair> = sets.iter().flat_map(|s| s.entries.keys().cloned()).collect();
        if pairs.is_empty() {
            return Err(Invalid("--null-sets needs --skew inputs to take class pairs from".into()).into());
        }
        let pairs: Vec<ClassPair> = pairs.into_iter().collect();
        let config = FitConfig {
            rng_seed: a.null_seed,
            ..FitConfig::default()
        };
        null.extend(random_null_sets(&pairs, a.null_sets, a.null_responses, a.null_seed, &config));
    }

    let null_tests = if null.is_empty() {
        Vec::new()
    } else {
        sets.iter()
            .map(|s| match chi_squared_null_test(s, &null, a.bins) {
                Ok(r) => NullTest {
                    observer_id: s.observer_id.clone(),
                    result: Some(r),
                    error: None,
                },
                Err(e) => NullTest {
                    observer_id: s.observer_id.clone(),
                    result: None,
                    error: Some(e.to_string()),
                },
            })
            .collect()
    };

    let variance_kind = if a.sample_variance {
        VarianceKind::Sample
    } else {
        VarianceKind::Population
    };
    let variance = if sets.is_empty() {
        Vec::new()
    } else {
        variance_table_with(&sets, variance_kind)?
    };

    let brain = match &a.brain_scores {
        Some(p) => read_brain_scores(p)?,
        None => Default::default(),
    };
    let comparison = brainscore_comparison(&scores, &brain);

    let report = Report {
        variance_kind,
        variance,
        n_null_sets: null.len(),
        null_tests,
        comparison,
    };
    doc::write(&a.out, REPORT_KIND, &report)?;
    if let Some(path) = &a.plot_data {
        let mut file = std::io::BufWriter::new(
            std::fs::File::create(path).with_context(|| path.display().to_string())?,
        );
        write_plot_data(&report.comparison, &mut file)
            .and_then(|_| std::io::Write::flush(&mut file))
            .with_context(|| path.display().to_string())?;
    }
    Ok(())
}

pub fn serve(a: ServeArgs) -> anyhow::Result<()> {
    let config = match &a.config {
        Some(p) => ServiceConfig::load(p)?,
        None => ServiceConfig::from_env()?.ok_or_else(|| {
            Invalid(format!(
                "no configuration: pass --config or set {}",
                psyscale_service::CONFIG_ENV
            ))
        })?,
    };
    config.validate()?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(psyscale_service::serve(config))?;
    Ok(())
}
