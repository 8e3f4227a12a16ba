use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scopemh::audit::{Audit, CensoringMode, MetricSelector};
use scopemh::corpus::{ingest, Corpus, IngestOptions, Quality};
use scopemh::detection::{self, combine, CombineRule, DetectionOutcome, GridSpec, Method, SweepResult};
use scopemh::report::{self, fmt3, Table, REPORT_VERSION};
use scopemh::scope::{render_card, DeterminantCatalog, ScopeCard};
use scopemh::stats::{compare_groups, score_curve, CompareOptions, CurveKind, CurveResult, GroupComparison};
use scopemh::tsni::{self, catalog, Alphabets, CompressionFn, CompressionKind, SafetyPredicate, Space};
use scopemh::{metrics, svg, Error, ErrorKind, DATA_PATH_ENV};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INGEST: u8 = 3;
const EXIT_VALIDATION: u8 = 4;
const EXIT_CAPACITY: u8 = 5;
const EXIT_COMPUTATION: u8 = 6;

/// Metrics compared between quality groups, in report order.
const COMPARED: [MetricSelector; 6] = [
    MetricSelector::PerTurn,
    MetricSelector::SustainDelta,
    MetricSelector::TemporalScore,
    MetricSelector::TNorm,
    MetricSelector::TDom,
    MetricSelector::SMax,
];

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    fn config(message: impl Into<String>) -> Self {
        Self::new(EXIT_CONFIG, message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Io => EXIT_IO,
            ErrorKind::Configuration => EXIT_CONFIG,
            ErrorKind::Ingestion => EXIT_INGEST,
            ErrorKind::Validation => EXIT_VALIDATION,
            ErrorKind::Capacity => EXIT_CAPACITY,
            ErrorKind::Computation => EXIT_COMPUTATION,
        };
        Failure::new(code, e.to_string())
    }
}

type Result<T> = std::result::Result<T, Failure>;

#[derive(Parser)]
#[command(name = "scopemh", version, about = "Corpus audit of temporal signals in annotated counseling dialogues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-conversation metrics, group comparisons and curves.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Censoring mode used for the timing rows of the markdown report.
        #[arg(long, default_value = "include")]
        censoring: CensoringMode,
    },
    /// Threshold detection, sweeps and bootstrap intervals.
    Detect {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value_t = detection::DEFAULT_THETA, allow_hyphen_values = true)]
        theta: f64,
        /// Per-turn threshold. Defaults to the F1-best point of the
        /// data-driven grid.
        #[arg(long, allow_hyphen_values = true)]
        theta_pt: Option<f64>,
        #[arg(long, default_value_t = detection::DEFAULT_THETA_EW, allow_hyphen_values = true)]
        theta_ew: f64,
        /// Grid for the temporal sweeps: `start:stop:step`, `data`, or a
        /// comma-separated list.
        #[arg(long, default_value = "-0.50:-0.05:0.05", allow_hyphen_values = true)]
        sweep: String,
        #[arg(long, default_value_t = 1000)]
        resamples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Trace of a single conversation.
    Case {
        /// Conversation id.
        id: String,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exhaustive non-identifiability check on a bounded trajectory space.
    Tsni(TsniArgs),
    /// Validate a SCOPE card and optionally render it.
    Scope {
        card: PathBuf,
        /// Report unsupported claims without failing.
        #[arg(long)]
        warn_only: bool,
        /// Write the rendered card here.
        #[arg(long)]
        render: Option<PathBuf>,
        /// Determinant catalog replacing the built-in one.
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long, env = DATA_PATH_ENV)]
    input: PathBuf,
    /// Column mapping override, `field=column`.
    #[arg(long = "map", value_name = "FIELD=COLUMN")]
    map: Vec<String>,
    #[arg(long, default_value = ",", conflicts_with = "tab")]
    delimiter: String,
    #[arg(long)]
    tab: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Format {
    Json,
    Csv,
    Md,
    Svg,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, default_value = "scopemh-out")]
    out: PathBuf,
    /// Output formats to write.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json,csv,md,svg")]
    format: Vec<Format>,
}

#[derive(Args)]
struct TsniArgs {
    /// Compression: identity, constant, final-value, mean-value,
    /// final-answer or count:<action>.
    #[arg(long, default_value = "count:escalate")]
    phi: String,
    /// Predicate: latency:<k>, risk-run:<m>, recovery:<k>, safe or unsafe.
    #[arg(long, default_value = "latency:1")]
    predicate: String,
    #[arg(long, default_value_t = 3)]
    horizon: usize,
    #[arg(long, value_delimiter = ',', default_value = "user")]
    users: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "respond,escalate")]
    actions: Vec<String>,
    /// Risk levels; the first is baseline.
    #[arg(long, value_delimiter = ',', default_value = "none,cue")]
    risks: Vec<String>,
    #[arg(long, default_value_t = tsni::DEFAULT_SPACE_CAP)]
    cap: u128,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl InputArgs {
    fn load(&self) -> Result<Corpus> {
        let mut options = IngestOptions::default();
        for m in &self.map {
            options.mapping.apply_override(m)?;
        }
        options.delimiter = if self.tab {
            b'\t'
        } else {
            match self.delimiter.as_bytes() {
                [b] => *b,
                _ => return Err(Failure::config(format!("delimiter must be one byte, got {:?}", self.delimiter))),
            }
        };
        let file = fs::File::open(&self.input)
            .map_err(|e| Failure::new(EXIT_IO, format!("cannot open {}: {e}", self.input.display())))?;
        Ok(ingest(file, &options)?)
    }
}

struct Sink {
    dir: PathBuf,
    formats: BTreeSet<Format>,
    written: Vec<PathBuf>,
}

impl Sink {
    fn new(args: &OutputArgs) -> Result<Self> {
        fs::create_dir_all(&args.out)
            .map_err(|e| Failure::new(EXIT_IO, format!("cannot create {}: {e}", args.out.display())))?;
        Ok(Sink { dir: args.out.clone(), formats: args.format.iter().copied().collect(), written: Vec::new() })
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn write(&mut self, format: Format, name: &str, body: &str) -> Result<()> {
        if !self.wants(format) {
            return Ok(());
        }
        let path = self.dir.join(name);
        write_file(&path, body)?;
        self.written.push(path);
        Ok(())
    }

    fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        if self.wants(Format::Csv) {
            let body = table.to_delimited(b',')?;
            self.write(Format::Csv, &format!("{name}.csv"), &body)?;
        }
        Ok(())
    }

    fn json(&mut self, name: &str, schema: &str, payload: serde_json::Value) -> Result<()> {
        if self.wants(Format::Json) {
            let doc = serde_json::json!({ "schema": schema, "version": REPORT_VERSION, "data": payload });
            let body = serde_json::to_string_pretty(&doc).map_err(Error::from)? + "\n";
            self.write(Format::Json, &format!("{name}.json"), &body)?;
        }
        Ok(())
    }

    fn finish(&self) {
        for p in &self.written {
            println!("wrote {}", p.display());
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(value).map_err(Error::from)?)
}

fn compare(audit: &Audit, metric: MetricSelector, mode: CensoringMode) -> scopemh::Result<GroupComparison> {
    let high = audit.values(metric, Quality::High, mode);
    let low = audit.values(metric, Quality::Low, mode);
    compare_groups(metric.name(), &high, &low, CompareOptions::default())
}

/// Scores oriented so that low quality is the positive class.
fn curve(audit: &Audit, metric: MetricSelector, kind: CurveKind) -> scopemh::Result<CurveResult> {
    let (scores, labels): (Vec<f64>, Vec<bool>) = audit
        .rows
        .iter()
        .filter_map(|r| metric.value(r, CensoringMode::Include).map(|v| (-v, r.quality == Quality::Low)))
        .unzip();
    score_curve(&scores, &labels, kind)
}

fn analyze(input: &InputArgs, output: &OutputArgs, censoring: CensoringMode) -> Result<()> {
    let corpus = input.load()?;
    let audit = Audit::from_corpus(&corpus);
    let mut sink = Sink::new(output)?;

    sink.table("metrics", &report::metric_table(&audit))?;
    sink.json("metrics", "scopemh.metrics", to_json(&audit.rows)?)?;

    let mut md = String::new();
    let _ = writeln!(md, "<!-- scopemh.report v{REPORT_VERSION} -->");
    let _ = writeln!(md, "# Corpus audit\n");
    md.push_str(&report::counts_markdown(&corpus.counts(), corpus.turn_statistics().as_ref()));
    let excluded: Vec<String> = corpus.excluded().map(|(c, _)| c.id.clone()).collect();
    if !excluded.is_empty() {
        let _ = writeln!(md, "\nExcluded: {}", excluded.join(", "));
    }
    let _ = writeln!(md, "\n## Half ratios\n");
    md.push_str(&report::half_ratio_markdown(&audit));

    let mut all = serde_json::Map::new();
    for mode in [CensoringMode::Include, CensoringMode::EventsOnly] {
        let mut ok = Vec::new();
        let mut skipped = Vec::new();
        for m in COMPARED {
            match compare(&audit, m, mode) {
                Ok(c) => ok.push(c),
                Err(e) => skipped.push(format!("{}: {e}", m.name())),
            }
        }
        sink.table(&format!("comparison_{}", mode.as_str()), &report::comparison_table(&ok, mode))?;
        all.insert(mode.as_str().into(), to_json(&ok)?);
        if mode == censoring {
            let _ = writeln!(md, "\n## Group comparison (T_dom censoring: {})\n", mode.as_str());
            let labeled: Vec<(String, GroupComparison)> =
                ok.into_iter().map(|c| (metric_label(&c.metric_name), c)).collect();
            md.push_str(&report::comparison_markdown(&labeled));
            for s in skipped {
                let _ = writeln!(md, "\nNot compared: {s}");
            }
        }
    }
    sink.json("comparison", "scopemh.comparison", serde_json::Value::Object(all))?;

    let _ = writeln!(md, "\n## Discrimination of low-quality conversations\n");
    let mut auc = Table::new("scopemh.auc", &["Signal", "ROC AUC", "PR AUC", "Average precision"]);
    let mut roc_series = Vec::new();
    let mut pr_series = Vec::new();
    let mut curves_json = serde_json::Map::new();
    for m in [MetricSelector::PerTurn, MetricSelector::SustainDelta] {
        let (roc, pr) = match (curve(&audit, m, CurveKind::Roc), curve(&audit, m, CurveKind::PrecisionRecall)) {
            (Ok(r), Ok(p)) => (r, p),
            (Err(e), _) | (_, Err(e)) => {
                let _ = writeln!(md, "{}: {e}\n", m.label());
                continue;
            }
        };
        auc.push(vec![m.label().into(), fmt3(roc.auc), fmt3(pr.auc), pr.average_precision.map_or("-".into(), fmt3)]);
        sink.table(&format!("curve_{}_roc", m.name()), &report::curve_table(m.name(), &roc))?;
        sink.table(&format!("curve_{}_pr", m.name()), &report::curve_table(m.name(), &pr))?;
        curves_json.insert(m.name().into(), serde_json::json!({ "roc": to_json(&roc)?, "pr": to_json(&pr)? }));
        roc_series.push((m.label().to_string(), roc.points));
        pr_series.push((m.label().to_string(), pr.points));
    }
    md.push_str(&auc.to_markdown());
    sink.json("curves", "scopemh.curves", serde_json::Value::Object(curves_json))?;

    if !roc_series.is_empty() {
        let roc = svg::curves("ROC: low-quality detection", "false positive rate", "true positive rate", &roc_series, true);
        let pr = svg::curves("Precision-recall: low-quality detection", "recall", "precision", &pr_series, false);
        sink.write(Format::Svg, "roc.svg", &roc)?;
        sink.write(Format::Svg, "pr.svg", &pr)?;
    }
    let arcs: Vec<(String, [f64; 4])> = [Quality::High, Quality::Low]
        .into_iter()
        .filter_map(|q| audit.mean_half_ratios(q).map(|r| (q.to_string(), r)))
        .collect();
    sink.write(Format::Svg, "change_arcs.svg", &svg::change_arcs(&arcs))?;
    sink.write(Format::Md, "report.md", &md)?;
    sink.finish();
    Ok(())
}

fn metric_label(name: &str) -> String {
    name.parse::<MetricSelector>().map_or_else(|_| name.to_string(), |m| m.label().to_string())
}

#[allow(clippy::too_many_arguments)]
fn detect(
    input: &InputArgs,
    output: &OutputArgs,
    theta: f64,
    theta_pt: Option<f64>,
    theta_ew: f64,
    sweep: &str,
    resamples: usize,
    seed: u64,
) -> Result<()> {
    for (name, v) in [("theta", theta), ("theta-ew", theta_ew)].into_iter().chain(theta_pt.map(|t| ("theta-pt", t))) {
        if !v.is_finite() {
            return Err(Failure::config(format!("--{name} must be finite")));
        }
    }
    if resamples == 0 {
        return Err(Failure::config("--resamples must be at least 1"));
    }
    let grid = GridSpec::parse(sweep)?;
    let corpus = input.load()?;
    let audit = Audit::from_corpus(&corpus);
    let mut sink = Sink::new(output)?;

    let pt_sweep = detection::sweep_threshold(&audit, Method::PerTurn, &GridSpec::DataDriven)?;
    let theta_pt = theta_pt.unwrap_or(pt_sweep.best_threshold);

    let temporal = detection::detect_temporal(&audit, theta)?;
    let per_turn = detection::detect_per_turn(&audit, theta_pt)?;
    let either = combine(&[&temporal, &per_turn], CombineRule::Either)?;
    let ew = detection::detect_early_warning(&audit, theta_ew, theta_pt)?;
    let full = [
        (Method::Temporal.label().to_string(), &temporal),
        (Method::PerTurn.label().to_string(), &per_turn),
        ("Combined (either)".to_string(), &either),
    ];
    let midpoint = [
        (Method::EarlyWarningTemporal.label().to_string(), &ew.temporal),
        (Method::EarlyWarningPerTurn.label().to_string(), &ew.per_turn),
        ("Combined at midpoint (either)".to_string(), &ew.combined),
    ];
    let all: Vec<(String, &DetectionOutcome)> = full.iter().chain(midpoint.iter()).cloned().collect();
    sink.table("detection", &report::detection_table(&all))?;
    sink.table("flags", &report::flag_listing(&audit, &all))?;

    let t_sweep = detection::sweep_threshold(&audit, Method::Temporal, &grid)?;
    let ew_sweep = detection::sweep_threshold(&audit, Method::EarlyWarningTemporal, &grid)?;
    sink.table("sweep_temporal", &report::sweep_table(&t_sweep))?;
    sink.table("sweep_early_warning", &report::sweep_table(&ew_sweep))?;
    sink.table("sweep_per_turn", &report::sweep_table(&pt_sweep))?;
    sink.write(Format::Svg, "threshold_temporal.svg", &sensitivity("Temporal signal threshold sensitivity", &t_sweep, theta, &audit))?;
    sink.write(
        Format::Svg,
        "threshold_early_warning.svg",
        &sensitivity("Midpoint temporal signal threshold sensitivity", &ew_sweep, theta_ew, &audit),
    )?;

    let ci = detection::bootstrap_outcome(&audit, &temporal, resamples, seed)?;
    let ci_lines = format!("{}\n{}\n", report::bootstrap_line(&ci.detection), report::bootstrap_line(&ci.false_alarm));
    sink.write(Format::Md, "bootstrap.txt", &format!("# scopemh.bootstrap v{REPORT_VERSION}\n{ci_lines}"))?;

    sink.json(
        "detection",
        "scopemh.detection",
        serde_json::json!({
            "theta": theta,
            "theta_pt": theta_pt,
            "theta_ew": theta_ew,
            "full": { "temporal": to_json(&temporal)?, "per_turn": to_json(&per_turn)?, "combined": to_json(&either)? },
            "midpoint": to_json(&ew)?,
            "sweeps": { "temporal": to_json(&t_sweep)?, "early_warning": to_json(&ew_sweep)?, "per_turn": to_json(&pt_sweep)? },
            "bootstrap": to_json(&ci)?,
        }),
    )?;

    let mut md = String::new();
    let _ = writeln!(md, "<!-- scopemh.detection-report v{REPORT_VERSION} -->");
    let _ = writeln!(md, "# Detection\n");
    let _ = writeln!(md, "θ = {theta}, θ_PT = {}, θ_ew = {theta_ew}\n", report::fmt_n(theta_pt, 6));
    let _ = writeln!(md, "## Full conversation\n");
    md.push_str(&report::detection_markdown(&full));
    let _ = writeln!(md, "\n## Midpoint\n");
    md.push_str(&report::detection_markdown(&midpoint));
    let _ = writeln!(md, "\n## Threshold sweeps\n");
    for (label, s) in [("Temporal", &t_sweep), ("Midpoint temporal", &ew_sweep), ("Per-turn (data-driven)", &pt_sweep)] {
        let _ = writeln!(md, "- {label}: best θ = {}, F1 = {}", report::fmt_n(s.best_threshold, 4), fmt3(s.best_f1));
    }
    let _ = writeln!(md, "\n## Bootstrap at θ = {theta}\n");
    for line in ci_lines.lines() {
        let _ = writeln!(md, "- {line}");
    }
    sink.write(Format::Md, "detection.md", &md)?;
    print!("{ci_lines}");
    sink.finish();
    Ok(())
}

fn sensitivity(title: &str, sweep: &SweepResult, chosen: f64, audit: &Audit) -> String {
    let (n_low, n_high) = (audit.count(Quality::Low).max(1) as f64, audit.count(Quality::High).max(1) as f64);
    let pts: Vec<(f64, f64, f64)> =
        sweep.grid.iter().map(|p| (p.threshold, p.detected as f64 / n_low, p.false_alarms as f64 / n_high)).collect();
    svg::threshold_sensitivity(title, &pts, Some(chosen))
}

fn case(id: &str, input: &InputArgs, output: &OutputArgs) -> Result<()> {
    let corpus = input.load()?;
    let conv = corpus.get(id).ok_or_else(|| Failure::config(format!("unknown conversation `{id}`")))?;
    let trace = metrics::case_trace(conv)?;
    let per_turn = metrics::per_turn_score(conv).ok();
    let mut sink = Sink::new(output)?;
    let stem = format!("case_{}", sanitize(id));
    sink.json(&stem, "scopemh.case", serde_json::json!({ "trace": to_json(&trace)?, "per_turn": per_turn }))?;
    sink.write(Format::Md, &format!("{stem}.md"), &report::case_markdown(&trace, per_turn))?;
    sink.write(Format::Svg, &format!("{stem}.svg"), &svg::timeline(&trace))?;
    println!("{}", trace.timeline());
    sink.finish();
    Ok(())
}

fn sanitize(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn parse_phi(spec: &str) -> Result<CompressionFn> {
    Ok(match spec {
        "identity" => CompressionFn::identity(),
        "constant" => CompressionFn::constant(),
        "final-value" => CompressionFn::new("final_value", CompressionKind::FinalValue),
        "mean-value" => CompressionFn::new("mean_value", CompressionKind::MeanValue),
        "final-answer" => CompressionFn::new("final_answer", CompressionKind::FinalAnswer),
        _ => match spec.split_once(':') {
            Some(("count", action)) if !action.is_empty() => CompressionFn::event_count(action),
            _ => return Err(Failure::config(format!("unknown compression `{spec}`"))),
        },
    })
}

fn parse_predicate(spec: &str) -> Result<SafetyPredicate> {
    match spec {
        "safe" => return Ok(SafetyPredicate::constant(tsni::SAFE)),
        "unsafe" => return Ok(SafetyPredicate::constant(tsni::UNSAFE)),
        _ => {}
    }
    let (name, arg) = spec.split_once(':').ok_or_else(|| Failure::config(format!("unknown predicate `{spec}`")))?;
    let k: usize = arg.parse().map_err(|_| Failure::config(format!("predicate parameter `{arg}` is not a count")))?;
    Ok(match name {
        "latency" => catalog::escalation_latency(k),
        "risk-run" => catalog::max_risk_run(k)?,
        "recovery" => catalog::recovery_within(k)?,
        _ => return Err(Failure::config(format!("unknown predicate `{name}`"))),
    })
}

fn run_tsni(args: &TsniArgs) -> Result<()> {
    let phi = parse_phi(&args.phi)?;
    let s = parse_predicate(&args.predicate)?;
    let alphabets = Alphabets::new(args.users.clone(), args.actions.clone(), args.risks.clone());
    let space = Space::new(alphabets, args.horizon)?;
    let r = tsni::check_identifiability(&space, &phi, &s, args.cap)?;
    let mut out = String::new();
    let _ = writeln!(out, "<!-- scopemh.tsni v{REPORT_VERSION} -->");
    let _ = writeln!(out, "# Identifiability of {} under {}\n", r.predicate, r.compression);
    let _ = writeln!(out, "- horizon: {}", r.horizon);
    let _ = writeln!(out, "- trajectories: {}", r.space_size);
    let _ = writeln!(out, "- fibers: {} (largest {}, mixed {})", r.fiber_count, r.max_fiber_size, r.mixed_fibers);
    let verdict = if r.identifiable { "identifiable" } else { "not identifiable" };
    let _ = writeln!(out, "- verdict: {verdict}");
    if let Some(w) = &r.witness {
        let _ = writeln!(out, "\n{}", w.render_markdown(&space));
    }
    match &args.out {
        Some(p) => {
            write_file(p, &out)?;
            println!("{verdict}");
            println!("wrote {}", p.display());
        }
        None => print!("{out}"),
    }
    Ok(())
}

fn scope(card: &Path, warn_only: bool, render: Option<&Path>, catalog: Option<&Path>) -> Result<()> {
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| Failure::new(EXIT_IO, format!("cannot read {}: {e}", p.display())));
    let catalog = match catalog {
        Some(p) => DeterminantCatalog::from_json(&read(p)?)?,
        None => DeterminantCatalog::default(),
    };
    let card = ScopeCard::from_json(&read(card)?)?;
    let (card, report) = card.validated(&catalog)?;
    print!("{}", report.render_text());
    if let Some(p) = render {
        write_file(p, &render_card(&card, &catalog)?)?;
        println!("wrote {}", p.display());
    }
    if report.is_clean() || warn_only {
        Ok(())
    } else {
        let ids: Vec<&str> = report.unsupported.iter().map(|d| d.id()).collect();
        Err(Failure::new(EXIT_VALIDATION, format!("unsupported claims: {}", ids.join(", "))))
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { input, output, censoring } => analyze(&input, &output, censoring),
        Command::Detect { input, output, theta, theta_pt, theta_ew, sweep, resamples, seed } => {
            detect(&input, &output, theta, theta_pt, theta_ew, &sweep, resamples, seed)
        }
        Command::Case { id, input, output } => case(&id, &input, &output),
        Command::Tsni(args) => run_tsni(&args),
        Command::Scope { card, warn_only, render, catalog } => {
            scope(&card, warn_only, render.as_deref(), catalog.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
