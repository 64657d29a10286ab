//! Command-line front end. [`run`] parses arguments, dispatches, and returns
//! the process exit code: 0 success, 1 I/O failure, 2 usage or parameter
//! error, 3 validation violations.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::corpus::{params_digest, parse_corpus, write_record, CorpusFormat, CorpusRecord, LanguageTag, Metadata};
use crate::dyck::{gen_dyck1, gen_shuffle_dyck, validate_dyck1, validate_shuffle_dyck, DyckParams};
use crate::error::{Error, Result};
use crate::metrics::{ambiguity_profile, compare, LossCurve};
use crate::mpcore::{gen_core_corpus, gen_generic_ksd, validate_core_with, CoreParams, Landmark};
use crate::mpstruct::{gen_mpstruct, validate_mpstruct, Ablation, LexiconSizes, MpStructParams, TraceStyle};
use crate::perturb::{deterministic_shuffle, full_reverse, jabberwocky, word_hop, HopParams, TaggedDocument};
use crate::report::{Rule, ValidationReport};
use crate::stream::{derive_stream, SeedSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VIOLATIONS: i32 = 3;

/// Environment variable supplying the default seed.
pub const SEED_ENV: &str = "MPSTRUCT_SEED";

/// Records generated per parallel batch.
const CHUNK: u64 = 4096;

#[derive(Debug, Parser)]
#[command(name = "mpstruct", version, about = "Structural corpus generation, validation, perturbation and metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a corpus with stream ids 0..count.
    Generate(GenerateArgs),
    /// Validate every record of a corpus.
    Validate(ValidateArgs),
    /// Apply an impossible-language transform to a tagged corpus.
    Perturb(PerturbArgs),
    /// Shuffle content words within fine POS buckets.
    Jabberwocky(JabberwockyArgs),
    /// Compare a candidate loss log against a baseline.
    Metrics(MetricsArgs),
    /// Dependency-identification ambiguity per record.
    Ambiguity(AmbiguityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Lang {
    Dyck1,
    Ksd,
    Mpstruct,
    Core,
    GenericKsd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AblationArg {
    None,
    NoMerge,
    NoMove,
    NoAgree,
}

impl From<AblationArg> for Ablation {
    fn from(a: AblationArg) -> Self {
        match a {
            AblationArg::None => Ablation::None,
            AblationArg::NoMerge => Ablation::NoMerge,
            AblationArg::NoMove => Ablation::NoMove,
            AblationArg::NoAgree => Ablation::NoAgree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceStyleArg {
    MirrorWh,
    Category,
}

impl From<TraceStyleArg> for TraceStyle {
    fn from(t: TraceStyleArg) -> Self {
        match t {
            TraceStyleArg::MirrorWh => TraceStyle::MirrorWh,
            TraceStyleArg::Category => TraceStyle::Category,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Plain,
    Jsonl,
    Tsv,
}

impl FormatArg {
    fn corpus(self) -> Result<CorpusFormat> {
        match self {
            FormatArg::Plain => Ok(CorpusFormat::Plain),
            FormatArg::Jsonl => Ok(CorpusFormat::Jsonl),
            FormatArg::Tsv => Err(Error::param("tsv is only available for tagged corpora")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Transform {
    Shuffle,
    Reverse,
    Hop,
}

/// Generator parameters for every language; each language reads its subset.
#[derive(Debug, Clone, Args)]
pub struct GenParams {
    /// Bracket types (default 1 for dyck1, 64 for ksd).
    #[arg(long)]
    pub k: Option<u32>,
    /// Sequence length, or minimum corpus length `L` for core and generic-ksd.
    #[arg(long = "len", visible_alias = "L", default_value_t = 1024)]
    pub len: usize,
    #[arg(long, default_value_t = 0.49)]
    pub p_open: f64,
    #[arg(long)]
    pub max_depth: Option<usize>,

    #[arg(long, default_value_t = 0.2)]
    pub p_wh: f64,
    #[arg(long, default_value_t = 0.2)]
    pub p_dp_neg_wh: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p_sg: f64,
    #[arg(long, default_value_t = 1.0)]
    pub agree_match: f64,
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
    pub epp: bool,
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
    pub strip_lexical: bool,
    #[arg(long, default_value_t = 1024)]
    pub max_len: usize,
    #[arg(long, value_enum, default_value_t = AblationArg::None)]
    pub ablation: AblationArg,
    #[arg(long, value_enum, default_value_t = TraceStyleArg::MirrorWh)]
    pub trace_style: TraceStyleArg,
    #[arg(long, default_value_t = 50)]
    pub nouns: u32,
    #[arg(long, default_value_t = 20)]
    pub verbs: u32,
    #[arg(long, default_value_t = 5)]
    pub dets: u32,

    #[arg(long, default_value_t = 0.5)]
    pub p_agr_a: f64,
    #[arg(long, default_value_t = 1)]
    pub k_struct: u32,
    #[arg(long, default_value_t = 4)]
    pub k_dep: u32,
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
    pub shuffle_vp: bool,
    #[arg(long = "trim-to-l")]
    pub trim_to_l: bool,
}

impl GenParams {
    pub fn dyck(&self, lang: Lang) -> DyckParams {
        DyckParams {
            k: self.k.unwrap_or(if lang == Lang::Ksd { 64 } else { 1 }),
            target_len: self.len,
            p_open: self.p_open,
            max_depth: self.max_depth,
        }
    }

    pub fn mpstruct(&self) -> MpStructParams {
        MpStructParams {
            p_wh: self.p_wh,
            p_dp_neg_wh: self.p_dp_neg_wh,
            p_sg: self.p_sg,
            agreement_match_ratio: self.agree_match,
            epp_on_t: self.epp,
            strip_lexical: self.strip_lexical,
            max_len: self.max_len,
            lexicon_sizes: LexiconSizes {
                nouns: self.nouns,
                verbs: self.verbs,
                dets: self.dets,
            },
            ablation: self.ablation.into(),
            trace_style: self.trace_style.into(),
        }
    }

    pub fn core(&self) -> CoreParams {
        CoreParams {
            target_len: self.len,
            p_wh: self.p_wh,
            p_agr_a: self.p_agr_a,
            k_struct: self.k_struct,
            k_dep: self.k_dep,
            shuffle_vp: self.shuffle_vp,
            trim_to_l: self.trim_to_l,
            ..CoreParams::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub lang: Lang,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub count: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    pub format: FormatArg,
    #[command(flatten)]
    pub params: GenParams,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Corpus format; inferred from a `.jsonl` extension when absent.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Language of every record, overriding jsonl tags. Required for plain input.
    #[arg(long)]
    pub lang: Option<String>,
    /// Violation report (jsonl); stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub params: GenParams,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long, value_enum)]
    pub transform: Transform,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Tsv)]
    pub format: FormatArg,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Shuffle window size.
    #[arg(long, default_value_t = 21)]
    pub window: usize,
    /// Hop distance in words.
    #[arg(long, default_value_t = 4)]
    pub distance: usize,
    #[arg(long, default_value = "MARK")]
    pub marker: String,
    /// Count punctuation when measuring the hop distance.
    #[arg(long)]
    pub count_punct: bool,
}

#[derive(Debug, Args)]
pub struct JabberwockyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Tsv)]
    pub format: FormatArg,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Pool content words per run of this many sentences instead of per document.
    #[arg(long)]
    pub batch_sentences: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Baseline loss log (CSV with `step,loss` header, or jsonl).
    #[arg(long)]
    pub baseline: PathBuf,
    #[arg(long)]
    pub candidate: PathBuf,
    /// Pre-pretraining steps.
    #[arg(long)]
    pub x: u64,
    /// Reference step; the last baseline step when absent.
    #[arg(long)]
    pub y1: Option<f64>,
    #[arg(long)]
    pub interpolate: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AmbiguityArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::Perturb(a) => cmd_perturb(&a),
        Command::Jabberwocky(a) => cmd_jabberwocky(&a),
        Command::Metrics(a) => cmd_metrics(&a),
        Command::Ambiguity(a) => cmd_ambiguity(&a),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn infer_format(path: &Path, format: Option<FormatArg>) -> Result<CorpusFormat> {
    match format {
        Some(f) => f.corpus(),
        None if path.extension().is_some_and(|e| e == "jsonl") => Ok(CorpusFormat::Jsonl),
        None => Ok(CorpusFormat::Plain),
    }
}

fn with_params<P: Serialize>(mut record: CorpusRecord, params: &P) -> CorpusRecord {
    record
        .metadata
        .insert("params".into(), serde_json::to_value(params).expect("params serialize"));
    record
}

fn wrap(sequence: crate::corpus::TokenSequence, tag: LanguageTag, seed: SeedSpec, digest: &str) -> CorpusRecord {
    CorpusRecord {
        sequence,
        language_tag: tag,
        seed,
        params_digest: digest.to_owned(),
        metadata: Metadata::new(),
    }
}

/// The record generator for `args`, after validating its parameters once.
fn generator(args: &GenerateArgs) -> Result<Box<dyn Fn(SeedSpec) -> Result<CorpusRecord> + Sync>> {
    let p = &args.params;
    Ok(match args.lang {
        lang @ (Lang::Dyck1 | Lang::Ksd) => {
            let params = p.dyck(lang);
            params.validate()?;
            let digest = params_digest(&params);
            Box::new(move |seed| {
                let mut s = derive_stream(seed);
                let (seq, tag) = if lang == Lang::Dyck1 {
                    (gen_dyck1(&mut s, &params)?, LanguageTag::Dyck1)
                } else {
                    (gen_shuffle_dyck(&mut s, &params)?, LanguageTag::Ksd)
                };
                Ok(with_params(wrap(seq, tag, seed, &digest), &params))
            })
        }
        Lang::Mpstruct => {
            let params = p.mpstruct();
            params.validate()?;
            Box::new(move |seed| Ok(with_params(gen_mpstruct(&mut derive_stream(seed), &params)?, &params)))
        }
        Lang::Core => {
            let params = p.core();
            gen_core_corpus(&mut derive_stream(SeedSpec::new(0, 0)), &params)?;
            Box::new(move |seed| Ok(with_params(gen_core_corpus(&mut derive_stream(seed), &params)?, &params)))
        }
        Lang::GenericKsd => {
            let params = p.core();
            let p_open = p.p_open;
            gen_generic_ksd(&mut derive_stream(SeedSpec::new(0, 0)), &params, p_open)?;
            Box::new(move |seed| {
                let r = gen_generic_ksd(&mut derive_stream(seed), &params, p_open)?;
                Ok(with_params(r, &params))
            })
        }
    })
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<i32> {
    let format = args.format.corpus()?;
    let gen = generator(args)?;
    let mut out = open_output(args.output.as_deref())?;
    let mut start = 0;
    while start < args.count {
        let end = (start + CHUNK).min(args.count);
        let chunks: Vec<Vec<u8>> = (start..end)
            .into_par_iter()
            .map(|id| {
                let record = gen(SeedSpec::new(args.seed, id))?;
                let mut buf = Vec::new();
                write_record(&mut buf, &record, format);
                Ok(buf)
            })
            .collect::<Result<_>>()?;
        for c in chunks {
            out.write_all(&c)?;
        }
        start = end;
    }
    out.flush()?;
    Ok(EXIT_OK)
}

/// Parameters stored in a record's metadata, falling back to `flags`.
fn record_params<P: serde::de::DeserializeOwned>(record: &CorpusRecord, flags: P) -> P {
    record
        .metadata
        .get("params")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .unwrap_or(flags)
}

/// Validates one record under `tag`.
pub fn validate_record(record: &CorpusRecord, tag: LanguageTag, flags: &GenParams) -> Result<ValidationReport> {
    let seq = &record.sequence;
    Ok(match tag {
        LanguageTag::Dyck1 => validate_dyck1(seq),
        LanguageTag::Ksd => {
            let k = flags.k.or_else(|| {
                record
                    .metadata
                    .get("params")
                    .and_then(|v| serde_json::from_value::<DyckParams>(v.clone()).ok())
                    .map(|p| p.k)
            });
            validate_shuffle_dyck(seq, k)
        }
        LanguageTag::Mpstruct | LanguageTag::MpstructAblated => {
            validate_mpstruct(seq, &record_params(record, flags.mpstruct()))
        }
        LanguageTag::Core => validate_core_with(seq, &record_params(record, flags.core())),
        LanguageTag::GenericKsd => {
            let mut report = validate_core_with(seq, &record_params(record, flags.core()));
            for (i, tok) in seq.iter().enumerate() {
                if Landmark::parse(tok).is_some() {
                    report.push(Rule::Token, Some(i), format!("landmark {tok} in a landmark-free language"));
                }
            }
            report
        }
        LanguageTag::Perturbed | LanguageTag::Unlabeled => {
            return Err(Error::param(format!("no validator for language {tag}; pass --lang")))
        }
    })
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<i32> {
    let format = infer_format(&args.input, args.format)?;
    let data = fs::read(&args.input)?;
    let records = parse_corpus(&data, format)?;
    let forced: Option<LanguageTag> = args.lang.as_deref().map(str::parse).transpose()?;
    let mut out = open_output(args.report.as_deref())?;
    let mut dirty = 0usize;
    for (i, record) in records.iter().enumerate() {
        let tag = forced.unwrap_or(record.language_tag);
        let report = validate_record(record, tag, &args.params)?;
        if !report.is_clean() {
            dirty += 1;
        }
        for v in &report.violations {
            let line = json!({ "record": i, "rule": v.rule, "index": v.index, "message": v.message });
            writeln!(out, "{line}")?;
        }
    }
    out.flush()?;
    eprintln!("{} records, {} with violations", records.len(), dirty);
    Ok(if dirty == 0 { EXIT_OK } else { EXIT_VIOLATIONS })
}

#[derive(Serialize)]
struct PerturbConfig<'a> {
    transform: &'a str,
    #[serde(flatten)]
    settings: serde_json::Value,
}

/// Writes a tagged document as TSV, or as one record per sentence.
fn write_tagged(doc: &TaggedDocument, format: FormatArg, path: Option<&Path>, config: &PerturbConfig, seed: u64) -> Result<()> {
    let mut out = open_output(path)?;
    if format == FormatArg::Tsv {
        out.write_all(doc.to_tsv().as_bytes())?;
    } else {
        let corpus = format.corpus()?;
        let digest = params_digest(config);
        let mut buf = Vec::new();
        for (i, seq) in doc.to_sequences()?.into_iter().enumerate() {
            let mut record = wrap(seq, LanguageTag::Perturbed, SeedSpec::new(seed, i as u64), &digest);
            record.metadata.insert("transform".into(), config.transform.into());
            write_record(&mut buf, &record, corpus);
        }
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(())
}

fn read_tagged(path: &Path) -> Result<TaggedDocument> {
    TaggedDocument::parse_tsv(&fs::read_to_string(path)?)
}

pub fn cmd_perturb(args: &PerturbArgs) -> Result<i32> {
    let doc = read_tagged(&args.input)?;
    let (name, settings, out) = match args.transform {
        Transform::Shuffle => (
            "shuffle",
            json!({ "window": args.window, "seed": args.seed }),
            deterministic_shuffle(&doc, args.window, args.seed)?,
        ),
        Transform::Reverse => ("reverse", json!({}), full_reverse(&doc)),
        Transform::Hop => {
            let hop = HopParams {
                distance: args.distance,
                marker: args.marker.clone(),
                skip_punct: !args.count_punct,
            };
            let settings = json!({ "distance": hop.distance, "marker": hop.marker, "skip_punct": hop.skip_punct });
            ("hop", settings, word_hop(&doc, &hop)?)
        }
    };
    let config = PerturbConfig { transform: name, settings };
    write_tagged(&out, args.format, args.output.as_deref(), &config, args.seed)?;
    Ok(EXIT_OK)
}

pub fn cmd_jabberwocky(args: &JabberwockyArgs) -> Result<i32> {
    let doc = read_tagged(&args.input)?;
    let out = jabberwocky(&doc, &mut derive_stream(SeedSpec::new(args.seed, 0)), args.batch_sentences)?;
    let config = PerturbConfig {
        transform: "jabberwocky",
        settings: json!({ "seed": args.seed, "batch_sentences": args.batch_sentences }),
    };
    write_tagged(&out, args.format, args.output.as_deref(), &config, args.seed)?;
    Ok(EXIT_OK)
}

pub fn cmd_metrics(args: &MetricsArgs) -> Result<i32> {
    let baseline = LossCurve::parse(&fs::read_to_string(&args.baseline)?)?;
    let candidate = LossCurve::parse(&fs::read_to_string(&args.candidate)?)?;
    let y1 = args.y1.unwrap_or(baseline.last_step() as f64);
    let result = compare(&baseline, &candidate, y1, args.x, args.interpolate)?;
    let mut out = open_output(args.output.as_deref())?;
    writeln!(out, "{}", serde_json::to_string(&result).expect("result encodes"))?;
    out.flush()?;
    Ok(EXIT_OK)
}

pub fn cmd_ambiguity(args: &AmbiguityArgs) -> Result<i32> {
    let format = infer_format(&args.input, args.format)?;
    let records = parse_corpus(&fs::read(&args.input)?, format)?;
    let mut out = open_output(args.output.as_deref())?;
    for (i, record) in records.iter().enumerate() {
        let profile = ambiguity_profile(&record.sequence);
        let mut line = serde_json::to_value(&profile).expect("profile encodes");
        line["record"] = i.into();
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(EXIT_OK)
}
