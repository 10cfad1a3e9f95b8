//! The `permkit` command line.
//!
//! [`run`] parses arguments and returns the exit code with everything that
//! would be written to stdout and stderr, so the binary stays a thin shell.
//! Exit codes: 0 success, 2 input errors, 3 capacity limits.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::calibrate::{mc_calibrate, CalibrationConfig, DataSampler};
use crate::dist::{full_group, parse_distribution, PermDistribution, PermSource, RngStream};
use crate::engine::{randomization_pvalue, MethodSpec};
use crate::error::{Error, Result};
use crate::oracle::{
    exact_e_expectation, exact_p_distribution, fmt_ratio, validity_audit, ExactDistribution,
};
use crate::perm::{
    format_perm_set, generate_subgroup, parse_perm, parse_perm_set, DataVec, Perm,
    DEFAULT_SUBGROUP_CAP,
};
use crate::stats::Statistic;

#[derive(Debug, Parser)]
#[command(
    name = "permkit",
    version,
    about = "Permutation tests over arbitrary permutation sets and distributions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one test on a CSV data file.
    Test(TestArgs),
    /// Estimate rejection rates under an i.i.d. null by simulation.
    Calibrate(CalibrateArgs),
    /// Exact law of a p-value over all arrangements of fixed values.
    Exact(ExactArgs),
    /// Close generators into a subgroup and list it.
    Group(GroupArgs),
    /// Besag–Clifford test with the permutation kernel.
    Bc(BcArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    #[value(alias = "naive")]
    NaiveSubset,
    #[value(alias = "exhaustive-q")]
    CorrectedSubset,
    SampledIid,
    SampledNoreplace,
    Exchangeable,
    PbarExhaustive,
    PbarSampled,
    Evalue,
    Randomization,
    BesagClifford,
}

impl MethodArg {
    fn randomized(self) -> bool {
        !matches!(self, MethodArg::NaiveSubset | MethodArg::PbarExhaustive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    Gaussian,
    Uniform,
}

/// Exactly one permutation source.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Permutation-set file, or `full` for every permutation of n.
    #[arg(long)]
    pub perms: Option<String>,
    /// Distribution file: `weight i1 … in` per line.
    #[arg(long)]
    pub dist: Option<PathBuf>,
    /// Generator file; the source is the generated subgroup.
    #[arg(long)]
    pub generators: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Number of sampled permutations besides the anchor.
    #[arg(long = "M", default_value_t = 1000)]
    pub m: usize,
    /// Backward and forward steps for besag-clifford.
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    /// CSV with header; column `x` required, `y` and `group` optional.
    #[arg(long)]
    pub data: PathBuf,
    /// sum-first-k:K | abs-corr | diff-means[:MASKFILE]
    #[arg(long)]
    pub stat: String,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Realized assignment for `randomization`, e.g. "3 4 1 2".
    #[arg(long)]
    pub assigned: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub out: Format,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub stat: String,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Data length, needed with `--perms full`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Optional CSV supplying the fixed `y` or `group` column.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Comma-separated levels; `a/b` fractions allowed.
    #[arg(long, default_value = "0.01,0.05,0.1,0.2,1/3,0.5,1")]
    pub alphas: String,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, value_enum, default_value_t = SamplerArg::Gaussian)]
    pub sampler: SamplerArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub out: Format,
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    /// Whitespace-separated values, e.g. "1 2 -0.5 0.3".
    #[arg(long, allow_hyphen_values = true, conflicts_with = "data")]
    pub values: Option<String>,
    /// CSV whose `x` column gives the values.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub stat: String,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GroupArgs {
    #[arg(long)]
    pub generators: PathBuf,
    /// Degree, required when the generator file is empty.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SUBGROUP_CAP)]
    pub cap: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BcArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub stat: String,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long = "M", default_value_t = 1000)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub out: Format,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> CliOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CliOutcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                CliOutcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match execute(&cli.command) {
        Ok(stdout) => CliOutcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => CliOutcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

pub fn execute(cmd: &Command) -> Result<String> {
    match cmd {
        Command::Test(a) => run_test(a),
        Command::Calibrate(a) => run_calibrate(a),
        Command::Exact(a) => run_exact(a),
        Command::Group(a) => run_group(a),
        Command::Bc(a) => run_bc(a),
    }
}

/// Echoed into JSON output so a run can be replayed.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    pub stat: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodArg>,
    pub source: String,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assigned: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampler: Option<DataSampler>,
}

#[derive(Serialize)]
struct Echo<'a, T: Serialize> {
    #[serde(flatten)]
    body: T,
    config: &'a RunConfig,
}

fn to_json<T: Serialize>(body: T, config: &RunConfig) -> String {
    let mut s =
        serde_json::to_string_pretty(&Echo { body, config }).expect("reports serialize to JSON");
    s.push('\n');
    s
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

/// Columns of a data file.
#[derive(Debug, Clone, PartialEq)]
pub struct DataColumns {
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub group: Option<Vec<bool>>,
}

fn parse_bool(tok: &str) -> Option<bool> {
    match tok.to_ascii_lowercase().as_str() {
        "1" | "true" | "t" | "yes" => Some(true),
        "0" | "false" | "f" | "no" => Some(false),
        _ => None,
    }
}

pub fn parse_data(text: &str, origin: &str) -> Result<DataColumns> {
    let parse_err = |line: u64, msg: String| Error::Parse {
        origin: origin.to_string(),
        line: line as usize,
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let xi = col("x").ok_or_else(|| parse_err(1, "missing required column `x`".into()))?;
    let (yi, gi) = (col("y"), col("group"));
    let mut out = DataColumns {
        x: Vec::new(),
        y: yi.map(|_| Vec::new()),
        group: gi.map(|_| Vec::new()),
    };
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize, name: &str| -> Result<f64> {
            let tok = rec.get(i).unwrap_or("");
            let v: f64 = tok.parse().map_err(|_| {
                parse_err(line, format!("column `{name}`: `{tok}` is not a number"))
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    line,
                    format!("column `{name}`: non-finite value"),
                ));
            }
            Ok(v)
        };
        out.x.push(num(xi, "x")?);
        if let (Some(i), Some(ys)) = (yi, out.y.as_mut()) {
            ys.push(num(i, "y")?);
        }
        if let (Some(i), Some(gs)) = (gi, out.group.as_mut()) {
            let tok = rec.get(i).unwrap_or("");
            gs.push(parse_bool(tok).ok_or_else(|| {
                parse_err(line, format!("column `group`: `{tok}` is not a boolean"))
            })?);
        }
    }
    if out.x.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }
    Ok(out)
}

fn load_data(path: &Path) -> Result<DataColumns> {
    parse_data(&read_text(path)?, &path.display().to_string())
}

fn parse_mask(text: &str, origin: &str) -> Result<Vec<bool>> {
    let mut mask = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        for tok in raw.split('#').next().unwrap_or("").split([' ', '\t', ',']) {
            if tok.is_empty() {
                continue;
            }
            mask.push(parse_bool(tok).ok_or_else(|| Error::Parse {
                origin: origin.to_string(),
                line: lineno + 1,
                msg: format!("`{tok}` is not a boolean"),
            })?);
        }
    }
    Ok(mask)
}

/// Builds a statistic from its selector, taking side information from the
/// data file when the statistic needs it.
pub fn parse_statistic(spec: &str, data: Option<&DataColumns>) -> Result<Statistic> {
    if let Some(k) = spec.strip_prefix("sum-first-k:") {
        let k: usize = k
            .parse()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| Error::domain(format!("`{k}` is not a positive integer")))?;
        return Ok(Statistic::sum_first_k(k));
    }
    if spec == "abs-corr" {
        let y = data
            .and_then(|d| d.y.clone())
            .ok_or_else(|| Error::domain("abs-corr needs a `y` column in the data file"))?;
        return Ok(Statistic::abs_corr().with_covariate(y));
    }
    if spec == "diff-means" {
        let mask = data
            .and_then(|d| d.group.clone())
            .ok_or_else(|| Error::domain("diff-means needs a `group` column or a mask file"))?;
        return Statistic::diff_means(mask);
    }
    if let Some(path) = spec.strip_prefix("diff-means:") {
        let path = Path::new(path);
        return Statistic::diff_means(parse_mask(&read_text(path)?, &path.display().to_string())?);
    }
    Err(Error::domain(format!(
        "unknown statistic `{spec}` (expected sum-first-k:K, abs-corr or diff-means[:FILE])"
    )))
}

/// Parses `0.05, 1/3, 1` style level lists.
pub fn parse_alphas(text: &str) -> Result<Vec<f64>> {
    let bad = |tok: &str| Error::Parse {
        origin: "--alphas".into(),
        line: 1,
        msg: format!("`{tok}` is not a level"),
    };
    text.split([',', ' '])
        .filter(|t| !t.is_empty())
        .map(|tok| match tok.split_once('/') {
            Some((a, b)) => {
                let a: f64 = a.trim().parse().map_err(|_| bad(tok))?;
                let b: f64 = b.trim().parse().map_err(|_| bad(tok))?;
                Ok(a / b)
            }
            None => tok.parse().map_err(|_| bad(tok)),
        })
        .collect()
}

enum Source {
    Set(Vec<Perm>),
    Dist(PermDistribution),
    Full,
}

impl Source {
    fn load(args: &SourceArgs) -> Result<(Source, String)> {
        if let Some(p) = &args.perms {
            if p == "full" {
                return Ok((Source::Full, "full".into()));
            }
            let set = parse_perm_set(&read_text(Path::new(p))?, p)?;
            if set.is_empty() {
                return Err(Error::Parse {
                    origin: p.clone(),
                    line: 0,
                    msg: "no permutations".into(),
                });
            }
            return Ok((Source::Set(set), format!("perms:{p}")));
        }
        if let Some(p) = &args.dist {
            let origin = p.display().to_string();
            let d = parse_distribution(&read_text(p)?, &origin)?;
            return Ok((Source::Dist(d), format!("dist:{origin}")));
        }
        let p = args
            .generators
            .as_ref()
            .ok_or_else(|| Error::domain("no permutation source"))?;
        let origin = p.display().to_string();
        let gens = parse_perm_set(&read_text(p)?, &origin)?;
        let n = gens.first().map(Perm::n).ok_or_else(|| Error::Parse {
            origin: origin.clone(),
            line: 0,
            msg: "no generators".into(),
        })?;
        let group = generate_subgroup(n, &gens, DEFAULT_SUBGROUP_CAP)?;
        Ok((Source::Set(group), format!("generators:{origin}")))
    }

    fn n(&self) -> Option<usize> {
        match self {
            Source::Set(s) => Some(s[0].n()),
            Source::Dist(d) => Some(d.n()),
            Source::Full => None,
        }
    }

    fn set(&self, n: usize) -> Result<Vec<Perm>> {
        match self {
            Source::Set(s) => Ok(s.clone()),
            Source::Dist(d) => Ok(d.support().to_vec()),
            Source::Full => Ok(full_group(n)?.support().to_vec()),
        }
    }

    fn distribution(&self, n: usize) -> Result<PermDistribution> {
        match self {
            Source::Set(s) => PermDistribution::uniform_on(s),
            Source::Dist(d) => Ok(d.clone()),
            Source::Full => full_group(n),
        }
    }

    fn sampler(&self, n: usize) -> Result<PermSource> {
        match self {
            Source::Full => Ok(PermSource::Symmetric { n }),
            _ => Ok(self.distribution(n)?.into()),
        }
    }

    fn spec(&self, method: MethodArg, n: usize, m: usize, steps: usize) -> Result<MethodSpec> {
        if let Some(k) = self.n() {
            Error::check_len(n, k)?;
        }
        Ok(match method {
            MethodArg::NaiveSubset => MethodSpec::Naive { set: self.set(n)? },
            MethodArg::CorrectedSubset => MethodSpec::Exhaustive {
                q: self.distribution(n)?,
            },
            MethodArg::SampledIid => MethodSpec::SampledIid {
                source: self.sampler(n)?,
                m,
            },
            MethodArg::SampledNoreplace => MethodSpec::SampledNoReplace {
                source: self.sampler(n)?,
                m,
            },
            MethodArg::Exchangeable => MethodSpec::Exchangeable { base: self.set(n)? },
            MethodArg::PbarExhaustive => MethodSpec::PbarExhaustive {
                q: self.distribution(n)?,
            },
            MethodArg::PbarSampled => MethodSpec::PbarSampled {
                source: self.sampler(n)?,
                m,
            },
            MethodArg::Evalue => MethodSpec::Evalue {
                source: self.sampler(n)?,
                m,
            },
            MethodArg::Randomization => MethodSpec::Randomization { set: self.set(n)? },
            MethodArg::BesagClifford => MethodSpec::BesagClifford {
                q: self.distribution(n)?,
                m,
                steps,
            },
        })
    }
}

fn require_seed(method: MethodArg, seed: Option<u64>) -> Result<u64> {
    match (method.randomized(), seed) {
        (_, Some(s)) => Ok(s),
        (false, None) => Ok(0),
        (true, None) => Err(Error::domain(format!(
            "method `{}` is randomized and needs --seed",
            method
                .to_possible_value()
                .expect("no skipped variants")
                .get_name()
        ))),
    }
}

fn report_csv(r: &crate::engine::TestReport) -> String {
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut s = String::from("method,p_value,e_value,statistic,statistic_value,n,M,seed,anchor\n");
    writeln!(
        s,
        "{},{},{},{},{},{},{},{},{}",
        r.method.as_str(),
        opt(r.p_value),
        opt(r.e_value),
        r.statistic,
        r.statistic_value,
        r.n,
        r.m,
        r.seed.map(|v| v.to_string()).unwrap_or_default(),
        r.anchor.as_ref().map(|a| a.to_string()).unwrap_or_default(),
    )
    .expect("writing to a String");
    s
}

fn run_test(a: &TestArgs) -> Result<String> {
    let data = load_data(&a.data)?;
    let stat = parse_statistic(&a.stat, Some(&data))?;
    let (source, source_desc) = Source::load(&a.method.source)?;
    let n = data.x.len();
    let spec = source.spec(a.method.method, n, a.method.m, a.method.steps)?;
    let x = DataVec::new(data.x);
    let report = match (&a.assigned, &spec) {
        (Some(asg), MethodSpec::Randomization { set }) => {
            let asg = parse_perm(asg).map_err(|e| Error::Parse {
                origin: "--assigned".into(),
                line: 1,
                msg: e.to_string(),
            })?;
            randomization_pvalue(&asg, &x, &stat, set)?
        }
        (Some(_), _) => return Err(Error::domain("--assigned only applies to randomization")),
        (None, _) => {
            let seed = require_seed(a.method.method, a.method.seed)?;
            spec.run(&x, &stat, &mut RngStream::new(seed, 0))?
        }
    };
    let config = RunConfig {
        subcommand: "test",
        data: Some(a.data.display().to_string()),
        stat: a.stat.clone(),
        method: Some(a.method.method),
        source: source_desc,
        m: Some(report.m),
        steps: report.steps,
        seed: a.method.seed,
        assigned: a.assigned.clone(),
        ..RunConfig::default()
    };
    Ok(match a.out {
        Format::Json => to_json(&report, &config),
        Format::Csv => report_csv(&report),
    })
}

fn run_bc(a: &BcArgs) -> Result<String> {
    let data = load_data(&a.data)?;
    let stat = parse_statistic(&a.stat, Some(&data))?;
    let (source, source_desc) = Source::load(&a.source)?;
    let n = data.x.len();
    let spec = source.spec(MethodArg::BesagClifford, n, a.m, a.steps)?;
    let report = spec.run(&DataVec::new(data.x), &stat, &mut RngStream::new(a.seed, 0))?;
    let config = RunConfig {
        subcommand: "bc",
        data: Some(a.data.display().to_string()),
        stat: a.stat.clone(),
        method: Some(MethodArg::BesagClifford),
        source: source_desc,
        m: Some(a.m),
        steps: Some(a.steps),
        seed: Some(a.seed),
        ..RunConfig::default()
    };
    Ok(match a.out {
        Format::Json => to_json(&report, &config),
        Format::Csv => report_csv(&report),
    })
}

fn run_calibrate(a: &CalibrateArgs) -> Result<String> {
    let data = a.data.as_deref().map(load_data).transpose()?;
    let stat = parse_statistic(&a.stat, data.as_ref())?;
    let seed = a
        .method
        .seed
        .ok_or_else(|| Error::domain("calibrate needs --seed"))?;
    let (source, source_desc) = Source::load(&a.method.source)?;
    let n = source
        .n()
        .or(a.n)
        .or(data.as_ref().map(|d| d.x.len()))
        .ok_or_else(|| Error::domain("--perms full needs --n"))?;
    if let Some(d) = &data {
        Error::check_len(n, d.x.len())?;
    }
    let spec = source.spec(a.method.method, n, a.method.m, a.method.steps)?;
    let alphas = parse_alphas(&a.alphas)?;
    let sampler = match a.sampler {
        SamplerArg::Gaussian => DataSampler::Gaussian,
        SamplerArg::Uniform => DataSampler::Uniform,
    };
    let curve = mc_calibrate(&CalibrationConfig {
        method: spec,
        stat,
        sampler,
        alphas: alphas.clone(),
        reps: a.reps,
        seed,
    })?;
    Ok(match a.out {
        Format::Csv => curve.to_csv(),
        Format::Json => {
            let config = RunConfig {
                subcommand: "calibrate",
                data: a.data.as_ref().map(|p| p.display().to_string()),
                stat: a.stat.clone(),
                method: Some(a.method.method),
                source: source_desc,
                m: Some(a.method.m),
                steps: Some(a.method.steps),
                seed: Some(seed),
                alphas: Some(alphas),
                reps: Some(a.reps),
                sampler: Some(sampler),
                ..RunConfig::default()
            };
            to_json(&curve, &config)
        }
    })
}

/// Atoms as an ordered JSON object of `"num/den"` strings.
struct AtomMap<'a>(&'a ExactDistribution);

impl Serialize for AtomMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let atoms = self.0.atoms();
        let mut map = s.serialize_map(Some(atoms.len()))?;
        for (v, p) in atoms {
            map.serialize_entry(&fmt_ratio(v), &fmt_ratio(p))?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct AuditOut {
    factor: u32,
    pass: bool,
    worst_alpha: String,
    worst_cdf: String,
    violations: Vec<[String; 2]>,
}

#[derive(Serialize)]
struct ExactOut<'a> {
    method: &'static str,
    statistic: String,
    n: usize,
    atoms: AtomMap<'a>,
    audit: AuditOut,
}

#[derive(Serialize)]
struct ExpectationOut {
    method: &'static str,
    statistic: String,
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    expectation: f64,
}

fn run_exact(a: &ExactArgs) -> Result<String> {
    let data = a.data.as_deref().map(load_data).transpose()?;
    let values: Vec<f64> = match (&a.values, &data) {
        (Some(v), _) => v
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        origin: "--values".into(),
                        line: 1,
                        msg: format!("`{t}` is not a number"),
                    })
            })
            .collect::<Result<_>>()?,
        (None, Some(d)) => d.x.clone(),
        (None, None) => return Err(Error::domain("exact needs --values or --data")),
    };
    let stat = parse_statistic(&a.stat, data.as_ref())?;
    let (source, source_desc) = Source::load(&a.method.source)?;
    let n = values.len();
    let spec = source.spec(a.method.method, n, a.method.m, a.method.steps)?;
    let config = RunConfig {
        subcommand: "exact",
        data: a.data.as_ref().map(|p| p.display().to_string()),
        values: Some(values.clone()),
        stat: a.stat.clone(),
        method: Some(a.method.method),
        source: source_desc,
        m: Some(a.method.m),
        steps: Some(a.method.steps),
        ..RunConfig::default()
    };
    if let MethodSpec::Evalue { source, m } = &spec {
        let q = source
            .as_finite()
            .ok_or_else(|| Error::domain("exact e-value needs an explicit distribution"))?;
        let expectation = exact_e_expectation(&values, &stat, q, *m)?;
        let out = ExpectationOut {
            method: spec.method().as_str(),
            statistic: stat.name().to_string(),
            n,
            m: *m,
            expectation,
        };
        return Ok(to_json(out, &config));
    }
    let dist = exact_p_distribution(&values, &stat, &spec)?;
    let audit = validity_audit(&dist, spec.validity_factor().unwrap_or(1));
    let out = ExactOut {
        method: spec.method().as_str(),
        statistic: stat.name().to_string(),
        n,
        atoms: AtomMap(&dist),
        audit: AuditOut {
            factor: audit.factor,
            pass: audit.pass,
            worst_alpha: fmt_ratio(&audit.worst_alpha),
            worst_cdf: fmt_ratio(&audit.worst_cdf),
            violations: audit
                .violations
                .iter()
                .map(|(a, c)| [fmt_ratio(a), fmt_ratio(c)])
                .collect(),
        },
    };
    Ok(to_json(out, &config))
}

fn run_group(a: &GroupArgs) -> Result<String> {
    let origin = a.generators.display().to_string();
    let gens = parse_perm_set(&read_text(&a.generators)?, &origin)?;
    let n = match (gens.first().map(Perm::n), a.n) {
        (Some(k), Some(n)) => {
            Error::check_len(n, k)?;
            n
        }
        (Some(k), None) => k,
        (None, Some(n)) => n,
        (None, None) => return Err(Error::domain("empty generator file needs --n")),
    };
    Ok(format_perm_set(&generate_subgroup(n, &gens, a.cap)?))
}
