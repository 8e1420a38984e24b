//! Command-line pipelines: configuration, staged reports and exit codes.
//!
//! Exit codes: 0 all checks pass, 2 usage or I/O error, 3 invalid growth
//! sequence, 4 a paper-backed check failed, 5 precision ceiling reached.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::basis::{partition_check, Basis};
use crate::certify::{certify_nuclear, check_column_norms};
use crate::error::{Error, Result};
use crate::growth::{generate_rapid, DFile, GrowthSequence};
use crate::operator::{t_column_closed, tneg_rows_closed, truncate, Part, TruncatedOperator};
use crate::scalars::{approx, ExactSum, DEFAULT_EVAL_BITS, MAX_COMPARE_BITS};
use crate::spectral::{
    irreducibility_check, power_iteration, power_norm_sequence, tminus_eigenvector_check, without_row_zero,
    write_eigenvector_csv, write_powers_csv, Triplets, WITNESS,
};
use crate::verdict::Verdict;

pub const SCHEMA_VERSION: u32 = 1;
pub const MAX_BITS_ENV: &str = "READOP_MAX_BITS";
pub const EVAL_BITS_ENV: &str = "READOP_EVAL_BITS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_FAILED: i32 = 4;
pub const EXIT_PRECISION: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "readop", version, about = "Exact construction and certification of a positive operator without invariant ideals")]
pub struct Cli {
    /// Precision ceiling for exact comparisons, in bits.
    #[arg(long, global = true, env = MAX_BITS_ENV, default_value_t = MAX_COMPARE_BITS)]
    pub max_bits: u32,
    /// Precision used when entries are rounded to floats, in bits.
    #[arg(long, global = true, env = EVAL_BITS_ENV, default_value_t = DEFAULT_EVAL_BITS)]
    pub eval_bits: u32,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a rapidly increasing growth sequence.
    GenD {
        #[arg(long)]
        levels: usize,
        /// Lower bound for a_1.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact structural checks on a truncation.
    #[command(group(clap::ArgGroup::new("source").required(true).multiple(false)))]
    Verify {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        size: SizeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Nuclear-norm certificate and column norms.
    #[command(group(clap::ArgGroup::new("source").required(true).multiple(false)))]
    Certify {
        #[command(flatten)]
        source: SourceArgs,
        /// Materialized levels, `n_max` (default: all).
        #[arg(long = "levels")]
        n_max: Option<usize>,
        /// Largest column for the column-norm report (default: min(v_L - 1, 5000)).
        #[arg(long)]
        columns: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Perron witness, power norms and irreducibility of one part.
    #[command(group(clap::ArgGroup::new("source").required(true).multiple(false)))]
    Spectrum {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        size: SizeArgs,
        /// T, T+, T- or |T| (also plus, minus, modulus).
        #[arg(long, default_value = "modulus")]
        which: Part,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Largest power for the norm sequence.
        #[arg(long, default_value_t = 64)]
        powers: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Merge stage reports into one.
    Report {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Growth sequence file.
    #[arg(long, group = "source")]
    pub d: Option<PathBuf>,
    /// Generate this many levels instead of reading a file.
    #[arg(long, group = "source")]
    pub generate: Option<usize>,
    /// Lower bound for a_1 when generating.
    #[arg(long, conflicts_with = "d")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct SizeArgs {
    /// Truncate at the block boundary `N = v_m`.
    #[arg(long)]
    pub block: Option<usize>,
    /// Truncate at a raw index `N`.
    #[arg(long = "n")]
    pub n: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Record wall-clock time per stage (reports are then not reproducible).
    #[arg(long)]
    pub timings: bool,
}

/// Where the growth sequence comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DSource {
    File(PathBuf),
    Generate { levels: usize, seed: Option<u64> },
}

/// Truncation size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Size {
    Block(usize),
    N(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub source: DSource,
    pub size: Option<Size>,
    pub eval_bits: u32,
    pub max_bits: u32,
    pub tol: f64,
    pub max_iter: usize,
    pub powers: usize,
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub timings: bool,
}

impl RunConfig {
    pub fn new(source: DSource, size: Option<Size>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            source,
            size,
            eval_bits: DEFAULT_EVAL_BITS,
            max_bits: MAX_COMPARE_BITS,
            tol: 1e-13,
            max_iter: 100_000,
            powers: 64,
            out_dir: out_dir.into(),
            timings: false,
        }
    }

    fn from_args(cli: &Cli, source: &SourceArgs, size: Option<&SizeArgs>, output: &OutputArgs) -> Self {
        let source = match (&source.d, source.generate) {
            (Some(p), _) => DSource::File(p.clone()),
            (None, Some(levels)) => DSource::Generate { levels, seed: source.seed },
            (None, None) => unreachable!("clap requires a source"),
        };
        let size = size.map(|s| match (s.block, s.n) {
            (Some(m), _) => Size::Block(m),
            (None, Some(n)) => Size::N(n),
            (None, None) => unreachable!("clap requires a size"),
        });
        let mut c = RunConfig::new(source, size, &output.out_dir);
        c.eval_bits = cli.eval_bits;
        c.max_bits = cli.max_bits;
        c.timings = output.timings;
        c
    }
}

/// One executed stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub verdict: Verdict,
    /// Whether a failure contradicts a claim of the construction (and so
    /// makes the run fail) rather than being informational.
    pub paper_backed: bool,
    pub summary: String,
    pub details: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    /// The sequence the stages ran on, after any extension.
    pub sequence: DFile,
    /// A minimal level was appended so that column `N` is constructible.
    pub extended: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    pub stages: Vec<Stage>,
    pub artifacts: Vec<String>,
    pub exit_code: i32,
}

impl RunReport {
    fn new(command: &str, config: &RunConfig, d: &GrowthSequence) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            // the output directory is not part of the echo, so reports from
            // different directories compare equal
            config: RunConfig {
                out_dir: PathBuf::new(),
                ..config.clone()
            },
            sequence: d.to_json(),
            extended: false,
            n: None,
            stages: Vec::new(),
            artifacts: Vec::new(),
            exit_code: EXIT_OK,
        }
    }

    pub fn stage(&self, name: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.name == name)
    }

    /// Exit code implied by the paper-backed stages.
    pub fn verdict_exit_code(&self) -> i32 {
        let mut code = EXIT_OK;
        for s in self.stages.iter().filter(|s| s.paper_backed) {
            match s.verdict {
                Verdict::Fail => return EXIT_FAILED,
                Verdict::Unknown => code = EXIT_PRECISION,
                Verdict::Pass => {}
            }
        }
        code
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: RunReport = serde_json::from_str(s)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported report schema {}", r.schema_version)));
        }
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Validates by reloading, then writes.
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = self.to_json()?;
        if RunReport::from_json(&text)? != *self {
            return Err(Error::Parse("report does not survive a reload".into()));
        }
        std::fs::write(path, text)?;
        Ok(())
    }

    fn print(&self) {
        for s in &self.stages {
            let tag = if s.paper_backed { "" } else { " (info)" };
            println!("{:<28} {:<8} {}{tag}", s.name, format!("{:?}", s.verdict).to_lowercase(), s.summary);
        }
    }
}

/// Records a stage, timing it when asked.
struct Stages<'a> {
    report: &'a mut RunReport,
    timings: bool,
}

impl Stages<'_> {
    fn run(&mut self, name: &str, paper_backed: bool, f: impl FnOnce() -> Result<(Verdict, String, Value)>) -> Result<Verdict> {
        let t = Instant::now();
        let (verdict, summary, details) = f()?;
        self.report.stages.push(Stage {
            name: name.into(),
            verdict,
            paper_backed,
            summary,
            details,
            seconds: self.timings.then(|| t.elapsed().as_secs_f64()),
        });
        Ok(verdict)
    }
}

pub fn load_sequence(source: &DSource, max_bits: u32) -> Result<GrowthSequence> {
    match source {
        DSource::File(p) => {
            let d = GrowthSequence::load(p)?;
            d.require_structural()?;
            Ok(d)
        }
        DSource::Generate { levels, seed } => generate_rapid(*levels, *seed, max_bits),
    }
}

/// Resolved truncation: the sequence to build on, `N`, whether a level was
/// appended and whether `N` is a block boundary.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub d: GrowthSequence,
    pub n: u64,
    pub extended: bool,
    pub block: bool,
}

/// Turns `--block m` or `--n N` into `N`. Column `N` needs the level after
/// `N`, so when `N = v_L` the smallest valid level is appended.
pub fn resolve_size(d: &GrowthSequence, size: Size) -> Result<Resolved> {
    let l = d.levels();
    let n = match size {
        Size::Block(m) if (1..=l).contains(&m) => d
            .v_u64(m)
            .ok_or_else(|| Error::Usage(format!("v_{m} does not fit in 64 bits")))?,
        Size::Block(m) => return Err(Error::Usage(format!("block must lie in 1..={l}, got {m}"))),
        Size::N(n) => n,
    };
    let limit = d.max_index().unwrap_or(u64::MAX);
    let (d, extended) = if n >= limit { (d.extend_minimal(), true) } else { (d.clone(), false) };
    if n >= d.max_index().unwrap_or(u64::MAX) {
        return Err(Error::Usage(format!("N = {n} is beyond v_L = {limit}")));
    }
    let block = (1..=l).any(|m| d.v_u64(m) == Some(n));
    Ok(Resolved { d, n, extended, block })
}

fn mismatch_summary(bad: &[u64], total: u64, what: &str) -> (Verdict, String, Value) {
    let v = Verdict::from_bool(bad.is_empty());
    let s = if bad.is_empty() {
        format!("{total} {what} checked")
    } else {
        format!("{} of {total} {what} fail, first {}", bad.len(), bad[0])
    };
    (v, s, json!({ "checked": total, "failures": bad }))
}

/// Negative entries of the built truncation against the closed families,
/// split by whether the column's level is generic.
fn tminus_support(op: &TruncatedOperator, d: &GrowthSequence, max_bits: u32) -> Result<[(Verdict, String, Value); 2]> {
    let n = op.n();
    let top = d.level_of(n).unwrap_or(d.levels()).min(d.levels());
    let rows = tneg_rows_closed(d, top, max_bits)?;
    let mut closed: BTreeMap<(u64, u64), ExactSum> = BTreeMap::new();
    for r in rows.values() {
        for e in &r.entries {
            if let (Some(row), Some(col)) = (r.row.to_u64(), e.col.to_u64()) {
                if col <= n && row <= n {
                    closed.insert((row, col), ExactSum::from(e.value.clone()));
                }
            }
        }
    }
    let actual: BTreeMap<(u64, u64), ExactSum> = op.entries(Part::Minus).map(|(k, i, v)| ((k, i), v.clone())).collect();
    let degenerate = d.degenerate_levels();
    let mut out: [(Vec<String>, usize); 2] = [(Vec::new(), 0), (Vec::new(), 0)];
    let keys: std::collections::BTreeSet<(u64, u64)> = closed.keys().chain(actual.keys()).copied().collect();
    for (row, col) in keys {
        let lvl = d.level_of(col).unwrap_or(0);
        let slot = &mut out[degenerate.contains(&lvl) as usize];
        slot.1 += 1;
        match (actual.get(&(row, col)), closed.get(&(row, col))) {
            (Some(a), Some(c)) if a.value_eq(c) => {}
            (Some(a), Some(c)) => slot.0.push(format!("({row}, {col}): {} vs closed {}", approx(a), approx(c))),
            (Some(a), None) => slot.0.push(format!("({row}, {col}): {} not in the closed families", approx(a))),
            (None, Some(c)) => slot.0.push(format!("({row}, {col}): closed value {} missing", approx(c))),
            (None, None) => unreachable!(),
        }
    }
    let make = |(bad, total): &(Vec<String>, usize), note: &str| {
        let verdict = Verdict::from_bool(bad.is_empty());
        let summary = if bad.is_empty() {
            format!("{total} entries match{note}")
        } else {
            format!("{} of {total} entries differ{note}", bad.len())
        };
        (verdict, summary, json!({ "entries": total, "mismatches": bad, "degenerate_levels": degenerate }))
    };
    Ok([make(&out[0], ""), make(&out[1], " on degenerate levels")])
}

pub fn cmd_verify(config: &RunConfig) -> Result<RunReport> {
    let size = config.size.ok_or_else(|| Error::Usage("verify needs --block or --n".into()))?;
    let d0 = load_sequence(&config.source, config.max_bits)?;
    let res = resolve_size(&d0, size)?;
    if !res.block {
        eprintln!("warning: N = {} is not a block boundary; truncation artifacts are likely", res.n);
    }
    let (d, n, bits) = (res.d.clone(), res.n, config.max_bits);
    let mut report = RunReport::new("verify", config, &d);
    report.extended = res.extended;
    report.n = Some(n);
    let basis = Basis::new(d.clone());
    let mut st = Stages { report: &mut report, timings: config.timings };

    st.run("structural", true, || {
        let r = d0.validate_structural();
        Ok((r.overall, format!("{} levels", d0.levels()), serde_json::to_value(&r)?))
    })?;
    st.run("genericity", false, || {
        let deg = d.degenerate_levels();
        let s = if deg.is_empty() { "all levels generic".into() } else { format!("degenerate levels {deg:?}") };
        Ok((Verdict::from_bool(deg.is_empty()), s, json!({ "degenerate_levels": deg })))
    })?;
    st.run("partition", true, || {
        partition_check(&d, n)?;
        Ok((Verdict::Pass, format!("indices 1..={n} each in one clause"), json!({ "i_max": n })))
    })?;
    st.run("round_trip", true, || {
        let bad: Vec<u64> = (0..=n)
            .into_par_iter()
            .map(|i| basis.f_in_e_roundtrip(i).map(|r| (i, r.ok)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|(_, ok)| !ok)
            .map(|(i, _)| i)
            .collect();
        Ok(mismatch_summary(&bad, n + 1, "indices"))
    })?;
    let op = truncate(&basis, n, bits)?;
    st.run("oracle_equivalence", true, || {
        let bad: Vec<u64> = (0..=n)
            .into_par_iter()
            .map(|i| {
                let c = t_column_closed(&basis, i)?;
                let o = &op.part(Part::T)[i as usize];
                Ok((i, c.truncated(n).value_eq(o)))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|(_, ok)| !ok)
            .map(|(i, _)| i)
            .collect();
        Ok(mismatch_summary(&bad, n + 1, "columns"))
    })?;
    st.run("matrix_structure", true, || {
        let s = op.structure();
        let v = s.hessenberg.and(s.subdiagonal_positive).and(s.lattice);
        let summary = format!(
            "hessenberg {:?}, subdiagonal {:?}, lattice {:?}",
            s.hessenberg, s.subdiagonal_positive, s.lattice
        )
        .to_lowercase();
        Ok((v, summary, json!({ "structure": s, "flagged_columns": op.flagged() })))
    })?;
    let [generic, degenerate] = tminus_support(&op, &d, bits)?;
    st.run("tminus_support", true, || Ok(generic))?;
    if !d.is_generic() {
        st.run("tminus_support_degenerate", false, || Ok(degenerate))?;
    }
    st.run("tminus_eigenvector", true, || {
        let ok = tminus_eigenvector_check(&basis)?;
        Ok((Verdict::from_bool(ok), "column 0 of T- is empty".into(), Value::Null))
    })?;
    st.run("rapidity", false, || {
        let r = d0.check_rapidity(bits);
        let fails: Vec<String> = r.failures().map(|f| format!("{} n={}{}", f.name, f.n, f.r.map(|r| format!(" r={r}")).unwrap_or_default())).collect();
        let s = if fails.is_empty() { "R1 and R2 hold".into() } else { format!("violated: {}", fails.join(", ")) };
        Ok((r.overall, s, json!({ "violations": fails })))
    })?;

    report.artifacts.push("verify.json".into());
    report.exit_code = report.verdict_exit_code();
    Ok(report)
}

pub fn cmd_certify(config: &RunConfig, n_max: Option<usize>, columns: Option<u64>) -> Result<RunReport> {
    let d = load_sequence(&config.source, config.max_bits)?;
    let n_max = n_max.unwrap_or(d.levels());
    let mut report = RunReport::new("certify", config, &d);
    let mut st = Stages { report: &mut report, timings: config.timings };
    let mut cert = None;
    st.run("nuclear_certificate", true, || {
        let c = certify_nuclear(&d, n_max, config.max_bits)?;
        let (lo, hi) = c.total_enclosure.to_decimal_strings();
        let mut summary = format!("total in [{}, {}] vs 2, {}", short(&lo), short(&hi), c.stamp);
        if let Some(first) = c.notes.iter().find(|n| n.contains("violated")) {
            summary = format!("{first}; {summary}");
        }
        let details = json!({
            "bound_verdict": c.bound_verdict,
            "rapidity": c.rapidity.overall,
            "notes": c.notes,
            "file": "nuclear_certificate.json",
        });
        let v = c.verdict;
        cert = Some(c);
        Ok((v, summary, details))
    })?;
    let i_max = columns.unwrap_or_else(|| d.max_index().unwrap_or(u64::MAX).saturating_sub(1).min(5000));
    let basis = Basis::new(d.clone());
    let mut norms = None;
    st.run("column_norms", false, || {
        let r = check_column_norms(&basis, i_max, config.max_bits)?;
        let worst = &r.columns[r.worst as usize];
        let summary = format!(
            "{} of {} columns exceed 1, worst column {} in {}",
            r.failures.len(),
            r.columns.len(),
            r.worst,
            worst.enclosure
        );
        let details = json!({ "i_max": i_max, "failures": r.failures.len(), "worst": r.worst, "file": "column_norms.json" });
        let v = r.overall;
        norms = Some(r);
        Ok((v, summary, details))
    })?;
    std::fs::create_dir_all(&config.out_dir)?;
    let cert = cert.unwrap();
    write_validated(&config.out_dir.join("nuclear_certificate.json"), &cert.to_json()?, |s| {
        Ok(crate::certify::NuclearCertificate::from_json(s)? == cert)
    })?;
    let norms = norms.unwrap();
    write_validated(&config.out_dir.join("column_norms.json"), &norms.to_json()?, |s| {
        Ok(crate::certify::ColumnNormReport::from_json(s)? == norms)
    })?;
    report.artifacts = vec!["certify.json".into(), "nuclear_certificate.json".into(), "column_norms.json".into()];
    report.exit_code = report.verdict_exit_code();
    Ok(report)
}

fn short(s: &str) -> String {
    s.chars().take(14).collect()
}

fn write_validated(path: &Path, text: &str, check: impl FnOnce(&str) -> Result<bool>) -> Result<()> {
    if !check(text)? {
        return Err(Error::Parse(format!("{} does not survive a reload", path.display())));
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn cmd_spectrum(config: &RunConfig, which: Part) -> Result<RunReport> {
    let size = config.size.ok_or_else(|| Error::Usage("spectrum needs --block or --n".into()))?;
    let d0 = load_sequence(&config.source, config.max_bits)?;
    let res = resolve_size(&d0, size)?;
    if !res.block {
        eprintln!("warning: N = {} is not a block boundary; truncation artifacts are likely", res.n);
    }
    let basis = Basis::new(res.d.clone());
    let op = truncate(&basis, res.n, config.max_bits)?;
    let m = Triplets::from_operator(&op, which, config.eval_bits);
    let mut report = RunReport::new("spectrum", config, &res.d);
    report.extended = res.extended;
    report.n = Some(res.n);
    // the Perron and connectivity claims concern |T| and T+ at block boundaries
    let claimed = matches!(which, Part::Modulus | Part::Plus) && res.block;
    let slug = which.slug();
    std::fs::create_dir_all(&config.out_dir)?;
    let mut artifacts = vec![format!("spectrum_{slug}.json")];
    let mut st = Stages { report: &mut report, timings: config.timings };

    match which {
        Part::Modulus | Part::Plus => {
            let mut eigen = None;
            st.run("perron", claimed, || {
                let r = power_iteration(&m, which, config.tol, config.max_iter, config.eval_bits)?;
                let ok = r.converged && r.eigenvalue > 0.0 && r.residual < 1e-8;
                let s = format!(
                    "{WITNESS}: lambda {:.12}, residual {:.3e}, {} iterations",
                    r.eigenvalue, r.residual, r.iterations
                );
                let v = serde_json::to_value(&r)?;
                eigen = Some(r);
                Ok((Verdict::from_bool(ok), s, v))
            })?;
            let eigen = eigen.unwrap();
            let name = format!("eigenvector_{slug}.csv");
            write_eigenvector_csv(&eigen, std::fs::File::create(config.out_dir.join(&name))?)?;
            artifacts.push(name);
        }
        Part::Minus => {
            st.run("tminus_eigenvector", true, || {
                let ok = tminus_eigenvector_check(&basis)?;
                Ok((Verdict::from_bool(ok), format!("{WITNESS}: T- f_0 = 0, eigenpair (0, f_0)"), Value::Null))
            })?;
            st.run("perron", false, || match power_iteration(&m, which, config.tol, config.max_iter, config.eval_bits) {
                Err(Error::ZeroImage) => Ok((Verdict::Pass, "iterates vanish: nilpotent truncation".into(), Value::Null)),
                Err(e) => Err(e),
                Ok(r) => Ok((
                    Verdict::Pass,
                    format!("{WITNESS}: lambda {:.3e}", r.eigenvalue),
                    serde_json::to_value(&r)?,
                )),
            })?;
        }
        Part::T => {}
    }
    let pattern = m.pattern();
    st.run("irreducibility", claimed, || {
        let r = irreducibility_check(&pattern, m.dim);
        let s = format!(
            "strongly connected {}, {} components, row-0 columns {:?}",
            r.strongly_connected,
            r.scc_sizes.len(),
            r.row0_columns
        );
        Ok((Verdict::from_bool(r.strongly_connected), s, serde_json::to_value(&r)?))
    })?;
    if matches!(which, Part::Modulus | Part::Plus) {
        st.run("row0_control", claimed, || {
            let r = irreducibility_check(&without_row_zero(&pattern), m.dim);
            let s = format!("without row 0: strongly connected {}", r.strongly_connected);
            Ok((Verdict::from_bool(!r.strongly_connected), s, serde_json::to_value(&r)?))
        })?;
    }
    let roots = power_norm_sequence(&m, config.powers.max(1));
    st.run("power_norms", false, || {
        let last = *roots.last().unwrap();
        Ok((Verdict::Pass, format!("||M^k||^(1/k) at k = {}: {last:.6}", roots.len()), json!(roots)))
    })?;
    let name = format!("powers_{slug}.csv");
    write_powers_csv(&roots, std::fs::File::create(config.out_dir.join(&name))?)?;
    artifacts.push(name);

    report.artifacts = artifacts;
    report.exit_code = report.verdict_exit_code();
    Ok(report)
}

/// Several stage reports in one file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergedReport {
    pub schema_version: u32,
    pub reports: Vec<RunReport>,
    pub overall: Verdict,
    pub exit_code: i32,
}

pub fn cmd_report(inputs: &[PathBuf], out: &Path) -> Result<MergedReport> {
    let reports = inputs.iter().map(|p| RunReport::load(p)).collect::<Result<Vec<_>>>()?;
    let exit_code = reports.iter().map(|r| r.verdict_exit_code()).max().unwrap_or(EXIT_OK);
    let overall = Verdict::all(reports.iter().flat_map(|r| r.stages.iter().filter(|s| s.paper_backed).map(|s| s.verdict)));
    let merged = MergedReport {
        schema_version: SCHEMA_VERSION,
        reports,
        overall,
        exit_code,
    };
    let mut text = serde_json::to_string_pretty(&merged)?;
    text.push('\n');
    write_validated(out, &text, |s| Ok(serde_json::from_str::<MergedReport>(s)? == merged))?;
    Ok(merged)
}

fn save_report(report: &RunReport, dir: &Path, name: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    report.save(&dir.join(name))
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::GenD { levels, seed, out } => {
            let d = generate_rapid(*levels, *seed, cli.max_bits)?;
            let audit = d.check_rapidity(cli.max_bits);
            println!("d = {d}");
            for c in audit.r1.iter().chain(&audit.r2) {
                let r = c.r.map(|r| format!(" r={r}")).unwrap_or_default();
                println!("{} n={}{r}: log2 lhs {} <= log2 rhs {}  {:?}", c.name, c.n, c.log2_lhs, c.log2_rhs, c.verdict);
            }
            match out {
                Some(p) => d.save(p)?,
                None => print!("{}", serde_json::to_string_pretty(&d.to_json())? + "\n"),
            }
            Ok(match audit.overall {
                Verdict::Pass => EXIT_OK,
                Verdict::Fail => EXIT_FAILED,
                Verdict::Unknown => EXIT_PRECISION,
            })
        }
        Command::Verify { source, size, output } => {
            let config = RunConfig::from_args(cli, source, Some(size), output);
            let r = cmd_verify(&config)?;
            r.print();
            save_report(&r, &config.out_dir, "verify.json")?;
            Ok(r.exit_code)
        }
        Command::Certify {
            source,
            n_max,
            columns,
            output,
        } => {
            let config = RunConfig::from_args(cli, source, None, output);
            let r = cmd_certify(&config, *n_max, *columns)?;
            r.print();
            save_report(&r, &config.out_dir, "certify.json")?;
            Ok(r.exit_code)
        }
        Command::Spectrum {
            source,
            size,
            which,
            tol,
            max_iter,
            powers,
            output,
        } => {
            let mut config = RunConfig::from_args(cli, source, Some(size), output);
            config.tol = *tol;
            config.max_iter = *max_iter;
            config.powers = *powers;
            let r = cmd_spectrum(&config, *which)?;
            r.print();
            save_report(&r, &config.out_dir, &format!("spectrum_{}.json", which.slug()))?;
            Ok(r.exit_code)
        }
        Command::Report { out, inputs } => {
            let m = cmd_report(inputs, out)?;
            for r in &m.reports {
                println!("== {}", r.command);
                r.print();
            }
            println!("overall {:?}", m.overall);
            Ok(m.exit_code)
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GrowthSequence {
        GrowthSequence::from_interleaved(&[2, 3, 6, 7]).unwrap()
    }

    #[test]
    fn block_resolution() {
        let r = resolve_size(&small(), Size::Block(1)).unwrap();
        assert_eq!((r.n, r.extended, r.block), (5, false, true));
        let r = resolve_size(&small(), Size::Block(2)).unwrap();
        assert_eq!((r.n, r.extended, r.block), (26, true, true));
        assert_eq!(r.d.levels(), 3);
        let r = resolve_size(&small(), Size::N(7)).unwrap();
        assert!(!r.block);
        assert!(matches!(resolve_size(&small(), Size::Block(3)), Err(Error::Usage(_))));
        assert!(matches!(resolve_size(&small(), Size::N(1000)), Err(Error::Usage(_))));
    }

    #[test]
    fn arguments_parse() {
        let c = Cli::try_parse_from(["readop", "spectrum", "--d", "x.json", "--block", "1", "--which", "T+"]).unwrap();
        assert!(matches!(c.command, Command::Spectrum { which: Part::Plus, .. }));
        assert!(Cli::try_parse_from(["readop", "verify", "--d", "x", "--generate", "2", "--block", "1"]).is_err());
        assert!(Cli::try_parse_from(["readop", "verify", "--d", "x"]).is_err());
        assert!(Cli::try_parse_from(["readop", "certify"]).is_err());
        assert!(Cli::try_parse_from(["readop", "certify", "--d", "x", "--seed", "3"]).is_err());
        let c = Cli::try_parse_from(["readop", "certify", "--generate", "2", "--seed", "3"]).unwrap();
        assert!(matches!(c.command, Command::Certify { source: SourceArgs { seed: Some(3), .. }, .. }));
    }
}
