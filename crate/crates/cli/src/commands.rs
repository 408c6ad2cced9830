//! Subcommands of `mpcsr`.
//!
//! Exit status: `0` on success, `1` when `verify` finds a mismatch, `2` on
//! usage, input or computation errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use maxplus_csr::csr::{expand_from, reduce_expansion};
use maxplus_csr::digraph::principal_eigenvectors;
use maxplus_csr::oracle::{brute_power_check, brute_power_check_at, OracleReport};
use maxplus_csr::{characteristic_roots, partition_nodes, visualize_all, CsrExpansion, Matrix, Tropical};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::document::{DocumentError, ExpansionDocument, Provenance};
use crate::format::{parse_matrix, to_dense, FormatError};

/// Exact CSR expansions of max-plus matrix powers.
#[derive(Debug, Parser)]
#[command(name = "mpcsr", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Roots of the characteristic maxpolynomial and the maximal multi-circuit sequence.
    Roots { file: PathBuf },
    /// The CSR expansion of the matrix.
    Expand {
        file: PathBuf,
        /// Collapse each term onto cyclicity classes.
        #[arg(long)]
        reduce: bool,
        /// Print the expansion as JSON.
        #[arg(long)]
        json: bool,
    },
    /// The power A^t in dense file format.
    Power {
        file: PathBuf,
        #[arg(value_parser = parse_exponent)]
        t: BigUint,
        /// Repeated squaring.
        #[arg(long, conflicts_with = "csr")]
        naive: bool,
        /// Evaluate the CSR expansion (requires t ≥ 2n²).
        #[arg(long)]
        csr: bool,
    },
    /// Compare the expansion with naive powers.
    Verify {
        file: PathBuf,
        /// Inclusive exponent range `a..b`; defaults to 2n²..2n²+20.
        #[arg(long, value_parser = parse_range)]
        t_range: Option<(u64, u64)>,
        /// Also check five seeded random exponents up to 2^62.
        #[arg(long)]
        seed: Option<u64>,
        /// Check a stored JSON expansion instead of computing one.
        #[arg(long)]
        expansion: Option<PathBuf>,
    },
    /// Scalings d_s and visualized blocks A'_s of every group.
    Visualize { file: PathBuf },
    /// Maximum cycle mean, critical graph and principal eigenvectors.
    Eigen { file: PathBuf },
}

fn parse_exponent(s: &str) -> Result<BigUint, String> {
    s.parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let bad = || format!("`{s}` is not a range `a..b`");
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    if a > b {
        return Err(format!("empty range `{s}`"));
    }
    Ok((a, b))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("malformed matrix in {}: {source}", path.display())]
    Parse { path: PathBuf, source: FormatError },
    #[error("invalid expansion document {}: {source}", path.display())]
    Document { path: PathBuf, source: DocumentError },
    #[error("{0}")]
    Usage(String),
    #[error("computation failed: {0}")]
    Compute(#[from] maxplus_csr::Error),
    #[error("cannot write output: {0}")]
    Output(#[from] io::Error),
}

enum Outcome {
    Success,
    Mismatch,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(&cli.command, out) {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::Mismatch) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn load(path: &Path) -> Result<(Vec<u8>, Matrix), CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8_lossy(&bytes);
    let a = parse_matrix(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((bytes, a))
}

fn execute(command: &Command, out: &mut dyn Write) -> Result<Outcome, CliError> {
    match command {
        Command::Roots { file } => roots(&load(file)?.1, out),
        Command::Expand { file, reduce, json } => {
            let (bytes, a) = load(file)?;
            let x = build_expansion(&a, *reduce)?;
            if *json {
                let doc = ExpansionDocument::from_expansion(&x, Provenance::for_input(&bytes));
                writeln!(out, "{}", doc.to_json())?;
            } else {
                out.write_all(describe_expansion(&x).as_bytes())?;
            }
            Ok(Outcome::Success)
        }
        Command::Power { file, t, naive, csr } => power(&load(file)?.1, t, *naive, *csr, out),
        Command::Verify {
            file,
            t_range,
            seed,
            expansion,
        } => {
            let a = load(file)?.1;
            let x = match expansion {
                Some(path) => load_document(path, &a)?,
                None => build_expansion(&a, false)?,
            };
            verify(&a, &x, *t_range, *seed, out)
        }
        Command::Visualize { file } => visualize(&load(file)?.1, out),
        Command::Eigen { file } => eigen(&load(file)?.1, out),
    }
}

fn load_document(path: &Path, a: &Matrix) -> Result<CsrExpansion, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let document = |source| CliError::Document {
        path: path.to_path_buf(),
        source,
    };
    let x = ExpansionDocument::from_json(&text)
        .and_then(|d| d.to_expansion())
        .map_err(document)?;
    if x.n != a.rows() {
        return Err(document(DocumentError::Invalid(format!(
            "dimension {} does not match the {}x{} matrix",
            x.n,
            a.rows(),
            a.cols()
        ))));
    }
    Ok(x)
}

fn build_expansion(a: &Matrix, reduce: bool) -> Result<CsrExpansion, CliError> {
    let n = a.ensure_square()?;
    let mmcs = characteristic_roots(a)?;
    let part = partition_nodes(&mmcs, n)?;
    let vis = visualize_all(a, &part)?;
    let x = expand_from(a, &part, &vis)?;
    Ok(if reduce { reduce_expansion(&x, &vis)? } else { x })
}

fn one_based(nodes: &[usize]) -> String {
    let parts: Vec<String> = nodes.iter().map(|v| (v + 1).to_string()).collect();
    parts.join(" ")
}

fn vector(x: &[Tropical]) -> String {
    let parts: Vec<String> = x.iter().map(ToString::to_string).collect();
    parts.join(" ")
}

fn roots(a: &Matrix, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let mmcs = characteristic_roots(a)?;
    writeln!(out, "roots:")?;
    for (root, mult) in mmcs.roots.iter().zip(&mmcs.multiplicities) {
        writeln!(out, "{root} (x{mult})")?;
    }
    if mmcs.eps_multiplicity > 0 {
        writeln!(out, "-inf (x{})", mmcs.eps_multiplicity)?;
    }
    writeln!(out, "multi-circuits:")?;
    for (k, m) in mmcs.multicircuits.iter().enumerate() {
        writeln!(out, "M{k} length {} weight {}: {m}", m.len(), m.weight())?;
    }
    Ok(Outcome::Success)
}

fn describe_expansion(x: &CsrExpansion) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "n = {}, threshold = {}, terms = {}", x.n, x.threshold, x.terms.len());
    if x.terms.is_empty() {
        let _ = writeln!(s, "acyclic: A^t = ε for t ≥ {}", x.n);
    }
    for term in &x.terms {
        let support: Vec<String> = term
            .support
            .iter()
            .map(|class| format!("{{{}}}", one_based(class)))
            .collect();
        let _ = writeln!(
            s,
            "\nterm {}: rate {}, circuit {}, period {}",
            term.group,
            term.rate,
            term.circuit.display_one_based(),
            term.period()
        );
        let _ = writeln!(s, "support: {}", support.join(" "));
        let _ = write!(s, "C =\n{}S =\n{}R =\n{}", term.c, term.s, term.r);
    }
    s
}

fn power(a: &Matrix, t: &BigUint, naive: bool, csr: bool, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let n = a.ensure_square()?;
    let threshold = BigUint::from(2 * (n as u64) * (n as u64));
    let use_csr = csr || (!naive && *t >= threshold);
    let p = if use_csr {
        if *t < threshold {
            return Err(CliError::Usage(format!(
                "t = {t} is below the expansion threshold 2n² = {threshold}; use --naive"
            )));
        }
        build_expansion(a, false)?.evaluate(t)?
    } else {
        a.power(t)?
    };
    out.write_all(to_dense(&p).as_bytes())?;
    Ok(Outcome::Success)
}

fn verify(
    a: &Matrix,
    x: &CsrExpansion,
    range: Option<(u64, u64)>,
    seed: Option<u64>,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let (lo, hi) = range.unwrap_or((x.threshold, x.threshold + 20));
    if lo < x.threshold {
        return Err(CliError::Usage(format!(
            "t-range starts at {lo}, below the expansion threshold 2n² = {}",
            x.threshold
        )));
    }
    let mut reports: Vec<OracleReport> = vec![brute_power_check(a, x, lo..=hi, "input", None)?];
    if let Some(seed) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ts: Vec<BigUint> = (0..5)
            .map(|_| BigUint::from(rng.gen_range(x.threshold..=1u64 << 62)))
            .collect();
        reports.push(brute_power_check_at(a, x, &ts, "input, random t", Some(seed))?);
    }
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    Ok(if reports.iter().all(|r| r.matched) {
        Outcome::Success
    } else {
        Outcome::Mismatch
    })
}

fn visualize(a: &Matrix, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let n = a.ensure_square()?;
    let part = partition_nodes(&characteristic_roots(a)?, n)?;
    let vis = visualize_all(a, &part)?;
    if vis.blocks.is_empty() {
        writeln!(out, "acyclic: no groups")?;
    }
    for (s, block) in vis.blocks.iter().enumerate() {
        let d: Vec<String> = block.scaling.values().iter().map(ToString::to_string).collect();
        writeln!(out, "group {}: N = {{{}}}, rate {}", s + 1, one_based(&part.groups[s]), block.rate)?;
        writeln!(out, "V = {}", one_based(&block.nodes))?;
        writeln!(out, "d = {}", d.join(" "))?;
        write!(out, "A' =\n{}", block.matrix)?;
    }
    Ok(Outcome::Success)
}

fn eigen(a: &Matrix, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let e = match principal_eigenvectors(a) {
        Ok(e) => e,
        Err(maxplus_csr::Error::NoFiniteEigenvalue) => {
            writeln!(out, "lambda = -inf (the graph has no circuits)")?;
            return Ok(Outcome::Success);
        }
        Err(e) => return Err(e.into()),
    };
    let arcs: Vec<String> = e
        .critical
        .arcs
        .iter()
        .map(|(u, v)| format!("({},{})", u + 1, v + 1))
        .collect();
    writeln!(out, "lambda = {}", e.lambda)?;
    writeln!(out, "critical nodes: {}", one_based(&e.critical.nodes))?;
    writeln!(out, "critical arcs: {}", arcs.join(" "))?;
    for (k, x) in &e.vectors {
        writeln!(out, "eigenvector {}: {}", k + 1, vector(x))?;
    }
    Ok(Outcome::Success)
}
