//! Command-line front end: JSON problem/result files, reports and exit codes.
//!
//! Exit codes: 0 ok, 1 parse or usage error, 2 no dichotomy, 3 unsolvable or
//! infeasible, 4 verification failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dichotomy::{certify, Axis, DichotomyCertificate, VerificationReport};
use crate::error::{Error, Result};
use crate::genpinv::Classification;
use crate::green::{dynamics_residual, GreenContext, SolvabilityReport, Tolerances};
use crate::instances;
use crate::linsys::{ForcingSequence, OperatorSequence, StateSequence};
use crate::mat::{from_rows, to_rows, Vector};
use crate::oracle::{compare_mod_family, truncated_bounded_solve, TruncatedProblem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_NO_DICHOTOMY: i32 = 2;
pub const EXIT_UNSOLVABLE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Agreement required between the Green's-operator and oracle solutions.
pub const ORACLE_AGREEMENT_TOL: f64 = 1e-6;

/// Allowed drift between stored and recomputed residuals.
pub const REPRODUCE_TOL: f64 = 1e-12;

fn default_output_window() -> (i64, i64) {
    (-20, 20)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dim: usize,
    pub window_lo: i64,
    pub window_hi: i64,
    pub tail_minus: Vec<Vec<f64>>,
    pub tail_plus: Vec<Vec<f64>>,
    #[serde(default)]
    pub window: BTreeMap<i64, Vec<Vec<f64>>>,
    #[serde(default)]
    pub forcing: BTreeMap<i64, Vec<f64>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_output_window")]
    pub output_window: (i64, i64),
}

fn matrix(rows: &[Vec<f64>], dim: usize, what: &str) -> Result<crate::mat::Matrix> {
    let m = from_rows(rows).ok_or_else(|| Error::Parse(format!("{what}: ragged rows")))?;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Parse(format!(
            "{what}: expected {dim}x{dim}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m)
}

impl ProblemFile {
    pub fn from_system(
        seq: &OperatorSequence,
        h: &ForcingSequence,
        tolerances: Tolerances,
        output_window: (i64, i64),
    ) -> Self {
        let window = seq
            .window_matrices()
            .iter()
            .enumerate()
            .map(|(i, m)| (seq.window_lo() + i as i64, to_rows(m)))
            .collect();
        let forcing = h
            .iter()
            .map(|(n, v)| (n, v.iter().copied().collect()))
            .collect();
        Self {
            dim: seq.dim(),
            window_lo: seq.window_lo(),
            window_hi: seq.window_hi(),
            tail_minus: to_rows(seq.tail_minus()),
            tail_plus: to_rows(seq.tail_plus()),
            window,
            forcing,
            tolerances,
            output_window,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Parse("dim must be positive".into()));
        }
        let (lo, hi) = self.output_window;
        if lo > hi {
            return Err(Error::Parse(format!("output_window [{lo}, {hi}] is empty")));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("rank_tol_rel", t.rank_tol_rel),
            ("gap_tol", t.gap_tol),
            ("solvability_tol", t.solvability_tol),
            ("verify_tol", t.verify_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parse(format!("tolerance {name} must be positive")));
            }
        }
        self.to_system().map(|_| ())
    }

    pub fn to_system(&self) -> Result<(OperatorSequence, ForcingSequence)> {
        let d = self.dim;
        let expected: Vec<i64> = (self.window_lo..self.window_hi).collect();
        let keys: Vec<i64> = self.window.keys().copied().collect();
        if keys != expected {
            return Err(Error::Parse(format!(
                "window matrices must be keyed exactly by {}..{}, got {keys:?}",
                self.window_lo, self.window_hi
            )));
        }
        let window = self
            .window
            .iter()
            .map(|(n, rows)| matrix(rows, d, &format!("window[{n}]")))
            .collect::<Result<Vec<_>>>()?;
        let seq = OperatorSequence::with_inv_tol(
            self.window_lo,
            self.window_hi,
            window,
            matrix(&self.tail_minus, d, "tail_minus")?,
            matrix(&self.tail_plus, d, "tail_plus")?,
            crate::linsys::DEFAULT_INV_TOL_REL,
        )
        .map_err(|e| match e {
            Error::InvalidSequence(m) | Error::ShapeMismatch(m) => Error::Parse(m),
            Error::InversionFailure { index, ratio } => Error::Parse(format!(
                "A_{index} is numerically singular (ratio {ratio:e})"
            )),
            other => other,
        })?;
        let mut h = ForcingSequence::zero(d);
        for (n, v) in &self.forcing {
            if v.len() != d {
                return Err(Error::Parse(format!("forcing[{n}] has length {}", v.len())));
            }
            h.insert(*n, Vector::from_row_slice(v))
                .map_err(|e| Error::Parse(e.to_string()))?;
        }
        Ok((seq, h))
    }

    /// Canonical serialization: fixed key order, shortest round-trip floats.
    pub fn canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem serializes");
        s.push('\n');
        s
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analyze,
    Exact,
    Quasi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub certificate: DichotomyCertificate,
    pub report: VerificationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub plus: CertificateRecord,
    pub minus: CertificateRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub start: i64,
    pub particular: Vec<Vec<f64>>,
    pub basis: Vec<Vec<Vec<f64>>>,
    pub xi: Vec<f64>,
    pub defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `max ‖x_{n+1} − A_n x_n − h_n‖` over the stored samples (quasisolutions
    /// skip the matching step `n = −1`).
    pub dynamics: f64,
    /// `max_j max_n ‖(L b_j)(n)‖` over the stored basis.
    pub homogeneous: f64,
    /// `‖G[h](0+) − G[h](0−)‖`.
    pub jump: f64,
    /// `‖Σ H(k+1)h_k‖`.
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub problem_hash: String,
    pub problem: ProblemFile,
    pub mode: Mode,
    pub certificates: Certificates,
    pub classification: Classification,
    pub d_singular_values: Vec<f64>,
    pub solvability: Option<SolvabilityReport>,
    pub solution: Option<SolutionRecord>,
    pub residuals: Option<Residuals>,
}

impl ResultFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let r: Self = serde_json::from_str(&text)?;
        r.problem.validate()?;
        Ok(r)
    }

    fn particular(&self) -> Result<Option<StateSequence>> {
        let Some(sol) = &self.solution else {
            return Ok(None);
        };
        let seq = samples_to_sequence(self.problem.dim, sol.start, &sol.particular)?;
        Ok(Some(seq))
    }

    fn basis(&self) -> Result<Vec<StateSequence>> {
        let Some(sol) = &self.solution else {
            return Ok(Vec::new());
        };
        sol.basis
            .iter()
            .map(|b| samples_to_sequence(self.problem.dim, sol.start, b))
            .collect()
    }
}

fn samples_to_sequence(dim: usize, start: i64, rows: &[Vec<f64>]) -> Result<StateSequence> {
    StateSequence::new(
        dim,
        start,
        rows.iter().map(|v| Vector::from_row_slice(v)).collect(),
    )
    .map_err(|e| Error::Parse(e.to_string()))
}

fn sequence_rows(x: &StateSequence) -> Vec<Vec<f64>> {
    x.samples()
        .iter()
        .map(|v| v.iter().copied().collect())
        .collect()
}

/// Dichotomy checks run on `[0, W]` and `[−W, 0]`.
pub fn verification_half_width(seq: &OperatorSequence) -> i64 {
    20.max(2 * seq.window_hi().max(-seq.window_lo()))
}

struct Analysis {
    ctx: GreenContext,
    h: ForcingSequence,
    certificates: Certificates,
}

fn analyze_problem(problem: &ProblemFile) -> Result<Analysis> {
    let (seq, h) = problem.to_system()?;
    let tol = problem.tolerances;
    let w = verification_half_width(&seq);
    let exec = crate::par::Exec::default();
    let (pc, pr) = certify(&seq, Axis::Plus, tol.gap_tol, (0, w), exec)?;
    let (mc, mr) = certify(&seq, Axis::Minus, tol.gap_tol, (-w, 0), exec)?;
    let ctx = GreenContext::new(seq, tol)?;
    Ok(Analysis {
        ctx,
        h,
        certificates: Certificates {
            plus: CertificateRecord {
                certificate: pc,
                report: pr,
            },
            minus: CertificateRecord {
                certificate: mc,
                report: mr,
            },
        },
    })
}

fn base_result(problem: &ProblemFile, a: &Analysis, mode: Mode) -> ResultFile {
    ResultFile {
        problem_hash: problem.hash(),
        problem: problem.clone(),
        mode,
        certificates: a.certificates.clone(),
        classification: a.ctx.classification().clone(),
        d_singular_values: a.ctx.generalized_inverse().singular_values.clone(),
        solvability: None,
        solution: None,
        residuals: None,
    }
}

fn compute_residuals(
    ctx: &GreenContext,
    h: &ForcingSequence,
    mode: Mode,
    particular: &StateSequence,
    basis: &[StateSequence],
) -> Result<Residuals> {
    let skip = (mode == Mode::Quasi).then_some(-1);
    let dynamics = if particular.len() >= 2 {
        dynamics_residual(ctx.seq(), particular, h, skip)?
    } else {
        0.0
    };
    let mut homogeneous: f64 = 0.0;
    for b in basis.iter().filter(|b| b.len() >= 2) {
        homogeneous = homogeneous.max(ctx.seq().apply_l(b)?.max_norm());
    }
    Ok(Residuals {
        dynamics,
        homogeneous,
        jump: ctx.jump(h)?.norm(),
        condition: ctx.solvability_residual(h)?.residual_norm,
    })
}

fn fmt_matrix(rows: &[Vec<f64>]) -> String {
    let inner: Vec<String> = rows
        .iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:.6}")).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", inner.join(", "))
}

fn analysis_report(r: &ResultFile) -> String {
    let mut s = String::new();
    let p = &r.problem;
    let _ = writeln!(
        s,
        "system: dim {}, window [{}, {})",
        p.dim, p.window_lo, p.window_hi
    );
    for (label, rec) in [("P", &r.certificates.plus), ("Q", &r.certificates.minus)] {
        let c = &rec.certificate;
        let _ = writeln!(s, "{label} = {}", fmt_matrix(&c.projector));
        let _ =
            writeln!(
            s,
            "  dichotomy on {}: k = {:.6}, lambda = {:.6}, window [{}, {}], max ratio {:.6} ({})",
            c.axis.name(),
            c.k,
            c.lambda,
            rec.report.window.0,
            rec.report.window.1,
            rec.report.max_ratio,
            if rec.report.verified { "verified" } else { "NOT verified" }
        );
    }
    let c = &r.classification;
    let _ = writeln!(s, "D singular values: {:?}", r.d_singular_values);
    let _ = writeln!(
        s,
        "dim ker D = {}, dim coker D = {}, index = {}, r = {}, d = {}",
        c.dim_ker, c.dim_coker, c.index, c.r, c.d
    );
    let _ = writeln!(
        s,
        "trichotomy = {}, dichotomy_on_z = {}",
        c.trichotomy, c.dichotomy_on_z
    );
    if let Some(rep) = &r.solvability {
        let _ = writeln!(
            s,
            "solvability residual = {:e} ({} condition(s)): {}",
            rep.residual_norm,
            rep.d_conditions,
            if rep.solvable {
                "solvable"
            } else {
                "NOT solvable"
            }
        );
    }
    if let Some(sol) = &r.solution {
        let _ = writeln!(
            s,
            "solution: {} samples from n = {}, {} basis sequence(s), defect {:e}",
            sol.particular.len(),
            sol.start,
            sol.basis.len(),
            sol.defect
        );
    }
    if let Some(res) = &r.residuals {
        let _ = writeln!(
            s,
            "residuals: dynamics {:e}, homogeneous {:e}, jump {:e}, condition {:e}",
            res.dynamics, res.homogeneous, res.jump, res.condition
        );
    }
    s
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

fn load_problem(file: &Path, rank_tol: Option<f64>) -> Result<ProblemFile> {
    let mut problem = ProblemFile::read(file)?;
    if let Some(t) = rank_tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Parse("--rank-tol must be positive".into()));
        }
        problem.tolerances.rank_tol_rel = t;
    }
    Ok(problem)
}

pub fn cmd_analyze(
    file: &Path,
    output: Option<&Path>,
    rank_tol: Option<f64>,
) -> Result<(i32, String)> {
    let problem = load_problem(file, rank_tol)?;
    let a = analyze_problem(&problem)?;
    let result = base_result(&problem, &a, Mode::Analyze);
    if let Some(out) = output {
        write_file(out, &result.to_json())?;
    }
    Ok((EXIT_OK, analysis_report(&result)))
}

pub fn write_csv(path: &Path, x: &StateSequence) -> Result<()> {
    let mut s = String::from("n");
    for i in 1..=x.dim() {
        let _ = write!(s, ",x_{i}");
    }
    s.push_str(",norm\n");
    for (n, v) in x.iter() {
        let _ = write!(s, "{n}");
        for c in v.iter() {
            let _ = write!(s, ",{c}");
        }
        let _ = writeln!(s, ",{}", v.norm());
    }
    write_file(path, &s)
}

pub fn cmd_solve(
    file: &Path,
    quasi: bool,
    output: Option<&Path>,
    csv: Option<&Path>,
    rank_tol: Option<f64>,
) -> Result<(i32, String)> {
    let problem = load_problem(file, rank_tol)?;
    let a = analyze_problem(&problem)?;
    let mode = if quasi { Mode::Quasi } else { Mode::Exact };
    let mut result = base_result(&problem, &a, mode);
    let report = a.ctx.solvability_residual(&a.h)?;
    result.solvability = Some(report.clone());
    let code = if report.solvable || quasi {
        let fam = if quasi {
            a.ctx.quasi_solve(&a.h, problem.output_window)?
        } else {
            a.ctx.solve_bounded(&a.h, problem.output_window)?
        };
        result.residuals = Some(compute_residuals(
            &a.ctx,
            &a.h,
            mode,
            &fam.particular,
            &fam.basis,
        )?);
        result.solution = Some(SolutionRecord {
            start: fam.particular.start(),
            particular: sequence_rows(&fam.particular),
            basis: fam.basis.iter().map(sequence_rows).collect(),
            xi: fam.xi_particular.iter().copied().collect(),
            defect: fam.defect,
        });
        if let Some(path) = csv {
            write_csv(path, &fam.particular)?;
        }
        EXIT_OK
    } else {
        EXIT_UNSOLVABLE
    };
    if let Some(out) = output {
        write_file(out, &result.to_json())?;
    }
    Ok((code, analysis_report(&result)))
}

fn reproduces(stored: f64, recomputed: f64) -> bool {
    (stored - recomputed).abs() <= REPRODUCE_TOL * (1.0 + stored.abs())
}

/// Names of the failed checks (empty when the result verifies).
pub fn verify_result(result: &ResultFile) -> Result<Vec<String>> {
    let mut failures = Vec::new();
    if result.problem_hash != result.problem.hash() {
        failures.push("problem hash does not match the embedded problem".to_string());
    }
    let (seq, h) = result.problem.to_system()?;
    let tol = result.problem.tolerances;
    let ctx = GreenContext::new(seq, tol)?;
    let Some(particular) = result.particular()? else {
        return Err(Error::Parse("result file has no solution samples".into()));
    };
    let basis = result.basis()?;
    let fresh = compute_residuals(&ctx, &h, result.mode, &particular, &basis)?;
    let scale = 1.0 + h.sup_norm();
    let bound = tol.verify_tol * scale;

    if let Some(stored) = &result.residuals {
        for (name, a, b) in [
            ("dynamics residual", stored.dynamics, fresh.dynamics),
            (
                "homogeneous residual",
                stored.homogeneous,
                fresh.homogeneous,
            ),
            ("jump", stored.jump, fresh.jump),
            ("condition", stored.condition, fresh.condition),
        ] {
            if !reproduces(a, b) {
                failures.push(format!("{name}: stored {a:e}, recomputed {b:e}"));
            }
        }
    } else {
        failures.push("result file has no stored residuals".into());
    }
    if fresh.dynamics > bound {
        failures.push(format!(
            "dynamics residual {:e} exceeds {bound:e}",
            fresh.dynamics
        ));
    }
    if fresh.homogeneous > tol.verify_tol {
        failures.push(format!(
            "homogeneous residual {:e} exceeds {:e}",
            fresh.homogeneous, tol.verify_tol
        ));
    }
    match result.mode {
        Mode::Exact => {
            if fresh.jump > bound {
                failures.push(format!("jump {:e} exceeds {bound:e}", fresh.jump));
            }
            if fresh.condition > tol.solvability_tol * scale {
                failures.push(format!("condition {:e} is not satisfied", fresh.condition));
            }
        }
        Mode::Quasi => {
            let defect = result.solution.as_ref().map_or(f64::NAN, |s| s.defect);
            if !reproduces(defect, fresh.jump) {
                failures.push(format!(
                    "defect: stored {defect:e}, recomputed {:e}",
                    fresh.jump
                ));
            }
        }
        Mode::Analyze => failures.push("analyze results carry no solution".into()),
    }
    Ok(failures)
}

pub fn cmd_verify(file: &Path) -> Result<(i32, String)> {
    let result = ResultFile::read(file)?;
    let failures = verify_result(&result)?;
    if failures.is_empty() {
        Ok((EXIT_OK, "verified: all checks within tolerance\n".into()))
    } else {
        Err(Error::VerificationFailure(failures.join("; ")))
    }
}

pub fn cmd_oracle(file: &Path, half_width: Option<i64>) -> Result<(i32, String)> {
    let problem = ProblemFile::read(file)?;
    let (seq, h) = problem.to_system()?;
    let tol = problem.tolerances;
    let extent = h
        .support_bounds()
        .map_or(0, |(lo, hi)| lo.abs().max(hi.abs()))
        .max(seq.window_hi())
        .max(-seq.window_lo());
    let n = half_width.unwrap_or(2 * extent + 20);
    let truncated = TruncatedProblem::new(seq.clone(), h.clone(), n, tol.gap_tol)?;
    let brute = truncated_bounded_solve(&truncated)?;
    let ctx = GreenContext::new(seq, tol)?;
    let fam = ctx.solve_bounded(&h, (-n, n))?;
    let inner = (n / 2).max(1);
    let restrict = |x: &StateSequence| x.restrict(-inner, inner);
    let basis = fam.basis.iter().map(restrict).collect::<Result<Vec<_>>>()?;
    let dist = compare_mod_family(&restrict(&fam.particular)?, &restrict(&brute)?, &basis)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "oracle half-width N = {n}, compared on [{}, {inner}]",
        -inner
    );
    let _ = writeln!(s, "bounded family dimension r = {}", fam.r);
    let _ = writeln!(s, "distance modulo family = {dist:e}");
    if dist <= ORACLE_AGREEMENT_TOL {
        Ok((EXIT_OK, s))
    } else {
        Err(Error::VerificationFailure(format!(
            "oracle distance {dist:e} exceeds {ORACLE_AGREEMENT_TOL:e}"
        )))
    }
}

/// The built-in problems: `saddle` (h₀ = e₁), `resonant` (h₀ = 1, not
/// solvable) and `trichotomy` (h₀ = (1, 1)).
pub fn demo_problem(name: &str) -> Result<ProblemFile> {
    let v = |x: &[f64]| Vector::from_row_slice(x);
    let (seq, h) = match name {
        "saddle" => (
            instances::saddle(),
            ForcingSequence::from_entries(2, [(0, v(&[1.0, 0.0]))])?,
        ),
        "resonant" => (
            instances::resonant(),
            ForcingSequence::from_entries(1, [(0, v(&[1.0]))])?,
        ),
        "trichotomy" => (
            instances::trichotomy(),
            ForcingSequence::from_entries(2, [(0, v(&[1.0, 1.0]))])?,
        ),
        other => return Err(Error::UnknownDemo(other.to_string())),
    };
    Ok(ProblemFile::from_system(
        &seq,
        &h,
        Tolerances::builtin(),
        default_output_window(),
    ))
}

pub fn cmd_demo(name: &str, output: Option<&Path>) -> Result<(i32, String)> {
    let text = demo_problem(name)?.canonical_json();
    match output {
        Some(path) => {
            write_file(path, &text)?;
            Ok((EXIT_OK, format!("wrote {}\n", path.display())))
        }
        None => Ok((EXIT_OK, text)),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnitCircleEigenvalue { .. } | Error::NoCertificate { .. } => EXIT_NO_DICHOTOMY,
        Error::NotSolvable(_) | Error::InfeasibleTruncation { .. } => EXIT_UNSOLVABLE,
        Error::VerificationFailure(_) => EXIT_VERIFY,
        _ => EXIT_PARSE,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dgreen",
    version,
    about = "Bounded solutions of dichotomous linear difference equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dichotomy certificates and classification of D.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Relative rank tolerance for D (overrides the file).
        #[arg(long)]
        rank_tol: Option<f64>,
    },
    /// Decide solvability and sample the bounded solutions.
    Solve {
        file: PathBuf,
        /// Return the minimal-defect quasisolution when not solvable.
        #[arg(long)]
        quasi: bool,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        rank_tol: Option<f64>,
    },
    /// Recompute the residuals stored in a result file.
    Verify { file: PathBuf },
    /// Cross-check against the truncated brute-force solver.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        half_width: Option<i64>,
    },
    /// Write a built-in problem (saddle, resonant, trichotomy).
    Demo {
        name: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

pub fn dispatch(command: &Command) -> Result<(i32, String)> {
    match command {
        Command::Analyze {
            file,
            output,
            rank_tol,
        } => cmd_analyze(file, output.as_deref(), *rank_tol),
        Command::Solve {
            file,
            quasi,
            output,
            csv,
            rank_tol,
        } => cmd_solve(file, *quasi, output.as_deref(), csv.as_deref(), *rank_tol),
        Command::Verify { file } => cmd_verify(file),
        Command::Oracle { file, half_width } => cmd_oracle(file, *half_width),
        Command::Demo { name, output } => cmd_demo(name, output.as_deref()),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            if code == EXIT_OK {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok((code, text)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(e) => {
            let code = exit_code(&e);
            if let Error::NotSolvable(report) = &e {
                let _ = writeln!(err, "not solvable: residual {:e}", report.residual_norm);
            } else {
                let _ = writeln!(err, "error: {e}");
            }
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_round_trip_is_byte_identical() {
        for name in ["saddle", "resonant", "trichotomy"] {
            let text = demo_problem(name).unwrap().canonical_json();
            let again = ProblemFile::parse(&text).unwrap().canonical_json();
            assert_eq!(text, again);
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v: serde_json::Value =
            serde_json::from_str(&demo_problem("saddle").unwrap().canonical_json()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(matches!(
            ProblemFile::parse(&v.to_string()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn missing_tolerances_take_defaults() {
        let text = r#"{"dim": 1, "window_lo": 0, "window_hi": 0,
            "tail_minus": [[0.5]], "tail_plus": [[2.0]], "forcing": {"0": [1.0]}}"#;
        let p = ProblemFile::parse(text).unwrap();
        assert_eq!(p.output_window, (-20, 20));
        assert!(p.tolerances.rank_tol_rel > 0.0);
    }

    #[test]
    fn window_keys_must_cover_window() {
        let text = r#"{"dim": 1, "window_lo": -1, "window_hi": 1,
            "tail_minus": [[0.5]], "tail_plus": [[2.0]], "window": {"-1": [[1.0]]}}"#;
        assert!(matches!(ProblemFile::parse(text), Err(Error::Parse(_))));
    }

    #[test]
    fn singular_window_matrix_is_a_parse_error() {
        let text = r#"{"dim": 1, "window_lo": 0, "window_hi": 1,
            "tail_minus": [[0.5]], "tail_plus": [[2.0]], "window": {"0": [[0.0]]}}"#;
        assert!(matches!(ProblemFile::parse(text), Err(Error::Parse(_))));
    }

    #[test]
    fn exit_code_mapping() {
        assert_eq!(exit_code(&Error::Parse("x".into())), 1);
        assert_eq!(
            exit_code(&Error::UnitCircleEigenvalue {
                axis: "plus",
                re: 1.0,
                im: 0.0
            }),
            2
        );
        assert_eq!(
            exit_code(&Error::InfeasibleTruncation {
                residual: 1.0,
                threshold: 0.0
            }),
            3
        );
        assert_eq!(exit_code(&Error::VerificationFailure("x".into())), 4);
        assert_eq!(exit_code(&Error::UnknownDemo("x".into())), 1);
    }
}
