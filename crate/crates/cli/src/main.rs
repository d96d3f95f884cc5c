mod doc;
mod error;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pairform::alt::{alt_canonicalize, convert};
use pairform::canonical::{canonicalize_operator, canonicalize_pair, verify_canonical, Flavor};
use pairform::glr::{glr_of_pair, verify_glr};
use pairform::harness::suite::{run_all, SuiteSize};
use pairform::harness::{random_canonical_pair, random_spectrum_spec, SpectrumSpec};
use pairform::linalg::conj;
use pairform::pair::{diagnose_pair, validate_pair, AntilinearOperator, SelfAdjointPair};
use pairform::ToleranceConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use doc::{to_matrix, BlockDoc, FormDoc, PairDoc};
use error::CliError;

/// Canonical forms of Hermitian forms paired with self-adjoint antilinear operators.
#[derive(Parser)]
#[command(name = "pairform", version)]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    #[command(subcommand)]
    command: Command,
}

/// Precedence is flag, then environment, then the built-in default.
#[derive(Args)]
struct TolArgs {
    #[arg(long, global = true, env = "PAIRFORM_RANK_TOL", default_value_t = 1e-9)]
    rank_tol: f64,
    #[arg(long, global = true, env = "PAIRFORM_VERIFY_TOL", default_value_t = 1e-6)]
    verify_tol: f64,
    #[arg(long, global = true, env = "PAIRFORM_CLUSTER_TOL", default_value_t = 1e-7)]
    cluster_tol: f64,
    #[arg(long, global = true, env = "PAIRFORM_MAX_DIM", default_value_t = 64)]
    max_dim: usize,
}

impl TolArgs {
    fn config(&self) -> Result<ToleranceConfig, CliError> {
        let t = ToleranceConfig {
            rank_tol: self.rank_tol,
            verify_tol: self.verify_tol,
            cluster_tol: self.cluster_tol,
            max_dim: self.max_dim,
        };
        t.validate()?;
        Ok(t)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormKind {
    Standard,
    Alt,
    Operator,
    Glr,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Standard,
    Alt,
}

#[derive(Subcommand)]
enum Command {
    /// Check that (H, C) is a Hermitian, nondegenerate, self-adjoint pair.
    Validate {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Compute a canonical form and its transition matrix.
    Canonicalize {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "standard")]
        form: FormKind,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-express a standard form in the alternative flavor, or back.
    Convert {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        form_file: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a random pair with known blocks.
    Generate {
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated blocks, e.g. `positive:2:2:-,zero:1,nonreal:1:1:1`.
        #[arg(long)]
        spec: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recompute the residuals of a form file against a pair file.
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        form_file: PathBuf,
    },
    /// Run the acceptance suites.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Reduced trial counts.
        #[arg(long)]
        quick: bool,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn read_pair(path: &Path, tol: &ToleranceConfig) -> Result<SelfAdjointPair, CliError> {
    let d: PairDoc = read_json(path)?;
    Ok(validate_pair(&d.h()?, &d.c()?, tol)?)
}

#[derive(Serialize)]
struct ValidationDoc {
    valid: bool,
    hermitian: f64,
    nondegeneracy: f64,
    self_adjoint: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<String>,
}

fn validate(input: &Path, tol: &ToleranceConfig) -> Result<(), CliError> {
    let d: PairDoc = read_json(input)?;
    let (h, c) = (d.h()?, d.c()?);
    let diag = diagnose_pair(&h, &c, tol)?;
    let verdict = validate_pair(&h, &c, tol);
    let doc = ValidationDoc {
        valid: verdict.is_ok(),
        hermitian: diag.hermitian,
        nondegeneracy: diag.nondegeneracy,
        self_adjoint: diag.self_adjoint,
        violation: verdict.as_ref().err().map(|e| e.to_string()),
    };
    emit(&doc, None)?;
    verdict.map(|_| ()).map_err(CliError::from)
}

fn canonicalize(input: &Path, form: FormKind, output: Option<&Path>, tol: &ToleranceConfig) -> Result<(), CliError> {
    let doc = match form {
        FormKind::Operator => {
            let d: PairDoc = read_json(input)?;
            FormDoc::from(&canonicalize_operator(&AntilinearOperator::new(d.c()?)?, tol)?)
        }
        FormKind::Standard => FormDoc::from(&canonicalize_pair(&read_pair(input, tol)?, tol)?),
        FormKind::Alt => FormDoc::from(&alt_canonicalize(&read_pair(input, tol)?, tol)?),
        FormKind::Glr => FormDoc::from(&glr_of_pair(&read_pair(input, tol)?, tol)?),
    };
    emit(&doc, output)?;
    if doc.residuals.pass {
        Ok(())
    } else {
        Err(pairform::PairError::Numerical(format!(
            "residuals {:.2e}/{:.2e} exceed verify_tol",
            doc.residuals.h_residual, doc.residuals.c_residual
        ))
        .into())
    }
}

fn convert_cmd(input: &Path, form_file: &Path, to: Target, output: Option<&Path>, tol: &ToleranceConfig) -> Result<(), CliError> {
    let p = read_pair(input, tol)?;
    let form = read_json::<FormDoc>(form_file)?.canonical()?;
    let target = match to {
        Target::Standard => Flavor::Standard,
        Target::Alt => Flavor::Alternative,
    };
    emit(&FormDoc::from(&convert(&p, &form, target, tol)?), output)
}

fn generate(size: usize, seed: u64, spec: Option<&str>, output: Option<&Path>, tol: &ToleranceConfig) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec: SpectrumSpec = match spec {
        Some(s) => s.parse()?,
        None => random_spectrum_spec(size, 4.min(size.max(1)), &mut rng),
    };
    if spec.dim() != size {
        return Err(CliError::Parse(format!("spec {spec} has dimension {}, not {size}", spec.dim())));
    }
    let g = random_canonical_pair(size, &spec, Some(rng.gen()), tol)?;
    let doc = PairDoc {
        n: size,
        h: Some(to_matrix(g.pair.h())),
        c: to_matrix(g.pair.c()),
        truth: Some(g.truth.iter().map(BlockDoc::from).collect()),
        spec: Some(spec.to_string()),
    };
    emit(&doc, output)
}

fn verify(input: &Path, form_file: &Path, tol: &ToleranceConfig) -> Result<(), CliError> {
    let form: FormDoc = read_json(form_file)?;
    let d: PairDoc = read_json(input)?;
    let report = if form.is_glr() {
        let p = validate_pair(&d.h()?, &d.c()?, tol)?;
        verify_glr(p.h(), &(p.c() * conj(p.c())), &form.glr()?, tol)?
    } else {
        let f = form.canonical()?;
        let p = if f.flavor == Flavor::OperatorOnly {
            // Only the operator part is checked; H is any admissible witness.
            let c = d.c()?;
            let h = pairform::canonical::witness_form(&AntilinearOperator::new(c.clone())?, tol)?;
            validate_pair(h.matrix(), &c, tol)?
        } else {
            validate_pair(&d.h()?, &d.c()?, tol)?
        };
        verify_canonical(&p, &f, tol)?
    };
    emit(&doc::ResidualDoc::from(report), None)?;
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Rejected(format!("residuals {:.2e}/{:.2e}", report.h_residual, report.c_residual)))
    }
}

fn selftest(seed: u64, quick: bool, tol: &ToleranceConfig) -> Result<(), CliError> {
    let size = if quick {
        SuiteSize { roundtrip: 50, orbit_bases: 10, orbit_conjugates: 5, operators: 20, glr: 10, scalars: 100 }
    } else {
        SuiteSize::FULL
    };
    let outcomes = run_all(size, seed, tol);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(pairform::PairError::Numerical(format!("{failed} criteria failed")).into())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let tol = cli.tol.config()?;
    match cli.command {
        Command::Validate { input } => validate(&input, &tol),
        Command::Canonicalize { input, form, output } => canonicalize(&input, form, output.as_deref(), &tol),
        Command::Convert { input, form_file, to, output } => convert_cmd(&input, &form_file, to, output.as_deref(), &tol),
        Command::Generate { size, seed, spec, output } => generate(size, seed, spec.as_deref(), output.as_deref(), &tol),
        Command::Verify { input, form_file } => verify(&input, &form_file, &tol),
        Command::Selftest { seed, quick } => selftest(seed, quick, &tol),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
