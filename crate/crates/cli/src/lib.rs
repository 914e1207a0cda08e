//! Command-line front end: compute coefficient tables, ψ-series, and verify
//! against the shipped golden tables.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num::BigRational;
use serde::Serialize;

use nakajima::closed_forms::{psi_tangent, psi_taut, ClassRegistry};
use nakajima::fmt_rational;
use nakajima::fock::{Normalizer, NormalizerRegistry};
use nakajima::recursions::{chern_character, Engine, RecursionConfig};
use nakajima::series::{divide_by_unit, extract_exponential, extract_linear, CoefficientTable};
use nakajima::surface::{Mono, SurfaceClass, SurfaceProfile};

pub mod verify;

#[derive(Debug, Parser)]
#[command(name = "nakajima", version, about = "Universal coefficients of characteristic classes on Hilbert schemes of points")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Which symbols survive on the surface.
    #[arg(long, global = true, value_enum, default_value_t = Surface::Generic)]
    pub surface: Surface,
    /// Highest conformal weight to compute.
    #[arg(long, global = true, default_value_t = 4)]
    pub max_weight: u32,
    /// Refuse weights above this.
    #[arg(long, global = true, default_value_t = 6)]
    pub weight_cap: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Normalization strategy, by registered name.
    #[arg(long, global = true, default_value = "derivation")]
    pub strategy: String,
}

#[derive(Debug, Subcommand, Clone)]
pub enum Command {
    /// Chern character of a tautological bundle, linear coefficients against |1>.
    TautCh {
        #[arg(long, default_value_t = 1)]
        rank: u32,
        #[arg(long, value_enum, default_value_t = Classes::Trivial)]
        classes: Classes,
        /// Use the dual bundle.
        #[arg(long)]
        dual: bool,
        #[arg(long, default_value_t = 5)]
        rank_cap: u32,
    },
    /// Total Chern class of a tautological bundle, coefficients inside the exponential.
    TautChern {
        #[arg(long, default_value_t = 2)]
        rank: u32,
        #[arg(long, value_enum, default_value_t = Classes::Generic)]
        classes: Classes,
        #[arg(long, default_value_t = 5)]
        rank_cap: u32,
    },
    /// Chern character of the tangent bundle, linear coefficients against |1>.
    TangentCh,
    /// Coefficients of the ψ-series of a multiplicative class.
    Psi {
        #[arg(long, default_value = "chern")]
        phi: String,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        #[arg(long, value_enum, default_value_t = PsiVariant::Tangent)]
        variant: PsiVariant,
    },
    /// Recompute every golden table and closed form and diff exactly.
    Verify {
        /// Read goldens from this directory instead of the built-in copies.
        #[arg(long)]
        golden_dir: Option<PathBuf>,
        /// Do not count documented errata as failures.
        #[arg(long)]
        allow_errata: bool,
        /// Run only the named suites.
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Surface {
    Generic,
    K3Abelian,
    Plane,
}

impl From<Surface> for SurfaceProfile {
    fn from(s: Surface) -> Self {
        match s {
            Surface::Generic => SurfaceProfile::Generic,
            Surface::K3Abelian => SurfaceProfile::K3Abelian,
            Surface::Plane => SurfaceProfile::Plane,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Classes {
    /// `c1 = C`, `c2 = D` (rank ≥ 2).
    Generic,
    /// `c1 = c2 = 0`.
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Md,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PsiVariant {
    Tangent,
    Taut,
}

/// What a command produced: text to emit and the process exit status.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub status: i32,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    match &cli.command {
        Command::Psi { phi, kmax, variant } => {
            let text = render_psi(phi, *kmax, *variant, c.format)?;
            Ok(Outcome { text, status: 0 })
        }
        Command::Verify { golden_dir, allow_errata, suites } => {
            let normalizer = normalizer(&c.strategy)?;
            let opts = verify::Options {
                golden_dir: golden_dir.clone(),
                allow_errata: *allow_errata,
                suites: suites.clone(),
                symplectic: c.surface == Surface::K3Abelian,
                normalizer,
            };
            let report = verify::run(&opts)?;
            let status = if report.passed() { 0 } else { 1 };
            Ok(Outcome { text: report.render(), status })
        }
        cmd => {
            check_weight(c)?;
            let table = compute(cmd, c)?;
            let text = match c.format {
                Format::Json => table.to_json(),
                Format::Csv => table.to_csv(),
                Format::Md => table.to_markdown(),
            };
            Ok(Outcome { text, status: 0 })
        }
    }
}

fn check_weight(c: &Common) -> Result<()> {
    if c.max_weight > c.weight_cap {
        bail!(
            "--max-weight {} exceeds the cap {}; raise --weight-cap to proceed",
            c.max_weight,
            c.weight_cap
        );
    }
    Ok(())
}

fn check_rank(rank: u32, cap: u32) -> Result<()> {
    if rank == 0 {
        bail!("rank must be positive");
    }
    if rank > cap {
        bail!("--rank {rank} exceeds the cap {cap}; raise --rank-cap to proceed");
    }
    Ok(())
}

pub fn normalizer(name: &str) -> Result<Arc<dyn Normalizer>> {
    let reg = NormalizerRegistry::with_defaults();
    reg.get(name)
        .with_context(|| format!("available strategies: {}", reg.names().join(", ")))
}

/// The requested table for the three series commands.
pub fn compute(cmd: &Command, c: &Common) -> Result<CoefficientTable> {
    let profile = SurfaceProfile::from(c.surface);
    let config = RecursionConfig {
        surface_profile: profile,
        max_weight: c.max_weight as u64,
    };
    let mut engine = Engine::with_normalizer(config, normalizer(&c.strategy)?, 1);
    let table = match cmd {
        Command::TautCh { rank, classes, dual, rank_cap } => {
            check_rank(*rank, *rank_cap)?;
            let ch = match classes {
                Classes::Generic => chern_character(*rank),
                Classes::Trivial => SurfaceClass::one().scale(&BigRational::from_integer((*rank).into())),
            };
            let s = divide_by_unit(&engine.ch_taut_series(&ch, *dual)?);
            let name = if *dual { "ch_taut_dual" } else { "ch_taut" };
            extract_linear(&s, name, profile, Some(*rank))?
        }
        Command::TautChern { rank, classes, rank_cap } => {
            check_rank(*rank, *rank_cap)?;
            let (c1, c2) = chern_classes(*rank, *classes);
            let s = engine.chern_taut_series(*rank, &c1, &c2)?;
            extract_exponential(&s, "chern_taut", profile, Some(*rank))?
        }
        Command::TangentCh => {
            let s = divide_by_unit(&engine.ch_tangent_series()?);
            extract_linear(&s, "ch_tangent", profile, None)?
        }
        Command::Psi { .. } | Command::Verify { .. } => unreachable!("not a table command"),
    };
    Ok(table)
}

/// `(c1, c2)` of the test bundle.
pub fn chern_classes(rank: u32, classes: Classes) -> (SurfaceClass, SurfaceClass) {
    match classes {
        Classes::Trivial => (SurfaceClass::zero(), SurfaceClass::zero()),
        Classes::Generic => {
            let c2 = if rank >= 2 { SurfaceClass::mono(Mono::D) } else { SurfaceClass::zero() };
            (SurfaceClass::mono(Mono::C), c2)
        }
    }
}

#[derive(Serialize)]
struct PsiJson<'a> {
    phi: &'a str,
    variant: &'a str,
    coefficients: Vec<String>,
}

pub fn psi_coefficients(phi: &str, kmax: usize, variant: PsiVariant) -> Result<Vec<BigRational>> {
    let class = ClassRegistry::with_defaults().get(phi)?;
    let series = class.series(kmax + 1)?;
    Ok(match variant {
        PsiVariant::Tangent => psi_tangent(&series, kmax)?,
        PsiVariant::Taut => psi_taut(&series, kmax)?,
    })
}

fn render_psi(phi: &str, kmax: usize, variant: PsiVariant, format: Format) -> Result<String> {
    let coeffs = psi_coefficients(phi, kmax, variant)?;
    let variant_name = match variant {
        PsiVariant::Tangent => "tangent",
        PsiVariant::Taut => "taut",
    };
    let mut s = String::new();
    match format {
        Format::Json => {
            let j = PsiJson {
                phi,
                variant: variant_name,
                coefficients: coeffs.iter().map(fmt_rational).collect(),
            };
            s = serde_json::to_string_pretty(&j)?;
            s.push('\n');
        }
        Format::Csv => {
            s.push_str("k;coefficient\n");
            for (k, c) in coeffs.iter().enumerate() {
                let _ = writeln!(s, "{};{}", k + 1, fmt_rational(c));
            }
        }
        Format::Md => {
            let _ = writeln!(s, "**psi** ({phi}, {variant_name})\n");
            s.push_str("| k | ψ_k |\n|---|---|\n");
            for (k, c) in coeffs.iter().enumerate() {
                let _ = writeln!(s, "| {} | {} |", k + 1, fmt_rational(c));
            }
        }
    }
    Ok(s)
}
