use std::path::PathBuf;

use bicoherent_core::quadrature::MAX_GH_ORDER;
use bicoherent_core::ModelParams;
use clap::{Parser, ValueEnum};
use num_complex::Complex64;

use crate::error::{CliError, Result};
use crate::records::Format;

pub const OUTPUT_DIR_VAR: &str = "BICOHERENT_OUTPUT_DIR";
pub const MAX_DIM: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    Spectrum,
    Propagate,
    Kernel,
    SliceConverge,
    FeynmanConverge,
    Verify,
}

impl Subcommand {
    pub fn name(&self) -> String {
        self.to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default()
    }
}

fn parse_label(s: &str) -> std::result::Result<Complex64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected RE,IM, got {s:?}"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("{re:?}: {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("{im:?}: {e}"))?;
    Ok(Complex64::new(re, im))
}

/// Numerical laboratory for the quasi-hermitian oscillator.
#[derive(Debug, Clone, Parser)]
#[command(name = "bicoherent", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    /// Squeezing angle, |θ| < π/4.
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub theta: f64,
    /// Propagation time.
    #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
    pub t: f64,
    /// Fock truncation dimension.
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    /// Largest slice count of a convergence study.
    #[arg(long)]
    pub slices: Option<usize>,
    /// Monte Carlo samples.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Gauss–Hermite order per axis.
    #[arg(long, default_value_t = 40)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; stdout when absent. Relative paths are resolved against
    /// $BICOHERENT_OUTPUT_DIR when it is set.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0.6, allow_negative_numbers = true)]
    pub xf: f64,
    #[arg(long, default_value_t = -0.4, allow_negative_numbers = true)]
    pub xi: f64,
    /// Final bicoherent label as RE,IM.
    #[arg(long, default_value = "0.3,-0.2", value_parser = parse_label, allow_hyphen_values = true)]
    pub zf: Complex64,
    /// Initial bicoherent label as RE,IM.
    #[arg(long, default_value = "-0.5,0.4", value_parser = parse_label, allow_hyphen_values = true)]
    pub zi: Complex64,
    /// Number of random label pairs for `kernel`.
    #[arg(long, default_value_t = 10)]
    pub pairs: usize,
}

/// Validated run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub params: ModelParams,
    pub t: f64,
    pub dim: usize,
    pub slices: usize,
    pub samples: usize,
    pub seed: u64,
    pub order: usize,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub xf: f64,
    pub xi: f64,
    pub zf: Complex64,
    pub zi: Complex64,
    pub pairs: usize,
}

fn invalid(msg: String) -> CliError {
    CliError::Validation(msg)
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let params = ModelParams::new(cli.theta)?;
        if !(cli.t > 0.0 && cli.t.is_finite()) {
            return Err(invalid(format!("--t must be positive and finite, got {}", cli.t)));
        }
        if !(2..=MAX_DIM).contains(&cli.dim) {
            return Err(invalid(format!("--dim must lie in 2..={MAX_DIM}, got {}", cli.dim)));
        }
        let slices = cli.slices.unwrap_or(match cli.subcommand {
            Subcommand::FeynmanConverge => 4096,
            _ => 256,
        });
        let min_slices = if cli.subcommand == Subcommand::FeynmanConverge { 2 } else { 1 };
        if slices < min_slices {
            return Err(invalid(format!("--slices must be at least {min_slices}, got {slices}")));
        }
        if cli.samples < 2 {
            return Err(invalid(format!("--samples must be at least 2, got {}", cli.samples)));
        }
        if !(2..=MAX_GH_ORDER).contains(&cli.order) {
            return Err(invalid(format!("--order must lie in 2..={MAX_GH_ORDER}, got {}", cli.order)));
        }
        if cli.pairs == 0 {
            return Err(invalid("--pairs must be positive".into()));
        }
        for (name, v) in [("--xf", cli.xf), ("--xi", cli.xi)] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite")));
            }
        }
        for (name, v) in [("--zf", cli.zf), ("--zi", cli.zi)] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite")));
            }
        }
        Ok(Self {
            subcommand: cli.subcommand,
            params,
            t: cli.t,
            dim: cli.dim,
            slices,
            samples: cli.samples,
            seed: cli.seed,
            order: cli.order,
            format: cli.format,
            output: cli.output,
            xf: cli.xf,
            xi: cli.xi,
            zf: cli.zf,
            zi: cli.zi,
            pairs: cli.pairs,
        })
    }

    /// Output path after applying the output-directory override.
    pub fn output_path(&self, env_dir: Option<PathBuf>) -> Option<PathBuf> {
        let out = self.output.as_ref()?;
        match env_dir {
            Some(dir) if out.is_relative() => Some(dir.join(out)),
            _ => Some(out.clone()),
        }
    }
}
