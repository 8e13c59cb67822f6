use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use spatial_entropy::{
    BinGrid, KdeJointConfig, KernelFamily, KernelSpec, LossKind, Padding, Scope, WindowConfig,
};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "spatial-entropy", version, about = "Spatial entropy statistics and losses for images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// 1D and spatial entropy of an image, hard and kernel-smoothed.
    Entropy {
        input: PathBuf,
        #[command(flatten)]
        stats: StatsArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Spatial KL, cross-entropy and Hellinger between two images.
    Kl {
        target: PathBuf,
        pred: PathBuf,
        #[command(flatten)]
        stats: StatsArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Gradient descent on `init` toward the spatial statistics of `target`.
    Match {
        target: PathBuf,
        init: PathBuf,
        #[command(flatten)]
        stats: StatsArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[arg(long, default_value_t = 1e3)]
        lr: f64,
        /// kl, ce or hellinger.
        #[arg(long, default_value = "kl")]
        loss: LossKind,
        /// Where to write the optimized image (PGM, or PNG with the `png` feature).
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare noise predictions on a synthetic forward-diffusion sample.
    NoiseDemo {
        /// Number of diffusion steps T.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 1e-4, allow_hyphen_values = true)]
        beta_start: f64,
        #[arg(long, default_value_t = 0.02, allow_hyphen_values = true)]
        beta_end: f64,
        /// Timestep to sample, 1..=T.
        #[arg(long, default_value_t = 50)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Side length of the square test image.
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// `vmin:vmax` on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueRange {
    pub vmin: f64,
    pub vmax: f64,
}

impl FromStr for ValueRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected vmin:vmax, got `{s}`"))?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("bad range bound `{v}`: {e}"));
        Ok(Self {
            vmin: parse(a)?,
            vmax: parse(b)?,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    /// Number of intensity bins. Defaults to one bin per integer level.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Bin range as `vmin:vmax`. Defaults to the integer-level grid of the input.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<ValueRange>,
    /// box, gaussian or sigmoid.
    #[arg(long, default_value = "gaussian")]
    pub kernel: KernelFamily,
    /// Kernel bandwidth in intensity units.
    #[arg(long, default_value_t = 1.0)]
    pub bandwidth: f64,
    #[arg(long, default_value_t = 11)]
    pub window: usize,
    #[arg(long, default_value_t = 11)]
    pub stride: usize,
    /// Let windows hang over the border, mirroring samples back in.
    #[arg(long)]
    pub reflect: bool,
    /// Use whole-image statistics instead of windows.
    #[arg(long)]
    pub global: bool,
    /// Random neighbor stencils to average losses over (0 keeps the uniform stencil).
    #[arg(long, default_value_t = 0)]
    pub shuffles: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Smoothing added inside logarithms.
    #[arg(long, default_value_t = spatial_entropy::losses::DEFAULT_EPS)]
    pub eps: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write a JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write a CSV (per-window values, or the loss curve for `match`) here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Start the CSV with a header row.
    #[arg(long)]
    pub header: bool,
}

impl StatsArgs {
    /// Bin grid for images on `[0, maxval]`.
    pub fn bin_grid(&self, maxval: f64) -> Result<BinGrid, CliError> {
        let (vmin, vmax) = match self.range {
            Some(r) => (r.vmin, r.vmax),
            None => (-0.5, maxval + 0.5),
        };
        let count = self.bins.unwrap_or_else(|| (maxval.round() as usize) + 1);
        Ok(BinGrid::new(count, vmin, vmax)?)
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec, CliError> {
        Ok(KernelSpec::with_bandwidth(self.kernel, self.bandwidth)?)
    }

    pub fn window_config(&self) -> Result<WindowConfig, CliError> {
        let padding = if self.reflect { Padding::Reflect } else { Padding::None };
        Ok(WindowConfig::new(self.window, self.stride, padding)?)
    }

    pub fn scope(&self) -> Result<Scope, CliError> {
        let window = self.window_config()?;
        Ok(if self.global { Scope::Global } else { Scope::Windowed(window) })
    }

    pub fn kde_config(&self, maxval: f64) -> Result<KdeJointConfig, CliError> {
        if !(self.eps > 0.0) {
            return Err(CliError::Usage(format!("--eps must be positive, got {}", self.eps)));
        }
        Ok(KdeJointConfig::new(self.kernel_spec()?, self.bin_grid(maxval)?, self.scope()?))
    }

    /// Every flag as given, for the report.
    pub fn echo(&self) -> Value {
        json!({
            "bins": self.bins,
            "range": self.range.map(|r| format!("{}:{}", r.vmin, r.vmax)),
            "kernel": self.kernel.name(),
            "bandwidth": self.bandwidth,
            "window": self.window,
            "stride": self.stride,
            "reflect": self.reflect,
            "global": self.global,
            "shuffles": self.shuffles,
            "seed": self.seed,
            "eps": self.eps,
        })
    }
}

/// The configuration actually used once defaults are resolved.
pub fn describe_config(cfg: &KdeJointConfig) -> Value {
    let scope = match cfg.scope {
        Scope::Global => json!("global"),
        Scope::Windowed(w) => json!({
            "window": w.window,
            "stride": w.stride,
            "padding": match w.padding { Padding::None => "none", Padding::Reflect => "reflect" },
        }),
    };
    json!({
        "bins": cfg.bins.bin_count(),
        "vmin": cfg.bins.vmin(),
        "vmax": cfg.bins.vmax(),
        "kernel": cfg.kernel1.family().name(),
        "bandwidth": cfg.kernel1.bandwidth(),
        "truncation_radius": cfg.kernel1.truncation_radius(),
        "neighbor_weights": cfg.weights.weights().to_vec(),
        "scope": scope,
    })
}
