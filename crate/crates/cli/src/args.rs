use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "thimbleq",
    version,
    about = "Nonadiabatic transition probabilities of driven two-level systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Singular points, saddles, thimble polylines and the DDP contour of one model (JSON).
    Probe {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        numerics: NumericArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the requested methods at a single parameter point.
    Estimate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        methods: MethodArgs,
        #[command(flatten)]
        numerics: NumericArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emits the data behind one of the benchmark figures.
    Figure {
        #[arg(value_enum)]
        id: FigureId,
        /// Grid points along the swept axis.
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        methods: MethodArgs,
        #[command(flatten)]
        numerics: NumericArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sweeps one model parameter.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// Parameter to vary: lambda, tau, T, eE, eps, omega, m, pperp, pz or gamma.
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 40)]
        count: usize,
        #[arg(long, value_enum, default_value_t = Spacing::Linear)]
        spacing: Spacing,
        #[command(flatten)]
        methods: MethodArgs,
        #[command(flatten)]
        numerics: NumericArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// lz, mlz, constant, sauter or dasm.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    #[arg(long = "T", allow_negative_numbers = true)]
    pub big_t: Option<f64>,
    #[arg(long = "eE", allow_negative_numbers = true)]
    pub e_field: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub pperp: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub pz: Option<f64>,
    /// Keldysh parameter; sets ω = γ eE / m for the field models.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Model document with `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// constant, fig3, fig5, fig7 or fig8.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct NumericArgs {
    /// Relative tolerance of the ODE and quadrature oracles.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Search window: `H` for [−H, H] × (0, H], or `re_min,re_max,im_min,im_max`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MethodArgs {
    /// Comma-separated subset of ddp, thimble-gaussian, thimble-exact, ode, quadrature.
    #[arg(long, value_delimiter = ',', value_enum)]
    pub methods: Option<Vec<MethodId>>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodId {
    Ddp,
    ThimbleGaussian,
    ThimbleExact,
    Ode,
    Quadrature,
}

impl MethodId {
    pub const ALL: [MethodId; 5] = [
        MethodId::Ddp,
        MethodId::ThimbleGaussian,
        MethodId::ThimbleExact,
        MethodId::Ode,
        MethodId::Quadrature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::Ddp => "ddp",
            MethodId::ThimbleGaussian => "thimble-gaussian",
            MethodId::ThimbleExact => "thimble-exact",
            MethodId::Ode => "ode",
            MethodId::Quadrature => "quadrature",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FigureId {
    Fig3,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}
