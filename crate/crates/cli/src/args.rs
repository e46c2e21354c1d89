use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "memtia", version, about = "Circuit simulator for CMOS-memristive transimpedance amplifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Simulation temperature in °C.
    #[arg(long, default_value_t = 27.0, allow_negative_numbers = true)]
    pub temp: f64,
    /// Output directory.
    #[arg(long, default_value = "./out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Linear-range slope tolerance as a fraction of the midband gain.
    #[arg(long, default_value_t = 0.05)]
    pub lin_tol: f64,
    /// Harmonic count for THD, overriding the `.thd` card.
    #[arg(long)]
    pub harmonics: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Netlist path or `builtin:tia1` … `builtin:tia4`.
    pub input: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a netlist; also writes its canonical form.
    Parse(InputArgs),
    /// DC operating point.
    Op(InputArgs),
    /// DC sweep from the `.dc` card.
    Dc(InputArgs),
    /// AC sweep from the `.ac` card.
    Ac(InputArgs),
    /// Transient run from the `.tran` card.
    Tran(InputArgs),
    /// THD versus input amplitude, driving the `.dc` sources.
    Thd(InputArgs),
    /// DC sweep repeated at each `.temp` temperature.
    Temp(InputArgs),
    /// Comparison table of the built-in designs.
    TiaReport(ReportArgs),
    /// Gain-relation residuals of an amplifier design at its operating point.
    CheckDerivation(DerivationArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Comma-separated design numbers.
    #[arg(long, default_value = "1,2,3,4", value_delimiter = ',')]
    pub designs: Vec<u8>,
    /// Use LAMBDA = 0 cards (ideal quad and mirrors).
    #[arg(long)]
    pub idealized: bool,
    /// Skip the THD runs.
    #[arg(long)]
    pub no_thd: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct DerivationArgs {
    #[arg(default_value = "builtin:tia1")]
    pub input: String,
    #[arg(long)]
    pub idealized: bool,
    /// Replace R1 with a memristor at its OFF resistance.
    #[arg(long)]
    pub memristive_bias: bool,
    /// Differential DC input for built-in designs, in µA.
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub input_ua: f64,
    #[command(flatten)]
    pub common: Common,
}
