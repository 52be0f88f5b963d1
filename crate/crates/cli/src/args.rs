use clap::{Args, Parser, Subcommand, ValueEnum};

const GRAMMAR: &str = "\
Function literals use z as the variable, i as the imaginary unit, + - * / and ^
with an integer exponent, e.g. \"(z^2+1)/(z-2)\", \"2i*z - 1\", \"z^-3\". There is
no implicit multiplication: write 2*z. Complex flags take \"a+bi\", \"bi\" or \"a\".
Targets are comma-separated constants or inf.";

#[derive(Debug, Parser)]
#[command(name = "hahn", version, about = "Hahn difference operator and Nevanlinna functionals on rational functions", after_help = GRAMMAR)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print D^k g in canonical form.
    Diff {
        #[arg(long = "fn", value_name = "EXPR", allow_hyphen_values = true)]
        function: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Use the closed-form k-term expansion instead of repeated application.
        #[arg(long)]
        expand: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Nevanlinna table over the radius grid.
    Table {
        #[arg(long = "fn", value_name = "EXPR", allow_hyphen_values = true)]
        function: String,
        #[arg(long, value_name = "LIST", default_value = "", allow_hyphen_values = true)]
        targets: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run a value-distribution check; exit 0 on pass, 3 on fail.
    Verify {
        #[command(subcommand)]
        check: Check,
    },
    /// Series solution of D^k g + A_{k-1} D^{k-1} g + ... + A_0 g = 0 at z0.
    SolveHeq {
        /// A_0,...,A_{k-1} as expressions in z.
        #[arg(long, value_name = "EXPR,...", allow_hyphen_values = true)]
        coeffs: String,
        /// a_0,...,a_{k-1}.
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        init: String,
        /// Truncation order N.
        #[arg(long)]
        order: usize,
        /// Residual points z; defaults to z0 + {0.05, 0.1, 0.2} times the empirical radius.
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        points: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Subcommand)]
pub enum Check {
    /// Second main theorem: (l-2) T <= sum of N-hat + slack_fraction * T.
    Smt {
        #[arg(long = "fn", value_name = "EXPR", allow_hyphen_values = true)]
        function: String,
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        targets: String,
        /// Assert from this radius on; defaults to the grid midpoint.
        #[arg(long)]
        assert_from: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// m(r, D^k g / g) = o(T(r, g)) along the grid.
    Lodl {
        #[arg(long = "fn", value_name = "EXPR", allow_hyphen_values = true)]
        function: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Defect relation over a target list.
    Defects {
        #[arg(long = "fn", value_name = "EXPR", allow_hyphen_values = true)]
        function: String,
        #[arg(long, value_name = "LIST", default_value = "", allow_hyphen_values = true)]
        targets: String,
        #[command(flatten)]
        common: Common,
    },
    /// Classify a value as Hahn-Picard or not on the grid.
    Picard {
        #[arg(long = "fn", value_name = "EXPR", allow_hyphen_values = true)]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[command(flatten)]
        common: Common,
    },
    /// Hahn-sharing of five values by two functions.
    Share {
        #[arg(long = "fn", value_name = "EXPR", allow_hyphen_values = true)]
        function: String,
        #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
        other: String,
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        targets: String,
        #[arg(long, default_value_t = 0)]
        bound: usize,
        #[command(flatten)]
        common: Common,
    },
    /// f^3 + (D f)^3 - 1 is not the zero function.
    Fermat {
        #[arg(long = "fn", value_name = "EXPR", allow_hyphen_values = true)]
        function: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
    pub q: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub c: String,
    #[arg(long, default_value_t = 1.0)]
    pub rmin: f64,
    #[arg(long, default_value_t = 1048576.0)]
    pub rmax: f64,
    /// Number of geometric grid radii.
    #[arg(long, default_value_t = 41)]
    pub grid: usize,
    /// Base quadrature panels on the circle.
    #[arg(long, default_value_t = 64)]
    pub theta: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub cluster_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub quad_tol: f64,
    #[arg(long, default_value_t = 0.05)]
    pub slack_fraction: f64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_name = "PATH")]
    pub output: Option<String>,
    /// Significant digits in rendered expressions.
    #[arg(long, default_value_t = 12)]
    pub precision: usize,
}
