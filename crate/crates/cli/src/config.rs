//! Command-line configuration and its JSON form.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mixedstab::eigensolve::DEFAULT_ZERO_THRESHOLD;
use mixedstab::mesh::Family;
use mixedstab::stability::Table;

/// A single mesh size or an inclusive even range `lo..hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NSpec {
    Single(usize),
    Range(usize, usize),
}

impl NSpec {
    pub fn values(self) -> Vec<usize> {
        match self {
            NSpec::Single(n) => vec![n],
            NSpec::Range(lo, hi) => (lo..=hi).filter(|n| (n - lo) % 2 == 0).collect(),
        }
    }

    pub fn bounds(self) -> (usize, usize) {
        match self {
            NSpec::Single(n) => (n, n),
            NSpec::Range(lo, hi) => (lo, hi),
        }
    }
}

impl FromStr for NSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("'{t}' is not a mesh size"));
        match s.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
                if lo > hi {
                    return Err(format!("empty range {lo}..{hi}"));
                }
                Ok(NSpec::Range(lo, hi))
            }
            None => Ok(NSpec::Single(num(s)?)),
        }
    }
}

impl fmt::Display for NSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NSpec::Single(n) => write!(f, "{n}"),
            NSpec::Range(lo, hi) => write!(f, "{lo}..{hi}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Which pencil `spectrum` prints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pencil {
    Infsup,
    Laplace,
    Stokes,
    DivDiv,
    Babuska,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CaseArgs {
    /// Mesh family.
    #[arg(long, default_value = "diagonal")]
    pub family: Family,
    /// Subdivisions per side: `8` or an even range `4..16`.
    #[arg(long, default_value = "4")]
    pub n: NSpec,
    /// Polynomial degree of the velocity space.
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// Analyze an imported mesh file instead of a generated family.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Eigenvalues below this count as zero.
    #[arg(long, env = "MIXEDSTAB_THRESHOLD", default_value_t = DEFAULT_ZERO_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a mesh and write it in the text mesh format.
    Mesh {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brezzi inf-sup constants and spurious-mode dimension.
    Infsup {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Also compute the Babuska constant.
        #[arg(long)]
        gamma: bool,
        /// Also compute the Stokes inf-sup constant.
        #[arg(long)]
        stokes: bool,
        /// Also compute the coercivity constant.
        #[arg(long)]
        alpha: bool,
        /// Count spurious modes at thresholds 1e-3 through 1e-6.
        #[arg(long)]
        threshold_sweep: bool,
        /// Write every assembled matrix in Matrix Market format into this directory.
        #[arg(long)]
        dump_matrices: Option<PathBuf>,
    },
    /// Full eigenvalue list of one pencil.
    Spectrum {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value = "infsup")]
        problem: Pencil,
    },
    /// Coercivity constant on the discrete kernel.
    Coercivity {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Smallest eigenvalue of the mixed Laplace eigenproblem.
    LaplaceEig {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Inf-sup constant in the H1 velocity norm.
    StokesInfsup {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Convergence study of the mixed source problem.
    Converge {
        #[arg(long, default_value = "diagonal")]
        family: Family,
        #[arg(long, default_value_t = 2)]
        r: usize,
        /// Comma-separated mesh sizes (default depends on r).
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        #[command(flatten)]
        output: OutputArgs,
        /// Directory for gnuplot files of normalized errors.
        #[arg(long)]
        gnuplot: Option<PathBuf>,
    },
    /// Reproduce one of the inf-sup tables.
    Tables {
        #[arg(long, default_value = "T2")]
        which: Table,
        #[arg(long)]
        n: Option<NSpec>,
        #[arg(long, env = "MIXEDSTAB_THRESHOLD", default_value_t = DEFAULT_ZERO_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Stability laboratory for Lagrange x discontinuous mixed elements.
#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "mixed-stab", version)]
pub struct RunConfig {
    /// Worker threads for independent cases (all cores when absent).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

impl RunConfig {
    /// Short hash of the JSON form, identifying the configuration. Thread
    /// count and output path do not affect results and are left out.
    pub fn hash(&self) -> String {
        fn strip(v: &mut serde_json::Value) {
            if let serde_json::Value::Object(map) = v {
                map.remove("jobs");
                map.remove("out");
                map.values_mut().for_each(strip);
            }
        }
        let mut value = serde_json::to_value(self).expect("config serializes");
        strip(&mut value);
        let digest = Sha256::digest(value.to_string().as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    pub fn provenance(&self) -> String {
        format!("# mixed-stab {} {}", env!("CARGO_PKG_VERSION"), self.hash())
    }
}
