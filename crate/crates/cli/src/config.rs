use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use crate::Failure;

/// Every option any subcommand understands. Values from `--config` are
/// overridden by flags given on the command line.
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// JSON file with any of these options as keys (snake case).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Surface tensions `t1,t2,t3`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub tensions: Option<Vec<f64>>,

    /// Line tension.
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,

    /// Reduced volumes `w1,w2` (`w = 6 v / pi`).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub volumes: Option<Vec<f64>>,

    /// Cell pressures `p1,p2` relative to the outside.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub pressures: Option<Vec<f64>>,

    /// Single tension `t2` (bulge boundary).
    #[arg(long, allow_negative_numbers = true)]
    pub t2: Option<f64>,

    /// Single tension `t3` (scan, bulge boundary).
    #[arg(long, allow_negative_numbers = true)]
    pub t3: Option<f64>,

    /// Scan resolution per angle axis.
    #[arg(long)]
    pub n: Option<usize>,

    /// Newton starts per angle axis for the line-tension solver.
    #[arg(long)]
    pub grid: Option<usize>,

    /// Oracle grid intervals per axis.
    #[arg(long)]
    pub oracle_n: Option<usize>,

    /// Junction angles in degrees (inference).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub angles: Option<Vec<f64>>,

    /// Angle law for inference; all laws when absent.
    #[arg(long)]
    pub law: Option<String>,

    /// Number of random instances (oracle-check).
    #[arg(long)]
    pub count: Option<usize>,

    /// Seed for randomized commands.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Solution document to draw (svg).
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_parser = ["json", "csv"])]
    pub format: Option<String>,

    /// Re-read the emitted document and recompute its residuals.
    #[arg(long)]
    #[serde(default)]
    pub verify: bool,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl RunConfig {
    /// Reads `--config` if present and applies the flags on top.
    pub fn resolve(flags: RunConfig) -> Result<RunConfig, Failure> {
        let mut base = match &flags.config {
            Some(path) => read_config(path)?,
            None => RunConfig::default(),
        };
        overlay!(base, flags; tensions, kappa, volumes, pressures, t2, t3, n, grid, oracle_n,
                 angles, law, count, seed, input, output, format);
        base.verify |= flags.verify;
        base.config = flags.config;
        base.check_finite()?;
        Ok(base)
    }

    fn check_finite(&self) -> Result<(), Failure> {
        let mut all: Vec<f64> = Vec::new();
        for v in [&self.tensions, &self.volumes, &self.pressures, &self.angles].into_iter().flatten() {
            all.extend(v);
        }
        all.extend([self.kappa, self.t2, self.t3].into_iter().flatten());
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Failure::invalid("all numeric inputs must be finite"));
        }
        Ok(())
    }

    pub fn tensions(&self) -> Result<[f64; 3], Failure> {
        fixed(&self.tensions, "--tensions t1,t2,t3")
    }

    pub fn volumes(&self) -> Result<[f64; 2], Failure> {
        fixed(&self.volumes, "--volumes w1,w2")
    }

    pub fn pressures(&self) -> Result<[f64; 2], Failure> {
        fixed(&self.pressures, "--pressures p1,p2")
    }

    pub fn angles(&self) -> Result<[f64; 3], Failure> {
        fixed(&self.angles, "--angles phi1,phi2,phi3")
    }

    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or(0.0)
    }

    /// `t3` from `--t3`, falling back to the third entry of `--tensions`.
    pub fn t3(&self) -> Result<f64, Failure> {
        match (self.t3, &self.tensions) {
            (Some(t3), _) => Ok(t3),
            (None, Some(t)) if t.len() == 3 => Ok(t[2]),
            _ => Err(Failure::invalid("missing --t3")),
        }
    }

    pub fn t2(&self) -> Result<f64, Failure> {
        match (self.t2, &self.tensions) {
            (Some(t2), _) => Ok(t2),
            (None, Some(t)) if t.len() == 3 => Ok(t[1]),
            _ => Err(Failure::invalid("missing --t2")),
        }
    }
}

fn fixed<const N: usize>(v: &Option<Vec<f64>>, what: &str) -> Result<[f64; N], Failure> {
    let v = v.as_ref().ok_or_else(|| Failure::invalid(format!("missing {what}")))?;
    v.as_slice()
        .try_into()
        .map_err(|_| Failure::invalid(format!("{what} needs {N} values (got {})", v.len())))
}

fn read_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::invalid(format!("bad config {}: {e}", path.display())))
}
