use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// A closed interval written `a..b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once("..").ok_or_else(|| format!("expected `a..b`, got `{s}`"))?;
        let min: f64 = a.trim().parse().map_err(|e| format!("bad lower bound `{a}`: {e}"))?;
        let max: f64 = b.trim().parse().map_err(|e| format!("bad upper bound `{b}`: {e}"))?;
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(format!("need finite a < b, got `{s}`"));
        }
        Ok(Range { min, max })
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("`{s}`: {e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive, got `{s}`"))
    }
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "maxsheet", version, about = "Evolve and analyse timelike maximal sheets in R^{1+2}")]
pub struct Cli {
    /// Directory for files written under default names.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

/// Where the initial data come from.
#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false, id = "source")]
pub struct Input {
    /// Gallery entry name.
    #[arg(long)]
    pub gallery: Option<String>,
    /// CSV with header `s,c1,c2,v1,v2`.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

/// Parameters shared by every command that reads initial data.
#[derive(Debug, Args, Serialize)]
pub struct Source {
    #[command(flatten)]
    pub input: Input,
    /// Cap parameter of `cigar` and `periodic_wedge`.
    #[arg(long = "L", value_parser = positive)]
    pub l: Option<f64>,
    /// Normal speed of `plane`.
    #[arg(long)]
    pub speed: Option<f64>,
    /// Parameter window `a..b` for data on the whole line.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<Range>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    /// Evaluate the sheet on a grid and export a mesh.
    Evolve(EvolveArgs),
    /// Locate the singular set on a characteristic diamond.
    Singular(SingularArgs),
    /// Cross-section curvature, blow-up integrals and mixed norms.
    Curvature(CurvatureArgs),
    /// Separating direction, graph check and self-intersections.
    Embed(EmbedArgs),
    /// Classify the tangent discontinuity on a slice.
    Classify(ClassifyArgs),
    /// Build a gallery entry and optionally run its regression.
    Gallery(GalleryArgs),
    /// Short-time existence horizon.
    Horizon(HorizonArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, allow_hyphen_values = true, default_value = "-2..2")]
    pub s: Range,
    #[arg(long, allow_hyphen_values = true, default_value = "0..1")]
    pub t: Range,
    /// Largest grid spacing in both directions.
    #[arg(long, value_parser = positive, default_value = "0.05")]
    pub step: f64,
    /// OBJ mesh path (default `<out>/sheet.obj`).
    #[arg(long)]
    pub obj: Option<PathBuf>,
    /// Optional CSV of positions and first derivatives.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SingularArgs {
    #[command(flatten)]
    pub source: Source,
    /// Diamond endpoints `s1 s2` (default: the entry's reference diamond, else -3 3).
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["S1", "S2"])]
    pub diamond: Option<Vec<f64>>,
    /// Null-grid spacing.
    #[arg(long, value_parser = positive, default_value = "0.01")]
    pub step: f64,
    /// Only scan `|t| ≤ t_max`.
    #[arg(long, value_parser = positive)]
    pub t_max: Option<f64>,
    /// CSV path (default `<out>/singular.csv`).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, allow_hyphen_values = true, default_value = "-1..1")]
    pub s: Range,
    #[arg(long, allow_hyphen_values = true, default_value = "-0.5..0.5")]
    pub t: Range,
    #[arg(long, value_parser = positive, default_value = "0.1")]
    pub step: f64,
    /// Singular anchor `s0 t0` for the blow-up integral.
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["S0", "T0"])]
    pub anchor: Option<Vec<f64>>,
    /// Cut-off ε of the blow-up integral.
    #[arg(long, value_parser = positive, default_value = "0.5")]
    pub epsilon: f64,
    /// Mixed-norm exponents p (closed periodic data only).
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Mixed-norm exponents q.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<f64>,
    /// Time window `ta..t0` of the mixed norm, ending at the singular time.
    #[arg(long, allow_hyphen_values = true)]
    pub norm_window: Option<Range>,
    /// Sample CSV path (default `<out>/curvature.csv`).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Norm-table CSV path (default `<out>/norms.csv`).
    #[arg(long)]
    pub norms_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub source: Source,
    /// Initial interval `s1 s2`; the diamond over it is checked.
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["S1", "S2"], default_values_t = [-5.0, 5.0])]
    pub interval: Vec<f64>,
    /// Grid spacing of the graph check.
    #[arg(long, value_parser = positive, default_value = "0.05")]
    pub step: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: Source,
    /// Slice time (default: the entry's reference slice).
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    /// Parameter interval `a b` on the slice.
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["A", "B"])]
    pub interval: Option<Vec<f64>>,
    /// Also search `t_range` for the first tangent sign change.
    #[arg(long, allow_hyphen_values = true)]
    pub t_range: Option<Range>,
}

#[derive(Debug, Args, Serialize)]
pub struct GalleryArgs {
    /// Entry name, or `all`.
    pub name: String,
    #[arg(long = "L", value_parser = positive)]
    pub l: Option<f64>,
    #[arg(long)]
    pub speed: Option<f64>,
    /// Run the regression against the entry's closed forms.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct HorizonArgs {
    #[command(flatten)]
    pub source: Source,
    /// Sampling step of the oscillation scan.
    #[arg(long, value_parser = positive, default_value = "0.001")]
    pub step: f64,
}
