use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use portalwave::Vec3;

#[derive(Debug, Parser)]
#[command(
    name = "portalwave",
    version,
    about = "Portal search and occlusion over baked acoustic fields"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Precompute the probe fields of a scene.
    Bake(BakeArgs),
    /// Evaluate one source/listener pair.
    Query(QueryArgs),
    /// Walk a listener path and write a CSV trace.
    Sweep(SweepArgs),
    /// Compare portal search against the grid shortest-path oracle.
    Verify(VerifyArgs),
    /// Measure lookup counts and timings on synthetic office floors.
    Bench(BenchArgs),
    /// Write a built-in test scene as scene JSON.
    Fixture(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct BakeArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Initial delay quantum, s.
    #[arg(long, value_parser = positive)]
    pub delay_quantum: Option<f64>,
    /// Speed of sound, m/s.
    #[arg(long = "c", value_parser = positive)]
    pub speed_of_sound: Option<f64>,
    /// Geodesic radius simulated around each probe, m.
    #[arg(long, value_parser = positive)]
    pub max_distance: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

/// Scene, bake file and search options shared by run-time commands.
#[derive(Debug, Args)]
pub struct RuntimeArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub bake: PathBuf,
    /// Portal open fraction override, `id=alpha`. Repeatable.
    #[arg(long = "alpha", value_name = "K=V", value_parser = parse_alpha)]
    pub alpha: Vec<(usize, f64)>,
    /// Delay tolerance of the portal criterion, s.
    #[arg(long, value_parser = positive)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub runtime: RuntimeArgs,
    #[arg(long, value_name = "X,Y,Z", value_parser = parse_vec3)]
    pub source: Vec3,
    #[arg(long, value_name = "X,Y,Z", value_parser = parse_vec3)]
    pub listener: Vec3,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub runtime: RuntimeArgs,
    /// Sweep description (JSON): listener_path, step, sources, alpha ramps.
    #[arg(long)]
    pub spec: PathBuf,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a grayscale map of one probe's field.
    #[arg(long)]
    pub map_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MapKind::Delay)]
    pub map_quantity: MapKind,
    #[arg(long, default_value_t = 0)]
    pub map_probe: usize,
    /// Emitter-lattice z layer.
    #[arg(long, default_value_t = 0)]
    pub map_layer: usize,
    /// Print rows as JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MapKind {
    Delay,
    Loudness,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Bake file; the scene is baked in memory when omitted.
    #[arg(long)]
    pub bake: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = positive)]
    pub epsilon: Option<f64>,
    /// Oracle grid subdivision factor.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=8))]
    pub refine: u64,
    /// Keep endpoints at least this far from any portal, m.
    #[arg(long, default_value_t = 0.0)]
    pub clearance: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Door counts of the synthetic office floors.
    #[arg(long, value_delimiter = ',', default_values_t = [16usize, 64, 256])]
    pub doors: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub queries: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Listener distance from the source, m.
    #[arg(long, default_value_t = 8.0, value_parser = positive)]
    pub local_radius: f64,
    /// Bake simulation radius, m.
    #[arg(long, default_value_t = 40.0, value_parser = positive)]
    pub max_distance: f64,
    /// Exit with status 3 when a scaling gate fails.
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    /// two-room, three-room, courtyard, corridor, series:N or office:N.
    pub name: String,
    #[arg(long)]
    pub out: PathBuf,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("{v} is not a positive number")),
        Err(e) => Err(e.to_string()),
    }
}

pub fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {s:?}"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"))?;
        if !slot.is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

pub fn parse_alpha(s: &str) -> Result<(usize, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected id=alpha, got {s:?}"))?;
    let id = k
        .trim()
        .parse::<usize>()
        .map_err(|e| format!("portal id {k:?}: {e}"))?;
    let a = v
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("alpha {v:?}: {e}"))?;
    if !(0.0..=1.0).contains(&a) {
        return Err(format!("alpha {a} outside [0, 1]"));
    }
    Ok((id, a))
}
