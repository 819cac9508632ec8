use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use portalwave::bake::{bake_all, BakeConfig, BakedDataset};
use portalwave::bench::{format_table, gates, run_bench, BenchConfig};
use portalwave::engine::{Engine, QueryResult};
use portalwave::fixtures;
use portalwave::occlusion::OcclusionConfig;
use portalwave::portalsearch::SearchConfig;
use portalwave::scene::{load_scene, SceneDescription};
use portalwave::sweep::{run_sweep, write_csv, write_field_pgm, MapQuantity, SweepSpec};
use portalwave::verify::{verify, VerifyConfig};
use serde::Serialize;

use crate::args::{
    BakeArgs, BenchArgs, Cli, Command, FixtureArgs, MapKind, QueryArgs, RuntimeArgs, SweepArgs,
    VerifyArgs,
};

/// Like `println!`, but a closed stdout is an error instead of a panic.
macro_rules! out {
    ($($t:tt)*) => {
        writeln!(io::stdout().lock(), $($t)*)?
    };
}

/// A check ran to completion and did not meet its threshold.
#[derive(Debug)]
pub struct VerificationFailed(pub String);

impl std::error::Error for VerificationFailed {}

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bake(a) => bake(a),
        Command::Query(a) => query(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Bench(a) => bench(a),
        Command::Fixture(a) => fixture(a),
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn scene_at(path: &Path) -> Result<SceneDescription> {
    load_scene(path).with_context(|| format!("loading scene {}", path.display()))
}

#[derive(Serialize)]
struct BakeSummary {
    out: String,
    probes: usize,
    portal_probes: usize,
    portals: usize,
    emitter_samples: usize,
    bytes: usize,
    seconds: f64,
}

fn bake(a: BakeArgs) -> Result<()> {
    let scene = scene_at(&a.scene)?;
    let defaults = BakeConfig::default();
    let cfg = BakeConfig {
        speed_of_sound: a.speed_of_sound.unwrap_or(defaults.speed_of_sound),
        delay_quantum: a.delay_quantum.unwrap_or(defaults.delay_quantum),
        max_distance: a.max_distance.unwrap_or(defaults.max_distance),
        ..defaults
    };
    let t = Instant::now();
    let ds = bake_all(&scene, &cfg)?;
    let seconds = t.elapsed().as_secs_f64();
    let bytes = ds.to_bytes()?;
    std::fs::write(&a.out, &bytes).with_context(|| format!("writing {}", a.out.display()))?;
    let summary = BakeSummary {
        out: a.out.display().to_string(),
        probes: ds.probes.len(),
        portal_probes: ds.probes.len() - ds.probes.lattice_count(),
        portals: scene.portals.len(),
        emitter_samples: ds.lattice.len(),
        bytes: bytes.len(),
        seconds,
    };
    if a.json {
        return print_json(&summary);
    }
    out!(
        "baked {} probes ({} lattice, {} portal) for {} portals in {:.2} s",
        summary.probes,
        ds.probes.lattice_count(),
        summary.portal_probes,
        summary.portals,
        seconds
    );
    out!(
        "{} emitter samples per probe, {} bytes -> {}",
        summary.emitter_samples,
        summary.bytes,
        summary.out
    );
    Ok(())
}

fn engine(r: &RuntimeArgs) -> Result<Engine> {
    let scene = scene_at(&r.scene)?;
    let ds = BakedDataset::load(&r.bake)
        .with_context(|| format!("loading bake {}", r.bake.display()))?;
    let search = SearchConfig {
        epsilon: r.epsilon.unwrap_or(SearchConfig::default().epsilon),
        ..SearchConfig::default()
    };
    let engine = Engine::new(scene, ds, search, OcclusionConfig::default())?;
    for &(id, alpha) in &r.alpha {
        engine.set_portal_open_fraction(id, alpha)?;
    }
    Ok(engine)
}

fn fmt_vec(v: portalwave::Vec3) -> String {
    format!("({:.3}, {:.3}, {:.3})", v.x, v.y, v.z)
}

fn print_query(q: &QueryResult) -> Result<()> {
    let d = &q.debug;
    if !q.audible {
        out!("no path: source is inaudible at the listener");
    }
    out!("dist            {:.3} m", d.dist);
    out!("dry             {:.2} dB", d.dry);
    out!("wet             {:.2} dB", d.wet);
    out!("arrival         {}", fmt_vec(d.arrival));
    out!("alpha           {:.4}", q.alpha);
    let ids: Vec<String> = q.search.portals.iter().map(|k| k.to_string()).collect();
    out!("portals         [{}]", ids.join(", "));
    match q.search.last_portal {
        Some(k) => out!("last portal     {k}"),
        None => out!("last portal     -"),
    }
    match d.distance_diff {
        Some(x) => out!("distance diff   {x:.3} m"),
        None => out!("distance diff   -"),
    }
    let s = &q.search.stats;
    out!(
        "stats           tested {} culled {}+{} evaluated {} unreachable {} lookups {}",
        s.portals_tested,
        s.culled_bbox,
        s.culled_ellipsoid,
        s.full_evaluations,
        s.unreachable,
        s.lookups
    );
    for r in &q.search.records {
        out!(
            "  portal {:>4}  slack {:>8.3} m  pierces {:<5}  {}",
            r.id,
            r.slack,
            r.pierces,
            if r.accepted { "on path" } else { "off path" }
        );
    }
    Ok(())
}

fn query(a: QueryArgs) -> Result<()> {
    let engine = engine(&a.runtime)?;
    let q = engine.query(a.source, a.listener)?;
    if a.json {
        return print_json(&q);
    }
    print_query(&q)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let engine = engine(&a.runtime)?;
    let text = std::fs::read_to_string(&a.spec)
        .with_context(|| format!("reading {}", a.spec.display()))?;
    let spec: SweepSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", a.spec.display()))?;
    let rows = run_sweep(&engine, &spec)?;
    if let Some(path) = &a.map_out {
        let quantity = match a.map_quantity {
            MapKind::Delay => MapQuantity::Delay,
            MapKind::Loudness => MapQuantity::Loudness,
        };
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(f);
        write_field_pgm(
            engine.store().dataset(),
            a.map_probe,
            quantity,
            a.map_layer,
            &mut w,
        )?;
        w.flush()?;
    }
    if a.json {
        return print_json(&rows);
    }
    match &a.out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(f);
            write_csv(&rows, &mut w)?;
            w.flush()?;
            eprintln!("{} rows -> {}", rows.len(), path.display());
        }
        None => write_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn verify_cmd(a: VerifyArgs) -> Result<()> {
    let scene = scene_at(&a.scene)?;
    let ds = match &a.bake {
        Some(p) => {
            BakedDataset::load(p).with_context(|| format!("loading bake {}", p.display()))?
        }
        None => bake_all(&scene, &BakeConfig::default())?,
    };
    let search = SearchConfig {
        epsilon: a.epsilon.unwrap_or(SearchConfig::default().epsilon),
        ..SearchConfig::default()
    };
    let engine = Engine::new(scene, ds, search, OcclusionConfig::default())?;
    let report = verify(
        &engine,
        &VerifyConfig {
            pairs: a.pairs,
            seed: a.seed,
            portal_clearance: a.clearance,
            refinement: a.refine as usize,
        },
    )?;
    if a.json {
        print_json(&report)?;
    } else {
        out!(
            "pairs {}  agree {}  boundary {}  hard {}  disconnected {}  agreement {:.2}%",
            report.pairs,
            report.agree,
            report.boundary,
            report.hard,
            report.disconnected,
            100.0 * report.agreement_rate()
        );
        for d in &report.disagreements {
            out!(
                "  {:?}  {} -> {}  search {:?}  oracle {:?}",
                d.comparison.class,
                fmt_vec(d.source),
                fmt_vec(d.listener),
                d.found,
                d.pierced
            );
        }
    }
    if !report.passed() {
        bail!(VerificationFailed(format!(
            "{} hard disagreements, {:.2}% agreement",
            report.hard,
            100.0 * report.agreement_rate()
        )));
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        doors: a.doors,
        queries: a.queries,
        seed: a.seed,
        max_distance: a.max_distance,
        local_radius: a.local_radius,
    };
    if cfg.doors.is_empty() || cfg.doors.contains(&0) || cfg.queries == 0 {
        bail!("bench needs at least one non-zero door count and query");
    }
    let rows = run_bench(&cfg)?;
    let gates = gates(&rows);
    if a.json {
        #[derive(Serialize)]
        struct Out<'a> {
            rows: &'a [portalwave::bench::BenchRow],
            gates: &'a [portalwave::bench::Gate],
        }
        print_json(&Out {
            rows: &rows,
            gates: &gates,
        })?;
    } else {
        print!("{}", format_table(&rows));
        for g in &gates {
            out!(
                "{} {}: {:.2} (limit {:.2})",
                if g.passed { "ok  " } else { "FAIL" },
                g.name,
                g.value,
                g.limit
            );
        }
    }
    if a.check {
        let failed: Vec<&str> = gates
            .iter()
            .filter(|g| !g.passed)
            .map(|g| g.name.as_str())
            .collect();
        if !failed.is_empty() {
            bail!(VerificationFailed(failed.join(", ")));
        }
    }
    Ok(())
}

fn fixture(a: FixtureArgs) -> Result<()> {
    let count = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("bad count {s:?}"))
    };
    let scene = match a.name.split_once(':') {
        None => match a.name.as_str() {
            "two-room" => fixtures::two_room(),
            "three-room" => fixtures::three_room(),
            "courtyard" => fixtures::courtyard(),
            "corridor" => fixtures::corridor(),
            other => bail!("unknown fixture {other:?}"),
        },
        Some(("series", n)) => fixtures::rooms_in_series(count(n)?),
        Some(("office", n)) => fixtures::office(count(n)?),
        Some(_) => bail!("unknown fixture {:?}", a.name),
    };
    scene.save(&a.out)?;
    eprintln!("{} portals -> {}", scene.portals.len(), a.out.display());
    Ok(())
}
