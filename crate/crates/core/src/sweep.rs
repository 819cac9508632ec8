//! Listener trajectories with scheduled portal motion, written as CSV, and
//! grayscale maps of baked fields.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bake::BakedDataset;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::geom::Vector3;

type Vec3 = Vector3<f64>;

/// Linear open-fraction ramp of one portal over the whole sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaRamp {
    pub portal: usize,
    pub from: f64,
    pub to: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Listener polyline vertices.
    pub listener_path: Vec<Vec3>,
    /// Distance between listener positions, m.
    pub step: f64,
    pub sources: Vec<Vec3>,
    #[serde(default)]
    pub alpha: Vec<AlphaRamp>,
}

impl SweepSpec {
    pub fn validate(&self, engine: &Engine) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sweep step {} must be positive",
                self.step
            )));
        }
        let bounds = engine.scene().grid.bounds();
        for p in self.listener_path.iter().chain(&self.sources) {
            if !p.is_finite() || !bounds.contains(*p) {
                return Err(Error::OutOfBounds(p.to_array()));
            }
        }
        for r in &self.alpha {
            if engine.open_fraction(r.portal).is_none() {
                return Err(Error::UnknownPortal(r.portal));
            }
            for a in [r.from, r.to] {
                if !(0.0..=1.0).contains(&a) {
                    return Err(Error::OpenFractionOutOfRange(a));
                }
            }
        }
        Ok(())
    }
}

/// Points every `step` along the polyline, starting at its first vertex.
/// The last vertex is included when it falls on the step lattice.
pub fn sample_polyline(path: &[Vec3], step: f64) -> Vec<Vec3> {
    let mut out = Vec::new();
    let Some(&first) = path.first() else {
        return out;
    };
    out.push(first);
    let total: f64 = path.windows(2).map(|w| w[0].distance(w[1])).sum();
    let n = ((total / step) + 1e-9).floor() as usize;
    let mut seg = 0;
    let mut seg_start = 0.0;
    for i in 1..=n {
        let s = i as f64 * step;
        while seg + 1 < path.len() - 1 && seg_start + path[seg].distance(path[seg + 1]) < s {
            seg_start += path[seg].distance(path[seg + 1]);
            seg += 1;
        }
        let (a, b) = (path[seg], path[seg + 1]);
        let len = a.distance(b);
        let t = if len > 0.0 {
            ((s - seg_start) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(a + (b - a) * t);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub step: usize,
    pub source: usize,
    pub position: Vec3,
    pub alpha: f64,
    pub portals: Vec<usize>,
    pub last_portal: Option<usize>,
    pub audible: bool,
    pub dist: f64,
    pub dry: f64,
    pub wet: f64,
    pub distance_diff: Option<f64>,
}

pub const CSV_HEADER: &str =
    "step,source,x,y,z,alpha,portals,kappa,audible,dist,dry,wet,distance_diff";

/// Evaluates every (step, source) pair in order.
pub fn run_sweep(engine: &Engine, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate(engine)?;
    let positions = sample_polyline(&spec.listener_path, spec.step);
    let mut rows = Vec::with_capacity(positions.len() * spec.sources.len());
    let base = engine.snapshot();
    for (i, &listener) in positions.iter().enumerate() {
        let t = if positions.len() > 1 {
            i as f64 / (positions.len() - 1) as f64
        } else {
            0.0
        };
        let mut states = base.clone();
        for r in &spec.alpha {
            states.set(r.portal, (r.from + (r.to - r.from) * t).clamp(0.0, 1.0))?;
        }
        for (j, &source) in spec.sources.iter().enumerate() {
            let q = engine.query_with(source, listener, &states)?;
            rows.push(SweepRow {
                step: i,
                source: j,
                position: listener,
                alpha: q.alpha,
                portals: q.search.portals.clone(),
                last_portal: q.search.last_portal,
                audible: q.audible,
                dist: q.debug.dist,
                dry: q.debug.dry,
                wet: q.debug.wet,
                distance_diff: q.debug.distance_diff,
            });
        }
    }
    Ok(rows)
}

pub fn write_csv(rows: &[SweepRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        let portals: Vec<String> = r.portals.iter().map(|k| k.to_string()).collect();
        writeln!(
            out,
            "{},{},{:.4},{:.4},{:.4},{:.6},{},{},{},{:.4},{:.4},{:.4},{}",
            r.step,
            r.source,
            r.position.x,
            r.position.y,
            r.position.z,
            r.alpha,
            portals.join(";"),
            r.last_portal.map(|k| k.to_string()).unwrap_or_default(),
            r.audible,
            r.dist,
            r.dry,
            r.wet,
            r.distance_diff
                .map(|d| format!("{d:.4}"))
                .unwrap_or_default(),
        )?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapQuantity {
    Delay,
    Loudness,
}

/// One z-layer of a probe's field on the emitter lattice, as a binary PGM.
/// Invalid samples are black; valid values are scaled to 1..=255.
pub fn write_field_pgm(
    dataset: &BakedDataset,
    probe: usize,
    quantity: MapQuantity,
    layer: usize,
    mut out: impl Write,
) -> Result<()> {
    let field = dataset
        .fields
        .get(probe)
        .ok_or_else(|| Error::InvalidConfig(format!("no probe {probe}")))?;
    let [w, h, d] = dataset.lattice.dims;
    if layer >= d {
        return Err(Error::InvalidConfig(format!(
            "layer {layer} outside 0..{d}"
        )));
    }
    let values: Vec<Option<f64>> = (0..w * h)
        .map(|i| {
            let j = dataset.lattice.index([i % w, i / w, layer]);
            field.valid[j].then(|| match quantity {
                MapQuantity::Delay => f64::from(field.delay_counts[j]),
                MapQuantity::Loudness => f64::from(field.loudness_cdb[j]),
            })
        })
        .collect();
    let (lo, hi) = values
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let io = |e| Error::io("<pgm>", e);
    write!(out, "P5\n{w} {h}\n255\n").map_err(io)?;
    // Rows top to bottom with +y up.
    let mut bytes = Vec::with_capacity(w * h);
    for y in (0..h).rev() {
        for x in 0..w {
            bytes.push(match values[y * w + x] {
                Some(v) => 1 + ((v - lo) / span * 254.0).round() as u8,
                None => 0,
            });
        }
    }
    out.write_all(&bytes).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_sampling() {
        let path = [
            Vec3::zero(),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
        ];
        let pts = sample_polyline(&path, 0.25);
        assert_eq!(pts.len(), 9);
        assert!((pts[4] - path[1]).norm() < 1e-12);
        assert!((pts[8] - path[2]).norm() < 1e-12);
        assert!((pts[6] - Vec3::new(1.0, 0.5, 0.0)).norm() < 1e-12);
        assert!(sample_polyline(&[], 0.1).is_empty());
        assert_eq!(sample_polyline(&path[..1], 0.1).len(), 1);
    }

    #[test]
    fn empty_rows_still_have_header() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }
}
