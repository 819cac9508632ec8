use std::cell::OnceCell;

use crate::bake::{BakeConfig, BakedDataset, EmitterSample};
use crate::geom::Vector3;
use crate::scene::Portal;

use super::interp::{interp_improved, interp_linear, DirectionNumerator, InterpSample};
use super::params::{AcousticParams, InterpMode, LookupError};
use super::AcousticField;

type Vec3 = Vector3<f64>;

/// Closer than this to a probe, the probe is used alone.
const EXACT_HIT: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LookupConfig {
    pub mode: InterpMode,
    pub numerator: DirectionNumerator,
    /// Probe search radius in units of probe spacing.
    pub probe_radius: f64,
    pub max_probes: usize,
}

impl Default for LookupConfig {
    fn default() -> Self {
        Self {
            mode: InterpMode::Improved,
            numerator: DirectionNumerator::Apparent,
            probe_radius: 2.0,
            max_probes: 4,
        }
    }
}

/// Uniform bucketing of probe positions for radius queries.
#[derive(Clone, Debug)]
struct ProbeBins {
    origin: Vec3,
    size: f64,
    dims: [usize; 3],
    bins: Vec<Vec<u32>>,
}

impl ProbeBins {
    fn new(origin: Vec3, extent: Vec3, size: f64, positions: &[Vec3]) -> Self {
        let dims = [0, 1, 2].map(|a| ((extent[a] / size).ceil() as usize).max(1));
        let mut bins = vec![Vec::new(); dims.iter().product()];
        let mut out = Self {
            origin,
            size,
            dims,
            bins: Vec::new(),
        };
        for (i, &p) in positions.iter().enumerate() {
            let b = out.bin_of(p);
            bins[out.flat(b)].push(i as u32);
        }
        out.bins = bins;
        out
    }

    fn bin_of(&self, p: Vec3) -> [usize; 3] {
        [0, 1, 2].map(|a| {
            let f = ((p[a] - self.origin[a]) / self.size).floor().max(0.0) as usize;
            f.min(self.dims[a] - 1)
        })
    }

    fn flat(&self, b: [usize; 3]) -> usize {
        b[0] + self.dims[0] * (b[1] + self.dims[1] * b[2])
    }

    /// Probes in bins overlapping the cube of half-width `r` around `p`.
    fn near(&self, p: Vec3, r: f64, out: &mut Vec<usize>) {
        let lo = self.bin_of(p - Vec3::splat(r));
        let hi = self.bin_of(p + Vec3::splat(r));
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    out.extend(self.bins[self.flat([x, y, z])].iter().map(|&i| i as usize));
                }
            }
        }
    }
}

/// Emitter-lattice samples visible from one source position, shared by
/// every probe looked up from that source.
#[derive(Clone, Debug)]
pub struct EmitterContext {
    source: Vec3,
    primary: Vec<(usize, f64, Vec3)>,
    fallback: OnceCell<Vec<(usize, f64, Vec3)>>,
}

impl EmitterContext {
    pub fn source(&self) -> Vec3 {
        self.source
    }
}

/// Baked dataset plus interpolation machinery.
#[derive(Clone, Debug)]
pub struct FieldStore {
    dataset: BakedDataset,
    config: LookupConfig,
    bins: ProbeBins,
}

impl FieldStore {
    pub fn new(dataset: BakedDataset) -> Self {
        Self::with_config(dataset, LookupConfig::default())
    }

    pub fn with_config(dataset: BakedDataset, config: LookupConfig) -> Self {
        let b = dataset.grid.bounds();
        let size = (dataset.probes.spacing * config.probe_radius).max(dataset.grid.cell_size());
        let bins = ProbeBins::new(b.min, b.max - b.min, size, &dataset.probes.positions);
        Self {
            dataset,
            config,
            bins,
        }
    }

    pub fn dataset(&self) -> &BakedDataset {
        &self.dataset
    }

    pub fn config(&self) -> &LookupConfig {
        &self.config
    }

    pub fn bake_config(&self) -> &BakeConfig {
        &self.dataset.config
    }

    fn check_bounds(&self, p: Vec3) -> Result<(), LookupError> {
        if p.is_finite() && self.dataset.grid.bounds().contains(p) {
            Ok(())
        } else {
            Err(LookupError::OutOfBounds(p.to_array()))
        }
    }

    /// Listener-side probe weights (unnormalized), nearest first.
    pub fn probe_weights(&self, listener: Vec3) -> Vec<(usize, f64)> {
        let grid = &self.dataset.grid;
        let positions = &self.dataset.probes.positions;
        let radius = self.dataset.probes.spacing * self.config.probe_radius;
        let mut near = Vec::new();
        self.bins.near(listener, radius, &mut near);
        let mut cand: Vec<(f64, usize)> = near
            .into_iter()
            .map(|i| (positions[i].distance(listener), i))
            .filter(|&(d, _)| d <= radius)
            .collect();
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some(&(d, i)) = cand.first() {
            if d <= EXACT_HIT {
                return vec![(i, 1.0)];
            }
        }
        let keep = self.config.max_probes.max(1);
        let mut visible = Vec::with_capacity(keep + 1);
        for (d, i) in cand {
            if grid.segment_clear(listener, positions[i]) {
                visible.push((d, i));
                if visible.len() > keep {
                    break;
                }
            }
        }
        if visible.is_empty() {
            return self.nearest_visible_probe(listener).into_iter().collect();
        }
        // Weights fall to zero at the cutoff so probes enter and leave the
        // set continuously.
        let cutoff = if visible.len() > keep {
            visible.pop().map_or(radius, |(d, _)| d.min(radius))
        } else {
            radius
        };
        let mut out: Vec<(usize, f64)> = visible
            .iter()
            .map(|&(d, i)| (i, (1.0 / d - 1.0 / cutoff).max(0.0)))
            .collect();
        if out.iter().all(|&(_, w)| w <= 0.0) {
            out.iter_mut().for_each(|e| e.1 = 1.0);
        }
        out.retain(|&(_, w)| w > 0.0);
        out
    }

    fn nearest_visible_probe(&self, listener: Vec3) -> Option<(usize, f64)> {
        let positions = &self.dataset.probes.positions;
        let mut order: Vec<(f64, usize)> = positions
            .iter()
            .enumerate()
            .map(|(i, p)| (p.distance(listener), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        order
            .into_iter()
            .find(|&(_, i)| self.dataset.grid.segment_clear(listener, positions[i]))
            .map(|(_, i)| (i, 1.0))
    }

    /// Trilinear emitter-lattice weights around `source` with nonzero weight.
    pub fn emitter_weights(&self, source: Vec3) -> Vec<(usize, f64)> {
        let ds = &self.dataset;
        let lat = &ds.lattice;
        let spacing = lat.spacing(&ds.grid);
        let first = ds.grid.cell_center([0, 0, 0]);
        let mut axes = [[(0usize, 1.0f64); 2]; 3];
        let mut counts = [1usize; 3];
        for a in 0..3 {
            if lat.dims[a] == 1 {
                continue;
            }
            let u = (source[a] - first[a]) / spacing;
            let base = (u.floor().max(0.0) as usize).min(lat.dims[a] - 2);
            let t = (u - base as f64).clamp(0.0, 1.0);
            axes[a] = [(base, 1.0 - t), (base + 1, t)];
            counts[a] = 2;
        }
        let mut out = Vec::with_capacity(8);
        for &(z, wz) in &axes[2][..counts[2]] {
            for &(y, wy) in &axes[1][..counts[1]] {
                for &(x, wx) in &axes[0][..counts[0]] {
                    let w = wx * wy * wz;
                    if w > 0.0 {
                        out.push((lat.index([x, y, z]), w));
                    }
                }
            }
        }
        out
    }

    fn emitter_fallback(&self, source: Vec3) -> Vec<(usize, f64, Vec3)> {
        let ds = &self.dataset;
        let lat = &ds.lattice;
        let spacing = lat.spacing(&ds.grid);
        let first = ds.grid.cell_center([0, 0, 0]);
        let mut range = [(0usize, 0usize); 3];
        for a in 0..3 {
            let u = ((source[a] - first[a]) / spacing).round();
            let c = u.clamp(0.0, (lat.dims[a] - 1) as f64) as usize;
            range[a] = (c.saturating_sub(2), (c + 2).min(lat.dims[a] - 1));
        }
        let mut out = Vec::new();
        for z in range[2].0..=range[2].1 {
            for y in range[1].0..=range[1].1 {
                for x in range[0].0..=range[0].1 {
                    let j = lat.index([x, y, z]);
                    let p = ds.emitter_position(j);
                    let d = p.distance(source);
                    if d <= 2.0 * spacing + 1e-9 && ds.grid.segment_clear(source, p) {
                        out.push((j, 1.0 / d.max(EXACT_HIT), p));
                    }
                }
            }
        }
        out
    }

    /// Resolves the emitter side of `source` once for repeated lookups.
    pub fn emitter_context(&self, source: Vec3) -> Result<EmitterContext, LookupError> {
        self.check_bounds(source)?;
        let ds = &self.dataset;
        let primary = self
            .emitter_weights(source)
            .into_iter()
            .map(|(j, w)| (j, w, ds.emitter_position(j)))
            .filter(|&(_, _, p)| ds.grid.segment_clear(source, p))
            .collect();
        Ok(EmitterContext {
            source,
            primary,
            fallback: OnceCell::new(),
        })
    }

    fn probe_samples(&self, probe: usize, set: &EmitterContext) -> Vec<(f64, EmitterSample)> {
        let field = &self.dataset.fields[probe];
        let cfg = &self.dataset.config;
        let pick = |list: &[(usize, f64, Vec3)]| -> Vec<(f64, EmitterSample)> {
            list.iter()
                .filter_map(|&(j, w, p)| field.sample(j, p, cfg).map(|s| (w, s)))
                .collect()
        };
        let s = pick(&set.primary);
        if !s.is_empty() {
            return s;
        }
        pick(
            set.fallback
                .get_or_init(|| self.emitter_fallback(set.source)),
        )
    }

    /// Parameters from `source` to probe `probe`, interpolated over the
    /// emitter lattice only.
    fn probe_params(
        &self,
        probe: usize,
        set: &EmitterContext,
        mode: InterpMode,
    ) -> Option<AcousticParams> {
        let source = set.source;
        let samples = self.probe_samples(probe, set);
        let total: f64 = samples.iter().map(|s| s.0).sum();
        if !(total > 0.0) {
            return None;
        }
        let c = self.dataset.config.speed_of_sound;
        let mut loudness = 0.0;
        let mut refl = [0.0; 6];
        let mut arrival = Vec3::zero();
        for (w, s) in &samples {
            let w = w / total;
            loudness += w * s.loudness_db;
            for (r, v) in refl.iter_mut().zip(s.reflections_db) {
                *r += w * v;
            }
            let dir = match mode {
                // Arrival along the straight line when the sample sees the source.
                InterpMode::Improved if s.line_of_sight => {
                    let probe_pos = self.dataset.probes.positions[probe];
                    (probe_pos - source)
                        .try_normalize(1e-9)
                        .unwrap_or(s.arrival)
                }
                _ => s.arrival,
            };
            arrival += dir * w;
        }
        let interp: Vec<InterpSample<f64>> = samples
            .iter()
            .map(|(w, s)| InterpSample {
                position: s.position,
                weight: w / total,
                delay: s.delay,
                direction: s.propagation,
            })
            .collect();
        let delay = match mode {
            InterpMode::Linear => interp_linear(&interp)?.delay,
            InterpMode::Improved => {
                interp_improved(&interp, source, c, self.config.numerator)?.delay
            }
        };
        let direction = arrival.try_normalize(1e-12).unwrap_or(samples[0].1.arrival);
        Some(AcousticParams {
            delay,
            loudness_db: loudness,
            direction,
            reflections_db: refl,
        })
    }

    /// Looks up parameters with the store's configured mode.
    pub fn lookup(&self, source: Vec3, listener: Vec3) -> Result<AcousticParams, LookupError> {
        self.lookup_mode(source, listener, self.config.mode)
    }

    pub fn lookup_mode(
        &self,
        source: Vec3,
        listener: Vec3,
        mode: InterpMode,
    ) -> Result<AcousticParams, LookupError> {
        self.check_bounds(listener)?;
        let set = self.emitter_context(source)?;
        let mut per_probe = Vec::new();
        for (i, w) in self.probe_weights(listener) {
            if let Some(p) = self.probe_params(i, &set, mode) {
                per_probe.push((i, w, p));
            }
        }
        let total: f64 = per_probe.iter().map(|e| e.1).sum();
        if per_probe.is_empty() || !(total > 0.0) {
            return Err(LookupError::NoPath);
        }
        if per_probe.len() == 1 {
            return Ok(per_probe[0].2);
        }
        let positions = &self.dataset.probes.positions;
        let mut loudness = 0.0;
        let mut refl = [0.0; 6];
        let mut samples = Vec::with_capacity(per_probe.len());
        for &(i, w, p) in &per_probe {
            let w = w / total;
            loudness += w * p.loudness_db;
            for (r, v) in refl.iter_mut().zip(p.reflections_db) {
                *r += w * v;
            }
            samples.push(InterpSample {
                position: positions[i],
                weight: w,
                delay: p.delay,
                direction: p.direction,
            });
        }
        let c = self.dataset.config.speed_of_sound;
        let combined = match mode {
            InterpMode::Linear => interp_linear(&samples),
            InterpMode::Improved => interp_improved(&samples, listener, c, self.config.numerator),
        }
        .ok_or(LookupError::NoPath)?;
        Ok(AcousticParams {
            delay: combined.delay,
            loudness_db: loudness,
            direction: combined.direction,
            reflections_db: refl,
        })
    }

    /// Parameters with the listener exactly on a probe.
    pub fn lookup_probe(
        &self,
        source: Vec3,
        probe: usize,
        mode: InterpMode,
    ) -> Result<AcousticParams, LookupError> {
        self.lookup_probe_from(&self.emitter_context(source)?, probe, mode)
    }

    pub fn lookup_probe_from(
        &self,
        context: &EmitterContext,
        probe: usize,
        mode: InterpMode,
    ) -> Result<AcousticParams, LookupError> {
        self.probe_params(probe, context, mode)
            .ok_or(LookupError::NoPath)
    }
}

impl AcousticField for FieldStore {
    type Endpoint = EmitterContext;

    fn speed_of_sound(&self) -> f64 {
        self.dataset.config.speed_of_sound
    }

    fn delay_quantum(&self) -> f64 {
        self.dataset.config.delay_quantum
    }

    fn lookup(&self, source: Vec3, listener: Vec3) -> Result<AcousticParams, LookupError> {
        FieldStore::lookup(self, source, listener)
    }

    fn endpoint(&self, point: Vec3) -> Result<EmitterContext, LookupError> {
        self.emitter_context(point)
    }

    fn lookup_at_portal_from(
        &self,
        endpoint: &EmitterContext,
        portal: &Portal,
    ) -> Result<AcousticParams, LookupError> {
        match self.dataset.probes.portal_probe(portal.id) {
            Some(i) => self.lookup_probe_from(endpoint, i, self.config.mode),
            None => FieldStore::lookup(self, endpoint.source, portal.centroid),
        }
    }
}
