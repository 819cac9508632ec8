//! Little-endian bake file encoding.
//!
//! ```text
//! "PWB1" | u32 version | [u8; 32] scene hash
//! config: 11 x f64
//! grid:   3 x f64 origin | f64 cell size | 3 x u32 dims | u32 runs | runs x (u32 start, u32 len) | u32 emitter stride
//! probes: f64 spacing | u32 count | count x 3 x f64 | u32 portals | portals x (u32 id, u32 probe)
//! fields: per probe: validity bitmap | line-of-sight bitmap |
//!         per lattice cell: u16 delay quanta | i16 L centi-dB | 6 x i16 R_J centi-dB |
//!                           3 x f32 arrival at probe | 3 x f32 propagation at emitter
//! ```

use crate::error::{Error, Result};
use crate::geom::Vector3;
use crate::scene::SceneGrid;

use super::{BakeConfig, BakedDataset, EmitterLattice, ParameterField, ProbeSet};

pub const MAGIC: &[u8; 4] = b"PWB1";
pub const VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn i16(&mut self, v: i16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f32(&mut self, v: f32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) -> Result<()> {
        let v = u32::try_from(v).map_err(|_| Error::BakeFormat(format!("{v} exceeds u32")))?;
        self.u32(v);
        Ok(())
    }
    fn bitmap(&mut self, bits: &[bool]) {
        let mut bytes = vec![0u8; bits.len().div_ceil(8)];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        self.0.extend_from_slice(&bytes);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::BakeFormat(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn arr<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.arr()?))
    }
    fn usize(&mut self) -> Result<usize> {
        Ok(self.u32()? as usize)
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.arr()?))
    }
    fn i16(&mut self) -> Result<i16> {
        Ok(i16::from_le_bytes(self.arr()?))
    }
    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.arr()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.arr()?))
    }
    fn bitmap(&mut self, n: usize) -> Result<Vec<bool>> {
        let bytes = self.take(n.div_ceil(8))?;
        Ok((0..n).map(|i| bytes[i / 8] & (1 << (i % 8)) != 0).collect())
    }
}

fn config_values(c: &BakeConfig) -> [f64; 11] {
    [
        c.speed_of_sound,
        c.delay_quantum,
        c.loudness_quantum,
        c.initial_window,
        c.reflections_window,
        c.diffraction_loss_db,
        c.reverb_decay_db_per_m,
        c.reverb_gain,
        c.directional_fraction,
        c.bend_threshold_deg,
        c.max_distance,
    ]
}

pub fn encode(ds: &BakedDataset) -> Result<Vec<u8>> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(VERSION);
    w.0.extend_from_slice(&ds.scene_hash);
    for v in config_values(&ds.config) {
        w.f64(v);
    }

    for c in ds.grid.origin().to_array() {
        w.f64(c);
    }
    w.f64(ds.grid.cell_size());
    for d in ds.grid.dims() {
        w.usize(d)?;
    }
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, &s) in ds.grid.occupancy().iter().enumerate() {
        if s {
            match runs.last_mut() {
                Some(r) if r.0 + r.1 == i => r.1 += 1,
                _ => runs.push((i, 1)),
            }
        }
    }
    w.usize(runs.len())?;
    for (s, l) in runs {
        w.usize(s)?;
        w.usize(l)?;
    }
    w.usize(ds.lattice.stride)?;

    w.f64(ds.probes.spacing);
    w.usize(ds.probes.len())?;
    for p in &ds.probes.positions {
        for c in p.to_array() {
            w.f64(c);
        }
    }
    w.usize(ds.probes.portal_probes.len())?;
    for &(k, i) in &ds.probes.portal_probes {
        w.usize(k)?;
        w.usize(i)?;
    }

    for f in &ds.fields {
        w.bitmap(&f.valid);
        w.bitmap(&f.line_of_sight);
        for j in 0..f.len() {
            w.u16(f.delay_counts[j]);
            w.i16(f.loudness_cdb[j]);
            for r in f.reflections_cdb[j] {
                w.i16(r);
            }
            for c in f.arrival[j] {
                w.f32(c);
            }
            for c in f.propagation[j] {
                w.f32(c);
            }
        }
    }
    Ok(w.0)
}

pub fn decode(buf: &[u8]) -> Result<BakedDataset> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::BakeFormat("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::BakeFormat(format!("unsupported version {version}")));
    }
    let scene_hash: [u8; 32] = r.arr()?;
    let mut cv = [0f64; 11];
    for v in cv.iter_mut() {
        *v = r.f64()?;
    }
    let config = BakeConfig {
        speed_of_sound: cv[0],
        delay_quantum: cv[1],
        loudness_quantum: cv[2],
        initial_window: cv[3],
        reflections_window: cv[4],
        diffraction_loss_db: cv[5],
        reverb_decay_db_per_m: cv[6],
        reverb_gain: cv[7],
        directional_fraction: cv[8],
        bend_threshold_deg: cv[9],
        max_distance: cv[10],
    };
    config.validate()?;

    let origin = Vector3::new(r.f64()?, r.f64()?, r.f64()?);
    let cell_size = r.f64()?;
    let dims = [r.usize()?, r.usize()?, r.usize()?];
    let n: usize = dims
        .iter()
        .try_fold(1usize, |a, &d| a.checked_mul(d))
        .ok_or_else(|| Error::BakeFormat("grid too large".into()))?;
    if n > buf.len().saturating_mul(8).saturating_add(1 << 20) {
        return Err(Error::BakeFormat(
            "grid dims inconsistent with file size".into(),
        ));
    }
    let mut solid = vec![false; n];
    let nruns = r.usize()?;
    for _ in 0..nruns {
        let s = r.usize()?;
        let l = r.usize()?;
        let e = s
            .checked_add(l)
            .filter(|&e| e <= n)
            .ok_or_else(|| Error::BakeFormat("solid run out of range".into()))?;
        solid[s..e].iter_mut().for_each(|c| *c = true);
    }
    let grid = SceneGrid::new(origin, cell_size, dims, solid)?;
    let stride = r.usize()?;
    if stride == 0 {
        return Err(Error::BakeFormat("zero emitter stride".into()));
    }
    let lattice = EmitterLattice::new(dims, stride);

    let spacing = r.f64()?;
    let count = r.usize()?;
    let mut positions = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        positions.push(Vector3::new(r.f64()?, r.f64()?, r.f64()?));
    }
    let nportals = r.usize()?;
    let mut portal_probes = Vec::with_capacity(nportals.min(1 << 20));
    for _ in 0..nportals {
        let k = r.usize()?;
        let i = r.usize()?;
        if i >= count {
            return Err(Error::BakeFormat(format!(
                "portal {k} probe index {i} out of range"
            )));
        }
        portal_probes.push((k, i));
    }
    let probes = ProbeSet {
        positions,
        portal_probes,
        spacing,
    };

    let m = lattice.len();
    let mut fields = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let valid = r.bitmap(m)?;
        let line_of_sight = r.bitmap(m)?;
        let mut f = ParameterField {
            valid,
            line_of_sight,
            delay_counts: Vec::with_capacity(m),
            loudness_cdb: Vec::with_capacity(m),
            reflections_cdb: Vec::with_capacity(m),
            arrival: Vec::with_capacity(m),
            propagation: Vec::with_capacity(m),
        };
        for _ in 0..m {
            f.delay_counts.push(r.u16()?);
            f.loudness_cdb.push(r.i16()?);
            let mut rj = [0i16; 6];
            for v in rj.iter_mut() {
                *v = r.i16()?;
            }
            f.reflections_cdb.push(rj);
            f.arrival.push([r.f32()?, r.f32()?, r.f32()?]);
            f.propagation.push([r.f32()?, r.f32()?, r.f32()?]);
        }
        fields.push(f);
    }
    if r.pos != buf.len() {
        return Err(Error::BakeFormat(format!(
            "{} trailing bytes",
            buf.len() - r.pos
        )));
    }
    Ok(BakedDataset {
        config,
        scene_hash,
        grid,
        lattice,
        probes,
        fields,
    })
}
