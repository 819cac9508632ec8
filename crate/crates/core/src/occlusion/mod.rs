//! Energy loss through partially closed portals.
//!
//! The direct sound is scaled by the product of open fractions along the
//! path. Reverberant energy is reduced by the share that would have entered
//! the listener's region through the last portal.

use crate::error::{Error, Result};
use crate::fieldstore::{AcousticField, AcousticParams};
use crate::geom::Vector3;
use crate::scalar::Scalar;
use crate::scene::Portal;

type Vec3 = Vector3<f64>;

/// Fraction of each directional reflection energy that always survives.
pub const REFLECTION_FLOOR: f64 = 0.01;
/// Lower bound on the net open fraction (at most 30 dB of occlusion).
pub const ALPHA_FLOOR: f64 = 0.001;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OcclusionConfig {
    pub beta: f64,
    pub alpha_min: f64,
}

impl Default for OcclusionConfig {
    fn default() -> Self {
        Self {
            beta: REFLECTION_FLOOR,
            alpha_min: ALPHA_FLOOR,
        }
    }
}

impl OcclusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "beta {} not in (0, 1)",
                self.beta
            )));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha_min {} not in (0, 1]",
                self.alpha_min
            )));
        }
        Ok(())
    }
}

/// Open fractions of all portals, indexed by portal id.
#[derive(Clone, Debug, PartialEq)]
pub struct PortalStates {
    alpha: Vec<f64>,
}

impl PortalStates {
    /// `count` portals, all fully open.
    pub fn open(count: usize) -> Self {
        Self {
            alpha: vec![1.0; count],
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<f64> {
        id.checked_sub(1).and_then(|i| self.alpha.get(i)).copied()
    }

    pub fn set(&mut self, id: usize, alpha: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::OpenFractionOutOfRange(alpha));
        }
        let slot = id
            .checked_sub(1)
            .and_then(|i| self.alpha.get_mut(i))
            .ok_or(Error::UnknownPortal(id))?;
        *slot = alpha;
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }
}

/// Product of the open fractions of `portals`, floored at `alpha_min`.
pub fn net_alpha<T: Scalar>(open_fractions: impl IntoIterator<Item = T>, alpha_min: T) -> T {
    open_fractions
        .into_iter()
        .fold(T::one(), |acc, a| acc * a)
        .max(alpha_min)
}

/// Net open fraction over the portal ids in `k`.
pub fn net_alpha_of(k: &[usize], states: &PortalStates, cfg: &OcclusionConfig) -> f64 {
    net_alpha(
        k.iter().map(|&id| states.get(id).unwrap_or(1.0)),
        cfg.alpha_min,
    )
}

/// Direct loudness after occlusion: `L + 10 log10(alpha)`.
pub fn occlude_initial<T: Scalar>(loudness_db: T, alpha: T) -> T {
    if alpha >= T::one() {
        return loudness_db;
    }
    loudness_db + T::lit(10.0) * alpha.log10()
}

fn db_to_energy<T: Scalar>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

fn energy_to_db<T: Scalar>(e: T) -> T {
    T::lit(10.0) * e.log10()
}

/// Total reflection energy of six directional levels in dB.
pub fn total_energy<T: Scalar>(reflections_db: &[T; 6]) -> T {
    reflections_db.iter().map(|&r| db_to_energy(r)).sum()
}

/// Energy entering through a portal of `area`: the product of the
/// reverberant energies at its centroid from both endpoints, normalized by
/// the total radiated energy of a unit source.
pub fn portal_energy_with<T: Scalar>(area: T, from_source: T, from_listener: T) -> T {
    area / (T::lit(4.0) * T::PI()) * (from_source * from_listener)
}

/// Removes the closed share of the portal energy from each direction.
///
/// `via_portal_db` are the directional reflection levels at the listener
/// for a source at the portal centroid; they are rescaled so their total
/// equals `portal_energy`.
pub fn occlude_reflections_with<T: Scalar>(
    reflections_db: [T; 6],
    portal_energy: T,
    via_portal_db: [T; 6],
    alpha: T,
    beta: T,
) -> [T; 6] {
    if alpha >= T::one() {
        return reflections_db;
    }
    let via_total = total_energy(&via_portal_db);
    if !(via_total > T::zero()) || !(portal_energy > T::zero()) {
        return reflections_db;
    }
    let scale = portal_energy / via_total;
    let mut out = reflections_db;
    for (o, (&r, &v)) in out
        .iter_mut()
        .zip(reflections_db.iter().zip(via_portal_db.iter()))
    {
        let e = db_to_energy(r);
        let through = scale * db_to_energy(v);
        *o = energy_to_db((beta * e).max(e - (T::one() - alpha) * through));
    }
    out
}

/// `E_kappa` for the pair, with both lookups placing the portal centroid as
/// listener. Zero when either endpoint has no path to the portal.
pub fn portal_energy<F: AcousticField + ?Sized>(
    field: &F,
    portal: &Portal,
    source: Vec3,
    listener: Vec3,
) -> f64 {
    match (
        field.lookup_at_portal(source, portal),
        field.lookup_at_portal(listener, portal),
    ) {
        (Ok(a), Ok(b)) => {
            portal_energy_with(portal.area, a.reflection_energy(), b.reflection_energy())
        }
        _ => 0.0,
    }
}

/// Applies reflected-energy occlusion through the last portal `kappa`.
pub fn occlude_reflections<F: AcousticField + ?Sized>(
    field: &F,
    reflections_db: [f64; 6],
    kappa: Option<&Portal>,
    source: Vec3,
    listener: Vec3,
    alpha: f64,
    cfg: &OcclusionConfig,
) -> [f64; 6] {
    let Some(portal) = kappa else {
        return reflections_db;
    };
    if alpha >= 1.0 {
        return reflections_db;
    }
    let e_k = portal_energy(field, portal, source, listener);
    let via: Option<AcousticParams> = field.lookup(portal.centroid, listener).ok();
    match via {
        Some(v) => occlude_reflections_with(reflections_db, e_k, v.reflections_db, alpha, cfg.beta),
        None => reflections_db,
    }
}
