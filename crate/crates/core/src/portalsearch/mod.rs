//! Run-time search for the portals on the initial sound path.
//!
//! Each portal is culled against the ellipsoid of admissible path lengths,
//! then looked up with its centroid as listener from both endpoints. It is
//! accepted when the endpoints' wavefronts arrive from opposite sides and
//! the tightened path through the polygon is within the delay tolerance of
//! the direct path.

mod cull;
mod search;
mod tighten;

pub use cull::{cull_bbox, cull_ellipsoid, ellipsoid_aabb, CullMargin, CullVolume};
pub use search::{
    find_portals, pierce_test, string_tighten, PortalRecord, SearchConfig, SearchResult,
    SearchStats,
};
pub use tighten::{apparent_location, pierce_test_with, string_tighten_with, Tightened};

#[cfg(test)]
mod tests;
