//! Network geometry: transmitter layouts, user placement and truncated
//! distances.
//!
//! Two layout kinds are supported. A *dense* layout scatters (or accepts)
//! `B` transmitters inside the disc of radius `p - R`, so every
//! transmitter keeps at least `R` of clearance from the network edge at
//! radius `p`. An *extended* layout arranges `B` transmitters on a
//! hexagonal lattice with neighbor spacing `2R` (cell inradius `R`),
//! filled in spiral order: the center site first, then each ring
//! counter-clockwise starting from angle 0. Its effective disc radius is
//! set to `p = R sqrt(3 B / pi)`, matching the total tiled area.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{substream, StreamKind};
use crate::{Error, Result};

/// Planar point, serialized as `[x, y]`.
pub type Point = [f64; 2];

/// Euclidean distance between two points.
pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Distance with the near-field cutoff applied: `max(r0, |a - b|)`.
pub fn truncated_distance(a: Point, b: Point, r0: f64) -> f64 {
    distance(a, b).max(r0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    Dense,
    HexExtended,
}

/// How dense transmitter positions are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "positions")]
pub enum TxPlacement {
    /// Uniform over the disc of radius `p - R`.
    UniformRandom,
    /// Caller-supplied positions; all must lie within radius `p - R`.
    Provided(Vec<Point>),
}

/// A concrete network: transmitter positions plus the radii that define
/// the user region and path-loss truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLayout {
    pub kind: LayoutKind,
    /// Transmitter positions, length `B`.
    pub tx: Vec<Point>,
    /// Network (user region) radius.
    pub p: f64,
    /// Clearance / hex cell inradius.
    pub cell_radius: f64,
    /// Path-loss truncation length.
    pub r0: f64,
}

impl NetworkLayout {
    pub fn num_tx(&self) -> usize {
        self.tx.len()
    }
}

/// Users with optional cell assignment (present for per-cell sampling).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSet {
    pub positions: Vec<Point>,
    /// `cell_of[k]` is the index of the cell user `k` was drawn in.
    pub cell_of: Option<Vec<usize>>,
}

impl UserSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn check_radii(r0: f64, cell_radius: f64, p: Option<f64>) -> Result<()> {
    if !(r0 > 0.0) {
        return Err(Error::InvalidParam(format!(
            "truncation length r0 must be positive, got {r0}"
        )));
    }
    if !(cell_radius > r0) {
        return Err(Error::InvalidParam(format!(
            "cell radius R = {cell_radius} must exceed r0 = {r0}"
        )));
    }
    if let Some(p) = p {
        if !(p > cell_radius) {
            return Err(Error::InvalidParam(format!(
                "network radius p = {p} must exceed R = {cell_radius}"
            )));
        }
    }
    Ok(())
}

/// Build a dense layout: `b` transmitters inside radius `p - cell_radius`.
pub fn build_dense_layout(
    b: usize,
    p: f64,
    cell_radius: f64,
    r0: f64,
    placement: TxPlacement,
    seed: u64,
) -> Result<NetworkLayout> {
    if b == 0 {
        return Err(Error::ConstraintViolation("need at least one transmitter".into()));
    }
    check_radii(r0, cell_radius, Some(p))?;
    let inner = p - cell_radius;
    let tx = match placement {
        TxPlacement::UniformRandom => (0..b)
            .map(|i| {
                let mut rng = substream(seed, StreamKind::TxPlacement, &[i as u64]);
                let r = inner * rng.random::<f64>().sqrt();
                let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                [r * theta.cos(), r * theta.sin()]
            })
            .collect(),
        TxPlacement::Provided(points) => {
            if points.len() != b {
                return Err(Error::DimensionMismatch(format!(
                    "placement provides {} positions for b = {b}",
                    points.len()
                )));
            }
            for (i, &q) in points.iter().enumerate() {
                let r = (q[0]).hypot(q[1]);
                if r > inner + 1e-12 {
                    return Err(Error::ConstraintViolation(format!(
                        "transmitter {i} at radius {r} exceeds p - R = {inner}"
                    )));
                }
            }
            points
        }
    };
    Ok(NetworkLayout {
        kind: LayoutKind::Dense,
        tx,
        p,
        cell_radius,
        r0,
    })
}

/// Sites of the hex lattice with neighbor spacing `2R`, in spiral order
/// (center, then each ring counter-clockwise starting at angle 0).
fn hex_spiral(b: usize, r: f64) -> Vec<Point> {
    let a1 = [2.0 * r, 0.0];
    let a2 = [r, 3.0f64.sqrt() * r];
    let dirs = [
        [a2[0] - a1[0], a2[1] - a1[1]],
        [-a1[0], -a1[1]],
        [-a2[0], -a2[1]],
        [a1[0] - a2[0], a1[1] - a2[1]],
        a1,
        a2,
    ];
    let mut sites = vec![[0.0, 0.0]];
    let mut ring = 1usize;
    while sites.len() < b {
        let mut q = [ring as f64 * a1[0], ring as f64 * a1[1]];
        for dir in &dirs {
            for _ in 0..ring {
                sites.push(q);
                if sites.len() == b {
                    return sites;
                }
                q = [q[0] + dir[0], q[1] + dir[1]];
            }
        }
        // The walk emits the corner first and returns to it after 6*ring
        // steps, so the ring contributed exactly 6*ring sites.
        ring += 1;
    }
    sites.truncate(b);
    sites
}

/// Build a hex-lattice extended layout. The network radius follows the
/// area rule `p = R sqrt(3 B / pi)`, so the disc of radius `p` has the
/// same area as the `B` tiled cells.
pub fn build_hex_layout(b: usize, cell_radius: f64, r0: f64) -> Result<NetworkLayout> {
    if b == 0 {
        return Err(Error::ConstraintViolation("need at least one transmitter".into()));
    }
    check_radii(r0, cell_radius, None)?;
    let p = cell_radius * (3.0 * b as f64 / std::f64::consts::PI).sqrt();
    Ok(NetworkLayout {
        kind: LayoutKind::HexExtended,
        tx: hex_spiral(b, cell_radius),
        p,
        cell_radius,
        r0,
    })
}

/// `k` users uniform on the disc of radius `p` centered at the origin.
pub fn sample_users_disc(layout: &NetworkLayout, k: usize, seed: u64) -> Result<UserSet> {
    if k == 0 {
        return Err(Error::ConstraintViolation("need at least one user".into()));
    }
    let positions = (0..k)
        .map(|j| {
            let mut rng = substream(seed, StreamKind::UserPlacement, &[j as u64]);
            let r = layout.p * rng.random::<f64>().sqrt();
            let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            [r * theta.cos(), r * theta.sin()]
        })
        .collect();
    Ok(UserSet {
        positions,
        cell_of: None,
    })
}

/// Is `q` inside the hexagon of inradius `r` centered at the origin, with
/// flat edges facing the lattice neighbors (angles 0, 60, ..., 300)?
fn in_hexagon(q: Point, r: f64) -> bool {
    let half = 0.5;
    let s3h = 0.5 * 3.0f64.sqrt();
    q[0].abs() <= r
        && (half * q[0] + s3h * q[1]).abs() <= r
        && (-half * q[0] + s3h * q[1]).abs() <= r
}

/// `rho` users uniform in each hex cell (so `B * rho` users total), in
/// cell-major order. Only defined for hex layouts.
pub fn sample_users_per_cell(layout: &NetworkLayout, rho: usize, seed: u64) -> Result<UserSet> {
    if layout.kind != LayoutKind::HexExtended {
        return Err(Error::KindMismatch(
            "per-cell sampling is defined for hex layouts".into(),
        ));
    }
    if rho == 0 {
        return Err(Error::ConstraintViolation("need at least one user per cell".into()));
    }
    let r = layout.cell_radius;
    // Bounding square has the circumradius 2R/sqrt(3) as half-width.
    let rc = 2.0 * r / 3.0f64.sqrt();
    let mut positions = Vec::with_capacity(layout.num_tx() * rho);
    let mut cell_of = Vec::with_capacity(layout.num_tx() * rho);
    for (i, center) in layout.tx.iter().enumerate() {
        for j in 0..rho {
            let mut rng = substream(seed, StreamKind::UserPlacement, &[i as u64, j as u64]);
            let q = loop {
                let x = rc * (2.0 * rng.random::<f64>() - 1.0);
                let y = rc * (2.0 * rng.random::<f64>() - 1.0);
                if in_hexagon([x, y], r) {
                    break [x, y];
                }
            };
            positions.push([center[0] + q[0], center[1] + q[1]]);
            cell_of.push(i);
        }
    }
    Ok(UserSet {
        positions,
        cell_of: Some(cell_of),
    })
}
