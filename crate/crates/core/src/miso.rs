//! Opportunistic random beamforming with multiple transmit antennas.
//!
//! Each transmitter radiates `M` random orthonormal beams; every user sees
//! one scalar SINR per beam and the scheduler treats each beam as a virtual
//! transmitter. The deterministic allocation problem then reduces to the
//! single-antenna engine with `B * M` virtual rows sharing `B` power
//! budgets, which is exactly how [`solve_op_miso`] is built.

use ndarray::{Array2, Array3, Array4};
use num_complex::Complex64;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::op::{OpInstance, OpSolution, ProxyProblem};
use crate::rng::{substream, StreamKind};
use crate::{Error, Result};

/// `M` orthonormal complex beamforming vectors, one matrix column each.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSet {
    pub beams: Array2<Complex64>,
}

impl BeamSet {
    pub fn m(&self) -> usize {
        self.beams.ncols()
    }

    /// Largest entrywise deviation of the Gram matrix from the identity.
    pub fn gram_residual(&self) -> f64 {
        let m = self.m();
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                let mut dot = Complex64::new(0.0, 0.0);
                for r in 0..m {
                    dot += self.beams[[r, a]].conj() * self.beams[[r, b]];
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }
}

/// Draw `M` orthonormal beams by modified Gram-Schmidt on an `M x M`
/// matrix of i.i.d. standard complex Gaussians. A rank-deficient draw has
/// probability zero; if the norm still collapses numerically the matrix is
/// redrawn internally.
pub fn random_orthonormal_beams(m: usize, seed: u64) -> Result<BeamSet> {
    if m == 0 {
        return Err(Error::InvalidParam("need at least one beam".into()));
    }
    'attempt: for attempt in 0..64u64 {
        let mut rng = substream(seed, StreamKind::Beams, &[attempt]);
        let mut cols: Vec<Vec<Complex64>> = (0..m)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        let re: f64 = rand::Rng::sample(&mut rng, StandardNormal);
                        let im: f64 = rand::Rng::sample(&mut rng, StandardNormal);
                        Complex64::new(re, im)
                    })
                    .collect()
            })
            .collect();
        for j in 0..m {
            for i in 0..j {
                let mut proj = Complex64::new(0.0, 0.0);
                for r in 0..m {
                    proj += cols[i][r].conj() * cols[j][r];
                }
                for r in 0..m {
                    let correction = proj * cols[i][r];
                    cols[j][r] -= correction;
                }
            }
            let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue 'attempt;
            }
            for r in 0..m {
                cols[j][r] /= norm;
            }
        }
        let mut beams = Array2::from_elem((m, m), Complex64::new(0.0, 0.0));
        for j in 0..m {
            for r in 0..m {
                beams[[r, j]] = cols[j][r];
            }
        }
        return Ok(BeamSet { beams });
    }
    Err(Error::NoSolution(
        "beam orthonormalization kept collapsing".into(),
    ))
}

/// Which gain the intra-cell interference sum indexes.
///
/// The displayed SINR charges a transmitter's other beams at the gain of
/// the beam being decoded; an argument can be made for indexing by the
/// interfering beam instead. Both are available and [`SameBeam`] is the
/// as-displayed default.
///
/// [`SameBeam`]: IntracellGainIndex::SameBeam
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntracellGainIndex {
    #[default]
    SameBeam,
    PerInterferingBeam,
}

/// Per-beam SINR for the combination `(i, k, n, m)` under fixed powers.
///
/// `powers` is indexed `[tx, channel, beam]` and `gains` is indexed
/// `[tx, user, channel, beam]`.
pub fn miso_sinr(
    powers: &Array3<f64>,
    gains: &Array4<f64>,
    i: usize,
    k: usize,
    n: usize,
    m: usize,
    rule: IntracellGainIndex,
) -> Result<f64> {
    let (b, n_channels, beams) = powers.dim();
    let (gb, users, gn, gm) = gains.dim();
    if (gb, gn, gm) != (b, n_channels, beams) {
        return Err(Error::DimensionMismatch(format!(
            "powers {:?} vs gains {:?}",
            powers.dim(),
            gains.dim()
        )));
    }
    if i >= b || k >= users || n >= n_channels || m >= beams {
        return Err(Error::DimensionMismatch(format!(
            "index ({i}, {k}, {n}, {m}) out of range for ({b}, {users}, {n_channels}, {beams})"
        )));
    }
    let signal = powers[[i, n, m]] * gains[[i, k, n, m]];
    let mut denom = 1.0;
    for mp in 0..beams {
        if mp != m {
            let gain = match rule {
                IntracellGainIndex::SameBeam => gains[[i, k, n, m]],
                IntracellGainIndex::PerInterferingBeam => gains[[i, k, n, mp]],
            };
            denom += powers[[i, n, mp]] * gain;
        }
    }
    for j in 0..b {
        if j != i {
            for mp in 0..beams {
                denom += powers[[j, n, mp]] * gains[[j, k, n, mp]];
            }
        }
    }
    Ok(signal / denom)
}

/// Solve the deterministic allocation problem with `M` beams per
/// transmitter: `B * M` virtual rows in `B` budget groups, same
/// fixed-point constants as the plain problem. `M = 1` runs the identical
/// engine and reproduces [`solve_op`] exactly.
///
/// Rows of the returned allocation are virtual transmitters in `(i, m)`
/// row-major order: row `i * M + m`.
///
/// [`solve_op`]: crate::op::solve_op
pub fn solve_op_miso(inst: &OpInstance, m: usize) -> Result<OpSolution> {
    solve_op_miso_seeded(inst, m, 0)
}

/// [`solve_op_miso`] with an explicit seed for the solver's random
/// restarts; pairs with [`solve_op_seeded`].
///
/// [`solve_op_seeded`]: crate::op::solve_op_seeded
pub fn solve_op_miso_seeded(inst: &OpInstance, m: usize, seed: u64) -> Result<OpSolution> {
    inst.validate()?;
    if m == 0 {
        return Err(Error::InvalidParam("need at least one beam".into()));
    }
    let problem = ProxyProblem::new(
        inst.b * m,
        inst.n,
        (0..inst.b * m).map(|r| r / m).collect(),
        inst.b,
        inst.params.pcon,
        inst.params.path_loss().peak_gain(),
        (inst.c / inst.params.r0).powf(2.0 * inst.params.alpha),
        inst.user_scale().ln(),
    );
    problem.solve(seed, &[])
}
