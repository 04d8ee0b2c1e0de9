//! Deterministic power optimization on fixed-point SNR proxies.
//!
//! Instead of optimizing over random network realizations, each
//! (transmitter, channel) pair carries a proxy SNR `x` defined implicitly
//! by the tail of the composite SNR law at an effective user scale `h(K)`:
//!
//! ```text
//! r0^2 h(K) / p^2 = e^{x / u} * prod_{j != i} (1 + p_{j,n} x / D)
//! ```
//!
//! with `u = beta^2 r0^{-2 alpha}` the peak gain and `D = (c / r0)^{2 alpha}`
//! a distance constant. The outer problem maximizes
//! `sum_{i,n} log(1 + p_{i,n} x_{i,n})` over per-transmitter power budgets.
//! The fixed point is exact (bracketed bisection); the outer maximization is
//! nonconvex and solved heuristically by multistart block-coordinate
//! projected gradient ascent, with a grid oracle bounding suboptimality in
//! tests. The same machinery serves the multi-beam extension, which maps
//! each (transmitter, beam) pair to a virtual row sharing one power budget
//! per physical transmitter.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numerics::{self, ROOT_REL_TOL};
use crate::rng::{self, StreamKind};
use crate::snr::ChannelParams;
use crate::{Error, Result, EULER_MASCHERONI};

/// Transmit powers `p[i][n] >= 0` with `sum_n p[i][n] <= pcon` per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub p: Array2<f64>,
}

impl PowerAllocation {
    pub fn validate(&self, pcon: f64) -> Result<()> {
        for (i, row) in self.p.rows().into_iter().enumerate() {
            let mut total = 0.0;
            for &v in row {
                if !(v >= 0.0) {
                    return Err(Error::ConstraintViolation(format!(
                        "negative power {v} in row {i}"
                    )));
                }
                total += v;
            }
            if total > pcon + 1e-12 {
                return Err(Error::ConstraintViolation(format!(
                    "row {i} spends {total} > budget {pcon}"
                )));
            }
        }
        Ok(())
    }

    pub fn equal_split(b: usize, n: usize, pcon: f64) -> Self {
        Self {
            p: Array2::from_elem((b, n), pcon / n as f64),
        }
    }
}

/// One deterministic optimization instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpInstance {
    /// Distance constant entering the interference denominator; at least `r0`.
    pub c: f64,
    /// Effective user scale `h(K)`.
    pub hk: f64,
    /// Transmitters.
    pub b: usize,
    /// Channels per transmitter.
    pub n: usize,
    /// Channel constants; the fading family must be Rayleigh (the
    /// exponential tail is what produces the `e^{x/u}` factor).
    pub params: ChannelParams,
    /// Network radius entering the user scale `r0^2 h(K) / p^2`.
    pub p_radius: f64,
}

impl OpInstance {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !self.params.fading.is("rayleigh") {
            return Err(Error::FamilyMismatch(format!(
                "the proxy fixed point encodes an exponential tail; got {}",
                self.params.fading.name()
            )));
        }
        if self.b == 0 || self.n == 0 {
            return Err(Error::InvalidParam("need b >= 1 and n >= 1".into()));
        }
        if !(self.p_radius > 0.0) {
            return Err(Error::InvalidParam(format!(
                "network radius must be positive, got {}",
                self.p_radius
            )));
        }
        if !(self.c >= self.params.r0) {
            return Err(Error::ConstraintViolation(format!(
                "distance constant c = {} must be at least r0 = {}",
                self.c, self.params.r0
            )));
        }
        let a = self.user_scale();
        if !(a > 1.0) {
            return Err(Error::NoRoot(format!(
                "fixed point needs r0^2 h(K) / p^2 > 1, got {a}"
            )));
        }
        Ok(())
    }

    /// `r0^2 h(K) / p^2`, the tail mass the fixed point equates.
    pub fn user_scale(&self) -> f64 {
        let r = self.params.r0 / self.p_radius;
        r * r * self.hk
    }

    /// Same instance with a different distance constant and user scale.
    pub fn with(&self, c: f64, hk: f64) -> Self {
        Self {
            c,
            hk,
            ..self.clone()
        }
    }

    fn proxy(&self) -> ProxyProblem {
        ProxyProblem::new(
            self.b,
            self.n,
            (0..self.b).collect(),
            self.b,
            self.params.pcon,
            self.params.path_loss().peak_gain(),
            (self.c / self.params.r0).powf(2.0 * self.params.alpha),
            self.user_scale().ln(),
        )
    }
}

/// Solved allocation: powers, proxies, and the achieved objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpSolution {
    pub powers: PowerAllocation,
    pub x: Array2<f64>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// The shared fixed-point/ascent engine over virtual rows.
///
/// `group_of[r]` names the physical transmitter of row `r`; a power budget
/// constrains each group's cells jointly. The plain problem uses one row
/// per transmitter; the multi-beam reduction uses `B * M` rows in `B`
/// groups of `M`.
#[derive(Debug, Clone)]
pub(crate) struct ProxyProblem {
    pub rows: usize,
    pub cols: usize,
    pub group_of: Vec<usize>,
    pub num_groups: usize,
    pub pcon: f64,
    /// Peak gain `u`.
    pub u: f64,
    /// Interference denominator constant `D`.
    pub d: f64,
    /// `ln(r0^2 h(K) / p^2)`.
    pub log_target: f64,
}

const MAX_SWEEPS: usize = 300;
const SWEEP_TOL: f64 = 1e-9;
const RANDOM_STARTS: usize = 8;

impl ProxyProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rows: usize,
        cols: usize,
        group_of: Vec<usize>,
        num_groups: usize,
        pcon: f64,
        u: f64,
        d: f64,
        log_target: f64,
    ) -> Self {
        Self {
            rows,
            cols,
            group_of,
            num_groups,
            pcon,
            u,
            d,
            log_target,
        }
    }

    /// Root of `x/u + sum_{r' != r} ln(1 + p_{r',n} x / D) = ln A` for one
    /// cell. The left side grows from 0, so `[0, u ln A + 1]` brackets the
    /// unique root (at `x = u ln A` the first term alone reaches `ln A`).
    fn solve_cell(&self, powers: &Array2<f64>, row: usize, col: usize) -> Result<f64> {
        let residual = |x: f64| {
            let mut v = x / self.u - self.log_target;
            for r in 0..self.rows {
                if r != row {
                    v += (powers[[r, col]] * x / self.d).ln_1p();
                }
            }
            v
        };
        numerics::bisect(residual, 0.0, self.u * self.log_target + 1.0, ROOT_REL_TOL)
    }

    /// All proxies for a power matrix.
    pub fn solve_x(&self, powers: &Array2<f64>) -> Result<Array2<f64>> {
        let mut x = Array2::zeros((self.rows, self.cols));
        for row in 0..self.rows {
            for col in 0..self.cols {
                x[[row, col]] = self.solve_cell(powers, row, col)?;
            }
        }
        Ok(x)
    }

    pub fn objective_given_x(&self, powers: &Array2<f64>, x: &Array2<f64>) -> f64 {
        let mut total = 0.0;
        for row in 0..self.rows {
            for col in 0..self.cols {
                total += (powers[[row, col]] * x[[row, col]]).ln_1p();
            }
        }
        total
    }

    /// Exact gradient of the objective in the powers, accounting for the
    /// implicit dependence of every same-column proxy on `p_{r,n}`.
    ///
    /// For the constraint of row `s`, differentiating the defining equation
    /// gives `dx_s/dp_r = -(x_s / D) / ((1 + p_r x_s / D) * g_s)` for
    /// `r != s`, with `g_s = 1/u + sum_{q != s} (p_q / D)/(1 + p_q x_s / D)`.
    fn gradient(&self, powers: &Array2<f64>, x: &Array2<f64>) -> Array2<f64> {
        let mut grad = Array2::zeros((self.rows, self.cols));
        for col in 0..self.cols {
            // Precompute, per row s: weight of its term in the objective and
            // the derivative denominator g_s.
            let mut obj_weight = vec![0.0; self.rows];
            let mut g = vec![0.0; self.rows];
            for s in 0..self.rows {
                let xs = x[[s, col]];
                obj_weight[s] = powers[[s, col]] / (1.0 + powers[[s, col]] * xs);
                let mut gs = 1.0 / self.u;
                for q in 0..self.rows {
                    if q != s {
                        let pq = powers[[q, col]];
                        gs += (pq / self.d) / (1.0 + pq * xs / self.d);
                    }
                }
                g[s] = gs;
            }
            for r in 0..self.rows {
                let xr = x[[r, col]];
                let mut total = xr / (1.0 + powers[[r, col]] * xr);
                for s in 0..self.rows {
                    if s != r {
                        let xs = x[[s, col]];
                        let dxs_dpr = -(xs / self.d) / ((1.0 + powers[[r, col]] * xs / self.d) * g[s]);
                        total += obj_weight[s] * dxs_dpr;
                    }
                }
                grad[[r, col]] = total;
            }
        }
        grad
    }

    /// Cells owned by one group, in scan order.
    fn group_cells(&self, group: usize) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for row in 0..self.rows {
            if self.group_of[row] == group {
                for col in 0..self.cols {
                    cells.push((row, col));
                }
            }
        }
        cells
    }

    /// One ascent run from a starting point; monotone in the objective.
    fn ascend(&self, mut powers: Array2<f64>) -> Result<RunOutcome> {
        let mut x = self.solve_x(&powers)?;
        let mut best = self.objective_given_x(&powers, &x);
        let mut sweeps = 0;
        let mut converged = false;
        while sweeps < MAX_SWEEPS {
            sweeps += 1;
            let start_value = best;
            for group in 0..self.num_groups {
                let cells = self.group_cells(group);
                let grad = self.gradient(&powers, &x);
                let current: Vec<f64> = cells.iter().map(|&(r, c)| powers[[r, c]]).collect();
                let direction: Vec<f64> = cells.iter().map(|&(r, c)| grad[[r, c]]).collect();
                let mut step = self.pcon.max(1.0);
                for _ in 0..30 {
                    let moved: Vec<f64> = current
                        .iter()
                        .zip(&direction)
                        .map(|(p, g)| p + step * g)
                        .collect();
                    let projected = numerics::project_simplex_cap(&moved, self.pcon);
                    let mut candidate = powers.clone();
                    for (&(r, c), &v) in cells.iter().zip(&projected) {
                        candidate[[r, c]] = v;
                    }
                    let cand_x = self.solve_x(&candidate)?;
                    let value = self.objective_given_x(&candidate, &cand_x);
                    if value > best + 1e-15 {
                        powers = candidate;
                        x = cand_x;
                        best = value;
                        break;
                    }
                    step *= 0.5;
                }
            }
            if best - start_value < SWEEP_TOL {
                converged = true;
                break;
            }
        }
        Ok(RunOutcome {
            powers,
            x,
            objective: best,
            converged,
            sweeps,
        })
    }

    /// Multistart solve: equal split, one vertex start per within-group cell
    /// position, `RANDOM_STARTS` seeded random points, plus any caller-
    /// supplied warm starts. Returns the best run.
    pub fn solve(&self, seed: u64, warm_starts: &[Array2<f64>]) -> Result<OpSolution> {
        let cells_per_group = self.rows / self.num_groups * self.cols;
        let mut starts: Vec<Array2<f64>> = Vec::new();
        starts.push(Array2::from_elem(
            (self.rows, self.cols),
            self.pcon / cells_per_group as f64,
        ));
        for vertex in 0..cells_per_group {
            let mut p = Array2::zeros((self.rows, self.cols));
            for group in 0..self.num_groups {
                let (r, c) = self.group_cells(group)[vertex];
                p[[r, c]] = self.pcon;
            }
            starts.push(p);
        }
        for t in 0..RANDOM_STARTS {
            let mut stream = rng::substream(seed, StreamKind::Multistart, &[t as u64]);
            let mut p = Array2::zeros((self.rows, self.cols));
            for group in 0..self.num_groups {
                let cells = self.group_cells(group);
                let weights: Vec<f64> = cells
                    .iter()
                    .map(|_| rand::Rng::random::<f64>(&mut stream).max(1e-12))
                    .collect();
                let total: f64 = weights.iter().sum();
                for (&(r, c), w) in cells.iter().zip(&weights) {
                    p[[r, c]] = self.pcon * w / total;
                }
            }
            starts.push(p);
        }
        starts.extend(warm_starts.iter().cloned());

        let runs: Vec<RunOutcome> = starts
            .into_par_iter()
            .map(|p| self.ascend(p))
            .collect::<Result<_>>()?;
        let best = runs
            .into_iter()
            .reduce(|a, b| if b.objective > a.objective { b } else { a })
            .expect("at least one start");
        Ok(OpSolution {
            powers: PowerAllocation { p: best.powers },
            x: best.x,
            objective: best.objective,
            converged: best.converged,
            iterations: best.sweeps,
        })
    }
}

struct RunOutcome {
    powers: Array2<f64>,
    x: Array2<f64>,
    objective: f64,
    converged: bool,
    sweeps: usize,
}

/// Proxies for a given power allocation on an instance.
pub fn solve_x(powers: &PowerAllocation, inst: &OpInstance) -> Result<Array2<f64>> {
    inst.validate()?;
    powers.validate(inst.params.pcon)?;
    if powers.p.dim() != (inst.b, inst.n) {
        return Err(Error::DimensionMismatch(format!(
            "powers are {:?}, instance wants ({}, {})",
            powers.p.dim(),
            inst.b,
            inst.n
        )));
    }
    inst.proxy().solve_x(&powers.p)
}

/// Proxy objective `sum log(1 + p x)` at a given allocation.
pub fn op_objective(powers: &PowerAllocation, inst: &OpInstance) -> Result<f64> {
    let x = solve_x(powers, inst)?;
    Ok(inst.proxy().objective_given_x(&powers.p, &x))
}

/// Maximize the proxy objective with the default solver seed.
pub fn solve_op(inst: &OpInstance) -> Result<OpSolution> {
    solve_op_seeded(inst, 0)
}

/// Maximize the proxy objective; `seed` drives the random multistarts.
pub fn solve_op_seeded(inst: &OpInstance, seed: u64) -> Result<OpSolution> {
    inst.validate()?;
    inst.proxy().solve(seed, &[])
}

fn solve_warm(inst: &OpInstance, seed: u64, warm: &[Array2<f64>]) -> Result<OpSolution> {
    inst.validate()?;
    inst.proxy().solve(seed, warm)
}

/// The all-rows-at-full-budget concentration level: the root `l` of
/// `K r0^2 / p^2 = e^{l/u} (1 + l pcon / D)^{B - 1}` with `D` built from
/// the distance constant `c`.
pub fn lbar(c: f64, k: f64, inst: &OpInstance) -> Result<f64> {
    let full = inst.with(c, k);
    full.validate()?;
    let a = full.user_scale();
    let u = inst.params.path_loss().peak_gain();
    let d = (c / inst.params.r0).powf(2.0 * inst.params.alpha);
    let exponent = (inst.b - 1) as f64;
    let pcon = inst.params.pcon;
    let residual =
        |l: f64| l / u + exponent * (l * pcon / d).ln_1p() - a.ln();
    numerics::bisect(residual, 0.0, u * a.ln() + 1.0, ROOT_REL_TOL)
}

/// Two-sided bracket on the achievable sum rate built from two solved
/// instances: a conservative one at distance constant `r0` and user scale
/// `K / s1`, and an optimistic one at `2p` and scale `K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRateBracket {
    pub lo: f64,
    pub hi: f64,
    pub prefactor_lo: f64,
    pub prefactor_hi: f64,
    pub conservative: OpSolution,
    pub optimistic: OpSolution,
}

/// Evaluate the bracket
/// `(1 - e^{-s1}) OP(r0, K/s1) <= C <= (1 + u gamma_EM / lbar(2p, K)) OP(2p, K)`.
///
/// Both instances are solved with each other's optimal powers added as warm
/// starts, so the solved values inherit the analytic ordering (larger
/// distance constant and user scale can only help) up to solver tolerance.
pub fn theorem3_bracket(inst: &OpInstance, k: f64, s1: f64) -> Result<SumRateBracket> {
    if !(s1 > 0.0 && s1 <= k) {
        return Err(Error::InvalidParam(format!(
            "need 0 < s1 <= K, got s1 = {s1}, K = {k}"
        )));
    }
    let conservative_inst = inst.with(inst.params.r0, k / s1);
    let optimistic_inst = inst.with(2.0 * inst.p_radius, k);
    let first = solve_op(&conservative_inst)?;
    let optimistic = solve_warm(&optimistic_inst, 0, &[first.powers.p.clone()])?;
    let conservative = solve_warm(&conservative_inst, 0, &[optimistic.powers.p.clone()])?;
    let conservative = if conservative.objective > first.objective {
        conservative
    } else {
        first
    };
    let prefactor_lo = -(-s1).exp_m1();
    let u = inst.params.path_loss().peak_gain();
    let level = lbar(2.0 * inst.p_radius, k, inst)?;
    let prefactor_hi = 1.0 + u * EULER_MASCHERONI / level;
    Ok(SumRateBracket {
        lo: prefactor_lo * conservative.objective,
        hi: prefactor_hi * optimistic.objective,
        prefactor_lo,
        prefactor_hi,
        conservative,
        optimistic,
    })
}

/// Solved-value ratio between two distance constants at a fixed user scale.
/// Analytically `1 <= ratio <= (c2/c1)^{2 alpha}`; each solve warm-starts
/// from the other's optimum so the numeric ratio respects the bound to
/// solver tolerance.
pub fn op_ratio_check(inst: &OpInstance, c1: f64, c2: f64, hk: f64) -> Result<f64> {
    if !(c1 > 0.0 && c1 <= c2) {
        return Err(Error::InvalidParam(format!(
            "need 0 < c1 <= c2, got c1 = {c1}, c2 = {c2}"
        )));
    }
    let inst1 = inst.with(c1, hk);
    let inst2 = inst.with(c2, hk);
    let first1 = solve_op(&inst1)?;
    let sol2 = solve_warm(&inst2, 0, &[first1.powers.p.clone()])?;
    let sol1 = solve_warm(&inst1, 0, &[sol2.powers.p.clone()])?;
    let best1 = sol1.objective.max(first1.objective);
    Ok(sol2.objective / best1)
}

/// Leading-order closed form for the proxy at fixed equal powers `p_bar`:
/// the smaller of the no-interference level `u ln A` and the
/// interference-limited level `(1/p_bar) (c/r0)^{2 alpha} A^{1/(B-1)}`.
pub fn fixed_power_x(p_bar: f64, c: f64, hk: f64, inst: &OpInstance) -> Result<f64> {
    let scoped = inst.with(c, hk);
    scoped.validate()?;
    if !(p_bar > 0.0) {
        return Err(Error::InvalidParam(format!(
            "fixed power must be positive, got {p_bar}"
        )));
    }
    let a = scoped.user_scale();
    let u = inst.params.path_loss().peak_gain();
    let first = u * a.ln();
    if inst.b == 1 {
        return Ok(first);
    }
    let d = (c / inst.params.r0).powf(2.0 * inst.params.alpha);
    let second = (d / p_bar) * a.powf(1.0 / (inst.b - 1) as f64);
    Ok(first.min(second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::FadingModel;
    use crate::rng;

    /// Instance with u = 1, D = (c)^{2 alpha}, A = hk / p^2.
    fn unit_instance(b: usize, n: usize, c: f64, hk: f64, p_radius: f64, pcon: f64) -> OpInstance {
        OpInstance {
            c,
            hk,
            b,
            n,
            params: ChannelParams {
                alpha: 1.5,
                beta: 1.0,
                r0: 1.0,
                pcon,
                fading: FadingModel::rayleigh(),
            },
            p_radius,
        }
    }

    const ORACLE_ROOT: f64 = 1.419_163_34; // e^x (1 + x) = 10

    #[test]
    fn instance_validation_catches_bad_scales() {
        let mut inst = unit_instance(2, 1, 1.0, 10.0, 1.0, 1.0);
        assert!(inst.validate().is_ok());
        inst.hk = 0.5;
        assert!(matches!(inst.validate(), Err(Error::NoRoot(_))));
        inst.hk = 10.0;
        inst.c = 0.5;
        assert!(matches!(inst.validate(), Err(Error::ConstraintViolation(_))));
        inst.c = 1.0;
        inst.params.fading = FadingModel::nakagami(2.0, 1.0).unwrap();
        assert!(matches!(inst.validate(), Err(Error::FamilyMismatch(_))));
    }

    #[test]
    fn solve_x_single_tx_closed_form() {
        // A = e^2: the root is exactly u ln A = 2 for every channel.
        let inst = unit_instance(1, 3, 1.0, 4.0 * std::f64::consts::E.powi(2), 2.0, 1.0);
        let powers = PowerAllocation::equal_split(1, 3, 1.0);
        let x = solve_x(&powers, &inst).unwrap();
        for col in 0..3 {
            assert!((x[[0, col]] - 2.0).abs() < 1e-9, "x = {}", x[[0, col]]);
        }
    }

    #[test]
    fn solve_x_two_tx_scalar_oracle() {
        // Constants 1, unit powers, A = 10: each row solves e^x (1+x) = 10.
        let inst = unit_instance(2, 1, 1.0, 40.0, 2.0, 1.0);
        let powers = PowerAllocation {
            p: Array2::from_elem((2, 1), 1.0),
        };
        let x = solve_x(&powers, &inst).unwrap();
        for row in 0..2 {
            assert!((x[[row, 0]] - ORACLE_ROOT).abs() < 1e-6, "x = {}", x[[row, 0]]);
        }
    }

    #[test]
    fn solve_x_decreases_with_interference() {
        let inst = unit_instance(3, 2, 1.5, 400.0, 2.0, 2.0);
        let lo = PowerAllocation {
            p: Array2::from_elem((3, 2), 0.5),
        };
        let hi = PowerAllocation {
            p: Array2::from_elem((3, 2), 1.0),
        };
        let x_lo = solve_x(&lo, &inst).unwrap();
        let x_hi = solve_x(&hi, &inst).unwrap();
        for row in 0..3 {
            for col in 0..2 {
                assert!(x_hi[[row, col]] < x_lo[[row, col]]);
            }
        }
    }

    #[test]
    fn objective_closed_forms() {
        let inst = unit_instance(2, 1, 1.0, 40.0, 2.0, 1.0);
        let zero = PowerAllocation {
            p: Array2::zeros((2, 1)),
        };
        assert_eq!(op_objective(&zero, &inst).unwrap(), 0.0);

        // B=1, N=1, full power: log(1 + pcon * u * ln A).
        let single = unit_instance(1, 1, 1.0, 4.0 * std::f64::consts::E.powi(2), 2.0, 3.0);
        let full = PowerAllocation {
            p: Array2::from_elem((1, 1), 3.0),
        };
        let expect = (3.0f64 * 2.0).ln_1p();
        assert!((op_objective(&full, &single).unwrap() - expect).abs() < 1e-9);

        // Symmetric B=2 at equal powers: both proxies solve the oracle
        // equation, so the objective is 2 log(1 + x*).
        let sym = op_objective(
            &PowerAllocation {
                p: Array2::from_elem((2, 1), 1.0),
            },
            &inst,
        )
        .unwrap();
        assert!((sym - 2.0 * ORACLE_ROOT.ln_1p()).abs() < 1e-6);
    }

    #[test]
    fn fixed_point_residual_is_tiny_at_solution() {
        let inst = unit_instance(3, 2, 2.0, 5000.0, 2.0, 1.5);
        let sol = solve_op(&inst).unwrap();
        let u = 1.0;
        let d = 2.0f64.powf(3.0);
        let log_a = inst.user_scale().ln();
        for row in 0..3 {
            for col in 0..2 {
                let x = sol.x[[row, col]];
                let mut lhs = x / u;
                for j in 0..3 {
                    if j != row {
                        lhs += (sol.powers.p[[j, col]] * x / d).ln_1p();
                    }
                }
                assert!(
                    (lhs - log_a).abs() < 1e-9 * log_a,
                    "residual {} at ({row},{col})",
                    lhs - log_a
                );
            }
        }
        sol.powers.validate(1.5).unwrap();
    }

    #[test]
    fn single_tx_optimum_spends_the_budget() {
        let inst = unit_instance(1, 1, 1.0, 4.0 * std::f64::consts::E.powi(2), 2.0, 2.5);
        let sol = solve_op(&inst).unwrap();
        assert!(sol.converged);
        assert!((sol.powers.p[[0, 0]] - 2.5).abs() < 1e-6);
        let expect = (2.5f64 * 2.0).ln_1p();
        assert!((sol.objective - expect).abs() < 1e-9);
    }

    #[test]
    fn single_tx_two_channels_waterfill_to_equal_split() {
        // With B=1 the proxy is power-free, and both channels share the same
        // x, so the concave inner problem has the equal split as optimum.
        let inst = unit_instance(1, 2, 1.0, 4.0 * std::f64::consts::E.powi(2), 2.0, 2.0);
        let sol = solve_op(&inst).unwrap();
        assert!((sol.powers.p[[0, 0]] - 1.0).abs() < 1e-4);
        assert!((sol.powers.p[[0, 1]] - 1.0).abs() < 1e-4);
        let x = sol.x[[0, 0]];
        let expect = 2.0 * x.ln_1p();
        assert!((sol.objective - expect).abs() < 1e-8);
    }

    #[test]
    fn solver_dominates_equal_split_and_a_grid_oracle() {
        let inst = unit_instance(2, 1, 1.0, 4000.0, 2.0, 1.0);
        let sol = solve_op(&inst).unwrap();
        let equal = op_objective(&PowerAllocation::equal_split(2, 1, 1.0), &inst).unwrap();
        assert!(sol.objective >= equal - 1e-12);

        let mut grid_best = 0.0f64;
        for a in 0..=50 {
            for b in 0..=50 {
                let powers = PowerAllocation {
                    p: Array2::from_shape_vec((2, 1), vec![a as f64 / 50.0, b as f64 / 50.0])
                        .unwrap(),
                };
                grid_best = grid_best.max(op_objective(&powers, &inst).unwrap());
            }
        }
        assert!(
            sol.objective >= grid_best - 1e-9,
            "solver {} vs grid {grid_best}",
            sol.objective
        );
    }

    #[test]
    fn op_value_monotone_in_user_scale() {
        let lo = solve_op(&unit_instance(2, 2, 1.5, 100.0, 2.0, 1.0)).unwrap();
        let hi = solve_op(&unit_instance(2, 2, 1.5, 1000.0, 2.0, 1.0)).unwrap();
        assert!(hi.objective >= lo.objective - 1e-12);
    }

    #[test]
    fn solver_is_deterministic() {
        let inst = unit_instance(3, 2, 2.0, 5000.0, 2.0, 1.0);
        let a = solve_op(&inst).unwrap();
        let b = solve_op(&inst).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lbar_closed_form_and_oracle() {
        // B = 1: the interference factor vanishes and lbar = u ln(K r0^2/p^2).
        let b1 = unit_instance(1, 1, 1.0, 10.0, 2.0, 1.0);
        let l = lbar(1.0, 400.0, &b1).unwrap();
        assert!((l - 100.0f64.ln()).abs() < 1e-9);

        // B = 2, constants 1, K r0^2/p^2 = 10: same scalar oracle root.
        let b2 = unit_instance(2, 1, 1.0, 10.0, 2.0, 1.0);
        let l2 = lbar(1.0, 40.0, &b2).unwrap();
        assert!((l2 - ORACLE_ROOT).abs() < 1e-6);

        // Decreasing in B.
        let b3 = unit_instance(3, 1, 1.0, 10.0, 2.0, 1.0);
        let l3 = lbar(1.0, 40.0, &b3).unwrap();
        assert!(l3 < l2 && l2 < l);
    }

    #[test]
    fn bracket_prefactors_match_closed_forms() {
        let inst = unit_instance(2, 1, 1.0, 10.0, 2.0, 1.0);
        let k = 400.0;
        let bracket = theorem3_bracket(&inst, k, 1.0).unwrap();
        assert!((bracket.prefactor_lo - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!((bracket.prefactor_lo - 0.6321).abs() < 1e-4);
        assert!(bracket.prefactor_hi > 1.0);

        // s1 = ln ln K makes the prefactor exactly 1 - 1/ln K.
        let s1 = k.ln().ln();
        let variant = theorem3_bracket(&inst, k, s1).unwrap();
        assert!((variant.prefactor_lo - (1.0 - 1.0 / k.ln())).abs() < 1e-12);

        // Increasing in s1.
        assert!(variant.prefactor_lo > bracket.prefactor_lo);
    }

    #[test]
    fn bracket_ordered_on_random_instances() {
        let mut stream = rng::substream(31, rng::StreamKind::Generic, &[7]);
        for trial in 0..20 {
            let alpha = 1.1 + 0.9 * rand::Rng::random::<f64>(&mut stream);
            let b = 1 + (rand::Rng::random::<f64>(&mut stream) * 3.0) as usize;
            let n = 1 + (rand::Rng::random::<f64>(&mut stream) * 2.0) as usize;
            let k = 50.0 + 4000.0 * rand::Rng::random::<f64>(&mut stream);
            let s1 = 1.0 + 2.0 * rand::Rng::random::<f64>(&mut stream);
            let pcon = 0.5 + 2.0 * rand::Rng::random::<f64>(&mut stream);
            let inst = OpInstance {
                c: 0.5,
                hk: k,
                b: b.min(3),
                n: n.min(2),
                params: ChannelParams {
                    alpha,
                    beta: 1.0,
                    r0: 0.5,
                    pcon,
                    fading: FadingModel::rayleigh(),
                },
                p_radius: 1.0,
            };
            let bracket = theorem3_bracket(&inst, k, s1).unwrap();
            assert!(
                bracket.lo <= bracket.hi + 1e-9,
                "trial {trial}: lo {} > hi {}",
                bracket.lo,
                bracket.hi
            );
        }
    }

    #[test]
    fn ratio_respects_the_two_sided_bound() {
        let inst = unit_instance(2, 1, 1.0, 400.0, 2.0, 1.0);
        let same = op_ratio_check(&inst, 1.0, 1.0, 400.0).unwrap();
        assert!((same - 1.0).abs() < 1e-9);

        let doubled = op_ratio_check(&inst, 1.0, 2.0, 400.0).unwrap();
        assert!(doubled >= 1.0 - 1e-6);
        assert!(doubled <= 2.0f64.powf(3.0) + 1e-6);
    }

    #[test]
    fn fixed_power_branches() {
        // B = 1: only the no-interference branch exists.
        let single = unit_instance(1, 1, 1.0, 10.0, 2.0, 1.0);
        let v = fixed_power_x(1.0, 1.0, 10.0, &single).unwrap();
        assert!((v - 2.5f64.ln()).abs() < 1e-12);

        // Large B: the interference-limited branch is nearly A-free and wins.
        let wide = unit_instance(100, 1, 1.0, 1000.0, 1.0, 1.0);
        let w = fixed_power_x(1.0, 1.0, 1000.0, &wide).unwrap();
        let second = 1000.0f64.powf(1.0 / 99.0);
        assert!((w - second).abs() < 1e-12);
        assert!(w < 1000.0f64.ln());

        // The approximation tracks the exact equal-power proxy within x3.
        for b in [2usize, 5, 10] {
            let inst = unit_instance(b, 1, 1.0, 1e6, 1.0, 1.0);
            let exact = solve_x(
                &PowerAllocation {
                    p: Array2::from_elem((b, 1), 1.0),
                },
                &inst,
            )
            .unwrap()[[0, 0]];
            let approx = fixed_power_x(1.0, 1.0, 1e6, &inst).unwrap();
            let ratio = approx / exact;
            assert!(
                (1.0 / 3.0..=3.0).contains(&ratio),
                "B = {b}: approx {approx} vs exact {exact}"
            );
        }
    }

    #[test]
    fn solution_serializes_round_trip() {
        let inst = unit_instance(2, 2, 1.5, 500.0, 2.0, 1.0);
        let sol = solve_op(&inst).unwrap();
        let json = serde_json::to_string(&sol).unwrap();
        let back: OpSolution = serde_json::from_str(&json).unwrap();
        assert_eq!(sol, back);
        let inst_json = serde_json::to_string(&inst).unwrap();
        let inst_back: OpInstance = serde_json::from_str(&inst_json).unwrap();
        assert_eq!(inst, inst_back);
    }
}
