//! Experiment runners.
//!
//! Each experiment implements [`Runner`] and registers under its
//! subcommand name; the driver resolves the name at runtime and hands
//! the runner the raw config plus output context. Adding an experiment
//! means adding one impl and one registry line.

use anyhow::{bail, Context};
use ndarray::Array2;
use serde_json::{json, Map, Value};

use sumrate::op::PowerAllocation;
use sumrate::{bounds, design, miso, op, sched, snr};

use crate::config::{
    self, BoundsConfig, DesignConfig, MisoConfig, OpSolveConfig, ScalingSweepConfig,
    ScheduleSimConfig,
};
use crate::output::{num, write_csv, RunArtifacts, RunContext};

pub trait Runner: Sync {
    fn name(&self) -> &'static str;
    fn run(&self, raw: &Value, ctx: &RunContext) -> anyhow::Result<RunArtifacts>;
}

pub fn registry() -> Vec<Box<dyn Runner>> {
    vec![
        Box::new(BoundsRunner),
        Box::new(ScalingSweepRunner),
        Box::new(OpSolveRunner),
        Box::new(ScheduleSimRunner),
        Box::new(DesignRunner),
        Box::new(MisoRunner),
    ]
}

pub fn find(name: &str) -> anyhow::Result<Box<dyn Runner>> {
    registry()
        .into_iter()
        .find(|r| r.name() == name)
        .with_context(|| format!("no experiment named {name:?}"))
}

/// Map "the math says no" outcomes to `None`, real failures to errors.
fn optional<T>(r: sumrate::Result<T>) -> anyhow::Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ (sumrate::Error::Infeasible(_) | sumrate::Error::NoSolution(_))) => {
            log::info!("reporting null result: {e}");
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

struct BoundsRunner;

impl Runner for BoundsRunner {
    fn name(&self) -> &'static str {
        "bounds"
    }

    fn run(&self, raw: &Value, ctx: &RunContext) -> anyhow::Result<RunArtifacts> {
        let cfg: BoundsConfig = config::parse(raw)?;
        if cfg.k_values.is_empty() {
            bail!("k_values must be nonempty");
        }
        let layout = cfg.layout.build(cfg.seed)?;
        let mut rows = Vec::new();
        for &k in &cfg.k_values {
            let r = bounds::mc_bounds(
                &layout,
                &cfg.channel,
                k,
                cfg.num_channels,
                cfg.trials,
                cfg.users,
                cfg.seed,
            )?;
            rows.push(vec![
                k.to_string(),
                r.trials.to_string(),
                num(ctx.rate(r.lower)),
                num(ctx.rate(r.upper)),
                num(ctx.rate(r.upper_jensen)),
                num(ctx.rate(r.std_error_lower)),
                num(ctx.rate(r.std_error_upper)),
                num(ctx.rate(r.std_error_jensen)),
            ]);
        }
        write_csv(
            &ctx.path("bounds.csv"),
            &[
                "k",
                "trials",
                "lower",
                "upper",
                "upper_jensen",
                "std_error_lower",
                "std_error_upper",
                "std_error_jensen",
            ],
            &rows,
        )?;
        Ok(RunArtifacts {
            results: json!({ "rows": rows.len() }),
            outputs: vec!["bounds.csv".into()],
        })
    }
}

struct ScalingSweepRunner;

impl Runner for ScalingSweepRunner {
    fn name(&self) -> &'static str {
        "scaling-sweep"
    }

    fn run(&self, raw: &Value, ctx: &RunContext) -> anyhow::Result<RunArtifacts> {
        let cfg: ScalingSweepConfig = config::parse(raw)?;
        if cfg.k_values.is_empty() {
            bail!("k_values must be nonempty");
        }
        let path = cfg.path.build()?;
        let mut rows = Vec::new();
        for &k in &cfg.k_values {
            let closed = snr::scaling_point(&cfg.fading, k, cfg.p, &path)?;
            let (band_lo, band_hi) = snr::concentration_band(&cfg.fading, k, cfg.p, &path)?;
            let numeric = if cfg.numeric {
                num(snr::numeric_scaling_point(
                    &cfg.fading,
                    k,
                    cfg.d,
                    cfg.p,
                    &path,
                    cfg.seed,
                )?)
            } else {
                String::new()
            };
            rows.push(vec![
                num(k),
                num(closed),
                numeric,
                num(band_lo),
                num(band_hi),
            ]);
        }
        write_csv(
            &ctx.path("scaling_points.csv"),
            &["k", "closed_form", "numeric", "band_lo", "band_hi"],
            &rows,
        )?;
        Ok(RunArtifacts {
            results: json!({
                "family": cfg.fading.name(),
                "rows": rows.len(),
            }),
            outputs: vec!["scaling_points.csv".into()],
        })
    }
}

fn solution_rows(sol: &op::OpSolution) -> Vec<Vec<String>> {
    let (rows, cols) = sol.powers.p.dim();
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for n in 0..cols {
            out.push(vec![
                i.to_string(),
                n.to_string(),
                num(sol.powers.p[[i, n]]),
                num(sol.x[[i, n]]),
            ]);
        }
    }
    out
}

struct OpSolveRunner;

impl Runner for OpSolveRunner {
    fn name(&self) -> &'static str {
        "op-solve"
    }

    fn run(&self, raw: &Value, ctx: &RunContext) -> anyhow::Result<RunArtifacts> {
        let cfg: OpSolveConfig = config::parse(raw)?;
        let sol = op::solve_op_seeded(&cfg.instance, cfg.seed)?;
        write_csv(
            &ctx.path("op_solution.csv"),
            &["tx", "channel", "power", "x"],
            &solution_rows(&sol),
        )?;
        let mut outputs = vec!["op_solution.csv".into()];
        let mut results = Map::new();
        results.insert("objective".into(), json!(ctx.rate(sol.objective)));
        results.insert("converged".into(), json!(sol.converged));
        results.insert("iterations".into(), json!(sol.iterations));
        if let Some(spec) = cfg.bracket {
            let br = op::theorem3_bracket(&cfg.instance, spec.k, spec.s1)?;
            write_csv(
                &ctx.path("bracket.csv"),
                &[
                    "lo",
                    "hi",
                    "prefactor_lo",
                    "prefactor_hi",
                    "conservative_objective",
                    "optimistic_objective",
                ],
                &[vec![
                    num(ctx.rate(br.lo)),
                    num(ctx.rate(br.hi)),
                    num(br.prefactor_lo),
                    num(br.prefactor_hi),
                    num(ctx.rate(br.conservative.objective)),
                    num(ctx.rate(br.optimistic.objective)),
                ]],
            )?;
            outputs.push("bracket.csv".into());
        }
        if let Some(spec) = cfg.ratio_check {
            let ratio = op::op_ratio_check(&cfg.instance, spec.c1, spec.c2, spec.hk)?;
            results.insert("ratio".into(), json!(ratio));
        }
        Ok(RunArtifacts {
            results: Value::Object(results),
            outputs,
        })
    }
}

struct ScheduleSimRunner;

impl Runner for ScheduleSimRunner {
    fn name(&self) -> &'static str {
        "schedule-sim"
    }

    fn run(&self, raw: &Value, ctx: &RunContext) -> anyhow::Result<RunArtifacts> {
        let cfg: ScheduleSimConfig = config::parse(raw)?;
        let layout = cfg.layout.build(cfg.seed)?;
        let b = layout.num_tx();
        let powers = match &cfg.powers {
            Some(given) => {
                if given.len() != b || given.iter().any(|r| r.len() != cfg.num_channels) {
                    bail!(
                        "powers must be a {b} x {} matrix matching the layout",
                        cfg.num_channels
                    );
                }
                let flat: Vec<f64> = given.iter().flatten().copied().collect();
                PowerAllocation {
                    p: Array2::from_shape_vec((b, cfg.num_channels), flat)?,
                }
            }
            None => PowerAllocation::equal_split(b, cfg.num_channels, cfg.channel.pcon),
        };
        let runs = sched::schedule_trials(
            &layout,
            &cfg.channel,
            cfg.k,
            cfg.num_channels,
            &powers,
            cfg.trials,
            cfg.users,
            cfg.seed,
        )?;
        let mut rows = Vec::new();
        for run in &runs {
            for i in 0..b {
                for n in 0..cfg.num_channels {
                    let sinr = run.sinr[[i, n]];
                    rows.push(vec![
                        run.trial.to_string(),
                        i.to_string(),
                        n.to_string(),
                        run.assignment.user_of[[i, n]].to_string(),
                        num(sinr),
                        num(ctx.rate(sinr.ln_1p())),
                    ]);
                }
            }
        }
        write_csv(
            &ctx.path("schedule_trials.csv"),
            &["trial", "tx", "channel", "user", "sinr", "rate"],
            &rows,
        )?;
        let rates: Vec<f64> = runs.iter().map(|r| r.rate).collect();
        let (mean, stderr) = sumrate::numerics::mean_stderr(&rates);
        let p2p = if cfg.k >= 16 {
            let s = sched::p2p_scaling(cfg.k as f64, b as f64, cfg.num_channels as f64)?;
            json!({
                "regime": s.regime,
                "predicted_rate_scale": ctx.rate(s.predicted_rate_scale),
                "gain_branch": s.gain_branch,
                "gain_over_single_tx": s.gain_over_single_tx,
            })
        } else {
            Value::Null
        };
        Ok(RunArtifacts {
            results: json!({
                "rate": ctx.rate(mean),
                "std_error": ctx.rate(stderr),
                "trials": cfg.trials,
                "p2p": p2p,
            }),
            outputs: vec!["schedule_trials.csv".into()],
        })
    }
}

struct DesignRunner;

impl Runner for DesignRunner {
    fn name(&self) -> &'static str {
        "design"
    }

    fn run(&self, raw: &Value, ctx: &RunContext) -> anyhow::Result<RunArtifacts> {
        let cfg: DesignConfig = config::parse(raw)?;
        log::debug!("seed {} unused: design outputs are deterministic", cfg.seed);
        if !(cfg.rho_step > 0.0) || !(cfg.rho_max > cfg.rho_min) || !(cfg.rho_min >= 1.0) {
            bail!("need rho_min >= 1, rho_max > rho_min and a positive rho_step");
        }
        let steps = ((cfg.rho_max - cfg.rho_min) / cfg.rho_step).round() as usize;
        let grid: Vec<f64> = (0..=steps)
            .map(|i| cfg.rho_min + i as f64 * cfg.rho_step)
            .collect();
        let c = cfg.c_over_sbar;
        let s = cfg.sbar_over_c;

        let mut rows = Vec::new();
        for &rho in &grid {
            rows.push(vec![
                num(rho),
                num(rho),
                num(c * rho.ln().ln_1p()),
                "feasibility".into(),
            ]);
        }
        for &lambda in &cfg.lambdas {
            if !(lambda > 0.0) {
                bail!("lambdas must be positive, got {lambda}");
            }
            let label = format!("stationarity_lambda_{}", num(lambda));
            for &rho in &grid {
                let rhs = (lambda + 1.0) * c / ((1.0 + rho.ln()) * lambda);
                rows.push(vec![num(rho), num(rho), num(rhs), label.clone()]);
            }
        }
        for &rho in &grid {
            rows.push(vec![
                num(rho),
                num(s),
                num(rho.ln().ln_1p() / rho),
                "ratio".into(),
            ]);
        }
        write_csv(
            &ctx.path("design_curves.csv"),
            &["rho", "lhs", "rhs", "constraint"],
            &rows,
        )?;

        let feasible = optional(design::principle3_feasible_range(c))?;
        let lambda_threshold = optional(design::principle3_lambda_threshold(c))?;
        let kkt_limit = optional(design::principle3_kkt_rho(f64::INFINITY, c))?;
        let mut kkt = Map::new();
        for &lambda in &cfg.lambdas {
            kkt.insert(
                num(lambda),
                json!(optional(design::principle3_kkt_rho(lambda, c))?),
            );
        }
        let (ratio_peak, ratio_max) = design::principle4_threshold();
        let rho_star = optional(design::principle4_rho_star(s))?;
        Ok(RunArtifacts {
            results: json!({
                "feasible_range": feasible.map(|(lo, hi)| json!({ "rho_min": lo, "rho_max": hi })),
                "lambda_threshold": lambda_threshold,
                "kkt_rho_limit": kkt_limit,
                "kkt_rho": kkt,
                "ratio_threshold": { "rho": ratio_peak, "value": ratio_max },
                "rho_star": rho_star,
            }),
            outputs: vec!["design_curves.csv".into()],
        })
    }
}

struct MisoRunner;

impl Runner for MisoRunner {
    fn name(&self) -> &'static str {
        "miso"
    }

    fn run(&self, raw: &Value, ctx: &RunContext) -> anyhow::Result<RunArtifacts> {
        let cfg: MisoConfig = config::parse(raw)?;
        let sol = miso::solve_op_miso_seeded(&cfg.instance, cfg.m, cfg.seed)?;
        let beams = miso::random_orthonormal_beams(cfg.m, cfg.seed)?;
        let (rows_total, cols) = sol.powers.p.dim();
        let mut rows = Vec::with_capacity(rows_total * cols);
        for r in 0..rows_total {
            for n in 0..cols {
                rows.push(vec![
                    (r / cfg.m).to_string(),
                    (r % cfg.m).to_string(),
                    n.to_string(),
                    num(sol.powers.p[[r, n]]),
                    num(sol.x[[r, n]]),
                ]);
            }
        }
        write_csv(
            &ctx.path("miso_solution.csv"),
            &["tx", "beam", "channel", "power", "x"],
            &rows,
        )?;
        Ok(RunArtifacts {
            results: json!({
                "objective": ctx.rate(sol.objective),
                "converged": sol.converged,
                "iterations": sol.iterations,
                "gram_residual": beams.gram_residual(),
            }),
            outputs: vec!["miso_solution.csv".into()],
        })
    }
}
