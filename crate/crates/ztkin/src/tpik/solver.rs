//! Prioritized damped least-squares resolution of stacked task levels.
//!
//! Levels are solved best-effort in priority order. Each level works inside
//! the null space left over by the levels above it, tracked by a projector
//! `Q` that starts at the identity and loses the row space a level actually
//! controls. Directions with healthy singular values are consumed outright
//! (exact strict priority); directions near the singular threshold are
//! consumed fractionally and damped, which keeps the solution continuous as
//! activations and singular values drift.

use crate::error::{Error, Result};
use crate::tpik::objective::smoothstep;
use nalgebra::{DMatrix, DVector};

/// Numerical knobs of the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// Singular values below this are treated as fading directions: they
    /// get damped and only partially consume the null space.
    pub sigma_threshold: f64,
    /// Peak damping factor applied inside the threshold band and scaled by
    /// activation pressure.
    pub damping: f64,
    /// Component-wise clamp on the returned joint rates, rad/s.
    pub velocity_limit: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            sigma_threshold: 1e-4,
            damping: 1e-3,
            velocity_limit: f64::INFINITY,
        }
    }
}

/// One priority level, already flattened to matrix form.
#[derive(Debug, Clone)]
pub struct LevelEval {
    /// Task names feeding this level, for diagnostics.
    pub label: String,
    /// Stacked task rows, `rows x dof`.
    pub jacobian: DMatrix<f64>,
    /// Reference rate per row.
    pub rates: DVector<f64>,
    /// Activation weight per row in `[0, 1]`.
    pub activations: DVector<f64>,
    /// Per-level `(sigma_threshold, damping)` for the damped inverse, when
    /// this level's rows live on a different scale than the global
    /// setting (scalar gradient rows, typically). Null-space consumption
    /// still follows the global threshold, so priority semantics do not
    /// change.
    pub damping_override: Option<(f64, f64)>,
}

impl LevelEval {
    pub fn new(label: &str, jacobian: DMatrix<f64>, rates: DVector<f64>) -> Self {
        let rows = jacobian.nrows();
        Self {
            label: label.into(),
            jacobian,
            rates,
            activations: DVector::from_element(rows, 1.0),
            damping_override: None,
        }
    }
}

/// Joint rates plus per-level bookkeeping.
#[derive(Debug, Clone)]
pub struct SolverOutput {
    pub q_dot: DVector<f64>,
    /// `|A (rate - J q_dot)|` per level, evaluated at the returned rates.
    pub level_residuals: Vec<f64>,
    /// Null-space projector remaining after each level has consumed its
    /// controlled directions.
    pub projectors: Vec<DMatrix<f64>>,
    /// Raw task rows per level, in solve order; lets callers project a
    /// level's rows through a higher level's null space (e.g. to detect that
    /// a gradient objective has hit a constrained optimum).
    pub level_jacobians: Vec<DMatrix<f64>>,
}

/// Solve the stacked levels for joint rates.
pub fn solve_levels(
    levels: &[LevelEval],
    dof: usize,
    params: &SolverParams,
) -> Result<SolverOutput> {
    if levels.is_empty() {
        return Err(Error::NoTasks);
    }
    for level in levels {
        let rows = level.jacobian.nrows();
        if level.jacobian.ncols() != dof
            || level.rates.len() != rows
            || level.activations.len() != rows
        {
            return Err(Error::DimensionMismatch {
                expected: dof,
                got: level.jacobian.ncols(),
            });
        }
        let finite = level.jacobian.iter().all(|x| x.is_finite())
            && level.rates.iter().all(|x| x.is_finite())
            && level.activations.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFiniteJacobian {
                task: level.label.clone(),
            });
        }
    }

    let mut q_dot = DVector::<f64>::zeros(dof);
    let mut q_null = DMatrix::<f64>::identity(dof, dof);
    let mut projectors = Vec::with_capacity(levels.len());

    for level in levels {
        let rows = level.jacobian.nrows();
        // Remaining demand once higher levels have spoken.
        let rho = &level.rates - &level.jacobian * &q_dot;
        let mut a_j_q = &level.jacobian * &q_null;
        let mut a_rho = rho;
        for r in 0..rows {
            let a = level.activations[r].clamp(0.0, 1.0);
            for c in 0..dof {
                a_j_q[(r, c)] *= a;
            }
            a_rho[r] *= a;
        }
        let (damp_threshold, damping) = level
            .damping_override
            .unwrap_or((params.sigma_threshold, params.damping));
        // Rows mid-activation get extra damping so they blend in and out
        // of the hierarchy without rate jumps.
        let pressure: f64 = level
            .activations
            .iter()
            .map(|a| {
                let a = a.clamp(0.0, 1.0);
                a * (1.0 - a)
            })
            .sum();
        let lambda_act_sq = damping * damping * pressure;

        let svd = a_j_q.svd(true, true);
        let u = svd.u.as_ref().unwrap();
        let v_t = svd.v_t.as_ref().unwrap();
        let k = svd.singular_values.len();
        for i in 0..k {
            let sigma = svd.singular_values[i];
            if sigma <= 0.0 {
                continue;
            }
            let band = (sigma / damp_threshold).min(1.0);
            // Chiaverini-style variable damping: zero for healthy
            // directions, full inside the threshold band.
            let lambda_sq = damping * damping * (1.0 - band * band) + lambda_act_sq;
            let gain = sigma / (sigma * sigma + lambda_sq);
            let coeff = gain * u.column(i).dot(&a_rho);
            let v_i = v_t.row(i).transpose();
            q_dot.axpy(coeff, &v_i, 1.0);
            // Fractional null-space consumption: exact for sigma at or
            // above the threshold, tapering smoothly to none at zero.
            let f = smoothstep(sigma / params.sigma_threshold);
            if f > 0.0 {
                q_null.ger(-f, &v_i, &v_i, 1.0);
            }
        }
        projectors.push(q_null.clone());
    }

    if params.velocity_limit.is_finite() {
        for v in q_dot.iter_mut() {
            *v = v.clamp(-params.velocity_limit, params.velocity_limit);
        }
    }

    let level_residuals = levels
        .iter()
        .map(|level| {
            let mut r = &level.rates - &level.jacobian * &q_dot;
            for i in 0..r.len() {
                r[i] *= level.activations[i].clamp(0.0, 1.0);
            }
            r.norm()
        })
        .collect();

    Ok(SolverOutput {
        q_dot,
        level_residuals,
        projectors,
        level_jacobians: levels.iter().map(|l| l.jacobian.clone()).collect(),
    })
}
