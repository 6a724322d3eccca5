//! Posture-quality metrics and their configuration-space gradients.
//!
//! Both metrics are functions of the weighted Jacobian `Jw` (see
//! [`crate::chain::weighted_jacobian`]) and map to `[0, 1]`:
//!
//! * **dexterity** `eta1 = m / (gamma1 * gamma2)` with
//!   `gamma1 = sqrt(tr(Jw Jw^T))` and `gamma2 = sqrt(tr((Jw Jw^T)^-1))`,
//!   a Frobenius-norm condition measure that hits 1 exactly when all
//!   singular values coincide and falls toward 0 near singularities;
//! * **transmission ratio** `eta2 = |w^T t| / (|Jw^T w| * |Jw+ t|)`, the
//!   alignment between the joint torques induced by the commanded wrench
//!   and the joint rates realizing the commanded twist.
//!
//! Gradients are exact matrix-calculus expressions evaluated on supplied
//! Jacobian slices `d(Jw)/d(q_i)`; tests check them against direct
//! finite differences of the metric values.

use crate::error::{Error, Result};
use crate::geometry::{Twist, Wrench};
use nalgebra::{DMatrix, DVector};

/// Singular values with squared magnitude at or below this floor make the
/// weighted Jacobian unusable for either metric.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Convex weights blending the two metrics into one score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricWeights {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl MetricWeights {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        let w = Self { lambda1, lambda2 };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let sum = self.lambda1 + self.lambda2;
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::BadWeights {
                lambda1: self.lambda1,
                lambda2: self.lambda2,
            });
        }
        Ok(())
    }
}

impl Default for MetricWeights {
    fn default() -> Self {
        Self {
            lambda1: 0.5,
            lambda2: 0.5,
        }
    }
}

/// Dexterity value with the two factors it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dexterity {
    pub eta1: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

/// Both metric values at one posture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub eta1: f64,
    pub eta2: f64,
    pub eta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

struct SvdParts {
    u: DMatrix<f64>,
    v_t: DMatrix<f64>,
    sigma: DVector<f64>,
}

fn thin_svd(jw: &DMatrix<f64>) -> Result<SvdParts> {
    let m = jw.nrows();
    if m > jw.ncols() {
        return Err(Error::DegenerateInput(format!(
            "need at least as many columns as rows, got {}x{}",
            m,
            jw.ncols()
        )));
    }
    let svd = jw.clone().svd(true, true);
    let sigma = DVector::from_iterator(m, svd.singular_values.iter().copied().take(m));
    let min_sq = sigma[m - 1] * sigma[m - 1];
    if !(min_sq > SIGMA_FLOOR) {
        return Err(Error::SingularJacobian {
            sigma_sq: min_sq,
            floor: SIGMA_FLOOR,
        });
    }
    Ok(SvdParts {
        u: svd.u.unwrap(),
        v_t: svd.v_t.unwrap(),
        sigma,
    })
}

fn pseudo_inverse(parts: &SvdParts) -> DMatrix<f64> {
    // V * diag(1/sigma) * U^T, valid because the floor already rejected
    // rank-deficient input.
    let m = parts.sigma.len();
    let mut vs = parts.v_t.transpose();
    for c in 0..m {
        let inv = 1.0 / parts.sigma[c];
        for r in 0..vs.nrows() {
            vs[(r, c)] *= inv;
        }
    }
    vs * parts.u.transpose()
}

fn gram_inverse(parts: &SvdParts) -> DMatrix<f64> {
    // (Jw Jw^T)^-1 = U diag(sigma^-2) U^T.
    let m = parts.sigma.len();
    let mut us = parts.u.clone();
    for c in 0..m {
        let inv = 1.0 / (parts.sigma[c] * parts.sigma[c]);
        for r in 0..m {
            us[(r, c)] *= inv;
        }
    }
    us * parts.u.transpose()
}

fn dexterity_from_parts(parts: &SvdParts) -> Dexterity {
    let m = parts.sigma.len() as f64;
    let gamma1 = parts.sigma.iter().map(|s| s * s).sum::<f64>().sqrt();
    let gamma2 = parts
        .sigma
        .iter()
        .map(|s| 1.0 / (s * s))
        .sum::<f64>()
        .sqrt();
    Dexterity {
        eta1: m / (gamma1 * gamma2),
        gamma1,
        gamma2,
    }
}

/// Dexterity of a weighted Jacobian with full row rank.
pub fn dexterity(jw: &DMatrix<f64>) -> Result<Dexterity> {
    Ok(dexterity_from_parts(&thin_svd(jw)?))
}

/// Exact gradient of `eta1` given the Jacobian slices `d(Jw)/d(q_i)`.
///
/// Uses `d(gamma1) = tr(Jw dJw^T) / gamma1` and
/// `d(gamma2) = -tr(M^-1 (dJw Jw^T + Jw dJw^T) M^-1) / (2 gamma2)` with
/// `M = Jw Jw^T`.
pub fn dexterity_gradient(jw: &DMatrix<f64>, partials: &[DMatrix<f64>]) -> Result<DVector<f64>> {
    let parts = thin_svd(jw)?;
    let dex = dexterity_from_parts(&parts);
    let m_inv = gram_inverse(&parts);
    let mut grad = DVector::zeros(partials.len());
    for (i, dj) in partials.iter().enumerate() {
        // tr(Jw dJw^T) is the Frobenius inner product of the two matrices.
        let d_gamma1 = jw.dot(dj) / dex.gamma1;
        let s = dj * jw.transpose() + jw * dj.transpose();
        let d_gamma2 = -(&m_inv * s * &m_inv).trace() / (2.0 * dex.gamma2);
        grad[i] = -dex.eta1 * (d_gamma1 / dex.gamma1 + d_gamma2 / dex.gamma2);
    }
    Ok(grad)
}

fn homogenized(twist: &Twist, wrench: &Wrench, char_length: f64) -> (DVector<f64>, DVector<f64>) {
    // Linear velocity and moment are divided by the characteristic length
    // so that both vectors live in the same units as the weighted Jacobian.
    let t = twist.to_vector();
    let w = wrench.to_vector();
    let mut th = DVector::zeros(6);
    let mut wh = DVector::zeros(6);
    for k in 0..3 {
        th[k] = t[k] / char_length;
        th[k + 3] = t[k + 3];
        wh[k] = w[k];
        wh[k + 3] = w[k + 3] / char_length;
    }
    (th, wh)
}

/// Transmission ratio of a commanded twist/wrench pair at a posture.
pub fn rtr(jw: &DMatrix<f64>, twist: &Twist, wrench: &Wrench, char_length: f64) -> Result<f64> {
    let parts = thin_svd(jw)?;
    let (th, wh) = homogenized(twist, wrench, char_length);
    let tau = jw.transpose() * &wh;
    let qd = pseudo_inverse(&parts) * &th;
    let g1 = tau.norm();
    let g2 = qd.norm();
    if g1 <= 1e-12 || g2 <= 1e-12 {
        return Err(Error::DegenerateInput(
            "commanded wrench or twist maps to (numerically) zero joint load".into(),
        ));
    }
    Ok((wh.dot(&th)).abs() / (g1 * g2))
}

/// Exact gradient of `eta2` given the Jacobian slices `d(Jw)/d(q_i)`.
///
/// The numerator `|w^T t|` does not depend on the posture, so the gradient
/// only tracks the two denominators. The pseudo-inverse derivative for a
/// full-row-rank Jacobian is
/// `dJ+ = -J+ dJ J+ + (I - J+ J) dJ^T (J J^T)^-1`.
pub fn rtr_gradient(
    jw: &DMatrix<f64>,
    partials: &[DMatrix<f64>],
    twist: &Twist,
    wrench: &Wrench,
    char_length: f64,
) -> Result<DVector<f64>> {
    let parts = thin_svd(jw)?;
    let (th, wh) = homogenized(twist, wrench, char_length);
    let j_plus = pseudo_inverse(&parts);
    let m_inv = gram_inverse(&parts);
    let tau = jw.transpose() * &wh;
    let qd = &j_plus * &th;
    let g1 = tau.norm();
    let g2 = qd.norm();
    if g1 <= 1e-12 || g2 <= 1e-12 {
        return Err(Error::DegenerateInput(
            "commanded wrench or twist maps to (numerically) zero joint load".into(),
        ));
    }
    let eta2 = (wh.dot(&th)).abs() / (g1 * g2);
    let n = jw.ncols();
    let range_complement = DMatrix::<f64>::identity(n, n) - &j_plus * jw;
    let mut grad = DVector::zeros(partials.len());
    for (i, dj) in partials.iter().enumerate() {
        let d_g1 = tau.dot(&(dj.transpose() * &wh)) / g1;
        let d_j_plus = -(&j_plus * dj * &j_plus) + &range_complement * dj.transpose() * &m_inv;
        let d_g2 = qd.dot(&(d_j_plus * &th)) / g2;
        grad[i] = -eta2 * (d_g1 / g1 + d_g2 / g2);
    }
    Ok(grad)
}

/// Convex blend `lambda1 * eta1 + lambda2 * eta2`.
pub fn combined_score(eta1: f64, eta2: f64, weights: &MetricWeights) -> Result<f64> {
    weights.validate()?;
    Ok(weights.lambda1 * eta1 + weights.lambda2 * eta2)
}

/// Both metric values plus the blend, sharing one decomposition.
pub fn metric_sample(
    jw: &DMatrix<f64>,
    twist: &Twist,
    wrench: &Wrench,
    char_length: f64,
    weights: &MetricWeights,
) -> Result<MetricSample> {
    let parts = thin_svd(jw)?;
    let dex = dexterity_from_parts(&parts);
    let (th, wh) = homogenized(twist, wrench, char_length);
    let tau = jw.transpose() * &wh;
    let qd = pseudo_inverse(&parts) * &th;
    let g1 = tau.norm();
    let g2 = qd.norm();
    if g1 <= 1e-12 || g2 <= 1e-12 {
        return Err(Error::DegenerateInput(
            "commanded wrench or twist maps to (numerically) zero joint load".into(),
        ));
    }
    let eta2 = (wh.dot(&th)).abs() / (g1 * g2);
    Ok(MetricSample {
        eta1: dex.eta1,
        eta2,
        eta: combined_score(dex.eta1, eta2, weights)?,
        gamma1: dex.gamma1,
        gamma2: dex.gamma2,
    })
}
