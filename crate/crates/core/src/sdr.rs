//! SDR benchmark for the per-RIS phase subproblem: lift the unit-modulus
//! quadratic program to a diagonally-constrained semidefinite program, solve
//! it by operator splitting, round by Gaussian randomization and accept the
//! candidate only if it improves the quadratic objective.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::ao::PhaseQuadratic;
use crate::error::{Error, Result};
use crate::model::PhaseMode;
use crate::numerics::{psd_project, psd_sqrt, HermitianMatrix};

/// Operator-splitting parameters for the diagonal-constrained SDP.
#[derive(Debug, Clone)]
pub struct AdmmSettings {
    pub rho: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        AdmmSettings { rho: 1.0, max_iters: 2000, tol: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct SdrSettings {
    /// Gaussian randomization trials per rounding.
    pub trials: usize,
    pub admm: AdmmSettings,
}

impl Default for SdrSettings {
    fn default() -> Self {
        SdrSettings { trials: 200, admm: AdmmSettings::default() }
    }
}

/// The lifted problem: maximize `tr(Q V)` over PSD `V` with unit diagonal,
/// where `Q` embeds the phase quadratic and an auxiliary rotation scalar.
#[derive(Debug, Clone)]
pub struct LiftedProblem {
    q: HermitianMatrix,
    pub trials: usize,
    pub admm: AdmmSettings,
}

impl LiftedProblem {
    pub fn q(&self) -> &DMatrix<Complex64> {
        self.q.as_matrix()
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }
}

/// Lifts `-phi^H U phi + 2 Re(z^H phi)` into the `(N+1) x (N+1)` block matrix
/// `[[-U, z], [z^H, 0]]` so that `tr(Q v v^H)` reproduces the objective for
/// `v = [phi; 1]`.
pub fn build_lifted(quad: &PhaseQuadratic, settings: &SdrSettings) -> LiftedProblem {
    let n = quad.dim();
    let mut q = DMatrix::<Complex64>::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] = -quad.u[(i, j)];
        }
        q[(i, n)] = quad.z[i];
        q[(n, i)] = quad.z[i].conj();
    }
    LiftedProblem {
        q: HermitianMatrix::symmetrize(&q),
        trials: settings.trials,
        admm: settings.admm.clone(),
    }
}

/// Objective `tr(Q V)` (real for hermitian arguments).
pub fn lifted_objective(lp: &LiftedProblem, v: &DMatrix<Complex64>) -> f64 {
    (lp.q() * v).trace().re
}

/// Solves `max tr(Q V)` s.t. `V >= 0`, `diag(V) = 1` by alternating a linear
/// ascent step with the diagonal pinned and a projection onto the PSD cone,
/// with dual accumulation. Momentum with restart plus gentle residual
/// balancing of the penalty (starting from the configured `rho`) removes the
/// sublinear tail that plain splitting shows on degenerate optimal faces.
/// The returned matrix satisfies both feasibility tolerances (`diag` within
/// `tol`, minimum eigenvalue above `-tol`).
pub fn solve_diag_sdp(lp: &LiftedProblem) -> Result<DMatrix<Complex64>> {
    let n = lp.dim();
    let scale = lp.q().norm();
    let eye = DMatrix::<Complex64>::identity(n, n);
    if scale == 0.0 {
        return Ok(eye);
    }
    let q_scaled = lp.q() / Complex64::new(scale, 0.0);
    let mut rho = lp.admm.rho;
    let mut z = eye.clone();
    let mut u = DMatrix::<Complex64>::zeros(n, n);
    let mut z_hat = z.clone();
    let mut u_hat = u.clone();
    let mut momentum = 1.0_f64;
    let mut combined_prev = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let max_abs = |m: &DMatrix<Complex64>| m.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    for it in 0..lp.admm.max_iters {
        // Linear ascent with the diagonal pinned to one.
        let mut v = &z_hat - &u_hat + &q_scaled * Complex64::new(1.0 / rho, 0.0);
        for i in 0..n {
            v[(i, i)] = Complex64::new(1.0, 0.0);
        }
        let z_prev = z.clone();
        let u_prev = u.clone();
        z = psd_project(&HermitianMatrix::symmetrize(&(&v + &u_hat))).into_matrix();
        u = &u_hat + &v - &z;
        let primal = max_abs(&(&v - &z));
        let dual = max_abs(&(&z - &z_prev));
        residual = primal.max(dual);
        if residual <= lp.admm.tol {
            // The PSD iterate carries the diagonal error within the residual.
            return Ok(z);
        }
        let combined = (&v - &z).norm_squared() + (&z - &z_hat).norm_squared();
        if combined < 0.999 * combined_prev && combined.is_finite() {
            let next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let w = Complex64::new((momentum - 1.0) / next, 0.0);
            z_hat = &z + (&z - &z_prev) * w;
            u_hat = &u + (&u - &u_prev) * w;
            momentum = next;
            combined_prev = combined;
        } else {
            momentum = 1.0;
            z_hat = z.clone();
            u_hat = u.clone();
        }
        if it % 20 == 19 {
            let rescale = if primal > 5.0 * dual {
                1.5
            } else if dual > 5.0 * primal {
                1.0 / 1.5
            } else {
                1.0
            };
            if rescale != 1.0 {
                rho *= rescale;
                u /= Complex64::new(rescale, 0.0);
                momentum = 1.0;
                z_hat = z.clone();
                u_hat = u.clone();
                combined_prev = f64::INFINITY;
            }
        }
    }
    Err(Error::NonConvergence { max_iters: lp.admm.max_iters, residual })
}

/// Draws `trials` samples from `CN(0, V)`, de-rotates each by the phase of
/// the auxiliary last entry, projects onto unit modulus (snapping to the grid
/// in discrete mode) and returns the candidate maximizing `objective`.
pub fn gaussian_randomize<F: Fn(&DVector<Complex64>) -> f64>(
    v: &DMatrix<Complex64>,
    trials: usize,
    mode: PhaseMode,
    objective: F,
    rng: &mut ChaCha12Rng,
) -> DVector<Complex64> {
    let dim = v.nrows();
    let n = dim - 1;
    let factor = psd_sqrt(&HermitianMatrix::symmetrize(v));
    let mut best: Option<(DVector<Complex64>, f64)> = None;
    for _ in 0..trials {
        let g = DVector::from_fn(dim, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        });
        let u = &factor * g;
        let rot = u[n].arg();
        let phi = DVector::from_fn(n, |i, _| {
            let theta = mode.snap(u[i].arg() - rot);
            Complex64::from_polar(1.0, theta)
        });
        let val = objective(&phi);
        if best.as_ref().is_none_or(|(_, b)| val > *b) {
            best = Some((phi, val));
        }
    }
    best.expect("trials must be >= 1").0
}

/// Keeps the candidate only on strict improvement of the quadratic objective.
pub fn monotone_accept<F: Fn(&DVector<Complex64>) -> f64>(
    phi_old: DVector<Complex64>,
    phi_candidate: DVector<Complex64>,
    objective: F,
) -> DVector<Complex64> {
    if objective(&phi_candidate) > objective(&phi_old) {
        phi_candidate
    } else {
        phi_old
    }
}

/// Drop-in phase update for one RIS: lift, solve, randomize, accept. Keeps
/// the previous phases when the SDP fails to converge.
pub fn optimize_phases_sdr(
    quad: &PhaseQuadratic,
    phases: &[f64],
    mode: PhaseMode,
    settings: &SdrSettings,
    rng: &mut ChaCha12Rng,
) -> Vec<f64> {
    let lp = build_lifted(quad, settings);
    let v = match solve_diag_sdp(&lp) {
        Ok(v) => v,
        Err(_) => return phases.to_vec(),
    };
    let objective = |phi: &DVector<Complex64>| quad.value(phi);
    let candidate = gaussian_randomize(&v, settings.trials.max(1), mode, objective, rng);
    let old = DVector::from_iterator(
        phases.len(),
        phases.iter().map(|&t| Complex64::from_polar(1.0, t)),
    );
    let accepted = monotone_accept(old, candidate, objective);
    accepted
        .iter()
        .map(|c| c.arg().rem_euclid(std::f64::consts::TAU))
        .map(|t| mode.snap(t))
        .collect()
}
