//! Alternating optimizer: cyclic closed-form updates of the rate auxiliaries,
//! receive beamformers, RIS phases and energy partitions.
//!
//! Each outer iteration refreshes the Lagrangian-dual auxiliaries `eta`, then
//! runs three quadratic-transform blocks (`gamma`/W, `xi`/phases,
//! `lambda`/beta). Every block maximizes an exact minorant of the surrogate
//! `f1`, so the `f1` trace is nondecreasing and convergence is monitored on
//! its relative change.
//!
//! All auxiliary weights are kept in natural-log units (`B/ln 2` style
//! coefficients) so that the closed-form auxiliary updates are stationary
//! points of `f1` as implemented; the beamformer and phase updates are
//! invariant to that uniform rescaling.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::model::{
    backscatter_channel, completed_bits_model, interference_gain, local_frequency, ChannelSet,
    DecodeOrder, LinkState, Metrics, OptState, PhaseMode, RateModel, SystemConfig, C_BRANCH,
};
use crate::numerics::{self, HermitianMatrix};
use crate::sdr::{self, SdrSettings};
use crate::seed;

const LN2: f64 = std::f64::consts::LN_2;

/// Quantity watched by the stopping rule. The surrogate is what the algorithm
/// ascends; the true objective is always logged alongside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    Surrogate,
    TrueObjective,
}

/// Per-RIS phase subproblem solver: coordinate-wise closed form or the SDR
/// lift-and-randomize benchmark.
#[derive(Debug, Clone)]
pub enum PhaseSolver {
    Element,
    Sdr(SdrSettings),
}

#[derive(Debug, Clone)]
pub struct AoSettings {
    pub max_iters: usize,
    /// Relative change of the monitored objective that counts as converged.
    pub rel_tol: f64,
    /// Full element sweeps per outer iteration.
    pub phase_sweeps: usize,
    pub monitor: ObjectiveKind,
    pub phase_solver: PhaseSolver,
    /// Seeds the initializer and any randomized solver steps.
    pub seed: u64,
}

impl Default for AoSettings {
    fn default() -> Self {
        AoSettings {
            max_iters: 200,
            rel_tol: 1e-4,
            phase_sweeps: 1,
            monitor: ObjectiveKind::Surrogate,
            phase_solver: PhaseSolver::Element,
            seed: 0,
        }
    }
}

impl AoSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::Validation("max_iters must be >= 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Validation("rel_tol must be > 0".into()));
        }
        if self.phase_sweeps < 1 {
            return Err(Error::Validation("phase_sweeps must be >= 1".into()));
        }
        Ok(())
    }
}

/// One iteration record. Per-user vectors are in original user indexing.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub iter: usize,
    pub f1: f64,
    pub objective: f64,
    /// Completed user bits (offload plus local).
    pub done_p: Vec<f64>,
    /// Completed RIS bits.
    pub done_s: Vec<f64>,
    /// Local-computation bits.
    pub local: Vec<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn f1_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.f1).collect()
    }
}

#[derive(Debug, Clone)]
pub struct AoOutcome {
    pub state: OptState,
    pub trace: Trace,
    pub metrics: Metrics,
    pub order: DecodeOrder,
    pub iterations: usize,
    pub converged: bool,
}

// ---------------------------------------------------------------------------
// Fractional-programming weights
// ---------------------------------------------------------------------------

/// Natural-log weights of the surrogate terms for one rate model.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FpWeights {
    /// Weight of each primary branch term.
    pub wt_p: f64,
    /// Weight of the secondary log/linear terms (0 without SR).
    pub wt_s: f64,
    /// Active primary branch slots (index into the `[c=-1, c=+1]` pairs).
    pub branches: &'static [usize],
    pub secondary: bool,
}

pub(crate) fn fp_weights(cfg: &SystemConfig, model: RateModel) -> FpWeights {
    let atb = cfg.alpha * cfg.t * cfg.bandwidth;
    match model {
        RateModel::Symbiotic => FpWeights {
            wt_p: 0.5 * atb / LN2,
            wt_s: atb / (cfg.q * LN2),
            branches: &[0, 1],
            secondary: true,
        },
        RateModel::CompositeNoSr => FpWeights {
            wt_p: atb / LN2,
            wt_s: 0.0,
            branches: &[1],
            secondary: false,
        },
    }
}

fn amp_primary(wt: &FpWeights, eta: f64) -> f64 {
    (wt.wt_p * (1.0 + eta)).sqrt()
}

fn amp_secondary(wt: &FpWeights, eta: f64, q: f64) -> f64 {
    (wt.wt_s * q * (1.0 + eta)).sqrt()
}

// ---------------------------------------------------------------------------
// Surrogate evaluation
// ---------------------------------------------------------------------------

/// The seven surrogate terms: primary logs, primary linear, secondary logs,
/// secondary linear, primary ratios, secondary ratios, local computation.
pub fn surrogate_f1_terms(
    state: &OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<[f64; 7]> {
    surrogate_terms_model(state, channels, cfg, RateModel::Symbiotic)
}

pub(crate) fn surrogate_terms_model(
    state: &OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
    model: RateModel,
) -> Result<[f64; 7]> {
    let ls = LinkState::compute(state, channels, cfg, model)?;
    Ok(surrogate_terms_with(state, &ls, cfg, model))
}

pub(crate) fn surrogate_terms_with(
    state: &OptState,
    ls: &LinkState,
    cfg: &SystemConfig,
    model: RateModel,
) -> [f64; 7] {
    let wt = fp_weights(cfg, model);
    let window = cfg.alpha * cfg.t;
    let mut t = [0.0; 7];
    for k in 0..cfg.k {
        for &j in wt.branches {
            let eta = state.eta_p[k][j];
            t[0] += wt.wt_p * (1.0 + eta).ln();
            t[1] -= wt.wt_p * eta;
            let sig = ls.s[k][j].norm_sqr();
            let den = sig + ls.n[k];
            if den > 0.0 {
                t[4] += wt.wt_p * (1.0 + eta) * sig / den;
            }
        }
        if wt.secondary {
            let eta = state.eta_s[k];
            t[2] += wt.wt_s * (1.0 + eta).ln();
            t[3] -= wt.wt_s * eta;
            let sig = ls.t[k].norm_sqr();
            let den = cfg.q * sig + ls.n[k];
            if den > 0.0 {
                t[5] += wt.wt_s * cfg.q * (1.0 + eta) * sig / den;
            }
        }
        if window > 0.0 {
            t[6] += window / cfg.cycles_per_bit
                * local_frequency(state.beta[k], ls.e_off[k], cfg);
        }
    }
    t
}

/// Surrogate objective `f1` for the current state and auxiliaries.
pub fn surrogate_f1(state: &OptState, channels: &ChannelSet, cfg: &SystemConfig) -> Result<f64> {
    Ok(surrogate_f1_terms(state, channels, cfg)?.iter().sum())
}

pub(crate) fn surrogate_f1_model(
    state: &OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
    model: RateModel,
) -> Result<f64> {
    Ok(surrogate_terms_model(state, channels, cfg, model)?.iter().sum())
}

// ---------------------------------------------------------------------------
// Auxiliary updates
// ---------------------------------------------------------------------------

/// Sets the rate auxiliaries to the current SINRs, the tight point of the
/// Lagrangian dual transform.
pub fn update_eta(state: &mut OptState, channels: &ChannelSet, cfg: &SystemConfig) -> Result<()> {
    update_eta_model(state, channels, cfg, RateModel::Symbiotic)
}

pub(crate) fn update_eta_model(
    state: &mut OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
    model: RateModel,
) -> Result<()> {
    let ls = LinkState::compute(state, channels, cfg, model)?;
    let wt = fp_weights(cfg, model);
    for k in 0..cfg.k {
        state.eta_p[k] = [0.0; 2];
        for &j in wt.branches {
            state.eta_p[k][j] = if ls.n[k] > 0.0 {
                ls.s[k][j].norm_sqr() / ls.n[k]
            } else {
                0.0
            };
        }
        state.eta_s[k] = if wt.secondary && ls.n[k] > 0.0 {
            cfg.q * ls.t[k].norm_sqr() / ls.n[k]
        } else {
            0.0
        };
    }
    Ok(())
}

/// The shared quadratic-transform closed form: every FP auxiliary family
/// (`gamma`, `xi`, `lambda`) takes this value at its own point in the cycle.
fn fp_aux_with(
    state: &OptState,
    ls: &LinkState,
    cfg: &SystemConfig,
    model: RateModel,
) -> (Vec<[Complex64; 2]>, Vec<Complex64>) {
    let wt = fp_weights(cfg, model);
    let zero = Complex64::default();
    let mut aux_p = vec![[zero; 2]; cfg.k];
    let mut aux_s = vec![zero; cfg.k];
    for k in 0..cfg.k {
        for &j in wt.branches {
            let den = ls.s[k][j].norm_sqr() + ls.n[k];
            if den > 0.0 {
                aux_p[k][j] = ls.s[k][j] * (amp_primary(&wt, state.eta_p[k][j]) / den);
            }
        }
        if wt.secondary {
            let den = cfg.q * ls.t[k].norm_sqr() + ls.n[k];
            if den > 0.0 {
                aux_s[k] = ls.t[k] * (amp_secondary(&wt, state.eta_s[k], cfg.q) / den);
            }
        }
    }
    (aux_p, aux_s)
}

/// Quadratic-transform auxiliaries for the beamforming block.
pub fn update_gamma(state: &mut OptState, channels: &ChannelSet, cfg: &SystemConfig) -> Result<()> {
    update_gamma_model(state, channels, cfg, RateModel::Symbiotic)
}

pub(crate) fn update_gamma_model(
    state: &mut OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
    model: RateModel,
) -> Result<()> {
    let ls = LinkState::compute(state, channels, cfg, model)?;
    let (p, s) = fp_aux_with(state, &ls, cfg, model);
    state.gamma_p = p;
    state.gamma_s = s;
    Ok(())
}

/// Quadratic-transform auxiliaries for the phase block.
pub fn update_xi(state: &mut OptState, channels: &ChannelSet, cfg: &SystemConfig) -> Result<()> {
    update_xi_model(state, channels, cfg, RateModel::Symbiotic)
}

pub(crate) fn update_xi_model(
    state: &mut OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
    model: RateModel,
) -> Result<()> {
    let ls = LinkState::compute(state, channels, cfg, model)?;
    let (p, s) = fp_aux_with(state, &ls, cfg, model);
    state.xi_p = p;
    state.xi_s = s;
    Ok(())
}

/// Quadratic-transform auxiliaries for the energy-partition block.
pub fn update_lambda(state: &mut OptState, channels: &ChannelSet, cfg: &SystemConfig) -> Result<()> {
    update_lambda_model(state, channels, cfg, RateModel::Symbiotic)
}

pub(crate) fn update_lambda_model(
    state: &mut OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
    model: RateModel,
) -> Result<()> {
    let ls = LinkState::compute(state, channels, cfg, model)?;
    let (p, s) = fp_aux_with(state, &ls, cfg, model);
    state.lambda_p = p;
    state.lambda_s = s;
    Ok(())
}

// ---------------------------------------------------------------------------
// Beamforming block
// ---------------------------------------------------------------------------

/// Quadratic surrogate of the beamforming block (additive constants dropped),
/// evaluated with the stored `gamma` and `eta`.
pub fn f2_value(state: &OptState, channels: &ChannelSet, cfg: &SystemConfig) -> Result<f64> {
    f2_value_model(state, channels, cfg, RateModel::Symbiotic)
}

pub(crate) fn f2_value_model(
    state: &OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
    model: RateModel,
) -> Result<f64> {
    let ls = LinkState::compute(state, channels, cfg, model)?;
    let wt = fp_weights(cfg, model);
    let mut total = 0.0;
    for k in 0..cfg.k {
        for &j in wt.branches {
            let g = state.gamma_p[k][j];
            let amp = amp_primary(&wt, state.eta_p[k][j]);
            total += -g.norm_sqr() * (ls.s[k][j].norm_sqr() + ls.n[k])
                + 2.0 * (g.conj() * ls.s[k][j]).re * amp;
        }
        if wt.secondary {
            let g = state.gamma_s[k];
            let amp = amp_secondary(&wt, state.eta_s[k], cfg.q);
            total += -g.norm_sqr() * (cfg.q * ls.t[k].norm_sqr() + ls.n[k])
                + 2.0 * (g.conj() * ls.t[k]).re * amp;
        }
    }
    Ok(total)
}

/// Maximizes `-w^H B w + 2 Re(a^H w)` over the unit ball. The interior
/// solution is `B^{-1} a`; when that lies outside the ball the boundary
/// optimum `(B + mu I)^{-1} a` is located by bisection on the multiplier
/// (the norm is strictly decreasing in `mu`). The previous beamformer is
/// kept in degenerate cases.
pub(crate) fn solve_beamformer(
    b_mat: &DMatrix<Complex64>,
    a_vec: &DVector<Complex64>,
    prev: &DVector<Complex64>,
) -> DVector<Complex64> {
    if a_vec.norm() == 0.0 {
        return prev.clone();
    }
    let herm = HermitianMatrix::symmetrize(b_mat);
    if let Ok(w) = numerics::solve_hpd(&herm, a_vec) {
        if w.norm() <= 1.0 {
            return w;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(herm.into_matrix());
    // B is PSD by construction; clamp rounding-level negatives.
    let lambdas: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let coeffs = eig.eigenvectors.adjoint() * a_vec;
    let norm_sq = |mu: f64| -> f64 {
        coeffs
            .iter()
            .zip(&lambdas)
            .map(|(c, &l)| c.norm_sqr() / ((l + mu) * (l + mu)))
            .sum()
    };
    let mut lo = 0.0;
    let mut hi = a_vec.norm().max(1e-300);
    while norm_sq(hi) > 1.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return prev.clone();
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm_sq(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let mu = hi; // the feasible side of the bracket
    let scaled = DVector::from_iterator(
        coeffs.len(),
        coeffs.iter().zip(&lambdas).map(|(c, &l)| c / Complex64::new(l + mu, 0.0)),
    );
    let mut w = &eig.eigenvectors * scaled;
    let norm = w.norm();
    if norm > 1.0 {
        w /= Complex64::new(norm, 0.0);
    }
    w
}

/// Receive beamforming update.
pub fn update_w(state: &mut OptState, channels: &ChannelSet, cfg: &SystemConfig) -> Result<()> {
    update_w_model(state, channels, cfg, RateModel::Symbiotic)
}

pub(crate) fn update_w_model(
    state: &mut OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
    model: RateModel,
) -> Result<()> {
    let ls = LinkState::compute(state, channels, cfg, model)?;
    let wt = fp_weights(cfg, model);
    let eye = DMatrix::<Complex64>::identity(cfg.m, cfg.m);
    for k in 0..cfg.k {
        // Interference-plus-noise covariance from lower-priority users.
        let mut delta = &eye * Complex64::new(cfg.noise_power, 0.0);
        for i in (k + 1)..cfg.k {
            match model {
                RateModel::Symbiotic => {
                    delta += (&channels.h_d[i] * channels.h_d[i].adjoint()
                        + &ls.b[i] * ls.b[i].adjoint())
                        * Complex64::new(ls.p[i], 0.0);
                }
                RateModel::CompositeNoSr => {
                    let hc = &channels.h_d[i] + &ls.b[i];
                    delta += (&hc * hc.adjoint()) * Complex64::new(ls.p[i], 0.0);
                }
            }
        }
        let root_p = ls.p[k].sqrt();
        let mut a_vec = DVector::<Complex64>::zeros(cfg.m);
        let mut b_mat = DMatrix::<Complex64>::zeros(cfg.m, cfg.m);
        for &j in wt.branches {
            let g = state.gamma_p[k][j];
            let amp = amp_primary(&wt, state.eta_p[k][j]);
            let h_branch = &channels.h_d[k] + &ls.b[k] * Complex64::new(C_BRANCH[j], 0.0);
            a_vec += &h_branch * (g.conj() * Complex64::new(amp * root_p, 0.0));
            b_mat += (&h_branch * h_branch.adjoint()) * Complex64::new(g.norm_sqr() * ls.p[k], 0.0)
                + &delta * Complex64::new(g.norm_sqr(), 0.0);
        }
        if wt.secondary {
            let g = state.gamma_s[k];
            let amp = amp_secondary(&wt, state.eta_s[k], cfg.q);
            a_vec += &ls.b[k] * (g.conj() * Complex64::new(amp * root_p, 0.0));
            b_mat += (&ls.b[k] * ls.b[k].adjoint())
                * Complex64::new(cfg.q * g.norm_sqr() * ls.p[k], 0.0)
                + &delta * Complex64::new(g.norm_sqr(), 0.0);
        }
        state.w[k] = solve_beamformer(&b_mat, &a_vec, &state.w[k]);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Phase block
// ---------------------------------------------------------------------------

/// Per-user quadratic model of the phase subproblem:
/// `f3_k(phi) = -phi^H U phi + 2 Re(z^H phi)`.
#[derive(Debug, Clone)]
pub struct PhaseQuadratic {
    pub u: DMatrix<Complex64>,
    pub z: DVector<Complex64>,
}

impl PhaseQuadratic {
    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn value(&self, phi: &DVector<Complex64>) -> f64 {
        let quad = phi.dotc(&(&self.u * phi)).re;
        let lin = self.z.dotc(phi).re;
        -quad + 2.0 * lin
    }
}

/// Row vector of the scalarized reflected link: entry `i` of
/// `sqrt(p_src) w_dec^H G_src^H diag(h_r,src)`.
fn ris_row(
    w_dec: &DVector<Complex64>,
    g_src: &DMatrix<Complex64>,
    h_r_src: &DVector<Complex64>,
    p_src: f64,
) -> DVector<Complex64> {
    let gw = g_src * w_dec; // conj(G w) is the row w^H G^H
    let root_p = p_src.sqrt();
    DVector::from_fn(g_src.nrows(), |i, _| gw[i].conj() * h_r_src[i] * root_p)
}

/// Builds the phase-block quadratic for user `k` from the stored `xi`, `eta`.
pub fn phase_quadratic(
    k: usize,
    state: &OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<PhaseQuadratic> {
    let ls = LinkState::compute(state, channels, cfg, RateModel::Symbiotic)?;
    Ok(phase_quadratic_with(k, state, &ls, channels, cfg, RateModel::Symbiotic))
}

pub(crate) fn phase_quadratic_with(
    k: usize,
    state: &OptState,
    ls: &LinkState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
    model: RateModel,
) -> PhaseQuadratic {
    let wt = fp_weights(cfg, model);
    let n = cfg.n;
    let m_own = ris_row(&state.w[k], &channels.g[k], &channels.h_r[k], ls.p[k]);
    let m_conj = m_own.map(|c| c.conj());
    let d_own = state.w[k].dotc(&channels.h_d[k]) * Complex64::new(ls.p[k].sqrt(), 0.0);

    let mut own_coef = 0.0;
    let mut z = DVector::<Complex64>::zeros(n);
    for &j in wt.branches {
        let xi = state.xi_p[k][j];
        let amp = amp_primary(&wt, state.eta_p[k][j]);
        own_coef += xi.norm_sqr();
        let lin = (xi * Complex64::new(amp, 0.0) - d_own * Complex64::new(xi.norm_sqr(), 0.0))
            * Complex64::new(C_BRANCH[j], 0.0);
        z += &m_conj * lin;
    }
    if wt.secondary {
        let xi = state.xi_s[k];
        let amp = amp_secondary(&wt, state.eta_s[k], cfg.q);
        own_coef += cfg.q * xi.norm_sqr();
        z += &m_conj * (xi * Complex64::new(amp, 0.0));
    }
    let mut u = (&m_conj * m_own.transpose()) * Complex64::new(own_coef, 0.0);

    // Interference created at higher-priority decoders i < k via this RIS.
    for i in 0..k {
        let coef = match model {
            RateModel::Symbiotic => {
                state.xi_s[i].norm_sqr()
                    + wt.branches.iter().map(|&j| state.xi_p[i][j].norm_sqr()).sum::<f64>()
            }
            RateModel::CompositeNoSr => state.xi_p[i][1].norm_sqr(),
        };
        if coef == 0.0 {
            continue;
        }
        let m_cross = ris_row(&state.w[i], &channels.g[k], &channels.h_r[k], ls.p[k]);
        let m_cross_conj = m_cross.map(|c| c.conj());
        u += (&m_cross_conj * m_cross.transpose()) * Complex64::new(coef, 0.0);
        if model == RateModel::CompositeNoSr {
            // Composite interference carries a direct-path cross term.
            let d_cross =
                state.w[i].dotc(&channels.h_d[k]) * Complex64::new(ls.p[k].sqrt(), 0.0);
            z -= &m_cross_conj * (d_cross * Complex64::new(coef, 0.0));
        }
    }
    PhaseQuadratic { u, z }
}

/// Coordinate-ascent sweeps over the elements of one RIS, maximizing the
/// quadratic model exactly per element (continuous angle or grid enumeration).
pub fn element_sweep(quad: &PhaseQuadratic, phases: &mut [f64], mode: PhaseMode, sweeps: usize) {
    let n = quad.dim();
    debug_assert_eq!(phases.len(), n);
    let mut phi = DVector::from_iterator(n, phases.iter().map(|&t| Complex64::from_polar(1.0, t)));
    let mut row_sum = &quad.u * &phi;
    for _ in 0..sweeps {
        for idx in 0..n {
            let a1 = quad.z[idx] - (row_sum[idx] - quad.u[(idx, idx)] * phi[idx]);
            let new_theta = match mode.levels() {
                None => {
                    if a1.norm() == 0.0 {
                        phases[idx]
                    } else {
                        a1.arg().rem_euclid(std::f64::consts::TAU)
                    }
                }
                Some(levels) => {
                    // Exhaustive per-element maximization of Re(phi* A1).
                    let step = std::f64::consts::TAU / levels as f64;
                    let mut best =
                        (phases[idx], (Complex64::from_polar(1.0, phases[idx]).conj() * a1).re);
                    for g in 0..levels {
                        let theta = g as f64 * step;
                        let val = (Complex64::from_polar(1.0, theta).conj() * a1).re;
                        if val > best.1 {
                            best = (theta, val);
                        }
                    }
                    best.0
                }
            };
            let new_phi = Complex64::from_polar(1.0, new_theta);
            let delta = new_phi - phi[idx];
            if delta.norm_sqr() > 0.0 {
                for r in 0..n {
                    row_sum[r] += quad.u[(r, idx)] * delta;
                }
                phi[idx] = new_phi;
            }
            phases[idx] = new_theta;
        }
    }
}

/// RIS phase update: one (or more) exact coordinate sweeps per RIS.
pub fn update_phases(state: &mut OptState, channels: &ChannelSet, cfg: &SystemConfig) -> Result<()> {
    update_phases_model(
        state,
        channels,
        cfg,
        RateModel::Symbiotic,
        &PhaseSolver::Element,
        1,
        &mut seed::rng(0),
    )
}

pub(crate) fn update_phases_model(
    state: &mut OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
    model: RateModel,
    solver: &PhaseSolver,
    sweeps: usize,
    rng: &mut ChaCha12Rng,
) -> Result<()> {
    let ls = LinkState::compute(state, channels, cfg, model)?;
    for k in 0..cfg.k {
        let quad = phase_quadratic_with(k, state, &ls, channels, cfg, model);
        match solver {
            PhaseSolver::Element => {
                let mut phases = state.phases[k].clone();
                element_sweep(&quad, &mut phases, cfg.phase_mode, sweeps);
                state.phases[k] = phases;
            }
            PhaseSolver::Sdr(settings) => {
                let phases =
                    sdr::optimize_phases_sdr(&quad, &state.phases[k], cfg.phase_mode, settings, rng);
                state.phases[k] = phases;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Energy-partition block
// ---------------------------------------------------------------------------

/// Coefficients of the scalar partition subproblem
/// `g(beta) = -(a1 + a2) p(beta) + (b1 + b2) sqrt(p(beta)) + local(beta)`.
#[derive(Debug, Clone, Copy)]
pub struct BetaCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Assembles the partition coefficients for user `k` from the stored
/// `lambda`, `eta`. Interference received at a higher-priority decoder i < k
/// is weighted by decoder i's own auxiliaries; that weighting is what makes
/// the partition surrogate an exact minorant of `f1`.
pub fn beta_coefficients(
    k: usize,
    state: &OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<BetaCoefficients> {
    let ls = LinkState::compute(state, channels, cfg, RateModel::Symbiotic)?;
    Ok(beta_coefficients_with(k, state, &ls, channels, cfg, RateModel::Symbiotic))
}

pub(crate) fn beta_coefficients_with(
    k: usize,
    state: &OptState,
    ls: &LinkState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
    model: RateModel,
) -> BetaCoefficients {
    let wt = fp_weights(cfg, model);
    let wb = state.w[k].dotc(&ls.b[k]);
    let wh = state.w[k].dotc(&channels.h_d[k]);
    let mut c = BetaCoefficients { a1: 0.0, a2: 0.0, b1: 0.0, b2: 0.0 };
    if wt.secondary {
        let l = state.lambda_s[k];
        let amp = amp_secondary(&wt, state.eta_s[k], cfg.q);
        c.a1 = l.norm_sqr() * cfg.q * wb.norm_sqr();
        c.b1 = 2.0 * (l.conj() * wb).re * amp;
    }
    for &j in wt.branches {
        let l = state.lambda_p[k][j];
        let amp = amp_primary(&wt, state.eta_p[k][j]);
        let h_branch = wh + wb * Complex64::new(C_BRANCH[j], 0.0);
        c.a2 += l.norm_sqr() * h_branch.norm_sqr();
        c.b2 += 2.0 * (l.conj() * h_branch).re * amp;
    }
    for i in 0..k {
        let gain = interference_gain(&state.w[i], channels, &ls.b, k, model);
        if wt.secondary {
            c.a1 += state.lambda_s[i].norm_sqr() * gain;
        }
        c.a2 += wt.branches.iter().map(|&j| state.lambda_p[i][j].norm_sqr()).sum::<f64>() * gain;
    }
    c
}

/// The scalar partition objective of user `k` at partition `beta`.
pub fn partition_objective(
    coeffs: &BetaCoefficients,
    beta: f64,
    e_off_k: f64,
    cfg: &SystemConfig,
) -> f64 {
    let window = cfg.alpha * cfg.t;
    let p = beta * e_off_k / window;
    let local =
        window / cfg.cycles_per_bit * ((1.0 - beta) * e_off_k / (window * cfg.kappa_l)).cbrt();
    -(coeffs.a1 + coeffs.a2) * p + (coeffs.b1 + coeffs.b2) * p.sqrt() + local
}

/// Argument tolerance of the golden-section partition search.
pub const BETA_SEARCH_TOL: f64 = 1e-7;

/// Maximizes the partition objective over `[0, 1]`; concave by the positivity
/// of the assembled coefficients.
pub fn maximize_partition(coeffs: &BetaCoefficients, e_off_k: f64, cfg: &SystemConfig) -> f64 {
    numerics::maximize_concave_1d(
        |beta| partition_objective(coeffs, beta, e_off_k, cfg),
        0.0,
        1.0,
        BETA_SEARCH_TOL,
    )
}

/// Energy-partition update.
pub fn update_beta(state: &mut OptState, channels: &ChannelSet, cfg: &SystemConfig) -> Result<()> {
    update_beta_model(state, channels, cfg, RateModel::Symbiotic)
}

pub(crate) fn update_beta_model(
    state: &mut OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
    model: RateModel,
) -> Result<()> {
    let ls = LinkState::compute(state, channels, cfg, model)?;
    for k in 0..cfg.k {
        let coeffs = beta_coefficients_with(k, state, &ls, channels, cfg, model);
        state.beta[k] = maximize_partition(&coeffs, ls.e_off[k], cfg);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

/// Feasible starting point: uniform random phases (snapped to the grid in
/// discrete mode), half-and-half energy split, matched-filter beamformers.
pub fn init_state(
    cfg: &SystemConfig,
    channels: &ChannelSet,
    rng: &mut ChaCha12Rng,
) -> Result<OptState> {
    cfg.validate()?;
    channels.validate(cfg)?;
    let mut state = OptState::zeros(cfg);
    for k in 0..cfg.k {
        for nn in 0..cfg.n {
            state.phases[k][nn] = cfg.phase_mode.snap(rng.gen_range(0.0..std::f64::consts::TAU));
        }
        state.beta[k] = 0.5;
    }
    for k in 0..cfg.k {
        let b = backscatter_channel(&channels.g[k], &state.phases[k], &channels.h_r[k]);
        let mf = &channels.h_d[k] + &b;
        let norm = mf.norm();
        state.w[k] = if norm > 0.0 {
            mf / Complex64::new(norm, 0.0)
        } else {
            let mut e1 = DVector::zeros(cfg.m);
            e1[0] = Complex64::new(1.0, 0.0);
            e1
        };
    }
    Ok(state)
}

pub(crate) struct EngineToggles {
    pub model: RateModel,
    pub opt_w: bool,
    pub opt_phases: bool,
    pub opt_beta: bool,
}

impl EngineToggles {
    pub(crate) fn full() -> Self {
        EngineToggles {
            model: RateModel::Symbiotic,
            opt_w: true,
            opt_phases: true,
            opt_beta: true,
        }
    }
}

/// Runs the full alternating optimization from `init` until the monitored
/// objective stalls or `max_iters` is reached.
pub fn run_ao(
    cfg: &SystemConfig,
    channels: &ChannelSet,
    init: OptState,
    settings: &AoSettings,
) -> Result<AoOutcome> {
    run_engine(cfg, channels, init, settings, EngineToggles::full())
}

pub(crate) fn run_engine(
    cfg: &SystemConfig,
    channels: &ChannelSet,
    init: OptState,
    settings: &AoSettings,
    toggles: EngineToggles,
) -> Result<AoOutcome> {
    cfg.validate()?;
    channels.validate(cfg)?;
    settings.validate()?;
    init.check_constraints(cfg)?;
    let model = toggles.model;

    // The decode order is fixed from the initial powers and never re-sorted;
    // re-sorting mid-run would break the monotone ascent.
    let ls0 = LinkState::compute(&init, channels, cfg, model)?;
    let order = DecodeOrder::compute(channels, &init.phases, &ls0.p);
    let cfg_p = cfg.permuted(order.order());
    let ch_p = channels.permuted(order.order());
    let mut state = init.permuted(order.order());

    let mut rng = seed::rng(settings.seed);
    let start = Instant::now();
    let mut trace = Trace::default();

    update_eta_model(&mut state, &ch_p, &cfg_p, model)?;
    let mut metrics = completed_bits_model(&state, &ch_p, &cfg_p, model)?;
    let mut f1 = surrogate_f1_model(&state, &ch_p, &cfg_p, model)?;
    push_row(&mut trace, 0, f1, &metrics, &order, &cfg_p, start);
    let mut prev = match settings.monitor {
        ObjectiveKind::Surrogate => f1,
        ObjectiveKind::TrueObjective => metrics.objective,
    };

    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=settings.max_iters {
        update_eta_model(&mut state, &ch_p, &cfg_p, model)?;
        if toggles.opt_w {
            update_gamma_model(&mut state, &ch_p, &cfg_p, model)?;
            update_w_model(&mut state, &ch_p, &cfg_p, model)?;
        }
        if toggles.opt_phases {
            update_xi_model(&mut state, &ch_p, &cfg_p, model)?;
            update_phases_model(
                &mut state,
                &ch_p,
                &cfg_p,
                model,
                &settings.phase_solver,
                settings.phase_sweeps,
                &mut rng,
            )?;
        }
        if toggles.opt_beta {
            update_lambda_model(&mut state, &ch_p, &cfg_p, model)?;
            update_beta_model(&mut state, &ch_p, &cfg_p, model)?;
        }
        f1 = surrogate_f1_model(&state, &ch_p, &cfg_p, model)?;
        metrics = completed_bits_model(&state, &ch_p, &cfg_p, model)?;
        push_row(&mut trace, iter, f1, &metrics, &order, &cfg_p, start);
        iterations = iter;
        let current = match settings.monitor {
            ObjectiveKind::Surrogate => f1,
            ObjectiveKind::TrueObjective => metrics.objective,
        };
        if (current - prev).abs() <= settings.rel_tol * prev.abs().max(1e-12) {
            converged = true;
            break;
        }
        prev = current;
    }

    state.check_constraints(&cfg_p)?;
    let inverse = inverse_order(&order);
    Ok(AoOutcome {
        state: state.permuted(&inverse),
        trace,
        metrics: metrics.unpermute(&order),
        order,
        iterations,
        converged,
    })
}

fn inverse_order(order: &DecodeOrder) -> Vec<usize> {
    let mut inv = vec![0usize; order.len()];
    for (pos, &orig) in order.order().iter().enumerate() {
        inv[orig] = pos;
    }
    inv
}

fn push_row(
    trace: &mut Trace,
    iter: usize,
    f1: f64,
    metrics: &Metrics,
    order: &DecodeOrder,
    cfg: &SystemConfig,
    start: Instant,
) {
    let local = metrics.local_bits(cfg);
    trace.rows.push(TraceRow {
        iter,
        f1,
        objective: metrics.objective,
        done_p: order.unpermute(&metrics.done_p),
        done_s: order.unpermute(&metrics.done_s),
        local: order.unpermute(&local),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    });
}

// ---------------------------------------------------------------------------
// Time-allocation sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub sensed_p: f64,
    pub sensed_s: f64,
    pub done_p: f64,
    pub done_s: f64,
    pub mean_beta: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct AlphaSweep {
    pub points: Vec<AlphaPoint>,
    /// Largest grid alpha whose completed user bits stay within the sensed
    /// amount, and likewise for RISs and the total.
    pub frontier_user: Option<f64>,
    pub frontier_ris: Option<f64>,
    pub frontier_total: Option<f64>,
}

/// Runs the optimizer at each time split and locates the sensing-cap
/// feasibility frontier on the grid.
pub fn evaluate_alpha_sweep(
    cfg: &SystemConfig,
    channels: &ChannelSet,
    alphas: &[f64],
    settings: &AoSettings,
) -> Result<AlphaSweep> {
    let mut points = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Validation(format!(
                "alpha sweep values must lie in (0, 1), got {alpha}"
            )));
        }
        let mut cfg_a = cfg.clone();
        cfg_a.alpha = alpha;
        let mut rng = seed::rng(settings.seed);
        let init = init_state(&cfg_a, channels, &mut rng)?;
        let out = run_ao(&cfg_a, channels, init, settings)?;
        points.push(AlphaPoint {
            alpha,
            sensed_p: out.metrics.sensed_p.iter().sum(),
            sensed_s: out.metrics.sensed_s.iter().sum(),
            done_p: out.metrics.done_p.iter().sum(),
            done_s: out.metrics.done_s.iter().sum(),
            mean_beta: out.state.beta.iter().sum::<f64>() / cfg_a.k as f64,
            iterations: out.iterations,
            converged: out.converged,
        });
    }
    let largest = |ok: &dyn Fn(&AlphaPoint) -> bool| {
        points
            .iter()
            .filter(|pt| ok(pt))
            .map(|pt| pt.alpha)
            .fold(None, |acc: Option<f64>, a| Some(acc.map_or(a, |b: f64| b.max(a))))
    };
    Ok(AlphaSweep {
        frontier_user: largest(&|pt| pt.done_p <= pt.sensed_p),
        frontier_ris: largest(&|pt| pt.done_s <= pt.sensed_s),
        frontier_total: largest(&|pt| pt.done_p + pt.done_s <= pt.sensed_p + pt.sensed_s),
        points,
    })
}
