//! System model: scenario configuration, channels, decision variables and the
//! sensing / communication / computation expressions that define the objective.
//!
//! All quantities are SI (W, Hz, s, J, bits). Conversions from dB or dBm happen
//! in configuration loading, never here. Every function in this module is pure.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// RIS phase-shift resolution: continuous in `[0, 2pi)` or a `2^bits` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    Continuous,
    Discrete { bits: u32 },
}

impl PhaseMode {
    /// Number of grid points for discrete mode, `None` when continuous.
    pub fn levels(&self) -> Option<u32> {
        match self {
            PhaseMode::Continuous => None,
            PhaseMode::Discrete { bits } => Some(1u32 << bits),
        }
    }

    /// Nearest representable phase for this mode, in `[0, 2pi)`.
    pub fn snap(&self, theta: f64) -> f64 {
        let two_pi = std::f64::consts::TAU;
        let wrapped = theta.rem_euclid(two_pi);
        match self.levels() {
            None => wrapped,
            Some(levels) => {
                let step = two_pi / levels as f64;
                let idx = (wrapped / step).round() as i64 % levels as i64;
                idx as f64 * step
            }
        }
    }
}

/// All scalar parameters of one scenario.
///
/// `v_p`, `v_s`, `p_sense` and `e_max` are per-user (user k is paired with
/// RIS k throughout).
#[derive(Debug, Clone)]
pub struct SystemConfig {
    /// Number of user/RIS pairs.
    pub k: usize,
    /// Base-station antennas.
    pub m: usize,
    /// Reflecting elements per RIS.
    pub n: usize,
    /// Primary symbols per secondary symbol.
    pub q: f64,
    /// Bandwidth in Hz.
    pub bandwidth: f64,
    /// Noise power sigma^2 in W.
    pub noise_power: f64,
    /// Cycle duration in s.
    pub t: f64,
    /// Fraction of the cycle used for processing; `1 - alpha` is sensing time.
    pub alpha: f64,
    /// User sensing rates in bit/s.
    pub v_p: Vec<f64>,
    /// RIS sensing rates in bit/s.
    pub v_s: Vec<f64>,
    /// Sensing energy cost in J/bit.
    pub p_sense: Vec<f64>,
    /// Per-user energy budget in J.
    pub e_max: Vec<f64>,
    /// Effective capacitance coefficient in J s^2 / cycle^3.
    pub kappa_l: f64,
    /// CPU cycles per bit.
    pub cycles_per_bit: f64,
    pub phase_mode: PhaseMode,
}

impl SystemConfig {
    /// Baseline scenario: K = 4 users around a 4-antenna BS, 100 kHz
    /// bandwidth, -100 dBm noise, 5 s cycles.
    pub fn baseline() -> Self {
        let k = 4;
        SystemConfig {
            k,
            m: 4,
            n: 100,
            q: 128.0,
            bandwidth: 1e5,
            noise_power: 1e-13,
            t: 5.0,
            alpha: 0.4,
            v_p: vec![2.5e6; k],
            v_s: vec![5e4; k],
            p_sense: vec![0.5e-6; k],
            e_max: vec![10.0; k],
            kappa_l: 1e-25,
            cycles_per_bit: 600.0,
            phase_mode: PhaseMode::Continuous,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::Validation(msg));
        if self.k < 1 {
            return err("k must be >= 1".into());
        }
        if self.m < 1 {
            return err("m must be >= 1".into());
        }
        if self.n < 1 {
            return err("n must be >= 1".into());
        }
        if !(self.q >= 2.0) {
            return err(format!("q must be >= 2, got {}", self.q));
        }
        if !(self.bandwidth > 0.0) {
            return err("bandwidth must be > 0".into());
        }
        if !(self.noise_power > 0.0) {
            return err("noise_power must be > 0".into());
        }
        if !(self.t > 0.0) {
            return err("t must be > 0".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return err(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        for (name, v) in [
            ("v_p", &self.v_p),
            ("v_s", &self.v_s),
            ("p_sense", &self.p_sense),
            ("e_max", &self.e_max),
        ] {
            if v.len() != self.k {
                return err(format!("{name} must have k = {} entries, got {}", self.k, v.len()));
            }
            if v.iter().any(|x| !(*x >= 0.0)) {
                return err(format!("{name} entries must be >= 0"));
            }
        }
        if !(self.kappa_l > 0.0) {
            return err("kappa_l must be > 0".into());
        }
        if !(self.cycles_per_bit >= 1.0) {
            return err("cycles_per_bit must be >= 1".into());
        }
        if let PhaseMode::Discrete { bits } = self.phase_mode {
            if bits < 1 {
                return err("discrete phase mode needs bits >= 1".into());
            }
        }
        Ok(())
    }

    /// Reorders all per-user fields.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let pick = |v: &Vec<f64>| order.iter().map(|&i| v[i]).collect();
        SystemConfig {
            v_p: pick(&self.v_p),
            v_s: pick(&self.v_s),
            p_sense: pick(&self.p_sense),
            e_max: pick(&self.e_max),
            ..self.clone()
        }
    }
}

/// Channel realization for every user/RIS pair.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    /// Direct user-to-BS channels, each of length M.
    pub h_d: Vec<DVector<Complex64>>,
    /// User-to-RIS channels, each of length N.
    pub h_r: Vec<DVector<Complex64>>,
    /// RIS-to-BS channels, each N x M.
    pub g: Vec<DMatrix<Complex64>>,
}

impl ChannelSet {
    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        let ok = self.h_d.len() == cfg.k
            && self.h_r.len() == cfg.k
            && self.g.len() == cfg.k
            && self.h_d.iter().all(|v| v.len() == cfg.m)
            && self.h_r.iter().all(|v| v.len() == cfg.n)
            && self.g.iter().all(|m| m.nrows() == cfg.n && m.ncols() == cfg.m);
        if !ok {
            return Err(Error::Validation("channel dimensions do not match config".into()));
        }
        let finite = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
        if !self.h_d.iter().chain(self.h_r.iter()).all(|v| v.iter().all(finite))
            || !self.g.iter().all(|m| m.iter().all(finite))
        {
            return Err(Error::Validation("channel entries must be finite".into()));
        }
        Ok(())
    }

    /// Copy with all RIS-side links removed (h_r and G zeroed).
    pub fn without_ris(&self) -> Self {
        ChannelSet {
            h_d: self.h_d.clone(),
            h_r: self.h_r.iter().map(|v| DVector::zeros(v.len())).collect(),
            g: self.g.iter().map(|m| DMatrix::zeros(m.nrows(), m.ncols())).collect(),
        }
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        ChannelSet {
            h_d: order.iter().map(|&i| self.h_d[i].clone()).collect(),
            h_r: order.iter().map(|&i| self.h_r[i].clone()).collect(),
            g: order.iter().map(|&i| self.g[i].clone()).collect(),
        }
    }
}

/// Decision variables plus the fractional-programming auxiliaries.
///
/// The two primary-branch slots index the RIS symbol realizations
/// `c = -1` (slot 0) and `c = +1` (slot 1).
#[derive(Debug, Clone)]
pub struct OptState {
    /// Receive beamformers, one length-M column per user, norm at most 1.
    pub w: Vec<DVector<Complex64>>,
    /// RIS phase shifts in `[0, 2pi)`, `phases[k][n]`.
    pub phases: Vec<Vec<f64>>,
    /// Energy partition per user in `[0, 1]` (fraction spent on offloading).
    pub beta: Vec<f64>,
    pub eta_p: Vec<[f64; 2]>,
    pub eta_s: Vec<f64>,
    pub gamma_p: Vec<[Complex64; 2]>,
    pub gamma_s: Vec<Complex64>,
    pub xi_p: Vec<[Complex64; 2]>,
    pub xi_s: Vec<Complex64>,
    pub lambda_p: Vec<[Complex64; 2]>,
    pub lambda_s: Vec<Complex64>,
}

/// Slack allowed on the beamformer norm constraint.
pub const W_NORM_SLACK: f64 = 1e-12;

impl OptState {
    /// Zero-initialized state with the right dimensions.
    pub fn zeros(cfg: &SystemConfig) -> Self {
        let zc = Complex64::new(0.0, 0.0);
        OptState {
            w: vec![DVector::zeros(cfg.m); cfg.k],
            phases: vec![vec![0.0; cfg.n]; cfg.k],
            beta: vec![0.0; cfg.k],
            eta_p: vec![[0.0; 2]; cfg.k],
            eta_s: vec![0.0; cfg.k],
            gamma_p: vec![[zc; 2]; cfg.k],
            gamma_s: vec![zc; cfg.k],
            xi_p: vec![[zc; 2]; cfg.k],
            xi_s: vec![zc; cfg.k],
            lambda_p: vec![[zc; 2]; cfg.k],
            lambda_s: vec![zc; cfg.k],
        }
    }

    /// Phase coefficient vector `[e^{j theta_1}, ..., e^{j theta_N}]` of RIS k.
    pub fn phi(&self, k: usize) -> DVector<Complex64> {
        DVector::from_iterator(
            self.phases[k].len(),
            self.phases[k].iter().map(|&t| Complex64::from_polar(1.0, t)),
        )
    }

    /// Checks C1 (beta range), C2 (phase range / grid) and C3 (beam norms).
    pub fn check_constraints(&self, cfg: &SystemConfig) -> Result<()> {
        for (k, w) in self.w.iter().enumerate() {
            if w.norm_squared() > 1.0 + W_NORM_SLACK {
                return Err(Error::Validation(format!(
                    "||w_{k}||^2 = {} violates C3",
                    w.norm_squared()
                )));
            }
        }
        for (k, &b) in self.beta.iter().enumerate() {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::Validation(format!("beta_{k} = {b} violates C1")));
            }
        }
        let two_pi = std::f64::consts::TAU;
        for (k, ph) in self.phases.iter().enumerate() {
            for (n, &t) in ph.iter().enumerate() {
                if !(0.0..two_pi).contains(&t) {
                    return Err(Error::Validation(format!(
                        "phase ({k}, {n}) = {t} outside [0, 2pi)"
                    )));
                }
                if let Some(levels) = cfg.phase_mode.levels() {
                    let step = two_pi / levels as f64;
                    let frac = t / step;
                    if (frac - frac.round()).abs() > 1e-9 {
                        return Err(Error::Validation(format!(
                            "phase ({k}, {n}) = {t} is off the {levels}-point grid"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        OptState {
            w: order.iter().map(|&i| self.w[i].clone()).collect(),
            phases: order.iter().map(|&i| self.phases[i].clone()).collect(),
            beta: order.iter().map(|&i| self.beta[i]).collect(),
            eta_p: order.iter().map(|&i| self.eta_p[i]).collect(),
            eta_s: order.iter().map(|&i| self.eta_s[i]).collect(),
            gamma_p: order.iter().map(|&i| self.gamma_p[i]).collect(),
            gamma_s: order.iter().map(|&i| self.gamma_s[i]).collect(),
            xi_p: order.iter().map(|&i| self.xi_p[i]).collect(),
            xi_s: order.iter().map(|&i| self.xi_s[i]).collect(),
            lambda_p: order.iter().map(|&i| self.lambda_p[i]).collect(),
            lambda_s: order.iter().map(|&i| self.lambda_s[i]).collect(),
        }
    }
}

/// SIC decoding order: `order()[position] = original user index`, position 0
/// decoded first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOrder {
    order: Vec<usize>,
}

impl DecodeOrder {
    pub fn identity(k: usize) -> Self {
        DecodeOrder { order: (0..k).collect() }
    }

    /// Sorts users by channel condition `p_k (||h_d,k||^2 + ||b_k||^2)`,
    /// nonincreasing, ties broken by original index.
    pub fn compute(channels: &ChannelSet, phases: &[Vec<f64>], p_tx: &[f64]) -> Self {
        let k = channels.h_d.len();
        let mut metric = Vec::with_capacity(k);
        for i in 0..k {
            let b = backscatter_channel(&channels.g[i], &phases[i], &channels.h_r[i]);
            metric.push(p_tx[i] * (channels.h_d[i].norm_squared() + b.norm_squared()));
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            metric[b]
                .partial_cmp(&metric[a])
                .expect("channel condition metric must be finite")
                .then(a.cmp(&b))
        });
        DecodeOrder { order }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Maps a vector from decode-order indexing back to original indexing.
    pub fn unpermute<T: Clone>(&self, v: &[T]) -> Vec<T> {
        let mut out = v.to_vec();
        for (pos, &orig) in self.order.iter().enumerate() {
            out[orig] = v[pos].clone();
        }
        out
    }
}

/// Per-user evaluation results for one state.
#[derive(Debug, Clone)]
pub struct Metrics {
    /// Primary (user) rate in bit/s.
    pub rate_p: Vec<f64>,
    /// Secondary (RIS) rate in bit/s.
    pub rate_s: Vec<f64>,
    /// Offloading transmit power in W.
    pub p_tx: Vec<f64>,
    /// Local CPU frequency in cycle/s.
    pub f_loc: Vec<f64>,
    /// Completed user bits (offloaded plus local).
    pub done_p: Vec<f64>,
    /// Completed RIS bits.
    pub done_s: Vec<f64>,
    /// Bits sensed by users.
    pub sensed_p: Vec<f64>,
    /// Bits sensed by RISs.
    pub sensed_s: Vec<f64>,
    pub e_sense: Vec<f64>,
    pub e_off: Vec<f64>,
    /// Total completed bits over all users and RISs.
    pub objective: f64,
    pub c4_user_ok: Vec<bool>,
    pub c4_ris_ok: Vec<bool>,
}

impl Metrics {
    /// Completed bits from local computation only, per user.
    pub fn local_bits(&self, cfg: &SystemConfig) -> Vec<f64> {
        self.f_loc
            .iter()
            .map(|f| f * cfg.alpha * cfg.t / cfg.cycles_per_bit)
            .collect()
    }

    pub fn unpermute(&self, order: &DecodeOrder) -> Metrics {
        Metrics {
            rate_p: order.unpermute(&self.rate_p),
            rate_s: order.unpermute(&self.rate_s),
            p_tx: order.unpermute(&self.p_tx),
            f_loc: order.unpermute(&self.f_loc),
            done_p: order.unpermute(&self.done_p),
            done_s: order.unpermute(&self.done_s),
            sensed_p: order.unpermute(&self.sensed_p),
            sensed_s: order.unpermute(&self.sensed_s),
            e_sense: order.unpermute(&self.e_sense),
            e_off: order.unpermute(&self.e_off),
            objective: self.objective,
            c4_user_ok: order.unpermute(&self.c4_user_ok),
            c4_ris_ok: order.unpermute(&self.c4_ris_ok),
        }
    }
}

/// Which communication model the evaluation uses. The symbiotic model carries
/// the two-valued RIS symbol and a secondary rate; the composite model treats
/// the reflected path as a fixed extra channel (the "without SR" baseline).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    Symbiotic,
    CompositeNoSr,
}

// ---------------------------------------------------------------------------
// Sensing and energy
// ---------------------------------------------------------------------------

/// Bits sensed during `(1 - alpha) T`: returns `(user bits, RIS bits)`.
pub fn sensed_data(cfg: &SystemConfig) -> (Vec<f64>, Vec<f64>) {
    let window = (1.0 - cfg.alpha) * cfg.t;
    let m_p = cfg.v_p.iter().map(|v| window * v).collect();
    let m_s = cfg.v_s.iter().map(|v| window * v).collect();
    (m_p, m_s)
}

/// Sensing energy and the remaining offload/compute budget per user.
pub fn energy_budget(cfg: &SystemConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let (m_p, _) = sensed_data(cfg);
    let mut e_sense = Vec::with_capacity(cfg.k);
    let mut e_off = Vec::with_capacity(cfg.k);
    for k in 0..cfg.k {
        let es = cfg.p_sense[k] * m_p[k];
        let eo = cfg.e_max[k] - es;
        if eo < 0.0 {
            return Err(Error::NegativeBudget { user: k, e_sense: es, e_max: cfg.e_max[k] });
        }
        e_sense.push(es);
        e_off.push(eo);
    }
    Ok((e_sense, e_off))
}

/// Offloading transmit power `beta_k E_off_k / (alpha T)`.
pub fn transmit_power(beta_k: f64, e_off_k: f64, cfg: &SystemConfig) -> Result<f64> {
    let denom = cfg.alpha * cfg.t;
    if denom == 0.0 {
        return Err(Error::DivisionByZero("transmit_power: alpha * T = 0"));
    }
    Ok(beta_k * e_off_k / denom)
}

/// Local CPU frequency `cbrt((1 - beta_k) E_off_k / (alpha T kappa_l))`.
pub fn local_frequency(beta_k: f64, e_off_k: f64, cfg: &SystemConfig) -> f64 {
    ((1.0 - beta_k) * e_off_k / (cfg.alpha * cfg.t * cfg.kappa_l)).cbrt()
}

// ---------------------------------------------------------------------------
// Links
// ---------------------------------------------------------------------------

/// Backscatter channel `b_k = G_k^H Theta_k h_r,k` (unit reflection amplitude).
pub fn backscatter_channel(
    g_k: &DMatrix<Complex64>,
    phases_k: &[f64],
    h_r_k: &DVector<Complex64>,
) -> DVector<Complex64> {
    let (n, m) = (g_k.nrows(), g_k.ncols());
    debug_assert_eq!(phases_k.len(), n);
    debug_assert_eq!(h_r_k.len(), n);
    let mut b = DVector::zeros(m);
    for nn in 0..n {
        let refl = Complex64::from_polar(1.0, phases_k[nn]) * h_r_k[nn];
        for mm in 0..m {
            b[mm] += g_k[(nn, mm)].conj() * refl;
        }
    }
    b
}

/// Derived per-user link quantities shared by the evaluation functions.
///
/// Assumes decode order already applied (priority = index).
#[derive(Debug, Clone)]
pub struct LinkState {
    /// Transmit powers.
    pub p: Vec<f64>,
    /// Backscatter channels.
    pub b: Vec<DVector<Complex64>>,
    /// `s[k][j] = sqrt(p_k) w_k^H (h_d,k + c_j b_k)` for `c = -1, +1`.
    pub s: Vec<[Complex64; 2]>,
    /// `t[k] = sqrt(p_k) w_k^H b_k`.
    pub t: Vec<Complex64>,
    /// Interference-plus-noise `n_k` at each decoder.
    pub n: Vec<f64>,
    pub e_sense: Vec<f64>,
    pub e_off: Vec<f64>,
}

/// The two RIS symbol values in branch order.
pub const C_BRANCH: [f64; 2] = [-1.0, 1.0];

impl LinkState {
    pub fn compute(
        state: &OptState,
        channels: &ChannelSet,
        cfg: &SystemConfig,
        model: RateModel,
    ) -> Result<Self> {
        let (e_sense, e_off) = energy_budget(cfg)?;
        // A zero processing window means nothing is transmitted at all; the
        // standalone transmit_power op still rejects alpha * T = 0.
        let window = cfg.alpha * cfg.t;
        let mut p = Vec::with_capacity(cfg.k);
        for k in 0..cfg.k {
            if window == 0.0 {
                p.push(0.0);
            } else {
                p.push(transmit_power(state.beta[k], e_off[k], cfg)?);
            }
        }
        let b: Vec<_> = (0..cfg.k)
            .map(|k| backscatter_channel(&channels.g[k], &state.phases[k], &channels.h_r[k]))
            .collect();
        let mut s = vec![[Complex64::default(); 2]; cfg.k];
        let mut t = vec![Complex64::default(); cfg.k];
        let mut n = vec![0.0; cfg.k];
        for k in 0..cfg.k {
            let w = &state.w[k];
            let wh = w.dotc(&channels.h_d[k]);
            let wb = w.dotc(&b[k]);
            let root_p = p[k].sqrt();
            for (j, c) in C_BRANCH.iter().enumerate() {
                s[k][j] = (wh + wb * Complex64::new(*c, 0.0)) * root_p;
            }
            t[k] = wb * root_p;
            let mut interf = 0.0;
            for i in (k + 1)..cfg.k {
                interf += p[i] * interference_gain(w, channels, &b, i, model);
            }
            n[k] = interf + w.norm_squared() * cfg.noise_power;
        }
        Ok(LinkState { p, b, s, t, n, e_sense, e_off })
    }
}

/// `|w^H h_d,i|^2 + |w^H b_i|^2` in the symbiotic model, or the composite
/// `|w^H (h_d,i + b_i)|^2` when the RIS symbol is absorbed into the channel.
pub(crate) fn interference_gain(
    w: &DVector<Complex64>,
    channels: &ChannelSet,
    b: &[DVector<Complex64>],
    i: usize,
    model: RateModel,
) -> f64 {
    match model {
        RateModel::Symbiotic => {
            w.dotc(&channels.h_d[i]).norm_sqr() + w.dotc(&b[i]).norm_sqr()
        }
        RateModel::CompositeNoSr => {
            let hc = &channels.h_d[i] + &b[i];
            w.dotc(&hc).norm_sqr()
        }
    }
}

// ---------------------------------------------------------------------------
// SINRs and rates
// ---------------------------------------------------------------------------

/// Primary-stream SINR for RIS symbol `c` (+1 or -1) at decoder `k`.
///
/// The interference sum runs over lower-priority users only; `w_k = 0` is the
/// degenerate limit and yields 0.
pub fn sinr_primary(
    k: usize,
    c: f64,
    state: &OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<f64> {
    let ls = LinkState::compute(state, channels, cfg, RateModel::Symbiotic)?;
    let j = branch_index(c);
    Ok(sinr_primary_with(&ls, k, j))
}

pub(crate) fn branch_index(c: f64) -> usize {
    if c < 0.0 {
        0
    } else {
        1
    }
}

pub(crate) fn sinr_primary_with(ls: &LinkState, k: usize, j: usize) -> f64 {
    if ls.n[k] <= 0.0 {
        return 0.0;
    }
    ls.s[k][j].norm_sqr() / ls.n[k]
}

pub(crate) fn sinr_secondary_with(ls: &LinkState, k: usize, q: f64) -> f64 {
    if ls.n[k] <= 0.0 {
        return 0.0;
    }
    q * ls.t[k].norm_sqr() / ls.n[k]
}

/// Average primary rate in bit/s: the exact two-point expectation over the
/// equiprobable RIS symbol.
pub fn rate_primary(
    k: usize,
    state: &OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<f64> {
    let ls = LinkState::compute(state, channels, cfg, RateModel::Symbiotic)?;
    Ok(rate_primary_with(&ls, k, cfg, RateModel::Symbiotic))
}

pub(crate) fn rate_primary_with(ls: &LinkState, k: usize, cfg: &SystemConfig, model: RateModel) -> f64 {
    match model {
        RateModel::Symbiotic => {
            let r: f64 = (0..2)
                .map(|j| (1.0 + sinr_primary_with(ls, k, j)).log2())
                .sum();
            cfg.bandwidth * 0.5 * r
        }
        // Composite channel, deterministic symbol: single full-bandwidth stream.
        RateModel::CompositeNoSr => {
            cfg.bandwidth * (1.0 + sinr_primary_with(ls, k, 1)).log2()
        }
    }
}

/// Secondary (RIS) rate in bit/s, `B/Q log2(1 + Q SINR)`.
pub fn rate_secondary(
    k: usize,
    state: &OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<f64> {
    let ls = LinkState::compute(state, channels, cfg, RateModel::Symbiotic)?;
    Ok(rate_secondary_with(&ls, k, cfg, RateModel::Symbiotic))
}

pub(crate) fn rate_secondary_with(ls: &LinkState, k: usize, cfg: &SystemConfig, model: RateModel) -> f64 {
    match model {
        RateModel::Symbiotic => {
            cfg.bandwidth / cfg.q * (1.0 + sinr_secondary_with(ls, k, cfg.q)).log2()
        }
        RateModel::CompositeNoSr => 0.0,
    }
}

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

/// Evaluates rates, local frequencies, completed bits, the objective and the
/// sensing-cap feasibility flags for one state.
pub fn completed_bits(
    state: &OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<Metrics> {
    completed_bits_model(state, channels, cfg, RateModel::Symbiotic)
}

/// Same evaluation path as [`completed_bits`] with an explicit rate model;
/// every benchmark scheme funnels through here.
pub fn completed_bits_model(
    state: &OptState,
    channels: &ChannelSet,
    cfg: &SystemConfig,
    model: RateModel,
) -> Result<Metrics> {
    let ls = LinkState::compute(state, channels, cfg, model)?;
    let (sensed_p, sensed_s) = sensed_data(cfg);
    let window = cfg.alpha * cfg.t;
    let mut m = Metrics {
        rate_p: Vec::with_capacity(cfg.k),
        rate_s: Vec::with_capacity(cfg.k),
        p_tx: ls.p.clone(),
        f_loc: Vec::with_capacity(cfg.k),
        done_p: Vec::with_capacity(cfg.k),
        done_s: Vec::with_capacity(cfg.k),
        sensed_p,
        sensed_s,
        e_sense: ls.e_sense.clone(),
        e_off: ls.e_off.clone(),
        objective: 0.0,
        c4_user_ok: Vec::with_capacity(cfg.k),
        c4_ris_ok: Vec::with_capacity(cfg.k),
    };
    for k in 0..cfg.k {
        let rp = rate_primary_with(&ls, k, cfg, model);
        let rs = rate_secondary_with(&ls, k, cfg, model);
        let f = if window == 0.0 {
            0.0
        } else {
            local_frequency(state.beta[k], ls.e_off[k], cfg)
        };
        let done_p = rp * window + f * window / cfg.cycles_per_bit;
        let done_s = rs * window;
        m.rate_p.push(rp);
        m.rate_s.push(rs);
        m.f_loc.push(f);
        m.done_p.push(done_p);
        m.done_s.push(done_s);
        m.c4_user_ok.push(done_p <= m.sensed_p[k]);
        m.c4_ris_ok.push(done_s <= m.sensed_s[k]);
        m.objective += done_p + done_s;
    }
    Ok(m)
}
