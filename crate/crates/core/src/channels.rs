//! Scenario geometry and seeded Rician channel generation.
//!
//! The deployment is a 2-D femtocell layout: one BS at the origin, one RIS per
//! user group, and each user drawn uniformly from a disc around its group
//! center. Reflected links (user-RIS, RIS-BS) are Rician with deterministic
//! steering-vector line-of-sight components; the blocked direct link is pure
//! NLoS Rayleigh. Identical seeds reproduce identical channel sets bit for bit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{ChannelSet, SystemConfig};
use crate::seed;

/// Node layout in meters.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub bs: [f64; 2],
    pub ris: Vec<[f64; 2]>,
    pub user_center: Vec<[f64; 2]>,
    pub user_radius: f64,
}

impl Geometry {
    /// Cross layout: BS at the origin, one RIS on each axis at 200 m, user
    /// discs of radius 10 m offset 30 m from each RIS.
    pub fn baseline() -> Self {
        Geometry {
            bs: [0.0, 0.0],
            ris: vec![[200.0, 0.0], [0.0, 200.0], [-200.0, 0.0], [0.0, -200.0]],
            user_center: vec![[200.0, 30.0], [-30.0, 200.0], [-200.0, -30.0], [30.0, -200.0]],
            user_radius: 10.0,
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.ris.len() != k || self.user_center.len() != k {
            return Err(Error::Validation(format!(
                "geometry must list {k} RIS positions and user centers"
            )));
        }
        if !(self.user_radius >= 0.0) {
            return Err(Error::Validation("user_radius must be >= 0".into()));
        }
        for i in 0..k {
            if dist(self.bs, self.ris[i]) == 0.0 {
                return Err(Error::Validation(format!("RIS {i} coincides with the BS")));
            }
        }
        Ok(())
    }
}

/// Path-loss and Rician parameters (linear units).
#[derive(Debug, Clone)]
pub struct FadingParams {
    /// Reference gain at 1 m.
    pub beta0: f64,
    /// User-BS exponent.
    pub alpha_ub: f64,
    /// User-RIS exponent.
    pub alpha_ur: f64,
    /// RIS-BS exponent.
    pub alpha_rb: f64,
    /// Rician factor of the user-RIS link.
    pub k1: f64,
    /// Rician factor of the RIS-BS link.
    pub k2: f64,
}

impl FadingParams {
    /// -30 dB reference gain, exponents (-2.0, -2.2, -3.6), K factors of 10.
    pub fn baseline() -> Self {
        FadingParams {
            beta0: 1e-3,
            alpha_ub: -2.0,
            alpha_ur: -2.2,
            alpha_rb: -3.6,
            k1: 10.0,
            k2: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta0 > 0.0) {
            return Err(Error::Validation("beta0 must be > 0".into()));
        }
        if !(self.k1 >= 0.0) || !(self.k2 >= 0.0) {
            return Err(Error::Validation("Rician factors must be >= 0".into()));
        }
        Ok(())
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Linear path gain `beta0 * d^exponent` (exponent negative).
pub fn path_loss(d: f64, exponent: f64, beta0: f64) -> Result<f64> {
    if d == 0.0 {
        return Err(Error::ZeroDistance);
    }
    Ok(beta0 * d.powf(exponent))
}

/// Half-wavelength uniform linear array response: entry `i = e^{j pi i sin(angle)}`.
pub fn steering_vector(n_elems: usize, angle: f64) -> DVector<Complex64> {
    let s = angle.sin();
    DVector::from_iterator(
        n_elems,
        (0..n_elems).map(|i| Complex64::from_polar(1.0, std::f64::consts::PI * i as f64 * s)),
    )
}

fn azimuth(from: [f64; 2], to: [f64; 2]) -> f64 {
    (to[1] - from[1]).atan2(to[0] - from[0])
}

fn cn01(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws one channel realization, including user placement, from `seed`.
///
/// Each user's placement, direct link and reflected links come from
/// independent substreams of `seed`, so the placement and direct channels do
/// not depend on the RIS size; sweeps over N therefore compare against common
/// random numbers. Identical `(geometry, fading, cfg, seed)` give identical
/// output.
pub fn sample_channels(
    geometry: &Geometry,
    fading: &FadingParams,
    cfg: &SystemConfig,
    seed: u64,
) -> Result<ChannelSet> {
    geometry.validate(cfg.k)?;
    fading.validate()?;
    let mut h_d = Vec::with_capacity(cfg.k);
    let mut h_r = Vec::with_capacity(cfg.k);
    let mut g = Vec::with_capacity(cfg.k);

    let los_mix = |k_factor: f64| {
        (
            (k_factor / (k_factor + 1.0)).sqrt(),
            (1.0 / (k_factor + 1.0)).sqrt(),
        )
    };
    let (c1_los, c1_nlos) = los_mix(fading.k1);
    let (c2_los, c2_nlos) = los_mix(fading.k2);

    for k in 0..cfg.k {
        let sub = |tag: u64| seed::rng(seed::stream_seed(seed, (k as u64) * 4 + tag));

        let mut pos_rng = sub(0);
        let theta = pos_rng.gen_range(0.0..std::f64::consts::TAU);
        let radius = geometry.user_radius * pos_rng.gen::<f64>().sqrt();
        let user = [
            geometry.user_center[k][0] + radius * theta.cos(),
            geometry.user_center[k][1] + radius * theta.sin(),
        ];

        let l_d = path_loss(dist(user, geometry.bs), fading.alpha_ub, fading.beta0)?;
        let l_r = path_loss(dist(user, geometry.ris[k]), fading.alpha_ur, fading.beta0)?;
        let l_g = path_loss(dist(geometry.ris[k], geometry.bs), fading.alpha_rb, fading.beta0)?;

        let mut hd_rng = sub(1);
        h_d.push(DVector::from_fn(cfg.m, |_, _| cn01(&mut hd_rng) * l_d.sqrt()));

        let mut hr_rng = sub(2);
        let a_ris_user = steering_vector(cfg.n, azimuth(geometry.ris[k], user));
        h_r.push(DVector::from_fn(cfg.n, |i, _| {
            (a_ris_user[i] * c1_los + cn01(&mut hr_rng) * c1_nlos) * l_r.sqrt()
        }));

        let mut g_rng = sub(3);
        let a_ris_bs = steering_vector(cfg.n, azimuth(geometry.ris[k], geometry.bs));
        let a_bs_ris = steering_vector(cfg.m, azimuth(geometry.bs, geometry.ris[k]));
        // Row-major draw order keeps G(N) a prefix of G(N') for N < N'.
        let mut gk = DMatrix::<Complex64>::zeros(cfg.n, cfg.m);
        for i in 0..cfg.n {
            for j in 0..cfg.m {
                gk[(i, j)] =
                    (a_ris_bs[i] * a_bs_ris[j] * c2_los + cn01(&mut g_rng) * c2_nlos) * l_g.sqrt();
            }
        }
        g.push(gk);
    }

    let set = ChannelSet { h_d, h_r, g };
    set.validate(cfg)?;
    Ok(set)
}
