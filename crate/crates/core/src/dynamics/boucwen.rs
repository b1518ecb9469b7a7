//! Lumped-mass shear frame with Bouc–Wen–Baber–Noori hysteretic stories.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::forcing::{samples, ForcingSeries};
use super::trajectory::Trajectory;
use crate::error::{invalid, Error, Result};
use crate::linalg::tridiagonal_eigenvalues;

/// Hysteresis and degradation constants of one story.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoucWenParams {
    /// Post-yield to pre-yield stiffness ratio.
    pub alpha: f64,
    pub a: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta_v: f64,
    pub delta_eta: f64,
    pub q: f64,
    pub p: f64,
    pub delta_psi: f64,
    pub lambda: f64,
    pub zeta_s: f64,
    pub psi: f64,
}

impl Default for BoucWenParams {
    fn default() -> Self {
        Self {
            alpha: 0.04,
            a: 1.0,
            beta: 15.0,
            gamma: 150.0,
            delta_v: 1000.0,
            delta_eta: 1000.0,
            q: 0.25,
            p: 1000.0,
            delta_psi: 5.0,
            lambda: 0.5,
            zeta_s: 0.99,
            psi: 0.05,
        }
    }
}

impl BoucWenParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta + self.gamma > 0.0) {
            return Err(invalid("beta+gamma", "must be positive"));
        }
        if !(self.a > 0.0) {
            return Err(invalid("A", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(invalid("alpha", "stiffness ratio must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Saturation value of the hysteretic displacement at energy `e`.
    pub fn ultimate_z(&self, e: f64) -> f64 {
        self.a / ((1.0 + self.delta_v * e) * (self.beta + self.gamma))
    }

    /// Pinching shape function.
    pub fn pinching(&self, xdot: f64, z: f64, e: f64) -> f64 {
        let zeta1 = self.zeta_s * (1.0 - libm::exp(-self.p * e));
        if zeta1 == 0.0 {
            return 1.0;
        }
        let zeta2 = (self.psi + self.delta_psi * e) * (self.lambda + zeta1);
        let s = z * signum(xdot) - self.q * self.ultimate_z(e);
        1.0 - zeta1 * libm::exp(-(s * s) / (zeta2 * zeta2))
    }
}

fn signum(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Rate of the hysteretic displacement `Ż` for drift velocity `xdot`.
pub fn boucwen_rate(xdot: f64, z: f64, e: f64, p: &BoucWenParams) -> f64 {
    let h = p.pinching(xdot, z, e);
    let body = p.a * xdot - (1.0 + p.delta_v * e) * (p.beta * xdot.abs() * z + p.gamma * xdot * z.abs());
    h / (1.0 + p.delta_eta * e) * body
}

/// Evolution law of the hysteretic displacement of a story.
pub trait HysteresisLaw: Sync {
    fn rate(&self, xdot: f64, z: f64, e: f64, p: &BoucWenParams) -> f64;
}

/// Degrading, pinching law of [`boucwen_rate`].
#[derive(Debug, Clone, Copy, Default)]
pub struct BaberNoori;

impl HysteresisLaw for BaberNoori {
    fn rate(&self, xdot: f64, z: f64, e: f64, p: &BoucWenParams) -> f64 {
        boucwen_rate(xdot, z, e, p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MDOFBoucWenConfig {
    pub masses: Vec<f64>,
    pub stiffness: Vec<f64>,
    pub zeta: f64,
    /// Influence vector multiplying `M ξ(t)`.
    pub load: Vec<f64>,
    pub params: BoucWenParams,
    /// Story stiffness multipliers followed by story hysteretic-amplitude
    /// multipliers, `2 × stories` entries.
    pub theta: Vec<f64>,
}

impl MDOFBoucWenConfig {
    /// Ten-story frame with nominal multipliers.
    pub fn ten_story() -> Self {
        Self {
            masses: vec![2.6e5; 10],
            stiffness: [4.9, 2.0, 2.0, 2.0, 1.8, 1.8, 1.8, 1.0, 1.0, 1.0].iter().map(|k| k * 1e7).collect(),
            zeta: 0.05,
            load: vec![1.0; 10],
            params: BoucWenParams::default(),
            theta: vec![1.0; 20],
        }
    }

    pub fn stories(&self) -> usize {
        self.masses.len()
    }

    pub fn with_theta(mut self, theta: Vec<f64>) -> Self {
        self.theta = theta;
        self
    }
}

/// Frame matrices after applying the random multipliers.
#[derive(Debug, Clone)]
pub struct ShearFrame {
    pub masses: Vec<f64>,
    pub stiffness: Vec<f64>,
    pub story_params: Vec<BoucWenParams>,
    pub load: Vec<f64>,
    /// Rayleigh coefficients `(a0, a1)` of `C = a0 M + a1 K`.
    pub rayleigh: (f64, f64),
    /// Tridiagonal damping matrix: diagonal and super-diagonal.
    pub c_diag: Vec<f64>,
    pub c_off: Vec<f64>,
    pub frequencies: Vec<f64>,
}

impl ShearFrame {
    pub fn build(c: &MDOFBoucWenConfig) -> Result<Self> {
        let n = c.stories();
        if n == 0 {
            return Err(invalid("masses", "frame needs at least one story"));
        }
        for (name, len) in [("stiffness", c.stiffness.len()), ("load", c.load.len())] {
            if len != n {
                log::debug!("{name} has {len} entries for {n} stories");
                return Err(Error::DimensionMismatch { expected: n, found: len });
            }
        }
        if c.theta.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: c.theta.len() });
        }
        if c.masses.iter().chain(&c.stiffness).any(|v| !(*v > 0.0)) {
            return Err(invalid("masses/stiffness", "must be positive"));
        }
        if c.theta.iter().any(|v| !(*v > 0.0)) {
            return Err(invalid("theta", "multipliers must be positive"));
        }
        c.params.validate()?;
        let stiffness: Vec<f64> = (0..n).map(|j| c.theta[j] * c.stiffness[j]).collect();
        let story_params: Vec<BoucWenParams> =
            (0..n).map(|j| BoucWenParams { a: c.params.a * c.theta[n + j], ..c.params }).collect();
        // initial tangent story stiffness
        let k_eff: Vec<f64> = (0..n)
            .map(|j| stiffness[j] * (story_params[j].alpha + (1.0 - story_params[j].alpha) * story_params[j].a))
            .collect();
        let (k_diag, k_off) = tridiagonal_stiffness(&k_eff);
        // M^{-1/2} K M^{-1/2} keeps the tridiagonal pattern
        let inv_sqrt: Vec<f64> = c.masses.iter().map(|m| 1.0 / libm::sqrt(*m)).collect();
        let d: Vec<f64> = (0..n).map(|i| k_diag[i] * inv_sqrt[i] * inv_sqrt[i]).collect();
        let o: Vec<f64> = (0..n.saturating_sub(1)).map(|i| k_off[i] * inv_sqrt[i] * inv_sqrt[i + 1]).collect();
        let frequencies: Vec<f64> = tridiagonal_eigenvalues(&d, &o).iter().map(|l| libm::sqrt(l.max(0.0))).collect();
        let rayleigh = if n == 1 {
            (2.0 * c.zeta * frequencies[0], 0.0)
        } else {
            let (w1, w2) = (frequencies[0], frequencies[1]);
            (2.0 * c.zeta * w1 * w2 / (w1 + w2), 2.0 * c.zeta / (w1 + w2))
        };
        let c_diag = (0..n).map(|i| rayleigh.0 * c.masses[i] + rayleigh.1 * k_diag[i]).collect();
        let c_off = k_off.iter().map(|k| rayleigh.1 * k).collect();
        Ok(Self {
            masses: c.masses.clone(),
            stiffness,
            story_params,
            load: c.load.clone(),
            rayleigh,
            c_diag,
            c_off,
            frequencies,
        })
    }

    pub fn stories(&self) -> usize {
        self.masses.len()
    }

    /// State derivative for the packed state `[x, v, z, e]`.
    fn derivative<L: HysteresisLaw>(&self, law: &L, s: &[f64], ground: f64, out: &mut [f64]) {
        let n = self.stories();
        let (x, rest) = s.split_at(n);
        let (v, rest) = rest.split_at(n);
        let (z, e) = rest.split_at(n);
        for j in 0..n {
            let drift = x[j] - if j > 0 { x[j - 1] } else { 0.0 };
            let drift_v = v[j] - if j > 0 { v[j - 1] } else { 0.0 };
            let p = &self.story_params[j];
            out[j] = v[j];
            out[2 * n + j] = law.rate(drift_v, z[j], e[j], p);
            out[3 * n + j] = drift_v * z[j];
            // story force pulls DOF j back and pushes DOF j-1 forward
            let force = p.alpha * self.stiffness[j] * drift + (1.0 - p.alpha) * self.stiffness[j] * z[j];
            out[n + j] = -force;
            if j > 0 {
                out[n + j - 1] += force;
            }
        }
        for j in 0..n {
            let mut damp = self.c_diag[j] * v[j];
            if j > 0 {
                damp += self.c_off[j - 1] * v[j - 1];
            }
            if j + 1 < n {
                damp += self.c_off[j] * v[j + 1];
            }
            out[n + j] = (out[n + j] - damp) / self.masses[j] - self.load[j] * ground;
        }
    }
}

fn tridiagonal_stiffness(k: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = k.len();
    let diag = (0..n).map(|i| k[i] + if i + 1 < n { k[i + 1] } else { 0.0 }).collect();
    let off = (1..n).map(|i| -k[i]).collect();
    (diag, off)
}

/// Integrates the frame from rest with the degrading, pinching law.
pub fn simulate_boucwen(
    c: &MDOFBoucWenConfig,
    excitation: &ForcingSeries,
    dt: f64,
    duration: f64,
) -> Result<Trajectory> {
    simulate_frame(&ShearFrame::build(c)?, &BaberNoori, excitation, dt, duration)
}

/// Fourth-order Runge–Kutta integration of every state, including the
/// hysteretic displacements and dissipated energies.
pub fn simulate_frame<L: HysteresisLaw>(
    frame: &ShearFrame,
    law: &L,
    excitation: &ForcingSeries,
    dt: f64,
    duration: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(invalid("dt", "time step must be positive"));
    }
    let n = frame.stories();
    let steps = samples(duration, dt);
    let dim = 4 * n;
    let mut hist: Vec<Vec<f64>> = (0..dim).map(|_| Vec::with_capacity(steps)).collect();
    let mut s = vec![0.0; dim];
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    for (h, v) in hist.iter_mut().zip(&s) {
        h.push(*v);
    }
    for k in 1..steps {
        let t = (k - 1) as f64 * dt;
        let half = 0.5 * dt;
        frame.derivative(law, &s, excitation.at(t), &mut k1);
        axpy(&s, half, &k1, &mut tmp);
        frame.derivative(law, &tmp, excitation.at(t + half), &mut k2);
        axpy(&s, half, &k2, &mut tmp);
        frame.derivative(law, &tmp, excitation.at(t + half), &mut k3);
        axpy(&s, dt, &k3, &mut tmp);
        frame.derivative(law, &tmp, excitation.at(t + dt), &mut k4);
        let mut finite = true;
        for i in 0..dim {
            s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            finite &= s[i].is_finite();
        }
        if !finite {
            return Err(Error::NonFiniteState { time: k as f64 * dt });
        }
        for (h, v) in hist.iter_mut().zip(&s) {
            h.push(*v);
        }
    }
    let mut channels: Vec<(String, Vec<f64>)> = Vec::with_capacity(dim);
    for (block, prefix) in ["x", "v", "z", "e"].iter().enumerate() {
        for j in 0..n {
            channels.push((format!("{prefix}{}", j + 1), core::mem::take(&mut hist[block * n + j])));
        }
    }
    Ok(Trajectory::new(dt, channels))
}

fn axpy(s: &[f64], a: f64, k: &[f64], out: &mut [f64]) {
    for i in 0..s.len() {
        out[i] = s[i] + a * k[i];
    }
}
