//! Galerkin truncation of the forced/damped quadratic NLS in fast time,
//!
//! ```text
//! dv_k = [-i|k|² v_k - iνμ G_k(v) - ν f(|k|²) v_k] dt + √ν b_k dβ_k(t),
//! ```
//!
//! with the full (non-resonant included) convolution `G_k` for each case:
//! `Σ_{k1+k2=-k} v̄₁v̄₂` (A), `Σ_{k1+k2=k} v₁v₂` (B), `Σ_{k1-k2=k} v̄₂v₁` (C).
//! Comparing its ν → 0 behaviour with [`crate::dynamics`] checks the averaging
//! principle numerically.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    checkpoint_steps, Case, Coupling, Damping, Forcing, ModeSystem, PathAbort, Scheme, StateVector, Stepper,
};
use crate::error::{Error, Result};
use crate::lattice::{BoxShape, Domain, WaveVector};
use crate::noise::PathNoise;

const CHUNK: usize = 32;

/// Default fast step coefficient: `h_fast = 0.05 / K²`.
pub const DEFAULT_FAST_STEP_COEF: f64 = 0.05;

pub fn default_fast_step(bound: i32) -> f64 {
    DEFAULT_FAST_STEP_COEF / f64::from(bound.max(1)).powi(2)
}

/// The truncated equation on the modes of a [`ModeSystem`].
#[derive(Debug, Clone)]
pub struct DirectSystem {
    pub case: Case,
    pub modes: Vec<WaveVector>,
    /// `|k|²` per mode.
    pub lambda: Vec<f64>,
    /// Convolution terms per mode; `(i, j)` is read as in [`ModeSystem`]
    /// (case A: `conj(v_i)·conj(v_j)`).
    pub convolution: Vec<Vec<Coupling>>,
    pub damping: Vec<f64>,
    pub forcing: Vec<f64>,
    pub mu: f64,
}

impl DirectSystem {
    /// Full convolution over the mode set. The mode set must be closed under
    /// `k -> -k` and the box must be square.
    pub fn new(sys: &ModeSystem) -> Result<Self> {
        Self::build(sys, false)
    }

    /// Keeps only the resonant convolution terms; used to cross-check the
    /// effective drift.
    pub fn resonant_only(sys: &ModeSystem) -> Result<Self> {
        Self::build(sys, true)
    }

    fn build(sys: &ModeSystem, resonant_only: bool) -> Result<Self> {
        if !matches!(sys.domain.shape(), BoxShape::Square { .. }) {
            return Err(Error::InvalidConfig("direct simulation supports the square box only".into()));
        }
        if let Some(k) = sys.modes.iter().find(|k| sys.index_of(-**k).is_none()) {
            return Err(Error::NotSymmetric((-*k).to_string()));
        }
        let convolution = sys
            .modes
            .iter()
            .map(|&k3| {
                sys.modes
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &k1)| {
                        // Partner and the frequency mismatch of the term.
                        let (k2, mismatch) = match sys.case {
                            Case::A => {
                                let k2 = -k3 - k1;
                                (k2, k1.norm2() + k2.norm2() + k3.norm2())
                            }
                            Case::B => {
                                let k2 = k3 - k1;
                                (k2, k3.norm2() - k1.norm2() - k2.norm2())
                            }
                            Case::C => {
                                let k2 = k1 - k3;
                                (k2, k2.norm2() - k1.norm2() + k3.norm2())
                            }
                        };
                        let j = sys.index_of(k2)?;
                        (!resonant_only || mismatch == 0).then_some(Coupling { i, j })
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            case: sys.case,
            modes: sys.modes.clone(),
            lambda: sys.modes.iter().map(|k| k.norm2() as f64).collect(),
            convolution,
            damping: sys.damping.clone(),
            forcing: sys.forcing.clone(),
            mu: sys.mu,
        })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `G_k(v)` without the `-iνμ` prefactor.
    pub fn convolution_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (m, terms) in self.convolution.iter().enumerate() {
            let mut acc = Complex64::default();
            match self.case {
                Case::A => {
                    for c in terms {
                        acc += (v[c.i] * v[c.j]).conj();
                    }
                }
                Case::B => {
                    for c in terms {
                        acc += v[c.i] * v[c.j];
                    }
                }
                Case::C => {
                    for c in terms {
                        acc += v[c.j].conj() * v[c.i];
                    }
                }
            }
            out[m] = acc;
        }
    }
}

/// Fourier coefficients `v_k` at fast time `t`; slow time is `τ = ν t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastState {
    pub v: Vec<Complex64>,
    pub t: f64,
    pub nu: f64,
}

impl FastState {
    pub fn tau(&self) -> f64 {
        self.nu * self.t
    }
}

/// Deterministic fast-time drift `-i|k|² v - iνμ G(v) - νf v`.
pub fn fast_drift(sys: &DirectSystem, state: &FastState) -> Result<Vec<Complex64>> {
    if state.v.len() != sys.len() {
        return Err(Error::StateLength { expected: sys.len(), got: state.v.len() });
    }
    let mut out = vec![Complex64::default(); sys.len()];
    sys.convolution_into(&state.v, &mut out);
    let nl = Complex64::new(0.0, -state.nu * sys.mu);
    for (m, o) in out.iter_mut().enumerate() {
        let v = state.v[m];
        *o = Complex64::new(0.0, -sys.lambda[m]) * v + nl * *o - state.nu * sys.damping[m] * v;
    }
    Ok(out)
}

/// `a_k = e^{i|k|² t} v_k`, stamped with `τ = ν t`.
pub fn to_interaction(state: &FastState, modes: &[WaveVector]) -> StateVector {
    let amplitudes =
        state.v.iter().zip(modes).map(|(v, k)| v * Complex64::from_polar(1.0, k.norm2() as f64 * state.t)).collect();
    StateVector { amplitudes, tau: state.tau() }
}

/// Fast-time integration settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastConfig {
    pub h_fast: f64,
    /// Number of fast steps.
    pub steps: u64,
    pub checkpoints: usize,
    pub seed: u64,
}

impl FastConfig {
    /// Steps covering the slow horizon `T` (fast horizon `T/ν`); `h_fast` is
    /// shrunk, if needed, so that a whole number of steps lands on `T/ν`.
    pub fn for_slow_horizon(horizon: f64, nu: f64, h_fast: f64, checkpoints: usize, seed: u64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidConfig(format!("nu must be positive, got {nu}")));
        }
        if !(horizon > 0.0 && h_fast > 0.0) {
            return Err(Error::InvalidConfig("horizon and h_fast must be positive".into()));
        }
        let t_end = horizon / nu;
        let steps = (t_end / h_fast * (1.0 - 1e-12)).ceil().max(1.0) as u64;
        Ok(Self { h_fast: t_end / steps as f64, steps, checkpoints, seed })
    }
}

/// One fast step with the linear rotation applied exactly:
/// `v <- e^{-i|k|²h} (v + h·(-iνμ G(v) - νf v) + √(νh)·b·ξ)`.
#[derive(Debug, Clone)]
pub struct FastStepper<'a> {
    sys: &'a DirectSystem,
    nu: f64,
    h: f64,
    rotation: Vec<Complex64>,
    noise_scale: Vec<f64>,
    buf: Vec<Complex64>,
}

impl<'a> FastStepper<'a> {
    pub fn new(sys: &'a DirectSystem, nu: f64, h: f64) -> Self {
        Self {
            sys,
            nu,
            h,
            rotation: sys.lambda.iter().map(|l| Complex64::from_polar(1.0, -l * h)).collect(),
            noise_scale: sys.forcing.iter().map(|b| b * (nu * h).sqrt()).collect(),
            buf: vec![Complex64::default(); sys.len()],
        }
    }

    pub fn advance(&mut self, v: &mut [Complex64], xi: &[Complex64]) {
        self.sys.convolution_into(v, &mut self.buf);
        let nl = Complex64::new(0.0, -self.nu * self.sys.mu * self.h);
        for m in 0..v.len() {
            let inner =
                v[m] * (1.0 - self.h * self.nu * self.sys.damping[m]) + nl * self.buf[m] + self.noise_scale[m] * xi[m];
            v[m] = self.rotation[m] * inner;
        }
    }
}

/// Integrates one direct path; states are sampled at `config.checkpoints`
/// evenly spaced steps.
pub fn integrate_fast(
    sys: &DirectSystem,
    nu: f64,
    config: &FastConfig,
    initial: &[Complex64],
    path: u64,
) -> std::result::Result<Vec<FastState>, PathAbort> {
    let mut stepper = FastStepper::new(sys, nu, config.h_fast);
    let mut noise = PathNoise::new(config.seed, path, sys.len());
    let mut xi = vec![Complex64::default(); sys.len()];
    let mut v = initial.to_vec();
    let record_at = checkpoint_steps(config.steps, config.checkpoints);
    let mut out = Vec::with_capacity(record_at.len());
    let mut next = 0;
    for n in 0..=config.steps {
        if record_at.get(next) == Some(&n) {
            out.push(FastState { v: v.clone(), t: n as f64 * config.h_fast, nu });
            next += 1;
        }
        if n == config.steps {
            break;
        }
        noise.next_step(&mut xi);
        stepper.advance(&mut v, &xi);
        if let Some(m) = v.iter().position(|z| !z.is_finite()) {
            let t = (n + 1) as f64 * config.h_fast;
            return Err(PathAbort { path, step: n + 1, tau: nu * t, mode: sys.modes[m] });
        }
    }
    Ok(out)
}

/// Parameters shared by every rung of a ν ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AveragingConfig {
    pub mu: f64,
    pub damping: Damping,
    pub forcing: Forcing,
    /// Slow-time horizon `T`.
    pub horizon: f64,
    pub paths: usize,
    /// Fast step; `None` selects `0.05 / K²`.
    pub h_fast: Option<f64>,
    pub seed: u64,
    /// Initial amplitude of every mode.
    pub initial: Complex64,
    /// Scheme for the effective run. Euler–Maruyama mirrors the direct
    /// integrator, so the two agree exactly when `μ = 0`.
    pub effective_scheme: Scheme,
}

impl Default for AveragingConfig {
    fn default() -> Self {
        Self {
            mu: 1.0,
            damping: Damping::Linear,
            forcing: Forcing::Constant { value: 1.0 },
            horizon: 1.0,
            paths: 256,
            h_fast: None,
            seed: 0,
            initial: Complex64::default(),
            effective_scheme: Scheme::EulerMaruyama,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragingRow {
    pub nu: f64,
    /// `max_k |E|a_k|²_direct - E|a_k|²_effective|` at `T`.
    pub max_dev: f64,
    /// `(Σ_k dev_k²)^{1/2}`.
    pub l2_dev: f64,
    pub paths: usize,
    pub h_fast: f64,
    pub steps: u64,
    pub direct_abs2: Vec<f64>,
    pub effective_abs2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragingTable {
    pub case: Case,
    pub modes: Vec<WaveVector>,
    pub rows: Vec<AveragingRow>,
}

impl AveragingTable {
    /// Whether `max_dev` strictly decreases down the ladder.
    pub fn is_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].max_dev < w[0].max_dev)
    }

    /// Like [`Self::is_strictly_decreasing`], but consecutive rows that both sit
    /// at or below `floor` also pass: once the two runs agree to roundoff there
    /// is nothing left to decrease.
    pub fn decreases_above(&self, floor: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].max_dev < w[0].max_dev || (w[0].max_dev <= floor && w[1].max_dev <= floor))
    }
}

/// Deviations below this are roundoff between two identical computations.
pub const DEVIATION_FLOOR: f64 = 1e-10;

/// Runs direct and effective ensembles for each ν with matched noise.
///
/// Both runs share the fast grid: direct step `h_fast` in `t`, effective step
/// `ν·h_fast` in `τ`. The direct run receives `√(ν h_fast)·b·ξ_n`; the effective
/// run receives the same increment seen from the interaction frame,
/// `e^{i|k|² t_n}·ξ_n`, so the comparison measures a strong (pathwise) error.
pub fn averaging_error(
    case: Case,
    nu_list: &[f64],
    domain: &Domain,
    config: &AveragingConfig,
) -> Result<AveragingTable> {
    if nu_list.is_empty() {
        return Err(Error::InvalidConfig("empty nu list".into()));
    }
    if nu_list.iter().any(|nu| !(nu.is_finite() && *nu > 0.0)) {
        return Err(Error::InvalidConfig("every nu must be positive and finite".into()));
    }
    if nu_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig("nu list must be strictly descending".into()));
    }
    if config.paths == 0 {
        return Err(Error::InvalidConfig("paths must be at least 1".into()));
    }
    let sys = ModeSystem::from_profiles(case, domain, config.mu, config.damping, config.forcing)?;
    let direct = DirectSystem::new(&sys)?;
    let h_fast = config.h_fast.unwrap_or_else(|| default_fast_step(domain.bound()));

    let rows =
        nu_list.iter().map(|&nu| averaging_row(&sys, &direct, nu, h_fast, config)).collect::<Result<Vec<_>>>()?;
    Ok(AveragingTable { case, modes: sys.modes.clone(), rows })
}

fn averaging_row(
    sys: &ModeSystem,
    direct: &DirectSystem,
    nu: f64,
    h_fast: f64,
    config: &AveragingConfig,
) -> Result<AveragingRow> {
    let fc = FastConfig::for_slow_horizon(config.horizon, nu, h_fast, 1, config.seed)?;
    let n_modes = sys.len();
    let n_chunks = config.paths.div_ceil(CHUNK);
    // Per chunk: summed direct and effective |a|² at T.
    type ChunkSums = std::result::Result<(Vec<f64>, Vec<f64>), PathAbort>;
    let chunks: Vec<ChunkSums> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut sd = vec![0.0; n_modes];
            let mut se = vec![0.0; n_modes];
            for p in c * CHUNK..((c + 1) * CHUNK).min(config.paths) {
                let (vd, ae) = matched_path(sys, direct, nu, &fc, config, p as u64)?;
                for m in 0..n_modes {
                    sd[m] += vd[m].norm_sqr();
                    se[m] += ae[m].norm_sqr();
                }
            }
            Ok((sd, se))
        })
        .collect();
    let mut sum_d = vec![0.0; n_modes];
    let mut sum_e = vec![0.0; n_modes];
    for chunk in chunks {
        let (sd, se) = chunk?;
        for m in 0..n_modes {
            sum_d[m] += sd[m];
            sum_e[m] += se[m];
        }
    }
    let n = config.paths as f64;
    let direct_abs2: Vec<f64> = sum_d.iter().map(|s| s / n).collect();
    let effective_abs2: Vec<f64> = sum_e.iter().map(|s| s / n).collect();
    let devs: Vec<f64> = direct_abs2.iter().zip(&effective_abs2).map(|(d, e)| (d - e).abs()).collect();
    Ok(AveragingRow {
        nu,
        max_dev: devs.iter().copied().fold(0.0, f64::max),
        l2_dev: devs.iter().map(|d| d * d).sum::<f64>().sqrt(),
        paths: config.paths,
        h_fast: fc.h_fast,
        steps: fc.steps,
        direct_abs2,
        effective_abs2,
    })
}

/// Final direct `v` and effective `a` of one matched path.
fn matched_path(
    sys: &ModeSystem,
    direct: &DirectSystem,
    nu: f64,
    fc: &FastConfig,
    config: &AveragingConfig,
    path: u64,
) -> std::result::Result<(Vec<Complex64>, Vec<Complex64>), PathAbort> {
    let n_modes = sys.len();
    let mut fast = FastStepper::new(direct, nu, fc.h_fast);
    let mut slow = Stepper::new(sys, nu * fc.h_fast, config.effective_scheme);
    let mut noise = PathNoise::new(config.seed, path, n_modes);
    let mut xi = vec![Complex64::default(); n_modes];
    let mut xi_eff = vec![Complex64::default(); n_modes];
    let mut v = vec![config.initial; n_modes];
    let mut a = v.clone();
    for n in 0..fc.steps {
        let t = n as f64 * fc.h_fast;
        noise.next_step(&mut xi);
        for m in 0..n_modes {
            xi_eff[m] = Complex64::from_polar(1.0, direct.lambda[m] * t) * xi[m];
        }
        fast.advance(&mut v, &xi);
        slow.advance(&mut a, &xi_eff);
        let bad = v.iter().position(|z| !z.is_finite()).or_else(|| a.iter().position(|z| !z.is_finite()));
        if let Some(m) = bad {
            return Err(PathAbort { path, step: n + 1, tau: nu * (t + fc.h_fast), mode: sys.modes[m] });
        }
    }
    Ok((v, a))
}
