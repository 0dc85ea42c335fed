//! Effective (resonant) dynamics in slow time for the three monomial
//! nonlinearities:
//!
//! ```text
//! case A (ū²):  da₃ = -f(|k₃|²) a₃ dτ + b₃ dβ₃
//! case B (u²):  da₃ = [-f a₃ - iμ Σ_{(k1,k2) ∈ S¹(k3)} a₁ a₂] dτ + b₃ dβ₃
//! case C (ūu):  da₃ = [-f a₃ - iμ Σ_{(k1,k2) ∈ S²(k3)} ā₂ a₁] dτ + b₃ dβ₃
//! ```
//!
//! Sums run over ordered pairs, so a triad contributes both `(k1,k2)` and
//! `(k2,k1)`. The complex Wiener processes are normalised to `E|β(τ)|² = τ`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::lattice::{Domain, WaveVector};
use crate::noise::PathNoise;
use crate::resonance::{ResonanceSet, SetKind};

/// Normalisation of the complex Wiener increments, recorded in run metadata.
pub const WIENER_CONVENTION: &str = "E|beta(tau)|^2 = tau; independent real and imaginary parts of variance tau/2";

/// Paths per reduction chunk. Fixed so the summation order never depends on the pool size.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// `g = ū²`: no resonances, Ornstein–Uhlenbeck per mode.
    A,
    /// `g = u²`: couplings from `S¹`.
    B,
    /// `g = ūu`: couplings from `S²`.
    C,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Case {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Case::A),
            "B" => Ok(Case::B),
            "C" => Ok(Case::C),
            _ => Err(Error::InvalidConfig(format!("unknown case `{s}` (expected A, B or C)"))),
        }
    }
}

/// Damping `f(|k|²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", from = "DampingRepr")]
pub enum Damping {
    Zero,
    Constant {
        value: f64,
    },
    /// `f(x) = x`, plain viscosity.
    Linear,
    /// `f(x) = x²`.
    Quadratic,
}

// Unit variants of an internally tagged enum ignore extra keys; empty
// struct variants reject them.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum DampingRepr {
    Zero {},
    Constant { value: f64 },
    Linear {},
    Quadratic {},
}

impl From<DampingRepr> for Damping {
    fn from(r: DampingRepr) -> Self {
        match r {
            DampingRepr::Zero {} => Damping::Zero,
            DampingRepr::Constant { value } => Damping::Constant { value },
            DampingRepr::Linear {} => Damping::Linear,
            DampingRepr::Quadratic {} => Damping::Quadratic,
        }
    }
}

impl Damping {
    pub fn eval(&self, norm2: i64) -> f64 {
        let x = norm2 as f64;
        match *self {
            Damping::Zero => 0.0,
            Damping::Constant { value } => value,
            Damping::Linear => x,
            Damping::Quadratic => x * x,
        }
    }
}

/// Forcing amplitude `b_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Forcing {
    Constant {
        value: f64,
    },
    /// `b_k = (1 + |k|²)^(-s)`.
    Power {
        s: f64,
    },
}

impl Forcing {
    pub fn eval(&self, k: WaveVector) -> f64 {
        match *self {
            Forcing::Constant { value } => value,
            Forcing::Power { s } => (1.0 + k.norm2() as f64).powf(-s),
        }
    }
}

/// One ordered term of a mode's resonant sum.
///
/// Case B reads it as `a_i · a_j`, case C as `conj(a_j) · a_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeSystem {
    pub case: Case,
    pub domain: Domain,
    pub modes: Vec<WaveVector>,
    pub couplings: Vec<Vec<Coupling>>,
    pub damping: Vec<f64>,
    pub forcing: Vec<f64>,
    pub mu: f64,
    #[serde(skip)]
    index: HashMap<WaveVector, usize>,
}

/// Mode system on every nonzero vector of `domain`.
pub fn build_mode_system(
    case: Case,
    domain: &Domain,
    mu: f64,
    f: impl Fn(i64) -> f64,
    b: impl Fn(WaveVector) -> f64,
) -> Result<ModeSystem> {
    let modes = domain.vectors().into_iter().filter(|k| !k.is_zero()).collect();
    ModeSystem::with_modes(case, domain, modes, mu, f, b)
}

impl ModeSystem {
    /// Mode system on an explicit mode list. Couplings are kept only when both
    /// partners are in the list.
    pub fn with_modes(
        case: Case,
        domain: &Domain,
        modes: Vec<WaveVector>,
        mu: f64,
        f: impl Fn(i64) -> f64,
        b: impl Fn(WaveVector) -> f64,
    ) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidConfig(format!("mu must be finite, got {mu}")));
        }
        let mut index = HashMap::with_capacity(modes.len());
        for (i, &k) in modes.iter().enumerate() {
            if k.is_zero() {
                return Err(Error::InvalidConfig("the zero vector is not a mode".into()));
            }
            if index.insert(k, i).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate mode {k}")));
            }
        }

        let mut damping = Vec::with_capacity(modes.len());
        let mut forcing = Vec::with_capacity(modes.len());
        for &k in &modes {
            let fk = f(k.norm2());
            if !(fk.is_finite() && fk >= 0.0) {
                return Err(Error::InvalidProfile { name: "damping", norm2: k.norm2(), value: fk });
            }
            let bk = b(k);
            if !(bk.is_finite() && bk >= 0.0) {
                return Err(Error::InvalidProfile { name: "forcing", norm2: k.norm2(), value: bk });
            }
            damping.push(fk);
            forcing.push(bk);
        }

        let set_kind = match case {
            Case::A => None,
            Case::B => Some(SetKind::S1),
            Case::C => Some(SetKind::S2),
        };
        let set = set_kind.map(|kind| ResonanceSet::build(kind, domain)).transpose()?;
        let couplings = modes
            .iter()
            .map(|&k3| match &set {
                None => Vec::new(),
                Some(set) => set
                    .get(k3)
                    .iter()
                    .filter_map(|(k1, k2)| Some(Coupling { i: *index.get(k1)?, j: *index.get(k2)? }))
                    .collect(),
            })
            .collect();

        Ok(Self { case, domain: *domain, modes, couplings, damping, forcing, mu, index })
    }

    /// Convenience for the built-in profiles.
    pub fn from_profiles(case: Case, domain: &Domain, mu: f64, damping: Damping, forcing: Forcing) -> Result<Self> {
        build_mode_system(case, domain, mu, |x| damping.eval(x), |k| forcing.eval(k))
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn index_of(&self, k: WaveVector) -> Option<usize> {
        self.index.get(&k).copied()
    }

    /// The same system with `k` removed from the mode list.
    pub fn without_mode(&self, k: WaveVector) -> Result<Self> {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.modes[i] != k).collect();
        let modes = keep.iter().map(|&i| self.modes[i]).collect();
        let damping: HashMap<WaveVector, f64> = self.modes.iter().copied().zip(self.damping.iter().copied()).collect();
        let forcing: HashMap<WaveVector, f64> = self.modes.iter().copied().zip(self.forcing.iter().copied()).collect();
        let norm_damping: HashMap<i64, f64> = self.modes.iter().map(|k| (k.norm2(), damping[k])).collect();
        Self::with_modes(self.case, &self.domain, modes, self.mu, |x| norm_damping[&x], |k| forcing[&k])
    }

    /// Resonant part of the drift, `-iμ Σ ...`, written into `out`.
    pub fn nonlinear_into(&self, a: &[Complex64], out: &mut [Complex64]) {
        let coef = Complex64::new(0.0, -self.mu);
        for (m, terms) in self.couplings.iter().enumerate() {
            let mut acc = Complex64::default();
            match self.case {
                Case::A => {}
                Case::B => {
                    for c in terms {
                        acc += a[c.i] * a[c.j];
                    }
                }
                Case::C => {
                    for c in terms {
                        acc += a[c.j].conj() * a[c.i];
                    }
                }
            }
            out[m] = coef * acc;
        }
    }

    /// Full deterministic drift `-f a + nonlinear`.
    pub fn drift_into(&self, a: &[Complex64], out: &mut [Complex64]) {
        self.nonlinear_into(a, out);
        for ((o, &am), &fm) in out.iter_mut().zip(a).zip(&self.damping) {
            *o -= fm * am;
        }
    }
}

/// Amplitudes in the interaction representation at slow time `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
    pub tau: f64,
}

impl StateVector {
    pub fn zeros(n: usize) -> Self {
        Self { amplitudes: vec![Complex64::default(); n], tau: 0.0 }
    }

    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes, tau: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(|z| z.is_finite())
    }
}

pub fn drift(sys: &ModeSystem, state: &StateVector) -> Result<Vec<Complex64>> {
    check_len(sys, state)?;
    let mut out = vec![Complex64::default(); sys.len()];
    sys.drift_into(&state.amplitudes, &mut out);
    Ok(out)
}

fn check_len(sys: &ModeSystem, state: &StateVector) -> Result<()> {
    if state.amplitudes.len() != sys.len() {
        return Err(Error::StateLength { expected: sys.len(), got: state.amplitudes.len() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// `a <- a + h·drift + b·√h·ξ`.
    EulerMaruyama,
    /// Exact damping/noise flow after an explicit nonlinear substep.
    #[default]
    SplitExact,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::EulerMaruyama => "euler-maruyama",
            Scheme::SplitExact => "split-exact",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "euler-maruyama" | "eulermaruyama" | "em" => Ok(Scheme::EulerMaruyama),
            "split-exact" | "splitexact" | "split" => Ok(Scheme::SplitExact),
            _ => Err(Error::InvalidConfig(format!("unknown scheme `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Slow-time step `h`.
    pub step: f64,
    /// Slow-time horizon `T`; must be an integer multiple of `step`.
    pub horizon: f64,
    pub seed: u64,
    pub ensemble: usize,
    pub scheme: Scheme,
    /// Number of recorded intervals between 0 and `T`.
    pub checkpoints: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { step: 1e-3, horizon: 1.0, seed: 0, ensemble: 256, scheme: Scheme::SplitExact, checkpoints: 10 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.step.is_finite() && self.step > 0.0) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.step > self.horizon {
            return bad(format!("step {} exceeds horizon {}", self.step, self.horizon));
        }
        if self.ensemble == 0 {
            return bad("ensemble must be at least 1".into());
        }
        if self.checkpoints == 0 {
            return bad("checkpoints must be at least 1".into());
        }
        let n = (self.horizon / self.step).round();
        if (n * self.step - self.horizon).abs() > 1e-9 * self.horizon {
            return bad(format!("horizon {} is not an integer multiple of step {}", self.horizon, self.step));
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        (self.horizon / self.step).round() as u64
    }

    /// Step indices at which the state is recorded, starting at 0 and ending at `steps()`.
    pub fn checkpoint_steps(&self) -> Vec<u64> {
        checkpoint_steps(self.steps(), self.checkpoints)
    }
}

pub(crate) fn checkpoint_steps(steps: u64, checkpoints: usize) -> Vec<u64> {
    let c = (checkpoints as u64).min(steps.max(1));
    let mut out: Vec<u64> = (0..=c).map(|j| ((j as u128 * steps as u128 + c as u128 / 2) / c as u128) as u64).collect();
    out.dedup();
    out
}

/// A path left the finite range; the quadratic systems may blow up.
#[derive(Debug, Clone, Copy, PartialEq, Error, Serialize, Deserialize)]
#[error("path {path} became non-finite at step {step} (tau = {tau}) in mode {mode}")]
pub struct PathAbort {
    pub path: u64,
    pub step: u64,
    pub tau: f64,
    pub mode: WaveVector,
}

/// Precomputed one-step map for a fixed `h` and scheme.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    sys: &'a ModeSystem,
    h: f64,
    scheme: Scheme,
    decay: Vec<f64>,
    spread: Vec<f64>,
    buf: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    pub fn new(sys: &'a ModeSystem, h: f64, scheme: Scheme) -> Self {
        let (decay, spread) = match scheme {
            Scheme::EulerMaruyama => (vec![1.0; sys.len()], sys.forcing.iter().map(|b| b * h.sqrt()).collect()),
            Scheme::SplitExact => sys
                .damping
                .iter()
                .zip(&sys.forcing)
                .map(|(&f, &b)| {
                    let sd = if f > 0.0 { (-(-2.0 * f * h).exp_m1() / (2.0 * f)).sqrt() } else { h.sqrt() };
                    ((-f * h).exp(), b * sd)
                })
                .unzip(),
        };
        Self { sys, h, scheme, decay, spread, buf: vec![Complex64::default(); sys.len()] }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Advances `a` by one step using standard complex normals `xi`.
    pub fn advance(&mut self, a: &mut [Complex64], xi: &[Complex64]) {
        let h = self.h;
        match self.scheme {
            Scheme::EulerMaruyama => {
                self.sys.drift_into(a, &mut self.buf);
                for m in 0..a.len() {
                    a[m] += h * self.buf[m] + self.spread[m] * xi[m];
                }
            }
            Scheme::SplitExact => {
                self.sys.nonlinear_into(a, &mut self.buf);
                for m in 0..a.len() {
                    a[m] = (a[m] + h * self.buf[m]) * self.decay[m] + self.spread[m] * xi[m];
                }
            }
        }
    }
}

/// One step of `config.scheme`, drawing the next increments from `noise`.
pub fn step(sys: &ModeSystem, state: &StateVector, config: &SimConfig, noise: &mut PathNoise) -> Result<StateVector> {
    check_len(sys, state)?;
    let mut xi = vec![Complex64::default(); sys.len()];
    noise.next_step(&mut xi);
    let mut next = state.clone();
    Stepper::new(sys, config.step, config.scheme).advance(&mut next.amplitudes, &xi);
    next.tau += config.step;
    if let Some(m) = next.amplitudes.iter().position(|z| !z.is_finite()) {
        let step = (next.tau / config.step).round() as u64;
        return Err(PathAbort { path: 0, step, tau: next.tau, mode: sys.modes[m] }.into());
    }
    Ok(next)
}

/// States of one path at each checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub path: u64,
    pub states: Vec<StateVector>,
}

/// Integrates path `path` over `[0, T]`; increments are keyed by `(seed, path)`.
pub fn simulate_path(
    sys: &ModeSystem,
    config: &SimConfig,
    initial: &StateVector,
    path: u64,
) -> std::result::Result<PathRecord, PathAbort> {
    let mut stepper = Stepper::new(sys, config.step, config.scheme);
    let mut noise = PathNoise::new(config.seed, path, sys.len());
    let mut xi = vec![Complex64::default(); sys.len()];
    let mut a = initial.amplitudes.clone();
    let record_at = config.checkpoint_steps();
    let mut states = Vec::with_capacity(record_at.len());
    let mut next_record = 0;
    for n in 0..=config.steps() {
        if record_at.get(next_record) == Some(&n) {
            states.push(StateVector { amplitudes: a.clone(), tau: initial.tau + n as f64 * config.step });
            next_record += 1;
        }
        if n == config.steps() {
            break;
        }
        noise.next_step(&mut xi);
        stepper.advance(&mut a, &xi);
        if let Some(m) = a.iter().position(|z| !z.is_finite()) {
            return Err(PathAbort {
                path,
                step: n + 1,
                tau: initial.tau + (n + 1) as f64 * config.step,
                mode: sys.modes[m],
            });
        }
    }
    Ok(PathRecord { path, states })
}

/// Running sums of `a`, `|a|²`, `|a|⁴` per checkpoint and mode.
#[derive(Debug, Clone)]
pub(crate) struct Moments {
    pub count: usize,
    pub sum: Vec<Vec<Complex64>>,
    pub sum2: Vec<Vec<f64>>,
    pub sum4: Vec<Vec<f64>>,
}

impl Moments {
    pub fn new(rows: usize, modes: usize) -> Self {
        Self {
            count: 0,
            sum: vec![vec![Complex64::default(); modes]; rows],
            sum2: vec![vec![0.0; modes]; rows],
            sum4: vec![vec![0.0; modes]; rows],
        }
    }

    pub fn push(&mut self, states: &[StateVector]) {
        self.count += 1;
        for (r, s) in states.iter().enumerate() {
            for (m, z) in s.amplitudes.iter().enumerate() {
                let n2 = z.norm_sqr();
                self.sum[r][m] += z;
                self.sum2[r][m] += n2;
                self.sum4[r][m] += n2 * n2;
            }
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        for r in 0..self.sum.len() {
            for m in 0..self.sum[r].len() {
                self.sum[r][m] += other.sum[r][m];
                self.sum2[r][m] += other.sum2[r][m];
                self.sum4[r][m] += other.sum4[r][m];
            }
        }
    }
}

/// Ensemble moments over the completed paths.
///
/// `var_abs2` is the population variance (divisor = number of paths), so a
/// single deterministic path reports 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub modes: Vec<WaveVector>,
    pub taus: Vec<f64>,
    pub mean: Vec<Vec<Complex64>>,
    pub mean_abs2: Vec<Vec<f64>>,
    pub var_abs2: Vec<Vec<f64>>,
    pub paths: usize,
    pub aborted: Vec<PathAbort>,
}

impl EnsembleStats {
    /// `E|a_k|²` at the final checkpoint.
    pub fn spectrum(&self) -> &[f64] {
        self.mean_abs2.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// True when some paths aborted and the statistics cover only the rest.
    pub fn is_partial(&self) -> bool {
        !self.aborted.is_empty()
    }

    fn from_moments(modes: Vec<WaveVector>, taus: Vec<f64>, mo: &Moments, aborted: Vec<PathAbort>) -> Self {
        let n = mo.count as f64;
        let mean = mo.sum.iter().map(|row| row.iter().map(|s| s / n).collect()).collect();
        let mean_abs2: Vec<Vec<f64>> = mo.sum2.iter().map(|row| row.iter().map(|s| s / n).collect()).collect();
        let var_abs2 = mo
            .sum4
            .iter()
            .zip(&mean_abs2)
            .map(|(row4, row2)| row4.iter().zip(row2).map(|(s4, m2)| (s4 / n - m2 * m2).max(0.0)).collect())
            .collect();
        Self { modes, taus, mean, mean_abs2, var_abs2, paths: mo.count, aborted }
    }
}

/// Runs `config.ensemble` independent paths and reduces their moments.
///
/// Paths are grouped into fixed chunks that run in parallel; chunk sums are
/// combined in index order, so results are bit-identical for any thread count.
/// Aborted paths are listed and excluded.
pub fn simulate_ensemble(sys: &ModeSystem, config: &SimConfig, initial: &StateVector) -> Result<EnsembleStats> {
    config.validate()?;
    check_len(sys, initial)?;
    let record_at = config.checkpoint_steps();
    let rows = record_at.len();
    let n_chunks = config.ensemble.div_ceil(CHUNK);
    let chunks: Vec<(Moments, Vec<PathAbort>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut mo = Moments::new(rows, sys.len());
            let mut aborted = Vec::new();
            for p in c * CHUNK..((c + 1) * CHUNK).min(config.ensemble) {
                match simulate_path(sys, config, initial, p as u64) {
                    Ok(rec) => mo.push(&rec.states),
                    Err(e) => aborted.push(e),
                }
            }
            (mo, aborted)
        })
        .collect();
    let mut total = Moments::new(rows, sys.len());
    let mut aborted = Vec::new();
    for (mo, ab) in &chunks {
        total.merge(mo);
        aborted.extend_from_slice(ab);
    }
    if total.count == 0 {
        return Err(aborted[0].into());
    }
    let taus = record_at.iter().map(|&n| initial.tau + n as f64 * config.step).collect();
    Ok(EnsembleStats::from_moments(sys.modes.clone(), taus, &total, aborted))
}
