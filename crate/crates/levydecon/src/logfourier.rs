//! Fourier analysis on the multiplicative group `ℝ× = ℝ∖{0}`.
//!
//! Functions live on a symmetric exponential grid: per sign branch the nodes
//! are `x = ±exp(t_k)` with `t_k` uniform in `[t_min, t_max]`. In these
//! log-coordinates the Haar measure `dx/|x|` becomes `dt`, so the group
//! transform splits into two ordinary Fourier integrals per branch,
//!
//! ```text
//! û±(ξ) = ∫ u(±e^t) e^{-iξt} dt,
//! (F× u)(+e^ξ) = û₊(ξ) + û₋(ξ),
//! (F× u)(-e^ξ) = û₊(ξ) - û₋(ξ),
//! ```
//!
//! the ± sign realizing the character of the two-element factor of the dual
//! group. The integrals are evaluated *exactly at the grid's own
//! log-coordinates* through a Bluestein chirp factorization (three FFTs), so
//! a single grid carries every stage of a pipeline and no spectral
//! interpolation is ever needed. `(1/2√π)·F×` is unitary for the Haar norm,
//! and the inverse is `F×⁻¹φ = (1/4π)·F×ψ` with `ψ(x) = φ(1/x)`, which on a
//! symmetric grid is an exact index reversal per branch.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogFourierError {
    #[error("invalid log grid: {0}")]
    InvalidGrid(String),
    #[error("branch length {got} does not match grid size {expected}")]
    BranchLength { expected: usize, got: usize },
    #[error("non-finite value at branch node {index}")]
    NonFinite { index: usize },
    #[error(
        "boundary leakage: edge magnitude is {edge_ratio:.3e} of the maximum (tolerance {tol:.3e}); the transform would alias"
    )]
    BoundaryLeakage { edge_ratio: f64, tol: f64 },
    #[error("argument inversion needs a symmetric grid (t_min = -t_max), got [{t_min}, {t_max}]")]
    AsymmetricGrid { t_min: f64, t_max: f64 },
    #[error("grids do not match")]
    GridMismatch,
}

/// Symmetric exponential grid on `ℝ×`: nodes `x = ±exp(t_k)`,
/// `t_k = t_min + k·h`, `h = (t_max − t_min)/(n_points − 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrid {
    t_min: f64,
    t_max: f64,
    n_points: usize,
}

impl LogGrid {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self, LogFourierError> {
        if !t_min.is_finite() || !t_max.is_finite() {
            return Err(LogFourierError::InvalidGrid("bounds must be finite".into()));
        }
        if t_min >= t_max {
            return Err(LogFourierError::InvalidGrid(format!(
                "t_min {t_min} must be below t_max {t_max}"
            )));
        }
        if n_points < 2 {
            return Err(LogFourierError::InvalidGrid("need at least two points per branch".into()));
        }
        Ok(Self { t_min, t_max, n_points })
    }

    /// The grid used by every study: `t ∈ [-12, 12]`, 4096 points per branch.
    pub fn default_grid() -> Self {
        Self { t_min: -12.0, t_max: 12.0, n_points: 4096 }
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Log-coordinate spacing `h`.
    pub fn spacing(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_points - 1) as f64
    }

    /// Log-coordinate of node `k`.
    pub fn coord(&self, k: usize) -> f64 {
        self.t_min + self.spacing() * k as f64
    }

    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|k| self.coord(k))
    }

    /// Whether the node set is invariant under `x ↦ 1/x` (needed by the
    /// inverse transform's argument inversion).
    pub fn is_symmetric(&self) -> bool {
        (self.t_min + self.t_max).abs() <= 1e-12 * (self.t_max - self.t_min)
    }

    fn key(&self) -> (usize, u64, u64) {
        (self.n_points, self.t_min.to_bits(), self.t_max.to_bits())
    }
}

/// Complex-valued function sampled on a [`LogGrid`], one array per sign
/// branch: `pos[k] = u(+e^{t_k})`, `neg[k] = u(-e^{t_k})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGridFunction {
    grid: LogGrid,
    pos: Vec<Complex64>,
    neg: Vec<Complex64>,
}

impl SignedGridFunction {
    pub fn zeros(grid: LogGrid) -> Self {
        let n = grid.n_points();
        Self { grid, pos: vec![Complex64::default(); n], neg: vec![Complex64::default(); n] }
    }

    pub fn from_branches(
        grid: LogGrid,
        pos: Vec<Complex64>,
        neg: Vec<Complex64>,
    ) -> Result<Self, LogFourierError> {
        for branch in [&pos, &neg] {
            if branch.len() != grid.n_points() {
                return Err(LogFourierError::BranchLength {
                    expected: grid.n_points(),
                    got: branch.len(),
                });
            }
            if let Some(index) = branch.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(LogFourierError::NonFinite { index });
            }
        }
        Ok(Self { grid, pos, neg })
    }

    /// Sample a function of the signed node value `x = ±e^{t_k}`.
    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: LogGrid, f: F) -> Self {
        let pos = grid.coords().map(|t| f(t.exp())).collect();
        let neg = grid.coords().map(|t| f(-t.exp())).collect();
        Self { grid, pos, neg }
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(grid: LogGrid, f: F) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    pub fn pos(&self) -> &[Complex64] {
        &self.pos
    }

    pub fn neg(&self) -> &[Complex64] {
        &self.neg
    }

    pub fn pos_mut(&mut self) -> &mut [Complex64] {
        &mut self.pos
    }

    pub fn neg_mut(&mut self) -> &mut [Complex64] {
        &mut self.neg
    }

    pub fn max_abs(&self) -> f64 {
        self.pos.iter().chain(self.neg.iter()).map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest edge magnitude relative to the overall maximum; the leakage
    /// diagnostic the transforms check before aliasing can occur.
    pub fn edge_ratio(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let n = self.grid.n_points();
        let edge = [self.pos[0], self.pos[n - 1], self.neg[0], self.neg[n - 1]]
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        edge / max
    }

    /// Drop the imaginary part, returning the largest magnitude discarded.
    pub fn into_real(mut self) -> (Self, f64) {
        let mut residue = 0.0f64;
        for v in self.pos.iter_mut().chain(self.neg.iter_mut()) {
            residue = residue.max(v.im.abs());
            v.im = 0.0;
        }
        (self, residue)
    }

    pub fn scale(&mut self, factor: Complex64) {
        for v in self.pos.iter_mut().chain(self.neg.iter_mut()) {
            *v *= factor;
        }
    }
}

/// Weight exponent `c` of the space `L²(ℝ×, |x|^c dx)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WeightExponent(pub f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightDirection {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeakagePolicy {
    /// Fail with [`LogFourierError::BoundaryLeakage`].
    Strict,
    /// Compute anyway and report the flag.
    Warn,
}

#[derive(Debug, Clone, Copy)]
pub struct TransformOptions {
    pub leakage_tol: f64,
    pub policy: LeakagePolicy,
}

impl Default for TransformOptions {
    fn default() -> Self {
        Self { leakage_tol: 1e-6, policy: LeakagePolicy::Strict }
    }
}

impl TransformOptions {
    pub fn lenient() -> Self {
        Self { leakage_tol: 1e-6, policy: LeakagePolicy::Warn }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LeakageReport {
    pub edge_ratio: f64,
    pub flagged: bool,
}

/// Discretized Haar norm of `L²(ℝ×, dx/|x|)`: trapezoid rule over both
/// branches in log-coordinates.
pub fn haar_norm(u: &SignedGridFunction) -> f64 {
    let h = u.grid().spacing();
    let n = u.grid().n_points();
    let mut acc = 0.0;
    for branch in [u.pos(), u.neg()] {
        for (k, v) in branch.iter().enumerate() {
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            acc += w * v.norm_sqr();
        }
    }
    (acc * h).sqrt()
}

/// Discretized norm of `L²(ℝ×, |x|^c dx)`: per-node weight `e^{t(c+1)}·h`.
pub fn weighted_l2_norm(u: &SignedGridFunction, c: WeightExponent) -> f64 {
    let h = u.grid().spacing();
    let n = u.grid().n_points();
    let mut acc = 0.0;
    for branch in [u.pos(), u.neg()] {
        for (k, v) in branch.iter().enumerate() {
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            acc += w * v.norm_sqr() * (u.grid().coord(k) * (c.0 + 1.0)).exp();
        }
    }
    (acc * h).sqrt()
}

/// Forward transform `F×` (strict boundary check).
pub fn mult_fourier(u: &SignedGridFunction) -> Result<SignedGridFunction, LogFourierError> {
    mult_fourier_with(u, &TransformOptions::default()).map(|(f, _)| f)
}

/// Forward transform with an explicit leakage policy.
pub fn mult_fourier_with(
    u: &SignedGridFunction,
    opts: &TransformOptions,
) -> Result<(SignedGridFunction, LeakageReport), LogFourierError> {
    let leakage = check_leakage(u, opts)?;
    let plan = plan_for(u.grid());
    let up = plan.dtft(u.pos(), u.grid());
    let um = plan.dtft(u.neg(), u.grid());
    let n = u.grid().n_points();
    let mut pos = Vec::with_capacity(n);
    let mut neg = Vec::with_capacity(n);
    for k in 0..n {
        pos.push(up[k] + um[k]);
        neg.push(up[k] - um[k]);
    }
    Ok((SignedGridFunction { grid: *u.grid(), pos, neg }, leakage))
}

/// Inverse transform `F×⁻¹φ = (1/4π)·F×ψ`, `ψ(x) = φ(1/x)` (strict).
pub fn mult_fourier_inv(phi: &SignedGridFunction) -> Result<SignedGridFunction, LogFourierError> {
    mult_fourier_inv_with(phi, &TransformOptions::default()).map(|(f, _)| f)
}

pub fn mult_fourier_inv_with(
    phi: &SignedGridFunction,
    opts: &TransformOptions,
) -> Result<(SignedGridFunction, LeakageReport), LogFourierError> {
    let grid = *phi.grid();
    if !grid.is_symmetric() {
        return Err(LogFourierError::AsymmetricGrid { t_min: grid.t_min(), t_max: grid.t_max() });
    }
    // Argument inversion x -> 1/x is the exact index reversal t_k -> -t_k.
    let mut pos = phi.pos().to_vec();
    let mut neg = phi.neg().to_vec();
    pos.reverse();
    neg.reverse();
    let psi = SignedGridFunction { grid, pos, neg };
    let (mut out, leakage) = mult_fourier_with(&psi, opts)?;
    out.scale(Complex64::new(0.25 / std::f64::consts::PI, 0.0));
    Ok((out, leakage))
}

/// The isometry `(M u)(x) = |x|^{(c+1)/2} u(x)` between `L²(|x|^c dx)` and
/// the Haar space, or its inverse.
pub fn weight_map(
    w: &SignedGridFunction,
    c: WeightExponent,
    direction: WeightDirection,
) -> SignedGridFunction {
    let grid = *w.grid();
    let exponent = 0.5 * (c.0 + 1.0);
    let factor: Vec<f64> = grid
        .coords()
        .map(|t| match direction {
            WeightDirection::Forward => (exponent * t).exp(),
            WeightDirection::Inverse => (-exponent * t).exp(),
        })
        .collect();
    let apply = |branch: &[Complex64]| -> Vec<Complex64> {
        branch.iter().zip(&factor).map(|(v, f)| v * f).collect()
    };
    SignedGridFunction { grid, pos: apply(w.pos()), neg: apply(w.neg()) }
}

/// Norm of `x ↦ (1 + |log|x||^α)·(F×u)(x)` in the Haar space — finite iff
/// the branch restrictions of `u` in log-coordinates lie in `H^α(ℝ)`.
pub fn sobolev_weight_norm(u: &SignedGridFunction, alpha: f64) -> Result<f64, LogFourierError> {
    sobolev_weight_norm_with(u, alpha, &TransformOptions::default()).map(|(v, _)| v)
}

pub fn sobolev_weight_norm_with(
    u: &SignedGridFunction,
    alpha: f64,
    opts: &TransformOptions,
) -> Result<(f64, LeakageReport), LogFourierError> {
    let (mut transformed, leakage) = mult_fourier_with(u, opts)?;
    let weights: Vec<f64> =
        transformed.grid().coords().map(|t| 1.0 + t.abs().powf(alpha)).collect();
    for (v, w) in transformed.pos_mut().iter_mut().zip(&weights) {
        *v *= w;
    }
    for (v, w) in transformed.neg_mut().iter_mut().zip(&weights) {
        *v *= w;
    }
    Ok((haar_norm(&transformed), leakage))
}

fn check_leakage(
    u: &SignedGridFunction,
    opts: &TransformOptions,
) -> Result<LeakageReport, LogFourierError> {
    let edge_ratio = u.edge_ratio();
    let flagged = edge_ratio > opts.leakage_tol;
    if flagged && opts.policy == LeakagePolicy::Strict {
        return Err(LogFourierError::BoundaryLeakage { edge_ratio, tol: opts.leakage_tol });
    }
    Ok(LeakageReport { edge_ratio, flagged })
}

/// Bluestein chirp plan: evaluates `û(ξ_k) = Σ_j c_j u_j e^{-i ξ_k t_j}` with
/// trapezoid weights `c_j` at the grid's own log-coordinates `ξ_k = t_k`.
///
/// Writing `ξ_k t_j = a² + ah(k+j) + h²kj` with `a = t_min` and
/// `kj = (k² + j² - (k-j)²)/2`, the sum becomes a linear convolution of the
/// chirped input against the fixed chirp `e^{i h² m²/2}`.
struct ChirpPlan {
    conv_len: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    input_chirp: Vec<Complex64>,
    kernel_hat: Vec<Complex64>,
    prefix: Vec<Complex64>,
}

impl ChirpPlan {
    fn new(grid: &LogGrid) -> Self {
        let n = grid.n_points();
        let a = grid.t_min();
        let h = grid.spacing();
        let conv_len = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(conv_len);
        let ifft = planner.plan_fft_inverse(conv_len);

        let input_chirp: Vec<Complex64> = (0..n)
            .map(|j| {
                let jf = j as f64;
                Complex64::new(0.0, -(a * h * jf + 0.5 * h * h * jf * jf)).exp()
            })
            .collect();
        let prefix: Vec<Complex64> = (0..n)
            .map(|k| {
                let kf = k as f64;
                Complex64::new(0.0, -(a * a + a * h * kf + 0.5 * h * h * kf * kf)).exp()
            })
            .collect();

        let mut kernel = vec![Complex64::default(); conv_len];
        for m in -(n as i64 - 1)..=(n as i64 - 1) {
            let mf = m as f64;
            let idx = m.rem_euclid(conv_len as i64) as usize;
            kernel[idx] = Complex64::new(0.0, 0.5 * h * h * mf * mf).exp();
        }
        fft.process(&mut kernel);

        Self { conv_len, fft, ifft, input_chirp, kernel_hat: kernel, prefix }
    }

    fn dtft(&self, branch: &[Complex64], grid: &LogGrid) -> Vec<Complex64> {
        let n = grid.n_points();
        let h = grid.spacing();
        let mut buf = vec![Complex64::default(); self.conv_len];
        for j in 0..n {
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            buf[j] = branch[j] * self.input_chirp[j] * (w * h);
        }
        self.fft.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.ifft.process(&mut buf);
        let scale = 1.0 / self.conv_len as f64;
        (0..n).map(|k| buf[k] * self.prefix[k] * scale).collect()
    }
}

fn plan_for(grid: &LogGrid) -> Arc<ChirpPlan> {
    static PLANS: OnceLock<Mutex<HashMap<(usize, u64, u64), Arc<ChirpPlan>>>> = OnceLock::new();
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = plans.lock().expect("chirp plan cache poisoned");
    map.entry(grid.key()).or_insert_with(|| Arc::new(ChirpPlan::new(grid))).clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn log_gaussian(grid: LogGrid, width: f64, center: f64) -> SignedGridFunction {
        SignedGridFunction::from_fn(grid, |x| {
            if x > 0.0 {
                let t = x.ln();
                Complex64::new((-(t - center).powi(2) / (2.0 * width * width)).exp(), 0.0)
            } else {
                Complex64::default()
            }
        })
    }

    /// Brute-force evaluation of the group transform straight from its
    /// integral representation (independent of the chirp machinery).
    fn naive_transform(u: &SignedGridFunction) -> SignedGridFunction {
        let grid = *u.grid();
        let n = grid.n_points();
        let h = grid.spacing();
        let mut pos = vec![Complex64::default(); n];
        let mut neg = vec![Complex64::default(); n];
        for k in 0..n {
            let xi = grid.coord(k);
            let mut up = Complex64::default();
            let mut um = Complex64::default();
            for j in 0..n {
                let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                let t = grid.coord(j);
                let kernel = Complex64::new(0.0, -xi * t).exp() * (w * h);
                up += u.pos()[j] * kernel;
                um += u.neg()[j] * kernel;
            }
            pos[k] = up + um;
            neg[k] = up - um;
        }
        SignedGridFunction::from_branches(grid, pos, neg).unwrap()
    }

    #[test]
    fn chirp_matches_naive_dtft() {
        let grid = LogGrid::new(-6.0, 6.0, 257).unwrap();
        let u = SignedGridFunction::from_fn(grid, |x| {
            let t = x.abs().ln();
            let base = (-t * t / 2.0).exp();
            if x > 0.0 {
                Complex64::new(base, 0.3 * base)
            } else {
                Complex64::new(0.5 * base, -0.2 * base * t.sin())
            }
        });
        let fast = mult_fourier(&u).unwrap();
        let slow = naive_transform(&u);
        let mut worst = 0.0f64;
        for (a, b) in fast.pos().iter().zip(slow.pos()).chain(fast.neg().iter().zip(slow.neg())) {
            worst = worst.max((a - b).norm());
        }
        assert!(worst < 1e-10, "chirp vs naive deviation {worst}");
    }

    #[test]
    fn haar_norm_examples() {
        let grid = LogGrid::default_grid();
        assert_eq!(haar_norm(&SignedGridFunction::zeros(grid)), 0.0);

        // Indicator of t in [0,1] on the positive branch: integral of 1 dt.
        let indicator = SignedGridFunction::from_fn(grid, |x| {
            if x > 0.0 && x.ln() >= 0.0 && x.ln() <= 1.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        });
        assert!((haar_norm(&indicator) - 1.0).abs() < 2e-3);

        // exp(-(log x)^2) on x>0: integral of exp(-2t^2) dt = sqrt(pi/2).
        let u = SignedGridFunction::from_fn(grid, |x| {
            if x > 0.0 {
                Complex64::new((-(x.ln().powi(2))).exp(), 0.0)
            } else {
                Complex64::default()
            }
        });
        // Oracle: dense Riemann sum of exp(-2t^2), squared norm.
        let steps = 2_000_000;
        let (a, b) = (-12.0, 12.0);
        let h = (b - a) / steps as f64;
        let oracle: f64 = (0..steps)
            .map(|i| {
                let t: f64 = a + (i as f64 + 0.5) * h;
                (-2.0 * t * t).exp() * h
            })
            .sum::<f64>()
            .sqrt();
        assert!((haar_norm(&u) - oracle).abs() < 1e-6);
        assert!((oracle - (PI / 2.0).sqrt().sqrt()).abs() < 1e-9);
    }

    #[test]
    fn transform_of_zero_is_zero() {
        let grid = LogGrid::default_grid();
        let z = SignedGridFunction::zeros(grid);
        let f = mult_fourier(&z).unwrap();
        assert_eq!(f.max_abs(), 0.0);
        let finv = mult_fourier_inv(&z).unwrap();
        assert_eq!(finv.max_abs(), 0.0);
    }

    #[test]
    fn symmetric_input_vanishes_on_negative_branch() {
        let grid = LogGrid::default_grid();
        let base = log_gaussian(grid, 1.0, 0.5);
        let u = SignedGridFunction::from_branches(grid, base.pos().to_vec(), base.pos().to_vec())
            .unwrap();
        let f = mult_fourier(&u).unwrap();
        let worst = f.neg().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-12 * f.max_abs());
    }

    #[test]
    fn positive_branch_input_has_equal_branches() {
        let grid = LogGrid::default_grid();
        let u = log_gaussian(grid, 0.8, -1.0);
        let f = mult_fourier(&u).unwrap();
        assert_eq!(f.pos(), f.neg());
    }

    #[test]
    fn gaussian_pair_is_reproduced() {
        // u(x)=exp(-(log x)^2/2) on x>0 transforms to sqrt(2pi) e^{-xi^2/2}
        // on both branches.
        let grid = LogGrid::default_grid();
        let u = log_gaussian(grid, 1.0, 0.0);
        let f = mult_fourier(&u).unwrap();
        let mut worst = 0.0f64;
        for (k, t) in grid.coords().enumerate() {
            let expected = (2.0 * PI).sqrt() * (-t * t / 2.0).exp();
            worst = worst.max((f.pos()[k] - Complex64::new(expected, 0.0)).norm());
            worst = worst.max((f.neg()[k] - Complex64::new(expected, 0.0)).norm());
        }
        assert!(worst < 1e-6, "gaussian pair deviation {worst}");
    }

    #[test]
    fn inverse_undoes_forward() {
        let grid = LogGrid::default_grid();
        for (width, center) in [(1.0, 0.0), (0.8, 2.0), (1.5, -1.0)] {
            let u = log_gaussian(grid, width, center);
            let f = mult_fourier(&u).unwrap();
            let back = mult_fourier_inv(&f).unwrap();
            let mut diff = SignedGridFunction::zeros(grid);
            for k in 0..grid.n_points() {
                diff.pos_mut()[k] = back.pos()[k] - u.pos()[k];
                diff.neg_mut()[k] = back.neg()[k] - u.neg()[k];
            }
            let rel = haar_norm(&diff) / haar_norm(&u);
            assert!(rel < 1e-6, "roundtrip rel error {rel} for width={width} center={center}");
        }
    }

    #[test]
    fn roundtrip_matches_quadrature_oracle() {
        // F^{-1} of the known Gaussian transform recovers the log-Gaussian.
        let grid = LogGrid::default_grid();
        let phi = SignedGridFunction::from_fn(grid, |x| {
            let xi = x.abs().ln();
            Complex64::new((2.0 * PI).sqrt() * (-xi * xi / 2.0).exp(), 0.0)
        });
        let back = mult_fourier_inv(&phi).unwrap();
        let expected = log_gaussian(grid, 1.0, 0.0);
        let mut diff = SignedGridFunction::zeros(grid);
        for k in 0..grid.n_points() {
            diff.pos_mut()[k] = back.pos()[k] - expected.pos()[k];
            diff.neg_mut()[k] = back.neg()[k] - expected.neg()[k];
        }
        assert!(haar_norm(&diff) / haar_norm(&expected) < 1e-6);
    }

    #[test]
    fn unitarity_constant() {
        let grid = LogGrid::default_grid();
        for (width, center) in [(1.0, 0.0), (0.7, 1.5), (1.3, -2.0)] {
            let u = log_gaussian(grid, width, center);
            let ratio = haar_norm(&mult_fourier(&u).unwrap()) / haar_norm(&u);
            let expected = 2.0 * PI.sqrt();
            assert!(
                (ratio / expected - 1.0).abs() < 1e-6,
                "unitarity ratio {ratio} expected {expected}"
            );
        }
    }

    #[test]
    fn weight_map_examples() {
        let grid = LogGrid::default_grid();
        let u = log_gaussian(grid, 1.0, 0.0);

        // c = -1 is the identity.
        let id = weight_map(&u, WeightExponent(-1.0), WeightDirection::Forward);
        assert_eq!(id.pos(), u.pos());

        // c = 0 at the node x = e^2 multiplies by e.
        let ones = SignedGridFunction::from_fn(grid, |_| Complex64::new(1.0, 0.0));
        let mapped = weight_map(&ones, WeightExponent(0.0), WeightDirection::Forward);
        let k = grid.coords().position(|t| (t - 2.0).abs() < grid.spacing() / 2.0).unwrap();
        let expected = (grid.coord(k) * 0.5).exp();
        assert!((mapped.pos()[k].re - expected).abs() < 1e-12);
        assert!((expected - std::f64::consts::E).abs() < 0.01);

        // Forward then inverse restores the input to machine precision.
        let fwd = weight_map(&u, WeightExponent(0.7), WeightDirection::Forward);
        let back = weight_map(&fwd, WeightExponent(0.7), WeightDirection::Inverse);
        let mut worst = 0.0f64;
        for (a, b) in back.pos().iter().zip(u.pos()) {
            worst = worst.max((a - b).norm());
        }
        assert!(worst < 1e-12);
    }

    #[test]
    fn weight_map_is_isometric() {
        let grid = LogGrid::default_grid();
        let u = log_gaussian(grid, 1.0, 0.4);
        for c in [-1.0, 0.0, 1.0, 2.5] {
            let mapped = weight_map(&u, WeightExponent(c), WeightDirection::Forward);
            let lhs = haar_norm(&mapped);
            let rhs = weighted_l2_norm(&u, WeightExponent(c));
            assert!((lhs - rhs).abs() < 1e-10 * rhs.max(1.0), "c={c} lhs={lhs} rhs={rhs}");
        }
    }

    #[test]
    fn sobolev_weight_alpha_zero_is_twice_haar_norm() {
        let grid = LogGrid::default_grid();
        let u = log_gaussian(grid, 1.0, 0.0);
        let norm = sobolev_weight_norm(&u, 0.0).unwrap();
        let f = mult_fourier(&u).unwrap();
        // Weight (1 + |log|x||^0) = 2 everywhere, 0^0 = 1 included.
        assert!((norm - 2.0 * haar_norm(&f)).abs() < 1e-12 * norm);
    }

    #[test]
    fn sobolev_weight_matches_quadrature_oracle() {
        let grid = LogGrid::default_grid();
        let u = log_gaussian(grid, 1.0, 0.0);
        let norm = sobolev_weight_norm(&u, 1.0).unwrap();
        // Oracle: both branches carry sqrt(2pi) e^{-xi^2/2}; dense Riemann sum
        // of 2 * (1+|xi|)^2 * 2pi e^{-xi^2} over xi.
        let steps = 2_000_000;
        let (a, b) = (-12.0, 12.0);
        let h = (b - a) / steps as f64;
        let oracle: f64 = (0..steps)
            .map(|i| {
                let xi: f64 = a + (i as f64 + 0.5) * h;
                2.0 * (1.0 + xi.abs()).powi(2) * 2.0 * PI * (-xi * xi).exp() * h
            })
            .sum::<f64>()
            .sqrt();
        assert!((norm / oracle - 1.0).abs() < 1e-4, "norm={norm} oracle={oracle}");
    }

    #[test]
    fn sobolev_weight_diverges_for_slow_decay() {
        // Triangle in log-coordinates: transform decays like 1/xi^2, so the
        // alpha=2 weighted norm grows without bound as the grid widens.
        let tri = |grid: LogGrid| {
            SignedGridFunction::from_fn(grid, |x| {
                if x > 0.0 {
                    let t = x.ln();
                    Complex64::new((1.0 - t.abs()).max(0.0), 0.0)
                } else {
                    Complex64::default()
                }
            })
        };
        let narrow = sobolev_weight_norm(&tri(LogGrid::new(-12.0, 12.0, 4096).unwrap()), 2.0).unwrap();
        let mid = sobolev_weight_norm(&tri(LogGrid::new(-24.0, 24.0, 8192).unwrap()), 2.0).unwrap();
        let wide = sobolev_weight_norm(&tri(LogGrid::new(-48.0, 48.0, 16384).unwrap()), 2.0).unwrap();
        assert!(mid > 1.25 * narrow, "mid={mid} narrow={narrow}");
        assert!(wide > 1.25 * mid, "wide={wide} mid={mid}");
        // alpha=1 stays put: the weighted integrand decays like 1/xi^2.
        let narrow1 = sobolev_weight_norm(&tri(LogGrid::new(-12.0, 12.0, 4096).unwrap()), 1.0).unwrap();
        let wide1 = sobolev_weight_norm(&tri(LogGrid::new(-48.0, 48.0, 16384).unwrap()), 1.0).unwrap();
        assert!((wide1 / narrow1 - 1.0).abs() < 0.08, "narrow1={narrow1} wide1={wide1}");
    }

    #[test]
    fn boundary_leakage_is_flagged() {
        let grid = LogGrid::default_grid();
        // Constant on the positive branch: no decay at either edge.
        let u = SignedGridFunction::from_fn(grid, |x| {
            if x > 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        });
        match mult_fourier(&u) {
            Err(LogFourierError::BoundaryLeakage { edge_ratio, .. }) => {
                assert!(edge_ratio > 0.9);
            }
            other => panic!("expected BoundaryLeakage, got {other:?}"),
        }
        let (_, report) = mult_fourier_with(&u, &TransformOptions::lenient()).unwrap();
        assert!(report.flagged);
    }

    #[test]
    fn asymmetric_grid_rejected_by_inverse() {
        let grid = LogGrid::new(-3.0, 5.0, 64).unwrap();
        let u = SignedGridFunction::zeros(grid);
        assert!(matches!(
            mult_fourier_inv(&u),
            Err(LogFourierError::AsymmetricGrid { .. })
        ));
    }
}
