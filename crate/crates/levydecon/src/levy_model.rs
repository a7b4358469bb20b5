//! The probabilistic model layer: moving-average kernel catalog, Lévy
//! density catalog, the forward map from integrator triplet to field
//! triplet, characteristic exponents, and the special functions the catalog
//! needs.
//!
//! The driving measure has characteristic `(a0, b0, v0)`; the field
//! `X(t) = ∫ f(t-x) Λ(dx)` has `(a1, b1, v1)` with
//!
//! ```text
//! a1 = ∫ U(f(s)) ds,   b1 = b0 ∫ f²,   v1(x) = ∫ |f(s)|⁻¹ v0(x/f(s)) ds,
//! U(u) = u (a0 + ∫ x [1_{[-1,1]}(ux) - 1_{[-1,1]}(x)] v0(x) dx).
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logfourier::{LogGrid, SignedGridFunction};
use crate::quad::{adaptive_simpson, adaptive_simpson_c, integrate_decaying_tail};

pub mod special {
    //! Error-function family and the truncated incomplete gamma integral.

    pub use libm::{erf, erfc, tgamma};

    /// `Γ(a, y, z) = ∫_y^z t^{a-1} e^{-t} dt` for `a > 0`, `0 ≤ y ≤ z`.
    ///
    /// Computed on the substituted axis `t = s²` where the integrand is
    /// `2 s^{2a-1} e^{-s²}` — smooth at the origin for every `a ≥ 1/2` and
    /// only mildly singular below, which adaptive bisection absorbs.
    /// Relative accuracy is 1e-10 or better.
    pub fn incomplete_gamma(a: f64, y: f64, z: f64) -> Result<f64, super::LevyModelError> {
        if !(a > 0.0) || !(y >= 0.0) || !(z >= y) || !a.is_finite() || !y.is_finite() {
            return Err(super::LevyModelError::DomainError {
                what: format!("incomplete_gamma requires a > 0, 0 <= y <= z; got a={a}, y={y}, z={z}"),
            });
        }
        if z == y {
            return Ok(0.0);
        }
        let s_lo = y.sqrt();
        // e^{-s^2} underflows past s ~ 38.6; clamping the upper limit there
        // changes nothing representable.
        let s_hi = z.sqrt().min(s_lo.max(1.0) + 40.0);
        if s_hi <= s_lo {
            return Ok(0.0);
        }
        let two_a_minus_one = 2.0 * a - 1.0;
        let integrand = move |s: f64| {
            if s <= 0.0 {
                // Endpoint limit; an integrable edge value for a < 1/2 never
                // enters the Simpson nodes with positive weight anyway.
                if two_a_minus_one > 0.0 {
                    0.0
                } else if two_a_minus_one.abs() < 1e-15 {
                    2.0
                } else {
                    0.0
                }
            } else {
                2.0 * s.powf(two_a_minus_one) * (-s * s).exp()
            }
        };
        Ok(crate::quad::adaptive_simpson(&integrand, s_lo, s_hi, 1e-12, 1e-300))
    }
}

#[derive(Debug, Error)]
pub enum LevyModelError {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid Lévy density: {0}")]
    InvalidDensity(String),
    #[error("invalid triplet: {0}")]
    InvalidTriplet(String),
    #[error("domain error: {what}")]
    DomainError { what: String },
    #[error("quadrature did not converge under refinement: {0}")]
    QuadratureDivergence(String),
}

/// One step of a simple (piecewise-constant) kernel: value `f_j` on a set of
/// Lebesgue measure `ν_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpleStep {
    pub value: f64,
    pub measure: f64,
}

/// Moving-average kernel `f` from the closed catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `f(s) = e^{-s}` on `[0, θ]`, one-dimensional.
    ExpTrunc1d { theta: f64 },
    /// `f(s) = e^{-θ|s|}` on the whole line.
    Exp1d { theta: f64 },
    /// `f(s) = (1 + |s|)^{-θ}` on the whole line.
    Power1d { theta: f64 },
    /// `f(s) = τ(κ² - ‖s‖²)` on the disk `‖s‖ < κ`, two-dimensional.
    Epanechnikov2d { tau: f64, kappa: f64 },
    /// Piecewise-constant kernel given by its (value, measure) steps.
    Simple { steps: Vec<SimpleStep> },
    /// Pre-quadratured samples `(f(s_i), w_i)` of an arbitrary kernel; the
    /// weights are the caller's quadrature rule over the kernel support.
    Sampled { dimension: u8, values: Vec<f64>, weights: Vec<f64> },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<(), LevyModelError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(LevyModelError::InvalidKernel(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            Self::ExpTrunc1d { theta } | Self::Exp1d { theta } | Self::Power1d { theta } => {
                positive("theta", *theta)
            }
            Self::Epanechnikov2d { tau, kappa } => {
                positive("tau", *tau)?;
                positive("kappa", *kappa)
            }
            Self::Simple { steps } => {
                if steps.is_empty() {
                    return Err(LevyModelError::InvalidKernel("simple kernel needs steps".into()));
                }
                for (i, s) in steps.iter().enumerate() {
                    if s.value == 0.0 || !s.value.is_finite() {
                        return Err(LevyModelError::InvalidKernel(format!(
                            "step {i} value must be nonzero finite"
                        )));
                    }
                    positive("measure", s.measure)?;
                    if steps[..i].iter().any(|p| p.value == s.value) {
                        return Err(LevyModelError::InvalidKernel(format!(
                            "step values must be pairwise distinct, {} repeats",
                            s.value
                        )));
                    }
                }
                Ok(())
            }
            Self::Sampled { dimension, values, weights } => {
                if !(*dimension == 1 || *dimension == 2) {
                    return Err(LevyModelError::InvalidKernel("dimension must be 1 or 2".into()));
                }
                if values.is_empty() || values.len() != weights.len() {
                    return Err(LevyModelError::InvalidKernel(
                        "sampled kernel needs matching nonempty values/weights".into(),
                    ));
                }
                if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite())
                    || values.iter().any(|v| !v.is_finite())
                {
                    return Err(LevyModelError::InvalidKernel("non-finite sample".into()));
                }
                Ok(())
            }
        }
    }

    pub fn dimension(&self) -> u8 {
        match self {
            Self::Epanechnikov2d { .. } => 2,
            Self::Sampled { dimension, .. } => *dimension,
            _ => 1,
        }
    }

    /// Lebesgue measure of the support, when finite (m-dependence radius).
    pub fn support_measure(&self) -> Option<f64> {
        match self {
            Self::ExpTrunc1d { theta } => Some(*theta),
            Self::Exp1d { .. } | Self::Power1d { .. } => None,
            Self::Epanechnikov2d { kappa, .. } => Some(std::f64::consts::PI * kappa * kappa),
            Self::Simple { steps } => Some(steps.iter().map(|s| s.measure).sum()),
            Self::Sampled { weights, .. } => Some(weights.iter().sum()),
        }
    }

    /// `∫ f(s) ds` over the support.
    pub fn integral(&self) -> f64 {
        match self {
            Self::ExpTrunc1d { theta } => 1.0 - (-theta).exp(),
            Self::Exp1d { theta } => 2.0 / theta,
            Self::Power1d { theta } => {
                if *theta > 1.0 {
                    2.0 / (theta - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            Self::Epanechnikov2d { tau, kappa } => {
                0.5 * std::f64::consts::PI * tau * kappa.powi(4)
            }
            Self::Simple { steps } => steps.iter().map(|s| s.value * s.measure).sum(),
            Self::Sampled { values, weights, .. } => {
                values.iter().zip(weights).map(|(v, w)| v * w).sum()
            }
        }
    }

    /// `∫ f²(s) ds` over the support.
    pub fn square_integral(&self) -> f64 {
        match self {
            Self::ExpTrunc1d { theta } => 0.5 * (1.0 - (-2.0 * theta).exp()),
            Self::Exp1d { theta } => 1.0 / theta,
            Self::Power1d { theta } => {
                if *theta > 0.5 {
                    2.0 / (2.0 * theta - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            Self::Epanechnikov2d { tau, kappa } => {
                std::f64::consts::PI * tau * tau * kappa.powi(6) / 3.0
            }
            Self::Simple { steps } => steps.iter().map(|s| s.value * s.value * s.measure).sum(),
            Self::Sampled { values, weights, .. } => {
                values.iter().zip(weights).map(|(v, w)| v * v * w).sum()
            }
        }
    }

    /// Short identifier used in CSV headers and file provenance.
    pub fn id(&self) -> String {
        match self {
            Self::ExpTrunc1d { theta } => format!("exp_trunc1d(theta={theta})"),
            Self::Exp1d { theta } => format!("exp1d(theta={theta})"),
            Self::Power1d { theta } => format!("power1d(theta={theta})"),
            Self::Epanechnikov2d { tau, kappa } => {
                format!("epanechnikov2d(tau={tau},kappa={kappa})")
            }
            Self::Simple { steps } => format!("simple({}steps)", steps.len()),
            Self::Sampled { values, .. } => format!("sampled({}points)", values.len()),
        }
    }

    /// Integrate `g(f(s))` over the support, reducing the 2D disk kernel to
    /// its exact radial form. Used by the forward maps.
    fn integrate_over_support<F: Fn(f64) -> f64>(&self, g: &F) -> Result<f64, LevyModelError> {
        match self {
            Self::ExpTrunc1d { theta } => {
                Ok(adaptive_simpson(&|s: f64| g((-s).exp()), 0.0, *theta, 1e-11, 1e-300))
            }
            Self::Exp1d { theta } => {
                let th = *theta;
                Ok(integrate_decaying_tail(&|s: f64| 2.0 * g((-th * s).exp()), 0.0, 1e-12))
            }
            Self::Power1d { theta } => {
                let th = *theta;
                Ok(integrate_decaying_tail(&|s: f64| 2.0 * g((1.0 + s).powf(-th)), 0.0, 1e-12))
            }
            Self::Epanechnikov2d { tau, kappa } => {
                // Polar substitution w = tau (kappa^2 - rho^2) turns the disk
                // integral into (pi / tau) * integral of g(w) dw on (0, tau kappa^2].
                let w_max = tau * kappa * kappa;
                let v = adaptive_simpson(&|w: f64| g(w), 1e-300, w_max, 1e-11, 1e-300);
                Ok(std::f64::consts::PI / tau * v)
            }
            Self::Simple { steps } => Ok(steps.iter().map(|s| s.measure * g(s.value)).sum()),
            Self::Sampled { values, weights, .. } => {
                Ok(values.iter().zip(weights).map(|(v, w)| w * g(*v)).sum())
            }
        }
    }
}

/// Jump-intensity density of an infinitely divisible law.
#[derive(Debug, Clone)]
pub enum LevyDensity {
    /// `v0(x) = (πx)^{-1/2} e^{-x}` on `(0, ∞)` — the Gamma(1/2, 1) density,
    /// total mass exactly one.
    TemperedHalfGauss,
    /// Field density induced by `TemperedHalfGauss` under the truncated
    /// exponential kernel: `v1(x) = π^{-1/2} x^{-1} Γ(1/2, x, x e^θ)` on
    /// `(0, ∞)`.
    V1ExpTrunc { theta: f64 },
    /// Field density induced by `TemperedHalfGauss` under the 2D parabolic
    /// bump: `v1(x) = (√π/τ) ∫_{x/(τκ²)}^∞ r^{-3/2} e^{-r} dr` on `(0, ∞)`.
    V1Epanechnikov { tau: f64, kappa: f64 },
    /// Arbitrary nonnegative density tabulated on a log grid, linear in the
    /// log-coordinate within each branch, zero beyond the grid.
    Tabulated { fun: SignedGridFunction, provenance: TabulatedProvenance },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TabulatedProvenance {
    Quadrature,
    /// A closed form exists for this kernel/density pair; the table was
    /// still produced by quadrature.
    ClosedFormAvailable,
}

impl LevyDensity {
    pub fn tabulated(
        fun: SignedGridFunction,
        provenance: TabulatedProvenance,
    ) -> Result<Self, LevyModelError> {
        for branch in [fun.pos(), fun.neg()] {
            for v in branch {
                if v.im != 0.0 || !v.re.is_finite() {
                    return Err(LevyModelError::InvalidDensity(
                        "tabulated density must be finite and real".into(),
                    ));
                }
                if v.re < -1e-12 {
                    return Err(LevyModelError::InvalidDensity(format!(
                        "tabulated density must be nonnegative, got {}",
                        v.re
                    )));
                }
            }
        }
        let density = Self::Tabulated { fun, provenance };
        // The min(1,x^2)-moment is a finite sum on a finite grid; evaluate once
        // so a wildly scaled table fails loudly here rather than downstream.
        let moment = density.truncated_second_moment();
        if !moment.is_finite() {
            return Err(LevyModelError::InvalidDensity("min(1,x^2)-moment diverges".into()));
        }
        Ok(density)
    }

    /// `∫ min(1, x²) v(x) dx`.
    pub fn truncated_second_moment(&self) -> f64 {
        match self {
            Self::Tabulated { fun, .. } => {
                let grid = fun.grid();
                let h = grid.spacing();
                let n = grid.n_points();
                let mut acc = 0.0;
                for branch in [fun.pos(), fun.neg()] {
                    for (k, v) in branch.iter().enumerate() {
                        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                        let x = grid.coord(k).exp();
                        // dx = x dt per branch
                        acc += w * h * x * v.re * (x * x).min(1.0);
                    }
                }
                acc
            }
            _ => integrate_decaying_tail(
                &|x: f64| x.min(1.0) * x.min(1.0) * self.eval(x),
                0.0,
                1e-10,
            ),
        }
    }

    /// Density value at `x` (zero off the support).
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::TemperedHalfGauss => {
                if x > 0.0 {
                    (std::f64::consts::PI * x).powf(-0.5) * (-x).exp()
                } else {
                    0.0
                }
            }
            Self::V1ExpTrunc { theta } => {
                if x <= 0.0 {
                    return 0.0;
                }
                // Γ(1/2, y, z) = √π (erf √z − erf √y); below 1e-8 the erf
                // difference reduces to its leading term, continuing the closed
                // form monotonically as (2/√π)(e^{θ/2} − 1) x^{-1/2}.
                if x < 1e-8 {
                    let lead = 2.0 / std::f64::consts::PI.sqrt() * ((theta / 2.0).exp() - 1.0);
                    return lead / x.sqrt();
                }
                let upper = (x * theta.exp()).sqrt();
                (special::erf(upper.min(38.0)) - special::erf(x.sqrt())) / x
            }
            Self::V1Epanechnikov { tau, kappa } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let z = x / (tau * kappa * kappa);
                std::f64::consts::PI.sqrt() / tau * upper_gamma_neg_half(z)
            }
            Self::Tabulated { fun, .. } => {
                if x == 0.0 {
                    return 0.0;
                }
                let grid = fun.grid();
                let t = x.abs().ln();
                if t < grid.t_min() || t > grid.t_max() {
                    return 0.0;
                }
                let pos = (t - grid.t_min()) / grid.spacing();
                let k = (pos.floor() as usize).min(grid.n_points() - 2);
                let frac = pos - k as f64;
                let branch = if x > 0.0 { fun.pos() } else { fun.neg() };
                branch[k].re * (1.0 - frac) + branch[k + 1].re * frac
            }
        }
    }

    /// Total mass `∫ v` — finite for the whole catalog (finite activity).
    pub fn total_mass(&self) -> f64 {
        match self {
            Self::TemperedHalfGauss => 1.0,
            // Mass is preserved per unit of kernel support measure.
            Self::V1ExpTrunc { theta } => *theta,
            Self::V1Epanechnikov { tau: _, kappa } => std::f64::consts::PI * kappa * kappa,
            Self::Tabulated { fun, .. } => {
                let grid = fun.grid();
                let h = grid.spacing();
                let n = grid.n_points();
                let mut acc = 0.0;
                for branch in [fun.pos(), fun.neg()] {
                    for (k, v) in branch.iter().enumerate() {
                        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                        acc += w * h * grid.coord(k).exp() * v.re;
                    }
                }
                acc
            }
        }
    }

    /// `∫ x v(x) dx` when it converges.
    pub fn first_moment(&self) -> f64 {
        match self {
            Self::TemperedHalfGauss => 0.5,
            _ => integrate_decaying_tail(&|x: f64| x * self.eval(x), 0.0, 1e-10),
        }
    }
}

/// `∫_z^∞ r^{-3/2} e^{-r} dr`, the upper tail the 2D catalog density needs.
///
/// Integration by parts gives `2 z^{-1/2} e^{-z} − 2√π erfc(√z)`; past
/// `z = 30` the two terms cancel to their asymptotic series, which is used
/// instead.
fn upper_gamma_neg_half(z: f64) -> f64 {
    if z <= 0.0 {
        return f64::INFINITY;
    }
    if z > 30.0 {
        let inv = 1.0 / z;
        return z.powf(-1.5)
            * (-z).exp()
            * (1.0 - 1.5 * inv + 3.75 * inv * inv - 13.125 * inv * inv * inv);
    }
    2.0 * z.powf(-0.5) * (-z).exp() - 2.0 * std::f64::consts::PI.sqrt() * special::erfc(z.sqrt())
}

/// Lévy characteristic `(a, b, v)`.
#[derive(Debug, Clone)]
pub struct LevyTriplet {
    pub a: f64,
    pub b: f64,
    pub v: LevyDensity,
}

impl LevyTriplet {
    pub fn new(a: f64, b: f64, v: LevyDensity) -> Result<Self, LevyModelError> {
        if !a.is_finite() || !b.is_finite() || b < 0.0 {
            return Err(LevyModelError::InvalidTriplet(format!(
                "need finite a and b >= 0, got a={a}, b={b}"
            )));
        }
        Ok(Self { a, b, v })
    }

    /// Pure-jump triplet with the canonical drift `a = ∫_{-1}^{1} x v(x) dx`,
    /// for which the characteristic exponent carries no leftover compensator.
    pub fn pure_jump(v: LevyDensity) -> Self {
        let a = adaptive_simpson(&|x: f64| x * v.eval(x), 0.0, 1.0, 1e-11, 1e-300)
            + adaptive_simpson(&|x: f64| x * v.eval(x), -1.0, 0.0, 1e-11, 1e-300);
        Self { a, b: 0.0, v }
    }
}

/// Forward map for densities: `v1(x) = ∫ |f(s)|⁻¹ v0(x/f(s)) ds`, tabulated
/// on `x_grid` by quadrature over the kernel support. Catalog pairs that
/// admit closed forms are tagged as such.
pub fn v1_from_v0(
    v0: &LevyDensity,
    kernel: &KernelSpec,
    x_grid: LogGrid,
) -> Result<LevyDensity, LevyModelError> {
    kernel.validate()?;
    if let KernelSpec::Simple { steps } = kernel {
        // Exact finite sum, no quadrature.
        let fun = SignedGridFunction::from_real_fn(x_grid, |x| {
            steps.iter().map(|s| s.measure / s.value.abs() * v0.eval(x / s.value)).sum()
        });
        return LevyDensity::tabulated(fun, TabulatedProvenance::Quadrature);
    }
    let provenance = match (v0, kernel) {
        (LevyDensity::TemperedHalfGauss, KernelSpec::ExpTrunc1d { .. })
        | (LevyDensity::TemperedHalfGauss, KernelSpec::Epanechnikov2d { .. }) => {
            TabulatedProvenance::ClosedFormAvailable
        }
        _ => TabulatedProvenance::Quadrature,
    };
    let eval_at = |x: f64| -> Result<f64, LevyModelError> {
        let value = kernel.integrate_over_support(&|fv: f64| {
            if fv == 0.0 {
                0.0
            } else {
                v0.eval(x / fv) / fv.abs()
            }
        })?;
        if !value.is_finite() {
            return Err(LevyModelError::QuadratureDivergence(format!(
                "forward density map diverged at x={x}"
            )));
        }
        Ok(value)
    };
    let mut pos = Vec::with_capacity(x_grid.n_points());
    let mut neg = Vec::with_capacity(x_grid.n_points());
    for t in x_grid.coords() {
        pos.push(Complex64::new(eval_at(t.exp())?, 0.0));
    }
    for t in x_grid.coords() {
        neg.push(Complex64::new(eval_at(-t.exp())?, 0.0));
    }
    let fun = SignedGridFunction::from_branches(x_grid, pos, neg)
        .map_err(|e| LevyModelError::InvalidDensity(e.to_string()))?;
    LevyDensity::tabulated(fun, provenance)
}

/// Forward map for triplets: `(a0, b0, v0) ↦ (a1, b1, v1)`.
///
/// Catalog pairs return their closed-form `v1`; everything else tabulates on
/// the default grid.
pub fn triplet_pushforward(
    t0: &LevyTriplet,
    kernel: &KernelSpec,
) -> Result<LevyTriplet, LevyModelError> {
    kernel.validate()?;
    let a0 = t0.a;
    let v0 = &t0.v;
    // U(u) = u(a0 + I(u)); the raw indicator difference collapses to a
    // one-sided moment integral between 1 and 1/|u|.
    let indicator_moment = |u: f64| -> f64 {
        if u == 0.0 || u.abs() == 1.0 {
            return 0.0;
        }
        let r = 1.0 / u.abs();
        let lo = r.min(1.0);
        let hi = r.max(1.0);
        let sign = if u.abs() > 1.0 { -1.0 } else { 1.0 };
        let positive_part = adaptive_simpson(&|x: f64| x * v0.eval(x), lo, hi, 1e-11, 1e-300);
        let negative_part = adaptive_simpson(&|x: f64| x * v0.eval(x), -hi, -lo, 1e-11, 1e-300);
        sign * (positive_part + negative_part)
    };
    let a1 = kernel.integrate_over_support(&|fv: f64| fv * (a0 + indicator_moment(fv)))?;
    if !a1.is_finite() {
        return Err(LevyModelError::QuadratureDivergence("drift pushforward diverged".into()));
    }
    let b1 = t0.b * kernel.square_integral();
    let v1 = match (v0, kernel) {
        (LevyDensity::TemperedHalfGauss, KernelSpec::ExpTrunc1d { theta }) => {
            LevyDensity::V1ExpTrunc { theta: *theta }
        }
        (LevyDensity::TemperedHalfGauss, KernelSpec::Epanechnikov2d { tau, kappa }) => {
            LevyDensity::V1Epanechnikov { tau: *tau, kappa: *kappa }
        }
        (_, KernelSpec::Simple { steps })
            if steps.len() == 1 && steps[0].value == 1.0 && steps[0].measure == 1.0 =>
        {
            v0.clone()
        }
        _ => v1_from_v0(v0, kernel, LogGrid::default_grid())?,
    };
    LevyTriplet::new(a1, b1, v1)
}

/// Characteristic exponent
/// `K(y) = iya − y²b/2 + ∫ (e^{iyx} − 1 − iyx·1_{[-1,1]}(x)) v(x) dx`.
pub fn characteristic_exponent(t: &LevyTriplet, y: f64) -> Result<Complex64, LevyModelError> {
    let drift = Complex64::new(0.0, y * t.a);
    let gauss = Complex64::new(-0.5 * y * y * t.b, 0.0);
    let v = &t.v;
    let integrand = |x: f64| -> Complex64 {
        let density = v.eval(x);
        if density == 0.0 {
            return Complex64::default();
        }
        let osc = Complex64::new(0.0, y * x).exp() - Complex64::new(1.0, 0.0);
        let compensator =
            if x.abs() <= 1.0 { Complex64::new(0.0, y * x) } else { Complex64::default() };
        (osc - compensator) * density
    };
    // Split at the compensator kink; the catalog tails decay exponentially.
    let inner = adaptive_simpson_c(&integrand, 0.0, 1.0, 1e-10, 1e-300)
        + adaptive_simpson_c(&integrand, -1.0, 0.0, 1e-10, 1e-300);
    let tail_upper = tail_limit(v);
    let outer = adaptive_simpson_c(&integrand, 1.0, tail_upper, 1e-10, 1e-300)
        + adaptive_simpson_c(&integrand, -tail_upper, -1.0, 1e-10, 1e-300);
    let value = drift + gauss + inner + outer;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(LevyModelError::QuadratureDivergence(format!(
            "characteristic exponent diverged at y={y}"
        )));
    }
    Ok(value)
}

fn tail_limit(v: &LevyDensity) -> f64 {
    match v {
        LevyDensity::Tabulated { fun, .. } => fun.grid().t_max().exp(),
        // Catalog tails decay like e^{-x} (1D) and e^{-x/(τκ²)} (2D).
        LevyDensity::V1Epanechnikov { tau, kappa } => 60.0 * (tau * kappa * kappa).max(1.0),
        _ => 60.0,
    }
}

pub use special::incomplete_gamma;

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn incomplete_gamma_examples() {
        // Γ(1, 0, z) -> 1 as z grows (plain exponential integral).
        assert!((incomplete_gamma(1.0, 0.0, 60.0).unwrap() - 1.0).abs() < 1e-10);
        // Γ(1/2, 0, z) = √π erf(√z); erf is an independent code path (libm).
        for z in [0.25, 1.0, 4.0, 9.0] {
            let lhs = incomplete_gamma(0.5, 0.0, z).unwrap();
            let rhs = PI.sqrt() * special::erf(z.sqrt());
            assert!((lhs - rhs).abs() < 1e-10 * rhs, "z={z} lhs={lhs} rhs={rhs}");
        }
        // Γ(1/2, 1, e^4): closed form via erf.
        let lhs = incomplete_gamma(0.5, 1.0, 4f64.exp()).unwrap();
        let rhs = PI.sqrt() * (special::erf(2f64.exp()) - special::erf(1.0));
        assert!((lhs - rhs).abs() < 1e-10);
        assert!((lhs - 0.2788055853).abs() < 1e-9, "lhs={lhs}");
        // Domain violations.
        assert!(incomplete_gamma(0.0, 0.0, 1.0).is_err());
        assert!(incomplete_gamma(0.5, -1.0, 1.0).is_err());
        assert!(incomplete_gamma(0.5, 2.0, 1.0).is_err());
    }

    #[test]
    fn half_gauss_density_is_gamma_half() {
        // v0 is exactly the Gamma(1/2, 1) density; checked pointwise against
        // x^{-1/2} e^{-x} / Γ(1/2) and in total mass by dense quadrature.
        let v0 = LevyDensity::TemperedHalfGauss;
        for x in [0.01f64, 0.1, 0.5, 1.0, 3.0, 10.0] {
            let gamma_pdf = x.powf(-0.5) * (-x).exp() / special::tgamma(0.5);
            assert!((v0.eval(x) - gamma_pdf).abs() < 1e-14 * gamma_pdf);
        }
        // Mass oracle on the substituted axis x = s^2, which removes the
        // root singularity: ∫ v0 dx = ∫ 2 s v0(s^2) ds.
        let steps = 2_000_000;
        let hi = 60.0f64.sqrt();
        let h = hi / steps as f64;
        let mass: f64 = (0..steps)
            .map(|i| {
                let s = (i as f64 + 0.5) * h;
                2.0 * s * v0.eval(s * s) * h
            })
            .sum();
        assert!((mass - 1.0).abs() < 1e-10, "mass={mass}");
        assert_eq!(v0.total_mass(), 1.0);
    }

    #[test]
    fn forward_density_identity_for_unit_step() {
        let grid = LogGrid::new(-8.0, 4.0, 513).unwrap();
        let kernel = KernelSpec::Simple { steps: vec![SimpleStep { value: 1.0, measure: 1.0 }] };
        let v1 = v1_from_v0(&LevyDensity::TemperedHalfGauss, &kernel, grid).unwrap();
        // Compare at grid nodes, where the tabulation carries the exact sum.
        for t in grid.coords().step_by(32) {
            let x = t.exp();
            let expected = LevyDensity::TemperedHalfGauss.eval(x);
            assert!((v1.eval(x) - expected).abs() < 1e-12 * expected.max(1e-12), "x={x}");
        }
    }

    #[test]
    fn forward_density_matches_exp_trunc_closed_form() {
        let grid = LogGrid::new(-8.0, 4.0, 257).unwrap();
        let theta = 4.0;
        let v1 = v1_from_v0(
            &LevyDensity::TemperedHalfGauss,
            &KernelSpec::ExpTrunc1d { theta },
            grid,
        )
        .unwrap();
        let closed = LevyDensity::V1ExpTrunc { theta };
        match &v1 {
            LevyDensity::Tabulated { provenance, .. } => {
                assert_eq!(*provenance, TabulatedProvenance::ClosedFormAvailable)
            }
            other => panic!("expected tabulated density, got {other:?}"),
        }
        for t in grid.coords().step_by(16) {
            let x = t.exp();
            if !(1e-3..=20.0).contains(&x) {
                continue;
            }
            let got = v1.eval(x);
            let want = closed.eval(x);
            assert!((got - want).abs() < 1e-6 * want.max(1.0), "x={x} got={got} want={want}");
        }
        // Spot value at x = 1: π^{-1/2} Γ(1/2, 1, e^4) = erf(e^2) - erf(1).
        let want = special::erf(2f64.exp()) - special::erf(1.0);
        assert!((closed.eval(1.0) - want).abs() < 1e-12);
        assert!((closed.eval(1.0) - 0.15730).abs() < 5e-6);
    }

    #[test]
    fn forward_density_matches_epanechnikov_closed_form() {
        let grid = LogGrid::new(-8.0, 4.0, 257).unwrap();
        let (tau, kappa) = (0.5, 1.0);
        let v1 = v1_from_v0(
            &LevyDensity::TemperedHalfGauss,
            &KernelSpec::Epanechnikov2d { tau, kappa },
            grid,
        )
        .unwrap();
        let closed = LevyDensity::V1Epanechnikov { tau, kappa };
        for t in grid.coords().step_by(16) {
            let x = t.exp();
            if !(1e-3..=20.0).contains(&x) {
                continue;
            }
            let got = v1.eval(x);
            let want = closed.eval(x);
            assert!((got - want).abs() < 1e-6 * want.max(1.0), "x={x} got={got} want={want}");
        }
        // Value at x = 1: (√π/τ)∫_2^∞ r^{-3/2} e^{-r} dr via the erfc closed
        // form, independently assembled here.
        let z: f64 = 2.0;
        let tail = 2.0 * z.powf(-0.5) * (-z).exp() - 2.0 * PI.sqrt() * special::erfc(z.sqrt());
        let want = PI.sqrt() / tau * tail;
        assert!((closed.eval(1.0) - want).abs() < 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn forward_map_is_linear() {
        let grid = LogGrid::new(-6.0, 3.0, 129).unwrap();
        let kernel = KernelSpec::ExpTrunc1d { theta: 2.0 };
        let mk = |scale: f64, width: f64| {
            let fun = SignedGridFunction::from_real_fn(grid, |x| {
                if x > 0.0 {
                    scale * (-(x.ln() / width).powi(2)).exp()
                } else {
                    0.0
                }
            });
            LevyDensity::tabulated(fun, TabulatedProvenance::Quadrature).unwrap()
        };
        let u = mk(1.0, 1.0);
        let w = mk(0.5, 0.6);
        let alpha = 0.7;
        let beta = 1.9;
        let combined_fun =
            SignedGridFunction::from_real_fn(grid, |x| alpha * u.eval(x) + beta * w.eval(x));
        let combined =
            LevyDensity::tabulated(combined_fun, TabulatedProvenance::Quadrature).unwrap();
        let v1_u = v1_from_v0(&u, &kernel, grid).unwrap();
        let v1_w = v1_from_v0(&w, &kernel, grid).unwrap();
        let v1_combined = v1_from_v0(&combined, &kernel, grid).unwrap();
        for t in grid.coords().step_by(8) {
            let x = t.exp();
            let lhs = v1_combined.eval(x);
            let rhs = alpha * v1_u.eval(x) + beta * v1_w.eval(x);
            assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0), "x={x} lhs={lhs} rhs={rhs}");
        }
    }

    #[test]
    fn moment_identity_for_exp_trunc() {
        // ∫ x v1 dx = (∫ f)(∫ x v0 dx); Fubini oracle evaluated by dense
        // quadrature of the closed-form v1.
        let theta = 4.0;
        let v1 = LevyDensity::V1ExpTrunc { theta };
        let lhs = integrate_decaying_tail(&|x: f64| x * v1.eval(x), 0.0, 1e-12);
        let rhs = (1.0 - (-theta).exp()) * 0.5;
        assert!((lhs - rhs).abs() < 1e-6, "lhs={lhs} rhs={rhs}");
        assert!((rhs - 0.490842).abs() < 5e-7);
    }

    #[test]
    fn pushforward_scales_gaussian_part() {
        let kernel = KernelSpec::ExpTrunc1d { theta: 4.0 };
        let t0 = LevyTriplet::new(0.3, 0.0, LevyDensity::TemperedHalfGauss).unwrap();
        let t1 = triplet_pushforward(&t0, &kernel).unwrap();
        assert_eq!(t1.b, 0.0);

        let t0 = LevyTriplet::new(0.3, 2.0, LevyDensity::TemperedHalfGauss).unwrap();
        let t1 = triplet_pushforward(&t0, &kernel).unwrap();
        assert!((t1.b - 2.0 * kernel.square_integral()).abs() < 1e-14);
    }

    #[test]
    fn pushforward_identity_for_unit_step() {
        let kernel = KernelSpec::Simple { steps: vec![SimpleStep { value: 1.0, measure: 1.0 }] };
        let t0 = LevyTriplet::new(0.7, 0.25, LevyDensity::TemperedHalfGauss).unwrap();
        let t1 = triplet_pushforward(&t0, &kernel).unwrap();
        assert!((t1.a - 0.7).abs() < 1e-12);
        assert!((t1.b - 0.25).abs() < 1e-14);
        assert!(matches!(t1.v, LevyDensity::TemperedHalfGauss));
    }

    #[test]
    fn pure_jump_field_exponent_matches_plain_cumulant() {
        // For the canonical pure-jump triplet the compensator cancels and
        // K(y) = ∫ (e^{iyx} - 1) v1 dx; oracle by dense Riemann quadrature.
        let theta = 4.0;
        let v1 = LevyDensity::V1ExpTrunc { theta };
        let t1 = LevyTriplet::pure_jump(v1.clone());
        for y in [0.5, 1.0, 2.0] {
            let k = characteristic_exponent(&t1, y).unwrap();
            let steps = 400_000;
            let hi = 50.0f64;
            let h = hi / steps as f64;
            let mut oracle = Complex64::default();
            for i in 0..steps {
                let x = (i as f64 + 0.5) * h;
                let d = v1.eval(x);
                oracle += (Complex64::new(0.0, y * x).exp() - Complex64::new(1.0, 0.0)) * d * h;
            }
            assert!((k - oracle).norm() < 1e-5, "y={y} k={k} oracle={oracle}");
            assert!(k.re <= 1e-12, "Re K must be nonpositive, got {}", k.re);
        }
    }

    #[test]
    fn pushforward_drift_matches_pure_jump_convention() {
        // Pushing the canonical pure-jump integrator forward must land on the
        // canonical pure-jump drift of v1 (cumulant stays compensator-free).
        let theta = 4.0;
        let t0 = LevyTriplet::pure_jump(LevyDensity::TemperedHalfGauss);
        let t1 = triplet_pushforward(&t0, &KernelSpec::ExpTrunc1d { theta }).unwrap();
        let canonical = LevyTriplet::pure_jump(LevyDensity::V1ExpTrunc { theta });
        assert!(
            (t1.a - canonical.a).abs() < 1e-8,
            "pushforward drift {} vs canonical {}",
            t1.a,
            canonical.a
        );
    }

    #[test]
    fn characteristic_exponent_edge_cases() {
        let t = LevyTriplet::pure_jump(LevyDensity::TemperedHalfGauss);
        let k0 = characteristic_exponent(&t, 0.0).unwrap();
        assert!(k0.norm() < 1e-14);

        // Pure Gaussian: K(y) = -b y^2 / 2.
        let zero_density = LevyDensity::tabulated(
            SignedGridFunction::zeros(LogGrid::new(-4.0, 4.0, 33).unwrap()),
            TabulatedProvenance::Quadrature,
        )
        .unwrap();
        let t = LevyTriplet::new(0.0, 3.0, zero_density).unwrap();
        let k = characteristic_exponent(&t, 2.0).unwrap();
        assert!((k - Complex64::new(-6.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn kernel_validation_rejects_bad_specs() {
        assert!(KernelSpec::ExpTrunc1d { theta: -1.0 }.validate().is_err());
        assert!(KernelSpec::Simple { steps: vec![] }.validate().is_err());
        assert!(KernelSpec::Simple {
            steps: vec![
                SimpleStep { value: 1.0, measure: 1.0 },
                SimpleStep { value: 1.0, measure: 2.0 }
            ]
        }
        .validate()
        .is_err());
        assert!(KernelSpec::Simple { steps: vec![SimpleStep { value: 0.0, measure: 1.0 }] }
            .validate()
            .is_err());
    }

    #[test]
    fn tabulated_density_rejects_negatives() {
        let grid = LogGrid::new(-2.0, 2.0, 17).unwrap();
        let fun = SignedGridFunction::from_real_fn(grid, |x| if x > 0.0 { -1.0 } else { 0.0 });
        assert!(LevyDensity::tabulated(fun, TabulatedProvenance::Quadrature).is_err());
    }
}
