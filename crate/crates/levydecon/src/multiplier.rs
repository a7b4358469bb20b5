//! Multiplier functions of the scaled-kernel integral operator.
//!
//! Under the multiplicative-group transform the operator
//! `(G w)(x) = ∫ g(s) w(h(s) x) ds` becomes multiplication by
//!
//! ```text
//! m₊(x) = ∫ g(s) |h(s)|^{-(c+1)/2} e^{i x log|h(s)|} ds,
//! m₋(x) = ∫ g(s) |h(s)|^{-(c+1)/2} e^{i x log|h(s)|} sgn h(s) ds,
//! μ(y)  = m₊(log|y|) for y > 0,  m₋(log|y|) for y < 0.
//! ```
//!
//! For a moving-average kernel `f` with multiplicative weight `u` this is
//! the `g = u(f)/|f|`, `h = 1/f` instance, i.e.
//! `m_{f,±}(x) = ∫ u(f(s)) |f(s)|^{(c-1)/2} e^{-ix log|f(s)|} (sgn f(s))^± ds`.
//! Zeros of `m±` decide injectivity of `G`, a uniform lower bound decides
//! surjectivity, and `γ/(1+|x|^α₁)`-type lower bounds give convergence rates
//! for the regularized inverse. The catalog closed forms are derived in
//! `docs/derivations.md`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::levy_model::KernelSpec;
use crate::logfourier::WeightExponent;

#[derive(Debug, Error)]
pub enum MultiplierError {
    #[error("no closed-form multiplier for this kernel")]
    UnsupportedKernel,
    #[error("integrability violated: {0}")]
    IntegrabilityViolation(String),
    #[error("lower bound is degenerate (gamma = {gamma:.3e})")]
    DegenerateBound { gamma: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Multiplicative weight `u(x) = |x|^β` (`signed = false`) or
/// `u(x) = sgn(x)·|x|^β` (`signed = true`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplicativeWeight {
    pub beta: f64,
    pub signed: bool,
}

impl MultiplicativeWeight {
    pub fn eval(&self, x: f64) -> f64 {
        let base = x.abs().powf(self.beta);
        if self.signed && x < 0.0 {
            -base
        } else {
            base
        }
    }
}

/// The exponent `q = β + (c-1)/2` every catalog formula runs on.
fn catalog_exponent(u: MultiplicativeWeight, c: WeightExponent) -> f64 {
    u.beta + (c.0 - 1.0) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone)]
enum MultiplierForm {
    /// `(1 - e^{-θ(q-ix)}) / (q-ix)`.
    ExpTrunc { theta: f64, q: f64 },
    /// `2 / (θ(q-ix))`.
    Exp { theta: f64, q: f64 },
    /// `2 / (θ(q-ix) - 1)`.
    Power { theta: f64, q: f64 },
    /// `π τ^{q-ix} κ^{2(q+1-ix)} / (q+1-ix)`.
    Epanechnikov { tau: f64, kappa: f64, q: f64 },
    /// `Σ_j a_j e^{-ix b_j}` with `a_j = u(f_j)|f_j|^{(c-1)/2} ν_j`,
    /// `b_j = log|f_j|`; the minus branch carries `sgn f_j`.
    Simple { terms: Vec<SimpleTerm> },
    /// Values tabulated on `x_grid`, linearly interpolated (clamped outside).
    Sampled { x_grid: Vec<f64>, plus: Vec<Complex64>, minus: Vec<Complex64> },
}

#[derive(Debug, Clone, Copy)]
struct SimpleTerm {
    amplitude: f64,
    log_abs: f64,
    sign: f64,
}

/// The pair `m±` with its provenance and the absolute-integrability constant
/// `C = ∫ |g| |h|^{-(c+1)/2} ds` that bounds `sup |m±|`.
#[derive(Debug, Clone)]
pub struct MultiplierFunction {
    form: MultiplierForm,
    provenance: Provenance,
    bound_constant: f64,
}

impl MultiplierFunction {
    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// The integrability constant `C`; `sup |m±| ≤ C`.
    pub fn bound_constant(&self) -> f64 {
        self.bound_constant
    }

    pub fn eval_plus(&self, x: f64) -> Complex64 {
        self.eval(x, false)
    }

    pub fn eval_minus(&self, x: f64) -> Complex64 {
        self.eval(x, true)
    }

    fn eval(&self, x: f64, minus: bool) -> Complex64 {
        match &self.form {
            MultiplierForm::ExpTrunc { theta, q } => {
                let z = Complex64::new(*q, -x);
                if z.norm() < 1e-8 {
                    // (1 - e^{-θz})/z -> θ(1 - θz/2 + θ²z²/6)
                    let tz = z * *theta;
                    (Complex64::new(1.0, 0.0) - tz / 2.0 + tz * tz / 6.0) * *theta
                } else {
                    (Complex64::new(1.0, 0.0) - (-z * *theta).exp()) / z
                }
            }
            MultiplierForm::Exp { theta, q } => {
                Complex64::new(2.0 / theta, 0.0) / Complex64::new(*q, -x)
            }
            MultiplierForm::Power { theta, q } => {
                Complex64::new(2.0, 0.0) / (Complex64::new(*q, -x) * *theta - 1.0)
            }
            MultiplierForm::Epanechnikov { tau, kappa, q } => {
                let z = Complex64::new(q + 1.0, -x);
                let power =
                    (Complex64::new(*q, -x) * tau.ln() + z * (2.0 * kappa.ln())).exp();
                power / z * std::f64::consts::PI
            }
            MultiplierForm::Simple { terms } => terms
                .iter()
                .map(|t| {
                    let s = if minus { t.sign } else { 1.0 };
                    Complex64::new(0.0, -x * t.log_abs).exp() * (t.amplitude * s)
                })
                .sum(),
            MultiplierForm::Sampled { x_grid, plus, minus: minus_vals } => {
                let vals = if minus { minus_vals } else { plus };
                interpolate_clamped(x_grid, vals, x)
            }
        }
    }

    /// `lim |m±(x)|` as `|x| → ∞` when the closed form pins it down.
    pub fn tail_limit(&self) -> Option<f64> {
        match self.form {
            MultiplierForm::ExpTrunc { .. }
            | MultiplierForm::Exp { .. }
            | MultiplierForm::Power { .. }
            | MultiplierForm::Epanechnikov { .. } => Some(0.0),
            _ => None,
        }
    }

    /// Analytic `γ` with `|m±(x)| ≥ γ/(1+|x|^α₁)` for `α₁ = 1`, where the
    /// catalog provides one.
    pub fn analytic_lower_bound(&self, alpha1: f64) -> Option<f64> {
        if (alpha1 - 1.0).abs() > 1e-12 {
            return None;
        }
        match self.form {
            MultiplierForm::Exp { theta, q } if q > 0.0 => {
                Some(2.0 / theta * (1.0 + q * q).powf(-0.5))
            }
            MultiplierForm::Power { theta, q } if q > 1.0 / theta => {
                let shifted = q - 1.0 / theta;
                Some(2.0 / theta * (1.0 + shifted * shifted).powf(-0.5))
            }
            MultiplierForm::Epanechnikov { tau, kappa, q } if q + 1.0 > 0.0 => Some(
                std::f64::consts::PI
                    * kappa.powf(2.0 * q + 2.0)
                    * tau.powf(q)
                    * (1.0 + (1.0 + q) * (1.0 + q)).powf(-0.5),
            ),
            _ => None,
        }
    }

    /// Derivative bound `sup |m±'|` where computable, for probe-resolution
    /// arguments.
    fn derivative_bound(&self) -> Option<f64> {
        match &self.form {
            MultiplierForm::Simple { terms } => {
                Some(terms.iter().map(|t| t.amplitude.abs() * t.log_abs.abs()).sum())
            }
            MultiplierForm::Sampled { x_grid, plus, minus } => {
                let mut worst = 0.0f64;
                for vals in [plus, minus] {
                    for i in 1..vals.len() {
                        let dx = x_grid[i] - x_grid[i - 1];
                        if dx > 0.0 {
                            worst = worst.max((vals[i] - vals[i - 1]).norm() / dx);
                        }
                    }
                }
                Some(worst)
            }
            _ => None,
        }
    }
}

fn interpolate_clamped(grid: &[f64], vals: &[Complex64], x: f64) -> Complex64 {
    if x <= grid[0] {
        return vals[0];
    }
    if x >= grid[grid.len() - 1] {
        return vals[vals.len() - 1];
    }
    let idx = grid.partition_point(|&g| g <= x).min(grid.len() - 1);
    let (lo, hi) = (idx - 1, idx);
    let frac = (x - grid[lo]) / (grid[hi] - grid[lo]);
    vals[lo] * (1.0 - frac) + vals[hi] * frac
}

/// Closed-form multiplier for a catalog kernel.
pub fn multiplier_closed_form(
    kernel: &KernelSpec,
    u: MultiplicativeWeight,
    c: WeightExponent,
) -> Result<MultiplierFunction, MultiplierError> {
    let q = catalog_exponent(u, c);
    let (form, bound) = match kernel {
        KernelSpec::ExpTrunc1d { theta } => {
            let bound = if q.abs() < 1e-14 { *theta } else { (1.0 - (-theta * q).exp()) / q };
            (MultiplierForm::ExpTrunc { theta: *theta, q }, bound)
        }
        KernelSpec::Exp1d { theta } => {
            if q <= 0.0 {
                return Err(MultiplierError::IntegrabilityViolation(format!(
                    "exp1d needs beta + (c-1)/2 > 0, got {q}"
                )));
            }
            (MultiplierForm::Exp { theta: *theta, q }, 2.0 / (theta * q))
        }
        KernelSpec::Power1d { theta } => {
            if q <= 1.0 / theta {
                return Err(MultiplierError::IntegrabilityViolation(format!(
                    "power1d needs beta + (c-1)/2 > 1/theta, got {q}"
                )));
            }
            (MultiplierForm::Power { theta: *theta, q }, 2.0 / (theta * q - 1.0))
        }
        KernelSpec::Epanechnikov2d { tau, kappa } => {
            if q + 1.0 <= 0.0 {
                return Err(MultiplierError::IntegrabilityViolation(format!(
                    "epanechnikov2d needs beta + (c-1)/2 > -1, got {q}"
                )));
            }
            let bound =
                std::f64::consts::PI * tau.powf(q) * kappa.powf(2.0 * q + 2.0) / (q + 1.0);
            (MultiplierForm::Epanechnikov { tau: *tau, kappa: *kappa, q }, bound)
        }
        KernelSpec::Simple { steps } => {
            let terms: Vec<SimpleTerm> = steps
                .iter()
                .map(|s| SimpleTerm {
                    amplitude: u.eval(s.value) * s.value.abs().powf((c.0 - 1.0) / 2.0) * s.measure,
                    log_abs: s.value.abs().ln(),
                    sign: s.value.signum(),
                })
                .collect();
            let bound = terms.iter().map(|t| t.amplitude.abs()).sum();
            (MultiplierForm::Simple { terms }, bound)
        }
        KernelSpec::Sampled { .. } => return Err(MultiplierError::UnsupportedKernel),
    };
    Ok(MultiplierFunction { form, provenance: Provenance::ClosedForm, bound_constant: bound })
}

/// Multiplier by quadrature from `(g, h)` samples with quadrature weights:
/// `m₊(x) = Σ g_i |h_i|^{-(c+1)/2} e^{i x log|h_i|} w_i`, the minus branch
/// carrying `sgn h_i`.
///
/// The integrability constant is re-estimated on every other sample; if the
/// full set grows it by more than 10% the quadrature has not converged.
pub fn multiplier_quadrature_gh(
    g: &[f64],
    h: &[f64],
    weights: &[f64],
    c: WeightExponent,
    x_grid: &[f64],
) -> Result<MultiplierFunction, MultiplierError> {
    if g.len() != h.len() || g.len() != weights.len() || g.is_empty() {
        return Err(MultiplierError::InvalidInput(
            "g, h, weights must be nonempty and of equal length".into(),
        ));
    }
    if x_grid.len() < 2 || x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MultiplierError::InvalidInput("x_grid must be ascending".into()));
    }
    let amp_exponent = -(c.0 + 1.0) / 2.0;
    let term = |i: usize| -> Option<(f64, f64, f64)> {
        if h[i] == 0.0 || g[i] == 0.0 {
            return None;
        }
        let amplitude = g[i] * h[i].abs().powf(amp_exponent) * weights[i];
        Some((amplitude, h[i].abs().ln(), h[i].signum()))
    };
    let mut bound_full = 0.0;
    let mut half_sum = 0.0;
    let mut weight_full = 0.0;
    let mut weight_half = 0.0;
    for i in 0..g.len() {
        weight_full += weights[i].abs();
        if i % 2 == 0 {
            weight_half += weights[i].abs();
        }
        if let Some((a, _, _)) = term(i) {
            bound_full += a.abs();
            if i % 2 == 0 {
                half_sum += a.abs();
            }
        }
    }
    if !bound_full.is_finite() {
        return Err(MultiplierError::IntegrabilityViolation(
            "absolute integral is not finite".into(),
        ));
    }
    // Refinement check: the weight-renormalized every-other-sample estimate
    // of C must already be within 10% of the full one, else the absolute
    // integral is still growing under refinement. Needs enough samples for
    // the subsample to be representative.
    if g.len() >= 32 && weight_half > 0.0 {
        let bound_coarse = half_sum * weight_full / weight_half;
        if bound_full > 1.1 * bound_coarse + 1e-12 {
            return Err(MultiplierError::IntegrabilityViolation(format!(
                "doubling the samples grew the absolute integral from {bound_coarse:.6e} to {bound_full:.6e}"
            )));
        }
    }
    let mut plus = vec![Complex64::default(); x_grid.len()];
    let mut minus = vec![Complex64::default(); x_grid.len()];
    for i in 0..g.len() {
        let Some((amplitude, log_abs, sign)) = term(i) else { continue };
        for (k, &x) in x_grid.iter().enumerate() {
            let phase = Complex64::new(0.0, x * log_abs).exp() * amplitude;
            plus[k] += phase;
            minus[k] += phase * sign;
        }
    }
    Ok(MultiplierFunction {
        form: MultiplierForm::Sampled { x_grid: x_grid.to_vec(), plus, minus },
        provenance: Provenance::Quadrature,
        bound_constant: bound_full,
    })
}

/// Quadrature multiplier from kernel samples `(f(s_i), w_i)`: the
/// `g = u(f)/|f|`, `h = 1/f` instance of [`multiplier_quadrature_gh`].
pub fn multiplier_quadrature(
    f_values: &[f64],
    weights: &[f64],
    u: MultiplicativeWeight,
    c: WeightExponent,
    x_grid: &[f64],
) -> Result<MultiplierFunction, MultiplierError> {
    if f_values.len() != weights.len() {
        return Err(MultiplierError::InvalidInput("values/weights length mismatch".into()));
    }
    let g: Vec<f64> =
        f_values.iter().map(|&f| if f == 0.0 { 0.0 } else { u.eval(f) / f.abs() }).collect();
    let h: Vec<f64> = f_values.iter().map(|&f| if f == 0.0 { 0.0 } else { 1.0 / f }).collect();
    multiplier_quadrature_gh(&g, &h, weights, c, x_grid)
}

/// Default probe: 2^17 uniform points on [-200, 200], covering the frequency
/// content of the default log grid.
pub fn default_probe_grid() -> Vec<f64> {
    let n = 1 << 17;
    (0..n).map(|i| -200.0 + 400.0 * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct InjectivityReport {
    /// True when any near-zeros are isolated points (no run of two or more
    /// consecutive probes below 1e-10). Decided from samples, hence a
    /// heuristic.
    pub ae_nonvanishing: bool,
    pub min_abs: f64,
    /// Probe locations consistent with a zero of `m±` within one cell.
    pub zero_locations: Vec<f64>,
    pub method: &'static str,
}

/// Scan `|m±|` on the probe grid for zeros (injectivity of the operator).
pub fn check_injectivity(m: &MultiplierFunction, probe: &[f64]) -> InjectivityReport {
    const RUN_TOL: f64 = 1e-10;
    let mut min_abs = f64::INFINITY;
    let mut ae_nonvanishing = true;
    let mut zero_locations: Vec<f64> = Vec::new();
    for minus in [false, true] {
        let vals: Vec<f64> = probe.iter().map(|&x| m.eval(x, minus).norm()).collect();
        for &v in &vals {
            min_abs = min_abs.min(v);
        }
        // A run of two consecutive sub-threshold probes means an interval of
        // zeros, not an isolated root.
        if vals.windows(2).any(|w| w[0] < RUN_TOL && w[1] < RUN_TOL) {
            ae_nonvanishing = false;
        }
        // Local minima whose value is explainable by a root inside the cell:
        // the value sits below 3/4 of one probe-step of local slope.
        for i in 1..vals.len() - 1 {
            if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] {
                let slope = (vals[i + 1] - vals[i]).abs().max((vals[i] - vals[i - 1]).abs());
                if (vals[i] <= 0.75 * slope || vals[i] < RUN_TOL)
                    && !zero_locations.iter().any(|z| (z - probe[i]).abs() < 1e-12)
                {
                    zero_locations.push(probe[i]);
                }
            }
        }
    }
    zero_locations.sort_by(|a, b| a.partial_cmp(b).unwrap());
    InjectivityReport { ae_nonvanishing, min_abs, zero_locations, method: "heuristic" }
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformBoundReport {
    pub bounded_below: bool,
    pub inf_abs: f64,
    /// `lim |m±|` at infinity for decaying closed forms.
    pub tail_limit: Option<f64>,
}

/// Decide whether `inf |m±| > 0` (surjectivity of the operator).
///
/// Decaying closed forms answer analytically. Oscillatory forms compare the
/// probe minimum against what a root between probes could hide:
/// `10 × sup|m'| × spacing`.
pub fn check_uniform_bound(m: &MultiplierFunction, probe: &[f64]) -> UniformBoundReport {
    let mut inf_abs = f64::INFINITY;
    for minus in [false, true] {
        for &x in probe {
            inf_abs = inf_abs.min(m.eval(x, minus).norm());
        }
    }
    let tail_limit = m.tail_limit();
    let bounded_below = match tail_limit {
        Some(limit) => limit > 0.0,
        None => {
            let spacing = probe.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
            match m.derivative_bound() {
                Some(s) => inf_abs > 10.0 * s * spacing + 1e-12,
                None => inf_abs > 1e-8 * m.bound_constant(),
            }
        }
    };
    UniformBoundReport { bounded_below, inf_abs, tail_limit }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimpleConditionReport {
    pub holds: bool,
    pub lhs: f64,
}

/// Sufficient condition for unique solvability with a simple kernel:
/// `Σ_{j≥2} (|f_j|/|f_1|)^{β+(c-1)/2} ν_j/ν_1 < 1`, with step 1 the pivot.
pub fn check_simple_condition(
    values: &[f64],
    measures: &[f64],
    u: MultiplicativeWeight,
    c: WeightExponent,
) -> Result<SimpleConditionReport, MultiplierError> {
    if values.is_empty() || values.len() != measures.len() {
        return Err(MultiplierError::InvalidInput(
            "values and measures must be nonempty and of equal length".into(),
        ));
    }
    for (i, &v) in values.iter().enumerate() {
        if v == 0.0 || !v.is_finite() {
            return Err(MultiplierError::InvalidInput(format!("value {i} must be nonzero finite")));
        }
        if values[..i].contains(&v) {
            return Err(MultiplierError::InvalidInput("values must be pairwise distinct".into()));
        }
        if !(measures[i] > 0.0) || !measures[i].is_finite() {
            return Err(MultiplierError::InvalidInput(format!(
                "measure {i} must be positive finite"
            )));
        }
    }
    let q = catalog_exponent(u, c);
    let lhs: f64 = values
        .iter()
        .zip(measures)
        .skip(1)
        .map(|(&f, &nu)| (f.abs() / values[0].abs()).powf(q) * nu / measures[0])
        .sum();
    Ok(SimpleConditionReport { holds: lhs < 1.0, lhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    Analytic,
    Fitted,
}

/// Certificate `|m±(x)| ≥ γ/(1 + |x|^α₁)` on the probed range.
#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundCertificate {
    pub gamma: f64,
    pub alpha1: f64,
    pub kind: BoundKind,
    /// The catalog's analytic `γ` when one exists; always a valid lower
    /// bound, hence never above the fitted value.
    pub analytic_gamma: Option<f64>,
}

/// Fit `γ = min |m±(x)|·(1+|x|^α₁)` over the probe.
pub fn fit_lower_bound(
    m: &MultiplierFunction,
    alpha1: f64,
    probe: &[f64],
) -> Result<LowerBoundCertificate, MultiplierError> {
    if alpha1 < 0.0 {
        return Err(MultiplierError::InvalidInput("alpha1 must be nonnegative".into()));
    }
    let mut gamma = f64::INFINITY;
    for minus in [false, true] {
        for &x in probe {
            gamma = gamma.min(m.eval(x, minus).norm() * (1.0 + x.abs().powf(alpha1)));
        }
    }
    if !(gamma > 1e-14) {
        return Err(MultiplierError::DegenerateBound { gamma });
    }
    Ok(LowerBoundCertificate {
        gamma,
        alpha1,
        kind: BoundKind::Fitted,
        analytic_gamma: m.analytic_lower_bound(alpha1),
    })
}
