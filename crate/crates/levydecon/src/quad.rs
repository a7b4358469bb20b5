//! Adaptive quadrature helpers shared by the model and multiplier layers.

use num_complex::Complex64;

/// Adaptive Simpson integration of a real function on `[a, b]`.
///
/// Classic bisection with Richardson acceptance; `rel_tol` is measured
/// against the running whole-interval estimate, `abs_tol` is a floor for
/// integrals that are genuinely tiny.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    simpson_step(f, a, b, fa, fm, fb, whole, rel_tol, abs_tol, 52)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    rel_tol: f64,
    abs_tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * (rel_tol * whole.abs().max(left.abs() + right.abs()) + abs_tol) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, rel_tol, 0.5 * abs_tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, rel_tol, 0.5 * abs_tol, depth - 1)
}

/// Adaptive Simpson integration of a complex function on `[a, b]`.
pub fn adaptive_simpson_c<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Complex64 {
    let re = adaptive_simpson(&|x| f(x).re, a, b, rel_tol, abs_tol);
    let im = adaptive_simpson(&|x| f(x).im, a, b, rel_tol, abs_tol);
    Complex64::new(re, im)
}

/// Integrate a decaying function on `[a, ∞)` by doubling the truncation
/// point until the added tail contributes below `rel_tol` of the total.
pub fn integrate_decaying_tail<F: Fn(f64) -> f64>(f: &F, a: f64, rel_tol: f64) -> f64 {
    let mut hi = a.abs().max(1.0) * 2.0 + 8.0;
    let mut total = adaptive_simpson(f, a, hi, rel_tol * 0.1, 1e-300);
    for _ in 0..40 {
        let next = hi * 2.0;
        let tail = adaptive_simpson(f, hi, next, rel_tol * 0.1, 1e-300);
        total += tail;
        hi = next;
        if tail.abs() <= rel_tol * total.abs().max(1e-300) {
            break;
        }
    }
    total
}

/// Exact integral of the piecewise-linear interpolant of `f` against the
/// oscillatory kernel `e^{iωx}` on one panel `[a, b]` with endpoint values
/// `fa`, `fb`.
///
/// With `w = ω(b−a)` the panel evaluates to
/// `e^{iωa}·(b−a)·[fa·G1(w) + (fb−fa)·G2(w)]`, where `G1`, `G2` switch to
/// series below `|w| = 1e-3` to avoid cancellation.
pub fn oscillatory_linear_panel(a: f64, b: f64, fa: Complex64, fb: Complex64, omega: f64) -> Complex64 {
    let dx = b - a;
    let w = omega * dx;
    let (g1, g2) = oscillatory_panel_weights(w);
    let phase = Complex64::new(0.0, omega * a).exp();
    phase * dx * (fa * g1 + (fb - fa) * g2)
}

/// Panel weights `G1(w) = ∫₀¹ e^{iws} ds`, `G2(w) = ∫₀¹ s·e^{iws} ds`.
pub fn oscillatory_panel_weights(w: f64) -> (Complex64, Complex64) {
    if w.abs() < 1e-3 {
        let w2 = w * w;
        let g1 = Complex64::new(1.0 - w2 / 6.0 + w2 * w2 / 120.0, w / 2.0 - w2 * w / 24.0);
        let g2 = Complex64::new(0.5 - w2 / 8.0 + w2 * w2 / 144.0, w / 3.0 - w2 * w / 30.0);
        (g1, g2)
    } else {
        let iw = Complex64::new(0.0, w);
        let eiw = iw.exp();
        let one = Complex64::new(1.0, 0.0);
        let g1 = (eiw - one) / iw;
        let g2 = (eiw * (iw - one) + one) / (iw * iw);
        (g1, g2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_matches_closed_forms() {
        let v = adaptive_simpson(&|x: f64| x.exp(), 0.0, 1.0, 1e-12, 1e-15);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -8.0, 8.0, 1e-12, 1e-15);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn decaying_tail_reaches_full_integral() {
        let v = integrate_decaying_tail(&|x: f64| (-x).exp(), 0.0, 1e-12);
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn oscillatory_panel_matches_dense_riemann() {
        // One panel of a linear function against e^{iωx}, checked against a
        // brute-force Riemann sum that never touches the panel formulas.
        for &omega in &[0.0, 1e-6, 0.37, 12.0, 431.0] {
            let (a, b) = (0.3, 0.9);
            let fa = Complex64::new(1.2, -0.4);
            let fb = Complex64::new(-0.7, 0.9);
            let exact = oscillatory_linear_panel(a, b, fa, fb, omega);
            let steps = 200_000;
            let h = (b - a) / steps as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..steps {
                let x = a + (i as f64 + 0.5) * h;
                let lin = fa + (fb - fa) * ((x - a) / (b - a));
                acc += lin * Complex64::new(0.0, omega * x).exp() * h;
            }
            assert!(
                (exact - acc).norm() < 1e-8,
                "omega={omega} exact={exact} riemann={acc}"
            );
        }
    }
}
