//! Adaptive Simpson quadrature, including semi-infinite ranges mapped through
//! `x = u / (1 − u)`.

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `∫_0^∞ f(x) dx` via `x = u/(1−u)`, `dx = du/(1−u)²`. The integrand must
/// vanish at infinity fast enough for the mapped integrand to stay bounded.
pub fn integrate_half_line(f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    integrate(mapped(&f), 0.0, 1.0, tol)
}

fn mapped(f: &impl Fn(f64) -> f64) -> impl Fn(f64) -> f64 + '_ {
    move |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - u;
        let v = f(u / one_minus) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    }
}

/// Tensor-product adaptive Simpson over `[0,∞)²`.
pub fn integrate_quadrant(f: impl Fn(f64, f64) -> f64, tol: f64) -> f64 {
    integrate_half_line(|x| integrate_half_line(|y| f(x, y), tol), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x * x, 0.0, 1.0, 1e-12);
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_half_line() {
        let v = integrate_half_line(|x| (-x).exp(), 1e-10);
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gaussian_quadrant() {
        let v = integrate_quadrant(|x, y| (-(x * x + y * y)).exp(), 1e-9);
        assert!((v - std::f64::consts::PI / 4.0).abs() < 1e-6);
    }
}
