//! Closed forms and reference data for y' = -3y^3 + 1/9 - y/(5x).
//!
//! All logs and arctans are principal. The series built by this crate fix F_0 = 0 at their base
//! point, so closed-form values are compared up to constants.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Starting point and nodes of the looping trajectory around 1/3.
pub const LOOP_NODES: [(f64, f64); 3] = [(1.0, 5.0), (1.5, 50.0), (1.6, 120.0)];
pub const LOOP_Y0: f64 = 1.1;
/// Constant used for the inverted trajectory, and the |x| beyond which it is compared.
pub const QUOTED_K: (f64, f64) = (2.18, -4.65);
pub const TAIL_MIN_ABS_X: f64 = 61.4;
/// Initial condition and quoted position of the nearby singularity.
pub const SING_X0: (f64, f64) = (10.0, 60.0);
pub const SING_Y0: (f64, f64) = (0.7, 0.3);
pub const SING_X1: (f64, f64) = (9.80628, 60.2167);
/// The additive constant quoted with the R-domain F_1.
pub const QUOTED_C1: f64 = 1.0 / 25.0;
/// Path visiting all three roots, starting from y(50i) = 0.6.
pub const TOUR_Y0: f64 = 0.6;

pub fn loop_nodes() -> Vec<C64> {
    LOOP_NODES.iter().map(|&(a, b)| C64::new(a, b)).collect()
}

pub fn tour_nodes() -> Vec<C64> {
    let r = 50.0;
    vec![
        C64::new(0.0, r),
        C64::new(r, 0.0),
        C64::new(0.0, -r),
        C64::new(-r, 0.0),
        C64::new(0.0, r),
        C64::new(r, 0.0),
        C64::new(0.0, -r),
        C64::new(-r * SQRT3, -r),
    ]
}

fn arctan_term(y: C64) -> C64 {
    ((6.0 * y + 1.0) / SQRT3).atan()
}

fn quad_log(y: C64) -> C64 {
    (9.0 * y * y + 3.0 * y + 1.0).ln()
}

/// Antiderivative of 1/P_0.
pub fn f0_rdomain(y: C64) -> C64 {
    SQRT3 * arctan_term(y) - (3.0 * y - 1.0).ln() + 0.5 * quad_log(y)
}

/// R-domain F_1 without its additive constant.
pub fn f1_rdomain(y: C64) -> C64 {
    (54.0 * y * y / (1.0 - 27.0 * y * y * y) - 4.0 * SQRT3 * arctan_term(y)) / 10.0
}

/// Singular F_0 = -int_inf^y ds / P_0(s), for y approaching infinity along the positive axis.
pub fn f0_singular(y: C64) -> C64 {
    -SQRT3 * arctan_term(y) + (3.0 * y - 1.0).ln() - 0.5 * quad_log(y) + SQRT3 * PI / 2.0
}

/// Singular F_1 as an antiderivative of -y / (5 P_0^2); it tends to sqrt(3) pi / 10 at infinity.
pub fn f1_singular(y: C64) -> C64 {
    (-54.0 * y * y / (1.0 - 27.0 * y * y * y) + 2.0 * SQRT3 * arctan_term(y) + 2.0 * (3.0 * y - 1.0).ln()
        - quad_log(y))
        / 10.0
}

/// Two-term singularity position from (x0, y0).
pub fn singularity_formula(x0: C64, y0: C64) -> C64 {
    let l = (3.0 * y0 - 1.0).ln() - 0.5 * quad_log(y0);
    x0 - SQRT3 * (1.0 - 1.0 / (5.0 * x0)) * (arctan_term(y0) - PI / 2.0) + (1.0 + 1.0 / (5.0 * x0)) * l
        - 27.0 * y0 * y0 / (5.0 * x0 * (1.0 - 27.0 * y0 * y0 * y0))
}

/// Exponent E(y) in y = 1/3 + exp(E(y)) / 3, from C = -x + log(x)/5 + F_0 + F_1/x.
fn exponent(c: C64, c1: C64, x: C64, log_x: C64, y: C64) -> (C64, C64) {
    let at = arctan_term(y);
    let q = 9.0 * y * y + 3.0 * y + 1.0;
    let cube = 1.0 - 27.0 * y * y * y;
    let coef = SQRT3 - 2.0 * SQRT3 / (5.0 * x);
    let e = -c - x + log_x / 5.0 + coef * at + 0.5 * q.ln() + (27.0 * y * y / (5.0 * cube) + c1) / x;
    let dat = (6.0 / SQRT3) / (1.0 + ((6.0 * y + 1.0) / SQRT3).powi(2));
    let dfrac = 27.0 / 5.0 * (2.0 * y + 27.0 * y.powi(4)) / (cube * cube);
    let de = coef * dat + 0.5 * (18.0 * y + 3.0) / q + dfrac / x;
    (e, de)
}

/// Solves y = 1/3 + exp(E(y))/3 by Newton's method; `c1` is the additive constant of F_1.
pub fn newton_form_solve(c: C64, c1: C64, x: C64, log_x: C64, y_guess: C64) -> Result<C64> {
    let residual = |y: C64| {
        let (e, de) = exponent(c, c1, x, log_x, y);
        let ex = e.exp() / 3.0;
        (y - 1.0 / 3.0 - ex, ex * de)
    };
    let mut y = y_guess;
    let (mut h, mut slope) = residual(y);
    for it in 0..60 {
        if h.norm() <= 1e-14 * (1.0 + y.norm()) {
            return Ok(y);
        }
        let step = h / (1.0 - slope);
        if !step.is_finite() {
            return Err(Error::NewtonDiverged { x, iterations: it, residual: h.norm() });
        }
        if step.norm() <= 1e-14 * (1.0 + y.norm()) {
            return Ok(y - step);
        }
        let mut lam = 1.0;
        loop {
            let cand = y - step * lam;
            let (h1, s1) = residual(cand);
            if h1.is_finite() && h1.norm() < h.norm() {
                (y, h, slope) = (cand, h1, s1);
                break;
            }
            lam *= 0.5;
            if lam < 1e-4 {
                return Err(Error::NewtonDiverged { x, iterations: it, residual: h.norm() });
            }
        }
    }
    Err(Error::NewtonDiverged { x, iterations: 60, residual: h.norm() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn p0(y: C64) -> C64 {
        -3.0 * y * y * y + 1.0 / 9.0
    }

    fn dnum(f: fn(C64) -> C64, y: C64) -> C64 {
        let h = 1e-5;
        (f(y + h) - f(y - h)) / (2.0 * h)
    }

    #[test]
    fn closed_forms_differentiate_correctly() {
        for y in [c(1.1, 0.0), c(0.7, 0.3), c(2.0, -0.5), c(-0.5, 0.8)] {
            assert!((dnum(f0_rdomain, y) - 1.0 / p0(y)).norm() < 1e-8);
            let want = (y / (5.0 * p0(y)) - 0.2) / p0(y);
            assert!((dnum(f1_rdomain, y) - want).norm() < 1e-7, "{y}");
            assert!((dnum(f0_singular, y) + 1.0 / p0(y)).norm() < 1e-8);
            assert!((dnum(f1_singular, y) + y / (5.0 * p0(y) * p0(y))).norm() < 1e-8);
        }
    }

    #[test]
    fn singular_forms_at_infinity() {
        let y = c(1e7, 0.0);
        assert!(f0_singular(y).norm() < 1e-9);
        assert!((f1_singular(y) - c(SQRT3 * PI / 10.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn formula_reproduces_quoted_position() {
        let x1 = singularity_formula(c(SING_X0.0, SING_X0.1), c(SING_Y0.0, SING_Y0.1));
        assert!((x1 - c(SING_X1.0, SING_X1.1)).norm() < 1e-4, "{x1}");
    }

    #[test]
    fn newton_form_inverts_its_own_constant() {
        let (x, y) = (c(20.0, 70.0), c(0.45, -0.1));
        let c1 = c(QUOTED_C1, 0.0);
        let k = -x + x.ln() / 5.0 + f0_rdomain(y) + (f1_rdomain(y) + c1) / x;
        let got = newton_form_solve(k, c1, x, x.ln(), y + 0.02).unwrap();
        assert!((got - y).norm() < 1e-12, "{got}");
    }

    #[test]
    fn newton_form_matches_inversion_on_loop_tail() {
        use crate::{build_constant, constant_from_ic, continue_trajectory, Contour, OdeSpec, Path, Plane};
        // With n = 1 the series is C = -x + a log x + F_0 + F_1/x, the same truncation as the
        // exponential form; only the additive constants differ.
        let ode = OdeSpec::abel(1).unwrap();
        let y0 = c(LOOP_Y0, 0.0);
        let series = build_constant(&ode, &Contour::around(ode.roots(), 0).unwrap(), y0, 1).unwrap();
        let path = Path::polyline(Plane::X, &loop_nodes()).unwrap();
        let k = constant_from_ic(&series, path.start(), y0).unwrap();
        let traj = continue_trajectory(&series, k, &path, y0).unwrap();
        let (kc, c1) = (k + f0_rdomain(y0), -f1_rdomain(y0));
        let tail: Vec<_> = traj.iter().filter(|s| s.x.norm() > TAIL_MIN_ABS_X).collect();
        assert!(tail.len() > 100);
        for s in tail {
            let y = newton_form_solve(kc, c1, s.x, s.x.ln(), s.y).unwrap();
            assert!((y - s.y).norm() < 1e-6, "{} {} {}", s.x, s.y, y);
        }
    }
}
