use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ode::OdeSpec;

/// Formal solution p + sum b_k x^-k tending to a root of P_0, with the linearisation about it.
#[derive(Debug, Clone, PartialEq)]
pub struct RootExpansion {
    pub root: C64,
    pub index: usize,
    /// b_1..b_M.
    pub b: Vec<C64>,
    /// P_0'(p).
    pub mu: C64,
    /// Coefficient of delta/x in the equation for delta = y - (p + b_1/x).
    pub nu: C64,
}

impl RootExpansion {
    pub fn eval(&self, x: C64) -> C64 {
        let w = 1.0 / x;
        self.b.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| (acc + c) * w) + self.root
    }

    pub fn deriv(&self, x: C64) -> C64 {
        let w = 1.0 / x;
        let mut acc = C64::new(0.0, 0.0);
        let mut wk = w * w;
        for (k, &bk) in self.b.iter().enumerate() {
            acc -= bk * (k + 1) as f64 * wk;
            wk *= w;
        }
        acc
    }

    /// How far the truncated series misses the equation at x.
    pub fn residual(&self, ode: &OdeSpec, x: C64) -> C64 {
        self.deriv(x) - ode.rhs(x, self.eval(x))
    }

    /// x^nu e^{mu x} with log x supplied by the caller's branch.
    pub fn exponential(&self, x: C64, log_x: C64) -> C64 {
        (self.nu * log_x + self.mu * x).exp()
    }
}

fn mul_trunc(a: &[C64], b: &[C64]) -> Vec<C64> {
    let m = a.len();
    let mut out = vec![C64::new(0.0, 0.0); m];
    for (i, &ai) in a.iter().enumerate() {
        if ai == C64::new(0.0, 0.0) {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(m - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Coefficient of w^k in sum_j w^j P_j(u(w)), u given to order k.
fn rhs_coefficient(ode: &OdeSpec, u: &[C64], k: usize) -> C64 {
    let mut total = C64::new(0.0, 0.0);
    for (j, p) in ode.polys().iter().enumerate() {
        if j > k {
            break;
        }
        let len = k - j + 1;
        let u = &u[..len];
        let coeffs = p.coeffs();
        let mut acc = vec![C64::new(0.0, 0.0); len];
        for &c in coeffs.iter().rev() {
            acc = mul_trunc(&acc, u);
            acc[0] += c;
        }
        total += acc[len - 1];
    }
    total
}

/// Order-by-order matching of p + sum_{k<=m} b_k x^-k against the equation.
pub fn power_series_at_root(ode: &OdeSpec, p: C64, m: usize) -> Result<RootExpansion> {
    let roots = ode.roots();
    let (index, dist) = roots.nearest(p);
    if dist > 1e-8 * (1.0 + p.norm()) {
        return Err(Error::InvalidInput(format!("{p} is not a root of P_0")));
    }
    let p = roots.get(index);
    let p0 = ode.p0();
    let mu = ode.dp_at(0, p);
    if mu.norm() < p0.simplicity_threshold(p) {
        return Err(Error::MultipleRoot { root: p, derivative: mu.norm() });
    }
    let mut u = vec![C64::new(0.0, 0.0); m + 1];
    u[0] = p;
    for k in 1..=m {
        let r = rhs_coefficient(ode, &u, k);
        // -(k-1) b_{k-1} = P_0'(p) b_k + r
        u[k] = (-(k as f64 - 1.0) * u[k - 1] - r) / mu;
    }
    let b1 = if m >= 1 { u[1] } else { -ode.p_at(1, p) / mu };
    let d2 = p0.derivative().derivative().eval(p);
    let nu = d2 * b1 + ode.dp_at(1, p);
    Ok(RootExpansion { root: p, index, b: u[1..].to_vec(), mu, nu })
}

/// Leading transseries constant fitted on a window of samples near one root.
#[derive(Debug, Clone, PartialEq)]
pub struct TransseriesFit {
    pub c_trans: C64,
    pub window: (C64, C64),
    /// max |C_i - C| / |C| over the window.
    pub stability: f64,
    pub estimates: Vec<C64>,
    /// log x at the window samples, arg continued from the principal value at the first.
    pub logs: Vec<C64>,
}

impl TransseriesFit {
    /// y ~ p + sum b_k x^-k + C x^nu e^{mu x}.
    pub fn value(&self, expansion: &RootExpansion, x: C64, log_x: C64) -> C64 {
        expansion.eval(x) + self.c_trans * expansion.exponential(x, log_x)
    }
}

/// log x along a sequence of nearby points, continuing arg from the principal branch.
pub(crate) fn continued_logs(xs: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut arg = match xs.first() {
        Some(x) => x.arg(),
        None => return out,
    };
    for (i, &x) in xs.iter().enumerate() {
        if i > 0 {
            arg += (x / xs[i - 1]).arg();
        }
        out.push(C64::new(x.norm().ln(), arg));
    }
    out
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// C(x) = (y - y~(x)) x^-nu e^{-mu x} per sample, summarised by its componentwise median.
///
/// Samples must sit within 0.1 of the expansion's root.
pub fn transseries_fit(expansion: &RootExpansion, samples: &[(C64, C64)]) -> Result<TransseriesFit> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("empty fit window".into()));
    }
    let max_distance = samples.iter().map(|&(_, y)| (y - expansion.root).norm()).fold(0.0, f64::max);
    if max_distance >= 0.1 {
        return Err(Error::NotInRootRegion { max_distance });
    }
    let xs: Vec<C64> = samples.iter().map(|s| s.0).collect();
    let logs = continued_logs(&xs);
    let estimates: Vec<C64> = samples
        .iter()
        .zip(&logs)
        .map(|(&(x, y), &l)| (y - expansion.eval(x)) / expansion.exponential(x, l))
        .collect();
    let c_trans = C64::new(
        median(estimates.iter().map(|c| c.re).collect()),
        median(estimates.iter().map(|c| c.im).collect()),
    );
    let spread = estimates.iter().map(|c| (c - c_trans).norm()).fold(0.0, f64::max);
    let stability = if c_trans.norm() > 0.0 { spread / c_trans.norm() } else { f64::INFINITY };
    if stability >= 0.05 {
        return Err(Error::UnstableFit { stability });
    }
    Ok(TransseriesFit { c_trans, window: (xs[0], xs[xs.len() - 1]), stability, estimates, logs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::rk_integrate_sampled;
    use crate::path::{Path, Plane};
    use crate::poly::ComplexPoly;
    use crate::rk::Tolerance;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn forced_linear() -> OdeSpec {
        // y' = -y + 1/x^2
        OdeSpec::new(
            vec![ComplexPoly::from_real(&[0.0, -1.0]), ComplexPoly::zero(), ComplexPoly::from_real(&[1.0])],
            2,
        )
        .unwrap()
    }

    #[test]
    fn abel_at_one_third() {
        let ode = OdeSpec::abel(2).unwrap();
        let e = power_series_at_root(&ode, c(1.0 / 3.0, 0.0), 6).unwrap();
        assert!((e.b[0] - c(-1.0 / 15.0, 0.0)).norm() < 1e-15);
        assert!((e.mu - c(-1.0, 0.0)).norm() < 1e-14);
        // P_0''(1/3) b_1 + P_1'(1/3) = (-6)(-1/15) - 1/5.
        assert!((e.nu - c(0.2, 0.0)).norm() < 1e-14, "{}", e.nu);
    }

    #[test]
    fn forced_linear_coefficients() {
        let e = power_series_at_root(&forced_linear(), c(0.0, 0.0), 5).unwrap();
        assert!(e.b[0].norm() < 1e-15);
        assert!((e.b[1] - c(1.0, 0.0)).norm() < 1e-15);
        // -(k-1) b_{k-1} = -b_k  =>  b_3 = 2, b_4 = 6, b_5 = 24.
        assert!((e.b[2] - c(2.0, 0.0)).norm() < 1e-14);
        assert!((e.b[4] - c(24.0, 0.0)).norm() < 1e-12);
        assert!((e.mu + 1.0).norm() < 1e-15 && e.nu.norm() < 1e-15);
    }

    #[test]
    fn unforced_series_vanishes() {
        let ode = OdeSpec::riccati(2).unwrap();
        let e = power_series_at_root(&ode, c(0.0, 1.0), 8).unwrap();
        assert!(e.b.iter().all(|b| b.norm() < 1e-15));
        assert!(e.nu.norm() < 1e-15);
    }

    #[test]
    fn rejects_non_roots() {
        let ode = OdeSpec::abel(2).unwrap();
        assert!(power_series_at_root(&ode, c(0.5, 0.0), 4).is_err());
    }

    #[test]
    fn truncation_residual_order() {
        let ode = OdeSpec::abel(2).unwrap();
        let e = power_series_at_root(&ode, c(1.0 / 3.0, 0.0), 3).unwrap();
        assert!(e.residual(&ode, c(1e3, 0.0)).norm() < 1e-11);
        let r1 = e.residual(&ode, c(100.0, 50.0)).norm();
        let r2 = e.residual(&ode, c(400.0, 200.0)).norm();
        let slope = (r2 / r1).ln() / 4f64.ln();
        assert!((slope + 4.0).abs() < 0.2, "{slope}");
    }

    #[test]
    fn nu_matches_decay_of_rk_deviation() {
        // Independent of the formula for nu: fit the algebraic prefactor of y - y~ on an RK run.
        let ode = OdeSpec::abel(2).unwrap();
        let e = power_series_at_root(&ode, c(1.0 / 3.0, 0.0), 10).unwrap();
        let path = Path::line(Plane::X, c(20.0, 0.0), c(30.0, 0.0)).unwrap();
        let y0 = e.eval(c(20.0, 0.0)) + 1e-3;
        let tol = Tolerance::new(1e-13, 1e-20);
        let tr = rk_integrate_sampled(&ode, &path, y0, &tol, 10).unwrap();
        let at = |x: f64| {
            let s = tr.samples().iter().find(|p| (p.x.re - x).abs() < 1e-9).unwrap();
            ((s.y - e.eval(s.x)) * x.exp()).norm()
        };
        let slope = (at(30.0) / at(23.0)).ln() / (30.0f64 / 23.0).ln();
        assert!((slope - 0.2).abs() < 0.02, "{slope}");
    }

    #[test]
    fn planted_constant_is_recovered() {
        let e = power_series_at_root(&forced_linear(), c(0.0, 0.0), 6).unwrap();
        let samples: Vec<(C64, C64)> = (0..40)
            .map(|i| {
                let x = c(5.0 + 0.15 * i as f64, 0.0);
                (x, e.eval(x) + 0.3 * (-x).exp())
            })
            .collect();
        let fit = transseries_fit(&e, &samples).unwrap();
        assert!((fit.c_trans - c(0.3, 0.0)).norm() < 1e-8);
        assert!(fit.stability < 1e-8);
    }

    #[test]
    fn far_window_is_rejected() {
        let e = power_series_at_root(&forced_linear(), c(0.0, 0.0), 4).unwrap();
        let samples = vec![(c(5.0, 0.0), c(0.05, 0.0)), (c(6.0, 0.0), c(0.2, 0.0))];
        assert!(matches!(transseries_fit(&e, &samples), Err(Error::NotInRootRegion { .. })));
    }

    #[test]
    fn abel_trajectory_fit_is_stable() {
        let ode = OdeSpec::abel(2).unwrap();
        let e = power_series_at_root(&ode, c(1.0 / 3.0, 0.0), 8).unwrap();
        let path = Path::line(Plane::X, c(15.0, 2.0), c(30.0, 4.0)).unwrap();
        let tr = rk_integrate_sampled(&ode, &path, c(0.4, 0.05), &Tolerance::new(1e-12, 1e-18), 60).unwrap();
        let window: Vec<(C64, C64)> = tr
            .samples()
            .iter()
            .filter(|s| (s.y - e.root).norm() < 0.01 && (s.y - e.eval(s.x)).norm() > 1e-8)
            .map(|s| (s.x, s.y))
            .collect();
        assert!(window.len() > 10);
        let fit = transseries_fit(&e, &window).unwrap();
        assert!(fit.stability < 0.05, "{}", fit.stability);
    }

    #[test]
    fn continued_logs_cross_the_cut() {
        let xs = [c(-1.0, 0.1), c(-1.0, 0.0), c(-1.0, -0.1)];
        let l = continued_logs(&xs);
        assert!(l[2].im > 3.0, "{}", l[2]);
    }
}
