//! Singular-domain constants of motion C = x + F_0(y) + sum F_k(y)/x^k with the F_k
//! vanishing as y -> infinity along a fixed direction, and the movable singularities they locate.

use num_complex::Complex64 as C64;

use crate::comotion::{BranchState, ConstantSeries, FVector, Kind};
use crate::error::{Error, Result};
use crate::ode::OdeSpec;
use crate::oracle::{rk_integrate, BLOWUP};
use crate::path::{Contour, Path, Plane};
use crate::poly::ComplexPoly;
use crate::rk::Tolerance;

/// Highest power of 1/y kept in the tail expansion.
const TAIL_TERMS: i32 = 40;

pub const DEFAULT_Y_MAX: f64 = 1e3;

/// Truncated Laurent series sum c[i] w^(lo + i) in w = 1/y, exponents up to `top`.
#[derive(Debug, Clone)]
struct Laurent {
    lo: i32,
    c: Vec<C64>,
}

impl Laurent {
    fn zero(top: i32) -> Self {
        Laurent { lo: top + 1, c: Vec::new() }
    }

    fn from_poly(p: &ComplexPoly, top: i32) -> Self {
        if p.is_zero() {
            return Self::zero(top);
        }
        let d = p.degree() as i32;
        let c: Vec<C64> = (-d..=top).map(|e| if e <= 0 { p.coeffs()[(-e) as usize] } else { C64::new(0.0, 0.0) }).collect();
        Laurent { lo: -d, c }
    }

    fn get(&self, e: i32) -> C64 {
        if e < self.lo || e - self.lo >= self.c.len() as i32 {
            C64::new(0.0, 0.0)
        } else {
            self.c[(e - self.lo) as usize]
        }
    }

    fn mul(&self, o: &Laurent, top: i32) -> Laurent {
        let lo = self.lo + o.lo;
        if self.c.is_empty() || o.c.is_empty() || lo > top {
            return Self::zero(top);
        }
        let mut c = vec![C64::new(0.0, 0.0); (top - lo + 1) as usize];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                let e = lo + (i + j) as i32;
                if e > top {
                    break;
                }
                c[(e - lo) as usize] += a * b;
            }
        }
        Laurent { lo, c }
    }

    fn add_scaled(&self, o: &Laurent, s: f64, top: i32) -> Laurent {
        let lo = self.lo.min(o.lo);
        if lo > top {
            return Self::zero(top);
        }
        let c = (lo..=top).map(|e| self.get(e) + o.get(e) * s).collect();
        Laurent { lo, c }
    }

    fn eval(&self, w: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for v in self.c.iter().rev() {
            acc = acc * w + v;
        }
        acc * w.powi(self.lo)
    }
}

/// 1/P_0 as a series in w starting at w^m0.
fn inverse_p0(p0: &ComplexPoly, top: i32) -> Laurent {
    let m0 = p0.degree();
    let q: Vec<C64> = (0..=m0).map(|i| p0.coeffs()[m0 - i]).collect();
    let lo = m0 as i32;
    if lo > top {
        return Laurent::zero(top);
    }
    let len = (top - lo + 1) as usize;
    let mut r = vec![C64::new(0.0, 0.0); len];
    r[0] = 1.0 / q[0];
    for n in 1..len {
        let mut acc = C64::new(0.0, 0.0);
        for i in 1..=n.min(m0) {
            acc += q[i] * r[n - i];
        }
        r[n] = -acc / q[0];
    }
    Laurent { lo, c: r }
}

/// F_0..F_n as Laurent series in 1/y, each vanishing at infinity.
fn tail_series(ode: &OdeSpec, n: usize) -> Result<Vec<Laurent>> {
    let dmax = ode.polys().iter().map(|p| p.degree()).max().unwrap_or(0) as i32;
    let top = TAIL_TERMS + (n as i32 + 1) * (dmax + 1);
    let inv = inverse_p0(ode.p0(), top);
    let pk: Vec<Laurent> = (0..=n)
        .map(|k| ode.polys().get(k).map_or(Laurent::zero(top), |p| Laurent::from_poly(p, top)))
        .collect();
    let mut f: Vec<Laurent> = Vec::with_capacity(n + 1);
    let mut df: Vec<Laurent> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let d = if k == 0 {
            Laurent::zero(top).add_scaled(&inv, -1.0, top)
        } else {
            let mut num = Laurent::zero(top).add_scaled(&f[k - 1], k as f64 - 1.0, top);
            for j in 0..k {
                num = num.add_scaled(&pk[k - j].mul(&df[j], top), -1.0, top);
            }
            num.mul(&inv, top)
        };
        let scale = d.c.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for e in d.lo..=1 {
            if d.get(e).norm() > 1e-13 * scale.max(1e-300) {
                return Err(Error::DecayViolation {
                    detail: format!("F'_{k} has a y^{} term at infinity", -e),
                });
            }
        }
        // int_inf^y s^-e ds = y^(1-e) / (1-e)
        let lo = d.lo.max(2) - 1;
        let c = (lo..=top - 1).map(|e| d.get(e + 1) / (-(e as f64))).collect();
        f.push(Laurent { lo, c });
        df.push(d);
    }
    Ok(f)
}

/// Least-squares slope of log|v| against log|y|.
fn log_slope(ys: &[C64], vs: &[C64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        ys.iter().zip(vs).filter(|(_, v)| v.norm() > 0.0).map(|(y, v)| (y.norm().ln(), v.norm().ln())).collect();
    if pts.len() < ys.len() || pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularSeries {
    series: ConstantSeries,
    direction: C64,
    q: u32,
    m0: usize,
    y_max: f64,
    decay: Vec<Option<f64>>,
    tail_error: f64,
}

impl SingularSeries {
    pub fn series(&self) -> &ConstantSeries {
        &self.series
    }

    pub fn ode(&self) -> &OdeSpec {
        self.series.ode()
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    pub fn direction(&self) -> C64 {
        self.direction
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    /// Fitted exponent of |F_k| on [Y_max, 4 Y_max]; None when F_k vanishes identically.
    pub fn decay(&self) -> &[Option<f64>] {
        &self.decay
    }

    /// -(m_0 + q - 1).
    pub fn expected_decay(&self) -> f64 {
        -((self.m0 as f64) + self.q as f64 - 1.0)
    }

    /// Size of the last retained tail term at the anchor.
    pub fn tail_error(&self) -> f64 {
        self.tail_error
    }

    /// F at y, continued along the straight segment from the anchor Y_max * direction.
    pub fn f_at(&self, y: C64) -> Result<FVector> {
        let ode = self.ode();
        let anchor = self.series.base_y();
        if y == anchor {
            return Ok(self.series.base().clone());
        }
        let line = Path::line(Plane::Y, anchor, y)?;
        let (j, d) = line.clearance(ode.roots().roots());
        if d < ode.eps_root() {
            return Err(Error::PathThroughRoot { y, root: ode.roots().get(j) });
        }
        self.series.continue_along(&line)
    }

    /// x + F_0(y) + sum F_k(y) / x^k.
    pub fn value(&self, x: C64, fv: &FVector) -> C64 {
        self.series.value(&BranchState::new(x), fv)
    }
}

/// Singular series with F_k vanishing as y -> infinity along `direction`.
pub fn build_singular(ode: &OdeSpec, direction: C64, n: usize, y_max: f64) -> Result<SingularSeries> {
    build_singular_with(ode, direction, n, y_max, &Tolerance::new(1e-12, 1e-14))
}

pub fn build_singular_with(
    ode: &OdeSpec,
    direction: C64,
    n: usize,
    y_max: f64,
    tol: &Tolerance,
) -> Result<SingularSeries> {
    let ode = ode.with_order(n)?;
    let m0 = ode.p0().degree();
    if m0 < 2 {
        return Err(Error::DegreeTooLow { found: m0, needed: 2 });
    }
    if !(direction.norm() > 0.0) || !direction.is_finite() {
        return Err(Error::InvalidInput("direction must be a nonzero complex number".into()));
    }
    let roots_max = ode.roots().roots().iter().map(|r| r.norm()).fold(0.0, f64::max);
    if !(y_max > 10.0 * (1.0 + roots_max)) {
        return Err(Error::InvalidInput(format!("Y_max = {y_max} is not beyond the roots")));
    }
    let dir = direction / direction.norm();
    let tails = tail_series(&ode, n)?;
    let anchor = dir * y_max;
    let w = 1.0 / anchor;
    let values: Vec<C64> = tails.iter().map(|t| t.eval(w)).collect();
    let tail_error = tails
        .iter()
        .map(|t| t.c.last().map_or(0.0, |v| v.norm() * w.norm().powi(t.lo + t.c.len() as i32 - 1)))
        .fold(0.0, f64::max);
    if tail_error > 1e-12 {
        return Err(Error::InvalidInput(format!("tail expansion too coarse at Y_max = {y_max} ({tail_error:e})")));
    }
    let system = crate::comotion::FSystem::new(&ode, Kind::Singular, C64::new(0.0, 0.0), n);
    let base = system.fvector(anchor, values)?;

    // Decay: q from P_k / P_0, exponents of F_k from continued values further out.
    let nodes: Vec<C64> = (0..=8).map(|i| anchor * 4f64.powf(i as f64 / 8.0)).collect();
    let mut q_fit: Option<f64> = None;
    for k in 1..ode.polys().len() {
        if ode.polys()[k].is_zero() {
            continue;
        }
        let ratios: Vec<C64> = nodes.iter().map(|&y| ode.p_at(k, y) / ode.p_at(0, y)).collect();
        if let Some(s) = log_slope(&nodes, &ratios) {
            q_fit = Some(q_fit.map_or(-s, |q: f64| q.min(-s)));
        }
    }
    let qf = q_fit.unwrap_or(0.0);
    if (qf - qf.round()).abs() > 0.1 || qf.round() < 0.0 {
        return Err(Error::DecayViolation { detail: format!("|P_k/P_0| decays like |y|^-{qf:.3}") });
    }
    let q = qf.round() as u32;
    let path = Path::polyline(Plane::Y, &nodes)?;
    let fine = Tolerance::new(tol.rel, 1e-300);
    let out = system.integrate(&path, &base, &fine)?;
    let decay: Vec<Option<f64>> = (0..=n)
        .map(|k| {
            let vs: Vec<C64> = out.iter().map(|f| f.values[k]).collect();
            log_slope(&nodes, &vs)
        })
        .collect();
    let expected = -(m0 as f64 + q as f64 - 1.0);
    let check = |k: usize, want: f64, exact: bool| -> Result<()> {
        match decay[k] {
            Some(e) if (exact && (e - want).abs() <= 0.2) || (!exact && e <= want + 0.2) => Ok(()),
            other => Err(Error::DecayViolation {
                detail: format!("F_{k} decays with exponent {other:?}, expected {want}"),
            }),
        }
    };
    check(0, 1.0 - m0 as f64, true)?;
    let mut first = true;
    for k in 1..=n {
        if decay[k].is_none() {
            continue;
        }
        check(k, expected, first)?;
        first = false;
    }
    if first {
        check(0, expected, true)?;
    }
    let series = ConstantSeries::from_parts(ode, Kind::Singular, C64::new(0.0, 0.0), base, *tol);
    Ok(SingularSeries { series, direction: dir, q, m0, y_max, decay, tail_error })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    /// Refined blow-up point reached by the shoot.
    pub x_hit: C64,
    /// |x_hit - x_sing|.
    pub delta: f64,
    pub digits: f64,
    pub max_abs_y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularityReport {
    pub x0: C64,
    pub y0: C64,
    pub x_sing: C64,
    /// Period multiples per root added to the principal prediction.
    pub branch_shift: Vec<i32>,
    pub order: usize,
    pub verified: Option<Verification>,
}

/// x_sing = C_n(y0, x0) with F continued from the anchor at infinity.
pub fn locate_singularity(sing: &SingularSeries, x0: C64, y0: C64) -> Result<SingularityReport> {
    let fv = sing.f_at(y0)?;
    Ok(SingularityReport {
        x0,
        y0,
        x_sing: sing.value(x0, &fv),
        branch_shift: vec![0; sing.ode().roots().len()],
        order: sing.order(),
        verified: None,
    })
}

/// Periods of F_0 + F_1/x0 + ... around each root, taken counterclockwise from y0.
pub fn periods(sing: &SingularSeries, x0: C64, y0: C64) -> Result<Vec<C64>> {
    let fv = sing.f_at(y0)?;
    let ode = sing.ode();
    let sys = sing.series().system();
    (0..ode.roots().len())
        .map(|j| {
            let contour = Contour::around(ode.roots(), j)?;
            let m = sys.monodromy(&contour, &fv, sing.series().tol())?;
            Ok(crate::comotion::horner_inv(&m, x0))
        })
        .collect()
}

/// One report per shift vector m: x_sing + sum_j m_j * omega_j.
pub fn singularity_array(sing: &SingularSeries, x0: C64, y0: C64, shifts: &[Vec<i32>]) -> Result<Vec<SingularityReport>> {
    let base = locate_singularity(sing, x0, y0)?;
    let omega = periods(sing, x0, y0)?;
    shifts
        .iter()
        .map(|m| {
            if m.len() != omega.len() {
                return Err(Error::InvalidInput(format!("shift has {} entries for {} roots", m.len(), omega.len())));
            }
            let offset: C64 = m.iter().zip(&omega).map(|(&k, w)| w * k as f64).sum();
            Ok(SingularityReport { x_sing: base.x_sing + offset, branch_shift: m.clone(), ..base.clone() })
        })
        .collect()
}

/// Shoots from (x0, y0) toward the predicted point and chases the pole with Newton steps on
/// y^(1 - m0), which vanishes linearly there.
pub fn verify_singularity(ode: &OdeSpec, report: &SingularityReport, tol: &Tolerance) -> Result<SingularityReport> {
    let m0 = ode.p0().degree();
    if m0 < 2 {
        return Err(Error::DegreeTooLow { found: m0, needed: 2 });
    }
    let (x0, pred) = (report.x0, report.x_sing);
    let dist = (pred - x0).norm();
    if !(dist > 0.0) {
        return Err(Error::InvalidInput("prediction coincides with the starting point".into()));
    }
    let radius = 1e-3 * pred.norm().max(1.0);
    let standoff = 0.05 * dist.min(1.0);
    let mut max_abs_y = report.y0.norm();
    let (mut x, mut y) = match shoot(ode, x0, pred - (pred - x0) / dist * standoff, report.y0, tol) {
        Shot::Reached(x, y) | Shot::Blowup(x, y) => (x, y),
    };
    let e = 1.0 - m0 as f64;
    let estimate = |x: C64, y: C64| {
        let w = y.powf(e);
        let dw = e * y.powf(e - 1.0) * ode.rhs(x, y);
        x - w / dw
    };
    for _ in 0..200 {
        max_abs_y = max_abs_y.max(y.norm());
        let est = estimate(x, y);
        let closest = (est - pred).norm();
        if !est.is_finite() || closest > radius {
            return Err(Error::NoBlowup { x_sing: pred, closest, max_abs_y });
        }
        if y.norm() > BLOWUP {
            let digits = if closest > 0.0 { -(closest / pred.norm()).log10() } else { 16.0 };
            let v = Verification { x_hit: est, delta: closest, digits, max_abs_y };
            return Ok(SingularityReport { verified: Some(v), ..report.clone() });
        }
        let next = x + (est - x) * 0.9;
        (x, y) = match shoot(ode, x, next, y, tol) {
            Shot::Reached(x, y) | Shot::Blowup(x, y) => (x, y),
        };
    }
    Err(Error::NoBlowup { x_sing: pred, closest: (estimate(x, y) - pred).norm(), max_abs_y })
}

enum Shot {
    Reached(C64, C64),
    Blowup(C64, C64),
}

fn shoot(ode: &OdeSpec, from: C64, to: C64, y: C64, tol: &Tolerance) -> Shot {
    let path = match Path::line(Plane::X, from, to) {
        Ok(p) => p,
        Err(_) => return Shot::Reached(from, y),
    };
    match rk_integrate(ode, &path, y, tol) {
        Ok(tr) => Shot::Reached(tr.last().x, tr.last().y),
        Err(Error::BlowupDetected { x, y }) => Shot::Blowup(x, y),
        // The step size collapsed just short of the pole; the last good state is unknown, so
        // restart the chase from the start of this leg with a shorter stride.
        Err(_) => Shot::Reached(from, y),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn tan_family(n: usize) -> OdeSpec {
        let p = ComplexPoly::from_real(&[1.0, 0.0, 1.0]);
        OdeSpec::new(vec![p.clone(), ComplexPoly::zero(), p], n).unwrap()
    }

    /// Pole of y' = (1 + y^2)(1 + 1/x^2) through (x0, y0): x - 1/x = x0 - 1/x0 + pi/2 - arctan y0.
    fn tan_family_pole(x0: f64, y0: f64) -> f64 {
        let b = x0 - 1.0 / x0 + PI / 2.0 - y0.atan();
        0.5 * (b + (b * b + 4.0).sqrt())
    }

    #[test]
    fn laurent_inverse_of_cubic() {
        let p = ComplexPoly::from_real(&[1.0 / 9.0, 0.0, 0.0, -3.0]);
        let inv = inverse_p0(&p, 30);
        let y = c(40.0, 7.0);
        assert!((inv.eval(1.0 / y) - 1.0 / p.eval(y)).norm() < 1e-18);
    }

    #[test]
    fn riccati_f0_at_origin() {
        let sing = build_singular(&OdeSpec::riccati(1).unwrap(), c(1.0, 0.0), 1, DEFAULT_Y_MAX).unwrap();
        let fv = sing.f_at(c(0.0, 0.0)).unwrap();
        // F'_0 = -1/P_0, so F_0(0) = int_0^inf ds/(1+s^2).
        assert!((fv.values[0] - c(PI / 2.0, 0.0)).norm() < 1e-10, "{}", fv.values[0]);
        assert_eq!(fv.values[1], c(0.0, 0.0));
        assert_eq!(sing.q(), 0);
        assert!((sing.decay()[0].unwrap() + 1.0).abs() < 0.2);
    }

    #[test]
    fn riccati_poles() {
        let ode = OdeSpec::riccati(2).unwrap();
        let sing = build_singular(&ode, c(1.0, 0.0), 2, DEFAULT_Y_MAX).unwrap();
        let r = locate_singularity(&sing, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!((r.x_sing - c(PI / 2.0, 0.0)).norm() < 1e-10);
        let r = locate_singularity(&sing, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!((r.x_sing - c(1.0 + PI / 4.0, 0.0)).norm() < 1e-10);
        let v = verify_singularity(&ode, &r, &Tolerance::new(1e-12, 1e-14)).unwrap().verified.unwrap();
        assert!(v.delta < 1e-8, "{v:?}");
    }

    #[test]
    fn riccati_array_spacing_is_pi() {
        let ode = OdeSpec::riccati(2).unwrap();
        let sing = build_singular(&ode, c(1.0, 0.0), 2, DEFAULT_Y_MAX).unwrap();
        let shifts: Vec<Vec<i32>> = (0..4).map(|k| vec![k, 0]).collect();
        let arr = singularity_array(&sing, c(0.0, 0.0), c(0.0, 0.0), &shifts).unwrap();
        let base = locate_singularity(&sing, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(arr[0].x_sing, base.x_sing);
        for w in arr.windows(2) {
            assert!(((w[1].x_sing - w[0].x_sing).norm() - PI).abs() < 1e-9);
            assert!((w[1].x_sing - w[0].x_sing).im.abs() < 1e-9);
        }
        // A straight shot from 0 meets the nearest pole first, so only the two adjacent members
        // of the array are reachable this way.
        for r in &arr[..2] {
            assert!(verify_singularity(&ode, r, &Tolerance::new(1e-12, 1e-14)).is_ok(), "{}", r.x_sing);
        }
    }

    #[test]
    fn wrong_prediction_is_flagged() {
        let ode = OdeSpec::riccati(2).unwrap();
        let sing = build_singular(&ode, c(1.0, 0.0), 2, DEFAULT_Y_MAX).unwrap();
        let mut r = locate_singularity(&sing, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        r.x_sing += 0.5;
        assert!(matches!(
            verify_singularity(&ode, &r, &Tolerance::default()),
            Err(Error::NoBlowup { .. })
        ));
    }

    #[test]
    fn order_improvement_on_tan_family() {
        let ratio = |x0: f64| {
            let truth = tan_family_pole(x0, 0.5);
            let err = |n: usize| {
                let sing = build_singular(&tan_family(n), c(1.0, 0.0), n, DEFAULT_Y_MAX).unwrap();
                (locate_singularity(&sing, c(x0, 0.0), c(0.5, 0.0)).unwrap().x_sing - truth).norm()
            };
            err(2) / err(1)
        };
        let (r20, r40) = (ratio(20.0), ratio(40.0));
        assert!(r20 < 0.2, "{r20}");
        assert!(r40 / r20 > 0.35 && r40 / r20 < 0.65, "{r20} {r40}");
    }

    #[test]
    fn tan_family_series_is_closed_form() {
        let sing = build_singular(&tan_family(2), c(1.0, 0.0), 2, DEFAULT_Y_MAX).unwrap();
        let y = c(0.3, 0.4);
        let fv = sing.f_at(y).unwrap();
        let theta = c(PI / 2.0, 0.0) - y.atan();
        assert!((fv.values[0] - theta).norm() < 1e-10);
        assert!(fv.values[1].norm() < 1e-14);
        assert!((fv.values[2] + theta).norm() < 1e-10);
        assert_eq!(sing.q(), 0);
        assert!(sing.decay()[1].is_none());
        assert!((sing.decay()[2].unwrap() + 1.0).abs() < 0.2);
    }

    #[test]
    fn tail_cutoff_independence() {
        let ode = OdeSpec::abel(3).unwrap();
        let a = build_singular(&ode, c(1.0, 0.0), 3, 1e3).unwrap();
        let b = build_singular(&ode, c(1.0, 0.0), 3, 2e3).unwrap();
        let y0 = c(0.7, 0.3);
        let (fa, fb) = (a.f_at(y0).unwrap(), b.f_at(y0).unwrap());
        for k in 0..=3 {
            assert!((fa.values[k] - fb.values[k]).norm() < 1e-9, "F_{k}");
        }
    }

    #[test]
    fn abel_decay_exponents() {
        let sing = build_singular(&OdeSpec::abel(3).unwrap(), c(1.0, 0.0), 3, DEFAULT_Y_MAX).unwrap();
        assert_eq!((sing.m0(), sing.q()), (3, 2));
        let d = sing.decay();
        assert!((d[0].unwrap() + 2.0).abs() < 0.2);
        assert!((d[1].unwrap() + 4.0).abs() < 0.2, "{d:?}");
        assert!(d[2].unwrap() < -4.0 + 0.2 && d[3].unwrap() < -4.0 + 0.2, "{d:?}");
    }

    #[test]
    fn abel_partial_sums_settle() {
        let sing = build_singular(&OdeSpec::abel(6).unwrap(), c(1.0, 0.0), 6, DEFAULT_Y_MAX).unwrap();
        let x0 = c(10.0, 60.0);
        let fv = sing.f_at(c(0.7, 0.3)).unwrap();
        let terms: Vec<f64> = (1..=6).map(|k| (fv.values[k] / x0.powi(k as i32)).norm()).collect();
        for w in terms.windows(2) {
            assert!(w[1] < 0.5 * w[0], "{terms:?}");
        }
    }

    #[test]
    fn degree_and_decay_errors() {
        assert!(matches!(
            build_singular(&OdeSpec::linear_decay(1).unwrap(), c(1.0, 0.0), 1, DEFAULT_Y_MAX),
            Err(Error::DegreeTooLow { found: 1, needed: 2 })
        ));
        let ode = OdeSpec::new(
            vec![ComplexPoly::from_real(&[1.0, 0.0, 1.0]), ComplexPoly::from_real(&[0.0, 0.0, 0.0, 1.0])],
            1,
        )
        .unwrap();
        assert!(matches!(build_singular(&ode, c(1.0, 0.0), 1, DEFAULT_Y_MAX), Err(Error::DecayViolation { .. })));
    }

    #[test]
    fn abel_quoted_singularity() {
        let ode = OdeSpec::abel(2).unwrap();
        let sing = build_singular(&ode, c(1.0, 0.0), 2, DEFAULT_Y_MAX).unwrap();
        let r = locate_singularity(&sing, c(10.0, 60.0), c(0.7, 0.3)).unwrap();
        assert!((r.x_sing - c(9.80628, 60.2167)).norm() < 1e-4, "{}", r.x_sing);
        let v = verify_singularity(&ode, &r, &Tolerance::new(1e-12, 1e-14)).unwrap().verified.unwrap();
        assert!(v.digits >= 6.0, "{v:?}");
    }

    #[test]
    fn through_root_is_rejected() {
        let sing = build_singular(&OdeSpec::abel(1).unwrap(), c(1.0, 0.0), 1, DEFAULT_Y_MAX).unwrap();
        assert!(matches!(sing.f_at(c(0.2, 0.0)), Err(Error::PathThroughRoot { .. })));
    }
}
