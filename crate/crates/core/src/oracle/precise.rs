//! Multiprecision Taylor-series integration along straight x-segments.
//!
//! The reference for trajectories that pass exponentially close to the roots of P_0, where a
//! double-precision integrator loses the exponentially small component that decides which root
//! is visited next.

use dashu_float::FBig;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ode::OdeSpec;
use crate::oracle::BLOWUP;
use crate::path::{Path, Plane, Segment};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreciseOptions {
    /// Working precision in bits.
    pub bits: usize,
    /// Taylor order per step.
    pub order: usize,
    /// Step as a fraction of the estimated radius of convergence.
    pub step_factor: f64,
    /// Extra double-precision evaluations of each step's polynomial.
    pub substeps: usize,
}

impl Default for PreciseOptions {
    fn default() -> Self {
        PreciseOptions { bits: 192, order: 40, step_factor: 0.1, substeps: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreciseSample {
    pub segment: usize,
    pub x: C64,
    pub y: C64,
}

#[derive(Clone, Debug)]
struct Cx {
    re: FBig,
    im: FBig,
}

impl Cx {
    fn add(&self, o: &Cx) -> Cx {
        Cx { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    fn sub(&self, o: &Cx) -> Cx {
        Cx { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    fn mul(&self, o: &Cx) -> Cx {
        Cx { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }

    fn scale(&self, s: &FBig) -> Cx {
        Cx { re: &self.re * s, im: &self.im * s }
    }

    fn div(&self, o: &Cx) -> Cx {
        let d = &o.re * &o.re + &o.im * &o.im;
        Cx { re: (&self.re * &o.re + &self.im * &o.im) / &d, im: (&self.im * &o.re - &self.re * &o.im) / &d }
    }

    fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64().value(), self.im.to_f64().value())
    }
}

struct Ctx {
    bits: usize,
}

impl Ctx {
    fn real(&self, v: f64) -> FBig {
        FBig::try_from(v).expect("finite").with_precision(self.bits).value()
    }

    fn int(&self, n: i64) -> FBig {
        FBig::from(n).with_precision(self.bits).value()
    }

    fn cx(&self, z: C64) -> Cx {
        Cx { re: self.real(z.re), im: self.real(z.im) }
    }

    fn zero(&self) -> Cx {
        self.cx(C64::new(0.0, 0.0))
    }
}

/// Coefficients of y(t0 + tau) in tau along x = a + d t.
fn taylor_coefficients(ctx: &Ctx, polys: &[Vec<Cx>], x0: &Cx, d: &Cx, y: &Cx, order: usize) -> Vec<Cx> {
    let n_terms = order + 1;
    let one = ctx.cx(C64::new(1.0, 0.0));
    let kmax = polys.len() - 1;
    // 1/x(t0 + tau) = (1/x0) sum (-d/x0)^k tau^k
    let mut z = Vec::with_capacity(n_terms);
    if kmax > 0 {
        let inv = one.div(x0);
        let ratio = ctx.zero().sub(d).mul(&inv);
        z.push(inv);
        for k in 1..n_terms {
            let next = z[k - 1].mul(&ratio);
            z.push(next);
        }
    }
    // powers 1/x^j as series
    let mut zpow: Vec<Vec<Cx>> = Vec::with_capacity(kmax + 1);
    let mut unit = vec![ctx.zero(); n_terms];
    unit[0] = one.clone();
    zpow.push(unit);
    for j in 1..=kmax {
        let prev = &zpow[j - 1];
        let mut s = vec![ctx.zero(); n_terms];
        for (n, sn) in s.iter_mut().enumerate() {
            let mut acc = ctx.zero();
            for m in 0..=n {
                acc = acc.add(&prev[m].mul(&z[n - m]));
            }
            *sn = acc;
        }
        zpow.push(s);
    }
    // Horner stages per polynomial, filled one coefficient at a time.
    let mut stages: Vec<Vec<Vec<Cx>>> =
        polys.iter().map(|c| vec![Vec::with_capacity(n_terms); c.len()]).collect();
    let mut ys = vec![y.clone()];
    let mut values: Vec<Vec<Cx>> = vec![Vec::with_capacity(n_terms); polys.len()];
    for n in 0..order {
        for (j, coeffs) in polys.iter().enumerate() {
            let deg = coeffs.len() - 1;
            let st = &mut stages[j];
            // stage 0 is the leading coefficient as a constant series
            let lead = if n == 0 { coeffs[deg].clone() } else { ctx.zero() };
            st[0].push(lead);
            for i in 1..=deg {
                let mut acc = ctx.zero();
                for m in 0..=n {
                    acc = acc.add(&st[i - 1][m].mul(&ys[n - m]));
                }
                if n == 0 {
                    acc = acc.add(&coeffs[deg - i]);
                }
                st[i].push(acc);
            }
            let top = st[deg][n].clone();
            values[j].push(top);
        }
        let mut rhs = ctx.zero();
        for (j, v) in values.iter().enumerate() {
            for m in 0..=n {
                rhs = rhs.add(&v[m].mul(&zpow[j][n - m]));
            }
        }
        let next = d.mul(&rhs).scale(&(ctx.int(1) / ctx.int(n as i64 + 1)));
        ys.push(next);
    }
    ys
}

/// Taylor integration of y' = Q_1(y, 1/x) along a polyline, sampled at every step and at
/// `substeps` points inside each step.
pub fn taylor_trajectory(ode: &OdeSpec, path: &Path, y0: C64, opts: &PreciseOptions) -> Result<Vec<PreciseSample>> {
    if path.plane() != Plane::X {
        return Err(Error::InvalidInput("trajectories run along x-plane paths".into()));
    }
    if opts.order < 4 || opts.bits < 64 || !(opts.step_factor > 0.0 && opts.step_factor < 1.0) {
        return Err(Error::InvalidInput("precise integrator needs order >= 4, bits >= 64, 0 < step_factor < 1".into()));
    }
    let ctx = Ctx { bits: opts.bits };
    let polys: Vec<Vec<Cx>> = ode
        .polys()
        .iter()
        .map(|p| if p.coeffs().is_empty() { vec![ctx.zero()] } else { p.coeffs().iter().map(|&c| ctx.cx(c)).collect() })
        .collect();
    let mut y = ctx.cx(y0);
    let mut out = vec![PreciseSample { segment: 0, x: path.start(), y: y0 }];
    let n = opts.order;
    for (si, seg) in path.segments().iter().enumerate() {
        let (a, b) = match *seg {
            Segment::Line { from, to } => (from, to),
            Segment::Arc { .. } => return Err(Error::InvalidInput("precise integrator takes straight segments".into())),
        };
        let (ac, dc) = (ctx.cx(a), ctx.cx(b - a));
        let mut t = ctx.real(0.0);
        loop {
            let tf = t.to_f64().value();
            if tf >= 1.0 {
                break;
            }
            let x0 = ac.add(&dc.scale(&t));
            let ys = taylor_coefficients(&ctx, &polys, &x0, &dc, &y, n);
            let mag = |k: usize| {
                let v = ys[k].to_c64().norm();
                if v > 0.0 {
                    v.powf(-1.0 / k as f64)
                } else {
                    f64::INFINITY
                }
            };
            let rho = mag(n).min(mag(n - 1));
            let h = if rho.is_finite() { opts.step_factor * rho } else { 1.0 };
            let last = tf + h >= 1.0;
            let hh = if last { ctx.real(1.0) - &t } else { ctx.real(h) };
            let hf = hh.to_f64().value();
            if hf < 1e-13 && !last {
                return Err(Error::StepUnderflow { x: x0.to_c64() });
            }
            // double-precision views for the interior samples
            let coeffs: Vec<C64> = ys.iter().map(|c| c.to_c64()).collect();
            for k in 1..opts.substeps {
                let tau = hf * k as f64 / opts.substeps as f64;
                let yk = coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * tau + c);
                out.push(PreciseSample { segment: si, x: a + (b - a) * (tf + tau), y: yk });
            }
            let mut acc = ys[n].clone();
            for k in (0..n).rev() {
                acc = acc.scale(&hh).add(&ys[k]);
            }
            y = acc;
            t = if last { ctx.real(1.0) } else { &t + &hh };
            let yc = y.to_c64();
            let xc = a + (b - a) * t.to_f64().value();
            if !yc.is_finite() || yc.norm() > BLOWUP {
                return Err(Error::BlowupDetected { x: xc, y: yc });
            }
            out.push(PreciseSample { segment: si, x: xc, y: yc });
        }
    }
    Ok(out)
}
