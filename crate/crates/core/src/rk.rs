//! Dormand-Prince 5(4) on complex vector states along a path segment.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::path::Segment;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Tolerance { rel, abs }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Tolerance { rel: self.rel * factor, abs: self.abs * factor }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-10, abs: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

impl std::ops::AddAssign for Stats {
    fn add_assign(&mut self, o: Stats) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
    }
}

/// Observer verdict after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MIN_STEP: f64 = 1e-13;
const MAX_STEPS: usize = 2_000_000;

struct Stepper {
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    next: Vec<C64>,
}

impl Stepper {
    fn new(n: usize) -> Self {
        let zero = C64::new(0.0, 0.0);
        Stepper { k: std::array::from_fn(|_| vec![zero; n]), tmp: vec![zero; n], next: vec![zero; n] }
    }

    fn combine(&mut self, state: &[C64], h: f64, coeffs: &[(usize, f64)]) {
        for i in 0..state.len() {
            let mut acc = state[i];
            for &(j, a) in coeffs {
                acc += self.k[j][i] * (h * a);
            }
            self.tmp[i] = acc;
        }
    }

    /// One Dormand-Prince step from (s, state) with k[0] already holding the slope at s.
    /// Leaves the fifth-order result in `next` and its slope in k[6].
    fn attempt<R>(&mut self, rhs: &mut R, s: f64, h: f64, state: &[C64]) -> Result<()>
    where
        R: FnMut(f64, &[C64], &mut [C64]) -> Result<()>,
    {
        self.combine(state, h, &[(0, A21)]);
        rhs(s + C2 * h, &self.tmp, &mut self.k[1])?;
        self.combine(state, h, &[(0, A31), (1, A32)]);
        rhs(s + C3 * h, &self.tmp, &mut self.k[2])?;
        self.combine(state, h, &[(0, A41), (1, A42), (2, A43)]);
        rhs(s + C4 * h, &self.tmp, &mut self.k[3])?;
        self.combine(state, h, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        rhs(s + C5 * h, &self.tmp, &mut self.k[4])?;
        self.combine(state, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        rhs(s + h, &self.tmp, &mut self.k[5])?;
        self.combine(state, h, &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)]);
        std::mem::swap(&mut self.tmp, &mut self.next);
        rhs(s + h, &self.next, &mut self.k[6])?;
        Ok(())
    }

    fn error_norm(&self, state: &[C64], h: f64, tol: &Tolerance) -> f64 {
        let k = &self.k;
        let mut e: f64 = 0.0;
        for i in 0..state.len() {
            let est = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6
                + k[6][i] * E7)
                * h;
            let sc = tol.abs + tol.rel * state[i].norm().max(self.next[i].norm());
            e = e.max(est.norm() / sc);
        }
        if e.is_finite() && self.next.iter().all(|v| v.is_finite()) {
            e
        } else {
            f64::INFINITY
        }
    }
}

fn scaled_rhs<'a, F>(seg: &'a Segment, f: &'a mut F) -> impl FnMut(f64, &[C64], &mut [C64]) -> Result<()> + 'a
where
    F: FnMut(C64, &[C64], &mut [C64]) -> Result<()>,
{
    move |s, u, out| {
        f(seg.point(s), u, out)?;
        let t = seg.tangent(s);
        for o in out.iter_mut() {
            *o *= t;
        }
        Ok(())
    }
}

/// Integrates dU/dz = f(z, U) along `seg` (z = seg.point(s), s from 0 to 1).
///
/// `f` writes dU/dz. `observe` sees every accepted step end `(s, z, U)` and may stop the run;
/// the return value is the final parameter s reached.
/// `stops` lists parameters the integrator must land on exactly (ascending, inside (0, 1]).
pub fn integrate_segment<F, O>(
    seg: &Segment,
    state: &mut [C64],
    tol: &Tolerance,
    stops: &[f64],
    mut f: F,
    mut observe: O,
) -> Result<(f64, Stats)>
where
    F: FnMut(C64, &[C64], &mut [C64]) -> Result<()>,
    O: FnMut(f64, C64, &[C64]) -> Result<Flow>,
{
    let n = state.len();
    let mut stats = Stats::default();
    let mut st = Stepper::new(n);
    let mut rhs = scaled_rhs(seg, &mut f);

    let mut s = 0.0;
    rhs(s, state, &mut st.k[0])?;

    // Initial step from the derivative scale (Hairer, Norsett & Wanner, II.4).
    let mut h = {
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for i in 0..n {
            let sc = tol.abs + tol.rel * state[i].norm();
            d0 = d0.max(state[i].norm() / sc);
            d1 = d1.max(st.k[0][i].norm() / sc);
        }
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-3 } else { 0.01 * d0 / d1 };
        h0.clamp(1e-6, 0.1)
    };

    // Compensated accumulation: loops return F_k to values far below their excursions.
    let mut comp = vec![C64::new(0.0, 0.0); n];
    let mut stop_idx = 0;
    let mut steps = 0usize;
    while s < 1.0 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::StepUnderflow { x: seg.point(s) });
        }
        while stop_idx < stops.len() && stops[stop_idx] <= s {
            stop_idx += 1;
        }
        let target = if stop_idx < stops.len() { stops[stop_idx].min(1.0) } else { 1.0 };
        let landing = s + h >= target - 1e-14;
        let h_try = if landing { target - s } else { h };

        let err = match st.attempt(&mut rhs, s, h_try, state) {
            Ok(()) => st.error_norm(state, h_try, tol),
            // A stage left the admissible region: reject and shrink.
            Err(Error::NearRoot { .. }) | Err(Error::BlowupDetected { .. }) if h_try > MIN_STEP => {
                f64::INFINITY
            }
            Err(e) => return Err(e),
        };

        if err <= 1.0 {
            stats.accepted += 1;
            s = if landing { target } else { s + h_try };
            for i in 0..n {
                let k = &st.k;
                let inc = (k[0][i] * B1 + k[2][i] * B3 + k[3][i] * B4 + k[4][i] * B5 + k[5][i] * B6) * h_try;
                let y = inc - comp[i];
                let t = state[i] + y;
                comp[i] = (t - state[i]) - y;
                state[i] = t;
            }
            st.k.swap(0, 6);
            if observe(s, seg.point(s), state)? == Flow::Stop {
                return Ok((s, stats));
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = if landing { h.max(h_try * fac) } else { h_try * fac };
        } else {
            stats.rejected += 1;
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) } else { 0.25 };
            h = h_try * fac;
            if h < MIN_STEP {
                return Err(Error::StepUnderflow { x: seg.point(s) });
            }
        }
    }
    Ok((s, stats))
}

/// Fixed-step fifth-order integration, used to measure convergence order.
pub fn integrate_fixed<F>(seg: &Segment, state: &mut [C64], steps: usize, mut f: F) -> Result<()>
where
    F: FnMut(C64, &[C64], &mut [C64]) -> Result<()>,
{
    let mut st = Stepper::new(state.len());
    let mut rhs = scaled_rhs(seg, &mut f);
    let h = 1.0 / steps as f64;
    rhs(0.0, state, &mut st.k[0])?;
    for i in 0..steps {
        st.attempt(&mut rhs, i as f64 * h, h, state)?;
        state.copy_from_slice(&st.next);
        st.k.swap(0, 6);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exponential_along_real_line() {
        let seg = Segment::line(c(0.0, 0.0), c(5.0, 0.0));
        let mut u = vec![c(1.0, 0.0)];
        integrate_segment(&seg, &mut u, &Tolerance::default(), &[], |_, y, d| {
            d[0] = -y[0];
            Ok(())
        }, |_, _, _| Ok(Flow::Continue))
        .unwrap();
        assert!((u[0] - c((-5.0f64).exp(), 0.0)).norm() < 1e-10);
    }

    #[test]
    fn complex_direction_and_arc() {
        // y' = i y around a full circle of radius 1 centred at 0: y(z) = exp(i z), single valued.
        let seg = Segment::arc(c(0.0, 0.0), 1.0, 0.0, 2.0 * std::f64::consts::PI);
        let mut u = vec![C64::new(0.0, 1.0).exp()];
        integrate_segment(&seg, &mut u, &Tolerance::default(), &[], |_, y, d| {
            d[0] = C64::i() * y[0];
            Ok(())
        }, |_, _, _| Ok(Flow::Continue))
        .unwrap();
        assert!((u[0] - C64::new(0.0, 1.0).exp()).norm() < 1e-9);
    }

    #[test]
    fn lands_on_requested_stops() {
        let seg = Segment::line(c(0.0, 0.0), c(1.0, 1.0));
        let mut u = vec![c(0.0, 0.0)];
        let mut seen = Vec::new();
        integrate_segment(&seg, &mut u, &Tolerance::default(), &[0.25, 0.5, 0.75], |_, _, d| {
            d[0] = c(1.0, 0.0);
            Ok(())
        }, |s, _, _| {
            seen.push(s);
            Ok(Flow::Continue)
        })
        .unwrap();
        for t in [0.25, 0.5, 0.75, 1.0] {
            assert!(seen.contains(&t), "{seen:?}");
        }
        assert!((u[0] - c(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn fixed_step_order_is_five() {
        let run = |steps: usize| {
            let seg = Segment::line(c(0.0, 0.0), c(5.0, 2.0));
            let mut u = vec![c(1.0, 0.0)];
            integrate_fixed(&seg, &mut u, steps, |_, y, d| {
                d[0] = -y[0];
                Ok(())
            })
            .unwrap();
            (u[0] - C64::new(-5.0, -2.0).exp()).norm()
        };
        let ratio = run(40) / run(80);
        assert!(ratio > 8.0 && ratio < 128.0, "ratio {ratio}");
    }

    #[test]
    fn tighter_tolerance_gives_smaller_error() {
        let run = |rel: f64| {
            let seg = Segment::line(c(0.0, 0.0), c(5.0, 0.0));
            let mut u = vec![c(1.0, 0.0)];
            integrate_segment(&seg, &mut u, &Tolerance::new(rel, rel * 1e-2), &[], |_, y, d| {
                d[0] = -y[0];
                Ok(())
            }, |_, _, _| Ok(Flow::Continue))
            .unwrap();
            (u[0].re - (-5.0f64).exp()).abs()
        };
        assert!(run(1e-9) < run(1e-6));
    }
}
