use num_complex::Complex64 as C64;

use crate::ode::OdeSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub root: C64,
    /// e^{it} P_0'(p), the linearised rate along the ray.
    pub rate: C64,
    pub stability: Stability,
}

/// Rectangular grid in the y-plane, `n` points per axis including the ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub n: usize,
}

impl Default for PhaseGrid {
    fn default() -> Self {
        PhaseGrid { re: (-0.8, 0.8), im: (-0.8, 0.8), n: 21 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    pub t: f64,
    pub x: C64,
    /// (y, dy/ds) at every grid point.
    pub samples: Vec<(C64, C64)>,
    pub equilibria: Vec<Equilibrium>,
}

/// The real 2-d field of dy/ds = e^{it} Q_1(y, 1/(x0 + s e^{it})) at one s.
pub fn phase_field(ode: &OdeSpec, x0: C64, t: f64, s: f64, grid: &PhaseGrid) -> PhaseField {
    let dir = C64::from_polar(1.0, t);
    let x = x0 + dir * s;
    let n = grid.n.max(2);
    let mut samples = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let re = grid.re.0 + (grid.re.1 - grid.re.0) * i as f64 / (n - 1) as f64;
            let im = grid.im.0 + (grid.im.1 - grid.im.0) * j as f64 / (n - 1) as f64;
            let y = C64::new(re, im);
            let v = if x == C64::new(0.0, 0.0) { ode.p_at(0, y) } else { ode.rhs(x, y) };
            samples.push((y, dir * v));
        }
    }
    let equilibria = ode
        .roots()
        .roots()
        .iter()
        .map(|&p| {
            let d = ode.dp_at(0, p);
            let rate = dir * d;
            let stability = if rate.re.abs() <= 1e-12 * d.norm() {
                Stability::Marginal
            } else if rate.re < 0.0 {
                Stability::Stable
            } else {
                Stability::Unstable
            };
            Equilibrium { root: p, rate, stability }
        })
        .collect();
    PhaseField { t, x, samples, equilibria }
}
