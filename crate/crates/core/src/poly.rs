//! Complex polynomials, simultaneous root finding and residues at simple roots.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 500;

/// Polynomial with complex coefficients stored in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoly {
    coeffs: Vec<C64>,
}

impl ComplexPoly {
    /// Trailing zero coefficients are dropped; an empty list is the zero polynomial.
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        ComplexPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    /// Monic-free product form `lead * prod (y - r)`.
    pub fn from_roots(lead: C64, roots: &[C64]) -> Self {
        let mut coeffs = vec![lead];
        for &r in roots {
            let mut next = vec![C64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == C64::new(0.0, 0.0)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, y: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * y + c)
    }

    /// Value and first derivative in one pass.
    pub fn eval_d(&self, y: C64) -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * y + p;
            p = p * y + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Threshold below which |P'(p)| marks a root as not simple.
    pub fn simplicity_threshold(&self, p: C64) -> f64 {
        let deg = self.degree().max(1);
        1e-8 * self.max_coeff() * (1.0 + p.norm()).powi(deg as i32 - 1)
    }

    pub fn roots(&self, tol: f64) -> Result<RootSet> {
        poly_roots(self, tol)
    }
}

/// Horner evaluation, kept as a free function for symmetry with the other operations.
pub fn poly_eval(p: &ComplexPoly, y: C64) -> C64 {
    p.eval(y)
}

/// Simple roots of a polynomial, in order of increasing argument in [0, 2pi).
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    roots: Vec<C64>,
    min_separation: f64,
    margins: Vec<f64>,
}

impl RootSet {
    pub fn roots(&self) -> &[C64] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn get(&self, i: usize) -> C64 {
        self.roots[i]
    }

    /// Smallest pairwise distance; 1 by convention when there is a single root.
    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    /// |P'(p_j)| divided by the simplicity threshold; all entries exceed 1.
    pub fn simplicity_margins(&self) -> &[f64] {
        &self.margins
    }

    /// Default clearance radius around roots.
    pub fn eps_root(&self) -> f64 {
        0.05 * self.min_separation
    }

    /// Index of and distance to the closest root.
    pub fn nearest(&self, y: C64) -> (usize, f64) {
        self.roots
            .iter()
            .enumerate()
            .map(|(i, &p)| (i, (y - p).norm()))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }

    /// Index of the root closest to `y`, for looking roots up by approximate value.
    pub fn index_of(&self, y: C64) -> usize {
        self.nearest(y).0
    }
}

fn initial_guesses(p: &ComplexPoly) -> Vec<C64> {
    let n = p.degree();
    let lead = p.leading();
    let centre = -p.coeffs()[n - 1] / (lead * n as f64);
    let mut radius = (p.eval(centre).norm() / lead.norm()).powf(1.0 / n as f64);
    if !(radius.is_finite() && radius > 0.0) {
        radius = 1.0;
    }
    (0..n)
        .map(|k| centre + C64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect()
}

/// Aberth iteration from a ring of starting points around the root centroid.
pub fn poly_roots(p: &ComplexPoly, tol: f64) -> Result<RootSet> {
    let n = p.degree();
    if n == 0 {
        return Err(Error::DegreeTooLow { found: 0, needed: 1 });
    }
    let mut z = initial_guesses(p);
    let mut converged = n == 1;
    if n == 1 {
        z[0] = -p.coeffs()[0] / p.coeffs()[1];
    }
    let mut done = vec![n == 1; n];
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (v, dv) = p.eval_d(z[k]);
            // Stop once |P| is at the rounding level of the evaluation itself.
            let noise = p.coeffs().iter().rev().fold(0.0, |acc, c| acc * z[k].norm() + c.norm());
            if v.norm() <= 8.0 * n as f64 * f64::EPSILON * noise {
                done[k] = true;
                continue;
            }
            let ratio = v / dv;
            let repulsion: C64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| 1.0 / (z[k] - z[j]))
                .sum();
            let w = ratio / (1.0 - ratio * repulsion);
            if !w.is_finite() {
                continue;
            }
            z[k] -= w;
            if w.norm() <= tol * (1.0 + z[k].norm()) {
                done[k] = true;
            }
        }
        converged = done.iter().all(|&d| d);
    }
    // Newton polish; harmless at simple roots, bounded at clustered ones.
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let (v, dv) = p.eval_d(*zk);
            let step = v / dv;
            if step.is_finite() && step.norm() < 1e-3 * (1.0 + zk.norm()) {
                *zk -= step;
            }
        }
    }
    let dp = p.derivative();
    let mut margins = Vec::with_capacity(n);
    for (k, &r) in z.iter().enumerate() {
        let d = dp.eval(r).norm();
        let threshold = p.simplicity_threshold(r);
        let crowded = z
            .iter()
            .enumerate()
            .any(|(j, &s)| j != k && (s - r).norm() < 1e-6 * (1.0 + r.norm()));
        if d < threshold || crowded {
            return Err(Error::MultipleRoot { root: r, derivative: d });
        }
        margins.push(d / threshold);
    }
    if !converged || z.iter().any(|r| !r.is_finite()) {
        return Err(Error::NoConvergence { iterations: MAX_SWEEPS });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let angle = |r: C64| {
        let t = r.arg().rem_euclid(2.0 * PI);
        if t > 2.0 * PI - 1e-9 {
            0.0
        } else {
            t
        }
    };
    order.sort_by(|&i, &j| {
        let key = |r: C64| (angle(r), r.norm());
        key(z[i]).partial_cmp(&key(z[j])).unwrap()
    });
    let roots: Vec<C64> = order.iter().map(|&i| z[i]).collect();
    let margins = order.iter().map(|&i| margins[i]).collect();
    let mut min_separation = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            min_separation = min_separation.min((roots[i] - roots[j]).norm());
        }
    }
    if n == 1 {
        min_separation = 1.0;
    }
    Ok(RootSet { roots, min_separation, margins })
}

/// Pole order handled by [`residue`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleOrder {
    /// Residue of num/den.
    Simple,
    /// Residue of num/den^2.
    Double,
}

/// Residue of num/den (or num/den^2) at a simple root of den.
pub fn residue(num: &ComplexPoly, den_root: C64, den: &ComplexPoly, order: PoleOrder) -> Result<C64> {
    let d1 = den.derivative();
    let dp = d1.eval(den_root);
    if dp.norm() < den.simplicity_threshold(den_root) {
        return Err(Error::DegeneratePole { at: den_root, derivative: dp.norm() });
    }
    Ok(match order {
        PoleOrder::Simple => num.eval(den_root) / dp,
        PoleOrder::Double => {
            let d2 = d1.derivative().eval(den_root);
            let (nv, nd) = num.eval_d(den_root);
            nd / (dp * dp) - nv * d2 / (dp * dp * dp)
        }
    })
}
