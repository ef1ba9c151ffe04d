use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::poly::{ComplexPoly, RootSet};

pub const MAX_ORDER: usize = 8;

/// y' = sum_k P_k(y) / x^k with finitely many P_k, plus the truncation order n.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSpec {
    polys: Vec<ComplexPoly>,
    dpolys: Vec<ComplexPoly>,
    n: usize,
    roots: RootSet,
}

impl OdeSpec {
    pub fn new(polys: Vec<ComplexPoly>, n: usize) -> Result<Self> {
        if polys.is_empty() {
            return Err(Error::InvalidInput("P_0 is missing".into()));
        }
        if !(1..=MAX_ORDER).contains(&n) {
            return Err(Error::InvalidInput(format!("truncation order {n} outside 1..={MAX_ORDER}")));
        }
        if polys.iter().flat_map(|p| p.coeffs()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        let p0 = &polys[0];
        if p0.degree() < 1 {
            return Err(Error::DegreeTooLow { found: p0.degree(), needed: 1 });
        }
        let roots = p0.roots(1e-15)?;
        let mut polys = polys;
        while polys.len() > 1 && polys.last().is_some_and(|p| p.is_zero()) {
            polys.pop();
        }
        let dpolys = polys.iter().map(|p| p.derivative()).collect();
        Ok(OdeSpec { polys, dpolys, n, roots })
    }

    /// The normalised Abel equation y' = -3y^3 + 1/9 - y/(5x).
    pub fn abel(n: usize) -> Result<Self> {
        Self::new(
            vec![ComplexPoly::from_real(&[1.0 / 9.0, 0.0, 0.0, -3.0]), ComplexPoly::from_real(&[0.0, -0.2])],
            n,
        )
    }

    /// y' = -y.
    pub fn linear_decay(n: usize) -> Result<Self> {
        Self::new(vec![ComplexPoly::from_real(&[0.0, -1.0])], n)
    }

    /// y' = y^2 + 1, whose solutions are tan(x - c).
    pub fn riccati(n: usize) -> Result<Self> {
        Self::new(vec![ComplexPoly::from_real(&[1.0, 0.0, 1.0])], n)
    }

    pub fn with_order(&self, n: usize) -> Result<Self> {
        Self::new(self.polys.clone(), n)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Index of the last nonzero P_k.
    pub fn k_max(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn polys(&self) -> &[ComplexPoly] {
        &self.polys
    }

    pub fn p0(&self) -> &ComplexPoly {
        &self.polys[0]
    }

    /// P_k(y), zero beyond the last stored polynomial.
    pub fn p_at(&self, k: usize, y: C64) -> C64 {
        self.polys.get(k).map_or(C64::new(0.0, 0.0), |p| p.eval(y))
    }

    pub fn dp_at(&self, k: usize, y: C64) -> C64 {
        self.dpolys.get(k).map_or(C64::new(0.0, 0.0), |p| p.eval(y))
    }

    pub fn roots(&self) -> &RootSet {
        &self.roots
    }

    pub fn eps_root(&self) -> f64 {
        self.roots.eps_root()
    }

    /// Q_1(y, 1/x) = sum_k P_k(y) x^-k.
    pub fn rhs(&self, x: C64, y: C64) -> C64 {
        let w = 1.0 / x;
        let mut it = self.polys.iter().rev();
        let last = it.next().map_or(C64::new(0.0, 0.0), |p| p.eval(y));
        it.fold(last, |acc, p| acc * w + p.eval(y))
    }

    /// d/dy of Q_1.
    pub fn rhs_dy(&self, x: C64, y: C64) -> C64 {
        let w = 1.0 / x;
        let mut it = self.dpolys.iter().rev();
        let last = it.next().map_or(C64::new(0.0, 0.0), |p| p.eval(y));
        it.fold(last, |acc, p| acc * w + p.eval(y))
    }

    /// Fails with NearRoot when y is inside the clearance disc of a root.
    pub fn check_clear(&self, y: C64) -> Result<()> {
        let (j, d) = self.roots.nearest(y);
        if d < self.eps_root() * (1.0 - 1e-9) {
            return Err(Error::NearRoot { y, root: j });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abel_rhs() {
        let ode = OdeSpec::abel(2).unwrap();
        let (x, y) = (C64::new(10.0, 1.0), C64::new(0.5, 0.2));
        let direct = -3.0 * y * y * y + 1.0 / 9.0 - y / (5.0 * x);
        assert!((ode.rhs(x, y) - direct).norm() < 1e-15);
        let d = -9.0 * y * y - 1.0 / (5.0 * x);
        assert!((ode.rhs_dy(x, y) - d).norm() < 1e-15);
        assert_eq!(ode.k_max(), 1);
        assert!((ode.eps_root() - 0.05 * 3f64.sqrt() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(
            OdeSpec::new(vec![ComplexPoly::from_real(&[2.0])], 2),
            Err(Error::DegreeTooLow { .. })
        ));
        assert!(matches!(
            OdeSpec::new(vec![ComplexPoly::from_real(&[1.0, -2.0, 1.0])], 2),
            Err(Error::MultipleRoot { .. })
        ));
        assert!(OdeSpec::linear_decay(0).is_err());
        assert!(OdeSpec::linear_decay(9).is_err());
    }

    #[test]
    fn near_root_check() {
        let ode = OdeSpec::abel(2).unwrap();
        assert!(ode.check_clear(C64::new(0.34, 0.0)).is_err());
        assert!(ode.check_clear(C64::new(1.0, 0.0)).is_ok());
    }
}
