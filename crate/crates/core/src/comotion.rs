//! Formal constants of motion C_n = A(x) + F_0(y) + sum F_k(y)/x^k.
//!
//! The F_k are never written in closed form. They are the components of a coupled ODE in y,
//! integrated along explicit y-paths, so every value is an analytic continuation whose result
//! depends on the homotopy class of the path.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ode::OdeSpec;
use crate::path::{deform_path, Contour, Path, Plane};
use crate::rk::{integrate_segment, Flow, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// A(x) = -x + a log x, F'_0 = 1/P_0.
    RDomain,
    /// A(x) = x, F'_0 = -1/P_0, F_k vanishing at infinity.
    Singular,
}

impl Kind {
    fn sign(self) -> f64 {
        match self {
            Kind::RDomain => 1.0,
            Kind::Singular => -1.0,
        }
    }
}

/// F_0..F_n and their y-derivatives at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FVector {
    pub y: C64,
    pub values: Vec<C64>,
    pub derivs: Vec<C64>,
}

impl FVector {
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }
}

/// The F-recursion for one ODE, kind, log coefficient and order.
#[derive(Debug, Clone, Copy)]
pub struct FSystem<'a> {
    pub ode: &'a OdeSpec,
    pub kind: Kind,
    pub a: C64,
    pub n: usize,
}

impl<'a> FSystem<'a> {
    pub fn new(ode: &'a OdeSpec, kind: Kind, a: C64, n: usize) -> Self {
        FSystem { ode, kind, a, n }
    }

    /// F'_k from F_0..F_{k-1}, ascending in k.
    pub fn derivative_into(&self, y: C64, values: &[C64], out: &mut [C64]) -> Result<()> {
        self.ode.check_clear(y)?;
        let p0 = self.ode.p_at(0, y);
        let pk: Vec<C64> = (0..=self.n).map(|k| self.ode.p_at(k, y)).collect();
        out[0] = self.kind.sign() / p0;
        for k in 1..=self.n {
            let mut num = values[k - 1] * (k as f64 - 1.0);
            for j in 0..k {
                num -= pk[k - j] * out[j];
            }
            if k == 1 && self.kind == Kind::RDomain {
                num -= self.a;
            }
            out[k] = num / p0;
        }
        Ok(())
    }

    pub fn derivative(&self, y: C64, values: &[C64]) -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); self.n + 1];
        self.derivative_into(y, values, &mut out)?;
        Ok(out)
    }

    pub fn fvector(&self, y: C64, values: Vec<C64>) -> Result<FVector> {
        if values.len() != self.n + 1 {
            return Err(Error::InvalidInput(format!("expected {} F-values, got {}", self.n + 1, values.len())));
        }
        let derivs = self.derivative(y, &values)?;
        Ok(FVector { y, values, derivs })
    }

    /// Continues F along `path`; returns the F-vector at the start and at every segment end.
    pub fn integrate(&self, path: &Path, start: &FVector, tol: &Tolerance) -> Result<Vec<FVector>> {
        if path.plane() != Plane::Y {
            return Err(Error::InvalidInput("F is continued along y-plane paths".into()));
        }
        if (path.start() - start.y).norm() > 1e-12 * (1.0 + start.y.norm()) {
            return Err(Error::InvalidInput(format!(
                "path starts at {} but the F-vector sits at {}",
                path.start(),
                start.y
            )));
        }
        let roots = self.ode.roots();
        let (j, d) = path.clearance(roots.roots());
        if d < self.ode.eps_root() * (1.0 - 1e-9) {
            return Err(Error::NearRoot { y: roots.get(j), root: j });
        }
        let mut out = vec![start.clone()];
        let mut state = start.values.clone();
        for seg in path.segments() {
            integrate_segment(
                seg,
                &mut state,
                tol,
                &[],
                |y, u, du| self.derivative_into(y, u, du),
                |_, _, _| Ok(Flow::Continue),
            )
            .map_err(|e| match e {
                Error::StepUnderflow { x } => Error::StepFailure { at: x },
                other => other,
            })?;
            out.push(self.fvector(seg.end(), state.clone())?);
        }
        Ok(out)
    }

    pub fn continue_along(&self, path: &Path, start: &FVector, tol: &Tolerance) -> Result<FVector> {
        Ok(self.integrate(path, start, tol)?.pop().expect("at least one entry"))
    }

    /// Straight segment from `start.y` to `to`, detouring left around roots.
    pub fn continue_to(&self, start: &FVector, to: C64, tol: &Tolerance) -> Result<FVector> {
        if to == start.y {
            return Ok(start.clone());
        }
        let line = Path::line(Plane::Y, start.y, to)?;
        let path = deform_path(&line, self.ode.roots(), self.ode.eps_root())?;
        self.continue_along(&path, start, tol)
    }

    /// Increments of F_0..F_n around the based loop of `contour`.
    pub fn monodromy(&self, contour: &Contour, start: &FVector, tol: &Tolerance) -> Result<Vec<C64>> {
        let lp = contour.loop_path(start.y, self.ode.roots())?;
        let end = self.continue_along(&lp, start, tol)?;
        Ok(end.values.iter().zip(&start.values).map(|(e, s)| e - s).collect())
    }
}

pub fn f_derivative(ode: &OdeSpec, kind: Kind, a: C64, y: C64, values: &[C64]) -> Result<Vec<C64>> {
    if values.is_empty() {
        return Err(Error::InvalidInput("empty F list".into()));
    }
    FSystem::new(ode, kind, a, values.len() - 1).derivative(y, values)
}

pub fn integrate_f(
    ode: &OdeSpec,
    kind: Kind,
    a: C64,
    path: &Path,
    start: &FVector,
    tol: &Tolerance,
) -> Result<Vec<FVector>> {
    FSystem::new(ode, kind, a, start.order()).integrate(path, start, tol)
}

pub fn monodromy(
    ode: &OdeSpec,
    kind: Kind,
    a: C64,
    start: &FVector,
    contour: &Contour,
    tol: &Tolerance,
) -> Result<Vec<C64>> {
    FSystem::new(ode, kind, a, start.order()).monodromy(contour, start, tol)
}

fn loop_scale(ode: &OdeSpec, contour: &Contour) -> f64 {
    let d = ode.p0().derivative();
    ode.roots()
        .roots()
        .iter()
        .enumerate()
        .map(|(j, &p)| 2.0 * PI * contour.winding()[j].unsigned_abs() as f64 / d.eval(p).norm())
        .sum()
}

fn raw_a(ode: &OdeSpec, contour: &Contour, base_y: C64, tol: &Tolerance) -> Result<C64> {
    let sys = FSystem::new(ode, Kind::RDomain, C64::new(0.0, 0.0), 1);
    let start = sys.fvector(base_y, vec![C64::new(0.0, 0.0); 2])?;
    let m = sys.monodromy(contour, &start, tol)?;
    if m[0].norm() < 1e-8 * loop_scale(ode, contour) {
        return Err(Error::ZeroDenominator { value: m[0] });
    }
    // With a = 0, the F_1 increment is -oint P_1/P_0^2.
    Ok(m[1] / m[0])
}

/// Log coefficient a = -oint(P_1/P_0^2) / oint(1/P_0), checked at a tighter tolerance.
pub fn solve_a(ode: &OdeSpec, contour: &Contour, base_y: C64, tol: &Tolerance) -> Result<C64> {
    let a = raw_a(ode, contour, base_y, tol)?;
    let fine = raw_a(ode, contour, base_y, &tol.scaled(1.0 / 32.0))?;
    if (a - fine).norm() > 1e-9 * a.norm().max(1.0) {
        return Err(Error::QuadratureMismatch {
            detail: format!("a = {a} at working tolerance, {fine} refined"),
        });
    }
    Ok(fine)
}

/// c_k making the F_{k+1} increment vanish, given F_0..F_{k-1} at the base point.
///
/// The increment is affine in c_k with slope k * oint(1/P_0); two evaluations fix it.
pub fn solve_c(
    ode: &OdeSpec,
    contour: &Contour,
    a: C64,
    base_y: C64,
    fixed: &[C64],
    k: usize,
    tol: &Tolerance,
) -> Result<C64> {
    if k == 0 || fixed.len() != k {
        return Err(Error::InvalidInput(format!("solve_c(k={k}) needs F_0..F_{} fixed", k as i64 - 1)));
    }
    let sys = FSystem::new(ode, Kind::RDomain, a, k + 1);
    let run = |ck: f64| -> Result<Vec<C64>> {
        let mut v = fixed.to_vec();
        v.push(C64::new(ck, 0.0));
        v.push(C64::new(0.0, 0.0));
        let start = sys.fvector(base_y, v)?;
        sys.monodromy(contour, &start, tol)
    };
    let m0 = run(0.0)?;
    let m1 = run(1.0)?;
    let slope = m1[k + 1] - m0[k + 1];
    let expected = m0[0] * k as f64;
    if expected.norm() < 1e-8 * loop_scale(ode, contour) {
        return Err(Error::ZeroDenominator { value: m0[0] });
    }
    if (slope - expected).norm() > 1e-6 * expected.norm() {
        return Err(Error::QuadratureMismatch {
            detail: format!("c_{k} slope {slope} differs from k*oint(1/P_0) = {expected}"),
        });
    }
    Ok(-m0[k + 1] / slope)
}

/// A computed constant of motion together with the data needed to evaluate it anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSeries {
    ode: OdeSpec,
    kind: Kind,
    a: C64,
    c: Vec<C64>,
    base: FVector,
    contour: Option<Contour>,
    spine: Vec<FVector>,
    closure: Vec<C64>,
    tol: Tolerance,
}

impl ConstantSeries {
    /// R-domain series: a and c_1..c_{n-1} from vanishing monodromy, F_0(base_y) = 0, c_n = 0.
    pub fn build(ode: &OdeSpec, contour: &Contour, base_y: C64, n: usize, tol: &Tolerance) -> Result<Self> {
        let ode = ode.with_order(n)?;
        contour.validate(ode.roots())?;
        ode.check_clear(base_y)?;
        solve_a(&ode, contour, base_y, tol)?;
        // a, the constants and the closure check all use the refined quadrature.
        let fine = tol.scaled(1.0 / 1024.0);
        let a = raw_a(&ode, contour, base_y, &fine)?;
        let mut values = vec![C64::new(0.0, 0.0)];
        for k in 1..n {
            let ck = solve_c(&ode, contour, a, base_y, &values, k, &fine)?;
            values.push(ck);
        }
        values.push(C64::new(0.0, 0.0));
        let sys = FSystem::new(&ode, Kind::RDomain, a, n);
        let base = sys.fvector(base_y, values.clone())?;
        let lp = contour.loop_path(base_y, ode.roots())?;
        let spine = sys.integrate(&lp, &base, &fine)?;
        let end = spine.last().expect("nonempty");
        let closure: Vec<C64> = end.values.iter().zip(&base.values).map(|(e, s)| e - s).collect();
        Ok(ConstantSeries {
            c: values[1..n].to_vec(),
            ode,
            kind: Kind::RDomain,
            a,
            base,
            contour: Some(contour.clone()),
            spine,
            closure,
            tol: *tol,
        })
    }

    /// Assembles a series from already known pieces (used by the singular module).
    pub(crate) fn from_parts(ode: OdeSpec, kind: Kind, a: C64, base: FVector, tol: Tolerance) -> Self {
        let n = base.order();
        ConstantSeries {
            c: base.values[1..n].to_vec(),
            ode,
            kind,
            a,
            spine: vec![base.clone()],
            base,
            contour: None,
            closure: Vec::new(),
            tol,
        }
    }

    pub fn ode(&self) -> &OdeSpec {
        &self.ode
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    /// c_1..c_{n-1}: the F_k values at the base point.
    pub fn c(&self) -> &[C64] {
        &self.c
    }

    pub fn base_y(&self) -> C64 {
        self.base.y
    }

    pub fn base(&self) -> &FVector {
        &self.base
    }

    pub fn contour(&self) -> Option<&Contour> {
        self.contour.as_ref()
    }

    /// F-vectors at the nodes of the defining loop (R-domain) or the anchor alone (singular).
    pub fn spine(&self) -> &[FVector] {
        &self.spine
    }

    /// F-increments around the defining loop after the constants were fixed.
    pub fn closure(&self) -> &[C64] {
        &self.closure
    }

    pub fn order(&self) -> usize {
        self.base.order()
    }

    pub fn tol(&self) -> &Tolerance {
        &self.tol
    }

    pub fn system(&self) -> FSystem<'_> {
        FSystem::new(&self.ode, self.kind, self.a, self.order())
    }

    /// F along a y-history that starts at the base point.
    pub fn continue_along(&self, y_history: &Path) -> Result<FVector> {
        self.system().continue_along(y_history, &self.base, &self.tol)
    }

    pub fn continue_from(&self, from: &FVector, to: C64) -> Result<FVector> {
        self.system().continue_to(from, to, &self.tol)
    }

    /// F at y, reached by the left-deformed straight segment from the base point.
    pub fn f_at(&self, y: C64) -> Result<FVector> {
        self.continue_from(&self.base, y)
    }

    /// C_n at (x, F(y)) with log x on the branch held by `branch`.
    pub fn value(&self, branch: &BranchState, fv: &FVector) -> C64 {
        let x = branch.x();
        let lead = match self.kind {
            Kind::RDomain => -x + self.a * branch.log_x(),
            Kind::Singular => x,
        };
        lead + horner_inv(&fv.values, x)
    }

    /// dC_n/dy = sum F'_k / x^k.
    pub fn dvalue_dy(&self, x: C64, fv: &FVector) -> C64 {
        horner_inv(&fv.derivs, x)
    }

    /// D_x C_n = dC/dx + dC/dy * Q_1(y, 1/x).
    pub fn residual(&self, x: C64, fv: &FVector) -> C64 {
        let w = 1.0 / x;
        let mut dx = match self.kind {
            Kind::RDomain => -1.0 + self.a * w,
            Kind::Singular => C64::new(1.0, 0.0),
        };
        let mut wk = w * w;
        for (k, f) in fv.values.iter().enumerate().skip(1) {
            dx -= *f * k as f64 * wk;
            wk *= w;
        }
        dx + self.dvalue_dy(x, fv) * self.ode.rhs(x, fv.y)
    }
}

/// sum_k v_k x^-k.
pub(crate) fn horner_inv(v: &[C64], x: C64) -> C64 {
    // Trailing exact zeros are dropped so that x = 0 works when only F_0 is nonzero.
    let m = v.iter().rposition(|c| *c != C64::new(0.0, 0.0)).map_or(0, |i| i + 1);
    let Some((&last, rest)) = v[..m].split_last() else {
        return C64::new(0.0, 0.0);
    };
    let w = 1.0 / x;
    rest.iter().rev().fold(last, |acc, &c| acc * w + c)
}

pub fn build_constant(ode: &OdeSpec, contour: &Contour, base_y: C64, n: usize) -> Result<ConstantSeries> {
    ConstantSeries::build(ode, contour, base_y, n, &Tolerance::default())
}

/// Continuous arg(x) along an x-path, plus the winding of the y-history around each root.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    x: C64,
    arg: f64,
    windings: Vec<f64>,
}

impl BranchState {
    /// Principal branch at the starting point.
    pub fn new(x: C64) -> Self {
        BranchState { x, arg: x.arg(), windings: Vec::new() }
    }

    pub fn x(&self) -> C64 {
        self.x
    }

    pub fn arg(&self) -> f64 {
        self.arg
    }

    pub fn log_x(&self) -> C64 {
        C64::new(self.x.norm().ln(), self.arg)
    }

    pub fn windings(&self) -> &[f64] {
        &self.windings
    }

    /// Moves to `x_new` along the straight segment from the current point.
    pub fn advance(&self, x_new: C64) -> Result<BranchState> {
        if x_new == C64::new(0.0, 0.0) {
            return Err(Error::BranchDiscontinuity { x: x_new, jump: PI });
        }
        let jump = (x_new / self.x).arg();
        if jump.abs() >= PI - 1e-9 {
            return Err(Error::BranchDiscontinuity { x: x_new, jump });
        }
        Ok(BranchState { x: x_new, arg: self.arg + jump, windings: self.windings.clone() })
    }

    /// Adds the arg change of y - p_j over the straight step y_from -> y_to.
    pub fn track_y(&mut self, roots: &[C64], y_from: C64, y_to: C64) {
        if self.windings.len() != roots.len() {
            self.windings = vec![0.0; roots.len()];
        }
        for (w, &p) in self.windings.iter_mut().zip(roots) {
            *w += ((y_to - p) / (y_from - p)).arg() / (2.0 * PI);
        }
    }
}

/// C_n(y, x) with F continued along `y_history` from the base point.
pub fn eval_c(series: &ConstantSeries, x: C64, branch: &BranchState, y_history: &Path) -> Result<C64> {
    let b = branch.advance(x)?;
    let fv = series.continue_along(y_history)?;
    Ok(series.value(&b, &fv))
}

/// D_x C_n at (x, y) with F continued along `y_history`.
pub fn residual(series: &ConstantSeries, x: C64, y_history: &Path) -> Result<C64> {
    let fv = series.continue_along(y_history)?;
    Ok(series.residual(x, &fv))
}

/// sup over sample pairs of |Re int dQ_1/dy dx| / log(|x_2/x_1| + 1) along a sampled solution.
pub fn path_admissibility(ode: &OdeSpec, xs: &[C64], ys: &[C64]) -> f64 {
    let m = xs.len().min(ys.len());
    if m < 2 {
        return 0.0;
    }
    let stride = (m / 1500).max(1);
    let mut cum = vec![0.0];
    let mut idx = vec![0];
    let mut acc = 0.0;
    let mut last_kept = 0;
    for i in 1..m {
        let f0 = ode.rhs_dy(xs[i - 1], ys[i - 1]);
        let f1 = ode.rhs_dy(xs[i], ys[i]);
        acc += (0.5 * (f0 + f1) * (xs[i] - xs[i - 1])).re;
        if i - last_kept >= stride || i == m - 1 {
            cum.push(acc);
            idx.push(i);
            last_kept = i;
        }
    }
    let mut best: f64 = 0.0;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            let denom = ((xs[idx[b]] / xs[idx[a]]).norm() + 1.0).ln();
            best = best.max((cum[b] - cum[a]).abs() / denom);
        }
    }
    best
}
