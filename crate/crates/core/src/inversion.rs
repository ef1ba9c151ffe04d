//! Solving C_n(y, x) = K for y, pointwise and along x-paths.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::comotion::{BranchState, ConstantSeries, FVector};
use crate::error::{Error, Result};
use crate::oracle::{detect_region, Region, Thresholds};
use crate::path::{Path, Plane, Segment};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Step halvings allowed per iteration before giving up.
    pub max_halvings: usize,
    /// Target |G|.
    pub tol: f64,
    /// Smallest |x| accepted; 0 disables the check.
    pub r0: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_iter: 50, max_halvings: 8, tol: 1e-10, r0: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    pub newton: NewtonOptions,
    pub thresholds: Thresholds,
    /// Largest step in the segment parameter.
    pub max_ds: f64,
    /// Smallest step before StepTooLarge.
    pub min_ds: f64,
    /// Accept a step only if |dy| is at most this fraction of the distance to the nearest root.
    pub dy_fraction: f64,
    /// End the march at the first sample tagged NearRoot.
    pub stop_at_near_root: bool,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            newton: NewtonOptions::default(),
            thresholds: Thresholds::default(),
            max_ds: 1.0 / 32.0,
            min_ds: 1e-9,
            dy_fraction: 0.2,
            stop_at_near_root: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub segment: usize,
    pub s: f64,
    pub x: C64,
    pub y: C64,
    /// C_n re-evaluated at (x, y).
    pub k_check: C64,
    pub region: Region,
}

fn straight(series: &ConstantSeries, from: &FVector, to: C64) -> Result<FVector> {
    if to == from.y {
        return Ok(from.clone());
    }
    let line = Path::line(Plane::Y, from.y, to)?;
    series.system().continue_along(&line, from, series.tol())
}

/// Damped Newton on G(y) = C_n(y, x) - K, with F continued along the straight steps taken.
///
/// Returns F at the solution. Fails with JumpedBranch when the iterates, closed by the chord
/// back to the starting point, wind around a root.
pub fn newton_invert_from(
    series: &ConstantSeries,
    k: C64,
    branch: &BranchState,
    start: &FVector,
    opts: &NewtonOptions,
) -> Result<FVector> {
    let x = branch.x();
    if x.norm() < opts.r0 {
        return Err(Error::InvalidInput(format!("|x| = {} is below R_0 = {}", x.norm(), opts.r0)));
    }
    let mut fv = start.clone();
    let mut g = series.value(branch, &fv) - k;
    let mut trail = vec![fv.y];
    for it in 0..opts.max_iter {
        if g.norm() <= opts.tol {
            check_winding(series, x, &trail)?;
            return Ok(fv);
        }
        let d = series.dvalue_dy(x, &fv);
        let step = -g / d;
        if !step.is_finite() {
            return Err(Error::NewtonDiverged { x, iterations: it, residual: g.norm() });
        }
        let mut lam = 1.0;
        let mut next = None;
        for _ in 0..=opts.max_halvings {
            match straight(series, &fv, fv.y + step * lam) {
                Ok(f1) => {
                    let g1 = series.value(branch, &f1) - k;
                    if g1.norm() < g.norm() {
                        next = Some((f1, g1));
                        break;
                    }
                }
                Err(Error::NearRoot { .. } | Error::StepFailure { .. }) => {}
                Err(e) => return Err(e),
            }
            lam *= 0.5;
        }
        let Some((f1, g1)) = next else {
            return Err(Error::NewtonDiverged { x, iterations: it + 1, residual: g.norm() });
        };
        fv = f1;
        g = g1;
        trail.push(fv.y);
    }
    if g.norm() <= opts.tol {
        check_winding(series, x, &trail)?;
        return Ok(fv);
    }
    Err(Error::NewtonDiverged { x, iterations: opts.max_iter, residual: g.norm() })
}

fn check_winding(series: &ConstantSeries, x: C64, trail: &[C64]) -> Result<()> {
    if trail.len() < 3 {
        return Ok(());
    }
    for (j, &p) in series.ode().roots().roots().iter().enumerate() {
        let mut turn = 0.0;
        for w in trail.windows(2) {
            turn += ((w[1] - p) / (w[0] - p)).arg();
        }
        turn += ((trail[0] - p) / (trail[trail.len() - 1] - p)).arg();
        if (turn / (2.0 * PI)).abs() > 0.5 {
            return Err(Error::JumpedBranch { x, root: j });
        }
    }
    Ok(())
}

/// y with C_n(y, x) = K, log x on the principal branch and F reached from the base point by the
/// left-deformed straight segment to `y_guess`.
pub fn newton_invert(series: &ConstantSeries, k: C64, x: C64, y_guess: C64) -> Result<C64> {
    series.ode().check_clear(y_guess)?;
    let start = series.f_at(y_guess)?;
    Ok(newton_invert_from(series, k, &BranchState::new(x), &start, &NewtonOptions::default())?.y)
}

/// K = C_n(y0, x0) on the principal branch of log x0.
pub fn constant_from_ic(series: &ConstantSeries, x0: C64, y0: C64) -> Result<C64> {
    let fv = series.f_at(y0)?;
    Ok(series.value(&BranchState::new(x0), &fv))
}

/// Marches the solution of C_n = K along `x_path`, seeding every step with the previous y.
///
/// The march ends early, without error, at the first NearRoot sample (unless disabled) or
/// when the solution runs into the clearance disc of a root, where F is not defined.
pub fn continue_trajectory(series: &ConstantSeries, k: C64, x_path: &Path, y_start: C64) -> Result<Vec<TrajectorySample>> {
    series.ode().check_clear(y_start)?;
    let start = series.f_at(y_start)?;
    continue_trajectory_from(series, k, x_path, &BranchState::new(x_path.start()), &start, &ContinuationOptions::default())
}

/// As `continue_trajectory`, starting from a given branch of log x and F-vector.
pub fn continue_trajectory_from(
    series: &ConstantSeries,
    k: C64,
    x_path: &Path,
    branch: &BranchState,
    start: &FVector,
    opts: &ContinuationOptions,
) -> Result<Vec<TrajectorySample>> {
    if x_path.plane() != Plane::X {
        return Err(Error::InvalidInput("trajectories run along x-plane paths".into()));
    }
    if (branch.x() - x_path.start()).norm() > 1e-12 * (1.0 + branch.x().norm()) {
        return Err(Error::InvalidInput("branch state does not sit at the path start".into()));
    }
    let ode = series.ode();
    let roots = ode.roots().roots().to_vec();
    let mut branch = branch.clone();
    let mut fv = newton_invert_from(series, k, &branch, start, &opts.newton)?;
    let sample = |seg: usize, s: f64, b: &BranchState, f: &FVector| TrajectorySample {
        segment: seg,
        s,
        x: b.x(),
        y: f.y,
        k_check: series.value(b, f),
        region: detect_region(ode, b.x(), f.y, &opts.thresholds),
    };
    let mut out = vec![sample(0, 0.0, &branch, &fv)];
    let near = |o: &[TrajectorySample]| {
        opts.stop_at_near_root && matches!(o.last().map(|t| t.region), Some(Region::NearRoot(_)))
    };
    if near(&out) {
        return Ok(out);
    }
    for (si, seg) in x_path.segments().iter().enumerate() {
        let mut s = 0.0;
        let mut ds = opts.max_ds;
        let mut blocked = false;
        while s < 1.0 {
            let s1 = (s + ds).min(1.0);
            match try_step(series, k, seg, s, s1, &branch, &fv, opts) {
                Ok(Step::Taken(b1, f1)) => {
                    branch = b1;
                    branch.track_y(&roots, fv.y, f1.y);
                    fv = f1;
                    s = s1;
                    out.push(sample(si, s, &branch, &fv));
                    if near(&out) {
                        return Ok(out);
                    }
                    ds = (ds * 1.5).min(opts.max_ds);
                    continue;
                }
                Ok(Step::TooLarge) => blocked = false,
                Ok(Step::Clearance) => blocked = true,
                Err(e @ (Error::NewtonDiverged { .. } | Error::JumpedBranch { .. })) if ds / 2.0 < opts.min_ds => {
                    return Err(e);
                }
                Err(Error::NewtonDiverged { .. } | Error::JumpedBranch { .. }) => {}
                Err(e) => return Err(e),
            }
            ds /= 2.0;
            if ds < opts.min_ds {
                if blocked {
                    return Ok(out);
                }
                return Err(Error::StepTooLarge { x: seg.point(s) });
            }
        }
    }
    Ok(out)
}

enum Step {
    Taken(BranchState, FVector),
    /// |dy| too large for the distance to the nearest root.
    TooLarge,
    /// The predictor or the corrected y fell inside a root's clearance disc.
    Clearance,
}

#[allow(clippy::too_many_arguments)]
fn try_step(
    series: &ConstantSeries,
    k: C64,
    seg: &Segment,
    s0: f64,
    s1: f64,
    branch: &BranchState,
    fv: &FVector,
    opts: &ContinuationOptions,
) -> Result<Step> {
    let ode = series.ode();
    let x0 = seg.point(s0);
    let x1 = seg.point(s1);
    let b1 = branch.advance(x1)?;
    let dist = ode.roots().nearest(fv.y).1;
    let limit = opts.dy_fraction * dist;
    let pred = fv.y + ode.rhs(x0, fv.y) * (x1 - x0);
    if (pred - fv.y).norm() > 2.0 * limit {
        return Ok(Step::TooLarge);
    }
    let seed = match straight(series, fv, pred) {
        Ok(f) => f,
        Err(Error::NearRoot { .. } | Error::StepFailure { .. }) => return Ok(Step::Clearance),
        Err(e) => return Err(e),
    };
    let f1 = match newton_invert_from(series, k, &b1, &seed, &opts.newton) {
        Ok(f) => f,
        Err(Error::NearRoot { .. }) => return Ok(Step::Clearance),
        Err(e) => return Err(e),
    };
    if (f1.y - fv.y).norm() > limit {
        return Ok(Step::TooLarge);
    }
    Ok(Step::Taken(b1, f1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comotion::build_constant;
    use crate::ode::OdeSpec;
    use crate::path::Contour;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn linear() -> ConstantSeries {
        let ode = OdeSpec::linear_decay(2).unwrap();
        build_constant(&ode, &Contour::around(ode.roots(), 0).unwrap(), c(1.0, 0.0), 2).unwrap()
    }

    fn abel(n: usize) -> ConstantSeries {
        let ode = OdeSpec::abel(n).unwrap();
        build_constant(&ode, &Contour::around(ode.roots(), 0).unwrap(), c(1.1, 0.0), n).unwrap()
    }

    #[test]
    fn linear_inverts_to_exponential() {
        let s = linear();
        let y = newton_invert(&s, c(0.0, 0.0), c(2.0, 0.0), c(0.1, 0.0)).unwrap();
        assert!((y - c((-2.0f64).exp(), 0.0)).norm() < 1e-10, "{y}");
        let k = constant_from_ic(&s, c(1.0, 0.0), c((-1.0f64).exp(), 0.0)).unwrap();
        assert!(k.norm() < 1e-10, "{k}");
    }

    #[test]
    fn linear_continuation_follows_exponential() {
        let s = linear();
        let path = Path::line(Plane::X, c(1.0, 0.0), c(10.0, 0.0)).unwrap();
        let out = continue_trajectory(&s, c(0.0, 0.0), &path, c((-1.0f64).exp(), 0.0)).unwrap();
        assert!(out.len() > 10);
        for p in &out {
            assert!((p.y - (-p.x).exp()).norm() < 1e-10, "{} {}", p.x, p.y);
            assert!(p.k_check.norm() < 1e-9);
        }
        // F is undefined inside |y| < eps_root = 0.05, so the march ends at x = ln 20.
        let last = out.last().unwrap();
        assert!((last.x.re - 20f64.ln()).abs() < 1e-3, "{}", last.x);
        assert!(out.iter().all(|p| p.region == Region::Unknown));
    }

    #[test]
    fn abel_guess_on_another_sheet_fails() {
        let s = abel(2);
        let x = c(10.0, 60.0);
        let k = constant_from_ic(&s, x, c(0.9, 0.2)).unwrap();
        // Start next to omega^2/3: G is dominated by the log term there and has no nearby zero
        // on this sheet.
        let w2 = C64::from_polar(1.0 / 3.0, -2.0 * PI / 3.0);
        let r = newton_invert(&s, k, x, w2 + c(0.04, 0.0));
        assert!(
            matches!(r, Err(Error::NewtonDiverged { .. }) | Err(Error::JumpedBranch { .. })),
            "{r:?}"
        );
    }

    #[test]
    fn abel_round_trip_grid() {
        let s = abel(2);
        for x0 in [c(20.0, 60.0), c(-40.0, 30.0), c(80.0, -5.0)] {
            for y0 in [c(0.9, 0.2), c(1.3, -0.3), c(0.7, 0.1)] {
                let k = constant_from_ic(&s, x0, y0).unwrap();
                let y = newton_invert(&s, k, x0, y0 + c(0.03, -0.02)).unwrap();
                assert!((y - y0).norm() < 1e-9, "{x0} {y0}: {y}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn round_trip(r in 20.0f64..100.0, t in -3.0f64..3.0, dy in 0.0f64..0.35, th in -3.1f64..3.1,
                      pr in 0.0f64..0.05, pt in -3.1f64..3.1) {
            let s = abel(2);
            let x0 = C64::from_polar(r, t);
            let y0 = c(1.1, 0.0) + C64::from_polar(dy, th);
            let k = constant_from_ic(&s, x0, y0).unwrap();
            let y = newton_invert(&s, k, x0, y0 + C64::from_polar(pr, pt)).unwrap();
            prop_assert!((y - y0).norm() < 1e-9, "{} vs {}", y, y0);
        }
    }
}
