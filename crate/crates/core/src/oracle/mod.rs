//! Independent references: Runge-Kutta trajectories, power series at the roots of P_0,
//! leading-order transseries fits, region tagging and phase fields.

mod expansion;
mod handoff;
mod phase;
mod precise;
mod region;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ode::OdeSpec;
use crate::path::{Path, Plane};
use crate::rk::{integrate_segment, Flow, Stats, Tolerance};

pub use expansion::{power_series_at_root, transseries_fit, RootExpansion, TransseriesFit};
pub use handoff::{handoff_check, FitPiece, HandoffOptions, HandoffReport, HandoffRun, HandoffSample};
pub use precise::{taylor_trajectory, PreciseOptions, PreciseSample};
pub use phase::{phase_field, Equilibrium, PhaseField, PhaseGrid, Stability};
pub use region::{detect_region, episodes, Episode, Region, Thresholds};

/// |y| beyond which a trajectory is declared to have reached a singularity.
pub const BLOWUP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RkSample {
    pub segment: usize,
    pub s: f64,
    pub x: C64,
    pub y: C64,
}

/// Accepted steps of an adaptive integration along an x-path.
#[derive(Debug, Clone, PartialEq)]
pub struct RkTrajectory {
    samples: Vec<RkSample>,
    path: Path,
    tol: Tolerance,
    stats: Stats,
    ode: OdeSpec,
}

impl RkTrajectory {
    pub fn samples(&self) -> &[RkSample] {
        &self.samples
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn tol(&self) -> Tolerance {
        self.tol
    }

    pub fn accepted(&self) -> usize {
        self.stats.accepted
    }

    pub fn rejected(&self) -> usize {
        self.stats.rejected
    }

    pub fn last(&self) -> &RkSample {
        self.samples.last().expect("trajectory holds its start")
    }

    pub fn xs(&self) -> Vec<C64> {
        self.samples.iter().map(|s| s.x).collect()
    }

    pub fn ys(&self) -> Vec<C64> {
        self.samples.iter().map(|s| s.y).collect()
    }

    /// Cubic Hermite interpolation between the accepted steps that bracket `s` on `segment`.
    pub fn dense(&self, segment: usize, s: f64) -> Option<C64> {
        let seg = self.path.segments().get(segment)?;
        for w in self.samples.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b.segment != segment {
                continue;
            }
            // A segment's first step starts where the previous segment ended.
            let sa = if a.segment == segment { a.s } else { 0.0 };
            if s < sa || s > b.s {
                continue;
            }
            let h = b.s - sa;
            let da = self.ode.rhs(a.x, a.y) * seg.tangent(sa) * h;
            let db = self.ode.rhs(b.x, b.y) * seg.tangent(b.s) * h;
            let t = (s - sa) / h;
            let (t2, t3) = (t * t, t * t * t);
            return Some(
                a.y * (2.0 * t3 - 3.0 * t2 + 1.0)
                    + da * (t3 - 2.0 * t2 + t)
                    + b.y * (-2.0 * t3 + 3.0 * t2)
                    + db * (t3 - t2),
            );
        }
        None
    }
}

/// Adaptive Dormand-Prince integration of y' = Q_1(y, 1/x) along an x-path.
///
/// `per_segment` > 0 forces steps to land on that many equally spaced parameters per segment.
pub fn rk_integrate_sampled(
    ode: &OdeSpec,
    path: &Path,
    y0: C64,
    tol: &Tolerance,
    per_segment: usize,
) -> Result<RkTrajectory> {
    if path.plane() != Plane::X {
        return Err(Error::InvalidInput("trajectories run along x-plane paths".into()));
    }
    if !y0.is_finite() {
        return Err(Error::InvalidInput(format!("initial value {y0} is not finite")));
    }
    let stops: Vec<f64> = (1..=per_segment).map(|k| k as f64 / per_segment as f64).collect();
    let mut samples = vec![RkSample { segment: 0, s: 0.0, x: path.start(), y: y0 }];
    let mut stats = Stats::default();
    let mut state = [y0];
    for (i, seg) in path.segments().iter().enumerate() {
        let (_, st) = integrate_segment(
            seg,
            &mut state,
            tol,
            &stops,
            |x, u, du| {
                du[0] = ode.rhs(x, u[0]);
                Ok(())
            },
            |s, x, u| {
                if u[0].norm() > BLOWUP {
                    return Err(Error::BlowupDetected { x, y: u[0] });
                }
                samples.push(RkSample { segment: i, s, x, y: u[0] });
                Ok(Flow::Continue)
            },
        )?;
        stats += st;
    }
    Ok(RkTrajectory { samples, path: path.clone(), tol: *tol, stats, ode: ode.clone() })
}

pub fn rk_integrate(ode: &OdeSpec, path: &Path, y0: C64, tol: &Tolerance) -> Result<RkTrajectory> {
    rk_integrate_sampled(ode, path, y0, tol, 0)
}
