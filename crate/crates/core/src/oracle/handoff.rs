use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::comotion::{BranchState, ConstantSeries};
use crate::error::{Error, Result};
use crate::inversion::{constant_from_ic, newton_invert_from, NewtonOptions};
use crate::ode::OdeSpec;
use crate::oracle::expansion::continued_logs;
use crate::oracle::{detect_region, episodes, power_series_at_root, transseries_fit, Episode, Region, Thresholds};
use crate::path::Contour;
use crate::rk::Tolerance;

/// Terms kept in the power series about each root.
const EXPANSION_TERMS: usize = 8;
const MIN_FIT_SAMPLES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoffOptions {
    pub thresholds: Thresholds,
    /// Fit only on samples with |y - p| below `fit_radius` and |y - y~(x)| above `min_delta`.
    pub fit_radius: f64,
    pub min_delta: f64,
    pub tol: Tolerance,
}

impl Default for HandoffOptions {
    fn default() -> Self {
        HandoffOptions { thresholds: Thresholds::default(), fit_radius: 0.01, min_delta: 1e-8, tol: Tolerance::default() }
    }
}

/// One overlap-band sample: the oracle value, the R-domain inversion and the transseries value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoffSample {
    pub index: usize,
    pub x: C64,
    pub y: C64,
    pub y_rdomain: C64,
    pub y_trans: C64,
    pub residual: f64,
    pub bound: f64,
}

/// Transseries constant fitted on near-root samples between two Stokes-line crossings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPiece {
    pub first: usize,
    pub last: usize,
    pub c_trans: C64,
    pub stability: f64,
}

/// Samples within the band radius of one root around at least one near-root episode.
#[derive(Debug, Clone, PartialEq)]
pub struct HandoffRun {
    pub root: usize,
    pub first: usize,
    pub last: usize,
    pub fits: Vec<FitPiece>,
    /// Why no fit or inversion was possible, if so.
    pub failure: Option<String>,
    pub samples: Vec<HandoffSample>,
}

impl HandoffRun {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.samples.iter().all(|s| s.residual <= s.bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandoffReport {
    pub tags: Vec<Region>,
    pub episodes: Vec<Episode>,
    pub runs: Vec<HandoffRun>,
}

impl HandoffReport {
    pub fn passed(&self) -> bool {
        self.runs.iter().all(HandoffRun::passed)
    }

    /// Largest residual / bound over all band samples.
    pub fn worst_ratio(&self) -> f64 {
        self.runs.iter().flat_map(|r| &r.samples).map(|s| s.residual / s.bound).fold(0.0, f64::max)
    }

    /// Residual per input sample, where one was computed.
    pub fn residual_column(&self) -> Vec<Option<f64>> {
        let mut col = vec![None; self.tags.len()];
        for s in self.runs.iter().flat_map(|r| &r.samples) {
            col[s.index] = Some(s.residual);
        }
        col
    }
}

/// Compares, on the overlap band around every near-root episode of a sampled solution, the
/// R-domain inversion of C_n with the leading-order transseries fitted inside the episode.
///
/// K is taken from the first sample of each contiguous band stretch; the agreement target is
/// max(2|x|^-n, 2 * fit stability).
pub fn handoff_check(ode: &OdeSpec, samples: &[(C64, C64)], opts: &HandoffOptions) -> Result<HandoffReport> {
    let th = &opts.thresholds;
    let tags: Vec<Region> = samples.iter().map(|&(x, y)| detect_region(ode, x, y, th)).collect();
    let eps = episodes(&tags);
    let mut runs = Vec::new();
    let mut covered_to: Vec<Option<usize>> = vec![None; ode.roots().len()];
    for e in &eps {
        if covered_to[e.root].is_some_and(|end| e.first <= end) {
            continue;
        }
        let p = ode.roots().get(e.root);
        let inside = |i: usize| (samples[i].1 - p).norm() < th.band;
        let mut first = e.first;
        while first > 0 && inside(first - 1) {
            first -= 1;
        }
        let mut last = e.last;
        while last + 1 < samples.len() && inside(last + 1) {
            last += 1;
        }
        covered_to[e.root] = Some(last);
        runs.push(check_run(ode, samples, &tags, e.root, first, last, opts));
    }
    Ok(HandoffReport { tags, episodes: eps, runs })
}

fn check_run(
    ode: &OdeSpec,
    samples: &[(C64, C64)],
    tags: &[Region],
    root: usize,
    first: usize,
    last: usize,
    opts: &HandoffOptions,
) -> HandoffRun {
    let mut run = HandoffRun { root, first, last, fits: Vec::new(), failure: None, samples: Vec::new() };
    if let Err(e) = fill_run(ode, samples, tags, opts, &mut run) {
        run.failure = Some(e.to_string());
    }
    run
}

fn fill_run(
    ode: &OdeSpec,
    samples: &[(C64, C64)],
    tags: &[Region],
    opts: &HandoffOptions,
    run: &mut HandoffRun,
) -> Result<()> {
    let th = &opts.thresholds;
    let (root, first, last) = (run.root, run.first, run.last);
    let p = ode.roots().get(root);
    let expansion = power_series_at_root(ode, p, EXPANSION_TERMS)?;
    let xs: Vec<C64> = samples[first..=last].iter().map(|s| s.0).collect();
    let logs = continued_logs(&xs);

    let window: Vec<usize> = (first..=last)
        .filter(|&i| {
            let (x, y) = samples[i];
            tags[i] == Region::NearRoot(root)
                && x.norm() >= th.r0
                && (y - p).norm() < opts.fit_radius
                && (y - expansion.eval(x)).norm() > opts.min_delta
        })
        .collect();
    if window.is_empty() {
        return Err(Error::InvalidInput("no usable near-root samples for the transseries fit".into()));
    }
    // The constant jumps where mu x crosses the negative real axis; fit each side on its own.
    let sheet = |i: usize| ((expansion.mu.arg() + logs[i - first].im - PI) / (2.0 * PI)).floor();
    let mut pieces: Vec<Vec<usize>> = vec![vec![window[0]]];
    for w in window.windows(2) {
        if sheet(w[0]) != sheet(w[1]) {
            pieces.push(Vec::new());
        }
        pieces.last_mut().expect("nonempty").push(w[1]);
    }
    let mut fits = Vec::new();
    for piece in pieces.iter().filter(|p| p.len() >= MIN_FIT_SAMPLES) {
        let pts: Vec<(C64, C64)> = piece.iter().map(|&i| samples[i]).collect();
        let fit = transseries_fit(&expansion, &pts)?;
        // Shift the run's logs onto the branch this fit used.
        let shift = fit.logs[0] - logs[piece[0] - first];
        run.fits.push(FitPiece {
            first: piece[0],
            last: piece[piece.len() - 1],
            c_trans: fit.c_trans,
            stability: fit.stability,
        });
        fits.push((fit, shift));
    }
    if fits.is_empty() {
        return Err(Error::InvalidInput("too few near-root samples for the transseries fit".into()));
    }
    let nearest = |i: usize| {
        let dist = |p: &FitPiece| if i < p.first { p.first - i } else { i.saturating_sub(p.last) };
        (0..run.fits.len()).min_by_key(|&f| dist(&run.fits[f])).expect("nonempty")
    };

    let in_band = |i: usize| {
        let (x, y) = samples[i];
        let d = (y - p).norm();
        d >= th.eps_near && d < th.band && x.norm() >= th.r0
    };
    let n = ode.order();
    let contour = Contour::around(ode.roots(), root)?;
    let mut i = first;
    while i <= last {
        if !in_band(i) {
            i += 1;
            continue;
        }
        let (x0, y0) = samples[i];
        let series = ConstantSeries::build(ode, &contour, y0, n, &opts.tol)?;
        let k = constant_from_ic(&series, x0, y0)?;
        let mut branch = BranchState::new(x0);
        let mut along = series.base().clone();
        while i <= last && in_band(i) {
            let (x, y) = samples[i];
            if i > first && along.y != y {
                branch = branch.advance(x)?;
                along = series.continue_from(&along, y)?;
            }
            let solved = newton_invert_from(&series, k, &branch, &along, &NewtonOptions::default())?;
            let (fit, shift) = &fits[nearest(i)];
            let y_trans = fit.value(&expansion, x, logs[i - first] + shift);
            let residual = (solved.y - y_trans).norm();
            let bound = (2.0 * x.norm().powi(-(n as i32))).max(2.0 * fit.stability);
            run.samples.push(HandoffSample { index: i, x, y, y_rdomain: solved.y, y_trans, residual, bound });
            i += 1;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::rk_integrate_sampled;
    use crate::path::{Path, Plane};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn abel_entering_one_third_hands_off() {
        let ode = OdeSpec::abel(2).unwrap();
        let path = Path::line(Plane::X, c(0.0, 50.0), c(50.0, 0.0)).unwrap();
        let tr = rk_integrate_sampled(&ode, &path, c(0.6, 0.0), &Tolerance::new(1e-11, 1e-13), 400).unwrap();
        let pts: Vec<(C64, C64)> = tr.samples().iter().map(|s| (s.x, s.y)).collect();
        let rep = handoff_check(&ode, &pts, &HandoffOptions::default()).unwrap();
        assert_eq!(rep.runs.len(), 1);
        let run = &rep.runs[0];
        assert!(run.failure.is_none(), "{:?}", run.failure);
        assert!(!run.samples.is_empty());
        for s in &run.samples {
            // Inversion tracks the oracle; the leading-order transseries carries the gap.
            assert!((s.y_rdomain - s.y).norm() < 1e-6);
        }
        assert!(rep.passed(), "worst ratio {}", rep.worst_ratio());
    }
}
