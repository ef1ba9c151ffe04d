use std::fs;
use std::path::{Path as FsPath, PathBuf};

use asymcon::oracle::{
    detect_region, handoff_check, phase_field, rk_integrate, rk_integrate_sampled,
    taylor_trajectory, Episode, HandoffOptions, HandoffReport, PhaseGrid, PreciseOptions, Region,
    RkSample, Stability, Thresholds,
};
use asymcon::{
    build_singular, constant_from_ic, continue_trajectory, locate_singularity, singularity_array,
    verify_singularity, BranchState, Complex64, ConstantSeries, SingularityReport,
};
use log::{info, warn};
use serde_json::{json, Value};

use crate::config::{x_path, Cx, Integrator, JobConfig};
use crate::error::{CliError, Result};

/// Output directory; every command writes `<name>.json` and, where it has one, `<name>.csv`.
pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &FsPath) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output {
            dir: dir.to_path_buf(),
        })
    }

    fn json(&self, name: &str, value: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("values serialize");
        text.push('\n');
        fs::write(self.dir.join(format!("{name}.json")), text)?;
        Ok(())
    }

    fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.dir.join(format!("{name}.csv")))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn cx(z: Complex64) -> Value {
    json!(Cx::from(z))
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn num_pair(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn stability_name(s: Stability) -> &'static str {
    match s {
        Stability::Stable => "stable",
        Stability::Unstable => "unstable",
        Stability::Marginal => "marginal",
    }
}

pub fn roots(cfg: &JobConfig, out: &Output) -> Result<Value> {
    let ode = cfg.ode()?;
    let rs = ode.roots();
    let summary = json!({
        "roots": rs.roots().iter().map(|&p| cx(p)).collect::<Vec<_>>(),
        "simplicity_margins": rs.simplicity_margins(),
        "min_separation": rs.min_separation(),
        "eps_root": rs.eps_root(),
    });
    out.json("roots", &summary)?;
    Ok(summary)
}

pub fn com(cfg: &JobConfig, out: &Output) -> Result<Value> {
    let block = JobConfig::block(&cfg.com, "com")?;
    let ode = cfg.ode()?;
    let contour = block.contour.build(ode.roots())?;
    let n = ode.order();
    let series = ConstantSeries::build(&ode, &contour, block.base.into(), n, &cfg.tol())?;
    info!("a = {}, {} constants", series.a(), series.c().len());

    let summary = json!({
        "n": n,
        "root": block.contour.root,
        "turns": block.contour.turns,
        "base": block.base,
        "a": cx(series.a()),
        "c": series.c().iter().map(|&c| cx(c)).collect::<Vec<_>>(),
        "closure": series.closure().iter().map(|&c| cx(c)).collect::<Vec<_>>(),
    });
    out.json("com", &summary)?;

    if let Some(g) = block.grid {
        let grid = PhaseGrid::from(g);
        let mut header = vec!["y_re".to_string(), "y_im".to_string()];
        for k in 0..=n {
            header.push(format!("F{k}_re"));
            header.push(format!("F{k}_im"));
        }
        header.push("status".into());
        let steps = grid.n.max(2) - 1;
        let mut rows = Vec::new();
        for i in 0..=steps {
            for j in 0..=steps {
                let re = grid.re.0 + (grid.re.1 - grid.re.0) * i as f64 / steps as f64;
                let im = grid.im.0 + (grid.im.1 - grid.im.0) * j as f64 / steps as f64;
                let y = Complex64::new(re, im);
                let mut row = vec![num(re), num(im)];
                match series.f_at(y) {
                    Ok(fv) => {
                        row.extend(fv.values.iter().flat_map(|&v| num_pair(v)));
                        row.push("ok".into());
                    }
                    Err(e) => {
                        row.extend((0..2 * (n + 1)).map(|_| String::new()));
                        row.push(e.name().into());
                    }
                }
                rows.push(row);
            }
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        out.csv("com", &header, &rows)?;
    }
    Ok(summary)
}

pub const INVERT_COLUMNS: [&str; 12] = [
    "x_re",
    "x_im",
    "y_re",
    "y_im",
    "K_check_re",
    "K_check_im",
    "region",
    "rk_y_re",
    "rk_y_im",
    "rel_err",
    "segment",
    "s",
];

/// C_n on a reference trajectory at its first sample with |x| >= r, F continued along the way.
fn constant_on_reference(
    series: &ConstantSeries,
    samples: &[RkSample],
    r: f64,
) -> Result<Complex64> {
    let first = samples.first().expect("trajectory holds its start");
    let mut fv = series.f_at(first.y)?;
    let mut branch = BranchState::new(first.x);
    for s in samples {
        if s.x != branch.x() {
            branch = branch.advance(s.x)?;
            fv = series.continue_from(&fv, s.y)?;
        }
        if s.x.norm() >= r {
            return Ok(series.value(&branch, &fv));
        }
    }
    Err(CliError::Config(format!(
        "the reference never reaches |x| = {r}"
    )))
}

pub fn invert(cfg: &JobConfig, out: &Output) -> Result<Value> {
    let block = JobConfig::block(&cfg.invert, "invert")?;
    let ode = cfg.ode()?;
    let path = x_path(&block.path)?;
    let y0: Complex64 = block.y0.into();
    let contour = block.contour.build(ode.roots())?;
    let base = block.base.map_or(y0, Complex64::from);
    let series = ConstantSeries::build(&ode, &contour, base, ode.order(), &cfg.tol())?;
    if block.k.is_some() && block.k_rk_abs_x.is_some() {
        return Err(CliError::Config(
            "give at most one of `k` and `k_rk_abs_x`".into(),
        ));
    }
    let (rk, rk_error) = if block.rk || block.k_rk_abs_x.is_some() {
        match rk_integrate(&ode, &path, y0, &cfg.tol()) {
            Ok(t) => (Some(t), None),
            Err(e) if block.k_rk_abs_x.is_none() => {
                warn!("rk reference failed: {e}");
                (None, Some(e.name()))
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        (None, None)
    };
    let k = match (block.k, block.k_rk_abs_x, &rk) {
        (Some(k), _, _) => k.into(),
        (None, Some(r), Some(rk)) => constant_on_reference(&series, rk.samples(), r)?,
        _ => constant_from_ic(&series, path.start(), y0)?,
    };
    let traj = continue_trajectory(&series, k, &path, y0)?;
    info!("{} inverted samples, K = {k}", traj.len());

    let mut rows = Vec::with_capacity(traj.len());
    let mut max_rel = None::<f64>;
    for s in &traj {
        let mut row = vec![num(s.x.re), num(s.x.im), num(s.y.re), num(s.y.im)];
        row.extend(num_pair(s.k_check));
        row.push(s.region.label());
        match rk.as_ref().and_then(|t| t.dense(s.segment, s.s)) {
            Some(yr) => {
                let rel = (s.y - yr).norm() / yr.norm();
                if s.x.norm() > block.compare_min_abs_x {
                    max_rel = Some(max_rel.map_or(rel, |m| m.max(rel)));
                }
                row.extend(num_pair(yr));
                row.push(num(rel));
            }
            None => row.extend([String::new(), String::new(), String::new()]),
        }
        row.push(s.segment.to_string());
        row.push(num(s.s));
        rows.push(row);
    }
    out.csv("invert", &INVERT_COLUMNS, &rows)?;

    let last = traj.last().expect("trajectory holds its start");
    let summary = json!({
        "a": cx(series.a()),
        "c": series.c().iter().map(|&c| cx(c)).collect::<Vec<_>>(),
        "base": cx(base),
        "K": cx(k),
        "samples": traj.len(),
        "x_end": cx(last.x),
        "reached_end": last.x == path.end(),
        "end_region": last.region.label(),
        "rk_error": rk_error,
        "compare_min_abs_x": block.compare_min_abs_x,
        "max_rel_err": max_rel,
    });
    out.json("invert", &summary)?;
    Ok(summary)
}

fn report_json(r: &SingularityReport, failure: Option<&asymcon::Error>) -> Value {
    json!({
        "x0": cx(r.x0),
        "y0": cx(r.y0),
        "x_sing": cx(r.x_sing),
        "branch_shift": r.branch_shift,
        "order": r.order,
        "verified": r.verified.map(|v| json!({
            "x_hit": cx(v.x_hit),
            "delta": v.delta,
            "digits": v.digits,
            "max_abs_y": v.max_abs_y,
        })),
        "failure": failure.map(|e| format!("{}: {e}", e.name())),
    })
}

pub fn sing(cfg: &JobConfig, out: &Output) -> Result<Value> {
    let block = JobConfig::block(&cfg.sing, "sing")?;
    let ode = cfg.ode()?;
    let sing = build_singular(&ode, block.direction.into(), ode.order(), block.y_max)?;
    let (x0, y0) = (block.x0.into(), block.y0.into());
    let reports = if block.shifts.is_empty() {
        vec![locate_singularity(&sing, x0, y0)?]
    } else {
        singularity_array(&sing, x0, y0, &block.shifts)?
    };

    let mut entries = Vec::new();
    let mut failed = 0;
    for r in &reports {
        if !block.verify {
            entries.push(report_json(r, None));
            continue;
        }
        match verify_singularity(&ode, r, &cfg.tol()) {
            Ok(v) => entries.push(report_json(&v, None)),
            Err(e) if e.is_verification() => {
                failed += 1;
                entries.push(report_json(r, Some(&e)));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let summary = json!({
        "direction": block.direction,
        "n": ode.order(),
        "q": sing.q(),
        "m0": sing.m0(),
        "decay": sing.decay(),
        "expected_decay": sing.expected_decay(),
        "tail_error": sing.tail_error(),
        "reports": entries,
    });
    out.json("sing", &summary)?;
    if failed > 0 {
        return Err(CliError::Verification(format!(
            "{failed} of {} singularities not confirmed",
            reports.len()
        )));
    }
    Ok(summary)
}

pub const PHASE_COLUMNS: [&str; 7] = ["t", "x_re", "x_im", "y_re", "y_im", "dy_re", "dy_im"];

pub fn phase(cfg: &JobConfig, out: &Output) -> Result<Value> {
    let block = JobConfig::block(&cfg.phase, "phase")?;
    let ode = cfg.ode()?;
    let grid = block.grid.map(PhaseGrid::from).unwrap_or_default();
    if block.angles.is_empty() {
        return Err(CliError::Config("phase needs at least one angle".into()));
    }
    let mut rows = Vec::new();
    let mut fields = Vec::new();
    for &t in &block.angles {
        let f = phase_field(&ode, block.x0.into(), t, block.s, &grid);
        for &(y, dy) in &f.samples {
            let mut row = vec![num(t)];
            row.extend(num_pair(f.x));
            row.extend(num_pair(y));
            row.extend(num_pair(dy));
            rows.push(row);
        }
        let marginal = f
            .equilibria
            .iter()
            .any(|e| e.stability == Stability::Marginal);
        fields.push(json!({
            "t": t,
            "x": cx(f.x),
            "marginal": marginal,
            "equilibria": f.equilibria.iter().map(|e| json!({
                "root": cx(e.root),
                "rate": cx(e.rate),
                "stability": stability_name(e.stability),
            })).collect::<Vec<_>>(),
        }));
    }
    out.csv("phase", &PHASE_COLUMNS, &rows)?;
    let summary = json!({ "x0": block.x0, "s": block.s, "fields": fields });
    out.json("phase", &summary)?;
    Ok(summary)
}

pub const REGIONS_COLUMNS: [&str; 8] = [
    "segment",
    "x_re",
    "x_im",
    "y_re",
    "y_im",
    "region",
    "handoff_residual",
    "handoff_bound",
];

fn episode_json(e: &Episode, xs: &[Complex64]) -> Value {
    json!({ "root": e.root, "first": e.first, "last": e.last, "x_first": cx(xs[e.first]), "x_last": cx(xs[e.last]) })
}

pub fn regions(cfg: &JobConfig, out: &Output) -> Result<Value> {
    let block = JobConfig::block(&cfg.regions, "regions")?;
    let ode = cfg.ode()?;
    let path = x_path(&block.path)?;
    let y0: Complex64 = block.y0.into();
    let thresholds = block.thresholds.map(Thresholds::from).unwrap_or_default();
    let (segments, pts): (Vec<usize>, Vec<(Complex64, Complex64)>) = match block.integrator {
        Integrator::Taylor => taylor_trajectory(&ode, &path, y0, &PreciseOptions::default())?
            .iter()
            .map(|s| (s.segment, (s.x, s.y)))
            .unzip(),
        Integrator::Rk => rk_integrate_sampled(&ode, &path, y0, &cfg.tol(), block.per_segment)?
            .samples()
            .iter()
            .map(|s| (s.segment, (s.x, s.y)))
            .unzip(),
    };
    info!("{} samples along the path", pts.len());
    let xs: Vec<Complex64> = pts.iter().map(|p| p.0).collect();

    let report: Option<HandoffReport> = if block.handoff {
        let opts = HandoffOptions {
            thresholds,
            tol: cfg.tol(),
            ..HandoffOptions::default()
        };
        Some(handoff_check(&ode, &pts, &opts)?)
    } else {
        None
    };
    let tags: Vec<Region> = match &report {
        Some(r) => r.tags.clone(),
        None => pts
            .iter()
            .map(|&(x, y)| detect_region(&ode, x, y, &thresholds))
            .collect(),
    };
    let eps = asymcon::oracle::episodes(&tags);
    let mut bounds = vec![None; pts.len()];
    let mut residuals = vec![None; pts.len()];
    if let Some(r) = &report {
        for s in r.runs.iter().flat_map(|run| &run.samples) {
            residuals[s.index] = Some(s.residual);
            bounds[s.index] = Some(s.bound);
        }
    }
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let rows: Vec<Vec<String>> = (0..pts.len())
        .map(|i| {
            let (x, y) = pts[i];
            let mut row = vec![segments[i].to_string()];
            row.extend(num_pair(x));
            row.extend(num_pair(y));
            row.push(tags[i].label());
            row.push(opt(residuals[i]));
            row.push(opt(bounds[i]));
            row
        })
        .collect();
    out.csv("regions", &REGIONS_COLUMNS, &rows)?;

    let mut order = Vec::new();
    for e in &eps {
        if !order.contains(&e.root) {
            order.push(e.root);
        }
    }
    let handoff = report.as_ref().map(|r| {
        json!({
            "passed": r.passed(),
            "worst_ratio": r.worst_ratio(),
            "runs": r.runs.iter().map(|run| json!({
                "root": run.root,
                "first": run.first,
                "last": run.last,
                "band_samples": run.samples.len(),
                "passed": run.passed(),
                "failure": run.failure,
                "fits": run.fits.iter().map(|f| json!({
                    "first": f.first,
                    "last": f.last,
                    "c_trans": cx(f.c_trans),
                    "stability": f.stability,
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    });
    let summary = json!({
        "samples": pts.len(),
        "roots": ode.roots().roots().iter().map(|&p| cx(p)).collect::<Vec<_>>(),
        "episodes": eps.iter().map(|e| episode_json(e, &xs)).collect::<Vec<_>>(),
        "first_visit_order": order,
        "handoff": handoff,
    });
    out.json("regions", &summary)?;
    if let Some(r) = &report {
        if !r.passed() {
            return Err(CliError::Verification(format!(
                "handoff residual exceeds its bound (worst ratio {:.3})",
                r.worst_ratio()
            )));
        }
    }
    Ok(summary)
}
