use num_complex::Complex64 as C64;

use crate::ode::OdeSpec;

/// Which representation of the solution applies at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    RDomain,
    NearRoot(usize),
    /// Between the near-root disc and the outer band, or |x| below R_0.
    Unknown,
}

impl Region {
    pub fn label(&self) -> String {
        match self {
            Region::RDomain => "RDomain".into(),
            Region::NearRoot(j) => format!("NearRoot({j})"),
            Region::Unknown => "Unknown".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub eps_near: f64,
    /// Outer radius of the overlap band around each root.
    pub band: f64,
    /// |x| below which the R-domain expansion is not trusted.
    pub r0: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { eps_near: 0.05, band: 0.1, r0: 10.0 }
    }
}

pub fn detect_region(ode: &OdeSpec, x: C64, y: C64, th: &Thresholds) -> Region {
    let (j, d) = ode.roots().nearest(y);
    if d < th.eps_near {
        Region::NearRoot(j)
    } else if d < th.band || d < ode.eps_root() || x.norm() < th.r0 {
        Region::Unknown
    } else {
        Region::RDomain
    }
}

/// A maximal run of consecutive samples tagged NearRoot(root).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Episode {
    pub root: usize,
    pub first: usize,
    pub last: usize,
}

pub fn episodes(tags: &[Region]) -> Vec<Episode> {
    let mut out: Vec<Episode> = Vec::new();
    for (i, t) in tags.iter().enumerate() {
        if let Region::NearRoot(j) = *t {
            match out.last_mut() {
                Some(e) if e.root == j && e.last + 1 == i => e.last = i,
                _ => out.push(Episode { root: j, first: i, last: i }),
            }
        }
    }
    out
}
