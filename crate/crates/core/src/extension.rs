//! Raising a path one truncation level at a time by sewing the level-raising form.
//!
//! The one-step approximation is the zero-padded increment `g_{s,t}`. On the
//! finest cells it is replaced by a group-valued lift of the cell increment,
//! which keeps every value in the group and makes the extension exact on
//! signatures of piecewise-linear data.

use std::sync::Arc;

use crate::algebra::{System, Tensor};
use crate::error::{Error, Result};
use crate::paths::{Control, SampledGroupPath};
use crate::sewing::{sew, Integrand, Schedule, SewingResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellLift {
    /// Lift each cell increment into the next group.
    Group,
    /// Zero-pad the cell increment; values leave the group at finite mesh.
    Pad,
}

struct Raise<'a> {
    g: &'a SampledGroupPath,
    up: Arc<System>,
    lift: CellLift,
}

impl Integrand for Raise<'_> {
    fn target(&self) -> &Arc<System> {
        &self.up
    }

    fn len(&self) -> usize {
        self.g.len()
    }

    fn step(&self, i: usize, j: usize) -> Result<Tensor> {
        self.g.increment(i, j).pad(self.up.n())
    }

    fn cell(&self, j: usize) -> Result<Tensor> {
        let inc = self.g.increment(j, j + 1);
        match self.lift {
            CellLift::Group => inc.lift_into_group(),
            CellLift::Pad => inc.pad(self.up.n()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Extension {
    pub path: SampledGroupPath,
    /// One sewing record per added level.
    pub sewing: Vec<SewingResult>,
}

/// Extend `g` from level `m` to `m + 1`; needs `m + 1 > p`.
pub fn extend_one_level(
    g: &SampledGroupPath,
    p: f64,
    omega: &dyn Control,
    schedule: Schedule,
    lift: CellLift,
) -> Result<(SampledGroupPath, SewingResult)> {
    let m = g.level();
    if p < 1.0 {
        return Err(Error::Domain(format!("p must be at least 1, got {p}")));
    }
    if m < p.floor() as usize {
        return Err(Error::Domain(format!(
            "a level-{m} path does not carry p = {p}"
        )));
    }
    let theta = (m + 1) as f64 / p;
    if theta <= 1.0 {
        return Err(Error::Certificate(format!(
            "level {} does not exceed p = {p}",
            m + 1
        )));
    }
    let up = g.sys().at_level(m + 1)?;
    let f = Raise { g, up, lift };
    let r = sew(&f, omega, theta, schedule)?;
    let start = match lift {
        CellLift::Group => g.value(0).lift_into_group()?,
        CellLift::Pad => g.value(0).pad(m + 1)?,
    };
    let values = r
        .values
        .iter()
        .map(|v| start.mul(v))
        .collect::<Result<Vec<_>>>()?;
    Ok((SampledGroupPath::new(g.times().to_vec(), values)?, r))
}

/// Extend to level `n`. Returns the input unchanged when `n` is its own level.
pub fn extend_to_level(
    g: &SampledGroupPath,
    n: usize,
    p: f64,
    omega: &dyn Control,
    schedule: Schedule,
    lift: CellLift,
) -> Result<Extension> {
    if n < g.level() {
        return Err(Error::Domain(format!(
            "cannot extend a level-{} path down to {n}",
            g.level()
        )));
    }
    let mut path = g.clone();
    let mut sewing = Vec::new();
    while path.level() < n {
        let (next, r) = extend_one_level(&path, p, omega, schedule, lift)?;
        path = next;
        sewing.push(r);
    }
    Ok(Extension { path, sewing })
}

/// `‖h‖_{p-var} / ‖g‖_{p-var}` over the whole grid.
pub fn pvar_ratio(h: &SampledGroupPath, g: &SampledGroupPath, p: f64) -> Result<f64> {
    let last = g.len() - 1;
    Ok(h.p_variation(p, 0, last)? / g.p_variation(p, 0, last)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::LengthControl;

    fn points(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                vec![(3.0 * t).sin(), t * t - (5.0 * t).cos()]
            })
            .collect()
    }

    #[test]
    fn reproduces_higher_signatures() {
        let pts = points(40);
        let g2 = SampledGroupPath::signature(2, &pts).unwrap();
        let g4 = SampledGroupPath::signature(4, &pts).unwrap();
        let w = LengthControl::new(&g2, 2.5).unwrap();
        let ext = extend_to_level(&g2, 4, 2.5, &w, Schedule::Omega, CellLift::Group).unwrap();
        for t in 0..pts.len() {
            assert!(ext.path.value(t).max_abs_diff(g4.value(t)) < 1e-12);
            assert!(
                ext.path
                    .value(t)
                    .truncate(2)
                    .unwrap()
                    .max_abs_diff(g2.value(t))
                    < 1e-13
            );
        }
        assert_eq!(ext.sewing.len(), 2);
    }

    #[test]
    fn own_level_is_identity_and_young_threshold_refused() {
        let g = SampledGroupPath::signature(2, &points(8)).unwrap();
        let w = LengthControl::new(&g, 2.5).unwrap();
        let same = extend_to_level(&g, 2, 2.5, &w, Schedule::Dyadic, CellLift::Group).unwrap();
        assert!(same.sewing.is_empty());
        assert!(extend_one_level(&g, 3.2, &w, Schedule::Omega, CellLift::Group).is_err());
    }

    #[test]
    fn padded_cells_leave_the_group() {
        let g = SampledGroupPath::signature(2, &points(6)).unwrap();
        let w = LengthControl::new(&g, 2.0).unwrap();
        let (h, _) = extend_one_level(&g, 2.0, &w, Schedule::Omega, CellLift::Pad).unwrap();
        assert!(h.value(5).grouplike_defect() > 1e-6);
        let (h, _) = extend_one_level(&g, 2.0, &w, Schedule::Omega, CellLift::Group).unwrap();
        assert!(h.value(5).grouplike_defect() < 1e-12);
    }
}
