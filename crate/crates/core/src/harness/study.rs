//! Grid-convergence studies, the discontinuity sweep and timing benches.

use crate::error::Result;
use crate::harness::scenario::{run_scenario, Cut, Method, ModelSource, Scenario};
use crate::harness::signal::convergence_order;
use crate::model::LayeredModelSpec;
use crate::error::Error;

/// How reference solutions are produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSpec {
    pub method: Method,
    /// Reference cell size is the finest study cell size divided by this.
    pub refine: usize,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        Self { method: Method::Df20, refine: 4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutErrorRow {
    pub method: Method,
    pub h: f64,
    pub max_norm: f64,
    pub one_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slope {
    pub method: Method,
    pub max_norm: f64,
    pub one_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<CutErrorRow>,
    pub slopes: Vec<Slope>,
}

fn final_cut(scn: &Scenario) -> Result<Cut> {
    if scn.cut_x.is_none() {
        return Err(Error::config("cut_x", "required for cut error studies"));
    }
    Ok(run_scenario(scn)?.cut.expect("cut requested"))
}

/// Final-time cut of the reference run for cell size `h / refine`
/// (square cells scaled with the base aspect ratio).
pub fn reference_cut(base: &Scenario, h: f64, reference: ReferenceSpec) -> Result<Cut> {
    let aspect = base.dy / base.dx;
    let hr = h / reference.refine as f64;
    let mut scn = base.with_grid(reference.method, hr, hr * aspect);
    scn.snapshots.clear();
    scn.receivers = None;
    scn.repeats = 1;
    final_cut(&scn)
}

/// Cut errors of every method at every `h` against one reference at
/// `min(h) / refine`, plus fitted slopes.
pub fn convergence_study(base: &Scenario, methods: &[Method], hs: &[f64], reference: ReferenceSpec) -> Result<ConvergenceReport> {
    if hs.is_empty() {
        return Err(Error::config("h", "at least one grid size is required"));
    }
    let h_min = hs.iter().copied().fold(f64::INFINITY, f64::min);
    let r = reference_cut(base, h_min, reference)?;
    let aspect = base.dy / base.dx;
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for &m in methods {
        let mut maxs = Vec::new();
        let mut ones = Vec::new();
        for &h in hs {
            let mut scn = base.with_grid(m, h, h * aspect);
            scn.snapshots.clear();
            scn.receivers = None;
            scn.repeats = 1;
            let (max_norm, one_norm) = final_cut(&scn)?.error_against(&r)?;
            rows.push(CutErrorRow { method: m, h, max_norm, one_norm });
            maxs.push(max_norm);
            ones.push(one_norm);
        }
        if hs.len() >= 2 {
            slopes.push(Slope { method: m, max_norm: convergence_order(&maxs, hs)?, one_norm: convergence_order(&ones, hs)? });
        }
    }
    Ok(ConvergenceReport { rows, slopes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub method: Method,
    pub max_norm: f64,
    pub one_norm: f64,
}

/// For every `lambda`, rebuild the layered model with that jump reduction and
/// measure each method's cut error against its own reference.
pub fn lambda_sweep(base: &Scenario, lambdas: &[f64], methods: &[Method], reference: ReferenceSpec) -> Result<Vec<SweepRow>> {
    let spec: LayeredModelSpec = match &base.model {
        ModelSource::Layered(s) => *s,
        ModelSource::Field(_) => return Err(Error::config("model", "the lambda sweep needs a layered model")),
    };
    let mut rows = Vec::new();
    for &lambda in lambdas {
        let mut scn = base.clone();
        scn.model = ModelSource::Layered(LayeredModelSpec { lambda_pct: lambda, ..spec });
        let r = reference_cut(&scn, scn.dx, reference)?;
        for &m in methods {
            let mut run = scn.with_grid(m, scn.dx, scn.dy);
            run.snapshots.clear();
            run.receivers = None;
            run.repeats = 1;
            let (max_norm, one_norm) = final_cut(&run)?.error_against(&r)?;
            rows.push(SweepRow { lambda, method: m, max_norm, one_norm });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub method: Method,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub steps: usize,
    pub seconds: f64,
    pub per_cell_step_ns: f64,
}

/// Mean wall-clock time of the time loop for every method and grid size.
pub fn bench(base: &Scenario, methods: &[Method], hs: &[f64]) -> Result<Vec<TimingRow>> {
    let aspect = base.dy / base.dx;
    let mut rows = Vec::new();
    for &h in hs {
        for &m in methods {
            let mut scn = base.with_grid(m, h, h * aspect);
            scn.snapshots.clear();
            let out = run_scenario(&scn)?;
            let cells = (out.geom.nx * out.geom.ny) as f64;
            let per = if out.steps > 0 { out.timing.seconds * 1e9 / (cells * out.steps as f64) } else { 0.0 };
            rows.push(TimingRow {
                method: m,
                h,
                nx: out.geom.nx,
                ny: out.geom.ny,
                steps: out.steps,
                seconds: out.timing.seconds,
                per_cell_step_ns: per,
            });
        }
    }
    Ok(rows)
}
