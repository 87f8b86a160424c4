//! Assembly of the per-stage linear systems with synthesized couplings.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ode::{Coupling, LinearRadialSystem, Source, Trajectory};
use crate::weyl::project_rank3;

use super::config::{CascadeConfig, FaultInjection, Mode};
use super::layout::{pack_rank3, unpack_rank3, SlotGroup, Stage, StageLayout};
use super::profile::HatHProfile;
use super::sachs::SachsSolution;
use super::seed_for;
use super::table::{active_sources, model_exponents, source_power, Family};

/// Decay order the synthesized couplings and sources are built to respect.
pub const SYNTH_DECAY_ORDER: f64 = 2.0;

/// Everything upstream of a stage: the prescribed `Ĥ`, the Sachs solution,
/// and the trajectories of all earlier stages in order.
#[derive(Debug, Clone)]
pub struct Upstream {
    pub profile: Arc<HatHProfile>,
    pub sachs: Arc<SachsSolution>,
    pub stages: Vec<(StageLayout, Arc<Trajectory>)>,
}

/// A quantity that can appear in a source term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceQuantity {
    HatH,
    /// `L - δ/r` from the Sachs solution.
    SachsDeviation,
    Family(Family),
}

impl SourceQuantity {
    pub fn label(self) -> &'static str {
        match self {
            SourceQuantity::HatH => "hatH",
            SourceQuantity::SachsDeviation => "sachs",
            SourceQuantity::Family(f) => f.key(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StageSystem {
    pub layout: StageLayout,
    pub system: LinearRadialSystem,
}

/// Whether `mode` lets the `src` group appear in the `B` rows of `recv`.
fn coupled(mode: Mode, d: usize, recv: &SlotGroup, src: &SlotGroup) -> bool {
    match mode {
        Mode::Generic => true,
        Mode::FullyDecoupled => recv.name == src.name,
        Mode::SameBwDecoupled | Mode::THatDecoupled => match (recv.family, src.family) {
            (None, _) => true,
            (Some(a), Some(b)) if a == b => true,
            (Some(a), Some(b)) => {
                d == 4
                    && matches!(
                        (a, b),
                        (Family::A, Family::BarR) | (Family::BarR, Family::A)
                    )
            }
            (Some(_), None) => false,
        },
    }
}

/// Quantities feeding the `b` entries of `group` in `stage`.
fn sources_for(mode: Mode, d: usize, stage: Stage, group: &SlotGroup) -> Vec<SourceQuantity> {
    if let Some(f) = group.family {
        return active_sources(mode, d, f)
            .into_iter()
            .map(|s| match s {
                Family::HatH => SourceQuantity::HatH,
                s => SourceQuantity::Family(s),
            })
            .collect();
    }
    if mode == Mode::FullyDecoupled {
        return Vec::new();
    }
    let mut out = vec![SourceQuantity::HatH];
    if stage == Stage::Plus1 {
        out.push(SourceQuantity::SachsDeviation);
    }
    for upstream in &Stage::ALL[..stage.index()] {
        for f in StageLayout::new(*upstream, d).families() {
            if !(mode == Mode::THatDecoupled && f == Family::HatT) {
                out.push(SourceQuantity::Family(f));
            }
        }
    }
    out
}

fn source_len(q: SourceQuantity, d: usize) -> usize {
    let n = d - 2;
    match q {
        SourceQuantity::HatH => n * (n + 1) / 2,
        SourceQuantity::SachsDeviation => n * n,
        SourceQuantity::Family(f) => {
            let stage = stage_of(f).expect("evolved family");
            StageLayout::new(stage, d)
                .family_group(f)
                .map_or(0, |g| g.len)
        }
    }
}

/// Stage whose state carries `f`; `None` for the prescribed `Ĥ`.
pub fn stage_of(f: Family) -> Option<Stage> {
    match f.boost_weight() {
        2 => None,
        1 => Some(Stage::Plus1),
        0 => Some(Stage::Zero),
        -1 => Some(Stage::Minus1),
        _ => Some(Stage::Minus2),
    }
}

fn uniform_matrix(rows: usize, cols: usize, seed: u64, scale: f64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| scale * rng.gen_range(-1.0..=1.0))
}

/// One term `r^{power} C X(r)` added to a block of `b(r)`.
struct Term {
    target: std::ops::Range<usize>,
    power: f64,
    coeff: DMatrix<f64>,
    quantity: SourceQuantity,
}

/// Where each evolved family lives upstream: (stage position, range, weight).
type Locator = Vec<Option<(usize, std::ops::Range<usize>, i32)>>;

struct SourceModel {
    terms: Vec<Term>,
    profile: Arc<HatHProfile>,
    sachs: Arc<SachsSolution>,
    stages: Vec<Arc<Trajectory>>,
    locator: Locator,
    n: usize,
}

impl SourceModel {
    fn eval(&self, r: f64, out: &mut [f64]) {
        let n = self.n;
        let mut hat_h: Option<DVector<f64>> = None;
        let mut deviation: Option<DVector<f64>> = None;
        let mut states: Vec<Option<DVector<f64>>> = vec![None; self.stages.len()];
        for term in &self.terms {
            let x: DVector<f64> = match term.quantity {
                SourceQuantity::HatH => hat_h
                    .get_or_insert_with(|| {
                        let h = self.profile.at(r);
                        let mut v = Vec::with_capacity(n * (n + 1) / 2);
                        for i in 0..n {
                            for j in i..n {
                                v.push(h[(i, j)]);
                            }
                        }
                        DVector::from_vec(v)
                    })
                    .clone(),
                SourceQuantity::SachsDeviation => deviation
                    .get_or_insert_with(|| match self.sachs.delta_at(r) {
                        Ok(m) => DVector::from_iterator(n * n, m.transpose().iter().copied()),
                        Err(_) => DVector::from_element(n * n, f64::NAN),
                    })
                    .clone(),
                SourceQuantity::Family(f) => {
                    let (k, range, w) = self.locator[f.index()].clone().expect("located upstream");
                    let y = states[k].get_or_insert_with(|| {
                        self.stages[k].interpolate(r).unwrap_or_else(|_| {
                            DVector::from_element(self.stages[k].dim(), f64::NAN)
                        })
                    });
                    y.rows(range.start, range.len()) * r.powi(-w)
                }
            };
            let contrib = &term.coeff * x * r.powf(term.power);
            for (o, c) in out[term.target.clone()].iter_mut().zip(contrib.iter()) {
                *o += c;
            }
        }
    }
}

fn check_upstream(stage: Stage, cfg: &CascadeConfig, upstream: &Upstream) -> Result<()> {
    if upstream.stages.len() != stage.index()
        || upstream
            .stages
            .iter()
            .zip(Stage::ALL)
            .any(|((l, _), s)| l.stage != s || l.d != cfg.d)
    {
        return Err(Error::Stage(format!(
            "stage {stage} needs the trajectories of the {} earlier stages in order, got {:?}",
            stage.index(),
            upstream
                .stages
                .iter()
                .map(|(l, _)| l.stage.to_string())
                .collect::<Vec<_>>()
        )));
    }
    if upstream.sachs.n() != cfg.n() || upstream.profile.amplitude().nrows() != cfg.n() {
        return Err(Error::Stage(
            "upstream data has the wrong transverse dimension".into(),
        ));
    }
    let slack = 1e-9;
    let covers = |t: &Trajectory| {
        let (lo, hi) = t.r_range();
        !t.diverged && lo <= cfg.r0 * (1.0 + slack) && hi >= cfg.r_max * (1.0 - slack)
    };
    for (_, t) in &upstream.stages {
        if !covers(t) {
            let (lo, hi) = t.r_range();
            let r = if lo > cfg.r0 { cfg.r0 } else { cfg.r_max };
            return Err(Error::CoverageGap { r, lo, hi });
        }
    }
    if !covers(upstream.sachs.trajectory()) {
        let (lo, hi) = upstream.sachs.trajectory().r_range();
        return Err(Error::CoverageGap {
            r: cfg.r_max,
            lo,
            hi,
        });
    }
    Ok(())
}

/// Builds the linear system of `stage` from its printed constant matrix, a
/// seeded `B(r) = B₂/r²` masked by the mode, and sources assembled from the
/// upstream data.
pub fn build_stage_system(
    stage: Stage,
    cfg: &CascadeConfig,
    upstream: &Upstream,
) -> Result<StageSystem> {
    cfg.validate()?;
    check_upstream(stage, cfg, upstream)?;
    let d = cfg.d;
    let layout = StageLayout::new(stage, d);
    let dim = layout.dim();

    let mut a = layout.constant_matrix();
    if stage == Stage::Minus1 && cfg.fault_injection == Some(FaultInjection::CheckvSign) {
        let g = layout.family_group(Family::CheckV).expect("checkv present");
        for i in g.range() {
            a[(i, i)] = -a[(i, i)];
        }
    }

    let b_scale = cfg.coupling_scale / (dim as f64).sqrt();
    let mut b2 = DMatrix::zeros(dim, dim);
    for recv in &layout.groups {
        for src in &layout.groups {
            if coupled(cfg.mode, d, recv, src) {
                let block = uniform_matrix(
                    recv.len,
                    src.len,
                    seed_for(cfg.seed, &["B", stage.key(), recv.name, src.name]),
                    b_scale,
                );
                b2.view_mut((recv.offset, src.offset), (recv.len, src.len))
                    .copy_from(&block);
            }
        }
    }

    let nominal = model_exponents(cfg.mode, d, cfg.nu);
    let mut locator: Locator = vec![None; Family::ALL.len()];
    for (k, (l, _)) in upstream.stages.iter().enumerate() {
        for g in &l.groups {
            if let Some(f) = g.family {
                locator[f.index()] = Some((k, g.range(), g.weight));
            }
        }
    }
    let mut terms = Vec::new();
    for recv in &layout.groups {
        let structural: usize = sources_for(Mode::Generic, d, stage, recv)
            .iter()
            .map(|&q| source_len(q, d))
            .sum();
        if structural == 0 {
            continue;
        }
        let scale = cfg.coupling_scale / (structural as f64).sqrt();
        for q in sources_for(cfg.mode, d, stage, recv) {
            let k = match q {
                SourceQuantity::HatH => cfg.nu as f64,
                SourceQuantity::SachsDeviation => 2.0,
                SourceQuantity::Family(f) => nominal.get(f).expect("present family"),
            };
            let extra = source_power(recv.weight, k, recv.homogeneous_rate());
            let coeff = uniform_matrix(
                recv.len,
                source_len(q, d),
                seed_for(cfg.seed, &["b", stage.key(), recv.name, q.label()]),
                scale,
            );
            terms.push(Term {
                target: recv.range(),
                power: (recv.weight - extra) as f64,
                coeff,
                quantity: q,
            });
        }
    }

    let mut system = LinearRadialSystem::new(a, cfg.r0)?.with_coupling(
        Coupling::InversePower {
            matrix: b2,
            power: 2.0,
        },
        SYNTH_DECAY_ORDER,
    )?;
    if !terms.is_empty() {
        let model = SourceModel {
            terms,
            profile: upstream.profile.clone(),
            sachs: upstream.sachs.clone(),
            stages: upstream.stages.iter().map(|(_, t)| t.clone()).collect(),
            locator,
            n: cfg.n(),
        };
        system = system.with_source(
            Source::Function(Arc::new(move |r, out| model.eval(r, out))),
            SYNTH_DECAY_ORDER,
        )?;
    }
    Ok(StageSystem { layout, system })
}

/// Seeded initial data in `[-1, 1]`; pair × vector groups are projected
/// onto their constrained subspace.
pub fn initial_state(layout: &StageLayout, seed: u64) -> DVector<f64> {
    let n = layout.d - 2;
    let mut y = DVector::zeros(layout.dim());
    for g in &layout.groups {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed_for(seed, &["y0", layout.stage.key(), g.name]));
        let mut v: Vec<f64> = (0..g.len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if g.rank3 {
            v = pack_rank3(&project_rank3(&unpack_rank3(n, &v)));
        }
        y.rows_mut(g.offset, g.len).copy_from_slice(&v);
    }
    y
}

/// Relative distance of a pair × vector block from its constrained subspace.
pub fn constraint_defect(n: usize, packed: &[f64]) -> f64 {
    let norm = packed.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    let proj = pack_rank3(&project_rank3(&unpack_rank3(n, packed)));
    proj.iter()
        .zip(packed)
        .map(|(p, v)| (p - v).powi(2))
        .sum::<f64>()
        .sqrt()
        / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(name: &'static str, family: Option<Family>) -> SlotGroup {
        SlotGroup {
            name,
            family,
            weight: 0,
            eigenvalue: 0.0,
            offset: 0,
            len: 1,
            rank3: false,
        }
    }

    #[test]
    fn coupling_masks() {
        let v = group("v", Some(Family::HatV));
        let t = group("t", Some(Family::HatT));
        let w = group("omega", None);
        assert!(coupled(Mode::Generic, 6, &v, &t));
        assert!(!coupled(Mode::SameBwDecoupled, 6, &v, &t));
        assert!(coupled(Mode::SameBwDecoupled, 6, &w, &t));
        assert!(!coupled(Mode::SameBwDecoupled, 6, &v, &w));
        assert!(!coupled(Mode::FullyDecoupled, 6, &w, &t));
        assert!(coupled(Mode::FullyDecoupled, 6, &v, &v));
        let a = group("a", Some(Family::A));
        let r = group("r", Some(Family::BarR));
        assert!(coupled(Mode::SameBwDecoupled, 4, &a, &r));
        assert!(!coupled(Mode::SameBwDecoupled, 5, &a, &r));
        assert!(!coupled(Mode::FullyDecoupled, 4, &a, &r));
    }

    #[test]
    fn t_hat_sources_are_masked_below_plus_one() {
        let layout = StageLayout::new(Stage::Minus1, 6);
        let v = layout.family_group(Family::CheckV).unwrap();
        let frame = layout.group("rinv_Ni1").unwrap();
        let has_t =
            |m| sources_for(m, 6, Stage::Minus1, v).contains(&SourceQuantity::Family(Family::HatT));
        assert!(has_t(Mode::SameBwDecoupled));
        assert!(!has_t(Mode::THatDecoupled));
        assert!(!sources_for(Mode::THatDecoupled, 6, Stage::Minus1, frame)
            .contains(&SourceQuantity::Family(Family::HatT)));
        assert!(sources_for(Mode::FullyDecoupled, 6, Stage::Minus1, frame).is_empty());
    }

    #[test]
    fn initial_rank3_data_is_constrained() {
        let l = StageLayout::new(Stage::Plus1, 6);
        let y = initial_state(&l, 4);
        let g = l.family_group(Family::HatT).unwrap();
        assert!(constraint_defect(4, &y.as_slice()[g.range()]) < 1e-14);
        assert!(y.as_slice()[g.range()].iter().any(|v| v.abs() > 1e-3));
    }
}
