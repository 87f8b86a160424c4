//! The acceptance criteria as runnable checks, shared by the `acceptance`
//! test target and the command-line self-test.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cascade::{
    execute_cascade, expected_table, solve_sachs, CascadeConfig, ExponentReport, Family,
    FaultInjection, Mode, IDENTICALLY_ZERO,
};
use crate::error::Result;
use crate::ode::{
    fit_power_law, growth_exponent, plant_eigenvalue, prop1_verify, random_prop1_system,
    FitOptions, FitWindow,
};
use crate::weyl::{decompose, random_parts, reconstruct, WeylTensor};

use super::oracle::{oracle_decompose, oracle_random_weyl};

/// Componentwise tolerance of the algebraic criteria.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Default allowance on decay exponents.
pub const EXPONENT_TOL: f64 = 0.1;
/// Accuracy demanded of the estimator on exact power laws.
pub const CALIBRATION_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Reduced sample counts for the self-test.
    Quick,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceOptions {
    pub scale: Scale,
    pub exponent_tol: f64,
    pub fault: Option<FaultInjection>,
    pub seed: u64,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        Self {
            scale: Scale::Full,
            exponent_tol: EXPONENT_TOL,
            fault: None,
            seed: 7,
        }
    }
}

impl AcceptanceOptions {
    fn count(&self, full: usize, quick: usize) -> usize {
        match self.scale {
            Scale::Full => full,
            Scale::Quick => quick,
        }
    }

    fn cascade(&self, d: usize, nu: u32, mode: Mode) -> CascadeConfig {
        CascadeConfig {
            exponent_tol: self.exponent_tol,
            fault_injection: self.fault,
            ..CascadeConfig::new(d, nu, mode, self.seed)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const CRITERIA: [(u32, &str); 9] = [
    (1, "decomposition round trip"),
    (2, "oracle equivalence"),
    (3, "frame identities"),
    (4, "boundedness property suite"),
    (5, "Sachs behaviour"),
    (6, "generic cascade bounds"),
    (7, "decoupled-mode bounds"),
    (8, "four-dimensional reduction"),
    (9, "estimator calibration"),
];

type Outcome = Result<(bool, String)>;

/// Runs one criterion; errors become failures with the error as detail.
pub fn run_criterion(id: u32, opts: &AcceptanceOptions) -> CriterionResult {
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map_or("unknown", |c| c.1);
    let started = Instant::now();
    let outcome: Outcome = match id {
        1 => round_trip(opts),
        2 => oracle_equivalence(opts),
        3 => frame_identities(opts),
        4 => boundedness_suite(opts),
        5 => sachs_behaviour(opts),
        6 => generic_bounds(opts),
        7 => decoupled_bounds(opts),
        8 => four_dimensional(opts),
        9 => calibration(opts),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult {
        id,
        name,
        pass,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    }
}

pub fn run_all(opts: &AcceptanceOptions) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|&(id, _)| run_criterion(id, opts))
        .collect()
}

fn within_budget(started: Instant, budget: f64, detail: &mut String) -> bool {
    let t = started.elapsed().as_secs_f64();
    detail.push_str(&format!(" [{t:.1}s of {budget:.0}s]"));
    t <= budget
}

fn round_trip(opts: &AcceptanceOptions) -> Outcome {
    let started = Instant::now();
    let count = opts.count(500, 50);
    let mut worst_parts = 0.0f64;
    let mut worst_tensor = 0.0f64;
    for d in 4..=8 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (d as u64) << 32);
        for _ in 0..count {
            let p = random_parts(d, &mut rng);
            worst_parts = worst_parts.max(decompose(&reconstruct(&p)?)?.max_abs_diff(&p));
            let c = oracle_random_weyl(d, &mut rng)?;
            worst_tensor = worst_tensor.max(reconstruct(&decompose(&c)?)?.max_abs_diff(&c));
        }
    }
    let mut detail = format!(
        "{count} per d in 4..=8; max deviation parts {worst_parts:.2e}, tensors {worst_tensor:.2e}"
    );
    let ok = worst_parts <= ALGEBRA_TOL && worst_tensor <= ALGEBRA_TOL;
    Ok((within_budget(started, 30.0, &mut detail) && ok, detail))
}

fn oracle_equivalence(opts: &AcceptanceOptions) -> Outcome {
    let count = opts.count(100, 20);
    let mut worst = 0.0f64;
    for d in [5, 6] {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1000 + d as u64));
        for _ in 0..count {
            let c = oracle_random_weyl(d, &mut rng)?;
            worst = worst.max(decompose(&c)?.max_abs_diff(&oracle_decompose(&c)));
        }
    }
    Ok((
        worst <= ALGEBRA_TOL,
        format!("{count} tensors each for d = 5, 6; max deviation {worst:.2e}"),
    ))
}

/// Largest violation of the defining frame identities for one tensor.
pub fn identity_defect(c: &WeylTensor) -> Result<f64> {
    let p = decompose(c)?;
    let d = c.dim();
    let n = d - 2;
    let mut worst = p.hat_h.trace().abs().max(p.check_h.trace().abs());
    for i in 0..n {
        worst = worst.max((c.get([0, 1, 0, i + 2]) + (d as f64 - 3.0) * p.hat_v[[i]]).abs());
    }
    worst = worst.max((c.get([0, 1, 0, 1]) + p.bar_r / 2.0).abs());
    Ok(worst)
}

fn frame_identities(opts: &AcceptanceOptions) -> Outcome {
    let count = opts.count(500, 50);
    let mut worst = 0.0f64;
    for d in 4..=8 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(2000 + d as u64));
        for _ in 0..count {
            worst = worst.max(identity_defect(&oracle_random_weyl(d, &mut rng)?)?);
        }
    }
    Ok((
        worst <= ALGEBRA_TOL,
        format!("{count} per d in 4..=8; max defect {worst:.2e}"),
    ))
}

fn boundedness_suite(opts: &AcceptanceOptions) -> Outcome {
    let started = Instant::now();
    let count = opts.count(100, 25);
    let mut bounded = 0;
    let mut worst_slope = f64::NEG_INFINITY;
    for k in 0..count {
        let n = 1 + k % 12;
        let (sys, y0) = random_prop1_system(n, opts.seed.wrapping_add(k as u64))?;
        let b = prop1_verify(&sys, &y0, 1e6)?;
        worst_slope = worst_slope.max(b.tail_slope);
        bounded += b.bounded as usize;
    }
    let mut probes = Vec::new();
    let mut probe_ok = true;
    for mu in [0.5, 1.0] {
        for k in 0..opts.count(5, 2) {
            let (sys, mut y0) = random_prop1_system(4, opts.seed.wrapping_add(500 + k as u64))?;
            let planted = plant_eigenvalue(&sys, 3, mu);
            y0[3] = if y0[3] >= 0.0 {
                y0[3].max(0.5)
            } else {
                y0[3].min(-0.5)
            };
            let g = growth_exponent(&planted, &y0, 1e6)?;
            probe_ok &= (g - mu).abs() <= opts.exponent_tol;
            probes.push(format!("{g:.3}"));
        }
    }
    let mut detail = format!(
        "{bounded}/{count} bounded (max tail slope {worst_slope:.3}); planted growth {}",
        probes.join(" ")
    );
    Ok((
        within_budget(started, 120.0, &mut detail) && bounded == count && probe_ok,
        detail,
    ))
}

fn sachs_behaviour(opts: &AcceptanceOptions) -> Outcome {
    let started = Instant::now();
    let tol = opts.exponent_tol;
    let mut ok = true;
    let mut rows = Vec::new();
    for d in [5, 6] {
        for nu in [4u32, 5] {
            let s = solve_sachs(&CascadeConfig::new(d, nu, Mode::Generic, opts.seed))?;
            let dev = s.deviation.exponent.unwrap_or(f64::INFINITY);
            let res = s.residual.exponent.unwrap_or(f64::INFINITY);
            ok &= dev >= 2.0 - tol && res >= nu as f64 - 3.0 - tol;
            rows.push(format!("(d={d},nu={nu}) dev {dev:.3} res {res:.3}"));
        }
    }
    // singular F whose degenerate direction Ĥ leaves alone
    let n = 3;
    let f = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j && i + 1 < n { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let e = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let h = vec![vec![1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0; 3]];
    let cfg = CascadeConfig {
        f: Some(f),
        e: Some(e),
        hat_h: Some(h),
        ..CascadeConfig::new(5, 4, Mode::Generic, opts.seed)
    };
    let s = solve_sachs(&cfg)?;
    let dev = s.deviation.exponent.unwrap_or(f64::INFINITY);
    let defect = (s.r_l_at(cfg.r_max)?[(n - 1, n - 1)] - 1.0).abs();
    let degenerate = dev < 2.0 - tol && defect > 0.5;
    rows.push(format!("singular F: dev {dev:.3}, |rL-1| {defect:.3}"));
    let mut detail = rows.join("; ");
    Ok((
        within_budget(started, 30.0, &mut detail) && ok && degenerate,
        detail,
    ))
}

fn exponent_summary(r: &ExponentReport) -> String {
    r.components
        .iter()
        .filter_map(|(k, c)| {
            c.measured
                .map(|m| format!("{k} {m:.2}{}", if c.pass { "" } else { "!" }))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn generic_bounds(opts: &AcceptanceOptions) -> Outcome {
    let tol = opts.exponent_tol;
    let mut ok = true;
    let mut rows = Vec::new();
    for (d, nu) in [(5, 4), (6, 5), (7, 6)] {
        let started = Instant::now();
        let r = execute_cascade(&opts.cascade(d, nu, Mode::Generic))?.report;
        let sat = |f: Family, k: f64| {
            r.component(f)
                .measured
                .is_some_and(|m| (m - k).abs() <= tol)
        };
        let saturated = sat(Family::HatT, 3.0) && sat(Family::BarC, 2.0);
        let mut row = format!("(d={d},nu={nu}) {}", exponent_summary(&r));
        if !r.bounded_states {
            row.push_str(" unbounded");
        }
        if !saturated {
            row.push_str(" unsaturated");
        }
        ok &= within_budget(started, 60.0, &mut row) && r.all_pass && saturated;
        rows.push(row);
    }
    Ok((ok, rows.join("; ")))
}

/// The three decoupled tables at the two printed `(d, ν)` points, in the
/// order Ĥ, v̂, T̂, R̄, S̄, C̄, A, v̌, Ť, Ȟ.
pub const PRINTED_TABLES: [(Mode, usize, u32, [f64; 10]); 6] = [
    (
        Mode::SameBwDecoupled,
        6,
        5,
        [5.0, 4.0, 3.0, 3.0, 2.0, 2.0, 3.0, 1.0, 1.0, 0.0],
    ),
    (
        Mode::THatDecoupled,
        6,
        5,
        [5.0, 4.0, 3.0, 3.0, 3.0, 2.0, 3.0, 2.0, 2.0, 1.0],
    ),
    (
        Mode::FullyDecoupled,
        6,
        5,
        [5.0, 6.0, 3.0, 5.0, 3.0, 2.0, 3.0, 4.0, 2.0, 1.0],
    ),
    (
        Mode::SameBwDecoupled,
        8,
        9,
        [9.0, 8.0, 3.0, 7.0, 2.0, 2.0, 3.0, 1.0, 1.0, 0.0],
    ),
    (
        Mode::THatDecoupled,
        8,
        9,
        [9.0, 8.0, 3.0, 7.0, 4.0, 2.0, 3.0, 6.0, 2.0, 1.0],
    ),
    (
        Mode::FullyDecoupled,
        8,
        9,
        [9.0, 8.0, 3.0, 7.0, 4.0, 2.0, 3.0, 6.0, 2.0, 1.0],
    ),
];

const TABLE_ORDER: [Family; 10] = [
    Family::HatH,
    Family::HatV,
    Family::HatT,
    Family::BarR,
    Family::BarS,
    Family::BarC,
    Family::A,
    Family::CheckV,
    Family::CheckT,
    Family::CheckH,
];

fn decoupled_bounds(opts: &AcceptanceOptions) -> Outcome {
    let mut ok = true;
    let mut rows = Vec::new();
    for (mode, d, nu, printed) in PRINTED_TABLES {
        let table = expected_table(mode, d, nu);
        let locked = TABLE_ORDER
            .iter()
            .zip(printed)
            .all(|(&f, v)| table.get(f) == Some(v));
        let started = Instant::now();
        let r = execute_cascade(&opts.cascade(d, nu, mode))?.report;
        let bounds = r.components.values().all(|c| c.pass);
        let mut row = format!("{mode} (d={d},nu={nu}) {}", exponent_summary(&r));
        if !locked {
            row.push_str(" table-mismatch");
        }
        ok &= within_budget(started, 60.0, &mut row) && locked && bounds;
        rows.push(row);
    }
    Ok((ok, rows.join("; ")))
}

fn four_dimensional(opts: &AcceptanceOptions) -> Outcome {
    let started = Instant::now();
    let tol = opts.exponent_tol;
    let r = execute_cascade(&opts.cascade(4, 5, Mode::SameBwDecoupled))?.report;
    let absent = [Family::HatT, Family::BarS, Family::BarC, Family::CheckT]
        .iter()
        .all(|&f| r.component(f).class == IDENTICALLY_ZERO && r.component(f).measured.is_none());
    let chain = [
        (Family::HatH, 5.0),
        (Family::HatV, 4.0),
        (Family::BarR, 3.0),
        (Family::A, 3.0),
        (Family::CheckV, 2.0),
        (Family::CheckH, 1.0),
    ];
    let bounds = chain
        .iter()
        .all(|&(f, k)| r.component(f).measured.is_some_and(|m| m >= k - tol));
    let mut detail = format!(
        "chain {}{}",
        chain
            .iter()
            .map(|&(f, _)| format!("{:.2}", r.component(f).measured.unwrap_or(f64::NAN)))
            .collect::<Vec<_>>()
            .join(","),
        if absent {
            ""
        } else {
            "; higher families present"
        }
    );
    Ok((
        within_budget(started, 60.0, &mut detail) && absent && bounds,
        detail,
    ))
}

fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let m = ((hi / lo).log10() * per_decade as f64).round() as usize;
    (0..=m)
        .map(|k| lo * 10f64.powf(k as f64 / per_decade as f64))
        .collect()
}

/// Exponent fitted to `ln r / r` on `[1e4, 1e6]`.
pub fn log_fixture_exponent() -> Result<f64> {
    let r = log_grid(1.0, 1e6, 50);
    let y: Vec<f64> = r.iter().map(|r| r.ln() / r).collect();
    let opts = FitOptions {
        window: FitWindow::Range { lo: 1e4, hi: 1e6 },
        ..Default::default()
    };
    Ok(fit_power_law(&r, &y, &opts)?.exponent.unwrap_or(f64::NAN))
}

fn calibration(opts: &AcceptanceOptions) -> Outcome {
    let r = log_grid(1.0, 1e6, 50);
    let window = FitOptions {
        window: FitWindow::Range { lo: 1e3, hi: 1e6 },
        ..Default::default()
    };
    let mut ok = true;
    let mut fitted = Vec::new();
    for k in [0, 1, 2, 3, 5] {
        let y: Vec<f64> = r.iter().map(|r| r.powi(-k)).collect();
        let a = fit_power_law(&r, &y, &window)?.exponent.unwrap_or(f64::NAN);
        ok &= (a - k as f64).abs() <= CALIBRATION_TOL;
        fitted.push(format!("{a:.4}"));
    }
    let log = log_fixture_exponent()?;
    ok &= (log - 0.913).abs() <= CALIBRATION_TOL;
    // ln r / r is a decay-1 quantity; the exponent tolerance must absorb the log
    let absorbed = log >= 1.0 - opts.exponent_tol;
    Ok((
        ok && absorbed,
        format!(
            "power laws {}; ln r/r {log:.4}{}",
            fitted.join(" "),
            if absorbed {
                ""
            } else {
                " (below 1 - exponent tolerance)"
            }
        ),
    ))
}
