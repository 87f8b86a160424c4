use std::fmt;

use serde::Serialize;

use super::WeylTensor;

/// Absolute tolerance on unit-max-norm data for every algebraic identity.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    NonFinite,
    Antisymmetry,
    PairSymmetry,
    FirstBianchi,
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub max_violation: f64,
}

/// Identities that failed, each with its largest violation (measured after
/// rescaling the tensor to unit max-norm).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub fn get(&self, kind: ViolationKind) -> Option<&Violation> {
        self.violations.iter().find(|v| v.kind == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("no violations");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{:?} (max {:.3e})", v.kind, v.max_violation)?;
        }
        Ok(())
    }
}

/// Checks antisymmetry, pair symmetry, the first Bianchi identity and
/// tracelessness with the null-frame inverse metric.
pub fn validate_weyl(c: &WeylTensor) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !c.is_finite() {
        report.push(Violation {
            kind: ViolationKind::NonFinite,
            max_violation: f64::INFINITY,
        });
        return report;
    }
    let scale = c.max_abs();
    if scale == 0.0 {
        return report;
    }
    let c = c.scaled(1.0 / scale);
    let frame = c.frame();
    let d = c.dim();

    let mut antisym = 0.0f64;
    let mut pair = 0.0f64;
    let mut bianchi = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            for x in 0..d {
                for e in 0..d {
                    let v = c.get([a, b, x, e]);
                    antisym = antisym
                        .max((v + c.get([b, a, x, e])).abs())
                        .max((v + c.get([a, b, e, x])).abs());
                    pair = pair.max((v - c.get([x, e, a, b])).abs());
                    let cyc = v + c.get([a, x, e, b]) + c.get([a, e, b, x]);
                    bianchi = bianchi.max(cyc.abs());
                }
            }
        }
    }

    let mut trace = 0.0f64;
    for a in 0..d {
        for x in 0..d {
            let mut t = 0.0;
            for b in 0..d {
                for e in 0..d {
                    let g = frame.inverse_metric(b, e);
                    if g != 0.0 {
                        t += g * c.get([a, b, x, e]);
                    }
                }
            }
            trace = trace.max(t.abs());
        }
    }

    for (kind, m) in [
        (ViolationKind::Antisymmetry, antisym),
        (ViolationKind::PairSymmetry, pair),
        (ViolationKind::FirstBianchi, bianchi),
        (ViolationKind::Trace, trace),
    ] {
        if m > IDENTITY_TOL {
            report.push(Violation {
                kind,
                max_violation: m,
            });
        }
    }
    report
}
