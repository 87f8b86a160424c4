//! Component families, expected decay tables, and the exponents the
//! synthesized model is built to produce.

use std::fmt;

use serde::Serialize;

use super::config::Mode;

/// The ten irreducible families of the Weyl tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    HatH,
    HatV,
    HatT,
    A,
    BarR,
    BarS,
    BarC,
    CheckV,
    CheckT,
    CheckH,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::HatH,
        Family::HatV,
        Family::HatT,
        Family::A,
        Family::BarR,
        Family::BarS,
        Family::BarC,
        Family::CheckV,
        Family::CheckT,
        Family::CheckH,
    ];

    /// Key used in reports.
    pub fn key(self) -> &'static str {
        match self {
            Family::HatH => "hatH",
            Family::HatV => "hatv",
            Family::HatT => "hatT",
            Family::A => "A",
            Family::BarR => "barR",
            Family::BarS => "barS",
            Family::BarC => "barC",
            Family::CheckV => "checkv",
            Family::CheckT => "checkT",
            Family::CheckH => "checkH",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Family::HatH => "Ĥ",
            Family::HatV => "v̂",
            Family::HatT => "T̂",
            Family::A => "A",
            Family::BarR => "R̄",
            Family::BarS => "S̄",
            Family::BarC => "C̄",
            Family::CheckV => "v̌",
            Family::CheckT => "Ť",
            Family::CheckH => "Ȟ",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn boost_weight(self) -> i32 {
        match self {
            Family::HatH => 2,
            Family::HatV | Family::HatT => 1,
            Family::A | Family::BarR | Family::BarS | Family::BarC => 0,
            Family::CheckV | Family::CheckT => -1,
            Family::CheckH => -2,
        }
    }

    /// Power of `r` multiplying the family in its stage state vector.
    /// `Ĥ` is prescribed rather than evolved; its entry is unused.
    pub fn weight(self) -> i32 {
        match self {
            Family::HatH => 0,
            Family::HatV | Family::HatT => 3,
            Family::A | Family::BarR | Family::BarS | Family::BarC => 2,
            Family::CheckV | Family::CheckT => 1,
            Family::CheckH => 0,
        }
    }

    /// Diagonal entry of the stage constant matrix for this family.
    pub fn eigenvalue(self, d: usize) -> f64 {
        let d = d as f64;
        match self {
            Family::HatH => f64::NAN,
            Family::HatV | Family::BarR | Family::CheckV => -(d - 3.0),
            Family::HatT | Family::BarC => 0.0,
            Family::A | Family::CheckT | Family::CheckH => -1.0,
            Family::BarS => -(d / 2.0 - 2.0),
        }
    }

    /// Whether the family has any components in dimension `d`.
    pub fn present(self, d: usize) -> bool {
        d > 4
            || !matches!(
                self,
                Family::HatT | Family::BarS | Family::BarC | Family::CheckT
            )
    }

    /// Families whose lower-stage appearance sources this one.
    pub fn structural_sources(self) -> &'static [Family] {
        use Family::*;
        match self {
            HatH => &[],
            HatV | HatT => &[HatH],
            A | BarR => &[HatH, HatV],
            BarS | BarC => &[HatH, HatV, HatT],
            CheckV => &[HatV, BarR, HatT],
            CheckT => &[HatT, A, BarS, BarC, HatV, BarR],
            CheckH => &[CheckV, CheckT, HatT, A, BarS, BarC, BarR],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Exponent per family; `None` where the family is absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentTable {
    values: [Option<f64>; 10],
}

impl ExponentTable {
    pub fn get(&self, f: Family) -> Option<f64> {
        self.values[f.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Family, Option<f64>)> + '_ {
        Family::ALL.into_iter().map(|f| (f, self.get(f)))
    }
}

/// Decay exponents the decay tables promise for each family.
///
/// For `d = 4`, `T̂` is absent and its removal from the sources is vacuous, so
/// the `SameBwDecoupled` mode uses the `THatDecoupled` formulas.
pub fn expected_table(mode: Mode, d: usize, nu: u32) -> ExponentTable {
    use Family::*;
    let (d_, nu) = (d as f64, nu as f64);
    let mode = if d == 4 && mode == Mode::SameBwDecoupled {
        Mode::THatDecoupled
    } else {
        mode
    };
    let value = |f: Family| -> f64 {
        match (mode, f) {
            (_, HatH) => nu,
            (Mode::Generic, f) => f.weight() as f64,
            (Mode::FullyDecoupled, f) => f.weight() as f64 - f.eigenvalue(d),
            (_, HatV) => d_.min(nu - 1.0),
            (_, HatT) => 3.0,
            (_, BarR) => (d_ - 1.0).min(nu - 2.0),
            (_, A) => 3f64.min(nu - 2.0),
            (_, BarC) => 2.0,
            (Mode::SameBwDecoupled, BarS) => 2.0,
            (Mode::SameBwDecoupled, CheckV | CheckT) => 1.0,
            (Mode::SameBwDecoupled, CheckH) => 0.0,
            (_, BarS) => (d_ / 2.0).min(nu - 2.0),
            (_, CheckV) => (d_ - 2.0).min(nu - 3.0),
            (_, CheckT) => 2f64.min(nu - 3.0),
            (_, CheckH) => 1f64.min(nu - 4.0),
        }
    };
    let mut values = [None; 10];
    for f in Family::ALL {
        if f.present(d) {
            values[f.index()] = Some(value(f));
        }
    }
    ExponentTable { values }
}

/// Families that source `receiver` in `mode`, restricted to those present.
pub fn active_sources(mode: Mode, d: usize, receiver: Family) -> Vec<Family> {
    match mode {
        Mode::FullyDecoupled => Vec::new(),
        _ => receiver
            .structural_sources()
            .iter()
            .copied()
            .filter(|s| s.present(d))
            .filter(|&s| {
                !(mode == Mode::THatDecoupled && s == Family::HatT && receiver.boost_weight() <= 0)
            })
            .collect(),
    }
}

const RESONANCE_TOL: f64 = 1e-9;

/// Extra inverse power `q` for a source term `r^{w-q} X` feeding a slot of
/// weight `w` from a quantity decaying like `r^{-k}`.
///
/// `q` is the smallest integer keeping the term `O(r^{-2})`, raised by one if
/// the particular solution would then decay exactly at the homogeneous rate
/// `h` (which would produce a `ln r` factor).
pub fn source_power(w: i32, k: f64, h: f64) -> i32 {
    let mut q = ((w as f64 + 2.0 - k - RESONANCE_TOL).ceil() as i32).max(0);
    if (k + q as f64 - 1.0 - h).abs() < RESONANCE_TOL {
        q += 1;
    }
    q
}

/// Exponents the synthesized cascade is built to produce: the homogeneous
/// rate `w - λ` capped by every particular solution, or just the weight when
/// dense intra-stage couplings mix all families.
pub fn model_exponents(mode: Mode, d: usize, nu: u32) -> ExponentTable {
    let mut values = [None; 10];
    values[Family::HatH.index()] = Some(nu as f64);
    for f in Family::ALL.into_iter().skip(1) {
        if !f.present(d) {
            continue;
        }
        let w = f.weight();
        let h = w as f64 - f.eigenvalue(d);
        let v = if mode == Mode::Generic {
            w as f64
        } else {
            active_sources(mode, d, f)
                .into_iter()
                .map(|s| {
                    let k = values[s.index()].expect("sources precede receivers");
                    k + source_power(w, k, h) as f64 - 1.0
                })
                .fold(h, f64::min)
        };
        values[f.index()] = Some(v);
    }
    ExponentTable { values }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(mode: Mode, d: usize, nu: u32) -> Vec<f64> {
        let t = expected_table(mode, d, nu);
        [
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
        ]
        .iter()
        .map(|&f| t.get(f).unwrap())
        .collect()
    }

    #[test]
    fn printed_tables() {
        assert_eq!(
            row(Mode::FullyDecoupled, 8, 9),
            vec![9.0, 8.0, 3.0, 7.0, 4.0, 2.0, 3.0, 6.0, 2.0, 1.0]
        );
        let s = expected_table(Mode::SameBwDecoupled, 6, 5);
        assert_eq!(
            (s.get(Family::HatV), s.get(Family::BarR), s.get(Family::A)),
            (Some(4.0), Some(3.0), Some(3.0))
        );
        assert_eq!(row(Mode::Generic, 7, 6)[1..], row(Mode::Generic, 5, 4)[1..]);
        assert_eq!(
            row(Mode::Generic, 5, 4)[1..],
            [3.0, 3.0, 2.0, 2.0, 2.0, 2.0, 1.0, 1.0, 0.0]
        );
        assert_eq!(
            row(Mode::THatDecoupled, 6, 5),
            vec![5.0, 4.0, 3.0, 3.0, 3.0, 2.0, 3.0, 2.0, 2.0, 1.0]
        );
    }

    #[test]
    fn four_dimensional_chain() {
        let t = expected_table(Mode::SameBwDecoupled, 4, 5);
        let chain: Vec<f64> = [
            Family::HatH,
            Family::HatV,
            Family::BarR,
            Family::A,
            Family::CheckV,
            Family::CheckH,
        ]
        .iter()
        .map(|&f| t.get(f).unwrap())
        .collect();
        assert_eq!(chain, vec![5.0, 4.0, 3.0, 3.0, 2.0, 1.0]);
        for f in [Family::HatT, Family::BarS, Family::BarC, Family::CheckT] {
            assert_eq!(t.get(f), None);
        }
    }

    #[test]
    fn tables_are_monotone_in_mode() {
        for d in 5..=9 {
            for nu in 4..=10 {
                let t: Vec<ExponentTable> = Mode::ALL
                    .iter()
                    .map(|&m| expected_table(m, d, nu))
                    .collect();
                for f in Family::ALL {
                    for w in t.windows(2) {
                        assert!(
                            w[1].get(f).unwrap() >= w[0].get(f).unwrap(),
                            "{f} d={d} nu={nu}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn model_meets_tables() {
        for d in 4..=9 {
            for nu in 4..=10 {
                for mode in Mode::ALL {
                    let (m, t) = (model_exponents(mode, d, nu), expected_table(mode, d, nu));
                    for f in Family::ALL {
                        assert_eq!(m.get(f).is_some(), t.get(f).is_some());
                        if let (Some(m), Some(t)) = (m.get(f), t.get(f)) {
                            assert!(
                                m >= t - 1e-12,
                                "{mode} d={d} nu={nu} {f}: model {m} < table {t}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn model_reproduces_decoupled_tables_exactly() {
        for (d, nu) in [(6, 5), (8, 9)] {
            for mode in [Mode::THatDecoupled, Mode::FullyDecoupled] {
                assert_eq!(
                    model_exponents(mode, d, nu),
                    expected_table(mode, d, nu),
                    "{mode} d={d} nu={nu}"
                );
            }
        }
        assert_eq!(
            model_exponents(Mode::SameBwDecoupled, 4, 5),
            expected_table(Mode::SameBwDecoupled, 4, 5)
        );
    }

    #[test]
    fn source_power_rules() {
        // r³ v̂ fed by Ĥ ~ r^{-4}: one extra power keeps the term O(r^{-2})
        assert_eq!(source_power(3, 4.0, 5.0), 1);
        assert_eq!(source_power(3, 5.0, 5.0), 0);
        // particular rate 8 would equal the homogeneous rate 8
        assert_eq!(source_power(3, 9.0, 8.0), 1);
        assert_eq!(source_power(0, 1.0, 1.0), 2);
    }
}
