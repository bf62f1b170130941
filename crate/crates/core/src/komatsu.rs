//! Validation of weight-sequence growth conditions for ultradifferentiable
//! classes, plus a deterministic search for admissible constants.
//!
//! Condition (3) is checked literally, including the `min` over
//! splittings. The literal inequality fails for factorial-type sequences; the
//! report surfaces the first violating index instead of silently
//! substituting a more common variant.

use std::io::{Read, Write};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::numfmt::fmt_f64;

/// Positive weight sequence `M_0..M_K` with candidate constants `A`, `H`.
///
/// Condition (1) demands `M_0 = 1`; it is reported by
/// `validate_conditions` rather than enforced here, so that files with a
/// bad leading weight still produce a readable report.
#[derive(Clone, Debug, PartialEq)]
pub struct KomatsuSequence {
    values: Vec<f64>,
    a: f64,
    h: f64,
}

impl KomatsuSequence {
    pub fn new(values: Vec<f64>, a: f64, h: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invariant("weight sequence must be non-empty".into()));
        }
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Invariant(format!(
                    "M_{k} = {v} is not strictly positive and finite"
                )));
            }
        }
        if !a.is_finite() || a <= 0.0 || !h.is_finite() || h <= 0.0 {
            return Err(Error::Invariant(
                "constants A and H must be positive".into(),
            ));
        }
        Ok(Self { values, a, h })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Largest index K of the stored sequence.
    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }
}

/// Outcome of a single condition check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConditionCheck {
    pub holds: bool,
    /// Smallest index `k` at which the printed inequality fails.
    pub first_violation: Option<usize>,
}

impl ConditionCheck {
    fn pass() -> Self {
        Self {
            holds: true,
            first_violation: None,
        }
    }

    fn fail(k: usize) -> Self {
        Self {
            holds: false,
            first_violation: Some(k),
        }
    }
}

/// Per-condition report for the three printed growth conditions.
#[derive(Clone, Copy, Debug)]
pub struct ConditionReport {
    /// (1): `M_0 = 1`.
    pub normalized: ConditionCheck,
    /// (2): `M_{k+1} <= A * H^k * M_k` for all `k <= K-1`.
    pub growth: ConditionCheck,
    /// (3), literal form: `M_{2k} <= A * H^k * min_{0<=q<=k} M_q M_{k-q}`
    /// for all `2k <= K`.
    pub doubling: ConditionCheck,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.normalized.holds && self.growth.holds && self.doubling.holds
    }
}

/// Checks the three printed conditions on `M_0..M_K`, reporting each
/// separately with its first violating index.
pub fn validate_conditions(m: &KomatsuSequence) -> Result<ConditionReport> {
    let values = m.values();
    if m.max_index() < 2 {
        return Err(Error::InsufficientData(
            "condition checks need K >= 2".into(),
        ));
    }
    let normalized = if values[0] == 1.0 {
        ConditionCheck::pass()
    } else {
        ConditionCheck::fail(0)
    };
    let growth = check_growth(values, m.max_index(), m.a(), m.h());
    let doubling = check_doubling(values, m.max_index(), m.a(), m.h());
    Ok(ConditionReport {
        normalized,
        growth,
        doubling,
    })
}

fn check_growth(values: &[f64], k_max: usize, a: f64, h: f64) -> ConditionCheck {
    for k in 0..k_max {
        if values[k + 1] > a * h.powi(k as i32) * values[k] {
            return ConditionCheck::fail(k);
        }
    }
    ConditionCheck::pass()
}

fn check_doubling(values: &[f64], k_max: usize, a: f64, h: f64) -> ConditionCheck {
    let mut k = 0;
    while 2 * k <= k_max {
        let min_split = (0..=k)
            .map(|q| values[q] * values[k - q])
            .fold(f64::INFINITY, f64::min);
        if values[2 * k] > a * h.powi(k as i32) * min_split {
            return ConditionCheck::fail(k);
        }
        k += 1;
    }
    ConditionCheck::pass()
}

/// Cap on the constants returned by `find_constants`.
pub const CONSTANT_CAP: f64 = 1e9;

/// Searches for constants `(A, H)` satisfying conditions (1)-(2) on
/// `M_0..M_K`: the smallest admissible `A` (taking `H` up to the cap),
/// then the smallest `H` for that `A`, refined upward until the
/// certificate re-validates.
///
/// Fails with `SearchCapExceeded` when no admissible pair exists below
/// `CONSTANT_CAP`.
pub fn find_constants(values: &[f64], k_max: usize) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Invariant("weight sequence must be non-empty".into()));
    }
    for (k, &v) in values.iter().enumerate() {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Invariant(format!(
                "M_{k} = {v} is not strictly positive and finite"
            )));
        }
    }
    if k_max + 1 > values.len() {
        return Err(Error::Invariant(format!(
            "K = {k_max} exceeds the {} stored weights",
            values.len()
        )));
    }
    if values[0] != 1.0 {
        return Err(Error::Invariant(
            "condition (1) requires M_0 = 1; no constants can fix it".into(),
        ));
    }
    if k_max == 0 {
        return Ok((1.0, 1.0));
    }

    let ratios: Vec<f64> = (0..k_max).map(|k| values[k + 1] / values[k]).collect();

    // Smallest A for which (2) is satisfiable with H below the cap: the
    // k = 0 constraint is H-independent, the rest can be absorbed by H.
    let mut a = ratios
        .iter()
        .enumerate()
        .map(|(k, &r)| r / CONSTANT_CAP.powi(k as i32))
        .fold(0.0f64, f64::max);
    if !a.is_finite() || a > CONSTANT_CAP {
        return Err(Error::SearchCapExceeded(format!(
            "no admissible A below {}",
            fmt_f64(CONSTANT_CAP)
        )));
    }

    // Smallest H for that A: sup over k >= 1 of (ratio_k / A)^(1/k).
    let mut h = ratios
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &r)| (r / a).powf(1.0 / k as f64))
        .fold(f64::MIN_POSITIVE, f64::max);
    if !h.is_finite() {
        return Err(Error::SearchCapExceeded("H overflowed".into()));
    }

    // Upward refinement: absorb the rounding of powf so the certificate
    // re-validates exactly.
    let mut refined = false;
    for _ in 0..256 {
        if check_growth(values, k_max, a, h).holds {
            refined = true;
            break;
        }
        h *= 1.0 + 4.0 * f64::EPSILON;
        if !check_growth(values, k_max, a, h).holds {
            a *= 1.0 + 4.0 * f64::EPSILON;
        }
    }
    if !refined {
        return Err(Error::SearchCapExceeded(
            "refinement failed to certify the constants".into(),
        ));
    }
    if a > CONSTANT_CAP || h > CONSTANT_CAP {
        return Err(Error::SearchCapExceeded(format!(
            "constants exceed the cap {}",
            fmt_f64(CONSTANT_CAP)
        )));
    }
    Ok((a, h))
}

#[derive(Deserialize)]
struct KomatsuFile {
    values: Vec<f64>,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "H")]
    h: f64,
}

/// Reads `komatsu.json`: `{"values": [...], "A": number, "H": number}`.
pub fn load_komatsu_json<R: Read>(reader: R) -> Result<KomatsuSequence> {
    let file: KomatsuFile =
        serde_json::from_reader(reader).map_err(|e| Error::Parse(e.to_string()))?;
    KomatsuSequence::new(file.values, file.a, file.h)
}

/// Writes `komatsu.json` with 17-significant-digit numbers.
pub fn save_komatsu_json<W: Write>(mut w: W, m: &KomatsuSequence) -> Result<()> {
    writeln!(w, "{{")?;
    let values: Vec<String> = m.values().iter().map(|&v| fmt_f64(v)).collect();
    writeln!(w, "  \"values\": [{}],", values.join(", "))?;
    writeln!(w, "  \"A\": {},", fmt_f64(m.a()))?;
    writeln!(w, "  \"H\": {}", fmt_f64(m.h()))?;
    writeln!(w, "}}")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorials(n: usize) -> Vec<f64> {
        let mut v = vec![1.0];
        for k in 1..=n {
            v.push(v[k - 1] * k as f64);
        }
        v
    }

    #[test]
    fn constant_sequence_passes_all_three() {
        let m = KomatsuSequence::new(vec![1.0; 65], 1.0, 1.0).unwrap();
        let rep = validate_conditions(&m).unwrap();
        assert!(rep.all_hold());
    }

    #[test]
    fn factorials_pass_growth_with_a1_h2() {
        // Brute-force oracle over k <= 63: (k+1)! <= 2^k * k! iff k+1 <= 2^k.
        for k in 0..64u32 {
            assert!((k + 1) as f64 <= 2f64.powi(k as i32), "oracle at k={k}");
        }
        let m = KomatsuSequence::new(factorials(64), 1.0, 2.0).unwrap();
        let rep = validate_conditions(&m).unwrap();
        assert!(rep.normalized.holds);
        assert!(rep.growth.holds);
    }

    #[test]
    fn factorials_fail_printed_doubling_condition_at_k2() {
        // Brute-force oracle: (2k)! vs 2^k * min_q q!(k-q)!.
        // k=1: 2 <= 2*min(1,1) holds; k=2: 24 > 4*min(2,1,2) = 4.
        let m = KomatsuSequence::new(factorials(64), 1.0, 2.0).unwrap();
        let rep = validate_conditions(&m).unwrap();
        assert!(!rep.doubling.holds);
        assert_eq!(rep.doubling.first_violation, Some(2));
    }

    #[test]
    fn validate_reports_bad_leading_weight() {
        let m = KomatsuSequence::new(vec![2.0, 2.0, 2.0], 1.0, 1.0).unwrap();
        let rep = validate_conditions(&m).unwrap();
        assert!(!rep.normalized.holds);
        assert_eq!(rep.normalized.first_violation, Some(0));
    }

    #[test]
    fn validate_needs_k_at_least_two() {
        let m = KomatsuSequence::new(vec![1.0, 1.0], 1.0, 1.0).unwrap();
        assert!(matches!(
            validate_conditions(&m).unwrap_err(),
            Error::InsufficientData(_)
        ));
    }

    #[test]
    fn rejects_non_positive_weights() {
        assert!(matches!(
            KomatsuSequence::new(vec![1.0, -1.0], 1.0, 1.0).unwrap_err(),
            Error::Invariant(_)
        ));
        assert!(matches!(
            KomatsuSequence::new(vec![1.0, f64::NAN], 1.0, 1.0).unwrap_err(),
            Error::Invariant(_)
        ));
    }

    #[test]
    fn find_constants_on_reference_sequences() {
        let (a, h) = find_constants(&vec![1.0; 65], 64).unwrap();
        assert_eq!((a, h), (1.0, 1.0));

        // M_k = 2^k: the k = 0 constraint forces A = 2, then H = 1.
        let powers: Vec<f64> = (0..=64).map(|k| 2f64.powi(k)).collect();
        let (a, h) = find_constants(&powers, 64).unwrap();
        assert!((a - 2.0).abs() <= 1e-12);
        assert!((h - 1.0).abs() <= 1e-12);

        // M_k = k!: A = 1, and sup_k (k+1)^{1/k} = 2 at k = 1.
        let (a, h) = find_constants(&factorials(64), 64).unwrap();
        assert!((a - 1.0).abs() <= 1e-12);
        assert!((h - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn found_constants_always_revalidate() {
        let seqs: Vec<Vec<f64>> = vec![
            factorials(32),
            (0..=32).map(|k| 1.5f64.powi(k * k / 4)).collect(),
            (0..=32).map(|k| 2f64.powi(-k)).collect(),
            (0..=32).map(|k| (1.0 + k as f64).sqrt()).collect(),
        ];
        for values in seqs {
            let k_max = values.len() - 1;
            let (a, h) = find_constants(&values, k_max).unwrap();
            let m = KomatsuSequence::new(values, a, h).unwrap();
            let rep = validate_conditions(&m).unwrap();
            assert!(rep.normalized.holds);
            assert!(
                rep.growth.holds,
                "constants ({a}, {h}) failed to revalidate"
            );
        }
    }

    #[test]
    fn scaling_leaves_h_invariant() {
        // Replacing M_k by c^k M_k rescales A and keeps H.
        let base = factorials(48);
        let (_, h0) = find_constants(&base, 48).unwrap();
        for c in [0.5f64, 3.0, 10.0] {
            let scaled: Vec<f64> = base
                .iter()
                .enumerate()
                .map(|(k, &v)| c.powi(k as i32) * v)
                .collect();
            let (a, h) = find_constants(&scaled, 48).unwrap();
            assert!((h - h0).abs() <= 1e-9 * h0, "c={c}: H {h} vs {h0}");
            assert!(a > 0.0);
        }
    }

    #[test]
    fn komatsu_json_round_trip() {
        let m = KomatsuSequence::new(vec![1.0, 1.5, 2.25], 1.25, 2.0).unwrap();
        let mut buf = Vec::new();
        save_komatsu_json(&mut buf, &m).unwrap();
        let back = load_komatsu_json(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }
}
