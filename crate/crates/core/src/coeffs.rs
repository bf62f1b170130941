//! Block coefficient sequences over a spectrum: Sobolev-scale norms,
//! bilinear pairings, dual certificates, operator powers, and decay-based
//! regularity classification.
//!
//! A sequence stores one complex vector per block. Two layout conventions
//! hold everywhere:
//!
//! * a sequence may be shorter than its spectrum — missing trailing blocks
//!   are implicitly zero;
//! * a stored block of length zero is an implicit zero block of whatever
//!   dimension the spectrum assigns, so sparse data and tensors built
//!   without full dimension information compose cleanly.
//!
//! The pairing is bilinear (no conjugation). Fourier coefficients built
//! from a sesquilinear inner product must be conjugated by the caller
//! before pairing if that is the intended semantics.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::numfmt::{fmt_complex_pair, fmt_f64};
use crate::spectrum::Spectrum;
use crate::sum::{CompensatedComplexSum, CompensatedSum};

/// Per-block complex coefficient vectors; the carrier for functions,
/// distributions, and delta functionals alike.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSequence {
    spectrum_label: String,
    blocks: Vec<Vec<Complex64>>,
}

impl BlockSequence {
    /// Builds a sequence, rejecting non-finite entries.
    pub fn new<S: Into<String>>(spectrum_label: S, blocks: Vec<Vec<Complex64>>) -> Result<Self> {
        for (j, block) in blocks.iter().enumerate() {
            for (l, z) in block.iter().enumerate() {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::Invariant(format!(
                        "entry (j={j}, l={}) is not finite",
                        l + 1
                    )));
                }
            }
        }
        Ok(Self {
            spectrum_label: spectrum_label.into(),
            blocks,
        })
    }

    /// All-zero sequence on the first `trunc` blocks of `sp`.
    pub fn zeros(sp: &Spectrum, trunc: usize) -> Result<Self> {
        if trunc > sp.len() {
            return Err(Error::Truncation(format!(
                "truncation {trunc} exceeds {} blocks",
                sp.len()
            )));
        }
        Ok(Self {
            spectrum_label: sp.label().to_string(),
            blocks: (0..trunc)
                .map(|j| vec![Complex64::new(0.0, 0.0); sp.dim(j)])
                .collect(),
        })
    }

    /// Coordinate basis sequence with a single 1 at block `j`, entry `l`
    /// (both 0-based); the sequence is truncated right after block `j`.
    pub fn basis(sp: &Spectrum, j: usize, l: usize) -> Result<Self> {
        if j >= sp.len() {
            return Err(Error::Truncation(format!(
                "block {j} exceeds {} blocks",
                sp.len()
            )));
        }
        if l >= sp.dim(j) {
            return Err(Error::Alignment(format!(
                "entry {l} exceeds block dimension {}",
                sp.dim(j)
            )));
        }
        let mut seq = Self::zeros(sp, j + 1)?;
        seq.blocks[j][l] = Complex64::new(1.0, 0.0);
        Ok(seq)
    }

    pub fn spectrum_label(&self) -> &str {
        &self.spectrum_label
    }

    /// Number of stored blocks (the truncation).
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<Complex64>] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &[Complex64] {
        &self.blocks[j]
    }

    /// Checks this sequence against a spectrum: label compatibility, block
    /// count, and per-block dimensions (empty blocks pass as implicit zeros).
    pub fn check_alignment(&self, sp: &Spectrum) -> Result<()> {
        if !self.spectrum_label.is_empty() && self.spectrum_label != sp.label() {
            return Err(Error::Alignment(format!(
                "sequence references spectrum {:?}, got {:?}",
                self.spectrum_label,
                sp.label()
            )));
        }
        if self.blocks.len() > sp.len() {
            return Err(Error::Alignment(format!(
                "sequence has {} blocks, spectrum only {}",
                self.blocks.len(),
                sp.len()
            )));
        }
        for (j, block) in self.blocks.iter().enumerate() {
            if !block.is_empty() && block.len() != sp.dim(j) {
                return Err(Error::Alignment(format!(
                    "block {j} has {} entries, spectrum dimension is {}",
                    block.len(),
                    sp.dim(j)
                )));
            }
        }
        Ok(())
    }

    /// Entrywise sum; truncations may differ (missing blocks are zero).
    pub fn add(&self, other: &Self) -> Result<Self> {
        check_pair_labels(self, other)?;
        let n = self.len().max(other.len());
        let mut blocks = Vec::with_capacity(n);
        for j in 0..n {
            let a = self.blocks.get(j).map(Vec::as_slice).unwrap_or(&[]);
            let b = other.blocks.get(j).map(Vec::as_slice).unwrap_or(&[]);
            blocks.push(add_blocks(a, b, j)?);
        }
        BlockSequence::new(self.longest_label(other), blocks)
    }

    /// Entrywise scaling by a complex factor.
    pub fn scale(&self, factor: Complex64) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|&z| z * factor).collect())
            .collect();
        BlockSequence::new(self.spectrum_label.clone(), blocks)
    }

    fn longest_label(&self, other: &Self) -> String {
        if self.spectrum_label.is_empty() {
            other.spectrum_label.clone()
        } else {
            self.spectrum_label.clone()
        }
    }
}

fn add_blocks(a: &[Complex64], b: &[Complex64], j: usize) -> Result<Vec<Complex64>> {
    if a.is_empty() {
        return Ok(b.to_vec());
    }
    if b.is_empty() {
        return Ok(a.to_vec());
    }
    if a.len() != b.len() {
        return Err(Error::Alignment(format!(
            "block {j}: dimensions {} and {} differ",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(&x, &y)| x + y).collect())
}

fn check_pair_labels(u: &BlockSequence, w: &BlockSequence) -> Result<()> {
    if !u.spectrum_label.is_empty()
        && !w.spectrum_label.is_empty()
        && u.spectrum_label != w.spectrum_label
    {
        return Err(Error::Alignment(format!(
            "sequences reference different spectra: {:?} vs {:?}",
            u.spectrum_label, w.spectrum_label
        )));
    }
    Ok(())
}

/// Checks that two sequences can be paired entry-by-entry on their common
/// prefix of blocks.
fn check_pairwise(u: &BlockSequence, w: &BlockSequence) -> Result<()> {
    check_pair_labels(u, w)?;
    let n = u.len().min(w.len());
    for j in 0..n {
        let a = &u.blocks[j];
        let b = &w.blocks[j];
        if !a.is_empty() && !b.is_empty() && a.len() != b.len() {
            return Err(Error::Alignment(format!(
                "block {j}: dimensions {} and {} differ",
                a.len(),
                b.len()
            )));
        }
    }
    Ok(())
}

/// Euclidean norm over all stored entries.
///
/// Accumulates squared entry moduli (`z.norm()` first, then squared), so
/// the result is bit-identical on `v` and `modulus(v)`.
pub fn l2_norm(v: &BlockSequence) -> f64 {
    let mut acc = CompensatedSum::new();
    for block in v.blocks() {
        for z in block {
            let m = z.norm();
            acc.add(m * m);
        }
    }
    acc.value().sqrt()
}

/// Entrywise difference `u - w`; truncations may differ.
pub fn sub(u: &BlockSequence, w: &BlockSequence) -> Result<BlockSequence> {
    u.add(&w.scale(Complex64::new(-1.0, 0.0))?)
}

/// Euclidean norm of each block, in block order.
pub fn block_hs_norms(v: &BlockSequence) -> Vec<f64> {
    v.blocks().iter().map(|b| block_norm(b)).collect()
}

fn block_norm(block: &[Complex64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for z in block {
        let m = z.norm();
        acc.add(m * m);
    }
    acc.value().sqrt()
}

/// `sqrt(sum_j lambda_j^{2s} * ||v_j||^2)`, accumulated block-ascending.
pub fn sobolev_norm(v: &BlockSequence, sp: &Spectrum, s: f64) -> Result<f64> {
    v.check_alignment(sp)?;
    let mut acc = CompensatedSum::new();
    for (j, block) in v.blocks().iter().enumerate() {
        let weight = sp.lambda(j).powf(2.0 * s);
        let mut sq = CompensatedSum::new();
        for z in block {
            let m = z.norm();
            sq.add(m * m);
        }
        acc.add(weight * sq.value());
    }
    let total = acc.value();
    if !total.is_finite() {
        return Err(Error::Invariant(format!(
            "sobolev norm overflowed at s = {s}"
        )));
    }
    Ok(total.sqrt())
}

/// Applies the operator power `E^s`: block `j` is scaled by `lambda_j^s`.
pub fn apply_power(v: &BlockSequence, sp: &Spectrum, s: f64) -> Result<BlockSequence> {
    v.check_alignment(sp)?;
    let mut blocks = Vec::with_capacity(v.len());
    for (j, block) in v.blocks().iter().enumerate() {
        let factor = sp.lambda(j).powf(s);
        if !factor.is_finite() {
            return Err(Error::Invariant(format!("lambda_{j}^{s} is not finite")));
        }
        blocks.push(block.iter().map(|&z| z * factor).collect());
    }
    BlockSequence::new(v.spectrum_label().to_string(), blocks)
}

/// Bilinear pairing `sum_{j,l} u_{jl} * w_{jl}` — no conjugation.
pub fn pairing(u: &BlockSequence, w: &BlockSequence) -> Result<Complex64> {
    check_pairwise(u, w)?;
    let mut acc = CompensatedComplexSum::new();
    let n = u.len().min(w.len());
    for j in 0..n {
        let a = u.block(j);
        let b = w.block(j);
        if a.is_empty() || b.is_empty() {
            continue;
        }
        for (x, y) in a.iter().zip(b) {
            acc.add(x * y);
        }
    }
    Ok(acc.value())
}

/// Truncated alpha-dual pairing mass `sum_{j,l} |u_{jl}| * |w_{jl}|`.
pub fn abs_pairing(u: &BlockSequence, w: &BlockSequence) -> Result<f64> {
    check_pairwise(u, w)?;
    let mut acc = CompensatedSum::new();
    let n = u.len().min(w.len());
    for j in 0..n {
        let a = u.block(j);
        let b = w.block(j);
        if a.is_empty() || b.is_empty() {
            continue;
        }
        for (x, y) in a.iter().zip(b) {
            acc.add(x.norm() * y.norm());
        }
    }
    Ok(acc.value())
}

/// Entrywise modulus; the result is real-valued.
pub fn modulus(v: &BlockSequence) -> BlockSequence {
    let blocks = v
        .blocks()
        .iter()
        .map(|b| b.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect())
        .collect();
    BlockSequence::new(v.spectrum_label().to_string(), blocks)
        .expect("moduli of finite entries are finite")
}

/// Slack in the Cauchy-Schwarz bound:
/// `sobolev_norm(u, s) * sobolev_norm(w, -s) - abs_pairing(u, w)`.
///
/// Non-negative up to roundoff for aligned truncated sequences.
pub fn cauchy_schwarz_gap(
    u: &BlockSequence,
    w: &BlockSequence,
    sp: &Spectrum,
    s: f64,
) -> Result<f64> {
    let bound = sobolev_norm(u, sp, s)? * sobolev_norm(w, sp, -s)?;
    Ok(bound - abs_pairing(u, w)?)
}

/// Truncated weighted mass `sum_j lambda_j^{-s - s0/2} * ||w_j||`, the
/// quantity whose tail summability certifies alpha-dual membership.
pub fn dual_certificate(w: &BlockSequence, sp: &Spectrum, s: f64, s0: f64) -> Result<f64> {
    if s0.is_nan() || s0 <= 0.0 {
        return Err(Error::Invariant("s0 must be > 0".into()));
    }
    w.check_alignment(sp)?;
    let mut acc = CompensatedSum::new();
    for (j, block) in w.blocks().iter().enumerate() {
        acc.add(sp.lambda(j).powf(-s - s0 / 2.0) * block_norm(block));
    }
    let total = acc.value();
    if !total.is_finite() {
        return Err(Error::Invariant(format!(
            "certificate mass overflowed at s = {s}, s0 = {s0}"
        )));
    }
    Ok(total)
}

/// Regularity classes read off the fitted coefficient decay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayClass {
    SmoothLike,
    Sobolev(f64),
    DistributionLike,
}

impl DecayClass {
    pub fn label(&self) -> String {
        match self {
            DecayClass::SmoothLike => "smooth_like".to_string(),
            DecayClass::Sobolev(order) => format!("sobolev({})", fmt_f64(*order)),
            DecayClass::DistributionLike => "distribution_like".to_string(),
        }
    }
}

/// Outcome of the decay fit `max_l |v_{jl}| ~ C * lambda_j^{-N}`.
#[derive(Clone, Copy, Debug)]
pub struct DecayReport {
    pub estimated_order: f64,
    pub constant_c: f64,
    pub fit_r2: f64,
    pub classification: DecayClass,
}

/// Minimum number of nonzero blocks in the fit window.
pub const MIN_DECAY_BLOCKS: usize = 8;

/// Fits the decay exponent of `m_j = max_l |v_{jl}|` against `lambda_j` on
/// a log-log scale over the upper half of the sequence truncation, skipping
/// zero blocks.
///
/// Classification: `SmoothLike` when the fitted order exceeds
/// `smooth_threshold`, `DistributionLike` when it is negative (growth),
/// `Sobolev(order)` in between.
pub fn classify_decay(
    v: &BlockSequence,
    sp: &Spectrum,
    smooth_threshold: f64,
) -> Result<DecayReport> {
    v.check_alignment(sp)?;
    let n = v.len();
    let lo = n / 2;
    let mut pts = Vec::new();
    for j in lo..n {
        let m = v.block(j).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if m > 0.0 {
            pts.push((sp.lambda(j).ln(), m.ln()));
        }
    }
    if pts.len() < MIN_DECAY_BLOCKS {
        return Err(Error::InsufficientData(format!(
            "decay fit needs >= {MIN_DECAY_BLOCKS} nonzero blocks in the upper half, got {}",
            pts.len()
        )));
    }
    let fit = linear_fit(&pts)
        .ok_or_else(|| Error::InsufficientData("degenerate eigenvalue range".into()))?;
    let estimated_order = -fit.slope;
    let classification = if estimated_order > smooth_threshold {
        DecayClass::SmoothLike
    } else if estimated_order < 0.0 {
        DecayClass::DistributionLike
    } else {
        DecayClass::Sobolev(estimated_order)
    };
    Ok(DecayReport {
        estimated_order,
        constant_c: fit.intercept.exp(),
        fit_r2: fit.r2,
        classification,
    })
}

#[derive(Deserialize)]
struct CoeffsFile {
    spectrum_label: String,
    blocks: Vec<Vec<[f64; 2]>>,
}

/// Reads a sequence from `coeffs.json`.
pub fn load_coeffs_json<R: Read>(reader: R) -> Result<BlockSequence> {
    let file: CoeffsFile =
        serde_json::from_reader(reader).map_err(|e| Error::Parse(e.to_string()))?;
    BlockSequence::new(
        file.spectrum_label,
        file.blocks
            .into_iter()
            .map(|b| {
                b.into_iter()
                    .map(|[re, im]| Complex64::new(re, im))
                    .collect()
            })
            .collect(),
    )
}

/// Writes `coeffs.json` with 17-significant-digit numbers.
pub fn save_coeffs_json<W: Write>(mut w: W, v: &BlockSequence) -> Result<()> {
    writeln!(w, "{{")?;
    writeln!(
        w,
        "  \"spectrum_label\": {},",
        serde_json::to_string(v.spectrum_label()).expect("string serializes")
    )?;
    writeln!(w, "  \"blocks\": [")?;
    for (j, block) in v.blocks().iter().enumerate() {
        let entries: Vec<String> = block.iter().map(|z| fmt_complex_pair(z.re, z.im)).collect();
        let sep = if j + 1 == v.len() { "" } else { "," };
        writeln!(w, "    [{}]{}", entries.join(", "), sep)?;
    }
    writeln!(w, "  ]")?;
    writeln!(w, "}}")?;
    Ok(())
}

/// Reads a sequence from `coeffs.csv` (`j,l,re,im`; 0-based `j`, 1-based
/// `l`). Unmentioned entries are zero; the result spans the full spectrum
/// truncation.
pub fn load_coeffs_csv<R: Read>(reader: R, sp: &Spectrum) -> Result<BlockSequence> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    {
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["j", "l", "re", "im"] {
            return Err(Error::Parse(format!(
                "expected csv header \"j,l,re,im\", got {headers:?}"
            )));
        }
    }
    let mut blocks: Vec<Vec<Complex64>> = (0..sp.len())
        .map(|j| vec![Complex64::new(0.0, 0.0); sp.dim(j)])
        .collect();
    let mut seen = BTreeSet::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.len() != 4 {
            return Err(Error::Parse(format!(
                "expected 4 fields, got {}",
                record.len()
            )));
        }
        let j: usize = record[0]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad j {:?}: {e}", &record[0])))?;
        let l: usize = record[1]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad l {:?}: {e}", &record[1])))?;
        let re: f64 = record[2]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad re {:?}: {e}", &record[2])))?;
        let im: f64 = record[3]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad im {:?}: {e}", &record[3])))?;
        if j >= sp.len() {
            return Err(Error::Alignment(format!(
                "entry block {j} exceeds {} spectrum blocks",
                sp.len()
            )));
        }
        if l == 0 || l > sp.dim(j) {
            return Err(Error::Alignment(format!(
                "entry index l={l} out of range 1..={} in block {j}",
                sp.dim(j)
            )));
        }
        if !seen.insert((j, l)) {
            return Err(Error::Parse(format!("duplicate coordinate (j={j}, l={l})")));
        }
        blocks[j][l - 1] = Complex64::new(re, im);
    }
    BlockSequence::new(sp.label().to_string(), blocks)
}

/// Writes `coeffs.csv`, one row per stored entry in (j, l) order.
pub fn save_coeffs_csv<W: Write>(mut w: W, v: &BlockSequence) -> Result<()> {
    writeln!(w, "j,l,re,im")?;
    for (j, block) in v.blocks().iter().enumerate() {
        for (l, z) in block.iter().enumerate() {
            writeln!(w, "{},{},{},{}", j, l + 1, fmt_f64(z.re), fmt_f64(z.im))?;
        }
    }
    Ok(())
}
