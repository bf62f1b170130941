//! Eigenvalue/multiplicity data for a positive self-adjoint operator:
//! ingestion, eigenvalue grouping, concrete torus spectra, and
//! summability diagnostics for the weight series sum(d_j * lambda_j^-q).

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fit::{linear_fit, LineFit};
use crate::numfmt::fmt_f64;
use crate::sum::CompensatedSum;

/// One eigenvalue block: the eigenvalue and the dimension of its eigenspace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumBlock {
    pub lambda: f64,
    pub dim: usize,
}

/// Ordered eigenvalue blocks `(lambda_j, d_j)` with `0 < lambda_1 <= lambda_2 <= ...`
/// and every `d_j >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    label: String,
    blocks: Vec<SpectrumBlock>,
}

impl Spectrum {
    /// Builds a spectrum, validating positivity, ordering, and multiplicities.
    pub fn new<S: Into<String>>(label: S, blocks: Vec<(f64, usize)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Invariant(
                "spectrum must have at least one block".into(),
            ));
        }
        let mut prev = 0.0f64;
        for (idx, &(lambda, dim)) in blocks.iter().enumerate() {
            if !lambda.is_finite() || lambda <= 0.0 {
                return Err(Error::Invariant(format!(
                    "block {idx}: eigenvalue {lambda} is not strictly positive and finite"
                )));
            }
            if dim < 1 {
                return Err(Error::Invariant(format!("block {idx}: dim must be >= 1")));
            }
            if lambda < prev {
                return Err(Error::Invariant(format!(
                    "block {idx}: eigenvalues must be non-decreasing ({lambda} < {prev})"
                )));
            }
            prev = lambda;
        }
        Ok(Self {
            label: label.into(),
            blocks: blocks
                .into_iter()
                .map(|(lambda, dim)| SpectrumBlock { lambda, dim })
                .collect(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of blocks.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[SpectrumBlock] {
        &self.blocks
    }

    /// Eigenvalue of block `j` (0-based).
    pub fn lambda(&self, j: usize) -> f64 {
        self.blocks[j].lambda
    }

    /// Multiplicity of block `j` (0-based).
    pub fn dim(&self, j: usize) -> usize {
        self.blocks[j].dim
    }

    /// Sum of all block dimensions.
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// Block dimensions in order.
    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }
}

/// Sorts raw eigenvalues ascending and merges consecutive values within
/// `|a - b| <= rel_tol * max(a, b)` into one block; the merged eigenvalue is
/// the arithmetic mean and the dimension is the merge count.
pub fn group_eigenvalues(raw: &[f64], rel_tol: f64) -> Result<Spectrum> {
    if raw.is_empty() {
        return Err(Error::Invariant("no eigenvalues to group".into()));
    }
    if rel_tol.is_nan() || rel_tol < 0.0 {
        return Err(Error::Invariant("rel_tol must be >= 0".into()));
    }
    for &v in raw {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Invariant(format!(
                "eigenvalue {v} is not strictly positive and finite"
            )));
        }
    }
    let mut sorted = raw.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));

    let mut blocks: Vec<(f64, usize)> = Vec::new();
    let mut group: Vec<f64> = vec![sorted[0]];
    for &v in &sorted[1..] {
        let prev = *group.last().expect("group is non-empty");
        if (v - prev).abs() <= rel_tol * v.max(prev) {
            group.push(v);
        } else {
            blocks.push((group_mean(&group), group.len()));
            group = vec![v];
        }
    }
    blocks.push((group_mean(&group), group.len()));
    Spectrum::new("grouped", blocks)
}

fn group_mean(group: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for &v in group {
        acc.add(v);
    }
    acc.value() / group.len() as f64
}

/// Torus dimension for the built-in `I - laplacian` spectra.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorusDimension {
    One,
    Two,
}

/// Spectrum of `I - laplacian` on the torus, truncated at `|k|_inf <= max_frequency`.
///
/// For dimension one the blocks are `lambda = 1 + j^2` with multiplicity 1
/// at `j = 0` and 2 for `j >= 1`. For dimension two, lattice points of `Z^2`
/// are grouped into shells of equal `|k|^2`, ordered by eigenvalue.
pub fn torus_laplacian_spectrum(dimension: TorusDimension, max_frequency: usize) -> Spectrum {
    assert!(max_frequency >= 1, "max_frequency must be >= 1");
    match dimension {
        TorusDimension::One => {
            let blocks = (0..=max_frequency)
                .map(|j| (1.0 + (j * j) as f64, if j == 0 { 1 } else { 2 }))
                .collect();
            Spectrum::new(format!("torus1-J{max_frequency}"), blocks)
                .expect("torus blocks satisfy the invariants")
        }
        TorusDimension::Two => {
            let max = max_frequency as i64;
            let mut shells: BTreeMap<i64, usize> = BTreeMap::new();
            for k1 in -max..=max {
                for k2 in -max..=max {
                    *shells.entry(k1 * k1 + k2 * k2).or_insert(0) += 1;
                }
            }
            let blocks = shells
                .into_iter()
                .map(|(norm_sq, count)| (1.0 + norm_sq as f64, count))
                .collect();
            Spectrum::new(format!("torus2-J{max_frequency}"), blocks)
                .expect("torus blocks satisfy the invariants")
        }
    }
}

/// Three-way verdict for the truncated summability diagnostic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Converges => "converges",
            Verdict::Diverges => "diverges",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Outcome of `summability_test`: the truncated weight-series sum, the
/// fitted counting-function exponent, and the margin-based verdict.
#[derive(Clone, Copy, Debug)]
pub struct SummabilityReport {
    pub exponent_q: f64,
    pub partial_sum: f64,
    pub fitted_counting_exponent: f64,
    pub fit_r2: f64,
    pub verdict: Verdict,
}

/// Minimum number of blocks for the counting-exponent fit.
pub const MIN_FIT_BLOCKS: usize = 8;

/// Fits the eigenvalue counting exponent alpha in `N(lambda) ~ lambda^alpha`
/// by least squares of `log N` against `log lambda` over the top half of
/// the available blocks.
fn counting_exponent_fit(sp: &Spectrum) -> Result<LineFit> {
    let m = sp.len();
    if m < MIN_FIT_BLOCKS {
        return Err(Error::InsufficientData(format!(
            "counting-exponent fit needs >= {MIN_FIT_BLOCKS} blocks, got {m}"
        )));
    }
    let mut counts = Vec::with_capacity(m);
    let mut cum = 0usize;
    for b in sp.blocks() {
        cum += b.dim;
        counts.push(cum as f64);
    }
    let lo = m / 2;
    let pts: Vec<(f64, f64)> = (lo..m)
        .map(|j| (sp.lambda(j).ln(), counts[j].ln()))
        .collect();
    linear_fit(&pts)
        .ok_or_else(|| Error::InsufficientData("degenerate eigenvalue range in fit window".into()))
}

/// Classifies the truncated series `sum d_j lambda_j^-q` by comparing `q`
/// against the fitted counting exponent with an explicit `margin` band.
///
/// The verdict is `Converges` only for `q > alpha + margin`, `Diverges`
/// only for `q < alpha - margin`, and `Inconclusive` inside the band.
pub fn summability_test(sp: &Spectrum, q: f64, margin: f64) -> Result<SummabilityReport> {
    if margin.is_nan() || margin <= 0.0 {
        return Err(Error::Invariant("margin must be > 0".into()));
    }
    if !q.is_finite() {
        return Err(Error::Invariant(format!("exponent q = {q} must be finite")));
    }
    let fit = counting_exponent_fit(sp)?;

    let mut acc = CompensatedSum::new();
    for b in sp.blocks() {
        acc.add(b.dim as f64 * b.lambda.powf(-q));
    }
    let alpha = fit.slope;
    let verdict = if q > alpha + margin {
        Verdict::Converges
    } else if q < alpha - margin {
        Verdict::Diverges
    } else {
        Verdict::Inconclusive
    };
    Ok(SummabilityReport {
        exponent_q: q,
        partial_sum: acc.value(),
        fitted_counting_exponent: alpha,
        fit_r2: fit.r2,
        verdict,
    })
}

/// Smallest exponent the toolkit will certify as summable for this
/// spectrum: the fitted counting exponent plus the margin.
pub fn minimal_s0(sp: &Spectrum, margin: f64) -> Result<f64> {
    if margin.is_nan() || margin <= 0.0 {
        return Err(Error::Invariant("margin must be > 0".into()));
    }
    Ok(counting_exponent_fit(sp)?.slope + margin)
}

/// On-disk encodings for spectra.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumFormat {
    Json,
    Csv,
}

#[derive(Deserialize)]
struct SpectrumFile {
    label: String,
    blocks: Vec<SpectrumFileBlock>,
}

#[derive(Deserialize)]
struct SpectrumFileBlock {
    lambda: f64,
    dim: u64,
}

/// Reads a spectrum from `spectrum.json` or `spectrum.csv`.
pub fn load_spectrum<R: Read>(reader: R, format: SpectrumFormat) -> Result<Spectrum> {
    match format {
        SpectrumFormat::Json => {
            let file: SpectrumFile =
                serde_json::from_reader(reader).map_err(|e| Error::Parse(e.to_string()))?;
            Spectrum::new(
                file.label,
                file.blocks
                    .into_iter()
                    .map(|b| (b.lambda, b.dim as usize))
                    .collect(),
            )
        }
        SpectrumFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(true)
                .from_reader(reader);
            {
                let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
                if headers.iter().collect::<Vec<_>>() != ["lambda", "dim"] {
                    return Err(Error::Parse(format!(
                        "expected csv header \"lambda,dim\", got {headers:?}"
                    )));
                }
            }
            let mut blocks = Vec::new();
            for record in rdr.records() {
                let record = record.map_err(|e| Error::Parse(e.to_string()))?;
                if record.len() != 2 {
                    return Err(Error::Parse(format!(
                        "expected 2 fields, got {}",
                        record.len()
                    )));
                }
                let lambda: f64 = record[0]
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad lambda {:?}: {e}", &record[0])))?;
                let dim: usize = record[1]
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad dim {:?}: {e}", &record[1])))?;
                blocks.push((lambda, dim));
            }
            Spectrum::new("csv", blocks)
        }
    }
}

/// Writes a spectrum with 17-significant-digit eigenvalues; the inverse
/// of `load_spectrum` up to the CSV label.
pub fn save_spectrum<W: Write>(mut w: W, sp: &Spectrum, format: SpectrumFormat) -> Result<()> {
    match format {
        SpectrumFormat::Json => {
            writeln!(w, "{{")?;
            writeln!(
                w,
                "  \"label\": {},",
                serde_json::to_string(sp.label()).expect("string serializes")
            )?;
            writeln!(w, "  \"blocks\": [")?;
            for (i, b) in sp.blocks().iter().enumerate() {
                let sep = if i + 1 == sp.len() { "" } else { "," };
                writeln!(
                    w,
                    "    {{ \"lambda\": {}, \"dim\": {} }}{}",
                    fmt_f64(b.lambda),
                    b.dim,
                    sep
                )?;
            }
            writeln!(w, "  ]")?;
            writeln!(w, "}}")?;
        }
        SpectrumFormat::Csv => {
            writeln!(w, "lambda,dim")?;
            for b in sp.blocks() {
                writeln!(w, "{},{}", fmt_f64(b.lambda), b.dim)?;
            }
        }
    }
    Ok(())
}
