//! Sequential linear mappings as sparse block tensors.
//!
//! A tensor stores a dense `g_k x d_j` complex matrix per non-zero block
//! pair `(k, j)`; absent pairs are zero. The adjoint is the plain
//! transpose, NOT the conjugate transpose: the pairing of this crate is
//! bilinear, and the identity `<f(u), v> = <u, adjoint(f)(v)>` holds for
//! that pairing only with an unconjugated transpose.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::coeffs::{abs_pairing, l2_norm, pairing, sub, BlockSequence};
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::numfmt::fmt_complex_pair;
use crate::spectrum::Spectrum;
use crate::sum::CompensatedSum;

/// Dense row-major complex matrix for one tensor block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl BlockMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds from row vectors; rows must be non-empty and equally long.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Shape(
                "matrix must have at least one row and column".into(),
            ));
        }
        let cols = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            for z in r {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::Invariant("matrix entry is not finite".into()));
                }
            }
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, q: usize) -> Complex64 {
        self.data[i * self.cols + q]
    }

    pub fn set(&mut self, i: usize, q: usize, z: Complex64) {
        self.data[i * self.cols + q] = z;
    }

    pub fn transposed(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for q in 0..self.cols {
                t.data[q * self.rows + i] = self.get(i, q);
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// `out += self * u`, accumulating in column-ascending order per row.
    fn matvec_accumulate(&self, u: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(u.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (slot, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, x) in row.iter().zip(u) {
                acc += m * x;
            }
            *slot += acc;
        }
    }
}

/// Sparse family of per-block matrices representing a sequential linear
/// mapping between two spectra.
///
/// `domain_dims[j]` / `codomain_dims[k]` record the block dimensions the
/// tensor was built against; a recorded dimension of 0 means "unknown"
/// (possible for tensors loaded from files, whose schema carries no
/// dimension table) and is treated as an implicit zero block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockTensor {
    domain_label: String,
    codomain_label: String,
    domain_dims: Vec<usize>,
    codomain_dims: Vec<usize>,
    entries: BTreeMap<(usize, usize), BlockMatrix>,
}

impl BlockTensor {
    /// Empty (zero) tensor with explicit block dimensions.
    pub fn new<S: Into<String>, T: Into<String>>(
        domain_label: S,
        codomain_label: T,
        domain_dims: Vec<usize>,
        codomain_dims: Vec<usize>,
    ) -> Self {
        Self {
            domain_label: domain_label.into(),
            codomain_label: codomain_label.into(),
            domain_dims,
            codomain_dims,
            entries: BTreeMap::new(),
        }
    }

    /// Zero tensor between two spectrum truncations.
    pub fn from_spectra(
        domain: &Spectrum,
        domain_trunc: usize,
        codomain: &Spectrum,
        codomain_trunc: usize,
    ) -> Result<Self> {
        if domain_trunc > domain.len() || codomain_trunc > codomain.len() {
            return Err(Error::Truncation(
                "tensor truncation exceeds spectrum blocks".into(),
            ));
        }
        Ok(Self::new(
            domain.label().to_string(),
            codomain.label().to_string(),
            domain.dims()[..domain_trunc].to_vec(),
            codomain.dims()[..codomain_trunc].to_vec(),
        ))
    }

    /// Identity tensor on one spectrum truncation.
    pub fn identity(sp: &Spectrum, trunc: usize) -> Result<Self> {
        Self::diagonal(sp, trunc, |_| Complex64::new(1.0, 0.0))
    }

    /// Diagonal tensor `f_{kk} = symbol(lambda_k) * I`.
    pub fn diagonal<F: Fn(f64) -> Complex64>(
        sp: &Spectrum,
        trunc: usize,
        symbol: F,
    ) -> Result<Self> {
        let mut t = Self::from_spectra(sp, trunc, sp, trunc)?;
        for k in 0..trunc {
            let d = sp.dim(k);
            let scale = symbol(sp.lambda(k));
            let mut m = BlockMatrix::zeros(d, d);
            for i in 0..d {
                m.set(i, i, scale);
            }
            t.insert(k, k, m)?;
        }
        Ok(t)
    }

    /// Assembles a tensor from explicit entries, inferring block dimensions.
    pub fn from_entries<S: Into<String>, T: Into<String>>(
        domain_label: S,
        codomain_label: T,
        entries: Vec<(usize, usize, BlockMatrix)>,
    ) -> Result<Self> {
        let max_k = entries.iter().map(|&(k, _, _)| k + 1).max().unwrap_or(0);
        let max_j = entries.iter().map(|&(_, j, _)| j + 1).max().unwrap_or(0);
        let mut t = Self::new(domain_label, codomain_label, vec![0; max_j], vec![0; max_k]);
        for (k, j, m) in entries {
            if t.entries.contains_key(&(k, j)) {
                return Err(Error::Shape(format!("duplicate entry (k={k}, j={j})")));
            }
            t.insert(k, j, m)?;
        }
        Ok(t)
    }

    /// Stores block `(k, j)`, validating its shape against the recorded
    /// dimensions (and recording them when still unknown).
    pub fn insert(&mut self, k: usize, j: usize, m: BlockMatrix) -> Result<()> {
        if k >= self.codomain_dims.len() || j >= self.domain_dims.len() {
            return Err(Error::Truncation(format!(
                "entry (k={k}, j={j}) outside tensor truncation {}x{}",
                self.codomain_dims.len(),
                self.domain_dims.len()
            )));
        }
        if self.codomain_dims[k] == 0 {
            self.codomain_dims[k] = m.rows();
        } else if self.codomain_dims[k] != m.rows() {
            return Err(Error::Shape(format!(
                "entry (k={k}, j={j}) has {} rows, block dimension is {}",
                m.rows(),
                self.codomain_dims[k]
            )));
        }
        if self.domain_dims[j] == 0 {
            self.domain_dims[j] = m.cols();
        } else if self.domain_dims[j] != m.cols() {
            return Err(Error::Shape(format!(
                "entry (k={k}, j={j}) has {} columns, block dimension is {}",
                m.cols(),
                self.domain_dims[j]
            )));
        }
        self.entries.insert((k, j), m);
        Ok(())
    }

    pub fn domain_label(&self) -> &str {
        &self.domain_label
    }

    pub fn codomain_label(&self) -> &str {
        &self.codomain_label
    }

    pub fn domain_dims(&self) -> &[usize] {
        &self.domain_dims
    }

    pub fn codomain_dims(&self) -> &[usize] {
        &self.codomain_dims
    }

    pub fn entry(&self, k: usize, j: usize) -> Option<&BlockMatrix> {
        self.entries.get(&(k, j))
    }

    /// Entries in (k, j)-ascending order.
    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &BlockMatrix)> {
        self.entries.iter()
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    /// Scalar entry `f_{kjli}` (`i` = codomain coordinate, `l` = domain
    /// coordinate, 0-based); absent blocks read as zero.
    pub fn scalar_entry(&self, k: usize, j: usize, i: usize, l: usize) -> Complex64 {
        match self.entries.get(&(k, j)) {
            Some(m) => m.get(i, l),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Applies the tensor: output block `k` is `sum_j f_{kj} u_j` with
    /// j-ascending accumulation. Missing input blocks are zero; the output
    /// spans the full codomain truncation.
    pub fn apply(&self, u: &BlockSequence) -> Result<BlockSequence> {
        if !self.domain_label.is_empty()
            && !u.spectrum_label().is_empty()
            && self.domain_label != u.spectrum_label()
        {
            return Err(Error::Alignment(format!(
                "tensor domain {:?} does not match sequence spectrum {:?}",
                self.domain_label,
                u.spectrum_label()
            )));
        }
        if u.len() > self.domain_dims.len() {
            return Err(Error::Alignment(format!(
                "sequence has {} blocks, tensor domain truncation is {}",
                u.len(),
                self.domain_dims.len()
            )));
        }
        for (j, block) in u.blocks().iter().enumerate() {
            if !block.is_empty() && self.domain_dims[j] != 0 && block.len() != self.domain_dims[j] {
                return Err(Error::Alignment(format!(
                    "block {j} has {} entries, tensor domain dimension is {}",
                    block.len(),
                    self.domain_dims[j]
                )));
            }
        }
        let mut out: Vec<Vec<Complex64>> = self
            .codomain_dims
            .iter()
            .map(|&g| vec![Complex64::new(0.0, 0.0); g])
            .collect();
        for (&(k, j), m) in &self.entries {
            if j >= u.len() {
                continue;
            }
            let block = u.block(j);
            if block.is_empty() {
                continue;
            }
            if block.len() != m.cols() {
                return Err(Error::Shape(format!(
                    "entry (k={k}, j={j}) expects {} columns, block has {}",
                    m.cols(),
                    block.len()
                )));
            }
            m.matvec_accumulate(block, &mut out[k]);
        }
        BlockSequence::new(self.codomain_label.clone(), out)
    }

    /// Plain-transpose adjoint: entry `(j, k)` is the transpose of entry
    /// `(k, j)`, with domain and codomain swapped. No conjugation.
    pub fn adjoint(&self) -> BlockTensor {
        let mut t = BlockTensor::new(
            self.codomain_label.clone(),
            self.domain_label.clone(),
            self.codomain_dims.clone(),
            self.domain_dims.clone(),
        );
        for (&(k, j), m) in &self.entries {
            t.entries.insert((j, k), m.transposed());
        }
        t
    }

    /// Compares two tensors as block-indexed functions, treating absent
    /// blocks as zero.
    pub fn entrywise_eq(&self, other: &BlockTensor) -> bool {
        let keys: std::collections::BTreeSet<(usize, usize)> = self
            .entries
            .keys()
            .chain(other.entries.keys())
            .copied()
            .collect();
        for key in keys {
            match (self.entries.get(&key), other.entries.get(&key)) {
                (Some(a), Some(b)) => {
                    if a != b {
                        return false;
                    }
                }
                (Some(m), None) | (None, Some(m)) => {
                    if !m.is_zero() {
                        return false;
                    }
                }
                (None, None) => unreachable!(),
            }
        }
        true
    }
}

/// `|<f(u), v> - <u, adjoint(f)(v)>|` — zero in exact arithmetic.
pub fn adjointness_residual(t: &BlockTensor, u: &BlockSequence, v: &BlockSequence) -> Result<f64> {
    let lhs = pairing(&t.apply(u)?, v)?;
    let rhs = pairing(u, &t.adjoint().apply(v)?)?;
    Ok((lhs - rhs).norm())
}

/// `(abs_pairing(u, w), sum_j ||u_j|| * ||w_j||)`; the first never exceeds
/// the second (per-block Cauchy-Schwarz).
pub fn hs_pairing_bound(u: &BlockSequence, w: &BlockSequence) -> Result<(f64, f64)> {
    let mass = abs_pairing(u, w)?;
    let mut acc = CompensatedSum::new();
    let n = u.len().min(w.len());
    for j in 0..n {
        let nu = block_norm_slice(u.block(j));
        let nw = block_norm_slice(w.block(j));
        acc.add(nu * nw);
    }
    Ok((mass, acc.value()))
}

fn block_norm_slice(block: &[Complex64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for z in block {
        let m = z.norm();
        acc.add(m * m);
    }
    acc.value().sqrt()
}

/// Verdict of the truncated sequentiality certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequentialityVerdict {
    Certified,
    Uncertified,
}

impl SequentialityVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            SequentialityVerdict::Certified => "certified",
            SequentialityVerdict::Uncertified => "uncertified",
        }
    }
}

/// Truncated partial sums of both tensor-summability conditions, the
/// fitted decay exponents of their increments, and the resulting verdict.
///
/// `Certified` is a heuristic claim about the truncation, never a proof
/// of the infinite-sum conditions.
#[derive(Clone, Debug)]
pub struct SequentialityReport {
    /// Final per-(k, i) mass of `sum_{j,l} |f_{kjli}| |u_{jl}|`.
    pub cond1_masses: Vec<((usize, usize), f64)>,
    /// Final mass of `sum_{k,i} |v_{ki}| |(sum_j f_{kj} u_j)_i|`.
    pub cond2_mass: f64,
    /// Fitted log-log slopes of partial-sum increments (one per active
    /// coordinate, plus one for the second condition).
    pub tail_slopes: Vec<f64>,
    pub verdict: SequentialityVerdict,
}

/// Minimum domain truncation for sequentiality tail fitting.
pub const MIN_SEQ_BLOCKS: usize = 16;

fn doubling_schedule(n: usize) -> Vec<usize> {
    let mut schedule = Vec::new();
    let mut v = 2usize;
    while v < n {
        schedule.push(v);
        v *= 2;
    }
    schedule.push(n);
    schedule
}

/// Fits `log increment` against `log truncation` for the positive
/// increments of a partial-sum sequence; `None` when fewer than two
/// increments remain (a settled, finitely supported series).
fn increment_slope(schedule: &[usize], sums: &[f64]) -> Option<f64> {
    let mut pts = Vec::new();
    let mut prev = 0.0;
    for (idx, &n) in schedule.iter().enumerate() {
        let inc = (sums[idx] - prev).abs();
        if inc > 0.0 {
            pts.push(((n as f64).ln(), inc.ln()));
        }
        prev = sums[idx];
    }
    if pts.len() < 2 {
        return None;
    }
    linear_fit(&pts).map(|f| f.slope)
}

/// Evaluates both conditions of the tensor-representation theorem on
/// doubling truncations and fits the decay of their increments.
///
/// The verdict is `Certified` only if every fitted slope lies below
/// `-1 - margin` (increments summable by comparison with `n^{-1}`).
pub fn sequentiality_check(
    t: &BlockTensor,
    u: &BlockSequence,
    v: &BlockSequence,
    margin: f64,
) -> Result<SequentialityReport> {
    if margin.is_nan() || margin <= 0.0 {
        return Err(Error::Invariant("margin must be > 0".into()));
    }
    if u.len() < MIN_SEQ_BLOCKS {
        return Err(Error::InsufficientData(format!(
            "sequentiality check needs >= {MIN_SEQ_BLOCKS} domain blocks, got {}",
            u.len()
        )));
    }
    let schedule = doubling_schedule(u.len());

    // Condition 1: per-(k, i) contributions, grouped by domain block.
    let mut contributions: BTreeMap<(usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for (&(k, j), m) in t.entries() {
        if j >= u.len() || u.block(j).is_empty() {
            continue;
        }
        let block = u.block(j);
        for i in 0..m.rows() {
            let mut acc = CompensatedSum::new();
            for (l, x) in block.iter().enumerate() {
                acc.add(m.get(i, l).norm() * x.norm());
            }
            let c = acc.value();
            if c != 0.0 {
                contributions.entry((k, i)).or_default().push((j, c));
            }
        }
    }

    let mut cond1_masses = Vec::new();
    let mut tail_slopes = Vec::new();
    for (&ki, parts) in &contributions {
        let sums: Vec<f64> = schedule
            .iter()
            .map(|&n| {
                let mut acc = CompensatedSum::new();
                for &(_, c) in parts.iter().filter(|&&(j, _)| j < n) {
                    acc.add(c);
                }
                acc.value()
            })
            .collect();
        cond1_masses.push((ki, *sums.last().expect("schedule is non-empty")));
        if let Some(slope) = increment_slope(&schedule, &sums) {
            tail_slopes.push(slope);
        }
    }

    // Condition 2: weighted output mass under increasing domain truncation.
    let cond2_sums: Vec<f64> = schedule
        .iter()
        .map(|&n| -> Result<f64> {
            let truncated =
                BlockSequence::new(u.spectrum_label().to_string(), u.blocks()[..n].to_vec())?;
            let image = t.apply(&truncated)?;
            weighted_abs_mass(v, &image)
        })
        .collect::<Result<_>>()?;
    if let Some(slope) = increment_slope(&schedule, &cond2_sums) {
        tail_slopes.push(slope);
    }

    let verdict = if tail_slopes.iter().all(|&s| s < -1.0 - margin) {
        SequentialityVerdict::Certified
    } else {
        SequentialityVerdict::Uncertified
    };
    Ok(SequentialityReport {
        cond1_masses,
        cond2_mass: *cond2_sums.last().expect("schedule is non-empty"),
        tail_slopes,
        verdict,
    })
}

/// `sum_{k,i} |v_{ki}| |y_{ki}|` over the common prefix, (k, i)-ascending.
fn weighted_abs_mass(v: &BlockSequence, y: &BlockSequence) -> Result<f64> {
    let n = v.len().min(y.len());
    let mut acc = CompensatedSum::new();
    for k in 0..n {
        let vb = v.block(k);
        let yb = y.block(k);
        if vb.is_empty() || yb.is_empty() {
            continue;
        }
        if vb.len() != yb.len() {
            return Err(Error::Alignment(format!(
                "block {k}: dimensions {} and {} differ",
                vb.len(),
                yb.len()
            )));
        }
        for (a, b) in vb.iter().zip(yb) {
            acc.add(a.norm() * b.norm());
        }
    }
    Ok(acc.value())
}

/// Truncated absolute sums `sum_{k,i} |v_{ki}| |(sum_{j<=n} f_{kj} u_j)_i|`
/// for each truncation in `schedule`; the last entry at full truncation
/// equals the direct evaluation bit-identically.
pub fn truncation_limit_check(
    t: &BlockTensor,
    u: &BlockSequence,
    v: &BlockSequence,
    schedule: &[usize],
) -> Result<Vec<f64>> {
    if schedule.is_empty() {
        return Err(Error::Alignment("empty truncation schedule".into()));
    }
    for w in schedule.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Alignment(
                "schedule must be strictly ascending".into(),
            ));
        }
    }
    if *schedule.last().expect("non-empty") > u.len() {
        return Err(Error::Alignment(format!(
            "schedule exceeds available blocks ({} > {})",
            schedule.last().expect("non-empty"),
            u.len()
        )));
    }
    schedule
        .iter()
        .map(|&n| {
            let truncated =
                BlockSequence::new(u.spectrum_label().to_string(), u.blocks()[..n].to_vec())?;
            let image = t.apply(&truncated)?;
            weighted_abs_mass(v, &image)
        })
        .collect()
}

/// Relative tolerance of the superposition probes in `extract_tensor`.
pub const NONLINEARITY_TOL: f64 = 1e-10;

const PROBE_SEED: u64 = 0x7a3d_9c1f_5e2b_8d04;

/// Recovers the block tensor of a black-box linear mapping by probing
/// every coordinate basis sequence of the domain truncation and reading
/// the image blocks off as matrix columns.
///
/// Eight seeded superposition probes guard against non-linear mappings.
pub fn extract_tensor<F>(
    map: F,
    domain: &Spectrum,
    domain_trunc: usize,
    codomain: &Spectrum,
    codomain_trunc: usize,
) -> Result<BlockTensor>
where
    F: Fn(&BlockSequence) -> Result<BlockSequence> + Sync,
{
    if domain_trunc == 0 || domain_trunc > domain.len() {
        return Err(Error::Truncation(format!(
            "domain truncation {domain_trunc} out of range 1..={}",
            domain.len()
        )));
    }
    if codomain_trunc == 0 || codomain_trunc > codomain.len() {
        return Err(Error::Truncation(format!(
            "codomain truncation {codomain_trunc} out of range 1..={}",
            codomain.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    for probe in 0..8 {
        let a = random_sequence(&mut rng, domain, domain_trunc)?;
        let b = random_sequence(&mut rng, domain, domain_trunc)?;
        let fa = map(&a)?;
        let fb = map(&b)?;
        let fab = map(&a.add(&b)?)?;
        let residual = l2_norm(&sub(&fab, &fa.add(&fb)?)?);
        let scale = 1.0 + l2_norm(&fa) + l2_norm(&fb);
        if residual > NONLINEARITY_TOL * scale {
            return Err(Error::Nonlinearity(format!(
                "superposition probe {probe}: residual {residual:e} exceeds {:e}",
                NONLINEARITY_TOL * scale
            )));
        }
    }

    let coords: Vec<(usize, usize)> = (0..domain_trunc)
        .flat_map(|j| (0..domain.dim(j)).map(move |l| (j, l)))
        .collect();
    let images: Vec<((usize, usize), BlockSequence)> = coords
        .par_iter()
        .map(|&(j, l)| -> Result<_> {
            let basis = BlockSequence::basis(domain, j, l)?;
            let image = map(&basis)?;
            image.check_alignment(codomain)?;
            Ok(((j, l), image))
        })
        .collect::<Result<_>>()?;

    let mut t = BlockTensor::from_spectra(domain, domain_trunc, codomain, codomain_trunc)?;
    let mut matrices: BTreeMap<(usize, usize), BlockMatrix> = BTreeMap::new();
    for ((j, l), image) in images {
        for k in 0..codomain_trunc.min(image.len()) {
            let block = image.block(k);
            if block.is_empty() {
                continue;
            }
            let m = matrices
                .entry((k, j))
                .or_insert_with(|| BlockMatrix::zeros(codomain.dim(k), domain.dim(j)));
            for (i, &z) in block.iter().enumerate() {
                m.set(i, l, z);
            }
        }
    }
    for ((k, j), m) in matrices {
        if !m.is_zero() {
            t.insert(k, j, m)?;
        }
    }
    Ok(t)
}

fn random_sequence(rng: &mut ChaCha8Rng, sp: &Spectrum, trunc: usize) -> Result<BlockSequence> {
    let blocks = (0..trunc)
        .map(|j| {
            (0..sp.dim(j))
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    BlockSequence::new(sp.label().to_string(), blocks)
}

#[derive(Deserialize)]
struct TensorFile {
    domain: String,
    codomain: String,
    entries: Vec<TensorFileEntry>,
}

#[derive(Deserialize)]
struct TensorFileEntry {
    k: u64,
    j: u64,
    matrix: Vec<Vec<[f64; 2]>>,
}

/// Reads `tensor.json`; block dimensions are inferred from the stored
/// matrices.
pub fn load_tensor_json<R: Read>(reader: R) -> Result<BlockTensor> {
    let file: TensorFile =
        serde_json::from_reader(reader).map_err(|e| Error::Parse(e.to_string()))?;
    let entries = file
        .entries
        .into_iter()
        .map(|e| {
            let m = BlockMatrix::from_rows(
                e.matrix
                    .into_iter()
                    .map(|row| {
                        row.into_iter()
                            .map(|[re, im]| Complex64::new(re, im))
                            .collect()
                    })
                    .collect(),
            )?;
            Ok((e.k as usize, e.j as usize, m))
        })
        .collect::<Result<Vec<_>>>()?;
    BlockTensor::from_entries(file.domain, file.codomain, entries)
}

/// Writes `tensor.json` with 17-significant-digit numbers, entries in
/// (k, j)-ascending order.
pub fn save_tensor_json<W: Write>(mut w: W, t: &BlockTensor) -> Result<()> {
    writeln!(w, "{{")?;
    writeln!(
        w,
        "  \"domain\": {},",
        serde_json::to_string(t.domain_label()).expect("string serializes")
    )?;
    writeln!(
        w,
        "  \"codomain\": {},",
        serde_json::to_string(t.codomain_label()).expect("string serializes")
    )?;
    writeln!(w, "  \"entries\": [")?;
    let total = t.num_entries();
    for (idx, (&(k, j), m)) in t.entries().enumerate() {
        let rows: Vec<String> = (0..m.rows())
            .map(|i| {
                let row: Vec<String> = (0..m.cols())
                    .map(|q| {
                        let z = m.get(i, q);
                        fmt_complex_pair(z.re, z.im)
                    })
                    .collect();
                format!("[{}]", row.join(", "))
            })
            .collect();
        let sep = if idx + 1 == total { "" } else { "," };
        writeln!(
            w,
            "    {{ \"k\": {k}, \"j\": {j}, \"matrix\": [{}] }}{sep}",
            rows.join(", ")
        )?;
    }
    writeln!(w, "  ]")?;
    writeln!(w, "}}")?;
    Ok(())
}
