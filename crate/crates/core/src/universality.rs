//! Point-evaluable eigenbases on tori, delta-functional coefficients,
//! trigonometric quadrature, smooth-mapping diagnosis, and the numerical
//! factorization check `f = fhat o delta`.
//!
//! Built-in bases are real trigonometric systems, so the bilinear pairing
//! of this crate reconstructs point values without conjugation. Delta
//! coefficients live in the dual scale; pairing them against a truncated
//! sequence is a truncated evaluation, not a convergence claim.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coeffs::{
    classify_decay, pairing, BlockSequence, DecayClass, DecayReport, MIN_DECAY_BLOCKS,
};
use crate::error::{Error, Result};
use crate::operators::BlockTensor;
use crate::spectrum::{torus_laplacian_spectrum, Spectrum, TorusDimension};
use crate::sum::CompensatedComplexSum;

/// Supported manifolds for built-in eigenbases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Manifold {
    Torus1,
    Torus2,
}

impl Manifold {
    pub fn as_str(&self) -> &'static str {
        match self {
            Manifold::Torus1 => "torus1",
            Manifold::Torus2 => "torus2",
        }
    }
}

/// A point on a torus, with angles reduced into `[0, 2*pi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coords: [f64; 2],
    ndim: usize,
}

impl Point {
    pub fn torus1(x: f64) -> Self {
        Self {
            coords: [reduce_angle(x), 0.0],
            ndim: 1,
        }
    }

    pub fn torus2(x1: f64, x2: f64) -> Self {
        Self {
            coords: [reduce_angle(x1), reduce_angle(x2)],
            ndim: 2,
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.ndim]
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }
}

fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r == TAU {
        0.0
    } else {
        r
    }
}

/// A spectrum together with a deterministic rule evaluating each basis
/// function `e_{jl}` at a point.
///
/// `torus1` carries `{1/sqrt(2*pi), cos(jx)/sqrt(pi), sin(jx)/sqrt(pi)}`
/// against the `I - laplacian` spectrum; `torus2` uses the corresponding
/// real system indexed by lattice shells, ordered by eigenvalue and then
/// lexicographically within each shell.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    spectrum: Spectrum,
    manifold: Manifold,
    /// Positive lattice representatives per block (torus2 only).
    shells: Vec<Vec<(i64, i64)>>,
}

impl EigenBasis {
    pub fn torus1(max_frequency: usize) -> Self {
        Self {
            spectrum: torus_laplacian_spectrum(TorusDimension::One, max_frequency),
            manifold: Manifold::Torus1,
            shells: Vec::new(),
        }
    }

    pub fn torus2(max_frequency: usize) -> Self {
        let spectrum = torus_laplacian_spectrum(TorusDimension::Two, max_frequency);
        let max = max_frequency as i64;
        let mut by_shell: std::collections::BTreeMap<i64, Vec<(i64, i64)>> =
            std::collections::BTreeMap::new();
        for k1 in -max..=max {
            for k2 in -max..=max {
                let positive = k1 > 0 || (k1 == 0 && k2 > 0);
                if positive || (k1 == 0 && k2 == 0) {
                    by_shell
                        .entry(k1 * k1 + k2 * k2)
                        .or_default()
                        .push((k1, k2));
                }
            }
        }
        let shells = by_shell
            .into_values()
            .map(|mut reps| {
                reps.sort_unstable();
                reps
            })
            .collect();
        Self {
            spectrum,
            manifold: Manifold::Torus2,
            shells,
        }
    }

    pub fn for_manifold(manifold: Manifold, max_frequency: usize) -> Self {
        match manifold {
            Manifold::Torus1 => Self::torus1(max_frequency),
            Manifold::Torus2 => Self::torus2(max_frequency),
        }
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    /// Evaluates `e_{jl}(x)` (0-based `j` and `l`).
    pub fn eval(&self, j: usize, l: usize, x: &Point) -> f64 {
        match self.manifold {
            Manifold::Torus1 => {
                let t = x.coords[0];
                if j == 0 {
                    1.0 / TAU.sqrt()
                } else {
                    let phase = j as f64 * t;
                    if l == 0 {
                        phase.cos() / PI.sqrt()
                    } else {
                        phase.sin() / PI.sqrt()
                    }
                }
            }
            Manifold::Torus2 => {
                if j == 0 {
                    return 1.0 / TAU;
                }
                let (k1, k2) = self.shells[j][l / 2];
                let phase = k1 as f64 * x.coords[0] + k2 as f64 * x.coords[1];
                let norm = PI * 2.0f64.sqrt();
                if l % 2 == 0 {
                    phase.cos() / norm
                } else {
                    phase.sin() / norm
                }
            }
        }
    }

    /// Largest lattice frequency appearing in the first `trunc` blocks.
    pub fn max_frequency(&self, trunc: usize) -> usize {
        match self.manifold {
            Manifold::Torus1 => trunc.saturating_sub(1),
            Manifold::Torus2 => self.shells[..trunc]
                .iter()
                .flat_map(|reps| {
                    reps.iter()
                        .map(|&(a, b)| a.unsigned_abs().max(b.unsigned_abs()))
                })
                .max()
                .unwrap_or(0) as usize,
        }
    }

    /// Uniform quadrature grid: `m` nodes on torus1, `m x m` on torus2
    /// (first coordinate outermost).
    pub fn grid_points(&self, m: usize) -> Vec<Point> {
        match self.manifold {
            Manifold::Torus1 => (0..m)
                .map(|i| Point::torus1(TAU * i as f64 / m as f64))
                .collect(),
            Manifold::Torus2 => {
                let mut pts = Vec::with_capacity(m * m);
                for i1 in 0..m {
                    for i2 in 0..m {
                        pts.push(Point::torus2(
                            TAU * i1 as f64 / m as f64,
                            TAU * i2 as f64 / m as f64,
                        ));
                    }
                }
                pts
            }
        }
    }

    /// Quadrature weight per node for a grid parameter `m`.
    fn quadrature_weight(&self, m: usize) -> f64 {
        match self.manifold {
            Manifold::Torus1 => TAU / m as f64,
            Manifold::Torus2 => (TAU / m as f64) * (TAU / m as f64),
        }
    }

    fn check_alias(&self, m: usize, trunc: usize) -> Result<()> {
        let max_freq = self.max_frequency(trunc);
        if m <= 2 * max_freq {
            return Err(Error::Alias(format!(
                "grid size {m} must exceed 2 * max frequency {max_freq} for truncation {trunc}"
            )));
        }
        Ok(())
    }
}

/// Delta-functional coefficients `(delta_x)_{jl} = e_{jl}(x)` over the
/// first `trunc` blocks.
pub fn delta_coefficients(b: &EigenBasis, x: &Point, trunc: usize) -> Result<BlockSequence> {
    if trunc > b.spectrum.len() {
        return Err(Error::Truncation(format!(
            "truncation {trunc} exceeds {} blocks",
            b.spectrum.len()
        )));
    }
    let blocks = (0..trunc)
        .map(|j| {
            (0..b.spectrum.dim(j))
                .map(|l| Complex64::new(b.eval(j, l, x), 0.0))
                .collect()
        })
        .collect();
    BlockSequence::new(b.spectrum.label().to_string(), blocks)
}

/// Truncated point evaluation: `pairing(phi, delta_coefficients(b, x))`.
pub fn evaluate(phi: &BlockSequence, b: &EigenBasis, x: &Point) -> Result<Complex64> {
    phi.check_alignment(b.spectrum())?;
    let delta = delta_coefficients(b, x, phi.len())?;
    pairing(phi, &delta)
}

/// Discrete Fourier coefficients of grid samples by spectrally exact
/// trapezoid quadrature: entry `(j, l)` is
/// `sum_m samples[m] * e_{jl}(x_m) * weight`.
///
/// `samples` must cover the full uniform grid (length `m` on torus1,
/// `m * m` on torus2) with `m > 2 * max frequency` of the truncation.
pub fn fourier_coefficients(
    b: &EigenBasis,
    samples: &[Complex64],
    trunc: usize,
) -> Result<BlockSequence> {
    if trunc > b.spectrum.len() {
        return Err(Error::Truncation(format!(
            "truncation {trunc} exceeds {} blocks",
            b.spectrum.len()
        )));
    }
    let m = match b.manifold {
        Manifold::Torus1 => samples.len(),
        Manifold::Torus2 => {
            let m = (samples.len() as f64).sqrt().round() as usize;
            if m * m != samples.len() {
                return Err(Error::Alignment(format!(
                    "torus2 grid must be square, got {} samples",
                    samples.len()
                )));
            }
            m
        }
    };
    if m == 0 {
        return Err(Error::Alias("empty sample grid".into()));
    }
    for (i, z) in samples.iter().enumerate() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Invariant(format!("sample {i} is not finite")));
        }
    }
    b.check_alias(m, trunc)?;
    let points = b.grid_points(m);
    let weight = b.quadrature_weight(m);
    let blocks = (0..trunc)
        .map(|j| {
            (0..b.spectrum.dim(j))
                .map(|l| {
                    let mut acc = CompensatedComplexSum::new();
                    for (sample, point) in samples.iter().zip(&points) {
                        acc.add(sample * b.eval(j, l, point));
                    }
                    acc.value() * weight
                })
                .collect()
        })
        .collect();
    BlockSequence::new(b.spectrum.label().to_string(), blocks)
}

/// Classification of one probe of a candidate smooth-type mapping.
#[derive(Clone, Copy, Debug)]
pub struct MappingProbeReport {
    pub probe: usize,
    pub decay: DecayReport,
}

/// Relative floor below which quadrature output is considered zero when
/// diagnosing sampled mappings.
pub const QUADRATURE_NOISE_FLOOR: f64 = 1e-12;

/// Diagnoses whether `map` behaves like a smooth-type mapping: for each
/// dual probe `u`, the scalar map `x -> pairing(map(x), u)` is sampled on
/// the grid, expanded in the basis, and its coefficient decay classified
/// against `threshold`.
///
/// Coefficients below `QUADRATURE_NOISE_FLOOR` relative to the largest one
/// are treated as zero; a sample map with no significant content in the
/// fit window is reported smooth-like with infinite order.
pub fn hinf_mapping_check<F>(
    map: F,
    b: &EigenBasis,
    probes: &[BlockSequence],
    grid_size: usize,
    threshold: f64,
) -> Result<Vec<MappingProbeReport>>
where
    F: Fn(&Point) -> Result<BlockSequence>,
{
    let trunc = b.spectrum.len();
    b.check_alias(grid_size, trunc)?;
    let points = b.grid_points(grid_size);
    let images: Vec<BlockSequence> = points.iter().map(&map).collect::<Result<_>>()?;

    let mut reports = Vec::with_capacity(probes.len());
    for (probe_idx, probe) in probes.iter().enumerate() {
        let samples: Vec<Complex64> = images
            .iter()
            .map(|image| pairing(image, probe))
            .collect::<Result<_>>()?;
        let coeffs = fourier_coefficients(b, &samples, trunc)?;
        let decay = classify_sampled(&coeffs, b, threshold)?;
        reports.push(MappingProbeReport {
            probe: probe_idx,
            decay,
        });
    }
    Ok(reports)
}

/// Decay classification of quadrature output with the noise floor applied.
fn classify_sampled(coeffs: &BlockSequence, b: &EigenBasis, threshold: f64) -> Result<DecayReport> {
    let global_max = coeffs
        .blocks()
        .iter()
        .flat_map(|block| block.iter().map(|z| z.norm()))
        .fold(0.0f64, f64::max);
    let floor = global_max * QUADRATURE_NOISE_FLOOR;
    let masked: Vec<Vec<Complex64>> = coeffs
        .blocks()
        .iter()
        .map(|block| {
            block
                .iter()
                .map(|&z| {
                    if z.norm() > floor {
                        z
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();
    let masked = BlockSequence::new(coeffs.spectrum_label().to_string(), masked)?;

    let n = masked.len();
    let significant: Vec<(f64, f64)> = (n / 2..n)
        .filter_map(|j| {
            let m = masked
                .block(j)
                .iter()
                .map(|z| z.norm())
                .fold(0.0f64, f64::max);
            (m > 0.0).then(|| (b.spectrum.lambda(j), m))
        })
        .collect();

    if significant.len() >= MIN_DECAY_BLOCKS {
        return classify_decay(&masked, b.spectrum(), threshold);
    }
    if significant.is_empty() {
        // Band-limited below the fit window (or identically zero): the
        // sampled map is as smooth as the truncation can certify.
        return Ok(DecayReport {
            estimated_order: f64::INFINITY,
            constant_c: 0.0,
            fit_r2: 1.0,
            classification: DecayClass::SmoothLike,
        });
    }
    // Isolated high-frequency content: too sparse for the regression, and
    // certainly not decaying. Report order zero.
    Ok(DecayReport {
        estimated_order: 0.0,
        constant_c: significant.iter().map(|&(_, m)| m).fold(0.0f64, f64::max),
        fit_r2: 0.0,
        classification: if threshold > 0.0 {
            DecayClass::Sobolev(0.0)
        } else {
            DecayClass::SmoothLike
        },
    })
}

/// Verifies the factorization `f = fhat o delta` numerically.
///
/// `f(x) := fhat(delta_coefficients(x))` is sampled on the uniform grid;
/// every scalar coordinate map `x -> (f(x))_{ki}` is re-expanded in the
/// basis, which recovers the tensor column `f_{kj.i}` when the grid is
/// alias-free. Returns the maximum entrywise deviation between the
/// re-extracted and the original tensor over the band limit.
pub fn factorization_check(fhat: &BlockTensor, b: &EigenBasis, grid_size: usize) -> Result<f64> {
    let sp = b.spectrum();
    let trunc_domain = fhat.domain_dims().len();
    let trunc_codomain = fhat.codomain_dims().len();
    if trunc_domain > sp.len() || trunc_codomain > sp.len() {
        return Err(Error::Truncation(format!(
            "tensor truncation {trunc_domain}x{trunc_codomain} exceeds {} basis blocks",
            sp.len()
        )));
    }
    for (j, &d) in fhat.domain_dims().iter().enumerate() {
        if d != 0 && d != sp.dim(j) {
            return Err(Error::Alignment(format!(
                "tensor domain block {j} has dimension {d}, basis has {}",
                sp.dim(j)
            )));
        }
    }
    for (k, &g) in fhat.codomain_dims().iter().enumerate() {
        if g != 0 && g != sp.dim(k) {
            return Err(Error::Alignment(format!(
                "tensor codomain block {k} has dimension {g}, basis has {}",
                sp.dim(k)
            )));
        }
    }
    b.check_alias(grid_size, trunc_domain)?;

    let points = b.grid_points(grid_size);
    let images: Vec<BlockSequence> = points
        .par_iter()
        .map(|x| fhat.apply(&delta_coefficients(b, x, trunc_domain)?))
        .collect::<Result<_>>()?;

    let coords: Vec<(usize, usize)> = (0..trunc_codomain)
        .flat_map(|k| (0..sp.dim(k)).map(move |i| (k, i)))
        .collect();
    let deviations: Vec<f64> = coords
        .par_iter()
        .map(|&(k, i)| -> Result<f64> {
            let samples: Vec<Complex64> = images
                .iter()
                .map(|image| {
                    if k < image.len() && !image.block(k).is_empty() {
                        image.block(k)[i]
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            let recovered = fourier_coefficients(b, &samples, trunc_domain)?;
            let mut worst = 0.0f64;
            for j in 0..trunc_domain {
                for l in 0..sp.dim(j) {
                    let original = fhat.scalar_entry(k, j, i, l);
                    let dev = (recovered.block(j)[l] - original).norm();
                    worst = worst.max(dev);
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(deviations.into_iter().fold(0.0f64, f64::max))
}
