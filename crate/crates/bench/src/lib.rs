//! Shared generators for the criterion benches.

use num_complex::Complex64;
use spectraseq_core::{BlockMatrix, BlockSequence, BlockTensor, Spectrum};

fn lcg(state: &mut u64) -> f64 {
    *state = state
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    (*state >> 11) as f64 / (1u64 << 53) as f64
}

/// Deterministic dense test sequence over the first `trunc` blocks.
pub fn sample_sequence(sp: &Spectrum, trunc: usize) -> BlockSequence {
    let mut state = 0x853c49e6748fea9bu64;
    let blocks = (0..trunc)
        .map(|j| {
            (0..sp.dim(j))
                .map(|_| Complex64::new(lcg(&mut state) * 2.0 - 1.0, lcg(&mut state) * 2.0 - 1.0))
                .collect()
        })
        .collect();
    BlockSequence::new(sp.label().to_string(), blocks).expect("finite entries")
}

/// Deterministic block tensor with roughly `fill` of the block pairs set.
pub fn sample_tensor(sp: &Spectrum, trunc: usize, fill: f64) -> BlockTensor {
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut t = BlockTensor::from_spectra(sp, trunc, sp, trunc).expect("valid truncation");
    for k in 0..trunc {
        for j in 0..trunc {
            if lcg(&mut state) > fill {
                continue;
            }
            let mut m = BlockMatrix::zeros(sp.dim(k), sp.dim(j));
            for i in 0..sp.dim(k) {
                for q in 0..sp.dim(j) {
                    m.set(
                        i,
                        q,
                        Complex64::new(lcg(&mut state) * 2.0 - 1.0, lcg(&mut state) * 2.0 - 1.0),
                    );
                }
            }
            t.insert(k, j, m).expect("consistent shapes");
        }
    }
    t
}
