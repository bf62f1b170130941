//! Fourier analysis on Hilbert spaces through eigenfunction expansions:
//! block coefficient sequences over an eigenvalue spectrum, Sobolev-scale
//! norms and bilinear dual pairings, decay-based smoothness
//! classification, sparse block-tensor operators with
//! adjoint-by-transpose, sequentiality certificates, and the delta /
//! factorization machinery on concrete tori.
//!
//! All values are immutable after construction and all operations are
//! pure; reductions run in a fixed block-ascending order with compensated
//! accumulation, so results are reproducible bit-for-bit.

pub mod coeffs;
pub mod error;
pub mod fit;
pub mod komatsu;
pub mod numfmt;
pub mod operators;
pub mod spectrum;
pub mod sum;
pub mod universality;

pub use coeffs::{
    abs_pairing, apply_power, block_hs_norms, cauchy_schwarz_gap, classify_decay, dual_certificate,
    l2_norm, load_coeffs_csv, load_coeffs_json, modulus, pairing, save_coeffs_csv,
    save_coeffs_json, sobolev_norm, sub, BlockSequence, DecayClass, DecayReport,
};
pub use error::{Error, Result};
pub use komatsu::{
    find_constants, load_komatsu_json, save_komatsu_json, validate_conditions, ConditionCheck,
    ConditionReport, KomatsuSequence,
};
pub use operators::{
    adjointness_residual, extract_tensor, hs_pairing_bound, load_tensor_json, save_tensor_json,
    sequentiality_check, truncation_limit_check, BlockMatrix, BlockTensor, SequentialityReport,
    SequentialityVerdict,
};
pub use spectrum::{
    group_eigenvalues, load_spectrum, minimal_s0, save_spectrum, summability_test,
    torus_laplacian_spectrum, Spectrum, SpectrumBlock, SpectrumFormat, SummabilityReport,
    TorusDimension, Verdict,
};
pub use universality::{
    delta_coefficients, evaluate, factorization_check, fourier_coefficients, hinf_mapping_check,
    EigenBasis, Manifold, MappingProbeReport, Point,
};

/// Caps the global thread pool used for internal parallelism (tensor
/// extraction probes, factorization sample maps). Call once, before any
/// parallel operation; later calls are ignored. Results do not depend on
/// the thread count.
pub fn init_thread_cap(threads: usize) {
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
}
