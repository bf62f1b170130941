//! Links the decay classifier to the summability oracle: a sequence with
//! fitted decay order p has square-summable weighted tails at scale s
//! exactly when s < p - alpha/2, with alpha the counting exponent.

use num_complex::Complex64;

use spectraseq_core::{
    classify_decay, minimal_s0, summability_test, torus_laplacian_spectrum, BlockSequence,
    Spectrum, TorusDimension, Verdict,
};

fn power_sequence(sp: &Spectrum, p: f64) -> BlockSequence {
    let blocks = (0..sp.len())
        .map(|j| vec![Complex64::new(sp.lambda(j).powf(-p), 0.0); sp.dim(j)])
        .collect();
    BlockSequence::new(sp.label().to_string(), blocks).unwrap()
}

#[test]
fn decay_order_and_weighted_summability_share_a_threshold() {
    let sp = torus_laplacian_spectrum(TorusDimension::One, 256);
    let margin = 0.05;
    let alpha = minimal_s0(&sp, margin).unwrap() - margin;

    for p in [1.0f64, 2.0, 3.5] {
        let w = power_sequence(&sp, p);
        let rep = classify_decay(&w, &sp, 10.0).unwrap();
        assert!(
            (rep.estimated_order - p).abs() <= 0.05,
            "order {}",
            rep.estimated_order
        );

        // sum lambda^{2s} ||w_j||^2 = sum d_j lambda^{2s - 2p} converges
        // iff 2p - 2s > alpha iff s < p - alpha/2. Probe both sides of
        // the boundary through the summability oracle.
        for ds in [-0.4, 0.4] {
            let s = p - alpha / 2.0 + ds;
            let q = 2.0 * p - 2.0 * s;
            let verdict = summability_test(&sp, q, margin).unwrap().verdict;
            if ds < 0.0 {
                assert_eq!(verdict, Verdict::Converges, "p={p}, s={s}");
            } else {
                assert_eq!(verdict, Verdict::Diverges, "p={p}, s={s}");
            }
        }
    }
}

#[test]
fn synthetic_orders_recover_across_the_required_range() {
    let sp = torus_laplacian_spectrum(TorusDimension::One, 256);
    for p in [0.5f64, 1.0, 3.0, 6.0] {
        let v = power_sequence(&sp, p);
        let rep = classify_decay(&v, &sp, 10.0).unwrap();
        assert!(
            (rep.estimated_order - p).abs() <= 0.05,
            "p = {p}, estimated {}",
            rep.estimated_order
        );
        assert!(rep.fit_r2 >= 0.999, "p = {p}, r2 = {}", rep.fit_r2);
    }
}
