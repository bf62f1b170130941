//! Acceptance suite: every release-gating criterion as one test, each
//! printing a `criterion N (...): PASS` line (run with `--nocapture` to
//! see them). Tolerances are pinned in the assertions.
//!
//! Run: cargo test -p spectraseq-cli --test acceptance -- --nocapture

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectraseq_core::{
    abs_pairing, adjointness_residual, classify_decay, evaluate, extract_tensor,
    factorization_check, hs_pairing_bound, pairing, save_coeffs_json, save_spectrum,
    save_tensor_json, sobolev_norm, torus_laplacian_spectrum, validate_conditions, BlockMatrix,
    BlockSequence, BlockTensor, EigenBasis, KomatsuSequence, Point, Spectrum, SpectrumFormat,
    TorusDimension,
};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_spectraseq")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn")
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_sequence(rng: &mut ChaCha8Rng, sp: &Spectrum, trunc: usize) -> BlockSequence {
    let blocks = (0..trunc)
        .map(|j| {
            (0..sp.dim(j))
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    BlockSequence::new(sp.label().to_string(), blocks).unwrap()
}

fn random_tensor(rng: &mut ChaCha8Rng, sp: &Spectrum, trunc: usize, fill: f64) -> BlockTensor {
    let mut t = BlockTensor::from_spectra(sp, trunc, sp, trunc).unwrap();
    for k in 0..trunc {
        for j in 0..trunc {
            if rng.gen_range(0.0..1.0) > fill {
                continue;
            }
            let mut m = BlockMatrix::zeros(sp.dim(k), sp.dim(j));
            for i in 0..sp.dim(k) {
                for q in 0..sp.dim(j) {
                    m.set(i, q, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                }
            }
            t.insert(k, j, m).unwrap();
        }
    }
    t
}

fn json_field_f64(text: &str, key: &str) -> f64 {
    let v: serde_json::Value = serde_json::from_str(text).expect("valid json");
    v.get(key)
        .and_then(|x| x.as_f64())
        .unwrap_or_else(|| panic!("field {key} in {text}"))
}

fn json_field_str(text: &str, key: &str) -> String {
    let v: serde_json::Value = serde_json::from_str(text).expect("valid json");
    v.get(key)
        .and_then(|x| x.as_str())
        .unwrap_or_else(|| panic!("field {key} in {text}"))
        .to_string()
}

#[test]
fn c1_weyl_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let sp = torus_laplacian_spectrum(TorusDimension::One, 512);
    let spath = dir.path().join("torus512.json");
    let mut buf = Vec::new();
    save_spectrum(&mut buf, &sp, SpectrumFormat::Json).unwrap();
    std::fs::write(&spath, buf).unwrap();

    let start = Instant::now();
    let conv = run(&[
        "--json",
        "spectrum-info",
        spath.to_str().unwrap(),
        "--q",
        "0.6",
    ]);
    let elapsed_conv = start.elapsed();
    assert!(conv.status.success());
    let text = String::from_utf8(conv.stdout).unwrap();
    assert_eq!(json_field_str(&text, "verdict"), "converges");
    let alpha = json_field_f64(&text, "fitted_counting_exponent");
    assert!((alpha - 0.5).abs() <= 0.05, "fitted exponent {alpha}");

    let start = Instant::now();
    let div = run(&[
        "--json",
        "spectrum-info",
        spath.to_str().unwrap(),
        "--q",
        "0.4",
    ]);
    let elapsed_div = start.elapsed();
    assert!(div.status.success());
    let text = String::from_utf8(div.stdout).unwrap();
    assert_eq!(json_field_str(&text, "verdict"), "diverges");

    assert!(
        elapsed_conv.as_secs_f64() < 1.0 && elapsed_div.as_secs_f64() < 1.0,
        "runtime {elapsed_conv:?} / {elapsed_div:?}"
    );
    println!(
        "criterion 1 (weyl threshold, q=0.6/0.4 on torus1 J=512): PASS ({} ms)",
        elapsed_conv.as_millis() + elapsed_div.as_millis()
    );
}

#[test]
fn c2_duality_inequality_suite() {
    let sp = torus_laplacian_spectrum(TorusDimension::One, 63);
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc2);
    let mut violations = 0usize;
    for _ in 0..1000 {
        let u = random_sequence(&mut rng, &sp, 64);
        let w = random_sequence(&mut rng, &sp, 64);
        let s = rng.gen_range(-2.0..2.0);
        let mass = abs_pairing(&u, &w).unwrap();
        let bound = sobolev_norm(&u, &sp, s).unwrap() * sobolev_norm(&w, &sp, -s).unwrap();
        if mass > bound * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    assert_eq!(violations, 0, "{violations} duality violations");
    println!("criterion 2 (duality inequality, 1000 triples at 64 blocks): PASS");
}

#[test]
fn c3_adjointness_suite() {
    let sp = torus_laplacian_spectrum(TorusDimension::One, 29);
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc3);
    let start = Instant::now();
    let mut violations = 0usize;
    for _ in 0..1000 {
        let t = random_tensor(&mut rng, &sp, 30, 0.15);
        let u = random_sequence(&mut rng, &sp, 30);
        let v = random_sequence(&mut rng, &sp, 30);
        let lhs = pairing(&t.apply(&u).unwrap(), &v).unwrap();
        let residual = adjointness_residual(&t, &u, &v).unwrap();
        if residual > 1e-10 * (1.0 + lhs.norm()) {
            violations += 1;
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(violations, 0, "{violations} adjointness violations");
    assert!(elapsed.as_secs_f64() < 10.0, "runtime {elapsed:?}");
    println!(
        "criterion 3 (adjointness, 1000 sparse tensors at 30 blocks): PASS ({} ms)",
        elapsed.as_millis()
    );
}

#[test]
fn c4_extraction_round_trip() {
    let sp = torus_laplacian_spectrum(TorusDimension::One, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc4);
    for case in 0..100 {
        let t = random_tensor(&mut rng, &sp, 12, 0.3);
        let extracted = extract_tensor(|u| t.apply(u), &sp, 12, &sp, 12).unwrap();
        assert!(extracted.entrywise_eq(&t), "case {case} differs");
        for (&(k, j), m) in t.entries() {
            for i in 0..m.rows() {
                for l in 0..m.cols() {
                    let a = m.get(i, l);
                    let b = extracted.scalar_entry(k, j, i, l);
                    assert_eq!(
                        a.re.to_bits(),
                        b.re.to_bits(),
                        "case {case} ({k},{j},{i},{l})"
                    );
                    assert_eq!(
                        a.im.to_bits(),
                        b.im.to_bits(),
                        "case {case} ({k},{j},{i},{l})"
                    );
                }
            }
        }
    }
    println!("criterion 4 (extraction round-trip, 100 tensors bit-identical): PASS");
}

#[test]
fn c5_hs_pairing_bound_suite() {
    let sp = torus_laplacian_spectrum(TorusDimension::One, 47);
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc5);
    let mut violations = 0usize;
    for _ in 0..1000 {
        let u = random_sequence(&mut rng, &sp, 48);
        let w = random_sequence(&mut rng, &sp, 48);
        let (mass, bound) = hs_pairing_bound(&u, &w).unwrap();
        if mass > bound + 1e-12 * bound {
            violations += 1;
        }
    }
    assert_eq!(violations, 0, "{violations} HS-bound violations");
    println!("criterion 5 (HS pairing bound, 1000 pairs): PASS");
}

#[test]
fn c6_reconstruction_and_universality() {
    // sin(3x) evaluation at 100 random points.
    let basis = EigenBasis::torus1(8);
    let mut blocks = BlockSequence::zeros(basis.spectrum(), 4)
        .unwrap()
        .blocks()
        .to_vec();
    blocks[3][1] = c(std::f64::consts::PI.sqrt(), 0.0);
    let phi = BlockSequence::new("torus1-J8", blocks).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = rng.gen_range(0.0..std::f64::consts::TAU);
        let got = evaluate(&phi, &basis, &Point::torus1(x)).unwrap();
        let exact = (3.0 * x).sin();
        worst = worst.max((got.re - exact).abs().max(got.im.abs()));
    }
    assert!(worst <= 1e-11, "worst evaluation deviation {worst}");

    // Factorization check on a diagonal lambda^-2 tensor at grid 256.
    let basis32 = EigenBasis::torus1(32);
    let diag = BlockTensor::diagonal(basis32.spectrum(), 33, |l| c(l.powf(-2.0), 0.0)).unwrap();
    let deviation = factorization_check(&diag, &basis32, 256).unwrap();
    assert!(deviation <= 1e-9, "factorization deviation {deviation}");
    println!(
        "criterion 6 (sin(3x) reconstruction {worst:.2e}; factorization deviation {deviation:.2e}): PASS"
    );
}

#[test]
fn c7_decay_classification() {
    let sp = torus_laplacian_spectrum(TorusDimension::One, 256);
    for p in [0.5f64, 1.0, 3.0, 6.0] {
        let blocks = (0..sp.len())
            .map(|j| vec![c(sp.lambda(j).powf(-p), 0.0); sp.dim(j)])
            .collect();
        let v = BlockSequence::new("torus1-J256", blocks).unwrap();
        let rep = classify_decay(&v, &sp, 10.0).unwrap();
        assert!(
            (rep.estimated_order - p).abs() <= 0.05,
            "p = {p}: estimated {}",
            rep.estimated_order
        );
        assert!(rep.fit_r2 >= 0.999, "p = {p}: r2 = {}", rep.fit_r2);
    }
    println!("criterion 7 (decay orders 0.5/1/3/6 on J=256 within 0.05, r2 >= 0.999): PASS");
}

#[test]
fn c8_komatsu_validation() {
    let mut factorials = vec![1.0f64];
    for k in 1..=64 {
        factorials.push(factorials[k - 1] * k as f64);
    }
    let m = KomatsuSequence::new(factorials, 1.0, 2.0).unwrap();
    let rep = validate_conditions(&m).unwrap();
    assert!(rep.normalized.holds);
    assert!(
        rep.growth.holds,
        "condition (2) must hold for k! with (1, 2)"
    );
    assert!(!rep.doubling.holds);
    let first = rep.doubling.first_violation.unwrap();
    let again = validate_conditions(&m)
        .unwrap()
        .doubling
        .first_violation
        .unwrap();
    assert_eq!(first, again, "violation index must be deterministic");
    assert_eq!(first, 2);

    let constant = KomatsuSequence::new(vec![1.0; 65], 1.0, 1.0).unwrap();
    assert!(validate_conditions(&constant).unwrap().all_hold());
    println!("criterion 8 (komatsu: k! passes (2) with (1,2), literal (3) fails at k=2; constants pass): PASS");
}

#[test]
fn c9_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = Fixtures::build(dir.path());
    let mut commands: Vec<Vec<String>> = Vec::new();
    let s = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();

    commands.push(s(&["spectrum-info", &fixtures.spectrum, "--q", "0.6"]));
    commands.push(s(&[
        "--json",
        "spectrum-info",
        &fixtures.spectrum,
        "--q",
        "0.6",
    ]));
    commands.push(s(&[
        "classify",
        &fixtures.spectrum,
        &fixtures.decaying,
        "--threshold",
        "2",
    ]));
    commands.push(s(&[
        "norm",
        &fixtures.spectrum,
        &fixtures.decaying,
        "--s",
        "0.5",
    ]));
    commands.push(s(&[
        "pair",
        &fixtures.spectrum,
        &fixtures.decaying,
        &fixtures.bounded,
    ]));
    commands.push(s(&[
        "pair",
        &fixtures.spectrum,
        &fixtures.decaying,
        &fixtures.bounded,
        "--abs",
    ]));
    commands.push(s(&["op-apply", &fixtures.tensor, &fixtures.decaying]));
    commands.push(s(&[
        "op-adjoint-check",
        &fixtures.tensor,
        &fixtures.decaying,
        &fixtures.bounded,
    ]));
    let probe = format!("'{}' op-apply '{}' -", bin(), fixtures.tensor);
    commands.push(s(&[
        "op-extract",
        "--probe-cmd",
        &probe,
        "--domain-trunc",
        "17",
        "--codomain-trunc",
        "17",
        "--domain-spectrum",
        &fixtures.spectrum,
    ]));
    commands.push(s(&[
        "reconstruct",
        "--manifold",
        "torus1",
        "--coeffs",
        &fixtures.decaying,
        "--points",
        &fixtures.points,
    ]));
    commands.push(s(&[
        "factor-check",
        "--tensor",
        &fixtures.tensor,
        "--manifold",
        "torus1",
        "--grid",
        "64",
    ]));
    commands.push(s(&["komatsu-validate", &fixtures.komatsu]));
    commands.push(s(&[
        "--json",
        "komatsu-validate",
        &fixtures.komatsu,
        "--K",
        "8",
    ]));

    for args in &commands {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = run(&argv);
        let second = run(&argv);
        assert!(
            first.status.success(),
            "command {args:?} failed: {}",
            String::from_utf8_lossy(&first.stderr)
        );
        assert_eq!(first.status.code(), second.status.code(), "{args:?}");
        assert_eq!(first.stdout, second.stdout, "stdout differs for {args:?}");
        assert_eq!(first.stderr, second.stderr, "stderr differs for {args:?}");
    }
    println!(
        "criterion 9 (byte-identical reruns across {} CLI invocations): PASS",
        commands.len()
    );
}

struct Fixtures {
    spectrum: String,
    decaying: String,
    bounded: String,
    tensor: String,
    points: String,
    komatsu: String,
}

impl Fixtures {
    fn build(dir: &Path) -> Self {
        let sp = torus_laplacian_spectrum(TorusDimension::One, 16);

        let spectrum = dir.join("spectrum.json");
        let mut buf = Vec::new();
        save_spectrum(&mut buf, &sp, SpectrumFormat::Json).unwrap();
        std::fs::write(&spectrum, buf).unwrap();

        let decaying_seq = BlockSequence::new(
            "torus1-J16",
            (0..17)
                .map(|j| {
                    (0..sp.dim(j))
                        .map(|l| c(sp.lambda(j).powf(-3.0), 0.01 * l as f64))
                        .collect()
                })
                .collect(),
        )
        .unwrap();
        let decaying = write_seq(dir, "decaying.json", &decaying_seq);

        let bounded_seq = BlockSequence::new(
            "torus1-J16",
            (0..17)
                .map(|j| {
                    (0..sp.dim(j))
                        .map(|l| c(0.25 + ((j + l) % 5) as f64 * 0.1, -0.3))
                        .collect()
                })
                .collect(),
        )
        .unwrap();
        let bounded = write_seq(dir, "bounded.json", &bounded_seq);

        let t = BlockTensor::diagonal(&sp, 17, |l| c(l.powf(-2.0), 0.0)).unwrap();
        let tensor = dir.join("tensor.json");
        let mut buf = Vec::new();
        save_tensor_json(&mut buf, &t).unwrap();
        std::fs::write(&tensor, buf).unwrap();

        let points = dir.join("points.csv");
        std::fs::write(&points, "x1\n0\n1.1\n2.2\n3.3\n4.4\n5.5\n").unwrap();

        let komatsu = dir.join("komatsu.json");
        let mut values = vec![1.0f64];
        for k in 1..=16 {
            values.push(values[k - 1] * k as f64);
        }
        let rendered: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
        std::fs::write(
            &komatsu,
            format!(
                "{{\"values\": [{}], \"A\": 1, \"H\": 2}}",
                rendered.join(", ")
            ),
        )
        .unwrap();

        Self {
            spectrum: spectrum.to_str().unwrap().to_string(),
            decaying,
            bounded,
            tensor: tensor.to_str().unwrap().to_string(),
            points: points.to_str().unwrap().to_string(),
            komatsu: komatsu.to_str().unwrap().to_string(),
        }
    }
}

fn write_seq(dir: &Path, name: &str, v: &BlockSequence) -> String {
    let path: PathBuf = dir.join(name);
    let mut buf = Vec::new();
    save_coeffs_json(&mut buf, v).unwrap();
    std::fs::write(&path, buf).unwrap();
    path.to_str().unwrap().to_string()
}
