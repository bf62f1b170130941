//! `spectraseq` — command-line surface over the spectraseq core.
//!
//! Every command reads the declared JSON/CSV formats, validates file
//! invariants before computing, writes its whole report to stdout in one
//! piece, and is byte-deterministic given inputs and flags. Exit codes:
//! 0 success, 1 usage or domain error, 2 inconclusive verdict under
//! `--strict`.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command as ProcessCommand, Stdio};

use clap::{Parser, Subcommand, ValueEnum};

use spectraseq_core as core;
use spectraseq_core::numfmt::fmt_f64;
use spectraseq_core::{
    BlockSequence, BlockTensor, EigenBasis, Error, Manifold, Point, Spectrum, SpectrumFormat,
    Verdict,
};

#[derive(Parser)]
#[command(
    name = "spectraseq",
    version,
    about = "Eigenfunction-expansion sequence toolkit"
)]
struct Cli {
    /// Emit machine-readable JSON reports instead of text tables.
    #[arg(long, global = true)]
    json: bool,
    /// Escalate inconclusive verdicts to exit code 2.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ManifoldArg {
    Torus1,
    Torus2,
}

impl From<ManifoldArg> for Manifold {
    fn from(m: ManifoldArg) -> Manifold {
        match m {
            ManifoldArg::Torus1 => Manifold::Torus1,
            ManifoldArg::Torus2 => Manifold::Torus2,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Summability report for a spectrum: partial sum of d_j * lambda_j^-q,
    /// fitted counting exponent, and a margin-based verdict.
    SpectrumInfo {
        /// spectrum.json or spectrum.csv
        spectrum: PathBuf,
        /// Summability exponent q.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        q: f64,
        /// Half-width of the inconclusive band around the fitted exponent.
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
    },
    /// Decay classification of a coefficient sequence.
    Classify {
        spectrum: PathBuf,
        /// coeffs.json or coeffs.csv
        coeffs: PathBuf,
        /// Smoothness threshold on the fitted order.
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        threshold: f64,
    },
    /// Sobolev-scale norm of a coefficient sequence.
    Norm {
        spectrum: PathBuf,
        coeffs: PathBuf,
        /// Scale parameter s of the norm.
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
    },
    /// Bilinear pairing of two sequences (or the absolute pairing mass).
    Pair {
        spectrum: PathBuf,
        u: PathBuf,
        w: PathBuf,
        /// Compute sum |u| |w| instead of the bilinear pairing.
        #[arg(long)]
        abs: bool,
    },
    /// Apply a block tensor to a sequence; writes coeffs.json to stdout.
    OpApply {
        /// tensor.json
        tensor: PathBuf,
        /// coeffs.json, or "-" for stdin
        coeffs: PathBuf,
    },
    /// Adjointness residual |<f(u), v> - <u, adjoint(f)(v)>|.
    OpAdjointCheck {
        tensor: PathBuf,
        u: PathBuf,
        v: PathBuf,
    },
    /// Recover the tensor of a black-box linear map by coordinate probing;
    /// writes tensor.json to stdout. The probe command receives coeffs.json
    /// on stdin and must answer with coeffs.json on stdout.
    OpExtract {
        /// Shell command implementing the mapping.
        #[arg(long)]
        probe_cmd: String,
        #[arg(long)]
        domain_trunc: usize,
        #[arg(long)]
        codomain_trunc: usize,
        /// Spectrum file for the domain blocks.
        #[arg(long)]
        domain_spectrum: PathBuf,
        /// Spectrum file for the codomain blocks (defaults to the domain).
        #[arg(long)]
        codomain_spectrum: Option<PathBuf>,
    },
    /// Evaluate a coefficient sequence at manifold points; writes
    /// points.csv to stdout.
    Reconstruct {
        #[arg(long)]
        manifold: ManifoldArg,
        #[arg(long)]
        coeffs: PathBuf,
        /// CSV of points: header "x1" (torus1) or "x1,x2" (torus2);
        /// trailing re,im columns are accepted and ignored.
        #[arg(long)]
        points: PathBuf,
    },
    /// Verify the delta factorization of a tensor through quadrature
    /// re-extraction; prints the maximum entrywise deviation.
    FactorCheck {
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long)]
        manifold: ManifoldArg,
        /// Uniform grid size (nodes per dimension).
        #[arg(long)]
        grid: usize,
    },
    /// Check the weight-sequence growth conditions of komatsu.json.
    KomatsuValidate {
        file: PathBuf,
        /// Validate only the leading K+1 weights.
        #[arg(long = "K")]
        k: Option<usize>,
    },
}

struct Report {
    stdout: String,
    inconclusive: bool,
}

impl Report {
    fn conclusive(stdout: String) -> Self {
        Self {
            stdout,
            inconclusive: false,
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                eprint!("{e}");
                std::process::exit(1);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    if let Err(e) = apply_thread_cap() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.stdout);
            if report.inconclusive && cli.strict {
                std::process::exit(2);
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

/// Honors SPECTRASEQ_THREADS; results never depend on the thread count.
fn apply_thread_cap() -> Result<(), String> {
    match std::env::var("SPECTRASEQ_THREADS") {
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                format!("SPECTRASEQ_THREADS must be a positive integer, got {raw:?}")
            })?;
            if n == 0 {
                return Err("SPECTRASEQ_THREADS must be >= 1".into());
            }
            core::init_thread_cap(n);
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

fn run(cli: &Cli) -> core::Result<Report> {
    match &cli.command {
        Command::SpectrumInfo {
            spectrum,
            q,
            margin,
        } => {
            let sp = read_spectrum(spectrum)?;
            spectrum_info(&sp, *q, *margin, cli.json)
        }
        Command::Classify {
            spectrum,
            coeffs,
            threshold,
        } => {
            let sp = read_spectrum(spectrum)?;
            let v = read_coeffs(coeffs, Some(&sp))?;
            classify(&sp, &v, *threshold, cli.json)
        }
        Command::Norm {
            spectrum,
            coeffs,
            s,
        } => {
            let sp = read_spectrum(spectrum)?;
            let v = read_coeffs(coeffs, Some(&sp))?;
            let norm = core::sobolev_norm(&v, &sp, *s)?;
            Ok(Report::conclusive(if cli.json {
                format!(
                    "{{\n  \"command\": \"norm\",\n  \"s\": {},\n  \"sobolev_norm\": {}\n}}\n",
                    fmt_f64(*s),
                    fmt_f64(norm)
                )
            } else {
                format!(
                    "s            {}\nsobolev_norm {}\n",
                    fmt_f64(*s),
                    fmt_f64(norm)
                )
            }))
        }
        Command::Pair {
            spectrum,
            u,
            w,
            abs,
        } => {
            let sp = read_spectrum(spectrum)?;
            let us = read_coeffs(u, Some(&sp))?;
            let ws = read_coeffs(w, Some(&sp))?;
            us.check_alignment(&sp)?;
            ws.check_alignment(&sp)?;
            if *abs {
                let mass = core::abs_pairing(&us, &ws)?;
                Ok(Report::conclusive(if cli.json {
                    format!(
                        "{{\n  \"command\": \"pair\",\n  \"abs\": true,\n  \"abs_pairing\": {}\n}}\n",
                        fmt_f64(mass)
                    )
                } else {
                    format!("abs_pairing {}\n", fmt_f64(mass))
                }))
            } else {
                let p = core::pairing(&us, &ws)?;
                Ok(Report::conclusive(if cli.json {
                    format!(
                        "{{\n  \"command\": \"pair\",\n  \"abs\": false,\n  \"pairing\": [{}, {}]\n}}\n",
                        fmt_f64(p.re),
                        fmt_f64(p.im)
                    )
                } else {
                    format!(
                        "pairing_re {}\npairing_im {}\n",
                        fmt_f64(p.re),
                        fmt_f64(p.im)
                    )
                }))
            }
        }
        Command::OpApply { tensor, coeffs } => {
            let t = read_tensor(tensor)?;
            let u = read_coeffs(coeffs, None)?;
            let image = t.apply(&u)?;
            let mut buf = Vec::new();
            core::save_coeffs_json(&mut buf, &image)?;
            Ok(Report::conclusive(String::from_utf8(buf).expect("utf8")))
        }
        Command::OpAdjointCheck { tensor, u, v } => {
            let t = read_tensor(tensor)?;
            let us = read_coeffs(u, None)?;
            let vs = read_coeffs(v, None)?;
            let lhs = core::pairing(&t.apply(&us)?, &vs)?;
            let rhs = core::pairing(&us, &t.adjoint().apply(&vs)?)?;
            let residual = core::adjointness_residual(&t, &us, &vs)?;
            Ok(Report::conclusive(if cli.json {
                format!(
                    "{{\n  \"command\": \"op-adjoint-check\",\n  \"lhs\": [{}, {}],\n  \"rhs\": [{}, {}],\n  \"residual\": {}\n}}\n",
                    fmt_f64(lhs.re),
                    fmt_f64(lhs.im),
                    fmt_f64(rhs.re),
                    fmt_f64(rhs.im),
                    fmt_f64(residual)
                )
            } else {
                format!(
                    "lhs_re   {}\nlhs_im   {}\nrhs_re   {}\nrhs_im   {}\nresidual {}\n",
                    fmt_f64(lhs.re),
                    fmt_f64(lhs.im),
                    fmt_f64(rhs.re),
                    fmt_f64(rhs.im),
                    fmt_f64(residual)
                )
            }))
        }
        Command::OpExtract {
            probe_cmd,
            domain_trunc,
            codomain_trunc,
            domain_spectrum,
            codomain_spectrum,
        } => {
            let domain = read_spectrum(domain_spectrum)?;
            let codomain = match codomain_spectrum {
                Some(path) => read_spectrum(path)?,
                None => domain.clone(),
            };
            let t = core::extract_tensor(
                |u| run_probe(probe_cmd, u),
                &domain,
                *domain_trunc,
                &codomain,
                *codomain_trunc,
            )?;
            let mut buf = Vec::new();
            core::save_tensor_json(&mut buf, &t)?;
            Ok(Report::conclusive(String::from_utf8(buf).expect("utf8")))
        }
        Command::Reconstruct {
            manifold,
            coeffs,
            points,
        } => {
            let v = read_coeffs(coeffs, None)?;
            let basis = basis_for_sequence((*manifold).into(), &v)?;
            v.check_alignment(basis.spectrum())?;
            let pts = read_points(points, (*manifold).into())?;
            let mut out = String::new();
            match Manifold::from(*manifold) {
                Manifold::Torus1 => out.push_str("x,phi_re,phi_im\n"),
                Manifold::Torus2 => out.push_str("x1,x2,phi_re,phi_im\n"),
            }
            for p in &pts {
                let value = core::evaluate(&v, &basis, p)?;
                let coords: Vec<String> = p.coords().iter().map(|&c| fmt_f64(c)).collect();
                out.push_str(&format!(
                    "{},{},{}\n",
                    coords.join(","),
                    fmt_f64(value.re),
                    fmt_f64(value.im)
                ));
            }
            Ok(Report::conclusive(out))
        }
        Command::FactorCheck {
            tensor,
            manifold,
            grid,
        } => {
            let t = read_tensor(tensor)?;
            let basis = basis_for_tensor((*manifold).into(), &t)?;
            let deviation = core::factorization_check(&t, &basis, *grid)?;
            Ok(Report::conclusive(if cli.json {
                format!(
                    "{{\n  \"command\": \"factor-check\",\n  \"grid\": {},\n  \"max_deviation\": {}\n}}\n",
                    grid,
                    fmt_f64(deviation)
                )
            } else {
                format!(
                    "grid          {}\nmax_deviation {}\n",
                    grid,
                    fmt_f64(deviation)
                )
            }))
        }
        Command::KomatsuValidate { file, k } => komatsu_validate(file, *k, cli.json),
    }
}

fn spectrum_info(sp: &Spectrum, q: f64, margin: f64, json: bool) -> core::Result<Report> {
    let rep = core::summability_test(sp, q, margin)?;
    let s0 = core::minimal_s0(sp, margin)?;
    let stdout = if json {
        format!(
            "{{\n  \"command\": \"spectrum-info\",\n  \"label\": {},\n  \"blocks\": {},\n  \"total_dim\": {},\n  \"q\": {},\n  \"margin\": {},\n  \"partial_sum\": {},\n  \"fitted_counting_exponent\": {},\n  \"fit_r2\": {},\n  \"minimal_s0\": {},\n  \"verdict\": \"{}\"\n}}\n",
            serde_label(sp.label()),
            sp.len(),
            sp.total_dim(),
            fmt_f64(q),
            fmt_f64(margin),
            fmt_f64(rep.partial_sum),
            fmt_f64(rep.fitted_counting_exponent),
            fmt_f64(rep.fit_r2),
            fmt_f64(s0),
            rep.verdict.as_str()
        )
    } else {
        format!(
            "label                    {}\nblocks                   {}\ntotal_dim                {}\nq                        {}\nmargin                   {}\npartial_sum              {}\nfitted_counting_exponent {}\nfit_r2                   {}\nminimal_s0               {}\nverdict                  {}\n",
            sp.label(),
            sp.len(),
            sp.total_dim(),
            fmt_f64(q),
            fmt_f64(margin),
            fmt_f64(rep.partial_sum),
            fmt_f64(rep.fitted_counting_exponent),
            fmt_f64(rep.fit_r2),
            fmt_f64(s0),
            rep.verdict.as_str()
        )
    };
    Ok(Report {
        stdout,
        inconclusive: rep.verdict == Verdict::Inconclusive,
    })
}

fn classify(sp: &Spectrum, v: &BlockSequence, threshold: f64, json: bool) -> core::Result<Report> {
    let rep = core::classify_decay(v, sp, threshold)?;
    let stdout = if json {
        format!(
            "{{\n  \"command\": \"classify\",\n  \"threshold\": {},\n  \"estimated_order\": {},\n  \"constant_c\": {},\n  \"fit_r2\": {},\n  \"classification\": \"{}\"\n}}\n",
            fmt_f64(threshold),
            fmt_f64(rep.estimated_order),
            fmt_f64(rep.constant_c),
            fmt_f64(rep.fit_r2),
            rep.classification.label()
        )
    } else {
        format!(
            "threshold       {}\nestimated_order {}\nconstant_c      {}\nfit_r2          {}\nclassification  {}\n",
            fmt_f64(threshold),
            fmt_f64(rep.estimated_order),
            fmt_f64(rep.constant_c),
            fmt_f64(rep.fit_r2),
            rep.classification.label()
        )
    };
    Ok(Report::conclusive(stdout))
}

fn komatsu_validate(file: &Path, k: Option<usize>, json: bool) -> core::Result<Report> {
    let m = core::load_komatsu_json(open(file)?)?;
    let m = match k {
        Some(k) => {
            if k + 1 > m.values().len() {
                return Err(Error::Invariant(format!(
                    "K = {k} exceeds the {} stored weights",
                    m.values().len()
                )));
            }
            core::KomatsuSequence::new(m.values()[..=k].to_vec(), m.a(), m.h())?
        }
        None => m,
    };
    let rep = core::validate_conditions(&m)?;
    let fmt_check = |c: core::ConditionCheck| match c.first_violation {
        None => "pass".to_string(),
        Some(k) => format!("fail (first violation at k={k})"),
    };
    let json_check = |c: core::ConditionCheck| match c.first_violation {
        None => "{ \"holds\": true }".to_string(),
        Some(k) => format!("{{ \"holds\": false, \"first_violation\": {k} }}"),
    };
    let stdout = if json {
        format!(
            "{{\n  \"command\": \"komatsu-validate\",\n  \"K\": {},\n  \"A\": {},\n  \"H\": {},\n  \"condition_1_normalized\": {},\n  \"condition_2_growth\": {},\n  \"condition_3_doubling\": {}\n}}\n",
            m.max_index(),
            fmt_f64(m.a()),
            fmt_f64(m.h()),
            json_check(rep.normalized),
            json_check(rep.growth),
            json_check(rep.doubling)
        )
    } else {
        format!(
            "K                       {}\nA                       {}\nH                       {}\ncondition_1_normalized  {}\ncondition_2_growth      {}\ncondition_3_doubling    {}\n",
            m.max_index(),
            fmt_f64(m.a()),
            fmt_f64(m.h()),
            fmt_check(rep.normalized),
            fmt_check(rep.growth),
            fmt_check(rep.doubling)
        )
    };
    Ok(Report::conclusive(stdout))
}

fn serde_label(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

fn open(path: &Path) -> core::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| {
        Error::Parse(format!("cannot open {}: {e}", path.display()))
    })?))
}

fn read_spectrum(path: &Path) -> core::Result<Spectrum> {
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => SpectrumFormat::Csv,
        _ => SpectrumFormat::Json,
    };
    core::load_spectrum(open(path)?, format)
}

/// Reads coeffs.json (or coeffs.csv when a spectrum is available for the
/// block layout); "-" reads JSON from stdin.
fn read_coeffs(path: &Path, sp: Option<&Spectrum>) -> core::Result<BlockSequence> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf).map_err(Error::Io)?;
        return core::load_coeffs_json(buf.as_slice());
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => match sp {
            Some(sp) => core::load_coeffs_csv(open(path)?, sp),
            None => Err(Error::Parse(
                "coeffs.csv needs a spectrum for its block layout; use coeffs.json here".into(),
            )),
        },
        _ => core::load_coeffs_json(open(path)?),
    }
}

fn read_tensor(path: &Path) -> core::Result<BlockTensor> {
    core::load_tensor_json(open(path)?)
}

/// Builds the eigenbasis matching a sequence: the max frequency comes from
/// the `torus<n>-J<f>` spectrum label, falling back to the block count on
/// torus1.
fn basis_for_sequence(manifold: Manifold, v: &BlockSequence) -> core::Result<EigenBasis> {
    if let Some(freq) = parse_label_frequency(v.spectrum_label(), manifold) {
        return Ok(EigenBasis::for_manifold(manifold, freq));
    }
    match manifold {
        Manifold::Torus1 => {
            if v.is_empty() {
                return Err(Error::Truncation("empty coefficient sequence".into()));
            }
            Ok(EigenBasis::torus1(v.len() - 1))
        }
        Manifold::Torus2 => Err(Error::Parse(format!(
            "cannot infer the torus2 truncation: spectrum label {:?} is not torus2-J<f>",
            v.spectrum_label()
        ))),
    }
}

fn basis_for_tensor(manifold: Manifold, t: &BlockTensor) -> core::Result<EigenBasis> {
    for label in [t.domain_label(), t.codomain_label()] {
        if let Some(freq) = parse_label_frequency(label, manifold) {
            return Ok(EigenBasis::for_manifold(manifold, freq));
        }
    }
    match manifold {
        Manifold::Torus1 => {
            let blocks = t.domain_dims().len().max(t.codomain_dims().len());
            if blocks == 0 {
                return Err(Error::Truncation("tensor has no blocks".into()));
            }
            Ok(EigenBasis::torus1(blocks - 1))
        }
        Manifold::Torus2 => Err(Error::Parse(
            "cannot infer the torus2 truncation: tensor labels are not torus2-J<f>".into(),
        )),
    }
}

fn parse_label_frequency(label: &str, manifold: Manifold) -> Option<usize> {
    let prefix = format!("{}-J", manifold.as_str());
    label.strip_prefix(&prefix)?.parse().ok()
}

/// Points file: header `x1` or `x1,x2`, with optional trailing `re,im`
/// columns (the grid.csv sampled-function layout) that are ignored here.
fn read_points(path: &Path, manifold: Manifold) -> core::Result<Vec<Point>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(open(path)?);
    let ncoords = match manifold {
        Manifold::Torus1 => 1,
        Manifold::Torus2 => 2,
    };
    {
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
        let fields: Vec<&str> = headers.iter().collect();
        let want_coords: Vec<&str> = if ncoords == 1 {
            vec!["x1"]
        } else {
            vec!["x1", "x2"]
        };
        let ok = fields.len() >= ncoords
            && fields[..ncoords] == want_coords[..]
            && (fields.len() == ncoords
                || (fields.len() == ncoords + 2 && fields[ncoords..] == ["re", "im"]));
        if !ok {
            return Err(Error::Parse(format!(
                "expected points header {:?} (optionally with re,im), got {fields:?}",
                want_coords.join(",")
            )));
        }
    }
    let mut points = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.len() != ncoords && record.len() != ncoords + 2 {
            return Err(Error::Parse(format!(
                "expected {ncoords} coordinates per row, got {} fields",
                record.len()
            )));
        }
        let mut coords = [0.0f64; 2];
        for (i, c) in coords.iter_mut().enumerate().take(ncoords) {
            *c = record[i]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad coordinate {:?}: {e}", &record[i])))?;
            if !c.is_finite() {
                return Err(Error::Invariant("point coordinate is not finite".into()));
            }
        }
        points.push(match manifold {
            Manifold::Torus1 => Point::torus1(coords[0]),
            Manifold::Torus2 => Point::torus2(coords[0], coords[1]),
        });
    }
    Ok(points)
}

/// One probe of the external mapping: coeffs.json in, coeffs.json out.
fn run_probe(cmd: &str, u: &BlockSequence) -> core::Result<BlockSequence> {
    let mut payload = Vec::new();
    core::save_coeffs_json(&mut payload, u)?;
    let mut child = ProcessCommand::new("sh")
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Parse(format!("cannot run probe command: {e}")))?;
    child
        .stdin
        .as_mut()
        .expect("stdin was piped")
        .write_all(&payload)
        .map_err(Error::Io)?;
    let output = child.wait_with_output().map_err(Error::Io)?;
    if !output.status.success() {
        return Err(Error::Parse(format!(
            "probe command failed ({}): {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    core::load_coeffs_json(output.stdout.as_slice())
}
