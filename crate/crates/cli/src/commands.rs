use commutant_core::certificate::{certify_cb, certify_pb, CertificateReport, CertificateVerdict};
use commutant_core::dynamics::{random_compact, CorpusManifest};
use commutant_core::linalg::{Complex, NormKind, WindowedMatrix};
use commutant_core::maps::{orbit_with_cap, ElementaryMap, Target};
use commutant_core::operators::{KnownSpectrum, OperatorSpec};
use commutant_core::spectral::{kitai_test, minkowski_diff, verdict_commutator};
use serde::Serialize;
use serde_json::json;

use crate::{emit, exit, read_text, to_json_text, CertifyArgs, Failure, Format, MapChoice, OrbitArgs, SpectrumArgs};

pub fn spectrum(args: &SpectrumArgs) -> Result<u8, Failure> {
    let spec = OperatorSpec::from_json_str(&read_text(&args.spec)?)?;
    let sigma = match spec.known_spectrum() {
        KnownSpectrum::Known(s) => Some(s),
        KnownSpectrum::Unknown => None,
    };
    let mut report = json!({
        "operator": spec.to_json(),
        "sigma": sigma,
    });
    match args.map {
        MapChoice::Commutator => {
            let sigma_j = sigma.as_ref().map(minkowski_diff);
            report["map"] = json!("commutator");
            report["sigma_j"] = json!(sigma_j);
            report["kitai"] = json!(sigma_j.as_ref().map(kitai_test));
            report["verdict"] = json!(verdict_commutator(&spec));
        }
        MapChoice::None => {
            report["map"] = json!("none");
            report["kitai"] = json!(sigma.as_ref().map(kitai_test));
        }
    }
    emit(args.out.as_deref(), &to_json_text(&report))?;
    if sigma.is_none() {
        eprintln!("error: no closed-form spectrum and no finite matrix model for this operator");
        return Ok(exit::UNKNOWN_SPECTRUM);
    }
    Ok(exit::OK)
}

/// `eIeJ` names the matrix unit `E_{I,J}`.
fn unit_target(name: &str) -> Option<WindowedMatrix> {
    let rest = name.strip_prefix('e')?;
    let (i, j) = rest.split_once('e')?;
    Some(WindowedMatrix::unit(i.parse().ok()?, j.parse().ok()?))
}

fn load_matrix(path: &std::path::Path) -> Result<WindowedMatrix, Failure> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| Failure::Usage(format!("bad matrix file {}: {e}", path.display())))
}

#[derive(Serialize)]
struct OrbitReport<'a> {
    map: &'a ElementaryMap,
    steps: usize,
    norm: NormKind,
    cap: usize,
    records: Vec<commutant_core::maps::OrbitRecord>,
}

pub fn orbit(args: &OrbitArgs) -> Result<u8, Failure> {
    let map = ElementaryMap::from_json_str(&read_text(&args.map)?)?;
    let a0 = load_matrix(&args.init)?;
    let mut targets = Vec::with_capacity(args.targets.len());
    for t in &args.targets {
        let matrix = match unit_target(t) {
            Some(m) => m,
            None => load_matrix(std::path::Path::new(t))?,
        };
        targets.push(Target::new(t.clone(), matrix));
    }
    let norm = args.norm.into();
    let records = orbit_with_cap(&map, &a0, args.steps, &targets, norm, args.cap)?;
    let report = OrbitReport {
        map: &map,
        steps: args.steps,
        norm,
        cap: args.cap,
        records,
    };
    emit(args.out.as_deref(), &to_json_text(&report))?;
    Ok(exit::OK)
}

#[derive(Serialize)]
struct SummaryRow {
    n: usize,
    orbit_distance: f64,
    f_n_re: f64,
    f_n_im: f64,
    g_direct_re: f64,
    g_direct_im: f64,
    g_formula_re: f64,
    g_formula_im: f64,
    bound_upper: f64,
    bound_lower: f64,
    consistent: bool,
}

fn csv_summary(r: &CertificateReport) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &r.per_n {
        w.serialize(SummaryRow {
            n: row.n,
            orbit_distance: row.orbit_distance,
            f_n_re: row.f_n_at_z0.re,
            f_n_im: row.f_n_at_z0.im,
            g_direct_re: row.g_n_at_z0_direct.re,
            g_direct_im: row.g_n_at_z0_direct.im,
            g_formula_re: row.g_n_at_z0_formula.re,
            g_formula_im: row.g_n_at_z0_formula.im,
            bound_upper: row.bound_upper,
            bound_lower: row.bound_lower,
            consistent: row.consistent,
        })
        .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn certify(args: &CertifyArgs) -> Result<u8, Failure> {
    // cheap checks first so a bad flag never pays for a corpus
    let lead = match (&args.c, &args.poly) {
        (_, Some(p)) => p.0.iter().rev().find(|z| **z != Complex::new(0.0, 0.0)).copied(),
        (Some(c), None) => Some(*c),
        (None, None) => Some(Complex::new(1.0, 0.0)),
    };
    if let Some(c) = lead {
        if 3.0 * c.norm() * args.eps >= 1.0 {
            return Err(Failure::Usage(format!(
                "precondition violated: 3|c| eps = {} must be < 1",
                3.0 * c.norm() * args.eps
            )));
        }
    }
    if !(args.eps > 0.0 && args.eps < 1.0 / 3.0) {
        return Err(Failure::Usage(format!("--eps must lie in (0, 1/3), got {}", args.eps)));
    }

    let (a, corpus) = match (&args.matrix, &args.random) {
        (Some(path), _) => (load_matrix(path)?, None),
        (None, Some(r)) => (
            random_compact(r.seed, r.size, r.decay)?,
            Some(CorpusManifest {
                seed: r.seed,
                size: r.size,
                decay: r.decay,
            }),
        ),
        (None, None) => return Err(Failure::Usage("give a matrix file or --random".into())),
    };
    let mut report = match &args.poly {
        Some(p) => certify_pb(&a, &p.0, args.eps, args.n_max, args.exponent.into())?,
        None => certify_cb(&a, args.c.unwrap_or(Complex::new(1.0, 0.0)), args.eps, args.n_max)?,
    };
    report.corpus = corpus;

    let text = match args.format {
        Format::Json => to_json_text(&report),
        Format::CsvSummary => csv_summary(&report)?,
    };
    emit(args.out.as_deref(), &text)?;
    Ok(match report.verdict {
        CertificateVerdict::NoNearApproachObserved => exit::OK,
        CertificateVerdict::IdentityViolation => exit::IDENTITY_VIOLATION,
        CertificateVerdict::NearApproachObserved => exit::NEAR_APPROACH,
    })
}
