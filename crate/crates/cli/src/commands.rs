use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use lieorbit::algebra::{build_algebra, cartan_structure, CartanData};
use lieorbit::deformation::DeformationContext;
use lieorbit::numerics::{Vector, DEFAULT_ABS_EPS};
use lieorbit::orbit::RParam;
use lieorbit::semidirect::sample_semidirect_orbit;
use lieorbit::symplectic::{
    gradient_field, lagrangian_section, section_isotropy, HeightFunction, HermitianContext,
};
use lieorbit::verify::{run_suite, SuiteConfig};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{json_bytes, samples_csv, slug, write_atomic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleKind {
    /// `Ad(G) H` (r = 1).
    Adjoint,
    /// `Ad_r(G) H` for each r in the list.
    Deformed,
    /// Orbit of the semidirect product through H.
    Semidirect,
}

/// Builds the algebra and resolves H; an H outside the closed chamber is a usage error.
fn setup(cfg: &RunConfig) -> Result<(CartanData, Vector), CliError> {
    let cd = cartan_structure(&build_algebra(cfg.algebra)?)?;
    let h = cd
        .h_preset(&cfg.h_spec)
        .map_err(|e| CliError::Usage(format!("invalid H: {e}")))?;
    Ok((cd, h))
}

fn r_json(r: RParam) -> Value {
    match r {
        RParam::Finite(x) => Value::from(x),
        RParam::Infinite => Value::from("inf"),
    }
}

/// Sorted ascending with duplicates removed; each dropped duplicate is reported on stderr.
pub fn normalize_r_list(list: &[RParam]) -> Vec<RParam> {
    let mut rs = list.to_vec();
    rs.sort_by(|a, b| a.sort_key().total_cmp(&b.sort_key()));
    let before = rs.len();
    rs.dedup();
    if rs.len() < before {
        eprintln!("warning: removed {} duplicate r value(s)", before - rs.len());
    }
    rs
}

pub fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    setup(cfg)?;
    let suite = SuiteConfig {
        family: cfg.algebra,
        h: cfg.h_spec.clone(),
        r_list: cfg.r_list.clone(),
        seed: cfg.seed,
        n_base: cfg.n_base,
        n_fiber: cfg.n_fiber,
        tol: cfg.tol,
    };
    let report = run_suite(&suite)?;
    let bytes = json_bytes(&report);
    write_atomic(&cfg.output_dir, "verify_report.json", &bytes)?;
    print!("{}", String::from_utf8_lossy(&bytes));
    let failures: Vec<_> = report.failures().collect();
    for c in &failures {
        eprintln!(
            "FAIL {}: residual {:e} vs threshold {:e}",
            c.name, c.residual, c.threshold
        );
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failures.len()))
    }
}

pub fn orbit_sample(cfg: &RunConfig, kind: SampleKind) -> Result<(), CliError> {
    let (cd, h) = setup(cfg)?;
    let jobs: Vec<(String, RParam)> = match kind {
        SampleKind::Adjoint => vec![("1".into(), RParam::Finite(1.0))],
        SampleKind::Semidirect => vec![("inf".into(), RParam::Infinite)],
        SampleKind::Deformed => normalize_r_list(&cfg.r_list)
            .into_iter()
            .map(|r| (r.to_string(), r))
            .collect(),
    };
    let name = match kind {
        SampleKind::Adjoint => "adjoint",
        SampleKind::Deformed => "deformed",
        SampleKind::Semidirect => "semidirect",
    };
    for (label, r) in jobs {
        let samples = match kind {
            SampleKind::Semidirect => {
                sample_semidirect_orbit(&cd, &h, cfg.seed, cfg.n_base, cfg.n_fiber)?
            }
            _ => DeformationContext::new(&cd, r)?.sample_deformed_orbit(
                &h,
                cfg.seed,
                cfg.n_base,
                cfg.n_fiber,
            )?,
        };
        let csv = samples_csv(&label, &samples, cd.dim());
        let path = write_atomic(
            &cfg.output_dir,
            &format!("orbit_{name}_r{}.csv", slug(&label)),
            csv.as_bytes(),
        )?;
        println!("{}", path.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepEntry {
    r: Value,
    limit_deviation: f64,
}

#[derive(Serialize)]
struct SweepSummary {
    algebra: String,
    h: Vec<f64>,
    seed: u64,
    n_base: usize,
    entries: Vec<SweepEntry>,
    non_increasing: bool,
}

pub fn deform_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let (cd, h) = setup(cfg)?;
    let rs = normalize_r_list(&cfg.r_list);
    let mut entries = Vec::with_capacity(rs.len());
    for &r in &rs {
        let ctx = DeformationContext::new(&cd, r)?;
        let samples = ctx.sample_deformed_orbit(&h, cfg.seed, cfg.n_base, cfg.n_fiber)?;
        let label = r.to_string();
        write_atomic(
            &cfg.output_dir,
            &format!("sweep_r{}.csv", slug(&label)),
            samples_csv(&label, &samples, cd.dim()).as_bytes(),
        )?;
        entries.push(SweepEntry {
            r: r_json(r),
            limit_deviation: ctx.limit_deviation(&h, cfg.seed, cfg.n_base)?,
        });
    }
    let non_increasing = entries
        .windows(2)
        .all(|w| w[1].limit_deviation <= w[0].limit_deviation);
    let summary = SweepSummary {
        algebra: cfg.algebra.to_string(),
        h: h.iter().copied().collect(),
        seed: cfg.seed,
        n_base: cfg.n_base,
        entries,
        non_increasing,
    };
    let bytes = json_bytes(&summary);
    write_atomic(&cfg.output_dir, "sweep_summary.json", &bytes)?;
    print!("{}", String::from_utf8_lossy(&bytes));
    if non_increasing {
        Ok(())
    } else {
        eprintln!("FAIL limit deviation increases along the r grid");
        Err(CliError::ChecksFailed(1))
    }
}

/// Nominal bound on `|Omega|` over section tangent pairs, scaled like the verify thresholds.
pub const SECTION_THRESHOLD: f64 = 1e-6;

#[derive(Serialize)]
struct SectionEntry {
    t: f64,
    omega_max: f64,
    tangent_formula_gap: f64,
    threshold: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SectionSummary {
    algebra: String,
    h: Vec<f64>,
    seed: u64,
    samples: usize,
    entries: Vec<SectionEntry>,
}

pub fn lagrangian_sections(cfg: &RunConfig, ts: &[f64]) -> Result<(), CliError> {
    if !cfg.algebra.is_complex() {
        return Err(CliError::Usage(format!(
            "lagrangian-section needs a complex algebra, got {}",
            cfg.algebra
        )));
    }
    let (cd, h) = setup(cfg)?;
    let ctx = HermitianContext::new(&cd)?;
    let f = HeightFunction::new(&ctx, h.clone())?;
    let flag = cd.flag_orbit_sample(&h, cfg.seed, cfg.n_base)?;
    let field = gradient_field(&ctx, &f, &flag);
    let threshold = SECTION_THRESHOLD * cfg.tol.abs_eps / DEFAULT_ABS_EPS;
    let mut entries = Vec::with_capacity(ts.len());
    for &t in ts {
        let sec = lagrangian_section(&ctx, &field, t);
        let mut csv = String::from("t,base_tag");
        for i in 1..=cd.dim() {
            csv.push_str(&format!(",c{i}"));
        }
        csv.push('\n');
        for (i, p) in sec.section_points.iter().enumerate() {
            csv.push_str(&format!("{t},{i}"));
            for c in p.iter() {
                csv.push_str(&format!(",{c:e}"));
            }
            csv.push('\n');
        }
        write_atomic(
            &cfg.output_dir,
            &format!("section_t{}.csv", slug(&t.to_string())),
            csv.as_bytes(),
        )?;
        let (omega_max, gap) = section_isotropy(&ctx, &f, &sec)?;
        entries.push(SectionEntry {
            t,
            omega_max,
            tangent_formula_gap: gap,
            threshold,
            pass: omega_max <= threshold && gap <= threshold,
        });
    }
    let failed = entries.iter().filter(|e| !e.pass).count();
    let summary = SectionSummary {
        algebra: cfg.algebra.to_string(),
        h: h.iter().copied().collect(),
        seed: cfg.seed,
        samples: cfg.n_base,
        entries,
    };
    let bytes = json_bytes(&summary);
    write_atomic(&cfg.output_dir, "section_summary.json", &bytes)?;
    print!("{}", String::from_utf8_lossy(&bytes));
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failed))
    }
}
