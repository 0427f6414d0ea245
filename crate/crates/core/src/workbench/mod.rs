//! Assembly of the moment identity's computable terms: the main term, the
//! diagonal, and the minimal and maximal Eisenstein contributions, with the
//! config, caches and report around them.

mod cache;
mod config;
mod report;
mod terms;

use std::time::{SystemTime, UNIX_EPOCH};

pub use cache::{
    cache_roundtrip, coefficient_cache_path, kloosterman_cache_path, load_or_build_form, read_coefficient_cache,
    read_kloosterman_cache, write_coefficient_cache, write_kloosterman_cache,
};
pub use config::{WorkbenchConfig, CONFIG_KEYS};
pub use report::{decimal, Diagnostics, MomentReport, OMITTED};
pub use terms::{
    gamma_ratio, moment_constant, EisMaxTerm, EisMinTerm, MomentLattice, Orbit, Workbench, INNER_SIGMA, LINE_HEIGHT,
    POLE_PROXIMITY,
};

use crate::gl2forms::{ingest_maass_data, HolomorphicForm, MaassFormRecord};
use crate::numerics::ComplexValue;
use crate::{par, Result};

/// Exponent in the lower bound T ≫ p^{3+7/16} under which the diagonal dominates.
pub const MAIN_CONDITION_EXPONENT: f64 = 3.0 + 7.0 / 16.0;

/// (p^{3+7/16}, T ≥ p^{3+7/16}).
pub fn main_condition(p: u64, t: f64) -> (f64, bool) {
    let threshold = (p as f64).powf(MAIN_CONDITION_EXPONENT);
    (threshold, t >= threshold)
}

fn workbench(cfg: &WorkbenchConfig, f: HolomorphicForm) -> Result<Workbench> {
    cfg.validate()?;
    Workbench::new(&cfg.test_spec()?, cfg.spectral_step, f, cfg.p, cfg.quadrature)
}

/// (1/192π⁵)∬ h·(1 + Π Γ(k/2+μ_j)/Γ(k/2−μ_j))·spec dμ.
pub fn main_term(cfg: &WorkbenchConfig) -> Result<ComplexValue> {
    cfg.validate()?;
    let lattice = MomentLattice::new(&cfg.test_spec()?, cfg.spectral_step)?;
    terms::main_term_on(&lattice, cfg.k)
}

/// (λ_f(p)/p^{3/2})(1/192π⁵)∬ h·V_k(p³, μ)·spec dμ.
pub fn diagonal_term(cfg: &WorkbenchConfig, f: &HolomorphicForm) -> Result<ComplexValue> {
    workbench(cfg, f.clone())?.diagonal_term()
}

pub fn eis_min_term(cfg: &WorkbenchConfig, f: &HolomorphicForm) -> Result<EisMinTerm> {
    workbench(cfg, f.clone())?.eis_min_term()
}

pub fn eis_max_term(cfg: &WorkbenchConfig, f: &HolomorphicForm, records: &[MaassFormRecord]) -> Result<EisMaxTerm> {
    workbench(cfg, f.clone())?.eis_max_term(records, cfg.u_height)
}

fn write_report(cfg: &WorkbenchConfig, report: &MomentReport) -> Result<()> {
    if let Some(parent) = cfg.output_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&cfg.output_path, report.to_json()?)?;
    Ok(())
}

fn fill(cfg: &WorkbenchConfig, r: &mut MomentReport) -> Result<()> {
    cfg.validate()?;
    let spec = cfg.test_spec()?;
    let form = load_or_build_form(&cfg.cache_dir, cfg.k, cfg.n_max)?;
    let records = cfg.maass_data_path.as_deref().map(ingest_maass_data).transpose()?;
    let wb = Workbench::new(&spec, cfg.spectral_step, form, cfg.p, cfg.quadrature)?;
    r.lattice_orbits = wb.lattice.len();
    r.lambda_f_p = wb.form.try_lambda(cfg.p as usize)?;
    r.twist = wb.twist()?;

    let (main, eis_min) = par::join(|| wb.main_term(), || wb.eis_min_term());
    let main = main?;
    r.main_term = Some(main);
    let coarse = MomentLattice::new(&spec, 2.0 * cfg.spectral_step)?;
    let main_coarse = terms::main_term_on(&coarse, cfg.k)?;
    r.diagnostics.main_step_residual = Some((main_coarse - main).norm() / main.norm());
    r.diagnostics.main_over_t3m2 = Some(main.re / (spec.t.powi(3) * spec.m * spec.m));

    let diag = wb.diagonal_term()?;
    let diag_tilde = wb.diagonal_tilde_term()?;
    r.diagonal_term = Some(diag);
    r.diagonal_tilde_term = Some(diag_tilde);
    if r.twist != 0.0 {
        r.diagnostics.structural_ratio = Some((diag + diag_tilde) / (main * r.twist));
    }

    let eis_min = eis_min?;
    r.eis_min_term = Some(eis_min.value);
    r.diagnostics.eis_min_pole_proximity = Some(eis_min.pole_proximity);
    r.diagnostics.eis_min_over_t12m2 = Some(eis_min.value.norm() / (spec.t.powf(1.2) * spec.m * spec.m));

    if let Some(records) = records {
        let max = wb.eis_max_term(&records, cfg.u_height)?;
        r.eis_max_term = Some(max.value);
        r.eis_max_disclaimer = Some(max.disclaimer);
        r.diagnostics.eis_max_tail_bound = Some(max.tail_bound);
    }
    Ok(())
}

/// Computes every term for `cfg` and writes the report to `cfg.output_path`.
///
/// On failure a report with `complete = false` and the error message is still
/// written before the error is returned.
pub fn moment_report(cfg: &WorkbenchConfig) -> Result<MomentReport> {
    let (threshold, holds) = main_condition(cfg.p, cfg.t);
    let mut report = MomentReport {
        complete: false,
        error: None,
        config_hash: cfg.hash(),
        config: cfg.canonical(),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
            .to_string(),
        lattice_orbits: 0,
        lambda_f_p: 0.0,
        twist: 0.0,
        main_term: None,
        diagonal_term: None,
        diagonal_tilde_term: None,
        eis_min_term: None,
        eis_max_term: None,
        eis_max_disclaimer: None,
        diagnostics: Diagnostics {
            main_condition_threshold: threshold,
            main_condition_holds: holds,
            ..Diagnostics::default()
        },
        omitted: OMITTED.to_string(),
    };
    match fill(cfg, &mut report) {
        Ok(()) => {
            report.complete = true;
            write_report(cfg, &report)?;
            Ok(report)
        }
        Err(e) => {
            report.error = Some(e.to_string());
            write_report(cfg, &report)?;
            Err(e)
        }
    }
}
