use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gl3moment::afe::{afe_central_value, CoefficientSource};
use gl3moment::eisenstein::{factorization_check_min, MinimalEisenstein};
use gl3moment::gl2forms::{build_eigenform, ingest_maass_data, l_value, MAX_COEFFICIENTS};
use gl3moment::kloosterman::{
    classical_kloosterman, weil_bound_report, KloostermanCache, KloostermanInput, SumKindKey,
};
use gl3moment::numerics::ComplexValue;
use gl3moment::spectral::{h_spectral_integral, LanglandsParameter, TestFunctionSpec};
use gl3moment::tracekernels::{w4_decay_echo, wl_decay_echo, KernelAverager};
use gl3moment::voronoi::{voronoi_lhs, voronoi_rhs, TestWindow};
use gl3moment::workbench::{
    cache_roundtrip, gamma_ratio, kloosterman_cache_path, load_or_build_form, moment_report, read_kloosterman_cache,
    write_kloosterman_cache, WorkbenchConfig,
};
use gl3moment::{Error, Result};

/// Numerical workbench for the first moment of GL(2)×GL(3) Rankin–Selberg L-functions.
#[derive(Parser)]
#[command(name = "gl3moment", version)]
struct Cli {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

/// Config file plus one flag per config key; flags win over the file.
#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    k: Option<String>,
    #[arg(long, global = true)]
    p: Option<String>,
    /// Spectral scale ‖μ⁰‖.
    #[arg(long = "T", global = true)]
    t: Option<String>,
    #[arg(long, global = true)]
    theta: Option<String>,
    #[arg(long = "A0", global = true)]
    a0: Option<String>,
    /// Quadrature step.
    #[arg(long, global = true)]
    step: Option<String>,
    /// Quadrature line height.
    #[arg(long, global = true)]
    height: Option<String>,
    #[arg(long, global = true)]
    tolerance: Option<String>,
    /// trapezoid or double_exponential.
    #[arg(long, global = true)]
    scheme: Option<String>,
    #[arg(long = "spectral-step", global = true)]
    spectral_step: Option<String>,
    #[arg(long = "u-height", global = true)]
    u_height: Option<String>,
    #[arg(long = "n-max", global = true)]
    n_max: Option<String>,
    #[arg(long = "maass-data-path", global = true)]
    maass_data_path: Option<String>,
    #[arg(long = "cache-dir", global = true)]
    cache_dir: Option<String>,
    #[arg(long = "output-path", global = true)]
    output_path: Option<String>,
}

impl ConfigArgs {
    fn flags(&self) -> [(&'static str, &Option<String>); 15] {
        [
            ("k", &self.k),
            ("p", &self.p),
            ("T", &self.t),
            ("theta", &self.theta),
            ("A0", &self.a0),
            ("step", &self.step),
            ("height", &self.height),
            ("tolerance", &self.tolerance),
            ("scheme", &self.scheme),
            ("spectral_step", &self.spectral_step),
            ("u_height", &self.u_height),
            ("n_max", &self.n_max),
            ("maass_data_path", &self.maass_data_path),
            ("cache_dir", &self.cache_dir),
            ("output_path", &self.output_path),
        ]
    }

    fn load(&self) -> Result<WorkbenchConfig> {
        let mut cfg = match &self.config {
            Some(path) => WorkbenchConfig::from_file(path)?,
            None => WorkbenchConfig::default(),
        };
        for (key, value) in self.flags() {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|m| Error::InvalidInput(format!("--{key}: {m}")))?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Complete,
    Incomplete,
    Classical,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one Kloosterman sum, or print the Weil-bound table.
    Kloosterman {
        /// `classical` evaluates S(n1, m1; d1) and ignores the other arguments.
        #[arg(long, value_enum, default_value = "complete")]
        kind: Kind,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        n1: i64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        n2: i64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        m1: i64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        m2: i64,
        #[arg(long, default_value_t = 1)]
        d1: u64,
        #[arg(long, default_value_t = 1)]
        d2: u64,
        /// Check both sums against their bounds for all D₁, D₂ up to this.
        #[arg(long)]
        weil_report: Option<u64>,
    },
    /// Compare the AFE central value at the minimal Eisenstein point μ⁰ with Π L(1/2 − μ_j, f).
    AfeCheck {
        /// Largest accepted relative error; the AFE is truncated at a hundredth of it, but not below 1e-8.
        #[arg(long, default_value_t = 1e-6)]
        max_error: f64,
    },
    /// Both sides of the Voronoi formula for each modulus and window center.
    VoronoiCheck {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,5")]
        moduli: Vec<i64>,
        #[arg(long, value_delimiter = ',', default_value = "20,100")]
        centers: Vec<f64>,
    },
    /// ∬ h·spec dμ/(T³M²) across several T.
    SpectralScaling {
        #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
        scales: Vec<f64>,
        #[arg(long, default_value_t = 0.25)]
        max_variation: f64,
    },
    /// Decay of the averaged w₄ and w_l kernels around their truncation points.
    KernelsDecay {
        #[arg(long, default_value_t = 1e-2)]
        factor: f64,
    },
    /// Compute all moment terms and write the JSON report.
    MomentReport,
    /// Read a Maass form CSV and summarize it.
    IngestMaass { path: Option<PathBuf> },
    /// Quick consistency checks of every layer.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(cli) {
        Ok(true) => {
            eprintln!("done in {:.2?}", start.elapsed());
            ExitCode::SUCCESS
        }
        Ok(false) => {
            eprintln!("check failed after {:.2?}", start.elapsed());
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn show(z: ComplexValue) -> String {
    format!("{:.16e} {:+.16e}i", z.re, z.im)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = cli.cfg.load()?;
    match cli.command {
        Command::Kloosterman {
            kind,
            n1,
            n2,
            m1,
            m2,
            d1,
            d2,
            weil_report,
        } => kloosterman(&cfg, kind, [n1, n2, m1, m2], d1, d2, weil_report),
        Command::AfeCheck { max_error } => afe_check(&cfg, max_error),
        Command::VoronoiCheck { moduli, centers } => voronoi_check(&cfg, &moduli, &centers),
        Command::SpectralScaling { scales, max_variation } => spectral_scaling(&cfg, &scales, max_variation),
        Command::KernelsDecay { factor } => kernels_decay(&cfg, factor),
        Command::MomentReport => {
            let r = moment_report(&cfg)?;
            println!("report   {}", cfg.output_path.display());
            println!("orbits   {}", r.lattice_orbits);
            for (name, v) in [
                ("main", r.main_term),
                ("diagonal", r.diagonal_term),
                ("diagonal~", r.diagonal_tilde_term),
                ("eis_min", r.eis_min_term),
                ("eis_max", r.eis_max_term),
            ] {
                if let Some(v) = v {
                    println!("{name:<9} {}", show(v));
                }
            }
            println!(
                "T ≥ p^(3+7/16) = {:.4}: {}",
                r.diagnostics.main_condition_threshold, r.diagnostics.main_condition_holds
            );
            Ok(true)
        }
        Command::IngestMaass { path } => {
            let path = path
                .or(cfg.maass_data_path.clone())
                .ok_or_else(|| Error::NoData("no Maass data path given".into()))?;
            let records = ingest_maass_data(&path)?;
            println!("{} record(s) from {}", records.len(), path.display());
            for r in &records {
                println!(
                    "t_g = {:.10}  L(1, Ad² g) = {:.6}  primes ≤ {}  [{}]",
                    r.t_g,
                    r.ad2_value,
                    r.largest_prime().unwrap_or(0),
                    r.source_id
                );
            }
            Ok(true)
        }
        Command::Selftest => selftest(&cfg),
    }
}

fn kloosterman(
    cfg: &WorkbenchConfig,
    kind: Kind,
    [n1, n2, m1, m2]: [i64; 4],
    d1: u64,
    d2: u64,
    weil: Option<u64>,
) -> Result<bool> {
    if let Some(max_d) = weil {
        let rows = weil_bound_report(max_d)?;
        let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
        for r in &failed {
            println!("{:?} {:?}: |S| = {:.6e} > {:.6e}", r.kind, r.input, r.magnitude, r.bound);
        }
        println!("{} sums, {} above bound: {}", rows.len(), failed.len(), verdict(failed.is_empty()));
        return Ok(failed.is_empty());
    }
    let value = match kind {
        Kind::Classical => classical_kloosterman(n1, m1, d1)?,
        Kind::Complete | Kind::Incomplete => {
            let key = match kind {
                Kind::Complete => SumKindKey::Complete,
                _ => SumKindKey::Incomplete,
            };
            let path = kloosterman_cache_path(&cfg.cache_dir);
            let cache = if path.exists() {
                read_kloosterman_cache(&path)?
            } else {
                KloostermanCache::new()
            };
            let before = cache.len();
            let v = cache.get_or_compute(key, &KloostermanInput::new(n1, n2, m1, m2, d1, d2)?)?;
            if cache.len() > before {
                write_kloosterman_cache(&path, &cache)?;
            }
            v
        }
    };
    println!("{}", show(value));
    Ok(true)
}

/// The full coefficient table reaches about this AFE tolerance at T = 5.
const AFE_TOLERANCE_FLOOR: f64 = 1e-8;

fn desk_mu(t: f64) -> LanglandsParameter {
    // ‖μ‖ = T along (2, 1, −3)/√14
    let d = t / 14f64.sqrt();
    LanglandsParameter::from_imaginary(2.0 * d, d)
}

fn afe_check(cfg: &WorkbenchConfig, max_error: f64) -> Result<bool> {
    let f = build_eigenform(cfg.k, cfg.n_max.max(MAX_COEFFICIENTS))?;
    let mu = desk_mu(cfg.t);
    let e = MinimalEisenstein::new(mu);
    let q = cfg.quadrature.with_tolerance((max_error * 1e-2).max(AFE_TOLERANCE_FLOOR));
    let afe = afe_central_value(&f, &mu, &CoefficientSource::minimal(&e)?, &q, 100_000_000)?;
    let fine = cfg.quadrature.with_tolerance(cfg.quadrature.tolerance.min(1e-13));
    let mut product = ComplexValue::new(1.0, 0.0);
    for m in mu.mu {
        product *= l_value(&f, 0.5 - m, &fine)?;
    }
    let rel = (afe.value - product).norm() / product.norm();
    println!("AFE        {}", show(afe.value));
    println!("Π L(f)     {}", show(product));
    println!("X = {}, {} terms, tail bound {:.3e}", afe.x_cut, afe.terms, afe.tail_bound);
    println!("relative error {rel:.3e}: {}", verdict(rel < max_error));
    Ok(rel < max_error)
}

fn voronoi_check(cfg: &WorkbenchConfig, moduli: &[i64], centers: &[f64]) -> Result<bool> {
    let f = build_eigenform(cfg.k, cfg.n_max.max(20_000))?;
    let mut ok = true;
    for &center in centers {
        let w = TestWindow::gaussian(center, center / 4.0)?;
        for &modulus in moduli {
            let lhs = voronoi_lhs(&f, 1, modulus, &w)?;
            let rhs = voronoi_rhs(&f, 1, modulus, &w, &cfg.quadrature)?;
            let dev = (lhs - rhs.value).norm();
            let pass = rhs.decayed && dev <= 1e-8 * (1.0 + lhs.norm());
            ok &= pass;
            println!(
                "center {center:>6} c = {modulus}: lhs {}  |lhs − rhs| = {dev:.3e}  N = {}  {}",
                show(lhs),
                rhs.truncation,
                verdict(pass)
            );
        }
    }
    Ok(ok)
}

fn spectral_scaling(cfg: &WorkbenchConfig, scales: &[f64], max_variation: f64) -> Result<bool> {
    let mut ratios = Vec::new();
    for &t in scales {
        let spec = TestFunctionSpec::with_default_direction(t, cfg.theta, cfg.a0)?;
        let v = h_spectral_integral(&spec, &cfg.quadrature)?;
        let r = v / (t.powi(3) * spec.m * spec.m);
        println!("T = {t:>6}: ∬ h·spec = {v:.10e}, /(T³M²) = {r:.6e}");
        ratios.push(r);
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let variation = (hi - lo) / hi.abs();
    println!("variation {variation:.4}: {}", verdict(variation < max_variation));
    Ok(variation < max_variation)
}

fn kernels_decay(cfg: &WorkbenchConfig, factor: f64) -> Result<bool> {
    let spec = cfg.test_spec()?;
    let avg = KernelAverager::new(&spec, &cfg.quadrature)?;
    let mut ok = true;
    for (name, echo) in [("w4", w4_decay_echo(&avg, cfg.t)?), ("wl", wl_decay_echo(&avg, cfg.t)?)] {
        let pass = echo.decays_by(factor);
        ok &= pass;
        println!(
            "{name}: |Φ| = {:.6e} at {:.4}, {:.6e} at {:.4}, ratio {:.3e}  {}",
            echo.inner,
            echo.inner_scale,
            echo.outer,
            echo.outer_scale,
            echo.ratio(),
            verdict(pass)
        );
    }
    Ok(ok)
}

fn selftest(cfg: &WorkbenchConfig) -> Result<bool> {
    let mut ok = true;
    let mut check = |name: &str, pass: bool, detail: String| {
        println!("{} {name}: {detail}", verdict(pass));
        ok &= pass;
    };
    let f = build_eigenform(12, 1000)?;
    let (t2, t3) = (f.a(2).unwrap_or(0.0), f.a(3).unwrap_or(0.0));
    check("tau", t2 == -24.0 && t3 == 252.0, format!("τ(2) = {t2}, τ(3) = {t3}"));
    check("hecke", f.hecke_defect() < 1e-12, format!("defect {:.2e}", f.hecke_defect()));

    let direct = classical_kloosterman(3, 5, 7)?;
    let complete = gl3moment::kloosterman::complete_kloosterman(&KloostermanInput::new(1, 5, 2, 3, 1, 7)?)?;
    let dev = (direct - complete).norm();
    check("kloosterman", dev < 1e-9, format!("D₁ = 1 against S(3, 5; 7): {dev:.2e}"));

    let e = MinimalEisenstein::new(LanglandsParameter::from_imaginary(1.3, -0.4));
    let fac = factorization_check_min(&e, 200)?;
    check("eisenstein", fac < 1e-10, format!("factorization defect {fac:.2e}"));

    let r = gamma_ratio(cfg.k, &LanglandsParameter::from_imaginary(0.0, 0.0))?;
    check("gamma ratio", r == ComplexValue::new(1.0, 0.0), format!("{r} at μ = 0"));

    let dir = std::env::temp_dir().join(format!("gl3moment-selftest-{}", std::process::id()));
    let sums = KloostermanCache::new();
    sums.get_or_compute(SumKindKey::Complete, &KloostermanInput::new(1, 2, 3, 1, 2, 4)?)?;
    let form = load_or_build_form(&dir, 12, 200)?;
    let round = cache_roundtrip(&dir, &form, &sums);
    std::fs::remove_dir_all(&dir).ok();
    let detail = match &round {
        Ok(()) => "coefficients and sums read back unchanged".to_string(),
        Err(e) => e.to_string(),
    };
    check("caches", round.is_ok(), detail);
    Ok(ok)
}
