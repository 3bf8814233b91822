use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use bergman_core::asymptotics::{
    energy_localization_check, interface_profile_with, offdiag_decay_fit, rate_fit, short_time_gaussian_check,
    sublevel_volume,
};
use bergman_core::basis::build_basis_with;
use bergman_core::bfmodel::poisson_ratio_oracle;
use bergman_core::geometry::project_to_level_set;
use bergman_core::spectral::{make_kernel, partial_density_ratio, spectral_measure, tauberian_gap, KernelKind};
use bergman_core::toeplitz::{quantize, quantize_on, Quantization};
use bergman_core::{GeometryModel, HamiltonianSpec, ModelKind, Scaling, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, Stage};
use crate::output::{write_json, write_outputs, FileEntry, JsonFile, Table};

pub const MANIFEST_FILE: &str = "manifest.json";

// defects this large are accepted but worth a look
const DEFECT_WARNING: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizationRecord {
    pub k: usize,
    pub dim: usize,
    pub hermitian_defect: f64,
    pub eigen_residual: f64,
    /// Eigenvalues within the boundary tolerance of `energy`.
    pub boundary_modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub experiment: &'static str,
    pub config: ExperimentConfig,
    pub versions: BTreeMap<&'static str, &'static str>,
    /// Seconds per stage.
    pub wall_times: BTreeMap<&'static str, f64>,
    pub warnings: Vec<String>,
    pub quantizations: Vec<QuantizationRecord>,
    pub files: Vec<FileEntry>,
    pub summary: Value,
}

/// Everything an experiment produces before it is written.
#[derive(Debug, Default)]
pub struct Outputs {
    pub tables: Vec<Table>,
    pub json: Vec<JsonFile>,
    pub summary: Value,
    pub warnings: Vec<String>,
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    model: GeometryModel,
    h: HamiltonianSpec,
    rng: ChaCha8Rng,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest, CliError> {
    let mut wall_times = BTreeMap::new();
    let model = GeometryModel::new(cfg.model);
    let h = cfg.hamiltonian_spec();

    let start = Instant::now();
    // measures looks at one k only
    let ks: Vec<usize> = match cfg.experiment {
        Experiment::Measures => vec![*cfg.ks.last().unwrap()],
        _ => cfg.ks.clone(),
    };
    let quantized = quantize_all(cfg, &model, &h, &ks)?;
    wall_times.insert("quantize", start.elapsed().as_secs_f64());

    let start = Instant::now();
    let mut ctx = Context {
        cfg,
        model,
        h,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
    };
    let refs: Vec<&Quantization> = quantized.iter().collect();
    let mut out = match cfg.experiment {
        Experiment::Bulk => bulk(&mut ctx, &refs)?,
        Experiment::Interface => interface(&mut ctx, &refs)?,
        Experiment::Measures => measures(&mut ctx, refs[0])?,
        Experiment::Propagator => propagator(&mut ctx, &refs)?,
        Experiment::Localization => localization(&mut ctx, &refs)?,
        Experiment::Decay => decay(&mut ctx, &refs)?,
        Experiment::Oracle => oracle(&mut ctx, &refs)?,
    };
    wall_times.insert("evaluate", start.elapsed().as_secs_f64());
    if cfg.experiment == Experiment::Measures && cfg.ks.len() > 1 {
        out.warnings.insert(0, format!("measures uses only the largest k = {}", ks[0]));
    }

    let start = Instant::now();
    let (files, mut write_warnings) = write_outputs(&out.tables, &out.json, &cfg.output_dir)?;
    wall_times.insert("write", start.elapsed().as_secs_f64());

    let mut warnings = Vec::new();
    let mut records = Vec::new();
    for q in &quantized {
        let boundary = q.spectrum.boundary_modes(cfg.energy).len();
        if boundary > 0 && matches!(cfg.experiment, Experiment::Bulk | Experiment::Interface | Experiment::Oracle) {
            warnings.push(format!(
                "k = {}: {boundary} eigenvalue(s) within tolerance of E = {} counted below the threshold",
                q.k(),
                cfg.energy
            ));
        }
        if q.hermitian_defect > DEFECT_WARNING {
            warnings.push(format!("k = {}: quadrature hermitian defect {:e}", q.k(), q.hermitian_defect));
        }
        records.push(QuantizationRecord {
            k: q.k(),
            dim: q.spectrum.len(),
            hermitian_defect: q.hermitian_defect,
            eigen_residual: q.spectrum.residual,
            boundary_modes: boundary,
        });
    }
    warnings.append(&mut out.warnings);
    warnings.append(&mut write_warnings);

    let manifest = RunManifest {
        experiment: cfg.experiment.name(),
        config: cfg.clone(),
        versions: BTreeMap::from([
            ("bergman-lab", env!("CARGO_PKG_VERSION")),
            ("bergman-core", bergman_core::VERSION),
        ]),
        wall_times,
        warnings,
        quantizations: records,
        files,
        summary: out.summary,
    };
    write_json(&cfg.output_dir, MANIFEST_FILE, &manifest)?;
    Ok(manifest)
}

/// One quantization per k, each on its own thread.
fn quantize_all(
    cfg: &ExperimentConfig,
    model: &GeometryModel,
    h: &HamiltonianSpec,
    ks: &[usize],
) -> Result<Vec<Quantization>, CliError> {
    std::thread::scope(|s| {
        let handles: Vec<_> = ks
            .iter()
            .map(|&k| {
                s.spawn(move || {
                    let q = match cfg.quadrature {
                        Some(quad) => build_basis_with(model, k, cfg.truncation, quad.n_radial, quad.n_angular)
                            .and_then(|basis| quantize_on(model, h, basis, cfg.mode)),
                        None => quantize(model, h, k, cfg.truncation, cfg.mode),
                    };
                    q.stage(|| format!("quantize k = {k}"))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|t| t.join().expect("quantization thread panicked"))
            .collect()
    })
}

impl Context<'_> {
    fn sample_point(&mut self) -> C64 {
        let radius: f64 = match self.model.kind {
            ModelKind::BargmannFock => 2.0,
            ModelKind::FubiniStudyCp1 => 3.0,
        };
        let r = radius * self.rng.gen::<f64>().sqrt();
        C64::from_polar(r, 2.0 * PI * self.rng.gen::<f64>())
    }

    fn base_point(&mut self) -> C64 {
        match self.cfg.point {
            Some([re, im]) => C64::new(re, im),
            None => self.sample_point(),
        }
    }
}

fn point_json(z: C64) -> Value {
    json!([z.re, z.im])
}

fn bulk(ctx: &mut Context, qs: &[&Quantization]) -> Result<Outputs, CliError> {
    let e = ctx.cfg.energy;
    let points: Vec<C64> = match ctx.cfg.point {
        Some([re, im]) => vec![C64::new(re, im)],
        None => (0..ctx.cfg.points).map(|_| ctx.sample_point()).collect(),
    };
    let mut table = Table::new("bulk.csv", &["k", "re", "im", "h", "ratio", "indicator", "abs_error"]);
    let mut per_k = Vec::new();
    for q in qs {
        let mut worst = 0.0f64;
        for &z in &points {
            let hz = ctx.h.value(z);
            let ratio = partial_density_ratio(&q.spectrum, &q.basis, e, z)
                .stage(|| format!("partial density k = {}", q.k()))?
                .ratio;
            let indicator = if hz < e { 1.0 } else { 0.0 };
            let err = (ratio - indicator).abs();
            worst = worst.max(err);
            table.push(vec![q.k().into(), z.re.into(), z.im.into(), hz.into(), ratio.into(), indicator.into(), err.into()]);
        }
        per_k.push(json!({"k": q.k(), "max_abs_error": worst, "count_below": q.spectrum.count_below(e)}));
    }
    let mut summary = json!({"energy": e, "per_k": per_k});
    if ctx.model.volume().is_some() {
        let vol = sublevel_volume(&ctx.model, &ctx.h, e, 2000, 720).stage(|| "sublevel volume".into())?;
        summary["sublevel_volume"] = json!(vol);
        summary["weyl_fraction"] = json!(vol / ctx.model.volume().unwrap());
    }
    Ok(Outputs {
        tables: vec![table],
        summary,
        ..Outputs::default()
    })
}

fn interface(ctx: &mut Context, qs: &[&Quantization]) -> Result<Outputs, CliError> {
    let e = ctx.cfg.energy;
    let start = ctx.base_point();
    let z0 = project_to_level_set(&ctx.model, &ctx.h, start, e).stage(|| "project base point".into())?;
    let profile = interface_profile_with(&ctx.model, &ctx.h, e, z0, &ctx.cfg.betas, qs).stage(|| "interface profile".into())?;
    let mut table = Table::new("interface_profile.csv", &["k", "beta", "ratio", "target", "abs_error"]);
    for r in &profile.rows {
        table.push(vec![r.k.into(), r.beta.into(), r.ratio.into(), r.target.into(), r.abs_error.into()]);
    }
    let sup = profile.sup_errors();
    let mut out = Outputs {
        tables: vec![table],
        summary: json!({
            "z0": point_json(z0),
            "energy": e,
            "grad_norm": profile.grad_norm,
            "sup_errors": sup.iter().map(|(k, s)| json!({"k": k, "sup_error": s})).collect::<Vec<_>>(),
        }),
        ..Outputs::default()
    };
    match rate_fit(&sup) {
        Ok(fit) => {
            out.summary["rate_slope"] = json!(fit.slope);
            out.json.push(JsonFile {
                file: "rate_fit.json",
                value: serde_json::to_value(&fit).expect("rate fit serializes"),
            });
        }
        Err(err) => out.warnings.push(format!("no rate fit: {err}")),
    }
    Ok(out)
}

fn measures(ctx: &mut Context, q: &Quantization) -> Result<Outputs, CliError> {
    let z = ctx.base_point();
    let center = ctx.h.value(z);
    let k = q.k();
    let mut scalings = vec![Scaling::Unscaled, Scaling::Clt];
    if ctx.cfg.tau.is_some() {
        scalings.push(Scaling::Energy);
    }
    let mut table = Table::new("measures.csv", &["scaling", "location", "mass"]);
    let mut summary = json!({"k": k, "z": point_json(z), "center": center});
    for scaling in scalings {
        let m = spectral_measure(&q.spectrum, &q.basis, z, scaling, center, ctx.cfg.tau)
            .stage(|| format!("{} measure", scaling.name()))?;
        for &(x, w) in &m.atoms {
            table.push(vec![scaling.name().into(), x.into(), w.into()]);
        }
        summary[scaling.name()] = json!({"total_mass": m.total_mass()});
        if scaling == Scaling::Clt {
            let w = make_kernel(KernelKind::Fejer, 1.0 / (k as f64).sqrt()).stage(|| "smoothing kernel".into())?;
            summary["clt"]["tauberian_gap"] = json!(tauberian_gap(&m, &w) / m.total_mass());
        }
    }
    Ok(Outputs {
        tables: vec![table],
        summary,
        ..Outputs::default()
    })
}

fn propagator(ctx: &mut Context, qs: &[&Quantization]) -> Result<Outputs, CliError> {
    let z = ctx.base_point();
    let mut table = Table::new("propagator.csv", &["k", "tau", "modulus", "predicted", "rel_error"]);
    let mut per_k = Vec::new();
    for q in qs {
        let report =
            short_time_gaussian_check(q, &ctx.model, &ctx.h, z, &ctx.cfg.taus).stage(|| format!("propagator k = {}", q.k()))?;
        for r in &report.rows {
            table.push(vec![r.k.into(), r.tau.into(), r.modulus.into(), r.predicted.into(), r.rel_error.into()]);
        }
        per_k.push(json!({"k": q.k(), "max_rel_error": report.max_rel_error}));
    }
    Ok(Outputs {
        tables: vec![table],
        summary: json!({"z": point_json(z), "per_k": per_k}),
        ..Outputs::default()
    })
}

fn localization(ctx: &mut Context, qs: &[&Quantization]) -> Result<Outputs, CliError> {
    let z = ctx.base_point();
    let s = ctx.cfg.smoothing;
    let mut table = Table::new("localization.csv", &["k", "alpha", "measured", "predicted", "ratio"]);
    for q in qs {
        for &alpha in &ctx.cfg.alphas {
            let r = energy_localization_check(q, &ctx.model, &ctx.h, z, alpha, s.kind, s.epsilon)
                .stage(|| format!("localization k = {}", q.k()))?;
            table.push(vec![r.k.into(), r.alpha.into(), r.measured.into(), r.predicted.into(), r.ratio.into()]);
        }
    }
    Ok(Outputs {
        tables: vec![table],
        summary: json!({"z": point_json(z), "epsilon": s.epsilon}),
        ..Outputs::default()
    })
}

// pairs at geodesic distance inside the fitting window
fn sample_pairs(ctx: &mut Context) -> Result<Vec<(C64, C64)>, CliError> {
    let z = ctx.base_point();
    let mut pairs = Vec::with_capacity(ctx.cfg.pairs);
    for _ in 0..100_000 {
        if pairs.len() == ctx.cfg.pairs {
            break;
        }
        let w = z + C64::from_polar(ctx.rng.gen_range(0.05..1.0), 2.0 * PI * ctx.rng.gen::<f64>());
        if (0.15..=0.9).contains(&ctx.model.distance(z, w)) {
            pairs.push((z, w));
        }
    }
    if pairs.len() < ctx.cfg.pairs {
        return Err(CliError::Config {
            field: "point".into(),
            message: "no partners found at distance 0.15..0.9".into(),
        });
    }
    Ok(pairs)
}

fn decay(ctx: &mut Context, qs: &[&Quantization]) -> Result<Outputs, CliError> {
    let pairs = sample_pairs(ctx)?;
    let fit = offdiag_decay_fit(&ctx.model, qs, &pairs).stage(|| "decay fit".into())?;
    let mut table = Table::new("decay.csv", &["k", "dist", "log_modulus"]);
    for r in &fit.rows {
        table.push(vec![r.k.into(), r.dist.into(), r.log_modulus.into()]);
    }
    let value = json!({"beta_hat": fit.beta_hat, "intercept": fit.intercept, "r_squared": fit.r_squared});
    Ok(Outputs {
        tables: vec![table],
        json: vec![JsonFile {
            file: "decay_fit.json",
            value: value.clone(),
        }],
        summary: json!({"z": point_json(pairs[0].0), "fit": value}),
        ..Outputs::default()
    })
}

fn oracle(ctx: &mut Context, qs: &[&Quantization]) -> Result<Outputs, CliError> {
    let e = ctx.cfg.energy;
    let mut table = Table::new("oracle_vs_pipeline.csv", &["k", "u", "r2", "pipeline", "oracle", "abs_deviation"]);
    let mut warnings = Vec::new();
    let mut worst = 0.0f64;
    for q in qs {
        let k = q.k();
        for &u in &ctx.cfg.betas {
            // |z|² = E(1 + u/√k)
            let r2 = e * (1.0 + u / (k as f64).sqrt());
            if r2 < 0.0 {
                warnings.push(format!("k = {k}, u = {u}: |z|^2 < 0, row skipped"));
                continue;
            }
            let z = C64::new(r2.sqrt(), 0.0);
            let pipeline = partial_density_ratio(&q.spectrum, &q.basis, e, z)
                .stage(|| format!("partial density k = {k}"))?
                .ratio;
            let exact = poisson_ratio_oracle(k, e, z);
            let dev = (pipeline - exact).abs();
            worst = worst.max(dev);
            table.push(vec![k.into(), u.into(), r2.into(), pipeline.into(), exact.into(), dev.into()]);
        }
    }
    Ok(Outputs {
        tables: vec![table],
        summary: json!({"max_abs_deviation": worst}),
        warnings,
        ..Outputs::default()
    })
}
