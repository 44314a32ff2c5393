use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::json;

use ordgeo::fld::{self, CoefMode, DimensionMode, DimensionParams, ReconstructConfig};
use ordgeo::hausdorff::{self, DiameterGauge, GreedyOptions, ScanOptions, ScanTarget};
use ordgeo::io::{self, Provenance};
use ordgeo::metrics::{self, AdmFunction, LpNorm};
use ordgeo::pipeline::{self, ExperimentConfig};
use ordgeo::sprinkle::{self, SprinkleConfig};
use ordgeo::{ConformalFactor, ModelSpacetime, OrderMode, OrderedMeasureSpace, SigmaMatrix, SigmaSource, WeightMode};

use crate::{Cli, Coef, Command, DimArgs, FName, Format, Gauge, LengthArgs, MetricName, Mode, ModelArgs, ModelKind, SigmaKind};

/// Bad argument combination; exits with the config code.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// A manifest rerun produced different bytes.
#[derive(Debug)]
pub struct Mismatch(pub Vec<String>);

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "rerun differs from the manifest in: {}", self.0.join(", "))
    }
}

impl std::error::Error for Mismatch {}

fn format_or(cli: &Cli, default: Format, allowed: &[Format]) -> Result<Format> {
    let f = cli.global.format.unwrap_or(default);
    if !allowed.contains(&f) {
        return Err(Usage(format!("--format {f:?} is not supported by this command")).into());
    }
    Ok(f)
}

fn out(cli: &Cli, file: &str) -> Result<PathBuf> {
    let dir = &cli.global.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| ordgeo::Error::Write { path: dir.clone(), source })?;
    let p = dir.join(file);
    log::info!("writing {}", p.display());
    Ok(p)
}

fn build_model(m: &ModelArgs) -> Result<ModelSpacetime> {
    let time = (m.time[0], m.time[1]);
    Ok(match m.model {
        ModelKind::Minkowski => ModelSpacetime::minkowski(m.dimension, m.extent, time)?,
        ModelKind::Conformal2d => {
            let factor = if m.omega_rate == 0.0 {
                ConformalFactor::Constant { scale: m.omega_scale }
            } else {
                ConformalFactor::ExpTime { scale: m.omega_scale, rate: m.omega_rate }
            };
            ModelSpacetime::conformal(factor, m.extent, time)?
        }
    })
}

fn load_space(path: &Path) -> Result<OrderedMeasureSpace> {
    io::load_oms(path).with_context(|| format!("loading {}", path.display()))
}

fn load_sigma(space: &OrderedMeasureSpace, path: &Path, source: SigmaSource) -> Result<SigmaMatrix> {
    io::read_sigma_lormat(space, path, source).with_context(|| format!("loading {}", path.display()))
}

fn dim_params(a: &DimArgs) -> DimensionParams {
    DimensionParams { k_min: a.k_min, k_max: a.k_max, n_pairs: a.n_pairs, balance_tol: a.balance_tol }
}

fn reconstruct_config(a: &LengthArgs, seed: u64) -> ReconstructConfig {
    ReconstructConfig {
        dimension: match a.dim {
            Some(value) => DimensionMode::Fixed { value },
            None => DimensionMode::Estimated { n_points: a.dim_points, seed },
        },
        coef_mode: match a.coef {
            Coef::SingleCone => CoefMode::SingleCone,
            Coef::DiamondExact => CoefMode::DiamondExact,
        },
        k_min: a.segment_k_min,
        dim_params: dim_params(&a.dim_params),
    }
}

fn order_mode(m: Mode) -> OrderMode {
    match m {
        Mode::Causal => OrderMode::Causal,
        Mode::Chrono => OrderMode::Chrono,
    }
}

fn index(space: &OrderedMeasureSpace, id: u64) -> Result<usize> {
    space.index_of(id).ok_or_else(|| Usage(format!("no point with id {id}")).into())
}

pub fn run(cli: &Cli) -> Result<()> {
    let seed = cli.global.seed;
    match &cli.command {
        Command::Sprinkle { model, density, n_points, unit_weights, closed } => {
            format_or(cli, Format::Json, &[Format::Json])?;
            let m = build_model(model)?;
            let cfg = match (density, n_points) {
                (Some(d), _) => SprinkleConfig::with_density(m, *d, seed),
                (None, Some(n)) => SprinkleConfig::with_points(m, *n, seed),
                (None, None) => return Err(Usage("set --density or --n-points".into()).into()),
            };
            let cfg = cfg.weight_mode(if *unit_weights { WeightMode::Unit } else { WeightMode::InverseDensity });
            let space = sprinkle::sprinkle(&cfg)?;
            log::info!("sprinkled {} points", space.len());
            io::save_oms(&space, &out(cli, "space.oms.json")?, *closed)?;
        }
        Command::Relate { space, mode, hasse } => {
            let f = format_or(cli, Format::Csv, &[Format::Csv, Format::Json])?;
            let space = load_space(space)?;
            let rel = space.relation(order_mode(*mode));
            let rel = if *hasse { rel.transitive_reduction()? } else { rel.clone() };
            let mut pairs: Vec<(u64, u64, usize)> =
                rel.pairs().map(|(i, j)| (space.id(i), space.id(j), space.interior_count(i, j))).collect();
            pairs.sort_unstable();
            match f {
                Format::Csv => {
                    let mut s = String::from("p_id,q_id,interior_count,provenance\n");
                    for (p, q, c) in &pairs {
                        let _ = writeln!(s, "{p},{q},{c},{}", Provenance::Exact.as_str());
                    }
                    io::write_file(&out(cli, "relation.csv")?, s.as_bytes())?;
                }
                _ => {
                    let rows: Vec<_> = pairs.iter().map(|(p, q, c)| json!({"p_id": p, "q_id": q, "interior_count": c})).collect();
                    let doc = json!({"mode": format!("{mode:?}").to_lowercase(), "hasse": hasse, "provenance": "exact", "pairs": rows});
                    io::write_json(&out(cli, "relation.json")?, &doc)?;
                }
            }
        }
        Command::Sigma { space, source, length, model } => {
            let f = format_or(cli, Format::Bin, &[Format::Bin, Format::Csv])?;
            let space = load_space(space)?;
            let sigma = match source {
                SigmaKind::Exact => SigmaMatrix::exact(&space, &build_model(model)?)?,
                SigmaKind::Reconstructed => fld::reconstruct_sigma(&space, &reconstruct_config(length, seed))?,
            };
            match f {
                Format::Bin => io::write_sigma_lormat(&space, &sigma, &out(cli, "sigma.lormat")?)?,
                _ => io::write_sigma_csv(&space, &sigma, &out(cli, "sigma.csv")?)?,
            }
        }
        Command::Dim { space, n_points, params } => {
            format_or(cli, Format::Json, &[Format::Json])?;
            let space = load_space(space)?;
            let est = fld::sample_dimensions(&space, &dim_params(params), *n_points, seed);
            io::write_dimension_json(&io::dimension_records(&space, &est), &out(cli, "dimension.json")?)?;
        }
        Command::Length { space, from, to, length } => {
            let f = format_or(cli, Format::Csv, &[Format::Csv, Format::Json])?;
            let space = load_space(space)?;
            let src = index(&space, *from)?;
            let targets: Vec<usize> = match to {
                Some(t) => vec![index(&space, *t)?],
                None => io::id_order(space.ids()).into_iter().filter(|&j| space.precedes(src, j, OrderMode::Causal)).collect(),
            };
            let row = fld::reconstruct_from(&space, src, &reconstruct_config(length, seed))?;
            let prov = Provenance::Estimate.as_str();
            match f {
                Format::Csv => {
                    let mut s = String::from("p_id,q_id,interior_count,length,provenance\n");
                    for &j in &targets {
                        let _ = writeln!(s, "{from},{},{},{},{prov}", space.id(j), space.interior_count(src, j), row[j]);
                    }
                    io::write_file(&out(cli, "length.csv")?, s.as_bytes())?;
                }
                _ => {
                    let rows: Vec<_> = targets
                        .iter()
                        .map(|&j| json!({"q_id": space.id(j), "interior_count": space.interior_count(src, j), "length": row[j]}))
                        .collect();
                    io::write_json(&out(cli, "length.json")?, &json!({"p_id": from, "provenance": prov, "targets": rows}))?;
                }
            }
        }
        Command::Measure { space, sigma, n_grid, deltas, gauge, min_sigma_fraction, threshold } => {
            let f = format_or(cli, Format::Csv, &[Format::Csv, Format::Json])?;
            let space = load_space(space)?;
            let sigma = load_sigma(&space, sigma, SigmaSource::Reconstructed)?;
            let target = ordgeo::bits::BitSet::full(space.len());
            let opts = ScanOptions {
                threshold: *threshold,
                greedy: GreedyOptions {
                    gauge: match gauge {
                        Gauge::Noldus => DiameterGauge::Noldus,
                        Gauge::SigmaProxy => DiameterGauge::SigmaProxy,
                    },
                    min_sigma_fraction: *min_sigma_fraction,
                    seed: Vec::new(),
                },
            };
            let scan = hausdorff::hausdorff_scan(
                &ScanTarget::Sample { space: &space, target: &target, sigma: &sigma, seed_region: None },
                n_grid,
                deltas,
                &opts,
            )?;
            match f {
                Format::Csv => io::write_scan_csv(&scan, &out(cli, "hausdorff_scan.csv")?)?,
                _ => io::write_json(&out(cli, "hausdorff_scan.json")?, &scan)?,
            }
        }
        Command::Metric { space, kind, sigma, f: fname, r, p } => {
            let f = format_or(cli, Format::Bin, &[Format::Bin, Format::Csv])?;
            let space = load_space(space)?;
            let need_sigma = || -> Result<SigmaMatrix> {
                let path = sigma.as_ref().ok_or_else(|| Usage("--sigma is required for this metric".into()))?;
                load_sigma(&space, path, SigmaSource::Reconstructed)
            };
            let (label, d, prov) = match kind {
                MetricName::Beem => ("beem".to_string(), metrics::beem_metric(&space), Provenance::Exact),
                MetricName::Lp => {
                    let func = match fname {
                        FName::ChiMinus => AdmFunction::ChiMinus,
                        FName::Abs => AdmFunction::Abs,
                        FName::Id => AdmFunction::Id,
                        FName::FR => AdmFunction::FR { r: *r },
                        FName::H => AdmFunction::H,
                    };
                    func.validate()?;
                    let norm: LpNorm = p.parse()?;
                    let s = need_sigma()?;
                    let d = metrics::lp_pullback(&s, space.weights(), func, norm)?;
                    let label: String = format!("lp_{}_{p}", func.label())
                        .chars()
                        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' })
                        .collect();
                    (label, d, Provenance::Estimate)
                }
                MetricName::Noldus => {
                    let s = need_sigma()?;
                    let all: Vec<usize> = (0..space.len()).collect();
                    ("noldus".to_string(), metrics::noldus_metric(&s, &all)?, Provenance::Estimate)
                }
            };
            match f {
                Format::Bin => io::write_distance_lormat(&space, &d, &out(cli, &format!("metric_{label}.lormat"))?)?,
                _ => io::write_distance_csv(&space, &d, prov, &out(cli, &format!("metric_{label}.csv"))?)?,
            }
        }
        Command::Ip { space, target, n_prefix, mode } => {
            format_or(cli, Format::Json, &[Format::Json])?;
            let space = load_space(space)?;
            let report = pipeline::ip_report(&space, target, *n_prefix, order_mode(*mode))?;
            io::write_json(&out(cli, "ip_report.json")?, &report)?;
        }
        Command::Validate { config, space, sigma } => {
            format_or(cli, Format::Json, &[Format::Json])?;
            if let Some(c) = config {
                let cfg = ExperimentConfig::load(c)?;
                cfg.check_dependencies()?;
                let stages: Vec<&str> = cfg.stages.iter().map(|s| s.name()).collect();
                io::write_json(&out(cli, "validate.json")?, &json!({"config": "ok", "stages": stages}))?;
                return Ok(());
            }
            let path = space.as_ref().ok_or_else(|| Usage("set --config or --space".into()))?;
            let sp = load_space(path)?;
            let mut doc = json!({
                "points": sp.len(),
                "causal_pairs": sp.causal().pair_count(),
                "chrono_pairs": sp.chrono().pair_count(),
                "chrono_in_causal": sp.chrono().is_subset(sp.causal()),
                "total_weight": sp.total_weight(),
            });
            let mut ok = sp.chrono().is_subset(sp.causal());
            if let Some(sp_path) = sigma {
                let s = load_sigma(&sp, sp_path, SigmaSource::User)?;
                let rep = sp.validate_alp(&s)?;
                ok &= rep.passed_structural();
                let ids = |v: &[(usize, usize)]| v.iter().map(|&(a, b)| [sp.id(a), sp.id(b)]).collect::<Vec<_>>();
                doc["sigma"] = json!({
                    "antisymmetry_count": rep.antisymmetry_count,
                    "antisymmetry": ids(&rep.antisymmetry),
                    "triangle_count": rep.triangle_count,
                    "triangle": rep.triangle.iter().map(|&(a, b, c)| [sp.id(a), sp.id(b), sp.id(c)]).collect::<Vec<_>>(),
                    "consistency_count": rep.consistency_count,
                    "consistency": ids(&rep.consistency),
                });
            }
            doc["passed"] = json!(ok);
            io::write_json(&out(cli, "validate.json")?, &doc)?;
            if !ok {
                anyhow::bail!("validation failed; see validate.json");
            }
        }
        Command::Compare { space, sigma, reference, min_count } => {
            format_or(cli, Format::Csv, &[Format::Csv])?;
            let space = load_space(space)?;
            let a = load_sigma(&space, sigma, SigmaSource::Reconstructed)?;
            let b = load_sigma(&space, reference, SigmaSource::ExactModel)?;
            let cmp = io::compare_sigma(&space, &a, &b, *min_count)?;
            io::write_comparison_csv(&cmp, &out(cli, "sigma_compare.csv")?)?;
            io::write_json(&out(cli, "sigma_compare.json")?, &cmp)?;
        }
        Command::Run { config, manifest } => {
            let dir = &cli.global.output_dir;
            if let Some(m) = manifest {
                let report = pipeline::rerun_manifest(m, dir)?;
                if !report.identical() {
                    return Err(Mismatch(report.mismatches).into());
                }
                log::info!("rerun reproduced {} outputs", report.manifest.outputs.len());
            } else {
                let path = config.as_ref().ok_or_else(|| Usage("set a config or --manifest".into()))?;
                let cfg = ExperimentConfig::load(path)?;
                let manifest = pipeline::run_pipeline(&cfg, dir)?;
                log::info!("wrote {} outputs", manifest.outputs.len());
            }
        }
    }
    Ok(())
}
