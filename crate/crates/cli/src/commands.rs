use crate::config::*;
use illposed::condensates::{
    fit_condensates, synth_dataset, CondensateFit, CondensateProblem, Condensates, Contour,
    CorrelationLine, Interval, TailConfig,
};
use illposed::eit::{
    crossing_index, crossing_lambda, harmonic_part, linear_system, reconstruct_with,
    simulate_dataset, single_recon_phi, single_recon_y, trig_patterns, BumpConductivity,
    ConductivityField, DiscEigenbasis, DiscMesh, Phi0Mode, Raster,
};
use illposed::fredholm::SampledKernel;
use illposed::io;
use illposed::regcore::{
    apply_operator, choose_lambda, lambda_sweep, log_grid, svd_of_kernel, LambdaStrategy,
};
use illposed::specfun::disc_quadrature;
use illposed::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Relative paths in a config resolve against the config file's directory.
pub struct Context {
    pub base: PathBuf,
    pub out: PathBuf,
}

impl Context {
    fn input(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn output(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

#[derive(Serialize)]
struct Recommendation {
    strategy: &'static str,
    lambda: Option<f64>,
    discrepancy: Option<f64>,
    energy: Option<f64>,
    iterations: Option<usize>,
    error: Option<String>,
}

struct RegProblemData {
    kernel: SampledKernel,
    g: Vec<f64>,
    epsilon: Option<f64>,
    energy: Option<f64>,
}

fn min_kernel_problem(points: usize, noise: f64, seed: u64) -> Result<RegProblemData> {
    if points < 2 || !(noise >= 0.0) {
        return Err(Error::Parameter(
            "min-kernel demo needs ≥ 2 points and noise ≥ 0".into(),
        ));
    }
    let h = 1.0 / points as f64;
    let nodes: Vec<f64> = (0..points).map(|i| (i as f64 + 0.5) * h).collect();
    let values = nalgebra::DMatrix::from_fn(points, points, |i, j| nodes[i].min(nodes[j]));
    let kernel = SampledKernel::new(values, nodes.clone(), vec![h; points])?;
    let f: Vec<f64> = nodes.iter().map(|t| t * (1.0 - t)).collect();
    let exact = apply_operator(&kernel.values, &kernel.weights, &f);
    let rms = (exact.iter().map(|v| v * v).sum::<f64>() / points as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let errors: Vec<f64> = (0..points)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            noise * rms * z
        })
        .collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x * h).sum::<f64>().sqrt();
    let g = exact.iter().zip(&errors).map(|(a, e)| a + e).collect();
    let epsilon = if noise > 0.0 {
        Some(norm(&errors))
    } else {
        None
    };
    Ok(RegProblemData {
        kernel,
        g,
        epsilon,
        energy: Some(norm(&f)),
    })
}

pub fn reg_sweep(cfg: &RegSweepConfig, ctx: &Context) -> Result<()> {
    if cfg.lambda_points == 0 {
        return Err(Error::Parameter("lambda grid is empty".into()));
    }
    if !(cfg.lambda_lo > 0.0 && cfg.lambda_hi >= cfg.lambda_lo) {
        return Err(Error::Parameter(
            "lambda grid needs 0 < lambda_lo ≤ lambda_hi".into(),
        ));
    }
    let p = match &cfg.problem {
        RegProblem::MinKernel { points, noise } => min_kernel_problem(*points, *noise, cfg.seed)?,
        RegProblem::Files { kernel, grid, data } => {
            let k = io::read_sampled_kernel(&ctx.input(kernel), &ctx.input(grid))?;
            let g = io::read_column_csv(&ctx.input(data), "g")?;
            RegProblemData {
                kernel: k,
                g,
                epsilon: None,
                energy: None,
            }
        }
    };
    let epsilon = cfg.epsilon.or(p.epsilon);
    let energy = cfg.energy_bound.or(p.energy);
    let svd = svd_of_kernel(&p.kernel.values, &p.kernel.weights, &p.kernel.weights)?;
    let grid = log_grid(cfg.lambda_lo, cfg.lambda_hi, cfg.lambda_points);
    let rows = lambda_sweep(&svd, &p.g, &grid)?;
    io::write_sweep_csv(&ctx.output("sweep.csv"), &rows)?;

    let missing = |what: &str| Error::Parameter(format!("{what} is required for this problem"));
    let strategies: [(&'static str, Result<LambdaStrategy>); 4] = [
        (
            "discrepancy",
            epsilon
                .map(|epsilon| LambdaStrategy::Discrepancy { epsilon })
                .ok_or_else(|| missing("epsilon")),
        ),
        (
            "energy",
            energy
                .map(|bound| LambdaStrategy::Energy { bound })
                .ok_or_else(|| missing("energy_bound")),
        ),
        (
            "miller",
            epsilon
                .zip(energy)
                .map(|(epsilon, bound)| LambdaStrategy::Miller { epsilon, bound })
                .ok_or_else(|| missing("epsilon and energy_bound")),
        ),
        ("l_curve", Ok(LambdaStrategy::LCurve { grid: grid.clone() })),
    ];
    let mut report = Vec::new();
    for (name, strategy) in strategies {
        let choice = strategy.and_then(|s| choose_lambda(&svd, &p.g, &s));
        report.push(match choice {
            Ok(c) => Recommendation {
                strategy: name,
                lambda: Some(c.lambda),
                discrepancy: Some(c.discrepancy),
                energy: Some(c.energy),
                iterations: Some(c.iterations),
                error: None,
            },
            Err(e) => {
                log::warn!("{name}: {e}");
                Recommendation {
                    strategy: name,
                    lambda: None,
                    discrepancy: None,
                    energy: None,
                    iterations: None,
                    error: Some(e.to_string()),
                }
            }
        });
    }
    io::write_json(&ctx.output("lambda_choices.json"), &report)
}

fn build_mesh(spec: &MeshSpec, ctx: &Context) -> Result<DiscMesh> {
    match spec {
        MeshSpec::Rings { rings } => DiscMesh::rings(*rings),
        MeshSpec::Triangles { target } => DiscMesh::with_triangles(*target),
        MeshSpec::Files { nodes, triangles } => {
            io::read_mesh_csv(&ctx.input(nodes), &ctx.input(triangles))
        }
    }
}

fn conductivity_on(
    spec: &ConductivitySpec,
    mesh: &DiscMesh,
    ctx: &Context,
) -> Result<ConductivityField> {
    let bumps = match spec {
        ConductivitySpec::Preset { name } => match name {
            Preset::Homogeneous => BumpConductivity::homogeneous(),
            Preset::HighInclusion => BumpConductivity::high_inclusion(),
            Preset::LowInclusion => BumpConductivity::low_inclusion(),
            Preset::ThreeInclusions => BumpConductivity::three_inclusions(),
        },
        ConductivitySpec::Bumps { bumps } => BumpConductivity {
            bumps: bumps.clone(),
        },
        ConductivitySpec::Field { path } => {
            let path = ctx.input(path);
            let (points, values) = io::read_field_csv(&path)?;
            let matches = points.len() == mesh.nodes.len()
                && points
                    .iter()
                    .zip(&mesh.nodes)
                    .all(|(p, q)| (p[0] - q[0]).abs() < 1e-9 && (p[1] - q[1]).abs() < 1e-9);
            if !matches {
                return Err(Error::Data(format!(
                    "{}: field points do not match the mesh nodes",
                    path.display()
                )));
            }
            return ConductivityField::new(values);
        }
    };
    bumps.on_mesh(mesh)
}

pub fn eit_forward(cfg: &EitForwardConfig, ctx: &Context) -> Result<()> {
    if cfg.max_harmonic == 0 {
        return Err(Error::Parameter("max_harmonic must be ≥ 1".into()));
    }
    let mesh = build_mesh(&cfg.mesh, ctx)?;
    let sigma = conductivity_on(&cfg.conductivity, &mesh, ctx)?;
    let dataset = simulate_dataset(
        &mesh,
        &sigma,
        cfg.electrodes,
        &trig_patterns(cfg.max_harmonic),
    )?;
    let dataset = if cfg.noise > 0.0 {
        dataset.with_noise(cfg.noise, cfg.seed)?
    } else {
        dataset
    };
    io::write_electrode_dataset(&ctx.output("dataset.json"), &dataset)?;
    io::write_mesh_csv(
        &ctx.output("mesh_nodes.csv"),
        &ctx.output("mesh_triangles.csv"),
        &mesh,
    )?;
    io::write_field_csv(&ctx.output("conductivity.csv"), &mesh.nodes, sigma.values())
}

#[derive(Serialize)]
struct NoisyField {
    level: f64,
    lambda: f64,
    modes_used: usize,
    file: String,
}

#[derive(Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
enum ReconDiagnostics {
    Linear {
        quantity: &'static str,
        lambda: f64,
        modes_used: usize,
        rank: usize,
        crossing_index: Option<usize>,
        noisy: Vec<NoisyField>,
    },
    Single {
        quantity: &'static str,
        excitation: usize,
        l_max: u32,
        m_max: usize,
    },
}

pub fn eit_recon(cfg: &EitReconConfig, ctx: &Context) -> Result<()> {
    if cfg.raster < 2 {
        return Err(Error::Parameter(
            "raster needs at least 2 points per side".into(),
        ));
    }
    let dataset = io::read_electrode_dataset(&ctx.input(&cfg.dataset))?;
    let diagnostics = match &cfg.recon {
        ReconMode::Linear {
            lambda,
            crossing,
            n_test,
            quadrature,
            reference,
            noise_levels,
        } => {
            let phi0 = match reference {
                Some(p) => Phi0Mode::MeasuredReference(io::read_electrode_dataset(&ctx.input(p))?),
                None => Phi0Mode::Analytic,
            };
            let grid = quadrature_of(*quadrature)?;
            let system = linear_system(&dataset, &grid, *n_test, &phi0)?;
            let svd = system.svd()?;
            let cutoff = if *crossing {
                crossing_lambda(&system, &svd, *lambda)?
            } else {
                *lambda
            };
            let rec = reconstruct_with(&system, &svd, cutoff)?;
            // The solution is only determined at the quadrature nodes, so the
            // field is written there rather than on a raster.
            let points: Vec<[f64; 2]> = grid
                .r
                .iter()
                .zip(&grid.theta)
                .map(|(r, t)| [r * t.cos(), r * t.sin()])
                .collect();
            let write_sigma = |name: &str, ln_sigma: &[f64]| {
                let sigma: Vec<f64> = ln_sigma.iter().map(|v| v.exp()).collect();
                io::write_field_csv(&ctx.output(name), &points, &sigma)
            };
            write_sigma("field.csv", &rec.ln_sigma)?;
            let rows = (0..rec.singular_values.len())
                .map(|j| vec![j as f64, rec.singular_values[j], rec.components[j]])
                .collect();
            io::write_table_csv(
                &ctx.output("crossing.csv"),
                &io::Table::new(&["index", "sigma", "component"], rows),
            )?;
            let mut noisy = Vec::new();
            for (k, &level) in noise_levels.iter().enumerate() {
                let sys = system.with_noise(level, cfg.seed.wrapping_add(k as u64))?;
                let cut = if *crossing {
                    crossing_lambda(&sys, &svd, *lambda)?
                } else {
                    *lambda
                };
                let r = reconstruct_with(&sys, &svd, cut)?;
                let file = format!("field_noise{k}.csv");
                write_sigma(&file, &r.ln_sigma)?;
                noisy.push(NoisyField {
                    level,
                    lambda: cut,
                    modes_used: r.modes_used,
                    file,
                });
            }
            ReconDiagnostics::Linear {
                quantity: "sigma",
                lambda: cutoff,
                modes_used: rec.modes_used,
                rank: rec.singular_values.len(),
                crossing_index: crossing_index(&rec.singular_values, &rec.components),
                noisy,
            }
        }
        ReconMode::Single {
            excitation,
            l_max,
            m_max,
            field,
            quadrature,
        } => {
            let basis = DiscEigenbasis::new(*l_max, *m_max)?;
            let y = single_recon_y(&dataset, *excitation, &basis, *l_max, *m_max)?;
            let raster = match field {
                SingleField::Y => {
                    Raster::from_fn(cfg.raster, |x, yy| y.eval(x.hypot(yy), yy.atan2(x)))
                }
                SingleField::Phi => {
                    let quad = quadrature_of(*quadrature)?;
                    let psi = harmonic_part(&dataset, *excitation, *l_max)?;
                    let n = cfg.raster;
                    let inside: Vec<usize> = (0..n * n)
                        .filter(|&k| Raster::coord(n, k % n).hypot(Raster::coord(n, k / n)) <= 1.0)
                        .collect();
                    let points: Vec<(f64, f64)> = inside
                        .iter()
                        .map(|&k| {
                            let (x, yy) = (Raster::coord(n, k % n), Raster::coord(n, k / n));
                            (x.hypot(yy), yy.atan2(x))
                        })
                        .collect();
                    let phi = single_recon_phi(&y.sample(&quad), &psi, &quad, &points)?;
                    let mut values = vec![f64::NAN; n * n];
                    for (&k, v) in inside.iter().zip(phi) {
                        values[k] = v;
                    }
                    Raster { n, values }
                }
            };
            io::write_raster_csv(&ctx.output("field.csv"), &raster)?;
            ReconDiagnostics::Single {
                quantity: match field {
                    SingleField::Y => "y",
                    SingleField::Phi => "phi",
                },
                excitation: *excitation,
                l_max: *l_max,
                m_max: *m_max,
            }
        }
    };
    io::write_json(&ctx.output("diagnostics.json"), &diagnostics)
}

fn quadrature_of([n_r, n_theta]: [usize; 2]) -> Result<illposed::specfun::DiscQuadrature> {
    if n_r == 0 || n_theta == 0 {
        return Err(Error::Parameter("quadrature orders must be ≥ 1".into()));
    }
    Ok(disc_quadrature(n_r, n_theta))
}

/// Fit summary; the surface goes to its own CSV.
#[derive(Serialize)]
struct FitReport<'a> {
    dims: &'a [u32],
    best: &'a Condensates,
    chi_l_min: f64,
    mu_opt: f64,
    chi_exp: f64,
    on_boundary: bool,
    intervals: &'a [Interval],
    contours: &'a [Contour],
    correlation: Option<&'a CorrelationLine>,
}

pub fn cond_fit(cfg: &CondFitConfig, ctx: &Context) -> Result<()> {
    let dataset = match &cfg.data {
        SpectralSource::Synth(spec) => synth_dataset(spec, &cfg.model, &cfg.corridor)?.dataset,
        SpectralSource::Files { values, covariance } => {
            io::read_spectral_dataset(&ctx.input(values), &ctx.input(covariance))?
        }
    };
    let tail = TailConfig {
        s_max: dataset.upper_edge(),
        z_cut: cfg.z_cut,
    };
    let problem = CondensateProblem::with_tail(&dataset, &cfg.model, &cfg.corridor, tail)?;
    let fit: CondensateFit = fit_condensates(&problem, &cfg.grid)?;
    let dims: Vec<u32> = fit.axes.iter().map(|a| a.dim).collect();
    let report = FitReport {
        dims: &dims,
        best: &fit.best,
        chi_l_min: fit.chi_l_min,
        mu_opt: fit.mu_opt,
        chi_exp: problem.chi_exp(),
        on_boundary: fit.on_boundary,
        intervals: &fit.intervals,
        contours: &fit.contours,
        correlation: fit.correlation.as_ref(),
    };
    io::write_json(&ctx.output("fit.json"), &report)?;
    io::write_surface_csv(&ctx.output("surface.csv"), &dims, &fit.surface)
}

pub fn cond_synth(cfg: &CondSynthConfig, ctx: &Context) -> Result<()> {
    let out = synth_dataset(&cfg.synth, &cfg.model, &cfg.corridor)?;
    let d = &out.dataset;
    io::write_spectral_dataset(
        &ctx.output("spectral_values.csv"),
        &ctx.output("spectral_covariance.csv"),
        d,
    )?;
    let rows =
        d.s.iter()
            .zip(&out.truth)
            .map(|(&s, &f)| vec![s, f])
            .collect();
    io::write_table_csv(&ctx.output("truth.csv"), &io::Table::new(&["s", "f"], rows))
}
