//! One pipeline per experiment kind.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use qhlab_core::domain::{distance_to_boundary, rasterize, rotational_slice, smooth_distance};
use qhlab_core::elliptic::{discretize, principal_eigenvalue_with, EigenOptions};
use qhlab_core::green::disk_green;
use qhlab_core::io::{Heatmap, Scale};
use qhlab_core::metric::{build_metric_graph, build_phi_chain, four_point_delta, uniformity_constant};
use qhlab_core::potential::{
    bhi_experiment, decay_fit, geodesic_triples, green_multiplicativity, harnack_constant, martin_sequence,
    poisson_kernel_disk, reduit_with, relative_max_principle_rate, DecayMetric,
};
use qhlab_core::{DiscreteOperator, DomainSpec, GreenOracle, GridDomain, MetricGraph, NodeSet, OperatorSpec, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::acceptance;
use crate::config::{DecayDistance, Experiment, ExperimentConfig, UniformGeometry};
use crate::RunError;

/// `j_{0,1}`, first zero of the Bessel function `J_0`.
pub const BESSEL_J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// Wall-clock time of each pipeline stage.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Stages(pub Vec<StageTiming>);

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

impl Stages {
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.push(StageTiming {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }
}

/// Flat table written as `probes.csv`.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

fn s(v: impl ToString) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub struct ExperimentOutput {
    pub report: Value,
    pub table: Table,
    pub heatmaps: Vec<(String, Heatmap)>,
    /// Verdict for experiments that check something (acceptance).
    pub passed: Option<bool>,
}

impl ExperimentOutput {
    fn new(report: Value, table: Table) -> Self {
        ExperimentOutput {
            report,
            table,
            heatmaps: Vec::new(),
            passed: None,
        }
    }

    fn heatmap(mut self, stem: &str, map: Heatmap) -> Self {
        self.heatmaps.push((stem.to_string(), map));
        self
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize to JSON")
}

struct Setup {
    grid: Arc<GridDomain>,
    op: DiscreteOperator,
}

impl Setup {
    fn oracle(&self) -> GreenOracle {
        GreenOracle::new(self.op.clone())
    }

    fn node(&self, p: Point) -> usize {
        self.grid.nearest_node(p)
    }

    fn graph(&self) -> MetricGraph {
        let field = Arc::new(distance_to_boundary(&self.grid));
        build_metric_graph(&self.grid, &field)
    }

    fn with_spectrum(&mut self) -> Result<(), RunError> {
        let (info, _) = principal_eigenvalue_with(&self.op, 1e-8, EigenOptions::default())?;
        self.op = self.op.clone().with_spectral(info);
        Ok(())
    }
}

fn is_laplacian(spec: &OperatorSpec) -> bool {
    OperatorSpec {
        adaptedness_k: spec.adaptedness_k,
        mode: spec.mode,
        ..OperatorSpec::laplacian()
    } == *spec
}

fn field_table(grid: &GridDomain, values: &[f64], name: &'static str) -> Table {
    let mut t = Table::new(&["node", "x", "y", name]);
    for (i, v) in values.iter().enumerate() {
        let p = grid.point(i);
        t.push(vec![s(i), s(p.x), s(p.y), s(v)]);
    }
    t
}

/// Execute the pipeline of `config`, recording stage timings.
pub fn execute(config: &ExperimentConfig, stages: &mut Stages) -> Result<ExperimentOutput, RunError> {
    if let Experiment::Accept { quick } = config.experiment {
        let report = stages.time("acceptance", || acceptance::run(quick));
        let mut table = Table::new(&["id", "name", "status", "measured", "runtime_s", "limit_s"]);
        for c in &report.criteria {
            table.push(vec![
                s(c.id),
                s(&c.name),
                s(c.status.label()),
                s(&c.measured),
                s(c.runtime_s),
                s(c.limit_s),
            ]);
        }
        let passed = report.all_passed();
        let mut out = ExperimentOutput::new(to_value(&report), table);
        out.passed = Some(passed);
        return Ok(out);
    }

    let mut setup = stages.time("discretize", || -> Result<Setup, RunError> {
        let grid = Arc::new(rasterize(&config.domain, config.h)?);
        let op = discretize(&config.operator, &grid)?;
        Ok(Setup { grid, op })
    })?;
    let grid = setup.grid.clone();
    let seed = config.seed;

    let out = match &config.experiment {
        Experiment::Green { pole, pole_clearance } => stages.time("solve", || -> Result<_, RunError> {
            let oracle = setup.oracle();
            let y = setup.node(*pole);
            let col = oracle.column(y)?;
            let reference = matches!(config.domain, DomainSpec::UnitDisk) && is_laplacian(&config.operator);
            let yp = grid.point(y);
            let mut table = Table::new(&["node", "x", "y", "green", "reference", "relative_error"]);
            let mut worst: Option<f64> = None;
            for i in 0..grid.interior_count() {
                let p = grid.point(i);
                let r = reference.then(|| disk_green(p, yp));
                let err = r.map(|r| (col[i] - r).abs() / r);
                if let Some(e) = err {
                    if p.dist(yp) > *pole_clearance {
                        worst = Some(worst.unwrap_or(0.0).max(e));
                    }
                }
                table.push(vec![s(i), s(p.x), s(p.y), s(col[i]), opt(r), opt(err)]);
            }
            let report = json!({
                "pole": y,
                "pole_point": yp,
                "nodes": grid.interior_count(),
                "solver": format!("{:?}", oracle.solver_kind()),
                "max_relative_error": worst,
                "pole_clearance": pole_clearance,
            });
            Ok(ExperimentOutput::new(report, table)
                .heatmap("green", Heatmap::from_field(&grid, &col.values, Scale::Log)?))
        })?,

        Experiment::Eig { tol } => stages.time("solve", || -> Result<_, RunError> {
            let (info, phi) = principal_eigenvalue_with(&setup.op, *tol, EigenOptions::default())?;
            let reference = if is_laplacian(&config.operator) {
                match config.domain {
                    DomainSpec::Square { side } => Some(2.0 * PI * PI / (side * side)),
                    DomainSpec::UnitDisk => Some(BESSEL_J0_FIRST_ZERO * BESSEL_J0_FIRST_ZERO),
                    _ => None,
                }
            } else {
                None
            };
            let report = json!({
                "spectral": info,
                "tau_estimate": info.tau_estimate,
                "reference": reference,
                "relative_error": reference.map(|r| (info.tau_estimate - r).abs() / r),
            });
            Ok(ExperimentOutput::new(report, field_table(&grid, &phi, "eigenvector"))
                .heatmap("eigenvector", Heatmap::from_field(&grid, &phi, Scale::Linear)?))
        })?,

        Experiment::Resolvent { t, probes } => {
            stages.time("eigenvalue", || setup.with_spectrum())?;
            stages.time("solve", || -> Result<_, RunError> {
                let oracle = setup.oracle();
                let theta = setup.op.spectral().map(|i| i.theta).unwrap_or(0.0);
                let t = t.unwrap_or(theta);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let n = grid.interior_count();
                let pairs: Vec<(usize, usize)> = (0..*probes)
                    .map(|_| loop {
                        let (x, y) = (rng.random_range(0..n), rng.random_range(0..n));
                        if x != y {
                            break (x, y);
                        }
                    })
                    .collect();
                let report = qhlab_core::green::verify_resolvent(&oracle, t, &pairs)?;
                let mut table = Table::new(&["x", "y", "g", "g_t", "composition", "residual", "monotone", "bounded"]);
                for p in &report.probes {
                    table.push(vec![
                        s(p.x),
                        s(p.y),
                        s(p.g),
                        s(p.g_t),
                        s(p.composition),
                        s(p.residual),
                        s(p.monotone),
                        s(p.composition_bounded),
                    ]);
                }
                Ok(ExperimentOutput::new(to_value(&report), table))
            })?
        }

        Experiment::Harnack { center, radius, trials } => stages.time("solve", || -> Result<_, RunError> {
            let oracle = setup.oracle();
            let report = harnack_constant(&oracle, setup.node(*center), *radius, *trials, seed)?;
            let mut table = Table::new(&["trial", "running_max"]);
            for (k, v) in report.history.iter().enumerate() {
                table.push(vec![s(k), s(v)]);
            }
            Ok(ExperimentOutput::new(to_value(&report), table))
        })?,

        Experiment::Rmp {
            center,
            pole,
            radii,
            theta,
        } => {
            stages.time("eigenvalue", || setup.with_spectrum())?;
            stages.time("solve", || -> Result<_, RunError> {
                let oracle = setup.oracle();
                let report =
                    relative_max_principle_rate(&oracle, *theta, setup.node(*center), setup.node(*pole), radii)?;
                let mut table = Table::new(&["radius", "q"]);
                for (r, q) in report.radii.iter().zip(&report.q) {
                    table.push(vec![s(r), s(q)]);
                }
                Ok(ExperimentOutput::new(to_value(&report), table))
            })?
        }

        Experiment::Delta { samples, smoothed } => stages.time("metric", || -> Result<_, RunError> {
            let exact = distance_to_boundary(&grid);
            let field = if *smoothed {
                smooth_distance(&grid, &exact, 0.25)?
            } else {
                exact
            };
            let field = Arc::new(field);
            let graph = build_metric_graph(&grid, &field);
            let est = four_point_delta(graph.graph(), *samples, seed)?;
            let mut table = Table::new(&["witness", "node", "x", "y"]);
            for (k, &w) in est.witness.iter().enumerate() {
                let p = grid.point(w);
                table.push(vec![s(k), s(w), s(p.x), s(p.y)]);
            }
            Ok(ExperimentOutput::new(to_value(&est), table)
                .heatmap("distance", Heatmap::from_field(&grid, &field.values, Scale::Linear)?))
        })?,

        Experiment::Uniform {
            axis_pairs,
            pairs,
            geometry,
        } => stages.time("metric", || -> Result<_, RunError> {
            let (g, graph) = match geometry {
                UniformGeometry::Planar => (grid.clone(), setup.graph()),
                UniformGeometry::RotationalSlice => {
                    let (g, field) = rotational_slice(&config.domain, config.h)?;
                    let graph = build_metric_graph(&g, &field);
                    (g, graph)
                }
            };
            let mut points: Vec<[Point; 2]> = axis_pairs
                .iter()
                .map(|&k| [Point::new(0.0, k), Point::new(0.0, -k)])
                .collect();
            points.extend(pairs.iter().copied());
            let mut table = Table::new(&["pair", "px", "py", "qx", "qy", "length_ratio", "cigar_ratio", "c_pair"]);
            let mut per_pair = Vec::new();
            for (k, [p, q]) in points.iter().enumerate() {
                let (a, b) = (g.nearest_node(*p), g.nearest_node(*q));
                let r = uniformity_constant(&graph, &[(a, b)])?;
                let smp = &r.pair_samples[0];
                table.push(vec![
                    s(k),
                    s(p.x),
                    s(p.y),
                    s(q.x),
                    s(q.y),
                    s(smp.length_ratio),
                    s(smp.cigar_ratio),
                    s(smp.c_pair),
                ]);
                per_pair.push(r.c_estimate);
            }
            let overall = per_pair.iter().copied().fold(0.0, f64::max);
            let report = json!({
                "geometry": geometry,
                "c_estimate": overall,
                "per_pair": per_pair,
            });
            Ok(ExperimentOutput::new(report, table))
        })?,

        Experiment::Phichain {
            from,
            to,
            count,
            pitch_factor,
            delta,
            delta_samples,
        } => stages.time("metric", || -> Result<_, RunError> {
            let graph = setup.graph();
            let delta = match delta {
                Some(d) => *d,
                None => four_point_delta(graph.graph(), *delta_samples, seed)?.delta,
            };
            let geo = graph.shortest_path(setup.node(*from), setup.node(*to))?;
            let chain = build_phi_chain(&graph, &geo, delta, *count, *pitch_factor)?;
            let mut table = Table::new(&["index", "node", "x", "y", "set_size"]);
            for (k, (&x, set)) in chain.track_points.iter().zip(&chain.sets).enumerate() {
                let p = grid.point(x);
                table.push(vec![s(k), s(x), s(p.x), s(p.y), s(set.len())]);
            }
            let members: Vec<usize> = chain.sets.iter().flat_map(|s| s.iter()).collect();
            let map = Heatmap::from_nodes(&grid, members)?;
            Ok(ExperimentOutput::new(to_value(&chain), table).heatmap("phi_chain", map))
        })?,

        Experiment::Multiplicativity {
            rho,
            diameters,
            per_geodesic,
            separation_factor,
            delta,
            delta_samples,
        } => stages.time("solve", || -> Result<_, RunError> {
            let graph = setup.graph();
            let delta = match delta {
                Some(d) => *d,
                None => four_point_delta(graph.graph(), *delta_samples, seed)?.delta,
            };
            let reach = rho * grid.shape().boundary_distance(Point::ORIGIN);
            let mut triples = Vec::new();
            for k in 0..*diameters {
                let th = PI * k as f64 / *diameters as f64;
                let dir = Point::new(th.cos(), th.sin());
                let (x, z) = (setup.node(dir * reach), setup.node(dir * -reach));
                triples.extend(geodesic_triples(&graph, x, z, *per_geodesic)?);
            }
            let oracle = setup.oracle();
            let report = green_multiplicativity(&oracle, &graph, &triples, delta, *separation_factor)?;
            let mut table = Table::new(&["x", "y", "z", "d_xy", "d_yz", "g_xz", "g_xy", "g_yz", "rho"]);
            for t in &report.triples {
                table.push(vec![
                    s(t.x),
                    s(t.y),
                    s(t.z),
                    s(t.d_xy),
                    s(t.d_yz),
                    s(t.g_xz),
                    s(t.g_xy),
                    s(t.g_yz),
                    s(t.rho),
                ]);
            }
            Ok(ExperimentOutput::new(to_value(&report), table))
        })?,

        Experiment::Decay {
            sources,
            directions,
            distances,
            prefactor_power,
            metric,
        } => stages.time("solve", || -> Result<_, RunError> {
            let oracle = setup.oracle();
            let mut pairs = Vec::new();
            for (src, dir) in sources.iter().zip(directions) {
                let x = setup.node(*src);
                for &d in distances {
                    pairs.push((x, setup.node(*src + *dir * d)));
                }
            }
            let graph;
            let m = match metric {
                DecayDistance::Euclidean => DecayMetric::Euclidean,
                DecayDistance::QuasiHyperbolic => {
                    graph = setup.graph();
                    DecayMetric::QuasiHyperbolic(&graph)
                }
            };
            let fit = decay_fit(&oracle, &pairs, m, *prefactor_power)?;
            let mut table = Table::new(&["x", "y", "d", "product"]);
            for smp in &fit.samples {
                table.push(vec![s(smp.x), s(smp.y), s(smp.d), s(smp.product)]);
            }
            Ok(ExperimentOutput::new(to_value(&fit), table))
        })?,

        Experiment::Bhi { xi, radii, options } => stages.time("solve", || -> Result<_, RunError> {
            let oracle = setup.oracle();
            let mut table = Table::new(&["radius", "measured_hb", "w_size", "v_size", "arc_size", "functions"]);
            let mut runs = Vec::new();
            for &r in radii {
                let e = bhi_experiment(&oracle, *xi, r, options, seed)?;
                table.push(vec![
                    s(r),
                    s(e.report.measured_hb),
                    s(e.report.w_size),
                    s(e.v_size),
                    s(e.arc_size),
                    s(e.functions),
                ]);
                runs.push(e);
            }
            Ok(ExperimentOutput::new(json!({ "runs": runs }), table))
        })?,

        Experiment::Martin {
            basepoint,
            zeta,
            distances,
            probe_radius,
        } => stages.time("solve", || -> Result<_, RunError> {
            let oracle = setup.oracle();
            let toward = *basepoint - *zeta;
            let unit = toward * (1.0 / toward.norm());
            let poles: Vec<usize> = distances.iter().map(|&d| setup.node(*zeta + unit * d)).collect();
            let probes: Vec<usize> = (0..grid.interior_count())
                .filter(|&i| grid.point(i).dist(*basepoint) <= *probe_radius)
                .collect();
            let seq = martin_sequence(&oracle, setup.node(*basepoint), &poles, &probes)?;
            let poisson = matches!(config.domain, DomainSpec::UnitDisk)
                && is_laplacian(&config.operator)
                && basepoint.norm() == 0.0;
            let errors = if poisson {
                let mut kernel = vec![f64::NAN; grid.interior_count()];
                for &x in &probes {
                    kernel[x] = poisson_kernel_disk(grid.point(x), *zeta)?;
                }
                let e = seq.sup_relative_error(|x| kernel[x]);
                Some(e)
            } else {
                None
            };
            let mut table = Table::new(&[
                "pole",
                "distance",
                "pole_boundary_distance",
                "successive_sup",
                "poisson_error",
            ]);
            for (k, &p) in seq.poles.iter().enumerate() {
                table.push(vec![
                    s(p),
                    s(distances[k]),
                    s(seq.pole_distances[k]),
                    opt(k.checked_sub(1).map(|j| seq.successive_sup[j])),
                    opt(errors.as_ref().map(|e| e[k])),
                ]);
            }
            let last = seq.kernels.last().expect("at least one pole");
            let map = Heatmap::from_field(&grid, last, Scale::Log)?;
            let report = json!({ "sequence": seq, "poisson_relative_error": errors });
            Ok(ExperimentOutput::new(report, table).heatmap("martin_kernel", map))
        })?,

        Experiment::Reduit {
            center,
            radius,
            options,
        } => stages.time("solve", || -> Result<_, RunError> {
            let a = NodeSet::from_predicate(grid.interior_count(), |i| grid.point(i).dist(*center) <= *radius);
            let r = reduit_with(&setup.op, &vec![1.0; grid.interior_count()], &a, options)?;
            let map = Heatmap::from_field(&grid, &r.values, Scale::Linear)?;
            let report = json!({
                "obstacle_nodes": a.len(),
                "active_nodes": r.active_set.len(),
                "iterations": r.iterations,
                "residual": r.residual,
                "omega": r.omega,
            });
            Ok(ExperimentOutput::new(report, field_table(&grid, &r.values, "reduit")).heatmap("reduit", map))
        })?,

        Experiment::Accept { .. } => unreachable!("handled above"),
    };
    Ok(out)
}
