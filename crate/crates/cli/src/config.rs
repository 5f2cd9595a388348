//! Experiment configuration: parsing, defaults and semantic validation.

use std::fmt;
use std::path::PathBuf;

use qhlab_core::domain::DEFAULT_MIN_CELLS;
use qhlab_core::elliptic::PotentialMode;
use qhlab_core::potential::{BhiOptions, ReduitOptions};
use qhlab_core::{DomainSpec, OperatorSpec, Point};
use serde::{Deserialize, Serialize};

/// One experiment invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    pub h: f64,
    #[serde(default)]
    pub operator: OperatorSpec,
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Free text, ignored by the harness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("qhlab-out")
}

/// Metric used to measure distances in the decay experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DecayDistance {
    #[default]
    Euclidean,
    QuasiHyperbolic,
}

/// Which surface carries the quasi-hyperbolic metric in the uniformity
/// experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UniformGeometry {
    /// The rasterized planar domain itself.
    #[default]
    Planar,
    /// The symmetry plane of the rotationally symmetric profile domain in
    /// three dimensions; only valid for profile domains.
    RotationalSlice,
}

/// Experiment selector with its parameter block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Green {
        pole: Point,
        /// Probes closer than this to the pole are left out of the
        /// comparison against the closed form.
        #[serde(default = "defaults::pole_clearance")]
        pole_clearance: f64,
    },
    Eig {
        #[serde(default = "defaults::eig_tol")]
        tol: f64,
    },
    Resolvent {
        /// Shift `t`; defaults to `θ = τ/2`.
        #[serde(default)]
        t: Option<f64>,
        #[serde(default = "defaults::probes")]
        probes: usize,
    },
    Harnack {
        #[serde(default)]
        center: Point,
        radius: f64,
        #[serde(default = "defaults::trials")]
        trials: usize,
    },
    Rmp {
        center: Point,
        pole: Point,
        radii: Vec<f64>,
        #[serde(default)]
        theta: Option<f64>,
    },
    Delta {
        #[serde(default = "defaults::delta_samples")]
        samples: usize,
        #[serde(default)]
        smoothed: bool,
    },
    Uniform {
        /// Pairs `(0, ±k)` for each listed `k`.
        #[serde(default)]
        axis_pairs: Vec<f64>,
        #[serde(default)]
        pairs: Vec<[Point; 2]>,
        #[serde(default)]
        geometry: UniformGeometry,
    },
    Phichain {
        from: Point,
        to: Point,
        #[serde(default = "defaults::chain_count")]
        count: usize,
        #[serde(default = "defaults::pitch_factor")]
        pitch_factor: f64,
        /// Hyperbolicity constant; measured when absent.
        #[serde(default)]
        delta: Option<f64>,
        #[serde(default = "defaults::delta_samples")]
        delta_samples: usize,
    },
    Multiplicativity {
        /// Endpoints of the diameters sit at this fraction of the domain's
        /// half-width around the centroid.
        #[serde(default = "defaults::rho")]
        rho: f64,
        #[serde(default = "defaults::diameters")]
        diameters: usize,
        #[serde(default = "defaults::per_geodesic")]
        per_geodesic: usize,
        #[serde(default = "defaults::separation")]
        separation_factor: f64,
        #[serde(default)]
        delta: Option<f64>,
        #[serde(default = "defaults::delta_samples")]
        delta_samples: usize,
    },
    Decay {
        sources: Vec<Point>,
        /// Unit ray direction for each source.
        directions: Vec<Point>,
        distances: Vec<f64>,
        #[serde(default = "defaults::prefactor")]
        prefactor_power: f64,
        #[serde(default)]
        metric: DecayDistance,
    },
    Bhi {
        xi: Point,
        radii: Vec<f64>,
        #[serde(default)]
        options: BhiOptions,
    },
    Martin {
        #[serde(default)]
        basepoint: Point,
        /// Boundary target of the pole sequence.
        zeta: Point,
        /// Distances of the poles to `zeta`, along the segment from the
        /// basepoint.
        distances: Vec<f64>,
        #[serde(default = "defaults::probe_radius")]
        probe_radius: f64,
    },
    Reduit {
        /// Obstacle set: the closed ball of this radius around `center`.
        #[serde(default)]
        center: Point,
        radius: f64,
        #[serde(default)]
        options: ReduitOptions,
    },
    Accept {
        #[serde(default)]
        quick: bool,
    },
}

mod defaults {
    pub fn pole_clearance() -> f64 {
        0.1
    }
    pub fn eig_tol() -> f64 {
        1e-8
    }
    pub fn probes() -> usize {
        20
    }
    pub fn trials() -> usize {
        64
    }
    pub fn delta_samples() -> usize {
        2000
    }
    pub fn chain_count() -> usize {
        8
    }
    pub fn pitch_factor() -> f64 {
        qhlab_core::metric::DEFAULT_PITCH_FACTOR
    }
    pub fn rho() -> f64 {
        0.9
    }
    pub fn diameters() -> usize {
        10
    }
    pub fn per_geodesic() -> usize {
        5
    }
    pub fn separation() -> f64 {
        1.0
    }
    pub fn prefactor() -> f64 {
        1.0
    }
    pub fn probe_radius() -> f64 {
        0.5
    }
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Green { .. } => "green",
            Experiment::Eig { .. } => "eig",
            Experiment::Resolvent { .. } => "resolvent",
            Experiment::Harnack { .. } => "harnack",
            Experiment::Rmp { .. } => "rmp",
            Experiment::Delta { .. } => "delta",
            Experiment::Uniform { .. } => "uniform",
            Experiment::Phichain { .. } => "phichain",
            Experiment::Multiplicativity { .. } => "multiplicativity",
            Experiment::Decay { .. } => "decay",
            Experiment::Bhi { .. } => "bhi",
            Experiment::Martin { .. } => "martin",
            Experiment::Reduit { .. } => "reduit",
            Experiment::Accept { .. } => "accept",
        }
    }
}

/// A problem found while reading a configuration, located by key path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl ConfigIssue {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigIssue {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Outcome of [`validate`]: the parsed configuration when there are no
/// errors, plus any warnings.
#[derive(Debug, Clone)]
pub struct Validation {
    pub config: Option<ExperimentConfig>,
    pub errors: Vec<ConfigIssue>,
    pub warnings: Vec<ConfigIssue>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Parse and check a configuration without solving anything.
pub fn validate(text: &str) -> Validation {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = match serde_path_to_error::deserialize(&mut de) {
        Ok(c) => c,
        Err(e) => {
            let path = e.path().to_string();
            let path = if path == "." { "<root>".to_string() } else { path };
            return Validation {
                config: None,
                errors: vec![ConfigIssue::new(path, e.into_inner().to_string())],
                warnings: vec![],
            };
        }
    };
    let (errors, warnings) = check(&config);
    Validation {
        config: errors.is_empty().then_some(config),
        errors,
        warnings,
    }
}

/// Semantic checks on an already parsed configuration.
pub fn check(config: &ExperimentConfig) -> (Vec<ConfigIssue>, Vec<ConfigIssue>) {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let mut err = |path: &str, msg: String| errors.push(ConfigIssue::new(path, msg));

    let accept = matches!(config.experiment, Experiment::Accept { .. });
    let h = config.h;
    if !(h.is_finite() && h > 0.0) {
        err("h", format!("must be a positive finite spacing, got {h}"));
    }
    if let Err(e) = config.domain.validate() {
        err("domain", e.to_string());
    } else if h.is_finite() && h > 0.0 && !accept {
        let cells = config.domain.narrowest_feature() / h;
        if cells < DEFAULT_MIN_CELLS {
            err(
                "h",
                format!(
                    "resolves the narrowest feature ({}) with {cells:.2} cells, at least {DEFAULT_MIN_CELLS} required",
                    config.domain.narrowest_feature()
                ),
            );
        }
    }
    if let Err(e) = config.operator.compile() {
        err("operator", e.to_string());
    }
    if let (DomainSpec::Profile { power, .. }, PotentialMode::Strict) = (&config.domain, config.operator.mode) {
        if *power < 1.0 {
            warnings.push(ConfigIssue::new(
                "operator.mode",
                format!(
                    "profile power {power} < 1 has an inward cusp at the neck; potentials blowing up like đ⁻² \
                     there need mode {{\"kind\": \"singular\"}}, strict k-adaptedness only admits bounded c"
                ),
            ));
        }
    }

    let Ok(shape) = config.domain.shape() else {
        return (errors, warnings);
    };
    let inside = |p: &Point| shape.contains(*p);
    let positive = |v: f64| v.is_finite() && v > 0.0;
    let point = |path: &str, p: &Point, errors: &mut Vec<ConfigIssue>| {
        if !inside(p) {
            errors.push(ConfigIssue::new(
                path,
                format!("point ({}, {}) lies outside the domain", p.x, p.y),
            ));
        }
    };
    match &config.experiment {
        Experiment::Green { pole, pole_clearance } => {
            point("experiment.pole", pole, &mut errors);
            if !(*pole_clearance >= 0.0) {
                errors.push(ConfigIssue::new("experiment.pole_clearance", "must be >= 0"));
            }
        }
        Experiment::Eig { tol } => {
            if !positive(*tol) {
                errors.push(ConfigIssue::new("experiment.tol", format!("must be > 0, got {tol}")));
            }
        }
        Experiment::Resolvent { t, probes } => {
            if let Some(t) = t {
                if !(*t >= 0.0 && t.is_finite()) {
                    errors.push(ConfigIssue::new("experiment.t", format!("must be in [0, τ), got {t}")));
                }
            }
            if *probes == 0 {
                errors.push(ConfigIssue::new("experiment.probes", "must be >= 1"));
            }
        }
        Experiment::Harnack { center, radius, trials } => {
            point("experiment.center", center, &mut errors);
            if !positive(*radius) {
                errors.push(ConfigIssue::new(
                    "experiment.radius",
                    format!("must be > 0, got {radius}"),
                ));
            } else if shape.boundary_distance(*center) < 2.0 * radius {
                errors.push(ConfigIssue::new(
                    "experiment.radius",
                    format!(
                        "the doubled ball must fit: need 2r <= {}",
                        shape.boundary_distance(*center)
                    ),
                ));
            }
            if *trials == 0 {
                errors.push(ConfigIssue::new("experiment.trials", "must be >= 1"));
            }
        }
        Experiment::Rmp {
            center,
            pole,
            radii,
            theta,
        } => {
            point("experiment.center", center, &mut errors);
            point("experiment.pole", pole, &mut errors);
            if radii.len() < 2 || !radii.iter().all(|&r| positive(r)) {
                errors.push(ConfigIssue::new("experiment.radii", "need at least two positive radii"));
            }
            if let Some(t) = theta {
                if !(*t >= 0.0) {
                    errors.push(ConfigIssue::new(
                        "experiment.theta",
                        format!("must be in [0, τ), got {t}"),
                    ));
                }
            }
        }
        Experiment::Delta { samples, .. } => {
            if *samples == 0 {
                errors.push(ConfigIssue::new("experiment.samples", "must be >= 1"));
            }
        }
        Experiment::Uniform {
            axis_pairs,
            pairs,
            geometry,
        } => {
            if axis_pairs.is_empty() && pairs.is_empty() {
                errors.push(ConfigIssue::new("experiment.axis_pairs", "give axis_pairs or pairs"));
            }
            let slice = *geometry == UniformGeometry::RotationalSlice;
            if slice && !matches!(config.domain, DomainSpec::Profile { .. }) {
                errors.push(ConfigIssue::new(
                    "experiment.geometry",
                    "rotational_slice needs a profile domain",
                ));
            }
            for (i, &k) in axis_pairs.iter().enumerate() {
                let p = Point::new(0.0, k);
                let ok = positive(k) && (slice || inside(&p));
                if !ok {
                    errors.push(ConfigIssue::new(
                        format!("experiment.axis_pairs[{i}]"),
                        format!("(0, ±{k}) is not inside"),
                    ));
                }
            }
            if !slice {
                for (i, [p, q]) in pairs.iter().enumerate() {
                    point(&format!("experiment.pairs[{i}][0]"), p, &mut errors);
                    point(&format!("experiment.pairs[{i}][1]"), q, &mut errors);
                }
            }
        }
        Experiment::Phichain {
            from,
            to,
            count,
            pitch_factor,
            delta,
            delta_samples,
        } => {
            point("experiment.from", from, &mut errors);
            point("experiment.to", to, &mut errors);
            if *count < 2 {
                errors.push(ConfigIssue::new("experiment.count", "must be >= 2"));
            }
            if !positive(*pitch_factor) {
                errors.push(ConfigIssue::new("experiment.pitch_factor", "must be > 0"));
            }
            if let Some(d) = delta {
                if !positive(*d) {
                    errors.push(ConfigIssue::new("experiment.delta", "must be > 0"));
                }
            }
            if *delta_samples == 0 {
                errors.push(ConfigIssue::new("experiment.delta_samples", "must be >= 1"));
            }
        }
        Experiment::Multiplicativity {
            rho,
            diameters,
            per_geodesic,
            separation_factor,
            delta,
            delta_samples,
        } => {
            if !(*rho > 0.0 && *rho < 1.0) {
                errors.push(ConfigIssue::new(
                    "experiment.rho",
                    format!("must lie in (0, 1), got {rho}"),
                ));
            }
            if *diameters == 0 || *per_geodesic == 0 {
                errors.push(ConfigIssue::new(
                    "experiment.diameters",
                    "diameters and per_geodesic must be >= 1",
                ));
            }
            if !(*separation_factor >= 0.0) {
                errors.push(ConfigIssue::new("experiment.separation_factor", "must be >= 0"));
            }
            if let Some(d) = delta {
                if !(*d >= 0.0) {
                    errors.push(ConfigIssue::new("experiment.delta", "must be >= 0"));
                }
            }
            if *delta_samples == 0 {
                errors.push(ConfigIssue::new("experiment.delta_samples", "must be >= 1"));
            }
        }
        Experiment::Decay {
            sources,
            directions,
            distances,
            prefactor_power,
            ..
        } => {
            if sources.is_empty() || sources.len() != directions.len() {
                errors.push(ConfigIssue::new(
                    "experiment.directions",
                    format!(
                        "need one direction per source, got {} for {}",
                        directions.len(),
                        sources.len()
                    ),
                ));
            }
            for (i, (s, dir)) in sources.iter().zip(directions).enumerate() {
                point(&format!("experiment.sources[{i}]"), s, &mut errors);
                if !((dir.norm() - 1.0).abs() < 1e-9) {
                    errors.push(ConfigIssue::new(
                        format!("experiment.directions[{i}]"),
                        "must be a unit vector",
                    ));
                    continue;
                }
                for &d in distances {
                    if !inside(&(*s + *dir * d)) {
                        errors.push(ConfigIssue::new(
                            "experiment.distances",
                            format!("distance {d} along ray {i} leaves the domain"),
                        ));
                        break;
                    }
                }
            }
            if distances.len() < 2 || !distances.iter().all(|&d| positive(d)) {
                errors.push(ConfigIssue::new(
                    "experiment.distances",
                    "need at least two positive distances",
                ));
            }
            if !prefactor_power.is_finite() {
                errors.push(ConfigIssue::new("experiment.prefactor_power", "must be finite"));
            }
        }
        Experiment::Bhi { xi, radii, options } => {
            let gap = shape.boundary_distance(*xi);
            if gap > 1e-9 {
                errors.push(ConfigIssue::new(
                    "experiment.xi",
                    format!("must lie on the boundary, distance {gap}"),
                ));
            }
            if radii.is_empty() || !radii.iter().all(|&r| positive(r)) {
                errors.push(ConfigIssue::new(
                    "experiment.radii",
                    "need at least one positive radius",
                ));
            }
            if !(options.a > 1.0) {
                errors.push(ConfigIssue::new(
                    "experiment.options.a",
                    format!("must be > 1, got {}", options.a),
                ));
            }
            if !(options.epsilon > 0.0) {
                errors.push(ConfigIssue::new("experiment.options.epsilon", "must be > 0"));
            }
            if options.spikes + options.random < 2 {
                errors.push(ConfigIssue::new(
                    "experiment.options.random",
                    "need at least two data sets",
                ));
            }
        }
        Experiment::Martin {
            basepoint,
            zeta,
            distances,
            probe_radius,
        } => {
            point("experiment.basepoint", basepoint, &mut errors);
            if shape.boundary_distance(*zeta) > 1e-9 {
                errors.push(ConfigIssue::new("experiment.zeta", "must lie on the boundary"));
            }
            if distances.is_empty() || !distances.iter().all(|&d| positive(d)) {
                errors.push(ConfigIssue::new("experiment.distances", "need positive distances"));
            }
            if !positive(*probe_radius) {
                errors.push(ConfigIssue::new("experiment.probe_radius", "must be > 0"));
            }
        }
        Experiment::Reduit {
            center,
            radius,
            options,
        } => {
            point("experiment.center", center, &mut errors);
            if !positive(*radius) {
                errors.push(ConfigIssue::new("experiment.radius", "must be > 0"));
            }
            if !(options.tol > 0.0) || options.max_sweeps == 0 {
                errors.push(ConfigIssue::new(
                    "experiment.options.tol",
                    "tol must be > 0 and max_sweeps >= 1",
                ));
            }
        }
        Experiment::Accept { .. } => {}
    }
    (errors, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "domain": {"kind": "unit_disk"},
        "h": 0.03125,
        "experiment": {"kind": "eig"}
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let v = validate(MINIMAL);
        assert!(v.is_ok(), "{:?}", v.errors);
        let c = v.config.unwrap();
        assert_eq!(c.operator, OperatorSpec::laplacian());
        assert_eq!(c.experiment, Experiment::Eig { tol: 1e-8 });
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn errors_cite_key_paths() {
        let v = validate(&MINIMAL.replace("0.03125", "-1"));
        assert_eq!(v.errors[0].path, "h");
        let v = validate(&MINIMAL.replace(r#""kind": "eig""#, r#""kind": "eig", "tolerance": 1"#));
        assert_eq!(v.errors[0].path, "experiment");
        assert!(v.errors[0].message.contains("tolerance"));
        let v = validate(&MINIMAL.replace("unit_disk\"}", "annulus\", \"r_in\": 2, \"r_out\": 1}"));
        assert_eq!(v.errors[0].path, "domain");
        let v = validate(&MINIMAL.replace(r#""h""#, r#""colour": 1, "h""#));
        assert_eq!(v.errors[0].path, "colour");
    }

    #[test]
    fn strict_mode_on_a_sqrt_profile_warns() {
        let text = r#"{
            "domain": {"kind": "profile", "c1": 1, "c2": 0.5, "power": 0.5, "x_extent": 4},
            "h": 0.0625,
            "operator": {"mode": {"kind": "strict"}},
            "experiment": {"kind": "delta"}
        }"#;
        let v = validate(text);
        assert!(v.is_ok(), "{:?}", v.errors);
        assert_eq!(v.warnings.len(), 1);
        assert_eq!(v.warnings[0].path, "operator.mode");
        assert!(v.warnings[0].message.contains("đ⁻²"));
    }
}
