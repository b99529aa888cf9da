//! TOML scenario configuration.
//!
//! ```toml
//! name = "patch"            # optional, defaults to the source name
//! k_p = 1
//! k_s = 3
//!
//! [domain]                  # exactly one of n, levels, meshes
//! shape = "unit-square"     # or "l-shape"; built-in sources fix their own
//! n = [2, 4, 8]             # cells per side, same mesh for P and S
//! # levels = [{ n_p = 2, n_s = 4 }]
//! # meshes = [{ p = "coarse.json", s = "fine.off" }]   # s defaults to p
//!
//! [source]                  # exactly one of builtin, potentials, displacement
//! builtin = "patch-test"
//! # potentials = { phi_p = [[1.0, 1, 0]], phi_s = [[1.0, 0, 3]] }
//! # displacement = { u1 = [[4.0, 1, 1]], u2 = [[1.0, 2, 0]] }
//!
//! [material]                # only for polynomial sources; default all ones
//! lambda = 1.0
//! mu = 1.0
//! rho = 1.0
//! kappa = 1.0
//!
//! [options]
//! load_projection = "full"  # or "reduced"
//! boundary_mode = "quadrature"
//!
//! [output]
//! dir = "out"
//! grid = [41, 41]
//! ```
//!
//! Polynomials are lists of `[coefficient, a, b]` terms for `c x^a y^b`. The
//! Dirichlet datum is always the exact displacement of the source, so
//! polynomial scenarios are manufactured solutions.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use elastovem::mesh::{load_mesh, validate_mesh_assumptions};
use elastovem::postprocess::Level;
use elastovem::scenarios::{Domain, Poly2, RunOptions, Scenario, ScenarioId};
use elastovem::{MaterialParams, PolygonalMesh};

pub const MAX_ORDER: usize = 5;

/// Ball and edge ratios below this are logged as poorly shaped cells.
pub const QUALITY_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub k_p: usize,
    pub k_s: usize,
    pub domain: DomainConfig,
    pub source: SourceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<MaterialParams>,
    #[serde(default)]
    pub options: RunOptions,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<Level>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meshes: Option<Vec<MeshPair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshPair {
    pub p: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<ScenarioId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potentials: Option<PotentialsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub displacement: Option<DisplacementConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialsConfig {
    pub phi_p: Poly2,
    pub phi_s: Poly2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisplacementConfig {
    pub u1: Poly2,
    pub u2: Poly2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Sample points of the displacement grid along x and y.
    #[serde(default = "default_grid")]
    pub grid: [usize; 2],
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_grid() -> [usize; 2] {
    [41, 41]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            grid: default_grid(),
        }
    }
}

/// A configuration problem, located by its field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Mesh pairs of the refinement schedule.
#[derive(Debug, Clone)]
pub enum Schedule {
    /// Built on demand from the scenario's domain.
    Structured(Vec<Level>),
    /// Loaded and checked while preparing.
    Files(Vec<(Arc<PolygonalMesh>, Arc<PolygonalMesh>)>),
}

impl Schedule {
    pub fn len(&self) -> usize {
        match self {
            Self::Structured(l) => l.len(),
            Self::Files(m) => m.len(),
        }
    }

    pub fn meshes(&self, domain: Domain, level: usize) -> elastovem::Result<(Arc<PolygonalMesh>, Arc<PolygonalMesh>)> {
        match self {
            Self::Structured(levels) => {
                let lv = levels[level];
                let p = Arc::new(domain.mesh(lv.n_p)?);
                let s = if lv.n_s == lv.n_p { p.clone() } else { Arc::new(domain.mesh(lv.n_s)?) };
                Ok((p, s))
            }
            Self::Files(m) => Ok(m[level].clone()),
        }
    }
}

/// A validated configuration ready to run.
#[derive(Debug)]
pub struct Prepared {
    pub config: ScenarioConfig,
    pub scenario: Scenario,
    pub schedule: Schedule,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::new("", e.to_string()))
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable in TOML")
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("", format!("failed to read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| ConfigError::new(e.path, format!("{}: {}", path.display(), e.message)))
    }

    /// Checks every invariant that does not need the file system.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (path, k) in [("k_p", self.k_p), ("k_s", self.k_s)] {
            if !(1..=MAX_ORDER).contains(&k) {
                return Err(ConfigError::new(path, format!("order {k} outside 1..={MAX_ORDER}")));
            }
        }

        let d = &self.domain;
        let given = [d.n.is_some(), d.levels.is_some(), d.meshes.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(ConfigError::new("domain", "give exactly one of `n`, `levels` or `meshes`"));
        }
        if let Some(n) = &d.n {
            if n.is_empty() {
                return Err(ConfigError::new("domain.n", "refinement schedule is empty"));
            }
            if let Some(i) = n.iter().position(|&n| n == 0) {
                return Err(ConfigError::new(format!("domain.n[{i}]"), "must be positive"));
            }
        }
        if let Some(levels) = &d.levels {
            if levels.is_empty() {
                return Err(ConfigError::new("domain.levels", "refinement schedule is empty"));
            }
            for (i, lv) in levels.iter().enumerate() {
                if lv.n_p == 0 {
                    return Err(ConfigError::new(format!("domain.levels[{i}].n_p"), "must be positive"));
                }
                if lv.n_s == 0 {
                    return Err(ConfigError::new(format!("domain.levels[{i}].n_s"), "must be positive"));
                }
            }
        }
        if matches!(&d.meshes, Some(m) if m.is_empty()) {
            return Err(ConfigError::new("domain.meshes", "refinement schedule is empty"));
        }

        let s = &self.source;
        let given = [s.builtin.is_some(), s.potentials.is_some(), s.displacement.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(ConfigError::new("source", "give exactly one of `builtin`, `potentials` or `displacement`"));
        }
        if let Some(id) = s.builtin {
            if self.material.is_some() {
                return Err(ConfigError::new("material", format!("built-in scenario {} defines its own material", id.name())));
            }
            let own = Scenario::builtin(id).domain;
            if matches!(d.shape, Some(shape) if shape != own) {
                return Err(ConfigError::new("domain.shape", format!("built-in scenario {} lives on {own:?}", id.name())));
            }
        }
        if let Some(m) = &self.material {
            m.validate().map_err(|e| ConfigError::new("material", e.to_string()))?;
        }
        if self.output.grid.contains(&0) {
            return Err(ConfigError::new("output.grid", "sample counts must be positive"));
        }
        Ok(())
    }

    /// Validates, builds the scenario and loads mesh files. Relative mesh
    /// paths are taken relative to `base`.
    pub fn prepare(self, base: &Path) -> Result<Prepared, ConfigError> {
        self.validate()?;
        let scenario = self.scenario();
        let schedule = match (&self.domain.n, &self.domain.levels, &self.domain.meshes) {
            (Some(n), _, _) => Schedule::Structured(n.iter().map(|&n| Level::uniform(n)).collect()),
            (_, Some(levels), _) => Schedule::Structured(levels.clone()),
            (_, _, Some(pairs)) => {
                let mut out = Vec::with_capacity(pairs.len());
                for (i, pair) in pairs.iter().enumerate() {
                    let load = |field: &str, p: &Path| {
                        let path = base.join(p);
                        let mesh = load_mesh(&path, None).map_err(|e| ConfigError::new(format!("domain.meshes[{i}].{field}"), e.to_string()))?;
                        let q = validate_mesh_assumptions(&mesh, QUALITY_THRESHOLD);
                        let flagged = q.flagged().count();
                        if flagged > 0 {
                            log::warn!(
                                "{}: {flagged} of {} cells below quality {QUALITY_THRESHOLD} (min ball ratio {:.3}, min edge ratio {:.3})",
                                path.display(),
                                mesh.n_cells(),
                                q.min_ball_ratio(),
                                q.min_edge_ratio()
                            );
                        }
                        Ok(Arc::new(mesh))
                    };
                    let mesh_p = load("p", &pair.p)?;
                    let mesh_s = match &pair.s {
                        Some(s) if s != &pair.p => load("s", s)?,
                        _ => mesh_p.clone(),
                    };
                    out.push((mesh_p, mesh_s));
                }
                Schedule::Files(out)
            }
            _ => unreachable!("validated"),
        };
        Ok(Prepared {
            config: self,
            scenario,
            schedule,
        })
    }

    fn scenario(&self) -> Scenario {
        let material = self.material.unwrap_or(MaterialParams::UNIT);
        let domain = self.domain.shape.unwrap_or(Domain::UnitSquare);
        let name = |default: &str| self.name.clone().unwrap_or_else(|| default.to_string());
        let s = &self.source;
        if let Some(id) = s.builtin {
            let mut sc = Scenario::builtin(id);
            sc.name = name(id.name());
            sc
        } else if let Some(p) = &s.potentials {
            Scenario::polynomial_potentials(&name("potentials"), material, domain, &p.phi_p, &p.phi_s)
        } else if let Some(u) = &s.displacement {
            Scenario::polynomial_displacement(&name("displacement"), material, domain, &u.u1, &u.u2)
        } else {
            unreachable!("validated")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
name = "manufactured"
k_p = 2
k_s = 3

[domain]
shape = "l-shape"
levels = [{ n_p = 2, n_s = 4 }, { n_p = 4, n_s = 8 }]

[source]
potentials = { phi_p = [[1.0, 2, 0], [-0.5, 0, 1]], phi_s = [[1.0, 0, 3]] }

[material]
lambda = 2.0
mu = 1.5
rho = 1.0
kappa = 0.5

[options]
load_projection = "reduced"
boundary_mode = "interpolated"

[options.solver]
estimate_condition = false

[output]
dir = "results"
grid = [11, 21]
"#;

    fn minimal() -> ScenarioConfig {
        ScenarioConfig::from_toml("k_p = 1\nk_s = 3\n[domain]\nn = [2, 4]\n[source]\nbuiltin = \"patch-test\"\n").unwrap()
    }

    #[test]
    fn round_trip_is_identity() {
        for text in [FULL.to_string(), minimal().to_toml()] {
            let a = ScenarioConfig::from_toml(&text).unwrap();
            let b = ScenarioConfig::from_toml(&a.to_toml()).unwrap();
            assert_eq!(a, b);
        }
        let full = ScenarioConfig::from_toml(FULL).unwrap();
        assert_eq!(full.domain.levels.as_ref().unwrap()[1], Level { n_p: 4, n_s: 8 });
        assert_eq!(full.source.potentials.as_ref().unwrap().phi_p.terms[1], (-0.5, 0, 1));
        full.validate().unwrap();
    }

    #[test]
    fn defaults_are_filled_in() {
        let c = minimal();
        assert_eq!(c.options, RunOptions::default());
        assert_eq!(c.output, OutputConfig::default());
        c.validate().unwrap();
    }

    fn path_of(c: &ScenarioConfig) -> String {
        c.validate().unwrap_err().path
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = minimal();
        c.k_s = 6;
        assert_eq!(path_of(&c), "k_s");

        let mut c = minimal();
        c.domain.n = Some(vec![2, 0]);
        assert_eq!(path_of(&c), "domain.n[1]");

        let mut c = minimal();
        c.domain.n = Some(vec![]);
        assert_eq!(path_of(&c), "domain.n");

        let mut c = minimal();
        c.domain.levels = Some(vec![Level::uniform(2)]);
        assert_eq!(path_of(&c), "domain");

        let mut c = minimal();
        c.source.potentials = Some(PotentialsConfig {
            phi_p: Poly2::default(),
            phi_s: Poly2::default(),
        });
        assert_eq!(path_of(&c), "source");

        let mut c = minimal();
        c.material = Some(MaterialParams::UNIT);
        assert_eq!(path_of(&c), "material");

        let mut c = minimal();
        c.domain.shape = Some(Domain::LShape);
        assert_eq!(path_of(&c), "domain.shape");

        let mut c = minimal();
        c.output.grid = [0, 3];
        assert_eq!(path_of(&c), "output.grid");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ScenarioConfig::from_toml("k_p = 1\nk_s = 1\nkp = 2\n[domain]\nn = [2]\n[source]\nbuiltin = \"patch-test\"\n").unwrap_err();
        assert!(e.message.contains("kp"), "{e}");
    }

    #[test]
    fn missing_mesh_file_is_named() {
        let mut c = minimal();
        c.domain.n = None;
        c.domain.meshes = Some(vec![MeshPair {
            p: PathBuf::from("no/such/mesh.json"),
            s: None,
        }]);
        let e = c.prepare(Path::new("/nonexistent")).unwrap_err();
        assert_eq!(e.path, "domain.meshes[0].p");
        assert!(e.message.contains("/nonexistent/no/such/mesh.json"), "{e}");
    }
}
