//! Global VEM spaces and the coupled block system.
//!
//! Unknowns are ordered `[phi_P (boundary, interior), phi_S (boundary,
//! interior)]`, and the matrix is
//!
//! ```text
//! [ A^P - kP^2 M^P      -B^PS        ]
//! [ B^SP                A^S - kS^2 M^S ]
//! ```
//!
//! Coupling blocks only touch boundary rows and columns. Since
//! `B^SP = -(B^PS)^T`, the assembled matrix is symmetric (but indefinite).

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DVector, Point2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dofs::{number_dofs, DofMap};
use crate::error::{Error, Result};
use crate::material::MaterialParams;
use crate::mesh::PolygonalMesh;
use crate::sparse::{SparseMatrix, TripletBuilder};
use crate::trace::{assemble_boundary_mass, assemble_coupling, boundary_load, BoundaryLoadMode, BoundaryTraceSpace, Component};
use crate::vemspace::{moments, ElementOperators};

pub type ScalarFn = Arc<dyn Fn(&Point2<f64>) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Point2<f64>) -> Vector2<f64> + Send + Sync>;

/// Global scalar VEM space of order `k` on one mesh, with its assembled
/// stiffness and mass matrices.
#[derive(Debug, Clone)]
pub struct VemSpace {
    pub mesh: Arc<PolygonalMesh>,
    pub k: usize,
    pub dofs: DofMap,
    pub elements: Vec<ElementOperators>,
    pub trace: BoundaryTraceSpace,
    pub stiffness: SparseMatrix,
    pub mass: SparseMatrix,
}

impl VemSpace {
    pub fn new(mesh: Arc<PolygonalMesh>, k: usize) -> Result<Self> {
        if !(1..=5).contains(&k) {
            return Err(Error::InvalidParameter(format!("order {k} outside 1..=5")));
        }
        let dofs = number_dofs(&mesh, k);
        let elements: Vec<ElementOperators> = (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| ElementOperators::new(mesh.element_geometry(c), k, c))
            .collect::<Result<_>>()?;
        let n = dofs.n_dofs;
        let mut a = TripletBuilder::new(n, n);
        let mut m = TripletBuilder::new(n, n);
        for (ops, map) in elements.iter().zip(&dofs.cell_dofs) {
            a.add_local(map, map, &ops.stiffness, 1.0);
            m.add_local(map, map, &ops.mass, 1.0);
        }
        let trace = BoundaryTraceSpace::new(&mesh, &dofs);
        Ok(Self {
            mesh,
            k,
            dofs,
            elements,
            trace,
            stiffness: a.build(),
            mass: m.build(),
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs
    }

    pub fn n_boundary(&self) -> usize {
        self.dofs.n_boundary
    }

    /// Global DOFs of a smooth function (point values and cell moments).
    pub fn interpolate(&self, f: &(dyn Fn(&Point2<f64>) -> f64 + Sync)) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_dofs());
        for (i, p) in self.dofs.points.iter().enumerate() {
            if let Some(p) = p {
                out[i] = f(p);
            }
        }
        if self.k >= 2 {
            let per_cell: Vec<DVector<f64>> = (0..self.mesh.n_cells())
                .into_par_iter()
                .map(|c| {
                    let g = self.mesh.element_geometry(c);
                    moments(g, self.k - 2, 2 * self.k + 2, f) / g.area
                })
                .collect();
            for (c, mom) in per_cell.iter().enumerate() {
                let ops = &self.elements[c];
                for (a, v) in mom.iter().enumerate() {
                    out[self.dofs.cell_dofs[c][ops.layout.moment(a)]] = *v;
                }
            }
        }
        out
    }

    /// Local DOF vector of cell `c`.
    pub fn local(&self, global: &DVector<f64>, c: usize) -> DVector<f64> {
        DVector::from_iterator(self.dofs.cell_dofs[c].len(), self.dofs.cell_dofs[c].iter().map(|&d| global[d]))
    }
}

/// Polynomial degree of the L2 projection applied to test functions in the
/// volume load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadProjection {
    /// Project onto `P_k`: exact for polynomial data of degree `k`.
    #[default]
    Full,
    /// Project onto `P_{max(1, k-2)}`.
    Reduced,
}

impl LoadProjection {
    pub fn degree(self, k: usize) -> usize {
        match self {
            Self::Full => k,
            Self::Reduced => 1.max(k.saturating_sub(2)),
        }
    }
}

/// A scalar volume source.
#[derive(Clone, Default)]
pub enum ScalarSource {
    #[default]
    Zero,
    Analytic(ScalarFn),
    /// A DOF vector in the space the load is assembled on.
    Discrete(DVector<f64>),
}

impl std::fmt::Debug for ScalarSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Analytic(_) => write!(f, "Analytic(..)"),
            Self::Discrete(v) => write!(f, "Discrete(len {})", v.len()),
        }
    }
}

/// `(f, Pi0_m v)` for every basis function `v`, with `m` from `proj`.
/// For a discrete source `f_h` the pairing is `(Pi0_m f_h, Pi0_m v)`.
pub fn load_vector(space: &VemSpace, source: &ScalarSource, proj: LoadProjection) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(space.n_dofs());
    let m = proj.degree(space.k);
    let locals: Vec<DVector<f64>> = match source {
        ScalarSource::Zero => return Ok(out),
        ScalarSource::Analytic(f) => (0..space.mesh.n_cells())
            .into_par_iter()
            .map(|c| {
                let ops = &space.elements[c];
                let g = space.mesh.element_geometry(c);
                let mom = moments(g, m, 2 * space.k + 4, |p| f(p));
                ops.pi_zero_star_degree(m).transpose() * mom
            })
            .collect(),
        ScalarSource::Discrete(fh) => {
            if fh.len() != space.n_dofs() {
                return Err(Error::Dimension {
                    context: "discrete load",
                    expected: space.n_dofs(),
                    found: fh.len(),
                });
            }
            (0..space.mesh.n_cells())
                .into_par_iter()
                .map(|c| {
                    let ops = &space.elements[c];
                    let pm = ops.pi_zero_star_degree(m);
                    let nm = pm.nrows();
                    let hm = ops.h.view((0, 0), (nm, nm));
                    pm.transpose() * (hm * (&pm * space.local(fh, c)))
                })
                .collect()
        }
    };
    for (c, loc) in locals.iter().enumerate() {
        for (&d, v) in space.dofs.cell_dofs[c].iter().zip(loc.iter()) {
            out[d] += v;
        }
    }
    Ok(out)
}

/// Volume sources, boundary datum and quadrature choices for one solve.
#[derive(Clone, Default)]
pub struct Loads {
    pub f_p: ScalarSource,
    pub f_s: ScalarSource,
    /// Dirichlet displacement datum `g` on the boundary.
    pub g: Option<VectorFn>,
    pub load_projection: LoadProjection,
    pub boundary_mode: BoundaryLoadMode,
}

impl std::fmt::Debug for Loads {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Loads")
            .field("f_p", &self.f_p)
            .field("f_s", &self.f_s)
            .field("g", &self.g.as_ref().map(|_| ".."))
            .field("load_projection", &self.load_projection)
            .field("boundary_mode", &self.boundary_mode)
            .finish()
    }
}

/// All blocks of the coupled system plus the right-hand side pieces.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub n_p: usize,
    pub n_p_boundary: usize,
    pub n_s: usize,
    pub n_s_boundary: usize,
    pub kappa_p2: f64,
    pub kappa_s2: f64,
    pub a_p: SparseMatrix,
    pub m_p: SparseMatrix,
    pub a_s: SparseMatrix,
    pub m_s: SparseMatrix,
    /// `n_P x n_S`.
    pub b_ps: SparseMatrix,
    /// `n_S x n_P`.
    pub b_sp: SparseMatrix,
    pub q_p: SparseMatrix,
    pub q_s: SparseMatrix,
    /// Scaled volume loads `(f^P, .)/(lambda + 2 mu)` and `(f^S, .)/mu`.
    pub f_p: DVector<f64>,
    pub f_s: DVector<f64>,
    /// Boundary data `<g.n, .>` and `<g.tau, .>`.
    pub g_p: DVector<f64>,
    pub g_s: DVector<f64>,
}

/// Assembles the coupled system. The coupling matrices are exact even when
/// the two spaces live on different meshes of the same domain.
pub fn assemble_global(space_p: &VemSpace, space_s: &VemSpace, material: &MaterialParams, loads: &Loads) -> Result<BlockSystem> {
    material.validate()?;
    let (b_ps, b_sp) = assemble_coupling(&space_p.trace, &space_s.trace)?;
    let q_p = assemble_boundary_mass(&space_p.trace);
    let q_s = assemble_boundary_mass(&space_s.trace);
    let f_p = load_vector(space_p, &loads.f_p, loads.load_projection)? / material.p_modulus();
    let f_s = load_vector(space_s, &loads.f_s, loads.load_projection)? / material.mu;
    let (g_p, g_s) = match &loads.g {
        Some(g) => {
            let g = |p: &Point2<f64>| g(p);
            (
                boundary_load(&space_p.trace, &g, Component::Normal, loads.boundary_mode),
                boundary_load(&space_s.trace, &g, Component::Tangential, loads.boundary_mode),
            )
        }
        None => (DVector::zeros(space_p.n_dofs()), DVector::zeros(space_s.n_dofs())),
    };
    Ok(BlockSystem {
        n_p: space_p.n_dofs(),
        n_p_boundary: space_p.n_boundary(),
        n_s: space_s.n_dofs(),
        n_s_boundary: space_s.n_boundary(),
        kappa_p2: material.kappa_p_squared(),
        kappa_s2: material.kappa_s_squared(),
        a_p: space_p.stiffness.clone(),
        m_p: space_p.mass.clone(),
        a_s: space_s.stiffness.clone(),
        m_s: space_s.mass.clone(),
        b_ps,
        b_sp,
        q_p,
        q_s,
        f_p,
        f_s,
        g_p,
        g_s,
    })
}

impl BlockSystem {
    pub fn n_unknowns(&self) -> usize {
        self.n_p + self.n_s
    }

    /// `A - kappa^2 M` for the P space.
    pub fn helmholtz_p(&self) -> SparseMatrix {
        self.a_p.add_scaled(&self.m_p, -self.kappa_p2)
    }

    pub fn helmholtz_s(&self) -> SparseMatrix {
        self.a_s.add_scaled(&self.m_s, -self.kappa_s2)
    }

    pub fn matrix(&self) -> SparseMatrix {
        let hp = self.helmholtz_p();
        let hs = self.helmholtz_s();
        let neg_bps = self.b_ps.scaled(-1.0);
        SparseMatrix::from_blocks(
            &[self.n_p, self.n_s],
            &[self.n_p, self.n_s],
            &[vec![Some(&hp), Some(&neg_bps)], vec![Some(&self.b_sp), Some(&hs)]],
        )
        .expect("block shapes are consistent by construction")
    }

    pub fn rhs_p(&self) -> DVector<f64> {
        &self.f_p + &self.g_p
    }

    pub fn rhs_s(&self) -> DVector<f64> {
        &self.f_s + &self.g_s
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.rhs_p().iter().chain(self.rhs_s().iter()).copied().collect()
    }

    /// The same system with both coupling blocks replaced by zeros.
    pub fn without_coupling(&self) -> Self {
        let mut out = self.clone();
        out.b_ps = SparseMatrix::zeros(self.n_p, self.n_s);
        out.b_sp = SparseMatrix::zeros(self.n_s, self.n_p);
        out
    }

    /// The 4 x 4 partition `[P_Gamma, P_I, S_Gamma, S_I]` of the matrix, as
    /// named blocks in row-major order.
    pub fn partitioned_blocks(&self) -> Vec<(String, SparseMatrix)> {
        let full = self.matrix();
        let cuts = [
            ("P_G", 0, self.n_p_boundary),
            ("P_I", self.n_p_boundary, self.n_p),
            ("S_G", self.n_p, self.n_p + self.n_s_boundary),
            ("S_I", self.n_p + self.n_s_boundary, self.n_p + self.n_s),
        ];
        let mut out = Vec::with_capacity(16);
        for (rn, r0, r1) in cuts {
            for (cn, c0, c1) in cuts {
                out.push((format!("{rn}__{cn}"), full.block(r0, r1, c0, c1)));
            }
        }
        out
    }

    /// Writes every partition block and the right-hand side as Matrix Market
    /// files into `dir`.
    pub fn export_blocks(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for (name, block) in self.partitioned_blocks() {
            block.write_matrix_market(&dir.join(format!("{name}.mtx")))?;
        }
        let rhs = self.rhs();
        let col = SparseMatrix::from_triplets(rhs.len(), 1, rhs.iter().enumerate().map(|(i, &v)| (i, 0, v)).collect());
        col.write_matrix_market(&dir.join("rhs.mtx"))
    }
}
