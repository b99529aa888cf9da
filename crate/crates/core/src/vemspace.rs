//! Enhanced virtual element space of order `k` on one polygon.
//!
//! Local degrees of freedom, in order:
//!
//! 1. values at the `n_E` vertices;
//! 2. values at the `k - 1` interior Gauss–Lobatto points of each edge,
//!    listed edge by edge along the local (counterclockwise) direction;
//! 3. scaled moments `|E|^{-1} int_E w m_a` for `|a| <= k - 2`.

use nalgebra::{DMatrix, DVector, Point2};

use crate::error::{Error, Result};
use crate::mesh::ElementGeometry;
use crate::polybasis::{monomial_mass_matrix, poly_dim, ScaledMonomialBasis};
use crate::quadrature::{gauss_lobatto, polygon_rule};

/// Condition estimate above which element matrices trigger a warning.
pub const ELEMENT_CONDITION_WARNING: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub k: usize,
    pub n_edges: usize,
}

impl DofLayout {
    pub fn new(k: usize, n_edges: usize) -> Self {
        assert!(k >= 1, "order must be at least one");
        Self { k, n_edges }
    }

    pub fn n_dofs(&self) -> usize {
        self.k * self.n_edges + self.n_moments()
    }

    pub fn n_moments(&self) -> usize {
        self.k * (self.k - 1) / 2
    }

    /// Vertex and edge-point DOFs; they are exactly the ones with a trace on
    /// the element boundary.
    pub fn n_point_dofs(&self) -> usize {
        self.k * self.n_edges
    }

    pub fn vertex(&self, i: usize) -> usize {
        i
    }

    /// `j`-th interior point of local edge `e`, `j < k - 1`.
    pub fn edge_point(&self, e: usize, j: usize) -> usize {
        self.n_edges + e * (self.k - 1) + j
    }

    pub fn moment(&self, a: usize) -> usize {
        self.n_point_dofs() + a
    }

    /// The `k + 1` DOFs lying on local edge `e`, ordered along the edge.
    pub fn edge_dofs(&self, e: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.k + 1);
        out.push(self.vertex(e));
        out.extend((0..self.k - 1).map(|j| self.edge_point(e, j)));
        out.push(self.vertex((e + 1) % self.n_edges));
        out
    }
}

/// Positions (in `[0, 1]`) of the `k + 1` Gauss–Lobatto nodes of an edge.
pub fn edge_nodes(k: usize) -> &'static [f64] {
    &gauss_lobatto(k + 1).nodes
}

/// Point coordinates of the vertex and edge-point DOFs.
pub fn dof_points(geom: &ElementGeometry, k: usize) -> Vec<Point2<f64>> {
    let mut pts = geom.vertices.clone();
    let nodes = edge_nodes(k);
    for e in &geom.edges {
        pts.extend(nodes[1..k].iter().map(|&t| e.point_at(t)));
    }
    pts
}

/// Projector matrices and stabilized local forms of one element.
#[derive(Debug, Clone)]
pub struct ElementOperators {
    pub layout: DofLayout,
    pub basis: ScaledMonomialBasis,
    pub area: f64,
    /// `D_{ia} = dof_i(m_a)`.
    pub d: DMatrix<f64>,
    /// `H_{ab} = (m_a, m_b)_E`.
    pub h: DMatrix<f64>,
    /// `(grad m_a, grad m_b)_E`.
    pub g_tilde: DMatrix<f64>,
    /// DOFs -> monomial coefficients of the elliptic projection.
    pub pi_nabla_star: DMatrix<f64>,
    /// DOFs -> DOFs of the elliptic projection.
    pub pi_nabla_dof: DMatrix<f64>,
    /// DOFs -> monomial coefficients of the L2 projection.
    pub pi_zero_star: DMatrix<f64>,
    pub pi_zero_dof: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
}

fn element_error(cell: usize, reason: impl Into<String>) -> Error {
    Error::Element {
        cell,
        reason: reason.into(),
    }
}

fn spd_condition(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b.abs()));
    max / min
}

/// DOF matrix `D` of the scaled monomials.
pub fn dof_matrix(geom: &ElementGeometry, basis: &ScaledMonomialBasis, layout: &DofLayout, h: &DMatrix<f64>) -> DMatrix<f64> {
    let nk = basis.dim();
    let mut d = DMatrix::zeros(layout.n_dofs(), nk);
    for (i, p) in dof_points(geom, layout.k).iter().enumerate() {
        let v = basis.eval(p);
        d.row_mut(i).copy_from_slice(&v);
    }
    for a in 0..layout.n_moments() {
        for b in 0..nk {
            d[(layout.moment(a), b)] = h[(a, b)] / geom.area;
        }
    }
    d
}

/// Right-hand side matrix `B` of the elliptic projection: row 0 is the
/// boundary mean functional, rows `a >= 1` give `(grad w, grad m_a)_E`.
fn pi_nabla_rhs(geom: &ElementGeometry, basis: &ScaledMonomialBasis, layout: &DofLayout) -> DMatrix<f64> {
    let k = layout.k;
    let nk = basis.dim();
    let mut b = DMatrix::zeros(nk, layout.n_dofs());
    let gll = gauss_lobatto(k + 1);
    for (e, edge) in geom.edges.iter().enumerate() {
        let dofs = layout.edge_dofs(e);
        for (j, (&t, &w)) in gll.nodes.iter().zip(&gll.weights).enumerate() {
            let wl = w * edge.length;
            b[(0, dofs[j])] += wl;
            let grads = basis.gradients(&edge.point_at(t));
            for a in 1..nk {
                b[(a, dofs[j])] += wl * grads[a].dot(&edge.normal);
            }
        }
    }
    for a in 1..nk {
        for (beta, c) in basis.laplacian(a) {
            b[(a, layout.moment(beta))] -= geom.area * c;
        }
    }
    b
}

impl ElementOperators {
    /// Builds all local operators of order `k`. `cell` only labels errors
    /// and warnings.
    pub fn new(geom: &ElementGeometry, k: usize, cell: usize) -> Result<Self> {
        if k == 0 || k > 8 {
            return Err(Error::InvalidParameter(format!("unsupported order {k}")));
        }
        let layout = DofLayout::new(k, geom.n_edges());
        let basis = ScaledMonomialBasis::new(geom, k);
        let nk = basis.dim();
        let n = layout.n_dofs();
        let h = monomial_mass_matrix(geom, k);
        let cond_h = spd_condition(&h);
        if !cond_h.is_finite() {
            return Err(element_error(cell, "singular monomial mass matrix"));
        }
        if cond_h > ELEMENT_CONDITION_WARNING {
            log::warn!("cell {cell}: monomial mass matrix condition estimate {cond_h:.3e}");
        }
        let d = dof_matrix(geom, &basis, &layout, &h);
        let b = pi_nabla_rhs(geom, &basis, &layout);

        let g = &b * &d;
        // Two-sided diagonal equilibration before the LU solve: the rows and
        // columns of G span several orders of magnitude at higher k.
        let rs = DVector::from_fn(nk, |i, _| 1.0 / g.row(i).amax());
        let gr = DMatrix::from_fn(nk, nk, |i, j| g[(i, j)] * rs[i]);
        let cs = DVector::from_fn(nk, |j, _| 1.0 / gr.column(j).amax());
        let gs = DMatrix::from_fn(nk, nk, |i, j| gr[(i, j)] * cs[j]);
        let bs = DMatrix::from_fn(nk, n, |i, j| b[(i, j)] * rs[i]);
        let pi_nabla_star = gs
            .lu()
            .solve(&bs)
            .map(|y| DMatrix::from_fn(nk, n, |i, j| y[(i, j)] * cs[i]))
            .filter(|m| m.iter().all(|v| v.is_finite()))
            .ok_or_else(|| element_error(cell, "singular elliptic projection system"))?;
        let mut g_tilde = g;
        g_tilde.row_mut(0).fill(0.0);

        let pi_zero_star = Self::l2_projection(&layout, &h, &pi_nabla_star, geom.area, cell)?;

        let id = DMatrix::<f64>::identity(n, n);
        let pi_nabla_dof = &d * &pi_nabla_star;
        let pi_zero_dof = &d * &pi_zero_star;
        let r = &id - &pi_nabla_dof;
        let mut stiffness = pi_nabla_star.transpose() * &g_tilde * &pi_nabla_star + r.transpose() * &r;
        let r0 = &id - &pi_zero_dof;
        let mut mass = pi_zero_star.transpose() * &h * &pi_zero_star + (r0.transpose() * &r0) * geom.area;
        symmetrize(&mut stiffness);
        symmetrize(&mut mass);
        debug_assert_eq!(pi_nabla_star.shape(), (nk, n));

        Ok(Self {
            layout,
            basis,
            area: geom.area,
            d,
            h,
            g_tilde,
            pi_nabla_star,
            pi_nabla_dof,
            pi_zero_star,
            pi_zero_dof,
            stiffness,
            mass,
        })
    }

    /// L2 projection from the enhancement: `w` and its elliptic projection
    /// share all moments against the L2-orthogonal complement of `P_{k-2}`
    /// in `P_k`, while moments against `P_{k-2}` are DOFs.
    ///
    /// Writing `H^{-1} C` with `C` the full moment matrix, the difference to
    /// the elliptic projection only touches the low-degree coefficients:
    /// `Pi0* = Pi* + [H_low^{-1} (|E| S - (H Pi*)_low); 0]`, where `S` selects
    /// the moment DOFs. This avoids solving with the full (badly
    /// conditioned) `H`.
    fn l2_projection(
        layout: &DofLayout,
        h: &DMatrix<f64>,
        pi_nabla_star: &DMatrix<f64>,
        area: f64,
        cell: usize,
    ) -> Result<DMatrix<f64>> {
        let nl = layout.n_moments();
        let mut out = pi_nabla_star.clone();
        if nl == 0 {
            return Ok(out);
        }
        let h_low = h.view((0, 0), (nl, nl)).into_owned();
        let mut defect = -(h.rows(0, nl) * pi_nabla_star);
        for b in 0..nl {
            defect[(b, layout.moment(b))] += area;
        }
        let corr = h_low
            .cholesky()
            .ok_or_else(|| element_error(cell, "low-order mass matrix is not positive definite"))?
            .solve(&defect);
        let mut top = out.rows_mut(0, nl);
        top += corr;
        Ok(out)
    }

    pub fn n_dofs(&self) -> usize {
        self.layout.n_dofs()
    }

    pub fn k(&self) -> usize {
        self.layout.k
    }

    /// L2 projection onto `P_m`, `m <= k`, as DOFs -> coefficients of the
    /// first `dim(P_m)` monomials: `H_m^{-1} H_{m,:} Pi0*`.
    pub fn pi_zero_star_degree(&self, m: usize) -> DMatrix<f64> {
        let k = self.layout.k;
        assert!(m <= k);
        if m == k {
            return self.pi_zero_star.clone();
        }
        let nm = poly_dim(m);
        let hm = self.h.view((0, 0), (nm, nm)).into_owned();
        let rhs = self.h.rows(0, nm) * &self.pi_zero_star;
        hm.cholesky().expect("principal block of an SPD matrix").solve(&rhs)
    }

    /// Coefficients of `Pi_nabla w` for a DOF vector.
    pub fn project_nabla(&self, dofs: &DVector<f64>) -> DVector<f64> {
        &self.pi_nabla_star * dofs
    }

    pub fn project_zero(&self, dofs: &DVector<f64>) -> DVector<f64> {
        &self.pi_zero_star * dofs
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Elliptic-projection operator alone, as a convenience.
pub fn compute_pi_nabla(geom: &ElementGeometry, k: usize) -> Result<DMatrix<f64>> {
    Ok(ElementOperators::new(geom, k, 0)?.pi_nabla_star)
}

pub fn compute_pi_zero(geom: &ElementGeometry, k: usize) -> Result<DMatrix<f64>> {
    Ok(ElementOperators::new(geom, k, 0)?.pi_zero_star)
}

pub fn local_stiffness(geom: &ElementGeometry, k: usize) -> Result<DMatrix<f64>> {
    Ok(ElementOperators::new(geom, k, 0)?.stiffness)
}

pub fn local_mass(geom: &ElementGeometry, k: usize) -> Result<DMatrix<f64>> {
    Ok(ElementOperators::new(geom, k, 0)?.mass)
}

/// Local DOFs of a smooth function: point samples and moments by quadrature
/// of degree `2k + 2`.
pub fn interpolate_into_space(geom: &ElementGeometry, k: usize, f: impl Fn(&Point2<f64>) -> f64) -> DVector<f64> {
    let layout = DofLayout::new(k, geom.n_edges());
    let mut out = DVector::zeros(layout.n_dofs());
    for (i, p) in dof_points(geom, k).iter().enumerate() {
        out[i] = f(p);
    }
    if k >= 2 {
        let mom = moments(geom, k - 2, 2 * k + 2, &f);
        for (a, m) in mom.iter().enumerate() {
            out[layout.moment(a)] = m / geom.area;
        }
    }
    out
}

/// `int_E f m_a` for `|a| <= degree`, with a rule exact to `rule_degree`.
pub fn moments(geom: &ElementGeometry, degree: usize, rule_degree: usize, f: impl Fn(&Point2<f64>) -> f64) -> DVector<f64> {
    let basis = ScaledMonomialBasis::new(geom, degree);
    let rule = polygon_rule(geom, rule_degree);
    let mut out = DVector::zeros(basis.dim());
    let mut vals = vec![0.0; basis.dim()];
    for (p, &w) in rule.points.iter().zip(&rule.weights) {
        let fw = f(p) * w;
        basis.eval_into(p, &mut vals);
        for (o, v) in out.iter_mut().zip(&vals) {
            *o += fw * v;
        }
    }
    out
}
