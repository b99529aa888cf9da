//! Scaled monomials `m_a(x) = ((x - x_E) / h_E)^a` on a polygon.
//!
//! Members are ordered by total degree, then by decreasing power of the first
//! coordinate: `1, x, y, x^2, xy, y^2, ...`.

use nalgebra::{DMatrix, DVector, Point2, Vector2};

use crate::mesh::ElementGeometry;
use crate::quadrature::polygon_rule;

/// Dimension of the polynomials of total degree `<= k` in two variables.
pub const fn poly_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Position of the exponent pair `(a, b)` in the ordering.
pub const fn monomial_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMonomialBasis {
    degree: usize,
    center: Point2<f64>,
    scale: f64,
    exponents: Vec<(usize, usize)>,
}

impl ScaledMonomialBasis {
    pub fn new(geom: &ElementGeometry, degree: usize) -> Self {
        Self::with_center(geom.centroid, geom.diameter, degree)
    }

    pub fn with_center(center: Point2<f64>, scale: f64, degree: usize) -> Self {
        let exponents = (0..=degree).flat_map(|d| (0..=d).map(move |b| (d - b, b))).collect();
        Self {
            degree,
            center,
            scale,
            exponents,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn center(&self) -> Point2<f64> {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exponents
    }

    fn powers(&self, p: &Point2<f64>) -> (Vec<f64>, Vec<f64>) {
        let xi = (p.x - self.center.x) / self.scale;
        let eta = (p.y - self.center.y) / self.scale;
        let mut px = vec![1.0; self.degree + 1];
        let mut py = vec![1.0; self.degree + 1];
        for i in 1..=self.degree {
            px[i] = px[i - 1] * xi;
            py[i] = py[i - 1] * eta;
        }
        (px, py)
    }

    /// Values of all members at `p`.
    pub fn eval(&self, p: &Point2<f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(p, &mut out);
        out
    }

    pub fn eval_into(&self, p: &Point2<f64>, out: &mut [f64]) {
        let (px, py) = self.powers(p);
        for (o, &(a, b)) in out.iter_mut().zip(&self.exponents) {
            *o = px[a] * py[b];
        }
    }

    /// Physical gradients of all members at `p` (includes the `1/h` factor).
    pub fn gradients(&self, p: &Point2<f64>) -> Vec<Vector2<f64>> {
        let (px, py) = self.powers(p);
        let s = 1.0 / self.scale;
        self.exponents
            .iter()
            .map(|&(a, b)| {
                let dx = if a > 0 { a as f64 * px[a - 1] * py[b] } else { 0.0 };
                let dy = if b > 0 { b as f64 * px[a] * py[b - 1] } else { 0.0 };
                Vector2::new(dx * s, dy * s)
            })
            .collect()
    }

    /// Laplacian of member `i` as `(index, coefficient)` pairs in the same
    /// basis (degree drops by two).
    pub fn laplacian(&self, i: usize) -> Vec<(usize, f64)> {
        let (a, b) = self.exponents[i];
        let s2 = 1.0 / (self.scale * self.scale);
        let mut out = Vec::with_capacity(2);
        if a >= 2 {
            out.push((monomial_index(a - 2, b), (a * (a - 1)) as f64 * s2));
        }
        if b >= 2 {
            out.push((monomial_index(a, b - 2), (b * (b - 1)) as f64 * s2));
        }
        out
    }
}

/// `int_E m_a dx` for `|a| <= k`.
pub fn integrate_monomials(geom: &ElementGeometry, k: usize) -> Vec<f64> {
    let basis = ScaledMonomialBasis::new(geom, k);
    let rule = polygon_rule(geom, k);
    let mut out = vec![0.0; basis.dim()];
    let mut vals = vec![0.0; basis.dim()];
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        basis.eval_into(p, &mut vals);
        out.iter_mut().zip(&vals).for_each(|(o, v)| *o += w * v);
    }
    out
}

/// `H_ab = int_E m_a m_b dx`, integrated with two orders of headroom.
pub fn monomial_mass_matrix(geom: &ElementGeometry, k: usize) -> DMatrix<f64> {
    let basis = ScaledMonomialBasis::new(geom, k);
    let n = basis.dim();
    let rule = polygon_rule(geom, 2 * k + 2);
    let mut h = DMatrix::zeros(n, n);
    let mut vals = vec![0.0; n];
    for (p, &w) in rule.points.iter().zip(&rule.weights) {
        basis.eval_into(p, &mut vals);
        for j in 0..n {
            let wj = w * vals[j];
            for i in j..n {
                h[(i, j)] += wj * vals[i];
            }
        }
    }
    h.fill_upper_triangle_with_lower_triangle();
    h
}

/// `(grad m_a, grad m_b)_E`; its kernel is spanned by the constant.
pub fn monomial_stiffness_matrix(geom: &ElementGeometry, k: usize) -> DMatrix<f64> {
    let basis = ScaledMonomialBasis::new(geom, k);
    let n = basis.dim();
    let rule = polygon_rule(geom, 2 * k);
    let mut g = DMatrix::zeros(n, n);
    for (p, &w) in rule.points.iter().zip(&rule.weights) {
        let grads = basis.gradients(p);
        for j in 0..n {
            for i in j..n {
                g[(i, j)] += w * grads[i].dot(&grads[j]);
            }
        }
    }
    g.fill_upper_triangle_with_lower_triangle();
    g
}

/// A polynomial expressed in a scaled monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialCoeffs {
    pub basis: ScaledMonomialBasis,
    pub coeffs: DVector<f64>,
}

impl PolynomialCoeffs {
    pub fn new(basis: ScaledMonomialBasis, coeffs: DVector<f64>) -> Self {
        assert_eq!(basis.dim(), coeffs.len(), "coefficient count must match basis dimension");
        Self { basis, coeffs }
    }

    pub fn value(&self, p: &Point2<f64>) -> f64 {
        self.basis.eval(p).iter().zip(self.coeffs.iter()).map(|(m, c)| m * c).sum()
    }

    pub fn gradient(&self, p: &Point2<f64>) -> Vector2<f64> {
        self.basis
            .gradients(p)
            .iter()
            .zip(self.coeffs.iter())
            .fold(Vector2::zeros(), |acc, (g, c)| acc + g * *c)
    }

    pub fn evaluate(&self, points: &[Point2<f64>]) -> Vec<f64> {
        points.iter().map(|p| self.value(p)).collect()
    }

    pub fn gradient_at(&self, points: &[Point2<f64>]) -> Vec<Vector2<f64>> {
        points.iter().map(|p| self.gradient(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::ElementGeometry;
    use approx::assert_relative_eq;

    fn square() -> ElementGeometry {
        ElementGeometry::from_vertices(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
    }

    fn hexagon() -> ElementGeometry {
        ElementGeometry::from_vertices(
            (0..6)
                .map(|i| {
                    let t = std::f64::consts::PI / 3.0 * i as f64 + 0.2;
                    Point2::new(0.3 + t.cos(), -0.1 + 0.8 * t.sin())
                })
                .collect(),
        )
    }

    /// Green's theorem oracle: int_E x^a y^b = 1/(a+1) * sum_edges int_e x^(a+1) y^b n_x ds,
    /// in coordinates relative to the centroid and scaled by h.
    fn green_monomial_integral(g: &ElementGeometry, a: usize, b: usize) -> f64 {
        let rule = crate::quadrature::gauss_legendre(a + b + 2);
        let mut total = 0.0;
        for e in &g.edges {
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                let p = e.point_at(t);
                let xi = (p.x - g.centroid.x) / g.diameter;
                let eta = (p.y - g.centroid.y) / g.diameter;
                total += w * e.length * xi.powi(a as i32 + 1) * eta.powi(b as i32) * e.normal.x;
            }
        }
        // dx = h dxi
        total * g.diameter / (a as f64 + 1.0)
    }

    #[test]
    fn ordering_and_dimension() {
        let b = ScaledMonomialBasis::with_center(Point2::origin(), 1.0, 3);
        assert_eq!(b.dim(), 10);
        assert_eq!(b.exponents()[..6], [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        for (i, &(a, bb)) in b.exponents().iter().enumerate() {
            assert_eq!(monomial_index(a, bb), i);
        }
    }

    #[test]
    fn unit_square_integrals() {
        let g = square();
        let ints = integrate_monomials(&g, 2);
        assert_relative_eq!(ints[0], 1.0, epsilon = 1e-15);
        assert!(ints[1].abs() < 1e-15);
        // int (x - 1/2)^2 / h^2 = (1/12) / 2
        assert_relative_eq!(ints[3], 1.0 / 24.0, epsilon = 1e-15);
    }

    #[test]
    fn fan_quadrature_matches_green_oracle() {
        for g in [square(), hexagon()] {
            let k = 4;
            let ints = integrate_monomials(&g, 2 * k);
            let basis = ScaledMonomialBasis::new(&g, 2 * k);
            for (i, &(a, b)) in basis.exponents().iter().enumerate() {
                let oracle = green_monomial_integral(&g, a, b);
                assert!((ints[i] - oracle).abs() <= 1e-12 * g.area, "{a},{b}: {} vs {oracle}", ints[i]);
            }
        }
    }

    #[test]
    fn nonconvex_polygon_integrates_exactly() {
        // L-shaped hexagon: centroid fan has inverted triangles
        let g = ElementGeometry::from_vertices(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 0.2),
            Point2::new(0.2, 0.2),
            Point2::new(0.2, 2.0),
            Point2::new(0.0, 2.0),
        ]);
        let ints = integrate_monomials(&g, 6);
        let basis = ScaledMonomialBasis::new(&g, 6);
        for (i, &(a, b)) in basis.exponents().iter().enumerate() {
            let oracle = green_monomial_integral(&g, a, b);
            assert!((ints[i] - oracle).abs() <= 1e-12 * g.area);
        }
    }

    #[test]
    fn mass_matrix_small_cases() {
        let g = square();
        let h0 = monomial_mass_matrix(&g, 0);
        assert_eq!(h0.shape(), (1, 1));
        assert_relative_eq!(h0[(0, 0)], 1.0, epsilon = 1e-15);
        let h1 = monomial_mass_matrix(&g, 1);
        assert!(h1[(1, 2)].abs() < 1e-15);
        assert!(h1.clone().cholesky().is_some());
    }

    #[test]
    fn hexagon_mass_matches_monte_carlo() {
        use rand::{Rng, SeedableRng};
        let g = hexagon();
        let h = monomial_mass_matrix(&g, 2);
        assert!(h.clone().cholesky().is_some());
        let basis = ScaledMonomialBasis::new(&g, 2);
        let (lo, hi) = g.vertices.iter().fold((g.vertices[0], g.vertices[0]), |(l, u), v| (l.inf(v), u.sup(v)));
        let box_area = (hi.x - lo.x) * (hi.y - lo.y);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 2_000_000;
        let mut acc = DMatrix::<f64>::zeros(6, 6);
        for _ in 0..n {
            let p = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
            if crate::mesh::polygon_contains(&g.vertices, &p, 0.0) {
                let v = basis.eval(&p);
                for i in 0..6 {
                    for j in 0..6 {
                        acc[(i, j)] += v[i] * v[j];
                    }
                }
            }
        }
        acc *= box_area / n as f64;
        for i in 0..6 {
            for j in 0..6 {
                // Monte-Carlo noise ~ 1/sqrt(n) relative to the diagonal scale
                let scale = (h[(i, i)] * h[(j, j)]).sqrt();
                assert!((acc[(i, j)] - h[(i, j)]).abs() < 3e-3 * scale, "({i},{j})");
            }
        }
    }

    #[test]
    fn stiffness_kernel_is_constants() {
        let g = square();
        let s = monomial_stiffness_matrix(&g, 1);
        assert!(s.row(0).iter().all(|v| v.abs() < 1e-15));
        // grad m_(1,0) = (1/h, 0): int = |E| / h^2
        assert_relative_eq!(s[(1, 1)], 1.0 / 2.0, epsilon = 1e-14);
        assert_relative_eq!(s[(2, 2)], 1.0 / 2.0, epsilon = 1e-14);
        assert!(s[(1, 2)].abs() < 1e-15);

        let s3 = monomial_stiffness_matrix(&g, 3);
        let eig = s3.symmetric_eigen();
        let max = eig.eigenvalues.max();
        let zeros = eig.eigenvalues.iter().filter(|&&l| l.abs() < 1e-12 * max).count();
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-12 * max));
        assert_eq!(zeros, 1);
    }

    #[test]
    fn basis_scaling_and_centroid_values() {
        let g = hexagon();
        let b = ScaledMonomialBasis::new(&g, 3);
        let at_center = b.eval(&g.centroid);
        assert_eq!(at_center[0], 1.0);
        assert!(at_center[1..].iter().all(|v| v.abs() < 1e-15));
        let v = b.eval(&(g.centroid + Vector2::new(g.diameter, 0.0)));
        assert_relative_eq!(v[1], 1.0, epsilon = 1e-14);
        for p in g.vertices.iter().chain(g.edges.iter().map(|e| &e.start)) {
            assert!(b.eval(p).iter().all(|v| v.abs() <= 2.0));
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        let g = hexagon();
        let basis = ScaledMonomialBasis::new(&g, 3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let coeffs = DVector::from_fn(basis.dim(), |_, _| rng.gen_range(-1.0..1.0));
        let poly = PolynomialCoeffs::new(basis, coeffs);
        let p = g.centroid + Vector2::new(0.13, -0.07);
        let eps = 1e-5;
        let fd = Vector2::new(
            (poly.value(&(p + Vector2::new(eps, 0.0))) - poly.value(&(p - Vector2::new(eps, 0.0)))) / (2.0 * eps),
            (poly.value(&(p + Vector2::new(0.0, eps))) - poly.value(&(p - Vector2::new(0.0, eps)))) / (2.0 * eps),
        );
        let grad = poly.gradient(&p);
        assert!((grad - fd).norm() <= 1e-6 * grad.norm());
    }
}
