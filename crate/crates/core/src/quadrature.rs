//! One-dimensional Gauss rules and polygon quadrature by centroid fans.
//!
//! Every rule is built once and cached; all nodes live on `[0, 1]` (1D) or
//! on the reference triangle `(0,0), (1,0), (0,1)` (2D).

use std::sync::OnceLock;

use nalgebra::Point2;

use crate::mesh::ElementGeometry;

const MAX_POINTS: usize = 64;

/// Quadrature rule on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint limit of P_n'
        0.5 * nf * (nf + 1.0) * x.powi(n as i32 + 1)
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

fn build_gauss_legendre(n: usize) -> Rule1d {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess, then Newton.
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = 0.5 * (x + 1.0);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    Rule1d { nodes, weights }
}

fn build_gauss_lobatto(n: usize) -> Rule1d {
    assert!(n >= 2, "Gauss-Lobatto needs at least two points");
    let m = n - 1;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let end_weight = 1.0 / (n as f64 * m as f64);
    nodes[0] = 0.0;
    nodes[m] = 1.0;
    weights[0] = end_weight;
    weights[m] = end_weight;
    // interior nodes are roots of P_m'
    for i in 1..m {
        let mut x = -(std::f64::consts::PI * i as f64 / m as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            // P_m'' from the Legendre ODE: (1-x^2) P'' = 2x P' - m(m+1) P
            let d2p = (2.0 * x * dp - (m * (m + 1)) as f64 * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (p, _) = legendre(m, x);
        nodes[i] = 0.5 * (x + 1.0);
        weights[i] = end_weight / (p * p);
    }
    Rule1d { nodes, weights }
}

fn cached<T>(cache: &'static [OnceLock<T>], n: usize, build: impl FnOnce() -> T) -> &'static T {
    cache
        .get(n)
        .unwrap_or_else(|| panic!("quadrature size {n} exceeds cache"))
        .get_or_init(build)
}

static GL_CACHE: [OnceLock<Rule1d>; MAX_POINTS + 1] = [const { OnceLock::new() }; MAX_POINTS + 1];
static GLL_CACHE: [OnceLock<Rule1d>; MAX_POINTS + 1] = [const { OnceLock::new() }; MAX_POINTS + 1];
static TRI_CACHE: [OnceLock<TriangleRule>; 2 * MAX_POINTS] = [const { OnceLock::new() }; 2 * MAX_POINTS];

/// `n`-point Gauss–Legendre rule on `[0, 1]`, exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> &'static Rule1d {
    assert!(n >= 1);
    cached(&GL_CACHE, n, || build_gauss_legendre(n))
}

/// `n`-point Gauss–Lobatto rule on `[0, 1]` including both endpoints, exact for
/// degree `2n - 3`.
pub fn gauss_lobatto(n: usize) -> &'static Rule1d {
    cached(&GLL_CACHE, n, || build_gauss_lobatto(n))
}

/// Smallest Gauss–Legendre rule exact for polynomials of `degree`.
pub fn gauss_legendre_for_degree(degree: usize) -> &'static Rule1d {
    gauss_legendre(degree / 2 + 1)
}

/// Rule on the reference triangle; weights sum to 1/2.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

/// Collapsed (Duffy) tensor Gauss rule on the reference triangle, exact for
/// polynomials of total degree `degree`.
pub fn triangle_rule(degree: usize) -> &'static TriangleRule {
    cached(&TRI_CACHE, degree, || {
        // The collapse adds one power of (1 - v) from the Jacobian.
        let gu = gauss_legendre_for_degree(degree);
        let gv = gauss_legendre_for_degree(degree + 1);
        let mut points = Vec::with_capacity(gu.nodes.len() * gv.nodes.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for (&v, &wv) in gv.nodes.iter().zip(&gv.weights) {
            for (&u, &wu) in gu.nodes.iter().zip(&gu.weights) {
                points.push([u * (1.0 - v), v]);
                weights.push(wu * wv * (1.0 - v));
            }
        }
        TriangleRule { points, weights }
    })
}

/// Quadrature points and (possibly signed) weights covering a polygon.
#[derive(Debug, Clone)]
pub struct PolygonRule {
    pub points: Vec<Point2<f64>>,
    pub weights: Vec<f64>,
}

impl PolygonRule {
    pub fn integrate(&self, f: impl Fn(&Point2<f64>) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

/// Fan rule from an interior anchor over an arbitrary simple polygon.
///
/// Sub-triangle weights carry the signed area, so the rule stays exact for
/// polynomials of `degree` even when some fan triangles are inverted.
pub fn polygon_rule_from_vertices(vertices: &[Point2<f64>], anchor: Point2<f64>, degree: usize) -> PolygonRule {
    let tri = triangle_rule(degree);
    let n = vertices.len();
    let mut points = Vec::with_capacity(n * tri.points.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let e1 = a - anchor;
        let e2 = b - anchor;
        let det = e1.x * e2.y - e1.y * e2.x;
        if det < 0.0 {
            log::debug!("fan triangle with negative area; using signed weights");
        }
        for (p, &w) in tri.points.iter().zip(&tri.weights) {
            points.push(anchor + e1 * p[0] + e2 * p[1]);
            weights.push(w * det);
        }
    }
    PolygonRule { points, weights }
}

/// Centroid-fan rule on an element, exact for polynomials of `degree`.
pub fn polygon_rule(geom: &ElementGeometry, degree: usize) -> PolygonRule {
    polygon_rule_from_vertices(&geom.vertices, geom.centroid, degree)
}
