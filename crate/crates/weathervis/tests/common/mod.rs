//! Oracles shared by the integration tests. None of them call into the
//! intersection, graph or Mie code they are used to check.
#![allow(dead_code)]

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use weathervis::core::{Bvh, GridSpec, Node, TriangleMesh, Vec3, SELF_INTERSECTION_EPSILON};
use weathervis::scenes::Scene;

/// Extinction efficiency from the Mie series written with spherical Bessel
/// functions of complex argument:
///
/// `a_n = (m ψ_n(mx) ψ_n'(x) − ψ_n(x) ψ_n'(mx)) / (m ψ_n(mx) ξ_n'(x) − ξ_n(x) ψ_n'(mx))`
/// `b_n = (ψ_n(mx) ψ_n'(x) − m ψ_n(x) ψ_n'(mx)) / (ψ_n(mx) ξ_n'(x) − m ξ_n(x) ψ_n'(mx))`
///
/// with `ψ_n(z) = z j_n(z)` and `ξ_n(x) = x h_n⁽¹⁾(x)`. The sum runs until the
/// terms are below 1e-17 of the running total.
pub fn reference_mie_q(x: f64, m: Complex64) -> f64 {
    let terms = (x + 4.0 * x.cbrt() + 2.0).ceil() as usize + 40;
    let psi_x = riccati_psi(Complex64::new(x, 0.0), terms);
    let psi_mx = riccati_psi(m * x, terms);
    let xi_x = riccati_xi(x, terms);
    let xc = Complex64::new(x, 0.0);
    let mut total = 0.0;
    for n in 1..=terms {
        let nf = n as f64;
        let dpsi_x = psi_x[n - 1] - psi_x[n] * nf / xc;
        let dpsi_mx = psi_mx[n - 1] - psi_mx[n] * nf / (m * x);
        let dxi_x = xi_x[n - 1] - xi_x[n] * nf / xc;
        let a = (m * psi_mx[n] * dpsi_x - psi_x[n] * dpsi_mx)
            / (m * psi_mx[n] * dxi_x - xi_x[n] * dpsi_mx);
        let b = (psi_mx[n] * dpsi_x - m * psi_x[n] * dpsi_mx)
            / (psi_mx[n] * dxi_x - m * xi_x[n] * dpsi_mx);
        let term = (2.0 * nf + 1.0) * (a + b).re;
        if !term.is_finite() {
            break;
        }
        total += term;
        if n > terms - 40 && term.abs() < 1e-17 * total.abs() {
            break;
        }
    }
    2.0 * total / (x * x)
}

/// `ψ_0 ..= ψ_N` at `z`: ratios `j_n / j_{n−1}` by a downward continued
/// fraction started well above `N`, anchored at `j_0 = sin z / z`.
fn riccati_psi(z: Complex64, n_max: usize) -> Vec<Complex64> {
    let start = n_max + 20 + z.norm().ceil() as usize;
    let mut ratio = vec![Complex64::new(0.0, 0.0); start + 2];
    for n in (1..=start).rev() {
        ratio[n] = Complex64::new(1.0, 0.0) / ((2.0 * n as f64 + 1.0) / z - ratio[n + 1]);
    }
    let mut j = Vec::with_capacity(n_max + 1);
    j.push(z.sin() / z);
    for n in 1..=n_max {
        let prev = j[n - 1];
        j.push(prev * ratio[n]);
    }
    j.into_iter().map(|v| v * z).collect()
}

/// `ξ_0 ..= ξ_N` at real `x`, `ξ_n = ψ_n + i·x·y_n` with `y_n` by upward
/// recurrence.
fn riccati_xi(x: f64, n_max: usize) -> Vec<Complex64> {
    let psi = riccati_psi(Complex64::new(x, 0.0), n_max);
    let mut y = vec![-x.cos() / x, -x.cos() / (x * x) - x.sin() / x];
    for n in 1..n_max {
        let next = (2.0 * n as f64 + 1.0) / x * y[n] - y[n - 1];
        y.push(next);
    }
    (0..=n_max).map(|n| Complex64::new(psi[n].re, x * y[n])).collect()
}

/// Small-particle limit `Q = (8/3)·x⁴·|(m²−1)/(m²+2)|²` (scattering only,
/// which is all of extinction for a real index).
pub fn rayleigh_q(x: f64, m: f64) -> f64 {
    let k = (m * m - 1.0) / (m * m + 2.0);
    8.0 / 3.0 * x.powi(4) * k * k
}

fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite coordinate")
}

/// Sign of `det[b − a, c − a, d − a]` in exact rational arithmetic, with the
/// value converted to `f64`.
fn orientation(a: &[BigRational; 3], b: &[BigRational; 3], c: &[BigRational; 3], d: &[BigRational; 3]) -> BigRational {
    let sub = |u: &[BigRational; 3], v: &[BigRational; 3]| -> [BigRational; 3] {
        [&u[0] - &v[0], &u[1] - &v[1], &u[2] - &v[2]]
    };
    let (u, v, w) = (sub(b, a), sub(c, a), sub(d, a));
    &u[0] * (&v[1] * &w[2] - &v[2] * &w[1]) - &u[1] * (&v[0] * &w[2] - &v[2] * &w[0])
        + &u[2] * (&v[0] * &w[1] - &v[1] * &w[0])
}

fn exact(v: Vec3) -> [BigRational; 3] {
    [rational(v.x), rational(v.y), rational(v.z)]
}

/// Whether segment `p → q` touches the closed triangle `abc` inside the
/// open interval `(ε_self, |pq| − ε_self)`, decided in exact rational
/// arithmetic. A segment lying in the triangle's plane does not count.
pub fn segment_hits_triangle(p: Vec3, q: Vec3, a: Vec3, b: Vec3, c: Vec3) -> bool {
    let lo = p.min(q);
    let hi = p.max(q);
    let tri_lo = a.min(b).min(c);
    let tri_hi = a.max(b).max(c);
    let slack = 1e-6;
    if (0..3).any(|k| hi[k] < tri_lo[k] - slack || lo[k] > tri_hi[k] + slack) {
        return false;
    }
    let (p, q, a, b, c) = (exact(p), exact(q), exact(a), exact(b), exact(c));
    let sp = orientation(&a, &b, &c, &p);
    let sq = orientation(&a, &b, &c, &q);
    if (sp.is_positive() && sq.is_positive())
        || (sp.is_negative() && sq.is_negative())
        || (sp.is_zero() && sq.is_zero())
    {
        return false;
    }
    let e = [
        orientation(&p, &q, &a, &b),
        orientation(&p, &q, &b, &c),
        orientation(&p, &q, &c, &a),
    ];
    let inside = e.iter().all(|v| !v.is_negative()) || e.iter().all(|v| !v.is_positive());
    if !inside {
        return false;
    }
    let fraction = (&sp / (&sp - &sq)).to_f64().expect("finite");
    let length = ((&q[0] - &p[0]).to_f64().unwrap().powi(2)
        + (&q[1] - &p[1]).to_f64().unwrap().powi(2)
        + (&q[2] - &p[2]).to_f64().unwrap().powi(2))
    .sqrt();
    let t = fraction * length;
    t > SELF_INTERSECTION_EPSILON && t < length - SELF_INTERSECTION_EPSILON
}

pub fn brute_occluded(mesh: &TriangleMesh, p: Vec3, q: Vec3) -> bool {
    mesh.iter_triangles()
        .any(|t| segment_hits_triangle(p, q, t.a, t.b, t.c))
}

/// Every unobstructed pair `(i, j > i)` with its distance, by testing each
/// pair against every triangle.
pub fn brute_edges(mesh: &TriangleMesh, nodes: &[Node]) -> Vec<(u32, u32, f64)> {
    let mut edges = Vec::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if !brute_occluded(mesh, a.position, b.position) {
                edges.push((a.id, b.id, a.position.distance(b.position)));
            }
        }
    }
    edges
}

/// At most `limit` nodes spread evenly over the id range, renumbered from 0.
pub fn subsample(nodes: &[Node], limit: usize) -> Vec<Node> {
    let step = nodes.len().div_ceil(limit).max(1);
    nodes
        .iter()
        .step_by(step)
        .enumerate()
        .map(|(id, n)| Node {
            id: id as u32,
            position: n.position,
        })
        .collect()
}

pub fn scene_bvh(scene: &Scene) -> Bvh {
    Bvh::build(scene.mesh()).expect("shipped scenes are valid")
}

/// Lattice over the scene's footprint with the sampler's defaults.
pub fn scene_grid(scene: &Scene, spacing: f64) -> (GridSpec, Bvh, Vec<Node>) {
    let bvh = scene_bvh(scene);
    let b = bvh.mesh().bounds();
    let mut spec = GridSpec::new(
        weathervis::core::sampling::Bounds2::new(b.min.x, b.min.y, b.max.x, b.max.y),
        spacing,
    );
    spec.drop_height = Some(b.max.z + 1.0);
    let nodes = weathervis::core::generate_grid(&spec, &bvh).expect("grid");
    (spec, bvh, nodes)
}
