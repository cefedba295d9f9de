//! Manufactured-solution oracle for the impedance Helmholtz problem.
//!
//! Loads and errors are integrated with a degree-5 7-point triangle rule and
//! a 3-point Gauss rule on boundary edges, independent of the P1 assembly in
//! the library.

use std::f64::consts::PI;
use std::sync::Arc;

use srcid::helmholtz::{AssembledSystem, HelmholtzParams};
use srcid::mesh::StructuredTriMesh;
use srcid::{Complex64, Point2};

const TRI_RULE: [(f64, f64, f64); 7] = {
    const A1: f64 = 0.059_715_871_789_770;
    const B1: f64 = 0.470_142_064_105_115;
    const A2: f64 = 0.797_426_985_353_087;
    const B2: f64 = 0.101_286_507_323_456;
    const W1: f64 = 0.132_394_152_788_506;
    const W2: f64 = 0.125_939_180_544_827;
    [
        (1.0 / 3.0, 1.0 / 3.0, 0.225),
        (A1, B1, W1),
        (B1, A1, W1),
        (B1, B1, W1),
        (A2, B2, W2),
        (B2, A2, W2),
        (B2, B2, W2),
    ]
};

const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// `y*(x, y) = (1 + i) cos(πx) sin(2πy) + x² − i y`.
pub fn exact(p: Point2) -> Complex64 {
    let c = Complex64::new(1.0, 1.0);
    c * ((PI * p.x).cos() * (2.0 * PI * p.y).sin()) + p.x * p.x - Complex64::new(0.0, p.y)
}

fn gradient(p: Point2) -> (Complex64, Complex64) {
    let c = Complex64::new(1.0, 1.0);
    let dx = c * (-PI * (PI * p.x).sin() * (2.0 * PI * p.y).sin()) + 2.0 * p.x;
    let dy = c * (2.0 * PI * (PI * p.x).cos() * (2.0 * PI * p.y).cos()) - Complex64::new(0.0, 1.0);
    (dx, dy)
}

/// `f = −Δy* − k²y*`.
fn forcing(p: Point2, k2: f64) -> Complex64 {
    let c = Complex64::new(1.0, 1.0);
    let laplacian = c * (-5.0 * PI * PI * (PI * p.x).cos() * (2.0 * PI * p.y).sin()) + 2.0;
    -laplacian - exact(p) * k2
}

fn corners(mesh: &StructuredTriMesh, t: usize) -> [Point2; 3] {
    let tri = mesh.triangles()[t];
    [mesh.nodes()[tri[0]], mesh.nodes()[tri[1]], mesh.nodes()[tri[2]]]
}

fn at(p: [Point2; 3], l1: f64, l2: f64) -> Point2 {
    let l0 = 1.0 - l1 - l2;
    Point2::new(l0 * p[0].x + l1 * p[1].x + l2 * p[2].x, l0 * p[0].y + l1 * p[1].y + l2 * p[2].y)
}

/// Discrete solution of the manufactured problem on the unit square with an
/// impedance boundary everywhere.
pub fn solve(n_div: usize, params: HelmholtzParams) -> (AssembledSystem, Vec<Complex64>) {
    let mesh = Arc::new(StructuredTriMesh::unit_square(n_div).unwrap());
    let system = AssembledSystem::assemble(mesh.clone(), params).unwrap();
    let k2 = params.wavenumber_sq();
    let imp = params.impedance_coefficient();
    let mut b = vec![Complex64::default(); mesh.n_nodes()];
    for t in 0..mesh.triangles().len() {
        let p = corners(&mesh, t);
        let area = mesh.signed_area(t).abs();
        let tri = mesh.triangles()[t];
        for &(l1, l2, w) in &TRI_RULE {
            let f = forcing(at(p, l1, l2), k2) * (w * area);
            let phi = [1.0 - l1 - l2, l1, l2];
            for a in 0..3 {
                b[tri[a]] += f * phi[a];
            }
        }
    }
    // Impedance data g = ∂_ν y* − (iζρ/γ) y*.
    for e in mesh.boundary_edges() {
        let (p, q) = (mesh.nodes()[e.nodes[0]], mesh.nodes()[e.nodes[1]]);
        let len = p.dist(q);
        let mid = Point2::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
        let normal = if mid.x == 0.0 {
            (-1.0, 0.0)
        } else if mid.x == 1.0 {
            (1.0, 0.0)
        } else if mid.y == 0.0 {
            (0.0, -1.0)
        } else {
            (0.0, 1.0)
        };
        for &(s, w) in &GAUSS3 {
            let t = 0.5 * (s + 1.0);
            let x = Point2::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y));
            let (gx, gy) = gradient(x);
            let g = gx * normal.0 + gy * normal.1 - imp * exact(x);
            let scale = 0.5 * w * len;
            b[e.nodes[0]] += g * ((1.0 - t) * scale);
            b[e.nodes[1]] += g * (t * scale);
        }
    }
    let y = system.solve(&b).unwrap();
    (system, y)
}

/// `‖y_h − y*‖_{L²}`.
pub fn l2_error(mesh: &StructuredTriMesh, y: &[Complex64]) -> f64 {
    let mut total = 0.0;
    for t in 0..mesh.triangles().len() {
        let p = corners(mesh, t);
        let area = mesh.signed_area(t).abs();
        let tri = mesh.triangles()[t];
        for &(l1, l2, w) in &TRI_RULE {
            let yh = y[tri[0]] * (1.0 - l1 - l2) + y[tri[1]] * l1 + y[tri[2]] * l2;
            total += w * area * (yh - exact(at(p, l1, l2))).norm_sqr();
        }
    }
    total.sqrt()
}

/// Observed L² orders between successive levels `n_divs`.
pub fn observed_orders(n_divs: &[usize], params: HelmholtzParams) -> (Vec<f64>, Vec<f64>) {
    let errors: Vec<f64> = n_divs
        .iter()
        .map(|&n| {
            let (system, y) = solve(n, params);
            l2_error(system.mesh(), &y)
        })
        .collect();
    let orders = errors
        .windows(2)
        .zip(n_divs.windows(2))
        .map(|(e, n)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect();
    (errors, orders)
}
