//! P1 Galerkin discretization of the Helmholtz equation
//!
//! ```text
//!   −Δy − (ζ/c)² y = τ(u)          in D
//!   ∂ν y − i(ζρ/γ_ζ) y = 0          on Γ_Z
//!   ∂ν y = g                        on Γ_N
//! ```
//!
//! The system matrix `A_ij = ∫∇φ_j·∇φ_i − (ζ/c)²∫φ_jφ_i − (iζρ/γ_ζ)∫_{Γ_Z}φ_jφ_i`
//! is complex symmetric (not Hermitian). All element integrals are exact
//! closed-form P1 formulas. One banded LU factorization per (mesh, params)
//! serves every solve.
//!
//! Point observations never require per-sample solves: since `A = Aᵀ`, the
//! value of the discrete solution at a measurement point `z` is
//! `e(z)ᵀA⁻¹b = bᵀ(A⁻¹e(z))`, so one representer `r = A⁻¹e(z)` per
//! measurement point turns every forward evaluation into an `O(k·m)` sum.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::band::BandLu;
use crate::error::{Error, Result};
use crate::geom::{Point2, Rect};
use crate::mesh::{BoundaryTag, HatValues, StructuredTriMesh, Tagging};
use crate::model::{SourceConfig, SourceDomain};
use crate::sparse::{norm2, CsrMatrix};

/// Relative residual every direct solve must meet.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelmholtzParams {
    /// Angular frequency ζ.
    pub zeta: f64,
    /// Speed of sound c.
    pub c: f64,
    /// Fluid density ρ.
    pub rho: f64,
    /// Viscous wall coefficient α_ζ.
    pub alpha_zeta: f64,
    /// Elastic wall coefficient β_ζ (must be non-zero).
    pub beta_zeta: f64,
}

impl HelmholtzParams {
    pub fn new(zeta: f64, c: f64, rho: f64, alpha_zeta: f64, beta_zeta: f64) -> Result<Self> {
        let p = Self {
            zeta,
            c,
            rho,
            alpha_zeta,
            beta_zeta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Room-acoustics parameter block used by the shipped experiments.
    pub fn reference() -> Self {
        Self {
            zeta: 30.0,
            c: 5.0,
            rho: 1.0,
            alpha_zeta: 1.0,
            beta_zeta: 1.0 / 30.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(alloc::format!("{name} must be positive, got {v}")))
            }
        };
        positive(self.zeta, "zeta")?;
        positive(self.c, "c")?;
        positive(self.rho, "rho")?;
        positive(self.alpha_zeta, "alpha_zeta")?;
        if !self.beta_zeta.is_finite() || self.beta_zeta == 0.0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "beta_zeta must be finite and non-zero, got {}",
                self.beta_zeta
            )));
        }
        Ok(())
    }

    /// Wall impedance γ_ζ = β_ζ + (α_ζ/ζ)·i.
    pub fn gamma(&self) -> Complex64 {
        Complex64::new(self.beta_zeta, self.alpha_zeta / self.zeta)
    }

    /// (ζ/c)².
    pub fn wavenumber_sq(&self) -> f64 {
        let k = self.zeta / self.c;
        k * k
    }

    /// iζρ/γ_ζ, the coefficient of the impedance boundary mass.
    pub fn impedance_coefficient(&self) -> Complex64 {
        Complex64::new(0.0, self.zeta * self.rho) / self.gamma()
    }
}

/// Exact P1 stiffness matrix of one triangle.
pub fn element_stiffness(p: [Point2; 3]) -> [[f64; 3]; 3] {
    let area2 = (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y);
    let mut b = [0.0; 3];
    let mut c = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        b[i] = p[j].y - p[k].y;
        c[i] = p[k].x - p[j].x;
    }
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (b[i] * b[j] + c[i] * c[j]) / (2.0 * area2.abs());
        }
    }
    out
}

/// Exact P1 mass matrix of one triangle.
pub fn element_mass(p: [Point2; 3]) -> [[f64; 3]; 3] {
    let area = 0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y)).abs();
    let mut out = [[area / 12.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = area / 6.0;
    }
    out
}

/// Exact P1 mass matrix of one boundary edge.
pub fn edge_mass(length: f64) -> [[f64; 2]; 2] {
    [[length / 3.0, length / 6.0], [length / 6.0, length / 3.0]]
}

/// Assembles `Σ_T cell·M_T + Σ_{e ⊂ Γ_Z} edge·M_e` into a symmetric matrix,
/// where `cell` combines the element stiffness and mass matrices.
fn assemble_with(
    mesh: &StructuredTriMesh,
    cell: impl Fn(&[[f64; 3]; 3], &[[f64; 3]; 3]) -> [[Complex64; 3]; 3],
    edge_coefficient: Option<Complex64>,
) -> CsrMatrix {
    let nodes = mesh.nodes();
    let mut triplets = Vec::with_capacity(mesh.triangles().len() * 6 + mesh.boundary_edges().len() * 3);
    for tri in mesh.triangles() {
        let pts = tri.map(|k| nodes[k]);
        let local = cell(&element_stiffness(pts), &element_mass(pts));
        for a in 0..3 {
            for b in 0..3 {
                let (i, j) = (tri[a], tri[b]);
                if i <= j {
                    triplets.push((i, j, local[a][b]));
                }
            }
        }
    }
    if let Some(coef) = edge_coefficient {
        for e in mesh.boundary_edges().iter().filter(|e| e.tag == BoundaryTag::Impedance) {
            let len = nodes[e.nodes[0]].dist(nodes[e.nodes[1]]);
            let local = edge_mass(len);
            for a in 0..2 {
                for b in 0..2 {
                    let (i, j) = (e.nodes[a], e.nodes[b]);
                    if i <= j {
                        triplets.push((i, j, coef * local[a][b]));
                    }
                }
            }
        }
    }
    CsrMatrix::from_upper_triplets(mesh.n_nodes(), triplets)
}

fn real(m: &[[f64; 3]; 3]) -> [[Complex64; 3]; 3] {
    m.map(|row| row.map(|v| Complex64::new(v, 0.0)))
}

/// Stiffness matrix `∫∇φ_j·∇φ_i` alone.
pub fn stiffness_matrix(mesh: &StructuredTriMesh) -> CsrMatrix {
    assemble_with(mesh, |k, _| real(k), None)
}

/// Mass matrix `∫φ_jφ_i` alone.
pub fn mass_matrix(mesh: &StructuredTriMesh) -> CsrMatrix {
    assemble_with(mesh, |_, m| real(m), None)
}

/// Impedance boundary mass `∫_{Γ_Z}φ_jφ_i` alone.
pub fn impedance_boundary_matrix(mesh: &StructuredTriMesh) -> CsrMatrix {
    assemble_with(mesh, |_, _| [[Complex64::default(); 3]; 3], Some(Complex64::new(1.0, 0.0)))
}

/// Neumann data `g` as a function of the boundary point.
pub type NeumannData<'a> = &'a (dyn Fn(Point2) -> Complex64 + Sync);

fn residual_check(matrix: &CsrMatrix, x: &[Complex64], b: &[Complex64]) -> Result<()> {
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(());
    }
    let ax = matrix.mul_vec(x);
    let r: Vec<Complex64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let rel = norm2(&r) / b_norm;
    if rel.is_finite() && rel <= SOLVE_TOLERANCE {
        Ok(())
    } else {
        Err(Error::Residual {
            residual: rel,
            tolerance: SOLVE_TOLERANCE,
        })
    }
}

/// Factorized Galerkin system for one mesh and one parameter set.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    mesh: Arc<StructuredTriMesh>,
    params: HelmholtzParams,
    matrix: CsrMatrix,
    lu: BandLu,
}

impl AssembledSystem {
    pub fn assemble(mesh: Arc<StructuredTriMesh>, params: HelmholtzParams) -> Result<Self> {
        params.validate()?;
        let k2 = params.wavenumber_sq();
        let matrix = assemble_with(
            &mesh,
            |k, m| {
                let mut out = [[Complex64::default(); 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        out[i][j] = Complex64::new(k[i][j] - k2 * m[i][j], 0.0);
                    }
                }
                out
            },
            Some(-params.impedance_coefficient()),
        );
        let lu = BandLu::factorize(&matrix, mesh.bandwidth())?;
        Ok(Self {
            mesh,
            params,
            matrix,
            lu,
        })
    }

    pub fn mesh(&self) -> &Arc<StructuredTriMesh> {
        &self.mesh
    }

    pub fn params(&self) -> &HelmholtzParams {
        &self.params
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Solves `A y = b`, checking the relative residual.
    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let y = self.lu.solve(rhs)?;
        residual_check(&self.matrix, &y, rhs)?;
        Ok(y)
    }

    /// Load vector `b_i = Σ_ℓ α_ℓ φ_i(x_ℓ)` of a source configuration.
    pub fn source_load(&self, u: &SourceConfig) -> Result<Vec<Complex64>> {
        let mut b = alloc::vec![Complex64::default(); self.mesh.n_nodes()];
        for s in u.sources() {
            let hat = self.mesh.hat_values(s.position)?;
            for (node, v) in hat.iter() {
                b[node] += s.amplitude * v;
            }
        }
        Ok(b)
    }

    /// Boundary load `∫_{Γ_N} g φ_i dS`, midpoint rule per edge.
    pub fn neumann_load(&self, g: NeumannData<'_>) -> Vec<Complex64> {
        let nodes = self.mesh.nodes();
        let mut b = alloc::vec![Complex64::default(); self.mesh.n_nodes()];
        for e in self.mesh.boundary_edges().iter().filter(|e| e.tag == BoundaryTag::Neumann) {
            let (p, q) = (nodes[e.nodes[0]], nodes[e.nodes[1]]);
            let mid = Point2::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
            let half = g(mid) * (0.5 * p.dist(q));
            b[e.nodes[0]] += half;
            b[e.nodes[1]] += half;
        }
        b
    }

    /// Discrete solution `y_{u,h}` for a finite source configuration.
    pub fn solve_sources(&self, u: &SourceConfig, g: Option<NeumannData<'_>>) -> Result<Vec<Complex64>> {
        let mut b = self.source_load(u)?;
        if let Some(g) = g {
            for (bi, gi) in b.iter_mut().zip(self.neumann_load(g)) {
                *bi += gi;
            }
        }
        if b.iter().all(|v| *v == Complex64::default()) {
            return Ok(b);
        }
        self.solve(&b)
    }

    /// Nodal vector of the discrete Green's function `G_h^x = A⁻¹e(x)`.
    pub fn green(&self, x: Point2) -> Result<Vec<Complex64>> {
        let hat = self.mesh.hat_values(x)?;
        let mut b = alloc::vec![Complex64::default(); self.mesh.n_nodes()];
        for (node, v) in hat.iter() {
            b[node] += Complex64::new(v, 0.0);
        }
        self.solve(&b)
    }

    /// Evaluates `G_h^x(z)`.
    pub fn green_value(&self, x: Point2, z: Point2) -> Result<Complex64> {
        let g = self.green(x)?;
        Ok(self.mesh.hat_values(z)?.interpolate(&g))
    }

    /// Evaluates a nodal vector at a point.
    pub fn evaluate(&self, nodal: &[Complex64], p: Point2) -> Result<Complex64> {
        Ok(self.mesh.hat_values(p)?.interpolate(nodal))
    }
}

/// Real mass matrix and its factorization, for discrete Dirac representers.
#[derive(Debug, Clone)]
pub struct MassSystem {
    mesh: Arc<StructuredTriMesh>,
    matrix: CsrMatrix,
    lu: BandLu,
}

impl MassSystem {
    pub fn new(mesh: Arc<StructuredTriMesh>) -> Result<Self> {
        let matrix = mass_matrix(&mesh);
        let lu = BandLu::factorize(&matrix, mesh.bandwidth())?;
        Ok(Self { mesh, matrix, lu })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Nodal coefficients of `δ_{x,h}`: the solution of `M c = e(x)`.
    pub fn discrete_dirac(&self, x: Point2) -> Result<Vec<Complex64>> {
        let hat = self.mesh.hat_values(x)?;
        let mut e = alloc::vec![Complex64::default(); self.mesh.n_nodes()];
        for (node, v) in hat.iter() {
            e[node] += Complex64::new(v, 0.0);
        }
        let c = self.lu.solve(&e)?;
        residual_check(&self.matrix, &c, &e)?;
        Ok(c)
    }

    /// `∫ f ḡ dx` for two nodal vectors.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        let mf = self.matrix.mul_vec(f);
        mf.iter().zip(g).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn l2_norm(&self, f: &[Complex64]) -> f64 {
        crate::math::sqrt(self.inner(f, f).re.max(0.0))
    }
}

/// Representers of point evaluation at the measurement points.
///
/// Node-major layout: `values[node·m + j]` is entry `node` of `A⁻¹e(z_j)`.
#[derive(Debug, Clone)]
pub struct ObservationCache {
    mesh: Arc<StructuredTriMesh>,
    points: Vec<Point2>,
    values: Vec<Complex64>,
    neumann_offset: Vec<Complex64>,
}

impl ObservationCache {
    /// Precomputes one representer per point after checking that every point
    /// lies in the measurement domain of `sources`.
    pub fn build(
        system: &AssembledSystem,
        points: &[Point2],
        sources: &SourceDomain,
        g: Option<NeumannData<'_>>,
    ) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            sources.check_measurement_point(i, *p)?;
        }
        Self::build_unchecked(system, points, g)
    }

    /// As [`ObservationCache::build`] without the measurement-domain check.
    pub fn build_unchecked(system: &AssembledSystem, points: &[Point2], g: Option<NeumannData<'_>>) -> Result<Self> {
        let n = system.mesh.n_nodes();
        let m = points.len();
        let mut values = alloc::vec![Complex64::default(); n * m];
        let neumann = g.map(|g| system.neumann_load(g));
        let mut neumann_offset = alloc::vec![Complex64::default(); m];
        for (j, z) in points.iter().enumerate() {
            let r = system.green(*z)?;
            for (node, v) in r.iter().enumerate() {
                values[node * m + j] = *v;
            }
            if let Some(b) = &neumann {
                neumann_offset[j] = r.iter().zip(b).map(|(a, b)| a * b).sum();
            }
        }
        Ok(Self {
            mesh: system.mesh.clone(),
            points: points.to_vec(),
            values,
            neumann_offset,
        })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mesh(&self) -> &Arc<StructuredTriMesh> {
        &self.mesh
    }

    pub fn neumann_offset(&self) -> &[Complex64] {
        &self.neumann_offset
    }

    /// Representer `A⁻¹e(z_j)` as a nodal vector.
    pub fn representer(&self, j: usize) -> Vec<Complex64> {
        let m = self.points.len();
        (0..self.mesh.n_nodes()).map(|node| self.values[node * m + j]).collect()
    }

    /// Adds `α · (interpolated representers at x)` into `out`.
    #[inline]
    fn accumulate(&self, hat: &HatValues, amplitude: Complex64, out: &mut [Complex64]) {
        let m = self.points.len();
        for (node, w) in hat.iter() {
            if w == 0.0 {
                continue;
            }
            let coef = amplitude * w;
            let row = &self.values[node * m..(node + 1) * m];
            for (o, r) in out.iter_mut().zip(row) {
                *o += coef * r;
            }
        }
    }

    /// `G_h(u)` written into `out` (length m).
    pub fn observe_into(&self, u: &SourceConfig, out: &mut [Complex64]) -> Result<()> {
        if out.len() != self.points.len() {
            return Err(Error::Dimension {
                expected: self.points.len(),
                got: out.len(),
            });
        }
        out.copy_from_slice(&self.neumann_offset);
        for s in u.sources() {
            let hat = self.mesh.hat_values(s.position)?;
            self.accumulate(&hat, s.amplitude, out);
        }
        Ok(())
    }

    /// `G_h(u) = (y_{u,h}(z_j))_j` without any linear solve.
    pub fn observe(&self, u: &SourceConfig) -> Result<Vec<Complex64>> {
        let mut out = alloc::vec![Complex64::default(); self.points.len()];
        self.observe_into(u, &mut out)?;
        Ok(out)
    }

    /// `G_h^x(z_j)` for every measurement point.
    pub fn green_at(&self, x: Point2) -> Result<Vec<Complex64>> {
        let mut out = alloc::vec![Complex64::default(); self.points.len()];
        let hat = self.mesh.hat_values(x)?;
        self.accumulate(&hat, Complex64::new(1.0, 0.0), &mut out);
        Ok(out)
    }
}

/// One mesh level of a pointwise Green's-function error study.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseErrorRow {
    pub n_div: usize,
    pub h: f64,
    /// `|G_h^x(z) − G_{h_ref}^x(z)|` per (x, z) pair.
    pub errors: Vec<f64>,
    pub mean_error: f64,
}

/// `G_h^x(z)` for every pair on one mesh, sharing the factorization.
pub fn green_values(system: &AssembledSystem, pairs: &[(Point2, Point2)]) -> Result<Vec<Complex64>> {
    pairs.iter().map(|&(x, z)| system.green_value(x, z)).collect()
}

/// Self-convergence study of discrete Green's function point values against
/// a reference mesh with `n_ref` subdivisions.
pub fn pointwise_error_study(
    domain: Rect,
    tagging: Tagging,
    params: HelmholtzParams,
    pairs: &[(Point2, Point2)],
    n_divs: &[usize],
    n_ref: usize,
) -> Result<Vec<PointwiseErrorRow>> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("pointwise study needs at least one (x, z) pair".into()));
    }
    let reference_mesh = Arc::new(StructuredTriMesh::build(domain, n_ref, tagging)?);
    let reference = green_values(&AssembledSystem::assemble(reference_mesh, params)?, pairs)?;
    let mut rows = Vec::with_capacity(n_divs.len());
    for &n_div in n_divs {
        if n_div > n_ref {
            return Err(Error::InvalidParameter(alloc::format!(
                "study mesh with {n_div} subdivisions is finer than the reference ({n_ref})"
            )));
        }
        let mesh = Arc::new(StructuredTriMesh::build(domain, n_div, tagging)?);
        let h = mesh.h();
        let values = green_values(&AssembledSystem::assemble(mesh, params)?, pairs)?;
        let errors: Vec<f64> = values.iter().zip(&reference).map(|(a, b)| (a - b).norm()).collect();
        let mean_error = errors.iter().sum::<f64>() / errors.len() as f64;
        rows.push(PointwiseErrorRow {
            n_div,
            h,
            errors,
            mean_error,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Source;
    use rand::{Rng, SeedableRng};

    fn unit(n: usize) -> Arc<StructuredTriMesh> {
        Arc::new(StructuredTriMesh::unit_square(n).unwrap())
    }

    #[test]
    fn impedance_coefficient_closed_form() {
        let p = HelmholtzParams::reference();
        assert!((p.gamma() - Complex64::new(1.0, 1.0) / 30.0).norm() < 1e-15);
        assert!((p.impedance_coefficient() - Complex64::new(450.0, 450.0)).norm() < 1e-10);
        assert!((p.wavenumber_sq() - 36.0).abs() < 1e-12);
    }

    #[test]
    fn zero_beta_rejected() {
        assert!(HelmholtzParams::new(30.0, 5.0, 1.0, 1.0, 0.0).is_err());
        assert!(HelmholtzParams::new(-1.0, 5.0, 1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn stiffness_on_two_triangles_matches_hand_assembly() {
        let k = stiffness_matrix(&unit(1));
        // Nodes: 0=(0,0), 1=(1,0), 2=(0,1), 3=(1,1); diagonal 0–3.
        let expected = [
            [1.0, -0.5, -0.5, 0.0],
            [-0.5, 1.0, 0.0, -0.5],
            [-0.5, 0.0, 1.0, -0.5],
            [0.0, -0.5, -0.5, 1.0],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert!((k.get(i, j).re - v).abs() < 1e-15, "({i},{j})");
                assert_eq!(k.get(i, j).im, 0.0);
            }
        }
    }

    #[test]
    fn mass_and_boundary_totals() {
        let mesh = unit(5);
        let m = mass_matrix(&mesh);
        let total: f64 = m.iter().map(|(_, _, v)| v.re).sum();
        assert!((total - 1.0).abs() < 1e-13);
        let b = impedance_boundary_matrix(&mesh);
        let perimeter: f64 = b.iter().map(|(_, _, v)| v.re).sum();
        assert!((perimeter - 4.0).abs() < 1e-13);
    }

    #[test]
    fn system_is_complex_symmetric_not_hermitian() {
        let sys = AssembledSystem::assemble(unit(8), HelmholtzParams::reference()).unwrap();
        assert_eq!(sys.matrix().max_asymmetry(), 0.0);
        assert!(sys.matrix().max_non_hermitian() > 0.0);
        assert!(sys.matrix().max_half_bandwidth() <= sys.mesh().bandwidth());
    }

    #[test]
    fn empty_configuration_gives_zero() {
        let sys = AssembledSystem::assemble(unit(4), HelmholtzParams::reference()).unwrap();
        let y = sys.solve_sources(&SourceConfig::empty(), None).unwrap();
        assert!(y.iter().all(|v| *v == Complex64::default()));
    }

    #[test]
    fn solution_is_linear_in_amplitudes() {
        let sys = AssembledSystem::assemble(unit(8), HelmholtzParams::reference()).unwrap();
        let u = SourceConfig::new(alloc::vec![
            Source::new(Complex64::new(1.0, 2.0), Point2::new(0.3, 0.7)),
            Source::new(Complex64::new(-0.5, 0.1), Point2::new(0.61, 0.8)),
        ]);
        let lambda = Complex64::new(-2.5, 0.75);
        let scaled = SourceConfig::new(u.sources().iter().map(|s| Source::new(s.amplitude * lambda, s.position)).collect());
        let y = sys.solve_sources(&u, None).unwrap();
        let ys = sys.solve_sources(&scaled, None).unwrap();
        let scale = norm2(&y);
        for (a, b) in y.iter().zip(&ys) {
            assert!((a * lambda - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn source_outside_domain_rejected() {
        let sys = AssembledSystem::assemble(unit(4), HelmholtzParams::reference()).unwrap();
        let u = SourceConfig::new(alloc::vec![Source::new(Complex64::new(1.0, 0.0), Point2::new(1.5, 0.5))]);
        assert!(matches!(sys.solve_sources(&u, None), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn discrete_dirac_reproduces_point_values() {
        let mesh = unit(10);
        let mass = MassSystem::new(mesh.clone()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let x = Point2::new(0.37, 0.81);
        let delta = mass.discrete_dirac(x).unwrap();
        for _ in 0..50 {
            let v: Vec<Complex64> = (0..mesh.n_nodes())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let lhs = mass.inner(&delta, &v);
            let point = mesh.hat_values(x).unwrap().interpolate(&v).conj();
            assert!((lhs - point).norm() <= 1e-10 * norm2(&v));
        }
    }

    #[test]
    fn discrete_dirac_bounded_and_lipschitz() {
        let mesh = unit(8);
        let mass = MassSystem::new(mesh).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut max_norm: f64 = 0.0;
        let mut max_lip: f64 = 0.0;
        for _ in 0..50 {
            let x = Point2::new(rng.random::<f64>(), rng.random::<f64>());
            max_norm = max_norm.max(mass.l2_norm(&mass.discrete_dirac(x).unwrap()));
        }
        for _ in 0..20 {
            let x1 = Point2::new(rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
            let x2 = x1 + Point2::new(rng.random_range(-0.01..0.01), rng.random_range(-0.01..0.01));
            let d1 = mass.discrete_dirac(x1).unwrap();
            let d2 = mass.discrete_dirac(x2).unwrap();
            let diff: Vec<Complex64> = d1.iter().zip(&d2).map(|(a, b)| a - b).collect();
            max_lip = max_lip.max(mass.l2_norm(&diff) / x1.dist(x2));
        }
        // The L² norm of δ_{x,h} scales like 1/h; both constants must be finite.
        assert!(max_norm.is_finite() && max_norm < 10.0 * 8.0);
        assert!(max_lip.is_finite() && max_lip > 0.0);
    }

    #[test]
    fn pointwise_study_reference_level_is_exact() {
        let pairs = [(Point2::new(0.3, 0.75), Point2::new(0.5, 0.4))];
        let rows = pointwise_error_study(Rect::UNIT, Tagging::ALL_IMPEDANCE, HelmholtzParams::reference(), &pairs, &[4, 16], 16).unwrap();
        assert_eq!(rows[1].mean_error, 0.0);
        assert!(rows[0].mean_error > 0.0);
    }
}
