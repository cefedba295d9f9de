//! Uniform triangulations of axis-aligned rectangles.
//!
//! Every cell of the `n_div × n_div` grid is split along its south-west to
//! north-east diagonal, so all elements are congruent right triangles. Nodes
//! are numbered lexicographically (`i + j·(n_div+1)`), cell `(i, j)` owns
//! triangles `2·(j·n_div + i)` (below the diagonal) and `2·(j·n_div + i) + 1`
//! (above it).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::{Point2, Rect};
use crate::math;

/// Boundary condition carried by a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    /// Impedance (Robin) wall.
    Impedance,
    /// Neumann wall.
    Neumann,
}

/// The four faces of a rectangular domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    Bottom,
    Right,
    Top,
    Left,
}

/// Per-face boundary tagging rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tagging {
    pub bottom: BoundaryTag,
    pub right: BoundaryTag,
    pub top: BoundaryTag,
    pub left: BoundaryTag,
}

impl Tagging {
    pub const ALL_IMPEDANCE: Tagging = Tagging {
        bottom: BoundaryTag::Impedance,
        right: BoundaryTag::Impedance,
        top: BoundaryTag::Impedance,
        left: BoundaryTag::Impedance,
    };

    pub fn tag(&self, face: Face) -> BoundaryTag {
        match face {
            Face::Bottom => self.bottom,
            Face::Right => self.right,
            Face::Top => self.top,
            Face::Left => self.left,
        }
    }

    pub fn with(mut self, face: Face, tag: BoundaryTag) -> Self {
        match face {
            Face::Bottom => self.bottom = tag,
            Face::Right => self.right = tag,
            Face::Top => self.top = tag,
            Face::Left => self.left = tag,
        }
        self
    }
}

impl Default for Tagging {
    fn default() -> Self {
        Self::ALL_IMPEDANCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub face: Face,
    pub tag: BoundaryTag,
}

/// Containing triangle and barycentric coordinates of a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub triangle: usize,
    pub bary: [f64; 3],
}

/// Hat-function values at a point: at most three non-zero nodal entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatValues {
    pub nodes: [usize; 3],
    pub values: [f64; 3],
}

impl HatValues {
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().copied().zip(self.values.iter().copied())
    }

    /// Interpolates a nodal vector at the evaluation point.
    pub fn interpolate<T>(&self, nodal: &[T]) -> T
    where
        T: Copy + core::ops::Mul<f64, Output = T> + core::ops::Add<Output = T>,
    {
        nodal[self.nodes[0]] * self.values[0]
            + nodal[self.nodes[1]] * self.values[1]
            + nodal[self.nodes[2]] * self.values[2]
    }

    /// Dense evaluation vector `e(x)` of length `n_nodes`.
    pub fn to_dense(&self, n_nodes: usize) -> Vec<f64> {
        let mut e = alloc::vec![0.0; n_nodes];
        for (node, v) in self.iter() {
            e[node] += v;
        }
        e
    }
}

/// Relative tolerance under which a point counts as lying on a grid line.
const GRID_SNAP: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct StructuredTriMesh {
    n_div: usize,
    domain: Rect,
    hx: f64,
    hy: f64,
    nodes: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
}

impl StructuredTriMesh {
    /// Unit-square mesh with all-impedance boundary.
    pub fn unit_square(n_div: usize) -> Result<Self> {
        Self::build(Rect::UNIT, n_div, Tagging::ALL_IMPEDANCE)
    }

    pub fn build(domain: Rect, n_div: usize, tagging: Tagging) -> Result<Self> {
        if n_div == 0 {
            return Err(Error::EmptyMesh);
        }
        if !domain.is_valid() {
            return Err(Error::InvalidParameter("degenerate mesh domain".into()));
        }
        let n = n_div;
        let hx = domain.width() / n as f64;
        let hy = domain.height() / n as f64;
        let node_at = |i: usize, j: usize| {
            // Snap the last row/column to the exact domain edge.
            let x = if i == n { domain.x1 } else { domain.x0 + i as f64 * hx };
            let y = if j == n { domain.y1 } else { domain.y0 + j as f64 * hy };
            Point2::new(x, y)
        };
        let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                nodes.push(node_at(i, j));
            }
        }
        let id = |i: usize, j: usize| i + j * (n + 1);
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let a = id(i, j);
                let b = id(i + 1, j);
                let c = id(i, j + 1);
                let d = id(i + 1, j + 1);
                triangles.push([a, b, d]);
                triangles.push([a, d, c]);
            }
        }
        let mut boundary_edges = Vec::with_capacity(4 * n);
        for i in 0..n {
            boundary_edges.push(BoundaryEdge {
                nodes: [id(i, 0), id(i + 1, 0)],
                face: Face::Bottom,
                tag: tagging.bottom,
            });
        }
        for j in 0..n {
            boundary_edges.push(BoundaryEdge {
                nodes: [id(n, j), id(n, j + 1)],
                face: Face::Right,
                tag: tagging.right,
            });
        }
        for i in (0..n).rev() {
            boundary_edges.push(BoundaryEdge {
                nodes: [id(i + 1, n), id(i, n)],
                face: Face::Top,
                tag: tagging.top,
            });
        }
        for j in (0..n).rev() {
            boundary_edges.push(BoundaryEdge {
                nodes: [id(0, j + 1), id(0, j)],
                face: Face::Left,
                tag: tagging.left,
            });
        }
        Ok(Self {
            n_div,
            domain,
            hx,
            hy,
            nodes,
            triangles,
            boundary_edges,
        })
    }

    pub fn n_div(&self) -> usize {
        self.n_div
    }

    /// Element diameter (length of the cell diagonal).
    pub fn h(&self) -> f64 {
        math::hypot(self.hx, self.hy)
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn nodes(&self) -> &[Point2] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// Signed area of a triangle (positive for counter-clockwise orientation).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        0.5 * ((pb.x - pa.x) * (pc.y - pa.y) - (pc.x - pa.x) * (pb.y - pa.y))
    }

    /// Maximum distance between lexicographic neighbours in the node
    /// numbering; the half-bandwidth of every assembled matrix.
    pub fn bandwidth(&self) -> usize {
        self.n_div + 2
    }

    fn cell_index(coord: f64, origin: f64, step: f64, n: usize) -> usize {
        let f = (coord - origin) / step;
        let nearest = math::floor(f + 0.5);
        // Round-off in the coordinate must not move a grid-line point into
        // the neighbouring cell.
        let on_line = (f - nearest).abs() <= GRID_SNAP * (1.0 + nearest.abs());
        let fl = if on_line { nearest } else { math::floor(f) };
        let mut i = fl as isize;
        // Points on a grid line belong to the lower cell (lowest triangle index).
        if on_line && i > 0 {
            i -= 1;
        }
        i.clamp(0, n as isize - 1) as usize
    }

    /// Finds the containing triangle arithmetically. Points on shared edges
    /// resolve to the lowest-index containing triangle.
    pub fn locate(&self, p: Point2) -> Result<Location> {
        if !(p.x.is_finite() && p.y.is_finite()) || !self.domain.contains(p) {
            return Err(Error::OutsideDomain(p));
        }
        let n = self.n_div;
        let i = Self::cell_index(p.x, self.domain.x0, self.hx, n);
        let j = Self::cell_index(p.y, self.domain.y0, self.hy, n);
        let s = ((p.x - (self.domain.x0 + i as f64 * self.hx)) / self.hx).clamp(0.0, 1.0);
        let t = ((p.y - (self.domain.y0 + j as f64 * self.hy)) / self.hy).clamp(0.0, 1.0);
        let cell = j * n + i;
        if t <= s + GRID_SNAP {
            Ok(Location {
                triangle: 2 * cell,
                bary: [1.0 - s, s - t, t],
            })
        } else {
            Ok(Location {
                triangle: 2 * cell + 1,
                bary: [1.0 - t, s, t - s],
            })
        }
    }

    /// Values of the hat functions at `p`.
    pub fn hat_values(&self, p: Point2) -> Result<HatValues> {
        let loc = self.locate(p)?;
        Ok(HatValues {
            nodes: self.triangles[loc.triangle],
            values: loc.bary,
        })
    }

    /// Ratio of element diameter to inscribed-circle diameter, per element.
    pub fn shape_ratio(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        let (la, lb, lc) = (pb.dist(pc), pa.dist(pc), pa.dist(pb));
        let diam = la.max(lb).max(lc);
        let area = self.signed_area(t).abs();
        let inradius = 2.0 * area / (la + lb + lc);
        diam / (2.0 * inradius)
    }
}
