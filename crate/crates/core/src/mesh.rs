//! Nested triangulations of the unit square and the unit disk.
//!
//! A [`MeshHierarchy`] is built by uniform red refinement: every triangle is
//! split into four through its edge midpoints. The nodal prolongation between
//! consecutive levels copies coincident vertices and averages the two
//! endpoints for edge midpoints. On the disk, midpoints of boundary edges are
//! pushed radially onto the unit circle after refinement; the prolongation
//! keeps the plain midpoint weights.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, TripletBuffer};

/// Per-triangle geometry: area and the constant gradients of the three
/// barycentric basis functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriGeometry {
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

impl TriGeometry {
    fn compute(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Self {
        let (e1x, e1y) = (b[0] - a[0], b[1] - a[1]);
        let (e2x, e2y) = (c[0] - a[0], c[1] - a[1]);
        let det = e1x * e2y - e1y * e2x;
        // grad λ_i = rot90(opposite edge) / det
        let grads = [
            [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
            [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
            [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
        ];
        Self {
            area: 0.5 * det,
            grads,
        }
    }
}

/// Conforming triangulation with counterclockwise triangles.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    geometry: Vec<TriGeometry>,
}

impl TriMesh {
    /// Builds a mesh and its geometry cache. Fails if any triangle has
    /// nonpositive signed area or references a missing vertex.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<bool>,
    ) -> Result<Self> {
        if boundary.len() != vertices.len() {
            return Err(Error::DimensionMismatch {
                op: "TriMesh::new (boundary flags)",
                expected: vertices.len(),
                found: boundary.len(),
            });
        }
        let mut geometry = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidParameter(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            let g = TriGeometry::compute(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(g.area > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "triangle {t} has nonpositive signed area {}",
                    g.area
                )));
            }
            geometry.push(g);
        }
        Ok(Self {
            vertices,
            triangles,
            boundary,
            geometry,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn geometry(&self) -> &[TriGeometry] {
        &self.geometry
    }

    pub fn area(&self, t: usize) -> f64 {
        self.geometry[t].area
    }

    pub fn areas(&self) -> Vec<f64> {
        self.geometry.iter().map(|g| g.area).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Longest edge over the mesh.
    pub fn max_edge_length(&self) -> f64 {
        let mut h = 0.0f64;
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (self.vertices[tri[k]], self.vertices[tri[(k + 1) % 3]]);
                h = h.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        h
    }

    /// Undirected edges `(min, max)` with the number of adjacent triangles,
    /// in first-visit order.
    pub fn edges(&self) -> Vec<([usize; 2], usize)> {
        let mut index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut out: Vec<([usize; 2], usize)> = Vec::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let key = edge_key(tri[k], tri[(k + 1) % 3]);
                match index.get(&key) {
                    Some(&e) => out[e].1 += 1,
                    None => {
                        index.insert(key, out.len());
                        out.push((key, 1));
                    }
                }
            }
        }
        out
    }

    /// Plain-text export: an `OFF`-style header, the vertex list
    /// (`x y 0`) and the triangle list (`3 a b c`).
    pub fn write_off<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "OFF")?;
        writeln!(w, "{} {} 0", self.num_vertices(), self.num_triangles())?;
        for v in &self.vertices {
            writeln!(w, "{:.17e} {:.17e} 0", v[0], v[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

fn edge_key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Map applied to new vertices created on boundary edges.
pub type BoundaryProjection = dyn Fn([f64; 2]) -> [f64; 2];

/// Red refinement. Returns the fine mesh and the nodal prolongation from
/// coarse to fine vertex values. Coarse vertices keep their indices; edge
/// midpoints are appended in edge first-visit order.
pub fn uniform_refine(
    mesh: &TriMesh,
    projection: Option<&BoundaryProjection>,
) -> (TriMesh, CsrMatrix) {
    let nv = mesh.num_vertices();
    let edges = mesh.edges();
    let mut vertices = mesh.vertices.clone();
    let mut boundary = mesh.boundary.clone();
    let mut midpoint: HashMap<[usize; 2], usize> = HashMap::with_capacity(edges.len());
    let mut prolong = TripletBuffer::with_capacity(nv + edges.len(), nv, nv + 2 * edges.len());
    for v in 0..nv {
        prolong.push(v, v, 1.0);
    }
    for (key, count) in &edges {
        let [a, b] = *key;
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        let mut m = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        let on_boundary = *count == 1;
        if on_boundary {
            if let Some(proj) = projection {
                m = proj(m);
            }
        }
        let id = vertices.len();
        vertices.push(m);
        boundary.push(on_boundary);
        midpoint.insert(*key, id);
        prolong.push(id, a, 0.5);
        prolong.push(id, b, 0.5);
    }
    let mut triangles = Vec::with_capacity(4 * mesh.num_triangles());
    for &[a, b, c] in &mesh.triangles {
        let mab = midpoint[&edge_key(a, b)];
        let mbc = midpoint[&edge_key(b, c)];
        let mca = midpoint[&edge_key(c, a)];
        triangles.push([a, mab, mca]);
        triangles.push([mab, b, mbc]);
        triangles.push([mca, mbc, c]);
        triangles.push([mab, mbc, mca]);
    }
    let fine = TriMesh::new(vertices, triangles, boundary)
        .expect("red refinement of a valid mesh is valid");
    (fine, prolong.into_csr())
}

/// Nested meshes, coarse to fine, with nodal prolongations
/// `prolongations[l]: level l -> level l+1`.
#[derive(Debug, Clone)]
pub struct MeshHierarchy {
    levels: Vec<Arc<TriMesh>>,
    prolongations: Vec<CsrMatrix>,
}

impl MeshHierarchy {
    /// Refines `coarse` `levels - 1` times.
    pub fn refine_from(
        coarse: TriMesh,
        levels: usize,
        projection: Option<&BoundaryProjection>,
    ) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidParameter(
                "a hierarchy needs at least one level".into(),
            ));
        }
        let mut meshes = vec![Arc::new(coarse)];
        let mut prolongations = Vec::with_capacity(levels - 1);
        for _ in 1..levels {
            let (fine, p) = uniform_refine(meshes.last().unwrap(), projection);
            meshes.push(Arc::new(fine));
            prolongations.push(p);
        }
        Ok(Self {
            levels: meshes,
            prolongations,
        })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Arc<TriMesh>] {
        &self.levels
    }

    pub fn level(&self, l: usize) -> &Arc<TriMesh> {
        &self.levels[l]
    }

    pub fn finest(&self) -> &Arc<TriMesh> {
        self.levels.last().unwrap()
    }

    pub fn prolongations(&self) -> &[CsrMatrix] {
        &self.prolongations
    }

    /// Prolongations restricted to non-boundary vertices on both levels,
    /// i.e. acting on homogeneous-Dirichlet P1 coefficient vectors.
    pub fn interior_prolongations(&self) -> Vec<CsrMatrix> {
        self.prolongations
            .iter()
            .enumerate()
            .map(|(l, p)| {
                let coarse = &self.levels[l];
                let fine = &self.levels[l + 1];
                let cmap = interior_numbering(coarse);
                let fmap = interior_numbering(fine);
                let nc = cmap.iter().flatten().count();
                let nf = fmap.iter().flatten().count();
                let mut t = TripletBuffer::new(nf, nc);
                for (fv, fdof) in fmap.iter().enumerate() {
                    let Some(fdof) = fdof else { continue };
                    let (cols, vals) = p.row(fv);
                    for (&cv, &w) in cols.iter().zip(vals) {
                        if let Some(cdof) = cmap[cv] {
                            t.push(*fdof, cdof, w);
                        }
                    }
                }
                t.into_csr()
            })
            .collect()
    }
}

/// Consecutive numbering of non-boundary vertices.
pub fn interior_numbering(mesh: &TriMesh) -> Vec<Option<usize>> {
    let mut next = 0;
    mesh.boundary
        .iter()
        .map(|&b| {
            if b {
                None
            } else {
                next += 1;
                Some(next - 1)
            }
        })
        .collect()
}

/// Structured mesh of `[0,1]²` with `n` squares per side, each split by the
/// diagonal from its lower-left to its upper-right corner.
pub fn unit_square_mesh(n: usize) -> Result<TriMesh> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "need at least one subdivision".into(),
        ));
    }
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    let mut boundary = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
            boundary.push(i == 0 || j == 0 || i == n || j == n);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    TriMesh::new(vertices, triangles, boundary)
}

/// Hierarchy on `[0,1]²` starting from `n0` squares per side; the finest
/// level has mesh size `1 / (n0 · 2^(levels-1))`.
pub fn unit_square_hierarchy(n0: usize, levels: usize) -> Result<MeshHierarchy> {
    MeshHierarchy::refine_from(unit_square_mesh(n0)?, levels, None)
}

/// Hexagonal fan around the origin with vertices on the unit circle.
pub fn unit_disk_coarse_mesh() -> TriMesh {
    let sides = 6;
    let mut vertices = vec![[0.0, 0.0]];
    let mut boundary = vec![false];
    for k in 0..sides {
        let th = 2.0 * PI * k as f64 / sides as f64;
        vertices.push([th.cos(), th.sin()]);
        boundary.push(true);
    }
    let triangles = (0..sides)
        .map(|k| [0, 1 + k, 1 + (k + 1) % sides])
        .collect();
    TriMesh::new(vertices, triangles, boundary).expect("hexagon fan is valid")
}

/// Radial projection onto the unit circle.
pub fn project_to_unit_circle(p: [f64; 2]) -> [f64; 2] {
    let r = p[0].hypot(p[1]);
    [p[0] / r, p[1] / r]
}

/// Hierarchy on polygonal approximations of the unit disk; level `l`
/// (0-based) has `6 · 2^l` boundary vertices on `|x| = 1`.
pub fn unit_disk_hierarchy(levels: usize) -> Result<MeshHierarchy> {
    MeshHierarchy::refine_from(
        unit_disk_coarse_mesh(),
        levels,
        Some(&project_to_unit_circle),
    )
}
