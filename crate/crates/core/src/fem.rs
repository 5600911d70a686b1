//! P1 Lagrange and piecewise-constant vector spaces on a [`TriMesh`].
//!
//! The weak gradient `D` maps P1 coefficients (homogeneous Dirichlet, boundary
//! vertices eliminated) to the pairing with piecewise-constant fluxes:
//! `(D u)_T = |T| ∇u_h|_T`, so that `σᵀ D u = ∫ σ_h · ∇u_h`. Fluxes are laid
//! out element by element as `(σ_{T,x}, σ_{T,y})`.

use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::kernels::BlockDiag2;
use crate::mesh::{interior_numbering, TriMesh};
use crate::sparse::{CsrMatrix, TripletBuffer};

/// Symmetric 6-point rule on the reference triangle, exact for degree 4.
/// Entries are barycentric coordinates and a weight summing to one.
pub const QUADRATURE_DEG4: [([f64; 3], f64); 6] = {
    const A: f64 = 0.445_948_490_915_964_9;
    const WA: f64 = 0.223_381_589_678_011_47;
    const B: f64 = 0.091_576_213_509_770_74;
    const WB: f64 = 0.109_951_743_655_321_87;
    [
        ([A, A, 1.0 - 2.0 * A], WA),
        ([A, 1.0 - 2.0 * A, A], WA),
        ([1.0 - 2.0 * A, A, A], WA),
        ([B, B, 1.0 - 2.0 * B], WB),
        ([B, 1.0 - 2.0 * B, B], WB),
        ([1.0 - 2.0 * B, B, B], WB),
    ]
};

fn map_point(coords: &[[f64; 2]; 3], bary: &[f64; 3]) -> [f64; 2] {
    [
        bary[0] * coords[0][0] + bary[1] * coords[1][0] + bary[2] * coords[2][0],
        bary[0] * coords[0][1] + bary[1] * coords[1][1] + bary[2] * coords[2][1],
    ]
}

/// Continuous piecewise-linear functions vanishing on the boundary.
#[derive(Debug, Clone)]
pub struct P1Space {
    mesh: Arc<TriMesh>,
    dof_of_vertex: Vec<Option<usize>>,
    vertex_of_dof: Vec<usize>,
}

impl P1Space {
    pub fn new(mesh: Arc<TriMesh>) -> Self {
        let dof_of_vertex = interior_numbering(&mesh);
        let vertex_of_dof = dof_of_vertex
            .iter()
            .enumerate()
            .filter_map(|(v, d)| d.map(|_| v))
            .collect();
        Self {
            mesh,
            dof_of_vertex,
            vertex_of_dof,
        }
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    /// Number of interior DoFs `N_n`.
    pub fn dim(&self) -> usize {
        self.vertex_of_dof.len()
    }

    pub fn dof(&self, vertex: usize) -> Option<usize> {
        self.dof_of_vertex[vertex]
    }

    pub fn vertex(&self, dof: usize) -> usize {
        self.vertex_of_dof[dof]
    }

    /// Nodal interpolant restricted to interior DoFs.
    pub fn interpolate(&self, u: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.vertex_of_dof
            .iter()
            .map(|&v| u(self.mesh.vertices()[v]))
            .collect()
    }

    /// Expands interior coefficients to all vertices (boundary values 0).
    pub fn extend_to_vertices(&self, u: &[f64]) -> Vec<f64> {
        self.dof_of_vertex
            .iter()
            .map(|d| d.map_or(0.0, |d| u[d]))
            .collect()
    }
}

/// Piecewise-constant 2-vector fields; dimension `2 N_T`.
#[derive(Debug, Clone)]
pub struct P0VecSpace {
    mesh: Arc<TriMesh>,
}

impl P0VecSpace {
    pub fn new(mesh: Arc<TriMesh>) -> Self {
        Self { mesh }
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_triangles()
    }

    pub fn dim(&self) -> usize {
        2 * self.mesh.num_triangles()
    }

    /// Elementwise mean of a vector field (degree-4 quadrature).
    pub fn project(&self, sigma: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for t in 0..self.mesh.num_triangles() {
            let coords = self.mesh.triangle_coords(t);
            let mut acc = [0.0; 2];
            for (bary, w) in &QUADRATURE_DEG4 {
                let s = sigma(map_point(&coords, bary));
                acc[0] += w * s[0];
                acc[1] += w * s[1];
            }
            out.extend_from_slice(&acc);
        }
        out
    }
}

/// Weak gradient `D ∈ R^{2N_T × N_n}` with
/// `D[(T,c), i] = |T| ∂_c φ_i` for interior nodes `i` of `T`.
pub fn assemble_weak_gradient(p1: &P1Space, p0: &P0VecSpace) -> Result<CsrMatrix> {
    if !Arc::ptr_eq(&p1.mesh, &p0.mesh) {
        return Err(Error::MeshMismatch);
    }
    let mesh = &p1.mesh;
    let mut t = TripletBuffer::with_capacity(p0.dim(), p1.dim(), 6 * mesh.num_triangles());
    for (e, (tri, g)) in mesh.triangles().iter().zip(mesh.geometry()).enumerate() {
        for (k, &v) in tri.iter().enumerate() {
            if let Some(d) = p1.dof(v) {
                t.push(2 * e, d, g.area * g.grads[k][0]);
                t.push(2 * e + 1, d, g.area * g.grads[k][1]);
            }
        }
    }
    Ok(t.into_csr())
}

/// Weak gradient over all vertices, boundary included (`2N_T × N_v`).
pub fn assemble_weak_gradient_all_nodes(mesh: &TriMesh) -> CsrMatrix {
    let mut t = TripletBuffer::with_capacity(
        2 * mesh.num_triangles(),
        mesh.num_vertices(),
        6 * mesh.num_triangles(),
    );
    for (e, (tri, g)) in mesh.triangles().iter().zip(mesh.geometry()).enumerate() {
        for (k, &v) in tri.iter().enumerate() {
            t.push(2 * e, v, g.area * g.grads[k][0]);
            t.push(2 * e + 1, v, g.area * g.grads[k][1]);
        }
    }
    t.into_csr()
}

fn load_by_vertex(mesh: &TriMesh, f: &impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let mut b = vec![0.0; mesh.num_vertices()];
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let coords = mesh.triangle_coords(e);
        let area = mesh.area(e);
        for (bary, w) in &QUADRATURE_DEG4 {
            let fx = f(map_point(&coords, bary)) * w * area;
            for k in 0..3 {
                b[tri[k]] += fx * bary[k];
            }
        }
    }
    b
}

/// Load vector `b_i = ∫ f φ_i` over interior DoFs.
pub fn assemble_load(p1: &P1Space, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let full = load_by_vertex(&p1.mesh, &f);
    p1.vertex_of_dof.iter().map(|&v| full[v]).collect()
}

/// Load vector over all vertices, boundary rows retained.
pub fn assemble_load_all_nodes(mesh: &TriMesh, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    load_by_vertex(mesh, &f)
}

/// Schur complement `Dᵀ B D` for a block-diagonal `B`, assembled element
/// by element: `S_T[i][j] = |T|² ∇φ_iᵀ B_T ∇φ_j`.
pub fn assemble_schur(p1: &P1Space, blocks: &BlockDiag2) -> Result<CsrMatrix> {
    let mesh = &p1.mesh;
    check_len(
        "assemble_schur",
        mesh.num_triangles(),
        blocks.num_elements(),
    )?;
    let n = p1.dim();
    let mut t = TripletBuffer::with_capacity(n, n, 9 * mesh.num_triangles());
    for (e, (tri, g)) in mesh.triangles().iter().zip(mesh.geometry()).enumerate() {
        let b = blocks.block(e);
        let a2 = g.area * g.area;
        for i in 0..3 {
            let Some(di) = p1.dof(tri[i]) else { continue };
            let gi = g.grads[i];
            let bgi = [
                b[0][0] * gi[0] + b[1][0] * gi[1],
                b[0][1] * gi[0] + b[1][1] * gi[1],
            ];
            for j in 0..3 {
                let Some(dj) = p1.dof(tri[j]) else { continue };
                let gj = g.grads[j];
                t.push(di, dj, a2 * (bgi[0] * gj[0] + bgi[1] * gj[1]));
            }
        }
    }
    Ok(t.into_csr())
}

/// Unit-coefficient stiffness matrix `∫ ∇φ_i · ∇φ_j`.
pub fn assemble_stiffness(p1: &P1Space) -> CsrMatrix {
    let blocks = p1
        .mesh
        .areas()
        .iter()
        .map(|&a| [[1.0 / a, 0.0], [0.0, 1.0 / a]])
        .collect();
    assemble_schur(p1, &BlockDiag2::new(blocks)).expect("block count matches the mesh")
}

/// `‖u_h − u‖_{L²}` with `u_h` given on interior DoFs (boundary values 0).
pub fn l2_error_p1(p1: &P1Space, u_h: &[f64], u_exact: impl Fn([f64; 2]) -> f64) -> Result<f64> {
    check_len("l2_error_p1", p1.dim(), u_h.len())?;
    let mesh = &p1.mesh;
    let nodal = p1.extend_to_vertices(u_h);
    let mut acc = 0.0;
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let coords = mesh.triangle_coords(e);
        let mut local = 0.0;
        for (bary, w) in &QUADRATURE_DEG4 {
            let uh: f64 = (0..3).map(|k| bary[k] * nodal[tri[k]]).sum();
            let d = uh - u_exact(map_point(&coords, bary));
            local += w * d * d;
        }
        acc += local * mesh.area(e);
    }
    Ok(acc.sqrt())
}

/// `‖σ_h − σ‖_{L²}` for a piecewise-constant `σ_h`.
pub fn l2_error_p0(
    p0: &P0VecSpace,
    sigma_h: &[f64],
    sigma_exact: impl Fn([f64; 2]) -> [f64; 2],
) -> Result<f64> {
    check_len("l2_error_p0", p0.dim(), sigma_h.len())?;
    let mesh = &p0.mesh;
    let mut acc = 0.0;
    for e in 0..mesh.num_triangles() {
        let coords = mesh.triangle_coords(e);
        let sh = [sigma_h[2 * e], sigma_h[2 * e + 1]];
        let mut local = 0.0;
        for (bary, w) in &QUADRATURE_DEG4 {
            let s = sigma_exact(map_point(&coords, bary));
            local += w * ((sh[0] - s[0]).powi(2) + (sh[1] - s[1]).powi(2));
        }
        acc += local * mesh.area(e);
    }
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{unit_square_hierarchy, unit_square_mesh};
    use crate::sparse::{spmv, spmv_transpose};

    fn square(n: usize) -> (P1Space, P0VecSpace) {
        let m = Arc::new(unit_square_mesh(n).unwrap());
        (P1Space::new(m.clone()), P0VecSpace::new(m))
    }

    #[test]
    fn quadrature_weights_and_exactness() {
        let wsum: f64 = QUADRATURE_DEG4.iter().map(|q| q.1).sum();
        assert!((wsum - 1.0).abs() < 1e-15);
        // ∫_ref x^a y^b = a! b! / (a+b+2)!, reference area 1/2
        let fact = |n: u32| (1..=n).product::<u32>().max(1) as f64;
        for a in 0..=4u32 {
            for b in 0..=(4 - a) {
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                let approx: f64 = QUADRATURE_DEG4
                    .iter()
                    .map(|(l, w)| 0.5 * w * l[1].powi(a as i32) * l[2].powi(b as i32))
                    .sum();
                assert!((approx - exact).abs() < 1e-15, "x^{a} y^{b}");
            }
        }
    }

    #[test]
    fn weak_gradient_of_x_on_reference_triangle() {
        let mesh = TriMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            vec![true; 3],
        )
        .unwrap();
        let d = assemble_weak_gradient_all_nodes(&mesh);
        let u: Vec<f64> = mesh.vertices().iter().map(|v| v[0]).collect();
        let du = spmv(&d, &u).unwrap();
        assert!((du[0] - 0.5).abs() < 1e-15 && du[1].abs() < 1e-15);
    }

    #[test]
    fn weak_gradient_reproduces_linears() {
        let mesh = unit_square_mesh(5).unwrap();
        let d = assemble_weak_gradient_all_nodes(&mesh);
        let (a, b) = (1.7, -0.4);
        let u: Vec<f64> = mesh
            .vertices()
            .iter()
            .map(|v| a * v[0] + b * v[1])
            .collect();
        let du = spmv(&d, &u).unwrap();
        for e in 0..mesh.num_triangles() {
            let area = mesh.area(e);
            assert!((du[2 * e] - area * a).abs() < 1e-14);
            assert!((du[2 * e + 1] - area * b).abs() < 1e-14);
        }
    }

    #[test]
    fn divergence_of_constant_field_vanishes() {
        let (p1, p0) = square(6);
        let d = assemble_weak_gradient(&p1, &p0).unwrap();
        let sigma: Vec<f64> = (0..p0.dim())
            .map(|k| if k % 2 == 0 { 1.0 } else { 0.0 })
            .collect();
        let div = spmv_transpose(&d, &sigma).unwrap();
        assert!(div.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn mismatched_meshes_rejected() {
        let (p1, _) = square(2);
        let (_, p0) = square(2);
        assert!(matches!(
            assemble_weak_gradient(&p1, &p0),
            Err(Error::MeshMismatch)
        ));
    }

    #[test]
    fn dof_counts() {
        let (p1, p0) = square(32);
        assert_eq!(p1.dim(), 961);
        assert_eq!(p0.dim(), 4096);
    }

    #[test]
    fn load_examples() {
        let (p1, _) = square(4);
        assert!(assemble_load(&p1, |_| 0.0).iter().all(|&v| v == 0.0));
        let all = assemble_load_all_nodes(p1.mesh(), |_| 1.0);
        assert!((all.iter().sum::<f64>() - 1.0).abs() < 1e-14);

        // ∫_T x φ_(0,0) on the unit right triangle = 1/24
        let mesh = TriMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            vec![true; 3],
        )
        .unwrap();
        let b = assemble_load_all_nodes(&mesh, |x| x[0]);
        assert!((b[0] - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn l2_errors_trivial_cases() {
        let (p1, p0) = square(4);
        let zero = vec![0.0; p1.dim()];
        assert!((l2_error_p1(&p1, &zero, |_| 1.0).unwrap() - 1.0).abs() < 1e-14);
        let sigma = p0.project(|_| [1.5, -2.0]);
        assert!(l2_error_p0(&p0, &sigma, |_| [1.5, -2.0]).unwrap() < 1e-14);
        let zero0 = vec![0.0; p0.dim()];
        assert!((l2_error_p0(&p0, &zero0, |_| [1.0, 0.0]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn l2_error_vanishes_for_piecewise_linear() {
        // P1 hat at the center of the 2x2 mesh
        let h = unit_square_hierarchy(2, 1).unwrap();
        let p1 = P1Space::new(h.finest().clone());
        let hat = |x: [f64; 2]| {
            let (u, v) = (2.0 * x[0] - 1.0, 2.0 * x[1] - 1.0);
            let s = if u * v >= 0.0 {
                u.abs().max(v.abs())
            } else {
                u.abs() + v.abs()
            };
            (1.0 - s).max(0.0)
        };
        let uh = p1.interpolate(hat);
        assert_eq!(uh, vec![1.0]);
        assert!(l2_error_p1(&p1, &uh, hat).unwrap() < 1e-14);
    }

    #[test]
    fn interpolation_error_is_second_order() {
        let bubble = |x: [f64; 2]| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
        let err = |n: usize| {
            let (p1, _) = square(n);
            l2_error_p1(&p1, &p1.interpolate(bubble), bubble).unwrap()
        };
        let ratio = err(8) / err(16);
        assert!((ratio - 4.0).abs() < 0.6, "ratio {ratio}");
    }

    #[test]
    fn projection_error_is_first_order() {
        let field = |x: [f64; 2]| [x[1], x[0]];
        let err = |n: usize| {
            let (_, p0) = square(n);
            l2_error_p0(&p0, &p0.project(field), field).unwrap()
        };
        let ratio = err(8) / err(16);
        assert!((ratio - 2.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn stiffness_matches_five_point_stencil() {
        let (p1, _) = square(4);
        let k = assemble_stiffness(&p1);
        // for the one-diagonal pattern the P1 stiffness is the 5-point Laplacian
        let center = p1.dof(2 * 5 + 2).unwrap();
        let (cols, vals) = k.row(center);
        // diagonal neighbours share an edge but couple with weight zero
        assert_eq!(cols.len(), 7);
        let mut nonzero = 0;
        for (&c, &v) in cols.iter().zip(vals) {
            if v.abs() < 1e-13 {
                continue;
            }
            nonzero += 1;
            let expect = if c == center { 4.0 } else { -1.0 };
            assert!((v - expect).abs() < 1e-13);
        }
        assert_eq!(nonzero, 5);
        assert!(k.relative_asymmetry() < 1e-15);
    }
}
