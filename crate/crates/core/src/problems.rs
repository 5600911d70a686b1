//! Benchmark problems: the manufactured solution on the unit square and the
//! radial solution on the unit disk.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{
    assemble_load, assemble_weak_gradient, l2_error_p0, l2_error_p1, P0VecSpace, P1Space,
};
use crate::kernels::PowerLaw;
use crate::mesh::{unit_disk_hierarchy, unit_square_hierarchy, MeshHierarchy, TriMesh};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `[0,1]²` with `u = a·x(x-1)y(y-1)`, `a = 10` by default.
    Square,
    /// Unit disk with `f ≡ 1` and the radial exact solution.
    Disk,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Square => "square",
            Domain::Disk => "disk",
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(Domain::Square),
            "disk" => Ok(Domain::Disk),
            other => Err(Error::Config(format!(
                "unknown domain `{other}` (expected square or disk)"
            ))),
        }
    }
}

/// Domain, law and mesh hierarchy depth of a benchmark problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub domain: Domain,
    pub law: PowerLaw,
    /// Cells per side of the coarsest square mesh (ignored for the disk).
    pub coarse_cells: usize,
    pub levels: usize,
    /// Amplitude `a` of the square's manufactured solution.
    pub amplitude: f64,
}

impl ProblemSpec {
    /// Square problem on `levels` nested meshes starting from a 2×2 grid,
    /// so the finest mesh size is `2^{-levels}`.
    pub fn square_manufactured(p: f64, levels: usize) -> Result<Self> {
        Self::new(Domain::Square, PowerLaw::new(p)?, 2, levels)
    }

    /// Disk problem on `levels` nested meshes starting from the hexagon,
    /// so the finest mesh size is `2^{1-levels}`.
    pub fn disk_radial(p: f64, levels: usize) -> Result<Self> {
        Self::new(Domain::Disk, PowerLaw::new(p)?, 1, levels)
    }

    /// Chooses the hierarchy whose finest mesh has size `1/inv_h`.
    /// Square meshes need `inv_h = n0·2^k`, disk meshes a power of two ≥ 1.
    pub fn with_mesh_size(domain: Domain, law: PowerLaw, inv_h: usize) -> Result<Self> {
        match domain {
            Domain::Square => {
                if inv_h == 0 {
                    return Err(Error::InvalidParameter("mesh size 1/0".into()));
                }
                let (mut n0, mut levels) = (inv_h, 1);
                while n0 % 2 == 0 && n0 > 2 {
                    n0 /= 2;
                    levels += 1;
                }
                Self::new(domain, law, n0, levels)
            }
            Domain::Disk => {
                if !inv_h.is_power_of_two() {
                    return Err(Error::InvalidParameter(format!(
                        "disk mesh size must be 1/2^k, got 1/{inv_h}"
                    )));
                }
                Self::new(domain, law, 1, inv_h.trailing_zeros() as usize + 1)
            }
        }
    }

    pub fn new(domain: Domain, law: PowerLaw, coarse_cells: usize, levels: usize) -> Result<Self> {
        if levels == 0 || coarse_cells == 0 {
            return Err(Error::InvalidParameter(
                "a problem needs at least one mesh level".into(),
            ));
        }
        Ok(Self {
            domain,
            law,
            coarse_cells,
            levels,
            amplitude: Self::DEFAULT_AMPLITUDE,
        })
    }

    pub const DEFAULT_AMPLITUDE: f64 = 10.0;

    /// Rescales the square's exact solution; the discrete solution scales
    /// by the same factor and `f` by its `(p-1)`-th power.
    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_law(mut self, law: PowerLaw) -> Self {
        self.law = law;
        self
    }

    pub fn p(&self) -> f64 {
        self.law.p()
    }

    /// Nominal mesh size `h` of the finest level.
    pub fn mesh_size(&self) -> f64 {
        let scale = 2f64.powi(self.levels as i32 - 1);
        match self.domain {
            Domain::Square => 1.0 / (self.coarse_cells as f64 * scale),
            Domain::Disk => 1.0 / scale,
        }
    }

    pub fn exact_u(&self, x: [f64; 2]) -> f64 {
        let p = self.p();
        match self.domain {
            Domain::Square => self.amplitude * x[0] * (x[0] - 1.0) * x[1] * (x[1] - 1.0),
            Domain::Disk => {
                let r = x[0].hypot(x[1]);
                (p - 1.0) / p * 0.5f64.powf(1.0 / (p - 1.0)) * (1.0 - r.powf(p / (p - 1.0)))
            }
        }
    }

    pub fn exact_grad_u(&self, x: [f64; 2]) -> [f64; 2] {
        match self.domain {
            Domain::Square => self.square_grad(x),
            Domain::Disk => {
                let p = self.p();
                let r = x[0].hypot(x[1]);
                if r == 0.0 {
                    return [0.0, 0.0];
                }
                // |∇u| = (r/2)^{1/(p-1)}, pointing inwards
                let mag = (0.5 * r).powf(1.0 / (p - 1.0));
                [-mag * x[0] / r, -mag * x[1] / r]
            }
        }
    }

    /// `σ = |∇u|^{p-2} ∇u`.
    pub fn exact_sigma(&self, x: [f64; 2]) -> [f64; 2] {
        match self.domain {
            Domain::Square => {
                let g = self.square_grad(x);
                let n = g[0].hypot(g[1]);
                if n == 0.0 {
                    return [0.0, 0.0];
                }
                let c = n.powf(self.p() - 2.0);
                [c * g[0], c * g[1]]
            }
            Domain::Disk => [-0.5 * x[0], -0.5 * x[1]],
        }
    }

    /// Right side `f = -div(|∇u|^{p-2}∇u)`.
    pub fn rhs(&self, x: [f64; 2]) -> f64 {
        match self.domain {
            Domain::Disk => 1.0,
            Domain::Square => {
                let p = self.p();
                let a = self.amplitude;
                let g = self.square_grad(x);
                let (xx, yy) = (x[0], x[1]);
                let hxx = 2.0 * a * yy * (yy - 1.0);
                let hyy = 2.0 * a * xx * (xx - 1.0);
                let hxy = a * (2.0 * xx - 1.0) * (2.0 * yy - 1.0);
                let lap = hxx + hyy;
                let n2 = g[0] * g[0] + g[1] * g[1];
                if n2 == 0.0 {
                    // the only critical point is the centre, a mesh vertex
                    // and never a quadrature point
                    return if p == 2.0 { -lap } else { 0.0 };
                }
                let ghg = g[0] * g[0] * hxx + 2.0 * g[0] * g[1] * hxy + g[1] * g[1] * hyy;
                let n = n2.sqrt();
                -((p - 2.0) * n.powf(p - 4.0) * ghg + n.powf(p - 2.0) * lap)
            }
        }
    }

    fn square_grad(&self, x: [f64; 2]) -> [f64; 2] {
        let (a, xx, yy) = (self.amplitude, x[0], x[1]);
        [
            a * (2.0 * xx - 1.0) * yy * (yy - 1.0),
            a * xx * (xx - 1.0) * (2.0 * yy - 1.0),
        ]
    }

    pub fn build_hierarchy(&self) -> Result<MeshHierarchy> {
        match self.domain {
            Domain::Square => unit_square_hierarchy(self.coarse_cells, self.levels),
            Domain::Disk => unit_disk_hierarchy(self.levels),
        }
    }

    /// Meshes, spaces and the discrete operators on the finest level.
    pub fn assemble(&self) -> Result<Problem> {
        let hierarchy = self.build_hierarchy()?;
        let mesh = hierarchy.finest().clone();
        let p1 = P1Space::new(mesh.clone());
        let p0 = P0VecSpace::new(mesh.clone());
        let d = assemble_weak_gradient(&p1, &p0)?;
        let dt = d.transpose();
        let spec = *self;
        let f = assemble_load(&p1, move |x| spec.rhs(x));
        let f_norm = crate::dense::norm2(&f);
        if f_norm == 0.0 {
            return Err(Error::DegenerateInput("load vector is zero"));
        }
        let transfers = hierarchy.interior_prolongations();
        Ok(Problem {
            spec: *self,
            areas: mesh.areas(),
            hierarchy,
            p1,
            p0,
            d,
            dt,
            f,
            f_norm,
            transfers,
        })
    }
}

/// Assembled discrete saddle-point problem; immutable and shareable across
/// concurrent solves.
#[derive(Debug, Clone)]
pub struct Problem {
    spec: ProblemSpec,
    hierarchy: MeshHierarchy,
    p1: P1Space,
    p0: P0VecSpace,
    d: CsrMatrix,
    dt: CsrMatrix,
    f: Vec<f64>,
    f_norm: f64,
    areas: Vec<f64>,
    transfers: Vec<CsrMatrix>,
}

impl Problem {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn law(&self) -> &PowerLaw {
        &self.spec.law
    }

    /// Same discretization with a different law (regularization, exponent).
    pub fn with_law(&self, law: PowerLaw) -> Result<Problem> {
        if law.p() == self.spec.p() {
            let mut out = self.clone();
            out.spec.law = law;
            Ok(out)
        } else {
            self.spec.with_law(law).assemble()
        }
    }

    pub fn hierarchy(&self) -> &MeshHierarchy {
        &self.hierarchy
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        self.hierarchy.finest()
    }

    pub fn p1(&self) -> &P1Space {
        &self.p1
    }

    pub fn p0(&self) -> &P0VecSpace {
        &self.p0
    }

    /// Weak gradient, `2 N_T × N_n`.
    pub fn d(&self) -> &CsrMatrix {
        &self.d
    }

    pub fn dt(&self) -> &CsrMatrix {
        &self.dt
    }

    pub fn load(&self) -> &[f64] {
        &self.f
    }

    pub fn load_norm(&self) -> f64 {
        self.f_norm
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Interior prolongations, coarse to fine.
    pub fn transfers(&self) -> &[CsrMatrix] {
        &self.transfers
    }

    pub fn num_elements(&self) -> usize {
        self.areas.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.p1.dim()
    }

    /// Size of the coupled `(σ, u)` system.
    pub fn num_dofs(&self) -> usize {
        2 * self.num_elements() + self.num_nodes()
    }

    pub fn u_error(&self, u: &[f64]) -> Result<f64> {
        let spec = self.spec;
        l2_error_p1(&self.p1, u, move |x| spec.exact_u(x))
    }

    pub fn sigma_error(&self, sigma: &[f64]) -> Result<f64> {
        let spec = self.spec;
        l2_error_p0(&self.p0, sigma, move |x| spec.exact_sigma(x))
    }

    /// Nodal interpolant of the exact `u` on interior vertices.
    pub fn interpolate_exact_u(&self) -> Vec<f64> {
        let spec = self.spec;
        self.p1.interpolate(move |x| spec.exact_u(x))
    }

    /// Element averages of the exact `σ`.
    pub fn project_exact_sigma(&self) -> Vec<f64> {
        let spec = self.spec;
        self.p0.project(move |x| spec.exact_sigma(x))
    }
}
