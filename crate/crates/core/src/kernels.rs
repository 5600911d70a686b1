//! Elementwise constitutive kernels.
//!
//! With piecewise-constant fluxes every nonlinear operation decouples into
//! independent `d × d` problems, one per element. This module holds those
//! local operations for the power law `γ(σ) = |σ|^{p*-2}` (p-Laplacian and
//! p-curl) and for the exponential permeability law
//! `ν(s) = a0 + a1·exp(-a2·s)` of the ferromagnetic model, together with the
//! block-diagonal container they fill.

use crate::error::{check_len, Error, Result};

/// How the mass coefficient is regularized for `p* < 2` below `ε0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassRegularization {
    /// `(|σ| + λ)^{p*-2}`
    #[default]
    ShiftedNorm,
    /// `(γ(σ)|σ| + λ)^{p*-2}`, the formula taken literally.
    Literal,
}

/// Power-law constitutive relation with its preconditioner regularization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    p: f64,
    p_star: f64,
    lambda: f64,
    eps0: f64,
    mass_branch: MassRegularization,
}

impl PowerLaw {
    pub const DEFAULT_LAMBDA: f64 = 1e-4;
    pub const DEFAULT_EPS0: f64 = 1e-16;

    pub fn new(p: f64) -> Result<Self> {
        Self::with_regularization(p, Self::DEFAULT_LAMBDA, Self::DEFAULT_EPS0)
    }

    pub fn with_regularization(p: f64, lambda: f64, eps0: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power-law exponent must exceed 1, got {p}"
            )));
        }
        if !(lambda > 0.0) || !(eps0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "regularization needs lambda > 0 and eps0 > 0, got {lambda}, {eps0}"
            )));
        }
        Ok(Self {
            p,
            p_star: p / (p - 1.0),
            lambda,
            eps0,
            mass_branch: MassRegularization::default(),
        })
    }

    pub fn with_mass_branch(mut self, branch: MassRegularization) -> Self {
        self.mass_branch = branch;
        self
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_star(&self) -> f64 {
        self.p_star
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn mass_branch(&self) -> MassRegularization {
        self.mass_branch
    }

    fn is_linear(&self) -> bool {
        self.p == 2.0
    }
}

#[inline]
fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `γ(σ) = |σ|^{p*-2}`. At `σ = 0` this is `0` for `p* > 2`, `1` for
/// `p* = 2` and `+∞` for `p* < 2`; callers test `is_infinite()`.
pub fn gamma_pow(sigma: &[f64], law: &PowerLaw) -> f64 {
    let s = norm(sigma);
    if law.is_linear() {
        1.0
    } else if s == 0.0 {
        if law.p_star > 2.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        s.powf(law.p_star - 2.0)
    }
}

/// Same as [`gamma_pow`] for three-component fluxes of the p-curl problem,
/// whose dual nonlinearity coincides with the p-Laplacian's.
pub fn pcurl_gamma(sigma: &[f64; 3], law: &PowerLaw) -> f64 {
    gamma_pow(sigma, law)
}

/// Regularized mass coefficient `γ_λ(σ)`; always finite and positive.
pub fn gamma_regularized(sigma: &[f64], law: &PowerLaw) -> f64 {
    let s = norm(sigma);
    if law.p_star > 2.0 {
        gamma_pow(sigma, law) + law.lambda
    } else if law.p_star < 2.0 && s <= law.eps0 {
        let base = match law.mass_branch {
            MassRegularization::ShiftedNorm => s,
            MassRegularization::Literal => s.powf(law.p_star - 1.0),
        };
        (base + law.lambda).powf(law.p_star - 2.0)
    } else {
        gamma_pow(sigma, law)
    }
}

/// `∇F*(σ) = |σ|^{p*-2} σ` evaluated without forming `γ` (finite at 0).
pub fn dual_flux<const N: usize>(sigma: &[f64; N], law: &PowerLaw) -> [f64; N] {
    let s = norm(sigma);
    if law.is_linear() {
        return *sigma;
    }
    if s == 0.0 {
        return [0.0; N];
    }
    let g = s.powf(law.p_star - 2.0);
    sigma.map(|v| g * v)
}

/// `∇F(γ) = |γ|^{p-2} γ`.
pub fn primal_flux<const N: usize>(grad: &[f64; N], law: &PowerLaw) -> [f64; N] {
    let s = norm(grad);
    if law.is_linear() {
        return *grad;
    }
    if s == 0.0 {
        return [0.0; N];
    }
    let g = s.powf(law.p - 2.0);
    grad.map(|v| g * v)
}

/// Element Jacobian of `σ ↦ |T| γ(σ) σ`:
/// `|σ|^{p*-2}|T| I + (p*-2)|σ|^{p*-4}|T| σσᵀ`.
pub fn jacobian_block_pow<const N: usize>(
    sigma: &[f64; N],
    area: f64,
    law: &PowerLaw,
) -> Result<[[f64; N]; N]> {
    let s = norm(sigma);
    if s == 0.0 {
        return Err(Error::DegenerateInput(
            "Jacobian of the power law at sigma = 0",
        ));
    }
    let base = area * s.powf(law.p_star - 2.0);
    let rank1 = (law.p_star - 2.0) * base;
    let dir = sigma.map(|v| v / s);
    let mut j = [[0.0; N]; N];
    for a in 0..N {
        for b in 0..N {
            j[a][b] = rank1 * dir[a] * dir[b];
        }
        j[a][a] += base;
    }
    Ok(j)
}

/// Inverse of the element Jacobian, with the regularized diagonal fallback
/// `diag(1 / (γ_λ |T|))` when `p* > 2, γ(σ) ≤ ε0` or `p* < 2, |σ| ≤ ε0`.
/// Otherwise the Sherman–Morrison closed form
/// `|σ|^{2-p*}/|T| I - (p*-2)|σ|^{-p*}/((p*-1)|T|) σσᵀ`.
pub fn jacobian_inverse_block_pow<const N: usize>(
    sigma: &[f64; N],
    area: f64,
    law: &PowerLaw,
) -> [[f64; N]; N] {
    let s = norm(sigma);
    let mut inv = [[0.0; N]; N];
    if law.is_linear() {
        for (a, row) in inv.iter_mut().enumerate() {
            row[a] = 1.0 / area;
        }
        return inv;
    }
    let gamma = gamma_pow(sigma, law);
    let regularize = (law.p_star > 2.0 && gamma <= law.eps0) || (law.p_star < 2.0 && s <= law.eps0);
    if regularize {
        let d = 1.0 / (gamma_regularized(sigma, law) * area);
        for (a, row) in inv.iter_mut().enumerate() {
            row[a] = d;
        }
        return inv;
    }
    let base = s.powf(2.0 - law.p_star) / area;
    let rank1 = -(law.p_star - 2.0) / (law.p_star - 1.0) * base;
    let dir = sigma.map(|v| v / s);
    for a in 0..N {
        for b in 0..N {
            inv[a][b] = rank1 * dir[a] * dir[b];
        }
        inv[a][a] += base;
    }
    inv
}

/// Exponential permeability law `ν(s) = a0 + a1·exp(-a2·s)` with the
/// scalar profile `Φ(z) = ν(z) z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FerroLaw {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub newton_tol: f64,
    pub newton_maxit: usize,
}

impl FerroLaw {
    pub fn new(a0: f64, a1: f64, a2: f64) -> Result<Self> {
        if !(a0 > 0.0) || a1 < 0.0 || a2 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ferromagnetic law needs a0 > 0, a1 >= 0, a2 >= 0; got ({a0}, {a1}, {a2})"
            )));
        }
        Ok(Self {
            a0,
            a1,
            a2,
            newton_tol: 1e-12,
            newton_maxit: 50,
        })
    }

    pub fn nu(&self, s: f64) -> f64 {
        self.a0 + self.a1 * (-self.a2 * s).exp()
    }

    pub fn dnu(&self, s: f64) -> f64 {
        -self.a1 * self.a2 * (-self.a2 * s).exp()
    }

    pub fn phi(&self, z: f64) -> f64 {
        self.nu(z) * z
    }

    pub fn dphi(&self, z: f64) -> f64 {
        self.dnu(z) * z + self.nu(z)
    }

    /// `min Φ'` over `z ≥ 0`, attained at `z = 2 / a2`: `a0 - a1·e^{-2}`.
    /// Reported only; a value near zero means the law is barely strongly
    /// monotone.
    pub fn monotonicity_constant(&self) -> f64 {
        if self.a2 == 0.0 {
            self.a0 + self.a1
        } else {
            self.a0 - self.a1 * (-2.0f64).exp()
        }
    }

    /// `γ(σ) = 1 / ν(Φ^{-1}(|σ|))`.
    pub fn gamma(&self, sigma: &[f64; 3]) -> Result<f64> {
        let z = ferro_phi_inverse(norm(sigma), self)?;
        Ok(1.0 / self.nu(z))
    }
}

/// Solves `Φ(z) = s` by Newton's method safeguarded with bisection on the
/// bracket `[0, 2s/a0 + 1]` (valid because `Φ(z) ≥ a0·z`).
pub fn ferro_phi_inverse(s: f64, law: &FerroLaw) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Phi inverse needs s >= 0, got {s}"
        )));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let tol = law.newton_tol * s.max(1.0);
    let (mut lo, mut hi) = (0.0, 2.0 * s / law.a0 + 1.0);
    // Φ'(0) = a0 + a1 is the steepest slope for the exponential law.
    let mut z = (s / law.nu(0.0)).min(hi);
    for _ in 0..law.newton_maxit {
        let f = law.phi(z) - s;
        if f.abs() <= tol {
            return Ok(z);
        }
        if f < 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(z);
        }
        let slope = law.dphi(z);
        let newton = z - f / slope;
        z = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let f = law.phi(z) - s;
    if f.abs() <= tol {
        return Ok(z);
    }
    Err(Error::PhiInverse {
        target: s,
        lo,
        hi,
        iterations: law.newton_maxit,
    })
}

/// Element Jacobian `γ(σ)|T| I - t(σ,z)|T| σσᵀ` of `σ ↦ |T| γ(σ) σ` with
/// `t(σ,z) = ν'(z) / (Φ'(z) ν(z)² |σ|)`, `z = Φ^{-1}(|σ|)`.
pub fn ferro_jacobian_block(sigma: &[f64; 3], vol: f64, law: &FerroLaw) -> Result<[[f64; 3]; 3]> {
    let s = norm(sigma);
    let mut j = [[0.0; 3]; 3];
    if s == 0.0 {
        let g = vol / law.nu(0.0);
        for (a, row) in j.iter_mut().enumerate() {
            row[a] = g;
        }
        return Ok(j);
    }
    let z = ferro_phi_inverse(s, law)?;
    let nu = law.nu(z);
    let t = ferro_t(s, z, law);
    for a in 0..3 {
        for b in 0..3 {
            j[a][b] = -t * vol * sigma[a] * sigma[b];
        }
        j[a][a] += vol / nu;
    }
    Ok(j)
}

fn ferro_t(s: f64, z: f64, law: &FerroLaw) -> f64 {
    let nu = law.nu(z);
    law.dnu(z) / (law.dphi(z) * nu * nu * s)
}

/// Woodbury closed form of the inverse element Jacobian:
/// `ν(z)/|T| I - t ν² / ((t ν |σ|² - 1)|T|) σσᵀ`. When the denominator is
/// within `1e-8` of zero the block is inverted numerically. At `σ = 0`
/// returns the limit `ν(0)/|T| I`.
pub fn ferro_jacobian_inverse_block(
    sigma: &[f64; 3],
    vol: f64,
    law: &FerroLaw,
) -> Result<[[f64; 3]; 3]> {
    let s = norm(sigma);
    let mut inv = [[0.0; 3]; 3];
    if s == 0.0 {
        let d = law.nu(0.0) / vol;
        for (a, row) in inv.iter_mut().enumerate() {
            row[a] = d;
        }
        return Ok(inv);
    }
    let z = ferro_phi_inverse(s, law)?;
    let nu = law.nu(z);
    let t = ferro_t(s, z, law);
    let denom = t * nu * s * s - 1.0;
    if denom.abs() <= 1e-8 {
        let j = ferro_jacobian_block(sigma, vol, law)?;
        return invert3(&j).ok_or(Error::DegenerateInput(
            "singular ferromagnetic Jacobian block",
        ));
    }
    let coef = -t * nu * nu / (denom * vol);
    for a in 0..3 {
        for b in 0..3 {
            inv[a][b] = coef * sigma[a] * sigma[b];
        }
        inv[a][a] += nu / vol;
    }
    Ok(inv)
}

/// Inverse of a 3×3 matrix by cofactors; `None` when singular.
pub fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let c =
        |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let cof = [
        [c(1, 2, 1, 2), -c(1, 2, 0, 2), c(1, 2, 0, 1)],
        [-c(0, 2, 1, 2), c(0, 2, 0, 2), -c(0, 2, 0, 1)],
        [c(0, 1, 1, 2), -c(0, 1, 0, 2), c(0, 1, 0, 1)],
    ];
    let det = m[0][0] * cof[0][0] + m[0][1] * cof[0][1] + m[0][2] * cof[0][2];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            inv[a][b] = cof[b][a] / det;
        }
    }
    Some(inv)
}

/// Sequence of dense `N × N` blocks, one per element, acting on vectors
/// laid out element by element.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiag<const N: usize> {
    blocks: Vec<[[f64; N]; N]>,
}

pub type BlockDiag2 = BlockDiag<2>;
pub type BlockDiag3 = BlockDiag<3>;

impl<const N: usize> BlockDiag<N> {
    pub fn new(blocks: Vec<[[f64; N]; N]>) -> Self {
        Self { blocks }
    }

    pub fn identity(elements: usize) -> Self {
        let mut id = [[0.0; N]; N];
        for (a, row) in id.iter_mut().enumerate() {
            row[a] = 1.0;
        }
        Self {
            blocks: vec![id; elements],
        }
    }

    pub fn num_elements(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        N * self.blocks.len()
    }

    pub fn blocks(&self) -> &[[[f64; N]; N]] {
        &self.blocks
    }

    pub fn block(&self, e: usize) -> &[[f64; N]; N] {
        &self.blocks[e]
    }

    /// `y = B x` without dimension checks.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for ((blk, xe), ye) in self
            .blocks
            .iter()
            .zip(x.chunks_exact(N))
            .zip(y.chunks_exact_mut(N))
        {
            for a in 0..N {
                let mut acc = 0.0;
                for b in 0..N {
                    acc += blk[a][b] * xe[b];
                }
                ye[a] = acc;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.blocks
            .iter()
            .flatten()
            .flatten()
            .all(|v| v.is_finite())
    }

    /// Symmetric with positive leading principal minors, per block.
    pub fn is_spd(&self) -> bool {
        self.blocks.iter().all(block_is_spd)
    }
}

fn block_is_spd<const N: usize>(b: &[[f64; N]; N]) -> bool {
    let scale = b.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for r in 0..N {
        for c in 0..r {
            if (b[r][c] - b[c][r]).abs() > 1e-12 * scale {
                return false;
            }
        }
    }
    // Sylvester's criterion via an in-place Cholesky.
    let mut m = *b;
    for j in 0..N {
        let mut d = m[j][j];
        for k in 0..j {
            d -= m[j][k] * m[j][k];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        m[j][j] = d;
        for i in j + 1..N {
            let mut s = m[i][j];
            for k in 0..j {
                s -= m[i][k] * m[j][k];
            }
            m[i][j] = s / d;
        }
    }
    true
}

/// Per-element dense block times per-element sub-vector.
pub fn apply_block_diag<const N: usize>(b: &BlockDiag<N>, x: &[f64]) -> Result<Vec<f64>> {
    check_len("apply_block_diag", b.dim(), x.len())?;
    let mut y = vec![0.0; x.len()];
    b.apply_into(x, &mut y);
    Ok(y)
}
