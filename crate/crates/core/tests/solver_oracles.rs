//! Solver steps checked against dense reference computations.

#![allow(clippy::needless_range_loop)]

use dualtpd::dense::{norm2, DenseCholesky};
use dualtpd::fem::assemble_stiffness;
use dualtpd::kernels::{dual_flux, gamma_regularized, jacobian_block_pow, PowerLaw};
use dualtpd::problems::{Domain, Problem, ProblemSpec};
use dualtpd::solvers::{
    dual_pd_solve, dual_tpd_solve, pgd_energy, pgd_solve, residual, tpd_step, DualPdOptions,
    DualState, Init, InnerSolver, PgdMode, PgdOptions, PgdPreconditioner, Preconditioner,
    SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gaussian elimination with partial pivoting on a row-major matrix.
fn dense_solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
            .unwrap();
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            b.swap(k, piv);
        }
        for i in k + 1..n {
            let m = a[i * n + k] / a[k * n + k];
            for c in k..n {
                a[i * n + c] -= m * a[k * n + c];
            }
            b[i] -= m * b[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| a[k * n + c] * b[c]).sum();
        b[k] = (b[k] - s) / a[k * n + k];
    }
    b
}

fn small_square(p: f64) -> Problem {
    ProblemSpec::new(Domain::Square, PowerLaw::new(p).unwrap(), 2, 3)
        .unwrap()
        .assemble()
        .unwrap()
}

fn random_state(pr: &Problem, seed: u64) -> DualState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DualState {
        sigma: (0..2 * pr.num_elements())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect(),
        u: (0..pr.num_nodes())
            .map(|_| rng.gen_range(-0.1..0.1))
            .collect(),
    }
}

/// Residual computed from dense `D` and the flux formula.
fn dense_residual(pr: &Problem, law: &PowerLaw, st: &DualState) -> Vec<f64> {
    let (ns, nu) = (st.sigma.len(), st.u.len());
    let d = pr.d().to_dense();
    let mut r = vec![0.0; ns + nu];
    for e in 0..pr.num_elements() {
        let f = dual_flux(&[st.sigma[2 * e], st.sigma[2 * e + 1]], law);
        for a in 0..2 {
            let row = 2 * e + a;
            let du: f64 = (0..nu).map(|j| d[row * nu + j] * st.u[j]).sum();
            r[row] = pr.areas()[e] * f[a] - du;
        }
    }
    for j in 0..nu {
        let dts: f64 = (0..ns).map(|i| d[i * nu + j] * st.sigma[i]).sum();
        r[ns + j] = dts - pr.load()[j];
    }
    r
}

/// `I_σ` blocks (not their inverses) built directly from the kernels.
fn dense_i_sigma(
    pr: &Problem,
    law: &PowerLaw,
    sigma: &[f64],
    kind: Preconditioner,
) -> Vec<[[f64; 2]; 2]> {
    (0..pr.num_elements())
        .map(|e| {
            let s = [sigma[2 * e], sigma[2 * e + 1]];
            let area = pr.areas()[e];
            match kind {
                Preconditioner::Jacobian => jacobian_block_pow(&s, area, law).unwrap(),
                Preconditioner::Mass => {
                    let g = gamma_regularized(&s, law) * area;
                    [[g, 0.0], [0.0, g]]
                }
            }
        })
        .collect()
}

#[test]
fn tpd_step_equals_dense_transformed_system() {
    for (p, kind) in [
        (1.5, Preconditioner::Jacobian),
        (3.0, Preconditioner::Jacobian),
        (1.5, Preconditioner::Mass),
        (4.0, Preconditioner::Mass),
    ] {
        let pr = small_square(p);
        let cfg = SolverConfig {
            alpha: 0.7,
            preconditioner: kind,
            inner: InnerSolver::Direct,
            ..SolverConfig::default()
        };
        let law = cfg.law_for(&pr).unwrap();
        let st0 = random_state(&pr, 11);
        let (ns, nu) = (st0.sigma.len(), st0.u.len());
        let n = ns + nu;

        // K = [[I_σ, -D], [Dᵀ, 0]]; the step is x ← x - α K⁻¹ r
        let d = pr.d().to_dense();
        let blocks = dense_i_sigma(&pr, &law, &st0.sigma, kind);
        let mut k = vec![0.0; n * n];
        for (e, b) in blocks.iter().enumerate() {
            for a in 0..2 {
                for c in 0..2 {
                    k[(2 * e + a) * n + 2 * e + c] = b[a][c];
                }
            }
        }
        for i in 0..ns {
            for j in 0..nu {
                k[i * n + ns + j] = -d[i * nu + j];
                k[(ns + j) * n + i] = d[i * nu + j];
            }
        }
        let corr = dense_solve(k, dense_residual(&pr, &law, &st0));

        let mut st = st0.clone();
        tpd_step(&mut st, &pr, &cfg).unwrap();
        let expect: Vec<f64> = st0
            .sigma
            .iter()
            .chain(&st0.u)
            .zip(&corr)
            .map(|(x, c)| x - 0.7 * c)
            .collect();
        let got: Vec<f64> = st.sigma.iter().chain(&st.u).copied().collect();
        let diff: Vec<f64> = got.iter().zip(&expect).map(|(a, b)| a - b).collect();
        assert!(
            norm2(&diff) <= 1e-10 * norm2(&expect),
            "p={p} {kind:?}: {}",
            norm2(&diff)
        );
    }
}

#[test]
fn residual_matches_dense_formula() {
    let pr = small_square(2.5);
    let law = PowerLaw::new(2.5).unwrap();
    let st = random_state(&pr, 3);
    let (rs, ru, rel) = residual(&st, &pr, &law).unwrap();
    let dense = dense_residual(&pr, &law, &st);
    let ours: Vec<f64> = rs.iter().chain(&ru).copied().collect();
    for (a, b) in ours.iter().zip(&dense) {
        assert!((a - b).abs() <= 1e-13 * (1.0 + b.abs()));
    }
    assert!((rel - norm2(&dense) / norm2(pr.load())).abs() <= 1e-13);
}

#[test]
fn dual_pd_without_extrapolation_is_block_jacobi() {
    let pr = small_square(1.5);
    let cfg = SolverConfig {
        alpha: 0.5,
        inner: InnerSolver::Direct,
        max_outer: 1,
        init: Init::Random(4),
        ..SolverConfig::jacobian(0.5)
    };
    let law = cfg.law_for(&pr).unwrap();
    let st0 = DualState::random(&pr, 4);
    let opts = DualPdOptions {
        theta: 0.0,
        lagged_sigma: true,
    };
    let (st, rep) = dual_pd_solve(&pr, &cfg, &opts).unwrap();
    assert_eq!(rep.iterations, 1);

    // x ← x - α diag(I_σ, S)⁻¹ r with S = Dᵀ I_σ⁻¹ D
    let r = dense_residual(&pr, &law, &st0);
    let ns = st0.sigma.len();
    let blocks = dense_i_sigma(&pr, &law, &st0.sigma, Preconditioner::Jacobian);
    let mut inv_blocks = vec![];
    for (e, b) in blocks.iter().enumerate() {
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        let inv = [
            [b[1][1] / det, -b[0][1] / det],
            [-b[1][0] / det, b[0][0] / det],
        ];
        let rs = [r[2 * e], r[2 * e + 1]];
        let sig = [
            st0.sigma[2 * e] - 0.5 * (inv[0][0] * rs[0] + inv[0][1] * rs[1]),
            st0.sigma[2 * e + 1] - 0.5 * (inv[1][0] * rs[0] + inv[1][1] * rs[1]),
        ];
        assert!(
            (sig[0] - st.sigma[2 * e]).abs() < 1e-11
                && (sig[1] - st.sigma[2 * e + 1]).abs() < 1e-11
        );
        inv_blocks.push(inv);
    }
    let nu = st0.u.len();
    let d = pr.d().to_dense();
    let mut s = vec![0.0; nu * nu];
    for (e, inv) in inv_blocks.iter().enumerate() {
        for a in 0..2 {
            for c in 0..2 {
                for i in 0..nu {
                    for j in 0..nu {
                        s[i * nu + j] +=
                            d[(2 * e + a) * nu + i] * inv[a][c] * d[(2 * e + c) * nu + j];
                    }
                }
            }
        }
    }
    let du = dense_solve(s, r[ns..].to_vec());
    for j in 0..nu {
        assert!((st0.u[j] - 0.5 * du[j] - st.u[j]).abs() < 1e-10, "u[{j}]");
    }
}

#[test]
fn linear_error_matches_direct_fem_solution() {
    for domain in [Domain::Square, Domain::Disk] {
        let pr = ProblemSpec::with_mesh_size(domain, PowerLaw::new(2.0).unwrap(), 16)
            .unwrap()
            .assemble()
            .unwrap();
        let direct = DenseCholesky::from_csr(&assemble_stiffness(pr.p1()))
            .unwrap()
            .solve(pr.load());
        let cfg = SolverConfig {
            stop_tol: 1e-10,
            ..SolverConfig::jacobian(1.0)
        };
        let (st, _) = dual_tpd_solve(&pr, &cfg).unwrap();
        let (a, b) = (pr.u_error(&st.u).unwrap(), pr.u_error(&direct).unwrap());
        assert!((a - b).abs() <= 1e-10, "{domain:?}: {a} vs {b}");
    }
}

#[test]
fn runs_are_deterministic() {
    let pr = ProblemSpec::disk_radial(1.5, 4)
        .unwrap()
        .assemble()
        .unwrap();
    for cfg in [
        SolverConfig {
            init: Init::Random(9),
            eps0: 1e-4,
            ..SolverConfig::jacobian(1.0)
        },
        SolverConfig::mass(0.8),
    ] {
        let (s1, r1) = dual_tpd_solve(&pr, &cfg).unwrap();
        let (s2, r2) = dual_tpd_solve(&pr, &cfg).unwrap();
        assert_eq!(r1.history, r2.history);
        assert_eq!(s1, s2);
    }
}

#[test]
fn line_search_decreases_energy_monotonically() {
    let pr = ProblemSpec::disk_radial(3.0, 3)
        .unwrap()
        .assemble()
        .unwrap();
    let law = PowerLaw::new(3.0).unwrap();
    let mut energies = vec![];
    let mut cfg = SolverConfig {
        max_outer: 0,
        ..SolverConfig::jacobian(1.0)
    };
    let opts = PgdOptions::new(PgdMode::LineSearch, PgdPreconditioner::Poisson);
    for k in 0..6 {
        cfg.max_outer = k;
        let (u, _) = pgd_solve(&pr, &cfg, &opts).unwrap();
        energies.push(pgd_energy(&pr, &law, &u));
    }
    assert!(energies.windows(2).all(|w| w[1] <= w[0]), "{energies:?}");
}

#[test]
fn pgd_reaches_the_dual_solution() {
    let pr = ProblemSpec::disk_radial(1.5, 4)
        .unwrap()
        .assemble()
        .unwrap();
    let cfg = SolverConfig {
        alpha: 0.2,
        eps0: 1e-4,
        stop_tol: 1e-8,
        ..SolverConfig::jacobian(0.2)
    };
    let (u, rep) = pgd_solve(
        &pr,
        &cfg,
        &PgdOptions::new(PgdMode::Fixed, PgdPreconditioner::Weighted { eps: 1e-4 }),
    )
    .unwrap();
    assert!(rep.converged);
    let (st, _) = dual_tpd_solve(
        &pr,
        &SolverConfig {
            stop_tol: 1e-8,
            ..SolverConfig::jacobian(1.0)
        },
    )
    .unwrap();
    let diff: Vec<f64> = u.iter().zip(&st.u).map(|(a, b)| a - b).collect();
    assert!(
        norm2(&diff) <= 1e-5 * norm2(&st.u),
        "{}",
        norm2(&diff) / norm2(&st.u)
    );
}
