//! Elementwise kernels of the exponential permeability law: the scalar
//! inverse of the profile, the Jacobian block and its Woodbury inverse,
//! and the p-curl coefficient.
//!
//! cargo run --release --example ferromagnetic_kernels

#![allow(clippy::needless_range_loop)]

use dualtpd::kernels::{
    ferro_jacobian_block, ferro_jacobian_inverse_block, ferro_phi_inverse, pcurl_gamma, FerroLaw,
    PowerLaw,
};

fn main() -> dualtpd::Result<()> {
    let law = FerroLaw::new(10.0, 73.89, 1.0)?;
    println!("nu(s) = {} + {} exp(-{} s)", law.a0, law.a1, law.a2);
    println!(
        "min Phi' = {:.3e} (the law is barely strongly monotone)",
        law.monotonicity_constant()
    );

    println!(
        "{:>8} {:>12} {:>12} {:>14}",
        "|sigma|", "z", "gamma", "|J J^-1 - I|"
    );
    for s in [0.0, 1.0, 10.0, 39.9, 40.0, 60.0, 100.0] {
        let z = ferro_phi_inverse(s, &law)?;
        let sigma = [s / 3f64.sqrt(); 3];
        let j = ferro_jacobian_block(&sigma, 1.0, &law)?;
        let inv = ferro_jacobian_inverse_block(&sigma, 1.0, &law)?;
        let mut err = 0.0f64;
        for a in 0..3 {
            for b in 0..3 {
                let v: f64 = (0..3).map(|k| j[a][k] * inv[k][b]).sum();
                err = err.max((v - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
        println!("{s:>8} {z:>12.6} {:>12.6} {err:>14.2e}", law.gamma(&sigma)?);
    }

    // p = 1.5 has dual exponent 3, so gamma(sigma) = |sigma|
    let p = PowerLaw::new(1.5)?;
    println!(
        "p-curl, p = 1.5: gamma(0, 0, 2) = {}",
        pcurl_gamma(&[0.0, 0.0, 2.0], &p)
    );
    Ok(())
}
