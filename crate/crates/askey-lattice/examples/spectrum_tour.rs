//! Tour of the closed-form eigensystems: build one instance per family,
//! print its spectrum, and cross-check against the numerical oracle.
//!
//! Run with: cargo run --example spectrum_tour

use askey_lattice::families::{validate, FamilyId, FamilyParams, LatticeRequest};
use askey_lattice::spectral::{analytic_eigensystem, build_hamiltonian, oracle_diagonalize};

fn main() -> askey_lattice::Result<()> {
    let q = 0.7;
    let n = 8usize;
    let instances = [
        FamilyParams::Krawtchouk { p: 0.5 },
        FamilyParams::Hahn { a: 1.0, b: 1.0 },
        FamilyParams::DualHahn { a: 0.5, b: 2.5 },
        FamilyParams::Racah { d: 1.0, a: n as f64 + 4.0, b: 1.5 },
        FamilyParams::QuantumQKrawtchouk { q, p: 1.5 * q.powi(-(n as i32)) },
        FamilyParams::QKrawtchouk { q, p: 0.5 },
        FamilyParams::AffineQKrawtchouk { q, p: 0.5 / q },
        FamilyParams::QHahn { q, a: 0.3, b: 0.6 },
        FamilyParams::DualQHahn { q, a: 0.3, b: 0.6 },
        FamilyParams::QRacah { q, d: 0.5, a: 0.2 * q.powi(n as i32), b: 0.6 },
    ];

    println!("closed-form spectra on the {}-point lattice (x = 0..{n}):\n", n + 1);
    for params in instances {
        let id = params.id();
        let inst = validate(id, params, LatticeRequest::Finite { n })?;
        let eig = analytic_eigensystem(&inst);
        let oracle = oracle_diagonalize(&build_hamiltonian(&inst))?;
        let worst = eig
            .energies
            .iter()
            .zip(&oracle.energies)
            .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
            .fold(0.0f64, f64::max);
        println!("{:>22}:  E(1) = {:.6}  E({n}) = {:.6}  |closed form - QL oracle| <= {worst:.1e}",
            id.tag(), eig.energies[1], eig.energies[n]);
    }

    println!("\nKrawtchouk(p=0.5) has the equally spaced spectrum E(n) = n:");
    let inst = validate(
        FamilyId::Krawtchouk,
        FamilyParams::Krawtchouk { p: 0.5 },
        LatticeRequest::Finite { n },
    )?;
    let energies: Vec<f64> = (0..=n).map(|m| inst.energy(m).unwrap()).collect();
    println!("  {energies:?}");
    Ok(())
}
