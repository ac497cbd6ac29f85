//! The classical birth-and-death process carried by a lattice family:
//! generator, exact transition kernels, and relaxation to stationarity.
//!
//! Run with: cargo run --example birth_death_walk

use askey_lattice::families::{validate, FamilyId, FamilyParams, LatticeRequest};
use askey_lattice::linalg;
use askey_lattice::stochastic::{bd_evolve, bd_generator, bd_kernel, stationary, Distribution};

fn main() -> askey_lattice::Result<()> {
    let n = 8;
    let inst = validate(
        FamilyId::QuantumQKrawtchouk,
        FamilyParams::QuantumQKrawtchouk { q: 0.5, p: 1.5 * 0.5f64.powi(-(n as i32)) },
        LatticeRequest::Finite { n },
    )?;
    println!("quantum-q-Krawtchouk(q = 0.5), N = {n}\n");

    // Probability is conserved exactly: every generator column sums to 0.0
    // in floating point, not just approximately.
    let gen = bd_generator(&inst);
    let sums = gen.column_sums();
    println!("generator column sums: {:?}", sums);
    assert!(sums.iter().all(|&s| s == 0.0));

    // The closed-form kernel agrees with brute-force matrix exponentiation.
    for t in [0.1, 1.0, 5.0] {
        let kernel = bd_kernel(&inst, t)?;
        let scaled: Vec<Vec<f64>> = gen
            .entries
            .iter()
            .map(|row| row.iter().map(|v| v * t).collect())
            .collect();
        let brute = linalg::expm(&scaled);
        let mut dev = 0.0f64;
        for x in 0..kernel.dim() {
            for y in 0..kernel.dim() {
                dev = dev.max((kernel.entries[x][y] - brute[x][y]).abs());
            }
        }
        println!("t = {t:>4}: max |closed-form kernel - expm(tL)| = {dev:.2e}");
    }

    // Relax a walker started at site 0 toward the stationary law.
    let pi = stationary(&inst);
    let start = Distribution::delta(inst.n_points(), 0)?;
    let t_relax = 50.0 / inst.energy(1)?;
    let times = [0.0, 0.2 * t_relax, t_relax];
    let snapshots = bd_evolve(&inst, &start, &times)?;
    println!("\nrelaxation from delta_0 (t* = 50/E(1) = {t_relax:.2}):");
    for (t, p) in times.iter().zip(&snapshots) {
        let dist = p
            .p
            .iter()
            .zip(&pi.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        println!("  t = {t:>8.2}: total mass {:.12}, max |p - pi| = {dist:.2e}", p.p.iter().sum::<f64>());
    }
    println!("\nstationary law pi(x):");
    for (x, v) in pi.p.iter().enumerate() {
        println!("  x = {x}: {v:.6}  {}", "#".repeat((v * 120.0).round() as usize));
    }
    Ok(())
}
