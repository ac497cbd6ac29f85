//! Coherent single-particle dynamics on the fermion chain and the matching
//! multi-walker decay law of the associated dissipative process.
//!
//! Run with: cargo run --example quantum_walk

use askey_lattice::families::{validate, FamilyId, FamilyParams, LatticeRequest};
use askey_lattice::fermion::{evolve_single_particle, transition_amplitude};
use askey_lattice::spectral::analytic_eigensystem;
use askey_lattice::stochastic::{fermion_walk_single, multi_walker_decay};

fn main() -> askey_lattice::Result<()> {
    let n = 10;
    let inst = validate(
        FamilyId::Hahn,
        FamilyParams::Hahn { a: 0.5, b: 2.5 },
        LatticeRequest::Finite { n },
    )?;
    let mu = 0.0;
    println!("Hahn(a = 0.5, b = 2.5), N = {n}\n");

    // Launch a particle localized at site 0: beta_n = phi_n(0).
    let eig = analytic_eigensystem(&inst);
    let beta: Vec<(f64, f64)> = (0..eig.n_modes()).map(|k| (eig.modes[k][0], 0.0)).collect();

    println!("unitary spreading of a particle started at x = 0:");
    for t in [0.0, 0.05, 0.2, 0.5] {
        let state = evolve_single_particle(&inst, mu, &beta, t)?;
        let profile: String = state
            .amplitudes
            .iter()
            .map(|(re, im)| {
                let p = re * re + im * im;
                char::from_digit(((p * 9.0).round() as u32).min(9), 10).unwrap()
            })
            .collect();
        println!("  t = {t:>5}: |psi(x)|^2 deciles [{profile}]  norm = {:.12}", state.norm());
    }

    // Transition amplitudes give the same picture one matrix element at a
    // time: |<x| e^{-iHt} |0>|^2 matches the evolved profile.
    let t = 0.2;
    let state = evolve_single_particle(&inst, mu, &beta, t)?;
    let mut dev = 0.0f64;
    for x in 0..inst.n_points() {
        let (re, im) = transition_amplitude(&inst, mu, x, 0, t)?;
        let (sre, sim) = state.amplitudes[x];
        dev = dev.max((re - sre).hypot(im - sim));
    }
    println!("\n|transition amplitude - evolved profile| <= {dev:.2e} at t = {t}");

    // The continuous-time walk coming from the same chain is a classical
    // stochastic marginal of the coherent dynamics.
    let column = fermion_walk_single(&inst, 0, 1.0)?;
    println!("\nclassical walk column from y = 0 at t = 1: total mass {:.12}", column.iter().sum::<f64>());

    // Several walkers dropped into distinct modes decay independently:
    // exp(-sum_j E(j) t).
    println!("\nmulti-walker survival exp(-(E(0)+E(2)+E(5)) t):");
    for t in [0.0, 0.1, 0.5, 1.0] {
        let f = multi_walker_decay(&inst, &[0, 2, 5], t)?;
        println!("  t = {t:>4}: {f:.10}");
    }
    Ok(())
}
