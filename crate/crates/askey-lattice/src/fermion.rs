//! Ground-state physics of the free-fermion Hamiltonian built from a family
//! instance: Fermi level selection, correlation matrices (spectral sum and
//! Christoffel–Darboux forms), block entanglement entropy, and exact
//! single-particle time evolution.

use crate::error::{Error, Result};
use crate::families::{FamilyInstance, LatticeSpec};
use crate::linalg;
use crate::spectral::{analytic_eigensystem, EigenSystem};
use serde::Serialize;

/// Degeneracy band: μ within this relative distance of some 𝓔(n) is refused.
const DEGENERACY_BAND: f64 = 1e-12;

/// A chemical potential μ strictly inside a spectral gap, with the top filled
/// mode K; the filled set is 𝓚 = {0,…,K}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FermiLevel {
    pub mu: f64,
    pub k: usize,
}

/// Symmetric ground-state correlation matrix C_{x,y} = Σ_{k≤K} φ̂_k(x)φ̂_k(y),
/// possibly restricted to a leading block {0,…,L}.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationMatrix {
    pub entries: Vec<Vec<f64>>,
    pub fermi: FermiLevel,
}

impl CorrelationMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[i][i]).sum()
    }
}

/// Complex site amplitudes at one instant of single-particle evolution.
#[derive(Debug, Clone, Serialize)]
pub struct AmplitudeVector {
    pub t: f64,
    pub mu: f64,
    /// (re, im) per lattice site
    pub amplitudes: Vec<(f64, f64)>,
}

impl AmplitudeVector {
    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|(re, im)| re * re + im * im)
            .sum::<f64>()
            .sqrt()
    }
}

/// The unique K with 𝓔(K) < μ < 𝓔(K+1).
///
/// For finite lattices μ above 𝓔(N) is allowed and fills every mode (K = N,
/// 𝓔(N+1) read as +∞). Semi-infinite instances refuse μ above the exposed
/// part of the spectrum, and bounded spectra (Al-Salam–Carlitz II, where
/// 𝓔(n) = 1 − qⁿ < 1) refuse μ at or beyond the supremum.
pub fn fermi_level(inst: &FamilyInstance, mu: f64) -> Result<FermiLevel> {
    if !mu.is_finite() || mu <= 0.0 {
        return Err(Error::OutOfBand(mu));
    }
    let sup = inst.energy_sup();
    if let LatticeSpec::SemiInfinite { .. } = inst.lattice() {
        if sup.is_finite() && mu >= sup {
            return Err(Error::OutOfBand(mu));
        }
    }
    let mut k: Option<usize> = None;
    for n in 0..inst.n_points() {
        let e = inst.energy(n).expect("n in range");
        if (mu - e).abs() < DEGENERACY_BAND * (1.0 + e) {
            return Err(Error::DegenerateFermiLevel { mu, n });
        }
        if e < mu {
            k = Some(n);
        } else {
            break;
        }
    }
    let k = k.expect("mu > 0 = E(0) fills at least mode 0");
    if k > inst.n_max() {
        return Err(Error::ModeCapExceeded { n: k, n_max: inst.n_max() });
    }
    Ok(FermiLevel { mu, k })
}

/// Ground-state energy Σ_{k∈𝓚} (𝓔(k) − μ), the minimum over all excitation
/// sets (every filled mode contributes a negative term, every empty mode
/// would contribute a positive one).
pub fn ground_energy(inst: &FamilyInstance, mu: f64) -> Result<f64> {
    let fermi = fermi_level(inst, mu)?;
    let mut e = 0.0;
    for n in 0..=fermi.k {
        e += inst.energy(n).expect("n in range") - mu;
    }
    Ok(e)
}

/// C_{x,y} = Σ_{k∈𝓚} φ̂_k(x)φ̂_k(y); exactly symmetric by assembly.
pub fn correlation_matrix(inst: &FamilyInstance, mu: f64) -> Result<CorrelationMatrix> {
    let fermi = fermi_level(inst, mu)?;
    let eig = analytic_eigensystem(inst);
    Ok(correlation_from_modes(&eig, fermi, inst.n_points()))
}

/// Assembly shared with `block_correlation`; public so sweeps can reuse one
/// eigensystem across many μ values.
pub fn correlation_from_modes(
    eig: &EigenSystem,
    fermi: FermiLevel,
    dim: usize,
) -> CorrelationMatrix {
    let mut entries = vec![vec![0.0; dim]; dim];
    for x in 0..dim {
        for y in x..dim {
            let c: f64 = (0..=fermi.k).map(|k| eig.modes[k][x] * eig.modes[k][y]).sum();
            entries[x][y] = c;
            entries[y][x] = c;
        }
    }
    CorrelationMatrix { entries, fermi }
}

/// Off-diagonal correlation entry in Christoffel–Darboux form:
///
///   C_{x,y} = (α_K d_K² / α_{K+1}) φ₀(x)φ₀(y) ·
///             [P_{K+1}(η(x))P_K(η(y)) − P_{K+1}(η(y))P_K(η(x))] / (η(x) − η(y))
///
/// No sum over filled modes — the whole Fermi sea collapses onto the two
/// modes at the Fermi surface.
pub fn correlation_cd(inst: &FamilyInstance, mu: f64, x: usize, y: usize) -> Result<f64> {
    let fermi = fermi_level(inst, mu)?;
    if x == y {
        return Err(Error::DiagonalNotSupported(x));
    }
    if x >= inst.n_points() || y >= inst.n_points() {
        return Err(Error::IndexOutOfRange(format!(
            "({x},{y}) outside lattice of {} points",
            inst.n_points()
        )));
    }
    let k = fermi.k;
    if k + 1 >= inst.n_points() || (matches!(inst.lattice(), LatticeSpec::SemiInfinite { .. }) && k + 1 > inst.n_max()) {
        // K = N: P_{N+1} and α_{N+1} do not exist
        return Err(Error::CDUnavailable);
    }
    let pref = inst.leading_coeff(k)? * inst.norm_sq(k)? / inst.leading_coeff(k + 1)?;
    let num = inst.poly(k + 1, x)? * inst.poly(k, y)? - inst.poly(k + 1, y)? * inst.poly(k, x)?;
    let den = inst.eta(x)? - inst.eta(y)?;
    Ok(pref * inst.sqrt_weight(x)? * inst.sqrt_weight(y)? * num / den)
}

/// Leading (L+1)×(L+1) principal block of the correlation matrix.
pub fn block_correlation(inst: &FamilyInstance, mu: f64, l: usize) -> Result<CorrelationMatrix> {
    if l >= inst.n_points() {
        return Err(Error::IndexOutOfRange(format!(
            "block end L={l} outside lattice of {} points",
            inst.n_points()
        )));
    }
    let fermi = fermi_level(inst, mu)?;
    let eig = analytic_eigensystem(inst);
    Ok(correlation_from_modes(&eig, fermi, l + 1))
}

/// Von Neumann entanglement entropy of the block {0,…,L} in the ground
/// state: S = −Σ_j [λ_j ln λ_j + (1−λ_j) ln(1−λ_j)] over the block
/// correlation eigenvalues, with 0·ln 0 ≔ 0.
pub fn entanglement_entropy(inst: &FamilyInstance, mu: f64, l: usize) -> Result<f64> {
    let block = block_correlation(inst, mu, l)?;
    let (vals, _) = linalg::eigh(&block.entries)?;
    let mut s = 0.0;
    for lam in vals {
        // clamp rounding noise at the projector edges
        let lam = lam.clamp(0.0, 1.0);
        if lam > 0.0 && lam < 1.0 {
            s -= lam * lam.ln() + (1.0 - lam) * (1.0 - lam).ln();
        }
    }
    Ok(s.max(0.0))
}

/// ⟨y| e^{−i(𝓗_f−μ)t} |x⟩ = Σ_n φ̂_n(y)φ̂_n(x) e^{−i(𝓔(n)−μ)t}, summed over
/// exposed modes (all of them for finite lattices).
pub fn transition_amplitude(
    inst: &FamilyInstance,
    mu: f64,
    x: usize,
    y: usize,
    t: f64,
) -> Result<(f64, f64)> {
    if x >= inst.n_points() || y >= inst.n_points() {
        return Err(Error::IndexOutOfRange(format!(
            "({x},{y}) outside lattice of {} points",
            inst.n_points()
        )));
    }
    let eig = analytic_eigensystem(inst);
    let mut re = 0.0;
    let mut im = 0.0;
    for n in 0..eig.n_modes() {
        let w = eig.modes[n][x] * eig.modes[n][y];
        let phase = -(eig.energies[n] - mu) * t;
        re += w * phase.cos();
        im += w * phase.sin();
    }
    Ok((re, im))
}

/// General single-particle evolution: site amplitudes
/// Σ_n β_n φ̂_n(x) e^{−i(𝓔(n)−μ)t} for complex mode coefficients β.
pub fn evolve_single_particle(
    inst: &FamilyInstance,
    mu: f64,
    beta: &[(f64, f64)],
    t: f64,
) -> Result<AmplitudeVector> {
    let eig = analytic_eigensystem(inst);
    if beta.len() != eig.n_modes() {
        return Err(Error::IndexOutOfRange(format!(
            "{} mode coefficients supplied, {} modes exposed",
            beta.len(),
            eig.n_modes()
        )));
    }
    let npts = inst.n_points();
    let mut amplitudes = vec![(0.0, 0.0); npts];
    for (n, &(bre, bim)) in beta.iter().enumerate() {
        let phase = -(eig.energies[n] - mu) * t;
        let (pc, ps) = (phase.cos(), phase.sin());
        // β_n · e^{iφ}
        let cre = bre * pc - bim * ps;
        let cim = bre * ps + bim * pc;
        for (x, amp) in amplitudes.iter_mut().enumerate() {
            let v = eig.modes[n][x];
            amp.0 += cre * v;
            amp.1 += cim * v;
        }
    }
    Ok(AmplitudeVector { t, mu, amplitudes })
}

/// Energy of the excited state labelled by mode set 𝓙: Σ_{j∈𝓙} (𝓔(j) − μ).
/// 𝓙 must be strictly increasing (Pauli exclusion) and within exposed modes.
pub fn excitation_energy(inst: &FamilyInstance, mu: f64, j: &[usize]) -> Result<f64> {
    for w in j.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidExcitationSet(format!(
                "indices must be strictly increasing, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    let mut e = 0.0;
    for &n in j {
        if n > inst.n_max() {
            return Err(Error::ModeCapExceeded { n, n_max: inst.n_max() });
        }
        e += inst.energy(n)? - mu;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{validate, FamilyId, FamilyParams, LatticeRequest};

    fn kraw(p: f64, n: usize) -> FamilyInstance {
        validate(
            FamilyId::Krawtchouk,
            FamilyParams::Krawtchouk { p },
            LatticeRequest::Finite { n },
        )
        .unwrap()
    }

    #[test]
    fn fermi_level_examples() {
        assert_eq!(fermi_level(&kraw(0.5, 4), 2.5).unwrap().k, 2);
        let hahn = validate(
            FamilyId::Hahn,
            FamilyParams::Hahn { a: 1.0, b: 1.0 },
            LatticeRequest::Finite { n: 3 },
        )
        .unwrap();
        // spectrum 0, 2, 6, 12
        assert_eq!(fermi_level(&hahn, 3.0).unwrap().k, 1);
        assert_eq!(fermi_level(&hahn, 100.0).unwrap().k, 3);
        assert_eq!(fermi_level(&hahn, -1.0).unwrap_err().name(), "OutOfBand");
        assert_eq!(
            fermi_level(&hahn, 2.0).unwrap_err().name(),
            "DegenerateFermiLevel"
        );
        let asc = validate(
            FamilyId::AlSalamCarlitzII,
            FamilyParams::AlSalamCarlitzII { q: 0.5, a: 1.0 },
            LatticeRequest::semi_infinite_default(),
        )
        .unwrap();
        assert_eq!(fermi_level(&asc, 1.5).unwrap_err().name(), "OutOfBand");
    }

    #[test]
    fn ground_energy_examples() {
        assert!((ground_energy(&kraw(0.5, 1), 0.5).unwrap() + 0.5).abs() < 1e-15);
        assert!((ground_energy(&kraw(0.5, 4), 2.5).unwrap() + 4.5).abs() < 1e-15);
    }

    #[test]
    fn correlation_hand_case() {
        let c = correlation_matrix(&kraw(0.5, 1), 0.5).unwrap();
        for row in &c.entries {
            for &v in row {
                assert!((v - 0.5).abs() < 1e-15);
            }
        }
        assert!((c.trace() - 1.0).abs() < 1e-15);
        let cd = correlation_cd(&kraw(0.5, 1), 0.5, 0, 1).unwrap();
        assert!((cd - 0.5).abs() < 1e-12, "cd={cd}");
    }

    #[test]
    fn cd_matches_spectral_hahn() {
        let hahn = validate(
            FamilyId::Hahn,
            FamilyParams::Hahn { a: 1.0, b: 1.0 },
            LatticeRequest::Finite { n: 6 },
        )
        .unwrap();
        let c = correlation_matrix(&hahn, 3.0).unwrap();
        for x in 0..7 {
            for y in 0..7 {
                if x == y {
                    continue;
                }
                let cd = correlation_cd(&hahn, 3.0, x, y).unwrap();
                assert!(
                    (cd - c.entries[x][y]).abs() <= 1e-8 * (1.0 + c.entries[x][y].abs()),
                    "x={x} y={y}: {cd} vs {}",
                    c.entries[x][y]
                );
            }
        }
    }

    #[test]
    fn cd_refusals() {
        let inst = kraw(0.5, 4);
        assert_eq!(
            correlation_cd(&inst, 2.5, 2, 2).unwrap_err().name(),
            "DiagonalNotSupported"
        );
        // K = N: all modes filled
        assert_eq!(
            correlation_cd(&inst, 10.0, 0, 1).unwrap_err().name(),
            "CDUnavailable"
        );
    }

    #[test]
    fn full_filling_gives_identity() {
        let inst = kraw(0.3, 6);
        let c = correlation_matrix(&inst, 100.0).unwrap();
        for x in 0..7 {
            for y in 0..7 {
                let target = if x == y { 1.0 } else { 0.0 };
                assert!((c.entries[x][y] - target).abs() < 1e-12);
            }
        }
        assert!(entanglement_entropy(&inst, 100.0, 3).unwrap() < 1e-10);
    }

    #[test]
    fn entropy_hand_cases() {
        let s = entanglement_entropy(&kraw(0.5, 1), 0.5, 0).unwrap();
        assert!((s - 2f64.ln()).abs() < 1e-12);
        // full lattice: projector spectrum {0,1}
        let s = entanglement_entropy(&kraw(0.5, 8), 3.5, 8).unwrap();
        assert!(s < 1e-10);
    }

    #[test]
    fn amplitude_unitarity_and_hand_case() {
        let inst = kraw(0.5, 1);
        for &t in &[0.3f64, 1.0, 10.0] {
            let (re, im) = transition_amplitude(&inst, 0.0, 1, 0, t).unwrap();
            assert!((re - (0.5 - 0.5 * t.cos())).abs() < 1e-14);
            assert!((im - 0.5 * t.sin()).abs() < 1e-14);
        }
        let inst = kraw(0.3, 7);
        for &t in &[0.1f64, 1.0, 10.0] {
            let total: f64 = (0..8)
                .map(|x| {
                    let (re, im) = transition_amplitude(&inst, 1.5, x, 3, t).unwrap();
                    re * re + im * im
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "t={t}: {total}");
        }
    }

    #[test]
    fn evolve_matches_transition_column() {
        let inst = kraw(0.4, 5);
        let eig = analytic_eigensystem(&inst);
        let y = 2;
        let beta: Vec<(f64, f64)> = (0..eig.n_modes()).map(|n| (eig.modes[n][y], 0.0)).collect();
        let amp = evolve_single_particle(&inst, 1.2, &beta, 0.7).unwrap();
        for x in 0..6 {
            let (re, im) = transition_amplitude(&inst, 1.2, x, y, 0.7).unwrap();
            assert!((amp.amplitudes[x].0 - re).abs() < 1e-13);
            assert!((amp.amplitudes[x].1 - im).abs() < 1e-13);
        }
        assert!((amp.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn excitation_energy_rules() {
        let inst = kraw(0.5, 4);
        assert_eq!(excitation_energy(&inst, 0.7, &[]).unwrap(), 0.0);
        assert!((excitation_energy(&inst, 0.0, &[0, 1]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            excitation_energy(&inst, 0.0, &[1, 1]).unwrap_err().name(),
            "InvalidExcitationSet"
        );
        // J = full Fermi sea reproduces ground_energy
        let mu = 2.5;
        let k = fermi_level(&inst, mu).unwrap().k;
        let sea: Vec<usize> = (0..=k).collect();
        assert_eq!(
            excitation_energy(&inst, mu, &sea).unwrap(),
            ground_energy(&inst, mu).unwrap()
        );
    }
}
