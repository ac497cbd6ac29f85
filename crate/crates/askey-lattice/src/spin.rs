//! XX spin-chain image of the fermion systems: inhomogeneous coupling/field
//! export (both sign variants), single-magnon dynamics with the parity
//! string factor, and brute-force magnon-sector oracles for small chains.

use crate::error::{Error, Result};
use crate::families::FamilyInstance;
use crate::linalg;
use crate::spectral::{analytic_eigensystem, build_hamiltonian};
use serde::{Deserialize, Serialize};

/// Sign convention of the exchange terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// +J exchange; single-magnon wavefunctions carry the (−1)^x string.
    Standard,
    /// −J exchange; string factor absorbed, amplitudes keep one sign.
    Alternative,
}

/// Interchange record for an inhomogeneous XX chain: nearest-neighbour
/// couplings J_x = √(B(x)D(x+1)) and on-site fields h_x = B(x)+D(x)−μ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinChainSpec {
    pub couplings: Vec<f64>,
    pub fields: Vec<f64>,
    pub variant: Variant,
    pub mu: f64,
}

impl SpinChainSpec {
    pub fn n_sites(&self) -> usize {
        self.fields.len()
    }

    /// Signed exchange constant actually entering the Hamiltonian.
    fn exchange(&self, x: usize) -> f64 {
        match self.variant {
            Variant::Standard => self.couplings[x],
            Variant::Alternative => -self.couplings[x],
        }
    }
}

/// A single up-spin excitation profile at one time.
#[derive(Debug, Clone, Serialize)]
pub struct MagnonState {
    pub t: f64,
    /// (re, im) amplitude per site
    pub amplitudes: Vec<(f64, f64)>,
}

impl MagnonState {
    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|(re, im)| re * re + im * im)
            .sum::<f64>()
            .sqrt()
    }
}

/// Chain coefficients of the instance at chemical potential μ. The couplings
/// are by construction the negated off-diagonal of the one-particle
/// Hamiltonian and the fields its diagonal shifted by μ.
pub fn export_chain(inst: &FamilyInstance, mu: f64, variant: Variant) -> SpinChainSpec {
    let h = build_hamiltonian(inst);
    SpinChainSpec {
        couplings: h.offdiag.iter().map(|v| -v).collect(),
        fields: h.diag.iter().map(|v| v - mu).collect(),
        variant,
        mu,
    }
}

/// Amplitude at site x and time t of the single-magnon state with mode
/// coefficients β: s(x)·Σ_n β_n φ̂_n(x) e^{−i(𝓔(n)−μ)t}, where the string
/// factor s(x) is (−1)^x for the standard variant and +1 otherwise.
pub fn magnon_amplitude(
    inst: &FamilyInstance,
    mu: f64,
    beta: &[f64],
    x: usize,
    t: f64,
    variant: Variant,
) -> Result<(f64, f64)> {
    if x >= inst.n_points() {
        return Err(Error::IndexOutOfRange(format!(
            "site {x} outside lattice of {} points",
            inst.n_points()
        )));
    }
    let eig = analytic_eigensystem(inst);
    if beta.len() != eig.n_modes() {
        return Err(Error::IndexOutOfRange(format!(
            "{} mode coefficients supplied, {} modes exposed",
            beta.len(),
            eig.n_modes()
        )));
    }
    let mut re = 0.0;
    let mut im = 0.0;
    for (n, &b) in beta.iter().enumerate() {
        let phase = -(eig.energies[n] - mu) * t;
        let amp = b * eig.modes[n][x];
        re += amp * phase.cos();
        im += amp * phase.sin();
    }
    let s = match variant {
        Variant::Standard => {
            if x % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        }
        Variant::Alternative => 1.0,
    };
    Ok((s * re, s * im))
}

/// Full magnon profile across the chain.
pub fn magnon_state(
    inst: &FamilyInstance,
    mu: f64,
    beta: &[f64],
    t: f64,
    variant: Variant,
) -> Result<MagnonState> {
    let amplitudes = (0..inst.n_points())
        .map(|x| magnon_amplitude(inst, mu, beta, x, t, variant))
        .collect::<Result<Vec<_>>>()?;
    Ok(MagnonState { t, amplitudes })
}

/// Dense Hamiltonian restricted to the fixed-magnon sector, in the
/// lexicographic occupied-site basis.
pub fn sector_matrix(spec: &SpinChainSpec, n_excitations: usize) -> Result<Vec<Vec<f64>>> {
    let n = spec.n_sites();
    match n_excitations {
        1 => {
            let mut m = vec![vec![0.0; n]; n];
            for x in 0..n {
                m[x][x] = spec.fields[x];
                if x + 1 < n {
                    let j = spec.exchange(x);
                    m[x][x + 1] = j;
                    m[x + 1][x] = j;
                }
            }
            Ok(m)
        }
        2 => {
            if n > 11 {
                return Err(Error::SectorTooLarge(format!(
                    "two-magnon sector limited to 11 sites, got {n}"
                )));
            }
            // basis: pairs (i, j) with i < j, lexicographic
            let mut pairs = Vec::new();
            let mut index = vec![vec![usize::MAX; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    index[i][j] = pairs.len();
                    pairs.push((i, j));
                }
            }
            let dim = pairs.len();
            let mut m = vec![vec![0.0; dim]; dim];
            for (a, &(i, j)) in pairs.iter().enumerate() {
                m[a][a] = spec.fields[i] + spec.fields[j];
                // hop either magnon to a free neighbouring site; the string
                // contributes no extra sign for nearest-neighbour moves
                let mut hop = |from: usize, to: usize, other: usize| {
                    if to != other {
                        let b = index[to.min(other)][to.max(other)];
                        m[a][b] += spec.exchange(from.min(to));
                    }
                };
                if i > 0 {
                    hop(i, i - 1, j);
                }
                if i + 1 < n {
                    hop(i, i + 1, j);
                }
                if j > 0 {
                    hop(j, j - 1, i);
                }
                if j + 1 < n {
                    hop(j, j + 1, i);
                }
            }
            Ok(m)
        }
        _ => Err(Error::SectorTooLarge(format!(
            "only 1- and 2-magnon sectors are supported, got {n_excitations}"
        ))),
    }
}

/// Exact diagonalization of the fixed-magnon sector; sorted eigenvalues.
/// Must reproduce {Σ_{j∈𝓙}(𝓔(j)−μ)} over subsets 𝓙 of the given size.
pub fn sector_oracle(
    inst: &FamilyInstance,
    mu: f64,
    n_excitations: usize,
    variant: Variant,
) -> Result<Vec<f64>> {
    if !inst.id().is_finite() {
        return Err(Error::SectorTooLarge(
            "magnon sectors of semi-infinite chains are infinite-dimensional".into(),
        ));
    }
    let spec = export_chain(inst, mu, variant);
    let m = sector_matrix(&spec, n_excitations)?;
    let (vals, _) = linalg::eigh(&m)?;
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{validate, FamilyId, FamilyParams, LatticeRequest};
    use crate::fermion::evolve_single_particle;

    fn kraw(p: f64, n: usize) -> FamilyInstance {
        validate(
            FamilyId::Krawtchouk,
            FamilyParams::Krawtchouk { p },
            LatticeRequest::Finite { n },
        )
        .unwrap()
    }

    #[test]
    fn export_hand_case_and_roundtrip() {
        let inst = kraw(0.5, 1);
        let spec = export_chain(&inst, 0.0, Variant::Standard);
        assert_eq!(spec.couplings, vec![0.5]);
        assert_eq!(spec.fields, vec![0.5, 0.5]);

        let alt = export_chain(&inst, 0.0, Variant::Alternative);
        assert_eq!(alt.couplings, spec.couplings);
        assert_eq!(alt.exchange(0), -spec.exchange(0));

        // finite family: exactly N couplings, all positive in the interior
        let inst = kraw(0.3, 7);
        let spec = export_chain(&inst, 0.2, Variant::Standard);
        assert_eq!(spec.couplings.len(), 7);
        assert!(spec.couplings.iter().all(|&j| j > 0.0));

        // JSON round-trip reproduces the identical record
        let text = serde_json::to_string(&spec).unwrap();
        let back: SpinChainSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.couplings, spec.couplings);
        assert_eq!(back.fields, spec.fields);
        assert_eq!(back.variant, spec.variant);
        assert_eq!(back.mu, spec.mu);
    }

    #[test]
    fn magnon_matches_fermion_evolution() {
        let inst = kraw(0.4, 6);
        let eig = analytic_eigensystem(&inst);
        let beta = vec![0.3, -0.5, 0.0, 0.7, 0.1, 0.0, 0.4];
        let mu = 1.3;
        let t = 0.9;
        let fermi = evolve_single_particle(
            &inst,
            mu,
            &beta.iter().map(|&b| (b, 0.0)).collect::<Vec<_>>(),
            t,
        )
        .unwrap();
        for variant in [Variant::Standard, Variant::Alternative] {
            let state = magnon_state(&inst, mu, &beta, t, variant).unwrap();
            for x in 0..7 {
                let (fr, fi) = fermi.amplitudes[x];
                let (mr, mi) = state.amplitudes[x];
                let fm = (fr * fr + fi * fi).sqrt();
                let mm = (mr * mr + mi * mi).sqrt();
                assert!((fm - mm).abs() < 1e-14, "x={x}");
            }
            // norm conservation
            let s0 = magnon_state(&inst, mu, &beta, 0.0, variant).unwrap();
            assert!((state.norm() - s0.norm()).abs() < 1e-13);
        }
        // standard variant, β=e₀, t=0: odd sites flip sign
        let e0: Vec<f64> = (0..7).map(|n| if n == 0 { 1.0 } else { 0.0 }).collect();
        let (re, im) = magnon_amplitude(&inst, 0.0, &e0, 1, 0.0, Variant::Standard).unwrap();
        assert!((re + eig.modes[0][1]).abs() < 1e-16 && im == 0.0);
        // alternative variant, β=e₀: one sign across all sites
        for x in 0..7 {
            let (re, _) = magnon_amplitude(&inst, 0.0, &e0, x, 0.0, Variant::Alternative).unwrap();
            assert!(re > 0.0, "x={x}");
        }
    }

    #[test]
    fn one_magnon_sector_hand_case() {
        let inst = kraw(0.5, 1);
        let vals = sector_oracle(&inst, 0.0, 1, Variant::Standard).unwrap();
        assert!((vals[0] - 0.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_magnon_sector_hand_case() {
        let inst = kraw(0.5, 4);
        let vals = sector_oracle(&inst, 0.0, 2, Variant::Standard).unwrap();
        let expect = [1.0, 2.0, 3.0, 3.0, 4.0, 4.0, 5.0, 5.0, 6.0, 7.0];
        assert_eq!(vals.len(), expect.len());
        for (v, e) in vals.iter().zip(expect.iter()) {
            assert!((v - e).abs() < 1e-12, "{v} vs {e}");
        }
    }

    #[test]
    fn sector_spectra_for_q_family() {
        let q: f64 = 0.7;
        let inst = validate(
            FamilyId::QRacah,
            FamilyParams::QRacah { q, d: 0.5, a: 0.2 * q.powi(6), b: 0.6 },
            LatticeRequest::Finite { n: 6 },
        )
        .unwrap();
        let mu = 0.4;
        // one magnon: {E(n) − μ}
        let vals = sector_oracle(&inst, mu, 1, Variant::Standard).unwrap();
        let mut expect: Vec<f64> = (0..7).map(|n| inst.energy(n).unwrap() - mu).collect();
        expect.sort_by(|a, b| a.total_cmp(b));
        for (v, e) in vals.iter().zip(expect.iter()) {
            assert!((v - e).abs() < 1e-9);
        }
        // two magnons: pairwise sums, and variant equivalence
        let vals = sector_oracle(&inst, mu, 2, Variant::Standard).unwrap();
        let alt = sector_oracle(&inst, mu, 2, Variant::Alternative).unwrap();
        let mut expect = Vec::new();
        for i in 0..7usize {
            for j in (i + 1)..7 {
                expect.push(inst.energy(i).unwrap() + inst.energy(j).unwrap() - 2.0 * mu);
            }
        }
        expect.sort_by(|a, b| a.total_cmp(b));
        for k in 0..expect.len() {
            assert!((vals[k] - expect[k]).abs() < 1e-9, "k={k}");
            assert!((vals[k] - alt[k]).abs() < 1e-10, "variant k={k}");
        }
    }

    #[test]
    fn sector_errors() {
        let inst = kraw(0.5, 4);
        assert_eq!(
            sector_oracle(&inst, 0.0, 3, Variant::Standard).unwrap_err().name(),
            "SectorTooLarge"
        );
        let charlier = validate(
            FamilyId::Charlier,
            FamilyParams::Charlier { a: 2.0 },
            LatticeRequest::semi_infinite_default(),
        )
        .unwrap();
        assert_eq!(
            sector_oracle(&charlier, 0.5, 1, Variant::Standard).unwrap_err().name(),
            "SectorTooLarge"
        );
    }

    #[test]
    fn magnon_number_is_conserved() {
        // assemble the full 2^(N+1) Hamiltonian from the chain record and
        // confirm it never couples different magnon numbers, and that its
        // one- and two-magnon blocks coincide with the sector matrices
        let inst = kraw(0.3, 3);
        let spec = export_chain(&inst, 0.1, Variant::Standard);
        let n = spec.n_sites();
        let dim = 1usize << n;
        let mut full = vec![vec![0.0; dim]; dim];
        for s in 0..dim {
            for x in 0..n {
                if s & (1 << x) != 0 {
                    full[s][s] += spec.fields[x];
                }
                if x + 1 < n {
                    let occ_x = s & (1 << x) != 0;
                    let occ_y = s & (1 << (x + 1)) != 0;
                    if occ_x != occ_y {
                        let s2 = s ^ (1 << x) ^ (1 << (x + 1));
                        full[s2][s] += spec.exchange(x);
                    }
                }
            }
        }
        for s in 0..dim {
            for s2 in 0..dim {
                if full[s][s2] != 0.0 {
                    assert_eq!(
                        (s as u32).count_ones(),
                        (s2 as u32).count_ones(),
                        "coupling across magnon sectors"
                    );
                }
            }
        }
        let m1 = sector_matrix(&spec, 1).unwrap();
        for x in 0..n {
            for y in 0..n {
                assert_eq!(m1[x][y], full[1 << x][1 << y]);
            }
        }
        let m2 = sector_matrix(&spec, 2).unwrap();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((1usize << i) | (1 << j));
            }
        }
        for (a, &sa) in pairs.iter().enumerate() {
            for (b, &sb) in pairs.iter().enumerate() {
                assert_eq!(m2[a][b], full[sa][sb], "a={a} b={b}");
            }
        }
    }
}
