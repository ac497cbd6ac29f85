//! Classical birth-and-death (BD) dynamics generated by a family instance,
//! solved in closed form through the spectral expansion, plus the quantum
//! fermion-walk analogues.
//!
//! The kernel P(x,y;t) = Σ_n e^{−𝓔(n)t} d_n² φ₀²(x) P̌_n(x) P̌_n(y) is an
//! alternating sum whose terms can dwarf the result by thirty orders of
//! magnitude when the spectrum is bounded (e^{−𝓔t} then damps nothing while
//! the polynomial products explode). Every entry gets an f64 prepass that
//! tracks the largest term; entries that fail the cancellation budget are
//! recomputed in exact rational arithmetic, including e^{−𝓔t} as a rational
//! Taylor partial sum.

use crate::error::{Error, Result};
use crate::exact::{dy_to_f64, Dyadic, Scalar};
use crate::families::FamilyInstance;
use crate::spectral::analytic_eigensystem;

use serde::Serialize;

/// Cancellation budget: relative f64 error estimate above this triggers the
/// exact path for a kernel entry.
const EXACT_FALLBACK_THRESHOLD: f64 = 1e-13;

/// The BD generator 𝓛, tridiagonal: hop up at rate B(x), down at rate D(x).
#[derive(Debug, Clone, Serialize)]
pub struct BDGenerator {
    pub entries: Vec<Vec<f64>>,
}

impl BDGenerator {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Per-column sums. Off-diagonal entries are added first and the
    /// diagonal last: since diag = −(B+D) is stored as one rounded sum, the
    /// floating-point cancellation is then exact and interior columns sum to
    /// 0.0 with no error at all. (The last column of a truncated
    /// semi-infinite lattice sums to −B(M) — probability flux past the
    /// truncation edge.)
    pub fn column_sums(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|y| {
                let mut s = 0.0;
                for x in 0..n {
                    if x != y {
                        s += self.entries[x][y];
                    }
                }
                s + self.entries[y][y]
            })
            .collect()
    }
}

/// A probability distribution over lattice sites.
#[derive(Debug, Clone, Serialize)]
pub struct Distribution {
    pub p: Vec<f64>,
}

impl Distribution {
    /// Validate and normalize-clamp an input vector: entries ≥ −1e−12
    /// (clamped to zero), total within 1e−10 of 1.
    pub fn new(p: Vec<f64>) -> Result<Distribution> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        for (x, &v) in p.iter().enumerate() {
            if !v.is_finite() || v < -1e-12 {
                return Err(Error::InvalidDistribution(format!(
                    "entry p[{x}] = {v} is negative"
                )));
            }
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDistribution(format!(
                "total probability {total} differs from 1"
            )));
        }
        Ok(Distribution {
            p: p.into_iter().map(|v| v.max(0.0)).collect(),
        })
    }

    /// Point mass at site y.
    pub fn delta(n_points: usize, y: usize) -> Result<Distribution> {
        if y >= n_points {
            return Err(Error::IndexOutOfRange(format!(
                "site {y} outside lattice of {n_points} points"
            )));
        }
        let mut p = vec![0.0; n_points];
        p[y] = 1.0;
        Ok(Distribution { p })
    }
}

/// The transition kernel at one time; columns are distributions (up to
/// truncation diagnostics for semi-infinite lattices).
#[derive(Debug, Clone, Serialize)]
pub struct TransitionKernel {
    pub t: f64,
    pub entries: Vec<Vec<f64>>,
}

impl TransitionKernel {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn column(&self, y: usize) -> Vec<f64> {
        self.entries.iter().map(|row| row[y]).collect()
    }

    /// Column sums; 1 up to rounding for finite lattices, and a truncation
    /// diagnostic (deliberately NOT renormalized) for semi-infinite ones.
    pub fn column_sums(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|y| (0..n).map(|x| self.entries[x][y]).sum())
            .collect()
    }
}

/// 𝓛_{x,y} = B(x−1)δ_{x−1,y} + D(x+1)δ_{x+1,y} − (B(x)+D(x))δ_{x,y}.
pub fn bd_generator(inst: &FamilyInstance) -> BDGenerator {
    let n = inst.n_points();
    let mut entries = vec![vec![0.0; n]; n];
    for x in 0..n {
        let b = inst.coeff_b(x).expect("x on lattice");
        let d = inst.coeff_d(x).expect("x on lattice");
        // diagonal rounded once so column sums cancel exactly
        entries[x][x] = -(b + d);
        if x + 1 < n {
            // rate up out of x lands in row x+1
            entries[x + 1][x] = b;
        }
        if x > 0 {
            entries[x - 1][x] = d;
        }
    }
    BDGenerator { entries }
}

/// Exact spectral kernel P(x,y;t) over the whole lattice.
pub fn bd_kernel(inst: &FamilyInstance, t: f64) -> Result<TransitionKernel> {
    if !(t >= 0.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "kernel time must be nonnegative, got {t}"
        )));
    }
    let n = inst.n_points();
    let prep = KernelPrep::new(inst, t);
    let mut entries = vec![vec![0.0; n]; n];
    let mut exact = ExactKernel::new(inst, t);
    for y in 0..n {
        let col = prep.column(inst, y, &mut exact);
        for x in 0..n {
            entries[x][y] = col[x];
        }
    }
    Ok(TransitionKernel { t, entries })
}

/// Evolve a distribution along an ascending time grid: p(t) = P(t)·p₀.
pub fn bd_evolve(
    inst: &FamilyInstance,
    p0: &Distribution,
    ts: &[f64],
) -> Result<Vec<Distribution>> {
    if p0.p.len() != inst.n_points() {
        return Err(Error::InvalidDistribution(format!(
            "distribution has {} entries, lattice has {}",
            p0.p.len(),
            inst.n_points()
        )));
    }
    for w in ts.windows(2) {
        if w[1] < w[0] {
            return Err(Error::ParameterOutOfRange(format!(
                "time grid must ascend, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        let kernel = bd_kernel(inst, t)?;
        let p: Vec<f64> = (0..kernel.dim())
            .map(|x| (0..kernel.dim()).map(|y| kernel.entries[x][y] * p0.p[y]).sum::<f64>())
            .collect();
        out.push(Distribution {
            p: p.into_iter().map(|v| v.max(0.0)).collect(),
        });
    }
    Ok(out)
}

/// The stationary distribution φ̂₀(x)², the t→∞ limit of every kernel column.
pub fn stationary(inst: &FamilyInstance) -> Distribution {
    let eig = analytic_eigensystem(inst);
    Distribution {
        p: eig.modes[0].iter().map(|v| v * v).collect(),
    }
}

/// Single quantum walker released at site y: coefficients
/// φ̂₀(x)φ̂₀(y)⁻¹ Σ_n φ̂_n(x)φ̂_n(y) e^{−𝓔(n)t}. Identical code path to a
/// `bd_kernel` column — the fermionic single-walker profile IS the classical
/// kernel column.
pub fn fermion_walk_single(inst: &FamilyInstance, y: usize, t: f64) -> Result<Vec<f64>> {
    if y >= inst.n_points() {
        return Err(Error::IndexOutOfRange(format!(
            "site {y} outside lattice of {} points",
            inst.n_points()
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "walk time must be nonnegative, got {t}"
        )));
    }
    let prep = KernelPrep::new(inst, t);
    let mut exact = ExactKernel::new(inst, t);
    Ok(prep.column(inst, y, &mut exact))
}

/// Amplitude decay factor e^{−Σ_{j∈J} 𝓔(j) t} of a multi-walker excitation.
pub fn multi_walker_decay(inst: &FamilyInstance, j: &[usize], t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "decay time must be nonnegative, got {t}"
        )));
    }
    for w in j.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidExcitationSet(format!(
                "indices must be strictly increasing, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    let mut total = 0.0;
    for &n in j {
        if n > inst.n_max() {
            return Err(Error::ModeCapExceeded { n, n_max: inst.n_max() });
        }
        total += inst.energy(n)?;
    }
    Ok((-total * t).exp())
}

/// f64 ingredients of the spectral sum, shared across columns.
struct KernelPrep {
    /// e^{−𝓔(n)t}
    et: Vec<f64>,
    /// d_n² (with common factor)
    dn2: Vec<f64>,
    /// φ₀²(x)
    w: Vec<f64>,
    /// P̌_n(x)
    poly: Vec<Vec<f64>>,
}

impl KernelPrep {
    fn new(inst: &FamilyInstance, t: f64) -> KernelPrep {
        let n_modes = inst.n_max() + 1;
        let npts = inst.n_points();
        KernelPrep {
            et: (0..n_modes)
                .map(|n| (-inst.energy(n).expect("exposed") * t).exp())
                .collect(),
            dn2: (0..n_modes).map(|n| inst.norm_sq(n).expect("exposed")).collect(),
            w: (0..npts).map(|x| inst.weight(x).expect("on lattice")).collect(),
            poly: (0..n_modes)
                .map(|n| (0..npts).map(|x| inst.poly(n, x).expect("in range")).collect())
                .collect(),
        }
    }

    /// One kernel column with per-entry cancellation tracking.
    fn column(&self, inst: &FamilyInstance, y: usize, exact: &mut ExactKernel) -> Vec<f64> {
        let npts = self.w.len();
        let n_modes = self.et.len();
        let mut col = vec![0.0; npts];
        for (x, out) in col.iter_mut().enumerate() {
            let mut sum = 0.0f64;
            let mut maxabs = 0.0f64;
            for n in 0..n_modes {
                let term = self.et[n] * self.dn2[n] * self.w[x] * self.poly[n][x] * self.poly[n][y];
                sum += term;
                maxabs = maxabs.max(term.abs());
            }
            if sum.is_finite()
                && maxabs * 1e-16 * (n_modes as f64) <= EXACT_FALLBACK_THRESHOLD * sum.abs().max(1e-300)
            {
                *out = sum;
            } else {
                *out = exact.entry(inst, x, y);
            }
        }
        col
    }
}

/// High-precision kernel entries on the 768-bit dyadic path, with
/// e^{−𝓔(n)t} as a cached Taylor partial sum (truncated below 2^{−220}).
struct ExactKernel {
    t: Dyadic,
    /// d_n²(core) · e^{−𝓔(n)t}, filled lazily
    coeff: Vec<Option<Dyadic>>,
    /// P̌_n(x) values, filled lazily
    prat: Vec<Vec<Option<Dyadic>>>,
    /// φ₀²(x) cores, filled lazily
    w: Vec<Option<Dyadic>>,
    common: f64,
}

impl ExactKernel {
    fn new(inst: &FamilyInstance, t: f64) -> ExactKernel {
        let n_modes = inst.n_max() + 1;
        let npts = inst.n_points();
        ExactKernel {
            t: Dyadic::from_f64(t),
            coeff: vec![None; n_modes],
            prat: vec![vec![None; npts]; n_modes],
            w: vec![None; npts],
            common: inst.dn2_common(),
        }
    }

    fn coeff(&mut self, inst: &FamilyInstance, n: usize) -> Dyadic {
        self.coeff[n]
            .get_or_insert_with(|| {
                let z = inst.energy_dy(n).mul(&self.t);
                inst.dn2_core_dy(n).mul(&exp_neg_dy(&z))
            })
            .clone()
    }

    fn prat(&mut self, inst: &FamilyInstance, n: usize, x: usize) -> Dyadic {
        self.prat[n][x]
            .get_or_insert_with(|| inst.poly_dy(n, x))
            .clone()
    }

    fn entry(&mut self, inst: &FamilyInstance, x: usize, y: usize) -> f64 {
        let n_modes = self.coeff.len();
        let wx = self.w[x]
            .get_or_insert_with(|| inst.phi0sq_dy(x))
            .clone();
        let mut sum = Dyadic::from_i64(0);
        for n in 0..n_modes {
            let p = self.prat(inst, n, x).mul(&self.prat(inst, n, y));
            if Scalar::is_zero(&p) {
                continue;
            }
            sum = sum.add(&self.coeff(inst, n).mul(&p));
        }
        dy_to_f64(&sum.mul(&wx)) * self.common
    }
}

/// e^{−z} for dyadic z ≥ 0 as a Taylor partial sum. For z > 200 the value
/// is below 1e−86 and is returned as exact zero — far beneath any
/// cancellation scale the kernel entries can reach.
fn exp_neg_dy(z: &Dyadic) -> Dyadic {
    let zf = dy_to_f64(z);
    debug_assert!(zf >= 0.0);
    if zf > 200.0 {
        return Dyadic::from_i64(0);
    }
    let mut term = Dyadic::one();
    let mut sum = term.clone();
    let mut k: i64 = 1;
    loop {
        term = term.mul(z).div(&Dyadic::from_i64(-k));
        sum = sum.add(&term);
        // alternating series: the truncation error is below the last term
        if k as f64 > 3.0 * zf + 8.0 && term.abs_f64() < 2f64.powi(-220) {
            break;
        }
        k += 1;
    }
    sum
}
