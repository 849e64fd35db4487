//! Quasienergy structure of the driven oscillator in the rotating frame
//!
//! ```text
//! H = -Δ a†a + (α/2)(a†a)² + κ(a†a)³ + g(a + a†)
//! ```
//!
//! Bare levels, second-order corrections, multi-photon Rabi frequencies,
//! resonant detunings, and numerically diagonalized quasienergy curves.
//! Energies are in units of α throughout the crate; `alpha` is kept as a
//! parameter so the closed forms stay dimensionally explicit.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::dynamics::{build_hamiltonian, FockSpace};
use crate::error::{require, Error, Result};
use crate::linalg::{eigh_tridiagonal, SymmetricEigen};
use crate::optimize::{brent_root, golden_section_min};
#[allow(unused_imports)]
use num_traits::Float;

/// Perturbative denominators smaller than this (in units of α) are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// Half-width of the detuning bracket around the bare resonance, in units of α.
pub const RESONANCE_BRACKET: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    /// Kerr coefficient; sets the energy unit.
    pub alpha: f64,
    /// Sixth-order ("over-Kerr") coefficient.
    pub kappa: f64,
}

impl OscillatorParams {
    pub fn new(alpha: f64, kappa: f64) -> Result<Self> {
        require(alpha.is_finite() && alpha > 0.0, "alpha", alpha, "must be positive")?;
        require(
            kappa.is_finite() && (kappa / alpha).abs() <= 0.25,
            "kappa",
            kappa,
            "|kappa/alpha| must not exceed 0.25",
        )?;
        Ok(Self { alpha, kappa })
    }

    /// α = 1, the unit convention used everywhere.
    pub fn with_kappa(kappa: f64) -> Result<Self> {
        Self::new(1.0, kappa)
    }

    pub fn is_kerr(&self) -> bool {
        self.kappa == 0.0
    }
}

/// A multi-photon transition `|lower⟩ ↔ |upper⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResonantPair {
    pub upper: u32,
    pub lower: u32,
}

impl ResonantPair {
    pub fn new(upper: u32, lower: u32) -> Result<Self> {
        require(
            upper >= lower + 2,
            "upper",
            upper as f64,
            "need upper - lower >= 2 (multi-photon transition)",
        )?;
        Ok(Self { upper, lower })
    }

    /// Number of drive quanta absorbed, `n - n'`.
    pub fn order(&self) -> u32 {
        self.upper - self.lower
    }
}

/// `ε_n⁽⁰⁾ = -Δn + (α/2)n² + κn³`.
pub fn quasienergy_bare(params: &OscillatorParams, delta: f64, n: u32) -> f64 {
    let n = n as f64;
    n * (-delta + n * (0.5 * params.alpha + params.kappa * n))
}

/// `ε_upper⁽⁰⁾ - ε_lower⁽⁰⁾` in factored form, exact whenever the inputs are
/// dyadic rationals (e.g. Kerr resonances).
pub fn bare_splitting(params: &OscillatorParams, delta: f64, upper: u32, lower: u32) -> f64 {
    let (u, l) = (upper as f64, lower as f64);
    (u - l) * (-delta + 0.5 * params.alpha * (u + l) + params.kappa * (u * u + u * l + l * l))
}

fn checked_splitting(params: &OscillatorParams, delta: f64, level: u32, other: u32) -> Result<f64> {
    let s = bare_splitting(params, delta, level, other);
    if s.abs() < DEGENERACY_TOL * params.alpha {
        return Err(Error::DegenerateLevels {
            level,
            other,
            splitting: s,
        });
    }
    Ok(s)
}

/// Second-order correction coefficient `ε_n⁽²⁾`, so that `ε_n ≈ ε_n⁽⁰⁾ + ε_n⁽²⁾ g²`.
pub fn second_order_correction(params: &OscillatorParams, delta: f64, n: u32) -> Result<f64> {
    let above = checked_splitting(params, delta, n, n + 1)?;
    if n == 0 {
        return Ok(1.0 / above);
    }
    let below = checked_splitting(params, delta, n, n - 1)?;
    let nf = n as f64;
    // single fraction: one rounding, so Kerr-symmetric partners agree bit for bit
    Ok((nf * above + (nf + 1.0) * below) / (below * above))
}

/// `ε_n⁽²⁾ - ε_{n'}⁽²⁾` at detuning `delta`, without expansion in κ.
pub fn correction_difference(params: &OscillatorParams, delta: f64, pair: ResonantPair) -> Result<f64> {
    Ok(second_order_correction(params, delta, pair.upper)? - second_order_correction(params, delta, pair.lower)?)
}

/// First-order-in-κ approximation to the correction difference at the bare resonance.
pub fn correction_difference_linear(params: &OscillatorParams, pair: ResonantPair) -> f64 {
    let m = pair.order() as f64;
    let s = (pair.upper + pair.lower + 1) as f64;
    4.0 * m * s * params.kappa / (params.alpha * params.alpha * (m * m - 1.0))
}

/// g-independent Rabi coefficient `ω_{n,n'} = √(n!/n'!) ∏_{k=n'+1}^{n-1} (ε_n⁽⁰⁾ - ε_k⁽⁰⁾)⁻¹`.
pub fn rabi_coefficient(params: &OscillatorParams, delta: f64, pair: ResonantPair) -> Result<f64> {
    let factorial_ratio: f64 = (pair.lower + 1..=pair.upper).map(|j| j as f64).product();
    let mut w = factorial_ratio.sqrt();
    for k in pair.lower + 1..pair.upper {
        w /= checked_splitting(params, delta, pair.upper, k)?;
    }
    Ok(w)
}

/// Multi-photon Rabi frequency `ω^R_{n,n'} = ω_{n,n'} g^{n-n'}`.
pub fn rabi_frequency(params: &OscillatorParams, delta: f64, g: f64, pair: ResonantPair) -> Result<f64> {
    Ok(rabi_coefficient(params, delta, pair)? * g.powi(pair.order() as i32))
}

/// Bare resonant detuning `Δ_res⁽⁰⁾ = (α/2)(n+n') + κ(n² + nn' + n'²)`.
pub fn resonant_detuning_bare(params: &OscillatorParams, pair: ResonantPair) -> f64 {
    let (n, m) = (pair.upper as f64, pair.lower as f64);
    0.5 * params.alpha * (n + m) + params.kappa * (n * n + n * m + m * m)
}

/// Resonant detuning to second order in `g`.
pub fn resonant_detuning_perturbative(params: &OscillatorParams, pair: ResonantPair, g: f64) -> Result<f64> {
    let d0 = resonant_detuning_bare(params, pair);
    let diff = correction_difference(params, d0, pair)?;
    Ok(d0 + diff / pair.order() as f64 * g * g)
}

/// Detuning at which the two-level energies `ε⁽⁰⁾(Δ) + ε⁽²⁾(Δ) g²` of the
/// pair coincide, found by Brent's method within `Δ_res⁽⁰⁾ ± 0.2α`.
pub fn refine_resonance_two_level(params: &OscillatorParams, pair: ResonantPair, g: f64) -> Result<f64> {
    let d0 = resonant_detuning_bare(params, pair);
    if params.is_kerr() {
        return Ok(d0);
    }
    let residual = |delta: f64| -> f64 {
        let level =
            |n| -> Option<f64> { Some(quasienergy_bare(params, delta, n) + second_order_correction(params, delta, n).ok()? * g * g) };
        match (level(pair.upper), level(pair.lower)) {
            (Some(a), Some(b)) => a - b,
            _ => f64::NAN,
        }
    };
    let (lo, hi) = (d0 - RESONANCE_BRACKET * params.alpha, d0 + RESONANCE_BRACKET * params.alpha);
    // Start from a tight bracket around the perturbative estimate; the wide
    // bracket may straddle poles of ε⁽²⁾.
    let guess = resonant_detuning_perturbative(params, pair, g)?;
    let mut half = 1e-3 * params.alpha;
    while half <= RESONANCE_BRACKET * params.alpha {
        let (a, b) = ((guess - half).max(lo), (guess + half).min(hi));
        let (fa, fb) = (residual(a), residual(b));
        if fa.is_finite() && fb.is_finite() && fa.signum() != fb.signum() {
            return brent_root(residual, a, b, 1e-12);
        }
        half *= 2.0;
    }
    Err(Error::NoRoot { lower: lo, upper: hi })
}

/// Quasienergies versus drive amplitude, tracked by eigenvector continuity.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasienergyCurve {
    pub g_grid: Vec<f64>,
    /// `levels[k][i]`: quasienergy of the state continuing from Fock `|k⟩` at `g_grid[i]`.
    pub levels: Vec<Vec<f64>>,
    /// `overlaps[k][i]`: weight of Fock `|k⟩` in that state.
    pub overlaps: Vec<Vec<f64>>,
}

impl QuasienergyCurve {
    /// Minimum separation of the two tracked levels of `pair` over the grid, with its index.
    pub fn min_gap(&self, pair: ResonantPair) -> (usize, f64) {
        let (a, b) = (&self.levels[pair.upper as usize], &self.levels[pair.lower as usize]);
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, d)| if d < best.1 { (i, d) } else { best })
    }
}

/// Diagonalize the rotating-frame Hamiltonian along `g_grid` (ascending,
/// starting at 0) and follow each level from its g = 0 Fock state by maximum
/// overlap with the previous grid point.
pub fn quasienergy_curves(
    params: &OscillatorParams,
    delta: f64,
    g_grid: &[f64],
    space: FockSpace,
    pair: ResonantPair,
) -> Result<QuasienergyCurve> {
    require(
        !g_grid.is_empty() && g_grid[0] == 0.0,
        "g_grid",
        g_grid.first().copied().unwrap_or(f64::NAN),
        "must start at 0",
    )?;
    require(g_grid.windows(2).all(|w| w[1] > w[0]), "g_grid", 0.0, "must be strictly ascending")?;
    require(
        space.cutoff() >= pair.upper as usize + 4,
        "cutoff",
        space.cutoff() as f64,
        "need cutoff >= n + 4",
    )?;
    let dim = space.dim();
    let top = [space.cutoff(), space.cutoff() - 1];

    let mut levels = vec![Vec::with_capacity(g_grid.len()); dim];
    let mut overlaps = vec![Vec::with_capacity(g_grid.len()); dim];
    // tracked[k]: current eigenvector continuing from |k⟩
    let mut tracked: Vec<Vec<f64>> = (0..dim)
        .map(|k| {
            let mut v = vec![0.0; dim];
            v[k] = 1.0;
            v
        })
        .collect();
    let mut prev_energy: Vec<f64> = (0..dim).map(|k| quasienergy_bare(params, delta, k as u32)).collect();

    for &g in g_grid {
        let eig = eigh_tridiagonal(&build_hamiltonian(params, g, delta, space));
        let assignment = if g == 0.0 {
            // exact Fock eigenvectors; match by their nonzero component
            (0..dim)
                .map(|k| (0..dim).find(|&j| eig.vector(j)[k].abs() == 1.0).unwrap_or(k))
                .collect()
        } else {
            assign_by_overlap(&tracked, &prev_energy, &eig)
        };
        for k in 0..dim {
            let j = assignment[k];
            let mut v = eig.vector(j).to_vec();
            let sign: f64 = tracked[k].iter().zip(&v).map(|(a, b)| a * b).sum();
            if sign < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            levels[k].push(eig.values[j]);
            overlaps[k].push(v[k] * v[k]);
            prev_energy[k] = eig.values[j];
            tracked[k] = v;
        }
        for level in [pair.upper as usize, pair.lower as usize] {
            let w: f64 = top.iter().map(|&i| tracked[level][i] * tracked[level][i]).sum();
            if w > 1e-6 {
                return Err(Error::CutoffTooSmall {
                    level: level as u32,
                    weight: w,
                });
            }
        }
    }
    Ok(QuasienergyCurve {
        g_grid: g_grid.to_vec(),
        levels,
        overlaps,
    })
}

/// Greedy maximum-overlap matching of tracked vectors to new eigenvectors;
/// exact ties are broken by eigenvalue proximity.
fn assign_by_overlap(tracked: &[Vec<f64>], prev_energy: &[f64], eig: &SymmetricEigen) -> Vec<usize> {
    let n = tracked.len();
    let mut candidates = Vec::with_capacity(n * n);
    for (k, t) in tracked.iter().enumerate() {
        for j in 0..n {
            let ov: f64 = t.iter().zip(eig.vector(j)).map(|(a, b)| a * b).sum::<f64>().abs();
            candidates.push((ov, (prev_energy[k] - eig.values[j]).abs(), k, j));
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
    let mut assignment = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for (_, _, k, j) in candidates {
        if assignment[k] == usize::MAX && !taken[j] {
            assignment[k] = j;
            taken[j] = true;
        }
    }
    assignment
}

/// Outcome of the noise-free full-model resonance search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullResonance {
    pub detuning: f64,
    /// `1 - min_t P_{n'}(t)` over two estimated Rabi periods.
    pub peak_transfer: f64,
    /// Splitting of the dressed pair at `detuning`.
    pub splitting: f64,
}

const TRANSFER_SAMPLES: usize = 4000;

/// Eigenvalues of the two dressed states carrying the most weight on `|n⟩, |n'⟩`.
fn dressed_pair(eig: &SymmetricEigen, pair: ResonantPair) -> (usize, usize) {
    let (u, l) = (pair.upper as usize, pair.lower as usize);
    let weight = |j: usize| {
        let v = eig.vector(j);
        v[u] * v[u] + v[l] * v[l]
    };
    let mut best = (0, 1);
    let (mut w0, mut w1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for j in 0..eig.dim() {
        let w = weight(j);
        if w > w0 {
            best = (j, best.0);
            w1 = w0;
            w0 = w;
        } else if w > w1 {
            best.1 = j;
            w1 = w;
        }
    }
    best
}

/// Splitting of the dressed pair at `(g, delta)`.
pub fn dressed_splitting(params: &OscillatorParams, pair: ResonantPair, g: f64, delta: f64, space: FockSpace) -> f64 {
    let eig = eigh_tridiagonal(&build_hamiltonian(params, g, delta, space));
    let (a, b) = dressed_pair(&eig, pair);
    (eig.values[a] - eig.values[b]).abs()
}

/// `1 - min_t P_{n'}(t)` for the noise-free evolution from `|n'⟩` over `[0, t_max]`.
pub fn peak_transfer(params: &OscillatorParams, pair: ResonantPair, g: f64, delta: f64, space: FockSpace, t_max: f64) -> f64 {
    let eig = eigh_tridiagonal(&build_hamiltonian(params, g, delta, space));
    let l = pair.lower as usize;
    let weights: Vec<f64> = (0..eig.dim()).map(|j| eig.vector(j)[l] * eig.vector(j)[l]).collect();
    let mut min_p = 1.0f64;
    for s in 0..=TRANSFER_SAMPLES {
        let t = t_max * s as f64 / TRANSFER_SAMPLES as f64;
        let amp: Complex64 = weights
            .iter()
            .zip(&eig.values)
            .map(|(&w, &e)| Complex64::from_polar(w, -e * t))
            .sum();
        min_p = min_p.min(amp.norm_sqr());
    }
    1.0 - min_p
}

/// Detuning of complete noise-free population transfer in the full model.
///
/// The dressed-pair splitting is first minimized over `Δ_res⁽⁰⁾ ± 0.2α`
/// (peak transfer is flat outside a window of width ~ω^R, so it cannot steer
/// a search across the whole bracket); peak transfer over two Rabi periods
/// is then maximized by golden section within a few splittings of that point.
pub fn refine_resonance_full(params: &OscillatorParams, pair: ResonantPair, g: f64, space: FockSpace) -> Result<FullResonance> {
    require(g.is_finite() && g > 0.0, "g", g, "must be positive")?;
    let d0 = resonant_detuning_bare(params, pair);
    let half = RESONANCE_BRACKET * params.alpha;
    let (d_gap, gap) = golden_section_min(|d| dressed_splitting(params, pair, g, d, space), d0 - half, d0 + half, 1e-10);
    let period = 2.0 * core::f64::consts::PI / gap;
    let window = 3.0 * gap / pair.order() as f64;
    let (d_best, neg) = golden_section_min(
        |d| -peak_transfer(params, pair, g, d, space, 2.0 * period),
        d_gap - window,
        d_gap + window,
        1e-7 * params.alpha,
    );
    let best = -neg;
    if best < 0.5 {
        return Err(Error::NoTransfer { best });
    }
    Ok(FullResonance {
        detuning: d_best,
        peak_transfer: best,
        splitting: dressed_splitting(params, pair, g, d_best, space),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(kappa: f64) -> OscillatorParams {
        OscillatorParams::with_kappa(kappa).unwrap()
    }

    fn pair(n: u32, m: u32) -> ResonantPair {
        ResonantPair::new(n, m).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(OscillatorParams::new(0.0, 0.0).is_err());
        assert!(OscillatorParams::new(1.0, 0.3).is_err());
        assert!(OscillatorParams::new(2.0, -0.5).is_ok());
        assert!(ResonantPair::new(1, 0).is_err());
        assert!(ResonantPair::new(0, 3).is_err());
    }

    #[test]
    fn bare_levels() {
        assert_eq!(quasienergy_bare(&p(0.0), 2.5, 5), 0.0);
        assert!((quasienergy_bare(&p(-0.025), 1.872625, 5) - 0.011875).abs() < 1e-12);
        assert_eq!(quasienergy_bare(&p(0.1), 3.3, 0), 0.0);
    }

    #[test]
    fn second_order_values() {
        let c = |k, d, n| second_order_correction(&p(k), d, n).unwrap();
        assert!((c(0.0, 2.0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((c(0.0, 2.0, 4) - 2.0 / 3.0).abs() < 1e-15);
        assert!((c(-0.025, 1.274905, 3) - 0.9227952).abs() < 1e-6);
    }

    #[test]
    fn kerr_difference_is_exactly_zero_at_table_resonances() {
        for (n, d) in [(3, 1.5), (4, 2.0), (5, 2.5)] {
            assert_eq!(correction_difference(&p(0.0), d, pair(n, 0)).unwrap(), 0.0);
        }
    }

    #[test]
    fn degenerate_denominator() {
        // ε_1 = ε_0 at Δ = α/2 for κ = 0
        assert!(matches!(
            second_order_correction(&p(0.0), 0.5, 0),
            Err(Error::DegenerateLevels { level: 0, other: 1, .. })
        ));
        assert!(rabi_frequency(&p(0.0), 3.0, 0.1, pair(4, 0)).is_err());
    }

    #[test]
    fn linear_difference() {
        assert_eq!(correction_difference_linear(&p(0.0), pair(5, 0)), 0.0);
        assert!((correction_difference_linear(&p(-0.025), pair(5, 0)) + 0.125).abs() < 1e-15);
        assert!((correction_difference_linear(&p(-0.025), pair(3, 0)) + 0.15).abs() < 1e-15);
    }

    #[test]
    fn rabi_frequency_zero_drive() {
        assert_eq!(rabi_frequency(&p(-0.025), 1.875, 0.0, pair(5, 0)).unwrap(), 0.0);
    }

    #[test]
    fn bare_detunings() {
        assert_eq!(resonant_detuning_bare(&p(0.0), pair(3, 0)), 1.5);
        assert!((resonant_detuning_bare(&p(-0.025), pair(5, 0)) - 1.875).abs() < 1e-15);
        assert!((resonant_detuning_bare(&p(0.025), pair(5, 0)) - 3.125).abs() < 1e-15);
    }

    #[test]
    fn kerr_refinements_return_bare_value() {
        let d = resonant_detuning_bare(&p(0.0), pair(5, 0));
        assert_eq!(resonant_detuning_perturbative(&p(0.0), pair(5, 0), 0.3).unwrap(), d);
        assert_eq!(refine_resonance_two_level(&p(0.0), pair(5, 0), 0.3).unwrap(), d);
        assert_eq!(resonant_detuning_perturbative(&p(-0.025), pair(5, 0), 0.0).unwrap(), 1.875);
    }

    #[test]
    fn curves_reject_bad_grid() {
        let space = FockSpace::new(11).unwrap();
        assert!(quasienergy_curves(&p(0.0), 2.5, &[0.1, 0.2], space, pair(5, 0)).is_err());
        assert!(quasienergy_curves(&p(0.0), 2.5, &[0.0, 0.2, 0.1], space, pair(5, 0)).is_err());
        let small = FockSpace::new(8).unwrap();
        assert!(quasienergy_curves(&p(0.0), 2.5, &[0.0, 0.1], small, pair(5, 0)).is_err());
    }

    #[test]
    fn curves_detect_truncation() {
        // strong drive pushes weight into the top of a 9-level space
        let space = FockSpace::new(9).unwrap();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        assert!(matches!(
            quasienergy_curves(&p(0.0), 2.5, &grid, space, pair(5, 0)),
            Err(Error::CutoffTooSmall { .. })
        ));
    }
}
