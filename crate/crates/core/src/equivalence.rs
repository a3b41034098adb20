//! Projective comparison of the holonomy representation `ρ` with the
//! R-matrix representation `ν`.
//!
//! Under the normalizations used here the two agree only up to a global
//! scalar per generator, `ν_i ~ c·ρ_i`, so the comparison reports `c`
//! instead of assuming it is 1. Conjugation-invariant evidence comes from
//! spectra, pairwise eigenvalue ratios and word traces; an explicit
//! intertwiner `S` with `S·(cρ_i) = ν_i·S` is solved for small systems.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::holonomy::{monodromy_word, BraidWord};
use crate::kz_connection::{ConfigPoint, ConnectionCoefficients};
use crate::linalg::{condition_number, eigenvalues, frob, identity, multiset_distance, svd_full, CMat, C64};
use crate::rmatrix::{braid_rep_word, RMatrix};
use crate::{Error, Result};

/// Relative singular-value threshold defining the intertwiner null space.
pub const DEFAULT_NULL_TOL: f64 = 1e-6;

/// Condition number above which a conjugator counts as singular.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralMatch {
    pub c: C64,
    /// Largest matched distance between `spec(c·ρ)` and `spec(ν)`.
    pub deviation: f64,
}

fn check_dims(a: &CMat, b: &CMat) -> Result<()> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.nrows() });
    }
    Ok(())
}

fn best_scalar(spectra: &[(Vec<C64>, Vec<C64>)]) -> SpectralMatch {
    let mut best = SpectralMatch { c: C64::new(1.0, 0.0), deviation: f64::INFINITY };
    for (lam, mu) in spectra {
        for l in lam {
            if l.norm() == 0.0 {
                continue;
            }
            for m in mu {
                let c = m / l;
                let deviation = spectra
                    .iter()
                    .map(|(a, b)| {
                        let scaled: Vec<C64> = a.iter().map(|x| x * c).collect();
                        multiset_distance(&scaled, b)
                    })
                    .fold(0.0, f64::max);
                if deviation < best.deviation {
                    best = SpectralMatch { c, deviation };
                }
            }
        }
    }
    best
}

/// Best scalar `c = μ_j/λ_i` aligning `spec(c·ρ)` with `spec(ν)`.
pub fn spectral_compare(rho: &CMat, nu: &CMat) -> Result<SpectralMatch> {
    common_scalar(std::slice::from_ref(rho), std::slice::from_ref(nu))
}

/// One scalar for all generator pairs simultaneously; the deviation is the
/// worst over generators.
pub fn common_scalar(rhos: &[CMat], nus: &[CMat]) -> Result<SpectralMatch> {
    if rhos.len() != nus.len() {
        return Err(Error::DimensionMismatch { expected: rhos.len(), got: nus.len() });
    }
    let mut spectra = Vec::with_capacity(rhos.len());
    for (r, n) in rhos.iter().zip(nus) {
        check_dims(r, n)?;
        spectra.push((eigenvalues(r), eigenvalues(n)));
    }
    Ok(best_scalar(&spectra))
}

/// Multiset of `λ_i/λ_j` over ordered pairs `i ≠ j`.
pub fn eigenvalue_ratios(m: &CMat) -> Vec<C64> {
    let ev = eigenvalues(m);
    let mut out = Vec::with_capacity(ev.len() * ev.len().saturating_sub(1));
    for (i, a) in ev.iter().enumerate() {
        for (j, b) in ev.iter().enumerate() {
            if i != j {
                out.push(a / b);
            }
        }
    }
    out
}

/// Scalar-free comparison: matched distance between the ratio multisets.
pub fn ratio_multiset_deviation(rho: &CMat, nu: &CMat) -> Result<f64> {
    check_dims(rho, nu)?;
    Ok(multiset_distance(&eigenvalue_ratios(rho), &eigenvalue_ratios(nu)))
}

/// `|tr ρ(w) - c^{e(w)} tr ν(w)|` with `e(w)` the exponent sum.
pub fn word_trace_compare(
    cfg: &ConnectionCoefficients,
    base: &ConfigPoint,
    rm: &RMatrix,
    w: &BraidWord,
    c: C64,
    tol: f64,
) -> Result<f64> {
    let rho = monodromy_word(cfg, base, w, tol)?;
    let nu = braid_rep_word(rm, cfg.n(), w)?;
    Ok(trace_deviation(&rho, &nu, c, w.exponent_sum()))
}

pub fn trace_deviation(rho: &CMat, nu: &CMat, c: C64, exponent_sum: i64) -> f64 {
    (rho.trace() * c.powi(exponent_sum as i32) - nu.trace()).norm()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConjugatorOutcome {
    Found {
        /// Unit Frobenius norm.
        s: CMat,
        /// `max_i ‖S·(cρ_i) - ν_i·S‖`.
        residual: f64,
        condition: f64,
        /// Dimension of the numerical solution space.
        null_dim: usize,
        invertible: bool,
    },
    /// No nonzero intertwiner below the threshold.
    NotEquivalent { smallest_singular_value: f64, threshold: f64 },
}

impl ConjugatorOutcome {
    pub fn residual(&self) -> Option<f64> {
        match self {
            ConjugatorOutcome::Found { residual, .. } => Some(*residual),
            ConjugatorOutcome::NotEquivalent { .. } => None,
        }
    }
}

/// Solves `S·(c·ρ_i) = ν_i·S` for all `i` at once as a homogeneous linear
/// system in `vec(S)`. The null space is spanned by right singular vectors
/// with `σ ≤ null_tol·σ_max`; `S` is a seeded random combination of them,
/// so that it is invertible whenever the representations are equivalent.
pub fn solve_conjugator(rhos: &[CMat], nus: &[CMat], c: C64, null_tol: f64, seed: u64) -> Result<ConjugatorOutcome> {
    if rhos.is_empty() || rhos.len() != nus.len() {
        return Err(Error::DimensionMismatch { expected: rhos.len(), got: nus.len() });
    }
    let d = rhos[0].nrows();
    for (r, n) in rhos.iter().zip(nus) {
        check_dims(r, n)?;
        if r.nrows() != d {
            return Err(Error::DimensionMismatch { expected: d, got: r.nrows() });
        }
    }
    let id = identity(d);
    let block = d * d;
    let mut k = CMat::zeros(block * rhos.len(), block);
    for (g, (r, n)) in rhos.iter().zip(nus).enumerate() {
        // column-major vec: vec(S A) = (Aᵀ⊗I) vec S, vec(B S) = (I⊗B) vec S
        let op = (r * c).transpose().kronecker(&id) - id.kronecker(n);
        k.view_mut((g * block, 0), (block, block)).copy_from(&op);
    }
    let (sv, v) = svd_full(&k);
    let sigma_max = sv.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let threshold = null_tol * sigma_max;
    let null: Vec<usize> = (0..sv.len()).filter(|&j| sv[j] <= threshold).collect();
    if null.is_empty() {
        let smallest = sv.last().copied().unwrap_or(0.0);
        return Ok(ConjugatorOutcome::NotEquivalent { smallest_singular_value: smallest, threshold });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vec_s = nalgebra::DVector::<C64>::zeros(block);
    for &j in &null {
        let w = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        vec_s += v.column(j) * w;
    }
    let norm = vec_s.norm();
    let s = CMat::from_column_slice(d, d, (vec_s / C64::new(norm, 0.0)).as_slice());
    let residual = rhos
        .iter()
        .zip(nus)
        .map(|(r, n)| frob(&(&s * (r * c) - n * &s)))
        .fold(0.0, f64::max);
    let condition = condition_number(&s);
    Ok(ConjugatorOutcome::Found { s, residual, condition, null_dim: null.len(), invertible: condition < MAX_CONDITION })
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub c: C64,
    pub c_abs: f64,
    /// Worst matched-eigenvalue distance over generators after scaling by `c`.
    pub eig_deviation: f64,
    /// Worst eigenvalue-ratio multiset distance over generators.
    pub ratio_deviation: f64,
    pub trace_deviations: BTreeMap<String, f64>,
    pub conjugator: Option<ConjugatorOutcome>,
}

/// Full projective comparison for given generator families. `words` are
/// evaluated from products of the supplied generators.
pub fn compare_generators(
    rhos: &[CMat],
    nus: &[CMat],
    words: &[BraidWord],
    with_conjugator: bool,
    seed: u64,
) -> Result<ComparisonReport> {
    let m = common_scalar(rhos, nus)?;
    let mut ratio_deviation: f64 = 0.0;
    for (r, n) in rhos.iter().zip(nus) {
        ratio_deviation = ratio_deviation.max(ratio_multiset_deviation(r, n)?);
    }
    let mut trace_deviations = BTreeMap::new();
    for w in words {
        w.validate(rhos.len() + 1)?;
        let rho = word_product(rhos, w);
        let nu = word_product(nus, w);
        trace_deviations.insert(w.to_string(), trace_deviation(&rho, &nu, m.c, w.exponent_sum()));
    }
    let conjugator = if with_conjugator {
        Some(solve_conjugator(rhos, nus, m.c, DEFAULT_NULL_TOL, seed)?)
    } else {
        None
    };
    Ok(ComparisonReport {
        c: m.c,
        c_abs: m.c.norm(),
        eig_deviation: m.deviation,
        ratio_deviation,
        trace_deviations,
        conjugator,
    })
}

/// `g(ℓ_m) ⋯ g(ℓ_1)` with inverse letters taken by matrix inversion.
pub fn word_product(gens: &[CMat], w: &BraidWord) -> CMat {
    let d = gens.first().map_or(1, |g| g.nrows());
    let mut out = identity(d);
    for l in w.letters() {
        let g = &gens[l.index - 1];
        let m = if l.sign > 0 { g.clone() } else { g.clone().try_inverse().expect("generator is invertible") };
        out = m * out;
    }
    out
}
