//! su(N) generator bases, structure constants, tensor-site operators and the
//! Casimir pair operators `Ω_pq`.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * generators `T_a` are anti-Hermitian and traceless;
//! * the invariant pairing is `⟨X, Y⟩ = -Tr(XY)`, positive definite on su(N);
//! * the basis is orthonormal up to a factor: `⟨T_a, T_b⟩ = ½ δ_ab`;
//! * the dual Coxeter number is `h = N`.
//!
//! Sites are zero-based throughout.

use std::collections::BTreeMap;

use crate::linalg::{c64, commutator, embed, frob, CMat, C64, I};
use crate::{Error, Result};

/// Orthogonal anti-Hermitian basis of su(N), ordered as the generalized
/// Gell-Mann matrices: for each pair `j < k` the symmetric then the
/// antisymmetric off-diagonal generator, Cartan (diagonal) generators last.
#[derive(Debug, Clone)]
pub struct LieBasis {
    rank: usize,
    generators: Vec<CMat>,
    dual_coxeter: f64,
    pairing_sign: f64,
}

impl LieBasis {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of generators, `N² - 1`.
    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[CMat] {
        &self.generators
    }

    pub fn generator(&self, a: usize) -> &CMat {
        &self.generators[a]
    }

    pub fn dual_coxeter(&self) -> f64 {
        self.dual_coxeter
    }

    /// Sign `s` in `⟨X, Y⟩ = s · Tr(XY)`; always `-1`.
    pub fn pairing_sign(&self) -> f64 {
        self.pairing_sign
    }

    /// `⟨X, Y⟩ = -Tr(XY)`, bilinear (no complex conjugation).
    pub fn pairing(&self, x: &CMat, y: &CMat) -> C64 {
        pairing(x, y)
    }

    /// Common value of `⟨T_a, T_a⟩`.
    pub fn generator_norm(&self) -> f64 {
        0.5
    }

    /// Coordinates `x_a` with `X = Σ_a x_a T_a`, for `X` in the complexified algebra.
    pub fn coordinates(&self, x: &CMat) -> Vec<C64> {
        self.generators
            .iter()
            .map(|t| pairing(t, x) / self.generator_norm())
            .collect()
    }

    pub fn from_coordinates(&self, coords: &[C64]) -> CMat {
        let n = self.rank;
        let mut out = CMat::zeros(n, n);
        for (t, &x) in self.generators.iter().zip(coords) {
            out += t * x;
        }
        out
    }
}

/// `⟨X, Y⟩ = -Tr(XY)`.
pub fn pairing(x: &CMat, y: &CMat) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..x.nrows() {
        for c in 0..x.ncols() {
            acc += x[(r, c)] * y[(c, r)];
        }
    }
    -acc
}

pub fn build_su_basis(n: usize) -> Result<LieBasis> {
    if n < 2 {
        return Err(Error::RankTooSmall(n));
    }
    let half_i = I * 0.5;
    let mut generators = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut sym = CMat::zeros(n, n);
            sym[(j, k)] = c64(1.0, 0.0);
            sym[(k, j)] = c64(1.0, 0.0);
            generators.push(sym * half_i);

            let mut asym = CMat::zeros(n, n);
            asym[(j, k)] = c64(0.0, -1.0);
            asym[(k, j)] = c64(0.0, 1.0);
            generators.push(asym * half_i);
        }
    }
    for l in 1..n {
        let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = CMat::zeros(n, n);
        for m in 0..l {
            diag[(m, m)] = c64(scale, 0.0);
        }
        diag[(l, l)] = c64(-(l as f64) * scale, 0.0);
        generators.push(diag * half_i);
    }
    Ok(LieBasis {
        rank: n,
        generators,
        dual_coxeter: n as f64,
        pairing_sign: -1.0,
    })
}

/// `f[a][b][c]` with `[T_a, T_b] = Σ_c f^{ab}_c T_c`.
#[derive(Debug, Clone)]
pub struct StructureConstants {
    f: Vec<Vec<Vec<f64>>>,
}

impl StructureConstants {
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.f[a][b][c]
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    /// Largest entrywise deviation between `[T_a, T_b]` and `Σ_c f^{ab}_c T_c`.
    pub fn reconstruction_residual(&self, basis: &LieBasis) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                let direct = commutator(basis.generator(a), basis.generator(b));
                let mut rebuilt = CMat::zeros(basis.rank(), basis.rank());
                for c in 0..d {
                    rebuilt += basis.generator(c) * c64(self.f[a][b][c], 0.0);
                }
                let diff = direct - rebuilt;
                worst = diff.iter().map(|z| z.norm()).fold(worst, f64::max);
            }
        }
        worst
    }

    /// Largest coefficient of the Jacobi combination
    /// `Σ_d f^{ab}_d f^{dc}_e + f^{bc}_d f^{da}_e + f^{ca}_d f^{db}_e`.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim();
        let f = &self.f;
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let s: f64 = (0..d)
                            .map(|m| f[a][b][m] * f[m][c][e] + f[b][c][m] * f[m][a][e] + f[c][a][m] * f[m][b][e])
                            .sum();
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }
}

pub fn structure_constants(basis: &LieBasis) -> StructureConstants {
    let d = basis.dim();
    let norm = basis.generator_norm();
    let f = (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    let comm = commutator(basis.generator(a), basis.generator(b));
                    (0..d)
                        .map(|c| (pairing(&comm, basis.generator(c)) / norm).re)
                        .collect()
                })
                .collect()
        })
        .collect();
    StructureConstants { f }
}

/// `n` tensor factors, each carrying a representation of the same algebra.
#[derive(Debug, Clone)]
pub struct SiteSystem {
    site_dims: Vec<usize>,
    site_generators: Vec<Vec<CMat>>,
}

impl SiteSystem {
    /// `n` copies of the defining representation.
    pub fn fundamental(basis: &LieBasis, n: usize) -> Self {
        SiteSystem {
            site_dims: vec![basis.rank(); n],
            site_generators: vec![basis.generators().to_vec(); n],
        }
    }

    /// Mixed representations, one generator list per site.
    pub fn from_sites(site_generators: Vec<Vec<CMat>>) -> Result<Self> {
        let expected = site_generators.first().map_or(0, Vec::len);
        let mut site_dims = Vec::with_capacity(site_generators.len());
        for gens in &site_generators {
            if gens.len() != expected {
                return Err(Error::DimensionMismatch { expected, got: gens.len() });
            }
            let d = gens.first().map_or(0, |g| g.nrows());
            site_dims.push(d);
        }
        Ok(SiteSystem { site_dims, site_generators })
    }

    pub fn n(&self) -> usize {
        self.site_dims.len()
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn total_dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n() {
            return Err(Error::SiteOutOfRange { site, n: self.n() });
        }
        Ok(())
    }

    /// `T_a` acting on factor `site`, identity elsewhere.
    pub fn lift(&self, a: usize, site: usize) -> Result<CMat> {
        self.check_site(site)?;
        Ok(embed(&self.site_dims, &[(site, &self.site_generators[site][a])]))
    }

    /// Simultaneous action `Σ_i T_a^i`.
    pub fn total_generator(&self, a: usize) -> CMat {
        let d = self.total_dim();
        let mut out = CMat::zeros(d, d);
        for site in 0..self.n() {
            out += embed(&self.site_dims, &[(site, &self.site_generators[site][a])]);
        }
        out
    }

    fn pair_product(&self, a: usize, p: usize, q: usize) -> CMat {
        embed(
            &self.site_dims,
            &[(p, &self.site_generators[p][a]), (q, &self.site_generators[q][a])],
        )
    }
}

#[derive(Debug, Clone)]
pub struct CasimirPair {
    pub p: usize,
    pub q: usize,
    pub matrix: CMat,
}

/// `Ω_pq = s · Σ_a T_a^p T_a^q` where `s` is the pairing sign. With
/// anti-Hermitian generators this is the Hermitian Casimir tensor
/// (`+¼` on the symmetric and `-¾` on the antisymmetric part for su(2)).
pub fn casimir_pair(sys: &SiteSystem, basis: &LieBasis, p: usize, q: usize) -> Result<CasimirPair> {
    sys.check_site(p)?;
    sys.check_site(q)?;
    if p == q {
        return Err(Error::CoincidentSites(p));
    }
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    let d = sys.total_dim();
    let mut matrix = CMat::zeros(d, d);
    for a in 0..basis.dim() {
        matrix += sys.pair_product(a, lo, hi);
    }
    matrix *= c64(basis.pairing_sign(), 0.0);
    Ok(CasimirPair { p, q, matrix })
}

/// Every `Ω_pq`, `p < q`, keyed by the ordered pair.
pub fn all_casimir_pairs(sys: &SiteSystem, basis: &LieBasis) -> Result<BTreeMap<(usize, usize), CMat>> {
    let mut out = BTreeMap::new();
    for p in 0..sys.n() {
        for q in (p + 1)..sys.n() {
            out.insert((p, q), casimir_pair(sys, basis, p, q)?.matrix);
        }
    }
    Ok(out)
}

/// Residual norms of the infinitesimal braid relations, keyed by a label
/// with one-based site numbers such as `"[O12,O13+O23]"`.
pub fn infinitesimal_braid_residuals(sys: &SiteSystem, basis: &LieBasis) -> Result<BTreeMap<String, f64>> {
    let n = sys.n();
    if n < 3 {
        return Err(Error::TooFewSites { required: 3, got: n });
    }
    let omega = all_casimir_pairs(sys, basis)?;
    let get = |p: usize, q: usize| &omega[&(p.min(q), p.max(q))];
    let mut out = BTreeMap::new();
    for p in 0..n {
        for q in (p + 1)..n {
            for r in (q + 1)..n {
                let (a, b, c) = (p + 1, q + 1, r + 1);
                let lhs = commutator(get(p, q), &(get(p, r) + get(q, r)));
                out.insert(format!("[O{a}{b},O{a}{c}+O{b}{c}]"), frob(&lhs));
                let rhs = commutator(&(get(p, q) + get(p, r)), get(q, r));
                out.insert(format!("[O{a}{b}+O{a}{c},O{b}{c}]"), frob(&rhs));
            }
        }
    }
    let pairs: Vec<(usize, usize)> = omega.keys().copied().collect();
    for (i, &(p, q)) in pairs.iter().enumerate() {
        for &(r, s) in &pairs[i + 1..] {
            if p != r && p != s && q != r && q != s {
                let res = frob(&commutator(get(p, q), get(r, s)));
                out.insert(format!("[O{}{},O{}{}]", p + 1, q + 1, r + 1, s + 1), res);
            }
        }
    }
    Ok(out)
}

/// `max_a ‖[Ω_pq, Σ_i T_a^i]‖`.
pub fn casimir_invariance_residual(sys: &SiteSystem, basis: &LieBasis, pair: &CasimirPair) -> f64 {
    (0..basis.dim())
        .map(|a| frob(&commutator(&pair.matrix, &sys.total_generator(a))))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigen, identity};

    #[test]
    fn rejects_rank_one() {
        assert_eq!(build_su_basis(1).unwrap_err(), Error::RankTooSmall(1));
    }

    #[test]
    fn su2_basis_is_half_normalized() {
        let b = build_su_basis(2).unwrap();
        assert_eq!(b.dim(), 3);
        for a in 0..3 {
            for c in 0..3 {
                let expect = if a == c { 0.5 } else { 0.0 };
                assert!((b.pairing(b.generator(a), b.generator(c)) - expect).norm() < 1e-15);
            }
        }
        assert_eq!(b.dual_coxeter(), 2.0);
    }

    #[test]
    fn su3_generators_traceless_antihermitian_orthogonal() {
        let b = build_su_basis(3).unwrap();
        assert_eq!(b.dim(), 8);
        for (a, t) in b.generators().iter().enumerate() {
            assert!(t.trace().norm() < 1e-15);
            assert!(frob(&(t + t.adjoint())) < 1e-15);
            for (c, s) in b.generators().iter().enumerate() {
                let expect = if a == c { 0.5 } else { 0.0 };
                assert!((b.pairing(t, s) - expect).norm() < 1e-14, "({a},{c})");
            }
        }
    }

    #[test]
    fn su2_structure_constants_totally_antisymmetric() {
        let b = build_su_basis(2).unwrap();
        let f = structure_constants(&b);
        // brute force over all triples
        for a in 0..3 {
            for c in 0..3 {
                for e in 0..3 {
                    let v = f.get(a, c, e);
                    assert!((v + f.get(c, a, e)).abs() < 1e-15);
                    assert!((v + f.get(a, e, c)).abs() < 1e-15);
                    assert!((v - f.get(c, e, a)).abs() < 1e-15);
                }
                assert_eq!(f.get(a, a, c), 0.0);
            }
        }
        // [T_1, T_2] against the direct commutator
        let direct = commutator(b.generator(0), b.generator(1));
        let rebuilt: CMat = (0..3).fold(CMat::zeros(2, 2), |acc, c| acc + b.generator(c) * c64(f.get(0, 1, c), 0.0));
        assert!(frob(&(direct - rebuilt)) < 1e-14);
    }

    #[test]
    fn structure_constant_invariants() {
        for n in 2..=4 {
            let b = build_su_basis(n).unwrap();
            let f = structure_constants(&b);
            assert!(f.reconstruction_residual(&b) <= 1e-13);
            assert!(f.jacobi_residual() <= 1e-12);
        }
    }

    #[test]
    fn distinct_sites_commute() {
        let b = build_su_basis(2).unwrap();
        let sys = SiteSystem::fundamental(&b, 3);
        for a in 0..3 {
            for c in 0..3 {
                let x = sys.lift(a, 0).unwrap();
                let y = sys.lift(c, 2).unwrap();
                assert!(frob(&commutator(&x, &y)) <= 1e-13);
            }
        }
    }

    #[test]
    fn su2_casimir_spectrum() {
        let b = build_su_basis(2).unwrap();
        let sys = SiteSystem::fundamental(&b, 2);
        let om = casimir_pair(&sys, &b, 0, 1).unwrap();
        let (vals, _) = hermitian_eigen(&om.matrix);
        assert!((vals[0] + 0.75).abs() < 1e-14);
        for v in &vals[1..] {
            assert!((v - 0.25).abs() < 1e-14);
        }
        let swapped = casimir_pair(&sys, &b, 1, 0).unwrap();
        assert_eq!(om.matrix, swapped.matrix);
        assert!(frob(&(&om.matrix - om.matrix.adjoint())) < 1e-15);
    }

    #[test]
    fn casimir_is_g_invariant_and_local() {
        let b = build_su_basis(3).unwrap();
        let sys = SiteSystem::fundamental(&b, 3);
        let om13 = casimir_pair(&sys, &b, 0, 2).unwrap();
        assert!(casimir_invariance_residual(&sys, &b, &om13) <= 1e-12);
        for a in 0..b.dim() {
            assert!(frob(&commutator(&om13.matrix, &sys.lift(a, 1).unwrap())) <= 1e-13);
        }
        assert_eq!(casimir_pair(&sys, &b, 1, 1).unwrap_err(), Error::CoincidentSites(1));
        let _ = identity(1);
    }

    #[test]
    fn infinitesimal_braid_relations() {
        let b2 = build_su_basis(2).unwrap();
        let r = infinitesimal_braid_residuals(&SiteSystem::fundamental(&b2, 3), &b2).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.values().all(|&v| v <= 1e-13));

        let r4 = infinitesimal_braid_residuals(&SiteSystem::fundamental(&b2, 4), &b2).unwrap();
        assert!(r4["[O12,O34]"] <= 1e-13);
        assert!(r4.values().all(|&v| v <= 1e-13));

        let b3 = build_su_basis(3).unwrap();
        let r3 = infinitesimal_braid_residuals(&SiteSystem::fundamental(&b3, 3), &b3).unwrap();
        assert!(r3.values().all(|&v| v <= 1e-12));

        let err = infinitesimal_braid_residuals(&SiteSystem::fundamental(&b2, 2), &b2).unwrap_err();
        assert_eq!(err, Error::TooFewSites { required: 3, got: 2 });
    }
}
