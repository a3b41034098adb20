//! Residual tables and the parameter sweeps behind `all-checks`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equivalence::{compare_generators, ComparisonReport, ConjugatorOutcome, MAX_CONDITION};
use crate::holonomy::{
    braid_relation_residuals, deformation_deviation, homotopy_invariance_check, monodromy_generator, two_strand_closed_form, BraidLetter, BraidWord,
};
use crate::kz_connection::{flatness_residual, gauss_residue_check, ConfigPoint, ConnectionCoefficients};
use crate::lie_core::{build_su_basis, infinitesimal_braid_residuals, SiteSystem};
use crate::linalg::{frob, CMat, C64};
use crate::loopspace::{
    make_loop, prop1_check, random_loop_data, BracketContext, FourierMode, LoopData, LoopSample, TangentLoop, CENTRAL_SIGN,
    ENERGY_BRACKET_SCALE, SUGAWARA_CONSTANT, TRANSGRESSION_ALPHA, VIRASORO_BRACKET_SCALE,
};
use crate::rmatrix::{braid_rep_generators, build_r, qybe_residual, rcheck_relations, tl_residuals, QDeformation};
use crate::Result;

/// Documented residual bounds.
pub mod bounds {
    pub const ALGEBRAIC: f64 = 1e-12;
    pub const FLATNESS_ANALYTIC: f64 = 1e-12;
    pub const FLATNESS_FD: f64 = 1e-6;
    /// Allowed `|ratio - 4|` of the derivative errors at `δ` and `δ/2`.
    pub const RICHARDSON: f64 = 0.5;
    pub const MONODROMY: f64 = 1e-8;
    pub const BRAID: f64 = 1e-6;
    pub const HOMOTOPY: f64 = 1e-8;
    pub const EQUIVALENCE: f64 = 1e-6;
    pub const CONJUGATOR: f64 = 1e-5;
    pub const CONDITION: f64 = super::MAX_CONDITION;
    pub const GAUSS: f64 = 1e-10;
    pub const POISSON: f64 = 1e-8;
    pub const JACOBI: f64 = 1e-7;
    pub const TRANSGRESSION: f64 = 1e-8;
    pub const ALPHA_SPREAD: f64 = 1e-6;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    /// `None` for informational rows that never fail a run.
    pub bound: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckTable {
    pub title: String,
    pub rows: Vec<Residual>,
}

impl CheckTable {
    pub fn new(title: impl Into<String>) -> Self {
        CheckTable { title: title.into(), rows: Vec::new() }
    }

    pub fn bounded(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        let pass = value <= bound;
        self.rows.push(Residual { name: name.into(), value, bound: Some(bound), pass });
    }

    pub fn info(&mut self, name: impl Into<String>, value: f64) {
        self.rows.push(Residual { name: name.into(), value, bound: None, pass: true });
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Residual> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Residual> {
        self.rows.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub tol: f64,
    pub grid: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { tol: 1e-10, grid: 256, seed: 0 }
    }
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// R-matrix, Temperley-Lieb-Jones and infinitesimal braid identities.
pub fn algebraic_identities(ranks: &[usize], levels: &[u32], strands: &[usize]) -> Result<CheckTable> {
    let mut t = CheckTable::new("algebraic identities");
    for &rank in ranks {
        let basis = build_su_basis(rank)?;
        // the relations involve three distinct sites
        for &n in strands.iter().filter(|&&n| n >= 3) {
            let sys = SiteSystem::fundamental(&basis, n);
            let res = infinitesimal_braid_residuals(&sys, &basis)?;
            t.bounded(format!("su{rank} n={n} infinitesimal braid"), worst(res.into_values()), bounds::ALGEBRAIC);
        }
        for &k in levels {
            let rm = build_r(rank, QDeformation::su(rank, k))?;
            let rel = rcheck_relations(&rm);
            t.bounded(format!("su{rank} k={k} QYBE"), qybe_residual(&rm), bounds::ALGEBRAIC);
            t.bounded(format!("su{rank} k={k} Rcheck quadratic"), rel.quadratic, bounds::ALGEBRAIC);
            t.bounded(format!("su{rank} k={k} braided YBE"), rel.braided_ybe, bounds::ALGEBRAIC);
            for &n in strands {
                let tl = tl_residuals(&rm, n)?;
                t.bounded(format!("su{rank} k={k} n={n} TLJ"), worst(tl.into_values()), bounds::ALGEBRAIC);
            }
        }
    }
    Ok(t)
}

/// `count` seeded configurations in the disk of radius 2 with pairwise
/// distance at least 0.3.
pub fn random_configurations(n: usize, count: usize, seed: u64) -> Result<Vec<ConfigPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z: Vec<C64> = (0..n)
            .map(|_| C64::from_polar(2.0 * rng.random::<f64>().sqrt(), 2.0 * std::f64::consts::PI * rng.random::<f64>()))
            .collect();
        let cfg = ConfigPoint::new(z);
        if let Ok(c) = cfg {
            if c.min_distance() >= 0.3 {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Analytic and finite-difference curvature at random configurations.
pub fn flatness(ranks: &[usize], strands: &[usize], level: u32, points: usize, seed: u64) -> Result<CheckTable> {
    let mut t = CheckTable::new("flatness");
    for &rank in ranks {
        for &n in strands {
            let cfg = ConnectionCoefficients::su(rank, n, level)?;
            let mut analytic: f64 = 0.0;
            let mut fd: f64 = 0.0;
            let mut ratio_dev: f64 = 0.0;
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for z in random_configurations(n, points, seed ^ ((rank as u64) << 8 | n as u64))? {
                let r = flatness_residual(&cfg, &z, None)?;
                analytic = analytic.max(r.max_analytic());
                fd = fd.max(r.max_finite_difference());
                if let Some((a, b)) = r.richardson_ratio_range() {
                    lo = lo.min(a);
                    hi = hi.max(b);
                    ratio_dev = ratio_dev.max((a - 4.0).abs()).max((b - 4.0).abs());
                }
            }
            let tag = format!("su{rank} n={n}");
            t.bounded(format!("{tag} analytic curvature"), analytic, bounds::FLATNESS_ANALYTIC);
            t.bounded(format!("{tag} finite-difference curvature"), fd, bounds::FLATNESS_FD);
            t.bounded(format!("{tag} |Richardson ratio - 4|"), ratio_dev, bounds::RICHARDSON);
            if hi > 0.0 {
                t.info(format!("{tag} Richardson ratio min"), lo);
                t.info(format!("{tag} Richardson ratio max"), hi);
            }
        }
    }
    Ok(t)
}

/// Two-strand monodromy against `Swap·exp(∓iπ·2/(k+h)·Ω_12)`.
pub fn monodromy_closed_form(levels: &[u32], tol: f64) -> Result<CheckTable> {
    let mut t = CheckTable::new("two-strand closed form");
    let base = ConfigPoint::standard(2);
    for &k in levels {
        let cfg = ConnectionCoefficients::su(2, 2, k)?;
        for sign in [1i8, -1] {
            let rho = monodromy_generator(&cfg, &base, 1, sign, tol)?;
            let exact = two_strand_closed_form(&cfg, 1, sign as i64)?;
            let label = if sign > 0 { "s1" } else { "s1^-1" };
            t.bounded(format!("su2 k={k} {label}"), frob(&(rho - exact)), bounds::MONODROMY);
        }
    }
    Ok(t)
}

/// Braid and far-commutation relations of the holonomy generators, and
/// invariance under path deformation.
pub fn holonomy_relations(strands: &[usize], levels: &[u32], tol: f64) -> Result<CheckTable> {
    let mut t = CheckTable::new("holonomy braid relations");
    for &n in strands {
        let base = ConfigPoint::standard(n);
        for &k in levels {
            let cfg = ConnectionCoefficients::su(2, n, k)?;
            let gens: Vec<_> = (1..n).map(|i| monodromy_generator(&cfg, &base, i, 1, tol)).collect::<Result<_>>()?;
            let res = braid_relation_residuals(&gens);
            let tag = format!("su2 n={n} k={k}");
            let braid = worst(res.iter().filter(|(k, _)| k.starts_with("braid")).map(|(_, v)| *v));
            t.bounded(format!("{tag} braid"), braid, bounds::BRAID);
            let far: Vec<f64> = res.iter().filter(|(k, _)| k.starts_with("far")).map(|(_, v)| *v).collect();
            if !far.is_empty() {
                t.bounded(format!("{tag} far commutation"), worst(far), bounds::BRAID);
            }
            t.bounded(format!("{tag} homotopy wiggle"), homotopy_invariance_check(&cfg, &base, 1, 0.1, tol)?, bounds::HOMOTOPY);
            t.bounded(format!("{tag} homotopy radius x2"), deformation_deviation(&cfg, &base, n - 1, 2.0, 0.0, tol)?, bounds::HOMOTOPY);
        }
    }
    Ok(t)
}

/// Words used for trace comparisons on `n` strands.
pub fn comparison_words(n: usize) -> Vec<BraidWord> {
    let mut words = vec![BraidWord::empty()];
    for i in 1..n {
        words.push(BraidWord::new(vec![BraidLetter::new(i, 1)]));
        words.push(BraidWord::new(vec![BraidLetter::new(i, -1), BraidLetter::new(i, -1)]));
    }
    if n >= 3 {
        words.push(BraidWord::new(vec![BraidLetter::new(1, 1), BraidLetter::new(2, 1), BraidLetter::new(1, 1)]));
        words.push(BraidWord::new(vec![BraidLetter::new(1, 1), BraidLetter::new(2, -1)]));
    }
    words
}

/// Rows for one projective comparison. Word traces are compared at
/// `max(100·tol, 1e-6)` since words compound transport error.
pub fn record_comparison(t: &mut CheckTable, tag: &str, rep: &ComparisonReport, tol: f64) {
    t.bounded(format!("{tag} eigenvalue ratios"), rep.ratio_deviation, bounds::EQUIVALENCE);
    t.bounded(format!("{tag} common-scalar spectra"), rep.eig_deviation, bounds::EQUIVALENCE);
    t.info(format!("{tag} c.re"), rep.c.re);
    t.info(format!("{tag} c.im"), rep.c.im);
    t.bounded(format!("{tag} word traces"), worst(rep.trace_deviations.values().copied()), (100.0 * tol).max(bounds::EQUIVALENCE));
    match &rep.conjugator {
        Some(ConjugatorOutcome::Found { residual, condition, null_dim, .. }) => {
            t.bounded(format!("{tag} conjugator residual"), *residual, bounds::CONJUGATOR);
            t.bounded(format!("{tag} conjugator condition"), *condition, bounds::CONDITION);
            t.info(format!("{tag} intertwiner dimension"), *null_dim as f64);
        }
        Some(ConjugatorOutcome::NotEquivalent { smallest_singular_value, .. }) => {
            t.bounded(format!("{tag} conjugator residual"), *smallest_singular_value, bounds::CONJUGATOR);
            t.bounded(format!("{tag} conjugator condition"), f64::MAX, bounds::CONDITION);
            t.info(format!("{tag} intertwiner dimension"), 0.0);
        }
        None => {}
    }
}

/// Holonomy and R-matrix generators for `su(rank)` on `n` strands.
pub fn generator_pair(rank: usize, n: usize, k: u32, tol: f64) -> Result<(Vec<CMat>, Vec<CMat>)> {
    let base = ConfigPoint::standard(n);
    let cfg = ConnectionCoefficients::su(rank, n, k)?;
    let rhos = (1..n).map(|i| monodromy_generator(&cfg, &base, i, 1, tol)).collect::<Result<_>>()?;
    let nus = braid_rep_generators(&build_r(rank, QDeformation::su(rank, k))?, n)?;
    Ok((rhos, nus))
}

/// Projective comparison of holonomy and R-matrix generators.
pub fn equivalence_table(strands: &[usize], levels: &[u32], tol: f64, seed: u64) -> Result<CheckTable> {
    let mut t = CheckTable::new("holonomy vs R-matrix");
    for &n in strands {
        for &k in levels {
            let (rhos, nus) = generator_pair(2, n, k, tol)?;
            let rep = compare_generators(&rhos, &nus, &comparison_words(n), true, seed)?;
            record_comparison(&mut t, &format!("su2 n={n} k={k}"), &rep, tol);
        }
    }
    Ok(t)
}

/// Contour residues at `M` and radius `r`, and their stability under
/// `r → r/2` and `M → 2M`.
pub fn gauss_table(rank: usize, strands: &[usize], levels: &[u32], grid: usize, seed: u64) -> Result<CheckTable> {
    let mut t = CheckTable::new("Gauss residues");
    for &n in strands {
        let punctures = random_configurations(n, 1, seed ^ 0x9a55 ^ n as u64)?.remove(0);
        let r = 0.25 * punctures.min_distance();
        for &k in levels {
            let cfg = ConnectionCoefficients::su(rank, n, k)?;
            let mut base: f64 = 0.0;
            let mut halved: f64 = 0.0;
            let mut doubled: f64 = 0.0;
            for q in 0..n {
                for p in 0..n {
                    if p == q {
                        continue;
                    }
                    let a = gauss_residue_check(&cfg, &punctures, q, p, r, grid)?;
                    let b = gauss_residue_check(&cfg, &punctures, q, p, r / 2.0, grid)?;
                    let c = gauss_residue_check(&cfg, &punctures, q, p, r, 2 * grid)?;
                    base = base.max(a);
                    halved = halved.max(b);
                    doubled = doubled.max(c);
                }
            }
            let tag = format!("su{rank} n={n} k={k}");
            t.bounded(format!("{tag} residue M={grid}"), base, bounds::GAUSS);
            t.bounded(format!("{tag} residue radius/2"), halved, bounds::GAUSS);
            t.bounded(format!("{tag} residue M={}", 2 * grid), doubled, bounds::GAUSS);
        }
    }
    Ok(t)
}

/// Random `su(N)` loop number `i` of a seeded family.
pub fn fixture_loop(rank: usize, seed: u64, i: usize, grid: usize) -> Result<LoopSample> {
    let basis = build_su_basis(rank)?;
    let data = random_loop_data(&basis, seed.wrapping_add(i as u64), 2, 0.4, i % 2 == 1);
    make_loop(&basis, &data, grid)
}

/// Maxima of the bracket residuals on one loop.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BracketSummary {
    pub kacmoody: f64,
    pub energy: f64,
    pub virasoro: f64,
    pub sugawara: f64,
    pub jacobi: f64,
    pub energy_literal: f64,
    pub virasoro_literal: f64,
    pub central_flipped: f64,
}

pub const JACOBI_TRIPLES: [[(i64, usize); 3]; 3] = [[(1, 0), (-1, 1), (0, 2)], [(2, 0), (-1, 0), (1, 1)], [(1, 2), (1, 1), (-2, 2)]];

pub fn bracket_summary(lp: &LoopSample, range: i64) -> Result<BracketSummary> {
    let ctx = BracketContext::new(lp)?;
    let dim = lp.basis().dim();
    let mut s = BracketSummary::default();
    for n in -range..=range {
        for m in -range..=range {
            for a in 0..dim {
                for b in 0..dim {
                    s.kacmoody = s.kacmoody.max(ctx.kacmoody_check(n, m, a, b)?);
                    if n == -m && a == b && m != 0 {
                        let lhs = crate::loopspace::poisson_bracket(
                            lp,
                            crate::loopspace::Observable::Current { n, a },
                            crate::loopspace::Observable::Current { n: m, a: b },
                        )?;
                        let flipped = (lhs - ctx.kacmoody_rhs(n, m, a, b, -CENTRAL_SIGN)?).norm();
                        s.central_flipped = s.central_flipped.max(flipped);
                    }
                }
            }
            s.virasoro = s.virasoro.max(ctx.virasoro_check(n, m, VIRASORO_BRACKET_SCALE)?);
            s.virasoro_literal = s.virasoro_literal.max(ctx.virasoro_check(n, m, C64::new(1.0, 0.0))?);
        }
        for a in 0..dim {
            s.energy = s.energy.max(ctx.energy_check(n, a, ENERGY_BRACKET_SCALE)?);
            s.energy_literal = s.energy_literal.max(ctx.energy_check(n, a, C64::new(1.0, 0.0))?);
        }
        s.sugawara = s.sugawara.max(ctx.sugawara_check(n, SUGAWARA_CONSTANT)?);
    }
    for triple in JACOBI_TRIPLES {
        s.jacobi = s.jacobi.max(crate::loopspace::jacobi_residual(lp, triple)?);
    }
    Ok(s)
}

/// Current-algebra, Virasoro and Sugawara identities on `count` seeded loops.
pub fn loop_bracket_table(rank: usize, count: usize, seed: u64, grid: usize, range: i64) -> Result<CheckTable> {
    let mut t = CheckTable::new("loop-group Poisson algebra");
    let mut total = BracketSummary::default();
    let mut max_band = 0;
    for i in 0..count {
        let lp = fixture_loop(rank, seed, i, grid)?;
        max_band = max_band.max(lp.bandwidth());
        let s = bracket_summary(&lp, range)?;
        total.kacmoody = total.kacmoody.max(s.kacmoody);
        total.energy = total.energy.max(s.energy);
        total.virasoro = total.virasoro.max(s.virasoro);
        total.sugawara = total.sugawara.max(s.sugawara);
        total.jacobi = total.jacobi.max(s.jacobi);
        total.energy_literal = total.energy_literal.max(s.energy_literal);
        total.virasoro_literal = total.virasoro_literal.max(s.virasoro_literal);
        total.central_flipped = total.central_flipped.max(s.central_flipped);
    }
    t.bounded("{J,J} current algebra", total.kacmoody, bounds::POISSON);
    t.bounded("{E,J} normalized", total.energy, bounds::POISSON);
    t.bounded("{l,l} normalized", total.virasoro, bounds::POISSON);
    t.bounded("Sugawara", total.sugawara, bounds::POISSON);
    t.bounded("Jacobi", total.jacobi, bounds::JACOBI);
    t.info("{E,J} literal -inJ residual", total.energy_literal);
    t.info("{l,l} literal (n-m)l residual", total.virasoro_literal);
    t.info("{J,J} opposite central sign residual", total.central_flipped);
    t.info("max bandwidth", max_band as f64);
    Ok(t)
}

/// Tangent fixtures for the transgression identity on loop `i`.
pub fn transgression_tangents(basis: &crate::lie_core::LieBasis, grid: usize, i: usize) -> (TangentLoop, TangentLoop) {
    let g = |a: usize| basis.generator(a % basis.dim()).clone();
    let u = TangentLoop::trigonometric(grid, &[FourierMode { m: 1, cos: g(i), sin: g(i + 1) }, FourierMode { m: 3, cos: g(i + 2), sin: g(i) * C64::new(0.5, 0.0) }]);
    let v = TangentLoop::trigonometric(grid, &[FourierMode { m: 2, cos: g(i + 1), sin: g(i + 2) }]);
    (u, v)
}

pub fn transgression_table(rank: usize, count: usize, seed: u64, grid: usize) -> Result<CheckTable> {
    let mut t = CheckTable::new("transgression");
    let mut alphas = Vec::new();
    let mut best_residual: f64 = 0.0;
    let mut unit_residual: f64 = 0.0;
    for i in 0..count {
        let lp = fixture_loop(rank, seed, i, grid)?;
        let (u, v) = transgression_tangents(lp.basis(), grid, i);
        let vals = prop1_check(&lp, &u, &v)?;
        if let Some(a) = vals.best_alpha {
            alphas.push(a);
            best_residual = best_residual.max(vals.residual(a.re));
            t.info(format!("loop {i} alpha.im"), a.im);
        }
        unit_residual = unit_residual.max(vals.residual_unit_alpha);
    }
    let mean_alpha = alphas.iter().map(|a| a.re).sum::<f64>() / alphas.len().max(1) as f64;
    let spread = alphas.iter().map(|a| (a - mean_alpha).norm()).fold(0.0, f64::max);
    t.bounded("residual at best-fit alpha", best_residual, bounds::TRANSGRESSION);
    t.bounded("alpha spread", spread, bounds::ALPHA_SPREAD);
    t.bounded("|best alpha - frozen alpha|", (mean_alpha - TRANSGRESSION_ALPHA).abs(), bounds::ALPHA_SPREAD);
    t.info("best-fit alpha", mean_alpha);
    t.info("residual at alpha = 1", unit_residual);

    let basis = build_su_basis(rank)?;
    let constant = make_loop(&basis, &LoopData::default(), grid)?;
    let (u, v) = transgression_tangents(&basis, grid, 0);
    let vals = prop1_check(&constant, &u, &v)?;
    let any_alpha = worst([0.0, 0.5, 1.0, 2.0].iter().map(|&a| vals.residual(a)));
    t.bounded("constant loop, any alpha", any_alpha, bounds::TRANSGRESSION);
    Ok(t)
}

/// Every sweep behind the acceptance criteria.
pub fn all_checks(opts: &CheckOptions) -> Result<Vec<CheckTable>> {
    SWEEPS.iter().map(|(_, sweep)| sweep(opts)).collect()
}

type Sweep = fn(&CheckOptions) -> Result<CheckTable>;

/// The sweeps of `all-checks`, in report order.
pub const SWEEPS: [(&str, Sweep); 8] = [
    ("algebraic", |_| algebraic_identities(&[2, 3], &[1, 2, 3, 4, 5, 6], &[2, 3, 4])),
    ("flatness", |o| flatness(&[2, 3], &[2, 3, 4], 2, 20, o.seed)),
    ("closed_form", |o| monodromy_closed_form(&[1, 2, 3, 4], o.tol)),
    ("braid_relations", |o| holonomy_relations(&[3, 4], &[1, 2, 3, 4], o.tol)),
    ("equivalence", |o| equivalence_table(&[2, 3], &[1, 2, 3, 4], o.tol, o.seed)),
    ("gauss", |o| gauss_table(2, &[3, 4], &[1, 2, 3], o.grid, o.seed)),
    ("loop_brackets", |o| loop_bracket_table(2, 10, o.seed, o.grid, 3)),
    ("transgression", |o| transgression_table(2, 10, o.seed, o.grid)),
];
