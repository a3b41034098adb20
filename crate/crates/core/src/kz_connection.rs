//! The Kohno connection on configuration space and the rational Gauss-law
//! connection it is assembled from.
//!
//! The connection 1-form is
//!
//! ```text
//! Θ = 2/(k+h) Σ_{p<q} Ω_pq d ln(z_p - z_q)
//!   = 1/(k+h) Σ_{p≠q} Ω_pq (dz_p - dz_q)/(z_p - z_q)
//! ```
//!
//! The two sums agree because each unordered pair appears twice in the
//! ordered one. Everything here is evaluated from the ordered-pair form,
//! one `dz_j` coefficient at a time:
//! `Θ_j(z) = 2/(k+h) Σ_{p≠j} Ω_jp / (z_j - z_p)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::lie_core::{all_casimir_pairs, LieBasis, SiteSystem};
use crate::linalg::{c64, commutator, frob, CMat, C64};
use crate::{Error, Result};

/// `n` distinct puncture positions in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigPoint {
    z: Vec<C64>,
}

impl ConfigPoint {
    pub fn new(z: Vec<C64>) -> Result<Self> {
        for p in 0..z.len() {
            for q in (p + 1)..z.len() {
                let distance = (z[p] - z[q]).norm();
                if distance == 0.0 || !distance.is_finite() {
                    return Err(Error::CoincidentPunctures { p, q, distance });
                }
            }
        }
        Ok(ConfigPoint { z })
    }

    /// Points `1, 2, …, n` on the real axis.
    pub fn standard(n: usize) -> Self {
        ConfigPoint { z: (1..=n).map(|j| c64(j as f64, 0.0)).collect() }
    }

    pub fn positions(&self) -> &[C64] {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn min_distance(&self) -> f64 {
        min_pairwise_distance(&self.z)
    }
}

pub(crate) fn min_pairwise_distance(z: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for p in 0..z.len() {
        for q in (p + 1)..z.len() {
            best = best.min((z[p] - z[q]).norm());
        }
    }
    best
}

/// Level, dual Coxeter number and the Casimir couplings of the connection.
#[derive(Debug, Clone)]
pub struct ConnectionCoefficients {
    k: u32,
    h: f64,
    n: usize,
    dim: usize,
    couplings: BTreeMap<(usize, usize), CMat>,
}

impl ConnectionCoefficients {
    pub fn new(sys: &SiteSystem, basis: &LieBasis, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("level k must be >= 1".into()));
        }
        Ok(ConnectionCoefficients {
            k,
            h: basis.dual_coxeter(),
            n: sys.n(),
            dim: sys.total_dim(),
            couplings: all_casimir_pairs(sys, basis)?,
        })
    }

    /// Fundamental representation of su(N) on `n` sites at level `k`.
    pub fn su(rank: usize, n: usize, k: u32) -> Result<Self> {
        let basis = crate::lie_core::build_su_basis(rank)?;
        let sys = SiteSystem::fundamental(&basis, n);
        Self::new(&sys, &basis, k)
    }

    pub fn level(&self) -> u32 {
        self.k
    }

    pub fn dual_coxeter(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `2/(k+h)`.
    pub fn prefactor(&self) -> f64 {
        2.0 / (self.k as f64 + self.h)
    }

    /// `Ω_pq` for either ordering of the pair.
    pub fn omega(&self, p: usize, q: usize) -> &CMat {
        &self.couplings[&(p.min(q), p.max(q))]
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), CMat> {
        &self.couplings
    }

    fn check_point(&self, z: &ConfigPoint) -> Result<()> {
        if z.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: z.n() });
        }
        Ok(())
    }
}

/// `Θ_j(z)`, the `dz_j` coefficient of the connection form.
pub fn theta_component(cfg: &ConnectionCoefficients, z: &ConfigPoint, j: usize) -> Result<CMat> {
    cfg.check_point(z)?;
    if j >= cfg.n {
        return Err(Error::SiteOutOfRange { site: j, n: cfg.n });
    }
    let zs = z.positions();
    let mut out = CMat::zeros(cfg.dim, cfg.dim);
    for p in (0..cfg.n).filter(|&p| p != j) {
        let w = (zs[j] - zs[p]).inv() * cfg.prefactor();
        out += cfg.omega(j, p) * w;
    }
    Ok(out)
}

/// `Θ(z)(v) = Σ_j Θ_j(z) v_j`.
pub fn theta_apply(cfg: &ConnectionCoefficients, z: &ConfigPoint, v: &[C64]) -> Result<CMat> {
    cfg.check_point(z)?;
    if v.len() != cfg.n {
        return Err(Error::DimensionMismatch { expected: cfg.n, got: v.len() });
    }
    Ok(theta_along(cfg, z.positions(), v))
}

/// Unchecked `Θ(z)(v)` over unordered pairs, used on the transport hot path.
pub(crate) fn theta_along(cfg: &ConnectionCoefficients, z: &[C64], v: &[C64]) -> CMat {
    let mut out = CMat::zeros(cfg.dim, cfg.dim);
    for (&(p, q), omega) in &cfg.couplings {
        let dv = v[p] - v[q];
        if dv == C64::new(0.0, 0.0) {
            continue;
        }
        let w = dv / (z[p] - z[q]) * cfg.prefactor();
        out += omega * w;
    }
    out
}

/// Curvature diagnostics for one pair of directions `(j, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureEntry {
    /// `‖∂_jΘ_l - ∂_lΘ_j + [Θ_j, Θ_l]‖` with closed-form derivatives.
    pub analytic: f64,
    /// Same quantity with central-difference derivatives at step `delta`.
    pub finite_difference: f64,
    /// Step for the convergence-order probe, scaled to `|z_j - z_l|` so that
    /// truncation error dominates round-off from nearer poles.
    pub richardson_delta: f64,
    /// `max(‖D_h ∂_jΘ_l - ∂_jΘ_l‖, ‖D_h ∂_lΘ_j - ∂_lΘ_j‖)` at `h = richardson_delta`.
    pub derivative_error: f64,
    /// Same at `h / 2`; the ratio to `derivative_error` is ≈ 4.
    pub derivative_error_half: f64,
}

#[derive(Debug, Clone)]
pub struct FlatnessReport {
    pub delta: f64,
    pub entries: BTreeMap<(usize, usize), CurvatureEntry>,
}

impl FlatnessReport {
    pub fn max_analytic(&self) -> f64 {
        self.entries.values().map(|e| e.analytic).fold(0.0, f64::max)
    }

    pub fn max_finite_difference(&self) -> f64 {
        self.entries.values().map(|e| e.finite_difference).fold(0.0, f64::max)
    }

    /// Smallest and largest `derivative_error / derivative_error_half` over
    /// entries where the derivative error is above round-off.
    pub fn richardson_ratio_range(&self) -> Option<(f64, f64)> {
        let ratios: Vec<f64> = self
            .entries
            .values()
            .filter(|e| e.derivative_error > 1e-13)
            .map(|e| e.derivative_error / e.derivative_error_half)
            .collect();
        if ratios.is_empty() {
            return None;
        }
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        Some((lo, hi))
    }
}

/// Default central-difference step: `1e-4` times the minimum puncture distance.
pub fn default_fd_step(z: &ConfigPoint) -> f64 {
    1e-4 * z.min_distance()
}

/// `∂_{z_j} Θ_l` in closed form (`j ≠ l`).
fn theta_derivative(cfg: &ConnectionCoefficients, z: &[C64], j: usize, l: usize) -> CMat {
    let w = (z[l] - z[j]).powi(-2) * cfg.prefactor();
    cfg.omega(l, j) * w
}

fn fd_derivative(cfg: &ConnectionCoefficients, z: &ConfigPoint, j: usize, l: usize, delta: f64) -> Result<CMat> {
    let shifted = |s: f64| -> Result<CMat> {
        let mut zs = z.positions().to_vec();
        zs[j] += c64(s, 0.0);
        theta_component(cfg, &ConfigPoint::new(zs)?, l)
    };
    Ok((shifted(delta)? - shifted(-delta)?) * c64(0.5 / delta, 0.0))
}

pub fn flatness_residual(cfg: &ConnectionCoefficients, z: &ConfigPoint, delta: Option<f64>) -> Result<FlatnessReport> {
    cfg.check_point(z)?;
    if cfg.n < 2 {
        return Err(Error::TooFewSites { required: 2, got: cfg.n });
    }
    let delta = delta.unwrap_or_else(|| default_fd_step(z));
    let half_min = 0.5 * z.min_distance();
    if !(delta > 0.0 && delta < half_min) {
        return Err(Error::StepTooLarge { delta, half_min });
    }
    let thetas: Vec<CMat> = (0..cfg.n)
        .map(|j| theta_component(cfg, z, j))
        .collect::<Result<_>>()?;
    let zs = z.positions();
    let mut entries = BTreeMap::new();
    for j in 0..cfg.n {
        for l in (j + 1)..cfg.n {
            let bracket = commutator(&thetas[j], &thetas[l]);
            let d_j_l = theta_derivative(cfg, zs, j, l);
            let d_l_j = theta_derivative(cfg, zs, l, j);
            let analytic = frob(&(&d_j_l - &d_l_j + &bracket));

            let fd_j_l = fd_derivative(cfg, z, j, l, delta)?;
            let fd_l_j = fd_derivative(cfg, z, l, j, delta)?;
            let finite_difference = frob(&(&fd_j_l - &fd_l_j + &bracket));
            let richardson_delta = (0.05 * (zs[j] - zs[l]).norm()).min(0.25 * z.min_distance());
            let derivative_error_at = |h: f64| -> Result<f64> {
                let a = frob(&(fd_derivative(cfg, z, j, l, h)? - &d_j_l));
                let b = frob(&(fd_derivative(cfg, z, l, j, h)? - &d_l_j));
                Ok(a.max(b))
            };
            let derivative_error = derivative_error_at(richardson_delta)?;
            let derivative_error_half = derivative_error_at(0.5 * richardson_delta)?;

            entries.insert(
                (j, l),
                CurvatureEntry { analytic, finite_difference, richardson_delta, derivative_error, derivative_error_half },
            );
        }
    }
    Ok(FlatnessReport { delta, entries })
}

fn pole_check(punctures: &ConfigPoint, q: usize, z: C64) -> Result<()> {
    for (p, &zp) in punctures.positions().iter().enumerate() {
        if p != q && z == zp {
            return Err(Error::PoleHit { p, z: format!("{z}") });
        }
    }
    Ok(())
}

/// `A_q(z) = 2/k Σ_{p≠q} Ω_pq / (z - z_p)`, the holomorphic component of the
/// Gauss-law connection seen from site `q`; its antiholomorphic component
/// vanishes identically.
pub fn gauss_connection(cfg: &ConnectionCoefficients, punctures: &ConfigPoint, q: usize, z: C64) -> Result<CMat> {
    cfg.check_point(punctures)?;
    if q >= cfg.n {
        return Err(Error::SiteOutOfRange { site: q, n: cfg.n });
    }
    pole_check(punctures, q, z)?;
    let scale = 2.0 / cfg.k as f64;
    let mut out = CMat::zeros(cfg.dim, cfg.dim);
    for (p, &zp) in punctures.positions().iter().enumerate() {
        if p == q {
            continue;
        }
        out += cfg.omega(p, q) * ((z - zp).inv() * scale);
    }
    Ok(out)
}

/// `(1/2πi) ∮ A_q(z) dz` over the circle `|z - center| = radius`, by the
/// `m`-point trapezoid rule.
pub fn contour_integral(
    cfg: &ConnectionCoefficients,
    punctures: &ConfigPoint,
    q: usize,
    center: C64,
    radius: f64,
    m: usize,
) -> Result<CMat> {
    let mut acc = CMat::zeros(cfg.dim, cfg.dim);
    for j in 0..m {
        let phase = C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64);
        let z = center + phase * radius;
        // dz / (2πi) = r e^{iφ} dφ / 2π
        acc += gauss_connection(cfg, punctures, q, z)? * (phase * radius);
    }
    Ok(acc / c64(m as f64, 0.0))
}

/// `‖(1/2πi) ∮_{|z-z_p|=r} A_q dz - (2/k) Ω_pq‖`.
pub fn gauss_residue_check(
    cfg: &ConnectionCoefficients,
    punctures: &ConfigPoint,
    q: usize,
    p: usize,
    radius: f64,
    m: usize,
) -> Result<f64> {
    cfg.check_point(punctures)?;
    for s in [p, q] {
        if s >= cfg.n {
            return Err(Error::SiteOutOfRange { site: s, n: cfg.n });
        }
    }
    if p == q {
        return Err(Error::CoincidentSites(p));
    }
    let zs = punctures.positions();
    for (other, &zo) in zs.iter().enumerate() {
        if other != p && (zo - zs[p]).norm() <= radius {
            return Err(Error::ContourOverlap { p, other, radius });
        }
    }
    let numeric = contour_integral(cfg, punctures, q, zs[p], radius, m)?;
    let expected = cfg.omega(p, q) * c64(2.0 / cfg.k as f64, 0.0);
    Ok(frob(&(numeric - expected)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn su2(n: usize, k: u32) -> ConnectionCoefficients {
        ConnectionCoefficients::su(2, n, k).unwrap()
    }

    #[test]
    fn two_point_components() {
        // k + h = 4
        let cfg = su2(2, 2);
        let z = ConfigPoint::new(vec![c64(0.0, 0.0), c64(1.0, 0.0)]).unwrap();
        let om = cfg.omega(0, 1).clone();
        let t1 = theta_component(&cfg, &z, 0).unwrap();
        let t2 = theta_component(&cfg, &z, 1).unwrap();
        assert!(frob(&(&t1 + &om * c64(0.5, 0.0))) < 1e-15);
        assert!(frob(&(&t2 - &om * c64(0.5, 0.0))) < 1e-15);
        let applied = theta_apply(&cfg, &z, &[c64(1.0, 0.0), c64(0.0, 0.0)]).unwrap();
        assert!(frob(&(applied - t1)) < 1e-15);
    }

    #[test]
    fn diagonal_direction_is_annihilated() {
        let cfg = su2(3, 1);
        let z = ConfigPoint::new(vec![c64(0.1, 0.2), c64(1.3, -0.4), c64(-0.7, 0.9)]).unwrap();
        let ones = vec![c64(1.0, 0.0); 3];
        assert_eq!(frob(&theta_apply(&cfg, &z, &ones).unwrap()), 0.0);
        let sum = (0..3).fold(CMat::zeros(8, 8), |acc, j| acc + theta_component(&cfg, &z, j).unwrap());
        assert!(frob(&sum) < 1e-14);
    }

    #[test]
    fn scaling_and_translation() {
        let cfg = su2(3, 3);
        let base = vec![c64(0.1, 0.2), c64(1.3, -0.4), c64(-0.7, 0.9)];
        let z = ConfigPoint::new(base.clone()).unwrap();
        let lam = c64(0.3, 1.7);
        let scaled = ConfigPoint::new(base.iter().map(|w| w * lam).collect()).unwrap();
        let shifted = ConfigPoint::new(base.iter().map(|w| w + c64(5.0, -2.0)).collect()).unwrap();
        for j in 0..3 {
            let t = theta_component(&cfg, &z, j).unwrap();
            let ts = theta_component(&cfg, &scaled, j).unwrap();
            assert!(frob(&(&ts * lam - &t)) < 1e-13);
            let tt = theta_component(&cfg, &shifted, j).unwrap();
            assert!(frob(&(tt - &t)) < 1e-13);
        }
    }

    #[test]
    fn coincident_punctures_rejected() {
        let err = ConfigPoint::new(vec![c64(1.0, 0.0), c64(2.0, 0.0), c64(1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::CoincidentPunctures { p: 0, q: 2, .. }));
    }

    #[test]
    fn flatness_two_points_trivial() {
        let cfg = su2(2, 2);
        let r = flatness_residual(&cfg, &ConfigPoint::standard(2), None).unwrap();
        assert_eq!(r.max_analytic(), 0.0);
    }

    #[test]
    fn flatness_three_points() {
        let cfg = su2(3, 2);
        let z = ConfigPoint::new(vec![c64(0.3, -0.1), c64(1.2, 0.8), c64(-0.6, 0.5)]).unwrap();
        let r = flatness_residual(&cfg, &z, None).unwrap();
        assert!(r.max_analytic() <= 1e-12);
        assert!(r.max_finite_difference() <= 1e-6);
        let (lo, hi) = r.richardson_ratio_range().unwrap();
        assert!(lo > 3.9 && hi < 4.1, "{lo} {hi}");
    }

    #[test]
    fn flatness_rejects_large_step() {
        let cfg = su2(3, 2);
        let z = ConfigPoint::standard(3);
        assert!(matches!(flatness_residual(&cfg, &z, Some(0.5)), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn gauss_residues() {
        let cfg = su2(3, 2);
        let z = ConfigPoint::new(vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(0.3, 0.8)]).unwrap();
        let r = gauss_residue_check(&cfg, &z, 0, 1, 0.2, 256).unwrap();
        assert!(r <= 1e-10, "{r}");
        let r_half = gauss_residue_check(&cfg, &z, 0, 1, 0.1, 256).unwrap();
        let r_dbl = gauss_residue_check(&cfg, &z, 0, 1, 0.2, 512).unwrap();
        assert!(r_half <= 1e-10 && r_dbl <= 1e-10);

        // no enclosed pole
        let empty = contour_integral(&cfg, &z, 0, c64(3.0, 3.0), 0.5, 128).unwrap();
        assert!(frob(&empty) < 1e-13);
        // all poles enclosed: sum of residues
        let big = contour_integral(&cfg, &z, 0, c64(0.4, 0.3), 5.0, 256).unwrap();
        let expect = (cfg.omega(0, 1) + cfg.omega(0, 2)) * c64(1.0, 0.0);
        assert!(frob(&(big - expect)) < 1e-12);
    }

    #[test]
    fn gauss_pole_and_overlap_errors() {
        let cfg = su2(3, 2);
        let z = ConfigPoint::standard(3);
        assert!(matches!(gauss_connection(&cfg, &z, 0, c64(2.0, 0.0)), Err(Error::PoleHit { p: 1, .. })));
        assert!(matches!(gauss_residue_check(&cfg, &z, 0, 1, 1.5, 64), Err(Error::ContourOverlap { .. })));
    }
}
