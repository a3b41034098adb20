//! Classical Poisson geometry of the based loop group `ΩSU(N)` on sampled,
//! effectively band-limited loops.
//!
//! Loops are generated as `γ(θ) = exp(X(θ))·exp(θΛ)` with a finite Fourier
//! polynomial `X`, `X(0) = 0`, and a closing winding generator `Λ`
//! (`exp(2πΛ) = I`). Derivatives are exact, from block-triangular matrix
//! exponentials, so the only error is the trapezoid rule, which is
//! spectrally accurate on periodic integrands.
//!
//! With `A_R = γ'γ⁻¹`, `A = γ⁻¹γ'` and `mean(f) = (1/M) Σ_j f(θ_j)`:
//!
//! ```text
//! J_n^a = mean(e^{inθ} ⟨T_a, A_R⟩)
//! E     = mean(⟨A_R, A_R⟩)
//! l_n   = ½ mean(e^{inθ} ⟨A_R, A_R⟩)
//! ω(u, v) = mean(⟨u, v'⟩)
//! ```
//!
//! Tangent vectors are handled in pulled-back form `u = γ⁻¹ξ`. Hamiltonian
//! fields satisfy `ω(X_f, ·) = -df`, and `{f, g} = ω(X_f, X_g) = dg(X_f)`.
//!
//! With these conventions the bracket relations hold in the normalized
//! forms recorded by the frozen constants below:
//!
//! ```text
//! {J_n^a, J_m^b} = Σ_c f^{ab}_c J_{n+m}^c + s·i·m·⟨T_a,T_b⟩ δ_{n,-m}   (s = CENTRAL_SIGN)
//! {E, J_n^a}     = ENERGY_BRACKET_SCALE · (-in) J_n^a
//! {l_n, l_m}     = VIRASORO_BRACKET_SCALE · (n - m) l_{n+m}
//! l_n            = SUGAWARA_CONSTANT · Σ_{a,m} J_{n-m}^a J_m^a
//! ω              = TRANSGRESSION_ALPHA · τσ - dβ
//! ```

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use crate::lie_core::{pairing, structure_constants, LieBasis, StructureConstants};
use crate::linalg::{commutator, eigenvalues, expm, frob, identity, CMat, C64, I};
use crate::{Error, Result};

/// Sign `s` of the central term, fixed once for every check.
pub const CENTRAL_SIGN: f64 = 1.0;
/// Factor relating `{E, J_n^a}` to `-in J_n^a`.
pub const ENERGY_BRACKET_SCALE: C64 = C64::new(-2.0, 0.0);
/// Factor relating `{l_n, l_m}` to `(n - m) l_{n+m}`.
pub const VIRASORO_BRACKET_SCALE: C64 = C64::new(0.0, -1.0);
/// Constant in `l_n = c Σ J J`.
pub const SUGAWARA_CONSTANT: f64 = 1.0;
/// Coefficient of `τσ` in `ω = α τσ - dβ`.
pub const TRANSGRESSION_ALPHA: f64 = 0.5;

/// Default quadrature grid.
pub const DEFAULT_GRID: usize = 256;
/// Relative Fourier magnitude below which a mode counts as absent.
pub const BANDWIDTH_THRESHOLD: f64 = 1e-13;

/// One Fourier term `c·(cos mθ - 1) + s·sin mθ` of the generating data.
#[derive(Debug, Clone)]
pub struct FourierMode {
    pub m: u32,
    pub cos: CMat,
    pub sin: CMat,
}

#[derive(Debug, Clone, Default)]
pub struct LoopData {
    pub modes: Vec<FourierMode>,
    /// Winding generator `Λ`; `None` means `Λ = 0`.
    pub winding: Option<CMat>,
}

fn check_in_algebra(x: &CMat, what: &str) -> Result<()> {
    let herm = frob(&(x + x.adjoint()));
    let tr = x.trace().norm();
    if herm > 1e-12 * (1.0 + frob(x)) || tr > 1e-12 * (1.0 + frob(x)) {
        return Err(Error::NotInAlgebra(format!(
            "{what}: |X + X^*| = {herm:e}, |tr X| = {tr:e}"
        )));
    }
    Ok(())
}

/// `(e^X, d e^X, d² e^X)` for a curve `X(θ)` with derivatives `dx`, `ddx` at a point.
pub fn exp_with_derivatives(x: &CMat, dx: &CMat, ddx: &CMat) -> (CMat, CMat, CMat) {
    let n = x.nrows();
    let mut big = CMat::zeros(3 * n, 3 * n);
    for b in 0..3 {
        big.view_mut((b * n, b * n), (n, n)).copy_from(x);
    }
    big.view_mut((0, n), (n, n)).copy_from(dx);
    big.view_mut((n, 2 * n), (n, n)).copy_from(dx);
    big.view_mut((0, 2 * n), (n, n)).copy_from(&(ddx * C64::new(0.5, 0.0)));
    let e = expm(&big);
    let e0 = e.view((0, 0), (n, n)).into_owned();
    let e1 = e.view((0, n), (n, n)).into_owned();
    let e2 = e.view((0, 2 * n), (n, n)).into_owned() * C64::new(2.0, 0.0);
    (e0, e1, e2)
}

/// Sampled loop with first and second derivatives.
#[derive(Debug, Clone)]
pub struct LoopSample {
    basis: LieBasis,
    theta: Vec<f64>,
    gamma: Vec<CMat>,
    dgamma: Vec<CMat>,
    ddgamma: Vec<CMat>,
    /// `γ'γ⁻¹`
    a_right: Vec<CMat>,
    /// `γ⁻¹γ'`
    a_left: Vec<CMat>,
    /// `(γ⁻¹γ')'`
    da_left: Vec<CMat>,
    bandwidth: usize,
}

fn grid(m: usize) -> Vec<f64> {
    (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect()
}

fn mean(values: impl Iterator<Item = C64>, m: usize) -> C64 {
    values.sum::<C64>() / m as f64
}

impl LoopSample {
    /// Builds a sample from values of `γ, γ', γ''` on the uniform grid.
    pub fn from_samples(basis: &LieBasis, gamma: Vec<CMat>, dgamma: Vec<CMat>, ddgamma: Vec<CMat>) -> Result<Self> {
        let m = gamma.len();
        if dgamma.len() != m || ddgamma.len() != m {
            return Err(Error::GridMismatch(m, dgamma.len().min(ddgamma.len())));
        }
        if m < 8 {
            return Err(Error::GridTooSmall { got: m, bandwidth: 0, required: 8 });
        }
        let mut a_right = Vec::with_capacity(m);
        let mut a_left = Vec::with_capacity(m);
        let mut da_left = Vec::with_capacity(m);
        for j in 0..m {
            // unitary: γ⁻¹ = γ*
            let inv = gamma[j].adjoint();
            let al = &inv * &dgamma[j];
            a_right.push(&dgamma[j] * &inv);
            da_left.push(&inv * &ddgamma[j] - &al * &al);
            a_left.push(al);
        }
        let mut out = LoopSample {
            basis: basis.clone(),
            theta: grid(m),
            gamma,
            dgamma,
            ddgamma,
            a_right,
            a_left,
            da_left,
            bandwidth: 0,
        };
        out.bandwidth = out.measure_bandwidth();
        Ok(out)
    }

    fn measure_bandwidth(&self) -> usize {
        let m = self.len();
        let spectra: Vec<Vec<C64>> = (0..self.basis.dim())
            .map(|a| {
                let t = self.basis.generator(a);
                fft_forward(self.a_right.iter().map(|x| pairing(t, x)).collect())
            })
            .collect();
        let peak = spectra.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0;
        }
        let mut band = 0;
        for k in 0..=m / 2 {
            let mag = spectra
                .iter()
                .map(|s| s[k].norm().max(s[(m - k) % m].norm()))
                .fold(0.0, f64::max);
            if mag > BANDWIDTH_THRESHOLD * peak {
                band = k;
            }
        }
        band
    }

    pub fn basis(&self) -> &LieBasis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn gamma(&self) -> &[CMat] {
        &self.gamma
    }

    pub fn dgamma(&self) -> &[CMat] {
        &self.dgamma
    }

    pub fn ddgamma(&self) -> &[CMat] {
        &self.ddgamma
    }

    /// `γ'γ⁻¹` on the grid.
    pub fn a_right(&self) -> &[CMat] {
        &self.a_right
    }

    /// `γ⁻¹γ'` on the grid.
    pub fn a_left(&self) -> &[CMat] {
        &self.a_left
    }

    /// Largest Fourier mode present in `γ'γ⁻¹` (relative threshold 1e-13).
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Grid size needed for the current bandwidth.
    pub fn required_grid(&self) -> usize {
        8 * self.bandwidth + 8
    }

    pub fn check_resolved(&self) -> Result<()> {
        if self.len() < self.required_grid() {
            return Err(Error::GridTooSmall { got: self.len(), bandwidth: self.bandwidth, required: self.required_grid() });
        }
        Ok(())
    }

    /// Largest mode index accepted by observables and tables.
    pub fn mode_limit(&self) -> i64 {
        ((self.len() / 8).max(2 * self.bandwidth)).min(self.len() / 2 - 1) as i64
    }

    /// Unitarity, determinant and closure diagnostics:
    /// `(max ‖γγ* - I‖, max |det γ - 1|, ‖γ(0) - I‖)`.
    pub fn group_residuals(&self) -> (f64, f64, f64) {
        let n = self.basis.rank();
        let id = identity(n);
        let unit = self.gamma.iter().map(|g| frob(&(g * g.adjoint() - &id))).fold(0.0, f64::max);
        let det = self.gamma.iter().map(|g| (g.determinant() - C64::new(1.0, 0.0)).norm()).fold(0.0, f64::max);
        (unit, det, frob(&(&self.gamma[0] - &id)))
    }
}

fn fft_forward(mut buf: Vec<C64>) -> Vec<C64> {
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

fn fft_inverse(mut buf: Vec<C64>) -> Vec<C64> {
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(buf.len()).process(&mut buf);
    buf
}

/// Samples `γ(θ) = exp(X(θ))·exp(θΛ)` on `m` uniform points.
pub fn make_loop(basis: &LieBasis, data: &LoopData, m: usize) -> Result<LoopSample> {
    let n = basis.rank();
    for (k, mode) in data.modes.iter().enumerate() {
        if mode.m == 0 {
            return Err(Error::Config(format!("mode {k} has frequency 0")));
        }
        if mode.cos.shape() != (n, n) || mode.sin.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, got: mode.cos.nrows() });
        }
        check_in_algebra(&mode.cos, "cosine coefficient")?;
        check_in_algebra(&mode.sin, "sine coefficient")?;
    }
    let lambda = data.winding.clone().unwrap_or_else(|| CMat::zeros(n, n));
    if lambda.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, got: lambda.nrows() });
    }
    check_in_algebra(&lambda, "winding generator")?;
    let full_turn = expm(&(&lambda * C64::new(2.0 * PI, 0.0)));
    if frob(&(&full_turn - identity(n))) > 1e-10 {
        let worst = eigenvalues(&full_turn)
            .into_iter()
            .max_by(|a, b| (a - 1.0).norm().total_cmp(&(b - 1.0).norm()))
            .unwrap_or(C64::new(1.0, 0.0));
        return Err(Error::NonClosingLoop { eigenvalue: format!("{:.6}{:+.6}i", worst.re, worst.im) });
    }

    let lambda2 = &lambda * &lambda;
    let mut gamma = Vec::with_capacity(m);
    let mut dgamma = Vec::with_capacity(m);
    let mut ddgamma = Vec::with_capacity(m);
    for theta in grid(m) {
        let mut x = CMat::zeros(n, n);
        let mut dx = CMat::zeros(n, n);
        let mut ddx = CMat::zeros(n, n);
        for mode in &data.modes {
            let f = mode.m as f64;
            let (s, c) = (f * theta).sin_cos();
            x += &mode.cos * C64::new(c - 1.0, 0.0) + &mode.sin * C64::new(s, 0.0);
            dx += &mode.cos * C64::new(-f * s, 0.0) + &mode.sin * C64::new(f * c, 0.0);
            ddx += &mode.cos * C64::new(-f * f * c, 0.0) + &mode.sin * C64::new(-f * f * s, 0.0);
        }
        let (e, de, dde) = exp_with_derivatives(&x, &dx, &ddx);
        let w = expm(&(&lambda * C64::new(theta, 0.0)));
        gamma.push(&e * &w);
        dgamma.push((&de + &e * &lambda) * &w);
        ddgamma.push((&dde + &de * &lambda * C64::new(2.0, 0.0) + &e * &lambda2) * &w);
    }
    LoopSample::from_samples(basis, gamma, dgamma, ddgamma)
}

/// Seeded random generating data: modes `1..=max_mode` with coefficients of
/// Frobenius size about `amplitude`, and (if `winding`) `Λ = 2·T_last`
/// scaled to a closing Cartan element.
pub fn random_loop_data(basis: &LieBasis, seed: u64, max_mode: u32, amplitude: f64, winding: bool) -> LoopData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = basis.dim();
    let random_element = |rng: &mut ChaCha8Rng| {
        let coords: Vec<C64> = (0..d).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)).collect();
        let x = basis.from_coordinates(&coords);
        let norm = frob(&x).max(1e-300);
        x * C64::new(amplitude / norm, 0.0)
    };
    let modes = (1..=max_mode)
        .map(|m| FourierMode { m, cos: random_element(&mut rng), sin: random_element(&mut rng) })
        .collect();
    let winding = winding.then(|| unit_winding(basis.rank()));
    LoopData { modes, winding }
}

/// `Λ = i·diag(1, -1, 0, …, 0)`; `exp(2πΛ) = I`.
pub fn unit_winding(rank: usize) -> CMat {
    let mut l = CMat::zeros(rank, rank);
    l[(0, 0)] = I;
    l[(1, 1)] = -I;
    l
}

/// Fourier data of the currents.
#[derive(Debug, Clone)]
pub struct CurrentTable {
    /// Modes `-nmax..=nmax`.
    pub nmax: i64,
    /// `j[n + nmax][a]`
    pub j: Vec<Vec<C64>>,
    pub energy: f64,
    /// `l[n + nmax]`
    pub l: Vec<C64>,
}

impl CurrentTable {
    pub fn current(&self, n: i64, a: usize) -> Result<C64> {
        self.check(n)?;
        Ok(self.j[(n + self.nmax) as usize][a])
    }

    pub fn virasoro(&self, n: i64) -> Result<C64> {
        self.check(n)?;
        Ok(self.l[(n + self.nmax) as usize])
    }

    fn check(&self, n: i64) -> Result<()> {
        if n.abs() > self.nmax {
            return Err(Error::ModeOutOfRange { n, max: self.nmax });
        }
        Ok(())
    }
}

fn fourier_coefficients(samples: Vec<C64>, nmax: i64) -> Vec<C64> {
    let m = samples.len() as i64;
    let spec = fft_inverse(samples);
    (-nmax..=nmax).map(|n| spec[n.rem_euclid(m) as usize] / m as f64).collect()
}

/// `J_n^a`, `E` and `l_n` by trapezoid quadrature.
pub fn currents(lp: &LoopSample) -> Result<CurrentTable> {
    lp.check_resolved()?;
    let nmax = lp.mode_limit();
    let basis = lp.basis();
    let per_generator: Vec<Vec<C64>> = (0..basis.dim())
        .map(|a| {
            let t = basis.generator(a);
            fourier_coefficients(lp.a_right.iter().map(|x| pairing(t, x)).collect(), nmax)
        })
        .collect();
    let j = (0..(2 * nmax + 1) as usize)
        .map(|k| per_generator.iter().map(|col| col[k]).collect())
        .collect();
    let density: Vec<C64> = lp.a_right.iter().map(|x| pairing(x, x)).collect();
    let energy = mean(density.iter().copied(), lp.len()).re;
    let l = fourier_coefficients(density, nmax).into_iter().map(|z| z * 0.5).collect();
    Ok(CurrentTable { nmax, j, energy, l })
}

/// Pulled-back tangent vector `u = γ⁻¹ξ` with its derivative `u'`.
#[derive(Debug, Clone)]
pub struct TangentLoop {
    pub u: Vec<CMat>,
    pub du: Vec<CMat>,
}

impl TangentLoop {
    pub fn new(u: Vec<CMat>, du: Vec<CMat>) -> Result<Self> {
        if u.len() != du.len() {
            return Err(Error::GridMismatch(u.len(), du.len()));
        }
        Ok(TangentLoop { u, du })
    }

    /// Samples `θ ↦ (u(θ), u'(θ))` on the uniform `m`-point grid.
    pub fn from_fn(m: usize, f: impl Fn(f64) -> (CMat, CMat)) -> Self {
        let (u, du) = grid(m).into_iter().map(f).unzip();
        TangentLoop { u, du }
    }

    /// `u(θ) = Σ c_k (cos kθ - 1) + s_k sin kθ`, vanishing at `θ = 0`.
    pub fn trigonometric(m: usize, terms: &[FourierMode]) -> Self {
        let dim = terms.first().map_or(1, |t| t.cos.nrows());
        Self::from_fn(m, |theta| {
            let mut u = CMat::zeros(dim, dim);
            let mut du = CMat::zeros(dim, dim);
            for t in terms {
                let f = t.m as f64;
                let (s, c) = (f * theta).sin_cos();
                u += &t.cos * C64::new(c - 1.0, 0.0) + &t.sin * C64::new(s, 0.0);
                du += &t.cos * C64::new(-f * s, 0.0) + &t.sin * C64::new(f * c, 0.0);
            }
            (u, du)
        })
    }

    /// Derivative by spectral differentiation of the samples (Nyquist mode dropped).
    pub fn spectral(u: Vec<CMat>) -> Self {
        let m = u.len();
        let (r, c) = u.first().map_or((0, 0), |x| x.shape());
        let mut du = vec![CMat::zeros(r, c); m];
        for i in 0..r {
            for k in 0..c {
                let mut spec = fft_forward(u.iter().map(|x| x[(i, k)]).collect());
                for (idx, z) in spec.iter_mut().enumerate() {
                    let freq = if idx < m / 2 { idx as f64 } else if idx == m / 2 && m.is_multiple_of(2) { 0.0 } else { idx as f64 - m as f64 };
                    *z *= I * freq / m as f64;
                }
                for (j, z) in fft_inverse(spec).into_iter().enumerate() {
                    du[j][(i, k)] = z;
                }
            }
        }
        TangentLoop { u, du }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// `‖u(0)‖`, zero for tangents to based loops.
    pub fn base_value(&self) -> f64 {
        self.u.first().map_or(0.0, frob)
    }
}

/// `ω(u, v) = mean⟨u, v'⟩`.
pub fn symplectic_form(lp: &LoopSample, u: &TangentLoop, v: &TangentLoop) -> Result<C64> {
    for t in [u, v] {
        if t.len() != lp.len() {
            return Err(Error::GridMismatch(lp.len(), t.len()));
        }
    }
    Ok(mean(u.u.iter().zip(&v.du).map(|(a, b)| pairing(a, b)), lp.len()))
}

/// Observables with explicit Hamiltonian fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Current { n: i64, a: usize },
    Virasoro { n: i64 },
    Energy,
}

impl Observable {
    pub fn value(&self, table: &CurrentTable) -> Result<C64> {
        match *self {
            Observable::Current { n, a } => table.current(n, a),
            Observable::Virasoro { n } => table.virasoro(n),
            Observable::Energy => Ok(C64::new(table.energy, 0.0)),
        }
    }
}

fn phase(n: i64, theta: f64) -> C64 {
    C64::from_polar(1.0, n as f64 * theta)
}

/// Pulled-back Hamiltonian field:
/// `X_{J_n^a}`: `u = -e^{inθ} γ⁻¹T_aγ`;
/// `X_{l_n}`: `u = -e^{inθ} γ⁻¹γ'`;
/// `X_E = 2 X_{l_0}`.
pub fn hamiltonian_field(lp: &LoopSample, obs: Observable) -> Result<TangentLoop> {
    let limit = lp.mode_limit();
    let m = lp.len();
    let mut u = Vec::with_capacity(m);
    let mut du = Vec::with_capacity(m);
    match obs {
        Observable::Current { n, a } => {
            if n.abs() > limit {
                return Err(Error::ModeOutOfRange { n, max: limit });
            }
            if a >= lp.basis.dim() {
                return Err(Error::Config(format!("generator index {a} out of range")));
            }
            let t = lp.basis.generator(a);
            for j in 0..m {
                let g = &lp.gamma[j];
                let b = g.adjoint() * t * g;
                let db = commutator(&b, &lp.a_left[j]);
                let p = phase(n, lp.theta[j]);
                du.push(-(&b * (I * n as f64) + db) * p);
                u.push(-b * p);
            }
        }
        Observable::Virasoro { .. } | Observable::Energy => {
            let (n, scale) = match obs {
                Observable::Virasoro { n } => (n, 1.0),
                _ => (0, 2.0),
            };
            if n.abs() > limit {
                return Err(Error::ModeOutOfRange { n, max: limit });
            }
            for j in 0..m {
                let a = &lp.a_left[j];
                let p = phase(n, lp.theta[j]) * scale;
                du.push(-(a * (I * n as f64) + &lp.da_left[j]) * p);
                u.push(-a * p);
            }
        }
    }
    Ok(TangentLoop { u, du })
}

/// `{f, g} = ω(X_f, X_g)`.
pub fn poisson_bracket(lp: &LoopSample, f: Observable, g: Observable) -> Result<C64> {
    lp.check_resolved()?;
    let xf = hamiltonian_field(lp, f)?;
    let xg = hamiltonian_field(lp, g)?;
    symplectic_form(lp, &xf, &xg)
}

/// Context shared by the bracket checks on one loop.
pub struct BracketContext<'a> {
    pub lp: &'a LoopSample,
    pub table: CurrentTable,
    pub f: StructureConstants,
}

impl<'a> BracketContext<'a> {
    pub fn new(lp: &'a LoopSample) -> Result<Self> {
        Ok(BracketContext { lp, table: currents(lp)?, f: structure_constants(lp.basis()) })
    }

    /// Right-hand side `Σ_c f^{ab}_c J_{n+m}^c + s·i·m·⟨T_a,T_b⟩ δ_{n,-m}`.
    pub fn kacmoody_rhs(&self, n: i64, m: i64, a: usize, b: usize, sign: f64) -> Result<C64> {
        let mut rhs = C64::new(0.0, 0.0);
        for c in 0..self.f.dim() {
            let coeff = self.f.get(a, b, c);
            if coeff != 0.0 {
                rhs += self.table.current(n + m, c)? * coeff;
            }
        }
        if n == -m && a == b {
            rhs += I * (sign * m as f64 * self.lp.basis().generator_norm());
        }
        Ok(rhs)
    }

    pub fn kacmoody_check(&self, n: i64, m: i64, a: usize, b: usize) -> Result<f64> {
        let lhs = poisson_bracket(self.lp, Observable::Current { n, a }, Observable::Current { n: m, a: b })?;
        Ok((lhs - self.kacmoody_rhs(n, m, a, b, CENTRAL_SIGN)?).norm())
    }

    /// Residual against `scale · (-in) J_n^a`.
    pub fn energy_check(&self, n: i64, a: usize, scale: C64) -> Result<f64> {
        let lhs = poisson_bracket(self.lp, Observable::Energy, Observable::Current { n, a })?;
        Ok((lhs - scale * (-I * n as f64) * self.table.current(n, a)?).norm())
    }

    /// Residual against `scale · (n - m) l_{n+m}`.
    pub fn virasoro_check(&self, n: i64, m: i64, scale: C64) -> Result<f64> {
        let lhs = poisson_bracket(self.lp, Observable::Virasoro { n }, Observable::Virasoro { n: m })?;
        Ok((lhs - scale * (n - m) as f64 * self.table.virasoro(n + m)?).norm())
    }

    /// `Σ_{a,m} J_{n-m}^a J_m^a` over the tabulated range.
    pub fn sugawara_sum(&self, n: i64) -> Result<C64> {
        let t = &self.table;
        self.table.check(n)?;
        let mut acc = C64::new(0.0, 0.0);
        for m in -t.nmax..=t.nmax {
            if (n - m).abs() > t.nmax {
                continue;
            }
            for a in 0..self.f.dim() {
                acc += t.current(n - m, a)? * t.current(m, a)?;
            }
        }
        Ok(acc)
    }

    /// `|l_n - c Σ J J|`.
    pub fn sugawara_check(&self, n: i64, constant: f64) -> Result<f64> {
        Ok((self.table.virasoro(n)? - self.sugawara_sum(n)? * constant).norm())
    }
}

pub fn kacmoody_check(lp: &LoopSample, n: i64, m: i64, a: usize, b: usize) -> Result<f64> {
    BracketContext::new(lp)?.kacmoody_check(n, m, a, b)
}

pub fn sugawara_check(lp: &LoopSample, n: i64) -> Result<f64> {
    BracketContext::new(lp)?.sugawara_check(n, SUGAWARA_CONSTANT)
}

/// The three quadratures of the transgression identity and its residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransgressionValues {
    pub omega: C64,
    /// `mean⟨A, [u, v]⟩`
    pub tau_sigma: C64,
    /// `½ mean(⟨u', v⟩ - ⟨v', u⟩ + ⟨A, [u, v]⟩)`
    pub d_beta: C64,
    /// `(ω + dβ)/τσ`, `None` when `τσ` vanishes.
    pub best_alpha: Option<C64>,
    /// `|ω - (τσ - dβ)|`
    pub residual_unit_alpha: f64,
    /// `|ω - (α τσ - dβ)|` at `α = TRANSGRESSION_ALPHA`.
    pub residual_frozen_alpha: f64,
}

impl TransgressionValues {
    pub fn residual(&self, alpha: f64) -> f64 {
        (self.omega - (self.tau_sigma * alpha - self.d_beta)).norm()
    }
}

pub fn prop1_check(lp: &LoopSample, u: &TangentLoop, v: &TangentLoop) -> Result<TransgressionValues> {
    let omega = symplectic_form(lp, u, v)?;
    let m = lp.len();
    let mut tau = C64::new(0.0, 0.0);
    let mut beta = C64::new(0.0, 0.0);
    for j in 0..m {
        let bracket = pairing(&lp.a_left[j], &commutator(&u.u[j], &v.u[j]));
        tau += bracket;
        beta += pairing(&u.du[j], &v.u[j]) - pairing(&v.du[j], &u.u[j]) + bracket;
    }
    let tau_sigma = tau / m as f64;
    let d_beta = beta / (2.0 * m as f64);
    let scale = 1.0 + omega.norm() + d_beta.norm();
    let best_alpha = (tau_sigma.norm() > 1e-12 * scale).then(|| (omega + d_beta) / tau_sigma);
    let mut out = TransgressionValues {
        omega,
        tau_sigma,
        d_beta,
        best_alpha,
        residual_unit_alpha: 0.0,
        residual_frozen_alpha: 0.0,
    };
    out.residual_unit_alpha = out.residual(1.0);
    out.residual_frozen_alpha = out.residual(TRANSGRESSION_ALPHA);
    Ok(out)
}

/// `β(v) = ½ mean⟨γ⁻¹γ', v⟩`.
pub fn beta_form(lp: &LoopSample, v: &[CMat]) -> C64 {
    mean(lp.a_left.iter().zip(v).map(|(a, x)| pairing(a, x)), lp.len()) * 0.5
}

/// Loop `exp(t·c(θ)·T)·γ` for a scalar profile `c` with derivatives
/// `(c, c', c'')` on the grid.
fn scalar_flow(lp: &LoopSample, t: f64, generator: &CMat, profile: &[(f64, f64, f64)]) -> Result<LoopSample> {
    let mut gamma = Vec::with_capacity(lp.len());
    let mut dgamma = Vec::with_capacity(lp.len());
    let mut ddgamma = Vec::with_capacity(lp.len());
    for (j, &(c, dc, ddc)) in profile.iter().enumerate() {
        let p = expm(&(generator * C64::new(t * c, 0.0)));
        let dp = generator * C64::new(t * dc, 0.0) * &p;
        let ddp = (generator * generator * C64::new((t * dc).powi(2), 0.0) + generator * C64::new(t * ddc, 0.0)) * &p;
        gamma.push(&p * &lp.gamma[j]);
        dgamma.push(&dp * &lp.gamma[j] + &p * &lp.dgamma[j]);
        ddgamma.push(&ddp * &lp.gamma[j] + &dp * &lp.dgamma[j] * C64::new(2.0, 0.0) + &p * &lp.ddgamma[j]);
    }
    LoopSample::from_samples(lp.basis(), gamma, dgamma, ddgamma)
}

/// Step used by the fourth-order difference quotients of [`jacobi_residual`].
pub const JACOBI_FD_STEP: f64 = 1e-3;

/// `{J_n^a, G}` for `G = {J_m^b, J_p^c}` computed as `dG(X_{J_n^a})`: the
/// field is `-e^{inθ}T_a γ`, split into the real flows
/// `exp(-t cos(nθ) T_a)γ` and `exp(-t sin(nθ) T_a)γ`.
fn outer_bracket(lp: &LoopSample, n: i64, a: usize, inner: (Observable, Observable)) -> Result<C64> {
    let h = JACOBI_FD_STEP;
    let t_a = lp.basis().generator(a).clone();
    let nf = n as f64;
    let cos_profile: Vec<(f64, f64, f64)> = lp
        .theta()
        .iter()
        .map(|&th| (-(nf * th).cos(), nf * (nf * th).sin(), nf * nf * (nf * th).cos()))
        .collect();
    let sin_profile: Vec<(f64, f64, f64)> = lp
        .theta()
        .iter()
        .map(|&th| (-(nf * th).sin(), -nf * (nf * th).cos(), nf * nf * (nf * th).sin()))
        .collect();
    let g_at = |profile: &[(f64, f64, f64)], t: f64| -> Result<C64> {
        let moved = scalar_flow(lp, t, &t_a, profile)?;
        let xf = hamiltonian_field(&moved, inner.0)?;
        let xg = hamiltonian_field(&moved, inner.1)?;
        symplectic_form(&moved, &xf, &xg)
    };
    let derivative = |profile: &[(f64, f64, f64)]| -> Result<C64> {
        let g2 = g_at(profile, 2.0 * h)?;
        let g1 = g_at(profile, h)?;
        let gm1 = g_at(profile, -h)?;
        let gm2 = g_at(profile, -2.0 * h)?;
        Ok((-g2 + g1 * 8.0 - gm1 * 8.0 + gm2) / (12.0 * h))
    };
    Ok(derivative(&cos_profile)? + I * derivative(&sin_profile)?)
}

/// `|{J_n^a,{J_m^b,J_p^c}} + {J_m^b,{J_p^c,J_n^a}} + {J_p^c,{J_n^a,J_m^b}}|`
/// with the inner brackets from the symplectic form and the outer ones by
/// differentiating along the Hamiltonian flows.
pub fn jacobi_residual(lp: &LoopSample, triple: [(i64, usize); 3]) -> Result<f64> {
    lp.check_resolved()?;
    let obs = |k: usize| Observable::Current { n: triple[k].0, a: triple[k].1 };
    let mut total = C64::new(0.0, 0.0);
    for k in 0..3 {
        let (i, j, l) = (k, (k + 1) % 3, (k + 2) % 3);
        total += outer_bracket(lp, triple[i].0, triple[i].1, (obs(j), obs(l)))?;
    }
    Ok(total.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::build_su_basis;

    fn su2() -> LieBasis {
        build_su_basis(2).unwrap()
    }

    fn random(seed: u64) -> LoopSample {
        let b = su2();
        make_loop(&b, &random_loop_data(&b, seed, 2, 0.4, seed % 2 == 1), DEFAULT_GRID).unwrap()
    }

    #[test]
    fn constant_loop() {
        let b = su2();
        let lp = make_loop(&b, &LoopData::default(), 64).unwrap();
        assert_eq!(lp.bandwidth(), 0);
        let t = currents(&lp).unwrap();
        assert!(t.j.iter().flatten().all(|z| z.norm() == 0.0));
        assert_eq!(t.energy, 0.0);
        assert!(t.l.iter().all(|z| z.norm() == 0.0));
        // pure central term
        let ctx = BracketContext::new(&lp).unwrap();
        let pb = poisson_bracket(&lp, Observable::Current { n: 2, a: 1 }, Observable::Current { n: -2, a: 1 }).unwrap();
        assert!((pb - I * (-2.0 * 0.5)).norm() < 1e-14, "{pb}");
        assert!(ctx.kacmoody_check(2, -2, 1, 1).unwrap() < 1e-14);
    }

    #[test]
    fn winding_loop_closed_form() {
        let b = su2();
        let lambda = unit_winding(2);
        let lp = make_loop(&b, &LoopData { modes: vec![], winding: Some(lambda.clone()) }, 64).unwrap();
        for (x, th) in lp.gamma().iter().zip(lp.theta()) {
            let exact = expm(&(&lambda * C64::new(*th, 0.0)));
            assert!(frob(&(x - exact)) < 1e-13);
        }
        assert!(lp.a_right().iter().all(|a| frob(&(a - &lambda)) < 1e-13));
        let t = currents(&lp).unwrap();
        for a in 0..3 {
            assert!((t.current(0, a).unwrap() - pairing(b.generator(a), &lambda)).norm() < 1e-13);
            assert!(t.current(1, a).unwrap().norm() < 1e-13);
        }
        assert!((t.energy - pairing(&lambda, &lambda).re).abs() < 1e-13);
    }

    #[test]
    fn non_closing_winding_rejected() {
        let b = su2();
        let data = LoopData { modes: vec![], winding: Some(unit_winding(2) * C64::new(0.5, 0.0)) };
        assert!(matches!(make_loop(&b, &data, 64), Err(Error::NonClosingLoop { .. })));
    }

    #[test]
    fn non_algebra_coefficient_rejected() {
        let b = su2();
        let data = LoopData { modes: vec![FourierMode { m: 1, cos: identity(2), sin: CMat::zeros(2, 2) }], winding: None };
        assert!(matches!(make_loop(&b, &data, 64), Err(Error::NotInAlgebra(_))));
    }

    #[test]
    fn loop_is_based_unitary_closed() {
        let lp = random(3);
        let (unit, det, base) = lp.group_residuals();
        assert!(unit < 1e-12 && det < 1e-12 && base < 1e-14);
        // derivative consistent with spectral differentiation of γ
        let spec = TangentLoop::spectral(lp.gamma().to_vec());
        let dev = spec.du.iter().zip(lp.dgamma()).map(|(a, b)| frob(&(a - b))).fold(0.0, f64::max);
        assert!(dev < 1e-10, "{dev}");
    }

    #[test]
    fn small_grid_refused() {
        let b = su2();
        let lp = make_loop(&b, &random_loop_data(&b, 1, 3, 1.0, true), 32).unwrap();
        assert!(matches!(currents(&lp), Err(Error::GridTooSmall { .. })));
    }

    #[test]
    fn currents_converge_under_refinement() {
        let b = su2();
        let data = random_loop_data(&b, 5, 2, 0.4, true);
        let a = currents(&make_loop(&b, &data, 256).unwrap()).unwrap();
        let c = currents(&make_loop(&b, &data, 512).unwrap()).unwrap();
        for n in -a.nmax..=a.nmax {
            for k in 0..3 {
                assert!((a.current(n, k).unwrap() - c.current(n, k).unwrap()).norm() < 1e-12);
            }
            assert!((a.virasoro(n).unwrap() - c.virasoro(n).unwrap()).norm() < 1e-12);
        }
        assert!((a.energy - c.energy).abs() < 1e-12);
        assert!((a.energy - 2.0 * a.virasoro(0).unwrap().re).abs() < 1e-12);
    }

    #[test]
    fn symplectic_form_antisymmetric() {
        let lp = random(2);
        let b = lp.basis();
        let u = TangentLoop::trigonometric(lp.len(), &[FourierMode { m: 1, cos: b.generator(0).clone(), sin: b.generator(2).clone() }]);
        let v = TangentLoop::trigonometric(lp.len(), &[FourierMode { m: 2, cos: b.generator(1).clone(), sin: b.generator(0).clone() }]);
        assert!(symplectic_form(&lp, &u, &u).unwrap().norm() < 1e-14);
        let uv = symplectic_form(&lp, &u, &v).unwrap();
        let vu = symplectic_form(&lp, &v, &u).unwrap();
        assert!((uv + vu).norm() < 1e-14);
    }

    #[test]
    fn hamiltonian_fields_at_identity() {
        let b = su2();
        let lp = make_loop(&b, &LoopData::default(), 32).unwrap();
        let x = hamiltonian_field(&lp, Observable::Current { n: 0, a: 2 }).unwrap();
        assert!(x.u.iter().all(|u| frob(&(u + b.generator(2))) < 1e-15));
        let lp = random(4);
        let x = hamiltonian_field(&lp, Observable::Virasoro { n: 0 }).unwrap();
        for (u, a) in x.u.iter().zip(lp.a_left()) {
            assert!(frob(&(u + a)) < 1e-15);
        }
    }

    #[test]
    fn field_contracts_to_minus_differential() {
        // ω(X_J, ξ) = -dJ(ξ) along ξ = T_b sin(θ) γ (right-translated)
        let lp = random(6);
        let b = lp.basis().clone();
        let (n, a) = (1, 0);
        let x = hamiltonian_field(&lp, Observable::Current { n, a }).unwrap();
        let profile: Vec<(f64, f64, f64)> = lp.theta().iter().map(|&t| (t.sin(), t.cos(), -t.sin())).collect();
        let gen = b.generator(1).clone();
        let xi_u: Vec<CMat> = lp.gamma().iter().zip(&profile).map(|(g, p)| g.adjoint() * &gen * g * C64::new(p.0, 0.0)).collect();
        let xi = TangentLoop::spectral(xi_u);
        let lhs = symplectic_form(&lp, &x, &xi).unwrap();
        let h = 1e-3;
        let j_at = |t: f64| currents(&scalar_flow(&lp, t, &gen, &profile).unwrap()).unwrap().current(n, a).unwrap();
        let dj = (-j_at(2.0 * h) + j_at(h) * 8.0 - j_at(-h) * 8.0 + j_at(-2.0 * h)) / (12.0 * h);
        assert!((lhs + dj).norm() < 1e-9, "{lhs} vs {dj}");
    }

    #[test]
    fn bracket_relations_on_random_loop() {
        let lp = random(7);
        let ctx = BracketContext::new(&lp).unwrap();
        for n in -2..=2 {
            for m in -2..=2 {
                for a in 0..3 {
                    for b in 0..3 {
                        assert!(ctx.kacmoody_check(n, m, a, b).unwrap() < 1e-8);
                    }
                }
                assert!(ctx.virasoro_check(n, m, VIRASORO_BRACKET_SCALE).unwrap() < 1e-8);
            }
            for a in 0..3 {
                assert!(ctx.energy_check(n, a, ENERGY_BRACKET_SCALE).unwrap() < 1e-8);
            }
            assert!(ctx.sugawara_check(n, SUGAWARA_CONSTANT).unwrap() < 1e-8);
        }
    }

    #[test]
    fn transgression_alpha_is_half() {
        let lp = random(8);
        let b = lp.basis();
        let u = TangentLoop::trigonometric(lp.len(), &[FourierMode { m: 1, cos: b.generator(0).clone(), sin: b.generator(1).clone() }]);
        let v = TangentLoop::trigonometric(lp.len(), &[FourierMode { m: 2, cos: b.generator(2).clone(), sin: b.generator(0).clone() }]);
        let vals = prop1_check(&lp, &u, &v).unwrap();
        assert!(vals.residual_frozen_alpha < 1e-10);
        let alpha = vals.best_alpha.unwrap();
        assert!((alpha - C64::new(0.5, 0.0)).norm() < 1e-8, "{alpha}");
    }

    #[test]
    fn d_beta_matches_exterior_derivative() {
        // dβ(X_u, X_v) = X_u β(X_v) - X_v β(X_u) - β(X_[u,v]) for left-invariant fields γ ↦ γu
        let lp = random(9);
        let b = lp.basis().clone();
        let u = TangentLoop::trigonometric(lp.len(), &[FourierMode { m: 1, cos: b.generator(0).clone(), sin: b.generator(2).clone() }]);
        let v = TangentLoop::trigonometric(lp.len(), &[FourierMode { m: 1, cos: b.generator(1).clone(), sin: b.generator(0).clone() }]);
        let moved = |w: &TangentLoop, t: f64| -> LoopSample {
            let mut g = Vec::new();
            let mut dg = Vec::new();
            for j in 0..lp.len() {
                let (e, de, _) = exp_with_derivatives(&(&w.u[j] * C64::new(t, 0.0)), &(&w.du[j] * C64::new(t, 0.0)), &CMat::zeros(2, 2));
                g.push(&lp.gamma()[j] * &e);
                dg.push(&lp.dgamma()[j] * &e + &lp.gamma()[j] * de);
            }
            let dd = vec![CMat::zeros(2, 2); lp.len()];
            LoopSample::from_samples(&b, g, dg, dd).unwrap()
        };
        let h = 1e-3;
        let deriv = |w: &TangentLoop, target: &TangentLoop| {
            let f = |t: f64| beta_form(&moved(w, t), &target.u);
            (-f(2.0 * h) + f(h) * 8.0 - f(-h) * 8.0 + f(-2.0 * h)) / (12.0 * h)
        };
        let bracket: Vec<CMat> = u.u.iter().zip(&v.u).map(|(x, y)| commutator(x, y)).collect();
        let oracle = deriv(&u, &v) - deriv(&v, &u) - beta_form(&lp, &bracket);
        let vals = prop1_check(&lp, &u, &v).unwrap();
        assert!((vals.d_beta - oracle).norm() < 1e-9, "{} vs {}", vals.d_beta, oracle);
    }

    #[test]
    fn jacobi_identity_numeric() {
        let lp = random(10);
        let r = jacobi_residual(&lp, [(1, 0), (-1, 1), (0, 2)]).unwrap();
        assert!(r < 1e-7, "{r}");
    }
}
