//! Parallel transport of `dψ + Θψ = 0` along strand paths and the monodromy
//! representation of the braid group.
//!
//! The bundle is trivialized over *ordered* configuration space. A braid
//! generator moves strands `i` and `i+1` through a half-turn, which ends at
//! the basepoint with the two positions exchanged; composing the transport
//! with the flip of tensor factors `i, i+1` brings the fiber back to the
//! basepoint identification:
//!
//! ```text
//! ρ(σ_i^{±1}) = Swap_{i,i+1} · ψ(1)
//! ```
//!
//! Words act left to right: for `w = ℓ_1 ℓ_2 … ℓ_m`,
//! `ρ(w) = ρ(ℓ_m) ⋯ ρ(ℓ_1)`.
//!
//! A positive generator is the counterclockwise half-turn.

use std::cell::Cell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::kz_connection::{min_pairwise_distance, theta_along, ConfigPoint, ConnectionCoefficients};
use crate::linalg::{c64, identity, swap_adjacent, CMat, C64, I};
use crate::ode::{integrate, OdeFailure, OdeOptions};
use crate::{Error, Result};

/// Default ODE tolerance for transports.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Signed Artin generator `σ_index^{sign}`, `index` one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BraidLetter {
    pub index: usize,
    pub sign: i8,
}

impl BraidLetter {
    pub fn new(index: usize, sign: i8) -> Self {
        assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
        BraidLetter { index, sign }
    }

    pub fn inverse(self) -> Self {
        BraidLetter { index: self.index, sign: -self.sign }
    }
}

impl fmt::Display for BraidLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign > 0 {
            write!(f, "s{}", self.index)
        } else {
            write!(f, "s{}^-1", self.index)
        }
    }
}

/// A braid word. It is stored exactly as written; no free reduction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BraidWord {
    letters: Vec<BraidLetter>,
}

impl BraidWord {
    pub fn new(letters: Vec<BraidLetter>) -> Self {
        BraidWord { letters }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn letters(&self) -> &[BraidLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Positive minus negative letters.
    pub fn exponent_sum(&self) -> i64 {
        self.letters.iter().map(|l| l.sign as i64).sum()
    }

    pub fn inverse(&self) -> Self {
        BraidWord { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    /// Checks every generator index against `n` strands.
    pub fn validate(&self, n: usize) -> Result<()> {
        for l in &self.letters {
            check_generator(l.index, n)?;
        }
        Ok(())
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.letters.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

fn check_generator(index: usize, n: usize) -> Result<()> {
    if index == 0 || index + 1 > n {
        return Err(Error::GeneratorOutOfRange { index, max: n.saturating_sub(1) });
    }
    Ok(())
}

/// Half-turn of strands `strand` and `strand + 1` (zero-based) about their
/// midpoint, optionally deformed. With `radius_scale = 1` and `wiggle = 0`
/// it is the plain half-circle at constant angular rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeArc {
    pub start: Vec<C64>,
    pub strand: usize,
    pub sign: i8,
    /// Peak radius relative to the starting half-separation.
    pub radius_scale: f64,
    /// Amplitude of a smooth, endpoint-fixed wobble of the angle, the radius
    /// and the spectator strands.
    pub wiggle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    Exchange(ExchangeArc),
    Linear { from: Vec<C64>, to: Vec<C64> },
}

impl Segment {
    fn eval(&self, t: f64) -> (Vec<C64>, Vec<C64>) {
        match self {
            Segment::Linear { from, to } => {
                let pos = from.iter().zip(to).map(|(a, b)| a + (b - a) * t).collect();
                let vel = from.iter().zip(to).map(|(a, b)| b - a).collect();
                (pos, vel)
            }
            Segment::Exchange(arc) => arc.eval(t),
        }
    }

    fn start(&self) -> Vec<C64> {
        self.eval(0.0).0
    }
}

impl ExchangeArc {
    fn eval(&self, t: f64) -> (Vec<C64>, Vec<C64>) {
        let (a, b) = (self.strand, self.strand + 1);
        let mid = (self.start[a] + self.start[b]) * 0.5;
        let half = self.start[a] - mid;
        let s = self.sign as f64;
        let w = self.wiggle;
        let tau = 2.0 * PI * t;

        let phi = s * PI * t + w * tau.sin();
        let dphi = s * PI + 2.0 * PI * w * tau.cos();
        let rho = 1.0 + (self.radius_scale - 1.0) * (PI * t).sin() + 0.5 * w * tau.sin();
        let drho = (self.radius_scale - 1.0) * PI * (PI * t).cos() + PI * w * tau.cos();

        let rot = C64::from_polar(1.0, phi);
        let offset = half * rot * rho;
        let d_offset = half * rot * (c64(drho, 0.0) + I * (rho * dphi));

        let amp = 0.25 * w * (self.start[a] - self.start[b]).norm();
        let mut pos = Vec::with_capacity(self.start.len());
        let mut vel = Vec::with_capacity(self.start.len());
        for (j, &z0) in self.start.iter().enumerate() {
            if j == a {
                pos.push(mid + offset);
                vel.push(d_offset);
            } else if j == b {
                pos.push(mid - offset);
                vel.push(-d_offset);
            } else {
                let dir = if j % 2 == 0 { I } else { -I };
                pos.push(z0 + dir * (amp * tau.sin()));
                vel.push(dir * (amp * 2.0 * PI * tau.cos()));
            }
        }
        (pos, vel)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Piece {
    segment: Segment,
    reversed: bool,
}

impl Piece {
    fn eval(&self, t: f64) -> (Vec<C64>, Vec<C64>) {
        if self.reversed {
            let (pos, vel) = self.segment.eval(1.0 - t);
            (pos, vel.into_iter().map(|v| -v).collect())
        } else {
            self.segment.eval(t)
        }
    }
}

/// Piecewise-smooth path in ordered configuration space; each piece is
/// parametrized by `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrandPath {
    basepoint: ConfigPoint,
    pieces: Vec<Piece>,
}

impl StrandPath {
    /// The zero-length path at `base`.
    pub fn constant(base: ConfigPoint) -> Self {
        StrandPath { basepoint: base, pieces: Vec::new() }
    }

    pub fn from_segment(segment: Segment) -> Result<Self> {
        let base = ConfigPoint::new(segment.start())?;
        Ok(StrandPath { basepoint: base, pieces: vec![Piece { segment, reversed: false }] })
    }

    pub fn basepoint(&self) -> &ConfigPoint {
        &self.basepoint
    }

    pub fn num_pieces(&self) -> usize {
        self.pieces.len()
    }

    pub fn endpoint(&self) -> Vec<C64> {
        match self.pieces.last() {
            Some(p) => p.eval(1.0).0,
            None => self.basepoint.positions().to_vec(),
        }
    }

    /// Positions and velocities at parameter `t` of piece `piece`.
    pub fn eval(&self, piece: usize, t: f64) -> (Vec<C64>, Vec<C64>) {
        self.pieces[piece].eval(t)
    }

    /// The same path traversed backwards.
    pub fn reversed(&self) -> Result<Self> {
        let base = ConfigPoint::new(self.endpoint())?;
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|p| Piece { segment: p.segment.clone(), reversed: !p.reversed })
            .collect();
        Ok(StrandPath { basepoint: base, pieces })
    }

    /// Concatenation: `self` first, then `next`.
    pub fn then(mut self, next: StrandPath) -> Result<Self> {
        let end = self.endpoint();
        let gap: f64 = end
            .iter()
            .zip(next.basepoint.positions())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if gap > 1e-12 || end.len() != next.basepoint.n() {
            return Err(Error::DiscontinuousPath(self.pieces.len(), self.pieces.len() + 1));
        }
        self.pieces.extend(next.pieces);
        Ok(self)
    }

    /// Minimum pairwise strand distance over `samples` points per piece.
    pub fn clearance(&self, samples: usize) -> f64 {
        let mut best = self.basepoint.min_distance();
        for piece in &self.pieces {
            for s in 0..=samples {
                let (pos, _) = piece.eval(s as f64 / samples as f64);
                best = best.min(min_pairwise_distance(&pos));
            }
        }
        best
    }
}

/// Path realizing `σ_i^{sign}` from `base` (`i` one-based).
pub fn braid_generator_path(base: &ConfigPoint, i: usize, sign: i8) -> Result<StrandPath> {
    deformed_generator_path(base, i, sign, 1.0, 0.0)
}

/// Exchange path with a peak-radius scale and a wobble amplitude.
pub fn deformed_generator_path(
    base: &ConfigPoint,
    i: usize,
    sign: i8,
    radius_scale: f64,
    wiggle: f64,
) -> Result<StrandPath> {
    check_generator(i, base.n())?;
    assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
    let arc = ExchangeArc { start: base.positions().to_vec(), strand: i - 1, sign, radius_scale, wiggle };
    let pos = base.positions();
    let limit = if radius_scale == 1.0 && wiggle == 0.0 {
        0.25 * (pos[i - 1] - pos[i]).norm()
    } else {
        0.1 * base.min_distance()
    };
    let path = StrandPath { basepoint: base.clone(), pieces: vec![Piece { segment: Segment::Exchange(arc), reversed: false }] };
    let min_distance = path.clearance(512);
    if min_distance < limit {
        return Err(Error::NearCollision { min_distance, limit });
    }
    Ok(path)
}

#[derive(Debug, Clone)]
pub struct TransportResult {
    pub matrix: CMat,
    pub tol: f64,
    /// Accumulated local error estimates of the integrator.
    pub err_estimate: f64,
    pub steps: usize,
    /// Closest approach of two strands seen by the integrator.
    pub min_distance: f64,
}

impl TransportResult {
    /// `err_estimate / tol`.
    pub fn safety_factor(&self) -> f64 {
        self.err_estimate / self.tol
    }
}

pub fn check_tolerance(tol: f64) -> Result<()> {
    if !(1e-14..=1e-4).contains(&tol) {
        return Err(Error::ToleranceOutOfRange(tol));
    }
    Ok(())
}

/// Solves `ψ' = -Θ(z(t))(ż(t)) ψ`, `ψ(0) = I`, along the whole path.
pub fn transport(cfg: &ConnectionCoefficients, path: &StrandPath, tol: f64) -> Result<TransportResult> {
    check_tolerance(tol)?;
    if path.basepoint.n() != cfg.n() {
        return Err(Error::DimensionMismatch { expected: cfg.n(), got: path.basepoint.n() });
    }
    let mut psi = identity(cfg.dim());
    let mut steps = 0;
    let mut err_estimate = 0.0;
    let closest = Cell::new(path.basepoint.min_distance());
    let opts = OdeOptions::with_tol(tol);
    for piece in &path.pieces {
        let rhs = |t: f64, y: &CMat| -> CMat {
            let (pos, vel) = piece.eval(t);
            closest.set(closest.get().min(min_pairwise_distance(&pos)));
            -(theta_along(cfg, &pos, &vel) * y)
        };
        let sol = integrate(rhs, psi, 0.0, 1.0, opts).map_err(|f| match f {
            OdeFailure::StepUnderflow { t, h } => Error::StepUnderflow { t, h, min_distance: closest.get() },
            OdeFailure::TooManySteps { t, max_steps } => Error::ToleranceNotMet { t, max_steps },
        })?;
        psi = sol.y;
        steps += sol.accepted;
        err_estimate += sol.err_estimate;
    }
    Ok(TransportResult { matrix: psi, tol, err_estimate, steps, min_distance: closest.get() })
}

fn local_dim(cfg: &ConnectionCoefficients) -> Result<usize> {
    let n = cfg.n() as u32;
    let d = (cfg.dim() as f64).powf(1.0 / n as f64).round() as usize;
    if d.pow(n) != cfg.dim() {
        return Err(Error::Config("monodromy needs identical site representations".into()));
    }
    Ok(d)
}

fn monodromy_of_path(cfg: &ConnectionCoefficients, path: &StrandPath, i: usize, tol: f64) -> Result<CMat> {
    let d = local_dim(cfg)?;
    let psi = transport(cfg, path, tol)?;
    Ok(swap_adjacent(d, cfg.n(), i - 1) * psi.matrix)
}

/// `ρ(σ_i^{sign}) = Swap_{i,i+1} · transport(half-turn)`.
pub fn monodromy_generator(cfg: &ConnectionCoefficients, base: &ConfigPoint, i: usize, sign: i8, tol: f64) -> Result<CMat> {
    let path = braid_generator_path(base, i, sign)?;
    monodromy_of_path(cfg, &path, i, tol)
}

/// `ρ(w) = ρ(ℓ_m) ⋯ ρ(ℓ_1)`.
pub fn monodromy_word(cfg: &ConnectionCoefficients, base: &ConfigPoint, w: &BraidWord, tol: f64) -> Result<CMat> {
    w.validate(cfg.n())?;
    check_tolerance(tol)?;
    let mut memo: HashMap<BraidLetter, CMat> = HashMap::new();
    let mut out = identity(cfg.dim());
    for &letter in w.letters() {
        let m = match memo.entry(letter) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => e.insert(monodromy_generator(cfg, base, letter.index, letter.sign, tol)?),
        };
        out = &*m * out;
    }
    Ok(out)
}

/// `‖ρ_wiggled(σ_i) - ρ(σ_i)‖` for a smooth collision-free wobble of size `eps`.
pub fn homotopy_invariance_check(
    cfg: &ConnectionCoefficients,
    base: &ConfigPoint,
    i: usize,
    eps: f64,
    tol: f64,
) -> Result<f64> {
    deformation_deviation(cfg, base, i, 1.0, eps, tol)
}

/// `‖ρ_deformed(σ_i) - ρ(σ_i)‖` with the exchange radius swelled by
/// `radius_scale` at mid-turn and wobble `eps`.
pub fn deformation_deviation(
    cfg: &ConnectionCoefficients,
    base: &ConfigPoint,
    i: usize,
    radius_scale: f64,
    eps: f64,
    tol: f64,
) -> Result<f64> {
    let plain = monodromy_generator(cfg, base, i, 1, tol)?;
    if eps == 0.0 && radius_scale == 1.0 {
        return Ok(0.0);
    }
    let deformed_path = deformed_generator_path(base, i, 1, radius_scale, eps)?;
    let deformed = monodromy_of_path(cfg, &deformed_path, i, tol)?;
    Ok(crate::linalg::frob(&(deformed - plain)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub rank: usize,
    pub level: u32,
    pub strands: usize,
    pub index: usize,
    pub sign: i8,
    pub tol_bits: u64,
}

/// Write-once store of generator matrices at the standard basepoint
/// `z_j = j`, shareable across threads.
#[derive(Debug, Default)]
pub struct MonodromyCache {
    map: RwLock<HashMap<CacheKey, Arc<CMat>>>,
}

impl MonodromyCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn generator(&self, cfg: &ConnectionCoefficients, i: usize, sign: i8, tol: f64) -> Result<Arc<CMat>> {
        let key = CacheKey {
            rank: local_dim(cfg)?,
            level: cfg.level(),
            strands: cfg.n(),
            index: i,
            sign,
            tol_bits: tol.to_bits(),
        };
        if let Some(m) = self.map.read().expect("cache lock poisoned").get(&key) {
            return Ok(Arc::clone(m));
        }
        let m = Arc::new(monodromy_generator(cfg, &ConfigPoint::standard(cfg.n()), i, sign, tol)?);
        let mut map = self.map.write().expect("cache lock poisoned");
        Ok(Arc::clone(map.entry(key).or_insert(m)))
    }

    pub fn word(&self, cfg: &ConnectionCoefficients, w: &BraidWord, tol: f64) -> Result<CMat> {
        w.validate(cfg.n())?;
        let mut out = identity(cfg.dim());
        for l in w.letters() {
            out = &*self.generator(cfg, l.index, l.sign, tol)? * out;
        }
        Ok(out)
    }
}

/// Braid-relation residuals of a family of generator matrices `ρ_1..ρ_{n-1}`:
/// `‖ρ_iρ_{i+1}ρ_i - ρ_{i+1}ρ_iρ_{i+1}‖` and `‖[ρ_i, ρ_j]‖` for `|i-j| ≥ 2`,
/// keyed by labels with one-based indices.
pub fn braid_relation_residuals(gens: &[CMat]) -> std::collections::BTreeMap<String, f64> {
    use crate::linalg::{commutator, frob};
    let mut out = std::collections::BTreeMap::new();
    for i in 0..gens.len() {
        if i + 1 < gens.len() {
            let (a, b) = (&gens[i], &gens[i + 1]);
            out.insert(format!("braid[{},{}]", i + 1, i + 2), frob(&(a * b * a - b * a * b)));
        }
        for j in (i + 2)..gens.len() {
            out.insert(format!("far[{},{}]", i + 1, j + 1), frob(&commutator(&gens[i], &gens[j])));
        }
    }
    out
}

/// Closed-form two-strand monodromy `Swap^{|e|} · exp(-iπ e · 2/(k+h) · Ω_12)`
/// for a word with exponent sum `e`, letters all equal to `σ_1^{±1}`.
pub fn two_strand_closed_form(cfg: &ConnectionCoefficients, letters: usize, exponent_sum: i64) -> Result<CMat> {
    if cfg.n() != 2 {
        return Err(Error::Config("closed form applies to two strands".into()));
    }
    let d = local_dim(cfg)?;
    let angle = -PI * exponent_sum as f64 * cfg.prefactor();
    let exp = crate::linalg::hermitian_function(cfg.omega(0, 1), |x| C64::from_polar(1.0, angle * x));
    let swap = if letters % 2 == 1 { swap_adjacent(d, 2, 0) } else { identity(d * d) };
    Ok(swap * exp)
}
