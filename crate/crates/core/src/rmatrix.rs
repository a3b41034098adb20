//! The A-type quantum R-matrix on `C^N ⊗ C^N`, its braided form `Ř = P·R`,
//! and the braid-group representation `ν(σ_i) = -q^{1/2} Ř_{i,i+1}`.
//!
//! All half-integer powers of `q` derive from the single principal root
//! `sqrt_q = exp(-iπ/(k+h))`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::linalg::{commutator, eigenvalues, flip, frob, identity, kron_all, CMat, C64};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QDeformation {
    /// `None` for the formal classical point `q = 1`.
    pub level: Option<u32>,
    pub dual_coxeter: f64,
    pub q: C64,
    pub sqrt_q: C64,
}

impl QDeformation {
    /// `q = exp(-2πi/(k+h))`.
    pub fn new(level: u32, dual_coxeter: f64) -> Self {
        let sqrt_q = C64::from_polar(1.0, -PI / (level as f64 + dual_coxeter));
        QDeformation { level: Some(level), dual_coxeter, q: sqrt_q * sqrt_q, sqrt_q }
    }

    /// `su(N)` at level `k` (`h = N`).
    pub fn su(rank: usize, level: u32) -> Self {
        Self::new(level, rank as f64)
    }

    /// The undeformed point `q = sqrt_q = 1`.
    pub fn classical() -> Self {
        QDeformation { level: None, dual_coxeter: 0.0, q: C64::new(1.0, 0.0), sqrt_q: C64::new(1.0, 0.0) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RMatrix {
    n: usize,
    qd: QDeformation,
    r: CMat,
    rcheck: CMat,
}

impl RMatrix {
    pub fn local_dim(&self) -> usize {
        self.n
    }

    pub fn deformation(&self) -> &QDeformation {
        &self.qd
    }

    pub fn r(&self) -> &CMat {
        &self.r
    }

    pub fn rcheck(&self) -> &CMat {
        &self.rcheck
    }
}

fn unit(n: usize, i: usize, j: usize) -> CMat {
    let mut e = CMat::zeros(n, n);
    e[(i, j)] = C64::new(1.0, 0.0);
    e
}

/// `R = Σ_{i≠j} e_ii⊗e_jj + q^{1/2} Σ_i e_ii⊗e_ii + (q^{1/2} - q^{-1/2}) Σ_{i<j} e_ij⊗e_ji`.
pub fn build_r(n: usize, qd: QDeformation) -> Result<RMatrix> {
    if n < 2 {
        return Err(Error::RankTooSmall(n));
    }
    let s = qd.sqrt_q;
    let gap = s - s.inv();
    let mut r = CMat::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let coeff = if i == j { s } else { C64::new(1.0, 0.0) };
            r += unit(n, i, i).kronecker(&unit(n, j, j)) * coeff;
            if i < j {
                r += unit(n, i, j).kronecker(&unit(n, j, i)) * gap;
            }
        }
    }
    let rcheck = flip(n) * &r;
    Ok(RMatrix { n, qd, r, rcheck })
}

/// `‖R_12 R_13 R_23 - R_23 R_13 R_12‖` on `(C^N)^{⊗3}`.
pub fn qybe_residual(rm: &RMatrix) -> f64 {
    let n = rm.n;
    let id = identity(n);
    let r12 = rm.r.kronecker(&id);
    let r23 = id.kronecker(&rm.r);
    let p23 = id.kronecker(&flip(n));
    let r13 = &p23 * &r12 * &p23;
    frob(&(&r12 * &r13 * &r23 - &r23 * &r13 * &r12))
}

#[derive(Debug, Clone)]
pub struct RcheckRelations {
    /// `‖Ř² - (q^{1/2} - q^{-1/2})Ř - I‖`.
    pub quadratic: f64,
    /// `‖(Ř⊗I)(I⊗Ř)(Ř⊗I) - (I⊗Ř)(Ř⊗I)(I⊗Ř)‖`.
    pub braided_ybe: f64,
    pub eigenvalues: Vec<C64>,
}

pub fn rcheck_relations(rm: &RMatrix) -> RcheckRelations {
    let n = rm.n;
    let s = rm.qd.sqrt_q;
    let rc = &rm.rcheck;
    let id2 = identity(n * n);
    let quadratic = frob(&(rc * rc - rc * (s - s.inv()) - &id2));
    let id = identity(n);
    let a = rc.kronecker(&id);
    let b = id.kronecker(rc);
    let braided_ybe = frob(&(&a * &b * &a - &b * &a * &b));
    RcheckRelations { quadratic, braided_ybe, eigenvalues: eigenvalues(rc) }
}

/// `ν(σ_i) = -q^{1/2} (I^{⊗(i-1)} ⊗ Ř ⊗ I^{⊗(n-i-1)})`, `i` one-based.
pub fn braid_rep_nu(rm: &RMatrix, strands: usize, i: usize) -> Result<CMat> {
    if i == 0 || i + 1 > strands {
        return Err(Error::GeneratorOutOfRange { index: i, max: strands.saturating_sub(1) });
    }
    let d = rm.n;
    let left = identity(d.pow((i - 1) as u32));
    let right = identity(d.pow((strands - i - 1) as u32));
    Ok(kron_all(&[left, rm.rcheck.clone(), right]) * (-rm.qd.sqrt_q))
}

/// All generators `ν_1 .. ν_{n-1}`.
pub fn braid_rep_generators(rm: &RMatrix, strands: usize) -> Result<Vec<CMat>> {
    (1..strands).map(|i| braid_rep_nu(rm, strands, i)).collect()
}

/// `ν(w)` for a word, letters acting left to right like the holonomy side.
pub fn braid_rep_word(rm: &RMatrix, strands: usize, w: &crate::holonomy::BraidWord) -> Result<CMat> {
    w.validate(strands)?;
    let gens = braid_rep_generators(rm, strands)?;
    let inverses: Vec<CMat> = gens
        .iter()
        .map(|g| g.clone().try_inverse().expect("ν generators are invertible"))
        .collect();
    let mut out = identity(rm.n.pow(strands as u32));
    for l in w.letters() {
        let g = if l.sign > 0 { &gens[l.index - 1] } else { &inverses[l.index - 1] };
        out = g * out;
    }
    Ok(out)
}

/// Residuals of the Temperley-Lieb-Jones presentation, keyed
/// `braid[i,i+1]`, `far[i,j]` and `quadratic[i]` (one-based).
pub fn tl_residuals(rm: &RMatrix, strands: usize) -> Result<BTreeMap<String, f64>> {
    let gens = braid_rep_generators(rm, strands)?;
    let q = rm.qd.q;
    let id = identity(rm.n.pow(strands as u32));
    let mut out = BTreeMap::new();
    for (i, g) in gens.iter().enumerate() {
        let quad = g * g - g * (C64::new(1.0, 0.0) - q) - &id * q;
        out.insert(format!("quadratic[{}]", i + 1), frob(&quad));
        if i + 1 < gens.len() {
            let h = &gens[i + 1];
            out.insert(format!("braid[{},{}]", i + 1, i + 2), frob(&(g * h * g - h * g * h)));
        }
        for (j, h) in gens.iter().enumerate().skip(i + 2) {
            out.insert(format!("far[{},{}]", i + 1, j + 1), frob(&commutator(g, h)));
        }
    }
    Ok(out)
}
