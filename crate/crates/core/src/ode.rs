//! Adaptive Dormand–Prince 5(4) integrator for matrix-valued linear ODEs
//! `Y'(t) = F(t, Y)`.
//!
//! Error control is per step on the entrywise max-norm, scaled by
//! `tol · (1 + max|Y|)`.

use crate::linalg::{CMat, C64};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub tol: f64,
    pub max_steps: usize,
    /// Relative floor for the step size: `h < min_step · |t1 - t0|` is underflow.
    pub min_step: f64,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { tol, max_steps: 200_000, min_step: 1e-13 }
    }
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub y: CMat,
    pub accepted: usize,
    pub rejected: usize,
    /// Sum of the accepted local error estimates (absolute, max-norm).
    pub err_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeFailure {
    StepUnderflow { t: f64, h: f64 },
    TooManySteps { t: f64, max_steps: usize },
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b* (fifth minus fourth order weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo(y: &CMat, h: f64, terms: &[(f64, &CMat)]) -> CMat {
    let mut out = y.clone();
    for &(w, k) in terms {
        if w != 0.0 {
            out += k * C64::new(h * w, 0.0);
        }
    }
    out
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Integrates from `t0` to `t1` starting at `y0`.
pub fn integrate<F>(mut rhs: F, y0: CMat, t0: f64, t1: f64, opts: OdeOptions) -> Result<OdeSolution, OdeFailure>
where
    F: FnMut(f64, &CMat) -> CMat,
{
    let span = t1 - t0;
    let mut y = y0;
    if span == 0.0 {
        return Ok(OdeSolution { y, accepted: 0, rejected: 0, err_estimate: 0.0 });
    }
    let dir = span.signum();
    let h_min = opts.min_step * span.abs();
    let mut t = t0;
    let mut k1 = rhs(t, &y);

    // initial step from the derivative scale
    let scale0 = opts.tol * (1.0 + max_abs(&y));
    let d1 = max_abs(&k1);
    let mut h = if d1 > 0.0 { 0.1 * (scale0 / d1).powf(0.2) } else { 0.1 * span.abs() };
    h = h.clamp(h_min * 10.0, span.abs());

    let mut accepted = 0;
    let mut rejected = 0;
    let mut err_estimate = 0.0;
    while (t1 - t) * dir > 0.0 {
        if accepted + rejected >= opts.max_steps {
            return Err(OdeFailure::TooManySteps { t, max_steps: opts.max_steps });
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        let hs = if last { remaining } else { h } * dir;

        let k2 = rhs(t + C2 * hs, &combo(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * hs, &combo(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * hs, &combo(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(t + C5 * hs, &combo(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = rhs(t + hs, &combo(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = combo(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = rhs(t + hs, &y_new);

        let zero = CMat::zeros(y.nrows(), y.ncols());
        let err_mat = combo(&zero, hs, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
        let err_abs = max_abs(&err_mat);
        let scale = opts.tol * (1.0 + max_abs(&y).max(max_abs(&y_new)));
        let err = if err_abs.is_finite() && scale.is_finite() { err_abs / scale } else { f64::INFINITY };

        if err <= 1.0 {
            t = if last { t1 } else { t + hs };
            y = y_new;
            k1 = k7;
            accepted += 1;
            err_estimate += err_abs;
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (hs.abs() * factor).max(h_min);
        } else {
            rejected += 1;
            h = hs.abs() * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < h_min {
                return Err(OdeFailure::StepUnderflow { t, h });
            }
        }
    }
    Ok(OdeSolution { y, accepted, rejected, err_estimate })
}
