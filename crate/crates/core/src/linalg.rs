//! Dense complex linear algebra helpers shared by every module.
//!
//! Tensor products follow the Kronecker convention: site 0 is the most
//! significant (leftmost) factor of `V_0 ⊗ V_1 ⊗ … ⊗ V_{n-1}`. All matrix
//! residuals in this crate are Frobenius norms.

use nalgebra::linalg::{Schur, SymmetricEigen, SVD};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMat {
    CMat::zeros(dim, dim)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Frobenius norm.
pub fn frob(a: &CMat) -> f64 {
    a.norm()
}

/// Kronecker product of a list of factors, leftmost most significant.
pub fn kron_all(factors: &[CMat]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

/// Operator acting as `ops[k].1` on site `ops[k].0` and as the identity elsewhere.
pub fn embed(dims: &[usize], ops: &[(usize, &CMat)]) -> CMat {
    let factors: Vec<CMat> = dims
        .iter()
        .enumerate()
        .map(|(site, &d)| match ops.iter().find(|(s, _)| *s == site) {
            Some((_, m)) => (*m).clone(),
            None => identity(d),
        })
        .collect();
    kron_all(&factors)
}

/// Flip operator on `C^d ⊗ C^d`: `v_s ⊗ v_t -> v_t ⊗ v_s`.
pub fn flip(d: usize) -> CMat {
    let mut p = zeros(d * d);
    for s in 0..d {
        for t in 0..d {
            p[(t * d + s, s * d + t)] = C64::new(1.0, 0.0);
        }
    }
    p
}

/// Permutation of tensor factors `site` and `site + 1` of a uniform `d^n` space.
pub fn swap_adjacent(d: usize, n: usize, site: usize) -> CMat {
    assert!(site + 1 < n);
    let left = identity(d.pow(site as u32));
    let right = identity(d.pow((n - site - 2) as u32));
    left.kronecker(&flip(d)).kronecker(&right)
}

/// Eigenvalues of a general complex square matrix via the complex Schur form.
pub fn eigenvalues(a: &CMat) -> Vec<C64> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![a[(0, 0)]];
    }
    let (_, t) = Schur::new(a.clone()).unpack();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].norm() > 0.0 {
            let (l1, l2) = eig2(t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            out.push(l1);
            out.push(l2);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    out
}

fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powu(2) + b * c;
    let s = disc.sqrt();
    (half_tr + s, half_tr - s)
}

/// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues and
/// unitary eigenvector columns.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let herm = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..a.nrows()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = zeros(a.nrows());
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// `f(H)` for a Hermitian `H`, through its spectral decomposition.
pub fn hermitian_function(h: &CMat, f: impl Fn(f64) -> C64) -> CMat {
    let (vals, vecs) = hermitian_eigen(h);
    let diag = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&x| f(x)),
    ));
    &vecs * diag * vecs.adjoint()
}

pub fn expm(a: &CMat) -> CMat {
    a.exp()
}

/// Singular values in descending order with the right singular vectors
/// (columns of `V`, matching the singular values).
pub fn svd_full(a: &CMat) -> (Vec<f64>, CMat) {
    let svd = SVD::new(a.clone(), false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let values = order.iter().map(|&k| svd.singular_values[k]).collect();
    let mut v = CMat::zeros(v_t.ncols(), order.len());
    for (col, &k) in order.iter().enumerate() {
        let row = v_t.row(k).adjoint();
        v.set_column(col, &row);
    }
    (values, v)
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// 2-norm condition number (infinite for a numerically singular matrix).
pub fn condition_number(a: &CMat) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method).
/// Returns `assign[row] = col`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // 1-based potentials; p[j] = row matched to column j.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        assign[p[j] - 1] = j - 1;
    }
    assign
}

/// Largest matched distance between two equal-size multisets of complex
/// numbers under the minimum-cost assignment on `|a - b|`.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets must have equal size");
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).collect())
        .collect();
    let assign = min_cost_assignment(&cost);
    assign
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .fold(0.0, f64::max)
}

pub fn to_pairs(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment_brute_force() {
        let cost = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        let assign = min_cost_assignment(&cost);
        let total: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        // all 6 permutations
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let best = perms
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(total, best);
    }

    #[test]
    fn eigenvalues_of_triangular_and_rotation() {
        let m = CMat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(-1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)]);
        let mut ev = eigenvalues(&m);
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - c64(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - c64(0.0, 1.0)).norm() < 1e-14);

        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(1.0, 2.0), c64(-3.0, 0.5), c64(0.0, 1.0)]));
        let ev = eigenvalues(&d);
        assert!(multiset_distance(&ev, &[c64(1.0, 2.0), c64(-3.0, 0.5), c64(0.0, 1.0)]) < 1e-13);
    }

    #[test]
    fn swap_squares_to_identity() {
        let p = swap_adjacent(2, 3, 1);
        assert!(frob(&(&p * &p - identity(8))) == 0.0);
    }
}
