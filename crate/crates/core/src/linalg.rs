//! Dense kernels used by the spectral pipeline: balancing, Householder
//! reduction to Hessenberg form, implicit double-shift QR, and complex
//! shifted solves on Hessenberg matrices. All kernels are generic over the
//! working precision.

use crate::error::{Error, Result};
use crate::precision::{epsilon, Real};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DMat<T> {
    n: usize,
    a: Vec<T>,
}

pub type DenseMatrix = DMat<f64>;

impl<T: Real> DMat<T> {
    pub fn zeros(n: usize, precision_bits: u32) -> Self {
        DMat {
            n,
            a: vec![T::seed(precision_bits, 0.0); n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, precision_bits: u32) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n, precision_bits);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "square matrix required");
            for (j, &v) in row.iter().enumerate() {
                *m.at_mut(i, j) = T::seed(precision_bits, v);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.a[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.a[i * self.n + j] = v;
    }

    pub fn to_f64(&self) -> DMat<f64> {
        DMat {
            n: self.n,
            a: self.a.iter().map(|x| x.to_f64()).collect(),
        }
    }

    pub fn convert<U: Real>(&self, precision_bits: u32) -> DMat<U> {
        DMat {
            n: self.n,
            a: self
                .a
                .iter()
                .map(|x| U::seed(precision_bits, x.to_f64()))
                .collect(),
        }
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.n);
        let mut out = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut acc = v[0].of(0.0);
            for j in 0..self.n {
                acc += self.at(i, j).clone() * &v[j];
            }
            out.push(acc);
        }
        out
    }

    pub fn is_upper_hessenberg(&self) -> bool {
        for i in 2..self.n {
            for j in 0..i - 1 {
                if !self.at(i, j).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Sum of magnitudes over the (upper Hessenberg) band.
    fn hessenberg_norm(&self) -> T {
        let mut norm = self.a[0].of(0.0);
        for i in 0..self.n {
            for j in i.saturating_sub(1)..self.n {
                norm += self.at(i, j).abs();
            }
        }
        norm
    }
}

/// Parlett-Reinsch balancing (radix-2 diagonal similarity, no permutation
/// phase). Exact in binary floating point, preserves Hessenberg structure
/// and eigenvalues.
pub fn balance<T: Real>(m: &mut DMat<T>) {
    let n = m.n;
    if n < 2 {
        return;
    }
    let zero = m.at(0, 0).of(0.0);
    let radix = m.at(0, 0).of(2.0);
    let b2 = m.at(0, 0).of(4.0);
    let threshold = m.at(0, 0).of(0.95);
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = zero.clone();
            let mut r = zero.clone();
            for j in 0..n {
                if j != i {
                    c += m.at(j, i).abs();
                    r += m.at(i, j).abs();
                }
            }
            if c.is_zero() || r.is_zero() {
                continue;
            }
            let mut f = m.at(0, 0).of(1.0);
            let s = c.clone() + &r;
            let mut g = r.clone() / &radix;
            while c < g {
                f *= &radix;
                c *= &b2;
            }
            g = r.clone() * &radix;
            while c >= g {
                f /= &radix;
                c /= &b2;
            }
            if (c + &r) / &f < threshold.clone() * &s {
                converged = false;
                let inv = m.at(0, 0).of(1.0) / &f;
                for j in 0..n {
                    *m.at_mut(i, j) *= &inv;
                }
                for j in 0..n {
                    *m.at_mut(j, i) *= &f;
                }
            }
        }
        if converged {
            return;
        }
    }
}

/// Householder reduction of a general square matrix to upper Hessenberg
/// form (similarity transform; accumulated Q is not kept).
pub fn householder_hessenberg<T: Real>(m: &mut DMat<T>) {
    let n = m.n;
    if n < 3 {
        return;
    }
    let zero = m.at(0, 0).of(0.0);
    for k in 0..n - 2 {
        // Householder vector for column k, rows k+1..n.
        let mut alpha = zero.clone();
        for i in k + 1..n {
            alpha = alpha.hypot(m.at(i, k));
        }
        if alpha.is_zero() {
            continue;
        }
        if *m.at(k + 1, k) > zero {
            alpha = -alpha;
        }
        // v = x - alpha e1; beta = 2 / (v.v) = 1 / (alpha^2 - alpha x0)
        let mut v: Vec<T> = (k + 1..n).map(|i| m.at(i, k).clone()).collect();
        v[0] -= &alpha;
        let mut vv = zero.clone();
        for vi in &v {
            vv += vi.clone() * vi;
        }
        if vv.is_zero() {
            continue;
        }
        let beta = zero.of(2.0) / &vv;

        // A <- P A with P = I - beta v v^T acting on rows k+1..n.
        for j in k..n {
            let mut dot = zero.clone();
            for (off, vi) in v.iter().enumerate() {
                dot += vi.clone() * m.at(k + 1 + off, j);
            }
            dot *= &beta;
            for (off, vi) in v.iter().enumerate() {
                let delta = vi.clone() * &dot;
                *m.at_mut(k + 1 + off, j) -= &delta;
            }
        }
        // A <- A P acting on columns k+1..n.
        for i in 0..n {
            let mut dot = zero.clone();
            for (off, vi) in v.iter().enumerate() {
                dot += vi.clone() * m.at(i, k + 1 + off);
            }
            dot *= &beta;
            for (off, vi) in v.iter().enumerate() {
                let delta = vi.clone() * &dot;
                *m.at_mut(i, k + 1 + off) -= &delta;
            }
        }
        // Column k is now (numerically) zero below the subdiagonal.
        *m.at_mut(k + 1, k) = alpha;
        for i in k + 2..n {
            *m.at_mut(i, k) = zero.clone();
        }
    }
}

fn copysign<T: Real>(magnitude: T, sign_of: &T) -> T {
    let zero = sign_of.of(0.0);
    if *sign_of < zero {
        -magnitude.abs()
    } else {
        magnitude.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix by the implicit double-shift
/// QR iteration, with balancing, a deflation threshold of
/// `2^-p (|h_ii| + |h_i+1,i+1|)` (falling back to `2^-p * norm` when that
/// sum vanishes), exceptional shifts after 10 and 20 stalled sweeps, and a
/// total sweep budget of `30 n`.
pub fn francis_qr<T: Real>(mut h: DMat<T>) -> Result<Vec<(T, T)>> {
    let n = h.n;
    let mut eigs: Vec<(T, T)> = Vec::with_capacity(n);
    if n == 0 {
        return Ok(eigs);
    }
    let zero = h.at(0, 0).of(0.0);
    let p_bits = h.at(0, 0).precision_bits();
    let eps = epsilon::<T>(p_bits);
    if n == 1 {
        eigs.push((h.at(0, 0).clone(), zero));
        return Ok(eigs);
    }
    balance(&mut h);
    let norm = h.hessenberg_norm();
    if norm.is_zero() {
        for _ in 0..n {
            eigs.push((zero.clone(), zero.clone()));
        }
        return Ok(eigs);
    }

    let mut en: isize = n as isize - 1;
    let mut t = zero.clone(); // accumulated shift
    let mut itn: usize = 30 * n; // total sweep budget
    let mut its: usize = 0; // sweeps since last deflation

    'outer: while en >= 0 {
        let enu = en as usize;
        // Find l: start of the active block (small subdiagonal above it).
        let mut l = 0usize;
        for cand in (1..=enu).rev() {
            let mut s = h.at(cand - 1, cand - 1).abs() + h.at(cand, cand).abs();
            if s.is_zero() {
                s = norm.clone();
            }
            if h.at(cand, cand - 1).abs() <= eps.clone() * &s {
                l = cand;
                break;
            }
        }

        let x = h.at(enu, enu).clone();
        if l == enu {
            eigs.push((x + &t, zero.clone()));
            en -= 1;
            its = 0;
            continue 'outer;
        }
        let y = h.at(enu - 1, enu - 1).clone();
        let w = h.at(enu, enu - 1).clone() * h.at(enu - 1, enu);
        if l + 1 == enu {
            let p = (y.clone() - &x) / &h.at(0, 0).of(2.0);
            let q = p.clone() * &p + &w;
            let zz = q.abs().sqrt();
            let x = x + &t;
            if q >= zero {
                // Real pair.
                let zz = p.clone() + copysign(zz, &p);
                let lam1 = x.clone() + &zz;
                let lam2 = if zz.is_zero() {
                    lam1.clone()
                } else {
                    x.clone() - &(w.clone() / &zz)
                };
                eigs.push((lam1, zero.clone()));
                eigs.push((lam2, zero.clone()));
            } else {
                eigs.push((x.clone() + &p, zz.clone()));
                eigs.push((x + &p, -zz));
            }
            en -= 2;
            its = 0;
            continue 'outer;
        }

        if itn == 0 {
            return Err(Error::QrNonConvergence {
                indices: (0..=enu).collect(),
            });
        }

        let (mut x, mut y, mut w) = (x, y, w);
        if its == 10 || its == 20 {
            // Exceptional shift to break symmetry-induced stalls.
            t += &x;
            for i in l..=enu {
                let xi = x.clone();
                *h.at_mut(i, i) -= &xi;
            }
            let s = h.at(enu, enu - 1).abs() + h.at(enu - 1, enu - 2).abs();
            x = h.at(0, 0).of(0.75) * &s;
            y = x.clone();
            w = h.at(0, 0).of(-0.4375) * &s * &s;
        }
        its += 1;
        itn -= 1;

        // Find m: two consecutive small subdiagonal elements.
        let enm2 = enu - 2;
        let mut m = l;
        let mut pqr = (zero.clone(), zero.clone(), zero.clone());
        for cand in (l..=enm2).rev() {
            let zz = h.at(cand, cand).clone();
            let r = x.clone() - &zz;
            let s = y.clone() - &zz;
            let mut p = (r.clone() * &s - &w) / h.at(cand + 1, cand) + h.at(cand, cand + 1);
            let mut q = h.at(cand + 1, cand + 1).clone() - &zz - &r - &s;
            let mut r2 = h.at(cand + 2, cand + 1).clone();
            let scale = p.abs() + q.abs() + r2.abs();
            if !scale.is_zero() {
                p /= &scale;
                q /= &scale;
                r2 /= &scale;
            }
            if cand == l {
                m = cand;
                pqr = (p, q, r2);
                break;
            }
            let tst1 =
                p.abs() * (h.at(cand - 1, cand - 1).abs() + zz.abs() + h.at(cand + 1, cand + 1).abs());
            let tst2 = h.at(cand, cand - 1).abs() * (q.abs() + r2.abs());
            if tst2 <= eps.clone() * &tst1 {
                m = cand;
                pqr = (p, q, r2);
                break;
            }
        }
        for i in m + 2..=enu {
            *h.at_mut(i, i - 2) = zero.clone();
            if i > m + 2 {
                *h.at_mut(i, i - 3) = zero.clone();
            }
        }

        // Double QR sweep on rows/columns l..=en.
        let (mut p, mut q, mut r) = pqr;
        for k in m..enu {
            let notlast = k != enu - 1;
            if k != m {
                p = h.at(k, k - 1).clone();
                q = h.at(k + 1, k - 1).clone();
                r = if notlast {
                    h.at(k + 2, k - 1).clone()
                } else {
                    zero.clone()
                };
                x = p.abs() + q.abs() + r.abs();
                if x.is_zero() {
                    continue;
                }
                p /= &x;
                q /= &x;
                r /= &x;
            }
            let s = copysign(
                (p.clone() * &p + q.clone() * &q + r.clone() * &r).sqrt(),
                &p,
            );
            if s.is_zero() {
                continue;
            }
            if k == m {
                if l != m {
                    let neg = -h.at(k, k - 1).clone();
                    *h.at_mut(k, k - 1) = neg;
                }
            } else {
                *h.at_mut(k, k - 1) = -(s.clone() * &x);
            }
            p += &s;
            x = p.clone() / &s;
            y = q.clone() / &s;
            let zz = r.clone() / &s;
            q /= &p;
            r /= &p;

            if notlast {
                for j in k..=enu {
                    let mut pj = h.at(k, j).clone() + &(q.clone() * h.at(k + 1, j));
                    pj += &(r.clone() * h.at(k + 2, j));
                    let d0 = pj.clone() * &x;
                    let d1 = pj.clone() * &y;
                    let d2 = pj.clone() * &zz;
                    *h.at_mut(k, j) -= &d0;
                    *h.at_mut(k + 1, j) -= &d1;
                    *h.at_mut(k + 2, j) -= &d2;
                }
                let jmax = enu.min(k + 3);
                for i in l..=jmax {
                    let mut pi = x.clone() * h.at(i, k) + &(y.clone() * h.at(i, k + 1));
                    pi += &(zz.clone() * h.at(i, k + 2));
                    let d0 = pi.clone();
                    let d1 = pi.clone() * &q;
                    let d2 = pi * &r;
                    *h.at_mut(i, k) -= &d0;
                    *h.at_mut(i, k + 1) -= &d1;
                    *h.at_mut(i, k + 2) -= &d2;
                }
            } else {
                for j in k..=enu {
                    let pj = h.at(k, j).clone() + &(q.clone() * h.at(k + 1, j));
                    let d0 = pj.clone() * &x;
                    let d1 = pj * &y;
                    *h.at_mut(k, j) -= &d0;
                    *h.at_mut(k + 1, j) -= &d1;
                }
                let jmax = enu.min(k + 3);
                for i in l..=jmax {
                    let pi = x.clone() * h.at(i, k) + &(y.clone() * h.at(i, k + 1));
                    let d0 = pi.clone();
                    let d1 = pi * &q;
                    *h.at_mut(i, k) -= &d0;
                    *h.at_mut(i, k + 1) -= &d1;
                }
            }
        }
    }

    Ok(eigs)
}

/// Eigenvalues of a general square matrix: Householder reduction followed
/// by the QR iteration, all at the requested precision.
pub fn eig_dense(m: &DenseMatrix, precision_bits: u32) -> Result<Vec<(f64, f64)>> {
    if precision_bits <= 52 {
        let mut h = m.clone();
        householder_hessenberg(&mut h);
        Ok(francis_qr(h)?
            .into_iter()
            .map(|(re, im)| (re, im))
            .collect())
    } else {
        let mut h: DMat<rug::Float> = m.convert(precision_bits);
        householder_hessenberg(&mut h);
        Ok(francis_qr(h)?
            .into_iter()
            .map(|(re, im)| (re.to_f64(), im.to_f64()))
            .collect())
    }
}

/// Sorts complex values by descending modulus, ties by descending phase.
pub fn sort_spectrum(eigs: &mut [(f64, f64)]) {
    eigs.sort_by(|a, b| {
        let ma = a.0.hypot(a.1);
        let mb = b.0.hypot(b.1);
        mb.partial_cmp(&ma)
            .unwrap()
            .then_with(|| {
                let pa = a.1.atan2(a.0);
                let pb = b.1.atan2(b.0);
                pb.partial_cmp(&pa).unwrap()
            })
    });
}

/// Greedy nearest-pair matching between two complex multisets: pairs are
/// accepted in order of increasing distance while both sides are unused and
/// the distance stays within `tol`. Returns, per element of `a`, the index
/// it matched in `b`.
pub fn match_spectra(a: &[(f64, f64)], b: &[(f64, f64)], tol: f64) -> Vec<Option<usize>> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, pa) in a.iter().enumerate() {
        for (j, pb) in b.iter().enumerate() {
            let d = (pa.0 - pb.0).hypot(pa.1 - pb.1);
            if d <= tol {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut a_used = vec![false; a.len()];
    let mut b_used = vec![false; b.len()];
    let mut out = vec![None; a.len()];
    for (_, i, j) in pairs {
        if !a_used[i] && !b_used[j] {
            a_used[i] = true;
            b_used[j] = true;
            out[i] = Some(j);
        }
    }
    out
}

/// Complex value over a generic real scalar.
#[derive(Debug, Clone)]
pub struct CT<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> CT<T> {
    pub fn new(re: T, im: T) -> Self {
        CT { re, im }
    }

    pub fn zero_like(proto: &T) -> Self {
        CT {
            re: proto.of(0.0),
            im: proto.of(0.0),
        }
    }

    pub fn modulus(&self) -> T {
        self.re.hypot(&self.im)
    }

    pub fn add(&self, o: &Self) -> Self {
        CT {
            re: self.re.clone() + &o.re,
            im: self.im.clone() + &o.im,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        CT {
            re: self.re.clone() - &o.re,
            im: self.im.clone() - &o.im,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        CT {
            re: self.re.clone() * &o.re - &(self.im.clone() * &o.im),
            im: self.re.clone() * &o.im + &(self.im.clone() * &o.re),
        }
    }

    pub fn div(&self, o: &Self) -> Self {
        // Smith's algorithm avoids overflow on extreme magnitudes.
        let zero = self.re.of(0.0);
        if o.re.abs() >= o.im.abs() {
            if o.re.is_zero() && o.im.is_zero() {
                return CT {
                    re: self.re.clone() / &zero,
                    im: self.im.clone() / &zero,
                };
            }
            let r = o.im.clone() / &o.re;
            let d = o.re.clone() + &(r.clone() * &o.im);
            CT {
                re: (self.re.clone() + &(self.im.clone() * &r)) / &d,
                im: (self.im.clone() - &(self.re.clone() * &r)) / &d,
            }
        } else {
            let r = o.re.clone() / &o.im;
            let d = o.im.clone() + &(r.clone() * &o.re);
            CT {
                re: (self.re.clone() * &r + &self.im) / &d,
                im: (self.im.clone() * &r - &self.re) / &d,
            }
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        CT {
            re: self.re.clone() * s,
            im: self.im.clone() * s,
        }
    }
}

/// Solves `(H - lambda I) x = b` for upper Hessenberg `H` by Gaussian
/// elimination with adjacent-row pivoting (O(n^2)). Near-singular pivots
/// are replaced by `eps * norm`, the standard inverse-iteration guard.
pub fn solve_shifted_hessenberg<T: Real>(
    h: &DMat<T>,
    lambda: &CT<T>,
    b: &[CT<T>],
) -> Vec<CT<T>> {
    let n = h.n;
    assert_eq!(b.len(), n);
    let p_bits = h.at(0, 0).precision_bits();
    let eps = epsilon::<T>(p_bits);
    let norm = h.hessenberg_norm();
    let tiny = eps * &norm;

    // Working copy: row-wise complex entries of H - lambda I (upper
    // Hessenberg, fill-in stays within the upper triangle plus subdiagonal).
    let mut m: Vec<Vec<CT<T>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut c = CT::new(h.at(i, j).clone(), h.at(0, 0).of(0.0));
                    if i == j {
                        c = c.sub(lambda);
                    }
                    c
                })
                .collect()
        })
        .collect();
    let mut rhs: Vec<CT<T>> = b.to_vec();

    for k in 0..n.saturating_sub(1) {
        if m[k + 1][k].modulus() > m[k][k].modulus() {
            m.swap(k, k + 1);
            rhs.swap(k, k + 1);
        }
        if m[k][k].modulus() <= tiny {
            m[k][k] = CT::new(tiny.clone(), tiny.of(0.0));
        }
        let f = m[k + 1][k].div(&m[k][k]);
        for j in k..n {
            let delta = f.mul(&m[k][j]);
            m[k + 1][j] = m[k + 1][j].sub(&delta);
        }
        let delta = f.mul(&rhs[k]);
        rhs[k + 1] = rhs[k + 1].sub(&delta);
    }

    let mut x = vec![CT::zero_like(h.at(0, 0)); n];
    for i in (0..n).rev() {
        let mut acc = rhs[i].clone();
        for j in i + 1..n {
            let delta = m[i][j].mul(&x[j]);
            acc = acc.sub(&delta);
        }
        if m[i][i].modulus() <= tiny {
            m[i][i] = CT::new(tiny.clone(), tiny.of(0.0));
        }
        x[i] = acc.div(&m[i][i]);
    }
    x
}

/// Unit eigenvector of an upper Hessenberg matrix for a known eigenvalue,
/// by complex inverse iteration.
pub fn hessenberg_eigenvector<T: Real>(h: &DMat<T>, lambda: &CT<T>, sweeps: usize) -> Vec<CT<T>> {
    let n = h.n;
    let proto = h.at(0, 0).clone();
    // Deterministic, mildly irrational start keeps the iteration away from
    // accidental orthogonality with the target eigenvector.
    let mut x: Vec<CT<T>> = (0..n)
        .map(|i| {
            CT::new(
                proto.of(1.0 + ((i * 2654435761) % 1000) as f64 / 1000.0),
                proto.of(((i * 40503) % 997) as f64 / 997.0 - 0.5),
            )
        })
        .collect();
    normalize_complex(&mut x);
    for _ in 0..sweeps.max(1) {
        x = solve_shifted_hessenberg(h, lambda, &x);
        normalize_complex(&mut x);
    }
    x
}

/// Scales a complex vector to unit 2-norm (sum of squared moduli = 1).
pub fn normalize_complex<T: Real>(v: &mut [CT<T>]) {
    if v.is_empty() {
        return;
    }
    let mut nrm = v[0].re.of(0.0);
    for c in v.iter() {
        nrm = nrm.hypot(&c.re);
        nrm = nrm.hypot(&c.im);
    }
    if nrm.is_zero() {
        return;
    }
    let inv = v[0].re.of(1.0) / &nrm;
    for c in v.iter_mut() {
        *c = c.scale(&inv);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eig_sorted(rows: Vec<Vec<f64>>) -> Vec<(f64, f64)> {
        let m = DMat::from_rows(rows, 52);
        let mut e = francis_qr(m).unwrap();
        sort_spectrum(&mut e);
        e
    }

    #[test]
    fn diagonal_eigenvalues() {
        let e = eig_sorted(vec![vec![0.5, 0.0], vec![0.0, -0.25]]);
        assert!((e[0].0 - 0.5).abs() < 1e-14 && e[0].1 == 0.0);
        assert!((e[1].0 + 0.25).abs() < 1e-14);
    }

    #[test]
    fn swap_matrix_eigenvalues() {
        // Equal moduli order by descending phase, so -1 (phase pi) leads.
        let e = eig_sorted(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((e[0].0 + 1.0).abs() < 1e-14);
        assert!((e[1].0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_pair_from_rotation() {
        // 90-degree rotation has eigenvalues +-i.
        let e = eig_sorted(vec![vec![0.0, -1.0], vec![1.0, 0.0]]);
        assert!(e[0].0.abs() < 1e-14 && (e[0].1.abs() - 1.0).abs() < 1e-14);
        assert!((e[0].1 + e[1].1).abs() < 1e-14);
    }

    #[test]
    fn three_cycle_roots_of_unity() {
        let e = eig_sorted(vec![
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]);
        for (re, im) in &e {
            assert!((f64::hypot(*re, *im) - 1.0).abs() < 1e-13);
        }
        assert!((e[0].0 - 1.0).abs() < 1e-13);
        assert!((e[1].0 + 0.5).abs() < 1e-13);
        assert!((e[1].1.abs() - 3f64.sqrt() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn hessenberg_reduction_preserves_spectrum() {
        // Fixed 5x5 with known characteristic structure: compare QR on the
        // reduced form against QR on an already-Hessenberg similar matrix.
        let rows = vec![
            vec![4.0, 1.0, -2.0, 2.0, 0.5],
            vec![1.0, 2.0, 0.0, 1.0, -1.0],
            vec![-2.0, 0.0, 3.0, -2.0, 2.0],
            vec![2.0, 1.0, -2.0, -1.0, 0.0],
            vec![0.5, -1.0, 2.0, 0.0, 1.0],
        ];
        let mut m = DMat::from_rows(rows.clone(), 52);
        householder_hessenberg(&mut m);
        assert!(m.is_upper_hessenberg());
        let mut e1 = francis_qr(m).unwrap();
        sort_spectrum(&mut e1);
        // Symmetric input: eigenvalues are real; trace must be preserved.
        let trace: f64 = (0..5).map(|i| rows[i][i]).sum();
        let sum: f64 = e1.iter().map(|p| p.0).sum();
        assert!((trace - sum).abs() < 1e-12);
        assert!(e1.iter().all(|p| p.1.abs() < 1e-9));
    }

    #[test]
    fn perturbed_chain_ring_radius_exact() {
        // Subdiagonal ones with corner eta: characteristic polynomial
        // lambda^d = eta, so every eigenvalue has modulus eta^(1/d).
        for &(d, eta) in &[(8usize, 1e-8f64), (16, 1e-8), (32, 1e-12)] {
            let mut m = DMat::<f64>::zeros(d, 52);
            for i in 1..d {
                m.set(i, i - 1, 1.0);
            }
            m.set(0, d - 1, eta);
            let eigs = francis_qr(m).unwrap();
            let r_expect = eta.powf(1.0 / d as f64);
            for (re, im) in eigs {
                let r = re.hypot(im);
                assert!(
                    ((r - r_expect) / r_expect).abs() < 1e-6,
                    "d={d} eta={eta}: r={r} expect={r_expect}"
                );
            }
        }
    }

    #[test]
    fn unperturbed_chain_stays_below_jordan_bound() {
        for &d in &[8usize, 16, 32] {
            let mut m = DMat::<f64>::zeros(d, 52);
            for i in 1..d {
                m.set(i, i - 1, 1.0);
            }
            let eigs = francis_qr(m).unwrap();
            let bound = 4.0 * (-(52.0) / d as f64).exp2();
            for (re, im) in eigs {
                assert!(re.hypot(im) <= bound, "d={d}: |lambda| above {bound}");
            }
        }
    }

    #[test]
    fn high_precision_chain_bound() {
        use rug::Float;
        for &(d, p) in &[(8usize, 128u32), (16, 128), (8, 256)] {
            let mut m = DMat::<Float>::zeros(d, p);
            for i in 1..d {
                m.set(i, i - 1, Float::with_val(p + 1, 1.0));
            }
            let eigs = francis_qr(m).unwrap();
            let bound = 4.0 * (-(p as f64) / d as f64).exp2();
            for (re, im) in eigs {
                let r = re.to_f64().hypot(im.to_f64());
                assert!(r <= bound, "d={d} p={p}: spurious radius {r} > {bound}");
            }
        }
    }

    #[test]
    fn shifted_solve_reconstructs_rhs() {
        let h = DMat::from_rows(
            vec![
                vec![1.0, 2.0, 3.0],
                vec![4.0, 5.0, 6.0],
                vec![0.0, 7.0, 8.0],
            ],
            52,
        );
        let lambda = CT::new(0.3, 0.2);
        let b: Vec<CT<f64>> = vec![
            CT::new(1.0, 0.0),
            CT::new(0.0, 1.0),
            CT::new(-1.0, 0.5),
        ];
        let x = solve_shifted_hessenberg(&h, &lambda, &b);
        // Check (H - lambda I) x = b.
        for i in 0..3 {
            let mut acc = CT::new(0.0, 0.0);
            for j in 0..3 {
                let hij = CT::new(*h.at(i, j), 0.0);
                acc = acc.add(&hij.mul(&x[j]));
            }
            acc = acc.sub(&lambda.mul(&x[i]));
            assert!((acc.re - b[i].re).abs() < 1e-10);
            assert!((acc.im - b[i].im).abs() < 1e-10);
        }
    }

    #[test]
    fn spectra_matching_is_one_to_one() {
        let a = vec![(1.0, 0.0), (0.5, 0.5), (0.0, 0.0)];
        let b = vec![(0.5, 0.5), (1.0 + 1e-9, 0.0), (10.0, 0.0)];
        let m = match_spectra(&a, &b, 1e-6);
        assert_eq!(m[0], Some(1));
        assert_eq!(m[1], Some(0));
        assert_eq!(m[2], None);
    }
}
