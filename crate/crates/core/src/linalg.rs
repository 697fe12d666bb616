//! Small dense complex linear algebra built on nalgebra decompositions.

use nalgebra::{ComplexField, DMatrix};

use crate::scalar::{CMatrix, CVector, Cx, Real};

/// Singular value decomposition with singular values sorted in decreasing order.
pub struct SortedSvd<T: Real> {
    pub u: CMatrix<T>,
    pub sigma: Vec<T>,
    pub v: CMatrix<T>,
}

/// Thin SVD `m = u diag(sigma) v*` sorted by decreasing singular value.
///
/// One-sided Jacobi iteration on the columns; columns of `u` that belong to zero singular
/// values are completed to an orthonormal set.
pub fn svd<T: Real>(m: &CMatrix<T>) -> SortedSvd<T> {
    let (rows, cols) = m.shape();
    if rows.min(cols) == 0 {
        return SortedSvd { u: CMatrix::zeros(rows, 0), sigma: Vec::new(), v: CMatrix::zeros(cols, 0) };
    }
    if rows < cols {
        let t = svd(&m.adjoint());
        return SortedSvd { u: t.v, sigma: t.sigma, v: t.u };
    }
    // Scaling to unit largest entry keeps the squared column norms in range.
    let scale = m.iter().map(|c| c.re.abs().max(c.im.abs())).fold(T::zero(), |x, y| x.max(y));
    if !(scale > T::zero()) || !scale.is_finite() {
        let mut out = if scale == T::zero() { svd(&CMatrix::identity(rows, cols)) } else { return svd_unscaled(m) };
        out.sigma.iter_mut().for_each(|s| *s = T::zero());
        return out;
    }
    let mut out = svd_unscaled(&m.map(|c| c.unscale(scale)));
    out.sigma.iter_mut().for_each(|s| *s *= scale);
    out
}

fn svd_unscaled<T: Real>(m: &CMatrix<T>) -> SortedSvd<T> {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut v = CMatrix::<T>::identity(cols, cols);
    let tol = T::eps() * T::lit(4.0);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = Cx::new(T::zero(), T::zero());
                for i in 0..rows {
                    let ap = a[(i, p)];
                    let aq = a[(i, q)];
                    alpha += ap.norm_sqr();
                    beta += aq.norm_sqr();
                    gamma += ap.conj() * aq;
                }
                let g = modulus(gamma);
                let negligible = alpha.min(beta) <= T::eps() * T::eps() * alpha.max(beta);
                if g == T::zero() || negligible || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.unscale(g);
                let zeta = (beta - alpha) / (T::lit(2.0) * g);
                let t = zeta.signum_or_one() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let ph = phase.conj();
                for i in 0..rows {
                    let ap = a[(i, p)];
                    let aq = a[(i, q)] * ph;
                    a[(i, p)] = ap * c - aq * s;
                    a[(i, q)] = ap * s + aq * c;
                }
                for i in 0..cols {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)] * ph;
                    v[(i, p)] = vp * c - vq * s;
                    v[(i, q)] = vp * s + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<T> = (0..cols).map(|j| a.column(j).iter().map(|c| c.norm_sqr()).fold(T::zero(), |x, y| x + y).sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap_or(std::cmp::Ordering::Equal));
    let hi = norms[order[0]];
    let mut u = CMatrix::zeros(rows, cols);
    let mut sv = CMatrix::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    let mut filled = 0usize;
    for (dst, &src) in order.iter().enumerate() {
        sv.set_column(dst, &v.column(src));
        let s = norms[src];
        sigma.push(s);
        if s > hi * T::eps() * T::from_count(rows.max(cols)) && s > T::zero() {
            let col = a.column(src).map(|c| c.unscale(s));
            u.set_column(dst, &col);
            filled += 1;
        }
    }
    // Complete the left frame for numerically zero singular values.
    if filled < cols {
        let mut basis = u.columns(0, filled).into_owned();
        let mut e = 0usize;
        for dst in filled..cols {
            loop {
                let mut cand = CVector::<T>::zeros(rows);
                cand[e % rows] = Cx::new(T::one(), T::zero());
                e += 1;
                for _ in 0..2 {
                    for j in 0..basis.ncols() {
                        let proj = basis.column(j).dotc(&cand);
                        cand -= basis.column(j) * proj;
                    }
                }
                let n = cand.iter().map(|c| c.norm_sqr()).fold(T::zero(), |x, y| x + y).sqrt();
                if n > T::lit(0.5) {
                    let col = cand / Cx::new(n, T::zero());
                    u.set_column(dst, &col);
                    basis = u.columns(0, dst + 1).into_owned();
                    break;
                }
                if e > 4 * rows + 4 {
                    break;
                }
            }
        }
    }
    SortedSvd { u, sigma, v: sv }
}

trait SignumOrOne {
    fn signum_or_one(self) -> Self;
}

impl<T: Real> SignumOrOne for T {
    fn signum_or_one(self) -> Self {
        if self < T::zero() {
            -T::one()
        } else {
            T::one()
        }
    }
}

/// Largest singular value, zero for empty matrices.
pub fn op_norm<T: Real>(m: &CMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    svd(m).sigma.first().copied().unwrap_or_else(T::zero)
}

/// Ratio of extreme singular values of a square matrix, infinite when singular.
pub fn condition_number<T: Real>(m: &CMatrix<T>) -> T {
    let s = svd(m);
    match (s.sigma.first(), s.sigma.last()) {
        (Some(&hi), Some(&lo)) if lo > T::zero() => hi / lo,
        (Some(_), Some(_)) => T::infinity(),
        _ => T::one(),
    }
}

/// Euclidean norm computed after scaling by the largest entry, safe far below `sqrt(MIN_POSITIVE)`.
pub fn stable_norm<T: Real>(v: &CVector<T>) -> T {
    let scale = v.iter().map(|c| c.re.abs().max(c.im.abs())).fold(T::zero(), |x, y| x.max(y));
    if !(scale > T::zero()) || !scale.is_finite() {
        return scale;
    }
    v.map(|c| c.unscale(scale)).norm() * scale
}

/// Number of singular values above `tol * sigma_max`.
pub fn numerical_rank<T: Real>(sigma: &[T], tol: T) -> usize {
    let hi = match sigma.first() {
        Some(&h) if h > T::zero() => h,
        _ => return 0,
    };
    sigma.iter().take_while(|&&s| s > tol * hi).count()
}

/// Orthonormal basis of the column span of `x` computed from its SVD.
pub fn orthonormal_columns<T: Real>(x: &CMatrix<T>, tol: T) -> CMatrix<T> {
    let s = svd(x);
    let r = numerical_rank(&s.sigma, tol);
    s.u.columns(0, r).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the span of the orthonormal frame `f`.
pub fn complement_frame<T: Real>(f: &CMatrix<T>, dim: usize) -> CMatrix<T> {
    if f.ncols() == 0 {
        return CMatrix::identity(dim, dim);
    }
    let (_, vecs) = hermitian_eigen(&(f * f.adjoint()));
    let r = dim - f.ncols();
    vecs.columns(0, r).into_owned()
}

/// Orthogonal projector onto the span of an orthonormal frame.
pub fn projector<T: Real>(f: &CMatrix<T>) -> CMatrix<T> {
    f * f.adjoint()
}

/// Entrywise complex conjugate.
pub fn conj<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    m.map(|c| c.conj())
}

/// Eigen decomposition of a Hermitian matrix by cyclic Jacobi rotations, eigenvalues ascending.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let mut a = (m + m.adjoint()) * Cx::new(T::lit(0.5), T::zero());
    let mut v = CMatrix::<T>::identity(n, n);
    let scale = frobenius(&a).max(T::min_value().unwrap_or_else(T::zero));
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= T::eps() * T::lit(0.5) * scale || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = modulus(apq);
                if g == T::zero() {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq.unscale(g);
                let tau = (aqq - app) / (T::lit(2.0) * g);
                let t = tau.signum_or_one() / (tau.abs() + (T::one() + tau * tau).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                // W acts on coordinates p, q: [[c, s], [-s e^{-i phi}, c e^{-i phi}]].
                let ph = phase.conj();
                let w_pp = Cx::new(c, T::zero());
                let w_pq = Cx::new(s, T::zero());
                let w_qp = ph * (-s);
                let w_qq = ph * c;
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * w_pp + aiq * w_qp;
                    a[(i, q)] = aip * w_pq + aiq * w_qq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = w_pp.conj() * apj + w_qp.conj() * aqj;
                    a[(q, j)] = w_pq.conj() * apj + w_qq.conj() * aqj;
                }
                a[(p, q)] = Cx::new(T::zero(), T::zero());
                a[(q, p)] = Cx::new(T::zero(), T::zero());
                a[(p, p)] = Cx::new(a[(p, p)].re, T::zero());
                a[(q, q)] = Cx::new(a[(q, q)].re, T::zero());
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * w_pp + viq * w_qp;
                    v[(i, q)] = vip * w_pq + viq * w_qq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.partial_cmp(&a[(y, y)].re).unwrap_or(std::cmp::Ordering::Equal));
    let mut vecs = CMatrix::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &v.column(src));
        vals.push(a[(src, src)].re);
    }
    (vals, vecs)
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_function<T: Real>(m: &CMatrix<T>, f: impl Fn(T) -> T) -> CMatrix<T> {
    let (vals, vecs) = hermitian_eigen(m);
    let n = vals.len();
    let mut d = CMatrix::zeros(n, n);
    for (i, v) in vals.into_iter().enumerate() {
        d[(i, i)] = Cx::new(f(v), T::zero());
    }
    &vecs * d * vecs.adjoint()
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn psd_sqrt<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    hermitian_function(m, |v| if v > T::zero() { v.sqrt() } else { T::zero() })
}

/// Condition number of a Hermitian positive semidefinite matrix from its spectrum.
pub fn hermitian_condition<T: Real>(m: &CMatrix<T>) -> T {
    let (vals, _) = hermitian_eigen(m);
    match (vals.first(), vals.last()) {
        (Some(&lo), Some(&hi)) if lo > T::zero() => hi / lo,
        (Some(_), Some(_)) => T::infinity(),
        _ => T::one(),
    }
}

/// Solves `a x = b` through an LU factorisation.
pub fn solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Option<CMatrix<T>> {
    a.clone().lu().solve(b)
}

/// Frobenius norm.
pub fn frobenius<T: Real>(m: &CMatrix<T>) -> T {
    let mut acc = T::zero();
    for c in m.iter() {
        acc += c.norm_sqr();
    }
    acc.sqrt()
}

/// Converts a real matrix into a complex one.
pub fn complexify<T: Real>(m: &DMatrix<T>) -> CMatrix<T> {
    m.map(|x| Cx::new(x, T::zero()))
}

/// Modulus of a complex number through nalgebra's field trait.
#[inline]
pub fn modulus<T: Real>(c: Cx<T>) -> T {
    ComplexField::modulus(c)
}
