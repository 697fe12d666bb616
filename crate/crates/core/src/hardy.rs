//! Point sequences, Blaschke factors, kernels and axis norms for the right half-plane.

use crate::error::{Error, Result};
use crate::linalg::modulus;
use crate::quadrature::{AxisQuadrature, Feature};
use crate::scalar::{Cx, Real};

/// Model of the points that follow a stored finite prefix of an infinite sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel<T: Real> {
    /// Real points `z_j = scale * j^exponent` for one-based indices `j` beyond the stored prefix.
    /// The exponent must exceed one so that the Blaschke condition holds.
    RealPower { scale: T, exponent: T },
}

impl<T: Real> TailModel<T> {
    fn point(&self, one_based: usize) -> T {
        match *self {
            TailModel::RealPower { scale, exponent } => scale * T::from_count(one_based).powf(exponent),
        }
    }

    /// Index `t` as a continuous variable.
    fn point_continuous(&self, t: T) -> T {
        match *self {
            TailModel::RealPower { scale, exponent } => scale * t.powf(exponent),
        }
    }
}

/// Distinct points of the open right half-plane together with a tail tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSequence<T: Real> {
    points: Vec<Cx<T>>,
    tail_tolerance: T,
    tail: Option<TailModel<T>>,
}

impl<T: Real> PointSequence<T> {
    /// Validates that every point lies in the open right half-plane and that points are distinct.
    pub fn new(points: Vec<Cx<T>>, tail_tolerance: T) -> Result<Self> {
        if !(tail_tolerance > T::zero()) {
            return Err(Error::InvalidParameter("tail tolerance must be positive".into()));
        }
        for (i, z) in points.iter().enumerate() {
            if !(z.re > T::zero()) || !z.im.is_finite() || !z.re.is_finite() {
                return Err(Error::NotInHalfPlane { index: i, re: z.re.as_f64() });
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(Error::DuplicatePoint { first: i, second: j });
                }
            }
        }
        Ok(Self { points, tail_tolerance, tail: None })
    }

    /// Attaches an analytic model for the unstored continuation of the sequence.
    pub fn with_tail(mut self, tail: TailModel<T>) -> Result<Self> {
        match tail {
            TailModel::RealPower { scale, exponent } => {
                if !(scale > T::zero()) || !(exponent > T::one()) {
                    return Err(Error::InvalidParameter(
                        "tail model needs a positive scale and an exponent above one".into(),
                    ));
                }
            }
        }
        self.tail = Some(tail);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Cx<T>] {
        &self.points
    }

    pub fn point(&self, k: usize) -> Cx<T> {
        self.points[k]
    }

    pub fn tail_tolerance(&self) -> T {
        self.tail_tolerance
    }

    pub fn tail(&self) -> Option<&TailModel<T>> {
        self.tail.as_ref()
    }

    /// The first `n` points as a new sequence.
    pub fn truncate(&self, n: usize) -> Self {
        Self { points: self.points[..n.min(self.len())].to_vec(), tail_tolerance: self.tail_tolerance, tail: None }
    }

    /// Sum of `Re z_j / (1 + |z_j|^2)` over the stored points.
    pub fn blaschke_sum(&self) -> T {
        self.points.iter().map(|z| z.re / (T::one() + z.norm_sqr())).fold(T::zero(), |a, b| a + b)
    }
}

/// Blaschke factor `(z - z_k) / (z + conj z_k)`.
#[inline]
pub fn blaschke_factor<T: Real>(z: Cx<T>, zk: Cx<T>) -> Cx<T> {
    (z - zk) / (z + zk.conj())
}

/// Derivative of the Blaschke factor in `z`.
#[inline]
pub fn blaschke_factor_derivative<T: Real>(z: Cx<T>, zk: Cx<T>) -> Cx<T> {
    let d = z + zk.conj();
    Cx::new(T::lit(2.0) * zk.re, T::zero()) / (d * d)
}

/// Product of the first `n` Blaschke factors at `z`.
pub fn blaschke_product<T: Real>(seq: &PointSequence<T>, n: usize, z: Cx<T>) -> Cx<T> {
    seq.points[..n.min(seq.len())]
        .iter()
        .fold(Cx::new(T::one(), T::zero()), |acc, &zj| acc * blaschke_factor(z, zj))
}

/// Product of the first `n` Blaschke factors with index `k` (zero based) omitted, evaluated at `z`.
pub fn excluded_product<T: Real>(seq: &PointSequence<T>, k: usize, n: usize, z: Cx<T>) -> Cx<T> {
    seq.points[..n.min(seq.len())]
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .fold(Cx::new(T::one(), T::zero()), |acc, (_, &zj)| acc * blaschke_factor(z, zj))
}

/// A product value with a certified bound on the relative error of its modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifiedProduct<T: Real> {
    /// Finite product value. Its phase is that of the explicitly evaluated factors.
    pub value: Cx<T>,
    /// Best estimate of `log |product|`, including the analytic tail when one is modelled.
    pub log_modulus: T,
    /// Upper bound on the relative error of `exp(log_modulus)`.
    pub rel_error_bound: T,
    /// Number of factors evaluated explicitly.
    pub terms: usize,
}

impl<T: Real> CertifiedProduct<T> {
    pub fn modulus(&self) -> T {
        self.log_modulus.exp()
    }
}

fn excluded_log_modulus<T: Real>(points: &[Cx<T>], k: usize, zk: Cx<T>) -> (Cx<T>, T) {
    let mut value = Cx::new(T::one(), T::zero());
    let mut log_mod = T::zero();
    for (j, &zj) in points.iter().enumerate() {
        if j == k {
            continue;
        }
        let b = blaschke_factor(zk, zj);
        value *= b;
        log_mod += modulus(b).ln();
    }
    (value, log_mod)
}

/// `B_{n,k}(z_k)`: the excluded product over the first `n` points at `z_k`.
///
/// The stored points with index at least `n` act as the tail. With `eps_j = 1 - |b_j(z_k)|`
/// the modulus lost by truncation is bounded by `1 - exp(-sum eps_j / (1 - eps_j))`, which is
/// returned as the certificate. Fails with [`Error::TailBoundExceeded`] when the bound is above
/// the sequence tail tolerance.
pub fn b_truncated<T: Real>(seq: &PointSequence<T>, k: usize, n: usize) -> Result<CertifiedProduct<T>> {
    let n = n.min(seq.len());
    if k >= seq.len() {
        return Err(Error::InvalidParameter(format!("index {k} out of range")));
    }
    let zk = seq.point(k);
    let (value, log_mod) = excluded_log_modulus(&seq.points[..n], k, zk);
    let mut tail_sum = T::zero();
    for (j, &zj) in seq.points.iter().enumerate().skip(n) {
        if j == k {
            continue;
        }
        let eps = T::one() - modulus(blaschke_factor(zk, zj));
        tail_sum += eps / (T::one() - eps);
    }
    let bound = -(-tail_sum).exp_m1();
    if bound > seq.tail_tolerance {
        return Err(Error::TailBoundExceeded { index: k, bound: bound.as_f64(), tolerance: seq.tail_tolerance.as_f64() });
    }
    Ok(CertifiedProduct { value, log_modulus: log_mod, rel_error_bound: bound, terms: n })
}

/// `b_{infinity,k}`: the excluded product over the whole sequence at `z_k`.
///
/// Without a tail model the stored points are the complete sequence and the value is exact
/// up to rounding. With a tail model further factors are generated explicitly until the
/// remainder of `sum -log|b_j(z_k)|` can be bracketed between two integrals of the modelled
/// continuation; the bracket midpoint is folded into `log_modulus` and its half-width becomes
/// the certificate.
pub fn b_inf<T: Real>(seq: &PointSequence<T>, k: usize) -> Result<CertifiedProduct<T>> {
    if k >= seq.len() {
        return Err(Error::InvalidParameter(format!("index {k} out of range")));
    }
    let zk = seq.point(k);
    let (value, mut log_mod) = excluded_log_modulus(&seq.points, k, zk);
    let tail = match seq.tail {
        None => return Ok(CertifiedProduct { value, log_modulus: log_mod, rel_error_bound: T::zero(), terms: seq.len() }),
        Some(t) => t,
    };
    let a = zk.re;
    let b2 = zk.im * zk.im;
    let neg_log = |x: T| -> T {
        let den = (x - a) * (x - a) + b2;
        T::lit(0.5) * (T::lit(4.0) * a * x / den).ln_1p()
    };
    let f = |t: T| neg_log(tail.point_continuous(t));
    let zk_mod = modulus(zk);
    let target = seq.tail_tolerance * T::lit(0.25);
    let mut j = seq.len();
    let mut explicit = 0usize;
    loop {
        // Monotone and convex regime of the tail terms once x_j dominates |z_k|.
        let next = j + 1;
        let x = tail.point(next);
        if x >= T::lit(4.0) * zk_mod {
            let jj = T::from_count(j);
            let da = jj + T::lit(0.5);
            let width_proxy = (f(da) - f(jj + T::one())).abs();
            if width_proxy <= target || explicit > 50_000_000 {
                break;
            }
        }
        log_mod -= neg_log(x);
        j = next;
        explicit += 1;
    }
    // Remainder sum_{i > j} f(i) lies in [int_{j+1}^inf f + f(j+1)/2, int_{j+1/2}^inf f].
    let quad = AxisQuadrature::<T> { abs_tol: target * T::lit(1e-3), rel_tol: T::lit(1e-12), ..Default::default() };
    let tail_integral = |start: T| -> Result<T> {
        let g = |u: T| if u > T::zero() { f(start / u) * start / (u * u) } else { T::zero() };
        Ok(quad.integrate_interval(g, T::zero(), T::one(), &[T::lit(0.5), T::lit(0.1), T::lit(0.01)])?.value)
    };
    let jj = T::from_count(j);
    let upper = tail_integral(jj + T::lit(0.5))?;
    let lower = tail_integral(jj + T::one())? + f(jj + T::one()) * T::lit(0.5);
    let (lo, hi) = if lower <= upper { (lower, upper) } else { (upper, lower) };
    let mid = (lo + hi) * T::lit(0.5);
    let half = (hi - lo) * T::lit(0.5) + quad.abs_tol * T::lit(2.0);
    log_mod -= mid;
    let bound = half.exp_m1();
    if bound > seq.tail_tolerance {
        return Err(Error::TailBoundExceeded { index: k, bound: bound.as_f64(), tolerance: seq.tail_tolerance.as_f64() });
    }
    Ok(CertifiedProduct { value, log_modulus: log_mod, rel_error_bound: bound, terms: seq.len() - 1 + explicit })
}

/// Poisson kernel `p_z(omega) = Re z / (pi |z - i omega|^2)` for the right half-plane.
#[inline]
pub fn poisson_kernel<T: Real>(z: Cx<T>, omega: T) -> T {
    let dy = z.im - omega;
    z.re / (T::PI() * (z.re * z.re + dy * dy))
}

/// Reproducing kernel `k_w(z) = 1 / (2 pi (z + conj w))`.
#[inline]
pub fn reproducing_kernel<T: Real>(w: Cx<T>, z: Cx<T>) -> Cx<T> {
    Cx::new(T::one(), T::zero()) / ((z + w.conj()) * T::two_pi())
}

/// `||k_w||^2 = 1 / (4 pi Re w)`.
#[inline]
pub fn kernel_norm_sq<T: Real>(w: Cx<T>) -> T {
    T::one() / (T::lit(4.0) * T::PI() * w.re)
}

/// `<k_a, k_b> = k_a(b)`.
#[inline]
pub fn kernel_inner<T: Real>(a: Cx<T>, b: Cx<T>) -> Cx<T> {
    reproducing_kernel(a, b)
}

/// Pseudo-hyperbolic distance `|z - w| / |z + conj w|`.
#[inline]
pub fn pseudo_hyperbolic<T: Real>(z: Cx<T>, w: Cx<T>) -> T {
    modulus(blaschke_factor(z, w))
}

/// `(int |f|^q)^{1/q}` along the imaginary axis.
///
/// `quad.tail_decay_exponent` is read as the decay of `|f|`, so the integrand decays with
/// exponent `q` times larger.
pub fn axis_lq_norm<T: Real, F: Fn(T) -> T>(f: F, q: T, features: &[Feature<T>], quad: &AxisQuadrature<T>) -> Result<T> {
    if !(q >= T::one()) {
        return Err(Error::InvalidParameter(format!("q = {q} must be at least one")));
    }
    let inner = quad.with_decay(quad.tail_decay_exponent * q);
    let r = inner.integrate_line(|w| f(w).abs().powf(q), features)?;
    Ok(r.value.max(T::zero()).powf(T::one() / q))
}

/// `||p_z||_q` by quadrature.
pub fn poisson_lq_norm<T: Real>(z: Cx<T>, q: T, quad: &AxisQuadrature<T>) -> Result<T> {
    let quad = quad.with_decay(T::lit(2.0));
    axis_lq_norm(|w| poisson_kernel(z, w), q, &[Feature::new(z.im, z.re)], &quad)
}

/// `||p_1||_q`, the constant in `||p_z||_q = (Re z)^{1/q - 1} ||p_1||_q`.
pub fn poisson_norm_constant<T: Real>(q: T, quad: &AxisQuadrature<T>) -> Result<T> {
    poisson_lq_norm(Cx::new(T::one(), T::zero()), q, quad)
}

/// `||k_1||_q^q = (2 pi)^{-q} int (1 + t^2)^{-q/2} dt`, so that `||k_w||_q^q = (Re w)^{1-q}` times it.
pub fn kernel_lq_constant<T: Real>(q: T, quad: &AxisQuadrature<T>) -> Result<T> {
    if !(q > T::one()) {
        return Err(Error::DivergentIntegral(format!("reproducing kernel is not in L^{q}")));
    }
    let quad = quad.with_decay(q);
    let r = quad.integrate_line(|t| (T::one() + t * t).powf(-q * T::lit(0.5)), &[Feature::new(T::zero(), T::one())])?;
    Ok(r.value * T::two_pi().powf(-q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn heat(n: usize, tol: f64) -> PointSequence<f64> {
        let pi2 = std::f64::consts::PI.powi(2);
        PointSequence::new((1..=n).map(|j| cx(pi2 * (j * j) as f64, 0.0)).collect(), tol).unwrap()
    }

    #[test]
    fn rejects_bad_points() {
        assert!(matches!(PointSequence::new(vec![cx(0.0, 1.0)], 1e-8), Err(Error::NotInHalfPlane { .. })));
        assert!(matches!(
            PointSequence::new(vec![cx(1.0, 1.0), cx(1.0, 1.0)], 1e-8),
            Err(Error::DuplicatePoint { .. })
        ));
    }

    #[test]
    fn blaschke_factor_is_unimodular_on_axis() {
        let zk = cx(0.7, -1.3);
        for w in [-5.0, -0.2, 0.0, 3.0] {
            let v = blaschke_factor(cx(0.0, w), zk);
            assert!((modulus::<f64>(v) - 1.0).abs() < 1e-14);
        }
        assert_eq!(blaschke_factor(zk, zk), cx(0.0, 0.0));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let zk = cx(0.4, 0.9);
        let z = cx(1.1, -0.3);
        let h = 1e-6;
        let fd = (blaschke_factor(z + cx(h, 0.0), zk) - blaschke_factor(z - cx(h, 0.0), zk)) / cx(2.0 * h, 0.0);
        assert!(modulus(fd - blaschke_factor_derivative(z, zk)) < 1e-8);
    }

    #[test]
    fn heat_excluded_product_closed_form() {
        // prod_{j != k} (j^2 - k^2)/(j^2 + k^2) = pi k / sinh(pi k)
        let seq = heat(200, 1e-8)
            .with_tail(TailModel::RealPower { scale: std::f64::consts::PI.powi(2), exponent: 2.0 })
            .unwrap();
        for k in [1usize, 3, 7, 12] {
            let c = b_inf(&seq, k - 1).unwrap();
            let kf = k as f64 * std::f64::consts::PI;
            let exact = (kf / kf.sinh()).ln();
            assert!((c.log_modulus - exact).abs() < 1e-8, "k={k}: {} vs {exact}", c.log_modulus);
            assert!(c.rel_error_bound < 1e-8);
        }
    }

    #[test]
    fn truncated_certificate_flags_large_tails() {
        let seq = heat(40, 1e-3);
        assert!(matches!(b_truncated(&seq, 0, 5), Err(Error::TailBoundExceeded { .. })));
        let v = b_truncated(&seq, 0, 40).unwrap();
        assert_eq!(v.rel_error_bound, 0.0);
    }

    #[test]
    fn kernel_norm_by_quadrature() {
        let q = AxisQuadrature::<f64>::default();
        let w = cx(0.6, 1.7);
        let n2 = axis_lq_norm(|t| modulus(reproducing_kernel(w, cx(0.0, t))), 2.0, &[Feature::new(1.7, 0.6)], &q).unwrap();
        assert!((n2 * n2 - kernel_norm_sq(w)).abs() < 1e-9);
        let c = kernel_lq_constant(2.0, &q).unwrap();
        assert!((c / 0.6 - kernel_norm_sq(w)).abs() < 1e-9);
    }

    #[test]
    fn poisson_kernel_has_unit_mass() {
        let q = AxisQuadrature::<f64>::default();
        let n1 = poisson_lq_norm(cx(0.3, -2.0), 1.0, &q).unwrap();
        assert!((n1 - 1.0).abs() < 1e-9);
    }
}
