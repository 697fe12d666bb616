//! Discrete measures on the right half-plane and their Carleson constants.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hardy::{axis_lq_norm, poisson_kernel, reproducing_kernel};
use crate::linalg::{modulus, op_norm};
use crate::quadrature::{AxisQuadrature, Feature};
use crate::scalar::{log_sum_exp, CMatrix, Cx, Real};

/// Mass attached to an atom.
#[derive(Debug, Clone, PartialEq)]
pub enum AtomWeight<T: Real> {
    Scalar(T),
    /// Positive semidefinite matrix mass, measured through its operator norm.
    Matrix(CMatrix<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom<T: Real> {
    pub point: Cx<T>,
    pub weight: AtomWeight<T>,
}

/// Finite sum of point masses. True masses are the stored masses times `exp(log_scale)`,
/// which lets weights far outside the floating point range be represented.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<T: Real> {
    atoms: Vec<Atom<T>>,
    log_scale: T,
}

fn check_point<T: Real>(i: usize, z: Cx<T>) -> Result<()> {
    if !(z.re > T::zero()) || !z.im.is_finite() {
        return Err(Error::NotInHalfPlane { index: i, re: z.re.as_f64() });
    }
    Ok(())
}

impl<T: Real> DiscreteMeasure<T> {
    /// Scalar atoms with nonnegative finite masses.
    pub fn scalar(points: &[Cx<T>], masses: &[T]) -> Result<Self> {
        if points.len() != masses.len() {
            return Err(Error::DimensionMismatch("points and masses differ in length".into()));
        }
        let mut atoms = Vec::with_capacity(points.len());
        for (i, (&z, &m)) in points.iter().zip(masses).enumerate() {
            check_point(i, z)?;
            if !(m >= T::zero()) || !m.is_finite() {
                return Err(Error::InvalidParameter(format!("mass {i} must be finite and nonnegative")));
            }
            atoms.push(Atom { point: z, weight: AtomWeight::Scalar(m) });
        }
        Ok(Self { atoms, log_scale: T::zero() })
    }

    /// Scalar atoms given through the logarithms of their masses; `-inf` encodes a zero mass.
    pub fn from_log_masses(points: &[Cx<T>], log_masses: &[T]) -> Result<Self> {
        if points.len() != log_masses.len() {
            return Err(Error::DimensionMismatch("points and masses differ in length".into()));
        }
        let mut hi = -T::infinity();
        for &l in log_masses {
            if !(l < T::infinity()) {
                return Err(Error::InvalidParameter("log mass must be finite or -inf".into()));
            }
            hi = hi.max(l);
        }
        let shift = if hi.is_finite() { hi } else { T::zero() };
        let masses: Vec<T> = log_masses.iter().map(|&l| (l - shift).exp()).collect();
        let mut m = Self::scalar(points, &masses)?;
        m.log_scale = shift;
        Ok(m)
    }

    /// Matrix atoms; each mass must be Hermitian up to rounding.
    pub fn matrix(points: &[Cx<T>], masses: Vec<CMatrix<T>>) -> Result<Self> {
        if points.len() != masses.len() {
            return Err(Error::DimensionMismatch("points and masses differ in length".into()));
        }
        let mut atoms = Vec::with_capacity(points.len());
        for (i, (&z, a)) in points.iter().zip(masses).enumerate() {
            check_point(i, z)?;
            if a.nrows() != a.ncols() {
                return Err(Error::DimensionMismatch(format!("matrix mass {i} is not square")));
            }
            let skew = op_norm(&(&a - a.adjoint()));
            if skew > T::lit(1e-10) * op_norm(&a).max(T::one()) {
                return Err(Error::InvalidParameter(format!("matrix mass {i} is not Hermitian")));
            }
            atoms.push(Atom { point: z, weight: AtomWeight::Matrix(a) });
        }
        Ok(Self { atoms, log_scale: T::zero() })
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn log_scale(&self) -> T {
        self.log_scale
    }

    pub fn points(&self) -> Vec<Cx<T>> {
        self.atoms.iter().map(|a| a.point).collect()
    }

    /// Scalar masses relative to `exp(log_scale)`; matrix atoms contribute their operator norm.
    pub fn scaled_masses(&self) -> Vec<T> {
        self.atoms
            .iter()
            .map(|a| match &a.weight {
                AtomWeight::Scalar(m) => *m,
                AtomWeight::Matrix(m) => op_norm(m),
            })
            .collect()
    }

    /// Multiplies every mass by `exp(log_factor)`.
    pub fn scaled_by_log(&self, log_factor: T) -> Self {
        Self { atoms: self.atoms.clone(), log_scale: self.log_scale + log_factor }
    }

    /// Restriction to the atoms whose indices satisfy `keep`.
    pub fn restricted(&self, keep: impl Fn(usize) -> bool) -> Self {
        let atoms = self.atoms.iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, a)| a.clone()).collect();
        Self { atoms, log_scale: self.log_scale }
    }

    /// `log` of the total variation.
    pub fn log_total_mass(&self) -> T {
        let logs: Vec<T> = self.scaled_masses().iter().map(|m| m.ln()).collect();
        log_sum_exp(&logs) + self.log_scale
    }
}

/// Estimation method for a Carleson constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CarlesonMethod {
    /// Supremum of `mu(Q_I) / |I|^alpha` over squares `Q_I` resting on the axis; `alpha >= 1`.
    Rectangle,
    /// Supremum of `(4 pi)^alpha int |k_lambda|^{2 alpha} dmu / ||k_lambda||_{H^2}^{2 alpha}`, that is
    /// `int (4 Re lambda / |z + conj lambda|^2)^alpha dmu(z)`; `alpha >= 1`. A unit atom at `z`
    /// gives `(Re z)^{-alpha}`, the rectangle value.
    Kernel,
    /// `L^{1/(1-alpha)}` norm of the Poisson balayage; `0 < alpha < 1`.
    Balayage,
    /// Total mass; `alpha = 0`.
    FiniteMass,
}

impl CarlesonMethod {
    /// Method used when the caller does not choose one.
    pub fn default_for<T: Real>(alpha: T) -> Self {
        if alpha == T::zero() {
            CarlesonMethod::FiniteMass
        } else if alpha >= T::one() {
            CarlesonMethod::Rectangle
        } else {
            CarlesonMethod::Balayage
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CarlesonMethod::Rectangle => "rectangle",
            CarlesonMethod::Kernel => "kernel",
            CarlesonMethod::Balayage => "balayage",
            CarlesonMethod::FiniteMass => "finite-mass",
        }
    }

    fn admits<T: Real>(self, alpha: T) -> bool {
        match self {
            CarlesonMethod::Rectangle | CarlesonMethod::Kernel => alpha >= T::one(),
            CarlesonMethod::Balayage => alpha > T::zero() && alpha < T::one(),
            CarlesonMethod::FiniteMass => alpha == T::zero(),
        }
    }
}

/// Where the supremum defining a constant was attained.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness<T: Real> {
    /// Box `{0 < Re z < side, |Im z - center| <= half_width}`.
    Rectangle { center: T, side: T, half_width: T, atoms: usize, matrix_sum_norm: Option<T> },
    Kernel { lambda: Cx<T> },
    Balayage { exponent: T },
    Mass,
    Empty,
}

/// Result of a Carleson constant estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlesonReport<T: Real> {
    pub alpha: T,
    /// `exp(log_constant)`; infinite when the value overflows.
    pub constant: T,
    pub log_constant: T,
    pub method: CarlesonMethod,
    pub witness: Witness<T>,
    pub grid_spec: String,
    /// For `0 < alpha < 1`: the rectangle quantity, which is necessary but not sufficient.
    pub rectangle_diagnostic: Option<T>,
}

/// Family of boxes used by [`rectangle_sup`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxShape<T: Real> {
    /// Half of the extent along the axis divided by the height.
    pub half_width_ratio: T,
}

impl<T: Real> BoxShape<T> {
    /// Squares `Q_I` over an interval `I` of length equal to their height.
    pub fn carleson_square() -> Self {
        Self { half_width_ratio: T::lit(0.5) }
    }

    /// Boxes `{Re z < h, |Im z - omega| < h}`.
    pub fn double_width() -> Self {
        Self { half_width_ratio: T::one() }
    }
}

/// Outcome of a box sweep in logarithmic form.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSup<T: Real> {
    pub log_value: T,
    pub center: T,
    pub side: T,
    pub atoms: usize,
    pub heights: usize,
    pub grid_spec: String,
    /// Best box for every tested height, in the order tested.
    pub samples: Vec<BoxSample<T>>,
}

/// Best box at one height of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSample<T: Real> {
    pub height: T,
    pub center: T,
    pub atoms: usize,
    pub log_value: T,
}

const EXACT_HEIGHT_LIMIT: usize = 4096;
const PAIR_HEIGHT_LIMIT: usize = 256;

/// `sup mu(R) / h^alpha` over boxes of height `h` resting on the axis.
///
/// Heights run over a dyadic ladder from a quarter of the smallest real part to four times
/// the size of the configuration, supplemented by heights just above each atom and heights
/// that make a window exactly cover a pair of atoms. For every height the box position is
/// optimised exactly with a sliding window over the atoms sorted by imaginary part.
pub fn rectangle_sup<T: Real>(mu: &DiscreteMeasure<T>, alpha: T, shape: BoxShape<T>) -> BoxSup<T> {
    let masses = mu.scaled_masses();
    let mut idx: Vec<usize> = (0..mu.len()).filter(|&i| masses[i] > T::zero()).collect();
    if idx.is_empty() {
        return BoxSup {
            log_value: -T::infinity(),
            center: T::zero(),
            side: T::zero(),
            atoms: 0,
            heights: 0,
            grid_spec: "empty measure".into(),
            samples: Vec::new(),
        };
    }
    let pts: Vec<Cx<T>> = mu.points();
    idx.sort_by(|&a, &b| pts[a].im.partial_cmp(&pts[b].im).unwrap_or(std::cmp::Ordering::Equal));
    let xs: Vec<T> = idx.iter().map(|&i| pts[i].re).collect();
    let ys: Vec<T> = idx.iter().map(|&i| pts[i].im).collect();
    let ms: Vec<T> = idx.iter().map(|&i| masses[i]).collect();
    let n = xs.len();
    let xmin = xs.iter().copied().fold(T::infinity(), |a, b| a.min(b));
    let xmax = xs.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let spread = ys[n - 1] - ys[0];
    let size = xmax.max(spread / (T::lit(2.0) * shape.half_width_ratio));
    let h_lo = xmin * T::lit(0.25);
    let h_hi = size * T::lit(4.0);
    let mut heights = Vec::new();
    let mut h = h_lo;
    let mut ladder = 0usize;
    while h <= h_hi * (T::one() + T::lit(1e-12).max(T::lit(4.0) * T::eps())) {
        heights.push(h);
        h *= T::lit(2.0);
        ladder += 1;
    }
    // Places each atom strictly inside the box; must survive rounding in the scalar type.
    let bump = T::one() + T::lit(1e-9).max(T::lit(16.0) * T::eps());
    let exact = n <= EXACT_HEIGHT_LIMIT;
    if exact {
        heights.extend(xs.iter().map(|&x| x * bump));
    }
    let pairs = n <= PAIR_HEIGHT_LIMIT;
    if pairs {
        let two_rho = T::lit(2.0) * shape.half_width_ratio;
        for i in 0..n {
            for j in (i + 1)..n {
                heights.push((ys[j] - ys[i]) / two_rho * bump);
            }
        }
    }
    heights.retain(|h| *h > T::zero() && h.is_finite());
    let two_rho = T::lit(2.0) * shape.half_width_ratio;
    let eval = |h: T| -> (T, T, usize) {
        let mut ey = Vec::new();
        let mut em = Vec::new();
        for i in 0..n {
            if xs[i] < h {
                ey.push(ys[i]);
                em.push(ms[i]);
            }
        }
        if ey.is_empty() {
            return (-T::infinity(), T::zero(), 0);
        }
        let mut prefix = Vec::with_capacity(em.len() + 1);
        prefix.push(T::zero());
        for &m in &em {
            let last = *prefix.last().unwrap();
            prefix.push(last + m);
        }
        let width = two_rho * h;
        let mut best = -T::infinity();
        let mut best_center = T::zero();
        let mut best_count = 0;
        let mut j = 0usize;
        for i in 0..ey.len() {
            if j < i {
                j = i;
            }
            while j < ey.len() && ey[j] <= ey[i] + width {
                j += 1;
            }
            let mass = prefix[j] - prefix[i];
            if mass > best {
                best = mass;
                best_center = ey[i] + width * T::lit(0.5);
                best_count = j - i;
            }
        }
        (best.ln() - alpha * h.ln(), best_center, best_count)
    };
    let results: Vec<(T, T, usize)> = heights.par_iter().map(|&h| eval(h)).collect();
    let mut best = 0usize;
    for (i, r) in results.iter().enumerate() {
        if r.0 > results[best].0 {
            best = i;
        }
    }
    let grid_spec = format!(
        "dyadic heights {:e}..{:e} ({} levels){}{}; window half-width {} x height",
        h_lo.as_f64(),
        h_hi.as_f64(),
        ladder,
        if exact { format!(" + {n} atom heights") } else { String::new() },
        if pairs { format!(" + {} pair heights", n * (n - 1) / 2) } else { String::new() },
        shape.half_width_ratio.as_f64()
    );
    let samples = heights
        .iter()
        .zip(&results)
        .map(|(&height, r)| BoxSample { height, center: r.1, atoms: r.2, log_value: r.0 + mu.log_scale() })
        .collect();
    BoxSup {
        samples,
        log_value: results[best].0 + mu.log_scale(),
        center: results[best].1,
        side: heights[best],
        atoms: results[best].2,
        heights: heights.len(),
        grid_spec,
    }
}

/// Poisson balayage `S_mu(omega) = sum m_k p_{z_k}(omega)` with masses relative to `exp(log_scale)`.
pub fn balayage<T: Real>(mu: &DiscreteMeasure<T>, omega: T) -> T {
    let masses = mu.scaled_masses();
    mu.atoms().iter().zip(masses).map(|(a, m)| m * poisson_kernel(a.point, omega)).fold(T::zero(), |a, b| a + b)
}

/// `log ||S_mu||_q` along the axis.
pub fn log_balayage_norm<T: Real>(mu: &DiscreteMeasure<T>, q: T, quad: &AxisQuadrature<T>) -> Result<T> {
    if mu.is_empty() {
        return Ok(-T::infinity());
    }
    let masses = mu.scaled_masses();
    let pts = mu.points();
    let features: Vec<Feature<T>> = pts.iter().map(|z| Feature::new(z.im, z.re)).collect();
    let quad = quad.with_decay(T::lit(2.0));
    let f = |w: T| {
        let mut acc = T::zero();
        for (z, &m) in pts.iter().zip(&masses) {
            acc += m * poisson_kernel(*z, w);
        }
        acc
    };
    let total: T = masses.iter().copied().fold(T::zero(), |a, b| a + b);
    if total == T::zero() {
        return Ok(-T::infinity());
    }
    // Normalise so that the absolute tolerance acts on a function of unit total mass.
    let normalised = |w: T| f(w) / total;
    let norm = axis_lq_norm(normalised, q, &features, &quad)?;
    Ok(norm.ln() + total.ln() + mu.log_scale())
}

fn kernel_sup<T: Real>(mu: &DiscreteMeasure<T>, alpha: T) -> (T, Cx<T>, usize) {
    let masses = mu.scaled_masses();
    let pts = mu.points();
    let mut cands = Vec::new();
    for z in &pts {
        for m in -3i32..=8 {
            cands.push(Cx::new(z.re * T::lit(2f64.powi(-m)), z.im));
        }
    }
    let vals: Vec<T> = cands
        .par_iter()
        .map(|&lam| {
            let logs: Vec<T> = pts
                .iter()
                .zip(&masses)
                .map(|(z, &m)| m.ln() + alpha * (T::lit(4.0) * lam.re / (*z + lam.conj()).norm_sqr()).ln())
                .collect();
            log_sum_exp(&logs)
        })
        .collect();
    let mut best = 0usize;
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[best] {
            best = i;
        }
    }
    (vals[best] + mu.log_scale(), cands[best], cands.len())
}

/// Estimates the `alpha`-Carleson constant of `mu` with the requested method.
pub fn carleson_constant<T: Real>(
    mu: &DiscreteMeasure<T>,
    alpha: T,
    method: Option<CarlesonMethod>,
    quad: &AxisQuadrature<T>,
) -> Result<CarlesonReport<T>> {
    if !(alpha >= T::zero()) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be nonnegative")));
    }
    let method = method.unwrap_or_else(|| CarlesonMethod::default_for(alpha));
    if !method.admits(alpha) {
        return Err(Error::MethodMismatch { alpha: alpha.as_f64(), method: method.name() });
    }
    let (log_constant, witness, grid_spec, diag) = match method {
        CarlesonMethod::FiniteMass => (mu.log_total_mass(), Witness::Mass, "total variation".to_string(), None),
        CarlesonMethod::Rectangle => {
            let s = rectangle_sup(mu, alpha, BoxShape::carleson_square());
            let matrix_sum_norm = witness_matrix_norm(mu, &s, BoxShape::carleson_square());
            let w = if s.atoms == 0 {
                Witness::Empty
            } else {
                Witness::Rectangle {
                    center: s.center,
                    side: s.side,
                    half_width: s.side * T::lit(0.5),
                    atoms: s.atoms,
                    matrix_sum_norm,
                }
            };
            (s.log_value, w, s.grid_spec, None)
        }
        CarlesonMethod::Kernel => {
            if mu.is_empty() {
                (-T::infinity(), Witness::Empty, "no atoms".into(), None)
            } else {
                let (v, lam, count) = kernel_sup(mu, alpha);
                (v, Witness::Kernel { lambda: lam }, format!("{count} kernel centres: atoms dilated by 2^-8..2^3"), None)
            }
        }
        CarlesonMethod::Balayage => {
            let q = T::one() / (T::one() - alpha);
            let v = log_balayage_norm(mu, q, quad)?;
            let r = rectangle_sup(mu, alpha, BoxShape::carleson_square());
            (v, Witness::Balayage { exponent: q }, format!("axis quadrature, L^{} norm", q.as_f64()), Some(r.log_value.exp()))
        }
    };
    Ok(CarlesonReport {
        alpha,
        constant: log_constant.exp(),
        log_constant,
        method,
        witness,
        grid_spec,
        rectangle_diagnostic: diag,
    })
}

fn witness_matrix_norm<T: Real>(mu: &DiscreteMeasure<T>, s: &BoxSup<T>, shape: BoxShape<T>) -> Option<T> {
    let mut sum: Option<CMatrix<T>> = None;
    let half = s.side * shape.half_width_ratio;
    for a in mu.atoms() {
        if let AtomWeight::Matrix(m) = &a.weight {
            if a.point.re < s.side && (a.point.im - s.center).abs() <= half * (T::one() + T::lit(1e-12).max(T::lit(4.0) * T::eps())) {
                sum = Some(match sum {
                    None => m.clone(),
                    Some(acc) => acc + m,
                });
            }
        }
    }
    sum.map(|m| op_norm(&m) * mu.log_scale().exp())
}

/// Two-sided estimate of the norm of the embedding `H^p -> L^{alpha p}(mu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingEstimate<T: Real> {
    /// Tested on `k_lambda^{2/p}` with `lambda` at the atoms.
    pub lower: T,
    /// `Carl_alpha(mu)^{1/(alpha p)}`, equivalent to the norm up to constants.
    pub upper: T,
    pub report: CarlesonReport<T>,
}

/// Lower and upper estimates of the embedding norm for `alpha > 0`.
pub fn embedding_norm_estimate<T: Real>(
    mu: &DiscreteMeasure<T>,
    alpha: T,
    p: T,
    quad: &AxisQuadrature<T>,
) -> Result<EmbeddingEstimate<T>> {
    if !(alpha > T::zero()) || !(p >= T::one()) {
        return Err(Error::InvalidParameter("embedding needs alpha > 0 and p >= 1".into()));
    }
    let report = carleson_constant(mu, alpha, None, quad)?;
    let e = T::one() / (alpha * p);
    let upper = (report.log_constant * e).exp();
    let masses = mu.scaled_masses();
    let pts = mu.points();
    let mut best = -T::infinity();
    for &lam in &pts {
        let mut terms = Vec::with_capacity(pts.len());
        for (z, &m) in pts.iter().zip(&masses) {
            if m > T::zero() {
                terms.push(m.ln() + T::lit(2.0) * alpha * modulus(reproducing_kernel(lam, *z)).ln());
            }
        }
        let log_num = (log_sum_exp(&terms) + mu.log_scale()) * e;
        let log_den = (T::one() / (T::lit(4.0) * T::PI() * lam.re)).ln() / p;
        best = best.max(log_num - log_den);
    }
    Ok(EmbeddingEstimate { lower: best.exp(), upper, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn quad() -> AxisQuadrature<f64> {
        AxisQuadrature::default()
    }

    #[test]
    fn single_unit_atom_rectangle() {
        let z0 = cx(0.37, -1.2);
        let mu = DiscreteMeasure::scalar(&[z0], &[1.0]).unwrap();
        let r = carleson_constant(&mu, 1.0, None, &quad()).unwrap();
        assert!(r.constant <= 1.0 / z0.re && r.constant >= 0.5 / z0.re);
        assert!((r.constant * z0.re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn empty_and_zero_measures() {
        let mu = DiscreteMeasure::<f64>::scalar(&[], &[]).unwrap();
        let r = carleson_constant(&mu, 1.0, None, &quad()).unwrap();
        assert_eq!(r.constant, 0.0);
        let mu = DiscreteMeasure::scalar(&[cx(1.0, 0.0)], &[0.0]).unwrap();
        assert_eq!(carleson_constant(&mu, 2.0, None, &quad()).unwrap().constant, 0.0);
    }

    #[test]
    fn method_mismatch() {
        let mu = DiscreteMeasure::scalar(&[cx(1.0, 0.0)], &[1.0]).unwrap();
        assert!(matches!(
            carleson_constant(&mu, 0.5, Some(CarlesonMethod::Rectangle), &quad()),
            Err(Error::MethodMismatch { .. })
        ));
        assert!(matches!(
            carleson_constant(&mu, 2.0, Some(CarlesonMethod::Balayage), &quad()),
            Err(Error::MethodMismatch { .. })
        ));
    }

    #[test]
    fn finite_mass_is_total_variation() {
        let mu = DiscreteMeasure::scalar(&[cx(1.0, 0.0), cx(2.0, 3.0)], &[0.25, 0.5]).unwrap();
        let r = carleson_constant(&mu, 0.0, None, &quad()).unwrap();
        assert!((r.constant - 0.75).abs() < 1e-14);
    }

    #[test]
    fn balayage_of_single_atom_scales_exactly() {
        // ||w p_z||_q = w x^{-alpha} ||p_1||_q with q = 1/(1-alpha)
        let alpha = 0.5;
        let c1 = {
            let mu = DiscreteMeasure::scalar(&[cx(1.0, 0.0)], &[1.0]).unwrap();
            carleson_constant(&mu, alpha, None, &quad()).unwrap().constant
        };
        let mu = DiscreteMeasure::scalar(&[cx(4.0, 2.0)], &[3.0]).unwrap();
        let r = carleson_constant(&mu, alpha, None, &quad()).unwrap();
        assert!((r.constant - 3.0 * 4f64.powf(-alpha) * c1).abs() < 1e-8);
        // q = 2 closed form: ||p_1||_2 = (2 pi)^{-1/2}
        assert!((c1 - (2.0 * std::f64::consts::PI).powf(-0.5)).abs() < 1e-9);
        assert!(r.rectangle_diagnostic.is_some());
    }

    #[test]
    fn log_masses_beyond_float_range() {
        let pts = [cx(1.0, 0.0), cx(2.0, 0.0)];
        let mu = DiscreteMeasure::from_log_masses(&pts, &[2000.0, 1990.0]).unwrap();
        let r = carleson_constant(&mu, 1.0, None, &quad()).unwrap();
        assert!(r.constant.is_infinite());
        assert!((r.log_constant - (2000.0 - 1f64.ln())).abs() < 1e-3);
    }

    #[test]
    fn kernel_and_rectangle_agree_up_to_constant() {
        let pts: Vec<_> = (1..6).map(|k| cx(0.2 * k as f64, k as f64 * 0.7)).collect();
        let mu = DiscreteMeasure::scalar(&pts, &[1.0, 0.5, 2.0, 0.1, 1.0]).unwrap();
        let r = carleson_constant(&mu, 1.0, Some(CarlesonMethod::Rectangle), &quad()).unwrap();
        let k = carleson_constant(&mu, 1.0, Some(CarlesonMethod::Kernel), &quad()).unwrap();
        let ratio = r.constant / k.constant;
        assert!(ratio > 0.01 && ratio < 100.0, "ratio {ratio}");
    }

    #[test]
    fn matrix_atoms_use_operator_norm() {
        let a = CMatrix::from_row_slice(2, 2, &[cx(2.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)]);
        let mu = DiscreteMeasure::matrix(&[cx(1.0, 0.0)], vec![a]).unwrap();
        let r = carleson_constant(&mu, 1.0, None, &quad()).unwrap();
        assert!((r.constant - 2.0).abs() < 1e-6);
        match r.witness {
            Witness::Rectangle { matrix_sum_norm: Some(v), .. } => assert!((v - 2.0).abs() < 1e-12),
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn embedding_bounds_single_atom() {
        let mu = DiscreteMeasure::scalar(&[cx(0.8, 0.3)], &[2.0]).unwrap();
        let e = embedding_norm_estimate(&mu, 1.0, 2.0, &quad()).unwrap();
        let ratio = e.upper / e.lower;
        assert!((1.0..=10.0).contains(&ratio), "ratio {ratio}");
        assert!((ratio - (4.0 * std::f64::consts::PI).sqrt()).abs() < 1e-5);
    }
}
