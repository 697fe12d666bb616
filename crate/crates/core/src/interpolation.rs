//! Interpolation constants, angles between kernel subspaces and explicit interpolants.
//!
//! A problem asks for `f` in a vector valued Hardy space with `G_k f(z_k) = a_k`. The routes
//! below estimate the minimal norm constant through Carleson constants of scalar measures
//! assembled from the data. Every route reports its criterion in logarithmic form as well,
//! because the atom weights of realistic sequences leave the floating point range.

use nalgebra::Cholesky;
use rayon::prelude::*;

use crate::carleson::{carleson_constant, CarlesonMethod, CarlesonReport, DiscreteMeasure};
use crate::error::{Error, Result};
use crate::hardy::{b_inf, blaschke_factor, pseudo_hyperbolic, PointSequence};
use crate::linalg::{
    condition_number, hermitian_condition, modulus, op_norm, orthonormal_columns, projector, psd_sqrt, solve, svd,
};
use crate::potapov::{PotapovProduct, TangentialData, FACTOR_CONDITION_LIMIT};
use crate::quadrature::{AxisQuadrature, Feature};
use crate::scalar::{log_sum_exp, CMatrix, CVector, Cx, Real};
use crate::weights::{
    decay_order, interval_family, log_polar_grid, matrix_a2_check, scalar_ap_check, AxisMatrixWeight, MatrixWeight,
    ScalarWeight, WeightSpec,
};

/// Block Gram matrices above this condition number are rejected.
pub const GRAM_CONDITION_LIMIT: f64 = 1e14;
/// Distance below which the factored interpolant switches to a limit procedure.
pub const SINGULAR_RADIUS: f64 = 1e-6;

/// `s' = s / (s - 1)`, infinite for `s = 1`.
pub fn dual_exponent<T: Real>(s: T) -> T {
    if s == T::one() {
        T::infinity()
    } else {
        s / (s - T::one())
    }
}

/// Tangential interpolation problem `G_k f(z_k) = a_k` in `H^p` with `l^s` data.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationProblem<T: Real> {
    pub seq: PointSequence<T>,
    pub data: TangentialData<T>,
    pub p: T,
    pub s: T,
    pub weight: Option<WeightSpec<T>>,
    pub targets: Option<Vec<CVector<T>>>,
}

impl<T: Real> InterpolationProblem<T> {
    pub fn new(seq: PointSequence<T>, data: TangentialData<T>, p: T, s: T) -> Result<Self> {
        if seq.len() != data.len() {
            return Err(Error::DimensionMismatch(format!("{} points but {} matrices", seq.len(), data.len())));
        }
        if !(p >= T::one()) || !p.is_finite() || !(s >= T::one()) || !s.is_finite() {
            return Err(Error::InvalidParameter("p and s must lie in [1, inf)".into()));
        }
        Ok(Self { seq, data, p, s, weight: None, targets: None })
    }

    pub fn with_weight(mut self, weight: WeightSpec<T>) -> Result<Self> {
        match &weight {
            WeightSpec::Scalar(w) => w.validate()?,
            WeightSpec::Matrix(w) => {
                w.validate()?;
                if w.dim() != self.data.dim() {
                    return Err(Error::DimensionMismatch("weight and tangential data differ in dimension".into()));
                }
            }
        }
        self.weight = Some(weight);
        Ok(self)
    }

    /// Attaches targets, which must lie in `J_k = range G_k`.
    pub fn with_targets(mut self, targets: Vec<CVector<T>>) -> Result<Self> {
        if targets.len() != self.len() {
            return Err(Error::DimensionMismatch(format!("{} targets for {} points", targets.len(), self.len())));
        }
        for (k, a) in targets.iter().enumerate() {
            if a.len() != self.dim() {
                return Err(Error::DimensionMismatch(format!("target {k} has length {}", a.len())));
            }
            let j = &self.data.entry(k).j_frame;
            let defect = (a - j * (j.adjoint() * a)).norm();
            if defect > T::lit(1e-10) * a.norm().max(T::one()) {
                return Err(Error::StructureViolation { index: k, defect: defect.as_f64() });
            }
        }
        self.targets = Some(targets);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    /// The first `n` points with their data; the tail model is dropped.
    pub fn truncate(&self, n: usize) -> Self {
        Self {
            seq: self.seq.truncate(n),
            data: self.data.truncate(n),
            p: self.p,
            s: self.s,
            weight: self.weight.clone(),
            targets: self.targets.as_ref().map(|t| t[..n.min(t.len())].to_vec()),
        }
    }

    /// `alpha_k` with `G_k^* G_k = alpha_k^2 P_{I_k}`, or the first index where this fails.
    pub fn projection_multiples(&self, tol: T) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(self.len());
        for (k, e) in self.data.entries().iter().enumerate() {
            let alpha = e.norm();
            let diff = e.g.adjoint() * &e.g - e.i_projector() * Cx::new(alpha * alpha, T::zero());
            let defect = op_norm(&diff) / (alpha * alpha);
            if defect > tol {
                return Err(Error::StructureViolation { index: k, defect: defect.as_f64() });
            }
            out.push(alpha);
        }
        Ok(out)
    }
}

/// How an angle was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleMethod {
    /// Whitened cross Gram of normalised kernel generators.
    Gram,
    /// `prod_{j != k} |b_j(z_k)|`, exact for scalar data.
    BlaschkeProduct,
}

/// Principal angle between `k_{z_k} I_k` (or a subspace of it) and the span of the other kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleEntry<T: Real> {
    pub index: usize,
    /// Angle in `(0, pi/2]`.
    pub angle: T,
    pub sin: T,
    /// `ln sin`, meaningful when `sin` underflows.
    pub log_sin: T,
    /// Condition number of the normalised Gram matrix used.
    pub gram_condition: T,
    /// Number of other points spanning the comparison subspace.
    pub span_size: usize,
    /// The comparison subspace was empty and the angle was set to `pi/2`.
    pub empty_span: bool,
    pub method: AngleMethod,
}

impl<T: Real> AngleEntry<T> {
    fn from_log_sin(index: usize, log_sin: T, cond: T, span_size: usize, method: AngleMethod) -> Self {
        let log_sin = log_sin.min(T::zero());
        let sin = log_sin.exp();
        Self { index, angle: sin.asin(), sin, log_sin, gram_condition: cond, span_size, empty_span: false, method }
    }

    fn empty(index: usize, method: AngleMethod) -> Self {
        Self {
            index,
            angle: T::FRAC_PI_2(),
            sin: T::one(),
            log_sin: T::zero(),
            gram_condition: T::one(),
            span_size: 0,
            empty_span: true,
            method,
        }
    }
}

/// Angles for every index of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleReport<T: Real> {
    pub entries: Vec<AngleEntry<T>>,
    /// Largest Gram condition number met.
    pub gram_condition: T,
}

/// Generator `k_z v` normalised to unit norm, stored as the point and a unit vector.
type Generator<T> = (Cx<T>, CVector<T>);

fn frame_generators<T: Real>(z: Cx<T>, frame: &CMatrix<T>) -> Vec<Generator<T>> {
    (0..frame.ncols()).map(|c| (z, frame.column(c).into_owned())).collect()
}

/// `<g_j, g_i>` for normalised generators: `2 sqrt(x_i x_j) v_i^* v_j / (z_i + conj z_j)`.
fn gram<T: Real>(gens: &[Generator<T>]) -> CMatrix<T> {
    let n = gens.len();
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (zi, vi) = &gens[i];
            let (zj, vj) = &gens[j];
            let inner = vi.dotc(vj);
            let scale = T::lit(2.0) * (zi.re * zj.re).sqrt();
            g[(i, j)] = inner * scale / (*zi + zj.conj());
        }
    }
    g
}

/// Sine of the smallest principal angle between the spans of `target` and `others`.
///
/// With the full Gram ordered as `[others, target]` and `L` its Cholesky factor, the trailing
/// block `L_22` factors the Schur complement, so `sin = sigma_min(L_t^{-1} L_22)` where `L_t`
/// is the Cholesky factor of the target block alone. This avoids forming `1 - cos^2`.
pub fn kernel_block_sin<T: Real>(target: &[Generator<T>], others: &[Generator<T>]) -> Result<(T, T)> {
    if target.is_empty() {
        return Err(Error::InvalidParameter("target subspace is empty".into()));
    }
    if others.is_empty() {
        return Ok((T::one(), T::one()));
    }
    let limit = T::lit(GRAM_CONDITION_LIMIT);
    let g_t = gram(target);
    let g_o = gram(others);
    for block in [&g_t, &g_o] {
        let c = hermitian_condition(block);
        if !(c <= limit) {
            return Err(Error::DegenerateGram { condition: c.as_f64() });
        }
    }
    let mut all: Vec<Generator<T>> = others.to_vec();
    all.extend_from_slice(target);
    let g = gram(&all);
    let cond = hermitian_condition(&g);
    let degenerate = || Error::DegenerateGram { condition: cond.as_f64() };
    let l = Cholesky::new(g).ok_or_else(degenerate)?.l();
    let lt = Cholesky::new(g_t).ok_or_else(degenerate)?.l();
    let (no, nt) = (others.len(), target.len());
    let l22 = l.view((no, no), (nt, nt)).into_owned();
    let m = lt.solve_lower_triangular(&l22).ok_or_else(degenerate)?;
    let sigma = svd(&m).sigma;
    let sin = sigma.last().copied().unwrap_or(T::zero()).min(T::one());
    Ok((sin, cond))
}

fn in_ball<T: Real>(seq: &PointSequence<T>, k: usize, j: usize, localization: Option<T>) -> bool {
    match localization {
        None => true,
        Some(r) => pseudo_hyperbolic(seq.point(j), seq.point(k)) < r * T::lit(0.5),
    }
}

fn other_generators<T: Real>(
    seq: &PointSequence<T>,
    data: &TangentialData<T>,
    k: usize,
    localization: Option<T>,
) -> (Vec<Generator<T>>, usize) {
    let mut gens = Vec::new();
    let mut count = 0;
    for j in 0..seq.len() {
        if j != k && in_ball(seq, k, j, localization) {
            gens.extend(frame_generators(seq.point(j), &data.entry(j).i_frame));
            count += 1;
        }
    }
    (gens, count)
}

fn check_localization<T: Real>(localization: Option<T>) -> Result<()> {
    if let Some(r) = localization {
        if !(r > T::zero()) {
            return Err(Error::InvalidParameter("localisation radius must be positive".into()));
        }
    }
    Ok(())
}

fn angle_from_generators<T: Real>(
    k: usize,
    target: &[Generator<T>],
    others: &[Generator<T>],
    count: usize,
) -> Result<AngleEntry<T>> {
    if count == 0 {
        return Ok(AngleEntry::empty(k, AngleMethod::Gram));
    }
    let (sin, cond) = kernel_block_sin(target, others)?;
    if !(sin > T::zero()) {
        return Err(Error::DegenerateGram { condition: cond.as_f64() });
    }
    Ok(AngleEntry::from_log_sin(k, sin.ln(), cond, count, AngleMethod::Gram))
}

/// Angle between `k_{z_k} I_k` and the span of `k_{z_j} I_j` over the other stored points,
/// restricted to `d(z_j, z_k) < r/2` in the pseudo-hyperbolic metric when `localization = Some(r)`.
pub fn subspace_angle<T: Real>(
    seq: &PointSequence<T>,
    data: &TangentialData<T>,
    k: usize,
    localization: Option<T>,
) -> Result<AngleEntry<T>> {
    check_localization(localization)?;
    if k >= seq.len() || seq.len() != data.len() {
        return Err(Error::InvalidParameter(format!("index {k} out of range")));
    }
    let target = frame_generators(seq.point(k), &data.entry(k).i_frame);
    let (others, count) = other_generators(seq, data, k, localization);
    angle_from_generators(k, &target, &others, count)
}

/// Angle between `k_{z_k} span{v}` and the span of the other kernels.
pub fn direction_angle<T: Real>(
    seq: &PointSequence<T>,
    data: &TangentialData<T>,
    k: usize,
    v: &CVector<T>,
    localization: Option<T>,
) -> Result<AngleEntry<T>> {
    check_localization(localization)?;
    let norm = v.norm();
    if !(norm > T::zero()) {
        return Err(Error::InvalidParameter("direction must be nonzero".into()));
    }
    let target = vec![(seq.point(k), v.map(|c| c.unscale(norm)))];
    let (others, count) = other_generators(seq, data, k, localization);
    angle_from_generators(k, &target, &others, count)
}

/// Scalar angle through the excluded Blaschke product, which includes a modelled tail.
pub fn product_angle<T: Real>(seq: &PointSequence<T>, k: usize, localization: Option<T>) -> Result<AngleEntry<T>> {
    check_localization(localization)?;
    match localization {
        None => {
            if seq.len() <= 1 && seq.tail().is_none() {
                return Ok(AngleEntry::empty(k, AngleMethod::BlaschkeProduct));
            }
            let b = b_inf(seq, k)?;
            let count = seq.len() - 1 + usize::from(seq.tail().is_some());
            Ok(AngleEntry::from_log_sin(k, b.log_modulus, T::one(), count, AngleMethod::BlaschkeProduct))
        }
        Some(_) => {
            let zk = seq.point(k);
            let mut log_sin = T::zero();
            let mut count = 0;
            for j in 0..seq.len() {
                if j != k && in_ball(seq, k, j, localization) {
                    log_sin += modulus(blaschke_factor(zk, seq.point(j))).ln();
                    count += 1;
                }
            }
            if count == 0 {
                return Ok(AngleEntry::empty(k, AngleMethod::BlaschkeProduct));
            }
            Ok(AngleEntry::from_log_sin(k, log_sin, T::one(), count, AngleMethod::BlaschkeProduct))
        }
    }
}

/// Angles for all indices; scalar data use the exact product formula.
pub fn angle_report<T: Real>(
    seq: &PointSequence<T>,
    data: &TangentialData<T>,
    localization: Option<T>,
) -> Result<AngleReport<T>> {
    let scalar = data.dim() == 1;
    let entries: Vec<AngleEntry<T>> = (0..seq.len())
        .into_par_iter()
        .map(|k| if scalar { product_angle(seq, k, localization) } else { subspace_angle(seq, data, k, localization) })
        .collect::<Result<Vec<_>>>()?;
    let gram_condition = entries.iter().map(|e| e.gram_condition).fold(T::one(), |a, b| a.max(b));
    Ok(AngleReport { entries, gram_condition })
}

/// Estimation route for the interpolation constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    AngleCarleson,
    General,
    S1Sup,
    ThetaCarleson,
    WeightedP2,
    ApWeighted,
    Sobolev,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::AngleCarleson => "angle-carleson",
            Route::General => "general-angle",
            Route::S1Sup => "s1-sup",
            Route::ThetaCarleson => "theta-carleson",
            Route::WeightedP2 => "weighted-p2",
            Route::ApWeighted => "ap-weighted",
            Route::Sobolev => "sobolev",
        }
    }
}

/// Numerical options shared by the routes.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteOptions<T: Real> {
    pub quad: AxisQuadrature<T>,
    /// Pseudo-hyperbolic localisation radius for the angles.
    pub localization: Option<T>,
    pub carleson_method: Option<CarlesonMethod>,
    /// Largest accepted matrix A2 constant of the conjugated weight.
    pub a2_bound: T,
    /// Largest accepted scalar A_p constant.
    pub ap_bound: T,
    /// Dyadic levels of the probe grids used by the weight checks.
    pub grid_levels: i32,
    /// Tolerance of the projection multiple test.
    pub structure_tol: T,
}

impl<T: Real> Default for RouteOptions<T> {
    fn default() -> Self {
        Self {
            quad: AxisQuadrature::default(),
            localization: None,
            carleson_method: None,
            a2_bound: T::lit(1e4),
            ap_bound: T::lit(1e4),
            grid_levels: 3,
            structure_tol: T::lit(1e-10),
        }
    }
}

/// Estimate of the interpolation constant.
///
/// `criterion` is the quantity whose finiteness the route characterises: a Carleson constant
/// or, for the `s = 1` route, a supremum. `value_*` is the corresponding constant estimate,
/// `criterion^{1/s'}` for the Carleson routes. Both bounds coincide: the equivalence
/// constants are not quantified.
#[derive(Debug, Clone, PartialEq)]
pub struct MEstimate<T: Real> {
    pub route: Route,
    pub value_lower: T,
    pub value_upper: T,
    pub log_value: T,
    pub criterion: T,
    pub log_criterion: T,
    pub carleson_report: Option<CarlesonReport<T>>,
    /// `ln` of the atom masses of the assembled measure, or of the `s = 1` summands.
    pub log_atom_weights: Vec<T>,
    pub angles: Option<AngleReport<T>>,
    /// Upper bound built with `||G_k^{-1}||` (general route only).
    pub simple_upper_bound: Option<T>,
    pub log_simple_upper_bound: Option<T>,
    /// Index attaining the supremum (`s = 1` route).
    pub witness_index: Option<usize>,
    /// A2 or A_p constant found by the precondition check.
    pub weight_constant: Option<T>,
    /// Largest relative error certificate of the infinite excluded products used.
    pub tail_certificate: T,
}

impl<T: Real> MEstimate<T> {
    fn new(route: Route, log_criterion: T, root: T, log_atom_weights: Vec<T>) -> Self {
        let log_value = log_criterion * root;
        let value = log_value.exp();
        Self {
            route,
            value_lower: value,
            value_upper: value,
            log_value,
            criterion: log_criterion.exp(),
            log_criterion,
            carleson_report: None,
            log_atom_weights,
            angles: None,
            simple_upper_bound: None,
            log_simple_upper_bound: None,
            witness_index: None,
            weight_constant: None,
            tail_certificate: T::zero(),
        }
    }
}

fn carleson_route<T: Real>(
    route: Route,
    points: &[Cx<T>],
    log_w: Vec<T>,
    alpha: T,
    root: T,
    opts: &RouteOptions<T>,
) -> Result<MEstimate<T>> {
    let mu = DiscreteMeasure::from_log_masses(points, &log_w)?;
    let rep = carleson_constant(&mu, alpha, opts.carleson_method, &opts.quad)?;
    let mut est = MEstimate::new(route, rep.log_constant, root, log_w);
    est.carleson_report = Some(rep);
    Ok(est)
}

fn require_open_exponents<T: Real>(prob: &InterpolationProblem<T>) -> Result<()> {
    if !(prob.p > T::one()) || !(prob.s > T::one()) {
        return Err(Error::InvalidParameter("route needs 1 < p, s < inf".into()));
    }
    Ok(())
}

/// Carleson route for `G_k^* G_k = alpha_k^2 P_{I_k}`:
/// `Carl_{s'/p'}(sum (Re z_k)^{s'} / (alpha_k sin angle_k)^{s'} delta_{z_k})^{1/s'}`.
pub fn m_estimate_angle_route<T: Real>(prob: &InterpolationProblem<T>, opts: &RouteOptions<T>) -> Result<MEstimate<T>> {
    require_open_exponents(prob)?;
    let alphas = prob.projection_multiples(opts.structure_tol)?;
    let angles = angle_report(&prob.seq, &prob.data, opts.localization)?;
    let sp = dual_exponent(prob.s);
    let pp = dual_exponent(prob.p);
    let log_w: Vec<T> = (0..prob.len())
        .map(|k| sp * (prob.seq.point(k).re.ln() - alphas[k].ln() - angles.entries[k].log_sin))
        .collect();
    let mut est = carleson_route(Route::AngleCarleson, prob.seq.points(), log_w, sp / pp, T::one() / sp, opts)?;
    est.tail_certificate = tail_certificate(&prob.seq, &angles);
    est.angles = Some(angles);
    Ok(est)
}

fn tail_certificate<T: Real>(seq: &PointSequence<T>, angles: &AngleReport<T>) -> T {
    if seq.tail().is_none() {
        return T::zero();
    }
    angles
        .entries
        .iter()
        .filter(|e| e.method == AngleMethod::BlaschkeProduct)
        .filter_map(|e| b_inf(seq, e.index).ok().map(|b| b.rel_error_bound))
        .fold(T::zero(), |a, b| a.max(b))
}

/// Rows `g_{k,i}^*` of `G_k` and the vectors `G_k^{-1} e_i`, either as given when `G_k` has
/// the form of `d_k` leading rows over zeros, or after a left unitary rotation to that form.
fn row_form<T: Real>(data: &TangentialData<T>, k: usize) -> (Vec<CVector<T>>, Vec<CVector<T>>) {
    let e = data.entry(k);
    let n = data.dim();
    let d = e.rank;
    let scale = e.norm();
    let trailing_zero = (d..n).all(|r| e.g.row(r).iter().all(|c| modulus(*c) <= scale * data.rank_tol()));
    let leading_full = {
        let lead = e.g.rows(0, d).into_owned();
        crate::linalg::numerical_rank(&svd(&lead).sigma, data.rank_tol()) == d
    };
    if trailing_zero && leading_full {
        let rows = (0..d).map(|i| e.g.row(i).adjoint()).collect();
        let inv = (0..d).map(|i| e.inverse.column(i).into_owned()).collect();
        return (rows, inv);
    }
    let s = svd(&e.g);
    let rows = (0..d).map(|i| s.v.column(i) * Cx::new(s.sigma[i], T::zero())).collect();
    let inv = (0..d).map(|i| &e.inverse * s.u.column(i)).collect();
    (rows, inv)
}

/// Direction in `span{g_1..g_d}` orthogonal to the other rows, spanning `V^G_{k,i}`.
fn row_direction<T: Real>(rows: &[CVector<T>], i: usize) -> CVector<T> {
    let others: Vec<CVector<T>> = rows.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| r.clone()).collect();
    if others.is_empty() {
        return rows[i].clone();
    }
    let m = CMatrix::from_columns(&others);
    let f = orthonormal_columns(&m, T::lit(1e-12));
    &rows[i] - &f * (f.adjoint() * &rows[i])
}

/// Route for general `G_k` through per-row angles, with the simpler `||G_k^{-1}||` upper bound.
pub fn m_estimate_general<T: Real>(prob: &InterpolationProblem<T>, opts: &RouteOptions<T>) -> Result<MEstimate<T>> {
    require_open_exponents(prob)?;
    let sp = dual_exponent(prob.s);
    let pp = dual_exponent(prob.p);
    let scalar = prob.dim() == 1;
    let per_k: Vec<T> = (0..prob.len())
        .into_par_iter()
        .map(|k| -> Result<T> {
            let x = prob.seq.point(k).re;
            let (rows, invs) = row_form(&prob.data, k);
            let mut terms = Vec::with_capacity(rows.len());
            for (i, inv) in invs.iter().enumerate().take(rows.len()) {
                let ang = if scalar {
                    product_angle(&prob.seq, k, opts.localization)?
                } else {
                    direction_angle(&prob.seq, &prob.data, k, &row_direction(&rows, i), opts.localization)?
                };
                terms.push(T::lit(2.0) * (x.ln() + inv.norm().ln() - ang.log_sin));
            }
            Ok(sp * T::lit(0.5) * log_sum_exp(&terms))
        })
        .collect::<Result<Vec<T>>>()?;
    let mut est = carleson_route(Route::General, prob.seq.points(), per_k, sp / pp, T::one() / sp, opts)?;
    let angles = angle_report(&prob.seq, &prob.data, opts.localization)?;
    let simple: Vec<T> = (0..prob.len())
        .map(|k| {
            sp * (prob.seq.point(k).re.ln() + prob.data.entry(k).inverse_norm().ln() - angles.entries[k].log_sin)
        })
        .collect();
    let mu = DiscreteMeasure::from_log_masses(prob.seq.points(), &simple)?;
    let rep = carleson_constant(&mu, sp / pp, opts.carleson_method, &opts.quad)?;
    let log_simple = rep.log_constant / sp;
    est.simple_upper_bound = Some(log_simple.exp());
    est.log_simple_upper_bound = Some(log_simple);
    est.tail_certificate = tail_certificate(&prob.seq, &angles);
    est.angles = Some(angles);
    Ok(est)
}

/// `ln ||(G_k^{-1})^* Theta^I(z_k)||` and `ln |b_{inf,k}|` for every index, with the largest
/// tail certificate. Stored points beyond the last carry no tangential data; they enter
/// through `b_{inf,k}` only, as full rank constraints would.
fn theta_terms<T: Real>(prob: &InterpolationProblem<T>) -> Result<(Vec<T>, Vec<T>, T)> {
    let theta = PotapovProduct::for_sequence(&prob.seq, &prob.data.i_chain())?;
    let rows: Vec<(T, T, T)> = (0..prob.len())
        .into_par_iter()
        .map(|k| -> Result<(T, T, T)> {
            let zk = prob.seq.point(k);
            let m = prob.data.entry(k).inverse.adjoint() * theta.evaluate(zk);
            let b = b_inf(&prob.seq, k)?;
            Ok((op_norm(&m).ln(), b.log_modulus, b.rel_error_bound))
        })
        .collect::<Result<Vec<_>>>()?;
    let cert = rows.iter().map(|r| r.2).fold(T::zero(), |a, b| a.max(b));
    Ok((rows.iter().map(|r| r.0).collect(), rows.iter().map(|r| r.1).collect(), cert))
}

/// `s = 1` route: `sup_k (Re z_k)^{1/p} / |b_{inf,k}| ||(G_k^{-1})^* Theta^I(z_k)||`.
pub fn m_s1_route<T: Real>(prob: &InterpolationProblem<T>) -> Result<MEstimate<T>> {
    if prob.s != T::one() {
        return Err(Error::InvalidParameter("the supremum route needs s = 1".into()));
    }
    let (log_op, log_b, cert) = theta_terms(prob)?;
    let logs: Vec<T> =
        (0..prob.len()).map(|k| prob.seq.point(k).re.ln() / prob.p - log_b[k] + log_op[k]).collect();
    let mut best = 0usize;
    for (k, v) in logs.iter().enumerate() {
        if *v > logs[best] {
            best = k;
        }
    }
    let top = logs.get(best).copied().unwrap_or(-T::infinity());
    let mut est = MEstimate::new(Route::S1Sup, top, T::one(), logs);
    est.witness_index = if prob.is_empty() { None } else { Some(best) };
    est.tail_certificate = cert;
    Ok(est)
}

/// Unweighted criterion for `1 < s < inf`: `Carl_{s'/p'}` of
/// `sum (2 Re z_k)^{s'} / |b_{inf,k}|^{s'} ||(G_k^{-1})^* Theta^I(z_k)||^{s'} delta_{z_k}`.
pub fn m_theta_route<T: Real>(prob: &InterpolationProblem<T>, opts: &RouteOptions<T>) -> Result<MEstimate<T>> {
    if !(prob.s > T::one()) {
        return Err(Error::InvalidParameter("route needs 1 < s < inf".into()));
    }
    let sp = dual_exponent(prob.s);
    let pp = dual_exponent(prob.p);
    let alpha = if pp.is_finite() { sp / pp } else { T::zero() };
    let (log_op, log_b, cert) = theta_terms(prob)?;
    let log_w: Vec<T> = (0..prob.len())
        .map(|k| sp * ((T::lit(2.0) * prob.seq.point(k).re).ln() - log_b[k] + log_op[k]))
        .collect();
    let mut est = carleson_route(Route::ThetaCarleson, prob.seq.points(), log_w, alpha, T::one() / sp, opts)?;
    est.tail_certificate = cert;
    Ok(est)
}

/// Matrix weight `Theta(i omega)^* W(omega) Theta(i omega)` for an inner `Theta`.
pub struct ConjugatedWeight<'a, T: Real> {
    pub theta: &'a PotapovProduct<T>,
    pub inner: &'a MatrixWeight<T>,
    points: Vec<Cx<T>>,
}

impl<'a, T: Real> ConjugatedWeight<'a, T> {
    pub fn new(theta: &'a PotapovProduct<T>, inner: &'a MatrixWeight<T>) -> Self {
        let points = theta.factors().iter().map(|f| f.point).collect();
        Self { theta, inner, points }
    }

    fn theta_axis(&self, w: T) -> CMatrix<T> {
        self.theta.evaluate(Cx::new(T::zero(), w))
    }
}

impl<T: Real> AxisMatrixWeight<T> for ConjugatedWeight<'_, T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, w: T) -> CMatrix<T> {
        let th = self.theta_axis(w);
        th.adjoint() * self.inner.value(w) * th
    }

    fn inverse_value(&self, w: T) -> Result<CMatrix<T>> {
        let th = self.theta_axis(w);
        Ok(th.adjoint() * self.inner.inverse_value(w)? * th)
    }

    fn growth(&self) -> T {
        self.inner.growth()
    }

    fn features(&self, z: Cx<T>) -> Vec<Feature<T>> {
        let mut f = self.inner.features(z);
        f.extend(self.points.iter().map(|p| Feature::new(p.im, p.re)));
        f
    }
}

fn probe_sets<T: Real>(points: &[Cx<T>], levels: i32) -> (Vec<Cx<T>>, Vec<(T, T)>) {
    let n = T::from_count(points.len().max(1));
    let center = points.iter().map(|z| z.im).fold(T::zero(), |a, b| a + b) / n;
    let scale = (points.iter().map(|z| z.re.ln()).fold(T::zero(), |a, b| a + b) / n).exp().max(T::lit(1e-300));
    let mut grid: Vec<Cx<T>> = points.to_vec();
    grid.extend(log_polar_grid(center, scale, levels));
    let intervals = interval_family(scale, levels).into_iter().map(|(a, b)| (a + center, b + center)).collect();
    (grid, intervals)
}

fn matrix_weight_of<T: Real>(spec: &WeightSpec<T>, dim: usize) -> MatrixWeight<T> {
    match spec {
        WeightSpec::Matrix(m) => m.clone(),
        WeightSpec::Scalar(w) => MatrixWeight::Diagonal(vec![w.clone(); dim]),
    }
}

/// Weighted `p = s = 2` criterion: `Carl_1` of
/// `sum (2 Re z_k)^2 / |b_{inf,k}|^2 ||(G_k^{-1})^* Theta^I(z_k) Wc(z_k)^{1/2}||^2 delta_{z_k}`
/// with `Wc` the harmonic extension of the weight conjugated by `Theta^{I^perp}`. The conjugated
/// weight must pass the A2 test on the probe sets with constant at most `opts.a2_bound`.
pub fn m_weighted_p2<T: Real>(prob: &InterpolationProblem<T>, opts: &RouteOptions<T>) -> Result<MEstimate<T>> {
    if prob.p != T::lit(2.0) || prob.s != T::lit(2.0) {
        return Err(Error::InvalidParameter("weighted route needs p = s = 2".into()));
    }
    let spec = prob.weight.as_ref().ok_or_else(|| Error::InvalidParameter("no weight attached".into()))?;
    let w = matrix_weight_of(spec, prob.dim());
    let theta_perp = PotapovProduct::for_sequence(&prob.seq, &prob.data.i_perp_chain())?;
    let conj = ConjugatedWeight::new(&theta_perp, &w);
    let (grid, intervals) = probe_sets(prob.seq.points(), opts.grid_levels);
    let a2 = matrix_a2_check(&conj, &intervals, &grid, &opts.quad)?;
    let constant = a2.interval_constant.max(a2.invariant_constant);
    if !(constant <= opts.a2_bound) {
        return Err(Error::WeightNotA2 { constant: constant.as_f64(), bound: opts.a2_bound.as_f64() });
    }
    let theta = PotapovProduct::for_sequence(&prob.seq, &prob.data.i_chain())?;
    let rows: Vec<(T, T)> = (0..prob.len())
        .into_par_iter()
        .map(|k| -> Result<(T, T)> {
            let zk = prob.seq.point(k);
            let ext = conj.extension(zk, &opts.quad)?;
            let m = prob.data.entry(k).inverse.adjoint() * theta.evaluate(zk) * psd_sqrt(&ext);
            let b = b_inf(&prob.seq, k)?;
            let lw = T::lit(2.0) * ((T::lit(2.0) * zk.re).ln() - b.log_modulus + op_norm(&m).ln());
            Ok((lw, b.rel_error_bound))
        })
        .collect::<Result<Vec<_>>>()?;
    let log_w = rows.iter().map(|r| r.0).collect();
    let mut est = carleson_route(Route::WeightedP2, prob.seq.points(), log_w, T::one(), T::lit(0.5), opts)?;
    est.weight_constant = Some(constant);
    est.tail_certificate = rows.iter().map(|r| r.1).fold(T::zero(), |a, b| a.max(b));
    Ok(est)
}

fn scalar_weighted<T: Real>(
    route: Route,
    prob: &InterpolationProblem<T>,
    w: &ScalarWeight<T>,
    opts: &RouteOptions<T>,
) -> Result<MEstimate<T>> {
    let (grid, _) = probe_sets(prob.seq.points(), opts.grid_levels);
    let check = scalar_ap_check(w, prob.p, &grid, &opts.quad)?;
    if !check.bounded_on_grid || !(check.constant <= opts.ap_bound) {
        return Err(Error::WeightNotAp { constant: check.constant.as_f64() });
    }
    let pp = dual_exponent(prob.p);
    let (log_op, log_b, cert) = theta_terms(prob)?;
    let mut log_w = Vec::with_capacity(prob.len());
    for k in 0..prob.len() {
        let zk = prob.seq.point(k);
        let ext = w.harmonic_extension(zk, &opts.quad)?;
        log_w.push(pp * ((T::lit(2.0) * zk.re).ln() - log_b[k] + log_op[k]) + ext.ln());
    }
    let mut est = carleson_route(route, prob.seq.points(), log_w, T::one(), T::one() / pp, opts)?;
    est.weight_constant = Some(check.constant);
    est.tail_certificate = cert;
    Ok(est)
}

/// Scalar `A_p` weighted criterion with `s = p`: `Carl_1` of
/// `sum (2 Re z_k)^{p'} / |b_{inf,k}|^{p'} ||(G_k^{-1})^* Theta^I(z_k)||^{p'} w(z_k) delta_{z_k}`.
pub fn m_ap_weighted<T: Real>(prob: &InterpolationProblem<T>, opts: &RouteOptions<T>) -> Result<MEstimate<T>> {
    if !(prob.p > T::one()) || prob.s != prob.p {
        return Err(Error::InvalidParameter("A_p route needs 1 < p = s < inf".into()));
    }
    match &prob.weight {
        Some(WeightSpec::Scalar(w)) => scalar_weighted(Route::ApWeighted, prob, w, opts),
        Some(WeightSpec::Matrix(_)) => Err(Error::InvalidParameter("A_p route needs a scalar weight".into())),
        None => scalar_weighted(Route::ApWeighted, prob, &ScalarWeight::Constant(T::one()), opts),
    }
}

/// Sobolev criterion with weight `|omega|^{2 beta}`, `0 < beta < 1/2`, and `p = s = 2`.
pub fn m_sobolev<T: Real>(prob: &InterpolationProblem<T>, beta: T, opts: &RouteOptions<T>) -> Result<MEstimate<T>> {
    if !(beta > T::zero() && beta < T::lit(0.5)) {
        return Err(Error::WeightNotAp { constant: f64::INFINITY });
    }
    if prob.p != T::lit(2.0) || prob.s != T::lit(2.0) {
        return Err(Error::InvalidParameter("Sobolev route needs p = s = 2".into()));
    }
    scalar_weighted(Route::Sobolev, prob, &ScalarWeight::pure_power(beta), opts)
}

/// Smallest `M` for which the weighted integrability condition on `(1 + |t|)^{-M}` holds.
pub fn required_decay_order<T: Real>(weight: Option<&WeightSpec<T>>) -> usize {
    match weight {
        None => 0,
        Some(WeightSpec::Scalar(w)) => {
            let g = match w {
                ScalarWeight::Power { base, beta, .. } if *base == T::zero() => (T::lit(2.0) * *beta).abs(),
                other => other.growth(),
            };
            decay_order(g)
        }
        Some(WeightSpec::Matrix(w)) => decay_order(w.growth()),
    }
}

#[derive(Debug, Clone, PartialEq)]
struct InterpolantTerm<T: Real> {
    point: Cx<T>,
    /// Product over the other points with their `I_j^perp` subspaces.
    theta_other: PotapovProduct<T>,
    /// `P_{M_k}^perp Theta'(z_k)^{-1} G_k^{-1} a_k` with `M_k = Theta'(z_k)^{-1} I_k^perp`.
    coeff: CVector<T>,
}

/// Explicit interpolant `F_a`.
///
/// `F_a(z) = sum_k ((1 + z_k)/(1 + z))^M Theta'_k(z) c_k` where `Theta'_k` vanishes on `I_j`
/// at every `z_j` with `j != k`, and `c_k` is chosen so that `G_k F_a(z_k) = G_k G_k^{-1} a_k`.
/// It factors as `Theta^{I^perp}_n Phi_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant<T: Real> {
    decay: usize,
    dim: usize,
    terms: Vec<InterpolantTerm<T>>,
    theta: PotapovProduct<T>,
}

/// Builds `F_a` for the problem targets with decay order `m`.
pub fn build_interpolant<T: Real>(prob: &InterpolationProblem<T>, m: usize) -> Result<Interpolant<T>> {
    let targets = prob.targets.as_ref().ok_or_else(|| Error::InvalidParameter("problem has no targets".into()))?;
    let n = prob.dim();
    let chain = prob.data.i_perp_chain();
    let theta = PotapovProduct::for_sequence(&prob.seq, &chain)?;
    let id = CMatrix::<T>::identity(n, n);
    let terms = (0..prob.len())
        .into_par_iter()
        .map(|k| -> Result<InterpolantTerm<T>> {
            let zk = prob.seq.point(k);
            let others: Vec<Cx<T>> =
                prob.seq.points().iter().enumerate().filter(|(j, _)| *j != k).map(|(_, z)| *z).collect();
            let theta_other = PotapovProduct::build(&others, &chain.without(k))?;
            let at = theta_other.evaluate(zk);
            let cond = condition_number(&at);
            if !(cond <= T::lit(FACTOR_CONDITION_LIMIT)) {
                return Err(Error::IllConditionedFactor { index: k, condition: cond.as_f64() });
            }
            let e = prob.data.entry(k);
            let bad = || Error::IllConditionedFactor { index: k, condition: f64::INFINITY };
            let ga = e.inverse.clone() * &targets[k];
            let u = solve(&at, &CMatrix::from_column_slice(n, 1, ga.as_slice())).ok_or_else(bad)?;
            let p_perp = if e.i_perp_frame.ncols() == 0 {
                id.clone()
            } else {
                let mk = solve(&at, &e.i_perp_frame).ok_or_else(bad)?;
                &id - projector(&orthonormal_columns(&mk, T::lit(1e-12)))
            };
            let coeff = (p_perp * u).column(0).into_owned();
            Ok(InterpolantTerm { point: zk, theta_other, coeff })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Interpolant { decay: m, dim: n, terms, theta })
}

impl<T: Real> Interpolant<T> {
    pub fn decay_order(&self) -> usize {
        self.decay
    }

    /// `F_a(z)` from the direct sum; analytic on the whole half-plane.
    pub fn evaluate(&self, z: Cx<T>) -> CVector<T> {
        let one = Cx::new(T::one(), T::zero());
        let mut acc = CVector::zeros(self.dim);
        for t in &self.terms {
            let r = ((one + t.point) / (one + z)).powu(self.decay as u32);
            acc += t.theta_other.evaluate(z) * &t.coeff * r;
        }
        acc
    }

    fn nearest(&self, z: Cx<T>) -> Option<(usize, T)> {
        self.terms
            .iter()
            .enumerate()
            .map(|(k, t)| (k, modulus(z - t.point)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
    }

    /// `Phi_a(z) = Theta^{I^perp}_n(z)^{-1} F_a(z)`, which has poles at the points.
    pub fn phi(&self, z: Cx<T>) -> Result<CVector<T>> {
        if let Some((k, d)) = self.nearest(z) {
            if d < T::lit(SINGULAR_RADIUS) {
                return Err(Error::SingularityEvaluation { index: k, disagreement: f64::INFINITY });
            }
        }
        Ok(self.theta.evaluate_inverse(z) * self.evaluate(z))
    }

    fn factored_raw(&self, z: Cx<T>) -> Result<CVector<T>> {
        Ok(self.theta.evaluate(z) * self.phi(z)?)
    }

    /// `Theta^{I^perp}_n(z) Phi_a(z)`. Near a point the removable singularity is resolved by
    /// averaging over four points at distance `h` and `h/2`, which is exact to fourth order
    /// for analytic functions; the two averages must agree to `1e-6` relative.
    pub fn evaluate_factored(&self, z: Cx<T>) -> Result<CVector<T>> {
        let (k, d) = match self.nearest(z) {
            Some(v) => v,
            None => return Ok(CVector::zeros(self.dim)),
        };
        if d >= T::lit(SINGULAR_RADIUS) {
            return self.factored_raw(z);
        }
        let h = T::lit(1e-3) * self.terms[k].point.re.min(T::one());
        let ring = |h: T| -> Result<CVector<T>> {
            let mut acc = CVector::zeros(self.dim);
            for dir in [Cx::new(h, T::zero()), Cx::new(-h, T::zero()), Cx::new(T::zero(), h), Cx::new(T::zero(), -h)] {
                acc += self.factored_raw(z + dir)?;
            }
            Ok(acc * Cx::new(T::lit(0.25), T::zero()))
        };
        let coarse = ring(h)?;
        let fine = ring(h * T::lit(0.5))?;
        let scale = fine.norm().max(T::eps());
        let disagreement = (&fine - &coarse).norm() / scale;
        if disagreement > T::lit(1e-6) {
            return Err(Error::SingularityEvaluation { index: k, disagreement: disagreement.as_f64() });
        }
        // Richardson step for the fourth order remainder.
        Ok((fine * Cx::new(T::lit(16.0), T::zero()) - coarse) / Cx::new(T::lit(15.0), T::zero()))
    }

    /// `||G_k F_a(z_k) - a_k|| / ||a_k||` for every index.
    pub fn residuals(&self, data: &TangentialData<T>, targets: &[CVector<T>]) -> Vec<T> {
        self.terms
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let r = &data.entry(k).g * self.evaluate(t.point) - &targets[k];
                r.norm() / targets[k].norm().max(T::eps())
            })
            .collect()
    }
}

/// Diagnostics for boundedness and surjectivity of the evaluation operator.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport<T: Real> {
    /// `Carl_{s/p}(sum ||G_k||^s delta_{z_k})`.
    pub boundedness: CarlesonReport<T>,
    /// Per index, smallest and largest `(Re z_k)^{-1/p} ||G_k^* y|| / ||y||` over `y` in `J_k`.
    pub scaled_bounds: Vec<(T, T)>,
    pub scaled_lower: T,
    pub scaled_upper: T,
    /// `Carl_{s'/p'}(sum (Re z_k)^{s'/p'} delta)`, absent when `p` or `s` is one.
    pub dual_geometry: Option<CarlesonReport<T>>,
    /// `Carl_{s/p}(sum (Re z_k)^{s/p} delta)`.
    pub primal_geometry: CarlesonReport<T>,
    /// Per index, condition number of the Gram matrix of the frames of `I_j` with
    /// `d(z_j, z_k) < radius`; infinite when they cannot be independent in `C^N`.
    pub localized_gram: Vec<T>,
    pub max_localized_gram: T,
    /// `Carl_1(sum Re z_k delta)`, finite exactly for finite unions of Carleson sequences.
    pub union_carleson: CarlesonReport<T>,
    /// Smallest pseudo-hyperbolic distance between two points.
    pub min_separation: T,
    pub radius: T,
}

/// Aggregates the evaluation operator diagnostics for a localisation radius.
pub fn evaluation_operator_tests<T: Real>(
    prob: &InterpolationProblem<T>,
    radius: T,
    quad: &AxisQuadrature<T>,
) -> Result<EvaluationReport<T>> {
    if !(radius > T::zero()) {
        return Err(Error::InvalidParameter("radius must be positive".into()));
    }
    let pts = prob.seq.points();
    let (p, s) = (prob.p, prob.s);
    let norms: Vec<T> = prob.data.entries().iter().map(|e| s * e.norm().ln()).collect();
    let boundedness = carleson_constant(&DiscreteMeasure::from_log_masses(pts, &norms)?, s / p, None, quad)?;
    let scaled_bounds: Vec<(T, T)> = prob
        .data
        .entries()
        .iter()
        .zip(pts)
        .map(|(e, z)| {
            let c = z.re.powf(-T::one() / p);
            (c * e.sigma[e.rank - 1], c * e.sigma[0])
        })
        .collect();
    let scaled_lower = scaled_bounds.iter().map(|b| b.0).fold(T::infinity(), |a, b| a.min(b));
    let scaled_upper = scaled_bounds.iter().map(|b| b.1).fold(T::zero(), |a, b| a.max(b));
    let dual_geometry = if p > T::one() && s > T::one() {
        let e = dual_exponent(s) / dual_exponent(p);
        let lw: Vec<T> = pts.iter().map(|z| e * z.re.ln()).collect();
        Some(carleson_constant(&DiscreteMeasure::from_log_masses(pts, &lw)?, e, None, quad)?)
    } else {
        None
    };
    let lw: Vec<T> = pts.iter().map(|z| s / p * z.re.ln()).collect();
    let primal_geometry = carleson_constant(&DiscreteMeasure::from_log_masses(pts, &lw)?, s / p, None, quad)?;
    let localized_gram: Vec<T> = (0..prob.len())
        .into_par_iter()
        .map(|k| {
            let cols: Vec<CVector<T>> = (0..prob.len())
                .filter(|&j| pseudo_hyperbolic(pts[j], pts[k]) < radius)
                .flat_map(|j| {
                    let f = &prob.data.entry(j).i_frame;
                    (0..f.ncols()).map(|c| f.column(c).into_owned()).collect::<Vec<_>>()
                })
                .collect();
            if cols.len() > prob.dim() {
                return T::infinity();
            }
            let f = CMatrix::from_columns(&cols);
            hermitian_condition(&(f.adjoint() * f))
        })
        .collect();
    let max_localized_gram = localized_gram.iter().copied().fold(T::one(), |a, b| a.max(b));
    let lw: Vec<T> = pts.iter().map(|z| z.re.ln()).collect();
    let union_carleson = carleson_constant(&DiscreteMeasure::from_log_masses(pts, &lw)?, T::one(), None, quad)?;
    let mut min_separation = T::one();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            min_separation = min_separation.min(pseudo_hyperbolic(pts[i], pts[j]));
        }
    }
    Ok(EvaluationReport {
        boundedness,
        scaled_bounds,
        scaled_lower,
        scaled_upper,
        dual_geometry,
        primal_geometry,
        localized_gram,
        max_localized_gram,
        union_carleson,
        min_separation,
        radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn scalar_problem(points: Vec<Cx<f64>>, g: Vec<f64>, p: f64, s: f64) -> InterpolationProblem<f64> {
        let seq = PointSequence::new(points, 1e-8).unwrap();
        let mats = g.into_iter().map(|v| CMatrix::from_element(1, 1, cx(v, 0.0))).collect();
        let data = TangentialData::with_default_tol(mats).unwrap();
        InterpolationProblem::new(seq, data, p, s).unwrap()
    }

    #[test]
    fn two_point_scalar_angle() {
        let z1 = cx(0.7, 0.3);
        let z2 = cx(1.9, -0.8);
        let prob = scalar_problem(vec![z1, z2], vec![1.0, 1.0], 2.0, 2.0);
        let a = subspace_angle(&prob.seq, &prob.data, 0, None).unwrap();
        let b = modulus(blaschke_factor(z1, z2));
        assert!((a.sin - b).abs() < 1e-12);
        let p = product_angle(&prob.seq, 0, None).unwrap();
        assert!((p.sin - b).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_directions_give_right_angle() {
        let seq = PointSequence::new(vec![cx(1.0, 0.0), cx(1.01, 0.0)], 1e-8).unwrap();
        let e1 = CMatrix::from_row_slice(2, 2, &[cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)]);
        let e2 = CMatrix::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)]);
        let data = TangentialData::with_default_tol(vec![e1, e2]).unwrap();
        let a = subspace_angle(&seq, &data, 0, None).unwrap();
        assert!((a.angle - std::f64::consts::FRAC_PI_2).abs() < 1e-7);
    }

    #[test]
    fn empty_localized_span_is_right_angle() {
        let prob = scalar_problem(vec![cx(1.0, 0.0), cx(100.0, 0.0)], vec![1.0, 1.0], 2.0, 2.0);
        let a = subspace_angle(&prob.seq, &prob.data, 0, Some(0.5)).unwrap();
        assert!(a.empty_span && a.angle == std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn one_point_angle_route() {
        let x = 2.5;
        let prob = scalar_problem(vec![cx(x, 0.4)], vec![1.0], 2.0, 2.0);
        let est = m_estimate_angle_route(&prob, &RouteOptions::default()).unwrap();
        assert!((est.value_upper - x.sqrt()).abs() < 1e-8 * x.sqrt());
        let doubled = scalar_problem(vec![cx(x, 0.4)], vec![2.0], 2.0, 2.0);
        let est2 = m_estimate_angle_route(&doubled, &RouteOptions::default()).unwrap();
        assert!((est2.value_upper * 2.0 - est.value_upper).abs() < 1e-10);
    }

    #[test]
    fn s1_single_point() {
        let seq = PointSequence::new(vec![cx(3.0, 1.0)], 1e-8).unwrap();
        let g = CMatrix::from_row_slice(2, 2, &[cx(2.0, 0.0), cx(0.0, 1.0), cx(0.5, 0.0), cx(1.0, 0.0)]);
        let data = TangentialData::with_default_tol(vec![g.clone()]).unwrap();
        let prob = InterpolationProblem::new(seq, data.clone(), 3.0, 1.0).unwrap();
        let est = m_s1_route(&prob).unwrap();
        let expect = 3f64.powf(1.0 / 3.0) * data.entry(0).inverse_norm();
        assert!((est.value_upper - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn scalar_one_point_interpolant_is_constant() {
        let prob = scalar_problem(vec![cx(0.8, -0.2)], vec![1.0], 2.0, 2.0)
            .with_targets(vec![CVector::from_element(1, cx(1.0, 0.0))])
            .unwrap();
        let f = build_interpolant(&prob, 0).unwrap();
        for z in [cx(0.1, 0.0), cx(3.0, 5.0), cx(0.8, -0.2)] {
            assert!((f.evaluate(z)[0] - cx(1.0, 0.0)).norm() < 1e-12);
        }
        assert!((f.evaluate_factored(cx(0.8, -0.2)).unwrap()[0] - cx(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn factored_and_direct_interpolants_agree() {
        let seq = PointSequence::new(vec![cx(1.0, 0.0), cx(0.5, 1.0), cx(2.0, -1.0)], 1e-8).unwrap();
        let g = vec![
            CMatrix::from_row_slice(2, 2, &[cx(1.0, 0.0), cx(0.0, 1.0), cx(0.0, 0.0), cx(0.0, 0.0)]),
            CMatrix::from_row_slice(2, 2, &[cx(0.3, 0.1), cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)]),
            CMatrix::from_row_slice(2, 2, &[cx(1.0, 0.0), cx(0.2, 0.0), cx(0.0, 0.5), cx(1.0, 0.0)]),
        ];
        let data = TangentialData::with_default_tol(g).unwrap();
        let targets = vec![
            CVector::from_vec(vec![cx(1.0, 0.0), cx(0.0, 0.0)]),
            CVector::from_vec(vec![cx(0.0, -2.0), cx(0.0, 0.0)]),
            CVector::from_vec(vec![cx(0.5, 0.5), cx(-1.0, 0.0)]),
        ];
        let prob = InterpolationProblem::new(seq, data.clone(), 2.0, 2.0).unwrap().with_targets(targets.clone()).unwrap();
        let f = build_interpolant(&prob, 2).unwrap();
        assert!(f.residuals(&data, &targets).iter().all(|r| *r < 1e-10));
        let z = cx(0.9, 0.4);
        assert!((f.evaluate(z) - f.evaluate_factored(z).unwrap()).norm() < 1e-10);
        let near = f.evaluate_factored(cx(0.5, 1.0)).unwrap();
        assert!((near - f.evaluate(cx(0.5, 1.0))).norm() < 1e-7);
    }

    #[test]
    fn evaluation_bounds_for_unitary_scaling() {
        let pts: Vec<Cx<f64>> = (0..6).map(|k| cx(2f64.powi(k), 0.0)).collect();
        let p = 2.0;
        let g: Vec<f64> = pts.iter().map(|z| z.re.powf(1.0 / p)).collect();
        let prob = scalar_problem(pts, g, p, 2.0);
        let r = evaluation_operator_tests(&prob, 0.5, &AxisQuadrature::default()).unwrap();
        assert!((r.scaled_lower - 1.0).abs() < 1e-12 && (r.scaled_upper - 1.0).abs() < 1e-12);
        assert!(r.union_carleson.constant.is_finite() && r.boundedness.constant.is_finite());
    }

    #[test]
    fn decay_orders() {
        assert_eq!(required_decay_order::<f64>(None), 0);
        let w = WeightSpec::Scalar(ScalarWeight::one_plus_power(0.25));
        assert_eq!(required_decay_order(Some(&w)), 2);
    }
}
