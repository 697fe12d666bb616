//! Diagonal semigroup systems `x' = A x + B u` and their admissibility and controllability tests.
//!
//! Modes `(lambda_n, b_n)` are mirrored to interpolation data `z_n = -lambda_n`,
//! `G_n = e_1 b_n^*`. Criteria over infinitely many modes are evaluated on increasing
//! truncations and turned into verdicts by a growth/contraction rule.

use rayon::prelude::*;

use crate::carleson::{carleson_constant, log_balayage_norm, rectangle_sup, BoxShape, CarlesonReport, DiscreteMeasure};
use crate::error::{Error, Result};
use crate::hardy::{b_inf, PointSequence, TailModel};
use crate::linalg::stable_norm;
use crate::interpolation::{
    angle_report, dual_exponent, evaluation_operator_tests, AngleReport, EvaluationReport, InterpolationProblem,
};
use crate::potapov::TangentialData;
use crate::quadrature::AxisQuadrature;
use crate::scalar::{CMatrix, CVector, Cx, Real};
use crate::weights::power_extension;

/// Input space `U` of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputSpace<T: Real> {
    /// `L^p(0, inf; C^N)`.
    Lp(T),
    /// Inverse Laplace image of `H^{p'}`, normed from `H^{p'}`.
    HardyPreimage(T),
    /// Sobolev space `H^2_beta`.
    Sobolev(T),
}

impl<T: Real> InputSpace<T> {
    /// Integrability exponent; Sobolev inputs are Hilbertian.
    pub fn p(&self) -> T {
        match *self {
            InputSpace::Lp(p) | InputSpace::HardyPreimage(p) => p,
            InputSpace::Sobolev(_) => T::lit(2.0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InputSpace::Lp(_) => "Lp",
            InputSpace::HardyPreimage(_) => "HardyPreimage",
            InputSpace::Sobolev(_) => "Sobolev",
        }
    }
}

/// Diagonal system with eigenvalues `lambda_n` and control vectors `b_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupSystem<T: Real> {
    eigenvalues: Vec<Cx<T>>,
    control_vectors: Vec<CVector<T>>,
    s: T,
    input_space: InputSpace<T>,
    /// Model of the mirrored eigenvalues `-lambda_n` beyond the stored modes.
    tail: Option<TailModel<T>>,
    /// The stored modes are the whole system.
    exhaustive: bool,
    /// User assertion that the closure of the spectrum is totally disconnected.
    totally_disconnected: bool,
    tail_tolerance: T,
    rank_tol: T,
}

impl<T: Real> SemigroupSystem<T> {
    pub fn new(eigenvalues: Vec<Cx<T>>, control_vectors: Vec<CVector<T>>, s: T, input_space: InputSpace<T>) -> Result<Self> {
        if eigenvalues.len() != control_vectors.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenvalues but {} control vectors",
                eigenvalues.len(),
                control_vectors.len()
            )));
        }
        if eigenvalues.is_empty() {
            return Err(Error::InvalidParameter("system needs at least one mode".into()));
        }
        let dim = control_vectors[0].len();
        for (i, (l, b)) in eigenvalues.iter().zip(&control_vectors).enumerate() {
            if !(l.re < T::zero()) || !l.im.is_finite() {
                return Err(Error::NotInHalfPlane { index: i, re: (-l.re).as_f64() });
            }
            if b.len() != dim || dim == 0 {
                return Err(Error::DimensionMismatch(format!("control vector {i} has length {}", b.len())));
            }
            if !(stable_norm(b) > T::zero()) {
                return Err(Error::ZeroTangentialMatrix { index: i });
            }
        }
        if !(s > T::one()) || !s.is_finite() {
            return Err(Error::InvalidParameter("basis exponent s must lie in (1, inf)".into()));
        }
        match input_space {
            InputSpace::Lp(p) | InputSpace::HardyPreimage(p) => {
                if !(p > T::one()) || !p.is_finite() {
                    return Err(Error::InvalidParameter("input exponent p must lie in (1, inf)".into()));
                }
            }
            InputSpace::Sobolev(beta) => {
                if !(beta.abs() < T::lit(0.5)) {
                    return Err(Error::InvalidParameter("Sobolev order must satisfy |beta| < 1/2".into()));
                }
            }
        }
        Ok(Self {
            eigenvalues,
            control_vectors,
            s,
            input_space,
            tail: None,
            exhaustive: false,
            totally_disconnected: false,
            tail_tolerance: T::lit(1e-8),
            rank_tol: T::lit(crate::potapov::DEFAULT_RANK_TOL),
        })
    }

    /// Attaches a model of the mirrored spectrum beyond the stored modes.
    pub fn with_tail(mut self, tail: TailModel<T>) -> Self {
        self.tail = Some(tail);
        self.exhaustive = false;
        self
    }

    /// Declares that the stored modes form the whole system.
    pub fn exhaustive(mut self) -> Self {
        self.exhaustive = true;
        self.tail = None;
        self
    }

    pub fn assume_totally_disconnected(mut self, flag: bool) -> Self {
        self.totally_disconnected = flag;
        self
    }

    pub fn with_tail_tolerance(mut self, tol: T) -> Self {
        self.tail_tolerance = tol;
        self
    }

    pub fn with_rank_tol(mut self, tol: T) -> Self {
        self.rank_tol = tol;
        self
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.control_vectors[0].len()
    }

    pub fn eigenvalues(&self) -> &[Cx<T>] {
        &self.eigenvalues
    }

    pub fn control_vectors(&self) -> &[CVector<T>] {
        &self.control_vectors
    }

    pub fn s(&self) -> T {
        self.s
    }

    pub fn input_space(&self) -> InputSpace<T> {
        self.input_space
    }

    pub fn is_exhaustive(&self) -> bool {
        self.exhaustive
    }

    pub fn tail(&self) -> Option<&TailModel<T>> {
        self.tail.as_ref()
    }

    pub fn is_totally_disconnected(&self) -> bool {
        self.totally_disconnected
    }

    /// `delta = min -Re lambda_n` over the stored modes.
    pub fn delta(&self) -> T {
        self.eigenvalues.iter().map(|l| -l.re).fold(T::infinity(), |a, b| a.min(b))
    }

    /// The first `n` modes; the result is not exhaustive unless nothing was dropped.
    pub fn truncate(&self, n: usize) -> Self {
        let n = n.min(self.len());
        let mut out = self.clone();
        out.eigenvalues.truncate(n);
        out.control_vectors.truncate(n);
        if n < self.len() {
            out.exhaustive = false;
            out.tail = None;
        }
        out
    }
}

/// Mirrored interpolation data: `z_k = -lambda_k` and `G_k` with first row `b_k^*`.
pub fn to_interpolation_data<T: Real>(sys: &SemigroupSystem<T>) -> Result<(PointSequence<T>, TangentialData<T>)> {
    let pts: Vec<Cx<T>> = sys.eigenvalues.iter().map(|l| -*l).collect();
    let mut seq = PointSequence::new(pts, sys.tail_tolerance)?;
    if let Some(t) = sys.tail {
        seq = seq.with_tail(t)?;
    }
    let n = sys.dim();
    let mats = sys
        .control_vectors
        .iter()
        .map(|b| {
            let mut g = CMatrix::zeros(n, n);
            for j in 0..n {
                g[(0, j)] = b[j].conj();
            }
            g
        })
        .collect();
    Ok((seq, TangentialData::new(mats, sys.rank_tol)?))
}

/// Property a verdict is about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Property<T: Real> {
    Admissible,
    Exact,
    Null { tau: T },
    Approximate,
}

/// Direction in which a test decides the property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Caveat {
    /// Failure of the criterion disproves the property; success proves nothing.
    NecessaryOnly,
    /// Success of the criterion proves the property; failure proves nothing.
    SufficientOnly,
    Equivalent,
}

impl Caveat {
    pub fn name(self) -> &'static str {
        match self {
            Caveat::NecessaryOnly => "necessary-only",
            Caveat::SufficientOnly => "sufficient-only",
            Caveat::Equivalent => "equivalent",
        }
    }
}

/// Kind of test a caveat is looked up for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    Admissibility,
    /// Exact or null controllability, rectangle or Poisson sum form.
    Controllability,
    Approximate,
    Joint,
}

/// Hard-wired direction of each test per input space and exponents.
///
/// Hardy preimage and Sobolev inputs give characterisations. For `L^p` inputs the
/// Hausdorff-Young inequality transfers admissibility from the Hardy preimage when `p <= 2`
/// and back when `p >= 2`, while controllability transfers in the opposite directions. The
/// rank test for approximate controllability is always necessary and is sufficient for `L^p`
/// inputs with a totally disconnected spectral closure.
pub fn caveat<T: Real>(kind: TestKind, input: InputSpace<T>, totally_disconnected: bool) -> Caveat {
    let two = T::lit(2.0);
    match (kind, input) {
        (TestKind::Approximate, InputSpace::Lp(_)) if totally_disconnected => Caveat::Equivalent,
        (TestKind::Approximate, _) => Caveat::NecessaryOnly,
        (_, InputSpace::HardyPreimage(_)) | (_, InputSpace::Sobolev(_)) => Caveat::Equivalent,
        (_, InputSpace::Lp(p)) if p == two => Caveat::Equivalent,
        (TestKind::Admissibility, InputSpace::Lp(p)) => {
            if p < two {
                Caveat::SufficientOnly
            } else {
                Caveat::NecessaryOnly
            }
        }
        (TestKind::Controllability, InputSpace::Lp(p)) => {
            if p > two {
                Caveat::SufficientOnly
            } else {
                Caveat::NecessaryOnly
            }
        }
        (TestKind::Joint, InputSpace::Lp(_)) => Caveat::NecessaryOnly,
    }
}

/// Outcome of a decision procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Positive,
    Negative,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Positive => "positive",
            Verdict::Negative => "negative",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Thresholds of the truncation evidence rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceRule<T: Real> {
    /// A step ratio of criterion values above this counts as divergence.
    pub growth_factor: T,
    /// A ratio of successive increments below this counts as convergence.
    pub contraction_factor: T,
}

impl<T: Real> Default for DivergenceRule<T> {
    fn default() -> Self {
        Self { growth_factor: T::lit(10.0), contraction_factor: T::lit(0.5) }
    }
}

/// Criterion value at one truncation in logarithmic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPoint<T: Real> {
    pub truncation: usize,
    pub log_value: T,
    /// `ln` of the criterion of the modes added since the previous truncation.
    pub log_increment: T,
}

/// Verdict from truncation evidence.
///
/// Divergent when every step multiplies the value by more than `growth_factor`; convergent
/// when every increment is below `contraction_factor` times the previous one. At least three
/// truncations are needed. A finite criterion on an exhaustive system is positive directly.
pub fn evidence_verdict<T: Real>(points: &[TruncationPoint<T>], rule: &DivergenceRule<T>, exhaustive: bool) -> Verdict {
    if let Some(last) = points.last() {
        if exhaustive && last.log_value.is_finite() {
            return Verdict::Positive;
        }
        if exhaustive && last.log_value == -T::infinity() {
            return Verdict::Positive;
        }
    }
    if points.len() < 3 {
        return Verdict::Inconclusive;
    }
    if points.iter().any(|p| p.log_value == T::infinity()) {
        return Verdict::Negative;
    }
    let lg = rule.growth_factor.ln();
    if points.windows(2).all(|w| w[1].log_value - w[0].log_value > lg) {
        return Verdict::Negative;
    }
    let lc = rule.contraction_factor.ln();
    let incs: Vec<T> = points[1..].iter().map(|p| p.log_increment).collect();
    let contracting = incs.windows(2).all(|w| w[1] == -T::infinity() || w[1] - w[0] < lc);
    if contracting {
        return Verdict::Positive;
    }
    Verdict::Inconclusive
}

/// Which form of the controllability condition was evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlWitness<T: Real> {
    /// Box `R(omega, h)` attaining the supremum.
    Rectangle { center: T, height: T, atoms: usize, exponent: T },
    /// `L^q` norm of the Poisson sum.
    AxisNorm { q: T },
    Carleson(CarlesonReport<T>),
    Rank { ranks: Vec<usize> },
}

/// Per-mode data of a criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSummand<T: Real> {
    pub index: usize,
    pub eigenvalue: Cx<T>,
    pub b_norm: T,
    pub log_sin_angle: T,
    pub log_weight: T,
}

/// Result of a controllability or admissibility test.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlVerdict<T: Real> {
    pub property: Property<T>,
    pub verdict: Verdict,
    pub criterion_value: T,
    pub log_criterion_value: T,
    pub witness: ControlWitness<T>,
    pub theorem_route: &'static str,
    /// Largest truncation used.
    pub truncation: usize,
    pub caveat: Caveat,
    pub evidence: Vec<TruncationPoint<T>>,
    pub summands: Vec<ModeSummand<T>>,
    pub assumptions: Vec<String>,
}

/// Options for the truncation based tests.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOptions<T: Real> {
    /// Increasing truncations; empty means `{n/2, 3n/4, n}` of the stored modes.
    pub truncations: Vec<usize>,
    pub rule: DivergenceRule<T>,
    pub quad: AxisQuadrature<T>,
    /// Localisation radius of the joint test diagnostics.
    pub radius: T,
}

impl<T: Real> Default for ControlOptions<T> {
    fn default() -> Self {
        Self { truncations: Vec::new(), rule: DivergenceRule::default(), quad: AxisQuadrature::default(), radius: T::lit(0.5) }
    }
}

fn truncations<T: Real>(sys: &SemigroupSystem<T>, opts: &ControlOptions<T>) -> Result<Vec<usize>> {
    let n = sys.len();
    let mut t = if opts.truncations.is_empty() {
        if sys.exhaustive {
            vec![n]
        } else {
            vec![(n / 2).max(1), (3 * n / 4).max(1), n]
        }
    } else {
        opts.truncations.clone()
    };
    t.sort_unstable();
    t.dedup();
    if t.first() == Some(&0) || t.last().copied().unwrap_or(0) > n {
        return Err(Error::InvalidParameter(format!("truncations must lie in 1..={n}")));
    }
    Ok(t)
}

/// The two forms of the exact and null controllability conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Form<T: Real> {
    /// `sup_R mu(R(omega,h)) / h^exponent`.
    Rectangle { exponent: T },
    /// `|| sum m_n p_{z_n} ||_q`.
    PoissonSum { q: T },
    Carleson { alpha: T },
}

fn evaluate_form<T: Real>(points: &[Cx<T>], log_w: &[T], form: Form<T>, quad: &AxisQuadrature<T>) -> Result<(T, ControlWitness<T>)> {
    if points.is_empty() {
        return Ok((-T::infinity(), ControlWitness::AxisNorm { q: T::one() }));
    }
    let mu = DiscreteMeasure::from_log_masses(points, log_w)?;
    match form {
        Form::Rectangle { exponent } => {
            let s = rectangle_sup(&mu, exponent, BoxShape::double_width());
            Ok((s.log_value, ControlWitness::Rectangle { center: s.center, height: s.side, atoms: s.atoms, exponent }))
        }
        Form::PoissonSum { q } => Ok((log_balayage_norm(&mu, q, quad)?, ControlWitness::AxisNorm { q })),
        Form::Carleson { alpha } => {
            let r = carleson_constant(&mu, alpha, None, quad)?;
            Ok((r.log_constant, ControlWitness::Carleson(r)))
        }
    }
}

struct Assembled<T: Real> {
    points: Vec<Cx<T>>,
    log_w: Vec<T>,
    summands: Vec<ModeSummand<T>>,
}

fn run_evidence<T: Real>(
    sys: &SemigroupSystem<T>,
    a: &Assembled<T>,
    form: Form<T>,
    property: Property<T>,
    route: &'static str,
    caveat: Caveat,
    opts: &ControlOptions<T>,
) -> Result<ControlVerdict<T>> {
    let ts = truncations(sys, opts)?;
    let runs: Vec<(T, T, ControlWitness<T>)> = ts
        .par_iter()
        .enumerate()
        .map(|(i, &n)| -> Result<(T, T, ControlWitness<T>)> {
            let (v, w) = evaluate_form(&a.points[..n], &a.log_w[..n], form, &opts.quad)?;
            let start = if i == 0 { 0 } else { ts[i - 1] };
            let (inc, _) = evaluate_form(&a.points[start..n], &a.log_w[start..n], form, &opts.quad)?;
            Ok((v, inc, w))
        })
        .collect::<Result<Vec<_>>>()?;
    let evidence: Vec<TruncationPoint<T>> = ts
        .iter()
        .zip(&runs)
        .map(|(&n, r)| TruncationPoint { truncation: n, log_value: r.0, log_increment: r.1 })
        .collect();
    let verdict = evidence_verdict(&evidence, &opts.rule, sys.exhaustive && ts.last() == Some(&sys.len()));
    let last = runs.last().cloned().ok_or_else(|| Error::InvalidParameter("no truncations".into()))?;
    let mut assumptions = Vec::new();
    if sys.eigenvalues.windows(2).any(|w| w[1].re > w[0].re) {
        assumptions.push("modes are not ordered by |Re lambda|: verdicts need not be monotone in tau".to_string());
    }
    if sys.tail.is_some() {
        assumptions.push("angles include the modelled spectral tail".to_string());
    } else if !sys.exhaustive {
        assumptions.push("angles use the stored modes only".to_string());
    }
    Ok(ControlVerdict {
        property,
        verdict,
        criterion_value: last.0.exp(),
        log_criterion_value: last.0,
        witness: last.2,
        theorem_route: route,
        truncation: *ts.last().unwrap_or(&0),
        caveat,
        evidence,
        summands: a.summands.clone(),
        assumptions,
    })
}

/// Angles between `e^{lambda_n t} b_n` and the other modes, computed in the transform domain.
pub fn mode_angles<T: Real>(sys: &SemigroupSystem<T>) -> Result<AngleReport<T>> {
    let (seq, data) = to_interpolation_data(sys)?;
    angle_report(&seq, &data, None)
}

fn assemble<T: Real>(sys: &SemigroupSystem<T>, exponent: T, extra: impl Fn(usize, Cx<T>) -> T) -> Result<Assembled<T>> {
    let angles = mode_angles(sys)?;
    let points: Vec<Cx<T>> = sys.eigenvalues.iter().map(|l| -*l).collect();
    let mut log_w = Vec::with_capacity(sys.len());
    let mut summands = Vec::with_capacity(sys.len());
    for (n, (l, b)) in sys.eigenvalues.iter().zip(&sys.control_vectors).enumerate() {
        let ls = angles.entries[n].log_sin;
        let w = exponent * ((-l.re).ln() - stable_norm(b).ln() - ls) + extra(n, *l);
        log_w.push(w);
        summands.push(ModeSummand { index: n, eigenvalue: *l, b_norm: stable_norm(b), log_sin_angle: ls, log_weight: w });
    }
    Ok(Assembled { points, log_w, summands })
}

fn controllability_form<T: Real>(p: T, sp: T) -> (Form<T>, &'static str) {
    if p <= sp {
        (Form::Rectangle { exponent: sp / p }, "rectangle condition over R(omega,h)")
    } else {
        (Form::PoissonSum { q: p / (p - sp) }, "Poisson sum in L^{p/(p-s')}")
    }
}

fn require_lp_like<T: Real>(sys: &SemigroupSystem<T>) -> Result<T> {
    match sys.input_space {
        InputSpace::Lp(p) | InputSpace::HardyPreimage(p) => Ok(p),
        InputSpace::Sobolev(_) => Err(Error::InvalidParameter("test needs an L^p or Hardy preimage input space".into())),
    }
}

/// Admissibility: `sum ||b_k||^s delta_{z_k}` must be `s/p'`-Carleson.
pub fn admissibility_check<T: Real>(sys: &SemigroupSystem<T>, opts: &ControlOptions<T>) -> Result<ControlVerdict<T>> {
    let p = require_lp_like(sys)?;
    let s = sys.s;
    let points: Vec<Cx<T>> = sys.eigenvalues.iter().map(|l| -*l).collect();
    let mut log_w = Vec::with_capacity(sys.len());
    let mut summands = Vec::with_capacity(sys.len());
    for (n, (l, b)) in sys.eigenvalues.iter().zip(&sys.control_vectors).enumerate() {
        let w = s * stable_norm(b).ln();
        log_w.push(w);
        summands.push(ModeSummand { index: n, eigenvalue: *l, b_norm: stable_norm(b), log_sin_angle: T::zero(), log_weight: w });
    }
    let a = Assembled { points, log_w, summands };
    let form = Form::Carleson { alpha: s / dual_exponent(p) };
    let cav = caveat(TestKind::Admissibility, sys.input_space, sys.totally_disconnected);
    run_evidence(sys, &a, form, Property::Admissible, "Carleson test of sum ||b_k||^s delta", cav, opts)
}

/// Exact controllability through the rectangle or Poisson sum condition.
pub fn exact_controllability_check<T: Real>(sys: &SemigroupSystem<T>, opts: &ControlOptions<T>) -> Result<ControlVerdict<T>> {
    controllability(sys, None, opts)
}

/// Null controllability in time `tau`: every weight carries `e^{s' Re lambda_n tau}`.
pub fn null_controllability_check<T: Real>(
    sys: &SemigroupSystem<T>,
    tau: T,
    opts: &ControlOptions<T>,
) -> Result<ControlVerdict<T>> {
    if !(tau > T::zero()) {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    controllability(sys, Some(tau), opts)
}

fn controllability<T: Real>(sys: &SemigroupSystem<T>, tau: Option<T>, opts: &ControlOptions<T>) -> Result<ControlVerdict<T>> {
    let p = require_lp_like(sys)?;
    let sp = dual_exponent(sys.s);
    let a = assemble(sys, sp, |_, l| tau.map(|t| sp * l.re * t).unwrap_or(T::zero()))?;
    let (form, route) = controllability_form(p, sp);
    let cav = caveat(TestKind::Controllability, sys.input_space, sys.totally_disconnected);
    let property = match tau {
        Some(tau) => Property::Null { tau },
        None => Property::Exact,
    };
    run_evidence(sys, &a, form, property, route, cav, opts)
}

/// Sobolev input controllability: weights `|Re lambda|^2 phi_{2 beta}(-lambda) / (||b||^2 sin^2)`
/// against `m h` over `R(omega, h)`, optionally damped by `e^{2 Re lambda tau}`.
pub fn sobolev_controllability_check<T: Real>(
    sys: &SemigroupSystem<T>,
    tau: Option<T>,
    opts: &ControlOptions<T>,
) -> Result<ControlVerdict<T>> {
    let beta = match sys.input_space {
        InputSpace::Sobolev(b) => b,
        _ => return Err(Error::InvalidParameter("test needs a Sobolev input space".into())),
    };
    if !(beta > T::zero() && beta < T::lit(0.5)) {
        return Err(Error::InvalidParameter("Sobolev test needs 0 < beta < 1/2".into()));
    }
    if let Some(t) = tau {
        if !(t > T::zero()) {
            return Err(Error::InvalidParameter("tau must be positive".into()));
        }
    }
    let two = T::lit(2.0);
    let a = assemble(sys, two, |_, l| {
        let damp = tau.map(|t| two * l.re * t).unwrap_or(T::zero());
        power_extension(two * beta, -l).ln() + damp
    })?;
    let cav = caveat(TestKind::Controllability, sys.input_space, sys.totally_disconnected);
    let property = match tau {
        Some(tau) => Property::Null { tau },
        None => Property::Exact,
    };
    run_evidence(sys, &a, Form::Rectangle { exponent: T::one() }, property, "Sobolev rectangle condition", cav, opts)
}

/// Rank of each row vector `b_n^*`: one exactly when `b_n` is nonzero. The rank of a single row
/// does not depend on its scale, so no tolerance relative to the other modes applies.
pub fn rank_test<T: Real>(vectors: &[CVector<T>]) -> Vec<usize> {
    vectors.iter().map(|b| usize::from(b.iter().any(|c| c.re != T::zero() || c.im != T::zero()))).collect()
}

/// Verdict of the rank test on arbitrary control vectors.
pub fn approx_controllability_from_vectors<T: Real>(
    eigenvalues: &[Cx<T>],
    vectors: &[CVector<T>],
    input: InputSpace<T>,
    totally_disconnected: bool,
) -> ControlVerdict<T> {
    let ranks = rank_test(vectors);
    let ok = ranks.iter().all(|&r| r == 1);
    let mut assumptions = Vec::new();
    if totally_disconnected {
        assumptions.push("closure of the spectrum asserted totally disconnected".to_string());
    } else {
        assumptions.push("total disconnectedness not asserted: the rank test is only necessary".to_string());
    }
    let cav = caveat(TestKind::Approximate, input, totally_disconnected);
    let verdict = match (ok, cav) {
        (false, _) => Verdict::Negative,
        (true, Caveat::Equivalent) => Verdict::Positive,
        (true, _) => Verdict::Inconclusive,
    };
    let summands = eigenvalues
        .iter()
        .zip(vectors)
        .enumerate()
        .map(|(i, (l, b))| ModeSummand {
            index: i,
            eigenvalue: *l,
            b_norm: stable_norm(b),
            log_sin_angle: T::zero(),
            log_weight: stable_norm(b).ln(),
        })
        .collect();
    let min_rank = ranks.iter().copied().min().unwrap_or(0);
    ControlVerdict {
        property: Property::Approximate,
        verdict,
        criterion_value: T::from_count(min_rank),
        log_criterion_value: T::from_count(min_rank).ln(),
        witness: ControlWitness::Rank { ranks },
        theorem_route: "rank of (<B e_1, phi_n>, ..., <B e_N, phi_n>)",
        truncation: vectors.len(),
        caveat: cav,
        evidence: Vec::new(),
        summands,
        assumptions,
    }
}

/// Approximate controllability by the rank test.
pub fn approx_controllability_check<T: Real>(sys: &SemigroupSystem<T>) -> ControlVerdict<T> {
    approx_controllability_from_vectors(
        &sys.eigenvalues,
        &sys.control_vectors,
        sys.input_space,
        sys.totally_disconnected,
    )
}

/// Diagnostics of the joint admissibility and exact controllability characterisation.
#[derive(Debug, Clone, PartialEq)]
pub struct JointReport<T: Real> {
    /// Smallest and largest `||b_k|| / |Re lambda_k|^{1/p}`.
    pub ratio_min: T,
    pub ratio_max: T,
    /// Evaluation operator diagnostics; the localised Gram conditions and the union Carleson
    /// constant stand in for unconditionality of the kernel sequence.
    pub evaluation: EvaluationReport<T>,
    pub caveat: Caveat,
}

pub fn joint_admissible_exact_check<T: Real>(sys: &SemigroupSystem<T>, opts: &ControlOptions<T>) -> Result<JointReport<T>> {
    let p = match sys.input_space {
        InputSpace::HardyPreimage(p) => p,
        _ => return Err(Error::InvalidParameter("joint test needs a Hardy preimage input space".into())),
    };
    let (seq, data) = to_interpolation_data(sys)?;
    let seq = PointSequence::new(seq.points().to_vec(), sys.tail_tolerance)?;
    let prob = InterpolationProblem::new(seq, data, p, sys.s)?;
    let evaluation = evaluation_operator_tests(&prob, opts.radius, &opts.quad)?;
    let ratios: Vec<T> =
        sys.eigenvalues.iter().zip(&sys.control_vectors).map(|(l, b)| stable_norm(b) / (-l.re).powf(T::one() / p)).collect();
    Ok(JointReport {
        ratio_min: ratios.iter().copied().fold(T::infinity(), |a, b| a.min(b)),
        ratio_max: ratios.iter().copied().fold(T::zero(), |a, b| a.max(b)),
        evaluation,
        caveat: caveat(TestKind::Joint, sys.input_space, sys.totally_disconnected),
    })
}

/// Mirrored heat spectrum `pi^2 n^2` for `n <= modes` followed by its modelled tail.
pub fn heat_sequence<T: Real>(modes: usize) -> Result<PointSequence<T>> {
    let pi2 = T::PI() * T::PI();
    let pts = (1..=modes).map(|n| Cx::new(pi2 * T::from_count(n * n), T::zero())).collect();
    PointSequence::new(pts, T::lit(1e-8))?.with_tail(TailModel::RealPower { scale: pi2, exponent: T::lit(2.0) })
}

/// Heat equation on `[0, 1]` with boundary control: `lambda_n = -pi^2 n^2`, `b_n = n e^{-n^2}`,
/// with the stored `modes` followed by the modelled spectral tail.
pub fn heat_system<T: Real>(modes: usize, p: T, s: T) -> Result<SemigroupSystem<T>> {
    if modes == 0 {
        return Err(Error::InvalidParameter("heat system needs at least one mode".into()));
    }
    let pi2 = T::PI() * T::PI();
    let last = T::from_count(modes);
    if !(last * (-last * last).exp() > T::zero()) {
        return Err(Error::InvalidParameter(format!("control vector of mode {modes} underflows the scalar type")));
    }
    let eig = (1..=modes).map(|n| Cx::new(-pi2 * T::from_count(n * n), T::zero())).collect();
    let b = (1..=modes)
        .map(|n| {
            let x = T::from_count(n);
            CVector::from_element(1, Cx::new(x * (-x * x).exp(), T::zero()))
        })
        .collect();
    Ok(SemigroupSystem::new(eig, b, s, InputSpace::HardyPreimage(p))?
        .with_tail(TailModel::RealPower { scale: pi2, exponent: T::lit(2.0) }))
}

/// `1 <= prod_{j != n} |(conj lambda_n + lambda_j)/(lambda_n - lambda_j)| <= exp(4n(1 + ln n))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductBoundRow<T: Real> {
    pub n: usize,
    pub log_reciprocal: T,
    pub log_upper: T,
    pub certificate: T,
    pub within: bool,
}

/// Criterion value of the heat case study at one truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatRow<T: Real> {
    pub tau: T,
    pub truncation: usize,
    pub log_criterion: T,
    pub log_increment: T,
}

/// Per-mode data of the heat case study.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatMode<T: Real> {
    pub n: usize,
    pub eigenvalue: T,
    /// `ln |B_n(-lambda_n)|` for the Blaschke product over the other mirrored eigenvalues.
    pub log_excluded_product: T,
    pub certificate: T,
    /// `ln` of the summand weight, one per `tau`.
    pub log_weights: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatVerdict<T: Real> {
    pub tau: T,
    pub verdict: Verdict,
    pub above_threshold: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatReport<T: Real> {
    pub p: T,
    pub threshold: T,
    pub truncations: Vec<usize>,
    pub rows: Vec<HeatRow<T>>,
    pub verdicts: Vec<HeatVerdict<T>>,
    pub product_bounds: Vec<ProductBoundRow<T>>,
    /// One entry per stored mode with its summand weight for every `tau`.
    pub modes: Vec<HeatMode<T>>,
    /// Caveat for `L^p` inputs; the criterion itself characterises Hardy preimage inputs.
    pub lp_caveat: Caveat,
}

/// Heat case study: the `L^{p/(p-2)}` norm of
/// `sum n^2 e^{2n^2} e^{-2 n^2 pi^2 tau} prod_{j != n} |.|^2 p_{-lambda_n}` across truncations
/// `{T/2, 3T/4, T}` for every `tau`, with the product bound checked for `n <= min(20, T)`.
pub fn heat_demo<T: Real>(taus: &[T], truncation: usize, p: T, rule: &DivergenceRule<T>, quad: &AxisQuadrature<T>) -> Result<HeatReport<T>> {
    if truncation < 10 {
        return Err(Error::InvalidParameter("heat demo needs a truncation of at least 10".into()));
    }
    if !(p > T::lit(2.0)) || !p.is_finite() {
        return Err(Error::InvalidParameter("heat demo needs 2 < p < inf".into()));
    }
    let seq = heat_sequence::<T>(truncation)?;
    let logs: Vec<(T, T)> = (0..truncation)
        .into_par_iter()
        .map(|k| b_inf(&seq, k).map(|b| (b.log_modulus, b.rel_error_bound)))
        .collect::<Result<Vec<_>>>()?;
    let product_bounds = (0..truncation.min(20))
        .map(|k| {
            let n = T::from_count(k + 1);
            let log_reciprocal = -logs[k].0;
            let log_upper = T::lit(4.0) * n * (T::one() + n.ln());
            let within = log_reciprocal >= T::zero() && log_reciprocal <= log_upper;
            ProductBoundRow { n: k + 1, log_reciprocal, log_upper, certificate: logs[k].1, within }
        })
        .collect();
    let ts = vec![truncation / 2, 3 * truncation / 4, truncation];
    let q = p / (p - T::lit(2.0));
    let pi2 = T::PI() * T::PI();
    let points = seq.points().to_vec();
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    let mut modes: Vec<HeatMode<T>> = (0..truncation)
        .map(|k| HeatMode {
            n: k + 1,
            eigenvalue: -points[k].re,
            log_excluded_product: logs[k].0,
            certificate: logs[k].1,
            log_weights: Vec::with_capacity(taus.len()),
        })
        .collect();
    for &tau in taus {
        let log_w: Vec<T> = (0..truncation)
            .map(|k| {
                let n = T::from_count(k + 1);
                T::lit(2.0) * n.ln() + T::lit(2.0) * n * n * (T::one() - pi2 * tau) - T::lit(2.0) * logs[k].0
            })
            .collect();
        for (m, w) in modes.iter_mut().zip(&log_w) {
            m.log_weights.push(*w);
        }
        let evaluated = ts
            .par_iter()
            .enumerate()
            .map(|(i, &n)| -> Result<(T, T)> {
                let (v, _) = evaluate_form(&points[..n], &log_w[..n], Form::PoissonSum { q }, quad)?;
                let start = if i == 0 { 0 } else { ts[i - 1] };
                let (inc, _) = evaluate_form(&points[start..n], &log_w[start..n], Form::PoissonSum { q }, quad)?;
                Ok((v, inc))
            })
            .collect::<Result<Vec<_>>>()?;
        let evidence: Vec<TruncationPoint<T>> = ts
            .iter()
            .zip(&evaluated)
            .map(|(&n, r)| TruncationPoint { truncation: n, log_value: r.0, log_increment: r.1 })
            .collect();
        for e in &evidence {
            rows.push(HeatRow { tau, truncation: e.truncation, log_criterion: e.log_value, log_increment: e.log_increment });
        }
        verdicts.push(HeatVerdict { tau, verdict: evidence_verdict(&evidence, rule, false), above_threshold: tau > T::one() / pi2 });
    }
    Ok(HeatReport {
        p,
        threshold: T::one() / pi2,
        truncations: ts,
        rows,
        verdicts,
        product_bounds,
        modes,
        lp_caveat: caveat(TestKind::Controllability, InputSpace::Lp(p), false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn scalar_sys(eigs: &[f64], b: &[f64], p: f64) -> SemigroupSystem<f64> {
        SemigroupSystem::new(
            eigs.iter().map(|&l| cx(l, 0.0)).collect(),
            b.iter().map(|&v| CVector::from_element(1, cx(v, 0.0))).collect(),
            2.0,
            InputSpace::HardyPreimage(p),
        )
        .unwrap()
    }

    #[test]
    fn mirror_data() {
        let sys = scalar_sys(&[-1.0], &[1.0], 2.0);
        let (seq, data) = to_interpolation_data(&sys).unwrap();
        assert_eq!(seq.point(0), cx(1.0, 0.0));
        assert!((data.entry(0).g[(0, 0)] - cx(1.0, 0.0)).norm() < 1e-15);
        let v = SemigroupSystem::new(
            vec![cx(-1.0, 0.0)],
            vec![CVector::from_vec(vec![cx(1.0, 0.0), cx(0.0, 1.0)])],
            2.0,
            InputSpace::Lp(2.0),
        )
        .unwrap();
        let (_, d) = to_interpolation_data(&v).unwrap();
        let f = &d.entry(0).i_frame;
        let expect = CVector::from_vec(vec![cx(1.0, 0.0), cx(0.0, 1.0)]) / cx(2f64.sqrt(), 0.0);
        assert!((f.column(0).dotc(&expect).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_mode_exact_value() {
        let (l, b, p) = (-3.0, 0.7, 2.0);
        let sys = scalar_sys(&[l], &[b], p).exhaustive();
        let v = exact_controllability_check(&sys, &ControlOptions::default()).unwrap();
        let expect = (-l).powf(2.0 - 2.0 / p) / (b * b);
        assert!((v.criterion_value - expect).abs() < 1e-9 * expect, "{} vs {expect}", v.criterion_value);
        assert_eq!(v.verdict, Verdict::Positive);
    }

    #[test]
    fn zero_vector_fails_rank_test() {
        let eig = vec![cx(-1.0, 0.0), cx(-2.0, 0.0)];
        let vs = vec![CVector::from_element(1, cx(1.0, 0.0)), CVector::from_element(1, cx(0.0, 0.0))];
        let v = approx_controllability_from_vectors(&eig, &vs, InputSpace::Lp(2.0), true);
        assert_eq!(v.verdict, Verdict::Negative);
        let sys = scalar_sys(&[-1.0, -2.0], &[1.0, 0.5], 2.0);
        let sys = SemigroupSystem { input_space: InputSpace::Lp(3.0), ..sys }.assume_totally_disconnected(true);
        assert_eq!(approx_controllability_check(&sys).verdict, Verdict::Positive);
        let heat = heat_system::<f64>(20, 4.0, 2.0).unwrap();
        assert!(rank_test(heat.control_vectors()).iter().all(|&r| r == 1));
    }

    #[test]
    fn evidence_rule() {
        let pt = |n, v: f64, i: f64| TruncationPoint { truncation: n, log_value: v, log_increment: i };
        let rule = DivergenceRule::default();
        assert_eq!(evidence_verdict(&[pt(1, 0.0, 0.0), pt(2, 5.0, 5.0), pt(3, 10.0, 10.0)], &rule, false), Verdict::Negative);
        assert_eq!(evidence_verdict(&[pt(1, 0.0, 0.0), pt(2, 0.1, -3.0), pt(3, 0.11, -8.0)], &rule, false), Verdict::Positive);
        assert_eq!(evidence_verdict(&[pt(1, 0.0, 0.0), pt(2, 0.1, -3.0)], &rule, false), Verdict::Inconclusive);
    }

    #[test]
    fn caveats() {
        assert_eq!(caveat(TestKind::Controllability, InputSpace::Lp(3.0), false), Caveat::SufficientOnly);
        assert_eq!(caveat(TestKind::Controllability, InputSpace::Lp(1.5), false), Caveat::NecessaryOnly);
        assert_eq!(caveat(TestKind::Admissibility, InputSpace::Lp(1.5), false), Caveat::SufficientOnly);
        assert_eq!(caveat(TestKind::Admissibility, InputSpace::Lp(2.0), false), Caveat::Equivalent);
        assert_eq!(caveat(TestKind::Controllability, InputSpace::HardyPreimage(3.0), false), Caveat::Equivalent);
    }
}
