//! Input files and their conversion into library types.
//!
//! Complex numbers are `[re, im]` pairs and matrices are lists of rows. Unknown fields are
//! rejected so that a typo cannot silently fall back to a default.

use serde::{Deserialize, Serialize};
use tangent_hp::carleson::DiscreteMeasure;
use tangent_hp::control::{InputSpace, SemigroupSystem};
use tangent_hp::hardy::{PointSequence, TailModel};
use tangent_hp::interpolation::InterpolationProblem;
use tangent_hp::potapov::TangentialData;
use tangent_hp::quadrature::AxisQuadrature;
use tangent_hp::weights::{MatrixWeight, ScalarWeight, WeightSpec};
use tangent_hp::{CMatrix64, CVector64, Cx64};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

const DEFAULT_TAIL_TOLERANCE: f64 = 1e-8;

pub type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Problem {
    Measure(MeasureProblem),
    Interpolation(InterpProblem),
    System(SystemProblem),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncations: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomFile {
    pub re: f64,
    pub im: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Pair>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureProblem {
    pub version: String,
    pub atoms: Vec<AtomFile>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `1 + |omega|^{2 beta}`.
    OnePlusPower,
    /// `|omega|^{2 beta}`.
    PurePower,
    /// `|omega|^{2 beta}` evaluated on the Sobolev route.
    Sobolev,
    Constant,
    /// `diag(|omega|^{2 beta_i})`.
    DiagonalPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightFile {
    pub kind: WeightKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpProblem {
    pub version: String,
    pub points: Vec<Pair>,
    #[serde(rename = "G_matrices")]
    pub g_matrices: Vec<Vec<Vec<Pair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<Vec<Pair>>>,
    pub p: f64,
    pub s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightFile>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum InputSpaceFile {
    Lp { p: f64 },
    HardyPreimage { p: f64 },
    Sobolev { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailFile {
    pub scale: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemProblem {
    pub version: String,
    pub eigenvalues: Vec<Pair>,
    pub b_vectors: Vec<Vec<Pair>>,
    pub s: f64,
    pub input_space: InputSpaceFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailFile>,
    #[serde(default)]
    pub exhaustive: bool,
    #[serde(default)]
    pub totally_disconnected: bool,
    #[serde(default)]
    pub options: Options,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn finite(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(schema(format!("{name} must be finite")))
    }
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(schema(format!("{name} must be positive and finite")))
    }
}

fn cx(name: &str, p: Pair) -> Result<Cx64, CliError> {
    Ok(Cx64::new(finite(name, p[0])?, finite(name, p[1])?))
}

fn matrix(name: &str, rows: &[Vec<Pair>]) -> Result<CMatrix64, CliError> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if nrows == 0 || ncols == 0 {
        return Err(schema(format!("{name} is empty")));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(schema(format!("{name} has rows of different lengths")));
    }
    let mut m = CMatrix64::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            m[(i, j)] = cx(name, e)?;
        }
    }
    Ok(m)
}

fn vector(name: &str, v: &[Pair]) -> Result<CVector64, CliError> {
    if v.is_empty() {
        return Err(schema(format!("{name} is empty")));
    }
    let entries = v.iter().map(|&e| cx(name, e)).collect::<Result<Vec<_>, _>>()?;
    Ok(CVector64::from_vec(entries))
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Measure(_) => "measure",
            Problem::Interpolation(_) => "interpolation",
            Problem::System(_) => "system",
        }
    }

    fn version(&self) -> &str {
        match self {
            Problem::Measure(m) => &m.version,
            Problem::Interpolation(m) => &m.version,
            Problem::System(m) => &m.version,
        }
    }

    pub fn options(&self) -> &Options {
        match self {
            Problem::Measure(m) => &m.options,
            Problem::Interpolation(m) => &m.options,
            Problem::System(m) => &m.options,
        }
    }

    /// Parses and validates a problem file.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let p: Problem = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
        if p.version() != SCHEMA_VERSION {
            return Err(schema(format!("unsupported schema version {:?}, expected {SCHEMA_VERSION:?}", p.version())));
        }
        p.options().validate()?;
        Ok(p)
    }
}

impl Options {
    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("tail_tolerance", self.tail_tolerance), ("quad_abs_tol", self.quad_abs_tol), ("rank_tol", self.rank_tol)] {
            if let Some(x) = v {
                positive(name, x)?;
            }
        }
        if let Some(t) = &self.truncations {
            if t.is_empty() || t.contains(&0) {
                return Err(schema("truncations must be a nonempty list of positive integers"));
            }
        }
        Ok(())
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance.unwrap_or(DEFAULT_TAIL_TOLERANCE)
    }

    pub fn quadrature(&self) -> AxisQuadrature<f64> {
        match self.quad_abs_tol {
            Some(t) => AxisQuadrature::default().with_abs_tol(t),
            None => AxisQuadrature::default(),
        }
    }
}

impl MeasureProblem {
    pub fn to_measure(&self) -> Result<DiscreteMeasure<f64>, CliError> {
        if self.atoms.is_empty() {
            return Err(schema("a measure needs at least one atom"));
        }
        let points = self
            .atoms
            .iter()
            .map(|a| Ok(Cx64::new(finite("atom re", a.re)?, finite("atom im", a.im)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let scalar = self.atoms.iter().all(|a| a.weight.is_some() && a.matrix.is_none());
        let matrix_kind = self.atoms.iter().all(|a| a.matrix.is_some() && a.weight.is_none());
        if scalar {
            let masses = self.atoms.iter().map(|a| finite("atom weight", a.weight.unwrap_or(0.0))).collect::<Result<Vec<_>, _>>()?;
            Ok(DiscreteMeasure::scalar(&points, &masses)?)
        } else if matrix_kind {
            let masses = self
                .atoms
                .iter()
                .map(|a| matrix("atom matrix", a.matrix.as_deref().unwrap_or(&[])))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(DiscreteMeasure::matrix(&points, masses)?)
        } else {
            Err(schema("every atom needs exactly one of weight or matrix, and all atoms the same one"))
        }
    }
}

impl WeightFile {
    fn beta(&self) -> Result<f64, CliError> {
        finite("weight beta", self.beta.ok_or_else(|| schema("weight kind needs beta"))?)
    }

    pub fn to_spec(&self) -> Result<WeightSpec<f64>, CliError> {
        Ok(match self.kind {
            WeightKind::OnePlusPower => WeightSpec::Scalar(ScalarWeight::one_plus_power(self.beta()?)),
            WeightKind::PurePower | WeightKind::Sobolev => WeightSpec::Scalar(ScalarWeight::pure_power(self.beta()?)),
            WeightKind::Constant => {
                let v = self.value.ok_or_else(|| schema("constant weight needs value"))?;
                WeightSpec::Scalar(ScalarWeight::Constant(positive("weight value", v)?))
            }
            WeightKind::DiagonalPower => {
                let betas = self.betas.as_ref().ok_or_else(|| schema("diagonal_power weight needs betas"))?;
                let diag = betas.iter().map(|&b| Ok(ScalarWeight::pure_power(finite("weight beta", b)?))).collect::<Result<Vec<_>, CliError>>()?;
                WeightSpec::Matrix(MatrixWeight::Diagonal(diag))
            }
        })
    }
}

impl InterpProblem {
    pub fn to_problem(&self) -> Result<InterpolationProblem<f64>, CliError> {
        if self.points.is_empty() {
            return Err(schema("an interpolation problem needs at least one point"));
        }
        if self.points.len() != self.g_matrices.len() {
            return Err(schema(format!("{} points but {} G_matrices", self.points.len(), self.g_matrices.len())));
        }
        let pts = self.points.iter().map(|&p| cx("point", p)).collect::<Result<Vec<_>, _>>()?;
        let mats = self.g_matrices.iter().map(|m| matrix("G matrix", m)).collect::<Result<Vec<_>, _>>()?;
        let seq = PointSequence::new(pts, self.options.tail_tolerance())?;
        let data = match self.options.rank_tol {
            Some(t) => TangentialData::new(mats, t)?,
            None => TangentialData::with_default_tol(mats)?,
        };
        let mut prob = InterpolationProblem::new(seq, data, finite("p", self.p)?, finite("s", self.s)?)?;
        if let Some(w) = &self.weight {
            prob = prob.with_weight(w.to_spec()?)?;
        }
        if let Some(t) = &self.targets {
            let targets = t.iter().map(|v| vector("target", v)).collect::<Result<Vec<_>, _>>()?;
            prob = prob.with_targets(targets)?;
        }
        Ok(prob)
    }
}

impl InputSpaceFile {
    fn to_space(self) -> Result<InputSpace<f64>, CliError> {
        Ok(match self {
            InputSpaceFile::Lp { p } => InputSpace::Lp(finite("input_space p", p)?),
            InputSpaceFile::HardyPreimage { p } => InputSpace::HardyPreimage(finite("input_space p", p)?),
            InputSpaceFile::Sobolev { beta } => InputSpace::Sobolev(finite("input_space beta", beta)?),
        })
    }
}

impl SystemProblem {
    pub fn to_system(&self) -> Result<SemigroupSystem<f64>, CliError> {
        if self.eigenvalues.len() != self.b_vectors.len() {
            return Err(schema(format!("{} eigenvalues but {} b_vectors", self.eigenvalues.len(), self.b_vectors.len())));
        }
        let eig = self.eigenvalues.iter().map(|&p| cx("eigenvalue", p)).collect::<Result<Vec<_>, _>>()?;
        let b = self.b_vectors.iter().map(|v| vector("b vector", v)).collect::<Result<Vec<_>, _>>()?;
        let mut sys = SemigroupSystem::new(eig, b, finite("s", self.s)?, self.input_space.to_space()?)?
            .assume_totally_disconnected(self.totally_disconnected)
            .with_tail_tolerance(self.options.tail_tolerance());
        if let Some(t) = self.tail {
            sys = sys.with_tail(TailModel::RealPower { scale: positive("tail scale", t.scale)?, exponent: finite("tail exponent", t.exponent)? });
        }
        if self.exhaustive {
            sys = sys.exhaustive();
        }
        if let Some(t) = self.options.rank_tol {
            sys = sys.with_rank_tol(t);
        }
        Ok(sys)
    }
}
