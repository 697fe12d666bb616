//! Tangential data and Blaschke-Potapov products.

use crate::error::{Error, Result};
use crate::hardy::{blaschke_factor, blaschke_factor_derivative, PointSequence};
use crate::linalg::{complement_frame, condition_number, numerical_rank, orthonormal_columns, projector, solve, svd};
use crate::scalar::{CMatrix, Cx, Real};

/// Default relative rank threshold for tangential matrices.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Largest admissible condition number of an intermediate product value.
pub const FACTOR_CONDITION_LIMIT: f64 = 1e12;

/// Data derived from one tangential matrix `G_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentialEntry<T: Real> {
    pub g: CMatrix<T>,
    /// Numerical rank `d_k`.
    pub rank: usize,
    /// Nonzero singular values, decreasing.
    pub sigma: Vec<T>,
    /// Orthonormal frame of `I_k = (ker G_k)^perp`.
    pub i_frame: CMatrix<T>,
    /// Orthonormal frame of `I_k^perp = ker G_k`.
    pub i_perp_frame: CMatrix<T>,
    /// Orthonormal frame of `J_k = range G_k`.
    pub j_frame: CMatrix<T>,
    /// `G_k^{-1}`: the inverse of `G_k` restricted to `I_k -> J_k`, composed with `P_{J_k}`.
    pub inverse: CMatrix<T>,
}

impl<T: Real> TangentialEntry<T> {
    fn new(index: usize, g: CMatrix<T>, rank_tol: T) -> Result<Self> {
        let n = g.nrows();
        if g.ncols() != n {
            return Err(Error::DimensionMismatch(format!("tangential matrix {index} is not square")));
        }
        let s = svd(&g);
        let rank = numerical_rank(&s.sigma, rank_tol);
        if rank == 0 {
            return Err(Error::ZeroTangentialMatrix { index });
        }
        let i_frame = s.v.columns(0, rank).into_owned();
        let j_frame = s.u.columns(0, rank).into_owned();
        let sigma: Vec<T> = s.sigma[..rank].to_vec();
        let mut inv_sigma = CMatrix::zeros(rank, rank);
        for (i, &v) in sigma.iter().enumerate() {
            inv_sigma[(i, i)] = Cx::new(T::one() / v, T::zero());
        }
        let inverse = &i_frame * inv_sigma * j_frame.adjoint();
        let i_perp_frame = complement_frame(&i_frame, n);
        Ok(Self { g, rank, sigma, i_frame, i_perp_frame, j_frame, inverse })
    }

    /// `||G_k||`.
    pub fn norm(&self) -> T {
        self.sigma[0]
    }

    /// `||G_k^{-1}||`.
    pub fn inverse_norm(&self) -> T {
        T::one() / self.sigma[self.rank - 1]
    }

    /// Projector onto `I_k`.
    pub fn i_projector(&self) -> CMatrix<T> {
        projector(&self.i_frame)
    }
}

/// The matrices `G_k` of a tangential interpolation problem with their derived subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentialData<T: Real> {
    dim: usize,
    rank_tol: T,
    entries: Vec<TangentialEntry<T>>,
}

impl<T: Real> TangentialData<T> {
    /// Builds the data with a relative rank tolerance measured against the largest singular value.
    pub fn new(mats: Vec<CMatrix<T>>, rank_tol: T) -> Result<Self> {
        if !(rank_tol > T::zero()) {
            return Err(Error::InvalidParameter("rank tolerance must be positive".into()));
        }
        let dim = mats.first().map(|m| m.nrows()).unwrap_or(0);
        let mut entries = Vec::with_capacity(mats.len());
        for (i, m) in mats.into_iter().enumerate() {
            if m.nrows() != dim {
                return Err(Error::DimensionMismatch(format!("tangential matrix {i} has size {} not {dim}", m.nrows())));
            }
            entries.push(TangentialEntry::new(i, m, rank_tol)?);
        }
        Ok(Self { dim, rank_tol, entries })
    }

    pub fn with_default_tol(mats: Vec<CMatrix<T>>) -> Result<Self> {
        Self::new(mats, T::lit(DEFAULT_RANK_TOL))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rank_tol(&self) -> T {
        self.rank_tol
    }

    pub fn entry(&self, k: usize) -> &TangentialEntry<T> {
        &self.entries[k]
    }

    pub fn entries(&self) -> &[TangentialEntry<T>] {
        &self.entries
    }

    /// The first `n` entries.
    pub fn truncate(&self, n: usize) -> Self {
        Self { dim: self.dim, rank_tol: self.rank_tol, entries: self.entries[..n.min(self.len())].to_vec() }
    }

    /// Chain of subspaces `I_k`.
    pub fn i_chain(&self) -> SubspaceChain<T> {
        SubspaceChain { dim: self.dim, frames: self.entries.iter().map(|e| e.i_frame.clone()).collect() }
    }

    /// Chain of subspaces `I_k^perp`.
    pub fn i_perp_chain(&self) -> SubspaceChain<T> {
        SubspaceChain { dim: self.dim, frames: self.entries.iter().map(|e| e.i_perp_frame.clone()).collect() }
    }
}

/// One subspace of `C^N` per interpolation point, stored as orthonormal frames.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceChain<T: Real> {
    dim: usize,
    frames: Vec<CMatrix<T>>,
}

impl<T: Real> SubspaceChain<T> {
    /// Orthonormalises arbitrary spanning sets; a frame with zero columns is the trivial subspace.
    pub fn from_spanning_sets(dim: usize, spans: Vec<CMatrix<T>>, tol: T) -> Result<Self> {
        let mut frames = Vec::with_capacity(spans.len());
        for (i, s) in spans.into_iter().enumerate() {
            if s.nrows() != dim && s.ncols() != 0 {
                return Err(Error::DimensionMismatch(format!("subspace {i} lives in the wrong dimension")));
            }
            frames.push(if s.ncols() == 0 { CMatrix::zeros(dim, 0) } else { orthonormal_columns(&s, tol) });
        }
        Ok(Self { dim, frames })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame(&self, k: usize) -> &CMatrix<T> {
        &self.frames[k]
    }

    /// The chain with entry `k` removed.
    pub fn without(&self, k: usize) -> Self {
        let frames = self.frames.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, f)| f.clone()).collect();
        Self { dim: self.dim, frames }
    }

    /// The chain with entry `k` moved to the end.
    pub fn moved_last(&self, k: usize) -> Self {
        let mut s = self.without(k);
        s.frames.push(self.frames[k].clone());
        s
    }
}

/// Factor `b_k(z) P_perp + P` of a Blaschke-Potapov product.
#[derive(Debug, Clone, PartialEq)]
pub struct PotapovFactor<T: Real> {
    pub point: Cx<T>,
    /// Orthonormal frame of the transported subspace.
    pub frame: CMatrix<T>,
    pub projector: CMatrix<T>,
}

impl<T: Real> PotapovFactor<T> {
    fn value(&self, z: Cx<T>) -> CMatrix<T> {
        let n = self.projector.nrows();
        let b = blaschke_factor(z, self.point);
        let id = CMatrix::<T>::identity(n, n);
        (&id - &self.projector) * b + &self.projector
    }

    fn inverse(&self, z: Cx<T>) -> CMatrix<T> {
        let n = self.projector.nrows();
        let b = blaschke_factor(z, self.point);
        let id = CMatrix::<T>::identity(n, n);
        (&id - &self.projector) / b + &self.projector
    }

    fn derivative(&self, z: Cx<T>) -> CMatrix<T> {
        let n = self.projector.nrows();
        let id = CMatrix::<T>::identity(n, n);
        (&id - &self.projector) * blaschke_factor_derivative(z, self.point)
    }
}

/// Inner matrix function `Theta` whose values satisfy `Theta(z_k) C^N ⊆ L_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotapovProduct<T: Real> {
    dim: usize,
    factors: Vec<PotapovFactor<T>>,
}

impl<T: Real> PotapovProduct<T> {
    /// Builds the product for points and subspaces taken in the given order.
    pub fn build(points: &[Cx<T>], chain: &SubspaceChain<T>) -> Result<Self> {
        if points.len() != chain.len() {
            return Err(Error::DimensionMismatch(format!("{} points but {} subspaces", points.len(), chain.len())));
        }
        let dim = chain.dim();
        let mut prod = Self { dim, factors: Vec::with_capacity(points.len()) };
        for (k, &zk) in points.iter().enumerate() {
            let frame = chain.frame(k);
            let transported = if frame.ncols() == 0 || k == 0 {
                frame.clone()
            } else {
                let value = prod.evaluate(zk);
                let cond = condition_number(&value);
                if !(cond <= T::lit(FACTOR_CONDITION_LIMIT)) {
                    return Err(Error::IllConditionedFactor { index: k, condition: cond.as_f64() });
                }
                let x = solve(&value, frame).ok_or(Error::IllConditionedFactor { index: k, condition: f64::INFINITY })?;
                orthonormal_columns(&x, T::lit(1e-12))
            };
            if transported.ncols() != frame.ncols() {
                return Err(Error::IllConditionedFactor { index: k, condition: f64::INFINITY });
            }
            let projector = if transported.ncols() == 0 { CMatrix::zeros(dim, dim) } else { projector(&transported) };
            prod.factors.push(PotapovFactor { point: zk, frame: transported, projector });
        }
        Ok(prod)
    }

    /// Builds the product for a stored sequence.
    pub fn for_sequence(seq: &PointSequence<T>, chain: &SubspaceChain<T>) -> Result<Self> {
        Self::build(seq.points(), chain)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[PotapovFactor<T>] {
        &self.factors
    }

    /// `Theta(z)`, multiplying factors from left to right.
    pub fn evaluate(&self, z: Cx<T>) -> CMatrix<T> {
        let mut acc = CMatrix::<T>::identity(self.dim, self.dim);
        for f in &self.factors {
            acc *= f.value(z);
        }
        acc
    }

    /// `Theta(z)^{-1}` for `z` away from the points.
    pub fn evaluate_inverse(&self, z: Cx<T>) -> CMatrix<T> {
        let mut acc = CMatrix::<T>::identity(self.dim, self.dim);
        for f in self.factors.iter().rev() {
            acc *= f.inverse(z);
        }
        acc
    }

    /// `Theta'(z)`.
    pub fn derivative(&self, z: Cx<T>) -> CMatrix<T> {
        let mut p = CMatrix::<T>::identity(self.dim, self.dim);
        let mut d = CMatrix::<T>::zeros(self.dim, self.dim);
        for f in &self.factors {
            let v = f.value(z);
            d = &d * &v + &p * f.derivative(z);
            p *= v;
        }
        d
    }
}

/// Products for the chains `I_k` and `I_k^perp` of a tangential problem.
pub fn theta_i_and_theta_iperp<T: Real>(
    seq: &PointSequence<T>,
    data: &TangentialData<T>,
) -> Result<(PotapovProduct<T>, PotapovProduct<T>)> {
    if seq.len() != data.len() {
        return Err(Error::DimensionMismatch(format!("{} points but {} matrices", seq.len(), data.len())));
    }
    let ti = PotapovProduct::for_sequence(seq, &data.i_chain())?;
    let tp = PotapovProduct::for_sequence(seq, &data.i_perp_chain())?;
    Ok((ti, tp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardy::blaschke_product;
    use crate::linalg::{frobenius, op_norm};
    use crate::scalar::cx;

    fn frames() -> (Vec<Cx<f64>>, SubspaceChain<f64>) {
        let pts = vec![cx(1.0, 0.0), cx(0.5, 1.0), cx(2.0, -1.5)];
        let spans = vec![
            CMatrix::from_row_slice(2, 1, &[cx(1.0, 0.0), cx(0.0, 1.0)]),
            CMatrix::from_row_slice(2, 1, &[cx(0.3, 0.0), cx(1.0, -0.2)]),
            CMatrix::from_row_slice(2, 1, &[cx(1.0, 0.0), cx(0.0, 0.0)]),
        ];
        (pts, SubspaceChain::from_spanning_sets(2, spans, 1e-12).unwrap())
    }

    #[test]
    fn unitary_on_axis() {
        let (pts, chain) = frames();
        let th = PotapovProduct::build(&pts, &chain).unwrap();
        for w in [-3.0, -0.4, 0.0, 1.1, 7.0] {
            let v = th.evaluate(cx(0.0, w));
            assert!(frobenius(&(v.adjoint() * &v - CMatrix::identity(2, 2))) < 1e-12);
        }
        assert!(op_norm(&th.evaluate(cx(0.7, 0.2))) <= 1.0 + 1e-12);
    }

    #[test]
    fn values_at_points_land_in_subspaces() {
        let (pts, chain) = frames();
        let th = PotapovProduct::build(&pts, &chain).unwrap();
        for (k, &zk) in pts.iter().enumerate() {
            let perp = CMatrix::identity(2, 2) - projector(chain.frame(k));
            assert!(frobenius(&(perp * th.evaluate(zk))) < 1e-12);
        }
    }

    #[test]
    fn trivial_subspaces() {
        let pts = vec![cx(1.0, 0.0), cx(2.0, 1.0)];
        let full = SubspaceChain::from_spanning_sets(2, vec![CMatrix::identity(2, 2); 2], 1e-12).unwrap();
        let th = PotapovProduct::build(&pts, &full).unwrap();
        assert!(frobenius(&(th.evaluate(cx(0.3, 0.3)) - CMatrix::identity(2, 2))) < 1e-14);
        let zero = SubspaceChain::from_spanning_sets(2, vec![CMatrix::zeros(2, 0); 2], 1e-12).unwrap();
        let th = PotapovProduct::build(&pts, &zero).unwrap();
        let seq = PointSequence::new(pts.clone(), 1e-8).unwrap();
        let z = cx(0.4, -0.8);
        let b = blaschke_product(&seq, 2, z);
        assert!(frobenius(&(th.evaluate(z) - CMatrix::identity(2, 2) * b)) < 1e-14);
    }

    #[test]
    fn inverse_and_derivative() {
        let (pts, chain) = frames();
        let th = PotapovProduct::build(&pts, &chain).unwrap();
        let z = cx(0.9, 0.4);
        assert!(frobenius(&(th.evaluate(z) * th.evaluate_inverse(z) - CMatrix::identity(2, 2))) < 1e-12);
        let h = 1e-6;
        let fd = (th.evaluate(z + cx(h, 0.0)) - th.evaluate(z - cx(h, 0.0))) / cx(2.0 * h, 0.0);
        assert!(frobenius(&(fd - th.derivative(z))) < 1e-7);
    }

    #[test]
    fn tangential_entry_inverse_is_pseudo_inverse() {
        let g = CMatrix::from_row_slice(2, 2, &[cx(1.0, 0.0), cx(2.0, 0.0), cx(2.0, 0.0), cx(4.0, 0.0)]);
        let d = TangentialData::with_default_tol(vec![g.clone()]).unwrap();
        let e = d.entry(0);
        assert_eq!(e.rank, 1);
        assert!(frobenius(&(&g * &e.inverse * &g - &g)) < 1e-12);
        assert!(matches!(
            TangentialData::<f64>::with_default_tol(vec![CMatrix::zeros(2, 2)]),
            Err(Error::ZeroTangentialMatrix { index: 0 })
        ));
    }
}
