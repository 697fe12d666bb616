use proptest::prelude::*;
use tangent_hp::linalg::{op_norm, projector};
use tangent_hp::potapov::{PotapovProduct, SubspaceChain, TangentialData};
use tangent_hp::{CMatrix, CVector, Cx};

fn cplx() -> impl Strategy<Value = Cx<f64>> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Cx::new(a, b))
}

fn point() -> impl Strategy<Value = Cx<f64>> {
    (0.2f64..3.0, -3.0f64..3.0).prop_map(|(x, y)| Cx::new(x, y))
}

/// Up to five points in `C^dim` with rank one or two tangential matrices.
fn problem() -> impl Strategy<Value = (Vec<Cx<f64>>, Vec<CMatrix<f64>>)> {
    (1usize..=3, 1usize..=5).prop_flat_map(|(dim, n)| {
        let mats = prop::collection::vec(
            (1usize..=2, prop::collection::vec(cplx(), 2 * dim * 2)).prop_map(move |(r, e)| {
                let r = r.min(dim);
                let a = CMatrix::from_fn(dim, r, |i, j| e[i * 2 + j]);
                let b = CMatrix::from_fn(r, dim, |i, j| e[2 * dim + i * dim + j]);
                a * b
            }),
            n,
        );
        (prop::collection::vec(point(), n), mats)
    })
}

fn defect_at_points(theta: &PotapovProduct<f64>, pts: &[Cx<f64>], chain: &SubspaceChain<f64>) -> f64 {
    let dim = chain.dim();
    let id = CMatrix::<f64>::identity(dim, dim);
    (0..pts.len())
        .map(|k| {
            let f = chain.frame(k);
            let perp = if f.ncols() == 0 { id.clone() } else { &id - projector(f) };
            op_norm(&(perp * theta.evaluate(pts[k])))
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inner_and_zero_structure((pts, mats) in problem()) {
        let Ok(data) = TangentialData::with_default_tol(mats) else { return Ok(()) };
        for chain in [data.i_chain(), data.i_perp_chain()] {
            let Ok(theta) = PotapovProduct::build(&pts, &chain) else { continue };
            let dim = chain.dim();
            let id = CMatrix::<f64>::identity(dim, dim);
            for j in 0..200 {
                let omega = ((j as f64 + 0.5) / 200.0 - 0.5) * 60.0;
                let v = theta.evaluate(Cx::new(0.0, omega));
                prop_assert!((v.adjoint() * &v - &id).norm() < 1e-8);
            }
            prop_assert!(defect_at_points(&theta, &pts, &chain) < 1e-10);
        }
    }

    #[test]
    fn permuted_order_keeps_zero_structure((pts, mats) in problem(), shift in 0usize..5) {
        let Ok(data) = TangentialData::with_default_tol(mats) else { return Ok(()) };
        let n = pts.len();
        let order: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let chain = data.i_perp_chain();
        let frames: Vec<CMatrix<f64>> = order.iter().map(|&i| chain.frame(i).clone()).collect();
        let permuted = SubspaceChain::from_spanning_sets(chain.dim(), frames, 1e-12).unwrap();
        let ppts: Vec<Cx<f64>> = order.iter().map(|&i| pts[i]).collect();
        let Ok(theta) = PotapovProduct::build(&ppts, &permuted) else { return Ok(()) };
        prop_assert!(defect_at_points(&theta, &ppts, &permuted) < 1e-10);
    }

    #[test]
    fn rank_and_pseudo_inverse((_pts, mats) in problem(), coeffs in prop::collection::vec(cplx(), 3)) {
        let Ok(data) = TangentialData::with_default_tol(mats) else { return Ok(()) };
        for e in data.entries() {
            prop_assert_eq!(e.rank, e.i_frame.ncols());
            prop_assert_eq!(e.rank, e.j_frame.ncols());
            prop_assert_eq!(e.rank + e.i_perp_frame.ncols(), data.dim());
            let x = CVector::from_fn(data.dim(), |i, _| coeffs[i]);
            let y = &e.g * x;
            let back = &e.g * (&e.inverse * &y);
            prop_assert!((back - &y).norm() < 1e-10 * (1.0 + y.norm()));
        }
    }
}
