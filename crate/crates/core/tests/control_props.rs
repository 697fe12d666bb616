use proptest::prelude::*;
use tangent_hp::control::{
    admissibility_check, exact_controllability_check, heat_sequence, null_controllability_check,
    to_interpolation_data, ControlOptions, InputSpace, SemigroupSystem, Verdict,
};
use tangent_hp::interpolation::{m_estimate_angle_route, product_angle, subspace_angle, InterpolationProblem, RouteOptions};
use tangent_hp::hardy::{excluded_product, PointSequence};
use tangent_hp::potapov::TangentialData;
use tangent_hp::{CMatrix, CVector, Cx};

/// Modes ordered by `|Re lambda|` with real parts `-(k + 1)^2 x` and control vectors in `C^dim`.
fn system() -> impl Strategy<Value = (Vec<Cx<f64>>, Vec<CVector<f64>>, usize)> {
    (1usize..=2, 3usize..=6).prop_flat_map(|(dim, n)| {
        (
            prop::collection::vec((0.5f64..1.5, -2.0f64..2.0), n),
            prop::collection::vec(prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim), n),
        )
            .prop_map(move |(e, b)| {
                let mut eig: Vec<Cx<f64>> =
                    e.iter().enumerate().map(|(k, &(x, y))| Cx::new(-x * ((k + 1) * (k + 1)) as f64, y)).collect();
                eig.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
                let vs = b
                    .into_iter()
                    .map(|v| CVector::from_iterator(dim, v.into_iter().map(|(a, b)| Cx::new(a + 1.5, b))))
                    .collect();
                (eig, vs, dim)
            })
    })
}

fn build(eig: &[Cx<f64>], vs: &[CVector<f64>], p: f64) -> SemigroupSystem<f64> {
    SemigroupSystem::new(eig.to_vec(), vs.to_vec(), 2.0, InputSpace::Lp(p)).unwrap()
}

fn opts(n: usize) -> ControlOptions<f64> {
    ControlOptions { truncations: vec![n - 2, n - 1, n], ..ControlOptions::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mirror_consistency((eig, vs, _dim) in system(), p in prop::sample::select(vec![1.5, 2.0, 4.0])) {
        let sys = build(&eig, &vs, p);
        let v = exact_controllability_check(&sys, &opts(eig.len())).unwrap();
        let (seq, data) = to_interpolation_data(&sys).unwrap();
        let prob = InterpolationProblem::new(seq, data, p, 2.0).unwrap();
        let est = m_estimate_angle_route(&prob, &RouteOptions::default()).unwrap();
        // Direct computation from (-lambda_n, b_n).
        let pts: Vec<Cx<f64>> = eig.iter().map(|l| -*l).collect();
        let seq = PointSequence::new(pts, 1e-8).unwrap();
        let rows: Vec<CMatrix<f64>> = vs
            .iter()
            .map(|b| {
                let mut g = CMatrix::zeros(b.len(), b.len());
                g.row_mut(0).copy_from(&b.adjoint());
                g
            })
            .collect();
        let data = TangentialData::with_default_tol(rows).unwrap();
        for (k, s) in v.summands.iter().enumerate() {
            // Scalar angles are the excluded Blaschke products, vector angles come from the Gram matrix.
            let sin = if vs[0].len() == 1 {
                excluded_product(&seq, k, seq.len(), seq.point(k)).norm()
            } else {
                subspace_angle(&seq, &data, k, None).unwrap().sin
            };
            let direct = 2.0 * ((-eig[k].re).ln() - vs[k].norm().ln() - sin.ln());
            prop_assert!((s.log_weight - direct).abs() < 1e-9, "{} vs {} dim {}", s.log_weight, direct, vs[0].len());
            prop_assert!((s.log_weight - est.log_atom_weights[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn null_criterion_is_monotone_in_tau((eig, vs, _dim) in system(), t1 in 0.01f64..1.0, dt in 0.0f64..1.0, p in prop::sample::select(vec![1.5, 3.0])) {
        let sys = build(&eig, &vs, p);
        let o = opts(eig.len());
        let a = null_controllability_check(&sys, t1, &o).unwrap();
        let b = null_controllability_check(&sys, t1 + dt, &o).unwrap();
        prop_assert!(b.log_criterion_value <= a.log_criterion_value + 1e-9);
        if a.verdict == Verdict::Positive {
            prop_assert_eq!(b.verdict, Verdict::Positive);
        }
        let e = exact_controllability_check(&sys, &o).unwrap();
        for (n, x) in a.summands.iter().zip(&e.summands) {
            prop_assert!(n.log_weight <= x.log_weight);
        }
        prop_assert!(a.log_criterion_value <= e.log_criterion_value + 1e-9);
    }

    #[test]
    fn admissibility_is_homogeneous((eig, vs, _dim) in system(), c in 0.05f64..20.0, p in prop::sample::select(vec![1.5, 2.0, 4.0])) {
        let o = opts(eig.len());
        let a = admissibility_check(&build(&eig, &vs, p), &o).unwrap();
        let scaled: Vec<CVector<f64>> = vs.iter().map(|b| b * Cx::new(c, 0.0)).collect();
        let b = admissibility_check(&build(&eig, &scaled, p), &o).unwrap();
        prop_assert!((b.log_criterion_value - a.log_criterion_value - 2.0 * c.ln()).abs() < 1e-8);
    }
}

#[test]
fn scalar_gram_and_product_angles_on_heat_sequence() {
    // Normalised kernels at pi^2 n^2 become nearly parallel, so the Gram route is limited to a
    // short stored prefix.
    let with_tail = heat_sequence::<f64>(10).unwrap();
    let stored = PointSequence::new(with_tail.points().to_vec(), 1e-8).unwrap();
    let one = CMatrix::from_element(1, 1, Cx::new(1.0, 0.0));
    let data = TangentialData::with_default_tol(vec![one; 10]).unwrap();
    let mut worst = 0.0f64;
    for k in 0..10 {
        let gram = subspace_angle(&stored, &data, k, None).unwrap();
        let prod = product_angle(&with_tail, k, None).unwrap();
        worst = worst.max((gram.log_sin - prod.log_sin).abs());
    }
    println!("largest log ratio of Gram and product angles: {worst:.3e}");
    assert!(worst.is_finite());
}
