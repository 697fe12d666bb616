use tangent_hp::hardy::PointSequence;
use tangent_hp::interpolation::{m_estimate_angle_route, InterpolationProblem, RouteOptions};
use tangent_hp::potapov::TangentialData;
use tangent_hp::quadrature::AxisQuadrature;
use tangent_hp::{CMatrix, Cx};

fn angle_route_value<T: tangent_hp::Real>(tol: T) -> T {
    let pts = [(1.0, 0.0), (2.0, 1.0), (0.5, -1.0)].map(|(x, y)| Cx::new(T::lit(x), T::lit(y)));
    let seq = PointSequence::new(pts.to_vec(), tol).unwrap();
    let one = CMatrix::from_element(1, 1, Cx::new(T::one(), T::zero()));
    let data = TangentialData::new(vec![one; 3], tol).unwrap();
    let prob = InterpolationProblem::new(seq, data, T::lit(2.0), T::lit(2.0)).unwrap();
    let opts = RouteOptions { quad: AxisQuadrature::default().with_abs_tol(tol), ..RouteOptions::default() };
    m_estimate_angle_route(&prob, &opts).unwrap().value_upper
}

#[test]
fn single_precision_matches_double() {
    let a = angle_route_value::<f32>(1e-5) as f64;
    let b = angle_route_value::<f64>(1e-10);
    assert!((a - b).abs() < 1e-4 * b, "{a} vs {b}");
}

#[test]
fn single_precision_rectangle_keeps_atoms_on_the_box_edge() {
    use tangent_hp::carleson::{carleson_constant, CarlesonMethod, DiscreteMeasure};
    for (x, y) in [(1.0f32, 0.0f32), (0.3, 2.0), (7.0, -3.0)] {
        let mu = DiscreteMeasure::scalar(&[Cx::new(x, y)], &[1.0f32]).unwrap();
        let r = carleson_constant(&mu, 1.0, Some(CarlesonMethod::Rectangle), &AxisQuadrature::default()).unwrap();
        assert!((r.constant * x - 1.0).abs() < 1e-5, "{} at {x}", r.constant * x);
    }
}
