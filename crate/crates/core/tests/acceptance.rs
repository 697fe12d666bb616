//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest harness so the
//! lines are always printed.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tangent_hp::carleson::{carleson_constant, CarlesonMethod, DiscreteMeasure};
use tangent_hp::control::{
    caveat, heat_demo, heat_system, null_controllability_check, Caveat, ControlOptions, DivergenceRule, InputSpace,
    TestKind, Verdict,
};
use tangent_hp::hardy::{b_inf, blaschke_factor, poisson_lq_norm, PointSequence, TailModel};
use tangent_hp::interpolation::{
    angle_report, build_interpolant, m_estimate_angle_route, m_estimate_general, m_s1_route, subspace_angle,
    InterpolationProblem, RouteOptions,
};
use tangent_hp::linalg::{op_norm, orthonormal_columns, projector};
use tangent_hp::potapov::{PotapovProduct, TangentialData};
use tangent_hp::quadrature::AxisQuadrature;
use tangent_hp::weights::{
    interval_family, log_polar_grid, matrix_a2_check, scalar_ap_check, MatrixWeight, ScalarWeight,
};
use tangent_hp::{CMatrix, CVector, Cx};

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Cx<f64> {
    Cx::new(re, im)
}

fn rand_c(rng: &mut ChaCha8Rng) -> Cx<f64> {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn rand_matrix(rng: &mut ChaCha8Rng, r: usize, cols: usize) -> CMatrix<f64> {
    CMatrix::from_fn(r, cols, |_, _| rand_c(rng))
}

fn rand_point(rng: &mut ChaCha8Rng) -> Cx<f64> {
    c(rng.gen_range(0.2..3.0), rng.gen_range(-3.0..3.0))
}

fn heat_threshold() -> Outcome {
    let start = Instant::now();
    let sys = heat_system(20, 4.0, 2.0).map_err(|e| e.to_string())?;
    let opts = ControlOptions { truncations: vec![10, 15, 20], ..ControlOptions::default() };
    let above = null_controllability_check(&sys, 0.2, &opts).map_err(|e| e.to_string())?;
    let below = null_controllability_check(&sys, 0.05, &opts).map_err(|e| e.to_string())?;
    let demo = heat_demo(&[0.05, 0.2], 20, 4.0, &DivergenceRule::default(), &AxisQuadrature::default())
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let demo_ok = demo.verdicts[0].verdict == Verdict::Negative && demo.verdicts[1].verdict == Verdict::Positive;
    if above.verdict == Verdict::Positive && below.verdict == Verdict::Negative && demo_ok && secs < 10.0 {
        Ok(format!("tau=0.2 positive, tau=0.05 negative, {secs:.2}s"))
    } else {
        Err(format!("tau=0.2 {:?}, tau=0.05 {:?}, demo ok {demo_ok}, {secs:.2}s", above.verdict, below.verdict))
    }
}

fn product_bound() -> Outcome {
    let pi2 = std::f64::consts::PI.powi(2);
    let pts = (1..=200).map(|n| c(pi2 * (n * n) as f64, 0.0)).collect();
    let seq = PointSequence::new(pts, 1e-6)
        .and_then(|s| s.with_tail(TailModel::RealPower { scale: pi2, exponent: 2.0 }))
        .map_err(|e| e.to_string())?;
    let mut worst_cert = 0.0f64;
    for k in 0..20 {
        let n = (k + 1) as f64;
        let b = b_inf(&seq, k).map_err(|e| e.to_string())?;
        let log_rec = -b.log_modulus;
        let log_upper = 4.0 * n * (1.0 + n.ln());
        if !(log_rec >= 0.0 && log_rec <= log_upper) {
            return Err(format!("n={}: log reciprocal {log_rec} outside [0, {log_upper}]", k + 1));
        }
        worst_cert = worst_cert.max(b.rel_error_bound);
    }
    if worst_cert < 1e-6 {
        Ok(format!("n=1..20 in bracket, worst certificate {worst_cert:.1e}"))
    } else {
        Err(format!("certificate {worst_cert:.1e}"))
    }
}

fn poisson_scaling() -> Outcome {
    let quad = AxisQuadrature::default().with_abs_tol(1e-12);
    let mut worst = 0.0f64;
    for q in [1.5, 3.0, 6.0] {
        let ratios: Vec<f64> = [0.1, 1.0, 10.0]
            .iter()
            .map(|&x| poisson_lq_norm(c(x, 0.7), q, &quad).map(|v| v / x.powf(-1.0 + 1.0 / q)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        worst = worst.max(hi / lo - 1.0);
    }
    if worst < 0.01 {
        Ok(format!("max relative spread {worst:.1e}"))
    } else {
        Err(format!("spread {worst:.3e}"))
    }
}

struct Instance {
    prob: InterpolationProblem<f64>,
}

fn random_instances(count: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(1..=5);
        let dim = rng.gen_range(1..=3);
        let rank = if dim == 1 { 1 } else { rng.gen_range(1..=2) };
        let pts: Vec<Cx<f64>> = (0..n).map(|_| rand_point(&mut rng)).collect();
        let mats: Vec<CMatrix<f64>> =
            (0..n).map(|_| rand_matrix(&mut rng, dim, rank) * rand_matrix(&mut rng, rank, dim)).collect();
        let targets: Vec<CVector<f64>> =
            mats.iter().map(|g| g * CVector::from_fn(dim, |_, _| rand_c(&mut rng))).collect();
        let Ok(seq) = PointSequence::new(pts, 1e-8) else { continue };
        let Ok(data) = TangentialData::with_default_tol(mats) else { continue };
        let Ok(angles) = angle_report(&seq, &data, None) else { continue };
        if angles.gram_condition.is_nan() || angles.gram_condition >= 1e10 {
            continue;
        }
        let Ok(prob) = InterpolationProblem::new(seq, data, 2.0, 2.0).and_then(|p| p.with_targets(targets)) else {
            continue;
        };
        out.push(Instance { prob });
    }
    out
}

fn interpolant_residuals() -> Outcome {
    let mut worst = 0.0f64;
    for inst in random_instances(50, 11) {
        let f = build_interpolant(&inst.prob, 2).map_err(|e| e.to_string())?;
        let r = f.residuals(&inst.prob.data, inst.prob.targets.as_ref().unwrap());
        worst = r.into_iter().fold(worst, f64::max);
    }
    if worst < 1e-8 {
        Ok(format!("50 instances, max relative residual {worst:.1e}"))
    } else {
        Err(format!("max relative residual {worst:.3e}"))
    }
}

fn potapov_structure() -> Outcome {
    let mut worst_land = 0.0f64;
    let mut worst_unit = 0.0f64;
    for inst in random_instances(50, 11) {
        let p = &inst.prob;
        for chain in [p.data.i_chain(), p.data.i_perp_chain()] {
            let theta = PotapovProduct::for_sequence(&p.seq, &chain).map_err(|e| e.to_string())?;
            let dim = p.dim();
            let id = CMatrix::<f64>::identity(dim, dim);
            for k in 0..p.len() {
                let frame = chain.frame(k);
                let perp = if frame.ncols() == 0 { id.clone() } else { &id - projector(frame) };
                worst_land = worst_land.max(op_norm(&(perp * theta.evaluate(p.seq.point(k)))));
            }
            for j in 0..200 {
                let omega = 40.0 * ((j as f64 + 0.5) / 200.0 - 0.5).tan() / 10.0;
                let v = theta.evaluate(c(0.0, omega));
                worst_unit = worst_unit.max(op_norm(&(v.adjoint() * &v - &id)));
            }
        }
    }
    if worst_land < 1e-10 && worst_unit < 1e-8 {
        Ok(format!("range defect {worst_land:.1e}, unitarity defect {worst_unit:.1e}"))
    } else {
        Err(format!("range defect {worst_land:.3e}, unitarity defect {worst_unit:.3e}"))
    }
}

fn two_point_angle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (z1, z2) = (rand_point(&mut rng), rand_point(&mut rng));
        let seq = PointSequence::new(vec![z1, z2], 1e-8).map_err(|e| e.to_string())?;
        let one = CMatrix::from_element(1, 1, c(1.0, 0.0));
        let data = TangentialData::with_default_tol(vec![one.clone(), one]).map_err(|e| e.to_string())?;
        let a = subspace_angle(&seq, &data, 0, None).map_err(|e| e.to_string())?;
        // Normalised kernels have inner product 2 sqrt(x1 x2) / (z1 + conj z2).
        let g = c(2.0 * (z1.re * z2.re).sqrt(), 0.0) / (z1 + z2.conj());
        let gram = (1.0 - g.norm_sqr()).sqrt();
        let target = blaschke_factor(z1, z2).norm();
        worst = worst.max((a.sin - target).abs()).max((gram - target).abs());
    }
    if worst < 1e-10 {
        Ok(format!("100 pairs, max deviation {worst:.1e}"))
    } else {
        Err(format!("max deviation {worst:.3e}"))
    }
}

fn single_atom() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let quad = AxisQuadrature::default();
    let mut worst = 1.0f64;
    for _ in 0..20 {
        let z = c(10f64.powf(rng.gen_range(-2.0..2.0)), rng.gen_range(-10.0..10.0));
        let mu = DiscreteMeasure::scalar(&[z], &[1.0]).map_err(|e| e.to_string())?;
        let rep = carleson_constant(&mu, 1.0, Some(CarlesonMethod::Rectangle), &quad).map_err(|e| e.to_string())?;
        let ratio = rep.constant * z.re;
        if !(0.5..=2.0).contains(&ratio) {
            return Err(format!("z0={z}: constant * Re z0 = {ratio}"));
        }
        worst = if (ratio.ln()).abs() > worst.ln().abs() { ratio } else { worst };
    }
    Ok(format!("20 atoms, worst constant * Re z0 = {worst:.4}"))
}

fn projection_problems(count: usize, seed: u64) -> Vec<InterpolationProblem<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(2..=5);
        let pts: Vec<Cx<f64>> = (0..n).map(|_| rand_point(&mut rng)).collect();
        let mats: Vec<CMatrix<f64>> = (0..n)
            .map(|_| {
                let d = rng.gen_range(1..=2);
                let u = orthonormal_columns(&rand_matrix(&mut rng, 2, d), 1e-12);
                let mut g = CMatrix::zeros(2, 2);
                let a = rng.gen_range(0.5..2.0);
                g.rows_mut(0, d).copy_from(&(u.adjoint() * c(a, 0.0)));
                g
            })
            .collect();
        let (p, s) = if out.len() % 2 == 0 { (2.0, 2.0) } else { (3.0, 1.5) };
        let Ok(seq) = PointSequence::new(pts, 1e-8) else { continue };
        let Ok(data) = TangentialData::with_default_tol(mats) else { continue };
        let Ok(prob) = InterpolationProblem::new(seq, data, p, s) else { continue };
        out.push(prob);
    }
    out
}

fn route_consistency() -> Outcome {
    let opts = RouteOptions::default();
    let mut worst = 1.0f64;
    for prob in projection_problems(20, 7) {
        let a = m_estimate_angle_route(&prob, &opts).map_err(|e| e.to_string())?;
        let g = m_estimate_general(&prob, &opts).map_err(|e| e.to_string())?;
        let r = (a.log_value - g.log_value).abs().exp();
        worst = worst.max(r);
        if r > 10.0 {
            return Err(format!("angle {} vs general {}", a.value_upper, g.value_upper));
        }
        let mut s1 = prob.clone();
        s1.s = 1.0;
        let mut last = f64::NEG_INFINITY;
        for n in 1..=s1.len() {
            let v = m_s1_route(&s1.truncate(n)).map_err(|e| e.to_string())?.value_upper;
            if v < last {
                return Err(format!("s=1 route decreased from {last} to {v} at n={n}"));
            }
            last = v;
        }
    }
    Ok(format!("20 problems, worst angle/general ratio {worst:.3}, s=1 route monotone"))
}

fn interval_power_average(e: f64, a: f64, b: f64) -> f64 {
    let f = |t: f64| t.signum() * t.abs().powf(e + 1.0) / (e + 1.0);
    (f(b) - f(a)) / (b - a)
}

fn weight_checks() -> Outcome {
    let quad = AxisQuadrature::default();
    let grid = log_polar_grid(0.0, 1.0, 3);
    let mut prev = 0.0f64;
    let mut consts = Vec::new();
    for beta in [0.1f64, 0.3, 0.45] {
        let chk = scalar_ap_check(&ScalarWeight::one_plus_power(beta), 2.0, &grid, &quad).map_err(|e| e.to_string())?;
        if !chk.bounded_on_grid || chk.constant.is_nan() || chk.constant <= prev {
            return Err(format!("beta={beta}: constant {} after {prev}", chk.constant));
        }
        prev = chk.constant;
        consts.push(chk.constant);
    }
    let intervals = interval_family(1.0, 3);
    let mut worst = 0.0f64;
    for beta in [0.1, 0.3, 0.45] {
        let e = 2.0 * beta;
        let w = MatrixWeight::Diagonal(vec![ScalarWeight::Constant(1.0), ScalarWeight::pure_power(beta)]);
        let rep = matrix_a2_check(&w, &intervals, &grid, &quad).map_err(|e| e.to_string())?;
        let ext = |g: f64, z: Cx<f64>| z.powf(g).re / (std::f64::consts::FRAC_PI_2 * g).cos();
        let inv_oracle = grid.iter().map(|&z| (ext(e, z) * ext(-e, z)).max(1.0)).fold(0.0, f64::max);
        let int_oracle = intervals
            .iter()
            .map(|&(a, b)| (interval_power_average(e, a, b) * interval_power_average(-e, a, b)).max(1.0))
            .fold(0.0, f64::max);
        worst = worst
            .max((rep.invariant_constant - inv_oracle).abs() / inv_oracle)
            .max((rep.interval_constant - int_oracle).abs() / int_oracle);
    }
    if worst < 1e-6 {
        Ok(format!("A2 constants {consts:.3?}, matrix vs diagonal oracle {worst:.1e}"))
    } else {
        Err(format!("matrix vs diagonal oracle {worst:.3e}"))
    }
}

fn caveat_matrix() -> Outcome {
    use Caveat::*;
    let mut checked = 0;
    for s in [1.5, 2.0, 4.0] {
        let _ = s;
        for p in [1.2, 1.5, 2.0, 3.0, 6.0] {
            let rows: [(InputSpace<f64>, [Caveat; 4]); 3] = [
                (
                    InputSpace::Lp(p),
                    match p {
                        p if p < 2.0 => [SufficientOnly, NecessaryOnly, NecessaryOnly, NecessaryOnly],
                        p if p > 2.0 => [NecessaryOnly, SufficientOnly, NecessaryOnly, NecessaryOnly],
                        _ => [Equivalent, Equivalent, NecessaryOnly, Equivalent],
                    },
                ),
                (InputSpace::HardyPreimage(p), [Equivalent, Equivalent, NecessaryOnly, Equivalent]),
                (InputSpace::Sobolev(0.25), [Equivalent, Equivalent, NecessaryOnly, Equivalent]),
            ];
            for (space, expect) in rows {
                let kinds = [TestKind::Admissibility, TestKind::Controllability, TestKind::Approximate, TestKind::Joint];
                for (kind, want) in kinds.into_iter().zip(expect) {
                    let got = caveat(kind, space, false);
                    if got != want {
                        return Err(format!("{kind:?} {space:?}: {got:?} instead of {want:?}"));
                    }
                    checked += 1;
                }
                let approx = caveat(TestKind::Approximate, space, true);
                let want = if matches!(space, InputSpace::Lp(_)) { Equivalent } else { NecessaryOnly };
                if approx != want {
                    return Err(format!("approximate with disconnected spectrum {space:?}: {approx:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} table entries"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("heat equation null controllability threshold", heat_threshold),
        ("excluded product bound", product_bound),
        ("Poisson kernel norm scaling", poisson_scaling),
        ("interpolant residuals", interpolant_residuals),
        ("Potapov product structure", potapov_structure),
        ("two point angle identity", two_point_angle),
        ("single atom Carleson constant", single_atom),
        ("route consistency", route_consistency),
        ("weight checks", weight_checks),
        ("caveat matrix", caveat_matrix),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(msg) => println!("PASS {:>2} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
