use gradproj::analysis::{lemma5_bound, lemma5_trajectory, LemmaFiveInstance, SequenceKind};
use gradproj::geometry::variational_gap;
use gradproj::schedules::Verdict;
use gradproj::solver::{run, LogSchedule, Mode, ProblemInstance, StopRule};
use gradproj::{ConvexSet, Matrix, Regularizer, Schedule, SmoothObjective, Vector};
use proptest::prelude::*;

fn vec_strategy(dim: usize, scale: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-scale..scale, dim).prop_map(|c| Vector::new(c).unwrap())
}

fn set_strategy() -> impl Strategy<Value = ConvexSet> {
    (1usize..=5).prop_flat_map(|d| {
        prop_oneof![
            (vec_strategy(d, 3.0), prop::collection::vec(0.0..4.0f64, d)).prop_map(|(lo, w)| {
                let hi = Vector::new(lo.iter().zip(&w).map(|(l, w)| l + w).collect()).unwrap();
                ConvexSet::boxed(lo, hi).unwrap()
            }),
            (vec_strategy(d, 3.0), 0.0..4.0f64).prop_map(|(c, r)| ConvexSet::ball(c, r).unwrap()),
            (0.1..5.0f64).prop_map(move |s| ConvexSet::simplex(d, s).unwrap()),
            (vec_strategy(d, 2.0), -2.0..2.0f64)
                .prop_filter("nonzero normal", |(n, _)| n.norm() > 0.1)
                .prop_map(|(n, b)| ConvexSet::halfspace(n, b).unwrap()),
            (vec_strategy(d, 2.0), -2.0..2.0f64)
                .prop_filter("nonzero normal", |(n, _)| n.norm() > 0.1)
                .prop_map(|(n, b)| ConvexSet::hyperplane(n, b).unwrap()),
            Just(ConvexSet::whole_space(d).unwrap()),
        ]
    })
}

fn set_and_point() -> impl Strategy<Value = (ConvexSet, Vector, u64)> {
    set_strategy().prop_flat_map(|s| {
        let d = s.dim();
        (Just(s), vec_strategy(d, 10.0), any::<u64>())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_variational_inequality((set, x, seed) in set_and_point()) {
        let y = set.project(&x).unwrap();
        prop_assert!(set.contains(&y, 1e-9 * (1.0 + x.norm())).unwrap());
        // 256 cases x 8 samples covers well over 1000 pairs per set kind.
        for v in set.support_sample(seed, 8).unwrap() {
            let gap = variational_gap(&x, &y, &v);
            prop_assert!(gap <= 1e-9 * (1.0 + x.norm_sq()), "gap {gap} for v = {v}");
        }
    }

    #[test]
    fn projection_is_nonexpansive((set, x, seed) in set_and_point()) {
        let z = x.add(&Vector::new(set.support_sample(seed, 1).unwrap()[0].iter().map(|c| c * 0.7 - 1.0).collect()).unwrap());
        let (px, pz) = (set.project(&x).unwrap(), set.project(&z).unwrap());
        prop_assert!(px.distance(&pz) <= x.distance(&z) + 1e-12 * (1.0 + x.norm() + z.norm()));
    }

    #[test]
    fn projection_is_idempotent((set, x, _seed) in set_and_point()) {
        let y = set.project(&x).unwrap();
        let yy = set.project(&y).unwrap();
        prop_assert!(yy.distance(&y) <= 1e-12 * (1.0 + y.norm()), "{y} -> {yy}");
    }

    #[test]
    fn in_set_points_are_fixed((set, _x, seed) in set_and_point()) {
        for v in set.support_sample(seed, 4).unwrap() {
            if set.contains(&v, 0.0).unwrap() {
                let p = set.project(&v).unwrap();
                match set.kind() {
                    gradproj::SetKind::Box { .. } | gradproj::SetKind::Halfspace { .. } => prop_assert_eq!(&p, &v),
                    _ => prop_assert!(p.distance(&v) <= 1e-12 * (1.0 + v.norm())),
                }
            }
        }
    }
}

fn objective_strategy() -> impl Strategy<Value = SmoothObjective> {
    (1usize..=4).prop_flat_map(|d| {
        prop_oneof![
            (prop::collection::vec(prop::collection::vec(-2.0..2.0f64, d), 1..=3), vec_strategy(d, 2.0))
                .prop_map(|(rows, b)| {
                    let m = Matrix::from_rows(rows).unwrap();
                    let mut a = vec![vec![0.0; m.cols()]; m.cols()];
                    for (i, row) in a.iter_mut().enumerate() {
                        for (j, cell) in row.iter_mut().enumerate() {
                            *cell = (0..m.rows()).map(|k| m.get(k, i) * m.get(k, j)).sum();
                        }
                    }
                    SmoothObjective::quadratic(Matrix::from_rows(a).unwrap(), b, 0.5).unwrap()
                }),
            (prop::collection::vec(prop::collection::vec(-2.0..2.0f64, d), 1..=3), vec_strategy(3, 2.0))
                .prop_map(|(rows, y)| {
                    let k = rows.len();
                    let y = Vector::new(y.as_slice()[..k].to_vec()).unwrap();
                    SmoothObjective::least_squares(Matrix::from_rows(rows).unwrap(), y).unwrap()
                }),
            (0.1..3.0f64, vec_strategy(d, 2.0)).prop_map(move |(delta, shift)| {
                SmoothObjective::translated(SmoothObjective::huberized_norm(d, delta).unwrap(), shift).unwrap()
            }),
        ]
    })
}

fn objective_and_points() -> impl Strategy<Value = (SmoothObjective, Vector, Vector)> {
    objective_strategy().prop_flat_map(|f| {
        let d = f.dim();
        (Just(f), vec_strategy(d, 5.0), vec_strategy(d, 5.0))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gradient_matches_finite_differences((f, x, _y) in objective_and_points()) {
        let g = f.gradient(&x).unwrap();
        let h = 1e-6;
        for i in 0..x.dim() {
            let mut e = vec![0.0; x.dim()];
            e[i] = h;
            let e = Vector::new(e).unwrap();
            let fd = (f.value(&x.add(&e)).unwrap() - f.value(&x.sub(&e)).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-5 * (1.0 + g[i].abs()), "component {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn midpoint_convexity((f, x, y) in objective_and_points()) {
        let mid = x.add(&y).scale(0.5);
        let lhs = f.value(&mid).unwrap();
        let rhs = 0.5 * f.value(&x).unwrap() + 0.5 * f.value(&y).unwrap();
        prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn gradient_difference_ratios_respect_lipschitz((f, x, y) in objective_and_points()) {
        let dx = x.distance(&y);
        prop_assume!(dx > 1e-9);
        let ratio = f.gradient(&x).unwrap().distance(&f.gradient(&y).unwrap()) / dx;
        let q = ConvexSet::whole_space(f.dim()).unwrap();
        prop_assert!(ratio <= f.lipschitz_constant(&q).unwrap() * (1.0 + 1e-9) + 1e-12);
        prop_assert!(f.descent_lemma_check(&q, &x, &y).unwrap());
    }

    #[test]
    fn regularizer_strong_convexity(center in vec_strategy(3, 3.0), x in vec_strategy(3, 5.0), y in vec_strategy(3, 5.0), w in 0.2..3.0f64) {
        let a = Matrix::from_rows(vec![vec![w, 0.1, 0.0], vec![0.1, 1.0, 0.0], vec![0.0, 0.0, 2.0]]).unwrap();
        for phi in [
            Regularizer::half_squared_distance(center.clone()),
            Regularizer::new(SmoothObjective::quadratic(a.clone(), center.clone(), 0.0).unwrap()).unwrap(),
        ] {
            let m = phi.strong_convexity();
            prop_assert!(m > 0.0);
            let lower = phi.value(&x).unwrap() + phi.gradient(&x).unwrap().dot(&y.sub(&x)) + 0.5 * m * x.distance(&y).powi(2);
            prop_assert!(phi.value(&y).unwrap() >= lower - 1e-9);
        }
    }
}

/// `sum_{n1 < n <= n2} A B n^(-p)`, the increment of the partial sums of `gamma_n alpha_n`.
fn partial_sum_increment(ab: f64, p: f64, n1: u64, n2: u64) -> f64 {
    ((n1 + 1)..=n2).map(|n| ab * (n as f64).powf(-p)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn power_law_strong_classification(
        constant_step in any::<bool>(),
        g_raw in 0.01..1.2f64,
        alpha_exp in 0.0..1.6f64,
        a_frac in 0.05..1.5f64,
        b in 0.1..3.0f64,
        l in 0.5..4.0f64,
    ) {
        let gamma_exp = if constant_step { 0.0 } else { g_raw };
        let a = a_frac * 2.0 / l;
        let report = Schedule::power_law(a, gamma_exp, b, alpha_exp).unwrap().classify(l);
        let expected = gamma_exp == 0.0 && a < 2.0 / l && alpha_exp > 0.0 && gamma_exp + alpha_exp <= 1.0;
        prop_assert_eq!(report.satisfies_thm2_strong, Verdict::from_bool(expected));

        // Divergence of sum gamma_n alpha_n, away from the critical exponent,
        // against growth of the partial sums: a divergent power series gains
        // at least ln(100) A B between n = 10^4 and 10^6, a convergent one
        // with exponent >= 1.1 gains less than 1.5 A B.
        let p = gamma_exp + alpha_exp;
        if (p - 1.0).abs() >= 0.1 {
            let gain = partial_sum_increment(a * b, p, 10_000, 1_000_000) / (a * b);
            let diverges = gain > 100f64.ln();
            prop_assert_eq!(diverges, p <= 1.0);
            let clause = report.clause("sum_gamma_alpha_diverges").unwrap();
            prop_assert_eq!(clause.verdict, Verdict::from_bool(diverges));
        }
    }

    #[test]
    fn lemma5_equality_dominates(
        eps_exp in 0.3..1.0f64,
        r_scale in 0.0..2.0f64,
        delta_exp in 1.1..3.0f64,
        u0 in 0.0..5.0f64,
        seed in any::<u64>(),
    ) {
        let inst = LemmaFiveInstance::new(
            SequenceKind::Power { scale: 1.0, exponent: eps_exp },
            SequenceKind::Power { scale: r_scale, exponent: 0.5 },
            SequenceKind::Power { scale: 1.0, exponent: delta_exp },
            u0,
        )
        .unwrap()
        .with_seed(seed);
        let eq = lemma5_trajectory(&inst, 3000, true);
        let sub = lemma5_trajectory(&inst, 3000, false);
        let bound = lemma5_bound(&inst, 3000);
        for i in 0..eq.len() {
            prop_assert!(sub[i] <= eq[i]);
            prop_assert!(eq[i] <= bound[i] + 1e-9 * (1.0 + bound[i].abs()), "index {i}: {} > {}", eq[i], bound[i]);
        }
    }
}

fn segment_problem(set: ConvexSet, x0: Vector, schedule: Schedule) -> ProblemInstance {
    ProblemInstance::new(
        SmoothObjective::least_squares(Matrix::from_rows(vec![vec![1.0, 1.0]]).unwrap(), Vector::new(vec![2.0]).unwrap())
            .unwrap(),
        set,
        Some(Regularizer::half_squared_norm(2)),
        schedule,
        x0,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn logged_iterates_stay_feasible(
        x0 in vec_strategy(2, 8.0),
        radius in 0.5..4.0f64,
        use_ball in any::<bool>(),
        alpha_exp in 0.2..1.5f64,
    ) {
        let set = if use_ball {
            ConvexSet::ball(Vector::new(vec![0.0, 0.0]).unwrap(), radius).unwrap()
        } else {
            ConvexSet::boxed(Vector::new(vec![0.0, 0.0]).unwrap(), Vector::new(vec![radius, radius]).unwrap()).unwrap()
        };
        let p = segment_problem(set.clone(), x0, Schedule::constant(0.5, 1.0, alpha_exp).unwrap());
        let t = run(&p, Mode::Ggp, &StopRule::iterations(500), LogSchedule::Every(1), None).unwrap();
        for r in &t.records {
            prop_assert!(set.contains(&r.x, 1e-10).unwrap(), "{} outside", r.x);
        }
    }

    #[test]
    fn gp_with_admissible_constant_step_reaches_minimal_value(x0 in vec_strategy(2, 8.0), frac in 0.05..0.95f64) {
        // L = 2, so gamma = frac * 2 / L ranges over (0, 2/L).
        let set = ConvexSet::boxed(Vector::new(vec![0.0, 0.0]).unwrap(), Vector::new(vec![10.0, 10.0]).unwrap()).unwrap();
        let p = segment_problem(set, x0, Schedule::constant(frac, 1.0, 1.0).unwrap());
        let t = run(&p, Mode::Gp, &StopRule::iterations(2000), LogSchedule::Every(1000), None).unwrap();
        prop_assert!(t.final_state.f_val <= 1e-12, "f = {}", t.final_state.f_val);
    }
}
