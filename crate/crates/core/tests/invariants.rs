use fundfdtd::cost_model::{efficiency_gains, static_cost, static_cost_with, TABLE_COLUMNS};
use fundfdtd::verify::{equivalence_from, Setup};
use fundfdtd::{
    apply_A, apply_B, apply_curl, factorize, Component, Exec, FieldSet, Formulation, HUpdate, Medium, SchemeId,
    Stepper, StepperConfig, YeeGrid,
};
use proptest::prelude::*;

fn weighted_dot(u: &FieldSet<f64>, v: &FieldSet<f64>, m: &Medium) -> f64 {
    Component::ALL
        .into_iter()
        .map(|c| {
            let w = if c.is_electric() { m.epsilon() } else { m.mu() };
            let s: f64 = u.component(c).iter().zip(v.component(c).iter()).map(|(a, b)| a * b).sum();
            w * s
        })
        .sum()
}

fn grid_strategy() -> impl Strategy<Value = YeeGrid> {
    (3usize..7, 3usize..7, 3usize..7, 0.5f64..2.0, 0.5f64..2.0, 0.5f64..2.0)
        .prop_map(|(a, b, c, x, y, z)| YeeGrid::new([a, b, c], [x, y, z]).unwrap())
}

fn medium_strategy() -> impl Strategy<Value = Medium> {
    (0.5f64..3.0, 0.5f64..3.0).prop_map(|(e, m)| Medium::new(e, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tridiagonal_solve_inverts_the_matrix(
        rows in prop::collection::vec((0.1f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -5.0f64..5.0), 2..40)
    ) {
        let n = rows.len();
        let sub: Vec<f64> = rows[1..].iter().map(|r| r.1).collect();
        let sup: Vec<f64> = rows[..n - 1].iter().map(|r| r.2).collect();
        // strict diagonal dominance keeps the factorization well posed
        let diag: Vec<f64> = rows.iter().map(|r| 2.0 + r.0).collect();
        let rhs: Vec<f64> = rows.iter().map(|r| r.3).collect();
        let x = factorize(&diag, &sub, &sup).unwrap().solve(&rhs).unwrap();
        for i in 0..n {
            let mut ax = diag[i] * x[i];
            if i > 0 {
                ax += sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                ax += sup[i] * x[i + 1];
            }
            prop_assert!((ax - rhs[i]).abs() <= 1e-12 * (1.0 + rhs[i].abs()));
        }
    }

    #[test]
    fn split_operators_are_skew_in_the_energy_product(
        grid in grid_strategy(), medium in medium_strategy(), s1 in any::<u64>(), s2 in any::<u64>()
    ) {
        let u = FieldSet::random(grid, s1);
        let v = FieldSet::random(grid, s2);
        for apply in [apply_A::<f64>, apply_B::<f64>] {
            let lhs = weighted_dot(&u, &apply(&v, &medium), &medium);
            let rhs = weighted_dot(&apply(&u, &medium), &v, &medium);
            prop_assert!((lhs + rhs).abs() <= 1e-11 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn splitting_sums_to_the_curl(grid in grid_strategy(), medium in medium_strategy(), seed in any::<u64>()) {
        let u = FieldSet::random(grid, seed);
        let mut sum = apply_A(&u, &medium);
        sum.axpy(1.0, &apply_B(&u, &medium));
        prop_assert_eq!(sum.to_flat(), apply_curl(&u, &medium).to_flat());
    }

    #[test]
    fn original_and_fundamental_forms_agree(
        scheme in prop::sample::select(SchemeId::ALL.to_vec()),
        grid in grid_strategy(),
        medium in medium_strategy(),
        cfl in 0.5f64..12.0,
        seed in any::<u64>(),
    ) {
        let setup = Setup { grid, medium, cfl, seed, exec: Exec::Serial };
        let r = equivalence_from(scheme, &setup, 12, &FieldSet::random(grid, seed)).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }

    #[test]
    fn threading_never_changes_bits(
        scheme in prop::sample::select(SchemeId::ALL.to_vec()),
        form in prop::sample::select(Formulation::ALL.to_vec()),
        grid in grid_strategy(),
        seed in any::<u64>(),
    ) {
        let medium = Medium::normalized();
        let dt = 4.0 * grid.explicit_limit(&medium);
        let u0 = FieldSet::random(grid, seed);
        let run = |exec| {
            let mut s = Stepper::<f64>::new(StepperConfig::new(scheme, form, dt, medium).with_exec(exec), &u0).unwrap();
            s.run(5).unwrap();
            s.output().unwrap().to_flat()
        };
        let serial = run(Exec::Serial);
        let parallel = run(Exec::Parallel);
        prop_assert!(serial.iter().zip(&parallel).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn splitting_schemes_never_gain_physical_energy(
        scheme in prop::sample::select(vec![SchemeId::Lod1, SchemeId::Ss2, SchemeId::Lod2]),
        form in prop::sample::select(Formulation::ALL.to_vec()),
        cfl in 0.5f64..20.0,
        seed in any::<u64>(),
    ) {
        let grid = YeeGrid::cube(5).unwrap();
        let medium = Medium::normalized();
        let dt = cfl * grid.explicit_limit(&medium);
        let u0 = FieldSet::random(grid, seed);
        let e0 = u0.energy(&medium);
        let mut s = Stepper::<f64>::new(StepperConfig::new(scheme, form, dt, medium), &u0).unwrap();
        s.run(40).unwrap();
        prop_assert!(s.output().unwrap().energy(&medium) <= e0 * (1.0 + 1e-10));
    }

    #[test]
    fn stepping_is_linear(
        scheme in prop::sample::select(SchemeId::ALL.to_vec()),
        form in prop::sample::select(Formulation::ALL.to_vec()),
        a in -3.0f64..3.0,
        s1 in any::<u64>(),
        s2 in any::<u64>(),
    ) {
        let grid = YeeGrid::cube(4).unwrap();
        let medium = Medium::normalized();
        let dt = 3.0 * grid.explicit_limit(&medium);
        let step = |u: &FieldSet<f64>| {
            let mut s = Stepper::<f64>::new(StepperConfig::new(scheme, form, dt, medium), u).unwrap();
            s.run(3).unwrap();
            s.output().unwrap()
        };
        let u = FieldSet::random(grid, s1);
        let v = FieldSet::random(grid, s2);
        let mut w = u.clone();
        w.axpy(a, &v);
        let mut expect = step(&u);
        expect.axpy(a, &step(&v));
        prop_assert!(step(&w).relative_difference(&expect) <= 1e-12);
    }
}

#[test]
fn cost_reports_are_self_consistent() {
    for (s, f) in TABLE_COLUMNS {
        for mode in [HUpdate::Combined, HUpdate::Explicit] {
            let r = static_cost_with(s, f, mode).unwrap();
            assert_eq!(r.md_total() + r.as_total(), r.combined());
            assert_eq!(r.for_loops % 3, 0);
            assert_eq!(r.procedures as usize, s.procedures());
        }
        let (rhs, overall) = efficiency_gains(&static_cost(s, f).unwrap());
        assert!(rhs > 0.0 && overall > 0.0 && overall <= rhs.max(1.0));
    }
    assert!(static_cost(SchemeId::CrankNicolsonRef, Formulation::Original).is_err());
}
