use super::residual::log_system;
use super::*;
use crate::geometry::{lebrun_profile, RadialProfile};

fn flat() -> RadialProfile {
    RadialProfile::flat(2, 1).unwrap()
}

fn spec(n: usize) -> GridSpec {
    GridSpec {
        n_rho: n,
        n_t: n,
        rho_min: 0.0,
        rho_max: 6.0,
    }
}

fn bump() -> BoundaryData {
    BoundaryData::Exponential {
        amplitude: 0.1,
        rate: 2.0,
    }
}

#[test]
fn time_profile_is_an_exact_zero() {
    for mode in [UpsilonMode::Constant, UpsilonMode::ProfileWeighted] {
        let g = PathGrid::new(spec(9), flat(), BoundaryData::Zero, BoundaryData::Zero, 0.3).unwrap();
        let r = reduced_residual(&g, 0.3, mode).unwrap();
        assert!(r.iter().all(|v| v.abs() <= 1e-12 * 1e3), "{mode:?}");
    }
}

#[test]
fn constant_shift_is_an_exact_zero() {
    let c = 0.7;
    let g = PathGrid::new(
        spec(9),
        flat(),
        BoundaryData::Zero,
        BoundaryData::Constant { value: c },
        0.25,
    )
    .unwrap();
    let r = reduced_residual(&g, 0.25, UpsilonMode::Constant).unwrap();
    let scale: f64 = (0..9).map(|i| reference_density(&g, i)).fold(0.0, f64::max);
    assert!(r.iter().all(|v| v.abs() <= 1e-13 * scale));
}

#[test]
fn zero_potential_leaves_the_full_density() {
    let mut g = PathGrid::new(spec(9), flat(), BoundaryData::Zero, BoundaryData::Zero, 1.0).unwrap();
    g.phi.iter_mut().for_each(|p| *p = 0.0);
    let r = reduced_residual(&g, 1.0, UpsilonMode::Constant).unwrap();
    for j in 1..8 {
        for i in 0..8 {
            let want = -reference_density(&g, i);
            assert!((r[g.spec.unknown(i, j)] - want).abs() <= 1e-12 * want.abs());
            assert!(want < 0.0);
        }
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let eh = lebrun_profile(2, 1.0).unwrap();
    let sp = GridSpec {
        n_rho: 7,
        n_t: 6,
        rho_min: -1.0,
        rho_max: 2.0,
    };
    let mut g = PathGrid::new(sp, eh, BoundaryData::Zero, bump(), 0.5).unwrap();
    // Perturb to a generic state.
    for (k, p) in g.phi.iter_mut().enumerate() {
        *p *= 1.0 + 0.05 * ((k * 7 % 5) as f64 - 2.0);
    }
    g.set_outer_boundary(0.5);
    let base = log_system(&g, 0.5, UpsilonMode::ProfileWeighted, true).unwrap();
    let jac = base.jacobian.unwrap();
    let x0 = g.unknown_values();
    let h = 1e-7;
    for col in 0..x0.len() {
        let mut x = x0.clone();
        x[col] += h;
        g.set_unknown_values(&x);
        let plus = log_system(&g, 0.5, UpsilonMode::ProfileWeighted, false).unwrap().residual;
        x[col] -= 2.0 * h;
        g.set_unknown_values(&x);
        let minus = log_system(&g, 0.5, UpsilonMode::ProfileWeighted, false).unwrap().residual;
        for row in 0..x0.len() {
            let fd = (plus[row] - minus[row]) / (2.0 * h);
            let an = jac.get(row, col);
            assert!((fd - an).abs() <= 1e-5 * (1.0 + an.abs()), "({row},{col}) fd {fd} an {an}");
        }
    }
}

#[test]
fn exact_solution_through_the_continuity_path() {
    let cfg = SolverConfig::new(0.5, spec(17));
    let (g, rep) = solve_epsilon_geodesic(&flat(), &BoundaryData::Zero, &BoundaryData::Zero, &cfg).unwrap();
    assert!(exact_deviation(&g, 0.5) < 1e-12);
    assert!(rep.converged() && rep.c0.pass);
}

#[test]
fn nontrivial_data_converges_and_is_sandwiched() {
    let mut cfg = SolverConfig::new(0.25, spec(33));
    cfg.upsilon_mode = UpsilonMode::Constant;
    let (g, rep) = solve_epsilon_geodesic(&flat(), &BoundaryData::Zero, &bump(), &cfg).unwrap();
    assert!(rep.converged(), "{rep:?}");
    assert!(rep.residual < 1e-9, "{}", rep.residual);
    assert!(rep.c0.pass, "{:?}", rep.c0);
    assert!(rep.positivity.min_time_fiber > 0.0);
    assert!(exact_deviation(&g, 0.25) > 1e-4);
}

#[test]
fn c0_violation_is_reported() {
    let mut g = PathGrid::new(spec(9), flat(), BoundaryData::Zero, BoundaryData::Zero, 0.5).unwrap();
    let j = 4;
    for i in 0..9 {
        let k = g.spec.node(i, j);
        g.phi[k] = 3.0 + time_profile(1.0, 0.5);
    }
    let c = c0_bound_check(&g, 1e-12);
    assert!(!c.pass);
    assert!((c.upper_slack + 2.5).abs() < 1e-12);
    assert_eq!(c.violations, 9);
}

#[test]
fn exact_solutions_are_ordered() {
    let a = PathGrid::new(spec(9), flat(), BoundaryData::Zero, BoundaryData::Zero, 0.5).unwrap();
    let b = PathGrid::new(spec(9), flat(), BoundaryData::Zero, BoundaryData::Zero, 0.25).unwrap();
    assert_eq!(a.at(3, 4), -0.0625);
    assert_eq!(b.at(3, 4), -0.03125);
    assert!(comparison_check(&a, &b, 1e-10).unwrap().pass);
    assert!(comparison_check(&a, &a, 0.0).unwrap().pass);
    let c = PathGrid::new(spec(11), flat(), BoundaryData::Zero, BoundaryData::Zero, 0.25).unwrap();
    assert!(comparison_check(&a, &c, 1e-10).is_err());
}

#[test]
fn csv_round_trip() {
    let a = PathGrid::new(spec(5), flat(), BoundaryData::Zero, BoundaryData::Zero, 0.5).unwrap();
    let mut buf = Vec::new();
    a.write_csv(&mut buf).unwrap();
    let mut b = PathGrid::new(spec(5), flat(), BoundaryData::Zero, BoundaryData::Zero, 1.0).unwrap();
    b.read_phi_csv(buf.as_slice()).unwrap();
    assert_eq!(a.phi, b.phi);
}

#[test]
fn weighted_mode_is_solved_by_the_linear_path_at_one() {
    let psi0 = BoundaryData::Gaussian {
        amplitude: 0.1,
        center: 2.0,
        width: 0.7,
    };
    let g = PathGrid::new(spec(17), flat(), psi0, bump(), 1.0).unwrap();
    let weighted = reduced_residual(&g, 1.0, UpsilonMode::ProfileWeighted).unwrap();
    let scale: f64 = (0..17).map(|i| reference_density(&g, i)).fold(0.0, f64::max);
    let worst = weighted.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst <= 1e-10 * scale, "{worst:e} vs {scale:e}");
    assert!(relative_residual_sup(&g, 1.0, UpsilonMode::Constant).unwrap() > 1e-3);
}
