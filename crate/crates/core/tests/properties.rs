#![allow(clippy::needless_range_loop)]

use lj_homographic::potential::accelerations_pairwise;
use lj_homographic::*;
use nalgebra::Rotation3;
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = PotentialParams> {
    (0.5f64..8.0, 0.1f64..8.0).prop_map(|(a, gap)| PotentialParams::new(a, a + gap).unwrap())
}

/// Collision-free states with 2 to 8 bodies, recentred on the origin.
fn state_strategy() -> impl Strategy<Value = SystemState> {
    prop::collection::vec(prop::array::uniform3(-2.0f64..2.0), 2..=8)
        .prop_filter("bodies too close", |pts| {
            (0..pts.len()).all(|i| {
                (i + 1..pts.len()).all(|j| {
                    let d: f64 = (0..3).map(|c| (pts[i][c] - pts[j][c]).powi(2)).sum();
                    d.sqrt() > 0.7
                })
            })
        })
        .prop_map(|pts| {
            let bodies = pts
                .into_iter()
                .map(|p| BodyState::at_rest(Vec3::new(p[0], p[1], p[2])))
                .collect();
            SystemState::centered(bodies, 0.0).unwrap()
        })
}

fn shifted(state: &SystemState, k: usize, c: usize, by: f64) -> SystemState {
    let mut bodies = state.bodies().to_vec();
    bodies[k].position[c] += by;
    SystemState::centered(bodies, 0.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_central_differences(state in state_strategy(), p in params_strategy()) {
        let grad = gradient(&state, &p).unwrap();
        let scale = grad.iter().map(|g| g.amax()).fold(0.0, f64::max);
        let step = 1e-5;
        for k in 0..state.len() {
            for c in 0..3 {
                let up = potential_energy(&shifted(&state, k, c, step), &p).unwrap();
                let dn = potential_energy(&shifted(&state, k, c, -step), &p).unwrap();
                let fd = (up - dn) / (2.0 * step);
                let err = (fd - grad[k][c]).abs() / grad[k][c].abs().max(scale);
                prop_assert!(err < 1e-6, "body {k} axis {c}: {err:e}");
            }
        }
    }

    #[test]
    fn gradients_sum_to_zero(state in state_strategy(), p in params_strategy()) {
        let grad = gradient(&state, &p).unwrap();
        let sum: Vec3 = grad.iter().sum();
        let scale = grad.iter().map(|g| g.norm()).fold(0.0, f64::max);
        prop_assert!(sum.norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn gradient_is_rotation_equivariant(
        state in state_strategy(),
        p in params_strategy(),
        angles in prop::array::uniform3(-3.0f64..3.0),
    ) {
        let r = Rotation3::from_euler_angles(angles[0], angles[1], angles[2]).into_inner();
        let g = gradient(&state, &p).unwrap();
        let g_rot = gradient(&state.transformed(&r), &p).unwrap();
        let scale = g.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for (a, b) in g.iter().zip(&g_rot) {
            prop_assert!((r * a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn potential_is_translation_invariant(state in state_strategy(), p in params_strategy(), shift in prop::array::uniform3(-5.0f64..5.0)) {
        let s = Vec3::new(shift[0], shift[1], shift[2]);
        let moved: Vec<BodyState> = state.bodies().iter().map(|b| BodyState::at_rest(b.position + s)).collect();
        let moved = SystemState::centered(moved, 0.0).unwrap();
        let (u0, u1) = (potential_energy(&state, &p).unwrap(), potential_energy(&moved, &p).unwrap());
        prop_assert!((u0 - u1).abs() <= 1e-12 * u0.abs().max(1.0));
    }

    #[test]
    fn two_acceleration_paths_agree(state in state_strategy(), p in params_strategy()) {
        let a = accelerations(&state, &p).unwrap();
        let b = accelerations_pairwise(&state, &p).unwrap();
        let g = gradient(&state, &p).unwrap();
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for ((x, y), z) in a.iter().zip(&b).zip(&g) {
            prop_assert!((x - y).norm() <= 1e-12 * scale);
            prop_assert!((x + z).norm() <= 1e-14 * scale);
        }
    }

    #[test]
    fn psi_forms_agree(l in 1.05f64..40.0, n in 2usize..10, p in params_strategy(), r in 0.2f64..5.0) {
        let prob = RadialProblem::new(l, n, &p).unwrap();
        let a = prob.psi_prime(r).unwrap();
        let b = prob.psi_prime_expanded(r).unwrap();
        let (al, be, nn) = (p.alpha(), p.beta(), n as f64);
        // sum of the magnitudes of the four pole-force terms
        let scale = nn * be / (l.powf(be + 2.0) * r.powf(be + 1.0))
            + nn * al / (l.powf(al + 2.0) * r.powf(al + 1.0))
            + 2.0 * be / (2f64.powf(be + 2.0) * r.powf(be + 1.0))
            + 2.0 * al / (2f64.powf(al + 2.0) * r.powf(al + 1.0));
        prop_assert!((a - b).abs() <= 1e-12 * scale);
    }
}
