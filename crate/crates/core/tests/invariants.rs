//! Property tests for the pointwise invariants: jet arithmetic against
//! finite differences, curvature-operator symmetries, frame identities on
//! randomized graph immersions, and orientation/lambda covariance of the
//! residuals.
#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;

use biharm_core::ambient::{AmbientPoint, AmbientSpace};
use biharm_core::immersion::Immersion;
use biharm_core::jet::{Analytic, Jet2};
use biharm_core::linalg::{self, metric_dot};

fn space_strategy() -> impl Strategy<Value = AmbientSpace> {
    (prop_oneof![Just(-1.0), Just(0.0), Just(1.0)], 2usize..=3)
        .prop_map(|(c, m)| AmbientSpace::new(c, m).unwrap())
}

fn wave_graph(space: AmbientSpace, amp: f64, k1: f64, k2: f64, phase: f64) -> Immersion {
    let m = space.m();
    Immersion::graph(space, vec![(-0.5, 0.5); m], move |x: &[Jet2]| {
        let mut arg = Jet2::constant(phase);
        for (i, xi) in x.iter().enumerate() {
            arg = arg + xi.scale(if i % 2 == 0 { k1 } else { k2 });
        }
        arg.sin().scale(amp)
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn jet_mul_matches_finite_differences(
        a in -0.9f64..0.9,
        b in -0.9f64..0.9,
        k in 0.3f64..2.0,
    ) {
        prop_assume!((a * b + 0.3).abs() > 0.1); // keep clear of the pole
        let f = |x: f64, y: f64| (k * x).sin() * (x * y + 0.3).recip();
        let j = (Jet2::variable(a, 0).scale(k)).sin()
            * (Jet2::variable(a, 0) * Jet2::variable(b, 1) + Jet2::constant(0.3)).recip();
        let h = 1e-5;
        let dx = (f(a + h, b) - f(a - h, b)) / (2.0 * h);
        let dy = (f(a, b + h) - f(a, b - h)) / (2.0 * h);
        prop_assume!(j.is_finite() && dx.is_finite());
        prop_assert!((j.val - f(a, b)).abs() <= 1e-12 * (1.0 + f(a, b).abs()));
        prop_assert!((j.grad[0] - dx).abs() <= 1e-6 * (1.0 + dx.abs()));
        prop_assert!((j.grad[1] - dy).abs() <= 1e-6 * (1.0 + dy.abs()));
    }

    #[test]
    fn metric_is_positive_definite(
        space in space_strategy(),
        coords in prop::array::uniform4(-0.9f64..0.9),
        t in -2.0f64..2.0,
    ) {
        let p = AmbientPoint::new(&coords[..space.m()], t);
        let g = space.metric_at(&p).unwrap();
        let ev = linalg::symmetric_eigenvalues(space.ambient_dim(), &g);
        prop_assert!(ev[0] > 0.0, "smallest eigenvalue {}", ev[0]);
    }

    #[test]
    fn curvature_antisymmetries_and_bianchi(
        space in space_strategy(),
        coords in prop::array::uniform4(-0.8f64..0.8),
        raw in prop::array::uniform4(prop::array::uniform4(-1.0f64..1.0)),
    ) {
        let m = space.m();
        let dim = m + 1;
        let p = AmbientPoint::new(&coords[..m], 0.0);
        let g = space.metric_at(&p).unwrap();
        let mut v = [linalg::zero_vec(); 4];
        for (slot, r) in raw.iter().enumerate() {
            v[slot][..dim].copy_from_slice(&r[..dim]);
        }
        let [x, y, z, w] = v;
        let rxy = space.curvature_op(&p, &x, &y, &z).unwrap();
        let ryx = space.curvature_op(&p, &y, &x, &z).unwrap();
        for a in 0..dim {
            prop_assert!((rxy[a] + ryx[a]).abs() <= 1e-10);
        }
        let rw = space.curvature_op(&p, &x, &y, &w).unwrap();
        let zw = metric_dot(dim, &g, &rxy, &w);
        let wz = metric_dot(dim, &g, &rw, &z);
        prop_assert!((zw + wz).abs() <= 1e-10);
        let b2 = space.curvature_op(&p, &y, &z, &x).unwrap();
        let b3 = space.curvature_op(&p, &z, &x, &y).unwrap();
        for a in 0..dim {
            prop_assert!((rxy[a] + b2[a] + b3[a]).abs() <= 1e-10);
        }
    }

    #[test]
    fn frame_identities_on_random_graphs(
        space in space_strategy(),
        amp in 0.02f64..0.3,
        k1 in 0.4f64..1.8,
        k2 in 0.4f64..1.8,
        phase in 0.0f64..6.0,
        px in -0.4f64..0.4,
        py in -0.4f64..0.4,
    ) {
        let m = space.m();
        let imm = wave_graph(space, amp, k1, k2, phase);
        let mut at = vec![px, py];
        if m == 3 {
            at.push(0.5 * (px - py));
        }
        let frame = imm.frame_at(&at).unwrap();
        let dim = m + 1;

        // unit normal orthogonal to the tangents
        let nn = metric_dot(dim, &frame.ambient_metric, &frame.normal, &frame.normal);
        prop_assert!((nn - 1.0).abs() <= 1e-10);
        for i in 0..m {
            prop_assert!(
                metric_dot(dim, &frame.ambient_metric, &frame.normal, &frame.tangents[i]).abs()
                    <= 1e-10
            );
        }

        // theta^2 + |T|^2 = 1
        prop_assert!(
            (frame.theta * frame.theta + frame.vertical_tangent_norm_sq() - 1.0).abs() <= 1e-10
        );

        // trace identities: tr A = sum kappa, tr A^2 = sum kappa^2
        let kappa = frame.principal_curvatures();
        let sum: f64 = kappa.iter().sum();
        let sq: f64 = kappa.iter().map(|k| k * k).sum();
        prop_assert!((sum / m as f64 - frame.mean_curvature).abs() <= 1e-10);
        prop_assert!((sq - frame.shape_norm_sq).abs() <= 1e-10);

        // <B(X, Y), xi> = <A X, Y>
        for i in 0..m {
            for j in 0..m {
                let mut axy = 0.0;
                for k in 0..m {
                    axy += frame.metric[j][k] * frame.shape[k][i];
                }
                prop_assert!((axy - frame.second_fundamental[i][j]).abs() <= 1e-10);
            }
        }

        // flip is an involution and flips the odd quantities
        let flipped = frame.flipped();
        prop_assert!((flipped.theta + frame.theta).abs() <= 1e-15);
        prop_assert!((flipped.mean_curvature + frame.mean_curvature).abs() <= 1e-15);
        prop_assert!((flipped.shape_norm_sq - frame.shape_norm_sq).abs() <= 1e-15);
        let back = flipped.flipped();
        for k in 0..m {
            prop_assert!((back.principal[k] - frame.principal[k]).abs() <= 1e-15);
        }
        prop_assert!((back.umbilicity_defect() - frame.umbilicity_defect()).abs() <= 1e-15);
    }

    #[test]
    fn ricci_formulas_consistent(
        space in space_strategy(),
        theta in -1.0f64..1.0,
    ) {
        // mu (1 - theta^2) == c (m-1) sin^2 alpha and the tangential
        // coefficient is -mu theta
        let scalar = space.ricci_normal_scalar(theta).unwrap();
        let want = space.c() * (space.m() as f64 - 1.0) * (1.0 - theta * theta);
        prop_assert!((scalar - want).abs() <= 1e-14);
        let coeff = space.ricci_normal_tangential_coefficient(theta).unwrap();
        prop_assert!((coeff + space.mu() * theta).abs() <= 1e-14);
    }
}
