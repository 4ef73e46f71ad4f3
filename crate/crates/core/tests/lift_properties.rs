use std::f64::consts::TAU;
use std::sync::OnceLock;

use proptest::prelude::*;
use shapeflow::tangent::TangentSpace;
use shapeflow::{BoundaryScalarField, Contour};

const N: usize = 96;

fn space() -> &'static TangentSpace {
    static SPACE: OnceLock<TangentSpace> = OnceLock::new();
    SPACE.get_or_init(|| {
        let c = Contour::from_polar(N, |t| 1.0 + 0.2 * (3.0 * t).cos()).unwrap();
        TangentSpace::new(c, 0.12).unwrap()
    })
}

/// `c0 + Σ c_k cos kθ + s_k sin kθ` at the sample angles.
fn trig(coeffs: &[(f64, f64)], c0: f64) -> BoundaryScalarField {
    BoundaryScalarField::new(
        (0..N)
            .map(|i| {
                let t = TAU * i as f64 / N as f64;
                c0 + coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| {
                        let k = (k + 1) as f64;
                        a * (k * t).cos() + b * (k * t).sin()
                    })
                    .sum::<f64>()
            })
            .collect(),
    )
}

fn coeffs() -> impl Strategy<Value = (Vec<(f64, f64)>, f64)> {
    (
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
        -1.0f64..1.0,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn divergence_constant_is_boundary_mean_flux((cs, c0) in coeffs()) {
        let s = space();
        let a = trig(&cs, c0);
        let alpha = s.lift(&a).unwrap();
        let expected = s.contour().boundary_integral(&a).unwrap() / s.contour().area();
        prop_assert!((alpha.div_constant - expected).abs() < 1e-9 * (1.0 + expected.abs()));
        prop_assert!(alpha.has_constant_divergence());
    }

    #[test]
    fn lift_is_linear((ca, a0) in coeffs(), (cb, b0) in coeffs(), k in -2.0f64..2.0) {
        let s = space();
        let (a, b) = (trig(&ca, a0), trig(&cb, b0));
        let sum = BoundaryScalarField::new(a.values.iter().zip(&b.values).map(|(x, y)| x + k * y).collect());
        let (la, lb, ls) = (s.lift(&a).unwrap(), s.lift(&b).unwrap(), s.lift(&sum).unwrap());
        let scale = 1.0 + la.norm() + lb.norm();
        for ((ga, gb), gs) in la.grad.vectors().iter().zip(lb.grad.vectors()).zip(ls.grad.vectors()) {
            let d = *gs - (*ga + *gb * k);
            prop_assert!(d.norm() < 1e-9 * scale);
        }
        prop_assert!((ls.div_constant - la.div_constant - k * lb.div_constant).abs() < 1e-9 * scale);
    }

    #[test]
    fn decomposition_reassembles_the_field((cs, c0) in coeffs()) {
        let s = space();
        let alpha = s.lift(&trig(&cs, c0)).unwrap();
        let d = s.decompose(&alpha).unwrap();
        let n = d.norms;
        let parts = n.translation.powi(2) + n.scale.powi(2) + n.deformation.powi(2);
        prop_assert!((parts - n.total.powi(2)).abs() < 1e-8 * n.total.powi(2).max(1e-12));
        prop_assert!(d.reconstruction_error < 1e-8);
        prop_assert!(d.orthogonality.max() < 1e-6);
    }
}
