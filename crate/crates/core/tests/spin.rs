use curvop_core::geometry::{frame_at, GeometryPoint};
use curvop_core::spin::{
    cartesian_pauli, dresselhaus_tensor_ccs, jacobian, pauli_ccs, rashba_tensor_ccs, reduced_tensors, SpinMatrix, C64,
};
use curvop_core::surface::{builtin, Surface, BUILTIN_NAMES};
use proptest::prelude::*;

fn point(name: &str, s: f64, t: f64) -> GeometryPoint {
    let surface = Surface::new(builtin(name).unwrap()).unwrap();
    let (u0, u1) = surface.u_range();
    let (v0, v1) = surface.v_range();
    frame_at(&surface, u0 + s * (u1 - u0), v0 + t * (v1 - v0)).unwrap()
}

fn catalog_point() -> impl Strategy<Value = GeometryPoint> {
    (0..BUILTIN_NAMES.len(), 0.0f64..1.0, 0.0f64..1.0).prop_map(|(k, s, t)| point(BUILTIN_NAMES[k], s, t))
}

/// Inverse of the 3-metric at the surface: `g^{ab}` block plus `g^{33} = 1`.
fn inverse_metric3(pt: &GeometryPoint) -> [[f64; 3]; 3] {
    let g = pt.metric_inv;
    [[g[0][0], g[0][1], 0.0], [g[1][0], g[1][1], 0.0], [0.0, 0.0, 1.0]]
}

proptest! {
    #[test]
    fn curvilinear_pauli_algebra(pt in catalog_point()) {
        let sigma = pauli_ccs(&pt).unwrap();
        let ginv = inverse_metric3(&pt);
        let scale = 1.0f64.max(ginv.iter().flatten().fold(0.0, |m, x| m.max(x.abs())));
        for i in 0..3 {
            prop_assert!((sigma[i].adjoint() - sigma[i]).max_abs() < 1e-14 * scale);
            prop_assert!(sigma[i].trace().norm() < 1e-14 * scale);
            for j in 0..3 {
                let anti = sigma[i] * sigma[j] + sigma[j] * sigma[i];
                let want = SpinMatrix::identity() * C64::from(2.0 * ginv[i][j]);
                prop_assert!((anti - want).max_abs() < 1e-12 * scale);
            }
        }
        // contracting with the Jacobian recovers the Cartesian matrices
        let j = jacobian(&pt);
        for (s, cart) in cartesian_pauli().iter().enumerate() {
            let back = (0..3).fold(SpinMatrix::zero(), |acc, i| acc + sigma[i] * C64::from(j[s][i]));
            prop_assert!((back - *cart).max_abs() < 1e-12);
        }
    }

    #[test]
    fn tensors_are_antisymmetric_and_linear(pt in catalog_point(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let r = rashba_tensor_ccs(&pt, alpha, 1.0).unwrap();
        let d = dresselhaus_tensor_ccs(&pt, beta, 1.0).unwrap();
        let r2 = rashba_tensor_ccs(&pt, 2.0 * alpha, 1.0).unwrap();
        let d2 = dresselhaus_tensor_ccs(&pt, 2.0 * beta, 1.0).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                prop_assert_eq!(r[i][k], -r[k][i]);
                prop_assert_eq!(d[i][k], -d[k][i]);
                prop_assert_eq!(r2[i][k], 2.0 * r[i][k]);
                prop_assert_eq!(d2[i][k], 2.0 * d[i][k]);
            }
        }
    }
}

#[test]
fn cylinder_frame_matrices() {
    // cylinder at azimuth 0: e_u = y, e_v = z, outward normal along x
    let pt = point("cylinder", 0.0, 0.3);
    let [su, sv, sn] = pauli_ccs(&pt).unwrap();
    let [x, y, z] = cartesian_pauli();
    assert!((su - y).max_abs() < 1e-14);
    assert!((sv - z).max_abs() < 1e-14);
    assert!((sn - x).max_abs() < 1e-14 || (sn + x).max_abs() < 1e-14);
}

#[test]
fn hbar_scaling() {
    let pt = point("torus", 0.2, 0.7);
    let a = reduced_tensors(&pt, 1.0, 1.0, 1.0).unwrap();
    let b = reduced_tensors(&pt, 1.0, 1.0, 2.0).unwrap();
    for i in 0..3 {
        for k in 0..3 {
            assert!((b.rashba[i][k] - a.rashba[i][k] / 2.0).abs() < 1e-15);
            assert!((b.dresselhaus[i][k] - a.dresselhaus[i][k] / 8.0).abs() < 1e-15);
        }
    }
    assert_eq!(a.sigma, b.sigma);
}
