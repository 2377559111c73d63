use curvop_core::geometry::{
    frame_at, geometric_potential, grid_sample, offset_metric, reduced_bracket, BracketField, GeometryError,
    GeometryPoint, Quantity,
};
use curvop_core::jets::Jet3;
use curvop_core::surface::{builtin, parse_surface, Surface, BUILTIN_NAMES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const POINTS_PER_SURFACE: usize = 100;
const BRACKET_TOL: f64 = 1e-12;

fn surface(name: &str) -> Surface {
    Surface::new(builtin(name).unwrap()).unwrap()
}

fn random_points(s: &Surface, n: usize, seed: u64) -> Vec<GeometryPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (u0, u1) = s.u_range();
    let (v0, v1) = s.v_range();
    (0..n)
        .map(|_| frame_at(s, rng.gen_range(u0..u1), rng.gen_range(v0..v1)).unwrap())
        .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1.0f64.max(a.abs()).max(b.abs())
}

/// `f(q3) = sqrt(det G(q3) / det g)` as a jet in the normal offset, built
/// from the offset embedding `∂_a r + q3 ∂_a n`.
fn factor_from_embedding(pt: &GeometryPoint) -> Jet3 {
    let q3 = Jet3::seed(2, 0.0).unwrap();
    let dn = |a: usize, s: usize| {
        let n = &pt.local.normal[s];
        if a == 0 {
            n.derivative(1, 0, 0)
        } else {
            n.derivative(0, 1, 0)
        }
    };
    let d_r: Vec<[Jet3; 3]> = (0..2)
        .map(|a| std::array::from_fn(|s| Jet3::constant(pt.tangents[a][s]) + q3.scale(dn(a, s))))
        .collect();
    let dot = |a: &[Jet3; 3], b: &[Jet3; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let det = dot(&d_r[0], &d_r[0]) * dot(&d_r[1], &d_r[1]) - dot(&d_r[0], &d_r[1]) * dot(&d_r[0], &d_r[1]);
    det.checked_div(&Jet3::constant(pt.det_metric())).unwrap().checked_sqrt().unwrap()
}

#[test]
fn reduced_bracket_identities_on_the_catalog() {
    for (k, name) in BUILTIN_NAMES.iter().enumerate() {
        let s = surface(name);
        for pt in random_points(&s, POINTS_PER_SURFACE, 100 + k as u64) {
            let (m, kg) = (pt.mean_curvature, pt.gaussian_curvature);
            let expected = [
                (BracketField::Factor, 1, 2.0 * m),
                (BracketField::Factor, 2, 2.0 * kg),
                (BracketField::InvSqrtFactor, 1, -m),
                (BracketField::InvSqrtFactor, 2, 3.0 * m * m - kg),
            ];
            let f = factor_from_embedding(&pt);
            let inv_sqrt = f.checked_powf(-0.5).unwrap();
            for (field, order, want) in expected {
                let got = reduced_bracket(&pt, field, order).unwrap();
                assert!(close(got, want, BRACKET_TOL), "{name} {field:?} order {order}: {got} vs {want}");
                let jet = if field == BracketField::Factor { &f } else { &inv_sqrt };
                let from_embedding = jet.derivative(0, 0, order as usize);
                assert!(
                    close(from_embedding, want, BRACKET_TOL),
                    "{name} {field:?} order {order} via embedding: {from_embedding} vs {want}"
                );
            }
        }
    }
}

#[test]
fn offset_volume_is_the_factor_squared() {
    for (k, name) in BUILTIN_NAMES.iter().enumerate() {
        let s = surface(name);
        for pt in random_points(&s, 20, 200 + k as u64) {
            let q3 = 0.05;
            let g = offset_metric(&pt, q3).unwrap();
            let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
            let f = pt.rescaled_factor(q3);
            assert!(close(det, f * f * pt.det_metric(), 1e-12), "{name}");
        }
    }
}

#[test]
fn frames_are_orthonormal_and_adapted() {
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    for (k, name) in BUILTIN_NAMES.iter().enumerate() {
        let s = surface(name);
        for pt in random_points(&s, 20, 300 + k as u64) {
            let e = [pt.e1, pt.e2, pt.en];
            for a in 0..3 {
                for b in 0..3 {
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((dot(e[a], e[b]) - want).abs() < 1e-13, "{name}");
                }
            }
            for t in pt.tangents {
                assert!(dot(t, pt.en).abs() < 1e-12 * dot(t, t).sqrt(), "{name}");
            }
        }
    }
}

#[test]
fn normal_derivative_of_inverse_metric_three_ways() {
    for (k, name) in BUILTIN_NAMES.iter().enumerate() {
        let s = surface(name);
        for pt in random_points(&s, 20, 400 + k as u64) {
            let embedded = pt.g1_inv_from_embedding();
            // symmetric difference of the offset inverse metric
            let h = 1e-5;
            let inv = |q3: f64| {
                let g = offset_metric(&pt, q3).unwrap();
                let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
                [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]]
            };
            let (p, m) = (inv(h), inv(-h));
            for a in 0..2 {
                for b in 0..2 {
                    let fd = (p[a][b] - m[a][b]) / (2.0 * h);
                    assert!(close(pt.g1_inv[a][b], embedded[a][b], 1e-11), "{name} embedding");
                    assert!(close(pt.g1_inv[a][b], fd, 1e-8), "{name} difference");
                }
            }
        }
    }
}

#[test]
fn sphere_is_umbilic_and_plane_is_flat() {
    let sphere = Surface::with_overrides(builtin("sphere").unwrap(), &[("R".into(), 2.0)]).unwrap();
    for pt in random_points(&sphere, 50, 7) {
        assert!((pt.mean_curvature.abs() - 0.5).abs() < 1e-12);
        assert!((pt.gaussian_curvature - 0.25).abs() < 1e-12);
        assert!(geometric_potential(&pt, 1.0, 0.5).abs() < 1e-12);
    }
    let ring = surface("plane_ring");
    for pt in random_points(&ring, 50, 8) {
        assert!(pt.mean_curvature.abs() < 1e-12 && pt.gaussian_curvature.abs() < 1e-12);
        assert!(geometric_potential(&pt, 1.0, 0.5).abs() < 1e-12);
    }
}

#[test]
fn torus_curvature_matches_the_textbook_form() {
    // K = cos v / (a (R + a cos v)) for the standard torus chart
    let s = surface("torus");
    for pt in random_points(&s, 30, 9) {
        let (r, a) = (2.0, 1.0);
        let k = pt.v.cos() / (a * (r + a * pt.v.cos()));
        assert!(close(pt.gaussian_curvature, k, 1e-12));
        let m = (r + 2.0 * a * pt.v.cos()) / (2.0 * a * (r + a * pt.v.cos()));
        assert!(close(pt.mean_curvature.abs(), m, 1e-12));
    }
}

#[test]
fn cone_point_values() {
    let pt = frame_at(&surface("cone"), 0.0, 1.0).unwrap();
    assert!((pt.mean_curvature - 0.1339746).abs() < 1e-7);
    assert!((pt.rescaled_factor(0.1) - 1.0267949).abs() < 1e-7);
    assert!(pt.gaussian_curvature.abs() < 1e-15);
}

#[test]
fn degenerate_chart_points_are_reported() {
    let s = Surface::with_overrides(builtin("sphere").unwrap(), &[("cap".into(), 0.0)]).unwrap();
    assert!(matches!(frame_at(&s, 0.3, 0.0), Err(GeometryError::DegenerateMetric { .. })));
    let flat = Surface::new(parse_surface("x = u + v; y = u + v; z = 0; domain u in [0, 1], v in [0, 1];").unwrap()).unwrap();
    assert!(matches!(frame_at(&flat, 0.5, 0.5), Err(GeometryError::DegenerateMetric { .. })));
}

#[test]
fn grid_sampling_is_row_major_and_named() {
    let s = surface("cone");
    let field = grid_sample(&s, 4, 3, &[Quantity::MeanCurvature, Quantity::Metric(0, 0)], 1.0, 0.5).unwrap();
    assert_eq!(field.channels, vec!["M".to_string(), "g11".to_string()]);
    assert_eq!(field.len(), 12);
    for i in 0..4 {
        for j in 0..3 {
            let pt = frame_at(&s, field.grid.u(i), field.grid.v(j)).unwrap();
            assert_eq!(field.value(i, j, 0), pt.mean_curvature);
            assert_eq!(field.value(i, j, 1), pt.metric[0][0]);
        }
    }
}
