use super::{parse_surface, SurfaceDef, SurfaceError};

pub const BUILTIN_NAMES: &[&str] = &["cone", "cylinder", "plane_ring", "sphere", "torus", "catenoid"];

// Chart conventions: u is the azimuth wherever there is one.
const CONE: &str = "\
x = (R + v*cos(phi))*cos(u);
y = (R + v*cos(phi))*sin(u);
z = v*sin(phi);
params R = 1, phi = pi/6, l = 2;
domain u in [0, 2*pi) periodic, v in [0, l];";

// Same expression tree as the cone with the inclination written as a literal,
// so the two charts evaluate identically at phi = pi/2.
const CYLINDER: &str = "\
x = (R + v*cos(pi/2))*cos(u);
y = (R + v*cos(pi/2))*sin(u);
z = v*sin(pi/2);
params R = 1, l = 2;
domain u in [0, 2*pi) periodic, v in [0, l];";

const PLANE_RING: &str = "\
x = (R + v)*cos(u);
y = (R + v)*sin(u);
z = 0;
params R = 1, l = 1;
domain u in [0, 2*pi) periodic, v in [0, l];";

// Polar caps are cut away to keep the chart regular.
const SPHERE: &str = "\
x = R*sin(v)*cos(u);
y = R*sin(v)*sin(u);
z = R*cos(v);
params R = 1, cap = 0.1;
domain u in [0, 2*pi) periodic, v in [cap, pi - cap];";

const TORUS: &str = "\
x = (R + a*cos(v))*cos(u);
y = (R + a*cos(v))*sin(u);
z = a*sin(v);
params R = 2, a = 1;
domain u in [0, 2*pi) periodic, v in [0, 2*pi) periodic;";

const CATENOID: &str = "\
x = c*(exp(v/c) + exp(-v/c))/2*cos(u);
y = c*(exp(v/c) + exp(-v/c))/2*sin(u);
z = v;
params c = 1, h = 1;
domain u in [0, 2*pi) periodic, v in [-h, h];";

pub fn builtin_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "cone" => CONE,
        "cylinder" => CYLINDER,
        "plane_ring" => PLANE_RING,
        "sphere" => SPHERE,
        "torus" => TORUS,
        "catenoid" => CATENOID,
        _ => return None,
    })
}

pub fn builtin(name: &str) -> Result<SurfaceDef, SurfaceError> {
    let src = builtin_source(name).ok_or_else(|| SurfaceError::UnknownSurface(name.to_string()))?;
    Ok(parse_surface(src).expect("builtin surfaces parse"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Surface;

    #[test]
    fn every_builtin_parses_and_round_trips() {
        for name in BUILTIN_NAMES {
            let def = builtin(name).unwrap();
            let again = parse_surface(&def.to_source()).unwrap();
            assert_eq!(def, again, "{name}");
        }
        assert_eq!(builtin("klein").unwrap_err(), SurfaceError::UnknownSurface("klein".into()));
    }

    #[test]
    fn periodic_seams_close() {
        for name in BUILTIN_NAMES {
            let s = Surface::new(builtin(name).unwrap()).unwrap();
            let (u0, u1) = s.u_range();
            let (v0, v1) = s.v_range();
            for k in 0..5 {
                let t = k as f64 / 4.0;
                if s.periodic_u() {
                    let v = v0 + t * (v1 - v0);
                    let a = s.eval_embedding(&u0, &v).unwrap();
                    let b = s.eval_embedding(&u1, &v).unwrap();
                    for i in 0..3 {
                        assert!((a[i] - b[i]).abs() < 1e-12, "{name}");
                    }
                }
                if s.periodic_v() {
                    let u = u0 + t * (u1 - u0);
                    let a = s.eval_embedding(&u, &v0).unwrap();
                    let b = s.eval_embedding(&u, &v1).unwrap();
                    for i in 0..3 {
                        assert!((a[i] - b[i]).abs() < 1e-12, "{name}");
                    }
                }
            }
        }
    }

    #[test]
    fn cylinder_matches_cone_at_right_angle() {
        let cyl = Surface::new(builtin("cylinder").unwrap()).unwrap();
        let cone = Surface::with_overrides(
            builtin("cone").unwrap(),
            &[("phi".into(), std::f64::consts::FRAC_PI_2)],
        )
        .unwrap();
        for &(u, v) in &[(0.0, 0.0), (0.3, 1.1), (2.0, 1.9)] {
            assert_eq!(cyl.eval_embedding(&u, &v).unwrap(), cone.eval_embedding(&u, &v).unwrap());
        }
    }
}
