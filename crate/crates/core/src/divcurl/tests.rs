use super::*;
use crate::geometry::Surface;

fn wavy(nz: usize, side: Side) -> EllipticCoefficients {
    let t = TorusGrid::new(16, 16).unwrap();
    let f = TorusScalar::from_fn(t, |_, y| 0.1 * y.cos());
    let s = Surface::new(f, 0.5).unwrap();
    EllipticCoefficients::build(&s, side, nz).unwrap()
}

fn test_field(x1: f64, x2: f64, x3: f64) -> [f64; 3] {
    [
        x2.sin() * x3.cos() + 0.3,
        (x1 + x3).cos() - 0.2,
        (1.0 - x3 * x3) * x1.sin(),
    ]
}

fn data_of(c: &EllipticCoefficients, u: &StripVector) -> DivCurlData {
    DivCurlData {
        omega: c.curl(u),
        g: c.div(u),
        theta_bc: c.normal_component_at_interface(&u.c),
        lid_means: lid_means(u),
    }
}

#[test]
fn zero_data_gives_zero_field() {
    let c = wavy(9, Side::Plus);
    let d = DivCurlData::curl_free(c.grid(), TorusScalar::zeros(c.grid().torus), [0.0, 0.0]);
    let r = divcurl_solve(&d, &c, &DivCurlOptions::default()).unwrap();
    assert!(r.u.max_abs() < 1e-12);
}

#[test]
fn round_trip_recovers_field_and_converges_in_depth() {
    for side in Side::BOTH {
        let mut errs = vec![];
        for nz in [9, 13, 17] {
            let c = wavy(nz, side);
            let u = c.map.sample_vector(test_field);
            let r = divcurl_solve(&data_of(&c, &u), &c, &DivCurlOptions::default()).unwrap();
            let e = r.u.sub(&u).max_abs();
            let res = r.residuals.unwrap();
            assert!(res.lid_normal < 1e-10, "{res:?}");
            assert!(res.trace < 1e-8, "{res:?}");
            errs.push(e);
        }
        assert!(errs[2] <= 1e-5, "{side:?} {errs:?}");
        assert!(errs[2] < errs[0], "{side:?} {errs:?}");
    }
}

#[test]
fn lid_means_follow_requested_averages() {
    let c = wavy(13, Side::Minus);
    let d = DivCurlData::curl_free(c.grid(), TorusScalar::zeros(c.grid().torus), [1.0, 0.0]);
    let r = divcurl_solve(&d, &c, &DivCurlOptions::default()).unwrap();
    let m = lid_means(&r.u);
    assert!((m[0] - 1.0).abs() < 1e-12 && m[1].abs() < 1e-12);
    assert!(r.u.sub(&StripVector::constant(c.grid(), [1.0, 0.0, 0.0])).max_abs() < 1e-8);
}

#[test]
fn solution_is_linear_in_data() {
    let c = wavy(13, Side::Plus);
    let u1 = c.map.sample_vector(test_field);
    let u2 = c.map.sample_vector(|x, y, z| [(x + y).cos() * z, 0.5, (1.0 - z * z) * y.cos()]);
    let (d1, d2) = (data_of(&c, &u1), data_of(&c, &u2));
    let comb = DivCurlData {
        omega: d1.omega.scale(2.0).axpy(-3.0, &d2.omega),
        g: d1.g.scale(2.0).axpy(-3.0, &d2.g),
        theta_bc: d1.theta_bc.scale(2.0).axpy(-3.0, &d2.theta_bc),
        lid_means: [2.0 * d1.lid_means[0] - 3.0 * d2.lid_means[0], 2.0 * d1.lid_means[1] - 3.0 * d2.lid_means[1]],
    };
    let o = DivCurlOptions::default();
    let r1 = divcurl_solve(&d1, &c, &o).unwrap().u;
    let r2 = divcurl_solve(&d2, &c, &o).unwrap().u;
    let rc = divcurl_solve(&comb, &c, &o).unwrap().u;
    assert!(rc.sub(&r1.scale(2.0).axpy(-3.0, &r2)).max_abs() < 1e-8);
}

#[test]
fn incompatible_data_is_rejected() {
    let c = wavy(9, Side::Plus);
    let g = c.grid();
    let t = g.torus;
    let o = DivCurlOptions::default();
    let mut d = DivCurlData::curl_free(g, TorusScalar::zeros(t), [0.0, 0.0]);
    d.omega = StripVector::constant(g, [0.0, 0.0, 1.0]);
    let e = divcurl_solve(&d, &c, &o).unwrap_err();
    assert!(matches!(e, Error::Sided { ref source, .. } if matches!(**source, Error::C2 { .. })), "{e:?}");

    let mut d = DivCurlData::curl_free(g, TorusScalar::zeros(t), [0.0, 0.0]);
    d.omega = c.map.sample_vector(|x, _, z| [0.0, 0.0, x.cos() * (1.0 + z)]);
    let e = divcurl_solve(&d, &c, &o).unwrap_err();
    assert!(matches!(e, Error::Sided { ref source, .. } if matches!(**source, Error::C1 { .. })), "{e:?}");

    let mut d = DivCurlData::curl_free(g, TorusScalar::zeros(t), [0.0, 0.0]);
    d.g = StripScalar::constant(g, 1.0);
    let e = divcurl_solve(&d, &c, &o).unwrap_err();
    assert!(matches!(e, Error::Sided { ref source, .. } if matches!(**source, Error::C3 { .. })), "{e:?}");
}

#[test]
fn flux_balanced_divergence_is_accepted() {
    // u = ∇((x3+1)²/2) on the minus side: g = 1, N·u = f + 1 on the interface.
    let c = wavy(13, Side::Minus);
    let u = c.map.sample_vector(|_, _, z| [0.0, 0.0, z + 1.0]);
    let d = data_of(&c, &u);
    let r = divcurl_solve(&d, &c, &DivCurlOptions::default()).unwrap();
    assert!(r.u.sub(&u).max_abs() < 1e-7);
}

#[test]
fn slab_recovers_manufactured_field() {
    let t = TorusGrid::new(8, 8).unwrap();
    let pi = std::f64::consts::PI;
    let nz = 21;
    let w = SlabVector::from_fn(t, nz, |_, y, z| [y.sin() * (pi * z).cos(), 0.0, 0.0]);
    let omega = SlabVector::from_fn(t, nz, |_, y, z| [0.0, -pi * y.sin() * (pi * z).sin(), -y.cos() * (pi * z).cos()]);
    let v = solve_curl_slab(&omega, 1e-8).unwrap();
    assert!(v.sub(&w).max_abs() < 1e-8, "{}", v.sub(&w).max_abs());
    assert!(v.curl().sub(&omega).max_abs() < 1e-8);
    assert!(v.div().iter().all(|d| d.abs() < 1e-8));
}

#[test]
fn slab_general_mode_round_trip() {
    let t = TorusGrid::new(8, 8).unwrap();
    let nz = 21;
    let w = SlabVector::from_fn(t, nz, |x, y, z| {
        [(x + 2.0 * y).cos() * z * z + y.sin(), -0.5 * (x + 2.0 * y).cos() * z * z + (2.0 * z).cos(), 0.0]
    });
    let omega = w.curl();
    let v = solve_curl_slab(&omega, 1e-8).unwrap();
    assert!(v.curl().sub(&omega).max_abs() < 1e-8);
    assert!(v.div().iter().all(|d| d.abs() < 1e-8));
}

#[test]
fn slab_rejects_incompatible_curl() {
    let t = TorusGrid::new(8, 8).unwrap();
    let c = SlabVector::from_fn(t, 9, |_, _, _| [0.0, 0.0, 1.0]);
    assert!(matches!(solve_curl_slab(&c, 1e-8), Err(Error::C2 { .. })));
    let c = SlabVector::from_fn(t, 9, |x, _, z| [0.0, 0.0, x.cos() * (z * z - 0.3)]);
    assert!(matches!(solve_curl_slab(&c, 1e-8), Err(Error::C1 { .. })));
}
