use super::*;
use crate::elliptic::SolverOptions;

fn torus(n: usize) -> TorusGrid {
    TorusGrid::new(n, n).unwrap()
}

fn surface(n: usize, c0: f64, f: impl Fn(f64, f64) -> f64) -> Surface {
    Surface::new(TorusScalar::from_fn(torus(n), f), c0).unwrap()
}

#[test]
fn flat_surface_gives_identity_map_and_trivial_coefficients() {
    for side in Side::BOTH {
        let s = Surface::flat(torus(8), 0.2);
        let map = build_flattening(&s, side, 9).unwrap();
        assert_eq!(map.delta, 1.0);
        for (k, z) in map.grid.cheb().z.iter().enumerate() {
            assert!(map.rho.level_slice(k).iter().all(|v| v == z));
        }
        let c = flatten_coefficients(Arc::new(map));
        assert!(c.alpha.values().iter().all(|&v| v == 1.0));
        assert!(c.beta[0].max_abs() == 0.0 && c.beta[1].max_abs() == 0.0);
        assert!(c.gamma.max_abs() == 0.0);
    }
}

#[test]
fn wavy_surface_respects_jacobian_floor() {
    let s = surface(32, 0.5, |x, _| 0.3 * x.cos());
    for side in Side::BOTH {
        let map = build_flattening(&s, side, 17).unwrap();
        assert!(map.rho_z.min() >= 0.25, "{side:?}: {}", map.rho_z.min());
        assert!(map.rho.interface_trace().sub(&s.f).max_abs() < 1e-14);
        assert!((map.rho.lid_trace().mean() - side.lid_height()).abs() < 1e-14);
        assert!(map.rho.lid_trace().sub(&TorusScalar::constant(s.grid(), side.lid_height())).max_abs() < 1e-14);
    }
}

#[test]
fn rough_surface_forces_halving_and_is_deterministic() {
    let s = surface(32, 0.1, |x, _| 0.6 * (8.0 * x).cos());
    let a = build_flattening(&s, Side::Minus, 9).unwrap();
    let b = build_flattening(&s, Side::Minus, 9).unwrap();
    assert!(a.delta < 1.0);
    assert_eq!(a.delta, b.delta);
    assert_eq!(a.rho.values(), b.rho.values());
    assert!(a.rho_z.min() >= 0.05);
}

#[test]
fn constant_surface_gives_straight_lines() {
    for (c, side) in [(0.8, Side::Minus), (-0.8, Side::Plus), (0.8, Side::Plus)] {
        let s = surface(8, 0.2, |_, _| c);
        let map = build_flattening(&s, side, 9).unwrap();
        let cg = map.grid.cheb();
        for k in 0..9 {
            let want = cg.z[k] + (1.0 - cg.z[k].abs()) * c;
            assert!(map.rho.level_slice(k).iter().all(|v| (v - want).abs() < 1e-14));
        }
    }
}

#[test]
fn out_of_bounds_surface_rejected() {
    let f = TorusScalar::from_fn(torus(8), |x, _| 0.95 * x.cos());
    assert!(matches!(Surface::new(f, 0.1), Err(Error::SurfaceOutOfBounds { .. })));
}

#[test]
fn gamma_satisfies_defining_identity_with_independent_derivatives() {
    // Recompute the z-derivatives of ρ by collocation and the horizontal
    // ones by FFT, then check γ ρ_z = ρ_zz + αΔρ + β·∇ρ_z.
    let s = surface(16, 0.3, |x, y| 0.15 * (x + 2.0 * y).cos() - 0.1 * (2.0 * x).sin() + 0.05);
    for side in Side::BOTH {
        let c = EllipticCoefficients::build(&s, side, 33).unwrap();
        let m = &c.map;
        let rz = m.rho.deriv_z();
        let rzz = m.rho.deriv_zz();
        let lap = m.rho.deriv(0).deriv(0).add(&m.rho.deriv(1).deriv(1));
        let rhs = rzz.add(&c.alpha.mul(&lap)).add(&c.beta[0].mul(&rz.deriv(0))).add(&c.beta[1].mul(&rz.deriv(1)));
        let res = c.gamma.mul(&rz).sub(&rhs).max_abs();
        assert!(res < 1e-10, "{side:?}: {res}");
        assert!(rz.sub(&m.rho_z).max_abs() < 1e-11);
    }
}

#[test]
fn coefficients_converge_to_first_order_expansion() {
    // α ≈ 1 + 2ρ₁, β ≈ -2∇ρ₁, with ρ₁ = (1-t)e^{-δt} ε cos x1 and
    // ρ_{z,1} = -s(1 + (1-t)δ)e^{-δt} ε cos x1 at wavenumber 1.
    for side in Side::BOTH {
        let mut errs = vec![];
        for eps in [1e-2, 5e-3] {
            let s = surface(8, 0.5, |x, _| eps * x.cos());
            let c = EllipticCoefficients::build(&s, side, 9).unwrap();
            let d = c.map.delta;
            let sg = side.sign();
            let a1 = StripScalar::from_fn(c.grid(), |x, _, z| {
                let t = z.abs();
                1.0 - 2.0 * sg * (1.0 + (1.0 - t) * d) * (-d * t).exp() * eps * x.cos()
            });
            let b1 = StripScalar::from_fn(c.grid(), |x, _, z| {
                let t = z.abs();
                2.0 * (1.0 - t) * (-d * t).exp() * eps * x.sin()
            });
            errs.push(c.alpha.sub(&a1).max_abs().max(c.beta[0].sub(&b1).max_abs()));
        }
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.5 && ratio < 4.5, "{side:?} {errs:?}");
    }
}

#[test]
fn alpha_respects_ellipticity_floor() {
    let s = surface(16, 0.2, |x, y| 0.3 * (x - y).cos());
    for side in Side::BOTH {
        let c = EllipticCoefficients::build(&s, side, 17).unwrap();
        let g = c.map.grad_rho[0].mul(&c.map.grad_rho[0]).add(&c.map.grad_rho[1].mul(&c.map.grad_rho[1])).max();
        assert!(c.alpha_min() >= (0.1f64).powi(2) / (1.0 + g));
    }
}

#[test]
fn normal_examples() {
    let g = torus(16);
    let n = interface_normal(&Surface::flat(g, 0.5));
    assert!(n[0].max_abs() == 0.0 && n[1].max_abs() == 0.0 && n[2].min() == 1.0);
    let s = Surface { f: TorusScalar::from_fn(g, |x, _| x.cos()), c0: 0.0 };
    let n = interface_normal(&s);
    assert!(n[0].sub(&TorusScalar::from_fn(g, |x, _| x.sin())).max_abs() < 1e-13);
    assert!(n[1].max_abs() < 1e-13);
    let norm2 = n[0].mul(&n[0]).add(&n[1].mul(&n[1])).add(&n[2].mul(&n[2]));
    assert!(norm2.min() >= 1.0);
    // Tangent projection h = a - (a·N/|N|²) N is orthogonal to N.
    let a = [TorusScalar::from_fn(g, |x, y| (x + y).sin()), TorusScalar::constant(g, 0.7), TorusScalar::from_fn(g, |_, y| y.cos())];
    let an = a[0].mul(&n[0]).add(&a[1].mul(&n[1])).add(&a[2].mul(&n[2])).zip_with(&norm2, |u, v| u / v);
    let h: Vec<TorusScalar> = (0..3).map(|i| a[i].sub(&an.mul(&n[i]))).collect();
    let hn = h[0].mul(&n[0]).add(&h[1].mul(&n[1])).add(&h[2].mul(&n[2]));
    assert!(hn.max_abs() < 1e-12);
}

#[test]
fn harmonic_coordinates_identity_for_reference_surface() {
    let s = surface(16, 0.3, |x, y| 0.2 * (x + y).cos());
    for side in Side::BOTH {
        let h = harmonic_coordinates(&s, &s, side, 17, &SolverOptions::default()).unwrap();
        let err = h.phi3.sub(&h.reference.map.rho).max_abs();
        assert!(err < 1e-8, "{side:?}: {err}");
    }
}

#[test]
fn harmonic_coordinates_flat_reference_matches_separation_of_variables() {
    let eps = 0.05;
    let g = torus(16);
    let s = surface(16, 0.3, |x, _| eps * x.cos());
    let reference = Surface::flat(g, 0.3);
    for side in Side::BOTH {
        let h = harmonic_coordinates(&s, &reference, side, 17, &SolverOptions::default()).unwrap();
        let want = StripScalar::from_fn(h.phi3.grid(), |x, _, z| z + eps * x.cos() * (1.0 - z.abs()).sinh() / 1f64.sinh());
        assert!(h.phi3.sub(&want).max_abs() < 1e-10);
        assert!(h.jacobian_det().min() > 0.0);
        let v = h.as_vector();
        assert!(v.c[0].interface_trace().sub(&TorusScalar::from_fn(g, |x, _| x)).max_abs() == 0.0);
    }
}

#[test]
fn harmonic_coordinates_invert_by_newton() {
    let s_ref = surface(16, 0.3, |x, y| 0.1 * (x + y).cos());
    let s = surface(16, 0.3, |x, y| 0.1 * (x + y).cos() + 0.05 * (2.0 * x).sin());
    for side in Side::BOTH {
        let h = harmonic_coordinates(&s, &s_ref, side, 17, &SolverOptions::default()).unwrap();
        assert!(h.jacobian_det().min() > 0.0);
        let grid = h.phi3.grid();
        let cg = grid.cheb();
        let n = grid.nxy();
        for k in 1..grid.nz - 1 {
            for p in (0..n).step_by(7) {
                let x3 = h.phi3.values()[k * n + p];
                let z = h.invert_column(p, x3).unwrap();
                assert!((z - cg.z[k]).abs() < 1e-8, "{side:?} k={k} p={p}");
            }
        }
    }
}

#[test]
fn physical_derivatives_of_sampled_fields() {
    let s = surface(32, 0.3, |x, y| 0.2 * (x + y).cos());
    let phi = |x: f64, y: f64, z: f64| (x - y).sin() * (0.5 * z).exp() + z * z;
    for side in Side::BOTH {
        let c = EllipticCoefficients::build(&s, side, 25).unwrap();
        let ps = c.map.sample(phi);
        let g = c.grad(&ps);
        let want = [
            c.map.sample(|x, y, z| (x - y).cos() * (0.5 * z).exp()),
            c.map.sample(|x, y, z| -(x - y).cos() * (0.5 * z).exp()),
            c.map.sample(|x, y, z| 0.5 * (x - y).sin() * (0.5 * z).exp() + 2.0 * z),
        ];
        for i in 0..3 {
            assert!(g[i].sub(&want[i]).max_abs() < 1e-9, "{side:?} component {i}");
        }
    }
}
