use cvsheet::config::Config;
use cvsheet::diagnostics::{dispersion, lambda_stability, mode_lattice, symbol, InterfaceTraces};
use cvsheet::dno::{dn_apply, DnoOperator, DnoSide};
use cvsheet::fields::snapshot::Snapshot;
use cvsheet::fields::{TorusGrid, TorusScalar};
use cvsheet::geometry::Surface;
use proptest::prelude::*;
use std::path::Path;

fn pair() -> impl Strategy<Value = [f64; 2]> {
    [-2.0..2.0f64, -2.0..2.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbol_is_even_in_xi(v in pair(), hp in pair(), hm in pair(), xi in pair()) {
        let a = symbol(v, hp, hm, xi);
        let b = symbol(v, hp, hm, [-xi[0], -xi[1]]);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn positive_margin_means_no_growing_mode(v in pair(), hp in pair(), hm in pair()) {
        let g = TorusGrid::new(4, 4).unwrap();
        let t = InterfaceTraces::planar(g, [v[0], v[1], 0.0], [-v[0], -v[1], 0.0], [hp[0], hp[1], 0.0], [hm[0], hm[1], 0.0]);
        let lam = lambda_stability(&t).lambda_min;
        let table = dispersion([0.0, 0.0], v, hp, hm, &mode_lattice(4));
        // σ²(ξ) = −Λ_ξ|ξ|²/2 on each direction, so Λ > 0 forbids σ² > 0.
        if lam > 1e-9 {
            prop_assert!(table.records.iter().all(|r| r.sigma2 < 0.0));
        }
        for r in &table.records {
            let k2 = r.xi[0] * r.xi[0] + r.xi[1] * r.xi[1];
            prop_assert!(r.sigma2 <= -0.5 * lam * k2 + 1e-9 * (1.0 + k2));
        }
    }

    #[test]
    fn snapshots_round_trip(nx in 1usize..6, ny in 1usize..6, nz in proptest::option::of(1usize..5), seed in any::<u64>()) {
        let n = nx * ny * nz.unwrap_or(1);
        let data: Vec<f64> = (0..n).map(|i| ((seed as f64) * 1e-3 + i as f64).sin()).collect();
        let s = Snapshot { nx, ny, nz, name: "field".into(), data };
        let back = Snapshot::decode(&s.encode()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn snapshot_decoder_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = Snapshot::decode(&bytes);
        let mut framed = b"CVS1 2 2 x\n".to_vec();
        framed.extend_from_slice(&bytes);
        let _ = Snapshot::decode(&framed);
    }

    #[test]
    fn config_parser_never_panics(text in "[a-z._= \\[\\]0-9\"\n,-]{0,120}") {
        let _ = Config::parse(&text, Path::new("."));
    }

    #[test]
    fn grid_round_trip(vals in proptest::collection::vec(-1.0..1.0f64, 64)) {
        let g = TorusGrid::new(8, 8).unwrap();
        let f = TorusScalar::from_values(g, vals.clone());
        let back = TorusScalar::from_spectrum(g, f.spectrum().to_vec());
        for (a, b) in back.values().iter().zip(&vals) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn dn_operator_is_symmetric_and_nonnegative(amp in 0.0..0.3f64, k in 1i32..3, a in pair(), b in pair()) {
        let g = TorusGrid::new(16, 16).unwrap();
        let f = TorusScalar::from_fn(g, |x, y| amp * (k as f64 * x + y).cos());
        let s = Surface::new(f, 0.2).unwrap();
        let op = DnoOperator::new(&s, DnoSide::Sum, 13).unwrap();
        let p = TorusScalar::from_fn(g, |x, y| a[0] * x.sin() + a[1] * (x + 2.0 * y).cos());
        let q = TorusScalar::from_fn(g, |x, y| b[0] * (2.0 * y).sin() + b[1] * (x - y).cos());
        let (np, nq) = (dn_apply(&op, &p).unwrap(), dn_apply(&op, &q).unwrap());
        let scale = 1.0 + np.l2() * q.l2() + p.l2() * nq.l2();
        prop_assert!((np.dot(&q) - p.dot(&nq)).abs() <= 1e-8 * scale);
        prop_assert!(np.dot(&p) >= -1e-10 * scale);
    }
}
