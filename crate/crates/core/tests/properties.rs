use fwdiss::kernel::{apply_semigroup, gauss_deriv};
use fwdiss::norms::lq_norm;
use fwdiss::spectral::{inverse_transform, transform};
use fwdiss::{Frame, Grid, Params};
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::new(20.0, 256, Frame::Comoving).unwrap()
}

prop_compose! {
    fn bump()(a in -2.0..2.0f64, c in -5.0..5.0f64, w in 0.5..3.0f64) -> (f64, f64, f64) {
        (a, c, w)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval((a, c, w) in bump()) {
        let g = grid();
        let f = g.sample(|x| a * (-(x - c) * (x - c) / w).exp());
        let spec = transform(&f);
        let dxi = std::f64::consts::PI / g.half_length();
        let energy: f64 = spec.coeffs().iter().map(|z| z.norm_sqr()).sum::<f64>() * dxi;
        let l2 = lq_norm(&f, 2.0).unwrap();
        prop_assert!((energy - l2 * l2).abs() <= 1e-12 * (1.0 + l2 * l2));
        let back = inverse_transform(&spec).unwrap();
        prop_assert!(lq_norm(&back.sub(&f).unwrap(), f64::INFINITY).unwrap() <= 1e-13 * (1.0 + a.abs()));
    }

    #[test]
    fn semigroup_is_linear((a, c, w) in bump(), k in -3.0..3.0f64, t in 0.1..20.0f64) {
        let g = grid();
        let params = Params::new(3.0, 1.0, 1.0, 1.0).unwrap();
        let f = g.sample(|x| a * (-(x - c) * (x - c) / w).exp());
        let lhs = apply_semigroup(&f.scaled(k), t, &params).unwrap();
        let rhs = apply_semigroup(&f, t, &params).unwrap().scaled(k);
        let scale = 1.0 + lq_norm(&rhs, f64::INFINITY).unwrap();
        prop_assert!(lq_norm(&lhs.sub(&rhs).unwrap(), f64::INFINITY).unwrap() <= 1e-13 * scale);
    }

    #[test]
    fn norms_interpolate((a, c, w) in bump(), q in 2.5..12.0f64) {
        // Hölder: ||f||_q <= ||f||_2^{2/q} ||f||_inf^{1-2/q}
        let f = grid().sample(|x| a * (-(x - c) * (x - c) / w).exp());
        let lq = lq_norm(&f, q).unwrap();
        let l2 = lq_norm(&f, 2.0).unwrap();
        let linf = lq_norm(&f, f64::INFINITY).unwrap();
        prop_assert!(lq <= l2.powf(2.0 / q) * linf.powf(1.0 - 2.0 / q) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn heat_kernel_has_unit_mass(t in 0.5..5.0f64, mu in 0.2..3.0f64) {
        let wide = Grid::new(60.0, 1024, Frame::Lab).unwrap();
        let f = wide.sample(|x| gauss_deriv(x, t, mu, 0).unwrap());
        prop_assert!((lq_norm(&f, 1.0).unwrap() - 1.0).abs() < 1e-10);
    }
}
