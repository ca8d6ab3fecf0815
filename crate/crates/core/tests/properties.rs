use isoflow_core::scheme::{chi, pressure_potential_second, UpwindFlux};
use isoflow_core::SchemeParams;
use proptest::prelude::*;

proptest! {
    #[test]
    fn upwind_forms_agree(r_in in 0.0..10.0f64, r_out in 0.0..10.0f64, z in -3.0..3.0f64, ha in 1e-3..1.0f64) {
        let f = UpwindFlux::new(r_in, r_out, z * ha, ha);
        prop_assert!((f.first_form() - f.value()).abs() <= 1e-13 * (1.0 + r_in + r_out));
    }

    #[test]
    fn reversing_the_face_negates_the_flux(r_in in 0.0..10.0f64, r_out in 0.0..10.0f64, un in -3.0..3.0f64, ha in 1e-3..1.0f64) {
        let forward = UpwindFlux::new(r_in, r_out, un, ha).value();
        let backward = UpwindFlux::new(r_out, r_in, -un, ha).value();
        prop_assert!((forward + backward).abs() <= 1e-13 * (1.0 + r_in + r_out));
    }

    #[test]
    fn cutoff_is_even_and_bounded(z in -5.0..5.0f64) {
        prop_assert_eq!(chi(z), chi(-z));
        prop_assert!((0.0..=1.0).contains(&chi(z)));
    }

    #[test]
    fn pressure_growth_inequality(gamma in 1.01..1.99f64, a in 1e-3..10.0f64, b in 1e-3..10.0f64, s in 0.0..=1.0f64) {
        let params = SchemeParams::with_gamma(gamma);
        let (r1, r2) = (a.min(b), a.max(b));
        let z = r1 + s * (r2 - r1);
        let lhs = pressure_potential_second(z, &params).unwrap() * (r1 - r2).powi(2);
        let rhs = params.a * gamma * (r1.powf(gamma / 2.0) - r2.powf(gamma / 2.0)).powi(2);
        prop_assert!(lhs >= rhs * (1.0 - 1e-12));
    }
}
