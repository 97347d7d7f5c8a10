use core::f64::consts::PI;

use proptest::prelude::*;
use sagnac_core::instrument::*;

fn config() -> impl Strategy<Value = InstrumentConfig> {
    (
        0.2f64..3.0,
        0.5f64..20.0,
        0.2f64..3.0,
        -89.0f64..89.0,
        5.0f64..80.0,
        0.5e6f64..5e6,
        any::<bool>(),
    )
        .prop_filter("latitude away from the equator", |t| t.3.abs() > 1.0)
        .prop_map(|(l1, l2, l3, lat, theta, rf, positive)| InstrumentConfig {
            l1_m: l1,
            l2_m: l2,
            l3_m: l3,
            latitude_rad: lat.to_radians(),
            theta_rad: theta.to_radians(),
            b0_tesla: None,
            rf_hz: Some(rf),
            c_se_um_per_ang2: None,
            orientation: if positive { Orientation::Positive } else { Orientation::Negative },
            ..InstrumentConfig::nominal()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn phase_routes_agree(cfg in config(), lambda in 0.1f64..100.0) {
        let (oam, area) = sagnac_phase_routes(&cfg, lambda).unwrap();
        prop_assert!((oam - area).abs() <= 1e-12 * oam.abs().max(area.abs()));
        prop_assert!(sagnac_phase(&cfg, lambda).is_ok());
    }

    #[test]
    fn coefficient_round_trip_is_geometry_free(cfg in config()) {
        let c_se_ang = spin_echo_constant(&cfg).unwrap() * 1e4;
        let c_oam = c_oam_from_a2(predict_a2(&cfg).unwrap(), &cfg).unwrap();
        prop_assert!((c_oam.abs() / (2.0 * PI * c_se_ang) - 1.0).abs() < 1e-12);
        let direct = c_oam_from_spin_echo_constant(&cfg).unwrap();
        prop_assert!((c_oam / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_is_linear_in_wavelength(cfg in config(), lambda in 0.1f64..30.0) {
        let c_se = spin_echo_constant(&cfg).unwrap();
        prop_assume!(c_se * lambda * lambda <= 1e4);
        let delta = spin_echo_length(&cfg, lambda).unwrap();
        let (plus, minus) = oam_eigenvalue(delta, lambda).unwrap();
        prop_assert_eq!(plus, -minus);
        prop_assert!((plus / lambda / (PI * c_se * 1e4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_units_are_rejected(lambda in prop_oneof![-10.0f64..0.0999, 100.001f64..1e4]) {
        let cfg = InstrumentConfig::nominal();
        prop_assert!(sagnac_phase_routes(&cfg, lambda).is_err());
        prop_assert!(oam_eigenvalue(1.0, lambda).is_err());
        prop_assert!(oam_eigenvalue(-1.0, 5.0).is_err());
        prop_assert!(oam_eigenvalue(1.0e4 + 1.0, 5.0).is_err());
    }
}
