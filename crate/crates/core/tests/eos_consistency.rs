//! Finite-difference checks of the first-law relations of both equations of state.

use kinclosure::radhydro::{EquationOfState, Species};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn inverse_temperature_is_the_entropy_derivative(
        gamma in 1.05f64..3.0, c_v in 0.2f64..5.0, a in 0.1f64..10.0,
        rho in 0.1f64..10.0, e in 0.1f64..10.0,
    ) {
        let eos = EquationOfState::new(gamma, c_v, a).unwrap();
        for (sp, t) in [
            (Species::Electron, eos.electron_temperature(rho, e)),
            (Species::Radiation, eos.radiation_temperature(e)),
        ] {
            let h = 1e-5 * e;
            let fd = (eos.entropy_density(sp, rho, e + h) - eos.entropy_density(sp, rho, e - h)) / (2.0 * h);
            prop_assert!((fd * t - 1.0).abs() < 1e-8, "{sp:?}: {fd} vs {}", 1.0 / t);
        }
    }

    #[test]
    fn pressure_formula_matches_internal_energy_derivative(
        gamma in 1.05f64..3.0, c_v in 0.2f64..5.0, a in 0.1f64..10.0,
        rho in 0.1f64..10.0, e in 0.1f64..10.0,
    ) {
        let eos = EquationOfState::new(gamma, c_v, a).unwrap();
        for sp in [Species::Electron, Species::Radiation] {
            let s = eos.entropy_density(sp, rho, e) / rho;
            let h = 1e-5 * rho;
            let du = (eos.specific_internal_energy(sp, rho + h, s) - eos.specific_internal_energy(sp, rho - h, s))
                / (2.0 * h);
            let fd = rho * rho * du;
            let p = eos.pressure(sp, rho, e);
            prop_assert!((fd - p).abs() < 1e-8 * p.abs().max(1.0), "{sp:?}: {fd} vs {p}");
        }
        prop_assert!((eos.pressure(Species::Electron, rho, e) - (gamma - 1.0) * e).abs() < 1e-12 * e);
        prop_assert!((eos.pressure(Species::Radiation, rho, e) - e / 3.0).abs() < 1e-12 * e);
    }
}
