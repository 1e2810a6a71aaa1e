//! Public oracle entry points against values computed independently from
//! the integral definitions at 30 digits.

use bridgelab_core::ou::{j_integral, ou_cov_with_process, ou_deviation_law, ou_expected_quad_dev, t_star};
use bridgelab_core::scalar_gauss::{folded_mean, std_normal_cdf};
use bridgelab_core::wiener::{cond_deviation_law, deviation_law, expected_quad_dev};
use bridgelab_core::{BridgeKind, BridgeSpec, GaussianMoment, ProcessParams, TimeChange};
use proptest::prelude::*;

fn tc(q: f64, sigma: f64, horizon: f64) -> TimeChange {
    TimeChange::new(ProcessParams::new(q, sigma).unwrap(), horizon).unwrap()
}

fn close(x: f64, want: f64, rel: f64) {
    assert!((x - want).abs() <= rel * want.abs(), "{x} vs {want}");
}

#[test]
fn gaussian_helpers() {
    close(std_normal_cdf(1.3).unwrap(), 0.903199515414389666847990175698, 1e-15);
    close(folded_mean(GaussianMoment::new(0.7, 2.0).unwrap()).unwrap(), 1.26385114963822692326924790294, 1e-14);
}

#[test]
fn wiener_conditional_law() {
    let m = cond_deviation_law(BridgeKind::Ir, 0.3, 1.0, -0.5, 2.0).unwrap();
    close(m.mean, -0.155929454963445661896082192735, 1e-14);
    close(m.variance, 0.00215437221825705200343924020024, 1e-12);
}

#[test]
fn wiener_unconditional_values() {
    let s = BridgeSpec::new(0.0, 0.0, 1.0).unwrap();
    assert_eq!(expected_quad_dev(BridgeKind::Ir, &s), 1.0 / 6.0);
    assert_eq!(expected_quad_dev(BridgeKind::Av, &s), 1.0 / 3.0);
    let m = deviation_law(BridgeKind::St, 0.5, &s).unwrap();
    assert_eq!((m.mean, m.variance), (0.0, 0.25));
}

#[test]
fn ou_integrated_deviations() {
    close(ou_expected_quad_dev(BridgeKind::Ir, 0.8, &tc(0.7, 1.3, 1.5)).unwrap(), 2.91260455978028009290922495651, 1e-12);
    close(ou_expected_quad_dev(BridgeKind::Ir, 0.5, &tc(-1.2, 0.9, 1.0)).unwrap(), 0.100644236982149965431928311068, 1e-12);
    close(ou_expected_quad_dev(BridgeKind::Av, 0.8, &tc(0.7, 1.3, 1.5)).unwrap(), 4.05611737857605414296838371202, 1e-13);
}

#[test]
fn ou_scalars() {
    close(j_integral(2.5).unwrap(), 2.42887498100013666936273844427, 1e-13);
    close(t_star(&tc(-1.5, 1.0, 2.0)), 0.644412797306670145884820986982, 1e-14);
    close(t_star(&tc(1e-8, 1.0, 1.0)), 0.5, 1e-7);
    close(ou_cov_with_process(BridgeKind::Ir, 0.4, &tc(1.5, 0.8, 1.0)).unwrap(), 0.23676350674314969137750640895, 1e-13);
}

proptest! {
    #[test]
    fn deviation_variances_are_nonnegative(
        k in 0usize..3, u in 0.0f64..0.999, q in prop_oneof![-4.0f64..-1e-3, 1e-3f64..4.0], sigma in 0.1f64..3.0,
    ) {
        let kind = BridgeKind::ALL[k];
        let m = ou_deviation_law(kind, u * 2.0, 1.0, &tc(q, sigma, 2.0)).unwrap();
        prop_assert!(m.variance >= 0.0 && m.variance.is_finite());
        let w = deviation_law(kind, u * 2.0, &BridgeSpec::new(0.0, 1.0, 2.0).unwrap()).unwrap();
        prop_assert!(w.variance >= 0.0);
    }
}
