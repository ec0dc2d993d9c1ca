mod common;

use bdagar::precision::PrecisionKind;

#[test]
fn dagar_conditionals_match_joint_posterior() {
    let d = common::consistency::check(PrecisionKind::Dagar, 5, 17);
    assert_eq!(d.checks, 5 * 12);
    assert!(d.conjugate < 1e-6, "{d:?}");
    assert!(d.rho < 1e-10, "{d:?}");
}

#[test]
fn car_conditionals_match_joint_posterior() {
    let d = common::consistency::check(PrecisionKind::Car, 5, 4);
    assert!(d.conjugate < 1e-6, "{d:?}");
    assert!(d.rho < 1e-10, "{d:?}");
}
