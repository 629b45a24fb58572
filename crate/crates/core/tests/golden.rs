mod support;

#[test]
fn chained_rosenbrock_reaches_all_ones() {
    support::check_golden_rosenbrock().unwrap();
}

#[test]
fn linearly_constrained_quadratic() {
    support::check_golden_qp().unwrap();
}

#[test]
fn nonlinearly_constrained_problem() {
    support::check_golden_nonlinear().unwrap();
}
