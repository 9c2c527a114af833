use azmorse::verify::{builtin_scenarios, run_scenario};

#[test]
fn every_builtin_scenario_passes() {
    let mut failures = Vec::new();
    for s in builtin_scenarios().unwrap() {
        let r = run_scenario(&s, 1);
        if !r.passed() {
            failures.push(format!("{}: {:?} {:?}", r.name, r.error, r.checks));
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn nontrivial_verdicts_carry_a_verified_witness() {
    use azmorse::az::{run_az_check, Verdict, NONTRIVIAL_SUP};
    use azmorse::discretization::residual_norm;
    for s in builtin_scenarios().unwrap().into_iter().filter_map(|s| s.config) {
        let r = run_az_check(&s).unwrap();
        if r.verdict != Verdict::NontrivialFound {
            continue;
        }
        let w = r.witness().expect("witness");
        let spec = s.energy_spec().unwrap();
        assert!(w.record.sup_norm() > NONTRIVIAL_SUP);
        assert!(residual_norm(&spec, &w.record.field) <= s.tol_residual);
        assert!(w.shooting_distance.is_some_and(|d| d <= 1e-3));
    }
}
