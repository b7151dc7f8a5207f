use relent_core::{
    iterate, partial_trace, quantum_relative_entropy, random_pure, von_neumann_entropy,
    werner_reference_entanglement, werner_state, witness_from_result, DensityMatrix, Dims,
    IterationConfig, Subsystem, Termination, Verdict, WernerParameter,
};

fn single_start() -> IterationConfig {
    IterationConfig {
        starts: 1,
        ..IterationConfig::default()
    }
}

#[test]
fn werner_closest_state_is_the_boundary_werner_state() {
    let f = -0.6;
    let sigma = werner_state(WernerParameter::new(3, f).unwrap());
    let res = iterate(&sigma, &single_start()).unwrap();
    assert_eq!(res.termination, Termination::Converged);
    let boundary = werner_state(WernerParameter::new(3, 0.0).unwrap());
    let diff = res.closest_separable.matrix() - boundary.matrix();
    assert!(diff.frobenius_norm() < 1e-5);
    let direct = quantum_relative_entropy(&sigma, &boundary).unwrap();
    assert!((res.entanglement - direct).abs() < 1e-10);
    let closed_form = werner_reference_entanglement(WernerParameter::new(3, f).unwrap());
    assert!((res.entanglement - closed_form).abs() < 1e-10);
}

#[test]
fn werner_witness_is_a_multiple_of_the_flip() {
    // for commuting σ and ρ* = ρ_w(0), A = σ ρ*⁻¹ and W = −f(1 − 2P_anti) = −f F
    let (d, f) = (3, -0.4);
    let sigma = werner_state(WernerParameter::new(d, f).unwrap());
    let res = iterate(&sigma, &single_start()).unwrap();
    let w = witness_from_result(&res);
    let flip = relent_core::flip_operator(d);
    let expected = flip.scale(-f);
    assert!((w.matrix() - &expected).frobenius_norm() < 1e-5);
    assert!((w.expectation(&sigma) + f * f).abs() < 1e-5);
}

#[test]
fn pure_state_entanglement_is_reduced_entropy() {
    let dims = Dims::new(2, 3);
    let sigma = random_pure(dims, 17).unwrap();
    let reduced = partial_trace(sigma.matrix(), dims, Subsystem::First).unwrap();
    let reduced = DensityMatrix::new(reduced, Dims::new(1, 2)).unwrap();
    let oracle = von_neumann_entropy(&reduced).unwrap();
    let res = iterate(&sigma, &IterationConfig::default()).unwrap();
    assert_eq!(res.verdict, Verdict::Entangled);
    assert!(
        (res.entanglement - oracle).abs() < 1e-4,
        "{} vs {oracle}",
        res.entanglement
    );
}
