use proptest::prelude::*;

use nlbvp_cli::scenario::{
    BoundaryKind, BoundarySpec, FamilyKind, MatrixSpec, MethodSpec, MultiMapSpec, PiecewiseSpec, SideSpec, SolverSpec,
    StrategyKind, TermSpec, VectorSpec,
};
use nlbvp_cli::ProblemSpec;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, Just(0.0), Just(-1.0), Just(1e-300), Just(1.5e300)]
}

fn matrix(n: usize) -> impl Strategy<Value = MatrixSpec> {
    prop_oneof![
        finite().prop_map(MatrixSpec::Scalar),
        prop::collection::vec(prop::collection::vec(finite(), n), n).prop_map(MatrixSpec::Rows),
    ]
}

fn vector(n: usize) -> impl Strategy<Value = VectorSpec> {
    prop_oneof![
        finite().prop_map(VectorSpec::Scalar),
        prop::collection::vec(finite(), n).prop_map(VectorSpec::Components)
    ]
}

fn problem() -> impl Strategy<Value = ProblemSpec> {
    (1usize..4).prop_flat_map(|n| {
        let map = (
            matrix(n),
            prop::option::of(vector(n)),
            prop::option::of(0.0..5.0f64),
            prop::collection::vec(0.01..0.99f64, 0..3),
        )
            .prop_map(|(a, b, rho, breaks)| {
                let rho = rho.map(|r| {
                    if breaks.is_empty() {
                        PiecewiseSpec::Constant(r)
                    } else {
                        let mut breaks = breaks.clone();
                        breaks.sort_by(f64::total_cmp);
                        let values = (0..=breaks.len()).map(|i| r * i as f64).collect();
                        PiecewiseSpec::Pieces { breaks, values }
                    }
                });
                MultiMapSpec {
                    family: FamilyKind::LinearBall,
                    a: Some(a),
                    b: b.map(PiecewiseSpec::Constant),
                    rho,
                    pairs: None,
                    k: None,
                }
            });
        let boundary =
            (prop::collection::vec((matrix(n), 0.0..1.0f64), 1..3), prop::option::of(vector(n)), any::<bool>())
                .prop_map(|(terms, offset, terminal)| BoundarySpec {
                    kind: BoundaryKind::AffineEval,
                    side: if terminal { SideSpec::Terminal } else { SideSpec::Initial },
                    coeffs: None,
                    times: None,
                    h: None,
                    matrix: None,
                    scale: None,
                    terms: Some(terms.into_iter().map(|(matrix, time)| TermSpec { matrix, time }).collect()),
                    offset,
                });
        let solver = (any::<u64>(), 1usize..100_000, 1e-12..1.0f64, prop::option::of(vector(n)), 0usize..3).prop_map(
            |(seed, grid_n, tol_bc, initial_guess, m)| SolverSpec {
                method: [MethodSpec::FixedPoint, MethodSpec::Shooting, MethodSpec::Continuation][m],
                seed,
                grid_n,
                tol_bc,
                initial_guess,
                strategy: StrategyKind::Random,
                ..SolverSpec::default()
            },
        );
        (Just(n), 0.1..100.0f64, map, boundary, solver).prop_map(|(n, horizon, multimap, boundary, solver)| {
            ProblemSpec {
                dimension: n,
                horizon,
                multimap,
                potential: None,
                boundary,
                solver,
                degree: None,
                bounds: None,
                output: None,
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parse_serialize_parse_is_identity(spec in problem()) {
        let text = spec.to_toml();
        let again = ProblemSpec::parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&again, &spec);
        prop_assert_eq!(again.to_toml(), text);
    }
}
