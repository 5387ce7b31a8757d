use grassmann_core::dpp::{dpp_pmf, marginals_from_pmf, CountVector};
use grassmann_core::graphcut::{cut_space_basis, kirchhoff_projection, spanning_forests, OrientedGraph};
use grassmann_core::io::{matrix_from_json, matrix_to_json, subset_map_from_json, subset_map_to_json};
use grassmann_core::likelihood::{
    local_ascent, model_pmf, reparam_forward, ChartPoint, FitConfig, Model, Objective, Parametrization,
};
use grassmann_core::moment::moment_map;
use grassmann_core::numkit::symmetric_spectrum;
use grassmann_core::plucker::{plucker_from_basis, raw_minors};
use grassmann_core::projector::{basis_from_projection, idempotency_defect, projection_from_basis};
use grassmann_core::{Basis, Matrix, Rational, Scalar, SubsetMap, Tolerance};
use num_traits::Zero;
use proptest::prelude::*;

type Q = Rational;

fn int_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<Q>> {
    prop::collection::vec(-4i64..=4, rows * cols)
        .prop_map(move |v| Matrix::new(rows, cols, v.into_iter().map(Q::from_i64).collect()).unwrap())
}

/// Full-rank integer bases with `d <= 3 < n <= 6`.
fn basis() -> impl Strategy<Value = Basis<Q>> {
    (1usize..=3, 4usize..=6)
        .prop_flat_map(|(d, n)| int_matrix(d, n))
        .prop_filter_map("rank deficient", |m| Basis::new(m).ok())
}

fn square(max: usize) -> impl Strategy<Value = (Matrix<Q>, Matrix<Q>)> {
    (1..=max).prop_flat_map(|k| (int_matrix(k, k), int_matrix(k, k)))
}

/// Random oriented graph: a spanning tree plus up to four extra edges.
fn graph() -> impl Strategy<Value = OrientedGraph> {
    (2usize..=5).prop_flat_map(|v| {
        let tree = (1..v).map(|w| (0..w, any::<bool>()).prop_map(move |(t, flip)| (t, w, flip))).collect::<Vec<_>>();
        let extra = prop::collection::vec((0..v, 0..v), 0..=4);
        (Just(v), tree, extra).prop_map(|(v, tree, extra)| {
            let mut edges: Vec<(usize, usize)> =
                tree.into_iter().map(|(t, h, flip)| if flip { (h, t) } else { (t, h) }).collect();
            edges.extend(extra.into_iter().filter(|(a, b)| a != b));
            OrientedGraph::new(v, edges).unwrap()
        })
    })
}

fn chart(d: usize, n: usize) -> impl Strategy<Value = ChartPoint> {
    let signs = prop::collection::vec(any::<bool>(), d * (n - d));
    let mags = prop::collection::vec(0.2f64..2.0, d * (n - d));
    (signs, mags).prop_map(move |(s, m)| {
        let v = s.iter().zip(&m).map(|(&neg, &x)| if neg { -x } else { x }).collect();
        ChartPoint::new(Matrix::new(d, n - d, v).unwrap()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cauchy_binet(a in basis()) {
        let gram = a.matrix().matmul(&a.matrix().transpose()).unwrap();
        prop_assert_eq!(gram.det().unwrap(), raw_minors(a.matrix()).sum_of_squares());
    }

    #[test]
    fn det_is_multiplicative((a, b) in square(4)) {
        let ab = a.matmul(&b).unwrap();
        prop_assert_eq!(ab.det().unwrap(), a.det().unwrap() * b.det().unwrap());
    }

    #[test]
    fn float_det_tracks_exact_det((a, _) in square(5)) {
        let exact = a.det().unwrap().to_f64();
        let float = a.to_f64().det().unwrap();
        prop_assert!((exact - float).abs() <= 1e-9 * exact.abs().max(1.0));
    }

    #[test]
    fn row_operations_fix_the_subspace(a in basis(), g in int_matrix(3, 3)) {
        let d = a.d();
        let g = g.submatrix(&(0..d).collect::<Vec<_>>(), &(0..d).collect::<Vec<_>>()).unwrap();
        prop_assume!(!g.det().unwrap().is_zero());
        let b = Basis::new(g.matmul(a.matrix()).unwrap()).unwrap();
        let tol = Tolerance::default();
        prop_assert!(plucker_from_basis(&a).projectively_eq(&plucker_from_basis(&b), &tol));
        prop_assert_eq!(projection_from_basis(&a).unwrap(), projection_from_basis(&b).unwrap());
    }

    #[test]
    fn projection_round_trip(a in basis()) {
        let p = projection_from_basis(&a).unwrap();
        let back = projection_from_basis(&basis_from_projection(&p).unwrap()).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert!(idempotency_defect(p.matrix()).unwrap().is_zero());
        prop_assert_eq!(p.matrix().trace(), Q::from_i64(a.d() as i64));
    }

    #[test]
    fn principal_minors_are_normalized_squares(a in basis()) {
        let x = plucker_from_basis(&a);
        let p = projection_from_basis(&a).unwrap();
        let total = x.sum_of_squares();
        for (s, v) in x.coords().iter() {
            prop_assert_eq!(p.matrix().principal_minor(s.elems()).unwrap(), v.clone() * v.clone() / total.clone());
        }
    }

    #[test]
    fn float_spectrum_is_zero_one(a in basis()) {
        let p = projection_from_basis(&Basis::new(a.matrix().to_f64()).unwrap()).unwrap();
        let ones = symmetric_spectrum(p.matrix()).iter().filter(|&&e| (e - 1.0).abs() < 1e-9).count();
        let all_binary = symmetric_spectrum(p.matrix()).iter().all(|&e| e.abs() < 1e-9 || (e - 1.0).abs() < 1e-9);
        prop_assert!(all_binary);
        prop_assert_eq!(ones, a.d());
    }

    #[test]
    fn moment_coordinates_are_dpp_marginals(a in basis()) {
        let x = plucker_from_basis(&a);
        let z = moment_map(&x).unwrap();
        let mu = dpp_pmf(&projection_from_basis(&a).unwrap()).unwrap();
        let marg = marginals_from_pmf(&mu);
        prop_assert_eq!(z.coords(), marg.as_slice());
        let sum = z.coords().iter().fold(Q::zero(), |s, v| s + v.clone());
        prop_assert_eq!(sum, Q::from_i64(a.d() as i64));
    }

    #[test]
    fn kirchhoff_matches_linear_algebra(g in graph()) {
        let linear = projection_from_basis(&cut_space_basis::<Q>(&g).unwrap()).unwrap();
        prop_assert_eq!(kirchhoff_projection(&g).unwrap(), linear);
    }

    #[test]
    fn plucker_support_is_the_spanning_forests(g in graph()) {
        let x = plucker_from_basis(&cut_space_basis::<Q>(&g).unwrap());
        let support: Vec<Vec<usize>> =
            x.coords().iter().filter(|(_, v)| !v.is_zero()).map(|(s, _)| s.elems().to_vec()).collect();
        prop_assert_eq!(support, spanning_forests(&g));
        // cut-space minors are unimodular
        prop_assert!(x.values().iter().all(|v| v.is_zero() || *v == Q::from_i64(1) || *v == Q::from_i64(-1)));
    }

    #[test]
    fn json_round_trips(a in basis()) {
        let x = plucker_from_basis(&a);
        let back: SubsetMap<Q> = subset_map_from_json(&subset_map_to_json(x.coords())).unwrap();
        prop_assert_eq!(&back, x.coords());
        let p = projection_from_basis(&a).unwrap();
        let m: Matrix<Q> = matrix_from_json(&matrix_to_json(p.matrix())).unwrap();
        prop_assert_eq!(&m, p.matrix());
        let f = p.matrix().to_f64();
        let mf: Matrix<f64> = matrix_from_json(&matrix_to_json(&f)).unwrap();
        prop_assert_eq!(mf, f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sign_flips_only_touch_signs(y in chart(2, 4), i in 0usize..2, j in 0usize..2) {
        let base = model_pmf(&y, Model::Squared).unwrap();
        // flipping one row and one column leaves the pmf alone
        let same = model_pmf(&y.flip(1 << i, 1 << j), Model::Squared).unwrap();
        for (a, b) in base.values().iter().zip(same.values()) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
        // rescaling a single entry does not
        let mut m = y.matrix().clone();
        m[(i, j)] *= 1.5;
        let moved = model_pmf(&ChartPoint::new(m).unwrap(), Model::Squared).unwrap();
        let gap: f64 = base.values().iter().zip(moved.values()).map(|(a, b)| (a - b).abs()).sum();
        prop_assert!(gap > 1e-6);
    }

    #[test]
    fn ascent_never_loses_ground(y in chart(2, 5), counts in prop::collection::vec(1u64..50, 10)) {
        let u = CountVector::new(SubsetMap::new(2, 5, counts).unwrap()).unwrap();
        let (theta, signs) = reparam_forward(&y).to_log();
        let obj = Objective::new(&u, Model::Squared, Parametrization::squared(2, 5, &signs)).unwrap();
        let run = local_ascent(&obj, theta, &FitConfig::default());
        for w in run.history.windows(2) {
            let noise = 64.0 * f64::EPSILON * (1.0 + w[0].abs());
            prop_assert!(w[1] >= w[0] - noise, "{} then {}", w[0], w[1]);
        }
    }
}
