use proptest::prelude::*;

use sbls::feasible::is_feasible;
use sbls::likeproj::{like_project, like_project_oracle, same_point_set, tail_distance_sq};
use sbls::stationarity::{classify, Tolerance};
use sbls::tensor::{Instance, Point, Tensor3};

/// Small integers make ties and zero blocks common.
fn small_point(m: usize, n: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-3i32..=3, m + n)
        .prop_map(move |v| Point::from_concat(v.into_iter().map(f64::from).collect(), m).unwrap())
}

fn feasible_point(m: usize, n: usize, s: usize, t: usize) -> impl Strategy<Value = Point> {
    (
        prop::sample::subsequence((0..m).collect::<Vec<_>>(), 1..=s),
        prop::sample::subsequence((0..n).collect::<Vec<_>>(), 0..=t),
        prop::collection::vec(-2.0f64..2.0, m + n),
    )
        .prop_map(move |(s1, s2, vals)| {
            let mut z = Point::zeros(m, n);
            for (c, &i) in s1.iter().enumerate() {
                z.x_mut()[i] = if c == 0 { 1.0 } else { vals[i] };
            }
            for &j in &s2 {
                z.y_mut()[j] = vals[m + j];
            }
            z
        })
}

fn instance(l: usize, m: usize, n: usize, s: usize, t: usize) -> impl Strategy<Value = Instance> {
    (
        prop::collection::vec(-2i32..=2, l * m * n),
        prop::collection::vec(-3.0f64..3.0, l),
    )
        .prop_map(move |(a, b)| {
            let tensor = Tensor3::from_dense(l, m, n, a.into_iter().map(f64::from).collect()).unwrap();
            Instance::new(tensor, b, s, t).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_agrees_with_exhaustive_search(z in small_point(4, 4), s in 1usize..4, t in 1usize..4) {
        let fast = like_project(&z, s, t);
        let slow = like_project_oracle(&z, s, t).unwrap();
        prop_assert!(same_point_set(&fast.minimizers, &slow.minimizers, 1e-12));
        prop_assert!((fast.distance_sq - tail_distance_sq(&z, s, t)).abs() <= 1e-12);
        prop_assert_eq!(fast.count, fast.minimizers.len() as u128);
        for u in &fast.minimizers {
            prop_assert!(is_feasible(u, s, t, 0.0));
        }
    }

    #[test]
    fn feasible_points_are_projection_fixed_points(z in feasible_point(5, 4, 2, 3)) {
        let r = like_project(&z, 2, 3);
        prop_assert!(r.minimizers.iter().any(|u| u == &z));
        prop_assert!(r.distance_sq.abs() <= 1e-12);
    }

    #[test]
    fn classification_respects_the_lattice(
        inst in instance(3, 4, 4, 2, 2),
        z in feasible_point(4, 4, 2, 2),
        l in 0.1f64..50.0,
    ) {
        let tol = Tolerance::at(&inst, &z).unwrap();
        // classify returns an error if any implication between the notions fails.
        let r = classify(&inst, &z, l, &tol).unwrap();
        let [nb, tb, nc, tc, _, _, m] = r.flags();
        prop_assert_eq!(nb, tb);
        prop_assert_eq!(nc, tc);
        prop_assert_eq!(nc, m);
    }
}
