//! Randomized properties of the exact layer, checked against num-bigint.

use num_bigint::BigInt;
use proptest::prelude::*;

use threecubes::arith::{icbrt_ceil, icbrt_floor};
use threecubes::geometry::Fix;
use threecubes::{canonicalize, cube_sum, mod9_admissible, Solution};

const LIMIT: i64 = 1_000_000_000_000_000_000;

fn big_cube_sum(x: i64, y: i64, z: i64) -> BigInt {
    [x, y, z].iter().map(|&v| BigInt::from(v).pow(3)).sum()
}

fn coord() -> impl Strategy<Value = i64> {
    prop_oneof![-LIMIT..=LIMIT, -1000i64..=1000, Just(LIMIT), Just(-LIMIT)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn cube_sum_matches_bigint(x in coord(), y in coord(), z in coord()) {
        let wide = cube_sum(x, y, z).unwrap();
        prop_assert_eq!(wide.to_string(), big_cube_sum(x, y, z).to_string());
    }

    #[test]
    fn canonical_form_is_invariant(x in coord(), y in coord(), z in coord(), perm in 0usize..6, neg: bool) {
        prop_assume!(big_cube_sum(x, y, z) != BigInt::from(0));
        let c = canonicalize(x, y, z).unwrap();
        let v = [x, y, z];
        let order = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]][perm];
        let s = if neg { -1 } else { 1 };
        let d = canonicalize(s * v[order[0]], s * v[order[1]], s * v[order[2]]).unwrap();
        prop_assert_eq!(&c, &d);
        prop_assert!(c.is_canonical());
        prop_assert!(c.x <= c.y && c.y <= c.z);
        prop_assert!(!c.k.is_negative());
    }

    #[test]
    fn admissibility_is_periodic(k in -1_000_000_000i64..1_000_000_000, m in -1000i64..1000) {
        let shifted = k + 9 * m;
        prop_assume!(k != 0 && shifted != 0);
        prop_assert_eq!(mod9_admissible(k), mod9_admissible(shifted));
        prop_assert_eq!(mod9_admissible(k), mod9_admissible(-k));
    }

    #[test]
    fn solution_text_round_trips(x in coord(), y in coord(), z in coord()) {
        prop_assume!(big_cube_sum(x, y, z) != BigInt::from(0));
        let s = canonicalize(x, y, z).unwrap();
        let back: Solution = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn integer_cube_roots_bracket(n in any::<i64>()) {
        let n = n as i128 * 1_000_003;
        let f = icbrt_floor(n);
        let c = icbrt_ceil(n);
        prop_assert!(f * f * f <= n && (f + 1) * (f + 1) * (f + 1) > n);
        prop_assert!(c * c * c >= n && (c - 1) * (c - 1) * (c - 1) < n);
    }

    #[test]
    fn fixed_point_decimal_round_trips(v in 0.0f64..1.0) {
        let f = Fix::from_f64_floor(v);
        prop_assert_eq!(Fix::parse_decimal(&f.to_decimal()).unwrap(), f);
    }
}
