use disfom::geometry::{residual_inf, DenseVector, FeasibleRegion};
use proptest::prelude::*;

fn boxed(lower: &[f64], upper: &[f64]) -> FeasibleRegion<f64> {
    FeasibleRegion::boxed(DenseVector::from_slice(lower).unwrap(), DenseVector::from_slice(upper).unwrap()).unwrap()
}

/// Box data with each coordinate of `x` placed at the lower bound, the upper bound, or inside.
fn box_point() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..12).prop_flat_map(|d| {
        (
            prop::collection::vec(-5.0..5.0f64, d),
            prop::collection::vec(0.1..4.0f64, d),
            prop::collection::vec((0u8..3, 0.05..0.95f64), d),
            prop::collection::vec(-10.0..10.0f64, d),
        )
            .prop_map(|(lower, width, place, grad)| {
                let upper: Vec<f64> = lower.iter().zip(&width).map(|(l, w)| l + w).collect();
                let x = (0..lower.len())
                    .map(|i| match place[i].0 {
                        0 => lower[i],
                        1 => upper[i],
                        _ => lower[i] + place[i].1 * width[i],
                    })
                    .collect();
                (lower, upper, x, grad)
            })
    })
}

/// `min |g + t|` over `t` in the normal cone of `[l, u]` at `x`, by successively refined grids.
fn brute_force_coordinate(x: f64, g: f64, l: f64, u: f64) -> f64 {
    let (mut lo, mut hi) = match (x == l, x == u) {
        (true, _) => (-100.0, 0.0),
        (_, true) => (0.0, 100.0),
        _ => return g.abs(),
    };
    let mut best = f64::INFINITY;
    let mut arg = lo;
    for _ in 0..60 {
        let n = 40;
        let h = (hi - lo) / n as f64;
        for k in 0..=n {
            let t = lo + h * k as f64;
            let val = (g + t).abs();
            if val < best {
                best = val;
                arg = t;
            }
        }
        lo = (arg - h).max(lo);
        hi = (arg + h).min(hi);
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn unconstrained_residual_is_sup_norm(grad in prop::collection::vec(-1e3..1e3f64, 1..20)) {
        let x = vec![0.0; grad.len()];
        let r = residual_inf(&x, &grad, &FeasibleRegion::Unconstrained, 1e-10).unwrap();
        let sup = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        prop_assert_eq!(r.residual_inf, sup);
        prop_assert!(r.active_set.is_empty());
    }

    #[test]
    fn residual_is_one_lipschitz_in_gradient(
        (lower, upper, x, g1) in box_point(),
        shift in prop::collection::vec(-3.0..3.0f64, 12),
    ) {
        let region = boxed(&lower, &upper);
        let g2: Vec<f64> = g1.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let r1 = residual_inf(&x, &g1, &region, 1e-10).unwrap().residual_inf;
        let r2 = residual_inf(&x, &g2, &region, 1e-10).unwrap().residual_inf;
        let dist = g1.iter().zip(&g2).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!((r1 - r2).abs() <= dist + 1e-12);
    }

    #[test]
    fn interior_point_matches_unconstrained(
        (lower, upper, _x, grad) in box_point(),
        frac in prop::collection::vec(0.05..0.95f64, 12),
    ) {
        let x: Vec<f64> = (0..lower.len()).map(|i| lower[i] + frac[i] * (upper[i] - lower[i])).collect();
        let boxed_r = residual_inf(&x, &grad, &boxed(&lower, &upper), 1e-10).unwrap();
        let free_r = residual_inf(&x, &grad, &FeasibleRegion::Unconstrained, 1e-10).unwrap();
        prop_assert_eq!(boxed_r.residual_inf, free_r.residual_inf);
        prop_assert!(boxed_r.active_set.is_empty());
    }

    #[test]
    fn residual_matches_brute_force_normal_cone((lower, upper, x, grad) in box_point()) {
        let r = residual_inf(&x, &grad, &boxed(&lower, &upper), 1e-10).unwrap();
        let brute = (0..x.len())
            .map(|i| brute_force_coordinate(x[i], grad[i], lower[i], upper[i]))
            .fold(0.0f64, f64::max);
        prop_assert!((r.residual_inf - brute).abs() <= 1e-12, "{} vs {}", r.residual_inf, brute);
        let max_part = r.per_coordinate.as_slice().iter().fold(0.0f64, |m, p| m.max(*p));
        prop_assert_eq!(max_part, r.residual_inf);
        for i in 0..x.len() {
            let at_bound = x[i] == lower[i] || x[i] == upper[i];
            prop_assert_eq!(r.active_set.contains(&i), at_bound);
        }
    }
}
