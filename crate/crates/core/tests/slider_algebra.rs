use proptest::prelude::*;
use slider_core::{Dimension, PoleLabels};

const TOL: f64 = 1e-6;

fn arb_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, f64, f64)> {
    (2usize..10).prop_flat_map(|d| {
        let v = || prop::collection::vec(-3.0f64..3.0, d);
        (v(), v(), v(), -3.0f64..3.0, -3.0f64..3.0)
    })
}

fn build(a: &[f64], b: &[f64]) -> Option<Dimension> {
    Dimension::from_centroids(a, b, PoleLabels::new("a", "b")).ok()
}

fn close(x: &[f64], y: &[f64]) -> bool {
    x.iter().zip(y).all(|(p, q)| (p - q).abs() < TOL)
}

proptest! {
    #[test]
    fn pole_swap_is_antisymmetric((a, b, anchor, t, _) in arb_case()) {
        let Some(dim) = build(&a, &b) else { return Ok(()) };
        let swapped = build(&b, &a).unwrap();
        let reswapped = dim.swapped();
        prop_assert_eq!(swapped.axis_unit(), reswapped.axis_unit());
        prop_assert_eq!(dim.coordinate(&anchor).unwrap(), -swapped.coordinate(&anchor).unwrap());
        let p = dim.place(&anchor, t).unwrap();
        let q = swapped.place(&anchor, -t).unwrap();
        prop_assert!(close(&p, &q), "{:?} vs {:?}", p, q);
    }

    #[test]
    fn probing_at_own_coordinate_is_identity((a, b, anchor, _, _) in arb_case()) {
        let Some(dim) = build(&a, &b) else { return Ok(()) };
        let own = dim.coordinate(&anchor).unwrap();
        prop_assert!(close(&dim.place(&anchor, own).unwrap(), &anchor));
    }

    #[test]
    fn probe_lands_on_requested_coordinate((a, b, anchor, t, _) in arb_case()) {
        let Some(dim) = build(&a, &b) else { return Ok(()) };
        let p = dim.place(&anchor, t).unwrap();
        prop_assert!((dim.coordinate(&p).unwrap() - t).abs() < TOL);
    }

    #[test]
    fn probe_moves_linearly_along_axis((a, b, anchor, t1, t2) in arb_case()) {
        let Some(dim) = build(&a, &b) else { return Ok(()) };
        let p1 = dim.place(&anchor, t1).unwrap();
        let p2 = dim.place(&anchor, t2).unwrap();
        let step: Vec<f64> = dim.axis_unit().iter().map(|u| (t2 - t1) * dim.half_span() * u).collect();
        let diff: Vec<f64> = p2.iter().zip(&p1).map(|(x, y)| x - y).collect();
        prop_assert!(close(&diff, &step));
    }

    #[test]
    fn orthogonal_part_is_preserved((a, b, anchor, t, _) in arb_case()) {
        let Some(dim) = build(&a, &b) else { return Ok(()) };
        let p = dim.place(&anchor, t).unwrap();
        let strip = |x: &[f64]| {
            let along: f64 = x.iter().zip(dim.axis_unit()).map(|(p, u)| p * u).sum();
            x.iter().zip(dim.axis_unit()).map(|(p, u)| p - along * u).collect::<Vec<_>>()
        };
        prop_assert!(close(&strip(&p), &strip(&anchor)));
    }

    #[test]
    fn construction_invariants((a, b, _, _, _) in arb_case()) {
        let Some(dim) = build(&a, &b) else { return Ok(()) };
        let n: f64 = dim.axis_unit().iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((n - 1.0).abs() < 1e-9);
        prop_assert!(dim.half_span() > 0.0);
        prop_assert!((dim.coordinate(&a).unwrap() + 1.0).abs() < 1e-9);
        prop_assert!((dim.coordinate(&b).unwrap() - 1.0).abs() < 1e-9);
    }
}
