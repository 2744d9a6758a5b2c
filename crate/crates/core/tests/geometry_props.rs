use aes_core::geometry::{circumscribed_check, inscribed_check, sat_check, CircleVerdict, Footprint, OrientedBox};
use aes_core::Pose;
use proptest::prelude::*;

/// Boundary-sampling oracle: two convex boxes overlap iff a boundary point
/// of one lies in the other, or one contains the other's centre.
fn sampled_overlap(a: &OrientedBox, b: &OrientedBox, step: f64) -> bool {
    let boundary_in = |p: &OrientedBox, q: &OrientedBox| {
        let c = p.corners();
        (0..4).any(|i| {
            let (s, e) = (c[i], c[(i + 1) % 4]);
            let n = ((e.0 - s.0).hypot(e.1 - s.1) / step).ceil().max(1.0) as usize;
            (0..=n).any(|k| {
                let f = k as f64 / n as f64;
                q.contains(s.0 + f * (e.0 - s.0), s.1 + f * (e.1 - s.1))
            })
        })
    };
    boundary_in(a, b) || boundary_in(b, a) || a.contains(b.cx, b.cy) || b.contains(a.cx, a.cy)
}

/// Largest axis separation; negative is the penetration depth.
fn axis_margin(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let d = (b.cx - a.cx, b.cy - a.cy);
    a.axes()
        .into_iter()
        .chain(b.axes())
        .map(|n| (d.0 * n.0 + d.1 * n.1).abs() - a.projected_radius(n) - b.projected_radius(n))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn boxes() -> impl Strategy<Value = (Pose, Footprint, Pose, Footprint)> {
    let fp = (0.2..5.0f64, 0.2..3.0f64).prop_map(|(l, w)| Footprint::new(l, w, 0.0).unwrap());
    let pose = (-4.0..4.0f64, -4.0..4.0f64, -3.2..3.2f64).prop_map(|(x, y, p)| Pose::new(x, y, p));
    (pose.clone(), fp.clone(), pose, fp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn sat_matches_oracle((pa, fa, pb, fb) in boxes()) {
        let (a, b) = (fa.obb(&pa), fb.obb(&pb));
        prop_assume!(axis_margin(&a, &b).abs() >= 0.01);
        prop_assert_eq!(sat_check(&pa, &fa, &pb, &fb), sampled_overlap(&a, &b, 0.0025));
    }

    #[test]
    fn sat_is_symmetric((pa, fa, pb, fb) in boxes()) {
        prop_assert_eq!(sat_check(&pa, &fa, &pb, &fb), sat_check(&pb, &fb, &pa, &fa));
    }

    #[test]
    fn circle_filters_are_sound((pa, fa, pb, fb) in boxes()) {
        let sat = sat_check(&pa, &fa, &pb, &fb);
        if circumscribed_check(&pa, &fa, &pb, &fb) == CircleVerdict::NoCollision {
            prop_assert!(!sat);
        }
        if inscribed_check(&pa, &fa, &pb, &fb) == CircleVerdict::Collision {
            prop_assert!(sat);
        }
    }

    #[test]
    fn rigid_motion_invariance((pa, fa, pb, fb) in boxes(), frame in (-10.0..10.0f64, -10.0..10.0f64, -3.0..3.0f64)) {
        let f = Pose::new(frame.0, frame.1, frame.2);
        let (qa, qb) = (f.compose(&pa), f.compose(&pb));
        let (a, b) = (fa.obb(&pa), fb.obb(&pb));
        prop_assume!(axis_margin(&a, &b).abs() >= 1e-6);
        prop_assert_eq!(sat_check(&pa, &fa, &pb, &fb), sat_check(&qa, &fa, &qb, &fb));
    }
}
