//! Property suites over the geometry, gate, metrics and statistics
//! invariants.

use glottisgate_core::backends::Detection;
use glottisgate_core::gate::{GateConfig, GateState, GateStatus, Hold, gate_step};
use glottisgate_core::metrics::{dsc, iou, regate};
use glottisgate_core::stats::{fisher_exact_2x2, mann_whitney_u};
use glottisgate_core::{
    BBox, BinaryMask, ConfusionCounts, Frame, confusion_counts, crop_resize, letterbox_frame,
    letterbox_mask, mask_to_bbox, paste_back, restrict_mask,
};
use proptest::prelude::*;

fn arb_mask(max_w: u32, max_h: u32) -> impl Strategy<Value = BinaryMask> {
    (1..=max_w, 1..=max_h).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<bool>(), (w * h) as usize)
            .prop_map(move |bits| BinaryMask::new(w, h, bits).unwrap())
    })
}

proptest! {
    #[test]
    fn letterbox_round_trip_and_no_crop(
        w in 1u32..640,
        h in 1u32..640,
        target in 16u32..512,
        px in 0.0f64..1.0,
        py in 0.0f64..1.0,
    ) {
        let frame = Frame::filled(w, h, 100).unwrap();
        let (out, t) = letterbox_frame(&frame, target).unwrap();
        prop_assert_eq!(out.dims(), (target, target));
        // Round trip of an in-bounds point.
        let p = (px * w as f64, py * h as f64);
        let q = t.invert(t.apply(p));
        prop_assert!((q.0 - p.0).abs() < 0.5 && (q.1 - p.1).abs() < 0.5);
        // The scaled content rectangle stays inside the canvas.
        let (cx1, cy1) = t.apply((w as f64, h as f64));
        prop_assert!(cx1 <= target as f64 + 0.5 && cy1 <= target as f64 + 0.5);

        // The identical transform applies to masks.
        let mask = BinaryMask::from_fn(w, h, |_, _| true).unwrap();
        let (_, tm) = letterbox_mask(&mask, target).unwrap();
        prop_assert_eq!(t, tm);
    }

    #[test]
    fn restrict_with_own_bbox_is_identity(mask in arb_mask(48, 48)) {
        if let Some(b) = mask_to_bbox(&mask) {
            prop_assert_eq!(restrict_mask(&mask, &b), mask);
        }
    }

    #[test]
    fn restrict_idempotent_and_monotone(mask in arb_mask(32, 32)) {
        let b = BBox::new(4, 4, 20, 20).unwrap();
        let once = restrict_mask(&mask, &b);
        let twice = restrict_mask(&once, &b);
        prop_assert_eq!(&once, &twice);
        for (i, (&o, &m)) in once.bits().iter().zip(mask.bits()).enumerate() {
            prop_assert!(!o || m, "bit {i} appeared out of nowhere");
        }
    }

    #[test]
    fn confusion_symmetry_and_total(a in arb_mask(24, 24)) {
        let b = BinaryMask::from_fn(a.width(), a.height(), |x, y| (x * 31 + y * 17) % 5 < 2).unwrap();
        let ab = confusion_counts(&a, &b).unwrap();
        let ba = confusion_counts(&b, &a).unwrap();
        prop_assert_eq!(ab.true_pos, ba.true_pos);
        prop_assert_eq!(ab.true_neg, ba.true_neg);
        prop_assert_eq!(ab.false_pos, ba.false_neg);
        prop_assert_eq!(ab.false_neg, ba.false_pos);
        prop_assert_eq!(ab.total(), a.width() as u64 * a.height() as u64);
    }

    #[test]
    fn dsc_dominates_iou(tp in 0u64..500, fp in 0u64..500, fn_ in 0u64..500) {
        let c = ConfusionCounts { true_pos: tp, false_pos: fp, false_neg: fn_, true_neg: 10 };
        let d = dsc(&c);
        let i = iou(&c);
        prop_assert!(d >= i - 1e-15);
        if (d - i).abs() < 1e-15 {
            prop_assert!(d < 1e-15 || (d - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gate_matches_window_sum_oracle(dets in proptest::collection::vec(any::<bool>(), 1..60)) {
        let cfg = GateConfig::default();
        let mask = BinaryMask::from_fn(8, 8, |_, _| true).unwrap();
        let b = BBox::new(1, 1, 6, 6).unwrap();
        let mut st = GateState::cold();
        for (t, &d) in dets.iter().enumerate() {
            let out = gate_step(&mut st, &cfg, d.then_some(&b), &mask);
            let lo = t.saturating_sub(3);
            let expect_nonzero = dets[lo..=t].iter().any(|&x| x);
            prop_assert_eq!(out.status != GateStatus::Zeroed, expect_nonzero, "t={}", t);
            // Gated mask is a subset of the raw mask in every state.
            prop_assert!(out.gated_mask.count_true() <= mask.count_true());
        }
    }

    #[test]
    fn gate_isolated_detection_active_exactly_hold_frames(
        hold in 1u32..8,
        prefix in 0usize..6,
        tail in 8usize..20,
    ) {
        let cfg = GateConfig { hold: Hold::Frames(hold), ..GateConfig::default() };
        let mask = BinaryMask::from_fn(4, 4, |_, _| true).unwrap();
        let b = BBox::new(0, 0, 4, 4).unwrap();
        let mut st = GateState::cold();
        let mut active = 0u32;
        for t in 0..prefix + 1 + tail {
            let det = t == prefix;
            let out = gate_step(&mut st, &cfg, det.then_some(&b), &mask);
            if out.status != GateStatus::Zeroed {
                active += 1;
            }
        }
        prop_assert_eq!(active, hold.min((tail + 1) as u32));
    }

    #[test]
    fn crop_paste_identity_without_resize(mask in arb_mask(40, 40)) {
        // pad = 0 and crop size == target: round trip restores the region.
        let frame = Frame::filled(64, 64, 0).unwrap();
        let b = BBox::new(10, 12, 10 + mask.width(), 12 + mask.height()).unwrap();
        let (_, rect) = crop_resize(&frame, &b, 0, mask.width().max(mask.height())).unwrap();
        prop_assert_eq!(rect, b);
        let full = paste_back(&mask, &rect, 64, 64);
        if mask.width() == mask.height() {
            let full = full.unwrap();
            for y in 0..mask.height() {
                for x in 0..mask.width() {
                    prop_assert_eq!(full.get(rect.x0 + x, rect.y0 + y), mask.get(x, y));
                }
            }
        }
    }

    #[test]
    fn mwu_monotone_transform_invariance(
        mut a in proptest::collection::vec(0.0f64..100.0, 3..12),
        mut b in proptest::collection::vec(0.0f64..100.0, 3..12),
    ) {
        a.iter_mut().for_each(|x| *x = (*x * 8.0).round() / 8.0);
        b.iter_mut().for_each(|x| *x = (*x * 8.0).round() / 8.0);
        let (_, p1) = mann_whitney_u(&a, &b).unwrap();
        let f = |x: f64| x.mul_add(3.0, 1.0).sqrt(); // strictly monotone on [0, inf)
        let ta: Vec<f64> = a.iter().map(|&x| f(x)).collect();
        let tb: Vec<f64> = b.iter().map(|&x| f(x)).collect();
        let (_, p2) = mann_whitney_u(&ta, &tb).unwrap();
        prop_assert_eq!(p1, p2);
    }

    #[test]
    fn fisher_transpose_and_swap_symmetries(
        a in 0u64..24, b in 0u64..24, c in 0u64..24, d in 0u64..24,
    ) {
        prop_assume!(a + b + c + d > 0);
        let p = fisher_exact_2x2([[a, b], [c, d]]).unwrap();
        let pt = fisher_exact_2x2([[a, c], [b, d]]).unwrap();
        let pr = fisher_exact_2x2([[c, d], [a, b]]).unwrap();
        let pc = fisher_exact_2x2([[b, a], [d, c]]).unwrap();
        prop_assert!((p - pt).abs() < 1e-9, "transpose {} vs {}", p, pt);
        prop_assert!((p - pr).abs() < 1e-9, "row swap {} vs {}", p, pr);
        prop_assert!((p - pc).abs() < 1e-9, "col swap {} vs {}", p, pc);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn regate_recall_monotone_in_tau(
        confs in proptest::collection::vec(proptest::option::of(0.0f64..1.0), 5..40),
        t1 in 0.0f64..1.0,
        t2 in 0.0f64..1.0,
    ) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let b = BBox::new(1, 1, 6, 6).unwrap();
        let mask = BinaryMask::from_fn(8, 8, |x, y| b.contains(x, y)).unwrap();
        let dets: Vec<Option<Detection>> = confs
            .iter()
            .map(|c| c.map(|c| Detection::new(b, c).unwrap()))
            .collect();
        let masks = vec![mask.clone(); dets.len()];
        let excluded = vec![false; dets.len()];
        let cfg = GateConfig::default();
        let fired = |tau: f64| {
            regate(&dets, &masks, &excluded, tau, &cfg, true)
                .unwrap()
                .iter()
                .filter(|r| r.fired)
                .count()
        };
        prop_assert!(fired(hi) <= fired(lo));
    }
}
