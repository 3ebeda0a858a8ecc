//! Per-pixel confusion counting between a predicted and a ground-truth mask.

use crate::error::{Error, Result};
use crate::frame::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }
}

pub fn confusion_counts(pred: &BinaryMask, gt: &BinaryMask) -> Result<ConfusionCounts> {
    if pred.dims() != gt.dims() {
        return Err(Error::InvalidInput(format!(
            "mask dimensions differ: {}x{} vs {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        match (p, g) {
            (true, true) => c.true_pos += 1,
            (true, false) => c.false_pos += 1,
            (false, true) => c.false_neg += 1,
            (false, false) => c.true_neg += 1,
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_masks() {
        let m = BinaryMask::from_fn(256, 256, |x, y| x < 10 && y < 10).unwrap();
        let c = confusion_counts(&m, &m).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                true_pos: 100,
                false_pos: 0,
                false_neg: 0,
                true_neg: 256 * 256 - 100
            }
        );
        assert_eq!(c.total(), 256 * 256);
    }

    #[test]
    fn shifted_blocks() {
        let pred = BinaryMask::from_fn(4, 4, |x, y| x < 2 && y < 2).unwrap();
        let gt = BinaryMask::from_fn(4, 4, |x, y| (1..3).contains(&x) && y < 2).unwrap();
        let c = confusion_counts(&pred, &gt).unwrap();
        assert_eq!(
            (c.true_pos, c.false_pos, c.false_neg, c.true_neg),
            (2, 2, 2, 10)
        );
    }

    #[test]
    fn both_empty() {
        let m = BinaryMask::falses(8, 8).unwrap();
        let c = confusion_counts(&m, &m).unwrap();
        assert_eq!((c.true_pos, c.false_pos, c.false_neg), (0, 0, 0));
        assert_eq!(c.true_neg, 64);
    }

    #[test]
    fn swap_swaps_fp_fn() {
        let a = BinaryMask::from_fn(16, 16, |x, _| x % 3 == 0).unwrap();
        let b = BinaryMask::from_fn(16, 16, |_, y| y % 4 == 1).unwrap();
        let ab = confusion_counts(&a, &b).unwrap();
        let ba = confusion_counts(&b, &a).unwrap();
        assert_eq!(ab.true_pos, ba.true_pos);
        assert_eq!(ab.true_neg, ba.true_neg);
        assert_eq!(ab.false_pos, ba.false_neg);
        assert_eq!(ab.false_neg, ba.false_pos);
    }

    #[test]
    fn dimension_mismatch_errors() {
        let a = BinaryMask::falses(4, 4).unwrap();
        let b = BinaryMask::falses(4, 5).unwrap();
        assert!(confusion_counts(&a, &b).is_err());
    }
}
