//! Per-class intersection-over-union for class-id rasters.

use alloc::vec;
use alloc::vec::Vec;

use crate::resample::EquirectImage;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct IouReport {
    /// `None` for classes with an empty union (absent from both maps) and for the ignored
    /// class.
    pub per_class: Vec<Option<f64>>,
    pub intersections: Vec<u64>,
    pub unions: Vec<u64>,
    /// Unweighted mean over present classes; `None` if no class is present.
    pub overall: Option<f64>,
}

fn class_id(value: f64, num_classes: u32) -> Result<u32> {
    if value >= 0.0 && value < num_classes as f64 && value == libm::floor(value) {
        Ok(value as u32)
    } else {
        Err(Error::ClassOutOfRange { value, num_classes })
    }
}

/// Mean intersection-over-union of `pred` against `label`.
///
/// Pixels whose label equals `ignore` are skipped entirely.
pub fn mean_iou(
    pred: &EquirectImage,
    label: &EquirectImage,
    num_classes: u32,
    ignore: Option<u32>,
) -> Result<IouReport> {
    if pred.height() != label.height() || pred.width() != label.width() {
        return Err(Error::Dimension("prediction and label sizes differ"));
    }
    if pred.channels() != 1 || label.channels() != 1 {
        return Err(Error::Dimension("class maps must have a single channel"));
    }
    let n = num_classes as usize;
    let mut inter = vec![0u64; n];
    let mut pred_count = vec![0u64; n];
    let mut label_count = vec![0u64; n];
    for (&p, &l) in pred.data().iter().zip(label.data()) {
        if ignore.is_some_and(|ig| l == ig as f64) {
            continue;
        }
        let l = class_id(l, num_classes)? as usize;
        let p = class_id(p, num_classes)? as usize;
        pred_count[p] += 1;
        label_count[l] += 1;
        if p == l {
            inter[p] += 1;
        }
    }
    let unions: Vec<u64> = (0..n)
        .map(|c| pred_count[c] + label_count[c] - inter[c])
        .collect();
    let per_class: Vec<Option<f64>> = (0..n)
        .map(|c| {
            let ignored = ignore.is_some_and(|ig| ig as usize == c);
            (unions[c] > 0 && !ignored).then(|| inter[c] as f64 / unions[c] as f64)
        })
        .collect();
    let present: Vec<f64> = per_class.iter().flatten().copied().collect();
    let overall = (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64);
    Ok(IouReport {
        per_class,
        intersections: inter,
        unions,
        overall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(values: &[f64], w: usize) -> EquirectImage {
        EquirectImage::new(values.len() / w, w, 1, values.to_vec()).unwrap()
    }

    #[test]
    fn identical_maps_score_one() {
        let m = map(&[0., 1., 2., 1., 0., 0., 2., 1.], 4);
        let r = mean_iou(&m, &m, 4, None).unwrap();
        assert_eq!(r.per_class, vec![Some(1.0), Some(1.0), Some(1.0), None]);
        assert_eq!(r.overall, Some(1.0));
    }

    #[test]
    fn disjoint_maps_score_zero() {
        let r = mean_iou(&map(&[0.; 8], 4), &map(&[1.; 8], 4), 2, None).unwrap();
        assert_eq!(r.per_class, vec![Some(0.0), Some(0.0)]);
        assert_eq!(r.overall, Some(0.0));
    }

    #[test]
    fn hand_counted_four_by_four() {
        // pred has 5 pixels of class 1, label has 6, 3 overlap: IoU = 3 / (5 + 6 - 3)
        #[rustfmt::skip]
        let pred = [
            1., 1., 1., 0.,
            1., 1., 0., 0.,
            0., 0., 0., 0.,
            0., 0., 0., 0.,
        ];
        #[rustfmt::skip]
        let label = [
            1., 1., 0., 0.,
            1., 0., 0., 0.,
            0., 0., 1., 1.,
            0., 0., 0., 1.,
        ];
        let r = mean_iou(&map(&pred, 4), &map(&label, 4), 2, None).unwrap();
        assert_eq!(r.intersections[1], 3);
        assert_eq!(r.unions[1], 8);
        assert_eq!(r.per_class[1], Some(3.0 / 8.0));
        // class 0: 11 pred, 10 label, 8 overlap -> 8 / 13
        assert_eq!(r.per_class[0], Some(8.0 / 13.0));
    }

    #[test]
    fn ignore_and_errors() {
        let pred = map(&[0., 1., 1., 1.], 2);
        let label = map(&[0., 1., 255., 255.], 2);
        let r = mean_iou(&pred, &label, 2, Some(255)).unwrap();
        assert_eq!(r.per_class, vec![Some(1.0), Some(1.0)]);
        assert!(matches!(
            mean_iou(&pred, &label, 2, None),
            Err(Error::ClassOutOfRange { .. })
        ));
        assert!(mean_iou(&pred, &map(&[0.; 6], 3), 2, None).is_err());
        assert!(mean_iou(&map(&[0.5, 0., 0., 0.], 2), &pred, 2, None).is_err());
    }
}
