use crate::dataset::{Annotation, LightClass};
use crate::scalar::Scalar;

/// Axis-aligned box as center and size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox<T> {
    pub cx: T,
    pub cy: T,
    pub w: T,
    pub h: T,
}

impl<T: Scalar> BBox<T> {
    pub fn new(cx: T, cy: T, w: T, h: T) -> Self {
        Self { cx, cy, w, h }
    }

    pub fn from_corners(x1: T, y1: T, x2: T, y2: T) -> Self {
        let two = T::lit(2.0);
        Self {
            cx: (x1 + x2) / two,
            cy: (y1 + y2) / two,
            w: x2 - x1,
            h: y2 - y1,
        }
    }

    pub fn corners(&self) -> (T, T, T, T) {
        let two = T::lit(2.0);
        (
            self.cx - self.w / two,
            self.cy - self.h / two,
            self.cx + self.w / two,
            self.cy + self.h / two,
        )
    }

    pub fn area(&self) -> T {
        self.w.max(T::zero()) * self.h.max(T::zero())
    }

    /// Same box with every coordinate multiplied by `s`.
    pub fn scaled(&self, s: T) -> Self {
        Self::new(self.cx * s, self.cy * s, self.w * s, self.h * s)
    }
}

impl From<&Annotation> for BBox<f64> {
    fn from(a: &Annotation) -> Self {
        BBox::new(a.cx, a.cy, a.w, a.h)
    }
}

/// Intersection over union; 0 for disjoint or degenerate pairs.
pub fn iou<T: Scalar>(a: &BBox<T>, b: &BBox<T>) -> T {
    let (ax1, ay1, ax2, ay2) = a.corners();
    let (bx1, by1, bx2, by2) = b.corners();
    let iw = (ax2.min(bx2) - ax1.max(bx1)).max(T::zero());
    let ih = (ay2.min(by2) - ay1.max(by1)).max(T::zero());
    let inter = iw * ih;
    // areas from the same corners as the intersection, so iou(a, a) == 1 exactly
    let area = |(x1, y1, x2, y2): (T, T, T, T)| (x2 - x1).max(T::zero()) * (y2 - y1).max(T::zero());
    let union = area((ax1, ay1, ax2, ay2)) + area((bx1, by1, bx2, by2)) - inter;
    if union <= T::zero() {
        T::zero()
    } else {
        inter / union
    }
}

/// A detector output for one box.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord<T> {
    pub image_id: String,
    pub class: LightClass,
    pub bbox: BBox<T>,
    /// In `[0, 1]`.
    pub confidence: T,
}

/// A ground-truth box.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthRecord<T> {
    pub image_id: String,
    pub class: LightClass,
    pub bbox: BBox<T>,
}

impl DetectionRecord<f64> {
    /// Drops the confidence, keeping a label-file annotation when the box is valid.
    pub fn to_annotation(&self) -> Option<Annotation> {
        let b = &self.bbox;
        Annotation::new(self.class, b.cx, b.cy, b.w, b.h).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iou_basics() {
        let a = BBox::new(0.5, 0.5, 0.2, 0.2);
        assert_eq!(iou(&a, &a), 1.0);
        let far = BBox::new(0.1, 0.1, 0.05, 0.05);
        assert_eq!(iou(&a, &far), 0.0);
        let p = BBox::<f64>::from_corners(0.0, 0.0, 2.0, 2.0);
        let q = BBox::from_corners(1.0, 1.0, 3.0, 3.0);
        assert!((iou(&p, &q) - 1.0 / 7.0).abs() < 1e-15);
        let touching = BBox::from_corners(2.0, 0.0, 3.0, 2.0);
        assert_eq!(iou(&p, &touching), 0.0);
        assert_eq!(iou(&BBox::new(0.5, 0.5, 0.0, 0.0), &BBox::new(0.5, 0.5, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn iou_in_single_precision() {
        let p = BBox::<f32>::from_corners(0.0, 0.0, 2.0, 2.0);
        let q = BBox::<f32>::from_corners(1.0, 1.0, 3.0, 3.0);
        assert!((iou(&p, &q) - 1.0 / 7.0).abs() < 1e-6);
    }
}
