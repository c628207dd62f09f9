//! Statistics behind the captions, generic over the float width.

use crate::scalar::Scalar;

/// Each value's fraction of the total; `None` when the total is zero.
pub fn shares<T: Scalar>(values: &[T]) -> Option<Vec<T>> {
    let total: T = values.iter().copied().sum();
    if total == T::zero() {
        return None;
    }
    Some(values.iter().map(|&v| v / total).collect())
}

/// Pearson correlation; `None` for fewer than two points or zero variance.
pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Option<T> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let (mx, my) = (mean(&xs[..n]), mean(&ys[..n]));
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).max(-T::one()).min(T::one()))
}

/// Ordinary least squares `(slope, intercept)`. A vertical cloud gets slope 0.
pub fn least_squares<T: Scalar>(xs: &[T], ys: &[T]) -> (T, T) {
    let n = xs.len().min(ys.len());
    if n == 0 {
        return (T::zero(), T::zero());
    }
    let (mx, my) = (mean(&xs[..n]), mean(&ys[..n]));
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxy = sxy + (x - mx) * (y - my);
        sxx = sxx + (x - mx) * (x - mx);
    }
    if sxx == T::zero() {
        return (T::zero(), my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `(current - previous) / previous`; `None` when there is no base.
pub fn relative_change<T: Scalar>(current: T, previous: T) -> Option<T> {
    (previous != T::zero()).then(|| (current - previous) / previous.abs())
}

pub fn mean<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::from_count(xs.len())
}
