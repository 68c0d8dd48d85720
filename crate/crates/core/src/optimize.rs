//! One-dimensional maximization over `α ∈ [0, 1/2]`.
//!
//! A coarse equispaced grid locates the best bracket, then golden-section
//! search refines inside it. The grid guards against objectives with more
//! than one local maximum.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

/// Number of grid points laid over `[0, 1/2]` before refinement.
pub const ALPHA_GRID_POINTS: usize = 1025;

/// Golden-section search stops once the bracket is this narrow.
pub const ALPHA_TOL: f64 = 1e-12;

const ALPHA_MAX: f64 = 0.5;

/// Maximizer and maximum of a scalar objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaOptimum<T> {
    pub alpha: T,
    pub value: T,
}

fn eval<T: Real, F: Fn(T) -> T>(f: &F, alpha: T) -> Result<T> {
    let v = f(alpha);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteObjective {
            alpha: alpha.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Maximizes `objective` over `[0, 1/2]`.
///
/// The returned value is never below the objective at any grid point, in
/// particular at `0`, `1/4` and `1/2`.
pub fn optimize_alpha<T: Real, F: Fn(T) -> T>(objective: F) -> Result<AlphaOptimum<T>> {
    maximize_on_grid(objective, lit(0.0), lit(ALPHA_MAX), ALPHA_GRID_POINTS)
}

/// Grid scan with `points ≥ 3` nodes on `[lo, hi]` followed by golden-section
/// refinement around the best node.
pub fn maximize_on_grid<T: Real, F: Fn(T) -> T>(
    objective: F,
    lo: T,
    hi: T,
    points: usize,
) -> Result<AlphaOptimum<T>> {
    assert!(points >= 3 && hi > lo);
    let step = (hi - lo) / from_usize::<T>(points - 1);
    let node = |i: usize| {
        if i == points - 1 {
            hi
        } else {
            lo + step * from_usize::<T>(i)
        }
    };

    let mut best_i = 0;
    let mut best = eval(&objective, node(0))?;
    for i in 1..points {
        let v = eval(&objective, node(i))?;
        if v > best {
            best = v;
            best_i = i;
        }
    }

    let a = node(best_i.saturating_sub(1));
    let b = node((best_i + 1).min(points - 1));
    let refined = golden_section_max(&objective, a, b, lit(ALPHA_TOL))?;
    if refined.value > best {
        Ok(refined)
    } else {
        Ok(AlphaOptimum {
            alpha: node(best_i),
            value: best,
        })
    }
}

/// Golden-section search for a maximum of a unimodal function on `[a, b]`.
pub fn golden_section_max<T: Real, F: Fn(T) -> T>(
    f: &F,
    mut a: T,
    mut b: T,
    tol: T,
) -> Result<AlphaOptimum<T>> {
    // 1/phi
    let inv_phi: T = lit(0.618_033_988_749_894_8);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = eval(f, c)?;
    let mut fd = eval(f, d)?;
    // the width shrinks geometrically; the cap only matters for f32 where
    // the width can stall above tol
    for _ in 0..200 {
        if (b - a) <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = eval(f, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = eval(f, d)?;
        }
    }
    let (alpha, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    // endpoints of the final bracket
    let (fa, fb) = (eval(f, a)?, eval(f, b)?);
    let mut best = AlphaOptimum { alpha, value };
    if fa > best.value {
        best = AlphaOptimum {
            alpha: a,
            value: fa,
        };
    }
    if fb > best.value {
        best = AlphaOptimum {
            alpha: b,
            value: fb,
        };
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::binary_entropy;

    #[test]
    fn binary_entropy_peaks_at_half() {
        let opt = optimize_alpha(|a: f64| binary_entropy(a).unwrap()).unwrap();
        // h is flat to machine precision within ~1e-8 of the peak
        assert!((opt.alpha - 0.5).abs() < 1e-7, "{}", opt.alpha);
        assert!((opt.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_interior_maximum() {
        let opt = optimize_alpha(|a: f64| -(a - 0.3) * (a - 0.3)).unwrap();
        assert!((opt.alpha - 0.3).abs() < 1e-10, "{}", opt.alpha);
    }

    #[test]
    fn left_endpoint_maximum() {
        let opt = optimize_alpha(|a: f64| -a).unwrap();
        assert_eq!(opt.alpha, 0.0);
        assert_eq!(opt.value, 0.0);
    }

    #[test]
    fn grid_guards_against_second_peak() {
        // narrow global peak at 0.45, broad local one at 0.1
        let f = |a: f64| -((a - 0.1) * (a - 0.1)) + 0.5 * (-((a - 0.45) / 0.01).powi(2)).exp();
        let opt = optimize_alpha(f).unwrap();
        assert!((opt.alpha - 0.45).abs() < 1e-3);
    }

    #[test]
    fn rejects_non_finite_objective() {
        let r = optimize_alpha(|a: f64| if a > 0.2 { f64::NAN } else { a });
        assert!(matches!(r, Err(Error::NonFiniteObjective { .. })));
    }

    #[test]
    fn single_precision() {
        let opt = optimize_alpha(|a: f32| -(a - 0.3) * (a - 0.3)).unwrap();
        assert!((opt.alpha - 0.3).abs() < 1e-3);
    }
}
