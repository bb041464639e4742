//! Deterministic numerical primitives shared by the rest of the engine:
//! interval clamping, boundary-aware finite differences, a reproducible grid
//! maximizer with refinement, and a low-discrepancy point generator.
//!
//! Everything here is bitwise reproducible: no randomness, no thread-order
//! dependence, ties broken lexicographically.

use crate::error::{Error, Result};

/// Default step for first finite differences. Nested second differences use
/// the square root of this step for their outer difference.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

// ---------------------------------------------------------------------------
// clamping
// ---------------------------------------------------------------------------

/// Projects `x` onto the closed interval `[lo, hi]`.
///
/// Panics if `lo > hi`, mirroring `f64::clamp`.
///
/// ```
/// # use intervention::numerics::clamp;
/// assert_eq!(clamp(0.2, 0.0, 1.0), 0.2);
/// assert_eq!(clamp(-3.0, 0.0, 1.0), 0.0);
/// assert_eq!(clamp(7.5, 0.0, 1.0), 1.0);
/// ```
#[must_use]
pub fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    assert!(lo <= hi, "clamp: empty interval, lo = {lo} > hi = {hi}");
    x.max(lo).min(hi)
}

/// Evenly spaced points from `lo` to `hi` inclusive; endpoints are exact.
#[must_use]
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    (0..n)
        .map(|k| {
            let t = k as f64 / (n - 1) as f64;
            lo * (1.0 - t) + hi * t
        })
        .collect()
}

// ---------------------------------------------------------------------------
// finite differences
// ---------------------------------------------------------------------------

/// Finite-difference settings. The difference scheme itself is chosen per
/// evaluation point from its distance to the domain boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdSpec {
    /// Base step for first differences; must be positive.
    pub step: f64,
}

impl Default for FdSpec {
    fn default() -> Self {
        Self {
            step: DEFAULT_FD_STEP,
        }
    }
}

impl FdSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::Precondition(format!(
                "finite-difference step must be positive, got {}",
                self.step
            )));
        }
        Ok(())
    }
}

/// Difference scheme applied at one evaluation point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Central,
    RightSided,
    LeftSided,
}

/// Picks the scheme for a point `x` in `[lo, hi]`: one-sided within one step
/// of the matching boundary, central otherwise.
#[must_use]
pub fn scheme_for(x: f64, lo: f64, hi: f64, step: f64) -> Scheme {
    if x - lo < step {
        Scheme::RightSided
    } else if hi - x < step {
        Scheme::LeftSided
    } else {
        Scheme::Central
    }
}

fn probe<F: Fn(&[f64]) -> f64>(
    f: &F,
    scratch: &mut [f64],
    dim: usize,
    value: f64,
) -> Result<f64> {
    scratch[dim] = value;
    let y = f(scratch);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFinite {
            context: "finite-difference probe".into(),
            point: scratch.to_vec(),
        })
    }
}

fn check_fd_domain(point: &[f64], dim: usize, bounds: &[(f64, f64)], step: f64) -> Result<()> {
    if point.len() != bounds.len() {
        return Err(Error::Precondition(format!(
            "point has {} coordinates but bounds describe {}",
            point.len(),
            bounds.len()
        )));
    }
    if dim >= point.len() {
        return Err(Error::Precondition(format!(
            "dimension {dim} out of range for a {}-dimensional point",
            point.len()
        )));
    }
    let (lo, hi) = bounds[dim];
    if hi - lo < 2.0 * step {
        return Err(Error::Precondition(format!(
            "interval [{lo}, {hi}] is narrower than two steps ({step:e}); no difference scheme fits"
        )));
    }
    let x = point[dim];
    if x < lo || x > hi {
        return Err(Error::Precondition(format!(
            "coordinate {dim} = {x} lies outside its interval [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Partial derivative of `f` along `dim` at `point`, staying inside the box
/// `bounds`. Uses second-order central or one-sided differences; the scheme
/// follows [`scheme_for`], so the derivative at the lower end of an interval
/// is the right(-sided) derivative.
pub fn partial_derivative<F: Fn(&[f64]) -> f64>(
    f: F,
    point: &[f64],
    dim: usize,
    bounds: &[(f64, f64)],
    spec: FdSpec,
) -> Result<f64> {
    spec.validate()?;
    check_fd_domain(point, dim, bounds, spec.step)?;
    let h = spec.step;
    let (lo, hi) = bounds[dim];
    let x = point[dim];
    let mut scratch = point.to_vec();
    let d = match scheme_for(x, lo, hi, h) {
        Scheme::Central => {
            let fp = probe(&f, &mut scratch, dim, x + h)?;
            let fm = probe(&f, &mut scratch, dim, x - h)?;
            (fp - fm) / (2.0 * h)
        }
        Scheme::RightSided => {
            let f0 = probe(&f, &mut scratch, dim, x)?;
            let f1 = probe(&f, &mut scratch, dim, x + h)?;
            let f2 = probe(&f, &mut scratch, dim, x + 2.0 * h)?;
            (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)
        }
        Scheme::LeftSided => {
            let f0 = probe(&f, &mut scratch, dim, x)?;
            let f1 = probe(&f, &mut scratch, dim, x - h)?;
            let f2 = probe(&f, &mut scratch, dim, x - 2.0 * h)?;
            (3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h)
        }
    };
    Ok(d)
}

/// Second partial derivative d²f / (d x_outer d x_inner), computed by nesting
/// first differences: the outer difference uses step `sqrt(spec.step)`, the
/// inner one `spec.step`. Both levels stay boundary-aware.
pub fn second_partial<F: Fn(&[f64]) -> f64>(
    f: F,
    point: &[f64],
    dim_outer: usize,
    dim_inner: usize,
    bounds: &[(f64, f64)],
    spec: FdSpec,
) -> Result<f64> {
    spec.validate()?;
    let outer_step = spec.step.sqrt();
    check_fd_domain(point, dim_outer, bounds, outer_step)?;
    let (lo, hi) = bounds[dim_outer];
    let x = point[dim_outer];
    let inner_at = |v: f64| -> Result<f64> {
        let mut p = point.to_vec();
        p[dim_outer] = v;
        partial_derivative(&f, &p, dim_inner, bounds, spec)
    };
    let h = outer_step;
    let d = match scheme_for(x, lo, hi, h) {
        Scheme::Central => (inner_at(x + h)? - inner_at(x - h)?) / (2.0 * h),
        Scheme::RightSided => {
            (-3.0 * inner_at(x)? + 4.0 * inner_at(x + h)? - inner_at(x + 2.0 * h)?) / (2.0 * h)
        }
        Scheme::LeftSided => {
            (3.0 * inner_at(x)? - 4.0 * inner_at(x - h)? + inner_at(x - 2.0 * h)?) / (2.0 * h)
        }
    };
    Ok(d)
}

// ---------------------------------------------------------------------------
// grid maximization
// ---------------------------------------------------------------------------

/// Grid search settings shared by deviation searches and profile enumeration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    /// Points per axis; at least 2.
    pub resolution: usize,
    /// Rounds of re-gridding a shrunk box around the incumbent.
    pub refinement_rounds: usize,
    /// Box width multiplier per refinement round, strictly between 0 and 1.
    pub shrink: f64,
}

impl GridSpec {
    /// Spec with the given resolution and the default refinement policy
    /// (2 rounds, shrink factor 0.1).
    #[must_use]
    pub fn new(resolution: usize) -> Self {
        Self {
            resolution,
            refinement_rounds: 2,
            shrink: 0.1,
        }
    }

    /// Default resolution by problem size: 101 points per axis for up to two
    /// users, 21 beyond that.
    #[must_use]
    pub fn for_users(n: usize) -> Self {
        Self::new(if n <= 2 { 101 } else { 21 })
    }

    #[must_use]
    pub fn with_refinement(mut self, rounds: usize, shrink: f64) -> Self {
        self.refinement_rounds = rounds;
        self.shrink = shrink;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::Precondition(format!(
                "grid resolution must be at least 2, got {}",
                self.resolution
            )));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Precondition(format!(
                "shrink factor must lie strictly between 0 and 1, got {}",
                self.shrink
            )));
        }
        Ok(())
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::new(101)
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Scans the full grid over `boxes`, updating the incumbent. Replacement rule:
/// strictly larger value, or equal value at a lexicographically smaller point.
fn scan_box<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    boxes: &[(f64, f64)],
    resolution: usize,
    incumbent: &mut Option<(Vec<f64>, f64)>,
) -> Result<()> {
    let axes: Vec<Vec<f64>> = boxes
        .iter()
        .map(|&(lo, hi)| {
            if lo == hi {
                vec![lo]
            } else {
                linspace(lo, hi, resolution)
            }
        })
        .collect();
    let dims = axes.len();
    let mut idx = vec![0usize; dims];
    let mut point = vec![0.0f64; dims];
    loop {
        for (d, &i) in idx.iter().enumerate() {
            point[d] = axes[d][i];
        }
        let value = f(&point);
        if !value.is_finite() {
            return Err(Error::NonFinite {
                context: "grid objective".into(),
                point,
            });
        }
        let better = match incumbent {
            None => true,
            Some((best_point, best_value)) => {
                value > *best_value || (value == *best_value && lex_less(&point, best_point))
            }
        };
        if better {
            *incumbent = Some((point.clone(), value));
        }
        // odometer increment, last axis fastest → row-major, ascending
        let mut d = dims;
        loop {
            if d == 0 {
                return Ok(());
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Maximizes `f` over the box `bounds` on a full grid, then refines by
/// re-gridding a shrunk box around the incumbent for
/// `spec.refinement_rounds` rounds (each round's box is `spec.shrink` times
/// the previous width, clipped to the original bounds).
///
/// Deterministic: ties go to the lexicographically smallest point, and the
/// incumbent value never decreases across rounds. A non-finite objective
/// value is an error naming the offending grid point.
pub fn grid_argmax<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    bounds: &[(f64, f64)],
    spec: &GridSpec,
) -> Result<(Vec<f64>, f64)> {
    spec.validate()?;
    if bounds.is_empty() {
        return Err(Error::Precondition("grid_argmax over zero dimensions".into()));
    }
    for &(lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Precondition(format!(
                "invalid box interval [{lo}, {hi}]"
            )));
        }
    }
    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut widths: Vec<f64> = bounds.iter().map(|&(lo, hi)| hi - lo).collect();
    let mut boxes = bounds.to_vec();
    for round in 0..=spec.refinement_rounds {
        if round > 0 {
            let center = &incumbent.as_ref().expect("incumbent set by first scan").0;
            for d in 0..boxes.len() {
                widths[d] *= spec.shrink;
                let (olo, ohi) = bounds[d];
                let lo = (center[d] - widths[d] / 2.0).max(olo);
                let hi = (center[d] + widths[d] / 2.0).min(ohi);
                boxes[d] = (lo, hi);
            }
        }
        scan_box(&mut f, &boxes, spec.resolution, &mut incumbent)?;
    }
    Ok(incumbent.expect("at least one grid point was scanned"))
}

// ---------------------------------------------------------------------------
// low-discrepancy sampling
// ---------------------------------------------------------------------------

/// Deterministic low-discrepancy points in the `dims`-dimensional unit cube,
/// from the additive recurrence with the generalized golden ratio. Suitable
/// for reproducible spot checks of pointwise properties.
#[must_use]
pub fn unit_low_discrepancy(dims: usize, count: usize) -> Vec<Vec<f64>> {
    unit_low_discrepancy_seeded(dims, count, 0)
}

/// As [`unit_low_discrepancy`] with a seed-keyed starting shift; seed 0 keeps
/// the canonical centered shift. Different seeds rotate the whole sequence,
/// which is enough to vary which points an audit probes while staying
/// deterministic per seed.
pub fn unit_low_discrepancy_seeded(dims: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dims > 0, "need at least one dimension");
    // unique real root > 1 of x^(dims+1) = x + 1
    let mut phi = 1.5f64;
    for _ in 0..64 {
        phi = (phi + 1.0).powf(1.0 / (dims as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=dims as i32).map(|j| (1.0 / phi).powi(j)).collect();
    let shifts: Vec<f64> = (0..dims)
        .map(|d| {
            if seed == 0 {
                0.5
            } else {
                // splitmix64 of (seed, dimension), mapped to [0, 1)
                let mut z = seed
                    .wrapping_add(1 + d as u64)
                    .wrapping_mul(0x9E37_79B9_7F4A_7C15);
                z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
                (z ^ (z >> 31)) as f64 / (u64::MAX as f64 + 1.0)
            }
        })
        .collect();
    (0..count)
        .map(|n| {
            alphas
                .iter()
                .zip(&shifts)
                .map(|(a, s)| (s + (n + 1) as f64 * a).fract())
                .collect()
        })
        .collect()
}

// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn clamp_matches_hand_values() {
        assert_eq!(clamp(0.2, 0.0, 1.0), 0.2);
        assert_eq!(clamp(-3.0, 0.0, 1.0), 0.0);
        assert_eq!(clamp(7.5, 0.0, 1.0), 1.0);
    }

    #[test]
    #[should_panic(expected = "empty interval")]
    fn clamp_rejects_inverted_interval() {
        let _ = clamp(0.5, 1.0, 0.0);
    }

    #[test]
    fn linspace_hits_endpoints_exactly() {
        let xs = linspace(0.1, 0.9, 5);
        assert_eq!(xs[0], 0.1);
        assert_eq!(xs[4], 0.9);
        assert_eq!(xs.len(), 5);
        assert!((xs[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scheme_selection_follows_boundary_distance() {
        let h = 1e-5;
        assert_eq!(scheme_for(0.0, 0.0, 1.0, h), Scheme::RightSided);
        assert_eq!(scheme_for(0.5e-5, 0.0, 1.0, h), Scheme::RightSided);
        assert_eq!(scheme_for(1.0, 0.0, 1.0, h), Scheme::LeftSided);
        assert_eq!(scheme_for(1.0 - 0.5e-5, 0.0, 1.0, h), Scheme::LeftSided);
        assert_eq!(scheme_for(0.5, 0.0, 1.0, h), Scheme::Central);
        assert_eq!(scheme_for(h, 0.0, 1.0, h), Scheme::Central);
    }

    #[test]
    fn partial_of_square_is_two_x() {
        let f = |x: &[f64]| x[0] * x[0];
        let d = partial_derivative(f, &[0.3], 0, &[(0.0, 1.0)], FdSpec::default()).unwrap();
        assert!((d - 0.6).abs() < 1e-8, "d = {d}");
    }

    #[test]
    fn right_sided_partial_at_lower_boundary() {
        // contention throughput of user 1: a1 (1 - a2) (1 - a0); derivative in
        // a0 at the boundary a0 = 0 must come out as the right derivative
        let f = |x: &[f64]| x[1] * (1.0 - x[2]) * (1.0 - x[0]);
        let bounds = [(0.0, 1.0); 3];
        let d = partial_derivative(f, &[0.0, 0.5, 0.5], 0, &bounds, FdSpec::default()).unwrap();
        assert!((d - (-0.25)).abs() < 1e-6, "d = {d}");
    }

    #[test]
    fn partial_of_constant_is_zero() {
        let f = |_: &[f64]| 4.25;
        let d = partial_derivative(f, &[0.7], 0, &[(0.0, 1.0)], FdSpec::default()).unwrap();
        assert!(d.abs() < 1e-9, "d = {d}");
    }

    #[test]
    fn partial_propagates_non_finite_probe() {
        let f = |x: &[f64]| 1.0 / x[0];
        let err = partial_derivative(f, &[0.0], 0, &[(0.0, 1.0)], FdSpec::default()).unwrap_err();
        match err {
            Error::NonFinite { point, .. } => assert_eq!(point, vec![0.0]),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn second_partial_of_cubic() {
        let f = |x: &[f64]| x[0] * x[0] * x[0];
        let d = second_partial(f, &[0.4], 0, 0, &[(0.0, 1.0)], FdSpec::default()).unwrap();
        assert!((d - 2.4).abs() < 1e-4, "d = {d}");
    }

    #[test]
    fn mixed_second_partial_of_product() {
        let f = |x: &[f64]| x[0] * x[1];
        let d = second_partial(f, &[0.3, 0.8], 0, 1, &[(0.0, 1.0), (0.0, 1.0)], FdSpec::default())
            .unwrap();
        assert!((d - 1.0).abs() < 1e-6, "d = {d}");
    }

    #[test]
    fn second_partial_near_boundary_uses_one_sided_outer() {
        let f = |x: &[f64]| x[0] * x[0];
        let d = second_partial(f, &[0.0], 0, 0, &[(0.0, 1.0)], FdSpec::default()).unwrap();
        assert!((d - 2.0).abs() < 1e-4, "d = {d}");
    }

    // oracle for the grid maximizer: plain row-major scan without refinement
    fn brute_scan(
        f: impl Fn(&[f64]) -> f64,
        axes: &[Vec<f64>],
    ) -> (Vec<f64>, f64) {
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut idx = vec![0usize; axes.len()];
        'outer: loop {
            let point: Vec<f64> = idx.iter().enumerate().map(|(d, &i)| axes[d][i]).collect();
            let v = f(&point);
            let replace = match &best {
                None => true,
                Some((bp, bv)) => v > *bv || (v == *bv && lex_less(&point, bp)),
            };
            if replace {
                best = Some((point, v));
            }
            let mut d = axes.len();
            loop {
                if d == 0 {
                    break 'outer;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < axes[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
        best.unwrap()
    }

    #[test]
    fn argmax_breaks_corner_tie_lexicographically() {
        // a1 (1 - a2) + a2 (1 - a1) peaks at both (0,1) and (1,0)
        let f = |a: &[f64]| a[0] * (1.0 - a[1]) + a[1] * (1.0 - a[0]);
        let spec = GridSpec::new(101).with_refinement(0, 0.1);
        let (point, value) = grid_argmax(f, &[(0.0, 1.0), (0.0, 1.0)], &spec).unwrap();
        let axes = vec![linspace(0.0, 1.0, 101), linspace(0.0, 1.0, 101)];
        let (bp, bv) = brute_scan(f, &axes);
        assert_eq!(point, bp);
        assert_eq!(value, bv);
        assert_eq!(point, vec![0.0, 1.0]);
        assert!((value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn argmax_of_constant_is_smallest_point() {
        let spec = GridSpec::new(11);
        let (point, value) = grid_argmax(|_| 2.0, &[(0.25, 0.75), (0.5, 1.0)], &spec).unwrap();
        assert_eq!(point, vec![0.25, 0.5]);
        assert_eq!(value, 2.0);
    }

    #[test]
    fn refinement_converges_to_interior_peak() {
        let f = |x: &[f64]| -(x[0] - 0.3) * (x[0] - 0.3);
        let spec = GridSpec::new(11).with_refinement(2, 0.1);
        let (point, _) = grid_argmax(f, &[(0.0, 1.0)], &spec).unwrap();
        assert!((point[0] - 0.3).abs() < 1e-3, "point = {point:?}");
    }

    #[test]
    fn refinement_never_decreases_the_value() {
        let f = |x: &[f64]| (x[0] * 7.3).sin() + (x[1] * 3.1).cos();
        let base = GridSpec::new(13).with_refinement(0, 0.2);
        let mut last = f64::NEG_INFINITY;
        for rounds in 0..4 {
            let spec = GridSpec {
                refinement_rounds: rounds,
                ..base
            };
            let (_, v) = grid_argmax(f, &[(0.0, 1.0), (0.0, 1.0)], &spec).unwrap();
            assert!(v >= last, "rounds {rounds}: {v} < {last}");
            last = v;
        }
    }

    #[test]
    fn argmax_is_reproducible() {
        let f = |x: &[f64]| (x[0] * 5.0).sin() * (x[1] * 2.0).cos();
        let spec = GridSpec::new(31);
        let a = grid_argmax(f, &[(0.0, 1.0), (0.0, 1.0)], &spec).unwrap();
        let b = grid_argmax(f, &[(0.0, 1.0), (0.0, 1.0)], &spec).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }

    #[test]
    fn argmax_reports_non_finite_point() {
        let f = |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { x[0] };
        let err = grid_argmax(f, &[(0.0, 1.0)], &GridSpec::new(11)).unwrap_err();
        match err {
            Error::NonFinite { point, .. } => assert!(point[0] > 0.5),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn low_discrepancy_is_deterministic_and_in_cube() {
        let a = unit_low_discrepancy(3, 50);
        let b = unit_low_discrepancy(3, 50);
        assert_eq!(a, b);
        for p in &a {
            assert_eq!(p.len(), 3);
            for &x in p {
                assert!((0.0..1.0).contains(&x));
            }
        }
        // successive points actually move
        assert!(a[0] != a[1]);
    }

    #[test]
    fn seeded_low_discrepancy_rotates_but_stays_deterministic() {
        let base = unit_low_discrepancy_seeded(2, 20, 0);
        assert_eq!(base, unit_low_discrepancy(2, 20), "seed 0 is the canonical sequence");
        let shifted = unit_low_discrepancy_seeded(2, 20, 7);
        assert_eq!(shifted, unit_low_discrepancy_seeded(2, 20, 7));
        assert_ne!(base, shifted, "a nonzero seed must move the shift");
        for p in &shifted {
            for &x in p {
                assert!((0.0..1.0).contains(&x));
            }
        }
    }

    proptest! {
        #[test]
        fn clamp_is_idempotent_and_bounded(x in -10.0f64..10.0, lo in -5.0f64..0.0, w in 0.0f64..5.0) {
            let hi = lo + w;
            let c = clamp(x, lo, hi);
            prop_assert!(c >= lo && c <= hi);
            prop_assert_eq!(clamp(c, lo, hi), c);
        }

        #[test]
        fn clamp_is_monotone(x in -10.0f64..10.0, y in -10.0f64..10.0) {
            let (a, b) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(clamp(a, 0.0, 1.0) <= clamp(b, 0.0, 1.0));
        }
    }
}
