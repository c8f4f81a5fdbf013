//! One-dimensional minimizers used by the gain and angle searches.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// A located minimum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

impl Minimum {
    fn keep_lower(self, other: Minimum) -> Minimum {
        if other.value < self.value {
            other
        } else {
            self
        }
    }
}

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping once the
/// bracket is narrower than `tol`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Minimum {
    if b < a {
        std::mem::swap(&mut a, &mut b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = Minimum { x: c, value: fc }.keep_lower(Minimum { x: d, value: fd });
    // Each step shrinks the bracket by the golden ratio; 200 steps cover
    // any finite interval down to rounding.
    for _ in 0..200 {
        if (b - a) <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            best = best.keep_lower(Minimum { x: c, value: fc });
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            best = best.keep_lower(Minimum { x: d, value: fd });
        }
    }
    best
}

/// Evaluates `f` on `points`, then refines by golden section between the
/// neighbours of every grid local minimum. The result is never worse than
/// the best grid value.
pub fn grid_then_golden<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: f64) -> Minimum {
    assert!(!points.is_empty(), "grid must contain at least one point");
    let values: Vec<f64> = points.iter().map(|&x| f(x)).collect();
    let k = argmin(&values);
    let mut best = Minimum {
        x: points[k],
        value: values[k],
    };
    if points.len() < 2 {
        return best;
    }
    let last = points.len() - 1;
    for m in local_minima(&values, k, false) {
        let lo = points[m.saturating_sub(1)];
        let hi = points[(m + 1).min(last)];
        best = best.keep_lower(golden_section(&mut f, lo, hi, tol));
    }
    best
}

/// Like [`grid_then_golden`] for a function of period `period`, sampled on
/// `n` evenly spaced points of `[0, period)`. Refinement brackets wrap.
pub fn periodic_grid_then_golden<F: FnMut(f64) -> f64>(mut f: F, period: f64, n: usize, tol: f64) -> Minimum {
    assert!(n >= 1, "grid must contain at least one point");
    let step = period / n as f64;
    let values: Vec<f64> = (0..n).map(|k| f(k as f64 * step)).collect();
    let k = argmin(&values);
    let mut best = Minimum {
        x: k as f64 * step,
        value: values[k],
    };
    for m in local_minima(&values, k, true) {
        let centre = m as f64 * step;
        let refined = golden_section(&mut f, centre - step, centre + step, tol);
        best = best.keep_lower(Minimum {
            x: refined.x.rem_euclid(period),
            value: refined.value,
        });
    }
    best
}

/// Most basins refined per search besides the grid minimum.
const MAX_EXTRA_BASINS: usize = 3;

/// Grid indices worth refining: `best` plus the lowest few points that sit
/// clearly below their left neighbour and not above their right one.
/// Differences within rounding noise of the grid values are ignored, so
/// flat or noisy stretches do not multiply the work.
pub(crate) fn local_minima(values: &[f64], best: usize, periodic: bool) -> Vec<usize> {
    let n = values.len();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let noise = 1e-12 * scale;
    let mut found: Vec<usize> = (0..n)
        .filter(|&m| m != best)
        .filter(|&m| {
            let left = match (m, periodic) {
                (0, false) => f64::INFINITY,
                (0, true) => values[n - 1],
                _ => values[m - 1],
            };
            let right = match (m + 1 == n, periodic) {
                (true, false) => f64::INFINITY,
                (true, true) => values[0],
                _ => values[m + 1],
            };
            values[m] < left - noise && values[m] <= right + noise
        })
        .collect();
    found.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    found.truncate(MAX_EXTRA_BASINS);
    found.insert(0, best);
    found
}

pub fn argmin(values: &[f64]) -> usize {
    let mut k = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[k] {
            k = i;
        }
    }
    k
}

/// `n` points evenly spaced on `[start, stop]`, endpoints included.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn golden_finds_parabola_minimum() {
        let m = golden_section(|x| (x - 0.3).powi(2) + 2.0, -1.0, 4.0, 1e-10);
        assert_abs_diff_eq!(m.x, 0.3, epsilon = 1e-7);
        assert_abs_diff_eq!(m.value, 2.0, epsilon = 1e-15);
        let swapped = golden_section(|x| (x - 0.3).powi(2), 4.0, -1.0, 1e-10);
        assert_abs_diff_eq!(swapped.x, 0.3, epsilon = 1e-7);
    }

    #[test]
    fn golden_handles_boundary_minimum() {
        let m = golden_section(|x| x, 1.0, 2.0, 1e-12);
        assert_abs_diff_eq!(m.x, 1.0, epsilon = 1e-11);
    }

    #[test]
    fn grid_escapes_local_minimum() {
        // two wells, the deeper one at x = 2
        let f = |x: f64| ((x + 1.0).powi(2) - 0.5).min((x - 2.0).powi(2) - 1.0);
        let m = grid_then_golden(f, &linspace(-3.0, 3.0, 61), 1e-10);
        assert_abs_diff_eq!(m.x, 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m.value, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn grid_refines_every_basin() {
        // Two nearly equal wells; the grid samples the shallower one closer
        // to its bottom, so only refining both finds the deeper one.
        let f = |x: f64| (1.0 - (-(x - 0.0).powi(2) * 40.0).exp()).min(1.0 - 1.01 * (-(x - 1.03).powi(2) * 40.0).exp());
        let m = grid_then_golden(f, &linspace(-2.0, 2.0, 21), 1e-12);
        assert_abs_diff_eq!(m.x, 1.03, epsilon = 1e-3);
        assert!(m.value < -0.0099);
    }

    #[test]
    fn flat_grid_refines_once() {
        let mut calls = 0;
        grid_then_golden(
            |_| {
                calls += 1;
                1.0
            },
            &linspace(0.0, 1.0, 50),
            1e-6,
        );
        assert!(calls < 50 + 40);
    }

    #[test]
    fn periodic_refinement_wraps_past_zero() {
        let period = std::f64::consts::PI;
        let target = period - 0.01;
        let m = periodic_grid_then_golden(|x| -(2.0 * (x - target)).cos(), period, 16, 1e-12);
        assert_abs_diff_eq!(m.value, -1.0, epsilon = 1e-14);
        assert!((m.x - target).abs() < 1e-6 || (m.x - target + period).abs() < 1e-6);
        assert!((0.0..period).contains(&m.x));
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
        let v = linspace(0.05, 0.95, 101);
        assert_eq!(*v.last().unwrap(), 0.95);
    }
}
