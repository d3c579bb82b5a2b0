//! Numeric helpers shared by the experiment modules: log-space probability
//! accumulation, binomial log-pmfs, Wilson score intervals, deterministic
//! seed derivation, and small derivative-free optimizers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// z-value of the two-sided 95% normal interval.
pub const Z_95: f64 = 1.959963984540054;

/// `ln Σ exp(x_i)`, stable for very negative terms. Empty input gives `-∞`.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms
        .iter()
        .copied()
        .filter(|x| x.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = terms
        .iter()
        .filter(|x| x.is_finite())
        .map(|&x| (x - max).exp())
        .sum();
    max + sum.ln()
}

/// Log-pmfs `ln P(Bin(n, p) = k)` for `k = 0..=n`, via the incremental
/// recurrence on log binomial coefficients (exact to ~1e-12 relative).
pub fn binomial_log_pmf_table(n: u64, p: f64) -> Vec<f64> {
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut log_choose = 0.0;
    for k in 0..=n {
        let term = if p == 0.0 {
            if k == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else if p == 1.0 {
            if k == n {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            log_choose + k as f64 * lp + (n - k) as f64 * lq
        };
        out.push(term);
        if k < n {
            log_choose += ((n - k) as f64 / (k + 1) as f64).ln();
        }
    }
    out
}

/// Wilson 95% score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives an independent per-trial seed from `(master, trial_index)`.
///
/// Extending the budget appends trials without reshuffling earlier ones,
/// and the derived streams do not depend on worker count or scheduling.
pub fn derive_seed(master: u64, trial_index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(trial_index.wrapping_mul(0xa076_1d64_78bd_642f)))
}

/// Deterministic RNG for a `(master, trial)` pair.
pub fn trial_rng(master: u64, trial_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, trial_index))
}

/// Golden-section minimization of `f` on `[a, b]`.
///
/// Converges to a local minimizer for functions that are unimodal on the
/// bracket; endpoints are evaluated too so boundary minima are kept.
pub fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_iters: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut best = (lo, f(lo));
    let fb = f(hi);
    if fb < best.1 {
        best = (hi, fb);
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iters {
        if hi - lo < tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Nelder-Mead minimization in low dimension, used to refine simplex-grid
/// scans. Infinite objective values (constraint penalties) are handled by
/// ordinary comparison.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    scale: f64,
    max_iters: usize,
) -> (Vec<f64>, f64) {
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = start.to_vec();
    let f0 = f(&v0);
    simplex.push((v0, f0));
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += scale;
        let fv = f(&v);
        simplex.push((v, fv));
    }
    let cmp = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| {
        a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal)
    };
    for _ in 0..max_iters {
        simplex.sort_by(cmp);
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if worst.is_finite() && (worst - best).abs() < 1e-14 {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(v, _)| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let reflect: Vec<f64> = (0..dim)
            .map(|j| centroid[j] + (centroid[j] - simplex[dim].0[j]))
            .collect();
        let fr = f(&reflect);
        if fr < simplex[0].1 {
            let expand: Vec<f64> = (0..dim)
                .map(|j| centroid[j] + 2.0 * (centroid[j] - simplex[dim].0[j]))
                .collect();
            let fe = f(&expand);
            simplex[dim] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflect, fr);
        } else {
            let contract: Vec<f64> = (0..dim)
                .map(|j| centroid[j] + 0.5 * (simplex[dim].0[j] - centroid[j]))
                .collect();
            let fc = f(&contract);
            if fc < simplex[dim].1 {
                simplex[dim] = (contract, fc);
            } else {
                let best0 = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = (0..dim)
                        .map(|j| best0[j] + 0.5 * (entry.0[j] - best0[j]))
                        .collect();
                    let fs = f(&shrunk);
                    *entry = (shrunk, fs);
                }
            }
        }
    }
    simplex.sort_by(cmp);
    simplex.swap_remove(0)
}

/// Enumerates all compositions of `total` into `parts` non-negative integers,
/// in lexicographic order.
pub fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current = vec![0u64; parts];
    fn rec(total: u64, idx: usize, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if idx == current.len() - 1 {
            current[idx] = total;
            out.push(current.clone());
            return;
        }
        for v in 0..=total {
            current[idx] = v;
            rec(total - v, idx + 1, current, out);
        }
    }
    if parts == 0 {
        return out;
    }
    rec(total, 0, &mut current, &mut out);
    out
}

/// Number of compositions of `total` into `parts` parts, saturating.
pub fn composition_count(total: u64, parts: usize) -> u128 {
    // C(total + parts - 1, parts - 1)
    if parts == 0 {
        return 0;
    }
    let k = (parts - 1) as u128;
    let n = total as u128 + k;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i);
        acc /= i + 1;
        if acc > u128::MAX / 2 {
            return u128::MAX;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_handles_tiny_probabilities() {
        let terms = [-700.0, -701.0];
        let got = log_sum_exp(&terms);
        let expected = -700.0 + (1.0 + (-1.0f64).exp()).ln();
        assert!((got - expected).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn binomial_table_sums_to_one() {
        let table = binomial_log_pmf_table(200, 2.0 / 3.0);
        assert!((log_sum_exp(&table)).abs() < 1e-10);
    }

    #[test]
    fn binomial_matches_direct_small_case() {
        // P(Bin(4, 1/2) = 2) = 6/16.
        let table = binomial_log_pmf_table(4, 0.5);
        assert!((table[2].exp() - 0.375).abs() < 1e-12);
    }

    #[test]
    fn wilson_interval_contains_point_estimate() {
        let (lo, hi) = wilson_interval(10, 100);
        assert!(lo < 0.1 && 0.1 < hi);
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        let a = derive_seed(42, 0);
        let b = derive_seed(42, 1);
        assert_ne!(a, b);
        assert_eq!(a, derive_seed(42, 0));
    }

    #[test]
    fn golden_section_finds_boundary_minimum() {
        let (x, v) = golden_section_min(|x| x, 0.0, 1.0, 1e-12, 200);
        assert!(x < 1e-10 && v < 1e-10);
        let (x, _) = golden_section_min(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-12, 200);
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn compositions_cover_simplex_grid() {
        let all = compositions(3, 2);
        assert_eq!(all.len(), 4);
        assert_eq!(composition_count(3, 2), 4);
        assert_eq!(composition_count(200, 3), 201 * 202 / 2);
    }

    #[test]
    fn nelder_mead_minimizes_quadratic() {
        let (x, v) = nelder_mead(
            |p| (p[0] - 1.0).powi(2) + (p[1] + 2.0).powi(2),
            &[0.0, 0.0],
            0.5,
            500,
        );
        assert!(v < 1e-10, "v = {v}");
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] + 2.0).abs() < 1e-5);
    }
}
