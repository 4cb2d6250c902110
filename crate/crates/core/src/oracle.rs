//! Brute-force estimators used to check the closed forms: Monte Carlo value
//! functions, permutation-sampled Shapley values, and Gauss–Hermite
//! quadrature for the exact-logistic expectation.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::model::{GaussianLPM, OutcomeSpec};
use crate::rng::{sharded, RngSpec};
use crate::special::logistic;

/// Smallest draw count accepted by [`mc_value_function`].
pub const MIN_VALUE_DRAWS: u64 = 1000;
/// Smallest permutation count accepted by [`mc_shapley`].
pub const MIN_PERMUTATIONS: u64 = 100;
/// Absolute slack added to the `k·SE` agreement test so that estimators with
/// zero variance (e.g. linear outcomes under antithetic pairing) are not
/// failed by rounding.
pub const AGREEMENT_FLOOR: f64 = 1e-9;

const PAIRS_PER_SHARD: u64 = 4096;

/// A Monte Carlo estimate with its standard error.
///
/// `n_samples` counts independent units (antithetic pairs or permutations);
/// `std_error` is the unit standard deviation over `√n_samples`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

impl OracleEstimate {
    /// `|value − target| ≤ k·SE` (plus [`AGREEMENT_FLOOR`]).
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error + AGREEMENT_FLOOR
    }
}

/// Streaming mean/variance, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * (other.n as f64 / n as f64),
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64),
        }
    }

    fn estimate(&self) -> OracleEstimate {
        let std_error = if self.n > 1 {
            (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        OracleEstimate {
            value: self.mean,
            std_error,
            n_samples: self.n,
        }
    }
}

/// Monte Carlo estimate of `v(S)`: features outside `subset` are drawn from
/// their marginals in antithetic pairs, the rest are held at `x`.
pub fn mc_value_function(
    model: &GaussianLPM,
    outcome: &OutcomeSpec,
    subset: &[usize],
    x: &[f64],
    n: u64,
    rng: RngSpec,
) -> Result<OracleEstimate> {
    if n < MIN_VALUE_DRAWS {
        return Err(Error::TooFewSamples {
            what: "value-function draws",
            min: MIN_VALUE_DRAWS,
            got: n,
        });
    }
    model.check_sample(x)?;
    let m = model.m();
    let mut known = vec![false; m];
    for &i in subset {
        if i >= m {
            return Err(Error::IndexOutOfRange { index: i, m });
        }
        known[i] = true;
    }
    let b = model.coefficients();
    let fixed = model.conditional_eta_with(|i| known[i], x).mean;
    // `fixed` already holds βⱼμⱼ for the free features; draws add ±βⱼσⱼzⱼ.
    let scales: Vec<f64> = (0..m)
        .filter(|&i| !known[i])
        .map(|i| b[i] * model.stddevs()[i])
        .collect();

    let pairs = n / 2;
    let parts = sharded(pairs, PAIRS_PER_SHARD, |shard, range| {
        let mut draws = rng.shard(shard);
        let mut acc = Moments::default();
        for _ in range {
            let mut delta = 0.0;
            for &scale in &scales {
                delta += scale * draws.standard_normal();
            }
            acc.push(0.5 * (outcome.apply(fixed + delta) + outcome.apply(fixed - delta)));
        }
        acc
    });
    Ok(parts
        .into_iter()
        .fold(Moments::default(), Moments::merge)
        .estimate())
}

/// Permutation-sampling Shapley estimates.
///
/// Each permutation walks its coalition chain `∅ ⊂ {π₁} ⊂ … ⊂ M`, estimating
/// every coalition value from the same `n_inner` antithetic draws (common
/// random numbers) and recording the marginal contribution of each feature.
/// The per-feature estimate is the mean over permutations; its standard
/// error comes from the spread across permutations.
pub fn mc_shapley(
    model: &GaussianLPM,
    outcome: &OutcomeSpec,
    x: &[f64],
    n_perms: u64,
    n_inner: u64,
    rng: RngSpec,
) -> Result<Vec<OracleEstimate>> {
    if n_perms < MIN_PERMUTATIONS {
        return Err(Error::TooFewSamples {
            what: "permutations",
            min: MIN_PERMUTATIONS,
            got: n_perms,
        });
    }
    if n_inner < MIN_VALUE_DRAWS {
        return Err(Error::TooFewSamples {
            what: "inner draws",
            min: MIN_VALUE_DRAWS,
            got: n_inner,
        });
    }
    model.check_sample(x)?;
    let m = model.m();
    let b = model.coefficients();
    let mu = model.means();
    let s = model.stddevs();
    let pairs = (n_inner / 2) as usize;
    let base_eta = model.expected_eta();

    let parts = sharded(n_perms, 1, |perm, _| {
        let mut draws = rng.shard(perm);
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(draws.rng());

        // Centred contribution βⱼσⱼzⱼ of every feature, per pair.
        let noise: Vec<f64> = (0..pairs * m)
            .map(|k| b[k % m] * s[k % m] * draws.standard_normal())
            .collect();
        let mut plus = vec![base_eta; pairs];
        let mut minus = vec![base_eta; pairs];
        for p in 0..pairs {
            let row = &noise[p * m..(p + 1) * m];
            let d: f64 = row.iter().sum();
            plus[p] += d;
            minus[p] -= d;
        }
        let value = |plus: &[f64], minus: &[f64]| {
            plus.iter()
                .zip(minus)
                .map(|(&a, &c)| 0.5 * (outcome.apply(a) + outcome.apply(c)))
                .sum::<f64>()
                / pairs as f64
        };

        let mut marginals = vec![0.0; m];
        let mut prev = value(&plus, &minus);
        for &j in &order {
            let shift = b[j] * (x[j] - mu[j]);
            for p in 0..pairs {
                let z = noise[p * m + j];
                plus[p] += shift - z;
                minus[p] += shift + z;
            }
            let next = value(&plus, &minus);
            marginals[j] = next - prev;
            prev = next;
        }
        marginals
    });

    let mut acc = vec![Moments::default(); m];
    for marginals in parts {
        for (a, v) in acc.iter_mut().zip(marginals) {
            a.push(v);
        }
    }
    Ok(acc.iter().map(Moments::estimate).collect())
}

/// Orthonormal Hermite recurrence at `z`: returns `(p_n(z), p_{n−1}(z))`.
fn hermite_pair(n: usize, z: f64) -> (f64, f64) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    let mut p1 = PIM4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

/// Gauss–Hermite nodes and weights for the weight function `e^{−t²}`,
/// nodes in decreasing order.
///
/// Positive roots are bracketed by sign changes on a grid finer than the
/// smallest root spacing, bisected, then polished with one Newton step.
pub fn gauss_hermite_rule(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let nf = n as f64;
    let mut roots = Vec::with_capacity(n.div_ceil(2));
    let upper = (2.0 * nf + 1.0).sqrt() + 1.0;
    let step = std::f64::consts::PI / (2.0 * nf + 1.0).sqrt() / 16.0;
    let cells = (upper / step).ceil() as usize;
    let mut lo = 0.0;
    let mut f_lo = hermite_pair(n, lo).0;
    if n % 2 == 1 {
        roots.push(0.0);
        lo = 0.5 * step;
        f_lo = hermite_pair(n, lo).0;
    }
    for k in 1..=cells {
        let hi = k as f64 * step;
        if hi <= lo {
            continue;
        }
        let f_hi = hermite_pair(n, hi).0;
        if f_lo.signum() != f_hi.signum() {
            let (mut a, mut b, fa) = (lo, hi, f_lo);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if hermite_pair(n, mid).0.signum() == fa.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
        lo = hi;
        f_lo = f_hi;
    }
    debug_assert_eq!(roots.len(), n.div_ceil(2));

    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for (i, &root) in roots.iter().rev().enumerate() {
        let (p, q) = hermite_pair(n, root);
        let pp = (2.0 * nf).sqrt() * q;
        let z = if root == 0.0 { 0.0 } else { root - p / pp };
        let pp = (2.0 * nf).sqrt() * hermite_pair(n, z).1;
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    (nodes, weights)
}

fn hermite_expectation(mean: f64, variance: f64, order: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_hermite_rule(order);
    let scale = (2.0 * variance).sqrt();
    let total: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(&t, &w)| w * f(mean + scale * t))
        .sum();
    total / std::f64::consts::PI.sqrt()
}

pub const MIN_HERMITE_ORDER: usize = 20;
pub const MAX_HERMITE_ORDER: usize = 200;
const HERMITE_TOLERANCE: f64 = 1e-10;

/// `E[S(Z)]` for `Z ~ N(mean, variance)` with the exact logistic `S`.
///
/// Evaluated at `order` and `order + 1`; the two must agree to 1e-10.
pub fn gauss_hermite_expect_sigmoid(mean: f64, variance: f64, order: usize) -> Result<f64> {
    if !(MIN_HERMITE_ORDER..=MAX_HERMITE_ORDER).contains(&order) {
        return Err(Error::OrderOutOfRange {
            order,
            min: MIN_HERMITE_ORDER,
            max: MAX_HERMITE_ORDER,
        });
    }
    ensure_finite("mean", mean)?;
    ensure_finite("variance", variance)?;
    if variance < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "variance {variance} is negative"
        )));
    }
    if variance == 0.0 {
        return Ok(logistic(mean));
    }
    let value = hermite_expectation(mean, variance, order, logistic);
    let next_value = hermite_expectation(mean, variance, order + 1, logistic);
    if (value - next_value).abs() > HERMITE_TOLERANCE {
        return Err(Error::NonConvergence {
            order,
            value,
            next_order: order + 1,
            next_value,
        });
    }
    Ok(next_value)
}
