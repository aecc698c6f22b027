//! Statistics for trial logs: Wilson intervals, Fisher's exact test,
//! chi-square independence, Cohen's h, pressure-transition analysis, and
//! the convergence-bound instrumentation. Everything is a pure function;
//! the special functions live in [`special`].

pub mod special;

#[cfg(test)]
mod tests;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use special::{chi_square_sf, inv_norm, ln_choose};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("sample size is zero")]
    ZeroSample,
    #[error("more successes than trials")]
    MoreSuccessesThanTrials,
    #[error("table has an all-zero margin")]
    DegenerateTable,
    #[error("need at least two rows")]
    NotEnoughRows,
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_ci(successes: u64, n: u64, confidence: f64) -> Result<(f64, f64), StatsError> {
    if n == 0 {
        return Err(StatsError::ZeroSample);
    }
    if successes > n {
        return Err(StatsError::MoreSuccessesThanTrials);
    }
    let z = inv_norm(1.0 - (1.0 - confidence) / 2.0);
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

/// Two-sided Fisher's exact test on a 2x2 table, summing all tables with
/// the observed margins whose probability does not exceed the observed
/// table's (with a small relative slack against rounding).
pub fn fisher_exact_2x2(a: u64, b: u64, c: u64, d: u64) -> Result<f64, StatsError> {
    let row1 = a + b;
    let row2 = c + d;
    let col1 = a + c;
    let col2 = b + d;
    if row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0 {
        return Err(StatsError::DegenerateTable);
    }
    let n = row1 + row2;
    let ln_denom = ln_choose(n, col1);
    let table_prob = |x: u64| (ln_choose(row1, x) + ln_choose(row2, col1 - x) - ln_denom).exp();

    let lo = col1.saturating_sub(row2);
    let hi = row1.min(col1);
    let observed = table_prob(a);
    let p: f64 = (lo..=hi)
        .map(table_prob)
        .filter(|&prob| prob <= observed * (1.0 + 1e-7))
        .sum();
    Ok(p.min(1.0))
}

/// Pearson chi-square test of independence on a k x 2 table, with k - 1
/// degrees of freedom.
pub fn chi_square_independence(table: &[[u64; 2]]) -> Result<(f64, f64), StatsError> {
    if table.len() < 2 {
        return Err(StatsError::NotEnoughRows);
    }
    let col_totals = table.iter().fold([0u64; 2], |acc, row| {
        [acc[0] + row[0], acc[1] + row[1]]
    });
    let grand: u64 = col_totals.iter().sum();
    if grand == 0 {
        return Err(StatsError::DegenerateTable);
    }
    let mut statistic = 0.0;
    for row in table {
        let row_total = row[0] + row[1];
        for (j, &observed) in row.iter().enumerate() {
            let expected = row_total as f64 * col_totals[j] as f64 / grand as f64;
            if expected <= 0.0 {
                return Err(StatsError::DegenerateTable);
            }
            let diff = observed as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    let df = table.len() as u64 - 1;
    Ok((statistic, chi_square_sf(statistic, df)))
}

/// Cohen's h effect size for two proportions.
pub fn cohens_h(p1: f64, p2: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p1) && (0.0..=1.0).contains(&p2));
    2.0 * p1.sqrt().asin() - 2.0 * p2.sqrt().asin()
}

/// Tick-to-tick pressure transition counts over one or more histories.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TransitionStats {
    pub improved: u64,
    pub degraded: u64,
    pub unchanged: u64,
    /// Mean pressure drop over improved transitions; 0 when none improved.
    pub mean_improvement: f64,
}

impl TransitionStats {
    pub fn total(&self) -> u64 {
        self.improved + self.degraded + self.unchanged
    }
}

/// Classify every consecutive pressure pair with exact comparison.
/// Pressure values are deterministic sums of counts and fixed weights, so
/// exact equality is the right test for "unchanged".
pub fn analyze_transitions<'a>(
    histories: impl IntoIterator<Item = &'a [f64]>,
) -> TransitionStats {
    let mut stats = TransitionStats::default();
    let mut improvement_sum = 0.0;
    for history in histories {
        for pair in history.windows(2) {
            let (prev, next) = (pair[0], pair[1]);
            if next < prev {
                stats.improved += 1;
                improvement_sum += prev - next;
            } else if next > prev {
                stats.degraded += 1;
            } else {
                stats.unchanged += 1;
            }
        }
    }
    if stats.improved > 0 {
        stats.mean_improvement = improvement_sum / stats.improved as f64;
    }
    stats
}

/// Per-tick trace needed by the convergence instrumentation; the harness
/// builds these from tick reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TickTrace {
    /// Global pressure (regions plus any shared term) around the tick;
    /// patch deltas are measured against this quantity.
    pub pressure_before: f64,
    pub pressure_after: f64,
    pub region_pressures_before: Vec<f64>,
    pub region_pressures_after: Vec<f64>,
    pub activated: Vec<usize>,
    pub applied_regions: Vec<usize>,
    /// Measured deltas of the applied patches (negative).
    pub applied_deltas: Vec<f64>,
}

/// Measured constants of the convergence bound: active ticks must not
/// exceed P0 / (delta_min - (n-1) * epsilon).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCheck {
    pub p0: f64,
    /// Minimum |delta| over all applied patches.
    pub delta_min: f64,
    /// Max pressure change observed on a region no patch touched that
    /// tick. Exactly 0 when per-region pressure is separable.
    pub epsilon: f64,
    pub n_regions: usize,
    pub bound: f64,
    pub observed_active_ticks: u64,
}

impl ConvergenceCheck {
    pub fn holds(&self) -> bool {
        self.bound.is_finite() && (self.observed_active_ticks as f64) <= self.bound
    }
}

/// Instrument one trial's traces. Returns `None` when no patch was applied
/// (the bound's constants are undefined there).
pub fn convergence_check(initial_pressure: f64, ticks: &[TickTrace]) -> Option<ConvergenceCheck> {
    let mut delta_min = f64::INFINITY;
    let mut epsilon: f64 = 0.0;
    let mut active_ticks = 0u64;
    let mut applied_any = false;
    let mut n_regions = 0;

    for tick in ticks {
        n_regions = n_regions.max(tick.region_pressures_before.len());
        if !tick.activated.is_empty() {
            active_ticks += 1;
        }
        for &delta in &tick.applied_deltas {
            applied_any = true;
            delta_min = delta_min.min(delta.abs());
        }
        for (region, (&before, &after)) in tick
            .region_pressures_before
            .iter()
            .zip(&tick.region_pressures_after)
            .enumerate()
        {
            if !tick.applied_regions.contains(&region) {
                epsilon = epsilon.max((after - before).abs());
            }
        }
    }
    if !applied_any {
        return None;
    }

    let denom = delta_min - (n_regions.saturating_sub(1)) as f64 * epsilon;
    let bound = if denom > 0.0 {
        initial_pressure / denom
    } else {
        f64::INFINITY
    };
    Some(ConvergenceCheck {
        p0: initial_pressure,
        delta_min,
        epsilon,
        n_regions,
        bound,
        observed_active_ticks: active_ticks,
    })
}

/// Parallel-application invariant: a tick that applies K disjoint patches
/// drops total pressure by at least K * delta_min.
pub fn parallel_drop_holds(ticks: &[TickTrace], delta_min: f64) -> bool {
    ticks.iter().all(|tick| {
        let k = tick.applied_regions.len() as f64;
        if k == 0.0 {
            return true;
        }
        tick.pressure_before - tick.pressure_after >= k * delta_min - 1e-9
    })
}
