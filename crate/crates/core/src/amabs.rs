//! Adaptive Moving Average Batch Size controller.
//!
//! The controller watches the sequence of objective values, smooths it with a
//! weighted moving average (linearly decaying weights over a window of W
//! values), and measures relative progress between consecutive averages.
//! After C consecutive iterations whose progress falls below the threshold,
//! the batch size grows by the expansion factor, capped at the dataset size.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Batch;

/// Tuning knobs of the controller. Defaults follow common practice for choice
/// model estimation: W = 10, threshold 1%, two strikes, doubling growth,
/// initial batch of 1000 observations.
#[derive(Debug, Clone, PartialEq)]
pub struct AmabsConfig {
    /// Window size W of the weighted moving average.
    pub window: usize,
    /// Relative-improvement threshold (an iteration with less progress than
    /// this counts as unsuccessful).
    pub threshold: f64,
    /// Consecutive unsuccessful iterations tolerated before growing.
    pub failure_cap: u32,
    /// Batch growth factor tau (> 1).
    pub expansion: f64,
    /// Initial batch size, clamped to the dataset size at run start.
    pub initial_batch: usize,
}

impl Default for AmabsConfig {
    fn default() -> Self {
        AmabsConfig {
            window: 10,
            threshold: 0.01,
            failure_cap: 2,
            expansion: 2.0,
            initial_batch: 1000,
        }
    }
}

impl AmabsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::Config("window must be >= 1".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::Config("improvement threshold must be > 0".into()));
        }
        if self.failure_cap < 1 {
            return Err(Error::Config("failure cap must be >= 1".into()));
        }
        if !(self.expansion > 1.0) {
            return Err(Error::Config("expansion factor must be > 1".into()));
        }
        if self.initial_batch < 1 {
            return Err(Error::Config("initial batch must be >= 1".into()));
        }
        Ok(())
    }
}

/// Weighted moving average over the most recent `min(len, window)` values,
/// newest value carrying the largest weight (m, m-1, ..., 1).
pub fn wma(history: &[f64], window: usize) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::EmptyInput("wma of empty history"));
    }
    let m = history.len().min(window);
    let mut num = 0.0;
    for i in 0..m {
        let weight = (m - i) as f64;
        num += weight * history[history.len() - 1 - i];
    }
    let denom = (m * (m + 1)) as f64 / 2.0;
    Ok(num / denom)
}

/// Relative progress between two consecutive smoothed values:
/// `(prev - curr) / prev`. Positive when a (negative) log likelihood moved
/// toward zero.
pub fn improvement(wma_prev: f64, wma_curr: f64) -> Result<f64> {
    if wma_prev == 0.0 {
        return Err(Error::Config(
            "improvement undefined: previous WMA is zero".into(),
        ));
    }
    Ok((wma_prev - wma_curr) / wma_prev)
}

/// Mutable controller state owned by a single optimization run.
#[derive(Debug, Clone)]
pub struct AmabsState {
    config: AmabsConfig,
    history: Vec<f64>,
    counter: u32,
    batch_size: usize,
    n_max: usize,
    prev_wma: Option<f64>,
}

impl AmabsState {
    pub fn new(config: AmabsConfig, n_max: usize) -> Result<Self> {
        config.validate()?;
        if n_max < 1 {
            return Err(Error::Config("dataset size must be >= 1".into()));
        }
        let batch_size = config.initial_batch.min(n_max);
        Ok(AmabsState {
            config,
            history: Vec::new(),
            counter: 0,
            batch_size,
            n_max,
            prev_wma: None,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn counter(&self) -> u32 {
        self.counter
    }

    /// Jump straight to the full dataset (used when a convergence signal on a
    /// partial batch has to be re-verified on all data). The objective
    /// history is kept; the failure counter restarts.
    pub fn promote_to_full(&mut self) {
        self.batch_size = self.n_max;
        self.counter = 0;
    }

    /// Feeds the objective value observed this iteration and returns the
    /// batch size for the next one. Growth fires only after `failure_cap`
    /// consecutive below-threshold improvements; the counter resets on every
    /// successful iteration and on every growth.
    pub fn step(&mut self, value: f64) -> Result<usize> {
        self.history.push(value);
        let current = wma(&self.history, self.config.window)?;
        if let Some(prev) = self.prev_wma {
            let progress = improvement(prev, current)?;
            if progress < self.config.threshold {
                self.counter += 1;
            } else {
                self.counter = 0;
            }
            if self.counter == self.config.failure_cap {
                self.counter = 0;
                let grown = (self.config.expansion * self.batch_size as f64).ceil() as usize;
                self.batch_size = grown.min(self.n_max);
            }
        }
        self.prev_wma = Some(current);
        Ok(self.batch_size)
    }
}

/// Draws `n_prime` distinct row indices uniformly (partial Fisher-Yates over
/// 0..n). A fresh call consumes the generator, so successive draws differ
/// while staying reproducible under the seed.
pub fn sample_batch(n: usize, n_prime: usize, rng: &mut ChaCha8Rng) -> Result<Batch> {
    if n_prime < 1 || n_prime > n {
        return Err(Error::Config(format!(
            "batch size {n_prime} out of range 1..={n}"
        )));
    }
    debug_assert!(n <= u32::MAX as usize);
    let mut pool: Vec<u32> = (0..n as u32).collect();
    for i in 0..n_prime {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(n_prime);
    Ok(Batch::from_raw(pool))
}
