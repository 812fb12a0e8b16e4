//! Datasets of logs and seeded train/test partitioning.
//!
//! Partitions are drawn with ChaCha8 seeded from the 64-bit `seed`, using the
//! run index as the stream number, so every `(seed, run)` pair gives the same
//! shuffle on every platform.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::predictor::LogRecord;

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T = f64> {
    records: Vec<LogRecord<T>>,
    product_count: usize,
    product_names: Option<Vec<String>>,
}

impl<T> Dataset<T> {
    pub fn new(
        records: Vec<LogRecord<T>>,
        product_count: usize,
        product_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if let Some(names) = &product_names {
            if names.len() != product_count {
                return Err(Error::invalid(format!(
                    "{} product names for {product_count} products",
                    names.len()
                )));
            }
        }
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if r.basket.len() != product_count {
                return Err(Error::invalid(format!(
                    "log '{}' has {} products, expected {product_count}",
                    r.id,
                    r.basket.len()
                )));
            }
            if !seen.insert(r.id.as_str()) {
                return Err(Error::invalid(format!("duplicate log id '{}'", r.id)));
            }
        }
        Ok(Dataset {
            records,
            product_count,
            product_names,
        })
    }

    pub fn records(&self) -> &[LogRecord<T>] {
        &self.records
    }

    pub fn records_mut(&mut self) -> &mut [LogRecord<T>] {
        &mut self.records
    }

    pub fn into_records(self) -> Vec<LogRecord<T>> {
        self.records
    }

    pub fn product_count(&self) -> usize {
        self.product_count
    }

    pub fn product_names(&self) -> Option<&[String]> {
        self.product_names.as_deref()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn with_records(&self, records: Vec<LogRecord<T>>) -> Self
    where
        T: Clone,
    {
        Dataset {
            records,
            product_count: self.product_count,
            product_names: self.product_names.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub runs: usize,
    pub drop_empty_baskets: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.6,
            seed: 0,
            runs: 10,
            drop_empty_baskets: false,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "train fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.runs == 0 {
            return Err(Error::invalid("runs must be at least 1"));
        }
        Ok(())
    }
}

/// Shuffled record order for one run.
pub fn permutation(n: usize, seed: u64, run_index: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

/// Seeded random partition: the first `floor(n * train_fraction)` shuffled
/// records train, the rest test.
pub fn split<T: Clone>(
    ds: &Dataset<T>,
    spec: &SplitSpec,
    run_index: usize,
) -> Result<(Dataset<T>, Dataset<T>)> {
    spec.validate()?;
    if run_index >= spec.runs {
        return Err(Error::invalid(format!(
            "run index {run_index} out of range for {} runs",
            spec.runs
        )));
    }
    let n = ds.len();
    if n < 2 {
        return Err(Error::invalid(format!("cannot split {n} records")));
    }
    let n_train = (n as f64 * spec.train_fraction).floor() as usize;
    let order = permutation(n, spec.seed, run_index);
    let pick = |idx: &[usize]| idx.iter().map(|&i| ds.records[i].clone()).collect();
    Ok((
        ds.with_records(pick(&order[..n_train])),
        ds.with_records(pick(&order[n_train..])),
    ))
}

/// Removes logs with an all-zero basket.
pub fn drop_empty<T: Clone>(ds: &Dataset<T>) -> Dataset<T> {
    ds.with_records(
        ds.records
            .iter()
            .filter(|r| !r.basket.is_all_zero())
            .cloned()
            .collect(),
    )
}
