use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quantity of each product obtained from one log.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductBasket(Vec<u32>);

impl ProductBasket {
    pub fn new(quantities: Vec<u32>) -> Self {
        ProductBasket(quantities)
    }

    pub fn zeros(len: usize) -> Self {
        ProductBasket(vec![0; len])
    }

    pub fn quantities(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All-zero basket: the log yields only chips.
    pub fn is_all_zero(&self) -> bool {
        self.0.iter().all(|&q| q == 0)
    }

    /// Componentwise mean of `baskets`, each component rounded half-up.
    ///
    /// Computed in integers: `floor((2 * sum + n) / (2 * n))`.
    pub fn rounded_mean<'a, I>(baskets: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a ProductBasket>,
    {
        let mut sums: Option<Vec<u64>> = None;
        let mut n = 0u64;
        for b in baskets {
            let s = sums.get_or_insert_with(|| vec![0; b.len()]);
            if s.len() != b.len() {
                return Err(Error::invalid(format!(
                    "basket length mismatch: {} vs {}",
                    s.len(),
                    b.len()
                )));
            }
            for (acc, &q) in s.iter_mut().zip(&b.0) {
                *acc += u64::from(q);
            }
            n += 1;
        }
        let sums = sums.ok_or_else(|| Error::invalid("cannot average zero baskets"))?;
        Ok(ProductBasket(
            sums.into_iter()
                .map(|s| ((2 * s + n) / (2 * n)) as u32)
                .collect(),
        ))
    }
}

impl From<Vec<u32>> for ProductBasket {
    fn from(v: Vec<u32>) -> Self {
        ProductBasket(v)
    }
}

impl fmt::Display for ProductBasket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, q) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{q}")?;
        }
        Ok(())
    }
}
