//! Exact weak-coupling coefficient tables `a_{n,j}` for the lattice
//! instanton and Blasius difference equations.

mod blasius;
mod instanton;
mod io;

pub use blasius::generate_blasius;
pub use instanton::generate_instanton;
pub use io::{load_table, save_table, table_from_json, table_to_json, FormatError};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::exact::{PowerSeries, Rational};

pub const GENERATOR_VERSION: &str = concat!("strongcoupling ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    Instanton,
    Blasius,
}

impl std::fmt::Display for ModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelId::Instanton => "instanton",
            ModelId::Blasius => "blasius",
        })
    }
}

impl std::str::FromStr for ModelId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "instanton" => Ok(ModelId::Instanton),
            "blasius" => Ok(ModelId::Blasius),
            other => Err(format!("unknown model {other:?} (expected instanton or blasius)")),
        }
    }
}

/// One order `j` of the table: `a_{n,j}` over all sites `n >= 0`.
///
/// Sites below `support_lo` hold 0, sites in `support_lo..=support_hi` are
/// stored explicitly, and every site beyond `support_hi` holds
/// `tail + slope * n`. Only the Blasius zeroth order (`a_{n,0} = n`) has a
/// nonzero slope. An empty support is encoded as `support_hi < support_lo`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientRow {
    pub j: usize,
    pub support_lo: usize,
    pub support_hi: usize,
    pub values: Vec<Rational>,
    pub tail: Rational,
    pub slope: Rational,
}

impl CoefficientRow {
    pub(crate) fn new(j: usize, support_lo: usize, values: Vec<Rational>, tail: Rational) -> Self {
        let support_hi = support_lo + values.len() - 1;
        Self { j, support_lo, support_hi, values, tail, slope: Rational::zero() }
    }

    pub(crate) fn empty(j: usize, tail: Rational, slope: Rational) -> Self {
        Self { j, support_lo: 1, support_hi: 0, values: Vec::new(), tail, slope }
    }

    /// Value at site `n >= 0`.
    pub fn at(&self, n: usize) -> Rational {
        if n < self.support_lo {
            Rational::zero()
        } else if n <= self.support_hi {
            self.values[n - self.support_lo].clone()
        } else {
            &self.tail + &self.slope * Rational::from_integer(n.into())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TableMetadata {
    pub generator: String,
    /// Left empty by default so that regenerated tables are byte-identical.
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    pub model: ModelId,
    pub max_order: usize,
    pub rows: Vec<CoefficientRow>,
    pub metadata: TableMetadata,
}

impl CoefficientTable {
    pub(crate) fn new(model: ModelId, rows: Vec<CoefficientRow>) -> Self {
        Self {
            model,
            max_order: rows.len() - 1,
            rows,
            metadata: TableMetadata { generator: GENERATOR_VERSION.to_string(), timestamp: None },
        }
    }

    pub fn generate(model: ModelId, order: usize) -> Self {
        match model {
            ModelId::Instanton => generate_instanton(order),
            ModelId::Blasius => generate_blasius(order),
        }
    }

    pub fn coeff(&self, n: usize, j: usize) -> Rational {
        self.rows[j].at(n)
    }

    /// `a_{n,0..=max_order}` at a fixed site.
    pub fn site_row(&self, n: usize) -> Vec<Rational> {
        self.rows.iter().map(|r| r.at(n)).collect()
    }

    /// The weak-coupling series `f_n(δ)` at site `n`.
    pub fn site_series(&self, n: usize) -> PowerSeries {
        PowerSeries::new(self.site_row(n))
    }
}
