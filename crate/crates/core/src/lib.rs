//! Categorical encodings for a protected attribute, binary classifiers, and
//! group-fairness auditing of the resulting accuracy/fairness trade-off.

pub mod audit;
pub mod dataset;
pub mod encoders;
pub mod error;
pub mod features;
pub mod harness;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};

/// Small datasets shared by tests and examples.
#[doc(hidden)]
pub mod fixtures {
    use crate::dataset::{parse_csv, ColumnSchema, Dataset, Role};

    pub const ETHNIC_SAMPLE_CSV: &str = "Ethnic,Label\n\
        African-American,1\n\
        Caucasian,1\n\
        Caucasian,0\n\
        Caucasian,0\n\
        Hispanic,0\n";

    pub fn ethnic_sample_schema() -> Vec<ColumnSchema> {
        vec![
            ColumnSchema::categorical("Ethnic", Role::Protected),
            ColumnSchema::target("Label"),
        ]
    }

    /// Five rows, three ethnic groups with positive rates 1, 1/3 and 0.
    pub fn ethnic_sample() -> Dataset {
        parse_csv(ETHNIC_SAMPLE_CSV.as_bytes(), &ethnic_sample_schema()).expect("fixture parses")
    }
}
