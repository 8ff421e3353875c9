//! Design-matrix assembly: the audited attribute goes through the encoder
//! under test, numeric feature columns pass through, and categorical feature
//! columns are one-hot encoded. Protected columns other than the audited one
//! and ignored columns are left out.

use ndarray::Array2;

use crate::dataset::{ColumnData, Dataset, Role};
use crate::encoders::{fit, Encoder, EncoderConfig, Phase};
use crate::error::Result;

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
enum Block {
    Numeric(String),
    Categorical(Encoder),
}

#[derive(Debug, Clone)]
pub struct FeaturePipeline {
    protected: Encoder,
    others: Vec<Block>,
}

impl FeaturePipeline {
    /// Fits every encoder on `train` only.
    pub fn fit(config: EncoderConfig, train: &Dataset, protected: &str) -> Result<Self> {
        let protected_enc = fit(config, train, protected)?;
        Self::with_encoder(protected_enc, train)
    }

    /// Uses an already fitted encoder for the audited attribute.
    pub fn with_encoder(protected: Encoder, train: &Dataset) -> Result<Self> {
        let mut others = Vec::new();
        for (schema, data) in train.columns() {
            if schema.role != Role::Feature || schema.name == protected.attribute() {
                continue;
            }
            match data {
                ColumnData::Numeric(_) => others.push(Block::Numeric(schema.name.clone())),
                ColumnData::Categorical(_) => others.push(Block::Categorical(fit(
                    EncoderConfig::one_hot(),
                    train,
                    &schema.name,
                )?)),
                ColumnData::Target(_) => {}
            }
        }
        Ok(Self { protected, others })
    }

    pub fn encoder(&self) -> &Encoder {
        &self.protected
    }

    pub fn width(&self) -> usize {
        self.protected.width()
            + self
                .others
                .iter()
                .map(|b| match b {
                    Block::Numeric(_) => 1,
                    Block::Categorical(e) => e.width(),
                })
                .sum::<usize>()
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = self.protected.column_names();
        for b in &self.others {
            match b {
                Block::Numeric(n) => names.push(n.clone()),
                Block::Categorical(e) => names.extend(e.column_names()),
            }
        }
        names
    }

    pub fn transform(&self, data: &Dataset, phase: Phase) -> Result<Array2<f64>> {
        let mut out = Array2::zeros((data.n(), self.width()));
        let mut at = 0;
        let w = self.protected.width();
        let mut block = Array2::zeros((data.n(), w));
        self.protected
            .transform_into(data, self.protected.attribute(), phase, &mut block)?;
        out.slice_mut(ndarray::s![.., at..at + w]).assign(&block);
        at += w;
        for b in &self.others {
            match b {
                Block::Numeric(name) => {
                    if let ColumnData::Numeric(v) = data.column(name)? {
                        for (row, x) in v.iter().enumerate() {
                            out[[row, at]] = *x;
                        }
                    }
                    at += 1;
                }
                Block::Categorical(enc) => {
                    let w = enc.width();
                    let mut block = Array2::zeros((data.n(), w));
                    enc.transform_into(data, enc.attribute(), Phase::Eval, &mut block)?;
                    out.slice_mut(ndarray::s![.., at..at + w]).assign(&block);
                    at += w;
                }
            }
        }
        Ok(out)
    }
}
