//! One train/evaluate pass: fit the feature pipeline on the training part,
//! train a model, score the evaluation part and audit it.

use crate::dataset::{Dataset, GroupSpec};
use crate::encoders::{Encoder, EncoderConfig, EncodingMethod, Phase};
use crate::error::Result;
use crate::features::FeaturePipeline;
use crate::metrics::{auc, fairness_report, FairnessReport, Groups};
use crate::models::{Model, ModelSpec, Prediction};

/// How the audited attribute is encoded.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum EncoderSource {
    /// Fit on the training part.
    Fit(EncoderConfig),
    /// Use as given, e.g. the population posteriors.
    Fitted(Encoder),
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub pipeline: FeaturePipeline,
    pub model: Model,
    pub prediction: Prediction,
    /// `None` when the evaluation part holds a single class.
    pub auc: Option<f64>,
    pub report: FairnessReport,
    /// Model score for a row whose audited attribute is encoded as the
    /// training prior; only defined for a single target-encoded column.
    pub prior_score: Option<f64>,
}

/// Groups for an evaluation part: every training category first, in
/// training order, then categories only present in `data`.
pub fn groups_for(data: &Dataset, attribute: &str, known: &[String]) -> Result<Groups> {
    let values: Vec<&str> = data.categorical(attribute)?.iter().collect();
    Ok(Groups::with_known(&values, known))
}

pub fn evaluate(
    train: &Dataset,
    test: &Dataset,
    group: &GroupSpec,
    encoder: EncoderSource,
    model: &ModelSpec,
) -> Result<Evaluation> {
    GroupSpec::new(train, &group.attribute, &group.reference)?;
    let pipeline = match encoder {
        EncoderSource::Fit(cfg) => FeaturePipeline::fit(cfg, train, &group.attribute)?,
        EncoderSource::Fitted(enc) => FeaturePipeline::with_encoder(enc, train)?,
    };
    let x_train = pipeline.transform(train, Phase::Train)?;
    let fitted = model.train(x_train.view(), train.target())?;
    let x_test = pipeline.transform(test, Phase::Eval)?;
    let prediction = fitted.predict(x_test.view())?;
    let labels = test.target();
    let known = train_categories(train, &group.attribute)?;
    let groups = groups_for(test, &group.attribute, &known)?;
    let report = fairness_report(&prediction, labels, &groups, &group.reference)?;
    let global_auc = auc(&prediction.scores, labels).ok();

    let enc = pipeline.encoder();
    let prior_score = if pipeline.width() == 1 && enc.config().method == EncodingMethod::Target {
        let x = ndarray::Array2::from_elem((1, 1), enc.prior());
        Some(fitted.predict(x.view())?.scores[0])
    } else {
        None
    };

    Ok(Evaluation {
        pipeline,
        model: fitted,
        prediction,
        auc: global_auc,
        report,
        prior_score,
    })
}

fn train_categories(train: &Dataset, attribute: &str) -> Result<Vec<String>> {
    Ok(train
        .categorical(attribute)?
        .observed()
        .into_iter()
        .map(str::to_string)
        .collect())
}
