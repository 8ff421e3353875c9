//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Failures are reported, not raised, so the rest of the suite still runs;
//! set `ACCEPTANCE_STRICT=1` to exit non-zero when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::{
    binomial_cdf, mean_var, median, order_statistics_w1, pairwise_auc, sample_counts,
    train_and_audit, transport_w1, Confusion,
};
use encfair::encoders::{fit, EncoderConfig, EncodingMethod, Phase};
use encfair::fixtures::ethnic_sample;
use encfair::harness::config::{EncoderEntry, SweepParam};
use encfair::harness::{run_intersectional, run_sweep, ExperimentConfig, SweepRecord};
use encfair::metrics::{
    auc, average_absolute_odds, equal_opportunity, fairness_report, wasserstein1, Groups,
    MetricKind, MetricOutcome,
};
use encfair::models::{log_loss_gradient, train_boosted, train_logistic, ModelSpec, Prediction};
use encfair::rng;
use encfair::theory::{
    bayes_error, constant_prediction_error, hoeffding_bound, perfect_encoding, perfect_eof,
    PopulationGroup, PopulationSpec,
};
use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "worked example encodings",
            budget: secs(1),
            run: c1,
        },
        Criterion {
            id: 2,
            name: "smoothing limits",
            budget: secs(1),
            run: c2,
        },
        Criterion {
            id: 3,
            name: "estimator mean and variance",
            budget: secs(30),
            run: c3,
        },
        Criterion {
            id: 4,
            name: "Hoeffding tail bound",
            budget: secs(120),
            run: c4,
        },
        Criterion {
            id: 5,
            name: "Gaussian noise variance",
            budget: secs(30),
            run: c5,
        },
        Criterion {
            id: 6,
            name: "Bayes error",
            budget: secs(1),
            run: c6,
        },
        Criterion {
            id: 7,
            name: "irreducible bias",
            budget: secs(60),
            run: c7,
        },
        Criterion {
            id: 8,
            name: "reducible bias",
            budget: secs(300),
            run: c8,
        },
        Criterion {
            id: 9,
            name: "metric oracles",
            budget: secs(60),
            run: c9,
        },
        Criterion {
            id: 10,
            name: "model checks",
            budget: secs(60),
            run: c10,
        },
        Criterion {
            id: 11,
            name: "sweep behaviour",
            budget: secs(600),
            run: c11,
        },
        Criterion {
            id: 12,
            name: "intersectional attributes",
            budget: secs(300),
            run: c12,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let out = (c.run)();
        let took = start.elapsed();
        let in_time = took <= c.budget;
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {} | {} | {:.2}s of {}s{}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            out.detail,
            took.as_secs_f64(),
            c.budget.as_secs(),
            if in_time { "" } else { " (over time budget)" },
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn c1() -> Outcome {
    let data = ethnic_sample();
    let target = fit(EncoderConfig::target(), &data, "Ethnic").unwrap();
    let values = [
        target.value("African-American").unwrap(),
        target.value("Caucasian").unwrap(),
        target.value("Hispanic").unwrap(),
    ];
    let target_ok = values == [1.0, 1.0 / 3.0, 0.0];
    let one_hot = fit(EncoderConfig::one_hot(), &data, "Ethnic")
        .unwrap()
        .transform(&data, "Ethnic", Phase::Eval)
        .unwrap();
    let expected = Array2::from_shape_vec(
        (5, 3),
        vec![
            1., 0., 0., //
            0., 1., 0., //
            0., 1., 0., //
            0., 1., 0., //
            0., 0., 1.,
        ],
    )
    .unwrap();
    outcome(
        target_ok && one_hot == expected,
        format!(
            "target {values:?}, one-hot matches indicator matrix: {}",
            one_hot == expected
        ),
    )
}

fn c2() -> Outcome {
    let spec = PopulationSpec::new(
        vec![
            PopulationGroup::new("a", 0.5, 0.8),
            PopulationGroup::new("b", 0.3, 0.35),
            PopulationGroup::new("c", 0.15, 0.5),
            PopulationGroup::new("d", 0.05, 0.1),
        ],
        997,
        2,
    )
    .unwrap();
    let data = encfair::theory::sample_population(&spec).unwrap();
    // counts straight from the rows
    let cats = data.categorical("group").unwrap();
    let y = data.target();
    let prior = y.iter().map(|&v| v as f64).sum::<f64>() / y.len() as f64;
    let plain = fit(EncoderConfig::target().with_smoothing(0.0), &data, "group").unwrap();
    let heavy = fit(EncoderConfig::target().with_smoothing(1e9), &data, "group").unwrap();
    let mut exact = true;
    let mut worst: f64 = 0.0;
    for c in ["a", "b", "c", "d"] {
        let rows: Vec<usize> = (0..data.n()).filter(|&i| cats.value(i) == c).collect();
        let pos = rows.iter().filter(|&&i| y[i] == 1).count();
        let rate = pos as f64 / rows.len() as f64;
        exact &= plain.value(c).unwrap().to_bits() == rate.to_bits();
        worst = worst.max((heavy.value(c).unwrap() - prior).abs());
    }
    outcome(
        exact && worst <= 1e-6,
        format!("m=0 bit-identical to count ratio: {exact}; m=1e9 max gap to prior {worst:.2e}"),
    )
}

fn c3() -> Outcome {
    let (p, n, trials) = (0.3, 50usize, 100_000u64);
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let spec = PopulationSpec::new(
                vec![PopulationGroup::new("z", 1.0, p)],
                n,
                rng::derive_seed(3, t),
            )
            .unwrap();
            let data = encfair::theory::sample_population(&spec).unwrap();
            fit(EncoderConfig::target(), &data, "group")
                .unwrap()
                .value("z")
                .unwrap()
        })
        .collect();
    let (mean, var) = mean_var(&values);
    let expected = p * (1.0 - p) / n as f64;
    let mean_tol = 3.0 * (expected / trials as f64).sqrt();
    let rel = (var / expected - 1.0).abs();
    outcome(
        (mean - p).abs() <= mean_tol && rel <= 0.05,
        format!(
            "mean {mean:.5} (|err| {:.2e} <= {mean_tol:.2e}), variance {var:.3e} vs {expected:.3e} ({:.2}%)",
            (mean - p).abs(),
            100.0 * rel
        ),
    )
}

fn c4() -> Outcome {
    let trials = 100_000u64;
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    for p in [0.1, 0.5] {
        for n in [20u64, 100] {
            for eps in [0.05, 0.15] {
                let hits: u64 = (0..trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut r = rng::stream(rng::derive_seed(4, n), t);
                        let k = (0..n).filter(|_| r.random::<f64>() < p).count();
                        ((k as f64 / n as f64 - p).abs() >= eps) as u64
                    })
                    .sum();
                let freq = hits as f64 / trials as f64;
                let se = (freq * (1.0 - freq) / trials as f64).sqrt();
                let bound = hoeffding_bound(n, eps).unwrap();
                ok &= freq <= bound + 3.0 * se;
                worst = worst.max(freq - bound);
            }
        }
    }
    outcome(
        ok,
        format!("8 grid points, max (frequency - bound) {worst:.4}"),
    )
}

fn c5() -> Outcome {
    let data = ethnic_sample();
    let mut ok = true;
    let mut parts = Vec::new();
    for lambda in [0.1, 0.5] {
        let draws: Vec<f64> = (0..100_000u64)
            .into_par_iter()
            .map(|s| {
                let enc = fit(
                    EncoderConfig::target()
                        .with_gaussian(lambda)
                        .with_noise_seed(s),
                    &data,
                    "Ethnic",
                )
                .unwrap();
                enc.transform(&data, "Ethnic", Phase::Train).unwrap()[[1, 0]]
            })
            .collect();
        let (_, var) = mean_var(&draws);
        let rel = (var / (lambda * lambda) - 1.0).abs();
        ok &= rel <= 0.05;
        parts.push(format!("lambda {lambda}: {var:.5} ({:.2}%)", 100.0 * rel));
    }
    outcome(ok, parts.join(", "))
}

/// Value of a finite double as an integer multiple of 2^-64.
fn dyadic(x: f64) -> u128 {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32 - 1075;
    let mant = (bits & ((1 << 52) - 1)) | (1 << 52);
    (mant as u128) << (exp + 64)
}

fn c6() -> Outcome {
    let spec = PopulationSpec::new(
        vec![
            PopulationGroup::new("a", 0.5, 0.7),
            PopulationGroup::new("b", 0.5, 0.3),
        ],
        10,
        0,
    )
    .unwrap();
    let bayes = bayes_error(&spec);
    // exact evaluation over the binary inputs in integer arithmetic at scale
    // 2^-65 (the prior 1/2 adds one bit), then one correctly rounded step
    let one = 1u128 << 64;
    let exact: u128 = spec
        .groups
        .iter()
        .map(|g| {
            let p = dyadic(g.posterior);
            p.min(one - p)
        })
        .sum();
    let oracle = exact as f64 * 2f64.powi(-65);
    let constant = constant_prediction_error(&spec, 1).max(constant_prediction_error(&spec, 0));
    let literal = bayes == 0.3;
    outcome(
        literal && bayes == oracle && constant > bayes,
        format!(
            "bayes_error {bayes:?}, equals 0.3: {literal}, equals exact binary oracle: {}, \
             constant-prediction error {constant} > bayes: {}",
            bayes == oracle,
            constant > bayes
        ),
    )
}

fn eof_abs(report: &encfair::metrics::FairnessReport, group: &str) -> f64 {
    report
        .eof
        .get(group)
        .and_then(MetricOutcome::value)
        .unwrap()
        .abs()
}

fn c7() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p_i, p_r, want_irreducible, lo, hi) in
        [(0.7, 0.2, 1.0, 0.9, 1.0), (0.7, 0.6, 0.0, 0.0, 0.05)]
    {
        let groups = [("i", 100_000, p_i), ("r", 100_000, p_r)];
        let spec = PopulationSpec::with_counts(&groups, 71).unwrap();
        let train = sample_counts(&groups, 71);
        let test = sample_counts(&groups, 72);

        // perfect encoding thresholded at 1/2 is the Bayes classifier
        let perfect = perfect_encoding(&spec).unwrap();
        let x = perfect.transform(&test, "group", Phase::Eval).unwrap();
        let pred = Prediction::from_scores(x.column(0).to_vec());
        let g = Groups::from_values(
            &test
                .categorical("group")
                .unwrap()
                .iter()
                .collect::<Vec<_>>(),
        );
        let bayes = eof_abs(
            &fairness_report(&pred, test.target(), &g, "r").unwrap(),
            "i",
        );
        let closed = perfect_eof(&spec, "r").unwrap()[0].value.abs();

        let empirical = eof_abs(
            &train_and_audit(&train, &test, "r", EncoderConfig::target()).report,
            "i",
        );
        let pass = bayes == want_irreducible
            && closed == want_irreducible
            && (lo..=hi).contains(&empirical);
        ok &= pass;
        parts.push(format!(
            "p=({p_i},{p_r}): perfect |EOF| {bayes} (closed form {closed}), empirical |EOF| {empirical:.4} in [{lo}, {hi}]"
        ));
    }
    outcome(ok, parts.join("; "))
}

/// |EOF| of a group drawn from the reference distribution, one per seed.
fn small_group_eof(n_small: usize, encoder: EncoderConfig, seeds: u64) -> Vec<f64> {
    (0..seeds)
        .into_par_iter()
        .map(|s| {
            let train = sample_counts(
                &[("r", 2_000, 0.6), ("i", n_small, 0.6)],
                rng::derive_seed(80, s),
            );
            let test = sample_counts(
                &[("r", 2_000, 0.6), ("i", 2_000, 0.6)],
                rng::derive_seed(81, s),
            );
            eof_abs(&train_and_audit(&train, &test, "r", encoder).report, "i")
        })
        .collect()
}

fn c8() -> Outcome {
    let seeds = 200;
    let tiny = small_group_eof(10, EncoderConfig::target(), seeds);
    let grown = small_group_eof(10_000, EncoderConfig::target(), seeds);
    let smoothed = small_group_eof(10, EncoderConfig::target().with_smoothing(1e4), seeds);
    let (m0, ma, mb) = (median(&tiny), median(&grown), median(&smoothed));
    let flipped = tiny.iter().filter(|&&v| v > 0.0).count();
    outcome(
        m0 > 0.1 && ma < 0.05 && mb < 0.05,
        format!(
            "median |EOF| n_i=10: {m0} (need > 0.1; whole group flipped on {flipped}/{seeds} seeds, \
             P(estimate <= 1/2) = {:.3}), n_i=1e4: {ma} (< 0.05), m=1e4: {mb} (< 0.05)",
            binomial_cdf(10, 0.6, 5)
        ),
    )
}

fn c9() -> Outcome {
    let mut r = rng::seeded(9);
    let mut auc_ok = true;
    for _ in 0..500 {
        let s: Vec<f64> = (0..50)
            .map(|_| r.random_range(0..15) as f64 / 14.0)
            .collect();
        let mut l: Vec<u8> = (0..50).map(|_| r.random_range(0..2)).collect();
        l[0] = 1;
        l[1] = 0;
        auc_ok &= auc(&s, &l).unwrap() == pairwise_auc(&s, &l);
    }
    let mut w_err: f64 = 0.0;
    for _ in 0..200 {
        let a: Vec<f64> = (0..30).map(|_| r.random()).collect();
        let b: Vec<f64> = (0..30).map(|_| r.random()).collect();
        w_err = w_err.max((wasserstein1(&a, &b).unwrap() - order_statistics_w1(&a, &b)).abs());
    }
    for k in 0..50 {
        let a: Vec<f64> = (0..20)
            .map(|_| r.random_range(0..10) as f64 / 9.0)
            .collect();
        let b: Vec<f64> = (0..5 + k % 15).map(|_| r.random()).collect();
        w_err = w_err.max((wasserstein1(&a, &b).unwrap() - transport_w1(&a, &b)).abs());
    }
    let mut group_ok = true;
    let mut compared = 0;
    for _ in 0..100 {
        let n = 30;
        let scores: Vec<f64> = (0..n).map(|_| r.random_range(0..9) as f64 / 8.0).collect();
        let labels: Vec<u8> = (0..n).map(|_| r.random_range(0..2)).collect();
        let names: Vec<String> = (0..n)
            .map(|i| format!("g{}", if i < 3 { i } else { r.random_range(0..3) }))
            .collect();
        let pred = Prediction::from_scores(scores);
        let g = Groups::from_values(&names);
        let cm = |name: &str| {
            let member: Vec<bool> = names.iter().map(|v| v == name).collect();
            Confusion::tally(&labels, &pred.labels, &member)
        };
        let reference = cm("g0");
        let (Some(tr), Some(fr)) = (reference.tpr(), reference.fpr()) else {
            continue;
        };
        let eof = equal_opportunity(&pred, &labels, &g, "g0").unwrap();
        let aao = average_absolute_odds(&pred, &labels, &g, "g0").unwrap();
        for name in ["g1", "g2"] {
            let c = cm(name);
            if let Some(t) = c.tpr() {
                group_ok &= eof.get(name) == Some(&MetricOutcome::Value(t - tr));
                compared += 1;
            }
            if let (Some(t), Some(f)) = (c.tpr(), c.fpr()) {
                let want = 0.5 * ((f - fr).abs() + (t - tr).abs());
                group_ok &= aao.get(name) == Some(&MetricOutcome::Value(want));
                compared += 1;
            }
        }
    }
    outcome(
        auc_ok && w_err <= 1e-9 && group_ok,
        format!(
            "AUC exact on 500 instances: {auc_ok}; max Wasserstein error {w_err:.1e}; \
             EOF/AAO exact on {compared} group values: {group_ok}"
        ),
    )
}

fn c10() -> Outcome {
    let mut r = rng::seeded(10);
    let (n, d) = (200, 4);
    let x = Array2::from_shape_fn((n, d), |_| r.random_range(-2.0..2.0));
    let y: Vec<u8> = (0..n).map(|_| r.random_range(0..2)).collect();
    let w: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
    let b = 0.3;
    let (_, gw, gb) = log_loss_gradient(x.view(), &y, &w, b);
    let loss = |w: &[f64], b: f64| log_loss_gradient(x.view(), &y, w, b).0;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for j in 0..=d {
        let (numeric, analytic) = if j < d {
            let mut up = w.clone();
            let mut down = w.clone();
            up[j] += h;
            down[j] -= h;
            ((loss(&up, b) - loss(&down, b)) / (2.0 * h), gw[j])
        } else {
            ((loss(&w, b + h) - loss(&w, b - h)) / (2.0 * h), gb)
        };
        worst = worst.max((numeric - analytic).abs() / analytic.abs().max(1e-12));
    }

    let xt = Array2::from_shape_fn((300, 3), |_| r.random_range(-1.0..1.0));
    let yt: Vec<u8> = (0..300)
        .map(|i| (xt[[i, 0]] * xt[[i, 1]] + 0.3 * xt[[i, 2]] > 0.0) as u8)
        .collect();
    let mut warped = xt.clone();
    warped.column_mut(0).mapv_inplace(|v: f64| v.powi(3) + 2.0);
    warped.column_mut(2).mapv_inplace(|v: f64| (2.0 * v).exp());
    let spec = encfair::models::BoostedParams::default();
    let a = train_boosted(
        xt.view(),
        &yt,
        spec.tree_count,
        spec.max_depth,
        spec.learning_rate,
    )
    .unwrap();
    let bt = train_boosted(
        warped.view(),
        &yt,
        spec.tree_count,
        spec.max_depth,
        spec.learning_rate,
    )
    .unwrap();
    let invariant =
        a.predict(xt.view()).unwrap().scores == bt.predict(warped.view()).unwrap().scores;

    let xs = Array2::from_shape_fn((100, 1), |(i, _)| (i % 2) as f64);
    let ys: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
    let lr = train_logistic(xs.view(), &ys, 0.0, 500, 1e-8).unwrap();
    let auc_lr = auc(&lr.predict(xs.view()).unwrap().scores, &ys).unwrap();
    let bt_sep = ModelSpec::Boosted(spec).train(xs.view(), &ys).unwrap();
    let auc_bt = auc(&bt_sep.predict(xs.view()).unwrap().scores, &ys).unwrap();

    outcome(
        worst <= 1e-5 && invariant && auc_lr == 1.0 && auc_bt == 1.0,
        format!(
            "gradient max relative error {worst:.1e}; boosted invariant under monotone maps: \
             {invariant}; separable AUC logistic {auc_lr}, boosted {auc_bt}"
        ),
    )
}

fn find<'a>(records: &'a [SweepRecord], encoder: &str, value: Option<f64>) -> &'a SweepRecord {
    records
        .iter()
        .find(|r| r.encoder == encoder && r.param_value == value)
        .unwrap_or_else(|| panic!("no record for {encoder} at {value:?}"))
}

struct SweepSummary {
    auc_drop: f64,
    eof_drop: f64,
    auc_t0: f64,
    eof_t0: f64,
    auc_t03: f64,
    eof_t5: f64,
}

fn c11() -> Outcome {
    let seeds = 200u64;
    let rows: Vec<SweepSummary> = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let spec = PopulationSpec::new(
                vec![
                    PopulationGroup::new("a", 0.4, 0.65),
                    PopulationGroup::new("b", 0.3, 0.4),
                    PopulationGroup::new("c", 0.2, 0.55),
                    PopulationGroup::new("d", 0.1, 0.35),
                ],
                2_000,
                rng::derive_seed(11, s),
            )
            .unwrap();
            let mut c = ExperimentConfig::for_population(spec, "a");
            c.set_seed(s);
            c.encoders = vec![
                EncoderEntry::new(EncodingMethod::Drop),
                EncoderEntry::new(EncodingMethod::OneHot),
                EncoderEntry::new(EncodingMethod::Target).sweeping(SweepParam::Lambda),
            ];
            c.sweep.lambda = vec![0.0, 0.3, 5.0];
            let records = run_sweep(&c).unwrap();
            let drop = find(&records, "drop", None);
            let t0 = find(&records, "target-lambda", Some(0.0));
            SweepSummary {
                auc_drop: drop.auc.unwrap(),
                eof_drop: drop.l_eof.unwrap(),
                auc_t0: t0.auc.unwrap(),
                eof_t0: t0.l_eof.unwrap(),
                auc_t03: find(&records, "target-lambda", Some(0.3)).auc.unwrap(),
                eof_t5: find(&records, "target-lambda", Some(5.0)).l_eof.unwrap(),
            }
        })
        .collect();
    let med = |f: fn(&SweepSummary) -> f64| median(&rows.iter().map(f).collect::<Vec<_>>());
    let (auc_drop, eof_drop) = (med(|r| r.auc_drop), med(|r| r.eof_drop));
    let (auc_t0, eof_t0) = (med(|r| r.auc_t0), med(|r| r.eof_t0));
    let (auc_t03, eof_t5) = (med(|r| r.auc_t03), med(|r| r.eof_t5));
    outcome(
        auc_t0 > auc_drop
            && eof_t0 > eof_drop
            && eof_t5 < eof_t0
            && (auc_t03 - auc_t0).abs() <= 0.05,
        format!(
            "medians over {seeds} seeds: AUC target {auc_t0:.4} vs drop {auc_drop:.4}; \
             L_EOF target {eof_t0:.3} vs drop {eof_drop:.3}; L_EOF lambda=5 {eof_t5:.3}; \
             AUC lambda=0.3 {auc_t03:.4}"
        ),
    )
}

/// Interaction population: the label rate depends on the (A, B) pair but
/// each attribute alone carries no signal; a covariate follows the pair.
fn interaction_config(seed: u64) -> ExperimentConfig {
    let cats = ["a0|b0", "a0|b1", "a1|b0", "a1|b1"];
    let pair_p = [0.9, 0.3, 0.3, 0.9];
    let mut spec = PopulationSpec::new(
        cats.iter()
            .zip(pair_p)
            .map(|(c, p)| {
                PopulationGroup::new(*c, 0.25, p).with_covariate_mean(if p > 0.5 {
                    1.0
                } else {
                    0.0
                })
            })
            .collect(),
        2_000,
        rng::derive_seed(12, seed),
    )
    .unwrap();
    spec.split_attributes = vec!["A".into(), "B".into()];
    spec.covariate_sd = Some(1.0);
    let mut c = ExperimentConfig::for_population(spec, "a0");
    c.protected.attribute = "A".into();
    c.concat = vec!["A".into(), "B".into()];
    c.encoders = vec![
        EncoderEntry::new(EncodingMethod::Drop),
        EncoderEntry::new(EncodingMethod::OneHot),
        EncoderEntry::new(EncodingMethod::Target),
        EncoderEntry::new(EncodingMethod::Target).with_smoothing(1e4),
    ];
    c.set_seed(seed);
    c
}

fn c12() -> Outcome {
    let seeds = 20u64;
    let metric = MetricKind::EqualOpportunity;
    let runs: Vec<(Vec<bool>, f64)> = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let report = run_intersectional(&interaction_config(s)).unwrap();
            let exceeds = ["drop", "one-hot", "target"]
                .iter()
                .map(|enc| report.flag(enc, None, metric).unwrap().exceeds_all)
                .collect();
            let drop = report
                .flag("drop", None, metric)
                .unwrap()
                .concatenated
                .unwrap();
            let smoothed = report
                .flag("target-m10000", None, metric)
                .unwrap()
                .concatenated
                .unwrap();
            (exceeds, (smoothed - drop).abs())
        })
        .collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, enc) in ["drop", "one-hot", "target"].iter().enumerate() {
        let hits = runs.iter().filter(|r| r.0[k]).count();
        ok &= hits as u64 == seeds;
        parts.push(format!(
            "{enc} concatenated above every single attribute on {hits}/{seeds} seeds"
        ));
    }
    let gaps: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let gap = median(&gaps);
    ok &= gap <= 0.05;
    parts.push(format!(
        "m=1e4 vs drop concatenated gap median {gap:.3} (max {:.3})",
        gaps.iter().cloned().fold(0.0, f64::max)
    ));
    outcome(ok, format!("max |EOF|: {}", parts.join("; ")))
}
