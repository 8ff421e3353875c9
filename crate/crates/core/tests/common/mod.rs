//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

/// AUC by enumerating every (positive, negative) pair, ties counting 1/2.
pub fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for i in 0..scores.len() {
        if labels[i] != 1 {
            continue;
        }
        for j in 0..scores.len() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                num += 1.0;
            } else if scores[i] == scores[j] {
                num += 0.5;
            }
        }
    }
    num / pairs
}

/// W1 for equal-size samples: mean distance between matched order statistics.
pub fn order_statistics_w1(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// W1 as the optimum of the transport linear program between the two
/// empirical distributions, solved exactly as an integer min-cost flow:
/// every point of `a` supplies `|b|` units, every point of `b` demands `|a|`.
pub fn transport_w1(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len(), b.len());
    let source = 0;
    let sink = na + nb + 1;
    let mut g = FlowGraph::new(na + nb + 2);
    for (i, _) in a.iter().enumerate() {
        g.add_edge(source, 1 + i, nb as i64, 0.0);
    }
    for (j, _) in b.iter().enumerate() {
        g.add_edge(1 + na + j, sink, na as i64, 0.0);
    }
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            g.add_edge(1 + i, 1 + na + j, i64::MAX / 4, (x - y).abs());
        }
    }
    let (flow, cost) = g.min_cost_flow(source, sink);
    assert_eq!(flow, (na * nb) as i64);
    cost / (na * nb) as f64
}

struct Edge {
    to: usize,
    cap: i64,
    cost: f64,
}

struct FlowGraph {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        Self {
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap, cost });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
    }

    /// Successive shortest paths with SPFA on the residual graph.
    fn min_cost_flow(&mut self, s: usize, t: usize) -> (i64, f64) {
        let n = self.adj.len();
        let (mut flow, mut cost) = (0i64, 0.0);
        loop {
            let mut dist = vec![f64::INFINITY; n];
            let mut prev = vec![usize::MAX; n];
            let mut in_queue = vec![false; n];
            let mut q = VecDeque::new();
            dist[s] = 0.0;
            q.push_back(s);
            while let Some(u) = q.pop_front() {
                in_queue[u] = false;
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap > 0 && dist[u] + edge.cost < dist[edge.to] - 1e-12 {
                        dist[edge.to] = dist[u] + edge.cost;
                        prev[edge.to] = e;
                        if !in_queue[edge.to] {
                            in_queue[edge.to] = true;
                            q.push_back(edge.to);
                        }
                    }
                }
            }
            if dist[t].is_infinite() {
                return (flow, cost);
            }
            let mut push = i64::MAX;
            let mut v = t;
            while v != s {
                let e = prev[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                cost += push as f64 * self.edges[e].cost;
                v = self.edges[e ^ 1].to;
            }
            flow += push;
        }
    }
}

/// Confusion counts of one group.
#[derive(Debug, Clone, Copy, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn tally(labels: &[u8], predicted: &[u8], members: &[bool]) -> Self {
        let mut c = Confusion::default();
        for k in 0..labels.len() {
            if !members[k] {
                continue;
            }
            match (labels[k], predicted[k]) {
                (1, 1) => c.tp += 1,
                (1, _) => c.fn_ += 1,
                (_, 1) => c.fp += 1,
                _ => c.tn += 1,
            }
        }
        c
    }

    pub fn tpr(&self) -> Option<f64> {
        let p = self.tp + self.fn_;
        (p > 0).then(|| self.tp as f64 / p as f64)
    }

    pub fn fpr(&self) -> Option<f64> {
        let n = self.fp + self.tn;
        (n > 0).then(|| self.fp as f64 / n as f64)
    }
}

/// Brute-force search over every depth-2 axis-aligned tree on `x` whose
/// leaves predict the majority label; returns the best training accuracy.
pub fn best_depth2_accuracy(x: &[[f64; 2]], y: &[u8]) -> f64 {
    let mut candidates: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for f in 0..2 {
        let mut v: Vec<f64> = x.iter().map(|r| r[f]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        candidates[f] = v.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
    }
    let majority_correct = |rows: &[usize]| -> usize {
        let pos = rows.iter().filter(|&&r| y[r] == 1).count();
        pos.max(rows.len() - pos)
    };
    let best_single = |rows: &[usize]| -> usize {
        let mut best = majority_correct(rows);
        for f in 0..2 {
            for &t in &candidates[f] {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][f] <= t);
                best = best.max(majority_correct(&l) + majority_correct(&r));
            }
        }
        best
    };
    let all: Vec<usize> = (0..y.len()).collect();
    let mut best = best_single(&all);
    for f in 0..2 {
        for &t in &candidates[f] {
            let (l, r): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| x[i][f] <= t);
            best = best.max(best_single(&l) + best_single(&r));
        }
    }
    best as f64 / y.len() as f64
}

/// Median of a sample (mean of the two middle values for even sizes).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Unbiased sample mean and variance.
pub fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

use encfair::audit::{evaluate, EncoderSource, Evaluation};
use encfair::dataset::{Dataset, GroupSpec};
use encfair::encoders::EncoderConfig;
use encfair::models::ModelSpec;
use encfair::theory::{sample_population, PopulationSpec};

/// Fixed-count sample of `(category, rows, posterior)` groups.
pub fn sample_counts(groups: &[(&str, usize, f64)], seed: u64) -> Dataset {
    sample_population(&PopulationSpec::with_counts(groups, seed).unwrap()).unwrap()
}

/// Trains on one sample and evaluates on an independent one, auditing the
/// `group` column against `reference` with the default logistic model.
pub fn train_and_audit(
    train: &Dataset,
    test: &Dataset,
    reference: &str,
    encoder: EncoderConfig,
) -> Evaluation {
    train_and_audit_with(train, test, reference, encoder, &ModelSpec::default())
}

pub fn train_and_audit_with(
    train: &Dataset,
    test: &Dataset,
    reference: &str,
    encoder: EncoderConfig,
    model: &ModelSpec,
) -> Evaluation {
    evaluate(
        train,
        test,
        &GroupSpec::new(train, "group", reference).unwrap(),
        EncoderSource::Fit(encoder),
        model,
    )
    .unwrap()
}

/// P(Bin(n, p) <= k) by direct summation of the mass function.
pub fn binomial_cdf(n: u64, p: f64, k: u64) -> f64 {
    let mut total = 0.0;
    let mut coef = 1.0;
    for j in 0..=k.min(n) {
        if j > 0 {
            coef *= (n - j + 1) as f64 / j as f64;
        }
        total += coef * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32);
    }
    total
}
