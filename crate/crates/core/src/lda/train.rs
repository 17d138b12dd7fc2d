use super::{LdaConfig, SamplerState, TopicModel};
use crate::corpus::Corpus;
use crate::error::Result;
use crate::par::{map_slice, Execution};

/// A finished chain.
#[derive(Debug, Clone)]
pub struct Training {
    pub state: SamplerState,
    pub model: TopicModel,
    /// `log p(w, z)` after each sweep.
    pub log_likelihood_trace: Vec<f64>,
    /// Number of per-sample estimates averaged into `model` (0 = final state only).
    pub samples_averaged: usize,
}

/// Run `config.iterations` sweeps from a fresh initialization.
pub fn train(corpus: &Corpus, config: &LdaConfig) -> Result<Training> {
    let mut state = SamplerState::init(corpus, config)?;
    let mut trace = Vec::with_capacity(config.iterations);
    let mut theta_sum: Option<Vec<Vec<f64>>> = None;
    let mut phi_sum: Option<Vec<Vec<f64>>> = None;
    let mut samples = 0usize;

    for sweep in 1..=config.iterations {
        state.sweep(corpus);
        trace.push(state.log_likelihood());
        if config.average_samples
            && sweep > config.burn_in
            && (sweep - config.burn_in) % config.sample_lag == 0
        {
            accumulate(&mut theta_sum, state.estimate_theta());
            accumulate(&mut phi_sum, state.estimate_phi());
            samples += 1;
        }
    }

    let mut model = state.to_model(&corpus.vocabulary);
    if let (Some(theta), Some(phi)) = (theta_sum, phi_sum) {
        let scale = 1.0 / samples as f64;
        model.theta = rescale(theta, scale);
        model.phi = rescale(phi, scale);
    }
    Ok(Training {
        state,
        model,
        log_likelihood_trace: trace,
        samples_averaged: samples,
    })
}

fn accumulate(sum: &mut Option<Vec<Vec<f64>>>, sample: Vec<Vec<f64>>) {
    match sum {
        None => *sum = Some(sample),
        Some(acc) => {
            for (a_row, s_row) in acc.iter_mut().zip(sample) {
                for (a, s) in a_row.iter_mut().zip(s_row) {
                    *a += s;
                }
            }
        }
    }
}

fn rescale(m: Vec<Vec<f64>>, scale: f64) -> Vec<Vec<f64>> {
    m.into_iter()
        .map(|row| row.into_iter().map(|x| x * scale).collect())
        .collect()
}

/// Independent chains over one shared corpus, one per config (typically
/// differing only in seed). Output order follows `configs`.
pub fn run_chains(corpus: &Corpus, configs: &[LdaConfig], exec: Execution) -> Result<Vec<Training>> {
    map_slice(exec, configs, |c| train(corpus, c)).into_iter().collect()
}
