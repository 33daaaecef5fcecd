//! Training with live diagnostics: loss, gradient norm, range of J over the
//! collocation set and per-law error against the reference solution.
//!
//! `cargo run --release --example train_monitor -- [mode] [epochs] [seed]`
//! with `LOG_EVERY=n` (default 1000) and optional `CLIP=max_norm`.

use std::time::Instant;

use mcnn::analysis::{evaluate_model_on_grid, reference_on_grid, relative_error};
use mcnn::fdref::{fd_solve, FdGridSpec};
use mcnn::mlp::{init_params, loss_gradient};
use mcnn::physics::ConsolidationLoss;
use mcnn::sampling::{sample_training_set, test_grid};
use mcnn::training::{AdamState, TrainConfig, TrainMode};
use mcnn::LawId;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode: TrainMode = args
        .get(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(TrainMode::Mcnn);
    let epochs: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(20_000);
    let seed: u64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(42);
    let cfg = TrainConfig::for_mode(mode, seed);
    let props = cfg.props;
    let pts = test_grid(100, 100).unwrap();
    let refs: Vec<Vec<f64>> = LawId::ALL
        .iter()
        .map(|&l| {
            reference_on_grid(&fd_solve(l, &props, &FdGridSpec::default()).unwrap(), &pts).unwrap()
        })
        .collect();
    let set = sample_training_set(&cfg.plan, &mode.laws()).unwrap();
    let loss = ConsolidationLoss::new(props);
    let mut params = init_params(&cfg.arch, cfg.seed);
    let mut adam = AdamState::new(params.len(), cfg.learning_rate);
    let every: usize = std::env::var("LOG_EVERY")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1000);
    let clip: Option<f64> = std::env::var("CLIP").ok().and_then(|v| v.parse().ok());
    let start = Instant::now();
    for epoch in 0..=epochs {
        let (v, mut g) = loss_gradient(&params, &cfg.arch, &set.samples, &loss).unwrap();
        if epoch % every == 0 {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for sp in &set.samples {
                let pj = mcnn::physics::transform_output(
                    &mcnn::Jet {
                        n: mcnn::mlp::forward(&params, &cfg.arch, sp).unwrap(),
                        ..Default::default()
                    },
                    sp.x_hat,
                    &props,
                );
                lo = lo.min(pj.j);
                hi = hi.max(pj.j);
            }
            let gn = g.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
            let errs: Vec<String> = mode
                .laws()
                .iter()
                .map(|&l| {
                    let pred = evaluate_model_on_grid(&params, &cfg.arch, l, &pts, &props).unwrap();
                    format!(
                        "{:.4}",
                        relative_error(&pred, &refs[l.index() - 1]).unwrap()
                    )
                })
                .collect();
            println!(
                "{epoch:6} loss {v:.4e} |g| {gn:.3e} J [{lo:.4}, {hi:.4}] err% {} ({:.0}s)",
                errs.join(" "),
                start.elapsed().as_secs_f64()
            );
        }
        if let Some(c) = clip {
            let n = g.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > c {
                g.as_mut_slice().iter_mut().for_each(|x| *x *= c / n);
            }
        }
        if epoch < epochs {
            adam.step(params.as_mut_slice(), g.as_slice()).unwrap();
        }
    }
}
