//! Wall time of one full-batch gradient evaluation at the default size.

use std::time::Instant;

use mcnn::mlp::{init_params, loss_gradient};
use mcnn::physics::ConsolidationLoss;
use mcnn::{encode_law, LawId, MaterialProps, MlpArch, SamplePoint};

fn main() {
    let arch = MlpArch::default();
    let params = init_params(&arch, 1);
    let batch: Vec<_> = (0..3000)
        .map(|k| {
            let law = LawId::ALL[k % 3];
            SamplePoint::new(
                (k as f64 * 0.37) % 1.0,
                (k as f64 * 0.73) % 1.0,
                encode_law(law),
            )
        })
        .collect();
    let loss = ConsolidationLoss::new(MaterialProps::default());
    let _ = loss_gradient(&params, &arch, &batch, &loss);
    let n = 20;
    let start = Instant::now();
    for _ in 0..n {
        let _ = loss_gradient(&params, &arch, &batch, &loss);
    }
    println!(
        "{:.2} ms per epoch",
        start.elapsed().as_secs_f64() * 1e3 / n as f64
    );
}
