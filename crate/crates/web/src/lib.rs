//! Browser bindings: reference solve, constitutive curves, and a small
//! multi-law network trained live in the page.
//!
//! Everything returns plain `Vec<f64>` (a `Float64Array` on the JS side);
//! 2-D fields are flattened snapshot-major.

use mcnn::analysis::{
    evaluate_model_on_grid, reconstruct_pressure, reference_on_grid, relative_error,
    settlement_profile,
};
use mcnn::constitutive::{diffusivity_value, stiffness_series};
use mcnn::fdref::{fd_solve, stability_bound, FdGridSpec, SolutionGrid};
use mcnn::mlp::{init_params, loss_gradient};
use mcnn::physics::ConsolidationLoss;
use mcnn::sampling::{sample_training_set, test_grid, CollocationSet, SamplingPlan};
use mcnn::training::AdamState;
use mcnn::{LawId, MaterialProps, MlpArch, ParamVector};
use wasm_bindgen::prelude::*;

fn js_err(e: mcnn::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn props(j_bar: f64, phi0: f64, gamma_hat: f64, mu_hat: f64) -> Result<MaterialProps, mcnn::Error> {
    let p = MaterialProps {
        gamma_hat,
        mu_hat,
        phi0,
        j_bar,
    };
    p.validate()?;
    Ok(p)
}

/// Reference solution on the default spatial grid with `snapshots`
/// equispaced output times in (0, 1].
#[wasm_bindgen]
pub struct Field {
    grid: SolutionGrid,
    law: LawId,
    props: MaterialProps,
}

impl Field {
    pub fn solve(law: usize, props: MaterialProps, snapshots: usize) -> Result<Field, mcnn::Error> {
        let law = LawId::from_index(law)?;
        let dx = 0.02;
        // Default step where it is stable, otherwise half the bound.
        let dt = 1e-5_f64.min(0.5 * stability_bound(law, &props, dx)?);
        let n = snapshots.max(1);
        let spec = FdGridSpec {
            dx,
            dt,
            t_end: 1.0,
            snapshot_times: (1..=n).map(|k| k as f64 / n as f64).collect(),
        };
        Ok(Field {
            grid: fd_solve(law, &props, &spec)?,
            law,
            props,
        })
    }
}

#[wasm_bindgen]
impl Field {
    #[wasm_bindgen(constructor)]
    pub fn new(
        law: usize,
        j_bar: f64,
        phi0: f64,
        gamma_hat: f64,
        mu_hat: f64,
        snapshots: usize,
    ) -> Result<Field, JsError> {
        Field::solve(
            law,
            props(j_bar, phi0, gamma_hat, mu_hat).map_err(js_err)?,
            snapshots,
        )
        .map_err(js_err)
    }

    pub fn x(&self) -> Vec<f64> {
        self.grid.x.clone()
    }

    pub fn t(&self) -> Vec<f64> {
        self.grid.t.clone()
    }

    /// `J` at every snapshot, one row of `x().length` values per time.
    pub fn j(&self) -> Vec<f64> {
        self.grid.j.concat()
    }

    pub fn settlement(&self, snapshot: usize) -> Result<Vec<f64>, JsError> {
        let row = self.row(snapshot)?;
        Ok(settlement_profile(&self.grid.x, row, self.grid.t[snapshot])
            .map_err(js_err)?
            .u)
    }

    /// Excess pore pressure relative to the drained surface.
    pub fn pressure(&self, snapshot: usize) -> Result<Vec<f64>, JsError> {
        let row = self.row(snapshot)?;
        Ok(reconstruct_pressure(
            &self.grid.x,
            row,
            self.law,
            &self.props,
            self.grid.t[snapshot],
        )
        .map_err(js_err)?
        .p)
    }
}

impl Field {
    fn row(&self, snapshot: usize) -> Result<&[f64], JsError> {
        self.grid
            .j
            .get(snapshot)
            .map(Vec::as_slice)
            .ok_or_else(|| JsError::new("snapshot out of range"))
    }

    pub fn grid(&self) -> &SolutionGrid {
        &self.grid
    }
}

/// `[J..., g..., D...]` for `n` values of `J` between just above the
/// porosity limit `1 - phi0` and 1.2.
#[wasm_bindgen]
pub fn material_curves(
    law: usize,
    phi0: f64,
    gamma_hat: f64,
    mu_hat: f64,
    n: usize,
) -> Result<Vec<f64>, JsError> {
    let law = LawId::from_index(law).map_err(js_err)?;
    let p = MaterialProps {
        gamma_hat,
        mu_hat,
        phi0,
        j_bar: 1.0 - 0.5 * phi0,
    };
    p.validate().map_err(js_err)?;
    Ok(curves(law, &p, n))
}

pub fn curves(law: LawId, p: &MaterialProps, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let lo = 1.0 - p.phi0 + 1e-3;
    let js: Vec<f64> = (0..n)
        .map(|k| lo + (1.2 - lo) * k as f64 / (n - 1) as f64)
        .collect();
    let g = js.iter().map(|&j| stiffness_series(law, j, p)[0]);
    let d = js
        .iter()
        .map(|&j| diffusivity_value(law, j, p) * p.inv_phi0_cubed());
    let mut out = js.clone();
    out.extend(g);
    out.extend(d);
    out
}

/// A reduced multi-law network trained in place, a few epochs per call, so
/// the page can redraw between calls.
#[wasm_bindgen]
pub struct DemoTrainer {
    arch: MlpArch,
    params: ParamVector,
    adam: AdamState,
    set: CollocationSet,
    loss: ConsolidationLoss,
    props: MaterialProps,
    epoch: usize,
    last_loss: f64,
    references: Vec<SolutionGrid>,
}

#[wasm_bindgen]
impl DemoTrainer {
    #[wasm_bindgen(constructor)]
    pub fn new(
        seed: u64,
        hidden_layers: usize,
        hidden_width: usize,
        points_per_law: usize,
        learning_rate: f64,
    ) -> Result<DemoTrainer, JsError> {
        DemoTrainer::build(
            seed,
            hidden_layers,
            hidden_width,
            points_per_law,
            learning_rate,
        )
        .map_err(js_err)
    }

    /// Runs `epochs` full-batch Adam steps and returns the last loss.
    pub fn train(&mut self, epochs: usize) -> Result<f64, JsError> {
        self.advance(epochs).map_err(js_err)
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn loss(&self) -> f64 {
        self.last_loss
    }

    /// Predicted `J` on an `nx` by `nt` grid (t-major, times `(k+1)/nt`).
    pub fn predict(&self, law: usize, nx: usize, nt: usize) -> Result<Vec<f64>, JsError> {
        let law = LawId::from_index(law).map_err(js_err)?;
        let pts = test_grid(nx, nt).map_err(js_err)?;
        evaluate_model_on_grid(&self.params, &self.arch, law, &pts, &self.props).map_err(js_err)
    }

    /// Relative error (percent) against the reference on a 50 x 50 grid.
    pub fn relative_error(&self, law: usize) -> Result<f64, JsError> {
        self.error_percent(law).map_err(js_err)
    }
}

impl DemoTrainer {
    pub fn build(
        seed: u64,
        hidden_layers: usize,
        hidden_width: usize,
        points_per_law: usize,
        learning_rate: f64,
    ) -> Result<DemoTrainer, mcnn::Error> {
        let arch = MlpArch::new(hidden_layers, hidden_width);
        arch.validate()?;
        let props = MaterialProps::default();
        let plan = SamplingPlan {
            per_law_total: points_per_law,
            seed: seed.wrapping_add(1),
            ..SamplingPlan::default()
        };
        let set = sample_training_set(&plan, &LawId::ALL)?;
        let params = init_params(&arch, seed);
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(mcnn::Error::InvalidConfig(format!(
                "learning rate {learning_rate}"
            )));
        }
        let references = LawId::ALL
            .iter()
            .map(|&l| Field::solve(l.index(), props, 50).map(|f| f.grid))
            .collect::<Result<_, _>>()?;
        Ok(DemoTrainer {
            adam: AdamState::new(params.len(), learning_rate),
            arch,
            params,
            set,
            loss: ConsolidationLoss::new(props),
            props,
            epoch: 0,
            last_loss: f64::NAN,
            references,
        })
    }

    pub fn advance(&mut self, epochs: usize) -> Result<f64, mcnn::Error> {
        for _ in 0..epochs {
            let (value, grad) =
                loss_gradient(&self.params, &self.arch, &self.set.samples, &self.loss)?;
            self.adam
                .step(self.params.as_mut_slice(), grad.as_slice())?;
            self.last_loss = value;
            self.epoch += 1;
        }
        Ok(self.last_loss)
    }

    pub fn error_percent(&self, law: usize) -> Result<f64, mcnn::Error> {
        let law = LawId::from_index(law)?;
        let pts = test_grid(50, 50)?;
        let pred = evaluate_model_on_grid(&self.params, &self.arch, law, &pts, &self.props)?;
        let reference = reference_on_grid(&self.references[law.index() - 1], &pts)?;
        relative_error(&pred, &reference)
    }
}
