//! The four pipelines: train, reference solve, evaluate, reproduce.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mcnn::analysis::{
    evaluate_model_on_grid, reference_on_grid, relative_error, settlement_profile,
    write_field_comparison, write_metrics, write_settlement, MetricRow,
};
use mcnn::fdref::{fd_solve, stability_check, SolutionGrid};
use mcnn::training::{
    load_checkpoint, save_checkpoint, train_with, write_history_csv, Checkpoint, TrainMode,
};
use mcnn::{LawId, MlpArch, ParamVector};

use crate::config::RunConfig;
use crate::CliError;

/// Offset added to the base seed for the single-law network of law `k`.
const PINN_SEED_STRIDE: u64 = 1000;

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

pub fn fd_file_name(law: LawId) -> String {
    format!("fd_law{}.csv", law.index())
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub label: String,
    pub checkpoint: PathBuf,
    pub history: PathBuf,
    pub final_loss: f64,
    /// Training wall time; reported on the console only, never written.
    pub wall_seconds: f64,
}

fn train_into(
    cfg: &RunConfig,
    mode: TrainMode,
    seed: u64,
    dir: &Path,
    label: &str,
) -> Result<TrainOutcome, CliError> {
    let tc = cfg.train_config(mode, seed)?;
    ensure_dir(dir)?;
    let mut echo = cfg.clone();
    echo.label = Some(label.to_string());
    echo.seed = seed;
    if let TrainMode::SingleLaw(law) = mode {
        echo.mode = crate::config::ModeKind::Pinn;
        echo.law = Some(law);
    } else {
        echo.mode = crate::config::ModeKind::Mcnn;
    }
    echo.epochs = Some(tc.epochs);
    echo.points_per_law = Some(tc.plan.per_law_total);
    write_text(&dir.join(format!("{label}_config.txt")), &echo.echo())?;

    eprintln!(
        "[{label}] training {} epochs on {} points per law",
        tc.epochs, tc.plan.per_law_total
    );
    let start = Instant::now();
    let report_every = (tc.log_every * 10).max(1);
    let report = train_with(&tc, |epoch, loss| {
        if epoch % report_every == 0 || epoch == tc.epochs {
            eprintln!(
                "[{label}] epoch {epoch:>7} loss {loss:.4e} ({:.0}s)",
                start.elapsed().as_secs_f64()
            );
        }
    })
    .map_err(|source| CliError::Stage {
        stage: format!("training {label}"),
        source,
    })?;
    let checkpoint = dir.join(format!("{label}.ckpt"));
    let history = dir.join(format!("{label}_history.csv"));
    save_checkpoint(
        &checkpoint,
        &Checkpoint {
            arch: tc.arch,
            mode,
            seed,
            epochs: tc.epochs,
            params: report.params,
        },
    )?;
    write_history_csv(&history, &report.history)?;
    let final_loss = report.history.last().map_or(f64::NAN, |h| h.1);
    let wall_seconds = report.wall_time.as_secs_f64();
    Ok(TrainOutcome {
        label: label.to_string(),
        checkpoint,
        history,
        final_loss,
        wall_seconds,
    })
}

/// Trains one network as configured and writes its checkpoint, loss
/// history and resolved configuration to `out_dir`.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainOutcome, CliError> {
    cfg.validate()?;
    let mode = cfg.train_mode()?;
    train_into(cfg, mode, cfg.seed, &cfg.out_dir, &cfg.label_for(mode))
}

fn solve_into(cfg: &RunConfig, dir: &Path) -> Result<Vec<(LawId, SolutionGrid)>, CliError> {
    let spec = cfg.fd_spec()?;
    ensure_dir(dir)?;
    let mut out = Vec::with_capacity(3);
    for law in LawId::ALL {
        let bound = stability_check(law, &cfg.props, &spec)?;
        eprintln!(
            "[fd] law {law}: dt {:e} within stability bound {bound:.3e}",
            spec.dt
        );
        let grid = fd_solve(law, &cfg.props, &spec).map_err(|source| CliError::Stage {
            stage: format!("reference solve, law {law}"),
            source,
        })?;
        grid.write_csv(&dir.join(fd_file_name(law)))?;
        out.push((law, grid));
    }
    Ok(out)
}

/// Solves the reference problem for all three laws and writes
/// `fd_law{1,2,3}.csv` to `out_dir`.
pub fn cmd_fd(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate()?;
    let mut echo = cfg.clone();
    echo.label = Some("fd".into());
    ensure_dir(&cfg.out_dir)?;
    write_text(&cfg.out_dir.join("fd_config.txt"), &echo.echo())?;
    solve_into(cfg, &cfg.out_dir)?;
    Ok(LawId::ALL
        .iter()
        .map(|&l| cfg.out_dir.join(fd_file_name(l)))
        .collect())
}

/// What to compare against the reference solution.
#[derive(Debug, Clone)]
pub enum EvalSource {
    Checkpoint(PathBuf),
    /// A directory of `fd_law*.csv` grids, e.g. another reference solve.
    Grids(PathBuf),
}

pub fn load_reference(dir: &Path) -> Result<Vec<(LawId, SolutionGrid)>, CliError> {
    LawId::ALL
        .iter()
        .map(|&law| {
            let path = dir.join(fd_file_name(law));
            if !path.is_file() {
                return Err(CliError::Input(format!(
                    "missing reference file {}",
                    path.display()
                )));
            }
            Ok((law, SolutionGrid::read_csv(&path)?))
        })
        .collect()
}

enum Predictor {
    Network { arch: MlpArch, params: ParamVector },
    Grids(Vec<(LawId, SolutionGrid)>),
}

impl Predictor {
    fn predict(
        &self,
        law: LawId,
        points: &[(f64, f64)],
        cfg: &RunConfig,
    ) -> Result<Vec<f64>, CliError> {
        Ok(match self {
            Predictor::Network { arch, params } => {
                evaluate_model_on_grid(params, arch, law, points, &cfg.props)?
            }
            Predictor::Grids(grids) => {
                let g = &grids
                    .iter()
                    .find(|(l, _)| *l == law)
                    .expect("all laws loaded")
                    .1;
                reference_on_grid(g, points)?
            }
        })
    }
}

fn time_tag(t: f64) -> String {
    format!("{t}")
}

/// Metrics plus field and settlement exports for each law in `laws`.
fn evaluate_into(
    cfg: &RunConfig,
    predictor: &Predictor,
    laws: &[LawId],
    method: &str,
    label: &str,
    reference: &[(LawId, SolutionGrid)],
    dir: &Path,
) -> Result<Vec<MetricRow>, CliError> {
    ensure_dir(dir)?;
    let points = cfg.test_points()?;
    let mut rows = Vec::with_capacity(laws.len());
    for &law in laws {
        let grid = &reference
            .iter()
            .find(|(l, _)| *l == law)
            .expect("all laws loaded")
            .1;
        let j_ref = reference_on_grid(grid, &points)?;
        let j_pred = predictor.predict(law, &points, cfg)?;
        let err = relative_error(&j_pred, &j_ref)?;
        eprintln!("[{label}] law {law}: relative error {err:.4}%");
        write_field_comparison(
            &dir.join(format!("{label}_field_law{}.csv", law.index())),
            &points,
            &j_pred,
            &j_ref,
        )?;
        for &t in &cfg.settlement_times {
            let nodes: Vec<(f64, f64)> = grid.x.iter().map(|&x| (x, t)).collect();
            let u_ref = settlement_profile(&grid.x, &reference_on_grid(grid, &nodes)?, t)?;
            let u_pred = settlement_profile(&grid.x, &predictor.predict(law, &nodes, cfg)?, t)?;
            let name = format!("{label}_settlement_law{}_t{}.csv", law.index(), time_tag(t));
            write_settlement(&dir.join(name), &u_pred, &u_ref)?;
        }
        rows.push(MetricRow {
            law,
            method: method.to_string(),
            relative_error_percent: err,
        });
    }
    Ok(rows)
}

/// Compares a checkpoint (or another set of grids) with the reference
/// grids in `reference_dir`; writes `{label}_metrics.csv` and figure data.
pub fn cmd_eval(
    cfg: &RunConfig,
    source: &EvalSource,
    reference_dir: &Path,
) -> Result<Vec<MetricRow>, CliError> {
    cfg.validate()?;
    let reference = load_reference(reference_dir)?;
    let (predictor, laws, method, default_label) = match source {
        EvalSource::Checkpoint(path) => {
            let ck = load_checkpoint(path)?;
            let laws = ck.mode.laws();
            let label = ck.mode.to_string();
            (
                Predictor::Network {
                    arch: ck.arch,
                    params: ck.params,
                },
                laws,
                ck.mode.method_name().to_string(),
                label,
            )
        }
        EvalSource::Grids(dir) => (
            Predictor::Grids(load_reference(dir)?),
            LawId::ALL.to_vec(),
            "reference".to_string(),
            "reference".into(),
        ),
    };
    let label = cfg.label.clone().unwrap_or(default_label);
    let rows = evaluate_into(
        cfg,
        &predictor,
        &laws,
        &method,
        &label,
        &reference,
        &cfg.out_dir,
    )?;
    write_metrics(&cfg.out_dir.join(format!("{label}_metrics.csv")), &rows)?;
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct ReproOutcome {
    pub summary: PathBuf,
    pub rows: Vec<MetricRow>,
    pub trainings: Vec<TrainOutcome>,
}

/// Reference solves, the multi-law network and the three single-law
/// baselines, evaluation, and `summary.csv` (`law,method,relative_error_percent`).
///
/// Layout under `out_dir`: `config.txt`, `fd/`, `train/`, `eval/`, `summary.csv`.
pub fn cmd_repro(cfg: &RunConfig) -> Result<ReproOutcome, CliError> {
    let mut base = cfg.clone();
    base.label = None;
    base.mode = crate::config::ModeKind::Mcnn;
    base.law = None;
    base.validate()?;
    let out = &cfg.out_dir;
    ensure_dir(out)?;
    write_text(&out.join("config.txt"), &base.echo())?;

    let reference = solve_into(&base, &out.join("fd"))?;

    let mut modes = vec![(TrainMode::Mcnn, base.seed)];
    for law in LawId::ALL {
        modes.push((
            TrainMode::SingleLaw(law),
            base.seed
                .wrapping_add(PINN_SEED_STRIDE * law.index() as u64),
        ));
    }
    let mut trainings = Vec::new();
    let mut rows = Vec::new();
    for (mode, seed) in modes {
        let label = mode.to_string();
        let t = train_into(&base, mode, seed, &out.join("train"), &label)?;
        let ck = load_checkpoint(&t.checkpoint)?;
        let predictor = Predictor::Network {
            arch: ck.arch,
            params: ck.params,
        };
        rows.extend(evaluate_into(
            &base,
            &predictor,
            &mode.laws(),
            mode.method_name(),
            &label,
            &reference,
            &out.join("eval"),
        )?);
        trainings.push(t);
    }
    let summary = out.join("summary.csv");
    write_metrics(&summary, &rows)?;
    Ok(ReproOutcome {
        summary,
        rows,
        trainings,
    })
}
