//! Accuracy metrics, settlement and pore-pressure post-processing, and the
//! CSV exports behind the comparison figures and tables.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::constitutive::{encode_law, stiffness_antiderivative, LawId, MaterialProps};
use crate::error::{Error, Result};
use crate::fdref::SolutionGrid;
use crate::mlp::{forward, MlpArch, ParamVector, SamplePoint};
use crate::physics::transform_output;
use crate::Jet;

#[derive(Debug, Clone, PartialEq)]
pub struct SettlementProfile {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub t_hat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureProfile {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub t_hat: f64,
}

/// `100 * sqrt(mean((pred / ref - 1)^2))`, in percent.
pub fn relative_error(pred: &[f64], reference: &[f64]) -> Result<f64> {
    if pred.len() != reference.len() || pred.is_empty() {
        return Err(Error::Mismatch(format!(
            "{} predictions against {} reference values",
            pred.len(),
            reference.len()
        )));
    }
    let mut acc = 0.0;
    for (p, r) in pred.iter().zip(reference) {
        let e = p / r - 1.0;
        acc += e * e;
    }
    Ok(100.0 * (acc / pred.len() as f64).sqrt())
}

fn check_profile(x: &[f64], j: &[f64]) -> Result<()> {
    if x.len() != j.len() {
        return Err(Error::Mismatch(format!(
            "{} nodes but {} values",
            x.len(),
            j.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Mismatch("profile needs at least two nodes".into()));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Mismatch("nodes must be strictly increasing".into()));
    }
    Ok(())
}

/// Settlement `U(X) = int_X^1 (1 - J) dX'` by the trapezoid rule, so that
/// `U(1) = 0` and `dU/dX = J - 1`.
pub fn settlement_profile(x: &[f64], j: &[f64], t_hat: f64) -> Result<SettlementProfile> {
    check_profile(x, j)?;
    if *x.last().unwrap() != 1.0 {
        return Err(Error::Mismatch(
            "settlement integration needs a node at X = 1".into(),
        ));
    }
    let mut u = vec![0.0; x.len()];
    for k in (0..x.len() - 1).rev() {
        let h = x[k + 1] - x[k];
        u[k] = u[k + 1] + 0.5 * h * ((1.0 - j[k]) + (1.0 - j[k + 1]));
    }
    Ok(SettlementProfile {
        x: x.to_vec(),
        u,
        t_hat,
    })
}

/// Pore pressure from `dp/dX = g(J) dJ/dX`, integrated exactly through the
/// antiderivative `G`: `p(X) = G(J(X)) - G(J(0))`, i.e. zero at the
/// drained surface.
pub fn reconstruct_pressure(
    x: &[f64],
    j: &[f64],
    law: LawId,
    props: &MaterialProps,
    t_hat: f64,
) -> Result<PressureProfile> {
    check_profile(x, j)?;
    let datum = stiffness_antiderivative(law, j[0], props)?;
    let p = j
        .iter()
        .map(|&v| Ok(stiffness_antiderivative(law, v, props)? - datum))
        .collect::<Result<Vec<_>>>()?;
    Ok(PressureProfile {
        x: x.to_vec(),
        p,
        t_hat,
    })
}

/// `J = J_bar + X N(X, t, e_law)` at every point.
pub fn evaluate_model_on_grid(
    params: &ParamVector,
    arch: &MlpArch,
    law: LawId,
    points: &[(f64, f64)],
    props: &MaterialProps,
) -> Result<Vec<f64>> {
    params.check(arch)?;
    let e = encode_law(law);
    points
        .iter()
        .map(|&(x, t)| {
            let n = forward(params, arch, &SamplePoint::new(x, t, e))?;
            Ok(transform_output(
                &Jet {
                    n,
                    ..Jet::default()
                },
                x,
                props,
            )
            .j)
        })
        .collect()
}

/// Reference values at arbitrary points by bilinear interpolation.
pub fn reference_on_grid(grid: &SolutionGrid, points: &[(f64, f64)]) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|&(x, t)| grid.interpolate(x, t))
        .collect()
}

/// One row of the accuracy summary.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub law: LawId,
    pub method: String,
    pub relative_error_percent: f64,
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// `x_hat,t_hat,j_pred,j_ref,abs_diff`.
pub fn write_field_comparison(
    path: &Path,
    points: &[(f64, f64)],
    pred: &[f64],
    reference: &[f64],
) -> Result<()> {
    if points.len() != pred.len() || pred.len() != reference.len() {
        return Err(Error::Mismatch(
            "field comparison columns differ in length".into(),
        ));
    }
    let mut w = create(path)?;
    writeln!(w, "x_hat,t_hat,j_pred,j_ref,abs_diff")?;
    for ((&(x, t), p), r) in points.iter().zip(pred).zip(reference) {
        writeln!(
            w,
            "{x:.16e},{t:.16e},{p:.16e},{r:.16e},{:.16e}",
            (p - r).abs()
        )?;
    }
    w.flush()?;
    Ok(())
}

/// `x_hat,u_pred,u_ref` for one snapshot.
pub fn write_settlement(
    path: &Path,
    pred: &SettlementProfile,
    reference: &SettlementProfile,
) -> Result<()> {
    if pred.x != reference.x {
        return Err(Error::Mismatch(
            "settlement profiles use different nodes".into(),
        ));
    }
    let mut w = create(path)?;
    writeln!(w, "x_hat,u_pred,u_ref")?;
    for ((x, p), r) in pred.x.iter().zip(&pred.u).zip(&reference.u) {
        writeln!(w, "{x:.16e},{p:.16e},{r:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

/// `law,method,relative_error_percent`.
pub fn write_metrics(path: &Path, rows: &[MetricRow]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "law,method,relative_error_percent")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{:.16e}",
            row.law.index(),
            row.method,
            row.relative_error_percent
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdref::{fd_solve, FdGridSpec};
    use crate::mlp::init_params;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn nodes(n: usize) -> Vec<f64> {
        (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn relative_error_examples() {
        let r = [0.8, 0.9, 1.0];
        assert_eq!(relative_error(&r, &r).unwrap(), 0.0);
        let p: Vec<f64> = r.iter().map(|v| 1.01 * v).collect();
        assert_relative_eq!(relative_error(&p, &r).unwrap(), 1.0, max_relative = 1e-12);
        assert!(relative_error(&p[..2], &r).is_err());
        assert!(relative_error(&[], &[]).is_err());
    }

    #[test]
    fn settlement_examples() {
        let x = nodes(51);
        let s = settlement_profile(&x, &vec![1.0; 51], 0.5).unwrap();
        assert!(s.u.iter().all(|&u| u == 0.0));

        let s = settlement_profile(&x, &vec![0.8; 51], 0.5).unwrap();
        assert_eq!(*s.u.last().unwrap(), 0.0);
        for (xi, u) in x.iter().zip(&s.u) {
            assert_relative_eq!(*u, 0.2 * (1.0 - xi), epsilon = 1e-14);
        }

        let lin: Vec<f64> = x.iter().map(|xi| 0.8 + 0.2 * xi).collect();
        let s = settlement_profile(&x, &lin, 0.5).unwrap();
        assert_relative_eq!(s.u[0], 0.1, epsilon = 1e-14);
        assert_eq!(s.u[50], 0.0);

        assert!(settlement_profile(&[1.0], &[0.9], 0.0).is_err());
        assert!(settlement_profile(&[0.0, 0.5], &[0.9, 0.9], 0.0).is_err());
    }

    #[test]
    fn pressure_examples() {
        let p = MaterialProps::default();
        let x = nodes(11);
        for law in LawId::ALL {
            let prof = reconstruct_pressure(&x, &[0.9; 11], law, &p, 0.3).unwrap();
            assert!(prof.p.iter().all(|&v| v == 0.0));
        }
        let prof = reconstruct_pressure(
            &[0.0, 0.5],
            &[0.8, 1.0],
            LawId::SaintVenantKirchhoff,
            &p,
            0.3,
        )
        .unwrap();
        assert_relative_eq!(prof.p[1], 0.144, epsilon = 1e-15);

        // Cross-check by Simpson quadrature of g1 over J in [0.8, 1].
        let n = 2000;
        let h = 0.2 / n as f64;
        let q: f64 = (0..=n)
            .map(|k| {
                let j = 0.8 + k as f64 * h;
                let w = if k == 0 || k == n {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * (3.0 * j * j - 1.0) / 2.0
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert_relative_eq!(prof.p[1], q, epsilon = 1e-12);

        assert!(
            reconstruct_pressure(&[0.0, 1.0], &[0.8, -1.0], LawId::NeoHookean, &p, 0.0).is_err()
        );
    }

    #[test]
    fn pressure_gradient_follows_stiffness() {
        let p = MaterialProps::default();
        let x = nodes(401);
        let j: Vec<f64> = x
            .iter()
            .map(|xi| 0.8 + 0.2 * (1.0 - (-3.0 * xi).exp()))
            .collect();
        for law in LawId::ALL {
            let prof = reconstruct_pressure(&x, &j, law, &p, 0.0).unwrap();
            for k in [50, 200, 350] {
                let h = x[k + 1] - x[k];
                let dp = (prof.p[k + 1] - prof.p[k - 1]) / (2.0 * h);
                let dj = (j[k + 1] - j[k - 1]) / (2.0 * h);
                let g = crate::constitutive::stiffness_modulus(law, j[k], &p).unwrap();
                assert_relative_eq!(dp, g * dj, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn fd_solution_post_processing_is_physical() {
        let p = MaterialProps::default();
        let times: Vec<f64> = (1..=10).map(|k| k as f64 * 0.1).collect();
        let spec = FdGridSpec {
            dx: 0.05,
            dt: 1e-4,
            t_end: 1.0,
            snapshot_times: times,
        };
        for law in LawId::ALL {
            let g = fd_solve(law, &p, &spec).unwrap();
            let mut last_top = 0.0;
            for (t, row) in g.t.iter().zip(&g.j) {
                let s = settlement_profile(&g.x, row, *t).unwrap();
                assert!(s.u.windows(2).all(|w| w[1] <= w[0]));
                assert!(s.u[0] >= last_top);
                last_top = s.u[0];
            }
            let pr = reconstruct_pressure(&g.x, g.j.last().unwrap(), law, &p, 1.0).unwrap();
            assert!(pr.p.iter().all(|&v| v >= 0.0));
            assert!(pr.p.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn model_evaluation() {
        let p = MaterialProps::default();
        let arch = MlpArch::new(2, 5);
        let params = init_params(&arch, 9);
        let pts = [(0.0, 0.3), (0.5, 0.5), (1.0, 0.9)];
        let j = evaluate_model_on_grid(&params, &arch, LawId::NeoHookean, &pts, &p).unwrap();
        assert_eq!(j[0], 0.8);
        for (&(x, t), v) in pts.iter().zip(&j) {
            let n = forward(
                &params,
                &arch,
                &SamplePoint::new(x, t, encode_law(LawId::NeoHookean)),
            )
            .unwrap();
            assert_eq!(*v, 0.8 + x * n);
        }
    }

    #[test]
    fn exports_have_expected_headers() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("f.csv");
        write_field_comparison(&f, &[(0.0, 0.1)], &[0.81], &[0.8]).unwrap();
        let text = fs::read_to_string(&f).unwrap();
        assert!(text.starts_with("x_hat,t_hat,j_pred,j_ref,abs_diff\n"));

        let m = dir.path().join("m.csv");
        let rows = [MetricRow {
            law: LawId::NeoHookean,
            method: "mcnn".into(),
            relative_error_percent: 0.5,
        }];
        write_metrics(&m, &rows).unwrap();
        let text = fs::read_to_string(&m).unwrap();
        assert_eq!(
            text.lines().next(),
            Some("law,method,relative_error_percent")
        );
        assert!(text.lines().nth(1).unwrap().starts_with("3,mcnn,"));

        let s = settlement_profile(&[0.0, 1.0], &[0.9, 1.0], 0.5).unwrap();
        let path = dir.path().join("s.csv");
        write_settlement(&path, &s, &s).unwrap();
        assert!(fs::read_to_string(&path)
            .unwrap()
            .starts_with("x_hat,u_pred,u_ref\n"));
    }

    proptest! {
        #[test]
        fn relative_error_is_scale_free(
            vals in prop::collection::vec((0.75f64..1.0, 0.75f64..1.0), 1..50),
            k in 0.1f64..10.0,
        ) {
            let (p, r): (Vec<f64>, Vec<f64>) = vals.into_iter().unzip();
            let a = relative_error(&p, &r).unwrap();
            let ps: Vec<f64> = p.iter().map(|v| v * k).collect();
            let rs: Vec<f64> = r.iter().map(|v| v * k).collect();
            let b = relative_error(&ps, &rs).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-12));
        }
    }
}
