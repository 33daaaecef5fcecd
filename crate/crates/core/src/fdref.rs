//! Explicit finite-difference reference solutions.
//!
//! Forward Euler in time on the conservative form
//!
//! ```text
//! J_k^{n+1} = J_k^n + dt / (phi0^3 dx) (F_{k+1/2} - F_{k-1/2})
//! F_{k+1/2} = D((J_k + J_{k+1}) / 2) (J_{k+1} - J_k) / dx
//! ```
//!
//! with `J = J_bar` at `X = 0` and a mirror ghost node `J_{K+1} = J_{K-1}`
//! for the impermeable base. Second order in space, first order in time.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::constitutive::{diffusivity, diffusivity_value, LawId, MaterialProps};
use crate::error::{Error, Result};
use crate::sampling::grid_time;

#[derive(Debug, Clone, PartialEq)]
pub struct FdGridSpec {
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Times to record, ascending. Each is mapped to the nearest step.
    pub snapshot_times: Vec<f64>,
}

impl Default for FdGridSpec {
    /// `dx = 0.02`, `dt = 1e-5`, snapshots at `t = 0.01, 0.02, ..., 1.0`.
    fn default() -> Self {
        Self {
            dx: 0.02,
            dt: 1e-5,
            t_end: 1.0,
            snapshot_times: (0..100).map(|j| grid_time(j, 100)).collect(),
        }
    }
}

impl FdGridSpec {
    /// Number of intervals `K = 1 / dx`.
    pub fn intervals(&self) -> Result<usize> {
        let k = (1.0 / self.dx).round();
        if self.dx.is_nan() || self.dx <= 0.0 || k < 1.0 || (k * self.dx - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "1/dx must be an integer, got dx = {}",
                self.dx
            )));
        }
        Ok(k as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.intervals()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "dt = {} must be positive",
                self.dt
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} must be positive",
                self.t_end
            )));
        }
        if self.snapshot_times.is_empty() {
            return Err(Error::InvalidConfig("no snapshot times requested".into()));
        }
        if self
            .snapshot_times
            .iter()
            .any(|&t| !(0.0..=self.t_end).contains(&t))
        {
            return Err(Error::InvalidConfig(format!(
                "snapshot times must lie in [0, {}]",
                self.t_end
            )));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "snapshot times must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// `J` on a node lattice at a list of snapshot times.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionGrid {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    /// `j[snapshot][node]`.
    pub j: Vec<Vec<f64>>,
}

/// Largest explicit step `dx^2 / (2 max D(J) / phi0^3)` over `J` in
/// `[J_bar, 1]`, scanned at a spacing of at most 1e-3. Fails if `spec.dt`
/// exceeds it.
pub fn stability_check(law: LawId, props: &MaterialProps, spec: &FdGridSpec) -> Result<f64> {
    props.validate()?;
    spec.validate()?;
    let bound = stability_bound(law, props, spec.dx)?;
    if spec.dt > bound {
        return Err(Error::Unstable { dt: spec.dt, bound });
    }
    Ok(bound)
}

pub fn stability_bound(law: LawId, props: &MaterialProps, dx: f64) -> Result<f64> {
    let span = 1.0 - props.j_bar;
    let n = ((span / 1e-3).ceil() as usize).max(1);
    let mut max_d: f64 = 0.0;
    for k in 0..=n {
        let j = if k == n {
            1.0
        } else {
            props.j_bar + span * k as f64 / n as f64
        };
        max_d = max_d.max(diffusivity(law, j, props)? * props.inv_phi0_cubed());
    }
    Ok(dx * dx / (2.0 * max_d))
}

pub fn fd_solve(law: LawId, props: &MaterialProps, spec: &FdGridSpec) -> Result<SolutionGrid> {
    stability_check(law, props, spec)?;
    let kmax = spec.intervals()?;
    let x: Vec<f64> = (0..=kmax).map(|k| k as f64 / kmax as f64).collect();
    let targets: Vec<usize> = spec
        .snapshot_times
        .iter()
        .map(|t| (t / spec.dt).round() as usize)
        .collect();

    let floor = 1.0 - props.phi0;
    let coef = spec.dt * props.inv_phi0_cubed() / (spec.dx * spec.dx);
    let mut cur = vec![1.0; kmax + 1];
    let mut next = cur.clone();
    let mut flux = vec![0.0; kmax];
    let mut snaps = Vec::with_capacity(targets.len());
    let mut pending = targets.iter().peekable();
    while pending.next_if(|&&s| s == 0).is_some() {
        snaps.push(cur.clone());
    }

    cur[0] = props.j_bar;
    let last_step = targets.last().copied().unwrap_or(0);
    for step in 1..=last_step {
        // `flux` holds D_{k+1/2} (J_{k+1} - J_k), without the 1/dx factors.
        for k in 0..kmax {
            let mid = 0.5 * (cur[k] + cur[k + 1]);
            flux[k] = diffusivity_value(law, mid, props) * (cur[k + 1] - cur[k]);
        }
        next[0] = props.j_bar;
        for k in 1..kmax {
            next[k] = cur[k] + coef * (flux[k] - flux[k - 1]);
        }
        next[kmax] = cur[kmax] - 2.0 * coef * flux[kmax - 1];
        if let Some(node) = next.iter().position(|v| !(v.is_finite() && *v > floor)) {
            return Err(Error::FdBreakdown {
                step,
                node,
                value: next[node],
            });
        }
        std::mem::swap(&mut cur, &mut next);
        while pending.next_if(|&&s| s == step).is_some() {
            snaps.push(cur.clone());
        }
    }
    Ok(SolutionGrid {
        x,
        t: spec.snapshot_times.clone(),
        j: snaps,
    })
}

/// Index `i` with `nodes[i] <= v <= nodes[i + 1]` and the weight of `i + 1`.
fn bracket(nodes: &[f64], v: f64) -> Option<(usize, f64)> {
    let (first, last) = (*nodes.first()?, *nodes.last()?);
    if !(v >= first && v <= last) {
        return None;
    }
    if nodes.len() == 1 {
        return Some((0, 0.0));
    }
    let i = nodes.partition_point(|&n| n <= v).clamp(1, nodes.len() - 1) - 1;
    let w = (v - nodes[i]) / (nodes[i + 1] - nodes[i]);
    Some((i, w))
}

impl SolutionGrid {
    /// Bilinear interpolation; exact at stored nodes and snapshots.
    pub fn interpolate(&self, x_hat: f64, t_hat: f64) -> Result<f64> {
        let out = || Error::OutOfHull { x_hat, t_hat };
        let (i, wx) = bracket(&self.x, x_hat).ok_or_else(out)?;
        let (s, wt) = bracket(&self.t, t_hat).ok_or_else(out)?;
        let along = |row: &[f64]| {
            if wx == 0.0 {
                row[i]
            } else {
                (1.0 - wx) * row[i] + wx * row[i + 1]
            }
        };
        let a = along(&self.j[s]);
        if wt == 0.0 {
            return Ok(a);
        }
        let b = along(&self.j[s + 1]);
        Ok((1.0 - wt) * a + wt * b)
    }

    pub fn snapshot_index(&self, t_hat: f64) -> Option<usize> {
        self.t.iter().position(|&t| t == t_hat)
    }

    /// CSV `x_hat,t_hat,j`, snapshot-major, 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "x_hat,t_hat,j")?;
        for (t, row) in self.t.iter().zip(&self.j) {
            for (x, v) in self.x.iter().zip(row) {
                writeln!(w, "{x:.16e},{t:.16e},{v:.16e}")?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let bad = |reason: String| Error::Csv {
            path: path.to_path_buf(),
            reason,
        };
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("x_hat,t_hat,j") {
            return Err(bad("expected header x_hat,t_hat,j".into()));
        }
        let mut grid = SolutionGrid {
            x: Vec::new(),
            t: Vec::new(),
            j: Vec::new(),
        };
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let vals: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(format!("line {}: not a number", n + 2)))?;
            let [x, t, v] = vals[..] else {
                return Err(bad(format!("line {}: expected 3 fields", n + 2)));
            };
            if grid.t.last() != Some(&t) {
                grid.t.push(t);
                grid.j.push(Vec::new());
            }
            let first = grid.j.len() == 1;
            let row = grid.j.last_mut().expect("row pushed above");
            if first {
                grid.x.push(x);
            } else if grid.x.get(row.len()) != Some(&x) {
                return Err(bad(format!(
                    "line {}: node layout differs between snapshots",
                    n + 2
                )));
            }
            row.push(v);
        }
        if grid.j.is_empty() || grid.j.iter().any(|r| r.len() != grid.x.len()) {
            return Err(bad("grid is empty or ragged".into()));
        }
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn props() -> MaterialProps {
        MaterialProps::default()
    }

    fn quick_spec(times: &[f64]) -> FdGridSpec {
        FdGridSpec {
            dx: 0.05,
            dt: 1e-4,
            t_end: 1.0,
            snapshot_times: times.to_vec(),
        }
    }

    #[test]
    fn stability_bound_for_reference_material() {
        let spec = FdGridSpec::default();
        for law in LawId::ALL {
            let bound = stability_check(law, &props(), &spec).unwrap();
            assert_relative_eq!(bound, 2e-4, max_relative = 1e-12);
            assert!(spec.dt < bound);
        }
        let coarse = FdGridSpec {
            dt: 1e-3,
            ..FdGridSpec::default()
        };
        assert!(matches!(
            stability_check(LawId::NeoHookean, &props(), &coarse),
            Err(Error::Unstable { .. })
        ));
        assert!(fd_solve(LawId::NeoHookean, &props(), &coarse).is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = FdGridSpec {
            dx: 0.03,
            ..FdGridSpec::default()
        };
        assert!(s.validate().is_err());
        s = FdGridSpec::default();
        s.snapshot_times = vec![0.5, 0.2];
        assert!(s.validate().is_err());
        s.snapshot_times = vec![1.5];
        assert!(s.validate().is_err());
    }

    #[test]
    fn initial_snapshot_is_undeformed() {
        let g = fd_solve(
            LawId::SaintVenantKirchhoff,
            &props(),
            &quick_spec(&[0.0, 0.1]),
        )
        .unwrap();
        assert!(g.j[0].iter().all(|&v| v == 1.0));
        assert_eq!(g.j[1][0], 0.8);
        assert_eq!(g.x.len(), 21);
    }

    #[test]
    fn physical_range_and_monotonicity() {
        let times: Vec<f64> = (1..=20).map(|k| k as f64 * 0.05).collect();
        for law in LawId::ALL {
            let g = fd_solve(law, &props(), &quick_spec(&times)).unwrap();
            for (s, row) in g.j.iter().enumerate() {
                assert_eq!(row[0], 0.8);
                assert!(row.iter().all(|&v| (0.8 - 1e-6..=1.0 + 1e-6).contains(&v)));
                assert!(
                    row.windows(2).all(|w| w[1] >= w[0]),
                    "law {law}, snapshot {s}"
                );
                if s > 0 {
                    assert!(row.iter().zip(&g.j[s - 1]).all(|(a, b)| a <= b));
                }
                // Mirror node: one-sided slope at the base is O(dx).
                let k = row.len() - 1;
                assert!((row[k] - row[k - 1]).abs() / 0.05 < 0.05);
            }
        }
    }

    #[test]
    fn relaxes_towards_surface_value() {
        let times: Vec<f64> = (1..=10).map(|k| k as f64 * 0.1).collect();
        let g = fd_solve(LawId::NeoHookean, &props(), &quick_spec(&times)).unwrap();
        let spread: Vec<f64> =
            g.j.iter()
                .map(|r| {
                    r.iter().cloned().fold(f64::MIN, f64::max)
                        - r.iter().cloned().fold(f64::MAX, f64::min)
                })
                .collect();
        assert!(spread.windows(2).all(|w| w[1] < w[0]), "{spread:?}");
        let mean: f64 = g.j.last().unwrap().iter().sum::<f64>() / g.x.len() as f64;
        assert!(mean < 0.95);
    }

    #[test]
    fn interpolation_contract() {
        let grid = SolutionGrid {
            x: vec![0.0, 0.5, 1.0],
            t: vec![0.1, 0.2],
            j: vec![vec![0.8, 0.9, 1.0], vec![0.7, 0.7, 0.7]],
        };
        assert_eq!(grid.interpolate(0.5, 0.1).unwrap(), 0.9);
        assert_eq!(grid.interpolate(1.0, 0.2).unwrap(), 0.7);
        assert_relative_eq!(grid.interpolate(0.25, 0.1).unwrap(), 0.85, epsilon = 1e-15);
        assert_relative_eq!(grid.interpolate(0.8, 0.2).unwrap(), 0.7, epsilon = 1e-15);
        assert_relative_eq!(
            grid.interpolate(0.75, 0.15).unwrap(),
            0.5 * 0.95 + 0.5 * 0.7,
            epsilon = 1e-15
        );
        assert!(matches!(
            grid.interpolate(1.1, 0.15),
            Err(Error::OutOfHull { .. })
        ));
        assert!(grid.interpolate(0.5, 0.05).is_err());
        assert!(grid.interpolate(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = fd_solve(
            LawId::ModifiedSaintVenantKirchhoff,
            &props(),
            &quick_spec(&[0.0, 0.3, 0.7]),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        g.write_csv(&path).unwrap();
        assert_eq!(SolutionGrid::read_csv(&path).unwrap(), g);
        fs::write(&path, "x,t\n1,2\n").unwrap();
        assert!(matches!(
            SolutionGrid::read_csv(&path),
            Err(Error::Csv { .. })
        ));
    }
}
