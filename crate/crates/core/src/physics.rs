//! Physical predictions from network jets and the per-sample training loss.
//!
//! The network output `N` is mapped to `J = J_bar + X N`, which pins the
//! loaded surface exactly. The mass-balance residual for law `i` is
//! evaluated in expanded form
//!
//! ```text
//! f_i = J_t - phi0^-3 [ D_i'(J) J_X^2 + D_i(J) J_XX ]
//! ```
//!
//! and one sample contributes `(e . f)^2 + L_BI`, where `L_BI` is the
//! boundary or initial penalty selected by the sample's position.

use crate::constitutive::{diffusivity_series, LawId, MaterialProps, OneHotLaw};
use crate::error::{Error, Result};
use crate::mlp::{forward_jets, Jet, MlpArch, ParamVector, SampleLoss, SamplePoint};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhysicalJet {
    pub j: f64,
    pub dj_dx: f64,
    pub dj_dt: f64,
    pub d2j_dx2: f64,
}

/// Which boundary/initial penalty applies to a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stratum {
    Interior,
    /// Loaded surface `X = 0`, including the corner at `t = 0`.
    Top,
    /// Impermeable base `X = 1`, `t > 0`.
    Bottom,
    /// Initial state `t = 0`.
    Initial,
}

impl Stratum {
    pub fn of(x_hat: f64, t_hat: f64) -> Self {
        if x_hat == 0.0 {
            Stratum::Top
        } else if t_hat == 0.0 {
            Stratum::Initial
        } else if x_hat == 1.0 {
            Stratum::Bottom
        } else {
            Stratum::Interior
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stratum::Interior => "interior",
            Stratum::Top => "top",
            Stratum::Bottom => "bottom",
            Stratum::Initial => "initial",
        }
    }
}

/// Hard Dirichlet transform `J = J_bar + X N` and its derivatives.
pub fn transform_output(jet: &Jet, x_hat: f64, props: &MaterialProps) -> PhysicalJet {
    PhysicalJet {
        j: props.j_bar + x_hat * jet.n,
        dj_dx: jet.n + x_hat * jet.dn_dx,
        dj_dt: x_hat * jet.dn_dt,
        d2j_dx2: 2.0 * jet.dn_dx + x_hat * jet.d2n_dx2,
    }
}

/// Pulls an adjoint on the physical jet back to the raw network jet.
fn transform_adjoint(adj: &PhysicalJet, x_hat: f64) -> Jet {
    Jet {
        n: x_hat * adj.j + adj.dj_dx,
        dn_dx: x_hat * adj.dj_dx + 2.0 * adj.d2j_dx2,
        dn_dt: x_hat * adj.dj_dt,
        d2n_dx2: x_hat * adj.d2j_dx2,
    }
}

/// Residual and its partial derivatives with respect to the physical jet.
/// Evaluates the algebraic expressions for any `J`, physical or not.
pub fn residual_series(law: LawId, pj: &PhysicalJet, props: &MaterialProps) -> (f64, PhysicalJet) {
    let c = props.inv_phi0_cubed();
    let [d0, d1, d2] = diffusivity_series(law, pj.j, props);
    let jx2 = pj.dj_dx * pj.dj_dx;
    let f = pj.dj_dt - c * (d1 * jx2 + d0 * pj.d2j_dx2);
    let df = PhysicalJet {
        j: -c * (d2 * jx2 + d1 * pj.d2j_dx2),
        dj_dx: -2.0 * c * d1 * pj.dj_dx,
        dj_dt: 1.0,
        d2j_dx2: -c * d0,
    };
    (f, df)
}

/// Mass-balance residual for one law. Rejects states outside the
/// constitutive domain.
pub fn pde_residual(law: LawId, pj: &PhysicalJet, props: &MaterialProps) -> Result<f64> {
    if !(pj.j > 1.0 - props.phi0 && pj.j.is_finite()) {
        return Err(Error::Domain {
            quantity: "mass-balance residual",
            value: pj.j,
            requirement: "J > 1 - phi0",
        });
    }
    Ok(residual_series(law, pj, props).0)
}

/// `sum_i e_i f_i`, skipping laws whose selector component is zero.
fn contract(e: &OneHotLaw, mut residual: impl FnMut(LawId) -> f64) -> f64 {
    let mut acc = 0.0;
    for (law, &ei) in LawId::ALL.iter().zip(&e.components()) {
        if ei != 0.0 {
            acc += ei * residual(*law);
        }
    }
    acc
}

fn boundary_penalty(
    pj: &PhysicalJet,
    point: &SamplePoint,
    props: &MaterialProps,
) -> (f64, PhysicalJet) {
    let mut adj = PhysicalJet::default();
    let value = match Stratum::of(point.x_hat, point.t_hat) {
        Stratum::Interior => 0.0,
        Stratum::Top => {
            let r = pj.j - props.j_bar;
            adj.j = 2.0 * r;
            r * r
        }
        Stratum::Bottom => {
            adj.dj_dx = 2.0 * pj.dj_dx;
            pj.dj_dx * pj.dj_dx
        }
        Stratum::Initial => {
            let r = pj.j - 1.0;
            adj.j = 2.0 * r;
            r * r
        }
    };
    (value, adj)
}

/// Loss of one sample given a residual provider for each law.
pub fn sample_loss_with(
    pj: &PhysicalJet,
    point: &SamplePoint,
    props: &MaterialProps,
    residual: impl FnMut(LawId) -> f64,
) -> f64 {
    let r = contract(&point.law, residual);
    r * r + boundary_penalty(pj, point, props).0
}

/// Per-sample loss `(e . f)^2 + L_BI`.
pub fn sample_loss(pj: &PhysicalJet, point: &SamplePoint, props: &MaterialProps) -> Result<f64> {
    let mut err = None;
    let value = sample_loss_with(pj, point, props, |law| match pde_residual(law, pj, props) {
        Ok(f) => f,
        Err(e) => {
            err.get_or_insert(e);
            f64::NAN
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// The composite training loss on raw network jets.
#[derive(Debug, Clone, Copy)]
pub struct ConsolidationLoss {
    pub props: MaterialProps,
}

impl ConsolidationLoss {
    pub fn new(props: MaterialProps) -> Self {
        Self { props }
    }
}

impl SampleLoss for ConsolidationLoss {
    fn evaluate(&self, point: &SamplePoint, jet: &Jet) -> (f64, Jet) {
        let pj = transform_output(jet, point.x_hat, &self.props);
        let mut r = 0.0;
        let mut dr = PhysicalJet::default();
        for (law, &ei) in LawId::ALL.iter().zip(&point.law.components()) {
            if ei != 0.0 {
                let (f, df) = residual_series(*law, &pj, &self.props);
                r += ei * f;
                dr.j += ei * df.j;
                dr.dj_dx += ei * df.dj_dx;
                dr.dj_dt += ei * df.dj_dt;
                dr.d2j_dx2 += ei * df.d2j_dx2;
            }
        }
        let (bi, dbi) = boundary_penalty(&pj, point, &self.props);
        let adj = PhysicalJet {
            j: 2.0 * r * dr.j + dbi.j,
            dj_dx: 2.0 * r * dr.dj_dx + dbi.dj_dx,
            dj_dt: 2.0 * r * dr.dj_dt + dbi.dj_dt,
            d2j_dx2: 2.0 * r * dr.d2j_dx2 + dbi.d2j_dx2,
        };
        (r * r + bi, transform_adjoint(&adj, point.x_hat))
    }
}

/// Mean training loss over a batch, summed in sample order.
pub fn batch_loss(
    params: &ParamVector,
    arch: &MlpArch,
    batch: &[SamplePoint],
    props: &MaterialProps,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let loss = ConsolidationLoss::new(*props);
    let jets = forward_jets(params, arch, batch)?;
    let mut total = 0.0;
    for (i, (pt, jet)) in batch.iter().zip(&jets).enumerate() {
        let v = loss.evaluate(pt, jet).0;
        if !v.is_finite() {
            return Err(Error::NonFiniteLoss { sample: i });
        }
        total += v;
    }
    Ok(total / batch.len() as f64)
}
