//! Constitutive laws of the hyper-elastic skeleton and the mass-balance
//! mobility coefficient.
//!
//! Each law gives the pressure gradient as `dp/dX = g(J) dJ/dX`. Combined
//! with the Kozeny-Carman mobility `m(J) = (J - 1 + phi0)^3 / J^2`, the
//! mass balance becomes the nonlinear diffusion equation
//!
//! ```text
//! J_t = phi0^-3 * d/dX [ D(J) J_X ],    D(J) = m(J) g(J)
//! ```
//!
//! The checked functions reject states outside the physical range. The
//! `*_series` helpers evaluate the raw algebraic expressions without guards;
//! the training loss needs them because an untrained network routinely
//! predicts unphysical J.

use std::fmt;

use crate::error::{Error, Result};

/// Dimensionless material constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialProps {
    pub gamma_hat: f64,
    pub mu_hat: f64,
    pub phi0: f64,
    pub j_bar: f64,
}

impl Default for MaterialProps {
    /// gamma = mu = 1/3, phi0 = 0.3, surface load J = 0.8.
    fn default() -> Self {
        Self {
            gamma_hat: 1.0 / 3.0,
            mu_hat: 1.0 / 3.0,
            phi0: 0.3,
            j_bar: 0.8,
        }
    }
}

impl MaterialProps {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidMaterial(msg));
        let all = [self.gamma_hat, self.mu_hat, self.phi0, self.j_bar];
        if all.iter().any(|v| !v.is_finite()) {
            return bad(format!("non-finite value in {self:?}"));
        }
        if !(self.phi0 > 0.0 && self.phi0 < 1.0) {
            return bad(format!("phi0 = {} must lie in (0, 1)", self.phi0));
        }
        if !(self.j_bar > 0.0 && self.j_bar <= 1.0) {
            return bad(format!("j_bar = {} must lie in (0, 1]", self.j_bar));
        }
        if self.j_bar <= 1.0 - self.phi0 {
            return bad(format!(
                "j_bar = {} must exceed 1 - phi0 = {}",
                self.j_bar,
                1.0 - self.phi0
            ));
        }
        if self.gamma_hat < 0.0 {
            return bad(format!("gamma_hat = {} must be >= 0", self.gamma_hat));
        }
        if self.mu_hat <= 0.0 {
            return bad(format!("mu_hat = {} must be > 0", self.mu_hat));
        }
        Ok(())
    }

    /// `1 / phi0^3`, the prefactor of the divergence term.
    pub fn inv_phi0_cubed(&self) -> f64 {
        1.0 / (self.phi0 * self.phi0 * self.phi0)
    }
}

/// Which constitutive law closes the mass balance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LawId {
    /// Saint-Venant Kirchhoff.
    SaintVenantKirchhoff = 1,
    /// Saint-Venant Kirchhoff with a logarithmic volumetric term.
    ModifiedSaintVenantKirchhoff = 2,
    NeoHookean = 3,
}

impl LawId {
    pub const ALL: [LawId; 3] = [
        LawId::SaintVenantKirchhoff,
        LawId::ModifiedSaintVenantKirchhoff,
        LawId::NeoHookean,
    ];

    pub fn from_index(index: usize) -> Result<Self> {
        match index {
            1 => Ok(LawId::SaintVenantKirchhoff),
            2 => Ok(LawId::ModifiedSaintVenantKirchhoff),
            3 => Ok(LawId::NeoHookean),
            other => Err(Error::InvalidLaw(other)),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            LawId::SaintVenantKirchhoff => "saint-venant-kirchhoff",
            LawId::ModifiedSaintVenantKirchhoff => "modified-saint-venant-kirchhoff",
            LawId::NeoHookean => "neo-hookean",
        }
    }
}

impl fmt::Display for LawId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// One-hot law selector fed to the network alongside (X, t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneHotLaw([f64; 3]);

impl OneHotLaw {
    pub fn new(e: [f64; 3]) -> Result<Self> {
        let ones = e.iter().filter(|&&v| v == 1.0).count();
        let zeros = e.iter().filter(|&&v| v == 0.0).count();
        if ones == 1 && zeros == 2 {
            Ok(Self(e))
        } else {
            Err(Error::InvalidEncoding(e))
        }
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn law(&self) -> LawId {
        let k = self.0.iter().position(|&v| v == 1.0).unwrap_or(0);
        LawId::ALL[k]
    }

    /// Inner product with a per-law vector.
    pub fn contract(&self, values: [f64; 3]) -> f64 {
        self.0[0] * values[0] + self.0[1] * values[1] + self.0[2] * values[2]
    }
}

pub fn encode_law(law: LawId) -> OneHotLaw {
    let mut e = [0.0; 3];
    e[law.index() - 1] = 1.0;
    OneHotLaw(e)
}

fn require_positive(j: f64, quantity: &'static str) -> Result<()> {
    if j > 0.0 && j.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            quantity,
            value: j,
            requirement: "J > 0",
        })
    }
}

fn require_mobile(j: f64, props: &MaterialProps, quantity: &'static str) -> Result<()> {
    if j > 1.0 - props.phi0 && j.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            quantity,
            value: j,
            requirement: "J > 1 - phi0",
        })
    }
}

/// `(1 - ln J) / J^2` and its first two derivatives.
fn log_term(j: f64) -> [f64; 3] {
    let ln = j.ln();
    let j2 = j * j;
    [
        (1.0 - ln) / j2,
        (2.0 * ln - 3.0) / (j2 * j),
        (11.0 - 6.0 * ln) / (j2 * j2),
    ]
}

/// `g(J)`, `g'(J)`, `g''(J)` without domain checks.
pub fn stiffness_series(law: LawId, j: f64, props: &MaterialProps) -> [f64; 3] {
    let (gamma, mu) = (props.gamma_hat, props.mu_hat);
    match law {
        LawId::SaintVenantKirchhoff => [(3.0 * j * j - 1.0) / 2.0, 3.0 * j, 3.0],
        LawId::ModifiedSaintVenantKirchhoff => {
            let h = log_term(j);
            [
                gamma * h[0] + mu * (3.0 * j * j - 1.0),
                gamma * h[1] + 6.0 * mu * j,
                gamma * h[2] + 6.0 * mu,
            ]
        }
        LawId::NeoHookean => {
            let h = log_term(j);
            let inv2 = 1.0 / (j * j);
            [
                gamma * h[0] + mu * (1.0 + inv2),
                gamma * h[1] - 2.0 * mu * inv2 / j,
                gamma * h[2] + 6.0 * mu * inv2 * inv2,
            ]
        }
    }
}

/// `m(J)`, `m'(J)`, `m''(J)` without domain checks.
pub fn mobility_series(j: f64, props: &MaterialProps) -> [f64; 3] {
    let c = j - 1.0 + props.phi0;
    let inv = 1.0 / j;
    let inv2 = inv * inv;
    let c2 = c * c;
    [
        c2 * c * inv2,
        3.0 * c2 * inv2 - 2.0 * c2 * c * inv2 * inv,
        6.0 * c * inv2 - 12.0 * c2 * inv2 * inv + 6.0 * c2 * c * inv2 * inv2,
    ]
}

/// `D(J)`, `D'(J)`, `D''(J)` for `D = m g`, without domain checks.
pub fn diffusivity_series(law: LawId, j: f64, props: &MaterialProps) -> [f64; 3] {
    let m = mobility_series(j, props);
    let g = stiffness_series(law, j, props);
    [
        m[0] * g[0],
        m[1] * g[0] + m[0] * g[1],
        m[2] * g[0] + 2.0 * m[1] * g[1] + m[0] * g[2],
    ]
}

/// `D(J)` alone, without domain checks. Cheaper than [`diffusivity_series`]
/// for explicit time stepping.
pub fn diffusivity_value(law: LawId, j: f64, props: &MaterialProps) -> f64 {
    let c = j - 1.0 + props.phi0;
    let inv2 = 1.0 / (j * j);
    let m = c * c * c * inv2;
    let (gamma, mu) = (props.gamma_hat, props.mu_hat);
    let g = match law {
        LawId::SaintVenantKirchhoff => (3.0 * j * j - 1.0) / 2.0,
        LawId::ModifiedSaintVenantKirchhoff => {
            gamma * (1.0 - j.ln()) * inv2 + mu * (3.0 * j * j - 1.0)
        }
        LawId::NeoHookean => gamma * (1.0 - j.ln()) * inv2 + mu * (1.0 + inv2),
    };
    m * g
}

/// Tangent stiffness `g(J)` with `dp/dX = g(J) dJ/dX`.
pub fn stiffness_modulus(law: LawId, j: f64, props: &MaterialProps) -> Result<f64> {
    require_positive(j, "stiffness modulus")?;
    Ok(stiffness_series(law, j, props)[0])
}

/// Closed-form antiderivative `G(J)` of the stiffness, normalised so that
/// `G(1) = 0` for every law.
pub fn stiffness_antiderivative(law: LawId, j: f64, props: &MaterialProps) -> Result<f64> {
    require_positive(j, "stiffness antiderivative")?;
    let (gamma, mu) = (props.gamma_hat, props.mu_hat);
    Ok(match law {
        LawId::SaintVenantKirchhoff => (j * j * j - j) / 2.0,
        LawId::ModifiedSaintVenantKirchhoff => gamma * j.ln() / j + mu * (j * j * j - j),
        LawId::NeoHookean => gamma * j.ln() / j + mu * (j - 1.0 / j),
    })
}

pub fn mobility(j: f64, props: &MaterialProps) -> Result<f64> {
    require_mobile(j, props, "mobility")?;
    Ok(mobility_series(j, props)[0])
}

pub fn diffusivity(law: LawId, j: f64, props: &MaterialProps) -> Result<f64> {
    require_mobile(j, props, "diffusivity")?;
    Ok(diffusivity_series(law, j, props)[0])
}

pub fn diffusivity_derivative(law: LawId, j: f64, props: &MaterialProps) -> Result<f64> {
    require_mobile(j, props, "diffusivity derivative")?;
    Ok(diffusivity_series(law, j, props)[1])
}
