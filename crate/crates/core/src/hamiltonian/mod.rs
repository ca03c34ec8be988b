//! Hamiltonian assembly.
//!
//! The Kogut-Susskind operator acts on a QED-picture basis:
//!
//! ```text
//! H = c_E Σ_l E_l² − c_B Σ_p cos(θ_bottom + θ_right − θ_top − θ_left)
//! ```
//!
//! with `cos = (U + U†)/2`, where the plaquette operator `U` lowers `E` on
//! the bottom and right links and raises it on the top and left ones. In
//! dimensionless units `c_E = g²/2` and `c_B = 1/g²`. Transitions that would
//! push a link outside `[−Λ, Λ]` are dropped, never clipped.
//!
//! [`rotor`] holds the cold-atom rotor model in both pictures and
//! [`effective`] its numerically derived second-order effective theory.

pub mod effective;
pub mod rotor;

use serde::Serialize;

use crate::basis::{ChargeConfig, GaugeSectorBasis, Picture};
use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, VertexId};
use crate::sparse::SparseOperator;

pub use effective::derive_effective;
pub use rotor::{build_microscopic_rotor, stagger_equivalent};

/// Default threshold for `λ/μ` and `λ/Ω` in the QED regime.
pub const DEFAULT_REGIME_RATIO: f64 = 100.0;

/// Coupling constants in either the gauge-theory or the rotor-model form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CouplingParams {
    Qed { g2: f64 },
    Micro { lambda: f64, mu: f64, omega: f64 },
}

impl CouplingParams {
    pub fn qed(g2: f64) -> Result<Self> {
        if !(g2.is_finite() && g2 > 0.0) {
            return Err(Error::InvalidParams(format!("g² must be positive, got {g2}")));
        }
        Ok(CouplingParams::Qed { g2 })
    }

    /// `λ > 0`; `μ, Ω ≥ 0` (zero switches the corresponding term off).
    pub fn micro(lambda: f64, mu: f64, omega: f64) -> Result<Self> {
        let mut bad = Vec::new();
        if !(lambda.is_finite() && lambda > 0.0) {
            bad.push(format!("λ must be positive, got {lambda}"));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            bad.push(format!("μ must be non-negative, got {mu}"));
        }
        if !(omega.is_finite() && omega >= 0.0) {
            bad.push(format!("Ω must be non-negative, got {omega}"));
        }
        if !bad.is_empty() {
            return Err(Error::InvalidParams(bad.join("; ")));
        }
        Ok(CouplingParams::Micro { lambda, mu, omega })
    }

    pub fn is_micro(&self) -> bool {
        matches!(self, CouplingParams::Micro { .. })
    }

    /// `(λ, μ, Ω)`, or an error for the QED form.
    pub fn rotor(&self, what: &str) -> Result<(f64, f64, f64)> {
        match *self {
            CouplingParams::Micro { lambda, mu, omega } => Ok((lambda, mu, omega)),
            CouplingParams::Qed { .. } => Err(Error::InvalidParams(format!("{what} needs rotor parameters λ, μ, Ω"))),
        }
    }

    /// `g²`; for rotor parameters, `g⁴ = λμ / (2Ω²)`.
    pub fn g2(&self) -> Result<f64> {
        match *self {
            CouplingParams::Qed { g2 } => Ok(g2),
            CouplingParams::Micro { lambda, mu, omega } => {
                if mu <= 0.0 || omega <= 0.0 {
                    return Err(Error::InvalidParams("g² is undefined unless μ > 0 and Ω > 0".into()));
                }
                Ok((lambda * mu / (2.0 * omega * omega)).sqrt())
            }
        }
    }

    /// Energy unit `U₀ = 2μ/g²` of the rotor model; 1 for the QED form.
    pub fn energy_scale(&self) -> Result<f64> {
        match *self {
            CouplingParams::Qed { .. } => Ok(1.0),
            CouplingParams::Micro { mu, .. } => Ok(2.0 * mu / self.g2()?),
        }
    }

    /// Dimensionless Kogut-Susskind coefficients.
    pub fn ks_coefficients(&self) -> Result<KsCoefficients> {
        Ok(KsCoefficients::from_g2(self.g2()?))
    }

    pub fn regime(&self, ratio: f64) -> Option<RegimeCheck> {
        let CouplingParams::Micro { lambda, mu, omega } = *self else {
            return None;
        };
        let lambda_over_mu = lambda / mu;
        let lambda_over_omega = lambda / omega;
        let slack = ratio * (1.0 - 1e-12);
        Some(RegimeCheck {
            lambda_over_mu,
            lambda_over_omega,
            ratio,
            ok: lambda_over_mu >= slack && lambda_over_omega >= slack,
        })
    }
}

/// Whether `λ ≫ μ, Ω` holds at the configured ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeCheck {
    pub lambda_over_mu: f64,
    pub lambda_over_omega: f64,
    pub ratio: f64,
    pub ok: bool,
}

impl std::fmt::Display for RegimeCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "QED regime needs λ/μ and λ/Ω ≥ {}; got λ/μ = {}, λ/Ω = {}",
            self.ratio, self.lambda_over_mu, self.lambda_over_omega
        )
    }
}

/// `H = electric Σ E² − plaquette Σ cos(curl θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsCoefficients {
    pub electric: f64,
    pub plaquette: f64,
}

impl KsCoefficients {
    pub fn from_g2(g2: f64) -> Self {
        Self {
            electric: g2 / 2.0,
            plaquette: 1.0 / g2,
        }
    }

    /// The second-order rotor-model couplings in physical units:
    /// `μ Σ E² − (4Ω²/λ) Σ cos`.
    pub fn rotor_effective(lambda: f64, mu: f64, omega: f64) -> Self {
        Self {
            electric: mu,
            plaquette: 4.0 * omega * omega / lambda,
        }
    }
}

fn require_qed(basis: &GaugeSectorBasis, what: &'static str) -> Result<()> {
    if basis.picture() != Picture::Qed {
        return Err(Error::PictureMismatch {
            what,
            expected: Picture::Qed.name(),
        });
    }
    Ok(())
}

/// `coefficient · Σ_l E_l²` on the diagonal.
pub fn electric_term(basis: &GaugeSectorBasis, coefficient: f64) -> SparseOperator {
    SparseOperator::from_rows(basis.len(), |i, out| {
        let e2: i64 = basis.state(i).iter().map(|&e| i64::from(e) * i64::from(e)).sum();
        out.push((i, coefficient * e2 as f64));
    })
}

/// `−coefficient · Σ_p cos(curl θ)`: element `−coefficient/2` for every
/// pair of states related by one plaquette raise/lower cycle.
pub fn plaquette_term(basis: &GaugeSectorBasis, geom: &LatticeGeometry, coefficient: f64) -> SparseOperator {
    let t = basis.trunc() as i8;
    let amplitude = -coefficient / 2.0;
    SparseOperator::from_rows(basis.len(), |i, out| {
        let state = basis.state(i);
        let mut next = state.to_vec();
        for p in geom.plaquettes() {
            let links = geom.plaquette_links(p);
            // U lowers along +1 links; U† is the opposite move
            for dir in [1i8, -1] {
                next.copy_from_slice(state);
                let inside = links.iter().all(|&(l, s)| {
                    let v = next[l.0] - dir * s;
                    next[l.0] = v;
                    (-t..=t).contains(&v)
                });
                if !inside {
                    continue;
                }
                let j = basis.index_of(&next);
                debug_assert!(j.is_some(), "plaquette move left the sector");
                if let Some(j) = j {
                    out.push((j, amplitude));
                }
            }
        }
    })
}

/// Diagonal `(g²/2) Σ_l E_l²`.
pub fn build_electric(basis: &GaugeSectorBasis, g2: f64) -> Result<SparseOperator> {
    require_qed(basis, "electric term")?;
    Ok(electric_term(basis, g2 / 2.0))
}

/// `−(1/g²) Σ_p cos(curl θ)`.
pub fn build_magnetic(basis: &GaugeSectorBasis, geom: &LatticeGeometry, g2: f64) -> Result<SparseOperator> {
    require_qed(basis, "magnetic term")?;
    Ok(plaquette_term(basis, geom, 1.0 / g2))
}

/// Electric plus magnetic term.
pub fn build_kogut_susskind(
    basis: &GaugeSectorBasis,
    geom: &LatticeGeometry,
    coefficients: KsCoefficients,
) -> Result<SparseOperator> {
    require_qed(basis, "Kogut-Susskind Hamiltonian")?;
    electric_term(basis, coefficients.electric).add(&plaquette_term(basis, geom, coefficients.plaquette))
}

/// Gauss operator at `v`: `div E(v) − Q_v` in the QED picture,
/// `Σ_{l∋v} δ_l − Δ_v` in the microscopic one.
pub fn gauss_operator(
    basis: &GaugeSectorBasis,
    geom: &LatticeGeometry,
    v: VertexId,
    charges: &ChargeConfig,
) -> Result<SparseOperator> {
    if charges.picture() != basis.picture() {
        geom.require_bipartite("picture conversion")?;
    }
    let q = f64::from(charges.to_picture(geom, basis.picture()).at(v));
    let picture = basis.picture();
    Ok(SparseOperator::from_rows(basis.len(), |i, out| {
        let s = basis.state(i);
        let lhs = match picture {
            Picture::Qed => geom.divergence(v, s),
            Picture::Micro => geom.incident_sum(v, s),
        };
        out.push((i, f64::from(lhs) - q));
    }))
}
