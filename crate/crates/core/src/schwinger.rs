//! Electric-field profiles for pair creation, mapped onto the two-level
//! catalog, and the exponent normalization `P ≃ exp(−A m²/eE)`.

use crate::error::{Error, Result, Warning};
use crate::model::ModelSpec;
use serde::{Deserialize, Serialize};

/// Above this `eε/eE` the assisted profile is flagged.
pub const WEAK_FIELD_RATIO: f64 = 0.3;

/// Time dependence of the field. Strengths are `eE` and `eε`; for the
/// assisted profile `ω` belongs to the weak pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Field {
    Constant {
        #[serde(rename = "eE")]
        e_field: f64,
    },
    Sauter {
        #[serde(rename = "eE")]
        e_field: f64,
        omega: f64,
    },
    Assisted {
        #[serde(rename = "eE")]
        e_field: f64,
        eps: f64,
        omega: f64,
    },
}

impl Field {
    pub fn e_field(&self) -> f64 {
        match *self {
            Field::Constant { e_field }
            | Field::Sauter { e_field, .. }
            | Field::Assisted { e_field, .. } => e_field,
        }
    }

    pub fn omega(&self) -> Option<f64> {
        match *self {
            Field::Constant { .. } => None,
            Field::Sauter { omega, .. } | Field::Assisted { omega, .. } => Some(omega),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    #[serde(rename = "m")]
    pub mass: f64,
    #[serde(rename = "pperp")]
    pub p_perp: f64,
    #[serde(rename = "pz")]
    pub p_z: f64,
}

impl Particle {
    /// At rest in the transverse plane and along the field.
    pub fn at_rest(mass: f64) -> Self {
        Self {
            mass,
            p_perp: 0.0,
            p_z: 0.0,
        }
    }

    /// `m⊥ = √(p⊥² + m²)`.
    pub fn m_perp(&self) -> f64 {
        self.mass.hypot(self.p_perp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldProfile {
    pub field: Field,
    pub particle: Particle,
}

impl FieldProfile {
    /// Checks the ranges and returns the non-fatal diagnostics.
    pub fn validate(&self) -> Result<Vec<Warning>> {
        let mut warnings = Vec::new();
        if let Field::Assisted { e_field, eps, .. } = self.field {
            let ratio = eps / e_field;
            if ratio > WEAK_FIELD_RATIO {
                warnings.push(Warning::WeakFieldNotSmall { ratio });
            }
        }
        model_from_field(self).validate()?;
        Ok(warnings)
    }

    /// `γ = mω/eE`; zero for the constant field.
    pub fn gamma(&self) -> f64 {
        self.field
            .omega()
            .map(|w| self.particle.mass * w / self.field.e_field())
            .unwrap_or(0.0)
    }

    /// `A = −(eE/m²) ln P`.
    pub fn exponent(&self, probability: f64) -> Result<f64> {
        exponent_from_probability(probability, self.particle.mass, self.field.e_field())
    }
}

/// Catalog model with `α = 2(p_z − eA_z)` and `V = 2m⊥`.
pub fn model_from_field(profile: &FieldProfile) -> ModelSpec {
    let Particle { mass, p_perp, p_z } = profile.particle;
    match profile.field {
        Field::Constant { e_field } => ModelSpec::ConstantField {
            e_field,
            m_perp: profile.particle.m_perp(),
            p_z,
        },
        Field::Sauter { e_field, omega } => ModelSpec::SauterPulse {
            e_field,
            omega,
            mass,
            p_perp,
            p_z,
        },
        Field::Assisted {
            e_field,
            eps,
            omega,
        } => ModelSpec::AssistedSchwinger {
            e_field,
            eps,
            omega,
            mass,
            p_perp,
            p_z,
        },
    }
}

/// Inverse of [`model_from_field`] for the field models.
pub fn field_of_model(model: &ModelSpec) -> Option<FieldProfile> {
    match *model {
        ModelSpec::ConstantField {
            e_field,
            m_perp,
            p_z,
        } => Some(FieldProfile {
            field: Field::Constant { e_field },
            particle: Particle {
                mass: m_perp,
                p_perp: 0.0,
                p_z,
            },
        }),
        ModelSpec::SauterPulse {
            e_field,
            omega,
            mass,
            p_perp,
            p_z,
        } => Some(FieldProfile {
            field: Field::Sauter { e_field, omega },
            particle: Particle { mass, p_perp, p_z },
        }),
        ModelSpec::AssistedSchwinger {
            e_field,
            eps,
            omega,
            mass,
            p_perp,
            p_z,
        } => Some(FieldProfile {
            field: Field::Assisted {
                e_field,
                eps,
                omega,
            },
            particle: Particle { mass, p_perp, p_z },
        }),
        _ => None,
    }
}

/// Keldysh parameter `γ = mω/eE`.
pub fn keldysh_gamma(mass: f64, omega: f64, e_field: f64) -> Result<f64> {
    if !(e_field > 0.0 && e_field.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eE must be positive, got {e_field}"
        )));
    }
    if !(mass.is_finite() && omega.is_finite()) {
        return Err(Error::InvalidParameter("m and omega must be finite".into()));
    }
    Ok(mass * omega / e_field)
}

/// `A = −(eE/m²) ln P`.
pub fn exponent_from_probability(probability: f64, mass: f64, e_field: f64) -> Result<f64> {
    if !(probability > 0.0 && probability <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "probability must lie in (0, 1], got {probability}"
        )));
    }
    if !(mass > 0.0 && e_field > 0.0) {
        return Err(Error::InvalidParameter("m and eE must be positive".into()));
    }
    Ok(-(e_field / (mass * mass)) * probability.ln())
}

/// Named benchmark parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Sauter pulse, `m = 3`, `eE = 3`, `p = 0`.
    Fig7,
    /// Constant field assisted by a weak Sauter pulse, `m = 3`, `eE = 3`,
    /// `eε = 0.3`, `p = 0`.
    Fig8,
}

pub const PRESET_MASS: f64 = 3.0;
pub const PRESET_FIELD: f64 = 3.0;
pub const PRESET_EPS: f64 = 0.3;

impl Preset {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "fig7" => Ok(Preset::Fig7),
            "fig8" => Ok(Preset::Fig8),
            other => Err(Error::Config(format!("unknown preset `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
        }
    }

    /// The preset at Keldysh parameter `gamma`.
    pub fn profile(self, gamma: f64) -> FieldProfile {
        let omega = gamma * PRESET_FIELD / PRESET_MASS;
        let field = match self {
            Preset::Fig7 => Field::Sauter {
                e_field: PRESET_FIELD,
                omega,
            },
            Preset::Fig8 => Field::Assisted {
                e_field: PRESET_FIELD,
                eps: PRESET_EPS,
                omega,
            },
        };
        FieldProfile {
            field,
            particle: Particle::at_rest(PRESET_MASS),
        }
    }

    /// Sweep range in γ.
    pub fn gamma_range(self) -> (f64, f64) {
        match self {
            Preset::Fig7 => (0.25, 6.0),
            Preset::Fig8 => (0.25, 10.0),
        }
    }
}
