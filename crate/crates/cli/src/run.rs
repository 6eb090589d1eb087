use crate::args::MethodId;
use crate::config::Settings;
use serde::Serialize;
use serde_json::{json, Value};
use thimbleq::ddp::ddp_probability_in;
use thimbleq::oracle::{
    ode_transition_probability, truncated_amplitude_real_axis, HorizonPolicy, OracleResult,
};
use thimbleq::schwinger::field_of_model;
use thimbleq::thimble::{
    amplitude_exact, amplitude_gaussian, AmplitudeEstimate, Landscape, Structure, ThimbleConfig,
};
use thimbleq::{ModelSpec, Warning};

/// Outcome of one method at one parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct MethodRow {
    pub method: MethodId,
    #[serde(rename = "P")]
    pub p: Option<f64>,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    pub applicable: Option<bool>,
    pub flags: Vec<String>,
    /// Saddles with nonzero intersection number (thimble methods).
    pub saddles: Option<usize>,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl MethodRow {
    fn failed(method: MethodId, e: &thimbleq::Error) -> Self {
        Self {
            method,
            p: None,
            a: None,
            applicable: None,
            flags: vec![format!("error:{}", error_kind(e))],
            saddles: None,
            error: Some(e.to_string()),
            detail: None,
        }
    }

    fn value(method: MethodId, model: &ModelSpec, p: f64) -> Self {
        Self {
            method,
            p: Some(p),
            a: exponent(model, p),
            applicable: Some(true),
            flags: Vec::new(),
            saddles: None,
            error: None,
            detail: None,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

/// `A = −(eE/m²) ln P` for the field models and `−ln P` otherwise.
pub fn exponent(model: &ModelSpec, p: f64) -> Option<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return None;
    }
    match field_of_model(model) {
        Some(profile) => profile.exponent(p).ok(),
        None => Some(-p.ln()),
    }
}

fn error_kind(e: &thimbleq::Error) -> &'static str {
    use thimbleq::Error as E;
    match e {
        E::InvalidParameter(_) => "invalid-parameter",
        E::PoleProximity { .. } => "pole-proximity",
        E::ClosingPoint(_) => "closing-point",
        E::ZeroEta(_) => "zero-eta",
        E::NoClosingPoint => "no-closing-point",
        E::SingularPath(_) => "singular-path",
        E::TracingStall(_) => "tracing-stall",
        E::DegenerateSaddle { .. } => "degenerate-saddle",
        E::Domain(_) => "domain",
        E::NonConvergence(_) => "non-convergence",
        E::Config(_) => "config",
    }
}

pub fn warning_flag(w: &Warning) -> &'static str {
    match w {
        Warning::WindowTooSmall => "window-too-small",
        Warning::DegenerateSaddle { .. } => "degenerate-saddle",
        Warning::NoSaddle => "no-saddle",
        Warning::TangentialCrossing { .. } => "tangential-crossing",
        Warning::TailTruncation { .. } => "tail-truncation",
        Warning::Clamped { .. } => "clamped",
        Warning::StokesCollision { .. } => "stokes-collision",
        Warning::WeakFieldNotSmall { .. } => "weak-field-not-small",
    }
}

fn push_flags<'a>(flags: &mut Vec<String>, ws: impl IntoIterator<Item = &'a Warning>) {
    for w in ws {
        let f = warning_flag(w).to_string();
        if !flags.contains(&f) {
            flags.push(f);
        }
    }
}

fn run_ddp(model: &ModelSpec, s: &Settings, detail: bool) -> MethodRow {
    let r = match ddp_probability_in(model, &s.window_for(model)) {
        Ok(r) => r,
        Err(e) => return MethodRow::failed(MethodId::Ddp, &e),
    };
    let mut row = MethodRow::value(MethodId::Ddp, model, r.probability);
    push_flags(&mut row.flags, &r.warnings);
    if !r.applicable {
        row.p = None;
        row.a = None;
        row.applicable = Some(false);
        row.flags.insert(0, "pole-obstruction".into());
    }
    if r.degenerate {
        row.flags.push("degenerate".into());
    }
    if detail {
        row.detail = Some(json!({
            "closing_point": r.closing_point,
            "exponent": r.exponent,
            "formal_probability": r.probability,
            "obstruction": r.obstruction,
        }));
    }
    row
}

fn thimble_row(
    method: MethodId,
    model: &ModelSpec,
    structure: &Structure,
    est: thimbleq::Result<AmplitudeEstimate>,
    detail: bool,
) -> MethodRow {
    let est = match est {
        Ok(e) => e,
        Err(e) => return MethodRow::failed(method, &e),
    };
    let mut row = MethodRow::value(method, model, est.probability);
    row.saddles = Some(structure.contributing().count());
    // degeneracy only matters for the saddles that enter the sum, which the
    // estimate reports itself
    let search = structure
        .warnings
        .iter()
        .filter(|w| !matches!(w, Warning::DegenerateSaddle { .. }));
    push_flags(&mut row.flags, search.chain(&est.warnings));
    if detail {
        row.detail = Some(json!({
            "amplitude": est.amplitude,
            "clamped": est.clamped,
            "terms": est.terms,
        }));
    }
    row
}

fn oracle_row(
    method: MethodId,
    model: &ModelSpec,
    r: thimbleq::Result<OracleResult>,
    detail: bool,
) -> MethodRow {
    let r = match r {
        Ok(r) => r,
        Err(e) => return MethodRow::failed(method, &e),
    };
    let mut row = MethodRow::value(method, model, r.probability);
    if detail {
        row.detail = Some(serde_json::to_value(r).unwrap_or(Value::Null));
    }
    row
}

/// Runs `methods` at one point. Failures stay in their own row.
pub fn run_point(
    model: &ModelSpec,
    methods: &[MethodId],
    s: &Settings,
    detail: bool,
) -> Vec<MethodRow> {
    let wants_thimble = methods
        .iter()
        .any(|m| matches!(m, MethodId::ThimbleGaussian | MethodId::ThimbleExact));
    let structure = wants_thimble.then(|| {
        Landscape::new(model, s.window_for(model), ThimbleConfig::default()).analyze(false)
    });
    methods
        .iter()
        .map(|&m| match m {
            MethodId::Ddp => run_ddp(model, s, detail),
            MethodId::ThimbleGaussian | MethodId::ThimbleExact => match structure.as_ref().unwrap()
            {
                Err(e) => MethodRow::failed(m, e),
                Ok(st) => {
                    let est = if m == MethodId::ThimbleGaussian {
                        let saddles: Vec<_> = st.saddles.iter().map(|x| x.saddle).collect();
                        amplitude_gaussian(&saddles)
                    } else {
                        amplitude_exact(st)
                    };
                    thimble_row(m, model, st, est, detail)
                }
            },
            MethodId::Ode => oracle_row(
                m,
                model,
                ode_transition_probability(model, s.tol, HorizonPolicy::default()),
                detail,
            ),
            MethodId::Quadrature => oracle_row(
                m,
                model,
                truncated_amplitude_real_axis(model, s.tol, HorizonPolicy::default()),
                detail,
            ),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> Settings {
        Settings {
            tol: 1e-10,
            window: None,
        }
    }

    #[test]
    fn obstructed_ddp_is_null_with_reason() {
        let m = ModelSpec::ModifiedLz {
            lambda: 1.0,
            tau: 1.0,
            big_t: 0.5,
        };
        let rows = run_point(&m, &[MethodId::Ddp], &settings(), false);
        assert_eq!(rows[0].p, None);
        assert_eq!(rows[0].applicable, Some(false));
        assert_eq!(rows[0].flags[0], "pole-obstruction");
    }

    #[test]
    fn constant_field_exponent_is_pi() {
        let m = ModelSpec::ConstantField {
            e_field: 1.0,
            m_perp: 1.0,
            p_z: 0.0,
        };
        let rows = run_point(&m, &[MethodId::Ddp], &settings(), false);
        assert!((rows[0].a.unwrap() - std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn exponent_normalization() {
        let mlz = ModelSpec::ModifiedLz {
            lambda: 1.0,
            tau: 1.0,
            big_t: 2.0,
        };
        assert!((exponent(&mlz, (-2.0f64).exp()).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(exponent(&mlz, 0.0), None);
    }
}
