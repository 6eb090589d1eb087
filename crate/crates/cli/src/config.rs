use crate::args::{MethodArgs, MethodId, ModelArgs, NumericArgs};
use crate::error::CliError;
use thimbleq::model::KvParams;
use thimbleq::oracle::DEFAULT_TOL;
use thimbleq::schwinger::{model_from_field, Preset};
use thimbleq::{ModelSpec, Window};

/// Numerical settings shared by every method.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub tol: f64,
    pub window: Option<Window>,
}

impl Settings {
    pub fn from_args(a: &NumericArgs) -> Result<Self, CliError> {
        let tol = a.tol.unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol < 1.0) {
            return Err(CliError::Config(format!(
                "--tol must lie in (0, 1), got {tol}"
            )));
        }
        let window = a.window.as_deref().map(parse_window).transpose()?;
        Ok(Self { tol, window })
    }

    pub fn window_for(&self, model: &ModelSpec) -> Window {
        self.window.unwrap_or_else(|| model.default_window())
    }
}

pub fn parse_window(s: &str) -> Result<Window, CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Config(format!("--window: cannot parse `{s}`")))?;
    let w = match parts[..] {
        [h] => Window::upper(h),
        [a, b, c, d] => Window::new(a, b, c, d),
        _ => {
            return Err(CliError::Config(
                "--window takes H or re_min,re_max,im_min,im_max".into(),
            ))
        }
    };
    let ok = [w.re_min, w.re_max, w.im_min, w.im_max]
        .iter()
        .all(|v| v.is_finite())
        && w.re_min < w.re_max
        && w.im_min >= 0.0
        && w.im_min < w.im_max;
    if !ok {
        return Err(CliError::Config(format!(
            "--window `{s}` is not a non-empty upper-half-plane box"
        )));
    }
    Ok(w)
}

/// Requested methods in canonical order, duplicates removed.
pub fn methods(a: &MethodArgs, default: &[MethodId]) -> Vec<MethodId> {
    let mut m = a.methods.clone().unwrap_or_else(|| default.to_vec());
    m.sort();
    m.dedup();
    m
}

fn preset_model(name: &str, gamma: Option<f64>) -> Result<ModelSpec, CliError> {
    let mlz = |big_t| ModelSpec::ModifiedLz {
        lambda: 1.0,
        tau: 1.0,
        big_t,
    };
    Ok(match name {
        "constant" => ModelSpec::ConstantField {
            e_field: 1.0,
            m_perp: 1.0,
            p_z: 0.0,
        },
        "fig3" => mlz(2.0),
        "fig5" => mlz(0.5),
        other => model_from_field(&Preset::parse(other)?.profile(gamma.unwrap_or(1.0))),
    })
}

/// Builds the model from a preset, a config document and the long flags,
/// in that order of precedence (flags win).
pub fn resolve_model(a: &ModelArgs) -> Result<ModelSpec, CliError> {
    let flags: [(&str, Option<f64>); 9] = [
        ("lambda", a.lambda),
        ("tau", a.tau),
        ("T", a.big_t),
        ("eE", a.e_field),
        ("eps", a.eps),
        ("omega", a.omega),
        ("m", a.m),
        ("pperp", a.pperp),
        ("pz", a.pz),
    ];
    if a.gamma.is_some() && a.omega.is_some() {
        return Err(CliError::Config(
            "give either omega or gamma, not both".into(),
        ));
    }
    let mut model = if let Some(p) = &a.preset {
        if a.model.is_some() || a.config.is_some() {
            return Err(CliError::Config(
                "--preset cannot be combined with --model or --config".into(),
            ));
        }
        let mut m = preset_model(p, a.gamma)?;
        for (k, v) in flags {
            if let Some(v) = v {
                m = m.with_param(k, v)?;
            }
        }
        m
    } else {
        let mut kv = match &a.config {
            Some(path) => KvParams::parse(&std::fs::read_to_string(path)?)?,
            None => KvParams::default(),
        };
        if let Some(m) = &a.model {
            kv.model = Some(m.clone());
        }
        let slots = [
            &mut kv.lambda,
            &mut kv.tau,
            &mut kv.big_t,
            &mut kv.e_field,
            &mut kv.eps,
            &mut kv.omega,
            &mut kv.mass,
            &mut kv.p_perp,
            &mut kv.p_z,
        ];
        for (slot, (_, v)) in slots.into_iter().zip(flags) {
            if v.is_some() {
                *slot = v;
            }
        }
        if kv.model.is_none() {
            return Err(CliError::Config(
                "give --model, --config or --preset".into(),
            ));
        }
        if a.gamma.is_some() {
            if kv.omega.is_some() {
                return Err(CliError::Config(
                    "config gives omega, so --gamma cannot be used".into(),
                ));
            }
            if matches!(
                kv.model.as_deref(),
                Some("sauter" | "sauter-pulse" | "dasm" | "assisted-schwinger")
            ) {
                // placeholder, replaced by the gamma below
                kv.omega = Some(1.0);
            }
        }
        kv.build()?
    };
    if let (Some(g), None) = (a.gamma, &a.preset) {
        model = model.with_param("gamma", g)?;
    }
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_forms() {
        assert_eq!(parse_window("3").unwrap(), Window::upper(3.0));
        assert_eq!(
            parse_window("-1,1,0,2").unwrap(),
            Window::new(-1.0, 1.0, 0.0, 2.0)
        );
        assert!(parse_window("1,2").is_err());
        assert!(parse_window("1,-1,0,2").is_err());
        assert!(parse_window("x").is_err());
    }

    #[test]
    fn flags_build_models() {
        let a = ModelArgs {
            model: Some("mlz".into()),
            lambda: Some(1.0),
            tau: Some(1.0),
            big_t: Some(2.0),
            ..Default::default()
        };
        assert_eq!(
            resolve_model(&a).unwrap(),
            ModelSpec::ModifiedLz {
                lambda: 1.0,
                tau: 1.0,
                big_t: 2.0
            }
        );
    }

    #[test]
    fn gamma_sets_omega() {
        let a = ModelArgs {
            model: Some("sauter".into()),
            e_field: Some(3.0),
            m: Some(3.0),
            gamma: Some(4.0),
            ..Default::default()
        };
        match resolve_model(&a).unwrap() {
            ModelSpec::SauterPulse { omega, .. } => assert!((omega - 4.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn presets() {
        let a = ModelArgs {
            preset: Some("fig8".into()),
            gamma: Some(6.0),
            ..Default::default()
        };
        assert!(
            matches!(resolve_model(&a).unwrap(), ModelSpec::AssistedSchwinger { eps, .. } if eps == 0.3)
        );
        let bad = ModelArgs {
            preset: Some("fig9".into()),
            ..Default::default()
        };
        assert!(matches!(resolve_model(&bad), Err(CliError::Config(_))));
    }

    #[test]
    fn missing_model_is_config_error() {
        assert!(matches!(
            resolve_model(&ModelArgs::default()),
            Err(CliError::Config(_))
        ));
    }
}
