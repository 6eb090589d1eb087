use crate::args::{FigureId, MethodId, Spacing};
use crate::error::CliError;
use thimbleq::schwinger::{model_from_field, Preset};
use thimbleq::ModelSpec;

/// Figure grids default to this many points.
pub const DEFAULT_COUNT: usize = 40;

pub const DEFAULT_SWEEP_METHODS: [MethodId; 3] =
    [MethodId::Ddp, MethodId::ThimbleGaussian, MethodId::Ode];

#[derive(Debug, Clone)]
pub struct Grid {
    pub param: String,
    pub spacing: Spacing,
    pub points: Vec<(f64, ModelSpec)>,
}

pub fn axis(from: f64, to: f64, count: usize, spacing: Spacing) -> Result<Vec<f64>, CliError> {
    if count == 0 {
        return Err(CliError::Config("--count must be at least 1".into()));
    }
    if !(from.is_finite() && to.is_finite()) {
        return Err(CliError::Config("sweep bounds must be finite".into()));
    }
    if spacing == Spacing::Log && !(from > 0.0 && to > 0.0) {
        return Err(CliError::Config("log spacing needs positive bounds".into()));
    }
    if count == 1 {
        return Ok(vec![from]);
    }
    let n = (count - 1) as f64;
    Ok((0..count)
        .map(|k| {
            let u = k as f64 / n;
            match spacing {
                Spacing::Linear => from + (to - from) * u,
                Spacing::Log => (from.ln() + (to.ln() - from.ln()) * u).exp(),
            }
        })
        .collect())
}

pub fn sweep(
    base: &ModelSpec,
    param: &str,
    xs: Vec<f64>,
    spacing: Spacing,
) -> Result<Grid, CliError> {
    let points = xs
        .into_iter()
        .map(|x| Ok((x, base.with_param(param, x)?)))
        .collect::<Result<_, CliError>>()?;
    Ok(Grid {
        param: param.to_string(),
        spacing,
        points,
    })
}

fn mlz(lambda: f64, tau: f64, big_t: f64) -> ModelSpec {
    ModelSpec::ModifiedLz { lambda, tau, big_t }
}

/// Grid of one benchmark figure. Λ runs over [1, 14]; the τ cut runs over
/// [0.5, 2.45] along T = 3 − τ so that τ = 1.5 is a grid point at the
/// default count; γ runs over [0.25, 6] (Sauter) or [0.25, 10] (assisted).
pub fn figure(id: FigureId, count: Option<usize>) -> Result<Grid, CliError> {
    let n = count.unwrap_or(DEFAULT_COUNT);
    let lin = |a, b| axis(a, b, n, Spacing::Linear);
    let grid = |param: &str, xs: Vec<f64>, f: &dyn Fn(f64) -> ModelSpec| Grid {
        param: param.into(),
        spacing: Spacing::Linear,
        points: xs.into_iter().map(|x| (x, f(x))).collect(),
    };
    Ok(match id {
        FigureId::Fig3 => grid("lambda", lin(1.0, 14.0)?, &|l| mlz(l, 1.0, 2.0)),
        FigureId::Fig5 => grid("lambda", lin(1.0, 14.0)?, &|l| mlz(l, 1.0, 0.5)),
        FigureId::Fig6 => grid("tau", lin(0.5, 2.45)?, &|t| mlz(10.0, t, 3.0 - t)),
        FigureId::Fig7 => grid("gamma", lin(0.25, 6.0)?, &|g| {
            model_from_field(&Preset::Fig7.profile(g))
        }),
        FigureId::Fig8 => grid("gamma", lin(0.25, 10.0)?, &|g| {
            model_from_field(&Preset::Fig8.profile(g))
        }),
    })
}
