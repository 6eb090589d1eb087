use crate::config::Settings;
use crate::error::CliError;
use crate::output::SCHEMA_ID;
use crate::run::warning_flag;
use serde::Serialize;
use thimbleq::ddp::{ddp_contour, ddp_probability_in};
use thimbleq::thimble::{
    Crossing, Direction, Landscape, Termination, Thimble, ThimbleConfig, ThimbleKind,
};
use thimbleq::{ModelSpec, Window, C64};

#[derive(Debug, Serialize)]
pub struct ThimbleOut {
    pub kind: ThimbleKind,
    pub direction: Direction,
    pub termination: Termination,
    pub points: Vec<[f64; 2]>,
    pub crossings: Vec<Crossing>,
}

impl From<&Thimble> for ThimbleOut {
    fn from(t: &Thimble) -> Self {
        Self {
            kind: t.kind,
            direction: t.direction,
            termination: t.termination,
            points: t.samples.iter().map(|s| [s.re, s.im]).collect(),
            crossings: t.crossings.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SaddleOut {
    pub t: C64,
    #[serde(rename = "F")]
    pub f: C64,
    pub morse: Option<i32>,
    pub contributing: bool,
    pub theta: f64,
    /// |F''| at the saddle.
    pub second_modulus: f64,
    /// arg F''.
    pub phi: f64,
    pub cubic_ratio: f64,
    pub degenerate: bool,
    pub thimbles: Vec<ThimbleOut>,
}

#[derive(Debug, Serialize)]
pub struct DdpOut {
    pub applicable: bool,
    pub closing_point: C64,
    pub exponent: f64,
    pub obstruction: Option<C64>,
    pub contour: Option<Vec<C64>>,
}

#[derive(Debug, Serialize)]
pub struct ProbeReport {
    pub schema: &'static str,
    pub kind: &'static str,
    pub model: ModelSpec,
    pub window: Window,
    pub closing_points: Vec<C64>,
    pub poles: Vec<C64>,
    pub saddles: Vec<SaddleOut>,
    pub ddp: Option<DdpOut>,
    pub warnings: Vec<String>,
}

pub fn probe(model: &ModelSpec, s: &Settings) -> Result<ProbeReport, CliError> {
    let window = s.window_for(model);
    let catalog = model.singularities(&window)?;
    let structure = Landscape::new(model, window, ThimbleConfig::default()).analyze(true)?;
    let mut warnings: Vec<String> = Vec::new();
    let mut note = |f: &str| {
        if !warnings.iter().any(|w| w == f) {
            warnings.push(f.to_string());
        }
    };
    for w in catalog.warnings.iter().chain(&structure.warnings) {
        note(warning_flag(w));
    }
    let saddles = structure
        .saddles
        .iter()
        .map(|ss| {
            let sd = ss.saddle;
            let mut thimbles: Vec<ThimbleOut> = ss.ascents.iter().map(ThimbleOut::from).collect();
            if let Some(d) = &ss.descents {
                thimbles.extend(d.iter().map(ThimbleOut::from));
            }
            SaddleOut {
                t: sd.t,
                f: sd.f,
                morse: sd.morse,
                contributing: sd.morse.unwrap_or(0) != 0,
                theta: sd.theta,
                second_modulus: sd.second.modulus,
                phi: sd.second.phi,
                cubic_ratio: sd.cubic_ratio,
                degenerate: sd.degenerate,
                thimbles,
            }
        })
        .collect();
    // DDP is optional in a probe: a failure is reported as a warning
    let ddp = match ddp_probability_in(model, &window) {
        Ok(r) => {
            let contour = if r.applicable {
                match ddp_contour(model, r.closing_point, (window.re_min, window.re_max)) {
                    Ok(c) => Some(c),
                    Err(_) => {
                        note("ddp-contour-failed");
                        None
                    }
                }
            } else {
                None
            };
            Some(DdpOut {
                applicable: r.applicable,
                closing_point: r.closing_point,
                exponent: r.exponent,
                obstruction: r.obstruction,
                contour,
            })
        }
        Err(_) => {
            note("ddp-failed");
            None
        }
    };
    Ok(ProbeReport {
        schema: SCHEMA_ID,
        kind: "probe",
        model: *model,
        window,
        closing_points: catalog.closing.iter().map(|c| c.t).collect(),
        poles: catalog.poles.iter().map(|p| p.t).collect(),
        saddles,
        ddp,
        warnings,
    })
}
