use crate::args::{FigureId, MethodId, Spacing};
use crate::run::MethodRow;
use serde::Serialize;
use thimbleq::{ModelSpec, Window};

pub const SCHEMA_ID: &str = "thimbleq-output/1";
pub const CSV_HEADER: &str = "param,method,P,A,applicable,flags";

#[derive(Debug, Serialize)]
pub struct EstimateReport {
    pub schema: &'static str,
    pub kind: &'static str,
    pub model: ModelSpec,
    pub tolerance: f64,
    pub window: Window,
    pub results: Vec<MethodRow>,
}

#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub param: f64,
    #[serde(flatten)]
    pub row: MethodRow,
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub schema: &'static str,
    pub kind: &'static str,
    pub figure: Option<FigureId>,
    pub param: String,
    pub spacing: Spacing,
    /// Model at the first grid point.
    pub model: ModelSpec,
    pub methods: Vec<MethodId>,
    pub tolerance: f64,
    pub rows: Vec<SweepRow>,
}

fn num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:e}"),
        _ => "null".into(),
    }
}

fn csv_line(out: &mut String, param: Option<f64>, r: &MethodRow) {
    let applicable = match r.applicable {
        Some(b) => b.to_string(),
        None => "null".into(),
    };
    let mut flags: Vec<String> = r
        .flags
        .iter()
        .map(|f| f.replace([',', '\n', ';'], " "))
        .collect();
    if let Some(n) = r.saddles {
        flags.push(format!("saddles={n}"));
    }
    let flags = if flags.is_empty() {
        "null".to_string()
    } else {
        flags.join(";")
    };
    let param = match param {
        Some(p) => format!("{p}"),
        None => "null".into(),
    };
    out.push_str(&format!(
        "{param},{},{},{},{applicable},{flags}\n",
        r.method.name(),
        num(r.p),
        num(r.a)
    ));
}

pub fn estimate_csv(rows: &[MethodRow]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        csv_line(&mut out, None, r);
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        csv_line(&mut out, Some(r.param), &r.row);
    }
    out
}

pub fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}
