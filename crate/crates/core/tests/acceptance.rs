//! One line per acceptance criterion. Exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};
use thimbleq::continuation::{f_eval, f_prime, Continuation, ContinuationPath};
use thimbleq::ddp::{dasm_closing_point, ddp_probability, sauter_ddp_closed_form};
use thimbleq::oracle::{
    ode_transition_probability, truncated_amplitude_real_axis, HorizonPolicy, DEFAULT_TOL,
};
use thimbleq::schwinger::Preset;
use thimbleq::thimble::{
    amplitude_exact, amplitude_gaussian, analyze_model, Structure, ThimbleConfig,
};
use thimbleq::{ModelSpec, Warning, C64};

type Check = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: f64,
    run: fn() -> Check,
}

fn mlz(lambda: f64, tau: f64, big_t: f64) -> ModelSpec {
    ModelSpec::ModifiedLz { lambda, tau, big_t }
}

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn field_scale(model: &ModelSpec) -> f64 {
    match *model {
        ModelSpec::SauterPulse { e_field, mass, .. }
        | ModelSpec::AssistedSchwinger { e_field, mass, .. } => e_field / (mass * mass),
        _ => unreachable!(),
    }
}

/// `A = −(eE/m²) ln P`.
fn field_a(model: &ModelSpec, p: f64) -> f64 {
    -field_scale(model) * p.ln()
}

fn ddp_a(model: &ModelSpec) -> Result<f64, String> {
    Ok(field_scale(model) * e(ddp_probability(model))?.exponent)
}

fn gaussian(st: &Structure) -> Result<f64, String> {
    let saddles: Vec<_> = st.saddles.iter().map(|s| s.saddle).collect();
    Ok(e(amplitude_gaussian(&saddles))?.probability)
}

fn ode(model: &ModelSpec) -> Result<f64, String> {
    Ok(e(ode_transition_probability(
        model,
        DEFAULT_TOL,
        HorizonPolicy::default(),
    ))?
    .probability)
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn constant_field() -> Check {
    let mut worst = 0.0f64;
    for pz in [0.0, 0.5, 1.0] {
        for mp in [0.5, 1.0, 2.0] {
            for ee in [0.5, 1.0, 2.0] {
                let m = ModelSpec::ConstantField {
                    e_field: ee,
                    m_perp: mp,
                    p_z: pz,
                };
                let want = PI * mp * mp / ee;
                let got = e(ddp_probability(&m))?.exponent;
                let rel = (got - want).abs() / want;
                worst = worst.max(rel);
                ensure(
                    rel < 1e-6,
                    format!("pz={pz} m={mp} eE={ee}: {got} vs {want}"),
                )?;
            }
        }
    }
    Ok(format!("max rel err {worst:.2e}"))
}

fn landau_zener_limit() -> Check {
    let want = -PI / 2.0;
    let mut prev = f64::INFINITY;
    let mut last = 0.0;
    for big_t in [10.0, 100.0, 1000.0] {
        let d = e(ddp_probability(&mlz(1.0, 1.0, big_t)))?;
        let err = (-d.exponent - want).abs();
        ensure(
            err < prev,
            format!("exponent error not decreasing at T={big_t}: {err:.3e}"),
        )?;
        prev = err;
        last = (d.probability - want.exp()).abs() / want.exp();
    }
    ensure(last < 1e-2, format!("rel err {last:.3e} at T=1000"))?;
    Ok(format!("rel err at T=1000 {last:.2e}"))
}

fn homology() -> Check {
    let mut worst = 0.0f64;
    for (t, tau, l) in [
        (2.0, 1.0, 1.0),
        (2.0, 1.0, 5.0),
        (0.5, 1.0, 1.0),
        (0.5, 1.0, 5.0),
    ] {
        let m = mlz(l, tau, t);
        let st = e(analyze_model(&m, ThimbleConfig::default()))?;
        let exact = e(amplitude_exact(&st))?.amplitude;
        let q = e(truncated_amplitude_real_axis(
            &m,
            DEFAULT_TOL,
            HorizonPolicy::default(),
        ))?
        .amplitude
        .ok_or("quadrature gave no amplitude")?;
        let rel = (exact - q).norm() / q.norm();
        worst = worst.max(rel);
        ensure(
            rel < 1e-3,
            format!("(T,τ,Λ)=({t},{tau},{l}): {exact} vs {q}"),
        )?;
    }
    Ok(format!("max rel err {worst:.2e}"))
}

fn fig3_slope() -> Check {
    let ls: Vec<f64> = (1..=7).map(|k| 2.0 * k as f64).collect();
    let (mut g, mut o, mut d) = (vec![], vec![], vec![]);
    for &l in &ls {
        let m = mlz(l, 1.0, 2.0);
        let st = e(analyze_model(&m, ThimbleConfig::default()))?;
        g.push(gaussian(&st)?.ln());
        o.push(ode(&m)?.ln());
        d.push(e(ddp_probability(&m))?.probability.ln());
    }
    let (sg, so, sd) = (slope(&ls, &g), slope(&ls, &o), slope(&ls, &d));
    let rg = (sg - so).abs() / so.abs();
    let rd = (sd - so).abs() / so.abs();
    let msg = format!("slopes ode {so:.4} gaussian {sg:.4} ({rg:.1e}) ddp {sd:.4} ({rd:.1e})");
    ensure(rg < 0.1 && rd < 0.1, msg.clone())?;
    Ok(msg)
}

fn pole_obstructed() -> Check {
    let mut notes = vec![];
    let mut failed = false;
    for l in [2.0, 4.0, 6.0, 8.0] {
        let m = mlz(l, 1.0, 0.5);
        let d = e(ddp_probability(&m))?;
        let pole = d.obstruction.ok_or(format!("Λ={l}: no obstruction"))?;
        ensure(
            !d.applicable && (pole - C64::new(0.0, 0.5)).norm() < 1e-9,
            format!("Λ={l}: DDP applicable={} obstruction {pole}", d.applicable),
        )?;
        let st = e(analyze_model(&m, ThimbleConfig::default()))?;
        let ones = st
            .saddles
            .iter()
            .filter(|s| s.saddle.morse == Some(1))
            .count();
        ensure(ones == 2, format!("Λ={l}: {ones} saddles with n=1"))?;
        let ratio = gaussian(&st)? / ode(&m)?;
        let ok = (0.2..=5.0).contains(&ratio);
        failed |= !ok;
        notes.push(format!(
            "Λ={l} P_g/P_ode={ratio:.3}{}",
            if ok { "" } else { " (out)" }
        ));
    }
    let msg = notes.join(", ");
    ensure(!failed, msg.clone())?;
    Ok(msg)
}

fn fig6_structure() -> Check {
    let line = |tau: f64| mlz(10.0, tau, 3.0 - tau);
    for tau in [1.5, 1.6, 1.8, 2.0, 2.2, 2.4] {
        let d = e(ddp_probability(&line(tau)))?;
        ensure(!d.applicable, format!("DDP applicable at τ={tau}"))?;
    }
    let taus: Vec<f64> = (0..=40).map(|k| 1.40 + 0.005 * k as f64).collect();
    let mut counts = vec![];
    let mut degenerate = vec![];
    for &tau in &taus {
        let st = e(analyze_model(&line(tau), ThimbleConfig::default()))?;
        counts.push(st.contributing().count());
        if st.saddles.iter().any(|s| s.saddle.degenerate) {
            degenerate.push(tau);
        }
    }
    ensure(
        counts[0] == 1,
        format!("τ=1.40 has {} contributing saddles", counts[0]),
    )?;
    ensure(
        *counts.last().unwrap() == 2,
        format!("τ=1.60 has {} contributing saddles", counts.last().unwrap()),
    )?;
    let jump = taus[counts.iter().position(|&c| c == 2).unwrap()];
    ensure(
        counts.iter().skip_while(|&&c| c == 1).all(|&c| c == 2),
        format!("contributing count is not a single 1→2 step: {counts:?}"),
    )?;
    ensure((1.45..=1.60).contains(&jump), format!("1→2 at τ={jump}"))?;
    ensure(
        degenerate.iter().any(|t| (t - jump).abs() <= 0.05),
        format!("no degenerate flag within 0.05 of τ={jump}: {degenerate:?}"),
    )?;
    Ok(format!(
        "1→2 at τ={jump:.3}, degenerate flag on τ∈[{:.3}, {:.3}]",
        degenerate.first().unwrap(),
        degenerate.last().unwrap()
    ))
}

fn sauter() -> Check {
    let mut worst = 0.0f64;
    for g in [0.5, 1.0, 2.0, 4.0] {
        let m = thimbleq::schwinger::model_from_field(&Preset::Fig7.profile(g));
        let closed = e(sauter_ddp_closed_form(&m))?.full;
        let num = ddp_a(&m)?;
        let rel = (num - closed).abs() / closed;
        worst = worst.max(rel);
        ensure(
            rel < 1e-6,
            format!("γ={g}: numeric {num} closed form {closed}"),
        )?;
    }
    let small = ddp_a(&thimbleq::schwinger::model_from_field(
        &Preset::Fig7.profile(0.1),
    ))?;
    ensure(
        (small - PI).abs() / PI < 0.02,
        format!("A(γ=0.1) = {small}"),
    )?;
    let mut notes = vec![];
    for g in [3.0, 4.0, 5.0] {
        let m = thimbleq::schwinger::model_from_field(&Preset::Fig7.profile(g));
        let st = e(analyze_model(&m, ThimbleConfig::default()))?;
        let a_th = field_a(&m, gaussian(&st)?);
        let a_ode = field_a(&m, ode(&m)?);
        let a_ddp = ddp_a(&m)?;
        ensure(
            (a_th - a_ode).abs() < (a_ddp - a_ode).abs(),
            format!("γ={g}: thimble {a_th:.4} ddp {a_ddp:.4} ode {a_ode:.4}"),
        )?;
        notes.push(format!("γ={g}: {a_th:.3}/{a_ddp:.3}/{a_ode:.3}"));
    }
    Ok(format!(
        "closed form {worst:.1e}, A(0.1)={small:.4}, thimble/ddp/ode {}",
        notes.join(" ")
    ))
}

fn dasm() -> Check {
    let mut worst = 0.0f64;
    for k in 0..=39 {
        let g = 0.25 + (10.0 - 0.25) * k as f64 / 39.0;
        let m = thimbleq::schwinger::model_from_field(&Preset::Fig8.profile(g));
        let tc = e(ddp_probability(&m))?.closing_point;
        let r = m.jet(tc).gap_sq().norm() / m.gap_at_origin().powi(2);
        worst = worst.max(r);
        ensure(r < 1e-10, format!("γ={g}: residual {r:.2e} at {tc}"))?;
        let omega = match m {
            ModelSpec::AssistedSchwinger { omega, .. } => omega,
            _ => unreachable!(),
        };
        let u = e(dasm_closing_point(g, 0.1))?;
        ensure(
            (tc - C64::new(0.0, u / omega)).norm() < 1e-8 * tc.norm(),
            format!("γ={g}: closing point {tc} vs i·{}", u / omega),
        )?;
    }
    let m10 = thimbleq::schwinger::model_from_field(&Preset::Fig8.profile(10.0));
    let asym = ddp_a(&m10)? * 10.0 / (2.0 * PI);
    ensure(
        (asym - 1.0).abs() < 0.25,
        format!("A·γ/2π = {asym:.3} at γ=10"),
    )?;
    let mut notes = vec![];
    for g in [4.0, 6.0, 8.0] {
        let m = thimbleq::schwinger::model_from_field(&Preset::Fig8.profile(g));
        let st = e(analyze_model(&m, ThimbleConfig::default()))?;
        let a_th = field_a(&m, gaussian(&st)?);
        let a_ode = field_a(&m, ode(&m)?);
        let a_ddp = ddp_a(&m)?;
        ensure(
            (a_th - a_ode).abs() <= (a_ddp - a_ode).abs(),
            format!("γ={g}: thimble {a_th:.4} ddp {a_ddp:.4} ode {a_ode:.4}"),
        )?;
        notes.push(format!("γ={g}: {a_th:.3}/{a_ddp:.3}/{a_ode:.3}"));
    }
    Ok(format!(
        "residual {worst:.1e}, A·γ/2π={asym:.3}, thimble/ddp/ode {}",
        notes.join(" ")
    ))
}

fn catalog() -> Vec<ModelSpec> {
    vec![
        ModelSpec::LandauZener {
            lambda: 1.0,
            tau: 1.0,
        },
        mlz(1.0, 1.0, 2.0),
        mlz(5.0, 1.0, 0.5),
        ModelSpec::ConstantField {
            e_field: 1.0,
            m_perp: 1.0,
            p_z: 0.5,
        },
        thimbleq::schwinger::model_from_field(&Preset::Fig7.profile(2.0)),
        thimbleq::schwinger::model_from_field(&Preset::Fig8.profile(4.0)),
    ]
}

fn invariants() -> Check {
    let mut drift = 0.0f64;
    let mut imf = 0.0f64;
    let mut fd = 0.0f64;
    let mut path = 0.0f64;
    for m in catalog() {
        let name = m.name();
        if !matches!(m, ModelSpec::ConstantField { .. }) {
            let r = e(ode_transition_probability(
                &m,
                DEFAULT_TOL,
                HorizonPolicy::default(),
            ))?;
            let d = r.norm_drift.ok_or("no drift reported")?;
            drift = drift.max(d);
            ensure(d < 1e-8, format!("{name}: norm drift {d:.2e}"))?;
        }

        let st = e(analyze_model(&m, ThimbleConfig::default()))?;
        for s in &st.saddles {
            let fs = s.saddle.f;
            for th in s.descents.iter().flatten().chain(s.ascents.iter()) {
                if th
                    .warnings
                    .iter()
                    .any(|w| matches!(w, Warning::StokesCollision { .. }))
                {
                    continue;
                }
                // Im F is undefined at a pole endpoint
                let n = th.samples.len()
                    - usize::from(th.termination == thimbleq::thimble::Termination::PoleApproach);
                for p in &th.samples[..n] {
                    let dev = (p.im_f - fs.im).abs() / (1.0 + fs.norm());
                    imf = imf.max(dev);
                    ensure(
                        dev < 1e-6,
                        format!("{name}: Im F drift {dev:.2e} at {}", p.t()),
                    )?;
                }
            }
        }

        let scale = m.local_scale();
        let c = Continuation::new(&m, None);
        let floor = c
            .singular
            .iter()
            .filter(|p| p.t.im > 0.0)
            .map(|p| p.t.im)
            .fold(f64::INFINITY, f64::min);
        for frac in [0.2, 0.45] {
            for re in [-0.7, 0.0, 0.4] {
                let t = C64::new(re * scale, frac * floor);
                let h = 1e-4 * scale;
                let num = (e(f_eval(&m, t + h, None))? - e(f_eval(&m, t - h, None))?) / (2.0 * h);
                let ana = e(f_prime(&m, t))?;
                let rel = (num - ana).norm() / ana.norm().max(1.0 / scale);
                fd = fd.max(rel);
                ensure(rel < 1e-6, format!("{name}: F' at {t}: {ana} vs {num}"))?;

                let r = c.detour_radius();
                let mid = C64::new(0.5 * t.re + 0.3 * scale, 0.5 * t.im);
                let l = e(c.along(
                    &e(ContinuationPath::l_shaped(t).with_detours(&c.singular, r))?,
                    false,
                ))?;
                let s = e(c.along(
                    &e(ContinuationPath::straight(t).with_detours(&c.singular, r))?,
                    false,
                ))?;
                let b = e(c.along(
                    &e(ContinuationPath::through(&[C64::new(0.0, 0.0), mid, t])
                        .with_detours(&c.singular, r))?,
                    false,
                ))?;
                let norm = 1.0 + l.big_delta.norm();
                let dev = (l.big_delta - s.big_delta)
                    .norm()
                    .max((l.big_delta - b.big_delta).norm())
                    / norm;
                path = path.max(dev);
                ensure(
                    dev < 1e-8,
                    format!("{name}: Δ({t}) path dependence {dev:.2e}"),
                )?;
            }
        }
    }
    Ok(format!(
        "drift {drift:.1e}, Im F {imf:.1e}, F' {fd:.1e}, Δ paths {path:.1e}"
    ))
}

fn main() {
    let criteria = [
        Criterion {
            name: "constant-field Schwinger exponent",
            budget: 5.0,
            run: constant_field,
        },
        Criterion {
            name: "Landau-Zener limit",
            budget: 5.0,
            run: landau_zener_limit,
        },
        Criterion {
            name: "homology exactness",
            budget: 30.0,
            run: homology,
        },
        Criterion {
            name: "Λ slope at (T,τ)=(2,1)",
            budget: 60.0,
            run: fig3_slope,
        },
        Criterion {
            name: "pole-obstructed regime",
            budget: 60.0,
            run: pole_obstructed,
        },
        Criterion {
            name: "Stokes structure on T=3−τ",
            budget: 120.0,
            run: fig6_structure,
        },
        Criterion {
            name: "Sauter pulse",
            budget: 120.0,
            run: sauter,
        },
        Criterion {
            name: "assisted mechanism",
            budget: 180.0,
            run: dasm,
        },
        Criterion {
            name: "invariant suite",
            budget: 60.0,
            run: invariants,
        },
    ];
    let mut failures = 0;
    for (k, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = (c.run)();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs_f64(c.budget);
        let (status, detail) = match (out, in_time) {
            (Ok(d), true) => ("PASS", d),
            (Ok(d), false) => ("FAIL", format!("{d}; over the {} s budget", c.budget)),
            (Err(d), _) => ("FAIL", d),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!(
            "criterion {} {status} [{:.2} s] {}: {detail}",
            k + 1,
            took.as_secs_f64(),
            c.name
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
