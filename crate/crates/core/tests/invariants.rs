use proptest::prelude::*;
use std::f64::consts::PI;
use thimbleq::continuation::{big_delta, f_eval, f_prime, Continuation, ContinuationPath};
use thimbleq::ddp::ddp_probability;
use thimbleq::oracle::{ode_transition_probability, HorizonPolicy, DEFAULT_TOL};
use thimbleq::schwinger::{model_from_field, Field, FieldProfile, Particle};
use thimbleq::thimble::{analyze_model, Termination, ThimbleConfig, ThimbleKind};
use thimbleq::{ModelSpec, Warning, C64};

fn mlz() -> impl Strategy<Value = ModelSpec> {
    (0.5f64..8.0, 0.5f64..2.0, 0.3f64..4.0)
        .prop_filter("keep T away from τ", |(_, tau, t)| (t - tau).abs() > 0.1)
        .prop_map(|(lambda, tau, big_t)| ModelSpec::ModifiedLz { lambda, tau, big_t })
}

fn sauter(mass: f64, e_field: f64, gamma: f64) -> ModelSpec {
    model_from_field(&FieldProfile {
        field: Field::Sauter {
            e_field,
            omega: gamma * e_field / mass,
        },
        particle: Particle::at_rest(mass),
    })
}

fn catalog() -> impl Strategy<Value = ModelSpec> {
    prop_oneof![
        (0.3f64..4.0, 0.5f64..2.0).prop_map(|(lambda, tau)| ModelSpec::LandauZener { lambda, tau }),
        mlz(),
        (0.5f64..4.0, 0.5f64..3.0, 0.2f64..3.0).prop_map(|(m, ee, g)| sauter(m, ee, g)),
        (0.5f64..2.0, 0.2f64..4.0, 0.02f64..0.2).prop_map(|(ee, g, r)| {
            model_from_field(&FieldProfile {
                field: Field::Assisted {
                    e_field: ee,
                    eps: r * ee,
                    omega: g * ee,
                },
                particle: Particle::at_rest(1.0),
            })
        }),
    ]
}

/// Height of the lowest singular point in the upper half-plane.
fn floor(m: &ModelSpec) -> f64 {
    Continuation::new(m, None)
        .singular
        .iter()
        .filter(|s| s.t.im > 0.0)
        .map(|s| s.t.im)
        .fold(f64::INFINITY, f64::min)
}

fn ddp_a(m: &ModelSpec) -> f64 {
    let (e_field, mass) = match *m {
        ModelSpec::SauterPulse { e_field, mass, .. }
        | ModelSpec::AssistedSchwinger { e_field, mass, .. } => (e_field, mass),
        _ => unreachable!(),
    };
    ddp_probability(m).unwrap().exponent * e_field / (mass * mass)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ode_evolution_is_unitary(m in catalog()) {
        let r = ode_transition_probability(&m, DEFAULT_TOL, HorizonPolicy::default()).unwrap();
        prop_assert!(r.norm_drift.unwrap() < 1e-8, "drift {:?}", r.norm_drift);
        prop_assert!((0.0..=1.0).contains(&r.probability));
    }

    #[test]
    fn derivative_matches_finite_difference(
        m in catalog(),
        re in -1.0f64..1.0,
        frac in 0.05f64..0.6,
    ) {
        let scale = m.local_scale();
        let t = C64::new(re * scale, frac * floor(&m));
        let h = 1e-4 * scale;
        let num = (f_eval(&m, t + h, None).unwrap() - f_eval(&m, t - h, None).unwrap()) / (2.0 * h);
        let ana = f_prime(&m, t).unwrap();
        let rel = (num - ana).norm() / ana.norm().max(1.0 / scale);
        prop_assert!(rel < 1e-6, "F'({}) = {} vs {}", t, ana, num);
    }

    #[test]
    fn delta_is_path_independent(
        m in catalog(),
        re in -1.0f64..1.0,
        frac in 0.05f64..0.8,
        bend in -1.0f64..1.0,
    ) {
        let scale = m.local_scale();
        let y = floor(&m);
        let t = C64::new(re * scale, frac * y);
        let mid = C64::new(bend * scale, 0.5 * frac * y);
        let l = big_delta(&m, t, Some(&ContinuationPath::l_shaped(t))).unwrap();
        let s = big_delta(&m, t, Some(&ContinuationPath::straight(t))).unwrap();
        let b = big_delta(&m, t, Some(&ContinuationPath::through(&[C64::new(0.0, 0.0), mid, t]))).unwrap();
        let norm = 1.0 + l.norm();
        prop_assert!((l - s).norm() / norm < 1e-8, "{} vs {}", l, s);
        prop_assert!((l - b).norm() / norm < 1e-8, "{} vs {}", l, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn thimbles_keep_im_f_and_order_re_f(m in mlz()) {
        let st = analyze_model(&m, ThimbleConfig::default()).unwrap();
        for s in &st.saddles {
            let fs = s.saddle.f;
            for th in s.descents.iter().flatten().chain(s.ascents.iter()) {
                if th.warnings.iter().any(|w| matches!(w, Warning::StokesCollision { .. })) {
                    continue;
                }
                // Im F is undefined at a pole endpoint
                let n = th.samples.len() - usize::from(th.termination == Termination::PoleApproach);
                let sign = if th.kind == ThimbleKind::Descent { -1.0 } else { 1.0 };
                let mut prev = fs.re;
                for p in &th.samples[..n] {
                    prop_assert!(
                        (p.im_f - fs.im).abs() <= 1e-6 * (1.0 + fs.norm()),
                        "Im F {} vs {} at {}", p.im_f, fs.im, p.t()
                    );
                    prop_assert!(
                        sign * (p.re_f - prev) >= -1e-9 * (1.0 + fs.norm()),
                        "Re F not monotone at {}", p.t()
                    );
                    prev = p.re_f;
                }
            }
        }
    }

    #[test]
    fn sauter_exponent_depends_only_on_gamma(
        mass in 0.3f64..5.0,
        e_field in 0.3f64..5.0,
        gamma in 0.1f64..6.0,
    ) {
        let a = ddp_a(&sauter(mass, e_field, gamma));
        let unit = ddp_a(&sauter(1.0, 1.0, gamma));
        prop_assert!((a - unit).abs() < 1e-8 * unit, "{} vs {}", a, unit);
    }

    #[test]
    fn sauter_exponent_decreases_with_gamma(g in 0.1f64..8.0, dg in 0.05f64..2.0) {
        let lo = ddp_a(&sauter(3.0, 3.0, g));
        let hi = ddp_a(&sauter(3.0, 3.0, g + dg));
        prop_assert!(hi < lo && lo < PI, "A({}) = {}, A({}) = {}", g, lo, g + dg, hi);
    }

    #[test]
    fn weak_pulse_vanishing_recovers_constant_field(
        e_field in 0.5f64..3.0,
        mass in 0.5f64..3.0,
        gamma in 0.1f64..1.2,
    ) {
        let omega = gamma * e_field / mass;
        let m = model_from_field(&FieldProfile {
            field: Field::Assisted { e_field, eps: 1e-9 * e_field, omega },
            particle: Particle::at_rest(mass),
        });
        let a = ddp_a(&m);
        prop_assert!((a - PI).abs() < 1e-6, "A = {}", a);
    }
}
