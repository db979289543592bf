mod common;

use dcg::verify::dc::{reverify, verify_displacement_convexity, DcFamily, DcInstance};
use dcg::verify::hwi::{verify_hwi, verify_log_sobolev, HwiFamily, HwiInstance, LsiFamily, LsiInstance};
use dcg::verify::pl::{check_admissible, verify_prekopa_leindler, PlInstance, Triple};
use dcg::verify::suite::{dc_suite, SuiteConfig};
use dcg::verify::te::{verify_transport_entropy, verify_transport_entropy_dual};
use dcg::verify::{default_t_grid, Status, Summary, VerificationReport};
use dcg::{Graph, Measure, MetricGraph};
use proptest::prelude::*;

fn mg(spec: &str) -> MetricGraph {
    MetricGraph::from_spec(spec).unwrap()
}

fn m(w: &[f64]) -> Measure {
    Measure::new(w.to_vec()).unwrap()
}

fn dc_family(spec: &str) -> DcFamily {
    DcFamily::infer(&Graph::from_spec(spec).unwrap()).unwrap()
}

#[test]
fn equal_measures_have_zero_slack() {
    let mut rng = common::rng(60);
    for spec in ["complete:4", "two_point", "hypercube:2", "product:complete:3,complete:2"] {
        let g = mg(spec);
        let mu = common::positive_measure(&mut rng, g.vertex_count());
        let inst = DcInstance { mu: mu.clone(), nu0: mu.clone(), nu1: mu.clone() };
        for r in verify_displacement_convexity(&g, dc_family(spec), &inst, &default_t_grid()).unwrap() {
            assert!(r.slack.abs() < 1e-12, "{spec} {}: {}", r.id, r.slack);
            assert!(r.pass);
        }
    }
}

/// On complete graphs ν_t is the linear mixture whatever the coupling.
fn complete_dc_oracle(n: usize, inst: &DcInstance, grid: &[f64]) -> f64 {
    let (a, b, mu) = (inst.nu0.weights(), inst.nu1.weights(), inst.mu.weights());
    let h0 = common::relative_entropy_naive(a, mu);
    let h1 = common::relative_entropy_naive(b, mu);
    let cost = common::hamming_weak_cost(a, b) + common::hamming_weak_cost(b, a);
    grid.iter()
        .map(|&t| {
            let nu: Vec<f64> = (0..n).map(|z| (1.0 - t) * a[z] + t * b[z]).collect();
            (1.0 - t) * h0 + t * h1 - 0.5 * t * (1.0 - t) * cost - common::relative_entropy_naive(&nu, mu)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn complete_graph_slack_matches_direct_evaluation() {
    let mut rng = common::rng(61);
    let grid = default_t_grid();
    for n in 2..=6 {
        let g = mg(&format!("complete:{n}"));
        for _ in 0..20 {
            let inst = DcInstance {
                mu: common::positive_measure(&mut rng, n),
                nu0: common::sparse_measure(&mut rng, n),
                nu1: common::positive_measure(&mut rng, n),
            };
            let r = &verify_displacement_convexity(&g, DcFamily::Complete, &inst, &grid).unwrap()[0];
            let oracle = complete_dc_oracle(n, &inst, &grid);
            assert!((r.slack - oracle).abs() < 1e-12, "{} vs {oracle}", r.slack);
            assert!(r.pass);
        }
    }
}

#[test]
fn mixing_toward_mu_keeps_complete_passes() {
    let mut rng = common::rng(62);
    let grid = default_t_grid();
    let eps = 1e-3;
    for n in 2..=6 {
        let g = mg(&format!("complete:{n}"));
        for _ in 0..20 {
            let mu = common::positive_measure(&mut rng, n);
            let (a, b) = (common::sparse_measure(&mut rng, n), common::sparse_measure(&mut rng, n));
            let mix = |nu: &Measure| Measure::normalized((0..n).map(|z| (1.0 - eps) * nu.get(z) + eps * mu.get(z)).collect());
            let before = DcInstance { mu: mu.clone(), nu0: a.clone(), nu1: b.clone() };
            let after = DcInstance { mu: mu.clone(), nu0: mix(&a), nu1: mix(&b) };
            let r0 = &verify_displacement_convexity(&g, DcFamily::Complete, &before, &grid).unwrap()[0];
            let r1 = &verify_displacement_convexity(&g, DcFamily::Complete, &after, &grid).unwrap()[0];
            assert!(!r0.pass || r1.pass);
        }
    }
}

#[test]
fn missing_support_is_vacuous() {
    let g = mg("complete:3");
    let inst = DcInstance { mu: m(&[0.5, 0.5, 0.0]), nu0: m(&[0.0, 0.0, 1.0]), nu1: Measure::uniform(3) };
    let reports = verify_displacement_convexity(&g, DcFamily::Complete, &inst, &default_t_grid()).unwrap();
    assert_eq!(reports[0].status, Status::Vacuous);
    let s = Summary::of(&reports);
    assert_eq!((s.pass, s.vacuous), (0, 1));
}

#[test]
fn two_point_near_tightness_is_an_equality() {
    let g = mg("two_point");
    let inst = LsiInstance { mu: Measure::uniform(2), f: vec![1.5, 0.5], target: Some(m(&[0.25, 0.75])) };
    let reports = verify_log_sobolev(&g, LsiFamily::Pinsker, &inst, &[]).unwrap();
    let near = reports.iter().find(|r| r.id == "lsi.pinsker.near_tightness").unwrap();
    assert!((near.lhs - 2.0 / 3.0).abs() < 1e-12);
    assert!((near.rhs - 2.0 / 3.0).abs() < 1e-12);
    assert!(reports.iter().all(|r| r.pass));
}

#[test]
fn constant_density_gives_zero_sides() {
    for (spec, family) in [("complete:4", HwiFamily::Complete), ("two_point", HwiFamily::TwoPoint)] {
        let g = mg(spec);
        let mu = Measure::uniform(g.vertex_count());
        let inst = HwiInstance { mu: mu.clone(), nu0: mu.clone(), nu1: mu.clone() };
        for r in verify_hwi(&g, family, &inst).unwrap() {
            assert!(r.lhs.abs() < 1e-15 && r.rhs.abs() < 1e-15, "{}", r.id);
        }
    }
    let g = mg("hypercube:2");
    let inst = LsiInstance { mu: Measure::uniform(4), f: vec![1.0; 4], target: None };
    for family in [LsiFamily::HypercubeModified, LsiFamily::Reinforced] {
        for r in verify_log_sobolev(&g, family, &inst, &[0.5, 1.0]).unwrap() {
            assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-7, "{}: {} {}", r.id, r.lhs, r.rhs);
            assert!(r.pass);
        }
    }
}

#[test]
fn two_point_hwi_against_direct_formula() {
    let mut rng = common::rng(63);
    let g = mg("two_point");
    for p in [0.1, 0.3, 0.5, 0.9] {
        let mu = m(&[1.0 - p, p]);
        for _ in 0..10 {
            let nu0 = common::positive_measure(&mut rng, 2);
            let f = [nu0.get(0) / mu.get(0), nu0.get(1) / mu.get(1)];
            let ent: f64 = (0..2).map(|x| mu.get(x) * f[x] * f[x].ln()).sum();
            let energy = p * (1.0 - p) * (f[1] - f[0]) * (f[1].ln() - f[0].ln());
            let cost = common::hamming_weak_cost(nu0.weights(), mu.weights()) + common::hamming_weak_cost(mu.weights(), nu0.weights());
            let r = &verify_hwi(&g, HwiFamily::TwoPoint, &HwiInstance { mu: mu.clone(), nu0, nu1: mu.clone() }).unwrap()[0];
            assert!((r.lhs - ent).abs() < 1e-12);
            assert!((r.rhs - (energy - 0.5 * cost)).abs() < 1e-12);
            assert!(r.pass);
        }
    }
}

#[test]
fn transport_entropy_trivial_cases() {
    let g = Graph::hypercube(2).unwrap();
    let mu = Measure::uniform(4);
    for r in verify_transport_entropy(&g, &mu, &mu, 0.5).unwrap() {
        assert!(r.lhs.abs() < 1e-9 && r.rhs == 0.0 && r.pass, "{}", r.id);
    }
    let r = verify_transport_entropy_dual(&g, &mu, &[0.7; 4], 0.5).unwrap();
    assert!((r.lhs - r.rhs).abs() < 1e-12 && r.pass);
}

#[test]
fn transport_entropy_dirac_target() {
    let g = Graph::hypercube(2).unwrap();
    let reports = verify_transport_entropy(&g, &Measure::uniform(4), &Measure::dirac(4, 3), 0.5).unwrap();
    for r in &reports {
        assert!((r.rhs - 4.0 * 2f64.ln()).abs() < 1e-12);
        assert!(r.lhs.is_finite() && r.lhs <= 4.0 * 2f64.ln());
        assert!(r.pass);
    }
}

#[test]
fn zero_triple_is_admissible_and_tight() {
    let g = mg("hypercube:2");
    let inst = PlInstance { mu: Measure::uniform(4), triple: Triple { f: vec![0.0; 4], g: vec![0.0; 4], h: vec![0.0; 4] }, t: 0.5, c: 0.5 };
    assert!(check_admissible(&g, &inst).unwrap().admissible);
    let r = verify_prekopa_leindler(&g, &inst, "supplied").unwrap();
    assert!((r.lhs - 1.0).abs() < 1e-15 && (r.rhs - 1.0).abs() < 1e-15 && r.pass);
}

#[test]
fn inadmissible_triple_names_the_vertex() {
    let g = mg("two_point");
    let inst = PlInstance { mu: Measure::uniform(2), triple: Triple { f: vec![1.0, 0.0], g: vec![0.0; 2], h: vec![0.0; 2] }, t: 0.5, c: 0.5 };
    let r = verify_prekopa_leindler(&g, &inst, "supplied").unwrap();
    assert_eq!(r.status, Status::Vacuous);
    let note = r.note.unwrap();
    assert!(note.starts_with("hypothesis fails at x=0, witness m="), "{note}");
}

#[test]
fn dc_reports_reverify_from_json() {
    for (spec, family) in [("complete:3", DcFamily::Complete), ("two_point", DcFamily::TwoPoint), ("hypercube:2", DcFamily::Hypercube)] {
        let g = mg(spec);
        let reports = dc_suite(&g, family, Some(family.forms()), &SuiteConfig::new(10, 5)).unwrap();
        for r in reports {
            let text = serde_json::to_string(&r).unwrap();
            let back: VerificationReport = serde_json::from_str(&text).unwrap();
            assert_eq!(back, r);
            let again = reverify(&g, &back).unwrap();
            assert_eq!(again.status, r.status, "{}", r.id);
            assert!((again.lhs - r.lhs).abs() < 1e-12 && (again.rhs - r.rhs).abs() < 1e-12, "{}", r.id);
            assert_eq!(again.witness, r.witness, "{}", r.id);
            assert_eq!(again.witness_digest, r.witness_digest);
        }
    }
}

#[test]
fn suites_do_not_depend_on_the_thread_count() {
    let g = mg("hypercube:3");
    let cfg = SuiteConfig::new(12, 9);
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| serde_json::to_string(&dc_suite(&g, DcFamily::Hypercube, None, &cfg).unwrap()).unwrap())
    };
    assert_eq!(run(1), run(3));
}

fn summary_strategy() -> impl Strategy<Value = Summary> {
    (0usize..5, 0usize..5, 0usize..5, 0usize..5, 0usize..5, prop_oneof![Just(f64::INFINITY), -1.0f64..1.0]).prop_map(
        |(pass, fail, vacuous, non_certified, informational, min_slack)| Summary {
            total: pass + fail + vacuous + non_certified + informational,
            pass,
            fail,
            vacuous,
            non_certified,
            informational,
            min_slack,
        },
    )
}

proptest! {
    #[test]
    fn summary_merge_is_a_commutative_monoid(a in summary_strategy(), b in summary_strategy(), c in summary_strategy()) {
        prop_assert_eq!(a.merge(b), b.merge(a));
        prop_assert_eq!(a.merge(b).merge(c), a.merge(b.merge(c)));
        prop_assert_eq!(a.merge(Summary::default()), a);
        let text = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<Summary>(&text).unwrap(), a);
    }
}
