mod common;

use dcg::clt::{
    binomial_reduced_dirichlet, binomial_reduced_entropy, clt_convergence_table, default_n_list, gaussian_dirichlet_limit,
    gaussian_entropy, p_sweep, CltInstance, TestFunction, CSV_HEADER,
};

fn tanh() -> TestFunction {
    TestFunction::Tanh(1.0)
}

#[test]
fn reduction_matches_brute_force() {
    for g in [tanh(), TestFunction::Identity, TestFunction::Logistic(2.0), TestFunction::Tanh(0.3)] {
        for p in [0.1, 0.3, 0.5, 0.8] {
            for n in 1..=12 {
                let inst = CltInstance::new(n, p, g).unwrap();
                let (ent, dir) = common::clt_brute_force(n, p, |u| g.value(u));
                let (e, d) = (binomial_reduced_entropy(&inst), binomial_reduced_dirichlet(&inst));
                assert!((e - ent).abs() < 1e-10 * (1.0 + ent), "{g} p={p} n={n}: {e} vs {ent}");
                assert!((d - dir).abs() < 1e-10 * (1.0 + dir), "{g} p={p} n={n}: {d} vs {dir}");
            }
        }
    }
}

#[test]
fn single_coordinate_by_hand() {
    let (p, q) = (0.3f64, 0.7f64);
    let sd = (p * q).sqrt();
    let (g0, g1) = ((-p / sd).tanh(), (q / sd).tanh());
    let z = q * g0.exp() + p * g1.exp();
    let ent = q * g0.exp() * g0 + p * g1.exp() * g1 - z * z.ln();
    let dir = q * g0.exp() * (g0 - g1).max(0.0).powi(2) + p * g1.exp() * (g1 - g0).max(0.0).powi(2);
    let inst = CltInstance::new(1, p, tanh()).unwrap();
    assert!((binomial_reduced_entropy(&inst) - ent).abs() < 1e-12);
    assert!((binomial_reduced_dirichlet(&inst) - dir).abs() < 1e-12);
}

#[test]
fn zero_function_gives_zero_rows() {
    let table = clt_convergence_table(TestFunction::Zero, 0.5, &[4, 64, 1024]).unwrap();
    for r in &table.rows {
        assert_eq!((r.ent_discrete, r.dirichlet_discrete, r.ratio), (0.0, 0.0, 0.0));
        assert_eq!((r.ent_gauss, r.dirichlet_gauss_limit), (0.0, 0.0));
    }
    assert!(table.lsi_holds);
}

#[test]
fn identity_has_closed_form_references() {
    // Ent_γ(e^Y) = e^{1/2}/2 and E_γ[e^Y] = e^{1/2}.
    let half = 0.5f64.exp();
    let (eh, et) = gaussian_entropy(TestFunction::Identity);
    assert!((eh - half / 2.0).abs() < 1e-12 && (et - half / 2.0).abs() < 1e-12);
    for p in [0.2, 0.5, 0.7] {
        let (dh, dt) = gaussian_dirichlet_limit(TestFunction::Identity, p);
        assert!((dh - half / (1.0 - p)).abs() < 1e-12 && (dt - half / (1.0 - p)).abs() < 1e-12);
    }
}

#[test]
fn tanh_at_4096_is_within_five_percent() {
    let table = clt_convergence_table(tanh(), 0.5, &default_n_list()).unwrap();
    let last = table.rows.last().unwrap();
    assert_eq!(last.n, 4096);
    assert!(last.ent_deviation() <= 0.05 * last.ent_gauss);
    assert!(last.dirichlet_deviation() <= 0.05 * last.dirichlet_gauss_limit);
    let at_256 = table.rows.iter().find(|r| r.n == 256).unwrap();
    assert!(last.ent_deviation() < at_256.ent_deviation());
    assert!(last.dirichlet_deviation() < at_256.dirichlet_deviation());
    assert!(table.lsi_holds && table.rows.iter().all(|r| r.lsi_holds()));
    assert!(table.quadrature_disagreement < 1e-10);
    assert!(table.ent_rate.unwrap() < 0.0 && table.dirichlet_rate.unwrap() < 0.0);
}

#[test]
fn p_sweep_keeps_the_inequality() {
    let ps: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    for row in p_sweep(tanh(), 1024, &ps).unwrap() {
        assert!(row.lsi_holds(), "p={}", row.p);
    }
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(clt_convergence_table(tanh(), 0.5, &[64, 32]).is_err());
    assert!(clt_convergence_table(tanh(), 0.5, &[64, 64]).is_err());
    assert!(clt_convergence_table(tanh(), 1.0, &[64]).is_err());
    assert!(CltInstance::new(0, 0.5, tanh()).is_err());
    assert!("cosh".parse::<TestFunction>().is_err());
}

#[test]
fn csv_has_one_line_per_n() {
    let csv = clt_convergence_table(tanh(), 0.5, &[2, 4, 8]).unwrap().to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("2,0.5,tanh"), "{}", lines[1]);
}
