use ppt_steering::family::{
    family_vectors, functional_family, published_state, scan, state_family, state_weights,
    verify_counterexample, violation, DataSource, FamilyParams, Grid, PUBLISHED_PARAMS,
};
use ppt_steering::linalg::{eig_hermitian, min_eigenvalue, partial_transpose, HermitianOperator};
use ppt_steering::quantum::{assemblage_from_state, mub_bases};
use ppt_steering::steering::{lhs_membership, validate_functional};
use ppt_steering::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn x_grid() -> Vec<f64> {
    (0..=5).map(|k| k as f64 / 10.0).collect()
}

fn conj_v(h: &HermitianOperator) -> HermitianOperator {
    let v = HermitianOperator::diag(&[1.0, 1.0, -1.0]);
    HermitianOperator::new(
        v.matrix()
            .matmul(h.matrix())
            .unwrap()
            .matmul(v.matrix())
            .unwrap(),
    )
    .unwrap()
}

#[test]
fn printed_vectors_to_four_decimals() {
    let [qp, qm, s, t] = family_vectors(0.1578).unwrap();
    let printed = [
        [0.8785, 0.2388, -0.4137],
        [0.8785, 0.2388, 0.4137],
        [0.8785, -0.4777, 0.0],
        [0.7361, -0.6769, 0.0],
    ];
    for (got, want) in [qp, qm, s, t].iter().zip(&printed) {
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-4, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn half_is_a_degenerate_edge() {
    let [qp, qm, _, t] = family_vectors(0.5).unwrap();
    assert_eq!(qp, qm);
    assert!(t[0].abs() < 1e-15 && (t[1] + 1.0).abs() < 1e-15 && t[2] == 0.0);
    assert!(validate_functional(&functional_family(0.5).unwrap(), 1e-12).passed());
}

#[test]
fn x_outside_domain_is_rejected() {
    for x in [-0.01, 0.51, f64::NAN] {
        assert!(matches!(functional_family(x), Err(Error::Domain(_))));
    }
}

#[test]
fn functional_family_is_valid_with_diagonal_identity() {
    let want = HermitianOperator::diag(&[2.0, 0.5, 0.5]);
    for x in x_grid() {
        let f = functional_family(x).unwrap();
        assert!(validate_functional(&f, 1e-12).passed(), "x = {x}");
        let sum =
            HermitianOperator::linear_combination(&[(1.0, &f.z13), (1.0, &f.z23), (1.0, &f.z31)]);
        assert!(sum.max_abs_diff(&want) < 1e-12, "x = {x}");
        let ev = eig_hermitian(&f.z11()).unwrap().values;
        for (g, w) in ev.iter().zip([0.0, x.min(1.0 - x), x.max(1.0 - x)]) {
            assert!((g - w).abs() < 1e-10, "x = {x}: {ev:?}");
        }
    }
}

#[test]
fn reflection_swaps_z13_and_z23() {
    for k in 0..=50 {
        let x = k as f64 / 100.0;
        let f = functional_family(x).unwrap();
        assert!(conj_v(&f.z13).max_abs_diff(&f.z23) < 1e-12);
        assert!(conj_v(&f.z31).max_abs_diff(&f.z31) < 1e-12);
        assert!(conj_v(&f.z33).max_abs_diff(&f.z33) < 1e-12);
    }
}

#[test]
fn z11_and_z31_are_isospectral() {
    for k in 0..=50 {
        let f = functional_family(k as f64 / 100.0).unwrap();
        let a = eig_hermitian(&f.z11()).unwrap().values;
        let b = eig_hermitian(&f.z31).unwrap().values;
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-10);
        }
    }
}

#[test]
fn state_family_is_ppt_invariant_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut done = 0;
    while done < 100 {
        let (m1, m2): (f64, f64) = (rng.random(), rng.random());
        if m1 * m1 + m2 * m2 + m1 * m2 > 1.0 {
            continue;
        }
        let rho = state_family(m1, m2).unwrap();
        assert!((rho.op().trace() - 1.0).abs() < 1e-12);
        assert!(rho.min_eigenvalue().unwrap() >= -1e-9);
        assert!(
            partial_transpose(rho.op(), 3, 3)
                .unwrap()
                .max_abs_diff(rho.op())
                < 1e-9
        );
        let (l1, l2, l3) = state_weights(m1, m2).unwrap();
        assert!((l1 + l2 + 2.0 * l3 - 1.0).abs() < 1e-15);
        done += 1;
    }
}

#[test]
fn weights_nonnegative_on_boundary() {
    for k in 0..=200 {
        // m1 = r cos θ, m2 = r sin θ with r fixed by m1² + m2² + m1 m2 = 1
        let th = std::f64::consts::FRAC_PI_2 * k as f64 / 200.0;
        let r = 1.0 / (1.0 + th.cos() * th.sin()).sqrt();
        let (l1, l2, l3) = state_weights(r * th.cos(), r * th.sin()).unwrap();
        assert!(l1.min(l2).min(l3) >= -1e-9, "θ = {th}: {l1} {l2} {l3}");
    }
}

#[test]
fn weights_at_origin() {
    let (l1, l2, l3) = state_weights(0.0, 0.0).unwrap();
    assert!((l1 - 0.5).abs() < 1e-15 && l2.abs() < 1e-15 && (l3 - 0.25).abs() < 1e-15);
}

#[test]
fn constraint_violation_names_inequality() {
    let err = state_family(0.9, 0.9).unwrap_err().to_string();
    assert!(err.contains("m1^2 + m2^2 <= 1"), "{err}");
    let err = FamilyParams::new(0.1, 0.7, 0.7).unwrap_err().to_string();
    assert!(err.contains("m1^2 + m2^2 + m1*m2 <= 1"), "{err}");
    assert!(FamilyParams::new(0.1, -0.1, 0.2).is_err());
}

#[test]
fn published_matrix_diagonal_start() {
    // entry (0, 0) is λ2/3 and carries the λ2 transcription
    let rho = state_family(PUBLISHED_PARAMS.m1, PUBLISHED_PARAMS.m2).unwrap();
    let (_, l2, _) = state_weights(PUBLISHED_PARAMS.m1, PUBLISHED_PARAMS.m2).unwrap();
    assert!((rho.op()[(0, 0)].re - l2 / 3.0).abs() < 1e-15);
    assert!((rho.op()[(0, 0)].re - published_state()[(0, 0)].re).abs() < 5e-4);
}

#[test]
fn counterexample_violation() {
    let c = violation(&PUBLISHED_PARAMS).unwrap();
    assert!((c + 0.0029).abs() < 2e-4, "{c}");
}

#[test]
fn origin_is_not_violated_and_not_steerable() {
    let (b1, b2) = mub_bases();
    let e = assemblage_from_state(&state_family(0.0, 0.0).unwrap(), &[b1, b2]).unwrap();
    let r = lhs_membership(&e).unwrap();
    assert!(!r.steerable(), "{}", r.mu_star);
    for x in x_grid() {
        let c = violation(&FamilyParams::new(x, 0.0, 0.0).unwrap()).unwrap();
        assert!(c >= -1e-8, "x = {x}: {c}");
    }
}

#[test]
fn note_added_parameters_evaluate() {
    let c = violation(&FamilyParams::new(0.26, 1.0 / 60.0, 0.3).unwrap()).unwrap();
    assert!(c.is_finite());
}

#[test]
fn verify_without_noise() {
    let r = verify_counterexample(&PUBLISHED_PARAMS, 0.0, DataSource::Analytic).unwrap();
    assert!((r.c + 0.0029).abs() < 2e-4);
    assert!(r.min_margin() >= -1e-9);
    assert!(r.bound_entangled_and_steerable);
    assert_eq!(r.functional_margins.len(), 9);
}

#[test]
fn verify_with_noise() {
    let p = PUBLISHED_PARAMS;
    let r = verify_counterexample(&p, 1e-3, DataSource::auto(&p, 1e-3)).unwrap();
    assert_eq!(r.data, DataSource::Published);
    assert!((r.c + 0.0014).abs() < 2e-4, "{}", r.c);
    assert!(r.min_margin() >= 1e-5, "{}", r.min_margin());
    assert!(r.bound_entangled_and_steerable);
}

#[test]
fn verify_rejects_bad_epsilon_and_published_elsewhere() {
    assert!(matches!(
        verify_counterexample(&PUBLISHED_PARAMS, 1.5, DataSource::Analytic),
        Err(Error::Domain(_))
    ));
    let p = FamilyParams::new(0.2, 0.2, 0.4).unwrap();
    assert!(verify_counterexample(&p, 1e-3, DataSource::Published).is_err());
    assert_eq!(DataSource::auto(&p, 1e-3), DataSource::Analytic);
}

#[test]
fn verify_report_json_names_margins() {
    let r = verify_counterexample(&PUBLISHED_PARAMS, 0.0, DataSource::Analytic).unwrap();
    let json = serde_json::to_value(&r).unwrap();
    assert!(json["C"].is_number());
    assert_eq!(json["data"], "analytic");
    assert_eq!(json["functional_margins"][0]["name"], "Z11");
}

#[test]
fn scan_containing_optimum() {
    let xs = Grid::single(0.1578);
    let m1s: Grid = "0.1162:0.3162:11".parse().unwrap();
    let m2s: Grid = "0.3363:0.5363:11".parse().unwrap();
    let t = scan(&xs, &m1s, &m2s);
    assert_eq!(t.rows.len(), 121);
    let min = t.minimum().unwrap();
    assert!(min.c.unwrap() <= -0.0027, "{min:?}");
    // rows match pointwise evaluation, in grid order
    let row = t.row(0, 5, 5);
    assert!((row.m1 - 0.2162).abs() < 1e-12 && (row.m2 - 0.4363).abs() < 1e-12);
    assert_eq!(row.c.unwrap(), violation(&PUBLISHED_PARAMS).unwrap());
}

#[test]
fn scan_outside_domain_is_all_invalid() {
    let t = scan(
        &Grid::single(0.2),
        &"0.8:1.0:5".parse().unwrap(),
        &"0.6:1.0:5".parse().unwrap(),
    );
    assert!(t.rows.iter().all(|r| !r.valid()));
    assert!(t.minimum().is_none());
}

#[test]
fn grid_parsing_errors() {
    assert!("0:1".parse::<Grid>().is_err());
    assert!("0:1:1".parse::<Grid>().is_err());
    assert!("a:1:3".parse::<Grid>().is_err());
    assert_eq!(
        "0:1:3".parse::<Grid>().unwrap().values(),
        vec![0.0, 0.5, 1.0]
    );
}

#[test]
fn violating_region_is_connected() {
    let xs = Grid::new(0.0, 0.5, 10).unwrap();
    let ms = Grid::new(0.0, 1.0, 10).unwrap();
    let t = scan(&xs, &ms, &ms);
    assert_eq!(t.rows.len(), 1000);
    // x index closest to the optimum
    let ix = (0..10)
        .min_by(|&a, &b| {
            (t.xs[a] - 0.1578)
                .abs()
                .total_cmp(&(t.xs[b] - 0.1578).abs())
        })
        .unwrap();
    let comps = t.negative_components(ix);
    assert_eq!(comps.len(), 1, "{comps:?}");
    for comp in &comps {
        for &(i, j) in comp {
            let r = t.row(ix, i, j);
            assert_eq!(
                r.c.unwrap(),
                violation(&FamilyParams::new(r.x, r.m1, r.m2).unwrap()).unwrap()
            );
        }
    }
}

#[test]
fn violation_is_continuous() {
    let n = 41;
    let ms = Grid::new(0.0, 0.6, n).unwrap();
    let t = scan(&Grid::single(0.1578), &ms, &ms);
    let mut diffs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let here = t.row(0, i, j).c;
            for (u, v) in [(i + 1, j), (i, j + 1)] {
                if u < n && v < n {
                    if let (Some(a), Some(b)) = (here, t.row(0, u, v).c) {
                        diffs.push((a - b).abs());
                    }
                }
            }
        }
    }
    let mut sorted = diffs.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    assert!(
        sorted.last().unwrap() <= &(10.0 * median),
        "max {} median {median}",
        sorted.last().unwrap()
    );
}

#[test]
fn state_min_eigenvalue_matches_weights() {
    // the four pure components are orthonormal, so the spectrum is the weights plus zeros
    let rho = state_family(0.2162, 0.4363).unwrap();
    let (l1, l2, l3) = state_weights(0.2162, 0.4363).unwrap();
    let ev = eig_hermitian(rho.op()).unwrap().values;
    let mut want = vec![0.0, 0.0, 0.0, 0.0, 0.0, l1, l2, l3, l3];
    want.sort_by(f64::total_cmp);
    for (g, w) in ev.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12, "{ev:?} vs {want:?}");
    }
    assert!(min_eigenvalue(rho.op()).unwrap().abs() < 1e-12);
}
