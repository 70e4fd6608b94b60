use std::path::{Path, PathBuf};

use ppt_steering::family::{
    scan, state_family, state_weights, verify_counterexample, DataSource, FamilyParams, Grid,
    ScanTable,
};
use ppt_steering::quantum::{
    assemblage_from_state, mub_bases, validate_assemblage, Assemblage, ASSEMBLAGE_TOLERANCE,
};
use ppt_steering::seesaw::{seesaw_many, SearchConfig, SearchResult, SearchStatus};
use ppt_steering::steering::{evaluate, extract_inequality, lhs_membership};
use serde::Serialize;
use serde_json::json;

use crate::output::{read_to_string, to_value, write_atomic, write_json, Failure, Outcome};

pub fn verify(
    p: FamilyParams,
    eps: f64,
    data: Option<DataSource>,
    out: Option<&Path>,
) -> Result<Outcome, Failure> {
    let p = FamilyParams::new(p.x, p.m1, p.m2)?;
    let data = data.unwrap_or_else(|| DataSource::auto(&p, eps));
    let report = verify_counterexample(&p, eps, data)?;
    let mut artifacts = Vec::new();
    if let Some(path) = out {
        write_json(path, &report)?;
        artifacts.push(path.to_path_buf());
    }
    let mut lines = vec![
        format!("C = {:.6e}", report.c),
        format!("state min eigenvalue = {:.3e}", report.state_min_eigenvalue),
        format!(
            "partial transpose min eigenvalue = {:.3e}",
            report.ppt_min_eigenvalue
        ),
    ];
    for m in &report.functional_margins {
        lines.push(format!(
            "{} min eigenvalue = {:.3e}",
            m.name, m.min_eigenvalue
        ));
    }
    let positive = report.bound_entangled_and_steerable;
    Ok(Outcome {
        positive,
        verdict: if positive {
            "bound entangled and steerable"
        } else {
            "not certified"
        }
        .into(),
        config: json!({ "x": p.x, "m1": p.m1, "m2": p.m2, "epsilon": eps, "data": data }),
        result: to_value(&report),
        artifacts,
        warnings: Vec::new(),
        lines,
    })
}

pub fn write_scan_csv(table: &ScanTable, path: &Path) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Failure::input(format!("cannot format CSV: {e}"));
    w.write_record(["x", "m1", "m2", "C", "valid"])
        .map_err(fail)?;
    for r in &table.rows {
        let c = r.c.map(|c| format!("{c:e}")).unwrap_or_default();
        w.write_record([
            r.x.to_string(),
            r.m1.to_string(),
            r.m2.to_string(),
            c,
            r.valid().to_string(),
        ])
        .map_err(fail)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Failure::input(format!("cannot format CSV: {e}")))?;
    write_atomic(path, &bytes)
}

pub fn scan_grid(xs: Grid, m1s: Grid, m2s: Grid, out: &Path) -> Result<Outcome, Failure> {
    let table = scan(&xs, &m1s, &m2s);
    write_scan_csv(&table, out)?;
    let valid = table.rows.iter().filter(|r| r.valid()).count();
    let negative = table
        .rows
        .iter()
        .filter(|r| r.c.is_some_and(|c| c < 0.0))
        .count();
    let mut warnings = Vec::new();
    if valid == 0 {
        warnings.push("no grid point lies in the parameter domain".to_string());
    }
    let min = table.minimum().copied();
    let mut lines = vec![format!(
        "{} rows, {valid} valid, {negative} with C < 0",
        table.rows.len()
    )];
    if let Some(r) = min {
        lines.push(format!(
            "minimum C = {:.6e} at x = {}, m1 = {}, m2 = {}",
            r.c.unwrap(),
            r.x,
            r.m1,
            r.m2
        ));
    }
    Ok(Outcome {
        positive: true,
        verdict: "scan written".into(),
        config: json!({ "x": xs, "m1": m1s, "m2": m2s }),
        result: json!({ "rows": table.rows.len(), "valid": valid, "negative": negative, "minimum": min }),
        artifacts: vec![out.to_path_buf()],
        warnings,
        lines,
    })
}

#[derive(Serialize)]
struct SeedRun<'a> {
    seed: u64,
    #[serde(flatten)]
    result: &'a SearchResult,
}

#[derive(Serialize)]
struct SearchFile<'a> {
    config: &'a SearchConfig,
    runs: usize,
    status: SearchStatus,
    best_seed: Option<u64>,
    #[serde(rename = "best_C")]
    best_c: f64,
    results: Vec<SeedRun<'a>>,
}

pub fn search(config: SearchConfig, runs: usize, out: &Path) -> Result<Outcome, Failure> {
    if runs == 0 {
        return Err(Failure::input("--seeds must be at least 1"));
    }
    config.validate()?;
    let results = seesaw_many(&config, runs)?;
    let best = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.status == SearchStatus::ViolationFound)
        .min_by(|a, b| a.1.best_c.total_cmp(&b.1.best_c));
    let best_seed = best.map(|(k, _)| config.seed + k as u64);
    let best_c = best.map_or(f64::INFINITY, |(_, r)| r.best_c);
    let status = if best.is_some() {
        SearchStatus::ViolationFound
    } else {
        SearchStatus::NoViolationFound
    };
    let found = results
        .iter()
        .filter(|r| r.status == SearchStatus::ViolationFound)
        .count();
    let monotonicity: usize = results.iter().map(|r| r.monotonicity_violations).sum();

    let file = SearchFile {
        config: &config,
        runs,
        status,
        best_seed,
        best_c,
        results: results
            .iter()
            .enumerate()
            .map(|(k, result)| SeedRun {
                seed: config.seed + k as u64,
                result,
            })
            .collect(),
    };
    write_json(out, &file)?;

    let mut warnings = Vec::new();
    if monotonicity > 0 {
        warnings.push(format!(
            "{monotonicity} phase transitions increased C by more than the tolerance"
        ));
    }
    let mut lines = vec![format!("{found} of {runs} seeds found a violation")];
    match best_seed {
        Some(s) => lines.push(format!("best C = {best_c:.6e} (seed {s})")),
        None => lines.push("no violation found".into()),
    }
    Ok(Outcome {
        positive: best.is_some(),
        verdict: if best.is_some() {
            "violation found"
        } else {
            "no violation found"
        }
        .into(),
        config: json!({ "search": config, "seeds": runs }),
        result: json!({
            "status": status,
            "best_seed": best_seed,
            "best_C": best_c,
            "seeds_with_violation": found,
            "monotonicity_violations": monotonicity,
            "restarts_used": results.iter().map(|r| r.restarts_used).collect::<Vec<_>>(),
        }),
        artifacts: vec![out.to_path_buf()],
        warnings,
        lines,
    })
}

/// `ensemble.json` becomes `ensemble.functional.json`.
pub fn default_functional_path(input: &Path) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    input.with_file_name(format!("{stem}.functional.json"))
}

pub fn check_ensemble(input: &Path, out: Option<&Path>) -> Result<Outcome, Failure> {
    let text = read_to_string(input)?;
    let e = Assemblage::from_json(&text)
        .map_err(|err| Failure::input(format!("{}: {err}", input.display())))?;
    let report = validate_assemblage(&e, ASSEMBLAGE_TOLERANCE);
    let failures: Vec<String> = report
        .failures()
        .map(|c| format!("{} = {:.3e}", c.name, c.value))
        .collect();
    if !failures.is_empty() {
        return Err(Failure::input(format!(
            "{}: assemblage fails validation (tolerance {:.0e}): {}",
            input.display(),
            report.tolerance,
            failures.join("; ")
        )));
    }

    let r = lhs_membership(&e)?;
    let mut lines = vec![format!("mu* = {:.6e}", r.mu_star)];
    let mut artifacts = Vec::new();
    let mut c = None;
    if r.steerable() {
        let f = extract_inequality(&r)?;
        let value = evaluate(&f, &e)?;
        let path = out
            .map(Path::to_path_buf)
            .unwrap_or_else(|| default_functional_path(input));
        write_json(&path, &f)?;
        lines.push(format!("extracted inequality gives C = {value:.6e}"));
        artifacts.push(path);
        c = Some(value);
    }
    let positive = r.steerable();
    Ok(Outcome {
        positive,
        verdict: if positive {
            "steerable"
        } else {
            "not steerable"
        }
        .into(),
        config: json!({ "input": input, "m": e.settings(), "n": e.outcomes(), "d": e.dim() }),
        result: json!({
            "mu_star": r.mu_star,
            "steerable": positive,
            "C": c,
            "sdp_status": r.sdp.status,
            "sdp_iterations": r.sdp.iterations,
        }),
        artifacts,
        warnings: Vec::new(),
        lines,
    })
}

pub fn export_state(
    m1: f64,
    m2: f64,
    out: &Path,
    assemblage: Option<&Path>,
) -> Result<Outcome, Failure> {
    let rho = state_family(m1, m2)?;
    let (l1, l2, l3) = state_weights(m1, m2)?;
    write_json(out, &rho)?;
    let mut artifacts = vec![out.to_path_buf()];
    if let Some(path) = assemblage {
        let (b1, b2) = mub_bases();
        let e = assemblage_from_state(&rho, &[b1, b2])?;
        write_atomic(path, format!("{}\n", e.to_json()?).as_bytes())?;
        artifacts.push(path.to_path_buf());
    }
    let min_eigenvalue = rho.min_eigenvalue()?;
    let ppt_margin = rho.ppt_margin()?;
    Ok(Outcome {
        positive: true,
        verdict: "state written".into(),
        config: json!({ "m1": m1, "m2": m2 }),
        result: json!({
            "lambda": [l1, l2, l3],
            "min_eigenvalue": min_eigenvalue,
            "ppt_min_eigenvalue": ppt_margin,
        }),
        artifacts,
        warnings: Vec::new(),
        lines: vec![
            format!("lambda = ({l1:.6}, {l2:.6}, {l3:.6})"),
            format!("min eigenvalue = {min_eigenvalue:.3e}, partial transpose min eigenvalue = {ppt_margin:.3e}"),
        ],
    })
}
