//! Output documents. JSON goes through `serde_json::Value`, whose maps are
//! ordered, so keys come out sorted and identical inputs give identical bytes.

use dziobek_core::experiment::SweepReport;
use dziobek_core::solver::{
    labeled_copies, mass_preserving_permutations, EulerSolution, SolveOptions,
};
use dziobek_core::{Bound, CCClass, Certificate, MassVector, PotentialParam};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Failure;

pub const SCHEMA: &str = "dziobek/1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn contains_null(v: &Value) -> bool {
    match v {
        Value::Null => true,
        Value::Array(a) => a.iter().any(contains_null),
        Value::Object(o) => o.values().any(contains_null),
        _ => false,
    }
}

fn to_value<T: Serialize>(t: &T) -> Result<Value, Failure> {
    serde_json::to_value(t).map_err(|e| Failure::Numeric(format!("serialization failed: {e}")))
}

/// Pretty JSON with a trailing newline. Non-finite numbers serialize as
/// `null`, which is rejected here.
pub fn render_json(doc: &Value) -> Result<String, Failure> {
    if contains_null(doc) {
        return Err(Failure::Numeric("non-finite number in output".into()));
    }
    let mut s = serde_json::to_string_pretty(doc)
        .map_err(|e| Failure::Numeric(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn with_schema(mut v: Value) -> Value {
    if let Value::Object(o) = &mut v {
        o.insert("schema".into(), Value::String(SCHEMA.into()));
    }
    v
}

pub fn bound_value(b: &Bound) -> Value {
    json!({ "exponent": b.exponent, "decimal": b.value.to_string() })
}

fn class_value(c: &CCClass, perms: Option<&[Vec<usize>]>, tol: f64) -> Result<Value, Failure> {
    let mut v = json!({
        "key": c.canonical_key,
        "distances": c.representative.pair_distances(),
        "positions": c.representative.positions(),
        "certificate": to_value(&c.certificate)?,
        "multiplicity": c.multiplicity_found,
    });
    if let Some(k) = labeled_copies(&c.representative.distance_matrix(), perms, tol) {
        v["labelings"] = k.into();
    }
    Ok(v)
}

pub struct SolveRun<'a> {
    pub masses: &'a MassVector,
    pub a: PotentialParam,
    pub opts: &'a SolveOptions,
    pub bound: &'a Bound,
    pub converged: usize,
    pub classes: &'a [CCClass],
}

pub fn solve_document(run: &SolveRun<'_>) -> Result<Value, Failure> {
    let perms = mass_preserving_permutations(run.masses);
    let classes = run
        .classes
        .iter()
        .map(|c| class_value(c, perms.as_deref(), run.opts.dedup_tol))
        .collect::<Result<Vec<_>, _>>()?;
    let labeled_total: Option<u64> = classes
        .iter()
        .map(|c| c.get("labelings").and_then(Value::as_u64))
        .sum();
    let mut doc = json!({
        "meta": {
            "n": run.masses.len(),
            "a": run.a.value(),
            "masses": run.masses.as_slice(),
            "seed": run.opts.seed,
            "starts": run.opts.starts,
            "newton_tol": run.opts.newton_tol,
            "dedup_tol": run.opts.dedup_tol,
            "converged_starts": run.converged,
            "version": VERSION,
        },
        "bound": bound_value(run.bound),
        "class_count": run.classes.len(),
        "labeled_count": labeled_total,
        "classes": classes,
    });
    if labeled_total.is_none() {
        doc.as_object_mut().expect("object").remove("labeled_count");
    }
    Ok(with_schema(doc))
}

pub fn certificate_document(
    masses: &MassVector,
    a: PotentialParam,
    cert: &Certificate,
) -> Result<Value, Failure> {
    Ok(with_schema(json!({
        "meta": { "n": masses.len(), "a": a.value(), "masses": masses.as_slice(), "version": VERSION },
        "certificate": to_value(cert)?,
    })))
}

pub fn sweep_document(report: &SweepReport) -> Result<Value, Failure> {
    let mut v = to_value(report)?;
    if let Value::Object(o) = &mut v {
        o.insert("version".into(), Value::String(VERSION.into()));
    }
    Ok(with_schema(v))
}

pub fn oracle_document(
    masses: &MassVector,
    a: PotentialParam,
    sols: &[EulerSolution],
) -> Result<Value, Failure> {
    let sols: Vec<Value> = sols
        .iter()
        .map(|s| {
            json!({
                "middle": s.middle + 1,
                "order": s.order.map(|b| b + 1),
                "ratio": s.ratio,
                "distances": s.distances.pairs(),
                "positions": s.configuration.positions(),
            })
        })
        .collect();
    Ok(with_schema(json!({
        "meta": { "a": a.value(), "masses": masses.as_slice(), "version": VERSION },
        "solutions": sols,
    })))
}

fn pair_headers(n: usize) -> Vec<String> {
    let mut h = Vec::new();
    for i in 1..=n {
        for j in (i + 1)..=n {
            h.push(format!("d_{i}{j}"));
        }
    }
    h
}

/// Shortest round-trip form, with an exponent for very small or large values.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn join(v: &[f64]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, Failure> {
    let bytes = w
        .into_inner()
        .map_err(|e| Failure::Numeric(format!("csv output failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Failure::Numeric(e.to_string()))
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::Numeric(format!("csv output failed: {e}"))
}

/// One row per class. Columns: `class_key`, `d_12 .. d_(n-1)n`, then the
/// certificate numbers.
pub fn solve_csv(n: usize, classes: &[CCClass]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["class_key".to_string()];
    header.extend(pair_headers(n));
    header.extend(
        [
            "kappa",
            "degeneracy_index",
            "isolated",
            "verdict",
            "multiplicity",
            "cc_residual",
            "cc_residual_lambda_form",
            "dziobek_residual",
            "rank1_residual",
            "veronese_residual",
            "delta_sum",
            "kernel_cosine",
            "isolation_ratio",
        ]
        .map(String::from),
    );
    w.write_record(&header).map_err(csv_err)?;
    for c in classes {
        let k = &c.certificate;
        let mut row = vec![join(&c.canonical_key)];
        row.extend(c.representative.pair_distances().iter().map(|&d| num(d)));
        row.extend([
            num(k.kappa),
            k.degeneracy_index.to_string(),
            k.isolated.to_string(),
            if k.accepted() { "ACCEPTED" } else { "REJECTED" }.to_string(),
            c.multiplicity_found.to_string(),
            num(k.cc_residual),
            num(k.cc_residual_lambda_form),
            num(k.dziobek_residual),
            num(k.rank1_residual),
            num(k.veronese_residual),
            num(k.delta_sum),
            num(k.kernel_cosine),
            num(k.isolation_ratio),
        ]);
        w.write_record(&row).map_err(csv_err)?;
    }
    finish_csv(w)
}

/// One row per trial.
pub fn sweep_csv(report: &SweepReport) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "trial",
        "masses",
        "class_count",
        "accepted_count",
        "all_isolated",
        "flagged",
        "max_cc_residual",
        "max_dziobek_residual",
        "max_rank1_residual",
        "max_veronese_residual",
        "max_delta_sum",
        "max_kernel_defect",
        "min_abs_kappa",
        "degeneracy_histogram",
    ])
    .map_err(csv_err)?;
    for t in &report.trials {
        let r = &t.max_residuals;
        let hist: Vec<String> = t
            .degeneracy_histogram
            .iter()
            .map(|c| c.to_string())
            .collect();
        w.write_record([
            t.index.to_string(),
            join(&t.masses),
            t.class_count.to_string(),
            t.accepted_count.to_string(),
            t.all_isolated.to_string(),
            t.flagged.to_string(),
            num(r.cc),
            num(r.dziobek),
            num(r.rank1),
            num(r.veronese),
            num(r.delta_sum),
            num(r.kernel_defect),
            r.min_abs_kappa.map(num).unwrap_or_default(),
            hist.join(";"),
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_is_a_numeric_failure() {
        let v = serde_json::to_value(f64::NAN).unwrap();
        assert!(matches!(
            render_json(&json!({ "x": v })),
            Err(Failure::Numeric(_))
        ));
    }

    #[test]
    fn keys_are_sorted() {
        let s = render_json(&with_schema(json!({ "zeta": 1, "alpha": 2 }))).unwrap();
        let (a, z, sc) = (
            s.find("alpha").unwrap(),
            s.find("zeta").unwrap(),
            s.find("schema").unwrap(),
        );
        assert!(a < sc && sc < z);
    }

    #[test]
    fn pair_header_names() {
        assert_eq!(
            pair_headers(4),
            ["d_12", "d_13", "d_14", "d_23", "d_24", "d_34"]
        );
    }
}
