use std::fs;
use std::path::Path;
use std::time::Instant;

use dziobek_core::experiment::generic_sweep;
use dziobek_core::solver::euler_collinear_oracle;
use dziobek_core::{
    bound, certify, classify, multistart_solve, validate_masses, Configuration, MassVector,
    PotentialParam, SolveOptions, Tolerances,
};
use serde::Deserialize;

use crate::args::{
    BoundArgs, BoundFormat, CertifyArgs, Format, MassArgs, OracleArgs, SolveArgs, SweepArgs,
};
use crate::error::Failure;
use crate::output::{
    bound_value, certificate_document, oracle_document, render_json, solve_csv, solve_document,
    sweep_csv, sweep_document, SolveRun, SCHEMA,
};

/// A rendered document and the exit code that goes with it.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub document: String,
    pub code: u8,
}

impl Outcome {
    fn ok(document: String) -> Self {
        Self { document, code: 0 }
    }
}

fn exponent(a: f64) -> Result<PotentialParam, Failure> {
    Ok(PotentialParam::new(a)?)
}

fn masses(args: &MassArgs) -> Result<MassVector, Failure> {
    let m = match (args.masses.as_ref().map(|l| &l.0), args.equal, args.n) {
        (Some(m), _, Some(n)) if m.len() != n => {
            return Err(Failure::Invalid(format!(
                "--n {n} but {} masses given",
                m.len()
            )))
        }
        (Some(m), _, _) => validate_masses(m)?,
        (None, true, Some(n)) => MassVector::equal(n)?,
        (None, true, None) => return Err(Failure::Invalid("--equal needs --n".into())),
        (None, false, Some(n)) => MassVector::equal(n)?,
        (None, false, None) => {
            return Err(Failure::Invalid("give --masses or --n with --equal".into()))
        }
    };
    if m.len() < 3 {
        return Err(Failure::Invalid(format!("need n >= 3, got {}", m.len())));
    }
    Ok(m)
}

fn solve_options(
    n: usize,
    starts: Option<usize>,
    seed: u64,
    tol: Option<f64>,
) -> Result<SolveOptions, Failure> {
    let mut o = SolveOptions::for_bodies(n);
    o.seed = seed;
    if let Some(s) = starts {
        o.starts = s;
    }
    if let Some(t) = tol {
        o.newton_tol = t;
    }
    o.validate()?;
    Ok(o)
}

pub fn solve(args: &SolveArgs) -> Result<Outcome, Failure> {
    let m = masses(&args.bodies)?;
    let a = exponent(args.a)?;
    let opts = solve_options(m.len(), args.starts, args.seed, args.tol)?;
    let b = bound(m.len())?;
    let started = Instant::now();
    let candidates = multistart_solve(&m, a, &opts)?;
    let classes = classify(&candidates, &m, a, opts.dedup_tol, &Tolerances::default())?;
    eprintln!(
        "solve: {} of {} starts converged, {} classes, {:.2?}",
        candidates.len(),
        opts.starts,
        classes.len(),
        started.elapsed()
    );
    if b.admits(classes.len()) {
        let document = match args.format {
            Format::Json => render_json(&solve_document(&SolveRun {
                masses: &m,
                a,
                opts: &opts,
                bound: &b,
                converged: candidates.len(),
                classes: &classes,
            })?)?,
            Format::Csv => solve_csv(m.len(), &classes)?,
        };
        Ok(Outcome::ok(document))
    } else {
        Err(Failure::Numeric(format!(
            "{} classes exceed the bound {b}",
            classes.len()
        )))
    }
}

#[derive(Debug, Deserialize)]
struct CertifyInput {
    masses: Vec<f64>,
    a: f64,
    positions: Vec<Vec<f64>>,
}

pub fn certify_file(args: &CertifyArgs) -> Result<Outcome, Failure> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", args.input.display())))?;
    let input: CertifyInput = serde_json::from_str(&text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", args.input.display())))?;
    let m = validate_masses(&input.masses)?;
    let a = exponent(input.a)?;
    let x = Configuration::from_points(&input.positions)?;
    let cert = certify(&x, &m, a, &Tolerances::default())?;
    if !cert.accepted() {
        eprintln!("certify: REJECTED ({})", cert.failures.join(", "));
    }
    let document = render_json(&certificate_document(&m, a, &cert)?)?;
    Ok(Outcome {
        document,
        code: if cert.accepted() { 0 } else { 1 },
    })
}

pub fn bound_cmd(args: &BoundArgs) -> Result<Outcome, Failure> {
    let b = bound(args.n)?;
    let document = match args.format {
        BoundFormat::Text => format!("{b}\n"),
        BoundFormat::Json => {
            let mut v = bound_value(&b);
            v["n"] = args.n.into();
            v["schema"] = SCHEMA.into();
            render_json(&v)?
        }
    };
    Ok(Outcome::ok(document))
}

pub fn sweep(args: &SweepArgs) -> Result<Outcome, Failure> {
    let a = exponent(args.a)?;
    let opts = solve_options(args.n, args.starts, args.seed, args.tol)?;
    let report = generic_sweep(
        args.n,
        a,
        args.trials,
        args.seed,
        &opts,
        &Tolerances::default(),
    )?;
    eprintln!(
        "sweep: {} trials, max {} classes, {} flagged, {:.2?}",
        report.trials.len(),
        report.max_class_count,
        report.flagged_trials.len(),
        report.wall_time
    );
    let document = match args.format {
        Format::Json => render_json(&sweep_document(&report)?)?,
        Format::Csv => sweep_csv(&report)?,
    };
    Ok(Outcome::ok(document))
}

pub fn oracle(args: &OracleArgs) -> Result<Outcome, Failure> {
    let m = validate_masses(&args.masses.0)?;
    let a = exponent(args.a)?;
    let sols = euler_collinear_oracle(&m, a)?;
    Ok(Outcome::ok(render_json(&oracle_document(&m, a, &sols)?)?))
}

pub fn write_document(doc: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, doc).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display()))),
        None => {
            print!("{doc}");
            Ok(())
        }
    }
}
