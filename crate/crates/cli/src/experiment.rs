//! One function per subcommand; each turns a config into output data.

use std::path::{Path, PathBuf};

use bykov_core::birkhoff::averages_along;
use bykov_core::{
    adjusted_sequence, generate_hitting_sequence, historic_certificate, lemma_diagnostics,
    verify_conjugacy, Certificate, ConjugacyReport,
};
use log::info;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::output::{emit_csv, num, opt, write_atomic, Table};
use crate::CliError;

/// Hitting times with their section points.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let h = generate_hitting_sequence(&cfg.seed_point()?, &cfg.params, cfg.n_pairs)?;
    let mut t = Table::new(&["index", "time", "chart", "theta_lifted", "log_coord"]);
    for (k, pt) in h.points().iter().enumerate() {
        t.push(vec![
            k.to_string(),
            num(h.time(k)),
            pt.chart.name().to_string(),
            num(pt.theta_lifted),
            num(pt.log_coord()),
        ]);
    }
    Ok(t)
}

pub fn diagnostics(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let h = generate_hitting_sequence(&cfg.seed_point()?, &cfg.params, cfg.n_pairs)?;
    let s = lemma_diagnostics(&h, &cfg.params.derived()?)?;
    let mut t = Table::new(&[
        "i", "lemma1", "lemma2", "lemma3", "residual", "ratio1", "ratio2", "ratio3", "ratio4",
    ]);
    for i in 0..s.len() {
        let mut row = vec![i.to_string()];
        row.extend(s.row(i).iter().map(|x| opt(*x)));
        t.push(row);
    }
    Ok(t)
}

pub fn birkhoff(cfg: &ExperimentConfig) -> Result<(Table, Certificate), CliError> {
    let h = generate_hitting_sequence(&cfg.seed_point()?, &cfg.params, cfg.n_pairs)?;
    let s = averages_along(&h, &cfg.params, &cfg.observable, 2 * cfg.n_pairs)?;
    let mut rows: Vec<(usize, &str, f64, f64, f64)> = s
        .even
        .iter()
        .map(|e| (e.index, "even", e.time, e.average, s.predicted_even))
        .chain(
            s.odd
                .iter()
                .map(|e| (e.index, "odd", e.time, e.average, s.predicted_odd)),
        )
        .collect();
    rows.sort_by_key(|r| r.0);
    let mut t = Table::new(&[
        "parity",
        "index",
        "time",
        "average",
        "predicted",
        "abs_error",
    ]);
    for (k, parity, time, avg, pred) in rows {
        t.push(vec![
            parity.to_string(),
            k.to_string(),
            num(time),
            num(avg),
            num(pred),
            num((avg - pred).abs()),
        ]);
    }
    let cert = historic_certificate(&s, cfg.tolerances.certificate)?;
    Ok((t, cert))
}

pub fn adjusted(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let h = generate_hitting_sequence(&cfg.seed_point()?, &cfg.params, cfg.n_pairs)?;
    let a = adjusted_sequence(&h, &cfg.params.derived()?, cfg.n_pairs)?;
    let measured = h.pair_durations();
    let mut t = Table::new(&[
        "i",
        "T",
        "Ttil",
        "t_even",
        "t_til_even",
        "t_odd",
        "t_til_odd",
        "diff",
    ]);
    for i in 0..=cfg.n_pairs {
        let t_even = h.time_dd(2 * i);
        t.push(vec![
            i.to_string(),
            opt(measured.get(i).map(|x| x.to_f64())),
            opt(a.t_seq.get(i).map(|x| x.to_f64())),
            num(t_even.to_f64()),
            num(a.t_even[i].to_f64()),
            opt((i < cfg.n_pairs).then(|| h.time(2 * i + 1))),
            opt(a.t_odd.get(i).map(|x| x.to_f64())),
            num((t_even - a.t_even[i]).to_f64()),
        ]);
    }
    Ok(t)
}

pub fn conjugacy_report(cfg: &ExperimentConfig, tol: f64) -> Result<ConjugacyReport, CliError> {
    let g = cfg.params_g.ok_or(CliError::MissingTarget)?;
    Ok(verify_conjugacy(
        &cfg.seed_point()?,
        &cfg.params,
        &g,
        cfg.n_pairs,
        tol,
    )?)
}

pub fn conjugacy_json(rep: &ConjugacyReport) -> serde_json::Value {
    json!({
        "verdict": rep.verdict,
        "max_dev": rep.max_dev,
        "deviations": rep.time_deviations,
        "invariants_match": rep.invariants_match,
        "image": {
            "z0": rep.image_point.z0(),
            "rho1": rep.image_point.rho1(),
            "theta0": rep.image_point.theta0,
        },
    })
}

/// Files written and whether the run's verdict (if any) held.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub verdict: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Simulate,
    Diagnostics,
    Birkhoff,
    Adjusted,
    Conjugacy,
}

pub fn run_experiment(
    cfg: &ExperimentConfig,
    which: Experiment,
    out_dir: &Path,
) -> Result<RunOutcome, CliError> {
    std::fs::create_dir_all(out_dir)?;
    let csv = |name: &str, t: &Table| -> Result<PathBuf, CliError> {
        let path = out_dir.join(name);
        emit_csv(t, &path)?;
        info!("wrote {} rows to {}", t.rows.len(), path.display());
        Ok(path)
    };
    let outcome = match which {
        Experiment::Simulate => RunOutcome {
            files: vec![csv("hitting.csv", &simulate(cfg)?)?],
            verdict: true,
        },
        Experiment::Diagnostics => RunOutcome {
            files: vec![csv("diagnostics.csv", &diagnostics(cfg)?)?],
            verdict: true,
        },
        Experiment::Birkhoff => {
            let (t, cert) = birkhoff(cfg)?;
            info!(
                "historic={} gap={} tails even={} odd={}",
                cert.historic, cert.gap, cert.tail_even, cert.tail_odd
            );
            RunOutcome {
                files: vec![csv("birkhoff.csv", &t)?],
                verdict: cert.historic,
            }
        }
        Experiment::Adjusted => RunOutcome {
            files: vec![csv("adjusted.csv", &adjusted(cfg)?)?],
            verdict: true,
        },
        Experiment::Conjugacy => {
            let rep = conjugacy_report(cfg, cfg.tolerances.conjugacy)?;
            let path = out_dir.join("conjugacy.json");
            let mut text = serde_json::to_vec_pretty(&conjugacy_json(&rep))?;
            text.push(b'\n');
            write_atomic(&path, &text)?;
            info!("verdict={} max_dev={:e}", rep.verdict, rep.max_dev);
            RunOutcome {
                files: vec![path],
                verdict: rep.verdict,
            }
        }
    };
    Ok(outcome)
}
