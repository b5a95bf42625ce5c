use std::io::Write;

use super::estimate::Source;
use super::protocol::{Estimates, SweepRow};
use crate::error::{Error, Result};
use crate::io::opt_cell;

fn err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// `subject_id,date,truth,time,trimp,vam,combined,w_time,w_trimp,w_vam`
pub fn write_estimates<W: Write>(est: &Estimates, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "subject_id", "date", "truth", "time", "trimp", "vam", "combined", "w_time", "w_trimp", "w_vam",
    ])
    .map_err(err)?;
    for r in &est.rows {
        let mut rec = vec![r.subject_id.clone(), r.date.to_string(), r.truth.to_string()];
        rec.extend(Source::ALL.iter().map(|s| opt_cell(r.estimates.get(s).copied())));
        rec.extend(Source::SINGLE.iter().map(|s| opt_cell(r.weights.get(s).copied())));
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv: {e}")))
}

/// `scope,source,rmse,r2,n`; scope is `all` or a subject id.
pub fn write_eval<W: Write>(est: &Estimates, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["scope", "source", "rmse", "r2", "n"]).map_err(err)?;
    for (source, r) in &est.reports {
        w.write_record(["all", source.name(), &r.rmse.to_string(), &r.r2.to_string(), &r.n.to_string()])
            .map_err(err)?;
    }
    for (source, r) in &est.reports {
        for (subject, s) in &r.per_subject {
            w.write_record([subject.as_str(), source.name(), &s.rmse.to_string(), &s.r2.to_string(), &s.n.to_string()])
                .map_err(err)?;
        }
    }
    w.flush().map_err(|e| Error::Config(format!("csv: {e}")))
}

/// `span_days,source,n_subjects,mean_rmse,ci_low,ci_high,default,flagged`
pub fn write_sweep<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["span_days", "source", "n_subjects", "mean_rmse", "ci_low", "ci_high", "default", "flagged"])
        .map_err(err)?;
    for r in rows {
        w.write_record([
            r.span_days.to_string(),
            r.source.name().to_string(),
            r.n_subjects.to_string(),
            r.mean_rmse.to_string(),
            opt_cell(r.ci_low),
            opt_cell(r.ci_high),
            r.is_default.to_string(),
            r.flagged().to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv: {e}")))
}
