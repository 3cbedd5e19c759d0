//! Text file formats and CSV output.
//!
//! Numbers are written with 17 significant digits so that reruns with the
//! same seeds produce byte-identical files.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::cf::CfSamples;
use crate::em::EmFit;
use crate::error::{Error, Result};
use crate::experiments::{RunRecord, SummaryRow};
use crate::mixture::{Component, GaussianMixture, ObservationSet};
use crate::spectral::EstimationResult;

/// Full-precision decimal rendering of `x` (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn content_lines(reader: impl BufRead) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader.lines().enumerate().map(|(i, l)| {
        (
            i + 1,
            l.map(|s| match s.find('#') {
                Some(pos) => s[..pos].trim().to_string(),
                None => s.trim().to_string(),
            }),
        )
    })
}

fn parse_number(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{token}` is not a decimal number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("`{token}` is not finite"),
        });
    }
    Ok(v)
}

/// Newline-delimited reals; blank lines and `#` comments are skipped.
pub fn read_observations(reader: impl BufRead) -> Result<ObservationSet> {
    let mut values = Vec::new();
    for (line, text) in content_lines(reader) {
        let text = text?;
        if text.is_empty() {
            continue;
        }
        values.push(parse_number(&text, line)?);
    }
    if values.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no observations found".into(),
        });
    }
    ObservationSet::new(values)
}

pub fn write_observations(obs: &ObservationSet, mut out: impl Write) -> Result<()> {
    for &z in obs.values() {
        writeln!(out, "{}", fmt_f64(z))?;
    }
    Ok(())
}

/// One component per line: `weight mean std`; `#` starts a comment.
pub fn read_mixture(reader: impl BufRead) -> Result<GaussianMixture> {
    let mut components = Vec::new();
    for (line, text) in content_lines(reader) {
        let text = text?;
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected `weight mean std`, found {} fields", fields.len()),
            });
        }
        components.push(Component {
            weight: parse_number(fields[0], line)?,
            mean: parse_number(fields[1], line)?,
            std: parse_number(fields[2], line)?,
        });
    }
    GaussianMixture::new(components)
}

pub fn write_mixture(model: &GaussianMixture, mut out: impl Write) -> Result<()> {
    writeln!(out, "# weight mean std")?;
    for c in model.components() {
        writeln!(
            out,
            "{} {} {}",
            fmt_f64(c.weight),
            fmt_f64(c.mean),
            fmt_f64(c.std)
        )?;
    }
    Ok(())
}

/// `# period=<T_e>,provenance=<kind>` then `m,re,im` rows.
pub fn write_cf_csv(cf: &CfSamples, mut out: impl Write) -> Result<()> {
    writeln!(
        out,
        "# period={},provenance={}",
        fmt_f64(cf.period()),
        cf.provenance().as_str()
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "re", "im"])?;
    for (m, v) in cf.values().iter().enumerate() {
        w.write_record([m.to_string(), fmt_f64(v.re), fmt_f64(v.im)])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean rows followed by eigenvalue rows, sharing one header.
pub fn write_estimation_csv(result: &EstimationResult, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "kind",
        "index",
        "value",
        "root_re",
        "root_im",
        "unwrap",
        "out_of_range",
    ])?;
    for k in 0..result.means.len() {
        w.write_record([
            "mean".to_string(),
            k.to_string(),
            fmt_f64(result.means[k]),
            fmt_f64(result.roots[k].re),
            fmt_f64(result.roots[k].im),
            result.unwrap_integers[k].to_string(),
            result.out_of_range[k].to_string(),
        ])?;
    }
    for (m, &l) in result.eigenvalue_spectrum.iter().enumerate() {
        w.write_record([
            "eigenvalue".to_string(),
            m.to_string(),
            fmt_f64(l),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn estimation_report(result: &EstimationResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "components: {}", result.means.len());
    let _ = writeln!(s, "matrix order: {}", result.eigenvalue_spectrum.len());
    let _ = writeln!(s, "sampling period: {}", fmt_f64(result.period));
    let _ = writeln!(
        s,
        "unwrap interval: [{}, {}]",
        fmt_f64(result.interval.0),
        fmt_f64(result.interval.1)
    );
    let _ = writeln!(s, "means:");
    for k in 0..result.means.len() {
        let r = result.roots[k];
        let _ = writeln!(
            s,
            "  {:>3}  {:>24}  root {:+.6}{:+.6}i  |root| {:.6}  l={}{}",
            k,
            fmt_f64(result.means[k]),
            r.re,
            r.im,
            r.norm(),
            result.unwrap_integers[k],
            if result.out_of_range[k] {
                "  OUT OF RANGE"
            } else {
                ""
            }
        );
    }
    let _ = writeln!(s, "eigenvalues:");
    for (m, l) in result.eigenvalue_spectrum.iter().enumerate() {
        let _ = writeln!(s, "  {:>3}  {}", m, fmt_f64(*l));
    }
    s
}

pub fn write_em_csv(fit: &EmFit, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "component",
        "mean",
        "variance",
        "weight",
        "iterations",
        "final_log_likelihood",
    ])?;
    for k in 0..fit.means.len() {
        w.write_record([
            k.to_string(),
            fmt_f64(fit.means[k]),
            fmt_f64(fit.variances[k]),
            fmt_f64(fit.weights[k]),
            fit.iterations_used.to_string(),
            fmt_f64(fit.final_log_likelihood()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn em_report(fit: &EmFit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "iterations: {}", fit.iterations_used);
    let _ = writeln!(
        s,
        "final log-likelihood: {}",
        fmt_f64(fit.final_log_likelihood())
    );
    let _ = writeln!(s, "components (mean, variance, weight):");
    for k in 0..fit.means.len() {
        let _ = writeln!(
            s,
            "  {:>3}  {}  {}  {}",
            k,
            fmt_f64(fit.means[k]),
            fmt_f64(fit.variances[k]),
            fmt_f64(fit.weights[k])
        );
    }
    s
}

/// `runs.csv`. Wall time is machine dependent, so it is only written when
/// `with_timing` is set.
pub fn write_runs_csv(records: &[RunRecord], with_timing: bool, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "scenario",
        "sigma",
        "run",
        "seed",
        "estimator",
        "e_r",
        "failed",
    ];
    if with_timing {
        header.push("wall_time_s");
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.scenario.to_string(),
            fmt_f64(r.sigma),
            r.run.to_string(),
            r.seed.to_string(),
            r.estimator.as_str().to_string(),
            fmt_f64(r.error),
            r.failed.to_string(),
        ];
        if with_timing {
            row.push(fmt_f64(r.wall_time.as_secs_f64()));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv(rows: &[SummaryRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario",
        "sigma",
        "estimator",
        "threshold",
        "runs",
        "probability",
        "failures",
        "median_e_r",
    ])?;
    for r in rows {
        w.write_record([
            r.scenario.to_string(),
            fmt_f64(r.sigma),
            r.estimator.as_str().to_string(),
            fmt_f64(r.threshold),
            r.runs.to_string(),
            fmt_f64(r.probability),
            r.failures.to_string(),
            fmt_f64(r.median_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `spectrum.csv`: `m,eigenvalue`, descending.
pub fn write_spectrum_csv(spectrum: &[f64], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "eigenvalue"])?;
    for (m, &l) in spectrum.iter().enumerate() {
        w.write_record([m.to_string(), fmt_f64(l)])?;
    }
    w.flush()?;
    Ok(())
}
