//! File formats: the NMAT v1 text matrix format, the dictionary container,
//! and the CSV schemas for traces, ensemble stats, Welch tests, and
//! run-time ratios.
//!
//! NMAT v1: line 1 is `<rows> <cols>`, followed by `rows` lines of `cols`
//! space-separated decimal floats. Values are written with Rust's
//! shortest-round-trip float formatting, so read(write(x)) == x exactly.
//!
//! Dictionary file: header `<K> <I> <M>`, then M bodies of K lines with I
//! floats each, in lag order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use betacnmf_core::cnmf::ConvDictionary;
use betacnmf_core::nnmat::NonnegMatrix;
use betacnmf_core::Method;

use crate::bench::{LossTrace, RuntimeRow, StatsRow, WelchRow};
use crate::config::{AppError, Result};

fn parse_err(path: &Path, msg: impl std::fmt::Display) -> AppError {
    AppError::Parse(format!("{}: {msg}", path.display()))
}

fn write_matrix_body(out: &mut String, m: &NonnegMatrix) {
    for r in 0..m.rows() {
        for (c, x) in m.row(r).iter().enumerate() {
            if c > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{x}");
        }
        out.push('\n');
    }
}

pub fn nmat_to_string(m: &NonnegMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    write_matrix_body(&mut out, m);
    out
}

pub fn write_nmat(path: &Path, m: &NonnegMatrix) -> Result<()> {
    fs::write(path, nmat_to_string(m)).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))
}

fn parse_row(path: &Path, line: &str, cols: usize, lineno: usize) -> Result<Vec<f64>> {
    let row: Vec<f64> = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| parse_err(path, format!("line {lineno}: bad float '{tok}'")))
        })
        .collect::<Result<_>>()?;
    if row.len() != cols {
        return Err(parse_err(
            path,
            format!("line {lineno}: expected {cols} values, got {}", row.len()),
        ));
    }
    Ok(row)
}

pub fn nmat_from_str(path: &Path, text: &str) -> Result<NonnegMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, "empty file"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(path, format!("bad dimension '{t}'")))
        })
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(parse_err(path, "header must be '<rows> <cols>'"));
    };
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| parse_err(path, "unexpected end of file"))?;
        data.extend(parse_row(path, line, cols, lineno + 1)?);
    }
    NonnegMatrix::from_vec(rows, cols, data).map_err(|e| parse_err(path, e))
}

pub fn read_nmat(path: &Path) -> Result<NonnegMatrix> {
    let text =
        fs::read_to_string(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    nmat_from_str(path, &text)
}

pub fn dictionary_to_string(w: &ConvDictionary) -> String {
    let mut out = format!("{} {} {}\n", w.rows(), w.cols(), w.num_lags());
    for slice in w.slices() {
        write_matrix_body(&mut out, slice);
    }
    out
}

pub fn write_dictionary(path: &Path, w: &ConvDictionary) -> Result<()> {
    fs::write(path, dictionary_to_string(w))
        .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))
}

pub fn read_dictionary(path: &Path) -> Result<ConvDictionary> {
    let text =
        fs::read_to_string(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, "empty file"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(path, format!("bad dimension '{t}'")))
        })
        .collect::<Result<_>>()?;
    let [k, rank, lags] = dims[..] else {
        return Err(parse_err(path, "header must be '<K> <I> <M>'"));
    };
    let mut slices = Vec::with_capacity(lags);
    for _ in 0..lags {
        let mut data = Vec::with_capacity(k * rank);
        for _ in 0..k {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| parse_err(path, "unexpected end of file"))?;
            data.extend(parse_row(path, line, rank, lineno + 1)?);
        }
        slices.push(NonnegMatrix::from_vec(k, rank, data).map_err(|e| parse_err(path, e))?);
    }
    ConvDictionary::new(slices).map_err(|e| parse_err(path, e))
}

// --- CSV schemas ---

pub fn trace_csv(traces: &[LossTrace]) -> String {
    let mut out = String::from("run_id,method,beta,iteration,loss,elapsed_ns\n");
    for trace in traces {
        for rec in &trace.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                trace.run_id, trace.method, trace.beta, rec.iteration, rec.loss, rec.elapsed_ns
            );
        }
    }
    out
}

pub fn stats_csv(rows: &[StatsRow]) -> String {
    let mut out = String::from("method,beta,iteration,mean_loss,std_loss,n\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.method, r.beta, r.iteration, r.mean_loss, r.std_loss, r.n
        );
    }
    out
}

pub fn welch_csv(rows: &[WelchRow]) -> String {
    let mut out = String::from("iteration,method_a,method_b,t,df,p\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iteration,
            r.method_a,
            r.method_b,
            r.result.t_statistic,
            r.result.degrees_of_freedom,
            r.result.p_value
        );
    }
    out
}

pub fn runtime_csv(rows: &[RuntimeRow]) -> String {
    let mut out = String::from("method,beta,mean_ns,ratio_to_proposed\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.method, r.beta, r.mean_ns, r.ratio_to_proposed
        );
    }
    out
}

/// Losses parsed back out of a trace CSV: (run_id, method, iteration, loss).
pub fn read_trace_losses(path: &Path) -> Result<Vec<(usize, Method, u32, f64)>> {
    let text =
        fs::read_to_string(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(parse_err(path, format!("line {}: expected 6 fields", lineno + 1)));
        }
        let run_id = fields[0]
            .parse()
            .map_err(|_| parse_err(path, format!("line {}: bad run_id", lineno + 1)))?;
        let method = fields[1]
            .parse::<Method>()
            .map_err(|e| parse_err(path, format!("line {}: {e}", lineno + 1)))?;
        let iteration = fields[3]
            .parse()
            .map_err(|_| parse_err(path, format!("line {}: bad iteration", lineno + 1)))?;
        let loss = fields[4]
            .parse()
            .map_err(|_| parse_err(path, format!("line {}: bad loss", lineno + 1)))?;
        rows.push((run_id, method, iteration, loss));
    }
    Ok(rows)
}

/// File-name fragment for a beta value: "0", "1", "0.5", ...
pub fn beta_label(beta: f64) -> String {
    beta.to_string()
}
