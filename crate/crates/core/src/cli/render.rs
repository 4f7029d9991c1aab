use std::fmt::Write as _;

use crate::definability::{DefinabilityVerdict, EigenspaceResult, Refutation, ScanRow};
use crate::linalg::Scalar;

use super::{CliError, IndexOutcome, Payload, Report};

fn verdict_text(out: &mut String, v: &DefinabilityVerdict) {
    match v {
        DefinabilityVerdict::Definable { lambda, certificate } => {
            let _ = writeln!(out, "verdict: definable");
            let _ = writeln!(out, "lambda: {lambda}");
            let _ = writeln!(out, "certificate ({:?}, tolerance {}):", certificate.route, certificate.tolerance);
            for row in &certificate.ladder {
                let _ = writeln!(out, "  N = {:>5}  tail = {:e}", row.n, row.value);
            }
        }
        DefinabilityVerdict::NotDefinable { witness: Refutation::Weyl(w) } => {
            let _ = writeln!(out, "verdict: not definable");
            let _ = writeln!(
                out,
                "Weyl witness at N = {}, tolerance {}, rank budget {}:",
                w.truncation, w.tolerance, w.rank_budget
            );
            for p in &w.points {
                let _ = writeln!(
                    out,
                    "  mu = {}  side = {:?}  vectors = {}  max residual = {:e}",
                    p.mu,
                    p.side,
                    p.vectors.len(),
                    p.max_residual()
                );
            }
        }
        DefinabilityVerdict::NotDefinable { witness: Refutation::Index(w) } => {
            let _ = writeln!(out, "verdict: not definable");
            let _ = writeln!(
                out,
                "Fredholm index {} (kernel {}, cokernel {}) at N = {:?}",
                w.index, w.kernel_dim, w.cokernel_dim, w.truncation_sizes
            );
        }
        DefinabilityVerdict::Inconclusive { reason, diagnostics } => {
            let _ = writeln!(out, "verdict: inconclusive");
            let _ = writeln!(out, "reason: {reason}");
            if let Some(l) = diagnostics.lambda {
                let _ = writeln!(out, "lambda from probes: {l}");
            }
            if let Some(index) = &diagnostics.index {
                let _ = writeln!(out, "index: {index}");
            }
            let _ = writeln!(out, "candidates tried: {}", diagnostics.candidates.len());
        }
    }
}

fn scan_text(out: &mut String, rows: &[ScanRow]) {
    let _ = writeln!(out, "{:>24} {:>24} {:>24}", "mu_re", "mu_im", "defect");
    for r in rows {
        let _ = writeln!(out, "{:>24} {:>24} {:>24e}", r.mu.re(), r.mu.im(), r.defect);
    }
}

fn eigen_text(out: &mut String, e: &EigenspaceResult) {
    let _ = writeln!(out, "mu = {}: dimension {} at N = {}", e.mu, e.dimension, e.truncation);
    for (i, r) in e.residuals.iter().enumerate() {
        let c = e.containment.as_ref().map(|c| format!("  distance from parameters = {:e}", c[i])).unwrap_or_default();
        let _ = writeln!(out, "  u_{i}: residual = {r:e}{c}");
    }
}

pub(super) fn text(report: &Report) -> String {
    let mut out = String::new();
    match &report.result {
        Payload::Verdict(v) => verdict_text(&mut out, v),
        Payload::Spectrum(rows) => scan_text(&mut out, rows),
        Payload::Index(w) => {
            let _ = writeln!(out, "kernel dimension: {}", w.kernel_dim);
            let _ = writeln!(out, "cokernel dimension: {}", w.cokernel_dim);
            let _ = writeln!(out, "index: {}", w.index);
            let _ = writeln!(out, "threshold: {:e} at N = {:?}", w.threshold, w.truncation_sizes);
        }
        Payload::Eigen(es) => es.iter().for_each(|e| eigen_text(&mut out, e)),
        Payload::Predicate(p) => {
            let _ = writeln!(out, "sorts: B_{} -> B_{}", p.source_sort, p.target_sort);
            let _ = writeln!(out, "value:       {}", p.value);
            let _ = writeln!(out, "error bound: {}", p.error_bound);
            let _ = writeln!(out, "oracle:      {}", p.oracle);
            let _ = writeln!(out, "deviation:   {:e}", p.deviation);
        }
        Payload::Invariant(s) => {
            let _ = writeln!(out, "route: {:?}", s.route);
            let _ = writeln!(out, "lambda: {}", s.lambda);
            if let Some(mu) = s.mu {
                let _ = writeln!(out, "eigenvalue of compact part: {mu}");
            }
            let _ = writeln!(out, "dimension {} / codimension {} at N = {}", s.dimension, s.codimension, s.truncation);
            let _ = writeln!(out, "invariance residual: {:e}", s.residual);
            if let Some(r) = &s.reason {
                let _ = writeln!(out, "reason: {r}");
            }
        }
        Payload::Full(r) => {
            verdict_text(&mut out, &r.verdict);
            match &r.index {
                IndexOutcome::Witness(w) => {
                    let _ = writeln!(out, "index: {} (kernel {}, cokernel {})", w.index, w.kernel_dim, w.cokernel_dim);
                }
                IndexOutcome::Failure { error } => {
                    let _ = writeln!(out, "index: unavailable ({error})");
                }
            }
            let _ = writeln!(out, "parameters: {}  norm bound: {}", r.parameter_dimension, r.norm_bound);
            let _ = writeln!(out, "linearity residuals: {:e} / {:e}", r.linearity.max_additivity_residual, r.linearity.max_homogeneity_residual);
            scan_text(&mut out, &r.spectrum);
        }
    }
    let _ = writeln!(out, "wall time: {:.1} ms", report.wall_time_ms);
    out
}

fn pair(s: Scalar) -> [String; 2] {
    [s.re().to_string(), s.im().to_string()]
}

pub(super) fn csv(report: &Report) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut rows: Vec<Vec<String>> = Vec::new();
    match &report.result {
        Payload::Verdict(DefinabilityVerdict::Definable { lambda, certificate }) => {
            rows.push(vec!["verdict", "lambda_re", "lambda_im", "route", "n", "value"].into_iter().map(String::from).collect());
            let [re, im] = pair(*lambda);
            for r in &certificate.ladder {
                let route = format!("{:?}", certificate.route).to_lowercase();
                rows.push(vec!["definable".into(), re.clone(), im.clone(), route, r.n.to_string(), r.value.to_string()]);
            }
        }
        Payload::Verdict(DefinabilityVerdict::NotDefinable { witness: Refutation::Weyl(wt) }) => {
            rows.push(vec!["verdict", "mu_re", "mu_im", "side", "vectors", "max_residual"].into_iter().map(String::from).collect());
            for p in &wt.points {
                let [re, im] = pair(p.mu);
                let side = format!("{:?}", p.side).to_lowercase();
                rows.push(vec!["not_definable".into(), re, im, side, p.vectors.len().to_string(), p.max_residual().to_string()]);
            }
        }
        Payload::Verdict(DefinabilityVerdict::NotDefinable { witness: Refutation::Index(ix) }) => {
            rows.push(vec!["verdict", "kernel_dim", "cokernel_dim", "index", "threshold"].into_iter().map(String::from).collect());
            rows.push(vec![
                "not_definable".into(),
                ix.kernel_dim.to_string(),
                ix.cokernel_dim.to_string(),
                ix.index.to_string(),
                ix.threshold.to_string(),
            ]);
        }
        Payload::Verdict(DefinabilityVerdict::Inconclusive { reason, .. }) => {
            rows.push(vec!["verdict".into(), "reason".into()]);
            rows.push(vec!["inconclusive".into(), reason.clone()]);
        }
        Payload::Spectrum(scan) => {
            rows.push(vec!["mu_re".into(), "mu_im".into(), "defect".into()]);
            for r in scan {
                let [re, im] = pair(r.mu);
                rows.push(vec![re, im, r.defect.to_string()]);
            }
        }
        Payload::Index(ix) => {
            rows.push(vec!["kernel_dim", "cokernel_dim", "index", "threshold", "n", "n_doubled"].into_iter().map(String::from).collect());
            rows.push(vec![
                ix.kernel_dim.to_string(),
                ix.cokernel_dim.to_string(),
                ix.index.to_string(),
                ix.threshold.to_string(),
                ix.truncation_sizes[0].to_string(),
                ix.truncation_sizes[1].to_string(),
            ]);
        }
        Payload::Eigen(es) => {
            rows.push(vec!["mu_re", "mu_im", "dimension", "vector", "residual", "containment"].into_iter().map(String::from).collect());
            for e in es {
                let [re, im] = pair(e.mu);
                if e.dimension == 0 {
                    rows.push(vec![re.clone(), im.clone(), "0".into(), String::new(), String::new(), String::new()]);
                }
                for (i, r) in e.residuals.iter().enumerate() {
                    let c = e.containment.as_ref().map(|c| c[i].to_string()).unwrap_or_default();
                    rows.push(vec![re.clone(), im.clone(), e.dimension.to_string(), i.to_string(), r.to_string(), c]);
                }
            }
        }
        Payload::Predicate(p) => {
            rows.push(
                vec!["source_sort", "target_sort", "epsilon", "value", "error_bound", "oracle", "deviation"]
                    .into_iter()
                    .map(String::from)
                    .collect(),
            );
            rows.push(vec![
                p.source_sort.to_string(),
                p.target_sort.to_string(),
                p.epsilon.to_string(),
                p.value.to_string(),
                p.error_bound.to_string(),
                p.oracle.to_string(),
                p.deviation.to_string(),
            ]);
        }
        Payload::Invariant(s) => {
            rows.push(
                vec!["route", "lambda_re", "lambda_im", "mu_re", "mu_im", "dimension", "codimension", "residual", "truncation"]
                    .into_iter()
                    .map(String::from)
                    .collect(),
            );
            let [lre, lim] = pair(s.lambda);
            let [mre, mim] = s.mu.map(pair).unwrap_or_default();
            rows.push(vec![
                format!("{:?}", s.route).to_lowercase(),
                lre,
                lim,
                mre,
                mim,
                s.dimension.to_string(),
                s.codimension.to_string(),
                s.residual.to_string(),
                s.truncation.to_string(),
            ]);
        }
        Payload::Full(_) => return Err(CliError::Input("the report command supports text and json output".into())),
    }
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::Numerical(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Numerical(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Numerical(e.to_string()))
}
