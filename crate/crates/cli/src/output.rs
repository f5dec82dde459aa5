//! Text renderings (CSV and structured JSON) and atomic file output.
//!
//! Every float goes through the canonical 17-significant-digit formatter, so
//! identical results serialize to identical bytes. CSV uses `\n` newlines and
//! always carries a header row.

use std::io::Write;
use std::path::Path;

use xy_entropy::oracle::EdDiagonal;
use xy_entropy::{
    sig17, BoundaryPoint, CorrelationTable, DiagonalDistribution, EntropyCurve, ModelParams,
    ScalingFit, SweepResult,
};

/// `sig17` for CSV cells; non-finite values print as `NaN`.
fn cell(value: f64) -> String {
    sig17(value)
}

/// JSON number: non-finite values become `null`.
fn json_num(value: f64) -> String {
    if value.is_finite() {
        sig17(value)
    } else {
        "null".into()
    }
}

fn bitstring(index: usize, block_len: usize) -> String {
    (0..block_len)
        .map(|site| if index >> site & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn gtable_csv(table: &CorrelationTable<f64>) -> String {
    let mut out = String::from("l,g_l\n");
    for (l, g) in table.entries() {
        out.push_str(&format!("{l},{}\n", cell(g)));
    }
    out
}

pub fn gtable_json(table: &CorrelationTable<f64>) -> String {
    let entries: Vec<String> = table
        .entries()
        .map(|(l, g)| format!("{{\"l\":{l},\"g\":{}}}", json_num(g)))
        .collect();
    format!(
        "{{\"gamma\":{},\"lambda\":{},\"quad_tol\":{},\"l_max\":{},\"table\":[{}]}}\n",
        json_num(table.params().gamma),
        json_num(table.params().lambda),
        json_num(table.params().quad_tol),
        table.l_max(),
        entries.join(",")
    )
}

pub fn probs_csv(dist: &DiagonalDistribution<f64>) -> String {
    let mut out = String::from("bitstring,probability\n");
    for (index, &p) in dist.probabilities().iter().enumerate() {
        out.push_str(&format!("{},{}\n", bitstring(index, dist.block_len()), cell(p)));
    }
    out
}

pub fn probs_json(params: &ModelParams<f64>, dist: &DiagonalDistribution<f64>) -> String {
    let entries: Vec<String> = dist
        .probabilities()
        .iter()
        .enumerate()
        .map(|(index, &p)| {
            format!(
                "{{\"bitstring\":\"{}\",\"p\":{}}}",
                bitstring(index, dist.block_len()),
                json_num(p)
            )
        })
        .collect();
    format!(
        "{{\"gamma\":{},\"lambda\":{},\"block_len\":{},\"probabilities\":[{}]}}\n",
        json_num(params.gamma),
        json_num(params.lambda),
        dist.block_len(),
        entries.join(",")
    )
}

pub fn entropy_csv(curve: &EntropyCurve<f64>) -> String {
    let mut out = String::from("L,DE_bits,EE_bits,C_bits\n");
    for (i, &len) in curve.block_lens().iter().enumerate() {
        out.push_str(&format!(
            "{len},{},{},{}\n",
            cell(curve.diagonal()[i]),
            cell(curve.entanglement()[i]),
            cell(curve.coherence_values()[i]),
        ));
    }
    out
}

pub fn entropy_json(curve: &EntropyCurve<f64>) -> String {
    let points: Vec<String> = curve
        .block_lens()
        .iter()
        .enumerate()
        .map(|(i, &len)| {
            format!(
                "{{\"L\":{len},\"de_bits\":{},\"ee_bits\":{},\"coherence_bits\":{}}}",
                json_num(curve.diagonal()[i]),
                json_num(curve.entanglement()[i]),
                json_num(curve.coherence_values()[i]),
            )
        })
        .collect();
    format!(
        "{{\"gamma\":{},\"lambda\":{},\"points\":[{}]}}\n",
        json_num(curve.params().gamma),
        json_num(curve.params().lambda),
        points.join(",")
    )
}

pub fn fit_csv(gamma: f64, lambda: f64, fit: &ScalingFit<f64>) -> String {
    format!(
        "gamma,lambda,a,b,c,rms,L_min,L_max\n{},{},{},{},{},{},{},{}\n",
        cell(gamma),
        cell(lambda),
        cell(fit.a),
        cell(fit.b),
        cell(fit.c),
        cell(fit.rms_residual),
        fit.fit_range.0,
        fit.fit_range.1,
    )
}

pub fn fit_json(gamma: f64, lambda: f64, fit: &ScalingFit<f64>) -> String {
    format!(
        "{{\"gamma\":{},\"lambda\":{},\"a\":{},\"b\":{},\"c\":{},\"rms_residual\":{},\
         \"l_min\":{},\"l_max\":{}}}\n",
        json_num(gamma),
        json_num(lambda),
        json_num(fit.a),
        json_num(fit.b),
        json_num(fit.c),
        json_num(fit.rms_residual),
        fit.fit_range.0,
        fit.fit_range.1,
    )
}

fn sweep_rows(out: &mut String, result: &SweepResult<f64>, prefix: Option<f64>) {
    for i in 0..result.len() {
        if let Some(gamma) = prefix {
            out.push_str(&cell(gamma));
            out.push(',');
        }
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            cell(result.lambda[i]),
            cell(result.a[i]),
            cell(result.b[i]),
            cell(result.c[i]),
            cell(result.da[i]),
            cell(result.db[i]),
            cell(result.dc[i]),
            cell(result.rms[i]),
        ));
    }
}

pub fn sweep_csv(result: &SweepResult<f64>) -> String {
    let mut out = String::from("lambda,a,b,c,da,db,dc,rms\n");
    sweep_rows(&mut out, result, None);
    out
}

pub fn grid_csv(results: &[SweepResult<f64>]) -> String {
    let mut out = String::from("gamma,lambda,a,b,c,da,db,dc,rms\n");
    for result in results {
        sweep_rows(&mut out, result, Some(result.gamma));
    }
    out
}

fn sweep_json_object(result: &SweepResult<f64>) -> String {
    let points: Vec<String> = (0..result.len())
        .map(|i| {
            format!(
                "{{\"lambda\":{},\"a\":{},\"b\":{},\"c\":{},\"da\":{},\"db\":{},\
                 \"dc\":{},\"rms\":{}}}",
                json_num(result.lambda[i]),
                json_num(result.a[i]),
                json_num(result.b[i]),
                json_num(result.c[i]),
                json_num(result.da[i]),
                json_num(result.db[i]),
                json_num(result.dc[i]),
                json_num(result.rms[i]),
            )
        })
        .collect();
    format!(
        "{{\"gamma\":{},\"failures\":{},\"points\":[{}]}}",
        json_num(result.gamma),
        result.failures.len(),
        points.join(",")
    )
}

pub fn sweep_json(result: &SweepResult<f64>) -> String {
    let mut out = sweep_json_object(result);
    out.push('\n');
    out
}

pub fn grid_json(results: &[SweepResult<f64>]) -> String {
    let sweeps: Vec<String> = results.iter().map(sweep_json_object).collect();
    format!("{{\"sweeps\":[{}]}}\n", sweeps.join(","))
}

pub fn boundary_csv(points: &[BoundaryPoint<f64>]) -> String {
    let mut out = String::from("gamma,lambda_star,residual_c\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            cell(p.gamma),
            cell(p.lambda_star),
            cell(p.residual_c)
        ));
    }
    out
}

pub fn boundary_json(points: &[BoundaryPoint<f64>]) -> String {
    let entries: Vec<String> = points
        .iter()
        .map(|p| {
            format!(
                "{{\"gamma\":{},\"lambda_star\":{},\"residual_c\":{},\
                 \"bracket_lo\":{},\"bracket_hi\":{}}}",
                json_num(p.gamma),
                json_num(p.lambda_star),
                json_num(p.residual_c),
                json_num(p.bracket.0),
                json_num(p.bracket.1),
            )
        })
        .collect();
    format!("{{\"points\":[{}]}}\n", entries.join(","))
}

pub fn oracle_kernel_csv(l: i64, value: f64) -> String {
    format!("l,g_l_dense\n{l},{}\n", cell(value))
}

pub fn oracle_ed_csv(ed: &EdDiagonal<f64>, block_len: usize) -> String {
    let mut out = String::from("bitstring,probability\n");
    for (index, &p) in ed.probs.iter().enumerate() {
        out.push_str(&format!("{},{}\n", bitstring(index, block_len), cell(p)));
    }
    out
}

/// Writes to stdout, or atomically to a file: the content lands in
/// `<name>.tmp` next to the target and is renamed into place, so an
/// interrupted run never leaves a truncated file at the destination.
pub fn write_atomic(path: Option<&Path>, content: &str) -> std::io::Result<()> {
    match path {
        None => std::io::stdout().write_all(content.as_bytes()),
        Some(target) => {
            let mut tmp_name = target
                .file_name()
                .map(|n| n.to_os_string())
                .unwrap_or_else(|| "output".into());
            tmp_name.push(".tmp");
            let tmp = target.with_file_name(tmp_name);
            std::fs::write(&tmp, content)?;
            match std::fs::rename(&tmp, target) {
                Ok(()) => Ok(()),
                Err(err) => {
                    let _ = std::fs::remove_file(&tmp);
                    Err(err)
                }
            }
        }
    }
}
