//! wasm-bindgen surface for the browser demo: simulate a search curve,
//! report the closed-form analysis, and inspect the reduced quotient.
//! Everything returns flat JSON strings so the page needs no glue types.

use std::sync::Arc;

use wasm_bindgen::prelude::*;

use kronwalk::analysis::{
    critical_gamma, gamma_taylor_gap, perturbation_report, practical_gamma, predicted_runtime,
    srg_closed_form,
};
use kronwalk::reduce::{equitable_partition, reduce_hamiltonian};
use kronwalk::walk::probability_series;
use kronwalk::{Graph, SearchProblem, Space};

/// Keeps browser runs interactive: full space only up to 4096 vertices is
/// enforced by `Space::Auto`; the quotient keeps everything else tiny.
const MAX_ORDER: u32 = 8;
const MAX_SAMPLES: usize = 4096;

fn default_gamma(m: u64, j: u32) -> Result<f64, String> {
    let choice = if j >= 3 { practical_gamma(m, j) } else { critical_gamma(m, j) };
    choice.map(|c| c.value).map_err(|e| e.to_string())
}

fn checked_dims(m: u64, j: u32) -> Result<u64, String> {
    if j == 0 || j > MAX_ORDER {
        return Err(format!("order j must be in [1, {MAX_ORDER}]"));
    }
    let mut n: u64 = 1;
    for _ in 0..j {
        n = n.checked_mul(m).ok_or("M^j overflows a 64-bit index")?;
    }
    Ok(n)
}

fn join_floats(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.8e}")).collect::<Vec<_>>().join(", ")
}

/// Success-probability curve from the uniform state at the (default:
/// critical/practical) jumping rate, with the refined first peak.
#[wasm_bindgen]
pub fn simulate_curve(m: u32, j: u32, samples: u32, gamma: Option<f64>) -> Result<String, String> {
    let m = m as u64;
    let n = checked_dims(m, j)?;
    let samples = (samples as usize).clamp(2, MAX_SAMPLES);
    let gamma = match gamma {
        Some(g) => g,
        None => default_gamma(m, j)?,
    };
    let predicted = predicted_runtime(n).map_err(|e| e.to_string())?;
    let graph = Graph::complete(m).and_then(|g| g.kron_power(j)).map_err(|e| e.to_string())?;
    let problem = SearchProblem::new(Arc::new(graph), 0, gamma).map_err(|e| e.to_string())?;
    let result = probability_series(&problem, 1.5 * predicted, samples, Space::Auto)
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "{{\"N\": {n}, \"gamma\": {gamma:.8e}, \"predicted_time\": {predicted:.8e}, \
         \"peak_time\": {:.8e}, \"peak_probability\": {:.8e}, \
         \"times\": [{}], \"probabilities\": [{}]}}",
        result.peak_time,
        result.peak_probability,
        join_floats(&result.times),
        join_floats(&result.probabilities),
    ))
}

/// Closed-form report: rates, predicted runtime, and the order-specific
/// extras (strong regularity for j = 2, perturbation data for j = 3).
#[wasm_bindgen]
pub fn analyze_report(m: u32, j: u32) -> Result<String, String> {
    let m = m as u64;
    let n = checked_dims(m, j)?;
    let mut fields = vec![
        format!("\"N\": {n}"),
        format!("\"predicted_time\": {:.8e}", predicted_runtime(n).map_err(|e| e.to_string())?),
    ];
    match critical_gamma(m, j) {
        Ok(c) => {
            fields.push(format!("\"gamma\": {:.8e}", c.value));
            fields.push(format!("\"gamma_formula\": \"{}\"", c.formula.id()));
        }
        Err(e) => {
            let fallback = practical_gamma(m, j).map_err(|e| e.to_string())?;
            fields.push(format!("\"gamma\": {:.8e}", fallback.value));
            fields.push(format!("\"gamma_formula\": \"{}\"", fallback.formula.id()));
            fields.push(format!("\"gamma_note\": \"{e}\""));
        }
    }
    if j == 2 {
        if let Ok(p) = srg_closed_form(m) {
            fields.push(format!(
                "\"srg\": {{\"N\": {}, \"k\": {}, \"lambda\": {}, \"mu\": {}}}",
                p.n, p.k, p.lambda, p.mu
            ));
        }
    }
    if j == 3 {
        if let Ok(r) = perturbation_report(m) {
            fields.push(format!(
                "\"perturbation\": {{\"E0\": {:.8e}, \"E1\": {:.8e}, \"gap\": {:.8e}, \
                 \"runtime_estimate\": {:.8e}}}",
                r.e0, r.e1, r.gap, r.runtime_estimate
            ));
        }
        if let Ok(t) = gamma_taylor_gap(m) {
            fields.push(format!("\"taylor_scaled\": {:.8e}", t.scaled));
        }
    }
    Ok(format!("{{{}}}", fields.join(", ")))
}

/// Cell sizes and quotient Hamiltonian of the equitable partition around
/// vertex 0.
#[wasm_bindgen]
pub fn reduction_info(m: u32, j: u32, gamma: Option<f64>) -> Result<String, String> {
    let m = m as u64;
    checked_dims(m, j)?;
    let gamma = match gamma {
        Some(g) => g,
        None => default_gamma(m, j)?,
    };
    let graph = Graph::complete(m).and_then(|g| g.kron_power(j)).map_err(|e| e.to_string())?;
    let partition = equitable_partition(&graph, 0).map_err(|e| e.to_string())?;
    let reduced = reduce_hamiltonian(&graph, &partition, gamma, 0).map_err(|e| e.to_string())?;
    let sizes: Vec<String> = partition.cell_sizes().iter().map(|s| s.to_string()).collect();
    let rows: Vec<String> = reduced
        .matrix
        .row_iter()
        .map(|row| format!("[{}]", join_floats(&row.iter().copied().collect::<Vec<_>>())))
        .collect();
    Ok(format!(
        "{{\"cells\": {}, \"sizes\": [{}], \"gamma\": {gamma:.8e}, \"matrix\": [{}]}}",
        partition.num_cells(),
        sizes.join(", "),
        rows.join(", "),
    ))
}
