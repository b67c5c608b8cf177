//! Search Hamiltonian assembly and Schrödinger evolution, in the full
//! vertex space or on a reduced quotient, with success-probability series
//! and first-peak location.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::reduce::{self, Partition};
use crate::state::{Basis, StateVector, NORM_TOLERANCE};

/// Hamiltonians up to this dimension are diagonalized densely; larger ones
/// are propagated by a truncated Chebyshev expansion of exp(−iHt) applied
/// through the sparse adjacency.
const DENSE_PROPAGATOR_LIMIT: usize = 2048;
/// Full-space evolution is refused above this vertex count.
const MAX_FULL_SPACE: u64 = 1 << 22;
/// Coarse peak scan resolution.
const PEAK_SCAN_SAMPLES: usize = 512;
/// Relative time tolerance of the golden-section peak refinement.
const PEAK_TIME_RTOL: f64 = 1e-4;

/// A graph, a marked vertex `w`, and a jumping rate γ;
/// defines `H = −γA − |w⟩⟨w|`.
#[derive(Debug, Clone)]
pub struct SearchProblem {
    pub graph: Arc<Graph>,
    pub marked: Vertex,
    pub gamma: f64,
}

impl SearchProblem {
    pub fn new(graph: Arc<Graph>, marked: Vertex, gamma: f64) -> Result<SearchProblem> {
        if marked >= graph.num_vertices() {
            return Err(Error::invalid(format!(
                "marked vertex {marked} out of range (N = {})",
                graph.num_vertices()
            )));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid(format!("jumping rate must be positive, got {gamma}")));
        }
        Ok(SearchProblem { graph, marked, gamma })
    }
}

/// Which space to evolve in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Full,
    Reduced,
    /// Reduced whenever the graph exceeds the dense full-space budget.
    Auto,
}

impl Space {
    fn resolve(self, n: u64) -> Space {
        match self {
            Space::Auto => {
                if n > 4096 {
                    Space::Reduced
                } else {
                    Space::Full
                }
            }
            other => other,
        }
    }
}

/// The uniform superposition over all vertices.
pub fn uniform_state(problem: &SearchProblem) -> Result<StateVector> {
    let n = problem.graph.num_vertices();
    if n > MAX_FULL_SPACE {
        return Err(Error::capacity(format!(
            "full-space state over {n} vertices; use the reduced quotient"
        )));
    }
    let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    Ok(StateVector::from_parts_unchecked(
        DVector::from_element(n as usize, amp),
        Basis::Full { n },
    ))
}

/// Returns `exp(−iHt)·psi0`. The propagator is picked by dimension; norm
/// is checked to stay within 1e−9 of 1.
pub fn evolve(problem: &SearchProblem, psi0: &StateVector, t: f64) -> Result<StateVector> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("evolution time must be nonnegative, got {t}")));
    }
    let engine = Engine::for_state(problem, psi0.basis())?;
    let state = engine.state_at(psi0, t)?;
    let norm = state.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NumericalFailure(format!(
            "evolution lost unitarity: norm {norm} at t = {t}"
        )));
    }
    Ok(state)
}

/// ⟨ψ|H|ψ⟩ for the Hamiltonian defined by the problem in ψ's basis.
pub fn energy(problem: &SearchProblem, psi: &StateVector) -> Result<f64> {
    let engine = Engine::for_state(problem, psi.basis())?;
    let mut hpsi = DVector::from_element(psi.amplitudes().len(), Complex64::new(0.0, 0.0));
    engine.op.apply(psi.amplitudes(), &mut hpsi);
    Ok(psi.amplitudes().dotc(&hpsi).re)
}

/// Success-probability time series with a refined first peak.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub times: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub peak_time: f64,
    pub peak_probability: f64,
    /// Set when no interior first maximum was found and the reported peak
    /// sits on the sampling boundary.
    pub peak_on_boundary: bool,
    pub gamma: f64,
    pub n: u64,
}

impl SimulationResult {
    /// CSV rows `t,probability` with 13 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,probability")?;
        for (t, p) in self.times.iter().zip(&self.probabilities) {
            writeln!(w, "{t:.12e},{p:.12e}")?;
        }
        Ok(())
    }

    /// JSON summary with the run parameters and peak estimates.
    pub fn json_summary(&self, m: u64, j: u32, predicted_time: f64) -> String {
        format!(
            "{{\"M\": {m}, \"j\": {j}, \"N\": {}, \"gamma\": {:.12e}, \
             \"peak_time\": {:.12e}, \"peak_probability\": {:.12e}, \
             \"predicted_time\": {predicted_time:.12e}}}",
            self.n, self.gamma, self.peak_time, self.peak_probability
        )
    }
}

/// Success probability on a uniform grid over `[0, t_max]`, starting from
/// the uniform superposition, with the first interior maximum refined.
pub fn probability_series(
    problem: &SearchProblem,
    t_max: f64,
    samples: usize,
    space: Space,
) -> Result<SimulationResult> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::invalid(format!("t_max must be positive, got {t_max}")));
    }
    if samples < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {samples}")));
    }
    let (engine, psi0) = prepare(problem, space)?;
    let scan = engine.scan(&psi0, t_max, samples)?;
    let peak = engine.refine_peak(&scan)?;
    Ok(SimulationResult {
        times: scan.times,
        probabilities: scan.probabilities,
        peak_time: peak.time,
        peak_probability: peak.probability,
        peak_on_boundary: peak.on_boundary,
        gamma: problem.gamma,
        n: problem.graph.num_vertices(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct Peak {
    pub time: f64,
    pub probability: f64,
    pub on_boundary: bool,
}

/// Locates the first probability maximum: coarse scan over
/// `[0, 1.5·t_hint]` at 512 samples, then golden-section refinement.
pub fn find_peak(problem: &SearchProblem, t_hint: f64, space: Space) -> Result<Peak> {
    if !(t_hint.is_finite() && t_hint > 0.0) {
        return Err(Error::invalid(format!("t_hint must be positive, got {t_hint}")));
    }
    let (engine, psi0) = prepare(problem, space)?;
    let scan = engine.scan(&psi0, 1.5 * t_hint, PEAK_SCAN_SAMPLES)?;
    engine.refine_peak(&scan)
}

fn prepare(problem: &SearchProblem, space: Space) -> Result<(Engine, StateVector)> {
    match space.resolve(problem.graph.num_vertices()) {
        Space::Full => {
            let psi0 = uniform_state(problem)?;
            let engine = Engine::for_state(problem, psi0.basis())?;
            Ok((engine, psi0))
        }
        _ => {
            let partition = reduce::equitable_partition(&problem.graph, problem.marked)?;
            let psi0 = reduce::project_uniform(&partition);
            let engine = Engine::reduced(problem, &partition)?;
            Ok((engine, psi0))
        }
    }
}

// ---------------------------------------------------------------------------
// Hamiltonian application

enum HamiltonianOp {
    /// Applied as (−γ)(A·ψ) − ψ[w]·e_w; never materialized densely.
    Sparse { graph: Arc<Graph>, gamma: f64, marked: usize },
    Dense { matrix: DMatrix<f64> },
}

impl HamiltonianOp {
    fn apply(&self, x: &DVector<Complex64>, out: &mut DVector<Complex64>) {
        match self {
            HamiltonianOp::Sparse { graph, gamma, marked } => {
                for v in 0..x.len() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &u in graph.neighbors(v as Vertex).expect("materialized") {
                        acc += x[u as usize];
                    }
                    out[v] = acc * (-gamma);
                }
                out[*marked] -= x[*marked];
            }
            HamiltonianOp::Dense { matrix } => {
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..x.len() {
                        acc += matrix[(i, j)] * x[j];
                    }
                    *o = acc;
                }
            }
        }
    }

    /// Upper bound on the spectral radius of H.
    fn spectral_bound(&self) -> f64 {
        match self {
            HamiltonianOp::Sparse { graph, gamma, .. } => gamma * graph.max_degree() as f64 + 1.0,
            HamiltonianOp::Dense { matrix } => {
                let mut bound: f64 = 0.0;
                for i in 0..matrix.nrows() {
                    let row: f64 = (0..matrix.ncols()).map(|j| matrix[(i, j)].abs()).sum();
                    bound = bound.max(row);
                }
                bound
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Propagators

enum PropagatorKind {
    /// Dense Hermitian eigendecomposition; evolution exact to rounding.
    Exact { evals: DVector<f64>, evecs: DMatrix<f64> },
    /// Chebyshev expansion of exp(−iHt) on the scaled operator.
    Chebyshev { radius: f64 },
}

struct Engine {
    op: HamiltonianOp,
    kind: PropagatorKind,
    /// Index whose amplitude is the success amplitude.
    marked_index: usize,
    basis: Basis,
}

impl Engine {
    fn for_state(problem: &SearchProblem, basis: &Basis) -> Result<Engine> {
        match basis {
            Basis::Full { n } => {
                if *n != problem.graph.num_vertices() {
                    return Err(Error::invalid(format!(
                        "state lives on {n} vertices, graph has {}",
                        problem.graph.num_vertices()
                    )));
                }
                Engine::full(problem)
            }
            Basis::Reduced { cell_sizes } => {
                let partition = reduce::equitable_partition(&problem.graph, problem.marked)?;
                if cell_sizes != partition.cell_sizes() {
                    return Err(Error::invalid(
                        "reduced state does not match the problem's equitable partition"
                            .to_string(),
                    ));
                }
                Engine::reduced(problem, &partition)
            }
        }
    }

    fn full(problem: &SearchProblem) -> Result<Engine> {
        let n = problem.graph.num_vertices();
        if !problem.graph.is_materialized() {
            return Err(Error::capacity(format!(
                "full-space evolution needs materialized adjacency (N = {n}); \
                 use the reduced quotient"
            )));
        }
        let basis = Basis::Full { n };
        let marked_index = problem.marked as usize;
        if n as usize <= DENSE_PROPAGATOR_LIMIT {
            let mut h = DMatrix::zeros(n as usize, n as usize);
            for v in 0..n as usize {
                for &u in problem.graph.neighbors(v as Vertex)? {
                    h[(v, u as usize)] = -problem.gamma;
                }
            }
            h[(marked_index, marked_index)] -= 1.0;
            let op = HamiltonianOp::Dense { matrix: h.clone() };
            let eig = SymmetricEigen::new(h);
            return Ok(Engine {
                op,
                kind: PropagatorKind::Exact { evals: eig.eigenvalues, evecs: eig.eigenvectors },
                marked_index,
                basis,
            });
        }
        let op = HamiltonianOp::Sparse {
            graph: Arc::clone(&problem.graph),
            gamma: problem.gamma,
            marked: marked_index,
        };
        let radius = op.spectral_bound() * 1.001;
        Ok(Engine { op, kind: PropagatorKind::Chebyshev { radius }, marked_index, basis })
    }

    fn reduced(problem: &SearchProblem, partition: &Partition) -> Result<Engine> {
        let reduced =
            reduce::reduce_hamiltonian(&problem.graph, partition, problem.gamma, problem.marked)?;
        let basis = Basis::Reduced { cell_sizes: partition.cell_sizes().to_vec() };
        let h = reduced.matrix;
        let op = HamiltonianOp::Dense { matrix: h.clone() };
        let eig = SymmetricEigen::new(h);
        Ok(Engine {
            op,
            kind: PropagatorKind::Exact { evals: eig.eigenvalues, evecs: eig.eigenvectors },
            marked_index: 0,
            basis,
        })
    }

    fn state_at(&self, psi0: &StateVector, t: f64) -> Result<StateVector> {
        let amps = match &self.kind {
            PropagatorKind::Exact { evals, evecs } => {
                let mut coeffs = real_transpose_mul(evecs, psi0.amplitudes());
                for (c, &e) in coeffs.iter_mut().zip(evals.iter()) {
                    *c *= Complex64::from_polar(1.0, -e * t);
                }
                real_mul(evecs, &coeffs)
            }
            PropagatorKind::Chebyshev { radius } => {
                let mut amps = psi0.amplitudes().clone();
                chebyshev_step(&self.op, *radius, t, &mut amps)?;
                amps
            }
        };
        Ok(StateVector::from_parts_unchecked(amps, self.basis.clone()))
    }

    /// March the grid, recording the success probability at each time and a
    /// snapshot of the state one grid point before the first interior
    /// maximum (cheap restart point for refinement).
    fn scan(&self, psi0: &StateVector, t_max: f64, samples: usize) -> Result<Scan> {
        let dt = t_max / (samples - 1) as f64;
        let initial = psi0.amplitudes().clone();
        let mut times = Vec::with_capacity(samples);
        let mut probs = Vec::with_capacity(samples);
        let mut snapshot: Option<(usize, DVector<Complex64>)> = None;
        match &self.kind {
            PropagatorKind::Exact { .. } => {
                for i in 0..samples {
                    let t = dt * i as f64;
                    let state = self.state_at(psi0, t)?;
                    times.push(t);
                    probs.push(checked_probability(&state, self.marked_index, t)?);
                }
            }
            PropagatorKind::Chebyshev { radius } => {
                let mut cur = psi0.amplitudes().clone();
                let mut prev: Option<DVector<Complex64>> = None;
                let mut prev_prev: Option<DVector<Complex64>> = None;
                for i in 0..samples {
                    if i > 0 {
                        prev_prev = prev.take();
                        prev = Some(cur.clone());
                        chebyshev_step(&self.op, *radius, dt, &mut cur)?;
                        let norm = cur.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                        if (norm - 1.0).abs() > NORM_TOLERANCE {
                            return Err(Error::NumericalFailure(format!(
                                "propagation lost unitarity at step {i}: norm {norm}"
                            )));
                        }
                    }
                    let t = dt * i as f64;
                    times.push(t);
                    let raw = cur[self.marked_index].norm_sqr();
                    probs.push(clamp_probability(raw, t)?);
                    // First interior maximum becomes visible at step i + 1.
                    if snapshot.is_none() && i >= 2 {
                        let (a, b, c) = (probs[i - 2], probs[i - 1], probs[i]);
                        if b > a && b >= c {
                            let anchor = prev_prev.take().expect("two steps behind");
                            snapshot = Some((i - 2, anchor));
                        }
                    }
                }
            }
        }
        Ok(Scan { times, probabilities: probs, initial, snapshot })
    }

    /// Golden-section refinement around the first interior maximum of a
    /// scan; reports the better boundary with a flag when the curve is
    /// monotone over the scanned window.
    fn refine_peak(&self, scan: &Scan) -> Result<Peak> {
        let p = &scan.probabilities;
        let samples = p.len();
        let Some(i) = (1..samples - 1).find(|&i| p[i] > p[i - 1] && p[i] >= p[i + 1]) else {
            let (time, probability) = if p[samples - 1] > p[0] {
                (scan.times[samples - 1], p[samples - 1])
            } else {
                (scan.times[0], p[0])
            };
            return Ok(Peak { time, probability, on_boundary: true });
        };
        let lo = scan.times[i - 1];
        let hi = scan.times[i + 1];
        let tol = (PEAK_TIME_RTOL * 0.5 * (lo + hi)).max(f64::MIN_POSITIVE);
        let (time, probability) = match &self.kind {
            PropagatorKind::Exact { evals, evecs } => {
                // Success amplitude needs only the marked row of the
                // eigenvector matrix.
                let coeffs = real_transpose_mul(evecs, &scan.initial);
                let row = evecs.row(self.marked_index).transpose();
                let eval = |t: f64| -> Result<f64> {
                    let amp: Complex64 = coeffs
                        .iter()
                        .zip(evals.iter())
                        .zip(row.iter())
                        .map(|((c, &e), &v)| c * Complex64::from_polar(1.0, -e * t) * v)
                        .sum();
                    clamp_probability(amp.norm_sqr(), t)
                };
                golden_max(eval, lo, hi, tol)?
            }
            PropagatorKind::Chebyshev { radius } => {
                let (anchor_idx, anchor) = scan
                    .snapshot
                    .as_ref()
                    .expect("snapshot recorded for every interior maximum");
                debug_assert_eq!(*anchor_idx, i - 1);
                let t_ref = scan.times[*anchor_idx];
                let eval = |t: f64| -> Result<f64> {
                    let mut amps = anchor.clone();
                    chebyshev_step(&self.op, *radius, t - t_ref, &mut amps)?;
                    clamp_probability(amps[self.marked_index].norm_sqr(), t)
                };
                golden_max(eval, lo, hi, tol)?
            }
        };
        Ok(Peak { time, probability, on_boundary: false })
    }

}

struct Scan {
    times: Vec<f64>,
    probabilities: Vec<f64>,
    initial: DVector<Complex64>,
    /// Grid index and state one point before the first interior maximum
    /// (iterative propagation only).
    snapshot: Option<(usize, DVector<Complex64>)>,
}

fn checked_probability(state: &StateVector, index: usize, t: f64) -> Result<f64> {
    clamp_probability(state.amplitudes()[index].norm_sqr(), t)
}

fn clamp_probability(raw: f64, t: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&raw) {
        return Err(Error::NumericalFailure(format!(
            "probability {raw} out of bounds at t = {t}"
        )));
    }
    Ok(raw.clamp(0.0, 1.0))
}

fn real_transpose_mul(m: &DMatrix<f64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    DVector::from_iterator(
        m.ncols(),
        m.column_iter().map(|col| col.iter().zip(v.iter()).map(|(&a, &b)| a * b).sum()),
    )
}

fn real_mul(m: &DMatrix<f64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    let mut out = DVector::from_element(m.nrows(), Complex64::new(0.0, 0.0));
    for (j, col) in m.column_iter().enumerate() {
        let c = v[j];
        for (o, &a) in out.iter_mut().zip(col.iter()) {
            *o += a * c;
        }
    }
    out
}

fn golden_max(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

// ---------------------------------------------------------------------------
// Chebyshev propagation

/// In-place `psi ← exp(−iH·span)·psi` via the Chebyshev expansion on
/// H/radius: exp(−iz·cosθ) = Σ_k (2−δ_k0)(−i)^k J_k(z) cos(kθ).
fn chebyshev_step(
    op: &HamiltonianOp,
    radius: f64,
    span: f64,
    psi: &mut DVector<Complex64>,
) -> Result<()> {
    if span == 0.0 {
        return Ok(());
    }
    let z = radius * span;
    let coeffs = bessel_j_sequence(z)?;
    let scale = 1.0 / radius;

    let mut t_prev = psi.clone(); // T_0 ψ
    let mut t_cur = DVector::from_element(psi.len(), Complex64::new(0.0, 0.0));
    op.apply(&t_prev, &mut t_cur);
    for v in t_cur.iter_mut() {
        *v *= scale; // T_1 ψ
    }

    let mut acc = &t_prev * Complex64::new(coeffs[0], 0.0);
    let mut scratch = DVector::from_element(psi.len(), Complex64::new(0.0, 0.0));
    for (k, &jk) in coeffs.iter().enumerate().skip(1) {
        // (−i)^k cycles 1, −i, −1, i.
        let c = 2.0 * jk;
        let phase = match k % 4 {
            0 => Complex64::new(c, 0.0),
            1 => Complex64::new(0.0, -c),
            2 => Complex64::new(-c, 0.0),
            _ => Complex64::new(0.0, c),
        };
        acc.zip_apply(&t_cur, |a, t| *a += phase * t);
        if k + 1 < coeffs.len() {
            op.apply(&t_cur, &mut scratch);
            // T_{k+1} = 2·(H/r)·T_k − T_{k−1}
            for (next, &s) in t_prev.iter_mut().zip(scratch.iter()) {
                *next = 2.0 * scale * s - *next;
            }
            std::mem::swap(&mut t_prev, &mut t_cur);
        }
    }
    *psi = acc;
    Ok(())
}

/// `J_0(z), J_1(z), …` by Miller's downward recurrence, truncated where the
/// tail drops below 1e−17.
fn bessel_j_sequence(z: f64) -> Result<Vec<f64>> {
    const TAIL: f64 = 1e-17;
    if z < 0.0 || !z.is_finite() {
        return Err(Error::NumericalFailure(format!("bad Chebyshev argument {z}")));
    }
    if z == 0.0 {
        return Ok(vec![1.0]);
    }
    // Significant orders end near k ≈ z; the tail then decays
    // super-exponentially.
    let k_top = (z + 20.0 + 10.0 * z.cbrt()).ceil() as usize;
    let start = k_top + 14 + (k_top as f64).sqrt() as usize;
    if start > 2_000_000 {
        return Err(Error::NumericalFailure(format!(
            "Chebyshev span too large: {start} expansion terms required"
        )));
    }
    let mut out = vec![0.0f64; start + 1];
    let mut jp1 = 0.0f64;
    let mut jk = 1e-160f64;
    let mut norm = 0.0f64;
    for k in (0..=start).rev() {
        out[k] = jk;
        let jm1 = (2.0 * (k as f64) / z) * jk - jp1;
        jp1 = jk;
        jk = jm1;
        if k % 2 == 0 && k > 0 {
            norm += 2.0 * out[k];
        }
        if jk.abs() > 1e250 {
            let s = 1e-250;
            jk *= s;
            jp1 *= s;
            norm *= s;
            for v in out[k..=start].iter_mut() {
                *v *= s;
            }
        }
    }
    norm += out[0];
    for v in out.iter_mut() {
        *v /= norm;
    }
    // Drop the negligible tail beyond the last meaningful order.
    let mut keep = out.len();
    while keep > 1 && out[keep - 1].abs() < TAIL && out[keep - 2].abs() < TAIL {
        keep -= 1;
    }
    out.truncate(keep);
    Ok(out)
}
