//! Symmetry reduction: coarsest equitable partition around the marked
//! vertex, the quotient Hamiltonian on cell-uniform superpositions, and the
//! closed-form vertex census for third-order powers.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::state::{Basis, StateVector};

/// Ordered cells of vertices that evolve identically. The marked vertex is
/// alone in cell 0; remaining cells are ordered by minimum vertex index.
#[derive(Debug, Clone)]
pub struct Partition {
    storage: CellStorage,
    sizes: Vec<u64>,
    /// counts[a][b]: neighbors every vertex of cell a has in cell b.
    counts: Vec<Vec<u64>>,
    marked: Vertex,
}

#[derive(Debug, Clone)]
enum CellStorage {
    Explicit(Vec<Vec<Vertex>>),
    /// Agreement-count classes of `K_m^{⊗j}` relative to the marked vertex;
    /// `class_by_cell[c]` is the number of coordinates agreeing with it.
    Implicit { m: u64, j: u32, class_by_cell: Vec<u32> },
}

impl Partition {
    pub fn num_cells(&self) -> usize {
        self.sizes.len()
    }

    pub fn cell_sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn marked(&self) -> Vertex {
        self.marked
    }

    pub fn num_vertices(&self) -> u64 {
        self.sizes.iter().sum()
    }

    /// Uniform per-vertex neighbor counts between cells.
    pub fn neighbor_counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn cell_of(&self, v: Vertex) -> Result<usize> {
        if v >= self.num_vertices() {
            return Err(Error::invalid(format!("vertex {v} out of range")));
        }
        match &self.storage {
            CellStorage::Explicit(cells) => Ok(cells
                .iter()
                .position(|c| c.binary_search(&v).is_ok())
                .expect("cells cover all vertices")),
            CellStorage::Implicit { m, j, class_by_cell } => {
                let a = agreement_count(v, self.marked, *m, *j);
                Ok(class_by_cell.iter().position(|&c| c == a).expect("class exists"))
            }
        }
    }

    /// Explicit vertex membership. Materializes implicit partitions, which
    /// is refused beyond a size cap.
    pub fn cells(&self) -> Result<Vec<Vec<Vertex>>> {
        match &self.storage {
            CellStorage::Explicit(cells) => Ok(cells.clone()),
            CellStorage::Implicit { m, j, class_by_cell } => {
                let n = self.num_vertices();
                if n > (1 << 22) {
                    return Err(Error::capacity(format!(
                        "refusing to materialize cells for {n} vertices"
                    )));
                }
                let mut cells: Vec<Vec<Vertex>> = vec![Vec::new(); self.sizes.len()];
                let index_of: BTreeMap<u32, usize> =
                    class_by_cell.iter().enumerate().map(|(i, &c)| (c, i)).collect();
                for v in 0..n {
                    let a = agreement_count(v, self.marked, *m, *j);
                    cells[index_of[&a]].push(v);
                }
                Ok(cells)
            }
        }
    }

    /// Checks the stored per-cell counts against the graph, vertex by vertex.
    pub fn verify_equitable(&self, graph: &Graph) -> Result<()> {
        if graph.num_vertices() != self.num_vertices() {
            return Err(Error::invalid("partition does not cover this graph".to_string()));
        }
        if !graph.is_materialized() {
            // Implicit partitions are exercised against materialized twins in tests.
            return Ok(());
        }
        let cells = self.cells()?;
        let mut cell_of = vec![0usize; graph.num_vertices() as usize];
        for (i, cell) in cells.iter().enumerate() {
            for &v in cell {
                cell_of[v as usize] = i;
            }
        }
        let k = self.num_cells();
        for v in 0..graph.num_vertices() {
            let mut counts = vec![0u64; k];
            for &u in graph.neighbors(v)? {
                counts[cell_of[u as usize]] += 1;
            }
            if counts != self.counts[cell_of[v as usize]] {
                return Err(Error::NotEquitable(format!(
                    "vertex {v} has neighbor counts {counts:?}, cell expects {:?}",
                    self.counts[cell_of[v as usize]]
                )));
            }
        }
        Ok(())
    }

    /// JSON export: `{"cells": [[v, ...], ...], "sizes": [...]}`.
    pub fn to_json(&self) -> Result<String> {
        let cells = self.cells()?;
        let mut out = String::from("{\"cells\": [");
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push('[');
            for (k, v) in cell.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                out.push_str(&v.to_string());
            }
            out.push(']');
        }
        out.push_str("], \"sizes\": [");
        for (i, s) in self.sizes.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&s.to_string());
        }
        out.push_str("]}");
        Ok(out)
    }
}

fn agreement_count(u: Vertex, w: Vertex, m: u64, j: u32) -> u32 {
    let (mut uu, mut ww, mut agree) = (u, w, 0);
    for _ in 0..j {
        if uu % m == ww % m {
            agree += 1;
        }
        uu /= m;
        ww /= m;
    }
    agree
}

/// Coarsest refinement of `{{w}, V∖{w}}` stable under neighbor-count
/// splitting. Materialized graphs are refined directly; implicit
/// complete-initiator powers use the coordinate agreement classes, which
/// the refinement reproduces at small sizes.
pub fn equitable_partition(graph: &Graph, marked: Vertex) -> Result<Partition> {
    if marked >= graph.num_vertices() {
        return Err(Error::invalid(format!("marked vertex {marked} out of range")));
    }
    if graph.is_materialized() {
        equitable_partition_refined(graph, marked)
    } else {
        let prov = graph.provenance().ok_or_else(|| {
            Error::capacity("implicit graph without Kronecker provenance".to_string())
        })?;
        Ok(agreement_partition(prov.initiator_size, prov.order, marked))
    }
}

fn equitable_partition_refined(graph: &Graph, marked: Vertex) -> Result<Partition> {
    let n = graph.num_vertices() as usize;
    let mut cell_of: Vec<u32> = vec![if n > 1 { 1 } else { 0 }; n];
    cell_of[marked as usize] = 0;
    let mut num_cells = if n > 1 { 2 } else { 1 };

    loop {
        let mut groups: BTreeMap<(u32, Vec<u32>), Vec<u32>> = BTreeMap::new();
        for v in 0..n {
            let mut sig = vec![0u32; num_cells];
            for &u in graph.neighbors(v as Vertex)? {
                sig[cell_of[u as usize] as usize] += 1;
            }
            groups.entry((cell_of[v], sig)).or_default().push(v as u32);
        }
        if groups.len() == num_cells {
            break;
        }
        num_cells = groups.len();
        for (id, (_, members)) in groups.into_iter().enumerate() {
            for v in members {
                cell_of[v as usize] = id as u32;
            }
        }
    }

    let mut cells: Vec<Vec<Vertex>> = vec![Vec::new(); num_cells];
    for v in 0..n {
        cells[cell_of[v] as usize].push(v as Vertex);
    }
    // Marked cell first, then ascending minimum vertex index.
    cells.sort_by_key(|c| (!c.contains(&marked), c[0]));

    let mut index = vec![0usize; n];
    for (i, cell) in cells.iter().enumerate() {
        for &v in cell {
            index[v as usize] = i;
        }
    }
    let mut counts = vec![vec![0u64; num_cells]; num_cells];
    for (i, cell) in cells.iter().enumerate() {
        let rep = cell[0];
        for &u in graph.neighbors(rep)? {
            counts[i][index[u as usize]] += 1;
        }
    }
    let sizes = cells.iter().map(|c| c.len() as u64).collect();
    let partition =
        Partition { storage: CellStorage::Explicit(cells), sizes, counts, marked };
    partition.verify_equitable(graph)?;
    Ok(partition)
}

/// Closed-form partition of `K_m^{⊗j}` by the number of coordinates agreeing
/// with the marked vertex: j agreements is the marked vertex itself, 0
/// agreements are its neighbors.
fn agreement_partition(m: u64, j: u32, marked: Vertex) -> Partition {
    if m == 1 {
        return Partition {
            storage: CellStorage::Explicit(vec![vec![marked]]),
            sizes: vec![1],
            counts: vec![vec![0]],
            marked,
        };
    }
    let mut classes: Vec<u32> = (0..j).collect();
    classes.sort_by_key(|&s| min_vertex_with_agreements(m, j, marked, s));
    let mut class_by_cell = vec![j];
    class_by_cell.extend(classes);

    let sizes: Vec<u64> = class_by_cell
        .iter()
        .map(|&s| binomial(j as u64, (j - s) as u64) * (m - 1).pow(j - s))
        .collect();
    let counts: Vec<Vec<u64>> = class_by_cell
        .iter()
        .map(|&s| {
            class_by_cell
                .iter()
                .map(|&t| {
                    if t > j - s {
                        0
                    } else {
                        binomial((j - s) as u64, t as u64)
                            * (m - 1).pow(s)
                            * (m - 2).pow(j - s - t)
                    }
                })
                .collect()
        })
        .collect();
    Partition { storage: CellStorage::Implicit { m, j, class_by_cell }, sizes, counts, marked }
}

/// Lexicographically smallest vertex index agreeing with `marked` in exactly
/// `s` of the `j` coordinate positions.
fn min_vertex_with_agreements(m: u64, j: u32, marked: Vertex, s: u32) -> Vertex {
    let mut digits = vec![0u64; j as usize];
    let mut rest = marked;
    for slot in digits.iter_mut().rev() {
        *slot = rest % m;
        rest /= m;
    }
    let mut quota = s;
    let mut index = 0u64;
    for (i, &wd) in digits.iter().enumerate() {
        let remaining = (j as usize - i - 1) as u32;
        let other = if wd == 0 { 1 } else { 0 };
        // Smallest digit whose choice leaves the agreement quota feasible.
        let digit = if other < wd {
            if quota <= remaining {
                other
            } else {
                quota -= 1;
                wd
            }
        } else if quota > 0 {
            quota -= 1;
            wd
        } else {
            other
        };
        index = index * m + digit;
    }
    index
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Small dense real symmetric quotient of `H = −γA − |w⟩⟨w|` acting on
/// cell-uniform superpositions.
#[derive(Debug, Clone)]
pub struct ReducedHamiltonian {
    pub matrix: DMatrix<f64>,
    pub gamma: f64,
    pub cell_sizes: Vec<u64>,
}

/// Quotient of the adjacency matrix alone:
/// entry (a, b) = d_ab · √(|C_a| / |C_b|), symmetric by equitability.
pub fn reduce_adjacency(partition: &Partition) -> DMatrix<f64> {
    let k = partition.num_cells();
    let sizes = partition.cell_sizes();
    let counts = partition.neighbor_counts();
    let mut b = DMatrix::zeros(k, k);
    for a in 0..k {
        for c in 0..k {
            b[(a, c)] = counts[a][c] as f64 * (sizes[a] as f64 / sizes[c] as f64).sqrt();
        }
    }
    // Kill rounding asymmetry from the two square-root routes.
    for a in 0..k {
        for c in (a + 1)..k {
            let avg = 0.5 * (b[(a, c)] + b[(c, a)]);
            b[(a, c)] = avg;
            b[(c, a)] = avg;
        }
    }
    b
}

pub fn reduce_hamiltonian(
    graph: &Graph,
    partition: &Partition,
    gamma: f64,
    marked: Vertex,
) -> Result<ReducedHamiltonian> {
    if partition.marked() != marked || partition.cell_sizes().first() != Some(&1) {
        return Err(Error::NotEquitable(format!(
            "partition must isolate marked vertex {marked} in cell 0"
        )));
    }
    partition.verify_equitable(graph)?;
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::invalid(format!("jumping rate must be positive, got {gamma}")));
    }
    let mut matrix = reduce_adjacency(partition) * (-gamma);
    matrix[(0, 0)] -= 1.0;
    Ok(ReducedHamiltonian { matrix, gamma, cell_sizes: partition.cell_sizes().to_vec() })
}

/// The uniform superposition over all vertices, expressed on the cells:
/// coefficient √(|C| / N) per cell.
pub fn project_uniform(partition: &Partition) -> StateVector {
    let n = partition.num_vertices() as f64;
    let amps = DVector::from_iterator(
        partition.num_cells(),
        partition.cell_sizes().iter().map(|&s| Complex64::new((s as f64 / n).sqrt(), 0.0)),
    );
    StateVector::from_parts_unchecked(
        amps,
        Basis::Reduced { cell_sizes: partition.cell_sizes().to_vec() },
    )
}

/// Embeds a reduced state back into the full space: each vertex of cell C
/// gets coefficient(C)/√|C|. Inverse of the cell-uniform projection.
pub fn lift(partition: &Partition, reduced: &StateVector) -> Result<StateVector> {
    let Basis::Reduced { cell_sizes } = reduced.basis() else {
        return Err(Error::invalid("lift expects a reduced-basis state"));
    };
    if cell_sizes != partition.cell_sizes() {
        return Err(Error::invalid("reduced state does not match this partition"));
    }
    let n = partition.num_vertices();
    let cells = partition.cells()?;
    let mut amps = DVector::from_element(n as usize, Complex64::new(0.0, 0.0));
    for (i, cell) in cells.iter().enumerate() {
        let coeff = reduced.amplitudes()[i] / (cell.len() as f64).sqrt();
        for &v in cell {
            amps[v as usize] = coeff;
        }
    }
    Ok(StateVector::from_parts_unchecked(amps, Basis::Full { n }))
}

/// One row of the third-order vertex census: a class of vertices sharing a
/// coordinate agreement pattern with the marked vertex, its population, and
/// the common-neighbor count each member shares with the marked vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub class: &'static str,
    /// Agreement pattern (set, subset, position): true = same as marked.
    pub pattern: [bool; 3],
    pub count: u64,
    pub mutual_neighbors: u64,
}

#[derive(Debug, Clone)]
pub struct Census {
    pub m: u64,
    pub rows: Vec<CensusRow>,
}

impl Census {
    /// All listed classes plus the marked vertex itself.
    pub fn total_vertices(&self) -> u64 {
        1 + self.rows.iter().map(|r| r.count).sum::<u64>()
    }

    /// CSV with columns `class,count,mutual_neighbors`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,count,mutual_neighbors\n");
        for row in &self.rows {
            out.push_str(&format!("{},{},{}\n", row.class, row.count, row.mutual_neighbors));
        }
        out
    }
}

/// Closed-form census of `K_M^{⊗3}` relative to the marked vertex: the six
/// nonadjacent classes followed by the adjacent class. Counts multiply
/// (M−1) per differing level; mutual neighbors multiply (M−1) per agreeing
/// level and (M−2) per differing one.
pub fn third_order_census(m: u64) -> Result<Census> {
    if m < 3 {
        return Err(Error::invalid(format!(
            "census classes degenerate below M = 3, got M = {m}"
        )));
    }
    let specs: [(&'static str, [bool; 3]); 7] = [
        ("same-set same-subset diff-position", [true, true, false]),
        ("same-set diff-subset same-position", [true, false, true]),
        ("same-set diff-subset diff-position", [true, false, false]),
        ("diff-set same-subset same-position", [false, true, true]),
        ("diff-set same-subset diff-position", [false, true, false]),
        ("diff-set diff-subset same-position", [false, false, true]),
        ("adjacent", [false, false, false]),
    ];
    let rows = specs
        .into_iter()
        .map(|(class, pattern)| {
            let mut count = 1;
            let mut mutual = 1;
            for same in pattern {
                count *= if same { 1 } else { m - 1 };
                mutual *= if same { m - 1 } else { m - 2 };
            }
            CensusRow { class, pattern, count, mutual_neighbors: mutual }
        })
        .collect();
    Ok(Census { m, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn complete_graph_two_cells() {
        for m in [2u64, 5, 9] {
            let g = Graph::complete(m).unwrap();
            let p = equitable_partition(&g, 0).unwrap();
            assert_eq!(p.cell_sizes(), &[1, m - 1]);
        }
    }

    #[test]
    fn quotient_dimensions_match_orders() {
        for m in 3..=5u64 {
            for j in 1..=3u32 {
                let g = Graph::complete(m).unwrap().kron_power(j).unwrap();
                let p = equitable_partition(&g, 0).unwrap();
                assert_eq!(p.num_cells() as u32, j + 1, "M={m} j={j}");
            }
        }
    }

    #[test]
    fn third_order_cell_sizes() {
        for m in [4u64, 6] {
            let g = Graph::complete(m).unwrap().kron_power(3).unwrap();
            let p = equitable_partition(&g, 0).unwrap();
            let mut sizes = p.cell_sizes().to_vec();
            sizes.sort_unstable();
            let mut expect = vec![1, (m - 1).pow(3), 3 * (m - 1), 3 * (m - 1).pow(2)];
            expect.sort_unstable();
            assert_eq!(sizes, expect);
        }
    }

    #[test]
    fn implicit_partition_matches_refinement() {
        for (m, j, w) in [(3u64, 3u32, 0u64), (4, 2, 7), (4, 3, 21), (5, 2, 13)] {
            let g = Graph::complete(m).unwrap().kron_power(j).unwrap();
            let refined = equitable_partition(&g, w).unwrap();
            let implicit = agreement_partition(m, j, w);
            assert_eq!(refined.cell_sizes(), implicit.cell_sizes(), "M={m} j={j} w={w}");
            assert_eq!(refined.neighbor_counts(), implicit.neighbor_counts());
            assert_eq!(refined.cells().unwrap(), implicit.cells().unwrap());
            implicit.verify_equitable(&g).unwrap();
        }
    }

    #[test]
    fn reduced_adjacency_matches_third_order_closed_form() {
        // In the (marked, adjacent, 2-agreements, 1-agreement) ordering, the
        // quotient adjacency entries are √(M₁³), M₂³, √3·M₁M₂, √(3M₁)·M₂²,
        // and 2M₁M₂ with M_i = M − i.
        for m in 4..=8u64 {
            let g = Graph::complete(m).unwrap().kron_power(3).unwrap();
            let p = equitable_partition(&g, 0).unwrap();
            let b = reduce_adjacency(&p);
            // Internal min-vertex order for w = 0: marked, 2-agree, 1-agree,
            // adjacent. Permute to (marked, adjacent, 2-agree, 1-agree).
            let perm = [0usize, 3, 1, 2];
            let m1 = (m - 1) as f64;
            let m2 = (m - 2) as f64;
            let expect = [
                [0.0, (m1.powi(3)).sqrt(), 0.0, 0.0],
                [(m1.powi(3)).sqrt(), m2.powi(3), 3f64.sqrt() * m1 * m2, (3.0 * m1).sqrt() * m2 * m2],
                [0.0, 3f64.sqrt() * m1 * m2, 0.0, (m1.powi(3)).sqrt()],
                [0.0, (3.0 * m1).sqrt() * m2 * m2, (m1.powi(3)).sqrt(), 2.0 * m1 * m2],
            ];
            for a in 0..4 {
                for c in 0..4 {
                    assert_relative_eq!(
                        b[(perm[a], perm[c])],
                        expect[a][c],
                        max_relative = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn grover_quotient_two_by_two() {
        let m = 8u64;
        let g = Graph::complete(m).unwrap();
        let p = equitable_partition(&g, 0).unwrap();
        let h = reduce_hamiltonian(&g, &p, 1.0 / m as f64, 0).unwrap();
        let gamma = 1.0 / m as f64;
        let root = ((m - 1) as f64).sqrt();
        assert_relative_eq!(h.matrix[(0, 0)], -1.0, max_relative = 1e-12);
        assert_relative_eq!(h.matrix[(0, 1)], -gamma * root, max_relative = 1e-12);
        assert_relative_eq!(h.matrix[(1, 1)], -gamma * (m - 2) as f64, max_relative = 1e-12);
    }

    #[test]
    fn project_then_lift_round_trips() {
        let g = Graph::complete(4).unwrap().kron_power(2).unwrap();
        let p = equitable_partition(&g, 0).unwrap();
        let s = project_uniform(&p);
        assert_relative_eq!(s.norm(), 1.0, max_relative = 1e-12);
        let full = lift(&p, &s).unwrap();
        let expect = 1.0 / (g.num_vertices() as f64).sqrt();
        for a in full.amplitudes().iter() {
            assert_relative_eq!(a.re, expect, max_relative = 1e-12);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn lift_of_marked_cell_is_marked_vertex() {
        let g = Graph::complete(4).unwrap().kron_power(2).unwrap();
        let p = equitable_partition(&g, 3).unwrap();
        let mut amps = DVector::from_element(p.num_cells(), Complex64::new(0.0, 0.0));
        amps[0] = Complex64::new(1.0, 0.0);
        let reduced = StateVector::new(
            amps,
            Basis::Reduced { cell_sizes: p.cell_sizes().to_vec() },
        )
        .unwrap();
        let full = lift(&p, &reduced).unwrap();
        assert_relative_eq!(full.probability(3), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn census_closed_form_values() {
        let c = third_order_census(4).unwrap();
        assert_eq!(c.rows[0].count, 3);
        assert_eq!(c.rows[0].mutual_neighbors, 18);
        assert_eq!(c.total_vertices(), 64);
        assert!(third_order_census(2).is_err());
    }

    #[test]
    fn census_identity_all_m() {
        for m in 3..=32u64 {
            let c = third_order_census(m).unwrap();
            assert_eq!(c.total_vertices(), m.pow(3));
            assert_eq!(
                1 + (m - 1).pow(3) + 3 * (m - 1) + 3 * (m - 1).pow(2),
                m.pow(3)
            );
        }
    }

    #[test]
    fn census_brute_force_oracle() {
        // Every row checked by exhaustive common-neighbor counting.
        for m in 3..=5u64 {
            let g = Graph::complete(m).unwrap().kron_power(3).unwrap();
            let census = third_order_census(m).unwrap();
            let w = 0u64;
            let wc = VertexCodeDigits::of(w, m);
            let mut seen = vec![0u64; census.rows.len()];
            for v in 1..g.num_vertices() {
                let vc = VertexCodeDigits::of(v, m);
                let pattern = [wc.0[0] == vc.0[0], wc.0[1] == vc.0[1], wc.0[2] == vc.0[2]];
                let row_idx = census.rows.iter().position(|r| r.pattern == pattern).unwrap();
                seen[row_idx] += 1;
                assert_eq!(
                    g.common_neighbor_count(w, v).unwrap(),
                    census.rows[row_idx].mutual_neighbors,
                    "M={m} v={v}"
                );
            }
            for (row, &count) in census.rows.iter().zip(&seen) {
                assert_eq!(row.count, count, "M={m} class {}", row.class);
            }
        }
    }

    struct VertexCodeDigits([u64; 3]);
    impl VertexCodeDigits {
        fn of(v: u64, m: u64) -> Self {
            VertexCodeDigits([v / (m * m), (v / m) % m, v % m])
        }
    }

    #[test]
    fn partition_json_shape() {
        let g = Graph::complete(3).unwrap();
        let p = equitable_partition(&g, 0).unwrap();
        assert_eq!(p.to_json().unwrap(), "{\"cells\": [[0], [1, 2]], \"sizes\": [1, 2]}");
    }
}
