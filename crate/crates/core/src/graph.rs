//! Kronecker powers of complete graphs: construction, adjacency queries,
//! vertex coordinate codec, BFS diameter, and strong-regularity detection.

use crate::error::{Error, Result};

pub type Vertex = u64;

/// How a graph was constructed: initiator size `M` and Kronecker order `j`,
/// giving `N = M^j` vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub initiator_size: u64,
    pub order: u32,
}

/// Materialized adjacency lists are kept below this vertex count; larger
/// complete-initiator powers fall back to the O(1) coordinate oracle.
const MAX_MATERIALIZED_VERTICES: u64 = 1 << 22;
/// Budget on total stored neighbor entries (sum of degrees).
const MAX_MATERIALIZED_ENTRIES: u64 = 1 << 26;

#[derive(Debug, Clone)]
enum Adjacency {
    /// Sorted neighbor lists in compressed sparse row layout.
    Csr { offsets: Vec<usize>, targets: Vec<u32> },
    /// Implicit adjacency for `K_m^{⊗j}`: vertices are adjacent iff their
    /// mixed-radix coordinates differ at every level.
    CompleteKron { m: u64, j: u32 },
}

/// Immutable undirected 0/1 adjacency structure with optional Kronecker
/// provenance. Symmetric, no self-loops.
#[derive(Debug, Clone)]
pub struct Graph {
    n: u64,
    adj: Adjacency,
    provenance: Option<Provenance>,
}

fn checked_pow(m: u64, j: u32) -> Result<u64> {
    m.checked_pow(j)
        .ok_or_else(|| Error::capacity(format!("{m}^{j} overflows the vertex index range")))
}

impl Graph {
    /// The complete graph `K_m`. Stored explicitly for small `m`, implicitly
    /// (as the order-1 Kronecker power) when the edge lists would be too big.
    pub fn complete(m: u64) -> Result<Graph> {
        if m == 0 {
            return Err(Error::invalid("complete graph needs at least one vertex"));
        }
        let provenance = Some(Provenance { initiator_size: m, order: 1 });
        if m * m.saturating_sub(1) > MAX_MATERIALIZED_ENTRIES {
            return Ok(Graph { n: m, adj: Adjacency::CompleteKron { m, j: 1 }, provenance });
        }
        let mut offsets = Vec::with_capacity(m as usize + 1);
        let mut targets = Vec::with_capacity((m * m.saturating_sub(1)) as usize);
        offsets.push(0);
        for u in 0..m as u32 {
            for v in 0..m as u32 {
                if v != u {
                    targets.push(v);
                }
            }
            offsets.push(targets.len());
        }
        Ok(Graph { n: m, adj: Adjacency::Csr { offsets, targets }, provenance })
    }

    /// Builds a graph from an explicit undirected edge list on `n` vertices.
    /// Each edge may be listed once in either direction; duplicates collapse.
    pub fn from_edges(n: u64, edges: &[(Vertex, Vertex)]) -> Result<Graph> {
        if n > MAX_MATERIALIZED_VERTICES {
            return Err(Error::capacity(format!("{n} vertices exceed the materialized limit")));
        }
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n as usize];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            lists[u as usize].push(v as u32);
            lists[v as usize].push(u as u32);
        }
        let mut offsets = Vec::with_capacity(n as usize + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        Ok(Graph { n, adj: Adjacency::Csr { offsets, targets }, provenance: None })
    }

    /// The `j`-fold Kronecker power of an order-1 graph. Vertices are
    /// adjacent iff their coordinates are adjacent in the initiator at every
    /// level. Falls back to implicit adjacency for large complete initiators.
    pub fn kron_power(&self, j: u32) -> Result<Graph> {
        if j == 0 {
            return Err(Error::invalid("Kronecker order must be at least 1"));
        }
        let prov = self.provenance.ok_or_else(|| {
            Error::invalid("Kronecker power requires an order-1 initiator graph")
        })?;
        if prov.order != 1 {
            return Err(Error::invalid(format!(
                "initiator must have order 1, got order {}",
                prov.order
            )));
        }
        let m = prov.initiator_size;
        let n = checked_pow(m, j)?;
        let provenance = Some(Provenance { initiator_size: m, order: j });

        let is_complete = self.is_complete();
        let entries = self
            .total_degree()
            .and_then(|d| if j == 1 { Some(d) } else { self.entry_estimate(n, j) });
        let materializable = n <= MAX_MATERIALIZED_VERTICES
            && entries.is_some_and(|e| e <= MAX_MATERIALIZED_ENTRIES);

        if !materializable {
            if is_complete {
                return Ok(Graph { n, adj: Adjacency::CompleteKron { m, j }, provenance });
            }
            return Err(Error::capacity(format!(
                "K-power with {n} vertices cannot be materialized for a non-complete initiator"
            )));
        }

        let init = match &self.adj {
            Adjacency::Csr { offsets, targets } => (offsets, targets),
            Adjacency::CompleteKron { .. } => {
                // complete() only goes implicit past the entry budget
                return Ok(Graph { n, adj: Adjacency::CompleteKron { m, j }, provenance });
            }
        };
        let (offsets, targets) = init;

        let mut out_offsets = Vec::with_capacity(n as usize + 1);
        let mut out_targets = Vec::new();
        out_offsets.push(0);
        let mut coords = vec![0u64; j as usize];
        for u in 0..n {
            decode_into(u, m, &mut coords);
            // Cartesian product of the per-level neighbor lists, most
            // significant level first, yields sorted encoded neighbors.
            let lists: Vec<&[u32]> = coords
                .iter()
                .map(|&c| &targets[offsets[c as usize]..offsets[c as usize + 1]])
                .collect();
            if lists.iter().all(|l| !l.is_empty()) {
                let mut idx = vec![0usize; lists.len()];
                loop {
                    let mut code = 0u64;
                    for (lvl, list) in lists.iter().enumerate() {
                        code = code * m + list[idx[lvl]] as u64;
                    }
                    out_targets.push(code as u32);
                    let mut lvl = lists.len();
                    loop {
                        if lvl == 0 {
                            break;
                        }
                        lvl -= 1;
                        idx[lvl] += 1;
                        if idx[lvl] < lists[lvl].len() {
                            break;
                        }
                        idx[lvl] = 0;
                        if lvl == 0 {
                            idx.clear();
                            break;
                        }
                    }
                    if idx.is_empty() {
                        break;
                    }
                }
            }
            out_offsets.push(out_targets.len());
        }
        Ok(Graph { n, adj: Adjacency::Csr { offsets: out_offsets, targets: out_targets }, provenance })
    }

    fn total_degree(&self) -> Option<u64> {
        match &self.adj {
            Adjacency::Csr { targets, .. } => Some(targets.len() as u64),
            Adjacency::CompleteKron { m, j } => {
                let n = m.checked_pow(*j)?;
                n.checked_mul((m - 1).checked_pow(*j)?)
            }
        }
    }

    /// Upper bound on stored entries for the j-th power: n * max_degree^j.
    fn entry_estimate(&self, n: u64, j: u32) -> Option<u64> {
        let max_deg = match &self.adj {
            Adjacency::Csr { offsets, .. } => offsets
                .windows(2)
                .map(|w| (w[1] - w[0]) as u64)
                .max()
                .unwrap_or(0),
            Adjacency::CompleteKron { m, .. } => m - 1,
        };
        n.checked_mul(max_deg.checked_pow(j)?)
    }

    fn is_complete(&self) -> bool {
        match &self.adj {
            Adjacency::CompleteKron { j: 1, .. } => true,
            Adjacency::CompleteKron { .. } => false,
            Adjacency::Csr { offsets, .. } => offsets
                .windows(2)
                .all(|w| (w[1] - w[0]) as u64 == self.n - 1),
        }
    }

    pub fn num_vertices(&self) -> u64 {
        self.n
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    /// True when adjacency is stored as explicit neighbor lists.
    pub fn is_materialized(&self) -> bool {
        matches!(self.adj, Adjacency::Csr { .. })
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v >= self.n {
            return Err(Error::invalid(format!("vertex {v} out of range (N = {})", self.n)));
        }
        Ok(())
    }

    pub fn degree(&self, v: Vertex) -> Result<u64> {
        self.check_vertex(v)?;
        Ok(match &self.adj {
            Adjacency::Csr { offsets, .. } => {
                (offsets[v as usize + 1] - offsets[v as usize]) as u64
            }
            Adjacency::CompleteKron { m, j } => (m - 1).pow(*j),
        })
    }

    pub fn max_degree(&self) -> u64 {
        match &self.adj {
            Adjacency::Csr { offsets, .. } => offsets
                .windows(2)
                .map(|w| (w[1] - w[0]) as u64)
                .max()
                .unwrap_or(0),
            Adjacency::CompleteKron { m, j } => (m - 1).pow(*j),
        }
    }

    /// Sorted neighbor slice; only available on materialized graphs.
    pub fn neighbors(&self, v: Vertex) -> Result<&[u32]> {
        self.check_vertex(v)?;
        match &self.adj {
            Adjacency::Csr { offsets, targets } => {
                Ok(&targets[offsets[v as usize]..offsets[v as usize + 1]])
            }
            Adjacency::CompleteKron { .. } => Err(Error::capacity(
                "neighbor lists are not materialized for this graph".to_string(),
            )),
        }
    }

    pub fn is_adjacent(&self, u: Vertex, v: Vertex) -> Result<bool> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Ok(false);
        }
        Ok(match &self.adj {
            Adjacency::Csr { offsets, targets } => {
                targets[offsets[u as usize]..offsets[u as usize + 1]]
                    .binary_search(&(v as u32))
                    .is_ok()
            }
            Adjacency::CompleteKron { m, j } => {
                coords_differ_everywhere(u, v, *m, *j)
            }
        })
    }

    /// Number of common neighbors of a distinct pair. Sorted-list
    /// intersection on materialized graphs, coordinate closed form on
    /// implicit complete-initiator powers.
    pub fn common_neighbor_count(&self, u: Vertex, v: Vertex) -> Result<u64> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::invalid("common neighbors require distinct vertices"));
        }
        match &self.adj {
            Adjacency::Csr { offsets, targets } => {
                let a = &targets[offsets[u as usize]..offsets[u as usize + 1]];
                let b = &targets[offsets[v as usize]..offsets[v as usize + 1]];
                Ok(sorted_intersection_len(a, b))
            }
            Adjacency::CompleteKron { m, j } => {
                // A common neighbor must avoid both coordinates at each level.
                let mut count = 1u64;
                let (mut uu, mut vv) = (u, v);
                for _ in 0..*j {
                    let per_level = if uu % m == vv % m { m - 1 } else { m - 2 };
                    count *= per_level;
                    uu /= m;
                    vv /= m;
                }
                Ok(count)
            }
        }
    }

    /// Max over vertex pairs of BFS distance; `Unreachable` when disconnected.
    pub fn diameter(&self) -> Result<Diameter> {
        match &self.adj {
            Adjacency::Csr { offsets, targets } => {
                if self.n <= 1 {
                    return Ok(Diameter::Finite(0));
                }
                let n = self.n as usize;
                let mut best = 0u32;
                let mut dist = vec![u32::MAX; n];
                let mut queue = std::collections::VecDeque::new();
                for src in 0..n {
                    dist.fill(u32::MAX);
                    dist[src] = 0;
                    queue.clear();
                    queue.push_back(src as u32);
                    let mut reached = 1usize;
                    let mut ecc = 0u32;
                    while let Some(x) = queue.pop_front() {
                        let d = dist[x as usize];
                        ecc = ecc.max(d);
                        for &y in &targets[offsets[x as usize]..offsets[x as usize + 1]] {
                            if dist[y as usize] == u32::MAX {
                                dist[y as usize] = d + 1;
                                reached += 1;
                                queue.push_back(y);
                            }
                        }
                    }
                    if reached < n {
                        return Ok(Diameter::Unreachable);
                    }
                    best = best.max(ecc);
                }
                Ok(Diameter::Finite(best))
            }
            Adjacency::CompleteKron { .. } => Err(Error::capacity(
                "diameter needs materialized adjacency".to_string(),
            )),
        }
    }

    /// Brute-force strong-regularity check by exhaustive pair census.
    pub fn srg_params(&self) -> Result<SrgCheck> {
        const SRG_BRUTE_FORCE_LIMIT: u64 = 4096;
        if self.n < 2 {
            return Err(Error::invalid("strong regularity needs at least 2 vertices"));
        }
        if self.n > SRG_BRUTE_FORCE_LIMIT {
            return Err(Error::capacity(format!(
                "brute-force SRG check is capped at {SRG_BRUTE_FORCE_LIMIT} vertices"
            )));
        }
        if !self.is_materialized() {
            return Err(Error::capacity("SRG check needs materialized adjacency".to_string()));
        }
        let k = self.degree(0)?;
        for v in 1..self.n {
            if self.degree(v)? != k {
                return Ok(SrgCheck::NotStronglyRegular {
                    reason: format!("degree of vertex {v} differs from vertex 0"),
                });
            }
        }
        if matches!(self.diameter()?, Diameter::Unreachable) {
            return Ok(SrgCheck::NotStronglyRegular { reason: "graph is disconnected".into() });
        }
        let mut lambda: Option<u64> = None;
        let mut mu: Option<u64> = None;
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                let c = self.common_neighbor_count(u, v)?;
                let slot = if self.is_adjacent(u, v)? { &mut lambda } else { &mut mu };
                match slot {
                    None => *slot = Some(c),
                    Some(prev) if *prev != c => {
                        return Ok(SrgCheck::NotStronglyRegular {
                            reason: format!("pair ({u}, {v}) breaks the common-neighbor census"),
                        });
                    }
                    _ => {}
                }
            }
        }
        match (lambda, mu) {
            (_, None) => Ok(SrgCheck::Degenerate),
            (lambda, Some(mu)) => Ok(SrgCheck::Params(SrgParams {
                n: self.n,
                k,
                lambda: lambda.unwrap_or(0),
                mu,
            })),
        }
    }
}

fn coords_differ_everywhere(u: Vertex, v: Vertex, m: u64, j: u32) -> bool {
    let (mut uu, mut vv) = (u, v);
    for _ in 0..j {
        if uu % m == vv % m {
            return false;
        }
        uu /= m;
        vv /= m;
    }
    true
}

fn sorted_intersection_len(a: &[u32], b: &[u32]) -> u64 {
    let (mut i, mut k, mut count) = (0usize, 0usize, 0u64);
    while i < a.len() && k < b.len() {
        match a[i].cmp(&b[k]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => k += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                k += 1;
            }
        }
    }
    count
}

/// BFS diameter, with a sentinel for disconnected graphs
/// (e.g. `K_2 ⊗ K_2` is a perfect matching).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diameter {
    Finite(u32),
    Unreachable,
}

/// Strongly-regular-graph parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SrgParams {
    pub n: u64,
    pub k: u64,
    pub lambda: u64,
    pub mu: u64,
}

impl SrgParams {
    /// Standard feasibility identity `k(k - λ - 1) = (N - k - 1)μ`.
    pub fn feasibility_holds(&self) -> bool {
        self.k * (self.k - self.lambda - 1) == (self.n - self.k - 1) * self.mu
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SrgCheck {
    Params(SrgParams),
    NotStronglyRegular { reason: String },
    /// No nonadjacent pair exists, so μ is undefined (complete graphs).
    Degenerate,
}

/// Mixed-radix vertex coordinates, most significant level first, matching
/// the block order of the printed Kronecker matrices. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexCode {
    pub positions: Vec<u64>,
}

impl VertexCode {
    pub fn new(positions: Vec<u64>) -> Self {
        VertexCode { positions }
    }

    /// `index = Σ p_i · M^(j−i)`, a bijection onto `[0, M^j)`.
    pub fn encode(&self, m: u64) -> Result<Vertex> {
        if self.positions.is_empty() {
            return Err(Error::invalid("vertex code needs at least one level"));
        }
        let mut index = 0u64;
        for &p in &self.positions {
            if p >= m {
                return Err(Error::invalid(format!("coordinate {p} out of range [0, {m})")));
            }
            index = index
                .checked_mul(m)
                .and_then(|x| x.checked_add(p))
                .ok_or_else(|| Error::capacity("vertex index overflows".to_string()))?;
        }
        Ok(index)
    }

    pub fn decode(index: Vertex, m: u64, j: u32) -> Result<VertexCode> {
        let n = checked_pow(m, j)?;
        if index >= n {
            return Err(Error::invalid(format!("index {index} out of range [0, {n})")));
        }
        let mut positions = vec![0u64; j as usize];
        decode_into(index, m, &mut positions);
        Ok(VertexCode { positions })
    }
}

fn decode_into(index: Vertex, m: u64, out: &mut [u64]) {
    let mut rest = index;
    for slot in out.iter_mut().rev() {
        *slot = rest % m;
        rest /= m;
    }
}
