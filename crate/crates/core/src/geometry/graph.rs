//! The level-`m` cable system `V̄_m` as an explicit rooted tree.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::geometry::address::{Address, Anchor, Digit};
use crate::geometry::lattice::LatticePoint;
use crate::geometry::metric::{self, Length};

pub type VertexId = usize;
pub type EdgeId = usize;

const NONE: u32 = u32::MAX;

/// Default cap on explicit graph levels.
pub const DEFAULT_MAX_LEVEL: u32 = 10;

/// Default memory budget for one explicit graph.
pub const DEFAULT_MEMORY_BUDGET: u64 = 3 << 30;

/// Level cap, overridable through the `VICSEK_MAX_LEVEL` environment variable.
pub fn max_level() -> u32 {
    std::env::var("VICSEK_MAX_LEVEL")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_LEVEL)
}

pub fn vertex_count(m: u32) -> u64 {
    4 * 5u64.pow(m) + 1
}

pub fn edge_count(m: u32) -> u64 {
    4 * 5u64.pow(m)
}

pub fn cell_count(m: u32) -> u64 {
    5u64.pow(m)
}

/// Peak bytes needed by [`CableGraph::build`] at level `m`.
pub fn estimated_bytes(m: u32) -> u64 {
    let v = vertex_count(m);
    let c = cell_count(m);
    // build-time point buffer, then coordinates, cells, CSR adjacency and BFS data
    5 * c * 8 + v * 8 + c * 20 + v * 4 + 2 * edge_count(m) * 8 + v * 8
}

/// An oriented edge of the cable system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    /// Endpoint nearer the root.
    pub lo: VertexId,
    pub hi: VertexId,
    /// Owning level-`m` cell.
    pub cell: Address,
    /// The corner `q_arm` of the owning cell joined to its center.
    pub arm: Digit,
}

/// The tree `V̄_m`.
///
/// Vertices are sorted by their numerators at scale `m`; cells are indexed
/// lexicographically; edge `4c + k` joins the center of cell `c` to its
/// corner `q_{k+1}`.
#[derive(Debug)]
pub struct CableGraph {
    level: u32,
    coords: Vec<(i32, i32)>,
    cells: Vec<[u32; 5]>,
    adj_offsets: Vec<u32>,
    adj: Vec<(u32, u32)>,
    root: u32,
    root_steps: Vec<u32>,
    parent_edge: Vec<u32>,
}

/// Translations `T_w` (numerators at scale `m`) of all level-`m` cells in
/// lexicographic order.
pub(crate) fn translations(m: u32) -> Vec<(i64, i64)> {
    let mut ts = vec![(0i64, 0i64)];
    for _ in 0..m {
        let mut next = Vec::with_capacity(ts.len() * 5);
        for &(x, y) in &ts {
            for d in Digit::ALL {
                let (c, e) = d.fixed_point();
                next.push((3 * x + 2 * c, 3 * y + 2 * e));
            }
        }
        ts = next;
    }
    ts
}

impl CableGraph {
    /// Builds `V̄_m`, subject to the level cap and the default memory budget.
    pub fn build(m: u32) -> Result<Self> {
        Self::build_with_budget(m, DEFAULT_MEMORY_BUDGET)
    }

    pub fn build_with_budget(m: u32, budget: u64) -> Result<Self> {
        let cap = max_level();
        if m > cap {
            return Err(Error::Resource(format!("level {m} exceeds the level cap {cap}")));
        }
        if m > 19 || estimated_bytes(m) > budget {
            return Err(Error::Resource(format!(
                "level {m} needs about {} MiB, over the budget of {} MiB",
                estimated_bytes(m.min(19)) >> 20,
                budget >> 20
            )));
        }
        let ts = translations(m);
        let mut points: Vec<(i32, i32)> = Vec::with_capacity(ts.len() * 5);
        for &(x, y) in &ts {
            for d in Digit::ALL {
                let (c, e) = d.fixed_point();
                points.push(((x + c) as i32, (y + e) as i32));
            }
        }
        points.sort_unstable();
        points.dedup();
        let coords = points;
        debug_assert_eq!(coords.len() as u64, vertex_count(m));

        let find = |p: (i32, i32)| coords.binary_search(&p).expect("cell vertex is in the vertex set") as u32;
        let cells: Vec<[u32; 5]> = ts
            .iter()
            .map(|&(x, y)| {
                Digit::ALL.map(|d| {
                    let (c, e) = d.fixed_point();
                    find(((x + c) as i32, (y + e) as i32))
                })
            })
            .collect();
        drop(ts);
        Self::assemble(m, coords, cells)
    }

    fn assemble(m: u32, coords: Vec<(i32, i32)>, cells: Vec<[u32; 5]>) -> Result<Self> {
        let n = coords.len();
        let mut degree = vec![0u32; n + 1];
        for cell in &cells {
            degree[cell[4] as usize] += 4;
            for &v in &cell[..4] {
                degree[v as usize] += 1;
            }
        }
        let mut adj_offsets = Vec::with_capacity(n + 1);
        let mut acc = 0u32;
        for &d in &degree[..n] {
            adj_offsets.push(acc);
            acc += d;
        }
        adj_offsets.push(acc);
        let mut fill = adj_offsets.clone();
        let mut adj = vec![(0u32, 0u32); acc as usize];
        for (c, cell) in cells.iter().enumerate() {
            for k in 0..4 {
                let e = (4 * c + k) as u32;
                let (u, v) = (cell[4], cell[k]);
                adj[fill[u as usize] as usize] = (v, e);
                fill[u as usize] += 1;
                adj[fill[v as usize] as usize] = (u, e);
                fill[v as usize] += 1;
            }
        }
        drop(fill);

        let r = 3i32.pow(m);
        let root = coords
            .binary_search(&(r, r))
            .map_err(|_| Error::Format("center is missing from the vertex set".into()))? as u32;
        let mut root_steps = vec![NONE; n];
        let mut parent_edge = vec![NONE; n];
        root_steps[root as usize] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let (s, e) = (adj_offsets[u as usize] as usize, adj_offsets[u as usize + 1] as usize);
            for &(v, edge) in &adj[s..e] {
                if root_steps[v as usize] == NONE {
                    root_steps[v as usize] = root_steps[u as usize] + 1;
                    parent_edge[v as usize] = edge;
                    queue.push_back(v);
                }
            }
        }
        Ok(Self { level: m, coords, cells, adj_offsets, adj, root, root_steps, parent_edge })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len()
    }

    pub fn edge_count(&self) -> usize {
        self.cells.len() * 4
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn root(&self) -> VertexId {
        self.root as usize
    }

    /// Edge length `3^{-m}`.
    pub fn edge_length(&self) -> Length {
        Length::new(1, self.level)
    }

    /// Numerators at scale `m`.
    pub fn numerators(&self, v: VertexId) -> (i64, i64) {
        let (a, b) = self.coords[v];
        (a as i64, b as i64)
    }

    pub fn point(&self, v: VertexId) -> LatticePoint {
        let (a, b) = self.numerators(v);
        LatticePoint::new(a, b, self.level)
    }

    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..self.vertex_count()).map(|v| self.point(v))
    }

    pub fn find_vertex(&self, p: &LatticePoint) -> Option<VertexId> {
        let (a, b) = p.at_scale(self.level)?;
        let key = (i32::try_from(a).ok()?, i32::try_from(b).ok()?);
        self.coords.binary_search(&key).ok()
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::Lookup(format!("vertex id {v} out of range at level {}", self.level)))
        }
    }

    /// Vertex ids of a level-`m` cell: corners `q_1..q_4`, then the center.
    pub fn cell_vertices(&self, cell: usize) -> [VertexId; 5] {
        self.cells[cell].map(|v| v as usize)
    }

    /// The attachment vertex of a level-`m` cell.
    pub fn cell_anchor(&self, cell: usize) -> VertexId {
        let w = Address::from_index(self.level, cell as u64).expect("cell index in range");
        self.cells[cell][Anchor::of(&w).slot()] as usize
    }

    /// Anchor vertex of every cell, in cell order.
    pub fn anchors(&self) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(self.cells.len());
        let mut stack = vec![(Address::root(), Anchor::Center)];
        // depth-first in reverse digit order so cells come out lexicographically
        while let Some((w, a)) = stack.pop() {
            if w.level() == self.level {
                out.push(self.cells[w.index() as usize][a.slot()] as usize);
                continue;
            }
            for d in Digit::ALL.into_iter().rev() {
                stack.push((w.child(d), a.step(d)));
            }
        }
        out
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        let (c, k) = (e / 4, e % 4);
        let (u, v) = (self.cells[c][4] as usize, self.cells[c][k] as usize);
        let (lo, hi) = if self.root_steps[u] < self.root_steps[v] { (u, v) } else { (v, u) };
        Edge {
            lo,
            hi,
            cell: Address::from_index(self.level, c as u64).expect("cell index in range"),
            arm: Digit::CORNERS[k],
        }
    }

    /// Endpoints `(lo, hi)` without constructing the owning address.
    pub fn edge_endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        let (c, k) = (e / 4, e % 4);
        let (u, v) = (self.cells[c][4] as usize, self.cells[c][k] as usize);
        if self.root_steps[u] < self.root_steps[v] {
            (u, v)
        } else {
            (v, u)
        }
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, EdgeId)> + '_ {
        let (s, e) = (self.adj_offsets[v] as usize, self.adj_offsets[v + 1] as usize);
        self.adj[s..e].iter().map(|&(u, e)| (u as usize, e as usize))
    }

    pub fn degree(&self, v: VertexId) -> usize {
        (self.adj_offsets[v + 1] - self.adj_offsets[v]) as usize
    }

    /// Distance to the root in edges.
    pub fn root_steps(&self, v: VertexId) -> u64 {
        self.root_steps[v] as u64
    }

    pub fn root_distance(&self, v: VertexId) -> Length {
        Length::new(self.root_steps(v), self.level)
    }

    /// The edge towards the root, `None` at the root.
    pub fn parent_edge(&self, v: VertexId) -> Option<EdgeId> {
        let e = self.parent_edge[v];
        (e != NONE).then_some(e as usize)
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent_edge(v).map(|e| self.edge_endpoints(e).0)
    }

    /// Exact geodesic distance, computed by cell descent.
    pub fn geodesic_distance(&self, u: VertexId, v: VertexId) -> Result<Length> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let steps = metric::steps_between(self.numerators(u), self.numerators(v), self.level)
            .expect("graph vertices lie on the fractal");
        Ok(Length::new(steps, self.level))
    }

    /// The unique tree path from `u` to `v` as a sequence of edges.
    pub fn geodesic_path(&self, u: VertexId, v: VertexId) -> Result<Vec<EdgeId>> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let (mut a, mut b) = (u, v);
        let mut head = Vec::new();
        let mut tail = Vec::new();
        while a != b {
            if self.root_steps[a] >= self.root_steps[b] {
                let e = self.parent_edge[a] as usize;
                head.push(e);
                a = self.edge_endpoints(e).0;
            } else {
                let e = self.parent_edge[b] as usize;
                tail.push(e);
                b = self.edge_endpoints(e).0;
            }
        }
        head.extend(tail.into_iter().rev());
        Ok(head)
    }

    /// Orders two adjacent vertices as `(lo, hi)`, `lo` nearer the root.
    pub fn orient(&self, u: VertexId, v: VertexId) -> Result<(VertexId, VertexId)> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if !self.neighbors(u).any(|(w, _)| w == v) {
            return Err(Error::Adjacency(u, v));
        }
        Ok(if self.root_steps[u] < self.root_steps[v] { (u, v) } else { (v, u) })
    }

    /// Ids of the level-`m` cells whose closed square contains the vertex.
    pub fn cells_containing(&self, v: VertexId) -> Vec<usize> {
        let mut out = Vec::new();
        for (_, e) in self.neighbors(v) {
            let c = e / 4;
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    #[cfg(test)]
    pub(crate) fn raw_cells(&self) -> &[[u32; 5]] {
        &self.cells
    }

    pub(crate) fn raw_coords(&self) -> &[(i32, i32)] {
        &self.coords
    }

    /// Rebuilds the derived indices from stored vertices and cells.
    pub(crate) fn from_parts(level: u32, coords: Vec<(i32, i32)>, cells: Vec<[u32; 5]>) -> Result<Self> {
        if coords.len() as u64 != vertex_count(level) || cells.len() as u64 != cell_count(level) {
            return Err(Error::Format("vertex or cell count does not match the level".into()));
        }
        if !coords.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Format("vertices are not in canonical order".into()));
        }
        if cells.iter().flatten().any(|&v| v as usize >= coords.len()) {
            return Err(Error::Format("cell refers to a missing vertex".into()));
        }
        let g = Self::assemble(level, coords, cells)?;
        if g.root_steps.contains(&NONE) {
            return Err(Error::Format("stored graph is not connected".into()));
        }
        Ok(g)
    }
}

fn registry() -> &'static Mutex<HashMap<u32, Arc<CableGraph>>> {
    static REG: OnceLock<Mutex<HashMap<u32, Arc<CableGraph>>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Graphs up to this level are memoised process-wide.
pub const SHARED_LEVEL_LIMIT: u32 = 8;

/// A shared, immutable `V̄_m`; memoised for small levels.
pub fn shared_graph(m: u32) -> Result<Arc<CableGraph>> {
    if m > SHARED_LEVEL_LIMIT {
        return CableGraph::build(m).map(Arc::new);
    }
    let mut reg = registry().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(g) = reg.get(&m) {
        return Ok(Arc::clone(g));
    }
    let g = Arc::new(CableGraph::build(m)?);
    reg.insert(m, Arc::clone(&g));
    Ok(g)
}
