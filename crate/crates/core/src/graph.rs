//! Areal region graphs with an explicit vertex ordering.
//!
//! Regions keep the index they were first given (input order) for the whole
//! lifetime of a graph. The DAGAR ordering is a separate permutation
//! (`order[position] = region`), so reordering never moves data around:
//! everything downstream (precision matrices, datasets, exports) is indexed by
//! region, and only the directed neighbor sets depend on the ordering.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra_sparse::{CooMatrix, CscMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedRegionGraph {
    region_ids: Vec<String>,
    index: HashMap<String, usize>,
    /// Unordered edges as `(a, b)` region indices with `a < b`, sorted.
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    order: Vec<usize>,
    position: Vec<usize>,
}

/// Directed neighbor sets: for each position `i`, the earlier positions adjacent to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborSets {
    sets: Vec<Vec<usize>>,
}

impl NeighborSets {
    /// Earlier-position neighbors of position `i` (0-based), sorted ascending.
    pub fn set(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    /// `n_<i` for every position; the first position always has count 0.
    pub fn counts(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.sets.iter().map(Vec::as_slice)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    #[serde(default)]
    nodes: Vec<String>,
    #[serde(default)]
    edges: Vec<(String, String)>,
}

impl OrderedRegionGraph {
    /// Builds a graph from region labels and index pairs. Duplicate edges
    /// (in either orientation) are collapsed; self-loops are rejected.
    pub fn new(region_ids: Vec<String>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let k = region_ids.len();
        if k == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut index = HashMap::with_capacity(k);
        for (i, id) in region_ids.iter().enumerate() {
            if id.is_empty() {
                return Err(Error::InvalidGraph(format!("vertex {i} has an empty id")));
            }
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex id {id:?}")));
            }
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= k || b >= k {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {k} vertices"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {:?}", region_ids[a])));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut neighbors = vec![Vec::new(); k];
        for &(a, b) in &edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let order: Vec<usize> = (0..k).collect();
        Ok(Self {
            region_ids,
            index,
            edges,
            neighbors,
            position: order.clone(),
            order,
        })
    }

    /// Parses either the edge-list format or its JSON alternative, picking by
    /// the first non-blank character.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_adjacency(text)
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses the line-oriented edge list: one `<id_a> <id_b>` pair per line,
    /// `#` comments, and an optional `nodes: a,b,c` line declaring vertices
    /// (including isolated ones). Vertices are ordered by first appearance.
    pub fn parse_adjacency(text: &str) -> Result<Self> {
        let mut ids: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut intern = |id: &str, ids: &mut Vec<String>| -> usize {
            *index.entry(id.to_string()).or_insert_with(|| {
                ids.push(id.to_string());
                ids.len() - 1
            })
        };
        let mut edges = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("nodes:") {
                for id in rest.split(',').map(str::trim) {
                    if id.is_empty() {
                        return Err(Error::GraphParse {
                            line: line_no,
                            message: "empty vertex id in nodes header".into(),
                        });
                    }
                    intern(id, &mut ids);
                }
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let [a, b] = tokens[..] else {
                return Err(Error::GraphParse {
                    line: line_no,
                    message: format!("expected \"<id_a> <id_b>\", found {line:?}"),
                });
            };
            if a == b {
                return Err(Error::GraphParse {
                    line: line_no,
                    message: format!("self-loop on {a:?}"),
                });
            }
            let ia = intern(a, &mut ids);
            let ib = intern(b, &mut ids);
            edges.push((ia, ib));
        }
        if ids.is_empty() {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        Self::new(ids, edges)
    }

    /// Parses `{"nodes": [...], "edges": [["A","B"], ...]}`. Vertices listed in
    /// `nodes` come first, then any further ids in edge order.
    pub fn parse_json(text: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(text)?;
        let mut ids = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut intern = |id: &String, ids: &mut Vec<String>| -> usize {
            *index.entry(id.clone()).or_insert_with(|| {
                ids.push(id.clone());
                ids.len() - 1
            })
        };
        for id in &doc.nodes {
            intern(id, &mut ids);
        }
        let mut edges = Vec::with_capacity(doc.edges.len());
        for (a, b) in &doc.edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on {a:?}")));
            }
            let ia = intern(a, &mut ids);
            let ib = intern(b, &mut ids);
            edges.push((ia, ib));
        }
        Self::new(ids, edges)
    }

    /// Rook-adjacency lattice with cells labelled `r<row>c<col>` in row-major order.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let ids = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| format!("r{r}c{c}")))
            .collect();
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        Self::new(ids, edges)
    }

    /// Path graph `v0 - v1 - ... - v(k-1)`.
    pub fn path(k: usize) -> Result<Self> {
        let ids = (0..k).map(|i| format!("v{i}")).collect();
        Self::new(ids, (1..k).map(|i| (i - 1, i)))
    }

    /// Returns the same graph with a new DAGAR ordering; `permutation[i]` is
    /// the id of the region placed at position `i`.
    pub fn reorder<S: AsRef<str>>(&self, permutation: &[S]) -> Result<Self> {
        let k = self.len();
        if permutation.len() != k {
            return Err(Error::InvalidParameter(format!(
                "ordering lists {} regions, graph has {k}",
                permutation.len()
            )));
        }
        let mut order = Vec::with_capacity(k);
        let mut seen = vec![false; k];
        for id in permutation {
            let id = id.as_ref();
            let r = self
                .index_of(id)
                .ok_or_else(|| Error::InvalidParameter(format!("ordering names unknown region {id:?}")))?;
            if std::mem::replace(&mut seen[r], true) {
                return Err(Error::InvalidParameter(format!("ordering repeats region {id:?}")));
            }
            order.push(r);
        }
        self.with_order(order)
    }

    /// Same as [`reorder`](Self::reorder) but with region indices.
    pub fn with_order(&self, order: Vec<usize>) -> Result<Self> {
        let k = self.len();
        let mut position = vec![usize::MAX; k];
        if order.len() != k {
            return Err(Error::InvalidParameter("ordering is not a permutation".into()));
        }
        for (p, &r) in order.iter().enumerate() {
            if r >= k || position[r] != usize::MAX {
                return Err(Error::InvalidParameter("ordering is not a permutation".into()));
            }
            position[r] = p;
        }
        Ok(Self {
            order,
            position,
            ..self.clone()
        })
    }

    pub fn len(&self) -> usize {
        self.region_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.region_ids.is_empty()
    }

    pub fn region_ids(&self) -> &[String] {
        &self.region_ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, region: usize) -> &[usize] {
        &self.neighbors[region]
    }

    pub fn degree(&self, region: usize) -> usize {
        self.neighbors[region].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    /// `order()[position]` is the region placed at that position.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `position()[region]` is the DAGAR position of that region.
    pub fn position(&self) -> &[usize] {
        &self.position
    }

    /// Region ids listed in DAGAR order.
    pub fn ordered_ids(&self) -> Vec<String> {
        self.order.iter().map(|&r| self.region_ids[r].clone()).collect()
    }

    pub fn neighbor_sets(&self) -> NeighborSets {
        let sets = self
            .order
            .iter()
            .enumerate()
            .map(|(p, &r)| {
                let mut earlier: Vec<usize> = self.neighbors[r]
                    .iter()
                    .map(|&n| self.position[n])
                    .filter(|&q| q < p)
                    .collect();
                earlier.sort_unstable();
                earlier
            })
            .collect();
        NeighborSets { sets }
    }

    /// Binary adjacency matrix `M` (region-indexed, symmetric, zero diagonal).
    pub fn adjacency(&self) -> CscMatrix<f64> {
        let k = self.len();
        let mut coo = CooMatrix::new(k, k);
        for &(a, b) in &self.edges {
            coo.push(a, b, 1.0);
            coo.push(b, a, 1.0);
        }
        CscMatrix::from(&coo)
    }

    /// Serializes to the edge-list format: a `nodes:` header with every region
    /// in index order, then one sorted edge per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nodes: {}", self.region_ids.join(","));
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "{} {}", self.region_ids[a], self.region_ids[b]);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = GraphJson {
            nodes: self.region_ids.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| (self.region_ids[a].clone(), self.region_ids[b].clone()))
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("graph serializes");
        text.push('\n');
        text
    }
}
