//! Abstract simple graphs: the coloring and enumeration layers work on
//! these, independent of any embedding.

use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid graph6 input: {0}")]
    Graph6(String),
}

/// Undirected simple graph on vertices 0..n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    n: usize,
    adj: Vec<BTreeSet<usize>>,
}

impl SimpleGraph {
    pub fn new(n: usize) -> SimpleGraph {
        SimpleGraph {
            n,
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> SimpleGraph {
        let mut g = SimpleGraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v && u < self.n && v < self.n);
        self.adj[u].insert(v);
        self.adj[v].insert(u);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.adj[u].remove(&v);
        self.adj[v].remove(&u);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Edges as sorted (u, v) pairs with u < v.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        self.component_of(0).len() == self.n
    }

    pub fn component_of(&self, start: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen
    }

    pub fn components(&self) -> Vec<BTreeSet<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for v in 0..self.n {
            if !seen[v] {
                let comp = self.component_of(v);
                for &w in &comp {
                    seen[w] = true;
                }
                out.push(comp);
            }
        }
        out
    }

    /// 2-connectivity; singletons and single edges count as not 2-connected,
    /// except K2 which we treat as 2-connected for the cross-checks (a ring
    /// plus nothing never reaches this query).
    pub fn is_2_connected(&self) -> bool {
        if self.n < 3 {
            return self.n == 2 && self.has_edge(0, 1);
        }
        if !self.is_connected() {
            return false;
        }
        // no cut vertex
        for v in 0..self.n {
            let mut seen = vec![false; self.n];
            seen[v] = true;
            let start = (0..self.n).find(|&w| w != v).unwrap();
            let mut stack = vec![start];
            seen[start] = true;
            let mut count = 1;
            while let Some(x) = stack.pop() {
                for &w in &self.adj[x] {
                    if !seen[w] {
                        seen[w] = true;
                        count += 1;
                        stack.push(w);
                    }
                }
            }
            if count != self.n - 1 {
                return false;
            }
        }
        true
    }

    /// All triangles as sorted vertex triples.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if v <= u {
                    continue;
                }
                for &w in &self.adj[v] {
                    if w > v && self.has_edge(u, w) {
                        out.push([u, v, w]);
                    }
                }
            }
        }
        out
    }

    pub fn is_triangle_free(&self) -> bool {
        self.triangles().is_empty()
    }

    pub fn is_bipartite(&self) -> bool {
        let mut color = vec![-1i8; self.n];
        for start in 0..self.n {
            if color[start] >= 0 {
                continue;
            }
            color[start] = 0;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v] {
                    if color[w] < 0 {
                        color[w] = 1 - color[v];
                        stack.push(w);
                    } else if color[w] == color[v] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Length of a shortest cycle, or None for forests.
    pub fn girth(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        // BFS from each vertex; a cross/back edge at depth d closes a cycle.
        for start in 0..self.n {
            let mut dist = vec![usize::MAX; self.n];
            let mut parent = vec![usize::MAX; self.n];
            dist[start] = 0;
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[v] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        parent[w] = v;
                        queue.push_back(w);
                    } else if parent[v] != w {
                        let len = dist[v] + dist[w] + 1;
                        if best.map_or(true, |b| len < b) {
                            best = Some(len);
                        }
                    }
                }
            }
        }
        best
    }

    /// All cycles of exactly the given length, as canonical vertex
    /// sequences (least vertex first, smaller neighbor second).
    pub fn cycles_of_length(&self, len: usize) -> Vec<Vec<usize>> {
        let mut out = BTreeSet::new();
        if len < 3 {
            return Vec::new();
        }
        let mut path = Vec::with_capacity(len);
        for start in 0..self.n {
            path.push(start);
            self.cycle_dfs(start, start, len, &mut path, &mut out);
            path.pop();
        }
        out.into_iter().collect()
    }

    fn cycle_dfs(
        &self,
        start: usize,
        v: usize,
        len: usize,
        path: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<usize>>,
    ) {
        if path.len() == len {
            if self.has_edge(v, start) {
                out.insert(canonical_cycle(path));
            }
            return;
        }
        for &w in &self.adj[v] {
            if w > start && !path.contains(&w) {
                path.push(w);
                self.cycle_dfs(start, w, len, path, out);
                path.pop();
            }
        }
    }

    /// All cycles of length at most `max_len`.
    pub fn cycles_up_to(&self, max_len: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for l in 3..=max_len {
            out.extend(self.cycles_of_length(l));
        }
        out
    }

    /// Shortest path length between u and v, None when disconnected.
    pub fn distance(&self, u: usize, v: usize) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[u] = 0;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(u);
        while let Some(x) = queue.pop_front() {
            if x == v {
                return Some(dist[x]);
            }
            for &w in &self.adj[x] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[x] + 1;
                    queue.push_back(w);
                }
            }
        }
        None
    }

    /// All simple paths from u to v with at most `max_edges` edges,
    /// excluding vertices in `forbidden` as interior vertices.
    pub fn paths_between(
        &self,
        u: usize,
        v: usize,
        max_edges: usize,
        forbidden: &BTreeSet<usize>,
    ) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut path = vec![u];
        self.path_dfs(u, v, max_edges, forbidden, &mut path, &mut out);
        out
    }

    fn path_dfs(
        &self,
        x: usize,
        target: usize,
        max_edges: usize,
        forbidden: &BTreeSet<usize>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if x == target && path.len() > 1 {
            out.push(path.clone());
            return;
        }
        if path.len() > max_edges {
            return;
        }
        for &w in &self.adj[x] {
            if path.contains(&w) || (w != target && forbidden.contains(&w)) {
                continue;
            }
            path.push(w);
            self.path_dfs(w, target, max_edges, forbidden, path, out);
            path.pop();
        }
    }

    /// Tests whether `pattern` is isomorphic to a subgraph of self.
    /// Straightforward backtracking; fine at desk scale.
    pub fn has_subgraph_isomorphic_to(&self, pattern: &SimpleGraph) -> bool {
        if pattern.n > self.n || pattern.edge_count() > self.edge_count() {
            return false;
        }
        // order pattern vertices by degree descending for earlier pruning
        let mut order: Vec<usize> = (0..pattern.n).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(pattern.degree(v)));
        let mut assignment = vec![usize::MAX; pattern.n];
        let mut used = vec![false; self.n];
        self.subiso_dfs(pattern, &order, 0, &mut assignment, &mut used)
    }

    fn subiso_dfs(
        &self,
        pattern: &SimpleGraph,
        order: &[usize],
        idx: usize,
        assignment: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if idx == order.len() {
            return true;
        }
        let p = order[idx];
        'candidates: for c in 0..self.n {
            if used[c] || self.degree(c) < pattern.degree(p) {
                continue;
            }
            for &q in &pattern.adj[p] {
                if assignment[q] != usize::MAX && !self.has_edge(c, assignment[q]) {
                    continue 'candidates;
                }
            }
            assignment[p] = c;
            used[c] = true;
            if self.subiso_dfs(pattern, order, idx + 1, assignment, used) {
                return true;
            }
            assignment[p] = usize::MAX;
            used[c] = false;
        }
        false
    }

    /// graph6 encoding (standard format, n <= 62 is all we need).
    pub fn to_graph6(&self) -> String {
        assert!(self.n <= 62, "graph6 writer limited to n <= 62");
        let mut bits = Vec::new();
        for v in 1..self.n {
            for u in 0..v {
                bits.push(self.has_edge(u, v));
            }
        }
        let mut out = String::new();
        out.push((self.n as u8 + 63) as char);
        for chunk in bits.chunks(6) {
            let mut value = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                if b {
                    value |= 1 << (5 - i);
                }
            }
            out.push((value + 63) as char);
        }
        out
    }

    pub fn from_graph6(text: &str) -> Result<SimpleGraph, GraphError> {
        let bytes: Vec<u8> = text.trim().bytes().collect();
        if bytes.is_empty() {
            return Err(GraphError::Graph6("empty input".into()));
        }
        let (n, rest) = if bytes[0] == b'~' {
            return Err(GraphError::Graph6("graphs over 62 vertices not supported".into()));
        } else {
            ((bytes[0].wrapping_sub(63)) as usize, &bytes[1..])
        };
        if bytes[0] < 63 {
            return Err(GraphError::Graph6("bad size byte".into()));
        }
        let needed = (n * n.saturating_sub(1) / 2).div_ceil(6);
        if rest.len() < needed {
            return Err(GraphError::Graph6("truncated input".into()));
        }
        let mut bits = Vec::with_capacity(needed * 6);
        for &b in &rest[..needed] {
            if !(63..127).contains(&b) {
                return Err(GraphError::Graph6(format!("bad byte {b}")));
            }
            let v = b - 63;
            for i in (0..6).rev() {
                bits.push(v & (1 << i) != 0);
            }
        }
        let mut g = SimpleGraph::new(n);
        let mut k = 0;
        for v in 1..n {
            for u in 0..v {
                if bits[k] {
                    g.add_edge(u, v);
                }
                k += 1;
            }
        }
        Ok(g)
    }

    /// Canonical labeling code for small graphs (brute force over
    /// degree-compatible permutations).  Used only to deduplicate abstract
    /// graphs in the census at desk scale.
    pub fn canonical_code(&self) -> Vec<u64> {
        let n = self.n;
        assert!(n <= 16, "abstract canonical form limited to n <= 16");
        let mut best: Option<Vec<u64>> = None;
        // group vertices by (degree, sorted neighbor degrees) to cut the
        // permutation space
        let mut key: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut ds: Vec<usize> = self.adj[v].iter().map(|&w| self.degree(w)).collect();
                ds.sort();
                (self.degree(v), ds)
            })
            .collect();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut sorted_keys: Vec<(usize, Vec<usize>)> = key.clone();
        sorted_keys.sort();
        sorted_keys.dedup();
        for k in &sorted_keys {
            classes.push((0..n).filter(|&v| key[v] == *k).collect());
        }
        key.sort();
        let mut perm = vec![usize::MAX; n];
        let mut used = vec![false; n];
        self.canon_dfs(&classes, 0, 0, &mut perm, &mut used, &mut best);
        best.unwrap()
    }

    fn encode_under(&self, perm: &[usize]) -> Vec<u64> {
        // perm[v] = new label of v; adjacency rows of the relabeled graph
        let n = self.n;
        let mut rows = vec![0u64; n];
        for u in 0..n {
            for &v in &self.adj[u] {
                rows[perm[u]] |= 1 << perm[v];
            }
        }
        rows
    }

    fn canon_dfs(
        &self,
        classes: &[Vec<usize>],
        class_idx: usize,
        next_label: usize,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        best: &mut Option<Vec<u64>>,
    ) {
        if class_idx == classes.len() {
            let code = self.encode_under(perm);
            if best.as_ref().map_or(true, |b| code < *b) {
                *best = Some(code);
            }
            return;
        }
        let members = &classes[class_idx];
        self.canon_class_dfs(classes, class_idx, members, next_label, perm, used, best);
    }

    fn canon_class_dfs(
        &self,
        classes: &[Vec<usize>],
        class_idx: usize,
        members: &[usize],
        next_label: usize,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        best: &mut Option<Vec<u64>>,
    ) {
        let remaining: Vec<usize> = members.iter().copied().filter(|&v| !used[v]).collect();
        if remaining.is_empty() {
            self.canon_dfs(classes, class_idx + 1, next_label, perm, used, best);
            return;
        }
        for &v in &remaining {
            perm[v] = next_label;
            used[v] = true;
            self.canon_class_dfs(classes, class_idx, members, next_label + 1, perm, used, best);
            used[v] = false;
            perm[v] = usize::MAX;
        }
    }
}

/// Canonical representative of a cycle given as a vertex sequence: rotate
/// to the least vertex, then pick the direction with the smaller successor.
pub fn canonical_cycle(cycle: &[usize]) -> Vec<usize> {
    let n = cycle.len();
    let (pos, _) = cycle.iter().enumerate().min_by_key(|&(_, v)| v).unwrap();
    let fwd: Vec<usize> = (0..n).map(|i| cycle[(pos + i) % n]).collect();
    let bwd: Vec<usize> = (0..n).map(|i| cycle[(pos + n - i) % n]).collect();
    if fwd <= bwd {
        fwd
    } else {
        bwd
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> SimpleGraph {
        SimpleGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    }

    fn c5() -> SimpleGraph {
        SimpleGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])
    }

    #[test]
    fn basic_counts() {
        let g = k4();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.triangles().len(), 4);
        assert_eq!(g.girth(), Some(3));
        assert!(g.is_2_connected());
    }

    #[test]
    fn cycles_enumeration() {
        let g = c5();
        assert_eq!(g.cycles_of_length(5).len(), 1);
        assert_eq!(g.cycles_of_length(4).len(), 0);
        assert_eq!(g.girth(), Some(5));
        let q3 = SimpleGraph::from_edges(
            8,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 0),
                (4, 5),
                (5, 6),
                (6, 7),
                (7, 4),
                (0, 4),
                (1, 5),
                (2, 6),
                (3, 7),
            ],
        );
        assert_eq!(q3.cycles_of_length(4).len(), 6);
        assert!(q3.is_bipartite());
    }

    #[test]
    fn graph6_roundtrip() {
        for g in [k4(), c5()] {
            let s = g.to_graph6();
            let h = SimpleGraph::from_graph6(&s).unwrap();
            assert_eq!(g, h);
        }
        // petgraph example value: 5 vertices, edges 0-2, 0-4, 1-3, 3-4
        let g = SimpleGraph::from_edges(5, &[(0, 2), (0, 4), (1, 3), (3, 4)]);
        assert_eq!(g.to_graph6(), "DQc");
    }

    #[test]
    fn subgraph_isomorphism() {
        let g = k4();
        assert!(g.has_subgraph_isomorphic_to(&c5()) == false);
        let tri = SimpleGraph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]);
        assert!(g.has_subgraph_isomorphic_to(&tri));
        let p3 = SimpleGraph::from_edges(3, &[(0, 1), (1, 2)]);
        assert!(c5().has_subgraph_isomorphic_to(&p3));
    }

    #[test]
    fn canonical_code_invariance() {
        let g1 = SimpleGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let g2 = SimpleGraph::from_edges(5, &[(2, 0), (0, 3), (3, 1), (1, 4), (4, 2)]);
        assert_eq!(g1.canonical_code(), g2.canonical_code());
        let p5 = SimpleGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_ne!(g1.canonical_code(), p5.canonical_code());
    }

    #[test]
    fn paths_between_bounded() {
        let g = c5();
        let paths = g.paths_between(0, 2, 3, &BTreeSet::new());
        // 0-1-2 and 0-4-3-2
        assert_eq!(paths.len(), 2);
    }
}
