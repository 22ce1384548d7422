//! Normal embeddings of simple graphs in surfaces with rings.
//!
//! An embedding is a rotation system with edge signs plus an explicit
//! partition of the derived facial walks into faces, each face carrying a
//! genus label.  Cellular embeddings have every face label (genus 0, one
//! walk); the partition is what lets a face be an annulus, a punctured
//! torus, or anything else the surgeries produce.  Euler's formula over the
//! face records pins the Euler genus of the closed-up surface exactly:
//!
//!   V - E + sum_f (2 - g_f - b_f) = 2 - g
//!
//! Rings mark the boundary structure: a facial ring is a face whose single
//! walk is a cycle (the patched cuff), a vertex ring is a vertex on a cuff
//! otherwise buried in an internal face.

mod emg;
mod surgery;

pub use emg::{parse_emg, write_emg};
pub use surgery::{SurgeryMaps, WorkMap};

use crate::graph::SimpleGraph;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;
pub type WalkId = usize;
pub type FaceId = usize;
pub type RingId = usize;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum MapError {
    #[error("not a simple graph: {0}")]
    NotSimple(String),
    #[error("euler mismatch: {0}")]
    EulerMismatch(String),
    #[error("embedding is not normal: {0}")]
    NotNormal(String),
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("not a cycle: {0}")]
    NotACycle(String),
    #[error("not a simple curve: {0}")]
    NotSimpleCurve(String),
    #[error("ring face has no internal classification")]
    RingFace,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// One end of an edge: `end` 0 sits at the edge's `u`, 1 at `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dart {
    pub edge: EdgeId,
    pub end: u8,
}

impl Dart {
    pub fn new(edge: EdgeId, end: u8) -> Dart {
        Dart { edge, end }
    }
    fn id(self) -> usize {
        self.edge * 2 + self.end as usize
    }
}

/// A directed traversal of an edge; `rev` false runs u -> v.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub edge: EdgeId,
    pub rev: bool,
}

impl Arc {
    pub fn new(edge: EdgeId, rev: bool) -> Arc {
        Arc { edge, rev }
    }
    pub fn reversed(self) -> Arc {
        Arc {
            edge: self.edge,
            rev: !self.rev,
        }
    }
    /// Dart at the head (arrival) vertex.
    pub fn head_dart(self) -> Dart {
        Dart::new(self.edge, if self.rev { 0 } else { 1 })
    }
    /// Dart at the tail (departure) vertex.
    pub fn tail_dart(self) -> Dart {
        Dart::new(self.edge, if self.rev { 1 } else { 0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRec {
    pub u: VertexId,
    pub v: VertexId,
    /// Sign of the edge: true encodes a negative (orientation-reversing) edge.
    pub negative: bool,
}

impl EdgeRec {
    pub fn endpoint(&self, end: u8) -> VertexId {
        if end == 0 {
            self.u
        } else {
            self.v
        }
    }
    pub fn other(&self, w: VertexId) -> VertexId {
        if self.u == w {
            self.v
        } else {
            self.u
        }
    }
}

/// A facial walk: either a closed arc sequence (with the traversal
/// orientation alongside) or a lone vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub arcs: Vec<Arc>,
    pub sigmas: Vec<bool>,
    pub lone_vertex: Option<VertexId>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.arcs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }
    fn sort_key(&self) -> (bool, Vec<(usize, bool)>, Vec<usize>) {
        match self.lone_vertex {
            Some(v) => (true, Vec::new(), vec![v]),
            None => (
                false,
                self.arcs.iter().map(|a| (a.edge, a.rev)).collect(),
                Vec::new(),
            ),
        }
    }
}

/// A face of the embedding: a set of walks plus a genus label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceRecord {
    pub walks: Vec<WalkId>,
    pub genus: usize,
    pub ring: Option<RingId>,
}

impl FaceRecord {
    pub fn is_ring_face(&self) -> bool {
        self.ring.is_some()
    }
}

/// Classification of an internal face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceClass {
    Open2Cell,
    Closed2Cell,
    Neither,
}

/// Ring designation: a facial ring is the boundary cycle of a ring face; a
/// vertex ring is a single vertex on a cuff, with the face holding its cuff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ring {
    Facial { face: FaceId, walk: WalkId },
    Vertex { vertex: VertexId, weak: bool, cuff_face: FaceId },
}

/// Mutable core shared by the finished graph and the surgery scratch map.
#[derive(Debug, Clone)]
pub(crate) struct RawMap {
    pub alive: Vec<bool>,
    pub edges: Vec<Option<EdgeRec>>,
    pub rot: Vec<Vec<Dart>>,
}

impl RawMap {
    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.alive.len()).filter(|&v| self.alive[v])
    }
    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).filter(|&e| self.edges[e].is_some())
    }
    pub fn edge(&self, e: EdgeId) -> &EdgeRec {
        self.edges[e].as_ref().expect("dead edge")
    }
    pub fn arc_tail(&self, a: Arc) -> VertexId {
        let rec = self.edge(a.edge);
        if a.rev {
            rec.v
        } else {
            rec.u
        }
    }
    pub fn arc_head(&self, a: Arc) -> VertexId {
        let rec = self.edge(a.edge);
        if a.rev {
            rec.u
        } else {
            rec.v
        }
    }
    pub fn dart_vertex(&self, d: Dart) -> VertexId {
        self.edge(d.edge).endpoint(d.end)
    }
}

/// A state of the face-traversal: an arc together with the orientation
/// carried while traversing it.
pub(crate) type State = (Arc, bool);

pub(crate) fn rev_state(raw: &RawMap, s: State) -> State {
    let (a, sigma) = s;
    let neg = raw.edge(a.edge).negative;
    (a.reversed(), !(sigma ^ neg))
}

/// Result of tracing: walks in canonical order plus the assignment of
/// rotation gaps to walks.  Gap (v, i) is the corner between rot[v][i] and
/// its cyclic successor; each gap belongs to exactly one walk.
#[derive(Debug, Clone)]
pub(crate) struct Trace {
    pub walks: Vec<Walk>,
    pub gap_walk: BTreeMap<(VertexId, usize), WalkId>,
    pub lone_walk: BTreeMap<VertexId, WalkId>,
}

impl Trace {
    pub fn walk_of_gap(&self, v: VertexId, gap: usize) -> WalkId {
        self.gap_walk[&(v, gap)]
    }
}

pub(crate) fn next_state(
    raw: &RawMap,
    pos: &BTreeMap<usize, (VertexId, usize)>,
    s: State,
) -> (State, (VertexId, usize)) {
    let (arc, sigma) = s;
    let neg = raw.edge(arc.edge).negative;
    let sigma2 = sigma ^ neg;
    let d = arc.head_dart();
    let (h, i) = pos[&d.id()];
    let deg = raw.rot[h].len();
    let j = if sigma2 { (i + 1) % deg } else { (i + deg - 1) % deg };
    let d2 = raw.rot[h][j];
    let arc2 = Arc::new(d2.edge, d2.end == 1);
    let gap = if sigma2 { i } else { j };
    ((arc2, sigma2), (h, gap))
}

fn dart_positions(raw: &RawMap) -> Result<BTreeMap<usize, (VertexId, usize)>, MapError> {
    let mut pos = BTreeMap::new();
    for v in raw.vertex_ids() {
        for (i, &d) in raw.rot[v].iter().enumerate() {
            if raw.edges.get(d.edge).and_then(|e| e.as_ref()).is_none() || d.end > 1 {
                return Err(MapError::DanglingReference(format!(
                    "rotation of vertex {v} references missing dart {d:?}"
                )));
            }
            if raw.dart_vertex(d) != v {
                return Err(MapError::DanglingReference(format!(
                    "dart {d:?} listed at vertex {v} but belongs to vertex {}",
                    raw.dart_vertex(d)
                )));
            }
            if pos.insert(d.id(), (v, i)).is_some() {
                return Err(MapError::DanglingReference(format!(
                    "dart {d:?} appears twice in rotations"
                )));
            }
        }
    }
    for e in raw.edge_ids() {
        for end in 0..2u8 {
            if !pos.contains_key(&Dart::new(e, end).id()) {
                return Err(MapError::DanglingReference(format!(
                    "dart {e}.{end} missing from rotations"
                )));
            }
        }
    }
    Ok(pos)
}

/// Canonical cyclic representative of an orbit: least rotation of the arc
/// sequence, ties broken by the sigma sequence.
fn canonical_rotation(arcs: &[Arc], sigmas: &[bool]) -> (Vec<Arc>, Vec<bool>) {
    let n = arcs.len();
    let mut best: Option<(Vec<Arc>, Vec<bool>)> = None;
    for start in 0..n {
        let ca: Vec<Arc> = (0..n).map(|k| arcs[(start + k) % n]).collect();
        let cs: Vec<bool> = (0..n).map(|k| sigmas[(start + k) % n]).collect();
        if best
            .as_ref()
            .map_or(true, |(ba, bs)| (&ca, &cs) < (&(ba.clone()), &(bs.clone())))
        {
            best = Some((ca, cs));
        }
    }
    best.expect("nonempty orbit")
}

/// Traces all facial walks of the raw map.
pub(crate) fn trace_walks(raw: &RawMap) -> Result<Trace, MapError> {
    let pos = dart_positions(raw)?;
    let slots = raw.edges.len() * 4;
    let state_id = |s: State| -> usize {
        let (a, sigma) = s;
        (a.edge * 2 + a.rev as usize) * 2 + sigma as usize
    };
    let mut orbit_of = vec![usize::MAX; slots];
    let mut orbits: Vec<Vec<State>> = Vec::new();
    let mut orbit_gaps: Vec<Vec<(VertexId, usize)>> = Vec::new();
    for e in raw.edge_ids() {
        for rev in [false, true] {
            for sigma in [false, true] {
                let s0 = (Arc::new(e, rev), sigma);
                if orbit_of[state_id(s0)] != usize::MAX {
                    continue;
                }
                let idx = orbits.len();
                let mut states = Vec::new();
                let mut gaps = Vec::new();
                let mut s = s0;
                loop {
                    orbit_of[state_id(s)] = idx;
                    states.push(s);
                    let (s2, gap) = next_state(raw, &pos, s);
                    gaps.push(gap);
                    if s2 == s0 {
                        break;
                    }
                    if states.len() > slots {
                        return Err(MapError::Internal("face traversal does not close".into()));
                    }
                    s = s2;
                }
                orbits.push(states);
                orbit_gaps.push(gaps);
            }
        }
    }

    // pair orbits with their reversals
    let mut partner = vec![usize::MAX; orbits.len()];
    for (idx, states) in orbits.iter().enumerate() {
        let r = orbit_of[state_id(rev_state(raw, states[0]))];
        if r == idx {
            return Err(MapError::Internal(
                "self-paired face orbit; embedding data is inconsistent".into(),
            ));
        }
        partner[idx] = r;
    }

    // build one walk per pair, canonically
    let mut walks: Vec<Walk> = Vec::new();
    let mut walk_sources: Vec<Vec<usize>> = Vec::new(); // orbit indices per walk
    let mut claimed = vec![false; orbits.len()];
    for idx in 0..orbits.len() {
        if claimed[idx] {
            continue;
        }
        let p = partner[idx];
        claimed[idx] = true;
        claimed[p] = true;
        let mk = |i: usize| -> (Vec<Arc>, Vec<bool>) {
            let arcs: Vec<Arc> = orbits[i].iter().map(|s| s.0).collect();
            let sigmas: Vec<bool> = orbits[i].iter().map(|s| s.1).collect();
            canonical_rotation(&arcs, &sigmas)
        };
        let (a1, s1) = mk(idx);
        let (a2, s2) = mk(p);
        let (arcs, sigmas) = if (&a1, &s1) <= (&a2, &s2) { (a1, s1) } else { (a2, s2) };
        walks.push(Walk {
            arcs,
            sigmas,
            lone_vertex: None,
        });
        walk_sources.push(vec![idx, p]);
    }

    // lone-vertex walks for isolated vertices
    let mut lone_vertices: Vec<VertexId> = raw
        .vertex_ids()
        .filter(|&v| raw.rot[v].is_empty())
        .collect();
    lone_vertices.sort();

    // canonical global order
    let mut order: Vec<usize> = (0..walks.len()).collect();
    order.sort_by_key(|&w| walks[w].sort_key());
    let mut sorted_walks: Vec<Walk> = order.iter().map(|&w| walks[w].clone()).collect();
    let mut orbit_to_walk: BTreeMap<usize, WalkId> = BTreeMap::new();
    for (new_id, &old_id) in order.iter().enumerate() {
        for &o in &walk_sources[old_id] {
            orbit_to_walk.insert(o, new_id);
        }
    }
    let mut lone_walk = BTreeMap::new();
    for &v in &lone_vertices {
        let id = sorted_walks.len();
        sorted_walks.push(Walk {
            arcs: Vec::new(),
            sigmas: Vec::new(),
            lone_vertex: Some(v),
        });
        lone_walk.insert(v, id);
    }

    // gap assignment
    let mut gap_walk = BTreeMap::new();
    for (idx, gaps) in orbit_gaps.iter().enumerate() {
        let w = orbit_to_walk[&idx];
        for &gap in gaps {
            if let Some(prev) = gap_walk.insert(gap, w) {
                if prev != w {
                    return Err(MapError::Internal(format!(
                        "gap {gap:?} claimed by two walks"
                    )));
                }
            }
        }
    }

    Ok(Trace {
        walks: sorted_walks,
        gap_walk,
        lone_walk,
    })
}

/// Declarative description of an embedded graph, the builder input.
#[derive(Debug, Clone, Default)]
pub struct MapSpec {
    pub vertex_count: usize,
    /// (u, v, negative)
    pub edges: Vec<(usize, usize, bool)>,
    pub rotations: Vec<Vec<Dart>>,
    /// (genus, walk indices into the canonical facial-walk order)
    pub faces: Vec<(usize, Vec<usize>)>,
    pub rings: Vec<RingSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RingSpec {
    Facial { face: usize },
    Vertex { vertex: usize, weak: bool, cuff_face: usize },
}

/// A validated embedded graph.  Immutable; surgeries return new values.
#[derive(Debug, Clone)]
pub struct EmbeddedGraph {
    raw: RawMap,
    walks: Vec<Walk>,
    faces: Vec<FaceRecord>,
    rings: Vec<Ring>,
    face_of_walk: Vec<FaceId>,
    gap_walk: BTreeMap<(VertexId, usize), WalkId>,
    genus: usize,
}

impl EmbeddedGraph {
    pub fn build(spec: &MapSpec) -> Result<EmbeddedGraph, MapError> {
        let n = spec.vertex_count;
        // edges
        let mut pairs = BTreeSet::new();
        let mut edges = Vec::with_capacity(spec.edges.len());
        for &(u, v, negative) in &spec.edges {
            if u >= n || v >= n {
                return Err(MapError::DanglingReference(format!(
                    "edge ({u},{v}) exceeds vertex count {n}"
                )));
            }
            if u == v {
                return Err(MapError::NotSimple(format!("loop at vertex {u}")));
            }
            if !pairs.insert((u.min(v), u.max(v))) {
                return Err(MapError::NotSimple(format!("parallel edge ({u},{v})")));
            }
            edges.push(Some(EdgeRec { u, v, negative }));
        }
        if spec.rotations.len() != n {
            return Err(MapError::DanglingReference(format!(
                "expected {n} rotation lines, got {}",
                spec.rotations.len()
            )));
        }
        let raw = RawMap {
            alive: vec![true; n],
            edges,
            rot: spec.rotations.clone(),
        };
        let trace = trace_walks(&raw)?;
        Self::assemble(raw, trace, &spec.faces, &spec.rings)
    }

    /// Builds a cellular embedding: every traced walk becomes a genus-0
    /// face.  Rings are located from their descriptions.
    pub fn build_cellular(
        vertex_count: usize,
        edges: &[(usize, usize, bool)],
        rotations: &[Vec<Dart>],
        facial_ring_cycles: &[Vec<VertexId>],
        vertex_rings: &[(VertexId, bool)],
    ) -> Result<EmbeddedGraph, MapError> {
        let raw = RawMap {
            alive: vec![true; vertex_count],
            edges: edges
                .iter()
                .map(|&(u, v, neg)| Some(EdgeRec { u, v, negative: neg }))
                .collect(),
            rot: rotations.to_vec(),
        };
        let trace = trace_walks(&raw)?;
        let faces: Vec<(usize, Vec<usize>)> =
            (0..trace.walks.len()).map(|w| (0, vec![w])).collect();
        let mut rings = Vec::new();
        for cyc in facial_ring_cycles {
            let mut found = None;
            for (w, walk) in trace.walks.iter().enumerate() {
                if let Some(vs) = walk_cycle_vertices(&raw, walk) {
                    if cycles_equal(&vs, cyc) {
                        found = Some(w);
                        break;
                    }
                }
            }
            match found {
                Some(w) => rings.push(RingSpec::Facial { face: w }),
                None => {
                    return Err(MapError::NotNormal(format!(
                        "no facial walk matches declared ring cycle {cyc:?}"
                    )))
                }
            }
        }
        for &(v, weak) in vertex_rings {
            // cuff face: the unique face incident with v
            let mut incident = BTreeSet::new();
            for (w, walk) in trace.walks.iter().enumerate() {
                if walk.lone_vertex == Some(v)
                    || walk.arcs.iter().any(|&a| raw.arc_tail(a) == v)
                {
                    incident.insert(w);
                }
            }
            if incident.len() != 1 {
                return Err(MapError::NotNormal(format!(
                    "vertex ring {v} is incident with {} faces; specify the cuff face explicitly",
                    incident.len()
                )));
            }
            rings.push(RingSpec::Vertex {
                vertex: v,
                weak,
                cuff_face: *incident.iter().next().unwrap(),
            });
        }
        Self::assemble(raw, trace, &faces, &rings)
    }

    pub(crate) fn assemble(
        raw: RawMap,
        trace: Trace,
        face_specs: &[(usize, Vec<usize>)],
        ring_specs: &[RingSpec],
    ) -> Result<EmbeddedGraph, MapError> {
        let nw = trace.walks.len();
        let mut face_of_walk = vec![usize::MAX; nw];
        let mut faces = Vec::with_capacity(face_specs.len());
        for (fi, (genus, walk_ids)) in face_specs.iter().enumerate() {
            if walk_ids.is_empty() {
                return Err(MapError::EulerMismatch(format!("face {fi} has no walks")));
            }
            let mut ws = walk_ids.clone();
            ws.sort();
            ws.dedup();
            if ws.len() != walk_ids.len() {
                return Err(MapError::EulerMismatch(format!(
                    "face {fi} repeats a walk"
                )));
            }
            for &w in &ws {
                if w >= nw {
                    return Err(MapError::DanglingReference(format!(
                        "face {fi} references walk {w} of {nw}"
                    )));
                }
                if face_of_walk[w] != usize::MAX {
                    return Err(MapError::EulerMismatch(format!(
                        "walk {w} assigned to two faces"
                    )));
                }
                face_of_walk[w] = fi;
            }
            faces.push(FaceRecord {
                walks: ws,
                genus: *genus,
                ring: None,
            });
        }
        if let Some(w) = face_of_walk.iter().position(|&f| f == usize::MAX) {
            return Err(MapError::EulerMismatch(format!(
                "facial walk {w} not assigned to any face"
            )));
        }

        // Euler genus
        let nv = raw.vertex_ids().count() as i64;
        let ne = raw.edge_ids().count() as i64;
        let chi_faces: i64 = faces
            .iter()
            .map(|f| 2 - f.genus as i64 - f.walks.len() as i64)
            .sum();
        let chi = nv - ne + chi_faces;
        let genus = 2 - chi;
        if genus < 0 {
            return Err(MapError::EulerMismatch(format!(
                "V - E + sum chi(f) = {chi} exceeds 2; face partition inconsistent"
            )));
        }

        // surface connectivity: components and faces glued along walks
        if nv > 0 {
            let g_abs = raw_simple_graph(&raw);
            let comps = g_abs.components();
            let comp_of = {
                let mut m = vec![usize::MAX; raw.alive.len()];
                for (ci, comp) in comps.iter().enumerate() {
                    for &v in comp {
                        m[v] = ci;
                    }
                }
                m
            };
            let mut uf = UnionFind::new(comps.len() + faces.len());
            for (fi, f) in faces.iter().enumerate() {
                for &w in &f.walks {
                    let walk = &trace.walks[w];
                    let v = match walk.lone_vertex {
                        Some(v) => v,
                        None => raw.arc_tail(walk.arcs[0]),
                    };
                    uf.union(comp_of[v], comps.len() + fi);
                }
            }
            let root = uf.find(0);
            for x in 0..comps.len() + faces.len() {
                if uf.find(x) != root {
                    return Err(MapError::EulerMismatch(
                        "face/graph incidence structure is disconnected; not a single surface"
                            .into(),
                    ));
                }
            }
        }

        // rings
        let mut rings = Vec::with_capacity(ring_specs.len());
        let mut ring_vertex_seen: BTreeSet<VertexId> = BTreeSet::new();
        for (ri, rs) in ring_specs.iter().enumerate() {
            match rs {
                RingSpec::Facial { face } => {
                    let fi = *face;
                    if fi >= faces.len() {
                        return Err(MapError::DanglingReference(format!(
                            "ring {ri} references face {fi}"
                        )));
                    }
                    let rec = &faces[fi];
                    if rec.walks.len() != 1 || rec.genus != 0 {
                        return Err(MapError::NotNormal(format!(
                            "ring face {fi} must be a disk with one walk"
                        )));
                    }
                    let w = rec.walks[0];
                    let cyc = walk_cycle_vertices(&raw, &trace.walks[w]).ok_or_else(|| {
                        MapError::NotNormal(format!("ring walk {w} is not a cycle"))
                    })?;
                    if faces[fi].ring.is_some() {
                        return Err(MapError::NotNormal(format!(
                            "face {fi} designated as two ring faces"
                        )));
                    }
                    for &v in &cyc {
                        if !ring_vertex_seen.insert(v) {
                            return Err(MapError::NotNormal(format!(
                                "vertex {v} lies on two rings"
                            )));
                        }
                    }
                    faces[fi].ring = Some(ri);
                    rings.push(Ring::Facial { face: fi, walk: w });
                }
                RingSpec::Vertex { vertex, weak, cuff_face } => {
                    let v = *vertex;
                    let fi = *cuff_face;
                    if v >= raw.alive.len() || !raw.alive[v] {
                        return Err(MapError::DanglingReference(format!(
                            "vertex ring {v} does not exist"
                        )));
                    }
                    if fi >= faces.len() {
                        return Err(MapError::DanglingReference(format!(
                            "vertex ring {v} cuff face {fi} does not exist"
                        )));
                    }
                    let incident = faces[fi].walks.iter().any(|&w| {
                        let walk = &trace.walks[w];
                        walk.lone_vertex == Some(v)
                            || walk.arcs.iter().any(|&a| raw.arc_tail(a) == v)
                    });
                    if !incident {
                        return Err(MapError::NotNormal(format!(
                            "vertex ring {v} is not incident with its cuff face {fi}"
                        )));
                    }
                    if !ring_vertex_seen.insert(v) {
                        return Err(MapError::NotNormal(format!(
                            "vertex {v} lies on two rings"
                        )));
                    }
                    rings.push(Ring::Vertex {
                        vertex: v,
                        weak: *weak,
                        cuff_face: fi,
                    });
                }
            }
        }
        // ring faces must not serve as cuff faces
        for r in &rings {
            if let Ring::Vertex { cuff_face, vertex, .. } = r {
                if faces[*cuff_face].ring.is_some() {
                    return Err(MapError::NotNormal(format!(
                        "cuff face of vertex ring {vertex} is a ring face"
                    )));
                }
            }
        }

        Ok(EmbeddedGraph {
            face_of_walk,
            gap_walk: trace.gap_walk,
            walks: trace.walks,
            faces,
            rings,
            raw,
            genus: genus as usize,
        })
    }

    // ----- accessors -------------------------------------------------------

    pub fn vertex_count(&self) -> usize {
        self.raw.alive.len()
    }
    pub fn edge_count(&self) -> usize {
        self.raw.edges.len()
    }
    pub fn edge(&self, e: EdgeId) -> &EdgeRec {
        self.raw.edge(e)
    }
    pub fn edges_iter(&self) -> impl Iterator<Item = (EdgeId, &EdgeRec)> + '_ {
        self.raw
            .edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.as_ref().map(|r| (i, r)))
    }
    pub fn degree(&self, v: VertexId) -> usize {
        self.raw.rot[v].len()
    }
    pub fn rotation(&self, v: VertexId) -> &[Dart] {
        &self.raw.rot[v]
    }
    pub fn arc_tail(&self, a: Arc) -> VertexId {
        self.raw.arc_tail(a)
    }
    pub fn arc_head(&self, a: Arc) -> VertexId {
        self.raw.arc_head(a)
    }
    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        self.raw.rot[v]
            .iter()
            .map(|d| self.raw.edge(d.edge).other(v))
            .collect()
    }
    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.raw.rot[u]
            .iter()
            .map(|d| d.edge)
            .find(|&e| self.raw.edge(e).other(u) == v)
    }
    pub fn walks(&self) -> &[Walk] {
        &self.walks
    }
    pub fn walk(&self, w: WalkId) -> &Walk {
        &self.walks[w]
    }
    pub fn faces(&self) -> &[FaceRecord] {
        &self.faces
    }
    pub fn face(&self, f: FaceId) -> &FaceRecord {
        &self.faces[f]
    }
    pub fn face_of_walk(&self, w: WalkId) -> FaceId {
        self.face_of_walk[w]
    }
    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }
    pub fn ring(&self, r: RingId) -> &Ring {
        &self.rings[r]
    }
    pub fn euler_genus(&self) -> usize {
        self.genus
    }
    pub(crate) fn raw(&self) -> &RawMap {
        &self.raw
    }
    pub(crate) fn walk_of_gap(&self, v: VertexId, gap: usize) -> WalkId {
        self.gap_walk[&(v, gap)]
    }

    pub fn internal_faces(&self) -> impl Iterator<Item = FaceId> + '_ {
        (0..self.faces.len()).filter(|&f| !self.faces[f].is_ring_face())
    }

    /// |f|: walk lengths summed, with lone vertex-ring walks contributing
    /// |R| (0 for weak, 1 otherwise) and other lone vertices 0.
    pub fn face_size(&self, f: FaceId) -> usize {
        self.faces[f]
            .walks
            .iter()
            .map(|&w| self.walk_size(w))
            .sum()
    }

    pub fn walk_size(&self, w: WalkId) -> usize {
        let walk = &self.walks[w];
        match walk.lone_vertex {
            Some(v) => match self.vertex_ring_weak(v) {
                Some(true) => 0,
                Some(false) => 1,
                None => 0,
            },
            None => walk.arcs.len(),
        }
    }

    pub fn face_is_open_2cell(&self, f: FaceId) -> bool {
        let rec = &self.faces[f];
        rec.genus == 0 && rec.walks.len() == 1
    }

    /// Vertices of a walk in traversal order (tails of its arcs).
    pub fn walk_vertices(&self, w: WalkId) -> Vec<VertexId> {
        let walk = &self.walks[w];
        match walk.lone_vertex {
            Some(v) => vec![v],
            None => walk.arcs.iter().map(|&a| self.raw.arc_tail(a)).collect(),
        }
    }

    /// When the walk is a cycle (no repeated vertices, length >= 3), its
    /// vertex sequence.
    pub fn walk_cycle(&self, w: WalkId) -> Option<Vec<VertexId>> {
        walk_cycle_vertices(&self.raw, &self.walks[w])
    }

    pub fn face_class(&self, f: FaceId) -> Result<FaceClass, MapError> {
        let rec = &self.faces[f];
        if rec.is_ring_face() {
            return Err(MapError::RingFace);
        }
        if !self.face_is_open_2cell(f) {
            return Ok(FaceClass::Neither);
        }
        if self.walk_cycle(rec.walks[0]).is_some() {
            Ok(FaceClass::Closed2Cell)
        } else {
            Ok(FaceClass::Open2Cell)
        }
    }

    pub fn ring_length(&self, r: RingId) -> usize {
        match self.rings[r] {
            Ring::Facial { walk, .. } => self.walks[walk].len(),
            Ring::Vertex { weak, .. } => {
                if weak {
                    0
                } else {
                    1
                }
            }
        }
    }

    pub fn total_ring_length(&self) -> usize {
        (0..self.rings.len()).map(|r| self.ring_length(r)).sum()
    }

    /// (weak, non-weak) vertex-ring counts.
    pub fn vertex_ring_counts(&self) -> (usize, usize) {
        let mut t0 = 0;
        let mut t1 = 0;
        for r in &self.rings {
            if let Ring::Vertex { weak, .. } = r {
                if *weak {
                    t0 += 1;
                } else {
                    t1 += 1;
                }
            }
        }
        (t0, t1)
    }

    pub fn vertex_ring_weak(&self, v: VertexId) -> Option<bool> {
        self.rings.iter().find_map(|r| match r {
            Ring::Vertex { vertex, weak, .. } if *vertex == v => Some(*weak),
            _ => None,
        })
    }

    /// Vertices incident with any ring.
    pub fn ring_vertices(&self) -> BTreeSet<VertexId> {
        let mut out = BTreeSet::new();
        for r in 0..self.rings.len() {
            out.extend(self.ring_vertex_set(r));
        }
        out
    }

    pub fn ring_vertex_set(&self, r: RingId) -> BTreeSet<VertexId> {
        match self.rings[r] {
            Ring::Facial { walk, .. } => self.walk_vertices(walk).into_iter().collect(),
            Ring::Vertex { vertex, .. } => [vertex].into_iter().collect(),
        }
    }

    pub fn is_ring_vertex(&self, v: VertexId) -> bool {
        self.rings_incident_to_vertex(v).next().is_some()
    }

    pub fn rings_incident_to_vertex(&self, v: VertexId) -> impl Iterator<Item = RingId> + '_ {
        (0..self.rings.len()).filter(move |&r| self.ring_vertex_set(r).contains(&v))
    }

    /// Edges lying on facial rings.
    pub fn ring_edges(&self) -> BTreeSet<EdgeId> {
        let mut out = BTreeSet::new();
        for r in &self.rings {
            if let Ring::Facial { walk, .. } = r {
                out.extend(self.walks[*walk].arcs.iter().map(|a| a.edge));
            }
        }
        out
    }

    pub fn to_simple_graph(&self) -> SimpleGraph {
        raw_simple_graph(&self.raw)
    }

    /// The edge set of a vertex cycle, when every consecutive pair is
    /// adjacent and the vertices are distinct.
    pub fn cycle_edges(&self, cycle: &[VertexId]) -> Result<Vec<EdgeId>, MapError> {
        if cycle.len() < 3 {
            return Err(MapError::NotACycle(format!("length {}", cycle.len())));
        }
        let set: BTreeSet<_> = cycle.iter().collect();
        if set.len() != cycle.len() {
            return Err(MapError::NotACycle("repeated vertex".into()));
        }
        let mut edges = Vec::with_capacity(cycle.len());
        for i in 0..cycle.len() {
            let u = cycle[i];
            let v = cycle[(i + 1) % cycle.len()];
            match self.edge_between(u, v) {
                Some(e) => edges.push(e),
                None => {
                    return Err(MapError::NotACycle(format!("missing edge ({u},{v})")));
                }
            }
        }
        Ok(edges)
    }

    /// True when some closed-2-cell internal face is bounded by exactly
    /// this cycle.
    pub fn cycle_bounds_2cell_face(&self, cycle: &[VertexId]) -> bool {
        for f in self.internal_faces() {
            if self.faces[f].walks.len() == 1 && self.faces[f].genus == 0 {
                if let Some(vs) = self.walk_cycle(self.faces[f].walks[0]) {
                    if cycles_equal(&vs, cycle) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Internal faces that are closed 2-cells bounded by a 4-cycle.
    pub fn quad_faces(&self) -> Vec<FaceId> {
        self.internal_faces()
            .filter(|&f| {
                self.face_size(f) == 4
                    && matches!(self.face_class(f), Ok(FaceClass::Closed2Cell))
            })
            .collect()
    }

    /// Omnipresence of a non-open-2-cell internal face: every walk is a
    /// lone vertex ring, or a cycle whose far side is a disk containing
    /// exactly one ring.
    ///
    /// Panics if `f` is a ring face or open 2-cell (caller contract).
    pub fn is_omnipresent(&self, f: FaceId) -> bool {
        assert!(!self.faces[f].is_ring_face(), "ring face");
        assert!(!self.face_is_open_2cell(f), "open 2-cell face");
        crate::topology::face_is_omnipresent(self, f)
    }

    // ----- canonical form --------------------------------------------------

    /// Canonical code of a cellular embedding modulo map isomorphism
    /// (relabeling, vertex flips, reflection).  `ring_rooted` restricts
    /// roots to arcs of facial-ring walks, which additionally quotients by
    /// symmetries of the ring only.
    pub fn canonical_form(&self, ring_rooted: bool) -> Vec<i64> {
        let roots: Vec<Arc> = if ring_rooted {
            let mut arcs = Vec::new();
            for r in &self.rings {
                if let Ring::Facial { walk, .. } = r {
                    for &a in &self.walks[*walk].arcs {
                        arcs.push(a);
                        arcs.push(a.reversed());
                    }
                }
            }
            arcs
        } else {
            self.raw
                .edge_ids()
                .flat_map(|e| [Arc::new(e, false), Arc::new(e, true)])
                .collect()
        };
        assert!(!roots.is_empty(), "canonical form needs at least one root arc");
        let mut best: Option<Vec<i64>> = None;
        for &root in &roots {
            for dir in [false, true] {
                let code = self.bfs_code(root, dir);
                if best.as_ref().map_or(true, |b| &code < b) {
                    best = Some(code);
                }
            }
        }
        best.unwrap()
    }

    fn bfs_code(&self, root: Arc, dir: bool) -> Vec<i64> {
        let n = self.raw.alive.len();
        let mut id = vec![usize::MAX; n];
        let mut orient = vec![false; n];
        let mut entry = vec![Dart::new(usize::MAX, 0); n];
        let mut order: Vec<VertexId> = Vec::new();
        let start = self.raw.arc_tail(root);
        id[start] = 0;
        orient[start] = dir;
        entry[start] = root.tail_dart();
        order.push(start);
        let mut code: Vec<i64> = Vec::new();
        let mut qi = 0;
        while qi < order.len() {
            let v = order[qi];
            qi += 1;
            let deg = self.raw.rot[v].len();
            code.push(deg as i64);
            let pos0 = self.raw.rot[v]
                .iter()
                .position(|&d| d == entry[v])
                .expect("entry dart");
            for k in 0..deg {
                let idx = if orient[v] {
                    (pos0 + k) % deg
                } else {
                    (pos0 + deg - k) % deg
                };
                let d = self.raw.rot[v][idx];
                let e = self.raw.edge(d.edge);
                let w = e.other(v);
                let induced = orient[v] ^ e.negative;
                if id[w] == usize::MAX {
                    id[w] = order.len();
                    orient[w] = induced;
                    entry[w] = Dart::new(d.edge, 1 - d.end);
                    order.push(w);
                    code.push(-1);
                } else {
                    let dw = Dart::new(d.edge, 1 - d.end);
                    let degw = self.raw.rot[w].len();
                    let posw = self.raw.rot[w].iter().position(|&x| x == dw).unwrap();
                    let base = self.raw.rot[w]
                        .iter()
                        .position(|&x| x == entry[w])
                        .unwrap();
                    let offset = if orient[w] {
                        (posw + degw - base) % degw
                    } else {
                        (base + degw - posw) % degw
                    };
                    let obit = (induced == orient[w]) as i64;
                    code.push(1 + (id[w] as i64) * 2 * (degw as i64).max(1));
                    code.push(offset as i64 * 2 + obit);
                }
            }
        }
        // disconnected graphs get no canonical code
        assert_eq!(order.len(), self.raw.vertex_ids().count(), "graph must be connected");
        // ring suffix
        let mut ring_codes: Vec<Vec<i64>> = Vec::new();
        for r in &self.rings {
            match r {
                Ring::Facial { walk, .. } => {
                    let mut vs: Vec<i64> = self
                        .walk_vertices(*walk)
                        .iter()
                        .map(|&v| id[v] as i64)
                        .collect();
                    vs.sort();
                    let mut c = vec![0];
                    c.extend(vs);
                    ring_codes.push(c);
                }
                Ring::Vertex { vertex, weak, .. } => {
                    ring_codes.push(vec![1, id[*vertex] as i64, *weak as i64]);
                }
            }
        }
        ring_codes.sort();
        code.push(-2);
        for rc in ring_codes {
            code.extend(rc);
        }
        code
    }
}

pub(crate) fn trace_raw(raw: &RawMap) -> Result<Trace, MapError> {
    trace_walks(raw)
}

pub(crate) fn assemble_graph(
    raw: RawMap,
    trace: Trace,
    face_specs: &[(usize, Vec<usize>)],
    ring_specs: &[RingSpec],
) -> Result<EmbeddedGraph, MapError> {
    EmbeddedGraph::assemble(raw, trace, face_specs, ring_specs)
}

impl EmbeddedGraph {
    /// All (gap, walk) assignments, deterministic order.
    pub(crate) fn gap_entries(&self) -> impl Iterator<Item = ((VertexId, usize), WalkId)> + '_ {
        self.gap_walk.iter().map(|(&g, &w)| (g, w))
    }

    /// The two walks bordering an edge (equal when the edge has the same
    /// walk on both sides).
    pub fn edge_side_walks(&self, e: EdgeId) -> (WalkId, WalkId) {
        let u = self.raw.edge(e).u;
        let d = Dart::new(e, 0);
        let pos = self.raw.rot[u]
            .iter()
            .position(|&x| x == d)
            .expect("edge dart");
        let deg = self.raw.rot[u].len();
        let w1 = self.gap_walk[&(u, pos)];
        let w2 = self.gap_walk[&(u, (pos + deg - 1) % deg)];
        (w1, w2)
    }
}

pub(crate) fn raw_simple_graph(raw: &RawMap) -> SimpleGraph {
    let mut g = SimpleGraph::new(raw.alive.len());
    for e in raw.edge_ids() {
        let rec = raw.edge(e);
        g.add_edge(rec.u, rec.v);
    }
    g
}

pub(crate) fn walk_cycle_vertices(raw: &RawMap, walk: &Walk) -> Option<Vec<VertexId>> {
    if walk.lone_vertex.is_some() || walk.arcs.len() < 3 {
        return None;
    }
    let vs: Vec<VertexId> = walk.arcs.iter().map(|&a| raw.arc_tail(a)).collect();
    let set: BTreeSet<_> = vs.iter().collect();
    if set.len() == vs.len() {
        Some(vs)
    } else {
        None
    }
}

/// Equality of cycles up to rotation and reflection.
pub fn cycles_equal(a: &[VertexId], b: &[VertexId]) -> bool {
    a.len() == b.len()
        && crate::graph::canonical_cycle(a) == crate::graph::canonical_cycle(b)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// Plane (orientable, all-positive) embedding from counterclockwise
    /// neighbor lists; faces derived cellularly.
    pub fn plane_from_neighbors(
        n: usize,
        neighbors: &[Vec<usize>],
        ring_cycles: &[Vec<usize>],
    ) -> EmbeddedGraph {
        let mut edge_ids = BTreeMap::new();
        let mut edges = Vec::new();
        for (u, ns) in neighbors.iter().enumerate() {
            for &v in ns {
                let key = (u.min(v), u.max(v));
                if !edge_ids.contains_key(&key) {
                    edge_ids.insert(key, edges.len());
                    edges.push((key.0, key.1, false));
                }
            }
        }
        let mut rot: Vec<Vec<Dart>> = Vec::with_capacity(n);
        for (u, ns) in neighbors.iter().enumerate() {
            let mut darts = Vec::with_capacity(ns.len());
            for &v in ns {
                let key = (u.min(v), u.max(v));
                let e = edge_ids[&key];
                darts.push(Dart::new(e, if edges[e].0 == u { 0 } else { 1 }));
            }
            rot.push(darts);
        }
        EmbeddedGraph::build_cellular(n, &edges, &rot, ring_cycles, &[]).expect("valid plane map")
    }

    /// Hexagon ring v0..v5 plus a center u = 6 adjacent to v0, v2, v4.
    pub fn hexagon_tripod() -> EmbeddedGraph {
        let neighbors = vec![
            vec![1, 6, 5],
            vec![2, 0],
            vec![3, 6, 1],
            vec![4, 2],
            vec![5, 6, 3],
            vec![0, 4],
            vec![0, 2, 4],
        ];
        plane_from_neighbors(7, &neighbors, &[vec![0, 1, 2, 3, 4, 5]])
    }

    /// The cube graph with its six quadrilateral faces (sphere).
    pub fn cube_q3() -> EmbeddedGraph {
        // outer 4-cycle 0..3, inner 4..7, vertical edges i - i+4
        let neighbors = vec![
            vec![1, 4, 3],
            vec![2, 5, 0],
            vec![3, 6, 1],
            vec![0, 7, 2],
            vec![0, 5, 7],
            vec![1, 6, 4],
            vec![2, 7, 5],
            vec![3, 4, 6],
        ];
        plane_from_neighbors(8, &neighbors, &[])
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn hexagon_tripod_faces() {
        let g = hexagon_tripod();
        assert_eq!(g.euler_genus(), 0);
        let mut lens: Vec<usize> = (0..g.walks().len()).map(|w| g.walk(w).len()).collect();
        lens.sort();
        assert_eq!(lens, vec![4, 4, 4, 6]);
        assert_eq!(g.faces().len(), 4);
        assert_eq!(g.rings().len(), 1);
        // three internal quads, one ring face
        let internal: Vec<usize> = g.internal_faces().map(|f| g.face_size(f)).collect();
        assert_eq!(internal, vec![4, 4, 4]);
    }

    #[test]
    fn naive_orientable_tracer_agrees() {
        // independent face tracer for all-positive embeddings: next arc of
        // (u -> v) is the rotation successor of (v -> u) at v
        let g = hexagon_tripod();
        let mut expected: Vec<usize> = Vec::new();
        let mut seen = BTreeSet::new();
        for (e, _) in g.edges_iter() {
            for rev in [false, true] {
                let start = Arc::new(e, rev);
                if seen.contains(&start) {
                    continue;
                }
                let mut len = 0;
                let mut a = start;
                loop {
                    seen.insert(a);
                    len += 1;
                    let head = g.arc_head(a);
                    let d = a.head_dart();
                    let pos = g.rotation(head).iter().position(|&x| x == d).unwrap();
                    let nd = g.rotation(head)[(pos + 1) % g.degree(head)];
                    a = Arc::new(nd.edge, nd.end == 1);
                    if a == start {
                        break;
                    }
                }
                expected.push(len);
            }
        }
        expected.sort();
        let mut got: Vec<usize> = (0..g.walks().len()).map(|w| g.walk(w).len()).collect();
        got.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn cube_genus_zero() {
        let g = cube_q3();
        assert_eq!(g.euler_genus(), 0);
        assert_eq!(g.faces().len(), 6);
        assert!(g
            .internal_faces()
            .all(|f| g.face_size(f) == 4 && g.face_class(f) == Ok(FaceClass::Closed2Cell)));
    }

    #[test]
    fn k4_all_rotation_systems_euler_oracle() {
        // K4 with every rotation system and sign assignment is
        // Euler-consistent, and embeddings with three quadrilateral faces
        // have Euler genus 1.
        let edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let mut found_three_quads = false;
        // rotations: each vertex has degree 3, 2 cyclic orders
        for mask in 0..16u32 {
            for signs in 0..64u32 {
                let edge_list: Vec<(usize, usize, bool)> = edges
                    .iter()
                    .enumerate()
                    .map(|(i, &(u, v))| (u, v, signs & (1 << i) != 0))
                    .collect();
                let mut rot: Vec<Vec<Dart>> = Vec::new();
                for v in 0..4 {
                    let mut darts: Vec<Dart> = Vec::new();
                    for (i, &(a, b)) in edges.iter().enumerate() {
                        if a == v {
                            darts.push(Dart::new(i, 0));
                        } else if b == v {
                            darts.push(Dart::new(i, 1));
                        }
                    }
                    if mask & (1 << v) != 0 {
                        darts.swap(1, 2);
                    }
                    rot.push(darts);
                }
                let g = EmbeddedGraph::build_cellular(4, &edge_list, &rot, &[], &[])
                    .expect("cellular build");
                let total: usize = (0..g.walks().len()).map(|w| g.walk(w).len()).sum();
                assert_eq!(total, 12);
                let mut lens: Vec<usize> =
                    (0..g.walks().len()).map(|w| g.walk(w).len()).collect();
                lens.sort();
                if lens == vec![4, 4, 4] {
                    assert_eq!(g.euler_genus(), 1);
                    found_three_quads = true;
                }
            }
        }
        assert!(found_three_quads, "K4 quadrangulation of genus 1 exists");
    }

    #[test]
    fn repeated_edge_rejected() {
        let spec = MapSpec {
            vertex_count: 2,
            edges: vec![(0, 1, false), (1, 0, false)],
            rotations: vec![
                vec![Dart::new(0, 0), Dart::new(1, 1)],
                vec![Dart::new(0, 1), Dart::new(1, 0)],
            ],
            faces: vec![],
            rings: vec![],
        };
        assert!(matches!(
            EmbeddedGraph::build(&spec),
            Err(MapError::NotSimple(_))
        ));
    }

    #[test]
    fn isolated_vertex_ring_walk() {
        // a single vertex on the disk: one lone walk, genus 0
        let spec = MapSpec {
            vertex_count: 1,
            edges: vec![],
            rotations: vec![vec![]],
            faces: vec![(0, vec![0])],
            rings: vec![RingSpec::Vertex {
                vertex: 0,
                weak: false,
                cuff_face: 0,
            }],
        };
        let g = EmbeddedGraph::build(&spec).unwrap();
        assert_eq!(g.walks().len(), 1);
        assert_eq!(g.walk(0).lone_vertex, Some(0));
        assert_eq!(g.euler_genus(), 0);
        assert_eq!(g.face_size(0), 1);
        assert_eq!(g.total_ring_length(), 1);
    }

    #[test]
    fn annulus_face_between_two_rings() {
        // two disjoint hexagons on the sphere, both designated rings; the
        // middle face has two walks
        let mut neighbors: Vec<Vec<usize>> = Vec::new();
        for i in 0..6 {
            neighbors.push(vec![(i + 1) % 6, (i + 5) % 6]);
        }
        for i in 0..6 {
            neighbors.push(vec![6 + (i + 1) % 6, 6 + (i + 5) % 6]);
        }
        let mut edge_ids = BTreeMap::new();
        let mut edges = Vec::new();
        for (u, ns) in neighbors.iter().enumerate() {
            for &v in ns {
                let key = (u.min(v), u.max(v));
                edge_ids.entry(key).or_insert_with(|| {
                    edges.push((key.0, key.1, false));
                    edges.len() - 1
                });
            }
        }
        let rot: Vec<Vec<Dart>> = neighbors
            .iter()
            .enumerate()
            .map(|(u, ns)| {
                ns.iter()
                    .map(|&v| {
                        let key = (u.min(v), u.max(v));
                        let e = edge_ids[&key];
                        Dart::new(e, if edges[e].0 == u { 0 } else { 1 })
                    })
                    .collect()
            })
            .collect();
        let raw = RawMap {
            alive: vec![true; 12],
            edges: edges.iter().map(|&(u, v, n)| Some(EdgeRec { u, v, negative: n })).collect(),
            rot,
        };
        let trace = trace_walks(&raw).unwrap();
        assert_eq!(trace.walks.len(), 4);
        // ring faces: walks matching each hexagon; middle face: other two
        let cyc1: Vec<usize> = (0..6).collect();
        let cyc2: Vec<usize> = (6..12).collect();
        let mut ring_walks = Vec::new();
        let mut mid_walks = Vec::new();
        for (w, walk) in trace.walks.iter().enumerate() {
            let vs = walk_cycle_vertices(&raw, walk).unwrap();
            let is1 = cycles_equal(&vs, &cyc1);
            let is2 = cycles_equal(&vs, &cyc2);
            // each hexagon's two sides give two identical cycles; put one
            // per ring, rest in the middle
            if is1 && !ring_walks.iter().any(|&(_, c)| c == 1) {
                ring_walks.push((w, 1));
            } else if is2 && !ring_walks.iter().any(|&(_, c)| c == 2) {
                ring_walks.push((w, 2));
            } else {
                mid_walks.push(w);
            }
        }
        let faces = vec![
            (0usize, vec![ring_walks[0].0]),
            (0, vec![ring_walks[1].0]),
            (0, mid_walks.clone()),
        ];
        let rings = vec![RingSpec::Facial { face: 0 }, RingSpec::Facial { face: 1 }];
        let g = EmbeddedGraph::assemble(raw, trace, &faces, &rings).unwrap();
        assert_eq!(g.euler_genus(), 0);
        let mid = g.internal_faces().next().unwrap();
        assert_eq!(g.face(mid).walks.len(), 2);
        assert_eq!(g.face_size(mid), 12);
        assert_eq!(g.face_class(mid), Ok(FaceClass::Neither));
    }

    #[test]
    fn canonical_form_detects_isomorphism() {
        let g1 = hexagon_tripod();
        // same map with vertices relabeled: center first
        let neighbors = vec![
            vec![1, 3, 5],
            vec![2, 0, 6],
            vec![3, 1],
            vec![4, 0, 2],
            vec![5, 3],
            vec![6, 0, 4],
            vec![1, 5],
        ];
        let g2 = testutil::plane_from_neighbors(7, &neighbors, &[vec![1, 2, 3, 4, 5, 6]]);
        assert_eq!(g2.euler_genus(), 0);
        assert_eq!(g1.canonical_form(true), g2.canonical_form(true));
        assert_eq!(g1.canonical_form(false), g2.canonical_form(false));
    }

    #[test]
    fn mirror_images_are_isomorphic_via_reflection() {
        let g1 = hexagon_tripod();
        let neighbors_mirror: Vec<Vec<usize>> = vec![
            vec![5, 6, 1],
            vec![0, 2],
            vec![1, 6, 3],
            vec![2, 4],
            vec![3, 6, 5],
            vec![4, 0],
            vec![4, 2, 0],
        ];
        let g2 = plane_from_neighbors(7, &neighbors_mirror, &[vec![0, 1, 2, 3, 4, 5]]);
        assert_eq!(g1.canonical_form(true), g2.canonical_form(true));
    }
}
