//! Surgery on embedded graphs.
//!
//! All operations run on a scratch `WorkMap` and finish through the full
//! validating builder, so every surgery re-derives the facial walks from
//! scratch and checks Euler consistency.  Faces are tracked across
//! mutations by *corner keys*: the corner following a given dart in a
//! vertex rotation identifies exactly one facial walk, and corners away
//! from the surgery site survive every operation.
//!
//! Face genus updates under edge deletion follow the Euler ledger: with
//! both sides of the deleted edge on
//!   - two distinct faces: the faces merge, genus adds;
//!   - one face, one walk, and the walk splits in two: genus unchanged;
//!   - one face, one walk, rejoining into a single walk: genus + 1;
//!   - one face, two walks: the walks merge, genus + 2.

use super::{
    trace_walks, Dart, EdgeId, EmbeddedGraph, FaceId, MapError, RawMap, RingId, RingSpec, Trace,
    VertexId, WalkId,
};
use std::collections::{BTreeMap, BTreeSet};

/// Identifies one facial walk: the corner following `1`-th dart at a
/// vertex, or a lone-vertex walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WalkKey {
    Gap(VertexId, Dart),
    Lone(VertexId),
}

#[derive(Debug, Clone)]
struct WorkFace {
    genus: usize,
    keys: Vec<WalkKey>,
    ring: Option<usize>,
}

#[derive(Debug, Clone)]
enum WorkRing {
    Facial { face: usize },
    Vertex { vertex: VertexId, weak: bool, cuff_face: usize },
}

/// Vertex/edge/face correspondences out of a surgery.
#[derive(Debug, Clone)]
pub struct SurgeryMaps {
    /// old vertex id -> new id (None when deleted or replaced)
    pub vertex_to_new: Vec<Option<VertexId>>,
    pub vertex_from_new: Vec<VertexId>,
    pub edge_to_new: Vec<Option<EdgeId>>,
    pub edge_from_new: Vec<EdgeId>,
    /// old face id -> new face id (merged faces map to the survivor)
    pub face_to_new: Vec<Option<FaceId>>,
    pub ring_to_new: Vec<Option<RingId>>,
}

#[derive(Debug, Clone)]
pub struct WorkMap {
    raw: RawMap,
    faces: Vec<Option<WorkFace>>,
    face_forward: Vec<usize>,
    rings: Vec<Option<WorkRing>>,
    orig_faces: usize,
    orig_vertices: usize,
    orig_edges: usize,
}

impl WorkMap {
    pub fn from_graph(g: &EmbeddedGraph) -> WorkMap {
        // pick a representative key per walk
        let mut key_of_walk: BTreeMap<WalkId, WalkKey> = BTreeMap::new();
        for (&(v, gap), &w) in &g.gap_walk {
            key_of_walk
                .entry(w)
                .or_insert_with(|| WalkKey::Gap(v, g.raw().rot[v][gap]));
        }
        for (w, walk) in g.walks().iter().enumerate() {
            if let Some(v) = walk.lone_vertex {
                key_of_walk.insert(w, WalkKey::Lone(v));
            }
        }
        let faces = g
            .faces()
            .iter()
            .map(|f| {
                Some(WorkFace {
                    genus: f.genus,
                    keys: f.walks.iter().map(|w| key_of_walk[w]).collect(),
                    ring: f.ring,
                })
            })
            .collect::<Vec<_>>();
        let rings = g
            .rings()
            .iter()
            .map(|r| {
                Some(match *r {
                    super::Ring::Facial { face, .. } => WorkRing::Facial { face },
                    super::Ring::Vertex { vertex, weak, cuff_face } => WorkRing::Vertex {
                        vertex,
                        weak,
                        cuff_face,
                    },
                })
            })
            .collect::<Vec<_>>();
        WorkMap {
            raw: g.raw().clone(),
            face_forward: (0..faces.len()).collect(),
            orig_faces: faces.len(),
            orig_vertices: g.raw().alive.len(),
            orig_edges: g.raw().edges.len(),
            faces,
            rings,
        }
    }

    pub fn raw(&self) -> &RawMap {
        &self.raw
    }

    pub fn edge(&self, e: EdgeId) -> &super::EdgeRec {
        self.raw.edge(e)
    }

    fn chase_face(&self, mut f: usize) -> usize {
        while self.face_forward[f] != f {
            f = self.face_forward[f];
        }
        f
    }

    fn trace(&self) -> Result<Trace, MapError> {
        trace_walks(&self.raw)
    }

    fn resolve_key(&self, trace: &Trace, key: WalkKey) -> Result<WalkId, MapError> {
        match key {
            WalkKey::Lone(v) => trace
                .lone_walk
                .get(&v)
                .copied()
                .ok_or_else(|| MapError::Internal(format!("lone walk of {v} missing"))),
            WalkKey::Gap(v, d) => {
                let pos = self.raw.rot[v]
                    .iter()
                    .position(|&x| x == d)
                    .ok_or_else(|| MapError::Internal(format!("dart {d:?} not at vertex {v}")))?;
                trace
                    .gap_walk
                    .get(&(v, pos))
                    .copied()
                    .ok_or_else(|| MapError::Internal(format!("gap ({v},{pos}) unresolved")))
            }
        }
    }

    /// Walk id -> owning face slot, resolving every face key.
    fn face_of_walks(&self, trace: &Trace) -> Result<Vec<usize>, MapError> {
        let mut owner = vec![usize::MAX; trace.walks.len()];
        for (fi, f) in self.faces.iter().enumerate() {
            let Some(f) = f else { continue };
            for &k in &f.keys {
                let w = self.resolve_key(trace, k)?;
                if owner[w] != usize::MAX && owner[w] != fi {
                    return Err(MapError::Internal(format!(
                        "walk {w} claimed by faces {} and {fi}",
                        owner[w]
                    )));
                }
                owner[w] = fi;
            }
        }
        if let Some(w) = owner.iter().position(|&f| f == usize::MAX) {
            return Err(MapError::Internal(format!("walk {w} not covered by any face")));
        }
        Ok(owner)
    }

    /// The two walk keys flanking edge `e` at its `u` endpoint, in the
    /// current map: the corner after the dart, and the corner before it.
    fn edge_side_keys(&self, e: EdgeId) -> (WalkKey, WalkKey) {
        let u = self.raw.edge(e).u;
        let d = Dart::new(e, 0);
        let pos = self.raw.rot[u].iter().position(|&x| x == d).expect("dart");
        let deg = self.raw.rot[u].len();
        let prev = self.raw.rot[u][(pos + deg - 1) % deg];
        (WalkKey::Gap(u, d), WalkKey::Gap(u, prev))
    }

    /// Deletes one edge, merging or reshaping the adjacent faces.
    pub fn delete_edge(&mut self, e: EdgeId) -> Result<(), MapError> {
        let trace = self.trace()?;
        let owner = self.face_of_walks(&trace)?;
        let (k1, k2) = self.edge_side_keys(e);
        let w1 = self.resolve_key(&trace, k1)?;
        let w2 = self.resolve_key(&trace, k2)?;
        let f1 = owner[w1];
        let f2 = owner[w2];

        // survivors before mutation: all walks except w1, w2, as stable keys
        let mut surviving: Vec<(usize, WalkKey)> = Vec::new();
        for (fi, f) in self.faces.iter().enumerate() {
            let Some(f) = f else { continue };
            for &k in &f.keys {
                let w = self.resolve_key(&trace, k)?;
                if w != w1 && w != w2 {
                    surviving.push((fi, self.stabilize_key(k, e)?));
                }
            }
        }

        // mutate
        let rec = *self.raw.edge(e);
        for v in [rec.u, rec.v] {
            self.raw.rot[v].retain(|d| d.edge != e);
        }
        self.raw.edges[e] = None;

        let new_trace = self.trace()?;
        // replacement walks: the new walks not matched by surviving keys
        let mut matched = vec![false; new_trace.walks.len()];
        let mut new_keys: BTreeMap<usize, Vec<WalkKey>> = BTreeMap::new();
        for (fi, k) in &surviving {
            let w = self.resolve_key(&new_trace, *k)?;
            matched[w] = true;
            new_keys.entry(*fi).or_default().push(*k);
        }
        let mut replacements: Vec<WalkKey> = Vec::new();
        for (w, walk) in new_trace.walks.iter().enumerate() {
            if matched[w] {
                continue;
            }
            replacements.push(match walk.lone_vertex {
                Some(v) => WalkKey::Lone(v),
                None => {
                    // key by the first gap of the walk
                    let (&(v, gap), _) = new_trace
                        .gap_walk
                        .iter()
                        .find(|&(_, &ww)| ww == w)
                        .ok_or_else(|| MapError::Internal("walk without gaps".into()))?;
                    WalkKey::Gap(v, self.raw.rot[v][gap])
                }
            });
        }

        // face ledger
        if f1 != f2 {
            // merge: genus adds
            if self.faces[f1].as_ref().unwrap().ring.is_some()
                || self.faces[f2].as_ref().unwrap().ring.is_some()
            {
                return Err(MapError::NotNormal(
                    "deleting a facial-ring edge would destroy the ring face".into(),
                ));
            }
            if replacements.len() != 1 {
                return Err(MapError::Internal(format!(
                    "face merge expected one replacement walk, got {}",
                    replacements.len()
                )));
            }
            let g2 = self.faces[f2].as_ref().unwrap().genus;
            let mut keys = new_keys.remove(&f1).unwrap_or_default();
            keys.extend(new_keys.remove(&f2).unwrap_or_default());
            keys.extend(replacements);
            let face = self.faces[f1].as_mut().unwrap();
            face.genus += g2;
            face.keys = keys;
            self.faces[f2] = None;
            self.face_forward[f2] = f1;
            // repoint cuff faces
            for r in self.rings.iter_mut().flatten() {
                if let WorkRing::Vertex { cuff_face, .. } = r {
                    if *cuff_face == f2 {
                        *cuff_face = f1;
                    }
                }
            }
        } else {
            let bump = if w1 != w2 {
                // two walks of one face rejoin
                if replacements.len() != 1 {
                    return Err(MapError::Internal(
                        "walk merge expected one replacement".into(),
                    ));
                }
                2
            } else if replacements.len() == 2 {
                0 // walk splits
            } else if replacements.len() == 1 {
                1 // twisted rejoin
            } else {
                return Err(MapError::Internal(format!(
                    "unexpected replacement count {}",
                    replacements.len()
                )));
            };
            let mut keys = new_keys.remove(&f1).unwrap_or_default();
            keys.extend(replacements);
            let face = self.faces[f1].as_mut().unwrap();
            face.genus += bump;
            face.keys = keys;
        }
        Ok(())
    }

    /// Rewrites a key so it avoids the edge about to be deleted: a corner
    /// `after dart-of-e` becomes the corner after the preceding dart.
    fn stabilize_key(&self, k: WalkKey, dying_edge: EdgeId) -> Result<WalkKey, MapError> {
        match k {
            WalkKey::Lone(_) => Ok(k),
            WalkKey::Gap(v, d) => {
                if d.edge != dying_edge {
                    return Ok(k);
                }
                let pos = self.raw.rot[v].iter().position(|&x| x == d).unwrap();
                let deg = self.raw.rot[v].len();
                if deg == 1 {
                    return Err(MapError::Internal(
                        "cannot stabilize key on a pendant dying edge".into(),
                    ));
                }
                // corner after d = corner after pred(d) once d is gone
                let prev = self.raw.rot[v][(pos + deg - 1) % deg];
                if prev.edge == dying_edge {
                    return Err(MapError::Internal("both flanking darts dying".into()));
                }
                Ok(WalkKey::Gap(v, prev))
            }
        }
    }

    pub fn delete_isolated_vertex(&mut self, v: VertexId) -> Result<(), MapError> {
        if !self.raw.rot[v].is_empty() {
            return Err(MapError::Internal(format!("vertex {v} is not isolated")));
        }
        let slot = self
            .faces
            .iter()
            .position(|f| {
                f.as_ref()
                    .map_or(false, |f| f.keys.contains(&WalkKey::Lone(v)))
            })
            .ok_or_else(|| MapError::Internal(format!("lone walk of {v} unowned")))?;
        let face = self.faces[slot].as_mut().unwrap();
        if face.keys.len() == 1 {
            return Err(MapError::Internal(
                "deleting the only walk of a face".into(),
            ));
        }
        face.keys.retain(|&k| k != WalkKey::Lone(v));
        self.raw.alive[v] = false;
        Ok(())
    }

    /// Corner key of walk `w` at the transition with index `at` (the corner
    /// crossed between arcs `at` and `at+1`), expressed as a stable key.
    fn corner_key_of_walk(
        &self,
        trace: &Trace,
        w: WalkId,
        at: usize,
    ) -> Result<(WalkKey, bool), MapError> {
        let walk = &trace.walks[w];
        let n = walk.arcs.len();
        let a_in = walk.arcs[at];
        let sigma_in = walk.sigmas[at];
        let neg = self.raw.edge(a_in.edge).negative;
        let sigma2 = sigma_in ^ neg;
        let v = self.raw.arc_head(a_in);
        let d_in = a_in.head_dart();
        let d_out = walk.arcs[(at + 1) % n].tail_dart();
        let pos_in = self.raw.rot[v].iter().position(|&x| x == d_in).unwrap();
        let pos_out = self.raw.rot[v].iter().position(|&x| x == d_out).unwrap();
        let deg = self.raw.rot[v].len();
        let gap = if sigma2 { pos_in } else { pos_out };
        // sanity: the other dart flanks the gap
        let succ = (gap + 1) % deg;
        let pair_ok = (self.raw.rot[v][gap] == d_in && self.raw.rot[v][succ] == d_out)
            || (self.raw.rot[v][gap] == d_out && self.raw.rot[v][succ] == d_in)
            || deg == 1;
        if !pair_ok {
            return Err(MapError::Internal("corner pair mismatch".into()));
        }
        Ok((WalkKey::Gap(v, self.raw.rot[v][gap]), sigma2))
    }

    /// Identifies v1 and v3 across the quad face `quad_face` (boundary
    /// cycle v1 v2 v3 v4) into a fresh vertex, removing the quad face and
    /// installing the two bigon faces that arise.  Parallel edges are NOT
    /// suppressed here.  Returns the new vertex id.
    pub fn identify_across_quad(
        &mut self,
        quad_face: usize,
        v1: VertexId,
        v3: VertexId,
    ) -> Result<VertexId, MapError> {
        let trace = self.trace()?;
        let owner = self.face_of_walks(&trace)?;
        let face = self.faces[quad_face]
            .as_ref()
            .ok_or_else(|| MapError::Internal("dead face".into()))?;
        if face.keys.len() != 1 || face.genus != 0 {
            return Err(MapError::Internal("quad face is not a 2-cell".into()));
        }
        let w0 = self.resolve_key(&trace, face.keys[0])?;
        let walk = trace.walks[w0].clone();
        if walk.arcs.len() != 4 {
            return Err(MapError::Internal("face is not a 4-face".into()));
        }
        // corner transitions at v1 and v3
        let mut corner = BTreeMap::new();
        for at in 0..4 {
            let v = self.raw.arc_head(walk.arcs[at]);
            corner.insert(v, at);
        }
        let (&_, &at1) = corner
            .iter()
            .find(|&(&v, _)| v == v1)
            .ok_or_else(|| MapError::Internal("v1 not on quad".into()))?;
        let at3 = *corner
            .get(&v3)
            .ok_or_else(|| MapError::Internal("v3 not on quad".into()))?;

        // gather corner keys of all faces before mutation, as dart pairs
        let mut face_corner_pairs: Vec<(usize, CornerRef)> = Vec::new();
        for (fi, f) in self.faces.iter().enumerate() {
            let Some(f) = f else { continue };
            if fi == quad_face {
                continue;
            }
            for &k in &f.keys {
                face_corner_pairs.push((fi, self.corner_ref(k)?));
            }
        }
        let _ = owner;

        // build the two half-lists
        let (list1, flip1) = self.half_list(&trace, w0, at1)?;
        let (list3, flip3) = self.half_list(&trace, w0, at3)?;
        if flip1 {
            for d in self.raw.rot[v1].clone() {
                let rec = self.raw.edges[d.edge].as_mut().unwrap();
                rec.negative = !rec.negative;
            }
        }
        if flip3 {
            for d in self.raw.rot[v3].clone() {
                let rec = self.raw.edges[d.edge].as_mut().unwrap();
                rec.negative = !rec.negative;
            }
        }

        // new vertex
        let z = self.raw.alive.len();
        self.raw.alive.push(true);
        let mut zrot = list1.clone();
        zrot.extend(list3.iter().copied());
        self.raw.rot.push(zrot);
        self.raw.rot[v1].clear();
        self.raw.rot[v3].clear();
        self.raw.alive[v1] = false;
        self.raw.alive[v3] = false;
        for e in 0..self.raw.edges.len() {
            if let Some(rec) = self.raw.edges[e].as_mut() {
                if rec.u == v1 || rec.u == v3 {
                    rec.u = z;
                }
                if rec.v == v1 || rec.v == v3 {
                    rec.v = z;
                }
            }
        }

        // face bookkeeping: quad face dies, two bigons appear
        self.faces[quad_face] = None;
        // the seam corners: after last of list1 and after last of list3
        let bigon_a = WalkKey::Gap(z, *list1.last().unwrap());
        let bigon_b = WalkKey::Gap(z, *list3.last().unwrap());
        let slot_a = self.faces.len();
        self.faces.push(Some(WorkFace {
            genus: 0,
            keys: vec![bigon_a],
            ring: None,
        }));
        self.face_forward.push(slot_a);
        let slot_b = self.faces.len();
        self.faces.push(Some(WorkFace {
            genus: 0,
            keys: vec![bigon_b],
            ring: None,
        }));
        self.face_forward.push(slot_b);

        // remap stored corner keys via dart pairs
        for (fi, cref) in face_corner_pairs {
            let key = self.key_from_corner_ref(&cref)?;
            let f = self.faces[fi].as_mut().unwrap();
            // replace the old key for this corner
            let old = cref.original;
            if let Some(slot) = f.keys.iter_mut().find(|k| **k == old) {
                *slot = key;
            }
        }

        // verify everything resolves
        let t2 = self.trace()?;
        self.face_of_walks(&t2)?;
        Ok(z)
    }

    /// Contiguous dart list of `v`'s rotation running from the quad-corner
    /// boundary around to its other flank; `flip` reports whether the list
    /// runs against the stored order (edge signs at v must then toggle).
    fn half_list(
        &self,
        trace: &Trace,
        w0: WalkId,
        at: usize,
    ) -> Result<(Vec<Dart>, bool), MapError> {
        let walk = &trace.walks[w0];
        let n = walk.arcs.len();
        let a_in = walk.arcs[at];
        let v = self.raw.arc_head(a_in);
        let d_in = a_in.head_dart();
        let d_out = walk.arcs[(at + 1) % n].tail_dart();
        let neg = self.raw.edge(a_in.edge).negative;
        let sigma2 = walk.sigmas[at] ^ neg;
        let deg = self.raw.rot[v].len();
        let pos_in = self.raw.rot[v].iter().position(|&x| x == d_in).unwrap();
        let pos_out = self.raw.rot[v].iter().position(|&x| x == d_out).unwrap();
        // the corner occupies the gap from d_in to d_out in sigma2 direction;
        // the half-list is the rest of the rotation, starting at d_out.
        let mut list = Vec::with_capacity(deg);
        if sigma2 {
            // gap = (d_in -> succ = d_out); list runs d_out, succ, ..., d_in
            let mut i = pos_out;
            loop {
                list.push(self.raw.rot[v][i]);
                if i == pos_in {
                    break;
                }
                i = (i + 1) % deg;
            }
            Ok((list, false))
        } else {
            // gap = (d_out -> succ = d_in); stored order runs the other way
            let mut i = pos_out;
            loop {
                list.push(self.raw.rot[v][i]);
                if i == pos_in {
                    break;
                }
                i = (i + deg - 1) % deg;
            }
            Ok((list, true))
        }
    }

    fn corner_ref(&self, k: WalkKey) -> Result<CornerRef, MapError> {
        match k {
            WalkKey::Lone(v) => Ok(CornerRef {
                original: k,
                pair: None,
                lone: Some(v),
            }),
            WalkKey::Gap(v, d) => {
                let pos = self.raw.rot[v]
                    .iter()
                    .position(|&x| x == d)
                    .ok_or_else(|| MapError::Internal("corner dart missing".into()))?;
                let deg = self.raw.rot[v].len();
                let succ = self.raw.rot[v][(pos + 1) % deg];
                Ok(CornerRef {
                    original: k,
                    pair: Some((d, succ)),
                    lone: None,
                })
            }
        }
    }

    /// Rebuilds a key from a dart pair after rotations moved around.
    fn key_from_corner_ref(&self, cref: &CornerRef) -> Result<WalkKey, MapError> {
        if let Some(v) = cref.lone {
            return Ok(WalkKey::Lone(v));
        }
        let (d1, d2) = cref.pair.unwrap();
        // locate the vertex now holding d1
        let v = self.raw.dart_vertex(d1);
        let rot = &self.raw.rot[v];
        let deg = rot.len();
        let p1 = rot
            .iter()
            .position(|&x| x == d1)
            .ok_or_else(|| MapError::Internal("corner dart vanished".into()))?;
        if deg == 1 {
            return Ok(WalkKey::Gap(v, d1));
        }
        let p2 = rot
            .iter()
            .position(|&x| x == d2)
            .ok_or_else(|| MapError::Internal("corner partner vanished".into()))?;
        if (p1 + 1) % deg == p2 {
            Ok(WalkKey::Gap(v, d1))
        } else if (p2 + 1) % deg == p1 {
            Ok(WalkKey::Gap(v, d2))
        } else {
            Err(MapError::Internal(
                "corner darts no longer adjacent".into(),
            ))
        }
    }

    /// Parallel edge pairs (u, v connected twice), sorted by id.
    pub fn parallel_pairs(&self) -> Vec<(EdgeId, EdgeId)> {
        let mut by_pair: BTreeMap<(usize, usize), Vec<EdgeId>> = BTreeMap::new();
        for e in self.raw.edge_ids() {
            let rec = self.raw.edge(e);
            let key = (rec.u.min(rec.v), rec.u.max(rec.v));
            by_pair.entry(key).or_default().push(e);
        }
        let mut out = Vec::new();
        for (_, es) in by_pair {
            if es.len() >= 2 {
                for i in 1..es.len() {
                    out.push((es[0], es[i]));
                }
            }
        }
        out
    }

    /// Mirrors the sub-disk spanned by `inner` vertices between the seam
    /// vertices w1 and w3: inner rotations reverse (signs toggling), and at
    /// w1/w3 the contiguous dart segment pointing into `inner` reverses in
    /// place.  The faces `f1` and `f2` merge into one while the seam cycle
    /// becomes a new quad face; `quad_key`/`merged_key` locate them after
    /// the mirror.
    #[allow(clippy::too_many_arguments)]
    pub fn mirror_subdisk(
        &mut self,
        w1: VertexId,
        w3: VertexId,
        inner: &BTreeSet<VertexId>,
        f1: usize,
        f2: usize,
        e_w1w2: EdgeId,
        e_w1w4: EdgeId,
        e_w3w2: EdgeId,
        e_w3w4: EdgeId,
    ) -> Result<(), MapError> {
        // survivors: corner refs of all faces except f1, f2
        let mut face_corner_pairs: Vec<(usize, CornerRef)> = Vec::new();
        for (fi, f) in self.faces.iter().enumerate() {
            let Some(f) = f else { continue };
            if fi == f1 || fi == f2 {
                continue;
            }
            for &k in &f.keys {
                face_corner_pairs.push((fi, self.corner_ref(k)?));
            }
        }
        let f2_extra: Vec<CornerRef> = {
            // f2 may have walks besides the one through the seam; keep those
            let trace = self.trace()?;
            let seam_walks: BTreeSet<WalkId> = {
                let mut s = BTreeSet::new();
                // walks through w1 containing the seam arcs
                for (w, walk) in trace.walks.iter().enumerate() {
                    if walk
                        .arcs
                        .iter()
                        .any(|a| a.edge == e_w1w4 || a.edge == e_w3w4 || a.edge == e_w1w2 || a.edge == e_w3w2)
                    {
                        s.insert(w);
                    }
                }
                s
            };
            let f = self.faces[f2].as_ref().unwrap();
            let mut keep = Vec::new();
            for &k in &f.keys {
                let w = self.resolve_key(&trace, k)?;
                if !seam_walks.contains(&w) {
                    keep.push(self.corner_ref(k)?);
                }
            }
            keep
        };
        let f1_extra: Vec<CornerRef> = {
            let trace = self.trace()?;
            let f = self.faces[f1].as_ref().unwrap();
            let mut keep = Vec::new();
            for &k in &f.keys {
                let w = self.resolve_key(&trace, k)?;
                let walk = &trace.walks[w];
                let touches = walk
                    .arcs
                    .iter()
                    .any(|a| a.edge == e_w1w2 || a.edge == e_w3w2 || a.edge == e_w1w4 || a.edge == e_w3w4);
                if !touches {
                    keep.push(self.corner_ref(k)?);
                }
            }
            keep
        };

        // mirror inner vertices
        for &v in inner {
            self.raw.rot[v].reverse();
            for d in self.raw.rot[v].clone() {
                let rec = self.raw.edges[d.edge].as_mut().unwrap();
                rec.negative = !rec.negative;
            }
        }
        // seam vertices: reverse the contiguous inner segment
        for (wv, e_out) in [(w1, e_w1w2), (w3, e_w3w2)] {
            let rot = self.raw.rot[wv].clone();
            let deg = rot.len();
            let into_inner = |d: &Dart| {
                let rec = self.raw.edge(d.edge);
                inner.contains(&rec.other(wv))
            };
            let count = rot.iter().filter(|d| into_inner(d)).count();
            if count == 0 {
                continue;
            }
            // find the contiguous run of inner darts
            let mut start = None;
            for i in 0..deg {
                let prev = &rot[(i + deg - 1) % deg];
                if into_inner(&rot[i]) && !into_inner(prev) {
                    start = Some(i);
                    break;
                }
            }
            let start = start.ok_or_else(|| {
                MapError::Internal(format!("inner darts at {wv} not contiguous"))
            })?;
            for k in 0..count {
                if !into_inner(&rot[(start + k) % deg]) {
                    return Err(MapError::Internal(format!(
                        "inner darts at {wv} not contiguous"
                    )));
                }
            }
            let mut new_rot = Vec::with_capacity(deg);
            let mut i = (start + count) % deg;
            while i != start {
                new_rot.push(rot[i]);
                i = (i + 1) % deg;
            }
            for k in 0..count {
                new_rot.push(rot[(start + count - 1 - k) % deg]);
            }
            debug_assert_eq!(new_rot.len(), deg);
            self.raw.rot[wv] = new_rot;
            let _ = e_out;
        }

        // rebuild faces f1, f2 -> quad face + merged face
        let g2 = self.faces[f2].as_ref().unwrap().genus;
        let ring2 = self.faces[f2].as_ref().unwrap().ring;
        let ring1 = self.faces[f1].as_ref().unwrap().ring;
        if ring1.is_some() || ring2.is_some() {
            return Err(MapError::Internal("flip faces must be internal".into()));
        }
        // quad face: the corner at w1 between the darts to w2 and w4
        let quad_key = {
            let rot = &self.raw.rot[w1];
            let deg = rot.len();
            let p2 = rot.iter().position(|d| d.edge == e_w1w2).unwrap();
            let p4 = rot.iter().position(|d| d.edge == e_w1w4).unwrap();
            if (p2 + 1) % deg == p4 {
                WalkKey::Gap(w1, rot[p2])
            } else if (p4 + 1) % deg == p2 {
                WalkKey::Gap(w1, rot[p4])
            } else {
                return Err(MapError::Internal(
                    "mirror did not bring the quad corners together".into(),
                ));
            }
        };
        // merged face: after the mirror the other corner at w1 flanking the
        // w4-dart on the far side from the quad corner
        let merged_key = {
            let rot = &self.raw.rot[w1];
            let deg = rot.len();
            let p4 = rot.iter().position(|d| d.edge == e_w1w4).unwrap();
            match quad_key {
                WalkKey::Gap(_, d) if d.edge == e_w1w2 => WalkKey::Gap(w1, rot[p4]),
                _ => WalkKey::Gap(w1, rot[(p4 + deg - 1) % deg]),
            }
        };
        self.faces[f1] = None;
        self.face_forward[f1] = f2;
        let mut keys = vec![merged_key];
        for cref in f1_extra.iter().chain(f2_extra.iter()) {
            keys.push(self.key_from_corner_ref(cref)?);
        }
        let f2_rec = self.faces[f2].as_mut().unwrap();
        f2_rec.genus = g2; // f1 was a 2-cell; genus carries over
        f2_rec.keys = keys;
        let quad_slot = self.faces.len();
        self.faces.push(Some(WorkFace {
            genus: 0,
            keys: vec![quad_key],
            ring: None,
        }));
        self.face_forward.push(quad_slot);

        // restore surviving corner keys
        for (fi, cref) in face_corner_pairs {
            let key = self.key_from_corner_ref(&cref)?;
            let f = self.faces[fi].as_mut().unwrap();
            if let Some(slot) = f.keys.iter_mut().find(|k| **k == cref.original) {
                *slot = key;
            }
        }
        let t2 = self.trace()?;
        self.face_of_walks(&t2)?;
        Ok(())
    }

    /// Splits vertex `v` into two vertices through an open 2-cell face,
    /// dividing its rotation at the two corners of that face given by the
    /// darts `after1`/`after2` (corner-following darts).  Used for curves
    /// joining two appearances of one vertex on a face walk.  Returns the
    /// two new vertex ids.
    pub fn split_vertex_in_face(
        &mut self,
        v: VertexId,
        face_slot: usize,
        after1: Dart,
        after2: Dart,
    ) -> Result<(VertexId, VertexId), MapError> {
        let face = self.faces[face_slot]
            .as_ref()
            .ok_or_else(|| MapError::Internal("dead face".into()))?;
        if face.genus != 0 || face.keys.len() != 1 {
            return Err(MapError::NotSimpleCurve(
                "vertex split supported only through open 2-cell faces".into(),
            ));
        }
        let trace = self.trace()?;
        let w0 = self.resolve_key(&trace, face.keys[0])?;
        // record corner refs of every other face
        let mut face_corner_pairs: Vec<(usize, CornerRef)> = Vec::new();
        for (fi, f) in self.faces.iter().enumerate() {
            let Some(f) = f else { continue };
            if fi == face_slot {
                continue;
            }
            for &k in &f.keys {
                face_corner_pairs.push((fi, self.corner_ref(k)?));
            }
        }
        let rot = self.raw.rot[v].clone();
        let deg = rot.len();
        let p1 = rot
            .iter()
            .position(|&x| x == after1)
            .ok_or_else(|| MapError::NotSimpleCurve("corner dart not at vertex".into()))?;
        let p2 = rot
            .iter()
            .position(|&x| x == after2)
            .ok_or_else(|| MapError::NotSimpleCurve("corner dart not at vertex".into()))?;
        if p1 == p2 {
            return Err(MapError::NotSimpleCurve("corners coincide".into()));
        }
        // both corners must belong to the face
        for &(p, _d) in [(p1, after1), (p2, after2)].iter() {
            let w = trace.gap_walk[&(v, p)];
            if w != w0 {
                return Err(MapError::NotSimpleCurve(
                    "corner does not border the face".into(),
                ));
            }
        }
        // split: va gets (p1, p2], vb gets (p2, p1]
        let va = self.raw.alive.len();
        self.raw.alive.push(true);
        let vb = self.raw.alive.len();
        self.raw.alive.push(true);
        let mut rot_a = Vec::new();
        let mut i = (p1 + 1) % deg;
        loop {
            rot_a.push(rot[i]);
            if i == p2 {
                break;
            }
            i = (i + 1) % deg;
        }
        let mut rot_b = Vec::new();
        let mut i = (p2 + 1) % deg;
        loop {
            rot_b.push(rot[i]);
            if i == p1 {
                break;
            }
            i = (i + 1) % deg;
        }
        self.raw.rot.push(rot_a.clone());
        self.raw.rot.push(rot_b.clone());
        self.raw.rot[v].clear();
        self.raw.alive[v] = false;
        for d in &rot_a {
            let rec = self.raw.edges[d.edge].as_mut().unwrap();
            if rec.endpoint(d.end) == v {
                if d.end == 0 {
                    rec.u = va;
                } else {
                    rec.v = va;
                }
            }
        }
        for d in &rot_b {
            let rec = self.raw.edges[d.edge].as_mut().unwrap();
            if rec.endpoint(d.end) == v {
                if d.end == 0 {
                    rec.u = vb;
                } else {
                    rec.v = vb;
                }
            }
        }

        // the face (0,1) splits into one or two faces; re-derive
        let t2 = self.trace()?;
        let mut matched = vec![false; t2.walks.len()];
        let mut restored: Vec<(usize, WalkKey)> = Vec::new();
        for (fi, cref) in &face_corner_pairs {
            let key = self.key_from_corner_ref(cref)?;
            let w = self.resolve_key(&t2, key)?;
            matched[w] = true;
            restored.push((*fi, key));
        }
        let mut replacements = Vec::new();
        for (w, walk) in t2.walks.iter().enumerate() {
            if matched[w] {
                continue;
            }
            replacements.push(match walk.lone_vertex {
                Some(x) => WalkKey::Lone(x),
                None => {
                    let (&(vv, gap), _) = t2
                        .gap_walk
                        .iter()
                        .find(|&(_, &ww)| ww == w)
                        .ok_or_else(|| MapError::Internal("walk without gaps".into()))?;
                    WalkKey::Gap(vv, self.raw.rot[vv][gap])
                }
            });
        }
        for (fi, cref) in face_corner_pairs {
            let key = self.key_from_corner_ref(&cref)?;
            let f = self.faces[fi].as_mut().unwrap();
            if let Some(slot) = f.keys.iter_mut().find(|k| **k == cref.original) {
                *slot = key;
            }
        }
        match replacements.len() {
            1 => {
                self.faces[face_slot].as_mut().unwrap().keys = replacements;
            }
            2 => {
                self.faces[face_slot].as_mut().unwrap().keys = vec![replacements[0]];
                let slot = self.faces.len();
                self.faces.push(Some(WorkFace {
                    genus: 0,
                    keys: vec![replacements[1]],
                    ring: None,
                }));
                self.face_forward.push(slot);
            }
            k => {
                return Err(MapError::Internal(format!(
                    "vertex split produced {k} replacement walks"
                )))
            }
        }
        let t3 = self.trace()?;
        self.face_of_walks(&t3)?;
        Ok((va, vb))
    }

    /// Declares a vertex ring (used after splits that expose cut vertices).
    pub fn add_vertex_ring(&mut self, v: VertexId, weak: bool) -> Result<(), MapError> {
        let trace = self.trace()?;
        let owner = self.face_of_walks(&trace)?;
        // cuff face: a face incident with v
        let mut slot = None;
        for (w, walk) in trace.walks.iter().enumerate() {
            let hit = walk.lone_vertex == Some(v)
                || walk.arcs.iter().any(|&a| self.raw.arc_tail(a) == v);
            if hit {
                slot = Some(owner[w]);
                break;
            }
        }
        let cuff_face =
            slot.ok_or_else(|| MapError::Internal(format!("vertex {v} has no face")))?;
        self.rings.push(Some(WorkRing::Vertex {
            vertex: v,
            weak,
            cuff_face,
        }));
        Ok(())
    }

    pub fn drop_ring(&mut self, r: usize) {
        self.rings[r] = None;
    }

    /// Compacts ids, re-traces, validates, and returns the finished graph
    /// with correspondence maps.
    pub fn finalize(&self) -> Result<(EmbeddedGraph, SurgeryMaps), MapError> {
        let nv_old = self.raw.alive.len();
        let mut vertex_to_new = vec![None; nv_old.max(self.orig_vertices)];
        let mut vertex_from_new = Vec::new();
        for v in 0..nv_old {
            if self.raw.alive[v] {
                vertex_to_new[v] = Some(vertex_from_new.len());
                vertex_from_new.push(v);
            }
        }
        let ne_old = self.raw.edges.len();
        let mut edge_to_new = vec![None; ne_old.max(self.orig_edges)];
        let mut edge_from_new = Vec::new();
        for e in 0..ne_old {
            if self.raw.edges[e].is_some() {
                edge_to_new[e] = Some(edge_from_new.len());
                edge_from_new.push(e);
            }
        }
        let edges: Vec<Option<super::EdgeRec>> = edge_from_new
            .iter()
            .map(|&e| {
                let rec = self.raw.edge(e);
                Some(super::EdgeRec {
                    u: vertex_to_new[rec.u].unwrap(),
                    v: vertex_to_new[rec.v].unwrap(),
                    negative: rec.negative,
                })
            })
            .collect();
        let rot: Vec<Vec<Dart>> = vertex_from_new
            .iter()
            .map(|&v| {
                self.raw.rot[v]
                    .iter()
                    .map(|d| Dart::new(edge_to_new[d.edge].unwrap(), d.end))
                    .collect()
            })
            .collect();
        let raw = RawMap {
            alive: vec![true; vertex_from_new.len()],
            edges,
            rot,
        };
        let trace = trace_walks(&raw)?;

        // resolve face walk sets in the compacted map
        let old_trace = self.trace()?;
        let mut face_specs: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut slot_to_new: BTreeMap<usize, usize> = BTreeMap::new();
        // map old walks to new walks: identical arcs modulo edge renaming
        let rename_walk = |walk: &super::Walk| -> super::Walk {
            match walk.lone_vertex {
                Some(v) => super::Walk {
                    arcs: Vec::new(),
                    sigmas: Vec::new(),
                    lone_vertex: Some(vertex_to_new[v].unwrap()),
                },
                None => {
                    let arcs: Vec<super::Arc> = walk
                        .arcs
                        .iter()
                        .map(|a| super::Arc::new(edge_to_new[a.edge].unwrap(), a.rev))
                        .collect();
                    super::Walk {
                        arcs,
                        sigmas: walk.sigmas.clone(),
                        lone_vertex: None,
                    }
                }
            }
        };
        // match by canonical arc content
        let mut new_walk_index: BTreeMap<Vec<(usize, bool)>, Vec<usize>> = BTreeMap::new();
        let mut new_lone_index: BTreeMap<usize, usize> = BTreeMap::new();
        for (w, walk) in trace.walks.iter().enumerate() {
            match walk.lone_vertex {
                Some(v) => {
                    new_lone_index.insert(v, w);
                }
                None => {
                    new_walk_index
                        .entry(walk.arcs.iter().map(|a| (a.edge, a.rev)).collect())
                        .or_default()
                        .push(w);
                }
            }
        }
        let mut used_new = vec![false; trace.walks.len()];
        for (slot, f) in self.faces.iter().enumerate() {
            let Some(f) = f else { continue };
            let mut walk_ids = Vec::new();
            for &k in &f.keys {
                let w_old = self.resolve_key(&old_trace, k)?;
                let renamed = rename_walk(&old_trace.walks[w_old]);
                let w_new = match renamed.lone_vertex {
                    Some(v) => new_lone_index[&v],
                    None => {
                        // same arc content possibly at different rotation
                        let mut found = None;
                        'outer: for start in 0..renamed.arcs.len() {
                            let key: Vec<(usize, bool)> = (0..renamed.arcs.len())
                                .map(|i| {
                                    let a = renamed.arcs[(start + i) % renamed.arcs.len()];
                                    (a.edge, a.rev)
                                })
                                .collect();
                            if let Some(cands) = new_walk_index.get(&key) {
                                for &c in cands {
                                    if !used_new[c] {
                                        found = Some(c);
                                        break 'outer;
                                    }
                                }
                                // all candidates used: ambiguity between a
                                // walk and its double; fall through to the
                                // reversed key
                            }
                            let rkey: Vec<(usize, bool)> = (0..renamed.arcs.len())
                                .map(|i| {
                                    let a = renamed.arcs
                                        [(start + renamed.arcs.len() - i) % renamed.arcs.len()]
                                    .reversed();
                                    (a.edge, a.rev)
                                })
                                .collect();
                            if let Some(cands) = new_walk_index.get(&rkey) {
                                for &c in cands {
                                    if !used_new[c] {
                                        found = Some(c);
                                        break 'outer;
                                    }
                                }
                            }
                        }
                        found.ok_or_else(|| {
                            MapError::Internal("finalize: walk matching failed".into())
                        })?
                    }
                };
                used_new[w_new] = true;
                walk_ids.push(w_new);
            }
            slot_to_new.insert(slot, face_specs.len());
            face_specs.push((f.genus, walk_ids));
        }

        let mut ring_specs = Vec::new();
        let mut ring_to_new = vec![None; self.rings.len()];
        for (ri, r) in self.rings.iter().enumerate() {
            let Some(r) = r else { continue };
            ring_to_new[ri] = Some(ring_specs.len());
            match r {
                WorkRing::Facial { face } => {
                    let f = slot_to_new
                        .get(&self.chase_face(*face))
                        .copied()
                        .ok_or_else(|| MapError::Internal("ring face vanished".into()))?;
                    ring_specs.push(RingSpec::Facial { face: f });
                }
                WorkRing::Vertex { vertex, weak, cuff_face } => {
                    let f = slot_to_new
                        .get(&self.chase_face(*cuff_face))
                        .copied()
                        .ok_or_else(|| MapError::Internal("cuff face vanished".into()))?;
                    ring_specs.push(RingSpec::Vertex {
                        vertex: vertex_to_new[*vertex]
                            .ok_or_else(|| MapError::Internal("ring vertex deleted".into()))?,
                        weak: *weak,
                        cuff_face: f,
                    });
                }
            }
        }

        let graph = EmbeddedGraph::assemble(raw, trace, &face_specs, &ring_specs)?;
        let mut face_to_new = vec![None; self.orig_faces];
        for f in 0..self.orig_faces {
            let live = self.chase_face(f);
            if let Some(&nf) = slot_to_new.get(&live) {
                face_to_new[f] = Some(nf);
            }
        }
        Ok((
            graph,
            SurgeryMaps {
                vertex_to_new,
                vertex_from_new,
                edge_to_new,
                edge_from_new,
                face_to_new,
                ring_to_new,
            },
        ))
    }
}

#[derive(Debug, Clone)]
struct CornerRef {
    original: WalkKey,
    pair: Option<(Dart, Dart)>,
    lone: Option<VertexId>,
}

impl EmbeddedGraph {
    /// The embedding induced on a subgraph: the listed edges are kept, all
    /// others deleted; vertices outside `keep_vertices` are dropped when
    /// they become isolated.  Faces merge along the way; the maps report
    /// where every original face went.
    pub fn subgraph_embedding(
        &self,
        keep_edges: &BTreeSet<EdgeId>,
        keep_vertices: &BTreeSet<VertexId>,
    ) -> Result<(EmbeddedGraph, SurgeryMaps), MapError> {
        let mut wm = WorkMap::from_graph(self);
        let all: Vec<EdgeId> = self.raw().edge_ids().collect();
        for e in all {
            if !keep_edges.contains(&e) {
                wm.delete_edge(e)?;
            }
        }
        for v in 0..self.vertex_count() {
            if wm.raw().alive[v] && wm.raw().rot[v].is_empty() && !keep_vertices.contains(&v) {
                wm.delete_isolated_vertex(v)?;
            }
        }
        wm.finalize()
    }

    /// Re-embeds with every facial walk its own disk face: the cut-and-cap
    /// cellularization.  Facial rings survive; vertex rings are redeclared
    /// on the face now holding them.
    pub fn cellularized(&self) -> Result<EmbeddedGraph, MapError> {
        let raw = self.raw().clone();
        let trace = trace_walks(&raw)?;
        let faces: Vec<(usize, Vec<usize>)> =
            (0..trace.walks.len()).map(|w| (0, vec![w])).collect();
        let mut ring_specs = Vec::new();
        for r in self.rings() {
            match *r {
                super::Ring::Facial { walk, .. } => {
                    // locate the matching walk in the re-trace (same arcs)
                    let target = &self.walks()[walk];
                    let w = trace
                        .walks
                        .iter()
                        .position(|cand| cand.arcs == target.arcs)
                        .ok_or_else(|| MapError::Internal("ring walk lost".into()))?;
                    ring_specs.push(RingSpec::Facial { face: w });
                }
                super::Ring::Vertex { vertex, weak, .. } => {
                    let w = trace
                        .walks
                        .iter()
                        .position(|cand| {
                            cand.lone_vertex == Some(vertex)
                                || cand.arcs.iter().any(|&a| raw.arc_tail(a) == vertex)
                        })
                        .ok_or_else(|| MapError::Internal("ring vertex lost".into()))?;
                    ring_specs.push(RingSpec::Vertex {
                        vertex,
                        weak,
                        cuff_face: w,
                    });
                }
            }
        }
        EmbeddedGraph::assemble(raw, trace, &faces, &ring_specs)
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    #[test]
    fn delete_chord_merges_faces() {
        let g = hexagon_tripod();
        // delete one spoke of the center: faces merge pairwise
        let e = g.edge_between(6, 0).unwrap();
        let mut wm = WorkMap::from_graph(&g);
        wm.delete_edge(e).unwrap();
        let (h, maps) = wm.finalize().unwrap();
        assert_eq!(h.euler_genus(), 0);
        assert_eq!(h.edge_count(), g.edge_count() - 1);
        let mut sizes: Vec<usize> = h.internal_faces().map(|f| h.face_size(f)).collect();
        sizes.sort();
        assert_eq!(sizes, vec![4, 6]);
        // face map: two old quads point at the merged face
        let merged: Vec<_> = (0..g.faces().len())
            .filter_map(|f| maps.face_to_new[f])
            .collect();
        assert_eq!(merged.len(), g.faces().len());
    }

    #[test]
    fn delete_all_spokes_leaves_ring() {
        let g = hexagon_tripod();
        let keep: BTreeSet<EdgeId> = g
            .edges_iter()
            .filter(|(_, rec)| rec.u != 6 && rec.v != 6)
            .map(|(e, _)| e)
            .collect();
        let keep_v: BTreeSet<VertexId> = (0..6).collect();
        let (h, _) = g.subgraph_embedding(&keep, &keep_v).unwrap();
        assert_eq!(h.vertex_count(), 6);
        assert_eq!(h.euler_genus(), 0);
        assert_eq!(h.faces().len(), 2);
        assert_eq!(h.rings().len(), 1);
    }

    #[test]
    fn delete_pendant_edge_keeps_vertex_walks() {
        // path graph on the sphere: 0-1-2; delete edge (1,2)
        let neighbors = vec![vec![1], vec![0, 2], vec![1]];
        let g = plane_from_neighbors(3, &neighbors, &[]);
        let e = g.edge_between(1, 2).unwrap();
        let mut wm = WorkMap::from_graph(&g);
        wm.delete_edge(e).unwrap();
        // vertex 2 is now isolated but still alive
        assert!(wm.raw().alive[2]);
        let (h, _) = wm.finalize().unwrap();
        assert_eq!(h.euler_genus(), 0);
        assert_eq!(h.walks().len(), 2); // edge walk + lone vertex
    }

    #[test]
    fn split_cut_vertex_disconnects_surface() {
        // path 0-1-2: the sphere face walk visits vertex 1 twice; a curve
        // through the face joining the appearances separates the sphere, so
        // finalizing the split map must report the disconnection
        let neighbors = vec![vec![1], vec![0, 2], vec![1]];
        let g = plane_from_neighbors(3, &neighbors, &[]);
        let mut wm = WorkMap::from_graph(&g);
        let dart_at = |g: &super::super::EmbeddedGraph, v: usize, w: usize| {
            let e = g.edge_between(v, w).unwrap();
            Dart::new(e, if g.edge(e).u == v { 0 } else { 1 })
        };
        let d_a = dart_at(&g, 1, 0);
        let d_b = dart_at(&g, 1, 2);
        wm.split_vertex_in_face(1, 0, d_a, d_b).unwrap();
        assert!(matches!(
            wm.finalize(),
            Err(MapError::EulerMismatch(_))
        ));
    }
}
