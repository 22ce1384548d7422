//! Homotopy classification of cycles, cutting along cycles and curves, and
//! graph expansions.
//!
//! Contractibility needs no homotopy machinery: cutting along the cycle and
//! capping the holes reduces every question to Euler counts and ring
//! membership of the resulting pieces.  A cycle is one-sided exactly when
//! it carries an odd number of negative edges.

use crate::graph::canonical_cycle;
use crate::surface_map::{
    cycles_equal, Arc, Dart, EdgeId, EmbeddedGraph, FaceId, MapError, Ring, RingId, RingSpec,
    VertexId, WalkId,
};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("map error: {0}")]
    Map(#[from] MapError),
    #[error("expansion property violated: {0}")]
    PropertyViolated(String),
}

// ---------------------------------------------------------------------------
// cutting along a cycle
// ---------------------------------------------------------------------------

/// One connected component of the cut-open surface, closed up with a disk
/// on every cut boundary.
#[derive(Debug, Clone)]
pub struct CutPiece {
    pub graph: EmbeddedGraph,
    /// piece vertex -> host vertex
    pub vertex_origin: Vec<VertexId>,
    /// piece edge -> host edge (cut copies point at the cycle edges)
    pub edge_origin: Vec<EdgeId>,
    /// rings of the piece that are cut boundaries
    pub cut_rings: Vec<RingId>,
    /// (piece ring, host ring) for rings inherited from the host
    pub inherited_rings: Vec<(RingId, RingId)>,
    /// host face -> piece face, for the host faces living in this piece
    pub face_map: BTreeMap<FaceId, FaceId>,
}

#[derive(Debug, Clone)]
pub struct CutResult {
    pub pieces: Vec<CutPiece>,
    pub two_sided: bool,
    pub separating: bool,
}

impl CutResult {
    /// Piece containing a given host face.
    pub fn piece_of_face(&self, f: FaceId) -> Option<usize> {
        self.pieces.iter().position(|p| p.face_map.contains_key(&f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Key {
    Gap(usize, Dart),
    Lone(usize),
}

/// Cuts the surface along a cycle of the graph.  Every vertex of the cycle
/// splits in two, the cycle edges are doubled (crosswise at the seam when
/// the cycle is one-sided), and each cut boundary is capped by a disk that
/// becomes a facial ring of its piece.
pub fn cut_along(g: &EmbeddedGraph, cycle: &[VertexId]) -> Result<CutResult, MapError> {
    let n = cycle.len();
    let cycle_edges = g.cycle_edges(cycle)?;
    let edge_set: BTreeSet<EdgeId> = cycle_edges.iter().copied().collect();
    if edge_set.len() != n {
        return Err(MapError::NotACycle("cycle repeats an edge".into()));
    }
    let neg = |e: EdgeId| g.edge(e).negative;
    let two_sided = cycle_edges.iter().filter(|&&e| neg(e)).count() % 2 == 0;
    let mut tau = vec![true; n];
    for i in 1..n {
        tau[i] = tau[i - 1] ^ neg(cycle_edges[i - 1]);
    }
    let on_cycle: BTreeMap<VertexId, usize> =
        cycle.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let nv = g.vertex_count();
    let ne = g.edge_count();
    let v_left = |i: usize| nv + 2 * i;
    let v_right = |i: usize| nv + 2 * i + 1;

    // new edge table: host edges (cycle edges dropped) + 2n copies
    let mut edges: Vec<Option<crate::surface_map::EdgeRec>> = (0..ne)
        .map(|e| {
            if edge_set.contains(&e) {
                None
            } else {
                Some(*g.edge(e))
            }
        })
        .collect();
    // endpoints of copies, left chain then right chain
    let copy_l = |i: usize| ne + 2 * i;
    let copy_r = |i: usize| ne + 2 * i + 1;
    for i in 0..n {
        let j = (i + 1) % n;
        let (lu, lv, ru, rv) = if i == n - 1 && !two_sided {
            (v_left(i), v_right(j), v_right(i), v_left(j))
        } else {
            (v_left(i), v_left(j), v_right(i), v_right(j))
        };
        edges.push(Some(crate::surface_map::EdgeRec {
            u: lu,
            v: lv,
            negative: neg(cycle_edges[i]),
        }));
        edges.push(Some(crate::surface_map::EdgeRec {
            u: ru,
            v: rv,
            negative: neg(cycle_edges[i]),
        }));
        debug_assert_eq!(edges.len() - 2, copy_l(i));
        debug_assert_eq!(edges.len() - 1, copy_r(i));
    }

    // split rotations; record which copy vertex holds each contiguous arc
    let mut rot: Vec<Vec<Dart>> = (0..nv).map(|v| g.rotation(v).to_vec()).collect();
    rot.resize(nv + 2 * n, Vec::new());
    let mut alive = vec![true; nv + 2 * n];
    // per cycle vertex: (arc holder of the A1 arc starting at d_in, holder of A2)
    let mut arc_holder: BTreeMap<(usize, bool), usize> = BTreeMap::new(); // (i, is_a1) -> vertex
    let mut dart_side: BTreeMap<Dart, usize> = BTreeMap::new(); // interior dart -> copy vertex
    for (i, &v) in cycle.iter().enumerate() {
        let e_in = cycle_edges[(i + n - 1) % n];
        let e_out = cycle_edges[i];
        let host_rot = g.rotation(v);
        let deg = host_rot.len();
        let d_in = host_rot
            .iter()
            .position(|d| d.edge == e_in)
            .expect("cycle dart");
        let d_out = host_rot
            .iter()
            .position(|d| d.edge == e_out)
            .expect("cycle dart");
        // A1: from d_in to d_out inclusive; A2: from d_out to d_in inclusive
        let take = |from: usize, to: usize| {
            let mut out = Vec::new();
            let mut k = from;
            loop {
                out.push(host_rot[k]);
                if k == to {
                    break;
                }
                k = (k + 1) % deg;
            }
            out
        };
        let a1 = take(d_in, d_out);
        let a2 = take(d_out, d_in);
        let (h1, h2) = if tau[i] {
            (v_left(i), v_right(i))
        } else {
            (v_right(i), v_left(i))
        };
        arc_holder.insert((i, true), h1);
        arc_holder.insert((i, false), h2);
        // replace the boundary darts with copy darts; find the copy edge of
        // a given host edge incident with the holder vertex
        let copy_dart = |holder: usize, host_e: EdgeId, edges: &[Option<crate::surface_map::EdgeRec>]| -> Dart {
            let k = cycle_edges.iter().position(|&x| x == host_e).unwrap();
            for cand in [copy_l(k), copy_r(k)] {
                let rec = edges[cand].as_ref().unwrap();
                if rec.u == holder {
                    return Dart::new(cand, 0);
                }
                if rec.v == holder {
                    return Dart::new(cand, 1);
                }
            }
            panic!("no copy of edge {host_e} at holder {holder}");
        };
        for (holder, arc) in [(h1, &a1), (h2, &a2)] {
            let mut list = Vec::with_capacity(arc.len());
            for (k, &d) in arc.iter().enumerate() {
                if k == 0 || k == arc.len() - 1 {
                    let host_e = d.edge;
                    list.push(copy_dart(holder, host_e, &edges));
                } else {
                    dart_side.insert(d, holder);
                    list.push(d);
                }
            }
            rot[holder] = list;
        }
        alive[v] = false;
        rot[v].clear();
    }
    // re-endpoint interior edges at split vertices
    for (&d, &holder) in &dart_side {
        let rec = edges[d.edge].as_mut().expect("interior edge alive");
        if d.end == 0 {
            rec.u = holder;
        } else {
            rec.v = holder;
        }
    }

    // corner keys for every host face walk, remapped to the cut map
    let mut walk_gap: BTreeMap<WalkId, (VertexId, usize)> = BTreeMap::new();
    for w in 0..g.walks().len() {
        if g.walk(w).lone_vertex.is_some() {
            continue;
        }
        let gap = min_gap_of_walk(g, w);
        walk_gap.insert(w, gap);
    }
    let remap_key = |w: WalkId| -> Key {
        if let Some(v) = g.walk(w).lone_vertex {
            return Key::Lone(v);
        }
        let (v, gap) = walk_gap[&w];
        let d = g.rotation(v)[gap];
        match on_cycle.get(&v) {
            None => Key::Gap(v, d),
            Some(&i) => {
                let e_in = cycle_edges[(i + n - 1) % n];
                let e_out = cycle_edges[i];
                if d.edge == e_in {
                    // corner after d_in: the arc starting at d_in is A1
                    let holder = arc_holder[&(i, true)];
                    Key::Gap(holder, rot[holder][0])
                } else if d.edge == e_out {
                    let holder = arc_holder[&(i, false)];
                    Key::Gap(holder, rot[holder][0])
                } else {
                    Key::Gap(dart_side[&d], d)
                }
            }
        }
    };
    let mut face_keys: Vec<(usize, Vec<Key>)> = Vec::new(); // (host face, keys)
    for (f, rec) in g.faces().iter().enumerate() {
        let keys: Vec<Key> = rec.walks.iter().map(|&w| remap_key(w)).collect();
        face_keys.push((f, keys));
    }
    // cap keys: wrap corner of the A1 holder at position 0, and of A2 holder
    let cap_keys: Vec<Key> = {
        let h1 = arc_holder[&(0, true)];
        let h2 = arc_holder[&(0, false)];
        vec![
            Key::Gap(h1, *rot[h1].last().unwrap()),
            Key::Gap(h2, *rot[h2].last().unwrap()),
        ]
    };

    let raw = crate::surface_map::RawMap { alive, edges, rot };
    let trace = crate::surface_map::trace_raw(&raw)?;
    let resolve = |key: Key| -> Result<WalkId, MapError> {
        match key {
            Key::Lone(v) => trace
                .lone_walk
                .get(&v)
                .copied()
                .ok_or_else(|| MapError::Internal(format!("lone walk {v} missing after cut"))),
            Key::Gap(v, d) => {
                let pos = raw.rot[v]
                    .iter()
                    .position(|&x| x == d)
                    .ok_or_else(|| MapError::Internal("cut key dart missing".into()))?;
                trace
                    .gap_walk
                    .get(&(v, pos))
                    .copied()
                    .ok_or_else(|| MapError::Internal("cut key gap missing".into()))
            }
        }
    };

    // face specs over the whole cut map
    let mut face_specs: Vec<(usize, Vec<WalkId>, Option<usize>)> = Vec::new(); // genus, walks, host face
    let mut walk_used = vec![false; trace.walks.len()];
    for (f, keys) in &face_keys {
        let mut ws = Vec::new();
        for &k in keys {
            let w = resolve(k)?;
            walk_used[w] = true;
            ws.push(w);
        }
        face_specs.push((g.face(*f).genus, ws, Some(*f)));
    }
    let cap_walks: BTreeSet<WalkId> = cap_keys
        .iter()
        .map(|&k| resolve(k))
        .collect::<Result<_, _>>()?;
    for &w in &cap_walks {
        if walk_used[w] {
            return Err(MapError::Internal("cap walk claimed by a host face".into()));
        }
        walk_used[w] = true;
        face_specs.push((0, vec![w], None));
    }
    if let Some(w) = walk_used.iter().position(|&b| !b) {
        return Err(MapError::Internal(format!("cut walk {w} unassigned")));
    }
    if two_sided && cap_walks.len() != 2 {
        return Err(MapError::Internal("two-sided cut expects two cap walks".into()));
    }
    if !two_sided && cap_walks.len() != 1 {
        return Err(MapError::Internal("one-sided cut expects one cap walk".into()));
    }

    // partition into pieces: vertices joined by edges and by shared faces
    let total_v = raw.alive.len();
    let mut uf: Vec<usize> = (0..total_v).collect();
    fn find(uf: &mut Vec<usize>, x: usize) -> usize {
        if uf[x] != x {
            let r = find(uf, uf[x]);
            uf[x] = r;
        }
        uf[x]
    }
    fn union(uf: &mut Vec<usize>, a: usize, b: usize) {
        let ra = find(uf, a);
        let rb = find(uf, b);
        if ra != rb {
            uf[ra] = rb;
        }
    }
    for e in raw.edge_ids() {
        let rec = raw.edge(e);
        union(&mut uf, rec.u, rec.v);
    }
    for (_, ws, _) in &face_specs {
        let mut verts: Vec<VertexId> = Vec::new();
        for &w in ws {
            match trace.walks[w].lone_vertex {
                Some(v) => verts.push(v),
                None => verts.extend(trace.walks[w].arcs.iter().map(|&a| raw.arc_tail(a))),
            }
        }
        for pair in verts.windows(2) {
            union(&mut uf, pair[0], pair[1]);
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    for v in 0..total_v {
        if raw.alive[v] {
            let r = find(&mut uf, v);
            if !roots.contains(&r) {
                roots.push(r);
            }
        }
    }
    roots.sort();

    // assemble pieces
    let mut pieces = Vec::new();
    for &root in &roots {
        let piece_vertices: Vec<VertexId> = (0..total_v)
            .filter(|&v| raw.alive[v] && find(&mut uf, v) == root)
            .collect();
        let vset: BTreeSet<VertexId> = piece_vertices.iter().copied().collect();
        let mut v_new = BTreeMap::new();
        for (i, &v) in piece_vertices.iter().enumerate() {
            v_new.insert(v, i);
        }
        let piece_edges: Vec<EdgeId> = raw
            .edge_ids()
            .filter(|&e| vset.contains(&raw.edge(e).u))
            .collect();
        let mut e_new = BTreeMap::new();
        for (i, &e) in piece_edges.iter().enumerate() {
            e_new.insert(e, i);
        }
        let p_edges: Vec<(usize, usize, bool)> = piece_edges
            .iter()
            .map(|&e| {
                let rec = raw.edge(e);
                (v_new[&rec.u], v_new[&rec.v], rec.negative)
            })
            .collect();
        let p_rot: Vec<Vec<Dart>> = piece_vertices
            .iter()
            .map(|&v| {
                raw.rot[v]
                    .iter()
                    .map(|d| Dart::new(e_new[&d.edge], d.end))
                    .collect()
            })
            .collect();
        let p_raw = crate::surface_map::RawMap {
            alive: vec![true; piece_vertices.len()],
            edges: p_edges
                .iter()
                .map(|&(u, v, negv)| {
                    Some(crate::surface_map::EdgeRec {
                        u,
                        v,
                        negative: negv,
                    })
                })
                .collect(),
            rot: p_rot,
        };
        let p_trace = crate::surface_map::trace_raw(&p_raw)?;
        // match cut-map walks into the piece by renamed content
        let rename_arcs = |w: WalkId| -> Option<Vec<Arc>> {
            let walk = &trace.walks[w];
            if let Some(v) = walk.lone_vertex {
                return if vset.contains(&v) { Some(Vec::new()) } else { None };
            }
            if !vset.contains(&raw.arc_tail(walk.arcs[0])) {
                return None;
            }
            Some(
                walk.arcs
                    .iter()
                    .map(|a| Arc::new(e_new[&a.edge], a.rev))
                    .collect(),
            )
        };
        let find_piece_walk = |w: WalkId, used: &mut Vec<bool>| -> Result<Option<WalkId>, MapError> {
            let Some(arcs) = rename_arcs(w) else {
                return Ok(None);
            };
            if arcs.is_empty() {
                let v = v_new[&trace.walks[w].lone_vertex.unwrap()];
                let pw = p_trace
                    .lone_walk
                    .get(&v)
                    .copied()
                    .ok_or_else(|| MapError::Internal("piece lone walk missing".into()))?;
                used[pw] = true;
                return Ok(Some(pw));
            }
            let m = arcs.len();
            for (pw, cand) in p_trace.walks.iter().enumerate() {
                if used[pw] || cand.arcs.len() != m || cand.lone_vertex.is_some() {
                    continue;
                }
                let matches = (0..m).any(|s| (0..m).all(|k| cand.arcs[(s + k) % m] == arcs[k]))
                    || (0..m).any(|s| {
                        (0..m).all(|k| cand.arcs[(s + m - k) % m] == arcs[k].reversed())
                    });
                if matches {
                    used[pw] = true;
                    return Ok(Some(pw));
                }
            }
            Err(MapError::Internal("piece walk matching failed".into()))
        };
        let mut used = vec![false; p_trace.walks.len()];
        let mut p_face_specs: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut face_map = BTreeMap::new();
        let mut cap_faces: Vec<usize> = Vec::new();
        for (genus, ws, host) in &face_specs {
            // a face is in this piece iff its walks' vertices are
            let mut p_ws = Vec::new();
            let mut any = false;
            for &w in ws {
                if let Some(pw) = find_piece_walk(w, &mut used)? {
                    p_ws.push(pw);
                    any = true;
                } else if any {
                    return Err(MapError::Internal("face straddles pieces".into()));
                }
            }
            if !any {
                continue;
            }
            let fid = p_face_specs.len();
            p_face_specs.push((*genus, p_ws));
            match host {
                Some(hf) => {
                    face_map.insert(*hf, fid);
                }
                None => cap_faces.push(fid),
            }
        }
        // rings: caps + inherited
        let mut ring_specs: Vec<RingSpec> = Vec::new();
        let mut cut_rings = Vec::new();
        let mut inherited = Vec::new();
        for &cf in &cap_faces {
            cut_rings.push(ring_specs.len());
            ring_specs.push(RingSpec::Facial { face: cf });
        }
        for (ri, ring) in g.rings().iter().enumerate() {
            match *ring {
                Ring::Facial { face, .. } => {
                    if let Some(&pf) = face_map.get(&face) {
                        inherited.push((ring_specs.len(), ri));
                        ring_specs.push(RingSpec::Facial { face: pf });
                    }
                }
                Ring::Vertex { vertex, weak, cuff_face } => {
                    let Some(&pf) = face_map.get(&cuff_face) else {
                        continue;
                    };
                    // vertex may have been split: pick its copy incident to
                    // the cuff face, preferring the left copy
                    let candidates: Vec<VertexId> = match on_cycle.get(&vertex) {
                        None => vec![vertex],
                        Some(&i) => vec![v_left(i), v_right(i)],
                    };
                    let mut placed = None;
                    for cand in candidates {
                        if let Some(&pv) = v_new.get(&cand) {
                            let incident = p_face_specs[pf].1.iter().any(|&pw| {
                                let walk = &p_trace.walks[pw];
                                walk.lone_vertex == Some(pv)
                                    || walk.arcs.iter().any(|&a| p_raw.arc_tail(a) == pv)
                            });
                            if incident {
                                placed = Some(pv);
                                break;
                            }
                        }
                    }
                    if let Some(pv) = placed {
                        inherited.push((ring_specs.len(), ri));
                        ring_specs.push(RingSpec::Vertex {
                            vertex: pv,
                            weak,
                            cuff_face: pf,
                        });
                    }
                }
            }
        }
        let graph = crate::surface_map::assemble_graph(p_raw, p_trace, &p_face_specs, &ring_specs)?;
        pieces.push(CutPiece {
            graph,
            vertex_origin: piece_vertices
                .iter()
                .map(|&v| {
                    if v < nv {
                        v
                    } else {
                        cycle[(v - nv) / 2]
                    }
                })
                .collect(),
            edge_origin: piece_edges
                .iter()
                .map(|&e| if e < ne { e } else { cycle_edges[(e - ne) / 2] })
                .collect(),
            cut_rings,
            inherited_rings: inherited,
            face_map,
        });
    }

    let separating = pieces.len() == 2;
    Ok(CutResult {
        pieces,
        two_sided,
        separating,
    })
}

/// Least rotation gap belonging to a walk, for key-building.
fn min_gap_of_walk(g: &EmbeddedGraph, w: WalkId) -> (VertexId, usize) {
    g.gap_entries()
        .find(|&(_, ww)| ww == w)
        .map(|(gap, _)| gap)
        .expect("walk has a gap")
}

// ---------------------------------------------------------------------------
// cycle classification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CycleTag {
    Contractible,
    Surrounds(RingId),
    Essential,
}

/// Homotopy type of a cycle together with its sidedness and whether it
/// separates the closed-up surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleClass {
    pub tag: CycleTag,
    pub two_sided: bool,
    pub separating: bool,
}

pub fn classify_cycle(g: &EmbeddedGraph, cycle: &[VertexId]) -> Result<CycleClass, MapError> {
    let cut = cut_along(g, cycle)?;
    let tag = classify_from_cut(&cut);
    Ok(CycleClass {
        tag,
        two_sided: cut.two_sided,
        separating: cut.separating,
    })
}

fn classify_from_cut(cut: &CutResult) -> CycleTag {
    if cut.separating {
        for p in &cut.pieces {
            if p.graph.euler_genus() == 0 && p.cut_rings.len() == 1 && p.inherited_rings.is_empty()
            {
                return CycleTag::Contractible;
            }
        }
        for p in &cut.pieces {
            if p.graph.euler_genus() == 0 && p.cut_rings.len() == 1 && p.inherited_rings.len() == 1
            {
                return CycleTag::Surrounds(p.inherited_rings[0].1);
            }
        }
    }
    CycleTag::Essential
}

/// All 4-cycles of the graph that are non-contractible.
pub fn non_contractible_4cycles(g: &EmbeddedGraph) -> Result<Vec<Vec<VertexId>>, MapError> {
    let abs = g.to_simple_graph();
    let mut out = Vec::new();
    for cyc in abs.cycles_of_length(4) {
        if classify_cycle(g, &cyc)?.tag != CycleTag::Contractible {
            out.push(cyc);
        }
    }
    Ok(out)
}

/// Omnipresence test for a non-open-2-cell internal face: every walk is a
/// lone vertex ring, or a cycle whose far side is a disk with exactly one
/// ring inside.
pub fn face_is_omnipresent(g: &EmbeddedGraph, f: FaceId) -> bool {
    for &w in &g.face(f).walks {
        let walk = g.walk(w);
        if let Some(v) = walk.lone_vertex {
            if g.vertex_ring_weak(v).is_none() {
                return false;
            }
            continue;
        }
        let Some(cyc) = g.walk_cycle(w) else {
            return false;
        };
        // the cycle of a facial ring bounds its own patch: disk, one ring
        let mut is_ring_cycle = false;
        for ring in g.rings() {
            if let Ring::Facial { walk: rw, .. } = ring {
                if cycles_equal(&g.walk_vertices(*rw), &cyc) {
                    is_ring_cycle = true;
                    break;
                }
            }
        }
        if is_ring_cycle {
            continue;
        }
        let Ok(cut) = cut_along(g, &cyc) else {
            return false;
        };
        if !cut.separating {
            return false;
        }
        let Some(own) = cut.piece_of_face(f) else {
            return false;
        };
        let far = &cut.pieces[1 - own];
        if !(far.graph.euler_genus() == 0
            && far.cut_rings.len() == 1
            && far.inherited_rings.len() == 1)
        {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// G-expansion
// ---------------------------------------------------------------------------

/// One member of a G-expansion: the part of the host graph drawn in one
/// face of the subgraph, re-closed with its natural rings.
#[derive(Debug, Clone)]
pub struct ExpansionPiece {
    pub graph: EmbeddedGraph,
    /// the face of the subgraph embedding this piece fills
    pub host_face: FaceId,
    pub vertex_origin: Vec<VertexId>,
    pub edge_origin: Vec<EdgeId>,
    /// host internal faces -> piece faces
    pub face_map: BTreeMap<FaceId, FaceId>,
}

#[derive(Debug, Clone)]
pub struct Expansion {
    /// the embedding induced on the subgraph J
    pub j_graph: EmbeddedGraph,
    /// host face -> face of J
    pub host_face_to_j: BTreeMap<FaceId, FaceId>,
    pub pieces: Vec<ExpansionPiece>,
}

/// The embedding induced on a subgraph, plus where each host face went.
///
/// Rings of the host are surface structure, not subgraph content: their
/// edges and vertices always survive, so the faces of J see the cuffs the
/// way the construction expects.
pub fn subgraph_with_face_map(
    g: &EmbeddedGraph,
    j_edges: &BTreeSet<EdgeId>,
    j_isolated: &BTreeSet<VertexId>,
) -> Result<(EmbeddedGraph, BTreeMap<FaceId, FaceId>, crate::surface_map::SurgeryMaps), TopologyError> {
    let mut keep_edges = j_edges.clone();
    keep_edges.extend(g.ring_edges());
    let mut keep_vertices: BTreeSet<VertexId> = j_isolated.clone();
    for &e in &keep_edges {
        keep_vertices.insert(g.edge(e).u);
        keep_vertices.insert(g.edge(e).v);
    }
    keep_vertices.extend(g.ring_vertices());
    let (j_emb, maps) = g
        .subgraph_embedding(&keep_edges, &keep_vertices)
        .map_err(TopologyError::Map)?;
    let mut face_map = BTreeMap::new();
    for f in 0..g.faces().len() {
        if let Some(nf) = maps.face_to_new[f] {
            face_map.insert(f, nf);
        }
    }
    Ok((j_emb, face_map, maps))
}

/// Builds the G-expansion of the faces `s_faces` of the subgraph `J`.
///
/// `s_faces` are face ids of the induced subgraph embedding (as returned by
/// `subgraph_with_face_map`).  The construction checks the boundary-union,
/// isolated-vertex and cuff conditions and reports which clause fails.
pub fn g_expansion(
    g: &EmbeddedGraph,
    j_edges: &BTreeSet<EdgeId>,
    j_isolated: &BTreeSet<VertexId>,
    s_faces: &[FaceId],
) -> Result<Expansion, TopologyError> {
    let (j_emb, host_face_to_j, maps) = subgraph_with_face_map(g, j_edges, j_isolated)?;
    let s_set: BTreeSet<FaceId> = s_faces.iter().copied().collect();
    for &f in &s_set {
        if f >= j_emb.faces().len() {
            return Err(TopologyError::PropertyViolated(format!(
                "face {f} does not exist in the subgraph embedding"
            )));
        }
        if j_emb.face(f).is_ring_face() {
            return Err(TopologyError::PropertyViolated(format!(
                "face {f} of J is a ring face"
            )));
        }
    }

    // J proper: the given edges plus the given isolated vertices
    let mut j_vertices: BTreeSet<VertexId> = j_isolated.clone();
    for &e in j_edges {
        j_vertices.insert(g.edge(e).u);
        j_vertices.insert(g.edge(e).v);
    }
    // clause 1: J equals the union of the boundaries of the faces in S
    let mut covered_edges: BTreeSet<EdgeId> = BTreeSet::new();
    let mut covered_vertices: BTreeSet<VertexId> = BTreeSet::new();
    for &f in &s_set {
        for &w in &j_emb.face(f).walks {
            match j_emb.walk(w).lone_vertex {
                Some(v) => {
                    covered_vertices.insert(maps.vertex_from_new[v]);
                }
                None => {
                    for &a in &j_emb.walk(w).arcs {
                        covered_edges.insert(maps.edge_from_new[a.edge]);
                        covered_vertices.insert(maps.vertex_from_new[j_emb.arc_tail(a)]);
                    }
                }
            }
        }
    }
    for &e in j_edges {
        if !covered_edges.contains(&e) {
            return Err(TopologyError::PropertyViolated(format!(
                "boundary-union clause: edge {e} of J is on no face of S"
            )));
        }
    }
    for &v in &j_vertices {
        if !covered_vertices.contains(&v) {
            return Err(TopologyError::PropertyViolated(format!(
                "boundary-union clause: vertex {v} of J is on no face of S"
            )));
        }
    }
    // clause 2: isolated vertices of J are vertex rings of the host
    for &v in j_isolated {
        if g.vertex_ring_weak(v).is_none() {
            return Err(TopologyError::PropertyViolated(format!(
                "isolated-vertex clause: isolated vertex {v} of J is not a vertex ring"
            )));
        }
    }
    // clause 3: cuffs meeting S-faces carry a vertex ring of J; facial
    // rings are kept intact by construction, so only vertex rings can fail
    for (ri, ring) in g.rings().iter().enumerate() {
        if let Ring::Vertex { vertex, cuff_face, .. } = *ring {
            let jf = host_face_to_j[&cuff_face];
            if s_set.contains(&jf) && !j_vertices.contains(&vertex) {
                return Err(TopologyError::PropertyViolated(format!(
                    "cuff clause: cuff of vertex ring {ri} meets a face of S but {vertex} is not in J"
                )));
            }
        }
    }

    // interior assignment: host faces, edges, vertices per J-face
    let mut faces_in: BTreeMap<FaceId, Vec<FaceId>> = BTreeMap::new();
    for f in g.internal_faces().collect::<Vec<_>>() {
        let jf = host_face_to_j[&f];
        faces_in.entry(jf).or_default().push(f);
    }
    let mut kept_edges: BTreeSet<EdgeId> = j_edges.clone();
    kept_edges.extend(g.ring_edges());
    let mut interior_edges: BTreeMap<FaceId, Vec<EdgeId>> = BTreeMap::new();
    for (e, _) in g.edges_iter() {
        if kept_edges.contains(&e) {
            continue;
        }
        // both sides of e map into the same J-face
        let (w1, w2) = g.edge_side_walks(e);
        let f1 = host_face_to_j[&g.face_of_walk(w1)];
        let f2 = host_face_to_j[&g.face_of_walk(w2)];
        if f1 != f2 {
            return Err(TopologyError::PropertyViolated(format!(
                "edge {e} outside J borders two different faces of J"
            )));
        }
        interior_edges.entry(f1).or_default().push(e);
    }

    let mut pieces = Vec::new();
    for &jf in s_faces {
        pieces.push(build_expansion_piece(
            g,
            &j_emb,
            &maps,
            jf,
            faces_in.get(&jf).cloned().unwrap_or_default(),
            interior_edges.get(&jf).cloned().unwrap_or_default(),
        )?);
    }
    Ok(Expansion {
        j_graph: j_emb,
        host_face_to_j,
        pieces,
    })
}

fn build_expansion_piece(
    g: &EmbeddedGraph,
    j_emb: &EmbeddedGraph,
    maps: &crate::surface_map::SurgeryMaps,
    jf: FaceId,
    host_faces: Vec<FaceId>,
    interior: Vec<EdgeId>,
) -> Result<ExpansionPiece, TopologyError> {
    // interior vertices: endpoints of interior edges not in J, plus any
    // isolated host vertices whose face lies in jf — the former covers all
    // desk cases; lone host vertices in the face interior only occur for
    // vertex rings, which clause 3 put into J.
    let mut vertex_origin: Vec<VertexId> = Vec::new();
    let mut v_new: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut edge_origin: Vec<EdgeId> = Vec::new();
    let mut edges: Vec<(usize, usize, bool)> = Vec::new();

    let j_vertex_of_host = |hv: VertexId| maps.vertex_to_new[hv];

    // occurrence vertices along each walk of jf
    // occ id -> (walk, position); position t sits at walk vertex tails[t]
    struct Occ {
        host_vertex: VertexId,
        ring_in_dart: Option<Dart>,  // piece dart toward previous occurrence
        ring_out_dart: Option<Dart>, // toward next occurrence
        host_d_in: Option<Dart>,     // host darts this occurrence replaces
        host_d_out: Option<Dart>,
        piece_id: usize,
    }
    let mut occs: Vec<Occ> = Vec::new();
    let mut ring_cycles: Vec<Vec<usize>> = Vec::new(); // occ ids per walk
    let mut lone_rings: Vec<(usize, bool)> = Vec::new(); // piece vertex, weak

    // host interior darts at a J-vertex, grouped per J-gap
    // j-gap at (host vertex hv): between consecutive J-darts in host rotation
    for &w in &j_emb.face(jf).walks {
        let walk = j_emb.walk(w);
        if let Some(jv) = walk.lone_vertex {
            let hv = maps.vertex_from_new[jv];
            let pid = vertex_origin.len();
            vertex_origin.push(hv);
            v_new.insert(hv, pid);
            let weak = g
                .vertex_ring_weak(hv)
                .ok_or_else(|| {
                    TopologyError::PropertyViolated(format!(
                        "isolated vertex {hv} of J is not a vertex ring"
                    ))
                })?;
            lone_rings.push((pid, weak));
            continue;
        }
        let k = walk.arcs.len();
        let base = occs.len();
        let mut cycle_ids = Vec::with_capacity(k);
        for t in 0..k {
            let jv = j_emb.arc_tail(walk.arcs[t]);
            let hv = maps.vertex_from_new[jv];
            let pid = vertex_origin.len();
            vertex_origin.push(hv);
            // host darts replaced: in-arc is arcs[t-1], out-arc arcs[t]
            let a_in = walk.arcs[(t + k - 1) % k];
            let a_out = walk.arcs[t];
            let host_d_in = Dart::new(maps.edge_from_new[a_in.edge], a_in.head_dart().end);
            let host_d_out = Dart::new(maps.edge_from_new[a_out.edge], a_out.tail_dart().end);
            occs.push(Occ {
                host_vertex: hv,
                ring_in_dart: None,
                ring_out_dart: None,
                host_d_in: Some(host_d_in),
                host_d_out: Some(host_d_out),
                piece_id: pid,
            });
            cycle_ids.push(base + t);
        }
        // ring edges between consecutive occurrences
        for t in 0..k {
            let a = walk.arcs[t];
            let host_e = maps.edge_from_new[a.edge];
            let eid = edges.len();
            edges.push((
                occs[base + t].piece_id,
                occs[base + (t + 1) % k].piece_id,
                g.edge(host_e).negative,
            ));
            edge_origin.push(host_e);
            occs[base + t].ring_out_dart = Some(Dart::new(eid, 0));
            occs[base + (t + 1) % k].ring_in_dart = Some(Dart::new(eid, 1));
        }
        ring_cycles.push(cycle_ids);
    }

    // interior vertices
    for &e in &interior {
        for hv in [g.edge(e).u, g.edge(e).v] {
            if j_vertex_of_host(hv).is_none() && !v_new.contains_key(&hv) {
                let pid = vertex_origin.len();
                vertex_origin.push(hv);
                v_new.insert(hv, pid);
            }
        }
    }
    // interior edges; endpoints at J-vertices resolve to occurrences below
    let mut interior_edge_ids: BTreeMap<EdgeId, usize> = BTreeMap::new();
    for &e in &interior {
        let rec = g.edge(e);
        let eid = edges.len();
        edges.push((usize::MAX, usize::MAX, rec.negative));
        edge_origin.push(e);
        interior_edge_ids.insert(e, eid);
        // non-J endpoints wire up immediately
        for (end, hv) in [(0usize, rec.u), (1usize, rec.v)] {
            if let Some(&pid) = v_new.get(&hv) {
                if j_vertex_of_host(hv).is_none() {
                    if end == 0 {
                        edges[eid].0 = pid;
                    } else {
                        edges[eid].1 = pid;
                    }
                }
            }
        }
    }

    // rotations: interior vertices copy the host rotation; occurrences take
    // the host interval between their replaced darts
    let mut rot: Vec<Vec<Dart>> = vec![Vec::new(); vertex_origin.len()];
    for (&hv, &pid) in &v_new {
        if j_vertex_of_host(hv).is_some() {
            continue;
        }
        rot[pid] = g
            .rotation(hv)
            .iter()
            .map(|d| {
                let eid = *interior_edge_ids.get(&d.edge).ok_or(()).map_err(|_| {
                    TopologyError::PropertyViolated(format!(
                        "edge {} at interior vertex {hv} is outside the face",
                        d.edge
                    ))
                })?;
                Ok(Dart::new(eid, d.end))
            })
            .collect::<Result<Vec<_>, TopologyError>>()?;
    }
    for occ in &occs {
        let hv = occ.host_vertex;
        let host_rot = g.rotation(hv);
        let deg = host_rot.len();
        let d_in = occ.host_d_in.unwrap();
        let d_out = occ.host_d_out.unwrap();
        let p_in = host_rot.iter().position(|&d| d == d_in).unwrap();
        let p_out = host_rot.iter().position(|&d| d == d_out).unwrap();
        // the occurrence's interval: walk from d_out forward to d_in —
        // exactly one of the two direction choices yields darts interior to
        // jf; both boundary darts are replaced by ring darts.  The interval
        // between the two J-darts in host succ order starting at d_out:
        let mut list = vec![occ.ring_out_dart.unwrap()];
        let mut k = (p_out + 1) % deg;
        while k != p_in {
            let d = host_rot[k];
            let eid = interior_edge_ids.get(&d.edge).copied().ok_or_else(|| {
                TopologyError::PropertyViolated(format!(
                    "host dart {:?} between walk corners is not interior to the face",
                    d
                ))
            })?;
            let pd = Dart::new(eid, d.end);
            if d.end == 0 {
                edges[eid].0 = occ.piece_id;
            } else {
                edges[eid].1 = occ.piece_id;
            }
            list.push(pd);
            k = (k + 1) % deg;
        }
        list.push(occ.ring_in_dart.unwrap());
        rot[occ.piece_id] = list;
    }
    // lone vertex rings with interior edges keep their whole rotation
    for &(pid, _) in &lone_rings {
        let hv = vertex_origin[pid];
        if g.degree(hv) > 0 {
            rot[pid] = g
                .rotation(hv)
                .iter()
                .map(|d| {
                    let eid = interior_edge_ids[&d.edge];
                    let pd = Dart::new(eid, d.end);
                    if d.end == 0 {
                        edges[eid].0 = pid;
                    } else {
                        edges[eid].1 = pid;
                    }
                    pd
                })
                .collect();
        }
    }
    if edges.iter().any(|&(u, v, _)| u == usize::MAX || v == usize::MAX) {
        return Err(TopologyError::PropertyViolated(
            "interior edge endpoint could not be attached".into(),
        ));
    }

    // hmm: occurrence interval direction: verify every interior dart got
    // attached exactly once
    let raw = crate::surface_map::RawMapParts {
        alive: vec![true; vertex_origin.len()],
        edges: edges
            .iter()
            .map(|&(u, v, negv)| {
                Some(crate::surface_map::EdgeRec {
                    u,
                    v,
                    negative: negv,
                })
            })
            .collect(),
        rot,
    }
    .into_raw();
    let trace = crate::surface_map::trace_raw(&raw).map_err(TopologyError::Map)?;

    // face specs: host faces inside jf, matched by corner keys
    let mut face_specs: Vec<(usize, Vec<WalkId>)> = Vec::new();
    let mut face_map = BTreeMap::new();
    let mut used = vec![false; trace.walks.len()];
    for &hf in &host_faces {
        let mut ws = Vec::new();
        for &hw in &g.face(hf).walks {
            let pw = match g.walk(hw).lone_vertex {
                Some(hv) => {
                    let pid = *v_new.get(&hv).ok_or_else(|| {
                        TopologyError::PropertyViolated(format!(
                            "lone vertex {hv} missing from the piece"
                        ))
                    })?;
                    trace.lone_walk.get(&pid).copied().ok_or_else(|| {
                        TopologyError::Map(MapError::Internal("piece lone walk missing".into()))
                    })?
                }
                None => {
                    // match by arc content: host arcs renamed through
                    // edge_origin (ring copies make this one-to-many; use
                    // rotation-and-reversal matching on origin sequences)
                    let harcs = &g.walk(hw).arcs;
                    let m = harcs.len();
                    let target: Vec<(EdgeId, bool)> =
                        harcs.iter().map(|a| (a.edge, a.rev)).collect();
                    let mut found = None;
                    'walks: for (pw, cand) in trace.walks.iter().enumerate() {
                        if used[pw] || cand.lone_vertex.is_some() || cand.arcs.len() != m {
                            continue;
                        }
                        let orig: Vec<(EdgeId, bool)> = cand
                            .arcs
                            .iter()
                            .map(|a| (edge_origin[a.edge], a.rev))
                            .collect();
                        for s in 0..m {
                            if (0..m).all(|k| orig[(s + k) % m] == target[k]) {
                                found = Some(pw);
                                break 'walks;
                            }
                        }
                        let rev_target: Vec<(EdgeId, bool)> =
                            (0..m).map(|k| (target[m - 1 - k].0, !target[m - 1 - k].1)).collect();
                        for s in 0..m {
                            if (0..m).all(|k| orig[(s + k) % m] == rev_target[k]) {
                                found = Some(pw);
                                break 'walks;
                            }
                        }
                    }
                    found.ok_or_else(|| {
                        TopologyError::Map(MapError::Internal(format!(
                            "host face {hf} walk not found in expansion piece"
                        )))
                    })?
                }
            };
            used[pw] = true;
            ws.push(pw);
        }
        face_map.insert(hf, face_specs.len());
        face_specs.push((g.face(hf).genus, ws));
    }
    // ring faces: each walk cycle of the piece boundary
    let mut ring_specs: Vec<RingSpec> = Vec::new();
    for cycle_ids in &ring_cycles {
        let verts: Vec<usize> = cycle_ids.iter().map(|&o| occs[o].piece_id).collect();
        // find the unmatched walk that is this cycle
        let mut found = None;
        for (pw, cand) in trace.walks.iter().enumerate() {
            if used[pw] || cand.lone_vertex.is_some() || cand.arcs.len() != verts.len() {
                continue;
            }
            let cand_vs: Vec<usize> = cand.arcs.iter().map(|&a| raw.arc_tail(a)).collect();
            if canonical_cycle(&cand_vs) == canonical_cycle(&verts) {
                found = Some(pw);
                break;
            }
        }
        let pw = found.ok_or_else(|| {
            TopologyError::Map(MapError::Internal("natural ring walk missing".into()))
        })?;
        used[pw] = true;
        let fid = face_specs.len();
        face_specs.push((0, vec![pw]));
        ring_specs.push(RingSpec::Facial { face: fid });
    }
    for &(pid, weak) in &lone_rings {
        // cuff face: the face holding the host cuff face of this vertex
        let hv = vertex_origin[pid];
        let host_cuff = g
            .rings()
            .iter()
            .find_map(|r| match *r {
                Ring::Vertex { vertex, cuff_face, .. } if vertex == hv => Some(cuff_face),
                _ => None,
            })
            .expect("vertex ring");
        let pf = *face_map.get(&host_cuff).ok_or_else(|| {
            TopologyError::PropertyViolated(format!(
                "cuff face of vertex ring {hv} is not inside the expansion face"
            ))
        })?;
        ring_specs.push(RingSpec::Vertex {
            vertex: pid,
            weak,
            cuff_face: pf,
        });
    }
    if let Some(w) = used.iter().position(|&b| !b) {
        if trace.walks[w].lone_vertex.is_none() {
            return Err(TopologyError::Map(MapError::Internal(format!(
                "expansion piece walk {w} unassigned"
            ))));
        }
        // lone walks of interior vertices cannot occur: they would be
        // isolated host vertices inside the face, excluded by clause 3
        return Err(TopologyError::PropertyViolated(
            "isolated non-ring vertex inside the expansion face".into(),
        ));
    }
    let graph = crate::surface_map::assemble_graph(raw, trace, &face_specs, &ring_specs)
        .map_err(TopologyError::Map)?;
    Ok(ExpansionPiece {
        graph,
        host_face: jf,
        vertex_origin,
        edge_origin,
        face_map,
    })
}

// ---------------------------------------------------------------------------
// minimal essential subgraphs
// ---------------------------------------------------------------------------

/// Checks that every connected essential subgraph has at least `threshold`
/// edges, by searching the four minimal shapes: a cycle; two cycles sharing
/// one vertex; two disjoint cycles joined by a path; a theta graph (with
/// the cycles surrounding pairwise distinct rings in the non-cycle shapes).
pub fn min_essential_edges(g: &EmbeddedGraph, threshold: usize) -> Result<bool, MapError> {
    let abs = g.to_simple_graph();
    let budget = threshold.saturating_sub(1);
    if budget < 3 {
        return Ok(true);
    }
    // (a) essential cycles
    let cycles = abs.cycles_up_to(budget);
    let mut class_of: BTreeMap<Vec<VertexId>, CycleClass> = BTreeMap::new();
    for cyc in &cycles {
        let class = classify_cycle(g, cyc)?;
        if class.tag == CycleTag::Essential {
            return Ok(false);
        }
        class_of.insert(cyc.clone(), class);
    }
    // surrounding cycles indexed by ring
    let surrounding: Vec<(&Vec<VertexId>, RingId)> = cycles
        .iter()
        .filter_map(|c| match class_of[c].tag {
            CycleTag::Surrounds(r) => Some((c, r)),
            _ => None,
        })
        .collect();
    // (b) two cycles sharing exactly one vertex, distinct rings
    for (i, &(c1, r1)) in surrounding.iter().enumerate() {
        for &(c2, r2) in surrounding.iter().skip(i + 1) {
            if r1 == r2 || c1.len() + c2.len() > budget {
                continue;
            }
            let s1: BTreeSet<_> = c1.iter().collect();
            let s2: BTreeSet<_> = c2.iter().collect();
            if s1.intersection(&s2).count() == 1 {
                return Ok(false);
            }
        }
    }
    // (c) two disjoint cycles plus a path
    for (i, &(c1, r1)) in surrounding.iter().enumerate() {
        for &(c2, r2) in surrounding.iter().skip(i + 1) {
            if r1 == r2 {
                continue;
            }
            let s1: BTreeSet<_> = c1.iter().copied().collect();
            let s2: BTreeSet<_> = c2.iter().copied().collect();
            if s1.intersection(&s2).next().is_some() {
                continue;
            }
            let slack = budget.saturating_sub(c1.len() + c2.len());
            if slack == 0 {
                continue;
            }
            // shortest connection between the cycles avoiding both elsewhere
            let mut best = usize::MAX;
            for &u in &s1 {
                for &v in &s2 {
                    let forbidden: BTreeSet<usize> = s1
                        .union(&s2)
                        .copied()
                        .filter(|&x| x != u && x != v)
                        .collect();
                    for p in abs.paths_between(u, v, slack, &forbidden) {
                        best = best.min(p.len() - 1);
                    }
                }
            }
            if best <= slack {
                return Ok(false);
            }
        }
    }
    // (d) theta graphs: u,v joined by three internally disjoint paths
    for u in 0..abs.vertex_count() {
        for v in (u + 1)..abs.vertex_count() {
            let paths = abs.paths_between(u, v, budget, &BTreeSet::new());
            let k = paths.len();
            for i in 0..k {
                for j in (i + 1)..k {
                    if !internally_disjoint(&paths[i], &paths[j]) {
                        continue;
                    }
                    for l in (j + 1)..k {
                        if !internally_disjoint(&paths[i], &paths[l])
                            || !internally_disjoint(&paths[j], &paths[l])
                        {
                            continue;
                        }
                        let total =
                            paths[i].len() + paths[j].len() + paths[l].len() - 3;
                        if total > budget {
                            continue;
                        }
                        // three cycles must surround three distinct rings
                        let mut rings = BTreeSet::new();
                        let mut ok = true;
                        for (p, q) in [(i, j), (i, l), (j, l)] {
                            let cyc = splice_cycle(&paths[p], &paths[q]);
                            if cyc.len() < 3 {
                                ok = false;
                                break;
                            }
                            match classify_cycle(g, &cyc)?.tag {
                                CycleTag::Surrounds(r) => {
                                    rings.insert(r);
                                }
                                CycleTag::Essential => return Ok(false),
                                CycleTag::Contractible => {
                                    ok = false;
                                    break;
                                }
                            }
                        }
                        if ok && rings.len() == 3 {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

fn internally_disjoint(p: &[usize], q: &[usize]) -> bool {
    let pi: BTreeSet<_> = p[1..p.len() - 1].iter().collect();
    q[1..q.len() - 1].iter().all(|x| !pi.contains(x))
}

fn splice_cycle(p: &[usize], q: &[usize]) -> Vec<usize> {
    let mut cyc = p.to_vec();
    cyc.extend(q[1..q.len() - 1].iter().rev());
    cyc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_map::testutil::*;
    use crate::surface_map::EmbeddedGraph;

    fn k4_three_quads() -> EmbeddedGraph {
        // K4 quadrangulating the projective plane: search the witness among
        // all rotation/sign systems (small, done once per test run)
        let edges = [(0usize, 1usize), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        for mask in 0..16u32 {
            for signs in 0..64u32 {
                let edge_list: Vec<(usize, usize, bool)> = edges
                    .iter()
                    .enumerate()
                    .map(|(i, &(u, v))| (u, v, signs & (1 << i) != 0))
                    .collect();
                let mut rot: Vec<Vec<crate::surface_map::Dart>> = Vec::new();
                for v in 0..4 {
                    let mut darts: Vec<crate::surface_map::Dart> = Vec::new();
                    for (i, &(a, b)) in edges.iter().enumerate() {
                        if a == v {
                            darts.push(crate::surface_map::Dart::new(i, 0));
                        } else if b == v {
                            darts.push(crate::surface_map::Dart::new(i, 1));
                        }
                    }
                    if mask & (1 << v) != 0 {
                        darts.swap(1, 2);
                    }
                    rot.push(darts);
                }
                let g = EmbeddedGraph::build_cellular(4, &edge_list, &rot, &[], &[]).unwrap();
                let mut lens: Vec<usize> =
                    (0..g.walks().len()).map(|w| g.walk(w).len()).collect();
                lens.sort();
                if lens == vec![4, 4, 4] {
                    return g;
                }
            }
        }
        panic!("no 3-quad K4 embedding found");
    }

    #[test]
    fn cube_cycles_contractible() {
        let g = cube_q3();
        let abs = g.to_simple_graph();
        for cyc in abs.cycles_of_length(4) {
            let class = classify_cycle(&g, &cyc).unwrap();
            assert_eq!(class.tag, CycleTag::Contractible);
            assert!(class.two_sided);
            assert!(class.separating);
        }
    }

    #[test]
    fn cut_sphere_along_quad() {
        let g = cube_q3();
        let cyc = vec![0, 1, 2, 3];
        let cut = cut_along(&g, &cyc).unwrap();
        assert!(cut.two_sided);
        assert!(cut.separating);
        assert_eq!(cut.pieces.len(), 2);
        for p in &cut.pieces {
            assert_eq!(p.graph.euler_genus(), 0);
            assert_eq!(p.cut_rings.len(), 1);
        }
    }

    #[test]
    fn k4_quadrangulation_cycles_essential() {
        let g = k4_three_quads();
        assert_eq!(g.euler_genus(), 1);
        let abs = g.to_simple_graph();
        let mut found_one_sided = false;
        for cyc in abs.cycles_of_length(3) {
            let class = classify_cycle(&g, &cyc).unwrap();
            assert_eq!(class.tag, CycleTag::Essential, "cycle {cyc:?}");
            if !class.two_sided {
                found_one_sided = true;
                let cut = cut_along(&g, &cyc).unwrap();
                assert_eq!(cut.pieces.len(), 1);
                assert_eq!(cut.pieces[0].graph.euler_genus(), 0);
            }
        }
        assert!(found_one_sided);
    }

    #[test]
    fn hexagon_tripod_inner_cycle_contractible() {
        let g = hexagon_tripod();
        // cycle v0 u v2 v1
        let cyc = vec![0, 6, 2, 1];
        let class = classify_cycle(&g, &cyc).unwrap();
        assert_eq!(class.tag, CycleTag::Contractible);
    }

    #[test]
    fn torus_grid_cut_two_sided_nonseparating() {
        // C3 x C3 grid on the torus (Euler genus 2), all faces quads
        let n = 9;
        let idx = |r: usize, c: usize| 3 * (r % 3) + (c % 3);
        let mut edges: Vec<(usize, usize, bool)> = Vec::new();
        let mut eid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for r in 0..3 {
            for c in 0..3 {
                let a = idx(r, c);
                for b in [idx(r, c + 1), idx(r + 1, c)] {
                    let key = (a.min(b), a.max(b));
                    if !eid.contains_key(&key) {
                        eid.insert(key, edges.len());
                        edges.push((key.0, key.1, false));
                    }
                }
            }
        }
        let mut rot: Vec<Vec<Dart>> = vec![Vec::new(); n];
        for r in 0..3 {
            for c in 0..3 {
                let a = idx(r, c);
                // east, south, west, north
                for b in [idx(r, c + 1), idx(r + 1, c), idx(r, c + 2), idx(r + 2, c)] {
                    let key = (a.min(b), a.max(b));
                    let e = eid[&key];
                    rot[a].push(Dart::new(e, if edges[e].0 == a { 0 } else { 1 }));
                }
            }
        }
        let g = EmbeddedGraph::build_cellular(n, &edges, &rot, &[], &[]).unwrap();
        assert_eq!(g.euler_genus(), 2);
        assert_eq!(g.faces().len(), 9);
        // a row cycle is two-sided and non-separating
        let cyc = vec![idx(0, 0), idx(0, 1), idx(0, 2)];
        let cut = cut_along(&g, &cyc).unwrap();
        assert!(cut.two_sided);
        assert!(!cut.separating);
        assert_eq!(cut.pieces.len(), 1);
        assert_eq!(cut.pieces[0].graph.euler_genus(), 0);
        assert_eq!(cut.pieces[0].cut_rings.len(), 2);
        let class = classify_cycle(&g, &cyc).unwrap();
        assert_eq!(class.tag, CycleTag::Essential);
    }

    #[test]
    fn expansion_of_hexagon_tripod_theta() {
        let g = hexagon_tripod();
        // J = ring C6 plus path v0-u-v2; S = both internal faces of J
        let mut j_edges = BTreeSet::new();
        for i in 0..6 {
            j_edges.insert(g.edge_between(i, (i + 1) % 6).unwrap());
        }
        j_edges.insert(g.edge_between(0, 6).unwrap());
        j_edges.insert(g.edge_between(2, 6).unwrap());
        let (j_emb, _map, _) =
            subgraph_with_face_map(&g, &j_edges, &BTreeSet::new()).unwrap();
        let s: Vec<usize> = j_emb.internal_faces().collect();
        assert_eq!(s.len(), 2);
        let exp = g_expansion(&g, &j_edges, &BTreeSet::new(), &s).unwrap();
        assert_eq!(exp.pieces.len(), 2);
        let mut ring_lens: Vec<usize> = exp
            .pieces
            .iter()
            .map(|p| p.graph.total_ring_length())
            .collect();
        ring_lens.sort();
        assert_eq!(ring_lens, vec![4, 6]);
        for p in &exp.pieces {
            assert_eq!(p.graph.euler_genus(), 0);
            assert_eq!(p.graph.rings().len(), 1);
        }
        // conservation: piece ring lengths match the S-face boundaries
        let total: usize = exp.pieces.iter().map(|p| p.graph.total_ring_length()).sum();
        let expected: usize = s.iter().map(|&f| j_emb.face_size(f)).sum();
        assert_eq!(total, expected);
    }

    #[test]
    fn expansion_missing_edge_violates_property() {
        let g = hexagon_tripod();
        // J = C6 only, but S includes a face whose boundary uses the spokes
        let mut j_edges = BTreeSet::new();
        for i in 0..6 {
            j_edges.insert(g.edge_between(i, (i + 1) % 6).unwrap());
        }
        j_edges.insert(g.edge_between(0, 6).unwrap());
        // J now has a pendant path, so its faces' boundary union is not J
        let (j_emb, _m, _) = subgraph_with_face_map(&g, &j_edges, &BTreeSet::new()).unwrap();
        let s: Vec<usize> = j_emb.internal_faces().collect();
        let err = g_expansion(&g, &j_edges, &BTreeSet::new(), &s);
        assert!(matches!(err, Err(TopologyError::PropertyViolated(_))));
    }

    #[test]
    fn essential_edges_threshold() {
        let g = cube_q3();
        assert!(min_essential_edges(&g, 13).unwrap());
        let k4 = k4_three_quads();
        assert!(!min_essential_edges(&k4, 13).unwrap());
        assert!(min_essential_edges(&k4, 3).unwrap());
    }

    #[test]
    fn lemma_contractible_single_piece_roundtrip() {
        // cutting along a contractible cycle: one piece is a ringless disk
        let g = hexagon_tripod();
        let cyc = vec![0, 6, 2, 1];
        let cut = cut_along(&g, &cyc).unwrap();
        assert!(cut.separating);
        let disk = cut
            .pieces
            .iter()
            .find(|p| p.inherited_rings.is_empty())
            .unwrap();
        assert_eq!(disk.graph.euler_genus(), 0);
        assert_eq!(disk.cut_rings.len(), 1);
        // total vertices across pieces: split vertices counted twice
        let total: usize = cut.pieces.iter().map(|p| p.graph.vertex_count()).sum();
        assert_eq!(total, g.vertex_count() + cyc.len());
    }
}
