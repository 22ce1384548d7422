//! The EMG text format, version header `EMG 1`.
//!
//! ```text
//! EMG 1
//! V 7
//! E 9
//! edge 0 0 1 +
//! rot 0 0.0 8.1 5.1
//! face 0 genus 0 walks 0,2
//! ring facial 1
//! ring vertex 3 weak face 0
//! ```
//!
//! Darts are written `edgeid.end`; face lines reference canonical walk
//! indices (the order `facial_walks` reports).  `#` starts a comment.
//! Writing a parsed graph reproduces the input byte for byte.

use super::{Dart, EmbeddedGraph, MapError, MapSpec, Ring, RingSpec};
use std::fmt::Write as _;

pub fn write_emg(g: &EmbeddedGraph) -> String {
    let mut out = String::new();
    writeln!(out, "EMG 1").unwrap();
    writeln!(out, "V {}", g.vertex_count()).unwrap();
    writeln!(out, "E {}", g.edge_count()).unwrap();
    for (e, rec) in g.edges_iter() {
        writeln!(
            out,
            "edge {} {} {} {}",
            e,
            rec.u,
            rec.v,
            if rec.negative { "-" } else { "+" }
        )
        .unwrap();
    }
    for v in 0..g.vertex_count() {
        let darts: Vec<String> = g
            .rotation(v)
            .iter()
            .map(|d| format!("{}.{}", d.edge, d.end))
            .collect();
        if darts.is_empty() {
            writeln!(out, "rot {}", v).unwrap();
        } else {
            writeln!(out, "rot {} {}", v, darts.join(" ")).unwrap();
        }
    }
    for (f, rec) in g.faces().iter().enumerate() {
        let walks: Vec<String> = rec.walks.iter().map(|w| w.to_string()).collect();
        writeln!(out, "face {} genus {} walks {}", f, rec.genus, walks.join(",")).unwrap();
    }
    for ring in g.rings() {
        match *ring {
            Ring::Facial { face, .. } => writeln!(out, "ring facial {}", face).unwrap(),
            Ring::Vertex { vertex, weak, cuff_face } => {
                if weak {
                    writeln!(out, "ring vertex {} weak face {}", vertex, cuff_face).unwrap()
                } else {
                    writeln!(out, "ring vertex {} face {}", vertex, cuff_face).unwrap()
                }
            }
        }
    }
    out
}

pub fn parse_emg(text: &str) -> Result<EmbeddedGraph, MapError> {
    let mut spec = MapSpec::default();
    let mut saw_header = false;
    let mut nv: Option<usize> = None;
    let mut ne: Option<usize> = None;
    let mut edge_lines: Vec<(usize, usize, usize, bool)> = Vec::new();
    let mut rot_lines: Vec<(usize, Vec<Dart>)> = Vec::new();
    let mut face_lines: Vec<(usize, usize, Vec<usize>)> = Vec::new();

    let err = |msg: String| MapError::Parse(msg);
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let ln = lineno + 1;
        if !saw_header {
            if tokens != ["EMG", "1"] {
                return Err(err(format!("line {ln}: expected header 'EMG 1'")));
            }
            saw_header = true;
            continue;
        }
        match tokens[0] {
            "V" => {
                nv = Some(
                    tokens
                        .get(1)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(format!("line {ln}: bad V line")))?,
                );
            }
            "E" => {
                ne = Some(
                    tokens
                        .get(1)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(format!("line {ln}: bad E line")))?,
                );
            }
            "edge" => {
                if tokens.len() != 5 {
                    return Err(err(format!("line {ln}: edge wants 'edge id u v sign'")));
                }
                let id: usize = tokens[1]
                    .parse()
                    .map_err(|_| err(format!("line {ln}: bad edge id")))?;
                let u: usize = tokens[2]
                    .parse()
                    .map_err(|_| err(format!("line {ln}: bad endpoint")))?;
                let v: usize = tokens[3]
                    .parse()
                    .map_err(|_| err(format!("line {ln}: bad endpoint")))?;
                let negative = match tokens[4] {
                    "+" => false,
                    "-" => true,
                    other => return Err(err(format!("line {ln}: bad sign '{other}'"))),
                };
                edge_lines.push((id, u, v, negative));
            }
            "rot" => {
                let v: usize = tokens
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(format!("line {ln}: bad rot vertex")))?;
                let mut darts = Vec::new();
                for t in &tokens[2..] {
                    let (e, end) = t
                        .split_once('.')
                        .ok_or_else(|| err(format!("line {ln}: dart wants edge.end")))?;
                    let e: usize = e
                        .parse()
                        .map_err(|_| err(format!("line {ln}: bad dart edge")))?;
                    let end: u8 = end
                        .parse()
                        .map_err(|_| err(format!("line {ln}: bad dart end")))?;
                    if end > 1 {
                        return Err(err(format!("line {ln}: dart end must be 0 or 1")));
                    }
                    darts.push(Dart::new(e, end));
                }
                rot_lines.push((v, darts));
            }
            "face" => {
                // face <id> genus <g> walks <w1,w2,...>
                if tokens.len() != 6 || tokens[2] != "genus" || tokens[4] != "walks" {
                    return Err(err(format!(
                        "line {ln}: face wants 'face id genus g walks w1,w2,...'"
                    )));
                }
                let id: usize = tokens[1]
                    .parse()
                    .map_err(|_| err(format!("line {ln}: bad face id")))?;
                let genus: usize = tokens[3]
                    .parse()
                    .map_err(|_| err(format!("line {ln}: bad genus")))?;
                let walks: Result<Vec<usize>, _> =
                    tokens[5].split(',').map(|t| t.parse::<usize>()).collect();
                let walks = walks.map_err(|_| err(format!("line {ln}: bad walk list")))?;
                face_lines.push((id, genus, walks));
            }
            "ring" => match tokens.get(1) {
                Some(&"facial") => {
                    let f: usize = tokens
                        .get(2)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(format!("line {ln}: bad ring face")))?;
                    spec.rings.push(RingSpec::Facial { face: f });
                }
                Some(&"vertex") => {
                    let v: usize = tokens
                        .get(2)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(format!("line {ln}: bad ring vertex")))?;
                    let (weak, rest) = if tokens.get(3) == Some(&"weak") {
                        (true, &tokens[4..])
                    } else {
                        (false, &tokens[3..])
                    };
                    if rest.first() != Some(&"face") {
                        return Err(err(format!("line {ln}: vertex ring wants 'face <id>'")));
                    }
                    let f: usize = rest
                        .get(1)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(format!("line {ln}: bad cuff face")))?;
                    spec.rings.push(RingSpec::Vertex {
                        vertex: v,
                        weak,
                        cuff_face: f,
                    });
                }
                _ => return Err(err(format!("line {ln}: ring wants 'facial' or 'vertex'"))),
            },
            other => return Err(err(format!("line {ln}: unknown directive '{other}'"))),
        }
    }
    let nv = nv.ok_or_else(|| err("missing V line".into()))?;
    let ne = ne.ok_or_else(|| err("missing E line".into()))?;
    if edge_lines.len() != ne {
        return Err(err(format!(
            "E declares {ne} edges but {} edge lines given",
            edge_lines.len()
        )));
    }
    spec.vertex_count = nv;
    spec.edges = vec![(0, 0, false); ne];
    let mut seen = vec![false; ne];
    for (id, u, v, neg) in edge_lines {
        if id >= ne || seen[id] {
            return Err(err(format!("edge id {id} out of range or repeated")));
        }
        seen[id] = true;
        spec.edges[id] = (u, v, neg);
    }
    spec.rotations = vec![Vec::new(); nv];
    let mut rot_seen = vec![false; nv];
    for (v, darts) in rot_lines {
        if v >= nv || rot_seen[v] {
            return Err(err(format!("rot line for vertex {v} out of range or repeated")));
        }
        rot_seen[v] = true;
        spec.rotations[v] = darts;
    }
    if let Some(v) = rot_seen.iter().position(|&b| !b) {
        return Err(err(format!("missing rot line for vertex {v}")));
    }
    let nf = face_lines.len();
    spec.faces = vec![(0, Vec::new()); nf];
    let mut face_seen = vec![false; nf];
    for (id, genus, walks) in face_lines {
        if id >= nf || face_seen[id] {
            return Err(err(format!("face id {id} out of range or repeated")));
        }
        face_seen[id] = true;
        spec.faces[id] = (genus, walks);
    }
    EmbeddedGraph::build(&spec)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    #[test]
    fn roundtrip_hexagon_tripod() {
        let g = hexagon_tripod();
        let text = write_emg(&g);
        let h = parse_emg(&text).unwrap();
        assert_eq!(write_emg(&h), text);
        assert_eq!(g.canonical_form(true), h.canonical_form(true));
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = cube_q3();
        let text = write_emg(&g);
        let commented = format!("# cube\n{}\n# trailing\n\n", text);
        let h = parse_emg(&commented).unwrap();
        assert_eq!(write_emg(&h), text);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_emg("EMG 2\nV 0\nE 0\n").is_err());
        assert!(parse_emg("EMG 1\nV 1\nE 1\nrot 0\n").is_err());
        assert!(parse_emg("EMG 1\nV 2\nE 1\nedge 0 0 1 *\nrot 0 0.0\nrot 1 0.1\nface 0 genus 0 walks 0\n").is_err());
    }
}
