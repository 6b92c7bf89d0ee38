//! CMC (Rank-k) and mAP under the Market1501 evaluation protocol.
//!
//! For each query the gallery is ranked by ascending distance, ties broken by
//! gallery index. Gallery entries with a negative (junk) identity, or with
//! the query's identity *and* camera, are removed before scoring. Queries
//! left without any correct match are excluded from both averages and
//! reported separately.
//!
//! Two plain-text inputs are understood; fields are whitespace separated and
//! lines starting with `#` are comments.
//!
//! Distance matrix (`G` = number of `g` lines, in file order):
//! ```text
//! g <id> <cam>
//! q <id> <cam> <d_1> ... <d_G>
//! ```
//! Embeddings (Euclidean distance is used):
//! ```text
//! q <id> <cam> <v_1> ... <v_n>
//! g <id> <cam> <v_1> ... <v_n>
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Protocol {
    /// Junk ids and same-identity-same-camera gallery entries are ignored.
    #[default]
    Market,
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "market" | "market1501" => Ok(Protocol::Market),
            _ => Err(Error::InvalidParameter(format!("unknown protocol {s:?} (expected \"market\")"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalSet {
    /// Row-major `|Q| × |G|`.
    distances: Vec<f64>,
    pub query_ids: Vec<i64>,
    pub gallery_ids: Vec<i64>,
    pub query_cams: Vec<u32>,
    pub gallery_cams: Vec<u32>,
}

impl EvalSet {
    pub fn new(
        distances: Vec<f64>,
        query_ids: Vec<i64>,
        query_cams: Vec<u32>,
        gallery_ids: Vec<i64>,
        gallery_cams: Vec<u32>,
    ) -> Result<Self> {
        if query_ids.len() != query_cams.len() || gallery_ids.len() != gallery_cams.len() {
            return Err(Error::Eval("label and camera lists differ in length".into()));
        }
        if distances.len() != query_ids.len() * gallery_ids.len() {
            return Err(Error::Eval(format!(
                "distance matrix has {} entries, expected {}x{}",
                distances.len(),
                query_ids.len(),
                gallery_ids.len()
            )));
        }
        if let Some(d) = distances.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::Eval(format!("distances must be finite and nonnegative, found {d}")));
        }
        Ok(EvalSet {
            distances,
            query_ids,
            gallery_ids,
            query_cams,
            gallery_cams,
        })
    }

    /// Euclidean distances between query and gallery embeddings.
    pub fn from_embeddings(
        queries: &[Vec<f64>],
        query_ids: Vec<i64>,
        query_cams: Vec<u32>,
        gallery: &[Vec<f64>],
        gallery_ids: Vec<i64>,
        gallery_cams: Vec<u32>,
    ) -> Result<Self> {
        let dim = queries.iter().chain(gallery).map(Vec::len).next().unwrap_or(0);
        if queries.iter().chain(gallery).any(|v| v.len() != dim) {
            return Err(Error::Eval("embeddings have differing dimensions".into()));
        }
        let distances = queries
            .iter()
            .flat_map(|q| {
                gallery
                    .iter()
                    .map(move |g| q.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            })
            .collect();
        Self::new(distances, query_ids, query_cams, gallery_ids, gallery_cams)
    }

    pub fn num_queries(&self) -> usize {
        self.query_ids.len()
    }

    pub fn num_gallery(&self) -> usize {
        self.gallery_ids.len()
    }

    pub fn distance(&self, q: usize, g: usize) -> f64 {
        self.distances[q * self.num_gallery() + g]
    }

    pub fn row(&self, q: usize) -> &[f64] {
        let g = self.num_gallery();
        &self.distances[q * g..(q + 1) * g]
    }

    pub fn to_distance_text(&self) -> String {
        let mut out = String::from("# posepaste-distances v1\n");
        for (id, cam) in self.gallery_ids.iter().zip(&self.gallery_cams) {
            let _ = writeln!(out, "g\t{id}\t{cam}");
        }
        for (q, (id, cam)) in self.query_ids.iter().zip(&self.query_cams).enumerate() {
            let _ = write!(out, "q\t{id}\t{cam}");
            for d in self.row(q) {
                let _ = write!(out, "\t{d:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_distance_text(text: &str, origin: &Path) -> Result<Self> {
        let mut gallery = (Vec::new(), Vec::new());
        let mut query = (Vec::new(), Vec::new());
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
        for (n, line) in data_lines(text) {
            let (role, id, cam, rest) = labelled(line, n, origin)?;
            match role {
                "g" if rest.is_empty() => {
                    gallery.0.push(id);
                    gallery.1.push(cam);
                }
                "q" => {
                    query.0.push(id);
                    query.1.push(cam);
                    rows.push((n, rest));
                }
                _ => {
                    return Err(Error::parse(
                        origin,
                        format!("line {n}"),
                        "expected `g <id> <cam>` or `q <id> <cam> <distances...>`",
                    ))
                }
            }
        }
        let width = gallery.0.len();
        let mut distances = Vec::with_capacity(rows.len() * width);
        for (n, row) in rows {
            if row.len() != width {
                return Err(Error::parse(
                    origin,
                    format!("line {n}"),
                    format!("{} distances for {width} gallery entries", row.len()),
                ));
            }
            distances.extend(row);
        }
        Self::new(distances, query.0, query.1, gallery.0, gallery.1)
    }

    pub fn parse_embedding_text(text: &str, origin: &Path) -> Result<Self> {
        let (mut qv, mut qi, mut qc) = (Vec::new(), Vec::new(), Vec::new());
        let (mut gv, mut gi, mut gc) = (Vec::new(), Vec::new(), Vec::new());
        for (n, line) in data_lines(text) {
            let (role, id, cam, v) = labelled(line, n, origin)?;
            match role {
                "q" => {
                    qv.push(v);
                    qi.push(id);
                    qc.push(cam);
                }
                "g" => {
                    gv.push(v);
                    gi.push(id);
                    gc.push(cam);
                }
                _ => return Err(Error::parse(origin, format!("line {n}"), "role must be `q` or `g`")),
            }
        }
        Self::from_embeddings(&qv, qi, qc, &gv, gi, gc)
    }

    pub fn load_distances(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_distance_text(&text, path)
    }

    pub fn load_embeddings(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_embedding_text(&text, path)
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn labelled<'a>(line: &'a str, n: usize, origin: &Path) -> Result<(&'a str, i64, u32, Vec<f64>)> {
    let at = || format!("line {n}");
    let mut fields = line.split_whitespace();
    let role = fields.next().unwrap_or_default();
    let id = fields
        .next()
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| Error::parse(origin, at(), "missing or invalid identity"))?;
    let cam = fields
        .next()
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| Error::parse(origin, at(), "missing or invalid camera"))?;
    let values = fields
        .map(|f| f.parse::<f64>().map_err(|e| Error::parse(origin, at(), format!("{f:?}: {e}"))))
        .collect::<Result<_>>()?;
    Ok((role, id, cam, values))
}

/// Per-query outcome after exclusions.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryOutcome {
    /// Zero-based rank of the first correct match among kept entries.
    pub first_hit: usize,
    pub average_precision: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    /// `cmc[k - 1]` is Rank-k, for k up to the gallery size.
    pub cmc: Vec<f64>,
    pub mean_ap: f64,
    pub valid_queries: usize,
    /// Queries with no correct gallery match, excluded from the averages.
    pub excluded_queries: Vec<usize>,
}

impl EvalReport {
    pub fn rank(&self, k: usize) -> f64 {
        assert!(k >= 1, "ranks start at 1");
        self.cmc.get(k - 1).or(self.cmc.last()).copied().unwrap_or(0.0)
    }
}

/// Scores a single query, or `None` when it has no correct match.
pub fn evaluate_query(e: &EvalSet, q: usize, protocol: Protocol) -> Option<QueryOutcome> {
    let Protocol::Market = protocol;
    let (qid, qcam) = (e.query_ids[q], e.query_cams[q]);
    let row = e.row(q);
    let mut order: Vec<usize> = (0..e.num_gallery()).collect();
    order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));

    let mut first_hit = None;
    let mut hits = 0usize;
    let mut precision_sum = 0.0;
    let mut rank = 0usize;
    for g in order {
        let gid = e.gallery_ids[g];
        if gid < 0 || (gid == qid && e.gallery_cams[g] == qcam) {
            continue;
        }
        rank += 1;
        if gid == qid {
            hits += 1;
            first_hit.get_or_insert(rank - 1);
            precision_sum += hits as f64 / rank as f64;
        }
    }
    first_hit.map(|first_hit| QueryOutcome {
        first_hit,
        average_precision: precision_sum / hits as f64,
    })
}

pub fn evaluate(e: &EvalSet, protocol: Protocol) -> Result<EvalReport> {
    let outcomes: Vec<Option<QueryOutcome>> = (0..e.num_queries())
        .into_par_iter()
        .map(|q| evaluate_query(e, q, protocol))
        .collect();
    let excluded_queries: Vec<usize> = outcomes.iter().enumerate().filter(|(_, o)| o.is_none()).map(|(q, _)| q).collect();
    let valid: Vec<&QueryOutcome> = outcomes.iter().flatten().collect();
    if valid.is_empty() {
        return Err(Error::Eval("no query has a correct match in the gallery".into()));
    }
    let n = valid.len() as f64;
    let mut cmc = vec![0.0; e.num_gallery()];
    for o in &valid {
        cmc[o.first_hit] += 1.0;
    }
    let mut running = 0.0;
    for c in cmc.iter_mut() {
        running += *c;
        *c = running / n;
    }
    let mean_ap = valid.iter().map(|o| o.average_precision).sum::<f64>() / n;
    Ok(EvalReport {
        cmc,
        mean_ap,
        valid_queries: valid.len(),
        excluded_queries,
    })
}

pub fn rank_k(e: &EvalSet, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    Ok(evaluate(e, Protocol::Market)?.rank(k))
}

pub fn mean_average_precision(e: &EvalSet) -> Result<f64> {
    Ok(evaluate(e, Protocol::Market)?.mean_ap)
}
