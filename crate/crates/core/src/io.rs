//! Edge-list files, snapshot manifests and dynamic sequences.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::GraphSnapshot;
use crate::scalar::Scalar;

/// Parses the text edge-list format.
///
/// Lines are `i j [w]` separated by whitespace; `#` starts a comment; a
/// `% n=N` line fixes the vertex count. Otherwise `n = 1 + max id`.
pub fn parse_edgelist<T: Scalar>(text: &str) -> Result<GraphSnapshot<T>> {
    let mut header_n: Option<usize> = None;
    let mut triples = Vec::new();
    let mut max_id: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('%') {
            let rest = rest.trim();
            let value = rest
                .strip_prefix("n=")
                .or_else(|| rest.strip_prefix("n ="))
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    msg: format!("unrecognized header '{line}'"),
                })?;
            let n = value.trim().parse::<usize>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad vertex count: {e}"),
            })?;
            header_n = Some(n);
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 'i j [w]', got {} fields", fields.len()),
            });
        }
        let id = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad vertex id '{s}': {e}"),
            })
        };
        let i = id(fields[0])?;
        let j = id(fields[1])?;
        let w = match fields.get(2) {
            Some(s) => s.parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad weight '{s}': {e}"),
            })?,
            None => 1.0,
        };
        if i == j {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("self-loop at vertex {i}"),
            });
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("weight must be positive and finite, got {w}"),
            });
        }
        max_id = Some(max_id.unwrap_or(0).max(i).max(j));
        triples.push((i, j, T::of(w)));
    }
    let implied = max_id.map_or(0, |m| m + 1);
    let n = match header_n {
        Some(n) if n < implied => {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header n={n} but vertex id {} appears", implied - 1),
            })
        }
        Some(n) => n,
        None => implied,
    };
    GraphSnapshot::new(n, triples)
}

pub fn load_edgelist<T: Scalar>(path: impl AsRef<Path>) -> Result<GraphSnapshot<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_edgelist(&text).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

/// Serializes with a `% n=N` header so isolated trailing vertices survive.
pub fn format_edgelist<T: Scalar>(g: &GraphSnapshot<T>) -> String {
    let mut out = format!("% n={}\n", g.n());
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {}", e.u, e.v, e.w);
    }
    out
}

pub fn save_edgelist<T: Scalar>(g: &GraphSnapshot<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_edgelist(g)).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Dense ids and their external names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VertexUniverse {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl VertexUniverse {
    pub fn new() -> Self {
        Self::default()
    }

    /// Universe whose names are the decimal ids `0..n`.
    pub fn numeric(n: usize) -> Self {
        let mut u = Self::new();
        for i in 0..n {
            u.intern(&i.to_string());
        }
        u
    }

    /// Id for `name`, allocating the next one if unseen.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Time-ordered snapshots over one vertex universe.
#[derive(Debug, Clone)]
pub struct DynamicSequence<T> {
    snapshots: Vec<GraphSnapshot<T>>,
    universe: VertexUniverse,
}

fn compare_labels(a: &str, b: &str, numeric: bool) -> Ordering {
    if numeric {
        let x: f64 = a.parse().unwrap_or(f64::NAN);
        let y: f64 = b.parse().unwrap_or(f64::NAN);
        x.partial_cmp(&y).unwrap_or(Ordering::Equal)
    } else {
        a.cmp(b)
    }
}

impl<T: Scalar> DynamicSequence<T> {
    /// Builds a sequence. Every snapshot needs a label, labels must be strictly
    /// increasing (numerically if all parse as numbers), and smaller snapshots
    /// are padded with isolated vertices up to the largest `n`.
    pub fn new(snapshots: Vec<GraphSnapshot<T>>, universe: Option<VertexUniverse>) -> Result<Self> {
        let labels: Vec<&str> = snapshots
            .iter()
            .enumerate()
            .map(|(k, g)| {
                g.label()
                    .ok_or_else(|| Error::param(format!("snapshot {k} has no label")))
            })
            .collect::<Result<_>>()?;
        let numeric = labels.iter().all(|l| l.parse::<f64>().is_ok());
        for pair in labels.windows(2) {
            if compare_labels(pair[0], pair[1], numeric) != Ordering::Less {
                return Err(Error::param(format!(
                    "snapshot labels not strictly increasing: '{}' then '{}'",
                    pair[0], pair[1]
                )));
            }
        }
        let n_max = snapshots.iter().map(GraphSnapshot::n).max().unwrap_or(0);
        let universe = match universe {
            Some(u) if u.len() >= n_max => u,
            Some(u) => {
                return Err(Error::SizeMismatch {
                    left: u.len(),
                    right: n_max,
                })
            }
            None => VertexUniverse::numeric(n_max),
        };
        let n = universe.len();
        let snapshots = snapshots
            .into_iter()
            .map(|g| if g.n() < n { g.with_isolated(n - g.n()) } else { g })
            .collect();
        Ok(DynamicSequence {
            snapshots,
            universe,
        })
    }

    pub fn snapshots(&self) -> &[GraphSnapshot<T>] {
        &self.snapshots
    }

    pub fn universe(&self) -> &VertexUniverse {
        &self.universe
    }

    pub fn n(&self) -> usize {
        self.universe.len()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}

/// Reads a manifest of `label<TAB>path` lines; relative paths resolve
/// against the manifest's directory.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (label, path) = line
            .split_once('\t')
            .ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: "expected 'label<TAB>path'".to_string(),
            })?;
        let path = PathBuf::from(path.trim());
        let path = if path.is_relative() { base.join(path) } else { path };
        out.push((label.trim().to_string(), path));
    }
    Ok(out)
}

pub fn load_manifest<T: Scalar>(path: impl AsRef<Path>) -> Result<DynamicSequence<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let entries = parse_manifest(&text, base)?;
    let snapshots = entries
        .into_iter()
        .map(|(label, p)| load_edgelist::<T>(&p).map(|g| g.with_label(label)))
        .collect::<Result<Vec<_>>>()?;
    DynamicSequence::new(snapshots, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_path_default_weights() {
        let g: GraphSnapshot<f64> = parse_edgelist("0 1\n1 2").unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
        assert!(g.edges().iter().all(|e| e.w == 1.0));
    }

    #[test]
    fn collapses_symmetric_duplicate() {
        let g: GraphSnapshot<f64> = parse_edgelist("0 1 2.5\n1 0 2.5").unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(g.weight(0, 1), Some(2.5));
    }

    #[test]
    fn rejects_self_loop_with_line() {
        let err = parse_edgelist::<f64>("# c\n0 0 1.0").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_bad_weight_and_garbage() {
        assert!(parse_edgelist::<f64>("0 1 -1").is_err());
        assert!(parse_edgelist::<f64>("0 1 0").is_err());
        assert!(matches!(
            parse_edgelist::<f64>("0 1\nx 2").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
    }

    #[test]
    fn header_sets_vertex_count() {
        let g: GraphSnapshot<f64> = parse_edgelist("% n=5\n0 1 # edge\n").unwrap();
        assert_eq!(g.n(), 5);
        assert!(parse_edgelist::<f64>("% n=1\n0 1").is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        let g = GraphSnapshot::new(6, [(0, 1, 0.1), (1, 4, 3.0), (2, 3, 1e-7)]).unwrap();
        save_edgelist(&g, &path).unwrap();
        let back: GraphSnapshot<f64> = load_edgelist(&path).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn manifest_orders_and_pads() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.txt"), "0 1\n").unwrap();
        fs::write(dir.path().join("b.txt"), "0 1\n1 2\n").unwrap();
        let manifest = dir.path().join("m.tsv");
        fs::write(&manifest, "1\ta.txt\n2\tb.txt\n").unwrap();
        let seq: DynamicSequence<f64> = load_manifest(&manifest).unwrap();
        assert_eq!(seq.len(), 2);
        assert!(seq.snapshots().iter().all(|g| g.n() == 3));

        fs::write(&manifest, "10\ta.txt\n9\tb.txt\n").unwrap();
        assert!(load_manifest::<f64>(&manifest).is_err());
        fs::write(&manifest, "9\ta.txt\n10\tb.txt\n").unwrap();
        assert!(load_manifest::<f64>(&manifest).is_ok());
    }

    #[test]
    fn universe_interns() {
        let mut u = VertexUniverse::new();
        assert_eq!(u.intern("alice"), 0);
        assert_eq!(u.intern("bob"), 1);
        assert_eq!(u.intern("alice"), 0);
        assert_eq!(u.name(1), Some("bob"));
    }
}
