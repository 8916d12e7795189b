use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest aerial count accepted by canonization (brute force over `n!`).
pub const MAX_CANON_AERIAL: usize = 8;

/// An admissible graph. Vertices `0..n_aerial` are aerial, the following
/// `n_ground` are ground; `edges[v]` is the ordered target pair of aerial `v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KGraph {
    n_aerial: usize,
    n_ground: usize,
    edges: Vec<[usize; 2]>,
    canonical_id: String,
}

impl Serialize for KGraph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.canonical_id)
    }
}

fn encode(n: usize, m: usize, edges: &[[usize; 2]]) -> String {
    let t = |x: usize| if x < n { format!("v{}", x + 1) } else { format!("g{}", x - n + 1) };
    let body: Vec<String> = edges
        .iter()
        .enumerate()
        .map(|(v, [a, b])| format!("v{}->({},{})", v + 1, t(*a), t(*b)))
        .collect();
    format!("K({n},{m}):{}", body.join(";"))
}

fn relabel(n: usize, edges: &[[usize; 2]], perm: &[usize]) -> Vec<[usize; 2]> {
    let map = |x: usize| if x < n { perm[x] } else { x };
    let mut out = vec![[0, 0]; n];
    for (v, [a, b]) in edges.iter().enumerate() {
        out[perm[v]] = [map(*a), map(*b)];
    }
    out
}

fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    // Heap's algorithm
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&p);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn canonical_edges(n: usize, edges: &[[usize; 2]]) -> Vec<[usize; 2]> {
    let mut best = edges.to_vec();
    for_each_permutation(n, |perm| {
        let e = relabel(n, edges, perm);
        if e < best {
            best = e;
        }
    });
    best
}

impl KGraph {
    pub fn new(n_aerial: usize, n_ground: usize, edges: Vec<[usize; 2]>) -> Result<Self> {
        if edges.len() != n_aerial {
            return Err(Error::InvalidGraph(format!(
                "{} edge pairs for {n_aerial} aerial vertices",
                edges.len()
            )));
        }
        if n_aerial > MAX_CANON_AERIAL {
            return Err(Error::SizeCap { n: n_aerial, m: n_ground });
        }
        let total = n_aerial + n_ground;
        for (v, [a, b]) in edges.iter().enumerate() {
            if *a >= total || *b >= total {
                return Err(Error::InvalidGraph(format!("vertex v{} targets a missing vertex", v + 1)));
            }
            if *a == v || *b == v {
                return Err(Error::InvalidGraph(format!("self-loop at v{}", v + 1)));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("v{} has two edges to the same target", v + 1)));
            }
        }
        let canonical_id = encode(n_aerial, n_ground, &canonical_edges(n_aerial, &edges));
        Ok(KGraph {
            n_aerial,
            n_ground,
            edges,
            canonical_id,
        })
    }

    /// The graph with no aerial vertices.
    pub fn empty(n_ground: usize) -> Self {
        KGraph::new(0, n_ground, Vec::new()).expect("empty graph")
    }

    pub fn n_aerial(&self) -> usize {
        self.n_aerial
    }

    pub fn n_ground(&self) -> usize {
        self.n_ground
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn canonical_id(&self) -> &str {
        &self.canonical_id
    }

    pub fn is_ground(&self, target: usize) -> bool {
        target >= self.n_aerial
    }

    /// The representative whose encoding is the canonical id.
    pub fn canonical(&self) -> KGraph {
        KGraph {
            n_aerial: self.n_aerial,
            n_ground: self.n_ground,
            edges: canonical_edges(self.n_aerial, &self.edges),
            canonical_id: self.canonical_id.clone(),
        }
    }

    pub fn relabeled(&self, perm: &[usize]) -> Result<KGraph> {
        let mut seen = vec![false; self.n_aerial];
        if perm.len() != self.n_aerial || perm.iter().any(|&p| p >= self.n_aerial || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument("not a permutation of the aerial vertices".into()));
        }
        KGraph::new(self.n_aerial, self.n_ground, relabel(self.n_aerial, &self.edges, perm))
    }

    /// Incoming edge count per vertex (aerial then ground).
    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_aerial + self.n_ground];
        for [a, b] in &self.edges {
            d[*a] += 1;
            d[*b] += 1;
        }
        d
    }

    /// True when `B_Gamma` vanishes for every linear bivector: some aerial
    /// vertex is hit by two derivatives.
    pub fn vanishes_for_linear(&self) -> bool {
        self.in_degrees()[..self.n_aerial].iter().any(|&d| d >= 2)
    }

    /// The graph with the two edges of aerial `v` swapped.
    pub fn swapped(&self, v: usize) -> Result<KGraph> {
        if v >= self.n_aerial {
            return Err(Error::InvalidArgument(format!("no aerial vertex {v}")));
        }
        let mut e = self.edges.clone();
        e[v].swap(0, 1);
        KGraph::new(self.n_aerial, self.n_ground, e)
    }

    /// Parses `K(n,m):v1->(a,b);...` with targets `vK` (aerial) or `gK` (ground).
    pub fn parse(s: &str) -> Result<KGraph> {
        let err = |column: usize, message: &str| Error::Parse {
            line: 1,
            column,
            message: message.to_string(),
        };
        let s = s.trim();
        let rest = s.strip_prefix("K(").ok_or_else(|| err(1, "expected 'K('"))?;
        let close = rest.find("):").ok_or_else(|| err(3, "expected '):'"))?;
        let (nm, body) = (&rest[..close], &rest[close + 2..]);
        let mut it = nm.split(',');
        let num = |x: Option<&str>| -> Result<usize> {
            x.and_then(|v| v.trim().parse().ok()).ok_or_else(|| err(3, "bad vertex counts"))
        };
        let n = num(it.next())?;
        let m = num(it.next())?;
        if it.next().is_some() {
            return Err(err(3, "bad vertex counts"));
        }
        let offset = close + 4;
        let target = |t: &str, col: usize| -> Result<usize> {
            let t = t.trim();
            let (kind, idx) = t.split_at(1.min(t.len()));
            let k: usize = idx.parse().map_err(|_| err(col, "bad target"))?;
            match kind {
                "v" if (1..=n).contains(&k) => Ok(k - 1),
                "g" if (1..=m).contains(&k) => Ok(n + k - 1),
                _ => Err(err(col, &format!("unknown target '{t}'"))),
            }
        };
        let mut edges = vec![None; n];
        let mut col = offset;
        if !body.trim().is_empty() {
            for part in body.split(';') {
                let (src, tg) = part.split_once("->").ok_or_else(|| err(col, "expected '->'"))?;
                let v = target(src, col)?;
                if v >= n {
                    return Err(err(col, "edge source must be aerial"));
                }
                let inner = tg
                    .trim()
                    .strip_prefix('(')
                    .and_then(|x| x.strip_suffix(')'))
                    .ok_or_else(|| err(col, "expected '(a,b)'"))?;
                let (a, b) = inner.split_once(',').ok_or_else(|| err(col, "expected two targets"))?;
                if edges[v].is_some() {
                    return Err(err(col, "vertex listed twice"));
                }
                edges[v] = Some([target(a, col)?, target(b, col)?]);
                col += part.len() + 1;
            }
        }
        let edges: Option<Vec<[usize; 2]>> = edges.into_iter().collect();
        let edges = edges.ok_or_else(|| err(offset, "every aerial vertex needs an edge pair"))?;
        KGraph::new(n, m, edges)
    }
}

impl fmt::Display for KGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&encode(self.n_aerial, self.n_ground, &self.edges))
    }
}

/// Admissible graphs with `n <= 4` aerial and `m` in `{1, 2}` ground vertices,
/// in odometer order over per-vertex target pairs.
pub fn enumerate_admissible(n: usize, m: usize, up_to_iso: bool) -> Result<Vec<KGraph>> {
    if n > 4 || !(1..=2).contains(&m) {
        return Err(Error::SizeCap { n, m });
    }
    let choices: Vec<Vec<[usize; 2]>> = (0..n)
        .map(|v| {
            let targets: Vec<usize> = (0..n + m).filter(|&t| t != v).collect();
            let mut c = Vec::new();
            for &a in &targets {
                for &b in &targets {
                    if a != b {
                        c.push([a, b]);
                    }
                }
            }
            c
        })
        .collect();
    let total: usize = choices.iter().map(|c| c.len()).product();
    let graphs: Vec<KGraph> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut edges = vec![[0, 0]; n];
            for v in (0..n).rev() {
                let k = choices[v].len();
                edges[v] = choices[v][idx % k];
                idx /= k;
            }
            KGraph::new(n, m, edges).expect("admissible by construction")
        })
        .collect();
    if !up_to_iso {
        return Ok(graphs);
    }
    let mut seen = HashSet::new();
    Ok(graphs.into_iter().filter(|g| seen.insert(g.canonical_id.clone())).collect())
}

/// Ground slot of the function argument in the Bernoulli families.
pub const BERNOULLI_FUNCTION_SLOT: usize = 0;
/// Ground slot standing for the `h*` output direction.
pub const BERNOULLI_OUTPUT_SLOT: usize = 1;

/// Chain `v1 -> v2 -> ... -> vi -> out`, every vertex sending its second edge
/// to the function slot.
pub fn bernoulli_graph(i: usize) -> Result<KGraph> {
    if i == 0 {
        return Err(Error::InvalidArgument("Bernoulli graphs start at i = 1".into()));
    }
    let f = i + BERNOULLI_FUNCTION_SLOT;
    let out = i + BERNOULLI_OUTPUT_SLOT;
    let edges = (0..i).map(|v| [if v + 1 < i { v + 1 } else { out }, f]).collect();
    KGraph::new(i, 2, edges)
}

/// A Bernoulli chain of length `chain` whose head receives one spoke of a
/// `wheel`-cycle; the remaining spokes go to the function slot.
pub fn bernoulli_wheel_graph(chain: usize, wheel: usize) -> Result<KGraph> {
    if chain == 0 || wheel < 2 {
        return Err(Error::InvalidArgument("need chain >= 1 and wheel >= 2".into()));
    }
    let n = chain + wheel;
    let f = n + BERNOULLI_FUNCTION_SLOT;
    let out = n + BERNOULLI_OUTPUT_SLOT;
    let mut edges: Vec<[usize; 2]> = (0..chain).map(|v| [if v + 1 < chain { v + 1 } else { out }, f]).collect();
    for k in 0..wheel {
        let next = chain + (k + 1) % wheel;
        let spoke = if k == 0 { 0 } else { f };
        edges.push([next, spoke]);
    }
    KGraph::new(n, 2, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_count(n: usize, m: usize, v: usize) -> usize {
        if v == n {
            return 1;
        }
        let mut count = 0;
        for a in 0..n + m {
            for b in 0..n + m {
                if a != b && a != v && b != v {
                    count += brute_force_count(n, m, v + 1);
                }
            }
        }
        count
    }

    #[test]
    fn counts_match_brute_force() {
        assert_eq!(enumerate_admissible(1, 2, false).unwrap().len(), 2);
        assert_eq!(enumerate_admissible(0, 2, false).unwrap().len(), 1);
        assert_eq!(enumerate_admissible(2, 2, false).unwrap().len(), 36);
        for n in 0..=3 {
            for m in 1..=2 {
                assert_eq!(enumerate_admissible(n, m, false).unwrap().len(), brute_force_count(n, m, 0));
            }
        }
        assert!(matches!(enumerate_admissible(5, 2, false), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn iso_classes() {
        let all = enumerate_admissible(2, 2, false).unwrap();
        let iso = enumerate_admissible(2, 2, true).unwrap();
        assert!(iso.len() < all.len());
        let ids: HashSet<&str> = all.iter().map(|g| g.canonical_id()).collect();
        assert_eq!(ids.len(), iso.len());
        for g in &all {
            let back = KGraph::parse(&g.to_string()).unwrap();
            assert_eq!(back, *g);
            let swapped = g.relabeled(&[1, 0]).unwrap();
            assert_eq!(swapped.canonical_id(), g.canonical_id());
            assert_eq!(KGraph::parse(g.canonical_id()).unwrap().canonical_id(), g.canonical_id());
        }
    }

    #[test]
    fn parse_and_reject() {
        let g = KGraph::parse("K(1,2):v1->(g1,g2)").unwrap();
        assert_eq!(g.edges(), &[[1, 2]]);
        assert_eq!(KGraph::parse("K(0,2):").unwrap(), KGraph::empty(2));
        assert!(KGraph::parse("K(1,2):v1->(g1,g1)").is_err());
        assert!(KGraph::parse("K(1,2):v1->(v1,g1)").is_err());
        assert!(KGraph::parse("K(1,2):v1->(g1,g3)").is_err());
        assert!(KGraph::parse("K(2,2):v1->(g1,g2)").is_err());
        assert!(KGraph::parse("L(1,2):").is_err());
    }

    #[test]
    fn bernoulli_shapes() {
        let b1 = bernoulli_graph(1).unwrap();
        assert_eq!(b1.to_string(), "K(1,2):v1->(g2,g1)");
        let b3 = bernoulli_graph(3).unwrap();
        assert_eq!(b3.to_string(), "K(3,2):v1->(v2,g1);v2->(v3,g1);v3->(g2,g1)");
        assert!(!b3.vanishes_for_linear());
        let bw = bernoulli_wheel_graph(3, 4).unwrap();
        assert_eq!(bw.n_aerial(), 7);
        assert!(!bw.vanishes_for_linear());
        assert!(bw.in_degrees()[..7].iter().all(|&d| d == 1));
        assert!(bernoulli_graph(0).is_err());
        assert!(bernoulli_wheel_graph(1, 1).is_err());
    }
}
