use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::poly::{EpsPolynomial, Monomial, Polynomial};
use crate::rational::{format_rational, parse_rational, rat, ratio, Rational};

use super::{enumerate_admissible, graph_operator, KGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    Config,
    McEstimate,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::Config => "config",
            Provenance::McEstimate => "mc-estimate",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(Provenance::Exact),
            "config" => Some(Provenance::Config),
            "mc-estimate" => Some(Provenance::McEstimate),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightValue {
    Rational(Rational),
    Float(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightEntry {
    pub value: WeightValue,
    pub provenance: Provenance,
    pub stderr: Option<f64>,
}

impl WeightEntry {
    pub fn exact(r: Rational) -> Self {
        WeightEntry {
            value: WeightValue::Rational(r),
            provenance: Provenance::Exact,
            stderr: None,
        }
    }

    pub fn config(r: Rational) -> Self {
        WeightEntry {
            value: WeightValue::Rational(r),
            provenance: Provenance::Config,
            stderr: None,
        }
    }

    pub fn estimate(value: f64, stderr: f64) -> Self {
        WeightEntry {
            value: WeightValue::Float(value),
            provenance: Provenance::McEstimate,
            stderr: Some(stderr),
        }
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        match &self.value {
            WeightValue::Rational(r) => m.insert("value".into(), json!(format_rational(r))),
            WeightValue::Float(f) => m.insert("value".into(), json!(f)),
        };
        m.insert("provenance".into(), json!(self.provenance.as_str()));
        if let Some(s) = self.stderr {
            m.insert("stderr".into(), json!(s));
        }
        Value::Object(m)
    }

    fn from_json(id: &str, v: &Value) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidArgument(format!("weight {id}: {msg}"));
        let obj = v.as_object().ok_or_else(|| bad("expected an object"))?;
        let provenance = obj
            .get("provenance")
            .and_then(Value::as_str)
            .and_then(Provenance::parse)
            .ok_or_else(|| bad("provenance must be exact, config or mc-estimate"))?;
        let value = match obj.get("value") {
            Some(Value::String(s)) => WeightValue::Rational(parse_rational(s)?),
            Some(Value::Number(n)) => WeightValue::Float(n.as_f64().ok_or_else(|| bad("bad number"))?),
            _ => return Err(bad("missing value")),
        };
        if provenance == Provenance::Exact && !matches!(value, WeightValue::Rational(_)) {
            return Err(bad("exact weights must be rational strings"));
        }
        let stderr = match obj.get("stderr") {
            None | Some(Value::Null) => None,
            Some(s) => Some(s.as_f64().ok_or_else(|| bad("bad stderr"))?),
        };
        if provenance == Provenance::McEstimate && stderr.is_none() {
            return Err(bad("estimates need a stderr"));
        }
        Ok(WeightEntry {
            value,
            provenance,
            stderr,
        })
    }
}

/// Weights keyed by canonical graph id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightTable {
    entries: BTreeMap<String, WeightEntry>,
}

impl WeightTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, g: &KGraph, entry: WeightEntry) {
        self.entries.insert(g.canonical_id().to_string(), entry);
    }

    pub fn get(&self, g: &KGraph) -> Option<&WeightEntry> {
        self.entries.get(g.canonical_id())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &WeightEntry)> {
        self.entries.iter()
    }

    /// The exact weight of `g`; the empty graph defaults to 1.
    pub fn exact(&self, g: &KGraph) -> Result<Rational> {
        match self.get(g) {
            Some(WeightEntry {
                value: WeightValue::Rational(r),
                ..
            }) => Ok(r.clone()),
            Some(_) => Err(Error::InexactWeight(g.canonical_id().to_string())),
            None if g.n_aerial() == 0 => Ok(rat(1)),
            None => Err(Error::MissingWeight(g.canonical_id().to_string())),
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.entries.iter().map(|(k, e)| (k.clone(), e.to_json())).collect())
    }

    /// Keys are re-canonicalized; two keys naming the same class must agree.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::InvalidArgument("weight table must be a JSON object".into()))?;
        let mut t = WeightTable::new();
        for (k, e) in obj {
            let g = KGraph::parse(k)?;
            let entry = WeightEntry::from_json(k, e)?;
            if let Some(prev) = t.get(&g) {
                if *prev != entry {
                    return Err(Error::InvalidArgument(format!("conflicting weights for {}", g.canonical_id())));
                }
            }
            t.insert(&g, entry);
        }
        Ok(t)
    }

    pub fn from_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }
}

fn wedge(a: usize, b: usize) -> KGraph {
    KGraph::new(1, 2, vec![[a, b]]).expect("wedge")
}

/// The two orderings of the single wedge, `+1/2` and `-1/2`.
pub fn wedge_table() -> WeightTable {
    let mut t = WeightTable::new();
    t.insert(&wedge(1, 2), WeightEntry::exact(ratio(1, 2)));
    t.insert(&wedge(2, 1), WeightEntry::exact(ratio(-1, 2)));
    t
}

/// Second-order classes with both ground vertices reached and no aerial
/// vertex hit twice, as `(canonical id, weight)`.
const ORDER_TWO: &[(&str, i64, i64)] = &[
    ("K(2,2):v1->(v2,g1);v2->(g1,g2)", -1, 12),
    ("K(2,2):v1->(v2,g1);v2->(g2,v1)", 1, 24),
    ("K(2,2):v1->(v2,g1);v2->(g2,g1)", 1, 12),
    ("K(2,2):v1->(v2,g1);v2->(v1,g2)", -1, 24),
    ("K(2,2):v1->(v2,g2);v2->(g1,v1)", 1, 24),
    ("K(2,2):v1->(v2,g2);v2->(g1,g2)", 1, 12),
    ("K(2,2):v1->(v2,g2);v2->(g2,g1)", -1, 12),
    ("K(2,2):v1->(g1,v2);v2->(g1,g2)", 1, 12),
    ("K(2,2):v1->(g1,v2);v2->(g2,v1)", -1, 24),
    ("K(2,2):v1->(g1,v2);v2->(g2,g1)", -1, 12),
    ("K(2,2):v1->(g1,g2);v2->(g1,g2)", 1, 4),
    ("K(2,2):v1->(g1,g2);v2->(g2,v1)", -1, 12),
    ("K(2,2):v1->(g1,g2);v2->(g2,g1)", -1, 4),
    ("K(2,2):v1->(g2,v2);v2->(g2,g1)", 1, 12),
    ("K(2,2):v1->(g2,g1);v2->(g2,g1)", 1, 4),
];

/// Wedge weights plus the configured second-order weights.
pub fn order_two_table() -> WeightTable {
    let mut t = wedge_table();
    for (id, n, d) in ORDER_TWO {
        let g = KGraph::parse(id).expect("builtin id");
        t.insert(&g, WeightEntry::config(ratio(*n, *d)));
    }
    t
}

/// Graphs entering the star product at order `n`, one representative per
/// class with its number of labelled members. Graphs whose operator vanishes
/// for every linear bivector, or with an unreached ground vertex (weight 0),
/// are dropped.
pub fn star_graph_classes(n: usize) -> Result<Vec<(KGraph, usize)>> {
    let mut classes: BTreeMap<String, (KGraph, usize)> = BTreeMap::new();
    for g in enumerate_admissible(n, 2, false)? {
        let deg = g.in_degrees();
        if g.vanishes_for_linear() || (n > 0 && deg[n..].contains(&0)) {
            continue;
        }
        classes
            .entry(g.canonical_id().to_string())
            .or_insert_with(|| (g.canonical(), 0))
            .1 += 1;
    }
    Ok(classes.into_values().collect())
}

/// `F*G = sum_n eps^n / n! sum_Gamma w_Gamma B_Gamma(F, G)` truncated at
/// `eps^order`, extended `eps`-bilinearly.
pub fn kontsevich_star_truncated(
    algebra: &LieAlgebra,
    f: &EpsPolynomial,
    g: &EpsPolynomial,
    weights: &WeightTable,
    order: usize,
) -> Result<EpsPolynomial> {
    let mut out = EpsPolynomial::zero();
    let mut fact = rat(1);
    for n in 0..=order {
        if n > 0 {
            fact *= rat(n as i64);
        }
        for (gr, count) in star_graph_classes(n)? {
            let w = weights.exact(&gr)?;
            if w.is_zero() {
                continue;
            }
            let c = &w * rat(count as i64) / &fact;
            for (i, fi) in f.coeffs().iter().enumerate() {
                for (j, gj) in g.coeffs().iter().enumerate() {
                    let k = i + j + n;
                    if k > order || fi.is_zero() || gj.is_zero() {
                        continue;
                    }
                    let b = graph_operator(&gr, algebra, &[fi.clone(), gj.clone()])?;
                    out += &EpsPolynomial::monomial(k, b.scale(&c));
                }
            }
        }
    }
    Ok(out)
}

/// Largest absolute coefficient of `(F*G)*H - F*(G*H)` per `eps`-order.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectReport {
    pub order: usize,
    pub trials: usize,
    pub per_order: Vec<Rational>,
}

impl DefectReport {
    pub fn is_zero_through(&self, k: usize) -> bool {
        self.per_order.iter().take(k + 1).all(|d| d.is_zero())
    }

    /// First order with a nonzero defect.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.per_order.iter().position(|d| !d.is_zero())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "order": self.order,
            "trials": self.trials,
            "per_order": self.per_order.iter().map(format_rational).collect::<Vec<_>>(),
        })
    }
}

fn random_poly(dim: usize, rng: &mut ChaCha8Rng) -> Polynomial {
    let mut p = Polynomial::zero();
    for _ in 0..3 {
        let mut m = Monomial::one();
        for _ in 0..rng.random_range(0..=2) {
            m = m.mul_var(rng.random_range(0..dim), 1);
        }
        p.add_term(m, rat(rng.random_range(-3..=3)));
    }
    p
}

pub fn associativity_defect(
    weights: &WeightTable,
    algebra: &LieAlgebra,
    order: usize,
    trials: usize,
    seed: u64,
) -> Result<DefectReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_order = vec![Rational::zero(); order + 1];
    for _ in 0..trials {
        let [f, g, h] = [(); 3].map(|_| EpsPolynomial::constant(random_poly(algebra.dim(), &mut rng)));
        let star = |a: &EpsPolynomial, b: &EpsPolynomial| kontsevich_star_truncated(algebra, a, b, weights, order);
        let left = star(&star(&f, &g)?, &h)?;
        let right = star(&f, &star(&g, &h)?)?;
        let d = &left - &right;
        for (k, slot) in per_order.iter_mut().enumerate() {
            for (_, c) in d.coeff(k).terms() {
                if c.abs() > *slot {
                    *slot = c.abs();
                }
            }
        }
    }
    Ok(DefectReport {
        order,
        trials,
        per_order,
    })
}
