//! Fiber descriptors: Kodaira types of singular elliptic fibers (base genus
//! one) and the ruled-surface fiber (base genus zero), with their dual
//! graphs, Euler numbers and multiplicities.

use crate::params::CoreError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// The Kodaira type of a fiber of the base fibration (plus `RuledLine` for
/// base genus zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KodairaKind {
    Smooth,
    /// `I_k`, `k >= 1`; `I_1` is the nodal rational curve.
    I(u32),
    II,
    III,
    IV,
    /// `I*_k`, `k >= 0`.
    IStar(u32),
    IIStar,
    IIIStar,
    IVStar,
    /// The fiber of a relatively minimal ruled surface (h = 0).
    RuledLine,
}

impl KodairaKind {
    /// Euler number of the underlying reduced fiber, from Kodaira's table.
    pub fn euler_number(&self) -> i64 {
        match self {
            KodairaKind::Smooth | KodairaKind::RuledLine => 0,
            KodairaKind::I(k) => *k as i64,
            KodairaKind::II => 2,
            KodairaKind::III => 3,
            KodairaKind::IV => 4,
            KodairaKind::IStar(k) => *k as i64 + 6,
            KodairaKind::IIStar => 10,
            KodairaKind::IIIStar => 9,
            KodairaKind::IVStar => 8,
        }
    }

    /// Multiple fibers exist only for smooth and `I_k` fibers.
    pub fn allows_multiplicity(&self) -> bool {
        matches!(self, KodairaKind::Smooth | KodairaKind::I(_))
    }

    pub fn is_star(&self) -> bool {
        matches!(
            self,
            KodairaKind::IStar(_) | KodairaKind::IIStar | KodairaKind::IIIStar | KodairaKind::IVStar
        )
    }
}

impl fmt::Display for KodairaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KodairaKind::Smooth => write!(f, "smooth"),
            KodairaKind::I(k) => write!(f, "I_{k}"),
            KodairaKind::II => write!(f, "II"),
            KodairaKind::III => write!(f, "III"),
            KodairaKind::IV => write!(f, "IV"),
            KodairaKind::IStar(k) => write!(f, "I*_{k}"),
            KodairaKind::IIStar => write!(f, "II*"),
            KodairaKind::IIIStar => write!(f, "III*"),
            KodairaKind::IVStar => write!(f, "IV*"),
            KodairaKind::RuledLine => write!(f, "line"),
        }
    }
}

impl std::str::FromStr for KodairaKind {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, CoreError> {
        let bad = || CoreError::InvalidParameter(format!("unknown fiber kind {s:?}"));
        Ok(match s {
            "smooth" => KodairaKind::Smooth,
            "line" => KodairaKind::RuledLine,
            "II" => KodairaKind::II,
            "III" => KodairaKind::III,
            "IV" => KodairaKind::IV,
            "II*" => KodairaKind::IIStar,
            "III*" => KodairaKind::IIIStar,
            "IV*" => KodairaKind::IVStar,
            _ => {
                if let Some(k) = s.strip_prefix("I*_") {
                    KodairaKind::IStar(k.parse().map_err(|_| bad())?)
                } else if let Some(k) = s.strip_prefix("I_") {
                    let k: u32 = k.parse().map_err(|_| bad())?;
                    if k == 0 {
                        return Err(bad());
                    }
                    KodairaKind::I(k)
                } else {
                    return Err(bad());
                }
            }
        })
    }
}

impl Serialize for KodairaKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for KodairaKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One irreducible component of the fiber.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberComponent {
    pub id: String,
    /// Geometric genus, 0 or 1.
    pub genus: u8,
    pub self_intersection: i64,
    /// Multiplicity of the component inside the reduced fiber divisor.
    pub fiber_multiplicity: i64,
    /// True for the nodal `I_1` and cuspidal `II` curves.
    #[serde(default)]
    pub singular: bool,
}

/// An intersection point of two components, with its local contact order
/// (1 transverse, 2 tangential as in type `III`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberEdge(pub String, pub String, pub i64);

/// A fiber of the base fibration: Kodaira type, total multiplicity `m_p`,
/// components and dual graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberDescriptor {
    pub kind: KodairaKind,
    /// Fiber multiplicity `m_p` (`> 1` only for smooth and `I_k` fibers).
    pub multiplicity: i64,
    pub components: Vec<FiberComponent>,
    pub edges: Vec<FiberEdge>,
}

fn comp(id: &str, genus: u8, self_intersection: i64, fm: i64, singular: bool) -> FiberComponent {
    FiberComponent {
        id: id.to_string(),
        genus,
        self_intersection,
        fiber_multiplicity: fm,
        singular,
    }
}

impl FiberDescriptor {
    /// The standard component layout and dual graph for a Kodaira type.
    /// Component ids are `c0, c1, ...`.
    pub fn standard(kind: KodairaKind, multiplicity: i64) -> Self {
        let c = |i: usize| format!("c{i}");
        let e = |a: usize, b: usize, m: i64| FiberEdge(c(a), c(b), m);
        let (components, edges): (Vec<FiberComponent>, Vec<FiberEdge>) = match kind {
            KodairaKind::Smooth => (vec![comp("c0", 1, 0, 1, false)], vec![]),
            KodairaKind::RuledLine => (vec![comp("c0", 0, 0, 1, false)], vec![]),
            KodairaKind::I(1) => (vec![comp("c0", 0, 0, 1, true)], vec![]),
            KodairaKind::II => (vec![comp("c0", 0, 0, 1, true)], vec![]),
            KodairaKind::I(k) => {
                let k = k as usize;
                let comps = (0..k).map(|i| comp(&c(i), 0, -2, 1, false)).collect();
                let edges = if k == 2 {
                    vec![e(0, 1, 1), e(0, 1, 1)]
                } else {
                    (0..k).map(|i| e(i, (i + 1) % k, 1)).collect()
                };
                (comps, edges)
            }
            KodairaKind::III => (
                vec![comp("c0", 0, -2, 1, false), comp("c1", 0, -2, 1, false)],
                vec![e(0, 1, 2)],
            ),
            KodairaKind::IV => (
                (0..3).map(|i| comp(&c(i), 0, -2, 1, false)).collect(),
                vec![e(0, 1, 1), e(0, 2, 1), e(1, 2, 1)],
            ),
            KodairaKind::IStar(k) => {
                let k = k as usize;
                // central chain c0..ck with multiplicity 2, four tails.
                let mut comps: Vec<FiberComponent> =
                    (0..=k).map(|i| comp(&c(i), 0, -2, 2, false)).collect();
                for i in 0..4 {
                    comps.push(comp(&c(k + 1 + i), 0, -2, 1, false));
                }
                let mut edges: Vec<FiberEdge> = (0..k).map(|i| e(i, i + 1, 1)).collect();
                edges.push(e(k + 1, 0, 1));
                edges.push(e(k + 2, 0, 1));
                edges.push(e(k + 3, k, 1));
                edges.push(e(k + 4, k, 1));
                (comps, edges)
            }
            KodairaKind::IIStar => {
                let mults = [1, 2, 3, 4, 5, 6, 4, 2, 3];
                let comps = mults
                    .iter()
                    .enumerate()
                    .map(|(i, &m)| comp(&c(i), 0, -2, m, false))
                    .collect();
                let mut edges: Vec<FiberEdge> = (0..7).map(|i| e(i, i + 1, 1)).collect();
                edges.push(e(5, 8, 1));
                (comps, edges)
            }
            KodairaKind::IIIStar => {
                let mults = [1, 2, 3, 4, 3, 2, 1, 2];
                let comps = mults
                    .iter()
                    .enumerate()
                    .map(|(i, &m)| comp(&c(i), 0, -2, m, false))
                    .collect();
                let mut edges: Vec<FiberEdge> = (0..6).map(|i| e(i, i + 1, 1)).collect();
                edges.push(e(3, 7, 1));
                (comps, edges)
            }
            KodairaKind::IVStar => {
                let mults = [3, 2, 1, 2, 1, 2, 1];
                let comps = mults
                    .iter()
                    .enumerate()
                    .map(|(i, &m)| comp(&c(i), 0, -2, m, false))
                    .collect();
                let edges = vec![e(0, 1, 1), e(1, 2, 1), e(0, 3, 1), e(3, 4, 1), e(0, 5, 1), e(5, 6, 1)];
                (comps, edges)
            }
        };
        FiberDescriptor {
            kind,
            multiplicity,
            components,
            edges,
        }
    }

    pub fn component(&self, id: &str) -> Option<&FiberComponent> {
        self.components.iter().find(|c| c.id == id)
    }

    /// Contact order between two components summed over nothing: the list of
    /// intersection points (edges) between `a` and `b`.
    pub fn edges_between(&self, a: &str, b: &str) -> Vec<i64> {
        self.edges
            .iter()
            .filter(|FiberEdge(x, y, _)| (x == a && y == b) || (x == b && y == a))
            .map(|FiberEdge(_, _, m)| *m)
            .collect()
    }

    /// Euler number of the reduced fiber support.
    pub fn euler_number(&self) -> i64 {
        self.kind.euler_number()
    }

    /// Structure-preserving bijections `components -> standard components`,
    /// as index maps. Empty when the descriptor is not isomorphic to the
    /// standard layout of its kind.
    pub fn isomorphisms_to_standard(&self) -> Vec<Vec<usize>> {
        let std = FiberDescriptor::standard(self.kind, self.multiplicity);
        graph_isomorphisms(self, &std)
    }

    /// Checks that the declared components and dual graph match Kodaira's
    /// table for the declared kind. Returns rule-violation strings.
    pub fn structural_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.multiplicity < 1 {
            errs.push(format!("fiber multiplicity {} must be >= 1", self.multiplicity));
        }
        if self.multiplicity > 1 && !self.kind.allows_multiplicity() {
            errs.push(format!(
                "fiber of type {} cannot be multiple (m_p = {})",
                self.kind, self.multiplicity
            ));
        }
        let mut seen = BTreeMap::new();
        for c in &self.components {
            if seen.insert(c.id.clone(), ()).is_some() {
                errs.push(format!("duplicate component id {:?}", c.id));
            }
        }
        for FiberEdge(a, b, m) in &self.edges {
            if self.component(a).is_none() || self.component(b).is_none() {
                errs.push(format!("edge ({a}, {b}) references unknown component"));
            }
            if a == b {
                errs.push(format!("self-edge on component {a:?}"));
            }
            if *m < 1 {
                errs.push(format!("edge ({a}, {b}) has non-positive contact {m}"));
            }
        }
        if errs.is_empty() && self.isomorphisms_to_standard().is_empty() {
            errs.push(format!(
                "components/edges do not match the Kodaira table for type {}",
                self.kind
            ));
        }
        errs
    }
}

fn attr_key(c: &FiberComponent) -> (u8, i64, i64, bool) {
    (c.genus, c.self_intersection, c.fiber_multiplicity, c.singular)
}

fn edge_multiset(d: &FiberDescriptor, idx: &BTreeMap<&str, usize>) -> BTreeMap<(usize, usize, i64), usize> {
    let mut m = BTreeMap::new();
    for FiberEdge(a, b, c) in &d.edges {
        let (ia, ib) = (idx[a.as_str()], idx[b.as_str()]);
        let key = (ia.min(ib), ia.max(ib), *c);
        *m.entry(key).or_insert(0) += 1;
    }
    m
}

/// All attribute- and edge-preserving bijections from `a`'s components to
/// `b`'s, as maps `index in a -> index in b`. Component counts are tiny
/// (at most 9, type II*), so backtracking is fine.
pub(crate) fn graph_isomorphisms(a: &FiberDescriptor, b: &FiberDescriptor) -> Vec<Vec<usize>> {
    if a.components.len() != b.components.len() {
        return Vec::new();
    }
    let n = a.components.len();
    let idx_a: BTreeMap<&str, usize> = a.components.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();
    let idx_b: BTreeMap<&str, usize> = b.components.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();
    let ea = edge_multiset(a, &idx_a);
    let eb = edge_multiset(b, &idx_b);
    let mut out = Vec::new();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn rec(
        i: usize,
        n: usize,
        a: &FiberDescriptor,
        b: &FiberDescriptor,
        ea: &BTreeMap<(usize, usize, i64), usize>,
        eb: &BTreeMap<(usize, usize, i64), usize>,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == n {
            // full edge-multiset check under the candidate map
            let mut mapped = BTreeMap::new();
            for (&(x, y, c), &cnt) in ea {
                let (mx, my) = (map[x], map[y]);
                let key = (mx.min(my), mx.max(my), c);
                *mapped.entry(key).or_insert(0usize) += cnt;
            }
            if &mapped == eb {
                out.push(map.clone());
            }
            return;
        }
        for j in 0..n {
            if used[j] || attr_key(&a.components[i]) != attr_key(&b.components[j]) {
                continue;
            }
            map[i] = j;
            used[j] = true;
            rec(i + 1, n, a, b, ea, eb, map, used, out);
            used[j] = false;
            map[i] = usize::MAX;
        }
    }
    rec(0, n, a, b, &ea, &eb, &mut map, &mut used, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_numbers_match_kodaira_table() {
        let cases = [
            (KodairaKind::Smooth, 0),
            (KodairaKind::I(1), 1),
            (KodairaKind::I(4), 4),
            (KodairaKind::II, 2),
            (KodairaKind::III, 3),
            (KodairaKind::IV, 4),
            (KodairaKind::IStar(0), 6),
            (KodairaKind::IStar(3), 9),
            (KodairaKind::IIStar, 10),
            (KodairaKind::IIIStar, 9),
            (KodairaKind::IVStar, 8),
        ];
        for (k, e) in cases {
            assert_eq!(k.euler_number(), e, "{k}");
        }
    }

    #[test]
    fn standard_fibers_are_self_consistent() {
        for kind in [
            KodairaKind::Smooth,
            KodairaKind::RuledLine,
            KodairaKind::I(1),
            KodairaKind::I(2),
            KodairaKind::I(3),
            KodairaKind::II,
            KodairaKind::III,
            KodairaKind::IV,
            KodairaKind::IStar(0),
            KodairaKind::IStar(2),
            KodairaKind::IIStar,
            KodairaKind::IIIStar,
            KodairaKind::IVStar,
        ] {
            let f = FiberDescriptor::standard(kind, 1);
            assert!(f.structural_errors().is_empty(), "{kind}: {:?}", f.structural_errors());
        }
    }

    #[test]
    fn star_component_counts() {
        assert_eq!(FiberDescriptor::standard(KodairaKind::IStar(0), 1).components.len(), 5);
        assert_eq!(FiberDescriptor::standard(KodairaKind::IIStar, 1).components.len(), 9);
        assert_eq!(FiberDescriptor::standard(KodairaKind::IIIStar, 1).components.len(), 8);
        assert_eq!(FiberDescriptor::standard(KodairaKind::IVStar, 1).components.len(), 7);
    }

    #[test]
    fn kind_string_round_trip() {
        for s in ["smooth", "I_1", "I_7", "II", "III", "IV", "I*_0", "I*_4", "II*", "III*", "IV*", "line"] {
            let k: KodairaKind = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert!("I_0".parse::<KodairaKind>().is_err());
        assert!("V".parse::<KodairaKind>().is_err());
    }

    #[test]
    fn iv_fiber_has_symmetric_automorphisms() {
        let f = FiberDescriptor::standard(KodairaKind::IV, 1);
        assert_eq!(graph_isomorphisms(&f, &f).len(), 6);
    }

    #[test]
    fn multiple_fiber_only_for_i_types() {
        let f = FiberDescriptor::standard(KodairaKind::III, 2);
        assert!(!f.structural_errors().is_empty());
        let f = FiberDescriptor::standard(KodairaKind::I(2), 3);
        assert!(f.structural_errors().is_empty());
    }
}
