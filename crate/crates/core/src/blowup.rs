//! The index derivation engine: walk a germ's forest simulating the
//! blow-up tower of the branch curve and produce the complete set of
//! singularity indices, plus per-curve bookkeeping.

use crate::fiber::KodairaKind;
use crate::germ::{GermSpec, ValidationReport};
use crate::params::MultClass;
use crate::rat::Rat;
use crate::resolve::{CurveState, NodeState, Resolved};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BlowupError {
    #[error("germ failed validation:\n{0}")]
    InvalidGerm(ValidationReport),
    /// A bookkeeping identity that holds for every geometric germ failed:
    /// the input cannot arise from an actual branch curve (or the engine
    /// has a bug). The identity is named.
    #[error("inconsistent forest: {identity} fails ({detail})")]
    InconsistentForest { identity: &'static str, detail: String },
}

/// Options of the derivation engine.
#[derive(Debug, Clone, Copy, Default)]
pub struct DeriveOptions {
    /// Counting convention for `j'_{0,2,odd}` (n = 2): when false (default)
    /// only singular points on the component or its proper transforms
    /// count; when true the whole towers over its points are scanned.
    pub j02_odd_full_tower: bool,
}

/// Per-`k` singularity counts, split by residue class and involvement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AlphaCount {
    /// Points of multiplicity `kn`.
    pub nz: i64,
    /// Points of multiplicity `kn + 1`.
    pub nz1: i64,
    /// Points not involved in the vertical branch locus.
    pub prime: i64,
    /// Points involved in some family of vertical branch curves.
    pub doubleprime: i64,
}

impl AlphaCount {
    pub fn total(&self) -> i64 {
        self.nz + self.nz1
    }
}

/// Splitting of the type `(2k+1 -> 2k+1)` singularities (n = 2 only).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PairSplit {
    /// Horizontal branches cross the fiber transversely at the odd point.
    pub tr: i64,
    /// A vertical curve outside the branch locus runs through both points.
    pub co0: i64,
    /// A vertical branch-locus curve runs through both points.
    pub co1: i64,
}

impl PairSplit {
    pub fn total(&self) -> i64 {
        self.tr + self.co0 + self.co1
    }
}

/// Summary of one family `D^t(p)` of vertical branch-locus curves.
#[derive(Debug, Clone, Serialize)]
pub struct FamilySummary {
    pub curves: Vec<String>,
    /// True when the family contains the transform of a fiber component.
    pub has_fiber_component: bool,
    pub j_total: i64,
    pub j_prime_01: i64,
    pub j_doubleprime_01: i64,
    pub j_prime_02_odd: i64,
    /// Number of independent cycles of the intersection graph.
    pub cycles: i64,
    pub gamma: Rat,
    /// All curves are exceptional of genus 0 and self-intersection `-n`.
    pub all_minimal_exceptional: bool,
}

/// Every singularity index of a fiber germ.
#[derive(Debug, Clone, Serialize)]
pub struct IndexRecord {
    pub alpha: BTreeMap<i64, AlphaCount>,
    pub alpha0_plus: i64,
    pub alpha0_minus: i64,
    pub epsilon: i64,
    /// `(genus, a) -> count` over transforms of fiber components with final
    /// self-intersection `-an`.
    pub j_prime: BTreeMap<(u8, i64), i64>,
    /// Same for exceptional curves (genus is always 0).
    pub j_doubleprime: BTreeMap<(u8, i64), i64>,
    /// Components counted by `j'_{0,2}` carrying an odd-multiplicity
    /// singular point (n = 2 bookkeeping).
    pub j_prime_02_odd: i64,
    /// `(u, k) -> count` of u-vertical singularities of multiplicity `kn`.
    pub iota: BTreeMap<(usize, i64), i64>,
    /// `(u, k) -> count` of u-vertical singularities of multiplicity `kn+1`.
    pub kappa: BTreeMap<(usize, i64), i64>,
    pub eta: i64,
    pub eta_prime: i64,
    pub eta_doubleprime: i64,
    pub eta_bar: i64,
    pub eta_hat: i64,
    pub gamma: Rat,
    pub delta_cyc: i64,
    /// `k -> split` of the `(2k+1 -> 2k+1)` singularities (n = 2 only).
    pub pairs_n2: BTreeMap<i64, PairSplit>,
    /// Whether the covering fiber is a triple fiber (h = 0, n = 3).
    pub triple_fiber: bool,
    /// Least total-transform fiber multiplicity among vertical curves
    /// outside the branch locus (where horizontal branches can cross).
    pub min_free_fiber_mult: i64,
    pub families: Vec<FamilySummary>,
}

impl IndexRecord {
    pub fn alpha_at(&self, k: i64) -> AlphaCount {
        self.alpha.get(&k).copied().unwrap_or_default()
    }

    pub fn alpha_k(&self, k: i64) -> i64 {
        self.alpha_at(k).total()
    }

    pub fn alpha0(&self) -> i64 {
        self.alpha0_plus + self.alpha0_minus
    }

    pub fn sum_alpha(&self) -> i64 {
        self.alpha.values().map(|a| a.total()).sum()
    }

    pub fn sum_k_alpha(&self) -> i64 {
        self.alpha.iter().map(|(k, a)| k * a.total()).sum()
    }

    pub fn sum_alpha_doubleprime(&self) -> i64 {
        self.alpha.values().map(|a| a.doubleprime).sum()
    }

    pub fn sum_k_alpha_doubleprime(&self) -> i64 {
        self.alpha.iter().map(|(k, a)| k * a.doubleprime).sum()
    }

    pub fn alpha_nz1_at(&self, k: i64) -> i64 {
        self.alpha_at(k).nz1
    }

    /// `iota(F_p) = sum_u (u-1) iota^{(u)}`.
    pub fn iota_weighted(&self) -> i64 {
        self.iota
            .iter()
            .map(|(&(u, _), &c)| (u as i64 - 1) * c)
            .sum()
    }

    pub fn kappa_weighted(&self) -> i64 {
        self.kappa
            .iter()
            .map(|(&(u, _), &c)| (u as i64 - 1) * c)
            .sum()
    }

    /// `iota_k`, weighted by `u - 1`.
    pub fn iota_k(&self, k: i64) -> i64 {
        self.iota
            .iter()
            .filter(|(&(_, kk), _)| kk == k)
            .map(|(&(u, _), &c)| (u as i64 - 1) * c)
            .sum()
    }

    pub fn kappa_k(&self, k: i64) -> i64 {
        self.kappa
            .iter()
            .filter(|(&(_, kk), _)| kk == k)
            .map(|(&(u, _), &c)| (u as i64 - 1) * c)
            .sum()
    }

    /// Raw count of 3-vertical singularities of class nZ.
    pub fn iota3(&self) -> i64 {
        self.iota
            .iter()
            .filter(|(&(u, _), _)| u == 3)
            .map(|(_, &c)| c)
            .sum()
    }

    pub fn kappa3(&self) -> i64 {
        self.kappa
            .iter()
            .filter(|(&(u, _), _)| u == 3)
            .map(|(_, &c)| c)
            .sum()
    }

    pub fn j_prime_sum<F: Fn(u8, i64) -> bool>(&self, f: F) -> i64 {
        self.j_prime
            .iter()
            .filter(|(&(b, a), _)| f(b, a))
            .map(|(_, &c)| c)
            .sum()
    }

    pub fn j_doubleprime_sum<F: Fn(u8, i64) -> bool>(&self, f: F) -> i64 {
        self.j_doubleprime
            .iter()
            .filter(|(&(b, a), _)| f(b, a))
            .map(|(_, &c)| c)
            .sum()
    }

    pub fn j_at(&self, b: u8, a: i64) -> i64 {
        self.j_prime.get(&(b, a)).copied().unwrap_or(0)
            + self.j_doubleprime.get(&(b, a)).copied().unwrap_or(0)
    }

    /// Total number of vertical branch-locus curves.
    pub fn j_total(&self) -> i64 {
        self.j_prime.values().sum::<i64>() + self.j_doubleprime.values().sum::<i64>()
    }

    pub fn j01(&self) -> i64 {
        self.j_at(0, 1)
    }

    pub fn pairs_total(&self) -> i64 {
        self.pairs_n2.values().map(|p| p.total()).sum()
    }

    pub fn pairs_k_weighted(&self) -> i64 {
        self.pairs_n2.iter().map(|(k, p)| k * p.total()).sum()
    }
}

/// One blow-up point on a curve, as recorded in the ledger.
#[derive(Debug, Clone, Serialize)]
pub struct LedgerBlowup {
    pub node: String,
    /// Multiplicity of the branch curve at the point.
    pub m: i64,
    /// Local multiplicity of the curve at the point.
    pub k: i64,
    /// `d = floor(m/n)`.
    pub d: i64,
}

/// Bookkeeping for one vertical curve (fiber component or exceptional).
#[derive(Debug, Clone, Serialize)]
pub struct CurveRecord {
    pub curve: String,
    pub is_component: bool,
    pub in_r: bool,
    pub genus: u8,
    pub singular: bool,
    pub initial_self_int: i64,
    pub final_self_int: i64,
    pub blowups: Vec<LedgerBlowup>,
    /// `a` with final self-intersection `-an`, for branch-locus curves.
    pub a: Option<i64>,
    /// `R C` recovered through the `(RC - L^2)/n = sum k_i d_i` identity.
    pub rc: i64,
    /// `R' C`: contracted-point multiplicity for exceptional curves, branch
    /// degree for fiber components.
    pub t: i64,
    /// Family index for branch-locus curves.
    pub family: Option<usize>,
    /// Multiplicity of the point the curve contracts to (exceptional only).
    pub contracted_to_m: Option<i64>,
}

/// The per-curve ledger of a germ.
#[derive(Debug, Clone, Serialize)]
pub struct CurveLedger {
    pub entries: Vec<CurveRecord>,
}

impl CurveLedger {
    pub fn get(&self, curve: &str) -> Option<&CurveRecord> {
        self.entries.iter().find(|e| e.curve == curve)
    }
}

/// Derives every singularity index of a valid germ.
pub fn derive_indices(spec: &GermSpec) -> Result<IndexRecord, BlowupError> {
    analyze(spec, DeriveOptions::default()).map(|a| a.indices)
}

pub fn derive_indices_with(
    spec: &GermSpec,
    opts: DeriveOptions,
) -> Result<IndexRecord, BlowupError> {
    analyze(spec, opts).map(|a| a.indices)
}

/// Produces the per-curve ledger of a valid germ.
pub fn curve_ledger(spec: &GermSpec) -> Result<CurveLedger, BlowupError> {
    analyze(spec, DeriveOptions::default()).map(|a| a.ledger)
}

pub struct Analysis {
    pub indices: IndexRecord,
    pub ledger: CurveLedger,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

pub fn analyze(spec: &GermSpec, opts: DeriveOptions) -> Result<Analysis, BlowupError> {
    let resolved = Resolved::build(spec);
    if !resolved.violations.is_empty() {
        return Err(BlowupError::InvalidGerm(ValidationReport {
            violations: resolved.violations,
        }));
    }
    Engine {
        spec,
        res: &resolved,
        opts,
    }
    .run()
}

struct Engine<'a> {
    spec: &'a GermSpec,
    res: &'a Resolved,
    opts: DeriveOptions,
}

impl<'a> Engine<'a> {
    fn n(&self) -> i64 {
        self.spec.params.n()
    }

    fn inconsistent(&self, identity: &'static str, detail: String) -> BlowupError {
        BlowupError::InconsistentForest { identity, detail }
    }

    fn curve(&self, i: usize) -> &CurveState {
        &self.res.curves[i]
    }

    fn node(&self, i: usize) -> &NodeState {
        &self.res.nodes[i]
    }

    /// Curves of the vertical branch locus: indices into `res.curves`.
    fn r_curves(&self) -> Vec<usize> {
        (0..self.res.curves.len())
            .filter(|&i| self.curve(i).in_r)
            .collect()
    }

    fn run(self) -> Result<Analysis, BlowupError> {
        let n = self.n();
        let m_p = self.spec.fiber.multiplicity.max(1);
        let r = self.spec.params.r();

        // --- families of vertical branch-locus curves ---------------------
        let r_curves = self.r_curves();
        let mut uf = UnionFind::new(self.res.curves.len());
        for (ni, node) in self.res.nodes.iter().enumerate() {
            // curves sharing a singular point belong together, and an
            // exceptional branch-locus curve joins everything through its
            // center
            let mut members: Vec<usize> = node.vert_r.clone();
            if node.is_nz1() {
                members.push(node.exc_curve);
            }
            let _ = ni;
            for w in members.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        let mut uf = uf;
        let mut family_ids: BTreeMap<usize, usize> = BTreeMap::new();
        let mut family_curves: Vec<Vec<usize>> = Vec::new();
        for &c in &r_curves {
            let root = uf.find(c);
            let id = *family_ids.entry(root).or_insert_with(|| {
                family_curves.push(Vec::new());
                family_curves.len() - 1
            });
            family_curves[id].push(c);
        }
        let family_of = |c: usize, uf: &mut UnionFind, ids: &BTreeMap<usize, usize>| -> usize {
            ids[&uf.find(c)]
        };

        // --- per-curve ledger ---------------------------------------------
        let mut ledger = Vec::new();
        for ci in 0..self.res.curves.len() {
            let c = self.curve(ci);
            let blowups: Vec<LedgerBlowup> = c
                .blowups
                .iter()
                .map(|&(ni, k)| {
                    let node = self.node(ni);
                    LedgerBlowup {
                        node: node.id.clone(),
                        m: node.m,
                        k,
                        d: node.k(),
                    }
                })
                .collect();
            let l2 = c.final_self_int();
            let a = if c.in_r { Some(-l2 / n) } else { None };
            // Lemma: (RC - L^2)/n = sum k_i d_i, read backwards.
            let rc = l2 + n * blowups.iter().map(|b| b.k * b.d).sum::<i64>();
            let contracted_to_m = c.origin_node.map(|o| self.node(o).m);
            let t = match c.origin_node {
                Some(o) => self.node(o).m,
                None => {
                    if c.in_r {
                        rc - c.initial_self_int
                    } else if self.res.comp_count == 1 {
                        r / m_p
                    } else {
                        blowups.iter().map(|b| b.m).sum()
                    }
                }
            };
            ledger.push(CurveRecord {
                curve: c.label.clone(),
                is_component: c.is_component(),
                in_r: c.in_r,
                genus: c.genus,
                singular: c.singular,
                initial_self_int: c.initial_self_int,
                final_self_int: l2,
                blowups,
                a,
                rc,
                t,
                family: if c.in_r {
                    Some(family_of(ci, &mut uf, &family_ids))
                } else {
                    None
                },
                contracted_to_m,
            });
        }

        // Lemma (t + c)/n = sum of d over the singular points of an
        // exceptional branch-locus curve.
        for e in &ledger {
            if e.in_r && !e.is_component {
                let t = e.t;
                let c = e.blowups.len() as i64;
                let d_sum: i64 = e.blowups.iter().map(|b| b.k * b.d).sum();
                if t + c != n * d_sum {
                    return Err(self.inconsistent(
                        "lemma-1.10",
                        format!(
                            "curve {:?}: (t + c)/n = ({t} + {c})/{n} != sum k_i d_i = {d_sum}",
                            e.curve
                        ),
                    ));
                }
            }
        }

        // Horizontal degree of fiber components: R_h . C >= 0 per component,
        // summing to r/m_p exactly when every component is in the branch
        // locus.
        {
            let mut total_h = 0i64;
            let mut all_in_r = true;
            for ci in 0..self.res.comp_count {
                let c = self.curve(ci);
                if !c.in_r {
                    all_in_r = false;
                    continue;
                }
                let e = &ledger[ci];
                let mut vertical = 0i64;
                for di in 0..self.res.comp_count {
                    if di != ci && self.curve(di).in_r {
                        vertical += self
                            .spec
                            .fiber
                            .edges_between(&c.label, &self.curve(di).label)
                            .iter()
                            .sum::<i64>();
                    }
                }
                let rh = e.rc - c.initial_self_int - vertical;
                if rh < 0 {
                    return Err(self.inconsistent(
                        "fiber-degree",
                        format!("component {:?} would meet the horizontal part {rh} times", c.label),
                    ));
                }
                total_h += rh * self.spec.fiber.component(&c.label).map(|x| x.fiber_multiplicity).unwrap_or(1);
            }
            if total_h > r / m_p || (all_in_r && total_h != r / m_p) {
                return Err(self.inconsistent(
                    "fiber-degree",
                    format!(
                        "branch-locus components meet the horizontal part {total_h} times, fiber degree is {}",
                        r / m_p
                    ),
                ));
            }
        }

        // --- singularity indices -------------------------------------------
        let mut alpha: BTreeMap<i64, AlphaCount> = BTreeMap::new();
        let mut iota: BTreeMap<(usize, i64), i64> = BTreeMap::new();
        let mut kappa: BTreeMap<(usize, i64), i64> = BTreeMap::new();
        let mut alpha_dd_by_family: BTreeMap<usize, i64> = BTreeMap::new();
        let mut k_alpha_dd_by_family: BTreeMap<usize, i64> = BTreeMap::new();
        for node in &self.res.nodes {
            let k = node.k();
            let e = alpha.entry(k).or_default();
            let involved = !node.vert_r.is_empty() || node.is_nz1();
            match node.class.map(|c| c.class) {
                Some(MultClass::NZ) => e.nz += 1,
                Some(MultClass::NZPlus1) => e.nz1 += 1,
                None => unreachable!("validated"),
            }
            if involved {
                e.doubleprime += 1;
                let anchor = if let Some(&c) = node.vert_r.first() {
                    c
                } else {
                    node.exc_curve
                };
                let f = family_of(anchor, &mut uf, &family_ids);
                *alpha_dd_by_family.entry(f).or_insert(0) += 1;
                *k_alpha_dd_by_family.entry(f).or_insert(0) += k;
            } else {
                e.prime += 1;
                if node.is_nz1() {
                    return Err(self.inconsistent(
                        "alpha-prime-class",
                        format!("uninvolved point {:?} of class nZ+1", node.id),
                    ));
                }
            }
            let u = node.u();
            if u >= 1 {
                match node.class.map(|c| c.class) {
                    Some(MultClass::NZ) => *iota.entry((u, k)).or_insert(0) += 1,
                    Some(MultClass::NZPlus1) => *kappa.entry((u, k)).or_insert(0) += 1,
                    None => {}
                }
            }
        }

        // --- j indices -------------------------------------------------------
        let mut j_prime: BTreeMap<(u8, i64), i64> = BTreeMap::new();
        let mut j_doubleprime: BTreeMap<(u8, i64), i64> = BTreeMap::new();
        for &ci in &r_curves {
            let c = self.curve(ci);
            let a = -c.final_self_int() / n;
            if c.is_component() {
                *j_prime.entry((c.genus, a)).or_insert(0) += 1;
            } else {
                *j_doubleprime.entry((0, a)).or_insert(0) += 1;
            }
        }
        let epsilon: i64 = j_prime.get(&(0, 1)).copied().unwrap_or(0)
            + j_doubleprime.get(&(0, 1)).copied().unwrap_or(0);
        let j_total_all: i64 = r_curves.len() as i64;

        // j'_{0,2,odd}: components counted by j'_{0,2} carrying an odd
        // singular point. Default: points on the component or its proper
        // transforms; optional: the full towers over its points.
        let mut j_prime_02_odd = 0i64;
        if n == 2 {
            for &ci in &r_curves {
                let c = self.curve(ci);
                if !c.is_component() || c.genus != 0 || -c.final_self_int() / n != 2 {
                    continue;
                }
                let odd = if self.opts.j02_odd_full_tower {
                    let mut stack: Vec<usize> = c.blowups.iter().map(|&(n0, _)| n0).collect();
                    let mut found = false;
                    while let Some(ni) = stack.pop() {
                        if self.node(ni).m % 2 == 1 {
                            found = true;
                            break;
                        }
                        stack.extend(self.node(ni).children.iter().copied());
                    }
                    found
                } else {
                    c.blowups.iter().any(|&(ni, _)| self.node(ni).m % 2 == 1)
                };
                if odd {
                    j_prime_02_odd += 1;
                }
            }
        }

        // --- family summaries: gamma, cycles, eta-bar -----------------------
        let mut families = Vec::new();
        let mut gamma_total = Rat::zero();
        let mut delta_cyc_detected = 0i64;
        for (fid, curves) in family_curves.iter().enumerate() {
            let has_fiber = curves.iter().any(|&c| self.curve(c).is_component());
            // gamma
            let gamma = if has_fiber {
                let mut g = Rat::zero();
                for &ci in curves {
                    let c = self.curve(ci);
                    if !c.is_component() {
                        continue;
                    }
                    if c.singular {
                        // gamma case 3: r/(m n) - d at the singular point
                        let d_sing = c
                            .blowups
                            .iter()
                            .find(|&&(_, k)| k == 2)
                            .map(|&(ni, _)| self.node(ni).k())
                            .unwrap_or(0);
                        g += Rat::new(r, m_p * n) - Rat::int(d_sing);
                    } else {
                        // gamma case 2: R C / n from the ledger
                        g += Rat::int(ledger[ci].rc) / n;
                    }
                }
                g
            } else {
                // gamma case 1: d at the point the seed curve contracts to
                let seeds: Vec<usize> = curves
                    .iter()
                    .copied()
                    .filter(|&ci| {
                        let o = self.curve(ci).origin_node.expect("exceptional");
                        self.node(o).vert_r.is_empty()
                    })
                    .collect();
                if seeds.len() != 1 {
                    return Err(self.inconsistent(
                        "family-seed",
                        format!("family {fid} has {} seed curves, expected exactly 1", seeds.len()),
                    ));
                }
                let o = self.curve(seeds[0]).origin_node.unwrap();
                Rat::int(self.node(o).k())
            };
            gamma_total += gamma.clone();

            // cycle rank of the intersection graph G^t: vertices are the
            // family curves, each u-vertical nZ singularity contributes
            // u - 1 edges chaining its curves
            let mut edges = 0i64;
            let mut guf = UnionFind::new(self.res.curves.len());
            for node in &self.res.nodes {
                if !node.is_nz() || node.vert_r.len() < 2 {
                    continue;
                }
                let f = family_of(node.vert_r[0], &mut uf, &family_ids);
                if f != fid {
                    continue;
                }
                edges += node.vert_r.len() as i64 - 1;
                for w in node.vert_r.windows(2) {
                    guf.union(w[0], w[1]);
                }
            }
            let mut comps: std::collections::BTreeSet<usize> = std::collections::BTreeSet::new();
            for &c in curves {
                comps.insert(guf.find(c));
            }
            let cycles = edges - curves.len() as i64 + comps.len() as i64;
            delta_cyc_detected += cycles;

            let j_prime_01_f = curves
                .iter()
                .filter(|&&c| {
                    self.curve(c).is_component()
                        && self.curve(c).genus == 0
                        && -self.curve(c).final_self_int() / n == 1
                })
                .count() as i64;
            let j_dd_01_f = curves
                .iter()
                .filter(|&&c| {
                    !self.curve(c).is_component() && -self.curve(c).final_self_int() / n == 1
                })
                .count() as i64;
            let j_prime_02_odd_f = if n == 2 {
                curves
                    .iter()
                    .filter(|&&ci| {
                        let c = self.curve(ci);
                        c.is_component()
                            && c.genus == 0
                            && -c.final_self_int() / n == 2
                            && c.blowups.iter().any(|&(ni, _)| self.node(ni).m % 2 == 1)
                    })
                    .count() as i64
            } else {
                0
            };
            let all_min_exc = !has_fiber && j_dd_01_f == curves.len() as i64;
            families.push(FamilySummary {
                curves: curves.iter().map(|&c| self.curve(c).label.clone()).collect(),
                has_fiber_component: has_fiber,
                j_total: curves.len() as i64,
                j_prime_01: j_prime_01_f,
                j_doubleprime_01: j_dd_01_f,
                j_prime_02_odd: j_prime_02_odd_f,
                cycles,
                gamma,
                all_minimal_exceptional: all_min_exc,
            });
        }

        let eta = families.len() as i64;
        let eta_prime = families.iter().filter(|f| f.has_fiber_component).count() as i64;
        let eta_doubleprime = eta - eta_prime;
        let eta_bar = families.iter().filter(|f| f.all_minimal_exceptional).count() as i64;
        let eta_hat = eta_doubleprime - eta_bar;

        // --- delta_cyc: detected cycles vs the structural conditions --------
        let h = self.spec.params.h();
        if h == 0 && delta_cyc_detected != 0 {
            return Err(self.inconsistent(
                "lemma-4.4-1",
                format!("h = 0 families are trees, found {delta_cyc_detected} cycle(s)"),
            ));
        }
        if delta_cyc_detected > 1 {
            return Err(self.inconsistent(
                "lemma-3.4-delta-cyc",
                format!("{delta_cyc_detected} independent cycles; at most one can occur"),
            ));
        }
        if h == 1 {
            let structural = self.delta_cyc_conditions(&iota, &kappa);
            if structural != delta_cyc_detected {
                return Err(self.inconsistent(
                    "lemma-3.4-delta-cyc",
                    format!(
                        "cycle detection gives {delta_cyc_detected}, the structural conditions give {structural}"
                    ),
                ));
            }
        }

        // --- (2k+1 -> 2k+1) pairs (n = 2) -----------------------------------
        let mut pairs_n2: BTreeMap<i64, PairSplit> = BTreeMap::new();
        if n == 2 {
            for (ni, node) in self.res.nodes.iter().enumerate() {
                if !node.is_nz1() {
                    continue;
                }
                let e = node.exc_curve;
                if self.curve(e).blowups.len() != 1 {
                    continue;
                }
                let (only, _) = self.curve(e).blowups[0];
                // the single singularity must sit on the exceptional curve
                // itself, i.e. be a child of this node
                if self.node(only).parent != Some(ni) {
                    continue;
                }
                let y = self.node(only);
                if y.m != node.m + 1 {
                    return Err(self.inconsistent(
                        "pair-multiplicity",
                        format!(
                            "odd point {:?} with a single follow-up of multiplicity {} != {}",
                            node.id,
                            y.m,
                            node.m + 1
                        ),
                    ));
                }
                let k = node.k();
                let split = pairs_n2.entry(k).or_default();
                // classification by the vertical curve through both points
                let through_both: Vec<usize> = y.incident.iter().map(|&(c, _)| c).collect();
                if through_both.is_empty() {
                    split.tr += 1;
                } else if through_both.iter().any(|&c| self.curve(c).in_r) {
                    split.co1 += 1;
                } else {
                    split.co0 += 1;
                }
            }
            let j_dd_01: i64 = j_doubleprime.get(&(0, 1)).copied().unwrap_or(0);
            let pair_total: i64 = pairs_n2.values().map(|p| p.total()).sum();
            if j_dd_01 != pair_total {
                return Err(self.inconsistent(
                    "n2-j01-pairs",
                    format!("j''_01 = {j_dd_01} but {pair_total} (2k+1 -> 2k+1) pairs found"),
                ));
            }
            let tr_co0: i64 = pairs_n2.values().map(|p| p.tr + p.co0).sum();
            if eta_bar != tr_co0 {
                return Err(self.inconsistent(
                    "n2-eta-pairs",
                    format!("eta-bar = {eta_bar} but tr + co0 pairs = {tr_co0}"),
                ));
            }
        }

        // --- alpha_0 ---------------------------------------------------------
        let alpha0_plus = self.spec.horizontal.alpha0_plus();
        let alpha0_minus = {
            let mut s = 0i64;
            for (&(b, _), &c) in j_prime.iter().chain(j_doubleprime.iter()) {
                s += (2 * b as i64 - 2) * c;
            }
            s + 2 * epsilon
        };

        // --- triple fiber detection (h = 0, n = 3) --------------------------
        let triple_fiber = h == 0
            && n == 3
            && (0..self.res.comp_count).all(|c| self.curve(c).in_r)
            && self
                .res
                .curves
                .iter()
                .skip(self.res.comp_count)
                .all(|c| c.in_r || c.fiber_mult % 3 == 0);

        let min_free_fiber_mult = self
            .res
            .curves
            .iter()
            .filter(|c| !c.in_r)
            .map(|c| c.fiber_mult)
            .min()
            .unwrap_or(0);

        let indices = IndexRecord {
            alpha,
            alpha0_plus,
            alpha0_minus,
            epsilon,
            j_prime,
            j_doubleprime,
            j_prime_02_odd,
            iota,
            kappa,
            eta,
            eta_prime,
            eta_doubleprime,
            eta_bar,
            eta_hat,
            gamma: gamma_total,
            delta_cyc: delta_cyc_detected,
            pairs_n2,
            triple_fiber,
            min_free_fiber_mult,
            families,
        };

        self.audit_identities(&indices, &ledger, j_total_all)?;

        Ok(Analysis {
            indices,
            ledger: CurveLedger { entries: ledger },
        })
    }

    /// The structural conditions for a cycle in the intersection graph:
    /// fiber of type mI_k, II, III or IV, every component in the branch
    /// locus, no 3-vertical singularity, and (for mI_1 and II) the
    /// singular point of the reduced fiber of class nZ+1.
    fn delta_cyc_conditions(
        &self,
        iota: &BTreeMap<(usize, i64), i64>,
        kappa: &BTreeMap<(usize, i64), i64>,
    ) -> i64 {
        let kind = self.spec.fiber.kind;
        let cond1 = matches!(
            kind,
            KodairaKind::I(_) | KodairaKind::II | KodairaKind::III | KodairaKind::IV
        );
        if !cond1 {
            return 0;
        }
        let cond2 = (0..self.res.comp_count).all(|c| self.curve(c).in_r);
        if !cond2 {
            return 0;
        }
        let three_vertical: i64 = iota
            .iter()
            .chain(kappa.iter())
            .filter(|(&(u, _), _)| u >= 3)
            .map(|(_, &c)| c)
            .sum();
        if three_vertical != 0 {
            return 0;
        }
        if matches!(kind, KodairaKind::I(1) | KodairaKind::II) {
            // the singular point of the reduced fiber must be of class nZ+1
            let ok = self.res.nodes.iter().any(|node| {
                node.parent.is_none()
                    && node.incident.iter().any(|&(c, m)| m == 2 && self.curve(c).singular)
                    && node.is_nz1()
            });
            if !ok {
                return 0;
            }
        }
        1
    }

    /// The exact bookkeeping identities every geometric germ satisfies.
    fn audit_identities(
        &self,
        idx: &IndexRecord,
        ledger: &[CurveRecord],
        j_total: i64,
    ) -> Result<(), BlowupError> {
        // alphakeq, in the structural form: number of involved points =
        // sum over family curves of their blow-up counts, corrected for
        // shared points and family seeds.
        let lhs = idx.sum_alpha_doubleprime();
        let mut rhs = idx.eta_doubleprime;
        for e in ledger {
            if !e.in_r {
                continue;
            }
            rhs += e.blowups.len() as i64;
        }
        rhs -= idx.iota_weighted() + idx.kappa_weighted();
        if lhs != rhs {
            return Err(self.inconsistent(
                "lemma-3.3-alphakeq",
                format!("sum alpha''_k = {lhs}, curve bookkeeping gives {rhs}"),
            ));
        }

        // kalphakeq: sum k alpha''_k = gamma + sum a j_{.,a} + sum k (alpha^{nZ+1}_k - iota_k - kappa_k)
        let lhs = Rat::int(idx.sum_k_alpha_doubleprime());
        let mut rhs = idx.gamma.clone();
        for (&(_, a), &c) in idx.j_prime.iter().chain(idx.j_doubleprime.iter()) {
            rhs += Rat::int(a * c);
        }
        let ks: Vec<i64> = idx.alpha.keys().copied().collect();
        for k in ks {
            rhs += Rat::int(k * (idx.alpha_nz1_at(k) - idx.iota_k(k) - idx.kappa_k(k)));
        }
        if lhs != rhs {
            return Err(self.inconsistent(
                "lemma-3.3-kalphakeq",
                format!("sum k alpha''_k = {lhs}, gamma bookkeeping gives {rhs}"),
            ));
        }

        // iota = j - eta + delta_cyc (h = 1) / iota = j - eta (h = 0)
        let iota_total = idx.iota_weighted();
        let expect = j_total - idx.eta + idx.delta_cyc;
        if iota_total != expect {
            let identity = if self.spec.params.h() == 0 {
                "lemma-4.4-1"
            } else {
                "lemma-3.4-iota"
            };
            return Err(self.inconsistent(
                identity,
                format!(
                    "iota = {iota_total}, j - eta + delta_cyc = {j_total} - {} + {} = {expect}",
                    idx.eta, idx.delta_cyc
                ),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{bound_audit, extremal_germ, ExtremalFamily};
    use crate::germ::validate_germ;
    use crate::invariants::{local_invariants_h0, local_invariants_h1};
    use crate::params::compute_params;
    use crate::rat::Rat;

    #[test]
    fn zero_germ_has_zero_indices() {
        let p = compute_params(3, 1, 2).unwrap();
        let g = GermSpec::general_fiber(p);
        let idx = derive_indices(&g).unwrap();
        assert_eq!(idx.sum_alpha(), 0);
        assert_eq!(idx.epsilon, 0);
        assert_eq!(idx.alpha0(), 0);
        assert_eq!(idx.eta, 0);
        let inv = local_invariants_h1(&idx, &g.fiber, &p).unwrap();
        assert!(inv.k2.is_zero() && inv.chi.is_zero() && inv.e.is_zero());
        assert!(inv.ind.unwrap().is_zero());
    }

    #[test]
    fn example_3_4_iii_indices_and_invariants() {
        // n = 2, g = 3 (r = 4), l = 1: the alternating (r-1, r) chain.
        let p = compute_params(3, 1, 2).unwrap();
        let g = extremal_germ(&p, ExtremalFamily::H1IIIn2, 1).unwrap();
        assert!(validate_germ(&g).is_valid(), "{}", validate_germ(&g));
        let idx = derive_indices(&g).unwrap();
        assert_eq!(idx.alpha_k(1), 1);
        assert_eq!(idx.alpha_k(2), 1);
        assert_eq!(idx.epsilon, 1);
        assert_eq!(idx.j_doubleprime.get(&(0, 1)), Some(&1));
        assert_eq!((idx.eta, idx.eta_doubleprime), (1, 1));
        assert_eq!(idx.alpha0_minus, 0);
        assert_eq!(idx.alpha0(), 0);
        assert_eq!(idx.pairs_n2.get(&1).map(|p| p.tr), Some(1));
        let inv = local_invariants_h1(&idx, &g.fiber, &p).unwrap();
        assert_eq!(inv.k2, Rat::int(5));
        assert_eq!(inv.chi, Rat::new(1, 2));
        assert_eq!(inv.e, Rat::int(1));
        assert_eq!(inv.ind.clone().unwrap(), Rat::int(3));
        assert_eq!(inv.sigma, Rat::int(1));
        assert_eq!(inv.lambda_local.clone().unwrap(), Rat::int(10));
        assert_eq!(bound_audit(&idx, &g.fiber, &p).unwrap(), Rat::zero());
    }

    #[test]
    fn example_3_4_iii_scales_linearly_in_l() {
        let p = compute_params(3, 1, 2).unwrap();
        let g = extremal_germ(&p, ExtremalFamily::H1IIIn2, 2).unwrap();
        let idx = derive_indices(&g).unwrap();
        assert_eq!(idx.alpha_k(1), 2);
        assert_eq!(idx.alpha_k(2), 2);
        assert_eq!(idx.epsilon, 2);
        let inv = local_invariants_h1(&idx, &g.fiber, &p).unwrap();
        assert_eq!(inv.lambda_local.clone().unwrap(), Rat::int(10));
    }

    #[test]
    fn example_3_4_i_indices_and_invariants() {
        // n = 3, g = 4 (r = 3), l = 1: one point of multiplicity r.
        let p = compute_params(4, 1, 3).unwrap();
        let g = extremal_germ(&p, ExtremalFamily::H1I, 1).unwrap();
        assert!(validate_germ(&g).is_valid(), "{}", validate_germ(&g));
        let idx = derive_indices(&g).unwrap();
        assert_eq!(idx.alpha_k(1), 1);
        assert_eq!(idx.epsilon, 0);
        assert_eq!(idx.alpha0(), 0);
        let inv = local_invariants_h1(&idx, &g.fiber, &p).unwrap();
        assert_eq!(inv.k2, Rat::int(5));
        assert_eq!(inv.chi, Rat::new(2, 3));
        assert_eq!(inv.e, Rat::int(3));
        assert_eq!(inv.ind.clone().unwrap(), Rat::new(9, 5));
        assert_eq!(inv.sigma, Rat::new(-1, 3));
        assert_eq!(bound_audit(&idx, &g.fiber, &p).unwrap(), Rat::zero());
    }

    #[test]
    fn example_3_4_ii_indices_and_invariants() {
        // n = 3, g = 7 (r = 6): the smallest case of the second family.
        let p = compute_params(7, 1, 3).unwrap();
        let g = extremal_germ(&p, ExtremalFamily::H1IIn3, 1).unwrap();
        assert!(validate_germ(&g).is_valid(), "{}", validate_germ(&g));
        let idx = derive_indices(&g).unwrap();
        assert_eq!(idx.alpha_k(1), 4);
        assert_eq!(idx.epsilon, 2);
        assert_eq!(idx.alpha0(), 1);
        assert_eq!(idx.eta_doubleprime, 1);
        assert_eq!(idx.iota_weighted(), 1);
        assert_eq!(idx.kappa_weighted(), 0);
        assert_eq!(idx.gamma, Rat::int(1));
        let inv = local_invariants_h1(&idx, &g.fiber, &p).unwrap();
        assert_eq!(inv.chi, Rat::new(11, 6));
        assert_eq!(inv.e, Rat::int(4));
        assert_eq!(inv.k2, Rat::int(18));
        // e / chi = 24/(4r - 13) = mu
        assert_eq!(bound_audit(&idx, &g.fiber, &p).unwrap(), Rat::zero());
    }

    #[test]
    fn triple_fiber_403_indices_and_invariants() {
        let p = compute_params(4, 0, 3).unwrap();
        let g = extremal_germ(&p, ExtremalFamily::H0Triple403, 1).unwrap();
        assert!(validate_germ(&g).is_valid(), "{}", validate_germ(&g));
        let idx = derive_indices(&g).unwrap();
        assert_eq!(idx.alpha_k(1), 4);
        assert_eq!(idx.alpha_at(1).doubleprime, 4);
        assert_eq!(idx.epsilon, 3);
        assert_eq!(idx.j01(), 3);
        assert_eq!(idx.eta, 1);
        assert_eq!(idx.iota_weighted(), 2);
        assert_eq!(idx.kappa_weighted(), 1);
        assert_eq!(idx.delta_cyc, 0);
        assert!(idx.triple_fiber);
        assert_eq!(idx.alpha0_plus, 4);
        assert_eq!(idx.alpha0_minus, 0);
        let inv = local_invariants_h0(&idx, &p).unwrap();
        assert_eq!(inv.k2, Rat::new(43, 5));
        assert_eq!(inv.chi, Rat::new(17, 15));
        assert_eq!(inv.e, Rat::int(5));
        assert_eq!(inv.lambda_local.clone().unwrap(), Rat::new(129, 17));
        assert_eq!(bound_audit(&idx, &g.fiber, &p).unwrap(), Rat::zero());
    }

    #[test]
    fn h0_single_even_node() {
        // n = 2, g = 3 (r = 8), one node of multiplicity 4.
        let p = compute_params(3, 0, 2).unwrap();
        let mut g = GermSpec::general_fiber(p);
        g.forest = vec![ForestNode::new(4, vec![("c0", 1)], vec![])];
        g.horizontal = HorizontalData::from_alpha0_plus(0);
        let idx = derive_indices(&g).unwrap();
        assert_eq!(idx.alpha_k(2), 1);
        assert_eq!(idx.epsilon, 0);
        let inv = local_invariants_h0(&idx, &p).unwrap();
        assert_eq!(inv.k2, Rat::new(10, 7));
        assert_eq!(inv.chi, Rat::new(2, 7));
        assert_eq!(inv.e, Rat::int(2));
    }

    #[test]
    fn curve_ledger_examples() {
        // (-1)-curve over an odd point, blown up once: (t + c)/2 = d.
        let p = compute_params(3, 1, 2).unwrap();
        let g = extremal_germ(&p, ExtremalFamily::H1IIIn2, 1).unwrap();
        let ledger = curve_ledger(&g).unwrap();
        let e1 = ledger
            .entries
            .iter()
            .find(|e| e.in_r && !e.is_component)
            .unwrap();
        assert_eq!(e1.t, 3);
        assert_eq!(e1.blowups.len(), 1);
        assert_eq!(e1.blowups[0].d, 2);
        assert_eq!(e1.final_self_int, -2);
        assert_eq!(e1.a, Some(1));
        // RC - L^2 = n sum k d
        assert_eq!(e1.rc, -2 + 2 * 2);
    }

    #[test]
    fn fiber_line_in_r_without_blowups_is_rejected() {
        let p = compute_params(3, 0, 2).unwrap();
        let mut g = GermSpec::general_fiber(p);
        g.in_r = std::iter::once("c0".to_string()).collect();
        let report = validate_germ(&g);
        assert!(report.has_rule("curve-self-intersection"), "{report}");
    }

    #[test]
    fn derive_rejects_invalid_germ() {
        let p = compute_params(4, 1, 3).unwrap();
        let mut g = GermSpec::general_fiber(p);
        g.forest = vec![ForestNode::new(5, vec![("c0", 1)], vec![])];
        assert!(matches!(
            derive_indices(&g),
            Err(BlowupError::InvalidGerm(_))
        ));
    }

    use crate::germ::{ForestNode, HorizontalData};
}
