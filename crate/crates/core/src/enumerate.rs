//! Exhaustive enumeration of valid germs within size caps, up to
//! canonical-form equivalence. This drives the property-test suites for
//! the slope theorems.

use crate::blowup::{analyze, DeriveOptions, IndexRecord};
use crate::canonical::canonical_form;
use crate::fiber::{FiberDescriptor, KodairaKind};
use crate::germ::{ForestNode, GermSpec, HorizontalData};
use crate::params::{classify_multiplicity, FibrationParams, MultClass};
use crate::rat::Rat;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnumError {
    /// The guard against runaway enumeration tripped.
    #[error("enumeration cap exceeded: {0}")]
    CapTooLarge(String),
}

/// Size caps of the enumeration.
#[derive(Debug, Clone)]
pub struct EnumCaps {
    /// Maximum total number of forest nodes per germ.
    pub max_nodes: usize,
    /// Maximum multiplicity of a singular point.
    pub max_mult: i64,
    /// Maximum fiber multiplicity `m_p` tried for smooth and `I_k` fibers.
    pub max_fiber_multiplicity: i64,
    /// How many values of `alpha_0^+` above the forced minimum to emit.
    pub alpha0_extra: i64,
    /// Hard cap on the number of emitted germs (`FIBCALC_MAX_ENUM`
    /// overrides it when set).
    pub max_germs: usize,
}

impl Default for EnumCaps {
    fn default() -> Self {
        EnumCaps {
            max_nodes: 3,
            max_mult: 7,
            max_fiber_multiplicity: 2,
            alpha0_extra: 1,
            max_germs: 500_000,
        }
    }
}

impl EnumCaps {
    pub fn germ_guard(&self) -> usize {
        std::env::var("FIBCALC_MAX_ENUM")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(self.max_germs)
    }
}

/// Reference to a curve through a prospective point: a fiber component, or
/// the exceptional curve of the ancestor `delta` levels above the node
/// being generated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum SymRef {
    Comp(String),
    Up(usize),
}

/// One curve passing through a prospective singular point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct ThroughCurve {
    reference: SymRef,
    mu: i64,
    in_r: bool,
    /// Listed implicitly (the exceptional curve the point sits on).
    implicit: bool,
    /// Nodal double point of the curve at this very point (`I_1`).
    nodal: bool,
    /// Cuspidal double point (`II`).
    cuspidal: bool,
}

/// The context a node is generated in. Fully structural, so subtree
/// generation can be memoized.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Slot {
    through: Vec<ThroughCurve>,
    contacts: Vec<((usize, usize), i64)>,
    parent: Option<ParentCtx>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct ParentCtx {
    m: i64,
    class: MultClass,
    grandparent_class: Option<MultClass>,
}

/// A generated subtree with ancestor references still symbolic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct SymNode {
    m: i64,
    on: Vec<(SymRef, i64)>,
    children: Vec<SymNode>,
}

impl SymNode {
    /// Horizontal multiplicity at the root of the subtree, given the
    /// branch-locus multiplicity of the curves it sits on.
    fn own_h(&self, slot_vert: i64) -> i64 {
        self.m - slot_vert
    }
}

/// A child requirement or option.
#[derive(Debug, Clone)]
struct ChildSpec {
    group: Vec<usize>,
    min_copies: usize,
    max_copies: usize,
}

struct Gen<'a> {
    params: &'a FibrationParams,
    caps: &'a EnumCaps,
    n: i64,
    r: i64,
    m_p: i64,
    memo: HashMap<(Slot, usize, i64), Rc<Vec<(SymNode, usize)>>>,
}

impl<'a> Gen<'a> {
    fn vert_in_r(slot: &Slot) -> i64 {
        slot.through.iter().filter(|t| t.in_r).map(|t| t.mu).sum()
    }

    fn admissible_mults(&self, slot: &Slot, h_budget: i64) -> Vec<i64> {
        let vert_in_r = Self::vert_in_r(slot);
        let cap = self.caps.max_mult.min(self.r / self.m_p + 1);
        let mut out = Vec::new();
        for m in 2..=cap {
            if classify_multiplicity(m, self.n).is_err() {
                continue;
            }
            let h = m - vert_in_r;
            if h < 0 || h > h_budget {
                continue;
            }
            if self.params.h() == 0 {
                let even_g_n2 = self.n == 2 && self.params.g() % 2 == 0;
                if even_g_n2 && m > self.r / 2 {
                    continue;
                }
                if !even_g_n2 && h > self.r / 2 {
                    continue;
                }
            }
            if let Some(p) = slot.parent {
                let cap_m = p.m + i64::from(p.class == MultClass::NZPlus1);
                if m > cap_m {
                    continue;
                }
                if m == p.m + 1 && matches!(p.grandparent_class, Some(MultClass::NZPlus1)) {
                    continue;
                }
                if matches!(p.grandparent_class, Some(MultClass::NZPlus1))
                    && p.class == MultClass::NZ
                    && m >= p.m
                {
                    continue;
                }
            }
            out.push(m);
        }
        out
    }

    /// Contact-components of the curves through a point.
    fn groups(slot: &Slot) -> Vec<Vec<usize>> {
        let k = slot.through.len();
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for &((a, b), c) in &slot.contacts {
            if c >= 2 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..k {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        groups.into_values().collect()
    }

    /// The slot a child lives in when it lists `group`. Symbolic ancestor
    /// references are shifted one level down.
    fn child_slot(&self, slot: &Slot, group: &[usize], m: i64, class: MultClass) -> Slot {
        let mut through = Vec::new();
        let mut contacts = Vec::new();
        for (pos, &gi) in group.iter().enumerate() {
            let t = &slot.through[gi];
            let reference = match &t.reference {
                SymRef::Comp(c) => SymRef::Comp(c.clone()),
                SymRef::Up(d) => SymRef::Up(d + 1),
            };
            through.push(ThroughCurve {
                reference,
                mu: 1,
                in_r: t.in_r,
                implicit: false,
                nodal: false,
                cuspidal: false,
            });
            for (pos2, &gj) in group.iter().enumerate().skip(pos + 1) {
                let key = (gi.min(gj), gi.max(gj));
                let c = slot
                    .contacts
                    .iter()
                    .find(|(k, _)| *k == key)
                    .map(|(_, c)| *c)
                    .unwrap_or(1);
                contacts.push(((pos, pos2), c - 1));
            }
            let e_idx = group.len();
            contacts.push(((pos, e_idx), if t.cuspidal { 2 } else { 1 }));
        }
        through.push(ThroughCurve {
            reference: SymRef::Up(1),
            mu: 1,
            in_r: class == MultClass::NZPlus1,
            implicit: true,
            nodal: false,
            cuspidal: false,
        });
        Slot {
            through,
            contacts,
            parent: Some(ParentCtx {
                m,
                class,
                grandparent_class: slot.parent.map(|p| p.class),
            }),
        }
    }

    /// All subtrees rooted in the given slot using at most `budget` nodes
    /// and `h_budget` horizontal multiplicity; memoized by slot shape.
    fn gen_subtrees(
        &mut self,
        slot: &Slot,
        budget: usize,
        h_budget: i64,
    ) -> Result<Rc<Vec<(SymNode, usize)>>, EnumError> {
        if budget == 0 {
            return Ok(Rc::new(Vec::new()));
        }
        let key = (slot.clone(), budget, h_budget);
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let vert_in_r = Self::vert_in_r(slot);
        let mut out = Vec::new();
        for m in self.admissible_mults(slot, h_budget) {
            let class = classify_multiplicity(m, self.n).expect("admissible").class;
            let h = m - vert_in_r;
            let specs = self.child_specs(slot, class, budget - 1);
            let mut children_sets = Vec::new();
            self.assign_children(
                slot,
                m,
                class,
                &specs,
                0,
                0,
                None,
                budget - 1,
                h,
                &mut Vec::new(),
                0,
                &mut children_sets,
            )?;
            let on: Vec<(SymRef, i64)> = slot
                .through
                .iter()
                .filter(|t| !t.implicit)
                .map(|t| (t.reference.clone(), t.mu))
                .collect();
            for (children, used) in children_sets {
                out.push((
                    SymNode {
                        m,
                        on: on.clone(),
                        children,
                    },
                    used + 1,
                ));
            }
        }
        let rc = Rc::new(out);
        self.memo.insert(key, rc.clone());
        Ok(rc)
    }

    /// Child requirements for a node: forced crossings after an nZ+1
    /// blow-up, forced common points of tangent pairs, and the optional
    /// extra singularities.
    fn child_specs(&self, slot: &Slot, class: MultClass, budget: usize) -> Vec<ChildSpec> {
        let mut specs = Vec::new();
        for g in Self::groups(slot) {
            let any_in_r = g.iter().any(|&i| slot.through[i].in_r);
            let in_r_pairs = g.iter().filter(|&&i| slot.through[i].in_r).count() >= 2;
            let nodal2 = g.len() == 1 && slot.through[g[0]].nodal && slot.through[g[0]].mu == 2;
            let cusp2 = g.len() == 1 && slot.through[g[0]].cuspidal && slot.through[g[0]].mu == 2;
            let max_copies = if nodal2 {
                2
            } else if cusp2 {
                1
            } else {
                g.iter()
                    .map(|&i| slot.through[i].mu)
                    .min()
                    .unwrap_or(1)
                    .max(1) as usize
            };
            let min_copies = if class == MultClass::NZPlus1 && any_in_r {
                if nodal2 {
                    2
                } else {
                    1
                }
            } else if class == MultClass::NZ && in_r_pairs {
                1
            } else {
                0
            };
            specs.push(ChildSpec {
                group: g,
                min_copies,
                max_copies,
            });
        }
        specs.push(ChildSpec {
            group: Vec::new(),
            min_copies: 0,
            max_copies: budget,
        });
        specs
    }

    #[allow(clippy::too_many_arguments)]
    fn assign_children(
        &mut self,
        slot: &Slot,
        m: i64,
        class: MultClass,
        specs: &[ChildSpec],
        spec_idx: usize,
        copies_done: usize,
        last: Option<&SymNode>,
        budget: usize,
        h_left: i64,
        current: &mut Vec<SymNode>,
        used: usize,
        out: &mut Vec<(Vec<SymNode>, usize)>,
    ) -> Result<(), EnumError> {
        if spec_idx == specs.len() {
            out.push((current.clone(), used));
            return Ok(());
        }
        let spec = &specs[spec_idx];
        if copies_done >= spec.min_copies {
            self.assign_children(
                slot,
                m,
                class,
                specs,
                spec_idx + 1,
                0,
                None,
                budget,
                h_left,
                current,
                used,
                out,
            )?;
        }
        if copies_done < spec.max_copies && used < budget {
            let child_slot = self.child_slot(slot, &spec.group, m, class);
            let vert: i64 = spec
                .group
                .iter()
                .filter(|&&gi| slot.through[gi].in_r)
                .count() as i64
                + i64::from(class == MultClass::NZPlus1);
            let subs = self.gen_subtrees(&child_slot, budget - used, h_left)?;
            for (sub, su) in subs.iter() {
                let sub_h = sub.own_h(vert);
                if sub_h > h_left {
                    continue;
                }
                if last.map(|l| sub < l).unwrap_or(false) {
                    continue; // siblings of one spec form a multiset
                }
                current.push(sub.clone());
                self.assign_children(
                    slot,
                    m,
                    class,
                    specs,
                    spec_idx,
                    copies_done + 1,
                    Some(sub),
                    budget,
                    h_left - sub_h,
                    current,
                    used + su,
                    out,
                )?;
                current.pop();
            }
        }
        Ok(())
    }
}

/// Turns a symbolic subtree into a concrete forest node, assigning ids and
/// resolving ancestor references against the path of ids above.
fn materialize(node: &SymNode, path: &mut Vec<String>, counter: &mut usize) -> ForestNode {
    let id = format!("g{counter}");
    *counter += 1;
    let on = node
        .on
        .iter()
        .map(|(r, mu)| {
            let target = match r {
                SymRef::Comp(c) => c.clone(),
                SymRef::Up(d) => path[path.len() - d].clone(),
            };
            (target, *mu)
        })
        .collect();
    path.push(id.clone());
    let children = node
        .children
        .iter()
        .map(|c| materialize(c, path, counter))
        .collect();
    path.pop();
    ForestNode {
        id: Some(id),
        m: node.m,
        on,
        children,
    }
}

/// A root anchor site on the fiber.
#[derive(Debug, Clone)]
struct RootSite {
    through: Vec<ThroughCurve>,
    contacts: Vec<((usize, usize), i64)>,
    /// The point is a singular point of the branch locus and must carry a
    /// root.
    forced: bool,
    max_copies: usize,
}

fn root_sites(fiber: &FiberDescriptor, in_r: &BTreeSet<String>) -> Vec<RootSite> {
    let mk = |id: &str, mu: i64, nodal: bool, cuspidal: bool| ThroughCurve {
        reference: SymRef::Comp(id.to_string()),
        mu,
        in_r: in_r.contains(id),
        implicit: false,
        nodal,
        cuspidal,
    };
    let mut sites = Vec::new();
    if fiber.kind == KodairaKind::IV {
        let through: Vec<ThroughCurve> = fiber
            .components
            .iter()
            .map(|c| mk(&c.id, 1, false, false))
            .collect();
        let in_r_count = through.iter().filter(|t| t.in_r).count();
        let contacts = vec![((0, 1), 1), ((0, 2), 1), ((1, 2), 1)];
        sites.push(RootSite {
            through,
            contacts,
            forced: in_r_count >= 2,
            max_copies: 1,
        });
    } else {
        let comps = &fiber.components;
        for i in 0..comps.len() {
            for j in (i + 1)..comps.len() {
                for &contact in &fiber.edges_between(&comps[i].id, &comps[j].id) {
                    let through = vec![
                        mk(&comps[i].id, 1, false, false),
                        mk(&comps[j].id, 1, false, false),
                    ];
                    let forced = through.iter().all(|t| t.in_r);
                    sites.push(RootSite {
                        through,
                        contacts: vec![((0, 1), contact)],
                        forced,
                        max_copies: 1,
                    });
                }
            }
        }
    }
    for c in &fiber.components {
        if c.singular {
            let cusp = fiber.kind == KodairaKind::II;
            sites.push(RootSite {
                through: vec![mk(&c.id, 2, !cusp, cusp)],
                contacts: Vec::new(),
                forced: in_r.contains(&c.id),
                max_copies: 1,
            });
        }
    }
    for c in &fiber.components {
        sites.push(RootSite {
            through: vec![mk(&c.id, 1, false, false)],
            contacts: Vec::new(),
            forced: false,
            max_copies: usize::MAX,
        });
    }
    sites
}

/// Enumerates every valid germ within the caps, one representative per
/// canonical class, in canonical-key order. Deterministic: the independent
/// (fiber, branch-locus subset) jobs fan out to worker threads and the
/// results re-merge in key order.
pub fn enumerate_germs(
    params: &FibrationParams,
    kinds: &[KodairaKind],
    caps: &EnumCaps,
) -> Result<Vec<GermSpec>, EnumError> {
    let guard = caps.germ_guard();
    let mut jobs: Vec<(FiberDescriptor, BTreeSet<String>)> = Vec::new();
    for &kind in kinds {
        let h_ok = match params.h() {
            0 => kind == KodairaKind::RuledLine,
            _ => kind != KodairaKind::RuledLine,
        };
        if !h_ok {
            continue;
        }
        let mp_max = if kind.allows_multiplicity() {
            caps.max_fiber_multiplicity
        } else {
            1
        };
        for m_p in 1..=mp_max {
            if params.r() % m_p != 0 {
                continue;
            }
            let fiber = FiberDescriptor::standard(kind, m_p);
            let comp_ids: Vec<String> = fiber.components.iter().map(|c| c.id.clone()).collect();
            // quotient the branch-locus subsets by the dual-graph symmetry
            let autos = fiber.isomorphisms_to_standard();
            let mut seen_masks: BTreeSet<u32> = BTreeSet::new();
            for mask in 0u32..(1 << comp_ids.len()) {
                let orbit_min = autos
                    .iter()
                    .map(|perm| {
                        let mut m = 0u32;
                        for (i, &pi) in perm.iter().enumerate() {
                            if mask & (1 << i as u32) != 0 {
                                m |= 1 << pi as u32;
                            }
                        }
                        m
                    })
                    .min()
                    .unwrap_or(mask);
                if !seen_masks.insert(orbit_min) {
                    continue;
                }
                let in_r: BTreeSet<String> = comp_ids
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| orbit_min & (1 << *i as u32) != 0)
                    .map(|(_, id)| id.clone())
                    .collect();
                jobs.push((fiber.clone(), in_r));
            }
        }
    }

    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(jobs.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<Result<BTreeMap<String, GermSpec>, EnumError>> =
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for _ in 0..workers {
                let jobs = &jobs;
                let next = &next;
                handles.push(scope.spawn(move || {
                    let mut found = BTreeMap::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        if i >= jobs.len() {
                            break;
                        }
                        let (fiber, in_r) = &jobs[i];
                        enumerate_for_fiber(params, fiber, in_r, caps, guard, &mut found)?;
                        if found.len() > guard {
                            return Err(EnumError::CapTooLarge(format!(
                                "more than {guard} germs; tighten the caps or raise FIBCALC_MAX_ENUM"
                            )));
                        }
                    }
                    Ok(found)
                }));
            }
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        });

    let mut found = BTreeMap::new();
    for r in results {
        found.append(&mut r?);
        if found.len() > guard {
            return Err(EnumError::CapTooLarge(format!(
                "more than {guard} germs; tighten the caps or raise FIBCALC_MAX_ENUM"
            )));
        }
    }
    Ok(found.into_values().collect())
}

fn enumerate_for_fiber(
    params: &FibrationParams,
    fiber: &FiberDescriptor,
    in_r: &BTreeSet<String>,
    caps: &EnumCaps,
    guard: usize,
    found: &mut BTreeMap<String, GermSpec>,
) -> Result<(), EnumError> {
    let sites = root_sites(fiber, in_r);
    // cheap prescreen: forced roots alone must fit the node budget
    if sites.iter().filter(|s| s.forced).count() > caps.max_nodes {
        return Ok(());
    }
    let mut generator = Gen {
        params,
        caps,
        n: params.n(),
        r: params.r(),
        m_p: fiber.multiplicity.max(1),
        memo: HashMap::new(),
    };

    #[allow(clippy::too_many_arguments)]
    fn roots_rec(
        g: &mut Gen,
        sites: &[RootSite],
        idx: usize,
        copies_done: usize,
        last: Option<&SymNode>,
        budget: usize,
        h_left: i64,
        current: &mut Vec<SymNode>,
        out: &mut Vec<Vec<SymNode>>,
        guard: usize,
    ) -> Result<(), EnumError> {
        if out.len() > guard {
            return Err(EnumError::CapTooLarge(format!(
                "more than {guard} candidate forests; tighten the caps"
            )));
        }
        if idx == sites.len() {
            out.push(current.clone());
            return Ok(());
        }
        let site = &sites[idx];
        let min_copies = usize::from(site.forced);
        if copies_done >= min_copies {
            roots_rec(g, sites, idx + 1, 0, None, budget, h_left, current, out, guard)?;
        }
        if copies_done < site.max_copies && budget > 0 {
            let slot = Slot {
                through: site.through.clone(),
                contacts: site.contacts.clone(),
                parent: None,
            };
            let vert: i64 = site.through.iter().filter(|t| t.in_r).map(|t| t.mu).sum();
            let subs = g.gen_subtrees(&slot, budget, h_left)?;
            for (sub, su) in subs.iter() {
                let sub_h = sub.own_h(vert);
                if sub_h > h_left || *su > budget {
                    continue;
                }
                if last.map(|l| sub < l).unwrap_or(false) {
                    continue;
                }
                current.push(sub.clone());
                roots_rec(
                    g,
                    sites,
                    idx,
                    copies_done + 1,
                    Some(sub),
                    budget - su,
                    h_left - sub_h,
                    current,
                    out,
                    guard,
                )?;
                current.pop();
            }
        }
        Ok(())
    }

    let mut forests = Vec::new();
    let r_budget = params.r() / fiber.multiplicity.max(1);
    roots_rec(
        &mut generator,
        &sites,
        0,
        0,
        None,
        caps.max_nodes,
        r_budget,
        &mut Vec::new(),
        &mut forests,
        guard.saturating_mul(4),
    )?;

    for sym_forest in forests {
        let mut counter = 0usize;
        let forest: Vec<ForestNode> = sym_forest
            .iter()
            .map(|sym| materialize(sym, &mut Vec::new(), &mut counter))
            .collect();
        let mut candidate = GermSpec {
            params: *params,
            fiber: fiber.clone(),
            in_r: in_r.clone(),
            forest,
            horizontal: HorizontalData::from_alpha0_plus(0),
        };
        // analyze runs the full validation internally
        let Ok(analysis) = analyze(&candidate, DeriveOptions::default()) else {
            continue;
        };
        let lb = alpha0_plus_minimum(&analysis.indices, &candidate.fiber, params);
        candidate.horizontal = HorizontalData::from_alpha0_plus(lb);
        let canon = canonical_form(&candidate);
        for extra in 0..=caps.alpha0_extra {
            let mut germ = canon.clone();
            germ.horizontal = HorizontalData::from_alpha0_plus(lb + extra);
            let key = serde_json::to_string(&germ).expect("germs serialize");
            found.insert(key, germ);
            if found.len() > guard {
                return Err(EnumError::CapTooLarge(format!(
                    "more than {guard} germs; tighten the caps or raise FIBCALC_MAX_ENUM"
                )));
            }
        }
    }
    Ok(())
}

/// The smallest `alpha_0^+` the audit lemmas and the crossing-room bound
/// allow for a derived forest.
pub fn alpha0_plus_minimum(
    idx: &IndexRecord,
    fiber: &FiberDescriptor,
    params: &FibrationParams,
) -> i64 {
    let n = params.n();
    let r = params.r();
    let iota = idx.iota_weighted();
    let kappa = idx.kappa_weighted();
    let co_sum: i64 = idx
        .pairs_n2
        .iter()
        .map(|(k, p)| 2 * k * (p.co0 + p.co1))
        .sum();
    let mut lb = Rat::zero();
    if params.h() == 1 {
        let m_p = fiber.multiplicity.max(1);
        let beta = if n != 2 {
            let kind = fiber.kind;
            let coeff = (n - 7) * i64::from(kind == KodairaKind::II)
                - (n + 1) * i64::from(kind == KodairaKind::III)
                - 2 * i64::from(kind == KodairaKind::IV);
            Rat::int(coeff * idx.iota3())
        } else {
            Rat::int(co_sum)
        };
        lb = lb.max(
            (Rat::one() - Rat::new(1, m_p)) * Rat::int(r)
                + Rat::int((n - 2) * (iota + 2 * kappa))
                + beta,
        );
    } else {
        let j = idx.j_total();
        let tail = if n == 2 { co_sum } else { 0 };
        lb = lb.max(Rat::int((n - 2) * (j - idx.eta + 2 * kappa) + tail));
        if n == 3 {
            let j01 = idx.j_at(0, 1);
            let rhs = 2 * idx.eta
                + 1
                + idx
                    .j_prime
                    .iter()
                    .chain(idx.j_doubleprime.iter())
                    .filter(|(&(_, a), _)| a >= 2)
                    .map(|(&(_, a), &c)| (2 * a - 1) * c)
                    .sum::<i64>();
            if j01 == rhs {
                lb = lb.max(Rat::new(5 * (r - 6), 9) + Rat::int(iota + 2 * kappa));
            }
        }
    }
    if idx.min_free_fiber_mult >= 1 {
        lb = lb.max(Rat::int(r - r / idx.min_free_fiber_mult));
    }
    if lb.is_negative() {
        return 0;
    }
    i64::try_from(&lb.ceil_int()).unwrap_or(0).max(0)
}
