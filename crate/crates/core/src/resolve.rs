//! The shared resolution walk over a germ's blow-up forest.
//!
//! Validation, index derivation and the per-curve ledger all consume the
//! same resolved structure: curves (fiber components and exceptional
//! curves) with their blow-up histories, and nodes with multiplicity class,
//! incident curves, horizontal multiplicity, vertical type and fiber
//! multiplicities.

use crate::fiber::KodairaKind;
use crate::germ::{ForestNode, GermSpec, Violation};
use crate::params::{classify_multiplicity, ClassifiedMult, MultClass};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone)]
pub(crate) struct CurveState {
    /// Component id, or the node id for an exceptional curve.
    pub label: String,
    pub comp_index: Option<usize>,
    /// Node that created this exceptional curve.
    pub origin_node: Option<usize>,
    pub in_r: bool,
    pub genus: u8,
    pub initial_self_int: i64,
    /// Nodal or cuspidal curve (reduced singular fiber in the branch locus).
    pub singular: bool,
    /// Multiplicity of the curve in the total transform of the fiber.
    pub fiber_mult: i64,
    /// Blow-ups on this curve: `(node index, local multiplicity k_i)`.
    pub blowups: Vec<(usize, i64)>,
}

impl CurveState {
    pub fn is_component(&self) -> bool {
        self.comp_index.is_some()
    }

    /// Self-intersection of the proper transform on the final model.
    pub fn final_self_int(&self) -> i64 {
        self.initial_self_int - self.blowups.iter().map(|(_, k)| k * k).sum::<i64>()
    }

}

#[derive(Debug, Clone)]
pub(crate) struct NodeState {
    pub id: String,
    pub parent: Option<usize>,
    pub depth: usize,
    pub m: i64,
    pub class: Option<ClassifiedMult>,
    /// Explicitly listed incident curves `(curve index, local multiplicity)`.
    pub incident: Vec<(usize, i64)>,
    /// Index of the exceptional curve created at this node.
    pub exc_curve: usize,
    /// Horizontal multiplicity at the point.
    pub h: i64,
    /// Curves of the vertical branch locus through the point (explicit plus
    /// the implicit parent exceptional curve when it lies in the branch
    /// locus). The curve contracting TO the point does not count.
    pub vert_r: Vec<usize>,
    pub children: Vec<usize>,
    /// Pairwise contact orders of curves through this point.
    pub contacts: BTreeMap<(usize, usize), i64>,
}

impl NodeState {
    pub fn u(&self) -> usize {
        self.vert_r.len()
    }

    pub fn is_nz(&self) -> bool {
        matches!(
            self.class,
            Some(ClassifiedMult {
                class: MultClass::NZ,
                ..
            })
        )
    }

    pub fn is_nz1(&self) -> bool {
        matches!(
            self.class,
            Some(ClassifiedMult {
                class: MultClass::NZPlus1,
                ..
            })
        )
    }

    pub fn k(&self) -> i64 {
        self.class.map(|c| c.k).unwrap_or(0)
    }
}

#[derive(Debug)]
pub(crate) struct Resolved {
    pub curves: Vec<CurveState>,
    pub nodes: Vec<NodeState>,
    pub roots: Vec<usize>,
    pub comp_count: usize,
    pub violations: Vec<Violation>,
}

fn contact_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Resolved {
    pub fn build(spec: &GermSpec) -> Resolved {
        Builder::new(spec).run()
    }
}

struct Builder<'a> {
    spec: &'a GermSpec,
    comp_idx: BTreeMap<String, usize>,
    curves: Vec<CurveState>,
    nodes: Vec<NodeState>,
    roots: Vec<usize>,
    used_ids: BTreeSet<String>,
    violations: Vec<Violation>,
    auto_id: usize,
}

impl<'a> Builder<'a> {
    fn new(spec: &'a GermSpec) -> Self {
        Builder {
            spec,
            comp_idx: BTreeMap::new(),
            curves: Vec::new(),
            nodes: Vec::new(),
            roots: Vec::new(),
            used_ids: BTreeSet::new(),
            violations: Vec::new(),
            auto_id: 0,
        }
    }

    fn violate(&mut self, rule: &'static str, at: Option<String>, detail: String) {
        self.violations.push(Violation { rule, at, detail });
    }

    fn run(mut self) -> Resolved {
        self.check_params_fiber();
        self.index_components();
        let forest = self.spec.forest.clone();
        for root in &forest {
            self.walk(root, None);
        }
        self.check_tower_monotonicity();
        self.check_root_anchors();
        self.check_forced_children();
        self.check_vertical_patterns();
        self.check_chain_multiplicities();
        self.check_curve_ledger();
        self.check_horizontal();
        self.check_horizontal_room();
        Resolved {
            curves: self.curves,
            nodes: self.nodes,
            roots: self.roots,
            comp_count: self.comp_idx.len(),
            violations: self.violations,
        }
    }

    fn check_params_fiber(&mut self) {
        let p = &self.spec.params;
        let fiber = &self.spec.fiber;
        match p.h() {
            0 => {
                if fiber.kind != KodairaKind::RuledLine {
                    self.violate(
                        "fiber-kind",
                        None,
                        format!("h = 0 fibers are ruled lines, got {}", fiber.kind),
                    );
                }
            }
            1 => {
                if fiber.kind == KodairaKind::RuledLine {
                    self.violate(
                        "fiber-kind",
                        None,
                        "h = 1 fibers follow Kodaira's table, got a ruled line".into(),
                    );
                }
            }
            _ => self.violate("fiber-kind", None, format!("unsupported h = {}", p.h())),
        }
        for e in fiber.structural_errors() {
            self.violate("fiber-structure", None, e);
        }
        if fiber.multiplicity > 0 && p.r() % fiber.multiplicity != 0 {
            self.violate(
                "fiber-multiplicity-divides",
                None,
                format!(
                    "fiber multiplicity {} does not divide r = {}",
                    fiber.multiplicity,
                    p.r()
                ),
            );
        }
        for id in &self.spec.in_r {
            if fiber.component(id).is_none() {
                self.violate("unknown-component", None, format!("in_R references {id:?}"));
            }
        }
    }

    fn index_components(&mut self) {
        let m_p = self.spec.fiber.multiplicity.max(1);
        for (i, c) in self.spec.fiber.components.iter().enumerate() {
            self.comp_idx.insert(c.id.clone(), i);
            self.used_ids.insert(c.id.clone());
            self.curves.push(CurveState {
                label: c.id.clone(),
                comp_index: Some(i),
                origin_node: None,
                in_r: self.spec.in_r.contains(&c.id),
                genus: c.genus,
                initial_self_int: c.self_intersection,
                singular: c.singular,
                fiber_mult: m_p * c.fiber_multiplicity,
                blowups: Vec::new(),
            });
        }
    }

    fn node_label(&mut self, node: &ForestNode) -> String {
        match &node.id {
            Some(id) => {
                if !self.used_ids.insert(id.clone()) {
                    self.violate(
                        "duplicate-id",
                        Some(id.clone()),
                        "node id collides with a component or another node".into(),
                    );
                }
                id.clone()
            }
            None => loop {
                let id = format!("n{}", self.auto_id);
                self.auto_id += 1;
                if self.used_ids.insert(id.clone()) {
                    break id;
                }
            },
        }
    }

    fn walk(&mut self, node: &ForestNode, parent: Option<usize>) -> usize {
        let id = self.node_label(node);
        let n = self.spec.params.n();
        let r = self.spec.params.r();
        let m_p = self.spec.fiber.multiplicity.max(1);
        let depth = parent.map(|p| self.nodes[p].depth + 1).unwrap_or(0);

        let class = match classify_multiplicity(node.m, n) {
            Ok(c) => Some(c),
            Err(e) => {
                self.violate("invalid-multiplicity", Some(id.clone()), e.to_string());
                None
            }
        };
        if node.m > r / m_p + 1 {
            self.violate(
                "multiplicity-exceeds-bound",
                Some(id.clone()),
                format!("m = {} exceeds r/m_p + 1 = {}", node.m, r / m_p + 1),
            );
        }

        // Resolve incident refs against the curves through the parent point.
        let allowed: BTreeMap<usize, i64> = match parent {
            None => self
                .comp_idx
                .values()
                .map(|&ci| {
                    let c = &self.spec.fiber.components[ci];
                    (ci, if c.singular { 2 } else { 1 })
                })
                .collect(),
            Some(p) => {
                let mut a: BTreeMap<usize, i64> =
                    self.nodes[p].incident.iter().copied().collect();
                if let Some(gp) = self.nodes[p].parent {
                    a.insert(self.nodes[gp].exc_curve, 1);
                }
                a
            }
        };

        let mut incident: Vec<(usize, i64)> = Vec::new();
        for (ref_id, mult) in &node.on {
            let curve = self
                .comp_idx
                .get(ref_id)
                .copied()
                .or_else(|| self.curves.iter().position(|c| &c.label == ref_id && !c.is_component()));
            let Some(ci) = curve else {
                self.violate(
                    "unknown-curve-ref",
                    Some(id.clone()),
                    format!("incident curve {ref_id:?} does not exist"),
                );
                continue;
            };
            if incident.iter().any(|(c, _)| *c == ci) {
                self.violate(
                    "duplicate-incident",
                    Some(id.clone()),
                    format!("curve {ref_id:?} listed twice"),
                );
                continue;
            }
            let Some(&budget) = allowed.get(&ci) else {
                self.violate(
                    "incident-not-allowed",
                    Some(id.clone()),
                    format!("curve {ref_id:?} does not pass through this point"),
                );
                continue;
            };
            if *mult < 1 || *mult > budget {
                self.violate(
                    "incident-multiplicity",
                    Some(id.clone()),
                    format!("local multiplicity {mult} of {ref_id:?} out of range 1..={budget}"),
                );
                continue;
            }
            if *mult == 2 && !(parent.is_none() && self.curves[ci].singular) {
                self.violate(
                    "incident-multiplicity",
                    Some(id.clone()),
                    format!("multiplicity 2 is only valid at the singular point of {ref_id:?}"),
                );
            }
            incident.push((ci, *mult));
        }

        // Pairwise contacts at this point.
        let contacts = self.contacts_at(node, parent, &incident, &id);

        // Horizontal multiplicity.
        let vert_in_r: i64 = incident
            .iter()
            .filter(|(c, _)| self.curves[*c].in_r)
            .map(|(_, m)| m)
            .sum::<i64>()
            + parent
                .map(|p| if self.nodes[p].is_nz1() { 1 } else { 0 })
                .unwrap_or(0);
        let h = node.m - vert_in_r;
        if h < 0 {
            self.violate(
                "vertical-mult-exceeds-total",
                Some(id.clone()),
                format!(
                    "incident branch-locus multiplicity {vert_in_r} exceeds total m = {}",
                    node.m
                ),
            );
        }
        if self.spec.params.h() == 0 {
            let even_g_n2 = n == 2 && self.spec.params.g() % 2 == 0;
            if even_g_n2 && node.m > r / 2 {
                self.violate(
                    "h0-normalization",
                    Some(id.clone()),
                    format!("m = {} exceeds the standard-model bound r/2 = {}", node.m, r / 2),
                );
            } else if !even_g_n2 && h > r / 2 {
                self.violate(
                    "h0-normalization",
                    Some(id.clone()),
                    format!(
                        "horizontal multiplicity {h} exceeds the standard-model bound r/2 = {}",
                        r / 2
                    ),
                );
            }
        }

        // Vertical branch-locus curves through the point.
        let mut vert_r: Vec<usize> = incident
            .iter()
            .filter(|(c, _)| self.curves[*c].in_r)
            .map(|(c, _)| *c)
            .collect();
        if let Some(p) = parent {
            if self.nodes[p].is_nz1() {
                vert_r.push(self.nodes[p].exc_curve);
            }
        }

        // Fiber multiplicity of the exceptional curve.
        let fiber_mult = incident
            .iter()
            .map(|(c, mult)| self.curves[*c].fiber_mult * mult)
            .sum::<i64>()
            + parent.map(|p| self.curves[self.nodes[p].exc_curve].fiber_mult).unwrap_or(0);

        // Record the blow-up on each incident curve (and the implicit parent).
        for (ci, mult) in &incident {
            self.curves[*ci].blowups.push((self.nodes.len(), *mult));
        }
        if let Some(p) = parent {
            let e = self.nodes[p].exc_curve;
            self.curves[e].blowups.push((self.nodes.len(), 1));
        }

        let exc_curve = self.curves.len();
        self.curves.push(CurveState {
            label: id.clone(),
            comp_index: None,
            origin_node: Some(self.nodes.len()),
            in_r: matches!(
                class,
                Some(ClassifiedMult {
                    class: MultClass::NZPlus1,
                    ..
                })
            ),
            genus: 0,
            initial_self_int: -1,
            singular: false,
            fiber_mult,
            blowups: Vec::new(),
        });

        let node_index = self.nodes.len();
        self.nodes.push(NodeState {
            id: id.clone(),
            parent,
            depth,
            m: node.m,
            class,
            incident: incident.clone(),
            exc_curve,
            h,
            vert_r,
            children: Vec::new(),
            contacts,
        });
        if parent.is_none() {
            self.roots.push(node_index);
        }

        let mut child_indices = Vec::new();
        for child in &node.children {
            let c = self.walk(child, Some(node_index));
            child_indices.push(c);
        }
        self.nodes[node_index].children = child_indices.clone();
        if let Some(p) = parent {
            // registered below by the parent loop; nothing to do here
            let _ = p;
        }

        // Per-curve budgets: children cannot consume more crossings with the
        // exceptional curve than the incident multiplicity provides.
        let budgets: BTreeMap<usize, i64> = incident.iter().map(|&(c, m)| (c, m)).collect();
        for (&ci, &budget) in &budgets {
            let listing: Vec<i64> = child_indices
                .iter()
                .map(|&c| {
                    self.nodes[c]
                        .incident
                        .iter()
                        .filter(|(cc, _)| *cc == ci)
                        .map(|(_, m)| m)
                        .sum::<i64>()
                })
                .filter(|&m| m > 0)
                .collect();
            let consumed: i64 = listing.iter().sum();
            if consumed > budget {
                self.violate(
                    "child-budget",
                    Some(id.clone()),
                    format!(
                        "children meet curve {:?} with total multiplicity {consumed} > {budget}",
                        self.curves[ci].label
                    ),
                );
            }
            // a cuspidal branch crosses the exceptional curve at one point
            if budget == 2 && self.spec.fiber.kind == KodairaKind::II && listing.len() > 1 {
                self.violate(
                    "child-budget",
                    Some(id.clone()),
                    format!(
                        "the cuspidal branch of {:?} crosses the exceptional curve once, {} children listed",
                        self.curves[ci].label,
                        listing.len()
                    ),
                );
            }
        }
        if let Some(p) = parent {
            let pe = self.nodes[p].exc_curve;
            let consumed: i64 = child_indices
                .iter()
                .map(|&c| {
                    self.nodes[c]
                        .incident
                        .iter()
                        .filter(|(cc, _)| *cc == pe)
                        .map(|(_, m)| m)
                        .sum::<i64>()
                })
                .sum();
            if consumed > 1 {
                self.violate(
                    "child-budget",
                    Some(id.clone()),
                    format!(
                        "children meet the exceptional curve of {:?} {consumed} times (max 1)",
                        self.nodes[p].id
                    ),
                );
            }
        }
        let child_h: i64 = child_indices.iter().map(|&c| self.nodes[c].h.max(0)).sum();
        if child_h > h.max(0) {
            self.violate(
                "horizontal-budget",
                Some(id.clone()),
                format!("children carry horizontal multiplicity {child_h} > {h}"),
            );
        }

        node_index
    }

    /// Contact orders between pairs of curves through a node, and the
    /// co-listing checks that go with them.
    fn contacts_at(
        &mut self,
        node: &ForestNode,
        parent: Option<usize>,
        incident: &[(usize, i64)],
        id: &str,
    ) -> BTreeMap<(usize, usize), i64> {
        let mut contacts = BTreeMap::new();
        match parent {
            None => {
                // Contacts between fiber components come from the dual graph.
                for (i, &(a, _)) in incident.iter().enumerate() {
                    for &(b, _) in incident.iter().skip(i + 1) {
                        let ea = &self.curves[a].label;
                        let eb = &self.curves[b].label;
                        let edges = self.spec.fiber.edges_between(ea, eb);
                        if edges.is_empty() {
                            self.violate(
                                "root-anchor",
                                Some(id.to_string()),
                                format!("components {ea:?} and {eb:?} do not meet"),
                            );
                        }
                        let c = edges.into_iter().max().unwrap_or(0);
                        contacts.insert(contact_key(a, b), c);
                    }
                }
            }
            Some(p) => {
                let p_exc = self.nodes[p].exc_curve;
                let parent_contacts = self.nodes[p].contacts.clone();
                let cusp_at_parent = self.spec.fiber.kind == KodairaKind::II
                    && self.nodes[p]
                        .incident
                        .iter()
                        .any(|&(c, m)| m == 2 && self.curves[c].singular);
                for (i, &(a, _)) in incident.iter().enumerate() {
                    // contact with the curve that was just blown up
                    let c_with_e = if a != p_exc
                        && cusp_at_parent
                        && self.curves[a].singular
                    {
                        2
                    } else {
                        1
                    };
                    if a != p_exc {
                        contacts.insert(contact_key(a, p_exc), c_with_e);
                    }
                    for &(b, _) in incident.iter().skip(i + 1) {
                        let (x, y) = contact_key(a, b);
                        let inherited = if x == p_exc || y == p_exc {
                            // the pair involves the parent's exceptional
                            // curve: fresh contact computed above
                            continue;
                        } else {
                            parent_contacts.get(&(x, y)).copied().unwrap_or(1)
                        };
                        if inherited < 2 {
                            self.violate(
                                "tangency-needed",
                                Some(id.to_string()),
                                format!(
                                    "curves {:?} and {:?} were transverse below and cannot meet again",
                                    self.curves[x].label, self.curves[y].label
                                ),
                            );
                        }
                        contacts.insert((x, y), inherited - 1);
                    }
                }
                // Contact of each incident curve with the implicit parent
                // exceptional curve is 1 except in the cusp tower; record
                // the cusp case for the grandchild co-listing check.
                let _ = node;
            }
        }
        contacts
    }

    fn check_root_anchors(&mut self) {
        let kind = self.spec.fiber.kind;
        let mut pair_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut triple_count = 0usize;
        let mut singular_roots: BTreeMap<usize, usize> = BTreeMap::new();
        for &ri in &self.roots.clone() {
            let node = &self.nodes[ri];
            let comps: Vec<usize> = node.incident.iter().map(|&(c, _)| c).collect();
            let id = node.id.clone();
            match comps.len() {
                0 => self.violate(
                    "root-anchor",
                    Some(id),
                    "root is not anchored on any fiber component".into(),
                ),
                1 => {
                    if node.incident[0].1 == 2 {
                        *singular_roots.entry(comps[0]).or_insert(0) += 1;
                    }
                }
                2 => {
                    if kind == KodairaKind::IV {
                        self.violate(
                            "root-anchor",
                            Some(id),
                            "on a type IV fiber the components only meet at the triple point; list all three".into(),
                        );
                    } else {
                        *pair_count.entry(contact_key(comps[0], comps[1])).or_insert(0) += 1;
                    }
                }
                3 => {
                    if kind == KodairaKind::IV {
                        triple_count += 1;
                    } else {
                        self.violate(
                            "root-anchor",
                            Some(id),
                            "three components never meet at one point for this fiber type".into(),
                        );
                    }
                }
                _ => self.violate(
                    "root-anchor",
                    Some(id),
                    "at most three components can pass through a point".into(),
                ),
            }
        }
        // Counting limits per intersection point.
        for ((a, b), count) in &pair_count {
            let ea = &self.curves[*a].label;
            let eb = &self.curves[*b].label;
            let available = self.spec.fiber.edges_between(ea, eb).len();
            if *count > available {
                self.violate(
                    "root-anchor-count",
                    None,
                    format!("{count} roots on {ea:?} and {eb:?}, but they meet at {available} point(s)"),
                );
            }
        }
        if triple_count > 1 {
            self.violate(
                "root-anchor-count",
                None,
                format!("{triple_count} roots at the type IV triple point"),
            );
        }
        for (c, count) in &singular_roots {
            if *count > 1 {
                self.violate(
                    "root-anchor-count",
                    None,
                    format!("{count} roots at the singular point of {:?}", self.curves[*c].label),
                );
            }
        }
        // Forced nodes: intersections of branch-locus components are
        // singular points of the branch curve and must appear in the forest.
        let comp_count = self.comp_idx.len();
        if kind == KodairaKind::IV {
            let in_r = (0..comp_count).filter(|&c| self.curves[c].in_r).count();
            if in_r >= 2 && triple_count != 1 {
                self.violate(
                    "missing-node-at-intersection",
                    None,
                    "the type IV triple point lies on the branch locus but carries no root".into(),
                );
            }
            if triple_count == 1 {
                // the root there must list all three components
                // (checked above via comps.len() == 3)
            }
        } else {
            for a in 0..comp_count {
                for b in (a + 1)..comp_count {
                    if !(self.curves[a].in_r && self.curves[b].in_r) {
                        continue;
                    }
                    let ea = &self.curves[a].label;
                    let eb = &self.curves[b].label;
                    let points = self.spec.fiber.edges_between(ea, eb).len();
                    let have = pair_count.get(&(a, b)).copied().unwrap_or(0);
                    if points > 0 && have != points {
                        self.violate(
                            "missing-node-at-intersection",
                            None,
                            format!(
                                "components {ea:?} and {eb:?} lie in the branch locus and meet at {points} point(s), {have} root(s) declared"
                            ),
                        );
                    }
                }
            }
        }
        for c in 0..comp_count {
            if self.curves[c].in_r && self.curves[c].singular {
                let have = singular_roots.get(&c).copied().unwrap_or(0);
                if have != 1 {
                    self.violate(
                        "missing-node-at-singular-point",
                        None,
                        format!(
                            "the singular point of {:?} lies on the branch locus and needs exactly one root",
                            self.curves[c].label
                        ),
                    );
                }
            }
        }
    }

    /// After a blow-up at a point of class nZ+1 the new exceptional curve
    /// lies in the branch locus, so its intersections with the other
    /// branch-locus curves through the point are again singular and must be
    /// children. Tangent branch-locus pairs stay together one more level
    /// even when the exceptional curve itself stays out.
    fn check_forced_children(&mut self) {
        for ni in 0..self.nodes.len() {
            let node = self.nodes[ni].clone();
            let id = node.id.clone();
            let mut through: Vec<(usize, i64)> = node.incident.clone();
            if let Some(p) = node.parent {
                through.push((self.nodes[p].exc_curve, 1));
            }
            if node.is_nz1() {
                for &(ci, mult) in &through {
                    if !self.curves[ci].in_r {
                        continue;
                    }
                    let crossings = if mult == 2 && self.spec.fiber.kind != KodairaKind::II {
                        2
                    } else {
                        1
                    };
                    let have = node
                        .children
                        .iter()
                        .filter(|&&ch| self.nodes[ch].incident.iter().any(|&(c, _)| c == ci))
                        .count();
                    if have != crossings {
                        self.violate(
                            "missing-forced-child",
                            Some(id.clone()),
                            format!(
                                "branch-locus curve {:?} crosses the new exceptional curve at {crossings} singular point(s), {have} child(ren) declared",
                                self.curves[ci].label
                            ),
                        );
                    }
                }
            } else if node.is_nz() {
                // tangent in-R pairs still meet on the exceptional curve
                for (&(a, b), &contact) in &node.contacts {
                    if contact >= 2 && self.curves[a].in_r && self.curves[b].in_r {
                        let have = node
                            .children
                            .iter()
                            .filter(|&&ch| {
                                let inc = &self.nodes[ch].incident;
                                inc.iter().any(|&(c, _)| c == a)
                                    && inc.iter().any(|&(c, _)| c == b)
                            })
                            .count();
                        if have != 1 {
                            self.violate(
                                "missing-forced-child",
                                Some(id.clone()),
                                format!(
                                    "tangent branch-locus curves {:?} and {:?} still meet over this point; exactly one child must list both",
                                    self.curves[a].label, self.curves[b].label
                                ),
                            );
                        }
                    }
                }
            }
            // Co-tangency closure: a child at the shared point of a tangent
            // pair must list both curves.
            for &ch in &node.children {
                let child_inc: Vec<usize> =
                    self.nodes[ch].incident.iter().map(|&(c, _)| c).collect();
                for &ci in &child_inc {
                    for (&(a, b), &contact) in &node.contacts {
                        if contact < 2 {
                            continue;
                        }
                        let other = if a == ci {
                            b
                        } else if b == ci {
                            a
                        } else {
                            continue;
                        };
                        let mu = through
                            .iter()
                            .find(|&&(c, _)| c == ci)
                            .map(|&(_, m)| m)
                            .unwrap_or(1);
                        if mu == 1 && !child_inc.contains(&other) {
                            self.violate(
                                "tangent-pair-missing",
                                Some(self.nodes[ch].id.clone()),
                                format!(
                                    "{:?} is tangent to {:?} below, so both pass through this point",
                                    self.curves[ci].label, self.curves[other].label
                                ),
                            );
                        }
                    }
                }
            }
        }
    }

    /// Multiplicities along a chain of infinitely-near points can only grow
    /// by one, and only over an nZ+1 point whose predecessor (if any) was
    /// of class nZ; after an nZ+1 -> nZ step they drop strictly.
    fn check_tower_monotonicity(&mut self) {
        for ni in 0..self.nodes.len() {
            let Some(p) = self.nodes[ni].parent else {
                continue;
            };
            let (m, id) = (self.nodes[ni].m, self.nodes[ni].id.clone());
            let parent = self.nodes[p].clone();
            let cap = parent.m + if parent.is_nz1() { 1 } else { 0 };
            if m > cap {
                self.violate(
                    "tower-monotonicity",
                    Some(id.clone()),
                    format!("m = {m} exceeds {cap} allowed over a point of multiplicity {}", parent.m),
                );
                continue;
            }
            if m == parent.m + 1 {
                // the jump is only possible when the grandparent was of
                // class nZ (n = 2; for n >= 3 the jump is unclassifiable)
                if let Some(gp) = parent.parent {
                    if !self.nodes[gp].is_nz() {
                        self.violate(
                            "tower-monotonicity",
                            Some(id.clone()),
                            "two multiplicity jumps in a row are impossible".into(),
                        );
                    }
                }
            }
            if let Some(gp) = parent.parent {
                if self.nodes[gp].is_nz1() && parent.is_nz() && m >= parent.m {
                    self.violate(
                        "tower-monotonicity",
                        Some(id),
                        format!(
                            "multiplicity must drop strictly below {} after an nZ+1 -> nZ step",
                            parent.m
                        ),
                    );
                }
            }
        }
    }

    /// Lemma-level checks on vertical types: no u >= 4 ever, u = 3 only in
    /// the three known configurations on fibers of type II, III, IV, and at
    /// most one 3-vertical singularity.
    fn check_vertical_patterns(&mut self) {
        let h = self.spec.params.h();
        let kind = self.spec.fiber.kind;
        let mut three_vertical = Vec::new();
        for ni in 0..self.nodes.len() {
            let u = self.nodes[ni].u();
            let id = self.nodes[ni].id.clone();
            if u >= 4 || (h == 0 && u >= 3) {
                self.violate(
                    "vertical-type-u",
                    Some(id.clone()),
                    format!("{u} branch-locus curves through one point is impossible"),
                );
            } else if u == 3 {
                three_vertical.push(ni);
            }
        }
        if three_vertical.len() > 1 {
            self.violate(
                "three-vertical-count",
                None,
                format!("{} three-vertical singularities; at most one can occur", three_vertical.len()),
            );
        }
        for ni in three_vertical {
            let node = &self.nodes[ni];
            let id = node.id.clone();
            let ok = match kind {
                KodairaKind::IV => node.parent.is_none() && node.incident.len() == 3,
                KodairaKind::III => {
                    // child of the tangent-point root, both components listed
                    match node.parent {
                        Some(p) => {
                            self.nodes[p].parent.is_none()
                                && self.nodes[p].is_nz1()
                                && node.incident.len() == 2
                                && node
                                    .incident
                                    .iter()
                                    .all(|&(c, _)| self.curves[c].is_component())
                        }
                        None => false,
                    }
                }
                KodairaKind::II => {
                    // grandchild of the cusp root in the cusp tower
                    match node.parent.and_then(|p| self.nodes[p].parent.map(|gp| (p, gp))) {
                        Some((p, gp)) => {
                            self.nodes[gp].parent.is_none()
                                && self.nodes[gp].is_nz1()
                                && self.nodes[p].is_nz1()
                                && self.nodes[gp]
                                    .incident
                                    .iter()
                                    .any(|&(c, m)| m == 2 && self.curves[c].singular)
                        }
                        None => false,
                    }
                }
                _ => false,
            };
            if !ok {
                self.violate(
                    "three-vertical-pattern",
                    Some(id),
                    format!("3-vertical singularities only occur on fibers of type II, III, IV in their standard configuration (fiber is {kind})"),
                );
            }
        }
    }

    /// No singular point of maximal multiplicity `r/m_p + 1` can be of class
    /// nZ+1 when n >= 3, nor of kappa type (nZ+1 with u >= 2) when n = 2.
    fn check_chain_multiplicities(&mut self) {
        let n = self.spec.params.n();
        let r = self.spec.params.r();
        let m_p = self.spec.fiber.multiplicity.max(1);
        let top = r / m_p + 1;
        for ni in 0..self.nodes.len() {
            let node = &self.nodes[ni];
            if !node.is_nz1() || node.m != top {
                continue;
            }
            let id = node.id.clone();
            if n >= 3 {
                self.violate(
                    "chain-multiplicity",
                    Some(id),
                    format!("no singularity of class nZ+1 can reach multiplicity r/m_p + 1 = {top} when n >= 3"),
                );
            } else if node.u() >= 2 {
                self.violate(
                    "chain-multiplicity",
                    Some(id),
                    format!("a multiplicity-{top} singularity is 1-vertical when n = 2"),
                );
            }
        }
    }

    /// Every branch-locus curve must end with self-intersection `-an`,
    /// `a >= 1`, on the final model.
    fn check_curve_ledger(&mut self) {
        let n = self.spec.params.n();
        for ci in 0..self.curves.len() {
            let c = &self.curves[ci];
            if !c.in_r {
                continue;
            }
            let l2 = c.final_self_int();
            if l2 >= 0 || l2 % n != 0 {
                self.violate(
                    "curve-self-intersection",
                    Some(c.label.clone()),
                    format!("branch-locus curve ends at self-intersection {l2}, expected a negative multiple of n = {n}"),
                );
            }
        }
    }

    /// The horizontal part is disjoint from the vertical branch curves on
    /// the final model, so each of its intersection points with the fiber
    /// costs the total-transform multiplicity of the component it crosses.
    /// With `N` points, `alpha_0^+ = r - N`, which bounds it from below.
    fn check_horizontal_room(&mut self) {
        let r = self.spec.params.r();
        let free_min = self
            .curves
            .iter()
            .filter(|c| !c.in_r)
            .map(|c| c.fiber_mult)
            .min();
        let Some(free_min) = free_min else {
            self.violate(
                "horizontal-room",
                None,
                "every vertical curve lies in the branch locus; the horizontal part has nowhere to cross the fiber".into(),
            );
            return;
        };
        if free_min < 1 {
            return; // malformed fiber data, reported elsewhere
        }
        let lower = r - r / free_min;
        if self.spec.horizontal.alpha0_plus() < lower {
            self.violate(
                "alpha0-room",
                None,
                format!(
                    "horizontal branches cross components of multiplicity >= {free_min}, forcing alpha_0^+ >= {lower}"
                ),
            );
        }
    }

    fn check_horizontal(&mut self) {
        let r = self.spec.params.r();
        if let Some(branches) = &self.spec.horizontal.branches {
            if branches.iter().any(|&e| e < 1) {
                self.violate(
                    "horizontal-branch",
                    None,
                    "ramification indices must be >= 1".into(),
                );
            }
            let total: i64 = branches.iter().sum();
            if total != r {
                self.violate(
                    "horizontal-degree",
                    None,
                    format!("ramification indices sum to {total}, expected r = {r}"),
                );
            }
        }
        if self.spec.horizontal.alpha0_plus() < 0 {
            self.violate("alpha0-negative", None, "alpha_0^+ must be >= 0".into());
        }
    }
}
