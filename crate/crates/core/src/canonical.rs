//! Canonical forms for germs: deterministic relabeling of node ids,
//! ordering of roots and children, and normalization of the fiber
//! component labels, so that isomorphic germs serialize identically.

use crate::fiber::FiberDescriptor;
use crate::germ::{ForestNode, GermSpec, HorizontalData};
use std::collections::BTreeSet;

/// Canonical key of a subtree. Ordering realizes: multiplicity descending,
/// subtree size descending, then the recursive key itself.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct NodeKey {
    neg_m: i64,
    neg_size: i64,
    /// Incident refs: `(0, standard component index, mult)` for components,
    /// `(1, depth distance to the ancestor, mult)` for exceptional curves.
    inc: Vec<(u8, i64, i64)>,
    children: Vec<NodeKey>,
}

fn node_key(
    node: &ForestNode,
    comp_map: &dyn Fn(&str) -> Option<i64>,
    path: &mut Vec<Option<String>>,
) -> NodeKey {
    let depth = path.len() as i64;
    let mut inc: Vec<(u8, i64, i64)> = Vec::new();
    for (r, mult) in &node.on {
        if let Some(ci) = comp_map(r) {
            inc.push((0, ci, *mult));
        } else if let Some(pos) = path
            .iter()
            .position(|p| p.as_deref() == Some(r.as_str()))
        {
            inc.push((1, depth - pos as i64, *mult));
        }
        // unresolvable refs are a validation error; ignored here
    }
    inc.sort();
    path.push(node.id.clone());
    let mut children: Vec<NodeKey> = node
        .children
        .iter()
        .map(|c| node_key(c, comp_map, path))
        .collect();
    path.pop();
    children.sort();
    NodeKey {
        neg_m: -node.m,
        neg_size: -(node.subtree_size() as i64),
        inc,
        children,
    }
}

fn rebuild(key: &NodeKey, next_id: &mut usize, path: &mut Vec<String>) -> ForestNode {
    let id = format!("n{}", *next_id);
    *next_id += 1;
    let depth = path.len() as i64;
    let on = key
        .inc
        .iter()
        .map(|&(tag, v, mult)| {
            let target = if tag == 0 {
                format!("c{v}")
            } else {
                path[(depth - v) as usize].clone()
            };
            (target, mult)
        })
        .collect();
    path.push(id.clone());
    let children = key
        .children
        .iter()
        .map(|c| rebuild(c, next_id, path))
        .collect();
    path.pop();
    ForestNode {
        id: Some(id),
        m: -key.neg_m,
        on,
        children,
    }
}

/// Brings a germ into canonical form: the fiber becomes the standard layout
/// of its kind, component labels are permuted to minimize the total key,
/// roots and children are sorted, and node ids are relabeled `n0, n1, ...`
/// in preorder. Idempotent; isomorphic germs map to identical values.
pub fn canonical_form(spec: &GermSpec) -> GermSpec {
    let isos = spec.fiber.isomorphisms_to_standard();
    if isos.is_empty() {
        // not a standard fiber; leave untouched (validation reports this)
        return spec.clone();
    }
    let comp_index: Vec<&str> = spec.fiber.components.iter().map(|c| c.id.as_str()).collect();

    let mut best: Option<(Vec<i64>, Vec<NodeKey>, &Vec<usize>)> = None;
    for iso in &isos {
        let comp_map = |id: &str| -> Option<i64> {
            comp_index
                .iter()
                .position(|c| *c == id)
                .map(|i| iso[i] as i64)
        };
        let mut in_r: Vec<i64> = spec
            .in_r
            .iter()
            .filter_map(|id| comp_map(id))
            .collect();
        in_r.sort();
        let mut roots: Vec<NodeKey> = spec
            .forest
            .iter()
            .map(|r| node_key(r, &comp_map, &mut Vec::new()))
            .collect();
        roots.sort();
        let candidate = (in_r, roots, iso);
        if best
            .as_ref()
            .map(|(bi, br, _)| (&candidate.0, &candidate.1) < (bi, br))
            .unwrap_or(true)
        {
            best = Some(candidate);
        }
    }
    let (in_r, roots, _) = best.expect("at least one isomorphism");

    let mut next_id = 0usize;
    let forest = roots
        .iter()
        .map(|k| rebuild(k, &mut next_id, &mut Vec::new()))
        .collect();
    let horizontal = match (&spec.horizontal.branches, spec.horizontal.alpha0_plus) {
        (Some(b), over) => {
            let mut b = b.clone();
            b.sort_unstable_by(|x, y| y.cmp(x));
            HorizontalData {
                branches: Some(b),
                alpha0_plus: over,
            }
        }
        (None, over) => HorizontalData {
            branches: None,
            alpha0_plus: over,
        },
    };
    GermSpec {
        params: spec.params,
        fiber: FiberDescriptor::standard(spec.fiber.kind, spec.fiber.multiplicity),
        in_r: in_r.into_iter().map(|i| format!("c{i}")).collect::<BTreeSet<_>>(),
        forest,
        horizontal,
    }
}

/// A deterministic text key for dedup and ordering of canonical germs.
pub fn canonical_key(spec: &GermSpec) -> String {
    serde_json::to_string(&canonical_form(spec)).expect("germs serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::KodairaKind;
    use crate::params::compute_params;

    fn two_root_germ(order: bool) -> GermSpec {
        let p = compute_params(6, 1, 2).unwrap(); // r = 10
        let mut g = GermSpec::general_fiber(p);
        let a = ForestNode::new(2, vec![("c0", 1)], vec![]);
        let b = ForestNode::new(4, vec![("c0", 1)], vec![]);
        g.forest = if order {
            vec![a, b]
        } else {
            vec![b, a]
        };
        g.horizontal = HorizontalData::from_alpha0_plus(0);
        g
    }

    #[test]
    fn root_order_is_normalized() {
        assert_eq!(
            canonical_form(&two_root_germ(true)),
            canonical_form(&two_root_germ(false))
        );
    }

    #[test]
    fn canonical_form_is_idempotent() {
        let g = canonical_form(&two_root_germ(true));
        assert_eq!(canonical_form(&g), g);
    }

    #[test]
    fn single_node_is_fixed_point_up_to_ids() {
        let p = compute_params(3, 1, 2).unwrap();
        let mut g = GermSpec::general_fiber(p);
        g.forest = vec![ForestNode::new(3, vec![("c0", 1)], vec![])];
        let c = canonical_form(&g);
        assert_eq!(c.forest.len(), 1);
        assert_eq!(c.forest[0].m, 3);
        assert_eq!(canonical_form(&c), c);
    }

    #[test]
    fn component_symmetry_is_quotiented() {
        // Type IV fiber: a root anchored on one leg only; any leg gives the
        // same canonical germ.
        let p = compute_params(7, 1, 3).unwrap(); // r = 6
        let mk = |leg: &str| {
            let mut g = GermSpec::general_fiber(p);
            g.fiber = FiberDescriptor::standard(KodairaKind::IV, 1);
            g.in_r = std::iter::once(leg.to_string()).collect();
            g.forest = vec![ForestNode::new(
                3,
                vec![(leg, 1)],
                vec![ForestNode::new(3, vec![(leg, 1)], vec![])],
            )];
            g
        };
        assert_eq!(canonical_form(&mk("c0")), canonical_form(&mk("c2")));
    }

    #[test]
    fn permuted_children_share_a_key() {
        let p = compute_params(6, 1, 2).unwrap();
        let mut g1 = GermSpec::general_fiber(p);
        let c1 = ForestNode::new(2, vec![], vec![]);
        let c2 = ForestNode::new(4, vec![], vec![]);
        g1.forest = vec![ForestNode::new(5, vec![("c0", 1)], vec![c1.clone(), c2.clone()])];
        let mut g2 = g1.clone();
        g2.forest = vec![ForestNode::new(5, vec![("c0", 1)], vec![c2, c1])];
        assert_eq!(canonical_key(&g1), canonical_key(&g2));
    }
}
