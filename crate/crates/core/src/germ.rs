//! The fiber-germ data model: a fiber descriptor, the set of fiber
//! components inside the branch locus, the forest of infinitely-near
//! singular points of the branch curve, and horizontal branch data.

use crate::fiber::{FiberDescriptor, KodairaKind};
use crate::params::FibrationParams;
use crate::resolve::Resolved;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// A singular point of the branch curve, possibly infinitely near.
///
/// `m` is the total multiplicity of the branch curve at the point, vertical
/// components included. `on` lists the vertical curves through the point —
/// fiber component ids, or ids of ancestor nodes (meaning the exceptional
/// curve of that blow-up) — each with the local multiplicity of that curve
/// at the point (1 for a smooth branch, 2 at the node of `I_1` or the cusp
/// of `II`). Children are the singular points on this node's exceptional
/// curve; the exceptional curve itself is incident implicitly with
/// multiplicity 1 and is never listed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestNode {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub m: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub on: Vec<(String, i64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ForestNode>,
}

impl ForestNode {
    pub fn new(m: i64, on: Vec<(&str, i64)>, children: Vec<ForestNode>) -> Self {
        ForestNode {
            id: None,
            m,
            on: on.into_iter().map(|(s, k)| (s.to_string(), k)).collect(),
            children,
        }
    }

    pub fn subtree_size(&self) -> usize {
        1 + self.children.iter().map(|c| c.subtree_size()).sum::<usize>()
    }
}

/// Horizontal branch data over the point of the base curve.
///
/// `branches` lists the ramification indices of the horizontal part of the
/// branch curve over the point (their sum must be `r`); `alpha0_plus`
/// overrides the derived ramification index when branch-level data is
/// unknown.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizontalData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branches: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0_plus: Option<i64>,
}

impl HorizontalData {
    pub fn from_branches(branches: Vec<i64>) -> Self {
        HorizontalData {
            branches: Some(branches),
            alpha0_plus: None,
        }
    }

    pub fn from_alpha0_plus(a: i64) -> Self {
        HorizontalData {
            branches: None,
            alpha0_plus: Some(a),
        }
    }

    /// The ramification-index contribution of the horizontal part.
    pub fn alpha0_plus(&self) -> i64 {
        if let Some(a) = self.alpha0_plus {
            return a;
        }
        self.branches
            .as_ref()
            .map(|b| b.iter().map(|e| e - 1).sum())
            .unwrap_or(0)
    }
}

/// A complete fiber germ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GermSpec {
    pub params: FibrationParams,
    pub fiber: FiberDescriptor,
    /// Ids of the fiber components contained in the branch locus.
    pub in_r: BTreeSet<String>,
    pub forest: Vec<ForestNode>,
    pub horizontal: HorizontalData,
}

/// One violated constraint, with the rule name and the node or curve it
/// concerns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub at: Option<String>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.at {
            Some(at) => write!(f, "{} [{}]: {}", self.rule, at, self.detail),
            None => write!(f, "{}: {}", self.rule, self.detail),
        }
    }
}

/// The result of validating a germ: empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// Checks every structural and paper-derived constraint on a germ and
/// reports all violations. An empty report means the germ is admissible
/// input for index derivation.
pub fn validate_germ(spec: &GermSpec) -> ValidationReport {
    let resolved = Resolved::build(spec);
    ValidationReport {
        violations: resolved.violations,
    }
}

impl GermSpec {
    /// A germ with no singular points, nothing vertical in the branch locus
    /// and unramified horizontal branches: the general fiber.
    pub fn general_fiber(params: FibrationParams) -> Self {
        let kind = if params.h() == 0 {
            KodairaKind::RuledLine
        } else {
            KodairaKind::Smooth
        };
        GermSpec {
            params,
            fiber: FiberDescriptor::standard(kind, 1),
            in_r: BTreeSet::new(),
            forest: Vec::new(),
            horizontal: HorizontalData::default(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.forest.iter().map(|n| n.subtree_size()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::compute_params;

    #[test]
    fn general_fiber_is_valid() {
        let p = compute_params(3, 1, 2).unwrap();
        let g = GermSpec::general_fiber(p);
        assert!(validate_germ(&g).is_valid());
        let p = compute_params(4, 0, 3).unwrap();
        let g = GermSpec::general_fiber(p);
        assert!(validate_germ(&g).is_valid());
    }

    #[test]
    fn invalid_multiplicity_is_reported() {
        // h=1, n=3, smooth fiber, single node m=5: 5 mod 3 = 2.
        let p = compute_params(4, 1, 3).unwrap();
        let mut g = GermSpec::general_fiber(p);
        g.forest = vec![ForestNode::new(5, vec![("c0", 1)], vec![])];
        // keep the horizontal side consistent so only the class violation fires
        g.horizontal = HorizontalData::from_alpha0_plus(0);
        let report = validate_germ(&g);
        assert!(report.has_rule("invalid-multiplicity"), "{report}");
    }

    #[test]
    fn multiplicity_bound_is_reported() {
        // h=0, n=2, g=4 (r=10): node of multiplicity 12 > r/m + 1 = 11,
        // and the h=0 normalization bound r/2 = 5 is also violated.
        let p = compute_params(4, 0, 2).unwrap();
        let mut g = GermSpec::general_fiber(p);
        g.forest = vec![ForestNode::new(12, vec![("c0", 1)], vec![])];
        let report = validate_germ(&g);
        assert!(report.has_rule("multiplicity-exceeds-bound"), "{report}");
        assert!(report.has_rule("h0-normalization"), "{report}");
    }

    #[test]
    fn horizontal_budget_must_match_r() {
        let p = compute_params(3, 1, 2).unwrap(); // r = 4
        let mut g = GermSpec::general_fiber(p);
        g.horizontal = HorizontalData::from_branches(vec![1, 1, 1]);
        let report = validate_germ(&g);
        assert!(report.has_rule("horizontal-degree"), "{report}");
        g.horizontal = HorizontalData::from_branches(vec![2, 1, 1]);
        assert!(validate_germ(&g).is_valid());
    }
}
