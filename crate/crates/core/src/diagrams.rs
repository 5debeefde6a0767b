//! Singularity diagrams: the bookkeeping tables of multiplicity towers
//! over the intersection points of a curve with the rest of the branch
//! locus, their validation, enumeration and chaining.

use crate::blowup::BlowupError;
use crate::enumerate::EnumError;
use crate::germ::{GermSpec, ValidationReport, Violation};
use crate::resolve::Resolved;
use serde::Serialize;

/// A singularity diagram: one column of multiplicities (bottom-up) per
/// intersection point, columns ordered by non-increasing height.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SingularityDiagram {
    pub n: i64,
    /// 0 when the curve is not in the branch locus, 1 when it is.
    pub dtype: u8,
    /// `R'C` for curves in the branch locus, the contracted-point
    /// multiplicity for exceptional curves, the branch degree for fibers.
    pub t: i64,
    /// Bottom-up multiplicity towers.
    pub columns: Vec<Vec<i64>>,
}

impl SingularityDiagram {
    pub fn new(n: i64, dtype: u8, t: i64, mut columns: Vec<Vec<i64>>) -> Self {
        sort_columns(&mut columns);
        SingularityDiagram {
            n,
            dtype,
            t,
            columns,
        }
    }

    /// Total number of blow-ups `c`.
    pub fn c(&self) -> i64 {
        self.columns.iter().map(|c| c.len() as i64).sum()
    }

    pub fn d_sum(&self) -> i64 {
        let n = self.n;
        self.columns
            .iter()
            .flat_map(|c| c.iter())
            .map(|m| m / n)
            .sum()
    }

    /// Header marks: `None` for columns of maximal height, `Some(i_max -
    /// i_bm)` for the shorter ones.
    pub fn header_marks(&self) -> Vec<Option<i64>> {
        let i_max = self.columns.iter().map(|c| c.len() as i64).max().unwrap_or(0);
        self.columns
            .iter()
            .map(|c| {
                let h = c.len() as i64;
                if h < i_max {
                    Some(i_max - h)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Entries that force a follow-up diagram: class nZ+1 with a class-nZ
    /// predecessor (or none). Returns `(column, row, multiplicity,
    /// required bottom entry of the successor)`.
    pub fn triggers(&self) -> Vec<(usize, usize, i64, i64)> {
        let n = self.n;
        let mut out = Vec::new();
        for (ci, col) in self.columns.iter().enumerate() {
            for (j, &m) in col.iter().enumerate() {
                if m % n != 1 {
                    continue;
                }
                if j > 0 && col[j - 1] % n != 0 {
                    continue;
                }
                if let Some(&above) = col.get(j + 1) {
                    out.push((ci, j, m, above));
                }
                // a trigger at the top of a column cannot occur in a valid
                // diagram (tops are of class nZ)
            }
        }
        out
    }

    /// Plain-text rendering mirroring the paper's table layout.
    pub fn render(&self) -> String {
        if self.columns.is_empty() {
            return format!("(empty diagram, type {}, t = {})\n", self.dtype, self.t);
        }
        let widths: Vec<usize> = self
            .columns
            .iter()
            .map(|c| c.iter().map(|m| m.to_string().len()).max().unwrap_or(1).max(1) + 2)
            .collect();
        let i_max = self.columns.iter().map(|c| c.len()).max().unwrap_or(0);
        let marks = self.header_marks();
        let mut lines: Vec<String> = Vec::new();
        // header line with the # marks
        let mut header = String::new();
        for (ci, w) in widths.iter().enumerate() {
            let mark = match marks[ci] {
                Some(k) => format!("#{k}"),
                None => String::new(),
            };
            header.push_str(&format!(" {mark:^w$} ", w = w));
        }
        lines.push(header.trim_end().to_string());
        for level in (0..i_max).rev() {
            let mut top = String::new();
            let mut mid = String::new();
            for (ci, col) in self.columns.iter().enumerate() {
                let w = widths[ci];
                if col.len() > level {
                    top.push_str(&format!("+{}+", "-".repeat(w)));
                    mid.push_str(&format!("|{:^w$}|", col[level], w = w));
                } else {
                    top.push_str(&" ".repeat(w + 2));
                    mid.push_str(&" ".repeat(w + 2));
                }
            }
            lines.push(top.trim_end().to_string());
            lines.push(mid.trim_end().to_string());
        }
        let mut bottom = String::new();
        for w in &widths {
            bottom.push_str(&format!("+{}+", "-".repeat(*w)));
        }
        lines.push(bottom);
        lines.push(format!("type {}  t = {}  c = {}", self.dtype, self.t, self.c()));
        lines.join("\n") + "\n"
    }
}

fn sort_columns(columns: &mut [Vec<i64>]) {
    columns.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| b.cmp(a)));
}

/// A sequence of singularity diagrams associated with one family of
/// vertical branch curves, with parent links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagramSequence {
    pub diagrams: Vec<SingularityDiagram>,
    /// For each diagram after the first: `(earlier diagram index, column,
    /// row)` of the entry whose blow-up created the curve.
    pub links: Vec<Option<(usize, usize, usize)>>,
}

impl DiagramSequence {
    pub fn len(&self) -> usize {
        self.diagrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagrams.is_empty()
    }
}

/// Checks a diagram against the multiplicity-tower constraints.
pub fn validate_diagram(d: &SingularityDiagram) -> ValidationReport {
    let mut violations = Vec::new();
    let mut fail = |rule: &'static str, detail: String| {
        violations.push(Violation {
            rule,
            at: None,
            detail,
        })
    };
    let n = d.n;
    if n < 2 {
        fail("invalid-parameter", format!("n = {n}"));
        return ValidationReport { violations };
    }
    if d.dtype > 1 {
        fail("invalid-parameter", format!("dtype = {}", d.dtype));
    }
    let mut heights_ok = true;
    for w in d.columns.windows(2) {
        if w[1].len() > w[0].len() {
            heights_ok = false;
        }
    }
    if !heights_ok {
        fail("column-order", "columns must have non-increasing heights".into());
    }
    for (ci, col) in d.columns.iter().enumerate() {
        if col.is_empty() {
            fail("column-empty", format!("column {ci} has no entries"));
            continue;
        }
        for &m in col {
            if m < 2 || (m % n != 0 && m % n != 1) {
                fail(
                    "invalid-multiplicity",
                    format!("entry {m} in column {ci} is not classifiable mod {n}"),
                );
            }
        }
        let top = *col.last().unwrap();
        if top % n != 0 {
            fail(
                "column-top",
                format!("column {ci} ends at {top}, not a multiple of {n}"),
            );
        }
        for j in 1..col.len() {
            let (prev, cur) = (col[j - 1], col[j]);
            if n >= 3 {
                if cur > prev {
                    fail(
                        "column-monotonicity",
                        format!("column {ci}: {cur} above {prev} increases"),
                    );
                }
            } else {
                if cur > prev + 1 {
                    fail(
                        "column-monotonicity",
                        format!("column {ci}: {cur} above {prev} jumps by more than one"),
                    );
                } else if cur == prev + 1 {
                    let prev_even_ok = j < 2 || col[j - 2] % 2 == 0;
                    if prev % 2 == 0 || !prev_even_ok {
                        fail(
                            "column-monotonicity",
                            format!("column {ci}: jump to {cur} needs an odd {prev} over an even entry"),
                        );
                    }
                }
            }
            // strict drop after an nZ+1 -> nZ step
            if j + 1 < col.len() && prev % n == 1 && cur % n == 0 && col[j + 1] >= cur {
                fail(
                    "column-monotonicity",
                    format!(
                        "column {ci}: {} does not drop strictly below {cur} after an nZ+1 -> nZ step",
                        col[j + 1]
                    ),
                );
            }
        }
    }
    // bottom row budget against t
    let bottom: i64 = d
        .columns
        .iter()
        .filter_map(|c| c.first())
        .map(|&m| m - d.dtype as i64)
        .sum();
    if bottom > d.t {
        fail(
            "bottom-row-budget",
            format!("bottom-row multiplicities consume {bottom} > t = {}", d.t),
        );
    }
    // Lemma (t + c)/n = sum d for curves in the branch locus; for the
    // others the difference counts residual transverse crossings.
    let d_sum = d.d_sum();
    if d.dtype == 1 {
        if d.t + d.c() != n * d_sum {
            fail(
                "lemma-1.10",
                format!("(t + c)/n = ({} + {})/{n} != sum d = {d_sum}", d.t, d.c()),
            );
        }
    } else if d.t - n * d_sum < 0 {
        fail(
            "lemma-1.10",
            format!("t - n sum d = {} - {} is negative", d.t, n * d_sum),
        );
    }
    ValidationReport { violations }
}

/// All admissible columns of the given height with a prescribed `d` total.
fn columns_with(
    n: i64,
    height: usize,
    max_mult: i64,
    out: &mut Vec<Vec<i64>>,
    col: &mut Vec<i64>,
) {
    if col.len() == height {
        if col.last().map(|&m| m % n == 0).unwrap_or(false) {
            out.push(col.clone());
        }
        return;
    }
    let candidates: Vec<i64> = (2..=max_mult)
        .filter(|m| m % n == 0 || m % n == 1)
        .collect();
    for m in candidates {
        if let Some(&prev) = col.last() {
            if n >= 3 && m > prev {
                continue;
            }
            if n == 2 {
                if m > prev + 1 {
                    continue;
                }
                if m == prev + 1 {
                    let prev_even_ok = col.len() < 2 || col[col.len() - 2] % 2 == 0;
                    if prev % 2 == 0 || !prev_even_ok {
                        continue;
                    }
                }
            }
            if col.len() >= 2 {
                let pp = col[col.len() - 2];
                if pp % n == 1 && prev % n == 0 && m >= prev {
                    continue;
                }
            }
        }
        col.push(m);
        columns_with(n, height, max_mult, out, col);
        col.pop();
    }
}

/// Enumerates every diagram passing `validate_diagram` within the caps,
/// canonically ordered and deduplicated up to column permutation.
///
/// `max_depth` caps the total number of blow-ups `c`.
pub fn enumerate_diagrams(
    n: i64,
    dtype: u8,
    t: i64,
    max_depth: i64,
    max_mult: i64,
) -> Result<Vec<SingularityDiagram>, EnumError> {
    const GUARD: usize = 200_000;
    let mut results = Vec::new();
    for c in 1..=max_depth {
        if dtype == 1 && (t + c) % n != 0 {
            continue;
        }
        // all single columns by height, reused across partitions
        let mut cols_by_height: Vec<Vec<Vec<i64>>> = vec![Vec::new()];
        for h in 1..=c as usize {
            let mut cols = Vec::new();
            columns_with(n, h, max_mult, &mut cols, &mut Vec::new());
            cols.sort_by(|a, b| b.cmp(a));
            cols_by_height.push(cols);
        }
        // assemble non-increasing column lists with total height c
        fn assemble(
            remaining: i64,
            max_col: &Vec<i64>,
            cols_by_height: &[Vec<Vec<i64>>],
            cur: &mut Vec<Vec<i64>>,
            out: &mut Vec<Vec<Vec<i64>>>,
            guard: usize,
        ) -> Result<(), EnumError> {
            if out.len() > guard {
                return Err(EnumError::CapTooLarge(format!(
                    "more than {guard} diagrams; tighten the caps"
                )));
            }
            if remaining == 0 {
                out.push(cur.clone());
                return Ok(());
            }
            let max_h = (max_col.len() as i64).min(remaining);
            for h in (1..=max_h).rev() {
                for col in &cols_by_height[h as usize] {
                    if h as usize == max_col.len() && col > max_col {
                        continue;
                    }
                    cur.push(col.clone());
                    assemble(remaining - h, col, cols_by_height, cur, out, guard)?;
                    cur.pop();
                }
            }
            Ok(())
        }
        let mut lists = Vec::new();
        let start = vec![i64::MAX; c as usize];
        assemble(c, &start, &cols_by_height, &mut Vec::new(), &mut lists, GUARD)?;
        for columns in lists {
            let d = SingularityDiagram::new(n, dtype, t, columns);
            if validate_diagram(&d).is_valid() {
                results.push(d);
            }
        }
        if results.len() > GUARD {
            return Err(EnumError::CapTooLarge(format!(
                "more than {GUARD} diagrams; tighten the caps"
            )));
        }
    }
    results.sort();
    results.dedup();
    Ok(results)
}

/// Builds every chaining-consistent sequence of diagrams starting from the
/// given ones: each class-nZ+1 entry over a class-nZ entry (or at the
/// bottom) spawns a follow-up diagram whose bottom row contains the entry
/// above it.
pub fn chain_sequences(
    starts: &[SingularityDiagram],
    n: i64,
    max_len: usize,
    max_depth: i64,
    max_mult: i64,
) -> Result<Vec<DiagramSequence>, EnumError> {
    const GUARD: usize = 100_000;
    let mut out = Vec::new();
    for start in starts {
        let mut seq = DiagramSequence {
            diagrams: vec![start.clone()],
            links: vec![None],
        };
        // obligations: (diagram index, column, row, t', required bottom entry)
        let initial: Vec<(usize, usize, usize, i64, i64)> = start
            .triggers()
            .into_iter()
            .map(|(c, j, m, above)| (0, c, j, m, above))
            .collect();
        extend(
            &mut seq,
            initial,
            n,
            max_len,
            max_depth,
            max_mult,
            &mut out,
            GUARD,
        )?;
    }
    out.sort_by(|a, b| a.diagrams.cmp(&b.diagrams));
    out.dedup();
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn extend(
    seq: &mut DiagramSequence,
    mut obligations: Vec<(usize, usize, usize, i64, i64)>,
    n: i64,
    max_len: usize,
    max_depth: i64,
    max_mult: i64,
    out: &mut Vec<DiagramSequence>,
    guard: usize,
) -> Result<(), EnumError> {
    if out.len() > guard {
        return Err(EnumError::CapTooLarge(format!(
            "more than {guard} sequences; tighten the caps"
        )));
    }
    if obligations.is_empty() {
        out.push(seq.clone());
        return Ok(());
    }
    if seq.diagrams.len() >= max_len {
        return Ok(()); // incomplete within the cap; dropped
    }
    let (src, col, row, t_next, required) = obligations.remove(0);
    for cand in enumerate_diagrams(n, 1, t_next, max_depth, max_mult)? {
        if !cand
            .columns
            .iter()
            .filter_map(|c| c.first())
            .any(|&m| m == required)
        {
            continue;
        }
        let idx = seq.diagrams.len();
        seq.diagrams.push(cand.clone());
        seq.links.push(Some((src, col, row)));
        let mut next = obligations.clone();
        next.extend(
            cand.triggers()
                .into_iter()
                .map(|(c, j, m, above)| (idx, c, j, m, above)),
        );
        extend(seq, next, n, max_len, max_depth, max_mult, out, guard)?;
        seq.diagrams.pop();
        seq.links.pop();
    }
    Ok(())
}

/// Reads the singularity diagram of a vertical curve off the forest.
pub fn diagram_of_curve(spec: &GermSpec, curve: &str) -> Result<SingularityDiagram, BlowupError> {
    let resolved = Resolved::build(spec);
    if !resolved.violations.is_empty() {
        return Err(BlowupError::InvalidGerm(ValidationReport {
            violations: resolved.violations,
        }));
    }
    let n = spec.params.n();
    let Some(ci) = resolved.curves.iter().position(|c| c.label == curve) else {
        return Err(BlowupError::InconsistentForest {
            identity: "unknown-curve",
            detail: format!("no curve {curve:?} in this germ"),
        });
    };
    let c = &resolved.curves[ci];

    // level-1 points of the curve
    let level1: Vec<usize> = if let Some(origin) = c.origin_node {
        resolved.nodes[origin].children.clone()
    } else {
        resolved
            .roots
            .iter()
            .copied()
            .filter(|&ni| resolved.nodes[ni].incident.iter().any(|&(cc, _)| cc == ci))
            .collect()
    };
    let mut columns = Vec::new();
    let mut starts = level1;
    let mut seen = std::collections::BTreeSet::new();
    while let Some(start) = starts.first().copied() {
        starts.remove(0);
        if !seen.insert(start) {
            continue;
        }
        let mut col = Vec::new();
        let mut cur = start;
        loop {
            col.push(resolved.nodes[cur].m);
            let successors: Vec<usize> = resolved.nodes[cur]
                .children
                .iter()
                .copied()
                .filter(|&ch| resolved.nodes[ch].incident.iter().any(|&(cc, _)| cc == ci))
                .collect();
            match successors.split_first() {
                None => break,
                Some((&first, rest)) => {
                    // a nodal split continues one branch in this column and
                    // opens new columns for the rest
                    starts.extend(rest.iter().copied());
                    cur = first;
                }
            }
        }
        columns.push(col);
    }

    let ledger = crate::blowup::curve_ledger(spec)?;
    let rec = ledger.get(curve).expect("curve present");
    let diagram = SingularityDiagram::new(n, u8::from(c.in_r), rec.t, columns);
    if !c.singular {
        let report = validate_diagram(&diagram);
        if !report.is_valid() {
            return Err(BlowupError::InconsistentForest {
                identity: "diagram",
                detail: format!("diagram of {curve:?} is invalid: {report}"),
            });
        }
    }
    Ok(diagram)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_single_blowup_n2() {
        // contracted (-1)-curve at an odd point, one blow-up: entry m + 1
        let d = SingularityDiagram::new(2, 1, 3, vec![vec![4]]);
        assert!(validate_diagram(&d).is_valid());
        let shapes = enumerate_diagrams(2, 1, 3, 1, 9).unwrap();
        assert_eq!(shapes, vec![d]);
    }

    #[test]
    fn example_three_shapes_n3() {
        let shapes = enumerate_diagrams(3, 1, 4, 2, 7).unwrap();
        assert_eq!(shapes.len(), 3, "{shapes:?}");
        assert!(shapes.contains(&SingularityDiagram::new(3, 1, 4, vec![vec![3], vec![3]])));
        assert!(shapes.contains(&SingularityDiagram::new(3, 1, 4, vec![vec![3, 3]])));
        assert!(shapes.contains(&SingularityDiagram::new(3, 1, 4, vec![vec![4, 3]])));
    }

    #[test]
    fn monotonicity_violation_reported() {
        let d = SingularityDiagram {
            n: 3,
            dtype: 1,
            t: 8,
            columns: vec![vec![6, 7]],
        };
        let report = validate_diagram(&d);
        assert!(report.has_rule("column-monotonicity"), "{report}");
    }

    #[test]
    fn chains_end_after_shape_iii_for_n3() {
        let start = enumerate_diagrams(3, 1, 4, 2, 7).unwrap();
        let iii = SingularityDiagram::new(3, 1, 4, vec![vec![4, 3]]);
        let seqs = chain_sequences(&[iii], 3, 5, 2, 7).unwrap();
        assert!(!seqs.is_empty());
        assert!(seqs.iter().all(|s| s.len() == 2), "{seqs:?}");
        // shapes (i) and (ii) do not continue
        let i_shape = SingularityDiagram::new(3, 1, 4, vec![vec![3], vec![3]]);
        let seqs = chain_sequences(&[i_shape], 3, 5, 2, 7).unwrap();
        assert!(seqs.iter().all(|s| s.len() == 1));
        let _ = start;
    }

    #[test]
    fn n2_start_has_no_continuation() {
        let d = SingularityDiagram::new(2, 1, 3, vec![vec![4]]);
        let seqs = chain_sequences(&[d], 2, 4, 1, 9).unwrap();
        assert_eq!(seqs.len(), 1);
        assert_eq!(seqs[0].len(), 1);
    }

    #[test]
    fn render_is_stable() {
        let d = SingularityDiagram::new(3, 1, 4, vec![vec![4, 3]]);
        let text = d.render();
        assert!(text.contains("| 3 |"));
        assert!(text.contains("| 4 |"));
        assert!(text.contains("type 1"));
    }
}
