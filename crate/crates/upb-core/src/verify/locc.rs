//! Greedy LOCC distinguishability test for orthogonal product states.
//!
//! One party can split the candidate set when its local vectors separate
//! into groups that are mutually orthogonal between groups; measuring the
//! group projectors reveals the group without disturbing any candidate.
//! Recursing until every leaf is a singleton gives a complete protocol.
//! Greedy success is sufficient, not necessary, so failure reports
//! "unknown" rather than "indistinguishable".

use crate::constructions::{ProductState, StateLabel};
use crate::linalg::ToleranceConfig;

/// A nested measurement sketch produced by the greedy search.
#[derive(Debug, Clone, PartialEq)]
pub enum LoccSketch {
    /// One candidate left; the run identifies it.
    Leaf { label: StateLabel },
    /// `party` measures the projectors onto its per-group local spans.
    Split { party: usize, branches: Vec<(Vec<StateLabel>, LoccSketch)> },
}

#[derive(Debug, Clone)]
pub struct LoccResult {
    pub distinguishable: bool,
    /// Present exactly when `distinguishable`.
    pub sketch: Option<LoccSketch>,
}

/// Partition indices into connected components of the relation
/// "local vectors overlap above zero_tol on `party`".
fn overlap_components(
    states: &[&ProductState],
    party: usize,
    tol: &ToleranceConfig,
) -> Vec<Vec<usize>> {
    let n = states.len();
    let mut component = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        component[start] = count;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if component[j] != usize::MAX {
                    continue;
                }
                let u = &states[i].locals[party];
                let v = &states[j].locals[party];
                let overlap = u.dotc(v).norm();
                if overlap > tol.zero_tol * u.norm() * v.norm() {
                    component[j] = count;
                    stack.push(j);
                }
            }
        }
        count += 1;
    }
    let mut groups = vec![Vec::new(); count];
    for (i, &c) in component.iter().enumerate() {
        groups[c].push(i);
    }
    groups
}

fn greedy(states: &[&ProductState], tol: &ToleranceConfig) -> Option<LoccSketch> {
    if states.len() <= 1 {
        return states.first().map(|s| LoccSketch::Leaf { label: s.label.clone() });
    }
    let n_parties = states[0].locals.len();
    for party in 0..n_parties {
        let groups = overlap_components(states, party, tol);
        if groups.len() < 2 {
            continue;
        }
        let mut branches = Vec::with_capacity(groups.len());
        let mut all_ok = true;
        for group in &groups {
            let members: Vec<&ProductState> = group.iter().map(|&i| states[i]).collect();
            let labels: Vec<StateLabel> = members.iter().map(|s| s.label.clone()).collect();
            match greedy(&members, tol) {
                Some(sub) => branches.push((labels, sub)),
                None => {
                    all_ok = false;
                    break;
                }
            }
        }
        if all_ok {
            return Some(LoccSketch::Split { party, branches });
        }
    }
    None
}

/// Decide greedy LOCC distinguishability of pairwise-orthogonal product
/// states; returns the measurement sketch on success.
pub fn greedy_locc_distinguishable(states: &[&ProductState], tol: &ToleranceConfig) -> LoccResult {
    match greedy(states, tol) {
        Some(sketch) => LoccResult { distinguishable: true, sketch: Some(sketch) },
        None => LoccResult { distinguishable: false, sketch: None },
    }
}
