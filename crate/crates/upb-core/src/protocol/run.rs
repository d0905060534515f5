//! Running the discrimination protocol on one input state.

use super::ops::ApplyOp;
use super::tree::{Child, MeasurementNode, ProtocolTree};
use super::{ProtocolError, RegisterLayout};
use crate::constructions::{ProductState, StateLabel};
use crate::linalg::{kron_all, CVector, C64};

/// Embed |ψ⟩_{A,B,C}(|00⟩+|11⟩)_{a,b₁}(|00⟩+|11⟩)_{b₂,c} into the
/// composite register order (A,B,C,a,b₁,b₂,c).
pub fn initial_state(psi: &ProductState, layout: &RegisterLayout) -> Result<CVector, ProtocolError> {
    let expect: Vec<usize> = [super::Register::A, super::Register::B, super::Register::C]
        .iter()
        .map(|r| layout.register_dim(*r))
        .collect();
    if psi.locals.len() != 3 || psi.locals.iter().map(|v| v.len()).collect::<Vec<_>>() != expect {
        return Err(ProtocolError::WrongDims);
    }
    let mut bell = CVector::zeros(4);
    bell[0] = C64::new(1.0, 0.0);
    bell[3] = C64::new(1.0, 0.0);
    // (a,b₁) and (b₂,c) are adjacent in the register order, so the two
    // Bell pairs embed as plain tensor factors
    Ok(kron_all(&[
        psi.locals[0].clone(),
        psi.locals[1].clone(),
        psi.locals[2].clone(),
        bell.clone(),
        bell,
    ]))
}

/// One root-to-leaf path taken with its probability and announced verdict.
#[derive(Debug, Clone)]
pub struct BranchRecord {
    /// (node step, outcome name) pairs along the path.
    pub path: Vec<(String, String)>,
    pub probability: f64,
    pub verdict: Option<StateLabel>,
}

/// Exhaustive expansion of one input through the tree.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub input: StateLabel,
    pub branches: Vec<BranchRecord>,
    /// Sum over all branches; 1 within 1e-9 for a complete tree.
    pub total_probability: f64,
    /// Every reachable leaf announces the input's label.
    pub success: bool,
    /// The input is not one of the tree's candidate states.
    pub unknown_input: bool,
}

impl RunTrace {
    /// Probability-weighted transcript, one line per reachable branch.
    pub fn transcript(&self) -> String {
        let mut lines = vec![format!("input {}", self.input)];
        for b in &self.branches {
            if b.probability <= 1e-9 {
                continue;
            }
            let path: Vec<String> = b.path.iter().map(|(_, o)| o.clone()).collect();
            let verdict = b
                .verdict
                .as_ref()
                .map(|v| v.to_string())
                .unwrap_or_else(|| "(unresolved)".into());
            lines.push(format!("  p={:.6}  {}  =>  {}", b.probability, path.join(" -> "), verdict));
        }
        lines.push(format!(
            "  total probability {:.9}, {}",
            self.total_probability,
            if self.success { "identified correctly on every branch" } else { "FAILED" }
        ));
        lines.join("\n")
    }
}

fn expand(
    layout: &RegisterLayout,
    node: &MeasurementNode,
    state: &CVector,
    root_norm_sq: f64,
    path: &mut Vec<(String, String)>,
    out: &mut Vec<BranchRecord>,
) {
    for outcome in &node.outcomes {
        let post = outcome.operator.apply(state, layout).expect("operators validated at build");
        let p = post.norm_squared() / root_norm_sq;
        path.push((node.step.clone(), outcome.name.clone()));
        match &outcome.child {
            Child::Node(next) => {
                if p > 1e-15 {
                    expand(layout, next, &post, root_norm_sq, path, out);
                } else {
                    // zero-probability subtree: contributes nothing
                    out.push(BranchRecord { path: path.clone(), probability: 0.0, verdict: None });
                }
            }
            Child::Leaf(leaf) => {
                out.push(BranchRecord {
                    path: path.clone(),
                    probability: p,
                    verdict: leaf.verdict.clone(),
                });
            }
        }
        path.pop();
    }
}

/// Simulate the protocol on `psi`, expanding every branch with nonzero
/// outcome probability.
pub fn run_discrimination(tree: &ProtocolTree, psi: &ProductState) -> RunTrace {
    let known = tree.find_input(&psi.label);
    let embedded = initial_state(psi, &tree.layout);
    let consistent = match (&known, &embedded) {
        (Some(cand), Ok(v)) => crate::constructions::full_relative_overlap(&cand.vec, v) > 1.0 - 1e-9,
        _ => false,
    };
    if !consistent {
        return RunTrace {
            input: psi.label.clone(),
            branches: vec![],
            total_probability: 0.0,
            success: false,
            unknown_input: true,
        };
    }
    let v0 = embedded.expect("checked above");
    let root_norm_sq = v0.norm_squared();
    let mut branches = Vec::new();
    expand(&tree.layout, &tree.root, &v0, root_norm_sq, &mut Vec::new(), &mut branches);
    let total_probability: f64 = branches.iter().map(|b| b.probability).sum();
    let success = (total_probability - 1.0).abs() <= 1e-9
        && branches
            .iter()
            .filter(|b| b.probability > 1e-9)
            .all(|b| b.verdict.as_ref() == Some(&psi.label));
    RunTrace { input: psi.label.clone(), branches, total_probability, success, unknown_input: false }
}
