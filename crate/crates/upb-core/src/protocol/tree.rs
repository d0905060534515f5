//! The measurement tree for discriminating the 3⊗3⊗4 set.
//!
//! Step 1 is a pair of ancilla-conditioned measurements by Alice and
//! Charlie; only one of the four outcome combinations is spelled out in
//! full, and the other three follow by conjugating with the ancilla bit
//! flips X_a⊗X_{b₁} and X_{b₂}⊗X_c: the complements satisfy
//! M̄₁ = (X_a M₁ X_a) and L̄₁ = (X_c L₁ X_c), while the initial Bell pairs
//! are invariant under flipping both of their halves. Concretely, the
//! generated branches reuse the detailed Steps 2–6 with the ancilla
//! computational conditions flipped, and every generated node is validated
//! like the detailed ones.
//!
//! Multi-candidate leaves are resolved by a bounded search over three
//! validated move families: party support-splits (grouping states whose
//! local supports are orthogonal between groups), ±-basis measurements on
//! single ancilla qubits (which disentangle the consumed Bell pairs, as in
//! the Step-5 sub-measurements), and two-outcome computational-window
//! measurements on a system register. Every adopted move must preserve the
//! orthogonality of the surviving candidates.

use super::ops::{ApplyOp, Ket, OutcomeOperator, PTerm, RegisterFactor};
use super::run::initial_state;
use super::{Party, Register, RegisterLayout};
use crate::constructions::{build_334, StateLabel};
use crate::linalg::{Bipartition, CMatrix, CVector};
use nalgebra::SVD;

const SURVIVAL_TOL: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-9;
const MAX_DISCHARGE_DEPTH: usize = 24;

/// A candidate state flowing down the tree (unnormalized).
#[derive(Debug, Clone)]
pub(super) struct Cand {
    pub label: StateLabel,
    pub vec: CVector,
    pub root_norm_sq: f64,
}

/// Terminal point of the tree.
#[derive(Debug, Clone)]
pub struct Leaf {
    /// Labels that reach this leaf with nonzero probability.
    pub candidates: Vec<StateLabel>,
    /// The identification this leaf announces (singleton candidate).
    pub verdict: Option<StateLabel>,
    /// Set when the leaf could not be resolved to a singleton.
    pub flag: Option<String>,
}

#[derive(Debug, Clone)]
pub enum Child {
    Node(Box<MeasurementNode>),
    Leaf(Leaf),
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: String,
    pub operator: OutcomeOperator,
    pub child: Child,
}

#[derive(Debug, Clone)]
pub struct MeasurementNode {
    pub step: String,
    pub party: Party,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub path: String,
    pub description: String,
    pub in_generated_branch: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolMode {
    /// All four step-1 branches validated.
    Full,
    /// A generated branch failed validation; only the detailed branch is
    /// trustworthy.
    DetailedBranchOnly,
}

#[derive(Debug, Clone)]
pub struct ProtocolTree {
    pub layout: RegisterLayout,
    pub root: MeasurementNode,
    pub(super) universe: Vec<Cand>,
    pub issues: Vec<ValidationIssue>,
    pub mode: ProtocolMode,
}

impl ProtocolTree {
    pub fn input_labels(&self) -> Vec<StateLabel> {
        self.universe.iter().map(|c| c.label.clone()).collect()
    }

    pub(super) fn find_input(&self, label: &StateLabel) -> Option<&Cand> {
        self.universe.iter().find(|c| &c.label == label)
    }
}

fn ket_plus() -> Ket {
    Ket::combo(&[(1.0, 0), (1.0, 1)])
}

fn ket_minus() -> Ket {
    Ket::combo(&[(1.0, 0), (-1.0, 1)])
}

fn factor(reg: Register, kets: Vec<Ket>) -> RegisterFactor {
    RegisterFactor::new(reg, kets)
}

fn term(factors: Vec<RegisterFactor>) -> PTerm {
    PTerm::new(factors)
}

fn bit(value: usize, flip: bool) -> usize {
    if flip {
        1 - value
    } else {
        value
    }
}

struct Builder {
    layout: RegisterLayout,
}

impl Builder {
    fn survivors(&self, states: &[Cand], op: &OutcomeOperator) -> Vec<Cand> {
        states
            .iter()
            .filter_map(|c| {
                let post = op.apply(&c.vec, &self.layout).expect("operator spec is valid");
                if post.norm_squared() > SURVIVAL_TOL * c.root_norm_sq {
                    Some(Cand { label: c.label.clone(), vec: post, root_norm_sq: c.root_norm_sq })
                } else {
                    None
                }
            })
            .collect()
    }

    fn orthogonality_preserved(survivors: &[Cand]) -> bool {
        for (i, a) in survivors.iter().enumerate() {
            for b in &survivors[i + 1..] {
                let overlap = a.vec.dotc(&b.vec).norm();
                if overlap > ORTHO_TOL * a.vec.norm() * b.vec.norm() {
                    return false;
                }
            }
        }
        true
    }

    /// Orthonormal basis of a candidate's support on one party's registers.
    fn support_basis(&self, v: &CVector, party: Party) -> CMatrix {
        let regs = self.layout.registers_of(party);
        let rest: Vec<usize> = (0..7).filter(|p| !regs.contains(p)).collect();
        let cut = Bipartition::new(regs, rest, 7).expect("register cut is valid");
        let w = crate::linalg::matricize(v, self.layout.dims(), &cut).expect("dims match");
        let svd = SVD::new(w, true, false);
        let u = svd.u.expect("SVD with left singular vectors");
        let sigma_max = svd.singular_values.max();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| sigma_max > 0.0 && svd.singular_values[k] > 1e-9 * sigma_max)
            .collect();
        let mut basis = CMatrix::zeros(u.nrows(), keep.len());
        for (dst, &src) in keep.iter().enumerate() {
            basis.set_column(dst, &u.column(src));
        }
        basis
    }

    /// Connected components of "party supports overlap".
    fn support_components(&self, states: &[Cand], party: Party) -> Vec<Vec<usize>> {
        let bases: Vec<CMatrix> = states.iter().map(|c| self.support_basis(&c.vec, party)).collect();
        let n = states.len();
        let overlap = |i: usize, j: usize| {
            if bases[i].ncols() == 0 || bases[j].ncols() == 0 {
                return false;
            }
            let m = bases[i].adjoint() * &bases[j];
            SVD::new(m, false, false).singular_values.max() > 1e-9
        };
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = count;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    if comp[j] == usize::MAX && overlap(i, j) {
                        comp[j] = count;
                        stack.push(j);
                    }
                }
            }
            count += 1;
        }
        let mut groups = vec![Vec::new(); count];
        for (i, &c) in comp.iter().enumerate() {
            groups[c].push(i);
        }
        groups
    }

    /// Projector (on the party's composite space) onto the joint support of
    /// a group of candidates.
    fn group_projector(&self, states: &[Cand], group: &[usize], party: Party) -> CMatrix {
        let m = self.layout.party_dim(party);
        let mut cols: Vec<CVector> = Vec::new();
        for &i in group {
            let basis = self.support_basis(&states[i].vec, party);
            for c in 0..basis.ncols() {
                cols.push(basis.column(c).into_owned());
            }
        }
        let mut stack = CMatrix::zeros(m, cols.len());
        for (k, c) in cols.iter().enumerate() {
            stack.set_column(k, c);
        }
        let svd = SVD::new(stack, true, false);
        let u = svd.u.expect("SVD with left singular vectors");
        let sigma_max = svd.singular_values.max();
        let mut p = CMatrix::zeros(m, m);
        for k in 0..svd.singular_values.len() {
            if svd.singular_values[k] > 1e-9 * sigma_max {
                let col = u.column(k);
                p += col * col.adjoint();
            }
        }
        p
    }

    /// Resolve a multi-candidate leaf by a bounded backtracking search.
    fn discharge(&self, states: Vec<Cand>, used_pm: u8, depth: usize) -> Option<Child> {
        if states.len() <= 1 {
            return Some(Child::Leaf(Leaf {
                candidates: states.iter().map(|c| c.label.clone()).collect(),
                verdict: states.first().map(|c| c.label.clone()),
                flag: None,
            }));
        }
        if depth == 0 {
            return None;
        }

        // family 1: party support-splits
        for party in Party::ALL {
            let groups = self.support_components(&states, party);
            if groups.len() < 2 {
                continue;
            }
            let mut outcomes = Vec::new();
            let mut projectors = Vec::new();
            let mut ok = true;
            for group in &groups {
                let p = self.group_projector(&states, group, party);
                let op = OutcomeOperator::PartyBlock { party, projector: p.clone() };
                let survivors = self.survivors(&states, &op);
                if survivors.len() != group.len() || !Self::orthogonality_preserved(&survivors) {
                    ok = false;
                    break;
                }
                match self.discharge(survivors, 0, depth - 1) {
                    Some(child) => outcomes.push((
                        format!("sift{}", outcomes.len() + 1),
                        op,
                        child,
                    )),
                    None => {
                        ok = false;
                        break;
                    }
                }
                projectors.push(p);
            }
            if !ok {
                continue;
            }
            let residual = OutcomeOperator::PartyBlockComplement { party, projectors };
            if !self.survivors(&states, &residual).is_empty() {
                continue;
            }
            outcomes.push((
                "rest".to_string(),
                residual,
                Child::Leaf(Leaf { candidates: vec![], verdict: None, flag: None }),
            ));
            return Some(Child::Node(Box::new(MeasurementNode {
                step: format!("sift({})", party.name()),
                party,
                outcomes: outcomes
                    .into_iter()
                    .map(|(name, operator, child)| Outcome { name, operator, child })
                    .collect(),
            })));
        }

        // family 2: ± measurement on an ancilla qubit, at most once each
        // along a path; disentangles a consumed Bell pair
        let ancillas = [Register::AncA, Register::AncB1, Register::AncB2, Register::AncC];
        for (bit_index, &reg) in ancillas.iter().enumerate() {
            if used_pm & (1 << bit_index) != 0 {
                continue;
            }
            let plus = OutcomeOperator::Terms(vec![term(vec![factor(reg, vec![ket_plus()])])]);
            let minus = OutcomeOperator::Terms(vec![term(vec![factor(reg, vec![ket_minus()])])]);
            let mut outcomes = Vec::new();
            let mut ok = true;
            for (name, op) in [("+", plus), ("-", minus)] {
                let survivors = self.survivors(&states, &op);
                if !Self::orthogonality_preserved(&survivors) {
                    ok = false;
                    break;
                }
                match self.discharge(survivors, used_pm | (1 << bit_index), depth - 1) {
                    Some(child) => outcomes.push(Outcome { name: name.into(), operator: op, child }),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let party = self.layout.owner(reg);
                return Some(Child::Node(Box::new(MeasurementNode {
                    step: format!("fourier({})", reg.name()),
                    party,
                    outcomes,
                })));
            }
        }

        // family 3: a two-outcome computational window on a system register
        for reg in [Register::A, Register::B, Register::C] {
            let d = self.layout.register_dim(reg);
            for mask in 1u32..(1 << d) - 1 {
                // each {W, W^c} pair once: keep the window containing |0⟩
                if mask & 1 == 0 {
                    continue;
                }
                let kets: Vec<Ket> =
                    (0..d).filter(|k| mask & (1 << k) != 0).map(Ket::basis).collect();
                let window = OutcomeOperator::Terms(vec![term(vec![factor(reg, kets.clone())])]);
                let rest = OutcomeOperator::Complement(vec![term(vec![factor(reg, kets)])]);
                let in_w = self.survivors(&states, &window);
                let out_w = self.survivors(&states, &rest);
                // progress requirement: some candidate must disappear from
                // one side, otherwise the move cannot terminate the search
                if in_w.len() == states.len() && out_w.len() == states.len() {
                    continue;
                }
                if !Self::orthogonality_preserved(&in_w) || !Self::orthogonality_preserved(&out_w) {
                    continue;
                }
                let window_name = format!(
                    "{{{}}}",
                    (0..d).filter(|k| mask & (1 << k) != 0).map(|k| k.to_string()).collect::<Vec<_>>().join(",")
                );
                let (in_child, out_child) = match (
                    self.discharge(in_w, used_pm, depth - 1),
                    self.discharge(out_w, used_pm, depth - 1),
                ) {
                    (Some(a), Some(b)) => (a, b),
                    _ => continue,
                };
                let party = self.layout.owner(reg);
                return Some(Child::Node(Box::new(MeasurementNode {
                    step: format!("window({})", reg.name()),
                    party,
                    outcomes: vec![
                        Outcome { name: window_name.clone(), operator: window, child: in_child },
                        Outcome { name: format!("~{window_name}"), operator: rest, child: out_child },
                    ],
                })));
            }
        }
        None
    }

    fn leaf_or_search(&self, states: Vec<Cand>) -> Child {
        let labels: Vec<StateLabel> = states.iter().map(|c| c.label.clone()).collect();
        match self.discharge(states, 0, MAX_DISCHARGE_DEPTH) {
            Some(child) => child,
            None => Child::Leaf(Leaf {
                candidates: labels,
                verdict: None,
                flag: Some("leaf discrimination search failed".into()),
            }),
        }
    }

    fn make_node(
        &self,
        step: &str,
        party: Party,
        specs: Vec<(String, OutcomeOperator, ChildSpec)>,
        states: &[Cand],
    ) -> MeasurementNode {
        let outcomes = specs
            .into_iter()
            .map(|(name, op, child_spec)| {
                let survivors = self.survivors(states, &op);
                let child = match child_spec {
                    ChildSpec::Leaf => self.leaf_or_search(survivors),
                    ChildSpec::Next(f) => Child::Node(Box::new(f(self, survivors))),
                };
                Outcome { name, operator: op, child }
            })
            .collect();
        MeasurementNode { step: step.into(), party, outcomes }
    }
}

enum ChildSpec {
    Leaf,
    Next(Box<dyn Fn(&Builder, Vec<Cand>) -> MeasurementNode>),
}

fn next(f: impl Fn(&Builder, Vec<Cand>) -> MeasurementNode + 'static) -> ChildSpec {
    ChildSpec::Next(Box::new(f))
}

fn m1_terms() -> Vec<PTerm> {
    vec![
        term(vec![
            factor(Register::A, vec![Ket::basis(0), Ket::basis(1)]),
            factor(Register::AncA, vec![Ket::basis(0)]),
        ]),
        term(vec![
            factor(Register::A, vec![Ket::basis(2)]),
            factor(Register::AncA, vec![Ket::basis(1)]),
        ]),
    ]
}

fn l1_terms() -> Vec<PTerm> {
    vec![
        term(vec![
            factor(Register::C, vec![Ket::basis(1), Ket::basis(2), Ket::basis(3)]),
            factor(Register::AncC, vec![Ket::basis(0)]),
        ]),
        term(vec![
            factor(Register::C, vec![Ket::basis(0)]),
            factor(Register::AncC, vec![Ket::basis(1)]),
        ]),
    ]
}

/// Steps 2–6 for one step-1 branch; `fa`/`fc` flip the ancilla-basis
/// conditions for the M̄₁ / L̄₁ branches.
fn step2_bob(b: &Builder, states: Vec<Cand>, fa: bool, fc: bool) -> MeasurementNode {
    let m21 = term(vec![
        factor(Register::B, vec![Ket::basis(2)]),
        factor(Register::AncB1, vec![Ket::basis(bit(0, fa))]),
        factor(Register::AncB2, vec![Ket::basis(bit(0, fc))]),
    ]);
    let m22 = term(vec![
        factor(Register::B, vec![Ket::combo(&[(1.0, 1), (-1.0, 2)])]),
        factor(Register::AncB1, vec![Ket::basis(bit(0, fa))]),
        factor(Register::AncB2, vec![Ket::basis(bit(1, fc))]),
    ]);
    let m23 = term(vec![
        factor(Register::B, vec![Ket::combo(&[(1.0, 1), (1.0, 2)])]),
        factor(Register::AncB1, vec![Ket::basis(bit(0, fa))]),
        factor(Register::AncB2, vec![Ket::basis(bit(1, fc))]),
    ]);
    let all = vec![m21.clone(), m22.clone(), m23.clone()];
    b.make_node(
        "Step2(Bob)",
        Party::Bob,
        vec![
            (
                "M2,1".into(),
                OutcomeOperator::Terms(vec![m21]),
                next(move |b, s| step2_sub_alice(b, s)),
            ),
            ("M2,2".into(), OutcomeOperator::Terms(vec![m22]), ChildSpec::Leaf),
            ("M2,3".into(), OutcomeOperator::Terms(vec![m23]), ChildSpec::Leaf),
            (
                "M2bar".into(),
                OutcomeOperator::Complement(all),
                next(move |b, s| step3_alice(b, s, fa, fc)),
            ),
        ],
        &states,
    )
}

fn step2_sub_alice(b: &Builder, states: Vec<Cand>) -> MeasurementNode {
    let m211 = term(vec![factor(Register::A, vec![Ket::combo(&[(1.0, 0), (-1.0, 1)])])]);
    b.make_node(
        "Step2.1(Alice)",
        Party::Alice,
        vec![
            ("M2,1,1".into(), OutcomeOperator::Terms(vec![m211.clone()]), ChildSpec::Leaf),
            ("M2,1,1bar".into(), OutcomeOperator::Complement(vec![m211]), ChildSpec::Leaf),
        ],
        &states,
    )
}

fn step3_alice(b: &Builder, states: Vec<Cand>, fa: bool, fc: bool) -> MeasurementNode {
    let m3 = term(vec![factor(Register::A, vec![Ket::basis(0)])]);
    b.make_node(
        "Step3(Alice)",
        Party::Alice,
        vec![
            ("M3".into(), OutcomeOperator::Terms(vec![m3.clone()]), ChildSpec::Leaf),
            (
                "M3bar".into(),
                OutcomeOperator::Complement(vec![m3]),
                next(move |b, s| step4_charlie(b, s, fa, fc)),
            ),
        ],
        &states,
    )
}

fn step4_charlie(b: &Builder, states: Vec<Cand>, fa: bool, fc: bool) -> MeasurementNode {
    let m4 = term(vec![factor(Register::C, vec![Ket::basis(3)])]);
    b.make_node(
        "Step4(Charlie)",
        Party::Charlie,
        vec![
            ("M4".into(), OutcomeOperator::Terms(vec![m4.clone()]), ChildSpec::Leaf),
            (
                "M4bar".into(),
                OutcomeOperator::Complement(vec![m4]),
                next(move |b, s| step5_bob(b, s, fa, fc)),
            ),
        ],
        &states,
    )
}

fn step5_bob(b: &Builder, states: Vec<Cand>, _fa: bool, _fc: bool) -> MeasurementNode {
    let m5 = term(vec![factor(Register::B, vec![Ket::basis(0)])]);
    b.make_node(
        "Step5(Bob)",
        Party::Bob,
        vec![
            (
                "M5".into(),
                OutcomeOperator::Terms(vec![m5.clone()]),
                next(step5_sub_alice),
            ),
            (
                "M5bar".into(),
                OutcomeOperator::Complement(vec![m5]),
                next(step6_alice),
            ),
        ],
        &states,
    )
}

fn step5_sub_alice(b: &Builder, states: Vec<Cand>) -> MeasurementNode {
    // ± projectors are invariant under the ancilla flips
    let plus = term(vec![factor(Register::AncA, vec![ket_plus()])]);
    let minus = term(vec![factor(Register::AncA, vec![ket_minus()])]);
    b.make_node(
        "Step5.1(Alice)",
        Party::Alice,
        vec![
            ("M5,1".into(), OutcomeOperator::Terms(vec![plus]), next(step5_sub_bob)),
            ("M5,1bar".into(), OutcomeOperator::Terms(vec![minus]), next(step5_sub_bob)),
        ],
        &states,
    )
}

fn step5_sub_bob(b: &Builder, states: Vec<Cand>) -> MeasurementNode {
    let plus = term(vec![factor(Register::AncB1, vec![ket_plus()])]);
    let minus = term(vec![factor(Register::AncB1, vec![ket_minus()])]);
    b.make_node(
        "Step5.2(Bob)",
        Party::Bob,
        vec![
            ("M5,2".into(), OutcomeOperator::Terms(vec![plus]), ChildSpec::Leaf),
            ("M5,2bar".into(), OutcomeOperator::Terms(vec![minus]), ChildSpec::Leaf),
        ],
        &states,
    )
}

fn step6_alice(b: &Builder, states: Vec<Cand>) -> MeasurementNode {
    // the A-register condition |2⟩ tracks the a-ancilla condition of M₁:
    // its branch keeps the outer-tile states and the stopper, the
    // complement isolates the core state (plus a stopper residual)
    let m6 = term(vec![factor(Register::A, vec![Ket::basis(2)])]);
    b.make_node(
        "Step6(Alice)",
        Party::Alice,
        vec![
            ("M6".into(), OutcomeOperator::Terms(vec![m6.clone()]), ChildSpec::Leaf),
            ("M6bar".into(), OutcomeOperator::Complement(vec![m6]), ChildSpec::Leaf),
        ],
        &states,
    )
}

fn step1_charlie(b: &Builder, states: Vec<Cand>, fa: bool) -> MeasurementNode {
    b.make_node(
        "Step1(Charlie)",
        Party::Charlie,
        vec![
            (
                "L1".into(),
                OutcomeOperator::Terms(l1_terms()),
                next(move |b, s| step2_bob(b, s, fa, false)),
            ),
            (
                "L1bar".into(),
                OutcomeOperator::Complement(l1_terms()),
                next(move |b, s| step2_bob(b, s, fa, true)),
            ),
        ],
        &states,
    )
}

fn step1_alice(b: &Builder, states: Vec<Cand>) -> MeasurementNode {
    b.make_node(
        "Step1(Alice)",
        Party::Alice,
        vec![
            (
                "M1".into(),
                OutcomeOperator::Terms(m1_terms()),
                next(|b, s| step1_charlie(b, s, false)),
            ),
            (
                "M1bar".into(),
                OutcomeOperator::Complement(m1_terms()),
                next(|b, s| step1_charlie(b, s, true)),
            ),
        ],
        &states,
    )
}

/// Build and validate the full discrimination tree for the 3⊗3⊗4 set.
pub fn build_appendix_d_tree() -> ProtocolTree {
    let layout = RegisterLayout::standard334();
    let set = build_334();
    let universe: Vec<Cand> = set
        .states
        .iter()
        .map(|s| {
            let vec = initial_state(s, &layout).expect("set states have the right dims");
            let root_norm_sq = vec.norm_squared();
            Cand { label: s.label.clone(), vec, root_norm_sq }
        })
        .collect();
    let builder = Builder { layout: layout.clone() };
    let root = step1_alice(&builder, universe.clone());

    let mut issues = Vec::new();
    validate_walk(&builder, &root, &universe, "", &mut issues);
    let mode = if issues.iter().any(|i| i.in_generated_branch) {
        ProtocolMode::DetailedBranchOnly
    } else {
        ProtocolMode::Full
    };
    ProtocolTree { layout, root, universe, issues, mode }
}

/// Outcome operator restricted to its acting party's composite space.
/// Every operator in the tree is k ⊗ 𝕀 with respect to that party's
/// registers, so matrix elements at a fixed rest-register configuration
/// recover k exactly.
fn party_restriction(b: &Builder, op: &OutcomeOperator, party: Party) -> CMatrix {
    let dims = b.layout.dims();
    let regs = b.layout.registers_of(party);
    let reg_dims: Vec<usize> = regs.iter().map(|&r| dims.dim(r)).collect();
    let m: usize = reg_dims.iter().product();
    let full_index = |composite: usize| {
        let mut digits = vec![0usize; 7];
        let mut rem = composite;
        for (&r, &d) in regs.iter().zip(&reg_dims).rev() {
            digits[r] = rem % d;
            rem /= d;
        }
        dims.ravel(&digits)
    };
    let mut k = CMatrix::zeros(m, m);
    for j in 0..m {
        let e = crate::linalg::basis_vector(b.layout.total_dim(), full_index(j));
        let w = op.apply(&e, &b.layout).expect("valid spec");
        for i in 0..m {
            k[(i, j)] = w[full_index(i)];
        }
    }
    k
}

/// Re-check every node of the built tree: POVM completeness at 1e-9 and
/// orthogonality preservation of the surviving candidates per outcome.
fn validate_walk(
    b: &Builder,
    node: &MeasurementNode,
    states: &[Cand],
    path: &str,
    issues: &mut Vec<ValidationIssue>,
) {
    let in_generated = path.contains("M1bar") || path.contains("L1bar");
    let m = b.layout.party_dim(node.party);
    let mut sum = CMatrix::zeros(m, m);
    let mut factor_residual: f64 = 0.0;
    let probe = {
        // fixed pseudo-random probe vector to confirm the k ⊗ 𝕀 form
        let n = b.layout.total_dim();
        CVector::from_fn(n, |i, _| {
            let x = ((i as u64).wrapping_mul(0x9E3779B97F4A7C15) >> 11) as f64;
            crate::linalg::C64::new((x % 1000.0) / 1000.0 - 0.5, ((x / 1000.0) % 1000.0) / 1000.0 - 0.5)
        })
    };
    for o in &node.outcomes {
        let k = party_restriction(b, &o.operator, node.party);
        let lifted = OutcomeOperator::PartyBlock { party: node.party, projector: k.clone() };
        let direct = o.operator.apply(&probe, &b.layout).expect("valid spec");
        let via_restriction = lifted.apply(&probe, &b.layout).expect("valid spec");
        factor_residual = factor_residual.max((direct - via_restriction).norm() / probe.norm());
        sum += k.adjoint() * &k;
    }
    if factor_residual > 1e-9 {
        issues.push(ValidationIssue {
            path: format!("{path}/{}", node.step),
            description: format!("outcome not of the k ⊗ 𝕀 form (residual {factor_residual:.3e})"),
            in_generated_branch: in_generated,
        });
    }
    let completeness = crate::linalg::max_abs(&(sum - CMatrix::identity(m, m)));
    if completeness > 1e-9 {
        issues.push(ValidationIssue {
            path: format!("{path}/{}", node.step),
            description: format!("POVM completeness residual {completeness:.3e}"),
            in_generated_branch: in_generated,
        });
    }
    for o in &node.outcomes {
        let survivors = b.survivors(states, &o.operator);
        if !Builder::orthogonality_preserved(&survivors) {
            issues.push(ValidationIssue {
                path: format!("{path}/{}:{}", node.step, o.name),
                description: "orthogonality not preserved".into(),
                in_generated_branch: in_generated,
            });
        }
        match &o.child {
            Child::Node(next) => {
                validate_walk(b, next, &survivors, &format!("{path}/{}", o.name), issues)
            }
            Child::Leaf(leaf) => {
                let labels: Vec<StateLabel> = survivors.iter().map(|c| c.label.clone()).collect();
                if labels != leaf.candidates {
                    issues.push(ValidationIssue {
                        path: format!("{path}/{}:{}", node.step, o.name),
                        description: "leaf candidate set drifted from construction".into(),
                        in_generated_branch: in_generated,
                    });
                }
                if leaf.verdict.is_none() && !leaf.candidates.is_empty() {
                    issues.push(ValidationIssue {
                        path: format!("{path}/{}:{}", node.step, o.name),
                        description: leaf
                            .flag
                            .clone()
                            .unwrap_or_else(|| "unresolved multi-candidate leaf".into()),
                        in_generated_branch: in_generated,
                    });
                }
            }
        }
    }
}
