//! Entanglement-assisted LOCC discrimination of the 3⊗3⊗4 set.
//!
//! Alice, Bob and Charlie hold the system registers A(3), B(3), C(4) plus
//! ancillas a(2) [Alice], b₁(2), b₂(2) [Bob], c(2) [Charlie]; the pairs
//! (a,b₁) and (b₂,c) start in unnormalized Bell states, worth one ebit
//! each. The protocol is a finite tree of local projective measurements;
//! every leaf identifies the input state, at a total cost of 2 ebits
//! against the 2·log₂3 of the teleportation baseline.

mod ops;
mod run;
mod tree;

pub use ops::{projector_from_spec, ApplyOp, Ket, OutcomeOperator, PTerm, RegisterFactor};
pub use run::{initial_state, run_discrimination, BranchRecord, RunTrace};
pub use tree::{
    build_appendix_d_tree, Child, Leaf, MeasurementNode, Outcome, ProtocolMode, ProtocolTree,
    ValidationIssue,
};

use crate::linalg::{LinalgError, SystemDims};
use thiserror::Error;

#[cfg(test)]
pub(crate) fn shared_test_tree() -> &'static ProtocolTree {
    use std::sync::OnceLock;
    static TREE: OnceLock<ProtocolTree> = OnceLock::new();
    TREE.get_or_init(build_appendix_d_tree)
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("malformed measurement spec: {0}")]
    MalformedSpec(String),
    #[error("kets inside one projector group are not orthogonal (overlap {overlap:.3e})")]
    NonOrthogonalKets { overlap: f64 },
    #[error("state has wrong dimensions for the 3⊗3⊗4 scenario")]
    WrongDims,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Owner of a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
    Charlie,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::Alice, Party::Bob, Party::Charlie];

    pub fn name(&self) -> &'static str {
        match self {
            Party::Alice => "Alice",
            Party::Bob => "Bob",
            Party::Charlie => "Charlie",
        }
    }
}

/// The seven registers, in the fixed composite (row-major) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Register {
    A,
    B,
    C,
    AncA,
    AncB1,
    AncB2,
    AncC,
}

impl Register {
    pub const ALL: [Register; 7] = [
        Register::A,
        Register::B,
        Register::C,
        Register::AncA,
        Register::AncB1,
        Register::AncB2,
        Register::AncC,
    ];

    pub fn position(&self) -> usize {
        match self {
            Register::A => 0,
            Register::B => 1,
            Register::C => 2,
            Register::AncA => 3,
            Register::AncB1 => 4,
            Register::AncB2 => 5,
            Register::AncC => 6,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Register::A => "A",
            Register::B => "B",
            Register::C => "C",
            Register::AncA => "a",
            Register::AncB1 => "b1",
            Register::AncB2 => "b2",
            Register::AncC => "c",
        }
    }
}

/// Register ordering, dimensions and ownership for the fixed scenario:
/// (A, B, C, a, b₁, b₂, c) with dims (3, 3, 4, 2, 2, 2, 2).
#[derive(Debug, Clone)]
pub struct RegisterLayout {
    dims: SystemDims,
}

impl Default for RegisterLayout {
    fn default() -> Self {
        Self::standard334()
    }
}

impl RegisterLayout {
    pub fn standard334() -> Self {
        let dims = SystemDims::new(vec![3, 3, 4, 2, 2, 2, 2]).expect("static register dims");
        Self { dims }
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.total_dim()
    }

    pub fn register_dim(&self, reg: Register) -> usize {
        self.dims.dim(reg.position())
    }

    pub fn owner(&self, reg: Register) -> Party {
        match reg {
            Register::A | Register::AncA => Party::Alice,
            Register::B | Register::AncB1 | Register::AncB2 => Party::Bob,
            Register::C | Register::AncC => Party::Charlie,
        }
    }

    /// Register positions owned by a party, in composite order.
    pub fn registers_of(&self, party: Party) -> Vec<usize> {
        Register::ALL
            .iter()
            .filter(|r| self.owner(**r) == party)
            .map(|r| r.position())
            .collect()
    }

    /// Composite dimension of a party's registers.
    pub fn party_dim(&self, party: Party) -> usize {
        self.registers_of(party).iter().map(|&p| self.dims.dim(p)).product()
    }
}

/// One entry of the entanglement resource configuration: `count` copies of
/// the maximally entangled state of local dimension `dim` between a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceEntry {
    pub parties: (Party, Party),
    pub count: u32,
    pub dim: u32,
}

/// Resource configuration {(p, d₁)_{A,B}, (q, d₂)_{A,C}, (r, d₃)_{B,C}}.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceLedger {
    pub entries: Vec<ResourceEntry>,
}

impl ResourceLedger {
    /// Total cost p·log₂d₁ + q·log₂d₂ + r·log₂d₃ in ebits.
    pub fn ebits(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.count > 0)
            .map(|e| e.count as f64 * (e.dim as f64).log2())
            .sum()
    }

    /// What the tree below actually consumes: one two-qubit pair between
    /// Alice–Bob and one between Bob–Charlie. Exactly 2 ebits.
    pub fn protocol_cost() -> Self {
        Self {
            entries: vec![
                ResourceEntry { parties: (Party::Alice, Party::Bob), count: 1, dim: 2 },
                ResourceEntry { parties: (Party::Alice, Party::Charlie), count: 0, dim: 1 },
                ResourceEntry { parties: (Party::Bob, Party::Charlie), count: 1, dim: 2 },
            ],
        }
    }

    /// Teleporting the two 3-dimensional subsystems instead: 2·log₂3 ebits.
    pub fn teleportation_baseline() -> Self {
        Self {
            entries: vec![
                ResourceEntry { parties: (Party::Alice, Party::Bob), count: 1, dim: 3 },
                ResourceEntry { parties: (Party::Alice, Party::Charlie), count: 0, dim: 1 },
                ResourceEntry { parties: (Party::Bob, Party::Charlie), count: 1, dim: 3 },
            ],
        }
    }
}

/// Evaluate the cost formula of a configuration.
pub fn resource_cost(ledger: &ResourceLedger) -> f64 {
    ledger.ebits()
}
