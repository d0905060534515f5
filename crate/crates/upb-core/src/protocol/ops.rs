//! Measurement operators in the P[...] notation.
//!
//! P[(|i₁⟩,…)_♠; (|j₁⟩,…)_♣] is the tensor product over the listed
//! registers of Σ|k̂⟩⟨k̂| over the (mutually orthogonal, normalized) kets of
//! each group, with identity on every unlisted register. Operators are
//! applied register by register, so the 576×576 matrices never need to be
//! materialized during a run.

use super::{Party, ProtocolError, Register, RegisterLayout};
use crate::linalg::{CMatrix, CVector, C64};

/// A (possibly superposed) ket of one register, unnormalized amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    pub amplitudes: Vec<(C64, usize)>,
}

impl Ket {
    pub fn basis(k: usize) -> Self {
        Self { amplitudes: vec![(C64::new(1.0, 0.0), k)] }
    }

    /// Real-coefficient combination like |1⟩ − |2⟩.
    pub fn combo(terms: &[(f64, usize)]) -> Self {
        Self { amplitudes: terms.iter().map(|&(a, k)| (C64::new(a, 0.0), k)).collect() }
    }

    fn dense(&self, dim: usize) -> Result<CVector, ProtocolError> {
        let mut v = CVector::zeros(dim);
        for &(amp, k) in &self.amplitudes {
            if k >= dim {
                return Err(ProtocolError::MalformedSpec(format!(
                    "ket index {k} out of range for register dim {dim}"
                )));
            }
            v[k] += amp;
        }
        if v.norm() == 0.0 {
            return Err(ProtocolError::MalformedSpec("zero ket in projector".into()));
        }
        Ok(v)
    }
}

/// One register's factor: the projector onto the span of `kets`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterFactor {
    pub register: Register,
    pub kets: Vec<Ket>,
}

impl RegisterFactor {
    pub fn new(register: Register, kets: Vec<Ket>) -> Self {
        Self { register, kets }
    }

    /// The d×d projector Σ|k̂⟩⟨k̂| for this register.
    fn matrix(&self, layout: &RegisterLayout) -> Result<CMatrix, ProtocolError> {
        let dim = layout.register_dim(self.register);
        let dense: Vec<CVector> = self
            .kets
            .iter()
            .map(|k| k.dense(dim).map(|v| v.normalize()))
            .collect::<Result<_, _>>()?;
        for (i, u) in dense.iter().enumerate() {
            for v in &dense[i + 1..] {
                let overlap = u.dotc(v).norm();
                if overlap > 1e-9 {
                    return Err(ProtocolError::NonOrthogonalKets { overlap });
                }
            }
        }
        let mut p = CMatrix::zeros(dim, dim);
        for v in &dense {
            p += v * v.adjoint();
        }
        Ok(p)
    }
}

/// One P[...] term: a tensor product of register factors, identity elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct PTerm {
    pub factors: Vec<RegisterFactor>,
}

impl PTerm {
    pub fn new(factors: Vec<RegisterFactor>) -> Self {
        Self { factors }
    }

    fn validate(&self, layout: &RegisterLayout) -> Result<Vec<(usize, CMatrix)>, ProtocolError> {
        let mut seen = std::collections::HashSet::new();
        let mut mats = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            if !seen.insert(f.register) {
                return Err(ProtocolError::MalformedSpec(format!(
                    "register {} listed twice in one term",
                    f.register.name()
                )));
            }
            mats.push((f.register.position(), f.matrix(layout)?));
        }
        Ok(mats)
    }
}

/// Apply a d×d operator to one register slot of the composite vector.
fn apply_on_register(v: &CVector, layout: &RegisterLayout, position: usize, m: &CMatrix) -> CVector {
    let dims = layout.dims();
    let d = dims.dim(position);
    let stride: usize = dims.dims()[position + 1..].iter().product();
    let block = d * stride;
    let mut out = CVector::zeros(v.len());
    for base in (0..v.len()).step_by(block) {
        for offset in 0..stride {
            for i in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..d {
                    let mj = m[(i, j)];
                    if mj.norm_sqr() != 0.0 {
                        acc += mj * v[base + j * stride + offset];
                    }
                }
                out[base + i * stride + offset] = acc;
            }
        }
    }
    out
}

/// A node outcome operator, kept in applicable (not materialized) form.
#[derive(Debug, Clone)]
pub enum OutcomeOperator {
    /// Sum of P[...] terms (each a projector on orthogonal sectors).
    Terms(Vec<PTerm>),
    /// Identity minus a sum of P[...] terms.
    Complement(Vec<PTerm>),
    /// Projector acting on one party's composite register space.
    PartyBlock { party: Party, projector: CMatrix },
    /// Identity minus a sum of party-space projectors of the same party.
    PartyBlockComplement { party: Party, projectors: Vec<CMatrix> },
}

/// Anything that can act on a composite register vector.
pub trait ApplyOp {
    fn apply(&self, v: &CVector, layout: &RegisterLayout) -> Result<CVector, ProtocolError>;
}

/// Apply a projector on a party's (possibly non-contiguous) registers.
fn apply_party_block(
    v: &CVector,
    layout: &RegisterLayout,
    party: Party,
    p: &CMatrix,
) -> CVector {
    let dims = layout.dims();
    let regs = layout.registers_of(party);
    let reg_dims: Vec<usize> = regs.iter().map(|&r| dims.dim(r)).collect();
    let mut out = CVector::zeros(v.len());
    for idx in 0..v.len() {
        let digits = dims.unravel(idx);
        let row = regs
            .iter()
            .zip(&reg_dims)
            .fold(0usize, |acc, (&r, &d)| acc * d + digits[r]);
        // out[idx] = Σ_col P[row, col] v[idx with party digits replaced]
        let mut acc = C64::new(0.0, 0.0);
        for col in 0..p.ncols() {
            let entry = p[(row, col)];
            if entry.norm_sqr() == 0.0 {
                continue;
            }
            let mut rem = col;
            let mut digits_j = digits.clone();
            for (&r, &d) in regs.iter().zip(&reg_dims).rev() {
                digits_j[r] = rem % d;
                rem /= d;
            }
            acc += entry * v[dims.ravel(&digits_j)];
        }
        out[idx] = acc;
    }
    out
}

impl ApplyOp for OutcomeOperator {
    fn apply(&self, v: &CVector, layout: &RegisterLayout) -> Result<CVector, ProtocolError> {
        match self {
            OutcomeOperator::Terms(terms) => {
                let mut out = CVector::zeros(v.len());
                for term in terms {
                    let mut w = v.clone();
                    for (pos, m) in term.validate(layout)? {
                        w = apply_on_register(&w, layout, pos, &m);
                    }
                    out += w;
                }
                Ok(out)
            }
            OutcomeOperator::Complement(terms) => {
                let sum = OutcomeOperator::Terms(terms.clone()).apply(v, layout)?;
                Ok(v - sum)
            }
            OutcomeOperator::PartyBlock { party, projector } => {
                Ok(apply_party_block(v, layout, *party, projector))
            }
            OutcomeOperator::PartyBlockComplement { party, projectors } => {
                let mut out = v.clone();
                for p in projectors {
                    out -= apply_party_block(v, layout, *party, p);
                }
                Ok(out)
            }
        }
    }
}

impl OutcomeOperator {
    /// Party whose registers the operator touches.
    pub fn acting_party(&self, layout: &RegisterLayout) -> Option<Party> {
        match self {
            OutcomeOperator::Terms(terms) | OutcomeOperator::Complement(terms) => {
                let mut parties: Vec<Party> = terms
                    .iter()
                    .flat_map(|t| t.factors.iter().map(|f| layout.owner(f.register)))
                    .collect();
                parties.dedup();
                if parties.iter().all(|p| *p == parties[0]) {
                    parties.first().copied()
                } else {
                    None
                }
            }
            OutcomeOperator::PartyBlock { party, .. }
            | OutcomeOperator::PartyBlockComplement { party, .. } => Some(*party),
        }
    }

    /// Materialize the full matrix column by column (tests and small uses).
    pub fn materialize(&self, layout: &RegisterLayout) -> Result<CMatrix, ProtocolError> {
        let n = layout.total_dim();
        let mut m = CMatrix::zeros(n, n);
        for j in 0..n {
            let e = crate::linalg::basis_vector(n, j);
            let col = self.apply(&e, layout)?;
            m.set_column(j, &col);
        }
        Ok(m)
    }
}

/// Full projector matrix of one P[...] term: the spec-level constructor.
pub fn projector_from_spec(term: &PTerm, layout: &RegisterLayout) -> Result<CMatrix, ProtocolError> {
    OutcomeOperator::Terms(vec![term.clone()]).materialize(layout)
}
