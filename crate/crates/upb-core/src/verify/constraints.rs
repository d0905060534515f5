//! Orthogonality-preservation constraints and the POVM-triviality solver.
//!
//! A joint party performing an orthogonality-preserving POVM element
//! E = M†M must keep all post-measurement states orthogonal. For a product
//! pair that stays non-orthogonal on the spectator side this forces
//! ⟨ψ_meas|E|φ_meas⟩ = 0. Collecting those rows over all pairs gives a
//! linear system on Hermitian E; if its solution space is exactly span{𝕀},
//! the joint party can only measure trivially.

use crate::constructions::{StateLabel, StateSet};
use crate::linalg::{kron_all, Bipartition, CMatrix, CVector, ToleranceConfig, C64};
use nalgebra::DMatrix;

/// One linear functional ⟨bra|E|ket⟩ = 0 with the state pairs it came from.
#[derive(Debug, Clone)]
pub struct ConstraintRow {
    pub bra: CVector,
    pub ket: CVector,
    /// State pairs whose orthogonality generated this row; several pairs can
    /// collapse onto one row when their measuring-side factors coincide.
    pub provenance: Vec<(StateLabel, StateLabel)>,
}

/// The linear system on a Hermitian operator over the measuring side.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub joint_dim: usize,
    /// Party indices of the measuring side, in kron order.
    pub measuring: Vec<usize>,
    /// Party indices of the spectator side.
    pub spectator: Vec<usize>,
    pub cut_label: String,
    pub rows: Vec<ConstraintRow>,
}

/// Extract the constraint system for the measuring side of `cut`
/// (cut.left = spectator, cut.right = measuring side).
///
/// A pair emits a row iff its spectator-side inner product is nonzero
/// relative to `zero_tol`; identical rows are merged, keeping provenance.
pub fn op_constraints(set: &StateSet, cut: &Bipartition, tol: &ToleranceConfig) -> ConstraintSystem {
    let spectator = cut.left().to_vec();
    let measuring = cut.right().to_vec();
    let joint_dim: usize = measuring.iter().map(|&p| set.dims.dim(p)).product();

    let side_vector = |s: &crate::constructions::ProductState, parties: &[usize]| {
        let locals: Vec<CVector> = parties.iter().map(|&p| s.locals[p].clone()).collect();
        kron_all(&locals)
    };

    let mut rows: Vec<ConstraintRow> = Vec::new();
    let mut index: std::collections::HashMap<Vec<u64>, usize> = std::collections::HashMap::new();
    let bits = |v: &CVector| -> Vec<u64> {
        v.iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect()
    };

    for (i, a) in set.states.iter().enumerate() {
        for b in &set.states[i + 1..] {
            let mut overlap = C64::new(1.0, 0.0);
            let mut scale = 1.0;
            for &p in &spectator {
                overlap *= a.locals[p].dotc(&b.locals[p]);
                scale *= a.locals[p].norm() * b.locals[p].norm();
            }
            if overlap.norm() <= tol.zero_tol * scale {
                continue;
            }
            let bra = side_vector(a, &measuring);
            let ket = side_vector(b, &measuring);
            // canonical orientation so (bra,ket) and (ket,bra) merge — they
            // impose the same constraint on a Hermitian operator
            let (kb, kk) = (bits(&bra), bits(&ket));
            let (bra, ket, key) =
                if kb <= kk { (bra, ket, (kb, kk)) } else { (ket, bra, (kk, kb)) };
            let key = [key.0, key.1].concat();
            match index.get(&key) {
                Some(&r) => rows[r].provenance.push((a.label.clone(), b.label.clone())),
                None => {
                    index.insert(key, rows.len());
                    rows.push(ConstraintRow {
                        bra,
                        ket,
                        provenance: vec![(a.label.clone(), b.label.clone())],
                    });
                }
            }
        }
    }

    ConstraintSystem {
        joint_dim,
        measuring,
        spectator,
        cut_label: cut.label(&set.dims),
        rows,
    }
}

/// Real coordinates of Hermitian matrices: D diagonal entries followed by
/// (Re, Im) pairs of the strict upper triangle, row-major.
fn hermitian_dim(d: usize) -> usize {
    d * d
}

fn upper_pairs(d: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in i + 1..d {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Two real equation rows (real and imaginary part of ⟨bra|E|ket⟩ = 0).
fn real_rows(row: &ConstraintRow, d: usize, pairs: &[(usize, usize)]) -> (Vec<f64>, Vec<f64>) {
    let n = hermitian_dim(d);
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for i in 0..d {
        let c = row.bra[i].conj() * row.ket[i];
        re[i] = c.re;
        im[i] = c.im;
    }
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let fwd = row.bra[i].conj() * row.ket[j];
        let bwd = row.bra[j].conj() * row.ket[i];
        let alpha = fwd + bwd;
        let beta = C64::new(0.0, 1.0) * (fwd - bwd);
        re[d + 2 * k] = alpha.re;
        re[d + 2 * k + 1] = beta.re;
        im[d + 2 * k] = alpha.im;
        im[d + 2 * k + 1] = beta.im;
    }
    (re, im)
}

fn unpack_hermitian(x: &nalgebra::DVector<f64>, d: usize, pairs: &[(usize, usize)]) -> CMatrix {
    let mut e = CMatrix::zeros(d, d);
    for i in 0..d {
        e[(i, i)] = C64::new(x[i], 0.0);
    }
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let z = C64::new(x[d + 2 * k], x[d + 2 * k + 1]);
        e[(i, j)] = z;
        e[(j, i)] = z.conj();
    }
    e
}

/// Right-singular directions of a real matrix with σ ≤ rank_tol·σ_max.
/// Reduces tall systems by QR first; pads wide ones so V is complete.
fn real_nullspace(m: &DMatrix<f64>, rank_tol: f64) -> (Vec<nalgebra::DVector<f64>>, f64) {
    let cols = m.ncols();
    let reduced = if m.nrows() > cols {
        m.clone().qr().r()
    } else if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = reduced.svd(false, true);
    let v_t = svd.v_t.expect("SVD with right-singular vectors");
    let sigma_max = svd.singular_values.max();
    let mut basis = Vec::new();
    for (k, row) in v_t.row_iter().enumerate() {
        let sigma = svd.singular_values.get(k).copied().unwrap_or(0.0);
        if sigma_max == 0.0 || sigma <= rank_tol * sigma_max {
            basis.push(row.transpose());
        }
    }
    (basis, sigma_max)
}

/// Certificate for one cut: the Hermitian solution space of the constraint
/// system and whether it is exactly the span of the identity.
#[derive(Debug, Clone)]
pub struct NonlocalityReport {
    pub cut_label: String,
    pub joint_dim: usize,
    pub n_rows: usize,
    /// Real dimension of the Hermitian solution space.
    pub solution_dim: usize,
    pub contains_identity: bool,
    pub identity_residual: f64,
    /// solution_dim == 1 and the normalized identity spans it.
    pub certified_trivial: bool,
    /// Hermitian operators spanning the solution space.
    pub basis: Vec<CMatrix>,
    /// Largest |⟨bra|B|ket⟩| over rows and basis operators, against the
    /// system scale; a sanity bound on the reported space.
    pub max_row_residual: f64,
}

/// Solve the constraint system over Hermitian operators.
///
/// Each complex row contributes its real and imaginary part as equations on
/// the D² real coordinates of E; the solution space is the real nullspace.
pub fn solve_triviality(cs: &ConstraintSystem, tol: &ToleranceConfig) -> NonlocalityReport {
    let d = cs.joint_dim;
    let n = hermitian_dim(d);
    let pairs = upper_pairs(d);

    let (basis_vecs, sigma_max) = if cs.rows.is_empty() {
        // no constraints: the whole Hermitian space
        let mut basis = Vec::with_capacity(n);
        for k in 0..n {
            let mut v = nalgebra::DVector::zeros(n);
            v[k] = 1.0;
            basis.push(v);
        }
        (basis, 0.0)
    } else {
        let mut m = DMatrix::zeros(2 * cs.rows.len(), n);
        for (r, row) in cs.rows.iter().enumerate() {
            let (re, im) = real_rows(row, d, &pairs);
            for c in 0..n {
                m[(2 * r, c)] = re[c];
                m[(2 * r + 1, c)] = im[c];
            }
        }
        real_nullspace(&m, tol.rank_tol)
    };

    // identity in real coordinates: ones on the diagonal block
    let mut id = nalgebra::DVector::zeros(n);
    for i in 0..d {
        id[i] = 1.0;
    }
    id /= id.norm();
    let mut residual = id.clone();
    for b in &basis_vecs {
        let coeff = id.dot(b);
        residual -= b * coeff;
    }
    let identity_residual = residual.norm();
    let contains_identity = identity_residual <= 1e-8;

    let basis: Vec<CMatrix> = basis_vecs.iter().map(|v| unpack_hermitian(v, d, &pairs)).collect();

    let mut max_row_residual = 0.0_f64;
    for b in &basis {
        for row in &cs.rows {
            let val = (row.bra.adjoint() * b * &row.ket)[(0, 0)].norm();
            let scale = row.bra.norm() * row.ket.norm();
            if scale > 0.0 {
                max_row_residual = max_row_residual.max(val / scale);
            }
        }
    }

    let solution_dim = basis.len();
    NonlocalityReport {
        cut_label: cs.cut_label.clone(),
        joint_dim: d,
        n_rows: cs.rows.len(),
        solution_dim,
        contains_identity,
        identity_residual,
        certified_trivial: solution_dim == 1 && contains_identity,
        basis,
        max_row_residual: if sigma_max > 0.0 { max_row_residual } else { 0.0 },
    }
}
