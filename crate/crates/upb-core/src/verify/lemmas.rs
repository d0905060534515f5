//! Checkable forms of the two block lemmas used by the triviality proofs.
//!
//! Both lemmas speak about a PSD operator E = M†M and orthogonal sets
//! spanned by subsets of the computational basis. The verifiers first check
//! every hypothesis and report violations distinctly; only then do they test
//! the conclusion, so a `false` return always means a genuine counterexample
//! to the lemma (i.e. a bug somewhere).

use crate::linalg::{
    eigh, hermiticity_deviation, max_abs, submatrix, CMatrix, CVector, LinalgError,
    ToleranceConfig,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LemmaError {
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn check_psd(e: &CMatrix, tol: &ToleranceConfig) -> Result<(), LemmaError> {
    let scale = max_abs(e).max(1.0);
    if hermiticity_deviation(e) > tol.zero_tol * scale {
        return Err(LemmaError::HypothesisViolation("E is not Hermitian".into()));
    }
    let spectrum = eigh(e, tol)?;
    let min_eig = *spectrum.eigenvalues.last().unwrap_or(&0.0);
    if min_eig < -tol.eig_tol * scale {
        return Err(LemmaError::HypothesisViolation(format!(
            "E is not PSD (min eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(())
}

/// Every vector must be a combination of basis states from `support`.
fn check_spanned_by(
    vectors: &[CVector],
    support: &[usize],
    name: &str,
    tol: &ToleranceConfig,
) -> Result<(), LemmaError> {
    let inside: std::collections::HashSet<usize> = support.iter().copied().collect();
    for (k, v) in vectors.iter().enumerate() {
        let scale = v.norm();
        if scale == 0.0 {
            return Err(LemmaError::HypothesisViolation(format!("{name}[{k}] is zero")));
        }
        for (coord, amp) in v.iter().enumerate() {
            if !inside.contains(&coord) && amp.norm() > tol.zero_tol * scale {
                return Err(LemmaError::HypothesisViolation(format!(
                    "{name}[{k}] has weight outside its support at coordinate {coord}"
                )));
            }
        }
    }
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let ip = vectors[i].dotc(&vectors[j]).norm();
            if ip > tol.zero_tol * vectors[i].norm() * vectors[j].norm() {
                return Err(LemmaError::HypothesisViolation(format!(
                    "{name}[{i}] and {name}[{j}] are not orthogonal"
                )));
            }
        }
    }
    Ok(())
}

fn sandwich(bra: &CVector, e: &CMatrix, ket: &CVector) -> f64 {
    (bra.adjoint() * e * ket)[(0, 0)].norm()
}

/// Block Zeros check: for disjoint basis subsets S, T fully spanned by the
/// orthogonal sets `psis`, `phis`, the hypothesis ⟨ψ_i|E|φ_j⟩ = 0 for all
/// pairs forces the S×T and T×S blocks of E to vanish.
///
/// Returns whether the conclusion holds; hypothesis violations error out.
pub fn block_zeros_verify(
    e: &CMatrix,
    s: &[usize],
    t: &[usize],
    psis: &[CVector],
    phis: &[CVector],
    tol: &ToleranceConfig,
) -> Result<bool, LemmaError> {
    check_psd(e, tol)?;
    if s.is_empty() || t.is_empty() {
        return Err(LemmaError::HypothesisViolation("S and T must be non-empty".into()));
    }
    if s.iter().any(|i| t.contains(i)) {
        return Err(LemmaError::HypothesisViolation("S and T must be disjoint".into()));
    }
    if psis.len() != s.len() || phis.len() != t.len() {
        return Err(LemmaError::HypothesisViolation(
            "spanning sets must have |S| and |T| members".into(),
        ));
    }
    check_spanned_by(psis, s, "psi", tol)?;
    check_spanned_by(phis, t, "phi", tol)?;
    let scale = max_abs(e).max(1.0);
    for (i, psi) in psis.iter().enumerate() {
        for (j, phi) in phis.iter().enumerate() {
            let v = sandwich(psi, e, phi);
            if v > tol.zero_tol * scale * psi.norm() * phi.norm() {
                return Err(LemmaError::HypothesisViolation(format!(
                    "⟨psi[{i}]|E|phi[{j}]⟩ = {v:.3e} is not zero"
                )));
            }
        }
    }

    let threshold = 10.0 * tol.zero_tol * scale;
    let st = submatrix(e, s, t)?;
    let ts = submatrix(e, t, s)?;
    Ok(max_abs(&st) <= threshold && max_abs(&ts) <= threshold)
}

/// Block Trivial check: an orthogonal set spanning S with pairwise-vanishing
/// E-sandwiches, together with one basis state u_t whose E-row vanishes on
/// S∖{u_t} while ⟨u_t|ψ_j⟩ ≠ 0 for every j, forces E_S ∝ 𝕀_S.
pub fn block_trivial_verify(
    e: &CMatrix,
    s: &[usize],
    psis: &[CVector],
    u_t: usize,
    tol: &ToleranceConfig,
) -> Result<bool, LemmaError> {
    check_psd(e, tol)?;
    if s.is_empty() {
        return Err(LemmaError::HypothesisViolation("S must be non-empty".into()));
    }
    if !s.contains(&u_t) {
        return Err(LemmaError::HypothesisViolation(format!("u_t = {u_t} is not in S")));
    }
    if psis.len() != s.len() {
        return Err(LemmaError::HypothesisViolation("need |S| spanning states".into()));
    }
    check_spanned_by(psis, s, "psi", tol)?;
    let scale = max_abs(e).max(1.0);
    for i in 0..psis.len() {
        for j in 0..psis.len() {
            if i == j {
                continue;
            }
            let v = sandwich(&psis[i], e, &psis[j]);
            if v > tol.zero_tol * scale * psis[i].norm() * psis[j].norm() {
                return Err(LemmaError::HypothesisViolation(format!(
                    "⟨psi[{i}]|E|psi[{j}]⟩ = {v:.3e} is not zero"
                )));
            }
        }
    }
    let rest: Vec<usize> = s.iter().copied().filter(|&x| x != u_t).collect();
    if !rest.is_empty() {
        let row = submatrix(e, &[u_t], &rest)?;
        if max_abs(&row) > tol.zero_tol * scale {
            return Err(LemmaError::HypothesisViolation(format!(
                "row u_t of E does not vanish on S∖{{u_t}} (max {:.3e})",
                max_abs(&row)
            )));
        }
    }
    for (j, psi) in psis.iter().enumerate() {
        if psi[u_t].norm() <= tol.zero_tol * psi.norm() {
            return Err(LemmaError::HypothesisViolation(format!(
                "⟨u_t|psi[{j}]⟩ vanishes"
            )));
        }
    }

    let es = submatrix(e, s, s)?;
    let c = es.trace() / crate::linalg::C64::new(s.len() as f64, 0.0);
    let deviation = max_abs(&(&es - CMatrix::identity(s.len(), s.len()) * c));
    Ok(deviation <= 10.0 * tol.zero_tol * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    /// Random orthonormal set spanned by the given coordinates, via QR of a
    /// random square matrix embedded into the support.
    fn random_spanning_set(rng: &mut ChaCha8Rng, dim: usize, support: &[usize]) -> Vec<CVector> {
        let k = support.len();
        let q = random_matrix(rng, k, k).qr().q();
        (0..k)
            .map(|col| {
                let mut v = CVector::zeros(dim);
                for (row, &coord) in support.iter().enumerate() {
                    v[coord] = q[(row, col)];
                }
                v
            })
            .collect()
    }

    fn basis_set(dim: usize, support: &[usize]) -> Vec<CVector> {
        support.iter().map(|&k| crate::linalg::basis_vector(dim, k)).collect()
    }

    /// PSD with a vanishing S×T block: sum of G†G terms whose factors kill
    /// T or S respectively.
    pub(super) fn random_block_zero_psd(
        rng: &mut ChaCha8Rng,
        dim: usize,
        s: &[usize],
        t: &[usize],
    ) -> CMatrix {
        let mut mask = |kill: &[usize]| {
            let mut g = random_matrix(rng, dim, dim);
            for &c in kill {
                for r in 0..dim {
                    g[(r, c)] = C64::new(0.0, 0.0);
                }
            }
            g
        };
        let g1 = mask(t);
        let g2 = mask(s);
        g1.adjoint() * &g1 + g2.adjoint() * &g2
    }

    /// PSD whose S-block is exactly c·I, with nonzero coupling to the rest:
    /// [cI, X; X†, X†X/c + W†W] is PSD by Schur complement.
    pub(super) fn random_block_trivial_psd(
        rng: &mut ChaCha8Rng,
        dim: usize,
        s: &[usize],
    ) -> CMatrix {
        let rest: Vec<usize> = (0..dim).filter(|k| !s.contains(k)).collect();
        let c = rng.gen_range(0.5..2.0);
        let x = random_matrix(rng, s.len(), rest.len()).scale(0.3);
        let w = random_matrix(rng, rest.len(), rest.len());
        let lower = x.adjoint() * &x / C64::new(c, 0.0) + w.adjoint() * &w;
        let mut e = CMatrix::zeros(dim, dim);
        for &i in s {
            e[(i, i)] = C64::new(c, 0.0);
        }
        for (a, &i) in s.iter().enumerate() {
            for (b, &j) in rest.iter().enumerate() {
                e[(i, j)] = x[(a, b)];
                e[(j, i)] = x[(a, b)].conj();
            }
        }
        for (a, &i) in rest.iter().enumerate() {
            for (b, &j) in rest.iter().enumerate() {
                e[(i, j)] = lower[(a, b)];
            }
        }
        e
    }

    #[test]
    fn block_zeros_on_identity_and_planted_coupling() {
        let tol = ToleranceConfig::default();
        let e = CMatrix::identity(6, 6);
        let s = [0usize, 1];
        let t = [3usize, 4];
        let psis = basis_set(6, &s);
        let phis = basis_set(6, &t);
        assert!(block_zeros_verify(&e, &s, &t, &psis, &phis, &tol).unwrap());

        // planted S–T coupling violates the hypothesis and is detected
        let mut bad = CMatrix::identity(6, 6);
        bad[(0, 3)] = C64::new(0.4, 0.0);
        bad[(3, 0)] = C64::new(0.4, 0.0);
        assert!(matches!(
            block_zeros_verify(&bad, &s, &t, &psis, &phis, &tol),
            Err(LemmaError::HypothesisViolation(_))
        ));
    }

    #[test]
    fn block_zeros_holds_on_random_instances() {
        let tol = ToleranceConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let dim = rng.gen_range(4..9);
            let s: Vec<usize> = vec![0, 1];
            let t: Vec<usize> = vec![2, 3];
            let e = random_block_zero_psd(&mut rng, dim, &s, &t);
            let psis = random_spanning_set(&mut rng, dim, &s);
            let phis = random_spanning_set(&mut rng, dim, &t);
            assert!(block_zeros_verify(&e, &s, &t, &psis, &phis, &tol).unwrap());
        }
    }

    #[test]
    fn block_trivial_on_scaled_identity_and_random_instances() {
        let tol = ToleranceConfig::default();
        let s = [1usize, 2, 4];
        let e = CMatrix::identity(6, 6).scale(3.0);
        // Fourier-style spanning set touching every coordinate of S
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let psis = loop {
                let cand = random_spanning_set(&mut rng, 6, &s);
                if cand.iter().all(|v| v[1].norm() > 0.05 * v.norm()) {
                    break cand;
                }
            };
            assert!(block_trivial_verify(&e, &s, &psis, 1, &tol).unwrap());
            let et = random_block_trivial_psd(&mut rng, 7, &s);
            let psis7 = loop {
                let cand = random_spanning_set(&mut rng, 7, &s);
                if cand.iter().all(|v| v[2].norm() > 0.05 * v.norm()) {
                    break cand;
                }
            };
            assert!(block_trivial_verify(&et, &s, &psis7, 2, &tol).unwrap());
        }
    }

    #[test]
    fn block_trivial_detects_broken_hypothesis() {
        let tol = ToleranceConfig::default();
        // diagonal with unequal entries on S: the pairwise sandwich
        // hypothesis fails for Fourier vectors
        let mut e = CMatrix::identity(4, 4);
        e[(0, 0)] = C64::new(2.0, 0.0);
        let s = [0usize, 1];
        let plus = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        let minus = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(
            block_trivial_verify(&e, &s, &[plus, minus], 0, &tol),
            Err(LemmaError::HypothesisViolation(_))
        ));
    }

    #[test]
    fn solved_operator_from_334_satisfies_block_trivial() {
        // E from the certified BC cut is ∝ I; the spanning set of the ℬ₃
        // support window and a cell of 𝒜₁∩ℬ₃ satisfy the hypotheses.
        let tol = ToleranceConfig::default();
        let set = crate::constructions::build_334();
        let cut = crate::linalg::Bipartition::cyclic(0, 3).unwrap();
        let cs = crate::verify::op_constraints(&set, &cut, &tol);
        let report = crate::verify::solve_triviality(&cs, &tol);
        assert!(report.certified_trivial);
        let e = report.basis[0].clone();
        let e = if e[(0, 0)].re < 0.0 { -e } else { e };
        // ℬ₃ occupies B ∈ {0,1} × C ∈ {1,2,3} in the 3×4 joint space
        let s: Vec<usize> = (0..2).flat_map(|b| (1..4).map(move |c| b * 4 + c)).collect();
        let mut psis = Vec::new();
        for i in 0..2 {
            for j in 0..3 {
                let eta = crate::constructions::local_vector(
                    &crate::constructions::LocalVectorFamily::eta(3, 0, i),
                )
                .unwrap();
                let xi = crate::constructions::local_vector(
                    &crate::constructions::LocalVectorFamily::xi(4, 0, j),
                )
                .unwrap();
                psis.push(crate::linalg::kron(&eta, &xi));
            }
        }
        // u_t = |0⟩_B|1⟩_C lies in the 𝒜₁ window where E is already diagonal
        assert!(block_trivial_verify(&e, &s, &psis, 1, &tol).unwrap());
    }
}
