//! PPT entangled states built from UPB complements.
//!
//! For an orthogonal product set of size m < prod(dims), the normalized
//! projector complement ρ = (𝕀 − Π)/k with k = prod(dims) − m is a density
//! matrix of rank k. When the set is a UPB its range contains no product
//! state, so ρ is entangled; at the same time every single-party partial
//! transpose is again a projector complement, hence PSD. The report keeps
//! the proved PPT property separate from the evidence-backed entanglement
//! claim (a seesaw search over the range).

use crate::constructions::StateSet;
use crate::linalg::{
    eigh, hermiticity_deviation, max_abs, partial_transpose, CMatrix, SystemDims,
    ToleranceConfig, C64,
};
use crate::verify::{
    complement_projector, seesaw_product_overlap, SeesawConfig, SeesawResult, VerifyError,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EntanglementError {
    #[error("the set is a complete basis; the complement state is empty")]
    CompleteBasis,
    #[error("matrix is not a density matrix: {0}")]
    NotDensity(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}

/// A trace-one PSD operator over the composite space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub matrix: CMatrix,
    pub dims: SystemDims,
}

impl DensityMatrix {
    pub fn new(
        matrix: CMatrix,
        dims: SystemDims,
        tol: &ToleranceConfig,
    ) -> Result<Self, EntanglementError> {
        let n = dims.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(EntanglementError::NotDensity(format!(
                "shape {}x{} vs system dim {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = max_abs(&matrix).max(1.0);
        if hermiticity_deviation(&matrix) > tol.zero_tol * scale {
            return Err(EntanglementError::NotDensity("not Hermitian".into()));
        }
        let trace = matrix.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(EntanglementError::NotDensity(format!("trace {trace} != 1")));
        }
        let spectrum = eigh(&matrix, tol)?;
        let min_eig = *spectrum.eigenvalues.last().unwrap_or(&0.0);
        if min_eig < -tol.eig_tol {
            return Err(EntanglementError::NotDensity(format!(
                "min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { matrix, dims })
    }
}

/// ρ = (𝕀 − Π)/k for the projector Π onto the span of the set.
pub fn upb_to_state(
    set: &StateSet,
    tol: &ToleranceConfig,
) -> Result<DensityMatrix, EntanglementError> {
    let k = set.dims.total_dim() as i64 - set.len() as i64;
    if k <= 0 {
        return Err(EntanglementError::CompleteBasis);
    }
    let p = complement_projector(set, tol)?;
    let rho = p / C64::new(k as f64, 0.0);
    DensityMatrix::new(rho, set.dims.clone(), tol)
}

/// Spectral, partial-transpose and range analysis of a density matrix.
#[derive(Debug, Clone)]
pub struct PptReport {
    /// Minimum eigenvalue of the partial transpose, per party.
    pub min_transpose_eigenvalues: Vec<f64>,
    /// All partial transposes PSD within eig_tol.
    pub ppt: bool,
    pub rank: usize,
    /// Seesaw evidence on the range projector: an overlap near 1 means a
    /// product state sits in the range (no entanglement verdict possible);
    /// an overlap bounded away from 1 is range-criterion evidence for
    /// entanglement.
    pub range_seesaw: SeesawResult,
    /// PPT and no product state found in the range.
    pub entangled_evidence: bool,
}

/// Check every single-party partial transpose and run the range search.
/// Pairwise-joint transposes are transposes of the complementary party and
/// add nothing for a Hermitian ρ.
pub fn check_ppt(
    rho: &DensityMatrix,
    cfg: &SeesawConfig,
    tol: &ToleranceConfig,
) -> Result<PptReport, EntanglementError> {
    let mut mins = Vec::with_capacity(rho.dims.n_parties());
    for party in 0..rho.dims.n_parties() {
        let pt = partial_transpose(&rho.matrix, &rho.dims, party)?;
        let spectrum = eigh(&pt, tol)?;
        mins.push(*spectrum.eigenvalues.last().unwrap_or(&0.0));
    }
    let ppt = mins.iter().all(|&m| m >= -tol.eig_tol);

    let spectrum = eigh(&rho.matrix, tol)?;
    let lambda_max = spectrum.eigenvalues.first().copied().unwrap_or(0.0);
    let mut range = CMatrix::zeros(rho.matrix.nrows(), rho.matrix.ncols());
    let mut rank = 0usize;
    for (k, &lambda) in spectrum.eigenvalues.iter().enumerate() {
        if lambda > tol.rank_tol * lambda_max {
            let v = spectrum.eigenvectors.column(k);
            range += v * v.adjoint();
            rank += 1;
        }
    }
    let range_seesaw = seesaw_product_overlap(&range, &rho.dims, cfg, tol)?;
    let entangled_evidence = ppt && range_seesaw.best_overlap <= 1.0 - 1e-3;
    Ok(PptReport { min_transpose_eigenvalues: mins, ppt, rank, range_seesaw, entangled_evidence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{
        build_334, build_layered, removed_states, FamilyTag, ProductState, StateSet,
    };
    use crate::linalg::{basis_vector, kron, CVector};

    fn fast_cfg() -> SeesawConfig {
        SeesawConfig { restarts: 24, ..SeesawConfig::default() }
    }

    #[test]
    fn spectrum_law_for_334() {
        let tol = ToleranceConfig::default();
        let rho = upb_to_state(&build_334(), &tol).unwrap();
        let spectrum = eigh(&rho.matrix, &tol).unwrap();
        for (k, &lambda) in spectrum.eigenvalues.iter().enumerate() {
            if k < 8 {
                assert!((lambda - 0.125).abs() < 1e-9, "eigenvalue {k} = {lambda}");
            } else {
                assert!(lambda.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn layered_555_gives_rank_16() {
        let tol = ToleranceConfig::default();
        let dims = SystemDims::tripartite(5, 5, 5).unwrap();
        let set = build_layered(&dims, 1).unwrap();
        let rho = upb_to_state(&set, &tol).unwrap();
        let report =
            check_ppt(&rho, &SeesawConfig { restarts: 4, ..Default::default() }, &tol).unwrap();
        assert_eq!(report.rank, 16);
        assert!(report.ppt);
    }

    #[test]
    fn complete_basis_is_rejected() {
        let tol = ToleranceConfig::default();
        let dims = SystemDims::tripartite(3, 3, 4).unwrap();
        let set = build_334();
        let removed = removed_states(&dims, 0).unwrap();
        let mut all: Vec<_> = set.without_stopper().into_iter().cloned().collect();
        all.extend(removed.removed.states.iter().cloned());
        all.push(removed.stopper_replaced.clone());
        let full = StateSet::new(dims, all, 0, FamilyTag::Custom).unwrap();
        assert!(matches!(upb_to_state(&full, &tol), Err(EntanglementError::CompleteBasis)));
    }

    #[test]
    fn full_report_for_334() {
        let tol = ToleranceConfig::default();
        let rho = upb_to_state(&build_334(), &tol).unwrap();
        let report = check_ppt(&rho, &fast_cfg(), &tol).unwrap();
        assert!(report.ppt);
        assert_eq!(report.rank, 8);
        assert_eq!(report.min_transpose_eigenvalues.len(), 3);
        for &m in &report.min_transpose_eigenvalues {
            assert!(m >= -1e-9, "partial transpose eigenvalue {m}");
        }
        assert!(report.range_seesaw.best_overlap <= 1.0 - 1e-3);
        assert!(report.entangled_evidence);
    }

    #[test]
    fn maximally_mixed_state_has_products_in_range() {
        let tol = ToleranceConfig::default();
        let dims = SystemDims::tripartite(2, 2, 2).unwrap();
        let rho =
            DensityMatrix::new(CMatrix::identity(8, 8) / C64::new(8.0, 0.0), dims, &tol).unwrap();
        let report = check_ppt(&rho, &fast_cfg(), &tol).unwrap();
        assert!(report.ppt);
        assert!(report.range_seesaw.best_overlap >= 1.0 - 1e-9);
        assert!(!report.entangled_evidence);
    }

    #[test]
    fn bell_pair_with_mixed_third_party_is_npt() {
        let tol = ToleranceConfig::default();
        let dims = SystemDims::tripartite(2, 2, 2).unwrap();
        let bell = (kron(&basis_vector(2, 0), &basis_vector(2, 0))
            + kron(&basis_vector(2, 1), &basis_vector(2, 1)))
        .scale(1.0 / 2.0_f64.sqrt());
        let rho_ab = &bell * bell.adjoint();
        let rho = rho_ab.kronecker(&(CMatrix::identity(2, 2) / C64::new(2.0, 0.0)));
        let rho = DensityMatrix::new(rho, dims, &tol).unwrap();
        let report = check_ppt(&rho, &fast_cfg(), &tol).unwrap();
        assert!(!report.ppt);
        // the cuts separating the Bell pair are the negative ones
        assert!(report.min_transpose_eigenvalues[0] < -1e-3);
        assert!(report.min_transpose_eigenvalues[1] < -1e-3);
        assert!(report.min_transpose_eigenvalues[2] > -1e-9);
    }

    #[test]
    fn rho_commutes_with_projector_and_transposes_keep_trace() {
        let tol = ToleranceConfig::default();
        let set = build_334();
        let rho = upb_to_state(&set, &tol).unwrap();
        let mut pi = CMatrix::zeros(36, 36);
        for s in &set.states {
            let v = s.full_vector();
            pi += &v * v.adjoint() / C64::new(v.norm_squared(), 0.0);
        }
        let comm = &rho.matrix * &pi - &pi * &rho.matrix;
        assert!(max_abs(&comm) <= 1e-10);
        for party in 0..3 {
            let pt = partial_transpose(&rho.matrix, &rho.dims, party).unwrap();
            assert!((pt.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn ppt_verdict_invariant_under_party_relabeling() {
        let tol = ToleranceConfig::default();
        // permute (A,B,C) -> (C,A,B) of the construction by permuting each
        // product state's locals, then compare verdicts
        let set = build_334();
        let dims_p = SystemDims::tripartite(4, 3, 3).unwrap();
        let perm = [2usize, 0, 1];
        let states: Vec<ProductState> = set
            .states
            .iter()
            .map(|s| {
                let locals: Vec<CVector> = perm.iter().map(|&p| s.locals[p].clone()).collect();
                ProductState::new(locals, s.label.clone())
            })
            .collect();
        let permuted = StateSet::new(dims_p, states, 0, FamilyTag::Custom).unwrap();

        let rho = upb_to_state(&set, &tol).unwrap();
        let rho_p = upb_to_state(&permuted, &tol).unwrap();
        let cfg = SeesawConfig { restarts: 4, ..Default::default() };
        let r = check_ppt(&rho, &cfg, &tol).unwrap();
        let rp = check_ppt(&rho_p, &cfg, &tol).unwrap();
        assert_eq!(r.ppt, rp.ppt);
        assert_eq!(r.rank, rp.rank);
        // same multiset of per-party minima up to the permutation
        let quantize = |xs: &[f64]| {
            let mut q: Vec<i64> = xs.iter().map(|x| (x * 1e6).round() as i64).collect();
            q.sort();
            q
        };
        assert_eq!(
            quantize(&r.min_transpose_eigenvalues),
            quantize(&rp.min_transpose_eigenvalues)
        );
    }
}
