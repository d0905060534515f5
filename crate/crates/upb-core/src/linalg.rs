//! Dense complex linear algebra substrate.
//!
//! Everything downstream works with unnormalized states, so all comparisons
//! here are relative: a quantity counts as zero when it is small against the
//! natural scale of its inputs (`zero_tol`), and rank decisions cut singular
//! values against `rank_tol · σ_max`.
//!
//! Composite indexing is row-major in party order throughout the crate:
//! for a tripartite vector, `index = i·d_B·d_C + j·d_C + k`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// Absolute and relative tolerances used by every numerical verdict.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ToleranceConfig {
    /// Absolute cutoff for inner products and matrix entries (applied
    /// relative to the operand norms).
    pub zero_tol: f64,
    /// Relative singular-value cutoff for rank and nullspace decisions.
    pub rank_tol: f64,
    /// How negative an eigenvalue may be before PSD-ness is rejected.
    pub eig_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { zero_tol: 1e-9, rank_tol: 1e-9, eig_tol: 1e-9 }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<(), LinalgError> {
        if self.zero_tol <= 0.0 || self.rank_tol <= 0.0 || self.eig_tol <= 0.0 {
            return Err(LinalgError::BadTolerance);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (max |m - m†| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("party index {party} out of range for {parties} parties")]
    BadParty { party: usize, parties: usize },
    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid system dimensions: {0}")]
    BadDims(String),
    #[error("invalid bipartition: {0}")]
    BadBipartition(String),
    #[error("tolerances must be strictly positive")]
    BadTolerance,
}

/// Ordered per-party local dimensions of a multipartite system.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SystemDims {
    dims: Vec<usize>,
}

impl SystemDims {
    pub fn new(dims: Vec<usize>) -> Result<Self, LinalgError> {
        if dims.len() < 2 {
            return Err(LinalgError::BadDims("need at least two parties".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(LinalgError::BadDims(format!("party dimension {d} < 2")));
        }
        Ok(Self { dims })
    }

    pub fn tripartite(a: usize, b: usize, c: usize) -> Result<Self, LinalgError> {
        Self::new(vec![a, b, c])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, party: usize) -> usize {
        self.dims[party]
    }

    /// Dimension of the full composite space.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Party labels A, B, C, ... by position.
    pub fn party_label(&self, party: usize) -> char {
        (b'A' + party as u8) as char
    }

    /// Row-major composite index of per-party digits.
    pub fn ravel(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&digit, &dim)| acc * dim + digit)
    }

    /// Per-party digits of a row-major composite index.
    pub fn unravel(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.dims.len()];
        for (slot, &dim) in digits.iter_mut().zip(&self.dims).rev() {
            *slot = index % dim;
            index /= dim;
        }
        digits
    }
}

/// A split of the parties into two non-empty ordered groups.
///
/// The order inside each group fixes how composite indices are enumerated
/// when matricizing across the cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Bipartition {
    pub fn new(left: Vec<usize>, right: Vec<usize>, n_parties: usize) -> Result<Self, LinalgError> {
        if left.is_empty() || right.is_empty() {
            return Err(LinalgError::BadBipartition("both sides must be non-empty".into()));
        }
        let mut seen = vec![false; n_parties];
        for &p in left.iter().chain(&right) {
            if p >= n_parties {
                return Err(LinalgError::BadParty { party: p, parties: n_parties });
            }
            if seen[p] {
                return Err(LinalgError::BadBipartition(format!("party {p} listed twice")));
            }
            seen[p] = true;
        }
        if seen.iter().any(|&s| !s) {
            return Err(LinalgError::BadBipartition("some party is in neither side".into()));
        }
        Ok(Self { left, right })
    }

    /// Cut one party off against the rest, cyclically ordered: A|BC, B|CA, C|AB.
    pub fn cyclic(solo: usize, n_parties: usize) -> Result<Self, LinalgError> {
        let right: Vec<usize> = (1..n_parties).map(|k| (solo + k) % n_parties).collect();
        Self::new(vec![solo], right, n_parties)
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    /// Label like `A|BC` under the given dims.
    pub fn label(&self, dims: &SystemDims) -> String {
        let side = |ps: &[usize]| ps.iter().map(|&p| dims.party_label(p)).collect::<String>();
        format!("{}|{}", side(&self.left), side(&self.right))
    }
}

/// Tensor (Kronecker) product of two vectors, row-major composite indexing.
pub fn kron(u: &CVector, v: &CVector) -> CVector {
    let mut out = CVector::zeros(u.len() * v.len());
    for (i, &ui) in u.iter().enumerate() {
        for (j, &vj) in v.iter().enumerate() {
            out[i * v.len() + j] = ui * vj;
        }
    }
    out
}

/// Tensor product of a sequence of vectors, left to right.
pub fn kron_all(vs: &[CVector]) -> CVector {
    assert!(!vs.is_empty(), "kron_all of empty sequence");
    let mut acc = vs[0].clone();
    for v in &vs[1..] {
        acc = kron(&acc, v);
    }
    acc
}

/// Inner product ⟨u|v⟩, conjugate-linear in `u`.
pub fn inner(u: &CVector, v: &CVector) -> Result<C64, LinalgError> {
    if u.len() != v.len() {
        return Err(LinalgError::DimensionMismatch(format!(
            "inner product of dims {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(u.dotc(v))
}

/// Reshape a composite vector into a matrix across a bipartition.
///
/// Rows enumerate the left parties and columns the right parties, each in
/// row-major order of its own party list. A product state across the cut
/// maps to a rank-1 matrix.
pub fn matricize(v: &CVector, dims: &SystemDims, cut: &Bipartition) -> Result<CMatrix, LinalgError> {
    if v.len() != dims.total_dim() {
        return Err(LinalgError::DimensionMismatch(format!(
            "vector dim {} vs system dim {}",
            v.len(),
            dims.total_dim()
        )));
    }
    let side_dims = |ps: &[usize]| ps.iter().map(|&p| dims.dim(p)).collect::<Vec<_>>();
    let (ld, rd) = (side_dims(cut.left()), side_dims(cut.right()));
    let rows: usize = ld.iter().product();
    let cols: usize = rd.iter().product();
    let mut m = CMatrix::zeros(rows, cols);
    for idx in 0..v.len() {
        let digits = dims.unravel(idx);
        let ravel_side = |ps: &[usize], ds: &[usize]| {
            ps.iter().zip(ds).fold(0usize, |acc, (&p, &d)| acc * d + digits[p])
        };
        let r = ravel_side(cut.left(), &ld);
        let c = ravel_side(cut.right(), &rd);
        m[(r, c)] = v[idx];
    }
    Ok(m)
}

/// Singular values together with the full set of right-singular vectors.
///
/// nalgebra computes a thin SVD, which drops nullspace directions when the
/// matrix is wider than tall; pad with zero rows so V is always square.
fn svd_full_v(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let padded;
    let work = if m.nrows() < m.ncols() {
        let mut p = CMatrix::zeros(m.ncols(), m.ncols());
        p.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
        padded = p;
        &padded
    } else {
        m
    };
    let svd = SVD::new(work.clone(), false, true);
    let v_t = svd.v_t.expect("SVD requested with right-singular vectors");
    (svd.singular_values.iter().copied().collect(), v_t)
}

/// Numerical rank: singular values above `rank_tol · σ_max`. Rank of the
/// zero matrix is 0.
pub fn rank(m: &CMatrix, tol: &ToleranceConfig) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = SVD::new(m.clone(), false, false);
    let sigma_max = svd.singular_values.max();
    if sigma_max <= 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > tol.rank_tol * sigma_max).count()
}

/// Orthonormal basis of the numerical nullspace {x : m·x ≈ 0}.
pub fn nullspace(m: &CMatrix, tol: &ToleranceConfig) -> Vec<CVector> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (0..m.ncols()).map(|k| CVector::from_fn(m.ncols(), |i, _| {
            if i == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
        })).collect();
    }
    let (sigmas, v_t) = svd_full_v(m);
    let sigma_max = sigmas.iter().cloned().fold(0.0_f64, f64::max);
    let mut basis = Vec::new();
    for (k, row) in v_t.row_iter().enumerate() {
        let sigma = sigmas.get(k).copied().unwrap_or(0.0);
        if sigma_max == 0.0 || sigma <= tol.rank_tol * sigma_max {
            basis.push(row.adjoint());
        }
    }
    basis
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub struct Eigh {
    /// Real spectrum, descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, column k pairing with `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
}

pub fn eigh(m: &CMatrix, tol: &ToleranceConfig) -> Result<Eigh, LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::DimensionMismatch(format!(
            "eigh of {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let dev = hermiticity_deviation(m);
    let scale = max_abs(m).max(1.0);
    if dev > tol.zero_tol * scale {
        return Err(LinalgError::NotHermitian { deviation: dev });
    }
    // Hermitize exactly before factorizing so roundoff in the input cannot
    // leak imaginary parts into the spectrum.
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = CMatrix::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(Eigh { eigenvalues, eigenvectors })
}

/// Transpose the chosen party's index pair only; an entrywise permutation,
/// so trace and Hermiticity are preserved exactly.
pub fn partial_transpose(
    rho: &CMatrix,
    dims: &SystemDims,
    party: usize,
) -> Result<CMatrix, LinalgError> {
    let n = dims.total_dim();
    if rho.nrows() != n || rho.ncols() != n {
        return Err(LinalgError::DimensionMismatch(format!(
            "density matrix {}x{} vs system dim {}",
            rho.nrows(),
            rho.ncols(),
            n
        )));
    }
    if party >= dims.n_parties() {
        return Err(LinalgError::BadParty { party, parties: dims.n_parties() });
    }
    let mut out = CMatrix::zeros(n, n);
    for row in 0..n {
        let mut rdig = dims.unravel(row);
        for col in 0..n {
            let mut cdig = dims.unravel(col);
            std::mem::swap(&mut rdig[party], &mut cdig[party]);
            out[(dims.ravel(&rdig), dims.ravel(&cdig))] = rho[(row, col)];
            // restore for the next column
            std::mem::swap(&mut rdig[party], &mut cdig[party]);
        }
    }
    Ok(out)
}

/// The |S|×|T| submatrix of entries (s, t), preserving the given orders.
pub fn submatrix(e: &CMatrix, s: &[usize], t: &[usize]) -> Result<CMatrix, LinalgError> {
    for &i in s {
        if i >= e.nrows() {
            return Err(LinalgError::IndexOutOfRange { index: i, len: e.nrows() });
        }
    }
    for &j in t {
        if j >= e.ncols() {
            return Err(LinalgError::IndexOutOfRange { index: j, len: e.ncols() });
        }
    }
    Ok(CMatrix::from_fn(s.len(), t.len(), |i, j| e[(s[i], t[j])]))
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-entry deviation from Hermiticity, ‖m − m†‖_max.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// |⟨u|v⟩| relative to ‖u‖‖v‖; zero-norm operands give 0.
pub fn relative_overlap(u: &CVector, v: &CVector) -> f64 {
    let scale = u.norm() * v.norm();
    if scale == 0.0 {
        return 0.0;
    }
    u.dotc(v).norm() / scale
}

/// n-th root of unity raised to `power`, evaluated in double precision.
/// Quadrant angles come out exact so ±1 amplitudes carry no roundoff.
pub fn root_of_unity(n: usize, power: i64) -> C64 {
    let r = power.rem_euclid(n as i64) as usize;
    if (4 * r) % n == 0 {
        return match (4 * r) / n {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    let theta = 2.0 * std::f64::consts::PI * (r as f64) / (n as f64);
    C64::new(theta.cos(), theta.sin())
}

/// Standard basis vector e_k of the given dimension.
pub fn basis_vector(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = C64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cvec(entries: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(entries.len(), entries.iter().map(|&(re, im)| C64::new(re, im)))
    }

    fn rvec(entries: &[f64]) -> CVector {
        CVector::from_iterator(entries.len(), entries.iter().map(|&re| C64::new(re, 0.0)))
    }

    #[test]
    fn kron_of_basis_vectors() {
        let e0 = basis_vector(2, 0);
        let e1 = basis_vector(2, 1);
        assert_eq!(kron(&e0, &e1), basis_vector(4, 1));
        assert_eq!(kron(&rvec(&[1.0, 1.0]), &rvec(&[1.0, 0.0])), rvec(&[1.0, 0.0, 1.0, 0.0]));
    }

    #[test]
    fn matricize_product_state_has_rank_one() {
        let dims = SystemDims::new(vec![2, 3]).unwrap();
        let cut = Bipartition::new(vec![0], vec![1], 2).unwrap();
        let u = cvec(&[(1.0, 0.5), (-0.3, 2.0)]);
        let w = cvec(&[(0.2, 0.0), (1.0, -1.0), (0.0, 3.0)]);
        let m = matricize(&kron(&u, &w), &dims, &cut).unwrap();
        assert_eq!(rank(&m, &ToleranceConfig::default()), 1);
    }

    #[test]
    fn matricize_bell_gives_identity() {
        let dims = SystemDims::new(vec![2, 2]).unwrap();
        let cut = Bipartition::new(vec![0], vec![1], 2).unwrap();
        let bell = rvec(&[1.0, 0.0, 0.0, 1.0]);
        let m = matricize(&bell, &dims, &cut).unwrap();
        assert_eq!(m, CMatrix::identity(2, 2));
        assert_eq!(rank(&m, &ToleranceConfig::default()), 2);
    }

    #[test]
    fn rank_of_all_ones_and_identity() {
        let tol = ToleranceConfig::default();
        let ones = CMatrix::from_element(3, 12, C64::new(1.0, 0.0));
        assert_eq!(rank(&ones, &tol), 1);
        assert_eq!(rank(&CMatrix::identity(4, 4), &tol), 4);
        assert_eq!(rank(&CMatrix::zeros(3, 5), &tol), 0);
    }

    #[test]
    fn maximally_entangled_matricization_has_full_rank() {
        let dims = SystemDims::new(vec![3, 3]).unwrap();
        let cut = Bipartition::new(vec![0], vec![1], 2).unwrap();
        let mut phi = CVector::zeros(9);
        for k in 0..3 {
            phi[k * 3 + k] = C64::new(1.0, 0.0);
        }
        let m = matricize(&phi, &dims, &cut).unwrap();
        assert_eq!(rank(&m, &ToleranceConfig::default()), 3);
    }

    #[test]
    fn inner_fourier_orthogonality() {
        // |η_s⟩ on a 4-dimensional party has three components with ω₃ phases.
        let eta = |s: i64| {
            CVector::from_iterator(4, (0..4).map(|t| {
                if t < 3 { root_of_unity(3, s * t as i64) } else { C64::new(0.0, 0.0) }
            }))
        };
        assert!(inner(&eta(1), &eta(2)).unwrap().norm() < 1e-12);
        let n = inner(&eta(0), &eta(0)).unwrap();
        assert!((n - C64::new(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn inner_dimension_mismatch_rejected() {
        assert!(inner(&rvec(&[1.0]), &rvec(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn nullspace_cases() {
        let tol = ToleranceConfig::default();
        assert!(nullspace(&CMatrix::identity(3, 3), &tol).is_empty());
        assert_eq!(nullspace(&CMatrix::zeros(2, 5), &tol).len(), 5);
        let m = CMatrix::from_row_slice(1, 2, &[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
        let ns = nullspace(&m, &tol);
        assert_eq!(ns.len(), 1);
        let expected = rvec(&[1.0, 1.0]).normalize();
        assert!(relative_overlap(&ns[0], &expected) > 1.0 - 1e-12);
    }

    #[test]
    fn eigh_diagonal_and_projector() {
        let tol = ToleranceConfig::default();
        let d = CMatrix::from_diagonal(&cvec(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]));
        let e = eigh(&d, &tol).unwrap();
        assert_eq!(e.eigenvalues.len(), 3);
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!(e.eigenvalues[1].abs() < 1e-12);

        // projector onto a 2-dim span has eigenvalue 1 with multiplicity 2
        let v1 = rvec(&[1.0, 0.0, 0.0, 0.0]);
        let v2 = rvec(&[0.0, 1.0, 1.0, 0.0]).normalize();
        let p = &v1 * v1.adjoint() + &v2 * v2.adjoint();
        let e = eigh(&p, &tol).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-10);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-10);
        assert!(e.eigenvalues[2].abs() < 1e-10);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0), C64::new(1.0, 0.0),
            C64::new(0.0, 0.0), C64::new(0.0, 0.0),
        ]);
        assert!(matches!(
            eigh(&m, &ToleranceConfig::default()),
            Err(LinalgError::NotHermitian { .. })
        ));
    }

    #[test]
    fn partial_transpose_bell_spectrum() {
        let dims = SystemDims::new(vec![2, 2]).unwrap();
        let tol = ToleranceConfig::default();
        let bell = rvec(&[1.0, 0.0, 0.0, 1.0]).scale(1.0 / 2.0_f64.sqrt());
        let rho = &bell * bell.adjoint();
        let pt = partial_transpose(&rho, &dims, 0).unwrap();
        let e = eigh(&pt, &tol).unwrap();
        assert!((e.eigenvalues.last().unwrap() + 0.5).abs() < 1e-12);
        // involutive
        let back = partial_transpose(&pt, &dims, 0).unwrap();
        assert_eq!(back, rho);
    }

    #[test]
    fn partial_transpose_of_product_acts_on_one_factor() {
        let dims = SystemDims::new(vec![2, 2]).unwrap();
        let a = CMatrix::from_row_slice(2, 2, &[
            C64::new(1.0, 0.0), C64::new(0.0, 1.0),
            C64::new(0.0, -1.0), C64::new(2.0, 0.0),
        ]);
        let b = CMatrix::from_row_slice(2, 2, &[
            C64::new(0.5, 0.0), C64::new(0.2, 0.3),
            C64::new(0.2, -0.3), C64::new(0.5, 0.0),
        ]);
        let rho = a.kronecker(&b);
        let pt = partial_transpose(&rho, &dims, 0).unwrap();
        assert_eq!(pt, a.transpose().kronecker(&b));
    }

    #[test]
    fn partial_transpose_rejects_bad_party() {
        let dims = SystemDims::new(vec![2, 2]).unwrap();
        let rho = CMatrix::identity(4, 4);
        assert!(partial_transpose(&rho, &dims, 2).is_err());
    }

    #[test]
    fn submatrix_extraction() {
        let e = CMatrix::from_fn(4, 4, |i, j| C64::new((4 * i + j) as f64, 0.0));
        let full = submatrix(&e, &[0, 1, 2, 3], &[0, 1, 2, 3]).unwrap();
        assert_eq!(full, e);
        let cell = submatrix(&e, &[2], &[3]).unwrap();
        assert_eq!(cell[(0, 0)], C64::new(11.0, 0.0));
        assert!(submatrix(&e, &[4], &[0]).is_err());
    }

    #[test]
    fn cyclic_bipartitions() {
        let dims = SystemDims::tripartite(3, 3, 4).unwrap();
        assert_eq!(Bipartition::cyclic(0, 3).unwrap().label(&dims), "A|BC");
        assert_eq!(Bipartition::cyclic(1, 3).unwrap().label(&dims), "B|CA");
        assert_eq!(Bipartition::cyclic(2, 3).unwrap().label(&dims), "C|AB");
    }

    fn arb_cvec(len: usize) -> impl Strategy<Value = CVector> {
        proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len..=len)
            .prop_map(|entries| CVector::from_iterator(
                entries.len(),
                entries.into_iter().map(|(re, im)| C64::new(re, im)),
            ))
    }

    proptest! {
        #[test]
        fn kron_is_associative(u in arb_cvec(2), v in arb_cvec(3), w in arb_cvec(4)) {
            let lhs = kron(&kron(&u, &v), &w);
            let rhs = kron(&u, &kron(&v, &w));
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn product_states_matricize_to_rank_one(
            u in arb_cvec(2), v in arb_cvec(3), w in arb_cvec(2)
        ) {
            prop_assume!(u.norm() > 0.1 && v.norm() > 0.1 && w.norm() > 0.1);
            let dims = SystemDims::new(vec![2, 3, 2]).unwrap();
            let full = kron_all(&[u, v, w]);
            let tol = ToleranceConfig::default();
            for solo in 0..3 {
                let cut = Bipartition::cyclic(solo, 3).unwrap();
                let m = matricize(&full, &dims, &cut).unwrap();
                prop_assert_eq!(rank(&m, &tol), 1);
            }
        }

        #[test]
        fn inner_matches_trace_formula(u in arb_cvec(6), v in arb_cvec(6)) {
            let dims = SystemDims::new(vec![2, 3]).unwrap();
            let cut = Bipartition::new(vec![0], vec![1], 2).unwrap();
            let m1 = matricize(&u, &dims, &cut).unwrap();
            let m2 = matricize(&v, &dims, &cut).unwrap();
            let trace = (m1.adjoint() * m2).trace();
            let direct = inner(&u, &v).unwrap();
            let scale = u.norm() * v.norm() + 1e-30;
            prop_assert!((trace - direct).norm() / scale < 1e-12);
        }

        #[test]
        fn nullspace_vectors_annihilate(
            entries in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 12..=12)
        ) {
            let m = CMatrix::from_iterator(3, 4, entries.into_iter().map(|(re, im)| C64::new(re, im)));
            let tol = ToleranceConfig::default();
            let svd = SVD::new(m.clone(), false, false);
            let sigma_max = svd.singular_values.max();
            for x in nullspace(&m, &tol) {
                prop_assert!((&m * &x).norm() <= 10.0 * tol.rank_tol * sigma_max * x.norm() + 1e-14);
            }
        }

        #[test]
        fn partial_transpose_preserves_trace_and_hermiticity(
            entries in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 36..=36)
        ) {
            let raw = CMatrix::from_iterator(6, 6, entries.into_iter().map(|(re, im)| C64::new(re, im)));
            let rho = (&raw + raw.adjoint()).scale(0.5);
            let dims = SystemDims::new(vec![2, 3]).unwrap();
            for party in 0..2 {
                let pt = partial_transpose(&rho, &dims, party).unwrap();
                prop_assert!((pt.trace() - rho.trace()).norm() == 0.0);
                prop_assert!(hermiticity_deviation(&pt) == 0.0);
            }
        }
    }
}
