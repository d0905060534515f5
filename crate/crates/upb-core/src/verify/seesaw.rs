//! Alternating rank-1 maximization of ⟨a⊗b⊗c|P|a⊗b⊗c⟩ over product states.
//!
//! Each update fixes all parties but one and replaces that party's vector by
//! the top eigenvector of the contracted operator, so the objective is
//! non-decreasing sweep by sweep. Restart seeds derive deterministically
//! from the base seed; single- and multi-threaded runs give identical
//! results.

use super::VerifyError;
use crate::constructions::{ProductState, StateLabel};
use crate::linalg::{eigh, hermiticity_deviation, kron_all, max_abs, CMatrix, CVector, SystemDims, ToleranceConfig, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Knobs of the seesaw search.
#[derive(Debug, Clone, Copy)]
pub struct SeesawConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub rel_improvement_tol: f64,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self { restarts: 200, max_iters: 1000, rel_improvement_tol: 1e-12, seed: 42 }
    }
}

/// Best product-state overlap found, with the witness that achieves it.
#[derive(Debug, Clone)]
pub struct SeesawResult {
    /// ⟨witness|P|witness⟩, recomputed from the witness on return.
    pub best_overlap: f64,
    pub witness: ProductState,
    pub restarts_used: usize,
    /// Sweeps used by the winning restart.
    pub iterations: usize,
    pub converged: bool,
    /// Objective never decreased in any restart (checked every sweep).
    pub monotone_ok: bool,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

fn random_local(rng: &mut ChaCha8Rng, dim: usize) -> CVector {
    // Box–Muller pairs give complex Gaussian entries.
    let mut v = CVector::zeros(dim);
    for k in 0..dim {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        v[k] = C64::new(r * theta.cos(), r * theta.sin());
    }
    v.normalize()
}

/// Operator on `party` obtained by sandwiching all other parties' vectors.
fn contract(p: &CMatrix, dims: &SystemDims, locals: &[CVector], party: usize) -> CMatrix {
    let d = dims.dim(party);
    let total = dims.total_dim();
    let mut m = CMatrix::zeros(d, d);
    for row in 0..total {
        let rdig = dims.unravel(row);
        let mut wrow = C64::new(1.0, 0.0);
        for (q, &digit) in rdig.iter().enumerate() {
            if q != party {
                wrow *= locals[q][digit].conj();
            }
        }
        if wrow.norm() == 0.0 {
            continue;
        }
        for col in 0..total {
            let cdig = dims.unravel(col);
            let mut w = wrow;
            for (q, &digit) in cdig.iter().enumerate() {
                if q != party {
                    w *= locals[q][digit];
                }
            }
            m[(rdig[party], cdig[party])] += w * p[(row, col)];
        }
    }
    m
}

fn objective(p: &CMatrix, locals: &[CVector]) -> f64 {
    let v = kron_all(locals);
    (v.adjoint() * p * &v)[(0, 0)].re
}

struct RestartOutcome {
    overlap: f64,
    locals: Vec<CVector>,
    sweeps: usize,
    converged: bool,
    monotone_ok: bool,
}

fn run_restart(
    p: &CMatrix,
    dims: &SystemDims,
    cfg: &SeesawConfig,
    tol: &ToleranceConfig,
    restart: usize,
) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(cfg.seed ^ (restart as u64)));
    let mut locals: Vec<CVector> =
        (0..dims.n_parties()).map(|q| random_local(&mut rng, dims.dim(q))).collect();
    let mut obj = objective(p, &locals);
    let mut monotone_ok = true;
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < cfg.max_iters {
        sweeps += 1;
        let mut new_obj = obj;
        for party in 0..dims.n_parties() {
            let m = contract(p, dims, &locals, party);
            let e = eigh(&m, tol).expect("contraction of a Hermitian operator is Hermitian");
            locals[party] = e.eigenvectors.column(0).into_owned();
            new_obj = e.eigenvalues[0];
        }
        if new_obj < obj - 1e-12 * obj.abs().max(1.0) {
            monotone_ok = false;
        }
        let improvement = (new_obj - obj) / new_obj.abs().max(1e-300);
        obj = new_obj;
        if improvement < cfg.rel_improvement_tol {
            converged = true;
            break;
        }
    }
    RestartOutcome { overlap: obj, locals, sweeps, converged, monotone_ok }
}

/// Search for the product state of maximal overlap with a projector-like
/// operator P (Hermitian, PSD, eigenvalues ≤ 1).
pub fn seesaw_product_overlap(
    p: &CMatrix,
    dims: &SystemDims,
    cfg: &SeesawConfig,
    tol: &ToleranceConfig,
) -> Result<SeesawResult, VerifyError> {
    let scale = max_abs(p).max(1.0);
    if hermiticity_deviation(p) > tol.zero_tol * scale {
        return Err(VerifyError::Linalg(crate::linalg::LinalgError::NotHermitian {
            deviation: hermiticity_deviation(p),
        }));
    }
    let spectrum = eigh(p, tol)?;
    let min_eig = *spectrum.eigenvalues.last().unwrap_or(&0.0);
    let max_eig = *spectrum.eigenvalues.first().unwrap_or(&0.0);
    if min_eig < -tol.eig_tol {
        return Err(VerifyError::NotPsd { min_eig });
    }
    if max_eig > 1.0 + tol.eig_tol {
        return Err(VerifyError::NotSubIdentity { max_eig });
    }

    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(p, dims, cfg, tol, r))
        .collect();
    // strict-max fold over restart order keeps the winner independent of
    // thread scheduling
    let mut best = 0usize;
    for (k, o) in outcomes.iter().enumerate() {
        if o.overlap > outcomes[best].overlap {
            best = k;
        }
    }
    let monotone_ok = outcomes.iter().all(|o| o.monotone_ok);
    let winner = &outcomes[best];
    let witness = ProductState::new(winner.locals.clone(), StateLabel::Named("seesaw-witness".into()));
    let best_overlap = objective(p, &winner.locals);
    Ok(SeesawResult {
        best_overlap,
        witness,
        restarts_used: cfg.restarts,
        iterations: winner.sweeps,
        converged: winner.converged,
        monotone_ok,
    })
}
