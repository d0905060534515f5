//! Generators for the tripartite state families.
//!
//! A d_A⊗d_B⊗d_C system (3 ≤ d_A ≤ d_B ≤ d_C) decomposes, layer by layer,
//! into eight outer tiles 𝒜₁..𝒜₄, ℬ₁..ℬ₄ around an inner core ℱ. On layer
//! n the local building blocks over party X (with X_n = d_X − 2n) are
//! discrete-Fourier families supported on a window of the computational
//! basis:
//!
//! - η_s = Σ_{t=n}^{X_n+n−2} ω^{s(t−n)} |t⟩          (ω = exp(2πi/(X_n−1)))
//! - ξ_s = the same amplitudes shifted onto |t+1⟩
//! - β_s = Σ_{t=n}^{X_n+n−3} ω'^{s(t−n)} |t+1⟩       (ω' = exp(2πi/(X_n−2)))
//!
//! Dropping the (0,0)-indexed state of each rectangular tile and the two
//! corner singletons, and adding the all-ones stopper |S⟩, yields an
//! unextendible product basis of size d_A·d_B·d_C − 8(n+1).
//!
//! States are kept unnormalized; overall scale never changes any verdict
//! downstream.

use crate::linalg::{
    basis_vector, kron_all, relative_overlap, root_of_unity, CVector, LinalgError, SystemDims, C64,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("family index {index} out of range for {kind:?} with dim {dim}, layer {layer}")]
    IndexOutOfRange { kind: LocalKind, dim: usize, layer: usize, index: usize },
    #[error("window for {kind:?} is empty at dim {dim}, layer {layer}")]
    EmptyFamily { kind: LocalKind, dim: usize, layer: usize },
    #[error("dims must satisfy 3 <= d_A <= d_B <= d_C, got {0:?}")]
    DimsOutOfOrder(Vec<usize>),
    #[error("layer {layer} exceeds floor((d_A - 3)/2) = {max} for d_A = {da}")]
    LayerOutOfRange { layer: usize, max: usize, da: usize },
    #[error("duplicate state label {0}")]
    DuplicateLabel(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which local Fourier family a vector is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocalKind {
    Eta,
    Xi,
    Beta,
}

/// One member of a local family: kind, party dimension, layer and index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalVectorFamily {
    pub kind: LocalKind,
    pub dim: usize,
    pub layer: usize,
    pub index: usize,
}

impl LocalVectorFamily {
    pub fn eta(dim: usize, layer: usize, index: usize) -> Self {
        Self { kind: LocalKind::Eta, dim, layer, index }
    }
    pub fn xi(dim: usize, layer: usize, index: usize) -> Self {
        Self { kind: LocalKind::Xi, dim, layer, index }
    }
    pub fn beta(dim: usize, layer: usize, index: usize) -> Self {
        Self { kind: LocalKind::Beta, dim, layer, index }
    }
}

/// Number of members of a family: X_n − 1 for η/ξ, X_n − 2 for β.
pub fn family_size(kind: LocalKind, dim: usize, layer: usize) -> usize {
    let window = dim as i64 - 2 * layer as i64;
    let size = match kind {
        LocalKind::Eta | LocalKind::Xi => window - 1,
        LocalKind::Beta => window - 2,
    };
    size.max(0) as usize
}

/// Evaluate a family member as an amplitude vector over its party space.
pub fn local_vector(f: &LocalVectorFamily) -> Result<CVector, ConstructError> {
    let order = family_size(f.kind, f.dim, f.layer);
    if order == 0 {
        return Err(ConstructError::EmptyFamily { kind: f.kind, dim: f.dim, layer: f.layer });
    }
    if f.index >= order {
        return Err(ConstructError::IndexOutOfRange {
            kind: f.kind,
            dim: f.dim,
            layer: f.layer,
            index: f.index,
        });
    }
    let n = f.layer;
    let shift = match f.kind {
        LocalKind::Eta => 0,
        LocalKind::Xi | LocalKind::Beta => 1,
    };
    let mut v = CVector::zeros(f.dim);
    for t in 0..order {
        v[n + t + shift] = root_of_unity(order, (f.index * t) as i64);
    }
    Ok(v)
}

/// The eight outer tiles plus the inner core of the grid decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TileKind {
    A1,
    A2,
    A3,
    A4,
    B1,
    B2,
    B3,
    B4,
    F,
}

impl TileKind {
    pub const ALL: [TileKind; 9] = [
        TileKind::A1,
        TileKind::A2,
        TileKind::A3,
        TileKind::A4,
        TileKind::B1,
        TileKind::B2,
        TileKind::B3,
        TileKind::B4,
        TileKind::F,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TileKind::A1 => "A1",
            TileKind::A2 => "A2",
            TileKind::A3 => "A3",
            TileKind::A4 => "A4",
            TileKind::B1 => "B1",
            TileKind::B2 => "B2",
            TileKind::B3 => "B3",
            TileKind::B4 => "B4",
            TileKind::F => "F",
        }
    }
}

/// Structured state identity: tile membership and in-tile indices, so
/// verification code can locate (0,0)-index states programmatically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateLabel {
    /// A state of tile `tile` on layer `layer`; rectangular tiles carry two
    /// indices, the core carries three, corner singletons carry none.
    Tile { tile: TileKind, layer: usize, idx: Vec<usize> },
    /// The all-ones stopper |S⟩.
    Stopper,
    /// A state outside the layered families (SHIFTS, ad-hoc test sets).
    Named(String),
}

impl StateLabel {
    pub fn tile(tile: TileKind, layer: usize, idx: Vec<usize>) -> Self {
        StateLabel::Tile { tile, layer, idx }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Tile { tile, layer, idx } => {
                let idx = idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
                write!(f, "{}[{}]({})", tile.name(), layer, idx)
            }
            StateLabel::Stopper => write!(f, "S"),
            StateLabel::Named(name) => write!(f, "{name}"),
        }
    }
}

/// A pure product state: one local vector per party, plus its label.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    pub locals: Vec<CVector>,
    pub label: StateLabel,
}

impl ProductState {
    pub fn new(locals: Vec<CVector>, label: StateLabel) -> Self {
        debug_assert!(locals.iter().all(|v| v.norm() > 0.0), "zero local vector");
        Self { locals, label }
    }

    /// Amplitudes over the composite space, row-major in party order.
    pub fn full_vector(&self) -> CVector {
        kron_all(&self.locals)
    }

    pub fn norm(&self) -> f64 {
        self.locals.iter().map(|v| v.norm()).product()
    }

    /// ⟨self|other⟩ computed per party; exact for product states.
    pub fn inner(&self, other: &ProductState) -> C64 {
        self.locals
            .iter()
            .zip(&other.locals)
            .map(|(u, v)| u.dotc(v))
            .product()
    }

    /// |⟨self|other⟩| / (‖self‖‖other‖).
    pub fn relative_overlap(&self, other: &ProductState) -> f64 {
        let scale = self.norm() * other.norm();
        if scale == 0.0 {
            return 0.0;
        }
        self.inner(other).norm() / scale
    }
}

/// Which generator produced a state set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    Example334,
    Tripartite,
    Layered,
    Custom,
}

/// An ordered collection of product states over fixed party dimensions.
#[derive(Debug, Clone)]
pub struct StateSet {
    pub dims: SystemDims,
    pub states: Vec<ProductState>,
    pub layer_depth: usize,
    pub family: FamilyTag,
}

impl StateSet {
    pub fn new(
        dims: SystemDims,
        states: Vec<ProductState>,
        layer_depth: usize,
        family: FamilyTag,
    ) -> Result<Self, ConstructError> {
        let mut seen = std::collections::HashSet::new();
        for s in &states {
            if s.locals.len() != dims.n_parties() {
                return Err(LinalgError::DimensionMismatch(format!(
                    "state {} has {} locals for {} parties",
                    s.label,
                    s.locals.len(),
                    dims.n_parties()
                ))
                .into());
            }
            for (p, v) in s.locals.iter().enumerate() {
                if v.len() != dims.dim(p) {
                    return Err(LinalgError::DimensionMismatch(format!(
                        "state {} local {} has dim {} (expected {})",
                        s.label,
                        p,
                        v.len(),
                        dims.dim(p)
                    ))
                    .into());
                }
            }
            if !seen.insert(s.label.clone()) {
                return Err(ConstructError::DuplicateLabel(s.label.to_string()));
            }
        }
        Ok(Self { dims, states, layer_depth, family })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn find(&self, label: &StateLabel) -> Option<&ProductState> {
        self.states.iter().find(|s| &s.label == label)
    }

    /// All states except the stopper.
    pub fn without_stopper(&self) -> Vec<&ProductState> {
        self.states.iter().filter(|s| s.label != StateLabel::Stopper).collect()
    }
}

fn check_layered_args(dims: &SystemDims, layer: usize) -> Result<(), ConstructError> {
    let d = dims.dims();
    if d.len() != 3 || d[0] < 3 || d[0] > d[1] || d[1] > d[2] {
        return Err(ConstructError::DimsOutOfOrder(d.to_vec()));
    }
    let max_layer = (d[0] - 3) / 2;
    if layer > max_layer {
        return Err(ConstructError::LayerOutOfRange { layer, max: max_layer, da: d[0] });
    }
    Ok(())
}

/// Local vectors of a tile state, given the tile kind, its layer `t`, the
/// core depth `n` (for ℱ) and in-tile indices.
fn tile_locals(
    dims: &SystemDims,
    tile: TileKind,
    t: usize,
    n: usize,
    idx: &[usize],
) -> Result<Vec<CVector>, ConstructError> {
    let (da, db, dc) = (dims.dim(0), dims.dim(1), dims.dim(2));
    let eta = |d, s| local_vector(&LocalVectorFamily::eta(d, t, s));
    let xi = |d, s| local_vector(&LocalVectorFamily::xi(d, t, s));
    let comp = basis_vector;
    Ok(match tile {
        TileKind::A1 => vec![xi(da, idx[0])?, comp(db, t), eta(dc, idx[1])?],
        TileKind::A2 => vec![xi(da, idx[0])?, eta(db, idx[1])?, comp(dc, dc - 1 - t)],
        TileKind::A3 => vec![comp(da, da - 1 - t), xi(db, idx[0])?, eta(dc, idx[1])?],
        TileKind::A4 => vec![comp(da, da - 1 - t), comp(db, db - 1 - t), comp(dc, dc - 1 - t)],
        TileKind::B1 => vec![eta(da, idx[0])?, comp(db, db - 1 - t), xi(dc, idx[1])?],
        TileKind::B2 => vec![eta(da, idx[0])?, xi(db, idx[1])?, comp(dc, t)],
        TileKind::B3 => vec![comp(da, t), eta(db, idx[0])?, xi(dc, idx[1])?],
        TileKind::B4 => vec![comp(da, t), comp(db, t), comp(dc, t)],
        TileKind::F => vec![
            local_vector(&LocalVectorFamily::beta(da, n, idx[0]))?,
            local_vector(&LocalVectorFamily::beta(db, n, idx[1]))?,
            local_vector(&LocalVectorFamily::beta(dc, n, idx[2]))?,
        ],
    })
}

/// Index ranges of a rectangular tile on layer `t`: the sizes of the two
/// Fourier families it combines.
fn tile_index_ranges(dims: &SystemDims, tile: TileKind, t: usize) -> (usize, usize) {
    let fam = |party: usize| family_size(LocalKind::Eta, dims.dim(party), t);
    match tile {
        TileKind::A1 | TileKind::B1 => (fam(0), fam(2)),
        TileKind::A2 | TileKind::B2 => (fam(0), fam(1)),
        TileKind::A3 | TileKind::B3 => (fam(1), fam(2)),
        _ => (0, 0),
    }
}

fn stopper(dims: &SystemDims) -> ProductState {
    let locals = dims
        .dims()
        .iter()
        .map(|&d| CVector::from_element(d, C64::new(1.0, 0.0)))
        .collect();
    ProductState::new(locals, StateLabel::Stopper)
}

/// Build the layered unextendible product basis 𝒰_n in d_A⊗d_B⊗d_C.
///
/// Contains every rectangular tile state of layers 0..=n except the
/// (0,0)-indexed ones, the core states except the all-zero-index one, and
/// the stopper. Size: d_A·d_B·d_C − 8(n+1).
pub fn build_layered(dims: &SystemDims, layer: usize) -> Result<StateSet, ConstructError> {
    check_layered_args(dims, layer)?;
    let mut states = Vec::new();
    let rect_tiles =
        [TileKind::A1, TileKind::A2, TileKind::A3, TileKind::B1, TileKind::B2, TileKind::B3];
    for t in 0..=layer {
        for tile in rect_tiles {
            let (ni, nj) = tile_index_ranges(dims, tile, t);
            for i in 0..ni {
                for j in 0..nj {
                    if (i, j) == (0, 0) {
                        continue;
                    }
                    states.push(ProductState::new(
                        tile_locals(dims, tile, t, layer, &[i, j])?,
                        StateLabel::tile(tile, t, vec![i, j]),
                    ));
                }
            }
        }
    }
    let beta_size = |party: usize| family_size(LocalKind::Beta, dims.dim(party), layer);
    for i in 0..beta_size(0) {
        for j in 0..beta_size(1) {
            for k in 0..beta_size(2) {
                if (i, j, k) == (0, 0, 0) {
                    continue;
                }
                states.push(ProductState::new(
                    tile_locals(dims, TileKind::F, layer, layer, &[i, j, k])?,
                    StateLabel::tile(TileKind::F, layer, vec![i, j, k]),
                ));
            }
        }
    }
    states.push(stopper(dims));
    let family = if layer == 0 { FamilyTag::Tripartite } else { FamilyTag::Layered };
    StateSet::new(dims.clone(), states, layer, family)
}

/// The 3⊗3⊗4 set of size 28.
pub fn build_334() -> StateSet {
    let dims = SystemDims::tripartite(3, 3, 4).expect("static dims");
    let mut set = build_layered(&dims, 0).expect("static arguments are valid");
    set.family = FamilyTag::Example334;
    set
}

/// The states excluded from 𝒰_n, and the core state the stopper replaces.
#[derive(Debug, Clone)]
pub struct RemovedStates {
    /// The 8(n+1) excluded states: per layer, the (0,0)-indexed state of
    /// each rectangular tile plus the two corner singletons.
    pub removed: StateSet,
    /// The all-zero-index core state, flagged separately: together with
    /// `removed` and 𝒰_n∖{|S⟩} it completes the orthogonal basis.
    pub stopper_replaced: ProductState,
}

pub fn removed_states(dims: &SystemDims, layer: usize) -> Result<RemovedStates, ConstructError> {
    check_layered_args(dims, layer)?;
    let mut states = Vec::new();
    for t in 0..=layer {
        for tile in [TileKind::A1, TileKind::A2, TileKind::A3] {
            states.push(ProductState::new(
                tile_locals(dims, tile, t, layer, &[0, 0])?,
                StateLabel::tile(tile, t, vec![0, 0]),
            ));
        }
        states.push(ProductState::new(
            tile_locals(dims, TileKind::A4, t, layer, &[])?,
            StateLabel::tile(TileKind::A4, t, vec![]),
        ));
        for tile in [TileKind::B1, TileKind::B2, TileKind::B3] {
            states.push(ProductState::new(
                tile_locals(dims, tile, t, layer, &[0, 0])?,
                StateLabel::tile(tile, t, vec![0, 0]),
            ));
        }
        states.push(ProductState::new(
            tile_locals(dims, TileKind::B4, t, layer, &[])?,
            StateLabel::tile(TileKind::B4, t, vec![]),
        ));
    }
    let stopper_replaced = ProductState::new(
        tile_locals(dims, TileKind::F, layer, layer, &[0, 0, 0])?,
        StateLabel::tile(TileKind::F, layer, vec![0, 0, 0]),
    );
    Ok(RemovedStates {
        removed: StateSet::new(dims.clone(), states, layer, FamilyTag::Custom)?,
        stopper_replaced,
    })
}

/// The SHIFTS set in 2⊗2⊗2: |0,1,+⟩, |1,+,0⟩, |+,0,1⟩, |−,−,−⟩.
pub fn build_shifts() -> StateSet {
    let dims = SystemDims::tripartite(2, 2, 2).expect("static dims");
    let plus = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
    let minus = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
    let e = |k| basis_vector(2, k);
    let named = |n: &str| StateLabel::Named(n.to_string());
    let states = vec![
        ProductState::new(vec![e(0), e(1), plus.clone()], named("psi0")),
        ProductState::new(vec![e(1), plus.clone(), e(0)], named("psi1")),
        ProductState::new(vec![plus, e(0), e(1)], named("psi2")),
        ProductState::new(vec![minus.clone(), minus.clone(), minus], named("psi3")),
    ];
    StateSet::new(dims, states, 0, FamilyTag::Custom).expect("static set is valid")
}

/// One tile's cells in a grid decomposition.
#[derive(Debug, Clone)]
pub struct GridTile {
    pub tile: TileKind,
    pub layer: usize,
    /// (row, col) cells under the cut, row = solo party index.
    pub cells: Vec<(usize, usize)>,
    /// Corner singletons excluded from the UPB are marked as removed cells.
    pub removed: bool,
}

/// The grid picture of a layered set under a one-vs-two bipartition.
#[derive(Debug, Clone)]
pub struct GridTiling {
    pub cut: crate::linalg::Bipartition,
    pub rows: usize,
    pub cols: usize,
    pub tiles: Vec<GridTile>,
}

/// Computational-basis support window of each party factor of a tile.
fn tile_supports(
    dims: &SystemDims,
    tile: TileKind,
    t: usize,
    n: usize,
) -> [std::ops::Range<usize>; 3] {
    let (da, db, dc) = (dims.dim(0), dims.dim(1), dims.dim(2));
    // spans: η^{(t)} on t..d−t−1, ξ^{(t)} on t+1..d−t, β^{(n)} on n+1..d−n−1
    let eta = |d: usize| t..d - t - 1;
    let xi = |d: usize| t + 1..d - t;
    let beta = |d: usize| n + 1..d - n - 1;
    let point = |k: usize| k..k + 1;
    match tile {
        TileKind::A1 => [xi(da), point(t), eta(dc)],
        TileKind::A2 => [xi(da), eta(db), point(dc - 1 - t)],
        TileKind::A3 => [point(da - 1 - t), xi(db), eta(dc)],
        TileKind::A4 => [point(da - 1 - t), point(db - 1 - t), point(dc - 1 - t)],
        TileKind::B1 => [eta(da), point(db - 1 - t), xi(dc)],
        TileKind::B2 => [eta(da), xi(db), point(t)],
        TileKind::B3 => [point(t), eta(db), xi(dc)],
        TileKind::B4 => [point(t), point(t), point(t)],
        TileKind::F => [beta(da), beta(db), beta(dc)],
    }
}

/// Grid decomposition of the layered construction across a single-party cut.
pub fn grid(
    dims: &SystemDims,
    layer: usize,
    cut: &crate::linalg::Bipartition,
) -> Result<GridTiling, ConstructError> {
    check_layered_args(dims, layer)?;
    if cut.left().len() != 1 || cut.right().len() != 2 {
        return Err(
            LinalgError::BadBipartition("grid wants a one-party vs two-party cut".into()).into()
        );
    }
    let solo = cut.left()[0];
    let (j1, j2) = (cut.right()[0], cut.right()[1]);
    let rows = dims.dim(solo);
    let cols = dims.dim(j1) * dims.dim(j2);
    let mut tiles = Vec::new();
    for t in 0..=layer {
        for tile in TileKind::ALL {
            if tile == TileKind::F && t != layer {
                continue;
            }
            let supports = tile_supports(dims, tile, t, layer);
            let mut cells = Vec::new();
            for r in supports[solo].clone() {
                for c1 in supports[j1].clone() {
                    for c2 in supports[j2].clone() {
                        cells.push((r, c1 * dims.dim(j2) + c2));
                    }
                }
            }
            tiles.push(GridTile {
                tile,
                layer: t,
                cells,
                removed: matches!(tile, TileKind::A4 | TileKind::B4),
            });
        }
    }
    Ok(GridTiling { cut: cut.clone(), rows, cols, tiles })
}

/// Max relative overlap over distinct pairs; exactly 0 for an orthogonal set.
pub fn max_pairwise_overlap(states: &[ProductState]) -> f64 {
    let mut max = 0.0_f64;
    for (i, a) in states.iter().enumerate() {
        for b in &states[i + 1..] {
            max = max.max(a.relative_overlap(b));
        }
    }
    max
}

/// Convenience: relative overlap of two full vectors (non-product inputs).
pub fn full_relative_overlap(u: &CVector, v: &CVector) -> f64 {
    relative_overlap(u, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eta_matches_plus_minus_form() {
        // d_X = 3, layer 0: η_s = |0⟩ + (−1)^s|1⟩
        let v = local_vector(&LocalVectorFamily::eta(3, 0, 1)).unwrap();
        assert_eq!(v, CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]));
        let v0 = local_vector(&LocalVectorFamily::eta(3, 0, 0)).unwrap();
        assert_eq!(v0, CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]));
    }

    #[test]
    fn xi_on_four_dim_party_uses_omega3_phases() {
        let v = local_vector(&LocalVectorFamily::xi(4, 0, 1)).unwrap();
        let w3 = root_of_unity(3, 1);
        let expect = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0), w3, w3 * w3]);
        assert!((v - expect).norm() < 1e-12);
    }

    #[test]
    fn beta_degenerates_to_single_cell() {
        // d_X = 5, layer 1: X_1 = 3 forces a one-term sum at t+1 = 2.
        let v = local_vector(&LocalVectorFamily::beta(5, 1, 0)).unwrap();
        let mut expect = CVector::zeros(5);
        expect[2] = c(1.0, 0.0);
        assert_eq!(v, expect);
    }

    #[test]
    fn family_index_bounds_enforced() {
        assert!(local_vector(&LocalVectorFamily::eta(3, 0, 2)).is_err());
        assert!(local_vector(&LocalVectorFamily::beta(3, 0, 1)).is_err());
        // d_X = 4 at layer 1 leaves no β member at all
        assert!(local_vector(&LocalVectorFamily::beta(4, 1, 0)).is_err());
    }

    #[test]
    fn family_orthogonality_and_norms() {
        for (dim, layer) in [(3usize, 0usize), (4, 0), (5, 0), (5, 1), (7, 1), (7, 2)] {
            for kind in [LocalKind::Eta, LocalKind::Xi, LocalKind::Beta] {
                let size = family_size(kind, dim, layer);
                let members: Vec<CVector> = (0..size)
                    .map(|s| {
                        local_vector(&LocalVectorFamily { kind, dim, layer, index: s }).unwrap()
                    })
                    .collect();
                for s in 0..size {
                    for t in 0..size {
                        let ip = members[s].dotc(&members[t]);
                        if s == t {
                            assert!((ip - c(size as f64, 0.0)).norm() < 1e-9);
                        } else {
                            assert!(ip.norm() < 1e-9, "{kind:?} {dim} {layer} ({s},{t})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn span_housing_windows() {
        // η^{(1)} on d=7 spans coordinates 1..=4, ξ^{(1)} spans 2..=5,
        // β^{(1)} spans 2..=4.
        let checks = [
            (LocalKind::Eta, 1usize, 4usize),
            (LocalKind::Xi, 2, 5),
            (LocalKind::Beta, 2, 4),
        ];
        for (kind, lo, hi) in checks {
            let size = family_size(kind, 7, 1);
            for s in 0..size {
                let v =
                    local_vector(&LocalVectorFamily { kind, dim: 7, layer: 1, index: s }).unwrap();
                for (t, amp) in v.iter().enumerate() {
                    if t < lo || t > hi {
                        assert_eq!(amp.norm(), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn build_334_tile_cardinalities() {
        let set = build_334();
        assert_eq!(set.len(), 28);
        let count = |tile: TileKind| {
            set.states
                .iter()
                .filter(|s| matches!(&s.label, StateLabel::Tile { tile: t, .. } if *t == tile))
                .count()
        };
        assert_eq!(count(TileKind::A1), 5);
        assert_eq!(count(TileKind::A2), 3);
        assert_eq!(count(TileKind::A3), 5);
        assert_eq!(count(TileKind::B1), 5);
        assert_eq!(count(TileKind::B2), 3);
        assert_eq!(count(TileKind::B3), 5);
        assert_eq!(count(TileKind::F), 1);
        assert!(set.find(&StateLabel::Stopper).is_some());
    }

    #[test]
    fn build_334_core_state_and_stopper() {
        let set = build_334();
        // ℱ(k=1) is |1⟩|1⟩(|1⟩−|2⟩)
        let f1 = set.find(&StateLabel::tile(TileKind::F, 0, vec![0, 0, 1])).unwrap();
        assert_eq!(f1.locals[0], basis_vector(3, 1));
        assert_eq!(f1.locals[1], basis_vector(3, 1));
        let mut beta1 = CVector::zeros(4);
        beta1[1] = c(1.0, 0.0);
        beta1[2] = c(-1.0, 0.0);
        assert!((f1.locals[2].clone() - beta1).norm() < 1e-12);

        let s = set.find(&StateLabel::Stopper).unwrap();
        for (p, local) in s.locals.iter().enumerate() {
            assert_eq!(local, &CVector::from_element(set.dims.dim(p), c(1.0, 0.0)));
        }
    }

    #[test]
    fn layered_sizes_match_formula() {
        let cases = [((3, 3, 3), 0, 19), ((5, 5, 5), 1, 109), ((3, 4, 5), 0, 52)];
        for ((a, b, c), n, expected) in cases {
            let dims = SystemDims::tripartite(a, b, c).unwrap();
            let set = build_layered(&dims, n).unwrap();
            assert_eq!(set.len(), expected);
            assert_eq!(set.len() + 8 * (n + 1), a * b * c);
        }
        // |ℱ| for (3,4,5), n = 0 is 1·2·3 − 1 = 5
        let dims = SystemDims::tripartite(3, 4, 5).unwrap();
        let set = build_layered(&dims, 0).unwrap();
        let core = set
            .states
            .iter()
            .filter(|s| matches!(&s.label, StateLabel::Tile { tile: TileKind::F, .. }))
            .count();
        assert_eq!(core, 5);
    }

    #[test]
    fn layered_arg_validation() {
        let dims = SystemDims::tripartite(3, 3, 4).unwrap();
        assert!(build_layered(&dims, 1).is_err());
        let bad = SystemDims::tripartite(4, 3, 5).unwrap();
        assert!(build_layered(&bad, 0).is_err());
    }

    #[test]
    fn removed_states_334() {
        let dims = SystemDims::tripartite(3, 3, 4).unwrap();
        let removed = removed_states(&dims, 0).unwrap();
        assert_eq!(removed.removed.len(), 8);
        let labels: Vec<String> =
            removed.removed.states.iter().map(|s| s.label.to_string()).collect();
        for want in [
            "A1[0](0,0)",
            "A2[0](0,0)",
            "A3[0](0,0)",
            "A4[0]()",
            "B1[0](0,0)",
            "B2[0](0,0)",
            "B3[0](0,0)",
            "B4[0]()",
        ] {
            assert!(labels.contains(&want.to_string()), "missing {want}");
        }
        assert_eq!(
            removed.stopper_replaced.label,
            StateLabel::tile(TileKind::F, 0, vec![0, 0, 0])
        );
        // the corner singletons are |2⟩|2⟩|3⟩ and |0⟩|0⟩|0⟩
        let a4 = removed.removed.find(&StateLabel::tile(TileKind::A4, 0, vec![])).unwrap();
        assert_eq!(a4.locals[0], basis_vector(3, 2));
        assert_eq!(a4.locals[2], basis_vector(4, 3));
    }

    #[test]
    fn removed_counts_scale_with_layers() {
        for ((a, b, c), n) in [((5, 5, 5), 1), ((7, 7, 7), 2), ((3, 4, 5), 0)] {
            let dims = SystemDims::tripartite(a, b, c).unwrap();
            let removed = removed_states(&dims, n).unwrap();
            assert_eq!(removed.removed.len(), 8 * (n + 1));
        }
    }

    #[test]
    fn union_with_removed_is_complete_and_orthogonal() {
        let dims = SystemDims::tripartite(3, 3, 4).unwrap();
        let set = build_layered(&dims, 0).unwrap();
        let removed = removed_states(&dims, 0).unwrap();
        let mut all: Vec<ProductState> = set.without_stopper().into_iter().cloned().collect();
        all.extend(removed.removed.states.iter().cloned());
        all.push(removed.stopper_replaced.clone());
        assert_eq!(all.len(), 36);
        assert!(max_pairwise_overlap(&all) < 1e-12);
    }

    #[test]
    fn layer_nesting() {
        let dims = SystemDims::tripartite(5, 5, 5).unwrap();
        let inner = build_layered(&dims, 0).unwrap();
        let outer = build_layered(&dims, 1).unwrap();
        for s in inner.states {
            match &s.label {
                StateLabel::Tile { tile: TileKind::F, .. } => {
                    assert!(outer.find(&s.label).is_none());
                }
                StateLabel::Stopper => assert!(outer.find(&s.label).is_some()),
                _ => assert!(outer.find(&s.label).is_some(), "missing {}", s.label),
            }
        }
    }

    #[test]
    fn grid_334_matches_figure_layout() {
        let dims = SystemDims::tripartite(3, 3, 4).unwrap();
        let cut = crate::linalg::Bipartition::cyclic(0, 3).unwrap();
        let g = grid(&dims, 0, &cut).unwrap();
        assert_eq!((g.rows, g.cols), (3, 12));
        let find = |tile: TileKind| g.tiles.iter().find(|t| t.tile == tile).unwrap();
        // 𝒜₁ is the 2×3 block rows {1,2} × columns {00,01,02}
        let a1: std::collections::HashSet<_> = find(TileKind::A1).cells.iter().copied().collect();
        let expect: std::collections::HashSet<_> =
            [(1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)].into_iter().collect();
        assert_eq!(a1, expect);
        assert_eq!(find(TileKind::A4).cells, vec![(2, 11)]);
        assert_eq!(find(TileKind::B4).cells, vec![(0, 0)]);
        assert_eq!(find(TileKind::F).cells, vec![(1, 5), (1, 6)]);

        // partition property: every cell covered exactly once
        let mut seen = std::collections::HashSet::new();
        for t in &g.tiles {
            for &cell in &t.cells {
                assert!(seen.insert(cell), "cell {cell:?} covered twice");
            }
        }
        assert_eq!(seen.len(), 36);
    }

    #[test]
    fn grid_is_point_symmetric_and_layered() {
        let dims = SystemDims::tripartite(5, 5, 5).unwrap();
        let cut = crate::linalg::Bipartition::cyclic(0, 3).unwrap();
        let g = grid(&dims, 1, &cut).unwrap();
        let layers: std::collections::HashSet<_> = g.tiles.iter().map(|t| t.layer).collect();
        assert_eq!(layers.len(), 2);
        // 𝒜_i maps onto ℬ_i under the central point symmetry of the grid
        let point_map = |(r, c): (usize, usize)| (g.rows - 1 - r, g.cols - 1 - c);
        for (a, b) in [
            (TileKind::A1, TileKind::B1),
            (TileKind::A2, TileKind::B2),
            (TileKind::A3, TileKind::B3),
            (TileKind::A4, TileKind::B4),
        ] {
            for t in g.tiles.iter().filter(|t| t.tile == a) {
                let image: std::collections::HashSet<_> =
                    t.cells.iter().map(|&cell| point_map(cell)).collect();
                let target: std::collections::HashSet<_> = g
                    .tiles
                    .iter()
                    .find(|u| u.tile == b && u.layer == t.layer)
                    .unwrap()
                    .cells
                    .iter()
                    .copied()
                    .collect();
                assert_eq!(image, target, "{a:?} layer {} not symmetric to {b:?}", t.layer);
            }
        }
        // every cell covered exactly once across both layers
        let covered: usize = g.tiles.iter().map(|t| t.cells.len()).sum();
        assert_eq!(covered, g.rows * g.cols);
    }

    #[test]
    fn every_built_set_is_orthogonal() {
        for ((a, b, c), n) in [((3, 3, 4), 0), ((3, 4, 5), 0), ((5, 5, 5), 1)] {
            let dims = SystemDims::tripartite(a, b, c).unwrap();
            let set = build_layered(&dims, n).unwrap();
            assert!(max_pairwise_overlap(&set.states) < 1e-12);
        }
        assert!(max_pairwise_overlap(&build_shifts().states) < 1e-12);
    }

    #[test]
    fn kron_chain_matches_core_state_amplitudes() {
        // |1⟩|1⟩(|1⟩−|2⟩) assembled by kron equals the amplitude list of
        // the k = 1 core state of the 3⊗3⊗4 set.
        let set = build_334();
        let f1 = set.find(&StateLabel::tile(TileKind::F, 0, vec![0, 0, 1])).unwrap();
        let mut beta1 = CVector::zeros(4);
        beta1[1] = c(1.0, 0.0);
        beta1[2] = c(-1.0, 0.0);
        let by_hand = kron_all(&[basis_vector(3, 1), basis_vector(3, 1), beta1]);
        assert!((f1.full_vector() - by_hand).norm() < 1e-12);
    }
}
