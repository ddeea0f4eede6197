//! Physical linear-optical fusion under photon loss, and recovery
//! statistics of transversal encoded fusions.
//!
//! A type-II fusion measures both XX and ZZ on the fused pair when it
//! succeeds; on failure it returns only one of the two, the failure basis,
//! which may be chosen per fusion. Loss of any constituent photon erases
//! the fusion entirely. An encoded fusion between two {n,m}-encoded qubits
//! runs n*m physical fusions transversally, one per physical qubit pair,
//! and recovers the encoded XX/ZZ outcomes when the measured physical
//! operators multiply to a representative of the encoded operator. That
//! membership question lives on the fusion register (one slot per physical
//! fusion) and is decided by GF(2) elimination in [`recoverable`].
//!
//! The probability kernels are generic over the scalar: `f64` for fast
//! estimates and [`BigRational`] for the exact enumeration oracle.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Sub};

use num::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2::RowSpace;
use crate::graph::ShorCode;
use crate::tableau::PauliOp;

// ---------------------------------------------------------------------------
// Probability scalar.

/// Scalar for the outcome-probability kernels.
///
/// Both implementations embed `f64` exactly: every finite float is a dyadic
/// rational, so the rational kernel is exact for the parameters as given.
pub trait Prob:
    Clone
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Prob for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Prob for BigRational {
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("probabilities are finite")
    }
    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

fn pow_u32<P: Prob>(base: &P, k: u32) -> P {
    let mut acc = P::one();
    for _ in 0..k {
        acc = acc * base.clone();
    }
    acc
}

// ---------------------------------------------------------------------------
// Physical fusion model.

/// Linear-optical fusion parameters under uniform per-photon loss.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhysicalFusionModel {
    loss_per_photon: f64,
    photons_per_qubit: u8,
    boosted: bool,
}

impl PhysicalFusionModel {
    pub fn new(loss_per_photon: f64, photons_per_qubit: u8, boosted: bool) -> Result<Self> {
        if !loss_per_photon.is_finite() || !(0.0..=1.0).contains(&loss_per_photon) {
            return Err(Error::InvalidParameter(format!(
                "loss per photon must lie in [0, 1], got {loss_per_photon}"
            )));
        }
        if !(1..=2).contains(&photons_per_qubit) {
            return Err(Error::InvalidParameter(format!(
                "photons per qubit must be 1 or 2, got {photons_per_qubit}"
            )));
        }
        Ok(PhysicalFusionModel { loss_per_photon, photons_per_qubit, boosted })
    }

    pub fn loss_per_photon(&self) -> f64 {
        self.loss_per_photon
    }

    pub fn photons_per_qubit(&self) -> u8 {
        self.photons_per_qubit
    }

    pub fn boosted(&self) -> bool {
        self.boosted
    }

    /// Success probability of one physical fusion, 1/2 unboosted, 3/4
    /// boosted.
    pub fn success_probability(&self) -> f64 {
        if self.boosted {
            0.75
        } else {
            0.5
        }
    }

    /// Photons consumed by one fusion: the two measured qubits, doubled
    /// again by the ancilla pair when boosted.
    pub fn photons_per_fusion(&self) -> u32 {
        2 * u32::from(self.photons_per_qubit) * if self.boosted { 2 } else { 1 }
    }

    /// Probability that a fusion yields no outcome at all: any constituent
    /// photon lost erases the whole measurement.
    pub fn erasure_probability(&self) -> f64 {
        1.0 - (1.0 - self.loss_per_photon).powi(self.photons_per_fusion() as i32)
    }

    /// Erasure probability of a single-qubit pair measurement, which
    /// consumes only the two measured qubits (no boosting ancillas).
    pub fn singles_erasure_probability(&self) -> f64 {
        1.0 - (1.0 - self.loss_per_photon).powi(2 * i32::from(self.photons_per_qubit))
    }

    /// (both, failure-basis only, erased) for one fusion, in `P`.
    fn fusion_branches<P: Prob>(&self) -> (P, P, P) {
        let keep = pow_u32(
            &(P::one() - P::from_f64(self.loss_per_photon)),
            self.photons_per_fusion(),
        );
        let ps = P::from_f64(self.success_probability());
        let both = keep.clone() * ps.clone();
        let only = keep.clone() * (P::one() - ps);
        (both, only, P::one() - keep)
    }

    /// (basis obtained, erased) for a single-qubit pair measurement.
    fn singles_branches<P: Prob>(&self) -> (P, P) {
        let keep = pow_u32(
            &(P::one() - P::from_f64(self.loss_per_photon)),
            2 * u32::from(self.photons_per_qubit),
        );
        (keep.clone(), P::one() - keep)
    }
}

// ---------------------------------------------------------------------------
// Strategies and outcome types.

/// Basis measured by a fusion that fails (or by a substituted single-qubit
/// pair measurement).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FailureBasis {
    Xx,
    Zz,
}

impl FailureBasis {
    pub fn swapped(self) -> FailureBasis {
        match self {
            FailureBasis::Xx => FailureBasis::Zz,
            FailureBasis::Zz => FailureBasis::Xx,
        }
    }
}

/// Failure-basis policy over the n*m physical fusions of an encoded fusion.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FusionStrategy {
    /// Each failure basis drawn uniformly at random.
    RandomizedFailure,
    /// Fixed per-fusion assignment, block-major order (slot k = i*m + j).
    StaticBias(Vec<FailureBasis>),
    /// Fusions staggered in block-major order with feedforward: each step
    /// picks the action maximizing the probability of recovering both
    /// encoded outcomes, and single-qubit pair measurements substitute for
    /// fusions once one encoded outcome is settled either way.
    LocalAdaptive,
}

impl FusionStrategy {
    /// Default static assignment: the first fusion of each block fails to
    /// ZZ (each block must contribute one ZZ), the rest to XX (only a full
    /// block of XX recovers the encoded XX).
    pub fn static_default(code: &ShorCode) -> FusionStrategy {
        let m = code.m() as usize;
        let nm = (code.n() * code.m()) as usize;
        FusionStrategy::StaticBias(
            (0..nm)
                .map(|k| if k % m == 0 { FailureBasis::Zz } else { FailureBasis::Xx })
                .collect(),
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            FusionStrategy::RandomizedFailure => "randomized",
            FusionStrategy::StaticBias(_) => "static-bias",
            FusionStrategy::LocalAdaptive => "local-adaptive",
        }
    }

    fn validate(&self, code: &ShorCode) -> Result<()> {
        if let FusionStrategy::StaticBias(assignment) = self {
            let nm = (code.n() * code.m()) as usize;
            if assignment.len() != nm {
                return Err(Error::InvalidParameter(format!(
                    "static bias assigns {} fusions, code has {nm}",
                    assignment.len()
                )));
            }
        }
        Ok(())
    }
}

/// Which encoded operators one encoded fusion recovered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum EncodedOutcome {
    Both,
    XxOnly,
    ZzOnly,
    Neither,
}

impl EncodedOutcome {
    fn from_flags(xx: bool, zz: bool) -> EncodedOutcome {
        match (xx, zz) {
            (true, true) => EncodedOutcome::Both,
            (true, false) => EncodedOutcome::XxOnly,
            (false, true) => EncodedOutcome::ZzOnly,
            (false, false) => EncodedOutcome::Neither,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EncodedOutcome::Both => "both",
            EncodedOutcome::XxOnly => "xx_only",
            EncodedOutcome::ZzOnly => "zz_only",
            EncodedOutcome::Neither => "neither",
        }
    }
}

/// Distribution over the four encoded-fusion outcomes.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FusionOutcomeDist<P> {
    pub both: P,
    pub xx_only: P,
    pub zz_only: P,
    pub neither: P,
}

/// Exact rational distribution from the enumeration oracle.
pub type ExactDist = FusionOutcomeDist<BigRational>;
/// Floating-point distribution.
pub type FloatDist = FusionOutcomeDist<f64>;

impl<P: Prob> FusionOutcomeDist<P> {
    fn zero() -> Self {
        FusionOutcomeDist {
            both: P::zero(),
            xx_only: P::zero(),
            zz_only: P::zero(),
            neither: P::zero(),
        }
    }

    fn add_weight(&mut self, outcome: EncodedOutcome, w: P) {
        let slot = match outcome {
            EncodedOutcome::Both => &mut self.both,
            EncodedOutcome::XxOnly => &mut self.xx_only,
            EncodedOutcome::ZzOnly => &mut self.zz_only,
            EncodedOutcome::Neither => &mut self.neither,
        };
        *slot = slot.clone() + w;
    }

    pub fn probability(&self, outcome: EncodedOutcome) -> P {
        match outcome {
            EncodedOutcome::Both => self.both.clone(),
            EncodedOutcome::XxOnly => self.xx_only.clone(),
            EncodedOutcome::ZzOnly => self.zz_only.clone(),
            EncodedOutcome::Neither => self.neither.clone(),
        }
    }

    /// Marginal probability that the encoded XX outcome was recovered.
    pub fn p_xx(&self) -> P {
        self.both.clone() + self.xx_only.clone()
    }

    /// Marginal probability that the encoded ZZ outcome was recovered.
    pub fn p_zz(&self) -> P {
        self.both.clone() + self.zz_only.clone()
    }

    pub fn total(&self) -> P {
        self.both.clone() + self.xx_only.clone() + self.zz_only.clone() + self.neither.clone()
    }

    pub fn to_float(&self) -> FloatDist {
        FloatDist {
            both: self.both.to_f64(),
            xx_only: self.xx_only.to_f64(),
            zz_only: self.zz_only.to_f64(),
            neither: self.neither.to_f64(),
        }
    }

    /// Exchange the XX and ZZ roles, the distribution of the same scheme
    /// with the repetition axes of the code read in the other orientation.
    pub fn swap_bases(self) -> Self {
        FusionOutcomeDist {
            both: self.both,
            xx_only: self.zz_only,
            zz_only: self.xx_only,
            neither: self.neither,
        }
    }
}

// ---------------------------------------------------------------------------
// Single physical fusion.

/// Outcome of one physical fusion attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhysicalOutcome {
    /// Fusion succeeded: both XX and ZZ measured.
    Both,
    /// Fusion failed: only the chosen failure basis measured.
    BasisOnly,
    /// A constituent photon was lost: nothing measured.
    Erased,
}

/// Draw one physical fusion. The failure basis does not affect the success
/// or erasure probabilities, only which operator `BasisOnly` refers to.
pub fn physical_fusion_outcome(
    model: &PhysicalFusionModel,
    _failure_basis: FailureBasis,
    rng: &mut impl Rng,
) -> PhysicalOutcome {
    if rng.gen_bool(model.erasure_probability()) {
        PhysicalOutcome::Erased
    } else if rng.gen_bool(model.success_probability()) {
        PhysicalOutcome::Both
    } else {
        PhysicalOutcome::BasisOnly
    }
}

/// Draw one single-qubit pair measurement (both photons of the slot
/// measured separately in the same basis); returns whether the pair
/// operator was obtained.
pub fn physical_singles_outcome(model: &PhysicalFusionModel, rng: &mut impl Rng) -> bool {
    !rng.gen_bool(model.singles_erasure_probability())
}

// ---------------------------------------------------------------------------
// Recoverability.

/// True when `logical` lies in the GF(2) span of the usable known
/// operators: the entries of `known` with no support on `lost` qubits.
///
/// `known` carries both measured outcomes and stabilizers with a priori
/// known values; outcome signs are irrelevant to recoverability, so the
/// test runs on symplectic rows only.
pub fn recoverable(logical: &PauliOp, known: &[PauliOp], lost: &[usize]) -> bool {
    let mut space = RowSpace::new();
    for op in known {
        debug_assert_eq!(op.num_qubits(), logical.num_qubits());
        if op.support().iter().any(|q| lost.contains(q)) {
            continue;
        }
        space.insert(op.symplectic_row());
    }
    space.contains(&logical.symplectic_row())
}

/// Stabilizers of the two local encodings written on the fusion register
/// (slot k = block i * m + j stands for the physical pair at (i, j)).
/// Z pairs within a block and X pairs of full blocks; their values are
/// +1 regardless of loss, which only removes measured outcomes.
fn register_stabilizers(code: &ShorCode) -> Vec<PauliOp> {
    let (n, m) = (code.n() as usize, code.m() as usize);
    let nm = n * m;
    let mut out = Vec::new();
    for i in 0..n {
        for j in 1..m {
            out.push(PauliOp::from_support(nm, &[], &[i * m, i * m + j]));
        }
    }
    let block0: Vec<usize> = (0..m).collect();
    for i in 1..n {
        let mut xs = block0.clone();
        xs.extend((0..m).map(|j| i * m + j));
        out.push(PauliOp::from_support(nm, &xs, &[]));
    }
    out
}

/// Canonical encoded-operator representatives on the fusion register:
/// XX is X on every slot of block 0, ZZ is Z on the first slot of each
/// block.
fn register_logical(code: &ShorCode, basis: FailureBasis) -> PauliOp {
    let (n, m) = (code.n() as usize, code.m() as usize);
    let nm = n * m;
    match basis {
        FailureBasis::Xx => PauliOp::from_support(nm, &(0..m).collect::<Vec<_>>(), &[]),
        FailureBasis::Zz => {
            PauliOp::from_support(nm, &[], &(0..n).map(|i| i * m).collect::<Vec<_>>())
        }
    }
}

/// Recovery flags for a measurement pattern, by GF(2) elimination over the
/// fusion register. `xx_mask`/`zz_mask` bit k: fusion k measured XX / ZZ.
fn register_recovered(code: &ShorCode, xx_mask: u32, zz_mask: u32) -> (bool, bool) {
    let nm = (code.n() * code.m()) as usize;
    let mut known = register_stabilizers(code);
    for k in 0..nm {
        if xx_mask >> k & 1 == 1 {
            known.push(PauliOp::from_support(nm, &[k], &[]));
        }
        if zz_mask >> k & 1 == 1 {
            known.push(PauliOp::from_support(nm, &[], &[k]));
        }
    }
    (
        recoverable(&register_logical(code, FailureBasis::Xx), &known, &[]),
        recoverable(&register_logical(code, FailureBasis::Zz), &known, &[]),
    )
}

/// Same flags by the structural rule the code's geometry implies: encoded
/// XX needs one block with every fusion measuring XX, encoded ZZ needs at
/// least one ZZ in every block. The sampler folds this rule incrementally
/// through [`RunState`]; tests pin both against the elimination route.
#[cfg(test)]
fn structural_recovered(code: &ShorCode, xx_mask: u32, zz_mask: u32) -> (bool, bool) {
    let (n, m) = (code.n() as usize, code.m() as usize);
    let block = |i: usize| (0..m).map(move |j| i * m + j);
    let xx = (0..n).any(|i| block(i).all(|k| xx_mask >> k & 1 == 1));
    let zz = (0..n).all(|i| block(i).any(|k| zz_mask >> k & 1 == 1));
    (xx, zz)
}

// ---------------------------------------------------------------------------
// Recovery bookkeeping and the local-adaptive policy.

/// Per-run summary sufficient to decide recovery: processed blocks fold
/// into two flags, the current block keeps its own two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct RunState {
    /// Some finished block measured XX on every slot.
    done_complete: bool,
    /// Every finished block produced at least one ZZ.
    done_all_zz: bool,
    /// Current block has measured XX on every slot so far.
    cur_perfect: bool,
    /// Current block has produced a ZZ.
    cur_has_zz: bool,
}

impl RunState {
    fn start() -> RunState {
        RunState { done_complete: false, done_all_zz: true, cur_perfect: true, cur_has_zz: false }
    }

    /// Advance past slot `k` with the given measured flags, folding the
    /// block summary when the block ends.
    fn apply(self, m: usize, k: usize, got_xx: bool, got_zz: bool) -> RunState {
        let cur_perfect = self.cur_perfect && got_xx;
        let cur_has_zz = self.cur_has_zz || got_zz;
        if k % m == m - 1 {
            RunState {
                done_complete: self.done_complete || cur_perfect,
                done_all_zz: self.done_all_zz && cur_has_zz,
                cur_perfect: true,
                cur_has_zz: false,
            }
        } else {
            RunState { cur_perfect, cur_has_zz, ..self }
        }
    }

    fn encode(self) -> usize {
        usize::from(self.done_complete)
            | usize::from(self.done_all_zz) << 1
            | usize::from(self.cur_perfect) << 2
            | usize::from(self.cur_has_zz) << 3
    }

    fn decode(bits: usize) -> RunState {
        RunState {
            done_complete: bits & 1 == 1,
            done_all_zz: bits >> 1 & 1 == 1,
            cur_perfect: bits >> 2 & 1 == 1,
            cur_has_zz: bits >> 3 & 1 == 1,
        }
    }

    /// Whether either encoded outcome is settled before playing slot `k`,
    /// which is when single-qubit measurements may substitute for fusions.
    fn outcome_settled(self, n: usize, m: usize, k: usize) -> bool {
        let i = k / m;
        let xx_certain = self.done_complete;
        let xx_impossible = !self.done_complete && !self.cur_perfect && i == n - 1;
        let zz_impossible = !self.done_all_zz;
        let zz_certain = self.done_all_zz && self.cur_has_zz && i == n - 1;
        xx_certain || xx_impossible || zz_certain || zz_impossible
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Action {
    Fuse(FailureBasis),
    Singles(FailureBasis),
}

impl Action {
    /// Measured flags per branch: (on success/obtained, on failure).
    fn flags(self) -> ((bool, bool), (bool, bool)) {
        match self {
            Action::Fuse(b) => ((true, true), (b == FailureBasis::Xx, b == FailureBasis::Zz)),
            Action::Singles(b) => {
                let got = (b == FailureBasis::Xx, b == FailureBasis::Zz);
                (got, (false, false))
            }
        }
    }
}

/// Exact-lookahead bound: beyond this many fusions the adaptive policy
/// falls back to the priority rule.
const EXACT_POLICY_LIMIT: usize = 9;

/// Feedforward policy of [`FusionStrategy::LocalAdaptive`]. For n*m up to
/// [`EXACT_POLICY_LIMIT`] the action table comes from backward induction
/// maximizing the probability of recovering both encoded outcomes (f64
/// arithmetic, deterministic tie-break toward fusing in XX); larger codes
/// use the priority rule: secure one ZZ per block no later than each
/// block's last chance, otherwise chase complete XX blocks, and substitute
/// singles for the missing side once an outcome is settled.
#[derive(Debug, Clone)]
struct LocalPolicy {
    n: usize,
    m: usize,
    exact: Option<Vec<Action>>,
}

impl LocalPolicy {
    fn new(code: &ShorCode, model: &PhysicalFusionModel) -> LocalPolicy {
        let (n, m) = (code.n() as usize, code.m() as usize);
        let nm = n * m;
        if nm > EXACT_POLICY_LIMIT {
            return LocalPolicy { n, m, exact: None };
        }
        let (f_both, f_only, _) = model.fusion_branches::<f64>();
        let (s_only, _) = model.singles_branches::<f64>();
        let f_erased = 1.0 - f_both - f_only;
        let s_erased = 1.0 - s_only;
        let mut value = vec![f64::NAN; (nm + 1) * 16];
        let mut actions = vec![Action::Fuse(FailureBasis::Xx); nm * 16];
        for bits in 0..16 {
            let st = RunState::decode(bits);
            value[nm * 16 + bits] = if st.done_complete && st.done_all_zz { 1.0 } else { 0.0 };
        }
        for k in (0..nm).rev() {
            for bits in 0..16 {
                let st = RunState::decode(bits);
                let mut candidates = vec![
                    (Action::Fuse(FailureBasis::Xx), [f_both, f_only, f_erased]),
                    (Action::Fuse(FailureBasis::Zz), [f_both, f_only, f_erased]),
                ];
                if st.outcome_settled(n, m, k) {
                    candidates.push((Action::Singles(FailureBasis::Xx), [s_only, 0.0, s_erased]));
                    candidates.push((Action::Singles(FailureBasis::Zz), [s_only, 0.0, s_erased]));
                }
                let mut best = f64::NEG_INFINITY;
                for (action, probs) in candidates {
                    let (on_got, on_fail) = action.flags();
                    let branches = [on_got, on_fail, (false, false)];
                    let mut v = 0.0;
                    for (p, (gx, gz)) in probs.iter().zip(branches) {
                        if *p > 0.0 {
                            let next = st.apply(m, k, gx, gz);
                            v += p * value[(k + 1) * 16 + next.encode()];
                        }
                    }
                    if v > best {
                        best = v;
                        actions[k * 16 + bits] = action;
                    }
                }
                value[k * 16 + bits] = best;
            }
        }
        LocalPolicy { n, m, exact: Some(actions) }
    }

    fn action(&self, k: usize, st: RunState) -> Action {
        if let Some(table) = &self.exact {
            return table[k * 16 + st.encode()];
        }
        let (n, m) = (self.n, self.m);
        let i = k / m;
        let xx_impossible = !st.done_complete && !st.cur_perfect && i == n - 1;
        if st.done_complete || xx_impossible {
            return Action::Singles(FailureBasis::Zz);
        }
        let zz_certain = st.done_all_zz && st.cur_has_zz && i == n - 1;
        if zz_certain || !st.done_all_zz {
            return Action::Singles(FailureBasis::Xx);
        }
        if !st.cur_has_zz && (k % m == m - 1 || !st.cur_perfect) {
            Action::Fuse(FailureBasis::Zz)
        } else {
            Action::Fuse(FailureBasis::Xx)
        }
    }
}

// ---------------------------------------------------------------------------
// Exact distribution and sampling.

/// Enumeration limit for the exact oracle; patterns grow as 4^(n*m).
const ENUMERATION_LIMIT: u32 = 10;

/// Exact outcome distribution of one encoded fusion by enumeration of all
/// loss/success/failure patterns over the n*m physical fusions, scoring
/// each pattern with [`recoverable`] on the fusion register.
pub fn exact_encoded_fusion_dist(
    code: &ShorCode,
    strategy: &FusionStrategy,
    model: &PhysicalFusionModel,
) -> Result<ExactDist> {
    encoded_fusion_dist::<BigRational>(code, strategy, model)
}

/// Generic-scalar version of [`exact_encoded_fusion_dist`].
pub fn encoded_fusion_dist<P: Prob>(
    code: &ShorCode,
    strategy: &FusionStrategy,
    model: &PhysicalFusionModel,
) -> Result<FusionOutcomeDist<P>> {
    strategy.validate(code)?;
    let nm = code.n() * code.m();
    if nm > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit(format!(
            "exact distribution enumerates 4^(n*m) patterns; n*m = {nm} exceeds {ENUMERATION_LIMIT}"
        )));
    }
    let policy = match strategy {
        FusionStrategy::LocalAdaptive => Some(LocalPolicy::new(code, model)),
        _ => None,
    };
    let mut walk = DistWalk {
        code,
        strategy,
        policy,
        m: code.m() as usize,
        nm: nm as usize,
        fusion: model.fusion_branches::<P>(),
        singles: model.singles_branches::<P>(),
        half: P::from_f64(0.5),
        score_cache: HashMap::new(),
        acc: FusionOutcomeDist::zero(),
    };
    walk.step(0, 0, 0, RunState::start(), P::one());
    Ok(walk.acc)
}

struct DistWalk<'a, P> {
    code: &'a ShorCode,
    strategy: &'a FusionStrategy,
    policy: Option<LocalPolicy>,
    m: usize,
    nm: usize,
    fusion: (P, P, P),
    singles: (P, P),
    half: P,
    score_cache: HashMap<(u32, u32), (bool, bool)>,
    acc: FusionOutcomeDist<P>,
}

impl<P: Prob> DistWalk<'_, P> {
    fn step(&mut self, k: usize, xx_mask: u32, zz_mask: u32, st: RunState, weight: P) {
        if weight.is_zero() {
            return;
        }
        if k == self.nm {
            let (xx, zz) = *self
                .score_cache
                .entry((xx_mask, zz_mask))
                .or_insert_with(|| register_recovered(self.code, xx_mask, zz_mask));
            self.acc.add_weight(EncodedOutcome::from_flags(xx, zz), weight);
            return;
        }
        let (f_both, f_only, f_erased) = self.fusion.clone();
        let (s_only, s_erased) = self.singles.clone();
        // (weight, xx measured, zz measured) per branch at this slot.
        let mut branches: Vec<(P, bool, bool)> = Vec::with_capacity(4);
        match self.strategy {
            FusionStrategy::RandomizedFailure => {
                branches.push((f_both, true, true));
                branches.push((f_only.clone() * self.half.clone(), true, false));
                branches.push((f_only * self.half.clone(), false, true));
                branches.push((f_erased, false, false));
            }
            FusionStrategy::StaticBias(assignment) => {
                let b = assignment[k];
                branches.push((f_both, true, true));
                branches.push((f_only, b == FailureBasis::Xx, b == FailureBasis::Zz));
                branches.push((f_erased, false, false));
            }
            FusionStrategy::LocalAdaptive => {
                let action = self.policy.as_ref().expect("policy built").action(k, st);
                let (on_got, on_fail) = action.flags();
                match action {
                    Action::Fuse(_) => {
                        branches.push((f_both, on_got.0, on_got.1));
                        branches.push((f_only, on_fail.0, on_fail.1));
                        branches.push((f_erased, false, false));
                    }
                    Action::Singles(_) => {
                        branches.push((s_only, on_got.0, on_got.1));
                        branches.push((s_erased, false, false));
                    }
                }
            }
        }
        for (p, gx, gz) in branches {
            let bit = 1u32 << k;
            self.step(
                k + 1,
                if gx { xx_mask | bit } else { xx_mask },
                if gz { zz_mask | bit } else { zz_mask },
                st.apply(self.m, k, gx, gz),
                weight.clone() * p,
            );
        }
    }
}

/// Prepared sampler for repeated encoded-fusion draws. Validates the
/// strategy and builds the adaptive policy once, so Monte Carlo loops that
/// draw one outcome per lattice site do not pay the setup cost per draw.
#[derive(Debug, Clone)]
pub struct EncodedFusionSampler {
    n: usize,
    m: usize,
    strategy: FusionStrategy,
    model: PhysicalFusionModel,
    policy: Option<LocalPolicy>,
}

impl EncodedFusionSampler {
    pub fn new(
        code: &ShorCode,
        strategy: &FusionStrategy,
        model: &PhysicalFusionModel,
    ) -> Result<Self> {
        strategy.validate(code)?;
        let policy = match strategy {
            FusionStrategy::LocalAdaptive => Some(LocalPolicy::new(code, model)),
            _ => None,
        };
        Ok(EncodedFusionSampler {
            n: code.n() as usize,
            m: code.m() as usize,
            strategy: strategy.clone(),
            model: *model,
            policy,
        })
    }

    /// Physical fusions run sequentially in block-major order; the adaptive
    /// strategy applies its feedforward policy per slot.
    pub fn draw(&self, rng: &mut impl Rng) -> EncodedOutcome {
        let mut st = RunState::start();
        for k in 0..self.n * self.m {
            let action = match &self.strategy {
                FusionStrategy::RandomizedFailure => Action::Fuse(if rng.gen_bool(0.5) {
                    FailureBasis::Xx
                } else {
                    FailureBasis::Zz
                }),
                FusionStrategy::StaticBias(assignment) => Action::Fuse(assignment[k]),
                FusionStrategy::LocalAdaptive => {
                    self.policy.as_ref().expect("policy built").action(k, st)
                }
            };
            let (on_got, on_fail) = action.flags();
            let (gx, gz) = match action {
                Action::Fuse(b) => match physical_fusion_outcome(&self.model, b, rng) {
                    PhysicalOutcome::Both => on_got,
                    PhysicalOutcome::BasisOnly => on_fail,
                    PhysicalOutcome::Erased => (false, false),
                },
                Action::Singles(_) => {
                    if physical_singles_outcome(&self.model, rng) {
                        on_got
                    } else {
                        (false, false)
                    }
                }
            };
            st = st.apply(self.m, k, gx, gz);
        }
        // The folded run state is the structural recovery rule, the fast dual
        // of the elimination route used by the exact oracle.
        EncodedOutcome::from_flags(st.done_complete, st.done_all_zz)
    }
}

/// One Monte Carlo draw of an encoded fusion, consistent with
/// [`exact_encoded_fusion_dist`].
pub fn sample_encoded_fusion(
    code: &ShorCode,
    strategy: &FusionStrategy,
    model: &PhysicalFusionModel,
    rng: &mut impl Rng,
) -> Result<EncodedOutcome> {
    Ok(EncodedFusionSampler::new(code, strategy, model)?.draw(rng))
}
