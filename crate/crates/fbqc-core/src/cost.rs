//! Resource-state preparation costs in 3GHZ units.
//!
//! A schedule is a binary merge tree whose leaves are 3-qubit GHZ states
//! and whose internal nodes fuse two fragments with `n >= 1` simultaneous
//! type-II fusions. Each fusion destroys its two photons, so a fragment
//! built from `m` leaves with `f` fusions has `3m - 2f` surviving qubits.
//! The cost recursion `(C_L + C_R) * 2^n` charges repeat-until-success
//! preparation at fusion success probability 1/2.
//!
//! Fusions are evaluated exactly by stabilizer projection on the tableau
//! of the disjoint GHZ union, so fused qubits may have any degree in their
//! fragment. A fusion is a destructive Bell measurement, i.e. a tensor
//! contraction of one leg of each fragment through a single-qubit Clifford
//! fixed by the mode and rotations. [`apply_merge`] is the narrower
//! leaf-fusion rewrite kept for its closed-form graph rule.

use crate::error::{Error, Result};
use crate::graph::GraphState;
use crate::tableau::{graph_to_tableau, PauliOp, StabilizerTableau};

/// Measurement basis of one type-II fusion on qubit pair `(a, b)`.
///
/// The two variants differ by a Hadamard on one side. On GHZ legs `Graft`
/// is the plain wire contraction (merges the two GHZ states into one) and
/// `Join` is the Hadamard-decorated contraction (in graph form it joins
/// the neighborhoods of `a` and `b` by a complete bipartite subgraph).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum MergeMode {
    /// Measure `X_a Z_b` and `Z_a X_b`.
    Join,
    /// Measure `X_a X_b` and `Z_a Z_b`.
    Graft,
}

/// Single-qubit Clifford applied to the measured operator pair on one side
/// of a fusion, as an axis permutation of {X, Y, Z}.
///
/// Rotating the fusion basis at a qubit is equivalent to rewriting its
/// fragment by local complementations before fusing: local Cliffords
/// commute through the projection onto the survivors, where they are free.
/// The six variants cover every axis permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
pub enum LocalRot {
    /// X -> X, Z -> Z.
    #[default]
    I,
    /// X <-> Z.
    H,
    /// X -> Y, Z -> Z.
    S,
    /// X -> Y -> Z -> X.
    Hs,
    /// X -> Z -> Y -> X.
    Sh,
    /// X -> X, Z <-> Y.
    Hsh,
}

impl LocalRot {
    pub const ALL: [LocalRot; 6] = [
        LocalRot::I,
        LocalRot::H,
        LocalRot::S,
        LocalRot::Hs,
        LocalRot::Sh,
        LocalRot::Hsh,
    ];

    /// Conjugate `op` by this rotation at qubit `q`.
    fn apply(self, op: &mut PauliOp, q: usize) {
        match self {
            LocalRot::I => {}
            LocalRot::H => op.conj_h(q),
            LocalRot::S => op.conj_s(q),
            LocalRot::Hs => {
                op.conj_h(q);
                op.conj_s(q);
            }
            LocalRot::Sh => {
                op.conj_s(q);
                op.conj_h(q);
            }
            LocalRot::Hsh => {
                op.conj_h(q);
                op.conj_s(q);
                op.conj_h(q);
            }
        }
    }
}

/// One fusion inside a merge node, identified by global qubit ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct MergePair {
    pub left_qubit: u32,
    pub right_qubit: u32,
    pub mode: MergeMode,
    #[serde(default)]
    pub left_rot: LocalRot,
    #[serde(default)]
    pub right_rot: LocalRot,
}

impl MergePair {
    /// Fusion in the default (unrotated) basis.
    pub fn new(left_qubit: u32, right_qubit: u32, mode: MergeMode) -> Self {
        Self {
            left_qubit,
            right_qubit,
            mode,
            left_rot: LocalRot::I,
            right_rot: LocalRot::I,
        }
    }
}

/// Node of a merge tree, stored in an arena indexed by `usize`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum MergeNode {
    /// One 3GHZ state; `qubits` are its three global ids.
    Leaf { qubits: [u32; 3] },
    /// Fuse the fragments below `left` and `right`.
    Merge {
        left: usize,
        right: usize,
        pairs: Vec<MergePair>,
    },
}

/// Binary merge tree describing a preparation schedule.
#[derive(Debug, Clone, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct MergeTree {
    nodes: Vec<MergeNode>,
    root: Option<usize>,
}

/// Fragment produced by folding a subtree: a graph state plus the global
/// id of each surviving qubit, in graph index order.
#[derive(Debug, Clone)]
pub struct Fragment {
    pub graph: GraphState,
    pub qubit_ids: Vec<u32>,
}

impl MergeTree {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a leaf; returns its node index.
    pub fn add_leaf(&mut self, qubits: [u32; 3]) -> usize {
        self.nodes.push(MergeNode::Leaf { qubits });
        self.nodes.len() - 1
    }

    /// Add a merge node over two existing nodes; returns its index.
    pub fn add_merge(&mut self, left: usize, right: usize, pairs: Vec<MergePair>) -> usize {
        self.nodes.push(MergeNode::Merge { left, right, pairs });
        self.nodes.len() - 1
    }

    pub fn set_root(&mut self, node: usize) {
        self.root = Some(node);
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn node(&self, idx: usize) -> Option<&MergeNode> {
        self.nodes.get(idx)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Number of leaves under the root (3GHZ states consumed).
    pub fn num_leaves(&self) -> usize {
        self.root
            .map(|r| self.count_under(r, &mut |n| matches!(n, MergeNode::Leaf { .. })))
            .unwrap_or(0)
    }

    /// Total fusions under the root.
    pub fn num_fusions(&self) -> usize {
        self.root
            .map(|r| {
                let mut acc = 0usize;
                self.visit(r, &mut |n| {
                    if let MergeNode::Merge { pairs, .. } = n {
                        acc += pairs.len();
                    }
                });
                acc
            })
            .unwrap_or(0)
    }

    fn count_under(&self, node: usize, pred: &mut dyn FnMut(&MergeNode) -> bool) -> usize {
        let mut acc = 0usize;
        self.visit(node, &mut |n| {
            if pred(n) {
                acc += 1;
            }
        });
        acc
    }

    fn visit(&self, node: usize, f: &mut dyn FnMut(&MergeNode)) {
        f(&self.nodes[node]);
        if let MergeNode::Merge { left, right, .. } = self.nodes[node] {
            self.visit(left, f);
            self.visit(right, f);
        }
    }

    /// Validate tree shape: a root exists, children precede parents, every
    /// node under the root is visited exactly once (no sharing), and each
    /// merge lists at least one pair.
    fn check_shape(&self) -> Result<usize> {
        let root = self
            .root
            .ok_or_else(|| Error::InvalidSchedule("merge tree has no root".into()))?;
        if root >= self.nodes.len() {
            return Err(Error::InvalidSchedule(format!(
                "root index {root} out of range"
            )));
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![root];
        while let Some(idx) = stack.pop() {
            if seen[idx] {
                return Err(Error::InvalidSchedule(format!(
                    "node {idx} reachable twice; tree must not share subtrees"
                )));
            }
            seen[idx] = true;
            if let MergeNode::Merge {
                left, right, pairs, ..
            } = &self.nodes[idx]
            {
                if *left >= idx || *right >= idx {
                    return Err(Error::InvalidSchedule(format!(
                        "merge node {idx} references a later node"
                    )));
                }
                if pairs.is_empty() {
                    return Err(Error::InvalidSchedule(format!(
                        "merge node {idx} lists no fusions"
                    )));
                }
                stack.push(*left);
                stack.push(*right);
            }
        }
        Ok(root)
    }
}

/// Exact schedule cost in 3GHZ units: leaves cost 1, a merge with `n`
/// fusions costs `(C_L + C_R) * 2^n`. Errors on overflow past `u128`.
pub fn schedule_cost(tree: &MergeTree) -> Result<u128> {
    let root = tree.check_shape()?;
    cost_rec(tree, root)
}

fn cost_rec(tree: &MergeTree, node: usize) -> Result<u128> {
    match &tree.nodes[node] {
        MergeNode::Leaf { .. } => Ok(1),
        MergeNode::Merge {
            left, right, pairs, ..
        } => {
            let cl = cost_rec(tree, *left)?;
            let cr = cost_rec(tree, *right)?;
            let sum = cl
                .checked_add(cr)
                .ok_or_else(|| Error::InvalidSchedule("cost overflow".into()))?;
            let n = u32::try_from(pairs.len())
                .map_err(|_| Error::InvalidSchedule("too many fusions in one merge".into()))?;
            sum.checked_shl(n)
                .filter(|_| n < 128)
                .ok_or_else(|| Error::InvalidSchedule("cost overflow".into()))
        }
    }
}

/// Lower bound on the cost of any schedule producing `s` surviving qubits:
/// `(s - 2)^2`. Rejects `s < 3` (a single 3GHZ is the smallest fragment).
pub fn lower_bound(s: u64) -> Result<u128> {
    if s < 3 {
        return Err(Error::InvalidParameter(format!(
            "fragment size {s} below the 3-qubit minimum"
        )));
    }
    let d = u128::from(s) - 2;
    Ok(d * d)
}

/// A fusion between two fragments addressed by local graph indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusionSpec {
    pub left: usize,
    pub right: usize,
    pub mode: MergeMode,
    pub left_rot: LocalRot,
    pub right_rot: LocalRot,
}

impl FusionSpec {
    /// Fusion in the default (unrotated) basis.
    pub fn new(left: usize, right: usize, mode: MergeMode) -> Self {
        Self {
            left,
            right,
            mode,
            left_rot: LocalRot::I,
            right_rot: LocalRot::I,
        }
    }

    pub fn rotated(mut self, left_rot: LocalRot, right_rot: LocalRot) -> Self {
        self.left_rot = left_rot;
        self.right_rot = right_rot;
        self
    }
}

/// Fuse two disjoint graph-state fragments by exact stabilizer projection.
///
/// Fused qubits must be distinct within each side. Returns the post-fusion
/// graph on the survivors (left survivors first, then right, each in
/// ascending original order). The measurement outcome signs are taken
/// positive; other outcomes differ by Pauli byproducts, which
/// up-to-local-Clifford comparisons absorb.
pub fn fuse_states(
    left: &GraphState,
    right: &GraphState,
    pairs: &[FusionSpec],
) -> Result<GraphState> {
    if pairs.is_empty() {
        return Err(Error::InvalidSchedule("no fusions listed".into()));
    }
    let nl = left.num_qubits();
    let nr = right.num_qubits();
    let total = nl + nr;
    let mut used_l = vec![false; nl];
    let mut used_r = vec![false; nr];
    for p in pairs {
        let (a, b) = (p.left, p.right);
        if a >= nl || b >= nr {
            return Err(Error::InvalidSchedule(format!(
                "fused pair ({a}, {b}) out of range"
            )));
        }
        if std::mem::replace(&mut used_l[a], true) || std::mem::replace(&mut used_r[b], true) {
            return Err(Error::InvalidSchedule(
                "qubit fused more than once in a single merge".into(),
            ));
        }
    }
    if 2 * pairs.len() >= total {
        return Err(Error::InvalidSchedule(
            "fusions would consume every qubit".into(),
        ));
    }
    let mut union = GraphState::new(total);
    for (u, v) in left.edges() {
        union.add_edge(u as usize, v as usize)?;
    }
    for (u, v) in right.edges() {
        union.add_edge(u as usize + nl, v as usize + nl)?;
    }
    let mut tab = graph_to_tableau(&union);
    for p in pairs {
        let (a, b) = (p.left, p.right + nl);
        let (mut m1, mut m2) = match p.mode {
            MergeMode::Join => (
                PauliOp::from_support(total, &[a], &[b]),
                PauliOp::from_support(total, &[b], &[a]),
            ),
            MergeMode::Graft => (
                PauliOp::from_support(total, &[a, b], &[]),
                PauliOp::from_support(total, &[], &[a, b]),
            ),
        };
        for m in [&mut m1, &mut m2] {
            p.left_rot.apply(m, a);
            p.right_rot.apply(m, b);
        }
        tab.measure_pauli(&m1);
        tab.measure_pauli(&m2);
    }
    let discard: Vec<usize> = pairs.iter().flat_map(|p| [p.left, p.right + nl]).collect();
    let reduced = tab.discard_qubits(&discard)?;
    let (graph, _frame) = reduced.to_graph_form()?;
    Ok(graph)
}

/// Merge two fragments by fusing pairs of degree-1 qubits.
///
/// For each pair `(a, b)`, qubit `a` of `left` and qubit `b` of `right`
/// are measured out and an edge is added between `a`'s unique neighbor and
/// `b`'s unique neighbor. Survivor indices are left survivors first, then
/// right, each in ascending original order.
///
/// Errors when a fused qubit has degree != 1, a qubit is fused twice, the
/// fusion would duplicate an edge, or two fused qubits are adjacent.
pub fn apply_merge(
    left: &GraphState,
    right: &GraphState,
    pairs: &[(usize, usize)],
) -> Result<GraphState> {
    if pairs.is_empty() {
        return Err(Error::InvalidSchedule("no fusions listed".into()));
    }
    let nl = left.num_qubits();
    let nr = right.num_qubits();
    let mut used_l = vec![false; nl];
    let mut used_r = vec![false; nr];
    for &(a, b) in pairs {
        if a >= nl || b >= nr {
            return Err(Error::InvalidSchedule(format!(
                "fused pair ({a}, {b}) out of range"
            )));
        }
        if left.degree(a) != 1 || right.degree(b) != 1 {
            return Err(Error::InvalidSchedule(format!(
                "fused pair ({a}, {b}) touches a qubit of degree != 1"
            )));
        }
        if std::mem::replace(&mut used_l[a], true) || std::mem::replace(&mut used_r[b], true) {
            return Err(Error::InvalidSchedule(
                "qubit fused more than once in a single merge".into(),
            ));
        }
    }
    // Unique neighbors exist by the degree-1 check.
    let anchor = |g: &GraphState, q: usize| g.neighbors(q).next().expect("degree-1 qubit");
    for &(a, b) in pairs {
        let (alpha, beta) = (anchor(left, a), anchor(right, b));
        if used_l[alpha] || used_r[beta] {
            return Err(Error::InvalidSchedule(format!(
                "fused pair ({a}, {b}) anchors on another fused qubit"
            )));
        }
    }
    let mut seen_links = std::collections::HashSet::new();
    for &(a, b) in pairs {
        if !seen_links.insert((anchor(left, a), anchor(right, b))) {
            return Err(Error::InvalidSchedule(
                "two fusions would create the same edge".into(),
            ));
        }
    }
    let keep_l: Vec<usize> = (0..nl).filter(|&q| !used_l[q]).collect();
    let keep_r: Vec<usize> = (0..nr).filter(|&q| !used_r[q]).collect();
    let mut map_l = vec![usize::MAX; nl];
    let mut map_r = vec![usize::MAX; nr];
    for (new, &old) in keep_l.iter().enumerate() {
        map_l[old] = new;
    }
    for (new, &old) in keep_r.iter().enumerate() {
        map_r[old] = keep_l.len() + new;
    }
    let mut out = GraphState::new(keep_l.len() + keep_r.len());
    for (u, v) in left.edges() {
        let (u, v) = (u as usize, v as usize);
        if !used_l[u] && !used_l[v] {
            out.add_edge(map_l[u], map_l[v])?;
        }
    }
    for (u, v) in right.edges() {
        let (u, v) = (u as usize, v as usize);
        if !used_r[u] && !used_r[v] {
            out.add_edge(map_r[u], map_r[v])?;
        }
    }
    for &(a, b) in pairs {
        out.add_edge(map_l[anchor(left, a)], map_r[anchor(right, b)])?;
    }
    Ok(out)
}

/// Fold a merge tree into the graph state it prepares.
///
/// Leaves are GHZ triples (stabilizers `XXX`, `ZZI`, `IZZ`), whose three
/// legs are equivalent, unlike in the star graph form. The whole schedule
/// is evaluated on the tableau of the disjoint union, so fusion bases act
/// on the physical state directly and no graph-representative bookkeeping
/// can drift between merges. The returned fragment lists surviving global
/// ids in ascending order, with the graph relabeled to match.
pub fn fold(tree: &MergeTree) -> Result<Fragment> {
    let root = tree.check_shape()?;

    // Column layout: leaves in visit order, three columns each.
    let mut col_of = std::collections::BTreeMap::new();
    tree.visit(root, &mut |n| {
        if let MergeNode::Leaf { qubits } = n {
            for &q in qubits {
                let next = col_of.len();
                col_of.entry(q).or_insert(next);
            }
        }
    });
    let total = col_of.len();
    if total != 3 * tree.num_leaves() {
        return Err(Error::InvalidSchedule(
            "global qubit ids repeat across leaves".into(),
        ));
    }

    let mut gens = Vec::with_capacity(total);
    for t in 0..total / 3 {
        let b = 3 * t;
        gens.push(PauliOp::from_support(total, &[b, b + 1, b + 2], &[]));
        gens.push(PauliOp::from_support(total, &[], &[b, b + 1]));
        gens.push(PauliOp::from_support(total, &[], &[b + 1, b + 2]));
    }
    let mut tab = StabilizerTableau::from_parts(total, gens);

    // Walk the tree, checking that each fusion pairs one live qubit from
    // each side, and apply the measurements.
    let mut fused = Vec::new();
    let alive = fold_walk(tree, root, &col_of, &mut tab, &mut fused)?;

    let cols: Vec<usize> = fused.iter().map(|&(_, c)| c).collect();
    let reduced = tab.discard_qubits(&cols)?;
    let (graph, _frame) = reduced.to_graph_form()?;

    // Survivors in column order, then sort by global id.
    let fused_cols: std::collections::BTreeSet<usize> = cols.iter().copied().collect();
    let mut survivors: Vec<(usize, u32)> = col_of
        .iter()
        .filter(|&(_, &c)| !fused_cols.contains(&c))
        .map(|(&id, &c)| (c, id))
        .collect();
    survivors.sort_unstable();
    debug_assert_eq!(survivors.len(), alive.len());
    let mut order: Vec<usize> = (0..survivors.len()).collect();
    order.sort_by_key(|&i| survivors[i].1);
    let mut pos = vec![0usize; survivors.len()];
    for (new, &old) in order.iter().enumerate() {
        pos[old] = new;
    }
    let mut out = GraphState::new(survivors.len());
    for (u, v) in graph.edges() {
        out.add_edge(pos[u as usize], pos[v as usize])?;
    }
    let qubit_ids = order.iter().map(|&i| survivors[i].1).collect();
    Ok(Fragment {
        graph: out,
        qubit_ids,
    })
}

fn fold_walk(
    tree: &MergeTree,
    node: usize,
    col_of: &std::collections::BTreeMap<u32, usize>,
    tab: &mut StabilizerTableau,
    fused: &mut Vec<(u32, usize)>,
) -> Result<std::collections::BTreeSet<u32>> {
    match &tree.nodes[node] {
        MergeNode::Leaf { qubits } => {
            let set: std::collections::BTreeSet<u32> = qubits.iter().copied().collect();
            if set.len() != 3 {
                return Err(Error::InvalidSchedule(format!(
                    "leaf repeats a global qubit id: {qubits:?}"
                )));
            }
            Ok(set)
        }
        MergeNode::Merge { left, right, pairs } => {
            let mut la = fold_walk(tree, *left, col_of, tab, fused)?;
            let mut ra = fold_walk(tree, *right, col_of, tab, fused)?;
            if let Some(shared) = la.intersection(&ra).next() {
                return Err(Error::InvalidSchedule(format!(
                    "global qubit id {shared} appears in both fragments"
                )));
            }
            let total = tab.num_qubits();
            for p in pairs {
                if !la.remove(&p.left_qubit) {
                    return Err(Error::InvalidSchedule(format!(
                        "qubit {} not alive in left fragment",
                        p.left_qubit
                    )));
                }
                if !ra.remove(&p.right_qubit) {
                    return Err(Error::InvalidSchedule(format!(
                        "qubit {} not alive in right fragment",
                        p.right_qubit
                    )));
                }
                let (a, b) = (col_of[&p.left_qubit], col_of[&p.right_qubit]);
                let (mut m1, mut m2) = match p.mode {
                    MergeMode::Join => (
                        PauliOp::from_support(total, &[a], &[b]),
                        PauliOp::from_support(total, &[b], &[a]),
                    ),
                    MergeMode::Graft => (
                        PauliOp::from_support(total, &[a, b], &[]),
                        PauliOp::from_support(total, &[], &[a, b]),
                    ),
                };
                for m in [&mut m1, &mut m2] {
                    p.left_rot.apply(m, a);
                    p.right_rot.apply(m, b);
                }
                tab.measure_pauli(&m1);
                tab.measure_pauli(&m2);
                fused.push((p.left_qubit, a));
                fused.push((p.right_qubit, b));
            }
            la.extend(ra);
            Ok(la)
        }
    }
}

/// Check that a schedule prepares `target` up to local Cliffords, with
/// surviving global ids `0..n` mapping to target qubits in order.
pub fn validate_schedule(tree: &MergeTree, target: &GraphState) -> Result<bool> {
    let frag = fold(tree)?;
    if frag.graph.num_qubits() != target.num_qubits() {
        return Ok(false);
    }
    let expected: Vec<u32> = (0..target.num_qubits() as u32).collect();
    if frag.qubit_ids != expected {
        return Ok(false);
    }
    crate::lc::lc_equivalent(&frag.graph, target)
}

/// Photons measured per encoded fusion between two `{n, m}`-encoded
/// qubits: `2 n m`, independent of the resource family. Exposed as an
/// exact ratio of photons to fusions for downstream rate arithmetic.
pub fn photons_per_encoded_fusion(code: &crate::graph::ShorCode) -> num::rational::Ratio<u64> {
    num::rational::Ratio::new(2 * u64::from(code.n()) * u64::from(code.m()), 1)
}
