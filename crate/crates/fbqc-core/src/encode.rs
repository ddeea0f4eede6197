//! {n,m} Shor encoding of graph states, defined at the stabilizer level.
//!
//! Each logical qubit becomes n blocks of m physical qubits. The encoded
//! group is generated by the images of the base generators (logical X ->
//! X over one full block, logical Z -> one Z per block) together with the
//! code stabilizers: X over adjacent block pairs and Z on adjacent
//! positions within a block. Concatenating at the tableau level keeps the
//! result independent of graph-drawing choices; the graph form is then
//! recovered by local-Clifford reduction.

use crate::error::{Error, Result};
use crate::gf2::BitRow;
use crate::graph::{GraphState, ShorCode};
use crate::tableau::{FrameOp, PauliOp, StabilizerTableau};

/// Dense id of physical qubit (block `i`, position `j`) of logical `v`.
pub fn encoded_index(v: usize, i: u32, j: u32, code: &ShorCode) -> usize {
    debug_assert!(i < code.n() && j < code.m());
    v * code.block_size() as usize + (i * code.m() + j) as usize
}

/// The {n,m}-concatenated stabilizer group of a graph state.
pub fn concatenated_tableau(state: &GraphState, code: &ShorCode) -> Result<StabilizerTableau> {
    let base = state.num_qubits();
    if base == 0 {
        return Err(Error::InvalidGraph("cannot encode an empty state".into()));
    }
    let (n, m) = (code.n(), code.m());
    let total = base
        .checked_mul(code.block_size() as usize)
        .ok_or_else(|| Error::InvalidCode(format!("{code} encoding overflows qubit count")))?;

    let mut gens = Vec::with_capacity(total);

    // Images of the base generators: X_v Z_{N(v)} -> X over block 0 of v,
    // one Z per block of each neighbor.
    for v in 0..base {
        let mut xs = BitRow::zeros(total);
        let mut zs = BitRow::zeros(total);
        for j in 0..m {
            xs.set(encoded_index(v, 0, j, code), true);
        }
        for w in state.neighbors(v) {
            for i in 0..n {
                zs.set(encoded_index(w, i, 0, code), true);
            }
        }
        gens.push(pauli_from_rows(xs, zs));
    }

    // X-repetition stabilizers: X over blocks i and i+1.
    for v in 0..base {
        for i in 0..n.saturating_sub(1) {
            let mut xs = BitRow::zeros(total);
            for j in 0..m {
                xs.set(encoded_index(v, i, j, code), true);
                xs.set(encoded_index(v, i + 1, j, code), true);
            }
            gens.push(pauli_from_rows(xs, BitRow::zeros(total)));
        }
    }

    // Z-repetition stabilizers: Z on adjacent positions within a block.
    for v in 0..base {
        for i in 0..n {
            for j in 0..m.saturating_sub(1) {
                let mut zs = BitRow::zeros(total);
                zs.set(encoded_index(v, i, j, code), true);
                zs.set(encoded_index(v, i, j + 1, code), true);
                gens.push(pauli_from_rows(BitRow::zeros(total), zs));
            }
        }
    }

    debug_assert_eq!(gens.len(), total);
    Ok(StabilizerTableau::from_parts(total, gens))
}

fn pauli_from_rows(xs: BitRow, zs: BitRow) -> PauliOp {
    let x_support: Vec<usize> = xs.ones().collect();
    let z_support: Vec<usize> = zs.ones().collect();
    PauliOp::from_support(xs.len(), &x_support, &z_support)
}

/// Apply the {n,m} Shor encoding, returning the canonical graph form.
pub fn apply_shor_encoding(state: &GraphState, code: &ShorCode) -> Result<GraphState> {
    Ok(apply_shor_encoding_with_frame(state, code)?.0)
}

/// As [`apply_shor_encoding`], additionally returning the local-Clifford
/// frame produced by the reduction (ops that conjugate the concatenated
/// group into the returned graph's group).
pub fn apply_shor_encoding_with_frame(
    state: &GraphState,
    code: &ShorCode,
) -> Result<(GraphState, Vec<FrameOp>)> {
    let tableau = concatenated_tableau(state, code)?;
    tableau.to_graph_form()
}
