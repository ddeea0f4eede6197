//! Graph states, resource-state families, and {n,m} Shor code parameters.

use crate::error::{Error, Result};
use crate::gf2::BitRow;

/// Undirected simple graph over dense qubit identifiers `0..num_qubits`,
/// interpreted as a graph state.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GraphState {
    num_qubits: usize,
    adj: Vec<BitRow>,
}

impl GraphState {
    /// Edgeless graph on `n` qubits.
    pub fn new(n: usize) -> Self {
        GraphState {
            num_qubits: n,
            adj: (0..n).map(|_| BitRow::zeros(n)).collect(),
        }
    }

    pub fn with_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut g = GraphState::new(n);
        for &(u, v) in edges {
            g.add_edge(u as usize, v as usize)?;
        }
        Ok(g)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_pair(u, v)?;
        if self.adj[u].get(v) {
            return Err(Error::InvalidGraph(format!("duplicate edge {u}-{v}")));
        }
        self.adj[u].set(v, true);
        self.adj[v].set(u, true);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_pair(u, v)?;
        if !self.adj[u].get(v) {
            return Err(Error::InvalidGraph(format!("no edge {u}-{v} to remove")));
        }
        self.adj[u].set(v, false);
        self.adj[v].set(u, false);
        Ok(())
    }

    /// Flip edge u-v; used by local complementation.
    pub fn toggle_edge(&mut self, u: usize, v: usize) {
        debug_assert!(u != v);
        self.adj[u].toggle(v);
        self.adj[v].toggle(u);
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<()> {
        if u == v {
            return Err(Error::InvalidGraph(format!("self-loop at {u}")));
        }
        if u >= self.num_qubits || v >= self.num_qubits {
            return Err(Error::InvalidGraph(format!(
                "edge {u}-{v} out of range for {} qubits",
                self.num_qubits
            )));
        }
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_qubits && v < self.num_qubits && u != v && self.adj[u].get(v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].ones()
    }

    /// Adjacency row of `v` as a bit row over all qubits.
    pub fn adjacency_row(&self, v: usize) -> &BitRow {
        &self.adj[v]
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(|r| r.count_ones()).sum::<usize>() / 2
    }

    /// Edges as ascending (u, v) pairs with u < v.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for u in 0..self.num_qubits {
            for v in self.adj[u].ones() {
                if v > u {
                    out.push((u as u32, v as u32));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        if self.num_qubits == 0 {
            return false;
        }
        let mut seen = BitRow::zeros(self.num_qubits);
        let mut stack = vec![0usize];
        seen.set(0, true);
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for w in self.adj[v].ones() {
                if !seen.get(w) {
                    seen.set(w, true);
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.num_qubits
    }

    /// Independent cycle count E - V + C (cyclomatic number).
    pub fn cyclomatic_number(&self) -> usize {
        let mut seen = BitRow::zeros(self.num_qubits);
        let mut components = 0;
        for s in 0..self.num_qubits {
            if seen.get(s) {
                continue;
            }
            components += 1;
            let mut stack = vec![s];
            seen.set(s, true);
            while let Some(v) = stack.pop() {
                for w in self.adj[v].ones() {
                    if !seen.get(w) {
                        seen.set(w, true);
                        stack.push(w);
                    }
                }
            }
        }
        self.num_edges() + components - self.num_qubits
    }

    /// Edge-list text form: first line `qubits N`, then one `u v` line per
    /// edge, ascending.
    pub fn to_edge_list_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.num_qubits);
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn from_edge_list_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty edge list".into()))?;
        let n: usize = header
            .strip_prefix("qubits ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header line: {header:?}")))?;
        let mut g = GraphState::new(n);
        for line in lines {
            let mut it = line.split_whitespace();
            let (u, v) = match (it.next(), it.next(), it.next()) {
                (Some(u), Some(v), None) => (u, v),
                _ => return Err(Error::Parse(format!("bad edge line: {line:?}"))),
            };
            let u: usize = u
                .parse()
                .map_err(|_| Error::Parse(format!("bad qubit id: {u:?}")))?;
            let v: usize = v
                .parse()
                .map_err(|_| Error::Parse(format!("bad qubit id: {v:?}")))?;
            g.add_edge(u, v)?;
        }
        Ok(g)
    }
}

impl std::fmt::Debug for GraphState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GraphState(n={}, edges={:?})", self.num_qubits, self.edges())
    }
}

/// {n,m} Shor / quantum parity code: n X-repetition blocks of m qubits each.
///
/// The encoded operators are X over one full block and one Z per block; {1,1}
/// is the trivial encoding.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ShorCode {
    n: u32,
    m: u32,
}

impl ShorCode {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidCode(format!(
                "{{n,m}} code requires n,m >= 1, got {{{n},{m}}}"
            )));
        }
        Ok(ShorCode { n, m })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Physical qubits per encoded qubit.
    pub fn block_size(&self) -> u64 {
        self.n as u64 * self.m as u64
    }

    pub fn is_trivial(&self) -> bool {
        self.n == 1 && self.m == 1
    }
}

impl std::fmt::Display for ShorCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{},{}}}", self.n, self.m)
    }
}

/// Named resource-state families. EightLd optionally carries an explicit
/// edge-list override for experimenting with other 8-vertex structures.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ResourceFamily {
    FourStar,
    SixRing,
    EightLd(Option<Vec<(u32, u32)>>),
    BellPair,
}

impl ResourceFamily {
    pub fn base_size(&self) -> usize {
        match self {
            ResourceFamily::FourStar => 4,
            ResourceFamily::SixRing => 6,
            ResourceFamily::EightLd(_) => 8,
            ResourceFamily::BellPair => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ResourceFamily::FourStar => "fourstar",
            ResourceFamily::SixRing => "sixring",
            ResourceFamily::EightLd(_) => "eightld",
            ResourceFamily::BellPair => "bellpair",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "fourstar" | "4star" => Ok(ResourceFamily::FourStar),
            "sixring" | "6ring" => Ok(ResourceFamily::SixRing),
            "eightld" | "8ld" => Ok(ResourceFamily::EightLd(None)),
            "bellpair" | "bell" => Ok(ResourceFamily::BellPair),
            _ => Err(Error::InvalidParameter(format!(
                "unknown family {name:?} (expected fourstar|sixring|eightld|bellpair)"
            ))),
        }
    }
}

/// Construct the base (unencoded) resource state of a family.
///
/// FourStar is the star on 4 vertices (locally Clifford equivalent to the
/// 4-qubit GHZ state); SixRing is the 6-cycle; BellPair a single edge. The
/// EightLd default is the 8-vertex path: the reference preparation cost of
/// the family is only consistent with an 8-vertex tree, and every 8-vertex
/// tree we checked attains the same optimized cost, so the simplest one is
/// shipped. An explicit override replaces it.
pub fn build_base_state(family: &ResourceFamily) -> Result<GraphState> {
    match family {
        ResourceFamily::FourStar => GraphState::with_edges(4, &[(0, 1), (0, 2), (0, 3)]),
        ResourceFamily::SixRing => {
            GraphState::with_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)])
        }
        ResourceFamily::BellPair => GraphState::with_edges(2, &[(0, 1)]),
        ResourceFamily::EightLd(None) => GraphState::with_edges(
            8,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)],
        ),
        ResourceFamily::EightLd(Some(edges)) => {
            let g = GraphState::with_edges(8, edges)?;
            if !g.is_connected() {
                return Err(Error::InvalidGraph(
                    "eightld override must be connected on 8 qubits".into(),
                ));
            }
            Ok(g)
        }
    }
}

/// Total photon count of an encoded resource state.
///
/// `photons_per_qubit` is 1 (single-rail accounting) or 2 (dual-rail).
pub fn photon_count(family: &ResourceFamily, code: &ShorCode, photons_per_qubit: u32) -> Result<u64> {
    if !(1..=2).contains(&photons_per_qubit) {
        return Err(Error::InvalidParameter(format!(
            "photons_per_qubit must be 1 or 2, got {photons_per_qubit}"
        )));
    }
    Ok(family.base_size() as u64 * code.block_size() * photons_per_qubit as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_have_documented_shapes() {
        let star = build_base_state(&ResourceFamily::FourStar).unwrap();
        assert_eq!(star.num_qubits(), 4);
        assert_eq!(star.num_edges(), 3);
        assert_eq!(star.degree(0), 3);

        let ring = build_base_state(&ResourceFamily::SixRing).unwrap();
        assert_eq!(ring.num_qubits(), 6);
        assert_eq!(
            ring.edges(),
            vec![(0, 1), (0, 5), (1, 2), (2, 3), (3, 4), (4, 5)]
        );
        assert!((0..6).all(|v| ring.degree(v) == 2));

        let bell = build_base_state(&ResourceFamily::BellPair).unwrap();
        assert_eq!((bell.num_qubits(), bell.num_edges()), (2, 1));

        let ld = build_base_state(&ResourceFamily::EightLd(None)).unwrap();
        assert_eq!(ld.num_qubits(), 8);
        assert!(ld.is_connected());
        assert_eq!(ld.cyclomatic_number(), 0);
        assert_eq!(ld.num_edges(), 7);
    }

    #[test]
    fn eightld_override_is_validated() {
        let ok = ResourceFamily::EightLd(Some(vec![
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 6),
            (6, 7),
        ]));
        assert!(build_base_state(&ok).is_ok());
        let disconnected = ResourceFamily::EightLd(Some(vec![(0, 1), (2, 3), (4, 5), (6, 7)]));
        assert!(build_base_state(&disconnected).is_err());
        let out_of_range = ResourceFamily::EightLd(Some(vec![(0, 9)]));
        assert!(build_base_state(&out_of_range).is_err());
    }

    #[test]
    fn graph_validation_rejects_bad_edges() {
        let mut g = GraphState::new(3);
        assert!(g.add_edge(0, 0).is_err());
        assert!(g.add_edge(0, 3).is_err());
        g.add_edge(0, 1).unwrap();
        assert!(g.add_edge(1, 0).is_err());
        assert!(g.remove_edge(1, 2).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = build_base_state(&ResourceFamily::EightLd(None)).unwrap();
        let text = g.to_edge_list_text();
        assert!(text.starts_with("qubits 8\n"));
        let h = GraphState::from_edge_list_text(&text).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn photon_count_matches_reference_rows() {
        let c22 = ShorCode::new(2, 2).unwrap();
        let c74 = ShorCode::new(7, 4).unwrap();
        let c11 = ShorCode::new(1, 1).unwrap();
        assert_eq!(
            photon_count(&ResourceFamily::EightLd(None), &c22, 1).unwrap(),
            32
        );
        assert_eq!(photon_count(&ResourceFamily::BellPair, &c11, 1).unwrap(), 2);
        assert_eq!(photon_count(&ResourceFamily::SixRing, &c74, 1).unwrap(), 168);
        assert_eq!(photon_count(&ResourceFamily::FourStar, &c22, 2).unwrap(), 32);
        assert!(photon_count(&ResourceFamily::FourStar, &c22, 3).is_err());
    }

    #[test]
    fn shor_code_rejects_zero() {
        assert!(ShorCode::new(0, 1).is_err());
        assert!(ShorCode::new(1, 0).is_err());
        assert!(ShorCode::new(1, 1).unwrap().is_trivial());
    }
}
