//! Embedded reference dataset, cost-reproduction report, and figure data.
//!
//! The reference table is a transcription of a published survey of
//! loss-per-photon thresholds across fusion-network schemes. It is embedded
//! in source to keep the tool hermetic; a transcription audit recomputes
//! every derivable column. Rows whose local encoding is an n-qubit
//! optimized graph code (not a Shor code) carry an opaque label and are
//! plot-only. Unreferenced static-bias rows carry source "this paper".

use crate::encode::apply_shor_encoding;
use crate::error::Result;
use crate::graph::{build_base_state, ResourceFamily, ShorCode};
use crate::optimize::optimize_schedule;

// ---------------------------------------------------------------------------
// Reference dataset.

/// Local encoding of a reference row: a Shor code or an opaque label for
/// non-Shor encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceEncoding {
    Shor(u32, u32),
    Opaque(&'static str),
}

impl ReferenceEncoding {
    pub fn label(&self) -> String {
        match self {
            ReferenceEncoding::Shor(n, m) => format!("{{{n},{m}}}"),
            ReferenceEncoding::Opaque(name) => (*name).to_string(),
        }
    }

    pub fn shor(&self) -> Option<(u32, u32)> {
        match self {
            ReferenceEncoding::Shor(n, m) => Some((*n, *m)),
            ReferenceEncoding::Opaque(_) => None,
        }
    }
}

/// One row of the embedded threshold survey.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRow {
    pub adaptivity: &'static str,
    pub source_ref: &'static str,
    pub network: &'static str,
    pub unencoded_state: &'static str,
    pub encoding: ReferenceEncoding,
    pub qubit_count: u64,
    /// Loss per photon threshold as a fraction.
    pub lppt: f64,
    pub boosted: bool,
}

impl ReferenceRow {
    /// Qubits in the unencoded resource state (for `{2,1}-BP` that is a
    /// Bell pair already carrying an inner {2,1} code, so 4).
    pub fn base_qubits(&self) -> u64 {
        match self.unencoded_state {
            "8-LD" => 8,
            "6ring" => 6,
            "4star" => 4,
            "{2,1}-BP" => 4,
            other => unreachable!("unknown unencoded state {other}"),
        }
    }

    /// Photons in the resource state: one per qubit. Boosting ancillas are
    /// consumed by the fusion, not part of the state.
    pub fn photons(&self) -> u64 {
        self.qubit_count
    }

    /// Scheme identity used for figure series grouping.
    pub fn series_label(&self) -> String {
        format!("{} - {} ({})", self.adaptivity, self.network, self.source_ref)
    }

    /// Named column value, used by CLI filters.
    pub fn field(&self, key: &str) -> Option<String> {
        Some(match key {
            "adaptivity" | "method" => self.adaptivity.to_string(),
            "ref" | "source" => self.source_ref.to_string(),
            "network" => self.network.to_string(),
            "state" => self.unencoded_state.to_string(),
            "encoding" => self.encoding.label(),
            "qubits" => self.qubit_count.to_string(),
            "boosted" => if self.boosted { "boosted" } else { "unboosted" }.to_string(),
            _ => return None,
        })
    }

    /// Case- and whitespace-insensitive filter match on a named column.
    pub fn matches(&self, key: &str, value: &str) -> bool {
        let canon = |s: &str| s.to_lowercase().replace(' ', "");
        self.field(key).is_some_and(|v| canon(&v) == canon(value))
    }
}

use ReferenceEncoding as Enc;

/// (adaptivity, source, network, unencoded state, encoding, qubits,
/// threshold in percent, boosted)
const REFERENCE_TABLE: &[(&str, &str, &str, &str, Enc, u64, f64, bool)] = &[
    ("Exposure based adaptivity", "DBA,FusionComplexes", "loopy-diamond", "8-LD", Enc::Shor(2, 1), 16, 3.9, false),
    ("Exposure based adaptivity", "DBA,FusionComplexes", "loopy-diamond", "8-LD", Enc::Shor(2, 2), 32, 9.0, false),
    ("Exposure based adaptivity", "DBA,FusionComplexes", "loopy-diamond", "8-LD", Enc::Shor(4, 3), 96, 15.4, false),
    ("Exposure based adaptivity", "DBA,FusionComplexes", "loopy-diamond", "8-LD", Enc::Shor(7, 4), 224, 18.8, false),
    ("Exposure based adaptivity", "DBA", "6ring", "6ring", Enc::Shor(2, 1), 12, 2.6, false),
    ("Exposure based adaptivity", "DBA", "6ring", "6ring", Enc::Shor(2, 2), 24, 7.5, false),
    ("Exposure based adaptivity", "DBA", "6ring", "6ring", Enc::Shor(4, 3), 72, 13.9, false),
    ("Exposure based adaptivity", "DBA", "6ring", "6ring", Enc::Shor(7, 4), 168, 17.4, false),
    ("Local adaptivity", "pankovich", "4star-dual", "{2,1}-BP", Enc::Shor(2, 2), 16, 2.6, false),
    ("Local adaptivity", "pankovich", "4star-dual", "{2,1}-BP", Enc::Shor(2, 3), 24, 5.0, false),
    ("Local adaptivity", "pankovich", "4star-dual", "{2,1}-BP", Enc::Shor(2, 4), 32, 5.7, false),
    ("Local adaptivity", "pankovich", "4star-dual", "{2,1}-BP", Enc::Shor(3, 3), 36, 7.5, false),
    ("Local adaptivity", "pankovich", "4star-dual", "{2,1}-BP", Enc::Shor(4, 3), 48, 8.3, false),
    ("Local adaptivity", "pankovich", "4star-dual", "{2,1}-BP", Enc::Shor(4, 4), 64, 9.7, false),
    ("Local adaptivity", "pankovich", "4star-dual", "{2,1}-BP", Enc::Shor(5, 4), 80, 10.9, false),
    ("Local adaptivity", "pankovich", "4star-dual", "{2,1}-BP", Enc::Shor(6, 4), 96, 11.7, false),
    ("Local adaptivity", "pankovich", "4star-dual", "{2,1}-BP", Enc::Shor(7, 4), 112, 12.2, false),
    ("Local adaptivity", "bell2023optimizing", "6ring", "6ring", Enc::Opaque("4-qubit OGC"), 24, 5.7, true),
    ("Local adaptivity", "bell2023optimizing", "6ring", "6ring", Enc::Opaque("6-qubit OGC"), 36, 6.8, false),
    ("Local adaptivity", "bell2023optimizing", "6ring", "6ring", Enc::Opaque("8-qubit OGC"), 48, 9.2, false),
    ("Local adaptivity", "bell2023optimizing", "6ring", "6ring", Enc::Opaque("10-qubit OGC"), 60, 10.5, false),
    ("Local adaptivity", "songetal", "4star", "4star", Enc::Shor(2, 2), 16, 2.9, false),
    ("Local adaptivity", "songetal", "4star", "4star", Enc::Shor(2, 3), 24, 4.0, false),
    ("Local adaptivity", "songetal", "4star", "4star", Enc::Shor(2, 4), 32, 4.4, false),
    ("Local adaptivity", "songetal", "4star", "4star", Enc::Shor(3, 3), 36, 6.1, false),
    ("Local adaptivity", "songetal", "4star", "4star", Enc::Shor(4, 3), 48, 7.9, false),
    ("Local adaptivity", "songetal", "4star", "4star", Enc::Shor(5, 3), 60, 8.8, false),
    ("Local adaptivity", "songetal", "4star", "4star", Enc::Shor(6, 3), 72, 9.1, false),
    ("Local adaptivity", "songetal", "4star", "4star", Enc::Shor(5, 4), 80, 9.9, false),
    ("Local adaptivity", "songetal", "4star", "4star", Enc::Shor(6, 4), 96, 10.7, false),
    ("Local adaptivity", "songetal", "4star", "4star", Enc::Shor(7, 4), 112, 11.4, false),
    ("Local adaptivity", "songetal", "4star", "4star", Enc::Shor(10, 4), 160, 12.8, false),
    ("Local adaptivity", "songetal", "4star", "4star", Enc::Shor(9, 6), 216, 11.9, false),
    ("Local adaptivity", "songetal", "4star", "4star", Enc::Shor(17, 4), 272, 14.0, false),
    ("Local adaptivity", "songetal", "4star", "4star", Enc::Shor(14, 6), 336, 13.3, false),
    ("Local adaptivity", "songetal", "6ring", "6ring", Enc::Shor(2, 2), 24, 4.8, false),
    ("Local adaptivity", "songetal", "6ring", "6ring", Enc::Shor(2, 3), 36, 6.7, false),
    ("Local adaptivity", "songetal", "6ring", "6ring", Enc::Shor(4, 2), 48, 7.5, false),
    ("Local adaptivity", "songetal", "6ring", "6ring", Enc::Shor(3, 3), 54, 9.1, false),
    ("Local adaptivity", "songetal", "6ring", "6ring", Enc::Shor(4, 3), 72, 10.7, false),
    ("Local adaptivity", "songetal", "6ring", "6ring", Enc::Shor(5, 3), 90, 11.5, false),
    ("Local adaptivity", "songetal", "6ring", "6ring", Enc::Shor(6, 3), 108, 11.9, false),
    ("Local adaptivity", "songetal", "6ring", "6ring", Enc::Shor(5, 4), 120, 12.5, false),
    ("Local adaptivity", "songetal", "6ring", "6ring", Enc::Shor(6, 4), 144, 13.3, false),
    ("Local adaptivity", "songetal", "6ring", "6ring", Enc::Shor(7, 4), 168, 14.0, false),
    ("Local adaptivity", "songetal", "6ring", "6ring", Enc::Shor(10, 4), 240, 14.0, false),
    ("Local adaptivity", "songetal", "6ring", "6ring", Enc::Shor(9, 6), 324, 14.0, false),
    ("Local adaptivity", "songetal", "6ring", "6ring", Enc::Shor(17, 4), 408, 12.4, false),
    ("Local adaptivity", "songetal", "6ring", "6ring", Enc::Shor(12, 7), 504, 13.9, false),
    ("Statis bias arrangement", "this paper", "6ring", "6ring", Enc::Shor(2, 3), 36, 5.1, false),
    ("Statis bias arrangement", "this paper", "6ring", "6ring", Enc::Shor(3, 4), 72, 7.7, false),
    ("Statis bias arrangement", "this paper", "6ring", "6ring", Enc::Shor(4, 7), 168, 11.3, false),
    ("Statis bias arrangement", "this paper", "6ring", "6ring", Enc::Shor(5, 20), 600, 16.7, false),
    ("Statis bias arrangement", "this paper", "6ring", "6ring", Enc::Shor(7, 100), 4200, 20.8, false),
    ("Statis bias arrangement", "this paper", "6ring", "6ring", Enc::Shor(10, 1000), 60000, 23.6, false),
    ("Statis bias arrangement", "this paper", "6ring", "6ring", Enc::Shor(13, 10000), 780000, 24.9, false),
    ("Statis bias arrangement", "this paper", "6ring", "6ring", Enc::Shor(16, 100000), 9600000, 25.6, false),
    ("Randomized failure", "FBQC", "6ring", "6ring", Enc::Shor(2, 2), 24, 2.7, true),
    ("Randomized failure", "FBQC", "6ring", "6ring", Enc::Shor(2, 3), 36, 3.5, true),
    ("Randomized failure", "FBQC", "6ring", "6ring", Enc::Shor(3, 4), 72, 4.8, true),
    ("Randomized failure", "FBQC", "6ring", "6ring", Enc::Shor(4, 7), 168, 5.9, true),
    ("Randomized failure", "FBQC", "6ring", "6ring", Enc::Shor(5, 20), 600, 8.1, false),
    ("Randomized failure", "FBQC", "6ring", "6ring", Enc::Shor(7, 100), 4200, 11.0, false),
    ("Randomized failure", "FBQC", "6ring", "6ring", Enc::Shor(10, 1000), 60000, 13.1, false),
    ("Randomized failure", "FBQC", "6ring", "6ring", Enc::Shor(13, 10000), 780000, 13.9, false),
    ("Randomized failure", "FBQC", "6ring", "6ring", Enc::Shor(16, 100000), 9600000, 14.3, false),
];

/// The embedded threshold survey (thresholds converted to fractions).
pub fn load_reference_table() -> Vec<ReferenceRow> {
    REFERENCE_TABLE
        .iter()
        .map(
            |&(adaptivity, source_ref, network, unencoded_state, encoding, qubit_count, pct, boosted)| {
                ReferenceRow {
                    adaptivity,
                    source_ref,
                    network,
                    unencoded_state,
                    encoding,
                    qubit_count,
                    lppt: pct / 100.0,
                    boosted,
                }
            },
        )
        .collect()
}

// ---------------------------------------------------------------------------
// Figure emission.

/// One figure series: (photons, threshold) points sorted by photon count.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSeries {
    pub label: String,
    pub points: Vec<(u64, f64)>,
}

/// Scatter dataset plus rendered SVG.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub series: Vec<FigureSeries>,
    pub svg: String,
}

/// Pareto-best points of a series: a point survives when no other point
/// reaches at least its threshold with no more photons. Implemented as a
/// staircase sweep; the O(n^2) dominance filter is the test oracle.
pub fn pareto_envelope(points: &[(u64, f64)]) -> Vec<(u64, f64)> {
    let mut sorted: Vec<(u64, f64)> = points.to_vec();
    sorted.sort_by(|a, b| (a.0, b.1).partial_cmp(&(b.0, a.1)).unwrap());
    sorted.dedup();
    let mut best = f64::NEG_INFINITY;
    let mut last_x = None;
    let mut kept = Vec::new();
    for (x, y) in sorted {
        if last_x == Some(x) {
            // Only the highest threshold at each photon count can survive,
            // and the sort put it first.
            continue;
        }
        if y > best {
            kept.push((x, y));
            best = y;
            last_x = Some(x);
        }
    }
    kept
}

/// Groups reference rows into series (scheme = adaptivity + source +
/// network), appends computed points as extra series, optionally reduces
/// each series to its Pareto envelope, and renders the SVG. Pure function
/// of its inputs.
pub fn emit_figure_data(
    rows: &[ReferenceRow],
    computed: &[(String, u64, f64)],
    envelope: bool,
) -> FigureData {
    let mut series: Vec<FigureSeries> = Vec::new();
    let mut push = |label: String, point: (u64, f64)| {
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push(point),
            None => series.push(FigureSeries {
                label,
                points: vec![point],
            }),
        }
    };
    for row in rows {
        push(row.series_label(), (row.photons(), row.lppt));
    }
    for (label, photons, lppt) in computed {
        push(label.clone(), (*photons, *lppt));
    }
    for s in &mut series {
        s.points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if envelope {
            s.points = pareto_envelope(&s.points);
        }
    }
    let svg = render_figure_svg(&series);
    FigureData { series, svg }
}

const FIGURE_W: f64 = 800.0;
const FIGURE_H: f64 = 600.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 25.0;
const MARGIN_T: f64 = 25.0;
const MARGIN_B: f64 = 55.0;
/// Loss-tolerance limits drawn as horizontal guides: the single-photon
/// fusion limit, the non-adaptive limit with scrap information, and the
/// adaptive limit.
const GUIDES: &[(f64, &str)] = &[(0.293, "29.3%"), (0.382, "38.2%"), (0.5, "50%")];
const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
    "#bcbd22", "#e377c2",
];

fn render_figure_svg(series: &[FigureSeries]) -> String {
    let plot_w = FIGURE_W - MARGIN_L - MARGIN_R;
    let plot_h = FIGURE_H - MARGIN_T - MARGIN_B;
    // Fixed log-x domain 10^1..10^7 and linear-y domain 0..0.55 cover the
    // whole survey and keep the byte output independent of filtering.
    let fx = |photons: u64| -> f64 {
        let lg = (photons.max(1) as f64).log10().clamp(1.0, 7.0);
        MARGIN_L + (lg - 1.0) / 6.0 * plot_w
    };
    let fy = |lppt: f64| -> f64 { MARGIN_T + (1.0 - (lppt / 0.55).clamp(0.0, 1.0)) * plot_h };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{FIGURE_W}\" height=\"{FIGURE_H}\" \
         viewBox=\"0 0 {FIGURE_W} {FIGURE_H}\" font-family=\"sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{FIGURE_W}\" height=\"{FIGURE_H}\" fill=\"white\"/>\n"
    ));
    let x0 = MARGIN_L;
    let x1 = FIGURE_W - MARGIN_R;
    let y0 = fy(0.0);
    let y1 = MARGIN_T;
    svg.push_str(&format!(
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" stroke=\"black\"/>\n"
    ));
    for exp in 1..=7u32 {
        let x = fx(10u64.pow(exp));
        svg.push_str(&format!(
            "  <line x1=\"{x:.2}\" y1=\"{y0:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            y0 + 5.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">1e{exp}</text>\n",
            y0 + 20.0
        ));
    }
    for tick in 0..=5u32 {
        let v = tick as f64 * 0.1;
        let y = fy(v);
        svg.push_str(&format!(
            "  <line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>\n",
            x0 - 5.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{}%</text>\n",
            x0 - 9.0,
            y + 4.0,
            tick * 10
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">photons per resource state</text>\n",
        (x0 + x1) / 2.0,
        FIGURE_H - 12.0
    ));
    svg.push_str(&format!(
        "  <text x=\"18\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {:.2})\">loss per photon threshold</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    ));
    for (level, label) in GUIDES {
        let y = fy(*level);
        svg.push_str(&format!(
            "  <line x1=\"{x0:.2}\" y1=\"{y:.2}\" x2=\"{x1:.2}\" y2=\"{y:.2}\" \
             stroke=\"#999999\" stroke-dasharray=\"6 4\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\" \
             fill=\"#666666\">{label}</text>\n",
            x1 - 4.0,
            y - 4.0
        ));
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.points.len() > 1 {
            let path: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", fx(x), fy(y)))
                .collect();
            svg.push_str(&format!(
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                path.join(" ")
            ));
        }
        for &(x, y) in &s.points {
            svg.push_str(&format!(
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"{color}\"/>\n",
                fx(x),
                fy(y)
            ));
        }
        let ly = MARGIN_T + 14.0 + 16.0 * i as f64;
        svg.push_str(&format!(
            "  <rect x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
            x0 + 8.0,
            ly - 9.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{ly:.2}\" font-size=\"11\">{}</text>\n",
            x0 + 22.0,
            xml_escape(&s.label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

// ---------------------------------------------------------------------------
// Cost-reproduction report.

/// Published preparation costs (in 3GHZ units) being reproduced, in table
/// order: (family, code, cost).
const COST_TARGETS: &[(&str, (u32, u32), u128)] = &[
    ("fourstar", (2, 2), 256),
    ("sixring", (2, 2), 1520),
    ("eightld", (2, 2), 1120),
    ("fourstar", (7, 4), 12928),
    ("sixring", (7, 4), 66560),
    ("eightld", (7, 4), 52480),
];

#[derive(Debug, Clone)]
pub struct CostReportRow {
    pub family: ResourceFamily,
    pub code: ShorCode,
    pub qubits: u64,
    /// Published cost treated as an upper-bound target.
    pub reference_cost: u128,
    pub computed_cost: u128,
    pub lower_bound: u128,
    pub evaluations: u64,
    /// True when the search space was swept exactly within budget.
    pub exhaustive: bool,
    /// Set when the computed cost exceeds the reference by more than 10%.
    pub flagged: bool,
}

impl CostReportRow {
    /// How far the computed cost sits above the lower bound, in percent.
    pub fn gap_percent(&self) -> f64 {
        (self.computed_cost as f64 / self.lower_bound as f64 - 1.0) * 100.0
    }
}

#[derive(Debug, Clone)]
pub struct CostReport {
    pub budget: u64,
    pub seed: u64,
    pub rows: Vec<CostReportRow>,
}

impl CostReport {
    pub fn any_flagged(&self) -> bool {
        self.rows.iter().any(|r| r.flagged)
    }
}

/// Optimizes a preparation schedule for each published cost row and
/// compares. A row is flagged when the computed cost exceeds the reference
/// by more than 10%; landing below the reference is a pass (the reference
/// is an upper-bound target, not ground truth).
pub fn report_table1(budget: u64, seed: u64) -> Result<CostReport> {
    let mut rows = Vec::with_capacity(COST_TARGETS.len());
    for &(family_name, (n, m), reference_cost) in COST_TARGETS {
        let family = ResourceFamily::from_name(family_name)?;
        let code = ShorCode::new(n, m)?;
        let base = build_base_state(&family)?;
        let target = apply_shor_encoding(&base, &code)?;
        let result = optimize_schedule(&target, budget, seed)?;
        rows.push(CostReportRow {
            qubits: target.num_qubits() as u64,
            family,
            code,
            reference_cost,
            computed_cost: result.cost,
            lower_bound: result.lower_bound,
            evaluations: result.evaluations,
            exhaustive: result.optimal,
            flagged: result.cost * 10 > reference_cost * 11,
        });
    }
    Ok(CostReport {
        budget,
        seed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn reference_table_shape_and_spot_values() {
        let rows = load_reference_table();
        assert_eq!(rows.len(), 66);
        let exposure_74 = rows
            .iter()
            .find(|r| {
                r.adaptivity == "Exposure based adaptivity"
                    && r.network == "6ring"
                    && r.encoding.shor() == Some((7, 4))
            })
            .unwrap();
        assert_eq!(exposure_74.qubit_count, 168);
        assert!(close(exposure_74.lppt, 0.174));
        let fbqc_22 = rows
            .iter()
            .find(|r| r.source_ref == "FBQC" && r.encoding.shor() == Some((2, 2)))
            .unwrap();
        assert!(close(fbqc_22.lppt, 0.027));
        assert!(fbqc_22.boosted);
        // Unreferenced static-bias rows carry "this paper".
        let statics: Vec<_> = rows
            .iter()
            .filter(|r| r.adaptivity == "Statis bias arrangement")
            .collect();
        assert_eq!(statics.len(), 8);
        assert!(statics.iter().all(|r| r.source_ref == "this paper"));
        assert!(rows.iter().all(|r| r.lppt > 0.0 && r.lppt < 0.5));
    }

    #[test]
    fn qubit_counts_are_consistent_with_encodings() {
        for row in load_reference_table() {
            match row.encoding {
                ReferenceEncoding::Shor(n, m) => {
                    assert_eq!(
                        row.qubit_count,
                        row.base_qubits() * n as u64 * m as u64,
                        "row {row:?}"
                    );
                }
                ReferenceEncoding::Opaque(label) => {
                    // "k-qubit OGC" encodes each of the 6 ring qubits into k.
                    let k: u64 = label.split('-').next().unwrap().parse().unwrap();
                    assert_eq!(row.qubit_count, row.base_qubits() * k, "row {row:?}");
                }
            }
        }
    }

    #[test]
    fn filters_select_expected_rows() {
        let rows = load_reference_table();
        let sixring: Vec<_> = rows.iter().filter(|r| r.matches("network", "6ring")).collect();
        assert_eq!(sixring.len(), 39);
        assert!(rows.iter().filter(|r| r.matches("encoding", "{2, 2}")).count() >= 4);
        assert_eq!(rows.iter().filter(|r| r.matches("qubits", "999")).count(), 0);
        assert!(rows.iter().all(|r| r.field("nonsense").is_none()));
    }

    /// Brute-force dominance filter used as the envelope oracle.
    fn pareto_oracle(points: &[(u64, f64)]) -> Vec<(u64, f64)> {
        let mut unique: Vec<(u64, f64)> = points.to_vec();
        unique.sort_by(|a, b| a.partial_cmp(b).unwrap());
        unique.dedup();
        unique
            .iter()
            .copied()
            .filter(|&(x, y)| {
                !unique.iter().any(|&(qx, qy)| {
                    qx <= x && qy >= y && (qx < x || qy > y)
                })
            })
            .collect()
    }

    #[test]
    fn envelope_matches_dominance_oracle() {
        let rows = load_reference_table();
        let songetal_4star: Vec<(u64, f64)> = rows
            .iter()
            .filter(|r| r.source_ref == "songetal" && r.network == "4star")
            .map(|r| (r.photons(), r.lppt))
            .collect();
        let env = pareto_envelope(&songetal_4star);
        assert_eq!(env, pareto_oracle(&songetal_4star));
        assert!(env.iter().any(|&(x, y)| x == 112 && close(y, 0.114)));
        assert!(env.iter().all(|p| songetal_4star.contains(p)));

        // Fuzz against the oracle, duplicates and ties included.
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..200 {
            let pts: Vec<(u64, f64)> = (0..20)
                .map(|_| ((next() % 8) + 1, (next() % 5) as f64 * 0.05))
                .collect();
            assert_eq!(pareto_envelope(&pts), pareto_oracle(&pts));
        }
    }

    #[test]
    fn figure_is_deterministic_with_guides_and_valid_when_empty() {
        let rows = load_reference_table();
        let computed = vec![("this run".to_string(), 24u64, 0.026)];
        let a = emit_figure_data(&rows, &computed, true);
        let b = emit_figure_data(&rows, &computed, true);
        assert_eq!(a.svg, b.svg);
        for (_, label) in GUIDES {
            assert!(a.svg.contains(label));
        }
        for s in &a.series {
            assert_eq!(s.points, pareto_oracle(&s.points));
        }
        let empty = emit_figure_data(&[], &[], false);
        assert!(empty.svg.starts_with("<svg"));
        assert!(empty.svg.trim_end().ends_with("</svg>"));
        assert_eq!(empty.series.len(), 0);
    }
}
