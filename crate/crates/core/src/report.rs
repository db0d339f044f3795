//! The full distributor x censor utility grid and its emitters: grid CSV,
//! SVG heatmap, and the equilibrium JSON report.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::enumeration::{enumerate_censor_actions, enumerate_distributor_strategies};
use crate::error::Result;
use crate::game::{best_responses, compute_outcome, select_equilibrium};
use crate::model::{
    CensorAction, DistributorStrategy, Equilibrium, Outcome, ProtocolMix, UtilityParams,
};

/// Utility of every censor action against every admissible distributor strategy.
///
/// Rows run from the most skewed strategy to the most even; columns from the
/// least collateral damage to the most (ties: fewer blocked, then bitmask).
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityGrid {
    pub protocols: usize,
    pub rows: Vec<DistributorStrategy>,
    pub cols: Vec<CensorAction>,
    /// Row-major, `rows.len() * cols.len()` values.
    pub cells: Vec<f64>,
    /// Per row, the column of the censor's best response.
    pub best_response_col: Vec<usize>,
    pub equilibrium_row: usize,
    outcomes: Vec<Outcome>,
}

impl UtilityGrid {
    pub fn cell(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.cols.len() + col]
    }

    pub fn row_cells(&self, row: usize) -> &[f64] {
        let w = self.cols.len();
        &self.cells[row * w..(row + 1) * w]
    }

    /// The equilibrium cell as a solved game.
    pub fn equilibrium(&self) -> Equilibrium {
        let row = self.equilibrium_row;
        Equilibrium {
            strategy: self.rows[row].clone(),
            response: self.cols[self.best_response_col[row]],
            outcome: self.outcomes[row],
        }
    }
}

pub fn build_grid(mix: &ProtocolMix, params: &UtilityParams) -> Result<UtilityGrid> {
    let rows = enumerate_distributor_strategies(mix, params.quantum())?;
    let mut cols = enumerate_censor_actions(mix)?;
    let blocked_cover = |a: &CensorAction| a.blocked().map(|i| mix.cover(i)).sum::<f64>();
    let mut keyed: Vec<(f64, CensorAction)> = cols.iter().map(|a| (blocked_cover(a), *a)).collect();
    keyed.sort_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then_with(|| x.1.count().cmp(&y.1.count()))
            .then_with(|| x.1.mask().cmp(&y.1.mask()))
    });
    cols = keyed.into_iter().map(|(_, a)| a).collect();

    let cells: Vec<f64> = rows
        .par_iter()
        .flat_map_iter(|s| {
            cols.iter()
                .map(move |&a| compute_outcome(mix, params, s, a).utility)
        })
        .collect();

    let responses = best_responses(mix, params, &rows)?;
    let col_of: HashMap<CensorAction, usize> =
        cols.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let best_response_col = responses.iter().map(|r| col_of[&r.action]).collect();
    let equilibrium_row = select_equilibrium(&rows, &responses, |t| f64::from(100 - t));

    Ok(UtilityGrid {
        protocols: mix.len(),
        rows,
        cols,
        cells,
        best_response_col,
        equilibrium_row,
        outcomes: responses.iter().map(|r| r.outcome).collect(),
    })
}

pub fn write_grid_csv<W: Write>(grid: &UtilityGrid, mut out: W) -> Result<()> {
    let mut line = String::from("distributor_strategy");
    for a in &grid.cols {
        write!(line, ",A:{}", a.bitstring(grid.protocols)).unwrap();
    }
    writeln!(out, "{line}")?;
    for (r, strategy) in grid.rows.iter().enumerate() {
        line.clear();
        write!(line, "{strategy}").unwrap();
        for u in grid.row_cells(r) {
            write!(line, ",{u:.6}").unwrap();
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Blue at -100, white at 0, red at +100.
pub fn utility_color(utility: f64) -> (u8, u8, u8) {
    let u = utility.clamp(-100.0, 100.0);
    let fade = |x: f64| (255.0 * x).round() as u8;
    if u < 0.0 {
        let v = fade(1.0 + u / 100.0);
        (v, v, 255)
    } else {
        let v = fade(1.0 - u / 100.0);
        (255, v, v)
    }
}

const MARGIN_LEFT: f64 = 24.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_RIGHT: f64 = 8.0;
const MARGIN_BOTTOM: f64 = 24.0;

/// Renders the grid as a standalone SVG 1.1 heatmap of `width` x `height`
/// plot units. Best-response cells are outlined black, the equilibrium cell red.
pub fn render_heatmap_svg<W: Write>(
    grid: &UtilityGrid,
    width: f64,
    height: f64,
    mut out: W,
) -> Result<()> {
    assert!(
        width > 0.0 && height > 0.0,
        "heatmap dimensions must be positive"
    );
    let (nr, nc) = (grid.rows.len(), grid.cols.len());
    let cw = width / nc as f64;
    let ch = height / nr as f64;
    let stroke = (cw.min(ch) * 0.2).max(0.5);
    let total_w = MARGIN_LEFT + width + MARGIN_RIGHT;
    let total_h = MARGIN_TOP + height + MARGIN_BOTTOM;

    let mut svg = String::with_capacity(nr * nc * 96);
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{total_w:.3}\" height=\"{total_h:.3}\" viewBox=\"0 0 {total_w:.3} {total_h:.3}\">"
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"{:.3}\" y=\"16\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">censor action (low to high false positives)</text>",
        MARGIN_LEFT + width / 2.0
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"16\" y=\"{y:.3}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {y:.3})\">distributor strategy (skewed to even)</text>",
        y = MARGIN_TOP + height / 2.0
    )
    .unwrap();

    svg.push_str("<g class=\"cells\" shape-rendering=\"crispEdges\">\n");
    for r in 0..nr {
        let y = MARGIN_TOP + r as f64 * ch;
        for (c, &u) in grid.row_cells(r).iter().enumerate() {
            let (red, green, blue) = utility_color(u);
            writeln!(
                svg,
                "<rect class=\"cell\" x=\"{:.3}\" y=\"{y:.3}\" width=\"{cw:.3}\" height=\"{ch:.3}\" fill=\"rgb({red},{green},{blue})\"/>",
                MARGIN_LEFT + c as f64 * cw
            )
            .unwrap();
        }
    }
    svg.push_str("</g>\n<g class=\"outlines\" fill=\"none\">\n");

    let outline = |svg: &mut String, r: usize, class: &str, color: &str| {
        let c = grid.best_response_col[r];
        writeln!(
            svg,
            "<rect class=\"{class}\" x=\"{:.3}\" y=\"{:.3}\" width=\"{cw:.3}\" height=\"{ch:.3}\" stroke=\"{color}\" stroke-width=\"{stroke:.3}\"/>",
            MARGIN_LEFT + c as f64 * cw,
            MARGIN_TOP + r as f64 * ch
        )
        .unwrap();
    };
    for r in (0..nr).filter(|&r| r != grid.equilibrium_row) {
        outline(&mut svg, r, "best-response", "#000000");
    }
    outline(&mut svg, grid.equilibrium_row, "equilibrium", "#ff0000");
    svg.push_str("</g>\n</svg>\n");

    out.write_all(svg.as_bytes())?;
    Ok(())
}

/// Serialized form of a solved equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub params: ReportParams,
    pub distributor_shares: Vec<ReportShare>,
    pub censor_blocked: Vec<String>,
    pub true_positive_percent: u32,
    pub false_positive_percent: f64,
    #[serde(serialize_with = "six_digits")]
    pub censor_utility: f64,
    pub leak_percent: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub c: f64,
    pub d: f64,
    pub quantum: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportShare {
    pub protocol: String,
    pub share_percent: u32,
}

fn six_digits<S: Serializer>(value: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(format!("{value:.6}")).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

impl EquilibriumReport {
    pub fn new(eq: &Equilibrium, mix: &ProtocolMix, params: &UtilityParams) -> Self {
        EquilibriumReport {
            params: ReportParams {
                c: params.c(),
                d: params.d(),
                quantum: params.quantum(),
            },
            distributor_shares: mix
                .protocols()
                .iter()
                .zip(eq.strategy.shares())
                .map(|(p, &s)| ReportShare {
                    protocol: p.name.clone(),
                    share_percent: s,
                })
                .collect(),
            censor_blocked: eq
                .response
                .blocked()
                .map(|i| mix.name(i).to_string())
                .collect(),
            true_positive_percent: eq.outcome.t,
            // Cover sums are float sums of short decimals; drop the noise.
            false_positive_percent: (eq.outcome.f * 1e9).round() / 1e9,
            censor_utility: eq.outcome.utility,
            leak_percent: eq.leak(),
        }
    }
}

pub fn write_equilibrium_report<W: Write>(
    eq: &Equilibrium,
    mix: &ProtocolMix,
    params: &UtilityParams,
    mut out: W,
) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &EquilibriumReport::new(eq, mix, params))?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Protocol;

    fn paper_grid(d: f64) -> UtilityGrid {
        build_grid(
            &ProtocolMix::paper(),
            &UtilityParams::new(-0.015, d, 5).unwrap(),
        )
        .unwrap()
    }

    fn blocked(grid: &UtilityGrid, row: usize) -> CensorAction {
        grid.cols[grid.best_response_col[row]]
    }

    #[test]
    fn paper_grid_tolerant() {
        let g = paper_grid(1.75);
        assert_eq!(
            (g.rows.len(), g.cols.len(), g.cells.len()),
            (282, 64, 282 * 64)
        );
        assert_eq!(g.rows[g.equilibrium_row].shares(), [20, 20, 20, 20, 20, 0]);
        assert_eq!(blocked(&g, g.equilibrium_row).bitstring(6), "011110");
    }

    #[test]
    fn paper_grid_leak_intolerant() {
        let g = paper_grid(0.75);
        assert_eq!(g.rows[g.equilibrium_row].shares(), [95, 5, 0, 0, 0, 0]);
        assert_eq!(blocked(&g, g.equilibrium_row).bitstring(6), "100000");
    }

    #[test]
    fn grid_orderings_and_maxima() {
        let mix = ProtocolMix::paper();
        let g = paper_grid(1.75);
        let fs: Vec<f64> = g
            .cols
            .iter()
            .map(|a| a.blocked().map(|i| mix.cover(i)).sum())
            .collect();
        assert!(fs.windows(2).all(|w| w[0] <= w[1]));
        assert!(g.rows.windows(2).all(|w| w[0].shares() > w[1].shares()));
        for r in 0..g.rows.len() {
            let best = g.cell(r, g.best_response_col[r]);
            assert!(g.row_cells(r).iter().all(|&u| u <= best));
        }
    }

    #[test]
    fn single_protocol_grid() {
        let mix = ProtocolMix::new(vec![Protocol::new("p", 10.0)]).unwrap();
        let g = build_grid(&mix, &UtilityParams::new(-0.015, 1.75, 5).unwrap()).unwrap();
        assert_eq!((g.rows.len(), g.cols.len()), (1, 2));
        assert_eq!(g.cols, [CensorAction::NONE, CensorAction::from_mask(1)]);
        let mut out = Vec::new();
        write_grid_csv(&g, &mut out).unwrap();
        assert!(String::from_utf8(out)
            .unwrap()
            .starts_with("distributor_strategy,A:0,A:1\n100,"));
    }

    #[test]
    fn grid_csv_shape() {
        let g = paper_grid(1.75);
        let mut out = Vec::new();
        write_grid_csv(&g, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 283);
        assert!(lines.iter().all(|l| l.split(',').count() == 65));
        let header: Vec<&str> = lines[0].split(',').collect();
        let col = header.iter().position(|h| *h == "A:011110").unwrap();
        let row = lines
            .iter()
            .find(|l| l.starts_with("20/20/20/20/20/0,"))
            .unwrap();
        assert_eq!(row.split(',').nth(col).unwrap(), "27.528363");
    }

    #[test]
    fn color_ramp() {
        assert_eq!(utility_color(100.0), (255, 0, 0));
        assert_eq!(utility_color(0.0), (255, 255, 255));
        assert_eq!(utility_color(-100.0), (0, 0, 255));
        assert_eq!(utility_color(-50.0), (128, 128, 255));
        assert_eq!(utility_color(250.0), (255, 0, 0));
    }

    fn svg_text(g: &UtilityGrid) -> String {
        let mut out = Vec::new();
        render_heatmap_svg(g, 640.0, 846.0, &mut out).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn svg_markers() {
        let svg = svg_text(&paper_grid(1.75));
        assert_eq!(svg.matches("class=\"cell\"").count(), 282 * 64);
        assert_eq!(svg.matches("class=\"best-response\"").count(), 281);
        assert_eq!(svg.matches("class=\"equilibrium\"").count(), 1);
        assert_eq!(svg.matches("stroke=\"#ff0000\"").count(), 1);
        let eq_pos = svg.find("class=\"equilibrium\"").unwrap();
        assert!(svg.rfind("class=\"best-response\"").unwrap() < eq_pos);
        assert!(!svg.contains("href"));
    }

    #[test]
    fn svg_all_max_utility_is_red() {
        let mut g = paper_grid(1.75);
        g.cells.iter_mut().for_each(|u| *u = 100.0);
        let svg = svg_text(&g);
        assert_eq!(svg.matches("fill=\"rgb(255,0,0)\"").count(), 282 * 64);
    }

    #[test]
    fn svg_zero_utility_is_white() {
        let mut g = paper_grid(1.75);
        g.cells[0] = 0.0;
        assert!(svg_text(&g).contains("fill=\"rgb(255,255,255)\""));
    }

    #[test]
    fn report_fields() {
        let mix = ProtocolMix::paper();
        for (d, blocked, leak) in [
            (1.75, vec!["HTTP", "BitTorrent", "SSL", "MPEG"], 20),
            (0.75, vec!["YouTube"], 5),
        ] {
            let p = UtilityParams::new(-0.015, d, 5).unwrap();
            let g = build_grid(&mix, &p).unwrap();
            let mut out = Vec::new();
            write_equilibrium_report(&g.equilibrium(), &mix, &p, &mut out).unwrap();
            let parsed: EquilibriumReport = serde_json::from_slice(&out).unwrap();
            assert_eq!(parsed.censor_blocked, blocked);
            assert_eq!(parsed.leak_percent, leak);
            assert_eq!(parsed.true_positive_percent + parsed.leak_percent, 100);
        }
    }

    #[test]
    fn report_key_order_and_round_trip() {
        let mix = ProtocolMix::paper();
        let p = UtilityParams::new(-0.015, 1.75, 5).unwrap();
        let eq = crate::game::find_equilibrium(&mix, &p).unwrap();
        let mut out = Vec::new();
        write_equilibrium_report(&eq, &mix, &p, &mut out).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        let keys = [
            "\"params\"",
            "\"distributor_shares\"",
            "\"censor_blocked\"",
            "\"true_positive_percent\"",
            "\"false_positive_percent\"",
            "\"censor_utility\"",
            "\"leak_percent\"",
        ];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(text.contains("\"censor_utility\": 27.528363"));
        assert!(text.contains("\"false_positive_percent\": 18.57"));

        let parsed: EquilibriumReport = serde_json::from_slice(&out).unwrap();
        let mut again = Vec::new();
        serde_json::to_writer_pretty(&mut again, &parsed).unwrap();
        again.push(b'\n');
        assert_eq!(again, out);
    }

    #[test]
    fn report_critical_case() {
        let mix = ProtocolMix::new(vec![Protocol::new("p", 99.0)]).unwrap();
        let p = UtilityParams::new(-0.015, 1.75, 5).unwrap();
        let r = EquilibriumReport::new(&crate::game::find_equilibrium(&mix, &p).unwrap(), &mix, &p);
        assert!(r.censor_blocked.is_empty());
        assert_eq!(r.leak_percent, 100);
    }
}
