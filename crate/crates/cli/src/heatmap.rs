//! Deterministic SVG heatmaps for similarity matrices.

use repsim_core::error::{Error, Result};
use repsim_core::SimilarityMatrix;

use crate::palette::PALETTE;

/// Rendering options. Scores are clamped to `[lo, hi]` before the palette
/// lookup; NaN cells are drawn with a gray hatch.
#[derive(Debug, Clone)]
pub struct HeatmapStyle {
    pub lo: f64,
    pub hi: f64,
    pub cell_px: usize,
    pub show_labels: bool,
}

impl Default for HeatmapStyle {
    fn default() -> Self {
        Self {
            lo: 0.0,
            hi: 1.0,
            cell_px: 24,
            show_labels: true,
        }
    }
}

impl HeatmapStyle {
    pub fn with_range(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!(
                "value range needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            lo,
            hi,
            ..Self::default()
        })
    }
}

/// Palette index for a score, or None for NaN. Values outside the range
/// clamp to the palette ends.
pub fn palette_index(v: f64, lo: f64, hi: f64) -> Option<usize> {
    if v.is_nan() {
        return None;
    }
    let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
    Some((t * 255.0).round() as usize)
}

fn rgb_hex(idx: usize) -> String {
    let [r, g, b] = PALETTE[idx];
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const FONT_PX: usize = 12;
const CHAR_PX: usize = 8; // monospace advance at 12px
const PAD: usize = 6;

/// Render one rect per cell. Output is a pure function of the matrix and
/// style: repeated calls yield identical bytes.
pub fn render_heatmap_svg(m: &SimilarityMatrix, style: &HeatmapStyle) -> String {
    let cell = style.cell_px;
    let (rows, cols) = (m.n_rows(), m.n_cols());
    let max_row_label = m.row_labels().iter().map(|l| l.len()).max().unwrap_or(0);
    let max_col_label = m.col_labels().iter().map(|l| l.len()).max().unwrap_or(0);
    let left = if style.show_labels {
        max_row_label * CHAR_PX + 2 * PAD
    } else {
        PAD
    };
    let top = if style.show_labels {
        max_col_label * CHAR_PX + 2 * PAD
    } else {
        PAD
    };
    let width = left + cols * cell + PAD;
    let height = top + rows * cell + PAD;

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str(&format!("<title>metric={}</title>\n", m.metric().id()));
    svg.push_str(
        "<defs>\n<pattern id=\"nan-hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\">\n\
         <rect width=\"6\" height=\"6\" fill=\"#b4b4b4\"/>\n\
         <path d=\"M0,6 L6,0\" stroke=\"#6e6e6e\" stroke-width=\"1\"/>\n\
         </pattern>\n</defs>\n",
    );
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    ));

    for i in 0..rows {
        for j in 0..cols {
            let x = left + j * cell;
            let y = top + i * cell;
            let fill = match palette_index(m.scores()[[i, j]], style.lo, style.hi) {
                Some(idx) => rgb_hex(idx),
                None => "url(#nan-hatch)".to_string(),
            };
            svg.push_str(&format!(
                "<rect class=\"cell\" x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" \
                 fill=\"{fill}\"/>\n"
            ));
        }
    }

    if style.show_labels {
        for (i, label) in m.row_labels().iter().enumerate() {
            let x = left - PAD;
            let y = top + i * cell + cell * 2 / 3;
            svg.push_str(&format!(
                "<text x=\"{x}\" y=\"{y}\" font-family=\"monospace\" font-size=\"{FONT_PX}\" \
                 text-anchor=\"end\">{}</text>\n",
                escape_xml(label)
            ));
        }
        for (j, label) in m.col_labels().iter().enumerate() {
            let x = left + j * cell + cell * 2 / 3;
            let y = top - PAD;
            svg.push_str(&format!(
                "<text x=\"{x}\" y=\"{y}\" font-family=\"monospace\" font-size=\"{FONT_PX}\" \
                 text-anchor=\"start\" transform=\"rotate(-90 {x} {y})\">{}</text>\n",
                escape_xml(label)
            ));
        }
    }

    svg.push_str("</svg>\n");
    svg
}
