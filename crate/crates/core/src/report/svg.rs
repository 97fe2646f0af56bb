//! Deterministic SVG rendering of carpet grids.

use super::CarpetGrid;

const CELL_W: usize = 12;
const CELL_H: usize = 7;
const MARGIN_LEFT: usize = 56;
const MARGIN_TOP: usize = 36;
const MARGIN_BOTTOM: usize = 34;
const LEGEND_GAP: usize = 16;
const LEGEND_WIDTH: usize = 170;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            other => out.push(other),
        }
    }
    out
}

/// Renders a carpet grid as a standalone SVG 1.1 document.
///
/// The output is a pure function of the grid: fixed palette, stable element
/// order, one `class="cell"` rect per in-grid cell.
pub fn render_svg(grid: &CarpetGrid) -> Vec<u8> {
    let cols = grid.columns.len();
    let rows = grid.rows;
    let plot_w = cols * CELL_W;
    let plot_h = rows * CELL_H;
    let legend_x = MARGIN_LEFT + plot_w + LEGEND_GAP;
    let width = legend_x + LEGEND_WIDTH;
    let legend_h = MARGIN_TOP + grid.legend.len() * 18;
    let height = (MARGIN_TOP + plot_h + MARGIN_BOTTOM).max(legend_h + 8);

    let fill_of = |label: &str| -> &str {
        grid.legend
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, c)| c.as_str())
            .unwrap_or("#000000")
    };

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<defs>\n");
    svg.push_str(
        "<pattern id=\"overlap\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" patternTransform=\"rotate(45)\">\
<rect width=\"6\" height=\"6\" fill=\"#ffffff\"/>\
<rect width=\"3\" height=\"6\" fill=\"#000000\"/>\
</pattern>\n",
    );
    svg.push_str("</defs>\n");
    svg.push_str(&format!(
        "<rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{MARGIN_LEFT}\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        escape(&grid.title)
    ));

    // cells
    for c in 0..cols {
        for r in 0..rows {
            let Some(label) = grid.cell(c, r) else {
                continue;
            };
            let x = MARGIN_LEFT + c * CELL_W;
            let y = MARGIN_TOP + r * CELL_H;
            svg.push_str(&format!(
                "<rect class=\"cell\" x=\"{x}\" y=\"{y}\" width=\"{CELL_W}\" height=\"{CELL_H}\" fill=\"{}\"/>\n",
                fill_of(label)
            ));
        }
    }

    // frame
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n"
    ));

    // row labels: one per hour at most, thinned to at least 12px spacing
    let rows_per_label = {
        let hourly = (3600 / (86_400 / rows as u32)).max(1) as usize;
        let mut step = hourly;
        while step * CELL_H < 12 {
            step *= 2;
        }
        step
    };
    for r in (0..rows).step_by(rows_per_label) {
        let y = MARGIN_TOP + r * CELL_H + 6;
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 4,
            escape(&grid.row_labels[r])
        ));
    }

    // column labels: thinned to at least 72px spacing
    let cols_per_label = (72 / CELL_W).max(1);
    for c in (0..cols).step_by(cols_per_label) {
        let x = MARGIN_LEFT + c * CELL_W;
        let y = MARGIN_TOP + plot_h + 14;
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"9\">{}</text>\n",
            grid.columns[c]
        ));
    }

    // legend
    for (i, (label, fill)) in grid.legend.iter().enumerate() {
        let y = MARGIN_TOP + i * 18;
        svg.push_str(&format!(
            "<rect x=\"{legend_x}\" y=\"{y}\" width=\"12\" height=\"12\" fill=\"{fill}\" stroke=\"#444444\" stroke-width=\"0.5\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            legend_x + 18,
            y + 10,
            escape(label)
        ));
    }

    svg.push_str("</svg>\n");
    svg.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::super::tests::synthetic_result;
    use super::super::{build_carpet, CarpetKind};
    use super::*;
    use chrono_tz::Tz;

    fn count_occurrences(haystack: &str, needle: &str) -> usize {
        haystack.matches(needle).count()
    }

    #[test]
    fn same_grid_renders_identical_bytes() {
        let result = synthetic_result(2, 900);
        let carpet = build_carpet(&result, CarpetKind::States, Tz::UTC).unwrap();
        assert_eq!(render_svg(&carpet), render_svg(&carpet));
    }

    #[test]
    fn cell_rect_count_matches_grid() {
        let result = synthetic_result(7, 900);
        let carpet = build_carpet(&result, CarpetKind::States, Tz::UTC).unwrap();
        let svg = String::from_utf8(render_svg(&carpet)).unwrap();
        assert_eq!(count_occurrences(&svg, "class=\"cell\""), 672);
    }

    #[test]
    fn single_cell_grid_renders_one_cell_plus_legend() {
        let result = synthetic_result(1, 86_400);
        let carpet = build_carpet(&result, CarpetKind::Verdict, Tz::UTC).unwrap();
        let svg = String::from_utf8(render_svg(&carpet)).unwrap();
        assert_eq!(count_occurrences(&svg, "class=\"cell\""), 1);
        // 3 legend swatches + background + frame + 1 cell + pattern rects
        assert!(svg.contains("SATISFIED"));
        assert!(svg.contains("NO-DATA"));
    }

    #[test]
    fn output_is_well_formed_enough_to_balance_tags() {
        let result = synthetic_result(1, 900);
        let carpet = build_carpet(&result, CarpetKind::States, Tz::UTC).unwrap();
        let svg = String::from_utf8(render_svg(&carpet)).unwrap();
        assert!(svg.starts_with("<?xml version=\"1.0\""));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(
            count_occurrences(&svg, "<text"),
            count_occurrences(&svg, "</text>")
        );
        // every non-text element is self-closing
        assert_eq!(count_occurrences(&svg, "<rect"), count_occurrences(&svg, "\"/>"));
    }
}
