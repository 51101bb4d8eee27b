use std::fmt::Write;

use super::{PivotModel, RenderArtifact};
use crate::value::Scalar;

const VEGA: &str = "https://cdn.jsdelivr.net/npm/vega@5.30.0";
const VEGA_LITE: &str = "https://cdn.jsdelivr.net/npm/vega-lite@5.21.0";
const VEGA_EMBED: &str = "https://cdn.jsdelivr.net/npm/vega-embed@6.26.0";

#[derive(Debug, Clone, PartialEq)]
pub struct Tab {
    pub title: String,
    pub artifact: RenderArtifact,
}

fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// JSON safe to place inside a `<script>` element.
fn script_json(value: &impl serde::Serialize) -> String {
    serde_json::to_string(value)
        .expect("render artifacts serialize")
        .replace("</", "<\\/")
}

fn cell_text(values: Option<&[Scalar]>, k: usize) -> String {
    values
        .and_then(|v| v.get(k))
        .map(|v| escape_html(&v.to_text()))
        .unwrap_or_default()
}

/// Static, fully expanded rendering of a pivot model.
fn pivot_table(model: &PivotModel) -> String {
    let col_leaves = model.col_tree.leaf_paths();
    let row_leaves = model.row_tree.leaf_paths();
    let row_depth = model.row_path.len().max(1);
    let measures = model.measures.len().max(1);
    let mut html = String::from("<table class=\"pivot\">\n");

    let mut level = vec![&model.col_tree];
    for _ in 0..model.col_path.len() {
        let _ = write!(html, "<tr><th colspan=\"{row_depth}\"></th>");
        let mut next = Vec::new();
        for node in &level {
            for child in &node.children {
                let _ = write!(
                    html,
                    "<th colspan=\"{}\">{}</th>",
                    child.leaf_span * measures,
                    escape_html(&child.value.to_text())
                );
                next.push(child);
            }
        }
        html.push_str("</tr>\n");
        level = next;
    }
    let _ = write!(html, "<tr>");
    for name in &model.row_path {
        let _ = write!(html, "<th>{}</th>", escape_html(name));
    }
    if model.row_path.is_empty() {
        html.push_str("<th></th>");
    }
    for _ in &col_leaves {
        for m in &model.measures {
            let _ = write!(html, "<th>{}</th>", escape_html(m));
        }
    }
    html.push_str("</tr>\n");

    for row in &row_leaves {
        html.push_str("<tr>");
        for v in row {
            let _ = write!(html, "<th>{}</th>", escape_html(&v.to_text()));
        }
        if row.is_empty() {
            html.push_str("<th></th>");
        }
        for col in &col_leaves {
            let values = model.cell(col, row).map(|c| c.values.as_slice());
            for k in 0..model.measures.len() {
                let _ = write!(html, "<td>{}</td>", cell_text(values, k));
            }
        }
        html.push_str("</tr>\n");
    }
    html.push_str("</table>\n");
    html
}

/// One HTML document with a tab per artifact. Charts are drawn by the pinned
/// Vega runtime; pivot tables are inlined as markup plus their model data.
pub fn export_html(tabs: &[Tab]) -> String {
    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    html.push_str("<title>walkd export</title>\n");
    for src in [VEGA, VEGA_LITE, VEGA_EMBED] {
        let _ = writeln!(html, "<script src=\"{src}\"></script>");
    }
    html.push_str(
        "<style>\n\
         body{font-family:sans-serif;margin:1em}\n\
         .tab-bar{display:flex;gap:4px;border-bottom:1px solid #ccc}\n\
         .tab-button{border:1px solid #ccc;border-bottom:none;background:#f4f4f4;padding:4px 12px;cursor:pointer}\n\
         .tab-button.active{background:#fff;font-weight:bold}\n\
         .tab-panel{display:none;padding:1em 0}\n\
         .tab-panel.active{display:block}\n\
         table.pivot{border-collapse:collapse}\n\
         table.pivot th,table.pivot td{border:1px solid #ddd;padding:2px 6px}\n\
         table.pivot td{text-align:right}\n\
         </style>\n</head>\n<body>\n",
    );

    html.push_str("<div class=\"tab-bar\">\n");
    for (i, tab) in tabs.iter().enumerate() {
        let active = if i == 0 { " active" } else { "" };
        let _ = writeln!(
            html,
            "<button class=\"tab-button{active}\" data-tab=\"{i}\">{}</button>",
            escape_html(&tab.title)
        );
    }
    html.push_str("</div>\n");

    for (i, tab) in tabs.iter().enumerate() {
        let active = if i == 0 { " active" } else { "" };
        let _ = writeln!(html, "<section class=\"tab-panel{active}\" id=\"tab-{i}\">");
        match &tab.artifact {
            RenderArtifact::Chart(doc) => {
                let _ = writeln!(html, "<div class=\"chart-mount\" id=\"chart-{i}\"></div>");
                let _ = writeln!(
                    html,
                    "<script type=\"application/json\" id=\"spec-{i}\">{}</script>",
                    script_json(doc)
                );
            }
            RenderArtifact::Pivot(model) => {
                html.push_str(&pivot_table(model));
                let _ = writeln!(
                    html,
                    "<script type=\"application/json\" id=\"pivot-{i}\">{}</script>",
                    script_json(model)
                );
            }
        }
        html.push_str("</section>\n");
    }

    html.push_str(
        "<script>\n\
         document.querySelectorAll('.chart-mount').forEach(function (el) {\n\
         \x20 var spec = JSON.parse(document.getElementById(el.id.replace('chart-', 'spec-')).textContent);\n\
         \x20 vegaEmbed(el, spec, {actions: false});\n\
         });\n\
         document.querySelectorAll('.tab-button').forEach(function (btn) {\n\
         \x20 btn.addEventListener('click', function () {\n\
         \x20   document.querySelectorAll('.tab-button, .tab-panel').forEach(function (e) { e.classList.remove('active'); });\n\
         \x20   btn.classList.add('active');\n\
         \x20   document.getElementById('tab-' + btn.dataset.tab).classList.add('active');\n\
         \x20 });\n\
         });\n\
         </script>\n</body>\n</html>\n",
    );
    html
}
