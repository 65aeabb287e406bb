//! Newick, SVG and Graphviz output for dendrograms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::upgma::{Dendrogram, NodeId};

/// Quote a label if it contains Newick metacharacters or whitespace.
fn newick_label(label: &str) -> String {
    let special = |c: char| c.is_whitespace() || "()[]':;,".contains(c);
    if label.is_empty() || label.chars().any(special) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

/// Newick serialization with branch lengths `parent height - child height`.
pub fn to_newick<F: Real>(tree: &Dendrogram<F>) -> String {
    fn write<F: Real>(tree: &Dendrogram<F>, node: NodeId, out: &mut String) {
        match tree.children(node) {
            None => out.push_str(&newick_label(&tree.labels()[node])),
            Some((l, r)) => {
                out.push('(');
                for (k, child) in [l, r].into_iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    write(tree, child, out);
                    write!(out, ":{}", tree.height(node) - tree.height(child)).unwrap();
                }
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    write(tree, tree.root(), &mut out);
    out.push(';');
    out
}

/// Family metadata for leaf labels, read from `label<TAB>family<TAB>subfamily`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Annotations {
    entries: BTreeMap<String, (String, String)>,
}

impl Annotations {
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 || cols.len() > 3 {
                return Err(Error::parse("annotations", i, "expected label<TAB>family[<TAB>subfamily]"));
            }
            let sub = cols.get(2).copied().unwrap_or_default();
            entries.insert(cols[0].to_string(), (cols[1].to_string(), sub.to_string()));
        }
        Ok(Annotations { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text)
    }

    pub fn family(&self, label: &str) -> Option<&str> {
        self.entries.get(label).map(|(f, _)| f.as_str())
    }

    pub fn subfamily(&self, label: &str) -> Option<&str> {
        self.entries
            .get(label)
            .map(|(_, s)| s.as_str())
            .filter(|s| !s.is_empty())
    }

    fn families(&self) -> BTreeSet<&str> {
        self.entries.values().map(|(f, _)| f.as_str()).collect()
    }
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#bcbd22",
    "#7f7f7f",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderFormat {
    Svg,
    Dot,
}

/// A rendered document plus the annotation labels that matched no leaf.
#[derive(Clone, Debug)]
pub struct Rendered {
    pub document: String,
    pub warnings: Vec<String>,
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn family_colors(annotations: Option<&Annotations>) -> BTreeMap<String, &'static str> {
    annotations
        .map(|a| {
            a.families()
                .into_iter()
                .enumerate()
                .map(|(i, f)| (f.to_string(), PALETTE[i % PALETTE.len()]))
                .collect()
        })
        .unwrap_or_default()
}

fn unknown_labels<F: Real>(tree: &Dendrogram<F>, annotations: Option<&Annotations>) -> Vec<String> {
    let Some(a) = annotations else { return Vec::new() };
    let warnings: Vec<String> = a
        .entries
        .keys()
        .filter(|l| !tree.labels().contains(l))
        .map(|l| format!("annotation label {l:?} does not match any leaf"))
        .collect();
    for w in &warnings {
        log::warn!("{w}");
    }
    warnings
}

pub fn render_dendrogram<F: Real>(
    tree: &Dendrogram<F>,
    format: RenderFormat,
    annotations: Option<&Annotations>,
) -> Rendered {
    let warnings = unknown_labels(tree, annotations);
    let document = match format {
        RenderFormat::Svg => render_svg(tree, annotations),
        RenderFormat::Dot => render_dot(tree, annotations),
    };
    Rendered { document, warnings }
}

/// Horizontal dendrogram: root on the left, leaves on the right.
fn render_svg<F: Real>(tree: &Dendrogram<F>, annotations: Option<&Annotations>) -> String {
    const ROW: f64 = 20.0;
    const MARGIN: f64 = 20.0;
    const PLOT_WIDTH: f64 = 400.0;
    const LABEL_WIDTH: f64 = 220.0;

    let colors = family_colors(annotations);
    let order = tree.leaf_order();
    let n = tree.leaf_count();
    let root_height = tree.height(tree.root()).as_f64();
    let scale = if root_height > 0.0 { PLOT_WIDTH / root_height } else { 0.0 };
    let x_of = |node: NodeId| MARGIN + (root_height - tree.height(node).as_f64()) * scale;

    let mut y = vec![0.0f64; n + tree.merges().len()];
    for (row, &leaf) in order.iter().enumerate() {
        y[leaf] = MARGIN + ROW * (row as f64 + 0.5);
    }
    for (k, m) in tree.merges().iter().enumerate() {
        y[n + k] = (y[m.left] + y[m.right]) / 2.0;
    }

    let width = MARGIN * 2.0 + PLOT_WIDTH + LABEL_WIDTH;
    let height = MARGIN * 2.0 + ROW * n as f64;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<g stroke="black" stroke-width="1" fill="none">"#).unwrap();
    for (k, m) in tree.merges().iter().enumerate() {
        let node = n + k;
        let xn = x_of(node);
        writeln!(
            out,
            r#"<path d="M{:.2},{:.2} V{:.2} M{:.2},{:.2} H{:.2} M{:.2},{:.2} H{:.2}"/>"#,
            xn,
            y[m.left],
            y[m.right],
            xn,
            y[m.left],
            x_of(m.left),
            xn,
            y[m.right],
            x_of(m.right)
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();
    for &leaf in &order {
        let label = &tree.labels()[leaf];
        let fill = annotations
            .and_then(|a| a.family(label))
            .and_then(|f| colors.get(f))
            .copied()
            .unwrap_or("black");
        let title = annotations
            .and_then(|a| a.family(label).map(|f| (f, a.subfamily(label))))
            .map(|(f, s)| match s {
                Some(s) => format!("<title>{} / {}</title>", xml_escape(f), xml_escape(s)),
                None => format!("<title>{}</title>", xml_escape(f)),
            })
            .unwrap_or_default();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" dominant-baseline="middle" fill="{fill}">{title}{}</text>"#,
            x_of(leaf) + 4.0,
            y[leaf],
            xml_escape(label)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn render_dot<F: Real>(tree: &Dendrogram<F>, annotations: Option<&Annotations>) -> String {
    let colors = family_colors(annotations);
    let n = tree.leaf_count();
    let mut out = String::from("graph dendrogram {\n  rankdir=LR;\n  node [shape=plaintext];\n");
    for (leaf, label) in tree.labels().iter().enumerate() {
        let color = annotations
            .and_then(|a| a.family(label))
            .and_then(|f| colors.get(f))
            .map(|c| format!(", fontcolor=\"{c}\""))
            .unwrap_or_default();
        writeln!(out, "  n{leaf} [label=\"{}\"{color}];", dot_escape(label)).unwrap();
    }
    for (k, m) in tree.merges().iter().enumerate() {
        let node = n + k;
        writeln!(out, "  n{node} [shape=point, label=\"\"];").unwrap();
        for child in [m.left, m.right] {
            writeln!(
                out,
                "  n{node} -- n{child} [label=\"{}\"];",
                tree.height(node) - tree.height(child)
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::upgma;
    use crate::divergence::DistanceMatrix;

    fn tree(labels: &[&str], rows: Vec<Vec<f64>>) -> Dendrogram<f64> {
        upgma(&DistanceMatrix::from_rows(labels.iter().map(|s| s.to_string()).collect(), rows).unwrap()).unwrap()
    }

    fn three() -> Dendrogram<f64> {
        tree(
            &["A", "B", "C"],
            vec![vec![0.0, 2.0, 8.0], vec![2.0, 0.0, 8.0], vec![8.0, 8.0, 0.0]],
        )
    }

    #[test]
    fn newick() {
        let two = tree(&["A", "B"], vec![vec![0.0, 4.0], vec![4.0, 0.0]]);
        assert_eq!(to_newick(&two), "(A:2,B:2);");
        assert_eq!(to_newick(&three()), "((A:1,B:1):3,C:4);");
        let quoted = tree(&["Old English", "it's"], vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(to_newick(&quoted), "('Old English':0.5,'it''s':0.5);");
    }

    #[test]
    fn svg_has_leaf_text_nodes() {
        let two = tree(&["A", "B"], vec![vec![0.0, 4.0], vec![4.0, 0.0]]);
        let r = render_dendrogram(&two, RenderFormat::Svg, None);
        assert_eq!(r.document.matches("<text").count(), 2);
        assert!(r.document.starts_with("<svg"));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn families_get_distinct_colors() {
        let ann = Annotations::from_tsv("A\tGermanic\tWest\nB\tGermanic\tNorth\nC\tSlavic\t\nZ\tUralic\t\n").unwrap();
        let r = render_dendrogram(&three(), RenderFormat::Svg, Some(&ann));
        let fills: BTreeSet<&str> = r
            .document
            .match_indices("fill=\"#")
            .map(|(i, _)| &r.document[i + 6..i + 13])
            .collect();
        assert_eq!(fills.len(), 2, "{}", r.document);
        assert_eq!(r.warnings.len(), 1);
        assert!(r.warnings[0].contains("Z"));
        assert!(r.document.contains("<title>Germanic / West</title>"));
    }

    #[test]
    fn dot_structure() {
        let r = render_dendrogram(&three(), RenderFormat::Dot, None);
        assert!(r.document.starts_with("graph dendrogram {"));
        assert_eq!(r.document.matches(" -- ").count(), 4);
        assert!(r.document.contains("n3 -- n0 [label=\"1\"];"));
    }

    #[test]
    fn annotation_parse_errors() {
        assert!(Annotations::from_tsv("onlylabel\n").is_err());
        let a = Annotations::from_tsv("x\tf\n").unwrap();
        assert_eq!(a.family("x"), Some("f"));
        assert_eq!(a.subfamily("x"), None);
    }
}
