//! Heat maps of output class against the classes of the two interacting rules,
//! plus plain renderers for grids and heat maps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::complexity::{LabeledRuleSet, WolframClass};
use crate::eca::EvolutionGrid;
use crate::error::{Error, Result};
use crate::sweep::{list_shards, read_shard, RunRecord};

/// Counts indexed `[output class][class of eps][class of eps_prime]`.
///
/// Percentages are conditioned on the output class: each nonempty map sums to 100.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct HeatMapSet {
    counts: [[[u64; 4]; 4]; 4],
    /// Records without an output class (strict-mode rejections).
    skipped: u64,
}

impl HeatMapSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, output: WolframClass, eps: WolframClass, eps_prime: WolframClass) {
        self.counts[output.index()][eps.index()][eps_prime.index()] += 1;
    }

    pub fn add_record(&mut self, record: &RunRecord, labels: &LabeledRuleSet) -> Result<()> {
        let eps = labels.class_of(record.eps)?;
        let eps_prime = labels.class_of(record.eps_prime)?;
        match record.class() {
            Some(output) => self.add(output, eps, eps_prime),
            None => self.skipped += 1,
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &HeatMapSet) {
        for (mine, theirs) in self
            .counts
            .iter_mut()
            .flatten()
            .flatten()
            .zip(other.counts.iter().flatten().flatten())
        {
            *mine += theirs;
        }
        self.skipped += other.skipped;
    }

    pub fn count(&self, output: WolframClass, eps: WolframClass, eps_prime: WolframClass) -> u64 {
        self.counts[output.index()][eps.index()][eps_prime.index()]
    }

    /// Records that landed in the `output` map.
    pub fn total(&self, output: WolframClass) -> u64 {
        self.counts[output.index()].iter().flatten().sum()
    }

    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    /// Every record seen, including skipped ones.
    pub fn records(&self) -> u64 {
        WolframClass::ALL
            .iter()
            .map(|&c| self.total(c))
            .sum::<u64>()
            + self.skipped
    }

    pub fn is_empty(&self, output: WolframClass) -> bool {
        self.total(output) == 0
    }

    pub fn percent(&self, output: WolframClass, eps: WolframClass, eps_prime: WolframClass) -> f64 {
        let total = self.total(output);
        if total == 0 {
            return 0.0;
        }
        100.0 * self.count(output, eps, eps_prime) as f64 / total as f64
    }

    /// The 4×4 percentage matrix for one output class.
    pub fn matrix(&self, output: WolframClass) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for a in WolframClass::ALL {
            for b in WolframClass::ALL {
                m[a.index()][b.index()] = self.percent(output, a, b);
            }
        }
        m
    }

    /// Cell with the largest count in a map, first in row-major order on ties.
    pub fn modal_cell(&self, output: WolframClass) -> Option<(WolframClass, WolframClass)> {
        if self.is_empty(output) {
            return None;
        }
        let mut best = (WolframClass::One, WolframClass::One);
        for a in WolframClass::ALL {
            for b in WolframClass::ALL {
                if self.count(output, a, b) > self.count(output, best.0, best.1) {
                    best = (a, b);
                }
            }
        }
        Some(best)
    }

    /// 64 rows of `class,row,col,percent,count,empty`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,row,col,percent,count,empty\n");
        for c in WolframClass::ALL {
            let empty = u8::from(self.is_empty(c));
            for a in WolframClass::ALL {
                for b in WolframClass::ALL {
                    let _ = writeln!(
                        out,
                        "{c},{a},{b},{:.4},{},{empty}",
                        self.percent(c, a, b),
                        self.count(c, a, b)
                    );
                }
            }
        }
        out
    }

    /// Four 4×4 panels, darker cells for larger percentages.
    pub fn to_svg(&self) -> String {
        const CELL: u32 = 48;
        const PAD: u32 = 40;
        const GAP: u32 = 36;
        let panel = 4 * CELL;
        let width = PAD + 4 * (panel + GAP);
        let height = PAD + panel + 2 * PAD;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(
            s,
            r#"<rect width="{width}" height="{height}" fill="white"/>"#
        );
        for (p, c) in WolframClass::ALL.into_iter().enumerate() {
            let x0 = PAD + p as u32 * (panel + GAP);
            let y0 = PAD;
            let title = if self.is_empty(c) {
                format!("Class {c} (empty)")
            } else {
                format!("Class {c} (n={})", self.total(c))
            };
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{title}</text>"#,
                x0 + panel / 2,
                y0 - 14
            );
            for a in WolframClass::ALL {
                for b in WolframClass::ALL {
                    let pct = self.percent(c, a, b);
                    // white at 0 %, deep red at 100 %
                    let t = pct / 100.0;
                    let g = (255.0 * (1.0 - t)).round() as u8;
                    let r = (255.0 - 75.0 * t).round() as u8;
                    let x = x0 + b.index() as u32 * CELL;
                    let y = y0 + a.index() as u32 * CELL;
                    let _ = writeln!(
                        s,
                        r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="#{r:02x}{g:02x}{g:02x}" stroke="#999"/>"##
                    );
                    let ink = if t > 0.5 { "white" } else { "black" };
                    let _ = writeln!(
                        s,
                        r#"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{pct:.1}</text>"#,
                        x + CELL / 2,
                        y + CELL / 2 + 4
                    );
                }
            }
            for k in WolframClass::ALL {
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" text-anchor="end">{k}</text>"#,
                    x0 - 6,
                    y0 + k.index() as u32 * CELL + CELL / 2 + 4
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" text-anchor="middle">{k}</text>"#,
                    x0 + k.index() as u32 * CELL + CELL / 2,
                    y0 + panel + 16
                );
            }
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">class of ε′ (columns), ε (rows)</text>"#,
                x0 + panel / 2,
                y0 + panel + 36
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Accumulates the heat maps of a record stream.
pub fn build_heatmaps<I>(records: I, labels: &LabeledRuleSet) -> Result<HeatMapSet>
where
    I: IntoIterator<Item = RunRecord>,
{
    let mut maps = HeatMapSet::new();
    for r in records {
        maps.add_record(&r, labels)?;
    }
    Ok(maps)
}

/// Heat maps over every completed shard in `dir`, one shard at a time.
pub fn heatmaps_from_dir(dir: &Path, labels: &LabeledRuleSet) -> Result<HeatMapSet> {
    let mut maps = HeatMapSet::new();
    for path in list_shards(dir)? {
        if let Some(records) = read_shard(&path)? {
            maps.merge(&build_heatmaps(records, labels)?);
        }
    }
    Ok(maps)
}

pub fn render_heatmaps(maps: &HeatMapSet, csv_path: &Path, svg_path: &Path) -> Result<()> {
    fs::write(csv_path, maps.to_csv()).map_err(|e| Error::io(csv_path, e))?;
    fs::write(svg_path, maps.to_svg()).map_err(|e| Error::io(svg_path, e))
}

/// One line of digits per row.
pub fn grid_text(grid: &EvolutionGrid) -> String {
    let mut s = String::with_capacity(grid.cells().len() + grid.row_count());
    for row in grid.rows() {
        s.extend(row.iter().map(|&c| char::from(b'0' + c)));
        s.push('\n');
    }
    s
}

/// Plain (P3) pixmap, one pixel per cell: 0 white, 1 black, 2 gray.
pub fn grid_ppm(grid: &EvolutionGrid) -> String {
    let mut s = format!("P3\n{} {}\n255\n", grid.width(), grid.row_count());
    for row in grid.rows() {
        let pixels: Vec<&str> = row
            .iter()
            .map(|&c| match c {
                0 => "255 255 255",
                1 => "0 0 0",
                _ => "128 128 128",
            })
            .collect();
        s.push_str(&pixels.join(" "));
        s.push('\n');
    }
    s
}

/// Writes `<base>.txt` and `<base>.ppm`.
pub fn render_grid(grid: &EvolutionGrid, base: &Path) -> Result<()> {
    let txt = base.with_extension("txt");
    let ppm = base.with_extension("ppm");
    fs::write(&txt, grid_text(grid)).map_err(|e| Error::io(&txt, e))?;
    fs::write(&ppm, grid_ppm(grid)).map_err(|e| Error::io(&ppm, e))
}
