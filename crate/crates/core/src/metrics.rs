//! Overlap and volume statistics.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::BinaryMask;

/// Dice similarity coefficient `2·|A ∩ R| / (|A| + |R|)`; two empty masks
/// score 1.
pub fn dsc(a: &BinaryMask, r: &BinaryMask) -> Result<f64> {
    if !a.same_grid(r) {
        return Err(Error::DimensionMismatch(format!(
            "{:?} @ {:?} vs {:?} @ {:?}",
            a.dims(),
            a.spacing(),
            r.dims(),
            r.spacing()
        )));
    }
    let (mut both, mut na, mut nr) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(r.bits()) {
        na += x as usize;
        nr += y as usize;
        both += (x && y) as usize;
    }
    if na + nr == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (na + nr) as f64)
}

/// Mask volume in cm³: voxel count times voxel volume.
pub fn volume_cm3(m: &BinaryMask) -> f64 {
    voxels_to_cm3(m.count(), m.spacing())
}

pub fn voxels_to_cm3(count: usize, spacing: [f64; 3]) -> f64 {
    count as f64 * spacing.iter().product::<f64>() / 1000.0
}

/// Per-case row: reference ("manual"), one-click and semi-automatic results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStats {
    pub case: String,
    pub vol_manual_cm3: f64,
    pub vol_oneclick_cm3: f64,
    pub vol_semi_cm3: f64,
    pub vox_manual: usize,
    pub vox_oneclick: usize,
    pub vox_semi: usize,
    pub dsc_oneclick: f64,
    pub dsc_semi: f64,
}

pub const CSV_HEADER: &str =
    "case,vol_manual_cm3,vol_oneclick_cm3,vol_semi_cm3,vox_manual,vox_oneclick,vox_semi,dsc_oneclick,dsc_semi";

impl CaseStats {
    /// Builds a row from the three masks; all must share one grid.
    pub fn from_masks(
        case: impl Into<String>,
        reference: &BinaryMask,
        one_click: &BinaryMask,
        semi: &BinaryMask,
    ) -> Result<Self> {
        Ok(CaseStats {
            case: case.into(),
            vol_manual_cm3: volume_cm3(reference),
            vol_oneclick_cm3: volume_cm3(one_click),
            vol_semi_cm3: volume_cm3(semi),
            vox_manual: reference.count(),
            vox_oneclick: one_click.count(),
            vox_semi: semi.count(),
            dsc_oneclick: dsc(one_click, reference)?,
            dsc_semi: dsc(semi, reference)?,
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.case,
            self.vol_manual_cm3,
            self.vol_oneclick_cm3,
            self.vol_semi_cm3,
            self.vox_manual,
            self.vox_oneclick,
            self.vox_semi,
            self.dsc_oneclick,
            self.dsc_semi
        )
    }

    fn columns(&self) -> [f64; 8] {
        [
            self.vol_manual_cm3,
            self.vol_oneclick_cm3,
            self.vol_semi_cm3,
            self.vox_manual as f64,
            self.vox_oneclick as f64,
            self.vox_semi as f64,
            self.dsc_oneclick,
            self.dsc_semi,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation (divides by N).
    pub std: f64,
}

/// Column-wise min / max / mean / σ over a set of cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub cases: usize,
    pub columns: Vec<(String, ColumnStats)>,
}

pub const SUMMARY_COLUMNS: [&str; 8] = [
    "vol_manual_cm3",
    "vol_oneclick_cm3",
    "vol_semi_cm3",
    "vox_manual",
    "vox_oneclick",
    "vox_semi",
    "dsc_oneclick",
    "dsc_semi",
];

pub fn summarize(cases: &[CaseStats]) -> Result<Summary> {
    if cases.is_empty() {
        return Err(Error::Empty("no cases to summarize"));
    }
    let n = cases.len() as f64;
    let columns = SUMMARY_COLUMNS
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let values: Vec<f64> = cases.iter().map(|s| s.columns()[c]).collect();
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let stats = ColumnStats {
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean,
                std: var.sqrt(),
            };
            (name.to_string(), stats)
        })
        .collect();
    Ok(Summary {
        cases: cases.len(),
        columns,
    })
}

impl Summary {
    pub fn column(&self, name: &str) -> Option<&ColumnStats> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// Rows `min`, `max`, `mean`, `std` under the case CSV header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{CSV_HEADER}");
        for (label, pick) in [
            ("min", (|s: &ColumnStats| s.min) as fn(&ColumnStats) -> f64),
            ("max", |s| s.max),
            ("mean", |s| s.mean),
            ("std", |s| s.std),
        ] {
            let cells: Vec<String> = self
                .columns
                .iter()
                .map(|(_, s)| pick(s).to_string())
                .collect();
            let _ = writeln!(out, "{label},{}", cells.join(","));
        }
        out
    }

    /// Aligned text table in the layout of a results summary: volumes,
    /// voxel counts and DSC in percent, last row `μ ± σ`.
    pub fn to_text(&self) -> String {
        let headers = [
            "",
            "vol manual",
            "vol 1-click",
            "vol semi",
            "vox manual",
            "vox 1-click",
            "vox semi",
            "DSC 1-click %",
            "DSC semi %",
        ];
        let fmt = |c: usize, v: f64| match c {
            0..=5 => format!("{v:.2}"),
            _ => format!("{:.2}", v * 100.0),
        };
        let mut rows: Vec<Vec<String>> = vec![headers.iter().map(|s| s.to_string()).collect()];
        for (label, f) in [
            ("min", (|s: &ColumnStats| s.min) as fn(&ColumnStats) -> f64),
            ("max", |s| s.max),
        ] {
            let mut row = vec![label.to_string()];
            row.extend(
                self.columns
                    .iter()
                    .enumerate()
                    .map(|(c, (_, s))| fmt(c, f(s))),
            );
            rows.push(row);
        }
        let mut row = vec!["mean ± std".to_string()];
        row.extend(
            self.columns
                .iter()
                .enumerate()
                .map(|(c, (_, s))| format!("{} ± {}", fmt(c, s.mean), fmt(c, s.std))),
        );
        rows.push(row);

        let widths: Vec<usize> = (0..headers.len())
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:>w$}", w = w))
                .collect();
            let _ = writeln!(out, "{}", cells.join("  "));
        }
        let _ = writeln!(
            out,
            "volumes in cm3; std is the population standard deviation over {} case(s)",
            self.cases
        );
        out
    }
}
