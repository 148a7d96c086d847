//! Plot-ready CSV output derived from scan records.
//!
//! Panel matrices have one row per λ̄ and one column per J₂/J₁; the first
//! row and column hold the grid values, and missing values are left empty.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::observables::{find_peaks, Component};
use crate::{Error, Result};

use super::record::ResultRecord;

/// Recorded with every peak.
pub const PEAK_METHOD: &str = "three-point-parabola";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    /// χ_F, structure-factor and energy panels plus the χ_F peaks file.
    PhaseDiagram,
    /// Paired TCI/Heisenberg levels from the mapping check.
    Spectrum,
}

impl std::str::FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase-diagram" => Ok(Figure::PhaseDiagram),
            "spectrum" => Ok(Figure::Spectrum),
            other => Err(Error::Config(format!("unknown figure {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanelPeak {
    pub j2_index: usize,
    pub j2_over_j1: f64,
    /// Index of the grid maximum along λ̄.
    pub grid_index: usize,
    pub lambda_bar: f64,
    pub value: f64,
    pub method: String,
}

fn fmt_cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => String::new(),
    }
}

/// Writes `values[λ index][J₂ index]` with header row and column.
pub fn write_matrix_csv(path: &Path, lambdas: &[f64], j2s: &[f64], values: &[Vec<Option<f64>>]) -> Result<()> {
    let mut out = String::from("lambda_bar\\j2_over_j1");
    for j in j2s {
        write!(out, ",{j}").unwrap();
    }
    out.push('\n');
    for (l, row) in lambdas.iter().zip(values) {
        write!(out, "{l}").unwrap();
        for v in row {
            write!(out, ",{}", fmt_cell(*v)).unwrap();
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Local maxima along λ̄ in every J₂/J₁ column, parabola-refined.
pub fn peaks_by_column(lambdas: &[f64], j2s: &[f64], values: &[Vec<Option<f64>>]) -> Vec<PanelPeak> {
    let mut out = Vec::new();
    for (j, &j2) in j2s.iter().enumerate() {
        let column: Vec<f64> = values.iter().map(|row| row[j].unwrap_or(f64::NAN)).collect();
        for p in find_peaks(lambdas, &column) {
            out.push(PanelPeak {
                j2_index: j,
                j2_over_j1: j2,
                grid_index: p.index,
                lambda_bar: p.x,
                value: p.y,
                method: PEAK_METHOD.to_string(),
            });
        }
    }
    out
}

fn write_peaks(path: &Path, peaks: &[PanelPeak]) -> Result<()> {
    let mut out = String::from("j2_over_j1,lambda_bar,value,grid_index,method\n");
    for p in peaks {
        writeln!(out, "{},{},{},{},{}", p.j2_over_j1, p.lambda_bar, p.value, p.grid_index, p.method).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

type Extract<'a> = Box<dyn Fn(&ResultRecord) -> Option<f64> + 'a>;

/// Writes the CSV files of `figure` into `out_dir` and returns their paths.
pub fn emit_plotdata(
    records: &[ResultRecord],
    j2s: &[f64],
    lambdas: &[f64],
    figure: Figure,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut cell: Vec<Vec<Option<&ResultRecord>>> = vec![vec![None; j2s.len()]; lambdas.len()];
    for r in records.iter().filter(|r| r.is_ok()) {
        let (j, l) = (r.point.j2_index, r.point.lambda_index);
        if j < j2s.len() && l < lambdas.len() {
            cell[l][j] = Some(r);
        }
    }
    let needed = |r: &ResultRecord| match figure {
        Figure::PhaseDiagram => r.ground.is_some(),
        Figure::Spectrum => r.mapping.is_some(),
    };
    let missing: Vec<(usize, usize)> = (0..j2s.len())
        .flat_map(|j| (0..lambdas.len()).map(move |l| (j, l)))
        .filter(|&(j, l)| !cell[l][j].is_some_and(needed))
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteGrid { missing });
    }
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    match figure {
        Figure::PhaseDiagram => {
            let mut panels: Vec<(String, Extract)> =
                vec![("ground_energy".into(), Box::new(|r: &ResultRecord| r.ground.map(|g| g.energy)))];
            let first = cell[0][0].expect("grid checked complete");
            if first.fidelity.is_some() {
                panels.push(("chi_f".into(), Box::new(|r: &ResultRecord| r.fidelity.and_then(|f| f.chi))));
            }
            for sf in first.structure_factors.iter().flatten() {
                let prefix = match sf.component {
                    Component::Xx => "sxx",
                    Component::Yy => "syy",
                    Component::Zz => "szz",
                };
                for star in &sf.stars {
                    let (component, label) = (sf.component, star.label);
                    panels.push((
                        format!("{prefix}_{label}"),
                        Box::new(move |r: &ResultRecord| {
                            r.structure_factors.as_ref()?.iter().find(|s| s.component == component)?.star(label)
                        }),
                    ));
                }
            }
            for (name, extract) in &panels {
                let values: Vec<Vec<Option<f64>>> =
                    cell.iter().map(|row| row.iter().map(|r| r.and_then(extract)).collect()).collect();
                let path = out_dir.join(format!("{name}.csv"));
                write_matrix_csv(&path, lambdas, j2s, &values)?;
                written.push(path);
                if name == "chi_f" {
                    let path = out_dir.join("peaks.csv");
                    write_peaks(&path, &peaks_by_column(lambdas, j2s, &values))?;
                    written.push(path);
                }
            }
        }
        Figure::Spectrum => {
            let mut out = String::from(
                "j2_over_j1,lambda_bar,level,tci,heisenberg,difference,matched,tci_momentum,tci_parity,heisenberg_momentum,heisenberg_parity\n",
            );
            for (j, &j2) in j2s.iter().enumerate() {
                for (l, &lb) in lambdas.iter().enumerate() {
                    let m = cell[l][j].and_then(|r| r.mapping.as_ref()).expect("grid checked complete");
                    for (i, lv) in m.levels.iter().enumerate() {
                        writeln!(
                            out,
                            "{j2},{lb},{i},{},{},{},{},{},{},{},{}",
                            lv.tci,
                            lv.heisenberg,
                            lv.difference,
                            lv.matched,
                            lv.tci_sector.0,
                            lv.tci_sector.1,
                            lv.heisenberg_sector.0,
                            lv.heisenberg_sector.1
                        )
                        .unwrap();
                    }
                }
            }
            let path = out_dir.join("spectrum.csv");
            std::fs::write(&path, out)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_gaussian_bump_gives_one_peak() {
        let lambdas: Vec<f64> = (0..41).map(|i| i as f64 * 0.005).collect();
        let j2s: Vec<f64> = (0..21).map(|i| i as f64 * 0.05).collect();
        let (lc, jc) = (0.0913, 0.5);
        // falling background with a bump at (lc, jc)
        let values: Vec<Vec<Option<f64>>> = lambdas
            .iter()
            .map(|&l| {
                j2s.iter()
                    .map(|&j| Some(20.0 * (0.2 - l) + 5.0 * (-((l - lc) / 0.02).powi(2) - ((j - jc) / 0.02).powi(2)).exp()))
                    .collect()
            })
            .collect();
        let peaks = peaks_by_column(&lambdas, &j2s, &values);
        assert_eq!(peaks.len(), 1, "{peaks:?}");
        assert_eq!(peaks[0].j2_over_j1, jc);
        assert!((peaks[0].lambda_bar - lc).abs() < 0.002, "{}", peaks[0].lambda_bar);
        assert_eq!(peaks[0].method, PEAK_METHOD);
    }

    #[test]
    fn matrix_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_matrix_csv(&path, &[0.0, 0.1], &[0.0, 0.5, 1.0], &[vec![Some(1.0), None, Some(3.0)], vec![Some(4.0), Some(5.0), Some(6.5)]])
            .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "lambda_bar\\j2_over_j1,0,0.5,1\n0,1,,3\n0.1,4,5,6.5\n");
    }

    #[test]
    fn incomplete_grid_lists_missing_points() {
        let err = emit_plotdata(&[], &[0.0, 1.0], &[0.5], Figure::PhaseDiagram, Path::new("/nonexistent")).unwrap_err();
        match err {
            Error::IncompleteGrid { missing } => assert_eq!(missing, vec![(0, 0), (1, 0)]),
            e => panic!("{e}"),
        }
    }
}
