//! JSON formats: matrix-set input files and decomposition reports.
//!
//! Complex entries in reports are `[re, im]` pairs; floats are written in
//! shortest round-trip form.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Spectrum};
use crate::matrix_set::MatrixSet;
use crate::report::{
    Algorithm, BlockPartition, DecompositionReport, PartitionKind, Provenance, Transform,
};
use crate::verify::set_residuals;

type Grid = Vec<Vec<f64>>;
type ComplexGrid = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixSetFile {
    n: usize,
    matrices: Vec<MatrixEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixEntry {
    name: String,
    re: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Grid>,
}

fn json_error(source: &str, e: &serde_json::Error) -> Error {
    Error::Parse {
        context: format!("{source}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    }
}

fn check_grid(grid: &Grid, n: usize, what: &str) -> Result<()> {
    if grid.len() != n || grid.iter().any(|row| row.len() != n) {
        let cols = grid.iter().map(Vec::len).max().unwrap_or(0);
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{cols}, expected {n}x{n}",
            grid.len()
        )));
    }
    Ok(())
}

/// Parses an input file from text; `source` labels error messages.
pub fn parse_matrix_set_str(text: &str, source: &str) -> Result<MatrixSet> {
    let file: MatrixSetFile = serde_json::from_str(text).map_err(|e| json_error(source, &e))?;
    let n = file.n;
    if n == 0 {
        return Err(Error::DimensionMismatch("n must be at least 1".into()));
    }
    let mut names = Vec::with_capacity(file.matrices.len());
    let mut matrices = Vec::with_capacity(file.matrices.len());
    for (k, entry) in file.matrices.into_iter().enumerate() {
        check_grid(&entry.re, n, &format!("matrices[{k}].re (`{}`)", entry.name))?;
        if let Some(im) = &entry.im {
            check_grid(im, n, &format!("matrices[{k}].im (`{}`)", entry.name))?;
        }
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            let im = entry.im.as_ref().map_or(0.0, |g| g[i][j]);
            Complex64::new(entry.re[i][j], im)
        });
        names.push(entry.name);
        matrices.push(m);
    }
    MatrixSet::with_names(names, matrices)
}

pub fn parse_matrix_set(path: impl AsRef<Path>) -> Result<MatrixSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_matrix_set_str(&text, &path.display().to_string())
}

/// Input-file JSON for a set; `im` is omitted for real matrices.
pub fn matrix_set_to_json(set: &MatrixSet) -> String {
    let file = MatrixSetFile {
        n: set.dim(),
        matrices: set
            .iter()
            .map(|(name, m)| {
                let part = |f: fn(&Complex64) -> f64| -> Grid {
                    m.row_iter().map(|r| r.iter().map(f).collect()).collect()
                };
                MatrixEntry {
                    name: name.to_string(),
                    re: part(|z| z.re),
                    im: m.iter().any(|z| z.im != 0.0).then(|| part(|z| z.im)),
                }
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn write_matrix_set(set: &MatrixSet, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, matrix_set_to_json(set))?;
    Ok(())
}

fn to_grid(m: &ComplexMatrix) -> ComplexGrid {
    m.row_iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn from_grid(grid: &ComplexGrid, what: &str) -> Result<ComplexMatrix> {
    let rows = grid.len();
    let cols = grid.first().map_or(0, Vec::len);
    if grid.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch(format!("{what} has ragged rows")));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
        Complex64::new(grid[i][j][0], grid[i][j][1])
    }))
}

#[derive(Debug, Serialize, Deserialize)]
struct ReportFile {
    algorithm: String,
    partition: PartitionDto,
    transform: TransformDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transformed: Option<IndexMap<String, ComplexGrid>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    residuals: Option<IndexMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<ProvenanceDto>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PartitionDto {
    kind: String,
    sizes: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TransformDto {
    unitary: bool,
    s: ComplexGrid,
    s_inv: ComplexGrid,
}

#[derive(Debug, Serialize, Deserialize)]
struct SpectrumDto {
    eigenvalues: Vec<[f64; 2]>,
    multiplicities: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
enum ProvenanceDto {
    InvariantChain {
        chain_dims: Vec<usize>,
        search_exhausted: bool,
        searched_matrices: usize,
        seed: u64,
        trials: usize,
        retried: bool,
    },
    CommutingMatrix {
        commutant_dim: usize,
        candidate: String,
        matrix: ComplexGrid,
        spectrum: SpectrumDto,
        seed: u64,
        trials: usize,
        retried: bool,
    },
}

fn provenance_to_dto(p: &Provenance) -> Option<ProvenanceDto> {
    Some(match p {
        Provenance::InvariantChain {
            chain_dims,
            search_exhausted,
            searched_matrices,
            seed,
            trials,
            retried,
        } => ProvenanceDto::InvariantChain {
            chain_dims: chain_dims.clone(),
            search_exhausted: *search_exhausted,
            searched_matrices: *searched_matrices,
            seed: *seed,
            trials: *trials,
            retried: *retried,
        },
        Provenance::CommutingMatrix {
            commutant_dim,
            candidate,
            matrix,
            spectrum,
            seed,
            trials,
            retried,
        } => ProvenanceDto::CommutingMatrix {
            commutant_dim: *commutant_dim,
            candidate: candidate.clone(),
            matrix: to_grid(matrix),
            spectrum: SpectrumDto {
                eigenvalues: spectrum.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
                multiplicities: spectrum.multiplicities.clone(),
            },
            seed: *seed,
            trials: *trials,
            retried: *retried,
        },
        Provenance::Unspecified => return None,
    })
}

fn provenance_from_dto(p: ProvenanceDto) -> Result<Provenance> {
    Ok(match p {
        ProvenanceDto::InvariantChain {
            chain_dims,
            search_exhausted,
            searched_matrices,
            seed,
            trials,
            retried,
        } => Provenance::InvariantChain {
            chain_dims,
            search_exhausted,
            searched_matrices,
            seed,
            trials,
            retried,
        },
        ProvenanceDto::CommutingMatrix {
            commutant_dim,
            candidate,
            matrix,
            spectrum,
            seed,
            trials,
            retried,
        } => Provenance::CommutingMatrix {
            commutant_dim,
            candidate,
            matrix: from_grid(&matrix, "provenance.matrix")?,
            spectrum: Spectrum {
                eigenvalues: spectrum
                    .eigenvalues
                    .iter()
                    .map(|p| Complex64::new(p[0], p[1]))
                    .collect(),
                multiplicities: spectrum.multiplicities,
            },
            seed,
            trials,
            retried,
        },
    })
}

fn kind_tag(kind: PartitionKind) -> &'static str {
    match kind {
        PartitionKind::BT => "BT",
        PartitionKind::BD => "BD",
    }
}

pub fn report_to_json(report: &DecompositionReport) -> String {
    let file = ReportFile {
        algorithm: report.algorithm.tag().to_string(),
        partition: PartitionDto {
            kind: kind_tag(report.partition.kind).to_string(),
            sizes: report.partition.sizes.clone(),
        },
        transform: TransformDto {
            unitary: report.transform.unitary,
            s: to_grid(&report.transform.s),
            s_inv: to_grid(&report.transform.s_inv),
        },
        transformed: Some(
            report
                .transformed
                .iter()
                .map(|(name, m)| (name.to_string(), to_grid(m)))
                .collect(),
        ),
        residuals: Some(
            report
                .transformed
                .names()
                .iter()
                .cloned()
                .zip(report.residuals.iter().copied())
                .collect(),
        ),
        provenance: provenance_to_dto(&report.provenance),
    };
    let mut s = serde_json::to_string(&file).expect("finite report data serializes");
    s.push('\n');
    s
}

/// Reads a report for `set`. Transformed matrices and residuals missing
/// from the file are recomputed from the set and the transform.
pub fn parse_report_str(text: &str, source: &str, set: &MatrixSet) -> Result<DecompositionReport> {
    let file: ReportFile = serde_json::from_str(text).map_err(|e| json_error(source, &e))?;
    let bad = |field: &str, value: &str| Error::Parse {
        context: format!("{source}: {field}"),
        message: format!("unknown value `{value}`"),
    };
    let algorithm = match file.algorithm.as_str() {
        "A" => Algorithm::A,
        "B" => Algorithm::B,
        "C" => Algorithm::C,
        other => return Err(bad("algorithm", other)),
    };
    let kind = match file.partition.kind.as_str() {
        "BT" => PartitionKind::BT,
        "BD" => PartitionKind::BD,
        other => return Err(bad("partition.kind", other)),
    };
    let partition = BlockPartition::new(kind, file.partition.sizes)?;
    let transform = Transform {
        s: from_grid(&file.transform.s, "transform.s")?,
        s_inv: from_grid(&file.transform.s_inv, "transform.s_inv")?,
        unitary: file.transform.unitary,
    };
    let transformed = match file.transformed {
        Some(map) => {
            let (names, grids): (Vec<_>, Vec<_>) = map.into_iter().unzip();
            let matrices = grids
                .iter()
                .map(|g| from_grid(g, "transformed"))
                .collect::<Result<Vec<_>>>()?;
            MatrixSet::with_names(names, matrices)?
        }
        None => {
            let n = set.dim();
            if transform.s.shape() != (n, n) || transform.s_inv.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "transform is {:?}, matrices are {n}x{n}",
                    transform.s.shape()
                )));
            }
            set.conjugated(&transform.s, &transform.s_inv)
        }
    };
    let residuals = match file.residuals {
        Some(map) => transformed
            .names()
            .iter()
            .map(|name| map.get(name).copied().unwrap_or(f64::INFINITY))
            .collect(),
        None if partition.dim() == transformed.dim() => set_residuals(&transformed, &partition)?,
        None => vec![f64::INFINITY; transformed.len()],
    };
    let provenance = match file.provenance {
        Some(p) => provenance_from_dto(p)?,
        None => Provenance::Unspecified,
    };
    Ok(DecompositionReport {
        algorithm,
        partition,
        transform,
        transformed,
        residuals,
        provenance,
    })
}

pub fn parse_report(path: impl AsRef<Path>, set: &MatrixSet) -> Result<DecompositionReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_report_str(&text, &path.display().to_string(), set)
}

pub fn write_report(report: &DecompositionReport, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, report_to_json(report))?;
    Ok(())
}

/// Short plain-text summary of a report.
pub fn report_to_text(report: &DecompositionReport) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let sizes: Vec<String> = report.partition.sizes.iter().map(usize::to_string).collect();
    let _ = writeln!(s, "algorithm: {}", report.algorithm.tag());
    let _ = writeln!(
        s,
        "partition: {}({})",
        kind_tag(report.partition.kind),
        sizes.join(",")
    );
    let _ = writeln!(s, "unitary: {}", report.transform.unitary);
    for (name, r) in report.transformed.names().iter().zip(&report.residuals) {
        let _ = writeln!(s, "residual {name}: {r:e}");
    }
    match &report.provenance {
        Provenance::InvariantChain {
            chain_dims,
            search_exhausted,
            ..
        } => {
            let _ = writeln!(s, "chain: {chain_dims:?} (search exhausted: {search_exhausted})");
        }
        Provenance::CommutingMatrix {
            commutant_dim,
            candidate,
            spectrum,
            ..
        } => {
            let _ = writeln!(s, "commutant dimension: {commutant_dim}");
            let _ = writeln!(
                s,
                "commuting matrix: {candidate}, multiplicities {:?}",
                spectrum.multiplicities
            );
        }
        Provenance::Unspecified => {}
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omitted_imaginary_part_is_zero() {
        let set =
            parse_matrix_set_str(r#"{"n":2,"matrices":[{"name":"X","re":[[1,2],[3,4]]}]}"#, "t")
                .unwrap();
        assert_eq!(set.names(), ["X"]);
        assert!(set.matrices()[0].iter().all(|z| z.im == 0.0));
        assert_eq!(set.matrices()[0][(1, 0)].re, 3.0);
    }

    #[test]
    fn wrong_grid_shape_is_dimension_mismatch() {
        let text = r#"{"n":3,"matrices":[{"name":"X","re":[[1,2,3],[4,5,6]]}]}"#;
        assert!(matches!(
            parse_matrix_set_str(text, "t"),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let text = r#"{"n":1,"matrices":[{"name":"X","re":[[1]]},{"name":"X","re":[[2]]}]}"#;
        assert!(matches!(
            parse_matrix_set_str(text, "t"),
            Err(Error::DuplicateName(n)) if n == "X"
        ));
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = parse_matrix_set_str("{\n  \"n\": 2,\n  \"matrices\": [}\n", "in.json")
            .unwrap_err();
        match err {
            Error::Parse { context, .. } => assert!(context.starts_with("in.json:3:")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_field_is_parse_error() {
        let err = parse_matrix_set_str(r#"{"n":1,"matrices":[{"name":"X"}]}"#, "t").unwrap_err();
        assert!(matches!(err, Error::Parse { message, .. } if message.contains("`re`")));
    }

    #[test]
    fn matrix_set_round_trips() {
        let text = r#"{"n":2,"matrices":[{"name":"P","re":[[0.1,2],[3,4]],"im":[[0,-1.5],[0,0]]},{"name":"Q","re":[[1,0],[0,1]]}]}"#;
        let set = parse_matrix_set_str(text, "t").unwrap();
        let again = parse_matrix_set_str(&matrix_set_to_json(&set), "t").unwrap();
        assert_eq!(set, again);
    }
}
