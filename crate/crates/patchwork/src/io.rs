//! JSON and CSV interchange formats.
//!
//! Every format is a plain data-transfer struct with explicit conversions to
//! and from the domain types, so file schemas stay stable even if internals
//! move.  Shapes:
//!
//! * Configuration: `{"field":{"p":2,"k":1},"ambient_dim":3,"vectors":[[1,0,0],...]}`
//!   with vectors in file order and multiset semantics.
//! * Patch: the configuration shape plus ordered `"left"`/`"right"` terminal
//!   lists.
//! * PeriodicFit: `{"delta":"p/q","period":p,"offsets":["p/q",...],"threshold":m,"exact":bool}`.
//! * ExtremalTable: JSON with inline witnesses, or CSV
//!   `n,ex,witness_json_path` next to one witness file per row.
//! * Decomposition report: factors, parts, optional q and linking witnesses,
//!   and the clause-check results.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::decompose::{ClauseReport, LinkStep, PathDecomposition, ProductDecomposition};
use crate::error::{Error, Result};
use crate::extremal::{
    ClassSpec, ExtremalEntry, ExtremalTable, FamilyMember, FamilyRow, PeriodicFit,
};
use crate::field::{Fe, Field, FieldSpec};
use crate::linalg::Vector;
use crate::patch::RootedConfiguration;
use crate::ratio::{format_rational, parse_rational};
use crate::structure::BranchDecomposition;

fn coords_of(v: &Vector) -> Vec<u8> {
    v.coords.iter().map(|c| c.0).collect()
}

fn vector_of(coords: &[u8]) -> Vector {
    Vector::new(coords.iter().map(|&c| Fe(c)).collect())
}

/// Configuration interchange shape.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigDto {
    pub field: FieldSpec,
    pub ambient_dim: usize,
    pub vectors: Vec<Vec<u8>>,
}

impl ConfigDto {
    pub fn from_config(a: &Configuration) -> ConfigDto {
        ConfigDto {
            field: a.field.spec().clone(),
            ambient_dim: a.ambient_dim,
            vectors: a.vectors.iter().map(coords_of).collect(),
        }
    }

    pub fn into_config(&self) -> Result<Configuration> {
        let field = Field::new(self.field.clone())?;
        Configuration::new(
            field,
            self.ambient_dim,
            self.vectors.iter().map(|c| vector_of(c)).collect(),
        )
    }
}

/// Patch interchange shape: a configuration plus ordered terminal lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchDto {
    pub field: FieldSpec,
    pub ambient_dim: usize,
    pub vectors: Vec<Vec<u8>>,
    pub left: Vec<Vec<u8>>,
    pub right: Vec<Vec<u8>>,
}

impl PatchDto {
    pub fn from_patch(h: &RootedConfiguration) -> PatchDto {
        PatchDto {
            field: h.core.field.spec().clone(),
            ambient_dim: h.core.ambient_dim,
            vectors: h.core.vectors.iter().map(coords_of).collect(),
            left: h.left.iter().map(coords_of).collect(),
            right: h.right.iter().map(coords_of).collect(),
        }
    }

    pub fn into_patch(&self) -> Result<RootedConfiguration> {
        let core = ConfigDto {
            field: self.field.clone(),
            ambient_dim: self.ambient_dim,
            vectors: self.vectors.clone(),
        }
        .into_config()?;
        RootedConfiguration::new(
            core,
            self.left.iter().map(|c| vector_of(c)).collect(),
            self.right.iter().map(|c| vector_of(c)).collect(),
        )
    }
}

/// Class specification interchange shape.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSpecDto {
    pub field: FieldSpec,
    pub width_bound: usize,
    #[serde(default)]
    pub excluded_minors: Vec<ConfigDto>,
    pub rank_cap: usize,
}

impl ClassSpecDto {
    pub fn from_spec(spec: &ClassSpec) -> ClassSpecDto {
        ClassSpecDto {
            field: spec.field.spec().clone(),
            width_bound: spec.width_bound,
            excluded_minors: spec
                .excluded_minors
                .iter()
                .map(ConfigDto::from_config)
                .collect(),
            rank_cap: spec.rank_cap,
        }
    }

    pub fn into_spec(&self) -> Result<ClassSpec> {
        let field = Field::new(self.field.clone())?;
        let minors = self
            .excluded_minors
            .iter()
            .map(|m| m.into_config())
            .collect::<Result<Vec<_>>>()?;
        ClassSpec::new(field, self.width_bound, minors, self.rank_cap)
    }
}

/// Periodic fit interchange shape; rationals travel as `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicFitDto {
    pub delta: String,
    pub period: usize,
    pub offsets: Vec<String>,
    pub threshold: i64,
    pub exact: bool,
}

impl PeriodicFitDto {
    pub fn from_fit(fit: &PeriodicFit) -> PeriodicFitDto {
        PeriodicFitDto {
            delta: format_rational(&fit.delta),
            period: fit.period,
            offsets: fit.offsets.iter().map(format_rational).collect(),
            threshold: fit.threshold,
            exact: fit.exact,
        }
    }

    pub fn into_fit(&self) -> Result<PeriodicFit> {
        let offsets = self
            .offsets
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        if offsets.len() != self.period || self.period == 0 {
            return Err(Error::invalid(
                "offsets length must equal the period and the period must be positive",
            ));
        }
        Ok(PeriodicFit {
            delta: parse_rational(&self.delta)?,
            period: self.period,
            offsets,
            threshold: self.threshold,
            exact: self.exact,
        })
    }
}

/// One extremal table row in the JSON export.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalEntryDto {
    pub ex: i64,
    pub exhaustive: bool,
    pub witness: ConfigDto,
}

/// Extremal table JSON export with inline witnesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalTableDto {
    pub entries: BTreeMap<usize, ExtremalEntryDto>,
}

impl ExtremalTableDto {
    pub fn from_table(t: &ExtremalTable) -> ExtremalTableDto {
        ExtremalTableDto {
            entries: t
                .entries
                .iter()
                .map(|(&n, e)| {
                    (
                        n,
                        ExtremalEntryDto {
                            ex: e.ex_value as i64,
                            exhaustive: e.exhaustive,
                            witness: ConfigDto::from_config(&e.witness),
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn into_table(&self) -> Result<ExtremalTable> {
        let mut entries = BTreeMap::new();
        for (&n, e) in &self.entries {
            if e.ex < 0 {
                return Err(Error::invalid("extremal values are non-negative"));
            }
            entries.insert(
                n,
                ExtremalEntry {
                    ex_value: e.ex as usize,
                    witness: e.witness.into_config()?,
                    exhaustive: e.exhaustive,
                },
            );
        }
        Ok(ExtremalTable { entries })
    }
}

/// A full decomposition report: the factor chain, the element partition, the
/// uniform boundary size and linking witnesses when the mode produces them,
/// and the independent clause-check results.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecomposeReportDto {
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<usize>,
    pub factors: Vec<PatchDto>,
    pub parts: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub links: Option<Vec<Option<LinkStep>>>,
    pub base: BranchDecomposition,
    pub clauses: Vec<ClauseReport>,
}

impl DecomposeReportDto {
    pub fn from_product(
        mode: &str,
        d: &ProductDecomposition,
        clauses: Vec<ClauseReport>,
    ) -> DecomposeReportDto {
        DecomposeReportDto {
            mode: mode.to_string(),
            q: None,
            factors: d.factors.iter().map(PatchDto::from_patch).collect(),
            parts: d.parts.clone(),
            links: None,
            base: d.base.clone(),
            clauses,
        }
    }

    pub fn from_path(d: &PathDecomposition, clauses: Vec<ClauseReport>) -> DecomposeReportDto {
        DecomposeReportDto {
            mode: "patches".to_string(),
            q: Some(d.q),
            factors: d.factors.iter().map(PatchDto::from_patch).collect(),
            parts: d.parts.clone(),
            links: Some(d.links.clone()),
            base: d.base.clone(),
            clauses,
        }
    }
}

/// Family member statistics: the composed configuration with its dimension
/// and point count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyMemberDto {
    pub dim: usize,
    pub epsilon: usize,
    pub config: ConfigDto,
}

impl FamilyMemberDto {
    pub fn from_member(m: &FamilyMember) -> FamilyMemberDto {
        FamilyMemberDto {
            dim: m.dim,
            epsilon: m.epsilon,
            config: ConfigDto::from_config(&m.config),
        }
    }
}

/// One rank of a family-versus-table comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRowDto {
    pub l: usize,
    pub n: usize,
    pub family_epsilon: usize,
    pub ex_value: usize,
    pub equal: bool,
    pub member_in_class: bool,
}

/// The full family-versus-table report with its aggregate verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyReportDto {
    pub rows: Vec<FamilyRowDto>,
    pub all_equal: bool,
}

impl FamilyReportDto {
    pub fn from_rows(rows: &[FamilyRow]) -> FamilyReportDto {
        FamilyReportDto {
            rows: rows
                .iter()
                .map(|r| FamilyRowDto {
                    l: r.l,
                    n: r.n,
                    family_epsilon: r.family_epsilon,
                    ex_value: r.ex_value,
                    equal: r.equal,
                    member_in_class: r.member_in_class,
                })
                .collect(),
            all_equal: !rows.is_empty() && rows.iter().all(|r| r.equal),
        }
    }
}

/// Branch-width / linkedness report.  `mode` records how the decomposition
/// was obtained: `"supplied"` (validated as given), `"exact"` (optimal width,
/// linked by construction), or `"heuristic"` (upper bound only, linkedness
/// not determined).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkedReportDto {
    pub mode: String,
    pub elements: usize,
    pub width: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub linked: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub violation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
    pub decomposition: BranchDecomposition,
}

/// Write the CSV (`n,ex,witness_json_path`) plus one witness JSON per row
/// and the inline-witness JSON export into `dir`; returns the CSV path.
pub fn write_table_exports(table: &ExtremalTable, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::invalid(format!("cannot create {}: {e}", dir.display())))?;
    let mut csv = String::from("n,ex,witness_json_path\n");
    for (n, e) in &table.entries {
        let name = format!("witness_{n}.json");
        let dto = ConfigDto::from_config(&e.witness);
        let body = serde_json::to_string_pretty(&dto)
            .map_err(|e| Error::internal(format!("witness serialization failed: {e}")))?;
        std::fs::write(dir.join(&name), body)
            .map_err(|e| Error::invalid(format!("cannot write witness file: {e}")))?;
        csv.push_str(&format!("{n},{},{name}\n", e.ex_value));
    }
    let csv_path = dir.join("table.csv");
    std::fs::write(&csv_path, csv)
        .map_err(|e| Error::invalid(format!("cannot write table.csv: {e}")))?;
    let json = serde_json::to_string_pretty(&ExtremalTableDto::from_table(table))
        .map_err(|e| Error::internal(format!("table serialization failed: {e}")))?;
    std::fs::write(dir.join("table.json"), json)
        .map_err(|e| Error::invalid(format!("cannot write table.json: {e}")))?;
    Ok(csv_path)
}

/// Read an `n,ex[,witness_json_path]` CSV into the plain integer table shape
/// used by the fitter.  The witness column is optional and ignored here.
pub fn read_table_csv(path: &Path) -> Result<BTreeMap<usize, i64>> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in body.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if i == 0 && fields[0].trim().eq_ignore_ascii_case("n") {
            continue; // header
        }
        if fields.len() < 2 {
            return Err(Error::invalid(format!(
                "line {} of {}: expected at least n,ex",
                i + 1,
                path.display()
            )));
        }
        let n: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad rank {:?} on line {}", fields[0], i + 1)))?;
        let v: i64 = fields[1]
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad value {:?} on line {}", fields[1], i + 1)))?;
        if out.insert(n, v).is_some() {
            return Err(Error::invalid(format!("duplicate rank {n} in the table")));
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("the table file has no data rows"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::{ex_table, fit_periodic};
    use crate::ratio::rat;

    fn gf(order: usize) -> Field {
        Field::of_order(order as u8).unwrap()
    }

    #[test]
    fn configuration_json_round_trips_and_matches_the_documented_shape() {
        let a = Configuration::from_rows(gf(2), 3, &[&[1, 0, 0], &[0, 1, 0], &[1, 1, 0]]).unwrap();
        let dto = ConfigDto::from_config(&a);
        let json = serde_json::to_value(&dto).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "field": {"p": 2, "k": 1},
                "ambient_dim": 3,
                "vectors": [[1,0,0],[0,1,0],[1,1,0]]
            })
        );
        let parsed: ConfigDto = serde_json::from_value(json).unwrap();
        assert_eq!(parsed.into_config().unwrap(), a);
    }

    #[test]
    fn patch_json_round_trips() {
        let core = Configuration::from_rows(gf(3), 2, &[&[1, 1], &[0, 1]]).unwrap();
        let h = RootedConfiguration::new(core, vec![Vector::unit(2, 0)], vec![Vector::unit(2, 1)])
            .unwrap();
        let dto = PatchDto::from_patch(&h);
        let json = serde_json::to_string(&dto).unwrap();
        let parsed: PatchDto = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, dto);
        assert_eq!(parsed.into_patch().unwrap(), h);
    }

    #[test]
    fn bad_coordinates_are_rejected_on_ingest() {
        let dto = ConfigDto {
            field: FieldSpec::for_order(2).unwrap(),
            ambient_dim: 2,
            vectors: vec![vec![1, 7]],
        };
        assert!(matches!(dto.into_config(), Err(Error::InvalidInput(_))));
        let dto = ConfigDto {
            field: FieldSpec::for_order(2).unwrap(),
            ambient_dim: 2,
            vectors: vec![vec![1]],
        };
        assert!(matches!(dto.into_config(), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn periodic_fit_json_round_trips() {
        let fit = PeriodicFit {
            delta: rat(3, 2),
            period: 2,
            offsets: vec![rat(-1, 1), rat(-13, 2)],
            threshold: -1,
            exact: true,
        };
        let dto = PeriodicFitDto::from_fit(&fit);
        assert_eq!(dto.delta, "3/2");
        assert_eq!(dto.offsets, vec!["-1", "-13/2"]);
        let json = serde_json::to_string(&dto).unwrap();
        let parsed: PeriodicFitDto = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.into_fit().unwrap(), fit);
        let broken = PeriodicFitDto {
            offsets: vec!["1".to_string()],
            ..dto
        };
        assert!(broken.into_fit().is_err(), "offsets must match the period");
    }

    #[test]
    fn table_exports_round_trip_through_csv_and_json() {
        let spec = ClassSpec::new(gf(2), 1, vec![], 3).unwrap();
        let table = ex_table(&spec, 3).unwrap();
        let dir = std::env::temp_dir().join(format!("patchwork-io-{}", std::process::id()));
        let csv_path = write_table_exports(&table, &dir).unwrap();
        let read = read_table_csv(&csv_path).unwrap();
        assert_eq!(read, table.values());
        let fit = fit_periodic(&read, 1).unwrap();
        assert!(fit.exact);
        let json = std::fs::read_to_string(dir.join("table.json")).unwrap();
        let parsed: ExtremalTableDto = serde_json::from_str(&json).unwrap();
        let back = parsed.into_table().unwrap();
        assert_eq!(back.values(), table.values());
        for (n, e) in &back.entries {
            assert!(e.witness.is_isomorphic(&table.entries[n].witness).unwrap());
            let w = std::fs::read_to_string(dir.join(format!("witness_{n}.json"))).unwrap();
            let wdto: ConfigDto = serde_json::from_str(&w).unwrap();
            assert_eq!(wdto.into_config().unwrap(), table.entries[n].witness);
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn malformed_csv_is_rejected() {
        let dir = std::env::temp_dir().join(format!("patchwork-io-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("bad.csv");
        std::fs::write(&p, "n,ex\n1\n").unwrap();
        assert!(read_table_csv(&p).is_err());
        std::fs::write(&p, "n,ex\n1,2\n1,3\n").unwrap();
        assert!(read_table_csv(&p).is_err(), "duplicate ranks");
        std::fs::write(&p, "n,ex\n").unwrap();
        assert!(read_table_csv(&p).is_err(), "no data rows");
        std::fs::write(&p, "2,5\n3,7\n").unwrap();
        assert_eq!(
            read_table_csv(&p).unwrap(),
            BTreeMap::from([(2, 5), (3, 7)]),
            "headerless files parse too"
        );
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn class_spec_json_round_trips() {
        let f = gf(2);
        let triangle =
            Configuration::from_rows(f.clone(), 2, &[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
        let spec = ClassSpec::new(f, 2, vec![triangle], 4).unwrap();
        let dto = ClassSpecDto::from_spec(&spec);
        let json = serde_json::to_string(&dto).unwrap();
        let parsed: ClassSpecDto = serde_json::from_str(&json).unwrap();
        let back = parsed.into_spec().unwrap();
        assert_eq!(back.width_bound, 2);
        assert_eq!(back.rank_cap, 4);
        assert_eq!(back.excluded_minors.len(), 1);
        // Minimal spec without the optional exclusion list.
        let minimal: ClassSpecDto =
            serde_json::from_str(r#"{"field":{"p":2,"k":1},"width_bound":1,"rank_cap":3}"#)
                .unwrap();
        assert!(minimal.into_spec().unwrap().excluded_minors.is_empty());
    }

    #[test]
    fn decompose_report_round_trips() {
        let a =
            Configuration::from_rows(gf(2), 3, &[&[1, 0, 0], &[1, 1, 0], &[0, 1, 1], &[0, 0, 1]])
                .unwrap();
        let d = crate::decompose::path_decomposition(&a, 1, 2, true).unwrap();
        let clauses = crate::decompose::verify_path_decomposition(&a, 1, 2, &d);
        let dto = DecomposeReportDto::from_path(&d, clauses);
        let json = serde_json::to_string_pretty(&dto).unwrap();
        let parsed: DecomposeReportDto = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, dto);
        assert_eq!(parsed.mode, "patches");
        assert_eq!(parsed.q, Some(d.q));
        for (p, h) in parsed.factors.iter().zip(&d.factors) {
            assert_eq!(&p.into_patch().unwrap(), h);
        }
    }

    #[test]
    fn family_and_linked_reports_round_trip() {
        let f = gf(2);
        let core = Configuration::from_rows(f.clone(), 1, &[&[1]]).unwrap();
        let g = RootedConfiguration::new(core, vec![Vector::unit(1, 0)], vec![Vector::unit(1, 0)])
            .unwrap();
        let member = crate::extremal::grow_family(&g, &g, &g, 2).unwrap();
        let dto = FamilyMemberDto::from_member(&member);
        let json = serde_json::to_string(&dto).unwrap();
        let parsed: FamilyMemberDto = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, dto);
        assert_eq!(parsed.config.into_config().unwrap(), member.config);

        let spec = ClassSpec::new(f.clone(), 1, vec![], 2).unwrap();
        let table = ex_table(&spec, 2).unwrap();
        let rows = crate::extremal::verify_extremal_family(&spec, &g, &g, &g, &table).unwrap();
        let report = FamilyReportDto::from_rows(&rows);
        let json = serde_json::to_string(&report).unwrap();
        let parsed: FamilyReportDto = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, report);

        let a = Configuration::from_rows(f, 2, &[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
        let bw = crate::structure::branch_width(&a, crate::structure::BwMode::Exact).unwrap();
        let report = LinkedReportDto {
            mode: "exact".to_string(),
            elements: a.len(),
            width: bw.width,
            linked: Some(true),
            violation: None,
            note: None,
            decomposition: bw.decomposition,
        };
        let json = serde_json::to_string(&report).unwrap();
        assert!(
            !json.contains("violation") && !json.contains("note"),
            "empty optional fields stay out of the serialized report"
        );
        let parsed: LinkedReportDto = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, report);
    }
}
