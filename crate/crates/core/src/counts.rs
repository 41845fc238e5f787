//! Triple-record-system counts.
//!
//! Three overlapping case lists summarise into an incomplete 2x2x2 table
//! whose `000` cell (missed by every list) is unobserved. [`TrsCounts`]
//! holds the seven observed cells; every estimator in the crate consumes it.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The seven observable cells in canonical order.
pub const CELL_NAMES: [&str; 7] = ["x111", "x110", "x101", "x011", "x100", "x010", "x001"];

/// Capture pattern `(i, j, k)` of each canonical cell.
pub const CELL_PATTERNS: [[u8; 3]; 7] = [
    [1, 1, 1],
    [1, 1, 0],
    [1, 0, 1],
    [0, 1, 1],
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
];

/// Observed counts of a triple record system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TrsCounts {
    cells: [u64; 7],
}

impl TrsCounts {
    /// Builds counts from cells ordered as [`CELL_NAMES`].
    pub fn new(cells: [u64; 7]) -> Result<Self> {
        if cells.iter().sum::<u64>() == 0 {
            return Err(Error::InvalidCounts(
                "at least one individual must be observed (x0 >= 1)".into(),
            ));
        }
        Ok(Self { cells })
    }

    pub fn from_cells(
        x111: u64,
        x110: u64,
        x101: u64,
        x011: u64,
        x100: u64,
        x010: u64,
        x001: u64,
    ) -> Result<Self> {
        Self::new([x111, x110, x101, x011, x100, x010, x001])
    }

    pub fn cells(&self) -> [u64; 7] {
        self.cells
    }

    pub fn cells_f64(&self) -> [f64; 7] {
        self.cells.map(|c| c as f64)
    }

    pub fn x111(&self) -> u64 {
        self.cells[0]
    }
    pub fn x110(&self) -> u64 {
        self.cells[1]
    }
    pub fn x101(&self) -> u64 {
        self.cells[2]
    }
    pub fn x011(&self) -> u64 {
        self.cells[3]
    }
    pub fn x100(&self) -> u64 {
        self.cells[4]
    }
    pub fn x010(&self) -> u64 {
        self.cells[5]
    }
    pub fn x001(&self) -> u64 {
        self.cells[6]
    }

    /// Number of distinct individuals observed.
    pub fn x0(&self) -> u64 {
        self.cells.iter().sum()
    }

    /// Count of cell `(i, j, k)`; `None` for the unobserved `000` cell.
    pub fn get(&self, pattern: [u8; 3]) -> Option<u64> {
        CELL_PATTERNS
            .iter()
            .position(|p| *p == pattern)
            .map(|idx| self.cells[idx])
    }

    /// Dot-margin such as `"11."`, `"1.1"` or `".01"`: `.` sums over a list.
    ///
    /// The unobserved cell contributes nothing, so `"..."` equals `x0`.
    pub fn dot(&self, pattern: &str) -> Result<u64> {
        let spec: Vec<Option<u8>> = pattern
            .chars()
            .map(|c| match c {
                '0' => Ok(Some(0)),
                '1' => Ok(Some(1)),
                '.' | '+' => Ok(None),
                other => Err(Error::Parse(format!(
                    "bad margin pattern character `{other}`"
                ))),
            })
            .collect::<Result<_>>()?;
        if spec.len() != 3 {
            return Err(Error::Parse(format!(
                "margin pattern `{pattern}` must have three positions"
            )));
        }
        Ok(CELL_PATTERNS
            .iter()
            .zip(self.cells.iter())
            .filter(|(p, _)| {
                p.iter()
                    .zip(spec.iter())
                    .all(|(bit, want)| want.is_none_or(|w| w == *bit))
            })
            .map(|(_, c)| *c)
            .sum())
    }

    pub fn margins(&self) -> Margins {
        Margins::from_counts(self)
    }
}

impl fmt::Display for TrsCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.cells;
        write!(
            f,
            "x111={} x110={} x101={} x011={} x100={} x010={} x001={} (x0={})",
            c[0],
            c[1],
            c[2],
            c[3],
            c[4],
            c[5],
            c[6],
            self.x0()
        )
    }
}

impl Serialize for TrsCounts {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<&str, u64> = CELL_NAMES
            .iter()
            .copied()
            .zip(self.cells.iter().copied())
            .collect();
        map.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TrsCounts {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, serde_json::Value>::deserialize(deserializer)?;
        counts_from_json_map(&map).map_err(serde::de::Error::custom)
    }
}

/// Sufficient statistics of the time/behaviour model: first captures `u`,
/// recaptures `m` and the number `M` marked before each attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MtbSufficientStats {
    pub u1: u64,
    pub u2: u64,
    pub u3: u64,
    pub m2: u64,
    pub m3: u64,
    #[serde(rename = "M2")]
    pub big_m2: u64,
    #[serde(rename = "M3")]
    pub big_m3: u64,
}

/// Derived margins. Never stored alongside the counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Margins {
    pub x0: u64,
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
    pub x11_: u64,
    pub x1_1: u64,
    pub x_11: u64,
    pub x1_0: u64,
    pub x_10: u64,
    pub x10_: u64,
    pub x_01: u64,
    pub x0_1: u64,
    pub x01_: u64,
    pub mtb: MtbSufficientStats,
}

impl Margins {
    pub fn from_counts(c: &TrsCounts) -> Self {
        let [x111, x110, x101, x011, x100, x010, x001] = c.cells;
        let n1 = x111 + x110 + x101 + x100;
        let n2 = x111 + x110 + x011 + x010;
        let n3 = x111 + x101 + x011 + x001;
        let u2 = x011 + x010;
        Self {
            x0: c.x0(),
            n1,
            n2,
            n3,
            x11_: x111 + x110,
            x1_1: x111 + x101,
            x_11: x111 + x011,
            x1_0: x110 + x100,
            x_10: x110 + x010,
            x10_: x101 + x100,
            x_01: x101 + x001,
            x0_1: x011 + x001,
            x01_: x011 + x010,
            mtb: MtbSufficientStats {
                u1: n1,
                u2,
                u3: x001,
                m2: x111 + x110,
                m3: x111 + x101 + x011,
                big_m2: n1,
                big_m3: n1 + u2,
            },
        }
    }
}

/// Provenance of a dataset: disease, stratum, and optional population at risk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    pub stratum: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inhabitants: Option<u64>,
}

impl DatasetMeta {
    pub fn new(name: impl Into<String>, stratum: impl Into<String>, inhabitants: Option<u64>) -> Result<Self> {
        if inhabitants == Some(0) {
            return Err(Error::InvalidParameter("inhabitants must be positive".into()));
        }
        Ok(Self {
            name: name.into(),
            stratum: stratum.into(),
            inhabitants,
        })
    }
}

struct Builtin {
    name: &'static str,
    stratum: &'static str,
    cells: [u64; 7],
    inhabitants: Option<u64>,
}

// Legionnaires' disease (Netherlands, 1999) by region plus the hepatitis A
// outbreak (northern Taiwan, 1995).
const BUILTINS: [Builtin; 6] = [
    Builtin {
        name: "ld_all",
        stratum: "all",
        cells: [155, 31, 131, 45, 56, 30, 332],
        inhabitants: None,
    },
    Builtin {
        name: "ld_north",
        stratum: "north",
        cells: [13, 2, 6, 8, 3, 2, 35],
        inhabitants: Some(1_671_534),
    },
    Builtin {
        name: "ld_east",
        stratum: "east",
        cells: [45, 3, 42, 7, 13, 13, 62],
        inhabitants: Some(4_467_527),
    },
    Builtin {
        name: "ld_west",
        stratum: "west",
        cells: [46, 7, 55, 14, 23, 5, 136],
        inhabitants: Some(5_955_299),
    },
    Builtin {
        name: "ld_south",
        stratum: "south",
        cells: [51, 19, 28, 15, 13, 9, 99],
        inhabitants: Some(3_892_715),
    },
    Builtin {
        name: "hav",
        stratum: "all",
        cells: [28, 21, 17, 18, 69, 55, 63],
        inhabitants: None,
    },
];

/// Names of the built-in case-study datasets.
pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|b| b.name).collect()
}

pub fn builtin_dataset(name: &str) -> Result<(TrsCounts, DatasetMeta)> {
    let b = BUILTINS
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| Error::UnknownDataset(name.to_string()))?;
    Ok((
        TrsCounts::new(b.cells)?,
        DatasetMeta {
            name: b.name.to_string(),
            stratum: b.stratum.to_string(),
            inhabitants: b.inhabitants,
        },
    ))
}

pub fn builtin_datasets() -> Vec<(TrsCounts, DatasetMeta)> {
    BUILTINS
        .iter()
        .map(|b| builtin_dataset(b.name).expect("builtin tables are valid"))
        .collect()
}

/// Parses a one-row delimited table (comma, tab or semicolon) or a JSON
/// object whose keys are the seven cell names.
pub fn parse_counts(text: &str) -> Result<TrsCounts> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(Error::Parse("empty table".into()));
    }
    if trimmed.starts_with('{') {
        let map: BTreeMap<String, serde_json::Value> = serde_json::from_str(trimmed)
            .map_err(|e| Error::Parse(format!("invalid JSON counts: {e}")))?;
        return counts_from_json_map(&map);
    }
    parse_delimited(trimmed)
}

#[allow(clippy::byte_char_slices)]
fn parse_delimited(text: &str) -> Result<TrsCounts> {
    let header_line = text.lines().next().unwrap_or_default();
    let delimiter = [b'\t', b';', b',']
        .into_iter()
        .find(|d| header_line.as_bytes().contains(d))
        .unwrap_or(b',');
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    let mut column_of = [None; 7];
    for (col, name) in headers.iter().enumerate() {
        let idx = CELL_NAMES
            .iter()
            .position(|c| c.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse(format!("unknown column `{name}`")))?;
        if column_of[idx].replace(col).is_some() {
            return Err(Error::Parse(format!("duplicate column `{name}`")));
        }
    }
    if let Some(missing) = column_of.iter().position(Option::is_none) {
        return Err(Error::Parse(format!("missing column `{}`", CELL_NAMES[missing])));
    }
    let mut rows = reader.records();
    let row = rows
        .next()
        .ok_or_else(|| Error::Parse("table has a header but no data row".into()))?
        .map_err(|e| Error::Parse(e.to_string()))?;
    if rows.next().is_some() {
        return Err(Error::Parse("expected exactly one data row".into()));
    }
    let mut cells = [0u64; 7];
    for (idx, col) in column_of.iter().enumerate() {
        let raw = row.get(col.expect("checked above")).unwrap_or("");
        cells[idx] = parse_cell(CELL_NAMES[idx], raw)?;
    }
    TrsCounts::new(cells)
}

fn parse_cell(name: &str, raw: &str) -> Result<u64> {
    if raw.starts_with('-') {
        return Err(Error::InvalidCounts(format!("{name} is negative ({raw})")));
    }
    raw.parse::<u64>()
        .map_err(|_| Error::InvalidCounts(format!("{name} is not a non-negative integer ({raw:?})")))
}

fn counts_from_json_map(map: &BTreeMap<String, serde_json::Value>) -> Result<TrsCounts> {
    if let Some(unknown) = map.keys().find(|k| !CELL_NAMES.contains(&k.as_str())) {
        return Err(Error::Parse(format!("unknown key `{unknown}`")));
    }
    let mut cells = [0u64; 7];
    for (idx, name) in CELL_NAMES.iter().enumerate() {
        let value = map
            .get(*name)
            .ok_or_else(|| Error::Parse(format!("missing key `{name}`")))?;
        cells[idx] = match value {
            serde_json::Value::Number(n) => n.as_u64().ok_or_else(|| {
                Error::InvalidCounts(format!("{name} is not a non-negative integer ({n})"))
            })?,
            serde_json::Value::String(s) => parse_cell(name, s.trim())?,
            other => {
                return Err(Error::InvalidCounts(format!(
                    "{name} is not a number ({other})"
                )))
            }
        };
    }
    TrsCounts::new(cells)
}

/// Writes the counts as a two-line comma-separated table.
pub fn emit_counts(counts: &TrsCounts) -> String {
    let values: Vec<String> = counts.cells.iter().map(u64::to_string).collect();
    format!("{}\n{}\n", CELL_NAMES.join(","), values.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ld_national_row() {
        let c = parse_counts("x111,x110,x101,x011,x100,x010,x001\n155,31,131,45,56,30,332\n").unwrap();
        assert_eq!(c.x0(), 780);
        assert_eq!(c.x001(), 332);
    }

    #[test]
    fn parses_hav_row() {
        let c = parse_counts("x111,x110,x101,x011,x100,x010,x001\n28,21,17,18,69,55,63").unwrap();
        assert_eq!(c.x0(), 271);
    }

    #[test]
    fn column_order_is_irrelevant() {
        let c = parse_counts("x001\tx111\tx010\tx110\tx100\tx101\tx011\n332\t155\t30\t31\t56\t131\t45").unwrap();
        assert_eq!(c, builtin_dataset("ld_all").unwrap().0);
    }

    #[test]
    fn all_zero_row_is_rejected() {
        let err = parse_counts("x111,x110,x101,x011,x100,x010,x001\n0,0,0,0,0,0,0").unwrap_err();
        assert!(matches!(err, Error::InvalidCounts(_)));
    }

    #[test]
    fn malformed_tables_are_rejected() {
        assert!(parse_counts("").is_err());
        assert!(parse_counts("x111,x110,x101,x011,x100,x010\n1,2,3,4,5,6").is_err());
        assert!(parse_counts("x111,x111,x101,x011,x100,x010,x001\n1,2,3,4,5,6,7").is_err());
        assert!(parse_counts("x111,x110,x101,x011,x100,x010,x001\n1,2,-3,4,5,6,7").is_err());
        assert!(parse_counts("x111,x110,x101,x011,x100,x010,x001\n1,2,3.5,4,5,6,7").is_err());
        assert!(parse_counts("x111,x110,x101,x011,x100,x010,x001").is_err());
        assert!(parse_counts("x111,x110,x101,x011,x100,x010,x001\n1,1,1,1,1,1,1\n2,2,2,2,2,2,2").is_err());
    }

    #[test]
    fn json_object_is_accepted() {
        let c = parse_counts(
            r#"{"x111":51,"x110":19,"x101":28,"x011":15,"x100":13,"x010":9,"x001":99}"#,
        )
        .unwrap();
        assert_eq!(c.x0(), 234);
        assert!(parse_counts(r#"{"x111":1.5,"x110":1,"x101":1,"x011":1,"x100":1,"x010":1,"x001":1}"#).is_err());
        assert!(parse_counts(r#"{"x111":1,"x110":1,"x101":1,"x011":1,"x100":1,"x010":1}"#).is_err());
    }

    #[test]
    fn builtins_match_case_study_tables() {
        let (south, meta) = builtin_dataset("ld_south").unwrap();
        assert_eq!(south.cells(), [51, 19, 28, 15, 13, 9, 99]);
        assert_eq!(south.x0(), 234);
        assert_eq!(meta.inhabitants, Some(3_892_715));
        let (_, north) = builtin_dataset("ld_north").unwrap();
        assert_eq!(north.inhabitants, Some(1_671_534));
        assert_eq!(builtin_dataset("hav").unwrap().0.x0(), 271);
        assert!(matches!(builtin_dataset("cholera"), Err(Error::UnknownDataset(_))));
        assert_eq!(builtin_datasets().len(), 6);
    }

    #[test]
    fn regional_strata_nearly_cover_national() {
        // six national cases carry no region in the source table
        let all = builtin_dataset("ld_all").unwrap().0;
        let strata: u64 = ["ld_north", "ld_east", "ld_west", "ld_south"]
            .iter()
            .map(|n| builtin_dataset(n).unwrap().0.x0())
            .sum();
        assert_eq!(strata, 774);
        assert_eq!(all.x0() - strata, 6);
    }


    #[test]
    fn margins_of_case_studies() {
        let ld = builtin_dataset("ld_all").unwrap().0.margins();
        assert_eq!((ld.n1, ld.n2, ld.n3), (373, 261, 663));
        let hav = builtin_dataset("hav").unwrap().0.margins();
        assert_eq!((hav.n1, hav.n2, hav.n3), (135, 122, 126));
    }

    #[test]
    fn single_cell_mass() {
        let m = TrsCounts::from_cells(5, 0, 0, 0, 0, 0, 0).unwrap().margins();
        assert_eq!((m.n1, m.n2, m.n3), (5, 5, 5));
        assert_eq!((m.mtb.u2, m.mtb.u3), (0, 0));
    }

    #[test]
    fn dot_patterns_agree_with_named_margins() {
        let c = builtin_dataset("hav").unwrap().0;
        let m = c.margins();
        assert_eq!(c.dot("1..").unwrap(), m.n1);
        assert_eq!(c.dot(".1.").unwrap(), m.n2);
        assert_eq!(c.dot("..1").unwrap(), m.n3);
        assert_eq!(c.dot("11.").unwrap(), m.x11_);
        assert_eq!(c.dot(".01").unwrap(), m.x_01);
        assert_eq!(c.dot("0.1").unwrap(), m.x0_1);
        assert_eq!(c.dot("...").unwrap(), m.x0);
        assert!(c.dot("1x.").is_err());
        assert!(c.dot("1.").is_err());
    }

    #[test]
    fn json_serialization_uses_cell_names() {
        let c = builtin_dataset("ld_all").unwrap().0;
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"x101\":131"));
        let back: TrsCounts = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }
}
