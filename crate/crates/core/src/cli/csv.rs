//! Tagged CSV: a `# schema: <tag>` line, optional `# ` note lines, one
//! header row and one record per line.

use crate::error::{Result, SkError};

pub const SCHEMAS: [&str; 6] = [
    "skfluct.var_rep.v1",
    "skfluct.window_scan.v1",
    "skfluct.identities.v1",
    "skfluct.clt.v1",
    "skfluct.mc_f.v1",
    "skfluct.prop_scan.v1",
];

const TAG_PREFIX: &str = "# schema: ";

/// A cell; numbers use the shortest representation that parses back to the
/// same `f64`.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

/// Shortest round-trip text of `v`, switching to exponent form outside
/// `[1e-5, 1e16)` in magnitude.
pub fn render_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => render_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone)]
pub struct CsvTable {
    pub schema: String,
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(schema: &str, columns: &[&str]) -> Self {
        debug_assert!(SCHEMAS.contains(&schema));
        Self {
            schema: schema.to_string(),
            notes: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn note(&mut self, text: &str) {
        self.notes.push(text.to_string());
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = format!("{TAG_PREFIX}{}\n", self.schema);
        for n in &self.notes {
            out.push_str(&format!("# {n}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Parsed records as text cells keyed by the header.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub schema: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ParsedCsv {
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }
}

/// Parse a tagged CSV, rejecting missing or unknown schema tags.
pub fn parse_csv(text: &str) -> Result<ParsedCsv> {
    let mut lines = text.lines();
    let first = lines.next().unwrap_or_default();
    let schema = first
        .strip_prefix(TAG_PREFIX)
        .ok_or_else(|| SkError::InvalidParam("missing schema tag".into()))?
        .trim()
        .to_string();
    if !SCHEMAS.contains(&schema.as_str()) {
        return Err(SkError::InvalidParam(format!("unknown schema tag `{schema}`")));
    }
    let mut body = lines.skip_while(|l| l.starts_with('#'));
    let columns: Vec<String> = body
        .next()
        .ok_or_else(|| SkError::InvalidParam("missing header row".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = body
        .map(|l| {
            let r: Vec<String> = l.split(',').map(str::to_string).collect();
            if r.len() == columns.len() {
                Ok(r)
            } else {
                Err(SkError::InvalidParam(format!(
                    "row has {} cells, header has {}",
                    r.len(),
                    columns.len()
                )))
            }
        })
        .collect::<Result<_>>()?;
    Ok(ParsedCsv { schema, columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut t = CsvTable::new("skfluct.clt.v1", &["a", "b", "c"]);
        t.note("hello");
        t.push(vec![0.1.into(), 3usize.into(), Cell::Empty]);
        t.push(vec![(1.0f64 / 3.0).into(), true.into(), "x".into()]);
        let text = t.render();
        assert!(text.starts_with("# schema: skfluct.clt.v1\n# hello\na,b,c\n"));
        let p = parse_csv(&text).unwrap();
        assert_eq!(p.rows.len(), 2);
        let a: f64 = p.column("a").unwrap()[1].parse().unwrap();
        assert_eq!(a, 1.0 / 3.0);
        assert_eq!(p.column("c").unwrap(), vec!["", "x"]);
    }

    #[test]
    fn numbers_round_trip() {
        for v in [1.7622714495204152e-31, 0.1, -3.5e20, 12345.678, 1e-5, 9.99e-6, 0.0] {
            let text = render_f64(v);
            assert_eq!(text.parse::<f64>().unwrap(), v, "{text}");
        }
        assert_eq!(render_f64(1.5e-7), "1.5e-7");
        assert_eq!(render_f64(0.25), "0.25");
    }

    #[test]
    fn rejects_unknown_tags() {
        assert!(parse_csv("# schema: skfluct.other.v9\na\n1\n").is_err());
        assert!(parse_csv("a\n1\n").is_err());
        assert!(parse_csv("# schema: skfluct.clt.v1\na,b\n1\n").is_err());
    }
}
