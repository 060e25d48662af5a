use std::io::{Read, Write};
use std::path::Path;

use super::datasets::{builtin_notionals, OCC_CLASSES};
use super::DataError;

#[derive(Clone, Debug, PartialEq)]
pub struct NotionalRow {
    pub dealer: String,
    pub notionals: Vec<f64>,
}

/// Dealer notionals per asset class, billions USD.
#[derive(Clone, Debug, PartialEq)]
pub struct NotionalTable {
    pub source: String,
    pub classes: Vec<String>,
    pub rows: Vec<NotionalRow>,
}

impl NotionalTable {
    /// Parses `dealer,<class>,<class>,...` with a header row. Columns are
    /// matched by name; the standard OCC classes come first in their usual
    /// order, any others follow in header order.
    pub fn parse<R: Read>(reader: R, source: &str) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| DataError::Parse {
                line: 1,
                message: e.to_string(),
            })?
            .iter()
            .map(|h| h.to_ascii_lowercase())
            .collect();
        if header.is_empty() || header.iter().all(|h| h.is_empty()) {
            return Err(DataError::Empty(source.to_string()));
        }
        if header[0] != "dealer" {
            return Err(DataError::Parse {
                line: 1,
                message: format!("first column must be `dealer`, found `{}`", header[0]),
            });
        }
        let header_classes = &header[1..];
        if header_classes.is_empty() {
            return Err(DataError::Parse {
                line: 1,
                message: "no asset class columns".into(),
            });
        }
        for (a, name) in header_classes.iter().enumerate() {
            if name.is_empty() || header_classes[..a].contains(name) {
                return Err(DataError::Parse {
                    line: 1,
                    message: format!("empty or duplicate class column `{name}`"),
                });
            }
        }
        let mut classes: Vec<String> = OCC_CLASSES
            .iter()
            .filter(|c| header_classes.iter().any(|h| h == *c))
            .map(|c| c.to_string())
            .collect();
        classes.extend(header_classes.iter().filter(|h| !OCC_CLASSES.contains(&h.as_str())).cloned());
        let column_of: Vec<usize> = classes
            .iter()
            .map(|c| header_classes.iter().position(|h| h == c).unwrap())
            .collect();

        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| DataError::Parse {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let dealer = record.get(0).unwrap_or_default().to_string();
            if dealer.is_empty() {
                return Err(DataError::Parse {
                    line,
                    message: "missing dealer name".into(),
                });
            }
            let raw: Vec<f64> = (1..record.len())
                .map(|f| {
                    let field = record.get(f).unwrap_or_default();
                    field.replace('_', "").parse::<f64>().map_err(|_| DataError::Parse {
                        line,
                        message: format!("`{field}` is not a number"),
                    })
                })
                .collect::<Result<_, _>>()?;
            if let Some(pos) = raw.iter().position(|z| !(*z >= 0.0 && z.is_finite())) {
                return Err(DataError::NegativeNotional {
                    line,
                    dealer,
                    class: header_classes[pos].clone(),
                });
            }
            rows.push(NotionalRow {
                dealer,
                notionals: column_of.iter().map(|&c| raw[c]).collect(),
            });
        }
        if rows.is_empty() {
            return Err(DataError::Empty(source.to_string()));
        }
        Ok(Self {
            source: source.to_string(),
            classes,
            rows,
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["dealer".to_string()];
        header.extend(self.classes.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.dealer.clone()];
            rec.extend(row.notionals.iter().map(|z| z.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| DataError::Io {
            path: "<csv>".into(),
            source: e,
        })?;
        Ok(())
    }
}

/// Loads a built-in dataset by name, or a CSV file.
pub fn load_notionals(spec: &str) -> Result<NotionalTable, DataError> {
    if let Some(table) = builtin_notionals(spec) {
        return Ok(table);
    }
    let path = Path::new(spec);
    let file = std::fs::File::open(path).map_err(|e| DataError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    NotionalTable::parse(file, spec)
}
