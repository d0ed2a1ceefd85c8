use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use hlorentz_core::Report;
use serde::{Deserialize, Serialize};

use crate::corpus::CorpusSpec;
use crate::error::CliError;

/// One corpus item under one parameter choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub item: usize,
    pub params: BTreeMap<String, String>,
    pub scalars: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ItemResult {
    pub fn new(item: usize, params: &[(&str, String)]) -> Self {
        Self {
            item,
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            scalars: BTreeMap::new(),
            flags: BTreeMap::new(),
            error: None,
        }
    }

    pub fn absorb(&mut self, report: &Report, prefix: &str) {
        for (k, v) in &report.scalars {
            self.scalars.insert(format!("{prefix}{k}"), *v);
        }
        for (k, v) in &report.flags {
            self.flags.insert(format!("{prefix}{k}"), *v);
        }
    }

    pub fn group(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
    }
}

/// Range of one scalar over the items of one parameter group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub key: String,
    pub group: String,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    pub count: usize,
}

/// Brackets of `key` per parameter group, over items where it is positive
/// and finite.
pub fn brackets(items: &[ItemResult], key: &str) -> Vec<Bracket> {
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for it in items {
        if let Some(&v) = it.scalars.get(key) {
            if v.is_finite() && v > 0.0 {
                groups.entry(it.group()).or_default().push(v);
            }
        }
    }
    groups
        .into_iter()
        .map(|(group, vals)| {
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let max = vals.iter().copied().fold(0.0, f64::max);
            Bracket { key: key.to_string(), group, min, max, spread: max / min, count: vals.len() }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub corpus: CorpusSpec,
    pub items: Vec<ItemResult>,
    pub brackets: Vec<Bracket>,
    pub checks: BTreeMap<String, bool>,
    pub passed: bool,
    pub wall_clock_seconds: f64,
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:e}")
    }
}

impl RunReport {
    /// Per-item table: parameters, scalars and flags in sorted column order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let params: BTreeSet<&String> = self.items.iter().flat_map(|i| i.params.keys()).collect();
        let scalars: BTreeSet<&String> = self.items.iter().flat_map(|i| i.scalars.keys()).collect();
        let flags: BTreeSet<&String> = self.items.iter().flat_map(|i| i.flags.keys()).collect();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["item".to_string()];
        header.extend(params.iter().map(|s| s.to_string()));
        header.extend(scalars.iter().map(|s| s.to_string()));
        header.extend(flags.iter().map(|s| s.to_string()));
        header.push("error".into());
        w.write_record(&header)?;
        for it in &self.items {
            let mut row = vec![it.item.to_string()];
            row.extend(params.iter().map(|k| it.params.get(*k).cloned().unwrap_or_default()));
            row.extend(scalars.iter().map(|k| it.scalars.get(*k).map(|v| fmt_f64(*v)).unwrap_or_default()));
            row.extend(flags.iter().map(|k| it.flags.get(*k).map(|b| b.to_string()).unwrap_or_default()));
            row.push(it.error.clone().unwrap_or_default());
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| CliError::Io { path: "csv".into(), source: e })?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String, CliError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    /// Writes `<prefix>.csv` and `<prefix>.json`.
    pub fn save(&self, prefix: &Path) -> Result<(), CliError> {
        let csv_path = prefix.with_extension("csv");
        let json_path = prefix.with_extension("json");
        let io = |path: &Path, e| CliError::Io { path: path.display().to_string(), source: e };
        std::fs::write(&csv_path, self.csv_string()?).map_err(|e| io(&csv_path, e))?;
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Json { path: json_path.display().to_string(), source: e })?;
        std::fs::write(&json_path, json).map_err(|e| io(&json_path, e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brackets_group_by_params_and_skip_zero() {
        let mut items = Vec::new();
        for (i, (p, v)) in [("1", 2.0), ("1", 8.0), ("0.5", 3.0), ("0.5", 0.0)].into_iter().enumerate() {
            let mut it = ItemResult::new(i, &[("p", p.to_string())]);
            it.scalars.insert("ratio".into(), v);
            items.push(it);
        }
        let b = brackets(&items, "ratio");
        assert_eq!(b.len(), 2);
        assert_eq!((b[0].group.as_str(), b[0].spread, b[0].count), ("p=0.5", 1.0, 1));
        assert_eq!((b[1].group.as_str(), b[1].spread), ("p=1", 4.0));
    }

    #[test]
    fn csv_formats_specials() {
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(0.5), "5e-1");
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }
}
