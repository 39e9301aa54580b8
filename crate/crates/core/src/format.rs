//! JSON file formats and parsing with line context.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::table::{parse_word, word_string, BoxTable};

pub const PARTY_ORDER: &str = "party1-lsb";

/// `{"n": int, "order": "party1-lsb", "probs": [[input_word, output_word, Scalar], …]}`.
/// Words are written party 1 first; omitted entries are zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxFile {
    pub n: usize,
    pub order: String,
    pub probs: Vec<(String, String, Scalar)>,
}

impl BoxFile {
    pub fn from_table(table: &BoxTable) -> Self {
        let n = table.parties();
        BoxFile {
            n,
            order: PARTY_ORDER.to_string(),
            probs: table
                .entries()
                .filter(|(_, _, p)| !p.is_zero())
                .map(|(x, a, p)| (word_string(x, n), word_string(a, n), p.clone()))
                .collect(),
        }
    }

    /// Table exactly as written, without validity checks.
    pub fn to_quasi_table(&self) -> Result<BoxTable> {
        if self.order != PARTY_ORDER {
            return Err(Error::Parse(format!(
                "unsupported party order {:?}, expected {PARTY_ORDER:?}",
                self.order
            )));
        }
        let template = BoxTable::quasi_from_fn(self.n, |_, _| Scalar::zero())?;
        let mut entries = vec![None; template.probs().len()];
        for (x, a, p) in &self.probs {
            let xi = parse_word(x, self.n)?;
            let ai = parse_word(a, self.n)?;
            let slot = &mut entries[template.index(xi, ai)];
            if slot.is_some() {
                return Err(Error::Parse(format!("entry ({x}, {a}) listed twice")));
            }
            *slot = Some(p.clone());
        }
        let probs = entries.into_iter().map(|p| p.unwrap_or_default()).collect();
        BoxTable::quasi(self.n, probs)
    }

    pub fn to_table(&self) -> Result<BoxTable> {
        self.to_quasi_table()?.into_checked()
    }
}

/// Deserializes JSON, reporting failures as `origin:line:column` plus the
/// offending source line.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        let line = e.line();
        let context = text
            .lines()
            .nth(line.saturating_sub(1))
            .map(|l| format!("\n  {line} | {}", l.trim_end()))
            .unwrap_or_default();
        Error::Parse(format!("{origin}:{line}:{}: {e}{context}", e.column()))
    })
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pr_file_lists_eight_entries() {
        let file = BoxFile::from_table(&BoxTable::pr());
        assert_eq!(file.probs.len(), 8);
        assert_eq!(file.order, "party1-lsb");
        assert_eq!(file.to_table().unwrap(), BoxTable::pr());
    }

    #[test]
    fn duplicate_and_malformed_entries() {
        let mut file = BoxFile::from_table(&BoxTable::pr());
        file.probs.push(file.probs[0].clone());
        assert!(file.to_quasi_table().is_err());
        let mut file = BoxFile::from_table(&BoxTable::pr());
        file.order = "party1-msb".into();
        assert!(file.to_table().is_err());
        let mut file = BoxFile::from_table(&BoxTable::pr());
        file.probs.pop();
        assert!(file.to_quasi_table().is_ok());
        assert!(file.to_table().is_err());
    }

    #[test]
    fn parse_errors_carry_line_context() {
        let text = "{\n  \"n\": 2,\n  \"order\": party1-lsb\n}";
        let err = parse_json::<BoxFile>(text, "pr.json")
            .unwrap_err()
            .to_string();
        assert!(err.contains("pr.json:3:"), "{err}");
        assert!(err.contains("\"order\": party1-lsb"), "{err}");
    }
}
