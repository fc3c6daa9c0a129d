//! Append-only on-disk store of computed values.
//!
//! The file starts with the line `wprec-cache v1`; every further line is
//! `key<TAB>num/den`. Keys are namespaced:
//!
//! * `corr/<g>/<kappa>/<psi>` for mixed numbers,
//! * `vol/<g>/<n>/<kappa>` for volumes,
//! * `hodge/<pairing>/<g>/<kappa>/<psi>` for lambda pairings under the
//!   default base values.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::arith::{parse_rational, Rational};
use crate::correlator::CorrelatorKey;
use crate::error::{Error, Result};
use crate::hodge::HodgePairing;
use crate::multi_index::MultiIndex;

pub const HEADER: &str = "wprec-cache v1";

pub fn correlator_key(key: &CorrelatorKey) -> String {
    format!("corr/{key}")
}

pub fn volume_key(genus: u32, points: u32, kappa: &MultiIndex) -> String {
    format!("vol/{genus}/{points}/{kappa}")
}

pub fn hodge_key(pairing: HodgePairing, key: &CorrelatorKey) -> String {
    format!("hodge/{pairing}/{key}")
}

/// `num/den`, with the denominator always written.
pub fn format_value(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

#[derive(Debug)]
pub struct CacheFile {
    path: PathBuf,
    records: BTreeMap<String, Rational>,
    writer: Mutex<File>,
}

impl CacheFile {
    /// Opens `path`, creating it with a header if it does not exist.
    pub fn open(path: &Path) -> Result<Self> {
        let io = |e: std::io::Error| Error::Cache(format!("{}: {e}", path.display()));
        let mut records = BTreeMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(io)?;
            records = parse_records(&text)?;
        }
        let mut writer = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        if writer.metadata().map_err(io)?.len() == 0 {
            writeln!(writer, "{HEADER}").map_err(io)?;
        }
        Ok(Self {
            path: path.to_path_buf(),
            records,
            writer: Mutex::new(writer),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, key: &str) -> Option<&Rational> {
        self.records.get(key)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = (&String, &Rational)> {
        self.records.iter()
    }

    /// Writes a record unless the key is already stored. A stored value
    /// that differs is reported as an error.
    pub fn append(&mut self, key: &str, value: &Rational) -> Result<()> {
        if key.contains(['\t', '\n']) {
            return Err(Error::Cache(format!("key {key:?} contains a tab or newline")));
        }
        if let Some(old) = self.records.get(key) {
            if old != value {
                return Err(Error::Cache(format!("{key}: stored {old}, computed {value}")));
            }
            return Ok(());
        }
        let line = format!("{key}\t{}\n", format_value(value));
        let mut writer = self.writer.lock().expect("cache writer poisoned");
        writer
            .write_all(line.as_bytes())
            .and_then(|_| writer.flush())
            .map_err(|e| Error::Cache(format!("{}: {e}", self.path.display())))?;
        self.records.insert(key.to_string(), value.clone());
        Ok(())
    }
}

fn parse_records(text: &str) -> Result<BTreeMap<String, Rational>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == HEADER => {}
        None => return Ok(BTreeMap::new()),
        Some(h) => return Err(Error::Cache(format!("unsupported cache header {h:?}"))),
    }
    let mut records = BTreeMap::new();
    for (no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('\t') else {
            return Err(Error::Cache(format!("line {}: missing tab", no + 2)));
        };
        let value = parse_rational(value).map_err(|e| Error::Cache(format!("line {}: {e}", no + 2)))?;
        if let Some(old) = records.get(key) {
            if *old != value {
                return Err(Error::Cache(format!("line {}: conflicting values for {key}", no + 2)));
            }
        }
        records.insert(key.to_string(), value);
    }
    Ok(records)
}

/// Parsed form of a cache key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CacheEntry {
    Correlator(CorrelatorKey),
    Volume { genus: u32, points: u32, kappa: MultiIndex },
    Hodge { pairing: HodgePairing, key: CorrelatorKey },
}

impl std::str::FromStr for CacheEntry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unrecognized cache key {s:?}"));
        let (space, rest) = s.split_once('/').ok_or_else(bad)?;
        match space {
            "corr" => Ok(CacheEntry::Correlator(rest.parse()?)),
            "vol" => {
                let mut parts = rest.splitn(3, '/');
                let (Some(g), Some(n), Some(k)) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(bad());
                };
                Ok(CacheEntry::Volume {
                    genus: g.parse().map_err(|_| bad())?,
                    points: n.parse().map_err(|_| bad())?,
                    kappa: k.parse()?,
                })
            }
            "hodge" => {
                let (p, key) = rest.split_once('/').ok_or_else(bad)?;
                Ok(CacheEntry::Hodge {
                    pairing: p.parse()?,
                    key: key.parse()?,
                })
            }
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;

    #[test]
    fn keys_parse_back() {
        let k = CorrelatorKey::new(1, "1:1".parse().unwrap(), vec![0]);
        assert_eq!(correlator_key(&k).parse::<CacheEntry>().unwrap(), CacheEntry::Correlator(k.clone()));
        assert_eq!(
            hodge_key(HodgePairing::LambdaG, &k).parse::<CacheEntry>().unwrap(),
            CacheEntry::Hodge { pairing: HodgePairing::LambdaG, key: k }
        );
        let v = volume_key(0, 4, &"1:1".parse().unwrap());
        assert_eq!(v, "vol/0/4/1:1");
        assert!(matches!(v.parse::<CacheEntry>().unwrap(), CacheEntry::Volume { points: 4, .. }));
        assert!("nope/1".parse::<CacheEntry>().is_err());
    }

    #[test]
    fn value_format_keeps_denominator() {
        assert_eq!(format_value(&ratio(1, 1)), "1/1");
        assert_eq!(format_value(&ratio(-2, 4)), "-1/2");
    }

    #[test]
    fn header_is_checked() {
        assert!(parse_records("something else\n").is_err());
        assert!(parse_records("").unwrap().is_empty());
        let r = parse_records("wprec-cache v1\na\t1/2\na\t1/2\n").unwrap();
        assert_eq!(r.len(), 1);
        assert!(parse_records("wprec-cache v1\na\t1/2\na\t1/3\n").is_err());
        assert!(parse_records("wprec-cache v1\nno tab here\n").is_err());
    }
}
