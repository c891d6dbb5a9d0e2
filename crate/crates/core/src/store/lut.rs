use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces;

use super::{check_version, Origin, FORMAT_VERSION};

const FORMAT: &str = "naxbench-lut";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LutHeader {
    pub format: String,
    pub version: u32,
    pub space: String,
    /// Metric names in storage order (`params`, `flops`, `note10/latency`).
    pub metrics: Vec<String>,
    #[serde(default)]
    pub origin: Origin,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    values: BTreeMap<String, f64>,
}

/// Per-operation (micro spaces) or per-layer (macro spaces) costs.
#[derive(Clone, Debug, PartialEq)]
pub struct LookupTable {
    header: LutHeader,
    keys: Vec<String>,
    values: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl LookupTable {
    pub fn new(space: &str, metrics: Vec<String>) -> Self {
        LookupTable {
            header: LutHeader {
                format: FORMAT.into(),
                version: FORMAT_VERSION,
                space: space.into(),
                metrics,
                origin: Origin::Synthetic,
            },
            keys: Vec::new(),
            values: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn header(&self) -> &LutHeader {
        &self.header
    }

    pub fn metrics(&self) -> &[String] {
        &self.header.metrics
    }

    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.header.metrics.iter().position(|m| m == name)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Adds an entry; `values` follow the header's metric order.
    pub fn insert(&mut self, key: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let key = key.into();
        if values.len() != self.header.metrics.len() {
            return Err(Error::Schema(format!(
                "entry `{key}` has {} values for {} metrics",
                values.len(),
                self.header.metrics.len()
            )));
        }
        if self.index.contains_key(&key) {
            return Err(Error::Schema(format!("duplicate key `{key}`")));
        }
        self.index.insert(key.clone(), self.keys.len());
        self.keys.push(key);
        self.values.push(values);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.index.get(key).map(|&i| self.values[i].as_slice())
    }

    /// Like [`get`](Self::get) but a missing key is an error naming the key.
    pub fn require(&self, key: &str) -> Result<&[f64]> {
        self.get(key).ok_or_else(|| Error::MissingKey(key.into()))
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer(&mut out, &self.header)?;
        out.write_all(b"\n")?;
        for (key, vals) in self.keys.iter().zip(&self.values) {
            let entry = Entry {
                key: key.clone(),
                values: self
                    .header
                    .metrics
                    .iter()
                    .cloned()
                    .zip(vals.iter().copied())
                    .collect(),
            };
            serde_json::to_writer(&mut out, &entry)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let header_line = lines
            .next()
            .ok_or_else(|| Error::format(1, "missing header"))??;
        let header: LutHeader =
            serde_json::from_str(&header_line).map_err(|e| Error::format(1, e))?;
        check_version(&header.format, FORMAT, header.version)?;
        let space = spaces::by_name(&header.space)?;
        let universe: HashSet<String> = space.layer_key_universe().into_iter().collect();
        let mut table = LookupTable {
            header,
            keys: Vec::new(),
            values: Vec::new(),
            index: HashMap::new(),
        };
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: Entry = serde_json::from_str(&line).map_err(|e| Error::format(lineno, e))?;
            if !universe.contains(&entry.key) {
                return Err(Error::format(
                    lineno,
                    format!(
                        "key `{}` is not produced by space `{}`",
                        entry.key, table.header.space
                    ),
                ));
            }
            let values = table
                .header
                .metrics
                .iter()
                .map(|m| {
                    entry
                        .values
                        .get(m)
                        .copied()
                        .ok_or_else(|| Error::format(lineno, format!("missing metric `{m}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            table
                .insert(entry.key, values)
                .map_err(|e| Error::format(lineno, e))?;
        }
        Ok(table)
    }
}

pub fn load_lut(path: impl AsRef<Path>) -> Result<LookupTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingData(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    LookupTable::read_from(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> LookupTable {
        let mut t = LookupTable::new("darts", vec!["params".into(), "flops".into()]);
        t.insert("base", vec![1.0e5, 2.0e7]).unwrap();
        t.insert("normal:sep_conv_3x3", vec![1234.5, 6.0e5])
            .unwrap();
        t
    }

    #[test]
    fn round_trip_and_lookup() {
        let t = table();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let back = LookupTable::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.get("base"), Some(&[1.0e5, 2.0e7][..]));
        assert!(
            matches!(back.require("reduce:none"), Err(Error::MissingKey(k)) if k == "reduce:none")
        );
    }

    #[test]
    fn foreign_keys_are_rejected_on_load() {
        let mut buf = Vec::new();
        table().write_to(&mut buf).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("{\"key\":\"layer:e192:m3.5:h3\",\"values\":{\"params\":1,\"flops\":1}}\n");
        assert!(matches!(
            LookupTable::read_from(text.as_bytes()),
            Err(Error::Format { line: 4, .. })
        ));
    }

    #[test]
    fn duplicate_and_short_entries() {
        let mut t = table();
        assert!(t.insert("base", vec![0.0, 0.0]).is_err());
        assert!(t.insert("reduce:none", vec![0.0]).is_err());
    }
}
