use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::Genotype;
use crate::spaces::{self, SearchSpace};

use super::{check_version, Origin, FORMAT_VERSION};

const FORMAT: &str = "naxbench-tabular";

/// One stored architecture: repeated error measurements plus deterministic
/// complexity and per-device hardware metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub x: Genotype,
    #[serde(rename = "fe")]
    pub fe_reps: Vec<f64>,
    #[serde(rename = "c", default)]
    pub complexity: BTreeMap<String, f64>,
    #[serde(rename = "h", default)]
    pub hardware: BTreeMap<String, BTreeMap<String, f64>>,
}

impl FitnessRecord {
    pub fn mean_error(&self) -> f64 {
        self.fe_reps.iter().sum::<f64>() / self.fe_reps.len() as f64
    }

    /// Deterministic metric by key (`params`, `gpu/latency`, ...).
    pub fn metric(&self, key: &str) -> Option<f64> {
        match key.split_once('/') {
            Some((device, name)) => self.hardware.get(device)?.get(name).copied(),
            None => self.complexity.get(key).copied(),
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.fe_reps.is_empty() {
            return Err("record has no error repetitions".into());
        }
        if let Some(v) = self.fe_reps.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(format!("error value {v} outside [0, 1]"));
        }
        let metrics = self
            .complexity
            .iter()
            .chain(self.hardware.values().flat_map(|m| m.iter()));
        for (name, v) in metrics {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(format!(
                    "metric `{name}` = {v} must be finite and non-negative"
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabularHeader {
    pub format: String,
    pub version: u32,
    pub space: String,
    #[serde(rename = "D")]
    pub dim: usize,
    /// Metric keys every record carries, `fe` first.
    pub objectives: Vec<String>,
    #[serde(default)]
    pub exhaustive: bool,
    #[serde(default)]
    pub origin: Origin,
}

impl TabularHeader {
    pub fn new(space: &dyn SearchSpace, objectives: Vec<String>, exhaustive: bool) -> Self {
        TabularHeader {
            format: FORMAT.into(),
            version: FORMAT_VERSION,
            space: space.descriptor().name.clone(),
            dim: space.descriptor().dim(),
            objectives,
            exhaustive,
            origin: Origin::Synthetic,
        }
    }
}

/// Genotype-indexed fitness database.
#[derive(Clone, Debug)]
pub struct TabularDb {
    header: TabularHeader,
    records: Vec<FitnessRecord>,
    index: HashMap<Vec<u32>, usize>,
}

impl PartialEq for TabularDb {
    fn eq(&self, other: &Self) -> bool {
        self.header == other.header && self.records == other.records
    }
}

impl TabularDb {
    pub fn new(header: TabularHeader) -> Self {
        TabularDb {
            header,
            records: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn header(&self) -> &TabularHeader {
        &self.header
    }

    pub fn space_name(&self) -> &str {
        &self.header.space
    }

    pub fn is_exhaustive(&self) -> bool {
        self.header.exhaustive
    }

    pub fn insert(&mut self, record: FitnessRecord) -> Result<()> {
        if self.index.contains_key(record.x.as_slice()) {
            return Err(Error::Schema(format!("duplicate genotype {:?}", record.x)));
        }
        self.index.insert(record.x.to_vec(), self.records.len());
        self.records.push(record);
        Ok(())
    }

    pub fn get(&self, x: &[u32]) -> Option<&FitnessRecord> {
        self.index.get(x).map(|&i| &self.records[i])
    }

    pub fn records(&self) -> &[FitnessRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn has_metric(&self, key: &str) -> bool {
        self.header.objectives.iter().any(|o| o == key)
    }

    /// Fails unless the database was built for `space`.
    pub fn expect_space(&self, space: &str) -> Result<()> {
        if self.header.space != space {
            return Err(Error::Schema(format!(
                "database is for space `{}`, expected `{space}`",
                self.header.space
            )));
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer(&mut out, &self.header)?;
        out.write_all(b"\n")?;
        for record in &self.records {
            serde_json::to_writer(&mut out, record)?;
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
        let header: TabularHeader =
            serde_json::from_str(&header_line).map_err(|e| Error::format(1, e))?;
        check_version(&header.format, FORMAT, header.version)?;
        let space = spaces::by_name(&header.space)?;
        if space.descriptor().dim() != header.dim {
            return Err(Error::Schema(format!(
                "space `{}` has D={}, header says {}",
                header.space,
                space.descriptor().dim(),
                header.dim
            )));
        }
        if header.objectives.first().map(String::as_str) != Some("fe") {
            return Err(Error::Schema("objective list must start with `fe`".into()));
        }
        let mut db = TabularDb::new(header);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: FitnessRecord =
                serde_json::from_str(&line).map_err(|e| Error::format(lineno, e))?;
            space
                .descriptor()
                .check(&record.x)
                .map_err(|e| Error::format(lineno, e))?;
            record.check().map_err(|e| Error::format(lineno, e))?;
            if let Some(missing) = db.header.objectives[1..]
                .iter()
                .find(|k| record.metric(k).is_none())
            {
                return Err(Error::format(
                    lineno,
                    format!("record lacks metric `{missing}`"),
                ));
            }
            db.insert(record).map_err(|e| Error::format(lineno, e))?;
        }
        if db.header.exhaustive {
            if !space.enumerable() {
                return Err(Error::Schema(format!(
                    "space `{}` cannot be stored exhaustively",
                    db.header.space
                )));
            }
            let expected = spaces::enumerate(space.as_ref())?.count();
            if expected != db.len() {
                return Err(Error::Schema(format!(
                    "exhaustive database has {} records, space has {expected}",
                    db.len()
                )));
            }
        }
        Ok(db)
    }
}

pub fn load_tabular(path: impl AsRef<Path>) -> Result<TabularDb> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingData(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    TabularDb::read_from(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_db() -> TabularDb {
        let space = spaces::by_name("nats").unwrap();
        let header = TabularHeader::new(
            space.as_ref(),
            vec!["fe".into(), "params".into(), "gpu/latency".into()],
            false,
        );
        let mut db = TabularDb::new(header);
        for (i, fe) in [[0.1, 0.12, 0.11], [0.3, 0.3, 0.31], [0.07, 0.08, 0.0625]]
            .into_iter()
            .enumerate()
        {
            db.insert(FitnessRecord {
                x: Genotype::new(vec![i as u32, 0, 1, 2, 3]),
                fe_reps: fe.to_vec(),
                complexity: [("params".to_string(), 1.0e5 * (i + 1) as f64 + 0.1)].into(),
                hardware: [(
                    "gpu".to_string(),
                    [("latency".to_string(), 3.0e-3 / (i + 1) as f64)].into(),
                )]
                .into(),
            })
            .unwrap();
        }
        db
    }

    fn round_trip(db: &TabularDb) -> Result<TabularDb> {
        let mut buf = Vec::new();
        db.write_to(&mut buf).unwrap();
        TabularDb::read_from(buf.as_slice())
    }

    #[test]
    fn three_records_load_as_three() {
        let db = round_trip(&sample_db()).unwrap();
        assert_eq!(db.len(), 3);
        assert_eq!(db, sample_db());
        let r = db.get(&[1, 0, 1, 2, 3]).unwrap();
        assert_eq!(r.metric("gpu/latency"), Some(1.5e-3));
        assert_eq!(r.metric("params"), Some(2.0e5 + 0.1));
        assert!(db.get(&[7, 7, 7, 7, 7]).is_none());
    }

    #[test]
    fn duplicate_key_is_rejected_with_line() {
        let db = sample_db();
        let mut buf = Vec::new();
        db.write_to(&mut buf).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        let second = text.lines().nth(2).unwrap().to_string();
        text.push_str(&second);
        text.push('\n');
        match TabularDb::read_from(text.as_bytes()) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let mut buf = Vec::new();
        sample_db().write_to(&mut buf).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("{\"x\": [0,0,0,0,0], \"fe\": [1.5]}\n");
        match TabularDb::read_from(text.as_bytes()) {
            Err(Error::Format { line, message }) => {
                assert_eq!(line, 5);
                assert!(message.contains("outside"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let broken = text.replace("\"fe\": [1.5]}", "\"fe\": [0.5");
        assert!(matches!(
            TabularDb::read_from(broken.as_bytes()),
            Err(Error::Format { line: 5, .. })
        ));
    }

    #[test]
    fn out_of_range_genotype_is_rejected() {
        let mut buf = Vec::new();
        sample_db().write_to(&mut buf).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("{\"x\": [9,0,0,0,0], \"fe\": [0.5], \"c\": {\"params\": 1}, \"h\": {\"gpu\": {\"latency\": 1}}}\n");
        assert!(matches!(
            TabularDb::read_from(text.as_bytes()),
            Err(Error::Format { line: 5, .. })
        ));
    }

    #[test]
    fn missing_metric_is_rejected() {
        let mut buf = Vec::new();
        sample_db().write_to(&mut buf).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("{\"x\": [6,0,0,0,0], \"fe\": [0.5], \"c\": {\"params\": 1}}\n");
        assert!(TabularDb::read_from(text.as_bytes()).is_err());
    }

    #[test]
    fn false_exhaustive_claim_is_a_schema_error() {
        let mut db = sample_db();
        db.header.exhaustive = true;
        assert!(matches!(round_trip(&db), Err(Error::Schema(_))));
    }

    #[test]
    fn space_mismatch() {
        let db = sample_db();
        assert!(db.expect_space("nats").is_ok());
        assert!(matches!(db.expect_space("nb201"), Err(Error::Schema(_))));
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = load_tabular("/nonexistent/nb201/tabular.ndj").unwrap_err();
        assert!(matches!(err, Error::MissingData(_)));
        assert!(err.to_string().contains("/nonexistent/nb201/tabular.ndj"));
    }
}
