//! Delimited-text and config formats.
//!
//! | file            | columns                                                     |
//! |-----------------|-------------------------------------------------------------|
//! | population      | `id, group, truth_1, …, truth_T`                            |
//! | outcomes        | `id, group, status, failed_at, decision_1, …, decision_T`   |
//! | labeled outcomes| population columns plus outcome columns, any order          |
//! | distribution    | `group, x, y, xhat, yhat, mass`                              |
//! | scenario        | TOML with the [`ScenarioConfig`] keys                        |
//!
//! Lines starting with `#` are comments. Masses may be written as decimals
//! or as exact fractions (`3/28`).

use std::collections::HashMap;
use std::io::{Read, Write};

use num_traits::{Signed, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::hiring::{HiringScenario, SamplingModel};
use crate::metrics::{Cell, OutcomeDistribution};
use crate::pipeline::{GroupSet, Outcome, OutcomeRow, OutcomeTable, Record, Status};
use crate::scalar::{format_exact, parse_rational, Prob, Rational, FLOAT_MASS_TOL};

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(input)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::parse(line, format!("expected {expected_len} fields, found {len}")),
        other => Error::parse(line, format!("{other:?}")),
    }
}

struct Header {
    index: HashMap<String, usize>,
}

impl Header {
    fn read<R: Read>(rdr: &mut csv::Reader<R>) -> Result<Header> {
        let headers = rdr.headers().map_err(csv_error)?.clone();
        if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
            return Err(Error::parse(1, "missing header row"));
        }
        let mut index = HashMap::new();
        for (i, h) in headers.iter().enumerate() {
            if index.insert(h.to_string(), i).is_some() {
                return Err(Error::parse(1, format!("duplicate column `{h}`")));
            }
        }
        Ok(Header { index })
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::parse(1, format!("missing column `{name}`")))
    }

    /// Number of consecutive `prefix_1, prefix_2, …` columns.
    fn numbered(&self, prefix: &str) -> Vec<usize> {
        (1..)
            .map_while(|t| self.index.get(&format!("{prefix}_{t}")).copied())
            .collect()
    }
}

fn parse_bit(field: &str, line: u64, column: &str) -> Result<bool> {
    match field {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::parse(
            line,
            format!("`{column}` must be 0 or 1, found `{other}`"),
        )),
    }
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

pub fn read_population<R: Read>(input: R) -> Result<Vec<Record>> {
    let mut rdr = reader(input);
    let header = Header::read(&mut rdr)?;
    let (id, group) = (header.require("id")?, header.require("group")?);
    let truths = header.numbered("truth");
    if truths.is_empty() {
        return Err(Error::parse(1, "missing column `truth_1`"));
    }
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = line_of(&rec);
        let bits = truths
            .iter()
            .enumerate()
            .map(|(t, &col)| parse_bit(&rec[col], line, &format!("truth_{}", t + 1)))
            .collect::<Result<Vec<_>>>()?;
        records.push(Record::new(&rec[id], &rec[group], bits));
    }
    if records.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    Ok(records)
}

pub fn write_population<W: Write>(out: W, records: &[Record]) -> Result<()> {
    let stages = records.iter().map(|r| r.truths.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string(), "group".to_string()];
    header.extend((1..=stages).map(|t| format!("truth_{t}")));
    w.write_record(&header).map_err(csv_error)?;
    for r in records {
        let mut row = vec![r.id.clone(), r.group.clone()];
        row.extend(r.truths.iter().map(|&b| u8::from(b).to_string()));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn outcome_fields(outcome: &Outcome, stages: usize) -> Vec<String> {
    let mut row = vec![
        outcome.status.as_str().to_string(),
        outcome.failed_at.map(|t| t.to_string()).unwrap_or_default(),
    ];
    row.extend((1..=stages).map(|t| {
        outcome
            .decision(t)
            .map(|d| d.to_string())
            .unwrap_or_default()
    }));
    row
}

pub fn write_outcomes<W: Write>(out: W, table: &OutcomeTable) -> Result<()> {
    let stages = table.stages();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["id", "group", "status", "failed_at"]
        .map(String::from)
        .into();
    header.extend((1..=stages).map(|t| format!("decision_{t}")));
    w.write_record(&header).map_err(csv_error)?;
    for row in table.rows() {
        let mut fields = vec![row.record.id.clone(), row.record.group.clone()];
        fields.extend(outcome_fields(&row.outcome, stages));
        w.write_record(&fields).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Outcomes joined with ground truth, ready for auditing.
pub fn write_labeled_outcomes<W: Write>(out: W, table: &OutcomeTable) -> Result<()> {
    let stages = table.stages();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string(), "group".to_string()];
    header.extend((1..=stages).map(|t| format!("truth_{t}")));
    header.extend(["status", "failed_at"].map(String::from));
    header.extend((1..=stages).map(|t| format!("decision_{t}")));
    w.write_record(&header).map_err(csv_error)?;
    for row in table.rows() {
        let mut fields = vec![row.record.id.clone(), row.record.group.clone()];
        fields.extend(
            row.record.truths[..stages]
                .iter()
                .map(|&b| u8::from(b).to_string()),
        );
        fields.extend(outcome_fields(&row.outcome, stages));
        w.write_record(&fields).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labeled_outcomes<R: Read>(input: R, majority: Option<&str>) -> Result<OutcomeTable> {
    let mut rdr = reader(input);
    let header = Header::read(&mut rdr)?;
    let (id, group) = (header.require("id")?, header.require("group")?);
    let (status_col, failed_col) = (header.require("status")?, header.require("failed_at")?);
    let truths = header.numbered("truth");
    let decisions = header.numbered("decision");
    if truths.is_empty() || decisions.is_empty() {
        return Err(Error::parse(1, "need truth_1.. and decision_1.. columns"));
    }
    let stages = decisions.len();
    if truths.len() < stages {
        return Err(Error::parse(
            1,
            format!(
                "{stages} decision columns but {} truth columns",
                truths.len()
            ),
        ));
    }
    let mut parsed = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = line_of(&rec);
        let bits = truths
            .iter()
            .enumerate()
            .map(|(t, &col)| parse_bit(&rec[col], line, &format!("truth_{}", t + 1)))
            .collect::<Result<Vec<_>>>()?;
        let status = match &rec[status_col] {
            "PASSED" => Status::Passed,
            "FAIL" => Status::Fail,
            other => {
                return Err(Error::parse(
                    line,
                    format!("status must be PASSED or FAIL, found `{other}`"),
                ))
            }
        };
        let failed_at = match &rec[failed_col] {
            "" => None,
            t => Some(
                t.parse::<usize>()
                    .ok()
                    .filter(|&t| t >= 1 && t <= stages)
                    .ok_or_else(|| Error::parse(line, format!("bad failed_at `{t}`")))?,
            ),
        };
        let mut stage_decisions = Vec::new();
        for (t, &col) in decisions.iter().enumerate() {
            match &rec[col] {
                "" => break,
                d => stage_decisions
                    .push(d.parse::<u32>().map_err(|_| {
                        Error::parse(line, format!("bad decision_{} `{d}`", t + 1))
                    })?),
            }
        }
        let expected_len = match (status, failed_at) {
            (Status::Passed, None) => stages,
            (Status::Fail, Some(t)) => t,
            _ => {
                return Err(Error::parse(
                    line,
                    "failed_at must be set exactly when status is FAIL",
                ))
            }
        };
        if stage_decisions.len() != expected_len
            || decisions[stage_decisions.len()..]
                .iter()
                .any(|&c| !rec[c].is_empty())
        {
            return Err(Error::parse(
                line,
                format!("expected {expected_len} consecutive decisions"),
            ));
        }
        let outcome = Outcome {
            status,
            final_decision: (status == Status::Passed).then(|| stage_decisions[stages - 1]),
            stage_decisions,
            failed_at,
        };
        parsed.push((Record::new(&rec[id], &rec[group], bits), outcome));
    }
    if parsed.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let mut labels: Vec<String> = Vec::new();
    for (r, _) in &parsed {
        if !labels.contains(&r.group) {
            labels.push(r.group.clone());
        }
    }
    let majority = majority
        .map(str::to_string)
        .unwrap_or_else(|| labels[0].clone());
    let groups = GroupSet::new(labels, &majority)?;
    let rows = parsed
        .into_iter()
        .map(|(record, outcome)| {
            Ok(OutcomeRow {
                group: groups.index_of(&record.group)?,
                record,
                outcome,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    OutcomeTable::from_rows(groups, stages, rows)
}

/// Reads an exact distribution. Groups are ordered by first appearance and
/// the majority defaults to the first. Masses must sum to 1 within 1e-12
/// and are then renormalized exactly.
pub fn read_distribution<R: Read>(
    input: R,
    majority: Option<&str>,
) -> Result<OutcomeDistribution<Rational>> {
    let mut rdr = reader(input);
    let header = Header::read(&mut rdr)?;
    let cols = ["group", "x", "y", "xhat", "yhat", "mass"].map(|c| header.require(c));
    let [group, x, y, xhat, yhat, mass] = cols;
    let (group, x, y, xhat, yhat, mass) = (group?, x?, y?, xhat?, yhat?, mass?);
    let mut labels: Vec<String> = Vec::new();
    let mut cells = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = line_of(&rec);
        let label = rec[group].to_string();
        let g = match labels.iter().position(|l| *l == label) {
            Some(g) => g,
            None => {
                labels.push(label);
                labels.len() - 1
            }
        };
        let cell = Cell {
            group: g,
            x: parse_bit(&rec[x], line, "x")?,
            y: parse_bit(&rec[y], line, "y")?,
            xhat: parse_bit(&rec[xhat], line, "xhat")?,
            yhat: parse_bit(&rec[yhat], line, "yhat")?,
        };
        let m = parse_rational(&rec[mass]).map_err(|e| Error::parse(line, e))?;
        if m.is_negative() {
            return Err(Error::parse(line, "negative mass"));
        }
        if cells.iter().any(|(c, _, _)| *c == cell) {
            return Err(Error::parse(line, "cell listed twice"));
        }
        cells.push((cell, m, line));
    }
    if cells.is_empty() {
        return Err(Error::InvalidDistribution("no rows".into()));
    }
    let total = cells
        .iter()
        .fold(Rational::zero(), |acc, (_, m, _)| acc + m);
    if (total.to_f64() - 1.0).abs() > FLOAT_MASS_TOL {
        return Err(Error::InvalidDistribution(format!(
            "masses sum to {}, not 1",
            total.to_f64()
        )));
    }
    let majority = majority
        .map(str::to_string)
        .unwrap_or_else(|| labels[0].clone());
    let groups = GroupSet::new(labels, &majority)?;
    OutcomeDistribution::from_weights(groups, cells.into_iter().map(|(c, m, _)| (c, m)))
}

/// Writes every positive-mass cell with its exact mass.
pub fn write_distribution<W: Write>(out: W, dist: &OutcomeDistribution<Rational>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["group", "x", "y", "xhat", "yhat", "mass"])
        .map_err(csv_error)?;
    for (c, m) in dist.cells() {
        if m.is_zero() {
            continue;
        }
        let bit = |b: bool| if b { "1" } else { "0" };
        w.write_record([
            dist.groups().label(c.group),
            bit(c.x),
            bit(c.y),
            bit(c.xhat),
            bit(c.yhat),
            &format_exact(m),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    /// Decimals are read through their shortest representation, so `-0.666`
    /// means `-666/1000`, not the nearest binary double.
    fn to_rational(&self) -> std::result::Result<Rational, String> {
        match self {
            Number::Int(i) => parse_rational(&i.to_string()),
            Number::Float(f) => parse_rational(&format!("{f:e}")),
            Number::Text(s) => parse_rational(s),
        }
    }
}

/// Keys of a hiring scenario file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_majority: u64,
    pub n_minority: u64,
    pub n_interview: u64,
    pub n_hire: u64,
    eps: Number,
    delta: Number,
    #[serde(default)]
    qualification_rate: Option<Number>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| {
                text[..s.start.min(text.len())].matches('\n').count() as u64 + 1
            });
            Error::parse(line, e.message().to_string())
        })
    }

    pub fn scenario(&self) -> Result<HiringScenario> {
        let num = |n: &Number, key: &str| {
            n.to_rational()
                .map_err(|e| Error::InvalidScenario(format!("{key}: {e}")))
        };
        let mut s = HiringScenario::new(
            self.n_majority,
            self.n_minority,
            self.n_interview,
            self.n_hire,
            num(&self.eps, "eps")?,
            num(&self.delta, "delta")?,
        )?;
        if let Some(q) = &self.qualification_rate {
            s = s.with_qualification_rate(num(q, "qualification_rate")?)?;
        }
        if let Some(m) = &self.model {
            s = s.with_model(m.parse::<SamplingModel>()?);
        }
        Ok(s)
    }
}

/// A header row plus string cells.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Space-aligned columns for terminals.
    pub fn write_plain<W: Write>(&self, out: &mut W) -> Result<()> {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, &w)| format!("{cell:<w$}"))
                .collect();
            writeln!(out, "{}", line.join("  ").trim_end())?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    Plain,
    #[default]
    Machine,
}

pub const SCHEMA_VERSION: u32 = 1;

/// Named tables written as one document. Machine format starts with
/// `# fairpipe <kind> v1` and puts `## <section>` before each table.
#[derive(Clone, Debug, Default)]
pub struct Document {
    pub kind: String,
    pub sections: Vec<(String, Table)>,
}

impl Document {
    pub fn new(kind: impl Into<String>) -> Self {
        Document {
            kind: kind.into(),
            sections: Vec::new(),
        }
    }

    pub fn section(&mut self, name: impl Into<String>, table: Table) {
        self.sections.push((name.into(), table));
    }

    pub fn write<W: Write>(&self, out: &mut W, format: OutputFormat) -> Result<()> {
        match format {
            OutputFormat::Machine => writeln!(out, "# fairpipe {} v{SCHEMA_VERSION}", self.kind)?,
            OutputFormat::Plain => {}
        }
        for (i, (name, table)) in self.sections.iter().enumerate() {
            match format {
                OutputFormat::Machine => {
                    writeln!(out, "## {name}")?;
                    table.write_csv(out)?;
                }
                OutputFormat::Plain => {
                    if i > 0 {
                        writeln!(out)?;
                    }
                    writeln!(out, "[{name}]")?;
                    table.write_plain(out)?;
                }
            }
        }
        Ok(())
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }
}

/// Splits a machine-format document back into its sections.
pub fn parse_document(text: &str) -> Result<Document> {
    let mut lines = text.lines().enumerate();
    let kind = match lines.next() {
        Some((_, first)) => first
            .strip_prefix("# fairpipe ")
            .and_then(|rest| rest.strip_suffix(&format!(" v{SCHEMA_VERSION}")))
            .ok_or_else(|| Error::parse(1, "missing `# fairpipe <kind> v1` header"))?
            .to_string(),
        None => return Err(Error::parse(1, "empty document")),
    };
    let mut doc = Document::new(kind);
    let mut current: Option<(String, Vec<String>)> = None;
    let finish = |doc: &mut Document, cur: Option<(String, Vec<String>)>| -> Result<()> {
        if let Some((name, body)) = cur {
            let text = body.join("\n");
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(false)
                .flexible(true)
                .from_reader(text.as_bytes());
            let mut rows = rdr
                .records()
                .map(|r| r.map(|r| r.iter().map(String::from).collect::<Vec<_>>()));
            let header = rows
                .next()
                .transpose()
                .map_err(csv_error)?
                .unwrap_or_default();
            let rows = rows
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(csv_error)?;
            doc.section(name, Table { header, rows });
        }
        Ok(())
    };
    for (i, line) in lines {
        if let Some(name) = line.strip_prefix("## ") {
            finish(&mut doc, current.take())?;
            current = Some((name.to_string(), Vec::new()));
        } else {
            match current.as_mut() {
                Some((_, body)) => body.push(line.to_string()),
                None => {
                    return Err(Error::parse(
                        i as u64 + 1,
                        "content before the first section",
                    ))
                }
            }
        }
    }
    finish(&mut doc, current)?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::bad_resume_example;
    use crate::scalar::{int, ratio};

    #[test]
    fn population_round_trip() {
        let text = "id,group,truth_1,truth_2\na,0,1,0\nb,1,0,1\n";
        let records = read_population(text.as_bytes()).unwrap();
        assert_eq!(records[1], Record::new("b", "1", vec![false, true]));
        let mut out = Vec::new();
        write_population(&mut out, &records).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn population_errors_carry_line_numbers() {
        let err = read_population("id,group,truth_1\na,0,1\nb,0,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = read_population("id,group,truth_1\na,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(matches!(
            read_population("".as_bytes()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            read_population("id,group,truth_1\n".as_bytes()),
            Err(Error::EmptyPopulation)
        ));
        assert!(read_population("id,group\na,0\n".as_bytes()).is_err());
    }

    #[test]
    fn distribution_round_trip_is_exact() {
        let d = bad_resume_example();
        let mut out = Vec::new();
        write_distribution(&mut out, &d).unwrap();
        let back = read_distribution(out.as_slice(), None).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn distribution_decimals_and_defaults() {
        let text =
            "# comment\ngroup,x,y,xhat,yhat,mass\nm,1,1,1,1,0.5\nf,1,1,1,0,0.25\nf,1,1,1,1,1/4\n";
        let d = read_distribution(text.as_bytes(), Some("m")).unwrap();
        assert_eq!(d.groups().majority_label(), "m");
        let c = Cell {
            group: 1,
            x: true,
            y: true,
            xhat: true,
            yhat: true,
        };
        assert_eq!(d.mass(&c), &ratio(1, 4));
        assert_eq!(
            d.mass(&Cell {
                yhat: false,
                group: 0,
                ..c
            }),
            &int(0)
        );
    }

    #[test]
    fn distribution_errors() {
        let bad_sum = "group,x,y,xhat,yhat,mass\n0,1,1,1,1,0.5\n";
        assert!(matches!(
            read_distribution(bad_sum.as_bytes(), None),
            Err(Error::InvalidDistribution(_))
        ));
        let bad_bit = "group,x,y,xhat,yhat,mass\n0,1,2,1,1,1\n";
        assert!(matches!(
            read_distribution(bad_bit.as_bytes(), None),
            Err(Error::Parse { line: 2, .. })
        ));
        let bad_mass = "group,x,y,xhat,yhat,mass\n0,1,1,1,1,one\n";
        assert!(matches!(
            read_distribution(bad_mass.as_bytes(), None),
            Err(Error::Parse { line: 2, .. })
        ));
        let missing = "group,x,y,xhat,mass\n0,1,1,1,1\n";
        assert!(read_distribution(missing.as_bytes(), None).is_err());
        let near_one =
            "group,x,y,xhat,yhat,mass\n0,1,1,1,1,0.3333333333333\n1,1,1,1,1,0.6666666666667\n";
        assert!(read_distribution(near_one.as_bytes(), None).is_ok());
        let unknown_majority = "group,x,y,xhat,yhat,mass\n0,1,1,1,1,1\n";
        assert!(read_distribution(unknown_majority.as_bytes(), Some("9")).is_err());
    }

    #[test]
    fn labeled_outcomes_validation() {
        let ok = "id,group,truth_1,truth_2,status,failed_at,decision_1,decision_2\n\
                  a,0,1,1,PASSED,,1,1\nb,1,1,1,FAIL,1,0,\n";
        let t = read_labeled_outcomes(ok.as_bytes(), None).unwrap();
        assert_eq!(t.stages(), 2);
        assert_eq!(t.counts(1, 1).reached, 1);
        assert_eq!(t.counts(1, 2).reached, 0);

        let inconsistent = "id,group,truth_1,truth_2,status,failed_at,decision_1,decision_2\n\
                            a,0,1,1,FAIL,,1,1\n";
        assert!(matches!(
            read_labeled_outcomes(inconsistent.as_bytes(), None),
            Err(Error::Parse { line: 2, .. })
        ));
        let gap = "id,group,truth_1,truth_2,status,failed_at,decision_1,decision_2\n\
                   a,0,1,1,FAIL,1,0,1\n";
        assert!(read_labeled_outcomes(gap.as_bytes(), None).is_err());
    }

    #[test]
    fn scenario_numbers_are_exact() {
        let text = "n_majority = 90\nn_minority = 10\nn_interview = 20\nn_hire = 2\neps = -0.666\ndelta = \"2\"\n";
        let s = ScenarioConfig::parse(text).unwrap().scenario().unwrap();
        assert_eq!(s.eps, ratio(-666, 1000));
        assert_eq!(s.delta, int(2));
        let text = "n_majority = 90\nn_minority = 10\nn_interview = 20\nn_hire = 2\neps = \"-2/3\"\ndelta = 2\nmodel = \"quota\"\ntrials = 5\n";
        let c = ScenarioConfig::parse(text).unwrap();
        assert_eq!(c.trials, Some(5));
        let s = c.scenario().unwrap();
        assert_eq!(s.eps, ratio(-2, 3));
        assert_eq!(s.model, SamplingModel::FixedQuota);
    }

    #[test]
    fn scenario_errors() {
        assert!(matches!(
            ScenarioConfig::parse("n_majority = 1\nbogus = 2\n"),
            Err(Error::Parse { .. })
        ));
        let text = "n_majority = 90\nn_minority = 10\nn_interview = 20\nn_hire = 2\neps = \"x\"\ndelta = 0\n";
        assert!(ScenarioConfig::parse(text).unwrap().scenario().is_err());
    }

    #[test]
    fn document_round_trip() {
        let mut doc = Document::new("test");
        let mut t = Table::new(["a", "b"]);
        t.push(["1", "x,y"]);
        doc.section("first", t.clone());
        doc.section("second", Table::new(["only"]));
        let mut out = Vec::new();
        doc.write(&mut out, OutputFormat::Machine).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("# fairpipe test v1\n## first\n"));
        let back = parse_document(&text).unwrap();
        assert_eq!(back.table("first"), Some(&t));
        assert_eq!(back.table("second").unwrap().rows.len(), 0);

        let mut plain = Vec::new();
        doc.write(&mut plain, OutputFormat::Plain).unwrap();
        assert!(String::from_utf8(plain)
            .unwrap()
            .starts_with("[first]\na  b\n1  x,y\n"));
    }
}
