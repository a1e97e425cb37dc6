use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use sizeclust_core::model::ProfileLayout;
use sizeclust_core::SurveyData;

use crate::error::{CliError, CliResult};

/// A survey file: respondent ids, question ids and the coded responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Survey {
    pub respondents: Vec<String>,
    pub questions: Vec<String>,
    pub data: SurveyData,
}

/// Reads a survey CSV.
///
/// The header is `respondent,q1,...,qQ`. An optional first data line whose
/// id is `levels` gives the number of options of every question; without
/// it each question's alphabet is the largest code seen (at least 2).
/// Responses are integer codes starting at 1.
pub fn read_survey(path: &Path) -> CliResult<Survey> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_survey(file, &path.display().to_string())
}

/// [`read_survey`] over any reader; `source` names it in error messages.
pub fn parse_survey<R: std::io::Read>(reader: R, source: &str) -> CliResult<Survey> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| CliError::Data(format!("{source}: unreadable header: {e}")))?.clone();
    if header.len() < 2 {
        return Err(CliError::Data(format!("{source}: header needs a respondent column and at least one question")));
    }
    let questions: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let q = questions.len();

    let mut levels: Option<Vec<usize>> = None;
    let mut respondents = Vec::new();
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Data(format!("{source}: row {line}: {e}"))
        })?;
        let line = record.position().map_or(i as u64 + 2, |p| p.line());
        if record.len() != q + 1 {
            return Err(CliError::Data(format!(
                "{source}: row {line}: expected {} fields, found {}",
                q + 1,
                record.len()
            )));
        }
        let mut codes = Vec::with_capacity(q);
        for (j, field) in record.iter().skip(1).enumerate() {
            let code: usize = field.parse().map_err(|_| {
                CliError::Data(format!(
                    "{source}: row {line}, column {} ({}): '{field}' is not a positive integer",
                    j + 2,
                    questions[j]
                ))
            })?;
            if code == 0 {
                return Err(CliError::Data(format!(
                    "{source}: row {line}, column {} ({}): codes start at 1",
                    j + 2,
                    questions[j]
                )));
            }
            codes.push(code);
        }
        let id = record.get(0).unwrap_or_default();
        if i == 0 && id.eq_ignore_ascii_case("levels") {
            if let Some(j) = codes.iter().position(|&v| v < 2) {
                return Err(CliError::Data(format!(
                    "{source}: row {line}, column {} ({}): a question needs at least 2 levels",
                    j + 2,
                    questions[j]
                )));
            }
            levels = Some(codes);
            continue;
        }
        respondents.push(id.to_owned());
        rows.push(codes);
        lines.push(line);
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!("{source}: no respondents")));
    }

    let alphabet = match levels {
        Some(levels) => {
            for (row, line) in rows.iter().zip(&lines) {
                for (j, (&code, &v)) in row.iter().zip(&levels).enumerate() {
                    if code > v {
                        return Err(CliError::Data(format!(
                            "{source}: row {line}, column {} ({}): code {code} exceeds the declared {v} levels",
                            j + 2,
                            questions[j]
                        )));
                    }
                }
            }
            levels
        }
        None => (0..q).map(|j| rows.iter().map(|r| r[j]).max().unwrap_or(0).max(2)).collect(),
    };
    let data = SurveyData::from_one_based(rows, alphabet).map_err(|e| CliError::Data(format!("{source}: {e}")))?;
    Ok(Survey { respondents, questions, data })
}

/// Writes a survey in the format [`read_survey`] accepts, including the
/// `levels` line.
pub fn write_survey(path: &Path, survey: &Survey) -> CliResult<()> {
    let mut header = vec!["respondent".to_owned()];
    header.extend(survey.questions.iter().cloned());
    let mut rows = Vec::with_capacity(survey.data.respondents() + 1);
    let mut levels = vec!["levels".to_owned()];
    levels.extend(survey.data.alphabet().iter().map(usize::to_string));
    rows.push(levels);
    for (n, id) in survey.respondents.iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend(survey.data.row(n).iter().map(|&x| (x + 1).to_string()));
        rows.push(row);
    }
    write_csv(path, &header, &rows)
}

/// Reads `beta` overrides in long format, `cluster,question,option,concentration`
/// with one-based indices, into a `K x sum(V_q)` array prefilled with `fill`.
pub fn read_beta_file(path: &Path, layout: &ProfileLayout, k: usize, fill: f64) -> CliResult<Vec<f64>> {
    let source = path.display().to_string();
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut beta = vec![fill; k * layout.width()];
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Data(format!("{source}: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 4 {
            return Err(CliError::Data(format!("{source}: row {line}: expected 4 fields")));
        }
        let index = |col: usize, max: usize, name: &str| -> CliResult<usize> {
            let v: usize = record[col].parse().map_err(|_| {
                CliError::Data(format!("{source}: row {line}, column {}: '{}' is not an index", col + 1, &record[col]))
            })?;
            if v == 0 || v > max {
                return Err(CliError::Data(format!(
                    "{source}: row {line}, column {}: {name} {v} is outside 1..{max}",
                    col + 1
                )));
            }
            Ok(v - 1)
        };
        let c = index(0, k, "cluster")?;
        let q = index(1, layout.questions(), "question")?;
        let v = index(2, layout.alphabet()[q], "option")?;
        let value: f64 = record[3]
            .parse()
            .map_err(|_| CliError::Data(format!("{source}: row {line}, column 4: '{}' is not a number", &record[3])))?;
        beta[layout.slice(c, q).start + v] = value;
    }
    Ok(beta)
}

/// Writes a CSV file with a header row.
pub fn write_csv<S: AsRef<str>>(path: &Path, header: &[S], rows: &[Vec<String>]) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let to_io = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    w.write_record(header.iter().map(AsRef::as_ref)).map_err(to_io)?;
    for row in rows {
        w.write_record(row).map_err(to_io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// Formats like C's `%.6g`: six significant digits, trailing zeros dropped.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_owned()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}
