//! Per-subject index tables: writing pipeline results and reading
//! externally supplied tables for the `report` command.

use std::collections::HashMap;

use super::format_sig;
use crate::kinematics::{GaitIndexSet, IndexKind};
use crate::skeletal_io::{Group, SubjectRecord};

const META_COLUMNS: [&str; 9] = [
    "subject_id",
    "group",
    "sex",
    "age",
    "height",
    "weight",
    "ambulation_score",
    "msws",
    "matched_control",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRow {
    pub record: SubjectRecord,
    pub indices: GaitIndexSet,
}

fn cell(v: Option<f64>) -> String {
    v.map(format_sig).unwrap_or_default()
}

/// `subject_id` followed by the eight indices in table column order.
pub fn write_index_table<'a>(rows: impl IntoIterator<Item = (&'a str, &'a GaitIndexSet)>) -> String {
    let mut out = String::from("subject_id");
    for k in IndexKind::TABLE_COLUMNS {
        out.push(',');
        out.push_str(k.key());
    }
    out.push('\n');
    for (id, set) in rows {
        out.push_str(id);
        for k in IndexKind::TABLE_COLUMNS {
            out.push(',');
            out.push_str(&cell(set.get(k)));
        }
        out.push('\n');
    }
    out
}

/// Subject metadata and indices in one table, readable by `read_subject_table`.
pub fn write_subject_table(rows: &[SubjectRow]) -> String {
    let mut out = META_COLUMNS.join(",");
    for k in IndexKind::TABLE_COLUMNS {
        out.push(',');
        out.push_str(k.key());
    }
    out.push('\n');
    for row in rows {
        let r = &row.record;
        let meta = [
            r.subject_id.clone(),
            r.group.as_str().to_owned(),
            r.sex.clone(),
            format_sig(r.age),
            format_sig(r.height),
            format_sig(r.weight),
            r.ambulation_score.map(|a| a.to_string()).unwrap_or_default(),
            cell(r.msws),
            r.matched_control.clone().unwrap_or_default(),
        ];
        out.push_str(&meta.join(","));
        for k in IndexKind::TABLE_COLUMNS {
            out.push(',');
            out.push_str(&cell(row.indices.get(k)));
        }
        out.push('\n');
    }
    out
}

/// Reads a subject table. Columns are matched by header name; `w`, `d_k`
/// and `d_h` may be empty, the other indices are required.
pub fn read_subject_table(text: &str) -> Result<Vec<SubjectRow>, String> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    let columns: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    for required in ["subject_id", "group", "height"] {
        if !columns.contains_key(required) {
            return Err(format!("subject table lacks a `{required}` column"));
        }
    }
    let mut rows = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let line = n + 2;
        let text_of = |name: &str| columns.get(name).and_then(|&i| record.get(i)).unwrap_or("");
        let number = |name: &str| -> Result<Option<f64>, String> {
            match text_of(name) {
                "" => Ok(None),
                s => s
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| format!("line {line}, column `{name}`: `{s}` is not a number")),
            }
        };
        let required = |name: &str| number(name)?.ok_or_else(|| format!("line {line}: `{name}` is empty"));
        let group = match text_of("group").to_ascii_lowercase().as_str() {
            "patient" => Group::Patient,
            "control" => Group::Control,
            other => return Err(format!("line {line}: unknown group `{other}`")),
        };
        let ambulation_score = match text_of("ambulation_score") {
            "" => None,
            s => Some(s.parse::<u8>().map_err(|_| format!("line {line}: bad ambulation score `{s}`"))?),
        };
        let record = SubjectRecord {
            subject_id: text_of("subject_id").to_owned(),
            group,
            sex: text_of("sex").to_owned(),
            age: number("age")?.unwrap_or(0.0),
            height: required("height")?,
            weight: number("weight")?.unwrap_or(0.0),
            ambulation_score,
            msws: number("msws")?,
            matched_control: Some(text_of("matched_control").to_owned()).filter(|s| !s.is_empty()),
        };
        record.validate().map_err(|e| e.to_string())?;
        let indices = GaitIndexSet {
            v_n: required("v_n")?,
            l_n: required("l_n")?,
            s: required("s")?,
            w: number("w")?,
            rom_hip: required("alpha_h")?,
            rom_knee: required("alpha_k")?,
            d_k: number("d_k")?,
            d_h: number("d_h")?,
        };
        rows.push(SubjectRow { record, indices });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let row = SubjectRow {
            record: SubjectRecord {
                subject_id: "P1".into(),
                group: Group::Patient,
                sex: "F".into(),
                age: 53.0,
                height: 146.0,
                weight: 55.0,
                ambulation_score: Some(6),
                msws: Some(89.6),
                matched_control: Some("C1".into()),
            },
            indices: GaitIndexSet {
                v_n: 0.48,
                l_n: 0.44,
                s: 0.66,
                w: Some(0.68),
                rom_hip: 17.9,
                rom_knee: 36.0,
                d_k: Some(191.0),
                d_h: None,
            },
        };
        let text = write_subject_table(std::slice::from_ref(&row));
        assert_eq!(read_subject_table(&text).unwrap(), vec![row]);
    }
}
