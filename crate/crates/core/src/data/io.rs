use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{
    validate_example, DataError, Dataset, ProbingExample, Split, TaskSchema, Violation,
    ViolationKind,
};

/// Decodes one JSON record without checking it against a schema.
pub fn decode_record(line: &str) -> Result<ProbingExample, DataError> {
    serde_json::from_str(line).map_err(|e| DataError::Malformed(e.to_string()))
}

/// Decodes and validates one record. The first violation, if any, is
/// returned as the error.
pub fn parse_example(line: &str, schema: &TaskSchema) -> Result<ProbingExample, DataError> {
    let example = decode_record(line)?;
    if let Some(v) = validate_example(&example, schema).into_iter().next() {
        return Err(DataError::Invalid(v));
    }
    Ok(example)
}

/// Canonical single-line form: sorted keys, compact, no trailing newline.
pub fn to_canonical_line(example: &ProbingExample) -> String {
    serde_json::to_string(example).expect("examples always serialize")
}

/// Reads every non-blank line, decoding but not validating. Each entry
/// carries its 1-based line number.
pub fn read_records<R: BufRead>(reader: R) -> Vec<(usize, Result<ProbingExample, DataError>)> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        match line {
            Ok(line) if line.trim().is_empty() => {}
            Ok(line) => out.push((line_no, decode_record(&line))),
            Err(e) => out.push((line_no, Err(DataError::Malformed(e.to_string())))),
        }
    }
    out
}

fn open(path: &Path) -> Result<BufReader<File>, DataError> {
    File::open(path).map(BufReader::new).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Loads a dataset file, failing on the first malformed or invalid record
/// or on a repeated example id.
pub fn read_dataset(
    path: impl AsRef<Path>,
    schema: &TaskSchema,
    split: Split,
) -> Result<Dataset, DataError> {
    let mut examples = Vec::new();
    let mut seen = HashSet::new();
    for (line, record) in read_records(open(path.as_ref())?) {
        let at = |source: DataError| DataError::AtLine {
            line,
            source: Box::new(source),
        };
        let example = record.map_err(at)?;
        if let Some(v) = validate_example(&example, schema).into_iter().next() {
            return Err(at(DataError::Invalid(v)));
        }
        if !seen.insert(example.id.clone()) {
            return Err(at(DataError::Invalid(Violation {
                example_id: example.id,
                kind: ViolationKind::DuplicateId,
            })));
        }
        examples.push(example);
    }
    Ok(Dataset::new(schema.clone(), split, examples))
}

pub fn write_examples<W: Write>(mut writer: W, examples: &[ProbingExample]) -> std::io::Result<()> {
    for example in examples {
        writer.write_all(to_canonical_line(example).as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn write_dataset(path: impl AsRef<Path>, dataset: &Dataset) -> Result<(), DataError> {
    let path = path.as_ref();
    let io_err = |e| DataError::Io {
        path: path.display().to_string(),
        source: e,
    };
    let file = File::create(path).map_err(io_err)?;
    write_examples(BufWriter::new(file), &dataset.examples).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Span, TaskName};

    const ANAPHORA: &str = r#"{"id":"ap1","targets":[{"label":"Unaligned","span1":[1,2],"span2":[6,7]},{"label":"Aligned","span1":[4,5],"span2":[6,7]}],"tokens":["The","technician","told","the","customer","that","he","could","pay","with","cash","."]}"#;

    #[test]
    fn parses_anaphora_record() {
        let schema = TaskSchema::builtin(TaskName::SaAp);
        let e = parse_example(ANAPHORA, &schema).unwrap();
        assert_eq!(e.targets.len(), 2);
        assert_eq!(e.targets[0].span1, Span::new(1, 2));
        assert_eq!(e.targets[0].span2, Some(Span::new(6, 7)));
        assert_eq!(e.targets[0].label, "Unaligned");
        assert_eq!(e.targets[1].span1, Span::new(4, 5));
        assert_eq!(e.targets[1].label, "Aligned");
        assert_eq!(to_canonical_line(&e), ANAPHORA);
    }

    #[test]
    fn unknown_label_is_rejected() {
        let schema = TaskSchema::builtin(TaskName::SaAp);
        let line = ANAPHORA.replacen("Unaligned", "Bogus", 1);
        match parse_example(&line, &schema) {
            Err(DataError::Invalid(v)) => {
                assert_eq!(v.kind, ViolationKind::UnknownLabel { label: "Bogus".into() })
            }
            other => panic!("expected unknown label, got {other:?}"),
        }
    }

    #[test]
    fn out_of_bounds_and_malformed() {
        let schema = TaskSchema::builtin(TaskName::SaAp);
        let line = ANAPHORA.replacen("[6,7]", "[6,13]", 1);
        assert!(matches!(
            parse_example(&line, &schema),
            Err(DataError::Invalid(Violation { kind: ViolationKind::SpanOutOfBounds { .. }, .. }))
        ));
        assert!(matches!(
            parse_example("{\"id\":1}", &schema),
            Err(DataError::Malformed(_))
        ));
        assert!(matches!(
            parse_example(&ANAPHORA.replacen("\"id\"", "\"extra\":0,\"id\"", 1), &schema),
            Err(DataError::Malformed(_))
        ));
    }

    #[test]
    fn paired_task_needs_separator() {
        let schema = TaskSchema::builtin(TaskName::SaLex);
        let line = r#"{"id":"l1","targets":[{"label":"Aligned","span1":[1,2],"span2":[3,4]}],"tokens":["a","saxophone","b","instrument"]}"#;
        assert!(matches!(
            parse_example(line, &schema),
            Err(DataError::Invalid(Violation { kind: ViolationKind::Separator { found: 0 }, .. }))
        ));
        let ok = line.replace("\"b\"", "\"<sep>\"");
        assert!(parse_example(&ok, &schema).is_ok());
    }

    #[test]
    fn read_dataset_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        std::fs::write(&path, format!("{ANAPHORA}\n\n{ANAPHORA}\n")).unwrap();
        let schema = TaskSchema::builtin(TaskName::SaAp);
        match read_dataset(&path, &schema, Split::Train) {
            Err(DataError::AtLine { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected duplicate id error, got {other:?}"),
        }
        std::fs::write(&path, format!("{ANAPHORA}\n")).unwrap();
        let d = read_dataset(&path, &schema, Split::Test).unwrap();
        let out = dir.path().join("out.jsonl");
        write_dataset(&out, &d).unwrap();
        assert_eq!(std::fs::read_to_string(out).unwrap(), format!("{ANAPHORA}\n"));
    }
}
