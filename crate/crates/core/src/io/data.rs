use crate::error::{Error, Result};
use crate::query::{check_profile, Atom, Instance, Schema, StatisticsProfile};
use crate::relation::{Table, Tuple, Value};
use crate::varset::Var;
use std::collections::HashMap;
use std::path::Path;

/// Per-run string dictionary: codes are assigned in order of first sight.
#[derive(Clone, Debug, Default)]
pub struct Interner {
    codes: HashMap<String, Value>,
    values: Vec<String>,
}

impl Interner {
    pub fn new() -> Interner {
        Interner::default()
    }

    pub fn intern(&mut self, s: &str) -> Value {
        if let Some(&v) = self.codes.get(s) {
            return v;
        }
        let v = self.values.len() as Value;
        self.codes.insert(s.to_string(), v);
        self.values.push(s.to_string());
        v
    }

    pub fn lookup(&self, s: &str) -> Option<Value> {
        self.codes.get(s).copied()
    }

    /// The string for `v`; codes never interned print as `#v`.
    pub fn name(&self, v: Value) -> String {
        self.values.get(v as usize).cloned().unwrap_or_else(|| format!("#{v}"))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct LoadedData {
    pub instance: Instance,
    pub interner: Interner,
    /// Duplicate rows dropped, per relation file.
    pub duplicates: Vec<(String, usize)>,
}

/// Header and records of a CSV file, with surrounding whitespace trimmed.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let file = path.display().to_string();
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => Error::MissingFile(file.clone()),
        _ => Error::Io(format!("{file}: {e}")),
    })?;
    let header: Vec<String> = rd.headers().map_err(|e| Error::Io(format!("{file}: {e}")))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse { line, col: 1, msg: format!("{file}: {e}") }
        })?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

/// Column `j` of a file row holds the value of `atom.terms[j]`; the tuple
/// lists values in variable-index order.
fn to_tuple(atom: &Atom, row: &[Value]) -> Tuple {
    let by_var: HashMap<Var, Value> = atom.terms.iter().copied().zip(row.iter().copied()).collect();
    atom.vars.iter().map(|v| by_var[&v]).collect()
}

/// Loads `<dir>/<R>.csv` for every relation `R` of `schema` and checks the
/// result against `profile`. The header must name the variables of the
/// first atom over `R` in argument order; further atoms over the same
/// relation read its columns positionally.
pub fn load_relations(dir: &Path, schema: &Schema, names: &[String], profile: &StatisticsProfile) -> Result<LoadedData> {
    let mut interner = Interner::new();
    let mut files: HashMap<&str, Vec<Vec<Value>>> = HashMap::new();
    let mut duplicates = Vec::new();
    for atom in schema.atoms() {
        if files.contains_key(atom.name.as_str()) {
            continue;
        }
        let path = dir.join(format!("{}.csv", atom.name));
        let (header, rows) = read_csv(&path)?;
        let expected: Vec<String> = atom.terms.iter().map(|&v| names[v].clone()).collect();
        if header != expected {
            return Err(Error::HeaderMismatch { file: path.display().to_string(), expected: expected.join(","), found: header.join(",") });
        }
        let mut seen = std::collections::HashSet::new();
        let mut coded = Vec::new();
        for r in &rows {
            let c: Vec<Value> = r.iter().map(|s| interner.intern(s)).collect();
            if seen.insert(c.clone()) {
                coded.push(c);
            }
        }
        duplicates.push((atom.name.clone(), rows.len() - coded.len()));
        files.insert(&atom.name, coded);
    }
    let tables = schema.atoms().iter().map(|a| Table::new(a.vars, files[a.name.as_str()].iter().map(|r| to_tuple(a, r)))).collect();
    let instance = Instance::new(schema.clone(), tables)?;
    check_profile(&instance, profile, names)?;
    Ok(LoadedData { instance, interner, duplicates })
}

/// Decoded rows of `table` with columns in `order`, sorted.
pub fn decoded_rows(table: &Table, order: &[Var], interner: &Interner) -> Vec<Vec<String>> {
    let pos: Vec<usize> = order.iter().map(|&v| table.vars().position(v).expect("column of the table")).collect();
    let mut rows: Vec<Vec<String>> = table.rows().iter().map(|r| pos.iter().map(|&p| interner.name(r[p])).collect()).collect();
    rows.sort();
    rows
}

/// CSV text of `table` with header `order`, rows sorted by decoded value. A
/// table over no variables is written as the single column `answer` holding
/// `true` or `false`.
pub fn table_to_csv(table: &Table, order: &[Var], names: &[String], interner: &Interner) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if order.is_empty() {
        w.write_record(["answer"]).expect("in-memory write");
        w.write_record([if table.is_empty() { "false" } else { "true" }]).expect("in-memory write");
    } else {
        w.write_record(order.iter().map(|&v| names[v].as_str())).expect("in-memory write");
        for r in decoded_rows(table, order, interner) {
            w.write_record(&r).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv output is utf-8")
}
