//! Corpus ingestion, per-polytope classification, count tables and
//! inclusion checks between the classes.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::ewald::{weak_ewald, EwaldWitness};
use crate::linalg::IntMatrix;
use crate::matroid::{is_sfpdg, Digraph};
use crate::monotone::{is_deeply_smooth, is_ut_free};
use crate::par::{self, Execution};
use crate::polytope::{is_unimodular_polytope, unimodular_equivalent, LatticePolytope};

/// One polytope of a corpus, as raw lattice coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub dim: usize,
    pub vertices: Vec<Vec<i64>>,
}

impl CorpusEntry {
    pub fn new(id: impl Into<String>, vertices: Vec<Vec<i64>>) -> Result<Self> {
        let id = id.into();
        let dim = vertices.first().map_or(0, Vec::len);
        let e = Self { id, dim, vertices };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| {
            Err(Error::Corpus {
                id: self.id.clone(),
                msg,
            })
        };
        if self.id.is_empty() {
            return bad("empty id".into());
        }
        if self.vertices.is_empty() {
            return bad("no vertices".into());
        }
        if let Some((i, r)) = self.vertices.iter().find_position(|r| r.len() != self.dim) {
            return bad(format!(
                "row {i} has length {}, expected dim {}",
                r.len(),
                self.dim
            ));
        }
        Ok(())
    }

    pub fn polytope(&self) -> Result<LatticePolytope> {
        LatticePolytope::from_i64_rows(&self.vertices).map_err(|e| Error::Corpus {
            id: self.id.clone(),
            msg: e.to_string(),
        })
    }

    pub fn matrix(&self) -> Result<IntMatrix> {
        IntMatrix::from_i64_rows(&self.vertices)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("corpus entries always serialize")
    }
}

/// Parses JSON-lines corpus text. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let e: CorpusEntry = serde_json::from_str(line).map_err(|err| Error::Parse {
            line: i + 1,
            msg: err.to_string(),
        })?;
        e.validate()?;
        if !seen.insert(e.id.clone()) {
            return Err(Error::Corpus {
                id: e.id,
                msg: format!("duplicate id on line {}", i + 1),
            });
        }
        out.push(e);
    }
    Ok(out)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<CorpusEntry>> {
    parse_corpus(&std::fs::read_to_string(path)?)
}

pub fn write_corpus(entries: &[CorpusEntry]) -> String {
    entries.iter().map(|e| e.to_json_line() + "\n").collect()
}

const SFP2: &str = include_str!("../data/sfp2.jsonl");
const SFP3: &str = include_str!("../data/sfp3.jsonl");
const SFP4: &str = include_str!("../data/sfp4.jsonl");
const SFP5: &str = include_str!("../data/sfp5.jsonl");

/// Smooth Fano polytopes of dimension 2 to 5 up to unimodular equivalence,
/// shipped with the crate.
pub fn bundled_corpus(dim: usize) -> Result<Vec<CorpusEntry>> {
    let text = match dim {
        2 => SFP2,
        3 => SFP3,
        4 => SFP4,
        5 => SFP5,
        _ => {
            return Err(Error::Unsupported(format!(
                "no bundled corpus for dimension {dim}"
            )))
        }
    };
    parse_corpus(text)
}

fn json_int(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => n.as_i64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn polydb_entry(k: usize, obj: &Value) -> Result<CorpusEntry> {
    let id = ["_id", "id", "name"]
        .iter()
        .find_map(|key| obj.get(*key).and_then(Value::as_str))
        .map_or_else(|| format!("polydb-{k}"), str::to_string);
    let fail = |msg: String| Error::Corpus {
        id: id.clone(),
        msg,
    };
    let rows = ["VERTICES", "vertices"]
        .iter()
        .find_map(|key| obj.get(*key).and_then(Value::as_array))
        .ok_or_else(|| fail("no VERTICES array".into()))?;
    let mut vertices = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| fail(format!("vertex {i} is not an array")))?;
        let ints: Vec<i64> = row
            .iter()
            .map(json_int)
            .collect::<Option<_>>()
            .ok_or_else(|| fail(format!("vertex {i} has a non-integer entry")))?;
        match ints.split_first() {
            Some((1, rest)) => vertices.push(rest.to_vec()),
            Some((h, _)) => {
                return Err(fail(format!(
                    "vertex {i} is not homogeneous (leading entry {h}, expected 1)"
                )))
            }
            None => return Err(fail(format!("vertex {i} is empty"))),
        }
    }
    CorpusEntry::new(id.clone(), vertices)
}

/// Reads a polyDB-style JSON export: an array of objects (or a single
/// object) with homogeneous `VERTICES` rows whose leading coordinate is 1.
/// Unknown fields are ignored.
pub fn parse_polydb(text: &str) -> Result<Vec<CorpusEntry>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let items = match &v {
        Value::Array(a) => a.as_slice(),
        Value::Object(_) => std::slice::from_ref(&v),
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "expected a JSON array or object".into(),
            })
        }
    };
    items
        .iter()
        .enumerate()
        .map(|(k, o)| polydb_entry(k, o))
        .collect()
}

pub fn import_polydb(path: impl AsRef<Path>) -> Result<Vec<CorpusEntry>> {
    parse_polydb(&std::fs::read_to_string(path)?)
}

/// The five class memberships; `None` means the check did not complete.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub smooth_fano: Option<bool>,
    pub usfp: Option<bool>,
    pub sfpdg: Option<bool>,
    pub dual_ut_free: Option<bool>,
    pub dual_dmp: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Witnesses {
    /// Digraph whose arrow polytope is equivalent to the entry.
    pub digraph: Option<Digraph>,
    pub weak_ewald: Option<EwaldWitness>,
}

/// Wall-clock time per check, in microseconds.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Timings {
    pub smooth_fano_us: u64,
    pub usfp_us: u64,
    pub sfpdg_us: u64,
    pub dual_ut_free_us: u64,
    pub dual_dmp_us: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassificationRecord {
    pub id: String,
    pub dim: usize,
    pub flags: Flags,
    pub witnesses: Witnesses,
    pub diagnostics: Vec<String>,
    pub timings: Timings,
}

impl ClassificationRecord {
    /// A record with the given flags and nothing else; handy for feeding
    /// [`check_inclusions`] directly.
    pub fn from_flags(id: impl Into<String>, dim: usize, flags: Flags) -> Self {
        Self {
            id: id.into(),
            dim,
            flags,
            witnesses: Witnesses::default(),
            diagnostics: Vec::new(),
            timings: Timings::default(),
        }
    }
}

fn timed<T>(slot: &mut u64, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let r = f();
    *slot = t.elapsed().as_micros().try_into().unwrap_or(u64::MAX);
    r
}

fn settle<T>(r: Result<T>, what: &str, diags: &mut Vec<String>) -> Option<T> {
    r.map_err(|e| diags.push(format!("{what}: {e}"))).ok()
}

/// Computes all flags for one entry. Failures never abort: they leave the
/// flag unknown and add a diagnostic.
pub fn classify_polytope(entry: &CorpusEntry) -> ClassificationRecord {
    let mut rec = ClassificationRecord::from_flags(entry.id.clone(), entry.dim, Flags::default());
    let diags = &mut rec.diagnostics;
    let Some(p) = settle(entry.polytope(), "vertices", diags) else {
        return rec;
    };
    let sf = timed(&mut rec.timings.smooth_fano_us, || p.is_smooth_fano());
    rec.flags.smooth_fano = Some(sf);
    if !sf {
        diags.push("not a smooth Fano polytope; remaining flags skipped".into());
        return rec;
    }
    rec.flags.usfp = Some(timed(&mut rec.timings.usfp_us, || {
        is_unimodular_polytope(&p)
    }));
    let g = timed(&mut rec.timings.sfpdg_us, || {
        settle(is_sfpdg(&p), "sfpdg", diags)
    });
    rec.flags.sfpdg = g.as_ref().map(Option::is_some);
    rec.witnesses.digraph = g.flatten();
    rec.witnesses.weak_ewald = weak_ewald(&p).ok().flatten();

    let Some(q) = settle(p.dual(), "dual", diags) else {
        return rec;
    };
    rec.flags.dual_ut_free = timed(&mut rec.timings.dual_ut_free_us, || {
        settle(is_ut_free(&q), "dual UT-free", diags)
    });
    rec.flags.dual_dmp = timed(&mut rec.timings.dual_dmp_us, || {
        settle(is_deeply_smooth(&q), "dual DMP", diags)
    });
    rec
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClassifyOptions {
    pub execution: Execution,
    /// Entries of larger dimension are skipped.
    pub max_dim: Option<usize>,
}

/// One row of the count table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DimCounts {
    pub dim: usize,
    pub sfp: usize,
    pub ut_free: usize,
    pub dmp: usize,
    pub sfpdg: usize,
    pub usfp: usize,
    /// Records where some flag stayed unknown.
    pub unknown: usize,
}

impl DimCounts {
    /// `(SFP, UT-free, DMP, SFPdG, USFP)`.
    pub fn tuple(&self) -> (usize, usize, usize, usize, usize) {
        (self.sfp, self.ut_free, self.dmp, self.sfpdg, self.usfp)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CountTable {
    pub rows: Vec<DimCounts>,
}

impl CountTable {
    pub fn from_records(records: &[ClassificationRecord]) -> Self {
        let mut by_dim: BTreeMap<usize, DimCounts> = BTreeMap::new();
        for r in records {
            let c = by_dim.entry(r.dim).or_insert(DimCounts {
                dim: r.dim,
                ..Default::default()
            });
            let f = &r.flags;
            if f.smooth_fano != Some(true) {
                if f.smooth_fano.is_none() {
                    c.unknown += 1;
                }
                continue;
            }
            c.sfp += 1;
            let rest = [f.dual_ut_free, f.dual_dmp, f.sfpdg, f.usfp];
            for (slot, v) in [&mut c.ut_free, &mut c.dmp, &mut c.sfpdg, &mut c.usfp]
                .into_iter()
                .zip(rest)
            {
                *slot += usize::from(v == Some(true));
            }
            if rest.iter().any(Option::is_none) {
                c.unknown += 1;
            }
        }
        Self {
            rows: by_dim.into_values().collect(),
        }
    }

    pub fn row(&self, dim: usize) -> Option<&DimCounts> {
        self.rows.iter().find(|r| r.dim == dim)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from(
            "| dim | SFPs | UT-free | DMPs | SFPdGs | USFPs |\n|---|---|---|---|---|---|\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} |",
                r.dim, r.sfp, r.ut_free, r.dmp, r.sfpdg, r.usfp
            );
        }
        for r in self.rows.iter().filter(|r| r.unknown > 0) {
            let _ = writeln!(
                s,
                "\nNote: dim {} has {} record(s) with an undecided flag.",
                r.dim, r.unknown
            );
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("dim,sfp,ut_free,dmp,sfpdg,usfp,unknown\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.dim, r.sfp, r.ut_free, r.dmp, r.sfpdg, r.usfp, r.unknown
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("count tables always serialize")
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub table: CountTable,
    /// Sorted by id.
    pub records: Vec<ClassificationRecord>,
}

impl Classification {
    /// One JSON object per line.
    pub fn records_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records always serialize") + "\n")
            .collect()
    }
}

pub fn classify_corpus(corpus: &[CorpusEntry], options: ClassifyOptions) -> Classification {
    let selected: Vec<&CorpusEntry> = corpus
        .iter()
        .filter(|e| options.max_dim.is_none_or(|d| e.dim <= d))
        .collect();
    let mut records = par::map(options.execution, &selected, |e| classify_polytope(e));
    records.sort_by(|a, b| a.id.cmp(&b.id));
    Classification {
        table: CountTable::from_records(&records),
        records,
    }
}

/// A record breaking one of the class inclusions that always hold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub id: String,
    pub rule: &'static str,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InclusionReport {
    pub records: usize,
    /// Breaches of `dual_dmp ⟹ dual_ut_free`, `dual_dmp ⟹ usfp` and
    /// `sfpdg ⟹ usfp`.
    pub violations: Vec<Violation>,
    /// Records with a UT-free dual that are not USFPs.
    pub ut_free_not_usfp: Vec<String>,
    /// Records with a UT-free dual that are not SFPdGs.
    pub ut_free_not_sfpdg: Vec<String>,
    pub note: &'static str,
}

impl InclusionReport {
    /// No violation and no record against the UT-free ⊂ USFP inclusion.
    pub fn passes(&self) -> bool {
        self.violations.is_empty() && self.ut_free_not_usfp.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("records checked: {}\n", self.records);
        let _ = writeln!(s, "inclusion violations: {}", self.violations.len());
        for v in &self.violations {
            let _ = writeln!(s, "  {}: {}", v.id, v.rule);
        }
        let list = |ids: &[String]| {
            if ids.is_empty() {
                String::new()
            } else {
                format!(" ({})", ids.join(", "))
            }
        };
        let _ = writeln!(
            s,
            "UT-free dual but not USFP: {}{}",
            self.ut_free_not_usfp.len(),
            list(&self.ut_free_not_usfp)
        );
        let _ = writeln!(
            s,
            "UT-free dual but not SFPdG: {}{}",
            self.ut_free_not_sfpdg.len(),
            list(&self.ut_free_not_sfpdg)
        );
        let _ = writeln!(s, "{}", self.note);
        s
    }
}

/// Checks the class inclusions record by record. Unknown flags never count
/// as counterexamples.
pub fn check_inclusions(records: &[ClassificationRecord]) -> InclusionReport {
    let mut rep = InclusionReport {
        records: records.len(),
        note: "UT-free inclusion results are empirical evidence over the checked records, not a proof.",
        ..Default::default()
    };
    for r in records {
        let f = &r.flags;
        let rules = [
            (f.dual_dmp, f.dual_ut_free, "dual DMP but dual not UT-free"),
            (f.dual_dmp, f.usfp, "dual DMP but not USFP"),
            (f.sfpdg, f.usfp, "SFPdG but not USFP"),
        ];
        for (a, b, rule) in rules {
            if a == Some(true) && b == Some(false) {
                rep.violations.push(Violation {
                    id: r.id.clone(),
                    rule,
                });
            }
        }
        if f.dual_ut_free == Some(true) {
            if f.usfp == Some(false) {
                rep.ut_free_not_usfp.push(r.id.clone());
            }
            if f.sfpdg == Some(false) {
                rep.ut_free_not_sfpdg.push(r.id.clone());
            }
        }
    }
    rep
}

/// All smooth Fano polygons up to unimodular equivalence, found among the
/// subsets of the eight nonzero points of `[-1, 1]^2`.
pub fn generate_dim2_corpus() -> Vec<CorpusEntry> {
    let pts: Vec<[i64; 2]> = (-1..=1)
        .cartesian_product(-1..=1)
        .filter(|&(x, y)| (x, y) != (0, 0))
        .map(|(x, y)| [x, y])
        .collect();
    let mut classes: Vec<LatticePolytope> = Vec::new();
    for subset in pts.iter().powerset().filter(|s| s.len() >= 3) {
        let Ok(p) = LatticePolytope::from_i64_rows(&subset) else {
            continue;
        };
        if !p.is_smooth_fano() {
            continue;
        }
        let known = classes.iter().any(|c| {
            c.num_vertices() == p.num_vertices()
                && matches!(unimodular_equivalent(c, &p), Ok(Some(_)))
        });
        if !known {
            classes.push(p);
        }
    }
    classes.sort_by_key(LatticePolytope::num_vertices);
    classes
        .iter()
        .enumerate()
        .map(|(k, p)| CorpusEntry {
            id: format!("gen2-{k}"),
            dim: 2,
            vertices: p
                .vertices()
                .to_rows()
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|x| i64::try_from(x).expect("entries are in [-1, 1]"))
                        .collect()
                })
                .collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "{\"id\":\"a\",\"dim\":2,\"vertices\":[[1,0],[0,1],[-1,-1]]}\n\nnot json\n";
        assert!(matches!(
            parse_corpus(text),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn row_length_mismatch_names_entry() {
        let text = "{\"id\":\"bad\",\"dim\":2,\"vertices\":[[1,0],[0,1,0]]}";
        match parse_corpus(text) {
            Err(Error::Corpus { id, .. }) => assert_eq!(id, "bad"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let line = "{\"id\":\"a\",\"dim\":1,\"vertices\":[[1],[-1]]}\n";
        assert!(matches!(
            parse_corpus(&line.repeat(2)),
            Err(Error::Corpus { .. })
        ));
    }

    #[test]
    fn bundled_sizes() {
        assert_eq!(bundled_corpus(2).unwrap().len(), 5);
        assert_eq!(bundled_corpus(3).unwrap().len(), 18);
        assert_eq!(bundled_corpus(4).unwrap().len(), 124);
        assert_eq!(bundled_corpus(5).unwrap().len(), 866);
        assert!(bundled_corpus(6).is_err());
    }

    #[test]
    fn triangle_has_every_flag() {
        let e = CorpusEntry::new("t", vec![vec![1, 0], vec![0, 1], vec![-1, -1]]).unwrap();
        let r = classify_polytope(&e);
        let all = Some(true);
        assert_eq!(
            r.flags,
            Flags {
                smooth_fano: all,
                usfp: all,
                sfpdg: all,
                dual_ut_free: all,
                dual_dmp: all
            }
        );
        assert!(r.witnesses.digraph.is_some());
    }

    #[test]
    fn non_fano_entry_is_recorded_not_fatal() {
        let e =
            CorpusEntry::new("sq", vec![vec![2, 0], vec![0, 2], vec![-2, 0], vec![0, -2]]).unwrap();
        let r = classify_polytope(&e);
        assert_eq!(r.flags.smooth_fano, Some(false));
        assert_eq!(r.flags.usfp, None);
        assert!(!r.diagnostics.is_empty());
    }

    #[test]
    fn synthetic_violation_is_flagged() {
        let f = Flags {
            smooth_fano: Some(true),
            usfp: Some(false),
            dual_dmp: Some(true),
            dual_ut_free: Some(true),
            sfpdg: Some(false),
        };
        let rep = check_inclusions(&[ClassificationRecord::from_flags("x", 3, f)]);
        assert!(!rep.passes());
        assert!(rep
            .violations
            .iter()
            .any(|v| v.rule == "dual DMP but not USFP"));
        assert_eq!(rep.ut_free_not_usfp, vec!["x".to_string()]);
    }

    #[test]
    fn polydb_import() {
        let text = r#"[{"_id":"x","VERTICES":[[1,1,0],["1","0","1"],[1,-1,-1]],"extra":3}]"#;
        let c = parse_polydb(text).unwrap();
        assert_eq!(c[0].vertices, vec![vec![1, 0], vec![0, 1], vec![-1, -1]]);
        assert!(parse_polydb("[]").unwrap().is_empty());
        assert!(parse_polydb(r#"[{"_id":"y","VERTICES":[[0,1,0]]}]"#).is_err());
    }

    #[test]
    fn dim2_generator() {
        let g = generate_dim2_corpus();
        assert_eq!(g.len(), 5);
        for (a, b) in g.iter().tuple_combinations() {
            let (p, q) = (a.polytope().unwrap(), b.polytope().unwrap());
            assert!(unimodular_equivalent(&p, &q).unwrap().is_none());
        }
    }
}
