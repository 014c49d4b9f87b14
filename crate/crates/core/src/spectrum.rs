//! Batch length-spectrum tables: computation over enumerated classes,
//! CSV persistence, and counting-function queries.
//!
//! The CSV is the format of record: UTF-8, header
//! `word,len,primitive,<label:functional>...`, words as letter strings
//! (`a`, `A` for a-inverse, ...), lengths at 17 significant digits, metadata
//! in a sibling `.json` with the same basename. Rows sort by
//! (word length, canonical word) so identical inputs persist byte-identically
//! whatever the thread count.

use crate::error::{Error, Result};
use crate::freegroup::{
    self, canonical_class, classes_up_to, parse_word, reduce, shard_letters, ConjClass,
    ShardEnumerator,
};
use crate::representation::{LengthFunctional, LoxodromyReport, Representation};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Options for `compute_spectrum`.
#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    pub include_powers: bool,
    /// Class-count budget; `None` = default cap.
    pub budget: Option<u128>,
    /// Proceed despite pilot validation failures (rows still drop).
    pub force: bool,
    /// Cap on the pilot loxodromy sample; a seeded subsample is drawn above it.
    pub pilot_cap: usize,
    /// Seed for pilot subsampling only.
    pub seed: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { include_powers: true, budget: None, force: false, pilot_cap: 5000, seed: 7 }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn subsample<T>(items: Vec<T>, cap: usize, seed: u64) -> Vec<T> {
    if items.len() <= cap {
        return items;
    }
    let n = items.len();
    let mut state = seed;
    let mut keep: Vec<usize> = (0..n).collect();
    // partial Fisher-Yates: the first `cap` entries become the sample
    for i in 0..cap {
        let j = i + (splitmix64(&mut state) as usize) % (n - i);
        keep.swap(i, j);
    }
    let mut chosen: Vec<usize> = keep[..cap].to_vec();
    chosen.sort_unstable();
    let mut out: Vec<T> = Vec::with_capacity(cap);
    let mut iter = items.into_iter();
    let mut next_idx = 0usize;
    for (i, item) in iter.by_ref().enumerate() {
        if next_idx == chosen.len() {
            break;
        }
        if i == chosen[next_idx] {
            out.push(item);
            next_idx += 1;
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ColumnInfo {
    pub label: String,
    pub functional: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub rank: usize,
    pub n_max: usize,
    pub include_powers: bool,
    pub columns: Vec<ColumnInfo>,
    pub row_count: usize,
    /// Classes removed because some column was not loxodromic.
    pub dropped: usize,
    pub budget: u128,
    pub loxodromy: Vec<LoxodromyReport>,
    /// Echo of the creating parameters (representations at full precision).
    pub creation: serde_json::Value,
}

struct Row {
    class: ConjClass,
    lengths: Vec<f64>,
}

/// Joint length table over canonical conjugacy classes.
pub struct SpectrumTable {
    meta: SpectrumMeta,
    rows: Vec<Row>,
}

/// Sorted single- or mixed-column length data with word-length tags; the
/// growth estimators consume this.
#[derive(Clone, Debug)]
pub struct CountingFunction {
    values: Vec<f64>,
    word_lengths: Vec<u32>,
    n_max: u32,
}

impl CountingFunction {
    pub fn from_sorted(values: Vec<f64>, word_lengths: Vec<u32>, n_max: u32) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        debug_assert_eq!(values.len(), word_lengths.len());
        CountingFunction { values, word_lengths, n_max }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn word_lengths(&self) -> &[u32] {
        &self.word_lengths
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// N(T): number of values <= T.
    pub fn count_leq(&self, t: f64) -> usize {
        self.values.partition_point(|v| *v <= t)
    }

    pub fn max_value(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Minimal value of the spectrum.
    pub fn systole(&self) -> Result<f64> {
        self.values.first().copied().ok_or(Error::EmptySpectrum)
    }
}

impl SpectrumTable {
    pub fn meta(&self) -> &SpectrumMeta {
        &self.meta
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn columns(&self) -> &[ColumnInfo] {
        &self.meta.columns
    }

    pub fn class_at(&self, row: usize) -> &ConjClass {
        &self.rows[row].class
    }

    pub fn lengths_at(&self, row: usize) -> &[f64] {
        &self.rows[row].lengths
    }

    /// Column values in table (row) order.
    pub fn column_values(&self, col: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.lengths[col]).collect()
    }

    /// Sorted linear combination of columns; weights must yield positive values.
    pub fn counting(&self, weights: &[f64]) -> Result<CountingFunction> {
        if weights.len() != self.meta.columns.len() {
            return Err(Error::Config(format!(
                "{} mix weights for {} columns",
                weights.len(),
                self.meta.columns.len()
            )));
        }
        let mut pairs: Vec<(f64, u32)> = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            let v: f64 = r.lengths.iter().zip(weights).map(|(l, w)| l * w).sum();
            if !(v > 0.0) {
                return Err(Error::NonPositiveMix(v));
            }
            pairs.push((v, r.class.len() as u32));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(CountingFunction::from_sorted(
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
            self.meta.n_max as u32,
        ))
    }

    /// Single column as a counting function.
    pub fn column_counting(&self, col: usize) -> CountingFunction {
        let mut w = vec![0.0; self.meta.columns.len()];
        w[col] = 1.0;
        self.counting(&w).expect("single positive column")
    }

    /// Column `c1` sorted ascending with `c2` values aligned to that order.
    pub fn aligned_pair(&self, c1: usize, c2: usize) -> (CountingFunction, Vec<f64>) {
        let mut idx: Vec<usize> = (0..self.rows.len()).collect();
        idx.sort_by(|&a, &b| self.rows[a].lengths[c1].total_cmp(&self.rows[b].lengths[c1]));
        let values: Vec<f64> = idx.iter().map(|&i| self.rows[i].lengths[c1]).collect();
        let wl: Vec<u32> = idx.iter().map(|&i| self.rows[i].class.len() as u32).collect();
        let other: Vec<f64> = idx.iter().map(|&i| self.rows[i].lengths[c2]).collect();
        (
            CountingFunction::from_sorted(values, wl, self.meta.n_max as u32),
            other,
        )
    }

    // -----------------------------------------------------------------------
    // Persistence
    // -----------------------------------------------------------------------

    pub fn meta_path(path: &Path) -> std::path::PathBuf {
        path.with_extension("json")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        let mut header = String::from("word,len,primitive");
        for c in &self.meta.columns {
            header.push(',');
            header.push_str(&c.label);
            header.push(':');
            header.push_str(&c.functional);
        }
        writeln!(w, "{header}")?;
        for r in &self.rows {
            write!(w, "{},{},{}", r.class.word(), r.class.len(), r.class.is_primitive())?;
            for v in &r.lengths {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        let meta_json = serde_json::to_string_pretty(&self.meta)?;
        std::fs::write(Self::meta_path(path), meta_json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<SpectrumTable> {
        let meta_text = std::fs::read_to_string(Self::meta_path(path))?;
        let meta: SpectrumMeta = serde_json::from_str(&meta_text)?;
        let file = std::fs::File::open(path)?;
        let reader = std::io::BufReader::new(file);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::CsvParse { line: 1, reason: "empty file".into() })??;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() != 3 + meta.columns.len() || cols[0] != "word" {
            return Err(Error::CsvParse { line: 1, reason: format!("bad header `{header}`") });
        }
        let ncol = meta.columns.len();
        let mut rows = Vec::with_capacity(meta.row_count);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 + ncol {
                return Err(Error::CsvParse {
                    line: lineno,
                    reason: format!("{} fields, want {}", parts.len(), 3 + ncol),
                });
            }
            let letters = parse_word(parts[0]).ok_or_else(|| Error::CsvParse {
                line: lineno,
                reason: format!("bad word `{}`", parts[0]),
            })?;
            let class = canonical_class(&reduce(letters.clone())).map_err(|_| Error::CsvParse {
                line: lineno,
                reason: "word is the identity".into(),
            })?;
            if class.letters() != letters.as_slice() {
                return Err(Error::CsvParse {
                    line: lineno,
                    reason: format!("word `{}` is not canonical", parts[0]),
                });
            }
            let len: usize = parts[1].parse().map_err(|_| Error::CsvParse {
                line: lineno,
                reason: format!("bad length `{}`", parts[1]),
            })?;
            if len != class.len() {
                return Err(Error::CsvParse {
                    line: lineno,
                    reason: format!("length {len} does not match word"),
                });
            }
            let prim: bool = parts[2].parse().map_err(|_| Error::CsvParse {
                line: lineno,
                reason: format!("bad primitive flag `{}`", parts[2]),
            })?;
            if prim != class.is_primitive() {
                return Err(Error::CsvParse {
                    line: lineno,
                    reason: "primitive flag does not match word".into(),
                });
            }
            let mut lengths = Vec::with_capacity(ncol);
            for p in &parts[3..] {
                let v: f64 = p.parse().map_err(|_| Error::CsvParse {
                    line: lineno,
                    reason: format!("bad value `{p}`"),
                })?;
                if !(v > 0.0) {
                    return Err(Error::CsvParse {
                        line: lineno,
                        reason: format!("non-positive length {v}"),
                    });
                }
                lengths.push(v);
            }
            rows.push(Row { class, lengths });
        }
        if rows.len() != meta.row_count {
            return Err(Error::CsvParse {
                line: rows.len() + 1,
                reason: format!("{} rows, metadata says {}", rows.len(), meta.row_count),
            });
        }
        Ok(SpectrumTable { meta, rows })
    }
}

fn shard_rows(
    rank: usize,
    first: freegroup::Letter,
    n_max: usize,
    include_powers: bool,
    columns: &[(Representation, LengthFunctional)],
) -> (Vec<Row>, usize) {
    let mut rows = Vec::new();
    let mut dropped = 0usize;
    'class: for class in ShardEnumerator::new(rank, first, n_max, include_powers) {
        let mut lengths = Vec::with_capacity(columns.len());
        for (rep, phi) in columns {
            match rep.jordan_projection(&class) {
                Ok(v) => lengths.push(phi.evaluate(&v)),
                Err(_) => {
                    dropped += 1;
                    continue 'class;
                }
            }
        }
        rows.push(Row { class, lengths });
    }
    (rows, dropped)
}

fn assemble(
    columns: &[(Representation, LengthFunctional)],
    rank: usize,
    n_max: usize,
    opts: &SpectrumOptions,
    shard_results: Vec<(Vec<Row>, usize)>,
    loxodromy: Vec<LoxodromyReport>,
    budget: u128,
) -> SpectrumTable {
    let mut rows = Vec::new();
    let mut dropped = 0usize;
    for (mut rs, d) in shard_results {
        rows.append(&mut rs);
        dropped += d;
    }
    rows.sort_by(|a, b| {
        (a.class.len(), a.class.letters()).cmp(&(b.class.len(), b.class.letters()))
    });
    let creation = serde_json::json!({
        "representations": columns
            .iter()
            .map(|(r, _)| serde_json::from_str::<serde_json::Value>(&r.to_json_string()).unwrap())
            .collect::<Vec<_>>(),
    });
    let meta = SpectrumMeta {
        rank,
        n_max,
        include_powers: opts.include_powers,
        columns: columns
            .iter()
            .map(|(r, f)| ColumnInfo { label: r.label().to_string(), functional: f.descriptor() })
            .collect(),
        row_count: rows.len(),
        dropped,
        budget,
        loxodromy,
        creation,
    };
    SpectrumTable { meta, rows }
}

fn prepare(
    columns: &[(Representation, LengthFunctional)],
    rank: usize,
    n_max: usize,
    opts: &SpectrumOptions,
) -> Result<(Vec<LoxodromyReport>, u128)> {
    if columns.is_empty() {
        return Err(Error::Config("no spectrum columns requested".into()));
    }
    for (rep, phi) in columns {
        if rep.rank() != rank {
            return Err(Error::Config(format!(
                "representation `{}` has rank {}, table rank {rank}",
                rep.label(),
                rep.rank()
            )));
        }
        if phi.dim() != rep.dim() {
            return Err(Error::Config(format!(
                "functional dimension {} vs representation dimension {}",
                phi.dim(),
                rep.dim()
            )));
        }
    }
    let budget = opts.budget.unwrap_or(20_000_000);
    let projected = classes_up_to(rank, n_max)?;
    if projected > budget {
        return Err(Error::CutoffTooLarge { projected, budget });
    }
    // pilot loxodromy validation on classes of length <= min(6, n_max)
    let pilot_len = n_max.min(6);
    let pilot: Vec<ConjClass> =
        freegroup::enumerate_classes(rank, pilot_len, true, Some(budget))?.collect();
    let mut reports = Vec::new();
    for (rep, _) in columns {
        let rep_report = rep.validate_loxodromy(&pilot);
        let pass = rep_report.failures == 0 && rep_report.gap_slope > 0.0;
        if !pass && !opts.force {
            return Err(Error::PilotValidationFailed {
                label: rep.label().to_string(),
                failures: rep_report.failures,
                sampled: rep_report.sampled,
            });
        }
        reports.push(rep_report);
    }
    Ok((reports, budget))
}

/// Exhaustive joint spectrum over all classes of cyclic length <= n_max.
///
/// Classes failing loxodromy in any column are dropped from every column and
/// tallied in `meta.dropped`. Shards run in parallel under the `parallel`
/// feature; the merge order is fixed by shard index, so output is identical
/// for any thread count.
pub fn compute_spectrum(
    columns: &[(Representation, LengthFunctional)],
    rank: usize,
    n_max: usize,
    opts: &SpectrumOptions,
) -> Result<SpectrumTable> {
    let (loxodromy, budget) = prepare(columns, rank, n_max, opts)?;
    let shards = shard_letters(rank);
    #[cfg(feature = "parallel")]
    let results: Vec<(Vec<Row>, usize)> = shards
        .par_iter()
        .map(|&first| shard_rows(rank, first, n_max, opts.include_powers, columns))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(Vec<Row>, usize)> = shards
        .iter()
        .map(|&first| shard_rows(rank, first, n_max, opts.include_powers, columns))
        .collect();
    Ok(assemble(columns, rank, n_max, opts, results, loxodromy, budget))
}

/// Sequential twin of `compute_spectrum`; bit-identical output.
pub fn compute_spectrum_serial(
    columns: &[(Representation, LengthFunctional)],
    rank: usize,
    n_max: usize,
    opts: &SpectrumOptions,
) -> Result<SpectrumTable> {
    let (loxodromy, budget) = prepare(columns, rank, n_max, opts)?;
    let results: Vec<(Vec<Row>, usize)> = shard_letters(rank)
        .iter()
        .map(|&first| shard_rows(rank, first, n_max, opts.include_powers, columns))
        .collect();
    Ok(assemble(columns, rank, n_max, opts, results, loxodromy, budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freegroup::{class_count, invert_class};
    use crate::representation::schottky_pair;

    fn a1() -> LengthFunctional {
        LengthFunctional::alpha(1, 2).unwrap()
    }

    fn small_table(n_max: usize) -> SpectrumTable {
        let r1 = schottky_pair(2.0, 2.0, std::f64::consts::FRAC_PI_2).unwrap();
        let r2 = schottky_pair(2.6, 1.6, std::f64::consts::FRAC_PI_3).unwrap();
        compute_spectrum(
            &[(r1, a1()), (r2, a1())],
            2,
            n_max,
            &SpectrumOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn twelve_rows_at_n2() {
        let rep = schottky_pair(1.0, 1.0, std::f64::consts::FRAC_PI_2).unwrap();
        let t = compute_spectrum(&[(rep, a1())], 2, 2, &SpectrumOptions::default()).unwrap();
        assert_eq!(t.row_count(), 12);
        assert_eq!(t.meta().dropped, 0);
    }

    #[test]
    fn row_count_matches_oracle() {
        let t = small_table(8);
        let expect: u128 = (1..=8).map(|n| class_count(2, n).unwrap().1).sum();
        assert_eq!(t.row_count() as u128, expect);
        assert_eq!(t.meta().dropped, 0);
    }

    #[test]
    fn deterministic_csv_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("s1.csv");
        let p2 = dir.path().join("s2.csv");
        small_table(6).save(&p1).unwrap();
        small_table(6).save(&p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn serial_parallel_identical() {
        let r1 = schottky_pair(2.0, 2.0, std::f64::consts::FRAC_PI_2).unwrap();
        let cols = vec![(r1, a1())];
        let a = compute_spectrum(&cols, 2, 7, &SpectrumOptions::default()).unwrap();
        let b = compute_spectrum_serial(&cols, 2, 7, &SpectrumOptions::default()).unwrap();
        assert_eq!(a.row_count(), b.row_count());
        for i in 0..a.row_count() {
            assert_eq!(a.class_at(i), b.class_at(i));
            assert_eq!(a.lengths_at(i), b.lengths_at(i));
        }
    }

    #[test]
    fn proportional_columns() {
        let r1 = schottky_pair(2.0, 2.0, std::f64::consts::FRAC_PI_2).unwrap();
        let doubled = LengthFunctional::new(vec![2.0], 1.0).unwrap();
        let t = compute_spectrum(
            &[(r1.clone(), a1()), (r1, doubled)],
            2,
            5,
            &SpectrumOptions::default(),
        )
        .unwrap();
        for i in 0..t.row_count() {
            let l = t.lengths_at(i);
            assert!((l[1] - 2.0 * l[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.csv");
        let t = small_table(7);
        t.save(&path).unwrap();
        let back = SpectrumTable::load(&path).unwrap();
        assert_eq!(t.row_count(), back.row_count());
        for i in 0..t.row_count() {
            assert_eq!(t.class_at(i), back.class_at(i));
            assert_eq!(t.lengths_at(i), back.lengths_at(i), "row {i} not bit-exact");
        }
        // saving the loaded table reproduces the file byte-for-byte
        let path2 = dir.path().join("spec2.csv");
        back.save(&path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn corrupted_csv_reports_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.csv");
        small_table(5).save(&path).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        // damage line 4 (row 3)
        let lines: Vec<&str> = text.lines().collect();
        let mut damaged: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
        damaged[3] = damaged[3].replace(',', ";");
        text = damaged.join("\n");
        std::fs::write(&path, text).unwrap();
        match SpectrumTable::load(&path) {
            Err(Error::CsvParse { line, .. }) => assert_eq!(line, 4),
            Err(other) => panic!("expected CsvParse, got {other:?}"),
            Ok(_) => panic!("expected CsvParse, load succeeded"),
        }
    }

    #[test]
    fn counting_and_systole() {
        let t = small_table(6);
        let cf = t.column_counting(0);
        assert_eq!(cf.len(), t.row_count());
        assert_eq!(cf.count_leq(0.5), 0);
        assert_eq!(cf.count_leq(f64::INFINITY), t.row_count());
        // systole of col 0 is the [a]/[b] generator length 2.0
        assert!((cf.systole().unwrap() - 2.0).abs() < 1e-9);
        // degenerate mix = column
        let direct = t.counting(&[1.0, 0.0]).unwrap();
        assert_eq!(direct.values(), cf.values());
        // half-half mix of the same column preserves the systole
        let mix = t.counting(&[0.5, 0.0]).unwrap();
        assert!((mix.systole().unwrap() - 1.0).abs() < 1e-9);
        // monotone step data
        let vs = cf.values();
        for w in vs.windows(2) {
            assert!(w[0] <= w[1]);
        }
        // N(T) recomputable by independent scan
        let t_probe = 7.5;
        let brute = (0..t.row_count()).filter(|&i| t.lengths_at(i)[0] <= t_probe).count();
        assert_eq!(cf.count_leq(t_probe), brute);
    }

    #[test]
    fn fuchsian_inverse_symmetry() {
        let t = small_table(7);
        use std::collections::HashMap;
        let mut by_word: HashMap<String, f64> = HashMap::new();
        for i in 0..t.row_count() {
            by_word.insert(t.class_at(i).word(), t.lengths_at(i)[0]);
        }
        for i in 0..t.row_count() {
            let inv = invert_class(t.class_at(i));
            let li = by_word[&inv.word()];
            assert!((li - t.lengths_at(i)[0]).abs() < 1e-8);
        }
    }

    #[test]
    fn pilot_validation_refuses_without_force() {
        let bad = schottky_pair(1.0, 1.0, std::f64::consts::FRAC_PI_2).unwrap();
        let err = compute_spectrum(&[(bad.clone(), a1())], 2, 8, &SpectrumOptions::default());
        assert!(matches!(err, Err(Error::PilotValidationFailed { .. })));
        let forced = compute_spectrum(
            &[(bad, a1())],
            2,
            8,
            &SpectrumOptions { force: true, ..Default::default() },
        )
        .unwrap();
        assert!(forced.meta().dropped > 0);
    }
}
