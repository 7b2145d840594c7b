//! Binary incidence matrices: rows are storage nodes, columns are codeword
//! symbols. Both row and column supports are kept as bit-vectors.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IncidenceError {
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid JSON matrix: {0}")]
    Json(String),
}

/// Fixed-width bit-vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = BitSet::new(len);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn full(len: usize) -> Self {
        BitSet::from_indices(len, 0..len)
    }

    /// Universe size.
    pub fn capacity(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// The low 64 bits. Only meaningful when `capacity() <= 64`.
    pub fn as_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Common row weight `alpha` and column weight `rho`, `None` when not constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformityProfile {
    pub alpha: Option<usize>,
    pub rho: Option<usize>,
}

impl UniformityProfile {
    pub fn is_uniform(&self) -> bool {
        self.alpha.is_some() && self.rho.is_some()
    }
}

/// An `n x theta` 0/1 matrix. `(i, j) = 1` iff node `i` stores symbol `j`.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryIncidenceMatrix {
    n: usize,
    theta: usize,
    rows: Vec<BitSet>,
    cols: Vec<BitSet>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    theta: usize,
    rows: Vec<String>,
}

impl BinaryIncidenceMatrix {
    /// Builds a matrix from the column index set of every row.
    pub fn from_row_supports<I>(n: usize, theta: usize, rows: I) -> Result<Self, IncidenceError>
    where
        I: IntoIterator,
        I::Item: IntoIterator<Item = usize>,
    {
        let mut row_sets = Vec::with_capacity(n);
        let mut cols = vec![BitSet::new(n); theta];
        for (i, support) in rows.into_iter().enumerate() {
            if i >= n {
                return Err(IncidenceError::IndexOutOfRange { index: i, limit: n });
            }
            let mut set = BitSet::new(theta);
            for j in support {
                if j >= theta {
                    return Err(IncidenceError::IndexOutOfRange {
                        index: j,
                        limit: theta,
                    });
                }
                set.insert(j);
                cols[j].insert(i);
            }
            row_sets.push(set);
        }
        row_sets.resize(n, BitSet::new(theta));
        Ok(BinaryIncidenceMatrix {
            n,
            theta,
            rows: row_sets,
            cols,
        })
    }

    /// Builds a matrix from the row index set of every column.
    pub fn from_col_supports<I>(n: usize, theta: usize, cols: I) -> Result<Self, IncidenceError>
    where
        I: IntoIterator,
        I::Item: IntoIterator<Item = usize>,
    {
        let t = BinaryIncidenceMatrix::from_row_supports(theta, n, cols)?;
        Ok(t.transpose())
    }

    pub fn identity(n: usize) -> Self {
        BinaryIncidenceMatrix::from_row_supports(n, n, (0..n).map(|i| [i]))
            .expect("identity indices are in range")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.rows[row].contains(col)
    }

    pub fn row_support(&self, row: usize) -> &BitSet {
        &self.rows[row]
    }

    pub fn col_support(&self, col: usize) -> &BitSet {
        &self.cols[col]
    }

    pub fn row_supports(&self) -> &[BitSet] {
        &self.rows
    }

    pub fn col_supports(&self) -> &[BitSet] {
        &self.cols
    }

    pub fn row_weight(&self, row: usize) -> usize {
        self.rows[row].count()
    }

    pub fn col_weight(&self, col: usize) -> usize {
        self.cols[col].count()
    }

    pub fn min_col_weight(&self) -> usize {
        (0..self.theta)
            .map(|j| self.col_weight(j))
            .min()
            .unwrap_or(0)
    }

    pub fn min_row_weight(&self) -> usize {
        (0..self.n).map(|i| self.row_weight(i)).min().unwrap_or(0)
    }

    /// First all-zero column, if any.
    pub fn empty_column(&self) -> Option<usize> {
        self.cols.iter().position(BitSet::is_empty)
    }

    pub fn weights(&self) -> UniformityProfile {
        fn common(mut it: impl Iterator<Item = usize>) -> Option<usize> {
            let first = it.next()?;
            it.all(|w| w == first).then_some(first)
        }
        UniformityProfile {
            alpha: common(self.rows.iter().map(BitSet::count)),
            rho: common(self.cols.iter().map(BitSet::count)),
        }
    }

    /// Rows covered by the column set `cols`: the union of their supports.
    pub fn cover_rows(&self, cols: &[usize]) -> Result<BitSet, IncidenceError> {
        let mut out = BitSet::new(self.n);
        for &j in cols {
            let support = self.cols.get(j).ok_or(IncidenceError::IndexOutOfRange {
                index: j,
                limit: self.theta,
            })?;
            out.union_with(support);
        }
        Ok(out)
    }

    /// Columns covered by the row set `rows`.
    pub fn cover_cols(&self, rows: &[usize]) -> Result<BitSet, IncidenceError> {
        let mut out = BitSet::new(self.theta);
        for &i in rows {
            let support = self.rows.get(i).ok_or(IncidenceError::IndexOutOfRange {
                index: i,
                limit: self.n,
            })?;
            out.union_with(support);
        }
        Ok(out)
    }

    /// Columns whose whole support lies inside `rows`.
    pub fn cols_inside(&self, rows: &BitSet) -> BitSet {
        BitSet::from_indices(
            self.theta,
            (0..self.theta).filter(|&j| self.cols[j].is_subset(rows)),
        )
    }

    pub fn transpose(&self) -> Self {
        BinaryIncidenceMatrix {
            n: self.theta,
            theta: self.n,
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }

    /// True when row and column supports describe the same matrix.
    pub fn is_consistent(&self) -> bool {
        self.rows.len() == self.n
            && self.cols.len() == self.theta
            && (0..self.n).all(|i| {
                (0..self.theta).all(|j| self.rows[i].contains(j) == self.cols[j].contains(i))
            })
    }

    fn row_string(&self, i: usize) -> String {
        (0..self.theta)
            .map(|j| if self.get(i, j) { '1' } else { '0' })
            .collect()
    }

    /// Text format: `"n theta"` header followed by `n` lines of 0/1 characters.
    pub fn write_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.theta);
        for i in 0..self.n {
            out.push_str(&self.row_string(i));
            out.push('\n');
        }
        out
    }

    pub fn read_text(text: &str) -> Result<Self, IncidenceError> {
        let err = |line: usize, column: usize, message: &str| IncidenceError::Parse {
            line,
            column,
            message: message.to_string(),
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| err(1, 1, "missing header"))?;
        let mut fields = header.split_whitespace();
        let mut dim = |name: &str| -> Result<usize, IncidenceError> {
            let tok = fields
                .next()
                .ok_or_else(|| err(1, header.len() + 1, &format!("missing {name}")))?;
            let col = header.find(tok).unwrap_or(0) + 1;
            tok.parse()
                .map_err(|_| err(1, col, &format!("invalid {name} '{tok}'")))
        };
        let n = dim("n")?;
        let theta = dim("theta")?;
        if fields.next().is_some() {
            return Err(err(1, 1, "trailing tokens in header"));
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let line_no = i + 2;
            let line = lines
                .next()
                .ok_or_else(|| err(line_no, 1, "unexpected end of input"))?;
            let mut support = Vec::new();
            let mut len = 0;
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => support.push(c),
                    _ => return Err(err(line_no, c + 1, &format!("unexpected character {ch:?}"))),
                }
                len += 1;
            }
            if len != theta {
                return Err(err(
                    line_no,
                    len.min(theta) + 1,
                    &format!("expected {theta} entries, found {len}"),
                ));
            }
            rows.push(support);
        }
        if let Some((k, extra)) = lines.enumerate().find(|(_, l)| !l.trim().is_empty()) {
            let _ = extra;
            return Err(err(n + 2 + k, 1, "trailing content after matrix"));
        }
        BinaryIncidenceMatrix::from_row_supports(n, theta, rows)
    }

    pub fn write_json(&self) -> String {
        let doc = MatrixJson {
            n: self.n,
            theta: self.theta,
            rows: (0..self.n).map(|i| self.row_string(i)).collect(),
        };
        serde_json::to_string(&doc).expect("matrix JSON is always serializable")
    }

    pub fn read_json(text: &str) -> Result<Self, IncidenceError> {
        let doc: MatrixJson =
            serde_json::from_str(text).map_err(|e| IncidenceError::Json(e.to_string()))?;
        if doc.rows.len() != doc.n {
            return Err(IncidenceError::Json(format!(
                "expected {} rows, found {}",
                doc.n,
                doc.rows.len()
            )));
        }
        let mut rows = Vec::with_capacity(doc.n);
        for (i, r) in doc.rows.iter().enumerate() {
            if r.len() != doc.theta {
                return Err(IncidenceError::Json(format!(
                    "row {i} has {} entries, expected {}",
                    r.len(),
                    doc.theta
                )));
            }
            let mut support = Vec::new();
            for (j, ch) in r.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => support.push(j),
                    _ => {
                        return Err(IncidenceError::Json(format!(
                            "row {i}: bad character {ch:?}"
                        )))
                    }
                }
            }
            rows.push(support);
        }
        BinaryIncidenceMatrix::from_row_supports(doc.n, doc.theta, rows)
    }
}

impl fmt::Debug for BinaryIncidenceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryIncidenceMatrix {}x{}", self.n, self.theta)?;
        for i in 0..self.n {
            write!(f, "\n  {}", self.row_string(i))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_text_format() {
        assert_eq!(
            BinaryIncidenceMatrix::identity(2).write_text(),
            "2 2\n10\n01\n"
        );
    }

    #[test]
    fn read_text_example() {
        let m = BinaryIncidenceMatrix::read_text("2 3\n101\n011\n").unwrap();
        assert_eq!(m.row_support(0).to_vec(), vec![0, 2]);
        assert_eq!(m.row_support(1).to_vec(), vec![1, 2]);
        assert_eq!(m.col_support(2).to_vec(), vec![0, 1]);
        assert!(m.is_consistent());
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = BinaryIncidenceMatrix::read_text("2 3\n101\n0x1\n").unwrap_err();
        assert_eq!(
            e,
            IncidenceError::Parse {
                line: 3,
                column: 2,
                message: "unexpected character 'x'".into()
            }
        );
        let e = BinaryIncidenceMatrix::read_text("2 3\n101\n01\n").unwrap_err();
        assert!(matches!(
            e,
            IncidenceError::Parse {
                line: 3,
                column: 3,
                ..
            }
        ));
        let e = BinaryIncidenceMatrix::read_text("2 3\n101\n").unwrap_err();
        assert!(matches!(e, IncidenceError::Parse { line: 3, .. }));
        let e = BinaryIncidenceMatrix::read_text("two 3\n").unwrap_err();
        assert!(matches!(
            e,
            IncidenceError::Parse {
                line: 1,
                column: 1,
                ..
            }
        ));
        assert!(BinaryIncidenceMatrix::read_text("").is_err());
        assert!(BinaryIncidenceMatrix::read_text("1 1\n1\n1\n").is_err());
    }

    #[test]
    fn json_format() {
        let m = BinaryIncidenceMatrix::read_text("2 3\n101\n011\n").unwrap();
        assert_eq!(m.write_json(), r#"{"n":2,"theta":3,"rows":["101","011"]}"#);
        assert_eq!(
            BinaryIncidenceMatrix::read_json(&m.write_json()).unwrap(),
            m
        );
        assert!(BinaryIncidenceMatrix::read_json(r#"{"n":2,"theta":3,"rows":["101"]}"#).is_err());
    }

    #[test]
    fn weights_of_identity() {
        let w = BinaryIncidenceMatrix::identity(3).weights();
        assert_eq!(
            w,
            UniformityProfile {
                alpha: Some(1),
                rho: Some(1)
            }
        );
        let m = BinaryIncidenceMatrix::read_text("2 3\n101\n011\n").unwrap();
        assert_eq!(
            m.weights(),
            UniformityProfile {
                alpha: Some(2),
                rho: None
            }
        );
    }

    #[test]
    fn covers() {
        let m = BinaryIncidenceMatrix::read_text("3 4\n1100\n0110\n0001\n").unwrap();
        assert!(m.cover_rows(&[]).unwrap().is_empty());
        assert_eq!(m.cover_rows(&[1]).unwrap().to_vec(), vec![0, 1]);
        assert_eq!(m.cover_cols(&[0, 1, 2]).unwrap().to_vec(), vec![0, 1, 2, 3]);
        assert_eq!(
            m.cover_rows(&[9]),
            Err(IncidenceError::IndexOutOfRange { index: 9, limit: 4 })
        );
        assert_eq!(
            m.cols_inside(&BitSet::from_indices(3, [0, 1])).to_vec(),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn empty_column_detected() {
        let m = BinaryIncidenceMatrix::read_text("2 3\n100\n001\n").unwrap();
        assert_eq!(m.empty_column(), Some(1));
    }

    #[test]
    fn bitset_wide() {
        let mut s = BitSet::from_indices(130, [0, 63, 64, 129]);
        assert_eq!(s.count(), 4);
        assert_eq!(s.to_vec(), vec![0, 63, 64, 129]);
        s.remove(64);
        assert!(!s.contains(64));
        assert!(s.is_subset(&BitSet::full(130)));
    }
}
