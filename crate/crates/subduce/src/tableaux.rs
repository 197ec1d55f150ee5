//! Partitions, standard Young tableaux and the adjacent-transposition action.
//!
//! Tableaux are stored with an explicit filling range so that the second
//! factor of a split pair can carry its natural labels `n1+1..=n` without
//! relabelling. The total order on tableaux of a fixed shape is lexicographic
//! on the row-major reading word; ranks are 1-based.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A partition of n: weakly decreasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition("no parts".into()));
        }
        for w in parts.windows(2) {
            if w[0] < w[1] {
                return Err(Error::InvalidPartition(format!(
                    "parts not weakly decreasing: {:?}",
                    parts
                )));
            }
        }
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::InvalidPartition("zero part".into()));
        }
        Ok(Partition { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Number of boxes.
    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn rows(&self) -> usize {
        self.parts.len()
    }

    /// Number of boxes in column `c`.
    pub fn col_len(&self, c: usize) -> usize {
        self.parts.iter().filter(|&&p| p > c).count()
    }

    /// Containment of Ferrers diagrams (row-wise).
    pub fn contains(&self, other: &Partition) -> bool {
        other
            .parts
            .iter()
            .enumerate()
            .all(|(r, &p)| self.parts.get(r).is_some_and(|&q| q >= p))
    }

    /// Number of standard Young tableaux of this shape (hook length formula).
    pub fn dimension(&self) -> usize {
        let n = self.n();
        let mut num: u128 = 1;
        for k in 1..=n as u128 {
            num *= k;
        }
        let mut den: u128 = 1;
        for (r, &len) in self.parts.iter().enumerate() {
            for c in 0..len {
                let arm = len - c - 1;
                let leg = self.col_len(c) - r - 1;
                den *= (arm + leg + 1) as u128;
            }
        }
        (num / den) as usize
    }

    /// All partitions of n, in lexicographically decreasing order.
    pub fn all(n: usize) -> Vec<Partition> {
        let mut out = Vec::new();
        let mut current = Vec::new();
        fn go(remaining: usize, max: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if remaining == 0 {
                out.push(Partition {
                    parts: current.clone(),
                });
                return;
            }
            for p in (1..=remaining.min(max)).rev() {
                current.push(p);
                go(remaining - p, p, current, out);
                current.pop();
            }
        }
        if n > 0 {
            go(n, n, &mut current, &mut out);
        }
        out
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses "4,3,2,1".
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidPartition(format!("{t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.parts {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        Ok(())
    }
}

/// A standard Young tableau: a filling of `shape` with the contiguous range
/// `start..start+n-1`, strictly increasing along rows and down columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StandardTableau {
    shape: Partition,
    start: usize,
    /// Row-major entries.
    entries: Vec<usize>,
    /// 1-based lexicographic rank within the enumeration of its shape; 0 if unranked.
    rank: usize,
}

impl StandardTableau {
    pub fn new(shape: Partition, entries: Vec<usize>, start: usize) -> Result<Self> {
        let n = shape.n();
        if entries.len() != n {
            return Err(Error::InvalidTableau(format!(
                "expected {n} entries, got {}",
                entries.len()
            )));
        }
        let mut seen = vec![false; n];
        for &v in &entries {
            if v < start || v >= start + n {
                return Err(Error::InvalidTableau(format!(
                    "entry {v} outside range {start}..={}",
                    start + n - 1
                )));
            }
            if seen[v - start] {
                return Err(Error::InvalidTableau(format!("duplicate entry {v}")));
            }
            seen[v - start] = true;
        }
        let t = StandardTableau {
            shape,
            start,
            entries,
            rank: 0,
        };
        for r in 0..t.shape.rows() {
            for c in 0..t.shape.parts()[r] {
                if c + 1 < t.shape.parts()[r] && t.at(r, c) >= t.at(r, c + 1) {
                    return Err(Error::InvalidTableau("row not increasing".into()));
                }
                if r + 1 < t.shape.rows()
                    && c < t.shape.parts()[r + 1]
                    && t.at(r, c) >= t.at(r + 1, c)
                {
                    return Err(Error::InvalidTableau("column not increasing".into()));
                }
            }
        }
        Ok(t)
    }

    pub fn shape(&self) -> &Partition {
        &self.shape
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// 1-based lexicographic rank; 0 when the tableau was built directly.
    pub fn rank(&self) -> usize {
        self.rank
    }

    fn row_offset(&self, r: usize) -> usize {
        self.shape.parts()[..r].iter().sum()
    }

    pub fn at(&self, r: usize, c: usize) -> usize {
        self.entries[self.row_offset(r) + c]
    }

    /// (row, col) of a value, if present.
    pub fn position(&self, value: usize) -> Option<(usize, usize)> {
        let idx = self.entries.iter().position(|&v| v == value)?;
        let mut r = 0;
        let mut off = 0;
        while off + self.shape.parts()[r] <= idx {
            off += self.shape.parts()[r];
            r += 1;
        }
        Some((r, idx - off))
    }

    fn content(&self, value: usize) -> Result<i64> {
        let (r, c) = self.position(value).ok_or(Error::IndexOutOfRange {
            i: value,
            min: self.start,
            max: self.start + self.shape.n() - 1,
        })?;
        Ok(c as i64 - r as i64)
    }

    /// Relabel the filling range to start at `new_start`, preserving order.
    pub fn relabeled(&self, new_start: usize) -> StandardTableau {
        let shift = new_start as i64 - self.start as i64;
        StandardTableau {
            shape: self.shape.clone(),
            start: new_start,
            entries: self
                .entries
                .iter()
                .map(|&v| (v as i64 + shift) as usize)
                .collect(),
            rank: self.rank,
        }
    }
}

impl fmt::Display for StandardTableau {
    /// Rows separated by "/", entries by spaces, e.g. "1 2/3".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.shape.rows() {
            if r > 0 {
                write!(f, "/")?;
            }
            for c in 0..self.shape.parts()[r] {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.at(r, c))?;
            }
        }
        Ok(())
    }
}

impl FromStr for StandardTableau {
    type Err = Error;

    /// Parses "1 2/3": rows separated by "/", entries by whitespace.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = Vec::new();
        let mut entries = Vec::new();
        for row in s.split('/') {
            let vals = row
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|e| Error::InvalidTableau(format!("{t:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if vals.is_empty() {
                return Err(Error::InvalidTableau("empty row".into()));
            }
            parts.push(vals.len());
            entries.extend(vals);
        }
        let start = *entries
            .iter()
            .min()
            .ok_or_else(|| Error::InvalidTableau("empty tableau".into()))?;
        StandardTableau::new(Partition::new(parts)?, entries, start)
    }
}

/// All standard tableaux of `shape` filled with `start..start+n-1`, sorted by
/// lexicographic order of the row-major reading word, ranks 1..=count.
pub fn enumerate_standard_tableaux(shape: &Partition, start: usize) -> Vec<StandardTableau> {
    let n = shape.n();
    let rows = shape.rows();
    let mut filled = vec![0usize; rows];
    let mut grid: Vec<Vec<usize>> = shape.parts().iter().map(|&p| vec![0; p]).collect();
    let mut out = Vec::new();

    fn go(
        value: usize,
        n: usize,
        start: usize,
        shape: &Partition,
        filled: &mut Vec<usize>,
        grid: &mut Vec<Vec<usize>>,
        out: &mut Vec<StandardTableau>,
    ) {
        if value == n {
            let entries: Vec<usize> = grid.iter().flatten().copied().collect();
            out.push(StandardTableau {
                shape: shape.clone(),
                start,
                entries,
                rank: 0,
            });
            return;
        }
        for r in 0..shape.rows() {
            let c = filled[r];
            if c < shape.parts()[r] && (r == 0 || filled[r - 1] > c) {
                grid[r][c] = start + value;
                filled[r] += 1;
                go(value + 1, n, start, shape, filled, grid, out);
                filled[r] -= 1;
            }
        }
    }

    go(0, n, start, shape, &mut filled, &mut grid, &mut out);
    out.sort_by(|a, b| a.entries.cmp(&b.entries));
    for (k, t) in out.iter_mut().enumerate() {
        t.rank = k + 1;
    }
    out
}

/// Signed axial distance from i to i+1: content(i+1) - content(i).
pub fn axial_distance(m: &StandardTableau, i: usize) -> Result<i64> {
    let d = m.content(i + 1)? - m.content(i)?;
    debug_assert_ne!(d, 0);
    Ok(d)
}

/// Swap the boxes holding i and i+1 when the result is standard; otherwise
/// return the tableau unchanged. Involutive.
pub fn apply_generator_tableau(m: &StandardTableau, i: usize) -> Result<StandardTableau> {
    let d = axial_distance(m, i)?;
    if d.abs() == 1 {
        // i and i+1 adjacent in a row or column: the swap is not standard.
        return Ok(m.clone());
    }
    let mut entries = m.entries.clone();
    for v in entries.iter_mut() {
        if *v == i {
            *v = i + 1;
        } else if *v == i + 1 {
            *v = i;
        }
    }
    Ok(StandardTableau {
        shape: m.shape.clone(),
        start: m.start,
        entries,
        rank: 0,
    })
}

/// A pair of standard tableaux: `first` filled 1..=k1, `second` filled k1+1..=k1+k2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableauPair {
    first: StandardTableau,
    second: StandardTableau,
}

impl TableauPair {
    pub fn new(first: StandardTableau, second: StandardTableau) -> Result<Self> {
        if first.start != 1 {
            return Err(Error::InvalidTableau("first tableau must start at 1".into()));
        }
        if second.start != first.shape.n() + 1 {
            return Err(Error::InvalidTableau(format!(
                "second tableau must start at {}",
                first.shape.n() + 1
            )));
        }
        Ok(TableauPair { first, second })
    }

    pub fn first(&self) -> &StandardTableau {
        &self.first
    }

    pub fn second(&self) -> &StandardTableau {
        &self.second
    }

    pub fn k1(&self) -> usize {
        self.first.shape.n()
    }

    pub fn k2(&self) -> usize {
        self.second.shape.n()
    }
}

/// Axial distance of a pair: taken in the component that holds both i and i+1.
pub fn axial_distance_pair(p: &TableauPair, i: usize) -> Result<i64> {
    let k1 = p.k1();
    let k = k1 + p.k2();
    if i == 0 || i >= k {
        return Err(Error::IndexOutOfRange {
            i,
            min: 1,
            max: k - 1,
        });
    }
    if i == k1 {
        return Err(Error::UndefinedAction { i });
    }
    if i < k1 {
        axial_distance(&p.first, i)
    } else {
        axial_distance(&p.second, i)
    }
}

/// Generator action on a pair: acts on the component holding both i and i+1.
pub fn apply_generator_pair(p: &TableauPair, i: usize) -> Result<TableauPair> {
    let k1 = p.k1();
    let k = k1 + p.k2();
    if i == 0 || i >= k {
        return Err(Error::IndexOutOfRange {
            i,
            min: 1,
            max: k - 1,
        });
    }
    if i == k1 {
        return Err(Error::UndefinedAction { i });
    }
    if i < k1 {
        Ok(TableauPair {
            first: apply_generator_tableau(&p.first, i)?,
            second: p.second.clone(),
        })
    } else {
        Ok(TableauPair {
            first: p.first.clone(),
            second: apply_generator_tableau(&p.second, i)?,
        })
    }
}
