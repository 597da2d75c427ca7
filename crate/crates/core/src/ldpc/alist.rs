//! alist reader and writer.
//!
//! Layout: `N M`, `max_col_deg max_row_deg`, the `N` column degrees, the `M`
//! row degrees, then `N` lines of 1-based row indices per column and `M` lines
//! of 1-based column indices per row, each padded with `0` up to the maximum
//! degree.

use super::ParityCheckMatrix;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("alist line {line}: {msg}")]
pub struct AlistError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> AlistError {
    AlistError {
        line,
        msg: msg.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>), AlistError> {
        for (idx, raw) in self.inner.by_ref() {
            let line = idx + 1;
            self.last = line;
            if raw.trim().is_empty() {
                continue;
            }
            let nums = raw
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| err(line, format!("invalid integer {tok:?} in {what}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok((line, nums));
        }
        Err(err(self.last + 1, format!("unexpected end of input, expected {what}")))
    }
}

fn exactly(line: usize, nums: &[usize], n: usize, what: &str) -> Result<(), AlistError> {
    if nums.len() != n {
        return Err(err(line, format!("expected {n} values for {what}, found {}", nums.len())));
    }
    Ok(())
}

/// Reads index lists for `count` nodes whose degrees are given.
fn read_lists(
    lines: &mut Lines<'_>,
    degrees: &[usize],
    max_deg: usize,
    bound: usize,
    what: &str,
) -> Result<Vec<Vec<usize>>, AlistError> {
    let mut out = Vec::with_capacity(degrees.len());
    for (node, &deg) in degrees.iter().enumerate() {
        let (line, nums) = lines.next_numbers(what)?;
        if nums.len() < deg || nums.len() > max_deg.max(deg) {
            return Err(err(
                line,
                format!("{what} {}: expected {deg} indices (padded to {max_deg}), found {}", node + 1, nums.len()),
            ));
        }
        let mut list = Vec::with_capacity(deg);
        for &v in &nums[..deg] {
            if v == 0 || v > bound {
                return Err(err(line, format!("{what} {}: index {v} out of range 1..={bound}", node + 1)));
            }
            list.push(v - 1);
        }
        if nums[deg..].iter().any(|&v| v != 0) {
            return Err(err(line, format!("{what} {}: padding must be 0", node + 1)));
        }
        let mut sorted = list.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(err(line, format!("{what} {}: duplicate index", node + 1)));
        }
        out.push(sorted);
    }
    Ok(out)
}

/// Parses an alist description into a [`ParityCheckMatrix`].
pub fn load_parity_alist(text: &str) -> Result<ParityCheckMatrix, AlistError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (l1, dims) = lines.next_numbers("dimensions")?;
    exactly(l1, &dims, 2, "dimensions")?;
    let (n, m) = (dims[0], dims[1]);
    let (l2, maxd) = lines.next_numbers("maximum degrees")?;
    exactly(l2, &maxd, 2, "maximum degrees")?;
    let (max_col, max_row) = (maxd[0], maxd[1]);
    let (l3, col_deg) = lines.next_numbers("column degrees")?;
    exactly(l3, &col_deg, n, "column degrees")?;
    let (l4, row_deg) = lines.next_numbers("row degrees")?;
    exactly(l4, &row_deg, m, "row degrees")?;
    if col_deg.iter().copied().max().unwrap_or(0) != max_col {
        return Err(err(l2, format!("max column degree {max_col} does not match degree list")));
    }
    if row_deg.iter().copied().max().unwrap_or(0) != max_row {
        return Err(err(l2, format!("max row degree {max_row} does not match degree list")));
    }
    let cols = read_lists(&mut lines, &col_deg, max_col, m, "column")?;
    let rows = read_lists(&mut lines, &row_deg, max_row, n, "row")?;

    let mut transpose = vec![Vec::new(); n];
    for (i, row) in rows.iter().enumerate() {
        for &j in row {
            transpose[j].push(i);
        }
    }
    if let Some(j) = (0..n).find(|&j| transpose[j] != cols[j]) {
        return Err(err(
            lines.last,
            format!("column {} adjacency disagrees with row lists", j + 1),
        ));
    }
    ParityCheckMatrix::from_row_supports(n, rows).map_err(|e| err(lines.last, e.to_string()))
}

impl ParityCheckMatrix {
    /// Serializes the matrix in padded alist form.
    pub fn to_alist(&self) -> String {
        let mut s = String::new();
        let max_col = self.max_col_weight();
        let max_row = self.max_row_weight();
        let _ = writeln!(s, "{} {}", self.n_cols(), self.n_rows());
        let _ = writeln!(s, "{max_col} {max_row}");
        let join = |v: Vec<String>| v.join(" ");
        let _ = writeln!(s, "{}", join(self.col_supports().iter().map(|c| c.len().to_string()).collect()));
        let _ = writeln!(s, "{}", join(self.row_supports().iter().map(|r| r.len().to_string()).collect()));
        let padded = |list: &[usize], width: usize| {
            let mut v: Vec<String> = list.iter().map(|&x| (x + 1).to_string()).collect();
            v.resize(width, "0".to_string());
            v.join(" ")
        };
        for c in self.col_supports() {
            let _ = writeln!(s, "{}", padded(c, max_col));
        }
        for r in self.row_supports() {
            let _ = writeln!(s, "{}", padded(r, max_row));
        }
        s
    }
}
