//! Eventually periodic elements of `2^N` and `2^(N×N)`.
//!
//! Every sequence is stored as `prefix · period^ω` in canonical form
//! (shortest period, then shortest prefix), so equality is structural and
//! "eventually zero" is a check on the period.

use num_integer::Integer;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitSequence {
    prefix: Vec<bool>,
    period: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad bit sequence at column {pos}: {msg}")]
pub struct BitParseError {
    pub pos: usize,
    pub msg: &'static str,
}

impl BitSequence {
    pub fn new(prefix: Vec<bool>, period: Vec<bool>) -> BitSequence {
        assert!(!period.is_empty(), "empty period");
        let mut s = BitSequence { prefix, period };
        s.canonicalize();
        s
    }

    pub fn zeros() -> BitSequence {
        BitSequence::new(Vec::new(), vec![false])
    }

    pub fn ones() -> BitSequence {
        BitSequence::new(Vec::new(), vec![true])
    }

    /// Finite support: 1 exactly at `positions`.
    pub fn from_support(positions: &[usize]) -> BitSequence {
        let len = positions.iter().max().map_or(0, |m| m + 1);
        let mut prefix = vec![false; len];
        for &p in positions {
            prefix[p] = true;
        }
        BitSequence::new(prefix, vec![false])
    }

    fn canonicalize(&mut self) {
        let n = self.period.len();
        if let Some(d) = (1..=n)
            .find(|d| n.is_multiple_of(*d) && (0..n).all(|i| self.period[i] == self.period[i % d]))
        {
            self.period.truncate(d);
        }
        while let Some(&last) = self.prefix.last() {
            if last != *self.period.last().unwrap() {
                break;
            }
            self.prefix.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn prefix(&self) -> &[bool] {
        &self.prefix
    }

    pub fn period(&self) -> &[bool] {
        &self.period
    }

    pub fn get(&self, n: usize) -> bool {
        if n < self.prefix.len() {
            self.prefix[n]
        } else {
            self.period[(n - self.prefix.len()) % self.period.len()]
        }
    }

    /// Membership in Q₂: finitely many ones.
    pub fn is_eventually_zero(&self) -> bool {
        self.period.iter().all(|b| !b)
    }

    /// Positions of ones below `n`.
    pub fn support_below(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| self.get(i)).collect()
    }

    /// First `n` bits.
    pub fn take(&self, n: usize) -> Vec<bool> {
        (0..n).map(|i| self.get(i)).collect()
    }

    /// Pointwise maximum. Prefixes are aligned to the longer one and periods
    /// to their least common multiple.
    pub fn max(&self, other: &BitSequence) -> BitSequence {
        let lp = self.prefix.len().max(other.prefix.len());
        let per = self.period.len().lcm(&other.period.len());
        let prefix = (0..lp).map(|i| self.get(i) | other.get(i)).collect();
        let period = (lp..lp + per).map(|i| self.get(i) | other.get(i)).collect();
        BitSequence::new(prefix, period)
    }

    /// True iff both sequences agree on positions `0..=k`.
    pub fn agrees_through(&self, other: &BitSequence, k: usize) -> bool {
        (0..=k).all(|i| self.get(i) == other.get(i))
    }

    /// Replaces the bits at positions `k+1..` with `tail`.
    pub fn splice(&self, k: usize, tail: &BitSequence) -> BitSequence {
        let prefix: Vec<bool> = (0..=k)
            .map(|i| self.get(i))
            .chain(tail.prefix.iter().copied())
            .collect();
        BitSequence::new(prefix, tail.period.clone())
    }

    fn parse_at(s: &str, offset: usize) -> Result<BitSequence, BitParseError> {
        let err = |pos, msg| {
            Err(BitParseError {
                pos: offset + pos,
                msg,
            })
        };
        let chars: Vec<(usize, char)> = s.char_indices().collect();
        let mut prefix = Vec::new();
        let mut period = None;
        let mut i = 0;
        let omega = |j: usize| -> Option<usize> {
            match chars.get(j) {
                Some((_, '^')) => match chars.get(j + 1) {
                    Some((_, 'ω' | 'w')) => Some(j + 2),
                    _ => None,
                },
                _ => None,
            }
        };
        while i < chars.len() {
            let (pos, c) = chars[i];
            match c {
                '0' | '1' => {
                    let bit = c == '1';
                    if let Some(next) = omega(i + 1) {
                        period = Some(vec![bit]);
                        i = next;
                        break;
                    }
                    prefix.push(bit);
                    i += 1;
                }
                '(' => {
                    let mut body = Vec::new();
                    let mut j = i + 1;
                    while let Some(&(_, b @ ('0' | '1'))) = chars.get(j) {
                        body.push(b == '1');
                        j += 1;
                    }
                    match chars.get(j) {
                        Some((_, ')')) => {}
                        Some(&(p, _)) => return err(p, "expected ')'"),
                        None => return err(s.len(), "unclosed '('"),
                    }
                    if body.is_empty() {
                        return err(pos, "empty period");
                    }
                    match omega(j + 1) {
                        Some(next) => {
                            period = Some(body);
                            i = next;
                            break;
                        }
                        None => {
                            return err(chars.get(j + 1).map_or(s.len(), |c| c.0), "expected '^ω'")
                        }
                    }
                }
                _ => return err(pos, "expected '0', '1' or '('"),
            }
        }
        if let Some(&(p, _)) = chars.get(i) {
            return err(p, "trailing input after periodic part");
        }
        if prefix.is_empty() && period.is_none() {
            return err(0, "empty sequence");
        }
        Ok(BitSequence::new(
            prefix,
            period.unwrap_or_else(|| vec![false]),
        ))
    }

    /// Parses with error positions shifted by `offset` (for diagnostics
    /// inside longer strings).
    pub fn parse_with_offset(s: &str, offset: usize) -> Result<BitSequence, BitParseError> {
        BitSequence::parse_at(s, offset)
    }
}

impl FromStr for BitSequence {
    type Err = BitParseError;

    /// `"1101"` (then zeros), `"110^ω"`, `"(10)^ω"`, `"01(10)^w"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BitSequence::parse_at(s, 0)
    }
}

fn write_bits(f: &mut fmt::Formatter<'_>, bits: &[bool]) -> fmt::Result {
    bits.iter()
        .try_for_each(|&b| f.write_str(if b { "1" } else { "0" }))
}

impl fmt::Display for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(f, &self.prefix)?;
        if self.period.len() == 1 {
            write_bits(f, &self.period)?;
        } else {
            f.write_str("(")?;
            write_bits(f, &self.period)?;
            f.write_str(")")?;
        }
        f.write_str("^ω")
    }
}

/// Element of `2^(N×N)`: explicit rows followed by a repeated tail row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: Vec<BitSequence>,
    tail: BitSequence,
}

impl BitMatrix {
    pub fn new(rows: Vec<BitSequence>, tail: BitSequence) -> BitMatrix {
        let mut m = BitMatrix { rows, tail };
        while m.rows.last() == Some(&m.tail) {
            m.rows.pop();
        }
        m
    }

    pub fn from_rows(rows: Vec<BitSequence>) -> BitMatrix {
        BitMatrix::new(rows, BitSequence::zeros())
    }

    pub fn zero() -> BitMatrix {
        BitMatrix::from_rows(Vec::new())
    }

    /// Sets the single bit `(row, col)`.
    pub fn single(row: usize, col: usize) -> BitMatrix {
        let mut rows = vec![BitSequence::zeros(); row + 1];
        rows[row] = BitSequence::from_support(&[col]);
        BitMatrix::from_rows(rows)
    }

    pub fn row(&self, m: usize) -> &BitSequence {
        self.rows.get(m).unwrap_or(&self.tail)
    }

    pub fn explicit_rows(&self) -> &[BitSequence] {
        &self.rows
    }

    pub fn tail(&self) -> &BitSequence {
        &self.tail
    }

    pub fn get(&self, m: usize, n: usize) -> bool {
        self.row(m).get(n)
    }

    /// Membership in P₃: every row eventually zero.
    pub fn every_row_eventually_zero(&self) -> bool {
        self.rows.iter().all(BitSequence::is_eventually_zero) && self.tail.is_eventually_zero()
    }
}

impl FromStr for BitMatrix {
    type Err = BitParseError;

    /// Rows separated by `,`; a final `*ROW` sets the tail row.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BitMatrix::parse_with_offset(s, 0)
    }
}

impl BitMatrix {
    pub fn parse_with_offset(s: &str, offset: usize) -> Result<BitMatrix, BitParseError> {
        let mut rows = Vec::new();
        let mut tail = None;
        if s.trim().is_empty() {
            return Ok(BitMatrix::zero());
        }
        let mut start = 0;
        for part in s.split(',') {
            if tail.is_some() {
                return Err(BitParseError {
                    pos: offset + start,
                    msg: "rows after the tail row",
                });
            }
            match part.strip_prefix('*') {
                Some(t) => tail = Some(BitSequence::parse_at(t, offset + start + 1)?),
                None => rows.push(BitSequence::parse_at(part, offset + start)?),
            }
            start += part.len() + 1;
        }
        Ok(BitMatrix::new(
            rows,
            tail.unwrap_or_else(BitSequence::zeros),
        ))
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        if self.tail != BitSequence::zeros() || self.rows.is_empty() {
            if !self.rows.is_empty() {
                f.write_str(",")?;
            }
            write!(f, "*{}", self.tail)?;
        }
        Ok(())
    }
}

pub fn q2_member(x: &BitSequence) -> bool {
    x.is_eventually_zero()
}

pub fn p3_member(x: &BitMatrix) -> bool {
    x.every_row_eventually_zero()
}

/// `Φ(x)(m, n) = max_{i ≤ m} x(i, n)`.
pub fn phi_transform(x: &BitMatrix) -> BitMatrix {
    let mut acc = BitSequence::zeros();
    let mut rows = Vec::with_capacity(x.rows.len());
    for r in &x.rows {
        acc = acc.max(r);
        rows.push(acc.clone());
    }
    let tail = acc.max(&x.tail);
    BitMatrix::new(rows, tail)
}
