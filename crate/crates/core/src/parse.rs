//! Scheme strings such as `cantor:3`, `jarnik:1.0`, `fp:0.5:x=110^ω`.
//!
//! ```text
//! interval
//! cantor:N                     N >= 3
//! gcantor:R1,R2,...            ratios in (0,1/2], last repeats
//! jarnik:ALPHA
//! salpha:ALPHA
//! fp:P:x=BITS
//! pi03:P:rows=ROW,ROW,...[,*TAIL]
//! salemgap:P:rows=ROW,...
//! weihrauch:xs=BITS,BITS,...   or weihrauch:flags=110
//! ```

use crate::bits::{BitMatrix, BitParseError, BitSequence};
use crate::constructions::{ConstructionError, ConstructionScheme, SchemeKind};
use crate::rational::{parse_rational, Rational};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParseError {
    pub input: String,
    /// Byte offset of the offending token.
    pub pos: usize,
    pub message: String,
}

impl fmt::Display for SchemeParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let col = self.input[..self.pos.min(self.input.len())].chars().count();
        writeln!(f, "{} at column {}", self.message, col + 1)?;
        writeln!(f, "  {}", self.input)?;
        write!(f, "  {}^", " ".repeat(col))
    }
}

impl std::error::Error for SchemeParseError {}

struct Cursor<'a> {
    input: &'a str,
}

impl<'a> Cursor<'a> {
    fn err(&self, pos: usize, message: impl Into<String>) -> SchemeParseError {
        SchemeParseError {
            input: self.input.to_string(),
            pos,
            message: message.into(),
        }
    }

    fn bits(&self, e: BitParseError) -> SchemeParseError {
        self.err(e.pos, e.msg)
    }

    /// Fields split on `:` with their byte offsets.
    fn fields(&self) -> Vec<(usize, &'a str)> {
        let mut out = Vec::new();
        let mut start = 0;
        for part in self.input.split(':') {
            out.push((start, part));
            start += part.len() + 1;
        }
        out
    }

    fn rational(&self, (pos, s): (usize, &str)) -> Result<Rational, SchemeParseError> {
        parse_rational(s).map_err(|e| self.err(pos, e.reason))
    }

    fn keyed<'b>(
        &self,
        (pos, s): (usize, &'b str),
        key: &str,
    ) -> Result<(usize, &'b str), SchemeParseError> {
        s.strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .map(|v| (pos + key.len() + 1, v))
            .ok_or_else(|| self.err(pos, format!("expected '{key}='")))
    }
}

pub fn parse_scheme(input: &str) -> Result<ConstructionScheme, SchemeParseError> {
    let c = Cursor { input };
    let fields = c.fields();
    let (name_pos, name) = fields[0];
    let arity = |n: usize| -> Result<(), SchemeParseError> {
        match fields.len().cmp(&(n + 1)) {
            std::cmp::Ordering::Equal => Ok(()),
            std::cmp::Ordering::Less => {
                Err(c.err(input.len(), format!("'{name}' expects {n} argument(s)")))
            }
            std::cmp::Ordering::Greater => Err(c.err(fields[n + 1].0, "unexpected argument")),
        }
    };
    let kind = match name {
        "interval" => {
            arity(0)?;
            SchemeKind::Interval
        }
        "cantor" => {
            arity(1)?;
            let (pos, s) = fields[1];
            let n: u32 = s.parse().map_err(|_| c.err(pos, "expected an integer"))?;
            if n < 3 {
                return Err(c.err(pos, "cantor needs n >= 3"));
            }
            SchemeKind::Cantor(n)
        }
        "gcantor" => {
            arity(1)?;
            let (pos, s) = fields[1];
            let mut ratios = Vec::new();
            let mut at = pos;
            for part in s.split(',') {
                ratios.push(c.rational((at, part))?);
                at += part.len() + 1;
            }
            SchemeKind::GeneralizedCantor(ratios)
        }
        "jarnik" | "salpha" => {
            arity(1)?;
            let a = c.rational(fields[1])?;
            if a < Rational::from_integer(0.into()) {
                return Err(c.err(fields[1].0, "α must be >= 0"));
            }
            if name == "jarnik" {
                SchemeKind::Jarnik(a)
            } else {
                SchemeKind::SAlpha(a)
            }
        }
        "fp" => {
            arity(2)?;
            let p = c.rational(fields[1])?;
            let (pos, v) = c.keyed(fields[2], "x")?;
            let x = BitSequence::parse_with_offset(v, pos).map_err(|e| c.bits(e))?;
            SchemeKind::Fp { p, x }
        }
        "pi03" | "salemgap" => {
            arity(2)?;
            let p = c.rational(fields[1])?;
            let (pos, v) = c.keyed(fields[2], "rows")?;
            let x = BitMatrix::parse_with_offset(v, pos).map_err(|e| c.bits(e))?;
            if name == "pi03" {
                SchemeKind::Pi03 { p, x }
            } else {
                SchemeKind::SalemGap { p, x }
            }
        }
        "weihrauch" => {
            arity(1)?;
            let f = fields[1];
            let xs = if f.1.starts_with("flags") {
                let (pos, v) = c.keyed(f, "flags")?;
                v.char_indices()
                    .map(|(i, ch)| match ch {
                        '1' => Ok(BitSequence::zeros()),
                        '0' => Ok("(10)^ω".parse().expect("literal")),
                        _ => Err(c.err(pos + i, "flags are '0' or '1'")),
                    })
                    .collect::<Result<Vec<_>, _>>()?
            } else {
                let (pos, v) = c.keyed(f, "xs")?;
                let mut at = pos;
                let mut xs = Vec::new();
                if !v.is_empty() {
                    for part in v.split(',') {
                        xs.push(BitSequence::parse_with_offset(part, at).map_err(|e| c.bits(e))?);
                        at += part.len() + 1;
                    }
                }
                xs
            };
            if xs.len() > 12 {
                return Err(c.err(f.0, "at most 12 sequences"));
            }
            SchemeKind::Weihrauch { xs }
        }
        "" => return Err(c.err(name_pos, "empty scheme")),
        _ => return Err(c.err(name_pos, format!("unknown scheme '{name}'"))),
    };
    ConstructionScheme::new(kind, input).map_err(|e| match e {
        ConstructionError::Domain(m) => c.err(fields.get(1).map_or(0, |f| f.0), m),
        other => c.err(0, other.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn parses_each_form() {
        assert_eq!(
            parse_scheme("cantor:3").unwrap().kind,
            SchemeKind::Cantor(3)
        );
        assert_eq!(
            parse_scheme("jarnik:1.0").unwrap().kind,
            SchemeKind::Jarnik(int(1))
        );
        assert_eq!(
            parse_scheme("fp:0.5:x=110^ω").unwrap().kind,
            SchemeKind::Fp {
                p: rat(1, 2),
                x: BitSequence::from_support(&[0, 1])
            }
        );
        assert!(matches!(
            parse_scheme("pi03:0.8:rows=1,(10)^ω").unwrap().kind,
            SchemeKind::Pi03 { .. }
        ));
        assert!(matches!(
            parse_scheme("salemgap:1/2:rows=").unwrap().kind,
            SchemeKind::SalemGap { .. }
        ));
        let SchemeKind::Weihrauch { xs } = parse_scheme("weihrauch:flags=110").unwrap().kind else {
            panic!()
        };
        assert_eq!(xs.len(), 3);
        assert!(!xs[2].is_eventually_zero());
        let SchemeKind::Weihrauch { xs } = parse_scheme("weihrauch:xs=").unwrap().kind else {
            panic!()
        };
        assert!(xs.is_empty());
        assert_eq!(
            parse_scheme("gcantor:1/4").unwrap().kind,
            SchemeKind::GeneralizedCantor(vec![rat(1, 4)])
        );
        assert_eq!(parse_scheme("interval").unwrap().kind, SchemeKind::Interval);
    }

    #[test]
    fn errors_point_at_the_token() {
        let e = parse_scheme("cantor:2").unwrap_err();
        assert_eq!(e.pos, 7);
        assert!(e.to_string().contains("n >= 3"));
        assert_eq!(parse_scheme("fp:0.5:x=11z").unwrap_err().pos, 11);
        assert_eq!(parse_scheme("fp:0.5:y=1").unwrap_err().pos, 7);
        assert_eq!(parse_scheme("fp:2:x=1").unwrap_err().pos, 3);
        assert_eq!(parse_scheme("nope").unwrap_err().pos, 0);
        assert_eq!(parse_scheme("cantor:3:4").unwrap_err().pos, 9);
        assert_eq!(parse_scheme("weihrauch:flags=12").unwrap_err().pos, 17);
        let shown = parse_scheme("jarnik:x").unwrap_err().to_string();
        assert!(shown.ends_with("         ^"), "{shown}");
    }
}
