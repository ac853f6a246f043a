//! Text form of [`RadialSpec`]:
//!
//! ```text
//! const:<c>
//! power:a=<a>,b=<b>
//! tower:j=<j>;terms=<c1>*y^<d1>+<c2>*y^<d2>+...
//! oneminusjhat:table=<γ1>:<v1>,<γ2>:<v2>,...
//! table:<γ1>:<v1>,<γ2>:<v2>,...;default=<hold|value>
//! ```
//!
//! No whitespace is accepted anywhere. Errors carry the byte offset where the
//! offending token starts together with what would have been accepted there.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{ProfileTable, RadialSpec, TableDefault, TowerTerm, MAX_TOWER_HEIGHT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: expected {}", .expected.join(" or "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
}

impl ParseError {
    fn new(offset: usize, expected: &[&str]) -> Self {
        Self { offset, expected: expected.iter().map(|s| s.to_string()).collect() }
    }
}

type PResult<T> = Result<T, ParseError>;

const KEYWORDS: [&str; 5] = ["const:", "power:", "tower:", "oneminusjhat:", "table:"];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> PResult<()> {
        if self.eat(lit) {
            Ok(())
        } else {
            Err(ParseError::new(self.pos, &[lit]))
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        self.pos - start
    }

    /// `-?digits(.digits)?([eE][+-]?digits)?`
    fn number(&mut self) -> PResult<(f64, usize)> {
        let start = self.pos;
        self.eat("-");
        if self.digits() == 0 {
            return Err(ParseError::new(start, &["number"]));
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            if self.digits() == 0 {
                return Err(ParseError::new(self.pos, &["digit"]));
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                return Err(ParseError::new(self.pos, &["digit"]));
            }
        }
        let value: f64 = self.src[start..self.pos].parse().map_err(|_| ParseError::new(start, &["number"]))?;
        if !value.is_finite() {
            return Err(ParseError::new(start, &["finite number"]));
        }
        Ok((value, start))
    }

    fn integer(&mut self) -> PResult<(i32, usize)> {
        let start = self.pos;
        self.eat("-");
        if self.digits() == 0 {
            return Err(ParseError::new(start, &["integer"]));
        }
        let value = self.src[start..self.pos].parse().map_err(|_| ParseError::new(start, &["integer in i32 range"]))?;
        Ok((value, start))
    }

    fn unsigned(&mut self) -> PResult<(u32, usize)> {
        let start = self.pos;
        if self.digits() == 0 {
            return Err(ParseError::new(start, &["positive integer"]));
        }
        let value = self.src[start..self.pos].parse().map_err(|_| ParseError::new(start, &["positive integer"]))?;
        Ok((value, start))
    }

    fn finish(&self) -> PResult<()> {
        if self.pos == self.src.len() {
            Ok(())
        } else {
            Err(ParseError::new(self.pos, &["end of input"]))
        }
    }
}

/// Parse a radial function from its text form.
pub fn parse_symbol_spec(text: &str) -> Result<RadialSpec, ParseError> {
    let mut cur = Cursor { src: text, pos: 0 };
    let spec = if cur.eat("const:") {
        let (c, at) = cur.number()?;
        if c < 0.0 {
            return Err(ParseError::new(at, &["non-negative number"]));
        }
        RadialSpec::Constant { c }
    } else if cur.eat("power:") {
        cur.expect("a=")?;
        let a = positive(&mut cur)?;
        cur.expect(",b=")?;
        let b = positive(&mut cur)?;
        RadialSpec::Power { a, b }
    } else if cur.eat("tower:") {
        tower(&mut cur)?
    } else if cur.eat("oneminusjhat:") {
        cur.expect("table=")?;
        let jhat = entries(&mut cur, Some((-1.0, 1.0)))?;
        RadialSpec::OneMinusJHat { jhat }
    } else if cur.eat("table:") {
        let table = entries(&mut cur, None)?;
        cur.expect(";default=")?;
        let default = if cur.eat("hold") {
            TableDefault::Hold
        } else {
            match cur.number() {
                Ok((v, _)) => TableDefault::Value(v),
                Err(e) => {
                    return Err(ParseError::new(e.offset, &["hold", "number"]));
                }
            }
        };
        RadialSpec::Table { table, default }
    } else {
        return Err(ParseError::new(0, &KEYWORDS));
    };
    cur.finish()?;
    Ok(spec)
}

fn positive(cur: &mut Cursor<'_>) -> PResult<f64> {
    let (v, at) = cur.number()?;
    if v <= 0.0 {
        return Err(ParseError::new(at, &["positive number"]));
    }
    Ok(v)
}

fn tower(cur: &mut Cursor<'_>) -> PResult<RadialSpec> {
    cur.expect("j=")?;
    let (height, at) = cur.unsigned()?;
    if height == 0 || height > MAX_TOWER_HEIGHT {
        return Err(ParseError::new(at, &["tower height in 1..=16"]));
    }
    cur.expect(";terms=")?;
    let terms_at = cur.pos;
    let mut terms = Vec::new();
    loop {
        let (coeff, at) = cur.number()?;
        if coeff < 0.0 {
            return Err(ParseError::new(at, &["non-negative number"]));
        }
        cur.expect("*y^")?;
        let (degree, at) = cur.unsigned()?;
        if degree == 0 {
            return Err(ParseError::new(at, &["positive integer"]));
        }
        terms.push(TowerTerm { coeff, degree });
        if !cur.eat("+") {
            break;
        }
    }
    if terms.iter().all(|t| t.coeff == 0.0) {
        return Err(ParseError::new(terms_at, &["at least one positive coefficient"]));
    }
    Ok(RadialSpec::ExpTower { height, terms })
}

fn entries(cur: &mut Cursor<'_>, range: Option<(f64, f64)>) -> PResult<ProfileTable> {
    let mut map = BTreeMap::new();
    loop {
        let (gamma, at) = cur.integer()?;
        cur.expect(":")?;
        let (v, v_at) = cur.number()?;
        if let Some((lo, hi)) = range {
            if !(lo..=hi).contains(&v) {
                return Err(ParseError::new(v_at, &["value in [-1, 1]"]));
            }
        }
        if map.insert(gamma, v).is_some() {
            return Err(ParseError::new(at, &["distinct exponent"]));
        }
        if !cur.eat(",") {
            break;
        }
    }
    Ok(ProfileTable::from_map(map))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_the_basic_forms() {
        assert_eq!(parse_symbol_spec("const:1").unwrap(), RadialSpec::Constant { c: 1.0 });
        assert_eq!(parse_symbol_spec("power:a=1,b=2").unwrap(), RadialSpec::Power { a: 1.0, b: 2.0 });
        assert_eq!(
            parse_symbol_spec("tower:j=2;terms=1*y^1+0.5*y^3").unwrap(),
            RadialSpec::ExpTower {
                height: 2,
                terms: vec![TowerTerm { coeff: 1.0, degree: 1 }, TowerTerm { coeff: 0.5, degree: 3 }]
            }
        );
        let t = parse_symbol_spec("table:-1:2,3:-4e1;default=hold").unwrap();
        match t {
            RadialSpec::Table { table, default } => {
                assert_eq!(default, TableDefault::Hold);
                assert_eq!(table.get(3), Some(-40.0));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_symbol_spec("oneminusjhat:table=0:1,1:0").is_ok());
    }

    #[test]
    fn negative_power_coefficient() {
        let e = parse_symbol_spec("power:a=-1,b=2").unwrap_err();
        assert_eq!(e.offset, 8);
        assert_eq!(e.expected, vec!["positive number"]);
    }

    #[test]
    fn unknown_keyword_lists_alternatives() {
        let e = parse_symbol_spec("cosnt:1").unwrap_err();
        assert_eq!(e.offset, 0);
        assert_eq!(e.expected.len(), 5);
    }

    #[test]
    fn trailing_garbage() {
        let e = parse_symbol_spec("const:1x").unwrap_err();
        assert_eq!(e.offset, 7);
        assert_eq!(e.expected, vec!["end of input"]);
    }

    #[test]
    fn error_message_mentions_offset() {
        let e = parse_symbol_spec("power:a=1;b=2").unwrap_err();
        assert_eq!(e.to_string(), "parse error at byte 9: expected ,b=");
    }
}
