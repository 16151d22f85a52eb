use std::fmt;

use num::{BigInt, One, Signed};

use super::{Monomial, Series, Q};
use crate::error::{Error, Result};

/// One term in the structured form: `numerator/denominator · ε^eps y^y x^x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuredTerm {
    pub numerator: String,
    pub denominator: String,
    pub eps: u32,
    pub y: Vec<u16>,
    pub x: Vec<u16>,
}

pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Precondition(format!("not a rational number: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d == BigInt::from(0) {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial) -> fmt::Result {
    let mut factor = |name: &str, e: u32| -> fmt::Result {
        match e {
            0 => Ok(()),
            1 => write!(f, " * {name}"),
            _ => write!(f, " * {name}^{e}"),
        }
    };
    factor("eps", m.eps)?;
    for (i, &e) in m.y.iter().enumerate() {
        factor(&format!("y{}", i + 1), e as u32)?;
    }
    for (i, &e) in m.x.iter().enumerate() {
        factor(&format!("x{}", i + 1), e as u32)?;
    }
    Ok(())
}

/// Canonical text: `coeff * eps^a * y1^b1 ... * x1^c1 ...` joined by ` + `
/// in ascending canonical order; `0` for the zero series.
impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if c.denom().is_one() {
                write!(f, "{}", c.numer())?;
            } else {
                write!(f, "{}/{}", c.numer(), c.denom())?;
            }
            write_monomial(f, m)?;
        }
        Ok(())
    }
}

impl Series {
    pub fn to_structured(&self) -> Vec<StructuredTerm> {
        self.terms()
            .map(|(m, c)| StructuredTerm {
                numerator: c.numer().to_string(),
                denominator: c.denom().to_string(),
                eps: m.eps,
                y: m.y.to_vec(),
                x: m.x.to_vec(),
            })
            .collect()
    }

    pub fn from_structured(
        dim: usize,
        caps: super::Caps,
        terms: &[StructuredTerm],
    ) -> Result<Series> {
        let mut parsed = Vec::with_capacity(terms.len());
        for t in terms {
            if t.y.len() != dim || t.x.len() != dim {
                return Err(Error::DimensionMismatch(t.y.len().max(t.x.len()), dim));
            }
            let c = parse_rational(&format!("{}/{}", t.numerator, t.denominator))?;
            parsed.push((Monomial::new(t.eps, &t.y, &t.x), c));
        }
        Series::from_terms(dim, caps, parsed)
    }

    /// Largest absolute numerator, for quick magnitude diagnostics.
    pub fn max_abs_numerator(&self) -> BigInt {
        self.terms()
            .map(|(_, c)| c.numer().abs())
            .max()
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::super::{qr, Caps};
    use super::*;

    #[test]
    fn canonical_text() {
        let caps = Caps::new(2, 3, 3);
        let s = Series::from_terms(
            2,
            caps,
            [
                (Monomial::new(1, &[0, 1], &[1, 0]), qr(-1, 2)),
                (Monomial::new(0, &[0, 0], &[0, 0]), qr(3, 1)),
                (Monomial::new(0, &[2, 0], &[0, 0]), qr(1, 1)),
            ],
        )
        .unwrap();
        assert_eq!(s.to_string(), "3 + 1 * y1^2 + -1/2 * eps * y2 * x1");
        assert_eq!(Series::zero(2, caps).to_string(), "0");
    }

    #[test]
    fn structured_roundtrip() {
        let caps = Caps::new(2, 3, 3);
        let s = Series::from_terms(
            2,
            caps,
            [(Monomial::new(2, &[1, 1], &[0, 3]), qr(-7, 3))],
        )
        .unwrap();
        let back = Series::from_structured(2, caps, &s.to_structured()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational(" -3/6 ").unwrap(), qr(-1, 2));
        assert_eq!(parse_rational("4").unwrap(), qr(4, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
