//! Truncated formal power series in base variables `x`, fiber variables `y`
//! and the deformation parameter `ε`, with exact rational coefficients.
//!
//! A [`Series`] stores only nonzero coefficients in a `BTreeMap` keyed by
//! [`Monomial`], so two series are equal iff their term maps are equal.
//! Terms above the ε-cap or the y-cap are dropped silently; a term above the
//! x-cap is an error, because x-dependence is exact polynomial data.

mod matrix;
mod ops;
mod subst;
mod text;

pub use matrix::SeriesMatrix;
pub use subst::{substitute_x, substitute_y};
pub use text::{parse_rational, StructuredTerm};

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, Zero};
use smallvec::SmallVec;

use crate::error::{Error, Location, Result};

/// Exact rational coefficient.
pub type Q = BigRational;

pub type Exponents = SmallVec<[u16; 4]>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Truncation caps `(N_ε, N_y, N_x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Caps {
    pub eps: u32,
    pub y: u32,
    pub x: u32,
}

impl Caps {
    pub fn new(eps: u32, y: u32, x: u32) -> Self {
        Caps { eps, y, x }
    }
}

/// A monomial `ε^a y^b x^c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub eps: u32,
    pub y: Exponents,
    pub x: Exponents,
}

fn degree(e: &[u16]) -> u32 {
    e.iter().map(|&v| v as u32).sum()
}

impl Monomial {
    pub fn one(dim: usize) -> Self {
        Monomial {
            eps: 0,
            y: SmallVec::from_elem(0, dim),
            x: SmallVec::from_elem(0, dim),
        }
    }

    pub fn new(eps: u32, y: &[u16], x: &[u16]) -> Self {
        debug_assert_eq!(y.len(), x.len());
        Monomial {
            eps,
            y: SmallVec::from_slice(y),
            x: SmallVec::from_slice(x),
        }
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn y_degree(&self) -> u32 {
        degree(&self.y)
    }

    pub fn x_degree(&self) -> u32 {
        degree(&self.x)
    }

    /// Filtration weight `|y| + 2·(ε-power)`; the Moyal product is
    /// homogeneous for it.
    pub fn weight(&self) -> u32 {
        self.y_degree() + 2 * self.eps
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            eps: self.eps + other.eps,
            y: self.y.iter().zip(&other.y).map(|(a, b)| a + b).collect(),
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
        }
    }
}

// Graded lexicographic: ε-power, then y (degree, lex), then x (degree, lex).
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.eps
            .cmp(&other.eps)
            .then_with(|| self.y_degree().cmp(&other.y_degree()))
            .then_with(|| self.y.cmp(&other.y))
            .then_with(|| self.x_degree().cmp(&other.x_degree()))
            .then_with(|| self.x.cmp(&other.x))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Which variable family a derivative acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X(usize),
    Y(usize),
}

/// Truncated series in `x`, `y`, `ε` over ℚ.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Series {
    dim: usize,
    caps: Caps,
    terms: BTreeMap<Monomial, Q>,
}

impl Series {
    pub fn zero(dim: usize, caps: Caps) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Series {
            dim,
            caps,
            terms: BTreeMap::new(),
        }
    }

    /// Checked constructor for the zero series; rejects `d = 0`.
    pub fn try_zero(dim: usize, caps: Caps) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self::zero(dim, caps))
    }

    pub fn constant(dim: usize, caps: Caps, c: Q) -> Self {
        let mut s = Self::zero(dim, caps);
        s.insert(Monomial::one(dim), c);
        s
    }

    pub fn one(dim: usize, caps: Caps) -> Self {
        Self::constant(dim, caps, Q::one())
    }

    /// Builds a series from terms, dropping terms above the ε/y caps and
    /// rejecting terms above the x cap. Repeated monomials are summed.
    pub fn from_terms<I>(dim: usize, caps: Caps, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, Q)>,
    {
        let mut s = Self::try_zero(dim, caps)?;
        for (m, c) in terms {
            if m.dim() != dim || m.x.len() != dim {
                return Err(Error::DimensionMismatch(m.dim(), dim));
            }
            if m.x_degree() > caps.x {
                return Err(Error::XDegreeOverflow {
                    degree: m.x_degree(),
                    cap: caps.x,
                });
            }
            if m.eps > caps.eps || m.y_degree() > caps.y {
                continue;
            }
            s.add_term(m, c);
        }
        Ok(s)
    }

    /// Single monomial `c · ε^eps · y^y · x^x`.
    pub fn monomial(dim: usize, caps: Caps, c: Q, eps: u32, y: &[u16], x: &[u16]) -> Result<Self> {
        Self::from_terms(dim, caps, [(Monomial::new(eps, y, x), c)])
    }

    fn unit_vec(dim: usize, i: usize) -> Exponents {
        let mut e: Exponents = SmallVec::from_elem(0, dim);
        e[i] = 1;
        e
    }

    /// The coordinate `x^i` (zero-based index).
    pub fn x_var(dim: usize, caps: Caps, i: usize) -> Self {
        let m = Monomial {
            eps: 0,
            y: SmallVec::from_elem(0, dim),
            x: Self::unit_vec(dim, i),
        };
        Self::from_terms(dim, caps, [(m, Q::one())]).expect("x-cap must admit degree 1")
    }

    /// The fiber coordinate `y^i` (zero-based index).
    pub fn y_var(dim: usize, caps: Caps, i: usize) -> Self {
        let m = Monomial {
            eps: 0,
            y: Self::unit_vec(dim, i),
            x: SmallVec::from_elem(0, dim),
        };
        Self::from_terms(dim, caps, [(m, Q::one())]).unwrap()
    }

    pub fn eps(dim: usize, caps: Caps) -> Self {
        let mut m = Monomial::one(dim);
        m.eps = 1;
        Self::from_terms(dim, caps, [(m, Q::one())]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    fn insert(&mut self, m: Monomial, c: Q) {
        if !c.is_zero() {
            self.terms.insert(m, c);
        }
    }

    /// Adds `c` to the coefficient of `m` without cap checks; callers ensure
    /// `m` respects the caps.
    pub(crate) fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn y_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::y_degree).max()
    }

    pub fn min_y_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::y_degree).min()
    }

    pub fn x_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::x_degree).max()
    }

    pub fn max_eps(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.eps).max()
    }

    /// No y- or ε-dependence.
    pub fn is_x_polynomial(&self) -> bool {
        self.terms.keys().all(|m| m.eps == 0 && m.y_degree() == 0)
    }

    /// No y-dependence (x and ε allowed).
    pub fn is_y_free(&self) -> bool {
        self.terms.keys().all(|m| m.y_degree() == 0)
    }

    /// Lowest `(ε-order, y-degree + offset)` of a nonzero term.
    pub fn lowest_location(&self, form_degree: u32) -> Option<Location> {
        self.terms
            .keys()
            .map(|m| Location {
                eps_order: m.eps,
                total_degree: m.y_degree() + form_degree,
            })
            .min()
    }

    pub fn check_compatible(&self, other: &Series) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        if self.caps != other.caps {
            return Err(Error::CapMismatch(self.caps, other.caps));
        }
        Ok(())
    }

    /// Same terms under new caps; terms beyond the new ε/y caps are dropped.
    pub fn with_caps(&self, caps: Caps) -> Result<Series> {
        Self::from_terms(
            self.dim,
            caps,
            self.terms.iter().map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Keeps the terms satisfying `pred`.
    pub fn filter(&self, pred: impl Fn(&Monomial) -> bool) -> Series {
        Series {
            dim: self.dim,
            caps: self.caps,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| pred(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Keeps terms with `|y| ≤ n`.
    pub fn truncate_y(&self, n: u32) -> Series {
        self.filter(|m| m.y_degree() <= n)
    }

    /// Keeps terms with ε-power `≤ n`.
    pub fn truncate_eps(&self, n: u32) -> Series {
        self.filter(|m| m.eps <= n)
    }

    /// Keeps terms with `offset + |y| + 2·eps ≤ cap`. `offset` is the form
    /// degree of the component this series sits in.
    pub fn truncate_weight(&self, cap: u32, offset: u32) -> Series {
        self.filter(|m| offset + m.weight() <= cap)
    }

    /// The coefficient of `ε^k`, as an ε-free series.
    pub fn eps_coefficient(&self, k: u32) -> Series {
        Series {
            dim: self.dim,
            caps: self.caps,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.eps == k)
                .map(|(m, c)| {
                    let mut m = m.clone();
                    m.eps = 0;
                    (m, c.clone())
                })
                .collect(),
        }
    }

    /// Multiplies by `ε^k`, dropping terms above the ε-cap.
    pub fn shift_eps(&self, k: u32) -> Series {
        Series {
            dim: self.dim,
            caps: self.caps,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.eps + k <= self.caps.eps)
                .map(|(m, c)| {
                    let mut m = m.clone();
                    m.eps += k;
                    (m, c.clone())
                })
                .collect(),
        }
    }

    /// Homogeneous component of y-degree `k`.
    pub fn y_homogeneous(&self, k: u32) -> Series {
        self.filter(|m| m.y_degree() == k)
    }

    /// Multiplies by `y^i`, dropping terms that leave the y-cap.
    pub fn mul_y_var(&self, i: usize) -> Series {
        let cap = self.caps.y;
        Series {
            dim: self.dim,
            caps: self.caps,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.y_degree() < cap)
                .map(|(m, c)| {
                    let mut m = m.clone();
                    m.y[i] += 1;
                    (m, c.clone())
                })
                .collect(),
        }
    }

    /// Rescales each term by `f(monomial)`.
    pub fn scale_terms(&self, f: impl Fn(&Monomial) -> Q) -> Series {
        let mut out = Series::zero(self.dim, self.caps);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * f(m));
        }
        out
    }

    /// Renames `x^i ↦ y^i` in a y-free series, dropping terms over the y-cap.
    pub fn x_to_y(&self) -> Result<Series> {
        if !self.is_y_free() {
            return Err(Error::Precondition("x_to_y expects a y-free series".into()));
        }
        let mut out = Series::zero(self.dim, self.caps);
        for (m, c) in &self.terms {
            if m.x_degree() > self.caps.y {
                continue;
            }
            let m2 = Monomial {
                eps: m.eps,
                y: m.x.clone(),
                x: SmallVec::from_elem(0, self.dim),
            };
            out.add_term(m2, c.clone());
        }
        Ok(out)
    }
}
