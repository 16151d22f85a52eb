//! Series-valued differential forms `Σ s_I dx^I` on the chart, the
//! wedge-star product, the x-exterior derivative and graded commutators.

use std::collections::BTreeMap;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Location, Result};
use crate::fps::{Caps, Series, Q};

/// Strictly increasing, zero-based index tuple `i₁ < … < i_p`.
pub type Indices = SmallVec<[u8; 4]>;

/// A bilinear product on fibers. The form algebra is generic over it so the
/// same code serves the commutative, Moyal and first-order products.
pub trait FiberProduct: Sync {
    fn product(&self, a: &Series, b: &Series) -> Result<Series>;

    fn commutator(&self, a: &Series, b: &Series) -> Result<Series> {
        Ok(&self.product(a, b)? - &self.product(b, a)?)
    }
}

/// The pointwise product of `A_d[[ε]]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Commutative;

impl FiberProduct for Commutative {
    fn product(&self, a: &Series, b: &Series) -> Result<Series> {
        a.checked_mul(b)
    }

    fn commutator(&self, a: &Series, _b: &Series) -> Result<Series> {
        Ok(Series::zero(a.dim(), a.caps()))
    }
}

/// Sign of the shuffle merging `a` and `b`, or `None` if they share an index.
pub fn shuffle_sign(a: &[u8], b: &[u8]) -> Option<(i8, Indices)> {
    let mut inversions = 0usize;
    for &i in a {
        for &j in b {
            if i == j {
                return None;
            }
            if i > j {
                inversions += 1;
            }
        }
    }
    let mut merged: Indices = a.iter().chain(b).copied().collect();
    merged.sort_unstable();
    Some((if inversions % 2 == 0 { 1 } else { -1 }, merged))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EForm {
    dim: usize,
    caps: Caps,
    degree: usize,
    comps: BTreeMap<Indices, Series>,
}

impl EForm {
    pub fn zero(dim: usize, caps: Caps, degree: usize) -> Self {
        EForm {
            dim,
            caps,
            degree,
            comps: BTreeMap::new(),
        }
    }

    pub fn scalar(s: Series) -> Self {
        let mut f = Self::zero(s.dim(), s.caps(), 0);
        f.set(Indices::new(), s);
        f
    }

    /// `s · dx^{indices}`; the indices need not be sorted. Returns zero on a
    /// repeated index.
    pub fn monomial_form(s: Series, indices: &[usize]) -> Self {
        let mut idx: Indices = indices.iter().map(|&i| i as u8).collect();
        let mut sign = 1i8;
        // bubble sort, tracking parity
        for i in 0..idx.len() {
            for j in 0..idx.len() - 1 - i {
                if idx[j] > idx[j + 1] {
                    idx.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        let mut f = Self::zero(s.dim(), s.caps(), idx.len());
        if idx.windows(2).any(|w| w[0] == w[1]) {
            return f;
        }
        let s = if sign < 0 { -s } else { s };
        f.set(idx, s);
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> impl Iterator<Item = (&Indices, &Series)> {
        self.comps.iter()
    }

    pub fn component(&self, idx: &[u8]) -> Series {
        self.comps
            .get(idx)
            .cloned()
            .unwrap_or_else(|| Series::zero(self.dim, self.caps))
    }

    /// Component of a sorted zero-based index tuple given as `usize`s.
    pub fn get(&self, idx: &[usize]) -> Series {
        let key: Indices = idx.iter().map(|&i| i as u8).collect();
        self.component(&key)
    }

    /// As a 0-form: the scalar component.
    pub fn as_scalar(&self) -> Series {
        debug_assert_eq!(self.degree, 0);
        self.component(&[])
    }

    pub fn set(&mut self, idx: Indices, s: Series) {
        debug_assert_eq!(idx.len(), self.degree);
        if s.is_zero() {
            self.comps.remove(&idx);
        } else {
            self.comps.insert(idx, s);
        }
    }

    pub fn add_to(&mut self, idx: Indices, s: &Series) {
        if s.is_zero() {
            return;
        }
        let cur = self.component(&idx);
        self.set(idx, &cur + s);
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn map(&self, f: impl Fn(&Series) -> Series) -> EForm {
        self.try_map(|s| Ok(f(s))).unwrap()
    }

    pub fn try_map(&self, f: impl Fn(&Series) -> Result<Series>) -> Result<EForm> {
        let mut out = EForm::zero(self.dim, self.caps, self.degree);
        for (i, s) in &self.comps {
            out.set(i.clone(), f(s)?);
        }
        Ok(out)
    }

    pub fn add(&self, other: &EForm) -> EForm {
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        let mut out = self.clone();
        for (i, s) in &other.comps {
            out.add_to(i.clone(), s);
        }
        out
    }

    pub fn sub(&self, other: &EForm) -> EForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> EForm {
        self.map(|s| -s)
    }

    pub fn scale(&self, c: &Q) -> EForm {
        self.map(|s| s.scale(c))
    }

    pub fn eval_y0(&self) -> EForm {
        self.map(Series::eval_y0)
    }

    pub fn eps_coefficient(&self, k: u32) -> EForm {
        self.map(|s| s.eps_coefficient(k))
    }

    pub fn shift_eps(&self, k: u32) -> EForm {
        self.map(|s| s.shift_eps(k))
    }

    pub fn truncate_eps(&self, n: u32) -> EForm {
        self.map(|s| s.truncate_eps(n))
    }

    /// Keeps terms of total weight `p + |y| + 2·eps ≤ cap`.
    pub fn truncate_weight(&self, cap: u32) -> EForm {
        let p = self.degree as u32;
        self.map(|s| s.truncate_weight(cap, p))
    }

    /// Same form under new caps.
    pub fn with_caps(&self, caps: Caps) -> Result<EForm> {
        let mut out = EForm::zero(self.dim, caps, self.degree);
        for (i, s) in &self.comps {
            out.set(i.clone(), s.with_caps(caps)?);
        }
        Ok(out)
    }

    /// Lowest (ε-order, form degree + y-degree) of a nonzero coefficient.
    pub fn lowest_location(&self) -> Option<Location> {
        self.comps
            .values()
            .filter_map(|s| s.lowest_location(self.degree as u32))
            .min()
    }

    /// Applies a bilinear map componentwise with shuffle signs:
    /// `Σ sign(I,J) f(a_I, b_J) dx^{I∪J}`.
    pub fn combine(
        a: &EForm,
        b: &EForm,
        f: impl Fn(&Series, &Series) -> Result<Series>,
    ) -> Result<EForm> {
        let mut out = EForm::zero(a.dim, a.caps, a.degree + b.degree);
        if a.degree + b.degree > a.dim {
            return Ok(out);
        }
        for (i, sa) in &a.comps {
            for (j, sb) in &b.comps {
                if let Some((sign, k)) = shuffle_sign(i, j) {
                    let v = f(sa, sb)?;
                    let v = if sign < 0 { -v } else { v };
                    out.add_to(k, &v);
                }
            }
        }
        Ok(out)
    }

    pub fn wedge_star(a: &EForm, b: &EForm, product: &dyn FiberProduct) -> Result<EForm> {
        Self::combine(a, b, |x, y| product.product(x, y))
    }

    /// `[a, b] = a ∧⋆ b − (−1)^{pq} b ∧⋆ a`.
    pub fn graded_commutator(a: &EForm, b: &EForm, product: &dyn FiberProduct) -> Result<EForm> {
        let ab = Self::wedge_star(a, b, product)?;
        let ba = Self::wedge_star(b, a, product)?;
        Ok(if (a.degree * b.degree) % 2 == 0 {
            ab.sub(&ba)
        } else {
            ab.add(&ba)
        })
    }

    /// `dx^j ∧ self`.
    pub fn wedge_dx(&self, j: usize) -> EForm {
        let mut out = EForm::zero(self.dim, self.caps, self.degree + 1);
        for (i, s) in &self.comps {
            if let Some((sign, k)) = shuffle_sign(&[j as u8], i) {
                out.add_to(k, &if sign < 0 { -s } else { s.clone() });
            }
        }
        out
    }

    /// Interior product with `∂/∂x^i`.
    pub fn interior(&self, i: usize) -> EForm {
        let mut out = EForm::zero(self.dim, self.caps, self.degree.saturating_sub(1));
        if self.degree == 0 {
            return out;
        }
        for (idx, s) in &self.comps {
            if let Some(pos) = idx.iter().position(|&k| k as usize == i) {
                let mut rest = idx.clone();
                rest.remove(pos);
                out.add_to(rest, &if pos % 2 == 1 { -s } else { s.clone() });
            }
        }
        out
    }

    /// Exterior derivative in x only; `y` and `ε` are inert.
    pub fn d_x(&self) -> EForm {
        let mut out = EForm::zero(self.dim, self.caps, self.degree + 1);
        for j in 0..self.dim {
            out = out.add(&self.map(|s| s.diff_x(j)).wedge_dx(j));
        }
        out
    }
}

fn write_indices(f: &mut fmt::Formatter<'_>, idx: &[u8]) -> fmt::Result {
    for (k, i) in idx.iter().enumerate() {
        if k > 0 {
            write!(f, "∧")?;
        }
        write!(f, "dx{}", i + 1)?;
    }
    Ok(())
}

impl fmt::Display for EForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        for (k, (idx, s)) in self.comps.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if self.degree == 0 {
                write!(f, "{s}")?;
            } else {
                write!(f, "({s}) ")?;
                write_indices(f, idx)?;
            }
        }
        Ok(())
    }
}
