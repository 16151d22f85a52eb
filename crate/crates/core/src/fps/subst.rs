use smallvec::SmallVec;

use super::{Monomial, Series};
use crate::error::{Error, Result};

/// Caches `base[j]^k` for every variable `j`.
struct PowerTable<'a> {
    base: &'a [Series],
    powers: Vec<Vec<Series>>,
}

impl<'a> PowerTable<'a> {
    fn new(base: &'a [Series]) -> Self {
        let powers = base
            .iter()
            .map(|b| vec![Series::one(b.dim(), b.caps())])
            .collect();
        PowerTable { base, powers }
    }

    fn get(&mut self, j: usize, k: usize) -> Result<&Series> {
        while self.powers[j].len() <= k {
            let next = self.powers[j].last().unwrap().checked_mul(&self.base[j])?;
            self.powers[j].push(next);
        }
        Ok(&self.powers[j][k])
    }
}

fn check_images(f: &Series, images: &[Series]) -> Result<()> {
    if images.len() != f.dim() {
        return Err(Error::DimensionMismatch(images.len(), f.dim()));
    }
    for im in images {
        f.check_compatible(im)?;
    }
    Ok(())
}

/// Replaces each `x^j` in `f` by `images[j]`; the y- and ε-parts of every
/// term of `f` are kept as a monomial factor.
pub fn substitute_x(f: &Series, images: &[Series]) -> Result<Series> {
    check_images(f, images)?;
    let dim = f.dim();
    let mut table = PowerTable::new(images);
    let mut out = Series::zero(dim, f.caps());
    for (m, c) in f.terms() {
        let rest = Monomial {
            eps: m.eps,
            y: m.y.clone(),
            x: SmallVec::from_elem(0, dim),
        };
        let mut term = Series::from_terms(dim, f.caps(), [(rest, c.clone())])?;
        for j in 0..dim {
            if m.x[j] > 0 {
                term = term.checked_mul(table.get(j, m.x[j] as usize)?)?;
            }
        }
        out += &term;
    }
    Ok(out)
}

/// Replaces each `y^i` in `f` by `images[i]`, keeping x- and ε-factors.
pub fn substitute_y(f: &Series, images: &[Series]) -> Result<Series> {
    check_images(f, images)?;
    let dim = f.dim();
    let mut table = PowerTable::new(images);
    let mut out = Series::zero(dim, f.caps());
    for (m, c) in f.terms() {
        let rest = Monomial {
            eps: m.eps,
            y: SmallVec::from_elem(0, dim),
            x: m.x.clone(),
        };
        let mut term = Series::from_terms(dim, f.caps(), [(rest, c.clone())])?;
        for i in 0..dim {
            if m.y[i] > 0 {
                term = term.checked_mul(table.get(i, m.y[i] as usize)?)?;
            }
        }
        out += &term;
    }
    Ok(out)
}
