use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num::{BigInt, Zero};

use super::{Monomial, Series, Var, Q};
use crate::error::{Error, Result};

impl Series {
    pub fn checked_add(&self, other: &Series) -> Result<Series> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Series) -> Result<Series> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> Series {
        if c.is_zero() {
            return Series::zero(self.dim(), self.caps());
        }
        let mut out = Series::zero(self.dim(), self.caps());
        for (m, v) in self.terms() {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// Truncated convolution product. Terms over the ε- or y-cap are
    /// discarded; a surviving term over the x-cap is an error.
    pub fn checked_mul(&self, other: &Series) -> Result<Series> {
        self.checked_mul_eps(other, self.caps().eps)
    }

    /// As [`Series::checked_mul`], additionally dropping product terms of
    /// ε-power above `eps_cap`.
    pub fn checked_mul_eps(&self, other: &Series, eps_cap: u32) -> Result<Series> {
        self.checked_mul_capped(other, eps_cap, u32::MAX)
    }

    /// As [`Series::checked_mul_eps`], additionally skipping pairs whose
    /// product has weight `|y| + 2·eps` above `weight_cap`.
    pub fn checked_mul_capped(&self, other: &Series, eps_cap: u32, weight_cap: u32) -> Result<Series> {
        self.check_compatible(other)?;
        let caps = self.caps();
        let eps_cap = eps_cap.min(caps.eps);
        let mut acc: BTreeMap<Monomial, Q> = BTreeMap::new();
        for (ma, ca) in self.terms() {
            let ya = ma.y_degree();
            let wa = ma.weight();
            if wa > weight_cap {
                continue;
            }
            for (mb, cb) in other.terms() {
                if ma.eps + mb.eps > eps_cap
                    || ya + mb.y_degree() > caps.y
                    || wa + mb.weight() > weight_cap
                {
                    continue;
                }
                let xd = ma.x_degree() + mb.x_degree();
                if xd > caps.x {
                    return Err(Error::XDegreeOverflow {
                        degree: xd,
                        cap: caps.x,
                    });
                }
                let m = ma.mul(mb);
                *acc.entry(m).or_insert_with(Q::zero) += ca * cb;
            }
        }
        Series::from_sorted_map(self.dim(), caps, acc)
    }

    pub(crate) fn from_sorted_map(
        dim: usize,
        caps: super::Caps,
        acc: BTreeMap<Monomial, Q>,
    ) -> Result<Series> {
        let mut out = Series::zero(dim, caps);
        for (m, c) in acc {
            out.add_term(m, c);
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<Series> {
        let mut out = Series::one(self.dim(), self.caps());
        for _ in 0..n {
            out = out.checked_mul(self)?;
        }
        Ok(out)
    }

    /// Formal partial derivative. After `∂/∂y` the result is exact only up to
    /// y-degree `N_y − 1`.
    pub fn diff(&self, var: Var) -> Series {
        let mut out = Series::zero(self.dim(), self.caps());
        for (m, c) in self.terms() {
            let mut m2 = m.clone();
            let e = match var {
                Var::X(i) => &mut m2.x[i],
                Var::Y(i) => &mut m2.y[i],
            };
            if *e == 0 {
                continue;
            }
            let k = *e;
            *e -= 1;
            out.add_term(m2, c * Q::from_integer(BigInt::from(k)));
        }
        out
    }

    pub fn diff_x(&self, i: usize) -> Series {
        self.diff(Var::X(i))
    }

    pub fn diff_y(&self, i: usize) -> Series {
        self.diff(Var::Y(i))
    }

    /// Iterated y-derivative `∂^{e}/∂y^{e}` for a multi-index `e`, computed
    /// termwise with falling factorials.
    pub fn diff_y_multi(&self, e: &[u16]) -> Series {
        let mut out = Series::zero(self.dim(), self.caps());
        'terms: for (m, c) in self.terms() {
            let mut factor = BigInt::from(1);
            let mut m2 = m.clone();
            for (i, &k) in e.iter().enumerate() {
                if m.y[i] < k {
                    continue 'terms;
                }
                for t in 0..k {
                    factor *= BigInt::from(m.y[i] - t);
                }
                m2.y[i] -= k;
            }
            out.add_term(m2, c * Q::from_integer(factor));
        }
        out
    }

    /// Drops every term with positive y-degree.
    pub fn eval_y0(&self) -> Series {
        self.filter(|m| m.y_degree() == 0)
    }

    /// Shifts ε-powers down by `k`; every term must carry `ε^k`. The caller
    /// records that the result is valid to ε-order `N_ε − k` only.
    pub fn divide_by_eps(&self, k: u32) -> Result<Series> {
        if let Some(m) = self.terms().map(|(m, _)| m).find(|m| m.eps < k) {
            return Err(Error::NotDivisible { k, found: m.eps });
        }
        let mut out = Series::zero(self.dim(), self.caps());
        for (m, c) in self.terms() {
            let mut m2 = m.clone();
            m2.eps -= k;
            out.add_term(m2, c.clone());
        }
        Ok(out)
    }
}

impl<'a> Add<&'a Series> for &'a Series {
    type Output = Series;
    fn add(self, rhs: &'a Series) -> Series {
        self.checked_add(rhs).expect("series_add: incompatible operands")
    }
}

impl<'a> Sub<&'a Series> for &'a Series {
    type Output = Series;
    fn sub(self, rhs: &'a Series) -> Series {
        self.checked_sub(rhs).expect("series_sub: incompatible operands")
    }
}

impl Add for Series {
    type Output = Series;
    fn add(self, rhs: Series) -> Series {
        &self + &rhs
    }
}

impl Sub for Series {
    type Output = Series;
    fn sub(self, rhs: Series) -> Series {
        &self - &rhs
    }
}

impl AddAssign<&Series> for Series {
    fn add_assign(&mut self, rhs: &Series) {
        self.check_compatible(rhs)
            .expect("series_add: incompatible operands");
        for (m, c) in rhs.terms() {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Series> for Series {
    fn sub_assign(&mut self, rhs: &Series) {
        self.check_compatible(rhs)
            .expect("series_sub: incompatible operands");
        for (m, c) in rhs.terms() {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        let mut out = Series::zero(self.dim(), self.caps());
        for (m, c) in self.terms() {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        -&self
    }
}

impl Mul<&Q> for &Series {
    type Output = Series;
    fn mul(self, c: &Q) -> Series {
        self.scale(c)
    }
}
