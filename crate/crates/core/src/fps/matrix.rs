use super::Series;
use crate::error::{Error, Result};

/// Square matrix of series sharing dimension and caps, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesMatrix {
    n: usize,
    entries: Vec<Series>,
}

impl SeriesMatrix {
    pub fn from_rows(rows: Vec<Vec<Series>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let first = rows[0][0].clone();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch(row.len(), n));
            }
            for e in row {
                first.check_compatible(&e)?;
                entries.push(e);
            }
        }
        Ok(SeriesMatrix { n, entries })
    }

    pub fn identity(template: &Series, n: usize) -> Self {
        let (dim, caps) = (template.dim(), template.caps());
        let entries = (0..n * n)
            .map(|k| {
                if k / n == k % n {
                    Series::one(dim, caps)
                } else {
                    Series::zero(dim, caps)
                }
            })
            .collect();
        SeriesMatrix { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> &Series {
        &self.entries[row * self.n + col]
    }

    pub fn sub(&self, other: &SeriesMatrix) -> SeriesMatrix {
        SeriesMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add(&self, other: &SeriesMatrix) -> SeriesMatrix {
        SeriesMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Series::zero(self.entries[0].dim(), self.entries[0].caps());
                for k in 0..n {
                    acc += &self.get(i, k).checked_mul(other.get(k, j))?;
                }
                entries.push(acc);
            }
        }
        Ok(SeriesMatrix { n, entries })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Series::is_zero)
    }

    /// Inverse of a matrix that reduces to the identity at `y = 0, ε = 0`,
    /// as the geometric series `Σ (I − J)ⁿ`. Every term of `I − J` must have
    /// positive y-degree or positive ε-power, so the sum terminates at the caps.
    pub fn inverse_unit(&self) -> Result<SeriesMatrix> {
        let id = SeriesMatrix::identity(&self.entries[0], self.n);
        let nil = id.sub(self);
        for e in &nil.entries {
            if e.terms().any(|(m, _)| m.y_degree() == 0 && m.eps == 0) {
                return Err(Error::Precondition(
                    "matrix is not the identity at y = 0, ε = 0".into(),
                ));
            }
        }
        let mut sum = id.clone();
        let mut power = id;
        loop {
            power = power.mul(&nil)?;
            if power.is_zero() {
                break;
            }
            sum = sum.add(&power);
        }
        Ok(sum)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{q, Caps, Series};
    use super::*;

    #[test]
    fn identity_inverts_to_identity() {
        let t = Series::zero(2, Caps::new(0, 4, 0));
        let id = SeriesMatrix::identity(&t, 2);
        assert_eq!(id.inverse_unit().unwrap(), id);
    }

    #[test]
    fn one_by_one_geometric_series() {
        let caps = Caps::new(0, 5, 0);
        let y = Series::y_var(1, caps, 0);
        let j = SeriesMatrix::from_rows(vec![vec![&Series::one(1, caps) + &y]]).unwrap();
        let inv = j.inverse_unit().unwrap();
        let mut expect = Series::zero(1, caps);
        for k in 0..=5u16 {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            expect += &Series::monomial(1, caps, q(sign), 0, &[k], &[0]).unwrap();
        }
        assert_eq!(inv.get(0, 0), &expect);
    }

    #[test]
    fn constant_nilpotent_part_rejected() {
        let caps = Caps::new(0, 3, 0);
        let one = Series::one(2, caps);
        let zero = Series::zero(2, caps);
        let j = SeriesMatrix::from_rows(vec![
            vec![one.clone(), one.clone()],
            vec![zero, one],
        ])
        .unwrap();
        assert!(matches!(j.inverse_unit(), Err(Error::Precondition(_))));
    }
}
