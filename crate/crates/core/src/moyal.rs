//! Fiberwise deformed products: the exact Moyal product of a constant
//! bivector and the order-ε product of a general formal bivector.

use std::collections::BTreeMap;

use num::{BigInt, One, Zero};

use crate::error::{Error, Result};
use crate::forms::FiberProduct;
use crate::fps::{q, Exponents, Series, Q};

/// Antisymmetric constant matrix `α₀^{ij}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantBivector {
    alpha: Vec<Vec<Q>>,
}

/// Inverse of a square rational matrix by Gauss–Jordan elimination.
pub fn invert_matrix(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut inv: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for j in 0..n {
                    let t = &factor * &a[col][j];
                    a[r][j] -= t;
                    let t = &factor * &inv[col][j];
                    inv[r][j] -= t;
                }
            }
        }
    }
    Some(inv)
}

impl ConstantBivector {
    pub fn new(alpha: Vec<Vec<Q>>) -> Result<Self> {
        let d = alpha.len();
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        for (i, row) in alpha.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch(row.len(), d));
            }
            for j in 0..d {
                if alpha[i][j] != -alpha[j][i].clone() {
                    return Err(Error::Precondition(format!(
                        "bivector not antisymmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(ConstantBivector { alpha })
    }

    /// The standard bivector on ℝ² with `α^{12} = 1`.
    pub fn standard_2d() -> Self {
        Self::new(vec![vec![q(0), q(1)], vec![q(-1), q(0)]]).unwrap()
    }

    /// The Poisson bivector of a constant symplectic matrix `Ω₀`, normalized
    /// so that `Σ_k Ω₀_{mk} α^{ik} = δ_{mi}`, i.e. `α = −Ω₀⁻¹`. With this
    /// choice `Ω₀ = dx¹∧dx²` gives `{x¹, x²} = 1`.
    pub fn from_symplectic(omega: &[Vec<Q>]) -> Result<Self> {
        let inv = invert_matrix(omega)
            .ok_or_else(|| Error::Precondition("symplectic matrix is degenerate".into()))?;
        Self::new(
            inv.into_iter()
                .map(|row| row.into_iter().map(|v| -v).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Q {
        &self.alpha[i][j]
    }

    pub fn matrix(&self) -> &[Vec<Q>] {
        &self.alpha
    }

    /// `g α gᵀ`, the push-forward by the linear map `y ↦ g y`.
    pub fn push_forward(&self, g: &[Vec<Q>]) -> Self {
        let d = self.dim();
        let mut out = vec![vec![Q::zero(); d]; d];
        for (k, row) in out.iter_mut().enumerate() {
            for (l, v) in row.iter_mut().enumerate() {
                for i in 0..d {
                    for j in 0..d {
                        *v += &g[k][i] * &self.alpha[i][j] * &g[l][j];
                    }
                }
            }
        }
        ConstantBivector { alpha: out }
    }

    fn nonzero_pairs(&self) -> Vec<(usize, usize, Q)> {
        let d = self.dim();
        let mut v = Vec::new();
        for i in 0..d {
            for j in 0..d {
                if !self.alpha[i][j].is_zero() {
                    v.push((i, j, self.alpha[i][j].clone()));
                }
            }
        }
        v
    }

    /// The operator `(Σ α^{ij} ∂_i ⊗ ∂_j)ⁿ / n!` as a map from derivative
    /// multi-index pairs `(a, b)` to coefficients, via the multinomial
    /// expansion over the nonzero entries of `α`.
    fn order_terms(&self, n: u32) -> BTreeMap<(Exponents, Exponents), Q> {
        let pairs = self.nonzero_pairs();
        let d = self.dim();
        let mut out = BTreeMap::new();
        let mut counts = vec![0u32; pairs.len()];
        fn rec(
            pos: usize,
            left: u32,
            counts: &mut Vec<u32>,
            pairs: &[(usize, usize, Q)],
            d: usize,
            out: &mut BTreeMap<(Exponents, Exponents), Q>,
        ) {
            if pos == pairs.len() {
                if left != 0 {
                    return;
                }
                let mut a: Exponents = Exponents::from_elem(0, d);
                let mut b: Exponents = Exponents::from_elem(0, d);
                let mut c = Q::one();
                for (p, &m) in counts.iter().enumerate() {
                    let (i, j, ref v) = pairs[p];
                    a[i] += m as u16;
                    b[j] += m as u16;
                    let mut fact = BigInt::one();
                    for t in 1..=m {
                        fact *= BigInt::from(t);
                        c *= v;
                    }
                    c /= Q::from_integer(fact);
                }
                *out.entry((a, b)).or_insert_with(Q::zero) += c;
                return;
            }
            for m in 0..=left {
                counts[pos] = m;
                rec(pos + 1, left - m, counts, pairs, d, out);
            }
            counts[pos] = 0;
        }
        rec(0, n, &mut counts, &pairs, d, &mut out);
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// `Σ_n w(n) · ε^{e(n)} · (Σ α ∂ ⊗ ∂)ⁿ(f ⊗ g) / n!` over the orders `n`
    /// for which `weight(n) = Some((w, e))`. Every Moyal-type combination in
    /// this crate is an instance.
    pub fn bidifferential_sum(
        &self,
        f: &Series,
        g: &Series,
        weight: impl Fn(u32) -> Option<(Q, u32)>,
    ) -> Result<Series> {
        self.bidifferential_sum_capped(f, g, weight, u32::MAX)
    }

    /// As [`ConstantBivector::bidifferential_sum`], computing only terms of
    /// weight `|y| + 2·eps ≤ weight_cap`. The Moyal-type sums are
    /// weight-homogeneous up to the ε-shift, so nothing below the cap is lost.
    pub fn bidifferential_sum_capped(
        &self,
        f: &Series,
        g: &Series,
        weight: impl Fn(u32) -> Option<(Q, u32)>,
        weight_cap: u32,
    ) -> Result<Series> {
        f.check_compatible(g)?;
        let caps = f.caps();
        let mut out = Series::zero(f.dim(), caps);
        let (Some(df), Some(dg)) = (f.y_degree(), g.y_degree()) else {
            return Ok(out);
        };
        let max_n = df.min(dg);
        let mut f_cache: BTreeMap<Exponents, Series> = BTreeMap::new();
        let mut g_cache: BTreeMap<Exponents, Series> = BTreeMap::new();
        for n in 0..=max_n {
            let Some((w, e)) = weight(n) else { continue };
            if e > caps.eps || w.is_zero() {
                continue;
            }
            for ((a, b), c) in self.order_terms(n) {
                let fa = f_cache
                    .entry(a.clone())
                    .or_insert_with(|| f.diff_y_multi(&a));
                if fa.is_zero() {
                    continue;
                }
                let gb = g_cache
                    .entry(b.clone())
                    .or_insert_with(|| g.diff_y_multi(&b));
                if gb.is_zero() {
                    continue;
                }
                if weight_cap < 2 * e {
                    continue;
                }
                let prod = fa.checked_mul_capped(gb, caps.eps - e, weight_cap - 2 * e)?;
                out += &prod.scale(&(&c * &w)).shift_eps(e);
            }
        }
        Ok(out)
    }
}

/// `Σ α₀^{ij} ∂_{y^i} f ∂_{y^j} g`.
pub fn poisson_bracket(f: &Series, g: &Series, alpha: &ConstantBivector) -> Result<Series> {
    alpha.bidifferential_sum(f, g, |n| (n == 1).then(|| (Q::one(), 0)))
}

/// `exp(ε Σ α₀^{ij} ∂_{y₁^i} ∂_{y₂^j}) f(y₁) g(y₂)|_{y₁=y₂=y}`, truncated.
pub fn moyal_product(f: &Series, g: &Series, alpha: &ConstantBivector) -> Result<Series> {
    alpha.bidifferential_sum(f, g, |n| Some((Q::one(), n)))
}

/// `[h, f]⋆ / (2ε)` for scalar series, summed directly over the odd orders
/// so no ε-precision is lost to the division.
pub fn star_commutator_over_2eps(h: &Series, f: &Series, alpha: &ConstantBivector) -> Result<Series> {
    alpha.bidifferential_sum(h, f, |n| (n % 2 == 1).then(|| (Q::one(), n - 1)))
}

/// The Moyal fiber product as a [`FiberProduct`] handle.
#[derive(Clone, Debug)]
pub struct Moyal {
    pub alpha: ConstantBivector,
}

impl Moyal {
    pub fn new(alpha: ConstantBivector) -> Self {
        Moyal { alpha }
    }

    /// Shift of the weight `|y| + 2·eps` under the product: the Moyal
    /// product is homogeneous.
    pub fn filtration_shift(&self) -> i32 {
        0
    }
}

impl FiberProduct for Moyal {
    fn product(&self, a: &Series, b: &Series) -> Result<Series> {
        moyal_product(a, b, &self.alpha)
    }

    fn commutator(&self, a: &Series, b: &Series) -> Result<Series> {
        self.alpha
            .bidifferential_sum(a, b, |n| (n % 2 == 1).then(|| (q(2), n)))
    }
}

/// Antisymmetric matrix of series `α^{ij}`, possibly x- and y-dependent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalBivector {
    comps: Vec<Vec<Series>>,
}

impl FormalBivector {
    pub fn new(comps: Vec<Vec<Series>>) -> Result<Self> {
        let d = comps.len();
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        for i in 0..d {
            if comps[i].len() != d {
                return Err(Error::DimensionMismatch(comps[i].len(), d));
            }
            for j in 0..d {
                comps[0][0].check_compatible(&comps[i][j])?;
                if comps[i][j] != -&comps[j][i] {
                    return Err(Error::Precondition(format!(
                        "bivector not antisymmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(FormalBivector { comps })
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Series {
        &self.comps[i][j]
    }

    /// `Σ α^{ij} ∂_{y^i} f ∂_{y^j} g`.
    pub fn bracket(&self, f: &Series, g: &Series) -> Result<Series> {
        let d = self.dim();
        let mut out = Series::zero(f.dim(), f.caps());
        for i in 0..d {
            let fi = f.diff_y(i);
            if fi.is_zero() {
                continue;
            }
            for j in 0..d {
                if self.comps[i][j].is_zero() {
                    continue;
                }
                let gj = g.diff_y(j);
                out += &self.comps[i][j].checked_mul(&fi)?.checked_mul(&gj)?;
            }
        }
        Ok(out)
    }

    /// Jacobiator `Σ_l (α^{il} ∂_l α^{jk} + α^{jl} ∂_l α^{ki} + α^{kl} ∂_l α^{ij})`
    /// for every `i < j < k`, truncated to the y-degree where it is exact.
    pub fn jacobi_residual(&self) -> Result<Vec<Series>> {
        let d = self.dim();
        let mut out = Vec::new();
        let cap = self.comps[0][0].caps().y.saturating_sub(1);
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    let mut acc = Series::zero(self.comps[0][0].dim(), self.comps[0][0].caps());
                    for l in 0..d {
                        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                            acc += &self.comps[a][l].checked_mul(&self.comps[b][c].diff_y(l))?;
                        }
                    }
                    out.push(acc.truncate_y(cap));
                }
            }
        }
        Ok(out)
    }

    pub fn check_jacobi(&self) -> Result<()> {
        if self.jacobi_residual()?.iter().all(Series::is_zero) {
            Ok(())
        } else {
            Err(Error::Precondition("bivector fails the Jacobi identity".into()))
        }
    }
}

/// `f·g + ε {f, g}_α`, with every ε²⁺ term of the full product absent.
#[derive(Clone, Debug)]
pub struct KontsevichFirstOrder {
    pub alpha: FormalBivector,
}

impl KontsevichFirstOrder {
    /// Validates `α` with the Jacobi check before use.
    pub fn new(alpha: FormalBivector) -> Result<Self> {
        alpha.check_jacobi()?;
        Ok(KontsevichFirstOrder { alpha })
    }
}

pub fn kontsevich_first_order(f: &Series, g: &Series, alpha: &FormalBivector) -> Result<Series> {
    Ok(&f.checked_mul(g)? + &alpha.bracket(f, g)?.shift_eps(1))
}

impl FiberProduct for KontsevichFirstOrder {
    fn product(&self, a: &Series, b: &Series) -> Result<Series> {
        kontsevich_first_order(a, b, &self.alpha)
    }
}
