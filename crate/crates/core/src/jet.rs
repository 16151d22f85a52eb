//! Chart-level formal geometry: local lifts `φ_x`, the canonical flat
//! connection `D₀`, the operators `δ`, `δ*`, `δ⁻¹`, and Hamiltonian lifts.
//!
//! Index conventions (zero-based in code):
//! - `J^l_k = ∂φ^l/∂y^k`, `T = J⁻¹`;
//! - `X_j^k = −Σ_l T^k_l ∂φ^l/∂x^j`, so that `D₀ = d_x + Σ_j dx^j X_j^k ∂_{y^k}`
//!   annihilates every `f ∘ φ`;
//! - `α₀ = −Ω₀⁻¹` and `dh = Σ_m (Σ_k Ω₀_{mk} X^k) dy^m` for `{h, ·} = X·∂_y`.

use num::{BigInt, One, Zero};

use crate::error::{Error, Result};
use crate::forms::{EForm, Indices};
use crate::fps::{substitute_x, Caps, Series, SeriesMatrix, Q};
use crate::moyal::ConstantBivector;

/// The local lift `x ↦ φ_x`, `φ^j = x^j + y^j + O(y²)`.
#[derive(Clone, Debug)]
pub struct ChartJetFamily {
    phi: Vec<Series>,
    jacobian: SeriesMatrix,
    inverse: SeriesMatrix,
    fields: Vec<Vec<Series>>,
}

impl ChartJetFamily {
    pub fn new(phi: Vec<Series>) -> Result<Self> {
        let dim = phi.len();
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let caps = phi[0].caps();
        for (j, p) in phi.iter().enumerate() {
            phi[0].check_compatible(p)?;
            if p.dim() != dim {
                return Err(Error::DimensionMismatch(p.dim(), dim));
            }
            let rest = &(p - &Series::x_var(dim, caps, j)) - &Series::y_var(dim, caps, j);
            if rest.terms().any(|(m, _)| m.y_degree() < 2 || m.eps > 0) {
                return Err(Error::Precondition(format!(
                    "phi^{} is not of the form x + y + O(y^2)",
                    j + 1
                )));
            }
        }
        let rows = (0..dim)
            .map(|l| (0..dim).map(|k| phi[l].diff_y(k)).collect())
            .collect();
        let jacobian = SeriesMatrix::from_rows(rows)?;
        let inverse = jacobian.inverse_unit()?;
        let mut fields = Vec::with_capacity(dim);
        for j in 0..dim {
            let dphi: Vec<Series> = phi.iter().map(|p| p.diff_x(j)).collect();
            let mut xj = Vec::with_capacity(dim);
            for k in 0..dim {
                let mut acc = Series::zero(dim, caps);
                for (l, dp) in dphi.iter().enumerate() {
                    acc -= &inverse.get(k, l).checked_mul(dp)?;
                }
                xj.push(acc);
            }
            fields.push(xj);
        }
        Ok(ChartJetFamily {
            phi,
            jacobian,
            inverse,
            fields,
        })
    }

    /// The identity chart `φ_x(y) = x + y`.
    pub fn flat(dim: usize, caps: Caps) -> Result<Self> {
        Series::try_zero(dim, caps)?;
        Self::new(
            (0..dim)
                .map(|j| &Series::x_var(dim, caps, j) + &Series::y_var(dim, caps, j))
                .collect(),
        )
    }

    /// `φ^j = x^j + y^j − ½ Σ Γ^j_{kl}(x) y^k y^l + higher^j`, with
    /// `gamma[j][k][l]` x-polynomials symmetric in `k, l`.
    pub fn from_christoffel(
        dim: usize,
        caps: Caps,
        gamma: &[Vec<Vec<Series>>],
        higher: Option<&[Series]>,
    ) -> Result<Self> {
        if gamma.len() != dim {
            return Err(Error::DimensionMismatch(gamma.len(), dim));
        }
        let half = Q::new(BigInt::from(1), BigInt::from(2));
        let mut phi = Vec::with_capacity(dim);
        for j in 0..dim {
            if gamma[j].len() != dim || gamma[j].iter().any(|r| r.len() != dim) {
                return Err(Error::DimensionMismatch(gamma[j].len(), dim));
            }
            for k in 0..dim {
                for l in 0..dim {
                    if !gamma[j][k][l].is_x_polynomial() {
                        return Err(Error::Precondition(
                            "christoffel symbols must be x-polynomials".into(),
                        ));
                    }
                    if gamma[j][k][l] != gamma[j][l][k] {
                        return Err(Error::AsymmetricChristoffel { j, k, l });
                    }
                }
            }
            let mut p = &Series::x_var(dim, caps, j) + &Series::y_var(dim, caps, j);
            for k in 0..dim {
                for l in 0..dim {
                    let yy = Series::y_var(dim, caps, k).mul_y_var(l);
                    p -= &gamma[j][k][l].checked_mul(&yy)?.scale(&half);
                }
            }
            if let Some(h) = higher {
                if h.len() != dim {
                    return Err(Error::DimensionMismatch(h.len(), dim));
                }
                if h[j].terms().any(|(m, _)| m.y_degree() < 3) {
                    return Err(Error::Precondition(
                        "higher jets must have y-degree at least 3".into(),
                    ));
                }
                p += &h[j];
            }
            phi.push(p);
        }
        Self::new(phi)
    }

    /// `φ_x = x + Φ_1 ∘ ⋯ ∘ Φ_m`, where `Φ_i` is the time-`t_i(x)` flow of the
    /// Hamiltonian `H_i(y)` for the bracket of `α₀`, expanded as a Lie series.
    /// Each `H_i` must have y-degree at least 3, so the chart is normalized
    /// and Darboux for `Ω₀ = −α₀⁻¹`.
    pub fn from_flows(
        dim: usize,
        caps: Caps,
        alpha: &ConstantBivector,
        flows: &[(Series, Series)],
    ) -> Result<Self> {
        let mut psi: Vec<Series> = (0..dim).map(|i| Series::y_var(dim, caps, i)).collect();
        for (t, h) in flows.iter().rev() {
            if !t.is_x_polynomial() {
                return Err(Error::Precondition("flow time must be an x-polynomial".into()));
            }
            if h.terms().any(|(m, _)| m.y_degree() < 3 || m.x_degree() > 0 || m.eps > 0) {
                return Err(Error::Precondition(
                    "flow Hamiltonians must be y-polynomials of degree at least 3".into(),
                ));
            }
            let flow = lie_series(h, t, alpha)?;
            psi = psi
                .iter()
                .map(|p| crate::fps::substitute_y(p, &flow))
                .collect::<Result<_>>()?;
        }
        Self::new(
            psi.iter()
                .enumerate()
                .map(|(j, p)| &Series::x_var(dim, caps, j) + p)
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    pub fn caps(&self) -> Caps {
        self.phi[0].caps()
    }

    pub fn phi(&self) -> &[Series] {
        &self.phi
    }

    pub fn jacobian(&self) -> &SeriesMatrix {
        &self.jacobian
    }

    pub fn inverse_jacobian(&self) -> &SeriesMatrix {
        &self.inverse
    }

    /// `X_j`, the y-vector field with `D₀ = d_x + Σ_j dx^j X_j·∂_y`.
    pub fn maurer_cartan_field(&self, j: usize) -> Result<&[Series]> {
        self.fields
            .get(j)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index: j,
                dim: self.dim(),
            })
    }

    /// Whether this is the identity chart.
    pub fn is_flat(&self) -> bool {
        let (dim, caps) = (self.dim(), self.caps());
        self.phi
            .iter()
            .enumerate()
            .all(|(j, p)| *p == &Series::x_var(dim, caps, j) + &Series::y_var(dim, caps, j))
    }
}

/// `exp(t·{·, H})` applied to each coordinate `y^i`.
fn lie_series(h: &Series, t: &Series, alpha: &ConstantBivector) -> Result<Vec<Series>> {
    let (dim, caps) = (h.dim(), h.caps());
    let mut out = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut term = Series::y_var(dim, caps, i);
        let mut acc = term.clone();
        let mut n = 1i64;
        loop {
            term = crate::moyal::poisson_bracket(&term, h, alpha)?;
            if term.is_zero() {
                break;
            }
            term = term.checked_mul(t)?.scale(&Q::new(BigInt::one(), BigInt::from(n)));
            acc += &term;
            n += 1;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Taylor expansion in `y` of `f(φ_x(y))` for an x-polynomial `f`.
pub fn substitute(f: &Series, chart: &ChartJetFamily) -> Result<Series> {
    if !f.is_x_polynomial() {
        return Err(Error::Precondition(
            "substitute expects an x-polynomial without y or ε".into(),
        ));
    }
    substitute_x(f, chart.phi())
}

/// Constant Darboux form `Ω₀`, its bivector `α₀ = −Ω₀⁻¹`, and the ambient
/// form `Ω` on `U` with x-polynomial coefficients.
#[derive(Clone, Debug)]
pub struct SymplecticData {
    omega0: Vec<Vec<Q>>,
    alpha0: ConstantBivector,
    ambient: Vec<Vec<Series>>,
}

impl SymplecticData {
    /// `Ω₀` is the value of the ambient form at `x = 0`; for a normalized
    /// lift `φ_x*Ω|_{y=0} = Ω(x)`, so a Darboux chart needs `Ω(x) = Ω₀`.
    pub fn new(ambient: Vec<Vec<Series>>) -> Result<Self> {
        let d = ambient.len();
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        if d % 2 != 0 {
            return Err(Error::Precondition("symplectic mode requires even d".into()));
        }
        for i in 0..d {
            if ambient[i].len() != d {
                return Err(Error::DimensionMismatch(ambient[i].len(), d));
            }
            for j in 0..d {
                if !ambient[i][j].is_x_polynomial() {
                    return Err(Error::Precondition(
                        "symplectic form must have x-polynomial coefficients".into(),
                    ));
                }
                if ambient[i][j] != -&ambient[j][i] {
                    return Err(Error::Precondition("symplectic form not antisymmetric".into()));
                }
            }
        }
        let one = crate::fps::Monomial::one(d);
        let omega0: Vec<Vec<Q>> = ambient
            .iter()
            .map(|row| row.iter().map(|s| s.coeff(&one)).collect())
            .collect();
        let alpha0 = ConstantBivector::from_symplectic(&omega0)?;
        Ok(SymplecticData {
            omega0,
            alpha0,
            ambient,
        })
    }

    pub fn omega0(&self) -> &[Vec<Q>] {
        &self.omega0
    }

    pub fn alpha0(&self) -> &ConstantBivector {
        &self.alpha0
    }

    pub fn ambient(&self) -> &[Vec<Series>] {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.omega0.len()
    }
}

#[derive(Clone, Debug)]
pub struct DarbouxReport {
    pub ok: bool,
    /// `φ_x*Ω − Ω₀` as a two-form in the `y`-directions (stored with `dx`
    /// index labels), truncated where it is exact.
    pub residual: EForm,
}

/// Pulls `Ω` back along `φ_x` and compares with `Ω₀` identically in `y`.
pub fn darboux_check(chart: &ChartJetFamily, s: &SymplecticData) -> Result<DarbouxReport> {
    let (d, caps) = (chart.dim(), chart.caps());
    let jac = chart.jacobian();
    let pulled: Vec<Vec<Series>> = s
        .ambient()
        .iter()
        .map(|row| row.iter().map(|c| substitute(c, chart)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let mut residual = EForm::zero(d, caps, 2);
    for k in 0..d {
        for m in k + 1..d {
            let mut acc = Series::constant(d, caps, -s.omega0()[k][m].clone());
            for a in 0..d {
                for b in 0..d {
                    if pulled[a][b].is_zero() {
                        continue;
                    }
                    let t = pulled[a][b].checked_mul(jac.get(a, k))?.checked_mul(jac.get(b, m))?;
                    acc += &t;
                }
            }
            let idx: Indices = [k as u8, m as u8].into_iter().collect();
            residual.set(idx, acc.truncate_y(caps.y.saturating_sub(1)));
        }
    }
    Ok(DarbouxReport {
        ok: residual.is_zero(),
        residual,
    })
}

/// `δ = Σ dx^i ∂/∂y^i`.
pub fn delta(s: &EForm) -> EForm {
    let mut out = EForm::zero(s.dim(), s.caps(), s.degree() + 1);
    for i in 0..s.dim() {
        out = out.add(&s.map(|c| c.diff_y(i)).wedge_dx(i));
    }
    out
}

/// `δ* = Σ y^i ι_{∂/∂x^i}`.
pub fn delta_star(s: &EForm) -> EForm {
    let mut out = EForm::zero(s.dim(), s.caps(), s.degree().saturating_sub(1));
    if s.degree() == 0 {
        return out;
    }
    for i in 0..s.dim() {
        out = out.add(&s.interior(i).map(|c| c.mul_y_var(i)));
    }
    out
}

/// `δ⁻¹`: `(1/k) δ*` on each component of total degree `k > 0`; zero on
/// total degree 0. Defined on all forms; on δ-closed forms without a
/// degree-0 part it returns the unique `σ` with `δσ = ρ`, `δ*σ = 0`.
pub fn homotopy(s: &EForm) -> EForm {
    let p = s.degree() as u32;
    let ds = delta_star(s);
    if p == 0 {
        return ds;
    }
    ds.map(|c| {
        c.scale_terms(|m| Q::new(BigInt::one(), BigInt::from(p - 1 + m.y_degree())))
    })
}

/// Checked `δ⁻¹`: the input must be δ-closed with no part of total degree 0.
pub fn delta_inv(s: &EForm) -> Result<EForm> {
    if s.degree() == 0 {
        return if s.is_zero() {
            Ok(s.clone())
        } else {
            Err(Error::Precondition("delta_inv of a nonzero 0-form".into()))
        };
    }
    let closed = delta(s).truncate_weight(s.caps().y.saturating_sub(1) + s.degree() as u32 + 1);
    if !closed.map(|c| c.truncate_y(s.caps().y.saturating_sub(1))).is_zero() {
        return Err(Error::NotDeltaClosed);
    }
    Ok(homotopy(s))
}

/// `Σ_j dx^j ∧ (X_j·∂_y) s`, the vertical part of `D₀`.
fn vertical_part(s: &EForm, chart: &ChartJetFamily, weight_cap: u32) -> Result<EForm> {
    let d = chart.dim();
    let mut out = EForm::zero(s.dim(), s.caps(), s.degree() + 1);
    let dys: Vec<EForm> = (0..d).map(|k| s.map(|c| c.diff_y(k))).collect();
    let cap = weight_cap.saturating_sub(s.degree() as u32 + 1);
    for j in 0..d {
        let field = chart.maurer_cartan_field(j)?;
        let mut acc = EForm::zero(s.dim(), s.caps(), s.degree());
        for (k, xk) in field.iter().enumerate() {
            if xk.is_zero() {
                continue;
            }
            acc = acc.add(&dys[k].try_map(|c| xk.checked_mul_capped(c, u32::MAX, cap))?);
        }
        out = out.add(&acc.wedge_dx(j));
    }
    Ok(out)
}

/// `D₀ s = d_x s + Σ_j dx^j ∧ (X_j·∂_y) s`, a graded derivation.
pub fn d0_apply(s: &EForm, chart: &ChartJetFamily) -> Result<EForm> {
    Ok(s.d_x().add(&vertical_part(s, chart, u32::MAX)?))
}

/// `D₀ s` restricted to total weight `≤ weight_cap`.
pub fn d0_apply_capped(s: &EForm, chart: &ChartJetFamily, weight_cap: u32) -> Result<EForm> {
    Ok(s.d_x()
        .add(&vertical_part(s, chart, weight_cap)?)
        .truncate_weight(weight_cap))
}

/// `D₀′ = D₀ + δ`, the part of `D₀` raising total degree.
pub fn d0_prime(s: &EForm, chart: &ChartJetFamily) -> Result<EForm> {
    Ok(d0_apply(s, chart)?.add(&delta(s)))
}

/// Solves `D₀ σ = β` by `σ = −Σ_n (δ⁻¹D₀′)ⁿ δ⁻¹ β`, pruning every iterate to
/// total weight `≤ weight_cap`. The result satisfies `δ*σ = 0`.
pub fn solve_d0(beta: &EForm, chart: &ChartJetFamily, weight_cap: u32) -> Result<EForm> {
    let mut term = homotopy(beta).truncate_weight(weight_cap);
    let mut acc = EForm::zero(beta.dim(), beta.caps(), beta.degree().saturating_sub(1));
    while !term.is_zero() {
        acc = acc.add(&term);
        let next = d0_apply_capped(&term, chart, weight_cap)?.add(&delta(&term));
        term = homotopy(&next).truncate_weight(weight_cap);
    }
    Ok(acc.neg())
}

/// The one-form `h = Σ dx^j h_j` with `{h_j, ·}_{α₀} = X_j·∂_y` and
/// `h_j(y = 0) = 0`, by radial integration of `θ = ι_{X_j}Ω₀`.
pub fn hamiltonian_lift(chart: &ChartJetFamily, s: &SymplecticData) -> Result<EForm> {
    let (d, caps) = (chart.dim(), chart.caps());
    if s.dim() != d {
        return Err(Error::DimensionMismatch(s.dim(), d));
    }
    let om = s.omega0();
    let mut h = EForm::zero(d, caps, 1);
    for j in 0..d {
        let field = chart.maurer_cartan_field(j)?;
        let theta: Vec<Series> = (0..d)
            .map(|m| {
                let mut acc = Series::zero(d, caps);
                for (k, xk) in field.iter().enumerate() {
                    if !om[m][k].is_zero() {
                        acc += &xk.scale(&om[m][k]);
                    }
                }
                acc
            })
            .collect();
        let exact = caps.y.saturating_sub(2);
        for m in 0..d {
            for n in m + 1..d {
                let curl = &theta[m].diff_y(n) - &theta[n].diff_y(m);
                if !curl.truncate_y(exact).is_zero() {
                    return Err(Error::NonSymplectic { direction: j + 1 });
                }
            }
        }
        let mut radial = Series::zero(d, caps);
        for (i, t) in theta.iter().enumerate() {
            radial += &t.mul_y_var(i);
        }
        let hj = radial.scale_terms(|m| Q::new(BigInt::one(), BigInt::from(m.y_degree())));
        let idx: Indices = [j as u8].into_iter().collect();
        h.set(idx, hj);
    }
    Ok(h)
}

/// Bracket `{a, b}_{α₀}` on every pair of components, with shuffle signs.
pub fn poisson_forms(a: &EForm, b: &EForm, alpha: &ConstantBivector) -> Result<EForm> {
    EForm::combine(a, b, |x, y| crate::moyal::poisson_bracket(x, y, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fps::{q, qr, Monomial};

    fn caps() -> Caps {
        Caps::new(2, 6, 12)
    }

    fn y(i: usize) -> Series {
        Series::y_var(2, caps(), i)
    }

    fn c(v: Q) -> Series {
        Series::constant(2, caps(), v)
    }

    fn mono(v: Q, yy: [u16; 2], xx: [u16; 2]) -> Series {
        Series::monomial(2, caps(), v, 0, &yy, &xx).unwrap()
    }

    fn standard_omega() -> SymplecticData {
        SymplecticData::new(vec![
            vec![c(q(0)), c(q(1))],
            vec![c(q(-1)), c(q(0))],
        ])
        .unwrap()
    }

    fn zero_gamma() -> Vec<Vec<Vec<Series>>> {
        vec![vec![vec![Series::zero(2, caps()); 2]; 2]; 2]
    }

    #[test]
    fn christoffel_examples() {
        let flat = ChartJetFamily::from_christoffel(2, caps(), &zero_gamma(), None).unwrap();
        assert!(flat.is_flat());

        let mut g = zero_gamma();
        g[0][0][0] = c(q(3));
        let ch = ChartJetFamily::from_christoffel(2, caps(), &g, None).unwrap();
        let expect = &(&Series::x_var(2, caps(), 0) + &y(0)) - &mono(qr(3, 2), [2, 0], [0, 0]);
        assert_eq!(ch.phi()[0], expect);
        assert_eq!(ch.phi()[1], &Series::x_var(2, caps(), 1) + &y(1));

        let mut g = zero_gamma();
        g[0][0][1] = Series::x_var(2, caps(), 1);
        g[0][1][0] = Series::x_var(2, caps(), 1);
        let ch = ChartJetFamily::from_christoffel(2, caps(), &g, None).unwrap();
        let expect = &(&Series::x_var(2, caps(), 0) + &y(0)) - &mono(q(1), [1, 1], [0, 1]);
        assert_eq!(ch.phi()[0], expect);

        let mut g = zero_gamma();
        g[0][0][1] = c(q(1));
        assert!(matches!(
            ChartJetFamily::from_christoffel(2, caps(), &g, None),
            Err(Error::AsymmetricChristoffel { .. })
        ));
    }

    #[test]
    fn substitute_squares_a_jet() {
        // (x + y − ½Γy²)² with Γ = 3, expanded by hand:
        // x² + 2xy + (1 − 3x)y² − 3y³ + (9/4)y⁴.
        let mut g = zero_gamma();
        g[0][0][0] = c(q(3));
        let ch = ChartJetFamily::from_christoffel(2, caps(), &g, None).unwrap();
        let f = mono(q(1), [0, 0], [2, 0]);
        let s = substitute(&f, &ch).unwrap();
        let expect = Series::from_terms(
            2,
            caps(),
            [
                (Monomial::new(0, &[0, 0], &[2, 0]), q(1)),
                (Monomial::new(0, &[1, 0], &[1, 0]), q(2)),
                (Monomial::new(0, &[2, 0], &[0, 0]), q(1)),
                (Monomial::new(0, &[2, 0], &[1, 0]), q(-3)),
                (Monomial::new(0, &[3, 0], &[0, 0]), q(-3)),
                (Monomial::new(0, &[4, 0], &[0, 0]), qr(9, 4)),
            ],
        )
        .unwrap();
        assert_eq!(s, expect);
        assert_eq!(
            substitute(&Series::one(2, caps()), &ch).unwrap(),
            Series::one(2, caps())
        );
        let flat = ChartJetFamily::flat(2, caps()).unwrap();
        assert_eq!(
            substitute(&Series::x_var(2, caps(), 0), &flat).unwrap(),
            &Series::x_var(2, caps(), 0) + &y(0)
        );
        assert!(substitute(&y(0), &flat).is_err());
    }

    #[test]
    fn flat_chart_fields() {
        let flat = ChartJetFamily::flat(2, caps()).unwrap();
        for j in 0..2 {
            let f = flat.maurer_cartan_field(j).unwrap();
            for k in 0..2 {
                let v = if j == k { q(-1) } else { q(0) };
                assert_eq!(f[k], c(v));
            }
        }
        assert!(flat.maurer_cartan_field(2).is_err());
        let s = EForm::scalar(y(0));
        assert_eq!(
            d0_apply(&s, &flat).unwrap(),
            EForm::monomial_form(c(q(-1)), &[0])
        );
    }

    #[test]
    fn field_of_quadratic_chart_is_geometric_series() {
        let mut g = zero_gamma();
        g[0][0][0] = c(q(2));
        let ch = ChartJetFamily::from_christoffel(2, caps(), &g, None).unwrap();
        let x11 = &ch.maurer_cartan_field(0).unwrap()[0];
        let mut expect = Series::zero(2, caps());
        for k in 0..=6u16 {
            expect -= &mono(q(2i64.pow(k as u32)), [k, 0], [0, 0]);
        }
        assert_eq!(x11, &expect);
        for j in 0..2 {
            for (k, f) in ch.maurer_cartan_field(j).unwrap().iter().enumerate() {
                let v = if j == k { q(-1) } else { q(0) };
                assert_eq!(f.eval_y0(), c(v));
            }
        }
    }

    #[test]
    fn d0_kills_jets_of_functions() {
        let mut g = zero_gamma();
        g[1][0][0] = c(q(-2));
        g[0][0][1] = Series::x_var(2, caps(), 0);
        g[0][1][0] = Series::x_var(2, caps(), 0);
        let caps = Caps::new(0, 6, 12);
        let g: Vec<Vec<Vec<Series>>> = g
            .iter()
            .map(|a| a.iter().map(|b| b.iter().map(|s| s.with_caps(caps).unwrap()).collect()).collect())
            .collect();
        let ch = ChartJetFamily::from_christoffel(2, caps, &g, None).unwrap();
        let f = Series::x_var(2, caps, 0).checked_mul(&Series::x_var(2, caps, 1)).unwrap();
        let jet = EForm::scalar(substitute(&f, &ch).unwrap());
        let r = d0_apply(&jet, &ch).unwrap();
        assert!(r.truncate_weight(6).is_zero(), "{r}");
    }

    #[test]
    fn homotopy_examples() {
        let s = EForm::monomial_form(y(0), &[1]);
        let lhs = delta(&delta_star(&s)).add(&delta_star(&delta(&s)));
        assert_eq!(lhs, s.scale(&q(2)));
        assert_eq!(delta(&EForm::scalar(y(0))), EForm::monomial_form(c(q(1)), &[0]));
        let dx1 = EForm::monomial_form(c(q(1)), &[0]);
        assert_eq!(delta_star(&dx1), EForm::scalar(y(0)));
        assert_eq!(delta_inv(&dx1).unwrap(), EForm::scalar(y(0)));
        let t = EForm::monomial_form(mono(q(1), [2, 3], [1, 0]), &[1]);
        assert!(delta(&delta(&t)).is_zero());
        assert!(delta_star(&delta_star(&t)).is_zero());
        assert!(matches!(
            delta_inv(&EForm::monomial_form(y(0), &[1])),
            Err(Error::NotDeltaClosed)
        ));
    }

    #[test]
    fn darboux_examples() {
        let s = standard_omega();
        let flat = ChartJetFamily::flat(2, caps()).unwrap();
        assert!(darboux_check(&flat, &s).unwrap().ok);

        // φ² = x² + y² + (y¹)²: lower-triangular unipotent Jacobian.
        let phi = vec![
            &Series::x_var(2, caps(), 0) + &y(0),
            &(&Series::x_var(2, caps(), 1) + &y(1)) + &mono(q(1), [2, 0], [0, 0]),
        ];
        let ch = ChartJetFamily::new(phi).unwrap();
        assert!(darboux_check(&ch, &s).unwrap().ok);

        // φ¹ = x¹ + y¹ + (y¹)²: det J = 1 + 2y¹, residual 2y¹ dy¹∧dy².
        let phi = vec![
            &(&Series::x_var(2, caps(), 0) + &y(0)) + &mono(q(1), [2, 0], [0, 0]),
            &Series::x_var(2, caps(), 1) + &y(1),
        ];
        let ch = ChartJetFamily::new(phi).unwrap();
        let rep = darboux_check(&ch, &s).unwrap();
        assert!(!rep.ok);
        assert_eq!(rep.residual, EForm::monomial_form(mono(q(2), [1, 0], [0, 0]), &[0, 1]));
    }

    #[test]
    fn hamiltonian_lift_flat() {
        let flat = ChartJetFamily::flat(2, caps()).unwrap();
        let h = hamiltonian_lift(&flat, &standard_omega()).unwrap();
        assert_eq!(h.get(&[0]), y(1));
        assert_eq!(h.get(&[1]), -y(0));
        assert!(h.eval_y0().is_zero());
    }

    #[test]
    fn hamiltonian_lift_rejects_non_darboux() {
        let phi = vec![
            &(&Series::x_var(2, caps(), 0) + &y(0)) + &mono(q(1), [1, 1], [1, 0]),
            &Series::x_var(2, caps(), 1) + &y(1),
        ];
        let ch = ChartJetFamily::new(phi).unwrap();
        assert!(matches!(
            hamiltonian_lift(&ch, &standard_omega()),
            Err(Error::NonSymplectic { .. })
        ));
    }

    #[test]
    fn chart_must_be_normalized() {
        let phi = vec![
            &Series::x_var(2, caps(), 0) + &y(1),
            &Series::x_var(2, caps(), 1) + &y(0),
        ];
        assert!(ChartJetFamily::new(phi).is_err());
    }
}
