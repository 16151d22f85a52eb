//! The Fedosov connection `D = d_x + [h, ·]⋆/(2ε)`, its Weyl curvature, the
//! flattening one-form `γ`, the quantization map `ρ` and the global
//! star-product `f ⋆_M g = ρ⁻¹(ρ(f) ⋆ ρ(g))`.
//!
//! Everything is computed modulo the total weight
//! `T = form degree + |y| + 2·eps`: every operator used here is
//! T-non-decreasing, so truncating at `T ≤ W` with
//! `W = min(N_y, 2N_ε + 1)` (see [`working_weight`]) is an exact quotient, and
//! all identities are asserted exactly in that quotient.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num::One;

use crate::error::{Error, Location, Result};
use crate::forms::{EForm, FiberProduct};
use crate::fps::{Caps, Series, Q};
use crate::jet::{
    d0_apply, darboux_check, hamiltonian_lift, solve_d0, substitute, ChartJetFamily,
    SymplecticData,
};
use crate::moyal::{moyal_product, ConstantBivector, Moyal};

/// Largest total weight at which truncated results are exact.
pub fn working_weight(caps: Caps) -> u32 {
    caps.y.min(2 * caps.eps + 1)
}

/// Highest ε-order of a y-free output that is exact at weight `w`.
pub fn output_order(w: u32) -> u32 {
    w / 2
}

/// `F(ξ, η) = (1/4ε²)([h_ξ, h_η]⋆ − 2ε{h_ξ, h_η})`, summed directly over odd
/// orders `n ≥ 3` as `ε^{n−2}/(2·n!) B_n`.
pub fn weyl_curvature(h: &EForm, alpha: &ConstantBivector) -> Result<EForm> {
    let half = Q::new(1.into(), 2.into());
    pair_components(h, |a, b| {
        alpha.bidifferential_sum(a, b, |n| {
            (n % 2 == 1 && n >= 3).then(|| (half.clone(), n - 2))
        })
    })
}

/// The same two-form computed literally: full commutator, subtract the
/// bracket, divide by `4ε²`. Valid only to ε-order `N_ε − 2`.
pub fn weyl_curvature_by_division(h: &EForm, alpha: &ConstantBivector) -> Result<EForm> {
    let moyal = Moyal::new(alpha.clone());
    let quarter = Q::new(1.into(), 4.into());
    let caps = h.caps();
    pair_components(h, |a, b| {
        let comm = moyal.commutator(a, b)?;
        let br = crate::moyal::poisson_bracket(a, b, alpha)?;
        let two_eps = Series::eps(a.dim(), caps).scale(&Q::from_integer(2.into()));
        let num = &comm - &two_eps.checked_mul(&br)?;
        Ok(num.divide_by_eps(2)?.scale(&quarter))
    })
}

fn pair_components(
    h: &EForm,
    f: impl Fn(&Series, &Series) -> Result<Series>,
) -> Result<EForm> {
    if h.degree() != 1 {
        return Err(Error::Precondition("curvature expects a one-form h".into()));
    }
    let d = h.dim();
    let mut out = EForm::zero(d, h.caps(), 2);
    for i in 0..d {
        for j in i + 1..d {
            let v = f(&h.get(&[i]), &h.get(&[j]))?;
            out.set([i as u8, j as u8].into_iter().collect(), v);
        }
    }
    Ok(out)
}

fn violation(stage: &str, residual: &EForm) -> Result<()> {
    match residual.lowest_location() {
        None => Ok(()),
        Some(location) => Err(Error::TheoryViolation {
            stage: stage.into(),
            location,
        }),
    }
}

fn below_order(s: &EForm, j: u32) -> EForm {
    s.truncate_eps(j - 1)
}

fn order_part(s: &EForm, j: u32) -> EForm {
    s.eps_coefficient(j).shift_eps(j)
}

/// Chart, symplectic data, Hamiltonian lift and Weyl curvature: everything
/// determined before the flattening step.
#[derive(Clone, Debug)]
pub struct FedosovConnection {
    chart: ChartJetFamily,
    symplectic: SymplecticData,
    moyal: Moyal,
    h: EForm,
    curvature: EForm,
    weight: u32,
}

impl FedosovConnection {
    /// Validates the chart with `darboux_check`, then builds `h` and `F`.
    pub fn new(chart: ChartJetFamily, symplectic: SymplecticData) -> Result<Self> {
        if chart.dim() != symplectic.dim() {
            return Err(Error::DimensionMismatch(chart.dim(), symplectic.dim()));
        }
        let report = darboux_check(&chart, &symplectic)?;
        if !report.ok {
            return Err(Error::NotDarboux(report.residual.to_string()));
        }
        let weight = working_weight(chart.caps());
        let h = hamiltonian_lift(&chart, &symplectic)?;
        let curvature = weyl_curvature(&h, symplectic.alpha0())?.truncate_weight(weight);
        let moyal = Moyal::new(symplectic.alpha0().clone());
        Ok(FedosovConnection {
            chart,
            symplectic,
            moyal,
            h,
            curvature,
            weight,
        })
    }

    pub fn chart(&self) -> &ChartJetFamily {
        &self.chart
    }

    pub fn symplectic(&self) -> &SymplecticData {
        &self.symplectic
    }

    pub fn moyal(&self) -> &Moyal {
        &self.moyal
    }

    pub fn h(&self) -> &EForm {
        &self.h
    }

    pub fn curvature(&self) -> &EForm {
        &self.curvature
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn caps(&self) -> Caps {
        self.chart.caps()
    }

    /// `D s = d_x s + [h, s]⋆/(2ε)`, graded, truncated at the working weight.
    pub fn apply(&self, s: &EForm) -> Result<EForm> {
        let comm = self.capped(&self.h, s, |n| (n % 2 == 1).then(|| (Q::one(), n - 1)))?;
        Ok(s.d_x().add(&comm).truncate_weight(self.weight))
    }

    /// `D₀ s`, truncated at the working weight.
    pub fn apply_d0(&self, s: &EForm) -> Result<EForm> {
        Ok(d0_apply(s, &self.chart)?.truncate_weight(self.weight))
    }

    /// `a ∧⋆ b`, truncated at the working weight.
    pub fn wedge_star(&self, a: &EForm, b: &EForm) -> Result<EForm> {
        self.capped(a, b, |n| Some((Q::one(), n)))
    }

    /// `[a, b]⋆`, graded, truncated at the working weight.
    pub fn commutator(&self, a: &EForm, b: &EForm) -> Result<EForm> {
        let two = Q::from_integer(2.into());
        self.capped(a, b, |n| (n % 2 == 1).then(|| (two.clone(), n)))
    }

    fn capped(
        &self,
        a: &EForm,
        b: &EForm,
        weight: impl Fn(u32) -> Option<(Q, u32)> + Copy,
    ) -> Result<EForm> {
        let offset = (a.degree() + b.degree()) as u32;
        if offset > self.weight {
            return Ok(EForm::zero(a.dim(), a.caps(), a.degree() + b.degree()));
        }
        let cap = self.weight - offset;
        let alpha = &self.moyal.alpha;
        EForm::combine(a, b, |x, y| alpha.bidifferential_sum_capped(x, y, weight, cap))
    }

    /// `F + Dγ + γ ∧⋆ γ`.
    pub fn effective_curvature(&self, gamma: &EForm) -> Result<EForm> {
        Ok(self
            .curvature
            .add(&self.apply(gamma)?)
            .add(&self.wedge_star(gamma, gamma)?)
            .truncate_weight(self.weight))
    }
}

/// Per-ε-order record of the flattening recursion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderDiagnostic {
    pub eps_order: u32,
    pub beta_terms: usize,
    pub solution_terms: usize,
}

/// A flat connection `D̄ = D + [γ, ·]⋆` with `F + Dγ + γ∧⋆γ = ω`.
#[derive(Clone, Debug)]
pub struct FedosovSolution {
    connection: FedosovConnection,
    gamma: EForm,
    omega: EForm,
    diagnostics: Vec<OrderDiagnostic>,
    cache: Arc<Mutex<BTreeMap<Exponents, Series>>>,
}

type Exponents = smallvec::SmallVec<[u16; 4]>;

/// `ρ(f)`: the `D̄`-flat 0-form with `ρ(f)|_{y=0} = f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedSection {
    pub sigma: Series,
    pub source: Series,
}

fn check_twist(omega: &EForm, dim: usize, caps: Caps) -> Result<()> {
    if omega.degree() != 2 || omega.dim() != dim || omega.caps() != caps {
        return Err(Error::Precondition("twist must be a two-form on the chart".into()));
    }
    for (_, c) in omega.components() {
        if !c.is_y_free() {
            return Err(Error::Precondition("twist must be central (y-free)".into()));
        }
        if c.terms().any(|(m, _)| m.eps == 0) {
            return Err(Error::Precondition("twist must start at order ε".into()));
        }
    }
    if !omega.d_x().is_zero() {
        return Err(Error::Precondition("twist must be closed".into()));
    }
    Ok(())
}

/// Solves `F + Dγ + γ∧⋆γ = ω` order by order in ε, each order by the
/// homotopy series for `D₀γ_j = β_j`.
pub fn solve_gamma(connection: FedosovConnection, omega: &EForm) -> Result<FedosovSolution> {
    let (d, caps, w) = (connection.chart.dim(), connection.caps(), connection.weight);
    check_twist(omega, d, caps)?;
    let omega = omega.truncate_weight(w);
    let mut gamma = EForm::zero(d, caps, 1);
    let mut diagnostics = Vec::new();
    let mut j = 1;
    while 2 * j + 2 <= w {
        let r = connection.effective_curvature(&gamma)?.sub(&omega);
        violation("flattening", &below_order(&r, j))?;
        let beta = order_part(&r, j).neg();
        violation("bianchi", &connection.apply_d0(&beta)?)?;
        let gj = solve_d0(&beta, &connection.chart, w)?;
        diagnostics.push(OrderDiagnostic {
            eps_order: j,
            beta_terms: beta.components().map(|(_, s)| s.len()).sum(),
            solution_terms: gj.components().map(|(_, s)| s.len()).sum(),
        });
        gamma = gamma.add(&gj);
        j += 1;
    }
    let sol = FedosovSolution {
        connection,
        gamma,
        omega,
        diagnostics,
        cache: Default::default(),
    };
    violation("flattening", &sol.flatness_residual()?)?;
    Ok(sol)
}

impl FedosovSolution {
    /// Replaces `γ` without re-solving; used to exercise failure reporting.
    pub fn with_gamma(&self, gamma: EForm) -> FedosovSolution {
        FedosovSolution {
            gamma: gamma.truncate_weight(self.connection.weight),
            cache: Default::default(),
            ..self.clone()
        }
    }

    pub fn connection(&self) -> &FedosovConnection {
        &self.connection
    }

    pub fn gamma(&self) -> &EForm {
        &self.gamma
    }

    pub fn omega(&self) -> &EForm {
        &self.omega
    }

    pub fn diagnostics(&self) -> &[OrderDiagnostic] {
        &self.diagnostics
    }

    pub fn weight(&self) -> u32 {
        self.connection.weight
    }

    pub fn caps(&self) -> Caps {
        self.connection.caps()
    }

    pub fn dim(&self) -> usize {
        self.connection.chart.dim()
    }

    /// `F + Dγ + γ∧⋆γ`; equals `ω` on a solution.
    pub fn effective_curvature(&self) -> Result<EForm> {
        self.connection.effective_curvature(&self.gamma)
    }

    /// `F + Dγ + γ∧⋆γ − ω`.
    pub fn flatness_residual(&self) -> Result<EForm> {
        Ok(self.effective_curvature()?.sub(&self.omega))
    }

    /// `D̄ s = D s + [γ, s]⋆`.
    pub fn dbar_apply(&self, s: &EForm) -> Result<EForm> {
        Ok(self
            .connection
            .apply(s)?
            .add(&self.connection.commutator(&self.gamma, s)?))
    }

    /// `ρ(f)` for a y-free series `f`. `ρ` is ε-linear, so it is assembled
    /// from cached `ρ(x^a)`.
    pub fn quantize(&self, f: &Series) -> Result<QuantizedSection> {
        if !f.is_y_free() {
            return Err(Error::Precondition("quantize expects a y-free series".into()));
        }
        let w = self.weight();
        let (dim, caps) = (self.dim(), self.caps());
        let mut sigma = Series::zero(dim, caps);
        for (m, c) in f.terms() {
            if 2 * m.eps > w {
                continue;
            }
            let cached = self.cache.lock().expect("quantize cache").get(&m.x).cloned();
            let base = match cached {
                Some(s) => s,
                None => {
                    let xm = Series::monomial(dim, caps, Q::one(), 0, &vec![0; dim], &m.x)?;
                    let s = self.quantize_x_polynomial(&xm)?;
                    self.cache
                        .lock()
                        .expect("quantize cache")
                        .insert(m.x.clone(), s.clone());
                    s
                }
            };
            sigma += &base.scale(c).shift_eps(m.eps);
        }
        Ok(QuantizedSection {
            sigma: sigma.truncate_weight(w, 0),
            source: f.clone(),
        })
    }

    fn quantize_x_polynomial(&self, f: &Series) -> Result<Series> {
        let w = self.weight();
        let chart = &self.connection.chart;
        let mut sigma = EForm::scalar(substitute(f, chart)?).truncate_weight(w);
        let mut j = 1;
        while 2 * j < w {
            let r = self.dbar_apply(&sigma)?;
            violation("quantize", &below_order(&r, j))?;
            let beta = order_part(&r, j).neg();
            violation("quantize", &self.connection.apply_d0(&beta)?)?;
            sigma = sigma.add(&solve_d0(&beta, chart, w)?);
            j += 1;
        }
        violation("quantize", &self.dbar_apply(&sigma)?)?;
        Ok(sigma.as_scalar())
    }

    /// `ρ(f) ⋆ ρ(g)`, the fiberwise product of flat sections.
    pub fn section_product(&self, a: &Series, b: &Series) -> Result<Series> {
        Ok(moyal_product(a, b, &self.connection.moyal.alpha)?.truncate_weight(self.weight(), 0))
    }

    /// `f ⋆_M g = (ρ(f) ⋆ ρ(g))|_{y=0}`, exact to ε-order `⌊W/2⌋`. Asserts
    /// that the product of flat sections is again `ρ` of its restriction.
    pub fn global_star(&self, f: &Series, g: &Series) -> Result<Series> {
        let sf = self.quantize(f)?;
        let sg = self.quantize(g)?;
        let prod = self.section_product(&sf.sigma, &sg.sigma)?;
        let result = prod.eval_y0().truncate_eps(output_order(self.weight()));
        let back = self.quantize(&result)?;
        let diff = &back.sigma - &prod;
        if let Some(location) = diff.lowest_location(0) {
            return Err(Error::TheoryViolation {
                stage: "global_star".into(),
                location,
            });
        }
        Ok(result)
    }
}

/// The central twist `Σ_k ε^k c_k(x) dx^i ∧ dx^j` from a list of
/// `(ε-power, antisymmetric matrix)` pairs.
pub fn twist_form(dim: usize, caps: Caps, parts: &[(u32, Vec<Vec<Series>>)]) -> Result<EForm> {
    let mut omega = EForm::zero(dim, caps, 2);
    for (k, m) in parts {
        if m.len() != dim || m.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch(m.len(), dim));
        }
        for i in 0..dim {
            for j in 0..dim {
                if m[i][j] != -&m[j][i] {
                    return Err(Error::Precondition("twist not antisymmetric".into()));
                }
            }
            for j in i + 1..dim {
                let v = m[i][j].shift_eps(*k);
                omega.add_to([i as u8, j as u8].into_iter().collect(), &v);
            }
        }
    }
    Ok(omega)
}

/// Location of the lowest nonzero coefficient, or `None` when zero.
pub fn first_failure(s: &EForm) -> Option<Location> {
    s.lowest_location()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fps::{q, qr};

    fn std_omega(caps: Caps) -> SymplecticData {
        let c = |v| Series::constant(2, caps, q(v));
        SymplecticData::new(vec![vec![c(0), c(1)], vec![c(-1), c(0)]]).unwrap()
    }

    fn shear(caps: Caps, c: i64) -> ChartJetFamily {
        let phi = vec![
            &Series::x_var(2, caps, 0) + &Series::y_var(2, caps, 0),
            &(&Series::x_var(2, caps, 1) + &Series::y_var(2, caps, 1))
                + &Series::monomial(2, caps, q(c), 0, &[2, 0], &[0, 0]).unwrap(),
        ];
        ChartJetFamily::new(phi).unwrap()
    }

    fn flat_connection(caps: Caps) -> FedosovConnection {
        FedosovConnection::new(ChartJetFamily::flat(2, caps).unwrap(), std_omega(caps)).unwrap()
    }

    fn sample_sections(caps: Caps) -> Vec<EForm> {
        let m = |c: Q, e: u32, y: [u16; 2], x: [u16; 2]| {
            Series::monomial(2, caps, c, e, &y, &x).unwrap()
        };
        vec![
            EForm::scalar(&m(q(1), 0, [2, 1], [1, 0]) + &m(qr(1, 3), 1, [0, 3], [0, 0])),
            EForm::monomial_form(m(q(2), 0, [1, 2], [0, 1]), &[0]),
            EForm::monomial_form(&m(q(1), 0, [3, 0], [0, 0]) - &m(q(5), 0, [0, 1], [1, 1]), &[1]),
        ]
    }

    #[test]
    fn working_weight_bound() {
        assert_eq!(working_weight(Caps::new(3, 10, 6)), 7);
        assert_eq!(working_weight(Caps::new(4, 5, 6)), 5);
        assert_eq!(output_order(7), 3);
    }

    #[test]
    fn flat_chart_reduces_to_d0() {
        let caps = Caps::new(3, 8, 6);
        let conn = flat_connection(caps);
        assert!(conn.curvature().is_zero());
        for s in sample_sections(caps) {
            assert_eq!(conn.apply(&s).unwrap(), conn.apply_d0(&s).unwrap());
        }
        let one = EForm::scalar(Series::one(2, caps));
        assert!(conn.apply(&one).unwrap().is_zero());
    }

    #[test]
    fn flat_chart_gamma_vanishes() {
        let caps = Caps::new(3, 8, 6);
        let sol = solve_gamma(flat_connection(caps), &EForm::zero(2, caps, 2)).unwrap();
        assert!(sol.gamma().is_zero());
        let f = Series::x_var(2, caps, 0).checked_mul(&Series::x_var(2, caps, 1)).unwrap();
        let sf = sol.quantize(&f).unwrap();
        assert_eq!(sf.sigma, substitute(&f, sol.connection().chart()).unwrap());
        let st = sol
            .global_star(&Series::x_var(2, caps, 0), &Series::x_var(2, caps, 1))
            .unwrap();
        assert_eq!(st, &f + &Series::eps(2, caps));
        assert_eq!(sol.quantize(&Series::one(2, caps)).unwrap().sigma, Series::one(2, caps));
    }

    #[test]
    fn shear_curvature_identities() {
        let caps = Caps::new(3, 8, 6);
        let conn = FedosovConnection::new(shear(caps, 1), std_omega(caps)).unwrap();
        let f = conn.curvature();
        assert!(f.eps_coefficient(0).is_zero());
        let oracle = weyl_curvature_by_division(conn.h(), conn.symplectic().alpha0())
            .unwrap()
            .truncate_eps(caps.eps - 2)
            .truncate_weight(conn.weight());
        assert_eq!(f.truncate_eps(caps.eps - 2), oracle);
        assert!(conn.apply(f).unwrap().is_zero());
        for s in sample_sections(caps) {
            let dd = conn.apply(&conn.apply(&s).unwrap()).unwrap();
            assert_eq!(dd, conn.commutator(f, &s).unwrap());
        }
    }

    #[test]
    fn shear_flattening() {
        let caps = Caps::new(3, 8, 6);
        let conn = FedosovConnection::new(shear(caps, 1), std_omega(caps)).unwrap();
        let sol = solve_gamma(conn, &EForm::zero(2, caps, 2)).unwrap();
        assert!(crate::jet::delta_star(sol.gamma()).is_zero());
        assert!(sol.flatness_residual().unwrap().is_zero());
        for s in sample_sections(caps) {
            let dd = sol.dbar_apply(&sol.dbar_apply(&s).unwrap()).unwrap();
            assert!(dd.is_zero(), "{dd}");
        }
        let x1 = Series::x_var(2, caps, 0);
        let s = sol.quantize(&x1).unwrap();
        assert_eq!(s.sigma.eval_y0(), x1);
    }

    #[test]
    fn flat_twist_gamma() {
        let caps = Caps::new(3, 8, 6);
        let c = qr(3, 2);
        let omega =
            EForm::monomial_form(Series::monomial(2, caps, c.clone(), 1, &[0, 0], &[0, 0]).unwrap(), &[0, 1]);
        let sol = solve_gamma(flat_connection(caps), &omega).unwrap();
        let g1 = sol.gamma().eps_coefficient(1);
        let half_c = &c / q(2);
        let y = |i| Series::y_var(2, caps, i);
        let expect = EForm::monomial_form(y(0).scale(&-&half_c), &[1])
            .add(&EForm::monomial_form(y(1).scale(&half_c), &[0]));
        assert_eq!(g1, expect);
        assert_eq!(sol.effective_curvature().unwrap(), omega);
    }

    #[test]
    fn twist_must_be_central_and_start_at_eps() {
        let caps = Caps::new(2, 6, 4);
        let bad = EForm::monomial_form(Series::one(2, caps), &[0, 1]);
        assert!(solve_gamma(flat_connection(caps), &bad).is_err());
        let bad = EForm::monomial_form(
            Series::monomial(2, caps, q(1), 1, &[1, 0], &[0, 0]).unwrap(),
            &[0, 1],
        );
        assert!(solve_gamma(flat_connection(caps), &bad).is_err());
    }

    #[test]
    fn corrupted_gamma_fails_at_first_order() {
        let caps = Caps::new(3, 8, 6);
        let sol = solve_gamma(flat_connection(caps), &EForm::zero(2, caps, 2)).unwrap();
        let bad = &Series::monomial(2, caps, q(1), 1, &[1, 0], &[0, 0]).unwrap()
            + &Series::monomial(2, caps, q(1), 1, &[2, 0], &[0, 0]).unwrap();
        let broken = sol.with_gamma(EForm::monomial_form(bad, &[1]));
        let loc = first_failure(&broken.flatness_residual().unwrap()).unwrap();
        assert_eq!(loc, Location { eps_order: 1, total_degree: 2 });
    }
}
