//! Verification suites run by `dq check`. Each suite is exact: it passes only
//! when its residual is identically zero at working precision, and a failure
//! names the lowest offending (ε-order, total degree).

use dq_core::fedosov::{output_order, FedosovSolution};
use dq_core::forms::EForm;
use dq_core::fps::{q, Caps, Monomial, Series, Q};
use dq_core::jet::{d0_apply, delta, delta_star, substitute};
use dq_core::moyal::{invert_matrix, kontsevich_first_order, FormalBivector};
use dq_core::Location;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::pipeline::{run_pipeline, star, Built, Outcome, PipelineRun};
use crate::problem::{validate, with_caps, ProblemKind, ProblemSpec};

pub const SUITES: &[&str] = &[
    "homotopy",
    "d0_squared",
    "leibniz",
    "curvature_identity",
    "bianchi",
    "flatness",
    "quantize_kernel",
    "unit",
    "associativity",
    "first_order_bracket",
    "cap_stability",
];

pub const FIRST_ORDER_SUITES: &[&str] = &["jacobi", "first_order_associativity"];

/// Number of random inputs per suite.
#[derive(Clone, Copy, Debug)]
pub struct Sizes {
    pub sections: usize,
    pub triples: usize,
}

impl Default for Sizes {
    fn default() -> Self {
        Sizes {
            sections: 6,
            triples: 4,
        }
    }
}

pub fn run_checks(spec: &ProblemSpec, run: &PipelineRun, sizes: Sizes) -> Vec<Outcome> {
    match &run.built {
        None => {
            let why = run
                .first_failure()
                .map(|f| f.headline())
                .unwrap_or_else(|| "pipeline did not complete".into());
            SUITES
                .iter()
                .map(|s| Outcome::skip(s, format!("pipeline failed: {why}")))
                .collect()
        }
        Some(Built::FirstOrder(alpha)) => FIRST_ORDER_SUITES
            .par_iter()
            .enumerate()
            .map(|(i, name)| first_order_suite(name, spec, alpha, rng(spec.seed, i), sizes))
            .collect(),
        Some(Built::Fedosov(sol)) => SUITES
            .par_iter()
            .enumerate()
            .map(|(i, name)| fedosov_suite(name, spec, sol, rng(spec.seed, i), sizes))
            .collect(),
    }
}

fn rng(seed: u64, suite: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(suite as u64))
}

fn coeff(r: &mut ChaCha8Rng) -> Q {
    let n = r.gen_range(1i64..=4) * if r.gen_bool(0.5) { 1 } else { -1 };
    Q::new(n.into(), r.gen_range(1i64..=3).into())
}

fn random_exponents(r: &mut ChaCha8Rng, dim: usize, deg: u32) -> Vec<u16> {
    let mut e = vec![0u16; dim];
    for _ in 0..r.gen_range(0..=deg) {
        e[r.gen_range(0..dim)] += 1;
    }
    e
}

fn random_series(r: &mut ChaCha8Rng, dim: usize, caps: Caps, terms: usize, y: u32, x: u32, eps: u32) -> Series {
    let items: Vec<(Monomial, Q)> = (0..terms)
        .map(|_| {
            let e = r.gen_range(0..=eps.min(caps.eps));
            let ye = random_exponents(r, dim, y.min(caps.y));
            let xe = random_exponents(r, dim, x.min(caps.x));
            (Monomial::new(e, &ye, &xe), coeff(r))
        })
        .collect();
    Series::from_terms(dim, caps, items).expect("random series within caps")
}

fn random_form(r: &mut ChaCha8Rng, dim: usize, caps: Caps, degree: usize) -> EForm {
    let mut out = EForm::zero(dim, caps, degree);
    for _ in 0..2 {
        let mut idx: Vec<usize> = (0..dim).collect();
        for i in (1..idx.len()).rev() {
            idx.swap(i, r.gen_range(0..=i));
        }
        idx.truncate(degree);
        let s = random_series(r, dim, caps, 3, 3, 1, 1);
        out = out.add(&EForm::monomial_form(s, &idx));
    }
    out
}

fn random_x_poly(r: &mut ChaCha8Rng, dim: usize, caps: Caps, terms: usize, deg: u32) -> Series {
    random_series(r, dim, caps, terms, 0, deg, 0)
}

fn residual(name: &str, r: &EForm, what: &str) -> Option<Outcome> {
    r.lowest_location()
        .map(|l| Outcome::fail(name, Some(l), format!("{what}: lowest nonzero term at {l}")))
}

fn series_residual(name: &str, r: &Series, what: &str) -> Option<Outcome> {
    r.lowest_location(0)
        .map(|l| Outcome::fail(name, Some(l), format!("{what}: lowest nonzero term at {l}")))
}

macro_rules! check {
    ($name:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return Outcome::from_error($name, &e),
        }
    };
}

fn fedosov_suite(name: &str, spec: &ProblemSpec, sol: &FedosovSolution, mut r: ChaCha8Rng, sizes: Sizes) -> Outcome {
    let (d, caps, w) = (spec.dim, spec.caps, sol.weight());
    let conn = sol.connection();
    let chart = conn.chart();
    let sections: Vec<EForm> = (0..sizes.sections)
        .map(|i| random_form(&mut r, d, caps, i % d.min(2)))
        .collect();
    match name {
        "homotopy" => {
            let max_y = caps.y.min(6) as u16;
            let mut count = 0;
            for p in 0..=d {
                for idx in subsets(d, p) {
                    for mono in y_monomials(d, max_y) {
                        let s = check!(name, Series::monomial(d, caps, q(1), 0, &mono, &vec![0; d]));
                        let f = EForm::monomial_form(s, &idx);
                        let k = p as i64 + mono.iter().map(|&e| e as i64).sum::<i64>();
                        let mut lhs = EForm::zero(d, caps, p);
                        if p > 0 {
                            lhs = lhs.add(&delta(&delta_star(&f)));
                        }
                        if p < d {
                            lhs = lhs.add(&delta_star(&delta(&f)));
                        }
                        if let Some(o) = residual(name, &lhs.sub(&f.scale(&q(k))), "(δδ* + δ*δ − k)") {
                            return o;
                        }
                        if p + 2 <= d && !delta(&delta(&f)).is_zero() {
                            return Outcome::fail(name, None, "δ² ≠ 0");
                        }
                        if p >= 2 && !delta_star(&delta_star(&f)).is_zero() {
                            return Outcome::fail(name, None, "δ*² ≠ 0");
                        }
                        count += 1;
                    }
                }
            }
            Outcome::pass(name, format!("{count} monomial forms"))
        }
        "d0_squared" => {
            for s in &sections {
                let dd = check!(name, d0_apply(&check!(name, d0_apply(s, chart)), chart));
                if let Some(o) = residual(name, &dd.truncate_weight(w), "D₀²s") {
                    return o;
                }
            }
            let mut fs: Vec<Series> = spec.functions.iter().map(|(_, f)| f.clone()).collect();
            fs.extend((0..sizes.sections).map(|_| random_x_poly(&mut r, d, caps, 3, 3)));
            for f in &fs {
                let jet = EForm::scalar(check!(name, substitute(f, chart)));
                if let Some(o) = residual(name, &check!(name, conn.apply_d0(&jet)), "D₀(f∘φ)") {
                    return o;
                }
            }
            Outcome::pass(name, format!("{} sections, {} functions", sections.len(), fs.len()))
        }
        "leibniz" => {
            for pair in sections.chunks(2) {
                let [a, b] = pair else { continue };
                let sign = if a.degree() % 2 == 0 { q(1) } else { q(-1) };
                let lhs = check!(name, conn.apply(&check!(name, conn.wedge_star(a, b))));
                let rhs = check!(name, conn.wedge_star(&check!(name, conn.apply(a)), b)).add(
                    &check!(name, conn.wedge_star(a, &check!(name, conn.apply(b)))).scale(&sign),
                );
                if let Some(o) = residual(name, &lhs.sub(&rhs), "D(a∧⋆b) − Da∧⋆b ∓ a∧⋆Db") {
                    return o;
                }
                let lhs = check!(name, sol.dbar_apply(&check!(name, conn.wedge_star(a, b))));
                let rhs = check!(name, conn.wedge_star(&check!(name, sol.dbar_apply(a)), b)).add(
                    &check!(name, conn.wedge_star(a, &check!(name, sol.dbar_apply(b)))).scale(&sign),
                );
                if let Some(o) = residual(name, &lhs.sub(&rhs), "D̄(a∧⋆b) − D̄a∧⋆b ∓ a∧⋆D̄b") {
                    return o;
                }
            }
            Outcome::pass(name, format!("{} pairs", sections.len() / 2))
        }
        "curvature_identity" => {
            let f = conn.curvature();
            for s in &sections {
                let dd = check!(name, conn.apply(&check!(name, conn.apply(s))));
                let fs = check!(name, conn.commutator(f, s));
                if let Some(o) = residual(name, &dd.sub(&fs), "D²s − [F, s]") {
                    return o;
                }
            }
            Outcome::pass(name, format!("{} sections, F has {} terms", sections.len(), term_count(f)))
        }
        "bianchi" => {
            let f = conn.curvature();
            if let Some(o) = residual(name, &f.eps_coefficient(0), "ε⁰ part of F") {
                return o;
            }
            if let Some(o) = residual(name, &check!(name, conn.apply(f)), "DF") {
                return o;
            }
            Outcome::pass(name, "DF = 0, F = O(ε)")
        }
        "flatness" => {
            if let Some(o) = residual(name, &check!(name, sol.flatness_residual()), "F + Dγ + γ∧⋆γ − ω") {
                return o;
            }
            for s in &sections {
                let dd = check!(name, sol.dbar_apply(&check!(name, sol.dbar_apply(s))));
                if let Some(o) = residual(name, &dd, "D̄²s") {
                    return o;
                }
            }
            if !delta_star(sol.gamma()).is_zero() {
                return Outcome::fail(name, None, "δ*γ ≠ 0");
            }
            Outcome::pass(name, format!("effective curvature = ω, D̄² = 0 on {} sections", sections.len()))
        }
        "quantize_kernel" => {
            let mut fs: Vec<Series> = spec.functions.iter().map(|(_, f)| f.clone()).collect();
            fs.extend((0..sizes.triples).map(|_| random_x_poly(&mut r, d, caps, 3, 2)));
            for f in &fs {
                let s = check!(name, sol.quantize(f));
                if s.sigma.eval_y0() != *f {
                    return Outcome::fail(name, None, "ρ(f)|_{y=0} ≠ f");
                }
                let ds = check!(name, sol.dbar_apply(&EForm::scalar(s.sigma)));
                if let Some(o) = residual(name, &ds, "D̄ρ(f)") {
                    return o;
                }
            }
            let one = Series::one(d, caps);
            if check!(name, sol.quantize(&one)).sigma != one {
                return Outcome::fail(name, None, "ρ(1) ≠ 1");
            }
            Outcome::pass(name, format!("{} functions", fs.len()))
        }
        "unit" => {
            let one = Series::one(d, caps);
            let fs = function_pool(spec, &mut r, sizes.triples);
            for f in &fs {
                for (l, rr) in [(f, &one), (&one, f)] {
                    let p = check!(name, sol.global_star(l, rr));
                    if let Some(o) = series_residual(name, &(&p - f), "f⋆1 − f") {
                        return o;
                    }
                }
            }
            Outcome::pass(name, format!("{} functions", fs.len()))
        }
        "associativity" => {
            let fs = function_pool(spec, &mut r, 3 * sizes.triples);
            let n = output_order(w);
            let mut count = 0;
            for t in fs.chunks(3) {
                let [a, b, c] = t else { continue };
                let l = check!(name, sol.global_star(&check!(name, sol.global_star(a, b)), c));
                let rr = check!(name, sol.global_star(a, &check!(name, sol.global_star(b, c))));
                if let Some(o) = series_residual(name, &(&l - &rr).truncate_eps(n), "(f⋆g)⋆h − f⋆(g⋆h)") {
                    return o;
                }
                count += 1;
            }
            Outcome::pass(name, format!("{count} triples, exact to eps^{n}"))
        }
        "first_order_bracket" => {
            let ProblemKind::Symplectic { omega, .. } = &spec.kind else {
                return Outcome::skip(name, "not a symplectic problem");
            };
            let consts: Vec<Vec<Q>> = omega
                .iter()
                .map(|row| row.iter().map(|s| s.coeff(&Monomial::one(d))).collect())
                .collect();
            let Some(inv) = invert_matrix(&consts) else {
                return Outcome::fail(name, None, "Ω is degenerate");
            };
            let fs = function_pool(spec, &mut r, 2 * sizes.triples);
            for pair in fs.chunks(2) {
                let [f, g] = pair else { continue };
                let fg = check!(name, sol.global_star(f, g));
                let gf = check!(name, sol.global_star(g, f));
                if let Some(o) = series_residual(name, &(&fg.eps_coefficient(0) - &check!(name, f.checked_mul(g))), "ε⁰ part of f⋆g − fg") {
                    return o;
                }
                let mut bracket = Series::zero(d, caps);
                for i in 0..d {
                    for j in 0..d {
                        let a = -&inv[i][j];
                        if a == Q::from_integer(0.into()) {
                            continue;
                        }
                        bracket += &check!(name, f.diff_x(i).checked_mul(&g.diff_x(j))).scale(&a);
                    }
                }
                let anti = (&fg - &gf).eps_coefficient(1);
                if let Some(o) = series_residual(name, &(&anti - &bracket.scale(&q(2))), "ε¹ part of f⋆g − g⋆f − 2{f,g}") {
                    return o;
                }
            }
            Outcome::pass(name, format!("{} pairs against −Ω⁻¹", fs.len() / 2))
        }
        "cap_stability" => cap_stability(spec, sol),
        other => Outcome::skip(other, "unknown suite"),
    }
}

fn term_count(f: &EForm) -> usize {
    f.components().map(|(_, s)| s.len()).sum()
}

/// Problem functions first, then random polynomials of degree ≤ 2, `n` in all.
fn function_pool(spec: &ProblemSpec, r: &mut ChaCha8Rng, n: usize) -> Vec<Series> {
    let mut out: Vec<Series> = spec.functions.iter().map(|(_, f)| f.clone()).take(n).collect();
    while out.len() < n {
        out.push(random_x_poly(r, spec.dim, spec.caps, 3, 2));
    }
    out
}

/// Star products of every ordered pair of problem functions at the given
/// caps, rendered to text.
pub fn reported_products(spec: &ProblemSpec, built: &Built) -> dq_core::Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (a, f) in &spec.functions {
        for (b, g) in &spec.functions {
            out.push((format!("{a} * {b}"), star(spec, built, f, g)?.to_string()));
        }
    }
    Ok(out)
}

pub fn cap_stability(spec: &ProblemSpec, sol: &FedosovSolution) -> Outcome {
    let name = "cap_stability";
    let base = check!(name, reported_products(spec, &Built::Fedosov(Box::new(sol.clone()))));
    let bigger = with_caps(
        spec.source.clone(),
        Some(spec.caps.eps + 1),
        Some(spec.caps.y + 2),
        None,
    );
    let big_spec = match validate(bigger) {
        Ok(s) => s,
        Err(e) => return Outcome::fail(name, None, e.to_string()),
    };
    let run = run_pipeline(&big_spec, false);
    let Some(built) = run.built.as_ref().filter(|_| run.ok()) else {
        let why = run.first_failure().map(|f| f.headline()).unwrap_or_default();
        return Outcome::fail(name, None, format!("larger caps: {why}"));
    };
    let big = check!(name, reported_products(spec, built));
    for ((k, a), (_, b)) in base.iter().zip(&big) {
        if a != b {
            return Outcome::fail(name, None, format!("{k} changed: {a} vs {b}"));
        }
    }
    Outcome::pass(
        name,
        format!(
            "{} products identical at caps (N_ε, N_y) = ({}, {})",
            base.len(),
            spec.caps.eps + 1,
            spec.caps.y + 2
        ),
    )
}

fn first_order_suite(name: &str, spec: &ProblemSpec, alpha: &FormalBivector, mut r: ChaCha8Rng, sizes: Sizes) -> Outcome {
    match name {
        "jacobi" => match alpha.jacobi_residual() {
            Ok(res) if res.iter().all(Series::is_zero) => Outcome::pass(name, "Jacobiator vanishes"),
            Ok(res) => {
                let l = res.iter().filter_map(|s| s.lowest_location(0)).min();
                Outcome::fail(name, l, "Jacobiator nonzero")
            }
            Err(e) => Outcome::from_error(name, &e),
        },
        "first_order_associativity" => {
            let fs = function_pool(spec, &mut r, 3 * sizes.triples);
            let st = |a: &Series, b: &Series| kontsevich_first_order(a, b, alpha);
            for t in fs.chunks(3) {
                let [a, b, c] = t else { continue };
                let (a, b, c) = (check!(name, a.x_to_y()), check!(name, b.x_to_y()), check!(name, c.x_to_y()));
                let l = check!(name, st(&check!(name, st(&a, &b)), &c));
                let rr = check!(name, st(&a, &check!(name, st(&b, &c))));
                let assoc = (&l - &rr).truncate_eps(1);
                if let Some(loc) = assoc.lowest_location(0) {
                    return Outcome::fail(name, Some(loc), "associator has ε⁰ or ε¹ terms");
                }
            }
            Outcome::pass(name, format!("{} triples, associator O(ε²)", fs.len() / 3))
        }
        other => Outcome::skip(other, "unknown suite"),
    }
}

fn subsets(d: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..p).collect();
    loop {
        out.push(idx.clone());
        let mut k = p;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] < d - p + k {
                idx[k] += 1;
                for t in k + 1..p {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

fn y_monomials(d: usize, max: u16) -> Vec<Vec<u16>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u16>| {
                (0..=max).map(move |e| {
                    let mut w = v.clone();
                    w.push(e);
                    w
                })
            })
            .filter(|v| v.iter().sum::<u16>() <= max)
            .collect();
    }
    out
}

/// Lowest location across a set of failing outcomes.
pub fn first_failure(outcomes: &[Outcome]) -> Option<(&Outcome, Option<Location>)> {
    outcomes
        .iter()
        .find(|o| o.status == crate::pipeline::Status::Fail)
        .map(|o| (o, o.location))
}
