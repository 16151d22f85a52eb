#![allow(dead_code)]

use dq_core::forms::EForm;
use dq_core::fps::{Caps, Monomial, Series, Q};
use dq_core::jet::ChartJetFamily;
use num::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn coeff(r: &mut ChaCha8Rng) -> Q {
    let mut n = r.gen_range(-4i64..=4);
    if n == 0 {
        n = 1;
    }
    Q::new(BigInt::from(n), BigInt::from(r.gen_range(1i64..=3)))
}

fn exponents(r: &mut ChaCha8Rng, dim: usize, max_deg: u32) -> Vec<u16> {
    let deg = r.gen_range(0..=max_deg);
    let mut e = vec![0u16; dim];
    for _ in 0..deg {
        e[r.gen_range(0..dim)] += 1;
    }
    e
}

/// Random series with terms of y-degree ≤ `y`, x-degree ≤ `x`, ε-power ≤ `eps`.
pub fn series(r: &mut ChaCha8Rng, dim: usize, caps: Caps, terms: usize, y: u32, x: u32, eps: u32) -> Series {
    let items: Vec<(Monomial, Q)> = (0..terms)
        .map(|_| {
            let e = r.gen_range(0..=eps);
            let ye = exponents(r, dim, y);
            let xe = exponents(r, dim, x);
            (Monomial::new(e, &ye, &xe), coeff(r))
        })
        .collect();
    Series::from_terms(dim, caps, items).unwrap()
}

pub fn x_poly(r: &mut ChaCha8Rng, dim: usize, caps: Caps, terms: usize, deg: u32) -> Series {
    series(r, dim, caps, terms, 0, deg, 0)
}

pub fn y_poly(r: &mut ChaCha8Rng, dim: usize, caps: Caps, terms: usize, deg: u32) -> Series {
    series(r, dim, caps, terms, deg, 0, 0)
}

/// Random form of the given degree with every component drawn by `series`.
pub fn form(r: &mut ChaCha8Rng, dim: usize, caps: Caps, degree: usize, terms: usize, y: u32, x: u32, eps: u32) -> EForm {
    let mut out = EForm::zero(dim, caps, degree);
    let mut idx: Vec<usize> = (0..degree).collect();
    loop {
        let s = series(r, dim, caps, terms, y, x, eps);
        out = out.add(&EForm::monomial_form(s, &idx));
        let mut k = degree;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] < dim - degree + k {
                idx[k] += 1;
                for t in k + 1..degree {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Chart from random symmetric Γ (x-degree ≤ `gdeg`) and random cubic jets.
pub fn random_chart(r: &mut ChaCha8Rng, dim: usize, caps: Caps, gdeg: u32) -> ChartJetFamily {
    let mut gamma = vec![vec![vec![Series::zero(dim, caps); dim]; dim]; dim];
    for j in 0..dim {
        for k in 0..dim {
            for l in k..dim {
                let g = x_poly(r, dim, caps, 2, gdeg);
                gamma[j][k][l] = g.clone();
                gamma[j][l][k] = g;
            }
        }
    }
    let higher: Vec<Series> = (0..dim)
        .map(|_| series(r, dim, caps, 2, 0, gdeg, 0).checked_mul(&cubic(r, dim, caps)).unwrap())
        .collect();
    ChartJetFamily::from_christoffel(dim, caps, &gamma, Some(&higher)).unwrap()
}

fn cubic(r: &mut ChaCha8Rng, dim: usize, caps: Caps) -> Series {
    let mut e = vec![0u16; dim];
    for _ in 0..3 {
        e[r.gen_range(0..dim)] += 1;
    }
    Series::monomial(dim, caps, coeff(r), 0, &e, &vec![0; dim]).unwrap()
}

/// Homogeneous random Hamiltonian of y-degree `deg`.
pub fn hamiltonian(r: &mut ChaCha8Rng, dim: usize, caps: Caps, terms: usize, deg: u32) -> Series {
    let mut out = Series::zero(dim, caps);
    for _ in 0..terms {
        let mut e = vec![0u16; dim];
        for _ in 0..deg {
            e[r.gen_range(0..dim)] += 1;
        }
        out += &Series::monomial(dim, caps, coeff(r), 0, &e, &vec![0; dim]).unwrap();
    }
    out
}

/// Darboux chart on the plane built from two random Hamiltonian flows with
/// times `x¹` and `x²`.
pub fn random_darboux_chart(r: &mut ChaCha8Rng, caps: Caps) -> ChartJetFamily {
    let alpha = dq_core::moyal::ConstantBivector::standard_2d();
    let flows: Vec<(Series, Series)> = (0..2)
        .map(|i| (Series::x_var(2, caps, i), hamiltonian(r, 2, caps, 2, 3)))
        .collect();
    ChartJetFamily::from_flows(2, caps, &alpha, &flows).unwrap()
}

pub fn standard_symplectic(caps: Caps) -> dq_core::jet::SymplecticData {
    let c = |v: i64| Series::constant(2, caps, Q::from_integer(v.into()));
    dq_core::jet::SymplecticData::new(vec![vec![c(0), c(1)], vec![c(-1), c(0)]]).unwrap()
}
