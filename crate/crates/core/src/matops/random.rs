//! Seeded random matrix generators.
//!
//! Every suite draws from a [`TrialRng`] seeded by [`stream_seed`], so a trial
//! depends only on `(base seed, suite tag, trial index)` and never on the
//! order in which trials are executed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{CMatrix, EigenSystem, HermitianMatrix, PsdMatrix};
use crate::error::{Error, Result};

pub type TrialRng = ChaCha8Rng;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Counter-derived seed for trial `index` of the stream named `tag`.
pub fn stream_seed(base: u64, tag: &str, index: u64) -> u64 {
    splitmix64(splitmix64(base ^ fnv1a(tag)).wrapping_add(index))
}

pub fn rng_from_seed(seed: u64) -> TrialRng {
    TrialRng::seed_from_u64(seed)
}

/// Complex Gaussian with independent real and imaginary parts of variance ½.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| complex_gaussian(rng))
}

/// `(G + G†)/2 · scale` with `G` Gaussian.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize, scale: f64) -> HermitianMatrix {
    HermitianMatrix::hermitize(gaussian_matrix(rng, d).scale(scale))
}

/// Unitary from Gram–Schmidt on Gaussian columns.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    loop {
        let mut q = gaussian_matrix(rng, d);
        let mut ok = true;
        for j in 0..d {
            for k in 0..j {
                let proj: Complex64 = (0..d).map(|i| q[(i, k)].conj() * q[(i, j)]).sum();
                for i in 0..d {
                    let qik = q[(i, k)];
                    q[(i, j)] -= proj * qik;
                }
            }
            let norm = (0..d).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for i in 0..d {
                q[(i, j)] /= norm;
            }
        }
        if ok {
            return q;
        }
    }
}

/// `U diag(spectrum) U†` for a unitary `U`.
pub fn psd_with_spectrum(u: &CMatrix, spectrum: &[f64]) -> Result<PsdMatrix> {
    let es = EigenSystem {
        eigenvalues: spectrum.to_vec(),
        basis: u.clone(),
    };
    PsdMatrix::new(es.reconstruct())
}

/// `G G† + floor · I` with `G` Gaussian.
pub fn random_pd_with<R: Rng + ?Sized>(rng: &mut R, d: usize, floor: f64) -> PsdMatrix {
    let g = gaussian_matrix(rng, d);
    let h = HermitianMatrix::hermitize(&g * g.adjoint()).add_identity(floor);
    PsdMatrix::new(h).expect("Gram matrix plus positive shift is PSD")
}

/// Deterministic PD matrix `G G† + floor · I` for the given `(d, seed)`.
pub fn random_pd(d: usize, seed: u64, floor: f64) -> Result<PsdMatrix> {
    if d == 0 {
        return Err(Error::input("dimension must be at least 1"));
    }
    if !(floor > 0.0) {
        return Err(Error::input(format!("floor must be positive, got {floor}")));
    }
    Ok(random_pd_with(&mut rng_from_seed(seed), d, floor))
}

/// Log-uniform spectrum whose largest entry is `top` and whose condition
/// number is drawn log-uniformly from `[1, max_condition]`.
pub fn conditioned_spectrum<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    max_condition: f64,
    top: f64,
) -> Vec<f64> {
    let log_kappa = rng.random::<f64>() * max_condition.max(1.0).ln();
    let mut spectrum: Vec<f64> = (0..d)
        .map(|i| match i {
            0 => top,
            _ if i == d - 1 => top * (-log_kappa).exp(),
            _ => top * (-log_kappa * rng.random::<f64>()).exp(),
        })
        .collect();
    spectrum.sort_by(|a, b| b.total_cmp(a));
    spectrum
}

/// PD matrix with random eigenbasis and a spectrum from [`conditioned_spectrum`].
pub fn random_pd_conditioned<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    max_condition: f64,
    top: f64,
) -> PsdMatrix {
    let spectrum = conditioned_spectrum(rng, d, max_condition, top);
    let u = random_unitary(rng, d);
    psd_with_spectrum(&u, &spectrum).expect("positive spectrum")
}

/// A random PD matrix with its `d − rank` smallest eigenvalues set to zero.
pub fn random_rank_deficient<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    rank: usize,
    max_condition: f64,
    top: f64,
) -> PsdMatrix {
    let mut spectrum = conditioned_spectrum(rng, d, max_condition, top);
    for x in spectrum.iter_mut().skip(rank) {
        *x = 0.0;
    }
    let u = random_unitary(rng, d);
    psd_with_spectrum(&u, &spectrum).expect("non-negative spectrum")
}

/// Density operator (unit trace) of the given rank.
pub fn random_density<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    rank: usize,
    max_condition: f64,
) -> PsdMatrix {
    let mut spectrum = conditioned_spectrum(rng, d, max_condition, 1.0);
    for x in spectrum.iter_mut().skip(rank) {
        *x = 0.0;
    }
    let total: f64 = spectrum.iter().sum();
    for x in spectrum.iter_mut() {
        *x /= total;
    }
    let u = random_unitary(rng, d);
    psd_with_spectrum(&u, &spectrum).expect("non-negative spectrum")
}

/// Point on the probability simplex with all weights positive.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.random::<f64>()).ln() + 1e-3)
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}
