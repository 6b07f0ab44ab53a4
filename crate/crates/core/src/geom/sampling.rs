//! Random directions, normals and subspaces.

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::linalg::{normalize, orthonormalize, scale};
use super::UnitVector;
use crate::error::{Error, Result};

/// Directional distribution of the hypersphere normals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KappaFamily {
    Isotropic,
    /// Even mixture of von Mises-Fisher laws at `+-e_last` with concentration `beta`.
    PoleConcentrated { beta: f64 },
}

impl KappaFamily {
    pub fn is_isotropic(&self) -> bool {
        matches!(self, KappaFamily::Isotropic) || matches!(self, KappaFamily::PoleConcentrated { beta } if *beta == 0.0)
    }
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Uniform point on the unit sphere of `R^len`.
pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    loop {
        if let Some(v) = normalize(&gaussian_vector(rng, len), 1e-150) {
            return v;
        }
    }
}

/// Wood's rejection sampler for the last coordinate of vMF on the sphere of `R^p`.
fn vmf_height<R: Rng + ?Sized>(rng: &mut R, p: usize, beta: f64) -> f64 {
    let pm1 = (p - 1) as f64;
    let b = pm1 / (2.0 * beta + (4.0 * beta * beta + pm1 * pm1).sqrt());
    let x0 = (1.0 - b) / (1.0 + b);
    let c = beta * x0 + pm1 * (1.0 - x0 * x0).ln();
    let beta_dist = Beta::new(pm1 / 2.0, pm1 / 2.0).expect("valid shape");
    loop {
        let z: f64 = beta_dist.sample(rng);
        let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        let u: f64 = rng.random();
        if beta * w + pm1 * (1.0 - x0 * w).ln() - c >= u.ln() {
            return w;
        }
    }
}

/// A hypersphere normal on `S^dim`, as a vector in `R^{dim+1}`.
pub fn sample_normal<R: Rng + ?Sized>(rng: &mut R, dim: usize, kappa: KappaFamily) -> Result<UnitVector> {
    if dim < 1 {
        return Err(Error::Precondition("normals need dim >= 1".into()));
    }
    let len = dim + 1;
    match kappa {
        KappaFamily::Isotropic => Ok(UnitVector::from_unit(uniform_direction(rng, len))),
        KappaFamily::PoleConcentrated { beta } => {
            if !(beta >= 0.0 && beta.is_finite()) {
                return Err(Error::Precondition(format!("beta must be finite and >= 0, got {beta}")));
            }
            let w = vmf_height(rng, len, beta);
            let tangent = uniform_direction(rng, dim);
            let mut v = scale(&tangent, (1.0 - w * w).max(0.0).sqrt());
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            v.push(sign * w);
            Ok(UnitVector::new(v).expect("unit by construction"))
        }
    }
}

/// Orthonormal columns `q_1..q_len` of a Haar-random rotation of `R^len`;
/// every prefix spans a uniform random subspace and prefixes are nested.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Vec<f64>> {
    loop {
        let g: Vec<Vec<f64>> = (0..len).map(|_| gaussian_vector(rng, len)).collect();
        if let Ok(q) = orthonormalize(&g, 1e-10) {
            return q;
        }
    }
}
