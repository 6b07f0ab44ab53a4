//! Face lattices, projections and hit tests for polyhedral cones.

use rand::Rng;

use super::linalg::{complement, coords, dot, least_squares, norm, normalize, scale, sub};
use super::lp::{is_interior, max_margin};
use super::sampling::uniform_direction;
use super::SphericalCell;
use crate::error::{Error, Result};
use crate::stats::{MCEstimate, Running};

const ROW_TINY: f64 = 1e-10;

/// A proper face: the facets it lies on and an orthonormal basis of its linear span.
#[derive(Clone, Debug)]
pub struct Face {
    pub on: Vec<usize>,
    pub span: Vec<Vec<f64>>,
}

/// Facet normals and all proper faces of a cell cone in `R^{k+1}`.
#[derive(Clone, Debug)]
pub struct FaceLattice {
    pub k: usize,
    /// Irredundant normals.
    pub facets: Vec<Vec<f64>>,
    /// `faces[l]`: faces of sphere dimension `l < k` (cone dimension `l + 1`).
    pub faces: Vec<Vec<Face>>,
    /// Extreme rays (unit), empty unless pointed.
    pub rays: Vec<Vec<f64>>,
    /// Orthonormal basis of the lineality space, empty when pointed.
    pub lineality: Vec<Vec<f64>>,
}

/// Strict feasibility of `rows` restricted to the span of `basis`.
fn meets_interior<'a>(rows: impl Iterator<Item = &'a Vec<f64>>, basis: &[Vec<f64>]) -> Result<bool> {
    let mut local = Vec::new();
    for r in rows {
        let c = coords(r, basis);
        match normalize(&c, ROW_TINY) {
            Some(c) => local.push(c),
            None => {
                return Err(Error::Degenerate(
                    "constraint nearly orthogonal to a test subspace".into(),
                ))
            }
        }
    }
    if basis.len() == 1 {
        let pos = local.iter().all(|c| c[0] > 0.0);
        let neg = local.iter().all(|c| c[0] < 0.0);
        return Ok(pos || neg);
    }
    is_interior(max_margin(&local)?.margin)
}

impl FaceLattice {
    pub fn new(cell: &SphericalCell) -> Result<Self> {
        let k = cell.dim();
        let dim = k + 1;
        if k == 0 {
            let ray = normalize(&cell.witness, 1e-300)
                .ok_or_else(|| Error::Precondition("zero witness".into()))?;
            let (facets, rays, lineality) = if cell.normals.is_empty() {
                (Vec::new(), Vec::new(), vec![vec![1.0]])
            } else {
                (vec![ray.clone()], vec![ray], Vec::new())
            };
            return Ok(FaceLattice { k, facets, faces: Vec::new(), rays, lineality });
        }
        let mut facets: Vec<Vec<f64>> = Vec::new();
        let mut level: Vec<Face> = Vec::new();
        for (i, u) in cell.normals.iter().enumerate() {
            let span = complement(std::slice::from_ref(u), dim)?;
            let others = cell.normals.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| r);
            if meets_interior(others, &span)? {
                level.push(Face { on: vec![facets.len()], span });
                facets.push(u.clone());
            }
        }
        let mut faces: Vec<Vec<Face>> = vec![Vec::new(); k];
        let mut s = 1;
        while !level.is_empty() {
            let known: std::collections::HashSet<Vec<usize>> =
                level.iter().map(|f| f.on.clone()).collect();
            let mut next = Vec::new();
            if s < k {
                for f in &level {
                    let last = *f.on.last().unwrap();
                    for j in last + 1..facets.len() {
                        let mut on = f.on.clone();
                        on.push(j);
                        let all_sub = (0..on.len() - 1).all(|drop| {
                            let mut sub = on.clone();
                            sub.remove(drop);
                            known.contains(&sub)
                        });
                        if !all_sub {
                            continue;
                        }
                        let eqs: Vec<Vec<f64>> = on.iter().map(|&i| facets[i].clone()).collect();
                        let span = complement(&eqs, dim)?;
                        let others = facets.iter().enumerate().filter(|(i, _)| !on.contains(i)).map(|(_, r)| r);
                        if meets_interior(others, &span)? {
                            next.push(Face { on, span });
                        }
                    }
                }
            }
            faces[k - s] = level;
            level = next;
            s += 1;
        }
        let pointed = facets.len() > k;
        let (rays, lineality) = if pointed {
            let rays = faces[0]
                .iter()
                .map(|f| {
                    let b = &f.span[0];
                    let probe = facets
                        .iter()
                        .enumerate()
                        .find(|(i, _)| !f.on.contains(i))
                        .map(|(_, u)| dot(u, b))
                        .unwrap_or(1.0);
                    if probe >= 0.0 { b.clone() } else { scale(b, -1.0) }
                })
                .collect();
            (rays, Vec::new())
        } else {
            (Vec::new(), complement(&facets, dim)?)
        };
        Ok(FaceLattice { k, facets, faces, rays, lineality })
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    /// `f_0..f_{k-1}`.
    pub fn f_vector(&self) -> Vec<usize> {
        self.faces.iter().map(Vec::len).collect()
    }

    /// `sum_{j<k} (-1)^j f_j`; equals `1 - (-1)^k` for pointed cells.
    pub fn euler_characteristic(&self) -> i64 {
        self.faces
            .iter()
            .enumerate()
            .map(|(j, f)| if j % 2 == 0 { f.len() as i64 } else { -(f.len() as i64) })
            .sum()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.facets.iter().all(|u| dot(u, x) >= -tol)
    }

    /// Membership of `x` in the polar cone. A non-pointed cone has a
    /// lower-dimensional polar, which is treated as missed.
    pub fn in_polar(&self, x: &[f64]) -> bool {
        self.is_pointed() && self.rays.iter().all(|r| dot(r, x) <= 0.0)
    }

    /// Whether the cone meets the subspace `span(basis)` beyond the origin.
    pub fn meets_subspace(&self, basis: &[Vec<f64>]) -> Result<bool> {
        if basis.len() > self.k {
            return Ok(true);
        }
        meets_interior(self.facets.iter(), basis)
    }

    /// Whether the cone meets the hyperplane `w^perp` beyond the origin.
    pub fn meets_hyperplane(&self, w: &[f64]) -> Result<bool> {
        if !self.is_pointed() {
            if self.lineality.iter().any(|l| dot(l, w).abs() > ROW_TINY) {
                return Ok(true);
            }
            let basis = complement(&[w.to_vec()], self.k + 1)?;
            return self.meets_subspace(&basis);
        }
        let mut pos = false;
        let mut neg = false;
        for r in &self.rays {
            let s = dot(r, w);
            if s.abs() < ROW_TINY {
                return Err(Error::Degenerate("ray on the test hyperplane".into()));
            }
            pos |= s > 0.0;
            neg |= s < 0.0;
        }
        Ok(pos && neg)
    }

    /// Metric projection of `g` onto the cone (Moreau decomposition over the faces).
    pub fn project(&self, g: &[f64]) -> Result<Vec<f64>> {
        let tol = 1e-9 * norm(g).max(1.0);
        if self.contains(g, 0.0) {
            return Ok(g.to_vec());
        }
        for level in self.faces.iter().rev() {
            for f in level {
                let o = super::linalg::combine(&coords(g, &f.span), &f.span, g.len());
                if !self.contains(&o, tol) {
                    continue;
                }
                let r = sub(g, &o);
                let gens: Vec<Vec<f64>> = f.on.iter().map(|&i| scale(&self.facets[i], -1.0)).collect();
                let Some(lambda) = least_squares(&gens, &r) else { continue };
                if lambda.iter().all(|l| *l >= -tol) {
                    return Ok(o);
                }
            }
        }
        if self.is_pointed() && self.rays.iter().all(|r| dot(r, g) <= tol) {
            return Ok(vec![0.0; g.len()]);
        }
        dykstra(&self.facets, g)
    }
}

/// Cyclic projections with Dykstra corrections onto `{x : <u_i, x> >= 0}`.
fn dykstra(normals: &[Vec<f64>], g: &[f64]) -> Result<Vec<f64>> {
    let mut x = g.to_vec();
    let mut corr = vec![vec![0.0; g.len()]; normals.len()];
    for _ in 0..100_000 {
        let prev = x.clone();
        for (u, c) in normals.iter().zip(corr.iter_mut()) {
            let y: Vec<f64> = x.iter().zip(c.iter()).map(|(a, b)| a + b).collect();
            let s = dot(u, &y).min(0.0);
            let nu = dot(u, u);
            x = y.iter().zip(u).map(|(a, b)| a - s / nu * b).collect();
            *c = sub(&y, &x);
        }
        if norm(&sub(&x, &prev)) < 1e-10 * norm(g).max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::Numeric("cone projection did not converge".into()))
}

/// `f_0..f_{up_to}` of the cell (`up_to < k`).
pub fn cell_f_vector(cell: &SphericalCell, up_to: usize) -> Result<Vec<usize>> {
    let f = FaceLattice::new(cell)?.f_vector();
    Ok(f.into_iter().take(up_to + 1).collect())
}

pub fn project_onto_cone(cell: &SphericalCell, point: &[f64]) -> Result<Vec<f64>> {
    if cell.normals.len() > 25 {
        return dykstra(&cell.normals, point);
    }
    FaceLattice::new(cell)?.project(point)
}

/// Whether the cell meets `span(basis)` in more than the origin.
pub fn cone_meets_subspace(cell: &SphericalCell, basis: &[Vec<f64>]) -> Result<bool> {
    if basis.is_empty() {
        return Err(Error::Precondition("subspace must have dimension >= 1".into()));
    }
    if cell.normals.is_empty() {
        return Ok(true);
    }
    meets_interior(cell.normals.iter(), basis)
}

/// Whether two cells in the same sphere share interior points.
pub fn cones_intersect(a: &SphericalCell, b: &SphericalCell) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::Precondition("cells live in different spheres".into()));
    }
    let rows: Vec<Vec<f64>> = a.normals.iter().chain(&b.normals).cloned().collect();
    if rows.is_empty() {
        return Ok(true);
    }
    is_interior(max_margin(&rows)?.margin)
}

/// Fraction of uniform points of the ambient sphere inside the cell.
pub fn solid_angle_mc<R: Rng + ?Sized>(cell: &SphericalCell, reps: u64, rng: &mut R) -> MCEstimate {
    let mut acc = Running::default();
    for _ in 0..reps.max(1) {
        let x = uniform_direction(rng, cell.dim() + 1);
        acc.push(if cell.contains(&x) { 1.0 } else { 0.0 });
    }
    acc.estimate()
}
