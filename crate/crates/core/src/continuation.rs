//! Eigenvalue branch tracking in the complex λ-plane.
//!
//! Branches are followed step by step: at each new λ the closed-form
//! eigensystem is matched to the previous one by minimal total distance in
//! the energy plane (brute force over all N! ≤ 6 assignments, which is
//! exact). A matching is rejected as ambiguous when the runner-up assignment
//! costs less than twice the best one; the adaptive drivers then halve the
//! step and retry.
//!
//! Tracked eigenvectors carry the bilinear normalization `vᵀv = 1` with the
//! square-root branch chosen for continuity: each step keeps the sign for
//! which `t_product` with the previous vector has positive real part (≈ +1
//! for small steps). This pins the otherwise arbitrary per-λ scaling, and it
//! is what makes monodromy vector factors come out as clean ±1: encircling a
//! second-order exceptional point twice returns the branches with factor −1
//! (fourfold loops restore +1), while a third-order point restores both
//! energies and vectors after three loops.

use num_complex::Complex;

use crate::cmatrix::{default_degeneracy_tol, eigensystem, t_product, CVec, EigenSet};
use crate::model::Family;
use crate::{rl, Error, Real, Result};

/// Maximum step-halving rounds before an ambiguous matching is given up on.
pub const MAX_REFINEMENTS: usize = 4;

/// Default angular resolution for monodromy circles.
pub const DEFAULT_STEPS_PER_LOOP: usize = 360;

/// A sampled path in the λ-plane.
#[derive(Debug, Clone)]
pub struct LambdaPath<T: Real> {
    pub samples: Vec<Complex<T>>,
    pub closed: bool,
}

impl<T: Real> LambdaPath<T> {
    /// Straight segment with `steps` intervals (`steps + 1` samples).
    pub fn line(from: Complex<T>, to: Complex<T>, steps: usize) -> Self {
        let n = steps.max(1);
        let samples = (0..=n)
            .map(|k| {
                let t = rl::<T>(k as f64 / n as f64);
                from + (to - from) * Complex::new(t, T::zero())
            })
            .collect();
        Self {
            samples,
            closed: from == to,
        }
    }

    /// Circle of `|loops|` turns around `center`, counterclockwise for
    /// positive `loops`, clockwise for negative. The angle is reduced
    /// modulo one turn before evaluating, so revisited positions are
    /// bit-identical and the path closes exactly.
    pub fn circle(center: Complex<T>, radius: T, loops: i32, steps_per_loop: usize) -> Self {
        let steps = steps_per_loop.max(4);
        let total = steps * loops.unsigned_abs() as usize;
        let dir = if loops >= 0 { 1.0 } else { -1.0 };
        let samples = (0..=total)
            .map(|k| {
                let frac = (k % steps) as f64 / steps as f64;
                let angle = rl::<T>(dir * 2.0 * std::f64::consts::PI * frac);
                center + Complex::from_polar(radius, angle)
            })
            .collect();
        Self {
            samples,
            closed: true,
        }
    }
}

/// One tracked eigenvalue/eigenvector branch.
#[derive(Debug, Clone)]
pub struct LabeledBranch<T: Real> {
    /// 1-based sheet label, inherited from the seed ordering.
    pub sheet: usize,
    pub lambdas: Vec<Complex<T>>,
    pub energies: Vec<Complex<T>>,
    /// Gauge-fixed vectors: `vᵀv = 1`, sign continuous along the path.
    pub vectors: Vec<CVec<T>>,
    /// Bilinear self-products of the unit-Euclidean eigenvectors, before
    /// the bilinear rescaling; these are the raw bi-orthogonal norms.
    pub t_norms: Vec<Complex<T>>,
}

/// Permutation and vector factors induced by closed loops.
#[derive(Debug, Clone)]
pub struct MonodromyResult<T: Real> {
    /// 1-based: branch j ends on the sheet that started as
    /// `permutation[j-1]`.
    pub permutation: Vec<usize>,
    /// `t_product` of each branch's final vector with the seed vector it
    /// landed on; ±1 under the continuity gauge.
    pub vector_factors: Vec<Complex<T>>,
    pub loops: i32,
}

impl<T: Real> MonodromyResult<T> {
    /// Smallest k ≥ 1 with `permutationᵏ = id`.
    pub fn permutation_order(&self) -> usize {
        let n = self.permutation.len();
        let mut current: Vec<usize> = (1..=n).collect();
        for k in 1..=24 {
            current = current.iter().map(|&j| self.permutation[j - 1]).collect();
            if current.iter().enumerate().all(|(i, &j)| j == i + 1) {
                return k;
            }
        }
        unreachable!("permutations on ≤ 3 elements have order ≤ 3")
    }

    pub fn is_identity(&self) -> bool {
        self.permutation
            .iter()
            .enumerate()
            .all(|(i, &j)| j == i + 1)
    }
}

/// Labeled eigenstate at a single λ.
#[derive(Debug, Clone)]
pub struct SheetPoint<T: Real> {
    pub sheet: usize,
    pub energy: Complex<T>,
    pub vector: CVec<T>,
    pub t_norm: Complex<T>,
}

fn collision_tol<T: Real>(f: &Family<T>, lambda: Complex<T>) -> T {
    rl::<T>(1e-12) * (T::one() + f.at(lambda).max_norm())
}

/// Eigensystem at `lambda`, in the deterministic (Re, Im)-lexicographic
/// order that defines seed sheet labels 1..N.
pub fn seed_at<T: Real>(f: &Family<T>, lambda: Complex<T>) -> Result<EigenSet<T>> {
    let m = f.at(lambda);
    let first = eigensystem(&m, T::zero())?;
    let tol = default_degeneracy_tol(&first.values);
    eigensystem(&m, tol)
}

/// Bilinear normalization `v → v/√(vᵀv)` with the principal square root.
/// Falls back to the unit-Euclidean vector when the self-product is too
/// isotropic to divide by.
fn binormalize<T: Real>(v: &CVec<T>) -> (CVec<T>, Complex<T>) {
    let n = t_product(v, v).expect("same length");
    if n.norm() < rl::<T>(1e-12) {
        (v.clone(), n)
    } else {
        (
            v.scale(Complex::new(T::one(), T::zero()) / crate::branch_clean(n).sqrt()),
            n,
        )
    }
}

/// Align `vec` (± for bi-normalized vectors) for continuity with `prev`.
fn align_sign<T: Real>(prev: &CVec<T>, vec: CVec<T>) -> CVec<T> {
    let overlap = t_product(prev, &vec).expect("same length");
    if overlap.norm() >= rl::<T>(1e-12) {
        if overlap.re < T::zero() {
            return vec.scale(Complex::new(-T::one(), T::zero()));
        }
        return vec;
    }
    // degenerate overlap: align on the largest component of the previous
    // vector instead
    let k = prev.argmax();
    if (vec[k] / prev[k]).re < T::zero() {
        vec.scale(Complex::new(-T::one(), T::zero()))
    } else {
        vec
    }
}

/// Best and second-best assignments of `new` onto `prev` by total distance.
fn best_matchings<T: Real>(prev: &[Complex<T>], new: &[Complex<T>]) -> (Vec<usize>, T, T) {
    let n = prev.len();
    let perms: Vec<Vec<usize>> = match n {
        2 => vec![vec![0, 1], vec![1, 0]],
        3 => vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ],
        _ => unreachable!("dims are 2 or 3"),
    };
    let mut best: Option<(Vec<usize>, T)> = None;
    let mut second = T::infinity();
    for p in perms {
        let cost = (0..n).fold(T::zero(), |acc, i| acc + (new[p[i]] - prev[i]).norm());
        match &mut best {
            Some((bp, bc)) => {
                if cost < *bc {
                    second = *bc;
                    *bp = p;
                    *bc = cost;
                } else if cost < second {
                    second = cost;
                }
            }
            None => best = Some((p, cost)),
        }
    }
    let (p, b) = best.expect("non-empty permutation set");
    (p, b, second)
}

/// Track all branches of `f` along `path`, starting from `seed`.
///
/// The seed's eigenvalue order defines the sheet labels. Matching is
/// rejected (step-size error) as soon as a second assignment comes within a
/// factor 2 of the best total cost, and the walk stops with an
/// on-singularity error when two eigenvalues collide on the path.
pub fn track<T: Real>(
    f: &Family<T>,
    path: &LambdaPath<T>,
    seed: &EigenSet<T>,
) -> Result<Vec<LabeledBranch<T>>> {
    let n = f.dim();
    if path.samples.is_empty() {
        return Err(Error::InvalidParams("empty path".into()));
    }
    if seed.values.len() != n {
        return Err(Error::Dimension(format!(
            "seed carries {} values for a dim-{} family",
            seed.values.len(),
            n
        )));
    }
    let start = path.samples[0];
    let ctol = collision_tol(f, start);
    let mut min_sep = T::infinity();
    for i in 0..n {
        for j in i + 1..n {
            min_sep = min_sep.min((seed.values[i] - seed.values[j]).norm());
        }
    }
    if min_sep <= rl::<T>(10.0) * ctol {
        return Err(Error::OnSingularity {
            lambda_re: start.re.to_f64().unwrap_or(f64::NAN),
            lambda_im: start.im.to_f64().unwrap_or(f64::NAN),
        });
    }

    let mut branches: Vec<LabeledBranch<T>> = (0..n)
        .map(|j| {
            let (chi, t_norm) = binormalize(&seed.vectors[j]);
            LabeledBranch {
                sheet: j + 1,
                lambdas: vec![start],
                energies: vec![seed.values[j]],
                vectors: vec![chi],
                t_norms: vec![t_norm],
            }
        })
        .collect();

    let mut prev_energies: Vec<Complex<T>> = seed.values.clone();
    for (step, &lam) in path.samples.iter().enumerate().skip(1) {
        let es = eigensystem(&f.at(lam), default_degeneracy_tol(&prev_energies))?;
        let ctol = collision_tol(f, lam);
        for i in 0..n {
            for j in i + 1..n {
                if (es.values[i] - es.values[j]).norm() < ctol {
                    return Err(Error::OnSingularity {
                        lambda_re: lam.re.to_f64().unwrap_or(f64::NAN),
                        lambda_im: lam.im.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        let (assignment, best, second) = best_matchings(&prev_energies, &es.values);
        if second < rl::<T>(2.0) * best {
            return Err(Error::StepSize {
                step,
                best: best.to_f64().unwrap_or(f64::NAN),
                second: second.to_f64().unwrap_or(f64::NAN),
            });
        }
        for (i, branch) in branches.iter_mut().enumerate() {
            let pick = assignment[i];
            let (chi, t_norm) = binormalize(&es.vectors[pick]);
            let aligned = align_sign(branch.vectors.last().expect("seeded"), chi);
            branch.lambdas.push(lam);
            branch.energies.push(es.values[pick]);
            branch.vectors.push(aligned);
            branch.t_norms.push(t_norm);
        }
        prev_energies = branches
            .iter()
            .map(|b| *b.energies.last().unwrap())
            .collect();
    }
    Ok(branches)
}

/// Track through an ordered list of waypoints, inserting `substeps`
/// intermediate samples per leg and doubling them (up to
/// [`MAX_REFINEMENTS`] times) whenever the matching becomes ambiguous.
/// Entry k of every returned branch corresponds to waypoint k.
pub fn track_through<T: Real>(
    f: &Family<T>,
    waypoints: &[Complex<T>],
    seed: &EigenSet<T>,
    substeps: usize,
) -> Result<Vec<LabeledBranch<T>>> {
    if waypoints.len() < 2 {
        return Err(Error::InvalidParams("need at least two waypoints".into()));
    }
    let mut sub = substeps.max(1);
    let mut attempt = 0;
    loop {
        let mut samples = Vec::with_capacity((waypoints.len() - 1) * sub + 1);
        let mut keep = Vec::with_capacity(waypoints.len());
        samples.push(waypoints[0]);
        keep.push(0usize);
        for leg in waypoints.windows(2) {
            for k in 1..=sub {
                let t = rl::<T>(k as f64 / sub as f64);
                samples.push(leg[0] + (leg[1] - leg[0]) * Complex::new(t, T::zero()));
            }
            // force the exact waypoint value at the leg end
            let last = samples.len() - 1;
            samples[last] = leg[1];
            keep.push(last);
        }
        let path = LambdaPath {
            samples,
            closed: waypoints.first() == waypoints.last(),
        };
        match track(f, &path, seed) {
            Ok(branches) => {
                return Ok(branches
                    .into_iter()
                    .map(|b| LabeledBranch {
                        sheet: b.sheet,
                        lambdas: keep.iter().map(|&k| b.lambdas[k]).collect(),
                        energies: keep.iter().map(|&k| b.energies[k]).collect(),
                        vectors: keep.iter().map(|&k| b.vectors[k].clone()).collect(),
                        t_norms: keep.iter().map(|&k| b.t_norms[k]).collect(),
                    })
                    .collect());
            }
            Err(Error::StepSize { .. }) if attempt < MAX_REFINEMENTS => {
                attempt += 1;
                sub *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Circle `loops` times around `center` (counterclockwise for positive
/// `loops`) and report the induced sheet permutation and vector factors.
///
/// The seed lives at `center + radius` on the positive-real ray, labeled in
/// (Re, Im)-lexicographic order. Ambiguous matchings trigger up to
/// [`MAX_REFINEMENTS`] rounds of step doubling.
pub fn monodromy<T: Real>(
    f: &Family<T>,
    center: Complex<T>,
    radius: T,
    loops: i32,
    steps_per_loop: usize,
) -> Result<MonodromyResult<T>> {
    if loops == 0 {
        return Err(Error::InvalidParams("zero loops".into()));
    }
    let start = center + Complex::new(radius, T::zero());
    let seed = seed_at(f, start)?;
    let mut steps = steps_per_loop.max(4);
    let mut attempt = 0;
    let branches = loop {
        let path = LambdaPath::circle(center, radius, loops, steps);
        match track(f, &path, &seed) {
            Ok(b) => break b,
            Err(Error::StepSize { .. }) if attempt < MAX_REFINEMENTS => {
                attempt += 1;
                steps *= 2;
            }
            Err(e) => return Err(e),
        }
    };

    let n = branches.len();
    let seed_chis: Vec<CVec<T>> = seed.vectors.iter().map(|v| binormalize(v).0).collect();
    let mut permutation = vec![0usize; n];
    let mut vector_factors = Vec::with_capacity(n);
    let mut used = vec![false; n];
    for (j, branch) in branches.iter().enumerate() {
        let e_end = *branch.energies.last().unwrap();
        let (target, dist) = seed
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| (k, (e_end - v).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if used[target] {
            // two branches claiming the same seed slot is a resolution
            // problem, not a property of the family
            return Err(Error::StepSize {
                step: branch.energies.len() - 1,
                best: dist.to_f64().unwrap_or(f64::NAN),
                second: f64::NAN,
            });
        }
        used[target] = true;
        permutation[j] = target + 1;
        let factor = t_product(branch.vectors.last().unwrap(), &seed_chis[target])?;
        vector_factors.push(factor);
    }
    Ok(MonodromyResult {
        permutation,
        vector_factors,
        loops,
    })
}

/// Sheet labels at `lam`, defined by continuation from the reference point
/// along the straight segment. Deterministic given `(center, reference)`;
/// by convention the reference sits on the positive-real ray from `center`.
pub fn sheet_label<T: Real>(
    f: &Family<T>,
    lam: Complex<T>,
    center: Complex<T>,
    reference: Complex<T>,
) -> Result<Vec<SheetPoint<T>>> {
    if lam == center {
        return Err(Error::OnSingularity {
            lambda_re: lam.re.to_f64().unwrap_or(f64::NAN),
            lambda_im: lam.im.to_f64().unwrap_or(f64::NAN),
        });
    }
    let seed = seed_at(f, reference)?;
    if lam == reference {
        return Ok((0..seed.values.len())
            .map(|j| SheetPoint {
                sheet: j + 1,
                energy: seed.values[j],
                vector: binormalize(&seed.vectors[j]).0,
                t_norm: seed.t_norms[j],
            })
            .collect());
    }
    let branches = track_through(f, &[reference, lam], &seed, 64)?;
    Ok(branches
        .iter()
        .map(|b| SheetPoint {
            sheet: b.sheet,
            energy: *b.energies.last().unwrap(),
            vector: b.vectors.last().unwrap().clone(),
            t_norm: *b.t_norms.last().unwrap(),
        })
        .collect())
}
