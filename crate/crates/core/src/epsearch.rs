//! Numerical location of EP2/EP3 in matrix pencils.
//!
//! A monic cubic `E³ + c2E² + c1E + c0` has a triple root iff
//! `c1 = c2²/3` and `c0 = c2³/27` (both at `E = −c2/3`); these closed
//! sub-resultant forms replace the determinant-derivative conditions and
//! avoid nested finite differences in E. Double roots are zeros of the
//! discriminant. EP2s are found by complex Newton iteration on the
//! discriminant over λ; EP3s by damped Gauss-Newton on the four real
//! components of the triple-root residual over `(Re λ, Im λ, tuning…)`,
//! with a minimal-norm (pseudo-inverse) step when the tuning parameters
//! outnumber the conditions.
//!
//! With more than four real unknowns the triple-root conditions cut out a
//! solution manifold, not a point: the solver then converges to the nearby
//! manifold point selected by the minimal-norm steps, and which couplings
//! it reports is meaningful only modulo that freedom. A square
//! configuration (λ plus one complex coupling) pins the solution uniquely.

use num_complex::Complex;

use crate::cmatrix::{char_poly, cubic_roots, CubicCoeffs};
use crate::model::{validate_ep3, Family, TunableFamily};
use crate::{rl, Error, Real, Result};

/// Newton iteration cap for the EP2 search.
const MAX_NEWTON_ITERS: usize = 50;

/// Gauss-Newton iteration cap for the EP3 search.
const MAX_GN_ITERS: usize = 60;

/// Coalescence conditions evaluated at one point of the search space:
/// the `order − 1` complex sub-resultant residuals (discriminant for order
/// 2, the two triple-root conditions for order 3) and their central
/// finite-difference Jacobian against `(Re λ, Im λ, tuning…)`.
#[derive(Debug, Clone)]
pub struct EPConditions<T: Real> {
    pub order: usize,
    pub residual: Vec<Complex<T>>,
    /// Row k = d(residual component k)/d(unknowns); residual components
    /// are real/imag interleaved, so there are `2·(order − 1)` rows.
    pub jacobian: Vec<Vec<T>>,
}

/// Solver outcome: where the exceptional point sits and how trustworthy
/// the convergence was.
#[derive(Debug, Clone)]
pub struct EPLocation<T: Real> {
    pub lambda_c: Complex<T>,
    pub tuning_at_solution: Vec<T>,
    pub e_c: Complex<T>,
    /// Detected order: 2, or 3 when an EP2 search converged onto a triple
    /// root (an EP3 found by accident) or the EP3 search succeeded.
    pub order: usize,
    /// Scale-normalized residual at the solution.
    pub final_residual: T,
    /// Rank/Jordan structure check passed at the solution.
    pub validated: bool,
    pub iterations: usize,
    /// Residual magnitude per iteration, for convergence diagnostics.
    pub residual_trace: Vec<T>,
}

/// `(c1 − c2²/3, c0 − c2³/27)`: both vanish iff the cubic has a triple
/// root at `E = −c2/3`.
pub fn triple_root_residual<T: Real>(c: &CubicCoeffs<T>) -> (Complex<T>, Complex<T>) {
    let three = Complex::new(rl::<T>(3.0), T::zero());
    let r1 = c.c1 - c.c2 * c.c2 / three;
    let r2 = c.c0 - c.c2 * c.c2 * c.c2 / Complex::new(rl::<T>(27.0), T::zero());
    (r1, r2)
}

/// Discriminant of the monic cubic:
/// `18·c2·c1·c0 − 4·c2³·c0 + c2²·c1² − 4·c1³ − 27·c0²`;
/// zero iff a repeated root exists.
pub fn discriminant<T: Real>(c: &CubicCoeffs<T>) -> Complex<T> {
    let k = |x: f64| Complex::new(rl::<T>(x), T::zero());
    k(18.0) * c.c2 * c.c1 * c.c0 - k(4.0) * c.c2 * c.c2 * c.c2 * c.c0 + c.c2 * c.c2 * c.c1 * c.c1
        - k(4.0) * c.c1 * c.c1 * c.c1
        - k(27.0) * c.c0 * c.c0
}

/// Discriminant of the characteristic polynomial of `H(λ)` (quadratic
/// `tr² − 4·det` for 2×2, the cubic discriminant for 3×3), together with
/// its natural magnitude scale.
fn family_discriminant<T: Real>(f: &Family<T>, lambda: Complex<T>) -> Result<(Complex<T>, T)> {
    let h = f.at(lambda);
    let m = T::one() + h.max_norm();
    match h.dim() {
        2 => {
            let tr = h.trace();
            let det = h.det();
            let four = Complex::new(rl::<T>(4.0), T::zero());
            Ok((tr * tr - four * det, m * m))
        }
        3 => Ok((discriminant(&char_poly(&h)?), m.powi(6))),
        d => Err(Error::Dimension(format!("discriminant for dim {d}"))),
    }
}

/// Double root of the characteristic polynomial at a converged EP2.
fn double_root<T: Real>(f: &Family<T>, lambda: Complex<T>) -> Result<Complex<T>> {
    let h = f.at(lambda);
    match h.dim() {
        2 => Ok(h.trace() / Complex::new(rl::<T>(2.0), T::zero())),
        3 => {
            let roots = cubic_roots(&char_poly(&h)?);
            let pairs = [(0, 1), (0, 2), (1, 2)];
            let (i, j) = pairs
                .iter()
                .min_by(|a, b| {
                    let da = (roots[a.0] - roots[a.1]).norm();
                    let db = (roots[b.0] - roots[b.1]).norm();
                    da.partial_cmp(&db).unwrap()
                })
                .copied()
                .unwrap();
            Ok((roots[i] + roots[j]) / Complex::new(rl::<T>(2.0), T::zero()))
        }
        d => Err(Error::Dimension(format!("double root for dim {d}"))),
    }
}

/// Evaluate the order-2 coalescence condition (the discriminant) with its
/// finite-difference Jacobian against `(Re λ, Im λ)`.
pub fn ep2_conditions<T: Real>(f: &Family<T>, lambda: Complex<T>) -> Result<EPConditions<T>> {
    let (disc, _) = family_discriminant(f, lambda)?;
    let h = rl::<T>(1e-6) * (T::one() + lambda.norm());
    let mut jacobian = vec![vec![T::zero(); 2]; 2];
    for (l, step) in [Complex::new(h, T::zero()), Complex::new(T::zero(), h)]
        .into_iter()
        .enumerate()
    {
        let (dp, _) = family_discriminant(f, lambda + step)?;
        let (dm, _) = family_discriminant(f, lambda - step)?;
        let d = (dp - dm) / Complex::new(rl::<T>(2.0) * h, T::zero());
        jacobian[0][l] = d.re;
        jacobian[1][l] = d.im;
    }
    Ok(EPConditions {
        order: 2,
        residual: vec![disc],
        jacobian,
    })
}

/// Evaluate the order-3 coalescence conditions (the two triple-root
/// residuals) with their finite-difference Jacobian against
/// `(Re λ, Im λ, tuning…)`.
pub fn ep3_conditions<T: Real>(
    tf: &TunableFamily<T>,
    lambda: Complex<T>,
    params: &[T],
) -> Result<EPConditions<T>> {
    let raw = |x: &[T]| -> Result<[T; 4]> {
        let f = tf.family_at(&x[2..])?;
        let h = f.at(Complex::new(x[0], x[1]));
        if h.dim() != 3 {
            return Err(Error::Dimension("EP3 conditions need a 3×3 family".into()));
        }
        let (r1, r2) = triple_root_residual(&char_poly(&h)?);
        Ok([r1.re, r1.im, r2.re, r2.im])
    };
    let mut x: Vec<T> = Vec::with_capacity(2 + params.len());
    x.push(lambda.re);
    x.push(lambda.im);
    x.extend_from_slice(params);
    let r = raw(&x)?;
    let k = x.len();
    let mut jacobian = vec![vec![T::zero(); k]; 4];
    for l in 0..k {
        let h = rl::<T>(1e-6) * (T::one() + x[l].abs());
        let mut xp = x.clone();
        xp[l] = xp[l] + h;
        let mut xm = x.clone();
        xm[l] = xm[l] - h;
        let rp = raw(&xp)?;
        let rm = raw(&xm)?;
        for i in 0..4 {
            jacobian[i][l] = (rp[i] - rm[i]) / (rl::<T>(2.0) * h);
        }
    }
    Ok(EPConditions {
        order: 3,
        residual: vec![Complex::new(r[0], r[1]), Complex::new(r[2], r[3])],
        jacobian,
    })
}

/// Newton iteration on the discriminant `Δ(λ) = 0` from `lambda0`.
///
/// The complex derivative comes from central differences with a real step
/// `1e-6·(1+|λ|)` — legitimate because Δ is analytic in λ. Convergence is
/// `|Δ| ≤ 1e-12·scale`; the double root is then extracted and the Jordan
/// structure checked by rank. Landing on a triple root is reported as
/// order 3, not an error.
pub fn locate_ep2<T: Real>(f: &Family<T>, lambda0: Complex<T>) -> Result<EPLocation<T>> {
    let mut lam = lambda0;
    let mut trace = Vec::new();
    for iteration in 0..MAX_NEWTON_ITERS {
        let (disc, scale) = family_discriminant(f, lam)?;
        let residual = disc.norm() / scale;
        trace.push(residual);
        if residual <= rl::<T>(1e-12) {
            return finish_ep2(f, lam, residual, iteration, trace);
        }
        let h = rl::<T>(1e-6) * (T::one() + lam.norm());
        let hc = Complex::new(h, T::zero());
        let (dp, _) = family_discriminant(f, lam + hc)?;
        let (dm, _) = family_discriminant(f, lam - hc)?;
        let deriv = (dp - dm) / (hc * Complex::new(rl::<T>(2.0), T::zero()));
        if deriv.norm() <= rl::<T>(1e-14) * scale {
            // flat discriminant: Newton has nowhere to go
            return Err(Error::Divergence {
                iterations: iteration + 1,
                last_residual: residual.to_f64().unwrap_or(f64::NAN),
            });
        }
        lam = lam - disc / deriv;
    }
    Err(Error::Divergence {
        iterations: MAX_NEWTON_ITERS,
        last_residual: trace
            .last()
            .copied()
            .unwrap_or(T::nan())
            .to_f64()
            .unwrap_or(f64::NAN),
    })
}

fn finish_ep2<T: Real>(
    f: &Family<T>,
    lam: Complex<T>,
    residual: T,
    iterations: usize,
    trace: Vec<T>,
) -> Result<EPLocation<T>> {
    let h = f.at(lam);
    let dim = h.dim();
    // A converged discriminant zero is either one tight root pair (a
    // double root) or — near a triple root, where Δ vanishes to second
    // order and Newton stops while the roots are still ~|Δ|^(1/6) apart —
    // three comparable separations. The cluster shape tells them apart.
    let order = if dim == 3 {
        let roots = cubic_roots(&char_poly(&h)?);
        let mut d_min = T::infinity();
        let mut d_max = T::zero();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let d = (roots[i] - roots[j]).norm();
            d_min = d_min.min(d);
            d_max = d_max.max(d);
        }
        if d_min > rl::<T>(0.1) * d_max {
            3
        } else {
            2
        }
    } else {
        2
    };
    let e_c = if order == 3 {
        h.trace() / Complex::new(rl::<T>(3.0), T::zero())
    } else {
        double_root(f, lam)?
    };
    let validated = if order == 3 {
        validate_ep3(&h, e_c, rl::<T>(1e-10))?
    } else {
        // EP2 Jordan check: one defective pair, everything else regular
        h.shift(e_c).rank(rl::<T>(1e-8)) == dim - 1
    };
    Ok(EPLocation {
        lambda_c: lam,
        tuning_at_solution: Vec::new(),
        e_c,
        order,
        final_residual: residual,
        validated,
        iterations,
        residual_trace: trace,
    })
}

/// Scale-normalized real residual vector of the triple-root conditions.
fn ep3_residual<T: Real>(tf: &TunableFamily<T>, x: &[T]) -> Result<[T; 4]> {
    let lam = Complex::new(x[0], x[1]);
    let f = tf.family_at(&x[2..])?;
    let h = f.at(lam);
    if h.dim() != 3 {
        return Err(Error::Dimension("EP3 search needs a 3×3 family".into()));
    }
    let (r1, r2) = triple_root_residual(&char_poly(&h)?);
    let m = T::one() + h.max_norm();
    let s1 = m * m;
    let s2 = m * m * m;
    Ok([r1.re / s1, r1.im / s1, r2.re / s2, r2.im / s2])
}

fn residual_norm<T: Real>(r: &[T; 4]) -> T {
    r.iter().fold(T::zero(), |a, &v| a.max(v.abs()))
}

/// Gaussian elimination with partial pivoting; `None` on a singular pivot.
fn solve_linear<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() <= T::epsilon() * rl::<T>(1e3) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                let sub = factor * a[col][k];
                a[row][k] = a[row][k] - sub;
            }
            let sub = factor * b[col];
            b[row] = b[row] - sub;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Gauss-Newton step: square solve when unknowns = 4, minimal-norm
/// `Jᵀ(JJᵀ)⁻¹(−R)` when unknowns > 4.
fn gn_step<T: Real>(jac: &[Vec<T>], r: &[T; 4]) -> Option<Vec<T>> {
    let k = jac[0].len();
    let neg_r: Vec<T> = r.iter().map(|&v| -v).collect();
    if k == 4 {
        let a: Vec<Vec<T>> = jac.to_vec();
        if let Some(step) = solve_linear(a, neg_r.clone()) {
            return Some(step);
        }
    }
    // JJᵀ (4×4), regularized against rank drops
    let mut jjt = vec![vec![T::zero(); 4]; 4];
    let mut trace = T::zero();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = T::zero();
            for l in 0..k {
                acc = acc + jac[i][l] * jac[j][l];
            }
            jjt[i][j] = acc;
        }
        trace = trace + jjt[i][i];
    }
    let ridge = rl::<T>(1e-14) * (trace + T::one());
    for (i, row) in jjt.iter_mut().enumerate() {
        row[i] = row[i] + ridge;
    }
    let y = solve_linear(jjt, neg_r)?;
    let mut step = vec![T::zero(); k];
    for (l, s) in step.iter_mut().enumerate() {
        let mut acc = T::zero();
        for i in 0..4 {
            acc = acc + jac[i][l] * y[i];
        }
        *s = acc;
    }
    Some(step)
}

/// Damped Gauss-Newton on the triple-root conditions over
/// `(Re λ, Im λ, tuning…)`.
///
/// Central-difference Jacobian with steps `1e-6·(1+|x_i|)`; step halving
/// (up to 20 rounds) whenever the residual would increase. Success requires
/// the normalized residual at or below 1e-10 *and* the rank test for a
/// genuine size-3 Jordan block; a converged triple root with the wrong rank
/// is a degenerate-structure error.
pub fn locate_ep3<T: Real>(
    tf: &TunableFamily<T>,
    lambda0: Complex<T>,
    p0: &[T],
) -> Result<EPLocation<T>> {
    if tf.n_params() < 2 {
        return Err(Error::StructuralInfeasibility {
            unknowns: 2 + tf.n_params(),
            conditions: 4,
        });
    }
    if p0.len() != tf.n_params() {
        return Err(Error::Dimension(format!(
            "expected {} tuning parameters, got {}",
            tf.n_params(),
            p0.len()
        )));
    }
    let mut x: Vec<T> = Vec::with_capacity(2 + p0.len());
    x.push(lambda0.re);
    x.push(lambda0.im);
    x.extend_from_slice(p0);
    let k = x.len();

    let tol = rl::<T>(1e-10);
    let mut r = ep3_residual(tf, &x)?;
    let mut rnorm = residual_norm(&r);
    let mut trace = vec![rnorm];
    let mut iterations = 0;

    while rnorm > tol {
        if iterations >= MAX_GN_ITERS {
            return Err(Error::Divergence {
                iterations,
                last_residual: rnorm.to_f64().unwrap_or(f64::NAN),
            });
        }
        iterations += 1;
        // central-difference Jacobian
        let mut jac = vec![vec![T::zero(); k]; 4];
        for l in 0..k {
            let h = rl::<T>(1e-6) * (T::one() + x[l].abs());
            let mut xp = x.clone();
            xp[l] = xp[l] + h;
            let mut xm = x.clone();
            xm[l] = xm[l] - h;
            let rp = ep3_residual(tf, &xp)?;
            let rm = ep3_residual(tf, &xm)?;
            for i in 0..4 {
                jac[i][l] = (rp[i] - rm[i]) / (rl::<T>(2.0) * h);
            }
        }
        let step = gn_step(&jac, &r).ok_or(Error::Divergence {
            iterations,
            last_residual: rnorm.to_f64().unwrap_or(f64::NAN),
        })?;
        // damping: halve on residual increase
        let mut factor = T::one();
        let mut accepted = false;
        for _ in 0..20 {
            let candidate: Vec<T> = x
                .iter()
                .zip(step.iter())
                .map(|(&xi, &si)| xi + factor * si)
                .collect();
            let rc = ep3_residual(tf, &candidate)?;
            let rcn = residual_norm(&rc);
            if rcn < rnorm {
                x = candidate;
                r = rc;
                rnorm = rcn;
                accepted = true;
                break;
            }
            factor = factor * rl::<T>(0.5);
        }
        trace.push(rnorm);
        if !accepted {
            return Err(Error::Divergence {
                iterations,
                last_residual: rnorm.to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    let lambda_c = Complex::new(x[0], x[1]);
    let f = tf.family_at(&x[2..])?;
    let h = f.at(lambda_c);
    let e_c = h.trace() / Complex::new(rl::<T>(3.0), T::zero());
    let validated = validate_ep3(&h, e_c, rl::<T>(1e-10))?;
    if !validated {
        return Err(Error::DegenerateStructure {
            rank: h.shift(e_c).rank(rl::<T>(1e-8)),
        });
    }
    Ok(EPLocation {
        lambda_c,
        tuning_at_solution: x[2..].to_vec(),
        e_c,
        order: 3,
        final_residual: rnorm,
        validated,
        iterations,
        residual_trace: trace,
    })
}
