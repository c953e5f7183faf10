//! Exact small-matrix complex linear algebra.
//!
//! Everything here is specialized to the N ∈ {2, 3} complex *symmetric*
//! (`M = Mᵀ`, no conjugation) matrices the rest of the crate works with.
//! Eigenvalues come from closed-form quadratic/cubic solvers, eigenvectors
//! from adjugate columns, and the relevant inner product is the bilinear
//! `uᵀv`: left eigenvectors of a complex symmetric matrix are plain
//! transposes of right ones, so the bi-orthogonal norm of an eigenvector is
//! its self-product `ψᵀψ`, which vanishes exactly at an exceptional point.

use num_complex::Complex;

use crate::{rl, Error, Real, Result};

/// Minimum |ψᵀψ| (unit-Euclidean-norm eigenvectors) below which a matrix is
/// treated as defective for the purpose of completeness sums. An eigenvector
/// norm `N_j ~ (λ-λ_c)^{2/3}` crosses this at |λ-λ_c| of roughly 1e-11, so
/// the check trips before cancellation in `Σ ψψᵀ/N_j` destroys the digits.
pub const DEFECT_T_NORM_THRESHOLD: f64 = 1e-7;

/// Complex vector of length 2 or 3.
#[derive(Debug, Clone, PartialEq)]
pub struct CVec<T: Real> {
    components: Vec<Complex<T>>,
}

impl<T: Real> CVec<T> {
    pub fn new(components: Vec<Complex<T>>) -> Self {
        Self { components }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            components: vec![Complex::new(T::zero(), T::zero()); len],
        }
    }

    /// Standard basis vector e_k.
    pub fn basis(len: usize, k: usize) -> Self {
        let mut v = Self::zeros(len);
        v.components[k] = Complex::new(T::one(), T::zero());
        v
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex<T>> {
        self.components.iter()
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.components
    }

    /// Euclidean (Hermitian) norm.
    pub fn norm(&self) -> T {
        self.components
            .iter()
            .fold(T::zero(), |acc, c| acc + c.norm_sqr())
            .sqrt()
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.components.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.iter().zip(other.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.iter().zip(other.iter()).map(|(a, b)| a - b).collect())
    }

    /// Index of the component of largest magnitude.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for k in 1..self.len() {
            if self.components[k].norm_sqr() > self.components[best].norm_sqr() {
                best = k;
            }
        }
        best
    }

    /// Hermitian inner product `Σ conj(u_k)·v_k` (used for alignment and
    /// similarity checks, not for spectral theory).
    pub fn hdot(&self, other: &Self) -> Complex<T> {
        self.iter()
            .zip(other.iter())
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a.conj() * b
            })
    }

    /// Scale to unit Euclidean norm with the largest component made real
    /// positive, which pins an otherwise arbitrary overall phase.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == T::zero() {
            return self.clone();
        }
        let lead = self.components[self.argmax()];
        let phase = lead / Complex::new(lead.norm(), T::zero());
        self.scale(phase.conj() / Complex::new(n, T::zero()))
    }
}

impl<T: Real> std::ops::Index<usize> for CVec<T> {
    type Output = Complex<T>;
    fn index(&self, i: usize) -> &Complex<T> {
        &self.components[i]
    }
}

/// Bilinear product `uᵀv = Σ u_k·v_k` — no conjugation.
pub fn t_product<T: Real>(u: &CVec<T>, v: &CVec<T>) -> Result<Complex<T>> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "t_product of lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(u.iter()
        .zip(v.iter())
        .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
            acc + a * b
        }))
}

/// N×N complex symmetric matrix, N ∈ {2, 3}.
#[derive(Debug, Clone, PartialEq)]
pub struct CSymMatrix<T: Real> {
    dim: usize,
    // row-major
    entries: Vec<Complex<T>>,
}

impl<T: Real> CSymMatrix<T> {
    /// Build from rows, rejecting non-symmetric or non-finite input.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let dim = rows.len();
        if !(2..=3).contains(&dim) || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension(format!(
                "expected square 2x2 or 3x3, got {dim} rows"
            )));
        }
        for i in 0..dim {
            for j in 0..dim {
                let e = rows[i][j];
                if !e.re.is_finite() || !e.im.is_finite() {
                    return Err(Error::InvalidParams(format!(
                        "non-finite entry at ({i},{j})"
                    )));
                }
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidParams(format!("not symmetric at ({i},{j})")));
                }
            }
        }
        let entries = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Ok(Self { dim, entries })
    }

    /// Build from rows, averaging `(m_ij + m_ji)/2` instead of rejecting.
    pub fn symmetrized(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let dim = rows.len();
        if !(2..=3).contains(&dim) || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension(format!(
                "expected square 2x2 or 3x3, got {dim} rows"
            )));
        }
        let half = cxr::<T>(0.5);
        let mut sym = vec![vec![Complex::new(T::zero(), T::zero()); dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                sym[i][j] = (rows[i][j] + rows[j][i]) * half;
            }
        }
        Self::from_rows(&sym)
    }

    pub fn diag(values: &[Complex<T>]) -> Result<Self> {
        let dim = values.len();
        let mut rows = vec![vec![Complex::new(T::zero(), T::zero()); dim]; dim];
        for (i, v) in values.iter().enumerate() {
            rows[i][i] = *v;
        }
        Self::from_rows(&rows)
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::diag(&vec![Complex::new(T::zero(), T::zero()); dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::new(T::zero(), T::zero()), |acc, i| {
            acc + self[(i, i)]
        })
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, c| acc.max(c.norm()))
    }

    pub fn mul_vec(&self, v: &CVec<T>) -> Result<CVec<T>> {
        if v.len() != self.dim {
            return Err(Error::Dimension(format!(
                "matrix dim {} times vector length {}",
                self.dim,
                v.len()
            )));
        }
        let mut out = CVec::zeros(self.dim);
        for i in 0..self.dim {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 0..self.dim {
                acc = acc + self[(i, j)] * v[j];
            }
            out.components[i] = acc;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension("matrix add".into()));
        }
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * s).collect(),
        }
    }

    /// `M − z·I`; complex symmetric is closed under diagonal shifts.
    pub fn shift(&self, z: Complex<T>) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            let d = out[(i, i)] - z;
            out.entries[i * out.dim + i] = d;
        }
        out
    }

    pub fn det(&self) -> Complex<T> {
        match self.dim {
            2 => self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)],
            3 => {
                self[(0, 0)] * (self[(1, 1)] * self[(2, 2)] - self[(1, 2)] * self[(2, 1)])
                    - self[(0, 1)] * (self[(1, 0)] * self[(2, 2)] - self[(1, 2)] * self[(2, 0)])
                    + self[(0, 2)] * (self[(1, 0)] * self[(2, 1)] - self[(1, 1)] * self[(2, 0)])
            }
            _ => unreachable!("constructors only admit dim 2 or 3"),
        }
    }

    /// Columns of the adjugate (cofactor transpose). `A·adj(A) = det(A)·I`,
    /// so for a singular rank-2 matrix every nonzero column spans the null
    /// space.
    pub fn adjugate_columns(&self) -> Vec<CVec<T>> {
        match self.dim {
            2 => {
                // adj([[a,b],[c,d]]) = [[d,-b],[-c,a]]
                vec![
                    CVec::new(vec![self[(1, 1)], -self[(1, 0)]]),
                    CVec::new(vec![-self[(0, 1)], self[(0, 0)]]),
                ]
            }
            3 => {
                let m = |i: usize, j: usize| self[(i, j)];
                let cof = |i: usize, j: usize| {
                    let (r0, r1) = match i {
                        0 => (1, 2),
                        1 => (0, 2),
                        _ => (0, 1),
                    };
                    let (c0, c1) = match j {
                        0 => (1, 2),
                        1 => (0, 2),
                        _ => (0, 1),
                    };
                    let minor = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
                    if (i + j).is_multiple_of(2) {
                        minor
                    } else {
                        -minor
                    }
                };
                // adj(A)_{ij} = cof_{ji}
                (0..3)
                    .map(|j| CVec::new((0..3).map(|i| cof(j, i)).collect()))
                    .collect()
            }
            _ => unreachable!(),
        }
    }

    /// Singular values in descending order, from the Hermitian eigenvalues of
    /// `AᴴA` (closed-form quadratic/cubic). Squaring costs accuracy on the
    /// small end — values below `‖A‖·ε^(1/2)` are noise — so [`Self::rank`]
    /// decides rank from determinant and adjugate magnitudes instead.
    pub fn singular_values(&self) -> Vec<T> {
        let n = self.dim;
        let zero = Complex::new(T::zero(), T::zero());
        let mut b = vec![vec![zero; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = zero;
                for k in 0..n {
                    acc = acc + self[(k, i)].conj() * self[(k, j)];
                }
                b[i][j] = acc;
            }
        }
        let mut eig: Vec<T> = if n == 2 {
            let tr = b[0][0] + b[1][1];
            let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
            let (r1, r2) = quadratic_roots(-tr, det);
            vec![r1.re, r2.re]
        } else {
            let tr = b[0][0] + b[1][1] + b[2][2];
            let m2 = b[0][0] * b[1][1] - b[0][1] * b[1][0] + b[0][0] * b[2][2] - b[0][2] * b[2][0]
                + b[1][1] * b[2][2]
                - b[1][2] * b[2][1];
            let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
                - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
                + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
            cubic_roots(&CubicCoeffs {
                c2: -tr,
                c1: m2,
                c0: -det,
            })
            .iter()
            .map(|r| r.re)
            .collect()
        };
        let mut sv: Vec<T> = eig.drain(..).map(|x| x.max(T::zero()).sqrt()).collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }

    /// Numerical rank relative to `tol`, decided from |det| (rank = dim?)
    /// and the adjugate norm (rank ≥ dim−1?). Both are polynomials of the
    /// entries with absolute error at machine-epsilon scale, unlike small
    /// singular values of `AᴴA`.
    pub fn rank(&self, tol: T) -> usize {
        let s = self.max_norm();
        if s <= T::epsilon() {
            return 0;
        }
        let d = self.det().norm();
        if self.dim == 2 {
            return if d > tol * s * s { 2 } else { 1 };
        }
        if d > tol * s * s * s {
            return 3;
        }
        let adj_norm = self
            .adjugate_columns()
            .iter()
            .map(|c| c.norm())
            .fold(T::zero(), T::max);
        if adj_norm > tol * s * s {
            2
        } else {
            1
        }
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for CSymMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.entries[i * self.dim + j]
    }
}

fn cxr<T: Real>(x: f64) -> Complex<T> {
    Complex::new(rl(x), T::zero())
}

/// Monic cubic `E³ + c2·E² + c1·E + c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoeffs<T: Real> {
    pub c2: Complex<T>,
    pub c1: Complex<T>,
    pub c0: Complex<T>,
}

impl<T: Real> CubicCoeffs<T> {
    pub fn eval(&self, e: Complex<T>) -> Complex<T> {
        ((e + self.c2) * e + self.c1) * e + self.c0
    }
}

/// Coefficients of `det(E·I − M)` for a 3×3 matrix, as a monic cubic.
pub fn char_poly<T: Real>(m: &CSymMatrix<T>) -> Result<CubicCoeffs<T>> {
    if m.dim() != 3 {
        return Err(Error::Dimension(format!(
            "char_poly needs dim 3, got {}",
            m.dim()
        )));
    }
    let tr = m.trace();
    let minor_sum = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    Ok(CubicCoeffs {
        c2: -tr,
        c1: minor_sum,
        c0: -m.det(),
    })
}

/// Roots of the monic quadratic `E² + b·E + c`, cancellation-safe: the larger
/// of `-b ± √(b²-4c)` is computed directly, the other via Vieta.
pub fn quadratic_roots<T: Real>(b: Complex<T>, c: Complex<T>) -> (Complex<T>, Complex<T>) {
    let four = cxr::<T>(4.0);
    let s = (b * b - four * c).sqrt();
    let cand1 = b + s;
    let cand2 = b - s;
    let big = if cand1.norm_sqr() >= cand2.norm_sqr() {
        cand1
    } else {
        cand2
    };
    if big.norm() == T::zero() {
        // b = 0 and c = 0
        return (Complex::new(T::zero(), T::zero()), -b);
    }
    let q = -big * cxr::<T>(0.5);
    (q, c / q)
}

/// The three roots of a monic cubic by Cardano's formula.
///
/// The cube-root branch is taken on the intermediate of larger magnitude,
/// `(Δ1 ± √(Δ1²−4Δ0³))/2`, which keeps triple and near-triple roots from
/// cancelling catastrophically; an exact triple root comes back as three
/// identical values.
pub fn cubic_roots<T: Real>(c: &CubicCoeffs<T>) -> [Complex<T>; 3] {
    let zero = Complex::new(T::zero(), T::zero());
    let three = cxr::<T>(3.0);
    let c2 = c.c2;
    let d0 = c2 * c2 - three * c.c1;
    let d1 = cxr::<T>(2.0) * c2 * c2 * c2 - cxr::<T>(9.0) * c2 * c.c1 + cxr::<T>(27.0) * c.c0;

    if d0 == zero && d1 == zero {
        let r = -c2 / three;
        return [r, r, r];
    }

    let s = (d1 * d1 - cxr::<T>(4.0) * d0 * d0 * d0).sqrt();
    let u = {
        let plus = d1 + s;
        let minus = d1 - s;
        if plus.norm_sqr() >= minus.norm_sqr() {
            plus
        } else {
            minus
        }
    } * cxr::<T>(0.5);
    let big_c = u.cbrt();
    if big_c.norm() == T::zero() {
        let r = -c2 / three;
        return [r, r, r];
    }

    let omega = Complex::from_polar(T::one(), rl::<T>(2.0) * T::PI() / rl::<T>(3.0));
    let mut roots = [zero; 3];
    let mut wc = big_c;
    for root in roots.iter_mut() {
        *root = -(c2 + wc + d0 / wc) / three;
        wc = wc * omega;
    }
    roots
}

/// One eigenvalue/eigenvector family for a complex symmetric matrix.
#[derive(Debug, Clone)]
pub struct EigenSet<T: Real> {
    /// Eigenvalues, sorted ascending by (Re, Im).
    pub values: Vec<Complex<T>>,
    /// Unit-Euclidean-norm right eigenvectors (phase pinned on the largest
    /// component). For a complex symmetric matrix these are also the left
    /// eigenvectors, transposed.
    pub vectors: Vec<CVec<T>>,
    /// Bilinear self-products `ψ_jᵀψ_j` (the bi-orthogonal norms N_j).
    pub t_norms: Vec<Complex<T>>,
    /// Flag per eigenvalue: set when another eigenvalue lies within the
    /// degeneracy tolerance, i.e. the pair is at or near defectiveness.
    pub condition_flags: Vec<bool>,
}

/// Default degeneracy tolerance: 1e-8 relative to the eigenvalue spread.
/// λ-errors of ε move eigenvalues near a triple root by ε^(1/3), so an
/// absolute tolerance would be either deaf or trigger-happy.
pub fn default_degeneracy_tol<T: Real>(values: &[Complex<T>]) -> T {
    let mut spread = T::zero();
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            spread = spread.max((values[i] - values[j]).norm());
        }
    }
    rl::<T>(1e-8) * spread
}

/// Closed-form eigensystem of a 2×2 or 3×3 complex symmetric matrix.
///
/// Eigenvectors come from the largest adjugate column of `M − E·I`; the
/// adjugate of a rank-2 singular matrix has rank 1, so its largest column is
/// the most stable null-vector representative — including exactly at an
/// exceptional point, where each Jordan chain yields one eigenvector (the
/// repeated value gets the same vector and a condition flag, not an error).
pub fn eigensystem<T: Real>(m: &CSymMatrix<T>, tol: T) -> Result<EigenSet<T>> {
    let n = m.dim();
    let mut values: Vec<Complex<T>> = match n {
        2 => {
            let tr = m.trace();
            let (r1, r2) = quadratic_roots(-tr, m.det());
            vec![r1, r2]
        }
        3 => cubic_roots(&char_poly(m)?).to_vec(),
        other => {
            return Err(Error::Dimension(format!(
                "eigensystem needs dim 2 or 3, got {other}"
            )))
        }
    };
    values.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("finite eigenvalues")
    });

    let scale = m.max_norm().max(T::one());
    let mut vectors = Vec::with_capacity(n);
    for &e in &values {
        let shifted = m.shift(e);
        let cols = shifted.adjugate_columns();
        let mut best = cols[0].clone();
        for c in &cols[1..] {
            if c.norm() > best.norm() {
                best = c.clone();
            }
        }
        // Adjugate entries scale like ‖A‖²; far below that the matrix has
        // rank ≤ 1 and the adjugate is pure noise.
        let adj_floor = rl::<T>(1e3) * T::epsilon() * scale * scale;
        let v = if best.norm() > adj_floor {
            best
        } else {
            rank_deficient_null_vector(&shifted, scale)
        };
        vectors.push(v.normalized());
    }

    let t_norms = vectors
        .iter()
        .map(|v| t_product(v, v).expect("same length"))
        .collect();

    let mut condition_flags = vec![false; n];
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() < tol {
                condition_flags[i] = true;
                condition_flags[j] = true;
            }
        }
    }

    Ok(EigenSet {
        values,
        vectors,
        t_norms,
        condition_flags,
    })
}

/// Null vector for a matrix of rank ≤ 1: a symmetric rank-1 matrix is
/// `α·uuᵀ`, whose null space (bilinear) is `uᵀv = 0`; at rank 0 fall back to
/// a basis vector.
fn rank_deficient_null_vector<T: Real>(a: &CSymMatrix<T>, scale: T) -> CVec<T> {
    let n = a.dim();
    let floor = rl::<T>(1e3) * T::epsilon() * scale;
    // largest row ≈ the single independent direction u
    let mut best_row = 0;
    let mut best_norm = T::zero();
    for i in 0..n {
        let r: T = (0..n).fold(T::zero(), |acc, j| acc + a[(i, j)].norm_sqr());
        if r > best_norm {
            best_norm = r;
            best_row = i;
        }
    }
    if best_norm.sqrt() <= floor {
        return CVec::basis(n, 0);
    }
    let u: Vec<Complex<T>> = (0..n).map(|j| a[(best_row, j)]).collect();
    let zero = Complex::new(T::zero(), T::zero());
    if n == 2 {
        return CVec::new(vec![u[1], -u[0]]);
    }
    // choose the pair of coordinates where u is largest and zero the third
    let mut idx: Vec<usize> = (0..3).collect();
    idx.sort_by(|&i, &j| u[j].norm_sqr().partial_cmp(&u[i].norm_sqr()).unwrap());
    let (p, q) = (idx[0], idx[1]);
    let mut v = vec![zero; 3];
    v[p] = u[q];
    v[q] = -u[p];
    CVec::new(v)
}

/// Max-norm of `Σ_j ψ_j ψ_jᵀ / N_j − I`, the bi-orthogonal completeness
/// defect. Errors out when any |N_j| is below [`DEFECT_T_NORM_THRESHOLD`]:
/// the caller is at or too near an exceptional point for the sum to mean
/// anything.
pub fn completeness_defect<T: Real>(es: &EigenSet<T>) -> Result<T> {
    let n = es.vectors.len();
    let threshold = rl::<T>(DEFECT_T_NORM_THRESHOLD);
    let mut min_t = T::infinity();
    for t in &es.t_norms {
        min_t = min_t.min(t.norm());
    }
    if min_t < threshold {
        return Err(Error::DefectiveMatrix {
            min_t_norm: min_t.to_f64().unwrap_or(f64::NAN),
            threshold: DEFECT_T_NORM_THRESHOLD,
        });
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut defect = T::zero();
    for i in 0..n {
        for j in 0..n {
            let mut acc = zero;
            for (k, v) in es.vectors.iter().enumerate() {
                acc = acc + v[i] * v[j] / es.t_norms[k];
            }
            if i == j {
                acc = acc - Complex::new(T::one(), T::zero());
            }
            defect = defect.max(acc.norm());
        }
    }
    Ok(defect)
}
