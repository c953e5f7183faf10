//! Matrix families with a built-in third-order exceptional point.
//!
//! Two constructions are provided. The generic one is `H0 = diag(e)`,
//! `H1 = U·diag(o)·Uᵀ` with a real orthogonal `U` from three angles. The
//! special one fixes
//!
//! ```text
//! H0 = | e1  0   s3 |        H1 = | 0 1 0 |
//!      | 0   e2  s2 |             | 1 0 0 |
//!      | s3  s2  e3 |             | 0 0 0 |
//! ```
//!
//! and chooses the couplings
//!
//! ```text
//! s2² = −(e1−2e2+e3)³ / (27(e1−e2))
//! s3² = +(−2e1+e2+e3)³ / (27(e1−e2))
//! ```
//!
//! so that `H0` has a triple eigenvalue `E_c = (e1+e2+e3)/3` carried by a
//! single 3×3 Jordan block: an EP3 of the pencil at λ = 0. Closed-form
//! reference quantities — the coalesced eigenvector, the first Puiseux
//! energy coefficient, and the first eigenvector expansion term — live here
//! too, so the numerical machinery in the other modules can be checked
//! against them.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::cmatrix::{char_poly, CSymMatrix, CVec};
use crate::{branch_clean, cx, rl, Error, Real, Result};

/// Sign selector for the square-root branches of the special couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor<T: Real>(self) -> Complex<T> {
        match self {
            Sign::Plus => cx(1.0, 0.0),
            Sign::Minus => cx(-1.0, 0.0),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Parameters of the generic two-term family.
#[derive(Debug, Clone)]
pub struct GenericFamilyParams<T: Real> {
    pub e: [Complex<T>; 3],
    pub o: [Complex<T>; 3],
    /// Euler-style angles (z, y, x) parameterizing `U = Rz·Ry·Rx`.
    pub angles: [T; 3],
}

/// Parameters of the special EP3-by-construction family.
#[derive(Debug, Clone)]
pub struct SpecialFamilyParams<T: Real> {
    pub e: [Complex<T>; 3],
    pub sign_s2: Sign,
    pub sign_s3: Sign,
    pub s2: Complex<T>,
    pub s3: Complex<T>,
    pub e_c: Complex<T>,
}

/// A matrix pencil `H(λ) = H0 + λ·H1`.
#[derive(Debug, Clone)]
pub struct Family<T: Real> {
    pub h0: CSymMatrix<T>,
    pub h1: CSymMatrix<T>,
    /// Which constructor produced this family, for reports.
    pub provenance: Option<String>,
}

impl<T: Real> Family<T> {
    pub fn new(h0: CSymMatrix<T>, h1: CSymMatrix<T>) -> Result<Self> {
        if h0.dim() != h1.dim() {
            return Err(Error::Dimension(format!(
                "H0 dim {} vs H1 dim {}",
                h0.dim(),
                h1.dim()
            )));
        }
        Ok(Self {
            h0,
            h1,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, p: impl Into<String>) -> Self {
        self.provenance = Some(p.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    /// `H0 + λ·H1`.
    pub fn at(&self, lambda: Complex<T>) -> CSymMatrix<T> {
        self.h0
            .add(&self.h1.scale(lambda))
            .expect("dims checked at construction")
    }
}

type FamilyBuilder<T> = Arc<dyn Fn(&[T]) -> Result<Family<T>> + Send + Sync>;

/// A family with named real tuning parameters, for the EP searchers.
#[derive(Clone)]
pub struct TunableFamily<T: Real> {
    pub param_names: Vec<String>,
    builder: FamilyBuilder<T>,
}

impl<T: Real> TunableFamily<T> {
    pub fn new(
        param_names: Vec<String>,
        builder: impl Fn(&[T]) -> Result<Family<T>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            param_names,
            builder: Arc::new(builder),
        }
    }

    pub fn n_params(&self) -> usize {
        self.param_names.len()
    }

    pub fn family_at(&self, params: &[T]) -> Result<Family<T>> {
        if params.len() != self.param_names.len() {
            return Err(Error::Dimension(format!(
                "expected {} tuning parameters, got {}",
                self.param_names.len(),
                params.len()
            )));
        }
        (self.builder)(params)
    }
}

impl<T: Real> fmt::Debug for TunableFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TunableFamily")
            .field("param_names", &self.param_names)
            .finish()
    }
}

/// Bundle of the closed-form EP3 reference quantities.
#[derive(Debug, Clone)]
pub struct EP3Reference<T: Real> {
    pub e_c: Complex<T>,
    /// First Puiseux coefficient of the energy expansion.
    pub a1: Complex<T>,
    /// Coalesced eigenvector, third component 1.
    pub psi_ep: CVec<T>,
    /// First eigenvector expansion term (sheet 1), third component 0.
    pub phi1_base: CVec<T>,
}

fn rotation_u<T: Real>(angles: [T; 3]) -> [[T; 3]; 3] {
    let (ca, sa) = (angles[0].cos(), angles[0].sin());
    let (cb, sb) = (angles[1].cos(), angles[1].sin());
    let (cg, sg) = (angles[2].cos(), angles[2].sin());
    let rz = [
        [ca, -sa, T::zero()],
        [sa, ca, T::zero()],
        [T::zero(), T::zero(), T::one()],
    ];
    let ry = [
        [cb, T::zero(), sb],
        [T::zero(), T::one(), T::zero()],
        [-sb, T::zero(), cb],
    ];
    let rx = [
        [T::one(), T::zero(), T::zero()],
        [T::zero(), cg, -sg],
        [T::zero(), sg, cg],
    ];
    let mul = |a: &[[T; 3]; 3], b: &[[T; 3]; 3]| {
        let mut out = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = T::zero();
                for (k, bk) in b.iter().enumerate() {
                    acc = acc + a[i][k] * bk[j];
                }
                out[i][j] = acc;
            }
        }
        out
    };
    mul(&mul(&rz, &ry), &rx)
}

/// `H0 = diag(e)`, `H1 = U·diag(o)·Uᵀ`.
pub fn build_generic<T: Real>(p: &GenericFamilyParams<T>) -> Result<Family<T>> {
    let u = rotation_u(p.angles);
    let zero = Complex::new(T::zero(), T::zero());
    let mut rows = vec![vec![zero; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let mut acc = zero;
            for k in 0..3 {
                acc = acc + p.o[k] * Complex::new(u[i][k] * u[j][k], T::zero());
            }
            rows[i][j] = acc;
            rows[j][i] = acc;
        }
    }
    let h0 = CSymMatrix::diag(&p.e)?;
    let h1 = CSymMatrix::from_rows(&rows)?;
    Ok(Family::new(h0, h1)?.with_provenance("generic"))
}

/// The special `H0` for given energies and couplings; no validity checks.
pub fn special_h0<T: Real>(e: [Complex<T>; 3], s2: Complex<T>, s3: Complex<T>) -> CSymMatrix<T> {
    let zero = Complex::new(T::zero(), T::zero());
    CSymMatrix::from_rows(&[
        vec![e[0], zero, s3],
        vec![zero, e[1], s2],
        vec![s3, s2, e[2]],
    ])
    .expect("symmetric by construction")
}

/// The special `H1`: unit coupling between the first two levels.
pub fn special_h1<T: Real>() -> CSymMatrix<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    CSymMatrix::from_rows(&[
        vec![zero, one, zero],
        vec![one, zero, zero],
        vec![zero, zero, zero],
    ])
    .expect("symmetric by construction")
}

/// Couplings that give `H0` a triple eigenvalue at `E_c = (e1+e2+e3)/3`.
///
/// Principal square roots multiplied by the sign selectors; all four sign
/// choices produce the same characteristic polynomial because only `s2²` and
/// `s3²` enter the determinant.
pub fn ep3_couplings<T: Real>(
    e1: Complex<T>,
    e2: Complex<T>,
    e3: Complex<T>,
    sign_s2: Sign,
    sign_s3: Sign,
) -> Result<SpecialFamilyParams<T>> {
    if (e1 - e2).norm() == T::zero() {
        return Err(Error::SingularConfiguration);
    }
    let d27 = cx::<T>(27.0, 0.0) * (e1 - e2);
    let q2 = e1 - cx::<T>(2.0, 0.0) * e2 + e3;
    let q3 = -cx::<T>(2.0, 0.0) * e1 + e2 + e3;
    let s2 = sign_s2.factor::<T>() * branch_clean(-(q2 * q2 * q2) / d27).sqrt();
    let s3 = sign_s3.factor::<T>() * branch_clean((q3 * q3 * q3) / d27).sqrt();
    let e_c = (e1 + e2 + e3) / cx::<T>(3.0, 0.0);
    Ok(SpecialFamilyParams {
        e: [e1, e2, e3],
        sign_s2,
        sign_s3,
        s2,
        s3,
        e_c,
    })
}

fn check_coupling_invariants<T: Real>(p: &SpecialFamilyParams<T>) -> Result<()> {
    let [e1, e2, e3] = p.e;
    if (e1 - e2).norm() == T::zero() {
        return Err(Error::SingularConfiguration);
    }
    let tol = rl::<T>(1e-12);
    let d27 = cx::<T>(27.0, 0.0) * (e1 - e2);
    let q2 = e1 - cx::<T>(2.0, 0.0) * e2 + e3;
    let q3 = -cx::<T>(2.0, 0.0) * e1 + e2 + e3;
    let rhs2 = -(q2 * q2 * q2) / d27;
    let rhs3 = (q3 * q3 * q3) / d27;
    let ok2 = (p.s2 * p.s2 - rhs2).norm() <= tol * (T::one() + rhs2.norm());
    let ok3 = (p.s3 * p.s3 - rhs3).norm() <= tol * (T::one() + rhs3.norm());
    let ec = (e1 + e2 + e3) / cx::<T>(3.0, 0.0);
    let okc = (p.e_c - ec).norm() <= tol * (T::one() + ec.norm());
    if ok2 && ok3 && okc {
        Ok(())
    } else {
        Err(Error::InvalidParams(
            "couplings do not satisfy the EP3 construction".into(),
        ))
    }
}

/// Assemble the special family after validating the coupling invariants.
pub fn build_special<T: Real>(p: &SpecialFamilyParams<T>) -> Result<Family<T>> {
    check_coupling_invariants(p)?;
    Ok(Family::new(special_h0(p.e, p.s2, p.s3), special_h1())?
        .with_provenance(format!("special(signs {}{})", p.sign_s2, p.sign_s3)))
}

/// The special family as a tunable family over
/// `(Re s2, Im s2, Re s3, Im s3)` with the energies held fixed. The builder
/// places the raw couplings into `H0` without the EP3 invariant checks, so a
/// solver can roam.
pub fn special_coupling_family<T: Real>(e: [Complex<T>; 3]) -> TunableFamily<T> {
    TunableFamily::new(
        vec![
            "re_s2".into(),
            "im_s2".into(),
            "re_s3".into(),
            "im_s3".into(),
        ],
        move |p: &[T]| {
            let s2 = Complex::new(p[0], p[1]);
            let s3 = Complex::new(p[2], p[3]);
            Family::new(special_h0(e, s2, s3), special_h1())
        },
    )
}

/// The 2×2 control family `[[0, λ],[λ, 1]]`, which has second-order
/// exceptional points at λ = ±i/2.
pub fn ep2_control_family<T: Real>() -> Family<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let h0 = CSymMatrix::from_rows(&[vec![zero, zero], vec![zero, one]]).unwrap();
    let h1 = CSymMatrix::from_rows(&[vec![zero, one], vec![one, zero]]).unwrap();
    Family::new(h0, h1).unwrap().with_provenance("ep2-control")
}

/// True iff `H0` has characteristic polynomial `(E − E_c)³` within `tol` and
/// `H0 − E_c·I` has rank exactly 2 — a genuine single Jordan block of size
/// 3, as opposed to a triple eigenvalue with extra geometric multiplicity.
pub fn validate_ep3<T: Real>(h0: &CSymMatrix<T>, e_c: Complex<T>, tol: T) -> Result<bool> {
    if h0.dim() != 3 {
        return Err(Error::Dimension(format!(
            "validate_ep3 needs dim 3, got {}",
            h0.dim()
        )));
    }
    let p = char_poly(h0)?;
    let three = cx::<T>(3.0, 0.0);
    let t2 = -three * e_c;
    let t1 = three * e_c * e_c;
    let t0 = -(e_c * e_c * e_c);
    let scale = (T::one() + h0.max_norm()).powi(3);
    let poly_ok = (p.c2 - t2)
        .norm()
        .max((p.c1 - t1).norm())
        .max((p.c0 - t0).norm())
        <= tol * scale;
    if !poly_ok {
        return Ok(false);
    }
    let shifted = h0.shift(e_c);
    // a (near-)scalar matrix shifts to ~0: diagonalizable degeneracy
    if shifted.max_norm() <= rl::<T>(1e-8) * (T::one() + h0.max_norm()) {
        return Ok(false);
    }
    Ok(shifted.rank(rl::<T>(1e-8)) == 2)
}

/// The coalesced eigenvector, third component 1:
///
/// ```text
/// ( ±√(−2e1+e2+e3)/√(3(e1−e2)),  ±i·√(e1−2e2+e3)/√(3(e1−e2)),  1 )
/// ```
///
/// Principal roots are used and the two component signs are resolved by
/// trying all four combinations against `(H0 − E_c·I)v = 0` and keeping the
/// smallest residual.
pub fn ep_vector<T: Real>(
    e1: Complex<T>,
    e2: Complex<T>,
    e3: Complex<T>,
    sign_s2: Sign,
    sign_s3: Sign,
) -> Result<CVec<T>> {
    let p = ep3_couplings(e1, e2, e3, sign_s2, sign_s3)?;
    let h0 = special_h0(p.e, p.s2, p.s3);
    let shifted = h0.shift(p.e_c);

    let sq3d = branch_clean(cx::<T>(3.0, 0.0) * (e1 - e2)).sqrt();
    let ra = branch_clean(-cx::<T>(2.0, 0.0) * e1 + e2 + e3).sqrt();
    let rb = branch_clean(e1 - cx::<T>(2.0, 0.0) * e2 + e3).sqrt();
    let i = cx::<T>(0.0, 1.0);
    let one = cx::<T>(1.0, 0.0);

    let mut best: Option<(T, CVec<T>)> = None;
    for s1 in [one, -one] {
        for s2 in [one, -one] {
            let v = CVec::new(vec![s1 * ra / sq3d, s2 * i * rb / sq3d, one]);
            let residual = shifted
                .mul_vec(&v)?
                .iter()
                .fold(T::zero(), |acc, c| acc.max(c.norm()));
            if best.as_ref().is_none_or(|(r, _)| residual < *r) {
                best = Some((residual, v));
            }
        }
    }
    let (residual, v) = best.expect("four candidates");
    let required = rl::<T>(1e-6) * (T::one() + h0.max_norm());
    if residual >= required {
        return Err(Error::InconsistentBranch {
            best: residual.to_f64().unwrap_or(f64::NAN),
            required: required.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(v)
}

/// First Puiseux coefficient of the energy splitting,
/// `a1 = 2^{1/3}·√(−(−2e1+e2+e3)(e1−2e2+e3)) / (3·(e1−e2)^{1/3})`,
/// with principal branches. Only |a1| is branch-independent; a zero value
/// signals a degenerate splitting.
pub fn first_order_energy_coeff<T: Real>(
    e1: Complex<T>,
    e2: Complex<T>,
    e3: Complex<T>,
) -> Result<Complex<T>> {
    if (e1 - e2).norm() == T::zero() {
        return Err(Error::SingularConfiguration);
    }
    let q3 = -cx::<T>(2.0, 0.0) * e1 + e2 + e3;
    let q2 = e1 - cx::<T>(2.0, 0.0) * e2 + e3;
    let num = cx::<T>(2f64.cbrt(), 0.0) * branch_clean(-(q3 * q2)).sqrt();
    let den = cx::<T>(3.0, 0.0) * branch_clean(e1 - e2).cbrt();
    Ok(num / den)
}

/// The first eigenvector expansion term on sheet `j ∈ {1,2,3}`:
///
/// ```text
/// ( i·2^{1/3}·√(e1−2e2+e3)/(√3·(e1−e2)^{5/6}),
///  −2^{1/3}·√(−2e1+e2+e3)/(√3·(e1−e2)^{5/6}),
///   0 ) · e^{2i(j−1)π/3}
/// ```
///
/// Principal branches throughout. The overall sign is immaterial to every
/// consumer here (direction-only comparisons, and bilinear orthogonality
/// against the coalesced vector, whose cross terms cancel for either sign).
pub fn phi1_reference<T: Real>(
    e1: Complex<T>,
    e2: Complex<T>,
    e3: Complex<T>,
    j: usize,
) -> Result<CVec<T>> {
    if (e1 - e2).norm() == T::zero() {
        return Err(Error::SingularConfiguration);
    }
    if !(1..=3).contains(&j) {
        return Err(Error::InvalidParams(format!(
            "sheet index {j} outside 1..=3"
        )));
    }
    let q2 = branch_clean(e1 - cx::<T>(2.0, 0.0) * e2 + e3).sqrt();
    let q3 = branch_clean(-cx::<T>(2.0, 0.0) * e1 + e2 + e3).sqrt();
    let den = cx::<T>(3f64.sqrt(), 0.0) * branch_clean(e1 - e2).powf(rl::<T>(5.0 / 6.0));
    let i = cx::<T>(0.0, 1.0);
    let c13 = cx::<T>(2f64.cbrt(), 0.0);
    let phase = Complex::from_polar(
        T::one(),
        rl::<T>(2.0) * T::PI() * rl::<T>((j - 1) as f64) / rl::<T>(3.0),
    );
    Ok(CVec::new(vec![
        i * c13 * q2 / den * phase,
        -c13 * q3 / den * phase,
        Complex::new(T::zero(), T::zero()),
    ]))
}

/// Bundle of the closed-form EP3 reference quantities.
pub fn ep3_reference<T: Real>(
    e1: Complex<T>,
    e2: Complex<T>,
    e3: Complex<T>,
    sign_s2: Sign,
    sign_s3: Sign,
) -> Result<EP3Reference<T>> {
    Ok(EP3Reference {
        e_c: (e1 + e2 + e3) / cx::<T>(3.0, 0.0),
        a1: first_order_energy_coeff(e1, e2, e3)?,
        psi_ep: ep_vector(e1, e2, e3, sign_s2, sign_s3)?,
        phi1_base: phi1_reference(e1, e2, e3, 1)?,
    })
}

#[cfg(test)]
pub(crate) fn e013_family() -> Family<f64> {
    let e = [cx(0.0, 0.0), cx(1.0, 0.0), cx(3.0, 0.0)];
    let p = ep3_couplings(e[0], e[1], e[2], Sign::Plus, Sign::Minus).unwrap();
    build_special(&p).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::{cubic_roots, eigensystem, t_product};
    use num_complex::Complex64 as C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn e013() -> [C64; 3] {
        [c(0.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)]
    }

    #[test]
    fn couplings_e013_values() {
        let [e1, e2, e3] = e013();
        let p = ep3_couplings(e1, e2, e3, Sign::Plus, Sign::Minus).unwrap();
        assert!((p.s2 - c(1.0 / 27f64.sqrt(), 0.0)).norm() < 1e-12);
        assert!((p.s2 - c(0.1924500897, 0.0)).norm() < 1e-9);
        assert!((p.s3 - c(0.0, -8.0 / 27f64.sqrt())).norm() < 1e-12);
        assert!((p.s3 - c(0.0, -1.5396007178)).norm() < 1e-9);
        assert!((p.e_c - c(4.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn couplings_signs_share_char_poly() {
        let [e1, e2, e3] = e013();
        let reference = char_poly(
            &build_special(&ep3_couplings(e1, e2, e3, Sign::Plus, Sign::Plus).unwrap())
                .unwrap()
                .h0,
        )
        .unwrap();
        for ss2 in [Sign::Plus, Sign::Minus] {
            for ss3 in [Sign::Plus, Sign::Minus] {
                let p = ep3_couplings(e1, e2, e3, ss2, ss3).unwrap();
                let cp = char_poly(&build_special(&p).unwrap().h0).unwrap();
                assert!((cp.c2 - reference.c2).norm() < 1e-14);
                assert!((cp.c1 - reference.c1).norm() < 1e-14);
                assert!((cp.c0 - reference.c0).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn couplings_e024_degenerate() {
        let p = ep3_couplings(
            c(0.0, 0.0),
            c(2.0, 0.0),
            c(4.0, 0.0),
            Sign::Plus,
            Sign::Plus,
        )
        .unwrap();
        assert!(p.s2.norm() < 1e-15);
        assert!((p.s3 - c(0.0, 2.0)).norm() < 1e-12);
        assert!((p.e_c - c(2.0, 0.0)).norm() < 1e-15);
        let f = build_special(&p).unwrap();
        // triple eigenvalue but rank 1: an EP2 plus accidental degeneracy
        assert_eq!(f.h0.shift(p.e_c).rank(1e-8), 1);
        assert!(!validate_ep3(&f.h0, p.e_c, 1e-10).unwrap());
    }

    #[test]
    fn couplings_equal_energies_error() {
        assert!(matches!(
            ep3_couplings(
                c(1.0, 0.0),
                c(1.0, 0.0),
                c(3.0, 0.0),
                Sign::Plus,
                Sign::Plus
            ),
            Err(Error::SingularConfiguration)
        ));
    }

    #[test]
    fn build_special_h0_layout() {
        let f = e013_family();
        assert_eq!(f.h0[(0, 0)], c(0.0, 0.0));
        assert_eq!(f.h0[(0, 1)], c(0.0, 0.0));
        assert!((f.h0[(0, 2)] - c(0.0, -1.5396007)).norm() < 1e-6);
    }

    #[test]
    fn build_special_triple_root_char_poly() {
        let f = e013_family();
        let p = char_poly(&f.h0).unwrap();
        // (E - 4/3)³ = E³ - 4E² + 16/3·E - 64/27
        assert!((p.c2 - c(-4.0, 0.0)).norm() < 1e-10);
        assert!((p.c1 - c(16.0 / 3.0, 0.0)).norm() < 1e-10);
        assert!((p.c0 - c(-64.0 / 27.0, 0.0)).norm() < 1e-10);
        for r in cubic_roots(&p) {
            assert!((r - c(4.0 / 3.0, 0.0)).norm() < 1e-4);
        }
    }

    #[test]
    fn build_special_rejects_bad_params() {
        let [e1, e2, e3] = e013();
        let mut p = ep3_couplings(e1, e2, e3, Sign::Plus, Sign::Minus).unwrap();
        p.s2 = p.s2 + c(0.1, 0.0);
        assert!(matches!(build_special(&p), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn h1_eigenvalues() {
        let f = e013_family();
        let es = eigensystem(&f.h1, 1e-8).unwrap();
        let expected = [c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        for (v, e) in es.values.iter().zip(expected) {
            assert!((v - e).norm() < 1e-12);
        }
    }

    #[test]
    fn validate_e013_true() {
        let f = e013_family();
        assert!(validate_ep3(&f.h0, c(4.0 / 3.0, 0.0), 1e-10).unwrap());
    }

    #[test]
    fn validate_scalar_matrix_false() {
        let m = CSymMatrix::diag(&[c(2.0, 1.0); 3]).unwrap();
        assert!(!validate_ep3(&m, c(2.0, 1.0), 1e-10).unwrap());
    }

    #[test]
    fn ep_vector_e013() {
        let [e1, e2, e3] = e013();
        let v = ep_vector(e1, e2, e3, Sign::Plus, Sign::Minus).unwrap();
        assert!((v[0] - c(0.0, -1.1547005)).norm() < 1e-6);
        assert!((v[1] - c(0.5773503, 0.0)).norm() < 1e-6);
        assert_eq!(v[2], c(1.0, 0.0));
        // componentwise residual of (H0 - E_c)v
        let f = e013_family();
        let r = f.h0.shift(c(4.0 / 3.0, 0.0)).mul_vec(&v).unwrap();
        for k in 0..3 {
            assert!(r[k].norm() < 1e-9);
        }
        // self-orthogonality: the defectiveness signature
        assert!(t_product(&v, &v).unwrap().norm() < 1e-12);
    }

    #[test]
    fn ep_vector_direct_solve_oracle() {
        // with v3 = 1 the eigenvector is forced: v1 = -s3/(e1-E_c),
        // v2 = -s2/(e2-E_c); the sign search must land on exactly that
        let [e1, e2, e3] = e013();
        let p = ep3_couplings(e1, e2, e3, Sign::Plus, Sign::Minus).unwrap();
        let v = ep_vector(e1, e2, e3, Sign::Plus, Sign::Minus).unwrap();
        assert!((v[0] - (-p.s3 / (e1 - p.e_c))).norm() < 1e-12);
        assert!((v[1] - (-p.s2 / (e2 - p.e_c))).norm() < 1e-12);
    }

    #[test]
    fn ep_vector_singular_configuration() {
        assert!(matches!(
            ep_vector(
                c(1.0, 0.0),
                c(1.0, 0.0),
                c(3.0, 0.0),
                Sign::Plus,
                Sign::Plus
            ),
            Err(Error::SingularConfiguration)
        ));
    }

    #[test]
    fn a1_magnitude_e013() {
        let [e1, e2, e3] = e013();
        let a1 = first_order_energy_coeff(e1, e2, e3).unwrap();
        assert!((a1.norm() - 2f64.powf(4.0 / 3.0) / 3.0).abs() < 1e-12);
        assert!((a1.norm() - 0.8399473).abs() < 1e-7);
    }

    #[test]
    fn a1_degenerate_zero() {
        // -2e1 + e2 + e3 = 0
        let a1 = first_order_energy_coeff(c(2.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)).unwrap();
        assert_eq!(a1.norm(), 0.0);
    }

    #[test]
    fn phi1_structure() {
        let [e1, e2, e3] = e013();
        let phase = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let psi = ep_vector(e1, e2, e3, Sign::Plus, Sign::Minus).unwrap();
        for j in 1..=3 {
            let phi = phi1_reference(e1, e2, e3, j).unwrap();
            assert_eq!(phi[2], c(0.0, 0.0));
            assert!(t_product(&psi, &phi).unwrap().norm() < 1e-10);
            if j < 3 {
                let next = phi1_reference(e1, e2, e3, j + 1).unwrap();
                for k in 0..2 {
                    assert!((next[k] / phi[k] - phase).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eigensystem_at_the_ep_returns_the_coalesced_vector() {
        // the adjugate of H0 - E_c·I has rank 1 exactly at the EP, so all
        // three (flagged) eigenvalue slots carry the same Jordan-chain
        // eigenvector, the self-orthogonal one
        let f = e013_family();
        let es = eigensystem(&f.h0, 1e-4).unwrap();
        let psi = ep_vector(
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(3.0, 0.0),
            Sign::Plus,
            Sign::Minus,
        )
        .unwrap();
        for j in 0..3 {
            assert!((es.values[j] - c(4.0 / 3.0, 0.0)).norm() < 1e-4);
            assert!(es.condition_flags[j]);
            let cosine = es.vectors[j].hdot(&psi).norm() / (es.vectors[j].norm() * psi.norm());
            assert!(cosine > 1.0 - 1e-8, "sheet {j} cosine {cosine}");
            assert!(es.t_norms[j].norm() < 1e-4, "t_norm {}", es.t_norms[j]);
        }
    }

    #[test]
    fn reference_bundle_is_consistent() {
        let [e1, e2, e3] = e013();
        let r = ep3_reference(e1, e2, e3, Sign::Plus, Sign::Minus).unwrap();
        assert!((r.e_c - c(4.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((r.a1.norm() - 2f64.powf(4.0 / 3.0) / 3.0).abs() < 1e-12);
        assert!(t_product(&r.psi_ep, &r.psi_ep).unwrap().norm() < 1e-10);
        assert!(t_product(&r.psi_ep, &r.phi1_base).unwrap().norm() < 1e-10);
    }

    #[test]
    fn generic_identity_angles() {
        let p = GenericFamilyParams {
            e: e013(),
            o: [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)],
            angles: [0.0, 0.0, 0.0],
        };
        let f = build_generic(&p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j {
                    c(i as f64 + 1.0, 0.0)
                } else {
                    c(0.0, 0.0)
                };
                assert!((f.h1[(i, j)] - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn generic_isotropic_o_commutes() {
        let p = GenericFamilyParams {
            e: e013(),
            o: [c(0.7, -0.2); 3],
            angles: [0.3, -1.1, 2.2],
        };
        let f = build_generic(&p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { c(0.7, -0.2) } else { c(0.0, 0.0) };
                assert!((f.h1[(i, j)] - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn generic_rotated_rank_one() {
        let p = GenericFamilyParams {
            e: e013(),
            o: [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            angles: [std::f64::consts::FRAC_PI_2, 0.0, 0.0],
        };
        let f = build_generic(&p).unwrap();
        let es = eigensystem(&f.h1, 1e-8).unwrap();
        let expected = [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        for (v, e) in es.values.iter().zip(expected) {
            assert!((v - e).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let angles = [
                rng.gen_range(-3.2..3.2),
                rng.gen_range(-3.2..3.2),
                rng.gen_range(-3.2..3.2),
            ];
            let u = rotation_u::<f64>(angles);
            for i in 0..3 {
                for j in 0..3 {
                    let dot: f64 = (0..3).map(|k| u[k][i] * u[k][j]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn random_models_validate_or_flag_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut count = 0;
        while count < 100 {
            let e1 = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let e2 = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let e3 = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if (e1 - e2).norm() <= 0.1 {
                continue;
            }
            count += 1;
            let p = ep3_couplings(e1, e2, e3, Sign::Plus, Sign::Minus).unwrap();
            let f = build_special(&p).unwrap();
            let genuine = validate_ep3(&f.h0, p.e_c, 1e-10).unwrap();
            assert!(
                genuine || (p.s2 * p.s3).norm() < 1e-9,
                "neither a genuine EP3 nor a flagged degenerate construction"
            );
            // trace identity holds exactly
            assert!((p.e.iter().copied().sum::<C64>() - p.e_c * 3.0).norm() < 1e-14);
            // self-orthogonality of the coalesced eigenvector
            if let Ok(v) = ep_vector(e1, e2, e3, Sign::Plus, Sign::Minus) {
                assert!(t_product(&v, &v).unwrap().norm() < 1e-9);
            }
        }
    }
}
