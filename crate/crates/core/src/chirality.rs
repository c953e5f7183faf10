//! Chirality classification of the three levels around an EP3.
//!
//! Near the singularity the three eigenvalues form a near-equilateral
//! triangle. Ordering them by real part and asking whether the middle one
//! has the largest width (most negative imaginary part) or the smallest
//! splits the configurations into two classes. The coalesced state expands
//! over the bilinearly normalized eigenvectors `χ_j = ψ_j/√(ψ_jᵀψ_j)` with
//! coefficients `c_j` of equal magnitude and phases spaced by 120°; which
//! level leads and which lags is tied to the width pattern. Plotting
//! `(cos Φ_k, sin Φ_k, Re E_k)` for the assigned phases `Φ` produces a
//! helix whose handedness is the classification: broadest-middle gives the
//! right-handed phase ladder Φ = (0°, 120°, 240°), narrowest-middle the
//! mirrored one.
//!
//! The square-root branch of each `√(ψᵀψ)` is fixed at a reference radius
//! by factoring the norm through the sheet's cube root of `λ−λ_c`, and then
//! carried to the evaluation point by sign continuity along the ray. That
//! convention makes the signed phases reproducible; the physically robust
//! statement is the branch-insensitive alignment of the cubed phases.

use num_complex::Complex;

use crate::cmatrix::{t_product, CVec, EigenSet};
use crate::continuation::{seed_at, track_through};
use crate::model::Family;
use crate::puiseux::sheet_roots;
use crate::{branch_clean, rl, Error, Real, Result};

/// Reference radius where the square-root branches are anchored.
pub const BRANCH_REFERENCE_RADIUS: f64 = 1e-2;

/// Levels sorted ascending by real part.
#[derive(Debug, Clone)]
pub struct OrderedLevels<T: Real> {
    pub energies: [Complex<T>; 3],
    /// Rank position (0-based) of each input sheet: `perm_from_sheets[j]`
    /// is where sheet j+1 landed.
    pub perm_from_sheets: [usize; 3],
    pub re_gaps: [T; 2],
}

/// Which level carries the extremal width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthVariant {
    /// Im(E2) strictly below both neighbors: the middle level is broadest.
    MiddleBroadest,
    /// Im(E2) strictly above both neighbors: the middle level is narrowest.
    MiddleNarrowest,
}

#[derive(Debug, Clone)]
pub struct WidthPattern<T: Real> {
    pub variant: WidthVariant,
    /// How decisively Im(E2) clears the nearer competitor.
    pub margin: T,
}

/// Expansion coefficients of the coalesced state over the normalized basis.
#[derive(Debug, Clone)]
pub struct PhaseReport<T: Real> {
    /// Coefficients by rank (E1, E2, E3).
    pub c: [Complex<T>; 3],
    /// Common magnitude scale (mean of |c_j|): `|ξ|·r^{1/3}`.
    pub xi_magnitude: T,
    /// Fitted permutation (j1, j2, j3) of (0, 1, 2): phases nearest to
    /// `e^{2πi·j_k/3}` relative to the E1 state.
    pub perm: [usize; 3],
    /// Offsets in degrees relative to the E1-ranked coefficient;
    /// `phase_offsets_deg[0] = 0`.
    pub phase_offsets_deg: [T; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Handedness {
    Left,
    Right,
}

impl std::fmt::Display for Handedness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Handedness::Left => "Left",
            Handedness::Right => "Right",
        })
    }
}

/// The full verdict: ordering, width pattern, measured phases, handedness,
/// and the three helix points.
#[derive(Debug, Clone)]
pub struct ChiralityReport<T: Real> {
    pub ordered: OrderedLevels<T>,
    pub width: WidthPattern<T>,
    pub phases: PhaseReport<T>,
    /// Assigned phases by rank, degrees: (0, 120, 240) or (0, 240, 120).
    pub assigned_phases_deg: [T; 3],
    pub handedness: Handedness,
    /// `(cos Φ_k, sin Φ_k, Re E_k)` in ascending-Re order.
    pub helix: [[T; 3]; 3],
}

/// Sort three labeled eigenvalues ascending by real part.
///
/// Ties in the real parts (within 1e-10 of the real-part spread) are
/// rejected as non-generic.
pub fn order_levels<T: Real>(
    energies: &[Complex<T>],
    sheet_labels: &[usize],
) -> Result<OrderedLevels<T>> {
    if energies.len() != 3 || sheet_labels.len() != 3 {
        return Err(Error::Dimension(
            "level ordering needs exactly three levels".into(),
        ));
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| energies[a].re.partial_cmp(&energies[b].re).unwrap());
    let sorted = [energies[idx[0]], energies[idx[1]], energies[idx[2]]];
    let spread = sorted[2].re - sorted[0].re;
    let tol = rl::<T>(1e-10) * spread;
    if sorted[1].re - sorted[0].re <= tol || sorted[2].re - sorted[1].re <= tol {
        return Err(Error::NonGenericTie);
    }
    let mut perm_from_sheets = [0usize; 3];
    for (rank, &i) in idx.iter().enumerate() {
        perm_from_sheets[sheet_labels[i] - 1] = rank;
    }
    Ok(OrderedLevels {
        energies: sorted,
        perm_from_sheets,
        re_gaps: [sorted[1].re - sorted[0].re, sorted[2].re - sorted[1].re],
    })
}

/// Classify the imaginary-part pattern of the ordered levels. Im(E2) must
/// be strictly extremal; anything else is indeterminate.
pub fn width_pattern<T: Real>(ol: &OrderedLevels<T>) -> Result<WidthPattern<T>> {
    let (i1, i2, i3) = (ol.energies[0].im, ol.energies[1].im, ol.energies[2].im);
    let low = i1.min(i3);
    let high = i1.max(i3);
    if i2 < low {
        Ok(WidthPattern {
            variant: WidthVariant::MiddleBroadest,
            margin: low - i2,
        })
    } else if i2 > high {
        Ok(WidthPattern {
            variant: WidthVariant::MiddleNarrowest,
            margin: i2 - high,
        })
    } else {
        let margin = (i2 - low).min(high - i2);
        Err(Error::IndeterminatePattern {
            margin: margin.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Tracked, bilinearly normalized eigenstates at `lam` with the joint
/// square-root branch anchored at the reference radius.
struct BranchedState<T: Real> {
    /// Per sheet (cube-root pairing): energy and χ at the target.
    energies: Vec<Complex<T>>,
    chis: Vec<CVec<T>>,
}

fn branched_state<T: Real>(
    f: &Family<T>,
    lam: Complex<T>,
    center: Complex<T>,
) -> Result<BranchedState<T>> {
    if f.dim() != 3 {
        return Err(Error::Dimension("chirality needs a 3×3 family".into()));
    }
    let z = lam - center;
    let r_t = z.norm();
    if r_t == T::zero() {
        return Err(Error::OnSingularity {
            lambda_re: lam.re.to_f64().unwrap_or(f64::NAN),
            lambda_im: lam.im.to_f64().unwrap_or(f64::NAN),
        });
    }
    let dir = z / Complex::new(r_t, T::zero());
    let r_ref = rl::<T>(BRANCH_REFERENCE_RADIUS).max(r_t);

    // geometric ladder from the reference radius down to the target
    let decades = (r_ref / r_t).log10().max(T::zero());
    let legs = (decades.to_f64().unwrap_or(0.0) * 12.0).ceil() as usize;
    let mut radii = Vec::with_capacity(legs + 2);
    radii.push(r_ref);
    for k in 1..=legs {
        let t = rl::<T>(k as f64 / (legs + 1) as f64);
        radii.push((r_ref.ln() + (r_t.ln() - r_ref.ln()) * t).exp());
    }
    radii.push(r_t);
    radii.dedup_by(|a, b| *a == *b);

    let waypoints: Vec<Complex<T>> = radii
        .iter()
        .map(|&r| center + dir * Complex::new(r, T::zero()))
        .collect();
    let seed = seed_at(f, waypoints[0])?;
    // a target at or beyond the reference radius needs no inward tracking:
    // the branch is anchored directly at the point
    let branches = if waypoints.len() == 1 {
        let path = crate::continuation::LambdaPath {
            samples: waypoints,
            closed: false,
        };
        crate::continuation::track(f, &path, &seed)?
    } else {
        track_through(f, &waypoints, &seed, 8)?
    };
    let n = branches.len();

    // detect normalization fallbacks: tracked vectors carry vᵀv = 1 only
    // while the bilinear normalization stayed regular
    for b in &branches {
        for v in &b.vectors {
            let self_product = t_product(v, v)?;
            if (self_product - Complex::new(T::one(), T::zero())).norm() > rl::<T>(1e-6) {
                return Err(Error::BranchTracking {
                    overlap: self_product.norm().to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }

    // cube-root pairing at the target radius, where the ratios are purest
    let e_c = branches
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |a, b| {
            a + *b.energies.last().unwrap()
        })
        / Complex::new(rl::<T>(3.0), T::zero());
    let target_energies: Vec<Complex<T>> = branches
        .iter()
        .map(|b| *b.energies.last().unwrap())
        .collect();
    let roots_t = sheet_roots(dir * Complex::new(r_t, T::zero()), 3);
    let mut best: Option<(Vec<usize>, T)> = None;
    for p in [
        [0usize, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ] {
        let ratios: Vec<Complex<T>> = target_energies
            .iter()
            .enumerate()
            .map(|(b, e)| (e - e_c) / roots_t[p[b]])
            .collect();
        let mean = ratios
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |a, r| a + r)
            / Complex::new(rl::<T>(3.0), T::zero());
        let spread = ratios.iter().fold(T::zero(), |a, r| a + (r - mean).norm());
        if best.as_ref().is_none_or(|(_, s)| spread < *s) {
            best = Some((p.to_vec(), spread));
        }
    }
    let assignment = best.expect("non-empty permutation set").0;

    // joint branch at the reference: √N_j factors through the sheet's cube
    // root, so flip any branch whose principal square root disagrees with
    // ω_j·√(N_j/ω_j²)
    let roots_ref = sheet_roots(dir * Complex::new(r_ref, T::zero()), 3);
    let one = Complex::new(T::one(), T::zero());
    let mut energies = vec![Complex::new(T::zero(), T::zero()); n];
    let mut chis = vec![CVec::zeros(3); n];
    for (b, branch) in branches.iter().enumerate() {
        let sheet = assignment[b];
        let omega = roots_ref[sheet];
        let n_ref = branch.t_norms[0];
        let principal = branch_clean(n_ref).sqrt();
        let joint = omega * branch_clean(n_ref / (omega * omega)).sqrt();
        let ratio = principal / joint;
        let sign = if ratio.re < T::zero() { -one } else { one };
        energies[sheet] = *branch.energies.last().unwrap();
        chis[sheet] = branch.vectors.last().unwrap().scale(sign);
    }
    Ok(BranchedState { energies, chis })
}

fn wrap_deg<T: Real>(deg: T) -> T {
    let full = rl::<T>(360.0);
    let mut x = deg % full;
    if x > rl::<T>(180.0) {
        x = x - full;
    }
    if x <= rl::<T>(-180.0) {
        x = x + full;
    }
    x
}

/// Expansion coefficients `c_j = χ_jᵀ·ψ_EP` of the coalesced state over the
/// normalized eigenbasis at `lam`, with the square-root branches anchored
/// at the reference radius and carried inward by sign continuity.
pub fn phase_coefficients<T: Real>(
    f: &Family<T>,
    lam: Complex<T>,
    center: Complex<T>,
    psi_ep: &CVec<T>,
) -> Result<PhaseReport<T>> {
    let state = branched_state(f, lam, center)?;
    let ordered = order_levels(&state.energies, &[1, 2, 3])?;

    // coefficients by rank
    let mut c = [Complex::new(T::zero(), T::zero()); 3];
    for sheet in 0..3 {
        let rank = ordered.perm_from_sheets[sheet];
        c[rank] = t_product(&state.chis[sheet], psi_ep)?;
    }
    let xi_magnitude = (c[0].norm() + c[1].norm() + c[2].norm()) / rl::<T>(3.0);

    let mut phase_offsets_deg = [T::zero(); 3];
    let mut perm = [0usize; 3];
    for k in 1..3 {
        let offset = wrap_deg((c[k] / c[0]).arg().to_degrees());
        phase_offsets_deg[k] = offset;
        // nearest of 0° → 0, +120° → 1, −120° → 2
        let candidates = [
            (T::zero(), 0usize),
            (rl::<T>(120.0), 1),
            (rl::<T>(-120.0), 2),
        ];
        perm[k] = candidates
            .iter()
            .min_by(|a, b| {
                wrap_deg(offset - a.0)
                    .abs()
                    .partial_cmp(&wrap_deg(offset - b.0).abs())
                    .unwrap()
            })
            .unwrap()
            .1;
    }
    Ok(PhaseReport {
        c,
        xi_magnitude,
        perm,
        phase_offsets_deg,
    })
}

/// Helix points `(cos Φ_k, sin Φ_k, Re E_k)` for phases in degrees and
/// levels in ascending-Re order.
pub fn helix_points<T: Real>(phases_deg: &[T; 3], re_energies: &[T; 3]) -> [[T; 3]; 3] {
    let mut out = [[T::zero(); 3]; 3];
    for k in 0..3 {
        let phi = phases_deg[k].to_radians();
        out[k] = [phi.cos(), phi.sin(), re_energies[k]];
    }
    out
}

/// Order, classify, and measure the levels at `lam`, assign phases from
/// the width pattern, cross-check them against the measured coefficients,
/// and emit the handedness verdict with the helix points.
///
/// Broadest middle level ⇒ Φ = (0°, +120°, 240°) and a right-handed helix;
/// narrowest middle ⇒ Φ = (0°, 240°, 120°) and a left-handed one. Measured
/// offsets deviating from the assignment by more than 5° are reported as an
/// inconsistency rather than silently overridden.
pub fn classify<T: Real>(
    f: &Family<T>,
    lam: Complex<T>,
    center: Complex<T>,
    psi_ep: &CVec<T>,
) -> Result<ChiralityReport<T>> {
    let state = branched_state(f, lam, center)?;
    let ordered = order_levels(&state.energies, &[1, 2, 3])?;
    let width = width_pattern(&ordered)?;
    let phases = phase_coefficients(f, lam, center, psi_ep)?;

    let assigned_phases_deg = match width.variant {
        WidthVariant::MiddleBroadest => [T::zero(), rl::<T>(120.0), rl::<T>(240.0)],
        WidthVariant::MiddleNarrowest => [T::zero(), rl::<T>(240.0), rl::<T>(120.0)],
    };
    let mut max_dev = T::zero();
    for k in 0..3 {
        let dev = wrap_deg(phases.phase_offsets_deg[k] - assigned_phases_deg[k]).abs();
        max_dev = max_dev.max(dev);
    }
    if max_dev > rl::<T>(5.0) {
        return Err(Error::InconsistentPhases {
            max_deviation_deg: max_dev.to_f64().unwrap_or(f64::NAN),
        });
    }

    let handedness = match width.variant {
        WidthVariant::MiddleBroadest => Handedness::Right,
        WidthVariant::MiddleNarrowest => Handedness::Left,
    };
    let re_energies = [
        ordered.energies[0].re,
        ordered.energies[1].re,
        ordered.energies[2].re,
    ];
    let helix = helix_points(&assigned_phases_deg, &re_energies);
    Ok(ChiralityReport {
        ordered,
        width,
        phases,
        assigned_phases_deg,
        handedness,
        helix,
    })
}

/// Convenience: order levels straight from an eigenset with 1..N labels.
pub fn order_eigenset<T: Real>(es: &EigenSet<T>) -> Result<OrderedLevels<T>> {
    order_levels(&es.values, &[1, 2, 3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_special, e013_family, ep3_couplings, ep_vector, Sign};
    use num_complex::Complex64 as C64;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    // the (+,+) coupling branch: s2*s3 = +0.296i puts the broadest level in
    // the middle for small positive real lambda (the sign product enters the
    // characteristic polynomial through the -2*s2*s3*lambda term)
    fn e013_pp() -> Family<f64> {
        let p = ep3_couplings(
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(3.0, 0.0),
            Sign::Plus,
            Sign::Plus,
        )
        .unwrap();
        build_special(&p).unwrap()
    }

    fn psi013() -> CVec<f64> {
        ep_vector(
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(3.0, 0.0),
            Sign::Plus,
            Sign::Plus,
        )
        .unwrap()
    }

    #[test]
    fn order_levels_real_triple() {
        let ol = order_levels(&[c(3.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)], &[1, 2, 3]).unwrap();
        assert_eq!(ol.energies[0], c(1.0, 0.0));
        assert_eq!(ol.energies[1], c(2.0, 0.0));
        assert_eq!(ol.energies[2], c(3.0, 0.0));
        // sheet 1 (value 3) landed at rank 2, sheet 2 at rank 0, sheet 3 at 1
        assert_eq!(ol.perm_from_sheets, [2, 0, 1]);
        assert_eq!(ol.re_gaps, [1.0, 1.0]);
    }

    #[test]
    fn order_levels_e013_small_lambda() {
        let f = e013_family();
        let es = crate::continuation::seed_at(&f, c(1e-3, 0.0)).unwrap();
        let ol = order_eigenset(&es).unwrap();
        assert!((ol.energies[0].re - 1.261).abs() < 2e-3);
        assert!((ol.energies[1].re - 1.333).abs() < 2e-3);
        assert!((ol.energies[2].re - 1.406).abs() < 2e-3);
    }

    #[test]
    fn order_levels_tie_rejected() {
        assert!(matches!(
            order_levels(&[c(1.0, 0.0), c(1.0, 0.5), c(2.0, 0.0)], &[1, 2, 3]),
            Err(Error::NonGenericTie)
        ));
    }

    #[test]
    fn width_pattern_cases() {
        let broad = order_levels(
            &[c(1.261, 0.042), c(1.333, -0.084), c(1.406, 0.042)],
            &[1, 2, 3],
        )
        .unwrap();
        let wp = width_pattern(&broad).unwrap();
        assert_eq!(wp.variant, WidthVariant::MiddleBroadest);
        assert!((wp.margin - 0.126).abs() < 1e-12);

        let narrow =
            order_levels(&[c(1.0, -0.1), c(2.0, -0.05), c(3.0, -0.2)], &[1, 2, 3]).unwrap();
        assert_eq!(
            width_pattern(&narrow).unwrap().variant,
            WidthVariant::MiddleNarrowest
        );

        let tie = order_levels(&[c(1.0, -0.1), c(2.0, -0.1), c(3.0, -0.2)], &[1, 2, 3]).unwrap();
        assert!(matches!(
            width_pattern(&tie),
            Err(Error::IndeterminatePattern { .. })
        ));
    }

    #[test]
    fn phase_coefficients_e013() {
        let f = e013_pp();
        let report = phase_coefficients(&f, c(1e-6, 0.0), c(0.0, 0.0), &psi013()).unwrap();
        // equal magnitudes within 0.5%
        let mags: Vec<f64> = report.c.iter().map(|x| x.norm()).collect();
        let max = mags.iter().cloned().fold(0.0, f64::max);
        let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(
            max / min - 1.0 <= 5e-3,
            "magnitude spread {}",
            max / min - 1.0
        );
        // offsets: one +120, one -120, within 0.5°
        let offsets = [report.phase_offsets_deg[1], report.phase_offsets_deg[2]];
        assert!(
            offsets.iter().any(|&o| (o - 120.0).abs() < 0.5),
            "{offsets:?}"
        );
        assert!(
            offsets.iter().any(|&o| (o + 120.0).abs() < 0.5),
            "{offsets:?}"
        );
        // branch-insensitive cube-phase alignment within 1.5°
        for i in 0..3 {
            for j in 0..3 {
                let ci = report.c[i];
                let cj = report.c[j];
                let cube_dev = ((ci * ci * ci) / (cj * cj * cj)).arg().to_degrees().abs();
                assert!(cube_dev <= 1.5, "cube phases {cube_dev}°");
            }
        }
        // permutation hits each of 0, 1, 2 exactly once
        let mut seen = [false; 3];
        for &j in &report.perm {
            seen[j] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn classify_e013_small_real_lambda() {
        let f = e013_pp();
        let report = classify(&f, c(1e-3, 0.0), c(0.0, 0.0), &psi013()).unwrap();
        assert_eq!(report.width.variant, WidthVariant::MiddleBroadest);
        assert_eq!(report.handedness, Handedness::Right);
        assert_eq!(report.assigned_phases_deg, [0.0, 120.0, 240.0]);
        let expected = [
            [1.0, 0.0, 1.261],
            [-0.5, 3f64.sqrt() / 2.0, 1.333],
            [-0.5, -(3f64.sqrt()) / 2.0, 1.406],
        ];
        for (point, want) in report.helix.iter().zip(expected.iter()) {
            assert!((point[0] - want[0]).abs() < 1e-9);
            assert!((point[1] - want[1]).abs() < 1e-9);
            assert!((point[2] - want[2]).abs() < 2e-3);
        }
    }

    #[test]
    fn classify_flips_at_opposite_ray() {
        // rotating arg λ by π rotates the splitting triangle by 60°, which
        // swaps the width classes and mirrors the helix
        let f = e013_pp();
        let report = classify(&f, c(-1e-3, 0.0), c(0.0, 0.0), &psi013()).unwrap();
        assert_eq!(report.width.variant, WidthVariant::MiddleNarrowest);
        assert_eq!(report.handedness, Handedness::Left);
        assert_eq!(report.assigned_phases_deg, [0.0, 240.0, 120.0]);
    }

    #[test]
    fn classify_invariant_under_sixty_degree_ray_rotation() {
        // a π/3 rotation of arg λ turns the triangle by only 20°, well
        // inside the 30° margin of this model's pattern class
        let f = e013_pp();
        let lam = C64::from_polar(1e-3, std::f64::consts::PI / 3.0);
        let report = classify(&f, lam, c(0.0, 0.0), &psi013()).unwrap();
        assert_eq!(report.width.variant, WidthVariant::MiddleBroadest);
        assert_eq!(report.handedness, Handedness::Right);
    }

    #[test]
    fn handedness_constant_within_regime_around_loop() {
        let f = e013_pp();
        let psi = psi013();
        for k in 0..12 {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / 12.0;
            let lam = C64::from_polar(1e-3, angle);
            match classify(&f, lam, c(0.0, 0.0), &psi) {
                Ok(report) => {
                    let expect = match report.width.variant {
                        WidthVariant::MiddleBroadest => Handedness::Right,
                        WidthVariant::MiddleNarrowest => Handedness::Left,
                    };
                    assert_eq!(report.handedness, expect);
                }
                // rays where Im(E2) or Re parts tie are legitimately
                // indeterminate or non-generic
                Err(Error::IndeterminatePattern { .. }) | Err(Error::NonGenericTie) => {}
                Err(e) => panic!("unexpected error at angle {angle}: {e}"),
            }
        }
    }

    #[test]
    fn handedness_stable_under_radius_halving() {
        let f = e013_pp();
        let psi = psi013();
        let a = classify(&f, c(1e-3, 0.0), c(0.0, 0.0), &psi).unwrap();
        let b = classify(&f, c(5e-4, 0.0), c(0.0, 0.0), &psi).unwrap();
        assert_eq!(a.handedness, b.handedness);
    }

    #[test]
    fn classify_at_and_beyond_the_reference_radius() {
        // targets at or outside the branch anchor need no inward tracking;
        // the pattern still resolves while the phase corrections stay
        // inside the cross-check margin
        let f = e013_pp();
        let psi = psi013();
        let report = classify(&f, c(0.02, 0.0), c(0.0, 0.0), &psi).unwrap();
        assert_eq!(report.width.variant, WidthVariant::MiddleBroadest);
        assert_eq!(report.handedness, Handedness::Right);
        // far outside the asymptotic regime the measured phases no longer
        // match any 120° assignment and classification refuses
        assert!(matches!(
            classify(&f, c(0.05, 0.0), c(0.0, 0.0), &psi),
            Err(Error::InconsistentPhases { .. })
        ));
    }

    #[test]
    fn classify_flags_wrong_reference_vector() {
        // the (+,−) branch vector is not the coalesced state of the (+,+)
        // family; its measured phases disagree with the width-predicted
        // assignment and the cross-check refuses to classify
        let f = e013_pp();
        let wrong = ep_vector(
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(3.0, 0.0),
            Sign::Plus,
            Sign::Minus,
        )
        .unwrap();
        assert!(matches!(
            classify(&f, c(1e-3, 0.0), c(0.0, 0.0), &wrong),
            Err(Error::InconsistentPhases { .. })
        ));
    }

    #[test]
    fn helix_mirror() {
        let re = [1.261, 1.333, 1.406];
        let right = helix_points(&[0.0, 120.0, 240.0], &re);
        let left = helix_points(&[0.0, 240.0, 120.0], &re);
        // mirrored helix swaps the second and third azimuths
        assert_eq!(right[1][0], left[2][0]);
        assert_eq!(right[1][1], left[2][1]);
        assert_eq!(right[2][0], left[1][0]);
        assert_eq!(right[2][1], left[1][1]);
    }
}
