//! Rank-1 sublattices of Z², directional averages of the field, and the
//! geometric-control certifier.
//!
//! For a band-limited field only finitely many primitive sublattices Λ carry
//! nonzero Fourier modes of B; for every other Λ the directional average
//! `I_Λ(B)` is identically the mean flux. (The smooth-field version of this
//! reduction bounds the tail through the Ḣ^{1/2+ε} norm of B − B̂₀; with
//! band-limited inputs the enumeration below is exact and that bound is never
//! needed.) The certifier therefore checks strict positivity of finitely many
//! univariate trigonometric polynomials, each minimized by dense sampling
//! with a Lipschitz slack plus local refinement.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::field::MagneticField;
use crate::TWO_PI;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("rational direction tag inconsistent with theta (theta·e = {dot:.3e})")]
    DirectionMismatch { dot: f64 },
    #[error("mean flux must be positive for control certification (B0 = {0})")]
    NonPositiveMeanFlux(f64),
}

/// Primitive rank-1 sublattice `Λ = Z·e`, canonicalized so the generator is
/// lexicographically positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Sublattice {
    generator: [i64; 2],
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Sublattice {
    /// Canonical sublattice containing the nonzero integer vector `k`.
    pub fn containing(k: [i64; 2]) -> Self {
        assert!(k != [0, 0], "zero vector spans no rank-1 sublattice");
        let g = gcd(k[0], k[1]);
        let mut e = [k[0] / g, k[1] / g];
        let flip = match e[0].cmp(&0) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Equal => e[1] < 0,
            std::cmp::Ordering::Greater => false,
        };
        if flip {
            e = [-e[0], -e[1]];
        }
        Self { generator: e }
    }

    pub fn generator(&self) -> [i64; 2] {
        self.generator
    }

    /// `e_Λ^⊥ = (−e₂, e₁)`.
    pub fn perp(&self) -> [i64; 2] {
        [-self.generator[1], self.generator[0]]
    }

    /// `L_Λ = |e_Λ|`.
    pub fn length(&self) -> f64 {
        let [a, b] = self.generator;
        ((a * a + b * b) as f64).sqrt()
    }

    /// Does the integer vector `k` lie in Λ? Returns the index `j` with
    /// `k = j·e_Λ` when it does.
    pub fn index_of(&self, k: [i64; 2]) -> Option<i64> {
        let [e1, e2] = self.generator;
        let j = if e1 != 0 { k[0] / e1 } else { k[1] / e2 };
        if k[0] == j * e1 && k[1] == j * e2 {
            Some(j)
        } else {
            None
        }
    }
}

/// The canonical primitive sublattices carrying at least one nonzero mode of B.
pub fn relevant_sublattices(field: &MagneticField) -> Vec<Sublattice> {
    let mut set = BTreeSet::new();
    for (&k, c) in field.modes() {
        if k == (0, 0) || c.norm() == 0.0 {
            continue;
        }
        set.insert(Sublattice::containing([k.0, k.1]));
    }
    set.into_iter().collect()
}

/// 1-D Fourier series of `I_Λ(B)` along the `e_Λ` direction:
/// `I_Λ(B)(x) = Σ_j coeffs[j] e^{2πi j (e_Λ·x)}`.
#[derive(Debug, Clone)]
pub struct DirectionalAverage {
    pub lattice: Sublattice,
    coeffs: Vec<(i64, Complex64)>,
}

impl DirectionalAverage {
    pub fn coeff(&self, j: i64) -> Complex64 {
        self.coeffs
            .iter()
            .find(|&&(jj, _)| jj == j)
            .map(|&(_, c)| c)
            .unwrap_or(Complex64::ZERO)
    }

    pub fn coeffs(&self) -> &[(i64, Complex64)] {
        &self.coeffs
    }

    /// Evaluate the 1-periodic profile at `t` (i.e. at any x with `e_Λ·x = t`).
    pub fn eval(&self, t: f64) -> f64 {
        let mut sum = Complex64::ZERO;
        for &(j, c) in &self.coeffs {
            sum += c * Complex64::from_polar(1.0, TWO_PI * j as f64 * t);
        }
        sum.re
    }

    /// Evaluate at a torus point.
    pub fn eval_at(&self, x: [f64; 2]) -> f64 {
        let e = self.lattice.generator();
        self.eval(e[0] as f64 * x[0] + e[1] as f64 * x[1])
    }

    /// Derivative of the profile.
    pub fn eval_deriv(&self, t: f64) -> f64 {
        let mut sum = Complex64::ZERO;
        for &(j, c) in &self.coeffs {
            let w = Complex64::new(0.0, TWO_PI * j as f64);
            sum += w * c * Complex64::from_polar(1.0, TWO_PI * j as f64 * t);
        }
        sum.re
    }

    /// Reinterpret the average as a (1-D) magnetic field, modes at `j·e_Λ`.
    pub fn as_field(&self) -> MagneticField {
        let e = self.lattice.generator();
        let list: Vec<_> = self
            .coeffs
            .iter()
            .map(|&(j, c)| ((j * e[0], j * e[1]), c))
            .collect();
        MagneticField::build(&list).expect("projection of a valid field stays valid")
    }

    /// Lipschitz constant `2π Σ_j |j| L_Λ |c_j|` of `I_Λ(B)` on the torus.
    pub fn lipschitz(&self) -> f64 {
        let l = self.lattice.length();
        self.coeffs
            .iter()
            .map(|&(j, c)| TWO_PI * j.abs() as f64 * l * c.norm())
            .sum()
    }
}

/// Project B onto the modes lying in Λ.
pub fn directional_average(field: &MagneticField, lat: Sublattice) -> DirectionalAverage {
    let mut coeffs = Vec::new();
    for (&k, &c) in field.modes() {
        if let Some(j) = lat.index_of([k.0, k.1]) {
            coeffs.push((j, c));
        }
    }
    coeffs.sort_by_key(|&(j, _)| j);
    DirectionalAverage { lattice: lat, coeffs }
}

/// Direction tag for the ray average `B_∞(x,θ)`.
#[derive(Debug, Clone, Copy)]
pub enum DirectionTag {
    Irrational,
    /// θ is parallel to `e_Λ^⊥` for this Λ.
    Rational(Sublattice),
}

/// The ray average along direction θ: the mean flux for irrational θ, the
/// directional average for rational θ.
#[derive(Debug, Clone)]
pub enum RayAverage {
    Constant(f64),
    Profile(DirectionalAverage),
}

impl RayAverage {
    pub fn eval_at(&self, x: [f64; 2]) -> f64 {
        match self {
            RayAverage::Constant(c) => *c,
            RayAverage::Profile(avg) => avg.eval_at(x),
        }
    }
}

pub fn b_infinity(
    field: &MagneticField,
    theta: [f64; 2],
    tag: DirectionTag,
) -> Result<RayAverage, LatticeError> {
    match tag {
        DirectionTag::Irrational => Ok(RayAverage::Constant(field.flux())),
        DirectionTag::Rational(lat) => {
            let e = lat.generator();
            // θ ∥ e_Λ^⊥  ⟺  θ·e_Λ = 0
            let dot = theta[0] * e[0] as f64 + theta[1] * e[1] as f64;
            let scale = (theta[0].hypot(theta[1])) * lat.length();
            if dot.abs() > 1e-9 * scale.max(1.0) {
                return Err(LatticeError::DirectionMismatch { dot });
            }
            Ok(RayAverage::Profile(directional_average(field, lat)))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlWitness {
    pub e: [i64; 2],
    #[serde(rename = "L")]
    pub length: f64,
    pub min: f64,
    pub argmin: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlCertificate {
    pub verdict: bool,
    pub witnesses: Vec<ControlWitness>,
    pub lattices_checked: usize,
    /// Band-limited input makes the unchecked tail exactly `B̂₀`.
    pub exact: bool,
}

/// Minimum of the 1-periodic profile: dense sampling plus golden-section
/// refinement around the best sample. Returns `(t*, f(t*))`.
fn minimize_profile(avg: &DirectionalAverage, density: usize) -> (f64, f64) {
    let d = density.max(8);
    let mut best_t = 0.0;
    let mut best_v = f64::INFINITY;
    for i in 0..d {
        let t = i as f64 / d as f64;
        let v = avg.eval(t);
        if v < best_v {
            best_v = v;
            best_t = t;
        }
    }
    // Golden-section on the bracket around the best sample.
    let mut a = best_t - 1.0 / d as f64;
    let mut b = best_t + 1.0 / d as f64;
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut c = b - inv_phi * (b - a);
    let mut dd = a + inv_phi * (b - a);
    let mut fc = avg.eval(c);
    let mut fd = avg.eval(dd);
    for _ in 0..120 {
        if fc < fd {
            b = dd;
            dd = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = avg.eval(c);
        } else {
            a = c;
            c = dd;
            fc = fd;
            dd = a + inv_phi * (b - a);
            fd = avg.eval(dd);
        }
    }
    let t = 0.5 * (a + b);
    let v = avg.eval(t);
    if v < best_v {
        (t.rem_euclid(1.0), v)
    } else {
        (best_t, best_v)
    }
}

/// Certify `I_Λ(B) > 0` for every rank-1 sublattice.
///
/// The verdict is strict: a lattice passes only if its sampled minimum
/// exceeds the Lipschitz slack `L/(2·density)`, so that the certified lower
/// bound on the true minimum is positive.
pub fn certify_control(
    field: &MagneticField,
    sample_density: usize,
) -> Result<ControlCertificate, LatticeError> {
    if field.flux() <= 0.0 {
        return Err(LatticeError::NonPositiveMeanFlux(field.flux()));
    }
    let lattices = relevant_sublattices(field);
    let mut verdict = true;
    let mut witnesses = Vec::new();
    for lat in &lattices {
        let avg = directional_average(field, *lat);
        let (t, min) = minimize_profile(&avg, sample_density);
        let slack = avg.lipschitz() / (2.0 * sample_density as f64);
        let samples_min_certified = min - slack;
        if samples_min_certified <= 0.0 {
            verdict = false;
        }
        let e = lat.generator();
        let l2 = (e[0] * e[0] + e[1] * e[1]) as f64;
        witnesses.push(ControlWitness {
            e,
            length: lat.length(),
            min,
            argmin: [t * e[0] as f64 / l2, t * e[1] as f64 / l2],
        });
    }
    Ok(ControlCertificate {
        verdict,
        witnesses,
        lattices_checked: lattices.len(),
        exact: true,
    })
}

/// Anchor of a closed geodesic on which `I_Λ(B)` vanishes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GeodesicAnchor {
    /// Root along the 1-periodic profile variable `t = e_Λ·x`.
    pub t: f64,
    /// A representative point on the geodesic.
    pub anchor: [f64; 2],
}

/// Zero set of `I_Λ(B)` along the `e_Λ` axis, within tolerance `tol`.
///
/// Sign changes are bisected; tangential zeros (local minima with |f| ≤ tol)
/// are picked up by golden-section refinement.
pub fn critical_geodesics(
    field: &MagneticField,
    lat: Sublattice,
    tol: f64,
) -> Vec<GeodesicAnchor> {
    let avg = directional_average(field, lat);
    if avg.coeffs().iter().all(|&(j, _)| j == 0) {
        // Constant profile: either no zeros or (degenerate) everything.
        return if avg.eval(0.0).abs() <= tol {
            vec![anchor_at(0.0, lat)]
        } else {
            Vec::new()
        };
    }
    let samples = 4096;
    let mut roots: Vec<f64> = Vec::new();
    let f = |t: f64| avg.eval(t);
    for i in 0..samples {
        let a = i as f64 / samples as f64;
        let b = (i + 1) as f64 / samples as f64;
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            // bisection
            let (mut lo, mut hi) = (a, b);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if f(lo) * f(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        } else {
            // Tangential zero: local minimum of |f| inside the cell.
            let m = 0.5 * (a + b);
            if f(m).abs() <= tol && f(m).abs() <= fa.abs() && f(m).abs() <= fb.abs() {
                let (t, v) = refine_abs_min(&avg, a, b);
                if v.abs() <= tol {
                    roots.push(t);
                }
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1.0 / samples as f64);
    if roots.len() > 1 {
        // Merge a root at ~1.0 with one at ~0.0 (periodicity).
        if (roots[roots.len() - 1] - 1.0 - roots[0]).abs() < 1.0 / samples as f64 {
            roots.pop();
        }
    }
    roots.into_iter().map(|t| anchor_at(t, lat)).collect()
}

fn anchor_at(t: f64, lat: Sublattice) -> GeodesicAnchor {
    let e = lat.generator();
    let l2 = (e[0] * e[0] + e[1] * e[1]) as f64;
    GeodesicAnchor {
        t,
        anchor: [t * e[0] as f64 / l2, t * e[1] as f64 / l2],
    }
}

fn refine_abs_min(avg: &DirectionalAverage, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let g = |t: f64| avg.eval(t).abs();
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = g(c);
    let mut fd = g(d);
    for _ in 0..120 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = g(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, avg.eval(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::MagneticField;
    use approx::assert_abs_diff_eq;

    fn cosine_field(mean: f64, amp: f64) -> MagneticField {
        MagneticField::build(&[
            ((0, 0), Complex64::new(mean, 0.0)),
            ((1, 0), Complex64::new(amp / 2.0, 0.0)),
            ((-1, 0), Complex64::new(amp / 2.0, 0.0)),
        ])
        .unwrap()
    }

    #[test]
    fn canonicalization_reduces_and_orients() {
        assert_eq!(Sublattice::containing([2, 0]).generator(), [1, 0]);
        assert_eq!(Sublattice::containing([-3, -3]).generator(), [1, 1]);
        assert_eq!(Sublattice::containing([0, -5]).generator(), [0, 1]);
        assert_eq!(Sublattice::containing([-4, 6]).generator(), [2, -3]);
    }

    #[test]
    fn constant_field_has_no_relevant_lattices() {
        assert!(relevant_sublattices(&MagneticField::constant(2)).is_empty());
    }

    #[test]
    fn relevant_lattices_from_modes() {
        let f = cosine_field(TWO_PI, TWO_PI);
        let lats = relevant_sublattices(&f);
        assert_eq!(lats.len(), 1);
        assert_eq!(lats[0].generator(), [1, 0]);

        let f2 = MagneticField::build(&[
            ((0, 0), Complex64::new(TWO_PI, 0.0)),
            ((2, 0), Complex64::new(0.1, 0.0)),
            ((-2, 0), Complex64::new(0.1, 0.0)),
            ((1, 1), Complex64::new(0.2, 0.1)),
            ((-1, -1), Complex64::new(0.2, -0.1)),
        ])
        .unwrap();
        let lats = relevant_sublattices(&f2);
        let gens: Vec<_> = lats.iter().map(|l| l.generator()).collect();
        assert_eq!(gens, vec![[1, 0], [1, 1]]);
    }

    #[test]
    fn directional_average_picks_up_lattice_modes() {
        let f = cosine_field(TWO_PI, TWO_PI);
        let along = directional_average(&f, Sublattice::containing([1, 0]));
        assert_abs_diff_eq!(along.coeff(0).re, TWO_PI, epsilon = 1e-14);
        assert_abs_diff_eq!(along.coeff(1).re, TWO_PI / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(along.coeff(-1).re, TWO_PI / 2.0, epsilon = 1e-14);

        let across = directional_average(&f, Sublattice::containing([0, 1]));
        assert_eq!(across.coeffs().len(), 1);
        assert_abs_diff_eq!(across.coeff(0).re, TWO_PI, epsilon = 1e-14);
    }

    #[test]
    fn directional_average_is_idempotent() {
        let f = MagneticField::build(&[
            ((0, 0), Complex64::new(TWO_PI, 0.0)),
            ((1, 0), Complex64::new(0.4, 0.1)),
            ((2, 0), Complex64::new(-0.2, 0.05)),
            ((1, 1), Complex64::new(0.3, 0.0)),
        ])
        .unwrap();
        let lat = Sublattice::containing([1, 0]);
        let once = directional_average(&f, lat);
        let twice = directional_average(&once.as_field(), lat);
        assert_eq!(once.coeffs().len(), twice.coeffs().len());
        for (&(j1, c1), &(j2, c2)) in once.coeffs().iter().zip(twice.coeffs()) {
            assert_eq!(j1, j2);
            assert!((c1 - c2).norm() < 1e-14);
        }
    }

    #[test]
    fn ray_average_irrational_is_mean_flux() {
        let f = cosine_field(TWO_PI, TWO_PI);
        let theta = [1.0, std::f64::consts::SQRT_2];
        let n = theta[0].hypot(theta[1]);
        let avg = b_infinity(&f, [theta[0] / n, theta[1] / n], DirectionTag::Irrational).unwrap();
        assert!(matches!(avg, RayAverage::Constant(c) if (c - TWO_PI).abs() < 1e-14));
    }

    #[test]
    fn ray_average_rational_keeps_profile() {
        let f = cosine_field(TWO_PI, TWO_PI);
        let lat = Sublattice::containing([1, 0]);
        let avg = b_infinity(&f, [0.0, 1.0], DirectionTag::Rational(lat)).unwrap();
        // average over x₂ leaves the x₁ dependence
        assert_abs_diff_eq!(avg.eval_at([0.0, 0.3]), 2.0 * TWO_PI, epsilon = 1e-12);
        assert_abs_diff_eq!(avg.eval_at([0.5, 0.9]), 0.0, epsilon = 1e-12);

        let err = b_infinity(&f, [1.0, 0.0], DirectionTag::Rational(lat)).unwrap_err();
        assert!(matches!(err, LatticeError::DirectionMismatch { .. }));
    }

    #[test]
    fn ray_average_constant_field() {
        let f = MagneticField::constant(2);
        let lat = Sublattice::containing([1, 0]);
        let avg = b_infinity(&f, [0.0, 1.0], DirectionTag::Rational(lat)).unwrap();
        assert_abs_diff_eq!(avg.eval_at([0.77, 0.1]), 2.0 * TWO_PI, epsilon = 1e-12);
    }

    #[test]
    fn certifier_passes_constant_field() {
        let cert = certify_control(&MagneticField::constant(2), 512).unwrap();
        assert!(cert.verdict);
        assert!(cert.witnesses.is_empty());
        assert_eq!(cert.lattices_checked, 0);
    }

    #[test]
    fn certifier_passes_strictly_positive_profile() {
        // B = 2π + πcos(2πx₁): min π at x₁ = 1/2.
        let f = cosine_field(TWO_PI, TWO_PI / 2.0);
        let cert = certify_control(&f, 2048).unwrap();
        assert!(cert.verdict);
        assert_eq!(cert.witnesses.len(), 1);
        let w = &cert.witnesses[0];
        assert_abs_diff_eq!(w.min, std::f64::consts::PI, epsilon = 1e-9);
        assert_abs_diff_eq!(w.argmin[0], 0.5, epsilon = 1e-6);
    }

    #[test]
    fn certifier_fails_on_touching_zero() {
        // B = 2π + 2πcos(2πx₁): min 0 at x₁ = 1/2 — not strictly positive.
        let f = cosine_field(TWO_PI, TWO_PI);
        let cert = certify_control(&f, 2048).unwrap();
        assert!(!cert.verdict);
        let w = &cert.witnesses[0];
        assert!(w.min.abs() <= 1e-9);
        assert_abs_diff_eq!(w.argmin[0], 0.5, epsilon = 1e-6);
    }

    #[test]
    fn certifier_rejects_nonpositive_flux() {
        let f = MagneticField::build(&[((0, 0), Complex64::new(0.0, 0.0))]).unwrap();
        assert!(matches!(
            certify_control(&f, 128),
            Err(LatticeError::NonPositiveMeanFlux(_))
        ));
    }

    #[test]
    fn critical_geodesics_located() {
        let lat = Sublattice::containing([1, 0]);
        // Constant field: empty.
        assert!(critical_geodesics(&MagneticField::constant(1), lat, 1e-9).is_empty());
        // Tangential zero at t = 1/2.
        let f = cosine_field(TWO_PI, TWO_PI);
        let roots = critical_geodesics(&f, lat, 1e-9);
        assert_eq!(roots.len(), 1);
        assert_abs_diff_eq!(roots[0].t, 0.5, epsilon = 1e-6);
        // Strictly positive: empty.
        let g = cosine_field(TWO_PI, TWO_PI / 2.0);
        assert!(critical_geodesics(&g, lat, 1e-9).is_empty());
    }

    #[test]
    fn certified_pass_implies_no_critical_geodesics() {
        let fields = [
            cosine_field(TWO_PI, TWO_PI / 2.0),
            MagneticField::build(&[
                ((0, 0), Complex64::new(2.0 * TWO_PI, 0.0)),
                ((1, 0), Complex64::new(1.0, 0.5)),
                ((1, 1), Complex64::new(0.7, -0.2)),
            ])
            .unwrap(),
        ];
        for f in &fields {
            let cert = certify_control(f, 4096).unwrap();
            if cert.verdict {
                for lat in relevant_sublattices(f) {
                    assert!(critical_geodesics(f, lat, 1e-9).is_empty());
                }
            }
        }
    }

    #[test]
    fn sampled_minimum_respects_lipschitz_bound() {
        // Sampled min with slack lower-bounds a 10× denser sampling.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let mut list = vec![((0, 0), Complex64::new(TWO_PI, 0.0))];
            for k in 1..=3 {
                let c = Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
                list.push(((k, 0), c));
            }
            let f = MagneticField::build(&list).unwrap();
            let lat = Sublattice::containing([1, 0]);
            let avg = directional_average(&f, lat);
            let density = 64;
            let coarse = (0..density)
                .map(|i| avg.eval(i as f64 / density as f64))
                .fold(f64::INFINITY, f64::min);
            let slack = avg.lipschitz() / (2.0 * density as f64);
            let fine = (0..10 * density)
                .map(|i| avg.eval(i as f64 / (10.0 * density as f64)))
                .fold(f64::INFINITY, f64::min);
            assert!(coarse - slack <= fine + 1e-12);
        }
    }
}
