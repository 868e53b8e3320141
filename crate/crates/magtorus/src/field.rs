//! Band-limited magnetic fields on the torus, flux quantization, and gauge
//! potentials.
//!
//! A field is a finite Fourier series `B(x) = Σ_k B̂_k e^{2πi k·x}` with real
//! values and integer flux `B̂₀ ∈ 2πZ`. The vector potential splits as
//! `A = A⁰ + A^per` where `A⁰(x) = (B̂₀/2)(−x₂, x₁)` carries the mean flux and
//! `A^per` is periodic, chosen here in Coulomb form. Everything is closed-form
//! in the Fourier coefficients, so gauge identities hold to rounding.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::TWO_PI;

pub const FLUX_TOL: f64 = 1e-9;
pub const REALITY_TOL: f64 = 1e-12;
pub const CURL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("flux not quantized: B0/2pi = {ratio} is {residual:.3e} from the nearest integer")]
    FluxNotQuantized { ratio: f64, residual: f64 },
    #[error("field is not real: {0}")]
    NonRealField(String),
}

/// Real band-limited magnetic field stored as Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MagneticField {
    modes: BTreeMap<(i64, i64), Complex64>,
    flux: f64,
    bandlimit: i64,
}

impl MagneticField {
    /// Build a field from a list of `(k, coefficient)` pairs.
    ///
    /// Missing conjugate partners are filled in automatically; conflicting
    /// partners (violating `B̂_{−k} = conj(B̂_k)`) are rejected. The flux
    /// coefficient is snapped to the nearest point of `2πZ` provided it is
    /// within `FLUX_TOL` of one.
    pub fn build(mode_list: &[((i64, i64), Complex64)]) -> Result<Self, FieldError> {
        let mut modes: BTreeMap<(i64, i64), Complex64> = BTreeMap::new();
        for &(k, c) in mode_list {
            if let Some(prev) = modes.get(&k) {
                if (prev - c).norm() > REALITY_TOL {
                    return Err(FieldError::NonRealField(format!(
                        "mode {k:?} given twice with different values"
                    )));
                }
            }
            modes.insert(k, c);
        }

        // Reality: for every stored k, require or insert the conjugate at -k.
        for (k, c) in modes.clone() {
            let neg = (-k.0, -k.1);
            match modes.get(&neg) {
                Some(&cn) => {
                    if (cn - c.conj()).norm() > REALITY_TOL {
                        return Err(FieldError::NonRealField(format!(
                            "modes {k:?} and {neg:?} are not conjugate"
                        )));
                    }
                }
                None => {
                    modes.insert(neg, c.conj());
                }
            }
        }

        let c0 = modes.get(&(0, 0)).copied().unwrap_or(Complex64::ZERO);
        if c0.im.abs() > REALITY_TOL {
            return Err(FieldError::NonRealField(format!(
                "k=0 coefficient has imaginary part {:.3e}",
                c0.im
            )));
        }
        let ratio = c0.re / TWO_PI;
        let residual = (ratio - ratio.round()).abs();
        if residual > FLUX_TOL {
            return Err(FieldError::FluxNotQuantized { ratio, residual });
        }
        let flux = TWO_PI * ratio.round();
        modes.insert((0, 0), Complex64::new(flux, 0.0));

        let bandlimit = modes
            .keys()
            .map(|&(k1, k2)| k1.abs().max(k2.abs()))
            .max()
            .unwrap_or(0);
        Ok(Self { modes, flux, bandlimit })
    }

    /// Constant field `B ≡ 2π·phi`.
    pub fn constant(phi: i64) -> Self {
        Self::build(&[((0, 0), Complex64::new(TWO_PI * phi as f64, 0.0))])
            .expect("constant field is always quantized")
    }

    pub fn flux(&self) -> f64 {
        self.flux
    }

    /// Flux integer `φ = B̂₀ / 2π`.
    pub fn flux_integer(&self) -> i64 {
        (self.flux / TWO_PI).round() as i64
    }

    pub fn bandlimit(&self) -> i64 {
        self.bandlimit
    }

    pub fn mode(&self, k: (i64, i64)) -> Complex64 {
        self.modes.get(&k).copied().unwrap_or(Complex64::ZERO)
    }

    /// Stored modes in deterministic (lexicographic) order.
    pub fn modes(&self) -> impl Iterator<Item = (&(i64, i64), &Complex64)> {
        self.modes.iter()
    }

    /// Evaluate `B(x)` at a point of the fundamental domain.
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let sum = fourier_sum(&self.modes, x);
        assert!(
            sum.im.abs() <= 1e-12 * (1.0 + sum.re.abs()),
            "field evaluation has imaginary residue {:.3e}",
            sum.im
        );
        sum.re
    }
}

fn fourier_sum(modes: &BTreeMap<(i64, i64), Complex64>, x: [f64; 2]) -> Complex64 {
    let mut sum = Complex64::ZERO;
    for (&(k1, k2), &c) in modes {
        let phase = TWO_PI * (k1 as f64 * x[0] + k2 as f64 * x[1]);
        sum += c * Complex64::from_polar(1.0, phase);
    }
    sum
}

/// Real band-limited scalar potential (also used for gauge-shift phases).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScalarPotential {
    modes: BTreeMap<(i64, i64), Complex64>,
}

impl ScalarPotential {
    pub fn build(mode_list: &[((i64, i64), Complex64)]) -> Result<Self, FieldError> {
        let mut modes: BTreeMap<(i64, i64), Complex64> = BTreeMap::new();
        for &(k, c) in mode_list {
            modes.insert(k, c);
        }
        for (k, c) in modes.clone() {
            let neg = (-k.0, -k.1);
            match modes.get(&neg) {
                Some(&cn) => {
                    if (cn - c.conj()).norm() > REALITY_TOL {
                        return Err(FieldError::NonRealField(format!(
                            "modes {k:?} and {neg:?} are not conjugate"
                        )));
                    }
                }
                None => {
                    modes.insert(neg, c.conj());
                }
            }
        }
        Ok(Self { modes })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn bandlimit(&self) -> i64 {
        self.modes
            .keys()
            .map(|&(k1, k2)| k1.abs().max(k2.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn modes(&self) -> impl Iterator<Item = (&(i64, i64), &Complex64)> {
        self.modes.iter()
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        fourier_sum(&self.modes, x).re
    }
}

/// Gauge potential `A = A⁰ + A^per` plus the Aharonov–Bohm offset `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePotential {
    a0_strength: f64,
    aper_modes: BTreeMap<(i64, i64), [Complex64; 2]>,
    alpha: [f64; 2],
}

impl GaugePotential {
    /// Coulomb gauge for the periodic part:
    /// `A^per = (−∂₂ψ, ∂₁ψ)` with `ψ̂_k = −B̂_k / (4π²|k|²)` for `k ≠ 0`.
    pub fn coulomb(field: &MagneticField, alpha: [f64; 2]) -> Self {
        let mut aper_modes = BTreeMap::new();
        for (&k, &c) in field.modes() {
            if k == (0, 0) {
                continue;
            }
            let k1 = k.0 as f64;
            let k2 = k.1 as f64;
            let psi = -c / (TWO_PI * TWO_PI * (k1 * k1 + k2 * k2));
            // (−∂₂ψ, ∂₁ψ) in Fourier: (−2πi k₂ ψ̂, 2πi k₁ ψ̂)
            let i2pi = Complex64::new(0.0, TWO_PI);
            aper_modes.insert(k, [-i2pi * k2 * psi, i2pi * k1 * psi]);
        }
        let gauge = Self {
            a0_strength: field.flux(),
            aper_modes,
            alpha,
        };
        debug_assert!(gauge.curl_residual(field) <= CURL_TOL);
        gauge
    }

    pub fn flux(&self) -> f64 {
        self.a0_strength
    }

    pub fn flux_integer(&self) -> i64 {
        (self.a0_strength / TWO_PI).round() as i64
    }

    pub fn alpha(&self) -> [f64; 2] {
        self.alpha
    }

    pub fn bandlimit(&self) -> i64 {
        self.aper_modes
            .keys()
            .map(|&(k1, k2)| k1.abs().max(k2.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn aper_modes(&self) -> impl Iterator<Item = (&(i64, i64), &[Complex64; 2])> {
        self.aper_modes.iter()
    }

    /// `A⁰(x) = (B̂₀/2)(−x₂, x₁)`, evaluated on unwrapped coordinates.
    pub fn a0(&self, x: [f64; 2]) -> [f64; 2] {
        [-0.5 * self.a0_strength * x[1], 0.5 * self.a0_strength * x[0]]
    }

    /// Periodic part `A^per(x)`.
    pub fn aper(&self, x: [f64; 2]) -> [f64; 2] {
        let mut a = [Complex64::ZERO; 2];
        for (&(k1, k2), c) in &self.aper_modes {
            let phase = TWO_PI * (k1 as f64 * x[0] + k2 as f64 * x[1]);
            let e = Complex64::from_polar(1.0, phase);
            a[0] += c[0] * e;
            a[1] += c[1] * e;
        }
        [a[0].re, a[1].re]
    }

    /// Add a gradient `∇φ` to the periodic part (spectrum-preserving).
    pub fn shifted(&self, phi: &ScalarPotential) -> Self {
        let mut out = self.clone();
        for (&(k1, k2), &c) in phi.modes() {
            if (k1, k2) == (0, 0) {
                continue;
            }
            let i2pi = Complex64::new(0.0, TWO_PI);
            let grad = [i2pi * k1 as f64 * c, i2pi * k2 as f64 * c];
            let entry = out
                .aper_modes
                .entry((k1, k2))
                .or_insert([Complex64::ZERO; 2]);
            entry[0] += grad[0];
            entry[1] += grad[1];
        }
        out
    }

    /// Exact line integral of `A·dl` along the axis-aligned link from `x` to
    /// `x + len·e_dir` (dir 0 or 1), including `A⁰`, `A^per` and `α`.
    pub fn link_integral(&self, x: [f64; 2], dir: usize, len: f64) -> f64 {
        // A⁰ is constant along axis-aligned links.
        let a0 = self.a0(x)[dir];
        let mut total = Complex64::new((a0 + self.alpha[dir]) * len, 0.0);
        for (&(k1, k2), c) in &self.aper_modes {
            let kd = if dir == 0 { k1 } else { k2 } as f64;
            let base = TWO_PI * (k1 as f64 * x[0] + k2 as f64 * x[1]);
            let e = Complex64::from_polar(1.0, base);
            if kd == 0.0 {
                total += c[dir] * e * len;
            } else {
                let w = Complex64::new(0.0, TWO_PI * kd);
                total += c[dir] * e * ((w * len).exp() - 1.0) / w;
            }
        }
        debug_assert!(total.im.abs() <= 1e-10 * (1.0 + total.re.abs()));
        total.re
    }

    /// `max |∂₁A₂ − ∂₂A₁ − B|` over a `4K×4K` grid (spectral, exact for
    /// band-limited data up to rounding).
    pub fn curl_residual(&self, field: &MagneticField) -> f64 {
        // curl A = B̂₀ + curl A^per; compare modewise against B̂_k.
        let mut diff: BTreeMap<(i64, i64), Complex64> = BTreeMap::new();
        for (&k, &c) in field.modes() {
            if k != (0, 0) {
                diff.insert(k, -c);
            }
        }
        for (&(k1, k2), c) in &self.aper_modes {
            let i2pi = Complex64::new(0.0, TWO_PI);
            let curl = i2pi * k1 as f64 * c[1] - i2pi * k2 as f64 * c[0];
            *diff.entry((k1, k2)).or_insert(Complex64::ZERO) += curl;
        }
        let kmax = self.bandlimit().max(field.bandlimit()).max(1);
        let n = (4 * kmax) as usize;
        let mut worst: f64 = 0.0;
        for j1 in 0..n {
            for j2 in 0..n {
                let x = [j1 as f64 / n as f64, j2 as f64 / n as f64];
                worst = worst.max(fourier_sum(&diff, x).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cosine_field(mean: f64, amp: f64) -> MagneticField {
        // B(x) = mean + amp·cos(2πx₁)
        MagneticField::build(&[
            ((0, 0), Complex64::new(mean, 0.0)),
            ((1, 0), Complex64::new(amp / 2.0, 0.0)),
            ((-1, 0), Complex64::new(amp / 2.0, 0.0)),
        ])
        .unwrap()
    }

    #[test]
    fn constant_field_has_integer_flux() {
        let f = MagneticField::constant(2);
        assert_eq!(f.flux_integer(), 2);
        assert_abs_diff_eq!(f.eval([0.3, 0.7]), 2.0 * TWO_PI, epsilon = 1e-12);
    }

    #[test]
    fn cosine_field_evaluates_at_extremes() {
        let f = cosine_field(TWO_PI, TWO_PI);
        assert_abs_diff_eq!(f.eval([0.0, 0.0]), 2.0 * TWO_PI, epsilon = 1e-10);
        assert_abs_diff_eq!(f.eval([0.5, 0.3]), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(f.eval([0.0, 0.9]), 2.0 * TWO_PI, epsilon = 1e-10);
    }

    #[test]
    fn one_sided_mode_is_symmetrized() {
        let f = MagneticField::build(&[
            ((0, 0), Complex64::new(TWO_PI, 0.0)),
            ((1, 0), Complex64::new(0.5, 0.25)),
        ])
        .unwrap();
        assert_eq!(f.mode((-1, 0)), Complex64::new(0.5, -0.25));
        // Reality on a sample of points.
        for &x in &[[0.11, 0.92], [0.5, 0.5], [0.73, 0.02]] {
            f.eval(x); // asserts internally
        }
    }

    #[test]
    fn unquantized_flux_is_rejected() {
        let err = MagneticField::build(&[((0, 0), Complex64::new(3.0, 0.0))]).unwrap_err();
        assert!(matches!(err, FieldError::FluxNotQuantized { .. }));
    }

    #[test]
    fn conflicting_conjugates_are_rejected() {
        let err = MagneticField::build(&[
            ((0, 0), Complex64::new(TWO_PI, 0.0)),
            ((1, 0), Complex64::new(0.5, 0.25)),
            ((-1, 0), Complex64::new(0.5, 0.25)),
        ])
        .unwrap_err();
        assert!(matches!(err, FieldError::NonRealField(_)));
    }

    #[test]
    fn constant_field_has_zero_periodic_gauge() {
        let f = MagneticField::constant(1);
        let g = GaugePotential::coulomb(&f, [0.0, 0.0]);
        assert_eq!(g.aper_modes().count(), 0);
        assert_eq!(g.aper([0.4, 0.1]), [0.0, 0.0]);
    }

    #[test]
    fn cosine_field_gets_sine_gauge() {
        // B − B̂₀ = 2πcos(2πx₁)  ⟹  A^per = (0, sin(2πx₁))
        let f = cosine_field(TWO_PI, TWO_PI);
        let g = GaugePotential::coulomb(&f, [0.0, 0.0]);
        for &x1 in &[0.0, 0.13, 0.25, 0.68] {
            let a = g.aper([x1, 0.44]);
            assert_abs_diff_eq!(a[0], 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(a[1], (TWO_PI * x1).sin(), epsilon = 1e-12);
        }
        assert!(g.curl_residual(&f) <= CURL_TOL);
    }

    #[test]
    fn curl_residual_holds_for_messier_fields() {
        let f = MagneticField::build(&[
            ((0, 0), Complex64::new(2.0 * TWO_PI, 0.0)),
            ((1, 0), Complex64::new(1.0, 0.3)),
            ((2, 1), Complex64::new(-0.4, 0.9)),
            ((0, 3), Complex64::new(0.2, -0.1)),
        ])
        .unwrap();
        let g = GaugePotential::coulomb(&f, [0.1, -0.2]);
        assert!(g.curl_residual(&f) <= CURL_TOL);
    }

    #[test]
    fn gauge_shift_preserves_curl() {
        let f = cosine_field(TWO_PI, TWO_PI);
        let g = GaugePotential::coulomb(&f, [0.0, 0.0]);
        let phi = ScalarPotential::build(&[
            ((0, 1), Complex64::new(0.5, 0.0)),
            ((0, -1), Complex64::new(0.5, 0.0)),
        ])
        .unwrap(); // φ = cos(2πx₂)
        let shifted = g.shifted(&phi);
        // ∇φ = (0, −2π sin(2πx₂))
        for &x in &[[0.2, 0.3], [0.9, 0.77]] {
            let a = shifted.aper(x);
            let base = g.aper(x);
            assert_abs_diff_eq!(a[0] - base[0], 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(
                a[1] - base[1],
                -TWO_PI * (TWO_PI * x[1]).sin(),
                epsilon = 1e-12
            );
        }
        assert!(shifted.curl_residual(&f) <= CURL_TOL);
    }

    #[test]
    fn zero_shift_is_identity() {
        let f = cosine_field(TWO_PI, TWO_PI);
        let g = GaugePotential::coulomb(&f, [0.3, 0.1]);
        let shifted = g.shifted(&ScalarPotential::zero());
        assert_eq!(g, shifted);
    }

    #[test]
    fn link_integral_matches_gradient_difference() {
        // For A^per += ∇φ the link integral changes by exactly φ(end) − φ(start).
        let f = cosine_field(TWO_PI, TWO_PI);
        let g = GaugePotential::coulomb(&f, [0.0, 0.0]);
        let phi = ScalarPotential::build(&[
            ((1, 1), Complex64::new(0.3, 0.2)),
            ((-1, -1), Complex64::new(0.3, -0.2)),
        ])
        .unwrap();
        let shifted = g.shifted(&phi);
        let len = 1.0 / 32.0;
        for &x in &[[0.0, 0.0], [0.5, 0.25], [31.0 / 32.0, 0.8]] {
            for dir in 0..2 {
                let mut end = x;
                end[dir] += len;
                let expect = phi.eval(end) - phi.eval(x);
                let got = shifted.link_integral(x, dir, len) - g.link_integral(x, dir, len);
                assert_abs_diff_eq!(got, expect, epsilon = 1e-12);
            }
        }
    }
}
