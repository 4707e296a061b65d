//! Scalar constitutive laws: the double-well potential, the growth regulator
//! `h`, the heat conductivity `κ(θ) = 1 + |θ|^q` and its Kirchhoff transform
//! `K(θ) = ∫₀^θ κ`, plus the model parameter record.

use crate::error::{Error, Result};

/// Double-well potential `F(φ) = φ²(1 − φ)²`.
pub fn double_well(phi: f64) -> f64 {
    let a = phi * (1.0 - phi);
    a * a
}

/// `F'(φ) = 4φ³ − 6φ² + 2φ`.
pub fn double_well_prime(phi: f64) -> f64 {
    4.0 * phi * phi * phi - 6.0 * phi * phi + 2.0 * phi
}

/// Convex part of `F'`, treated implicitly: `4φ³ + 2φ`.
pub fn double_well_prime_convex(phi: f64) -> f64 {
    4.0 * phi * phi * phi + 2.0 * phi
}

/// Derivative of the convex part: `12φ² + 2`.
pub fn double_well_second_convex(phi: f64) -> f64 {
    12.0 * phi * phi + 2.0
}

/// Concave part of `F'`, treated explicitly: `−6φ²`.
pub fn double_well_prime_concave(phi: f64) -> f64 {
    -6.0 * phi * phi
}

/// Cubic smoothstep regulator: 0 below 0, `r²(3 − 2r)` on `[0, 1]`, 1 above.
pub fn regulator_h(r: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else if r >= 1.0 {
        1.0
    } else {
        r * r * (3.0 - 2.0 * r)
    }
}

/// Derivative of [`regulator_h`]: `6r(1 − r)` on `[0, 1]`, 0 outside.
pub fn regulator_h_prime(r: f64) -> f64 {
    if r <= 0.0 || r >= 1.0 {
        0.0
    } else {
        6.0 * r * (1.0 - r)
    }
}

/// `|r|^q`, with `0^q = 0` returned exactly.
#[inline]
pub fn abs_pow(r: f64, q: f64) -> f64 {
    let a = r.abs();
    if a == 0.0 {
        0.0
    } else {
        (q * a.ln()).exp()
    }
}

/// Heat conductivity `κ(θ) = 1 + |θ|^q`.
pub fn conductivity(theta: f64, q: f64) -> f64 {
    1.0 + abs_pow(theta, q)
}

/// `κ'(θ) = q|θ|^{q−1} sign(θ)`.
pub fn conductivity_prime(theta: f64, q: f64) -> f64 {
    if theta == 0.0 {
        0.0
    } else {
        q * abs_pow(theta, q - 1.0) * theta.signum()
    }
}

/// Kirchhoff transform `K(θ) = θ + θ|θ|^q/(q + 1)`.
pub fn kirchhoff(theta: f64, q: f64) -> f64 {
    theta + theta * abs_pow(theta, q) / (q + 1.0)
}

const KIRCHHOFF_INVERSE_MAX_ITER: usize = 100;

/// Inverts [`kirchhoff`] by Newton's method safeguarded with bisection on
/// `[−|u|, |u|]` (valid because `κ ≥ 1` forces `|K⁻¹(u)| ≤ |u|`).
pub fn kirchhoff_inverse(u: f64, q: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::validation("tolerance", "must be > 0"));
    }
    if !u.is_finite() {
        return Err(Error::NonFinite {
            context: "kirchhoff_inverse",
            cell: 0,
        });
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (-u.abs(), u.abs());
    let mut x = u / (1.0 + abs_pow(u, q) / (q + 1.0));
    for _ in 0..KIRCHHOFF_INVERSE_MAX_ITER {
        let f = kirchhoff(x, q) - u;
        if f.abs() <= tol {
            return Ok(x);
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - f / conductivity(x, q);
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * u.abs() {
            // bracket collapsed to roundoff; x is as good as it gets
            let f = kirchhoff(x, q) - u;
            if f.abs() <= tol {
                return Ok(x);
            }
            break;
        }
    }
    Err(Error::IterationLimit {
        solver: "kirchhoff_inverse",
        iterations: KIRCHHOFF_INVERSE_MAX_ITER,
        residual: (kirchhoff(x, q) - u).abs(),
    })
}

/// Choice of the regulator `h`. Every choice is C¹, nondecreasing, bounded,
/// with `h(0) = 0` and `h ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regulator {
    /// Cubic smoothstep, see [`regulator_h`].
    #[default]
    SmoothStep,
    /// `r²/(1 + r²)` for `r ≥ 0`, 0 otherwise.
    Saturating,
}

impl Regulator {
    pub const ALL: [Regulator; 2] = [Regulator::SmoothStep, Regulator::Saturating];

    pub fn eval(self, r: f64) -> f64 {
        match self {
            Regulator::SmoothStep => regulator_h(r),
            Regulator::Saturating => {
                if r <= 0.0 {
                    0.0
                } else {
                    let r2 = r * r;
                    r2 / (1.0 + r2)
                }
            }
        }
    }

    pub fn derivative(self, r: f64) -> f64 {
        match self {
            Regulator::SmoothStep => regulator_h_prime(r),
            Regulator::Saturating => {
                if r <= 0.0 {
                    0.0
                } else {
                    let d = 1.0 + r * r;
                    2.0 * r / (d * d)
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regulator::SmoothStep => "smoothstep",
            Regulator::Saturating => "saturating",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == name)
    }
}

/// Scalar constants of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Tumor proliferation rate 𝒫.
    pub proliferation: f64,
    /// Apoptosis rate 𝒜.
    pub apoptosis: f64,
    /// Nutrient consumption rate 𝒞.
    pub consumption: f64,
    /// Blood-tissue transfer rate ℬ.
    pub transfer: f64,
    /// Nutrient level of the vasculature σ_B, in `[0, 1]`.
    pub vascular_nutrient: f64,
    /// Relaxation modulus β.
    pub relaxation: f64,
    /// Specific heat c_V.
    pub specific_heat: f64,
    /// Interface width ε.
    pub interface: f64,
    /// Conductivity exponent q ≥ 2.
    pub conductivity_exponent: f64,
    pub regulator: Regulator,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            proliferation: 1.0,
            apoptosis: 0.5,
            consumption: 1.0,
            transfer: 1.0,
            vascular_nutrient: 1.0,
            relaxation: 1.0,
            specific_heat: 1.0,
            interface: 1.0,
            conductivity_exponent: 2.0,
            regulator: Regulator::SmoothStep,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("proliferation", self.proliferation),
            ("apoptosis", self.apoptosis),
            ("consumption", self.consumption),
            ("transfer", self.transfer),
            ("relaxation", self.relaxation),
            ("specific_heat", self.specific_heat),
            ("interface", self.interface),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, format!("{v} violates {name} > 0")));
            }
        }
        let sb = self.vascular_nutrient;
        if !(0.0..=1.0).contains(&sb) {
            return Err(Error::validation(
                "vascular_nutrient",
                format!("{sb} violates σ_B ∈ [0,1]"),
            ));
        }
        let q = self.conductivity_exponent;
        if !(q.is_finite() && q >= 2.0) {
            return Err(Error::validation(
                "conductivity_exponent",
                format!("{q} violates q ≥ 2"),
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn h(&self, r: f64) -> f64 {
        self.regulator.eval(r)
    }

    #[inline]
    pub fn kappa(&self, theta: f64) -> f64 {
        conductivity(theta, self.conductivity_exponent)
    }

    #[inline]
    pub fn kirchhoff(&self, theta: f64) -> f64 {
        kirchhoff(theta, self.conductivity_exponent)
    }

    /// Growth source `γ = (𝒫σ − 𝒜)h(φ)`.
    #[inline]
    pub fn growth_source(&self, phi: f64, sigma: f64) -> f64 {
        (self.proliferation * sigma - self.apoptosis) * self.h(phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn double_well_values() {
        assert_eq!(double_well(0.0), 0.0);
        assert_eq!(double_well(1.0), 0.0);
        assert_eq!(double_well(0.5), 0.0625);
        assert_eq!(double_well_prime(0.0), 0.0);
        assert_eq!(double_well_prime(1.0), 0.0);
        assert_eq!(double_well_prime(0.5), 0.0);
        assert_eq!(double_well_prime(2.0), 12.0);
    }

    #[test]
    fn split_sums_to_derivative() {
        for &p in &[-1.3, 0.0, 0.2, 0.9, 2.5] {
            let s = double_well_prime_convex(p) + double_well_prime_concave(p);
            assert!((s - double_well_prime(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn regulator_values() {
        assert_eq!(regulator_h(0.0), 0.0);
        assert_eq!(regulator_h(1.0), 1.0);
        assert_eq!(regulator_h(0.5), 0.5);
        assert_eq!(regulator_h(-3.0), 0.0);
        assert_eq!(regulator_h_prime(0.0), 0.0);
        assert_eq!(regulator_h_prime(0.5), 1.5);
        assert_eq!(regulator_h_prime(2.0), 0.0);
    }

    #[test]
    fn conductivity_and_kirchhoff_values() {
        assert_eq!(conductivity(0.0, 2.0), 1.0);
        assert_eq!(conductivity(2.0, 2.0), 5.0);
        assert_eq!(conductivity(-2.0, 2.0), 5.0);
        assert_eq!(kirchhoff(0.0, 2.0), 0.0);
        assert!((kirchhoff(1.0, 2.0) - 4.0 / 3.0).abs() < 1e-15);
        assert!((kirchhoff(-1.0, 2.0) + 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn kirchhoff_inverse_values() {
        assert_eq!(kirchhoff_inverse(0.0, 2.0, 1e-12).unwrap(), 0.0);
        let x = kirchhoff_inverse(4.0 / 3.0, 2.0, 1e-12).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
        for &x in &[-3.0, 0.1, 7.0] {
            let back = kirchhoff_inverse(kirchhoff(x, 2.0), 2.0, 1e-12).unwrap();
            assert!((back - x).abs() < 1e-12, "{x} -> {back}");
        }
        assert!(kirchhoff_inverse(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::default().validate().is_ok());
        let bad = ModelParams {
            vascular_nutrient: 1.5,
            ..Default::default()
        };
        let msg = bad.validate().unwrap_err().to_string();
        assert!(msg.contains("σ_B ∈ [0,1]"), "{msg}");
        let bad = ModelParams {
            conductivity_exponent: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().unwrap_err().to_string().contains("q ≥ 2"));
        let bad = ModelParams {
            apoptosis: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn double_well_matches_central_difference(phi in -2.0f64..3.0) {
            let d = 1e-4;
            prop_assert!(double_well(phi) >= 0.0);
            let fd = (double_well(phi + d) - double_well(phi - d)) / (2.0 * d);
            prop_assert!((fd - double_well_prime(phi)).abs() < 1e-6);
        }

        #[test]
        fn regulators_are_monotone_and_bounded(a in -3.0f64..4.0, b in -3.0f64..4.0) {
            for reg in Regulator::ALL {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(reg.eval(lo) <= reg.eval(hi));
                prop_assert!((0.0..=1.0).contains(&reg.eval(a)));
                prop_assert!(reg.derivative(a) >= 0.0);
                prop_assert!(reg.eval(a).abs() + reg.derivative(a).abs() <= 2.5);
                let d = 1e-6;
                let fd = (reg.eval(a + d) - reg.eval(a - d)) / (2.0 * d);
                prop_assert!((fd - reg.derivative(a)).abs() < 1e-5);
            }
            prop_assert_eq!(Regulator::SmoothStep.eval(0.0), 0.0);
            prop_assert_eq!(Regulator::Saturating.eval(0.0), 0.0);
        }

        #[test]
        fn kirchhoff_monotone_with_bounded_secant(a in -10.0f64..10.0, b in -10.0f64..10.0, q in 2.0f64..8.0) {
            prop_assert!(conductivity(a, q) >= 1.0);
            prop_assume!((a - b).abs() > 1e-9);
            let secant = (kirchhoff(a, q) - kirchhoff(b, q)) / (a - b);
            prop_assert!(secant > 0.0);
            let upper = 1.0 + abs_pow(a.abs().max(b.abs()), q);
            prop_assert!(secant >= 1.0 - 1e-9 * upper);
            prop_assert!(secant <= upper * (1.0 + 1e-9));
        }

        #[test]
        fn kirchhoff_round_trip(x in -10.0f64..10.0, y in -3.0f64..3.0, q in 2.0f64..8.0) {
            let tol = 1e-10;
            for (x, q) in [(x, 2.0), (y, q)] {
                let back = kirchhoff_inverse(kirchhoff(x, q), q, tol).unwrap();
                prop_assert!((kirchhoff(back, q) - kirchhoff(x, q)).abs() <= tol);
                // |Δθ| ≤ |ΔK| since κ ≥ 1
                prop_assert!((back - x).abs() <= tol);
            }
        }
    }
}
