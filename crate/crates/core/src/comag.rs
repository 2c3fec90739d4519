//! Dual-species (2ω) and three-frequency (3ω) comagnetometer estimators.
//!
//! Frequencies are angular (rad/s), fields nT, pump power mW. Signs follow
//! the measured quantities: the estimators take absolute values where the
//! defining relations do, and callers pass signed frequencies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{condition_number, det3, mat_vec, solve, Matrix};
use crate::scalar::{lit, Real};
use crate::stats::linear_fit;

/// Ω²ω = (|Rω₁₃₁| − |ω₁₂₉|)/(1 + |R|), assuming B > 0.
pub fn omega_rot_2w<T: Real>(omega_129: T, omega_131: T, ratio: T) -> T {
    ((ratio * omega_131).abs() - omega_129.abs()) / (T::one() + ratio.abs())
}

/// Ω²ω − Ω = −|γ₁₂₉γ₁₃₁|/(|γ₁₂₉| + |γ₁₃₁|)·b_A.
pub fn bias_2w<T: Real>(b_a: T, gamma_129: T, gamma_131: T) -> T {
    let (a, b) = (gamma_129.abs(), gamma_131.abs());
    -(a * b) / (a + b) * b_a
}

/// (ω₁₂₉, Δω₁₂₉, ω₁₃₁) with ω₁₂₉ = (ω₊ + ω₋)/2 and Δω₁₂₉ = |ω₊| − |ω₋|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTriple<T> {
    pub omega_129: T,
    pub delta_omega_129: T,
    pub omega_131: T,
}

impl<T: Real> FrequencyTriple<T> {
    pub fn from_modes(omega_plus: T, omega_minus: T, omega_131: T) -> Self {
        Self {
            omega_129: (omega_plus + omega_minus) / lit(2.0),
            delta_omega_129: omega_plus.abs() - omega_minus.abs(),
            omega_131,
        }
    }

    /// The vector the 3ω system acts on: (|ω₁₂₉|, Δω₁₂₉, |ω₁₃₁|).
    pub fn observed(&self) -> [T; 3] {
        [self.omega_129.abs(), self.delta_omega_129, self.omega_131.abs()]
    }

    /// δ(observed) relative to a reference point.
    pub fn delta_from(&self, reference: &Self) -> [T; 3] {
        let (a, b) = (self.observed(), reference.observed());
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    pub fn is_finite(&self) -> bool {
        self.omega_129.is_finite() && self.delta_omega_129.is_finite() && self.omega_131.is_finite()
    }
}

/// Least-squares slopes of the observed triple against one swept scalar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSlopes<T> {
    pub variable: String,
    /// ∂(|ω₁₂₉|, Δω₁₂₉, |ω₁₃₁|)/∂x.
    pub slopes: [T; 3],
    pub std_errors: [T; 3],
    pub intercepts: [T; 3],
    pub n_points: usize,
}

/// OLS slope of each observed frequency versus the swept variable `which`
/// (B₀, P_pump or any other scalar control).
pub fn calibrate<T: Real>(sweep: &[(T, FrequencyTriple<T>)], which: &str) -> Result<SweepSlopes<T>> {
    if sweep.len() < 3 {
        return Err(Error::InvalidInput(format!("calibration needs >= 3 sweep points, got {}", sweep.len())));
    }
    if sweep.iter().any(|(x, f)| !x.is_finite() || !f.is_finite()) {
        return Err(Error::NonFinite("calibration sweep"));
    }
    let x: Vec<T> = sweep.iter().map(|(x, _)| *x).collect();
    let mut out = SweepSlopes {
        variable: which.to_string(),
        slopes: [T::zero(); 3],
        std_errors: [T::zero(); 3],
        intercepts: [T::zero(); 3],
        n_points: sweep.len(),
    };
    for k in 0..3 {
        let y: Vec<T> = sweep.iter().map(|(_, f)| f.observed()[k]).collect();
        let fit = linear_fit(&x, &y)
            .ok_or_else(|| Error::RankDeficient(format!("swept variable '{which}' is constant")))?;
        out.slopes[k] = fit.slope;
        out.std_errors[k] = fit.slope_se;
        out.intercepts[k] = fit.intercept;
    }
    Ok(out)
}

/// Response matrix δ(|ω₁₂₉|, Δω₁₂₉, |ω₁₃₁|) = M·δ(B₀, P_pump, Ω_rot).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationMatrix<T> {
    pub matrix: [[T; 3]; 3],
    /// Pump-power column (χ₁, χ₂, χ₃).
    pub chi: [T; 3],
    /// Standard errors of the estimated columns, when they came from sweeps.
    pub b0_std_errors: Option<[T; 3]>,
    pub chi_std_errors: Option<[T; 3]>,
    pub determinant: T,
    /// κ₁(M).
    pub condition: T,
}

impl<T: Real> CalibrationMatrix<T> {
    /// Builds and checks a matrix from its three columns.
    pub fn from_columns(b0: [T; 3], pump: [T; 3], rotation: [T; 3]) -> Result<Self> {
        let m: Matrix<T> = (0..3).map(|i| vec![b0[i], pump[i], rotation[i]]).collect();
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("calibration matrix"));
        }
        let det = det3(&m);
        let norm = |c: &[T; 3]| c.iter().map(|v| *v * *v).sum::<T>().sqrt();
        let scale = norm(&b0) * norm(&pump) * norm(&rotation);
        if !(det.abs() > lit::<T>(1e3) * T::epsilon() * scale) {
            return Err(Error::DegenerateCalibration(det.as_f64()));
        }
        let condition = condition_number(&m).map_err(|_| Error::DegenerateCalibration(det.as_f64()))?;
        let mut matrix = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                matrix[i][j] = m[i][j];
            }
        }
        Ok(Self {
            matrix,
            chi: pump,
            b0_std_errors: None,
            chi_std_errors: None,
            determinant: det,
            condition,
        })
    }

    /// The structured form [[|γ₁₂₉|, χ₁, −1], [0, χ₂, 0], [|γ₁₃₁|, χ₃, 1]].
    pub fn structured(gamma_129: T, gamma_131: T, chi: [T; 3]) -> Result<Self> {
        Self::from_columns(
            [gamma_129.abs(), T::zero(), gamma_131.abs()],
            chi,
            [-T::one(), T::zero(), T::one()],
        )
    }

    /// Full matrix from a B₀ sweep and a pump sweep; no entry is assumed zero.
    /// The rotation column is (−1, 0, 1) since Ω_rot adds to ω with the sign
    /// fixed by each species' precession direction.
    pub fn from_sweeps(b0: &SweepSlopes<T>, pump: &SweepSlopes<T>) -> Result<Self> {
        let mut cal = Self::from_columns(b0.slopes, pump.slopes, [-T::one(), T::zero(), T::one()])?;
        cal.b0_std_errors = Some(b0.std_errors);
        cal.chi_std_errors = Some(pump.std_errors);
        Ok(cal)
    }

    fn as_matrix(&self) -> Matrix<T> {
        self.matrix.iter().map(|r| r.to_vec()).collect()
    }

    /// Forward model: observed increments for given (δB₀, δP, δΩ).
    pub fn apply(&self, d: [T; 3]) -> [T; 3] {
        let v = mat_vec(&self.as_matrix(), &d);
        [v[0], v[1], v[2]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeOmegaSolution<T> {
    pub d_b0: T,
    pub d_pump: T,
    pub d_omega_rot: T,
}

/// Solves M·(δB₀, δP, δΩ) = δ(|ω₁₂₉|, Δω₁₂₉, |ω₁₃₁|).
pub fn omega_rot_3w<T: Real>(delta: [T; 3], cal: &CalibrationMatrix<T>) -> Result<ThreeOmegaSolution<T>> {
    if delta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("frequency increments"));
    }
    let x = solve(&cal.as_matrix(), &delta).map_err(|_| Error::DegenerateCalibration(cal.determinant.as_f64()))?;
    Ok(ThreeOmegaSolution {
        d_b0: x[0],
        d_pump: x[1],
        d_omega_rot: x[2],
    })
}

/// Synthetic frequencies for a pump-power drift: the observed triple moves
/// with P_pump along χ while B₀ and Ω_rot stay fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpDriftScenario<T> {
    pub gamma_129: T,
    pub gamma_131: T,
    /// nT.
    pub b0: T,
    /// rad/s.
    pub omega_rot: T,
    /// rad/s at the reference pump power.
    pub splitting: T,
    /// rad·s⁻¹·mW⁻¹.
    pub chi: [T; 3],
    /// mW.
    pub p_ref: T,
}

impl<T: Real> PumpDriftScenario<T> {
    /// Signed frequencies at pump power `p`.
    pub fn triple(&self, p: T) -> FrequencyTriple<T> {
        let dp = p - self.p_ref;
        let w129 = self.gamma_129 * self.b0 + self.omega_rot;
        let w131 = self.gamma_131 * self.b0 + self.omega_rot;
        let s129 = if w129 < T::zero() { -T::one() } else { T::one() };
        let s131 = if w131 < T::zero() { -T::one() } else { T::one() };
        FrequencyTriple {
            omega_129: s129 * (w129.abs() + self.chi[0] * dp),
            delta_omega_129: self.splitting + self.chi[1] * dp,
            omega_131: s131 * (w131.abs() + self.chi[2] * dp),
        }
    }

    /// δ(|ω₁₂₉|, Δω₁₂₉, |ω₁₃₁|) from the reference power, formed without
    /// subtracting the large carrier frequencies.
    pub fn increments(&self, p: T) -> [T; 3] {
        let dp = p - self.p_ref;
        [self.chi[0] * dp, self.chi[1] * dp, self.chi[2] * dp]
    }

    pub fn calibration(&self) -> Result<CalibrationMatrix<T>> {
        CalibrationMatrix::structured(self.gamma_129, self.gamma_131, self.chi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GAMMA_129_HZ_PER_NT, GYRO_RATIO_129_131};
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn gammas() -> (f64, f64) {
        let g129 = TAU * GAMMA_129_HZ_PER_NT;
        (g129, g129 / GYRO_RATIO_129_131)
    }

    #[test]
    fn uniform_field_cancels() {
        let (g129, g131) = gammas();
        let b = 21.86e3;
        assert!(omega_rot_2w(g129 * b, g131 * b, GYRO_RATIO_129_131).abs() < 1e-12);
        let om = TAU * 1e-3;
        let est = omega_rot_2w(g129 * b + om, g131 * b + om, GYRO_RATIO_129_131);
        // R and γ₁₃₁ = γ₁₂₉/R are consistent, so only rounding remains.
        assert!((est - om).abs() < 1e-12, "{}", est - om);
    }

    #[test]
    fn bias_matches_substitution() {
        let (g129, g131) = gammas();
        let (b0, om) = (21.86e3, TAU * 2e-4);
        for (ba129, ba131) in [(12.0, 11.0), (-3.0, 4.5), (0.0, 0.0)] {
            let w129 = g129 * (b0 + ba129) + om;
            let w131 = g131 * (b0 + ba131) + om;
            let est = omega_rot_2w(w129, w131, GYRO_RATIO_129_131);
            let bias = bias_2w(ba129 - ba131, g129, g131);
            assert!((est - om - bias).abs() < 1e-11, "{} vs {}", est - om, bias);
        }
        assert_eq!(bias_2w(0.0, g129, g131), 0.0);
        assert_eq!(bias_2w(-1.0, g129, g131), -bias_2w(1.0, g129, g131));
    }

    #[test]
    fn structured_determinant() {
        let (g129, g131) = gammas();
        let chi = [TAU * -1.57e-3, TAU * 0.075e-3, TAU * -0.452e-3];
        let cal = CalibrationMatrix::structured(g129, g131, chi).unwrap();
        let expect = chi[1] * (g129.abs() + g131.abs());
        assert!((cal.determinant - expect).abs() < 1e-15);
        assert!(matches!(
            CalibrationMatrix::structured(g129, g131, [1.0, 0.0, 2.0]),
            Err(Error::DegenerateCalibration(_))
        ));
    }

    #[test]
    fn calibrate_recovers_slopes() {
        let (g129, g131) = gammas();
        let sweep: Vec<(f64, FrequencyTriple<f64>)> = (0..7)
            .map(|i| {
                let b = 21_000.0 + 100.0 * i as f64;
                (b, FrequencyTriple { omega_129: g129 * b, delta_omega_129: 0.3, omega_131: g131 * b })
            })
            .collect();
        let s = calibrate(&sweep, "B0").unwrap();
        assert!((s.slopes[0] - g129.abs()).abs() < 1e-12);
        assert!(s.slopes[1].abs() < 1e-15);
        assert!((s.slopes[2] - g131.abs()).abs() < 1e-12);
        let flat: Vec<_> = sweep.iter().map(|(_, f)| (1.0, *f)).collect();
        assert!(matches!(calibrate(&flat, "B0"), Err(Error::RankDeficient(_))));
        assert!(calibrate(&sweep[..2], "B0").is_err());
    }

    #[test]
    fn zero_increments_give_zero() {
        let (g129, g131) = gammas();
        let cal = CalibrationMatrix::structured(g129, g131, [0.1, 0.02, -0.03]).unwrap();
        let s = omega_rot_3w([0.0; 3], &cal).unwrap();
        assert_eq!((s.d_b0, s.d_pump, s.d_omega_rot), (0.0, 0.0, 0.0));
    }

    proptest! {
        #[test]
        fn forward_then_solve_is_identity(
            db in -50.0f64..50.0, dp in -20.0f64..20.0, dw in -0.01f64..0.01,
            c1 in -0.02f64..0.02, c2 in 1e-4f64..0.01, c3 in -0.02f64..0.02,
        ) {
            let (g129, g131) = gammas();
            let cal = CalibrationMatrix::structured(g129, g131, [c1, c2, c3]).unwrap();
            let s = omega_rot_3w(cal.apply([db, dp, dw]), &cal).unwrap();
            let tol = 1e-12 * cal.condition;
            prop_assert!((s.d_b0 - db).abs() <= tol * (1.0 + db.abs()));
            prop_assert!((s.d_pump - dp).abs() <= tol * (1.0 + dp.abs()));
            prop_assert!((s.d_omega_rot - dw).abs() <= tol);
        }

        #[test]
        fn two_omega_ignores_uniform_field_changes(b in 1e3f64..5e4, db in -100.0f64..100.0, om in -0.01f64..0.01) {
            let (g129, g131) = gammas();
            let a = omega_rot_2w(g129 * b + om, g131 * b + om, GYRO_RATIO_129_131);
            let c = omega_rot_2w(g129 * (b + db) + om, g131 * (b + db) + om, GYRO_RATIO_129_131);
            prop_assert!((a - c).abs() < 1e-10);
        }
    }

    #[test]
    fn pump_drift_null() {
        let (g129, g131) = gammas();
        let chi = [TAU * -1.57e-3, TAU * 0.075e-3, TAU * -0.452e-3];
        let sc = PumpDriftScenario { gamma_129: g129, gamma_131: g131, b0: 21.86e3, omega_rot: 0.0, splitting: 0.2, chi, p_ref: 100.0 };
        let cal = sc.calibration().unwrap();
        let r = sc.triple(100.0);
        for p in [80.0, 95.0, 120.0] {
            let s = omega_rot_3w(sc.triple(p).delta_from(&r), &cal).unwrap();
            assert!(s.d_omega_rot.abs() < 1e-11);
            assert!((s.d_pump - (p - 100.0)).abs() < 1e-7);
            let exact = omega_rot_3w(sc.increments(p), &cal).unwrap();
            assert!(exact.d_omega_rot.abs() < 1e-16, "{}", exact.d_omega_rot);
        }
    }
}
