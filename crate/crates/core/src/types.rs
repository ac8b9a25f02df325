//! Shared domain types and planar angle/pose arithmetic.
//!
//! All angles are radians. Headings are stored wrapped to `(-pi, pi]` at
//! public boundaries; intermediate sums may leave that range. All values
//! are `f64`; 32-bit is an opt-in inference mode handled by the model
//! layer, never by these types.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of IMU channels in a window (accel x,y,z then gyro x,y,z).
pub const CHANNELS: usize = 6;

/// Default IMU sample rate in Hz.
pub const DEFAULT_RATE_HZ: f64 = 100.0;

/// One timestamped 6-axis inertial reading in the device frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    /// Seconds, monotonic within a sequence.
    pub t: f64,
    /// Acceleration in m/s^2.
    pub accel: [f64; 3],
    /// Angular rate in rad/s.
    pub gyro: [f64; 3],
    /// Magnetic field in uT, if recorded.
    pub mag: Option<[f64; 3]>,
}

impl ImuSample {
    pub fn new(t: f64, accel: [f64; 3], gyro: [f64; 3]) -> Result<Self> {
        let s = ImuSample {
            t,
            accel,
            gyro,
            mag: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.t.is_finite()
            && self.accel.iter().all(|v| v.is_finite())
            && self.gyro.iter().all(|v| v.is_finite())
            && self
                .mag
                .map_or(true, |m| m.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::invalid("non-finite IMU sample component"));
        }
        if self.t < 0.0 {
            return Err(Error::invalid(format!("negative timestamp {}", self.t)));
        }
        Ok(())
    }

    /// The six model channels in canonical order.
    pub fn channels(&self) -> [f64; CHANNELS] {
        [
            self.accel[0],
            self.accel[1],
            self.accel[2],
            self.gyro[0],
            self.gyro[1],
            self.gyro[2],
        ]
    }
}

/// An ordered IMU recording with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImuSequence {
    samples: Vec<ImuSample>,
    nominal_rate: f64,
}

impl ImuSequence {
    pub fn new(samples: Vec<ImuSample>, nominal_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("empty IMU sequence"));
        }
        if !(nominal_rate.is_finite() && nominal_rate > 0.0) {
            return Err(Error::invalid("nominal rate must be positive"));
        }
        for s in &samples {
            s.validate()?;
        }
        for pair in samples.windows(2) {
            if pair[1].t <= pair[0].t {
                return Err(Error::invalid(format!(
                    "timestamps not strictly increasing at t={}",
                    pair[1].t
                )));
            }
        }
        Ok(ImuSequence {
            samples,
            nominal_rate,
        })
    }

    pub fn samples(&self) -> &[ImuSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn nominal_rate(&self) -> f64 {
        self.nominal_rate
    }

    pub fn start_time(&self) -> f64 {
        self.samples[0].t
    }

    pub fn duration(&self) -> f64 {
        self.samples[self.samples.len() - 1].t - self.samples[0].t
    }
}

/// Sliding-window geometry: frames per window and hop between starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub n: usize,
    pub stride: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig { n: 200, stride: 10 }
    }
}

impl WindowConfig {
    pub fn new(n: usize, stride: usize) -> Result<Self> {
        let cfg = WindowConfig { n, stride };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 || self.stride > self.n {
            return Err(Error::invalid(format!(
                "stride must satisfy 1 <= stride <= n, got n={} stride={}",
                self.n, self.stride
            )));
        }
        Ok(())
    }
}

/// A fixed-length segment of IMU frames, `n x 6` row-major
/// (accel x,y,z then gyro x,y,z per row).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    data: Vec<f64>,
    start_index: usize,
    normalized: bool,
}

impl Window {
    pub fn new(data: Vec<f64>, n: usize, start_index: usize, normalized: bool) -> Result<Self> {
        if data.len() != n * CHANNELS {
            return Err(Error::shape(format!(
                "window data length {} != {}x{}",
                data.len(),
                n,
                CHANNELS
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("non-finite window entry"));
        }
        Ok(Window {
            data,
            start_index,
            normalized,
        })
    }

    pub fn n(&self) -> usize {
        self.data.len() / CHANNELS
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * CHANNELS..(t + 1) * CHANNELS]
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub(crate) fn with_data(&self, data: Vec<f64>, normalized: bool) -> Window {
        debug_assert_eq!(data.len(), self.data.len());
        Window {
            data,
            start_index: self.start_index,
            normalized,
        }
    }
}

/// Displacement length and heading change over one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarDelta {
    /// Meters, >= 0.
    pub dl: f64,
    /// Radians in (-pi, pi].
    pub dpsi: f64,
}

impl PolarDelta {
    pub fn new(dl: f64, dpsi: f64) -> Result<Self> {
        if !(dl.is_finite() && dpsi.is_finite()) {
            return Err(Error::invalid("non-finite polar delta"));
        }
        if dl < 0.0 {
            return Err(Error::invalid(format!("negative displacement {dl}")));
        }
        Ok(PolarDelta {
            dl,
            dpsi: wrap_angle(dpsi),
        })
    }

    pub const ZERO: PolarDelta = PolarDelta { dl: 0.0, dpsi: 0.0 };
}

/// Planar position plus heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    /// Radians in (-pi, pi].
    pub psi: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, psi: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && psi.is_finite()) {
            return Err(Error::invalid("non-finite pose component"));
        }
        Ok(Pose2D {
            x,
            y,
            psi: wrap_angle(psi),
        })
    }

    pub const ORIGIN: Pose2D = Pose2D {
        x: 0.0,
        y: 0.0,
        psi: 0.0,
    };

    pub fn distance(&self, other: &Pose2D) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// A timestamped pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub pose: Pose2D,
}

/// A planar pose track with non-decreasing timestamps.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn new(points: Vec<TrajectoryPoint>) -> Result<Self> {
        for pair in points.windows(2) {
            if pair[1].t < pair[0].t {
                return Err(Error::invalid(format!(
                    "trajectory timestamps decrease at t={}",
                    pair[1].t
                )));
            }
        }
        Ok(Trajectory { points })
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<&TrajectoryPoint> {
        self.points.last()
    }

    pub(crate) fn push(&mut self, t: f64, pose: Pose2D) {
        debug_assert!(self.points.last().map_or(true, |p| t >= p.t));
        self.points.push(TrajectoryPoint { t, pose });
    }

    /// Total path length in meters.
    pub fn path_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|p| p[0].pose.distance(&p[1].pose))
            .sum()
    }
}

/// Average velocity and heading rate over one window of time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityEstimate {
    /// m/s, >= 0.
    pub v_bar: f64,
    /// rad/s.
    pub psi_dot: f64,
}

/// Wraps an angle to the canonical range `(-pi, pi]`.
///
/// Panics on non-finite input; angles are produced internally and a NaN
/// here always indicates an upstream bug.
pub fn wrap_angle(theta: f64) -> f64 {
    assert!(theta.is_finite(), "wrap_angle: non-finite angle {theta}");
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = theta.rem_euclid(two_pi);
    // rem_euclid gives [0, 2*pi); fold the upper half down.
    if r > std::f64::consts::PI {
        r - two_pi
    } else {
        r
    }
}

/// Advances a pose by a polar displacement:
/// the step of length `dl` is taken along heading `psi + dpsi`.
pub fn advance_pose(p0: Pose2D, delta: PolarDelta) -> Pose2D {
    let heading = p0.psi + delta.dpsi;
    Pose2D {
        x: p0.x + delta.dl * heading.cos(),
        y: p0.y + delta.dl * heading.sin(),
        psi: wrap_angle(heading),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_angle_identity_and_modular() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-12);
        // Boundary maps to the (-pi, pi] representative.
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(PI), PI, epsilon = 1e-12);
    }

    #[test]
    #[should_panic(expected = "non-finite")]
    fn wrap_angle_rejects_nan() {
        wrap_angle(f64::NAN);
    }

    #[test]
    fn advance_pose_examples() {
        let p = advance_pose(Pose2D::ORIGIN, PolarDelta::ZERO);
        assert_eq!(p, Pose2D::ORIGIN);

        let p = advance_pose(Pose2D::ORIGIN, PolarDelta { dl: 1.0, dpsi: 0.0 });
        assert_abs_diff_eq!(p.x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.psi, 0.0, epsilon = 1e-15);

        // Hand evaluation: start (1,1,pi/2), step 2 m after a further quarter turn.
        let p = advance_pose(
            Pose2D {
                x: 1.0,
                y: 1.0,
                psi: PI / 2.0,
            },
            PolarDelta {
                dl: 2.0,
                dpsi: PI / 2.0,
            },
        );
        assert_abs_diff_eq!(p.x, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.psi, PI, epsilon = 1e-12);
    }

    #[test]
    fn zero_length_step_changes_only_heading() {
        let p0 = Pose2D {
            x: 3.0,
            y: -2.0,
            psi: 0.4,
        };
        let p = advance_pose(p0, PolarDelta { dl: 0.0, dpsi: 1.1 });
        assert_eq!(p.x, p0.x);
        assert_eq!(p.y, p0.y);
        assert_abs_diff_eq!(p.psi, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn sequence_rejects_non_monotonic_timestamps() {
        let s = |t| ImuSample::new(t, [0.0; 3], [0.0; 3]).unwrap();
        assert!(ImuSequence::new(vec![s(0.0), s(0.01), s(0.01)], 100.0).is_err());
        assert!(ImuSequence::new(vec![s(0.0), s(0.01), s(0.02)], 100.0).is_ok());
    }

    #[test]
    fn window_config_bounds() {
        assert!(WindowConfig::new(200, 0).is_err());
        assert!(WindowConfig::new(200, 201).is_err());
        assert!(WindowConfig::new(200, 200).is_ok());
    }

    #[test]
    fn polar_delta_wraps_and_rejects() {
        let d = PolarDelta::new(1.0, 3.0 * PI).unwrap();
        assert_abs_diff_eq!(d.dpsi, PI, epsilon = 1e-12);
        assert!(PolarDelta::new(-0.1, 0.0).is_err());
        assert!(PolarDelta::new(f64::NAN, 0.0).is_err());
    }

    fn rotate_pose(p: Pose2D, phi: f64) -> Pose2D {
        Pose2D {
            x: p.x * phi.cos() - p.y * phi.sin(),
            y: p.x * phi.sin() + p.y * phi.cos(),
            psi: wrap_angle(p.psi + phi),
        }
    }

    proptest! {
        #[test]
        fn wrap_angle_idempotent(theta in -50.0f64..50.0) {
            let once = wrap_angle(theta);
            prop_assert_eq!(wrap_angle(once), once);
            prop_assert!(once > -PI && once <= PI);
        }

        #[test]
        fn wrap_angle_congruent_mod_two_pi(theta in -50.0f64..50.0) {
            let w = wrap_angle(theta);
            let k = (theta - w) / (2.0 * PI);
            prop_assert!((k - k.round()).abs() < 1e-9);
        }

        #[test]
        fn advance_pose_rotation_equivariant(
            x in -10.0f64..10.0,
            y in -10.0f64..10.0,
            psi in -3.0f64..3.0,
            dl in 0.0f64..5.0,
            dpsi in -3.0f64..3.0,
            phi in -3.0f64..3.0,
        ) {
            let p0 = Pose2D { x, y, psi: wrap_angle(psi) };
            let d = PolarDelta { dl, dpsi };
            let a = rotate_pose(advance_pose(p0, d), phi);
            let b = advance_pose(rotate_pose(p0, phi), d);
            prop_assert!((a.x - b.x).abs() < 1e-9);
            prop_assert!((a.y - b.y).abs() < 1e-9);
            prop_assert!(wrap_angle(a.psi - b.psi).abs() < 1e-9);
        }
    }
}
