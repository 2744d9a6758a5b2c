//! Linear single-track (bicycle) lateral dynamics with an external yaw-moment
//! input, shared by the controller design and the simulation plant.
//!
//! Cornering stiffnesses here are *signed*: a tyre force opposes its slip
//! angle, so `cf = -C_f` and `cr = -C_r` for the positive magnitudes held in
//! [`VehicleParams`]. With this convention the state matrix
//!
//! ```text
//! [ (cf+cr)/(m u)        (a cf - b cr)/(m u) - u ]
//! [ (a cf - b cr)/(I u)  (a² cf + b² cr)/(I u)   ]
//! ```
//!
//! is stable for any understeering vehicle.

use num_complex::Complex64;

use crate::vehicle::VehicleParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSingleTrack {
    pub m: f64,
    pub a: f64,
    pub b: f64,
    /// Signed front axle cornering stiffness [N/rad].
    pub cf: f64,
    /// Signed rear axle cornering stiffness [N/rad].
    pub cr: f64,
    pub i_zz: f64,
}

pub type Mat2 = [[f64; 2]; 2];
pub type Mat4 = [[f64; 4]; 4];

/// Linearised path-tracking error dynamics `ẋ = A x + B [δ, M]ᵀ + E [κ, κ̇]ᵀ`
/// with `x = [y_e, ẏ_e, ψ_e, ψ̇_e]` measured as path minus vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorModel {
    pub a: Mat4,
    pub b: [[f64; 2]; 4],
    pub e: [[f64; 2]; 4],
}

impl LinearSingleTrack {
    pub fn from_params(p: &VehicleParams) -> Self {
        Self { m: p.m, a: p.a, b: p.b, cf: -p.c_f, cr: -p.c_r, i_zz: p.i_zz }
    }

    pub fn wheelbase(&self) -> f64 {
        self.a + self.b
    }

    pub fn state_matrix(&self, u: f64) -> Mat2 {
        let (m, a, b, cf, cr, i) = (self.m, self.a, self.b, self.cf, self.cr, self.i_zz);
        [
            [(cf + cr) / (m * u), (a * cf - b * cr) / (m * u) - u],
            [(a * cf - b * cr) / (i * u), (a * a * cf + b * b * cr) / (i * u)],
        ]
    }

    /// Input matrix for `[δ_g, M_z]`.
    pub fn input_matrix(&self) -> Mat2 {
        [[-self.cf / self.m, 0.0], [-self.a * self.cf / self.i_zz, 1.0 / self.i_zz]]
    }

    /// `[v̇, ṙ]` of the linear model.
    pub fn derivatives(&self, u: f64, v: f64, r: f64, delta: f64, m_z: f64) -> (f64, f64) {
        let a = self.state_matrix(u);
        let b = self.input_matrix();
        (
            a[0][0] * v + a[0][1] * r + b[0][0] * delta,
            a[1][0] * v + a[1][1] * r + b[1][0] * delta + b[1][1] * m_z,
        )
    }

    /// Open-loop poles, ordered by real part then imaginary part.
    pub fn vehicle_poles(&self, u: f64) -> [Complex64; 2] {
        let a = self.state_matrix(u);
        let tr = a[0][0] + a[1][1];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let disc = Complex64::new(tr * tr / 4.0 - det, 0.0).sqrt();
        let mid = Complex64::new(tr / 2.0, 0.0);
        let (p1, p2) = (mid - disc, mid + disc);
        if (p1.re, p1.im) <= (p2.re, p2.im) {
            [p1, p2]
        } else {
            [p2, p1]
        }
    }

    pub fn is_stable(&self, u: f64) -> bool {
        self.vehicle_poles(u).iter().all(|p| p.re < 0.0)
    }

    pub fn error_model(&self, u: f64) -> ErrorModel {
        let (m, a, b, cf, cr, i) = (self.m, self.a, self.b, self.cf, self.cr, self.i_zz);
        let s = cf + cr;
        let d = a * cf - b * cr;
        let q = a * a * cf + b * b * cr;
        ErrorModel {
            a: [
                [0.0, 1.0, 0.0, 0.0],
                [0.0, s / (m * u), -s / m, d / (m * u)],
                [0.0, 0.0, 0.0, 1.0],
                [0.0, d / (i * u), -d / i, q / (i * u)],
            ],
            b: [[0.0, 0.0], [cf / m, 0.0], [0.0, 0.0], [a * cf / i, -1.0 / i]],
            e: [[0.0, 0.0], [u * u - d / m, 0.0], [0.0, 0.0], [-q / i, u]],
        }
    }

    /// Understeer coefficient `K_δ = (m/l)(a/cr − b/cf)`; positive when understeering.
    pub fn understeer_coefficient(&self) -> f64 {
        understeer_coefficient(self.m, self.a, self.b, self.cf, self.cr)
    }

    /// Steady-state lateral velocity on a circle of curvature `kappa` driven by
    /// steering alone (`M_z = 0`).
    pub fn steady_sideslip_steering(&self, u: f64, kappa: f64) -> f64 {
        // Solve A [v, r] + B [δ, 0] = 0 for (v, δ) with r = u κ.
        let a = self.state_matrix(u);
        let bm = self.input_matrix();
        let r = u * kappa;
        let det = a[0][0] * bm[1][0] - a[1][0] * bm[0][0];
        -(a[0][1] * r * bm[1][0] - a[1][1] * r * bm[0][0]) / det
    }

    /// Steady-state lateral velocity on a circle of curvature `kappa` with a
    /// fixed steering angle, the yaw moment taking up the remainder.
    pub fn steady_sideslip_braking(&self, u: f64, kappa: f64, delta: f64) -> f64 {
        let a = self.state_matrix(u);
        let bm = self.input_matrix();
        -(a[0][1] * u * kappa + bm[0][0] * delta) / a[0][0]
    }
}

/// `K_δ = (m/l)(a/C_r − b/C_f)` for stiffnesses in whichever sign convention
/// the caller uses.
pub fn understeer_coefficient(m: f64, a: f64, b: f64, c_f: f64, c_r: f64) -> f64 {
    m / (a + b) * (a / c_r - b / c_f)
}
