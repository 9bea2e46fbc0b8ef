//! Relay, ORIS and receiver placement, and ray propagation through a
//! jittered scene.

use core::ops::{Add, Mul, Neg, Sub};

use libm::{cos, sin, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        sqrt(self.dot(self))
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }

    /// Mirror image of a direction about a plane with unit normal `n`.
    pub fn reflect(self, n: Self) -> Self {
        self - n * (2.0 * self.dot(n))
    }

    /// Rodrigues rotation about a unit `axis`.
    pub fn rotate(self, axis: Self, angle: f64) -> Self {
        let (s, c) = (sin(angle), cos(angle));
        self * c + axis.cross(self) * s + axis * (axis.dot(self) * (1.0 - c))
    }
}

impl Add for Vec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Neg for Vec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Tilts unit vector `v` by the small-angle pair `(t1, t2)` along the
/// orthonormal basis `(e1, e2)` of its normal plane, as an exact rotation.
pub fn tilt(v: Vec3, basis: [Vec3; 2], t1: f64, t2: f64) -> Vec3 {
    let angle = sqrt(t1 * t1 + t2 * t2);
    if angle == 0.0 {
        return v;
    }
    let dir = (basis[0] * t1 + basis[1] * t2) * (1.0 / angle);
    v * cos(angle) + dir * sin(angle)
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("incidence angle {0} rad outside [0, π/2)")]
    Incidence(f64),
    #[error("link distances must be positive")]
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneGeometry {
    pub relay_position: Vec3,
    pub oris_center: Vec3,
    pub oris_nominal_normal: Vec3,
    pub receiver_center: Vec3,
    pub receiver_plane_normal: Vec3,
    /// Unit chief-ray direction from the relay.
    pub beam_direction: Vec3,
    /// Tilt axes for the beam and for the ORIS normal.
    pub beam_basis: [Vec3; 2],
    pub normal_basis: [Vec3; 2],
}

/// Where a ray ends up on the receiving plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RayHit {
    /// Radial offset from the receiver center and the reflected direction.
    Receiver { offset: f64, reflected: Vec3 },
    Missed,
}

/// Places the ORIS at the origin with normal `+z`; the chief ray arrives in
/// the `xz` plane at `incidence` from the normal, travels `l_ro` from the
/// relay and `l_ou` after reflection. The receiving plane faces the chief
/// ray.
pub fn build_scene(l_ro: f64, l_ou: f64, incidence: f64) -> Result<SceneGeometry, SceneError> {
    if !(0.0..core::f64::consts::FRAC_PI_2).contains(&incidence) {
        return Err(SceneError::Incidence(incidence));
    }
    if !(l_ro > 0.0 && l_ou > 0.0 && l_ro.is_finite() && l_ou.is_finite()) {
        return Err(SceneError::Distance);
    }
    let n = Vec3::new(0.0, 0.0, 1.0);
    let d = Vec3::new(sin(incidence), 0.0, -cos(incidence));
    let r = d.reflect(n);
    let y = Vec3::new(0.0, 1.0, 0.0);
    Ok(SceneGeometry {
        relay_position: d * -l_ro,
        oris_center: Vec3::default(),
        oris_nominal_normal: n,
        receiver_center: r * l_ou,
        receiver_plane_normal: r,
        beam_direction: d,
        beam_basis: [y.cross(d), y],
        normal_basis: [Vec3::new(1.0, 0.0, 0.0), y],
    })
}

impl SceneGeometry {
    /// Applies a rigid rotation to every point and direction.
    pub fn rotated(&self, axis: Vec3, angle: f64) -> Self {
        let rot = |v: Vec3| v.rotate(axis, angle);
        Self {
            relay_position: rot(self.relay_position),
            oris_center: rot(self.oris_center),
            oris_nominal_normal: rot(self.oris_nominal_normal),
            receiver_center: rot(self.receiver_center),
            receiver_plane_normal: rot(self.receiver_plane_normal),
            beam_direction: rot(self.beam_direction),
            beam_basis: [rot(self.beam_basis[0]), rot(self.beam_basis[1])],
            normal_basis: [rot(self.normal_basis[0]), rot(self.normal_basis[1])],
        }
    }

    /// Propagates a ray leaving the relay along `direction`, reflecting off
    /// the ORIS plane with unit normal `normal`.
    pub fn trace(&self, direction: Vec3, normal: Vec3) -> RayHit {
        let cos_in = direction.dot(normal);
        if cos_in >= 0.0 {
            return RayHit::Missed;
        }
        let t = (self.oris_center - self.relay_position).dot(normal) / cos_in;
        if !(t > 0.0) {
            return RayHit::Missed;
        }
        let hit = self.relay_position + direction * t;
        let reflected = direction.reflect(normal);
        let m = self.receiver_plane_normal;
        let approach = reflected.dot(m);
        if approach <= 0.0 {
            return RayHit::Missed;
        }
        let s = (self.receiver_center - hit).dot(m) / approach;
        if !(s > 0.0) {
            return RayHit::Missed;
        }
        let spot = hit + reflected * s;
        RayHit::Receiver {
            offset: (spot - self.receiver_center).norm(),
            reflected,
        }
    }

    /// Traces a beam tilted by `(θ₁, θ₂)` off an ORIS tilted by `(β₁, β₂)`.
    pub fn trace_jittered(&self, theta: (f64, f64), beta: (f64, f64)) -> RayHit {
        let d = tilt(self.beam_direction, self.beam_basis, theta.0, theta.1);
        let n = tilt(self.oris_nominal_normal, self.normal_basis, beta.0, beta.1);
        self.trace(d, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_4;

    fn offset(h: RayHit) -> f64 {
        match h {
            RayHit::Receiver { offset, .. } => offset,
            RayHit::Missed => panic!("missed"),
        }
    }

    #[test]
    fn chief_ray_hits_center() {
        for &i in &[0.0, 0.3, FRAC_PI_4, 1.3] {
            let s = build_scene(50.0, 100.0, i).unwrap();
            assert!(((s.oris_center - s.relay_position).norm() - 50.0).abs() < 1e-12);
            assert!(((s.receiver_center - s.oris_center).norm() - 100.0).abs() < 1e-12);
            assert!(offset(s.trace(s.beam_direction, s.oris_nominal_normal)) < 1e-12);
            // nominal normal bisects the reversed incident and reflected directions
            let bis = (-s.beam_direction + s.receiver_plane_normal).normalized();
            assert!((bis - s.oris_nominal_normal).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_grazing_and_bad_distances() {
        assert!(build_scene(50.0, 100.0, core::f64::consts::FRAC_PI_2).is_err());
        assert!(build_scene(50.0, 100.0, -0.1).is_err());
        assert!(build_scene(0.0, 100.0, 0.2).is_err());
    }

    #[test]
    fn beam_tilt_sweeps_full_path() {
        let s = build_scene(50.0, 100.0, 0.0).unwrap();
        let th = 1e-6;
        let r = offset(s.trace_jittered((th, 0.0), (0.0, 0.0)));
        assert!((r / (th * 150.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mirror_tilt_doubles() {
        let s = build_scene(50.0, 100.0, 0.0).unwrap();
        let b = 1e-6;
        for beta in [(b, 0.0), (0.0, b)] {
            let r = offset(s.trace_jittered((0.0, 0.0), beta));
            assert!((r / (2.0 * b * 100.0) - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn oblique_out_of_plane_tilt_scales_with_cosine() {
        let i = FRAC_PI_4;
        let s = build_scene(50.0, 100.0, i).unwrap();
        let b = 1e-6;
        let in_plane = offset(s.trace_jittered((0.0, 0.0), (b, 0.0)));
        let out_plane = offset(s.trace_jittered((0.0, 0.0), (0.0, b)));
        assert!((in_plane / (2.0 * b * 100.0) - 1.0).abs() < 1e-5);
        assert!((out_plane / (2.0 * b * 100.0 * cos(i)) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn tilt_is_exact_rotation() {
        let s = build_scene(50.0, 100.0, 0.4).unwrap();
        let v = tilt(s.beam_direction, s.beam_basis, 0.3, -0.2);
        assert!((v.norm() - 1.0).abs() < 1e-15);
        let ang = libm::acos(v.dot(s.beam_direction));
        assert!((ang - sqrt(0.13)).abs() < 1e-12);
        let r = s.trace_jittered((0.01, 0.02), (0.003, -0.004));
        if let RayHit::Receiver { reflected, .. } = r {
            assert!((reflected.norm() - 1.0).abs() < 1e-12);
        } else {
            panic!("missed");
        }
    }

    #[test]
    fn missing_the_mirror() {
        let s = build_scene(50.0, 100.0, 0.0).unwrap();
        // beam pointed away from the mirror plane
        assert_eq!(s.trace(-s.beam_direction, s.oris_nominal_normal), RayHit::Missed);
    }

    #[test]
    fn rigid_rotation_preserves_offsets() {
        let s = build_scene(50.0, 100.0, 0.6).unwrap();
        let axis = Vec3::new(1.0, -2.0, 0.5).normalized();
        let t = s.rotated(axis, 1.1);
        for &(a, b, c, d) in &[(1e-3, 0.0, 0.0, 2e-3), (-4e-3, 2e-3, 1e-3, -1e-3)] {
            let r1 = offset(s.trace_jittered((a, b), (c, d)));
            let r2 = offset(t.trace_jittered((a, b), (c, d)));
            assert!((r1 - r2).abs() < 1e-10);
        }
    }
}
