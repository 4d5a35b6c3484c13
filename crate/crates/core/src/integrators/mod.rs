//! Kahan and Euler steppers for quadratic vector fields, the canard maps in
//! original and rescaled coordinates, trajectories and a classical RK4 oracle.

mod field;
mod maps;
mod trajectory;

pub use field::QuadraticVectorField;
pub use maps::{
    canard_euler_map, canard_field, canard_kahan_map, k2_euler_map, k2_field, k2_kahan_map,
    k2_kahan_map_a1, p0, p0_denominator, p0_exact, slow_invariance_residual, CanardParams, Coefficients, K2Params, PlanarMap,
    PlanarState,
};
pub use trajectory::{iterate, write_csv, EventKind, Trajectory, TrajectoryEvent};

use crate::error::{CanardError, Result};
use crate::linalg;

/// Matrix `Id - (h/2) Df(z)` of the linearly implicit step.
fn kahan_matrix(vf: &QuadraticVectorField, z: &[f64], h: f64) -> Vec<Vec<f64>> {
    let mut m = vf.jacobian(z);
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j { 1.0 } else { 0.0 } - 0.5 * h * *v;
        }
    }
    m
}

/// One Kahan step `z + h (Id - h/2 Df(z))^{-1} f(z)`.
pub fn kahan_step(vf: &QuadraticVectorField, z: &[f64], h: f64) -> Result<Vec<f64>> {
    vf.check_dim(z)?;
    let m = kahan_matrix(vf, z, h);
    let dz = linalg::solve(m, vf.eval(z)).ok_or_else(|| CanardError::SingularStep {
        state: z.to_vec(),
        h,
    })?;
    Ok(z.iter().zip(dz).map(|(zi, d)| zi + h * d).collect())
}

/// Inverse of [`kahan_step`]: the same map with step `-h`.
pub fn kahan_inverse_step(vf: &QuadraticVectorField, z: &[f64], h: f64) -> Result<Vec<f64>> {
    kahan_step(vf, z, -h)
}

/// `det(Id - (h/2) Df(z))`, the denominator of the birational map.
pub fn kahan_denominator(vf: &QuadraticVectorField, z: &[f64], h: f64) -> f64 {
    linalg::det(kahan_matrix(vf, z, h))
}

pub fn euler_step(vf: &QuadraticVectorField, z: &[f64], h: f64) -> Vec<f64> {
    z.iter().zip(vf.eval(z)).map(|(zi, f)| zi + h * f).collect()
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Max-norm of `(z1 - z)/h - Q(z, z1) - B(z + z1)/2 - c`; vanishes on Kahan pairs.
pub fn kahan_bilinear_residual(
    vf: &QuadraticVectorField,
    z: &[f64],
    z_next: &[f64],
    h: f64,
) -> Result<f64> {
    if h == 0.0 {
        return Err(CanardError::ZeroStep);
    }
    vf.check_dim(z)?;
    vf.check_dim(z_next)?;
    let q = vf.polar(z, z_next);
    let mid: Vec<f64> = z.iter().zip(z_next).map(|(a, b)| 0.5 * (a + b)).collect();
    let lin = vf.linear_part(&mid);
    Ok(max_abs((0..vf.dim()).map(|k| {
        (z_next[k] - z[k]) / h - q[k] - lin[k] - vf.constant()[k]
    })))
}

/// Max-norm of `(z1 - z)/h + f(z)/2 - 2 f((z + z1)/2) + f(z1)/2`.
pub fn rk_form_residual(
    vf: &QuadraticVectorField,
    z: &[f64],
    z_next: &[f64],
    h: f64,
) -> Result<f64> {
    if h == 0.0 {
        return Err(CanardError::ZeroStep);
    }
    vf.check_dim(z)?;
    vf.check_dim(z_next)?;
    let mid: Vec<f64> = z.iter().zip(z_next).map(|(a, b)| 0.5 * (a + b)).collect();
    let (f0, fm, f1) = (vf.eval(z), vf.eval(&mid), vf.eval(z_next));
    Ok(max_abs((0..vf.dim()).map(|k| {
        (z_next[k] - z[k]) / h + 0.5 * f0[k] - 2.0 * fm[k] + 0.5 * f1[k]
    })))
}

/// Classical fixed-step RK4 approximation of the time-`t` flow of `f`.
pub fn reference_flow<F>(f: F, z0: &[f64], t: f64, steps: usize) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let steps = steps.max(1);
    let dt = t / steps as f64;
    let mut z = z0.to_vec();
    let axpy = |z: &[f64], k: &[f64], a: f64| -> Vec<f64> {
        z.iter().zip(k).map(|(zi, ki)| zi + a * ki).collect()
    };
    for _ in 0..steps {
        let k1 = f(&z);
        let k2 = f(&axpy(&z, &k1, 0.5 * dt));
        let k3 = f(&axpy(&z, &k2, 0.5 * dt));
        let k4 = f(&axpy(&z, &k3, dt));
        for i in 0..z.len() {
            z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    z
}
