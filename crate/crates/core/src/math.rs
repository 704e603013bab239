//! Scalar helpers on top of `libm` and small fixed-size vector/tensor ops.

pub type Vec2 = [f64; 2];
/// Row-major 2×2 tensor; for gradients `t[i][j] = ∂_j v_i`.
pub type Tensor2 = [[f64; 2]; 2];

pub const PI: f64 = core::f64::consts::PI;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, e: f64) -> f64 {
    libm::pow(x, e)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    sqrt(dot(a, a))
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(s: f64, a: Vec2) -> Vec2 {
    [s * a[0], s * a[1]]
}

#[inline]
pub fn mat_vec(t: &Tensor2, v: Vec2) -> Vec2 {
    [
        t[0][0] * v[0] + t[0][1] * v[1],
        t[1][0] * v[0] + t[1][1] * v[1],
    ]
}

/// Frobenius product `A : B`.
#[inline]
pub fn frobenius(a: &Tensor2, b: &Tensor2) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

#[inline]
pub fn tensor_norm(a: &Tensor2) -> f64 {
    sqrt(frobenius(a, a))
}

#[inline]
pub fn tensor_sub(a: &Tensor2, b: &Tensor2) -> Tensor2 {
    [
        [a[0][0] - b[0][0], a[0][1] - b[0][1]],
        [a[1][0] - b[1][0], a[1][1] - b[1][1]],
    ]
}

#[inline]
pub fn tensor_scale(s: f64, a: &Tensor2) -> Tensor2 {
    [[s * a[0][0], s * a[0][1]], [s * a[1][0], s * a[1][1]]]
}

/// Twice the signed area of the triangle `(a, b, c)`.
#[inline]
pub fn cross(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
