//! Quadrature on the reference triangle and the unit segment.
//!
//! Triangle rules beyond the centroid rule are collapsed (Duffy) products of
//! Gauss–Legendre rules: all points interior, all weights positive.

use alloc::vec::Vec;

use crate::math::{self, Vec2};
use crate::{Error, Result};

pub const MAX_ORDER: usize = 30;
pub const DEFAULT_ORDER: usize = 6;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = math::cos(math::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Rule on the reference triangle `(0,0), (1,0), (0,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    order: usize,
    /// Barycentric coordinates `(λ0, λ1, λ2)`; reference point `(λ1, λ2)`.
    pub points: Vec<[f64; 3]>,
    /// Sum to the reference area `1/2`.
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Rule exact for polynomials of total degree `≤ order`.
    pub fn new(order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder {
                order,
                max: MAX_ORDER,
            });
        }
        if order <= 1 {
            return Ok(Self {
                order,
                points: alloc::vec![[1.0 / 3.0; 3]],
                weights: alloc::vec![0.5],
            });
        }
        let (s, ws) = gauss_legendre((order + 2) / 2);
        let (t, wt) = gauss_legendre((order + 3) / 2);
        let mut points = Vec::with_capacity(s.len() * t.len());
        let mut weights = Vec::with_capacity(s.len() * t.len());
        for (tj, wj) in t.iter().zip(&wt) {
            for (si, wi) in s.iter().zip(&ws) {
                let xi = si * (1.0 - tj);
                let eta = *tj;
                points.push([1.0 - xi - eta, xi, eta]);
                weights.push(wi * wj * (1.0 - tj));
            }
        }
        Ok(Self {
            order,
            points,
            weights,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Physical points and weights on the triangle `tri`.
    pub fn on_triangle<'a>(
        &'a self,
        tri: &'a [Vec2; 3],
        area: f64,
    ) -> impl Iterator<Item = ([f64; 3], Vec2, f64)> + 'a {
        self.points.iter().zip(&self.weights).map(move |(l, w)| {
            let x = [
                l[0] * tri[0][0] + l[1] * tri[1][0] + l[2] * tri[2][0],
                l[0] * tri[0][1] + l[1] * tri[1][1] + l[2] * tri[2][1],
            ];
            (*l, x, 2.0 * area * w)
        })
    }
}

/// Gauss–Legendre rule on the unit segment.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRule {
    order: usize,
    pub points: Vec<f64>,
    /// Sum to 1; multiply by the edge length for physical weights.
    pub weights: Vec<f64>,
}

impl EdgeRule {
    pub fn new(order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder {
                order,
                max: MAX_ORDER,
            });
        }
        let (points, weights) = gauss_legendre(order / 2 + 1);
        Ok(Self {
            order,
            points,
            weights,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn physical_weights(&self, length: f64) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().map(move |w| w * length)
    }
}
