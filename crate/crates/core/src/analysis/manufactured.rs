//! The smooth manufactured solution on the unit square and its forcing.

use crate::forms::FluxParams;
use crate::math::{self, Tensor2, Vec2, PI};
use crate::spaces::AnalyticField;

/// `u = e^{t/10} (16y(1−y)(1−2y) sin²πx, −8πy²(1−y)² sin 2πx)`,
/// `p = e^{t/10} sin πx cos πy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub params: FluxParams,
}

/// `g(y) = 16y(1−y)(1−2y)` and its first two derivatives.
fn g(y: f64) -> [f64; 3] {
    [
        16.0 * y * (1.0 - y) * (1.0 - 2.0 * y),
        16.0 * (1.0 - 6.0 * y + 6.0 * y * y),
        16.0 * (-6.0 + 12.0 * y),
    ]
}

/// `k(y) = y²(1−y)²` and its first two derivatives.
fn k(y: f64) -> [f64; 3] {
    [
        y * y * (1.0 - y) * (1.0 - y),
        2.0 * y * (1.0 - y) * (1.0 - 2.0 * y),
        2.0 * (1.0 - 6.0 * y + 6.0 * y * y),
    ]
}

impl ManufacturedSolution {
    pub fn new(params: FluxParams) -> Self {
        Self { params }
    }

    fn growth(t: f64) -> f64 {
        math::exp(t / 10.0)
    }

    pub fn velocity(&self, t: f64, x: Vec2) -> Vec2 {
        let e = Self::growth(t);
        let (sx, s2x) = (math::sin(PI * x[0]), math::sin(2.0 * PI * x[0]));
        [e * g(x[1])[0] * sx * sx, -8.0 * PI * e * k(x[1])[0] * s2x]
    }

    /// `∇u` with `[i][j] = ∂_j u_i`.
    pub fn gradient(&self, t: f64, x: Vec2) -> Tensor2 {
        let e = Self::growth(t);
        let (gy, ky) = (g(x[1]), k(x[1]));
        let sx = math::sin(PI * x[0]);
        let (s2x, c2x) = (math::sin(2.0 * PI * x[0]), math::cos(2.0 * PI * x[0]));
        [
            [e * gy[0] * PI * s2x, e * gy[1] * sx * sx],
            [-16.0 * PI * PI * e * ky[0] * c2x, -8.0 * PI * e * ky[1] * s2x],
        ]
    }

    /// `∂_t u`.
    pub fn time_derivative(&self, t: f64, x: Vec2) -> Vec2 {
        math::scale(0.1, self.velocity(t, x))
    }

    /// `[i][j][l] = ∂_j ∂_l u_i`.
    pub fn second_derivatives(&self, t: f64, x: Vec2) -> [Tensor2; 2] {
        let e = Self::growth(t);
        let (gy, ky) = (g(x[1]), k(x[1]));
        let sx = math::sin(PI * x[0]);
        let (s2x, c2x) = (math::sin(2.0 * PI * x[0]), math::cos(2.0 * PI * x[0]));
        let u1_xx = 2.0 * PI * PI * e * gy[0] * c2x;
        let u1_xy = PI * e * gy[1] * s2x;
        let u1_yy = e * gy[2] * sx * sx;
        let u2_xx = 32.0 * PI * PI * PI * e * ky[0] * s2x;
        let u2_xy = -16.0 * PI * PI * e * ky[1] * c2x;
        let u2_yy = -8.0 * PI * e * ky[2] * s2x;
        [[[u1_xx, u1_xy], [u1_xy, u1_yy]], [[u2_xx, u2_xy], [u2_xy, u2_yy]]]
    }

    pub fn laplacian(&self, t: f64, x: Vec2) -> Vec2 {
        let d = self.second_derivatives(t, x);
        [d[0][0][0] + d[0][1][1], d[1][0][0] + d[1][1][1]]
    }

    pub fn pressure(&self, t: f64, x: Vec2) -> f64 {
        Self::growth(t) * math::sin(PI * x[0]) * math::cos(PI * x[1])
    }

    pub fn pressure_gradient(&self, t: f64, x: Vec2) -> Vec2 {
        let e = Self::growth(t);
        [
            e * PI * math::cos(PI * x[0]) * math::cos(PI * x[1]),
            -e * PI * math::sin(PI * x[0]) * math::sin(PI * x[1]),
        ]
    }

    /// `∇·σ(∇u)` by the chain rule.
    pub fn flux_divergence(&self, t: f64, x: Vec2) -> Vec2 {
        let p = &self.params;
        let gu = self.gradient(t, x);
        let lap = self.laplacian(t, x);
        if p.is_newtonian() {
            return math::scale(p.nu, lap);
        }
        let d = self.second_derivatives(t, x);
        let m = p.modulus(math::tensor_norm(&gu));
        let c = p.nu * math::powf(m, p.r - 2.0);
        let c2 = p.nu * (p.r - 2.0) * math::powf(m, p.r - 4.0);
        let mut out = [0.0; 2];
        for i in 0..2 {
            let mut chain = 0.0;
            for j in 0..2 {
                // ∇u : ∂_j ∇u
                let mut s = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        s += gu[a][b] * d[a][b][j];
                    }
                }
                chain += s * gu[i][j];
            }
            out[i] = c * lap[i] + c2 * chain;
        }
        out
    }

    /// `f = ∂_t u − ∇·σ(∇u) + (u·∇)u + ∇p`.
    pub fn forcing(&self, t: f64, x: Vec2) -> Vec2 {
        let u = self.velocity(t, x);
        let gu = self.gradient(t, x);
        let conv = math::mat_vec(&gu, u);
        let div = self.flux_divergence(t, x);
        let gp = self.pressure_gradient(t, x);
        let dt = self.time_derivative(t, x);
        [
            dt[0] - div[0] + conv[0] + gp[0],
            dt[1] - div[1] + conv[1] + gp[1],
        ]
    }

    /// `u(t, ·)` as an evaluable field.
    pub fn field_at(
        &self,
        t: f64,
    ) -> AnalyticField<impl Fn(Vec2) -> Vec2 + '_, impl Fn(Vec2) -> Tensor2 + '_> {
        AnalyticField {
            value: move |x| self.velocity(t, x),
            gradient: move |x| self.gradient(t, x),
        }
    }
}

/// `f(t, x)` for the manufactured solution.
pub fn manufactured_forcing(sol: &ManufacturedSolution, t: f64, x: Vec2) -> Vec2 {
    sol.forcing(t, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::sigma;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fd_gradient(sol: &ManufacturedSolution, t: f64, x: Vec2) -> Tensor2 {
        let h = 1e-5;
        let mut out = [[0.0; 2]; 2];
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let (up, um) = (sol.velocity(t, xp), sol.velocity(t, xm));
            for i in 0..2 {
                out[i][j] = (up[i] - um[i]) / (2.0 * h);
            }
        }
        out
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let sol = ManufacturedSolution::new(FluxParams::new(1.0, 2.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            let t = rng.gen::<f64>();
            let a = sol.gradient(t, x);
            let b = fd_gradient(&sol, t, x);
            assert!(math::tensor_norm(&math::tensor_sub(&a, &b)) < 1e-7);
        }
    }

    #[test]
    fn divergence_free_and_zero_on_boundary() {
        let sol = ManufacturedSolution::new(FluxParams::new(1.0, 2.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            let g = sol.gradient(0.7, x);
            assert!((g[0][0] + g[1][1]).abs() < 1e-10);
            let s = rng.gen::<f64>();
            for b in [[s, 0.0], [s, 1.0], [0.0, s], [1.0, s]] {
                let u = sol.velocity(0.3, b);
                assert!(math::norm(u) < 1e-14);
            }
        }
    }

    #[test]
    fn newtonian_forcing_reduces() {
        let p = FluxParams::new(0.5, 2.0).unwrap();
        let sol = ManufacturedSolution::new(p);
        let (t, x) = (0.4, [0.3, 0.8]);
        let f = sol.forcing(t, x);
        let u = sol.velocity(t, x);
        let conv = math::mat_vec(&sol.gradient(t, x), u);
        let lap = sol.laplacian(t, x);
        let gp = sol.pressure_gradient(t, x);
        for i in 0..2 {
            let e = 0.1 * u[i] - 0.5 * lap[i] + conv[i] + gp[i];
            assert!((f[i] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn flux_divergence_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for r in [1.5, 2.5, 3.0] {
            let sol = ManufacturedSolution::new(FluxParams::new(1.0, r).unwrap());
            for _ in 0..10 {
                let x = [rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)];
                let t = rng.gen::<f64>();
                let h = 1e-4;
                let mut fd = [0.0; 2];
                for j in 0..2 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[j] += h;
                    xm[j] -= h;
                    let sp = sigma(&sol.gradient(t, xp), &sol.params);
                    let sm = sigma(&sol.gradient(t, xm), &sol.params);
                    for i in 0..2 {
                        fd[i] += (sp[i][j] - sm[i][j]) / (2.0 * h);
                    }
                }
                let exact = sol.flux_divergence(t, x);
                let scale = math::norm(exact).max(1.0);
                assert!(math::norm(math::sub(fd, exact)) < 1e-6 * scale, "r = {r}");
            }
        }
    }
}
