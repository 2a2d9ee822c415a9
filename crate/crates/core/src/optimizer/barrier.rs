//! Log-barrier interior solver for the convexified trajectory subproblem.
//!
//! One subproblem instance holds, per window slot k, the variables
//! (x_k, u_k, w_k) and maximizes
//!
//! ```text
//! Σ_k [ −c_u[k]·u[k] − log2(1 + s4[k]/w[k]) ]
//! ```
//!
//! subject to, per slot,
//!
//! ```text
//! (x_k − x_b[k])² ≤ u_k                  (relaxed Bob-distance)
//! w_k ≤ g[k]·x_k + e0[k]                 (linearized Eve-distance)
//! w_k ≥ w_floor                          (log-argument guard)
//! x_k ≤ x_b[k] − d_foll                  (following distance)
//! |x_k − x_{k−1}| ≤ v_max·Δt             (speed, anchored before the window)
//! |x_{k+1} − 2x_k + x_{k−1}| ≤ a_max·Δt² (acceleration, anchored likewise)
//! ```
//!
//! The Newton system has bandwidth 6 under the (x, u, w) interleaving, so
//! each step is a banded Cholesky solve, O(slots). Barrier multipliers
//! `λ_i = 1/(t·(−g_i))` certify a KKT point: the returned stationarity
//! residual is `‖∇φ‖∞/t` and the duality gap `m/t`.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BarrierError {
    #[error("initial point infeasible: constraint {index} at {value}")]
    InfeasibleStart { index: usize, value: f64 },
    #[error("line search stalled (iteration {newton_iter})")]
    LineSearchStalled { newton_iter: usize },
    #[error("KKT residual {residual} above tolerance {tol}")]
    KktResidual { residual: f64, tol: f64 },
}

/// Per-slot data of one convexified subproblem.
#[derive(Debug, Clone)]
pub struct Subproblem {
    /// Linear coefficient of −u_k in the objective (≥ 0).
    pub c_u: Vec<f64>,
    /// Eve-side numerators s4[k] (≥ 0).
    pub s4: Vec<f64>,
    /// Bob positions per slot.
    pub x_b: Vec<f64>,
    /// Eve positions per slot.
    pub x_e: Vec<f64>,
    /// Linearized w-bound slope: w ≤ g·x + e0.
    pub g: Vec<f64>,
    pub e0: Vec<f64>,
    /// Alice positions one and two instants before the window.
    pub anchor1: f64,
    pub anchor2: f64,
    pub dt: f64,
    pub v_max: f64,
    pub a_max: f64,
    pub d_foll: f64,
    pub w_floor: f64,
}

#[derive(Debug, Clone)]
pub struct BarrierSolution {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    /// `‖∇φ‖∞ / t` at the final barrier parameter.
    pub kkt_stationarity: f64,
    /// `m / t`: complementarity gap bound.
    pub duality_gap: f64,
    pub newton_iters: usize,
}

/// One inequality g(z) ≤ 0 of the subproblem.
enum Constraint {
    /// (x_k − b)² − u_k ≤ 0.
    QuadU { k: usize, b: f64 },
    /// Σ coef·z(idx) − rhs ≤ 0 (up to three terms).
    Linear {
        terms: [(usize, f64); 3],
        len: usize,
        rhs: f64,
    },
}

impl Constraint {
    fn lin(terms: &[(usize, f64)], rhs: f64) -> Self {
        let mut t = [(0usize, 0.0f64); 3];
        t[..terms.len()].copy_from_slice(terms);
        Constraint::Linear {
            terms: t,
            len: terms.len(),
            rhs,
        }
    }

    fn value(&self, z: &[f64]) -> f64 {
        match *self {
            Constraint::QuadU { k, b } => {
                let x = z[3 * k];
                let u = z[3 * k + 1];
                (x - b) * (x - b) - u
            }
            Constraint::Linear { terms, len, rhs } => {
                let mut v = -rhs;
                for &(idx, c) in &terms[..len] {
                    v += c * z[idx];
                }
                v
            }
        }
    }
}

/// Symmetric banded matrix, lower storage: `band[d][i]` is entry (i, i−d).
struct Banded {
    dim: usize,
    bw: usize,
    band: Vec<f64>,
}

impl Banded {
    fn zeros(dim: usize, bw: usize) -> Self {
        Banded {
            dim,
            bw,
            band: vec![0.0; dim * (bw + 1)],
        }
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        // Lower triangle only; callers pass both orders.
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        debug_assert!(d <= self.bw);
        self.band[d * self.dim + hi] += v;
    }

    fn clear(&mut self) {
        self.band.fill(0.0);
    }

    /// In-place banded Cholesky; returns false if a pivot fails.
    fn cholesky(&mut self) -> bool {
        let (n, bw) = (self.dim, self.bw);
        for j in 0..n {
            let mut diag = self.band[j];
            let klo = j.saturating_sub(bw);
            for k in klo..j {
                let l_jk = self.band[(j - k) * n + j];
                diag -= l_jk * l_jk;
            }
            if diag <= 0.0 || !diag.is_finite() {
                return false;
            }
            let l_jj = diag.sqrt();
            self.band[j] = l_jj;
            let imax = (j + bw).min(n - 1);
            for i in (j + 1)..=imax {
                let mut v = self.band[(i - j) * n + i];
                let klo = i.saturating_sub(bw).max(j.saturating_sub(bw));
                for k in klo..j {
                    if i - k <= bw {
                        v -= self.band[(i - k) * n + i] * self.band[(j - k) * n + j];
                    }
                }
                self.band[(i - j) * n + i] = v / l_jj;
            }
        }
        true
    }

    /// Solve L·Lᵀ·x = b after `cholesky`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.dim, self.bw);
        let mut y = b.to_vec();
        for i in 0..n {
            let klo = i.saturating_sub(bw);
            let mut v = y[i];
            for k in klo..i {
                v -= self.band[(i - k) * n + i] * y[k];
            }
            y[i] = v / self.band[i];
        }
        for i in (0..n).rev() {
            let imax = (i + bw).min(n - 1);
            let mut v = y[i];
            for k in (i + 1)..=imax {
                v -= self.band[(k - i) * n + k] * y[k];
            }
            y[i] = v / self.band[i];
        }
        y
    }
}

pub struct BarrierOptions {
    pub t0: f64,
    pub mu: f64,
    pub gap_tol: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub kkt_tol: f64,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        BarrierOptions {
            t0: 1.0,
            mu: 20.0,
            gap_tol: 1e-9,
            newton_tol: 1e-12,
            max_newton: 400,
            kkt_tol: 1e-6,
        }
    }
}

impl Subproblem {
    fn n(&self) -> usize {
        self.c_u.len()
    }

    fn constraints(&self) -> Vec<Constraint> {
        let n = self.n();
        let mut cons = Vec::with_capacity(7 * n + 4);
        let xv = |k: usize| 3 * k;
        let wv = |k: usize| 3 * k + 2;
        for k in 0..n {
            cons.push(Constraint::QuadU { k, b: self.x_b[k] });
            cons.push(Constraint::lin(
                &[(wv(k), 1.0), (xv(k), -self.g[k])],
                self.e0[k],
            ));
            cons.push(Constraint::lin(&[(wv(k), -1.0)], -self.w_floor));
            cons.push(Constraint::lin(&[(xv(k), 1.0)], self.x_b[k] - self.d_foll));
        }
        // Speed pairs over the anchored sequence [a1, x_0, …, x_{n−1}].
        let vstep = self.v_max * self.dt;
        cons.push(Constraint::lin(&[(xv(0), 1.0)], self.anchor1 + vstep));
        cons.push(Constraint::lin(&[(xv(0), -1.0)], vstep - self.anchor1));
        for k in 1..n {
            cons.push(Constraint::lin(&[(xv(k), 1.0), (xv(k - 1), -1.0)], vstep));
            cons.push(Constraint::lin(&[(xv(k), -1.0), (xv(k - 1), 1.0)], vstep));
        }
        // Acceleration triples over [a2, a1, x_0, …, x_{n−1}].
        let astep = self.a_max * self.dt * self.dt;
        cons.push(Constraint::lin(
            &[(xv(0), 1.0)],
            astep + 2.0 * self.anchor1 - self.anchor2,
        ));
        cons.push(Constraint::lin(
            &[(xv(0), -1.0)],
            astep - 2.0 * self.anchor1 + self.anchor2,
        ));
        if n >= 2 {
            cons.push(Constraint::lin(
                &[(xv(1), 1.0), (xv(0), -2.0)],
                astep - self.anchor1,
            ));
            cons.push(Constraint::lin(
                &[(xv(1), -1.0), (xv(0), 2.0)],
                astep + self.anchor1,
            ));
            for k in 2..n {
                cons.push(Constraint::lin(
                    &[(xv(k), 1.0), (xv(k - 1), -2.0), (xv(k - 2), 1.0)],
                    astep,
                ));
                cons.push(Constraint::lin(
                    &[(xv(k), -1.0), (xv(k - 1), 2.0), (xv(k - 2), -1.0)],
                    astep,
                ));
            }
        }
        cons
    }

    /// Surrogate objective value at (x, u, w) packed in z (the quantity the
    /// solver maximizes, constants dropped).
    fn objective(&self, z: &[f64]) -> f64 {
        let mut f = 0.0;
        for k in 0..self.n() {
            let u = z[3 * k + 1];
            let w = z[3 * k + 2];
            f += -self.c_u[k] * u - (1.0 + self.s4[k] / w).log2();
        }
        f
    }

    /// Strictly feasible start built from a kinematically feasible x.
    fn initial_point(&self, x0: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut z = vec![0.0; 3 * n];
        for k in 0..n {
            let x = x0[k];
            let u = (x - self.x_b[k]).powi(2);
            let w_ub = self.g[k] * x + self.e0[k];
            z[3 * k] = x;
            z[3 * k + 1] = u + u.max(1.0) * 0.25;
            z[3 * k + 2] = self.w_floor + 0.99 * (w_ub - self.w_floor).max(1e-9);
        }
        z
    }

    /// Maximize the surrogate from a kinematically feasible `x0`.
    pub fn solve(&self, x0: &[f64], opts: &BarrierOptions) -> Result<BarrierSolution, BarrierError> {
        let n = self.n();
        let dim = 3 * n;
        let cons = self.constraints();
        let m = cons.len() as f64;
        let mut z = self.initial_point(x0);
        for (i, c) in cons.iter().enumerate() {
            let v = c.value(&z);
            if v >= 0.0 {
                return Err(BarrierError::InfeasibleStart { index: i, value: v });
            }
        }

        let ln2 = std::f64::consts::LN_2;
        let mut t = opts.t0;
        let mut hess = Banded::zeros(dim, 6);
        let mut total_newton = 0usize;
        let mut grad_inf = f64::INFINITY;

        loop {
            // Newton iterations for the current barrier parameter.
            for _ in 0..opts.max_newton {
                total_newton += 1;
                let mut grad = vec![0.0; dim];
                hess.clear();
                // Objective part of φ = −t·F + barrier.
                for k in 0..n {
                    let ui = 3 * k + 1;
                    let wi = 3 * k + 2;
                    grad[ui] += t * self.c_u[k];
                    let w = z[wi];
                    let s4 = self.s4[k];
                    // dF/dw = (1/ln2)(1/w − 1/(w+s4)) ≥ 0.
                    grad[wi] += -t * (1.0 / w - 1.0 / (w + s4)) / ln2;
                    let d2 = (1.0 / (w * w) - 1.0 / ((w + s4) * (w + s4))) / ln2;
                    hess.add(wi, wi, t * d2);
                }
                // Barrier part.
                for c in &cons {
                    let gval = c.value(&z);
                    let inv = -1.0 / gval; // 1/(−g) > 0
                    match *c {
                        Constraint::QuadU { k, b } => {
                            let xi = 3 * k;
                            let ui = 3 * k + 1;
                            let dx = 2.0 * (z[xi] - b);
                            grad[xi] += dx * inv;
                            grad[ui] += -inv;
                            let inv2 = inv * inv;
                            hess.add(xi, xi, dx * dx * inv2 + 2.0 * inv);
                            hess.add(ui, ui, inv2);
                            hess.add(xi, ui, -dx * inv2);
                        }
                        Constraint::Linear { terms, len, .. } => {
                            let inv2 = inv * inv;
                            for &(i, ci) in &terms[..len] {
                                grad[i] += ci * inv;
                                for &(j, cj) in &terms[..len] {
                                    if i >= j {
                                        hess.add(i, j, ci * cj * inv2);
                                    }
                                }
                            }
                        }
                    }
                }
                grad_inf = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));

                let mut sys = Banded {
                    dim,
                    bw: 6,
                    band: hess.band.clone(),
                };
                if !sys.cholesky() {
                    // Regularize once; the barrier Hessian is PD on paper but
                    // can lose definiteness to rounding near the boundary.
                    let mut reg = Banded {
                        dim,
                        bw: 6,
                        band: hess.band.clone(),
                    };
                    for i in 0..dim {
                        reg.band[i] += 1e-10 * (1.0 + reg.band[i].abs());
                    }
                    if !reg.cholesky() {
                        return Err(BarrierError::LineSearchStalled {
                            newton_iter: total_newton,
                        });
                    }
                    sys = reg;
                }
                let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
                let step = sys.solve(&neg_grad);
                let decrement2: f64 = -grad.iter().zip(&step).map(|(g, p)| g * p).sum::<f64>();
                if decrement2 * 0.5 <= opts.newton_tol {
                    break;
                }

                // Backtrack into the domain, then Armijo on φ.
                let phi = |zz: &[f64]| -> f64 {
                    let mut v = -t * self.objective(zz);
                    for c in &cons {
                        let g = c.value(zz);
                        if g >= 0.0 {
                            return f64::INFINITY;
                        }
                        v -= (-g).ln();
                    }
                    v
                };
                let phi0 = phi(&z);
                let slope: f64 = grad.iter().zip(&step).map(|(g, p)| g * p).sum();
                let mut alpha = 1.0;
                let mut moved = false;
                for _ in 0..60 {
                    let cand: Vec<f64> =
                        z.iter().zip(&step).map(|(zi, p)| zi + alpha * p).collect();
                    if phi(&cand) <= phi0 + 0.25 * alpha * slope {
                        z = cand;
                        moved = true;
                        break;
                    }
                    alpha *= 0.5;
                }
                if !moved {
                    // No descent left at this t: numerically converged.
                    break;
                }
            }

            if m / t < opts.gap_tol {
                break;
            }
            t *= opts.mu;
        }

        let kkt = grad_inf / t;
        let gap = m / t;
        if kkt > opts.kkt_tol || gap > opts.kkt_tol {
            return Err(BarrierError::KktResidual {
                residual: kkt.max(gap),
                tol: opts.kkt_tol,
            });
        }
        let mut x = vec![0.0; n];
        let mut u = vec![0.0; n];
        let mut w = vec![0.0; n];
        for k in 0..n {
            x[k] = z[3 * k];
            u[k] = z[3 * k + 1];
            w[k] = z[3 * k + 2];
        }
        Ok(BarrierSolution {
            x,
            u,
            w,
            kkt_stationarity: kkt,
            duality_gap: gap,
            newton_iters: total_newton,
        })
    }

    /// Residual of the worst violated physical constraint at `x` (positive
    /// means violation), for feasibility reporting.
    pub fn feasibility_residual(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let mut worst = f64::NEG_INFINITY;
        let vstep = self.v_max * self.dt;
        let astep = self.a_max * self.dt * self.dt;
        for k in 0..n {
            worst = worst.max(x[k] - (self.x_b[k] - self.d_foll));
            let prev = if k == 0 { self.anchor1 } else { x[k - 1] };
            worst = worst.max((x[k] - prev).abs() - vstep);
            let prev2 = if k == 0 {
                self.anchor2
            } else if k == 1 {
                self.anchor1
            } else {
                x[k - 2]
            };
            worst = worst.max((x[k] - 2.0 * prev + prev2).abs() - astep);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A little single-slot instance with generous kinematic freedom.
    fn single_slot(c_u: f64, s4: f64, x_b: f64, x_e: f64, x0: f64, d_lane: f64) -> Subproblem {
        Subproblem {
            c_u: vec![c_u],
            s4: vec![s4],
            x_b: vec![x_b],
            x_e: vec![x_e],
            g: vec![2.0 * (x0 - x_e)],
            e0: vec![-x0 * x0 + x_e * x_e + d_lane * d_lane],
            anchor1: x0,
            anchor2: x0,
            dt: 1.0,
            v_max: 50.0,
            a_max: 100.0,
            d_foll: 5.0,
            w_floor: 1e-6,
        }
    }

    #[test]
    fn banded_cholesky_solves_spd_system() {
        // Tridiagonal SPD: 2 on the diagonal, −1 off.
        let n = 12;
        let mut m = Banded::zeros(n, 6);
        for i in 0..n {
            m.add(i, i, 2.0);
            if i > 0 {
                m.add(i, i - 1, -1.0);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        // b = A·x.
        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] = 2.0 * x_true[i];
            if i > 0 {
                b[i] -= x_true[i - 1];
            }
            if i + 1 < n {
                b[i] -= x_true[i + 1];
            }
        }
        assert!(m.cholesky());
        let x = m.solve(&b);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn single_slot_matches_grid_search() {
        // Maximize −c_u(x−xb)² − log2(1 + s4/(g·x + e0)) over the follow/speed box.
        let x_b = 30.0;
        let x_e = 10.0;
        let x0 = 20.0;
        let sp = single_slot(0.02, 50.0, x_b, x_e, x0, 3.6);
        let sol = sp.solve(&[x0], &BarrierOptions::default()).unwrap();
        assert!(sol.kkt_stationarity <= 1e-6);
        assert!(sp.feasibility_residual(&sol.x) <= 1e-9);

        // Brute-force oracle over x with u, w at their tight bounds.
        let eval = |x: f64| -> f64 {
            let u = (x - x_b) * (x - x_b);
            let w = (sp.g[0] * x + sp.e0[0]).max(sp.w_floor);
            -sp.c_u[0] * u - (1.0 + sp.s4[0] / w).log2()
        };
        let lo = x0 - sp.v_max * sp.dt;
        let hi = (x0 + sp.v_max * sp.dt).min(x_b - sp.d_foll);
        let mut best_x = lo;
        let mut best = f64::NEG_INFINITY;
        let grid = 400_000;
        for i in 0..=grid {
            let x = lo + (hi - lo) * i as f64 / grid as f64;
            let v = eval(x);
            if v > best {
                best = v;
                best_x = x;
            }
        }
        assert!(
            (sol.x[0] - best_x).abs() < 1e-3,
            "barrier {} vs grid {best_x}",
            sol.x[0]
        );
    }

    #[test]
    fn no_eve_term_presses_toward_bob() {
        // s4 = 0: objective decreasing in u only, so x runs to the follow
        // boundary x_b − d_foll (approaching Bob shrinks u).
        let x_b = 30.0;
        let sp = single_slot(0.05, 0.0, x_b, 10.0, 20.0, 3.6);
        let sol = sp.solve(&[20.0], &BarrierOptions::default()).unwrap();
        assert!(
            (sol.x[0] - (x_b - sp.d_foll)).abs() < 1e-4,
            "x = {}",
            sol.x[0]
        );
        // And u hugs its lower envelope.
        let u_env = (sol.x[0] - x_b) * (sol.x[0] - x_b);
        assert!((sol.u[0] - u_env).abs() / u_env < 1e-3);
    }

    #[test]
    fn infeasible_start_rejected() {
        let mut sp = single_slot(0.05, 1.0, 30.0, 10.0, 20.0, 3.6);
        sp.d_foll = 15.0; // x0 = 20 > 30 − 15 violates following distance
        assert!(matches!(
            sp.solve(&[20.0], &BarrierOptions::default()),
            Err(BarrierError::InfeasibleStart { .. })
        ));
    }

    #[test]
    fn kinematic_chain_respected() {
        // Three slots, tight speed bound: the solution cannot jump.
        let x0 = [20.0, 20.5, 21.0];
        let n = 3;
        let sp = Subproblem {
            c_u: vec![0.05; n],
            s4: vec![10.0; n],
            x_b: vec![40.0; n],
            x_e: vec![5.0; n],
            g: x0.iter().map(|&x| 2.0 * (x - 5.0)).collect(),
            e0: x0.iter().map(|&x| -x * x + 25.0 + 12.96).collect(),
            anchor1: 19.5,
            anchor2: 19.0,
            dt: 1.0,
            v_max: 0.5,
            a_max: 3.0,
            d_foll: 5.0,
            w_floor: 1e-6,
        };
        let sol = sp.solve(&x0, &BarrierOptions::default()).unwrap();
        assert!(sp.feasibility_residual(&sol.x) <= 1e-9);
        assert!((sol.x[0] - 19.5).abs() <= 0.5 + 1e-9);
        for k in 1..n {
            assert!((sol.x[k] - sol.x[k - 1]).abs() <= 0.5 + 1e-9);
        }
    }
}
