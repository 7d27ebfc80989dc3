//! Monolithic quasi-Newton solve of the coupled displacement / phase-field
//! residual for one load increment.
//!
//! Search directions come from limited-memory BFGS whose initial inverse is
//! the block-diagonal tangent diag(K_uu, K_φφ), factorised by sparse
//! Cholesky and refreshed periodically. The off-diagonal coupling is never
//! formed; the secant pairs pick it up.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::assembly::{Assembler, EvalRequest, Evaluation};
use super::linear::SpdSolver;
use super::material::PhaseFieldMaterial;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Relative tolerance on each block's ∞-norm against its force scale.
    pub rtol: f64,
    /// Absolute floors; `None` derives them from the material and mesh.
    pub atol_u: Option<f64>,
    pub atol_phi: Option<f64>,
    /// Secant pairs kept.
    pub memory: usize,
    /// Iterations between tangent refreshes.
    pub refresh_interval: usize,
    pub line_search_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 3000,
            rtol: 1e-5,
            atol_u: None,
            atol_phi: None,
            memory: 20,
            refresh_interval: 8,
            line_search_iterations: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IncrementReport {
    pub iterations: usize,
    pub refreshes: usize,
    pub residual_u: f64,
    pub residual_phi: f64,
}

/// Nodal fields plus integration-point history.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    pub history: Vec<f64>,
}

impl FieldState {
    pub fn zeros(n_nodes: usize, n_gauss: usize) -> Self {
        Self {
            u: vec![0.0; 2 * n_nodes],
            phi: vec![0.0; n_nodes],
            history: vec![0.0; n_gauss],
        }
    }
}

/// ∞-norm that propagates NaN (f64::max would drop it).
fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| {
        if x.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(x.abs())
        }
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Block tangent solver shared across increments (the symbolic analysis is
/// reused).
#[derive(Debug)]
pub struct QuasiNewton {
    pub options: SolverOptions,
    ku: SpdSolver,
    kp: SpdSolver,
}

impl QuasiNewton {
    pub fn new(asm: &Assembler, options: SolverOptions) -> Self {
        Self {
            options,
            ku: SpdSolver::new(asm.u_pattern()),
            kp: SpdSolver::new(asm.phi_pattern()),
        }
    }

    fn tolerances(&self, asm: &Assembler, mat: &PhaseFieldMaterial) -> (f64, f64) {
        let e = mat.plane_modulus();
        let atol_u = self.options.atol_u.unwrap_or(1e-10 * e * asm.min_edge);
        let atol_phi = self
            .options
            .atol_phi
            .unwrap_or(1e-8 * mat.g_c / mat.ell * asm.min_area);
        (atol_u, atol_phi)
    }

    fn refresh(&mut self, ev: &Evaluation) -> Result<()> {
        self.ku.factorize(&ev.k_uu, "displacement")?;
        self.kp.factorize(&ev.k_phiphi, "phase-field")
    }

    fn apply_h0(&self, q: &mut [f64], nu: usize) -> Result<()> {
        let (a, b) = q.split_at_mut(nu);
        self.ku.solve_in_place(a)?;
        self.kp.solve_in_place(b)
    }

    /// Solves the increment in place. Prescribed entries of `state.u` must
    /// already hold the target values. On success `state.history` holds
    /// the committed history.
    pub fn solve(
        &mut self,
        asm: &Assembler,
        mat: &PhaseFieldMaterial,
        state: &mut FieldState,
        step: usize,
    ) -> Result<IncrementReport> {
        let opts = self.options;
        let dofs = &asm.dofs;
        let nu = dofs.n_u();
        let (atol_u, atol_phi) = self.tolerances(asm, mat);
        let (xu, xp) = dofs.gather(&state.u, &state.phi);
        let mut x: Vec<f64> = xu.into_iter().chain(xp).collect();
        dofs.update_dependent(&mut state.u, &mut state.phi);

        let h_old = state.history.clone();
        let mut u = state.u.clone();
        let mut phi = state.phi.clone();
        let mut eval = |x: &[f64], tangent: bool| -> Evaluation {
            dofs.scatter(&x[..nu], &x[nu..], &mut u, &mut phi);
            asm.evaluate(
                mat,
                &u,
                &phi,
                &h_old,
                EvalRequest {
                    tangent,
                    ..Default::default()
                },
            )
        };
        let stack =
            |ev: &Evaluation| -> Vec<f64> { ev.r_u.iter().chain(&ev.r_phi).copied().collect() };
        let converged = |ev: &Evaluation| -> (bool, f64, f64) {
            let ru = inf_norm(&ev.r_u);
            let rp = inf_norm(&ev.r_phi);
            let tu = opts.rtol * inf_norm(&ev.scale_u) + atol_u;
            let tp = opts.rtol * inf_norm(&ev.scale_phi) + atol_phi;
            (ru <= tu && rp <= tp, ru, rp)
        };

        let mut ev = eval(&x, true);
        let mut report = IncrementReport::default();
        self.refresh(&ev)?;
        report.refreshes = 1;
        let mut r = stack(&ev);
        let mut pairs: VecDeque<Pair> = VecDeque::new();
        let mut since_refresh = 0usize;
        let mut result = converged(&ev);
        while !result.0 {
            if report.iterations >= opts.max_iterations
                || !(result.1.is_finite() && result.2.is_finite())
            {
                return Err(Error::NonConvergence {
                    step,
                    iterations: report.iterations,
                    residual: result.1.max(result.2),
                });
            }
            report.iterations += 1;
            if since_refresh >= opts.refresh_interval {
                let ev_t = eval(&x, true);
                self.refresh(&ev_t)?;
                report.refreshes += 1;
                since_refresh = 0;
            }
            since_refresh += 1;

            // two-loop recursion
            let mut q = r.clone();
            let mut alphas = Vec::with_capacity(pairs.len());
            for p in pairs.iter().rev() {
                let a = p.rho * dot(&p.s, &q);
                q.iter_mut().zip(&p.y).for_each(|(qi, yi)| *qi -= a * yi);
                alphas.push(a);
            }
            self.apply_h0(&mut q, nu)?;
            for (p, a) in pairs.iter().zip(alphas.iter().rev()) {
                let b = p.rho * dot(&p.y, &q);
                q.iter_mut()
                    .zip(&p.s)
                    .for_each(|(qi, si)| *qi += (a - b) * si);
            }
            let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
            let mut s0 = dot(&d, &r);
            if !(s0 < 0.0) {
                // lost descent: restart from the block tangent
                pairs.clear();
                let ev_t = eval(&x, true);
                self.refresh(&ev_t)?;
                report.refreshes += 1;
                since_refresh = 0;
                let mut q = r.clone();
                self.apply_h0(&mut q, nu)?;
                d = q.iter().map(|v| -v).collect();
                s0 = dot(&d, &r);
            }

            // secant line search on s(α) = dᵀ r(x + α d)
            let trial = |alpha: f64, eval: &mut dyn FnMut(&[f64], bool) -> Evaluation| {
                let xt: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
                let evt = eval(&xt, false);
                (xt, evt)
            };
            let (mut a_prev, mut s_prev) = (0.0, s0);
            let mut alpha = 1.0;
            let (mut xt, mut evt) = trial(alpha, &mut eval);
            let mut rt = stack(&evt);
            let mut st = dot(&d, &rt);
            for _ in 0..opts.line_search_iterations {
                if st.abs() <= 0.5 * s0.abs() {
                    break;
                }
                let denom = st - s_prev;
                if denom.abs() < 1e-300 {
                    break;
                }
                let next = (alpha - st * (alpha - a_prev) / denom).clamp(0.05, 8.0);
                if (next - alpha).abs() < 1e-3 {
                    break;
                }
                a_prev = alpha;
                s_prev = st;
                alpha = next;
                let t = trial(alpha, &mut eval);
                xt = t.0;
                evt = t.1;
                rt = stack(&evt);
                st = dot(&d, &rt);
            }

            let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = rt.iter().zip(&r).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                pairs.push_back(Pair {
                    s,
                    y,
                    rho: 1.0 / sy,
                });
                if pairs.len() > opts.memory {
                    pairs.pop_front();
                }
            }
            x = xt;
            r = rt;
            ev = evt;
            result = converged(&ev);
        }
        report.residual_u = result.1;
        report.residual_phi = result.2;
        dofs.scatter(&x[..nu], &x[nu..], &mut state.u, &mut state.phi);
        state.history = ev.h_eff;
        Ok(report)
    }
}
