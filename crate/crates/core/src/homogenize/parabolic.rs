//! Heat-type cell problem `∂_t u - ∇·(a∇u) = 0` on `K_R`, `u = 0` on the
//! boundary, started from the weak divergence `∇·(a e_i)`.
//!
//! Time integration uses the Rosenbrock 2(3) pair of Shampine and Reichelt:
//! the solution is advanced with the L-stable second-order formula and the
//! third stage only serves the error estimate. With `d = 1/(2 + √2)`,
//! `W = M + dτK` and the semi-discrete system `M u' = -K u`, one step reads
//!
//! ```text
//! W k1 = -K u_n
//! W (k2 - k1) = -K (u_n + τ/2 k1) - M k1
//! u_{n+1} = u_n + τ k2
//! W k3 = -K u_{n+1} - (6 + √2)(M k2 + K (u_n + τ/2 k1)) - 2 (M k1 + K u_n)
//! err = τ/6 (k1 - 2 k2 + k3)
//! ```
//!
//! Filtered products `∫ u^i u^j μ_L` and the running `∫ u dt` are
//! accumulated with the trapezoidal rule over accepted steps.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{HomogenizedTensor, Method, MethodParams, SolverOptions};
use crate::error::{invalid, Error, Result};
use crate::fem::{assemble_with, filtered_coeff_average, weighted_mass, Boundary, FemSystem, Grid};
use crate::filters::{make_filter, BoxFilter};
use crate::linalg::{axpy, cg_solve, cg_solve_from, dot, CgOptions, SparseSym};
use crate::matrix::Matrix;
use crate::tensor_field::TensorField;

const D: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
const E32: f64 = 6.0 + std::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeOptions {
    /// Relative local error tolerance of the step-size controller.
    pub tol: f64,
    pub dt_initial: Option<f64>,
    pub dt_min: f64,
    pub max_steps: usize,
    /// Keep the nodal states of every accepted step.
    pub keep_states: bool,
}

impl Default for TimeOptions {
    fn default() -> Self {
        TimeOptions { tol: 1e-5, dt_initial: None, dt_min: 1e-14, max_steps: 200_000, keep_states: false }
    }
}

/// Accepted time levels of the parabolic cell problems (all directions).
#[derive(Clone, Debug)]
pub struct ParabolicTrajectory {
    pub grid: Grid,
    pub t_final: f64,
    pub times: Vec<f64>,
    /// `‖u^i(t_m)‖_{L²}`, indexed `[step][direction]`.
    pub l2_norms: Vec<Vec<f64>>,
    pub filters: Vec<BoxFilter>,
    /// Running `∫_0^{t_m} ∫ u^i u^j μ_L dy dt`, indexed `[filter][step]`.
    pub accumulated: Vec<Vec<Matrix>>,
    /// `∫_0^T u^i dt` per direction.
    pub time_integrals: Vec<Vec<f64>>,
    /// Nodal states `[step][direction]` when requested.
    pub states: Option<Vec<Vec<Vec<f64>>>>,
    pub rejected_steps: usize,
    pub cg_iterations: usize,
}

impl ParabolicTrajectory {
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Index of the recorded filter with side `l` and order `q`.
    pub fn find_filter(&self, l: f64, q: u32) -> Option<usize> {
        self.filters
            .iter()
            .position(|f| f.q() == q && (f.side() - l).abs() <= 1e-12 * l.max(1.0))
    }

    /// `∫_0^T ∫ u^i u^j μ_L` for recorded filter `idx`.
    pub fn accumulated_final(&self, idx: usize) -> Matrix {
        *self.accumulated[idx].last().expect("trajectory has at least one time level")
    }
}

/// Assembles the Dirichlet system on `K_R` and integrates to time `t`.
pub fn evolve_parabolic(
    field: &TensorField,
    r: f64,
    h: f64,
    t: f64,
    filters: &[BoxFilter],
    time: &TimeOptions,
    opts: &SolverOptions,
) -> Result<ParabolicTrajectory> {
    let grid = Grid::with_mesh_size(field.dim(), r, h, Boundary::Dirichlet)?;
    let system = assemble_with(field, &grid, opts.quad_points)?;
    evolve_parabolic_system(&system, t, filters, time, opts)
}

pub fn evolve_parabolic_system(
    system: &FemSystem,
    t_final: f64,
    filters: &[BoxFilter],
    time: &TimeOptions,
    opts: &SolverOptions,
) -> Result<ParabolicTrajectory> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return invalid(format!("final time must be positive and finite, got {t_final}"));
    }
    if !(time.tol > 0.0) {
        return invalid(format!("time tolerance must be positive, got {}", time.tol));
    }
    let grid = system.grid;
    let dim = grid.dim();
    let (k, m) = (&system.stiffness, &system.mass);
    let cg = opts.cg();
    // stage solves only need to sit well below the local error tolerance
    let stage_cg = CgOptions { tol: cg.tol.max(1e-1 * time.tol), ..cg };
    let weighted: Vec<SparseSym> = filters.iter().map(|f| weighted_mass(&grid, f)).collect::<Result<_>>()?;

    // L² projection of the weak divergence
    let mut cg_iterations = 0;
    let mut u = Vec::with_capacity(dim);
    for load in &system.loads {
        let (u0, st) = cg_solve(m, load, &cg)?;
        cg_iterations += st.iterations;
        u.push(u0);
    }
    let norms0: Vec<f64> = u.iter().map(|v| system.l2_norm(v)).collect();
    let u0_scale = norms0.iter().cloned().fold(0.0, f64::max);

    let mut traj = ParabolicTrajectory {
        grid,
        t_final,
        times: vec![0.0],
        l2_norms: vec![norms0.clone()],
        filters: filters.to_vec(),
        accumulated: vec![vec![Matrix::zeros(dim)]; filters.len()],
        time_integrals: vec![vec![0.0; grid.dof_count()]; dim],
        states: time.keep_states.then(|| vec![u.clone()]),
        rejected_steps: 0,
        cg_iterations: 0,
    };
    if u0_scale == 0.0 {
        // zero initial data stays zero
        traj.times.push(t_final);
        traj.l2_norms.push(norms0);
        for acc in traj.accumulated.iter_mut() {
            acc.push(Matrix::zeros(dim));
        }
        if let Some(states) = traj.states.as_mut() {
            states.push(u);
        }
        traj.cg_iterations = cg_iterations;
        return Ok(traj);
    }

    let atol = 1e-4 * time.tol * u0_scale;
    let mut products = filtered_products(&weighted, &u);
    let mut norms = norms0;
    let mut t = 0.0;
    let mut dt = time.dt_initial.unwrap_or(1e-2 * grid.h() * grid.h()).min(t_final);
    let mut guesses: Vec<StageGuess> = vec![StageGuess::zero(grid.dof_count()); dim];
    let mut accepted = 0usize;

    while t < t_final {
        if accepted + traj.rejected_steps >= time.max_steps {
            return Err(Error::IntegratorFailure { time: t, message: format!("step limit {} reached", time.max_steps) });
        }
        let remaining = t_final - t;
        if dt >= remaining || remaining - dt < 1e-3 * dt {
            dt = remaining;
        }
        if dt < time.dt_min {
            return Err(Error::IntegratorFailure { time: t, message: format!("step size {dt:e} underflow") });
        }
        let w = m.linear_combination(1.0, k, D * dt);
        let results: Vec<StepResult> = (0..dim)
            .into_par_iter()
            .map(|i| rosenbrock_step(k, m, &w, &u[i], dt, &guesses[i], &stage_cg))
            .collect::<Result<_>>()?;

        let mut err = 0.0f64;
        for (i, res) in results.iter().enumerate() {
            cg_iterations += res.iterations;
            let new_norm = system.l2_norm(&res.u);
            let scale = time.tol * norms[i].max(new_norm) + atol;
            err = err.max(res.err_norm / scale);
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-1.0 / 3.0) } else { 5.0 };
        if err > 1.0 {
            traj.rejected_steps += 1;
            dt *= factor.clamp(0.2, 0.9);
            continue;
        }

        let t_new = t + dt;
        let u_new: Vec<Vec<f64>> = results.iter().map(|r| r.u.clone()).collect();
        let norms_new: Vec<f64> = u_new.iter().map(|v| system.l2_norm(v)).collect();
        for i in 0..dim {
            if norms_new[i] > norms[i] * (1.0 + 1e-9) {
                return Err(Error::IntegratorFailure {
                    time: t_new,
                    message: format!("L2 norm of direction {i} grew from {:e} to {:e}", norms[i], norms_new[i]),
                });
            }
        }
        let products_new = filtered_products(&weighted, &u_new);
        for (f, acc) in traj.accumulated.iter_mut().enumerate() {
            let prev = *acc.last().expect("non-empty");
            acc.push(prev.add(&products[f].add(&products_new[f]).scale(0.5 * dt)));
        }
        for i in 0..dim {
            axpy(0.5 * dt, &u[i], &mut traj.time_integrals[i]);
            axpy(0.5 * dt, &u_new[i], &mut traj.time_integrals[i]);
        }
        for (g, r) in guesses.iter_mut().zip(results) {
            *g = StageGuess { k1: r.next_k1, delta: r.delta, dt };
        }
        u = u_new;
        norms = norms_new;
        products = products_new;
        t = if t_new >= t_final * (1.0 - 1e-14) { t_final } else { t_new };
        accepted += 1;
        traj.times.push(t);
        traj.l2_norms.push(norms.clone());
        if let Some(states) = traj.states.as_mut() {
            states.push(u.clone());
        }
        dt *= factor.clamp(0.2, 5.0);
    }
    traj.cg_iterations = cg_iterations;
    Ok(traj)
}

struct StepResult {
    u: Vec<f64>,
    next_k1: Vec<f64>,
    delta: Vec<f64>,
    err_norm: f64,
    iterations: usize,
}

/// Extrapolated starting vectors for the stage solves of the next step.
#[derive(Clone)]
struct StageGuess {
    k1: Vec<f64>,
    delta: Vec<f64>,
    dt: f64,
}

impl StageGuess {
    fn zero(n: usize) -> Self {
        StageGuess { k1: vec![0.0; n], delta: vec![0.0; n], dt: 0.0 }
    }
}

fn rosenbrock_step(
    k: &SparseSym,
    m: &SparseSym,
    w: &SparseSym,
    u: &[f64],
    dt: f64,
    guess: &StageGuess,
    cg: &CgOptions,
) -> Result<StepResult> {
    let ku = k.matvec(u);
    let rhs1: Vec<f64> = ku.iter().map(|v| -v).collect();
    let (k1, s1) = cg_solve_from(w, &rhs1, guess.k1.clone(), cg)?;

    let mut mid = u.to_vec();
    axpy(0.5 * dt, &k1, &mut mid);
    let kmid = k.matvec(&mid);
    let mk1 = m.matvec(&k1);
    let rhs2: Vec<f64> = kmid.iter().zip(&mk1).map(|(a, b)| -a - b).collect();
    // k2 - k1 scales with the step size
    let ratio = if guess.dt > 0.0 { dt / guess.dt } else { 0.0 };
    let guess2: Vec<f64> = guess.delta.iter().map(|v| ratio * v).collect();
    let (delta, s2) = cg_solve_from(w, &rhs2, guess2, cg)?;
    let k2: Vec<f64> = k1.iter().zip(&delta).map(|(a, b)| a + b).collect();

    let mut u_new = u.to_vec();
    axpy(dt, &k2, &mut u_new);
    let ku_new = k.matvec(&u_new);
    let mk2 = m.matvec(&k2);
    let rhs3: Vec<f64> = (0..u.len())
        .map(|n| -ku_new[n] - E32 * (mk2[n] + kmid[n]) - 2.0 * (mk1[n] + ku[n]))
        .collect();
    let guess3: Vec<f64> = k2.iter().zip(&k1).map(|(b, a)| 2.0 * b - a).collect();
    let (k3, s3) = cg_solve_from(w, &rhs3, guess3, cg)?;

    let err: Vec<f64> = (0..u.len()).map(|n| dt / 6.0 * (k1[n] - 2.0 * k2[n] + k3[n])).collect();
    let err_norm = m.quad_form(&err, &err).max(0.0).sqrt();
    let next_k1: Vec<f64> = k2.iter().zip(&k1).map(|(b, a)| 2.0 * b - a).collect();
    Ok(StepResult { u: u_new, next_k1, delta, err_norm, iterations: s1.iterations + s2.iterations + s3.iterations })
}

/// `[u^iᵀ M^μ u^j]` for each weighted mass matrix, symmetric by construction.
fn filtered_products(weighted: &[SparseSym], u: &[Vec<f64>]) -> Vec<Matrix> {
    let dim = u.len();
    weighted
        .iter()
        .map(|wm| {
            let mu: Vec<Vec<f64>> = u.iter().map(|v| wm.matvec(v)).collect();
            let mut p = Matrix::zeros(dim);
            for i in 0..dim {
                for j in i..dim {
                    let v = dot(&u[i], &mu[j]);
                    p.set(i, j, v);
                    p.set(j, i, v);
                }
            }
            p
        })
        .collect()
}

/// `∫_{K_L} a μ_L - 2 ∫_0^T ∫_{K_L} u^i u^j μ_L` from a recorded trajectory.
pub fn upscale_parabolic(field: &TensorField, params: &MethodParams, traj: &ParabolicTrajectory) -> Result<HomogenizedTensor> {
    params.validate(Method::Parabolic)?;
    let t = params.t.expect("validated");
    if (traj.t_final - t).abs() > 1e-12 * t {
        return invalid(format!("trajectory ends at T = {}, parameters request T = {t}", traj.t_final));
    }
    if (traj.grid.side() - params.r).abs() > 1e-12 * params.r {
        return invalid(format!("trajectory computed on R = {}, parameters request R = {}", traj.grid.side(), params.r));
    }
    let Some(idx) = traj.find_filter(params.l, params.q) else {
        return invalid(format!("trajectory has no filter with L = {} and q = {}", params.l, params.q));
    };
    let start = Instant::now();
    let filter = traj.filters[idx];
    let avg = filtered_coeff_average(&traj.grid, field, &filter)?;
    let values = avg.sub(&traj.accumulated_final(idx).scale(2.0));
    let mut out = HomogenizedTensor::new(values, Method::Parabolic, *params, traj.cg_iterations, start.elapsed());
    out.diagnostics.time_steps = Some(traj.steps());
    Ok(out)
}

/// Convenience wrapper: one trajectory and one upscaled tensor.
pub fn solve_parabolic(
    field: &TensorField,
    params: &MethodParams,
    h: f64,
    time: &TimeOptions,
    opts: &SolverOptions,
) -> Result<HomogenizedTensor> {
    params.validate(Method::Parabolic)?;
    let start = Instant::now();
    let filter = BoxFilter::new(make_filter(params.q as i64)?, params.l, field.dim())?;
    let traj = evolve_parabolic(field, params.r, h, params.t.expect("validated"), &[filter], time, opts)?;
    let mut out = upscale_parabolic(field, params, &traj)?;
    out.diagnostics.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(out)
}
