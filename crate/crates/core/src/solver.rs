//! Residual assembly, two-stage fourth-order time stepping of the cell
//! averages, direct update of the cell-averaged slopes from the
//! time-accurate interface states, boundary ghost construction, and
//! time-step control.

use crate::flux::{flux_linear_fit, gks_flux_point, CollisionTimeModel, FaceFrame, InterfaceInput};
use crate::mesh::Mesh;
use crate::recon::{df_point, QuadPoly, ReconConfig, ReconEngine};
use crate::state::Conserved;
use crate::vec3::{add, dot};
use crate::{CgksError, Result};
use arrayvec::ArrayVec;
use rayon::prelude::*;
use std::time::{Duration, Instant};

/// The two evolved degrees of freedom per cell: the averaged conservative
/// state and its averaged gradient.
#[derive(Debug, Clone, Copy)]
pub struct CellDof {
    pub w: Conserved,
    pub grad: [Conserved; 3],
}

impl CellDof {
    pub fn uniform(w: Conserved) -> Self {
        CellDof { w, grad: [Conserved::ZERO; 3] }
    }
}

/// Boundary treatment per patch. Periodic boundaries never reach the
/// solver; they are merged into interior faces when the mesh is built.
#[derive(Debug, Clone, Copy)]
pub enum BoundaryCondition {
    SlipWall,
    NoslipAdiabatic,
    Farfield { free: Conserved },
}

#[derive(Debug, Clone, Copy)]
pub struct SchemeConfig {
    pub gamma: f64,
    pub cfl: f64,
    pub collision: CollisionTimeModel,
    pub recon: ReconConfig,
    /// Coefficient of the viscous spectral-radius term in the time step.
    pub viscous_dt_coeff: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            gamma: 1.4,
            cfl: 0.5,
            collision: CollisionTimeModel::default(),
            recon: ReconConfig::default(),
            viscous_dt_coeff: 2.0,
        }
    }
}

/// Ghost value-and-gradient state in the face frame.
#[derive(Debug, Clone, Copy)]
pub struct GhostState {
    pub w: Conserved,
    pub grad: [Conserved; 3],
}

/// Build the ghost state from the interior state at a boundary point, all
/// in the face-local frame (normal pointing out of the domain).
pub fn ghost_state(
    bc: &BoundaryCondition,
    w_in: &Conserved,
    grad_in: &[Conserved; 3],
    frame: &FaceFrame,
    gamma: f64,
) -> GhostState {
    match bc {
        BoundaryCondition::SlipWall => mirror_ghost(w_in, grad_in, [1.0, -1.0, 1.0, 1.0, 1.0]),
        BoundaryCondition::NoslipAdiabatic => {
            mirror_ghost(w_in, grad_in, [1.0, -1.0, -1.0, -1.0, 1.0])
        }
        BoundaryCondition::Farfield { free } => {
            let free_local = frame.to_local(free);
            let w = farfield_riemann(w_in, &free_local, gamma);
            GhostState { w, grad: *grad_in }
        }
    }
}

/// Reflect the interior solution through the boundary plane; `comp_sign`
/// holds the parity of each conservative component under the mirror.
fn mirror_ghost(w_in: &Conserved, grad_in: &[Conserved; 3], comp_sign: [f64; 5]) -> GhostState {
    let mut w = *w_in;
    for c in 0..5 {
        w.0[c] *= comp_sign[c];
    }
    let dir_sign = [-1.0, 1.0, 1.0];
    let mut grad = [Conserved::ZERO; 3];
    for d in 0..3 {
        for c in 0..5 {
            grad[d].0[c] = dir_sign[d] * comp_sign[c] * grad_in[d].0[c];
        }
    }
    GhostState { w, grad }
}

/// One-dimensional Riemann-invariant far field along the outward normal.
fn farfield_riemann(w_in: &Conserved, free: &Conserved, gamma: f64) -> Conserved {
    let gm1 = gamma - 1.0;
    let rho_i = w_in.rho();
    let v_i = w_in.velocity();
    let p_i = w_in.pressure(gamma);
    let c_i = (gamma * p_i / rho_i).sqrt();
    let rho_f = free.rho();
    let v_f = free.velocity();
    let p_f = free.pressure(gamma);
    let c_f = (gamma * p_f / rho_f).sqrt();

    if v_i[0] >= c_i {
        return *w_in; // supersonic outflow
    }
    if v_f[0] <= -c_f {
        return *free; // supersonic inflow
    }
    let r_plus = v_i[0] + 2.0 * c_i / gm1;
    let r_minus = v_f[0] - 2.0 * c_f / gm1;
    let u_b = 0.5 * (r_plus + r_minus);
    let c_b = 0.25 * gm1 * (r_plus - r_minus);
    let (entropy, v_t) = if u_b > 0.0 {
        (p_i / rho_i.powf(gamma), [v_i[1], v_i[2]])
    } else {
        (p_f / rho_f.powf(gamma), [v_f[1], v_f[2]])
    };
    let rho_b = (c_b * c_b / (gamma * entropy)).powf(1.0 / gm1);
    let p_b = rho_b * c_b * c_b / gamma;
    Conserved::from_primitive(rho_b, [u_b, v_t[0], v_t[1]], p_b, gamma)
}

/// Per-face result of one flux sweep.
#[derive(Debug, Clone)]
pub struct FaceWork {
    /// Quadrature-integrated time-integral of the flux over [0, dt],
    /// global frame, scaled by the face area.
    pub flux_full: Conserved,
    pub flux_half: Conserved,
    /// Time-accurate interface state per quadrature point, global frame.
    pub w_points: ArrayVec<Conserved, 4>,
    /// Product of the discontinuity-feedback factors over the points.
    pub alpha: f64,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Timers {
    pub reconstruction: Duration,
    pub flux: Duration,
    pub update: Duration,
}

pub struct Solver<'m> {
    pub mesh: &'m Mesh,
    pub cfg: SchemeConfig,
    /// Boundary condition per patch id.
    pub bcs: Vec<Option<BoundaryCondition>>,
    pub recon: ReconEngine,
    pub dofs: Vec<CellDof>,
    pub time: f64,
    pub steps: u64,
    pub timers: Timers,
    boundary_means: Vec<Conserved>,
}

struct SweepOut {
    faces: Vec<FaceWork>,
    res_full: Vec<Conserved>,
    res_half: Vec<Conserved>,
}

impl<'m> Solver<'m> {
    pub fn new(mesh: &'m Mesh, cfg: SchemeConfig, dofs: Vec<CellDof>) -> Result<Self> {
        if dofs.len() != mesh.cells.len() {
            return Err(CgksError::Invalid("dof array does not match mesh".into()));
        }
        let recon = ReconEngine::new(mesh, cfg.recon)?;
        Ok(Solver {
            mesh,
            cfg,
            bcs: vec![None; mesh.patches.len()],
            recon,
            dofs,
            time: 0.0,
            steps: 0,
            timers: Timers::default(),
            boundary_means: vec![Conserved::ZERO; mesh.faces.len()],
        })
    }

    pub fn set_bc(&mut self, patch: &str, bc: BoundaryCondition) -> Result<()> {
        let id = self
            .mesh
            .patch_id(patch)
            .ok_or_else(|| CgksError::Invalid(format!("no patch named '{patch}'")))?;
        self.bcs[id] = Some(bc);
        Ok(())
    }

    fn bc_for(&self, patch: usize) -> Result<&BoundaryCondition> {
        self.bcs[patch]
            .as_ref()
            .ok_or_else(|| CgksError::UnboundPatch(self.mesh.patches[patch].name.clone()))
    }

    /// Any boundary face must have a condition before stepping.
    pub fn check_boundaries(&self) -> Result<()> {
        for f in &self.mesh.faces {
            if let crate::mesh::FaceNeighbor::Boundary { patch } = f.neighbor {
                self.bc_for(patch)?;
            }
        }
        Ok(())
    }

    /// Ghost mean states per boundary face for the sub-stencil
    /// reconstruction of boundary cells.
    fn refresh_boundary_means(&mut self, dofs: &[CellDof]) -> Result<()> {
        for fi in 0..self.mesh.faces.len() {
            let face = &self.mesh.faces[fi];
            if let crate::mesh::FaceNeighbor::Boundary { patch } = face.neighbor {
                let bc = self.bc_for(patch)?;
                let frame = FaceFrame::from_normal(face.normal);
                let dof = &dofs[face.owner];
                let w_loc = frame.to_local(&dof.w);
                let g_loc = frame.gradients_to_local(&dof.grad);
                let ghost = ghost_state(bc, &w_loc, &g_loc, &frame, self.cfg.gamma);
                self.boundary_means[fi] = frame.to_global(&ghost.w);
            }
        }
        Ok(())
    }

    /// CFL time step from the convective and viscous spectral radii.
    pub fn compute_dt(&self) -> f64 {
        let gamma = self.cfg.gamma;
        let mu = self.cfg.collision.mu;
        let co = self.cfg.viscous_dt_coeff;
        let mut dt = f64::INFINITY;
        for (ci, cell) in self.mesh.cells.iter().enumerate() {
            let w = &self.dofs[ci].w;
            let vel = w.velocity();
            let c = w.sound_speed(gamma);
            let surf: f64 = cell.faces.iter().map(|&f| self.mesh.faces[f].area).sum();
            let h = cell.volume / surf;
            let mut un_max = 0.0f64;
            for &f in &cell.faces {
                un_max = un_max.max(dot(vel, self.mesh.faces[f].normal).abs());
            }
            let speed = un_max + c + co * mu / (w.rho() * h);
            dt = dt.min(h / speed);
        }
        self.cfg.cfl * dt
    }

    /// One flux sweep over all faces for the given polynomials, plus the
    /// gathered per-cell time-integrated residuals.
    fn sweep(&self, polys: &[QuadPoly], dofs: &[CellDof], dt: f64, point_time: f64) -> Result<SweepOut> {
        let mesh = self.mesh;
        let cfg = &self.cfg;
        let df_on = cfg.recon.df;
        let faces: Vec<FaceWork> = (0..mesh.faces.len())
            .into_par_iter()
            .map(|fi| -> Result<FaceWork> {
                let face = &mesh.faces[fi];
                let frame = FaceFrame::from_normal(face.normal);
                let owner_cell = &mesh.cells[face.owner];
                let mut acc_full = Conserved::ZERO;
                let mut acc_half = Conserved::ZERO;
                let mut w_points = ArrayVec::new();
                let mut alpha = 1.0;
                for q in &face.qpoints {
                    // Left side from the owner polynomial; fall back to the
                    // cell mean when the point value is out of bounds.
                    let (mut w_l, mut g_l) = polys[face.owner].eval(owner_cell, q.position);
                    if !w_l.is_physical() {
                        w_l = dofs[face.owner].w;
                        g_l = [Conserved::ZERO; 3];
                    }
                    let wl_loc = frame.to_local(&w_l);
                    let gl_loc = frame.gradients_to_local(&g_l);
                    let (wr_loc, gr_loc) = match face.neighbor {
                        crate::mesh::FaceNeighbor::Interior { cell, shift } => {
                            let (mut w_r, mut g_r) =
                                polys[cell].eval(&mesh.cells[cell], add(q.position, shift));
                            if !w_r.is_physical() {
                                w_r = dofs[cell].w;
                                g_r = [Conserved::ZERO; 3];
                            }
                            (frame.to_local(&w_r), frame.gradients_to_local(&g_r))
                        }
                        crate::mesh::FaceNeighbor::Boundary { patch } => {
                            let bc = self.bc_for(patch)?;
                            let ghost = ghost_state(bc, &wl_loc, &gl_loc, &frame, cfg.gamma);
                            (ghost.w, ghost.grad)
                        }
                    };
                    let sample = gks_flux_point(
                        &InterfaceInput {
                            w_l: wl_loc,
                            w_r: wr_loc,
                            dw_l: gl_loc,
                            dw_r: gr_loc,
                            dt,
                            point_time,
                            gamma: cfg.gamma,
                        },
                        &cfg.collision,
                    )
                    .map_err(|e| CgksError::FluxAtFace { face: fi, source: Box::new(e) })?;
                    acc_full += frame.to_global(&sample.flux_full) * q.weight;
                    acc_half += frame.to_global(&sample.flux_half) * q.weight;
                    w_points.push(frame.to_global(&sample.w_point));
                    if df_on {
                        alpha *= df_point(&wl_loc, &wr_loc, cfg.gamma);
                    }
                }
                Ok(FaceWork {
                    flux_full: acc_full * face.area,
                    flux_half: acc_half * face.area,
                    w_points,
                    alpha,
                })
            })
            .collect::<Result<_>>()?;

        // Deterministic two-pass gather: each cell sums its own faces in a
        // fixed order, so results do not depend on the worker count.
        let res: Vec<(Conserved, Conserved)> = (0..mesh.cells.len())
            .into_par_iter()
            .map(|ci| {
                let cell = &mesh.cells[ci];
                let inv = 1.0 / cell.volume;
                let mut full = Conserved::ZERO;
                let mut half = Conserved::ZERO;
                for &f in &cell.faces {
                    let sign = if mesh.faces[f].owner == ci { -1.0 } else { 1.0 };
                    full += faces[f].flux_full * (sign * inv);
                    half += faces[f].flux_half * (sign * inv);
                }
                (full, half)
            })
            .collect();
        let (res_full, res_half) = res.into_iter().unzip();
        Ok(SweepOut { faces, res_full, res_half })
    }

    /// Update the cell-averaged slopes from the interface states by the
    /// divergence theorem, then apply the discontinuity-feedback scaling.
    fn update_slopes(&mut self, faces: &[FaceWork]) {
        let mesh = self.mesh;
        let df_on = self.cfg.recon.df;
        let alpha_out: Vec<f64> = (0..mesh.cells.len())
            .into_par_iter()
            .map(|ci| {
                if !df_on {
                    return 1.0;
                }
                let mut a = 1.0;
                for &f in &mesh.cells[ci].faces {
                    a *= faces[f].alpha;
                }
                a
            })
            .collect();
        let grads = slopes_by_divergence(mesh, |f, k| faces[f].w_points[k]);
        for (ci, grad) in grads.into_iter().enumerate() {
            let a = alpha_out[ci];
            for d in 0..3 {
                self.dofs[ci].grad[d] = grad[d] * a;
            }
            self.recon.alpha[ci] = alpha_out[ci];
        }
    }

    /// Advance one two-stage fourth-order step. Returns the step size.
    pub fn step(&mut self, dt_cap: Option<f64>) -> Result<f64> {
        let mut dt = self.compute_dt();
        if let Some(cap) = dt_cap {
            dt = dt.min(cap);
        }
        let mesh = self.mesh;

        // Stage 1 at t^n.
        let t0 = Instant::now();
        let dofs_n = self.dofs.clone();
        self.refresh_boundary_means(&dofs_n)?;
        self.recon.reconstruct(mesh, &dofs_n, &self.boundary_means);
        self.timers.reconstruction += t0.elapsed();
        let t1 = Instant::now();
        let stage1 = self.sweep(&self.recon.polys, &dofs_n, dt, dt)?;
        self.timers.flux += t1.elapsed();

        let mut fit1 = Vec::with_capacity(mesh.cells.len());
        let mut dofs_star = dofs_n.clone();
        for ci in 0..mesh.cells.len() {
            let (l0, dl0) = flux_linear_fit(&stage1.res_full[ci], &stage1.res_half[ci], dt);
            // The half-horizon integral is exactly the midpoint update.
            dofs_star[ci].w = dofs_n[ci].w + stage1.res_half[ci];
            if !dofs_star[ci].w.is_physical() {
                return Err(CgksError::StepAbort { cell: ci, time: self.time });
            }
            fit1.push((l0, dl0));
        }

        // Stage 2 at the midpoint state, reusing the stage-start slopes.
        let t2 = Instant::now();
        self.refresh_boundary_means(&dofs_star)?;
        self.recon.reconstruct(mesh, &dofs_star, &self.boundary_means);
        self.timers.reconstruction += t2.elapsed();
        let t3 = Instant::now();
        let stage2 = self.sweep(&self.recon.polys, &dofs_star, dt, 0.5 * dt)?;
        self.timers.flux += t3.elapsed();

        let t4 = Instant::now();
        for ci in 0..mesh.cells.len() {
            let (_l1, dl1) = flux_linear_fit(&stage2.res_full[ci], &stage2.res_half[ci], dt);
            let (l0, dl0) = fit1[ci];
            let w_new = stage_combine(self.dofs[ci].w, l0, dl0, dl1, dt);
            if !w_new.is_physical() {
                return Err(CgksError::StepAbort { cell: ci, time: self.time });
            }
            self.dofs[ci].w = w_new;
        }
        self.update_slopes(&stage2.faces);
        self.timers.update += t4.elapsed();

        self.time += dt;
        self.steps += 1;
        Ok(dt)
    }

    /// March to `t_end`, clipping the final step.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        self.check_boundaries()?;
        while self.time < t_end - 1e-14 {
            let remaining = t_end - self.time;
            self.step(Some(remaining))?;
        }
        Ok(())
    }

    /// Volume-weighted totals of the conserved quantities.
    pub fn totals(&self) -> Conserved {
        let mut acc = Conserved::ZERO;
        for (dof, cell) in self.dofs.iter().zip(self.mesh.cells.iter()) {
            acc += dof.w * cell.volume;
        }
        acc
    }

    /// One reconstruction sweep with the current degrees of freedom
    /// (used by diagnostics and benchmarks).
    pub fn reconstruct_now(&mut self) -> Result<()> {
        let dofs = self.dofs.clone();
        self.refresh_boundary_means(&dofs)?;
        self.recon.reconstruct(self.mesh, &dofs, &self.boundary_means);
        Ok(())
    }
}

/// Cell-averaged gradients from interface point values by the divergence
/// theorem: grad(W) |Omega| = sum over faces and quadrature points of
/// w omega S n (outward).
pub fn slopes_by_divergence(
    mesh: &Mesh,
    w_at: impl Fn(usize, usize) -> Conserved + Sync,
) -> Vec<[Conserved; 3]> {
    (0..mesh.cells.len())
        .into_par_iter()
        .map(|ci| {
            let cell = &mesh.cells[ci];
            let inv = 1.0 / cell.volume;
            let mut grad = [Conserved::ZERO; 3];
            for &f in &cell.faces {
                let face = &mesh.faces[f];
                let sign = if face.owner == ci { 1.0 } else { -1.0 };
                for (k, q) in face.qpoints.iter().enumerate() {
                    let wp = w_at(f, k);
                    let s = q.weight * face.area * inv;
                    for d in 0..3 {
                        grad[d] += wp * (s * sign * face.normal[d]);
                    }
                }
            }
            grad
        })
        .collect()
}

/// Predict the midpoint state of a two-stage step from the value and time
/// derivative of the residual (exposed for direct verification).
pub fn stage_midpoint(w: Conserved, l0: Conserved, dl0: Conserved, dt: f64) -> Conserved {
    w + l0 * (0.5 * dt) + dl0 * (dt * dt / 8.0)
}

/// Combine the two stages into the full fourth-order update.
pub fn stage_combine(
    w: Conserved,
    l0: Conserved,
    dl0: Conserved,
    dl1: Conserved,
    dt: f64,
) -> Conserved {
    w + l0 * dt + (dl0 + dl1 * 2.0) * (dt * dt / 6.0)
}
