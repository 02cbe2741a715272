use std::sync::Arc;

use nalgebra::DMatrix;

use super::{resolve_step, substeps, RecordedState, SampleDiagnostics, Trajectory};
use crate::fock::{min_hermitian_eigenvalue, BlockOperator, DensityMatrix, FockBasis, SectorLayout};
use crate::model::{build_liouvillian, ModelParams, Scheme};
use crate::observables::{record_from_values, FockObservables};
use crate::{Error, Result, C64, ZERO};

const TRACE_TOL: f64 = 1e-8;
const HERMITICITY_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = -1e-8;
const INITIAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasterOptions {
    /// Fixed RK4 step (m); the default rule applies when `None`.
    pub step: Option<f64>,
    /// Keep the recycling term L ρ L†. Off reproduces the non-Hermitian dynamics.
    pub include_jumps: bool,
    pub record_states: bool,
    pub check_positivity: bool,
    /// Propagate charge sectors separately when ρ0 allows it.
    pub use_sectors: bool,
}

impl Default for MasterOptions {
    fn default() -> Self {
        MasterOptions {
            step: None,
            include_jumps: true,
            record_states: false,
            check_positivity: true,
            use_sectors: true,
        }
    }
}

pub fn evolve_master(params: &ModelParams, rho0: &DensityMatrix) -> Result<Trajectory> {
    evolve_master_with(params, rho0, &MasterOptions::default())
}

struct JumpPiece {
    op: BlockOperator,
    rate: f64,
}

struct Engine {
    layout: SectorLayout,
    heff: Vec<Option<BlockOperator>>,
    jumps: Vec<JumpPiece>,
}

impl Engine {
    fn rhs(&self, rho: &[DMatrix<C64>], out: &mut [DMatrix<C64>]) {
        let minus_i = C64::new(0.0, -1.0);
        for (b, r) in rho.iter().enumerate() {
            let o = &mut out[b];
            match &self.heff[b] {
                Some(h) => {
                    h.mul_dense_into(r, o);
                    let x = o.clone();
                    for c in 0..o.ncols() {
                        for rr in 0..o.nrows() {
                            o[(rr, c)] = minus_i * (x[(rr, c)] - x[(c, rr)].conj());
                        }
                    }
                }
                None => o.fill(ZERO),
            }
        }
        for j in &self.jumps {
            let y = j.op.mul_dense(&rho[j.op.src]);
            let w = j.op.mul_dense(&y.adjoint());
            let o = &mut out[j.op.dst];
            let half = 0.5 * j.rate;
            for c in 0..o.ncols() {
                for r in 0..o.nrows() {
                    o[(r, c)] += (w[(r, c)] + w[(c, r)].conj()) * half;
                }
            }
        }
    }
}

/// Fixed-step RK4 integration of the Lindblad equation.
///
/// Block-diagonal initial states (in signal-minus-idler charge) are evolved
/// sector by sector. At every sample the trace, Hermiticity and smallest
/// eigenvalue are checked and any violation aborts the run.
pub fn evolve_master_with(params: &ModelParams, rho0: &DensityMatrix, opts: &MasterOptions) -> Result<Trajectory> {
    params.validate()?;
    let basis: Arc<FockBasis> = rho0.basis().clone();
    if basis.modes() != params.modes().as_slice() {
        return Err(Error::Basis(format!("initial state basis does not match the {:?} scheme", params.scheme)));
    }
    check_initial(rho0)?;
    let h = resolve_step(params, opts.step)?;
    let include_jumps = opts.include_jumps && params.scheme != Scheme::AntiPtNhh;

    let liou = build_liouvillian(params, &basis)?;
    let heff = liou.effective_hamiltonian();
    let mut layout = if opts.use_sectors {
        SectorLayout::by_charge(&basis)
    } else {
        SectorLayout::single(basis.dim())
    };
    if !layout.is_block_diagonal(rho0.matrix(), 0.0) {
        log::debug!("initial state mixes charge sectors; propagating the full matrix");
        layout = SectorLayout::single(basis.dim());
    }
    let mut heff_blocks: Vec<Option<BlockOperator>> = vec![None; layout.len()];
    for piece in layout.restrict(&heff) {
        if piece.dst != piece.src {
            return Err(Error::invalid("effective Hamiltonian does not conserve the sector charge"));
        }
        let b = piece.dst;
        heff_blocks[b] = Some(piece);
    }
    let mut jumps = Vec::new();
    if include_jumps {
        for c in &liou.collapses {
            for piece in layout.restrict(&c.op) {
                jumps.push(JumpPiece { op: piece, rate: c.rate });
            }
        }
    }
    let engine = Engine { layout, heff: heff_blocks, jumps };
    let observables = FockObservables::new(&basis)?;
    let local_obs = localize(&engine.layout, &observables);

    let theta = params.theta();
    let mut rho = engine.layout.split(rho0.matrix());
    let mut traj = Trajectory {
        scheme: params.scheme,
        params: params.clone(),
        z: params.z_grid.clone(),
        records: Vec::with_capacity(params.z_grid.len()),
        states: Vec::new(),
        diagnostics: Vec::with_capacity(params.z_grid.len()),
        step: 0.0,
    };

    let shapes: Vec<(usize, usize)> = rho.iter().map(|m| m.shape()).collect();
    let zeros = || shapes.iter().map(|&(r, c)| DMatrix::zeros(r, c)).collect::<Vec<_>>();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (zeros(), zeros(), zeros(), zeros(), zeros());

    let mut z = 0.0;
    for (si, &zs) in params.z_grid.iter().enumerate() {
        if si > 0 {
            let n = substeps(zs - z, h);
            let dz = (zs - z) / n as f64;
            traj.step = traj.step.max(dz);
            for _ in 0..n {
                engine.rhs(&rho, &mut k1);
                axpy_into(&mut tmp, &rho, &k1, 0.5 * dz);
                engine.rhs(&tmp, &mut k2);
                axpy_into(&mut tmp, &rho, &k2, 0.5 * dz);
                engine.rhs(&tmp, &mut k3);
                axpy_into(&mut tmp, &rho, &k3, dz);
                engine.rhs(&tmp, &mut k4);
                for b in 0..rho.len() {
                    let w = dz / 6.0;
                    rho[b] += (&k1[b] + &k4[b]) * C64::new(w, 0.0) + (&k2[b] + &k3[b]) * C64::new(2.0 * w, 0.0);
                }
            }
            z = zs;
        }
        let diag = diagnose(&rho, zs, opts.check_positivity);
        if !(diag.trace.is_finite() && diag.hermiticity_defect.is_finite()) {
            return Err(Error::numerical(zs, "state became non-finite; reduce the step"));
        }
        if include_jumps && (diag.trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::numerical(
                zs,
                format!("trace drifted to {:.12} (tolerance {TRACE_TOL:e}); reduce the step", diag.trace),
            ));
        }
        if diag.hermiticity_defect > HERMITICITY_TOL {
            return Err(Error::numerical(zs, format!("Hermiticity defect {:e}", diag.hermiticity_defect)));
        }
        if diag.min_eigenvalue < POSITIVITY_TOL {
            return Err(Error::numerical(
                zs,
                format!(
                    "density matrix lost positivity (eigenvalue {:e}); raise the truncation or reduce the step",
                    diag.min_eigenvalue
                ),
            ));
        }
        traj.diagnostics.push(diag);
        let vals: Vec<C64> = local_obs
            .iter()
            .map(|e| e.iter().map(|&(b, r, c, v)| v * rho[b][(c, r)]).sum())
            .collect();
        traj.records.push(record_from_values(zs, theta, &vals));
        if opts.record_states {
            let full = engine.layout.assemble(&rho);
            traj.states.push(RecordedState::Mixed(DensityMatrix::new(basis.clone(), full)?));
        }
    }
    Ok(traj)
}

fn axpy_into(out: &mut [DMatrix<C64>], x: &[DMatrix<C64>], k: &[DMatrix<C64>], a: f64) {
    let a = C64::new(a, 0.0);
    for b in 0..out.len() {
        for ((o, xv), kv) in out[b].as_mut_slice().iter_mut().zip(x[b].as_slice()).zip(k[b].as_slice()) {
            *o = xv + kv * a;
        }
    }
}

type LocalEntries = Vec<(usize, usize, usize, C64)>;

/// Entries of each observable that fall inside a diagonal block.
fn localize(layout: &SectorLayout, obs: &FockObservables) -> Vec<LocalEntries> {
    obs.operators()
        .iter()
        .map(|op| {
            op.entries()
                .filter_map(|(r, c, v)| {
                    let (br, lr) = layout.locate(r);
                    let (bc, lc) = layout.locate(c);
                    (br == bc).then_some((br, lr, lc, v))
                })
                .collect()
        })
        .collect()
}

fn diagnose(rho: &[DMatrix<C64>], z: f64, positivity: bool) -> SampleDiagnostics {
    let mut trace = 0.0;
    let mut herm: f64 = 0.0;
    let mut min_eig = if positivity { f64::INFINITY } else { f64::NAN };
    for m in rho {
        trace += m.trace().re;
        let d = m.nrows();
        for c in 0..d {
            for r in c..d {
                herm = herm.max((m[(r, c)] - m[(c, r)].conj()).norm());
            }
        }
        if positivity && d > 0 {
            min_eig = min_eig.min(min_hermitian_eigenvalue(m));
        }
    }
    SampleDiagnostics { z, trace, hermiticity_defect: herm, min_eigenvalue: min_eig }
}

fn check_initial(rho0: &DensityMatrix) -> Result<()> {
    let herm = rho0.hermiticity_defect();
    if herm > INITIAL_TOL {
        return Err(Error::invalid(format!("initial state is not Hermitian (defect {herm:e})")));
    }
    let tr = rho0.trace();
    if (tr.re - 1.0).abs() > INITIAL_TOL || tr.im.abs() > INITIAL_TOL {
        return Err(Error::invalid(format!("initial state has trace {tr}")));
    }
    let e = rho0.min_eigenvalue();
    if e < -INITIAL_TOL {
        return Err(Error::invalid(format!("initial state is not positive (eigenvalue {e:e})")));
    }
    Ok(())
}
