//! Chain-level kinetostatics: spring compliance seen at the end-effector, stiffness of
//! a chain with passive joints, and the manipulator stiffness as a sum over chains.

use nalgebra::{DMatrix, DVector, Matrix6, Vector6};

use crate::chain::JacobianPair;
use crate::error::{Error, Result};
use crate::linalg;
use crate::se3::Twist6;

/// Relative eigenvalue floor below which `U_dᵀ·S·U_d` is treated as singular.
const REDUCED_SPD_TOL: f64 = 1e-13;

/// `S = J_θ·k_θ·J_θᵀ`, the spring compliance seen at the end-effector.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianSpringCompliance {
    pub s: Matrix6<f64>,
}

impl CartesianSpringCompliance {
    pub fn new(s: Matrix6<f64>) -> Result<Self> {
        if !s.iter().all(|x| x.is_finite()) {
            return Err(Error::Input(
                "compliance contains non-finite entries".into(),
            ));
        }
        let scale = s.amax();
        if scale > 0.0 && (s - s.transpose()).amax() > 1e-9 * scale {
            return Err(Error::Input("cartesian compliance is not symmetric".into()));
        }
        Ok(Self {
            s: (s + s.transpose()) * 0.5,
        })
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainStiffness {
    pub k: Matrix6<f64>,
    /// `rank(K) = 6 − jac_rank`.
    pub rank: usize,
    pub jac_rank: usize,
    /// Orthonormal basis `U_r` of the motions absorbed by the passive joints (6 × r).
    pub nullspace_basis: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSolution {
    pub f: Vector6<f64>,
    pub dq: DVector<f64>,
    pub tau_theta: DVector<f64>,
    pub dtheta: DVector<f64>,
    /// Set when `J_q` is column-rank deficient; `dq` is then the minimum-norm choice.
    pub dq_not_unique: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManipulatorStiffness {
    pub k_m: Matrix6<f64>,
    pub chains: Vec<ChainStiffness>,
    pub rank: usize,
}

impl ManipulatorStiffness {
    pub fn chain_ranks(&self) -> Vec<usize> {
        self.chains.iter().map(|c| c.rank).collect()
    }
}

fn check_blocks(jac: &JacobianPair, blocks: &[DMatrix<f64>]) -> Result<()> {
    if jac.blocks.len() != blocks.len() {
        return Err(Error::Input(format!(
            "chain has {} spring blocks, {} compliance blocks given",
            jac.blocks.len(),
            blocks.len()
        )));
    }
    for (b, k) in jac.blocks.iter().zip(blocks) {
        if k.nrows() != b.len() || k.ncols() != b.len() {
            return Err(Error::Input(format!(
                "spring '{}' has {} coordinates, compliance block is {}×{}",
                b.name,
                b.len(),
                k.nrows(),
                k.ncols()
            )));
        }
        if !k.iter().all(|x| x.is_finite()) {
            return Err(Error::Input(format!(
                "compliance of spring '{}' has non-finite entries",
                b.name
            )));
        }
    }
    Ok(())
}

/// Blockwise `Σ J_b·k_b·J_bᵀ` with the compliance blocks in spring order.
pub fn cartesian_spring_compliance(
    jac: &JacobianPair,
    blocks: &[DMatrix<f64>],
) -> Result<CartesianSpringCompliance> {
    check_blocks(jac, blocks)?;
    let mut s = DMatrix::zeros(6, 6);
    for (i, k) in blocks.iter().enumerate() {
        let j = jac.block(i);
        s += &j * k * j.transpose();
    }
    CartesianSpringCompliance::new(linalg::to_matrix6(&s))
}

/// Left singular vectors of `J_q` with σ above the threshold, and the orthonormal complement.
fn split_range(j_q: &DMatrix<f64>, sigma_tol: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = j_q.ncols();
    let mut u_r = DMatrix::zeros(6, 0);
    if m > 0 {
        let svd = j_q.clone().svd(true, false);
        let u = svd.u.expect("requested U");
        let smax = svd.singular_values.max();
        let mut idx: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| smax > 0.0 && svd.singular_values[i] > sigma_tol * smax)
            .collect();
        idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        u_r = DMatrix::from_fn(6, idx.len(), |row, c| u[(row, idx[c])]);
    }
    let r = u_r.ncols();
    let projector = DMatrix::identity(6, 6) - &u_r * u_r.transpose();
    let (_, vecs) = linalg::sym_eigen(&projector);
    // eigenvalues of the projector are 0 (r times) then 1
    let u_d = vecs.columns(r, 6 - r).into_owned();
    (u_r, u_d)
}

/// Stiffness of one chain by restricting `S` to the directions the passive joints cannot absorb.
pub fn chain_stiffness_svd(
    s: &CartesianSpringCompliance,
    j_q: &DMatrix<f64>,
    sigma_tol: f64,
) -> Result<ChainStiffness> {
    if j_q.nrows() != 6 || j_q.ncols() > 6 {
        return Err(Error::Input(format!(
            "J_q must be 6×m with m ≤ 6, got {}×{}",
            j_q.nrows(),
            j_q.ncols()
        )));
    }
    if !j_q.iter().all(|x| x.is_finite()) {
        return Err(Error::Input("J_q has non-finite entries".into()));
    }
    if !(sigma_tol > 0.0 && sigma_tol < 1.0) {
        return Err(Error::Input(format!(
            "sigma_tol must lie in (0, 1), got {sigma_tol}"
        )));
    }
    let (u_r, u_d) = split_range(j_q, sigma_tol);
    let r = u_r.ncols();
    let n = 6 - r;
    if n == 0 {
        return Ok(ChainStiffness {
            k: Matrix6::zeros(),
            rank: 0,
            jac_rank: r,
            nullspace_basis: u_r,
        });
    }
    let s_dyn = linalg::to_dmatrix6(&s.s);
    let reduced = linalg::symmetrize(&(u_d.transpose() * &s_dyn * &u_d));
    let (vals, vecs) = linalg::sym_eigen(&reduced);
    let lmax = vals[n - 1];
    if lmax <= 0.0 || vals[0] <= REDUCED_SPD_TOL * lmax {
        let dir = &u_d * vecs.column(0);
        return Err(Error::numerical(
            format!(
                "spring compliance is degenerate along constrained direction [{}]",
                dir.iter()
                    .map(|x| format!("{x:.4}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            Some(vals[0]),
        ));
    }
    let inv = DMatrix::from_diagonal(&vals.map(|v| 1.0 / v));
    let reduced_inv = &vecs * inv * vecs.transpose();
    let k = linalg::symmetrize(&(&u_d * reduced_inv * u_d.transpose()));
    Ok(ChainStiffness {
        k: linalg::to_matrix6(&k),
        rank: n,
        jac_rank: r,
        nullspace_basis: u_r,
    })
}

/// Stiffness from the leading 6×6 block of `[[S, J_q], [J_qᵀ, 0]]⁻¹`.
pub fn chain_stiffness_blocksolve(
    s: &CartesianSpringCompliance,
    j_q: &DMatrix<f64>,
) -> Result<ChainStiffness> {
    if j_q.nrows() != 6 || j_q.ncols() > 6 {
        return Err(Error::Input(format!(
            "J_q must be 6×m with m ≤ 6, got {}×{}",
            j_q.nrows(),
            j_q.ncols()
        )));
    }
    let m = j_q.ncols();
    let r = linalg::rank(j_q, linalg::DEFAULT_SIGMA_TOL);
    if r < m {
        return Err(Error::Singular(format!(
            "J_q has rank {r} < {m}; the block system is singular, use the SVD path"
        )));
    }
    let mut a = DMatrix::zeros(6 + m, 6 + m);
    a.view_mut((0, 0), (6, 6))
        .copy_from(&linalg::to_dmatrix6(&s.s));
    a.view_mut((0, 6), (6, m)).copy_from(j_q);
    a.view_mut((6, 0), (m, 6)).copy_from(&j_q.transpose());
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::numerical("block system is singular", None))?;
    let k = linalg::symmetrize(&inv.view((0, 0), (6, 6)).into_owned());
    let (u_r, _) = split_range(j_q, linalg::DEFAULT_SIGMA_TOL);
    Ok(ChainStiffness {
        k: linalg::to_matrix6(&k),
        rank: 6 - r,
        jac_rank: r,
        nullspace_basis: u_r,
    })
}

/// Static response of one chain to an imposed end-effector displacement `dt`.
pub fn solve_chain(
    jac: &JacobianPair,
    blocks: &[DMatrix<f64>],
    dt: &Twist6,
    sigma_tol: f64,
) -> Result<ChainSolution> {
    if !dt.is_finite() {
        return Err(Error::Input("displacement is not finite".into()));
    }
    let s = cartesian_spring_compliance(jac, blocks)?;
    let stiff = chain_stiffness_svd(&s, &jac.j_q, sigma_tol)?;
    let f = stiff.k * dt.as_vector();

    let rhs = dt.as_vector() - s.s * f;
    let m = jac.j_q.ncols();
    let dq = if m == 0 {
        DVector::zeros(0)
    } else {
        let svd = jac.j_q.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let eps = sigma_tol * smax;
        svd.solve(&DVector::from_column_slice(rhs.as_slice()), eps)
            .map_err(|e| {
                Error::numerical(format!("passive displacement solve failed: {e}"), None)
            })?
    };

    let f_dyn = DVector::from_column_slice(f.as_slice());
    let tau_theta = jac.j_theta.transpose() * &f_dyn;
    let mut dtheta = DVector::zeros(tau_theta.len());
    for (b, k) in jac.blocks.iter().zip(blocks) {
        let t = tau_theta.rows(b.offset, b.len()).into_owned();
        dtheta.rows_mut(b.offset, b.len()).copy_from(&(k * t));
    }
    Ok(ChainSolution {
        f,
        dq,
        tau_theta,
        dtheta,
        dq_not_unique: stiff.jac_rank < m,
    })
}

/// `K_m = Σ K_i` over chains evaluated at the same end-effector pose.
pub fn aggregate_manipulator(chains: Vec<ChainStiffness>) -> Result<ManipulatorStiffness> {
    if chains.is_empty() {
        return Err(Error::Input("at least one chain is required".into()));
    }
    let k_m = chains.iter().fold(Matrix6::zeros(), |acc, c| acc + c.k);
    let rank = linalg::rank6(&k_m, linalg::DEFAULT_SIGMA_TOL);
    Ok(ManipulatorStiffness { k_m, chains, rank })
}
