//! Serial-chain model: an ordered product of rigid transforms, an actuated joint
//! with its control-loop spring, multi-dof virtual springs and passive rotations.
//!
//! Coordinates are split into two groups. Spring coordinates `θ` (including the
//! actuator's control-loop coordinate `θ₀`) feed `J_θ`; passive joint coordinates
//! `q` feed `J_q`. The actuated coordinate `q₀` is a fixed parameter of the
//! configuration: its derivative is represented by the `θ₀` column.

use nalgebra::{DMatrix, Vector6};

use crate::error::{Error, Result};
use crate::linalg;
use crate::se3::{
    chain_partial, elem_transform_unchecked, Axis, ElemMotion, HomTransform, MotionKind,
    SPRING6_ORDER,
};

#[derive(Debug, Clone, PartialEq)]
pub enum ChainElement {
    Rigid(HomTransform),
    /// `V_a(q₀ + θ₀)`: elementary motion driven by the actuator, with one spring coordinate.
    Actuated(ElemMotion),
    /// Virtual spring built as a product of elementary motions, one coordinate each.
    Spring {
        name: String,
        dofs: Vec<ElemMotion>,
    },
    PassiveRotation(Axis),
    /// Two successive passive rotations (a U-joint).
    PassivePair(Axis, Axis),
}

impl ChainElement {
    /// Full 6-dof spring in the `Tx·Ty·Tz·Rx·Ry·Rz` order.
    pub fn spring6(name: impl Into<String>) -> Self {
        ChainElement::Spring {
            name: name.into(),
            dofs: SPRING6_ORDER.to_vec(),
        }
    }

    pub fn spring(name: impl Into<String>, dofs: Vec<ElemMotion>) -> Self {
        ChainElement::Spring {
            name: name.into(),
            dofs,
        }
    }

    pub fn rigid_translation(axis: Axis, value: f64) -> Self {
        ChainElement::Rigid(elem_transform_unchecked(
            axis,
            MotionKind::Translation,
            value,
        ))
    }

    pub fn rigid_rotation(axis: Axis, angle: f64) -> Self {
        ChainElement::Rigid(elem_transform_unchecked(axis, MotionKind::Rotation, angle))
    }
}

/// `Σ cᵢ·qᵢ = 0` over declared passive coordinates (0-based indices).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRelation {
    pub coeffs: Vec<(usize, f64)>,
}

impl LinearRelation {
    pub fn new(coeffs: Vec<(usize, f64)>) -> Self {
        Self { coeffs }
    }

    /// `qₐ + q_b = 0`.
    pub fn opposite(a: usize, b: usize) -> Self {
        Self::new(vec![(a, 1.0), (b, 1.0)])
    }

    fn eval(&self, q: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, c)| c * q[i]).sum()
    }
}

/// Contiguous range of `θ` belonging to one spring element.
#[derive(Debug, Clone, PartialEq)]
pub struct SpringBlock {
    pub name: String,
    pub offset: usize,
    pub dofs: Vec<ElemMotion>,
}

impl SpringBlock {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    elements: Vec<ChainElement>,
    relations: Vec<LinearRelation>,
    /// Declared-to-free passive map `q = q_nom + C·δq_free`; `None` means `C = I`.
    passive_map: Option<DMatrix<f64>>,
}

impl ChainSpec {
    pub fn new(elements: Vec<ChainElement>) -> Result<Self> {
        let actuated = elements
            .iter()
            .filter(|e| matches!(e, ChainElement::Actuated(_)))
            .count();
        if actuated > 1 {
            return Err(Error::Input(format!(
                "a chain carries at most one actuated joint, found {actuated}"
            )));
        }
        let has_spring6 = elements.iter().any(|e| match e {
            ChainElement::Spring { dofs, .. } => {
                dofs.len() == 6 && SPRING6_ORDER.iter().all(|m| dofs.contains(m))
            }
            _ => false,
        });
        if !has_spring6 {
            return Err(Error::Input(
                "a chain needs at least one full 6-dof spring so that J_θ has full row rank".into(),
            ));
        }
        for e in &elements {
            if let ChainElement::Spring { name, dofs } = e {
                if dofs.is_empty() {
                    return Err(Error::Input(format!("spring '{name}' has no coordinates")));
                }
            }
        }
        Ok(Self {
            elements,
            relations: Vec::new(),
            passive_map: None,
        })
    }

    pub fn elements(&self) -> &[ChainElement] {
        &self.elements
    }

    pub fn relations(&self) -> &[LinearRelation] {
        &self.relations
    }

    pub fn has_actuator(&self) -> bool {
        self.elements
            .iter()
            .any(|e| matches!(e, ChainElement::Actuated(_)))
    }

    /// Number of spring coordinates (length of `θ`).
    pub fn n_theta(&self) -> usize {
        self.elements
            .iter()
            .map(|e| match e {
                ChainElement::Actuated(_) => 1,
                ChainElement::Spring { dofs, .. } => dofs.len(),
                _ => 0,
            })
            .sum()
    }

    /// Number of declared passive coordinates (length of `q`).
    pub fn n_passive(&self) -> usize {
        self.elements
            .iter()
            .map(|e| match e {
                ChainElement::PassiveRotation(_) => 1,
                ChainElement::PassivePair(..) => 2,
                _ => 0,
            })
            .sum()
    }

    /// Number of independent passive coordinates, i.e. columns of `J_q`.
    pub fn n_passive_free(&self) -> usize {
        self.passive_map
            .as_ref()
            .map_or(self.n_passive(), |c| c.ncols())
    }

    pub fn passive_map(&self) -> DMatrix<f64> {
        self.passive_map
            .clone()
            .unwrap_or_else(|| DMatrix::identity(self.n_passive(), self.n_passive()))
    }

    pub fn spring_blocks(&self) -> Vec<SpringBlock> {
        let mut blocks = Vec::new();
        let mut offset = 0;
        for e in &self.elements {
            match e {
                ChainElement::Actuated(m) => {
                    blocks.push(SpringBlock {
                        name: "ctr".into(),
                        offset,
                        dofs: vec![*m],
                    });
                    offset += 1;
                }
                ChainElement::Spring { name, dofs } => {
                    blocks.push(SpringBlock {
                        name: name.clone(),
                        offset,
                        dofs: dofs.clone(),
                    });
                    offset += dofs.len();
                }
                _ => {}
            }
        }
        blocks
    }

    fn factors(&self, cfg: &ChainConfig) -> Vec<Factor> {
        let mut out = Vec::new();
        let mut it = 0;
        let mut iq = 0;
        for e in &self.elements {
            match e {
                ChainElement::Rigid(t) => out.push(Factor::Fixed(*t)),
                ChainElement::Actuated(m) => {
                    out.push(Factor::Var {
                        motion: *m,
                        nominal: cfg.q0,
                        delta: cfg.theta[it],
                        var: Var::Theta(it),
                    });
                    it += 1;
                }
                ChainElement::Spring { dofs, .. } => {
                    for m in dofs {
                        out.push(Factor::Var {
                            motion: *m,
                            nominal: 0.0,
                            delta: cfg.theta[it],
                            var: Var::Theta(it),
                        });
                        it += 1;
                    }
                }
                ChainElement::PassiveRotation(a) => {
                    out.push(Factor::Var {
                        motion: ElemMotion::rot(*a),
                        nominal: cfg.q[iq],
                        delta: 0.0,
                        var: Var::Passive(iq),
                    });
                    iq += 1;
                }
                ChainElement::PassivePair(a, b) => {
                    for ax in [a, b] {
                        out.push(Factor::Var {
                            motion: ElemMotion::rot(*ax),
                            nominal: cfg.q[iq],
                            delta: 0.0,
                            var: Var::Passive(iq),
                        });
                        iq += 1;
                    }
                }
            }
        }
        out
    }

    fn check_config(&self, cfg: &ChainConfig) -> Result<()> {
        if cfg.theta.len() != self.n_theta() {
            return Err(Error::Input(format!(
                "config has {} spring coordinates, chain declares {}",
                cfg.theta.len(),
                self.n_theta()
            )));
        }
        if cfg.q.len() != self.n_passive() {
            return Err(Error::Input(format!(
                "config has {} passive coordinates, chain declares {}",
                cfg.q.len(),
                self.n_passive()
            )));
        }
        let finite = cfg.q0.is_finite()
            && cfg.q.iter().all(|x| x.is_finite())
            && cfg.theta.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::Input("config has non-finite coordinates".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum Var {
    Theta(usize),
    Passive(usize),
}

#[derive(Debug, Clone, Copy)]
enum Factor {
    Fixed(HomTransform),
    Var {
        motion: ElemMotion,
        nominal: f64,
        delta: f64,
        var: Var,
    },
}

impl Factor {
    fn at_nominal(&self) -> HomTransform {
        match self {
            Factor::Fixed(t) => *t,
            Factor::Var {
                motion, nominal, ..
            } => elem_transform_unchecked(motion.axis, motion.kind, *nominal),
        }
    }

    fn actual(&self) -> HomTransform {
        match self {
            Factor::Fixed(t) => *t,
            Factor::Var {
                motion,
                nominal,
                delta,
                ..
            } => elem_transform_unchecked(motion.axis, motion.kind, nominal + delta),
        }
    }
}

/// Current coordinate values of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub q0: f64,
    pub q: Vec<f64>,
    pub theta: Vec<f64>,
}

impl ChainConfig {
    /// Rigid posture (`θ = 0`) for `spec` with the given actuated and passive values.
    pub fn rigid(spec: &ChainSpec, q0: f64, q: Vec<f64>) -> Self {
        Self {
            q0,
            q,
            theta: vec![0.0; spec.n_theta()],
        }
    }

    pub fn is_rigid(&self) -> bool {
        self.theta.iter().all(|&t| t == 0.0)
    }
}

/// `J_θ` (6 × n_θ) and `J_q` (6 × m) of one chain, plus the spring block layout.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianPair {
    pub j_theta: DMatrix<f64>,
    pub j_q: DMatrix<f64>,
    pub blocks: Vec<SpringBlock>,
}

impl JacobianPair {
    /// Columns of `J_θ` belonging to one spring block.
    pub fn block(&self, index: usize) -> DMatrix<f64> {
        let b = &self.blocks[index];
        self.j_theta.columns(b.offset, b.len()).into_owned()
    }
}

/// End-effector pose: product of all element transforms in declared order.
pub fn forward_kinematics(spec: &ChainSpec, cfg: &ChainConfig) -> Result<HomTransform> {
    spec.check_config(cfg)?;
    Ok(spec
        .factors(cfg)
        .iter()
        .fold(HomTransform::identity(), |acc, f| acc * f.actual()))
}

/// Jacobians at the rigid posture around the nominal passive values in `cfg`.
pub fn jacobians(spec: &ChainSpec, cfg: &ChainConfig) -> Result<JacobianPair> {
    spec.check_config(cfg)?;
    if !cfg.is_rigid() {
        return Err(Error::Input(
            "jacobians are defined at the rigid posture; config has nonzero θ".into(),
        ));
    }
    for rel in &spec.relations {
        let v = rel.eval(&cfg.q);
        if v.abs() > 1e-9 {
            return Err(Error::Input(format!(
                "nominal passive values violate the chain constraint (residual {v:.3e})"
            )));
        }
    }

    let factors = spec.factors(cfg);
    let n = factors.len();
    let nominal: Vec<HomTransform> = factors.iter().map(Factor::at_nominal).collect();

    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(HomTransform::identity());
    for t in &nominal {
        let next = *prefix.last().unwrap() * *t;
        prefix.push(next);
    }
    let mut suffix = vec![HomTransform::identity(); n + 1];
    for k in (0..n).rev() {
        suffix[k] = nominal[k] * suffix[k + 1];
    }

    let mut j_theta = DMatrix::zeros(6, spec.n_theta());
    let mut j_q_declared = DMatrix::zeros(6, spec.n_passive());
    for (k, f) in factors.iter().enumerate() {
        if let Factor::Var { motion, var, .. } = f {
            // V(nom + δ) = V(nom)·V(δ): the generator sits right after V(nom)
            let col = chain_partial(&prefix[k + 1], &motion.generator(), &suffix[k + 1])?;
            let v: &Vector6<f64> = col.as_vector();
            match var {
                Var::Theta(i) => j_theta.set_column(*i, v),
                Var::Passive(i) => j_q_declared.set_column(*i, v),
            }
        }
    }
    let j_q = match &spec.passive_map {
        Some(c) => &j_q_declared * c,
        None => j_q_declared,
    };
    Ok(JacobianPair {
        j_theta,
        j_q,
        blocks: spec.spring_blocks(),
    })
}

/// Adds linear relations among passive coordinates and reduces `J_q` accordingly.
///
/// Each relation eliminates its highest-index coordinate (after elimination of the
/// previous ones); the column of a surviving coordinate becomes the derivative along
/// the constrained direction, e.g. `∂/∂q₂ − ∂/∂q₃` for `q₂ + q₃ = 0`.
pub fn constrain_passive(spec: &ChainSpec, relations: &[LinearRelation]) -> Result<ChainSpec> {
    if relations.is_empty() {
        return Ok(spec.clone());
    }
    let m = spec.n_passive();
    let mut all = spec.relations.clone();
    all.extend_from_slice(relations);

    let mut a = DMatrix::zeros(all.len(), m);
    for (r, rel) in all.iter().enumerate() {
        if rel.coeffs.is_empty() {
            return Err(Error::Input("empty passive relation".into()));
        }
        for &(i, c) in &rel.coeffs {
            if i >= m {
                return Err(Error::Input(format!(
                    "relation refers to passive coordinate {i}, chain declares {m}"
                )));
            }
            if !c.is_finite() {
                return Err(Error::Input("relation coefficient is not finite".into()));
            }
            a[(r, i)] += c;
        }
    }
    if linalg::rank(&a, 1e-12) < all.len() {
        return Err(Error::Input(
            "passive relations are inconsistent (linearly dependent or vanishing)".into(),
        ));
    }

    // reduced row echelon form with pivots chosen from the last column backwards
    let rows = a.nrows();
    let mut pivots = Vec::with_capacity(rows);
    let mut r = 0;
    for col in (0..m).rev() {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).max_by(|&x, &y| a[(x, col)].abs().total_cmp(&a[(y, col)].abs()))
        else {
            break;
        };
        if a[(p, col)].abs() < 1e-12 {
            continue;
        }
        a.swap_rows(r, p);
        let piv = a[(r, col)];
        for j in 0..m {
            a[(r, j)] /= piv;
        }
        for i in 0..rows {
            if i != r {
                let f = a[(i, col)];
                if f != 0.0 {
                    for j in 0..m {
                        a[(i, j)] -= f * a[(r, j)];
                    }
                }
            }
        }
        pivots.push((r, col));
        r += 1;
    }
    let dependent: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let free: Vec<usize> = (0..m).filter(|i| !dependent.contains(i)).collect();

    let mut c = DMatrix::zeros(m, free.len());
    for (k, &fj) in free.iter().enumerate() {
        c[(fj, k)] = 1.0;
        for &(row, dep) in &pivots {
            c[(dep, k)] = -a[(row, fj)];
        }
    }
    Ok(ChainSpec {
        elements: spec.elements.clone(),
        relations: all,
        passive_map: Some(c),
    })
}
