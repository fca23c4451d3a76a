//! Exact eigenvalue counting through the vertex Dirichlet-to-Neumann form.
//!
//! Away from the Dirichlet spectra of the single edges,
//! `#{λ_i < λ} = Σ_e #{j ≥ 1 : q_e + (jπ/ℓ_e)² < λ} + ind₋ M(λ)`, where
//! `M(λ) = U*(R − D(λ))U` is the compression of the form to the harmonic
//! extensions of boundary values in `⊕_v ran Q(v)`, `D(λ)` the edge
//! Dirichlet-to-Neumann map and `U` an orthonormal basis of `⊕ ran Q(v)`.
//! At edge Dirichlet eigenvalues the kernel is taken from the secular
//! matrix instead.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cell::RefCell;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use super::{secular, Cluster, Level, OperatorSpec, SolverOptions, SolverTag, Spectrum};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Relative distance below which an energy is treated as an edge
/// Dirichlet eigenvalue. Closer to such a pole the form matrix loses its
/// small eigenvalues to cancellation; eigenvalues inside the radius are
/// attributed to the pole itself.
const POLE_RADIUS: f64 = 1e-6;
/// Form eigenvalues within `ZERO_TOL · scale` of zero count as kernel;
/// those below count as negative.
const ZERO_TOL: f64 = 1e-11;
/// Largest secular matrix used for multiplicity cross-checks.
const VERIFY_LIMIT: usize = 512;

/// Counts eigenvalues of one operator at arbitrary energies.
#[derive(Debug, Clone)]
pub struct Counter<'a> {
    spec: &'a OperatorSpec,
    /// For each half-edge: column offset of its vertex block and local row.
    slot: Vec<(usize, usize, usize)>,
    rank: usize,
    r_block: CMatrix,
    real: bool,
    svd_threshold: f64,
    pole_kernels: RefCell<BTreeMap<u64, usize>>,
}

impl<'a> Counter<'a> {
    pub fn new(spec: &'a OperatorSpec, svd_threshold: f64) -> Self {
        let top = spec.graph().topology();
        let conds = spec.conditions();
        let mut offsets = Vec::with_capacity(top.num_vertices());
        let mut rank = 0;
        for v in 0..top.num_vertices() {
            offsets.push(rank);
            rank += conds.get(v).range_basis().ncols();
        }
        let mut slot = alloc::vec![(0, 0, 0); 2 * top.num_edges()];
        let mut r_block = CMatrix::zeros(rank, rank);
        let mut real = true;
        for (v, &off) in offsets.iter().enumerate() {
            let c = conds.get(v);
            for (i, h) in top.incidence(v).iter().enumerate() {
                slot[h.index()] = (off, i, v);
            }
            let u = c.range_basis();
            if u.ncols() > 0 {
                let block = u.adjoint() * c.r() * u;
                r_block.view_mut((off, off), (u.ncols(), u.ncols())).copy_from(&block);
            }
            real &= linalg::is_real(u) && linalg::is_real(c.r());
        }
        Counter { spec, slot, rank, r_block, real, svd_threshold, pole_kernels: RefCell::new(BTreeMap::new()) }
    }

    /// Dimension of `⊕_v ran Q(v)`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    fn edge_blocks(&self, e: usize, lambda: f64) -> (f64, f64) {
        let l = self.spec.graph().length(e);
        let z = lambda - self.spec.potential()[e];
        if z > 0.0 {
            let s = z.sqrt();
            let th = s * l;
            (-s * th.cos() / th.sin(), s / th.sin())
        } else if z < 0.0 {
            let t = (-z).sqrt();
            let th = t * l;
            let off = 2.0 * t * (-th).exp() / (1.0 - (-2.0 * th).exp());
            (-t / th.tanh(), off)
        } else {
            (-1.0 / l, 1.0 / l)
        }
    }

    /// `M(λ) = U*(R − D(λ))U`.
    pub fn form_matrix(&self, lambda: f64) -> CMatrix {
        let top = self.spec.graph().topology();
        let conds = self.spec.conditions();
        let mut m = self.r_block.clone();
        for e in 0..top.num_edges() {
            let (diag, off) = self.edge_blocks(e, lambda);
            let ends = [2 * e, 2 * e + 1];
            for (ia, &a) in ends.iter().enumerate() {
                for (ib, &b) in ends.iter().enumerate() {
                    let d = if ia == ib { diag } else { off };
                    let (oa, ra, va) = self.slot[a];
                    let (ob, rb, vb) = self.slot[b];
                    let ua = conds.get(va).range_basis();
                    let ub = conds.get(vb).range_basis();
                    for ca in 0..ua.ncols() {
                        let x = ua[(ra, ca)].conj() * d;
                        for cb in 0..ub.ncols() {
                            m[(oa + ca, ob + cb)] -= x * ub[(rb, cb)];
                        }
                    }
                }
            }
        }
        m
    }

    fn form_eigenvalues(&self, lambda: f64) -> Vec<f64> {
        let m = self.form_matrix(lambda);
        if self.real {
            linalg::symmetric_eigenvalues(&DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re))
        } else {
            linalg::hermitian_eigenvalues(&m)
        }
    }

    fn edge_count(&self, lambda: f64) -> usize {
        let g = self.spec.graph();
        (0..g.num_edges())
            .map(|e| {
                let z = lambda - self.spec.potential()[e];
                if z <= 0.0 {
                    0
                } else {
                    let x = z.sqrt() * g.length(e) / core::f64::consts::PI;
                    (x.ceil() as usize).saturating_sub(1)
                }
            })
            .sum()
    }

    /// Nearest edge Dirichlet eigenvalue within the pole radius.
    fn pole_near(&self, lambda: f64) -> Option<f64> {
        let g = self.spec.graph();
        let radius = POLE_RADIUS * lambda.abs().max(1.0);
        let mut best: Option<f64> = None;
        for e in 0..g.num_edges() {
            let q = self.spec.potential()[e];
            let z = lambda - q;
            if z <= 0.0 {
                continue;
            }
            let l = g.length(e);
            let j = (z.sqrt() * l / core::f64::consts::PI).round();
            if j < 1.0 {
                continue;
            }
            let pole = q + (j * core::f64::consts::PI / l).powi(2);
            if (pole - lambda).abs() <= radius && best.is_none_or(|b| (b - lambda).abs() > (pole - lambda).abs()) {
                best = Some(pole);
            }
        }
        best
    }

    /// `(#{< λ}, dim ker M(λ))` at an energy away from edge poles.
    fn raw(&self, lambda: f64) -> (usize, usize) {
        let ev = self.form_eigenvalues(lambda);
        let scale = ev.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let neg = ev.iter().filter(|&&x| x < -ZERO_TOL * scale).count();
        let zero = ev.iter().filter(|&&x| x.abs() <= ZERO_TOL * scale).count();
        (self.edge_count(lambda) + neg, zero)
    }

    fn below_pole(&self, pole: f64) -> usize {
        self.raw(pole - 2.0 * POLE_RADIUS * pole.abs().max(1.0)).0
    }

    /// `#{i : λ_i < λ}`.
    pub fn count_below(&self, lambda: f64) -> usize {
        match self.pole_near(lambda) {
            Some(p) if lambda <= p => self.below_pole(p),
            Some(p) => self.below_pole(p) + self.secular_kernel(p),
            None => self.raw(lambda).0,
        }
    }

    /// `#{i : λ_i ≤ λ}`.
    pub fn count_at_most(&self, lambda: f64) -> usize {
        match self.pole_near(lambda) {
            Some(p) if lambda < p => self.below_pole(p),
            Some(p) => self.below_pole(p) + self.secular_kernel(p),
            None => {
                let (below, zero) = self.raw(lambda);
                below + zero
            }
        }
    }

    /// `dim ker(H − λ)`.
    pub fn multiplicity(&self, lambda: f64) -> usize {
        match self.pole_near(lambda) {
            Some(p) => self.secular_kernel(p),
            None => self.raw(lambda).1,
        }
    }

    fn secular_kernel(&self, lambda: f64) -> usize {
        let key = lambda.to_bits();
        if let Some(&k) = self.pole_kernels.borrow().get(&key) {
            return k;
        }
        let k = secular::kernel_dimension(self.spec, lambda, self.svd_threshold);
        self.pole_kernels.borrow_mut().insert(key, k);
        k
    }
}

pub(super) fn bisect(spec: &OperatorSpec, lo: f64, hi: f64, options: &SolverOptions) -> Result<Spectrum> {
    let counter = Counter::new(spec, options.svd_threshold);
    let c_lo = counter.count_below(lo);
    let c_hi = counter.count_at_most(hi).max(c_lo);
    let mut levels = Vec::new();
    let mut flagged = Vec::new();
    // Depth-first over (a, b, count(a), count(b)), left halves first.
    let mut stack = alloc::vec![(lo, hi, c_lo, c_hi)];
    while let Some((a, b, ca, cb)) = stack.pop() {
        if cb <= ca {
            continue;
        }
        let tol = options.energy_tol * a.abs().max(b.abs()).max(1.0);
        if b - a <= tol {
            let value = 0.5 * (a + b);
            let count = cb - ca;
            if options.verify_multiplicity && count > 1 {
                let kernel = if 2 * spec.graph().num_edges() <= VERIFY_LIMIT {
                    secular::kernel_dimension(spec, value, options.svd_threshold)
                } else {
                    counter.multiplicity(value)
                };
                if kernel != count {
                    flagged.push(Cluster { lo: a, hi: b, count, kernel_dimension: kernel });
                }
            }
            levels.push(Level { value, multiplicity: count });
            continue;
        }
        let mid = 0.5 * (a + b);
        let cm = counter.count_at_most(mid).clamp(ca, cb);
        stack.push((mid, b, cm, cb));
        stack.push((a, mid, ca, cm));
    }
    Ok(Spectrum::new(levels, (lo, hi), SolverTag::Inertia, *options, flagged))
}

/// The lowest `count` eigenvalues, repeated by multiplicity.
pub fn lowest_eigenvalues(spec: &OperatorSpec, count: usize, options: &SolverOptions) -> Result<Vec<f64>> {
    let counter = Counter::new(spec, options.svd_threshold);
    let lo = spec.lower_bound() - 1.0;
    let mut hi = lo.abs().max(1.0);
    let mut doublings = 0;
    while counter.count_at_most(hi) < count {
        hi *= 2.0;
        doublings += 1;
        if doublings > 64 {
            return Err(Error::InvalidArgument(alloc::format!("cannot bracket {count} eigenvalues")));
        }
    }
    let spectrum = bisect(spec, lo, hi, options)?;
    let mut values = spectrum.values();
    values.truncate(count);
    Ok(values)
}
