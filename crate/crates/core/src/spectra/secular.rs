//! The secular matrix: on each edge `f = A c(x) + B s(x)` with
//! `c'' = -z c`, `s'' = -z s`, `c(0) = 1`, `c'(0) = 0`, `s(0) = 0`,
//! `s'(0) = 1` and `z = λ − q_e`, which covers the oscillating (`z > 0`),
//! hyperbolic (`z < 0`) and linear (`z = 0`) regimes without dividing by
//! `√z`. Each vertex contributes `deg v` rows: `ker Q` projections of the
//! values and `ran Q` projections of `x' − R x`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{Level, OperatorSpec, SolverOptions, SolverTag, Spectrum};
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::linalg::{self, real, CMatrix, ZERO};

/// `(c(ℓ), s(ℓ))` for `z = λ − q`.
pub(crate) fn basis_at(z: f64, l: f64) -> (f64, f64) {
    if z > 0.0 {
        let k = z.sqrt();
        ((k * l).cos(), (k * l).sin() / k)
    } else if z < 0.0 {
        let t = (-z).sqrt();
        ((t * l).cosh(), (t * l).sinh() / t)
    } else {
        (1.0, l)
    }
}

struct Row {
    entries: Vec<Complex64>,
    gross: f64,
}

impl Row {
    fn new(n: usize) -> Self {
        Row { entries: alloc::vec![ZERO; n], gross: 0.0 }
    }
}

/// A linear functional on the `2|E|` coefficients `(A_e, B_e)`.
#[derive(Clone, Copy)]
struct Functional {
    col_a: usize,
    a: f64,
    b: f64,
}

/// Value and into-edge derivative functionals at every half-edge.
fn boundary_functionals(spec: &OperatorSpec, lambda: f64) -> Vec<(Functional, Functional)> {
    let g = spec.graph();
    let mut out = Vec::with_capacity(2 * g.num_edges());
    for e in 0..g.num_edges() {
        let z = lambda - spec.potential()[e];
        let (c, s) = basis_at(z, g.length(e));
        let col_a = 2 * e;
        out.push((Functional { col_a, a: 1.0, b: 0.0 }, Functional { col_a, a: 0.0, b: 1.0 }));
        out.push((Functional { col_a, a: c, b: s }, Functional { col_a, a: z * s, b: -c }));
    }
    out
}

fn rows_for_vertex(
    spec: &OperatorSpec,
    v: VertexId,
    fun: &[(Functional, Functional)],
    rows: &mut Vec<Row>,
) {
    let n = 2 * spec.graph().num_edges();
    let top = spec.graph().topology();
    let inc = top.incidence(v);
    let cond = spec.conditions().get(v);
    let add = |row: &mut Row, f: &Functional, w: Complex64| {
        row.entries[f.col_a] += w * f.a;
        row.entries[f.col_a + 1] += w * f.b;
        row.gross += w.norm() * (f.a.abs() + f.b.abs());
    };
    let kernel = cond.kernel_basis();
    for c in 0..kernel.ncols() {
        let mut row = Row::new(n);
        for (i, h) in inc.iter().enumerate() {
            add(&mut row, &fun[h.index()].0, kernel[(i, c)].conj());
        }
        rows.push(row);
    }
    let range = cond.range_basis();
    let r = cond.r();
    for c in 0..range.ncols() {
        let mut row = Row::new(n);
        for (i, h) in inc.iter().enumerate() {
            let u = range[(i, c)].conj();
            add(&mut row, &fun[h.index()].1, u);
            for (j, hj) in inc.iter().enumerate() {
                let w = u * r[(i, j)];
                if w != ZERO {
                    add(&mut row, &fun[hj.index()].0, -w);
                }
            }
        }
        rows.push(row);
    }
}

fn assemble(spec: &OperatorSpec, lambda: f64, zero_flux_at: &[VertexId]) -> CMatrix {
    let fun = boundary_functionals(spec, lambda);
    let top = spec.graph().topology();
    let mut rows = Vec::with_capacity(fun.len());
    for v in 0..top.num_vertices() {
        rows_for_vertex(spec, v, &fun, &mut rows);
    }
    let n = fun.len();
    for &v in zero_flux_at {
        for h in top.incidence(v) {
            let f = fun[h.index()].1;
            let mut row = Row::new(n);
            row.entries[f.col_a] = real(f.a);
            row.entries[f.col_a + 1] = real(f.b);
            row.gross = f.a.abs() + f.b.abs();
            rows.push(row);
        }
    }
    // Scale by the cancellation-free magnitude so that rows which vanish
    // through cancellation stay small.
    let mut m = CMatrix::zeros(rows.len(), n);
    for (i, row) in rows.iter().enumerate() {
        let scale = if row.gross > 0.0 { 1.0 / row.gross } else { 1.0 };
        for (j, z) in row.entries.iter().enumerate() {
            m[(i, j)] = z * scale;
        }
    }
    m
}

/// The square secular matrix at `λ`. Each row is divided by the sum of the
/// moduli of its contributions, so entries are bounded by one and the
/// matrix scale is one.
pub fn secular_matrix(spec: &OperatorSpec, lambda: f64) -> CMatrix {
    assemble(spec, lambda, &[])
}

/// `dim ker(H − λ)`: singular values of the secular matrix at or below
/// `threshold`.
pub fn kernel_dimension(spec: &OperatorSpec, lambda: f64, threshold: f64) -> usize {
    linalg::nullity_abs(&secular_matrix(spec, lambda), threshold)
}

/// Dimension of the eigenfunctions at `λ` that additionally have vanishing
/// derivatives at every half-edge of the vertices in `zero_flux_at`. For
/// Dirichlet vertices this is the space of eigenfunctions whose Cauchy data
/// vanish there, i.e. those extending by zero beyond them.
pub fn compact_kernel_dimension(
    spec: &OperatorSpec,
    lambda: f64,
    zero_flux_at: &[VertexId],
    threshold: f64,
) -> usize {
    linalg::nullity_abs(&assemble(spec, lambda, zero_flux_at), threshold)
}

/// Smallest singular value of the secular matrix.
pub fn smallest_singular_value(spec: &OperatorSpec, lambda: f64) -> f64 {
    linalg::singular_values(&secular_matrix(spec, lambda)).last().copied().unwrap_or(0.0)
}

/// Eigenvalues in `[lo, hi] ⊂ [0, ∞)` from local minima of the smallest
/// singular value on a uniform `k`-grid, refined by golden-section search.
pub fn scan(spec: &OperatorSpec, lo: f64, hi: f64, options: &SolverOptions) -> Result<Spectrum> {
    if lo < 0.0 {
        return Err(Error::InvalidArgument(alloc::string::String::from(
            "the singular-value scan needs a window in [0, ∞)",
        )));
    }
    let g = spec.graph();
    let edges = g.num_edges().max(1) as f64;
    let step = (core::f64::consts::PI / (4.0 * g.l_max() * edges)).min(options.max_scan_step);
    let (k_lo, k_hi) = (lo.sqrt(), hi.sqrt());
    let sigma = |k: f64| smallest_singular_value(spec, k * k);
    let n = (((k_hi - k_lo) / step).ceil() as usize).max(1);
    let ks: Vec<f64> = (0..=n).map(|i| k_lo + (k_hi - k_lo) * i as f64 / n as f64).collect();
    let vals: Vec<f64> = ks.iter().map(|&k| sigma(k)).collect();
    let mut found: Vec<(f64, usize)> = Vec::new();
    for i in 0..=n {
        let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
        let right = if i == n { f64::INFINITY } else { vals[i + 1] };
        if vals[i] > left || vals[i] > right {
            continue;
        }
        let a = if i == 0 { ks[0] } else { ks[i - 1] };
        let b = if i == n { ks[n] } else { ks[i + 1] };
        let k = golden_min(&sigma, a, b, options.refine_width);
        let lam = k * k;
        let m = kernel_dimension(spec, lam, options.svd_threshold);
        if m > 0 && lam >= lo && lam <= hi {
            found.push((lam, m));
        }
    }
    found.sort_by(|x, y| x.0.total_cmp(&y.0));
    // Adjacent grid minima may refine onto the same root.
    let mut levels: Vec<Level> = Vec::new();
    for (lam, m) in found {
        match levels.last_mut() {
            Some(l) if (lam - l.value).abs() <= 1e-8 * lam.abs().max(1.0) => {
                l.multiplicity = l.multiplicity.max(m);
            }
            _ => levels.push(Level { value: lam, multiplicity: m }),
        }
    }
    Ok(Spectrum::new(levels, (lo, hi), SolverTag::SingularValueScan, *options, Vec::new()))
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, width: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > width {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
