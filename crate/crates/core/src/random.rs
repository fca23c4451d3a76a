//! Random edge lengths: C¹ densities on `[ℓ_min, ℓ_max]`, keyed sampling and
//! the logarithmic change of variables `α = ln ℓ`.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::lattice::{Cell, EdgeKey, LatticeWindow, PeriodicGraph};

const KNOTS: usize = 2048;
const GRID: usize = 20_001;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum DensityFamily {
    /// `(2/w)·cos²(π(ℓ − m)/w)` with width `w` and midpoint `m`.
    CosineSquared,
    /// `∝ ((ℓ − ℓ_min)(ℓ_max − ℓ))^p`, C¹ for `p ≥ 2`.
    PolynomialBump { power: u32 },
    /// Rejected by [`make_density`]; kept so configs can name it.
    Uniform,
}

/// A normalized C¹ density together with its sup-norm bounds and an
/// inverse-CDF table.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpec {
    l_min: f64,
    l_max: f64,
    family: DensityFamily,
    norm: f64,
    sup_h: f64,
    sup_dh: f64,
    c_h: f64,
    inverse: MonotoneCubic,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `∫₀^u t^p (1−t)^p dt` for `u ≤ 1/2`.
fn beta_partial(p: u32, u: f64) -> f64 {
    (0..=p)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(p, k) * u.powi((p + k + 1) as i32) / (p + k + 1) as f64
        })
        .sum()
}

pub fn make_density(l_min: f64, l_max: f64, family: DensityFamily) -> Result<DensitySpec> {
    if !(l_min > 0.0 && l_max > l_min && l_max.is_finite()) {
        return Err(Error::InvalidBounds { min: l_min, max: l_max });
    }
    let w = l_max - l_min;
    let norm = match family {
        DensityFamily::Uniform => {
            return Err(Error::NotC1(
                "the uniform density jumps at the interval ends, so it has no C¹ extension by zero",
            ))
        }
        DensityFamily::PolynomialBump { power } if power < 2 => {
            return Err(Error::NotC1(
                "a polynomial bump needs power ≥ 2 for its derivative to vanish at the interval ends",
            ))
        }
        DensityFamily::CosineSquared => 2.0 / w,
        DensityFamily::PolynomialBump { power } => 1.0 / (w * 2.0 * beta_partial(power, 0.5)),
    };
    let mut d = DensitySpec {
        l_min,
        l_max,
        family,
        norm,
        sup_h: 0.0,
        sup_dh: 0.0,
        c_h: 0.0,
        inverse: MonotoneCubic::default(),
    };
    let (mut sh, mut sdh) = (0.0f64, 0.0f64);
    for i in 0..GRID {
        let x = l_min + w * i as f64 / (GRID - 1) as f64;
        sh = sh.max(d.pdf(x));
        sdh = sdh.max(d.dpdf(x).abs());
    }
    if let DensityFamily::CosineSquared = family {
        sh = 2.0 / w;
        sdh = 2.0 * PI / (w * w);
    }
    d.sup_h = sh;
    d.sup_dh = sdh;
    d.c_h = sh.max(sdh);
    let xs: Vec<f64> = (0..KNOTS).map(|i| l_min + w * i as f64 / (KNOTS - 1) as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| d.cdf(x)).collect();
    d.inverse = MonotoneCubic::new(fs, xs);
    Ok(d)
}

impl DensitySpec {
    pub fn l_min(&self) -> f64 {
        self.l_min
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    pub fn family(&self) -> DensityFamily {
        self.family
    }

    /// Attained `‖h‖∞`.
    pub fn sup_h(&self) -> f64 {
        self.sup_h
    }

    /// Attained `‖h′‖∞`.
    pub fn sup_dh(&self) -> f64 {
        self.sup_dh
    }

    /// `C_h = max(‖h‖∞, ‖h′‖∞)`.
    pub fn c_h(&self) -> f64 {
        self.c_h
    }

    fn unit(&self, x: f64) -> Option<f64> {
        (self.l_min..=self.l_max)
            .contains(&x)
            .then(|| (x - self.l_min) / (self.l_max - self.l_min))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let Some(u) = self.unit(x) else { return 0.0 };
        match self.family {
            DensityFamily::CosineSquared => self.norm * (PI * (u - 0.5)).cos().powi(2),
            DensityFamily::PolynomialBump { power } => {
                let w = self.l_max - self.l_min;
                self.norm * (u * (1.0 - u) * w * w).powi(power as i32) / w.powi(2 * power as i32)
            }
            DensityFamily::Uniform => unreachable!("rejected at construction"),
        }
    }

    pub fn dpdf(&self, x: f64) -> f64 {
        let Some(u) = self.unit(x) else { return 0.0 };
        let w = self.l_max - self.l_min;
        match self.family {
            DensityFamily::CosineSquared => -self.norm * PI / w * (2.0 * PI * (u - 0.5)).sin(),
            DensityFamily::PolynomialBump { power } => {
                let p = power as i32;
                self.norm * p as f64 * (u * (1.0 - u)).powi(p - 1) * (1.0 - 2.0 * u) / w
            }
            DensityFamily::Uniform => unreachable!("rejected at construction"),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.l_min {
            return 0.0;
        }
        if x >= self.l_max {
            return 1.0;
        }
        let u = (x - self.l_min) / (self.l_max - self.l_min);
        match self.family {
            DensityFamily::CosineSquared => u + (2.0 * PI * (u - 0.5)).sin() / (2.0 * PI),
            DensityFamily::PolynomialBump { power } => {
                let half = beta_partial(power, 0.5);
                if u <= 0.5 {
                    beta_partial(power, u) / (2.0 * half)
                } else {
                    1.0 - beta_partial(power, 1.0 - u) / (2.0 * half)
                }
            }
            DensityFamily::Uniform => unreachable!("rejected at construction"),
        }
    }

    /// Monotone-spline inverse of [`Self::cdf`], clamped to the support.
    pub fn inverse_cdf(&self, p: f64) -> f64 {
        self.inverse.eval(p.clamp(0.0, 1.0)).clamp(self.l_min, self.l_max)
    }

    /// `∫ ℓ h(ℓ) dℓ` by composite Simpson.
    pub fn mean(&self) -> f64 {
        simpson(|x| x * self.pdf(x), self.l_min, self.l_max, GRID - 1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        simpson(|x| (x - m) * (x - m) * self.pdf(x), self.l_min, self.l_max, GRID - 1)
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * i as f64))
        .sum();
    h / 3.0 * (f(a) + f(b) + inner)
}

/// Fritsch–Carlson monotone cubic Hermite interpolant.
#[derive(Debug, Clone, Default, PartialEq)]
struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut m = alloc::vec![0.0; n];
        m[0] = delta[0];
        m[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            m[i] = if delta[i - 1] * delta[i] <= 0.0 { 0.0 } else { (delta[i - 1] + delta[i]) / 2.0 };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let (a, b) = (m[i] / delta[i], m[i + 1] / delta[i]);
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                m[i] = t * a * delta[i];
                m[i + 1] = t * b * delta[i];
            }
        }
        MonotoneCubic { x, y, m }
    }

    fn eval(&self, t: f64) -> f64 {
        let i = self.x.partition_point(|&x| x <= t).clamp(1, self.x.len() - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        if h == 0.0 {
            return self.y[i];
        }
        let s = (t - self.x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.y[i]
            + (s3 - 2.0 * s2 + s) * h * self.m[i]
            + (-2.0 * s3 + 3.0 * s2) * self.y[i + 1]
            + (s3 - s2) * h * self.m[i + 1]
    }
}

/// Law of one edge orbit.
#[derive(Debug, Clone, PartialEq)]
pub enum LengthDistribution {
    Fixed(f64),
    Density(DensitySpec),
}

impl LengthDistribution {
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            LengthDistribution::Fixed(l) => (*l, *l),
            LengthDistribution::Density(d) => (d.l_min, d.l_max),
        }
    }

    fn draw(&self, u: f64) -> f64 {
        match self {
            LengthDistribution::Fixed(l) => *l,
            LengthDistribution::Density(d) => d.inverse_cdf(u),
        }
    }
}

/// Product measure over edges with one law per edge orbit. On a plain graph
/// every edge is its own orbit at cell `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomLengthModel {
    lattice: Option<PeriodicGraph>,
    laws: Vec<LengthDistribution>,
}

impl RandomLengthModel {
    /// One law shared by every edge orbit of `lattice`.
    pub fn periodic(lattice: PeriodicGraph, law: LengthDistribution) -> Self {
        let laws = alloc::vec![law; lattice.edge_orbits().len()];
        RandomLengthModel { lattice: Some(lattice), laws }
    }

    pub fn periodic_per_orbit(lattice: PeriodicGraph, laws: Vec<LengthDistribution>) -> Result<Self> {
        if laws.len() != lattice.edge_orbits().len() {
            return Err(Error::AssignmentSize { expected: lattice.edge_orbits().len(), got: laws.len() });
        }
        Ok(RandomLengthModel { lattice: Some(lattice), laws })
    }

    /// Independent, possibly different laws on the edges of a finite graph.
    pub fn per_edge(laws: Vec<LengthDistribution>) -> Self {
        RandomLengthModel { lattice: None, laws }
    }

    pub fn lattice(&self) -> Option<&PeriodicGraph> {
        self.lattice.as_ref()
    }

    pub fn laws(&self) -> &[LengthDistribution] {
        &self.laws
    }

    /// `(ℓ_min, ℓ_max)` over all laws.
    pub fn bounds(&self) -> (f64, f64) {
        self.laws.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), l| {
            let (a, b) = l.bounds();
            (lo.min(a), hi.max(b))
        })
    }

    pub fn is_deterministic(&self) -> bool {
        self.laws.iter().all(|l| matches!(l, LengthDistribution::Fixed(_)))
    }

    /// Length of edge `key` under `seed`; depends on nothing else.
    pub fn draw(&self, seed: u64, key: EdgeKey) -> f64 {
        self.laws[key.orbit].draw(uniform(seed, key))
    }
}

fn zigzag(x: i64) -> u64 {
    ((x << 1) ^ (x >> 63)) as u64
}

/// ChaCha8 stream id for an edge: orbit in the top 16 bits, zigzag-coded
/// cell coordinates in two 24-bit fields.
pub fn stream_key(key: EdgeKey) -> u64 {
    const MASK: u64 = (1 << 24) - 1;
    ((key.orbit as u64) << 48) | ((zigzag(key.cell[0]) & MASK) << 24) | (zigzag(key.cell[1]) & MASK)
}

fn uniform(seed: u64, key: EdgeKey) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_key(key));
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Lengths of a finite set of edges under `ω = (seed, shift)`:
/// `ℓ(e) = draw(seed, e + shift)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LengthSample {
    pub seed: u64,
    pub shift: Cell,
    pub keys: Vec<EdgeKey>,
    pub lengths: Vec<f64>,
}

impl LengthSample {
    pub fn get(&self, key: EdgeKey) -> Option<f64> {
        self.keys.binary_search(&key).ok().map(|i| self.lengths[i])
    }

    /// Re-expresses the sample on the edges of `window` as a metric graph.
    pub fn metric(&self, window: &LatticeWindow) -> Result<MetricGraph> {
        let lengths = window
            .edge_keys()
            .iter()
            .map(|&k| self.get(k).ok_or_else(|| Error::InvalidArgument(alloc::format!("edge {k:?} not sampled"))))
            .collect::<Result<Vec<_>>>()?;
        window.metric(lengths)
    }
}

/// Samples the given edges. Keys are sorted so lookups are stable.
pub fn sample(model: &RandomLengthModel, keys: &[EdgeKey], seed: u64) -> LengthSample {
    let mut keys = keys.to_vec();
    keys.sort_unstable();
    keys.dedup();
    let lengths = keys.iter().map(|&k| model.draw(seed, k)).collect();
    LengthSample { seed, shift: [0, 0], keys, lengths }
}

/// Samples every edge of `window`, in window edge order.
pub fn sample_window(model: &RandomLengthModel, window: &LatticeWindow, seed: u64) -> Result<MetricGraph> {
    let lengths = window.edge_keys().iter().map(|&k| model.draw(seed, k)).collect();
    window.metric(lengths)
}

/// Samples a finite graph edge by edge (`EdgeKey(e, (0,0))`).
pub fn sample_graph(model: &RandomLengthModel, graph: &MetricGraph, seed: u64) -> Result<MetricGraph> {
    if model.laws.len() < graph.num_edges() {
        return Err(Error::AssignmentSize { expected: graph.num_edges(), got: model.laws.len() });
    }
    let lengths = (0..graph.num_edges()).map(|e| model.draw(seed, EdgeKey::new(e, [0, 0]))).collect();
    graph.with_lengths(lengths)
}

/// `ℓ_{γω}(e) = ℓ_ω(γe)`.
pub fn act(model: &RandomLengthModel, gamma: Cell, sample: &LengthSample) -> Result<LengthSample> {
    let lattice = model.lattice.as_ref().ok_or(Error::NotPeriodic)?;
    let shift = [sample.shift[0] + gamma[0], sample.shift[1] + gamma[1]];
    let lengths = sample
        .keys
        .iter()
        .map(|&k| model.draw(sample.seed, lattice.translate_edge(k, shift)))
        .collect::<Vec<_>>();
    let out = LengthSample { seed: sample.seed, shift, keys: sample.keys.clone(), lengths };
    for (i, &k) in out.keys.iter().enumerate() {
        if let Some(old) = sample.get(lattice.translate_edge(k, gamma)) {
            assert_eq!(out.lengths[i].to_bits(), old.to_bits(), "translation law broken at {k:?}");
        }
    }
    Ok(out)
}

/// The density of `α = ln ℓ`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LogCoordinates {
    pub omega_minus: f64,
    pub omega_plus: f64,
    /// `D_h = (ℓ_max + ℓ_max²)·C_h`.
    pub d_h: f64,
    /// `max |g′|` over the evaluation grid.
    pub attained_sup_dg: f64,
    /// `∫ g` over `[ω₋, ω₊]`.
    pub integral: f64,
}

impl LogCoordinates {
    pub fn within_bound(&self) -> bool {
        self.attained_sup_dg <= self.d_h
    }
}

/// `g(x) = eˣ h(eˣ)` on `[ln ℓ_min, ln ℓ_max]`.
pub fn log_density(d: &DensitySpec, x: f64) -> f64 {
    let l = x.exp();
    l * d.pdf(l)
}

/// `g′(x) = eˣ h(eˣ) + e^{2x} h′(eˣ)`.
pub fn log_density_derivative(d: &DensitySpec, x: f64) -> f64 {
    let l = x.exp();
    l * d.pdf(l) + l * l * d.dpdf(l)
}

pub fn log_transform(d: &DensitySpec) -> LogCoordinates {
    let (a, b) = (d.l_min.ln(), d.l_max.ln());
    let sup = (0..GRID)
        .map(|i| log_density_derivative(d, a + (b - a) * i as f64 / (GRID - 1) as f64).abs())
        .fold(0.0, f64::max);
    LogCoordinates {
        omega_minus: a,
        omega_plus: b,
        d_h: (d.l_max + d.l_max * d.l_max) * d.c_h,
        attained_sup_dg: sup,
        integral: simpson(|x| log_density(d, x), a, b, GRID - 1),
    }
}

/// Kolmogorov–Smirnov distance between draws and a CDF.
pub fn ks_distance(draws: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = draws.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample KS critical value at level 1%.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> DensitySpec {
        make_density(0.5, 1.5, DensityFamily::CosineSquared).unwrap()
    }

    #[test]
    fn cosine_bump_shape() {
        let d = bump();
        assert!((d.pdf(1.0) - 2.0).abs() < 1e-15);
        assert!(d.pdf(0.5).abs() + d.pdf(1.5).abs() < 1e-15);
        assert!(d.dpdf(0.5).abs() < 1e-12 && d.dpdf(1.5).abs() < 1e-12);
        assert!((simpson(|x| d.pdf(x), 0.5, 1.5, 2000) - 1.0).abs() < 1e-12);
        assert!((d.sup_h() - 2.0).abs() < 1e-15);
        let w = make_density(1.0, 3.0, DensityFamily::CosineSquared).unwrap();
        assert!((w.sup_h() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_uniform_and_linear_bump() {
        assert!(matches!(make_density(0.5, 1.5, DensityFamily::Uniform), Err(Error::NotC1(_))));
        assert!(matches!(
            make_density(0.5, 1.5, DensityFamily::PolynomialBump { power: 1 }),
            Err(Error::NotC1(_))
        ));
        assert!(matches!(make_density(1.0, 1.0, DensityFamily::CosineSquared), Err(Error::InvalidBounds { .. })));
    }

    #[test]
    fn polynomial_bump_normalized() {
        let d = make_density(0.8, 1.25, DensityFamily::PolynomialBump { power: 3 }).unwrap();
        assert!((simpson(|x| d.pdf(x), 0.8, 1.25, 4000) - 1.0).abs() < 1e-12);
        assert!((d.cdf(1.025) - 0.5).abs() < 1e-14);
        let h = 1e-6;
        let fd = (d.cdf(1.0 + h) - d.cdf(1.0 - h)) / (2.0 * h);
        assert!((fd - d.pdf(1.0)).abs() < 1e-6);
    }

    #[test]
    fn inverse_cdf_round_trip() {
        let d = bump();
        for i in 1..100 {
            let p = i as f64 / 100.0;
            assert!((d.cdf(d.inverse_cdf(p)) - p).abs() < 1e-6);
        }
    }

    #[test]
    fn log_coordinates() {
        let d = bump();
        let lc = log_transform(&d);
        assert!((lc.omega_minus - 0.5f64.ln()).abs() < 1e-15);
        assert!((lc.integral - 1.0).abs() < 1e-10);
        assert!(lc.within_bound());
        assert!((lc.d_h - 3.75 * d.c_h()).abs() < 1e-12);
    }

    #[test]
    fn zigzag_keys_distinct() {
        let a = stream_key(EdgeKey::new(1, [-1, 0]));
        let b = stream_key(EdgeKey::new(1, [1, 0]));
        let c = stream_key(EdgeKey::new(0, [-1, 0]));
        assert!(a != b && a != c && b != c);
    }
}
