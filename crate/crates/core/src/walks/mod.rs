//! Reversible Markov chains, Szegedy walk operators and spatial search by
//! randomly sampled walk powers.
//!
//! Edge space: |a, b⟩ has index a·n + b. The reference state |0̄⟩ is node 0 of
//! the first register and U_P|0̄⟩|x⟩ = Σ_y √p_xy |y, x⟩, so node
//! measurements read the second register.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::core_algebra::{CMatrix, DenseOperator, StateVector, C64};
use crate::error::{Error, Result};
use crate::lcu_decomp::{chebyshev_power_coeffs, poisson_weights, power_exponent};
use crate::rng::stream;

/// Largest chain handled; dense walk matrices then act on 4096 edges.
pub const MAX_NODES: usize = 64;
const ROW_TOL: f64 = 1e-12;
const REVERSIBLE_TOL: f64 = 1e-10;
const EXPERIMENT_SEARCH: u64 = 4;

#[derive(Clone, Debug)]
pub struct MarkovChain {
    p: DMatrix<f64>,
    pi: Vec<f64>,
    ergodic: bool,
    reversible: bool,
}

impl MarkovChain {
    pub fn new(p: DMatrix<f64>) -> Result<MarkovChain> {
        let n = p.nrows();
        if n == 0 || p.ncols() != n {
            return Err(Error::InvalidInput("transition matrix must be square and nonempty".into()));
        }
        if n > MAX_NODES {
            return Err(Error::Precondition(format!("{n} nodes exceeds the limit of {MAX_NODES}")));
        }
        if p.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput("transition probabilities must be finite and non-negative".into()));
        }
        for r in 0..n {
            let s: f64 = p.row(r).iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidInput(format!("row {r} sums to {s}")));
            }
        }
        let pi = stationary(&p)?;
        let ergodic = is_primitive(&p);
        let reversible = (0..n).all(|x| (0..n).all(|y| (pi[x] * p[(x, y)] - pi[y] * p[(y, x)]).abs() <= REVERSIBLE_TOL));
        Ok(MarkovChain { p, pi, ergodic, reversible })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<MarkovChain> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("transition rows must form a square matrix".into()));
        }
        MarkovChain::new(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
    }

    /// Random walk on a symmetric weighted graph: p_xy = w_xy / Σ_y w_xy.
    pub fn from_weights(w: &DMatrix<f64>) -> Result<MarkovChain> {
        let n = w.nrows();
        if w.ncols() != n {
            return Err(Error::InvalidInput("weight matrix must be square".into()));
        }
        if (0..n).any(|x| (0..n).any(|y| (w[(x, y)] - w[(y, x)]).abs() > 1e-12 || w[(x, y)] < 0.0)) {
            return Err(Error::InvalidInput("weights must be symmetric and non-negative".into()));
        }
        let mut p = w.clone();
        for x in 0..n {
            let s: f64 = w.row(x).iter().sum();
            if s <= 0.0 {
                return Err(Error::InvalidInput(format!("node {x} has no edges")));
            }
            p.row_mut(x).scale_mut(1.0 / s);
        }
        MarkovChain::new(p)
    }

    pub fn cycle(n: usize) -> Result<MarkovChain> {
        if n < 2 {
            return Err(Error::InvalidInput("a cycle needs at least 2 nodes".into()));
        }
        let mut w = DMatrix::zeros(n, n);
        for x in 0..n {
            w[(x, (x + 1) % n)] = 1.0;
            w[((x + 1) % n, x)] = 1.0;
        }
        MarkovChain::from_weights(&w)
    }

    pub fn complete(n: usize) -> Result<MarkovChain> {
        if n < 2 {
            return Err(Error::InvalidInput("a complete graph needs at least 2 nodes".into()));
        }
        MarkovChain::from_weights(&DMatrix::from_fn(n, n, |r, c| if r == c { 0.0 } else { 1.0 }))
    }

    /// Lines of "u v weight" (zero-based), '#' starts a comment. Each edge is
    /// added symmetrically; listing both directions with equal weight is
    /// accepted, unequal weights are not.
    pub fn parse_edge_list(text: &str) -> Result<MarkovChain> {
        let mut edges = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected \"u v weight\"", no + 1)));
            }
            let bad = |s: &str| Error::Parse(format!("line {}: bad field '{s}'", no + 1));
            let u: usize = f[0].parse().map_err(|_| bad(f[0]))?;
            let v: usize = f[1].parse().map_err(|_| bad(f[1]))?;
            let wt: f64 = f[2].parse().map_err(|_| bad(f[2]))?;
            if !(wt > 0.0) || !wt.is_finite() {
                return Err(Error::Parse(format!("line {}: weight must be positive", no + 1)));
            }
            edges.push((u, v, wt));
        }
        let n = edges.iter().map(|(u, v, _)| u.max(v) + 1).max().ok_or_else(|| Error::Parse("edge list is empty".into()))?;
        if n > MAX_NODES {
            return Err(Error::Precondition(format!("{n} nodes exceeds the limit of {MAX_NODES}")));
        }
        let mut w: DMatrix<f64> = DMatrix::zeros(n, n);
        let mut seen = vec![false; n * n];
        for (u, v, wt) in edges {
            for (a, b) in [(u, v), (v, u)] {
                if seen[a * n + b] && (w[(a, b)] - wt).abs() > 1e-12 {
                    return Err(Error::Parse(format!("edge {u}-{v} listed with different weights")));
                }
                seen[a * n + b] = true;
                w[(a, b)] = wt;
            }
        }
        MarkovChain::from_weights(&w)
    }

    /// Symmetric random weights on a ring plus random chords; reversible and
    /// irreducible by construction.
    pub fn random_reversible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<MarkovChain> {
        if n < 2 {
            return Err(Error::InvalidInput("need at least 2 nodes".into()));
        }
        let mut w = DMatrix::zeros(n, n);
        for x in 0..n {
            for y in x..n {
                let ring = y == x + 1 || (x == 0 && y == n - 1);
                if ring || rng.random::<f64>() < 0.4 {
                    let v = 0.1 + rng.random::<f64>();
                    w[(x, y)] = v;
                    w[(y, x)] = v;
                }
            }
        }
        MarkovChain::from_weights(&w)
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    pub fn is_ergodic(&self) -> bool {
        self.ergodic
    }

    pub fn is_reversible(&self) -> bool {
        self.reversible
    }
}

/// π with πP = π and Σπ = 1. Irreducible chains take one linear solve; when
/// π is not unique, the lazy power iteration from the uniform distribution
/// picks one (for the identity chain that is the uniform distribution).
fn stationary(p: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = p.nrows();
    let mut a = p.transpose() - DMatrix::identity(n, n);
    let mut rhs = nalgebra::DVector::zeros(n);
    for c in 0..n {
        a[(n - 1, c)] = 1.0;
    }
    rhs[n - 1] = 1.0;
    if let Some(pi) = a.lu().solve(&rhs) {
        let residual = (p.transpose() * &pi - &pi).amax();
        if pi.iter().all(|v| *v >= -1e-12) && residual < 1e-12 {
            return Ok(pi.iter().map(|v| v.max(0.0)).collect());
        }
    }
    let half = (p.transpose() + DMatrix::identity(n, n)) * 0.5;
    let mut pi = nalgebra::DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..1_000_000 {
        let next = &half * &pi;
        let delta = (&next - &pi).lp_norm(1);
        pi = next;
        if delta < 1e-15 {
            return Ok(pi.iter().copied().collect());
        }
    }
    Err(Error::Convergence("stationary distribution iteration did not settle".into()))
}

/// Irreducible and aperiodic: some power of the support pattern is full.
fn is_primitive(p: &DMatrix<f64>) -> bool {
    let n = p.nrows();
    let pattern = DMatrix::from_fn(n, n, |r, c| if p[(r, c)] > 0.0 { 1.0 } else { 0.0 });
    // Wielandt: primitive iff the power (n−1)² + 1 is positive.
    let target = (n - 1) * (n - 1) + 1;
    let mut acc = pattern.clone();
    let mut reached = 1;
    while reached < target {
        acc = (&acc * &acc).map(|v| if v > 0.0 { 1.0 } else { 0.0 });
        reached *= 2;
    }
    // acc is a power ≥ target; positivity is monotone past the exponent.
    acc.iter().all(|v| *v > 0.0)
}

/// (I + P)/2.
pub fn lazy(p: &MarkovChain) -> MarkovChain {
    let n = p.n();
    let q = (p.matrix() + DMatrix::identity(n, n)) * 0.5;
    MarkovChain::new(q).expect("lazy chain of a valid chain is valid")
}

/// P(s) = (1−s)P + sP′ where P′ turns marked rows into self-loops.
#[derive(Clone, Debug)]
pub struct InterpolatedChain {
    base: MarkovChain,
    marked: Vec<usize>,
    s: f64,
}

impl InterpolatedChain {
    pub fn new(base: MarkovChain, marked: &[usize], s: f64) -> Result<InterpolatedChain> {
        let marked = check_marked(base.n(), marked)?;
        if !(0.0..1.0).contains(&s) {
            return Err(Error::InvalidInput(format!("interpolation s = {s} must lie in [0, 1)")));
        }
        Ok(InterpolatedChain { base, marked, s })
    }

    pub fn base(&self) -> &MarkovChain {
        &self.base
    }

    pub fn marked(&self) -> &[usize] {
        &self.marked
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        interpolated_matrix(self.base.matrix(), &self.marked, self.s)
    }
}

fn check_marked(n: usize, marked: &[usize]) -> Result<Vec<usize>> {
    if marked.is_empty() {
        return Err(Error::Precondition("no marked nodes".into()));
    }
    if let Some(bad) = marked.iter().find(|m| **m >= n) {
        return Err(Error::InvalidInput(format!("marked node {bad} is out of range for {n} nodes")));
    }
    let mut m = marked.to_vec();
    m.sort_unstable();
    m.dedup();
    Ok(m)
}

/// (1−s)P + sP′ for any s ∈ [0, 1].
pub fn interpolated_matrix(p: &DMatrix<f64>, marked: &[usize], s: f64) -> DMatrix<f64> {
    let mut q = p.clone();
    for &x in marked {
        let mut row = q.row_mut(x);
        row.scale_mut(1.0 - s);
        row[x] += s;
    }
    q
}

/// D_xy = √(p_xy p_yx).
pub fn discriminant_matrix(p: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(p.nrows(), p.ncols(), |x, y| (p[(x, y)] * p[(y, x)]).sqrt())
}

pub fn discriminant(c: &InterpolatedChain) -> DenseOperator {
    to_dense(&discriminant_matrix(&c.matrix()))
}

fn to_dense(m: &DMatrix<f64>) -> DenseOperator {
    DenseOperator::general(m.map(|v| C64::new(v, 0.0))).expect("square matrix")
}

/// Expected steps to reach M from π restricted to the unmarked nodes:
/// Σ_{x∉M} (π_x / π(U)) τ_x with (I − P_UU)τ = 1.
pub fn hitting_time(p: &MarkovChain, marked: &[usize]) -> Result<f64> {
    let marked = check_marked(p.n(), marked)?;
    let unmarked: Vec<usize> = (0..p.n()).filter(|x| marked.binary_search(x).is_err()).collect();
    if unmarked.is_empty() {
        return Ok(0.0);
    }
    let k = unmarked.len();
    let a = DMatrix::from_fn(k, k, |r, c| (if r == c { 1.0 } else { 0.0 }) - p.matrix()[(unmarked[r], unmarked[c])]);
    let tau = a
        .lu()
        .solve(&nalgebra::DVector::from_element(k, 1.0))
        .filter(|t| t.iter().all(|v| v.is_finite() && *v >= 0.0))
        .ok_or_else(|| Error::Precondition("marked nodes are unreachable from some unmarked node".into()))?;
    let pi = p.stationary();
    let mass: f64 = unmarked.iter().map(|x| pi[*x]).sum();
    if !(mass > 0.0) {
        return Err(Error::Precondition("stationary distribution has no unmarked support".into()));
    }
    Ok(unmarked.iter().zip(tau.iter()).map(|(x, t)| pi[*x] / mass * t).sum())
}

/// Szegedy walk of a chain, stored as one Householder reflection per node.
#[derive(Clone, Debug)]
pub struct WalkOperator {
    n: usize,
    /// Unit Householder vector per node, `None` when p_x0 = 1.
    reflectors: Vec<Option<Vec<f64>>>,
    disc: DMatrix<f64>,
}

pub fn build_walk(c: &InterpolatedChain) -> WalkOperator {
    walk_from_matrix(&c.matrix())
}

/// Walk of a row-stochastic matrix. U_P acts on node block x as the
/// reflection exchanging |0̄⟩ and Σ_y √p_xy |y⟩.
pub fn walk_from_matrix(p: &DMatrix<f64>) -> WalkOperator {
    let n = p.nrows();
    let reflectors = (0..n)
        .map(|x| {
            let mut w: Vec<f64> = (0..n).map(|y| p[(x, y)].sqrt()).collect();
            w[0] -= 1.0;
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            (norm > 1e-15).then(|| w.iter().map(|v| v / norm).collect())
        })
        .collect();
    WalkOperator { n, reflectors, disc: discriminant_matrix(p) }
}

impl WalkOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_dim(&self) -> usize {
        self.n * self.n
    }

    pub fn discriminant(&self) -> &DMatrix<f64> {
        &self.disc
    }

    fn reflect_blocks(&self, v: &mut [C64]) {
        let n = self.n;
        for (x, r) in self.reflectors.iter().enumerate() {
            if let Some(u) = r {
                let dot: C64 = (0..n).map(|a| v[a * n + x] * u[a]).sum();
                for a in 0..n {
                    v[a * n + x] -= dot * (2.0 * u[a]);
                }
            }
        }
    }

    fn swap(&self, v: &[C64]) -> Vec<C64> {
        let n = self.n;
        (0..n * n).map(|i| v[(i % n) * n + i / n]).collect()
    }

    pub fn apply_u_p(&self, v: &[C64]) -> Vec<C64> {
        let mut out = v.to_vec();
        self.reflect_blocks(&mut out);
        out
    }

    /// U_P† S U_P; U_P is a real symmetric product of reflections.
    pub fn apply_u_d(&self, v: &[C64]) -> Vec<C64> {
        let mut out = self.swap(&self.apply_u_p(v));
        self.reflect_blocks(&mut out);
        out
    }

    /// V = (2Π₀ − I) U_D.
    pub fn apply_v(&self, v: &[C64]) -> Vec<C64> {
        let mut out = self.apply_u_d(v);
        for a in out.iter_mut().skip(self.n) {
            *a = -*a;
        }
        out
    }

    pub fn apply_v_power(&self, v: &[C64], k: usize) -> Vec<C64> {
        let mut out = v.to_vec();
        for _ in 0..k {
            out = self.apply_v(&out);
        }
        out
    }

    fn dense_of(&self, f: impl Fn(&[C64]) -> Vec<C64>) -> DenseOperator {
        let dim = self.edge_dim();
        let mut m = CMatrix::zeros(dim, dim);
        let mut e = vec![C64::new(0.0, 0.0); dim];
        for c in 0..dim {
            e[c] = C64::new(1.0, 0.0);
            for (r, v) in f(&e).into_iter().enumerate() {
                m[(r, c)] = v;
            }
            e[c] = C64::new(0.0, 0.0);
        }
        DenseOperator::general(m).expect("square matrix")
    }

    pub fn u_p(&self) -> DenseOperator {
        self.dense_of(|v| self.apply_u_p(v))
    }

    pub fn u_d(&self) -> DenseOperator {
        self.dense_of(|v| self.apply_u_d(v))
    }

    pub fn v(&self) -> DenseOperator {
        self.dense_of(|v| self.apply_v(v))
    }
}

/// |0̄⟩|ψ⟩ on the edge space.
pub fn edge_state(psi: &[C64]) -> Vec<C64> {
    let n = psi.len();
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    out[..n].copy_from_slice(psi);
    out
}

/// Node distribution of the second register.
pub fn node_marginal(state: &[C64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (i, a) in state.iter().enumerate() {
        out[i % n] += a.norm_sqr();
    }
    out
}

fn marked_mass(state: &[C64], n: usize, marked: &[usize]) -> f64 {
    let m = node_marginal(state, n);
    marked.iter().map(|x| m[*x]).sum()
}

/// Top-left n×n block, i.e. (⟨0̄|⊗I) M (|0̄⟩⊗I).
pub fn top_block(m: &CMatrix, n: usize) -> CMatrix {
    m.view((0, 0), (n, n)).into_owned()
}

/// ‖(⟨0̄|⊗I)V^t(|0̄⟩⊗I) − T_t(D)‖.
pub fn chebyshev_block_check(w: &WalkOperator, t: usize) -> f64 {
    let n = w.n();
    let mut block = CMatrix::zeros(n, n);
    for x in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[x] = C64::new(1.0, 0.0);
        let out = w.apply_v_power(&edge_state(&e), t);
        for y in 0..n {
            block[(y, x)] = out[y];
        }
    }
    let d = w.discriminant();
    let (mut prev, mut cur) = (DMatrix::<f64>::identity(n, n), d.clone());
    let tt = if t == 0 {
        prev
    } else {
        for _ in 1..t {
            let next = d * &cur * 2.0 - &prev;
            prev = cur;
            cur = next;
        }
        cur
    };
    crate::core_algebra::spectral_norm(&(block - tt.map(|v| C64::new(v, 0.0))))
}

/// H_P = i[U_H, Π₀] with Π₀ the projector on the first `block_dim`
/// coordinates; its squared top block is I − H².
pub fn build_hp(u_h: &DenseOperator, block_dim: usize) -> Result<DenseOperator> {
    let dim = u_h.dim();
    if block_dim == 0 || block_dim > dim {
        return Err(Error::InvalidInput(format!("block dimension {block_dim} does not fit in {dim}")));
    }
    let m = u_h.matrix();
    let sq = m * m - CMatrix::identity(dim, dim);
    if sq.iter().any(|v| v.norm() > 1e-10) {
        return Err(Error::InvalidInput("block-encoding unitary is not involutory".into()));
    }
    let pi = CMatrix::from_fn(dim, dim, |r, c| if r == c && r < block_dim { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    DenseOperator::hermitian((m * &pi - &pi * m) * C64::new(0.0, 1.0))
}

/// Weights over walk exponents: (probability, exponent).
pub type Mixture = Vec<(f64, usize)>;

/// POW-HAM distribution: ℓ with probability c_ℓ/‖c‖₁, exponent 2ℓ or 2ℓ+1.
/// An odd t needs degree at least 1, so d is raised to 1 there.
pub fn pow_ham_mixture(t: usize, d: usize) -> Mixture {
    let c = chebyshev_power_coeffs(t, d.max(t % 2));
    let total: f64 = c.iter().sum();
    c.iter().enumerate().map(|(l, v)| (v / total, power_exponent(t, l))).collect()
}

/// EXP-HAM distribution: j ~ e^{−t}t^j/j! on [0, d] renormalized, then
/// POW-HAM(j, d′); weights merged by exponent.
pub fn exp_ham_mixture(t: f64, d: usize, d_prime: usize) -> Mixture {
    let w = poisson_weights(t, d);
    let total: f64 = w.iter().sum();
    let mut by_exp = vec![0.0; d.min(d_prime.max(1)) + 2];
    for (j, wj) in w.iter().enumerate() {
        if *wj == 0.0 {
            continue;
        }
        for (p, e) in pow_ham_mixture(j, d_prime) {
            by_exp[e] += wj / total * p;
        }
    }
    by_exp.into_iter().enumerate().filter(|(_, p)| *p > 0.0).map(|(e, p)| (p, e)).collect()
}

fn sample_index<R: Rng + ?Sized>(weights: impl Iterator<Item = f64>, total: f64, rng: &mut R) -> usize {
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last = i;
        }
        acc += w;
        if u < acc {
            return i;
        }
    }
    last
}

fn check_edge_state(w: &WalkOperator, psi0: &StateVector) -> Result<()> {
    if psi0.dim() != w.edge_dim() {
        return Err(Error::InvalidInput(format!("state dimension {} does not match the edge space {}", psi0.dim(), w.edge_dim())));
    }
    Ok(())
}

/// One run of POW-HAM with t rounded to an integer. Returns the state and
/// the number of walk steps applied.
pub fn pow_ham<R: Rng + ?Sized>(t: f64, d: usize, w: &WalkOperator, psi0: &StateVector, rng: &mut R) -> Result<(StateVector, usize)> {
    check_edge_state(w, psi0)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("t = {t} must be finite and non-negative")));
    }
    let mix = pow_ham_mixture(t.round() as usize, d);
    let k = mix[sample_index(mix.iter().map(|m| m.0), 1.0, rng)].1;
    Ok((StateVector::new(w.apply_v_power(psi0.amplitudes(), k)), k))
}

/// One run of EXP-HAM: Poisson draw ℓ ∈ [0, d], then POW-HAM(ℓ, d′).
pub fn exp_ham<R: Rng + ?Sized>(
    t: f64,
    d: usize,
    d_prime: usize,
    w: &WalkOperator,
    psi0: &StateVector,
    rng: &mut R,
) -> Result<(StateVector, usize)> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("t = {t} must be finite and non-negative")));
    }
    let pw = poisson_weights(t, d);
    let total: f64 = pw.iter().sum();
    let l = sample_index(pw.iter().copied(), total, rng);
    pow_ham(l as f64, d_prime, w, psi0, rng)
}

/// q_k = ‖(I⊗Π_M)V^k ψ‖² for k = 0..=k_max.
pub fn marked_projections(w: &WalkOperator, psi0: &[C64], marked: &[usize], k_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max + 1);
    let mut state = psi0.to_vec();
    for k in 0..=k_max {
        if k > 0 {
            state = w.apply_v(&state);
        }
        out.push(marked_mass(&state, w.n(), marked));
    }
    out
}

/// Tr[(I⊗Π_M)ρ̄] for the averaged state of a mixture.
pub fn mixture_projection(w: &WalkOperator, mixture: &Mixture, psi0: &[C64], marked: &[usize]) -> f64 {
    let k_max = mixture.iter().map(|m| m.1).max().unwrap_or(0);
    let q = marked_projections(w, psi0, marked, k_max);
    mixture.iter().map(|(p, e)| p * q[*e]).sum()
}

/// Degree d = ⌈√(2t ln(24/ε))⌉ for POW-HAM.
pub fn power_search_degree(t: f64, eps: f64) -> usize {
    (2.0 * t * (24.0 / eps).ln()).max(0.0).sqrt().ceil() as usize
}

/// d = ⌈max{te², ln(12/ε)}⌉ and d′ = ⌈√(2d ln(48/ε))⌉ for EXP-HAM.
pub fn exp_search_degrees(t: f64, eps: f64) -> (usize, usize) {
    let d = (t * std::f64::consts::E.powi(2)).max((12.0 / eps).ln()).ceil() as usize;
    let dp = (2.0 * d as f64 * (48.0 / eps).ln()).sqrt().ceil() as usize;
    (d, dp)
}

/// Sup bound on |x^t − p_{t,d}(x)| for the truncation actually used.
pub fn power_truncation_bound(t: usize, d: usize) -> f64 {
    let mix = pow_ham_mixture(t, d);
    let top = mix.last().map(|m| m.1).unwrap_or(0);
    if top >= t {
        0.0
    } else {
        (2.0 * (-((top * top) as f64) / (2.0 * t as f64)).exp()).min(2.0)
    }
}

/// Sup bound on |e^{t(x−1)} − q_{t,d,d′}(x)|: Poisson tail beyond d plus
/// the weighted power truncations.
pub fn exp_truncation_bound(t: f64, d: usize, d_prime: usize) -> f64 {
    let w = poisson_weights(t, d);
    let tail = (1.0 - w.iter().sum::<f64>()).max(0.0);
    tail + w.iter().enumerate().map(|(j, wj)| wj * power_truncation_bound(j, d_prime)).sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchKind {
    /// Discrete-time fast-forwarding, D(s)^t.
    Power,
    /// Continuous-time fast-forwarding, e^{t(D(s)−I)}.
    Exp,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub kind: SearchKind,
    /// T = c_T · HT unless `big_t` is set.
    pub c_t: f64,
    pub big_t: Option<f64>,
}

impl SearchConfig {
    pub fn new(kind: SearchKind) -> SearchConfig {
        SearchConfig { kind, c_t: 1.0, big_t: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub found: bool,
    pub node: usize,
    pub s_used: f64,
    pub t_used: f64,
    pub walk_steps_applied: usize,
    /// Largest exponent the sampled walk power could take.
    pub budget: usize,
}

/// Everything a search run needs, built once per chain.
#[derive(Clone, Debug)]
pub struct SearchSetup {
    chain: MarkovChain,
    marked: Vec<usize>,
    kind: SearchKind,
    pub hitting_time: f64,
    pub big_t: f64,
    /// POW-HAM degree (power search) or Poisson cut-off (exp search).
    pub d: usize,
    /// POW-HAM degree inside EXP-HAM; equals `d` for power search.
    pub d_prime: usize,
    pub s_values: Vec<f64>,
    walks: Vec<WalkOperator>,
    /// Normalized |√π_U⟩.
    psi_u: Vec<C64>,
    pub marked_mass: f64,
}

/// s = 1 − 1/r for r ∈ {2⁰, …, 2^{⌈log₂T⌉}}.
pub fn s_grid(big_t: f64) -> Vec<f64> {
    let top = if big_t > 1.0 { big_t.log2().ceil() as u32 } else { 0 };
    (0..=top).map(|k| 1.0 - 1.0 / 2f64.powi(k as i32)).collect()
}

fn normalized_unmarked(pi: &[f64], marked: &[usize]) -> Option<Vec<C64>> {
    let mut v: Vec<C64> = pi.iter().map(|p| C64::new(p.sqrt(), 0.0)).collect();
    for m in marked {
        v[*m] = C64::new(0.0, 0.0);
    }
    let n: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    (n > 0.0).then(|| v.iter().map(|a| a / n).collect())
}

impl SearchSetup {
    /// Lazifies `p`, then fixes T, the degrees and the walk for every s.
    pub fn new(p: &MarkovChain, marked: &[usize], config: &SearchConfig) -> Result<SearchSetup> {
        let marked = check_marked(p.n(), marked)?;
        if !p.is_reversible() {
            return Err(Error::Precondition("spatial search needs a reversible chain".into()));
        }
        let chain = lazy(p);
        if !chain.is_ergodic() {
            return Err(Error::Precondition("spatial search needs an irreducible chain".into()));
        }
        let hitting_time = hitting_time(&chain, &marked)?;
        let big_t = match config.big_t {
            Some(t) if t >= 0.0 && t.is_finite() => t,
            Some(t) => return Err(Error::InvalidInput(format!("T = {t} must be finite and non-negative"))),
            None => config.c_t * hitting_time,
        };
        let ln_t = if big_t > 1.0 { big_t.ln() } else { 0.0 };
        let (d, d_prime) = match config.kind {
            SearchKind::Power => {
                let d = (big_t * ln_t).sqrt().ceil() as usize;
                (d, d)
            }
            SearchKind::Exp => {
                let d = (big_t * std::f64::consts::E.powi(2)).ceil() as usize;
                let dp = (2.0 * big_t * (48.0 * (ln_t * ln_t).max(1.0)).ln()).sqrt().ceil() as usize;
                (d, dp)
            }
        };
        let s_values = s_grid(big_t);
        let walks = s_values.iter().map(|s| walk_from_matrix(&interpolated_matrix(chain.matrix(), &marked, *s))).collect();
        let pi = chain.stationary();
        let marked_mass = marked.iter().map(|m| pi[*m]).sum::<f64>().min(1.0);
        let psi_u = normalized_unmarked(pi, &marked).unwrap_or_default();
        Ok(SearchSetup { chain, marked, kind: config.kind, hitting_time, big_t, d, d_prime, s_values, walks, psi_u, marked_mass })
    }

    pub fn chain(&self) -> &MarkovChain {
        &self.chain
    }

    pub fn marked(&self) -> &[usize] {
        &self.marked
    }

    pub fn kind(&self) -> SearchKind {
        self.kind
    }

    fn t_values(&self) -> usize {
        self.big_t.floor() as usize + 1
    }

    fn mixture(&self, t: usize) -> Mixture {
        match self.kind {
            SearchKind::Power => pow_ham_mixture(t, self.d),
            SearchKind::Exp => exp_ham_mixture(t as f64, self.d, self.d_prime),
        }
    }

    fn budget(&self) -> usize {
        self.d_prime.max(1)
    }

    /// One run of the search algorithm.
    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> SearchOutcome {
        let n = self.chain.n();
        let t = rng.random_range(0..self.t_values());
        let si = rng.random_range(0..self.s_values.len());
        let s = self.s_values[si];
        let pi = self.chain.stationary();
        // Pre-measurement of the marked projector on |√π⟩.
        if rng.random::<f64>() < self.marked_mass || self.psi_u.is_empty() {
            let node = self.marked[sample_index(self.marked.iter().map(|m| pi[*m]), self.marked_mass, rng)];
            return SearchOutcome { found: true, node, s_used: s, t_used: t as f64, walk_steps_applied: 0, budget: self.budget() };
        }
        let psi0 = StateVector::new(edge_state(&self.psi_u));
        let w = &self.walks[si];
        let (state, steps) = match self.kind {
            SearchKind::Power => pow_ham(t as f64, self.d, w, &psi0, rng),
            SearchKind::Exp => exp_ham(t as f64, self.d, self.d_prime, w, &psi0, rng),
        }
        .expect("setup guarantees valid inputs");
        let marginal = node_marginal(state.amplitudes(), n);
        let total: f64 = marginal.iter().sum();
        let node = sample_index(marginal.iter().copied(), total, rng);
        SearchOutcome {
            found: self.marked.binary_search(&node).is_ok(),
            node,
            s_used: s,
            t_used: t as f64,
            walk_steps_applied: steps,
            budget: self.budget(),
        }
    }

    /// Independent trials on counter-derived streams, in trial order.
    pub fn run_trials(&self, trials: u64, seed: u64) -> Vec<SearchOutcome> {
        (0..trials).into_par_iter().map(|i| self.run(&mut stream(seed, EXPERIMENT_SEARCH, i))).collect()
    }

    /// Per (s, t): Tr[(I⊗Π_M)ρ̄] of the sampled walk starting from
    /// |0̄⟩|√π_U⟩, indexed [s][t].
    pub fn sampled_projections(&self) -> Vec<Vec<f64>> {
        if self.psi_u.is_empty() {
            return vec![vec![1.0; self.t_values()]; self.s_values.len()];
        }
        let mixtures: Vec<Mixture> = (0..self.t_values()).map(|t| self.mixture(t)).collect();
        let k_max = mixtures.iter().flat_map(|m| m.iter().map(|x| x.1)).max().unwrap_or(0);
        let start = edge_state(&self.psi_u);
        self.walks
            .iter()
            .map(|w| {
                let q = marked_projections(w, &start, &self.marked, k_max);
                mixtures.iter().map(|m| m.iter().map(|(p, e)| p * q[*e]).sum()).collect()
            })
            .collect()
    }

    /// Exact success probability of one run, pre-measurement included.
    pub fn success_oracle(&self) -> f64 {
        let proj = self.sampled_projections();
        let avg = proj.iter().flatten().sum::<f64>() / (proj.len() * self.t_values()) as f64;
        self.marked_mass + (1.0 - self.marked_mass) * avg
    }

    /// ‖Π_M f_t(D(s))|√π_U⟩‖² indexed [s][t].
    pub fn ideal_projections(&self) -> Vec<Vec<f64>> {
        let p = self.chain.matrix();
        self.s_values
            .iter()
            .map(|s| ideal_curve(&interpolated_matrix(p, &self.marked, *s), &self.marked, &self.psi_u, self.t_values(), self.kind))
            .collect()
    }

    /// Rigorous error of the sampled polynomial against f_t, indexed by t:
    /// ‖Π p ψ‖² ≥ ‖Π f ψ‖² − 2δ when ‖p − f‖ ≤ δ.
    pub fn lemma_epsilons(&self) -> Vec<f64> {
        (0..self.t_values())
            .map(|t| {
                2.0 * match self.kind {
                    SearchKind::Power => power_truncation_bound(t, self.d),
                    SearchKind::Exp => exp_truncation_bound(t as f64, self.d, self.d_prime),
                }
            })
            .collect()
    }

    /// min over (s, t) of Tr[(I⊗Π_M)ρ̄] − (‖Π_M f_t(D(s))ψ_U‖² − ε_t).
    pub fn theorem1_slack(&self) -> f64 {
        let sampled = self.sampled_projections();
        let ideal = self.ideal_projections();
        let eps = self.lemma_epsilons();
        sampled
            .iter()
            .zip(&ideal)
            .flat_map(|(a, b)| a.iter().zip(b).zip(&eps).map(|((x, y), e)| x - (y - e)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// ‖Π_M f_t(D)ψ‖² for t = 0..len with f_t = D^t or e^{t(D−I)}.
fn ideal_curve(p: &DMatrix<f64>, marked: &[usize], psi: &[C64], len: usize, kind: SearchKind) -> Vec<f64> {
    if psi.is_empty() {
        return vec![1.0; len];
    }
    let d = discriminant_matrix(p);
    let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|a| a.re));
    let mass = |u: &nalgebra::DVector<f64>| marked.iter().map(|m| u[*m] * u[*m]).sum::<f64>();
    match kind {
        SearchKind::Power => {
            let mut cur = v;
            let mut out = Vec::with_capacity(len);
            for t in 0..len {
                if t > 0 {
                    cur = &d * cur;
                }
                out.push(mass(&cur));
            }
            out
        }
        SearchKind::Exp => {
            let eig = d.symmetric_eigen();
            let coeffs = eig.eigenvectors.transpose() * &v;
            (0..len)
                .map(|t| {
                    if t == 0 {
                        return mass(&v);
                    }
                    let scaled = nalgebra::DVector::from_iterator(
                        coeffs.len(),
                        coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, l)| c * (t as f64 * (l - 1.0)).exp()),
                    );
                    mass(&(&eig.eigenvectors * scaled))
                })
                .collect()
        }
    }
}

/// Average over the s-grid and integer t ∈ {0, …, ⌊T⌋} of
/// ‖Π_M D(s)^t|√π_U⟩‖² (power) or ‖Π_M e^{t(D(s)−I)}|√π_U⟩‖² (exp), with
/// |√π_U⟩ normalized. Equals 1 when every node is marked.
pub fn exact_search_success(p: &MarkovChain, marked: &[usize], big_t: f64, kind: SearchKind) -> Result<f64> {
    let marked = check_marked(p.n(), marked)?;
    if !(big_t >= 0.0) || !big_t.is_finite() {
        return Err(Error::InvalidInput(format!("T = {big_t} must be finite and non-negative")));
    }
    let Some(psi) = normalized_unmarked(p.stationary(), &marked) else {
        return Ok(1.0);
    };
    let len = big_t.floor() as usize + 1;
    let grid = s_grid(big_t);
    let total: f64 = grid
        .iter()
        .map(|s| ideal_curve(&interpolated_matrix(p.matrix(), &marked, *s), &marked, &psi, len, kind).iter().sum::<f64>())
        .sum();
    Ok(total / (grid.len() * len) as f64)
}

/// One search run with the power kind (builds the setup each call).
pub fn spatial_search_1<R: Rng + ?Sized>(p: &MarkovChain, marked: &[usize], config: &SearchConfig, rng: &mut R) -> Result<SearchOutcome> {
    let config = SearchConfig { kind: SearchKind::Power, ..config.clone() };
    Ok(SearchSetup::new(p, marked, &config)?.run(rng))
}

/// One search run with the exp kind (builds the setup each call).
pub fn spatial_search_2<R: Rng + ?Sized>(p: &MarkovChain, marked: &[usize], config: &SearchConfig, rng: &mut R) -> Result<SearchOutcome> {
    let config = SearchConfig { kind: SearchKind::Exp, ..config.clone() };
    Ok(SearchSetup::new(p, marked, &config)?.run(rng))
}
