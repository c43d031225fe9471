//! Exponential-time ground truth: edge subsets, spin configurations,
//! half-edge configurations with their signs, and dimer covers.
//!
//! Subsets are bitmasks over unoriented edge indices; graphs beyond 64
//! edges or 128 vertices are refused outright.

use std::ops::Add;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{angle_between, CutSet, Graph};
use crate::linalg::{C64, I};

#[derive(Clone, Copy, Debug)]
pub struct EnumerationBudget {
    /// Largest number of free edges an enumeration may range over.
    pub max_edges: usize,
    pub max_subsets: u64,
    pub timeout: Duration,
}

impl EnumerationBudget {
    pub fn bulk() -> Self {
        EnumerationBudget { max_edges: 14, max_subsets: 1 << 24, timeout: Duration::from_secs(120) }
    }

    pub fn torus() -> Self {
        EnumerationBudget { max_edges: 18, ..Self::bulk() }
    }

    /// Budget suited to the graph's surface.
    pub fn for_graph(g: &Graph) -> Self {
        if g.is_planar() {
            Self::bulk()
        } else {
            Self::torus()
        }
    }

    pub fn check(&self, free_edges: usize, outer_factor: u64) -> Result<()> {
        if free_edges > self.max_edges || free_edges >= 64 {
            return Err(Error::Budget(format!("{free_edges} free edges, limit {}", self.max_edges)));
        }
        let total = (1u64 << free_edges).saturating_mul(outer_factor.max(1));
        if total > self.max_subsets {
            return Err(Error::Budget(format!("{total} subsets, limit {}", self.max_subsets)));
        }
        Ok(())
    }
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self::bulk()
    }
}

fn vertex_bits(g: &Graph) -> Result<Vec<u128>> {
    if g.n_vertices() > 128 || g.n_edges() > 64 {
        return Err(Error::Budget("graph too large for bitmask enumeration".into()));
    }
    Ok((0..g.n_edges())
        .map(|k| {
            let (u, v) = g.ends(k);
            (1u128 << u) ^ (1u128 << v)
        })
        .collect())
}

/// Bitmask of a vertex set.
pub fn vertex_mask(vs: &[usize]) -> u128 {
    vs.iter().fold(0, |m, &v| m ^ (1u128 << v))
}

/// Product of weights over the edges in `mask`.
pub fn mask_weight(g: &Graph, mask: u64) -> f64 {
    let mut w = 1.0;
    let mut m = mask;
    while m != 0 {
        let k = m.trailing_zeros() as usize;
        w *= g.weight(k);
        m &= m - 1;
    }
    w
}

const CHUNK_BITS: usize = 12;

/// Sums `f(S)` over subsets `S` of `free` whose odd-degree vertex set is
/// exactly `target`. Subsets are visited in Gray-code order in fixed chunks
/// that run in parallel and are reduced in chunk order.
pub fn sum_subsets<T, F>(g: &Graph, free: &[usize], target: u128, budget: &EnumerationBudget, f: F) -> Result<T>
where
    T: Send + Default + Add<Output = T>,
    F: Fn(u64) -> T + Sync,
{
    budget.check(free.len(), 1)?;
    let bits = vertex_bits(g)?;
    let n = free.len();
    let chunk_bits = n.min(CHUNK_BITS);
    let n_chunks = 1u64 << (n - chunk_bits);
    let start = Instant::now();
    let expired = AtomicBool::new(false);
    let parts: Vec<T> = (0..n_chunks)
        .into_par_iter()
        .map(|j| {
            if expired.load(Ordering::Relaxed) || start.elapsed() > budget.timeout {
                expired.store(true, Ordering::Relaxed);
                return T::default();
            }
            let i0 = j << chunk_bits;
            let gray = i0 ^ (i0 >> 1);
            let mut mask = 0u64;
            let mut odd = 0u128;
            for (b, &k) in free.iter().enumerate() {
                if gray >> b & 1 == 1 {
                    mask |= 1 << k;
                    odd ^= bits[k];
                }
            }
            let mut acc = T::default();
            if odd == target {
                acc = acc + f(mask);
            }
            for i in i0 + 1..i0 + (1u64 << chunk_bits) {
                let k = free[i.trailing_zeros() as usize];
                mask ^= 1 << k;
                odd ^= bits[k];
                if odd == target {
                    acc = acc + f(mask);
                }
            }
            acc
        })
        .collect();
    if expired.load(Ordering::Relaxed) {
        return Err(Error::Budget(format!("enumeration exceeded {:?}", budget.timeout)));
    }
    Ok(parts.into_iter().fold(T::default(), |a, b| a + b))
}

/// `Σ_{P even} f(P)`.
pub fn even_sum<T, F>(g: &Graph, budget: &EnumerationBudget, f: F) -> Result<T>
where
    T: Send + Default + Add<Output = T>,
    F: Fn(u64) -> T + Sync,
{
    let all: Vec<usize> = (0..g.n_edges()).collect();
    sum_subsets(g, &all, 0, budget, f)
}

/// High-temperature partition function `Σ_{P even} x(P)`.
pub fn ising_partition(g: &Graph, budget: &EnumerationBudget) -> Result<f64> {
    even_sum(g, budget, |m| mask_weight(g, m))
}

/// Crossing parity of an edge mask with a cut.
pub fn cut_parity(cut: &CutSet, mask: u64) -> bool {
    let mut m = mask;
    let mut p = false;
    while m != 0 {
        let k = m.trailing_zeros() as usize;
        p ^= cut.crosses(k);
        m &= m - 1;
    }
    p
}

fn sign(b: bool) -> f64 {
    if b {
        -1.0
    } else {
        1.0
    }
}

/// `Σ_{P even} (−1)^{κ·P} x(P)`.
pub fn twisted_even_sum(g: &Graph, cut: &CutSet, budget: &EnumerationBudget) -> Result<f64> {
    even_sum(g, budget, |m| sign(cut_parity(cut, m)) * mask_weight(g, m))
}

/// Torus homology class of an edge set: bit 0 is the parity of crossings
/// with the vertical seam, bit 1 with the horizontal seam.
pub fn homology_class(g: &Graph, mask: u64) -> usize {
    let mut m = mask;
    let mut h = 0;
    while m != 0 {
        let k = m.trailing_zeros() as usize;
        let s = g.seam_crossing(k);
        h ^= s[0] as usize | (s[1] as usize) << 1;
        m &= m - 1;
    }
    h
}

/// Even-subgraph weights split by homology class.
pub fn even_sum_by_homology(g: &Graph, budget: &EnumerationBudget) -> Result<[f64; 4]> {
    let mut bins = [0.0; 4];
    for (h, bin) in bins.iter_mut().enumerate() {
        *bin = even_sum(g, budget, |m| if homology_class(g, m) == h { mask_weight(g, m) } else { 0.0 })?;
    }
    Ok(bins)
}

/// Edges whose two sides are different faces, as (left face, right face).
fn dual_edges(g: &Graph) -> Vec<(usize, usize)> {
    (0..g.n_edges()).map(|k| (g.left_face(2 * k), g.left_face(2 * k + 1))).collect()
}

/// Dual-spin (low-temperature) enumeration: spins on faces, the outer face
/// and every face in `fixed` held at +1, each edge between unequal spins
/// contributing `x_e`. Returns `Σ_σ x(walls(σ))·f(σ)` where `σ[u] ∈ {±1}`.
pub fn dual_spin_sum<F>(g: &Graph, fixed: &[usize], budget: &EnumerationBudget, f: F) -> Result<f64>
where
    F: Fn(&[i8]) -> f64 + Sync,
{
    let outer = g.outer_face().ok_or(Error::NotPlanar)?;
    let nf = g.faces().len();
    let free: Vec<usize> = (0..nf).filter(|&u| u != outer && !fixed.contains(&u)).collect();
    if free.len() > 20 {
        return Err(Error::Budget(format!("{} free dual spins, limit 20", free.len())));
    }
    let duals = dual_edges(g);
    let total: f64 = (0..1u64 << free.len())
        .into_par_iter()
        .map(|s| {
            let mut sigma = vec![1i8; nf];
            for (b, &u) in free.iter().enumerate() {
                if s >> b & 1 == 1 {
                    sigma[u] = -1;
                }
            }
            let mut w = 1.0;
            for (k, &(a, b)) in duals.iter().enumerate() {
                if sigma[a] != sigma[b] {
                    w *= g.weight(k);
                }
            }
            w * f(&sigma)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();
    let _ = budget;
    Ok(total)
}

/// `E⁺[∏ σ_u]` over the given faces, by dual-spin enumeration.
pub fn spin_correlation(g: &Graph, faces: &[usize], budget: &EnumerationBudget) -> Result<f64> {
    let z = dual_spin_sum(g, &[], budget, |_| 1.0)?;
    let num = dual_spin_sum(g, &[], budget, |s| faces.iter().map(|&u| s[u] as f64).product())?;
    Ok(num / z)
}

/// `Z_β = Σ_σ exp(β Σ_e J_e σ_u σ_v)` over vertex spins.
pub fn vertex_spin_partition(g: &Graph, beta: f64, coupling: &[f64]) -> Result<f64> {
    let nv = g.n_vertices();
    if nv > 20 {
        return Err(Error::Budget(format!("{nv} vertex spins, limit 20")));
    }
    let ends: Vec<(usize, usize)> = (0..g.n_edges()).map(|k| g.ends(k)).collect();
    Ok((0..1u64 << nv)
        .into_par_iter()
        .map(|s| {
            let e: f64 = ends
                .iter()
                .zip(coupling)
                .map(|(&(u, v), &j)| if (s >> u & 1) == (s >> v & 1) { j } else { -j })
                .sum();
            (beta * e).exp()
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum())
}

/// An endpoint of a path in a half-edge configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Label {
    /// Midpoint `z_e` of an oriented edge `e` whose half `(o(e), z_e)` is absent.
    Edge(usize),
    /// Decoration of a corner, attached to its vertex.
    Corner(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Port {
    Half(usize),
    Deco(usize),
}

fn port_dir(g: &Graph, p: Port) -> C64 {
    match p {
        Port::Half(h) => g.dir(h),
        Port::Deco(c) => -g.corners()[c].deco,
    }
}

fn label_eta(g: &Graph, l: Label) -> C64 {
    match l {
        Label::Edge(e) => g.eta(e),
        Label::Corner(c) => g.corners()[c].eta,
    }
}

fn permutation_sign(p: &[usize]) -> f64 {
    let mut seen = vec![false; p.len()];
    let mut s = 1.0;
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut j = i;
        let mut len = 0;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            s = -s;
        }
    }
    s
}

/// The sign `τ` of a configuration given by its present half-edges
/// (`halves[h]` for the half `(o(h), z_h)`) and the path endpoints
/// `labels`. Crossings are smoothed by pairing the half-edges at each
/// vertex in angular order starting at position `offset`; any offset gives
/// the same value on valid configurations.
pub fn tau_sign(g: &Graph, labels: &[Label], halves: &[bool], offset: usize) -> Result<C64> {
    let n = g.n_oriented();
    if halves.len() != n {
        return Err(Error::Invalid("half-edge vector has the wrong length".into()));
    }
    let mut decos: Vec<Vec<usize>> = vec![Vec::new(); g.n_vertices()];
    for &l in labels {
        match l {
            Label::Edge(e) if e >= n => return Err(Error::UnknownLabel(e)),
            Label::Corner(c) if c >= g.n_corners() => return Err(Error::UnknownLabel(c)),
            Label::Corner(c) => decos[g.corners()[c].vertex].push(c),
            Label::Edge(_) => {}
        }
    }
    // partner[port] at each vertex after smoothing
    let mut half_partner = vec![None; n];
    let mut deco_partner = vec![None; g.n_corners()];
    for v in 0..g.n_vertices() {
        let mut ports: Vec<Port> = g.out_edges(v).iter().filter(|&&h| halves[h]).map(|&h| Port::Half(h)).collect();
        ports.extend(decos[v].iter().map(|&c| Port::Deco(c)));
        if ports.len() % 2 == 1 {
            return Err(Error::Invalid(format!("odd degree at vertex {v}")));
        }
        let ang = |p: &Port| {
            let d = port_dir(g, *p);
            d.im.atan2(d.re)
        };
        ports.sort_by(|a, b| ang(a).partial_cmp(&ang(b)).unwrap());
        let m = ports.len();
        for j in 0..m / 2 {
            let (a, b) = (ports[(offset + 2 * j) % m], ports[(offset + 2 * j + 1) % m]);
            for (p, q) in [(a, b), (b, a)] {
                match p {
                    Port::Half(h) => half_partner[h] = Some(q),
                    Port::Deco(c) => deco_partner[c] = Some(q),
                }
            }
        }
    }
    let index_of = |l: Label| labels.iter().position(|&m| m == l);
    let mut used = vec![false; labels.len()];
    let mut order = Vec::with_capacity(labels.len());
    let mut value = C64::new(1.0, 0.0);
    for (i, &start) in labels.iter().enumerate() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let (mut port, mut vel) = match start {
            Label::Edge(e) => {
                if halves[e] {
                    return Err(Error::Invalid(format!("half of label edge {e} is present")));
                }
                if let Some(j) = index_of(Label::Edge(e ^ 1)) {
                    if used[j] {
                        return Err(Error::Invalid("label pairing inconsistent".into()));
                    }
                    used[j] = true;
                    order.extend([i, j]);
                    value *= I * label_eta(g, start).conj() * g.eta(e ^ 1);
                    continue;
                }
                if !halves[e ^ 1] {
                    return Err(Error::Invalid(format!("label edge {e} has no half at its terminus")));
                }
                (Port::Half(e ^ 1), g.dir(e))
            }
            Label::Corner(c) => (Port::Deco(c), g.corners()[c].deco),
        };
        let mut wind = 0.0;
        let end = loop {
            let out = match port {
                Port::Half(h) => half_partner[h],
                Port::Deco(c) => deco_partner[c],
            }
            .ok_or_else(|| Error::Invalid("unpaired half-edge".into()))?;
            let u = port_dir(g, out);
            wind += angle_between(vel, u);
            vel = u;
            match out {
                Port::Deco(c) => break Label::Corner(c),
                Port::Half(h) => {
                    if halves[h ^ 1] {
                        port = Port::Half(h ^ 1);
                    } else {
                        break Label::Edge(h ^ 1);
                    }
                }
            }
        };
        let j = index_of(end).ok_or_else(|| Error::Invalid(format!("path ends at unlisted {end:?}")))?;
        if used[j] {
            return Err(Error::Invalid(format!("two paths end at {end:?}")));
        }
        used[j] = true;
        order.extend([i, j]);
        value *= I * label_eta(g, start).conj() * label_eta(g, end) * C64::from_polar(1.0, -wind / 2.0);
    }
    Ok(value * permutation_sign(&order))
}

/// Degree constraints of the class `𝒞(e₁..e₂ₙ)`: the free edges, the
/// forced halves `ē` and the vertex parity they impose.
#[derive(Clone, Debug)]
pub struct EdgeClass {
    pub labels: Vec<usize>,
    pub free: Vec<usize>,
    pub forced: Vec<usize>,
    pub target: u128,
}

impl EdgeClass {
    pub fn new(g: &Graph, labels: &[usize]) -> Result<EdgeClass> {
        for (a, &e) in labels.iter().enumerate() {
            if e >= g.n_oriented() {
                return Err(Error::UnknownLabel(e));
            }
            if labels[..a].contains(&e) {
                return Err(Error::RepeatedLabel(e));
            }
        }
        let touched: Vec<bool> = (0..g.n_edges()).map(|k| labels.contains(&(2 * k)) || labels.contains(&(2 * k + 1))).collect();
        let free = (0..g.n_edges()).filter(|&k| !touched[k]).collect();
        let forced: Vec<usize> = labels.iter().filter(|&&e| !labels.contains(&(e ^ 1))).map(|&e| e ^ 1).collect();
        let target = forced.iter().fold(0u128, |m, &h| m ^ (1u128 << g.origin(h)));
        Ok(EdgeClass { labels: labels.to_vec(), free, forced, target })
    }

    /// Present halves for the free-edge subset `mask`.
    pub fn halves(&self, g: &Graph, mask: u64) -> Vec<bool> {
        let mut h = vec![false; g.n_oriented()];
        for k in 0..g.n_edges() {
            if mask >> k & 1 == 1 {
                h[2 * k] = true;
                h[2 * k + 1] = true;
            }
        }
        for &f in &self.forced {
            h[f] = true;
        }
        h
    }

    /// `x(P)` with `x_e^{1/2}` per forced half.
    pub fn weight(&self, g: &Graph, mask: u64) -> f64 {
        self.forced.iter().fold(mask_weight(g, mask), |w, &h| w * g.x(h).sqrt())
    }

    /// Parity of crossings with `cut`. The cut meets an edge at its midpoint,
    /// so every edge touched by a label counts once, as does every free edge
    /// in `mask`.
    pub fn cut_parity(&self, cut: &CutSet, mask: u64) -> bool {
        let touched = (0..self.labels.len())
            .filter(|&a| {
                let e = self.labels[a];
                !self.labels[..a].contains(&(e ^ 1))
            })
            .fold(false, |p, a| p ^ cut.crosses(self.labels[a] / 2));
        cut_parity(cut, mask) ^ touched
    }
}

/// `Σ_{P∈𝒞(E)} τ(P)·(−1)^{κ·P}·x(P)`, unnormalized.
pub fn fermion_sum(g: &Graph, labels: &[usize], cut: Option<&CutSet>, budget: &EnumerationBudget) -> Result<C64> {
    let class = EdgeClass::new(g, labels)?;
    let tl: Vec<Label> = labels.iter().map(|&e| Label::Edge(e)).collect();
    let failed = AtomicBool::new(false);
    let total = sum_subsets(g, &class.free, class.target, budget, |mask| {
        let halves = class.halves(g, mask);
        let tau = tau_sign(g, &tl, &halves, 0).unwrap_or_else(|_| {
            failed.store(true, Ordering::Relaxed);
            C64::new(0.0, 0.0)
        });
        let s = cut.map_or(1.0, |c| sign(class.cut_parity(c, mask)));
        tau * s * class.weight(g, mask)
    })?;
    if failed.load(Ordering::Relaxed) {
        return Err(Error::Invalid("configuration could not be traced".into()));
    }
    Ok(total)
}

/// `Σ_{P∈𝒞(E)} x(P)` with plain weights.
pub fn class_weight_sum(g: &Graph, labels: &[usize], budget: &EnumerationBudget) -> Result<f64> {
    let class = EdgeClass::new(g, labels)?;
    sum_subsets(g, &class.free, class.target, budget, |mask| class.weight(g, mask))
}

/// `Σ_{P∈𝒞(E)} (−1)^{κ·P} x(P)`.
pub fn signed_class_sum(g: &Graph, labels: &[usize], cut: Option<&CutSet>, budget: &EnumerationBudget) -> Result<f64> {
    let class = EdgeClass::new(g, labels)?;
    sum_subsets(g, &class.free, class.target, budget, |mask| {
        cut.map_or(1.0, |c| sign(class.cut_parity(c, mask))) * class.weight(g, mask)
    })
}

fn subsets_of(items: &[usize]) -> Vec<Vec<usize>> {
    (0..1usize << items.len()).map(|s| (0..items.len()).filter(|&i| s >> i & 1 == 1).map(|i| items[i]).collect()).collect()
}

fn x_of(g: &Graph, es: &[usize]) -> f64 {
    es.iter().map(|&e| g.x(e)).product()
}

/// `Σ_{E ⊂ inward boundary} x(E)·[Σ_{P∈𝒞(E)} (−1)^{κ·P} x(P)]²`.
pub fn double_partition_sum(g: &Graph, cut: Option<&CutSet>, budget: &EnumerationBudget) -> Result<f64> {
    let bd = g.inward_boundary_edges();
    if bd.len() > 16 {
        return Err(Error::Budget(format!("{} boundary edges, limit 16", bd.len())));
    }
    let mut total = 0.0;
    for es in subsets_of(&bd) {
        total += x_of(g, &es) * signed_class_sum(g, &es, cut, budget)?.powi(2);
    }
    Ok(total)
}

/// Dobrushin partition function `2√(x_a x_b)·Σ_{E ⊂ ∂∖{a,b}} x(E)·[Σ𝒞(E)·Σ𝒞({a,b}∪E)
/// + Σ𝒞({a}∪E)·Σ𝒞({b}∪E)]` for inward boundary edges `a ≠ b`.
pub fn dobrushin_sum(g: &Graph, a: usize, b: usize, budget: &EnumerationBudget) -> Result<f64> {
    let rest: Vec<usize> = g.inward_boundary_edges().into_iter().filter(|&e| e != a && e != b).collect();
    if rest.len() > 16 {
        return Err(Error::Budget(format!("{} boundary edges, limit 16", rest.len())));
    }
    let mut total = 0.0;
    for es in subsets_of(&rest) {
        let s = |extra: &[usize]| {
            let mut v = extra.to_vec();
            v.extend_from_slice(&es);
            class_weight_sum(g, &v, budget)
        };
        total += x_of(g, &es) * (s(&[])? * s(&[a, b])? + s(&[a])? * s(&[b])?);
    }
    Ok(2.0 * (g.x(a) * g.x(b)).sqrt() * total)
}

/// `Σ_P (−1)^{κ·P} x(P)` over subgraphs odd exactly at `vertices`.
pub fn disorder_sum(g: &Graph, vertices: &[usize], cut: Option<&CutSet>, budget: &EnumerationBudget) -> Result<f64> {
    let all: Vec<usize> = (0..g.n_edges()).collect();
    let target = vertex_mask(vertices);
    if target.count_ones() as usize != vertices.len() {
        return Err(Error::Invalid("repeated disorder vertex".into()));
    }
    sum_subsets(g, &all, target, budget, |m| cut.map_or(1.0, |c| sign(cut_parity(c, m))) * mask_weight(g, m))
}

/// `Σ_{Q∈𝒞(c₁..c₂ₙ)} τ(Q)·(−1)^{κ'·P_Q}·x(P_Q)` for corners at distinct vertices.
pub fn corner_sum(g: &Graph, corners: &[usize], cut: Option<&CutSet>, budget: &EnumerationBudget) -> Result<C64> {
    let vs: Vec<usize> = corners.iter().map(|&c| g.corners()[c].vertex).collect();
    let target = vertex_mask(&vs);
    if target.count_ones() as usize != vs.len() {
        return Err(Error::Invalid("corners must sit at distinct vertices".into()));
    }
    let labels: Vec<Label> = corners.iter().map(|&c| Label::Corner(c)).collect();
    let all: Vec<usize> = (0..g.n_edges()).collect();
    let failed = AtomicBool::new(false);
    let total = sum_subsets(g, &all, target, budget, |mask| {
        let halves: Vec<bool> = (0..g.n_oriented()).map(|h| mask >> (h / 2) & 1 == 1).collect();
        let tau = tau_sign(g, &labels, &halves, 0).unwrap_or_else(|_| {
            failed.store(true, Ordering::Relaxed);
            C64::new(0.0, 0.0)
        });
        tau * cut.map_or(1.0, |c| sign(cut_parity(c, mask))) * mask_weight(g, mask)
    })?;
    if failed.load(Ordering::Relaxed) {
        return Err(Error::Invalid("configuration could not be traced".into()));
    }
    Ok(total)
}

/// Number of interleaved chord pairs among chords joining points on a
/// circle, each point given by its cyclic position.
pub fn chord_crossings(chords: &[(usize, usize)]) -> usize {
    let inside = |p: usize, (a, b): (usize, usize)| {
        let (lo, hi) = (a.min(b), a.max(b));
        p > lo && p < hi
    };
    let mut t = 0;
    for i in 0..chords.len() {
        for j in i + 1..chords.len() {
            let (c, d) = chords[j];
            if inside(c, chords[i]) != inside(d, chords[i]) {
                t += 1;
            }
        }
    }
    t
}

fn for_each_matching(adj: &[Vec<(usize, f64)>], matched: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    let n = adj.len();
    match (0..n).find(|&v| matched[v] == usize::MAX) {
        None => visit(matched),
        Some(v) => {
            for &(w, _) in &adj[v] {
                if matched[w] == usize::MAX && w != v {
                    matched[v] = w;
                    matched[w] = v;
                    for_each_matching(adj, matched, visit);
                    matched[v] = usize::MAX;
                    matched[w] = usize::MAX;
                }
            }
        }
    }
}

/// `Σ_D (−1)^{t(D)}` over perfect matchings of the complete graph on `2n`
/// points in convex position, `t` counting crossing chords.
pub fn clique_sign_sum(n: usize) -> i64 {
    let m = 2 * n;
    let adj: Vec<Vec<(usize, f64)>> = (0..m).map(|a| (0..m).filter(|&b| b != a).map(|b| (b, 1.0)).collect()).collect();
    let mut total = 0i64;
    let mut matched = vec![usize::MAX; m];
    for_each_matching(&adj, &mut matched, &mut |mt| {
        let chords: Vec<(usize, usize)> = (0..m).filter(|&a| mt[a] > a).map(|a| (a, mt[a])).collect();
        total += if chord_crossings(&chords) % 2 == 0 { 1 } else { -1 };
    });
    total
}

/// Signed dimer sum on the terminal graph: `Σ_D (−1)^{t(D)}(−1)^{κ·D} x^K(D)`
/// over perfect matchings of `G^K` with the terminals in `removed` deleted.
/// Long edges carry weight 1 and the crossing of their edge; short edges
/// `(e, e')` carry `(x_e x_e')^{1/2}`; `t` counts crossing short dimers
/// drawn as chords inside each vertex disk.
pub fn signed_dimer_sum(g: &Graph, cut: Option<&CutSet>, removed: &[usize], budget: &EnumerationBudget) -> Result<f64> {
    let n = g.n_oriented();
    if g.n_edges() > budget.max_edges {
        return Err(Error::Budget(format!("{} edges, limit {}", g.n_edges(), budget.max_edges)));
    }
    let gone: Vec<bool> = (0..n).map(|e| removed.contains(&e)).collect();
    // compact indexing of surviving terminals
    let alive: Vec<usize> = (0..n).filter(|&e| !gone[e]).collect();
    let mut idx = vec![usize::MAX; n];
    for (i, &e) in alive.iter().enumerate() {
        idx[e] = i;
    }
    let mut adj = vec![Vec::new(); alive.len()];
    for &e in &alive {
        if !gone[e ^ 1] {
            adj[idx[e]].push((idx[e ^ 1], 1.0));
        }
        for &f in g.out_edges(g.origin(e)) {
            if f != e && !gone[f] {
                adj[idx[e]].push((idx[f], (g.x(e) * g.x(f)).sqrt()));
            }
        }
    }
    let mut total = 0.0;
    let mut matched = vec![usize::MAX; alive.len()];
    for_each_matching(&adj, &mut matched, &mut |mt| {
        let mut w = 1.0;
        let mut s = false;
        let mut chords: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.n_vertices()];
        for (i, &e) in alive.iter().enumerate() {
            let f = alive[mt[i]];
            if f < e {
                continue;
            }
            if f == e ^ 1 {
                s ^= cut.is_some_and(|c| c.crosses(e / 2));
            } else {
                w *= (g.x(e) * g.x(f)).sqrt();
                chords[g.origin(e)].push((g.rotation_index(e), g.rotation_index(f)));
            }
        }
        let t: usize = chords.iter().map(|c| chord_crossings(c)).sum();
        total += sign(s ^ (t % 2 == 1)) * w;
    });
    Ok(total)
}

/// Unsigned weighted sum over perfect matchings of `g`.
pub fn dimer_sum(g: &Graph) -> Result<f64> {
    if g.n_vertices() > 200 {
        return Err(Error::Budget(format!("{} vertices, limit 200", g.n_vertices())));
    }
    let mut adj = vec![Vec::new(); g.n_vertices()];
    for k in 0..g.n_edges() {
        let (u, v) = g.ends(k);
        adj[u].push((v, g.weight(k)));
        adj[v].push((u, g.weight(k)));
    }
    let w_of = |u: usize, v: usize| adj[u].iter().find(|&&(b, _)| b == v).map_or(0.0, |&(_, w)| w);
    let mut total = 0.0;
    let mut matched = vec![usize::MAX; g.n_vertices()];
    for_each_matching(&adj, &mut matched, &mut |mt| {
        total += (0..mt.len()).filter(|&u| mt[u] > u).map(|u| w_of(u, mt[u])).product::<f64>();
    });
    Ok(total)
}

/// Number of proper crossings between non-adjacent sides of a closed polygon.
pub fn polygon_self_intersections(poly: &[[f64; 2]]) -> usize {
    let n = poly.len();
    let seg = |i: usize| (poly[i], poly[(i + 1) % n]);
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut t = 0;
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            let (d1, d2) = (cross(a, b, c), cross(a, b, d));
            let (d3, d4) = (cross(c, d, a), cross(c, d, b));
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                t += 1;
            }
        }
    }
    t
}

/// Whitney phase `−exp(i·wind/2)` of a closed polygon; equals
/// `(−1)^{t}` for curves in general position.
pub fn whitney_phase(poly: &[[f64; 2]]) -> C64 {
    -C64::from_polar(1.0, crate::graph::polygon_winding(poly) / 2.0)
}
