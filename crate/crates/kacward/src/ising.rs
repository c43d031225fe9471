//! Single-Ising quantities as Pfaffians of K̂ and its relatives: partition
//! function, spin, energy, fermionic, disorder and corner correlations,
//! and the complex-valued observables with their local relations.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{CutKind, CutSet, Graph};
use crate::kacward::{
    build_corner_bundle, build_kacward, build_propagation, build_twisted, kacward_determinant, KacWard,
};
use crate::linalg::{pfaffian, pfaffian_minor, CMatrix, SkewMatrix, C64, I};

/// Conversion between couplings and edge weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WeightMode {
    /// Spins on vertices: `x = tanh(βJ)`.
    High,
    /// Spins on faces: `x = exp(−2βJ)`.
    Low,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsingWeights {
    pub x: Vec<f64>,
}

impl IsingWeights {
    pub fn from_couplings(beta: f64, coupling: &[f64], mode: WeightMode) -> Self {
        let x = coupling
            .iter()
            .map(|&j| match mode {
                WeightMode::High => (beta * j).tanh(),
                WeightMode::Low => (-2.0 * beta * j).exp(),
            })
            .collect();
        IsingWeights { x }
    }

    pub fn to_couplings(&self, beta: f64, mode: WeightMode) -> Vec<f64> {
        self.x
            .iter()
            .map(|&x| match mode {
                WeightMode::High => x.atanh() / beta,
                WeightMode::Low => -x.ln() / (2.0 * beta),
            })
            .collect()
    }

    /// Spin-model partition function from the polynomial value `z` at these
    /// weights: `2^{|V|}∏cosh(βJ)·z` for vertex spins, `2∏exp(βJ)·z` for
    /// face spins.
    pub fn spin_partition(&self, g: &Graph, beta: f64, coupling: &[f64], mode: WeightMode, z: f64) -> f64 {
        match mode {
            WeightMode::High => {
                2f64.powi(g.n_vertices() as i32) * coupling.iter().map(|&j| (beta * j).cosh()).product::<f64>() * z
            }
            WeightMode::Low => 2.0 * coupling.iter().map(|&j| (beta * j).exp()).product::<f64>() * z,
        }
    }
}

/// Kramers-Wannier dual coupling: `β*J*` with `tanh(β*J*) = exp(−2βJ)`.
pub fn dual_coupling(beta_j: f64) -> f64 {
    (-2.0 * beta_j).exp().atanh()
}

/// `sinh(2βJ)·sinh(2β*J*) − 1`.
pub fn self_dual_residual(beta_j: f64, dual_beta_j: f64) -> f64 {
    (2.0 * beta_j).sinh() * (2.0 * dual_beta_j).sinh() - 1.0
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    /// `Z = |Pf K̂|`, or `sqrt|det KW|` for weights of mixed sign.
    pub z: f64,
    pub pfaffian: Option<f64>,
    /// `ε(D₀) = Pf K̂` at `x = 0`.
    pub reference_sign: Option<f64>,
    /// Whether the sign of `Z` was fixed independently of `|·|`.
    pub sign_determined: bool,
}

pub fn partition_report(g: &Graph) -> Result<PartitionReport> {
    if g.weights().iter().any(|&x| x < 0.0) {
        let d = kacward_determinant(g);
        return Ok(PartitionReport { z: d.norm().sqrt(), pfaffian: None, reference_sign: None, sign_determined: false });
    }
    let kw = build_kacward(g)?;
    let pf = kw.pfaffian();
    Ok(PartitionReport { z: pf.abs(), pfaffian: Some(pf), reference_sign: Some(kw.reference_sign()), sign_determined: true })
}

/// `Z_Ising = |Pf K̂|` for positive weights.
pub fn partition_function(g: &Graph) -> Result<f64> {
    let kw = build_kacward(g)?;
    let pf = kw.pfaffian();
    if pf == 0.0 || !pf.is_finite() {
        return Err(Error::Singular { pivot: pf, scale: 1.0 });
    }
    Ok(pf.abs())
}

fn check_faces(g: &Graph, faces: &[usize]) -> Result<()> {
    for (a, &u) in faces.iter().enumerate() {
        if u >= g.faces().len() {
            return Err(Error::UnknownLabel(u));
        }
        if Some(u) == g.outer_face() {
            return Err(Error::OuterFace(u));
        }
        if faces[..a].contains(&u) {
            return Err(Error::RepeatedLabel(u));
        }
    }
    Ok(())
}

/// `E⁺[σ_{u₁}…σ_{u_m}] = (−1)^{|κ|}·Pf K̂_κ / Pf K̂` for an explicit cut.
pub fn spin_correlation_with_cut(g: &Graph, cut: &CutSet) -> Result<f64> {
    let kw = build_kacward(g)?;
    let tw = build_twisted(g, cut)?;
    let s = if cut.size() % 2 == 1 { -1.0 } else { 1.0 };
    Ok(s * tw.pfaffian() / kw.pfaffian())
}

/// `E⁺[σ_{u₁}…σ_{u_m}]` conditional on `σ_{u_out} = +1`.
pub fn spin_correlation(g: &Graph, faces: &[usize]) -> Result<f64> {
    check_faces(g, faces)?;
    if faces.is_empty() {
        return Ok(1.0);
    }
    let cut = g.find_cut_set(faces, CutKind::Dual)?;
    spin_correlation_with_cut(g, &cut)
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyCorrelation {
    /// `E⁺[ε_{e₁}…ε_{e_n}]`, with `ε_e = +1` when `e` is not a domain wall.
    pub product: f64,
    /// `E⁺[∏ ½(ε_{e_k}+1)]`, the probability that no `e_k` is a wall.
    pub indicator: f64,
    /// Gap between `product` and its inclusion-exclusion expansion in
    /// indicator probabilities of all subsets.
    pub inclusion_exclusion_residual: f64,
}

fn j_hat(kw: &KacWard, edges: &[usize]) -> SkewMatrix {
    let mut j = SkewMatrix::zeros(kw.dim());
    for &k in edges {
        let v = I * kw.eta[2 * k] * kw.eta[2 * k + 1].conj();
        j.set(2 * k, 2 * k + 1, v.re);
    }
    j
}

/// `(−1)^n Pf(K̂ − 2Ĵ_E)/Pf K̂`.
fn energy_product(kw: &KacWard, edges: &[usize]) -> f64 {
    let mut m = kw.khat.clone();
    let j = j_hat(kw, edges);
    for &k in edges {
        let (a, b) = (2 * k, 2 * k + 1);
        m.set(a, b, m.get(a, b) - 2.0 * j.get(a, b));
    }
    let s = if edges.len() % 2 == 1 { -1.0 } else { 1.0 };
    s * pfaffian(&m) / kw.pfaffian()
}

/// `Pf[K̂⁻¹]_{(e₁,ē₁,…)} / ∏ i·η̄_{e_k}·η_{ē_k}`.
fn energy_indicator(kw: &KacWard, kinv: &SkewMatrix, edges: &[usize]) -> Result<f64> {
    let idx: Vec<usize> = edges.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
    let mut norm = 1.0;
    for &k in edges {
        norm *= (I * kw.eta[2 * k].conj() * kw.eta[2 * k + 1]).re;
    }
    Ok(pfaffian_minor(kinv, &idx)? / norm)
}

/// Energy correlations of distinct unoriented edges by both Pfaffian
/// formulas, cross-checked by inclusion-exclusion.
pub fn energy_correlation(g: &Graph, edges: &[usize]) -> Result<EnergyCorrelation> {
    for (a, &k) in edges.iter().enumerate() {
        if k >= g.n_edges() {
            return Err(Error::UnknownLabel(k));
        }
        if edges[..a].contains(&k) {
            return Err(Error::RepeatedLabel(k));
        }
    }
    let kw = build_kacward(g)?;
    let kinv = kw.khat_inverse()?;
    let product = energy_product(&kw, edges);
    let indicator = energy_indicator(&kw, &kinv, edges)?;
    // ∏(2h_k − 1) = Σ_S 2^{|S|}(−1)^{n−|S|} ∏_{k∈S} h_k
    let n = edges.len();
    let mut expanded = 0.0;
    for s in 0..1usize << n {
        let sub: Vec<usize> = (0..n).filter(|&b| s >> b & 1 == 1).map(|b| edges[b]).collect();
        let h = energy_indicator(&kw, &kinv, &sub)?;
        let sign = if (n - sub.len()) % 2 == 1 { -1.0 } else { 1.0 };
        expanded += sign * 2f64.powi(sub.len() as i32) * h;
    }
    Ok(EnergyCorrelation { product, indicator, inclusion_exclusion_residual: (expanded - product).abs() })
}

fn check_oriented(g: &Graph, labels: &[usize]) -> Result<()> {
    for (a, &e) in labels.iter().enumerate() {
        if e >= g.n_oriented() {
            return Err(Error::UnknownLabel(e));
        }
        if labels[..a].contains(&e) {
            return Err(Error::RepeatedLabel(e));
        }
    }
    Ok(())
}

/// `Pf[K̂⁻¹]_E`, or `Pf[(K̂_κ)⁻¹]_E` when a cut is given.
pub fn fermion_pfaffian(g: &Graph, labels: &[usize], cut: Option<&CutSet>) -> Result<f64> {
    check_oriented(g, labels)?;
    let kw = match cut {
        Some(c) => build_twisted(g, c)?,
        None => build_kacward(g)?,
    };
    pfaffian_minor(&kw.khat_inverse()?, labels)
}

/// Product of `x_e` over a primal cut, and the weights with `x_e → 1/x_e` on it.
fn reweighted(g: &Graph, cut: &CutSet) -> Result<(f64, Graph)> {
    let mut factor = 1.0;
    let mut w = g.weights().to_vec();
    for (k, wk) in w.iter_mut().enumerate() {
        if cut.crosses(k) {
            factor *= *wk;
            *wk = 1.0 / *wk;
        }
    }
    Ok((factor, g.with_weights(w)?))
}

/// Signed even-subgraph sum `Σ_P (−1)^{κ·P} x(P)` from the Pfaffian.
fn signed_sum(g: &Graph, dual: Option<&CutSet>) -> Result<f64> {
    let kw = match dual {
        Some(c) if c.size() > 0 => build_twisted(g, c)?,
        _ => build_kacward(g)?,
    };
    Ok(kw.signed_sum())
}

/// `⟨μ_{v₁}…μ_{v₂ₙ} σ_{u₁}…σ_{u_m}⟩ = E⁺[∏_{e∈κ} x_e^{ε_e} ∏ σ_u]` with explicit
/// cuts: `primal` linking the vertices and `dual` linking the faces.
pub fn disorder_correlation_with_cuts(g: &Graph, primal: &CutSet, dual: Option<&CutSet>) -> Result<f64> {
    let (factor, gw) = reweighted(g, primal)?;
    let z = signed_sum(g, None)?;
    Ok(factor * signed_sum(&gw, dual)? / z)
}

/// `⟨μ_{v₁}…μ_{v₂ₙ}⟩`, positive and independent of the cut.
pub fn disorder_correlation(g: &Graph, vertices: &[usize]) -> Result<f64> {
    if vertices.is_empty() {
        return Ok(1.0);
    }
    let cut = g.find_cut_set(vertices, CutKind::Primal)?;
    disorder_correlation_with_cuts(g, &cut, None)
}

/// Cuts for a mixed disorder-spin correlation: a primal cut linking the
/// vertices and, when some face remains, a dual cut linking the faces.
/// Faces listed twice cancel and the outer face is dropped.
pub fn mixed_cuts(g: &Graph, vertices: &[usize], faces: &[usize]) -> Result<(CutSet, Option<CutSet>)> {
    let mut odd: Vec<usize> = Vec::new();
    for &u in faces {
        if u >= g.faces().len() {
            return Err(Error::UnknownLabel(u));
        }
        if Some(u) == g.outer_face() {
            continue;
        }
        if let Some(p) = odd.iter().position(|&w| w == u) {
            odd.remove(p);
        } else {
            odd.push(u);
        }
    }
    let primal = g.find_cut_set(vertices, CutKind::Primal)?;
    let dual = if odd.is_empty() { None } else { Some(g.find_cut_set(&odd, CutKind::Dual)?) };
    Ok((primal, dual))
}

/// Mixed disorder-spin correlation. Its sign depends on the cuts chosen.
pub fn disorder_spin_correlation(g: &Graph, vertices: &[usize], faces: &[usize]) -> Result<f64> {
    let (primal, dual) = mixed_cuts(g, vertices, faces)?;
    disorder_correlation_with_cuts(g, &primal, dual.as_ref())
}

/// `Ĉ_κ = B̂ K̂_κ B̂ᵀ` for the given (possibly empty) dual cut.
fn corner_hat(g: &Graph, cut: Option<&CutSet>) -> Result<SkewMatrix> {
    let kw = match cut {
        Some(c) => build_twisted(g, c)?,
        None => build_kacward(g)?,
    };
    Ok(build_corner_bundle(g, &kw)?.chat)
}

/// `⟨χ_{c₁}…χ_{c₂ₙ}⟩ = Pf[4Ĉ⁻¹]` on corners at pairwise distinct vertices.
pub fn chi_correlator(g: &Graph, corners: &[usize], cut: Option<&CutSet>) -> Result<f64> {
    for (a, &c) in corners.iter().enumerate() {
        if c >= g.n_corners() {
            return Err(Error::UnknownLabel(c));
        }
        let v = g.corners()[c].vertex;
        if corners[..a].iter().any(|&d| g.corners()[d].vertex == v) {
            return Err(Error::Invalid(format!("corners {corners:?} share a vertex")));
        }
    }
    let cinv = corner_hat(g, cut)?.inverse()?;
    Ok(pfaffian_minor(&cinv, corners)? * 4f64.powi(corners.len() as i32 / 2))
}

/// Edge weight parameter `t_e = (x_e + 1/x_e)^{1/2}`.
pub fn t_factor(x: f64) -> f64 {
    (x + 1.0 / x).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Source {
    Edge(usize),
    Corner(usize),
}

/// Complex values of a fermionic observable on midedges and corners.
#[derive(Clone, Debug, Serialize)]
pub struct Observable {
    pub source: Source,
    /// Per oriented edge `e`: the value at `z_e` on the sheet of `o(e)`.
    pub midedge: Vec<C64>,
    pub corner: Vec<C64>,
    /// Per unoriented edge: whether the cut separates the sheets at `z_e`.
    pub twist: Vec<bool>,
}

pub fn b_hat_inverse_transpose(bhat: &CMatrix) -> Result<CMatrix> {
    bhat.transpose().inverse()
}

/// `F_a` for an oriented edge source or `F_c` for a corner source, built
/// from `K̂⁻¹` (or `K̂_κ⁻¹`, giving the spinor version on one section).
pub fn observable(g: &Graph, source: Source, cut: Option<&CutSet>) -> Result<Observable> {
    let kw = match cut {
        Some(c) => build_twisted(g, c)?,
        None => build_kacward(g)?,
    };
    let n = g.n_oriented();
    let kinv = kw.khat_inverse()?;
    let cb = build_corner_bundle(g, &kw)?;
    let bti = b_hat_inverse_transpose(&cb.bhat)?;
    // col[e] = ⟨φ_e · source⟩
    let col: Vec<C64> = match source {
        Source::Edge(a) => {
            if a >= n {
                return Err(Error::UnknownLabel(a));
            }
            (0..n).map(|e| C64::new(kinv.get(e, a), 0.0)).collect()
        }
        Source::Corner(c0) => {
            if c0 >= g.n_corners() {
                return Err(Error::UnknownLabel(c0));
            }
            // ⟨φ_e χ_c⟩ = 2(K̂⁻¹B̂⁻¹)_{e,c}, and B̂⁻¹ = (B̂ᵀ)⁻¹ᵀ
            (0..n).map(|e| (0..n).map(|f| 2.0 * kinv.get(e, f) * bti[(c0, f)]).sum()).collect()
        }
    };
    observable_from_column(g, source, &col, &cb.eta_c, &bti, kw.twist)
}

/// Midedge and corner values from the column `col[e] = ⟨φ_e · source⟩` of a
/// hatted inverse, with `bti = (B̂ᵀ)⁻¹`.
pub fn observable_from_column(
    g: &Graph,
    source: Source,
    col: &[C64],
    eta_c: &[C64],
    bti: &CMatrix,
    twist: Vec<bool>,
) -> Result<Observable> {
    let n = g.n_oriented();
    let w = C64::from_polar(1.0, PI / 4.0);
    let midedge = (0..n)
        .map(|e| {
            let s = if twist[e / 2] { -1.0 } else { 1.0 };
            t_factor(g.x(e)) * w * (g.eta(e).conj() * col[e] + s * g.eta(e ^ 1).conj() * col[e ^ 1])
        })
        .collect();
    let corner = (0..g.n_corners())
        .map(|c| {
            let chi: C64 = (0..n).map(|e| 2.0 * bti[(c, e)] * col[e]).sum();
            w * eta_c[c].conj() * chi
        })
        .collect();
    Ok(Observable { source, midedge, corner, twist })
}

/// One s-holomorphicity check between `z_e` and a corner `c = c^±(e)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SholResidual {
    pub edge: usize,
    pub corner: usize,
    pub residual: f64,
}

/// `Proj[F; ν] = ½(F + ν²F̄)` for unit `ν`.
pub fn project(f: C64, nu: C64) -> C64 {
    0.5 * (f + nu * nu * f.conj())
}

/// Right-hand side of the s-holomorphicity relation for `c = c^±(e)`.
pub fn s_hol_prediction(g: &Graph, fz: C64, e: usize, c: usize) -> C64 {
    let theta = 2.0 * g.x(e).atan();
    let pm = if c == g.corner_plus(e) { 1.0 } else { -1.0 };
    let nu = C64::from_polar(1.0, -PI / 4.0 - pm * theta / 2.0) * g.eta(e).conj();
    C64::from_polar(1.0, 0.5 * (g.corner_angle(c, e) - pm * (PI - theta))) * project(fz, nu)
}

/// Residuals of the s-holomorphicity relation for every pair `(z_e, c^±(e))`
/// with `o(e)` outside `skip`. Univalent vertices, where `c⁺ = c⁻`, are left out.
pub fn s_hol_residual(g: &Graph, obs: &Observable, skip: &[usize]) -> Vec<SholResidual> {
    let mut out = Vec::new();
    for e in 0..g.n_oriented() {
        let v = g.origin(e);
        if skip.contains(&v) || g.degree(v) < 2 {
            continue;
        }
        for c in [g.corner_plus(e), g.corner_minus(e)] {
            let pred = s_hol_prediction(g, obs.midedge[e], e, c);
            out.push(SholResidual { edge: e, corner: c, residual: (obs.corner[c] - pred).norm() });
        }
    }
    out
}

/// The vertex next to the source, whose pairs are excluded from the checks.
pub fn source_vertex(g: &Graph, source: Source) -> usize {
    match source {
        Source::Edge(a) => g.origin(a),
        Source::Corner(c) => g.corners()[c].vertex,
    }
}

/// Largest s-holomorphicity residual away from the source.
pub fn max_s_hol_residual(g: &Graph, obs: &Observable) -> f64 {
    s_hol_residual(g, obs, &[source_vertex(g, obs.source)]).iter().map(|r| r.residual).fold(0.0, f64::max)
}

/// Residual of the propagation-matrix form: rows `c = c⁻(e)` of `S` applied
/// to the corner values, away from the source vertex. Since `Ĉ = i·η C η̄`,
/// the corner values are columns of `C⁻¹` up to a constant, and `S·C⁻¹` is
/// supported on corners at a common vertex.
pub fn s_matrix_residual(g: &Graph, obs: &Observable) -> Result<f64> {
    let kw = build_with(g, &obs.twist)?;
    let prop = build_propagation(g, &kw)?;
    let skip = source_vertex(g, obs.source);
    let mut worst: f64 = 0.0;
    for e in 0..g.n_oriented() {
        if g.origin(e) == skip {
            continue;
        }
        let c = g.corner_minus(e);
        let r: C64 = (0..g.n_corners()).map(|c2| prop.s[(c, c2)] * obs.corner[c2]).sum();
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

fn build_with(g: &Graph, twist: &[bool]) -> Result<KacWard> {
    crate::kacward::build_with_twist(g, twist)
}

/// Residual of the boundary condition `F(z_{e₁}) ∈ e^{−iπ/4}η̄_{e₁}ℝ` at each
/// oriented edge `e₁` ending at a univalent vertex, skipping `e₁ = ā`.
pub fn boundary_residuals(g: &Graph, obs: &Observable) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for e1 in 0..g.n_oriented() {
        if g.degree(g.terminus(e1)) != 1 || obs.source == Source::Edge(e1 ^ 1) {
            continue;
        }
        let dir = C64::from_polar(1.0, -PI / 4.0) * g.eta(e1).conj();
        let f = obs.midedge[e1];
        out.push((e1, (f * dir.conj()).im.abs()));
    }
    out
}

/// `Ψ(z_e, z_a)` and `Ψ†(z_e, z_a)` for distinct unoriented edges, using the
/// representatives `e = 2k` and `a = 2l`.
pub fn psi_correlators(g: &Graph, kinv: &SkewMatrix, k: usize, l: usize) -> (C64, C64) {
    let w = C64::from_polar(1.0, PI / 4.0);
    let f = |a: usize, e: usize| {
        t_factor(g.x(e)) * w * (g.eta(e).conj() * kinv.get(e, a) + g.eta(e ^ 1).conj() * kinv.get(e ^ 1, a))
    };
    let (e, a) = (2 * k, 2 * l);
    let ta = t_factor(g.x(a));
    let psi = ta * w * (g.eta(a).conj() * f(a, e) + g.eta(a ^ 1).conj() * f(a ^ 1, e));
    let dagger = ta * w.conj() * (g.eta(a) * f(a, e) + g.eta(a ^ 1) * f(a ^ 1, e));
    (psi, dagger)
}
