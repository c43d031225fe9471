//! Kac-Ward matrices and their relatives.
//!
//! All matrices indexed by oriented edges use the canonical order `2k`,
//! `2k+1`; corner-indexed ones use the graph's corner ids (vertex, then
//! counterclockwise position).

use crate::error::{Error, Result};
use crate::graph::{angle_between, CutKind, CutSet, Graph};
use crate::linalg::{pfaffian, CMatrix, SkewMatrix, C64, I};

/// Tolerance on imaginary residue when a hatted matrix is made real.
pub const REAL_TOL: f64 = 1e-12;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Transition matrix T: `T[e][e'] = exp(i·w(e,e')/2)·sqrt(x_e·x_e')` when
/// `e'` continues `e` without backtracking.
pub fn transfer(g: &Graph) -> CMatrix {
    let n = g.n_oriented();
    let mut t = CMatrix::zeros(n);
    for e in 0..n {
        let v = g.terminus(e);
        for &e2 in g.out_edges(v) {
            if e2 == e ^ 1 {
                continue;
            }
            let w = angle_between(g.dir(e), g.dir(e2));
            t[(e, e2)] += C64::from_polar(1.0, w / 2.0) * c(g.x(e)).sqrt() * c(g.x(e2)).sqrt();
        }
    }
    t
}

/// The involution J swapping `e` and `ē`.
pub fn j_matrix(n: usize) -> CMatrix {
    let mut j = CMatrix::zeros(n);
    for e in 0..n {
        j[(e, e ^ 1)] = c(1.0);
    }
    j
}

pub fn eta_vector(g: &Graph) -> Vec<C64> {
    (0..g.n_oriented()).map(|e| g.eta(e)).collect()
}

/// `i·U·M·U*` with `U = diag(eta)`.
pub fn hat(m: &CMatrix, eta: &[C64]) -> CMatrix {
    CMatrix::from_fn(m.dim(), |a, b| I * eta[a] * m[(a, b)] * eta[b].conj())
}

#[derive(Clone, Debug)]
pub struct KacWard {
    pub t: CMatrix,
    pub kw: CMatrix,
    pub k: CMatrix,
    pub khat: SkewMatrix,
    pub eta: Vec<C64>,
    /// Per unoriented edge: whether its rows carry a sign twist.
    pub twist: Vec<bool>,
}

pub fn build_kacward(g: &Graph) -> Result<KacWard> {
    build_with_twist(g, &vec![false; g.n_edges()])
}

pub fn build_twisted(g: &Graph, cut: &CutSet) -> Result<KacWard> {
    if cut.kind != CutKind::Dual || cut.crossed().len() != g.n_edges() || (g.is_planar() && !cut.check_parity(g)) {
        return Err(Error::Invalid("cut set does not fit this graph".into()));
    }
    build_with_twist(g, cut.crossed())
}

/// `det(I − T)`, valid for weights of either sign (principal square roots
/// enter only through a similarity transform).
pub fn kacward_determinant(g: &Graph) -> C64 {
    CMatrix::identity(g.n_oriented()).sub(&transfer(g)).det()
}

/// `KW = I_s − T` where `I_s` is −1 on both orientations of twisted edges.
pub fn build_with_twist(g: &Graph, twist: &[bool]) -> Result<KacWard> {
    if g.weights().iter().any(|&x| x < 0.0) {
        return Err(Error::Invalid("negative weights have no real Pfaffian form".into()));
    }
    let n = g.n_oriented();
    let t = transfer(g);
    let mut kw = t.scale(c(-1.0));
    for e in 0..n {
        kw[(e, e)] += c(if twist[e / 2] { -1.0 } else { 1.0 });
    }
    let k = CMatrix::from_fn(n, |a, b| kw[(a ^ 1, b)]);
    let eta = eta_vector(g);
    let khat = SkewMatrix::from_complex(&hat(&k, &eta), REAL_TOL)?;
    Ok(KacWard { t, kw, k, khat, eta, twist: twist.to_vec() })
}

impl KacWard {
    pub fn dim(&self) -> usize {
        self.kw.dim()
    }

    /// Pfaffian of K̂ at x = 0, i.e. the sign of the all-long reference
    /// matching: `∏_k (−1)^{s_k} · i·η_{2k}·conj(η_{2k+1})`.
    pub fn reference_sign(&self) -> f64 {
        let mut s = 1.0;
        for k in 0..self.twist.len() {
            let v = I * self.eta[2 * k] * self.eta[2 * k + 1].conj();
            s *= v.re.signum() * if self.twist[k] { -1.0 } else { 1.0 };
        }
        s
    }

    pub fn pfaffian(&self) -> f64 {
        pfaffian(&self.khat)
    }

    /// Pfaffian normalized to constant term +1: the signed even-subgraph
    /// polynomial `Σ_P (−1)^{s·P} x(P)`.
    pub fn signed_sum(&self) -> f64 {
        self.reference_sign() * self.pfaffian()
    }

    pub fn khat_inverse(&self) -> Result<SkewMatrix> {
        self.khat.inverse()
    }
}

/// B: corners × oriented edges, `B[c][e] = exp(i·w(c,e)/2)/sqrt(x_e)` for
/// `c ∈ {c⁺(e), c⁻(e)}` (a single entry at univalent vertices).
pub fn b_matrix(g: &Graph) -> CMatrix {
    let n = g.n_oriented();
    let mut b = CMatrix::zeros(n);
    for e in 0..n {
        let (cp, cm) = (g.corner_plus(e), g.corner_minus(e));
        for cc in if cp == cm { vec![cp] } else { vec![cp, cm] } {
            b[(cc, e)] = C64::from_polar(1.0 / g.x(e).sqrt(), g.corner_angle(cc, e) / 2.0);
        }
    }
    b
}

/// Rotation from decoration `c` through `e` into the reversed decoration
/// `c̄'`, for `c` at `o(e)` and `c'` at `t(e)`.
pub fn corner_path_angle(g: &Graph, c1: usize, e: usize, c2: usize) -> f64 {
    g.corner_angle(c1, e) + angle_between(g.dir(e), -g.corners()[c2].deco)
}

/// Rotation from decoration `c` to the reversed decoration `c̄'` at the same vertex.
pub fn corner_turn(g: &Graph, c1: usize, c2: usize) -> f64 {
    angle_between(g.corners()[c1].deco, -g.corners()[c2].deco)
}

pub fn corner_eta(g: &Graph) -> Vec<C64> {
    g.corners().iter().map(|c| c.eta).collect()
}

#[derive(Clone, Debug)]
pub struct CornerBundle {
    pub b: CMatrix,
    pub c: CMatrix,
    /// Indexed by corners `0..n` then oriented edges `n..2n`.
    pub f: CMatrix,
    pub bhat: CMatrix,
    pub chat: SkewMatrix,
    pub fhat: SkewMatrix,
    pub eta_c: Vec<C64>,
}

pub fn build_corner_bundle(g: &Graph, kw: &KacWard) -> Result<CornerBundle> {
    let n = g.n_oriented();
    let b = b_matrix(g);
    let bstar = b.adjoint();
    let c_mat = &(&b * &kw.k) * &bstar;
    let j = j_matrix(n);
    let top_left = c_mat.sub(&(&(&b * &j) * &bstar));
    let mut f = CMatrix::zeros(2 * n);
    for p in 0..n {
        for q in 0..n {
            f[(p, q)] = top_left[(p, q)];
            f[(p, n + q)] = -b[(p, q)];
            f[(n + p, q)] = -bstar[(p, q)];
            f[(n + p, n + q)] = -j[(p, q)];
        }
    }
    let eta_c = corner_eta(g);
    let bhat = CMatrix::from_fn(n, |a, e| eta_c[a] * b[(a, e)] * kw.eta[e].conj());
    if (0..n).any(|a| (0..n).any(|e| bhat[(a, e)].im.abs() > REAL_TOL * bhat.max_abs())) {
        return Err(Error::Identity { what: "B̂ real".into(), residual: bhat.max_abs() });
    }
    let chat = SkewMatrix::from_complex(&hat(&c_mat, &eta_c), REAL_TOL)?;
    // With η_e itself the corner/edge block of iU F U* is imaginary; the
    // phase i·η_e (a root of −dir e) makes F̂ real.
    let mut eta_f = eta_c.clone();
    eta_f.extend(kw.eta.iter().map(|&h| I * h));
    let fhat = SkewMatrix::from_complex(&hat(&f, &eta_f), REAL_TOL)?;
    Ok(CornerBundle { b, c: c_mat, f, bhat, chat, fhat, eta_c })
}

/// Planar drawing of the Fisher graph: corner `c` sits inside its sector
/// near `v(c)`, the terminal vertex `e` on `e` near `o(e)`. Vertex ids of
/// the returned graph match the rows of F̂ and edge weights are `x^F`.
pub fn fisher_graph(g: &Graph) -> Result<Graph> {
    if !g.is_planar() {
        return Err(Error::NotPlanar);
    }
    let n = g.n_oriented();
    let mut clearance = f64::INFINITY;
    for k in 0..g.n_edges() {
        let (u, w) = g.ends(k);
        let (a, b) = (g.position(u), g.position(w));
        for v in 0..g.n_vertices() {
            if v != u && v != w {
                clearance = clearance.min(point_segment_distance(g.position(v), a, b));
            }
        }
        clearance = clearance.min((b[0] - a[0]).hypot(b[1] - a[1]));
    }
    let r = 0.2 * clearance;
    let mut pos = vec![[0.0; 2]; 2 * n];
    for (id, corner) in g.corners().iter().enumerate() {
        let v = g.position(corner.vertex);
        pos[id] = [v[0] - r * corner.deco.re, v[1] - r * corner.deco.im];
    }
    for e in 0..n {
        let o = g.position(g.origin(e));
        pos[n + e] = [o[0] + r * g.dir(e).re, o[1] + r * g.dir(e).im];
    }
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for v in 0..g.n_vertices() {
        let cs = g.corners_at(v);
        let d = cs.len();
        if d == 2 {
            // both cyclic neighbours coincide: a doubled edge
            edges.push((cs.start, cs.start + 1));
            weights.push(2.0);
        } else if d >= 3 {
            for j in 0..d {
                edges.push((cs.start + j, cs.start + (j + 1) % d));
                weights.push(1.0);
            }
        }
    }
    for k in 0..g.n_edges() {
        edges.push((n + 2 * k, n + 2 * k + 1));
        weights.push(1.0);
    }
    for e in 0..n {
        let (cp, cm) = (g.corner_plus(e), g.corner_minus(e));
        edges.push((n + e, cp));
        weights.push(1.0 / g.x(e).sqrt());
        if cm != cp {
            edges.push((n + e, cm));
            weights.push(1.0 / g.x(e).sqrt());
        }
    }
    Graph::planar(pos, edges, weights)
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

#[derive(Clone, Debug)]
pub struct FaceCheck {
    pub face: usize,
    pub clockwise: usize,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct KasteleynReport {
    pub faces: Vec<FaceCheck>,
}

impl KasteleynReport {
    pub fn all_ok(&self) -> bool {
        self.faces.iter().all(|f| f.ok)
    }

    pub fn failing(&self) -> Vec<usize> {
        self.faces.iter().filter(|f| !f.ok).map(|f| f.face).collect()
    }
}

/// Counts, for each bounded face of `fisher`, the boundary edges whose
/// orientation runs clockwise, orienting `p -> q` when `fhat[q][p] > 0`.
/// Kasteleyn's condition asks for an odd count everywhere.
pub fn check_kasteleyn(fisher: &Graph, fhat: &SkewMatrix) -> KasteleynReport {
    let mut faces = Vec::new();
    for (id, face) in fisher.faces().iter().enumerate() {
        if face.outer {
            continue;
        }
        let clockwise = face
            .edges
            .iter()
            .filter(|&&e| fhat.get(fisher.origin(e), fisher.terminus(e)) > 0.0)
            .count();
        faces.push(FaceCheck { face: id, clockwise, ok: clockwise % 2 == 1 });
    }
    KasteleynReport { faces }
}

#[derive(Clone, Debug)]
pub struct Propagation {
    pub y: CMatrix,
    pub d: CMatrix,
    pub s: CMatrix,
    pub w: CMatrix,
    pub theta: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

/// Residuals of the factorization identities relating C, Y, D, S and W.
#[derive(Clone, Debug)]
pub struct PropagationResiduals {
    pub s_product: f64,
    pub s_equals_wd: f64,
    pub ic_split: f64,
    pub wwstar: f64,
    pub inverse_identity: f64,
}

impl PropagationResiduals {
    pub fn max(&self) -> f64 {
        [self.s_product, self.s_equals_wd, self.ic_split, self.wwstar, self.inverse_identity]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

pub fn edge_angle_params(x: f64) -> (f64, f64, f64) {
    let theta = 2.0 * x.atan();
    (theta, theta.cos(), theta.sin())
}

/// Y, D, S, W for the twist `kw.twist`. Univalent vertices are rejected:
/// their single corner is both `c⁺` and `c⁻` and the definitions collide.
pub fn build_propagation(g: &Graph, kw: &KacWard) -> Result<Propagation> {
    if !g.is_planar() {
        return Err(Error::NotPlanar);
    }
    if (0..g.n_vertices()).any(|v| g.degree(v) < 2) {
        return Err(Error::Invalid("propagation matrices need all degrees ≥ 2".into()));
    }
    let n = g.n_oriented();
    let sign = |e: usize| if kw.twist[e / 2] { -1.0 } else { 1.0 };
    let mut y = CMatrix::zeros(n);
    for v in 0..g.n_vertices() {
        for c1 in g.corners_at(v) {
            for c2 in g.corners_at(v) {
                if c1 != c2 {
                    y[(c1, c2)] = C64::from_polar(1.0, corner_turn(g, c1, c2) / 2.0);
                }
            }
        }
    }
    let mut theta = Vec::with_capacity(n);
    let mut pv = Vec::with_capacity(n);
    let mut qv = Vec::with_capacity(n);
    for e in 0..n {
        let (t, p, q) = edge_angle_params(g.x(e));
        theta.push(t);
        pv.push(p);
        qv.push(q);
    }
    let mut d = CMatrix::zeros(n);
    let mut s = CMatrix::zeros(n);
    let mut w = CMatrix::zeros(n);
    for cc in 0..n {
        d[(cc, cc)] = -I;
        s[(cc, cc)] = c(-1.0);
    }
    for e in 0..n {
        let (cp, cm) = (g.corner_plus(e), g.corner_minus(e));
        let (cpr, cmr) = (g.corner_plus(e ^ 1), g.corner_minus(e ^ 1));
        let x = g.x(e);
        d[(cp, cm)] += C64::from_polar(pv[e], corner_turn(g, cp, cm) / 2.0);
        d[(cp, cmr)] += C64::from_polar(qv[e] * sign(e), corner_path_angle(g, cp, e, cmr) / 2.0);
        s[(cm, cp)] += -I * C64::from_polar(1.0, corner_turn(g, cm, cp) / 2.0);
        for cr in [cpr, cmr] {
            s[(cm, cr)] += I * C64::from_polar(sign(e) / x, corner_path_angle(g, cm, e, cr) / 2.0);
        }
        w[(cm, cp)] += C64::from_polar(1.0, corner_turn(g, cm, cp) / 2.0);
        w[(cm, cpr)] += -C64::from_polar(sign(e) / x, corner_path_angle(g, cm, e, cpr) / 2.0);
    }
    Ok(Propagation { y, d, s, w, theta, p: pv, q: qv })
}

impl Propagation {
    /// Checks every identity against the corner matrix `c` built from the
    /// same twist; residuals are absolute, entries are O(1/x).
    pub fn residuals(&self, g: &Graph, c_mat: &CMatrix) -> Result<PropagationResiduals> {
        let n = c_mat.dim();
        let id = CMatrix::identity(n);
        let y_plus = self.y.add(&id.scale(I));
        let half = c(0.5);
        let s_prod = (&y_plus * c_mat).scale(half);
        let wd = &self.w * &self.d;
        let wd_star = &self.w.adjoint() * &self.d.adjoint();
        let ic = c_mat.scale(I);
        let wws = &self.w * &self.w.adjoint();
        let mut wwstar: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let want = if a == b {
                    let e = g.corners()[a].minus_of;
                    1.0 + g.x(e).powi(-2)
                } else {
                    0.0
                };
                wwstar = wwstar.max((wws[(a, b)] - c(want)).norm());
            }
        }
        let lhs = c_mat.inverse()?.scale(c(4.0)).add(&y_plus);
        let rhs = self.d.inverse()?.scale(c(2.0));
        Ok(PropagationResiduals {
            s_product: s_prod.max_diff(&self.s),
            s_equals_wd: s_prod.max_diff(&wd),
            ic_split: ic.max_diff(&wd.sub(&wd_star)),
            wwstar,
            inverse_identity: lhs.max_diff(&rhs),
        })
    }

    pub fn verify(&self, g: &Graph, c_mat: &CMatrix, tol: f64) -> Result<PropagationResiduals> {
        let r = self.residuals(g, c_mat)?;
        let checks = [
            ("S = (Y+iI)C/2", r.s_product),
            ("(Y+iI)C/2 = WD", r.s_equals_wd),
            ("iC = WD - W*D*", r.ic_split),
            ("WW* diagonal", r.wwstar),
        ];
        for (what, residual) in checks {
            if residual > tol {
                return Err(Error::Identity { what: what.into(), residual });
            }
        }
        Ok(r)
    }
}

/// Expected entry of C from the local formulas, for comparing against the product `BKB*`.
pub fn c_entry_formula(g: &Graph, twist: &[bool], c1: usize, c2: usize) -> C64 {
    let v1 = g.corners()[c1].vertex;
    let v2 = g.corners()[c2].vertex;
    let mut total = C64::new(0.0, 0.0);
    if v1 == v2 {
        // one term per edge separating the two corners; twice when d = 2
        if c1 != c2 {
            for &e in g.out_edges(v1) {
                let pair = (g.corner_plus(e), g.corner_minus(e));
                if pair == (c1, c2) || pair == (c2, c1) {
                    total -= C64::from_polar(1.0, corner_turn(g, c1, c2) / 2.0);
                }
            }
        }
        return total;
    }
    for &e in g.out_edges(v1) {
        if g.terminus(e) != v2 {
            continue;
        }
        let near = [g.corner_plus(e), g.corner_minus(e)];
        let far = [g.corner_plus(e ^ 1), g.corner_minus(e ^ 1)];
        if near.contains(&c1) && far.contains(&c2) {
            let s = if twist[e / 2] { -1.0 } else { 1.0 };
            total += C64::from_polar(s / g.x(e), corner_path_angle(g, c1, e, c2) / 2.0);
        }
    }
    total
}

/// `|det B|` predicted by the block structure: 2 per vertex of degree ≥ 2
/// times `∏ x_e^{-1/2}` over its edges; univalent blocks give `x^{-1/2}`.
pub fn det_b_formula(g: &Graph) -> f64 {
    let mut d = 1.0;
    for v in 0..g.n_vertices() {
        if g.degree(v) >= 2 {
            d *= 2.0;
        }
        for &e in g.out_edges(v) {
            d /= g.x(e).sqrt();
        }
    }
    d
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::f64::consts::PI;

    #[test]
    fn single_edge_and_triangle() {
        let g = Graph::planar(vec![[0.0, 0.0], [1.0, 0.0]], vec![(0, 1)], vec![0.4]).unwrap();
        let kw = build_kacward(&g).unwrap();
        assert_eq!(kw.t.max_abs(), 0.0);
        assert!((kw.kw.det() - c(1.0)).norm() < 1e-15);
        let (a, b, cc) = (0.3, 0.5, 0.7);
        let tri = fixtures::triangle([a, b, cc]);
        let kw = build_kacward(&tri).unwrap();
        let expect = (1.0 + a * b * cc).powi(2);
        assert!((kw.kw.det() - c(expect)).norm() < 1e-12);
        assert!((kw.signed_sum() - (1.0 + a * b * cc)).abs() < 1e-12);
    }

    #[test]
    fn square_twist() {
        let x: f64 = 0.6;
        let g = fixtures::square(x);
        let kw = build_kacward(&g).unwrap();
        assert!((kw.kw.det().re - (1.0 + x.powi(4)).powi(2)).abs() < 1e-12);
        assert!(kw.k.is_hermitian(1e-14));
        let u = g.inner_faces()[0];
        let cut = g.find_cut_set(&[u], CutKind::Dual).unwrap();
        let tw = build_twisted(&g, &cut).unwrap();
        let sign = if cut.size() % 2 == 1 { -1.0 } else { 1.0 };
        let corr = sign * tw.pfaffian() / kw.pfaffian();
        assert!((corr - (1.0 - x.powi(4)) / (1.0 + x.powi(4))).abs() < 1e-12);
        let k = (0..g.n_edges()).find(|&k| cut.crosses(k)).unwrap();
        for e in 0..g.n_oriented() {
            let flipped = (tw.kw[(e, e)] - kw.kw[(e, e)]).norm() > 0.0;
            assert_eq!(flipped, e / 2 == k);
        }
    }

    #[test]
    fn corner_matrices_on_block() {
        let g = fixtures::block(3, 3, 0.35);
        let kw = build_kacward(&g).unwrap();
        let cb = build_corner_bundle(&g, &kw).unwrap();
        assert!(cb.c.is_hermitian(1e-12));
        for a in 0..g.n_corners() {
            for b in 0..g.n_corners() {
                let want = c_entry_formula(&g, &kw.twist, a, b);
                assert!((cb.c[(a, b)] - want).norm() < 1e-12, "C[{a}][{b}] {} vs {want}", cb.c[(a, b)]);
            }
        }
        let det_b = cb.b.det().norm();
        assert!((det_b - det_b_formula(&g)).abs() < 1e-9 * det_b);
        let pk = kw.pfaffian().abs();
        assert!((pfaffian(&cb.chat).abs() - det_b * pk).abs() < 1e-8 * det_b * pk);
        assert!((pfaffian(&cb.fhat).abs() - det_b * pk).abs() < 1e-8 * det_b * pk);
        let bkb = &(&cb.bhat * &kw.khat.to_complex()) * &cb.bhat.transpose();
        assert!(bkb.max_diff(&cb.chat.to_complex()) < 1e-12);
    }

    #[test]
    fn kasteleyn_on_fisher_graph() {
        for g in [fixtures::triangle([0.2, 0.3, 0.4]), fixtures::square(0.5), fixtures::block(3, 3, 0.3)] {
            let kw = build_kacward(&g).unwrap();
            let cb = build_corner_bundle(&g, &kw).unwrap();
            let gf = fisher_graph(&g).unwrap();
            let n = 2 * g.n_oriented();
            for p in 0..n {
                for q in 0..n {
                    let adjacent = gf.out_edges(p).iter().any(|&e| gf.terminus(e) == q);
                    assert_eq!(adjacent, cb.fhat.get(p, q).abs() > 1e-12, "pattern at {p},{q}");
                }
            }
            let rep = check_kasteleyn(&gf, &cb.fhat);
            assert!(rep.all_ok(), "{:?}", rep.failing());
            let zd = crate::oracle::dimer_sum(&gf).unwrap();
            assert!((zd - pfaffian(&cb.fhat).abs()).abs() < 1e-9 * zd, "dimers {zd}");
            // flipping one inner edge breaks exactly its two faces
            let k = g.n_edges();
            let e_f = (0..gf.n_edges()).find(|&e| gf.ends(e) == (g.n_oriented() + 0, g.n_oriented() + 1)).unwrap_or(k);
            let (p, q) = gf.ends(e_f);
            let mut bad = cb.fhat.clone();
            bad.set(p, q, -bad.get(p, q));
            let rep = check_kasteleyn(&gf, &bad);
            let mut expect: Vec<usize> = [gf.left_face(2 * e_f), gf.left_face(2 * e_f + 1)]
                .into_iter()
                .filter(|&f| Some(f) != gf.outer_face())
                .collect();
            expect.sort();
            let mut got = rep.failing();
            got.sort();
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn propagation_identities() {
        let g = fixtures::block(3, 3, 0.45);
        let kw = build_kacward(&g).unwrap();
        let cb = build_corner_bundle(&g, &kw).unwrap();
        let pr = build_propagation(&g, &kw).unwrap();
        let r = pr.verify(&g, &cb.c, 1e-10).unwrap();
        assert!(r.inverse_identity < 1e-9, "{r:?}");
        assert!(pr.y.is_hermitian(1e-14));
        let (t, p, q) = edge_angle_params(1.0);
        assert!((t - PI / 2.0).abs() < 1e-15 && p.abs() < 1e-15 && (q - 1.0).abs() < 1e-15);
    }
}
