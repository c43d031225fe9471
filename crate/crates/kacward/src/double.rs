//! The double-Ising model on graphs whose boundary vertices are univalent:
//! the matrices K̃ and K̃^{[a,b]} and what they compute.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{CutKind, CutSet, Graph};
use crate::ising::{b_hat_inverse_transpose, observable_from_column, Observable, Source};
use crate::kacward::{build_corner_bundle, build_kacward, build_twisted};
use crate::linalg::{CMatrix, C64, I};

/// Relative size of the imaginary part tolerated in a real determinant.
const IMAG_TOL: f64 = 1e-8;

/// Inward boundary edges (origin at a boundary vertex) in counterclockwise
/// order around the outer face.
pub fn boundary_cycle(g: &Graph) -> Result<Vec<usize>> {
    let outer = g.outer_face().ok_or(Error::NoBoundary("graph has no outer face".into()))?;
    let mut order: Vec<usize> = g.faces()[outer].edges.iter().copied().filter(|&e| g.is_inward_boundary(e)).collect();
    if order.is_empty() {
        return Err(Error::NoBoundary("no boundary vertices".into()));
    }
    if order.len() != g.inward_boundary_edges().len() {
        return Err(Error::NoBoundary("boundary vertices off the outer face".into()));
    }
    order.reverse();
    Ok(order)
}

fn sign_pow(n: usize) -> f64 {
    if n % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `K̃`: `K` (or `K_κ`) with `+i·x_e` on the diagonal at inward boundary edges.
pub fn k_tilde(g: &Graph, cut: Option<&CutSet>) -> Result<CMatrix> {
    boundary_cycle(g)?;
    let kw = match cut {
        Some(c) => build_twisted(g, c)?,
        None => build_kacward(g)?,
    };
    let mut k = kw.k;
    for e in g.inward_boundary_edges() {
        k[(e, e)] += I * g.x(e);
    }
    Ok(k)
}

fn real_part(z: C64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL * z.norm().max(1.0) {
        return Err(Error::Identity { what: "real determinant".into(), residual: z.im.abs() });
    }
    Ok(z.re)
}

/// `Z_dbl = (−1)^{|E|}·det K̃`.
pub fn double_partition(g: &Graph) -> Result<f64> {
    let d = k_tilde(g, None)?.det();
    real_part(sign_pow(g.n_edges()) * d)
}

/// `E[σ̃_{u₁}…σ̃_{u_m}] = det K̃_κ / det K̃`.
pub fn double_spin_correlation(g: &Graph, faces: &[usize]) -> Result<f64> {
    if faces.is_empty() {
        return Ok(1.0);
    }
    for &u in faces {
        if u >= g.faces().len() {
            return Err(Error::UnknownLabel(u));
        }
        if Some(u) == g.outer_face() {
            return Err(Error::OuterFace(u));
        }
    }
    let cut = g.find_cut_set(faces, CutKind::Dual)?;
    double_spin_correlation_with_cut(g, &cut)
}

pub fn double_spin_correlation_with_cut(g: &Graph, cut: &CutSet) -> Result<f64> {
    let num = k_tilde(g, Some(cut))?.det();
    let den = k_tilde(g, None)?.det();
    real_part(num / den)
}

fn check_pair(g: &Graph, a: usize, b: usize) -> Result<Vec<usize>> {
    let cycle = boundary_cycle(g)?;
    for e in [a, b] {
        if e >= g.n_oriented() {
            return Err(Error::UnknownLabel(e));
        }
        if !g.is_inward_boundary(e) {
            return Err(Error::Invalid(format!("edge {e} is not an inward boundary edge")));
        }
    }
    if a == b {
        return Err(Error::RepeatedLabel(a));
    }
    Ok(cycle)
}

/// `K̃^{[a,b]}`: diagonal `+i·x_e` on the counterclockwise arc strictly
/// between `a` and `b`, `−i·x_e` on the arc from `b` to `a`; row `a` and
/// column `b` removed, with column `a` taking the place of column `b`.
pub fn dobrushin_matrix(g: &Graph, a: usize, b: usize) -> Result<CMatrix> {
    let cycle = check_pair(g, a, b)?;
    let kw = build_kacward(g)?;
    let mut k = kw.k;
    let ia = cycle.iter().position(|&e| e == a).unwrap();
    let m = cycle.len();
    let mut s = 1.0;
    for step in 1..m {
        let e = cycle[(ia + step) % m];
        if e == b {
            s = -1.0;
            continue;
        }
        k[(e, e)] += s * I * g.x(e);
    }
    let rows: Vec<usize> = (0..g.n_oriented()).filter(|&e| e != a).collect();
    let cols: Vec<usize> = rows.iter().map(|&e| if e == b { a } else { e }).collect();
    Ok(k.select(&rows, &cols))
}

/// `e^{(i/2)·wind(γ)}` for an edge path `γ`.
pub fn winding_phase(g: &Graph, path: &[usize]) -> Result<C64> {
    Ok(C64::from_polar(1.0, 0.5 * g.winding(path)?))
}

/// Up to `count` simple edge paths starting with `first` and ending with `last`.
pub fn edge_paths(g: &Graph, first: usize, last: usize, count: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut path = vec![first];
    let mut seen = vec![false; g.n_vertices()];
    seen[g.origin(first)] = true;
    seen[g.terminus(first)] = true;
    fn go(g: &Graph, last: usize, count: usize, path: &mut Vec<usize>, seen: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if out.len() >= count {
            return;
        }
        let v = g.terminus(*path.last().unwrap());
        for &e in g.out_edges(v) {
            if e == last {
                path.push(e);
                out.push(path.clone());
                path.pop();
                continue;
            }
            let w = g.terminus(e);
            if seen[w] || w == g.terminus(last) {
                continue;
            }
            seen[w] = true;
            path.push(e);
            go(g, last, count, path, seen, out);
            path.pop();
            seen[w] = false;
            if out.len() >= count {
                return;
            }
        }
    }
    if first == last {
        return vec![path];
    }
    go(g, last, count, &mut path, &mut seen, &mut out);
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct DobrushinReport {
    /// `Z^{[a,b]}`.
    pub value: f64,
    /// `w_{b,ā}` along each path tried.
    pub phases: Vec<C64>,
    /// Largest distance between phases of different paths.
    pub path_spread: f64,
}

/// `Z^{[a,b]} = 2(x_a x_b)^{1/2}·conj(w_{b,ā})·(−1)^{|E|−1}·det K̃^{[a,b]}`,
/// with the winding phase taken along up to `n_paths` paths from `b` to `ā`.
pub fn dobrushin_partition(g: &Graph, a: usize, b: usize, n_paths: usize) -> Result<DobrushinReport> {
    let m = dobrushin_matrix(g, a, b)?;
    let paths = edge_paths(g, b, a ^ 1, n_paths.max(1));
    if paths.is_empty() {
        return Err(Error::Disconnected);
    }
    let phases = paths.iter().map(|p| winding_phase(g, p)).collect::<Result<Vec<_>>>()?;
    let mut spread: f64 = 0.0;
    for p in &phases {
        spread = spread.max((p - phases[0]).norm());
    }
    let d = m.det() * sign_pow(g.n_edges() - 1) * phases[0].conj();
    let value = real_part(d)? * 2.0 * (g.x(a) * g.x(b)).sqrt();
    Ok(DobrushinReport { value, phases, path_spread: spread })
}

/// `F̃_a(z_e) = t_e·e^{−iπ/4}·η̄_a·(K̃⁻¹_{e,a} + K̃⁻¹_{ē,a})`, with corner values
/// from the same column through `(B̂ᵀ)⁻¹`.
pub fn double_observable(g: &Graph, a: usize) -> Result<Observable> {
    if a >= g.n_oriented() {
        return Err(Error::UnknownLabel(a));
    }
    let kinv = k_tilde(g, None)?.inverse()?;
    let kw = build_kacward(g)?;
    let cb = build_corner_bundle(g, &kw)?;
    let bti = b_hat_inverse_transpose(&cb.bhat)?;
    // the hatted inverse −i·η K̃⁻¹ η̄, column a
    let col: Vec<C64> = (0..g.n_oriented()).map(|e| -I * g.eta(e) * kinv[(e, a)] * g.eta(a).conj()).collect();
    observable_from_column(g, Source::Edge(a), &col, &cb.eta_c, &bti, vec![false; g.n_edges()])
}

/// Residuals of `F̃_a(z_e) ∈ e^{−iθ_e/2 − iπ/4}·η̄_e·ℝ` at outward boundary
/// edges `e ≠ ā`.
pub fn double_boundary_residuals(g: &Graph, obs: &Observable) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for e in 0..g.n_oriented() {
        if !g.is_inward_boundary(e ^ 1) || obs.source == Source::Edge(e ^ 1) {
            continue;
        }
        let theta = 2.0 * g.x(e).atan();
        let dir = C64::from_polar(1.0, -theta / 2.0 - PI / 4.0) * g.eta(e).conj();
        out.push((e, (obs.midedge[e] * dir.conj()).im.abs()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ising::max_s_hol_residual;
    use crate::oracle::{self, EnumerationBudget};

    fn oracle_partition(g: &Graph, cut: Option<&CutSet>) -> f64 {
        oracle::double_partition_sum(g, cut, &EnumerationBudget::default()).unwrap()
    }

    fn oracle_dobrushin(g: &Graph, a: usize, b: usize) -> f64 {
        oracle::dobrushin_sum(g, a, b, &EnumerationBudget::default()).unwrap()
    }

    #[test]
    fn trivial_values() {
        let g = fixtures::tailed_square(1e-9);
        assert!((double_partition(&g).unwrap() - 1.0).abs() < 1e-12);
        assert!(double_partition(&fixtures::square(0.5)).is_err());
    }

    #[test]
    fn partition_and_spin_match_enumeration() {
        for g in [fixtures::tailed_square(0.5), fixtures::with_tails(&fixtures::block_with(2, 3, |k| 0.3 + 0.05 * k as f64), &[0, 2, 5], 0.7)] {
            let z = double_partition(&g).unwrap();
            let want = oracle_partition(&g, None);
            assert!((z - want).abs() < 1e-10 * want, "{z} vs {want}");
            let u = g.inner_faces()[0];
            let cut = g.find_cut_set(&[u], CutKind::Dual).unwrap();
            let s = double_spin_correlation(&g, &[u]).unwrap();
            let want_s = oracle_partition(&g, Some(&cut)) / want;
            assert!((s - want_s).abs() < 1e-10, "{s} vs {want_s}");
        }
    }

    #[test]
    fn dobrushin_matches_enumeration() {
        // unequal tail weights so the 2√(x_a x_b) prefactor is visible
        let g = fixtures::with_tails(&fixtures::square(0.45), &[0, 1, 2], 0.3);
        let bd = g.inward_boundary_edges();
        let mut w: Vec<f64> = (0..g.n_edges()).map(|k| g.x(2 * k)).collect();
        w[bd[1] / 2] = 0.7;
        let g = g.with_weights(w).unwrap();
        for &a in &bd {
            for &b in &bd {
                if a == b {
                    continue;
                }
                let r = dobrushin_partition(&g, a, b, 3).unwrap();
                assert!(r.path_spread < 1e-10);
                let want = oracle_dobrushin(&g, a, b);
                assert!((r.value - want).abs() < 1e-10 * want, "({a},{b}): {} vs {want}", r.value);
            }
        }
    }

    #[test]
    fn observable_relations() {
        let g = fixtures::with_tails(&fixtures::block(3, 3, 0.45), &[0, 2, 6, 8], 0.6);
        for a in [0, 5, 12] {
            let obs = double_observable(&g, a).unwrap();
            for (e, r) in double_boundary_residuals(&g, &obs) {
                assert!(r < 1e-10, "source {a}, boundary {e}: {r}");
            }
            let r = max_s_hol_residual(&g, &obs);
            assert!(r < 1e-10, "source {a}: {r}");
        }
    }

    #[test]
    fn winding_prefactor_is_path_independent() {
        let g = fixtures::with_tails(&fixtures::block(3, 3, 0.4), &[0, 2, 6, 8], 0.5);
        let bd = g.inward_boundary_edges();
        let r = dobrushin_partition(&g, bd[0], bd[2], 3).unwrap();
        assert_eq!(r.phases.len(), 3);
        assert!(r.path_spread < 1e-10);
        assert!(r.value > 0.0);
    }

    #[test]
    fn odd_minors_vanish() {
        let g = fixtures::tailed_square(0.5);
        // det K̃ expands over boundary subsets E into minors of K with E removed
        let k = build_kacward(&g).unwrap().k;
        let bd = g.inward_boundary_edges();
        for removed in [vec![bd[0]], vec![bd[0], bd[1], bd[2]], vec![bd[1] ^ 1]] {
            let keep: Vec<usize> = (0..g.n_oriented()).filter(|e| !removed.contains(e)).collect();
            let d = k.select(&keep, &keep).det();
            assert!(d.norm() < 1e-12, "{removed:?}: {d}");
        }
    }
}
