//! Spin structures on the torus and on punctured disks, and the partition
//! functions and correlations assembled from the twisted Kac-Ward matrices.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{CutKind, CutSet, Graph};
use crate::kacward::{build_with_twist, transfer};
use crate::linalg::{CMatrix, C64};

/// A torus spin structure: the constant-field reference shifted by the flat
/// connection that flips signs across seam 0 and/or seam 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SpinStructure {
    pub phi: [bool; 2],
}

impl SpinStructure {
    pub fn all() -> [SpinStructure; 4] {
        [[false, false], [true, false], [false, true], [true, true]].map(|phi| SpinStructure { phi })
    }

    /// Per unoriented edge: whether the connection is nontrivial on it.
    pub fn twist(&self, g: &Graph) -> Vec<bool> {
        (0..g.n_edges())
            .map(|k| {
                let s = g.seam_crossing(k);
                (self.phi[0] && s[0]) ^ (self.phi[1] && s[1])
            })
            .collect()
    }

    /// `φ(α)` for a class `α = h₀ + 2h₁` given by seam-crossing parities.
    pub fn pairing(&self, alpha: usize) -> bool {
        (self.phi[0] && alpha & 1 == 1) ^ (self.phi[1] && alpha & 2 == 2)
    }
}

/// `KW_λ = I − T_λ` with `(T_λ)_{e,e'} = (−1)^{φ(e)} T_{e,e'}`.
pub fn kacward_lambda(g: &Graph, lambda: &SpinStructure) -> CMatrix {
    let twist = lambda.twist(g);
    let t = transfer(g);
    let n = g.n_oriented();
    CMatrix::from_fn(n, |a, b| {
        let s = if twist[a / 2] { -1.0 } else { 1.0 };
        C64::new(if a == b { 1.0 } else { 0.0 }, 0.0) - s * t[(a, b)]
    })
}

/// `sqrt(det KW)` for the sign-twisted matrix with constant coefficient +1,
/// taken as the Pfaffian normalized by its value at `x = 0`.
pub fn normalized_sqrt(g: &Graph, twist: &[bool]) -> Result<f64> {
    Ok(build_with_twist(g, twist)?.signed_sum())
}

/// Class of a closed edge path, as seam-crossing parities `h₀ + 2h₁`.
pub fn loop_class(g: &Graph, cycle: &[usize]) -> usize {
    cycle.iter().fold(0, |h, &e| {
        let s = g.seam_crossing(e / 2);
        h ^ (s[0] as usize | (s[1] as usize) << 1)
    })
}

/// Straight loop from vertex 0 following edges with direction `d`.
pub fn straight_loop(g: &Graph, d: [f64; 2]) -> Result<Vec<usize>> {
    let mut path = Vec::new();
    let mut v = 0;
    loop {
        let e = *g
            .out_edges(v)
            .iter()
            .find(|&&e| {
                let u = g.dir(e);
                (u.re - d[0]).abs() < 1e-9 && (u.im - d[1]).abs() < 1e-9
            })
            .ok_or(Error::Invalid("graph has no straight loop in that direction".into()))?;
        path.push(e);
        v = g.terminus(e);
        if v == 0 {
            return Ok(path);
        }
        if path.len() > g.n_edges() {
            return Err(Error::Invalid("straight loop does not close".into()));
        }
    }
}

/// The quadratic form of a spin structure, `q[α]` for the four classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QuadraticForm {
    pub q: [bool; 4],
}

/// Mod-2 intersection number of two classes on the torus.
pub fn intersection(a: usize, b: usize) -> bool {
    ((a & 1) & (b >> 1 & 1) ^ (a >> 1 & 1) & (b & 1)) == 1
}

impl QuadraticForm {
    /// `(−1)^{q(C)} = −exp(i·wind_λ(C)/2)` on the two straight basis loops,
    /// extended by `q(α+β) = q(α) + q(β) + α·β`.
    pub fn of(g: &Graph, lambda: &SpinStructure) -> Result<QuadraticForm> {
        let twist = lambda.twist(g);
        let mut q = [false; 4];
        for d in [[1.0, 0.0], [0.0, 1.0]] {
            let cycle = straight_loop(g, d)?;
            let class = loop_class(g, &cycle);
            if class != 1 && class != 2 {
                return Err(Error::Invalid(format!("straight loop has class {class}")));
            }
            let flips = cycle.iter().filter(|&&e| twist[e / 2]).count();
            let s = if flips % 2 == 1 { -1.0 } else { 1.0 };
            let v = -C64::from_polar(1.0, 0.5 * g.winding_closed(&cycle)?) * s;
            if (v.re.abs() - 1.0).abs() > 1e-9 {
                return Err(Error::Identity { what: "quadratic form value ±1".into(), residual: v.im.abs() });
            }
            q[class] = v.re < 0.0;
        }
        q[3] = q[1] ^ q[2] ^ intersection(1, 2);
        Ok(QuadraticForm { q })
    }

    /// Arf invariant: the majority value of `q`.
    pub fn arf(&self) -> bool {
        let s: i32 = self.q.iter().map(|&b| if b { -1 } else { 1 }).sum();
        s < 0
    }

    /// `q(α) + q(β) + α·β − q(α+β)` over all pairs, zero for a genuine form.
    pub fn is_quadratic(&self) -> bool {
        (0..4).all(|a| (0..4).all(|b| self.q[a] ^ self.q[b] ^ intersection(a, b) == self.q[a ^ b]))
    }
}

fn pm(b: bool) -> f64 {
    if b {
        -1.0
    } else {
        1.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureTerm {
    pub lambda: SpinStructure,
    pub q: QuadraticForm,
    pub arf: bool,
    /// `sqrt(det KW_λ)` with constant coefficient +1.
    pub sqrt_det: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TorusPartition {
    /// `½ Σ_λ (−1)^{Arf λ} sqrt(det KW_λ)`: the even-subgraph sum.
    pub high: f64,
    /// `¼ Σ_λ sqrt(det KW_λ)`: even subgraphs with `[P] = 0`.
    pub low: f64,
    pub terms: Vec<StructureTerm>,
}

pub fn torus_terms(g: &Graph) -> Result<Vec<StructureTerm>> {
    if g.is_planar() {
        return Err(Error::Invalid("expected a torus graph".into()));
    }
    SpinStructure::all()
        .iter()
        .map(|lambda| {
            let q = QuadraticForm::of(g, lambda)?;
            let sqrt_det = normalized_sqrt(g, &lambda.twist(g))?;
            Ok(StructureTerm { lambda: *lambda, q, arf: q.arf(), sqrt_det })
        })
        .collect()
}

pub fn torus_partition(g: &Graph) -> Result<TorusPartition> {
    let terms = torus_terms(g)?;
    let high = 0.5 * terms.iter().map(|t| pm(t.arf) * t.sqrt_det).sum::<f64>();
    let low = 0.25 * terms.iter().map(|t| t.sqrt_det).sum::<f64>();
    Ok(TorusPartition { high, low, terms })
}

/// `(1/4) Σ_λ (−1)^{q_λ(α)}` and `(1/2) Σ_λ (−1)^{Arf λ + q_λ(α)}` for each class.
pub fn form_identities(g: &Graph) -> Result<[(f64, f64); 4]> {
    let terms = torus_terms(g)?;
    let mut out = [(0.0, 0.0); 4];
    for (alpha, o) in out.iter_mut().enumerate() {
        for t in &terms {
            o.0 += 0.25 * pm(t.q.q[alpha]);
            o.1 += 0.5 * pm(t.arf ^ t.q.q[alpha]);
        }
    }
    Ok(out)
}

/// A disk with punctures at the listed inner faces. Its `2^m` spin structures
/// are the twists by cuts linking a subset of punctures to the outer face.
#[derive(Clone, Debug)]
pub struct PuncturedDisk {
    pub punctures: Vec<usize>,
    cuts: Vec<CutSet>,
}

impl PuncturedDisk {
    pub fn new(g: &Graph, punctures: &[usize]) -> Result<PuncturedDisk> {
        for (a, &u) in punctures.iter().enumerate() {
            if u >= g.faces().len() {
                return Err(Error::UnknownLabel(u));
            }
            if Some(u) == g.outer_face() {
                return Err(Error::OuterFace(u));
            }
            if punctures[..a].contains(&u) {
                return Err(Error::RepeatedLabel(u));
            }
        }
        if punctures.len() > 16 {
            return Err(Error::Budget(format!("{} punctures, limit 16", punctures.len())));
        }
        let cuts = punctures.iter().map(|&u| g.find_cut_set(&[u], CutKind::Dual)).collect::<Result<Vec<_>>>()?;
        Ok(PuncturedDisk { punctures: punctures.to_vec(), cuts })
    }

    fn structure_twist(&self, g: &Graph, subset: usize, extra: Option<&CutSet>) -> Vec<bool> {
        (0..g.n_edges())
            .map(|k| {
                let mut t = extra.is_some_and(|c| c.crosses(k));
                for (j, c) in self.cuts.iter().enumerate() {
                    if subset >> j & 1 == 1 {
                        t ^= c.crosses(k);
                    }
                }
                t
            })
            .collect()
    }

    fn structure_sum(&self, g: &Graph, extra: Option<&CutSet>) -> Result<f64> {
        let m = self.punctures.len();
        let mut total = 0.0;
        for s in 0..1usize << m {
            total += normalized_sqrt(g, &self.structure_twist(g, s, extra))?;
        }
        Ok(total / (1usize << m) as f64)
    }

    /// `Z_low,Σ = 2^{−m} Σ_λ sqrt(det KW_λ)`: domain walls with every
    /// puncture face at `+1`.
    pub fn partition(&self, g: &Graph) -> Result<f64> {
        self.structure_sum(g, None)
    }

    /// Spin correlation with `+` conditions on the outer boundary and on
    /// every puncture.
    pub fn spin_correlation(&self, g: &Graph, faces: &[usize]) -> Result<f64> {
        if faces.is_empty() {
            return Ok(1.0);
        }
        let cut = g.find_cut_set(faces, CutKind::Dual)?;
        Ok(self.structure_sum(g, Some(&cut))? / self.partition(g)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::{self, EnumerationBudget};

    #[test]
    fn constant_field_form() {
        let g = Graph::torus(3, 3, 0.3).unwrap();
        let q = QuadraticForm::of(&g, &SpinStructure { phi: [false, false] }).unwrap();
        assert_eq!(q.q, [false, true, true, true]);
        assert!(q.arf());
        let arfs: Vec<bool> = torus_terms(&g).unwrap().iter().map(|t| t.arf).collect();
        assert_eq!(arfs.iter().filter(|&&a| a).count(), 1);
        for t in torus_terms(&g).unwrap() {
            assert!(t.q.is_quadratic());
        }
        for (alpha, (orth, arf2)) in form_identities(&g).unwrap().into_iter().enumerate() {
            assert_eq!(orth, if alpha == 0 { 1.0 } else { 0.0 });
            assert_eq!(arf2, 1.0);
        }
    }

    #[test]
    fn torus_matches_homology_bins() {
        let b = EnumerationBudget::torus();
        for (w, h, x) in [(2, 2, 0.3), (3, 3, 0.25), (2, 3, 0.4)] {
            let g = Graph::torus_with(w, h, |k| x + 0.01 * k as f64).unwrap();
            let bins = oracle::even_sum_by_homology(&g, &b).unwrap();
            let tp = torus_partition(&g).unwrap();
            for t in &tp.terms {
                let want: f64 = (0..4).map(|a| pm(t.q.q[a]) * bins[a]).sum();
                assert!((t.sqrt_det - want).abs() < 1e-10 * bins[0], "{w}x{h} {:?}: {} vs {want}", t.lambda, t.sqrt_det);
                let kl = kacward_lambda(&g, &t.lambda).det();
                assert!((kl.re - t.sqrt_det.powi(2)).abs() < 1e-9 * kl.norm() && kl.im.abs() < 1e-9 * kl.norm());
            }
            let total: f64 = bins.iter().sum();
            assert!((tp.high - total).abs() < 1e-10 * total);
            assert!((tp.low - bins[0]).abs() < 1e-10 * total);
        }
    }

    #[test]
    fn punctured_disk_matches_fixed_spins() {
        let b = EnumerationBudget::default();
        let x: f64 = 0.5;
        let sq = fixtures::square(x);
        let u = sq.inner_faces()[0];
        let d = PuncturedDisk::new(&sq, &[u]).unwrap();
        assert!((d.partition(&sq).unwrap() / oracle::ising_partition(&sq, &b).unwrap() - 1.0 / (1.0 + x.powi(4))).abs() < 1e-14);

        let g = fixtures::block_with(3, 3, |k| 0.3 + 0.03 * k as f64);
        let inner = g.inner_faces();
        for punct in [vec![inner[0]], vec![inner[0], inner[3]]] {
            let d = PuncturedDisk::new(&g, &punct).unwrap();
            let z = oracle::dual_spin_sum(&g, &punct, &b, |_| 1.0).unwrap();
            assert!((d.partition(&g).unwrap() - z).abs() < 1e-12 * z);
            for faces in [vec![inner[1]], vec![inner[1], inner[2]]] {
                let want = oracle::dual_spin_sum(&g, &punct, &b, |s| faces.iter().map(|&f| s[f] as f64).product()).unwrap() / z;
                let got = d.spin_correlation(&g, &faces).unwrap();
                assert!((got - want).abs() < 1e-12, "{punct:?} {faces:?}: {got} vs {want}");
            }
        }
    }
}
