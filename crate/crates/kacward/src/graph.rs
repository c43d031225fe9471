//! Straight-line embedded weighted graphs in the plane or on the flat torus.
//!
//! Edge `k` joins `ends[k].0 -> ends[k].1` and yields the oriented edges
//! `2k` (same direction) and `2k + 1` (reversed), so `rev(e) = e ^ 1`.
//! The rotation system lists the outgoing oriented edges at each vertex in
//! counterclockwise angular order; faces are traced so that each oriented
//! edge has its face on the left, bounded faces running counterclockwise.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Surface {
    Plane,
    /// Square lattice with periodic identifications, `width × height` vertices.
    Torus { width: usize, height: usize },
}

#[derive(Clone, Debug)]
pub struct Face {
    /// Oriented edges in traversal order; the face lies to their left.
    pub edges: Vec<usize>,
    pub area: f64,
    pub outer: bool,
}

#[derive(Clone, Debug)]
pub struct Corner {
    pub vertex: usize,
    pub face: usize,
    /// Unit direction of the decoration, pointing toward the vertex.
    pub deco: C64,
    pub eta: C64,
    /// Outgoing edge with this corner on its left, `c = c⁺(plus_of)`.
    pub plus_of: usize,
    /// Outgoing edge with this corner on its right, `c = c⁻(minus_of)`.
    pub minus_of: usize,
}

#[derive(Clone, Debug)]
pub struct Graph {
    surface: Surface,
    ids: Vec<i64>,
    pos: Vec<[f64; 2]>,
    ends: Vec<(usize, usize)>,
    weights: Vec<f64>,
    /// Displacement of each oriented edge (unrolled on the torus).
    disp: Vec<[f64; 2]>,
    dirs: Vec<C64>,
    rot: Vec<Vec<usize>>,
    rot_pos: Vec<usize>,
    faces: Vec<Face>,
    left_face: Vec<usize>,
    outer: Option<usize>,
    corners: Vec<Corner>,
    corner_offset: Vec<usize>,
    boundary: Vec<bool>,
    /// Torus only: per edge, whether it wraps across the vertical seam
    /// (horizontal edges) or the horizontal seam (vertical edges).
    seams: Vec<[bool; 2]>,
}

/// Principal square root of a unit complex number, argument in (−π/2, π/2].
pub fn half_angle(dir: C64) -> C64 {
    let mut a = dir.im.atan2(dir.re);
    if a <= -PI {
        a += 2.0 * PI;
    }
    C64::from_polar(1.0, a / 2.0)
}

/// Signed angle in (−π, π] from direction `a` to direction `b`.
pub fn angle_between(a: C64, b: C64) -> f64 {
    let r = b * a.conj();
    let t = r.im.atan2(r.re);
    if t <= -PI {
        t + 2.0 * PI
    } else {
        t
    }
}

const SNAP: f64 = (1u64 << 26) as f64;

fn snap(p: [f64; 2]) -> [i64; 2] {
    [(p[0] * SNAP).round() as i64, (p[1] * SNAP).round() as i64]
}

fn orient(a: [i64; 2], b: [i64; 2], c: [i64; 2]) -> i128 {
    let (ax, ay) = ((b[0] - a[0]) as i128, (b[1] - a[1]) as i128);
    let (bx, by) = ((c[0] - a[0]) as i128, (c[1] - a[1]) as i128);
    ax * by - ay * bx
}

fn on_segment(a: [i64; 2], b: [i64; 2], p: [i64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_touch(a: [i64; 2], b: [i64; 2], c: [i64; 2], d: [i64; 2]) -> bool {
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if o1.signum() * o2.signum() < 0 && o3.signum() * o4.signum() < 0 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, c))
        || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a))
        || (o4 == 0 && on_segment(c, d, b))
}

impl Graph {
    /// Planar graph with vertex ids equal to their index. Boundary vertices
    /// default to every univalent vertex whose edge borders the outer face.
    pub fn planar(pos: Vec<[f64; 2]>, edges: Vec<(usize, usize)>, weights: Vec<f64>) -> Result<Graph> {
        let ids = (0..pos.len() as i64).collect();
        Self::planar_with_ids(ids, pos, edges, weights, None)
    }

    pub fn planar_with_ids(
        ids: Vec<i64>,
        pos: Vec<[f64; 2]>,
        edges: Vec<(usize, usize)>,
        weights: Vec<f64>,
        boundary: Option<Vec<usize>>,
    ) -> Result<Graph> {
        assert_eq!(ids.len(), pos.len());
        assert_eq!(edges.len(), weights.len());
        if edges.is_empty() {
            return Err(Error::Empty);
        }
        for (a, id) in ids.iter().enumerate() {
            if ids[..a].contains(id) {
                return Err(Error::DuplicateVertexId(*id));
            }
        }
        let nv = pos.len();
        for (k, &(u, v)) in edges.iter().enumerate() {
            if u >= nv {
                return Err(Error::BadVertex(u));
            }
            if v >= nv {
                return Err(Error::BadVertex(v));
            }
            if u == v {
                return Err(Error::SelfLoop(k));
            }
        }
        check_weights(&weights)?;
        let snapped: Vec<[i64; 2]> = pos.iter().map(|&p| snap(p)).collect();
        for (k, &(u, v)) in edges.iter().enumerate() {
            if snapped[u] == snapped[v] {
                return Err(Error::ZeroLength(k));
            }
        }
        check_crossings(&snapped, &edges)?;
        let mut disp = Vec::with_capacity(2 * edges.len());
        for &(u, v) in &edges {
            let d = [pos[v][0] - pos[u][0], pos[v][1] - pos[u][1]];
            disp.push(d);
            disp.push([-d[0], -d[1]]);
        }
        let g = Self::assemble(Surface::Plane, ids, pos, edges, weights, disp, Vec::new())?;
        g.with_boundary(boundary)
    }

    /// Square-lattice torus with `width × height` vertices and uniform weight.
    pub fn torus(width: usize, height: usize, x: f64) -> Result<Graph> {
        Self::torus_with(width, height, |_| x)
    }

    /// Torus with per-edge weights. Edge `2v` is horizontal from vertex `v`,
    /// edge `2v + 1` vertical, where `v = j·width + i`.
    pub fn torus_with(width: usize, height: usize, weight: impl Fn(usize) -> f64) -> Result<Graph> {
        if width < 2 || height < 2 {
            return Err(Error::Invalid("torus sides must be at least 2".into()));
        }
        let nv = width * height;
        let idx = |i: usize, j: usize| (j % height) * width + (i % width);
        let mut pos = Vec::with_capacity(nv);
        for j in 0..height {
            for i in 0..width {
                pos.push([i as f64, j as f64]);
            }
        }
        let mut edges = Vec::new();
        let mut seams = Vec::new();
        let mut disp = Vec::new();
        for j in 0..height {
            for i in 0..width {
                edges.push((idx(i, j), idx(i + 1, j)));
                seams.push([i + 1 == width, false]);
                disp.push([1.0, 0.0]);
                disp.push([-1.0, 0.0]);
                edges.push((idx(i, j), idx(i, j + 1)));
                seams.push([false, j + 1 == height]);
                disp.push([0.0, 1.0]);
                disp.push([0.0, -1.0]);
            }
        }
        let weights: Vec<f64> = (0..edges.len()).map(weight).collect();
        check_weights(&weights)?;
        let ids = (0..nv as i64).collect();
        let mut g = Self::assemble(Surface::Torus { width, height }, ids, pos, edges, weights, disp, seams)?;
        g.boundary = vec![false; nv];
        Ok(g)
    }

    fn assemble(
        surface: Surface,
        ids: Vec<i64>,
        pos: Vec<[f64; 2]>,
        ends: Vec<(usize, usize)>,
        weights: Vec<f64>,
        disp: Vec<[f64; 2]>,
        seams: Vec<[bool; 2]>,
    ) -> Result<Graph> {
        let nv = pos.len();
        let ne = ends.len();
        let dirs: Vec<C64> = disp
            .iter()
            .map(|d| {
                let l = d[0].hypot(d[1]);
                // adding 0.0 clears a negative zero so that west is +π
                C64::new(d[0] / l + 0.0, d[1] / l + 0.0)
            })
            .collect();
        let mut rot = vec![Vec::new(); nv];
        for e in 0..2 * ne {
            let o = if e % 2 == 0 { ends[e / 2].0 } else { ends[e / 2].1 };
            rot[o].push(e);
        }
        for r in rot.iter_mut() {
            r.sort_by(|&a, &b| {
                let (ta, tb) = (dirs[a].im.atan2(dirs[a].re), dirs[b].im.atan2(dirs[b].re));
                ta.partial_cmp(&tb).unwrap()
            });
        }
        // connectivity
        let mut seen = vec![false; nv];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &rot[v] {
                let t = if e % 2 == 0 { ends[e / 2].1 } else { ends[e / 2].0 };
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Disconnected);
        }
        let mut rot_pos = vec![0; 2 * ne];
        for r in &rot {
            for (p, &e) in r.iter().enumerate() {
                rot_pos[e] = p;
            }
        }
        let mut g = Graph {
            surface,
            ids,
            pos,
            ends,
            weights,
            disp,
            dirs,
            rot,
            rot_pos,
            faces: Vec::new(),
            left_face: vec![usize::MAX; 2 * ne],
            outer: None,
            corners: Vec::new(),
            corner_offset: Vec::new(),
            boundary: vec![false; nv],
            seams,
        };
        g.trace_faces()?;
        g.build_corners();
        Ok(g)
    }

    fn trace_faces(&mut self) -> Result<()> {
        let n = 2 * self.ends.len();
        for start in 0..n {
            if self.left_face[start] != usize::MAX {
                continue;
            }
            let id = self.faces.len();
            let mut edges = Vec::new();
            let mut e = start;
            let (mut px, mut py, mut area) = (0.0, 0.0, 0.0);
            loop {
                self.left_face[e] = id;
                edges.push(e);
                let (nx, ny) = (px + self.disp[e][0], py + self.disp[e][1]);
                area += px * ny - nx * py;
                px = nx;
                py = ny;
                e = self.next_in_face(e);
                if e == start {
                    break;
                }
            }
            self.faces.push(Face { edges, area: area / 2.0, outer: false });
        }
        let (nv, ne, nf) = (self.pos.len() as i64, self.ends.len() as i64, self.faces.len() as i64);
        let chi = match self.surface {
            Surface::Plane => 2,
            Surface::Torus { .. } => 0,
        };
        if nv - ne + nf != chi {
            return Err(Error::Invalid(format!("Euler characteristic {} != {chi}", nv - ne + nf)));
        }
        if self.surface == Surface::Plane {
            let outer = (0..self.faces.len())
                .min_by(|&a, &b| self.faces[a].area.partial_cmp(&self.faces[b].area).unwrap())
                .unwrap();
            self.faces[outer].outer = true;
            self.outer = Some(outer);
        }
        Ok(())
    }

    fn build_corners(&mut self) {
        let mut offset = 0;
        for v in 0..self.pos.len() {
            self.corner_offset.push(offset);
            let r = &self.rot[v];
            let d = r.len();
            for j in 0..d {
                let (e0, e1) = (r[j], r[(j + 1) % d]);
                let mut sector = angle_between(self.dirs[e0], self.dirs[e1]);
                if sector <= 0.0 {
                    sector += 2.0 * PI;
                }
                let bisector = self.dirs[e0] * C64::from_polar(1.0, sector / 2.0);
                let deco = -bisector;
                let deco = C64::new(deco.re + 0.0, deco.im + 0.0);
                self.corners.push(Corner {
                    vertex: v,
                    face: self.left_face[e0],
                    deco,
                    eta: half_angle(deco),
                    plus_of: e0,
                    minus_of: e1,
                });
            }
            offset += d;
        }
        self.corner_offset.push(offset);
    }

    fn with_boundary(mut self, explicit: Option<Vec<usize>>) -> Result<Graph> {
        let outer = self.outer;
        let univalent_outer = |g: &Graph, v: usize| g.rot[v].len() == 1 && Some(g.left_face[g.rot[v][0]]) == outer;
        match explicit {
            Some(list) if !list.is_empty() => {
                for v in list {
                    if v >= self.pos.len() || !univalent_outer(&self, v) {
                        return Err(Error::BadBoundary(v));
                    }
                    self.boundary[v] = true;
                }
            }
            _ => {
                for v in 0..self.pos.len() {
                    self.boundary[v] = univalent_outer(&self, v);
                }
            }
        }
        Ok(self)
    }

    /// Same embedding with new edge weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Graph> {
        assert_eq!(weights.len(), self.ends.len());
        check_weights(&weights)?;
        let mut g = self.clone();
        g.weights = weights;
        Ok(g)
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn is_planar(&self) -> bool {
        self.surface == Surface::Plane
    }

    pub fn n_vertices(&self) -> usize {
        self.pos.len()
    }

    pub fn n_edges(&self) -> usize {
        self.ends.len()
    }

    pub fn n_oriented(&self) -> usize {
        2 * self.ends.len()
    }

    pub fn vertex_id(&self, v: usize) -> i64 {
        self.ids[v]
    }

    pub fn vertex_index(&self, id: i64) -> Option<usize> {
        self.ids.iter().position(|&i| i == id)
    }

    pub fn position(&self, v: usize) -> [f64; 2] {
        self.pos[v]
    }

    pub fn ends(&self, k: usize) -> (usize, usize) {
        self.ends[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    /// Weight of the edge underlying oriented edge `e`.
    pub fn x(&self, e: usize) -> f64 {
        self.weights[e / 2]
    }

    pub fn origin(&self, e: usize) -> usize {
        if e % 2 == 0 {
            self.ends[e / 2].0
        } else {
            self.ends[e / 2].1
        }
    }

    pub fn terminus(&self, e: usize) -> usize {
        self.origin(e ^ 1)
    }

    pub fn dir(&self, e: usize) -> C64 {
        self.dirs[e]
    }

    pub fn eta(&self, e: usize) -> C64 {
        half_angle(self.dirs[e])
    }

    pub fn midpoint(&self, e: usize) -> [f64; 2] {
        let o = self.pos[self.origin(e)];
        [o[0] + self.disp[e][0] / 2.0, o[1] + self.disp[e][1] / 2.0]
    }

    pub fn displacement(&self, e: usize) -> [f64; 2] {
        self.disp[e]
    }

    /// Outgoing oriented edges at `v`, counterclockwise.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.rot[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rot[v].len()
    }

    /// Position of `e` in the rotation at `o(e)`.
    pub fn rotation_index(&self, e: usize) -> usize {
        self.rot_pos[e]
    }

    /// Next oriented edge along the face to the left of `e`.
    pub fn next_in_face(&self, e: usize) -> usize {
        let t = self.terminus(e);
        let d = self.rot[t].len();
        self.rot[t][(self.rot_pos[e ^ 1] + d - 1) % d]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn left_face(&self, e: usize) -> usize {
        self.left_face[e]
    }

    pub fn outer_face(&self) -> Option<usize> {
        self.outer
    }

    pub fn inner_faces(&self) -> Vec<usize> {
        (0..self.faces.len()).filter(|&f| Some(f) != self.outer).collect()
    }

    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    pub fn n_corners(&self) -> usize {
        self.corners.len()
    }

    /// Corner ids at `v`, in counterclockwise order.
    pub fn corners_at(&self, v: usize) -> std::ops::Range<usize> {
        self.corner_offset[v]..self.corner_offset[v + 1]
    }

    /// The corner on the left of `e` at `o(e)`.
    pub fn corner_plus(&self, e: usize) -> usize {
        self.corner_offset[self.origin(e)] + self.rot_pos[e]
    }

    /// The corner on the right of `e` at `o(e)`.
    pub fn corner_minus(&self, e: usize) -> usize {
        let v = self.origin(e);
        let d = self.rot[v].len();
        self.corner_offset[v] + (self.rot_pos[e] + d - 1) % d
    }

    /// Rotation angle from the decoration of `c` into `e`, with `o(e) = v(c)`.
    pub fn corner_angle(&self, c: usize, e: usize) -> f64 {
        angle_between(self.corners[c].deco, self.dirs[e])
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.pos.len()).filter(|&v| self.boundary[v]).collect()
    }

    /// Oriented edges leaving a boundary vertex, in canonical order.
    pub fn inward_boundary_edges(&self) -> Vec<usize> {
        (0..self.n_oriented()).filter(|&e| self.boundary[self.origin(e)]).collect()
    }

    pub fn is_inward_boundary(&self, e: usize) -> bool {
        self.boundary[self.origin(e)]
    }

    /// Torus seam crossings of edge `k`: `[vertical seam, horizontal seam]`.
    pub fn seam_crossing(&self, k: usize) -> [bool; 2] {
        self.seams.get(k).copied().unwrap_or([false, false])
    }

    /// Turning angle w(e, e') in (−π, π) for `t(e) = o(e')`, `e' ≠ ē`.
    pub fn turning_angle(&self, e: usize, e2: usize) -> Result<f64> {
        if self.terminus(e) != self.origin(e2) {
            return Err(Error::Angle(format!("edges {e} and {e2} are not consecutive")));
        }
        if e2 == e ^ 1 {
            return Err(Error::Angle(format!("edge {e2} backtracks along {e}")));
        }
        Ok(angle_between(self.dirs[e], self.dirs[e2]))
    }

    /// Total rotation along a path of consecutive oriented edges.
    pub fn winding(&self, path: &[usize]) -> Result<f64> {
        path.windows(2).map(|w| self.turning_angle(w[0], w[1])).sum()
    }

    /// Total rotation of a closed edge cycle, including the closing turn.
    pub fn winding_closed(&self, cycle: &[usize]) -> Result<f64> {
        let mut w = self.winding(cycle)?;
        if let (Some(&last), Some(&first)) = (cycle.last(), cycle.first()) {
            w += self.turning_angle(last, first)?;
        }
        Ok(w)
    }

    /// The bounded face whose boundary winds once around `p`, or the outer face.
    pub fn face_at_point(&self, p: [f64; 2]) -> Result<usize> {
        if !self.is_planar() {
            return Err(Error::NotPlanar);
        }
        for (f, face) in self.faces.iter().enumerate() {
            if face.outer {
                continue;
            }
            let poly: Vec<[f64; 2]> = face.edges.iter().map(|&e| self.pos[self.origin(e)]).collect();
            if winding_number(&poly, p) == 1 {
                return Ok(f);
            }
        }
        self.outer.ok_or(Error::NoFace(p[0], p[1]))
    }

    /// An interior point of a bounded face, for addressing faces by position.
    pub fn face_point(&self, f: usize) -> [f64; 2] {
        let face = &self.faces[f];
        let c = self.corner_plus(face.edges[0]);
        let v = self.corners[c].vertex;
        let deco = self.corners[c].deco;
        let mut r = f64::INFINITY;
        for k in 0..self.n_edges() {
            let d = self.disp[2 * k];
            r = r.min(d[0].hypot(d[1]));
        }
        let step = 0.05 * r;
        [self.pos[v][0] - step * deco.re, self.pos[v][1] - step * deco.im]
    }

    /// Edge-disjoint cut paths linking `targets`; see [`CutSet`].
    pub fn find_cut_set(&self, targets: &[usize], kind: CutKind) -> Result<CutSet> {
        self.find_cut_set_seeded(targets, kind, 0)
    }

    /// As [`Graph::find_cut_set`]; a nonzero seed shuffles the search order
    /// and usually yields a different valid cut.
    pub fn find_cut_set_seeded(&self, targets: &[usize], kind: CutKind, seed: u64) -> Result<CutSet> {
        let mut targets: Vec<usize> = targets.to_vec();
        let (n_nodes, sink) = match kind {
            CutKind::Dual => {
                let outer = self.outer.ok_or(Error::NotPlanar)?;
                targets.retain(|&f| f != outer);
                (self.faces.len(), Some(outer))
            }
            CutKind::Primal => {
                if targets.len() % 2 == 1 {
                    return Err(Error::Infeasible("odd number of disorder vertices".into()));
                }
                (self.pos.len(), None)
            }
        };
        for (a, &t) in targets.iter().enumerate() {
            if t >= n_nodes {
                return Err(Error::UnknownLabel(t));
            }
            if targets[..a].contains(&t) {
                return Err(Error::RepeatedLabel(t));
            }
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_nodes];
        for k in 0..self.n_edges() {
            let (a, b) = match kind {
                CutKind::Dual => (self.left_face[2 * k], self.left_face[2 * k + 1]),
                CutKind::Primal => self.ends[k],
            };
            if a != b {
                adj[a].push((b, k));
                adj[b].push((a, k));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if seed != 0 {
            for list in adj.iter_mut() {
                list.shuffle(&mut rng);
            }
        }
        let mut order = targets.clone();
        if seed != 0 {
            order.shuffle(&mut rng);
        }
        for attempt in 0..=order.len().max(1) * 4 {
            if attempt > 0 {
                order.shuffle(&mut rng);
            }
            let mut pairs = Vec::new();
            for ch in order.chunks(2) {
                pairs.push((ch[0], if ch.len() == 2 { ch[1] } else { sink.unwrap() }));
            }
            if let Some(paths) = disjoint_paths(&adj, self.n_edges(), &pairs, seed != 0) {
                return Ok(CutSet::from_paths(kind, targets.clone(), paths, self.n_edges()));
            }
        }
        Err(Error::Infeasible(format!("no edge-disjoint paths for targets {targets:?}")))
    }
}

fn check_weights(w: &[f64]) -> Result<()> {
    for (k, &x) in w.iter().enumerate() {
        if !x.is_finite() || x == 0.0 {
            return Err(Error::BadWeight { edge: k, weight: x });
        }
    }
    Ok(())
}

/// Whether straight segments drawn between `pos` along `edges` meet only at
/// shared endpoints.
pub fn is_plane_drawing(pos: &[[f64; 2]], edges: &[(usize, usize)]) -> bool {
    let snapped: Vec<[i64; 2]> = pos.iter().map(|&p| snap(p)).collect();
    check_crossings(&snapped, edges).is_ok()
}

fn check_crossings(p: &[[i64; 2]], edges: &[(usize, usize)]) -> Result<()> {
    for a in 0..edges.len() {
        let (u1, v1) = edges[a];
        for b in a + 1..edges.len() {
            let (u2, v2) = edges[b];
            let shared = [u1, v1].iter().filter(|x| **x == u2 || **x == v2).count();
            match shared {
                2 => return Err(Error::Crossing(a, b)),
                1 => {
                    let s = if u1 == u2 || u1 == v2 { u1 } else { v1 };
                    let oa = if u1 == s { v1 } else { u1 };
                    let ob = if u2 == s { v2 } else { u2 };
                    let (da, db) = ([p[oa][0] - p[s][0], p[oa][1] - p[s][1]], [p[ob][0] - p[s][0], p[ob][1] - p[s][1]]);
                    let cross = da[0] as i128 * db[1] as i128 - da[1] as i128 * db[0] as i128;
                    let dot = da[0] as i128 * db[0] as i128 + da[1] as i128 * db[1] as i128;
                    if cross == 0 && dot > 0 {
                        return Err(Error::Crossing(a, b));
                    }
                }
                _ => {
                    if segments_touch(p[u1], p[v1], p[u2], p[v2]) {
                        return Err(Error::Crossing(a, b));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Winding number of a closed polygon around `p`.
pub fn winding_number(poly: &[[f64; 2]], p: [f64; 2]) -> i32 {
    let mut w = 0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let side = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]);
        if a[1] <= p[1] {
            if b[1] > p[1] && side > 0.0 {
                w += 1;
            }
        } else if b[1] <= p[1] && side < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Total rotation of the velocity vector along a closed polygon.
pub fn polygon_winding(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let dir = |i: usize| {
        let (a, b) = (poly[i % n], poly[(i + 1) % n]);
        C64::new(b[0] - a[0], b[1] - a[1])
    };
    (0..n).map(|i| angle_between(dir(i), dir(i + 1))).sum()
}

/// Breadth-first gives shortest paths; `depth_first` gives the longer
/// detours used to vary seeded cut sets.
fn disjoint_paths(adj: &[Vec<(usize, usize)>], n_edges: usize, pairs: &[(usize, usize)], depth_first: bool) -> Option<Vec<Vec<usize>>> {
    let mut used = vec![false; n_edges];
    let mut paths = Vec::new();
    for &(s, t) in pairs {
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; adj.len()];
        let mut seen = vec![false; adj.len()];
        if depth_first {
            let mut stack = vec![(s, None)];
            while let Some((a, from)) = stack.pop() {
                if seen[a] {
                    continue;
                }
                seen[a] = true;
                prev[a] = from;
                if a == t {
                    break;
                }
                for &(b, k) in adj[a].iter().rev() {
                    if !used[k] && !seen[b] {
                        stack.push((b, Some((a, k))));
                    }
                }
            }
        } else {
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(a) = queue.pop_front() {
                if a == t {
                    break;
                }
                for &(b, k) in &adj[a] {
                    if !used[k] && !seen[b] {
                        seen[b] = true;
                        prev[b] = Some((a, k));
                        queue.push_back(b);
                    }
                }
            }
        }
        if !seen[t] {
            return None;
        }
        let mut path = Vec::new();
        let mut node = t;
        while let Some((a, k)) = prev[node] {
            path.push(k);
            used[k] = true;
            node = a;
        }
        path.reverse();
        paths.push(path);
    }
    Some(paths)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutKind {
    /// Paths on the dual graph between faces (spin insertions).
    Dual,
    /// Paths on the graph itself between vertices (disorder insertions).
    Primal,
}

/// Edge-disjoint paths such that each target has odd degree in their union
/// and every other node even degree.
#[derive(Clone, Debug, PartialEq)]
pub struct CutSet {
    pub kind: CutKind,
    pub targets: Vec<usize>,
    pub paths: Vec<Vec<usize>>,
    crossed: Vec<bool>,
}

impl CutSet {
    pub fn empty(kind: CutKind, n_edges: usize) -> CutSet {
        CutSet { kind, targets: Vec::new(), paths: Vec::new(), crossed: vec![false; n_edges] }
    }

    pub fn from_paths(kind: CutKind, targets: Vec<usize>, paths: Vec<Vec<usize>>, n_edges: usize) -> CutSet {
        let mut crossed = vec![false; n_edges];
        for p in &paths {
            for &k in p {
                crossed[k] = !crossed[k];
            }
        }
        CutSet { kind, targets, paths, crossed }
    }

    /// Cut given directly by its edge set.
    pub fn from_edges(kind: CutKind, edges: &[usize], n_edges: usize) -> CutSet {
        Self::from_paths(kind, Vec::new(), vec![edges.to_vec()], n_edges)
    }

    /// Number of edges in the cut, |κ|.
    pub fn size(&self) -> usize {
        self.crossed.iter().filter(|&&c| c).count()
    }

    pub fn crosses(&self, k: usize) -> bool {
        self.crossed[k]
    }

    pub fn crossed(&self) -> &[bool] {
        &self.crossed
    }

    /// Crossing parity with a set of unoriented edges.
    pub fn parity<I: IntoIterator<Item = usize>>(&self, edges: I) -> bool {
        edges.into_iter().fold(false, |acc, k| acc ^ self.crossed[k])
    }

    /// Symmetric difference of two cuts on the same graph.
    pub fn combine(&self, other: &CutSet) -> CutSet {
        let crossed: Vec<bool> = self.crossed.iter().zip(&other.crossed).map(|(a, b)| a ^ b).collect();
        let mut targets = self.targets.clone();
        targets.extend(&other.targets);
        let mut paths = self.paths.clone();
        paths.extend(other.paths.iter().cloned());
        CutSet { kind: self.kind, targets, paths, crossed }
    }

    /// Checks that exactly `targets` have odd degree (plus possibly the
    /// outer face for a dual cut).
    pub fn check_parity(&self, g: &Graph) -> bool {
        let n = match self.kind {
            CutKind::Dual => g.faces().len(),
            CutKind::Primal => g.n_vertices(),
        };
        let mut deg = vec![0usize; n];
        for k in 0..g.n_edges() {
            if self.crossed[k] {
                let (a, b) = match self.kind {
                    CutKind::Dual => (g.left_face(2 * k), g.left_face(2 * k + 1)),
                    CutKind::Primal => g.ends(k),
                };
                deg[a] += 1;
                deg[b] += 1;
            }
        }
        (0..n).all(|node| {
            let odd = deg[node] % 2 == 1;
            let want = self.targets.contains(&node);
            odd == want || (self.kind == CutKind::Dual && Some(node) == g.outer_face())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn square() -> Graph {
        Graph::planar(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![(0, 1), (1, 2), (2, 3), (3, 0)],
            vec![0.5; 4],
        )
        .unwrap()
    }

    fn block3() -> Graph {
        let mut pos = Vec::new();
        for j in 0..3 {
            for i in 0..3 {
                pos.push([i as f64, j as f64]);
            }
        }
        let mut edges = Vec::new();
        for j in 0..3 {
            for i in 0..3 {
                let v = j * 3 + i;
                if i < 2 {
                    edges.push((v, v + 1));
                }
                if j < 2 {
                    edges.push((v, v + 3));
                }
            }
        }
        let n = edges.len();
        Graph::planar(pos, edges, vec![0.3; n]).unwrap()
    }

    #[test]
    fn square_faces() {
        let g = square();
        assert_eq!(g.faces().len(), 2);
        let inner = g.inner_faces()[0];
        assert!((g.faces()[inner].area - 1.0).abs() < 1e-12);
        assert!((g.faces()[g.outer_face().unwrap()].area + 1.0).abs() < 1e-12);
        assert_eq!(g.left_face(0), inner);
    }

    #[test]
    fn block_faces_and_corners() {
        let g = block3();
        assert_eq!(g.faces().len(), 5);
        assert_eq!(g.n_corners(), 2 * g.n_edges());
        for e in 0..g.n_oriented() {
            let cp = g.corner_plus(e);
            let cm = g.corner_minus(e);
            assert_eq!(g.corners()[cp].plus_of, e);
            assert_eq!(g.corners()[cm].minus_of, e);
            assert_eq!(g.corners()[cp].face, g.left_face(e));
            let wp = g.corner_angle(cp, e);
            let wm = g.corner_angle(cm, e);
            assert!(wp > 0.0 && wp < PI);
            assert!(wm < 0.0 && wm > -PI);
        }
    }

    #[test]
    fn eta_convention() {
        assert!((half_angle(C64::new(1.0, 0.0)) - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((half_angle(C64::new(-1.0, 0.0)) - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((half_angle(C64::new(-1.0, -0.0)) - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((half_angle(C64::new(0.0, 1.0)) - C64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        let g = block3();
        for e in 0..g.n_oriented() {
            assert!((g.eta(e) * g.eta(e) - g.dir(e)).norm() < 1e-14);
        }
    }

    #[test]
    fn turning_angles() {
        let g = square();
        // 0->1 east then 1->2 north
        assert!((g.turning_angle(0, 2).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(g.turning_angle(0, 1).is_err());
        assert!(g.turning_angle(0, 4).is_err());
        assert!((g.winding_closed(&[0, 2, 4, 6]).unwrap() - 2.0 * PI).abs() < 1e-12);
        let line = Graph::planar(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![(0, 1), (1, 2)], vec![0.5; 2]).unwrap();
        assert_eq!(line.winding(&[0, 2]).unwrap(), 0.0);
    }

    #[test]
    fn figure_eight_whitney() {
        let poly = [[0.0, 0.0], [1.0, 1.0], [2.0, 1.0], [2.0, -1.0], [1.0, -1.0], [-1.0, 1.0], [-2.0, 1.0], [-2.0, -1.0], [-1.0, -1.0]];
        let w = polygon_winding(&poly);
        let lhs = -C64::from_polar(1.0, w / 2.0);
        assert!((lhs - C64::new(-1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn validation_errors() {
        let cross = Graph::planar(
            vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]],
            vec![(0, 1), (2, 3)],
            vec![0.5; 2],
        );
        assert!(matches!(cross, Err(Error::Crossing(0, 1))));
        let split = Graph::planar(
            vec![[0.0, 0.0], [1.0, 0.0], [3.0, 0.0], [4.0, 0.0]],
            vec![(0, 1), (2, 3)],
            vec![0.5; 2],
        );
        assert!(matches!(split, Err(Error::Disconnected)));
        let overlap = Graph::planar(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![(0, 2), (0, 1)], vec![0.5; 2]);
        assert!(matches!(overlap, Err(Error::Crossing(_, _))));
        let through = Graph::planar(
            vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.0], [1.0, 1.0]],
            vec![(0, 1), (2, 3)],
            vec![0.5; 2],
        );
        assert!(matches!(through, Err(Error::Crossing(_, _))));
    }

    #[test]
    fn tree_has_one_face_and_boundary() {
        let g = Graph::planar(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.5]], vec![(0, 1), (1, 2)], vec![0.5; 2]).unwrap();
        assert_eq!(g.faces().len(), 1);
        assert_eq!(g.boundary_vertices(), vec![0, 2]);
        assert_eq!(g.n_corners(), 1 + 2 + 1);
        let c = g.corners_at(0).start;
        assert!((g.corners()[c].deco - g.dir(0)).norm() < 1e-15);
    }

    #[test]
    fn torus_structure() {
        let g = Graph::torus(3, 3, 0.2).unwrap();
        assert_eq!(g.n_edges(), 18);
        assert_eq!(g.faces().len(), 9);
        assert!(g.faces().iter().all(|f| (f.area - 1.0).abs() < 1e-12));
        let g2 = Graph::torus(2, 2, 0.2).unwrap();
        assert_eq!(g2.n_edges(), 8);
        assert_eq!(g2.faces().len(), 4);
    }

    #[test]
    fn face_lookup() {
        let g = block3();
        for f in g.inner_faces() {
            assert_eq!(g.face_at_point(g.face_point(f)).unwrap(), f);
        }
        assert_eq!(g.face_at_point([10.0, 10.0]).unwrap(), g.outer_face().unwrap());
    }

    #[test]
    fn cut_sets() {
        let g = square();
        let u = g.inner_faces()[0];
        let cut = g.find_cut_set(&[u], CutKind::Dual).unwrap();
        assert_eq!(cut.size(), 1);
        assert!(cut.check_parity(&g));
        assert!(g.find_cut_set(&[], CutKind::Dual).unwrap().size() == 0);
        let b = block3();
        let inner = b.inner_faces();
        for seed in 0..6 {
            let c = b.find_cut_set_seeded(&inner[..3], CutKind::Dual, seed).unwrap();
            assert!(c.check_parity(&b));
            assert_eq!(c.parity(0..b.n_edges()), c.size() % 2 == 1);
        }
        // two adjacent faces: the shared edge
        let c = b.find_cut_set(&inner[..2], CutKind::Dual).unwrap();
        let shared: Vec<usize> = (0..b.n_edges())
            .filter(|&k| {
                let (f1, f2) = (b.left_face(2 * k), b.left_face(2 * k + 1));
                (f1 == inner[0] && f2 == inner[1]) || (f1 == inner[1] && f2 == inner[0])
            })
            .collect();
        if shared.len() == 1 {
            assert_eq!(c.size(), 1);
            assert!(c.crosses(shared[0]));
        }
        let p = b.find_cut_set(&[0, 8], CutKind::Primal).unwrap();
        assert!(p.check_parity(&b));
        assert!(b.find_cut_set(&[0], CutKind::Primal).is_err());
    }
}
