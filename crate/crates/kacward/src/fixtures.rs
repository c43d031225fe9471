//! Small graphs used by the tests, the verification suite and the bench.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{is_plane_drawing, Graph};

pub fn triangle(x: [f64; 3]) -> Graph {
    Graph::planar(vec![[0.0, 0.0], [1.0, 0.0], [0.3, 0.9]], vec![(0, 1), (1, 2), (2, 0)], x.to_vec()).unwrap()
}

/// Unit square 4-cycle with uniform weight.
pub fn square(x: f64) -> Graph {
    cycle(4, x)
}

/// Regular n-gon.
pub fn cycle(n: usize, x: f64) -> Graph {
    let pos = (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64 + PI / n as f64;
            [a.cos(), a.sin()]
        })
        .collect();
    let edges = (0..n).map(|k| (k, (k + 1) % n)).collect();
    Graph::planar(pos, edges, vec![x; n]).unwrap()
}

/// Square-lattice block with `w × h` vertices.
pub fn block(w: usize, h: usize, x: f64) -> Graph {
    block_with(w, h, |_| x)
}

pub fn block_with(w: usize, h: usize, weight: impl Fn(usize) -> f64) -> Graph {
    let mut pos = Vec::new();
    for j in 0..h {
        for i in 0..w {
            pos.push([i as f64, j as f64]);
        }
    }
    let mut edges = Vec::new();
    for j in 0..h {
        for i in 0..w {
            let v = j * w + i;
            if i + 1 < w {
                edges.push((v, v + 1));
            }
            if j + 1 < h {
                edges.push((v, v + w));
            }
        }
    }
    let weights = (0..edges.len()).map(weight).collect();
    Graph::planar(pos, edges, weights).unwrap()
}

/// A graph with a univalent boundary tail attached to each listed vertex,
/// pointing away from the centroid.
pub fn with_tails(g: &Graph, at: &[usize], tail_weight: f64) -> Graph {
    try_with_tails(g, at, tail_weight).expect("tails cross the drawing")
}

pub fn try_with_tails(g: &Graph, at: &[usize], tail_weight: f64) -> crate::Result<Graph> {
    let n = g.n_vertices();
    let mut pos: Vec<[f64; 2]> = (0..n).map(|v| g.position(v)).collect();
    let cx = pos.iter().map(|p| p[0]).sum::<f64>() / n as f64;
    let cy = pos.iter().map(|p| p[1]).sum::<f64>() / n as f64;
    let mut edges: Vec<(usize, usize)> = (0..g.n_edges()).map(|k| g.ends(k)).collect();
    let mut weights = g.weights().to_vec();
    for &v in at {
        let p = g.position(v);
        let (dx, dy) = (p[0] - cx, p[1] - cy);
        let l = dx.hypot(dy).max(1e-9);
        pos.push([p[0] + 0.5 * dx / l, p[1] + 0.5 * dy / l]);
        edges.push((v, pos.len() - 1));
        weights.push(tail_weight);
    }
    Graph::planar(pos, edges, weights)
}

/// 4-cycle with a boundary tail at every vertex.
pub fn tailed_square(x: f64) -> Graph {
    with_tails(&square(x), &[0, 1, 2, 3], x)
}

/// Random connected plane graph: a greedy short-edge triangulation of random
/// points, thinned while staying connected, then given random weights.
pub fn random_planar(seed: u64, n_vertices: usize, max_edges: usize) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos: Vec<[f64; 2]> = (0..n_vertices).map(|_| [rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0)]).collect();
    let mut cand: Vec<(usize, usize)> = Vec::new();
    for a in 0..n_vertices {
        for b in a + 1..n_vertices {
            cand.push((a, b));
        }
    }
    let len = |&(a, b): &(usize, usize)| (pos[a][0] - pos[b][0]).hypot(pos[a][1] - pos[b][1]);
    cand.sort_by(|p, q| len(p).partial_cmp(&len(q)).unwrap());
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for e in cand {
        edges.push(e);
        if !is_plane_drawing(&pos, &edges) {
            edges.pop();
        }
    }
    edges.shuffle(&mut rng);
    let mut k = 0;
    while edges.len() > max_edges && k < edges.len() {
        let removed = edges.remove(k);
        if !connected(n_vertices, &edges) {
            edges.insert(k, removed);
            k += 1;
        }
    }
    let weights = (0..edges.len()).map(|_| rng.gen_range(0.1..0.9)).collect();
    Graph::planar(pos, edges, weights).unwrap()
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, a: usize) -> usize {
        let mut a = a;
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    let mut comps = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            comps -= 1;
        }
    }
    comps == 1
}

/// The shared planar corpus: small graphs with at most 14 edges.
pub fn corpus() -> Vec<(String, Graph)> {
    let mut out = vec![
        ("triangle".to_string(), triangle([0.3, 0.5, 0.7])),
        ("square".to_string(), square(0.5)),
        ("pentagon".to_string(), cycle(5, 0.6)),
        ("hexagon".to_string(), cycle(6, 0.4)),
        ("block2x2".to_string(), block(2, 2, 0.45)),
        ("block2x3".to_string(), block(2, 3, 0.35)),
        ("block3x3".to_string(), block_with(3, 3, |k| 0.2 + 0.05 * k as f64)),
        ("tailed_square".to_string(), tailed_square(0.5)),
        ("tailed_triangle".to_string(), with_tails(&triangle([0.4, 0.6, 0.5]), &[0, 2], 0.3)),
        ("tailed_block2x3".to_string(), with_tails(&block(2, 3, 0.4), &[0, 5], 0.7)),
    ];
    for seed in 0..8 {
        out.push((format!("random{seed}"), random_planar(seed, 6 + (seed as usize % 3), 9 + (seed as usize % 5))));
    }
    for seed in 8..11 {
        let g = random_planar(seed, 6, 9);
        let tailed = (0..6)
            .flat_map(|a| (a + 1..6).map(move |b| [a, b]))
            .find_map(|tips| try_with_tails(&g, &tips, 0.55).ok().filter(|t| t.boundary_vertices().len() == 2))
            .expect("no tail placement");
        out.push((format!("random{seed}_tailed"), tailed));
    }
    out
}
