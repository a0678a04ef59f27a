//! Multi-level graded grids whose weighted shortest paths approximate
//! geodesics of the metric with density `1/delta`.
//!
//! A grid is a union of dyadic lattices anchored at the domain's bounding
//! box corner. Level 0 has the build pitch; each level halves the spacing.
//! Base levels cover the whole clip region (or, during refinement, a
//! window around the query pair); deeper levels exist only in a band near
//! the boundary where the metric density is large, so resolution follows
//! `1/delta` without global cost. All lattice positions are integer
//! multiples of a common quantum, which makes node identity across levels
//! exact and lets refinement extend a grid in place: a finer grid always
//! contains the coarser one, so shortest-path estimates can only improve.

use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{Domain, Point, PointClass, PolyPath, Rect};
use crate::metrics::{qh_segment_length_with, qh_segment_quad_error_with};

/// Lattice keys are multiples of `pitch / 2^LEVEL_SHIFT`; level `d` uses
/// step `2^(LEVEL_SHIFT - d)`.
const LEVEL_SHIFT: u32 = 40;
/// A sub-level node at spacing `s` exists where `delta < BAND_FACTOR * s`.
const BAND_FACTOR: f64 = 8.0;
/// Sub-level nodes also keep `delta >= s / NODE_FLOOR_FACTOR`, leaving
/// closer strips to the next level down.
const NODE_FLOOR_FACTOR: f64 = 8.0;
/// Levels allowed below the current base everywhere near the boundary.
const GRADED_DEPTH: u32 = 4;
/// Levels allowed below the current base inside thin features (slots,
/// narrow teeth) where two unrelated walls face each other.
const FEATURE_DEPTH: u32 = 12;
/// Shortcut window (in vertices) for path smoothing.
const SMOOTH_WINDOW: usize = 12;
const SMOOTH_PASSES: usize = 8;
/// Rounds of free-vertex relaxation after smoothing, and the ladder of
/// trial steps (as fractions of the vertex clearance) inside each round.
const RELAX_ROUNDS: usize = 6;
const RELAX_STEPS: [f64; 4] = [0.25, 0.125, 0.0625, 0.03125];
/// Vertex budget for the relaxation: subdivision stops adding vertices
/// beyond this, and much longer paths get fewer rounds, keeping the cost
/// of polishing long geodesics bounded.
const RELAX_VERTEX_BUDGET: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// 8 neighbors: axis and diagonal steps.
    S8,
    /// 16 neighbors: S8 plus knight moves, for lower direction bias.
    S16,
}

/// Offsets come in coprime pairs, so a node pair is connectable at exactly
/// one level; refinement can never duplicate an edge.
const OFFSETS_8: [(i64, i64); 8] =
    [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
const OFFSETS_16: [(i64, i64); 16] = [
    (1, 0),
    (0, 1),
    (-1, 0),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (2, 1),
    (1, 2),
    (-1, 2),
    (-2, 1),
    (-2, -1),
    (-1, -2),
    (1, -2),
    (2, -1),
];

impl Stencil {
    pub fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            Stencil::S8 => &OFFSETS_8,
            Stencil::S16 => &OFFSETS_16,
        }
    }

    pub fn size(self) -> usize {
        self.offsets().len()
    }
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("no interior grid node; the pitch is too coarse for the domain")]
    EmptyGrid,
    #[error("point ({0}, {1}) is not interior")]
    PointNotInterior(f64, f64),
    #[error("endpoints not connected at the current resolution")]
    Disconnected,
    #[error("point ({0}, {1}) is not a grid node; inject it first")]
    NotANode(f64, f64),
}

type Key = (i64, i64);

#[derive(Debug, Clone, Copy)]
struct Node {
    p: Point,
    delta: f64,
    key: Key,
}

/// Restriction of refinement work to a neighborhood of the query pair.
#[derive(Debug, Clone)]
enum Window {
    All,
    Balls(Vec<(Point, f64)>),
}

impl Window {
    fn contains(&self, p: Point) -> bool {
        match self {
            Window::All => true,
            Window::Balls(balls) => balls.iter().any(|(c, r)| c.dist(p) <= *r),
        }
    }

    fn meets_disc(&self, center: Point, radius: f64) -> bool {
        match self {
            Window::All => true,
            Window::Balls(balls) => balls.iter().any(|(c, r)| c.dist(center) <= r + radius),
        }
    }

    fn bbox(&self, clip: Rect) -> Rect {
        match self {
            Window::All => clip,
            Window::Balls(balls) => {
                let mut acc: Option<Rect> = None;
                for (c, r) in balls {
                    let b = Rect::new(c.x - r, c.y - r, c.x + r, c.y + r);
                    acc = Some(match acc {
                        Some(a) => a.union(&b),
                        None => b,
                    });
                }
                acc.and_then(|b| b.intersect(&clip)).unwrap_or_else(|| {
                    let w = 1e-9 * (clip.x1 - clip.x0);
                    let h = 1e-9 * (clip.y1 - clip.y0);
                    Rect::new(clip.x0, clip.y0, clip.x0 + w, clip.y0 + h)
                })
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct QhGrid {
    domain: Arc<Domain>,
    stencil: Stencil,
    /// Level-0 lattice spacing.
    pitch: f64,
    quantum: f64,
    origin: Point,
    /// Deepest fully-populated base level so far (0 right after build).
    base_level: u32,
    nodes: Vec<Node>,
    adj: Vec<Vec<(u32, f64)>>,
    index: HashMap<Key, u32>,
    injected: HashMap<Key, u32>,
    /// Spatial hash with cell size `pitch`, for injection searches.
    buckets: HashMap<Key, Vec<u32>>,
}

/// Build a grid over the whole clip region of the domain at the given
/// base pitch, with graded refinement near the boundary.
pub fn build_grid(domain: Arc<Domain>, pitch: f64, stencil: Stencil) -> Result<QhGrid, GridError> {
    assert!(pitch > 0.0 && pitch.is_finite(), "pitch must be positive");
    let bbox = domain.bbox();
    let mut g = QhGrid {
        domain,
        stencil,
        pitch,
        quantum: pitch / (1u64 << LEVEL_SHIFT) as f64,
        origin: Point::new(bbox.x0, bbox.y0),
        base_level: 0,
        nodes: Vec::new(),
        adj: Vec::new(),
        index: HashMap::new(),
        injected: HashMap::new(),
        buckets: HashMap::new(),
    };
    g.extend(0, &Window::All);
    if g.nodes.is_empty() {
        return Err(GridError::EmptyGrid);
    }
    Ok(g)
}

impl QhGrid {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn node_point(&self, id: u32) -> Point {
        self.nodes[id as usize].p
    }

    pub fn node_delta(&self, id: u32) -> f64 {
        self.nodes[id as usize].delta
    }

    pub fn neighbors(&self, id: u32) -> &[(u32, f64)] {
        &self.adj[id as usize]
    }

    fn spacing(&self, level: u32) -> f64 {
        self.pitch / (1u64 << level) as f64
    }

    fn pos_of(&self, key: Key) -> Point {
        Point::new(
            self.origin.x + key.0 as f64 * self.quantum,
            self.origin.y + key.1 as f64 * self.quantum,
        )
    }

    fn key_of(&self, p: Point) -> Key {
        (
            ((p.x - self.origin.x) / self.quantum).round() as i64,
            ((p.y - self.origin.y) / self.quantum).round() as i64,
        )
    }

    fn bucket_key(&self, p: Point) -> Key {
        (
            ((p.x - self.origin.x) / self.pitch).floor() as i64,
            ((p.y - self.origin.y) / self.pitch).floor() as i64,
        )
    }

    fn push_node(&mut self, p: Point, delta: f64, key: Key) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node { p, delta, key });
        self.adj.push(Vec::new());
        self.buckets.entry(self.bucket_key(p)).or_default().push(id);
        id
    }

    /// Can a node with clearance `delta` carry level-`d` edges?
    /// Base levels connect everywhere; sub-levels only inside their band.
    fn level_active(&self, delta: f64, d: u32) -> bool {
        if d <= self.base_level {
            return true;
        }
        let s = self.spacing(d);
        delta < BAND_FACTOR * s && delta >= s / NODE_FLOOR_FACTOR
    }

    fn edge_exists(&self, a: u32, b: u32) -> bool {
        self.adj[a as usize].iter().any(|&(n, _)| n == b)
    }

    fn segment_clear_between(&self, a: Point, da: f64, b: Point, db: f64) -> bool {
        self.domain.segment_clear_with(a, b, da, db)
    }

    fn add_edge(&mut self, a: u32, b: u32) {
        let (na, nb) = (self.nodes[a as usize], self.nodes[b as usize]);
        let w = qh_segment_length_with(&self.domain, na.p, na.delta, nb.p, nb.delta);
        self.adj[a as usize].push((b, w));
        self.adj[b as usize].push((a, w));
    }

    /// Connect a lattice node to its stencil neighbors on every level where
    /// both endpoints are active. Each geometric pair belongs to exactly
    /// one level because stencil offsets are coprime.
    fn connect_lattice_node(&mut self, id: u32) {
        let node = self.nodes[id as usize];
        let tz = trailing(node.key.0).min(trailing(node.key.1));
        let d_min = LEVEL_SHIFT.saturating_sub(tz);
        let d_max = (self.base_level + FEATURE_DEPTH).min(LEVEL_SHIFT);
        for d in d_min..=d_max {
            if !self.level_active(node.delta, d) {
                continue;
            }
            let step = 1i64 << (LEVEL_SHIFT - d);
            for &(ox, oy) in self.stencil.offsets() {
                let nb_key = (node.key.0 + ox * step, node.key.1 + oy * step);
                let Some(&nb_id) = self.index.get(&nb_key) else { continue };
                let nb = self.nodes[nb_id as usize];
                if !self.level_active(nb.delta, d) || self.edge_exists(id, nb_id) {
                    continue;
                }
                if self.segment_clear_between(node.p, node.delta, nb.p, nb.delta) {
                    self.add_edge(id, nb_id);
                }
            }
        }
    }

    /// Lay the base lattice of `stage` and its graded sub-levels inside
    /// `window`, then wire all new nodes. Existing nodes and edges are
    /// kept, so estimates from the extended grid dominate previous ones.
    fn extend(&mut self, stage: u32, window: &Window) {
        self.base_level = self.base_level.max(stage);
        let clip = self.domain.bbox();
        let wb = window.bbox(clip);
        let s = self.spacing(stage);
        let step = 1i64 << (LEVEL_SHIFT - stage);

        let i0 = ((wb.x0 - self.origin.x) / s).floor() as i64;
        let i1 = ((wb.x1 - self.origin.x) / s).ceil() as i64;
        let j0 = ((wb.y0 - self.origin.y) / s).floor() as i64;
        let j1 = ((wb.y1 - self.origin.y) / s).ceil() as i64;

        let mut new_ids: Vec<u32> = Vec::new();
        for i in i0..=i1 {
            for j in j0..=j1 {
                let key = (i * step, j * step);
                let p = self.pos_of(key);
                if !self.index.contains_key(&key)
                    && window.contains(p)
                    && self.domain.truncation().admits(p)
                    && self.domain.classify(p) == PointClass::Inside
                {
                    let delta = self.domain.chain_distance(p);
                    let id = self.push_node(p, delta, key);
                    self.index.insert(key, id);
                    new_ids.push(id);
                }
            }
        }
        // Graded sub-levels, found by descending cells toward the boundary.
        for i in i0..=i1 {
            for j in j0..=j1 {
                self.descend_cell((i * step, j * step), stage, stage, window, &mut new_ids);
            }
        }
        for id in new_ids {
            self.connect_lattice_node(id);
        }
    }

    fn descend_cell(
        &mut self,
        corner: Key,
        level: u32,
        stage: u32,
        window: &Window,
        new_ids: &mut Vec<u32>,
    ) {
        // The full feature ladder is laid once, in the stage-0 build over
        // the whole domain; refinement stages only deepen the graded band
        // around the query, instead of rescanning every thin-feature shell
        // their window happens to touch.
        let depth_cap = if stage == 0 { FEATURE_DEPTH } else { GRADED_DEPTH };
        let child_level = level + 1;
        if child_level > stage + depth_cap {
            return;
        }
        let s = self.spacing(level);
        let s_child = self.spacing(child_level);
        let center = Point::new(
            self.pos_of(corner).x + s / 2.0,
            self.pos_of(corner).y + s / 2.0,
        );
        let cell_radius = s * std::f64::consts::FRAC_1_SQRT_2;
        if !window.meets_disc(center, cell_radius) {
            return;
        }
        // No deeper node can exist unless the band of the child level
        // reaches into this cell.
        let dist = self.domain.chain_distance(center);
        if dist - cell_radius > BAND_FACTOR * s_child {
            return;
        }
        // Beyond the graded depth, only thin features keep refining.
        if child_level > stage + GRADED_DEPTH
            && !self.domain.thin_feature(center, BAND_FACTOR * s_child + cell_radius)
        {
            return;
        }

        let half = 1i64 << (LEVEL_SHIFT - child_level);
        for di in 0..2i64 {
            for dj in 0..2i64 {
                let child_corner = (corner.0 + di * half, corner.1 + dj * half);
                self.try_sub_node(child_corner, child_level, window, new_ids);
                self.descend_cell(child_corner, child_level, stage, window, new_ids);
            }
        }
    }

    fn try_sub_node(&mut self, key: Key, level: u32, window: &Window, new_ids: &mut Vec<u32>) {
        if self.index.contains_key(&key) {
            return;
        }
        let p = self.pos_of(key);
        let s = self.spacing(level);
        if !window.contains(p) || !self.domain.truncation().admits(p) {
            return;
        }
        let delta = self.domain.chain_distance(p);
        if delta >= BAND_FACTOR * s || delta < s / NODE_FLOOR_FACTOR {
            return;
        }
        if self.domain.classify(p) != PointClass::Inside {
            return;
        }
        let id = self.push_node(p, delta, key);
        self.index.insert(key, id);
        new_ids.push(id);
    }

    /// Finest lattice spacing a point of clearance `delta` is served by.
    fn local_spacing(&self, delta: f64) -> f64 {
        let finest = self.spacing((self.base_level + FEATURE_DEPTH).min(LEVEL_SHIFT));
        let mut s = self.pitch;
        while s / 2.0 > finest && delta < BAND_FACTOR * (s / 2.0) {
            s /= 2.0;
        }
        s
    }

    /// Make the given points graph nodes, each connected to the visible
    /// lattice nodes within several local cell sizes (doubling the search
    /// radius when a wall hides all of them), and to each other where the
    /// connecting segment is clear. The generous radius matters: entry and
    /// exit hops are the one part of a path the lattice cannot refine, so
    /// the endpoints need enough candidate directions that a hop nearly
    /// tangent to the true geodesic is available. Injecting an existing
    /// node reuses it.
    pub fn inject_points(&mut self, pts: &[Point]) -> Result<Vec<u32>, GridError> {
        let mut ids = Vec::with_capacity(pts.len());
        for &p in pts {
            ids.push(self.inject_one(p)?);
        }
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                if a == b || self.edge_exists(a, b) {
                    continue;
                }
                let (na, nb) = (self.nodes[a as usize], self.nodes[b as usize]);
                if self.segment_clear_between(na.p, na.delta, nb.p, nb.delta) {
                    self.add_edge(a, b);
                }
            }
        }
        Ok(ids)
    }

    fn inject_one(&mut self, p: Point) -> Result<u32, GridError> {
        if self.domain.classify(p) != PointClass::Inside {
            return Err(GridError::PointNotInterior(p.x, p.y));
        }
        let key = self.key_of(p);
        if let Some(&id) = self.index.get(&key) {
            if self.nodes[id as usize].p.dist(p) <= self.quantum {
                return Ok(id);
            }
        }
        if let Some(&id) = self.injected.get(&key) {
            return Ok(id);
        }

        let delta = self.domain.chain_distance(p);
        let id = self.push_node(p, delta, key);
        self.injected.insert(key, id);

        let mut radius = 6.0 * self.local_spacing(delta);
        for _ in 0..12 {
            let mut candidates = self.nodes_within(p, radius, id);
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut connected = false;
            for (_, cand) in candidates {
                let nb = self.nodes[cand as usize];
                if self.segment_clear_between(p, delta, nb.p, nb.delta) {
                    self.add_edge(id, cand);
                    connected = true;
                }
            }
            if connected {
                return Ok(id);
            }
            radius *= 2.0;
        }
        // Leave the node isolated; path queries report Disconnected and
        // refinement retries at higher resolution.
        Ok(id)
    }

    fn nodes_within(&self, p: Point, radius: f64, exclude: u32) -> Vec<(f64, u32)> {
        let lo = self.bucket_key(Point::new(p.x - radius, p.y - radius));
        let hi = self.bucket_key(Point::new(p.x + radius, p.y + radius));
        let mut out = Vec::new();
        for bi in lo.0..=hi.0 {
            for bj in lo.1..=hi.1 {
                if let Some(ids) = self.buckets.get(&(bi, bj)) {
                    for &id in ids {
                        if id == exclude {
                            continue;
                        }
                        let d = self.nodes[id as usize].p.dist(p);
                        if d <= radius {
                            out.push((d, id));
                        }
                    }
                }
            }
        }
        out
    }

    fn id_of(&self, p: Point) -> Option<u32> {
        let key = self.key_of(p);
        if let Some(&id) = self.index.get(&key) {
            if self.nodes[id as usize].p.dist(p) <= self.quantum {
                return Some(id);
            }
        }
        self.injected.get(&key).copied()
    }

    /// Graph-shortest path between two previously injected (or lattice)
    /// points. The weight approximates the quasihyperbolic distance from
    /// above: it is the exact metric length of a restricted path class.
    pub fn shortest_path(&self, x: Point, y: Point) -> Result<(f64, PolyPath), GridError> {
        // Canonical endpoint order makes the query exactly symmetric.
        let swapped = (y.x, y.y) < (x.x, x.y);
        let (a, b) = if swapped { (y, x) } else { (x, y) };
        let src = self.id_of(a).ok_or(GridError::NotANode(a.x, a.y))?;
        let dst = self.id_of(b).ok_or(GridError::NotANode(b.x, b.y))?;
        let (w, mut pts) = self.astar(src, dst)?;
        if swapped {
            pts.reverse();
        }
        Ok((w, PolyPath::new(pts).expect("nonempty path")))
    }

    /// A* with an admissible, consistent heuristic: both the distance
    /// ratio metric and the log-clearance gap are lower bounds for the
    /// quasihyperbolic distance. Ties break on (weight, hops, node id).
    fn astar(&self, src: u32, dst: u32) -> Result<(f64, Vec<Point>), GridError> {
        if src == dst {
            return Ok((0.0, vec![self.nodes[src as usize].p]));
        }
        let target = self.nodes[dst as usize];
        let h = |n: &Node| -> f64 {
            let ratio_part = (n.p.dist(target.p) / n.delta.min(target.delta)).ln_1p();
            let log_part = (n.delta / target.delta).ln().abs();
            ratio_part.max(log_part)
        };

        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut hops = vec![u32::MAX; n];
        let mut parent = vec![u32::MAX; n];
        let mut settled = vec![false; n];
        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();

        dist[src as usize] = 0.0;
        hops[src as usize] = 0;
        heap.push(HeapEntry { f: h(&self.nodes[src as usize]), g: 0.0, hops: 0, id: src });

        while let Some(e) = heap.pop() {
            let u = e.id as usize;
            if settled[u] || e.g != dist[u] {
                continue;
            }
            settled[u] = true;
            if e.id == dst {
                break;
            }
            for &(v, w) in &self.adj[u] {
                let vi = v as usize;
                if settled[vi] {
                    continue;
                }
                let nd = dist[u] + w;
                let nh = hops[u] + 1;
                if nd < dist[vi] || (nd == dist[vi] && nh < hops[vi]) {
                    dist[vi] = nd;
                    hops[vi] = nh;
                    parent[vi] = e.id;
                    heap.push(HeapEntry {
                        f: nd + h(&self.nodes[vi]),
                        g: nd,
                        hops: nh,
                        id: v,
                    });
                }
            }
        }

        if !dist[dst as usize].is_finite() {
            return Err(GridError::Disconnected);
        }
        let mut pts = Vec::new();
        let mut cur = dst;
        loop {
            pts.push(self.nodes[cur as usize].p);
            if cur == src {
                break;
            }
            cur = parent[cur as usize];
        }
        pts.reverse();
        Ok((dist[dst as usize], pts))
    }

    /// Straighten a vertex path by replacing vertex runs with clear chords
    /// whenever that shortens the metric length. Each pass solves a
    /// shortest-path problem over subsequences of the current vertices
    /// (chords limited to a sliding window), so it picks the globally best
    /// combination of replacements inside the window rather than a greedy
    /// one; passes repeat because a reduced path brings distant vertices
    /// into window range. The result is still a genuine path in the domain,
    /// so its length still bounds the true distance from above.
    fn smooth_path(&self, pts: Vec<Point>) -> (f64, Vec<Point>) {
        let d = &self.domain;
        let mut v = pts;
        let mut deltas: Vec<f64> = v.iter().map(|p| d.chain_distance(*p)).collect();
        let mut weights: Vec<f64> = (0..v.len().saturating_sub(1))
            .map(|i| qh_segment_length_with(d, v[i], deltas[i], v[i + 1], deltas[i + 1]))
            .collect();

        for _ in 0..SMOOTH_PASSES {
            if v.len() < 3 {
                break;
            }
            let n = v.len();
            let old_total: f64 = weights.iter().sum();
            let mut best = vec![f64::INFINITY; n];
            let mut from = vec![usize::MAX; n];
            let mut hop = vec![0.0f64; n];
            best[0] = 0.0;
            for i in 0..n - 1 {
                let step = best[i] + weights[i];
                if step < best[i + 1] {
                    best[i + 1] = step;
                    from[i + 1] = i;
                    hop[i + 1] = weights[i];
                }
                let j_hi = (i + SMOOTH_WINDOW).min(n - 1);
                for j in i + 2..=j_hi {
                    if !self.segment_clear_between(v[i], deltas[i], v[j], deltas[j]) {
                        continue;
                    }
                    let chord = qh_segment_length_with(d, v[i], deltas[i], v[j], deltas[j]);
                    let cand = best[i] + chord;
                    if cand < best[j] {
                        best[j] = cand;
                        from[j] = i;
                        hop[j] = chord;
                    }
                }
            }
            let mut order = vec![n - 1];
            while *order.last().unwrap() != 0 {
                order.push(from[*order.last().unwrap()]);
            }
            order.reverse();
            let nv: Vec<Point> = order.iter().map(|&i| v[i]).collect();
            let nd: Vec<f64> = order.iter().map(|&i| deltas[i]).collect();
            let nw: Vec<f64> = order[1..].iter().map(|&i| hop[i]).collect();
            let done = nv.len() == v.len() && best[n - 1] >= old_total - 1e-15;
            v = nv;
            deltas = nd;
            weights = nw;
            if done {
                break;
            }
        }
        (weights.iter().sum(), v)
    }

    /// Slide each interior vertex of a path continuously to shorten the
    /// metric length of its two incident edges (a pattern search over
    /// compass directions with a shrinking step). This lifts the path off
    /// the lattice: the band structure caps the lattice resolution at a
    /// fixed fraction of the clearance, and the residual transverse
    /// quantization is exactly what relaxation removes. Every move is
    /// checked clear, so the result is still a genuine path in the domain.
    fn relax_path(&self, pts: Vec<Point>) -> (f64, Vec<Point>) {
        let d = &self.domain;
        // Subdividing an edge leaves the metric length unchanged, but gives
        // the relaxation interior vertices to act on: a bare chord (or a
        // long entry hop) has none, and bowing it toward the true geodesic
        // is exactly the improvement available off the lattice.
        let v = {
            let raw = pts;
            let rd: Vec<f64> = raw.iter().map(|p| d.chain_distance(*p)).collect();
            let mut pieces: Vec<usize> = (1..raw.len())
                .map(|i| {
                    let max_piece = 0.25 * rd[i - 1].min(rd[i]);
                    ((raw[i - 1].dist(raw[i]) / max_piece).ceil() as usize).clamp(1, 24)
                })
                .collect();
            let extra: usize = pieces.iter().map(|&p| p - 1).sum();
            let allowed = RELAX_VERTEX_BUDGET.saturating_sub(raw.len());
            if extra > allowed {
                for p in &mut pieces {
                    *p = 1 + (*p - 1) * allowed / extra;
                }
            }
            let mut sub = vec![raw[0]];
            for i in 1..raw.len() {
                let (a, b) = (raw[i - 1], raw[i]);
                for s in 1..pieces[i - 1] {
                    let t = s as f64 / pieces[i - 1] as f64;
                    sub.push(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
                }
                sub.push(b);
            }
            sub
        };
        let mut v = v;
        let mut deltas: Vec<f64> = v.iter().map(|p| d.chain_distance(*p)).collect();
        let mut weights: Vec<f64> = (0..v.len().saturating_sub(1))
            .map(|i| qh_segment_length_with(d, v[i], deltas[i], v[i + 1], deltas[i + 1]))
            .collect();
        if v.len() < 3 {
            return (weights.iter().sum(), v);
        }
        const SQ: f64 = std::f64::consts::FRAC_1_SQRT_2;
        let dirs: [(f64, f64); 8] = [
            (1.0, 0.0),
            (-1.0, 0.0),
            (0.0, 1.0),
            (0.0, -1.0),
            (SQ, SQ),
            (-SQ, SQ),
            (SQ, -SQ),
            (-SQ, -SQ),
        ];
        let rounds = if v.len() > 2 * RELAX_VERTEX_BUDGET { 2 } else { RELAX_ROUNDS };
        let eps = d.boundary_eps();
        for _ in 0..rounds {
            let mut any = false;
            for i in 1..v.len() - 1 {
                for frac in RELAX_STEPS {
                    let h = frac * deltas[i];
                    let cur = weights[i - 1] + weights[i];
                    let mut best: Option<(f64, Point, f64, f64, f64)> = None;
                    for (ex, ey) in dirs {
                        let t = Point::new(v[i].x + h * ex, v[i].y + h * ey);
                        let dt = d.chain_distance(t);
                        if dt < eps || !d.region_contains(t) {
                            continue;
                        }
                        if !self.segment_clear_between(v[i - 1], deltas[i - 1], t, dt)
                            || !self.segment_clear_between(t, dt, v[i + 1], deltas[i + 1])
                        {
                            continue;
                        }
                        let wl = qh_segment_length_with(d, v[i - 1], deltas[i - 1], t, dt);
                        let wr = qh_segment_length_with(d, t, dt, v[i + 1], deltas[i + 1]);
                        let total = wl + wr;
                        let beats = match &best {
                            Some((b, ..)) => total < *b,
                            None => total < cur - 1e-15,
                        };
                        if beats {
                            best = Some((total, t, dt, wl, wr));
                        }
                    }
                    if let Some((_, t, dt, wl, wr)) = best {
                        v[i] = t;
                        deltas[i] = dt;
                        weights[i - 1] = wl;
                        weights[i] = wr;
                        any = true;
                    }
                }
            }
            if !any {
                break;
            }
        }
        (weights.iter().sum(), v)
    }

    /// Per-level lattice degree of a node (test support): edges grouped by
    /// the dyadic level they connect at.
    #[cfg(test)]
    fn lattice_degree_by_level(&self, id: u32) -> HashMap<u32, usize> {
        let node = self.nodes[id as usize];
        let mut out: HashMap<u32, usize> = HashMap::new();
        for &(nb, _) in &self.adj[id as usize] {
            let other = self.nodes[nb as usize];
            if self.injected.values().any(|&v| v == nb) {
                continue;
            }
            let dk = (other.key.0 - node.key.0, other.key.1 - node.key.1);
            let tz = trailing(dk.0).min(trailing(dk.1));
            *out.entry(LEVEL_SHIFT - tz.min(LEVEL_SHIFT)).or_default() += 1;
        }
        out
    }
}

fn trailing(v: i64) -> u32 {
    if v == 0 {
        LEVEL_SHIFT
    } else {
        v.trailing_zeros()
    }
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    f: f64,
    g: f64,
    hops: u32,
    id: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // BinaryHeap is a max-heap; invert so the smallest (f, hops, id) pops.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.hops.cmp(&self.hops))
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Result of iterative refinement for one point pair.
#[derive(Debug, Clone)]
pub struct RefineOutcome {
    /// Best (smallest) path length found; never increases across levels.
    pub estimate: f64,
    pub path: PolyPath,
    /// Last successive-refinement difference plus the quadrature error
    /// indicator of the winning path; an error indicator only. The
    /// quadrature term keeps the indicator truthful for pairs the grid
    /// resolves to machine-level agreement, where the integration rule's
    /// own bias is the residual error.
    pub err_est: f64,
    /// False when the level cap was reached before estimates settled.
    pub converged: bool,
    pub levels_used: u32,
}

/// Refine around a point pair until successive estimates agree within
/// `rel_tol`, halving the base pitch each level inside a window that is
/// guaranteed to contain every candidate geodesic. The estimate is the
/// running minimum over levels, hence monotone by construction.
pub fn refine_until(
    base: &QhGrid,
    x: Point,
    y: Point,
    rel_tol: f64,
    max_level: u32,
) -> Result<RefineOutcome, GridError> {
    assert!(rel_tol > 0.0, "rel_tol must be positive");
    let domain = base.domain.clone();
    for p in [x, y] {
        if domain.classify(p) != PointClass::Inside {
            return Err(GridError::PointNotInterior(p.x, p.y));
        }
    }
    // Canonical endpoint order: the refinement windows are built around
    // the pair asymmetrically, so fixing the order makes the whole
    // computation exactly symmetric in the inputs.
    let swapped = (y.x, y.y) < (x.x, x.y);
    let (x, y) = if swapped { (y, x) } else { (x, y) };
    if x.dist(y) == 0.0 {
        return Ok(RefineOutcome {
            estimate: 0.0,
            path: PolyPath::new(vec![x]).expect("single vertex"),
            err_est: 0.0,
            converged: true,
            levels_used: 0,
        });
    }

    let dx = domain.chain_distance(x);
    let dy = domain.chain_distance(y);
    let sep = x.dist(y);

    let mut accum = base.clone();
    let mut best: Option<(f64, Vec<Point>)> = None;
    let mut prev_est: Option<f64> = None;
    let mut err_est = f64::INFINITY;

    for stage in 0..=max_level {
        if stage > 0 {
            let window = stage_window(&domain, x, dx, y, dy, sep, best.as_ref(), accum.spacing(stage));
            accum.extend(stage, &window);
        }
        let mut work = accum.clone();
        let ids = work.inject_points(&[x, y])?;
        let _ = ids;
        let raw = match work.shortest_path(x, y) {
            Ok((w, path)) => Some((w, path)),
            Err(GridError::Disconnected) => None,
            Err(e) => return Err(e),
        };
        if let Some((_, path)) = raw {
            let (_, spts) = work.smooth_path(path.vertices().to_vec());
            let (rw, rpts) = work.relax_path(spts);
            let improved = match &best {
                Some((bw, _)) => rw < *bw,
                None => true,
            };
            if improved {
                best = Some((rw, rpts));
            }
            let est = best.as_ref().unwrap().0;
            if let Some(pe) = prev_est {
                err_est = (pe - est).abs();
                if err_est <= rel_tol * est.max(f64::MIN_POSITIVE) {
                    let (bw, mut bp) = best.unwrap();
                    if swapped {
                        bp.reverse();
                    }
                    let err = err_est + quad_error_floor(&domain, &bp);
                    return Ok(RefineOutcome {
                        estimate: bw,
                        path: PolyPath::new(bp).expect("nonempty"),
                        err_est: err,
                        converged: true,
                        levels_used: stage,
                    });
                }
            }
            prev_est = Some(est);
        }
    }

    match best {
        Some((bw, mut bp)) => {
            if swapped {
                bp.reverse();
            }
            let err = if err_est.is_finite() {
                err_est + quad_error_floor(&domain, &bp)
            } else {
                bw
            };
            Ok(RefineOutcome {
                estimate: bw,
                path: PolyPath::new(bp).expect("nonempty"),
                err_est: err,
                converged: false,
                levels_used: max_level,
            })
        }
        None => Err(GridError::Disconnected),
    }
}

/// Integration-rule error indicator summed over a polygonal path, a
/// lower floor for any honest error report: even a perfectly resolved
/// path carries this much quadrature uncertainty in its length.
fn quad_error_floor(d: &Domain, v: &[Point]) -> f64 {
    let mut total = 0.0;
    for pair in v.windows(2) {
        let da = d.chain_distance(pair[0]);
        let db = d.chain_distance(pair[1]);
        total += qh_segment_quad_error_with(d, pair[0], da, pair[1], db);
    }
    total
}

/// Window for the next refinement stage. With an upper bound `K` on the
/// distance, every point z of a candidate geodesic satisfies both
/// `|x-z| <= delta(x) (e^a - 1)` and `|y-z| <= delta(y) (e^(K-a) - 1)`
/// for its partial length a, so a ball around x of the maximized minimum
/// contains all of them. When that ball degenerates to the whole domain,
/// a tube around the current best path is used instead; and before any
/// estimate exists, a generous ball around the pair.
fn stage_window(
    domain: &Domain,
    x: Point,
    dx: f64,
    y: Point,
    dy: f64,
    sep: f64,
    best: Option<&(f64, Vec<Point>)>,
    s_stage: f64,
) -> Window {
    let diag = domain.bbox().diagonal();
    let pad = 8.0 * s_stage;
    match best {
        Some((k_ub, path)) => {
            let r = geodesic_ball_radius(dx, dy, sep, *k_ub) * 1.5 + pad;
            if r <= 0.75 * diag {
                Window::Balls(vec![(x, r), (y, r.min(sep + r))])
            } else {
                let step = (path.len() / 32).max(1);
                let samples: Vec<Point> = path
                    .iter()
                    .step_by(step)
                    .chain(std::iter::once(path.last().unwrap()))
                    .copied()
                    .collect();
                let mut balls = Vec::with_capacity(samples.len());
                for (i, p) in samples.iter().enumerate() {
                    let gap = if i + 1 < samples.len() { p.dist(samples[i + 1]) } else { 0.0 };
                    let r = 0.35 * domain.chain_distance(*p) + gap + pad;
                    balls.push((*p, r));
                }
                Window::Balls(balls)
            }
        }
        None => {
            let r = 4.0 * (sep + dx + dy) + 256.0 * s_stage;
            Window::Balls(vec![(x, r), (y, r)])
        }
    }
}

/// max over a in [0, K] of min(dx (e^a - 1), sep + dy (e^(K-a) - 1)),
/// found by bisection on the crossing of the increasing and decreasing
/// branches.
fn geodesic_ball_radius(dx: f64, dy: f64, sep: f64, k_ub: f64) -> f64 {
    let k = k_ub.min(50.0);
    let f = |a: f64| dx * a.exp_m1();
    let g = |a: f64| sep + dy * (k - a).exp_m1();
    if f(k) <= g(k) {
        return f(k).max(sep);
    }
    if f(0.0) >= g(0.0) {
        return g(0.0).max(sep);
    }
    let (mut lo, mut hi) = (0.0f64, k);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= g(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    f(lo).max(sep)
}
