//! Pointed quadrangulations with a boundary and their coding by a Dyck path
//! carrying one well-labeled tree per descending step.
//!
//! Maps are rotation systems on darts: dart `d` and `d ^ 1` are the two
//! orientations of one edge, and each vertex lists its outgoing darts in
//! cyclic order. Faces are traced by `face_next(d) = rot_next(d ^ 1)`.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodingError {
    #[error("invalid object: {0}")]
    Invalid(String),
    #[error("enumeration window too large: n={n}, p={p}")]
    ScaleGuard { n: usize, p: usize },
}

/// One invariant violation reported by the `validate_*` functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation(pub String);

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn violation(v: &mut Vec<Violation>, msg: String) {
    v.push(Violation(msg));
}

/// Plane tree stored in preorder: `labels[i]` and number of children
/// `degrees[i]` of the i-th vertex visited.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WellLabeledTree {
    labels: Vec<i64>,
    degrees: Vec<u32>,
}

impl WellLabeledTree {
    pub fn single(label: i64) -> Self {
        WellLabeledTree { labels: vec![label], degrees: vec![0] }
    }

    /// Builds a tree from its preorder labels and child counts. The shape must
    /// be a single plane tree.
    pub fn from_preorder(labels: Vec<i64>, degrees: Vec<u32>) -> Result<Self, CodingError> {
        if labels.is_empty() || labels.len() != degrees.len() {
            return Err(CodingError::Invalid(String::from("preorder arrays must be nonempty and of equal length")));
        }
        let mut open: i64 = 1;
        for (i, &k) in degrees.iter().enumerate() {
            if open == 0 {
                return Err(CodingError::Invalid(format!("preorder closes before vertex {}", i)));
            }
            open += k as i64 - 1;
        }
        if open != 0 {
            return Err(CodingError::Invalid(String::from("preorder does not close")));
        }
        Ok(WellLabeledTree { labels, degrees })
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn root_label(&self) -> i64 {
        self.labels[0]
    }

    pub fn num_edges(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn min_label(&self) -> i64 {
        *self.labels.iter().min().unwrap()
    }

    /// Parent of each preorder index (`usize::MAX` for the root).
    pub fn parents(&self) -> Vec<usize> {
        let mut parent = vec![usize::MAX; self.labels.len()];
        let mut stack: Vec<(usize, u32)> = Vec::new();
        for i in 0..self.labels.len() {
            while let Some(top) = stack.last_mut() {
                if top.1 == 0 {
                    stack.pop();
                } else {
                    top.1 -= 1;
                    parent[i] = top.0;
                    break;
                }
            }
            stack.push((i, self.degrees[i]));
        }
        parent
    }

    /// Children of each vertex, in plane order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.labels.len()];
        for (i, &p) in self.parents().iter().enumerate() {
            if p != usize::MAX {
                ch[p].push(i);
            }
        }
        ch
    }

    /// Preorder indices of the corners met along the contour: a vertex with k
    /// children contributes k + 1 corners.
    pub fn contour_corners(&self) -> Vec<usize> {
        let ch = self.children();
        let mut out = Vec::with_capacity(2 * self.labels.len());
        let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
        out.push(0);
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < ch[v].len() {
                let c = ch[v][*next];
                *next += 1;
                out.push(c);
                stack.push((c, 0));
            } else {
                stack.pop();
                if let Some(&(u, _)) = stack.last() {
                    out.push(u);
                }
            }
        }
        out
    }

    /// Adds `delta` to every label.
    pub fn shifted(&self, delta: i64) -> Self {
        WellLabeledTree { labels: self.labels.iter().map(|l| l + delta).collect(), degrees: self.degrees.clone() }
    }
}

/// Dyck path from a minimum of the boundary sequence, plus one tree per
/// descent, the tree at a descent h -> h-1 having root label h + base.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryCode {
    pub base: usize,
    pub steps: Vec<i8>,
    pub trees: Vec<WellLabeledTree>,
}

impl BoundaryCode {
    pub fn half_perimeter(&self) -> usize {
        self.steps.len() / 2
    }

    pub fn area(&self) -> usize {
        self.trees.iter().map(|t| t.num_edges()).sum()
    }

    /// Heights h_0 = 0, ..., h_{2p}.
    pub fn heights(&self) -> Vec<i64> {
        let mut h = Vec::with_capacity(self.steps.len() + 1);
        h.push(0i64);
        for &s in &self.steps {
            h.push(h[h.len() - 1] + s as i64);
        }
        h
    }

    /// Step indices i with h_i > h_{i+1}, in path order.
    pub fn descents(&self) -> Vec<usize> {
        (0..self.steps.len()).filter(|&i| self.steps[i] < 0).collect()
    }

    /// Origin-boundary distance of the coded map.
    pub fn distance_to_boundary(&self) -> usize {
        self.base
    }
}

pub fn validate_tree(t: &WellLabeledTree) -> Vec<Violation> {
    let mut v = Vec::new();
    for (i, &l) in t.labels.iter().enumerate() {
        if l < 1 {
            violation(&mut v, format!("vertex {} has label {} < 1", i, l));
        }
    }
    for (i, &p) in t.parents().iter().enumerate() {
        if p != usize::MAX && (t.labels[i] - t.labels[p]).abs() > 1 {
            violation(&mut v, format!("edge {}-{} has labels {} and {}", p, i, t.labels[p], t.labels[i]));
        }
    }
    v
}

pub fn validate_code(c: &BoundaryCode) -> Vec<Violation> {
    let mut v = Vec::new();
    if c.steps.is_empty() || c.steps.len() % 2 == 1 {
        violation(&mut v, format!("path length {} is not a positive even number", c.steps.len()));
        return v;
    }
    if c.steps.iter().any(|&s| s != 1 && s != -1) {
        violation(&mut v, String::from("steps must be +1 or -1"));
        return v;
    }
    let h = c.heights();
    if h.iter().any(|&x| x < 0) {
        violation(&mut v, String::from("path goes below 0"));
    }
    if h[h.len() - 1] != 0 {
        violation(&mut v, String::from("path does not return to 0"));
    }
    let desc = c.descents();
    if desc.len() != c.trees.len() {
        violation(&mut v, format!("{} descents but {} trees", desc.len(), c.trees.len()));
        return v;
    }
    for (k, (&i, t)) in desc.iter().zip(&c.trees).enumerate() {
        for e in validate_tree(t) {
            violation(&mut v, format!("tree {}: {}", k, e));
        }
        let want = h[i] + c.base as i64;
        if t.root_label() != want {
            violation(&mut v, format!("tree {} has root label {}, expected {}", k, t.root_label(), want));
        }
    }
    if c.base >= 1 {
        // boundary vertices at height 0 are tree vertices too, so the
        // minimum is taken over tree labels only
        let m = c.trees.iter().map(|t| t.min_label()).min().unwrap();
        if m != 1 {
            violation(&mut v, format!("global minimum label is {}, expected 1", m));
        }
    }
    v
}

/// Rotation-system map with a root dart and an optional origin vertex.
/// The external face is the face containing the twin of the root dart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadMap {
    rot: Vec<Vec<usize>>,
    tail: Vec<usize>,
    pos: Vec<usize>,
    root: usize,
    origin: Option<usize>,
}

impl QuadMap {
    /// `rot[v]` lists the darts leaving v in cyclic order; darts `2e` and
    /// `2e + 1` form edge e.
    pub fn from_rotation(rot: Vec<Vec<usize>>, root: usize, origin: Option<usize>) -> Result<Self, CodingError> {
        let nd: usize = rot.iter().map(|r| r.len()).sum();
        if nd % 2 == 1 {
            return Err(CodingError::Invalid(String::from("odd number of darts")));
        }
        let mut tail = vec![usize::MAX; nd];
        let mut pos = vec![usize::MAX; nd];
        for (v, r) in rot.iter().enumerate() {
            for (i, &d) in r.iter().enumerate() {
                if d >= nd || tail[d] != usize::MAX {
                    return Err(CodingError::Invalid(format!("dart {} missing or repeated", d)));
                }
                tail[d] = v;
                pos[d] = i;
            }
        }
        if root >= nd {
            return Err(CodingError::Invalid(String::from("root dart out of range")));
        }
        if origin.map_or(false, |o| o >= rot.len()) {
            return Err(CodingError::Invalid(String::from("origin out of range")));
        }
        Ok(QuadMap { rot, tail, pos, root, origin })
    }

    pub fn num_vertices(&self) -> usize {
        self.rot.len()
    }

    pub fn num_edges(&self) -> usize {
        self.tail.len() / 2
    }

    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rot[v]
    }

    pub fn tail(&self, d: usize) -> usize {
        self.tail[d]
    }

    pub fn head(&self, d: usize) -> usize {
        self.tail[d ^ 1]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn origin(&self) -> Option<usize> {
        self.origin
    }

    pub fn with_origin(mut self, origin: Option<usize>) -> Self {
        self.origin = origin;
        self
    }

    pub fn with_root(mut self, root: usize) -> Self {
        self.root = root;
        self
    }

    pub fn rot_next(&self, d: usize) -> usize {
        let r = &self.rot[self.tail[d]];
        r[(self.pos[d] + 1) % r.len()]
    }

    pub fn face_next(&self, d: usize) -> usize {
        self.rot_next(d ^ 1)
    }

    /// Darts of the face containing d, starting at d.
    pub fn face_of(&self, d: usize) -> Vec<usize> {
        let mut out = vec![d];
        let mut e = self.face_next(d);
        while e != d {
            out.push(e);
            e = self.face_next(e);
        }
        out
    }

    /// Every face once, as dart cycles; the external face comes first.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.tail.len()];
        let mut out = Vec::new();
        let start = core::iter::once(self.root ^ 1).chain(0..self.tail.len());
        for d in start {
            if seen[d] {
                continue;
            }
            let f = self.face_of(d);
            for &e in &f {
                seen[e] = true;
            }
            out.push(f);
        }
        out
    }

    /// Darts of the external face, starting at the twin of the root.
    pub fn external_face(&self) -> Vec<usize> {
        self.face_of(self.root ^ 1)
    }

    pub fn half_perimeter(&self) -> usize {
        self.external_face().len() / 2
    }

    pub fn area(&self) -> usize {
        self.faces().len() - 1
    }

    /// Breadth-first distances from `source` (`usize::MAX` if unreachable).
    pub fn bfs(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.rot.len()];
        dist[source] = 0;
        let mut q = VecDeque::from([source]);
        while let Some(v) = q.pop_front() {
            for &d in &self.rot[v] {
                let w = self.head(d);
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
            }
        }
        dist
    }

    /// Isomorphism invariant of the rooted, pointed map: dart relabeling by
    /// breadth-first search from the root.
    pub fn canonical_form(&self) -> Vec<usize> {
        let nd = self.tail.len();
        let mut id = vec![usize::MAX; nd];
        let mut order = Vec::with_capacity(nd);
        id[self.root] = 0;
        order.push(self.root);
        let mut k = 0;
        while k < order.len() {
            let d = order[k];
            k += 1;
            for e in [self.rot_next(d), d ^ 1] {
                if id[e] == usize::MAX {
                    id[e] = order.len();
                    order.push(e);
                }
            }
        }
        let mut out = Vec::with_capacity(2 * nd + 1);
        for &d in &order {
            out.push(id[self.rot_next(d)]);
            out.push(id[d ^ 1]);
        }
        let o = self.origin.map_or(usize::MAX, |o| self.rot[o].iter().map(|&d| id[d]).min().unwrap_or(usize::MAX));
        out.push(o);
        out
    }
}

pub fn validate_map(m: &QuadMap) -> Vec<Violation> {
    let mut v = Vec::new();
    let nv = m.num_vertices();
    if nv == 0 {
        violation(&mut v, String::from("empty map"));
        return v;
    }
    let dist = m.bfs(0);
    if dist.iter().any(|&d| d == usize::MAX) {
        violation(&mut v, String::from("map is not connected"));
        return v;
    }
    for d in 0..m.tail.len() {
        if (dist[m.tail(d)] + dist[m.head(d)]) % 2 == 0 {
            violation(&mut v, format!("edge of dart {} joins vertices of equal parity", d));
            break;
        }
    }
    let faces = m.faces();
    let (e, f) = (m.num_edges() as i64, faces.len() as i64);
    if nv as i64 - e + f != 2 {
        violation(&mut v, format!("Euler characteristic V - E + F = {} - {} + {} != 2", nv, e, f));
    }
    for (i, face) in faces.iter().enumerate().skip(1) {
        if face.len() != 4 {
            violation(&mut v, format!("inner face {} has degree {}", i, face.len()));
        }
    }
    if faces[0].len() % 2 == 1 {
        violation(&mut v, format!("external face has odd degree {}", faces[0].len()));
    }
    v
}

/// Rebuilds the pointed map coded by `c`. The origin is vertex 0, tree
/// vertices follow in tree order and preorder, and the root dart is the
/// boundary edge from the opening minimum to the next boundary vertex.
pub fn decode(c: &BoundaryCode) -> Result<QuadMap, CodingError> {
    let bad = validate_code(c);
    if !bad.is_empty() {
        return Err(CodingError::Invalid(format!("{}", bad[0])));
    }
    // corners of the mobile along its contour: (vertex, label)
    let mut corners: Vec<(usize, i64)> = Vec::with_capacity(2 * c.area() + c.trees.len());
    let mut root_first = Vec::with_capacity(c.trees.len());
    let mut root_last = Vec::with_capacity(c.trees.len());
    let mut next_vertex = 1usize;
    for t in &c.trees {
        root_first.push(corners.len());
        for i in t.contour_corners() {
            corners.push((next_vertex + i, t.labels[i]));
        }
        root_last.push(corners.len() - 1);
        next_vertex += t.labels.len();
    }
    let nv = next_vertex;
    let nc = corners.len();

    // successor of each corner: first later corner (cyclically) with label one less
    let max_label = corners.iter().map(|x| x.1).max().unwrap() as usize;
    let mut last_seen = vec![usize::MAX; max_label + 2];
    let mut succ = vec![usize::MAX; nc];
    for k in (0..2 * nc).rev() {
        let i = k % nc;
        let l = corners[i].1 as usize;
        if k < nc && l >= 2 {
            succ[i] = last_seen[l - 1];
        }
        last_seen[l] = i;
    }

    // edge i is the arc leaving corner i: dart 2i at its corner, 2i+1 at its target
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); nc];
    let mut at_origin = Vec::new();
    for i in 0..nc {
        if succ[i] == usize::MAX {
            at_origin.push(2 * i + 1);
        } else {
            incoming[succ[i]].push(i);
        }
    }
    let mut rot: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for i in 0..nc {
        let inc = &mut incoming[i];
        inc.sort_by_key(|&j| (i + nc - j) % nc);
        let v = corners[i].0;
        for &j in inc.iter() {
            rot[v].push(2 * j + 1);
        }
        rot[v].push(2 * i);
    }
    at_origin.reverse();
    rot[0] = at_origin;

    // external face: at the first root, between the last dart of its last
    // corner and the first dart of its first corner
    let x = 2 * root_last[0];
    let r0 = corners[root_first[0]].0;
    let map = QuadMap::from_rotation(rot, 0, Some(0))?;
    debug_assert_eq!(map.tail(x), r0);
    let y = map.rot_next(x);
    // the face walk from y runs backwards along the path from the first descent
    let two_p = c.steps.len();
    let a = c.descents()[0];
    let mut e = y;
    for _ in 0..(a + two_p - 1) % two_p {
        e = map.face_next(e);
    }
    Ok(map.with_root(e ^ 1))
}

/// Inverse of [`decode`]: the map needs an origin and a root dart leaving a
/// boundary vertex closest to the origin, with its twin on the external face.
pub fn encode(m: &QuadMap) -> Result<BoundaryCode, CodingError> {
    let bad = validate_map(m);
    if !bad.is_empty() {
        return Err(CodingError::Invalid(format!("{}", bad[0])));
    }
    let origin = m.origin.ok_or_else(|| CodingError::Invalid(String::from("map has no origin")))?;
    let label = m.bfs(origin);
    let ext = m.external_face();
    let two_p = ext.len();
    // path vertex j sits at walk position (1 - j) mod 2p
    let path_vertex = |j: usize| m.tail(ext[(two_p + 1 - j % two_p) % two_p]);
    let base = label[path_vertex(0)];
    if ext.iter().any(|&d| label[m.tail(d)] < base) || label[path_vertex(1)] != base + 1 {
        return Err(CodingError::Invalid(String::from("root dart does not leave a closest boundary vertex upwards")));
    }
    let steps: Vec<i8> = (0..two_p)
        .map(|j| if label[path_vertex(j + 1)] > label[path_vertex(j)] { 1 } else { -1 })
        .collect();

    // mobile edges, stored per vertex as (rotation position of the sector dart, neighbour)
    let nv = m.num_vertices();
    let mut mobile: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for face in m.faces().iter().skip(1) {
        let k = face.len();
        let mut ends = Vec::with_capacity(2);
        for i in 0..k {
            let prev = face[(i + k - 1) % k];
            let v = m.tail(face[i]);
            if label[m.tail(prev)] < label[v] {
                ends.push((m.pos[prev ^ 1], v));
            }
        }
        if ends.len() != 2 {
            return Err(CodingError::Invalid(String::from("face without a well-defined mobile edge")));
        }
        mobile[ends[0].1].push((ends[0].0, ends[1].1));
        mobile[ends[1].1].push((ends[1].0, ends[0].1));
    }

    let mut trees = Vec::new();
    for j in 0..two_p {
        if steps[j] > 0 {
            continue;
        }
        // external-face sector at the root: walk position w arrives at the root
        let w = (two_p + 1 - j) % two_p;
        let arriving = ext[(w + two_p - 1) % two_p];
        let root = m.tail(ext[w]);
        let mut labels = Vec::new();
        let mut degrees = Vec::new();
        // (vertex, sector position of the edge towards the parent)
        let mut stack = vec![(root, m.pos[arriving ^ 1])];
        while let Some((v, start)) = stack.pop() {
            let deg = m.rot[v].len();
            let mut kids: Vec<(usize, usize)> = mobile[v]
                .iter()
                .filter(|&&(s, _)| s != start)
                .map(|&(s, u)| ((s + deg - start) % deg, u))
                .collect();
            kids.sort_unstable();
            labels.push(label[v] as i64);
            degrees.push(kids.len() as u32);
            for &(_, u) in kids.iter().rev() {
                let back = mobile[u].iter().find(|&&(_, w2)| w2 == v).map(|&(s, _)| s).unwrap();
                stack.push((u, back));
            }
        }
        trees.push(WellLabeledTree { labels, degrees });
    }
    let code = BoundaryCode { base, steps, trees };
    let bad = validate_code(&code);
    if !bad.is_empty() {
        return Err(CodingError::Invalid(format!("encoded sequence is invalid: {}", bad[0])));
    }
    Ok(code)
}

/// All well-labeled trees with m edges, root label `root` and labels >= `min`.
pub fn enumerate_trees(m: usize, root: i64, min: i64) -> Vec<WellLabeledTree> {
    // a tree is a root followed by an ordered forest; build forests recursively
    fn forest(m: usize, parent: i64, min: i64) -> Vec<(Vec<i64>, Vec<u32>, u32)> {
        if m == 0 {
            return vec![(Vec::new(), Vec::new(), 0)];
        }
        let mut out = Vec::new();
        for first in 0..m {
            for l in parent - 1..=parent + 1 {
                if l < min {
                    continue;
                }
                let heads = forest(first, l, min);
                let rests = forest(m - 1 - first, parent, min);
                for (hl, hd, hk) in &heads {
                    for (rl, rd, rk) in &rests {
                        let mut labels = vec![l];
                        labels.extend_from_slice(hl);
                        labels.extend_from_slice(rl);
                        let mut degs = vec![*hk];
                        degs.extend_from_slice(hd);
                        degs.extend_from_slice(rd);
                        out.push((labels, degs, rk + 1));
                    }
                }
            }
        }
        out
    }
    if root < min {
        return Vec::new();
    }
    forest(m, root, min)
        .into_iter()
        .map(|(l, d, k)| {
            let mut labels = vec![root];
            labels.extend(l);
            let mut degrees = vec![k];
            degrees.extend(d);
            WellLabeledTree { labels, degrees }
        })
        .collect()
}

/// All Dyck paths of length 2p as step vectors.
pub fn enumerate_dyck(p: usize) -> Vec<Vec<i8>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(2 * p);
    fn rec(cur: &mut Vec<i8>, h: usize, ups: usize, p: usize, out: &mut Vec<Vec<i8>>) {
        if cur.len() == 2 * p {
            out.push(cur.clone());
            return;
        }
        if ups < p {
            cur.push(1);
            rec(cur, h + 1, ups + 1, p, out);
            cur.pop();
        }
        if h > 0 {
            cur.push(-1);
            rec(cur, h - 1, ups, p, out);
            cur.pop();
        }
    }
    rec(&mut cur, 0, 0, p, &mut out);
    out
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Largest window accepted by the exhaustive enumerators.
pub const ENUMERATION_LIMIT: (usize, usize) = (6, 5);

/// Codes with a fixed base, all tree labels >= 1 and no global-minimum
/// condition. These are the objects counted by W_base.
pub fn enumerate_codes_at_base(n: usize, p: usize, base: usize) -> Result<Vec<BoundaryCode>, CodingError> {
    if n > ENUMERATION_LIMIT.0 || p > ENUMERATION_LIMIT.1 || p == 0 {
        return Err(CodingError::ScaleGuard { n, p });
    }
    let mut memo: alloc::collections::BTreeMap<(usize, i64), Vec<WellLabeledTree>> = Default::default();
    let mut out = Vec::new();
    for steps in enumerate_dyck(p) {
        let code0 = BoundaryCode { base, steps, trees: Vec::new() };
        let h = code0.heights();
        let roots: Vec<i64> = code0.descents().iter().map(|&i| h[i] + base as i64).collect();
        for comp in compositions(n, roots.len()) {
            for (&m, &r) in comp.iter().zip(&roots) {
                memo.entry((m, r)).or_insert_with(|| enumerate_trees(m, r, 1));
            }
            let lists: Vec<&Vec<WellLabeledTree>> = comp.iter().zip(&roots).map(|(&m, &r)| &memo[&(m, r)]).collect();
            let mut idx = vec![0usize; lists.len()];
            if lists.iter().any(|l| l.is_empty()) {
                continue;
            }
            loop {
                let trees = idx.iter().zip(&lists).map(|(&i, l)| l[i].clone()).collect();
                out.push(BoundaryCode { base, steps: code0.steps.clone(), trees });
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] < lists[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// Every valid code at (n, p), one per pointed map with a marked closest
/// boundary edge.
pub fn enumerate_codes(n: usize, p: usize) -> Result<Vec<BoundaryCode>, CodingError> {
    let mut out = Vec::new();
    for base in 0..=n {
        for c in enumerate_codes_at_base(n, p, base)? {
            if validate_code(&c).is_empty() {
                out.push(c);
            }
        }
    }
    Ok(out)
}
