//! Labeled weighted bi-colored plane forests as ribbon graphs.
//!
//! A plane embedding is recorded combinatorially: every vertex carries the
//! cyclic anticlockwise order of its incident edges. For full passports the
//! labels are distinct, so isomorphism reduces to equality of the labeled
//! structure with rotations compared up to cyclic shift; `canonical_form`
//! picks a distinguished shift and serializes.
//!
//! `fold` inverts the combing map: given a twice-marked tree it reads off
//! the unique permutation whose combing returns the tree. The x-order of
//! vertices is produced by recursively interleaving subtrees along the mark
//! path; `fold_layout` additionally realizes the nested-rectangle picture
//! with exact coordinates (widths shrink by powers of 3), which the renderer
//! consumes. Both routes must order vertices identically.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::passport::FullPassport;
use crate::permutation::Permutation;
use crate::weight::{format_rational, parse_rational};

/// One edge of the forest; endpoints are canonical positions.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub black: usize,
    pub white: usize,
    pub weight: BigRational,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.black {
            self.white
        } else {
            self.black
        }
    }
}

/// A labeled weighted bi-colored plane forest, optionally twice-marked.
#[derive(Clone, Debug)]
pub struct PlaneForest {
    passport: Arc<FullPassport>,
    edges: Vec<Edge>,
    // anticlockwise cyclic order of incident edge ids, per vertex position
    rotation: Vec<Vec<usize>>,
    marks: Option<(usize, usize)>,
}

impl PlaneForest {
    /// Validates and builds. Each malformed input is reported distinctly:
    /// same-color edges, nonpositive weights, parallel edges, cycles,
    /// rotation/incidence disagreement, vertex-weight mismatch, bad marks.
    pub fn new(
        passport: Arc<FullPassport>,
        edges: Vec<Edge>,
        rotation: Vec<Vec<usize>>,
        marks: Option<(usize, usize)>,
    ) -> Result<Self> {
        let n = passport.n();
        for (id, e) in edges.iter().enumerate() {
            if e.black >= n || e.white >= n {
                return Err(Error::UnknownLabel(format!("edge {id} endpoint")));
            }
            if !passport.is_black(e.black) || passport.is_black(e.white) {
                return Err(Error::SameColorEdge(id));
            }
            if !e.weight.is_positive() {
                return Err(Error::NonpositiveEdgeWeight(id));
            }
        }
        let mut seen_pairs = std::collections::HashSet::new();
        for e in &edges {
            if !seen_pairs.insert((e.black, e.white)) {
                return Err(Error::ParallelEdges(
                    passport.label_token(e.black),
                    passport.label_token(e.white),
                ));
            }
        }
        // forests have no cycles; union-find over endpoints
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for e in &edges {
            let (a, b) = (find(&mut parent, e.black), find(&mut parent, e.white));
            if a == b {
                return Err(Error::CyclicGraph);
            }
            parent[a] = b;
        }
        if rotation.len() != n {
            return Err(Error::RotationMismatch("rotation table size".into()));
        }
        for v in 0..n {
            let mut incident: Vec<usize> = edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.black == v || e.white == v)
                .map(|(id, _)| id)
                .collect();
            let mut listed = rotation[v].clone();
            incident.sort_unstable();
            listed.sort_unstable();
            if incident != listed {
                return Err(Error::RotationMismatch(passport.label_token(v)));
            }
        }
        for v in 0..n {
            let incident_sum: BigRational = edges
                .iter()
                .filter(|e| e.black == v || e.white == v)
                .map(|e| e.weight.clone())
                .sum();
            let signed = if passport.is_black(v) {
                incident_sum
            } else {
                -incident_sum
            };
            if &signed != passport.weight(v) {
                return Err(Error::WeightMismatch(
                    passport.label_token(v),
                    format_rational(passport.weight(v)),
                    format_rational(&signed),
                ));
            }
        }
        if let Some((a, b)) = marks {
            if a >= n || b >= n || a == b {
                return Err(Error::BadMarks);
            }
        }
        Ok(PlaneForest { passport, edges, rotation, marks })
    }

    pub fn passport(&self) -> &Arc<FullPassport> {
        &self.passport
    }

    pub fn n(&self) -> usize {
        self.passport.n()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rotation[v]
    }

    pub fn marks(&self) -> Option<(usize, usize)> {
        self.marks
    }

    pub fn with_marks(&self, a: usize, b: usize) -> Result<Self> {
        PlaneForest::new(
            self.passport.clone(),
            self.edges.clone(),
            self.rotation.clone(),
            Some((a, b)),
        )
    }

    pub fn without_marks(&self) -> Self {
        let mut f = self.clone();
        f.marks = None;
        f
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut comp = vec![usize::MAX; n];
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.black].push(e.white);
            adj[e.white].push(e.black);
        }
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut todo = vec![start];
            let mut members = Vec::new();
            comp[start] = id;
            while let Some(v) = todo.pop() {
                members.push(v);
                for &w in &adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        todo.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// The unique simple path between two vertices of a connected forest.
    pub fn path_between(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        if a == b || a >= self.n() || b >= self.n() {
            return Err(Error::BadMarks);
        }
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.n()]; // (vertex, edge)
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.n()];
        for (id, e) in self.edges.iter().enumerate() {
            adj[e.black].push((e.white, id));
            adj[e.white].push((e.black, id));
        }
        let mut todo = std::collections::VecDeque::from([a]);
        let mut seen = vec![false; self.n()];
        seen[a] = true;
        while let Some(v) = todo.pop_front() {
            if v == b {
                break;
            }
            for &(w, id) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    prev[w] = Some((v, id));
                    todo.push_back(w);
                }
            }
        }
        if !seen[b] {
            return Err(Error::Disconnected);
        }
        let mut path = vec![b];
        let mut v = b;
        while let Some((u, _)) = prev[v] {
            path.push(u);
            v = u;
        }
        path.reverse();
        Ok(path)
    }

    fn path_with_edges(&self, a: usize, b: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        let path = self.path_between(a, b)?;
        let mut edge_of = HashMap::new();
        for (id, e) in self.edges.iter().enumerate() {
            edge_of.insert((e.black, e.white), id);
            edge_of.insert((e.white, e.black), id);
        }
        let edges = path
            .windows(2)
            .map(|w| edge_of[&(w[0], w[1])])
            .collect();
        Ok((path, edges))
    }

    /// Rotation at `v` read from `from_edge` (exclusive), anticlockwise or
    /// clockwise, returning the remaining incident edges in encounter order.
    fn read_rotation(&self, v: usize, from_edge: usize, anticlockwise: bool) -> Vec<usize> {
        let rot = &self.rotation[v];
        let k = rot.len();
        let start = rot
            .iter()
            .position(|&e| e == from_edge)
            .expect("edge incident to vertex");
        let mut out = Vec::with_capacity(k - 1);
        for step in 1..k {
            let idx = if anticlockwise {
                (start + step) % k
            } else {
                (start + k - step) % k
            };
            out.push(rot[idx]);
        }
        out
    }

    /// Serialization invariant under cyclic re-presentation of rotations:
    /// each vertex's cyclic list starts at the minimal (neighbor, weight)
    /// incident pair, vertices in canonical order.
    pub fn canonical_form(&self) -> String {
        let mut s = String::new();
        for v in 0..self.n() {
            let rot = &self.rotation[v];
            let key = |&id: &usize| {
                let e = &self.edges[id];
                (e.other(v), e.weight.clone())
            };
            let mut list: Vec<usize> = rot.clone();
            if !list.is_empty() {
                let best = (0..list.len())
                    .min_by_key(|&i| key(&list[i]))
                    .unwrap();
                list.rotate_left(best);
            }
            let _ = write!(s, "{}[", self.passport.label_token(v));
            for (i, id) in list.iter().enumerate() {
                let e = &self.edges[*id];
                if i > 0 {
                    s.push(' ');
                }
                let _ = write!(
                    s,
                    "{}:{}",
                    self.passport.label_token(e.other(v)),
                    format_rational(&e.weight)
                );
            }
            s.push_str("] ");
        }
        if let Some((a, b)) = self.marks {
            let _ = write!(
                s,
                "marks({},{})",
                self.passport.label_token(a),
                self.passport.label_token(b)
            );
        }
        s
    }

    pub fn is_isomorphic(&self, other: &PlaneForest) -> Result<bool> {
        if self.passport.as_ref() != other.passport.as_ref() {
            return Err(Error::PassportMismatch);
        }
        Ok(self.canonical_form() == other.canonical_form())
    }

    /// All N(N-1) ordered mark pairs of a connected tree.
    pub fn all_markings(&self) -> Result<Vec<PlaneForest>> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let n = self.n();
        let mut out = Vec::with_capacity(n * (n - 1));
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    out.push(self.with_marks(a, b)?);
                }
            }
        }
        Ok(out)
    }

    /// The N-1 rooted versions: marks at the black and white ends of each edge.
    pub fn rooted_markings(&self) -> Result<Vec<PlaneForest>> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        self.edges
            .iter()
            .map(|e| self.with_marks(e.black, e.white))
            .collect()
    }

    /// Folds a twice-marked tree back into the permutation whose combing
    /// produces it. Pure interleaving on the rotation system; no geometry.
    pub fn fold(&self) -> Result<Permutation> {
        let (a, b) = self.marks.ok_or(Error::BadMarks)?;
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let (path, path_edges) = self.path_with_edges(a, b)?;
        let mut order: Vec<usize> = Vec::with_capacity(self.n());
        for (k, &u) in path.iter().enumerate() {
            let black = self.passport.is_black(u);
            let e_out = (k < path_edges.len()).then(|| path_edges[k]);
            let e_in = (k > 0).then(|| path_edges[k - 1]);
            let (forward, backward) = self.split_blocks(u, black, e_out, e_in);
            // backward partners sit left of u, farthest first
            let back_above = !black;
            for &e in &backward {
                self.emit_subtree(self.edges[e].other(u), e, ParentSide::Right, back_above, &mut order);
            }
            order.push(u);
            // forward partners sit right of u, nearest first
            for &e in forward.iter().rev() {
                self.emit_subtree(self.edges[e].other(u), e, ParentSide::Left, black, &mut order);
            }
        }
        Permutation::new(self.passport.clone(), order)
    }

    /// Splits the non-path edges at a path vertex into the block attached
    /// beyond the outgoing path edge and the block beyond the incoming one.
    /// Reading direction is anticlockwise at black vertices, clockwise at
    /// white ones.
    fn split_blocks(
        &self,
        u: usize,
        black: bool,
        e_out: Option<usize>,
        e_in: Option<usize>,
    ) -> (Vec<usize>, Vec<usize>) {
        match (e_out, e_in) {
            (Some(out), Some(inn)) => {
                let all = self.read_rotation(u, out, black);
                let split = all.iter().position(|&e| e == inn).expect("path edge");
                (all[..split].to_vec(), all[split + 1..].to_vec())
            }
            (Some(out), None) => (self.read_rotation(u, out, black), Vec::new()),
            (None, Some(inn)) => (Vec::new(), self.read_rotation(u, inn, black)),
            (None, None) => unreachable!("path has at least one edge"),
        }
    }

    fn emit_subtree(
        &self,
        w: usize,
        via: usize,
        parent: ParentSide,
        above: bool,
        order: &mut Vec<usize>,
    ) {
        let children = self.read_rotation(w, via, above);
        match parent {
            // parent left of w: children fill the gap left of w, farthest first
            ParentSide::Left => {
                for &e in &children {
                    self.emit_subtree(self.edges[e].other(w), e, ParentSide::Right, above, order);
                }
                order.push(w);
            }
            // parent right of w: w first, then children nearest first
            ParentSide::Right => {
                order.push(w);
                for &e in children.iter().rev() {
                    self.emit_subtree(self.edges[e].other(w), e, ParentSide::Left, above, order);
                }
            }
        }
    }

    /// Exact rectangle layout of the folding construction. Returns per-vertex
    /// x-coordinates and one rectangle per edge; sorting vertices by x yields
    /// exactly `fold()`.
    pub fn fold_layout(&self) -> Result<FoldLayout> {
        let (a, b) = self.marks.ok_or(Error::BadMarks)?;
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let (path, path_edges) = self.path_with_edges(a, b)?;
        let n = self.n();
        let mut xs: Vec<Option<BigRational>> = vec![None; n];
        let mut rects: Vec<Option<LayoutRect>> = vec![None; self.edges.len()];
        for (k, &u) in path.iter().enumerate() {
            xs[u] = Some(BigRational::from_integer(BigInt::from(k as i64)));
        }
        // path rectangles: unit width, heights straddle the axis alternately
        for (k, &e) in path_edges.iter().enumerate() {
            let above = self.passport.is_black(path[k]);
            let w = &self.edges[e].weight;
            let (y_lo, y_hi) = if above {
                (BigRational::zero(), w.clone())
            } else {
                (-w.clone(), BigRational::zero())
            };
            rects[e] = Some(LayoutRect {
                edge: e,
                x_lo: BigRational::from_integer(BigInt::from(k as i64)),
                x_hi: BigRational::from_integer(BigInt::from(k as i64 + 1)),
                y_lo,
                y_hi,
            });
        }
        for (k, &u) in path.iter().enumerate() {
            let black = self.passport.is_black(u);
            let e_out = (k < path_edges.len()).then(|| path_edges[k]);
            let e_in = (k > 0).then(|| path_edges[k - 1]);
            let (forward, backward) = self.split_blocks(u, black, e_out, e_in);
            let x_u = xs[u].clone().unwrap();
            let one = BigRational::one();
            if let Some(out) = e_out {
                // stack above (black) or below (white) the outgoing rectangle
                let base = rect_far_y(rects[out].as_ref().unwrap(), black);
                self.layout_block(u, &forward, &x_u, &one, true, black, base, &mut xs, &mut rects);
            }
            if let Some(inn) = e_in {
                let base = rect_far_y(rects[inn].as_ref().unwrap(), !black);
                self.layout_block(u, &backward, &x_u, &one, false, !black, base, &mut xs, &mut rects);
            }
        }
        let xs: Vec<BigRational> = xs.into_iter().map(|x| x.expect("connected tree")).collect();
        let rects: Vec<LayoutRect> = rects.into_iter().map(|r| r.expect("edge laid out")).collect();
        Ok(FoldLayout { xs, rects })
    }

    /// Lays out one block of sibling rectangles attached at `u`, then recurses
    /// into the subtrees. `rightward` controls the alignment side, `above`
    /// the stacking direction; widths shrink by a factor of 3 per sibling.
    #[allow(clippy::too_many_arguments)]
    fn layout_block(
        &self,
        u: usize,
        block: &[usize],
        x_u: &BigRational,
        width: &BigRational,
        rightward: bool,
        above: bool,
        mut base: BigRational,
        xs: &mut Vec<Option<BigRational>>,
        rects: &mut Vec<Option<LayoutRect>>,
    ) {
        let third = BigRational::new(BigInt::one(), BigInt::from(3));
        let mut w = width.clone();
        for &e in block {
            w *= &third;
            let other = self.edges[e].other(u);
            let (x_lo, x_hi) = if rightward {
                (x_u.clone(), x_u + &w)
            } else {
                (x_u - &w, x_u.clone())
            };
            let h = self.edges[e].weight.clone();
            let (y_lo, y_hi) = if above {
                (base.clone(), &base + &h)
            } else {
                (&base - &h, base.clone())
            };
            base = if above { y_hi.clone() } else { y_lo.clone() };
            rects[e] = Some(LayoutRect { edge: e, x_lo, x_hi, y_lo, y_hi });
            let x_other = if rightward { x_u + &w } else { x_u - &w };
            xs[other] = Some(x_other.clone());
            // the subtree hanging off `other` extends back toward `u`
            let children = self.read_rotation(other, e, above);
            let far = rect_far_y(rects[e].as_ref().unwrap(), above);
            self.layout_block(other, &children, &x_other, &w, !rightward, above, far, xs, rects);
        }
    }
}

enum ParentSide {
    Left,
    Right,
}

/// Top of a rectangle when stacking up, bottom when stacking down.
fn rect_far_y(rect: &LayoutRect, above: bool) -> BigRational {
    if above {
        rect.y_hi.clone()
    } else {
        rect.y_lo.clone()
    }
}

/// Exact coordinates realizing the folding construction.
pub struct FoldLayout {
    pub xs: Vec<BigRational>,
    pub rects: Vec<LayoutRect>,
}

#[derive(Clone, Debug)]
pub struct LayoutRect {
    pub edge: usize,
    pub x_lo: BigRational,
    pub x_hi: BigRational,
    pub y_lo: BigRational,
    pub y_hi: BigRational,
}

impl FoldLayout {
    /// Vertices sorted by x-coordinate.
    pub fn x_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.xs.len()).collect();
        idx.sort_by(|&i, &j| self.xs[i].cmp(&self.xs[j]));
        idx
    }
}

// --- JSON interchange -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct VertexJson {
    label: String,
    color: String,
    weight: String,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    id: usize,
    black: String,
    white: String,
    weight: String,
}

/// Wire form of a forest; see `PlaneForest::to_json`.
#[derive(Serialize, Deserialize)]
pub struct ForestJson {
    pub passport: String,
    vertices: Vec<VertexJson>,
    edges: Vec<EdgeJson>,
    rotation: std::collections::BTreeMap<String, Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    marks: Option<[String; 2]>,
}

impl PlaneForest {
    pub fn to_json(&self) -> ForestJson {
        let pp = &self.passport;
        let vertices = (0..self.n())
            .map(|v| VertexJson {
                label: pp.label_token(v),
                color: if pp.is_black(v) { "black" } else { "white" }.into(),
                weight: format_rational(pp.weight(v)),
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(id, e)| EdgeJson {
                id,
                black: pp.label_token(e.black),
                white: pp.label_token(e.white),
                weight: format_rational(&e.weight),
            })
            .collect();
        let mut rotation = std::collections::BTreeMap::new();
        for v in 0..self.n() {
            let mut list = self.rotation[v].clone();
            if !list.is_empty() {
                let key = |&id: &usize| {
                    let e = &self.edges[id];
                    (e.other(v), e.weight.clone())
                };
                let best = (0..list.len()).min_by_key(|&i| key(&list[i])).unwrap();
                list.rotate_left(best);
            }
            rotation.insert(pp.label_token(v), list);
        }
        ForestJson {
            passport: pp.to_string(),
            vertices,
            edges,
            rotation,
            marks: self.marks.map(|(a, b)| [pp.label_token(a), pp.label_token(b)]),
        }
    }

    pub fn from_json(json: &ForestJson) -> Result<Self> {
        let passport = FullPassport::parse(&json.passport)?;
        for v in &json.vertices {
            let idx = passport.parse_label(&v.label)?;
            let color_ok = (v.color == "black") == passport.is_black(idx);
            let weight_ok = parse_rational(&v.weight)? == *passport.weight(idx);
            if !color_ok || !weight_ok {
                return Err(Error::Parse(format!("vertex `{}` disagrees with passport", v.label)));
            }
        }
        // edge ids in the file may be arbitrary; remap to dense indices
        let mut id_map = HashMap::new();
        let mut edges = Vec::new();
        for e in &json.edges {
            if id_map.insert(e.id, edges.len()).is_some() {
                return Err(Error::Parse(format!("duplicate edge id {}", e.id)));
            }
            edges.push(Edge {
                black: passport.parse_label(&e.black)?,
                white: passport.parse_label(&e.white)?,
                weight: parse_rational(&e.weight)?,
            });
        }
        let mut rotation = vec![Vec::new(); passport.n()];
        for (label, ids) in &json.rotation {
            let v = passport.parse_label(label)?;
            rotation[v] = ids
                .iter()
                .map(|id| {
                    id_map
                        .get(id)
                        .copied()
                        .ok_or_else(|| Error::Parse(format!("unknown edge id {id}")))
                })
                .collect::<Result<Vec<_>>>()?;
        }
        let marks = match &json.marks {
            Some([a, b]) => Some((passport.parse_label(a)?, passport.parse_label(b)?)),
            None => None,
        };
        PlaneForest::new(passport, edges, rotation, marks)
    }
}
