//! The combing map: permutation -> histogram region -> marked forest.
//!
//! The region of a permutation stacks one vertical rectangle per position,
//! with height the running cumulative sum. Extending every horizontal
//! boundary line until it hits a vertical boundary slices the region into
//! horizontal rectangles; each becomes an edge between the positions of its
//! two bounding vertical lines.
//!
//! Two independent routes compute the slicing: a sweep over cut heights
//! (`horizontal_decomposition`) and a pairwise min/max predicate
//! (`edge_exists`). They must agree; debug builds assert it and the tests
//! exercise it exhaustively.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::permutation::Permutation;
use crate::planetree::{Edge, PlaneForest};
use crate::weight::{format_rational, parse_rational};

/// Which side of the x-axis a horizontal rectangle lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Above,
    Below,
}

/// The histogram region of a permutation: one vertical rectangle per
/// position (possibly degenerate), in scaled-integer heights.
#[derive(Clone, Debug)]
pub struct Region {
    // scaled cumulative sums H_0..H_N
    hs: Vec<BigInt>,
    scale: BigInt,
}

/// A maximal horizontal rectangle: x from position `left` to `right`,
/// y from `lo` to `hi`; its height is the edge weight.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalRect {
    pub left: usize,
    pub right: usize,
    pub lo: BigRational,
    pub hi: BigRational,
    pub side: Side,
}

impl HorizontalRect {
    pub fn weight(&self) -> BigRational {
        &self.hi - &self.lo
    }
}

pub fn build_region(p: &Permutation) -> Region {
    Region {
        hs: p.scaled_sums().to_vec(),
        scale: p.passport().scale().clone(),
    }
}

impl Region {
    pub fn n(&self) -> usize {
        self.hs.len() - 1
    }

    /// Vertical rectangle of column i (1-based): y from min(0, H_i) to
    /// max(0, H_i).
    pub fn column(&self, i: usize) -> (BigRational, BigRational) {
        let h = BigRational::new(self.hs[i].clone(), self.scale.clone());
        if h.is_negative() {
            (h, BigRational::zero())
        } else {
            (BigRational::zero(), h)
        }
    }

    fn rational(&self, v: &BigInt) -> BigRational {
        BigRational::new(v.clone(), self.scale.clone())
    }
}

/// Edge criterion between positions k < l: above the axis when the window
/// min of H_k..H_{l-1} exceeds max(H_{k-1}, H_l, 0); mirrored below.
/// Returns the weight and side. Independent of the sweep decomposition.
pub fn edge_exists(p: &Permutation, k: usize, l: usize) -> Option<(BigRational, Side)> {
    assert!(1 <= k && k < l && l <= p.n());
    let hs = p.scaled_sums();
    let zero = BigInt::zero();
    let win_min = (k..l).map(|j| &hs[j]).min().unwrap();
    let win_max = (k..l).map(|j| &hs[j]).max().unwrap();
    let out_max = [&hs[k - 1], &hs[l], &zero].into_iter().max().unwrap();
    let out_min = [&hs[k - 1], &hs[l], &zero].into_iter().min().unwrap();
    let scale = p.passport().scale();
    if win_min > out_max {
        let w = BigRational::new(win_min - out_max, scale.clone());
        Some((w, Side::Above))
    } else if win_max < out_min {
        let w = BigRational::new(out_min - win_max, scale.clone());
        Some((w, Side::Below))
    } else {
        None
    }
}

/// Slices the region into maximal horizontal rectangles by sweeping the cut
/// heights. A cut at height y crosses column i when y lies strictly inside
/// the column and some column top at exactly y is reachable through columns
/// that also strictly contain y.
pub fn horizontal_decomposition(region: &Region) -> Vec<HorizontalRect> {
    let n = region.n();
    let hs = &region.hs;
    let zero = BigInt::zero();
    let inside = |i: usize, y: &BigInt| -> bool {
        // strict interior of column i's y-range
        if hs[i].is_positive() {
            *y > zero && y < &hs[i]
        } else {
            y > &hs[i] && *y < zero
        }
    };
    // distinct candidate heights (tops of columns)
    let mut heights: Vec<&BigInt> = hs[1..].iter().collect();
    heights.sort();
    heights.dedup();
    // cuts[i] = sorted interior cut heights of column i
    let mut cuts: Vec<Vec<&BigInt>> = vec![Vec::new(); n + 1];
    for &y in &heights {
        if y.is_zero() {
            continue;
        }
        let mut reach = vec![false; n + 2];
        let mut carry = false;
        for i in 1..=n {
            if inside(i, y) {
                reach[i] = carry;
            } else {
                carry = &hs[i] == y;
            }
        }
        carry = false;
        for i in (1..=n).rev() {
            if inside(i, y) {
                reach[i] = reach[i] || carry;
            } else {
                carry = &hs[i] == y;
            }
        }
        for i in 1..=n {
            if inside(i, y) && reach[i] {
                cuts[i].push(y);
            }
        }
    }
    // cells per column, then merge identical cells across adjacent columns
    let mut open: Vec<(BigInt, BigInt, usize)> = Vec::new(); // (lo, hi, start col)
    let mut out = Vec::new();
    for i in 1..=(n + 1) {
        let mut cells: Vec<(BigInt, BigInt)> = Vec::new();
        if i <= n && !hs[i].is_zero() {
            let (lo, hi) = if hs[i].is_positive() {
                (zero.clone(), hs[i].clone())
            } else {
                (hs[i].clone(), zero.clone())
            };
            let mut bounds = vec![lo];
            bounds.extend(cuts[i].iter().map(|y| (*y).clone()));
            bounds.push(hi);
            bounds.sort();
            for w in bounds.windows(2) {
                cells.push((w[0].clone(), w[1].clone()));
            }
        }
        let mut still_open = Vec::new();
        for (lo, hi, start) in open.drain(..) {
            if cells.iter().any(|(a, b)| *a == lo && *b == hi) {
                still_open.push((lo, hi, start));
            } else {
                out.push((start, i, lo, hi));
            }
        }
        for (lo, hi) in cells {
            if !still_open.iter().any(|(a, b, _)| *a == lo && *b == hi) {
                still_open.push((lo, hi, i));
            }
        }
        open = still_open;
    }
    debug_assert!(open.is_empty());
    out.sort_by(|a, b| (a.0, &a.2).cmp(&(b.0, &b.2)));
    out.into_iter()
        .map(|(left, right, lo, hi)| HorizontalRect {
            left,
            right,
            side: if lo >= BigInt::zero() { Side::Above } else { Side::Below },
            lo: region.rational(&lo),
            hi: region.rational(&hi),
        })
        .collect()
}

/// The combing map: builds the twice-marked forest of a permutation. The
/// marks are the first and last positions.
pub fn comb(p: &Permutation) -> PlaneForest {
    let region = build_region(p);
    let rects = horizontal_decomposition(&region);
    #[cfg(debug_assertions)]
    cross_check(p, &rects);
    let pp = p.passport();
    let order = p.order();
    let edges: Vec<Edge> = rects
        .iter()
        .map(|r| {
            let (black_pos, white_pos) = match r.side {
                Side::Above => (r.left, r.right),
                Side::Below => (r.right, r.left),
            };
            Edge {
                black: order[black_pos - 1],
                white: order[white_pos - 1],
                weight: r.weight(),
            }
        })
        .collect();
    let mut rotation: Vec<Vec<usize>> = vec![Vec::new(); pp.n()];
    for pos in 1..=p.n() {
        // attached right of the vertical line, bottom to top
        let mut right_ids: Vec<usize> = (0..rects.len())
            .filter(|&id| rects[id].left == pos)
            .collect();
        right_ids.sort_by(|&a, &b| rects[a].lo.cmp(&rects[b].lo));
        // attached left, top to bottom
        let mut left_ids: Vec<usize> = (0..rects.len())
            .filter(|&id| rects[id].right == pos)
            .collect();
        left_ids.sort_by(|&a, &b| rects[b].lo.cmp(&rects[a].lo));
        right_ids.extend(left_ids);
        rotation[order[pos - 1]] = right_ids;
    }
    let marks = Some((order[0], order[p.n() - 1]));
    PlaneForest::new(pp.clone(), edges, rotation, marks)
        .expect("combing always yields a valid marked forest")
}

#[cfg(debug_assertions)]
fn cross_check(p: &Permutation, rects: &[HorizontalRect]) {
    let mut from_predicate: Vec<(usize, usize, BigRational, Side)> = Vec::new();
    for k in 1..p.n() {
        for l in (k + 1)..=p.n() {
            if let Some((w, side)) = edge_exists(p, k, l) {
                from_predicate.push((k, l, w, side));
            }
        }
    }
    let mut from_sweep: Vec<(usize, usize, BigRational, Side)> = rects
        .iter()
        .map(|r| (r.left, r.right, r.weight(), r.side))
        .collect();
    from_predicate.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    from_sweep.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    assert_eq!(from_sweep, from_predicate, "sweep disagrees with edge predicate");
}

// --- region debug dump -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct VerticalJson {
    i: usize,
    y_min: String,
    y_max: String,
}

#[derive(Serialize, Deserialize)]
struct HorizontalJson {
    k: usize,
    l: usize,
    lo: String,
    hi: String,
    side: String,
}

/// Wire form of a region and its slicing; consumed by the renderer.
#[derive(Serialize, Deserialize)]
pub struct RegionJson {
    vertical: Vec<VerticalJson>,
    horizontal: Vec<HorizontalJson>,
}

impl RegionJson {
    pub fn build(region: &Region) -> Self {
        let rects = horizontal_decomposition(region);
        RegionJson {
            vertical: (1..=region.n())
                .map(|i| {
                    let (lo, hi) = region.column(i);
                    VerticalJson {
                        i,
                        y_min: format_rational(&lo),
                        y_max: format_rational(&hi),
                    }
                })
                .collect(),
            horizontal: rects
                .iter()
                .map(|r| HorizontalJson {
                    k: r.left,
                    l: r.right,
                    lo: format_rational(&r.lo),
                    hi: format_rational(&r.hi),
                    side: match r.side {
                        Side::Above => "above".into(),
                        Side::Below => "below".into(),
                    },
                })
                .collect(),
        }
    }

    /// Geometry for rendering: (i, y_min, y_max) columns and
    /// (k, l, lo, hi) slices.
    #[allow(clippy::type_complexity)]
    pub fn geometry(
        &self,
    ) -> Result<(Vec<(usize, BigRational, BigRational)>, Vec<(usize, usize, BigRational, BigRational)>)>
    {
        let vertical = self
            .vertical
            .iter()
            .map(|v| Ok((v.i, parse_rational(&v.y_min)?, parse_rational(&v.y_max)?)))
            .collect::<Result<Vec<_>>>()?;
        let horizontal = self
            .horizontal
            .iter()
            .map(|h| Ok((h.k, h.l, parse_rational(&h.lo)?, parse_rational(&h.hi)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((vertical, horizontal))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::passport::FullPassport;
    use num::ToPrimitive;
    use std::sync::Arc;

    fn perm(pp: &Arc<FullPassport>, text: &str) -> Permutation {
        Permutation::parse(pp, text).unwrap()
    }

    fn rect_tuple(r: &HorizontalRect) -> (usize, usize, i64, Side) {
        let w = r.weight();
        (r.left, r.right, w.to_integer().to_i64().unwrap(), r.side)
    }

    #[test]
    fn region_columns_match_figure() {
        let pp = FullPassport::parse("2^3 -3^2").unwrap();
        let p = perm(&pp, "2_2,2_3,-3_2,-3_1,2_1");
        let region = build_region(&p);
        let heights: Vec<i64> = (1..=5)
            .map(|i| {
                let (lo, hi) = region.column(i);
                (hi - lo).to_integer().to_i64().unwrap()
            })
            .collect();
        assert_eq!(heights, [2, 4, 1, 2, 0]);
    }

    #[test]
    fn edge_criterion_on_figure_pairs() {
        let pp = FullPassport::parse("2^3 -3^2").unwrap();
        let p = perm(&pp, "2_2,2_3,-3_2,-3_1,2_1");
        let (w, side) = edge_exists(&p, 1, 3).unwrap();
        assert_eq!((w.to_integer().to_i64().unwrap(), side), (1, Side::Above));
        let (w, side) = edge_exists(&p, 4, 5).unwrap();
        assert_eq!((w.to_integer().to_i64().unwrap(), side), (2, Side::Below));
        assert!(edge_exists(&p, 2, 5).is_none());
    }

    #[test]
    fn decomposition_matches_figure() {
        let pp = FullPassport::parse("2^3 -3^2").unwrap();
        let p = perm(&pp, "2_2,2_3,-3_2,-3_1,2_1");
        let region = build_region(&p);
        let mut rects: Vec<_> = horizontal_decomposition(&region)
            .iter()
            .map(rect_tuple)
            .collect();
        rects.sort();
        assert_eq!(
            rects,
            vec![
                (1, 3, 1, Side::Above),
                (1, 4, 1, Side::Above),
                (2, 3, 2, Side::Above),
                (4, 5, 2, Side::Below),
            ]
        );
    }

    #[test]
    fn decomposition_single_edge() {
        let pp = FullPassport::parse("1 -1").unwrap();
        let p = perm(&pp, "1,-1");
        let rects: Vec<_> = horizontal_decomposition(&build_region(&p))
            .iter()
            .map(rect_tuple)
            .collect();
        assert_eq!(rects, vec![(1, 2, 1, Side::Above)]);
    }

    #[test]
    fn decomposition_of_disconnected_positive_permutation() {
        // figure with a nested sub-permutation: four rectangles, no edges
        // between the two vertex groups
        let pp = FullPassport::parse("1_1 1_2 1_3 1_4 -1_1 -1_2 -2_1").unwrap();
        let p = perm(&pp, "1_1,1_2,1_3,-1_1,-1_2,1_4,-2_1");
        let mut rects: Vec<_> = horizontal_decomposition(&build_region(&p))
            .iter()
            .map(rect_tuple)
            .collect();
        rects.sort();
        assert_eq!(
            rects,
            vec![
                (1, 7, 1, Side::Above),
                (2, 5, 1, Side::Above),
                (3, 4, 1, Side::Above),
                (6, 7, 1, Side::Above),
            ]
        );
    }

    #[test]
    fn comb_matches_figure_tree() {
        let pp = FullPassport::parse("2^3 -3^2").unwrap();
        let p = perm(&pp, "2_2,2_3,-3_2,-3_1,2_1");
        let f = comb(&p);
        let mut edges: Vec<(String, String, i64)> = f
            .edges()
            .iter()
            .map(|e| {
                (
                    pp.label_token(e.black),
                    pp.label_token(e.white),
                    e.weight.to_integer().to_i64().unwrap(),
                )
            })
            .collect();
        edges.sort();
        assert_eq!(
            edges,
            vec![
                ("2_1".into(), "-3_1".into(), 2),
                ("2_2".into(), "-3_1".into(), 1),
                ("2_2".into(), "-3_2".into(), 1),
                ("2_3".into(), "-3_2".into(), 2),
            ]
        );
        let (a, b) = f.marks().unwrap();
        assert_eq!(pp.label_token(a), "2_2");
        assert_eq!(pp.label_token(b), "2_1");
        assert!(f.is_connected());
    }

    #[test]
    fn comb_disconnected_forest_components() {
        let pp = FullPassport::parse("1_1 1_2 1_3 1_4 -1_1 -1_2 -2_1").unwrap();
        let p = perm(&pp, "1_1,1_2,1_3,-1_1,-1_2,1_4,-2_1");
        let f = comb(&p);
        assert_eq!(f.edges().len(), 4);
        let comps = f.components();
        assert_eq!(comps.len(), 3);
        // no edge joins the {1_1, 1_4, -2_1} group to the rest
        let group: Vec<usize> = ["1_1", "1_4", "-2_1"]
            .iter()
            .map(|l| pp.parse_label(l).unwrap())
            .collect();
        for e in f.edges() {
            let in_a = group.contains(&e.black);
            let in_b = group.contains(&e.white);
            assert_eq!(in_a, in_b);
        }
    }

    #[test]
    fn comb_single_edge() {
        let pp = FullPassport::parse("1 -1").unwrap();
        let p = perm(&pp, "1,-1");
        let f = comb(&p);
        assert_eq!(f.edges().len(), 1);
        assert_eq!(f.marks(), Some((0, 1)));
    }

    #[test]
    fn sweep_agrees_with_predicate_exhaustively() {
        use crate::permutation::{stream, ClassFilter};
        for text in ["1^2 -1^2", "2 1 -3", "3 1_1 1_2 -4 -1", "1/2 3/2 -2"] {
            let pp = FullPassport::parse(text).unwrap();
            for p in stream(&pp, ClassFilter::All, 12).unwrap() {
                let rects = horizontal_decomposition(&build_region(&p));
                let mut sweep: Vec<(usize, usize, BigRational, Side)> = rects
                    .iter()
                    .map(|r| (r.left, r.right, r.weight(), r.side))
                    .collect();
                sweep.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
                let mut pred = Vec::new();
                for k in 1..p.n() {
                    for l in (k + 1)..=p.n() {
                        if let Some((w, side)) = edge_exists(&p, k, l) {
                            pred.push((k, l, w, side));
                        }
                    }
                }
                assert_eq!(sweep, pred, "{text}: {p}");
            }
        }
    }

    #[test]
    fn rectangle_lengths_are_monotone_along_vertical_lines() {
        // on each side of each vertical line, lengths strictly decrease
        // moving away from the x-axis (at a rising line: right-attached
        // decrease upward, left-attached increase upward; mirrored at a
        // falling line)
        use crate::permutation::{stream, ClassFilter};
        let pp = FullPassport::parse("2 1^2 -2 -1^2").unwrap();
        for p in stream(&pp, ClassFilter::All, 12).unwrap() {
            let rects = horizontal_decomposition(&build_region(&p));
            for pos in 1..=p.n() {
                for pick in [true, false] {
                    let mut attached: Vec<_> = rects
                        .iter()
                        .filter(|r| if pick { r.left == pos } else { r.right == pos })
                        .collect();
                    // rectangles on one side of a line share an axis side
                    assert!(attached.windows(2).all(|w| w[0].side == w[1].side));
                    attached.sort_by(|a, b| match a.side {
                        Side::Above => a.lo.cmp(&b.lo),
                        Side::Below => b.lo.cmp(&a.lo),
                    });
                    for w in attached.windows(2) {
                        assert!(
                            w[0].right - w[0].left > w[1].right - w[1].left,
                            "{p}: line {pos}"
                        );
                    }
                }
            }
        }
    }
}
