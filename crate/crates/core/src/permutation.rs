//! Permutations of the index set and their classification.
//!
//! Everything here is driven by the cumulative sums `H_i` of the signed
//! weights along the permutation. A permutation is *positive* when all
//! intermediate sums are strictly positive, and a *tree permutation* when
//! its combing produces a connected graph; the latter is decided by three
//! explicit conditions on the sums, checked literally by an O(N^2) scan.
//!
//! Streams enumerate a class in lexicographic order (with respect to the
//! canonical label order) by depth-first extension of prefixes. Prefixes
//! that can no longer reach the class are pruned, which never changes the
//! output: positivity, nonnegativity and the tree conditions are violated
//! permanently once violated.

use std::fmt;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::passport::FullPassport;

/// Default bound on N for exhaustive N! streams; override explicitly.
pub const PERM_SIZE_GUARD: usize = 12;

/// An ordering of all N labels, with cached cumulative sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    passport: Arc<FullPassport>,
    order: Vec<usize>,
    // scaled cumulative sums H_0..H_N (weights cleared to the passport's
    // common denominator)
    hs: Vec<BigInt>,
}

impl Permutation {
    pub fn new(passport: Arc<FullPassport>, order: Vec<usize>) -> Result<Self> {
        let n = passport.n();
        if order.len() != n {
            return Err(Error::NotAPermutation);
        }
        let mut seen = vec![false; n];
        for &i in &order {
            if i >= n || seen[i] {
                return Err(Error::NotAPermutation);
            }
            seen[i] = true;
        }
        let mut hs = Vec::with_capacity(n + 1);
        hs.push(BigInt::zero());
        for &i in &order {
            let next = hs.last().unwrap() + &passport.scaled()[i];
            hs.push(next);
        }
        debug_assert!(hs[n].is_zero());
        Ok(Permutation { passport, order, hs })
    }

    /// Parses the comma-separated token form, e.g. `2_2,2_3,-3_2,-3_1,2_1`.
    pub fn parse(passport: &Arc<FullPassport>, text: &str) -> Result<Self> {
        let order = text
            .split(',')
            .map(|tok| passport.parse_label(tok.trim()))
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(passport.clone(), order)
    }

    pub fn passport(&self) -> &Arc<FullPassport> {
        &self.passport
    }

    /// Canonical positions in permutation order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// Scaled cumulative sums H_0..H_N.
    pub fn scaled_sums(&self) -> &[BigInt] {
        &self.hs
    }

    /// Exact cumulative sums H_0..H_N as rationals.
    pub fn cumulative_sums(&self) -> Vec<BigRational> {
        self.hs
            .iter()
            .map(|h| BigRational::new(h.clone(), self.passport.scale().clone()))
            .collect()
    }

    pub fn classify(&self) -> PermClass {
        let n = self.n();
        let hs = &self.hs;
        let zero = BigInt::zero();
        let positive = (1..n).all(|i| hs[i] > zero);
        let nonnegative = (1..n).all(|i| hs[i] >= zero);
        let mut tree = (1..n).all(|i| !hs[i].is_zero());
        if tree {
            // (k, l) runs over 1 <= k < l <= N; the window min/max over
            // H_k..H_{l-1} grows as k decreases
            'outer: for l in (2..=n).rev() {
                let target = &hs[l];
                let mut min = hs[l - 1].clone();
                let mut max = hs[l - 1].clone();
                for k in (1..l).rev() {
                    if k < l - 1 {
                        if hs[k] < min {
                            min = hs[k].clone();
                        }
                        if hs[k] > max {
                            max = hs[k].clone();
                        }
                    }
                    if &hs[k - 1] == target {
                        if target > &zero && min >= *target {
                            tree = false;
                            break 'outer;
                        }
                        if target < &zero && max <= *target {
                            tree = false;
                            break 'outer;
                        }
                    }
                }
            }
        }
        let sign_changes = if tree {
            Some(
                (1..=n)
                    .filter(|&i| {
                        (hs[i - 1].is_positive() && hs[i].is_negative())
                            || (hs[i - 1].is_negative() && hs[i].is_positive())
                    })
                    .collect(),
            )
        } else {
            None
        };
        PermClass { positive, nonnegative, tree, positive_tree: positive && tree, sign_changes }
    }

    /// Positions i (1-based) with H_{i-1} and H_i of opposite sign.
    /// Only defined for tree permutations.
    pub fn sign_changing_points(&self) -> Result<Vec<usize>> {
        self.classify()
            .sign_changes
            .ok_or(Error::NotATreePermutation)
    }

    /// Labels at positions (1, sign-changing points, N): the path between
    /// the two marks of the combed tree.
    pub fn mark_path(&self) -> Result<Vec<usize>> {
        let points = self.sign_changing_points()?;
        let mut path = vec![self.order[0]];
        for i in points {
            path.push(self.order[i - 1]);
        }
        if *path.last().unwrap() != self.order[self.n() - 1] {
            path.push(self.order[self.n() - 1]);
        }
        Ok(path)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let toks: Vec<String> = self
            .order
            .iter()
            .map(|&i| self.passport.label_token(i))
            .collect();
        write!(f, "{}", toks.join(","))
    }
}

/// Classification flags for one permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermClass {
    pub positive: bool,
    pub nonnegative: bool,
    pub tree: bool,
    pub positive_tree: bool,
    /// sign-changing points (1-based), present exactly for tree permutations
    pub sign_changes: Option<Vec<usize>>,
}

/// Which permutations a stream yields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassFilter {
    All,
    Positive,
    Nonnegative,
    Tree,
    PositiveTree,
}

impl ClassFilter {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => ClassFilter::All,
            "positive" => ClassFilter::Positive,
            "nonnegative" => ClassFilter::Nonnegative,
            "tree" => ClassFilter::Tree,
            "positive_tree" | "positive-tree" => ClassFilter::PositiveTree,
            other => return Err(Error::Parse(format!("unknown class `{other}`"))),
        })
    }

    pub fn matches(&self, class: &PermClass) -> bool {
        match self {
            ClassFilter::All => true,
            ClassFilter::Positive => class.positive,
            ClassFilter::Nonnegative => class.nonnegative,
            ClassFilter::Tree => class.tree,
            ClassFilter::PositiveTree => class.positive_tree,
        }
    }
}

/// Lexicographic stream over one class of permutations.
pub struct PermStream {
    passport: Arc<FullPassport>,
    n: usize,
    filter: ClassFilter,
    used: Vec<bool>,
    path: Vec<usize>,
    hs: Vec<BigInt>,
    cursor: Vec<usize>,
    done: bool,
}

/// Streams the chosen class in lexicographic order. Errors when N exceeds
/// `max_n` (pass a larger bound to override the default guard).
pub fn stream(
    passport: &Arc<FullPassport>,
    filter: ClassFilter,
    max_n: usize,
) -> Result<PermStream> {
    let n = passport.n();
    if n > max_n {
        return Err(Error::SizeGuard(n));
    }
    Ok(PermStream {
        passport: passport.clone(),
        n,
        filter,
        used: vec![false; n],
        path: Vec::with_capacity(n),
        hs: vec![BigInt::zero()],
        cursor: vec![0; n + 1],
        done: false,
    })
}

/// Number of permutations in the class, by exhaustive (pruned) search.
pub fn count(passport: &Arc<FullPassport>, filter: ClassFilter, max_n: usize) -> Result<BigInt> {
    let mut s = stream(passport, filter, max_n)?;
    let mut total = BigInt::zero();
    while s.step() {
        total += 1;
        s.backtrack();
    }
    Ok(total)
}

impl PermStream {
    /// Whether appending `cand` keeps the prefix extendable to the class.
    fn prefix_ok(&self, cand: usize) -> bool {
        let l = self.path.len() + 1;
        let h = &self.hs[l - 1] + &self.passport.scaled()[cand];
        let zero = BigInt::zero();
        let need_positive = matches!(self.filter, ClassFilter::Positive | ClassFilter::PositiveTree);
        let need_tree = matches!(self.filter, ClassFilter::Tree | ClassFilter::PositiveTree);
        if l < self.n {
            if need_positive && h <= zero {
                return false;
            }
            if self.filter == ClassFilter::Nonnegative && h < zero {
                return false;
            }
            if need_tree && h.is_zero() {
                return false;
            }
        }
        if need_tree && !h.is_zero() {
            // a completed horizontal pair (k, l) can never be undone
            let mut min = BigInt::zero();
            let mut max = BigInt::zero();
            for k in (1..l).rev() {
                if k == l - 1 {
                    min = self.hs[k].clone();
                    max = self.hs[k].clone();
                } else {
                    if self.hs[k] < min {
                        min = self.hs[k].clone();
                    }
                    if self.hs[k] > max {
                        max = self.hs[k].clone();
                    }
                }
                if self.hs[k - 1] == h {
                    if h.is_positive() && min >= h {
                        return false;
                    }
                    if h.is_negative() && max <= h {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Advances to the next complete permutation, leaving it on the stack.
    fn step(&mut self) -> bool {
        if self.done {
            return false;
        }
        loop {
            let d = self.path.len();
            if d == self.n {
                return true;
            }
            let mut cand = self.cursor[d];
            let mut pushed = false;
            while cand < self.n {
                if !self.used[cand] && self.prefix_ok(cand) {
                    self.cursor[d] = cand + 1;
                    self.used[cand] = true;
                    let h = &self.hs[d] + &self.passport.scaled()[cand];
                    self.hs.push(h);
                    self.path.push(cand);
                    self.cursor[d + 1] = 0;
                    pushed = true;
                    break;
                }
                cand += 1;
            }
            if !pushed {
                self.cursor[d] = self.n;
                if self.path.is_empty() {
                    self.done = true;
                    return false;
                }
                self.backtrack();
            }
        }
    }

    fn backtrack(&mut self) {
        let last = self.path.pop().expect("stack not empty");
        self.used[last] = false;
        self.hs.pop();
    }
}

impl Iterator for PermStream {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        if !self.step() {
            return None;
        }
        let perm = Permutation {
            passport: self.passport.clone(),
            order: self.path.clone(),
            hs: self.hs.clone(),
        };
        self.backtrack();
        Some(perm)
    }
}
