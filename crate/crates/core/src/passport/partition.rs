//! Partitions of a full passport into zero-sum blocks.
//!
//! Enumeration is canonical: each new block contains the smallest label not
//! yet assigned, so no partition is produced twice. The trivial 1-partition
//! comes first.

use std::sync::Arc;

use num::bigint::BigInt;
use num::{One, Zero};

use crate::error::{Error, Result};
use crate::passport::FullPassport;

/// A set of pairwise-disjoint zero-sum blocks covering the index set.
/// Blocks hold canonical positions, each sorted ascending, and are listed by
/// their smallest element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    passport: Arc<FullPassport>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn passport(&self) -> &Arc<FullPassport> {
        &self.passport
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &[usize] {
        &self.blocks[i]
    }

    /// Whether this is the trivial 1-partition.
    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn block_passport(&self, i: usize) -> Arc<FullPassport> {
        self.passport.subpassport(&self.blocks[i])
    }

    /// Product over blocks of (size - 1)!.
    pub fn x_value(&self) -> BigInt {
        let mut x = BigInt::one();
        for block in &self.blocks {
            for k in 2..block.len() {
                x *= BigInt::from(k as u64);
            }
        }
        x
    }

    /// True when every block of `self` lies inside some block of `coarser`.
    pub fn is_finer(&self, coarser: &Partition) -> Result<bool> {
        if self.passport.as_ref() != coarser.passport.as_ref() {
            return Err(Error::PassportMismatch);
        }
        let n = self.passport.n();
        let mut owner = vec![0usize; n];
        for (b, block) in coarser.blocks.iter().enumerate() {
            for &i in block {
                owner[i] = b;
            }
        }
        Ok(self
            .blocks
            .iter()
            .all(|block| block.iter().all(|&i| owner[i] == owner[block[0]])))
    }

    /// All `len()!` orderings of the blocks.
    pub fn orderings(&self) -> Vec<OrderedPartition> {
        let k = self.blocks.len();
        let mut idx: Vec<usize> = (0..k).collect();
        let mut out = Vec::new();
        loop {
            out.push(OrderedPartition {
                passport: self.passport.clone(),
                blocks: idx.iter().map(|&i| self.blocks[i].clone()).collect(),
            });
            if !next_permutation(&mut idx) {
                break;
            }
        }
        out
    }

    pub fn display(&self) -> String {
        let mut s = String::new();
        for (b, block) in self.blocks.iter().enumerate() {
            if b > 0 {
                s.push_str(" | ");
            }
            let toks: Vec<String> =
                block.iter().map(|&i| self.passport.label_token(i)).collect();
            s.push_str(&toks.join(" "));
        }
        s
    }
}

/// A partition with a distinguished order on its blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedPartition {
    passport: Arc<FullPassport>,
    blocks: Vec<Vec<usize>>,
}

impl OrderedPartition {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_passport(&self, i: usize) -> Arc<FullPassport> {
        self.passport.subpassport(&self.blocks[i])
    }

    pub fn unordered(&self) -> Partition {
        let mut blocks = self.blocks.clone();
        blocks.sort_by_key(|b| b[0]);
        Partition { passport: self.passport.clone(), blocks }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

struct Frame {
    rem: u64,
    sub: u64,
}

/// Lazy stream over all partitions, trivial one first.
pub struct Partitions {
    passport: Arc<FullPassport>,
    full: u64,
    stack: Vec<Frame>,
    started: bool,
    done: bool,
}

pub fn enumerate_partitions(passport: &Arc<FullPassport>) -> Partitions {
    let n = passport.n();
    assert!(n <= 64, "partition enumeration limited to 64 labels");
    Partitions {
        passport: passport.clone(),
        full: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
        stack: Vec::new(),
        started: false,
        done: false,
    }
}

impl Partitions {
    fn zero_sum(&self, mask: u64) -> bool {
        let scaled = self.passport.scaled();
        let mut sum = BigInt::zero();
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            sum += &scaled[i];
            m &= m - 1;
        }
        sum.is_zero()
    }

    /// Completes the stack over `rem`, choosing for each remaining chunk the
    /// first zero-sum block (largest candidate first). Returns false when no
    /// completion exists.
    fn extend(&mut self, rem: u64) -> bool {
        if rem == 0 {
            return true;
        }
        let low = rem & rem.wrapping_neg();
        let rest = rem & !low;
        let mut sub = rest;
        loop {
            let block = low | sub;
            if self.zero_sum(block) {
                self.stack.push(Frame { rem, sub });
                if self.extend(rem & !block) {
                    return true;
                }
                self.stack.pop();
            }
            if sub == 0 {
                return false;
            }
            sub = (sub - 1) & rest;
        }
    }

    /// Moves the deepest movable frame to its next candidate block.
    fn advance(&mut self) -> bool {
        while let Some(frame) = self.stack.pop() {
            let low = frame.rem & frame.rem.wrapping_neg();
            let rest = frame.rem & !low;
            let mut sub = frame.sub;
            while sub != 0 {
                sub = (sub - 1) & rest;
                let block = low | sub;
                if self.zero_sum(block) {
                    self.stack.push(Frame { rem: frame.rem, sub });
                    if self.extend(frame.rem & !block) {
                        return true;
                    }
                    self.stack.pop();
                }
            }
        }
        false
    }

    fn build(&self) -> Partition {
        let blocks = self
            .stack
            .iter()
            .map(|f| {
                let mask = (f.rem & f.rem.wrapping_neg()) | f.sub;
                let mut block = Vec::new();
                let mut m = mask;
                while m != 0 {
                    block.push(m.trailing_zeros() as usize);
                    m &= m - 1;
                }
                block
            })
            .collect();
        Partition { passport: self.passport.clone(), blocks }
    }
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let found = if !self.started {
            self.started = true;
            self.extend(self.full)
        } else {
            self.advance()
        };
        if found {
            Some(self.build())
        } else {
            self.done = true;
            None
        }
    }
}

/// True when some proper nonempty subset of the labels has zero weight sum.
pub fn is_decomposable(passport: &Arc<FullPassport>) -> bool {
    let n = passport.n();
    assert!(n <= 24, "decomposability scan is exponential; passport too large");
    let scaled = passport.scaled();
    let full = (1u32 << n) - 1;
    let mut sums = vec![BigInt::zero(); 1 << (n - 1)];
    // subsets containing label 0 cover all splits
    for mask in 1u32..(1 << (n - 1)) {
        let low = mask.trailing_zeros() as usize;
        sums[mask as usize] = &sums[(mask & (mask - 1)) as usize] + &scaled[low + 1];
        let with_zero = (mask << 1) | 1;
        if with_zero != full && (&sums[mask as usize] + &scaled[0]).is_zero() {
            return true;
        }
    }
    false
}

pub fn max_partition_length(passport: &Arc<FullPassport>) -> usize {
    enumerate_partitions(passport)
        .map(|p| p.len())
        .max()
        .expect("the trivial partition always exists")
}

pub fn count_partitions(passport: &Arc<FullPassport>) -> u128 {
    enumerate_partitions(passport).count() as u128
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashMap, HashSet};

    fn parse(text: &str) -> Arc<FullPassport> {
        FullPassport::parse(text).unwrap()
    }

    /// Independent bitmask-DP count of zero-sum set partitions.
    fn dp_count(pp: &FullPassport) -> u128 {
        fn go(
            mask: u64,
            scaled: &[BigInt],
            memo: &mut HashMap<u64, u128>,
        ) -> u128 {
            if mask == 0 {
                return 1;
            }
            if let Some(&c) = memo.get(&mask) {
                return c;
            }
            let low = mask & mask.wrapping_neg();
            let rest = mask & !low;
            let mut total = 0u128;
            let mut sub = rest;
            loop {
                let block = low | sub;
                let sum: BigInt = (0..scaled.len())
                    .filter(|i| block & (1 << i) != 0)
                    .map(|i| scaled[i].clone())
                    .sum();
                if sum.is_zero() {
                    total += go(mask & !block, scaled, memo);
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            memo.insert(mask, total);
            total
        }
        let full = (1u64 << pp.n()) - 1;
        go(full, pp.scaled(), &mut HashMap::new())
    }

    #[test]
    fn appendix_passport_has_three_partitions() {
        let pp = parse("3 1_1 1_2 -4 -1");
        let parts: Vec<Partition> = enumerate_partitions(&pp).collect();
        assert_eq!(parts.len(), 3);
        assert!(parts[0].is_trivial());
        let mut displays: Vec<String> = parts[1..].iter().map(|p| p.display()).collect();
        displays.sort();
        assert_eq!(
            displays,
            vec!["3 1_1 -4 | 1_2 -1".to_string(), "3 1_2 -4 | 1_1 -1".to_string()]
        );
        assert!(is_decomposable(&pp));
        assert_eq!(max_partition_length(&pp), 2);
    }

    #[test]
    fn nondecomposable_passport_only_trivial() {
        let pp = parse("2^3 -3^2");
        let parts: Vec<Partition> = enumerate_partitions(&pp).collect();
        assert_eq!(parts.len(), 1);
        assert!(!is_decomposable(&pp));
        assert_eq!(max_partition_length(&pp), 1);
    }

    #[test]
    fn square_passport_has_three_partitions() {
        let pp = parse("1^2 -1^2");
        assert_eq!(count_partitions(&pp), 3);
        assert_eq!(max_partition_length(&pp), 2);
    }

    #[test]
    fn stream_matches_dp_and_never_repeats() {
        for text in [
            "3 1_1 1_2 -4 -1",
            "1^2 -1^2",
            "1^3 -1^3",
            "2 1^2 -2 -1^2",
            "1^4 -2^2",
            "2^3 -3^2",
            "1/2 1/2 -1",
            "3 2 1 -3 -2 -1",
        ] {
            let pp = parse(text);
            let mut seen = HashSet::new();
            let mut count = 0u128;
            for part in enumerate_partitions(&pp) {
                // every block sums to zero and blocks cover the set
                let mut covered = vec![false; pp.n()];
                for block in part.blocks() {
                    let sum: BigInt =
                        block.iter().map(|&i| pp.scaled()[i].clone()).sum();
                    assert!(sum.is_zero(), "{text}: nonzero block");
                    for &i in block {
                        assert!(!covered[i], "{text}: overlap");
                        covered[i] = true;
                    }
                }
                assert!(covered.iter().all(|&c| c), "{text}: not covering");
                assert!(seen.insert(part.blocks().to_vec()), "{text}: duplicate");
                count += 1;
            }
            assert_eq!(count, dp_count(&pp), "{text}: count vs DP oracle");
        }
    }

    #[test]
    fn x_value_examples() {
        let pp = parse("3 1_1 1_2 -4 -1");
        let parts: Vec<Partition> = enumerate_partitions(&pp).collect();
        assert_eq!(parts[0].x_value(), BigInt::from(24));
        assert_eq!(parts[1].x_value(), BigInt::from(2));
        assert_eq!(parts[2].x_value(), BigInt::from(2));
    }

    #[test]
    fn finer_is_a_partial_order() {
        let pp = parse("1^3 -1^3");
        let parts: Vec<Partition> = enumerate_partitions(&pp).collect();
        let trivial = &parts[0];
        for p in &parts {
            assert!(p.is_finer(trivial).unwrap());
            assert!(p.is_finer(p).unwrap());
        }
        for p in &parts {
            for q in &parts {
                let pq = p.is_finer(q).unwrap();
                let qp = q.is_finer(p).unwrap();
                if pq && qp {
                    assert_eq!(p.blocks(), q.blocks());
                }
                for r in &parts {
                    if pq && q.is_finer(r).unwrap() {
                        assert!(p.is_finer(r).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn finer_x_value_factorizes() {
        let pp = parse("1^3 -1^3");
        let parts: Vec<Partition> = enumerate_partitions(&pp).collect();
        for q in &parts {
            for p in &parts {
                if !q.is_finer(p).unwrap() {
                    continue;
                }
                // group q's blocks inside each block of p; X(q) must equal the
                // product over p-blocks of X of the induced sub-partition
                let mut product = BigInt::one();
                for block in p.blocks() {
                    let inside: HashSet<usize> = block.iter().copied().collect();
                    for qb in q.blocks() {
                        if inside.contains(&qb[0]) {
                            for k in 2..qb.len() {
                                product *= BigInt::from(k as u64);
                            }
                        }
                    }
                }
                assert_eq!(q.x_value(), product);
            }
        }
    }

    #[test]
    fn mismatched_passports_error() {
        let a = parse("1 -1");
        let b = parse("2 -2");
        let pa = enumerate_partitions(&a).next().unwrap();
        let pb = enumerate_partitions(&b).next().unwrap();
        assert!(pa.is_finer(&pb).is_err());
    }

    #[test]
    fn orderings_cover_all_sequences() {
        let pp = parse("1^2 -1^2");
        let two: Vec<Partition> = enumerate_partitions(&pp)
            .filter(|p| p.len() == 2)
            .collect();
        for p in &two {
            let ords = p.orderings();
            assert_eq!(ords.len(), 2);
            assert_ne!(ords[0].blocks(), ords[1].blocks());
            for o in &ords {
                assert_eq!(&o.unordered(), p);
            }
        }
    }
}
