//! Exact evaluation of the counting formulas.
//!
//! All counts stream over `enumerate_partitions`; there are no closed-form
//! shortcuts except the non-decomposable fast path, so the partition stream
//! (verified independently) is the single source of truth. Counts are
//! arbitrary-precision integers throughout.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::passport::{enumerate_partitions, is_decomposable, FullPassport, Partition};
use crate::permutation::{self, ClassFilter};

pub fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// Stirling numbers of the second kind, by the triangle recurrence.
pub fn stirling2(n: usize, k: usize) -> Result<BigInt> {
    if k > n {
        return Err(Error::Parse(format!("stirling2({n},{k}) out of range")));
    }
    let mut row = vec![BigInt::one()]; // S(0,0)
    for m in 1..=n {
        let mut next = vec![BigInt::zero(); m + 1];
        for j in 1..=m {
            let prev_j = if j < row.len() { row[j].clone() } else { BigInt::zero() };
            next[j] = prev_j * BigInt::from(j as u64) + &row[j - 1];
        }
        row = next;
    }
    Ok(row[k].clone())
}

pub fn falling_factorial(x: &BigRational, n: usize) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..n {
        acc *= x - BigRational::from_integer(BigInt::from(i as i64));
    }
    acc
}

pub fn rising_factorial(x: &BigRational, n: usize) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..n {
        acc *= x + BigRational::from_integer(BigInt::from(i as i64));
    }
    acc
}

fn rising_int(x: i64, n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..n {
        acc *= BigInt::from(x + i as i64);
    }
    acc
}

/// Count of positive permutations: alternating partition sum of X.
pub fn np_plus(pp: &Arc<FullPassport>) -> BigInt {
    let mut total = BigInt::zero();
    for p in enumerate_partitions(pp) {
        let term = p.x_value();
        if p.len() % 2 == 1 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Count of nonnegative permutations: the same sum with all signs positive.
pub fn count_nonneg(pp: &Arc<FullPassport>) -> BigInt {
    enumerate_partitions(pp).map(|p| p.x_value()).sum()
}

/// Signed term of the positive-tree-permutation sum for one partition.
pub fn pos_tree_term(n: usize, p: &Partition) -> BigInt {
    let len = p.len();
    let mut term = p.x_value() * BigInt::from(n as u64 - 1).pow(len as u32 - 1);
    if len % 2 == 0 {
        term = -term;
    }
    term
}

/// Count of positive tree permutations.
pub fn count_pos_tree(pp: &Arc<FullPassport>) -> BigInt {
    let n = pp.n();
    enumerate_partitions(pp).map(|p| pos_tree_term(n, &p)).sum()
}

/// Number of trees of the passport: the positive-tree-permutation count
/// divided exactly by N-1. A failed division signals an implementation bug.
pub fn kochetkov_count(pp: &Arc<FullPassport>) -> Result<BigInt> {
    exact_div(count_pos_tree(pp), BigInt::from(pp.n() as u64 - 1))
}

/// Number of trees when zero-weight edges are allowed (the formula only;
/// such trees are never enumerated here).
pub fn count_zero_edge_trees(pp: &Arc<FullPassport>) -> Result<BigInt> {
    let n = pp.n();
    let total: BigInt = enumerate_partitions(pp)
        .map(|p| p.x_value() * BigInt::from(n as u64 - 1).pow(p.len() as u32 - 1))
        .sum();
    exact_div(total, BigInt::from(n as u64 - 1))
}

fn exact_div(num: BigInt, den: BigInt) -> Result<BigInt> {
    let (q, r) = num::Integer::div_rem(&num, &den);
    if !r.is_zero() {
        return Err(Error::Divisibility(num.to_string(), den.to_string()));
    }
    Ok(q)
}

/// Count of positive permutations via the structural recursion: a positive
/// permutation is a positive tree permutation with positive permutations of
/// the blocks of a partition spliced into the gaps.
pub fn recursive_pos_count(pp: &Arc<FullPassport>) -> BigInt {
    let mut memo = HashMap::new();
    recursive_pos_count_memo(pp, &mut memo)
}

fn recursive_pos_count_memo(
    pp: &Arc<FullPassport>,
    memo: &mut HashMap<String, BigInt>,
) -> BigInt {
    let key = pp.to_string();
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let n = pp.n();
    let value = if !is_decomposable(pp) {
        factorial(n - 1)
    } else {
        let mut total = count_pos_tree(pp);
        for two in enumerate_partitions(pp).filter(|p| p.len() == 2) {
            for ordered in two.orderings() {
                let base = ordered.block_passport(0);
                let rest = ordered.block_passport(1);
                let n0 = base.n();
                let tree_count = count_pos_tree(&base);
                if tree_count.is_zero() {
                    continue;
                }
                let mut inner = BigInt::zero();
                for p_plus in enumerate_partitions(&rest) {
                    // number of ways to splice |p| blocks into a tree
                    // permutation with n0 labels: rising factorial
                    let mut ways = rising_int(n0 as i64 - 1, p_plus.len());
                    for b in 0..p_plus.len() {
                        ways *= recursive_pos_count_memo(&p_plus.block_passport(b), memo);
                    }
                    inner += ways;
                }
                total += tree_count * inner;
            }
        }
        total
    };
    memo.insert(key, value.clone());
    value
}

/// One sum of the subset-power lemma: over all subsets A of the x's,
/// (-1)^|A| (y + sum of A)^k. Vanishes whenever k < |xs|.
pub fn subset_sum_power(y: &BigInt, xs: &[BigInt], k: usize) -> BigInt {
    let m = xs.len();
    let mut total = BigInt::zero();
    for mask in 0u64..(1 << m) {
        let mut base = y.clone();
        for (i, x) in xs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                base += x;
            }
        }
        let term = base.pow(k as u32);
        if mask.count_ones() % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Outcome of one identity check.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityOutcome {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

/// Verifies the algebraic identities behind the counting formulas, exactly,
/// at the given integer samples. Failures are reported, not raised.
pub fn identity_suite(pp: &Arc<FullPassport>, x_samples: &[i64]) -> Vec<IdentityOutcome> {
    let mut out = Vec::new();
    let n = pp.n();

    // Stirling inversion x^n = sum_k S(n,k) (x)_k
    let mut pass = true;
    let mut detail = String::new();
    for &x in x_samples {
        let xr = BigRational::from_integer(BigInt::from(x));
        for m in 1..=8usize {
            let lhs = xr.pow(m as i32);
            let rhs: BigRational = (1..=m)
                .map(|k| {
                    BigRational::from_integer(stirling2(m, k).unwrap())
                        * falling_factorial(&xr, k)
                })
                .sum();
            if lhs != rhs {
                pass = false;
                detail = format!("x={x}, n={m}");
            }
        }
    }
    out.push(IdentityOutcome { name: "stirling_inversion".into(), detail, pass });

    // block counts and X values, shared by the remaining identities
    let parts: Vec<(usize, BigInt, Vec<Arc<FullPassport>>)> = enumerate_partitions(pp)
        .map(|p| {
            let blocks = (0..p.len()).map(|b| p.block_passport(b)).collect();
            (p.len(), p.x_value(), blocks)
        })
        .collect();
    let mut np_memo: HashMap<String, BigInt> = HashMap::new();
    let mut np = |b: &Arc<FullPassport>, memo: &mut HashMap<String, BigInt>| -> BigInt {
        memo.entry(b.to_string()).or_insert_with(|| np_plus(b)).clone()
    };

    // rising-factorial transform of the positive counts equals the
    // plain power sum of X, at every sample
    let mut pass = true;
    let mut detail = String::new();
    for &x in x_samples {
        let mut lhs = BigInt::zero();
        let mut rhs = BigInt::zero();
        for (len, x_val, blocks) in &parts {
            let mut term = rising_int(x, *len);
            for b in blocks {
                term *= np(b, &mut np_memo);
            }
            lhs += term;
            rhs += BigInt::from(x).pow(*len as u32) * x_val;
        }
        if lhs != rhs {
            pass = false;
            detail = format!("x={x}");
        }
    }
    out.push(IdentityOutcome { name: "rising_power_transform".into(), detail, pass });

    // (N-1)! = sum over partitions of (|p|-1)! prod NP+(blocks)
    let mut lhs = BigInt::zero();
    for (len, _, blocks) in &parts {
        let mut term = factorial(len - 1);
        for b in blocks {
            term *= np(b, &mut np_memo);
        }
        lhs += term;
    }
    let pass = lhs == factorial(n - 1);
    out.push(IdentityOutcome {
        name: "factorial_cancellation".into(),
        detail: format!("lhs={lhs}"),
        pass,
    });

    // the same partition sum with block counts taken by brute force
    let mut lhs = BigInt::zero();
    let mut ok = true;
    for (len, _, blocks) in &parts {
        let mut term = factorial(len - 1);
        for b in blocks {
            match permutation::count(b, ClassFilter::Positive, permutation::PERM_SIZE_GUARD) {
                Ok(c) => term *= c,
                Err(_) => ok = false,
            }
        }
        lhs += term;
    }
    let pass = ok && lhs == factorial(n - 1);
    out.push(IdentityOutcome {
        name: "factorial_cancellation_bruteforce".into(),
        detail: format!("lhs={lhs}"),
        pass,
    });

    // subset-power lemma at small fixed samples
    let mut pass = true;
    let mut detail = String::new();
    let samples: [(i64, &[i64], usize); 3] =
        [(-1, &[2, 3, 4], 2), (5, &[1, 2, 2, 7], 3), (0, &[1, 4], 1)];
    for (y, xs, k) in samples {
        let xs: Vec<BigInt> = xs.iter().map(|&v| BigInt::from(v)).collect();
        let got = subset_sum_power(&BigInt::from(y), &xs, k);
        if !got.is_zero() {
            pass = false;
            detail = format!("y={y}, k={k}");
        }
    }
    out.push(IdentityOutcome { name: "subset_sum_power".into(), detail, pass });

    out
}

/// Named exact counts of one passport, all from formula evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct CountReport {
    pub passport: String,
    pub n: usize,
    /// decimal strings, keyed by count name
    pub counts: BTreeMap<String, String>,
}

pub fn count_report(pp: &Arc<FullPassport>) -> Result<CountReport> {
    let n = pp.n();
    let trees = kochetkov_count(pp)?;
    let pos_tree = count_pos_tree(pp);
    let mut counts = BTreeMap::new();
    counts.insert("trees".into(), trees.to_string());
    counts.insert("pos_tree_perms".into(), pos_tree.to_string());
    counts.insert("pos_perms".into(), np_plus(pp).to_string());
    counts.insert("nonneg_perms".into(), count_nonneg(pp).to_string());
    counts.insert(
        "tree_perms".into(),
        (&trees * BigInt::from((n * (n - 1)) as u64)).to_string(),
    );
    counts.insert(
        "partitions".into(),
        crate::passport::count_partitions(pp).to_string(),
    );
    counts.insert(
        "zero_edge_trees".into(),
        count_zero_edge_trees(pp)?.to_string(),
    );
    Ok(CountReport { passport: pp.to_string(), n, counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Arc<FullPassport> {
        FullPassport::parse(text).unwrap()
    }

    fn int(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn stirling_basics() {
        // S(3,2) counts the 2-partitions of a 3-set
        assert_eq!(stirling2(3, 2).unwrap(), int(3));
        for n in 1..=8 {
            assert_eq!(stirling2(n, 1).unwrap(), int(1));
            assert_eq!(stirling2(n, n).unwrap(), int(1));
        }
        assert_eq!(stirling2(5, 3).unwrap(), int(25));
        assert!(stirling2(3, 4).is_err());
    }

    #[test]
    fn stirling_inversion_at_seven() {
        let x = BigRational::from_integer(int(7));
        let lhs = x.pow(5);
        let rhs: BigRational = (1..=5)
            .map(|k| {
                BigRational::from_integer(stirling2(5, k).unwrap()) * falling_factorial(&x, k)
            })
            .sum();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn factorials_are_exact() {
        let x = BigRational::new(int(3), int(2));
        // (3/2)(1/2)(-1/2) and (3/2)(5/2)(7/2)
        assert_eq!(falling_factorial(&x, 3), BigRational::new(int(-3), int(8)));
        assert_eq!(rising_factorial(&x, 3), BigRational::new(int(105), int(8)));
    }

    #[test]
    fn np_plus_examples() {
        assert_eq!(np_plus(&parse("3 1_1 1_2 -4 -1")), int(20));
        assert_eq!(np_plus(&parse("2^3 -3^2")), int(24));
        assert_eq!(np_plus(&parse("1^2 -1^2")), int(4));
    }

    #[test]
    fn count_nonneg_examples() {
        assert_eq!(count_nonneg(&parse("1^2 -1^2")), int(8));
        assert_eq!(count_nonneg(&parse("2^3 -3^2")), int(24));
        assert_eq!(count_nonneg(&parse("3 1_1 1_2 -4 -1")), int(28));
    }

    #[test]
    fn pos_tree_and_kochetkov_examples() {
        let pp = parse("3 1_1 1_2 -4 -1");
        assert_eq!(count_pos_tree(&pp), int(8));
        assert_eq!(kochetkov_count(&pp).unwrap(), int(2));

        let pp = parse("1^2 -1^2");
        assert_eq!(count_pos_tree(&pp), int(0));
        assert_eq!(kochetkov_count(&pp).unwrap(), int(0));

        // non-decomposable: (N-2)!
        assert_eq!(kochetkov_count(&parse("2^3 -3^2")).unwrap(), int(6));
    }

    #[test]
    fn zero_edge_tree_values() {
        // non-decomposable: single term, (N-2)!
        assert_eq!(count_zero_edge_trees(&parse("2^3 -3^2")).unwrap(), int(6));
        assert_eq!(count_zero_edge_trees(&parse("1^2 -1^2")).unwrap(), int(4));
        assert_eq!(count_zero_edge_trees(&parse("3 1_1 1_2 -4 -1")).unwrap(), int(10));
    }

    #[test]
    fn recursion_agrees_with_partition_sum() {
        for text in [
            "1^2 -1^2",
            "3 1_1 1_2 -4 -1",
            "2^3 -3^2",
            "1^3 -1^3",
            "2 1^2 -2 -1^2",
        ] {
            let pp = parse(text);
            assert_eq!(recursive_pos_count(&pp), np_plus(&pp), "{text}");
        }
    }

    #[test]
    fn brute_force_agreement_small() {
        for text in ["1^2 -1^2", "3 1_1 1_2 -4 -1", "1^3 -3", "2 1 -3", "1^3 -1^3"] {
            let pp = parse(text);
            let guard = permutation::PERM_SIZE_GUARD;
            assert_eq!(
                np_plus(&pp),
                permutation::count(&pp, ClassFilter::Positive, guard).unwrap(),
                "{text} positive"
            );
            assert_eq!(
                count_nonneg(&pp),
                permutation::count(&pp, ClassFilter::Nonnegative, guard).unwrap(),
                "{text} nonnegative"
            );
            assert_eq!(
                count_pos_tree(&pp),
                permutation::count(&pp, ClassFilter::PositiveTree, guard).unwrap(),
                "{text} positive tree"
            );
        }
    }

    #[test]
    fn subset_lemma_vanishes_below_m() {
        let xs: Vec<BigInt> = [2, 3, 4].iter().map(|&v| int(v)).collect();
        assert_eq!(subset_sum_power(&int(-1), &xs, 2), int(0));
        // k = m does not vanish in general
        assert_ne!(subset_sum_power(&int(-1), &xs, 3), int(0));
    }

    #[test]
    fn identity_suite_passes_on_examples() {
        for text in ["3 1_1 1_2 -4 -1", "1^2 -1^2", "2^3 -3^2"] {
            let pp = parse(text);
            let outcomes = identity_suite(&pp, &[0, 1, 2, 3, 4]);
            for o in &outcomes {
                assert!(o.pass, "{text}: {} {}", o.name, o.detail);
            }
        }
    }

    #[test]
    fn count_report_consistency() {
        let pp = parse("3 1_1 1_2 -4 -1");
        let report = count_report(&pp).unwrap();
        assert_eq!(report.counts["trees"], "2");
        assert_eq!(report.counts["pos_tree_perms"], "8");
        assert_eq!(report.counts["tree_perms"], "40");
        assert_eq!(report.counts["partitions"], "3");
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"trees\":\"2\""));
    }
}
