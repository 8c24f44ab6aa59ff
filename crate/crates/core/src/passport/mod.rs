//! Passports: the input universe.
//!
//! A passport records signed vertex weights with multiplicities; its weighted
//! sum must vanish exactly. A *full* passport has every multiplicity equal to
//! one, so each vertex carries a distinct label `(weight, subscript)`.
//!
//! Text grammar (whitespace separated): `w[_k][^m]` with `w` a nonzero
//! integer or fraction `a/b` (leading `-` for negatives), `_k` a subscript
//! and `^m` a multiplicity. Canonical order lists positive weights by
//! descending value then ascending subscript, then negative weights by
//! descending magnitude then ascending subscript.

mod partition;

pub use partition::{
    count_partitions, enumerate_partitions, is_decomposable, max_partition_length,
    OrderedPartition, Partition, Partitions,
};

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num::bigint::BigInt;
use num::integer::Integer;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::weight::{format_rational, Weight};

/// A vertex label: weight plus a distinguishing subscript.
///
/// `explicit` records whether the subscript was written out in the source
/// text; it only affects display (an auto subscript 1 in a singleton weight
/// class prints bare), never identity.
#[derive(Clone, Debug)]
pub struct IndexLabel {
    pub weight: Weight,
    pub subscript: u32,
    explicit: bool,
}

impl PartialEq for IndexLabel {
    fn eq(&self, other: &Self) -> bool {
        self.weight == other.weight && self.subscript == other.subscript
    }
}
impl Eq for IndexLabel {}

impl std::hash::Hash for IndexLabel {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.weight.hash(state);
        self.subscript.hash(state);
    }
}

impl IndexLabel {
    pub fn new(weight: Weight, subscript: u32) -> Self {
        IndexLabel { weight, subscript, explicit: false }
    }

    pub fn explicit(weight: Weight, subscript: u32) -> Self {
        IndexLabel { weight, subscript, explicit: true }
    }

    /// Canonical order: black (positive) labels first by descending weight,
    /// then white labels by descending magnitude; subscripts ascending.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        let a = self.weight.value();
        let b = other.weight.value();
        match (a.is_positive(), b.is_positive()) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (true, true) => b.cmp(a).then(self.subscript.cmp(&other.subscript)),
            // both negative: descending |w| means ascending value
            (false, false) => a.cmp(b).then(self.subscript.cmp(&other.subscript)),
        }
    }

    fn token(&self, bare: bool) -> String {
        let w = self.weight.to_string();
        if bare && self.subscript == 1 && !self.explicit {
            w
        } else {
            format!("{}_{}", w, self.subscript)
        }
    }
}

/// Parses one grammar term into (weight, explicit subscript, multiplicity).
fn parse_term(tok: &str) -> Result<(Weight, Option<u32>, u32)> {
    let (head, mult) = match tok.split_once('^') {
        Some((h, m)) => {
            let m: u32 = m
                .parse()
                .map_err(|_| Error::Parse(format!("bad multiplicity in `{tok}`")))?;
            if m == 0 {
                return Err(Error::Parse(format!("zero multiplicity in `{tok}`")));
            }
            (h, m)
        }
        None => (tok, 1),
    };
    let (w, sub) = match head.split_once('_') {
        Some((w, s)) => {
            let s: u32 = s
                .parse()
                .map_err(|_| Error::Parse(format!("bad subscript in `{tok}`")))?;
            if s == 0 {
                return Err(Error::Parse(format!("zero subscript in `{tok}`")));
            }
            (w, Some(s))
        }
        None => (head, None),
    };
    Ok((Weight::parse(w)?, sub, mult))
}

/// A multiset of labeled weights with zero weighted sum.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Passport {
    // (label, multiplicity), canonical order
    entries: Vec<(IndexLabel, u32)>,
}

impl Passport {
    pub fn new(mut entries: Vec<(IndexLabel, u32)>) -> Result<Self> {
        entries.sort_by(|a, b| a.0.canonical_cmp(&b.0));
        let mut sum = BigRational::zero();
        let mut pos = 0usize;
        let mut neg = 0usize;
        let mut total = 0usize;
        for (label, mult) in &entries {
            let m = BigRational::from_integer(BigInt::from(*mult));
            sum += label.weight.value() * &m;
            if label.weight.is_positive() {
                pos += *mult as usize;
            } else {
                neg += *mult as usize;
            }
            total += *mult as usize;
        }
        if !sum.is_zero() {
            return Err(Error::NonzeroSum(format_rational(&sum)));
        }
        if pos == 0 || neg == 0 {
            return Err(Error::OneSided);
        }
        if total < 2 {
            return Err(Error::TooSmall);
        }
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::DuplicateLabel(pair[0].0.token(false)));
            }
        }
        Ok(Passport { entries })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(Error::Parse("empty passport".into()));
        }
        let mut terms = Vec::new();
        for tok in tokens {
            terms.push(parse_term(tok)?);
        }
        // terms without an explicit subscript take the smallest subscript
        // their weight class has not claimed yet
        let mut entries: Vec<(IndexLabel, u32)> = Vec::new();
        for (i, (weight, sub, mult)) in terms.iter().enumerate() {
            let label = match sub {
                Some(s) => IndexLabel::explicit(weight.clone(), *s),
                None => {
                    let taken: Vec<u32> = terms
                        .iter()
                        .enumerate()
                        .filter(|(j, t)| t.0 == *weight && (t.1.is_some() || *j < i))
                        .filter_map(|(j, t)| {
                            t.1.or_else(|| entries.get(j).map(|e| e.0.subscript))
                        })
                        .collect();
                    let s = (1..).find(|s| !taken.contains(s)).unwrap();
                    IndexLabel::new(weight.clone(), s)
                }
            };
            entries.push((label, *mult));
        }
        Passport::new(entries)
    }

    pub fn entries(&self) -> &[(IndexLabel, u32)] {
        &self.entries
    }

    /// Number of black vertices.
    pub fn p(&self) -> usize {
        self.entries
            .iter()
            .filter(|(l, _)| l.weight.is_positive())
            .map(|(_, m)| *m as usize)
            .sum()
    }

    /// Number of white vertices.
    pub fn q(&self) -> usize {
        self.size() - self.p()
    }

    /// Total vertex count.
    pub fn size(&self) -> usize {
        self.entries.iter().map(|(_, m)| *m as usize).sum()
    }

    /// Total weight: half the sum of absolute weighted multiplicities.
    pub fn total_weight(&self) -> BigRational {
        let two = BigRational::from_integer(BigInt::from(2));
        self.entries
            .iter()
            .map(|(l, m)| l.weight.abs() * BigRational::from_integer(BigInt::from(*m)))
            .sum::<BigRational>()
            / two
    }

    /// Existence criterion for a weighted bi-colored plane tree of this
    /// passport: `(p + q - 1) * gcd(weights) <= total_weight`, where the gcd
    /// of rationals is taken after clearing denominators.
    pub fn existence_check(&self) -> bool {
        let scale = self
            .entries
            .iter()
            .fold(BigInt::one(), |acc, (l, _)| acc.lcm(l.weight.value().denom()));
        let gcd_scaled = self.entries.iter().fold(BigInt::zero(), |acc, (l, _)| {
            let scaled = (l.weight.abs() * BigRational::from_integer(scale.clone()))
                .to_integer();
            acc.gcd(&scaled)
        });
        let gcd = BigRational::new(gcd_scaled, scale);
        let count = BigRational::from_integer(BigInt::from(self.size() as i64 - 1));
        count * gcd <= self.total_weight()
    }

    /// Expands multiplicities, assigning fresh subscripts 1..m inside each
    /// weight class. A class whose labels already carry subscripts 1..m with
    /// unit multiplicities is kept verbatim.
    pub fn expand_full(&self) -> FullPassport {
        let mut labels = Vec::new();
        let mut i = 0;
        while i < self.entries.len() {
            let weight = self.entries[i].0.weight.clone();
            let mut j = i;
            let mut count = 0u32;
            while j < self.entries.len() && self.entries[j].0.weight == weight {
                count += self.entries[j].1;
                j += 1;
            }
            let class = &self.entries[i..j];
            let untouched = class.iter().all(|(_, m)| *m == 1)
                && class
                    .iter()
                    .enumerate()
                    .all(|(k, (l, _))| l.subscript == (k + 1) as u32);
            if untouched {
                labels.extend(class.iter().map(|(l, _)| l.clone()));
            } else {
                for sub in 1..=count {
                    labels.push(IndexLabel::new(weight.clone(), sub));
                }
            }
            i = j;
        }
        FullPassport::from_labels(labels).expect("expansion preserves validity")
    }
}

impl fmt::Display for Passport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut class_size: HashMap<&BigRational, u32> = HashMap::new();
        for (label, _) in &self.entries {
            *class_size.entry(label.weight.value()).or_default() += 1;
        }
        let mut first = true;
        for (label, mult) in &self.entries {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            let bare = class_size[label.weight.value()] == 1;
            write!(f, "{}", label.token(bare))?;
            if *mult > 1 {
                write!(f, "^{mult}")?;
            }
        }
        Ok(())
    }
}

/// A passport with all multiplicities equal to one. Labels are kept in
/// canonical order and double as positions `0..N`.
#[derive(Clone, Debug)]
pub struct FullPassport {
    labels: Vec<IndexLabel>,
    weights: Vec<BigRational>,
    // weights cleared to a common denominator; all sum/sign predicates run on
    // these exact integers
    scale: BigInt,
    scaled: Vec<BigInt>,
}

impl PartialEq for FullPassport {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}
impl Eq for FullPassport {}

impl FullPassport {
    pub fn parse(text: &str) -> Result<Arc<Self>> {
        Ok(Arc::new(Passport::parse(text)?.expand_full()))
    }

    fn from_labels(mut labels: Vec<IndexLabel>) -> Result<Self> {
        labels.sort_by(|a, b| a.canonical_cmp(b));
        for pair in labels.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateLabel(pair[0].token(false)));
            }
        }
        let weights: Vec<BigRational> =
            labels.iter().map(|l| l.weight.value().clone()).collect();
        let sum: BigRational = weights.iter().sum();
        if !sum.is_zero() {
            return Err(Error::NonzeroSum(format_rational(&sum)));
        }
        if weights.iter().all(|w| w.is_positive()) || weights.iter().all(|w| w.is_negative()) {
            return Err(Error::OneSided);
        }
        if labels.len() < 2 {
            return Err(Error::TooSmall);
        }
        let scale = weights
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let scaled = weights
            .iter()
            .map(|w| (w * BigRational::from_integer(scale.clone())).to_integer())
            .collect();
        Ok(FullPassport { labels, weights, scale, scaled })
    }

    /// Builds a full passport from raw weights, assigning subscripts within
    /// each weight class by input position. Returns the map from input
    /// position to canonical position.
    pub fn from_weights(weights: Vec<BigRational>) -> Result<(Arc<Self>, Vec<usize>)> {
        let n = weights.len();
        let mut order: Vec<usize> = (0..n).collect();
        let probe: Vec<IndexLabel> = weights
            .iter()
            .map(|w| Ok(IndexLabel::new(Weight::new(w.clone())?, 1)))
            .collect::<Result<_>>()?;
        order.sort_by(|&a, &b| probe[a].canonical_cmp(&probe[b]).then(a.cmp(&b)));
        let mut labels = vec![None; n];
        let mut i = 0;
        while i < n {
            let w = &weights[order[i]];
            let mut j = i;
            while j < n && &weights[order[j]] == w {
                labels[order[j]] = Some(IndexLabel::new(
                    Weight::new(w.clone())?,
                    (j - i + 1) as u32,
                ));
                j += 1;
            }
            i = j;
        }
        let labels: Vec<IndexLabel> = labels.into_iter().map(Option::unwrap).collect();
        let pp = FullPassport::from_labels(labels.clone())?;
        let map = labels
            .iter()
            .map(|l| pp.label_index(l).expect("label present"))
            .collect();
        Ok((Arc::new(pp), map))
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[IndexLabel] {
        &self.labels
    }

    pub fn weight(&self, index: usize) -> &BigRational {
        &self.weights[index]
    }

    pub fn is_black(&self, index: usize) -> bool {
        self.weights[index].is_positive()
    }

    /// Weights cleared to the common denominator `scale()`.
    pub fn scaled(&self) -> &[BigInt] {
        &self.scaled
    }

    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn label_index(&self, label: &IndexLabel) -> Option<usize> {
        self.labels
            .binary_search_by(|probe| probe.canonical_cmp(label))
            .ok()
    }

    /// Resolves a text token such as `2_3` or `-4` to a position.
    pub fn parse_label(&self, token: &str) -> Result<usize> {
        let (weight, sub, mult) = parse_term(token)?;
        if mult != 1 {
            return Err(Error::Parse(format!("label `{token}` has a multiplicity")));
        }
        let label = IndexLabel::new(weight, sub.unwrap_or(1));
        self.label_index(&label)
            .ok_or_else(|| Error::UnknownLabel(token.to_string()))
    }

    /// Display token for a position: bare when the weight class is a
    /// singleton with subscript 1.
    pub fn label_token(&self, index: usize) -> String {
        let label = &self.labels[index];
        let class = self
            .labels
            .iter()
            .filter(|l| l.weight == label.weight)
            .count();
        label.token(class == 1)
    }

    pub fn p(&self) -> usize {
        self.weights.iter().filter(|w| w.is_positive()).count()
    }

    pub fn q(&self) -> usize {
        self.n() - self.p()
    }

    pub fn total_weight(&self) -> BigRational {
        let two = BigRational::from_integer(BigInt::from(2));
        self.weights.iter().map(|w| w.abs()).sum::<BigRational>() / two
    }

    pub fn to_passport(&self) -> Passport {
        Passport::new(self.labels.iter().map(|l| (l.clone(), 1)).collect())
            .expect("full passport is a valid passport")
    }

    /// The sub-passport induced by a set of positions; labels are retained.
    pub fn subpassport(&self, positions: &[usize]) -> Arc<FullPassport> {
        let labels = positions.iter().map(|&i| self.labels[i].clone()).collect();
        Arc::new(FullPassport::from_labels(labels).expect("zero-sum block"))
    }
}

impl fmt::Display for FullPassport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_passport())
    }
}

/// A decomposable passport nudged into a non-decomposable one by adding a
/// zero-sum epsilon to the weights. Non-decomposable inputs pass through
/// untouched with epsilon identically zero.
#[derive(Clone, Debug)]
pub struct PerturbedPassport {
    base: Arc<FullPassport>,
    perturbed: Arc<FullPassport>,
    /// epsilon by base position; all zero when the base was non-decomposable
    epsilon: Vec<BigRational>,
    /// distinguished label position (in the base), `None` when untouched
    s_minus: Option<usize>,
    /// base position -> perturbed position
    base_to_perturbed: Vec<usize>,
}

impl PerturbedPassport {
    pub fn base(&self) -> &Arc<FullPassport> {
        &self.base
    }

    pub fn perturbed(&self) -> &Arc<FullPassport> {
        &self.perturbed
    }

    pub fn epsilon(&self) -> &[BigRational] {
        &self.epsilon
    }

    pub fn s_minus(&self) -> Option<usize> {
        self.s_minus
    }

    pub fn base_to_perturbed(&self) -> &[usize] {
        &self.base_to_perturbed
    }

    pub fn is_trivial(&self) -> bool {
        self.s_minus.is_none()
    }
}

/// Smallest nonzero magnitude among all subset sums of the weights.
pub fn min_nonzero_subset_sum(pp: &FullPassport) -> BigRational {
    let n = pp.n();
    assert!(n <= 24, "subset scan is exponential; passport too large");
    let scaled = pp.scaled();
    let mut best: Option<BigInt> = None;
    let mut sums = vec![BigInt::zero(); 1 << n];
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = &sums[mask & (mask - 1)] + &scaled[low];
        let mag = sums[mask].abs();
        if !mag.is_zero() && best.as_ref().map_or(true, |b| &mag < b) {
            best = Some(mag);
        }
    }
    BigRational::new(best.expect("some subset has nonzero sum"), pp.scale().clone())
}

/// Perturbs a decomposable full passport into a non-decomposable one.
///
/// Deterministic choice: with `E0` the smallest nonzero subset-sum magnitude
/// and `eps0 = E0/(N-1)`, the distinguished label is the canonically last
/// one and every other label receives `eps0/(2N)`.
pub fn perturb(pp: &Arc<FullPassport>) -> PerturbedPassport {
    let n = pp.n();
    if !is_decomposable(pp) {
        return PerturbedPassport {
            base: pp.clone(),
            perturbed: pp.clone(),
            epsilon: vec![BigRational::zero(); n],
            s_minus: None,
            base_to_perturbed: (0..n).collect(),
        };
    }
    let e0 = min_nonzero_subset_sum(pp);
    let eps0 = e0 / BigRational::from_integer(BigInt::from(n as i64 - 1));
    let small = &eps0 / BigRational::from_integer(BigInt::from(2 * n as i64));
    let s_minus = n - 1;
    let mut epsilon = vec![small.clone(); n];
    epsilon[s_minus] = -BigRational::from_integer(BigInt::from(n as i64 - 1)) * &small;
    let weights = (0..n)
        .map(|i| pp.weight(i) + &epsilon[i])
        .collect::<Vec<_>>();
    let (perturbed, base_to_perturbed) =
        FullPassport::from_weights(weights).expect("perturbed weights stay valid");
    debug_assert!(!is_decomposable(&perturbed));
    PerturbedPassport {
        base: pp.clone(),
        perturbed,
        epsilon,
        s_minus: Some(s_minus),
        base_to_perturbed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_appendix_passport() {
        let p = Passport::parse("3 1_1 1_2 -4 -1").unwrap();
        assert_eq!(p.size(), 5);
        assert_eq!(p.p(), 3);
        assert_eq!(p.q(), 2);
        assert_eq!(p.to_string(), "3 1_1 1_2 -4 -1");
        let full = p.expand_full();
        assert_eq!(full.n(), 5);
        assert_eq!(full.to_string(), "3 1_1 1_2 -4 -1");
    }

    #[test]
    fn expands_power_notation() {
        let p = Passport::parse("1^3 -3").unwrap();
        assert_eq!(p.to_string(), "1^3 -3");
        let full = p.expand_full();
        assert_eq!(full.to_string(), "1_1 1_2 1_3 -3");
        assert_eq!(full.n(), 4);
    }

    #[test]
    fn rejects_bad_passports() {
        assert!(matches!(Passport::parse("1 1"), Err(Error::NonzeroSum(_))));
        assert!(matches!(Passport::parse("0 1 -1"), Err(Error::ZeroWeight(_))));
        assert!(matches!(
            Passport::parse("1_1 1_1 -2"),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(Passport::parse("").is_err());
        assert!(Passport::parse("2 1_x -3").is_err());
    }

    #[test]
    fn canonical_order_sorts_blacks_then_whites() {
        let p = Passport::parse("-1 1_2 -4 3 1_1").unwrap();
        assert_eq!(p.to_string(), "3 1_1 1_2 -4 -1");
        let labels: Vec<String> = {
            let full = p.expand_full();
            (0..full.n()).map(|i| full.label_token(i)).collect()
        };
        assert_eq!(labels, ["3", "1_1", "1_2", "-4", "-1"]);
    }

    #[test]
    fn existence_criterion_matches_known_cases() {
        assert!(Passport::parse("1^3 -3").unwrap().existence_check());
        assert!(!Passport::parse("1^2 -1^2").unwrap().existence_check());
        assert!(Passport::parse("2 -2").unwrap().existence_check());
        // rational weights: lcm clearing
        assert!(Passport::parse("1/2 1/2 -1").unwrap().existence_check());
    }

    #[test]
    fn rational_weights_scale_exactly() {
        let full = FullPassport::parse("1/2 1/2 -1").unwrap();
        assert_eq!(full.scale(), &BigInt::from(2));
        let scaled: Vec<i64> = full.scaled().iter().map(|s| s.to_i64().unwrap()).collect();
        assert_eq!(scaled, [1, 1, -2]);
    }

    #[test]
    fn perturbation_matches_worked_example() {
        let pp = FullPassport::parse("1_1 1_2 -1_1 -1_2").unwrap();
        let pert = perturb(&pp);
        assert!(!pert.is_trivial());
        assert_eq!(pert.epsilon()[0], rat(1, 24));
        assert_eq!(pert.epsilon()[1], rat(1, 24));
        assert_eq!(pert.epsilon()[2], rat(1, 24));
        assert_eq!(pert.epsilon()[3], rat(-1, 8));
        let mut got: Vec<BigRational> = (0..4)
            .map(|i| pert.perturbed().weight(pert.base_to_perturbed()[i]).clone())
            .collect();
        got.sort();
        let mut want = vec![rat(25, 24), rat(25, 24), rat(-23, 24), rat(-9, 8)];
        want.sort();
        assert_eq!(got, want);
        assert!(!is_decomposable(pert.perturbed()));
    }

    #[test]
    fn perturbation_leaves_nondecomposable_untouched() {
        let pp = FullPassport::parse("2^3 -3^2").unwrap();
        let pert = perturb(&pp);
        assert!(pert.is_trivial());
        assert!(pert.epsilon().iter().all(|e| e.is_zero()));
        assert_eq!(pert.perturbed().as_ref(), pp.as_ref());
    }

    #[test]
    fn perturbation_satisfies_subset_sign_rule() {
        // all nonempty proper subsets: epsilon sum nonzero, positive iff
        // the distinguished label is excluded; magnitude below E0
        for text in ["1_1 1_2 -1_1 -1_2", "1^3 -1^3", "2 1 -1 -2"] {
            let pp = FullPassport::parse(text).unwrap();
            let pert = perturb(&pp);
            if pert.is_trivial() {
                continue;
            }
            let n = pp.n();
            let e0 = min_nonzero_subset_sum(&pp);
            let sm = pert.s_minus().unwrap();
            for mask in 0u32..(1 << n) {
                let sum: BigRational = (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| pert.epsilon()[i].clone())
                    .sum();
                assert!(sum.abs() < e0);
                if mask != 0 && mask != (1 << n) - 1 {
                    assert!(!sum.is_zero());
                    assert_eq!(sum.is_positive(), mask & (1 << sm) == 0);
                }
            }
        }
    }
}
