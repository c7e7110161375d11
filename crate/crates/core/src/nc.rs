//! Non-crossing partitions, their Möbius function, and the moment/cumulant
//! transforms built on them.
//!
//! Points are numbered `1..=n`. Blocks are stored sorted and ordered by their
//! smallest element, which makes the representation canonical.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{AlgebraError, DiagonalElement, Element, Flavor};
use crate::graph::{Graph, PathWord};
use crate::scalar::Coeff;

/// Largest `n` for which `NC(n)` is enumerated; `|NC(14)| = 2_674_440`.
pub const MAX_NC_SIZE: usize = 14;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NcError {
    #[error("n = {0} is outside 1..={MAX_NC_SIZE}")]
    OutOfRange(usize),
    #[error("pair partitions need an even n, got {0}")]
    OddPairing(usize),
    #[error("blocks do not partition 1..={0}")]
    NotAPartition(usize),
    #[error("blocks cross")]
    Crossing,
    #[error("partition of {expected} points applied to {got} factors")]
    SizeMismatch { expected: usize, got: usize },
    #[error("empty argument list")]
    Empty,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NcPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl NcPartition {
    /// Validates and canonicalizes.
    pub fn from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self, NcError> {
        let mut seen = vec![false; n + 1];
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .filter(|b| !b.is_empty())
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        for &i in blocks.iter().flatten() {
            if i == 0 || i > n || seen[i] {
                return Err(NcError::NotAPartition(n));
            }
            seen[i] = true;
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(NcError::NotAPartition(n));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        let p = NcPartition { n, blocks };
        if p.has_crossing() {
            return Err(NcError::Crossing);
        }
        Ok(p)
    }

    fn has_crossing(&self) -> bool {
        let label = self.labels();
        // a < b < c < d with a, c in one block and b, d in another
        for a in 1..=self.n {
            for b in a + 1..=self.n {
                if label[b] == label[a] {
                    continue;
                }
                for c in b + 1..=self.n {
                    if label[c] != label[a] {
                        continue;
                    }
                    if (c + 1..=self.n).any(|d| label[d] == label[b]) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// `label[i]` is the block index of point `i`; index 0 unused.
    fn labels(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n + 1];
        for (k, b) in self.blocks.iter().enumerate() {
            for &i in b {
                label[i] = k;
            }
        }
        label
    }

    /// The one-block partition `1_n`.
    pub fn one(n: usize) -> Self {
        NcPartition {
            n,
            blocks: vec![(1..=n).collect()],
        }
    }

    /// The all-singletons partition `0_n`.
    pub fn zero(n: usize) -> Self {
        NcPartition {
            n,
            blocks: (1..=n).map(|i| vec![i]).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_pairing(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 2)
    }

    /// `self <= other` in refinement order.
    pub fn refines(&self, other: &Self) -> bool {
        let label = other.labels();
        self.n == other.n && self.blocks.iter().all(|b| b.iter().all(|&i| label[i] == label[b[0]]))
    }

    fn block_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        sizes
    }
}

impl fmt::Display for NcPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            let items: Vec<String> = b.iter().map(usize::to_string).collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        write!(f, "}}")
    }
}

type Blocks = Vec<Vec<usize>>;

fn shifted(blocks: &Blocks, by: usize) -> impl Iterator<Item = Vec<usize>> + '_ {
    blocks.iter().map(move |b| b.iter().map(|i| i + by).collect())
}

/// Grows the block containing offset 0 one element at a time, filling each
/// gap from the table of smaller intervals; "stop here" comes after every
/// extension, so the one-block partition is listed first.
fn grow(table: &[Vec<Blocks>], len: usize, block: Vec<usize>, last: usize, others: Blocks, out: &mut Vec<Blocks>) {
    for j in last + 1..len {
        for gap in &table[j - last - 1] {
            let mut o = others.clone();
            o.extend(shifted(gap, last + 1));
            let mut b = block.clone();
            b.push(j);
            grow(table, len, b, j, o, out);
        }
    }
    for rest in &table[len - last - 1] {
        let mut blocks = Vec::with_capacity(1 + others.len() + rest.len());
        blocks.push(block.clone());
        blocks.extend(others.iter().cloned());
        blocks.extend(shifted(rest, last + 1));
        blocks.sort_unstable_by_key(|b| b[0]);
        out.push(blocks);
    }
}

fn nc_table(n: usize) -> Vec<Vec<Blocks>> {
    let mut table: Vec<Vec<Blocks>> = vec![vec![vec![]]];
    for len in 1..=n {
        let mut out = Vec::new();
        grow(&table, len, vec![0], 0, vec![], &mut out);
        table.push(out);
    }
    table
}

/// All of `NC(n)` in canonical order.
pub fn enumerate_nc(n: usize) -> Result<Vec<NcPartition>, NcError> {
    if n == 0 || n > MAX_NC_SIZE {
        return Err(NcError::OutOfRange(n));
    }
    let mut table = nc_table(n);
    Ok(table
        .pop()
        .unwrap()
        .into_iter()
        .map(|blocks| NcPartition {
            n,
            blocks: shifted(&blocks, 1).collect(),
        })
        .collect())
}

fn pairings(elems: &[usize]) -> Vec<Blocks> {
    if elems.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for j in (1..elems.len()).step_by(2) {
        let inner = pairings(&elems[1..j]);
        let outer = pairings(&elems[j + 1..]);
        for i in &inner {
            for o in &outer {
                let mut blocks = vec![vec![elems[0], elems[j]]];
                blocks.extend(i.iter().cloned());
                blocks.extend(o.iter().cloned());
                blocks.sort_unstable_by_key(|b| b[0]);
                out.push(blocks);
            }
        }
    }
    out
}

/// Non-crossing pair partitions, `|NC_2(2k)| = catalan(k)`.
pub fn enumerate_nc_pairings(n: usize) -> Result<Vec<NcPartition>, NcError> {
    if n % 2 == 1 {
        return Err(NcError::OddPairing(n));
    }
    if n == 0 || n > 2 * MAX_NC_SIZE {
        return Err(NcError::OutOfRange(n));
    }
    let elems: Vec<usize> = (1..=n).collect();
    Ok(pairings(&elems)
        .into_iter()
        .map(|blocks| NcPartition { n, blocks })
        .collect())
}

pub fn catalan(k: usize) -> BigInt {
    // c_{j+1} = c_j * 2(2j+1) / (j+2), exact at every step
    let mut c = BigInt::one();
    for j in 0..k {
        c = c * BigInt::from(2 * (2 * j + 1)) / BigInt::from(j + 2);
    }
    c
}

/// Kreweras complement, computed as the permutation `π⁻¹ ∘ γ` with
/// `γ = (1 2 ... n)` and each block of `π` read as an increasing cycle.
pub fn kreweras(p: &NcPartition) -> NcPartition {
    let n = p.n;
    let mut inverse = vec![0usize; n + 1];
    for b in &p.blocks {
        for (k, &i) in b.iter().enumerate() {
            let next = b[(k + 1) % b.len()];
            inverse[next] = i;
        }
    }
    let step = |i: usize| inverse[if i == n { 1 } else { i + 1 }];
    let mut visited = vec![false; n + 1];
    let mut blocks = Vec::new();
    for start in 1..=n {
        if visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !visited[i] {
            visited[i] = true;
            cycle.push(i);
            i = step(i);
        }
        cycle.sort_unstable();
        blocks.push(cycle);
    }
    blocks.sort_unstable_by_key(|b| b[0]);
    NcPartition { n, blocks }
}

/// `μ(p, 1_n)`, factorized over the blocks of the Kreweras complement.
pub fn mobius_to_top(p: &NcPartition) -> BigInt {
    kreweras(p)
        .blocks
        .iter()
        .map(|b| {
            let c = catalan(b.len() - 1);
            if b.len() % 2 == 0 {
                -c
            } else {
                c
            }
        })
        .product()
}

/// Sorted block sizes, number of partitions of that type, and their summed
/// Möbius value.
type TypeTable = Arc<Vec<(Vec<usize>, BigInt, BigInt)>>;
type MobiusTable = Arc<Vec<(NcPartition, BigInt)>>;

/// Block-size types of `NC(n)`, cached per `n`.
fn nc_types(n: usize) -> Result<TypeTable, NcError> {
    static CACHE: OnceLock<Mutex<HashMap<usize, TypeTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return Ok(hit.clone());
    }
    let mut types: BTreeMap<Vec<usize>, (BigInt, BigInt)> = BTreeMap::new();
    for p in enumerate_nc(n)? {
        let entry = types.entry(p.block_sizes()).or_insert_with(|| (BigInt::zero(), BigInt::zero()));
        entry.0 += 1;
        entry.1 += mobius_to_top(&p);
    }
    let table: TypeTable = Arc::new(types.into_iter().map(|(k, (c, m))| (k, c, m)).collect());
    cache.lock().unwrap().insert(n, table.clone());
    Ok(table)
}

/// `NC(n)` paired with `μ(π, 1_n)`, cached per `n`.
pub fn nc_with_mobius(n: usize) -> Result<MobiusTable, NcError> {
    static CACHE: OnceLock<Mutex<HashMap<usize, MobiusTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return Ok(hit.clone());
    }
    let list: MobiusTable = Arc::new(
        enumerate_nc(n)?
            .into_iter()
            .map(|p| {
                let mu = mobius_to_top(&p);
                (p, mu)
            })
            .collect(),
    );
    cache.lock().unwrap().insert(n, list.clone());
    Ok(list)
}

fn product_over<C: Coeff>(seq: &[C], sizes: &[usize]) -> C {
    sizes.iter().fold(C::one(), |acc, &s| acc * seq[s - 1].clone())
}

/// `k_n = Σ_{π ∈ NC(n)} μ(π, 1_n) Π_{V ∈ π} m_|V|` for every `n` up to the
/// sequence length.
pub fn moments_to_cumulants<C: Coeff>(moments: &[C]) -> Result<Vec<C>, NcError> {
    (1..=moments.len())
        .map(|n| {
            let types = nc_types(n)?;
            Ok(types.iter().fold(C::zero(), |acc, (sizes, _, mu)| {
                acc + C::from_bigint(mu) * product_over(moments, sizes)
            }))
        })
        .collect()
}

/// `m_n = Σ_{π ∈ NC(n)} Π_{V ∈ π} k_|V|`.
pub fn cumulants_to_moments<C: Coeff>(cumulants: &[C]) -> Result<Vec<C>, NcError> {
    (1..=cumulants.len())
        .map(|n| {
            let types = nc_types(n)?;
            Ok(types.iter().fold(C::zero(), |acc, (sizes, count, _)| {
                acc + C::from_bigint(count) * product_over(cumulants, sizes)
            }))
        })
        .collect()
}

struct Nested<'a, C: Coeff> {
    starts: Vec<Option<&'a Vec<usize>>>,
    factors: &'a [Element<C>],
}

impl<C: Coeff> Nested<'_, C> {
    /// Product of the values of the outer blocks inside `lo..=hi`; `None`
    /// for an empty interval.
    fn interval(&self, lo: usize, hi: usize) -> Result<Option<DiagonalElement<C>>, NcError> {
        let mut acc: Option<DiagonalElement<C>> = None;
        let mut i = lo;
        while i <= hi {
            let block = self.starts[i].expect("blocks nest inside gaps");
            let value = self.block(block)?;
            acc = Some(match acc {
                Some(d) => d.mul(&value),
                None => value,
            });
            i = block[block.len() - 1] + 1;
        }
        Ok(acc)
    }

    /// `E(a_{i1} d_1 a_{i2} d_2 ... a_{ik})` with each gap value `d_j`
    /// inserted as a left multiplier on the next factor.
    fn block(&self, block: &[usize]) -> Result<DiagonalElement<C>, NcError> {
        let mut x = self.factors[block[0] - 1].clone();
        for pair in block.windows(2) {
            let next = &self.factors[pair[1] - 1];
            let right = match self.interval(pair[0] + 1, pair[1] - 1)? {
                Some(d) => d.to_element().multiply(next)?,
                None => next.clone(),
            };
            if pair[1] == block[block.len() - 1] {
                return Ok(x.expectation_of_product(&right)?);
            }
            x = x.multiply(&right)?;
        }
        Ok(x.expectation())
    }
}

/// `E_π(a_1, ..., a_n)`, innermost blocks first.
pub fn partitioned_expectation<C: Coeff>(
    p: &NcPartition,
    factors: &[Element<C>],
) -> Result<DiagonalElement<C>, NcError> {
    if factors.len() != p.n {
        return Err(NcError::SizeMismatch {
            expected: p.n,
            got: factors.len(),
        });
    }
    let mut starts = vec![None; p.n + 1];
    for b in &p.blocks {
        starts[b[0]] = Some(b);
    }
    let nested = Nested { starts, factors };
    Ok(nested
        .interval(1, p.n)?
        .expect("n >= 1 gives a nonempty interval"))
}

/// The diagonal-valued free cumulant `k_n(a_1, ..., a_n)`.
pub fn mixed_cumulant<C: Coeff>(factors: &[Element<C>]) -> Result<DiagonalElement<C>, NcError> {
    let first = factors.first().ok_or(NcError::Empty)?;
    let mut acc = DiagonalElement::zero(first.graph().clone());
    for (p, mu) in nc_with_mobius(factors.len())?.iter() {
        let value = partitioned_expectation(p, factors)?;
        if !value.is_zero() {
            acc = acc.add(&value.scale(&C::from_bigint(mu)));
        }
    }
    Ok(acc)
}

/// Outcome of checking that a cumulant of generators is a scalar multiple
/// of the corresponding moment.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFactorization<C: Coeff = crate::scalar::Rational> {
    /// Partitions whose nested expectation equals the full one, which is
    /// nonzero.
    pub members: Vec<NcPartition>,
    /// Sum of `μ(π, 1_n)` over `members`.
    pub mu: BigInt,
    pub product_expectation: DiagonalElement<C>,
    pub cumulant: DiagonalElement<C>,
    /// Partitions with a nonzero nested expectation that differs from the
    /// full one.
    pub stray: Vec<NcPartition>,
}

impl<C: Coeff> MomentFactorization<C> {
    pub fn holds(&self) -> bool {
        self.cumulant == self.product_expectation.scale(&C::from_bigint(&self.mu))
    }
}

/// For generators `L_{w_1}^{u_1}, ..., L_{w_n}^{u_n}`, splits the cumulant
/// into `μ · E(product)` and reports whether the split is exact.
pub fn moment_factorization(
    graph: &Arc<Graph>,
    words: &[(PathWord, Flavor)],
) -> Result<MomentFactorization, NcError> {
    if words.is_empty() {
        return Err(NcError::Empty);
    }
    let factors = words
        .iter()
        .map(|(w, flavor)| match flavor {
            Flavor::Plain => Element::creation(graph.clone(), w.clone()),
            Flavor::Starred => Element::annihilation(graph.clone(), w.clone()),
        })
        .collect::<Result<Vec<Element>, _>>()?;
    let n = factors.len();
    let full = partitioned_expectation(&NcPartition::one(n), &factors)?;
    let mut members = Vec::new();
    let mut stray = Vec::new();
    let mut mu = BigInt::zero();
    let mut cumulant = DiagonalElement::zero(graph.clone());
    for (p, m) in nc_with_mobius(n)?.iter() {
        let value = partitioned_expectation(p, &factors)?;
        if value.is_zero() {
            continue;
        }
        cumulant = cumulant.add(&value.scale(&crate::scalar::Rational::from_bigint(m)));
        if value == full {
            members.push(p.clone());
            mu += m;
        } else {
            stray.push(p.clone());
        }
    }
    Ok(MomentFactorization {
        members,
        mu,
        product_expectation: full,
        cumulant,
        stray,
    })
}
