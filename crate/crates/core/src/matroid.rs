//! Explicit base systems, the exchange property and the quadratic minimum
//! weight base problem `min_S sum_{i in S} sum_{j in S} w(i,j)`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::enumerate::all_spanning_trees;
use crate::error::{Error, Result};
use crate::graded::{recognize_doubly_graded, Permutation};
use crate::graph::Graph;
use crate::instance::CostMatrix;

/// Ground set `0..ground_size` with an explicit list of equal-size bases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawBaseSystem", into = "RawBaseSystem")]
pub struct BaseSystem {
    ground_size: usize,
    bases: Vec<Vec<usize>>,
    lookup: HashSet<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawBaseSystem {
    ground_size: usize,
    bases: Vec<Vec<usize>>,
}

impl TryFrom<RawBaseSystem> for BaseSystem {
    type Error = Error;

    fn try_from(raw: RawBaseSystem) -> Result<Self> {
        BaseSystem::new(raw.ground_size, raw.bases)
    }
}

impl From<BaseSystem> for RawBaseSystem {
    fn from(bs: BaseSystem) -> Self {
        RawBaseSystem {
            ground_size: bs.ground_size,
            bases: bs.bases,
        }
    }
}

impl BaseSystem {
    /// Sorts each base and the list; rejects empty lists, mixed sizes,
    /// repeated elements and out-of-range elements. Repeated bases are merged.
    pub fn new(ground_size: usize, bases: Vec<Vec<usize>>) -> Result<Self> {
        let bad = |m: String| Error::InvalidBaseSystem(m);
        if bases.is_empty() {
            return Err(bad("no bases".into()));
        }
        let mut norm = Vec::with_capacity(bases.len());
        for mut b in bases {
            b.sort_unstable();
            if b.windows(2).any(|w| w[0] == w[1]) {
                return Err(bad(format!("base {:?} repeats an element", b)));
            }
            if let Some(&e) = b.iter().find(|&&e| e >= ground_size) {
                return Err(bad(format!("element {} outside ground set of size {}", e, ground_size)));
            }
            norm.push(b);
        }
        let s = norm[0].len();
        if norm.iter().any(|b| b.len() != s) {
            return Err(bad("bases differ in size".into()));
        }
        norm.sort();
        norm.dedup();
        let lookup = norm.iter().cloned().collect();
        Ok(BaseSystem {
            ground_size,
            bases: norm,
            lookup,
        })
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn bases(&self) -> &[Vec<usize>] {
        &self.bases
    }

    pub fn rank(&self) -> usize {
        self.bases[0].len()
    }

    pub fn is_base(&self, s: &[usize]) -> bool {
        let mut v = s.to_vec();
        v.sort_unstable();
        self.lookup.contains(&v)
    }

    /// Subset of some base.
    pub fn is_independent(&self, s: &[usize]) -> bool {
        self.bases.iter().any(|b| s.iter().all(|e| b.binary_search(e).is_ok()))
    }

    fn require_base(&self, s: &[usize]) -> Result<Vec<usize>> {
        let mut v = s.to_vec();
        v.sort_unstable();
        if self.lookup.contains(&v) {
            Ok(v)
        } else {
            Err(Error::NotABase(v))
        }
    }

    fn check_weights(&self, w: &CostMatrix) -> Result<()> {
        if w.dim() != self.ground_size {
            return Err(Error::DimensionMismatch {
                expected: self.ground_size,
                found: w.dim(),
            });
        }
        Ok(())
    }
}

/// Bases of the graphic matroid of `g` (its spanning trees).
pub fn graphic_matroid(g: &Graph, limit: u64) -> Result<BaseSystem> {
    let trees = all_spanning_trees(g, limit)?;
    BaseSystem::new(g.num_edges(), trees.into_iter().map(|t| t.into_vec()).collect())
}

/// Uniform matroid `U(r, n)`: every `r`-subset of `0..n`.
pub fn uniform_matroid(r: usize, n: usize) -> Result<BaseSystem> {
    if r > n {
        return Err(Error::InvalidBaseSystem(format!("U({},{}) has no bases", r, n)));
    }
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for e in start..n {
            if n - e < r - cur.len() {
                break;
            }
            cur.push(e);
            rec(e + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, r, &mut Vec::new(), &mut out);
    BaseSystem::new(n, out)
}

/// `(S1, S2, K)` with `K in S1 \ S2` and no `j in S2 \ S1` making
/// `S1 - K + j` a base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeWitness {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    pub k: usize,
}

fn exchange_fails(bs: &BaseSystem, s1: &[usize], s2: &[usize], k: usize) -> bool {
    s2.iter().filter(|j| !s1.contains(j)).all(|&j| {
        let mut t: Vec<usize> = s1.iter().copied().filter(|&e| e != k).collect();
        t.push(j);
        t.sort_unstable();
        !bs.lookup.contains(&t)
    })
}

/// First exchange violation in list order, or `None` for a matroid.
pub fn exchange_violation(bs: &BaseSystem) -> Option<ExchangeWitness> {
    for s1 in &bs.bases {
        for s2 in &bs.bases {
            for &k in s1.iter().filter(|e| s2.binary_search(e).is_err()) {
                if exchange_fails(bs, s1, s2, k) {
                    return Some(ExchangeWitness {
                        s1: s1.clone(),
                        s2: s2.clone(),
                        k,
                    });
                }
            }
        }
    }
    None
}

pub fn is_matroid(bs: &BaseSystem) -> bool {
    exchange_violation(bs).is_none()
}

/// `Pi(S)`: every ordered pair of `S`, diagonal included.
pub fn qmwb_objective(bs: &BaseSystem, w: &CostMatrix, s: &[usize]) -> Result<i64> {
    bs.check_weights(w)?;
    let s = bs.require_base(s)?;
    Ok(s.iter().map(|&i| s.iter().map(|&j| w.get(i, j)).sum::<i64>()).sum())
}

/// Bottleneck analogue of `Pi(S)`.
pub fn qmwb_bottleneck(bs: &BaseSystem, w: &CostMatrix, s: &[usize]) -> Result<i64> {
    bs.check_weights(w)?;
    let s = bs.require_base(s)?;
    Ok(s.iter()
        .flat_map(|&i| s.iter().map(move |&j| (i, j)))
        .map(|(i, j)| w.get(i, j))
        .max()
        .unwrap_or(0))
}

fn rank_key(pi: &Permutation, b: &[usize]) -> Vec<usize> {
    let mut r: Vec<usize> = b.iter().map(|&e| pi.rank(e)).collect();
    r.sort_unstable();
    r
}

/// The base whose sorted rank list is lexicographically smallest, by direct
/// comparison over the list.
pub fn pi_critical_base(bs: &BaseSystem, pi: &Permutation) -> Result<Vec<usize>> {
    if pi.len() != bs.ground_size {
        return Err(Error::DimensionMismatch {
            expected: bs.ground_size,
            found: pi.len(),
        });
    }
    Ok(bs
        .bases
        .iter()
        .min_by_key(|b| rank_key(pi, b))
        .expect("nonempty")
        .clone())
}

/// Greedy in rank order, keeping independence. Equals the π-critical base on
/// matroids; may differ elsewhere.
pub fn greedy_base(bs: &BaseSystem, pi: &Permutation) -> Vec<usize> {
    let mut s: Vec<usize> = Vec::with_capacity(bs.rank());
    for r in 0..pi.len() {
        let e = pi.at_rank(r);
        s.push(e);
        if !bs.is_independent(&s) {
            s.pop();
        }
    }
    s.sort_unstable();
    s
}

/// `f^i = min_S sum_{j in S} w(i,j)`.
pub fn mwb_row(bs: &BaseSystem, w: &CostMatrix, i: usize) -> Result<i64> {
    bs.check_weights(w)?;
    Ok(bs
        .bases
        .iter()
        .map(|b| b.iter().map(|&j| w.get(i, j)).sum::<i64>())
        .min()
        .expect("nonempty"))
}

/// `min_S max_{j in S} w(i,j)`.
pub fn mwb_row_bottleneck(bs: &BaseSystem, w: &CostMatrix, i: usize) -> Result<i64> {
    bs.check_weights(w)?;
    Ok(bs
        .bases
        .iter()
        .map(|b| b.iter().map(|&j| w.get(i, j)).max().unwrap_or(0))
        .min()
        .expect("nonempty"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseBound {
    pub value: i64,
    pub f: Vec<i64>,
    pub base: Vec<usize>,
}

/// `L-bar = min_S sum_{i in S} f^i`.
pub fn natural_lower_bound_base(bs: &BaseSystem, w: &CostMatrix) -> Result<BaseBound> {
    let f = (0..bs.ground_size)
        .map(|i| mwb_row(bs, w, i))
        .collect::<Result<Vec<_>>>()?;
    let (value, base) = bs
        .bases
        .iter()
        .map(|b| (b.iter().map(|&i| f[i]).sum::<i64>(), b))
        .min()
        .expect("nonempty");
    Ok(BaseBound {
        value,
        base: base.clone(),
        f,
    })
}

pub fn natural_lower_bound_base_bottleneck(bs: &BaseSystem, w: &CostMatrix) -> Result<BaseBound> {
    let f = (0..bs.ground_size)
        .map(|i| mwb_row_bottleneck(bs, w, i))
        .collect::<Result<Vec<_>>>()?;
    let (value, base) = bs
        .bases
        .iter()
        .map(|b| (b.iter().map(|&i| f[i]).max().unwrap_or(0), b))
        .min()
        .expect("nonempty");
    Ok(BaseBound {
        value,
        base: base.clone(),
        f,
    })
}

/// Optimum by scanning all bases; ties go to the first base in list order.
pub fn solve_qmwb_enumerate(bs: &BaseSystem, w: &CostMatrix) -> Result<(Vec<usize>, i64)> {
    bs.check_weights(w)?;
    let (v, b) = bs
        .bases
        .iter()
        .map(|b| (qmwb_objective(bs, w, b).expect("listed base"), b))
        .min()
        .expect("nonempty");
    Ok((b.clone(), v))
}

pub fn solve_qbwb_enumerate(bs: &BaseSystem, w: &CostMatrix) -> Result<(Vec<usize>, i64)> {
    bs.check_weights(w)?;
    let (v, b) = bs
        .bases
        .iter()
        .map(|b| (qmwb_bottleneck(bs, w, b).expect("listed base"), b))
        .min()
        .expect("nonempty");
    Ok((b.clone(), v))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QmwbSolution {
    pub base: Vec<usize>,
    pub value: i64,
    pub lower_bound: i64,
    pub pi: Permutation,
}

fn graded_setup(bs: &BaseSystem, w: &CostMatrix) -> Result<(Permutation, Vec<usize>)> {
    bs.check_weights(w)?;
    if !is_matroid(bs) {
        return Err(Error::NotMatroid);
    }
    let pi = recognize_doubly_graded(w).ok_or(Error::NotDoublyGraded)?;
    let base = pi_critical_base(bs, &pi)?;
    assert_eq!(greedy_base(bs, &pi), base, "greedy and π-critical bases differ on a matroid");
    Ok((pi, base))
}

/// π-critical base of a matroid with a permuted doubly graded `W`.
pub fn solve_qmwb_doubly_graded(bs: &BaseSystem, w: &CostMatrix) -> Result<QmwbSolution> {
    let (pi, base) = graded_setup(bs, w)?;
    Ok(QmwbSolution {
        value: qmwb_objective(bs, w, &base)?,
        lower_bound: natural_lower_bound_base(bs, w)?.value,
        base,
        pi,
    })
}

pub fn solve_qbwb_doubly_graded(bs: &BaseSystem, w: &CostMatrix) -> Result<QmwbSolution> {
    let (pi, base) = graded_setup(bs, w)?;
    Ok(QmwbSolution {
        value: qmwb_bottleneck(bs, w, &base)?,
        lower_bound: natural_lower_bound_base_bottleneck(bs, w)?.value,
        base,
        pi,
    })
}

/// Certificate: the π-critical base is a minimum weight base under `f^i`.
/// When it holds the base is optimal; when it fails nothing is claimed.
pub fn certify_base_nnl(bs: &BaseSystem, w: &CostMatrix, pi: &Permutation) -> Result<bool> {
    let base = pi_critical_base(bs, pi)?;
    let bound = natural_lower_bound_base(bs, w)?;
    Ok(base.iter().map(|&i| bound.f[i]).sum::<i64>() == bound.value)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub w: Vec<Vec<i64>>,
    pub pi: Permutation,
}

impl Counterexample {
    pub fn matrix(&self) -> CostMatrix {
        CostMatrix::from_rows(self.w.clone()).expect("square")
    }
}

/// Weights on which the π-critical base `S1` loses to `S2` although `pi(W)`
/// is doubly graded.
///
/// Ranks run over the blocks `S1 \ {K}`, `S2 \ S1`, `K`, rest. `w(i,j) = 1`
/// when `i` or `j` is in the rest, or when `i` is in `(S2 \ S1) + K` and
/// `j = K`; otherwise 0. This gives `Pi(S1) = 1` and `Pi(S2) = 0`.
pub fn build_counterexample(bs: &BaseSystem, witness: &ExchangeWitness) -> Result<Counterexample> {
    let bad = |m: &str| Error::InvalidWitness(m.to_string());
    let s1 = bs.require_base(&witness.s1).map_err(|_| bad("S1 is not a base"))?;
    let s2 = bs.require_base(&witness.s2).map_err(|_| bad("S2 is not a base"))?;
    let k = witness.k;
    if s1.binary_search(&k).is_err() || s2.binary_search(&k).is_ok() {
        return Err(bad("K must lie in S1 \\ S2"));
    }
    if !exchange_fails(bs, &s1, &s2, k) {
        return Err(bad("some exchange S1 - K + j is a base"));
    }
    let m = bs.ground_size;
    let in1 = |e: usize| s1.binary_search(&e).is_ok();
    let in2 = |e: usize| s2.binary_search(&e).is_ok();
    let block_a: Vec<usize> = (0..m).filter(|&e| in1(e) && e != k).collect();
    let block_b: Vec<usize> = (0..m).filter(|&e| in2(e) && !in1(e)).collect();
    let rest: Vec<usize> = (0..m).filter(|&e| !in1(e) && !in2(e)).collect();
    let order: Vec<usize> = block_a
        .iter()
        .chain(block_b.iter())
        .chain(std::iter::once(&k))
        .chain(rest.iter())
        .copied()
        .collect();
    let pi = Permutation::from_order(&order)?;
    let is_rest = |e: usize| !in1(e) && !in2(e);
    let w = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    if is_rest(i) || is_rest(j) || (j == k && (i == k || (in2(i) && !in1(i)))) {
                        1
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    Ok(Counterexample { w, pi })
}
