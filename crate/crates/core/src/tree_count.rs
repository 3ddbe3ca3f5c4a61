//! Exact spanning-tree counts.
//!
//! Four routes are provided and kept independent of each other:
//!
//! * [`count_matrix_tree`]: a Laplacian cofactor evaluated by fraction-free
//!   (Bareiss) elimination over big integers.
//! * [`count_deletion_contraction`]: `tau(G) = tau(G - e) + tau(G / e)` with
//!   memoisation; exponential, for small graphs only.
//! * [`count_accordion_recursive`]: `tau(A(k,n)) = k tau(A(k,n-1)) - tau(A(k,n-2))`
//!   seeded by matrix-tree counts of concrete one- and two-cycle accordions.
//! * [`count_accordion_closed_form`]: the surd formulas for `k = 3, 4`,
//!   evaluated exactly in `Q(sqrt 5)` and `Q(sqrt 3)`.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::families::{make_kn_accordion, FreeEdgeChoice};
use crate::graph::{Graph, Multigraph};

/// Largest edge count accepted by [`count_deletion_contraction`].
pub const DELETION_CONTRACTION_MAX_EDGES: usize = 24;

/// Number of spanning trees, as an exact nonnegative integer.
pub type TreeCount = BigUint;

/// Kirchhoff count for a (multi)graph: determinant of the Laplacian with the
/// last row and column removed. Disconnected graphs give 0.
pub fn count_matrix_tree(g: &Multigraph) -> TreeCount {
    let n = g.num_vertices;
    if n <= 1 {
        return BigUint::one();
    }
    let dim = n - 1;
    let mut lap = vec![vec![BigInt::zero(); dim]; dim];
    for &(u, v) in &g.edges {
        if u == v {
            continue;
        }
        if u < dim {
            lap[u][u] += 1;
        }
        if v < dim {
            lap[v][v] += 1;
        }
        if u < dim && v < dim {
            lap[u][v] -= 1;
            lap[v][u] -= 1;
        }
    }
    bareiss_determinant(lap)
        .to_biguint()
        .expect("Laplacian cofactors are nonnegative")
}

/// Convenience wrapper for simple graphs.
pub fn count_graph(g: &Graph) -> TreeCount {
    count_matrix_tree(&Multigraph::from(g))
}

/// Fraction-free Gaussian elimination; every intermediate division is exact.
pub fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// `tau(G)` by deletion-contraction, memoised on the normalised multigraph.
pub fn count_deletion_contraction(g: &Multigraph) -> Result<TreeCount> {
    if g.edges.len() > DELETION_CONTRACTION_MAX_EDGES {
        return Err(Error::SizeGuard(format!(
            "deletion-contraction limited to {} edges, got {}",
            DELETION_CONTRACTION_MAX_EDGES,
            g.edges.len()
        )));
    }
    let mut memo = HashMap::new();
    Ok(del_con(g.normalized(), &mut memo))
}

fn del_con(g: Multigraph, memo: &mut HashMap<Multigraph, BigUint>) -> BigUint {
    if g.num_vertices <= 1 {
        return BigUint::one();
    }
    if g.edges.len() + 1 < g.num_vertices || !g.is_connected() {
        return BigUint::zero();
    }
    if let Some(hit) = memo.get(&g) {
        return hit.clone();
    }
    let without = del_con(g.delete(0).normalized(), memo);
    let contracted = del_con(g.contract(0).normalized(), memo);
    let total = without + contracted;
    memo.insert(g, total.clone());
    total
}

fn check_accordion_params(k: usize, n: usize) -> Result<()> {
    if k < 3 || n < 1 {
        return Err(Error::InvalidParameters(format!(
            "accordion counts need k >= 3 and n >= 1 (got k = {}, n = {})",
            k, n
        )));
    }
    Ok(())
}

/// `tau(A(k,n))` by the three-term recursion.
pub fn count_accordion_recursive(k: usize, n: usize) -> Result<TreeCount> {
    check_accordion_params(k, n)?;
    let base = |cycles: usize| -> Result<BigInt> {
        let a = make_kn_accordion(k, cycles, &FreeEdgeChoice::Lowest)?;
        Ok(BigInt::from(count_graph(&a.graph)))
    };
    let mut before = base(1)?;
    if n == 1 {
        return Ok(before.to_biguint().expect("nonnegative"));
    }
    let mut current = base(2)?;
    let kk = BigInt::from(k);
    for _ in 3..=n {
        let next = &kk * &current - &before;
        before = std::mem::replace(&mut current, next);
    }
    Ok(current.to_biguint().expect("tree counts are nonnegative"))
}

/// Element `(p + q sqrt(d)) / den` of a real quadratic field.
#[derive(Debug, Clone)]
struct Surd {
    p: BigInt,
    q: BigInt,
    den: BigInt,
    d: i64,
}

impl Surd {
    fn mul(&self, other: &Surd) -> Surd {
        debug_assert_eq!(self.d, other.d);
        Surd {
            p: &self.p * &other.p + BigInt::from(self.d) * &self.q * &other.q,
            q: &self.p * &other.q + &self.q * &other.p,
            den: &self.den * &other.den,
            d: self.d,
        }
    }

    fn pow(&self, mut e: usize) -> Surd {
        let mut acc = Surd {
            p: BigInt::one(),
            q: BigInt::zero(),
            den: BigInt::one(),
            d: self.d,
        };
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

/// Closed forms for `k = 3` and `k = 4`.
///
/// With `a = (3 + sqrt 5)/2` and its conjugate `b`,
/// `tau(A(3,n)) = (a^(n+1) - b^(n+1)) / sqrt 5`; writing `a^(n+1) = x + y sqrt 5`
/// the numerator is `2 y sqrt 5`, so the count is `2y`. Likewise
/// `tau(A(4,n)) = sqrt(3)/6 ((2+sqrt 3)^(n+1) - (2-sqrt 3)^(n+1)) = y` where
/// `(2 + sqrt 3)^(n+1) = x + y sqrt 3`.
pub fn count_accordion_closed_form(k: usize, n: usize) -> Result<TreeCount> {
    check_accordion_params(k, n)?;
    let (root, scale) = match k {
        3 => (
            Surd {
                p: BigInt::from(3),
                q: BigInt::one(),
                den: BigInt::from(2),
                d: 5,
            },
            BigInt::from(2),
        ),
        4 => (
            Surd {
                p: BigInt::from(2),
                q: BigInt::one(),
                den: BigInt::one(),
                d: 3,
            },
            BigInt::one(),
        ),
        _ => {
            return Err(Error::InvalidParameters(format!(
                "closed form only available for k = 3 or 4, got {}",
                k
            )))
        }
    };
    let power = root.pow(n + 1);
    let numerator = scale * power.q;
    if !(&numerator % &power.den).is_zero() {
        return Err(Error::InvalidParameters(
            "closed form did not evaluate to an integer".into(),
        ));
    }
    let value = numerator / power.den;
    debug_assert!(!value.is_negative());
    Ok(value.to_biguint().expect("nonnegative"))
}

/// Lossy helper for callers that need a float estimate (e.g. guard messages).
pub fn approx_f64(count: &TreeCount) -> f64 {
    count.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{ladder_graph, make_kn_ladder, make_wheel};

    fn big(v: u64) -> TreeCount {
        BigUint::from(v)
    }

    fn multigraph(n: usize, edges: &[(usize, usize)]) -> Multigraph {
        Multigraph {
            num_vertices: n,
            edges: edges.to_vec(),
        }
    }

    #[test]
    fn matrix_tree_small() {
        let k3 = multigraph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(count_matrix_tree(&k3), big(3));
        let k4 = make_wheel(3).unwrap();
        assert_eq!(count_graph(&k4), big(16));
        assert_eq!(count_graph(&ladder_graph(2).unwrap()), big(4));
        let disconnected = multigraph(4, &[(0, 1), (2, 3)]);
        assert_eq!(count_matrix_tree(&disconnected), big(0));
        let parallel = multigraph(2, &[(0, 1), (0, 1), (1, 0)]);
        assert_eq!(count_matrix_tree(&parallel), big(3));
    }

    #[test]
    fn deletion_contraction_small() {
        let tri = multigraph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(count_deletion_contraction(&tri).unwrap(), big(3));
        let two_triangles = multigraph(4, &[(0, 1), (1, 2), (2, 0), (1, 3), (3, 2)]);
        assert_eq!(count_deletion_contraction(&two_triangles).unwrap(), big(8));
        assert_eq!(count_matrix_tree(&two_triangles), big(8));
        let edge = multigraph(2, &[(0, 1)]);
        assert_eq!(count_deletion_contraction(&edge).unwrap(), big(1));
        let big_graph = Multigraph::from(&make_kn_ladder(5, 7).unwrap().graph);
        assert!(count_deletion_contraction(&big_graph).is_err());
    }

    #[test]
    fn recursion_values() {
        assert_eq!(count_accordion_recursive(3, 1).unwrap(), big(3));
        assert_eq!(count_accordion_recursive(3, 2).unwrap(), big(8));
        assert_eq!(count_accordion_recursive(3, 3).unwrap(), big(21));
        assert_eq!(count_accordion_recursive(4, 2).unwrap(), big(15));
        assert!(count_accordion_recursive(2, 3).is_err());
        assert!(count_accordion_recursive(3, 0).is_err());
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(count_accordion_closed_form(3, 2).unwrap(), big(8));
        assert_eq!(count_accordion_closed_form(4, 1).unwrap(), big(4));
        assert_eq!(count_accordion_closed_form(4, 2).unwrap(), big(15));
        assert!(count_accordion_closed_form(5, 2).is_err());
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        fn expand(m: &[Vec<i64>]) -> i64 {
            if m.len() == 1 {
                return m[0][0];
            }
            (0..m.len())
                .map(|c| {
                    let minor: Vec<Vec<i64>> = m[1..]
                        .iter()
                        .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect())
                        .collect();
                    let sign = if c % 2 == 0 { 1 } else { -1 };
                    sign * m[0][c] * expand(&minor)
                })
                .sum()
        }
        let cases = vec![
            vec![vec![0, 2, 1], vec![3, 0, 4], vec![5, 6, 0]],
            vec![vec![2, -1, 0, 7], vec![0, 0, 3, 1], vec![1, 1, 1, 1], vec![-2, 5, 0, 0]],
            vec![vec![1, 2], vec![2, 4]],
        ];
        for m in cases {
            let big_m = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            assert_eq!(bareiss_determinant(big_m), BigInt::from(expand(&m)));
        }
    }
}
