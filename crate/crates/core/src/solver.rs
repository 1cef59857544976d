//! Search for splitting types: line bundle classes `X` with `Q X = R′`, where
//! each row of `R′` reorders the splitting numbers of one wall.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::exact_linear::{rref, IntMatrix, IntegralSolver, RatMatrix};
use crate::fan::Fan;
use crate::intersection::{sign_of_vector, SignClass};
use crate::splitting::SplittingSystem;

/// Which columns of `R′` are admissible.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strictness {
    /// Every column is either all `≥ 0` or all `< 0`.
    #[default]
    Default,
    /// Every column is all `> 0`, all `= 0` or all `< 0`.
    Strict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplittingType {
    /// `I × r`: row `i` is the chosen ordering of the degrees on wall `i`.
    pub r_prime: Vec<Vec<BigInt>>,
    /// `J × r` integral solution of `Q X = R′`.
    pub x: IntMatrix,
    /// Columns of `X` reduced modulo principal divisors.
    pub canonical: Vec<Vec<BigInt>>,
    pub signs: Vec<SignClass>,
}

impl SplittingType {
    /// Sorted canonical columns; two types agree iff their keys agree.
    pub fn key(&self) -> Vec<Vec<BigInt>> {
        let mut k = self.canonical.clone();
        k.sort();
        k
    }
}

/// Reduces divisor columns modulo the principal lattice by zeroing a fixed
/// set of `n` coordinates whose rays form a lattice basis.
#[derive(Clone, Debug)]
pub struct ClassReducer {
    subset: Vec<usize>,
    principal: Vec<Vec<BigInt>>,
    dual: IntMatrix,
}

impl ClassReducer {
    /// Prefers the last `n` rays; otherwise the lexicographically first unimodular subset.
    pub fn new(fan: &Fan) -> Self {
        let n = fan.dim();
        let j = fan.num_rays();
        let last: Vec<usize> = (j - n..j).collect();
        let subset = if unimodular(fan, &last) {
            last
        } else {
            first_unimodular(fan).expect("a complete smooth fan has a basis among its rays")
        };
        let b = IntMatrix::from_col_vecs(
            n,
            &subset
                .iter()
                .map(|&k| fan.rays()[k].clone())
                .collect::<Vec<_>>(),
        );
        let inv = crate::exact_linear::inverse(&b.to_rational()).unwrap();
        let dual = inv.map(|q: &BigRational| q.to_integer());
        ClassReducer {
            subset,
            principal: fan.principal_columns(),
            dual,
        }
    }

    /// Ray indices whose coordinates are zero after reduction.
    pub fn zeroed(&self) -> &[usize] {
        &self.subset
    }

    pub fn reduce(&self, x: &[BigInt]) -> Vec<BigInt> {
        let xs: Vec<BigInt> = self.subset.iter().map(|&k| x[k].clone()).collect();
        // m with ⟨m, v_k⟩ = x_k on the subset
        let m = self.dual.transpose().mul_vec(&xs);
        let mut out = x.to_vec();
        for (mi, col) in m.iter().zip(&self.principal) {
            for (o, c) in out.iter_mut().zip(col) {
                *o -= mi * c;
            }
        }
        out
    }
}

fn unimodular(fan: &Fan, subset: &[usize]) -> bool {
    let cols: Vec<Vec<BigInt>> = subset.iter().map(|&k| fan.rays()[k].clone()).collect();
    IntMatrix::from_col_vecs(fan.dim(), &cols).det().abs() == BigInt::from(1)
}

fn first_unimodular(fan: &Fan) -> Option<Vec<usize>> {
    fn go(fan: &Fan, start: usize, cur: &mut Vec<usize>) -> Option<Vec<usize>> {
        if cur.len() == fan.dim() {
            return unimodular(fan, cur).then(|| cur.clone());
        }
        for k in start..fan.num_rays() {
            cur.push(k);
            if let Some(s) = go(fan, k + 1, cur) {
                return Some(s);
            }
            cur.pop();
        }
        None
    }
    go(fan, 0, &mut Vec::new())
}

/// The class of `x` with coordinates of the reducer's subset set to zero.
pub fn canonical_class_rep(x: &[BigInt], fan: &Fan) -> Vec<BigInt> {
    ClassReducer::new(fan).reduce(x)
}

fn distinct_permutations(t: &[BigInt]) -> Vec<Vec<BigInt>> {
    let mut items = t.to_vec();
    items.sort();
    let mut out = Vec::new();
    loop {
        out.push(items.clone());
        // next lexicographic permutation
        let Some(i) = (0..items.len().saturating_sub(1))
            .rev()
            .find(|&i| items[i] < items[i + 1])
        else {
            break;
        };
        let j = (i + 1..items.len())
            .rev()
            .find(|&j| items[j] > items[i])
            .unwrap();
        items.swap(i, j);
        items[i + 1..].reverse();
    }
    out
}

/// For each row, `None` if it is independent of the earlier independent rows,
/// otherwise its coefficients on those rows.
fn row_dependencies(q: &IntMatrix) -> Vec<Option<Vec<(usize, BigRational)>>> {
    let mut basis: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(q.rows());
    for i in 0..q.rows() {
        if basis.is_empty() {
            basis.push(i);
            out.push(None);
            continue;
        }
        // Solve Σ λ_k q_{b_k} = q_i via the transpose system.
        let k = basis.len();
        let aug = RatMatrix::from_fn(q.cols(), k + 1, |r, c| {
            let row = if c < k { basis[c] } else { i };
            BigRational::from_integer(q[(row, r)].clone())
        });
        let (red, pivots) = rref(&aug);
        if pivots.contains(&k) {
            basis.push(i);
            out.push(None);
        } else {
            let coeffs = pivots
                .iter()
                .enumerate()
                .map(|(r, &c)| (basis[c], red[(r, k)].clone()))
                .collect();
            out.push(Some(coeffs));
        }
    }
    out
}

fn column_ok(signs: &[i8], strict: Strictness) -> bool {
    let neg = signs.iter().any(|&s| s < 0);
    let zero = signs.contains(&0);
    let pos = signs.iter().any(|&s| s > 0);
    match strict {
        Strictness::Default => !(neg && (zero || pos)),
        Strictness::Strict => (neg as u8 + zero as u8 + pos as u8) <= 1,
    }
}

fn sign(x: &BigInt) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

struct Search<'a> {
    q: &'a IntMatrix,
    tuples: &'a [Vec<BigInt>],
    deps: Vec<Option<Vec<(usize, BigRational)>>>,
    strict: Strictness,
    solver: IntegralSolver,
    reducer: ClassReducer,
    found: BTreeMap<Vec<Vec<BigInt>>, SplittingType>,
    rows: Vec<Vec<BigInt>>,
    signs: Vec<Vec<i8>>,
}

impl Search<'_> {
    fn push_row(&mut self, row: Vec<BigInt>) -> bool {
        for (col, x) in self.signs.iter_mut().zip(&row) {
            col.push(sign(x));
        }
        self.rows.push(row);
        self.signs.iter().all(|c| column_ok(c, self.strict))
    }

    fn pop_row(&mut self) {
        self.rows.pop();
        for col in &mut self.signs {
            col.pop();
        }
    }

    fn run(&mut self, i: usize) -> Result<()> {
        if i == self.tuples.len() {
            return self.leaf();
        }
        let candidates: Vec<Vec<BigInt>> = match &self.deps[i] {
            _ if i == 0 => vec![self.tuples[0].clone()],
            None => distinct_permutations(&self.tuples[i]),
            Some(coeffs) => {
                let r = self.tuples[i].len();
                let mut forced = Vec::with_capacity(r);
                for col in 0..r {
                    let v: BigRational = coeffs
                        .iter()
                        .map(|(row, l)| l * BigRational::from_integer(self.rows[*row][col].clone()))
                        .sum();
                    if !v.is_integer() {
                        return Ok(());
                    }
                    forced.push(v.to_integer());
                }
                let mut a = forced.clone();
                let mut b = self.tuples[i].clone();
                a.sort();
                b.sort();
                if a != b {
                    return Ok(());
                }
                vec![forced]
            }
        };
        for row in candidates {
            if self.push_row(row) {
                self.run(i + 1)?;
            }
            self.pop_row();
        }
        Ok(())
    }

    fn leaf(&mut self) -> Result<()> {
        let r = self.tuples[0].len();
        let r_prime = IntMatrix::from_row_vecs(r, &self.rows);
        let Some(sol) = self.solver.solve(&r_prime)? else {
            return Ok(());
        };
        debug_assert_eq!(self.q.mul(&sol.x), r_prime);
        let canonical: Vec<Vec<BigInt>> =
            (0..r).map(|c| self.reducer.reduce(&sol.x.col(c))).collect();
        let signs = (0..r).map(|c| sign_of_vector(&r_prime.col(c))).collect();
        let t = SplittingType {
            r_prime: self.rows.clone(),
            x: sol.x,
            canonical,
            signs,
        };
        self.found.entry(t.key()).or_insert(t);
        Ok(())
    }
}

/// All splitting types of a splitting system, sorted by their canonical key.
///
/// An empty result means the bundle admits no splitting type.
pub fn find_splitting_types(
    fan: &Fan,
    q: &IntMatrix,
    xi: &SplittingSystem,
    strict: Strictness,
) -> Result<Vec<SplittingType>> {
    if q.rows() != xi.num_walls() || q.cols() != fan.num_rays() {
        return Err(Error::DimensionMismatch(format!(
            "Q is {}×{}, system has {} walls, fan has {} rays",
            q.rows(),
            q.cols(),
            xi.num_walls(),
            fan.num_rays()
        )));
    }
    let r = xi.rank();
    if xi.tuples().iter().any(|t| t.len() != r) {
        return Err(Error::DimensionMismatch(
            "tuples of different lengths".into(),
        ));
    }
    if xi.num_walls() == 0 || r == 0 {
        return Ok(Vec::new());
    }
    let solver = IntegralSolver::new(q);
    let kernel = solver.kernel_basis().len();
    if kernel != fan.dim() {
        return Err(Error::KernelTooLarge(format!(
            "kernel of Q has rank {kernel}, principal lattice has rank {}",
            fan.dim()
        )));
    }
    let mut search = Search {
        q,
        tuples: xi.tuples(),
        deps: row_dependencies(q),
        strict,
        solver,
        reducer: ClassReducer::new(fan),
        found: BTreeMap::new(),
        rows: Vec::new(),
        signs: vec![Vec::new(); r],
    };
    search.run(0)?;
    Ok(search.found.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_linear::int_vec;
    use crate::fan::{hirzebruch, projective_space};
    use crate::intersection::augmented_matrix;
    use crate::surface_graph::{graph_to_fan, WeightedCircularGraph};
    use num_traits::Zero;

    fn classes(ts: &[SplittingType]) -> Vec<Vec<Vec<i64>>> {
        ts.iter()
            .map(|t| {
                t.key()
                    .iter()
                    .map(|c| c.iter().map(|x| i64::try_from(x).unwrap()).collect())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn cp2_tangent() {
        let f = projective_space(2);
        let q = augmented_matrix(&f).q;
        let xi = SplittingSystem::from_i64(&[&[2, 1], &[2, 1], &[2, 1]]);
        let ts = find_splitting_types(&f, &q, &xi, Strictness::Default).unwrap();
        assert_eq!(classes(&ts), vec![vec![vec![1, 0, 0], vec![2, 0, 0]]]);
        assert_eq!(ts[0].signs, vec![SignClass::Positive, SignClass::Positive]);
    }

    #[test]
    fn cp2_unequal_parameters() {
        let f = projective_space(2);
        let q = augmented_matrix(&f).q;
        let xi = SplittingSystem::from_i64(&[&[3, 1], &[4, 2], &[3, 2]]);
        assert!(find_splitting_types(&f, &q, &xi, Strictness::Default)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn three_point_blowup() {
        let g = WeightedCircularGraph::new(vec![-1; 6]).unwrap();
        let f = graph_to_fan(&g).unwrap();
        let q = augmented_matrix(&f).q;
        let xi = SplittingSystem::from_i64(&[&[2i64, -1][..]; 6]);
        let ts = find_splitting_types(&f, &q, &xi, Strictness::Default).unwrap();
        assert_eq!(ts.len(), 1);
        let x1 = int_vec(&[2, 4, 4, 2, 0, 0]);
        let x2 = int_vec(&[-1, -2, -2, -1, 0, 0]);
        assert!(q.mul_vec(&x1).iter().all(|v| v == &BigInt::from(2)));
        assert!(q.mul_vec(&x2).iter().all(|v| v == &BigInt::from(-1)));
        let mut want = vec![x1, x2];
        want.sort();
        assert_eq!(ts[0].key(), want);
    }

    #[test]
    fn product_of_lines() {
        let f = hirzebruch(0);
        let q = augmented_matrix(&f).q;
        let xi = SplittingSystem::from_i64(&[&[2i64, 0][..]; 4]);
        let default = find_splitting_types(&f, &q, &xi, Strictness::Default).unwrap();
        assert_eq!(default.len(), 2);
        let strict = find_splitting_types(&f, &q, &xi, Strictness::Strict).unwrap();
        assert_eq!(
            classes(&strict),
            vec![vec![vec![0, 0, 0, 0], vec![2, 2, 0, 0]]]
        );
    }

    #[test]
    fn reducer_examples() {
        let f = projective_space(2);
        assert_eq!(
            canonical_class_rep(&int_vec(&[0, 0, 3]), &f),
            int_vec(&[3, 0, 0])
        );
        for c in f.principal_columns() {
            assert!(canonical_class_rep(&c, &f).iter().all(Zero::is_zero));
        }
        let g = WeightedCircularGraph::new(vec![-1, -2, -1, -2, -1, -2, -1, -2]).unwrap();
        let f = graph_to_fan(&g).unwrap();
        let red = ClassReducer::new(&f);
        assert_eq!(red.zeroed(), &[6, 7]);
        let x = red.reduce(&int_vec(&[1, 2, 3, 4, 5, 6, 7, 8]));
        assert!(x[6].is_zero() && x[7].is_zero());
    }

    #[test]
    fn permutations_are_distinct() {
        assert_eq!(distinct_permutations(&int_vec(&[2, 1, 1])).len(), 3);
        assert_eq!(distinct_permutations(&int_vec(&[3, 2, 1])).len(), 6);
        assert_eq!(distinct_permutations(&int_vec(&[0, 0])).len(), 1);
    }

    #[test]
    fn dependent_rows_detected() {
        let q = augmented_matrix(&hirzebruch(2)).q;
        let deps = row_dependencies(&q);
        assert!(deps[0].is_none() && deps[1].is_none());
        assert!(deps[2].is_some() && deps[3].is_some());
    }
}
