//! Helpers shared by the integration tests: random data and the brute-force
//! splitting-type oracle.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;

use toric_splitting::bundle_data::KaneyamaBundleData;
use toric_splitting::exact_linear::{inverse, rat_det, IntMatrix, RatMatrix};
use toric_splitting::fan::{self, Fan};
use toric_splitting::solver::{ClassReducer, SplittingType};
use toric_splitting::splitting::SplittingSystem;

pub fn big(xs: &[i64]) -> Vec<BigInt> {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn small(xs: &[BigInt]) -> Vec<i64> {
    xs.iter().map(|x| x.to_i64().unwrap()).collect()
}

pub fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// A random invertible `r × r` matrix with entries in `[-2, 2]`.
pub fn random_invertible<R: Rng>(rng: &mut R, r: usize, upper: bool) -> RatMatrix {
    loop {
        let m = RatMatrix::from_fn(r, r, |i, j| {
            if upper && i > j {
                rat(0)
            } else {
                rat(rng.gen_range(-2..=2))
            }
        });
        if !rat_det(&m).is_zero() {
            return m;
        }
    }
}

/// Random block: chart-1 weights non-increasing, chart-2 non-decreasing,
/// both within a window of width `spread`.
pub fn random_block<R: Rng>(
    rng: &mut R,
    r: usize,
    spread: i64,
) -> (Vec<BigInt>, Vec<BigInt>, RatMatrix) {
    let mut c: Vec<i64> = (0..r).map(|_| rng.gen_range(0..=spread)).collect();
    let mut d: Vec<i64> = (0..r).map(|_| rng.gen_range(0..=spread)).collect();
    c.sort_by(|a, b| b.cmp(a));
    d.sort();
    let upper = rng.gen_bool(0.5);
    (big(&c), big(&d), random_invertible(rng, r, upper))
}

/// Pulls back a bundle on `P¹` (weights `c` on the cone of `(1)`, `d` on the
/// cone of `(−1)`, pasting `p` from the first to the second) along `F_a → P¹`.
pub fn pullback_to_hirzebruch(
    a: i64,
    c: &[BigInt],
    d: &[BigInt],
    p: &RatMatrix,
) -> KaneyamaBundleData {
    let f = fan::hirzebruch(a);
    // image of each cone in P¹: true for the cone of (1)
    let plus: Vec<bool> = f
        .cones()
        .iter()
        .map(|cone| cone.iter().any(|&j| f.rays()[j][0].is_positive()))
        .collect();
    let lift = |w: &[BigInt]| -> Vec<Vec<BigInt>> {
        w.iter().map(|x| vec![x.clone(), BigInt::zero()]).collect()
    };
    let weights = plus
        .iter()
        .map(|&s| if s { lift(c) } else { lift(d) })
        .collect();
    let p_inv = inverse(p).unwrap();
    let r = c.len();
    let mut pastings = BTreeMap::new();
    for s2 in 0..f.num_cones() {
        for s1 in 0..f.num_cones() {
            if s1 == s2 {
                continue;
            }
            let m = match (plus[s2], plus[s1]) {
                (false, true) => p.clone(),
                (true, false) => p_inv.clone(),
                _ => RatMatrix::identity(r),
            };
            pastings.insert((s2, s1), m);
        }
    }
    KaneyamaBundleData::new(f, weights, pastings).unwrap()
}

/// Sign rule of the default search: each column all `≥ 0` or all `< 0`.
pub fn default_sign_ok(col: &[i64]) -> bool {
    col.iter().all(|&x| x >= 0) || col.iter().all(|&x| x < 0)
}

/// Exhaustive search for rank-two systems: every ordering of every row, and
/// every class with free coordinates in `[-radius, radius]` and the reducer's
/// coordinates zero. Returns sorted canonical column pairs.
pub struct BruteForce {
    table: HashMap<Vec<i64>, Vec<i64>>,
    pub radius: i64,
    zeroed: Vec<usize>,
}

impl BruteForce {
    pub fn new(fan: &Fan, q: &IntMatrix, radius: i64) -> Self {
        let reducer = ClassReducer::new(fan);
        let zeroed = reducer.zeroed().to_vec();
        let free: Vec<usize> = (0..fan.num_rays())
            .filter(|j| !zeroed.contains(j))
            .collect();
        let qs: Vec<Vec<i64>> = (0..q.rows()).map(|i| small(q.row(i))).collect();
        let mut table = HashMap::new();
        let mut x = vec![-radius; free.len()];
        loop {
            let mut full = vec![0i64; fan.num_rays()];
            for (slot, &j) in free.iter().enumerate() {
                full[j] = x[slot];
            }
            let image: Vec<i64> = qs
                .iter()
                .map(|row| row.iter().zip(&full).map(|(a, b)| a * b).sum())
                .collect();
            let prev = table.insert(image, full);
            assert!(
                prev.is_none(),
                "reduced classes must be determined by their intersection numbers"
            );
            // odometer
            let mut k = 0;
            loop {
                if k == x.len() {
                    return BruteForce {
                        table,
                        radius,
                        zeroed,
                    };
                }
                if x[k] < radius {
                    x[k] += 1;
                    break;
                }
                x[k] = -radius;
                k += 1;
            }
        }
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.zeroed.iter().all(|&j| x[j].is_zero())
            && x.iter().all(|v| v.abs() <= BigInt::from(self.radius))
    }

    pub fn types(&self, xi: &SplittingSystem) -> BTreeSet<Vec<Vec<i64>>> {
        let rows: Vec<Vec<i64>> = xi.tuples().iter().map(|t| small(t)).collect();
        assert!(rows.iter().all(|r| r.len() == 2));
        let i = rows.len();
        let mut out = BTreeSet::new();
        for mask in 0u32..(1 << i) {
            let mut c0 = Vec::with_capacity(i);
            let mut c1 = Vec::with_capacity(i);
            for (k, r) in rows.iter().enumerate() {
                if mask >> k & 1 == 0 {
                    c0.push(r[0]);
                    c1.push(r[1]);
                } else {
                    c0.push(r[1]);
                    c1.push(r[0]);
                }
            }
            if !default_sign_ok(&c0) || !default_sign_ok(&c1) {
                continue;
            }
            if let (Some(x0), Some(x1)) = (self.table.get(&c0), self.table.get(&c1)) {
                let mut pair = vec![x0.clone(), x1.clone()];
                pair.sort();
                out.insert(pair);
            }
        }
        out
    }
}

pub fn type_keys(types: &[SplittingType]) -> BTreeSet<Vec<Vec<i64>>> {
    types
        .iter()
        .map(|t| t.key().iter().map(|c| small(c)).collect())
        .collect()
}

/// Checks `Q X = R′`, that `R′` reorders each wall's degrees, and the sign rule.
pub fn sound(q: &IntMatrix, xi: &SplittingSystem, t: &SplittingType) -> Result<(), String> {
    let r = xi.rank();
    let rp = IntMatrix::from_row_vecs(r, &t.r_prime);
    if q.mul(&t.x) != rp {
        return Err("Q X differs from R'".into());
    }
    for (row, tuple) in t.r_prime.iter().zip(xi.tuples()) {
        let mut a = row.clone();
        let mut b = tuple.clone();
        a.sort();
        b.sort();
        if a != b {
            return Err(format!("row {row:?} does not reorder {tuple:?}"));
        }
    }
    for c in 0..r {
        if !default_sign_ok(&small(&rp.col(c))) {
            return Err(format!("column {c} fails the sign rule"));
        }
        let diff: Vec<BigInt> =
            t.x.col(c)
                .iter()
                .zip(&t.canonical[c])
                .map(|(a, b)| a - b)
                .collect();
        if !q.mul_vec(&diff).iter().all(Zero::is_zero) {
            return Err(format!("canonical column {c} is not linearly equivalent"));
        }
    }
    Ok(())
}
