//! Restriction of an equivariant bundle to the invariant lines `V(τ)` and
//! the degrees of its Grothendieck decomposition there.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::bundle_data::KaneyamaBundleData;
use crate::error::{parse_err, Error, Result};
use crate::exact_linear::{
    clear_denominators, dot, inverse, rank, rational_kernel, IntMatrix, RatMatrix,
};
use crate::fan::LatticeVector;

/// One non-increasing degree tuple per wall, in the fan's wall order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SplittingSystem {
    tuples: Vec<Vec<BigInt>>,
}

impl SplittingSystem {
    /// Sorts every tuple into non-increasing order.
    pub fn new(mut tuples: Vec<Vec<BigInt>>) -> Self {
        for t in &mut tuples {
            t.sort_by(|a, b| b.cmp(a));
        }
        SplittingSystem { tuples }
    }

    pub fn from_i64(tuples: &[&[i64]]) -> Self {
        SplittingSystem::new(
            tuples
                .iter()
                .map(|t| t.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn tuples(&self) -> &[Vec<BigInt>] {
        &self.tuples
    }

    pub fn num_walls(&self) -> usize {
        self.tuples.len()
    }

    pub fn rank(&self) -> usize {
        self.tuples.first().map_or(0, Vec::len)
    }

    /// Adds `shift[i]` to every degree on wall `i`; tensoring with a line
    /// bundle of class `x` uses `shift = Q·x`.
    pub fn shift(&self, shift: &[BigInt]) -> Result<Self> {
        if shift.len() != self.tuples.len() {
            return Err(Error::DimensionMismatch(format!(
                "shift has {} entries for {} walls",
                shift.len(),
                self.tuples.len()
            )));
        }
        Ok(SplittingSystem::new(
            self.tuples
                .iter()
                .zip(shift)
                .map(|(t, s)| t.iter().map(|d| d + s).collect())
                .collect(),
        ))
    }

    /// Parses `tau(i): d1 … dr` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tuples = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let want = format!("tau({}):", tuples.len() + 1);
            let rest = line
                .strip_prefix(want.as_str())
                .ok_or_else(|| parse_err(k + 1, format!("expected `{want}`")))?;
            let t = rest
                .split_whitespace()
                .map(|w| {
                    w.parse::<BigInt>()
                        .map_err(|_| parse_err(k + 1, format!("bad integer `{w}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            tuples.push(t);
        }
        Ok(SplittingSystem::new(tuples))
    }
}

impl fmt::Display for SplittingSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tuples.iter().enumerate() {
            let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
            writeln!(f, "tau({}): {}", i + 1, parts.join(" "))?;
        }
        Ok(())
    }
}

/// The part of the bundle on one isotypic piece for the stabiliser of `V(τ)`.
///
/// `pasting` maps chart-1 coordinates to chart-2 coordinates: rows follow
/// `chart2`, columns follow `chart1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    /// Pairings of the common weight with the rays of `τ`.
    pub stab_weight: Vec<BigInt>,
    pub chart1: Vec<BigInt>,
    pub chart2: Vec<BigInt>,
    pub pasting: RatMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallRestriction {
    pub wall: usize,
    pub tau_perp: LatticeVector,
    pub v: LatticeVector,
    pub blocks: Vec<Block>,
}

impl WallRestriction {
    /// `Σ chart1 − Σ chart2` over all blocks; equals the total degree.
    pub fn weight_difference_total(&self) -> BigInt {
        self.blocks
            .iter()
            .map(|b| b.chart1.iter().sum::<BigInt>() - b.chart2.iter().sum::<BigInt>())
            .sum()
    }
}

/// The vector of `σ₁`'s dual basis attached to the ray of `σ₁` outside `τ`.
pub fn tau_perp(data: &KaneyamaBundleData, wall: usize) -> LatticeVector {
    let fan = data.fan();
    let w = &fan.walls()[wall];
    let pos = fan.cones()[w.sigma1]
        .iter()
        .position(|&j| j == w.extra1)
        .unwrap();
    fan.dual_basis(w.sigma1)[pos].clone()
}

/// Restricts to wall `wall`, choosing `v` with `⟨τ^⊥, v⟩ = 1` by an integral solve.
pub fn restrict(data: &KaneyamaBundleData, wall: usize) -> Result<WallRestriction> {
    let perp = tau_perp(data, wall);
    let n = perp.len();
    let a = IntMatrix::from_row_vecs(n, std::slice::from_ref(&perp));
    let sol = crate::exact_linear::solve_integral(&a, &IntMatrix::from_i64_rows(&[&[1]]))?
        .expect("a dual basis vector is primitive");
    restrict_with_v(data, wall, &sol.x.col(0))
}

/// Restriction with a caller-chosen one-parameter subgroup `v`.
pub fn restrict_with_v(
    data: &KaneyamaBundleData,
    wall: usize,
    v: &[BigInt],
) -> Result<WallRestriction> {
    let fan = data.fan();
    let w = fan
        .walls()
        .get(wall)
        .ok_or_else(|| Error::DimensionMismatch(format!("no wall {}", wall + 1)))?;
    let perp = tau_perp(data, wall);
    if v.len() != fan.dim() || !dot(&perp, v).is_one() {
        return Err(Error::InvalidBundle(format!(
            "v does not pair to 1 with τ^⊥ at wall {}",
            wall + 1
        )));
    }
    let (s1, s2) = (w.sigma1, w.sigma2);
    let w1 = data.weights(s1);
    let w2 = data.weights(s2);
    let key = |chi: &LatticeVector| -> Vec<BigInt> {
        w.tau.iter().map(|&j| dot(chi, &fan.rays()[j])).collect()
    };
    let interior: Vec<BigInt> = (0..fan.dim())
        .map(|c| w.tau.iter().map(|&j| fan.rays()[j][c].clone()).sum())
        .collect();
    let p = data.pasting(s2, s1);

    // Off-block entries vanish in the limit along the interior of τ.
    for i in 0..data.rank() {
        for j in 0..data.rank() {
            if p[(i, j)].is_zero() {
                continue;
            }
            let diff: Vec<BigInt> = w2[i].iter().zip(&w1[j]).map(|(a, b)| a - b).collect();
            if dot(&diff, &interior).is_negative() {
                return Err(Error::InvalidBundle(format!(
                    "pasting entry ({}, {}) diverges on wall {}",
                    i + 1,
                    j + 1,
                    wall + 1
                )));
            }
        }
    }

    let mut groups: BTreeMap<Vec<BigInt>, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (j, chi) in w1.iter().enumerate() {
        groups.entry(key(chi)).or_default().0.push(j);
    }
    for (i, chi) in w2.iter().enumerate() {
        groups.entry(key(chi)).or_default().1.push(i);
    }
    let mut blocks = Vec::with_capacity(groups.len());
    for (stab, (mut cols, mut rows)) in groups {
        if cols.len() != rows.len() {
            return Err(Error::InvalidBundle(format!(
                "net condition fails at wall {}",
                wall + 1
            )));
        }
        cols.sort_by(|&a, &b| dot(&w1[b], v).cmp(&dot(&w1[a], v)));
        rows.sort_by_key(|&i| dot(&w2[i], v));
        let pasting =
            RatMatrix::from_fn(rows.len(), cols.len(), |a, b| p[(rows[a], cols[b])].clone());
        blocks.push(Block {
            stab_weight: stab,
            chart1: cols.iter().map(|&j| dot(&w1[j], v)).collect(),
            chart2: rows.iter().map(|&i| dot(&w2[i], v)).collect(),
            pasting,
        });
    }
    Ok(WallRestriction {
        wall,
        tau_perp: perp,
        v: v.to_vec(),
        blocks,
    })
}

/// Degrees of the Grothendieck decomposition of one block, non-increasing.
///
/// `chart1` is non-increasing, `chart2` non-decreasing and `pasting` maps
/// chart-1 coordinates to chart-2 coordinates.
pub fn bootstrap(chart1: &[BigInt], chart2: &[BigInt], pasting: &RatMatrix) -> Result<Vec<BigInt>> {
    let r = chart1.len();
    if chart2.len() != r || pasting.rows() != r || pasting.cols() != r {
        return Err(Error::DimensionMismatch(
            "block weights and pasting disagree".into(),
        ));
    }
    if rank(pasting) < r {
        return Err(Error::SingularPasting(format!("{r}×{r} block")));
    }
    let mut c = chart1.to_vec();
    let mut d = chart2.to_vec();
    let mut a = pasting.clone();
    let mut out = Vec::with_capacity(r);
    while !c.is_empty() {
        if c.len() == 1 {
            out.push(&c[0] - &d[0]);
            break;
        }
        let (deg, u) = best_line(&c, &d, &a);
        let w = a.mul_vec(&u);
        let cstar = c
            .iter()
            .zip(&u)
            .filter(|(_, x)| !x.is_zero())
            .map(|(x, _)| x)
            .min()
            .unwrap()
            .clone();
        let dstar = &cstar - &deg;
        let k = (0..c.len())
            .find(|&k| !u[k].is_zero() && c[k] == cstar)
            .unwrap();
        let kp = (0..d.len())
            .find(|&k| !w[k].is_zero() && d[k] == dstar)
            .unwrap();
        out.push(deg);

        let size = c.len();
        let g1 = RatMatrix::from_fn(size, size, |i, j| {
            if j == k {
                u[i].clone()
            } else if i == j {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        });
        let g2 = RatMatrix::from_fn(size, size, |i, j| {
            if j == kp {
                w[i].clone()
            } else if i == j {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        });
        let g2_inv = inverse(&g2).expect("pivot entry of w is nonzero");
        let next = g2_inv.mul(&a).mul(&g1);
        let rows: Vec<usize> = (0..size).filter(|&i| i != kp).collect();
        let cols: Vec<usize> = (0..size).filter(|&j| j != k).collect();
        a = next.select(&rows, &cols);
        c.remove(k);
        d.remove(kp);
    }
    out.sort_by(|x, y| y.cmp(x));
    Ok(out)
}

/// Largest degree of a line subbundle and a vector spanning it in chart 1.
fn best_line(c: &[BigInt], d: &[BigInt], a: &RatMatrix) -> (BigInt, Vec<BigRational>) {
    let mut cs: Vec<&BigInt> = c.iter().collect();
    cs.dedup();
    let mut ds: Vec<&BigInt> = d.iter().collect();
    ds.dedup();
    let mut pairs: Vec<(BigInt, &BigInt, &BigInt)> = cs
        .iter()
        .flat_map(|&ci| ds.iter().map(move |&dj| (ci - dj, ci, dj)))
        .collect();
    pairs.sort_by(|x, y| y.0.cmp(&x.0).then(y.1.cmp(x.1)));
    for (deg, cstar, dstar) in pairs {
        let cols: Vec<usize> = (0..c.len()).filter(|&j| &c[j] >= cstar).collect();
        let rows: Vec<usize> = (0..d.len()).filter(|&i| &d[i] > dstar).collect();
        let basis = if rows.is_empty() {
            let mut e = vec![BigRational::zero(); cols.len()];
            e[0] = BigRational::one();
            vec![e]
        } else {
            rational_kernel(&a.select(&rows, &cols))
        };
        if let Some(first) = basis.first() {
            let ints = clear_denominators(first);
            let mut u = vec![BigRational::zero(); c.len()];
            for (slot, x) in cols.iter().zip(ints) {
                u[*slot] = BigRational::from_integer(x);
            }
            return (deg, u);
        }
    }
    unreachable!("the full space always contains a line subbundle")
}

/// Degrees on every wall.
pub fn splitting_system(data: &KaneyamaBundleData) -> Result<SplittingSystem> {
    let walls = data.fan().walls().len();
    let tuples = (0..walls)
        .into_par_iter()
        .map(|i| {
            let res = restrict(data, i)?;
            wall_degrees(&res)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SplittingSystem::new(tuples))
}

/// Degrees of a restriction, block by block; one-dimensional blocks skip bootstrapping.
pub fn wall_degrees(res: &WallRestriction) -> Result<Vec<BigInt>> {
    let mut out = Vec::new();
    for b in &res.blocks {
        if b.chart1.len() == 1 {
            if b.pasting[(0, 0)].is_zero() {
                return Err(Error::SingularPasting(format!(
                    "1×1 block at wall {}",
                    res.wall + 1
                )));
            }
            out.push(&b.chart1[0] - &b.chart2[0]);
        } else {
            out.extend(bootstrap(&b.chart1, &b.chart2, &b.pasting)?);
        }
    }
    out.sort_by(|x, y| y.cmp(x));
    Ok(out)
}

// ---- independent oracle ----

/// Laurent polynomial in `z` with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Laurent(BTreeMap<i64, BigRational>);

impl Laurent {
    pub fn monomial(coeff: BigRational, exp: i64) -> Self {
        let mut m = BTreeMap::new();
        if !coeff.is_zero() {
            m.insert(exp, coeff);
        }
        Laurent(m)
    }

    pub fn zero() -> Self {
        Laurent(BTreeMap::new())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.0.iter().map(|(&e, c)| (e, c))
    }

    fn add_term(&mut self, e: i64, c: BigRational) {
        let slot = self.0.entry(e).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&e);
        }
    }

    pub fn add(&self, other: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (&e, c) in &other.0 {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Laurent) -> Laurent {
        let mut out = Laurent::zero();
        for (&e1, c1) in &self.0 {
            for (&e2, c2) in &other.0 {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }

    pub fn neg(&self) -> Laurent {
        Laurent(self.0.iter().map(|(&e, c)| (e, -c.clone())).collect())
    }
}

/// Square matrix of Laurent polynomials.
pub type LaurentMatrix = Vec<Vec<Laurent>>;

fn laurent_det(m: &LaurentMatrix) -> Laurent {
    let n = m.len();
    if n == 0 {
        return Laurent::monomial(BigRational::one(), 0);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut total = Laurent::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: LaurentMatrix = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = m[0][j].mul(&laurent_det(&minor));
        total = if j % 2 == 0 {
            total.add(&term)
        } else {
            total.add(&term.neg())
        };
    }
    total
}

/// Transition matrix of a block: entry `(j, i)` is `(A⁻¹)_{ji} z^{c_j − d_i}`,
/// expressing chart-1 coordinates in terms of chart-2 coordinates.
pub fn block_transition(
    chart1: &[BigInt],
    chart2: &[BigInt],
    pasting: &RatMatrix,
) -> Result<LaurentMatrix> {
    let inv = inverse(pasting).ok_or_else(|| Error::SingularPasting("block".into()))?;
    let r = chart1.len();
    (0..r)
        .map(|j| {
            (0..r)
                .map(|i| {
                    let e = (&chart1[j] - &chart2[i])
                        .to_i64()
                        .ok_or_else(|| Error::WindowExceeded("exponent overflow".into()))?;
                    Ok(Laurent::monomial(inv[(j, i)].clone(), e))
                })
                .collect()
        })
        .collect()
}

/// `dim { h ∈ C[z⁻¹]^r : z^k T h ∈ C[z]^r }`, the sections of `E(k)`.
fn sections(t: &LaurentMatrix, k: i64, poles: i64) -> usize {
    let r = t.len();
    if poles < 0 {
        return 0;
    }
    let per = (poles + 1) as usize;
    // Unknown (i, m) multiplies z^{-m} in component i.
    let mut rows: BTreeMap<(usize, i64), Vec<BigRational>> = BTreeMap::new();
    for (j, trow) in t.iter().enumerate() {
        for (i, entry) in trow.iter().enumerate() {
            for (e, c) in entry.terms() {
                for m in 0..=poles {
                    let exp = e + k - m;
                    if exp < 0 {
                        let row = rows
                            .entry((j, exp))
                            .or_insert_with(|| vec![BigRational::zero(); r * per]);
                        row[i * per + m as usize] += c;
                    }
                }
            }
        }
    }
    if rows.is_empty() {
        return r * per;
    }
    let m: Vec<Vec<BigRational>> = rows.into_values().collect();
    r * per - rank(&RatMatrix::from_row_vecs(r * per, &m))
}

/// Splitting degrees of the bundle with transition `T` (`h₁ = T h₂`),
/// read off from the jumps of `h⁰(E(k))`. Independent of [`bootstrap`].
pub fn h0_oracle(t: &LaurentMatrix) -> Result<Vec<BigInt>> {
    const CAP: i64 = 1 << 12;
    let r = t.len();
    if r == 0 || t.iter().any(|row| row.len() != r) {
        return Err(Error::DimensionMismatch(
            "transition must be square and nonempty".into(),
        ));
    }
    let det = laurent_det(t);
    let mut terms = det.terms();
    let (m, _) = match (terms.next(), terms.next()) {
        (Some(term), None) => term,
        _ => {
            return Err(Error::SingularPasting(
                "determinant is not a monomial".into(),
            ))
        }
    };
    let exps: Vec<i64> = t
        .iter()
        .flatten()
        .flat_map(|x| x.terms().map(|(e, _)| e))
        .collect();
    let emin = exps.iter().copied().min().unwrap_or(0);
    let wmax = exps
        .iter()
        .map(|e| e.abs())
        .max()
        .unwrap_or(0)
        .max(m.abs())
        .max(1);
    let f = |k: i64| sections(t, k, (k - (r as i64 - 1) * emin + m).max(0));

    let mut span = r as i64 * wmax + 1;
    loop {
        if span > CAP {
            return Err(Error::WindowExceeded(format!(
                "no stable degree window within ±{CAP}"
            )));
        }
        let (lo, hi) = (-span, span);
        let values: Vec<usize> = (lo - 1..=hi).map(f).collect();
        let jump = |idx: usize| values[idx] as i64 - values[idx - 1] as i64;
        if values[1] != 0 || jump(values.len() - 1) != r as i64 {
            span *= 2;
            continue;
        }
        // jump at k counts summands with d ≥ −k.
        let mut degrees = Vec::with_capacity(r);
        let mut prev = 0i64;
        for (offset, k) in (lo..=hi).enumerate() {
            let g = jump(offset + 1);
            for _ in 0..(g - prev) {
                degrees.push(BigInt::from(-k));
            }
            prev = g;
        }
        if degrees.len() != r || degrees.iter().sum::<BigInt>() != BigInt::from(m) {
            return Err(Error::WindowExceeded(
                "section counts are inconsistent".into(),
            ));
        }
        degrees.sort_by(|x, y| y.cmp(x));
        return Ok(degrees);
    }
}
