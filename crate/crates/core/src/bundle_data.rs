//! Kaneyama data of equivariant bundles, example constructors, and bundles
//! presented as cokernels `0 → O → ⊕ O(D_i) → E → 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{parse_err, Error, Result};
use crate::exact_linear::{dot, int_vec, inverse, rat_det, IntMatrix, IntegralSolver, RatMatrix};
use crate::fan::{self, Fan, LatticeVector};
use crate::splitting::SplittingSystem;

/// Weight systems `W_σ` and pastings `P(σ₂,σ₁)` of an equivariant bundle.
///
/// Rows of `P(σ₂,σ₁)` index the weights of `σ₂`, columns those of `σ₁`.
/// Weights of each cone are kept in lexicographic order.
#[derive(Clone, Debug)]
pub struct KaneyamaBundleData {
    fan: Fan,
    rank: usize,
    weights: Vec<Vec<LatticeVector>>,
    pastings: BTreeMap<(usize, usize), RatMatrix>,
}

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn fmt_weight(w: &[BigInt]) -> String {
    let parts: Vec<String> = w.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

impl KaneyamaBundleData {
    /// Checks shapes, fills in missing reverse pastings by inversion and
    /// sorts every weight system. The bundle conditions are left to
    /// [`KaneyamaBundleData::validate`].
    pub fn new(
        fan: Fan,
        weights: Vec<Vec<LatticeVector>>,
        pastings: BTreeMap<(usize, usize), RatMatrix>,
    ) -> Result<Self> {
        let cones = fan.num_cones();
        if weights.len() != cones {
            return Err(Error::InvalidBundle(format!(
                "{} weight systems given for {cones} maximal cones",
                weights.len()
            )));
        }
        let rank = weights[0].len();
        if rank == 0 {
            return Err(Error::InvalidBundle("rank must be positive".into()));
        }
        for (c, w) in weights.iter().enumerate() {
            if w.len() != rank {
                return Err(Error::InvalidBundle(format!(
                    "cone {} has {} weights, expected {rank}",
                    c + 1,
                    w.len()
                )));
            }
            if let Some(bad) = w.iter().find(|x| x.len() != fan.dim()) {
                return Err(Error::InvalidBundle(format!(
                    "weight {} of cone {} has the wrong dimension",
                    fmt_weight(bad),
                    c + 1
                )));
            }
        }
        for (&(a, b), p) in &pastings {
            if a >= cones || b >= cones || a == b {
                return Err(Error::InvalidBundle(format!(
                    "pasting ({}, {}) does not name two cones",
                    a + 1,
                    b + 1
                )));
            }
            if p.rows() != rank || p.cols() != rank {
                return Err(Error::InvalidBundle(format!(
                    "pasting ({}, {}) is not {rank}×{rank}",
                    a + 1,
                    b + 1
                )));
            }
        }
        let mut full = pastings.clone();
        for s2 in 0..cones {
            for s1 in 0..cones {
                if s1 == s2 || full.contains_key(&(s2, s1)) {
                    continue;
                }
                let back = pastings.get(&(s1, s2)).ok_or_else(|| {
                    Error::InvalidBundle(format!(
                        "missing pasting between cones {} and {}",
                        s2 + 1,
                        s1 + 1
                    ))
                })?;
                let inv = inverse(back).ok_or_else(|| {
                    Error::SingularPasting(format!(
                        "pasting ({}, {}) is not invertible",
                        s1 + 1,
                        s2 + 1
                    ))
                })?;
                full.insert((s2, s1), inv);
            }
        }

        // Sort weights; new index k holds old index perm[c][k].
        let perms: Vec<Vec<usize>> = weights
            .iter()
            .map(|w| {
                let mut idx: Vec<usize> = (0..rank).collect();
                idx.sort_by(|&x, &y| w[x].cmp(&w[y]));
                idx
            })
            .collect();
        let sorted: Vec<Vec<LatticeVector>> = weights
            .iter()
            .zip(&perms)
            .map(|(w, p)| p.iter().map(|&k| w[k].clone()).collect())
            .collect();
        let permuted = full
            .into_iter()
            .map(|((s2, s1), p)| {
                let m =
                    RatMatrix::from_fn(rank, rank, |i, j| p[(perms[s2][i], perms[s1][j])].clone());
                ((s2, s1), m)
            })
            .collect();
        Ok(KaneyamaBundleData {
            fan,
            rank,
            weights: sorted,
            pastings: permuted,
        })
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn weights(&self, sigma: usize) -> &[LatticeVector] {
        &self.weights[sigma]
    }

    /// `P(σ₂,σ₁)`; the identity when the cones agree.
    pub fn pasting(&self, sigma2: usize, sigma1: usize) -> RatMatrix {
        if sigma2 == sigma1 {
            RatMatrix::identity(self.rank)
        } else {
            self.pastings[&(sigma2, sigma1)].clone()
        }
    }

    /// Returns every violated condition: invertibility, cocycle, net and support.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let cones = self.fan.num_cones();
        for (&(s2, s1), p) in &self.pastings {
            if rat_det(p).is_zero() {
                out.push(format!("pasting ({}, {}) is singular", s2 + 1, s1 + 1));
            }
        }
        for s1 in 0..cones {
            for s2 in 0..cones {
                if s2 == s1 {
                    continue;
                }
                let p21 = &self.pastings[&(s2, s1)];
                for s3 in 0..cones {
                    if s3 == s2 {
                        continue;
                    }
                    let lhs = self.pasting(s3, s2).mul(p21);
                    if lhs != self.pasting(s3, s1) {
                        out.push(format!(
                            "cocycle fails for cones ({}, {}, {})",
                            s3 + 1,
                            s2 + 1,
                            s1 + 1
                        ));
                    }
                }
            }
        }
        for (i, w) in self.fan.walls().iter().enumerate() {
            let project = |sigma: usize| -> Vec<Vec<BigInt>> {
                let mut v: Vec<Vec<BigInt>> = self.weights[sigma]
                    .iter()
                    .map(|chi| {
                        w.tau
                            .iter()
                            .map(|&j| dot(chi, &self.fan.rays()[j]))
                            .collect()
                    })
                    .collect();
                v.sort();
                v
            };
            if project(w.sigma1) != project(w.sigma2) {
                let names: Vec<String> = w.tau.iter().map(|j| (j + 1).to_string()).collect();
                out.push(format!(
                    "net condition fails at wall {} (rays {{{}}}) between cones {} and {}",
                    i + 1,
                    names.join(","),
                    w.sigma1 + 1,
                    w.sigma2 + 1
                ));
            }
        }
        for (&(s2, s1), p) in &self.pastings {
            let common: Vec<usize> = self.fan.cones()[s1]
                .iter()
                .copied()
                .filter(|j| self.fan.cones()[s2].contains(j))
                .collect();
            for i in 0..self.rank {
                for j in 0..self.rank {
                    if p[(i, j)].is_zero() {
                        continue;
                    }
                    let diff: Vec<BigInt> = self.weights[s2][i]
                        .iter()
                        .zip(&self.weights[s1][j])
                        .map(|(a, b)| a - b)
                        .collect();
                    if common
                        .iter()
                        .any(|&k| dot(&diff, &self.fan.rays()[k]).is_negative())
                    {
                        out.push(format!(
                            "support fails: pasting ({}, {}) entry ({}, {}) is nonzero",
                            s2 + 1,
                            s1 + 1,
                            i + 1,
                            j + 1
                        ));
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Tensors with the line bundle of the divisor `x` (one entry per ray).
    pub fn twist(&self, x: &[BigInt]) -> Result<Self> {
        if x.len() != self.fan.num_rays() {
            return Err(Error::DimensionMismatch(format!(
                "class has {} entries, fan has {} rays",
                x.len(),
                self.fan.num_rays()
            )));
        }
        let n = self.fan.dim();
        let weights = (0..self.fan.num_cones())
            .map(|c| {
                let mut m = vec![BigInt::zero(); n];
                for (e, &j) in self.fan.dual_basis(c).iter().zip(&self.fan.cones()[c]) {
                    for (mi, ei) in m.iter_mut().zip(e) {
                        *mi += &x[j] * ei;
                    }
                }
                self.weights[c]
                    .iter()
                    .map(|w| w.iter().zip(&m).map(|(a, b)| a + b).collect())
                    .collect()
            })
            .collect();
        KaneyamaBundleData::new(self.fan.clone(), weights, self.pastings.clone())
    }

    /// Text form: `rank r`, one `weights` line per cone, one `pasting` line per ordered pair.
    pub fn to_text(&self) -> String {
        let mut s = format!("rank {}\n", self.rank);
        for (c, w) in self.weights.iter().enumerate() {
            let parts: Vec<String> = w.iter().map(|x| fmt_weight(x)).collect();
            let _ = writeln!(s, "weights {}: {}", c + 1, parts.join(";"));
        }
        for (&(s2, s1), p) in &self.pastings {
            let entries: Vec<String> = (0..self.rank)
                .flat_map(|i| (0..self.rank).map(move |j| (i, j)))
                .map(|(i, j)| p[(i, j)].to_string())
                .collect();
            let _ = writeln!(s, "pasting {} {}: {}", s2 + 1, s1 + 1, entries.join(" "));
        }
        s
    }
}

/// Tangent bundle: `W_σ` is the dual basis of `σ`, `P(σ₂,σ₁) = B₂⁻¹ B₁`.
pub fn tangent_bundle(fan: &Fan) -> KaneyamaBundleData {
    let cones = fan.num_cones();
    let weights: Vec<Vec<LatticeVector>> = (0..cones).map(|c| fan.dual_basis(c).to_vec()).collect();
    let b: Vec<RatMatrix> = (0..cones)
        .map(|c| fan.ray_matrix(c).to_rational())
        .collect();
    let b_inv: Vec<RatMatrix> = (0..cones)
        .map(|c| fan.dual_basis_matrix(c).to_rational())
        .collect();
    let mut pastings = BTreeMap::new();
    for s2 in 0..cones {
        for s1 in 0..cones {
            if s1 != s2 {
                pastings.insert((s2, s1), b_inv[s2].mul(&b[s1]));
            }
        }
    }
    KaneyamaBundleData::new(fan.clone(), weights, pastings)
        .expect("tangent data has consistent shapes")
}

/// Fan of `CP²` with cones `[v1,v2], [v2,v3], [v3,v1]`.
pub fn cp2_fan() -> Fan {
    Fan::from_i64(
        2,
        &[&[1, 0], &[0, 1], &[-1, -1]],
        &[&[0, 1], &[1, 2], &[2, 0]],
    )
    .expect("CP² fan is valid")
}

/// Rank-two bundle on `CP²` with weights `{(a,0),(0,b)}`, `{(−b,b),(−c,0)}`, `{(a,−a),(0,−c)}`.
pub fn cp2_rank2(a: i64, b: i64, c: i64) -> Result<KaneyamaBundleData> {
    if a <= 0 || b <= 0 || c <= 0 {
        return Err(Error::InvalidBundle(format!(
            "parameters must be positive, got ({a}, {b}, {c})"
        )));
    }
    let weights = vec![
        vec![int_vec(&[a, 0]), int_vec(&[0, b])],
        vec![int_vec(&[-b, b]), int_vec(&[-c, 0])],
        vec![int_vec(&[a, -a]), int_vec(&[0, -c])],
    ];
    let m = |r: [[i64; 2]; 2]| RatMatrix::from_fn(2, 2, |i, j| rat(r[i][j]));
    let pastings = BTreeMap::from([
        ((1, 0), m([[1, 1], [1, 0]])),
        ((2, 1), m([[1, 0], [-1, 1]])),
        ((2, 0), m([[1, 1], [0, -1]])),
    ]);
    KaneyamaBundleData::new(cp2_fan(), weights, pastings)
}

// ---- bundles from a section of a split bundle ----

/// `E` defined by `0 → O → ⊕ O(D_i) → E → 0`, where the `i`-th component of
/// the section is the monomial `z^{α_i}` in homogeneous coordinates.
#[derive(Clone, Debug)]
pub struct EulerBundleSpec {
    pub fan: Fan,
    pub summand_divisors: Vec<Vec<BigInt>>,
    pub section_exponents: Vec<Vec<BigInt>>,
}

impl EulerBundleSpec {
    pub fn new(
        fan: Fan,
        summand_divisors: Vec<Vec<BigInt>>,
        section_exponents: Vec<Vec<BigInt>>,
    ) -> Result<Self> {
        let j = fan.num_rays();
        if summand_divisors.len() < 2 || summand_divisors.len() != section_exponents.len() {
            return Err(Error::InvalidBundle(
                "need at least two summands, each with one section".into(),
            ));
        }
        let principal = IntegralSolver::new(&IntMatrix::from_col_vecs(j, &fan.principal_columns()));
        for (k, (d, alpha)) in summand_divisors.iter().zip(&section_exponents).enumerate() {
            if d.len() != j || alpha.len() != j {
                return Err(Error::InvalidBundle(format!(
                    "summand {} must have {j} entries",
                    k + 1
                )));
            }
            if alpha.iter().any(Signed::is_negative) {
                return Err(Error::InvalidBundle(format!(
                    "summand {} has a negative exponent",
                    k + 1
                )));
            }
            let diff: Vec<BigInt> = d.iter().zip(alpha).map(|(a, b)| a - b).collect();
            if principal.solve_vec(&diff)?.is_none() {
                return Err(Error::InvalidBundle(format!(
                    "monomial of summand {} is not a section of its divisor",
                    k + 1
                )));
            }
        }
        Ok(EulerBundleSpec {
            fan,
            summand_divisors,
            section_exponents,
        })
    }

    pub fn rank(&self) -> usize {
        self.summand_divisors.len() - 1
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("euler\n");
        for (d, a) in self.summand_divisors.iter().zip(&self.section_exponents) {
            let d: Vec<String> = d.iter().map(|x| x.to_string()).collect();
            let a: Vec<String> = a.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "summand {} : {}", d.join(" "), a.join(" "));
        }
        s
    }
}

fn diagonal_summands(j: usize, m: &[i64]) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let d: Vec<Vec<BigInt>> = (0..j)
        .map(|i| {
            (0..j)
                .map(|k| BigInt::from(if i == k { m[i] } else { 0 }))
                .collect()
        })
        .collect();
    (d.clone(), d)
}

/// `⊕ O(m_i D(v_i))` on `CPⁿ` with section `(z_0^{m_0}, …, z_n^{m_n})`.
pub fn euler_cpn(n: usize, m: &[i64]) -> Result<EulerBundleSpec> {
    if m.len() != n + 1 || m.iter().any(|&x| x <= 0) {
        return Err(Error::InvalidBundle(format!(
            "need {} positive exponents",
            n + 1
        )));
    }
    let (d, a) = diagonal_summands(n + 1, m);
    EulerBundleSpec::new(fan::projective_space(n), d, a)
}

/// Rank-three bundle on `F_a` with section `(z_1^{m_1}, …, z_4^{m_4})`.
pub fn euler_hirzebruch(a: i64, m: [i64; 4]) -> Result<EulerBundleSpec> {
    if m.iter().any(|&x| x <= 0) {
        return Err(Error::InvalidBundle("exponents must be positive".into()));
    }
    let (d, al) = diagonal_summands(4, &m);
    EulerBundleSpec::new(fan::hirzebruch(a), d, al)
}

/// Splitting numbers of the restriction to each wall, read off from the section.
///
/// On a wall a summand whose monomial avoids all rays of the wall and both
/// neighbouring rays gives a nowhere vanishing constant and is removed. When
/// there is none but exactly two surviving monomials are pure powers of the two
/// neighbouring coordinates, those two summands merge into one of the summed degree.
pub fn euler_splitting_system(spec: &EulerBundleSpec, q: &IntMatrix) -> Result<SplittingSystem> {
    let walls = spec.fan.walls();
    if q.rows() != walls.len() || q.cols() != spec.fan.num_rays() {
        return Err(Error::DimensionMismatch(
            "Q does not belong to this fan".into(),
        ));
    }
    let mut tuples = Vec::with_capacity(walls.len());
    for (i, w) in walls.iter().enumerate() {
        let degrees: Vec<BigInt> = spec
            .summand_divisors
            .iter()
            .map(|d| dot(q.row(i), d))
            .collect();
        let mut constant = None;
        let mut live = Vec::new();
        for (k, alpha) in spec.section_exponents.iter().enumerate() {
            if w.tau.iter().any(|&j| alpha[j].is_positive()) {
                continue;
            }
            let (p1, p2) = (&alpha[w.extra1], &alpha[w.extra2]);
            if p1.is_zero() && p2.is_zero() {
                constant.get_or_insert(k);
            }
            live.push((k, p1.clone(), p2.clone()));
        }
        let mut out: Vec<BigInt>;
        if let Some(k0) = constant {
            out = degrees
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != k0)
                .map(|(_, d)| d.clone())
                .collect();
        } else if live.len() == 2 {
            let pure = |p1: &BigInt, p2: &BigInt| -> Option<bool> {
                match (p1.is_positive(), p2.is_positive()) {
                    (true, false) => Some(true),
                    (false, true) => Some(false),
                    _ => None,
                }
            };
            let (k1, a1, b1) = &live[0];
            let (k2, a2, b2) = &live[1];
            match (pure(a1, b1), pure(a2, b2)) {
                (Some(x), Some(y)) if x != y => {
                    out = vec![&degrees[*k1] + &degrees[*k2]];
                    out.extend(
                        degrees
                            .iter()
                            .enumerate()
                            .filter(|&(k, _)| k != *k1 && k != *k2)
                            .map(|(_, d)| d.clone()),
                    );
                }
                _ => {
                    return Err(Error::EtaNotInScope {
                        wall: i + 1,
                        reason:
                            "surviving sections are not pure powers of the two wall coordinates"
                                .into(),
                    })
                }
            }
        } else {
            return Err(Error::EtaNotInScope {
                wall: i + 1,
                reason: format!("{} non-vanishing sections and none is constant", live.len()),
            });
        }
        out.sort_by(|a, b| b.cmp(a));
        tuples.push(out);
    }
    Ok(SplittingSystem::new(tuples))
}

// ---- text input ----

/// A parsed bundle file.
#[derive(Clone, Debug)]
pub enum BundleInput {
    Kaneyama(KaneyamaBundleData),
    Euler(EulerBundleSpec),
}

fn parse_rational(word: &str, line: usize) -> Result<BigRational> {
    let bad = || parse_err(line, format!("bad rational `{word}`"));
    match word.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.parse().map_err(|_| bad())?;
            let q: BigInt = q.parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(word.parse().map_err(|_| bad())?)),
    }
}

fn parse_ints(words: &[&str], line: usize) -> Result<Vec<BigInt>> {
    words
        .iter()
        .map(|w| {
            w.parse::<BigInt>()
                .map_err(|_| parse_err(line, format!("bad integer `{w}`")))
        })
        .collect()
}

fn parse_cone_index(word: &str, cones: usize, line: usize) -> Result<usize> {
    match word.parse::<usize>() {
        Ok(i) if i >= 1 && i <= cones => Ok(i - 1),
        _ => Err(parse_err(line, format!("bad cone index `{word}`"))),
    }
}

/// Parses either Kaneyama data (`rank` / `weights` / `pasting`) or an
/// `euler` file (`summand d_1 … d_J : α_1 … α_J`) over the given fan.
pub fn parse_bundle(text: &str, fan: &Fan) -> Result<BundleInput> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap().trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let Some(&(first_no, first)) = lines.first() else {
        return Err(parse_err(1, "empty bundle file"));
    };
    if first == "euler" {
        let mut d = Vec::new();
        let mut a = Vec::new();
        for &(no, line) in &lines[1..] {
            let rest = line
                .strip_prefix("summand")
                .ok_or_else(|| parse_err(no, format!("expected `summand`, found `{line}`")))?;
            let (ds, als) = rest
                .split_once(':')
                .ok_or_else(|| parse_err(no, "summand needs `:`"))?;
            let ds: Vec<&str> = ds.split_whitespace().collect();
            let als: Vec<&str> = als.split_whitespace().collect();
            if ds.len() != fan.num_rays() || als.len() != fan.num_rays() {
                return Err(parse_err(
                    no,
                    format!("summand needs {} entries on each side", fan.num_rays()),
                ));
            }
            d.push(parse_ints(&ds, no)?);
            a.push(parse_ints(&als, no)?);
        }
        return Ok(BundleInput::Euler(EulerBundleSpec::new(fan.clone(), d, a)?));
    }

    let rank: usize = match first.split_whitespace().collect::<Vec<_>>()[..] {
        ["rank", r] => r
            .parse()
            .ok()
            .filter(|&r| r > 0)
            .ok_or_else(|| parse_err(first_no, "bad rank"))?,
        _ => return Err(parse_err(first_no, "expected `rank r` or `euler`")),
    };
    let cones = fan.num_cones();
    let mut weights: Vec<Option<Vec<LatticeVector>>> = vec![None; cones];
    let mut pastings = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for &(no, line) in &lines[1..] {
        let (head, body) = line
            .split_once(':')
            .ok_or_else(|| parse_err(no, "missing `:`"))?;
        let head: Vec<&str> = head.split_whitespace().collect();
        match head[..] {
            ["weights", c] => {
                let c = parse_cone_index(c, cones, no)?;
                if weights[c].is_some() {
                    return Err(parse_err(
                        no,
                        format!("weights for cone {} given twice", c + 1),
                    ));
                }
                let mut ws = Vec::new();
                for item in body.split(';') {
                    let item = item.trim();
                    let inner = item
                        .strip_prefix('(')
                        .and_then(|s| s.strip_suffix(')'))
                        .ok_or_else(|| {
                            parse_err(no, format!("weight `{item}` must be parenthesised"))
                        })?;
                    let coords: Vec<&str> = inner.split(',').map(str::trim).collect();
                    if coords.len() != fan.dim() {
                        return Err(parse_err(
                            no,
                            format!("weight `{item}` needs {} coordinates", fan.dim()),
                        ));
                    }
                    ws.push(parse_ints(&coords, no)?);
                }
                if ws.len() != rank {
                    return Err(parse_err(no, format!("expected {rank} weights")));
                }
                weights[c] = Some(ws);
            }
            ["pasting", s2, s1] => {
                let s2 = parse_cone_index(s2, cones, no)?;
                let s1 = parse_cone_index(s1, cones, no)?;
                if s1 == s2 || !seen.insert((s2, s1)) {
                    return Err(parse_err(no, "pasting repeated or between equal cones"));
                }
                let entries: Vec<&str> = body.split_whitespace().collect();
                if entries.len() != rank * rank {
                    return Err(parse_err(
                        no,
                        format!("pasting needs {} entries", rank * rank),
                    ));
                }
                let vals = entries
                    .iter()
                    .map(|w| parse_rational(w, no))
                    .collect::<Result<Vec<_>>>()?;
                pastings.insert((s2, s1), RatMatrix::from_data(rank, rank, vals));
            }
            _ => return Err(parse_err(no, format!("unknown line `{line}`"))),
        }
    }
    let last = lines.last().map_or(1, |l| l.0);
    let weights = weights
        .into_iter()
        .enumerate()
        .map(|(c, w)| w.ok_or_else(|| parse_err(last, format!("no weights for cone {}", c + 1))))
        .collect::<Result<Vec<_>>>()?;
    Ok(BundleInput::Kaneyama(KaneyamaBundleData::new(
        fan.clone(),
        weights,
        pastings,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intersection::augmented_matrix;
    use crate::surface_graph::{enumerate_levels, graph_to_fan};

    fn tuples(s: &SplittingSystem) -> Vec<Vec<i64>> {
        s.tuples()
            .iter()
            .map(|t| t.iter().map(|x| i64::try_from(x).unwrap()).collect())
            .collect()
    }

    #[test]
    fn tangent_bundles_validate() {
        assert!(tangent_bundle(&cp2_fan()).validate().is_ok());
        for n in 1..=4 {
            tangent_bundle(&fan::projective_space(n))
                .validate()
                .unwrap();
        }
        for a in 0..4 {
            tangent_bundle(&fan::hirzebruch(a)).validate().unwrap();
        }
    }

    #[test]
    fn tangent_bundles_of_blowups_validate() {
        for level in enumerate_levels(5) {
            for g in level {
                tangent_bundle(&graph_to_fan(&g).unwrap())
                    .validate()
                    .unwrap();
            }
        }
    }

    #[test]
    fn cp2_tangent_weights() {
        let t = tangent_bundle(&cp2_fan());
        // lexicographic order of the dual basis of [v2, v3]
        assert_eq!(t.weights(1), &[int_vec(&[-1, 0]), int_vec(&[-1, 1])]);
    }

    #[test]
    fn rank_two_examples() {
        let e = cp2_rank2(1, 1, 1).unwrap();
        assert_eq!(e.weights(0), &[int_vec(&[0, 1]), int_vec(&[1, 0])]);
        assert_eq!(e.weights(1), &[int_vec(&[-1, 0]), int_vec(&[-1, 1])]);
        assert_eq!(e.weights(2), &[int_vec(&[0, -1]), int_vec(&[1, -1])]);
        e.validate().unwrap();
        for a in 1..=4 {
            for b in 1..=4 {
                for c in 1..=4 {
                    cp2_rank2(a, b, c).unwrap().validate().unwrap();
                }
            }
        }
        assert!(cp2_rank2(0, 1, 1).is_err());
    }

    #[test]
    fn perturbed_weight_breaks_net_condition() {
        let t = tangent_bundle(&cp2_fan());
        let mut w: Vec<Vec<LatticeVector>> = (0..3).map(|c| t.weights(c).to_vec()).collect();
        w[0][0] = int_vec(&[0, 2]);
        let p = (0..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .filter(|(a, b)| a != b)
            .map(|(a, b)| ((a, b), t.pasting(a, b)))
            .collect();
        let bad = KaneyamaBundleData::new(cp2_fan(), w, p).unwrap();
        let v = bad.violations();
        assert!(
            v.iter()
                .any(|m| m.starts_with("net condition fails at wall")),
            "{v:?}"
        );
    }

    #[test]
    fn identity_pastings_violate_support() {
        let w = vec![
            vec![int_vec(&[1, 0]), int_vec(&[0, 1])],
            vec![int_vec(&[-1, 1]), int_vec(&[-1, 0])],
            vec![int_vec(&[0, -1]), int_vec(&[1, -1])],
        ];
        let p = (0..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .filter(|(a, b)| a != b)
            .map(|k| (k, RatMatrix::identity(2)))
            .collect();
        let bad = KaneyamaBundleData::new(cp2_fan(), w, p).unwrap();
        let v = bad.violations();
        assert!(v.iter().any(|m| m.starts_with("support fails")), "{v:?}");
    }

    #[test]
    fn diagonal_pastings_break_cocycle() {
        // Matching weights diagonally is not consistent around the triangle.
        let w = vec![
            vec![int_vec(&[1, 0]), int_vec(&[0, 1])],
            vec![int_vec(&[-1, 0]), int_vec(&[-1, 1])],
            vec![int_vec(&[1, -1]), int_vec(&[0, -1])],
        ];
        let swap = RatMatrix::from_fn(2, 2, |i, j| rat((i != j) as i64));
        let p = BTreeMap::from([
            ((1, 0), RatMatrix::identity(2)),
            ((2, 1), RatMatrix::identity(2)),
            ((2, 0), swap),
        ]);
        let bad = KaneyamaBundleData::new(cp2_fan(), w, p).unwrap();
        assert!(bad.violations().iter().any(|m| m.starts_with("cocycle")));
    }

    #[test]
    fn twist_shifts_weights() {
        let t = tangent_bundle(&cp2_fan());
        let tw = t.twist(&int_vec(&[1, 0, 0])).unwrap();
        tw.validate().unwrap();
        assert_eq!(tw.weights(0), &[int_vec(&[1, 1]), int_vec(&[2, 0])]);
        assert!(t.twist(&int_vec(&[1])).is_err());
    }

    #[test]
    fn text_round_trip() {
        let e = cp2_rank2(2, 1, 3).unwrap();
        let BundleInput::Kaneyama(back) = parse_bundle(&e.to_text(), e.fan()).unwrap() else {
            panic!("expected Kaneyama data");
        };
        assert_eq!(back.to_text(), e.to_text());
        let spec = euler_cpn(2, &[1, 2, 3]).unwrap();
        let BundleInput::Euler(back) = parse_bundle(&spec.to_text(), &spec.fan).unwrap() else {
            panic!("expected an euler file");
        };
        assert_eq!(back.summand_divisors, spec.summand_divisors);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let f = cp2_fan();
        let e = parse_bundle(
            "rank 2\nweights 1: (1,0);(0,1)\nweights 9: (1,0);(0,1)\n",
            &f,
        )
        .unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = parse_bundle("rank 2\npasting 1 2: 1 0 0 x\n", &f).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        assert!(matches!(
            parse_bundle("bogus\n", &f),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn euler_cp2_equal_degrees() {
        for m in 1..=3 {
            let spec = euler_cpn(2, &[m, m, m]).unwrap();
            let q = augmented_matrix(&spec.fan).q;
            let xi = euler_splitting_system(&spec, &q).unwrap();
            assert_eq!(tuples(&xi), vec![vec![2 * m, m]; 3]);
        }
    }

    #[test]
    fn euler_cpn_unequal_degrees() {
        // On the wall missing v_i and v_j the two pure powers merge.
        let spec = euler_cpn(3, &[1, 2, 3, 4]).unwrap();
        let q = augmented_matrix(&spec.fan).q;
        let xi = euler_splitting_system(&spec, &q).unwrap();
        for (w, t) in spec.fan.walls().iter().zip(tuples(&xi)) {
            let m = [1, 2, 3, 4];
            let mut want = vec![m[w.extra1] + m[w.extra2]];
            want.extend(w.tau.iter().map(|&j| m[j]));
            want.sort_by(|a, b| b.cmp(a));
            assert_eq!(t, want);
        }
    }

    #[test]
    fn euler_hirzebruch_walls() {
        let (m1, m2, m3, m4) = (1, 2, 3, 5);
        for a in 0..3 {
            let spec = euler_hirzebruch(a, [m1, m2, m3, m4]).unwrap();
            let q = augmented_matrix(&spec.fan).q;
            let xi = euler_splitting_system(&spec, &q).unwrap();
            let sorted = |mut v: Vec<i64>| {
                v.sort_by(|x, y| y.cmp(x));
                v
            };
            assert_eq!(
                tuples(&xi),
                vec![
                    sorted(vec![m2, m4, 0]),
                    sorted(vec![m1, m3, a * m2]),
                    sorted(vec![m2, m4, 0]),
                    sorted(vec![m1, m3, -a * m4]),
                ]
            );
        }
    }

    #[test]
    fn euler_section_must_match_divisor() {
        let f = fan::projective_space(2);
        let d = vec![
            int_vec(&[1, 0, 0]),
            int_vec(&[0, 1, 0]),
            int_vec(&[0, 0, 1]),
        ];
        let a = vec![
            int_vec(&[2, 0, 0]),
            int_vec(&[0, 1, 0]),
            int_vec(&[0, 0, 1]),
        ];
        assert!(EulerBundleSpec::new(f, d, a).is_err());
    }

    #[test]
    fn euler_out_of_scope() {
        // Every section vanishes on the walls through v1.
        let f = fan::projective_space(2);
        let d = vec![
            int_vec(&[1, 0, 0]),
            int_vec(&[1, 0, 0]),
            int_vec(&[1, 0, 0]),
        ];
        let a = d.clone();
        let spec = EulerBundleSpec::new(f, d, a).unwrap();
        let q = augmented_matrix(&spec.fan).q;
        assert!(matches!(
            euler_splitting_system(&spec, &q),
            Err(Error::EtaNotInScope { .. })
        ));
    }
}
