//! Complete nonsingular fans, their walls and dual bases.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{parse_err, Error, Result};
use crate::exact_linear::{dot, gcd_all, int_vec, inverse, solve_integral, IntMatrix};

/// An integer vector in `N` or `M`.
pub type LatticeVector = Vec<BigInt>;

/// A codimension-one cone `tau` shared by two maximal cones.
///
/// The relation satisfies `v[extra1] + v[extra2] + Σ relation[k]·v[tau[k]] = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub tau: Vec<usize>,
    pub sigma1: usize,
    pub sigma2: usize,
    pub extra1: usize,
    pub extra2: usize,
    pub relation: Vec<BigInt>,
}

/// A validated complete smooth fan. Ray and cone order follow the input.
#[derive(Clone, Debug)]
pub struct Fan {
    dim: usize,
    rays: Vec<LatticeVector>,
    cones: Vec<Vec<usize>>,
    duals: Vec<Vec<LatticeVector>>,
    walls: Vec<Wall>,
}

impl PartialEq for Fan {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.rays == other.rays && self.cones == other.cones
    }
}

impl Eq for Fan {}

fn ray_columns(n: usize, rays: &[LatticeVector], idx: &[usize]) -> IntMatrix {
    let cols: Vec<Vec<BigInt>> = idx.iter().map(|&j| rays[j].clone()).collect();
    IntMatrix::from_col_vecs(n, &cols)
}

fn fmt_vec(v: &[BigInt]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Validates raw data and builds a fan. Cone entries are 0-based ray indices.
pub fn make_fan(n: usize, rays: Vec<LatticeVector>, max_cones: Vec<Vec<usize>>) -> Result<Fan> {
    if n == 0 {
        return Err(Error::InvalidFan("dimension must be positive".into()));
    }
    let mut seen_rays = BTreeSet::new();
    for (j, v) in rays.iter().enumerate() {
        if v.len() != n {
            return Err(Error::InvalidFan(format!(
                "ray {} has {} coordinates, expected {n}",
                j + 1,
                v.len()
            )));
        }
        if !gcd_all(v).is_one() {
            return Err(Error::InvalidFan(format!(
                "ray {} = {} is not primitive",
                j + 1,
                fmt_vec(v)
            )));
        }
        if !seen_rays.insert(v.clone()) {
            return Err(Error::InvalidFan(format!(
                "ray {} = {} is repeated",
                j + 1,
                fmt_vec(v)
            )));
        }
    }
    if max_cones.is_empty() {
        return Err(Error::InvalidFan("no maximal cones".into()));
    }

    let mut seen_cones = BTreeSet::new();
    let mut duals: Vec<Vec<LatticeVector>> = Vec::with_capacity(max_cones.len());
    for (c, cone) in max_cones.iter().enumerate() {
        let set: BTreeSet<usize> = cone.iter().copied().collect();
        if cone.len() != n || set.len() != n {
            return Err(Error::InvalidFan(format!(
                "cone {} must list {n} distinct rays",
                c + 1
            )));
        }
        if let Some(&bad) = cone.iter().find(|&&j| j >= rays.len()) {
            return Err(Error::InvalidFan(format!(
                "cone {} refers to missing ray {}",
                c + 1,
                bad + 1
            )));
        }
        if !seen_cones.insert(set) {
            return Err(Error::InvalidFan(format!("cone {} is repeated", c + 1)));
        }
        let b = ray_columns(n, &rays, cone);
        let det = b.det();
        if det.abs() != BigInt::one() {
            return Err(Error::InvalidFan(format!(
                "cone {} is not unimodular (det = {det}), fan is not smooth",
                c + 1
            )));
        }
        let inv = inverse(&b.to_rational()).expect("unimodular matrix is invertible");
        duals.push(
            (0..n)
                .map(|i| inv.row(i).iter().map(|q| q.to_integer()).collect())
                .collect(),
        );
    }

    // Facets: every (n-1)-face of a maximal cone must lie in exactly two.
    let mut facets: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (c, cone) in max_cones.iter().enumerate() {
        let mut sorted = cone.clone();
        sorted.sort_unstable();
        for skip in 0..n {
            let tau: Vec<usize> = sorted
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != skip)
                .map(|(_, &j)| j)
                .collect();
            facets.entry(tau).or_default().push(c);
        }
    }

    let mut walls = Vec::with_capacity(facets.len());
    for (tau, owners) in &facets {
        if owners.len() != 2 {
            let names: Vec<String> = tau.iter().map(|j| (j + 1).to_string()).collect();
            return Err(Error::InvalidFan(format!(
                "facet {{{}}} lies in {} maximal cones, fan is not complete",
                names.join(","),
                owners.len()
            )));
        }
        let (s1, s2) = (owners[0], owners[1]);
        let extra = |c: usize| *max_cones[c].iter().find(|j| !tau.contains(j)).unwrap();
        let (e1, e2) = (extra(s1), extra(s2));
        let sum: Vec<BigInt> = rays[e1]
            .iter()
            .zip(&rays[e2])
            .map(|(a, b)| -(a + b))
            .collect();

        // v_{e2} written in σ1's basis must have coordinate -1 on v_{e1}.
        let pos = max_cones[s1].iter().position(|&j| j == e1).unwrap();
        if dot(&duals[s1][pos], &rays[e2]) != BigInt::from(-1) {
            return Err(Error::InvalidFan(format!(
                "cones {} and {} overlap",
                s1 + 1,
                s2 + 1
            )));
        }

        let relation = if tau.is_empty() {
            if sum.iter().any(|x| !x.is_zero()) {
                return Err(Error::InvalidFan(
                    "one-dimensional rays must be opposite".into(),
                ));
            }
            Vec::new()
        } else {
            let a = ray_columns(n, &rays, tau);
            let b = IntMatrix::from_col_vecs(n, &[sum]);
            let sol = solve_integral(&a, &b)?.ok_or_else(|| {
                Error::InvalidFan(format!(
                    "no integral wall relation between cones {} and {}",
                    s1 + 1,
                    s2 + 1
                ))
            })?;
            sol.x.col(0)
        };
        walls.push(Wall {
            tau: tau.clone(),
            sigma1: s1,
            sigma2: s2,
            extra1: e1,
            extra2: e2,
            relation,
        });
    }

    let fan = Fan {
        dim: n,
        rays,
        cones: max_cones,
        duals,
        walls,
    };
    fan.check_single_cover()?;
    Ok(fan)
}

impl Fan {
    pub fn from_i64(n: usize, rays: &[&[i64]], cones: &[&[usize]]) -> Result<Fan> {
        make_fan(
            n,
            rays.iter().map(|r| int_vec(r)).collect(),
            cones.iter().map(|c| c.to_vec()).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    pub fn num_cones(&self) -> usize {
        self.cones.len()
    }

    /// Walls in lexicographic order of their sorted ray index sets.
    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    /// `e¹..eⁿ` with `⟨eⁱ, v_j⟩ = δ_ij` for the rays of `sigma`, in cone order.
    pub fn dual_basis(&self, sigma: usize) -> &[LatticeVector] {
        &self.duals[sigma]
    }

    /// Inverse of [`Fan::ray_matrix`]; its rows are the dual basis.
    pub fn dual_basis_matrix(&self, sigma: usize) -> IntMatrix {
        IntMatrix::from_row_vecs(self.dim, &self.duals[sigma])
    }

    /// `n × n` matrix whose columns are the rays of `sigma`.
    pub fn ray_matrix(&self, sigma: usize) -> IntMatrix {
        ray_columns(self.dim, &self.rays, &self.cones[sigma])
    }

    pub fn cone_containing(&self, rays: &[usize]) -> Vec<usize> {
        (0..self.cones.len())
            .filter(|&c| rays.iter().all(|j| self.cones[c].contains(j)))
            .collect()
    }

    /// Principal divisor of `m`: the vector `(⟨m, v_1⟩, …, ⟨m, v_J⟩)`.
    pub fn principal_divisor(&self, m: &[BigInt]) -> Vec<BigInt> {
        self.rays.iter().map(|v| dot(m, v)).collect()
    }

    /// Principal divisors of the standard basis of `M`.
    pub fn principal_columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.dim)
            .map(|i| self.rays.iter().map(|v| v[i].clone()).collect())
            .collect()
    }

    fn check_single_cover(&self) -> Result<()> {
        // Count maximal cones whose interior contains a generic point.
        for q in [1009i64, 7919, 104_729, 1_299_709] {
            let mut p = Vec::with_capacity(self.dim);
            let mut t = BigInt::one();
            for _ in 0..self.dim {
                p.push(t.clone());
                t *= q;
            }
            let mut generic = true;
            let mut count = 0usize;
            for dual in &self.duals {
                let coords: Vec<BigInt> = dual.iter().map(|e| dot(e, &p)).collect();
                if coords.iter().any(Zero::is_zero) {
                    generic = false;
                    break;
                }
                if coords.iter().all(|x| x.is_positive()) {
                    count += 1;
                }
            }
            if !generic {
                continue;
            }
            return if count == 1 {
                Ok(())
            } else {
                Err(Error::InvalidFan(format!(
                    "maximal cones cover space {count} times, cones overlap"
                )))
            };
        }
        Ok(())
    }

    /// Parses the `dim` / `ray` / `cone` text format (1-based cone entries).
    pub fn parse(text: &str) -> Result<Fan> {
        let mut dim: Option<usize> = None;
        let mut rays = Vec::new();
        let mut cones = Vec::new();
        let mut last_line = 0;
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            last_line = line_no;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let head = words.next().unwrap();
            let rest: Vec<&str> = words.collect();
            match head {
                "dim" => {
                    if dim.is_some() {
                        return Err(parse_err(line_no, "duplicate dim line"));
                    }
                    if !rays.is_empty() || !cones.is_empty() {
                        return Err(parse_err(line_no, "dim must come first"));
                    }
                    if rest.len() != 1 {
                        return Err(parse_err(line_no, "expected `dim n`"));
                    }
                    let n: usize = rest[0]
                        .parse()
                        .map_err(|_| parse_err(line_no, "dim must be a positive integer"))?;
                    if n == 0 {
                        return Err(parse_err(line_no, "dim must be a positive integer"));
                    }
                    dim = Some(n);
                }
                "ray" => {
                    let n = dim.ok_or_else(|| parse_err(line_no, "ray before dim"))?;
                    if !cones.is_empty() {
                        return Err(parse_err(line_no, "ray after cone"));
                    }
                    if rest.len() != n {
                        return Err(parse_err(line_no, format!("ray needs {n} coordinates")));
                    }
                    let v = rest
                        .iter()
                        .map(|w| {
                            w.parse::<BigInt>()
                                .map_err(|_| parse_err(line_no, format!("bad integer `{w}`")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    rays.push(v);
                }
                "cone" => {
                    let n = dim.ok_or_else(|| parse_err(line_no, "cone before dim"))?;
                    if rest.len() != n {
                        return Err(parse_err(line_no, format!("cone needs {n} ray indices")));
                    }
                    let c = rest
                        .iter()
                        .map(|w| match w.parse::<usize>() {
                            Ok(i) if i >= 1 && i <= rays.len() => Ok(i - 1),
                            _ => Err(parse_err(line_no, format!("bad ray index `{w}`"))),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    cones.push(c);
                }
                other => return Err(parse_err(line_no, format!("unknown keyword `{other}`"))),
            }
        }
        let n = dim.ok_or_else(|| parse_err(last_line.max(1), "missing dim line"))?;
        make_fan(n, rays, cones)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("dim {}\n", self.dim);
        for v in &self.rays {
            let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "ray {}", parts.join(" "));
        }
        for c in &self.cones {
            let parts: Vec<String> = c.iter().map(|j| (j + 1).to_string()).collect();
            let _ = writeln!(s, "cone {}", parts.join(" "));
        }
        s
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Fan of `CPⁿ`: rays `e_1, …, e_n, −Σe_i`, cones all `n`-subsets.
pub fn projective_space(n: usize) -> Fan {
    let mut rays: Vec<LatticeVector> = (0..n)
        .map(|i| (0..n).map(|k| BigInt::from((i == k) as i64)).collect())
        .collect();
    rays.push(vec![BigInt::from(-1); n]);
    make_fan(n, rays, combinations(n + 1, n)).expect("projective space fan is valid")
}

/// Fan of the Hirzebruch surface `F_a`: rays `(1,0), (0,1), (−1,−a), (0,−1)`.
///
/// With this orientation the walls carry relation coefficients `0, a, 0, −a`.
pub fn hirzebruch(a: i64) -> Fan {
    Fan::from_i64(
        2,
        &[&[1, 0], &[0, 1], &[-1, -a], &[0, -1]],
        &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]],
    )
    .expect("Hirzebruch fan is valid")
}
