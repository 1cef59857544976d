//! Smooth complete toric surfaces as weighted circular graphs.
//!
//! Weights follow `v_{i−1} + v_{i+1} + a_i·v_i = 0`, so `a_i` is the
//! self-intersection of `D(v_i)`. Blowing up the corner between `v_i` and
//! `v_{i+1}` inserts the ray `v_i + v_{i+1}` with weight `−1` and lowers both
//! neighbours by one.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fan::{make_fan, Fan};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeightedCircularGraph {
    weights: Vec<i64>,
}

impl WeightedCircularGraph {
    pub fn new(weights: Vec<i64>) -> Result<Self> {
        if weights.len() < 3 {
            return Err(Error::InconsistentWeights(format!(
                "a circular graph needs at least 3 vertices, got {}",
                weights.len()
            )));
        }
        Ok(WeightedCircularGraph { weights })
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sum(&self) -> i64 {
        self.weights.iter().sum()
    }

    /// Blows up the corner between vertex `i` and vertex `i+1` (mod `s`), 0-based.
    pub fn blowup(&self, i: usize) -> Self {
        let s = self.weights.len();
        assert!(i < s, "blowup position {i} out of range for {s} vertices");
        let mut w = self.weights.clone();
        let next = (i + 1) % s;
        w[i] -= 1;
        w[next] -= 1;
        w.insert(i + 1, -1);
        WeightedCircularGraph { weights: w }
    }

    /// Lexicographic minimum over all rotations and reflections.
    pub fn canonical_form(&self) -> Self {
        let s = self.weights.len();
        let mut rev = self.weights.clone();
        rev.reverse();
        let mut best: Option<Vec<i64>> = None;
        for base in [&self.weights, &rev] {
            for r in 0..s {
                let cand: Vec<i64> = (0..s).map(|k| base[(r + k) % s]).collect();
                if best.as_ref().is_none_or(|b| cand < *b) {
                    best = Some(cand);
                }
            }
        }
        WeightedCircularGraph {
            weights: best.unwrap(),
        }
    }

    /// All `2s` dihedral images, each paired with the map from new to old positions.
    pub fn dihedral_images(&self) -> Vec<(Vec<i64>, Vec<usize>)> {
        let s = self.weights.len();
        let mut out = Vec::with_capacity(2 * s);
        for reflect in [false, true] {
            for r in 0..s {
                let perm: Vec<usize> = (0..s)
                    .map(|k| {
                        if reflect {
                            (r + s - k) % s
                        } else {
                            (r + k) % s
                        }
                    })
                    .collect();
                out.push((perm.iter().map(|&p| self.weights[p]).collect(), perm));
            }
        }
        out
    }
}

impl fmt::Display for WeightedCircularGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl std::str::FromStr for WeightedCircularGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let weights = s
            .split(',')
            .map(|t| {
                let t = t.trim().replace('−', "-");
                t.parse::<i64>()
                    .map_err(|_| Error::InconsistentWeights(format!("bad weight `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        WeightedCircularGraph::new(weights)
    }
}

pub fn cp2() -> WeightedCircularGraph {
    WeightedCircularGraph {
        weights: vec![1, 1, 1],
    }
}

pub fn hirzebruch(a: i64) -> WeightedCircularGraph {
    WeightedCircularGraph {
        weights: vec![0, a, 0, -a],
    }
}

/// Canonical graphs reachable from `CP²` by exactly `k` blowups.
pub fn enumerate_blowups(k: usize) -> BTreeSet<WeightedCircularGraph> {
    enumerate_levels(k).pop().unwrap()
}

/// Levels `0..=k` of the blowup enumeration.
pub fn enumerate_levels(k: usize) -> Vec<BTreeSet<WeightedCircularGraph>> {
    let mut levels = vec![BTreeSet::from([cp2()])];
    for _ in 0..k {
        let frontier: Vec<&WeightedCircularGraph> = levels.last().unwrap().iter().collect();
        let next: BTreeSet<WeightedCircularGraph> = frontier
            .par_iter()
            .flat_map_iter(|g| (0..g.len()).map(move |i| g.blowup(i).canonical_form()))
            .collect::<Vec<_>>()
            .into_iter()
            .collect();
        levels.push(next);
    }
    levels
}

/// Ray vectors from the recurrence `v_{i+1} = −v_{i−1} − a_i v_i`.
pub fn graph_rays(g: &WeightedCircularGraph) -> Result<Vec<[i64; 2]>> {
    let s = g.len();
    let mut rays: Vec<[i64; 2]> = vec![[1, 0], [0, 1]];
    for i in 1..=s {
        let a = g.weights[i % s];
        let (p, c) = (rays[i - 1], rays[i]);
        let next = [
            (-p[0])
                .checked_sub(a.checked_mul(c[0]).ok_or_else(overflow)?)
                .ok_or_else(overflow)?,
            (-p[1])
                .checked_sub(a.checked_mul(c[1]).ok_or_else(overflow)?)
                .ok_or_else(overflow)?,
        ];
        rays.push(next);
    }
    if rays[s] != [1, 0] || rays[s + 1] != [0, 1] {
        return Err(Error::InconsistentWeights(format!(
            "rays of ({g}) do not close up"
        )));
    }
    rays.truncate(s);
    Ok(rays)
}

fn overflow() -> Error {
    Error::InconsistentWeights("ray coordinates overflow".into())
}

/// Builds the fan of the surface; cones are consecutive ray pairs.
pub fn graph_to_fan(g: &WeightedCircularGraph) -> Result<Fan> {
    let s = g.len();
    let rays = graph_rays(g)?;
    if g.sum() != 12 - 3 * s as i64 {
        return Err(Error::InconsistentWeights(format!(
            "weights of ({g}) sum to {}, expected {}",
            g.sum(),
            12 - 3 * s as i64
        )));
    }
    let rays = rays
        .iter()
        .map(|r| vec![BigInt::from(r[0]), BigInt::from(r[1])])
        .collect();
    let cones = (0..s).map(|i| vec![i, (i + 1) % s]).collect();
    make_fan(2, rays, cones).map_err(|e| Error::InconsistentWeights(format!("({g}): {e}")))
}
