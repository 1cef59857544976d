//! The augmented intersection matrix `Q` and positivity of divisor classes.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact_linear::IntMatrix;
use crate::fan::Fan;

/// `Q[i][j] = V(τ_i)·D(v_j)`; rows follow the fan's wall order, columns its ray order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugmentedIntersectionMatrix {
    pub q: IntMatrix,
    /// Sorted ray sets of the walls, one per row.
    pub row_walls: Vec<Vec<usize>>,
}

pub fn augmented_matrix(fan: &Fan) -> AugmentedIntersectionMatrix {
    let walls = fan.walls();
    let mut q = IntMatrix::zeros(walls.len(), fan.num_rays());
    for (i, w) in walls.iter().enumerate() {
        for (k, &j) in w.tau.iter().enumerate() {
            q[(i, j)] = w.relation[k].clone();
        }
        q[(i, w.extra1)] = BigInt::one();
        q[(i, w.extra2)] = BigInt::one();
    }
    AugmentedIntersectionMatrix {
        q,
        row_walls: walls.iter().map(|w| w.tau.clone()).collect(),
    }
}

impl fmt::Display for AugmentedIntersectionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = (0..self.q.rows())
            .flat_map(|i| self.q.row(i).iter().map(|x| x.to_string().len()))
            .max()
            .unwrap_or(1)
            .max(3);
        let labels: Vec<String> = self
            .row_walls
            .iter()
            .map(|t| {
                let names: Vec<String> = t.iter().map(|j| (j + 1).to_string()).collect();
                format!("tau({})", names.join(","))
            })
            .collect();
        let lw = labels.iter().map(|l| l.len()).max().unwrap_or(0);
        write!(f, "{:lw$}", "")?;
        for j in 0..self.q.cols() {
            write!(f, " {:>width$}", format!("D{}", j + 1))?;
        }
        writeln!(f)?;
        for (i, label) in labels.iter().enumerate() {
            write!(f, "{label:lw$}")?;
            for x in self.q.row(i) {
                write!(f, " {:>width$}", x.to_string())?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Positivity of a divisor class read off from its intersection numbers with every wall.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SignClass {
    Positive,
    Nef,
    Zero,
    Negative,
    Mixed,
}

impl fmt::Display for SignClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SignClass::Positive => "positive",
            SignClass::Nef => "nef",
            SignClass::Zero => "zero",
            SignClass::Negative => "negative",
            SignClass::Mixed => "mixed",
        };
        f.write_str(s)
    }
}

/// Classifies a vector of intersection numbers.
pub fn sign_of_vector(qx: &[BigInt]) -> SignClass {
    if qx.iter().all(Zero::is_zero) {
        SignClass::Zero
    } else if qx.iter().all(Signed::is_positive) {
        SignClass::Positive
    } else if qx.iter().all(|x| !x.is_negative()) {
        SignClass::Nef
    } else if qx.iter().all(Signed::is_negative) {
        SignClass::Negative
    } else {
        SignClass::Mixed
    }
}

pub fn sign_of_class(q: &IntMatrix, x: &[BigInt]) -> Result<SignClass> {
    if x.len() != q.cols() {
        return Err(Error::DimensionMismatch(format!(
            "class has {} entries, Q has {} columns",
            x.len(),
            q.cols()
        )));
    }
    Ok(sign_of_vector(&q.mul_vec(x)))
}
