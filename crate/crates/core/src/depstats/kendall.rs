use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::check_pair;
use crate::error::{Error, Result};

/// Pair counts behind Kendall's τ̂ (no ties).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KendallStats {
    pub concordant: u64,
    pub discordant: u64,
    pub n: usize,
    /// Concordant pairs involving each observation, in input order.
    pub per_observation: Vec<u64>,
}

impl KendallStats {
    pub fn pairs(&self) -> u64 {
        pair_count(self.n)
    }

    pub fn tau_hat(&self) -> f64 {
        (self.concordant as f64 - self.discordant as f64) / self.pairs() as f64
    }
}

fn pair_count(n: usize) -> u64 {
    let n = n as u64;
    n * (n - 1) / 2
}

/// Indices sorted by value; reports the first tie found.
fn sorted_order(v: &[f64], variable: &'static str) -> Result<Vec<usize>> {
    if let Some(i) = v.iter().position(|a| a.is_nan()) {
        return Err(Error::InvalidParameter(format!("NaN in {variable} at index {i}")));
    }
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    for w in order.windows(2) {
        if v[w[0]] == v[w[1]] {
            let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::Ties {
                variable,
                first,
                second,
            });
        }
    }
    Ok(order)
}

/// Sorts `v` in place and returns the number of inversions.
fn merge_count(v: &mut [usize], buf: &mut Vec<usize>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inversions = merge_count(&mut v[..mid], buf) + merge_count(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf.push(v[i]);
            i += 1;
        } else {
            // every remaining left element exceeds v[j]
            inversions += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    inversions
}

struct Fenwick(Vec<u64>);

impl Fenwick {
    fn new(n: usize) -> Self {
        Self(vec![0; n + 1])
    }

    fn add(&mut self, i: usize) {
        let mut i = i + 1;
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of inserted ranks `< i`.
    fn prefix(&self, i: usize) -> u64 {
        let mut i = i;
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Kendall's τ̂ in O(n log n): inversions of y taken in x order are the
/// discordant pairs. Ties are rejected.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<KendallStats> {
    let n = check_pair(x, y, 2)?;
    let by_x = sorted_order(x, "x")?;
    let by_y = sorted_order(y, "y")?;
    let mut y_rank = vec![0usize; n];
    for (rank, &i) in by_y.iter().enumerate() {
        y_rank[i] = rank;
    }
    let ranks_in_x_order: Vec<usize> = by_x.iter().map(|&i| y_rank[i]).collect();

    let mut scratch = ranks_in_x_order.clone();
    let discordant = merge_count(&mut scratch, &mut Vec::with_capacity(n));
    let concordant = pair_count(n) - discordant;

    // c_i: smaller-x partners with smaller y, plus larger-x partners with larger y.
    let mut per_observation = vec![0u64; n];
    let mut tree = Fenwick::new(n);
    for (&i, &r) in by_x.iter().zip(&ranks_in_x_order) {
        per_observation[i] += tree.prefix(r);
        tree.add(r);
    }
    let mut tree = Fenwick::new(n);
    for (seen, (&i, &r)) in by_x.iter().zip(&ranks_in_x_order).rev().enumerate() {
        per_observation[i] += seen as u64 - tree.prefix(r + 1);
        tree.add(r);
    }

    Ok(KendallStats {
        concordant,
        discordant,
        n,
        per_observation,
    })
}

/// Reference O(n²) enumeration of all pairs.
pub fn kendall_tau_oracle(x: &[f64], y: &[f64]) -> Result<KendallStats> {
    let n = check_pair(x, y, 2)?;
    sorted_order(x, "x")?;
    sorted_order(y, "y")?;
    let mut per_observation = vec![0u64; n];
    let (mut concordant, mut discordant) = (0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let sx = x[i].total_cmp(&x[j]);
            let sy = y[i].total_cmp(&y[j]);
            if sx == sy && sx != Ordering::Equal {
                concordant += 1;
                per_observation[i] += 1;
                per_observation[j] += 1;
            } else {
                discordant += 1;
            }
        }
    }
    Ok(KendallStats {
        concordant,
        discordant,
        n,
        per_observation,
    })
}
