//! Grouping of solver candidates into classes modulo similarity, reflection
//! and relabeling of equal-mass bodies.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{cmp_lex, CandidateSolution};
use crate::model::{DistanceMatrix, MassVector};

/// Beyond this many mass-preserving relabelings the key falls back to the
/// sorted list of distances.
pub const MAX_GROUP_ORDER: usize = 40_320;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCandidate {
    pub canonical_key: Vec<f64>,
    /// Lowest-residual member.
    pub representative: CandidateSolution,
    pub multiplicity: usize,
}

fn permutations_of(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations_of(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn group_order(m: &MassVector) -> usize {
    mass_groups(m)
        .iter()
        .map(|g| (1..=g.len()).product::<usize>())
        .try_fold(1usize, |acc, f| acc.checked_mul(f))
        .unwrap_or(usize::MAX)
}

fn mass_groups(m: &MassVector) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..m.len() {
        match groups.iter_mut().find(|g| m[g[0]] == m[i]) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

/// Every relabeling `pi` with `m[pi[i]] == m[i]`, identity first. Returns
/// `None` when the group is larger than [`MAX_GROUP_ORDER`].
pub fn mass_preserving_permutations(m: &MassVector) -> Option<Vec<Vec<usize>>> {
    if group_order(m) > MAX_GROUP_ORDER {
        return None;
    }
    let mut perms = vec![(0..m.len()).collect::<Vec<usize>>()];
    for group in mass_groups(m) {
        let images = permutations_of(&group);
        let mut next = Vec::with_capacity(perms.len() * images.len());
        for p in &perms {
            for img in &images {
                let mut q = p.clone();
                for (&from, &to) in group.iter().zip(img) {
                    q[from] = to;
                }
                next.push(q);
            }
        }
        perms = next;
    }
    Some(perms)
}

fn permuted_pairs(d: &DistanceMatrix, pi: &[usize]) -> Vec<f64> {
    let n = d.n();
    let mut v = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            v.push(d.get(pi[i], pi[j]));
        }
    }
    v
}

fn cmp_with_tol(a: &[f64], b: &[f64], tol: f64) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > tol * x.abs().max(y.abs()).max(1.0) {
            return x.total_cmp(y);
        }
    }
    Ordering::Equal
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Lexicographically smallest pair-distance vector over the relabelings in
/// `perms`; entries within `tol` compare equal.
pub fn canonical_key(d: &DistanceMatrix, perms: Option<&[Vec<usize>]>, tol: f64) -> Vec<f64> {
    let Some(perms) = perms else {
        return sorted(d.pairs());
    };
    perms
        .iter()
        .map(|p| permuted_pairs(d, p))
        .min_by(|a, b| cmp_with_tol(a, b, tol).then_with(|| cmp_lex(a, b)))
        .expect("identity is always present")
}

/// Number of distinct labeled configurations (up to similarity and
/// reflection) in the relabeling orbit of `d`. `None` when the group was too
/// large to enumerate.
pub fn labeled_copies(d: &DistanceMatrix, perms: Option<&[Vec<usize>]>, tol: f64) -> Option<usize> {
    let perms = perms?;
    let mut seen: Vec<Vec<f64>> = Vec::new();
    for p in perms {
        let v = permuted_pairs(d, p);
        if !seen
            .iter()
            .any(|w| w.iter().zip(&v).all(|(x, y)| (x - y).abs() <= tol))
        {
            seen.push(v);
        }
    }
    Some(seen.len())
}

fn same_class(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    perms: Option<&[Vec<usize>]>,
    tol: f64,
) -> bool {
    let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| (p - q).abs() <= tol);
    if !close(&sorted(a.pairs()), &sorted(b.pairs())) {
        return false;
    }
    let Some(perms) = perms else {
        return true;
    };
    let target = a.pairs();
    perms.iter().any(|p| close(&target, &permuted_pairs(b, p)))
}

/// Merges candidates whose distance vectors agree within `dedup_tol` after a
/// mass-preserving relabeling. Output is sorted by canonical key.
pub fn dedup_classes(
    candidates: &[CandidateSolution],
    m: &MassVector,
    dedup_tol: f64,
) -> Vec<ClassCandidate> {
    let perms = mass_preserving_permutations(m);
    let perms = perms.as_deref();
    let mut classes: Vec<(DistanceMatrix, ClassCandidate)> = Vec::new();
    for c in candidates {
        let d = c.configuration.distance_matrix();
        match classes
            .iter_mut()
            .find(|(rep, _)| same_class(rep, &d, perms, dedup_tol))
        {
            Some((rep, class)) => {
                class.multiplicity += 1;
                if c.residual_norm < class.representative.residual_norm {
                    class.representative = c.clone();
                    *rep = d;
                }
            }
            None => classes.push((
                d,
                ClassCandidate {
                    canonical_key: Vec::new(),
                    representative: c.clone(),
                    multiplicity: 1,
                },
            )),
        }
    }
    let mut out: Vec<ClassCandidate> = classes
        .into_iter()
        .map(|(d, mut class)| {
            class.canonical_key = canonical_key(&d, perms, dedup_tol);
            class
        })
        .collect();
    out.sort_by(|a, b| cmp_lex(&a.canonical_key, &b.canonical_key));
    out
}
