//! Maximin random sampling.
//!
//! Picks `k'` distinguished objects that are spread out (each one maximizes
//! its distance to those already chosen), partitions the data by nearest
//! distinguished object, then fills the sample with a seeded uniform draw
//! from every group in proportion to the group's size.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{DistanceMode, ObjectSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MmrsSample {
    /// Distinguished objects in selection order.
    pub distinguished: Vec<usize>,
    /// Sampled objects, ascending; contains every distinguished object.
    pub sample: Vec<usize>,
    /// For every object, the position in `distinguished` of its nearest
    /// distinguished object.
    pub group_of: Vec<usize>,
}

/// Distinguished objects plus the nearest-distinguished assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Maximin {
    pub distinguished: Vec<usize>,
    pub group_of: Vec<usize>,
}

/// Greedy maximin selection starting from the object farthest from the centroid.
pub fn maximin_select<S: ObjectSet + ?Sized>(
    objects: &S,
    k_prime: usize,
    mode: DistanceMode,
) -> Result<Vec<usize>> {
    Ok(maximin(objects, k_prime, mode)?.distinguished)
}

/// [`maximin_select`] that also records each object's nearest distinguished object.
pub fn maximin<S: ObjectSet + ?Sized>(
    objects: &S,
    k_prime: usize,
    mode: DistanceMode,
) -> Result<Maximin> {
    let total = objects.len();
    if k_prime == 0 || k_prime > total {
        return Err(Error::param("k_prime", k_prime, format!("1..={total}")));
    }
    let mut scratch = vec![0.0; total];
    let centroid = objects.centroid(mode);
    objects.sq_distances_to(&centroid, mode, &mut scratch);
    let mut next = argmax(&scratch, |_| true);

    let mut chosen = vec![false; total];
    let mut min_dist = vec![f64::INFINITY; total];
    let mut group_of = vec![0usize; total];
    let mut distinguished = Vec::with_capacity(k_prime);
    loop {
        let t = distinguished.len();
        distinguished.push(next);
        chosen[next] = true;
        let point = objects.features(next);
        objects.sq_distances_to(&point, mode, &mut scratch);
        for (j, &d) in scratch.iter().enumerate() {
            if d < min_dist[j] {
                min_dist[j] = d;
                group_of[j] = t;
            }
        }
        group_of[next] = t;
        if distinguished.len() == k_prime {
            break;
        }
        next = argmax(&min_dist, |j| !chosen[j]);
    }
    Ok(Maximin {
        distinguished,
        group_of,
    })
}

/// First index with the largest value among those passing `keep`.
fn argmax(values: &[f64], keep: impl Fn(usize) -> bool) -> usize {
    let mut best = usize::MAX;
    for (j, &v) in values.iter().enumerate() {
        if keep(j) && (best == usize::MAX || v > values[best]) {
            best = j;
        }
    }
    best
}

/// Per-group sample sizes: proportional shares rounded by largest remainder,
/// at least one per group, never more than the group holds, summing to `n`.
pub fn proportional_quotas(sizes: &[usize], n: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    assert!(n >= sizes.len() && n <= total, "quota target out of range");
    let exact: Vec<f64> = sizes
        .iter()
        .map(|&s| n as f64 * s as f64 / total as f64)
        .collect();
    let mut quota: Vec<usize> = exact
        .iter()
        .zip(sizes)
        .map(|(&e, &s)| (e.floor() as usize).clamp(1, s))
        .collect();
    let mut sum: usize = quota.iter().sum();
    while sum < n {
        let g = (0..sizes.len())
            .filter(|&g| quota[g] < sizes[g])
            .fold(None, |best: Option<usize>, g| match best {
                Some(b) if exact[b] - quota[b] as f64 >= exact[g] - quota[g] as f64 => Some(b),
                _ => Some(g),
            })
            .expect("capacity remains while sum < total");
        quota[g] += 1;
        sum += 1;
    }
    while sum > n {
        let g = (0..sizes.len())
            .filter(|&g| quota[g] > 1)
            .fold(None, |best: Option<usize>, g| match best {
                Some(b) if quota[b] as f64 - exact[b] >= quota[g] as f64 - exact[g] => Some(b),
                _ => Some(g),
            })
            .expect("some group exceeds its floor while sum > group count");
        quota[g] -= 1;
        sum -= 1;
    }
    quota
}

pub fn mmrs_sample<S: ObjectSet + ?Sized>(
    objects: &S,
    k_prime: usize,
    n: usize,
    seed: u64,
    mode: DistanceMode,
) -> Result<MmrsSample> {
    let total = objects.len();
    if n < k_prime || n > total {
        return Err(Error::param("n", n, format!("{k_prime}..={total}")));
    }
    let Maximin {
        distinguished,
        group_of,
    } = maximin(objects, k_prime, mode)?;

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k_prime];
    for (j, &g) in group_of.iter().enumerate() {
        if j != distinguished[g] {
            members[g].push(j);
        }
    }
    let sizes: Vec<usize> = members.iter().map(|m| m.len() + 1).collect();
    let quotas = proportional_quotas(&sizes, n);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = distinguished.clone();
    for (g, group) in members.iter().enumerate() {
        let extra = quotas[g] - 1;
        if extra == 0 {
            continue;
        }
        let picks = index::sample(&mut rng, group.len(), extra);
        let mut picks = picks.into_vec();
        picks.sort_unstable();
        sample.extend(picks.into_iter().map(|p| group[p]));
    }
    sample.sort_unstable();
    Ok(MmrsSample {
        distinguished,
        sample,
        group_of,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{sq_euclidean, FeatureMatrix};
    use rand::{Rng, SeedableRng};

    fn points(values: &[f64], dim: usize) -> FeatureMatrix {
        FeatureMatrix::new(values.len() / dim, dim, values.to_vec()).unwrap()
    }

    fn random_points(n: usize, dim: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..n * dim).map(|_| rng.random_range(0.0..100.0)).collect();
        points(&v, dim)
    }

    /// Direct restatement of the greedy rule on explicit distances.
    fn brute_force_maximin(f: &FeatureMatrix, k: usize) -> Vec<usize> {
        let n = f.rows();
        let centroid: Vec<f64> = (0..f.cols())
            .map(|c| (0..n).map(|i| f.row(i)[c]).sum::<f64>() / n as f64)
            .collect();
        let dc: Vec<f64> = (0..n).map(|i| sq_euclidean(f.row(i), &centroid)).collect();
        let first = (0..n).fold(0, |b, i| if dc[i] > dc[b] { i } else { b });
        let mut chosen = vec![first];
        while chosen.len() < k {
            let mut best = None;
            let mut best_d = -1.0;
            for i in 0..n {
                if chosen.contains(&i) {
                    continue;
                }
                let d = chosen
                    .iter()
                    .map(|&c| sq_euclidean(f.row(i), f.row(c)))
                    .fold(f64::INFINITY, f64::min);
                if d > best_d {
                    best_d = d;
                    best = Some(i);
                }
            }
            chosen.push(best.unwrap());
        }
        chosen
    }

    #[test]
    fn exhaustion_selects_everything() {
        let f = random_points(9, 2, 1);
        let mut sel = maximin_select(&f.objects(), 9, DistanceMode::Verbatim).unwrap();
        sel.sort_unstable();
        assert_eq!(sel, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn one_dimensional_example() {
        let f = points(&[0.0, 1.0, 10.0], 1);
        let sel = maximin_select(&f.objects(), 2, DistanceMode::Verbatim).unwrap();
        assert_eq!(sel, vec![2, 0]);
    }

    #[test]
    fn k_prime_out_of_range() {
        let f = points(&[0.0, 1.0], 1);
        assert!(maximin_select(&f.objects(), 0, DistanceMode::Verbatim).is_err());
        assert!(maximin_select(&f.objects(), 3, DistanceMode::Verbatim).is_err());
    }

    #[test]
    fn matches_brute_force_greedy() {
        for seed in 0..20 {
            let n = 20 + (seed as usize * 9) % 180;
            let f = random_points(n, 3, seed);
            let k = 1 + (seed as usize * 7) % 15;
            assert_eq!(
                maximin_select(&f.objects(), k, DistanceMode::Verbatim).unwrap(),
                brute_force_maximin(&f, k),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn quotas_follow_group_sizes() {
        assert_eq!(proportional_quotas(&[80, 20], 10), vec![8, 2]);
        assert_eq!(proportional_quotas(&[80, 20], 2), vec![1, 1]);
        assert_eq!(proportional_quotas(&[98, 1, 1], 3), vec![1, 1, 1]);
        assert_eq!(proportional_quotas(&[98, 1, 1], 10), vec![8, 1, 1]);
        assert_eq!(proportional_quotas(&[3, 3, 3], 9), vec![3, 3, 3]);
        assert_eq!(proportional_quotas(&[5, 5, 5], 4), vec![2, 1, 1]);
    }

    #[test]
    fn sample_edge_sizes() {
        let f = random_points(60, 2, 3);
        let all = mmrs_sample(&f.objects(), 4, 60, 0, DistanceMode::Verbatim).unwrap();
        assert_eq!(all.sample, (0..60).collect::<Vec<_>>());
        let minimal = mmrs_sample(&f.objects(), 4, 4, 0, DistanceMode::Verbatim).unwrap();
        let mut d = minimal.distinguished.clone();
        d.sort_unstable();
        assert_eq!(minimal.sample, d);
        assert!(mmrs_sample(&f.objects(), 4, 3, 0, DistanceMode::Verbatim).is_err());
        assert!(mmrs_sample(&f.objects(), 4, 61, 0, DistanceMode::Verbatim).is_err());
    }

    #[test]
    fn groups_are_true_nearest_distinguished() {
        let f = random_points(150, 3, 4);
        let s = mmrs_sample(&f.objects(), 7, 40, 2, DistanceMode::Verbatim).unwrap();
        for j in 0..150 {
            let dists: Vec<f64> = s
                .distinguished
                .iter()
                .map(|&d| sq_euclidean(f.row(j), f.row(d)))
                .collect();
            let nearest = (0..dists.len()).fold(0, |b, t| if dists[t] < dists[b] { t } else { b });
            assert_eq!(s.group_of[j], nearest, "object {j}");
        }
    }

    proptest::proptest! {
        #[test]
        fn sample_invariants(n_obj in 10usize..120, k in 1usize..8, extra in 0usize..40, seed in 0u64..50) {
            let k = k.min(n_obj);
            let n = (k + extra).min(n_obj);
            let f = random_points(n_obj, 2, seed);
            let s = mmrs_sample(&f.objects(), k, n, seed, DistanceMode::Verbatim).unwrap();
            proptest::prop_assert_eq!(s.sample.len(), n);
            proptest::prop_assert!(s.sample.windows(2).all(|w| w[0] < w[1]));
            for d in &s.distinguished {
                proptest::prop_assert!(s.sample.binary_search(d).is_ok());
            }
            let again = mmrs_sample(&f.objects(), k, n, seed, DistanceMode::Verbatim).unwrap();
            proptest::prop_assert_eq!(s, again);
        }
    }
}
