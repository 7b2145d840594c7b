//! Lexicographic k-subset iteration and binomial counts.

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Advances `comb` (strictly increasing, values `< n`) to the next k-subset
/// in lexicographic order. Returns false after the last one.
pub fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    let Some(i) = (0..k).rev().find(|&i| comb[i] < n - k + i) else {
        return false;
    };
    comb[i] += 1;
    for j in i + 1..k {
        comb[j] = comb[j - 1] + 1;
    }
    true
}

/// Every k-subset of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        current = next_combination(&mut next, n).then_some(next);
        Some(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_binomial() {
        for n in 0..8 {
            for k in 0..=n + 1 {
                assert_eq!(
                    combinations(n, k).count() as u64,
                    binomial(n, k),
                    "C({n},{k})"
                );
            }
        }
        assert_eq!(binomial(16, 11), 4368);
        assert_eq!(binomial(200, 100), u64::MAX);
    }

    #[test]
    fn lexicographic() {
        let all: Vec<_> = combinations(4, 2).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(
            combinations(3, 0).collect::<Vec<_>>(),
            vec![Vec::<usize>::new()]
        );
    }
}
