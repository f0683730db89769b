use crate::error::{Error, Result};

/// A p-tuple of 0-based indices into a cubic tensor of dimension `dim`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    indices: Vec<usize>,
    dim: usize,
}

impl MultiIndex {
    pub fn new(indices: Vec<usize>, dim: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidShape("multi-index of order 0".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(Error::IndexOutOfRange { index: bad, dim });
        }
        Ok(Self { indices, dim })
    }

    /// Builds from 1-based indices as used in the file formats.
    pub fn from_one_based(indices: &[usize], dim: usize) -> Result<Self> {
        let zero_based = indices
            .iter()
            .map(|&i| i.checked_sub(1).ok_or(Error::IndexOutOfRange { index: 0, dim }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(zero_based, dim)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn order(&self) -> usize {
        self.indices.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Non-decreasing representative of the permutation class.
    pub fn canonical(&self) -> MultiIndex {
        let mut indices = self.indices.clone();
        indices.sort_unstable();
        MultiIndex { indices, dim: self.dim }
    }

    pub fn is_canonical(&self) -> bool {
        self.indices.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn gamma(&self) -> u64 {
        gamma(&self.indices)
    }

    pub fn is_paired(&self) -> bool {
        is_paired(&self.indices)
    }

    pub fn has_repeat(&self) -> bool {
        has_repeat(&self.indices)
    }
}

/// Number of distinct permutations of `indices`: p! / ∏ c_j!.
pub fn gamma(indices: &[usize]) -> u64 {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    // multinomial built as a product of binomials to stay within u64
    let mut result: u64 = 1;
    let mut placed: u64 = 0;
    let mut k = 0;
    while k < sorted.len() {
        let mut run = 1;
        while k + run < sorted.len() && sorted[k + run] == sorted[k] {
            run += 1;
        }
        for r in 1..=run as u64 {
            placed += 1;
            result = result * placed / r;
        }
        k += run;
    }
    result
}

/// True iff every value occurs an even number of times (always false for odd p).
pub fn is_paired(indices: &[usize]) -> bool {
    if indices.len() % 2 == 1 {
        return false;
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.chunks(2).all(|c| c[0] == c[1])
}

pub fn has_repeat(indices: &[usize]) -> bool {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).any(|w| w[0] == w[1])
}

/// Sign of the permutation sorting `indices`, or 0 when an index repeats.
pub fn sort_sign(indices: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for a in 0..indices.len() {
        for b in a + 1..indices.len() {
            match indices[a].cmp(&indices[b]) {
                std::cmp::Ordering::Equal => return 0.0,
                std::cmp::Ordering::Greater => inversions += 1,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Order and dimension of a cubic tensor, with the lexicographic ranking of
/// its canonical (non-decreasing) multi-indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorShape {
    order: usize,
    dim: usize,
    // multisets[k][l]: non-decreasing sequences of length l over k values
    multisets: Vec<Vec<usize>>,
}

impl TensorShape {
    pub fn new(order: usize, dim: usize) -> Result<Self> {
        if order == 0 || dim == 0 {
            return Err(Error::InvalidShape(format!("order and dimension must be positive (p={order}, N={dim})")));
        }
        let mut multisets = vec![vec![0usize; order + 1]; dim + 1];
        for row in multisets.iter_mut() {
            row[0] = 1;
        }
        for k in 1..=dim {
            for l in 1..=order {
                multisets[k][l] = multisets[k - 1][l] + multisets[k][l - 1];
            }
        }
        Ok(Self { order, dim, multisets })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// C(N + p - 1, p).
    pub fn num_classes(&self) -> usize {
        self.multisets[self.dim][self.order]
    }

    pub fn num_entries(&self) -> usize {
        self.dim.pow(self.order as u32)
    }

    /// Lexicographic rank of a non-decreasing tuple.
    pub fn rank(&self, sorted: &[usize]) -> usize {
        debug_assert_eq!(sorted.len(), self.order);
        let mut rank = 0;
        let mut prev = 0;
        for (t, &i) in sorted.iter().enumerate() {
            let remaining = self.order - t - 1;
            for v in prev..i {
                rank += self.multisets[self.dim - v][remaining];
            }
            prev = i;
        }
        rank
    }

    /// Rank of the class containing an arbitrary tuple.
    pub fn class_of(&self, indices: &[usize]) -> usize {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        self.rank(&sorted)
    }

    /// All canonical multi-indices in rank order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.num_classes());
        let mut cur = vec![0usize; self.order];
        loop {
            out.push(cur.clone());
            // next non-decreasing tuple
            let mut t = self.order;
            loop {
                if t == 0 {
                    return out;
                }
                t -= 1;
                if cur[t] + 1 < self.dim {
                    let v = cur[t] + 1;
                    for x in cur[t..].iter_mut() {
                        *x = v;
                    }
                    break;
                }
            }
        }
    }

    /// Iterates over all `N^p` positions in row-major order.
    pub fn positions(&self) -> Positions {
        Positions::new(self.order, self.dim)
    }
}

/// Row-major odometer over `{0..dim}^order`.
#[derive(Debug, Clone)]
pub struct Positions {
    cur: Vec<usize>,
    dim: usize,
    done: bool,
}

impl Positions {
    pub fn new(order: usize, dim: usize) -> Self {
        Self { cur: vec![0; order], dim, done: dim == 0 }
    }
}

impl Iterator for Positions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let item = self.cur.clone();
        let mut t = self.cur.len();
        loop {
            if t == 0 {
                self.done = true;
                break;
            }
            t -= 1;
            self.cur[t] += 1;
            if self.cur[t] < self.dim {
                break;
            }
            self.cur[t] = 0;
        }
        Some(item)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u64) -> u64 {
        (1..=n).product()
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(&[0, 1, 2]), 6);
        assert_eq!(gamma(&[0, 0, 1]), 3);
        assert_eq!(gamma(&[4, 4, 4, 4, 4]), 1);
        assert_eq!(gamma(&[0, 0, 1, 1]), 6);
        // 12!/(3!·4!·5!) = 27720
        let idx: Vec<usize> = [0; 3].iter().chain([1; 4].iter()).chain([2; 5].iter()).copied().collect();
        assert_eq!(gamma(&idx), 27720);
    }

    #[test]
    fn gamma_matches_permutation_count() {
        // brute force: count distinct permutations
        let idx = [0usize, 1, 1, 2, 2, 2];
        let mut seen = std::collections::HashSet::new();
        let mut perm = idx.to_vec();
        permute(&mut perm, 0, &mut seen);
        assert_eq!(seen.len() as u64, gamma(&idx));
        assert_eq!(gamma(&idx), factorial(6) / (factorial(2) * factorial(3)));
    }

    fn permute(v: &mut Vec<usize>, k: usize, seen: &mut std::collections::HashSet<Vec<usize>>) {
        if k == v.len() {
            seen.insert(v.clone());
            return;
        }
        for j in k..v.len() {
            v.swap(k, j);
            permute(v, k + 1, seen);
            v.swap(k, j);
        }
    }

    #[test]
    fn pairing() {
        assert!(is_paired(&[0, 0]));
        assert!(is_paired(&[0, 1, 0, 1]));
        assert!(!is_paired(&[0, 0, 0, 1]));
        assert!(!is_paired(&[0, 0, 0]));
        assert!(is_paired(&[2, 2, 2, 2]));
    }

    #[test]
    fn signs() {
        assert_eq!(sort_sign(&[0, 1, 2]), 1.0);
        assert_eq!(sort_sign(&[1, 0, 2]), -1.0);
        assert_eq!(sort_sign(&[2, 0, 1]), 1.0);
        assert_eq!(sort_sign(&[1, 1, 0]), 0.0);
    }

    #[test]
    fn ranking_is_a_bijection() {
        for p in 1..=5 {
            for n in 1..=4 {
                let shape = TensorShape::new(p, n).unwrap();
                let classes = shape.classes();
                assert_eq!(classes.len(), shape.num_classes());
                for (r, c) in classes.iter().enumerate() {
                    assert_eq!(shape.rank(c), r);
                }
                let total: u64 = classes.iter().map(|c| gamma(c)).sum();
                assert_eq!(total, (n as u64).pow(p as u32));
            }
        }
    }

    #[test]
    fn positions_cover_everything() {
        let all: Vec<_> = Positions::new(3, 2).collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0], vec![0, 0, 0]);
        assert_eq!(all[1], vec![0, 0, 1]);
        assert_eq!(all[7], vec![1, 1, 1]);
    }

    #[test]
    fn multi_index_validation() {
        assert!(MultiIndex::new(vec![0, 3], 3).is_err());
        let m = MultiIndex::from_one_based(&[2, 1, 2], 2).unwrap();
        assert_eq!(m.indices(), &[1, 0, 1]);
        assert_eq!(m.canonical().indices(), &[0, 1, 1]);
        assert_eq!(m.gamma(), 3);
        assert!(MultiIndex::from_one_based(&[0, 1], 2).is_err());
    }
}
