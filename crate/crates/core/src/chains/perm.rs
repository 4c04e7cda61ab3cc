/// A permutation of `{0, ..., n}` with its sign cached.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
    sign: i8,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return None;
            }
        }
        let sign = parity(&images);
        Some(Permutation { images, sign })
    }

    pub fn identity(len: usize) -> Self {
        Permutation { images: (0..len).collect(), sign: 1 }
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// All permutations of `len` symbols in lexicographic order.
    pub fn all(len: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..len).collect();
        loop {
            out.push(Permutation { sign: parity(&current), images: current.clone() });
            // next lexicographic permutation
            let Some(i) = (1..len).rev().find(|&i| current[i - 1] < current[i]) else {
                break;
            };
            let j = (i..len).rev().find(|&j| current[j] > current[i - 1]).expect("successor");
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }

    /// The permutation sorting `keys` ascending, with the sign of that sort.
    /// `images[i]` is the position in `keys` of the i-th smallest element.
    pub fn sorting<T: Ord>(keys: &[T]) -> Self {
        let mut idx: Vec<usize> = (0..keys.len()).collect();
        idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        let sign = parity(&idx);
        Permutation { images: idx, sign }
    }
}

fn parity(images: &[usize]) -> i8 {
    let mut seen = vec![false; images.len()];
    let mut sign = 1i8;
    for start in 0..images.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = images[i];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_signs() {
        let all = Permutation::all(4);
        assert_eq!(all.len(), 24);
        assert_eq!(all.iter().filter(|p| p.sign() == 1).count(), 12);
        assert_eq!(Permutation::new(vec![1, 0, 2]).unwrap().sign(), -1);
        assert_eq!(Permutation::new(vec![1, 2, 0]).unwrap().sign(), 1);
        assert!(Permutation::new(vec![0, 0]).is_none());
        assert_eq!(Permutation::all(1).len(), 1);
    }

    #[test]
    fn sorting_sign() {
        let p = Permutation::sorting(&[3, 1, 2]);
        assert_eq!(p.images(), &[1, 2, 0]);
        assert_eq!(p.sign(), 1);
        assert_eq!(Permutation::sorting(&[2, 1]).sign(), -1);
    }
}
