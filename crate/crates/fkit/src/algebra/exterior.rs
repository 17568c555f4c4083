//! Sign bookkeeping for sorted exterior monomials (θ_I resp. dx_I).

/// Sign of merging two strictly increasing index tuples into one sorted tuple;
/// `None` when they overlap (θ_i² = 0).
pub(crate) fn merge_sign(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut inversions = 0usize;
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => return None,
            (Some(&x), Some(&y)) if x < y => {
                out.push(x);
                i += 1;
            }
            (Some(_), Some(&y)) => {
                // y jumps over the remaining entries of a
                inversions += a.len() - i;
                out.push(y);
                j += 1;
            }
            (Some(&x), None) => {
                out.push(x);
                i += 1;
            }
            (None, Some(&y)) => {
                out.push(y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    Some((out, if inversions % 2 == 0 { 1 } else { -1 }))
}

/// Left odd derivative ∂/∂θ_j of θ_I: position sign and the reduced tuple.
pub(crate) fn left_derivative(tuple: &[usize], j: usize) -> Option<(Vec<usize>, i32)> {
    let pos = tuple.iter().position(|&t| t == j)?;
    let mut rest = tuple.to_vec();
    rest.remove(pos);
    Some((rest, if pos % 2 == 0 { 1 } else { -1 }))
}

/// Right odd derivative θ_I ∂⃖/∂θ_j (sign counted from the right end).
pub(crate) fn right_derivative(tuple: &[usize], j: usize) -> Option<(Vec<usize>, i32)> {
    let pos = tuple.iter().position(|&t| t == j)?;
    let mut rest = tuple.to_vec();
    rest.remove(pos);
    Some((rest, if (tuple.len() - 1 - pos) % 2 == 0 { 1 } else { -1 }))
}

/// Sign that sorts an arbitrary distinct tuple; `None` on repeats.
pub(crate) fn sort_sign(tuple: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut idx: Vec<usize> = tuple.to_vec();
    let mut sign = 1;
    // insertion sort, counting swaps
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((idx, sign))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_signs() {
        assert_eq!(merge_sign(&[0], &[1]), Some((vec![0, 1], 1)));
        assert_eq!(merge_sign(&[1], &[0]), Some((vec![0, 1], -1)));
        assert_eq!(merge_sign(&[0, 2], &[1]), Some((vec![0, 1, 2], -1)));
        assert_eq!(merge_sign(&[0, 1], &[1]), None);
        assert_eq!(merge_sign(&[], &[3, 5]), Some((vec![3, 5], 1)));
    }

    #[test]
    fn left_derivatives() {
        assert_eq!(left_derivative(&[0, 1], 0), Some((vec![1], 1)));
        assert_eq!(left_derivative(&[0, 1], 1), Some((vec![0], -1)));
        assert_eq!(left_derivative(&[0, 1], 2), None);
    }

    #[test]
    fn right_derivatives() {
        assert_eq!(right_derivative(&[0, 1], 0), Some((vec![1], -1)));
        assert_eq!(right_derivative(&[0, 1], 1), Some((vec![0], 1)));
        assert_eq!(right_derivative(&[0], 0), Some((vec![], 1)));
    }

    #[test]
    fn sort_signs() {
        assert_eq!(sort_sign(&[2, 1]), Some((vec![1, 2], -1)));
        assert_eq!(sort_sign(&[2, 0, 1]), Some((vec![0, 1, 2], 1)));
        assert_eq!(sort_sign(&[1, 1]), None);
    }
}
