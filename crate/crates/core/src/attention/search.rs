/// Offsets `[start, end)` of the entries of a sorted posting list that fall in
/// the key range `[lo, hi)`.
pub fn binary_search_range(postings: &[u32], lo: u32, hi: u32) -> (usize, usize) {
    let mut unused = 0;
    binary_search_range_counted(postings, lo, hi, &mut unused)
}

/// Same as [`binary_search_range`], adding the number of index comparisons
/// performed to `comparisons`.
pub(crate) fn binary_search_range_counted(
    postings: &[u32],
    lo: u32,
    hi: u32,
    comparisons: &mut u64,
) -> (usize, usize) {
    debug_assert!(lo <= hi);
    let mut n = 0u64;
    let start = postings.partition_point(|&j| {
        n += 1;
        j < lo
    });
    let end = start
        + postings[start..].partition_point(|&j| {
            n += 1;
            j < hi
        });
    *comparisons += n;
    (start, end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn linear_scan(postings: &[u32], lo: u32, hi: u32) -> (usize, usize) {
        let start = postings.iter().take_while(|&&j| j < lo).count();
        let inside = postings[start..].iter().take_while(|&&j| j < hi).count();
        (start, start + inside)
    }

    #[test]
    fn examples() {
        assert_eq!(binary_search_range(&[1, 4, 7, 9], 4, 9), (1, 3));
        assert_eq!(binary_search_range(&[], 0, 10), (0, 0));
        assert_eq!(binary_search_range(&[2, 3, 5], 0, 100), (0, 3));
        assert_eq!(binary_search_range(&[2, 3, 5], 6, 9), (3, 3));
        assert_eq!(binary_search_range(&[2, 3, 5], 4, 4), (2, 2));
    }

    #[test]
    fn counts_comparisons() {
        let mut c = 0;
        binary_search_range_counted(&[], 0, 1, &mut c);
        assert_eq!(c, 0);
        let list: Vec<u32> = (0..1024).collect();
        binary_search_range_counted(&list, 100, 228, &mut c);
        assert!((15..=25).contains(&c), "{c}");
    }

    proptest! {
        #[test]
        fn matches_linear_scan(
            set in prop::collection::btree_set(0u32..200, 0..50),
            a in 0u32..220,
            b in 0u32..220,
        ) {
            let list: Vec<u32> = set.into_iter().collect();
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert_eq!(binary_search_range(&list, lo, hi), linear_scan(&list, lo, hi));
        }
    }
}
