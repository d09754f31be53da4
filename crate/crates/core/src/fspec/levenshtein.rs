/// Case-sensitive edit distance between two strings, counted over Unicode
/// characters with unit cost for insertion, deletion and substitution.
/// Two-row dynamic program, O(|a|·|b|) time and O(|b|) space.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub_cost = if ca == cb { 0 } else { 1 };
            curr[j + 1] = (prev[j] + sub_cost)
                .min(prev[j + 1] + 1)
                .min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_pairs() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("", ""), 0);
        assert_eq!(levenshtein("same", "same"), 0);
    }

    #[test]
    fn case_sensitivity_counts() {
        assert_eq!(levenshtein("Login", "login"), 1);
        assert_ne!(levenshtein("ABC", "abc"), 0);
    }

    #[test]
    fn annotation_to_method_distances() {
        // anchors used throughout the location scoring tests
        assert_eq!(levenshtein("Initialization", "initializeLC"), 6);
        assert_eq!(levenshtein("Initialization", "login"), 11);
        assert_eq!(levenshtein("Initialization", "main"), 11);
        assert_eq!(levenshtein("Logging_In", "login"), 6);
        assert_eq!(levenshtein("initializeCallback", "initializeContext"), 7);
    }
}
