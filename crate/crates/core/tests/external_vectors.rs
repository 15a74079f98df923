//! Frozen test vectors for the serial oracle.
//!
//! Expected values were produced once by NLTK 3.10 `sentence_bleu` /
//! `corpus_bleu` (smoothing methods 0-3, epsilon 0.1) on these token-ID
//! lists. Every case has at least one unigram match and a candidate at
//! least as long as the highest weighted order, where NLTK's conventions
//! coincide with ours.

use batchbleu::oracle::{oracle_corpus_bleu, oracle_sentence_bleu};
use batchbleu::{corpus_bleu, sentence_bleu, BleuConfig, TokenBatch, TokenId};

const TOL: f64 = 1e-9;

struct Case {
    cand: Vec<TokenId>,
    refs: Vec<Vec<TokenId>>,
    weights: Vec<f64>,
    smoothing: &'static str,
    expected: f64,
}

impl Case {
    fn config(&self) -> BleuConfig {
        config(&self.weights, self.smoothing)
    }
}

fn config(weights: &[f64], smoothing: &str) -> BleuConfig {
    BleuConfig::default()
        .with_weights(weights)
        .unwrap()
        .with_smoothing(smoothing.parse().unwrap())
        .unwrap()
}

macro_rules! case {
    ($cand:expr, [$($r:expr),+], $w:expr, $s:expr, $e:expr) => {
        Case {
            cand: $cand.to_vec(),
            refs: vec![$($r.to_vec()),+],
            weights: $w.to_vec(),
            smoothing: $s,
            expected: $e,
        }
    };
}

fn cases() -> Vec<Case> {
    vec![
        case!([1, 2, 3, 4, 5, 6], [[1, 2, 3, 4, 5, 6]], [0.25, 0.25, 0.25, 0.25], "none", 1.0),
        case!([1, 1, 1, 1, 1, 1, 1], [[1, 2, 3, 4, 1, 5], [6, 3, 7, 2, 4, 1, 5]], [1.0], "none", 0.2857142857142857),
        case!([1, 2, 3, 4, 9, 6], [[1, 2, 3, 4, 5, 6]], [0.25, 0.25, 0.25, 0.25], "none", 0.537284965911771),
        case!([1, 2, 3, 4, 9, 6], [[1, 2, 3, 4, 5, 6]], [0.25, 0.25, 0.25, 0.25], "floor", 0.537284965911771),
        case!([1, 2, 3, 4, 9, 6], [[1, 2, 3, 4, 5, 6]], [0.25, 0.25, 0.25, 0.25], "add-k", 0.6389431042462724),
        case!([1, 2, 3, 4, 9, 6], [[1, 2, 3, 4, 5, 6]], [0.25, 0.25, 0.25, 0.25], "exp", 0.537284965911771),
        case!([1, 2, 8, 4, 9, 6, 7], [[1, 2, 3, 4, 5, 6, 7, 8]], [0.25, 0.25, 0.25, 0.25], "floor", 0.09477273658329957),
        case!([1, 2, 8, 4, 9, 6, 7], [[1, 2, 3, 4, 5, 6, 7, 8]], [0.25, 0.25, 0.25, 0.25], "add-k", 0.2883677731713749),
        case!([1, 2, 8, 4, 9, 6, 7], [[1, 2, 3, 4, 5, 6, 7, 8]], [0.25, 0.25, 0.25, 0.25], "exp", 0.17820132316770917),
        case!([3, 1, 4, 1, 5, 9, 2, 6], [[3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5]], [0.25, 0.25, 0.25, 0.25], "none", 0.6872892787909722),
        case!([3, 1, 4, 1, 5, 9, 2, 6], [[3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5], [3, 1, 4, 1, 5]], [0.25, 0.25, 0.25, 0.25], "none", 1.0),
        case!([3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7], [[3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5]], [0.25, 0.25, 0.25, 0.25], "none", 0.7577395672414201),
        case!([7, 7, 7, 7], [[7, 7, 8, 8], [8, 7, 7, 7]], [0.25, 0.25, 0.25, 0.25], "floor", 0.3976353643835253),
        case!([7, 7, 7, 7], [[7, 7, 8, 8], [8, 7, 7, 7]], [0.5, 0.5], "none", 0.7071067811865475),
        case!([10, 11, 12, 13, 14], [[10, 11, 12, 13, 14, 15], [11, 12, 13]], [0.25, 0.25, 0.25, 0.25], "exp", 0.8187307530779819),
        case!([10, 11, 12, 13, 14], [[10, 11, 12, 13, 14, 15], [11, 12, 13]], [0.25, 0.25, 0.25, 0.25], "add-k", 0.8187307530779819),
        case!([10, 11, 12, 13, 14], [[10, 11, 12, 13, 14, 15], [11, 12, 13]], [0.4, 0.3, 0.2, 0.1], "floor", 0.8187307530779819),
        case!([5, 4, 3, 2, 1], [[1, 2, 3, 4, 5]], [0.25, 0.25, 0.25, 0.25], "exp", 0.1597357760615681),
        case!([5, 4, 3, 2, 1], [[1, 2, 3, 4, 5]], [0.25, 0.25, 0.25, 0.25], "floor", 0.08034284189446518),
        case!([5, 4, 3, 2, 1], [[1, 2, 3, 4, 5]], [0.25, 0.25, 0.25, 0.25], "add-k", 0.35930411196308426),
        case!([2, 4, 6, 8, 10, 12, 14, 16, 18, 20], [[2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24], [2, 4, 6, 8, 1, 12, 14, 16]], [0.25, 0.25, 0.25, 0.25], "none", 1.0),
        case!([2, 4, 6, 8, 10, 12, 14, 16, 18, 20], [[2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24], [2, 4, 6, 8, 1, 12, 14, 16]], [0.3333333333333333, 0.3333333333333333, 0.3333333333333333], "exp", 1.0),
        case!([1, 2, 1, 2, 1, 2], [[2, 1, 2, 1, 2, 1, 2]], [0.25, 0.25, 0.25, 0.25], "none", 0.846481724890614),
        case!([1, 2, 1, 2, 1, 2], [[2, 1, 2, 1, 2, 1, 2]], [0.7, 0.3], "add-k", 0.846481724890614),
    ]
}

#[test]
fn oracle_matches_external_reference() {
    let cases = cases();
    assert!(cases.len() >= 20);
    for (k, c) in cases.iter().enumerate() {
        let refs: Vec<&[TokenId]> = c.refs.iter().map(Vec::as_slice).collect();
        let got = oracle_sentence_bleu(&c.cand, &refs, &c.config()).unwrap();
        assert!((got - c.expected).abs() < TOL, "case {k}: {got} vs {}", c.expected);
    }
}

#[test]
fn batched_matches_external_reference() {
    for (k, c) in cases().iter().enumerate() {
        let cand = TokenBatch::from_rows(&[c.cand.clone()]);
        let refs: Vec<TokenBatch> = c.refs.iter().map(|r| TokenBatch::from_rows(&[r.clone()])).collect();
        let got = sentence_bleu(&cand, &refs, &c.config()).unwrap().scores[0];
        assert!((got - c.expected).abs() < TOL, "case {k}: {got} vs {}", c.expected);
    }
}

#[test]
fn corpus_matches_external_reference() {
    let expected = [("none", 0.8654989976631519), ("floor", 0.8654989976631519), ("add-k", 0.8750161506768894), ("exp", 0.8654989976631519)];
    let cands: Vec<Vec<TokenId>> = vec![
        vec![1, 2, 3, 4, 9, 6],
        vec![3, 1, 4, 1, 5, 9, 2, 6],
        vec![10, 11, 12, 13, 14],
    ];
    let refs: Vec<Vec<Vec<TokenId>>> = vec![
        vec![vec![1, 2, 3, 4, 5, 6]],
        vec![vec![3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5], vec![3, 1, 4, 1, 5]],
        vec![vec![10, 11, 12, 13, 14, 15], vec![11, 12, 13]],
    ];
    let cand_slices: Vec<&[TokenId]> = cands.iter().map(Vec::as_slice).collect();
    let ref_slices: Vec<Vec<&[TokenId]>> =
        refs.iter().map(|rs| rs.iter().map(Vec::as_slice).collect()).collect();
    for (smoothing, want) in expected {
        let c = config(&[0.25; 4], smoothing);
        let got = oracle_corpus_bleu(&cand_slices, &ref_slices, &c).unwrap();
        assert!((got - want).abs() < TOL, "{smoothing}: {got} vs {want}");
    }

    // The batched API takes reference sets of equal size; duplicate the single
    // reference of the first sentence to fill the second set.
    let cand_batch = TokenBatch::from_rows(&cands);
    let set0 = TokenBatch::from_rows(&[&refs[0][0], &refs[1][0], &refs[2][0]]);
    let set1 = TokenBatch::from_rows(&[&refs[0][0], &refs[1][1], &refs[2][1]]);
    for (smoothing, want) in expected {
        let c = config(&[0.25; 4], smoothing);
        let got = corpus_bleu(&cand_batch, &[set0.clone(), set1.clone()], &c).unwrap().score();
        assert!((got - want).abs() < TOL, "{smoothing}: {got} vs {want}");
    }
}
