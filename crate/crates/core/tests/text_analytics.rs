use proptest::prelude::*;

use extremis_core::analytics::{correlation_matrix, uniform_edges, histogram, Selector};
use extremis_core::extremism::{ScoreOptions, Scorer};
use extremis_core::synth::{generate, SynthConfig};
use extremis_core::text::is_punctuation;
use extremis_core::textstats::{build_corpus, clean_tokens, jaccard, jaccard_matrix, FreqTable, Stopwords};

proptest! {
    #[test]
    fn clean_tokens_has_no_punctuation_or_stopwords(text in "\\PC{0,80}") {
        let stop = Stopwords::bundled();
        for t in clean_tokens(&text, &stop) {
            prop_assert!(!t.is_empty());
            prop_assert!(!t.chars().any(is_punctuation));
            prop_assert!(!t.chars().any(char::is_whitespace));
            prop_assert!(!stop.contains(&t));
        }
    }

    #[test]
    fn jaccard_is_symmetric_and_bounded(
        a in prop::collection::vec("[a-e]{1,2}", 0..20),
        b in prop::collection::vec("[a-e]{1,2}", 0..20),
    ) {
        let ta: FreqTable = a.iter().collect();
        let tb: FreqTable = b.iter().collect();
        let j = jaccard(&ta, &tb);
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(j, jaccard(&tb, &ta));
        if !ta.is_empty() {
            prop_assert_eq!(jaccard(&ta, &ta), 1.0);
        }
    }

    #[test]
    fn histogram_accounts_for_every_value(values in prop::collection::vec(-10.0f64..10.0, 0..60), bins in 1usize..10) {
        let edges = uniform_edges(-5.0, 5.0, bins);
        let h = histogram(&values, &edges).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<u64>() + h.overflow, values.len() as u64);
    }
}

#[test]
fn corpus_tables_from_synthetic_scores() {
    let subs = generate(&SynthConfig { seed: 8, posts: 30, ..SynthConfig::default() });
    let scored = Scorer::bundled().score_corpus(&subs, ScoreOptions::default()).unwrap();
    let stop = Stopwords::bundled();
    let tables: Vec<(String, FreqTable)> = [Selector::Chi, Selector::ChiNorm, Selector::ChiL, Selector::ChiLu]
        .iter()
        .map(|s| (s.to_string(), build_corpus(&scored.items, *s, 20, &stop)))
        .collect();
    for (_, t) in &tables {
        assert!(t.total() > 0);
        assert_eq!(t.iter().map(|(_, c)| c).sum::<u64>(), t.total());
    }
    let m = jaccard_matrix(&tables).unwrap();
    assert!(m.is_symmetric());
    assert_eq!(m.get(0, 1), Some(1.0), "chi and chi_norm rank identically");

    let c = correlation_matrix(&scored.items, &[Selector::Chi, Selector::ChiNorm, Selector::ChiLu]).unwrap();
    assert!((c.get(0, 1).unwrap() - 1.0).abs() < 1e-12);
}
