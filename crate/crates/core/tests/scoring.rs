use chrono::{TimeZone, Utc};
use proptest::prelude::*;

use extremis_core::extremism::{
    corpus_means, normalize, raw_extremism, weight_length, weight_upvotes, CorpusMeans, MeansScope, ScoreOptions,
    Scorer, SentimentScores, Weighting,
};
use extremis_core::model::{Kind, Submission};
use extremis_core::synth::{generate, SynthConfig};

fn post(id: &str, text: &str, upvotes: i64) -> Submission {
    Submission {
        id: id.into(),
        kind: Kind::Post,
        post_id: id.into(),
        subreddit: "IsraelPalestine".into(),
        title: None,
        text: text.into(),
        upvotes,
        flair: None,
        created_at: Utc.timestamp_opt(1_696_636_800, 0).unwrap(),
        retrieved_at: Utc.timestamp_opt(1_696_680_000, 0).unwrap(),
        n_comments: Some(0),
        extra: Default::default(),
    }
}

#[test]
fn worked_formula_examples() {
    let sc = SentimentScores::new(0.5, -0.4, 0.8);
    assert!((raw_extremism(&sc) - 0.16).abs() < 1e-12);
    let means = CorpusMeans::new(0.25, 0.2, 0.5).unwrap();
    assert!((normalize(0.16, &means) - 6.4).abs() < 1e-12);
    assert!((weight_length(6.4, 10) - 6.4 / 11f64.ln()).abs() < 1e-12);
    assert_eq!(weight_length(6.4, 0), 0.0);
    assert!((weight_upvotes(2.0, 10, 5) - 6.0).abs() < 1e-12);
    assert_eq!(weight_upvotes(2.0, -10, 5), 0.0);
    assert_eq!(weight_upvotes(2.0, 3, 0), 8.0);
}

#[test]
fn degenerate_means_are_rejected() {
    let zeros = vec![SentimentScores::new(0.0, 0.3, 0.5); 3];
    assert!(corpus_means(&zeros).is_err());
    assert!(corpus_means(&[]).is_err());
}

#[test]
fn tombstones_are_excluded_and_zero() {
    let subs = vec![
        post("a", "I hate this evil war so much!", 5),
        post("b", "[deleted]", 50),
        post("c", "What a wonderful, kind and lovely day", 1),
    ];
    let scored = Scorer::bundled().score_corpus(&subs, ScoreOptions::default()).unwrap();
    let b = &scored.items[1];
    assert!(b.excluded);
    assert_eq!((b.chi, b.chi_norm, b.chi_l, b.chi_lu), (0.0, 0.0, 0.0, 0.0));
    assert!(scored.items[0].chi_norm > 0.0);
}

#[test]
fn length_only_weighting_stops_at_chi_l() {
    let subs = vec![post("a", "terrible awful hate", 100), post("b", "nice good calm", 3)];
    let opts = ScoreOptions {
        scope: MeansScope::Corpus,
        weighting: Weighting::LengthOnly,
    };
    for item in Scorer::bundled().score_corpus(&subs, opts).unwrap().items {
        assert_eq!(item.chi_lu, item.chi_l);
    }
}

#[test]
fn subreddit_scope_uses_per_subreddit_means() {
    let mut subs = generate(&SynthConfig { seed: 4, posts: 12, ..SynthConfig::default() });
    subs.retain(|s| s.kind == Kind::Post);
    let opts = ScoreOptions { scope: MeansScope::Subreddit, weighting: Weighting::Full };
    let scored = Scorer::bundled().score_corpus(&subs, opts).unwrap();
    for item in scored.items.iter().filter(|i| !i.excluded) {
        let m = scored.means.for_subreddit(&item.submission.subreddit).unwrap();
        assert!((item.chi_norm - item.chi / m.product()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scores_stay_in_range(seed in any::<u64>()) {
        let subs = generate(&SynthConfig { seed, posts: 5, comments_per_post: 3, ..SynthConfig::default() });
        let scored = Scorer::bundled().score_corpus(&subs, ScoreOptions::default()).unwrap();
        for i in &scored.items {
            prop_assert!((0.0..=1.0).contains(&i.scores.a));
            prop_assert!((-1.0..=1.0).contains(&i.scores.p));
            prop_assert!((0.0..=1.0).contains(&i.scores.s));
            prop_assert!(i.chi >= 0.0 && i.chi_norm >= 0.0 && i.chi_l >= 0.0 && i.chi_lu >= 0.0);
        }
    }

    #[test]
    fn permutation_does_not_change_scores(seed in any::<u64>(), rot in 0usize..40) {
        let subs = generate(&SynthConfig { seed, posts: 6, comments_per_post: 5, ..SynthConfig::default() });
        let mut shuffled = subs.clone();
        shuffled.rotate_left(rot % subs.len());
        shuffled.reverse();
        let scorer = Scorer::bundled();
        let a = scorer.score_corpus(&subs, ScoreOptions::default()).unwrap();
        let b = scorer.score_corpus(&shuffled, ScoreOptions::default()).unwrap();
        prop_assert_eq!(&a.means, &b.means);
        for x in &a.items {
            let y = b.items.iter().find(|y| y.submission.id == x.submission.id).unwrap();
            prop_assert_eq!(x.chi_lu.to_bits(), y.chi_lu.to_bits());
        }
    }

    #[test]
    fn weights_are_monotone(chi in 0.0f64..100.0, l in 1usize..1000, u in -500i64..5000, n in 0u64..300) {
        prop_assert!(weight_length(chi, l + 1) <= weight_length(chi, l));
        prop_assert!(weight_upvotes(chi, u + 1, n) >= weight_upvotes(chi, u, n));
    }
}
