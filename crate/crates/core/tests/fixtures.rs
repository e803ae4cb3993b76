use std::collections::{BTreeMap, HashSet, VecDeque};
use std::io::BufReader;

use intent_cascade::bootstrap::{bootstrap_collect, build_tag_index};
use intent_cascade::classify::{train, Algorithm, IntentClass, TopicClass, TrainConfig};
use intent_cascade::corpus::{compute_stats, filter_english, ingest, Dataset, Format};
use intent_cascade::eval::{harvested_whitelist, stage_one};
use intent_cascade::features::{extract_dataset, read_features_jsonl, write_features_jsonl, Lexicons};
use intent_cascade::fixture::{generate_cascade, generate_corpus, CascadeSpec, CorpusManifest, CorpusSpec, Role, SEED_TAGS};

#[test]
fn full_corpus_language_and_length_profile() {
    let f = generate_corpus(&CorpusSpec::full()).unwrap();
    let (english, stats) = filter_english(&f.dataset);
    assert_eq!(stats.total_posts, 2955);
    assert_eq!(stats.english_posts, 2456);
    assert_eq!(stats.url_only_posts, 35);
    assert_eq!(stats.unknown_language_posts, 40);
    let retained = english.len() as f64 / f.dataset.len() as f64;
    assert!((retained - 0.83).abs() < 0.005, "{retained}");
    let en_stats = compute_stats(&english);
    let mid = en_stats.description_lengths.fraction(5);
    assert!((mid - 0.21).abs() < 0.005, "{mid}");
    assert_eq!(en_stats.description_lengths.counts[6], 25);
}

#[test]
fn bundled_small_fixture_matches_its_manifest() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
    let file = std::fs::File::open(format!("{dir}/mixed_100.jsonl")).unwrap();
    let ingested = ingest(BufReader::new(file), Format::Jsonl).unwrap();
    assert!(ingested.rejects.is_empty());
    let manifest: CorpusManifest =
        serde_json::from_str(&std::fs::read_to_string(format!("{dir}/mixed_100.manifest.json")).unwrap()).unwrap();
    let stats = compute_stats(&ingested.dataset);
    assert_eq!(stats.total_posts as usize, manifest.total_posts);
    assert_eq!(stats.english_posts as usize, manifest.english);
    assert_eq!(stats.non_english_posts as usize, manifest.non_english);
    assert_eq!(stats.unknown_language_posts as usize, manifest.unknown);
    assert_eq!(stats.url_only_posts as usize, manifest.url_only);
    let regenerated = generate_corpus(&manifest.spec).unwrap();
    assert_eq!(regenerated.dataset.posts(), ingested.dataset.posts());
}

/// Level-order crawl written independently of the library: a queue of tags,
/// each tag contributing up to `per_tag` of its newest posts.
fn bfs_oracle(ds: &Dataset, seeds: &[&str], max_posts: usize, per_tag: usize) -> Vec<String> {
    let mut by_tag: BTreeMap<String, Vec<&intent_cascade::corpus::Post>> = BTreeMap::new();
    for p in ds.posts() {
        let keys: HashSet<String> = p.tags.iter().map(|t| t.trim().to_lowercase()).collect();
        for k in keys {
            by_tag.entry(k).or_default().push(p);
        }
    }
    for list in by_tag.values_mut() {
        list.sort_by(|a, b| b.timestamp.cmp(&a.timestamp).then(a.post_id.cmp(&b.post_id)));
    }
    let mut queue: VecDeque<String> = VecDeque::new();
    let mut seen_tags = HashSet::new();
    for s in seeds {
        if seen_tags.insert(s.to_string()) && by_tag.contains_key(*s) {
            queue.push_back(s.to_string());
        }
    }
    let mut out: Vec<String> = Vec::new();
    let mut have = HashSet::new();
    while let Some(tag) = queue.pop_front() {
        for p in by_tag[&tag].iter().take(per_tag) {
            if !have.insert(p.post_id.clone()) {
                continue;
            }
            out.push(p.post_id.clone());
            if out.len() == max_posts {
                return out;
            }
            for t in &p.tags {
                let k = t.trim().to_lowercase();
                if seen_tags.insert(k.clone()) {
                    queue.push_back(k);
                }
            }
        }
    }
    out
}

#[test]
fn bootstrap_matches_breadth_first_oracle() {
    let f = generate_cascade(&CascadeSpec::default()).unwrap();
    let index = build_tag_index(&f.dataset);
    for (max, per_tag) in [(400, 20), (50, 5), (5000, 20)] {
        let (sub, trace) = bootstrap_collect(&index, &SEED_TAGS, max, per_tag).unwrap();
        let oracle = bfs_oracle(&f.dataset, &SEED_TAGS, max, per_tag);
        assert_eq!(trace.collected_post_ids, oracle, "max={max} per_tag={per_tag}");
        assert_eq!(sub.len(), oracle.len());
    }
}

#[test]
fn stage_one_follows_planted_roles() {
    let f = generate_cascade(&CascadeSpec::default()).unwrap();
    let feats = extract_dataset(&f.dataset, &Lexicons::bundled());
    let truth = f.manifest.truth();
    let stage = stage_one(&feats, &harvested_whitelist(&feats, &truth, 50, 0), 3);
    for p in &f.manifest.posts {
        let topic = stage[&p.post_id] == TopicClass::Topic;
        assert_eq!(topic, p.role.expected_stage_one(), "{} {:?}", p.post_id, p.role);
    }
    assert!(f.manifest.count(Role::TopicFallback) > 0);
}

#[test]
fn intent_labels_follow_planted_signal() {
    let f = generate_cascade(&CascadeSpec::default()).unwrap();
    let feats = extract_dataset(&f.dataset, &Lexicons::bundled());
    let positives: Vec<_> = f.manifest.posts.iter().zip(&feats).filter(|(p, _)| p.intent).map(|(_, x)| x.vector.clone()).collect();
    let model = train(Algorithm::Nb, &positives, &TrainConfig::default()).unwrap();
    let (mut agree, mut total) = (0, 0);
    for (p, x) in f.manifest.posts.iter().zip(&feats) {
        let Some(planted) = p.intent_tone.filter(|_| p.topic) else { continue };
        let got = model.classify(&x.vector).unwrap() == IntentClass::Intent;
        total += 1;
        agree += usize::from(got == planted);
    }
    let rate = agree as f64 / total as f64;
    assert!(rate >= 0.9, "{agree}/{total}");
}

#[test]
fn features_round_trip_through_jsonl() {
    let spec = CascadeSpec { off_topic: 20, topic_detected: 20, ..CascadeSpec::default() };
    let f = generate_cascade(&spec).unwrap();
    let feats = extract_dataset(&f.dataset, &Lexicons::bundled());
    let mut buf = Vec::new();
    write_features_jsonl(&mut buf, &feats).unwrap();
    let back = read_features_jsonl(buf.as_slice()).unwrap();
    assert_eq!(back, feats);
}
