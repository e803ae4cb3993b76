use std::collections::HashMap;

use super::{normalize_text, Dataset, Post};

fn content_key(post: &Post) -> String {
    normalize_text(&post.description).to_lowercase()
}

/// Keep one post per normalized, case-folded description.
///
/// Within a collision group the post with the earliest timestamp survives; a
/// timestamp tie goes to the lexicographically smallest `post_id`. Survivors
/// keep their input order. Returns the reduced dataset and the number of posts
/// removed.
pub fn deduplicate(dataset: &Dataset) -> (Dataset, usize) {
    let mut winner: HashMap<String, usize> = HashMap::new();
    for (idx, post) in dataset.posts().iter().enumerate() {
        winner
            .entry(content_key(post))
            .and_modify(|best| {
                let current = &dataset.posts()[*best];
                if (post.timestamp, &post.post_id) < (current.timestamp, &current.post_id) {
                    *best = idx;
                }
            })
            .or_insert(idx);
    }
    let mut keep = vec![false; dataset.len()];
    for idx in winner.into_values() {
        keep[idx] = true;
    }
    let posts: Vec<Post> = dataset
        .posts()
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(p, _)| p.clone())
        .collect();
    let removed = dataset.len() - posts.len();
    (dataset.with_posts(posts), removed)
}
