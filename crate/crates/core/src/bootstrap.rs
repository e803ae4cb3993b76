//! Breadth-first tag expansion over a local corpus, standing in for a remote
//! tag-search API.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Dataset, Post};

pub const DEFAULT_PER_TAG_LIMIT: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BootstrapError {
    #[error("at least one seed tag is required")]
    NoSeeds,
    #[error("{0} must be positive")]
    ZeroLimit(&'static str),
}

/// Case-fold and trim a tag into its index key.
pub fn tag_key(tag: &str) -> String {
    tag.trim().to_lowercase()
}

/// Tag to posts, newest first.
#[derive(Debug, Clone)]
pub struct TagIndex<'a> {
    dataset: &'a Dataset,
    by_tag: BTreeMap<String, Vec<usize>>,
}

impl<'a> TagIndex<'a> {
    /// Index every (tag, post) pair. Each tag's posts are ordered by descending
    /// timestamp, ties by ascending `post_id`; a post listing the same tag twice
    /// (after case folding) is indexed once.
    pub fn build(dataset: &'a Dataset) -> Self {
        let mut by_tag: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (idx, post) in dataset.posts().iter().enumerate() {
            let keys: HashSet<String> = post
                .tags
                .iter()
                .map(|t| tag_key(t))
                .filter(|k| !k.is_empty())
                .collect();
            for key in keys {
                by_tag.entry(key).or_default().push(idx);
            }
        }
        let posts = dataset.posts();
        for list in by_tag.values_mut() {
            list.sort_by(|&a, &b| {
                posts[b]
                    .timestamp
                    .cmp(&posts[a].timestamp)
                    .then_with(|| posts[a].post_id.cmp(&posts[b].post_id))
            });
        }
        TagIndex { dataset, by_tag }
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn is_empty(&self) -> bool {
        self.by_tag.is_empty()
    }

    pub fn len(&self) -> usize {
        self.by_tag.len()
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.by_tag.contains_key(&tag_key(tag))
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.by_tag.keys().map(String::as_str)
    }

    /// Posts carrying `tag`, newest first.
    pub fn posts_for(&self, tag: &str) -> impl Iterator<Item = &'a Post> + '_ {
        let posts = self.dataset.posts();
        self.by_tag
            .get(&tag_key(tag))
            .into_iter()
            .flatten()
            .map(move |&i| &posts[i])
    }
}

pub fn build_tag_index(dataset: &Dataset) -> TagIndex<'_> {
    TagIndex::build(dataset)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrawlTrace {
    pub seed_tags: Vec<String>,
    /// Tags whose posts were requested, in request order.
    pub visited_tags: Vec<String>,
    pub collected_post_ids: Vec<String>,
    pub rounds: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Expand `seeds` breadth-first until `max_posts` posts are collected or a
/// round yields no new post.
///
/// A round visits every tag in the current frontier in FIFO order. Each tag
/// contributes its `per_tag_limit` newest posts; tags on newly collected posts
/// join the next frontier the first time they are seen. Seeds missing from the
/// index are skipped and reported in [`CrawlTrace::warnings`].
pub fn bootstrap_collect(
    index: &TagIndex<'_>,
    seeds: &[impl AsRef<str>],
    max_posts: usize,
    per_tag_limit: usize,
) -> Result<(Dataset, CrawlTrace), BootstrapError> {
    if seeds.is_empty() {
        return Err(BootstrapError::NoSeeds);
    }
    if max_posts == 0 {
        return Err(BootstrapError::ZeroLimit("max_posts"));
    }
    if per_tag_limit == 0 {
        return Err(BootstrapError::ZeroLimit("per_tag_limit"));
    }

    let mut trace = CrawlTrace {
        seed_tags: seeds.iter().map(|s| s.as_ref().to_owned()).collect(),
        visited_tags: Vec::new(),
        collected_post_ids: Vec::new(),
        rounds: 0,
        converged: false,
        warnings: Vec::new(),
    };
    let mut seen_tags: HashSet<String> = HashSet::new();
    let mut frontier: Vec<String> = Vec::new();
    for seed in seeds {
        let key = tag_key(seed.as_ref());
        if !seen_tags.insert(key.clone()) {
            continue;
        }
        if index.by_tag.contains_key(&key) {
            frontier.push(key);
        } else {
            trace.warnings.push(format!("seed tag {key:?} not found in index"));
        }
    }

    let posts = index.dataset.posts();
    let mut collected: HashMap<&str, usize> = HashMap::new();
    let mut order: Vec<usize> = Vec::new();

    'crawl: while !frontier.is_empty() {
        trace.rounds += 1;
        let mut next = Vec::new();
        let mut added_this_round = 0;
        for tag in std::mem::take(&mut frontier) {
            trace.visited_tags.push(tag.clone());
            for &idx in index.by_tag[&tag].iter().take(per_tag_limit) {
                let post = &posts[idx];
                if collected.contains_key(post.post_id.as_str()) {
                    continue;
                }
                collected.insert(&post.post_id, idx);
                order.push(idx);
                added_this_round += 1;
                for t in &post.tags {
                    let key = tag_key(t);
                    if !key.is_empty() && seen_tags.insert(key.clone()) {
                        next.push(key);
                    }
                }
                if order.len() >= max_posts {
                    break 'crawl;
                }
            }
        }
        if added_this_round == 0 || next.is_empty() {
            trace.converged = true;
            break;
        }
        frontier = next;
    }

    trace.collected_post_ids = order.iter().map(|&i| posts[i].post_id.clone()).collect();
    let subset = index
        .dataset
        .with_posts(order.iter().map(|&i| posts[i].clone()).collect());
    Ok((subset, trace))
}
