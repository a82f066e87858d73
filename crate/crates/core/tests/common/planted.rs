//! Corpus generator with ground truth recorded while writing the comments.
//!
//! Every comment holds one code element with exactly two partner slots on
//! each side. Slots carry planted words or, when a comment has fewer than
//! four planted words, an article (an excluded pair). Filler words, URLs
//! and paths sit three or more tokens away from the code, so they never
//! pair. Counts for the ranked words follow a fixed schedule with ties in
//! consecutive ranks, and every block of 50 ranks holds exactly 11 cues.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use revcue::{Comment, CueLexicon};

pub const RANKED: usize = 200;
pub const BLOCK: usize = 50;
pub const CUES_PER_BLOCK: usize = 11;
pub const MIN_FREQUENCY: u64 = 10;
/// Words planted below the frequency filter, per project.
pub const BELOW_FILTER: usize = 9;

pub const FILLER: [&str; 8] = [
    "lorem", "ipsum", "dolor", "amet", "tempor", "elit", "magna", "aliqua",
];

const SYLLABLES: [&str; 20] = [
    "ba", "ke", "di", "mo", "tu", "ra", "se", "li", "no", "fu", "ga", "pe", "vi", "zo", "ku",
    "ha", "te", "ri", "lo", "mu",
];

#[derive(Debug, Clone)]
pub struct PlantedProject {
    pub name: String,
    pub comments: usize,
    /// Every planted partner word and its pair count.
    pub counts: BTreeMap<String, u64>,
    /// Article slots, all of which pair with code and are excluded.
    pub excluded: u64,
    /// Expected ranking at [`MIN_FREQUENCY`].
    pub ranking: Vec<(String, u64)>,
    /// Cue words planted in this project.
    pub cues: BTreeSet<String>,
}

impl PlantedProject {
    pub fn total_pairs(&self) -> u64 {
        self.counts.values().sum::<u64>() + self.excluded
    }

    pub fn expected_hits(&self, k: usize) -> Vec<String> {
        let mut hits: Vec<String> = self
            .ranking
            .iter()
            .take(k)
            .filter(|(w, _)| self.cues.contains(w))
            .map(|(w, _)| w.clone())
            .collect();
        hits.sort();
        hits
    }

    pub fn expected_rate(&self, k: usize) -> f64 {
        self.expected_hits(k).len() as f64 / k as f64
    }

    pub fn expected_rank(&self, word: &str) -> Option<(usize, usize)> {
        self.ranking
            .iter()
            .position(|(w, _)| w == word)
            .map(|i| (i + 1, self.ranking.len()))
    }
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub comments: Vec<Comment>,
    pub projects: Vec<PlantedProject>,
}

impl PlantedCorpus {
    pub fn project(&self, name: &str) -> &PlantedProject {
        self.projects.iter().find(|p| p.name == name).unwrap()
    }

    /// Cue words in the top `k` of every project.
    pub fn expected_intersection(&self, k: usize) -> BTreeSet<String> {
        let mut sets = self
            .projects
            .iter()
            .map(|p| p.expected_hits(k).into_iter().collect::<BTreeSet<_>>());
        let first = sets.next().unwrap_or_default();
        sets.fold(first, |acc, s| acc.intersection(&s).cloned().collect())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str(&serde_json::to_string(c).unwrap());
            out.push('\n');
        }
        out
    }
}

/// Count planted at a 1-based rank: pairs of equal counts, 109 down to 10.
pub fn scheduled_count(rank: usize) -> u64 {
    MIN_FREQUENCY + ((RANKED - rank) / 2) as u64
}

fn pseudo_words(rng: &mut ChaCha8Rng, n: usize, avoid: &BTreeSet<String>) -> Vec<String> {
    let lexicon = CueLexicon::default_lexicon();
    let mut out = BTreeSet::new();
    while out.len() < n {
        let w: String = (0..3).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
        if lexicon.lookup(&w).is_none() && !avoid.contains(&w) {
            out.insert(w);
        }
    }
    let mut out: Vec<String> = out.into_iter().collect();
    out.shuffle(rng);
    out
}

fn code_element(rng: &mut ChaCha8Rng) -> String {
    let a = *SYLLABLES.choose(rng).unwrap();
    let b = *SYLLABLES.choose(rng).unwrap();
    let c = *SYLLABLES.choose(rng).unwrap();
    match rng.gen_range(0..8) {
        0 => format!("{a}{b}_{c}"),
        1 => format!("get{}{}{}", cap(a), cap(b), cap(c)),
        2 => format!("{a}{b}()"),
        3 => format!("self.{a}.{b}{c}"),
        4 => format!("`{a}{b} + 1`"),
        5 => "None".to_string(),
        6 => format!("{a}::{b}{c}"),
        _ => format!("{}.{b}({c})", cap(a)),
    }
}

fn cap(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

fn noise(rng: &mut ChaCha8Rng, out: &mut Vec<String>) {
    for _ in 0..rng.gen_range(0..=3) {
        let piece = match rng.gen_range(0..10) {
            0 => "https://review.example.org/c/12345".to_string(),
            1 => "src/main/util.c".to_string(),
            _ => FILLER.choose(rng).unwrap().to_string(),
        };
        out.push(piece);
    }
}

fn slot_word(rng: &mut ChaCha8Rng, word: &str) -> String {
    let mut w = if rng.gen_bool(0.15) {
        cap(word)
    } else {
        word.to_string()
    };
    if rng.gen_bool(0.1) {
        w.push(',');
    }
    w
}

struct Layout {
    ranking: Vec<(String, u64)>,
    cues: BTreeSet<String>,
    counts: BTreeMap<String, u64>,
}

fn layout(rng: &mut ChaCha8Rng, lexicon: &CueLexicon) -> Layout {
    let mut cue_pool: Vec<String> = lexicon.single_word_set().into_iter().collect();
    cue_pool.shuffle(rng);
    let ranked_cues = RANKED / BLOCK * CUES_PER_BLOCK;
    let below_cues = 3;
    let cues: Vec<String> = cue_pool[..ranked_cues + below_cues].to_vec();

    let avoid: BTreeSet<String> = FILLER.iter().map(|s| s.to_string()).collect();
    let plain = pseudo_words(rng, RANKED - ranked_cues + BELOW_FILTER - below_cues, &avoid);

    let mut is_cue = vec![false; RANKED];
    for block in 0..RANKED / BLOCK {
        let mut offsets: Vec<usize> = (0..BLOCK).collect();
        offsets.shuffle(rng);
        for &o in &offsets[..CUES_PER_BLOCK] {
            is_cue[block * BLOCK + o] = true;
        }
    }
    let mut cue_iter = cues[..ranked_cues].iter();
    let mut plain_iter = plain.iter();
    let mut words: Vec<String> = is_cue
        .iter()
        .map(|&c| {
            if c {
                cue_iter.next().unwrap().clone()
            } else {
                plain_iter.next().unwrap().clone()
            }
        })
        .collect();
    // Ranks 2i+1 and 2i+2 share a count; order each tied pair by word.
    for pair in words.chunks_mut(2) {
        if pair.len() == 2 && pair[0] > pair[1] {
            pair.swap(0, 1);
        }
    }
    let ranking: Vec<(String, u64)> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), scheduled_count(i + 1)))
        .collect();

    let mut counts: BTreeMap<String, u64> = ranking.iter().cloned().collect();
    let below: Vec<&String> = cues[ranked_cues..].iter().chain(plain_iter).collect();
    assert_eq!(below.len(), BELOW_FILTER);
    for (i, w) in below.into_iter().enumerate() {
        counts.insert(w.clone(), (i as u64 % (MIN_FREQUENCY - 1)) + 1);
    }
    Layout {
        ranking,
        cues: cues.into_iter().collect(),
        counts,
    }
}

fn project_comments(
    rng: &mut ChaCha8Rng,
    name: &str,
    counts: &BTreeMap<String, u64>,
) -> (Vec<Comment>, u64) {
    let mut occurrences: Vec<&str> = counts
        .iter()
        .flat_map(|(w, &n)| std::iter::repeat(w.as_str()).take(n as usize))
        .collect();
    occurrences.shuffle(rng);

    let mut comments = Vec::new();
    let mut excluded = 0;
    let mut rest = &occurrences[..];
    while !rest.is_empty() {
        let take = rng.gen_range(1..=4).min(rest.len());
        let (group, tail) = rest.split_at(take);
        rest = tail;

        let mut slots: Vec<String> = group.iter().map(|w| slot_word(rng, w)).collect();
        while slots.len() < 4 {
            let article = if rng.gen_bool(0.5) { "a" } else { "An" };
            let at = rng.gen_range(0..=slots.len());
            slots.insert(at, article.to_string());
            excluded += 1;
        }

        let mut parts = Vec::new();
        noise(rng, &mut parts);
        parts.extend(slots[..2].iter().cloned());
        parts.push(code_element(rng));
        parts.extend(slots[2..].iter().cloned());
        noise(rng, &mut parts);
        let mut message = parts.join(" ");
        message.push('.');
        if rng.gen_bool(0.2) {
            message.push_str("\n\nSigned-off-by: Dev Person <dev@example.org>");
        }
        if rng.gen_bool(0.1) {
            message.insert_str(0, "Patch Set 3: Code-Review+1\n\n");
        }
        comments.push(Comment::new(
            format!("{name}-{:05}", comments.len()),
            name,
            message,
        ));
    }
    (comments, excluded)
}

/// Builds the planted corpus for the given projects; comments of all
/// projects are interleaved in a seeded random order.
pub fn planted_corpus(seed: u64, names: &[&str]) -> PlantedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lexicon = CueLexicon::default_lexicon();
    let mut comments = Vec::new();
    let mut projects = Vec::new();
    for name in names {
        let Layout {
            ranking,
            cues,
            counts,
        } = layout(&mut rng, &lexicon);
        let (mut project_comments, excluded) = project_comments(&mut rng, name, &counts);
        projects.push(PlantedProject {
            name: name.to_string(),
            comments: project_comments.len(),
            counts,
            excluded,
            ranking,
            cues,
        });
        comments.append(&mut project_comments);
    }
    comments.shuffle(&mut rng);
    PlantedCorpus { comments, projects }
}
