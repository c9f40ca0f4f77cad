//! Regenerates the bundled demo corpus and similarity judgements under
//! `data/`. The corpus is synthetic: sentences mix high-frequency function
//! words with words drawn from one of thirty themed groups, so related
//! words share contexts and the trained embeddings have visible structure.
//! Everything is seeded, so reruns reproduce the committed files byte for
//! byte.
//!
//! Usage: `cargo run -p rosgns --example make_demo_data [out_dir]`

use std::fs;
use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 2024_0613;

const FUNCTION_WORDS: &[&str] = &[
    "the", "of", "and", "a", "in", "to", "is", "was", "it", "for", "as", "with", "on", "by",
    "at", "from", "that", "this", "are", "be", "or", "an", "not", "which", "but", "its", "into",
    "over", "after", "under", "between", "while", "where", "when", "also", "often", "near",
    "many", "most", "each",
];

const TOPICS: &[&[&str]] = &[
    &["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve"],
    &["red", "blue", "green", "yellow", "purple", "orange", "brown", "black", "white", "grey", "pink", "crimson"],
    &["dog", "cat", "horse", "cow", "sheep", "goat", "pig", "wolf", "fox", "bear", "deer", "rabbit"],
    &["mother", "father", "sister", "brother", "daughter", "son", "uncle", "aunt", "cousin", "family", "child", "parent"],
    &["hand", "foot", "head", "eye", "ear", "mouth", "arm", "leg", "heart", "bone", "skin", "blood"],
    &["river", "lake", "stream", "pond", "spring", "well", "rain", "flood", "water", "shore", "bank", "current"],
    &["storm", "wind", "cloud", "thunder", "lightning", "snow", "frost", "fog", "heat", "cold", "weather", "season"],
    &["bread", "meat", "cheese", "milk", "honey", "salt", "wine", "fruit", "grain", "soup", "butter", "meal"],
    &["hammer", "saw", "nail", "axe", "knife", "rope", "wheel", "plough", "spade", "chisel", "anvil", "forge"],
    &["song", "dance", "drum", "flute", "harp", "melody", "rhythm", "choir", "tune", "singer", "music", "verse"],
    &["war", "battle", "army", "soldier", "sword", "shield", "spear", "castle", "siege", "victory", "enemy", "peace"],
    &["market", "trade", "merchant", "gold", "silver", "coin", "price", "goods", "ship", "cargo", "harbor", "wealth"],
    &["star", "moon", "sun", "planet", "comet", "orbit", "sky", "dawn", "dusk", "eclipse", "horizon", "light"],
    &["sea", "wave", "tide", "sail", "mast", "anchor", "island", "coast", "voyage", "sailor", "fleet", "harbor"],
    &["mountain", "hill", "valley", "cliff", "peak", "slope", "cave", "ridge", "summit", "pass", "glacier", "stone"],
    &["king", "queen", "prince", "princess", "throne", "crown", "realm", "court", "herald", "banner", "decree", "reign"],
];

fn main() {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"));
    fs::create_dir_all(&out_dir).expect("create output directory");

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    // Rare filler words that stay below any sensible min-count threshold.
    let rare: Vec<String> = (0..1500).map(|i| format!("obscurum{i}")).collect();

    let topic_weights: Vec<f64> = (0..TOPICS.len()).map(|t| 1.0 / (t as f64 + 3.0)).collect();
    let zipf = |rng: &mut ChaCha8Rng, len: usize| -> usize {
        let weights: Vec<f64> = (0..len).map(|r| 1.0 / (r as f64 + 1.5)).collect();
        let total: f64 = weights.iter().sum();
        let mut pick = rng.gen_range(0.0..total);
        for (i, w) in weights.iter().enumerate() {
            if pick < *w {
                return i;
            }
            pick -= w;
        }
        len - 1
    };

    let mut corpus = String::new();
    let mut token_count = 0usize;
    while token_count < 150_000 {
        // Pick a topic (skewed), occasionally blending the next topic in so
        // that neighboring groups are related but distinct.
        let total: f64 = topic_weights.iter().sum();
        let mut pick = rng.gen_range(0.0..total);
        let mut topic = TOPICS.len() - 1;
        for (t, w) in topic_weights.iter().enumerate() {
            if pick < *w {
                topic = t;
                break;
            }
            pick -= w;
        }
        let blend = rng.gen_bool(0.25);
        let sentence_len = rng.gen_range(7..=18);
        let mut sentence: Vec<String> = Vec::with_capacity(sentence_len);
        for _ in 0..sentence_len {
            let roll: f64 = rng.gen();
            let word = if roll < 0.36 {
                FUNCTION_WORDS[zipf(&mut rng, FUNCTION_WORDS.len())].to_string()
            } else if roll < 0.96 {
                let t = if blend && rng.gen_bool(0.3) {
                    (topic + 1) % TOPICS.len()
                } else {
                    topic
                };
                TOPICS[t][zipf(&mut rng, TOPICS[t].len())].to_string()
            } else {
                rare[rng.gen_range(0..rare.len())].clone()
            };
            sentence.push(word);
        }
        token_count += sentence.len();
        let mut line = sentence.join(" ");
        if let Some(first) = line.get_mut(0..1) {
            first.make_ascii_uppercase();
        }
        if rng.gen_bool(0.3) {
            let mid = sentence.len() / 2;
            let prefix: usize = sentence[..mid].iter().map(|w| w.len() + 1).sum();
            line.insert(prefix.saturating_sub(1), ',');
        }
        line.push('.');
        line.push('\n');
        corpus.push_str(&line);
    }
    fs::write(out_dir.join("toy_corpus.txt"), &corpus).expect("write corpus");

    // Similarity judgements: same-group pairs score high, adjacent-group
    // pairs medium, everything else low. Only the six most frequent words
    // per group are used so the pairs survive min-count filtering.
    let mut pairs: Vec<(String, String, f64)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let push_pair = |pairs: &mut Vec<(String, String, f64)>,
                         seen: &mut std::collections::HashSet<(String, String)>,
                         a: &str,
                         b: &str,
                         score: f64| {
        if a == b {
            return;
        }
        let key = if a < b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        if seen.insert(key) {
            pairs.push((a.to_string(), b.to_string(), (score * 100.0).round() / 100.0));
        }
    };
    for _ in 0..130 {
        let t = rng.gen_range(0..TOPICS.len());
        let a = TOPICS[t][rng.gen_range(0..6)];
        let b = TOPICS[t][rng.gen_range(0..6)];
        let score = rng.gen_range(7.0..10.0);
        push_pair(&mut pairs, &mut seen, a, b, score);
    }
    for _ in 0..60 {
        let t = rng.gen_range(0..TOPICS.len());
        let u = (t + 1) % TOPICS.len();
        let a = TOPICS[t][rng.gen_range(0..6)];
        let b = TOPICS[u][rng.gen_range(0..6)];
        let score = rng.gen_range(3.5..6.5);
        push_pair(&mut pairs, &mut seen, a, b, score);
    }
    for _ in 0..60 {
        let t = rng.gen_range(0..TOPICS.len());
        let u = (t + 2 + rng.gen_range(0..TOPICS.len() - 3)) % TOPICS.len();
        let a = TOPICS[t][rng.gen_range(0..6)];
        let b = TOPICS[u][rng.gen_range(0..6)];
        let score = rng.gen_range(0.0..3.0);
        push_pair(&mut pairs, &mut seen, a, b, score);
    }
    // A few out-of-vocabulary rows to exercise the skip-and-account path.
    for i in 0..5 {
        push_pair(
            &mut pairs,
            &mut seen,
            &format!("obscurum{}", i * 7),
            TOPICS[i][0],
            1.0,
        );
    }

    let mut tsv = String::from("word1\tword2\tscore\n");
    for (a, b, s) in &pairs {
        tsv.push_str(&format!("{a}\t{b}\t{s}\n"));
    }
    fs::write(out_dir.join("toy_similarity.tsv"), &tsv).expect("write similarity file");

    println!(
        "wrote {} tokens to toy_corpus.txt and {} pairs to toy_similarity.tsv in {}",
        token_count,
        pairs.len(),
        out_dir.display()
    );
}
