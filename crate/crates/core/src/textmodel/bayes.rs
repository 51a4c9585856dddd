//! Character n-gram TF-IDF features with a multinomial naive Bayes model.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Task, TextModelError};
use crate::util::{write_atomic, write_json_atomic};

pub const BUNDLE_VERSION: u32 = 1;
pub const WEIGHTS_MAGIC: &[u8; 4] = b"VTNB";
pub const CLASSIFIER_FILE: &str = "classifier.json";
pub const WEIGHTS_FILE: &str = "weights.bin";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BayesConfig {
    pub min_n: usize,
    pub max_n: usize,
    /// Keep at most this many n-grams, most frequent by document count.
    pub max_features: usize,
    /// Additive smoothing.
    pub alpha: f64,
}

impl Default for BayesConfig {
    fn default() -> Self {
        Self { min_n: 1, max_n: 3, max_features: 50_000, alpha: 0.1 }
    }
}

/// Lowercased text with whitespace runs collapsed to one space.
pub fn normalize(text: &str) -> String {
    text.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

pub fn char_ngrams(text: &str, min_n: usize, max_n: usize) -> Vec<String> {
    let chars: Vec<char> = normalize(text).chars().collect();
    let mut out = Vec::new();
    for n in min_n.max(1)..=max_n {
        if chars.len() < n {
            break;
        }
        out.extend(chars.windows(n).map(|w| w.iter().collect::<String>()));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BundleHeader {
    version: u32,
    task: Task,
    labels: Vec<String>,
    config: BayesConfig,
    n_train: usize,
    vocabulary: Vec<String>,
}

/// Trained classifier. Prediction is deterministic; empty feature vectors
/// fall back to the prior and ties go to the lowest label index.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayes {
    task: Task,
    config: BayesConfig,
    n_train: usize,
    vocabulary: Vec<String>,
    index: HashMap<String, usize>,
    idf: Vec<f64>,
    log_prior: Vec<f64>,
    /// labels × features.
    log_likelihood: Vec<f64>,
}

impl NaiveBayes {
    pub fn train(task: Task, examples: &[(&str, &str)], config: BayesConfig) -> Result<Self, TextModelError> {
        if examples.is_empty() {
            return Err(TextModelError::Empty("no training examples"));
        }
        if config.min_n == 0 || config.min_n > config.max_n || !(config.alpha > 0.0) {
            return Err(TextModelError::InvalidConfig("need 1 <= min_n <= max_n and alpha > 0".into()));
        }
        let k = task.labels().len();
        let mut targets = Vec::with_capacity(examples.len());
        let mut grams = Vec::with_capacity(examples.len());
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for (text, label) in examples {
            targets.push(task.index_of(label).ok_or_else(|| TextModelError::UnknownLabel(label.to_string()))?);
            let g = char_ngrams(text, config.min_n, config.max_n);
            let mut uniq: Vec<&String> = g.iter().collect();
            uniq.sort();
            uniq.dedup();
            for u in uniq {
                *df.entry(u.clone()).or_default() += 1;
            }
            grams.push(g);
        }
        let mut present = targets.clone();
        present.sort_unstable();
        present.dedup();
        if present.len() < 2 {
            return Err(TextModelError::SingleClass);
        }
        let mut ranked: Vec<(String, usize)> = df.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(config.max_features);
        ranked.sort_by(|a, b| a.0.cmp(&b.0));
        let n_docs = examples.len() as f64;
        let idf: Vec<f64> = ranked.iter().map(|(_, d)| ((1.0 + n_docs) / (1.0 + *d as f64)).ln() + 1.0).collect();
        let vocabulary: Vec<String> = ranked.into_iter().map(|(g, _)| g).collect();
        let index: HashMap<String, usize> = vocabulary.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();

        let v = vocabulary.len();
        let mut mass = vec![0.0; k * v];
        let mut class_docs = vec![0usize; k];
        for (g, &y) in grams.iter().zip(&targets) {
            class_docs[y] += 1;
            for (f, x) in tfidf(g, &index, &idf) {
                mass[y * v + f] += x;
            }
        }
        let log_prior = class_docs
            .iter()
            .map(|&c| ((c as f64 + config.alpha) / (n_docs + config.alpha * k as f64)).ln())
            .collect();
        let mut log_likelihood = vec![0.0; k * v];
        for c in 0..k {
            let row = &mass[c * v..(c + 1) * v];
            let total: f64 = row.iter().sum::<f64>() + config.alpha * v as f64;
            for f in 0..v {
                log_likelihood[c * v + f] = ((row[f] + config.alpha) / total).ln();
            }
        }
        Ok(Self {
            task,
            n_train: examples.len(),
            vocabulary,
            index,
            idf,
            log_prior,
            log_likelihood,
            config,
        })
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn n_features(&self) -> usize {
        self.vocabulary.len()
    }

    /// Unnormalized log posterior per label.
    pub fn scores(&self, text: &str) -> Vec<f64> {
        let v = self.vocabulary.len();
        let features = tfidf(&char_ngrams(text, self.config.min_n, self.config.max_n), &self.index, &self.idf);
        (0..self.log_prior.len())
            .map(|c| {
                self.log_prior[c] + features.iter().map(|&(f, x)| x * self.log_likelihood[c * v + f]).sum::<f64>()
            })
            .collect()
    }

    pub fn predict_index(&self, text: &str) -> usize {
        let s = self.scores(text);
        let mut best = 0;
        for (i, &x) in s.iter().enumerate() {
            if x > s[best] {
                best = i;
            }
        }
        best
    }

    pub fn predict(&self, text: &str) -> &'static str {
        self.task.labels()[self.predict_index(text)]
    }

    pub fn save(&self, dir: &Path) -> Result<(), TextModelError> {
        std::fs::create_dir_all(dir)?;
        let header = BundleHeader {
            version: BUNDLE_VERSION,
            task: self.task,
            labels: self.task.labels().iter().map(|s| s.to_string()).collect(),
            config: self.config.clone(),
            n_train: self.n_train,
            vocabulary: self.vocabulary.clone(),
        };
        write_json_atomic(&dir.join(CLASSIFIER_FILE), &header)?;
        write_atomic(&dir.join(WEIGHTS_FILE), |w| {
            w.write_all(WEIGHTS_MAGIC)?;
            w.write_all(&(BUNDLE_VERSION as u16).to_le_bytes())?;
            w.write_all(&(self.log_prior.len() as u32).to_le_bytes())?;
            w.write_all(&(self.vocabulary.len() as u32).to_le_bytes())?;
            for x in self.idf.iter().chain(&self.log_prior).chain(&self.log_likelihood) {
                w.write_all(&x.to_le_bytes())?;
            }
            Ok(())
        })?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, TextModelError> {
        let header: BundleHeader = serde_json::from_slice(&std::fs::read(dir.join(CLASSIFIER_FILE))?)?;
        if header.version != BUNDLE_VERSION {
            return Err(TextModelError::Bundle(format!("unsupported bundle version {}", header.version)));
        }
        if header.labels.iter().map(String::as_str).ne(header.task.labels().iter().copied()) {
            return Err(TextModelError::Bundle("label set does not match the task".into()));
        }
        let mut bytes = Vec::new();
        std::fs::File::open(dir.join(WEIGHTS_FILE))?.read_to_end(&mut bytes)?;
        let k = header.labels.len();
        let v = header.vocabulary.len();
        if bytes.len() < 14 || &bytes[..4] != WEIGHTS_MAGIC {
            return Err(TextModelError::Bundle("weights file has a bad header".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        let bk = u32::from_le_bytes(bytes[6..10].try_into().expect("4 bytes")) as usize;
        let bv = u32::from_le_bytes(bytes[10..14].try_into().expect("4 bytes")) as usize;
        if version as u32 != BUNDLE_VERSION || bk != k || bv != v {
            return Err(TextModelError::Bundle("weights do not match classifier.json".into()));
        }
        let body = &bytes[14..];
        if body.len() != 8 * (v + k + k * v) {
            return Err(TextModelError::Bundle(format!("weights body has {} bytes", body.len())));
        }
        let mut floats = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
        let idf: Vec<f64> = floats.by_ref().take(v).collect();
        let log_prior: Vec<f64> = floats.by_ref().take(k).collect();
        let log_likelihood: Vec<f64> = floats.collect();
        let index = header.vocabulary.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
        Ok(Self {
            task: header.task,
            config: header.config,
            n_train: header.n_train,
            vocabulary: header.vocabulary,
            index,
            idf,
            log_prior,
            log_likelihood,
        })
    }
}

/// L2-normalized tf-idf over known n-grams, as sorted (feature, weight).
fn tfidf(grams: &[String], index: &HashMap<String, usize>, idf: &[f64]) -> Vec<(usize, f64)> {
    let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
    for g in grams {
        if let Some(&f) = index.get(g) {
            *tf.entry(f).or_default() += 1.0;
        }
    }
    let mut out: Vec<(usize, f64)> = tf.into_iter().map(|(f, c)| (f, c * idf[f])).collect();
    let norm = out.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, x) in &mut out {
            *x /= norm;
        }
    }
    out
}
