//! Train/val/test split manifests.
//!
//! On disk a manifest is JSON lines: one header record followed by one
//! record per entry.
//!
//! ```text
//! {"seed":7,"counts":{"train":10,"val":2,"test":2},"discard_count":1,"level":"pm45","discard_ids":["x"]}
//! {"source_id":"stripes-00003","split":"train","signed_angle":-12.5,"level":"pm45"}
//! ```

use super::level::{sample_angle, DifficultyLevel};
use super::DatasetError;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl SplitCounts {
    pub fn new(train: usize, val: usize, test: usize) -> Self {
        Self { train, val, test }
    }

    /// `None` on overflow.
    pub fn total(&self) -> Option<usize> {
        self.train.checked_add(self.val)?.checked_add(self.test)
    }

    pub fn get(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train,
            Split::Val => self.val,
            Split::Test => self.test,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub source_id: String,
    pub split: Split,
    pub signed_angle: f64,
    pub level: DifficultyLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestHeader {
    pub seed: u64,
    pub counts: SplitCounts,
    pub discard_count: usize,
    pub level: DifficultyLevel,
    #[serde(default)]
    pub discard_ids: Vec<String>,
    /// Effective configuration of the run that produced the manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitManifest {
    pub seed: u64,
    pub level: DifficultyLevel,
    pub counts: SplitCounts,
    pub entries: Vec<ManifestEntry>,
    pub discard_ids: Vec<String>,
    pub config: Option<serde_json::Value>,
}

/// Generator for entry `index` of a manifest built with `seed`.
pub fn entry_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Partitions the non-discarded ids into train/val/test and samples one
/// rotation per entry.
///
/// Output is a pure function of the arguments: the id shuffle uses stream 0
/// of `seed`, and entry `i` draws its angle from [`entry_rng`]`(seed, i)`.
pub fn build_split<S: AsRef<str>>(
    ids: &[S],
    level: DifficultyLevel,
    seed: u64,
    counts: SplitCounts,
    discard_ids: &[S],
) -> Result<SplitManifest, DatasetError> {
    let discard: HashSet<&str> = discard_ids.iter().map(AsRef::as_ref).collect();
    let mut seen = HashSet::new();
    let mut eligible = Vec::with_capacity(ids.len());
    for id in ids.iter().map(AsRef::as_ref) {
        if !seen.insert(id) {
            return Err(DatasetError::InvalidArgument(format!("duplicate source id {id}")));
        }
        if !discard.contains(id) {
            eligible.push(id);
        }
    }
    let total = counts
        .total()
        .ok_or_else(|| DatasetError::InvalidArgument("split counts overflow".into()))?;
    if total > eligible.len() {
        return Err(DatasetError::InvalidArgument(format!(
            "requested {total} entries but only {} usable images ({} discarded)",
            eligible.len(),
            ids.len() - eligible.len()
        )));
    }

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seed);
    eligible.shuffle(&mut shuffle_rng);

    let splits = [Split::Train, Split::Val, Split::Test];
    let entries = splits
        .iter()
        .flat_map(|&s| std::iter::repeat_n(s, counts.get(s)))
        .zip(eligible)
        .enumerate()
        .map(|(i, (split, id))| ManifestEntry {
            source_id: id.to_string(),
            split,
            signed_angle: sample_angle(level, &mut entry_rng(seed, i)),
            level,
        })
        .collect();

    let mut discard_ids: Vec<String> = discard.into_iter().map(str::to_string).collect();
    discard_ids.sort();
    Ok(SplitManifest { seed, level, counts, entries, discard_ids, config: None })
}

impl SplitManifest {
    pub fn header(&self) -> ManifestHeader {
        ManifestHeader {
            seed: self.seed,
            counts: self.counts,
            discard_count: self.discard_ids.len(),
            level: self.level,
            discard_ids: self.discard_ids.clone(),
            config: self.config.clone(),
        }
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header()).expect("header serializes");
        out.push('\n');
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    /// Parses and validates a manifest. Blank lines are ignored.
    pub fn from_jsonl(text: &str) -> Result<Self, DatasetError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line, message: String| DatasetError::Manifest { line, message };

        let (hline, htext) = lines.next().ok_or_else(|| err(1, "missing header record".into()))?;
        let header: ManifestHeader =
            serde_json::from_str(htext).map_err(|e| err(hline, format!("bad header: {e}")))?;
        if header.discard_count != header.discard_ids.len() {
            return Err(err(hline, "discard_count does not match discard_ids".into()));
        }
        let discard: HashSet<&str> = header.discard_ids.iter().map(String::as_str).collect();

        let mut seen = HashSet::new();
        let mut tally = SplitCounts::default();
        let mut entries = Vec::new();
        for (line, text) in lines {
            let e: ManifestEntry =
                serde_json::from_str(text).map_err(|e| err(line, format!("bad entry: {e}")))?;
            if e.level != header.level {
                return Err(err(line, format!("entry level {} differs from header {}", e.level, header.level)));
            }
            if !e.level.contains(e.signed_angle) {
                return Err(err(line, format!("angle {} outside the {} range", e.signed_angle, e.level)));
            }
            if discard.contains(e.source_id.as_str()) {
                return Err(err(line, format!("{} is on the discard list", e.source_id)));
            }
            if !seen.insert(e.source_id.clone()) {
                return Err(err(line, format!("{} appears more than once", e.source_id)));
            }
            match e.split {
                Split::Train => tally.train += 1,
                Split::Val => tally.val += 1,
                Split::Test => tally.test += 1,
            }
            entries.push(e);
        }
        if tally != header.counts {
            return Err(err(hline, format!("header counts {:?} but found {:?}", header.counts, tally)));
        }
        Ok(Self {
            seed: header.seed,
            level: header.level,
            counts: header.counts,
            entries,
            discard_ids: header.discard_ids,
            config: header.config,
        })
    }
}
