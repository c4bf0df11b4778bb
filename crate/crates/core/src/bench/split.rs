use std::collections::BTreeSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Train/test partition of a dataset's sections, by index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub name: String,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

impl SplitSpec {
    pub fn validate(&self, section_count: usize) -> Result<()> {
        let train: BTreeSet<_> = self.train_indices.iter().collect();
        if train.len() != self.train_indices.len() {
            return Err(Error::InvalidSplit(format!("{}: duplicate train index", self.name)));
        }
        let mut test = BTreeSet::new();
        for i in &self.test_indices {
            if !test.insert(i) {
                return Err(Error::InvalidSplit(format!("{}: duplicate test index {i}", self.name)));
            }
            if train.contains(i) {
                return Err(Error::InvalidSplit(format!("{}: index {i} is in both train and test", self.name)));
            }
        }
        if let Some(&&max) = train.iter().chain(test.iter()).max() {
            if max >= section_count {
                return Err(Error::InvalidSplit(format!(
                    "{}: index {max} out of range for {section_count} sections",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The test items, in index order.
    pub fn select_test<'a, T>(&self, items: &'a [T]) -> Result<Vec<&'a T>> {
        self.validate(items.len())?;
        let mut idx = self.test_indices.clone();
        idx.sort_unstable();
        Ok(idx.into_iter().map(|i| &items[i]).collect())
    }
}

/// Splits used by the published benchmark datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitPreset {
    /// First 30 and last 30 sections are test; the rest train.
    Cracks,
    /// Sections 0..400 train, 400..500 test.
    Thebe,
    /// Volumes 0..200 train, 200..220 test.
    FaultSeg3d,
}

impl SplitPreset {
    pub const ALL: [SplitPreset; 3] = [SplitPreset::Cracks, SplitPreset::Thebe, SplitPreset::FaultSeg3d];

    pub fn name(self) -> &'static str {
        match self {
            SplitPreset::Cracks => "cracks",
            SplitPreset::Thebe => "thebe",
            SplitPreset::FaultSeg3d => "faultseg3d",
        }
    }

    pub fn minimum_sections(self) -> usize {
        match self {
            SplitPreset::Cracks => 60,
            SplitPreset::Thebe => 500,
            SplitPreset::FaultSeg3d => 220,
        }
    }

    pub fn split(self, section_count: usize) -> Result<SplitSpec> {
        let need = self.minimum_sections();
        if section_count < need {
            return Err(Error::InvalidSplit(format!(
                "{} split needs at least {need} sections, found {section_count}",
                self.name()
            )));
        }
        let (train, test): (Vec<usize>, Vec<usize>) = match self {
            SplitPreset::Cracks => {
                let n = section_count;
                ((30..n - 30).collect(), (0..30).chain(n - 30..n).collect())
            }
            SplitPreset::Thebe => ((0..400).collect(), (400..500).collect()),
            SplitPreset::FaultSeg3d => ((0..200).collect(), (200..220).collect()),
        };
        Ok(SplitSpec {
            name: self.name().to_string(),
            train_indices: train,
            test_indices: test,
        })
    }
}

impl FromStr for SplitPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SplitPreset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "split",
                name: s.to_string(),
                available: SplitPreset::ALL.map(|p| p.name()).join(", "),
            })
    }
}
