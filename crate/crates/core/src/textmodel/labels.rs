use serde::{Deserialize, Serialize};

/// What a post is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InfoTheme {
    SituationalInformation,
    AttitudeDisclosure,
    LifeRecording,
    LatestPolicies,
}

impl InfoTheme {
    pub const ALL: [InfoTheme; 4] =
        [Self::SituationalInformation, Self::AttitudeDisclosure, Self::LifeRecording, Self::LatestPolicies];
    pub const NAMES: [&'static str; 4] =
        ["SituationalInformation", "AttitudeDisclosure", "LifeRecording", "LatestPolicies"];

    pub fn as_str(self) -> &'static str {
        Self::NAMES[self as usize]
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::NAMES.iter().position(|n| *n == s).map(|i| Self::ALL[i])
    }
}

/// Emotional tone of a post.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EmotionType {
    Hopeful,
    Appreciative,
    Neutral,
    Annoyed,
    Anxious,
}

impl EmotionType {
    pub const ALL: [EmotionType; 5] = [Self::Hopeful, Self::Appreciative, Self::Neutral, Self::Annoyed, Self::Anxious];
    pub const NAMES: [&'static str; 5] = ["Hopeful", "Appreciative", "Neutral", "Annoyed", "Anxious"];

    pub fn as_str(self) -> &'static str {
        Self::NAMES[self as usize]
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::NAMES.iter().position(|n| *n == s).map(|i| Self::ALL[i])
    }
}

/// A text classification task and its closed label set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Info,
    Emotion,
}

impl Task {
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Self::Info => &InfoTheme::NAMES,
            Self::Emotion => &EmotionType::NAMES,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Info => "info",
            Self::Emotion => "emotion",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "info" => Some(Self::Info),
            "emotion" => Some(Self::Emotion),
            _ => None,
        }
    }

    pub fn index_of(self, label: &str) -> Option<usize> {
        self.labels().iter().position(|l| *l == label)
    }
}
