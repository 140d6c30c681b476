//! B/I tag sequences, their correspondence with segmentations, sequence
//! accuracy, and the case-switch splitting rule.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    /// Starts a new segment.
    B,
    /// Continues the current segment.
    I,
}

impl Tag {
    pub const ALL: [Tag; 2] = [Tag::B, Tag::I];

    pub fn index(self) -> usize {
        match self {
            Tag::B => 0,
            Tag::I => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Tag> {
        match i {
            0 => Some(Tag::B),
            1 => Some(Tag::I),
            _ => None,
        }
    }
}

/// Nonempty tag sequence whose first tag is `B`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TagSequence(Vec<Tag>);

impl TagSequence {
    pub fn new(tags: Vec<Tag>) -> Result<Self> {
        match tags.first() {
            None => Err(Error::contract("tag sequence is empty")),
            Some(Tag::I) => Err(Error::contract("tag sequence starts with I")),
            Some(Tag::B) => Ok(TagSequence(tags)),
        }
    }

    pub fn tags(&self) -> &[Tag] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<Tag> {
        self.0
    }
}

impl fmt::Display for TagSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t:?}")?;
        }
        Ok(())
    }
}

/// Ordered nonempty segments whose concatenation is the raw input.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segmentation {
    segments: Vec<String>,
}

impl Segmentation {
    pub fn new<S: Into<String>>(segments: impl IntoIterator<Item = S>) -> Result<Self> {
        let segments: Vec<String> = segments.into_iter().map(Into::into).collect();
        if segments.is_empty() {
            return Err(Error::contract("segmentation has no segments"));
        }
        if let Some(pos) = segments.iter().position(String::is_empty) {
            return Err(Error::contract(format!("segment {pos} is empty")));
        }
        Ok(Segmentation { segments })
    }

    /// Parses the single-space-separated display form, e.g. `"photo of the day"`.
    pub fn parse(line: &str) -> Result<Self> {
        Self::new(line.split(' '))
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn raw(&self) -> String {
        self.segments.concat()
    }

    pub fn char_len(&self) -> usize {
        self.segments.iter().map(|s| s.chars().count()).sum()
    }

    pub fn map_segments(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        Self::new(self.segments.iter().map(|s| f(s)))
    }
}

impl fmt::Display for Segmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.segments.join(" "))
    }
}

/// Opens a new segment at every `B`.
pub fn tags_to_segments(input: &str, tags: &TagSequence) -> Result<Segmentation> {
    let chars: Vec<char> = input.chars().collect();
    if chars.len() != tags.len() {
        return Err(Error::contract(format!(
            "input has {} characters but {} tags",
            chars.len(),
            tags.len()
        )));
    }
    let mut segments: Vec<String> = Vec::new();
    for (c, t) in chars.into_iter().zip(tags.tags()) {
        match t {
            Tag::B => segments.push(c.to_string()),
            Tag::I => segments
                .last_mut()
                .expect("TagSequence starts with B")
                .push(c),
        }
    }
    Segmentation::new(segments)
}

pub fn segments_to_tags(seg: &Segmentation) -> Result<TagSequence> {
    let mut tags = Vec::with_capacity(seg.char_len());
    for s in seg.segments() {
        let n = s.chars().count();
        if n == 0 {
            return Err(Error::contract("empty segment"));
        }
        tags.push(Tag::B);
        tags.extend(std::iter::repeat_n(Tag::I, n - 1));
    }
    TagSequence::new(tags)
}

/// Number of predictions exactly equal to their reference.
pub fn count_correct(predictions: &[Segmentation], references: &[Segmentation]) -> Result<usize> {
    if predictions.len() != references.len() {
        return Err(Error::contract(format!(
            "{} predictions for {} references",
            predictions.len(),
            references.len()
        )));
    }
    let mut correct = 0;
    for (i, (p, r)) in predictions.iter().zip(references).enumerate() {
        if p.raw() != r.raw() {
            return Err(Error::contract(format!(
                "pair {i}: prediction input {:?} differs from reference input {:?}",
                p.raw(),
                r.raw()
            )));
        }
        if p == r {
            correct += 1;
        }
    }
    Ok(correct)
}

/// Fraction of exactly matching segmentations. No partial credit.
pub fn full_sequence_accuracy(predictions: &[Segmentation], references: &[Segmentation]) -> Result<f64> {
    let correct = count_correct(predictions, references)?;
    if references.is_empty() {
        return Err(Error::contract("accuracy over an empty list"));
    }
    Ok(correct as f64 / references.len() as f64)
}

/// Splits before every uppercase character after the first and isolates
/// every non-alphanumeric character. Digits stay attached to adjacent letters.
pub fn case_split_rule(input: &str) -> Result<Segmentation> {
    let mut segments: Vec<String> = Vec::new();
    let mut prev_alnum = true;
    for c in input.chars() {
        let alnum = c.is_alphanumeric();
        let boundary = segments.is_empty() || !alnum || !prev_alnum || c.is_uppercase();
        if boundary {
            segments.push(c.to_string());
        } else {
            segments.last_mut().expect("nonempty").push(c);
        }
        prev_alnum = alnum;
    }
    Segmentation::new(segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Tag::{B, I};

    fn seg(s: &str) -> Segmentation {
        Segmentation::parse(s).unwrap()
    }

    #[test]
    fn bbib_groups_middle_pair() {
        let tags = TagSequence::new(vec![B, B, I, B]).unwrap();
        assert_eq!(tags_to_segments("wxyz", &tags).unwrap(), seg("w xy z"));
    }

    #[test]
    fn all_b_and_single_b() {
        let all_b = TagSequence::new(vec![B; 4]).unwrap();
        assert_eq!(tags_to_segments("abcd", &all_b).unwrap(), seg("a b c d"));
        let one = TagSequence::new(vec![B, I, I, I]).unwrap();
        assert_eq!(tags_to_segments("abcd", &one).unwrap(), seg("abcd"));
    }

    #[test]
    fn tag_contract_errors() {
        assert!(TagSequence::new(vec![I, B]).is_err());
        assert!(TagSequence::new(vec![]).is_err());
        let t = TagSequence::new(vec![B, I]).unwrap();
        assert!(tags_to_segments("abc", &t).is_err());
    }

    #[test]
    fn photo_of_the_day_tags() {
        let tags = segments_to_tags(&seg("photo of the day")).unwrap();
        let expected = vec![B, I, I, I, I, B, I, B, I, I, B, I, I];
        assert_eq!(tags.tags(), expected.as_slice());
        assert_eq!(segments_to_tags(&seg("a")).unwrap().tags(), &[B]);
    }

    #[test]
    fn empty_segments_rejected() {
        assert!(Segmentation::parse("a  b").is_err());
        assert!(Segmentation::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn multibyte_characters_count_once() {
        let tags = TagSequence::new(vec![B, I, B]).unwrap();
        assert_eq!(tags_to_segments("éñx", &tags).unwrap(), seg("éñ x"));
    }

    #[test]
    fn accuracy_no_partial_credit() {
        let refs = vec![seg("photo of the day"), seg("open research")];
        assert_eq!(full_sequence_accuracy(&refs, &refs).unwrap(), 1.0);
        let preds = vec![seg("photoof the day"), seg("open research")];
        assert_eq!(full_sequence_accuracy(&preds, &refs).unwrap(), 0.5);
        assert_eq!(count_correct(&preds[..1], &refs[..1]).unwrap(), 0);
    }

    #[test]
    fn accuracy_contracts() {
        let refs = vec![seg("open research")];
        assert!(full_sequence_accuracy(&[], &refs).is_err());
        assert!(full_sequence_accuracy(&[seg("openre search x")], &refs).is_err());
    }

    #[test]
    fn case_rule_examples() {
        assert_eq!(case_split_rule("NYTimes.com").unwrap(), seg("N Y Times . com"));
        assert_eq!(case_split_rule("DisneylandNews").unwrap(), seg("Disneyland News"));
        assert_eq!(case_split_rule("photooftheday").unwrap(), seg("photooftheday"));
        assert_eq!(case_split_rule("AwardsandHonors").unwrap(), seg("Awardsand Honors"));
    }

    #[test]
    fn case_rule_edges() {
        assert_eq!(case_split_rule("a").unwrap(), seg("a"));
        assert_eq!(case_split_rule("..").unwrap(), seg(". ."));
        assert_eq!(case_split_rule("Top10Hits").unwrap(), seg("Top10 Hits"));
        assert_eq!(case_split_rule("my-site").unwrap(), seg("my - site"));
        assert!(case_split_rule("").is_err());
    }
}
