//! Built-in entity recognizers.
//!
//! Pattern recognizers emit fixed per-kind confidences. Card numbers and IBANs
//! are only reported when their check digits validate, and then with
//! confidence 1.0. PERSON and LOCATION use bundled word lists instead of an
//! NER model; they are a weak substitute and can be pointed at other lists.

use std::collections::HashSet;
use std::fs;
use std::ops::Range;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;

use super::checksum::{iban_valid, luhn_checksum_ok};
use super::{EntityHit, EntityKind, RulesError};

const GIVEN_NAMES: &str = include_str!("../../data/given_names.txt");
const LOCATIONS: &str = include_str!("../../data/locations.txt");

pub const LEXICON_CONFIDENCE: f64 = 0.4;

/// Confidence for a pattern-only match of `kind`.
pub fn pattern_confidence(kind: EntityKind) -> f64 {
    match kind {
        EntityKind::EmailAddress => 1.0,
        EntityKind::Url | EntityKind::IpAddress => 0.9,
        EntityKind::PhoneNumber | EntityKind::DateTime => 0.6,
        EntityKind::Person | EntityKind::Location => LEXICON_CONFIDENCE,
        _ => 0.5,
    }
}

/// Case-insensitive phrase list matched on capitalised word sequences.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: HashSet<String>,
    max_words: usize,
}

impl Lexicon {
    pub fn parse(text: &str) -> Self {
        let entries: HashSet<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        let max_words = entries
            .iter()
            .map(|e| e.split_whitespace().count())
            .max()
            .unwrap_or(1);
        Self { entries, max_words }
    }

    pub fn from_path(path: &Path) -> Result<Self, RulesError> {
        let text = fs::read_to_string(path).map_err(|source| RulesError::WordList {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::parse(&text))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn find(&self, words: &Regex, text: &str) -> Vec<Range<usize>> {
        let tokens: Vec<Range<usize>> = words.find_iter(text).map(|m| m.range()).collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let starts_upper = text[tokens[i].clone()]
                .chars()
                .next()
                .is_some_and(char::is_uppercase);
            let mut matched = None;
            if starts_upper {
                let longest = self.max_words.min(tokens.len() - i);
                for n in (1..=longest).rev() {
                    let last = &tokens[i + n - 1];
                    // words of a phrase must be separated by exactly one space
                    let contiguous = (i..i + n - 1)
                        .all(|t| &text[tokens[t].end..tokens[t + 1].start] == " ");
                    if contiguous
                        && self
                            .entries
                            .contains(&text[tokens[i].start..last.end].to_lowercase())
                    {
                        matched = Some(n);
                        break;
                    }
                }
            }
            match matched {
                Some(n) => {
                    out.push(tokens[i].start..tokens[i + n - 1].end);
                    i += n;
                }
                None => i += 1,
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
enum Check {
    None,
    /// Surrounding characters must not continue a number.
    Isolated,
    Ipv4,
    Ssn,
    Date,
}

#[derive(Debug, Clone)]
struct Pattern {
    kind: EntityKind,
    regex: Regex,
    /// Capture group holding the entity; 0 is the whole match.
    group: usize,
    check: Check,
}

/// The full recognizer inventory, one entry per [`EntityKind`].
#[derive(Debug, Clone)]
pub struct RecognizerSet {
    patterns: Vec<Pattern>,
    card_runs: Regex,
    iban: Regex,
    words: Regex,
    names: Lexicon,
    locations: Lexicon,
}

impl Default for RecognizerSet {
    fn default() -> Self {
        Self::builtin()
    }
}

fn pattern(kind: EntityKind, re: &str, group: usize, check: Check) -> Pattern {
    Pattern {
        kind,
        regex: Regex::new(re).expect("built-in pattern compiles"),
        group,
        check,
    }
}

impl RecognizerSet {
    /// Recognizers with the bundled word lists.
    pub fn builtin() -> Self {
        static BUILTIN: OnceLock<RecognizerSet> = OnceLock::new();
        BUILTIN
            .get_or_init(|| Self::with_lexicons(Lexicon::parse(GIVEN_NAMES), Lexicon::parse(LOCATIONS)))
            .clone()
    }

    /// Loads the PERSON and LOCATION word lists from disk, one entry per line.
    pub fn from_word_lists(names: &Path, locations: &Path) -> Result<Self, RulesError> {
        Ok(Self::with_lexicons(
            Lexicon::from_path(names)?,
            Lexicon::from_path(locations)?,
        ))
    }

    pub fn with_lexicons(names: Lexicon, locations: Lexicon) -> Self {
        use EntityKind::*;
        let patterns = vec![
            pattern(
                EmailAddress,
                r"[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}",
                0,
                Check::None,
            ),
            pattern(
                Url,
                r#"(?i)\b(?:https?://|ftp://|www\.)[^\s<>"']+[^\s<>"'.,;:!?)]"#,
                0,
                Check::None,
            ),
            pattern(IpAddress, r"\b\d{1,3}(?:\.\d{1,3}){3}\b", 0, Check::Ipv4),
            pattern(
                IpAddress,
                r"(?i)\b(?:[0-9a-f]{1,4}:){7}[0-9a-f]{1,4}\b",
                0,
                Check::None,
            ),
            pattern(
                PhoneNumber,
                r"\+\d{1,3}[ -]?(?:\(\d{1,4}\)[ -]?)?\d{1,4}(?:[ -]\d{2,5}){1,4}",
                0,
                Check::Isolated,
            ),
            pattern(
                PhoneNumber,
                r"(?:\(\d{3}\) ?|\b\d{3}[-. ])\d{3}[-. ]\d{4}\b",
                0,
                Check::Isolated,
            ),
            pattern(
                DateTime,
                r"\b\d{4}-\d{2}-\d{2}(?:[T ]\d{2}:\d{2}(?::\d{2})?)?\b",
                0,
                Check::Date,
            ),
            pattern(
                DateTime,
                r"\b\d{1,2}[/.]\d{1,2}[/.]\d{4}\b",
                0,
                Check::Date,
            ),
            pattern(
                DateTime,
                r"(?i)\b(?:jan(?:uary)?|feb(?:ruary)?|mar(?:ch)?|apr(?:il)?|may|june?|july?|aug(?:ust)?|sep(?:t(?:ember)?)?|oct(?:ober)?|nov(?:ember)?|dec(?:ember)?)\.? \d{1,2},? \d{4}\b",
                0,
                Check::None,
            ),
            pattern(UsSsn, r"\b\d{3}-\d{2}-\d{4}\b", 0, Check::Ssn),
            pattern(
                UsItin,
                r"\b9\d{2}-(?:5\d|6[0-5]|7\d|8[0-8]|9[0-2]|9[4-9])-\d{4}\b",
                0,
                Check::Isolated,
            ),
            pattern(
                Crypto,
                r"\b(?:bc1[a-z0-9]{25,39}|[13][a-km-zA-HJ-NP-Z1-9]{25,34})\b",
                0,
                Check::None,
            ),
            // Conservative stand-ins so that every kind has a recognizer.
            pattern(
                Nrp,
                r"\b(?:American|British|Chinese|French|German|Indian|Italian|Japanese|Mexican|Russian|Spanish|Turkish|Christian|Catholic|Protestant|Muslim|Jewish|Hindu|Buddhist|Sikh|Atheist|Democrat|Republican|Socialist|Conservative)\b",
                0,
                Check::None,
            ),
            pattern(
                UsBankNumber,
                r"(?i)\b(?:acct|account)(?: ?(?:no|number|#))?[.:#]? ?(\d{8,17})\b",
                1,
                Check::None,
            ),
            pattern(UsDriverLicense, r"\b[A-Z]\d{7}\b", 0, Check::None),
            pattern(UsPassport, r"\b[A-Z]\d{8}\b", 0, Check::None),
            pattern(AuAbn, r"\b\d{2} \d{3} \d{3} \d{3}\b", 0, Check::Isolated),
            pattern(AuAcn, r"\b\d{3} \d{3} \d{3}\b", 0, Check::Isolated),
        ];
        Self {
            patterns,
            card_runs: Regex::new(r"\d+(?:[ -]\d+)*").expect("compiles"),
            iban: Regex::new(
                r"\b[A-Z]{2}\d{2}(?:[A-Z0-9]{11,30}|(?: [A-Z0-9]{4}){2,8}(?: [A-Z0-9]{1,3})?)\b",
            )
            .expect("compiles"),
            words: Regex::new(r"\p{L}[\p{L}'-]*").expect("compiles"),
            names,
            locations,
        }
    }

    /// Every kind that has at least one recognizer here.
    pub fn kinds(&self) -> HashSet<EntityKind> {
        let mut kinds: HashSet<EntityKind> = self.patterns.iter().map(|p| p.kind).collect();
        kinds.extend([
            EntityKind::CreditCard,
            EntityKind::IbanCode,
            EntityKind::Person,
            EntityKind::Location,
        ]);
        kinds
    }

    /// Runs every recognizer over `text`. Hits carry `cell_index` 0; callers
    /// that serialise several cells re-attribute them.
    pub fn recognize(&self, text: &str) -> Vec<EntityHit> {
        let mut hits = Vec::new();
        for p in &self.patterns {
            for caps in p.regex.captures_iter(text) {
                let Some(m) = caps.get(p.group) else { continue };
                if passes(p.check, text, m.range()) {
                    hits.push(hit(p.kind, pattern_confidence(p.kind), m.range()));
                }
            }
        }
        self.find_cards(text, &mut hits);
        self.find_ibans(text, &mut hits);
        for r in self.names.find(&self.words, text) {
            hits.push(hit(EntityKind::Person, LEXICON_CONFIDENCE, r));
        }
        for r in self.locations.find(&self.words, text) {
            hits.push(hit(EntityKind::Location, LEXICON_CONFIDENCE, r));
        }
        dedup_overlaps(hits)
    }

    /// Card numbers: within each run of digit groups, take the longest
    /// Luhn-valid window of 12 to 19 digits, left to right.
    fn find_cards(&self, text: &str, hits: &mut Vec<EntityHit>) {
        for run in self.card_runs.find_iter(text) {
            if !isolated(text, run.range()) {
                continue;
            }
            let groups: Vec<Range<usize>> = digit_groups(run.as_str(), run.start());
            let mut i = 0;
            while i < groups.len() {
                let mut found = None;
                for j in (i..groups.len()).rev() {
                    let digits: Vec<u8> = groups[i..=j]
                        .iter()
                        .flat_map(|g| text[g.clone()].bytes())
                        .collect();
                    if (12..=19).contains(&digits.len())
                        && card_grouping(&groups[i..=j])
                        && luhn_checksum_ok(&digits)
                    {
                        found = Some(j);
                        break;
                    }
                }
                match found {
                    Some(j) => {
                        hits.push(hit(EntityKind::CreditCard, 1.0, groups[i].start..groups[j].end));
                        i = j + 1;
                    }
                    None => i += 1,
                }
            }
        }
    }

    /// IBANs, shrinking a spaced candidate from the right until it validates.
    fn find_ibans(&self, text: &str, hits: &mut Vec<EntityHit>) {
        for m in self.iban.find_iter(text) {
            let mut cand = m.as_str();
            loop {
                if iban_valid(cand) == Ok(true) {
                    hits.push(hit(EntityKind::IbanCode, 1.0, m.start()..m.start() + cand.len()));
                    break;
                }
                match cand.rfind(' ') {
                    Some(sp) if cand[..sp].bytes().filter(|b| *b != b' ').count() >= 15 => {
                        cand = &cand[..sp]
                    }
                    _ => break,
                }
            }
        }
    }
}

/// One unbroken number, or the usual print groupings (4-4-4-4..., 4-6-5).
fn card_grouping(groups: &[Range<usize>]) -> bool {
    let lens: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    match &lens[..] {
        [_] => true,
        [4, 6, 4] | [4, 6, 5] => true,
        [init @ .., last] => init.iter().all(|l| *l == 4) && (1..=4).contains(last),
        [] => false,
    }
}

fn hit(kind: EntityKind, confidence: f64, span: Range<usize>) -> EntityHit {
    EntityHit {
        kind,
        confidence,
        cell_index: 0,
        span,
    }
}

fn digit_groups(run: &str, offset: usize) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = None;
    for (i, b) in run.bytes().enumerate() {
        match (b.is_ascii_digit(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                groups.push(offset + s..offset + i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        groups.push(offset + s..offset + run.len());
    }
    groups
}

/// The match is not glued to more digits or letters, e.g. via `1.` or `-2`.
fn isolated(text: &str, span: Range<usize>) -> bool {
    let bytes = text.as_bytes();
    let glued = |b: u8| b.is_ascii_alphanumeric();
    let joins = |b: u8| matches!(b, b'.' | b'-' | b'/' | b':' | b',');
    if span.start > 0 {
        let p = bytes[span.start - 1];
        if glued(p) || (joins(p) && span.start > 1 && bytes[span.start - 2].is_ascii_digit()) {
            return false;
        }
    }
    if span.end < bytes.len() {
        let n = bytes[span.end];
        if glued(n) || (joins(n) && bytes.get(span.end + 1).is_some_and(u8::is_ascii_digit)) {
            return false;
        }
    }
    true
}

fn passes(check: Check, text: &str, span: Range<usize>) -> bool {
    let s = &text[span.clone()];
    match check {
        Check::None => true,
        Check::Isolated => isolated(text, span),
        Check::Ipv4 => isolated(text, span) && s.parse::<std::net::Ipv4Addr>().is_ok(),
        Check::Ssn => {
            let area = &s[0..3];
            let group = &s[4..6];
            let serial = &s[7..11];
            isolated(text, span)
                && area != "000"
                && area != "666"
                && !area.starts_with('9')
                && group != "00"
                && serial != "0000"
        }
        Check::Date => plausible_date(s),
    }
}

fn plausible_date(s: &str) -> bool {
    let nums: Vec<u32> = s
        .split(|c: char| !c.is_ascii_digit())
        .filter(|p| !p.is_empty())
        .take(3)
        .filter_map(|p| p.parse().ok())
        .collect();
    let [a, b, c] = nums[..] else { return false };
    if s.as_bytes()[4] == b'-' {
        // yyyy-mm-dd
        (1..=12).contains(&b) && (1..=31).contains(&c)
    } else {
        // dd/mm/yyyy or mm/dd/yyyy
        let day_month = |d: u32, m: u32| (1..=31).contains(&d) && (1..=12).contains(&m);
        (day_month(a, b) || day_month(b, a)) && (1000..=2999).contains(&c)
    }
}

/// Keeps hits of the same kind disjoint: earliest start wins, then longest.
fn dedup_overlaps(mut hits: Vec<EntityHit>) -> Vec<EntityHit> {
    hits.sort_by(|a, b| {
        a.kind
            .cmp(&b.kind)
            .then(a.span.start.cmp(&b.span.start))
            .then(b.span.end.cmp(&a.span.end))
    });
    let mut out: Vec<EntityHit> = Vec::with_capacity(hits.len());
    for h in hits {
        if let Some(last) = out.last() {
            if last.kind == h.kind && h.span.start < last.span.end {
                continue;
            }
        }
        out.push(h);
    }
    out.sort_by_key(|h| (h.span.start, h.kind));
    out
}
