//! Parameter generator specs and the word pools they draw from.

use std::collections::BTreeMap;

use crate::device::Scalar;
use crate::rng::SplitMix64;

pub type Params = BTreeMap<String, Scalar>;

/// How one task parameter is drawn. Each non-derived spec consumes draws
/// from the task stream in schema order.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamSpec {
    /// `+1555` followed by seven digits.
    PhoneNumber,
    OneOf(Vec<String>),
    IntRange {
        lo: i64,
        hi: i64,
    },
    /// Integer rendered zero-padded as a string, e.g. `07`.
    PaddedInt {
        lo: i64,
        hi: i64,
        width: usize,
    },
    /// Two to five words from the sentence pools, capitalized.
    Sentence,
    /// `<word>_<word>.<ext>`.
    FileName {
        ext: &'static str,
    },
    /// Filled in by the task after the drawn parameters.
    Derived,
}

impl ParamSpec {
    pub fn one_of(values: &[&str]) -> Self {
        ParamSpec::OneOf(values.iter().map(|v| v.to_string()).collect())
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> Option<Scalar> {
        Some(match self {
            ParamSpec::PhoneNumber => Scalar::str(format!("+1555{:07}", rng.below(10_000_000))),
            ParamSpec::OneOf(values) => Scalar::str(rng.pick(values).clone()),
            ParamSpec::IntRange { lo, hi } => Scalar::Int(rng.range_inclusive(*lo, *hi)),
            ParamSpec::PaddedInt { lo, hi, width } => {
                Scalar::str(format!("{:0width$}", rng.range_inclusive(*lo, *hi), width = *width))
            }
            ParamSpec::Sentence => Scalar::str(sentence(rng)),
            ParamSpec::FileName { ext } => {
                let a = rng.pick(FILE_WORDS);
                let b = rng.pick(FILE_WORDS);
                Scalar::str(format!("{a}_{b}.{ext}"))
            }
            ParamSpec::Derived => return None,
        })
    }

    pub fn describe(&self) -> String {
        match self {
            ParamSpec::PhoneNumber => "phone number +1555XXXXXXX".to_string(),
            ParamSpec::OneOf(v) => format!("one of {} values", v.len()),
            ParamSpec::IntRange { lo, hi } => format!("integer {lo}..={hi}"),
            ParamSpec::PaddedInt { lo, hi, width } => format!("integer {lo}..={hi}, {width} digits"),
            ParamSpec::Sentence => "short sentence".to_string(),
            ParamSpec::FileName { ext } => format!("file name *.{ext}"),
            ParamSpec::Derived => "derived".to_string(),
        }
    }
}

pub const SUBJECTS: &[&str] = &[
    "the meeting",
    "dinner",
    "the package",
    "my train",
    "the report",
    "our trip",
    "the game",
    "practice",
    "the concert",
    "lunch",
    "the delivery",
    "class",
];
pub const PREDICATES: &[&str] = &[
    "is moved to",
    "starts at",
    "got pushed to",
    "is confirmed for",
    "ends at",
    "is set for",
];
pub const OBJECTS: &[&str] = &[
    "noon",
    "six tonight",
    "friday morning",
    "next week",
    "the usual place",
    "tomorrow",
    "half past four",
    "monday",
];
pub const FILE_WORDS: &[&str] = &[
    "notes", "ideas", "plan", "budget", "recipe", "draft", "todo", "journal", "summary", "list", "travel", "reading",
    "project", "meeting", "shopping", "goals",
];
pub const TITLES: &[&str] = &[
    "Data Dive",
    "Sync",
    "Team Standup",
    "Dentist",
    "Book Club",
    "Yoga",
    "Budget Review",
    "Coffee Chat",
    "Design Review",
    "Piano Lesson",
    "Grocery Run",
    "Board Meeting",
];
pub const DESCRIPTIONS: &[&str] = &[
    "Bring laptop",
    "Discuss roadmap",
    "Quarterly numbers",
    "Weekly catch-up",
    "Room 4B",
    "Call in from home",
    "Prepare questions",
    "Review last sprint",
];
pub const EXPENSE_NAMES: &[&str] = &[
    "Lunch",
    "Rent",
    "Taxi",
    "Cinema",
    "Pharmacy",
    "Electric bill",
    "Textbooks",
    "Groceries",
    "Gym",
    "Gift",
    "Concert tickets",
    "Bus pass",
];

fn sentence(rng: &mut SplitMix64) -> String {
    let s = rng.pick(SUBJECTS);
    let p = rng.pick(PREDICATES);
    let o = rng.pick(OBJECTS);
    let mut out = format!("{s} {p} {o}");
    if let Some(first) = out.get(..1) {
        out = first.to_uppercase() + &out[1..];
    }
    out
}

/// Placeholder names in `template`, in order of appearance.
pub fn placeholders(template: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        let after = &rest[start + 1..];
        match after.find('}') {
            Some(end) => {
                out.push(after[..end].to_string());
                rest = &after[end + 1..];
            }
            None => break,
        }
    }
    out
}

/// Substitutes `{name}` placeholders. Returns the first name left unfilled.
pub fn fill(template: &str, params: &Params) -> Result<String, String> {
    let mut out = template.to_string();
    for name in placeholders(template) {
        let value = params.get(&name).ok_or_else(|| name.clone())?;
        out = out.replace(&format!("{{{name}}}"), &value.to_string());
    }
    match placeholders(&out).into_iter().next() {
        Some(left) if template.contains(&format!("{{{left}}}")) => Err(left),
        _ => Ok(out),
    }
}

pub fn get_str<'a>(params: &'a Params, name: &str) -> &'a str {
    params.get(name).and_then(Scalar::as_str).unwrap_or_default()
}

pub fn get_int(params: &Params, name: &str) -> i64 {
    params.get(name).and_then(Scalar::as_int).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phone_numbers_have_the_documented_shape() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..200 {
            let n = ParamSpec::PhoneNumber.sample(&mut rng).unwrap().to_string();
            assert_eq!(n.len(), 12);
            assert!(n.starts_with("+1555"));
            assert!(n[1..].bytes().all(|b| b.is_ascii_digit()));
        }
    }

    #[test]
    fn padded() {
        let mut rng = SplitMix64::new(9);
        let v = ParamSpec::PaddedInt { lo: 1, hi: 9, width: 2 }
            .sample(&mut rng)
            .unwrap();
        assert_eq!(v.to_string().len(), 2);
    }

    #[test]
    fn template_fill() {
        let p = Params::from([("a".to_string(), Scalar::str("x")), ("n".to_string(), Scalar::Int(3))]);
        assert_eq!(fill("{a} has {n}", &p).unwrap(), "x has 3");
        assert_eq!(fill("plain", &p).unwrap(), "plain");
        assert_eq!(fill("{missing}", &p), Err("missing".to_string()));
        assert_eq!(placeholders("{a}-{b}{c}"), vec!["a", "b", "c"]);
    }
}
