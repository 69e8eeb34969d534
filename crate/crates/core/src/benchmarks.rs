//! The bundled benchmark corpus: specifications, their safety properties
//! with expected solver verdicts, and (for OT) a hand transcription of the
//! expected counter system.

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixtureError {
    #[error("unknown benchmark `{0}` (known: {known})", known = NAMES.join(", "))]
    UnknownBenchmark(String),
    #[error("benchmark `{name}`: malformed {file}: {message}")]
    Malformed {
        name: String,
        file: String,
        message: String,
    },
}

pub const NAMES: [&str; 6] = ["ot", "ot_buggy", "srbp", "srbp_buggy", "bbp", "bbp_buggy"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// The Horn problem has a model: an inductive invariant exists.
    Sat,
    /// The abstraction reaches a bad state.
    Unsat,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct Property {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// The bad states, in the syntax of an `unsafe:` section.
    #[serde(rename = "unsafe")]
    pub unsafe_: String,
    /// Extra constraint on initial counter tuples.
    #[serde(default)]
    pub init: Option<String>,
    /// Alternative specification file in the same directory.
    #[serde(default)]
    pub spec: Option<String>,
    pub expected: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct ExpectedTau {
    pub frame: String,
    pub disjuncts: Vec<String>,
}

/// Expected formulas with `{name}` placeholders for macros.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Expected {
    pub verified_against_paper: bool,
    /// Applied in order; later macros may use earlier ones.
    pub macros: Vec<(String, String)>,
    pub phi0: String,
    pub iota0: String,
    pub tau0: ExpectedTau,
}

impl Expected {
    /// Replaces every `{name}` by the macro's text, repeatedly.
    pub fn expand(&self, text: &str) -> String {
        let mut out = text.to_string();
        for _ in 0..=self.macros.len() {
            let before = out.clone();
            for (name, body) in self.macros.iter().rev() {
                out = out.replace(&format!("{{{name}}}"), body);
            }
            if out == before {
                break;
            }
        }
        out
    }

    /// The whole transition formula, expanded.
    pub fn tau0_formula(&self) -> String {
        let ds: Vec<String> = self
            .tau0
            .disjuncts
            .iter()
            .map(|d| format!("({})", self.expand(d)))
            .collect();
        format!("{} & ({})", self.expand(&self.tau0.frame), ds.join(" | "))
    }
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub spec: &'static str,
    pub expected: Option<Expected>,
    pub properties: Vec<Property>,
    /// Whether the specification follows a formalization given in full in
    /// the literature the corpus comes from.
    pub verified_against_paper: bool,
    variants: &'static [(&'static str, &'static str)],
}

impl Fixture {
    /// The specification text a property is checked against.
    pub fn spec_for(&self, p: &Property) -> Result<&'static str, FixtureError> {
        match &p.spec {
            None => Ok(self.spec),
            Some(file) => self
                .variants
                .iter()
                .find(|(f, _)| f == file)
                .map(|(_, text)| *text)
                .ok_or_else(|| FixtureError::Malformed {
                    name: self.name.into(),
                    file: "properties.json".into(),
                    message: format!("property `{}` names unknown file `{file}`", p.name),
                }),
        }
    }

    pub fn property(&self, name: &str) -> Option<&Property> {
        self.properties.iter().find(|p| p.name == name)
    }
}

struct Raw {
    name: &'static str,
    spec: &'static str,
    properties: &'static str,
    expected: Option<&'static str>,
    verified: bool,
    variants: &'static [(&'static str, &'static str)],
}

macro_rules! bench_file {
    ($dir:literal, $file:literal) => {
        include_str!(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../benchmarks/",
            $dir,
            "/",
            $file
        ))
    };
}

fn raw(name: &str) -> Option<Raw> {
    Some(match name {
        "ot" => Raw {
            name: "ot",
            spec: bench_file!("ot", "spec.cf"),
            properties: bench_file!("ot", "properties.json"),
            expected: Some(bench_file!("ot", "expected.json")),
            verified: true,
            variants: &[("irrevocability.cf", bench_file!("ot", "irrevocability.cf"))],
        },
        "ot_buggy" => Raw {
            name: "ot_buggy",
            spec: bench_file!("ot_buggy", "spec.cf"),
            properties: bench_file!("ot_buggy", "properties.json"),
            expected: None,
            verified: false,
            variants: &[],
        },
        "srbp" => Raw {
            name: "srbp",
            spec: bench_file!("srbp", "spec.cf"),
            properties: bench_file!("srbp", "properties.json"),
            expected: None,
            verified: false,
            variants: &[],
        },
        "srbp_buggy" => Raw {
            name: "srbp_buggy",
            spec: bench_file!("srbp_buggy", "spec.cf"),
            properties: bench_file!("srbp_buggy", "properties.json"),
            expected: None,
            verified: false,
            variants: &[],
        },
        "bbp" => Raw {
            name: "bbp",
            spec: bench_file!("bbp", "spec.cf"),
            properties: bench_file!("bbp", "properties.json"),
            expected: None,
            verified: false,
            variants: &[],
        },
        "bbp_buggy" => Raw {
            name: "bbp_buggy",
            spec: bench_file!("bbp_buggy", "spec.cf"),
            properties: bench_file!("bbp_buggy", "properties.json"),
            expected: None,
            verified: false,
            variants: &[],
        },
        _ => return None,
    })
}

#[derive(Deserialize)]
struct PropertiesFile {
    properties: Vec<Property>,
}

pub fn load_fixture(name: &str) -> Result<Fixture, FixtureError> {
    let r = raw(name).ok_or_else(|| FixtureError::UnknownBenchmark(name.into()))?;
    let bad = |file: &str, e: serde_json::Error| FixtureError::Malformed {
        name: r.name.into(),
        file: file.into(),
        message: e.to_string(),
    };
    let props: PropertiesFile =
        serde_json::from_str(r.properties).map_err(|e| bad("properties.json", e))?;
    let expected = match r.expected {
        Some(text) => {
            Some(serde_json::from_str::<Expected>(text).map_err(|e| bad("expected.json", e))?)
        }
        None => None,
    };
    Ok(Fixture {
        name: r.name,
        spec: r.spec,
        expected,
        properties: props.properties,
        verified_against_paper: r.verified,
        variants: r.variants,
    })
}

/// Every fixture, in corpus order.
pub fn all_fixtures() -> Result<Vec<Fixture>, FixtureError> {
    NAMES.iter().map(|n| load_fixture(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{load_spec, parse_formula};

    #[test]
    fn corpus_loads_and_validates() {
        for f in all_fixtures().unwrap() {
            load_spec(f.spec).unwrap_or_else(|e| panic!("{}: {e}", f.name));
            assert!(!f.properties.is_empty(), "{}", f.name);
            for p in &f.properties {
                let spec = load_spec(f.spec_for(p).unwrap()).unwrap();
                crate::frontend::validate_ground(&spec, &parse_formula(&p.unsafe_).unwrap())
                    .unwrap_or_else(|e| panic!("{}/{}: {e}", f.name, p.name));
            }
            assert_eq!(f.expected.is_some(), f.name == "ot");
        }
    }

    #[test]
    fn ot_fixture() {
        let f = load_fixture("ot").unwrap();
        assert!(f.verified_against_paper);
        let names: Vec<&str> = f.properties.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "agreement",
                "weak_validity",
                "irrevocability",
                "empty_counters"
            ]
        );
        assert!(f.properties.iter().all(|p| p.expected == Verdict::Sat));
        assert_eq!(
            f.property("weak_validity").unwrap().init.as_deref(),
            Some("zb0 = N")
        );
        let e = f.expected.unwrap();
        assert_eq!(e.tau0.disjuncts.len(), 7);
        let p2 = e.expand("{p2}");
        assert!(!p2.contains('{'));
        parse_formula(&e.tau0_formula()).unwrap();
        parse_formula(&e.expand(&e.iota0)).unwrap();
    }

    #[test]
    fn buggy_fixtures_expect_unsat_somewhere() {
        for name in ["ot_buggy", "srbp_buggy", "bbp_buggy"] {
            let f = load_fixture(name).unwrap();
            assert!(!f.verified_against_paper);
            assert!(
                f.properties.iter().any(|p| p.expected == Verdict::Unsat),
                "{name}"
            );
        }
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert_eq!(
            load_fixture("nosuch").unwrap_err(),
            FixtureError::UnknownBenchmark("nosuch".into())
        );
    }
}
