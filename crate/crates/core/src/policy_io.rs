//! Policy files.
//!
//! A policy file is a JSON object tagged with `"model"`. Group-first
//! policies list sparse `lug` / `lrg` matrices as nested name-keyed maps
//! (absent entry = 0); level-first policies carry `lu` / `lr` maxima and
//! `ulg` / `rlg` membership triples `[name, level, group]`.
//!
//! Identifier positions are assigned by sorted name order, which makes
//! [`serialize`] canonical.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::marker::PhantomData;
use std::path::Path;

use serde::de::{Deserializer, MapAccess, Visitor};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{EXIT_ANSWER, MAX_LEVEL_ANSWER};
use crate::policy::{Axis, Catalog, EnglPolicy, EnlgPolicy, Model, Policy, PolicyError};

#[derive(Debug, Error)]
pub enum PolicyIoError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing \"model\" tag")]
    MissingModel,
    #[error("unknown model tag {0:?}")]
    UnknownModel(String),
    #[error("duplicate {axis} name {name:?}")]
    DuplicateName { axis: Axis, name: String },
    #[error("invalid {axis} name {name:?}")]
    InvalidName { axis: Axis, name: String },
    #[error("{field} refers to undeclared {axis} {name:?}")]
    Reference {
        field: &'static str,
        axis: Axis,
        name: String,
    },
    #[error("duplicate {field} entry {entry}")]
    DuplicateEntry { field: &'static str, entry: String },
    #[error("{field} has no entry for {name:?}")]
    MissingLevel { field: &'static str, name: String },
    #[error("{field} entry for {name:?} is {value}, outside {min}..={max}")]
    Range {
        field: &'static str,
        name: String,
        value: u8,
        min: u8,
        max: u8,
    },
    #[error("{field} lists {name:?} at level {level} above its maximum {max}")]
    EntitlementShape {
        field: &'static str,
        name: String,
        level: u8,
        max: u8,
    },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("reading policy: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for PolicyIoError {
    fn from(e: serde_json::Error) -> Self {
        PolicyIoError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// String-keyed map that rejects repeated keys while parsing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct UniqueMap<V>(pub BTreeMap<String, V>);

impl<V> Default for UniqueMap<V> {
    fn default() -> Self {
        UniqueMap(BTreeMap::new())
    }
}

impl<'de, V: Deserialize<'de>> Deserialize<'de> for UniqueMap<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct UniqueVisitor<V>(PhantomData<V>);

        impl<'de, V: Deserialize<'de>> Visitor<'de> for UniqueVisitor<V> {
            type Value = UniqueMap<V>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object with unique keys")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut map = BTreeMap::new();
                while let Some((key, value)) = access.next_entry::<String, V>()? {
                    if map.contains_key(&key) {
                        return Err(serde::de::Error::custom(format!("duplicate key {key:?}")));
                    }
                    map.insert(key, value);
                }
                Ok(UniqueMap(map))
            }
        }

        d.deserialize_map(UniqueVisitor(PhantomData))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnglDocument {
    pub model: Model,
    pub q: u8,
    pub users: Vec<String>,
    pub groups: Vec<String>,
    pub resources: Vec<String>,
    #[serde(default)]
    pub lug: UniqueMap<UniqueMap<u8>>,
    #[serde(default)]
    pub lrg: UniqueMap<UniqueMap<u8>>,
}

/// `[entity, level, group]`
pub type Membership = (String, u8, String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnlgDocument {
    pub model: Model,
    pub q: u8,
    pub users: Vec<String>,
    pub groups: Vec<String>,
    pub resources: Vec<String>,
    pub lu: UniqueMap<u8>,
    pub lr: UniqueMap<u8>,
    #[serde(default)]
    pub ulg: Vec<Membership>,
    #[serde(default)]
    pub rlg: Vec<Membership>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyDocument {
    Engl(EnglDocument),
    Enlg(EnlgDocument),
}

impl PolicyDocument {
    pub fn model(&self) -> Model {
        match self {
            PolicyDocument::Engl(_) => Model::Engl,
            PolicyDocument::Enlg(_) => Model::Enlg,
        }
    }
}

#[derive(Deserialize)]
struct Header {
    model: Option<String>,
}

/// Parses a policy file and checks names and cross-references.
pub fn parse(text: &str) -> Result<PolicyDocument, PolicyIoError> {
    let header: Header = serde_json::from_str(text)?;
    let model = match header.model.as_deref() {
        None => return Err(PolicyIoError::MissingModel),
        Some("engl") => Model::Engl,
        Some("enlg") => Model::Enlg,
        Some(other) => return Err(PolicyIoError::UnknownModel(other.to_string())),
    };
    let doc = match model {
        Model::Engl => PolicyDocument::Engl(serde_json::from_str(text)?),
        Model::Enlg => PolicyDocument::Enlg(serde_json::from_str(text)?),
    };
    check_references(&doc)?;
    Ok(doc)
}

pub fn load(path: impl AsRef<Path>) -> Result<Policy, PolicyIoError> {
    let text = std::fs::read_to_string(path)?;
    validate(&parse(&text)?)
}

fn check_names(axis: Axis, names: &[String]) -> Result<BTreeSet<&str>, PolicyIoError> {
    let mut seen = BTreeSet::new();
    for name in names {
        let bad = name.is_empty()
            || name == EXIT_ANSWER
            || name == MAX_LEVEL_ANSWER
            || name.contains(',')
            || name.trim() != name
            || name.chars().any(char::is_control);
        if bad {
            return Err(PolicyIoError::InvalidName {
                axis,
                name: name.clone(),
            });
        }
        if !seen.insert(name.as_str()) {
            return Err(PolicyIoError::DuplicateName {
                axis,
                name: name.clone(),
            });
        }
    }
    Ok(seen)
}

fn known(
    field: &'static str,
    axis: Axis,
    names: &BTreeSet<&str>,
    name: &str,
) -> Result<(), PolicyIoError> {
    if names.contains(name) {
        Ok(())
    } else {
        Err(PolicyIoError::Reference {
            field,
            axis,
            name: name.to_string(),
        })
    }
}

fn check_references(doc: &PolicyDocument) -> Result<(), PolicyIoError> {
    let (users, groups, resources) = match doc {
        PolicyDocument::Engl(d) => (&d.users, &d.groups, &d.resources),
        PolicyDocument::Enlg(d) => (&d.users, &d.groups, &d.resources),
    };
    let users = check_names(Axis::User, users)?;
    let groups = check_names(Axis::Group, groups)?;
    let resources = check_names(Axis::Resource, resources)?;
    match doc {
        PolicyDocument::Engl(d) => {
            for (field, axis, rows, names) in [
                ("lug", Axis::User, &d.lug, &users),
                ("lrg", Axis::Resource, &d.lrg, &resources),
            ] {
                for (name, row) in &rows.0 {
                    known(field, axis, names, name)?;
                    for group in row.0.keys() {
                        known(field, Axis::Group, &groups, group)?;
                    }
                }
            }
        }
        PolicyDocument::Enlg(d) => {
            for name in d.lu.0.keys() {
                known("lu", Axis::User, &users, name)?;
            }
            for name in d.lr.0.keys() {
                known("lr", Axis::Resource, &resources, name)?;
            }
            for (field, axis, triples, names) in [
                ("ulg", Axis::User, &d.ulg, &users),
                ("rlg", Axis::Resource, &d.rlg, &resources),
            ] {
                let mut seen = BTreeSet::new();
                for triple in triples {
                    known(field, axis, names, &triple.0)?;
                    known(field, Axis::Group, &groups, &triple.2)?;
                    if !seen.insert(triple) {
                        return Err(PolicyIoError::DuplicateEntry {
                            field,
                            entry: format!("[{:?}, {}, {:?}]", triple.0, triple.1, triple.2),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

fn sorted_catalog(axis: Axis, names: &[String]) -> Result<Catalog, PolicyIoError> {
    let mut names = names.to_vec();
    names.sort();
    Ok(Catalog::new(axis, names)?)
}

fn position(catalog: &Catalog, name: &str) -> usize {
    catalog
        .position(name)
        .expect("references checked at parse time")
}

/// Builds the policy value, enforcing level ranges and cube shape.
pub fn validate(doc: &PolicyDocument) -> Result<Policy, PolicyIoError> {
    check_references(doc)?;
    match doc {
        PolicyDocument::Engl(d) => validate_engl(d).map(Policy::Engl),
        PolicyDocument::Enlg(d) => validate_enlg(d).map(Policy::Enlg),
    }
}

fn validate_engl(d: &EnglDocument) -> Result<EnglPolicy, PolicyIoError> {
    if d.q == 0 {
        return Err(PolicyError::NoLevels.into());
    }
    let users = sorted_catalog(Axis::User, &d.users)?;
    let groups = sorted_catalog(Axis::Group, &d.groups)?;
    let resources = sorted_catalog(Axis::Resource, &d.resources)?;
    let matrix = |field, rows: &UniqueMap<UniqueMap<u8>>, catalog: &Catalog| {
        let mut out = vec![vec![0u8; groups.len()]; catalog.len()];
        for (name, row) in &rows.0 {
            for (group, &value) in &row.0 {
                if value > d.q {
                    return Err(PolicyIoError::Range {
                        field,
                        name: format!("{name}/{group}"),
                        value,
                        min: 0,
                        max: d.q,
                    });
                }
                out[position(catalog, name) - 1][position(&groups, group) - 1] = value;
            }
        }
        Ok(out)
    };
    let lug = matrix("lug", &d.lug, &users)?;
    let lrg = matrix("lrg", &d.lrg, &resources)?;
    Ok(EnglPolicy::new(
        d.q,
        users,
        groups.clone(),
        resources,
        lug,
        lrg,
    )?)
}

fn validate_enlg(d: &EnlgDocument) -> Result<EnlgPolicy, PolicyIoError> {
    if d.q == 0 {
        return Err(PolicyError::NoLevels.into());
    }
    let users = sorted_catalog(Axis::User, &d.users)?;
    let groups = sorted_catalog(Axis::Group, &d.groups)?;
    let resources = sorted_catalog(Axis::Resource, &d.resources)?;
    let maxima = |field, map: &UniqueMap<u8>, catalog: &Catalog| {
        catalog
            .names()
            .iter()
            .map(|name| match map.0.get(name) {
                None => Err(PolicyIoError::MissingLevel {
                    field,
                    name: name.clone(),
                }),
                Some(&v) if v == 0 || v > d.q => Err(PolicyIoError::Range {
                    field,
                    name: name.clone(),
                    value: v,
                    min: 1,
                    max: d.q,
                }),
                Some(&v) => Ok(v),
            })
            .collect::<Result<Vec<u8>, _>>()
    };
    let lu = maxima("lu", &d.lu, &users)?;
    let lr = maxima("lr", &d.lr, &resources)?;
    let cube = |field, triples: &[Membership], catalog: &Catalog, max: &[u8]| {
        triples
            .iter()
            .map(|(name, level, group)| {
                let e = position(catalog, name);
                if *level == 0 || *level > d.q {
                    return Err(PolicyIoError::Range {
                        field,
                        name: name.clone(),
                        value: *level,
                        min: 1,
                        max: d.q,
                    });
                }
                if *level > max[e - 1] {
                    return Err(PolicyIoError::EntitlementShape {
                        field,
                        name: name.clone(),
                        level: *level,
                        max: max[e - 1],
                    });
                }
                Ok((e, *level, position(&groups, group)))
            })
            .collect::<Result<Vec<_>, _>>()
    };
    let ulg = cube("ulg", &d.ulg, &users, &lu)?;
    let rlg = cube("rlg", &d.rlg, &resources, &lr)?;
    Ok(EnlgPolicy::new(
        d.q,
        users,
        groups.clone(),
        resources,
        lu,
        lr,
        &ulg,
        &rlg,
    )?)
}

/// Canonical document for a policy: names sorted, zero entries omitted.
pub fn to_document(policy: &Policy) -> PolicyDocument {
    let sorted = |c: &Catalog| {
        let mut v = c.names().to_vec();
        v.sort();
        v
    };
    match policy {
        Policy::Engl(p) => {
            let matrix = |catalog: &Catalog, entry: &dyn Fn(usize, usize) -> u8| {
                let mut rows = BTreeMap::new();
                for (e, name) in catalog.iter() {
                    let row: BTreeMap<String, u8> = p
                        .groups()
                        .iter()
                        .filter_map(|(j, g)| {
                            let v = entry(e, j);
                            (v > 0).then(|| (g.to_string(), v))
                        })
                        .collect();
                    if !row.is_empty() {
                        rows.insert(name.to_string(), UniqueMap(row));
                    }
                }
                UniqueMap(rows)
            };
            PolicyDocument::Engl(EnglDocument {
                model: Model::Engl,
                q: p.levels(),
                users: sorted(p.users()),
                groups: sorted(p.groups()),
                resources: sorted(p.resources()),
                lug: matrix(p.users(), &|i, j| p.user_level(i, j).unwrap_or(0)),
                lrg: matrix(p.resources(), &|k, j| p.resource_level(k, j).unwrap_or(0)),
            })
        }
        Policy::Enlg(p) => {
            let maxima = |catalog: &Catalog, get: &dyn Fn(usize) -> u8| {
                UniqueMap(
                    catalog
                        .iter()
                        .map(|(e, n)| (n.to_string(), get(e)))
                        .collect(),
                )
            };
            let triples = |catalog: &Catalog, entries: Vec<(usize, u8, usize)>| {
                let mut out: Vec<Membership> = entries
                    .into_iter()
                    .map(|(e, l, j)| (name_of(catalog, e), l, name_of(p.groups(), j)))
                    .collect();
                out.sort();
                out
            };
            PolicyDocument::Enlg(EnlgDocument {
                model: Model::Enlg,
                q: p.levels(),
                users: sorted(p.users()),
                groups: sorted(p.groups()),
                resources: sorted(p.resources()),
                lu: maxima(p.users(), &|i| p.user_max(i).map_or(0, |l| l.get())),
                lr: maxima(p.resources(), &|k| p.resource_max(k).map_or(0, |l| l.get())),
                ulg: triples(p.users(), p.user_memberships()),
                rlg: triples(p.resources(), p.resource_memberships()),
            })
        }
    }
}

fn name_of(catalog: &Catalog, index: usize) -> String {
    catalog.name(index).unwrap_or_default().to_string()
}

/// Canonical policy text.
pub fn serialize(policy: &Policy) -> String {
    write_document(&to_document(policy))
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn list(names: &[String]) -> String {
    let items: Vec<_> = names.iter().map(|n| quote(n)).collect();
    format!("[{}]", items.join(", "))
}

fn flat_map(map: &BTreeMap<String, u8>) -> String {
    let items: Vec<_> = map
        .iter()
        .map(|(k, v)| format!("{}: {v}", quote(k)))
        .collect();
    format!("{{{}}}", items.join(", "))
}

fn nested(out: &mut String, key: &str, rows: &UniqueMap<UniqueMap<u8>>, last: bool) {
    let end = if last { "" } else { "," };
    if rows.0.is_empty() {
        let _ = writeln!(out, "  {}: {{}}{end}", quote(key));
        return;
    }
    let _ = writeln!(out, "  {}: {{", quote(key));
    let lines: Vec<_> = rows
        .0
        .iter()
        .map(|(k, row)| format!("    {}: {}", quote(k), flat_map(&row.0)))
        .collect();
    let _ = writeln!(out, "{}", lines.join(",\n"));
    let _ = writeln!(out, "  }}{end}");
}

fn triples(out: &mut String, key: &str, entries: &[Membership], last: bool) {
    let end = if last { "" } else { "," };
    if entries.is_empty() {
        let _ = writeln!(out, "  {}: []{end}", quote(key));
        return;
    }
    let _ = writeln!(out, "  {}: [", quote(key));
    let lines: Vec<_> = entries
        .iter()
        .map(|(e, l, g)| format!("    [{}, {l}, {}]", quote(e), quote(g)))
        .collect();
    let _ = writeln!(out, "{}", lines.join(",\n"));
    let _ = writeln!(out, "  ]{end}");
}

/// Writes a document in canonical layout: fixed key order, one matrix row or
/// membership triple per line, trailing newline.
pub fn write_document(doc: &PolicyDocument) -> String {
    let mut out = String::from("{\n");
    let (model, q, users, groups, resources) = match doc {
        PolicyDocument::Engl(d) => (d.model, d.q, &d.users, &d.groups, &d.resources),
        PolicyDocument::Enlg(d) => (d.model, d.q, &d.users, &d.groups, &d.resources),
    };
    let _ = writeln!(out, "  \"model\": {},", quote(model.as_str()));
    let _ = writeln!(out, "  \"q\": {q},");
    let _ = writeln!(out, "  \"users\": {},", list(users));
    let _ = writeln!(out, "  \"groups\": {},", list(groups));
    let _ = writeln!(out, "  \"resources\": {},", list(resources));
    match doc {
        PolicyDocument::Engl(d) => {
            nested(&mut out, "lug", &d.lug, false);
            nested(&mut out, "lrg", &d.lrg, true);
        }
        PolicyDocument::Enlg(d) => {
            let _ = writeln!(out, "  \"lu\": {},", flat_map(&d.lu.0));
            let _ = writeln!(out, "  \"lr\": {},", flat_map(&d.lr.0));
            triples(&mut out, "ulg", &d.ulg, false);
            triples(&mut out, "rlg", &d.rlg, true);
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const ENGL: &str = include_str!("../testdata/fixture-engl.json");
    const ENLG: &str = include_str!("../testdata/fixture-enlg.json");

    #[test]
    fn minimal_engl_parses() {
        let doc = parse(
            r#"{"model":"engl","q":1,"users":["a"],"groups":["g"],"resources":["r"],"lug":{"a":{"g":1}}}"#,
        )
        .unwrap();
        let policy = validate(&doc).unwrap();
        let Policy::Engl(p) = policy else {
            panic!("wrong model")
        };
        assert!(p.can_access(1, 1, 1).is_ok_and(|ok| !ok));
        assert_eq!(p.user_level(1, 1).unwrap(), 1);
    }

    #[test]
    fn golden_fixtures_are_canonical() {
        for text in [ENGL, ENLG] {
            let policy = validate(&parse(text).unwrap()).unwrap();
            assert_eq!(serialize(&policy), text);
        }
    }

    #[test]
    fn fixture_document_round_trip() {
        for text in [ENGL, ENLG] {
            let doc = parse(text).unwrap();
            let again = parse(&serialize(&validate(&doc).unwrap())).unwrap();
            assert_eq!(doc, again);
        }
    }

    #[test]
    fn serialize_is_stable() {
        let policy = validate(&parse(ENGL).unwrap()).unwrap();
        assert_eq!(serialize(&policy), serialize(&policy));
        let once = serialize(&policy);
        let twice = serialize(&validate(&parse(&once).unwrap()).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn zeros_are_dropped() {
        let doc = parse(
            r#"{"model":"engl","q":2,"users":["b","a"],"groups":["g"],"resources":["r"],
                "lug":{"a":{"g":0},"b":{"g":2}},"lrg":{}}"#,
        )
        .unwrap();
        let text = serialize(&validate(&doc).unwrap());
        assert!(text.contains("\"users\": [\"a\", \"b\"]"));
        assert!(text.contains("    \"b\": {\"g\": 2}\n"));
        assert!(!text.contains("\"a\": {"));
        assert!(text.contains("\"lrg\": {}\n"));
    }

    #[test]
    fn duplicate_user_name() {
        let err =
            parse(r#"{"model":"engl","q":1,"users":["a","a"],"groups":["g"],"resources":["r"]}"#)
                .unwrap_err();
        assert!(
            matches!(
                err,
                PolicyIoError::DuplicateName {
                    axis: Axis::User,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn duplicate_map_key() {
        let err = parse(
            r#"{"model":"engl","q":1,"users":["a"],"groups":["g"],"resources":["r"],
                "lug":{"a":{"g":1,"g":1}}}"#,
        )
        .unwrap_err();
        assert!(
            matches!(err, PolicyIoError::Syntax { line: 2, .. }),
            "{err}"
        );
    }

    #[test]
    fn undeclared_group_reference() {
        let err = parse(
            r#"{"model":"engl","q":1,"users":["a"],"groups":["g"],"resources":["r"],"lug":{"a":{"h":1}}}"#,
        )
        .unwrap_err();
        assert!(
            matches!(&err, PolicyIoError::Reference { field: "lug", axis: Axis::Group, name } if name == "h"),
            "{err}"
        );
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse("{\n  \"model\": \"engl\",\n  \"q\": ,\n}").unwrap_err();
        match err {
            PolicyIoError::Syntax { line, column, .. } => assert_eq!((line, column), (3, 8)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn model_tag_errors() {
        assert!(
            matches!(parse(r#"{"model":"blp"}"#), Err(PolicyIoError::UnknownModel(m)) if m == "blp")
        );
        assert!(matches!(
            parse(r#"{"q":1}"#),
            Err(PolicyIoError::MissingModel)
        ));
    }

    #[test]
    fn reserved_names_rejected() {
        for bad in ["-", "*", "a,b", "", " a"] {
            let text = format!(
                r#"{{"model":"engl","q":1,"users":[{}],"groups":["g"],"resources":["r"]}}"#,
                quote(bad)
            );
            assert!(
                matches!(parse(&text), Err(PolicyIoError::InvalidName { .. })),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn engl_level_above_q() {
        let doc = parse(
            r#"{"model":"engl","q":2,"users":["a"],"groups":["g"],"resources":["r"],"lrg":{"r":{"g":3}}}"#,
        )
        .unwrap();
        assert!(matches!(
            validate(&doc),
            Err(PolicyIoError::Range {
                field: "lrg",
                value: 3,
                max: 2,
                ..
            })
        ));
    }

    #[test]
    fn enlg_triple_above_user_maximum() {
        let doc = parse(
            r#"{"model":"enlg","q":3,"users":["a"],"groups":["g"],"resources":["r"],
                "lu":{"a":1},"lr":{"r":1},"ulg":[["a",2,"g"]]}"#,
        )
        .unwrap();
        assert!(matches!(
            validate(&doc),
            Err(PolicyIoError::EntitlementShape {
                field: "ulg",
                level: 2,
                max: 1,
                ..
            })
        ));
    }

    #[test]
    fn enlg_maxima_checks() {
        let missing = parse(
            r#"{"model":"enlg","q":3,"users":["a","b"],"groups":["g"],"resources":["r"],"lu":{"a":1},"lr":{"r":1}}"#,
        )
        .unwrap();
        assert!(matches!(
            validate(&missing),
            Err(PolicyIoError::MissingLevel { field: "lu", name }) if name == "b"
        ));
        let zero = parse(
            r#"{"model":"enlg","q":3,"users":["a"],"groups":["g"],"resources":["r"],"lu":{"a":0},"lr":{"r":1}}"#,
        )
        .unwrap();
        assert!(matches!(
            validate(&zero),
            Err(PolicyIoError::Range { min: 1, .. })
        ));
    }

    #[test]
    fn duplicate_triple_rejected() {
        let err = parse(
            r#"{"model":"enlg","q":1,"users":["a"],"groups":["g"],"resources":["r"],
                "lu":{"a":1},"lr":{"r":1},"rlg":[["r",1,"g"],["r",1,"g"]]}"#,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            PolicyIoError::DuplicateEntry { field: "rlg", .. }
        ));
    }

    #[test]
    fn unknown_field_rejected() {
        let err = parse(
            r#"{"model":"engl","q":1,"users":["a"],"groups":["g"],"resources":["r"],"roles":[]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, PolicyIoError::Syntax { .. }));
    }
}
