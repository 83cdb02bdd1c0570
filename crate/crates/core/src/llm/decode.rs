//! Schema-tolerant decoding of JSON-mode model output.
//!
//! JSON mode guarantees syntax, not shape. Field names drift (`name` for
//! `topic`), arrays of objects pick up bare strings, and schema examples come
//! back verbatim. [`decode_structured`] maps aliases to primary names, drops
//! elements it cannot use, and refuses any output that contains a
//! blacklisted placeholder. Every tolerance it applies is recorded as a
//! [`DecodeNote`].

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use super::timestamp::{format_timestamp, parse_timestamp};

/// Literals that indicate the model copied a schema example instead of
/// extracting data.
pub const DEFAULT_PLACEHOLDERS: &[&str] = &["H:MM:SS", "MM:SS", "example.com"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecodeNote {
    PlaceholderHit { literal: String },
    FieldAliasUsed { field: String, alias: String },
    Repaired { detail: String },
    Dropped { detail: String },
    FastResponseWarning { elapsed_s: f64, prompt_chars: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("output is not valid JSON: {0}")]
    Malformed(String),
    #[error("output contains placeholder text {literal:?}")]
    Placeholder { literal: String },
    #[error("required field {field:?} missing under every accepted name")]
    MissingField { field: String },
    #[error("field {field:?} should be {expected}")]
    TypeMismatch { field: String, expected: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    String,
    Object(Vec<FieldSpec>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldKind {
    String,
    /// `H:MM:SS` with an unpadded hour, e.g. `0:15:42`.
    Timestamp,
    Integer,
    Array(Element),
    Object(Vec<FieldSpec>),
}

impl FieldKind {
    fn expected(&self) -> &'static str {
        match self {
            FieldKind::String => "a string",
            FieldKind::Timestamp => "an H:MM:SS timestamp",
            FieldKind::Integer => "an integer",
            FieldKind::Array(_) => "an array",
            FieldKind::Object(_) => "an object",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub name: String,
    pub aliases: Vec<String>,
    pub kind: FieldKind,
    pub required: bool,
}

impl FieldSpec {
    pub fn required(name: &str, kind: FieldKind) -> Self {
        FieldSpec {
            name: name.into(),
            aliases: Vec::new(),
            kind,
            required: true,
        }
    }

    pub fn optional(name: &str, kind: FieldKind) -> Self {
        FieldSpec {
            required: false,
            ..Self::required(name, kind)
        }
    }

    pub fn alias(mut self, alias: &str) -> Self {
        self.aliases.push(alias.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaSpec {
    pub fields: Vec<FieldSpec>,
    pub placeholder_blacklist: Vec<String>,
}

impl SchemaSpec {
    /// A schema with the default placeholder blacklist.
    pub fn new(fields: Vec<FieldSpec>) -> Self {
        SchemaSpec {
            fields,
            placeholder_blacklist: DEFAULT_PLACEHOLDERS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    /// The record under primary field names only.
    pub record: Map<String, Value>,
    pub notes: Vec<DecodeNote>,
}

impl Decoded {
    pub fn str_field(&self, name: &str) -> Option<&str> {
        self.record.get(name).and_then(Value::as_str)
    }

    pub fn array_field(&self, name: &str) -> &[Value] {
        self.record
            .get(name)
            .and_then(Value::as_array)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// Decodes `raw` model output against `schema`.
pub fn decode_structured(raw: &str, schema: &SchemaSpec) -> Result<Decoded, DecodeError> {
    let mut notes = Vec::new();
    let mut value = parse_lenient(raw, &mut notes)?;

    if let Some(literal) = find_placeholder(&value, &schema.placeholder_blacklist) {
        return Err(DecodeError::Placeholder { literal });
    }

    if let Value::Array(items) = value {
        let target = schema
            .fields
            .iter()
            .find(|f| matches!(f.kind, FieldKind::Array(_)))
            .ok_or_else(|| DecodeError::Malformed("expected a JSON object, got an array".into()))?;
        notes.push(DecodeNote::Repaired {
            detail: format!("top-level array wrapped into {:?}", target.name),
        });
        let mut obj = Map::new();
        obj.insert(target.name.clone(), Value::Array(items));
        value = Value::Object(obj);
    }
    let Value::Object(obj) = value else {
        return Err(DecodeError::Malformed("expected a JSON object".into()));
    };
    let record = decode_object(&obj, &schema.fields, "", &mut notes)?;
    Ok(Decoded { record, notes })
}

/// Parses JSON, tolerating code fences and prose around a single object.
fn parse_lenient(raw: &str, notes: &mut Vec<DecodeNote>) -> Result<Value, DecodeError> {
    let trimmed = raw.trim();
    let first_err = match serde_json::from_str::<Value>(trimmed) {
        Ok(v) => return Ok(v),
        Err(e) => e.to_string(),
    };
    let open = trimmed.find(['{', '[']);
    let close = trimmed.rfind(['}', ']']);
    if let (Some(a), Some(b)) = (open, close) {
        if a < b {
            if let Ok(v) = serde_json::from_str::<Value>(&trimmed[a..=b]) {
                notes.push(DecodeNote::Repaired {
                    detail: "stripped text around the JSON body".into(),
                });
                return Ok(v);
            }
        }
    }
    Err(DecodeError::Malformed(first_err))
}

fn find_placeholder(v: &Value, blacklist: &[String]) -> Option<String> {
    match v {
        Value::String(s) => blacklist.iter().find(|p| s.contains(p.as_str())).cloned(),
        Value::Array(items) => items.iter().find_map(|i| find_placeholder(i, blacklist)),
        Value::Object(m) => m.values().find_map(|i| find_placeholder(i, blacklist)),
        _ => None,
    }
}

fn join_path(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

/// Looks a field up by primary name, then aliases, then case-insensitively.
fn lookup<'a>(
    obj: &'a Map<String, Value>,
    spec: &FieldSpec,
    path: &str,
    notes: &mut Vec<DecodeNote>,
) -> Option<&'a Value> {
    let present = |v: &&Value| !v.is_null();
    if let Some(v) = obj.get(&spec.name).filter(present) {
        return Some(v);
    }
    let names = std::iter::once(&spec.name).chain(&spec.aliases);
    for alias in &spec.aliases {
        if let Some(v) = obj.get(alias).filter(present) {
            notes.push(DecodeNote::FieldAliasUsed {
                field: path.to_string(),
                alias: alias.clone(),
            });
            return Some(v);
        }
    }
    for name in names {
        if let Some((key, v)) = obj.iter().find(|(k, v)| k.eq_ignore_ascii_case(name) && !v.is_null()) {
            notes.push(DecodeNote::FieldAliasUsed {
                field: path.to_string(),
                alias: key.clone(),
            });
            return Some(v);
        }
    }
    None
}

fn decode_object(
    obj: &Map<String, Value>,
    fields: &[FieldSpec],
    prefix: &str,
    notes: &mut Vec<DecodeNote>,
) -> Result<Map<String, Value>, DecodeError> {
    let mut out = Map::new();
    for spec in fields {
        let path = join_path(prefix, &spec.name);
        match lookup(obj, spec, &path, notes) {
            Some(v) => {
                let decoded = decode_value(v, &spec.kind, &path, notes)?;
                out.insert(spec.name.clone(), decoded);
            }
            None if spec.required => return Err(DecodeError::MissingField { field: path }),
            None => {}
        }
    }
    Ok(out)
}

fn decode_value(v: &Value, kind: &FieldKind, path: &str, notes: &mut Vec<DecodeNote>) -> Result<Value, DecodeError> {
    let mismatch = || DecodeError::TypeMismatch {
        field: path.to_string(),
        expected: kind.expected(),
    };
    let repaired = |notes: &mut Vec<DecodeNote>, what: &str| {
        notes.push(DecodeNote::Repaired {
            detail: format!("{path}: {what}"),
        })
    };
    match kind {
        FieldKind::String => match v {
            Value::String(_) => Ok(v.clone()),
            Value::Number(_) | Value::Bool(_) => {
                repaired(notes, "scalar converted to string");
                Ok(Value::String(v.to_string()))
            }
            Value::Array(items) if items.iter().all(Value::is_string) => {
                repaired(notes, "string list joined");
                let parts: Vec<&str> = items.iter().filter_map(Value::as_str).collect();
                Ok(Value::String(parts.join("; ")))
            }
            _ => Err(mismatch()),
        },
        FieldKind::Timestamp => match v {
            Value::String(s) => {
                let secs = parse_timestamp(s).map_err(|_| mismatch())?;
                let canonical = format_timestamp(f64::from(secs));
                if canonical != s.trim() {
                    repaired(notes, "timestamp normalized");
                }
                Ok(Value::String(canonical))
            }
            Value::Number(n) => {
                let secs = n.as_f64().filter(|s| *s >= 0.0).ok_or_else(mismatch)?;
                repaired(notes, "seconds converted to H:MM:SS");
                Ok(Value::String(format_timestamp(secs)))
            }
            _ => Err(mismatch()),
        },
        FieldKind::Integer => match v {
            Value::Number(n) if n.is_i64() || n.is_u64() => Ok(v.clone()),
            Value::Number(n) => {
                let f = n.as_f64().filter(|f| f.fract() == 0.0).ok_or_else(mismatch)?;
                Ok(Value::from(f as i64))
            }
            Value::String(s) => {
                let i: i64 = s.trim().trim_start_matches('#').parse().map_err(|_| mismatch())?;
                repaired(notes, "numeric string converted to integer");
                Ok(Value::from(i))
            }
            _ => Err(mismatch()),
        },
        FieldKind::Object(fields) => match v {
            Value::Object(m) => Ok(Value::Object(decode_object(m, fields, path, notes)?)),
            _ => Err(mismatch()),
        },
        FieldKind::Array(elem) => {
            let items: Vec<&Value> = match v {
                Value::Array(items) => items.iter().collect(),
                Value::Object(_) | Value::String(_) => {
                    repaired(notes, "single value wrapped in an array");
                    vec![v]
                }
                _ => return Err(mismatch()),
            };
            let mut out = Vec::with_capacity(items.len());
            for (i, item) in items.into_iter().enumerate() {
                let item_path = format!("{path}[{i}]");
                match (elem, item) {
                    (Element::String, Value::String(_)) => out.push(item.clone()),
                    (Element::String, Value::Number(_) | Value::Bool(_)) => {
                        repaired(notes, "scalar element converted to string");
                        out.push(Value::String(item.to_string()));
                    }
                    (Element::Object(fields), Value::Object(m)) => {
                        // A bad element costs only itself.
                        let mut local = Vec::new();
                        match decode_object(m, fields, &item_path, &mut local) {
                            Ok(rec) => {
                                notes.append(&mut local);
                                out.push(Value::Object(rec));
                            }
                            Err(e) => notes.push(DecodeNote::Dropped {
                                detail: format!("{item_path}: {e}"),
                            }),
                        }
                    }
                    (Element::Object(_), Value::String(s)) => notes.push(DecodeNote::Dropped {
                        detail: format!("{item_path}: bare string {s:?} where an object was expected"),
                    }),
                    _ => notes.push(DecodeNote::Dropped {
                        detail: format!("{item_path}: unexpected element type"),
                    }),
                }
            }
            Ok(Value::Array(out))
        }
    }
}
