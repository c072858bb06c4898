//! Abstracted runtime values as recorded by the tracer.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Maximum number of characters of string content kept in a descriptor.
pub const TEXT_LIMIT: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Null,
    Boolean,
    Integer,
    Float,
    String,
    Bytes,
    SizedCollection,
    OpaqueObject,
}

impl ValueKind {
    pub fn is_numeric(self) -> bool {
        matches!(
            self,
            ValueKind::Boolean | ValueKind::Integer | ValueKind::Float
        )
    }

    pub fn has_length(self) -> bool {
        matches!(
            self,
            ValueKind::String | ValueKind::Bytes | ValueKind::SizedCollection
        )
    }
}

/// An exact number. Integers are kept exact, floats as their 64-bit value.
///
/// Equality is bitwise for floats, except that all NaNs are equal.
#[derive(Debug, Clone, Copy)]
pub enum Number {
    Int(i64),
    Float(f64),
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a == b,
            (Number::Float(a), Number::Float(b)) => {
                (a.is_nan() && b.is_nan()) || a.to_bits() == b.to_bits()
            }
            _ => false,
        }
    }
}

impl Number {
    pub fn is_nan(self) -> bool {
        matches!(self, Number::Float(f) if f.is_nan())
    }

    /// Sign of the value; `None` for NaN.
    pub fn signum(self) -> Option<Ordering> {
        match self {
            Number::Int(i) => Some(i.cmp(&0)),
            Number::Float(f) => f.partial_cmp(&0.0),
        }
    }

    /// Exact numeric comparison across integer and float values. `None` when
    /// either side is NaN.
    pub fn compare(self, other: Number) -> Option<Ordering> {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => Some(a.cmp(&b)),
            (Number::Float(a), Number::Float(b)) => a.partial_cmp(&b),
            (Number::Int(a), Number::Float(b)) => cmp_int_float(a, b),
            (Number::Float(a), Number::Int(b)) => cmp_int_float(b, a).map(Ordering::reverse),
        }
    }
}

fn cmp_int_float(i: i64, f: f64) -> Option<Ordering> {
    if f.is_nan() {
        return None;
    }
    // 2^63 is exactly representable; every finite f64 below it in magnitude
    // truncates to a value that fits in i64.
    const LIMIT: f64 = 9_223_372_036_854_775_808.0;
    if f >= LIMIT {
        return Some(Ordering::Less);
    }
    if f < -LIMIT {
        return Some(Ordering::Greater);
    }
    let whole = f.trunc();
    let whole_i = whole as i64;
    match i.cmp(&whole_i) {
        Ordering::Equal => {
            let frac = f - whole;
            if frac > 0.0 {
                Some(Ordering::Less)
            } else if frac < 0.0 {
                Some(Ordering::Greater)
            } else {
                Some(Ordering::Equal)
            }
        }
        ord => Some(ord),
    }
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Number::Int(i) => s.serialize_i64(i),
            Number::Float(f) if f.is_nan() => s.serialize_str("nan"),
            Number::Float(f) if f == f64::INFINITY => s.serialize_str("inf"),
            Number::Float(f) if f == f64::NEG_INFINITY => s.serialize_str("-inf"),
            Number::Float(f) => s.serialize_f64(f),
        }
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct NumberVisitor;

        impl Visitor<'_> for NumberVisitor {
            type Value = Number;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"nan\", \"inf\", \"-inf\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Number, E> {
                Ok(Number::Int(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Number, E> {
                i64::try_from(v)
                    .map(Number::Int)
                    .map_err(|_| E::custom(format!("integer {v} out of range")))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Number, E> {
                Ok(Number::Float(v))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Number, E> {
                match v {
                    "nan" => Ok(Number::Float(f64::NAN)),
                    "inf" => Ok(Number::Float(f64::INFINITY)),
                    "-inf" => Ok(Number::Float(f64::NEG_INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }

        d.deserialize_any(NumberVisitor)
    }
}

/// Character-class flags of a string, computed on the full untruncated value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StringFlags {
    pub is_ascii: bool,
    pub is_digits: bool,
    pub has_special: bool,
}

impl StringFlags {
    pub fn of(s: &str) -> Self {
        StringFlags {
            is_ascii: s.is_ascii(),
            is_digits: !s.is_empty() && s.chars().all(|c| c.is_numeric()),
            has_special: s
                .chars()
                .any(|c| !c.is_alphanumeric() && !c.is_whitespace()),
        }
    }
}

/// Abstraction of one runtime value.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueDescriptor {
    pub kind: ValueKind,
    pub type_name: String,
    pub numeric: Option<Number>,
    /// String content, truncated to [`TEXT_LIMIT`] characters.
    pub text: Option<String>,
    /// Original length (characters for strings, bytes, element count).
    pub length: Option<u64>,
    pub flags: Option<StringFlags>,
}

impl ValueDescriptor {
    fn bare(kind: ValueKind, type_name: &str) -> Self {
        ValueDescriptor {
            kind,
            type_name: type_name.to_string(),
            numeric: None,
            text: None,
            length: None,
            flags: None,
        }
    }

    pub fn null() -> Self {
        Self::bare(ValueKind::Null, "NoneType")
    }

    pub fn boolean(b: bool) -> Self {
        ValueDescriptor {
            numeric: Some(Number::Int(b as i64)),
            ..Self::bare(ValueKind::Boolean, "bool")
        }
    }

    pub fn integer(i: i64) -> Self {
        ValueDescriptor {
            numeric: Some(Number::Int(i)),
            ..Self::bare(ValueKind::Integer, "int")
        }
    }

    pub fn float(f: f64) -> Self {
        let f = if f.is_nan() { f64::NAN } else { f };
        ValueDescriptor {
            numeric: Some(Number::Float(f)),
            ..Self::bare(ValueKind::Float, "float")
        }
    }

    pub fn string(s: &str) -> Self {
        let length = s.chars().count() as u64;
        let text: String = s.chars().take(TEXT_LIMIT).collect();
        ValueDescriptor {
            text: Some(text),
            length: Some(length),
            flags: Some(StringFlags::of(s)),
            ..Self::bare(ValueKind::String, "str")
        }
    }

    pub fn bytes(len: u64) -> Self {
        ValueDescriptor {
            length: Some(len),
            ..Self::bare(ValueKind::Bytes, "bytes")
        }
    }

    pub fn collection(type_name: &str, len: u64) -> Self {
        ValueDescriptor {
            length: Some(len),
            ..Self::bare(ValueKind::SizedCollection, type_name)
        }
    }

    pub fn opaque(type_name: &str) -> Self {
        Self::bare(ValueKind::OpaqueObject, type_name)
    }

    /// True when `text` holds the complete string.
    pub fn text_is_complete(&self) -> bool {
        match (&self.text, self.length) {
            (Some(t), Some(len)) => t.chars().count() as u64 == len,
            _ => false,
        }
    }

    /// String flags, either as recorded or recomputed from complete text.
    pub fn string_flags(&self) -> Option<StringFlags> {
        if self.kind != ValueKind::String {
            return None;
        }
        self.flags.or_else(|| {
            self.text_is_complete()
                .then(|| StringFlags::of(self.text.as_deref().unwrap_or_default()))
        })
    }

    /// Lists every violated descriptor invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.numeric.is_some() != self.kind.is_numeric() {
            out.push(format!(
                "numeric must be present iff kind is boolean/integer/float (kind {:?})",
                self.kind
            ));
        }
        if self.length.is_some() != self.kind.has_length() {
            out.push(format!(
                "length must be present iff kind is string/bytes/sized_collection (kind {:?})",
                self.kind
            ));
        }
        if self.text.is_some() && self.kind != ValueKind::String {
            out.push("text is only allowed for strings".to_string());
        }
        if self.flags.is_some() && self.kind != ValueKind::String {
            out.push("string flags are only allowed for strings".to_string());
        }
        if let Some(text) = &self.text {
            let n = text.chars().count();
            if n > TEXT_LIMIT {
                out.push(format!("text longer than {TEXT_LIMIT} characters"));
            }
            if let Some(len) = self.length {
                if (n as u64) > len {
                    out.push("text longer than recorded length".to_string());
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_comparison_is_exact() {
        assert_eq!(
            Number::Int(2).compare(Number::Float(2.0)),
            Some(Ordering::Equal)
        );
        assert_eq!(
            Number::Int(2).compare(Number::Float(2.5)),
            Some(Ordering::Less)
        );
        assert_eq!(
            Number::Float(-2.5).compare(Number::Int(-2)),
            Some(Ordering::Less)
        );
        assert_eq!(
            Number::Int(i64::MAX).compare(Number::Float(9.3e18)),
            Some(Ordering::Less)
        );
        assert_eq!(Number::Int(1).compare(Number::Float(f64::NAN)), None);
    }

    #[test]
    fn string_flags_of_mixed_text() {
        let v = ValueDescriptor::string("a1!");
        assert_eq!(v.length, Some(3));
        assert_eq!(
            v.flags,
            Some(StringFlags {
                is_ascii: true,
                is_digits: false,
                has_special: true
            })
        );
        assert!(v.violations().is_empty());
    }

    #[test]
    fn long_strings_are_truncated_but_keep_length() {
        let s = "é".repeat(TEXT_LIMIT + 10);
        let v = ValueDescriptor::string(&s);
        assert_eq!(v.text.as_ref().unwrap().chars().count(), TEXT_LIMIT);
        assert_eq!(v.length, Some(TEXT_LIMIT as u64 + 10));
        assert!(!v.text_is_complete());
        assert!(!v.flags.unwrap().is_ascii);
    }

    #[test]
    fn invariant_violations_are_reported() {
        let mut v = ValueDescriptor::integer(3);
        v.numeric = None;
        v.text = Some("x".into());
        assert_eq!(v.violations().len(), 2);
    }
}
