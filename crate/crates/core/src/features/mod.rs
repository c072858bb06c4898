//! The seventeen execution-feature classes and their per-run encoding.

mod extract;
mod id;
mod matrix;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::trace::SourceLocation;

pub use extract::{encode_projected, encode_run, extract_features, feature_universe, observe};
pub use matrix::{FeatureMatrix, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureClass {
    Line,
    Branch,
    Function,
    FunctionError,
    DefUse,
    Loop,
    Condition,
    ScalarPair,
    VariableValue,
    ReturnValue,
    NullValue,
    Length,
    EmptyString,
    AsciiString,
    DigitString,
    SpecialString,
    EmptyBytes,
}

impl FeatureClass {
    pub const ALL: [FeatureClass; 17] = [
        FeatureClass::Line,
        FeatureClass::Branch,
        FeatureClass::Function,
        FeatureClass::FunctionError,
        FeatureClass::DefUse,
        FeatureClass::Loop,
        FeatureClass::Condition,
        FeatureClass::ScalarPair,
        FeatureClass::VariableValue,
        FeatureClass::ReturnValue,
        FeatureClass::NullValue,
        FeatureClass::Length,
        FeatureClass::EmptyString,
        FeatureClass::AsciiString,
        FeatureClass::DigitString,
        FeatureClass::SpecialString,
        FeatureClass::EmptyBytes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureClass::Line => "line",
            FeatureClass::Branch => "branch",
            FeatureClass::Function => "function",
            FeatureClass::FunctionError => "function_error",
            FeatureClass::DefUse => "def_use",
            FeatureClass::Loop => "loop",
            FeatureClass::Condition => "condition",
            FeatureClass::ScalarPair => "scalar_pair",
            FeatureClass::VariableValue => "variable_value",
            FeatureClass::ReturnValue => "return_value",
            FeatureClass::NullValue => "null_value",
            FeatureClass::Length => "length",
            FeatureClass::EmptyString => "empty_string",
            FeatureClass::AsciiString => "ascii_string",
            FeatureClass::DigitString => "digit_string",
            FeatureClass::SpecialString => "special_string",
            FeatureClass::EmptyBytes => "empty_bytes",
        }
    }

    /// Binary classes are either satisfied or not; all others also carry an
    /// "unobserved" state.
    pub fn is_binary(self) -> bool {
        matches!(
            self,
            FeatureClass::Line
                | FeatureClass::Branch
                | FeatureClass::Function
                | FeatureClass::DefUse
                | FeatureClass::Loop
        )
    }

    /// Parses a comma-separated class list; `all` selects every class.
    pub fn parse_list(s: &str) -> Result<BTreeSet<FeatureClass>> {
        let mut out = BTreeSet::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(FeatureClass::ALL);
            } else {
                out.insert(part.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument("empty feature class list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for FeatureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.to_ascii_lowercase().replace('-', "_");
        FeatureClass::ALL
            .into_iter()
            .find(|c| c.name() == wanted)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown feature class {s:?}")))
    }
}

/// Comparison operators of scalar pairs.
///
/// The declaration order is the canonical order and therefore the order in
/// which equally good tree splits are preferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Comparison {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
    Ne,
}

impl Comparison {
    pub const ALL: [Comparison; 6] = [
        Comparison::Ge,
        Comparison::Gt,
        Comparison::Le,
        Comparison::Lt,
        Comparison::Eq,
        Comparison::Ne,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Ge => ">=",
            Comparison::Gt => ">",
            Comparison::Le => "<=",
            Comparison::Lt => "<",
            Comparison::Eq => "==",
            Comparison::Ne => "!=",
        }
    }

    /// Whether `left op right` holds given `left.cmp(right)`.
    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            Comparison::Ge => ord != Ordering::Less,
            Comparison::Gt => ord == Ordering::Greater,
            Comparison::Le => ord != Ordering::Greater,
            Comparison::Lt => ord == Ordering::Less,
            Comparison::Eq => ord == Ordering::Equal,
            Comparison::Ne => ord != Ordering::Equal,
        }
    }

    fn from_symbol(s: &str) -> Option<Self> {
        Comparison::ALL.into_iter().find(|c| c.symbol() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LoopArm {
    Zero,
    Once,
    Multiple,
}

impl LoopArm {
    pub const ALL: [LoopArm; 3] = [LoopArm::Zero, LoopArm::Once, LoopArm::Multiple];

    pub fn of(iterations: u64) -> Self {
        match iterations {
            0 => LoopArm::Zero,
            1 => LoopArm::Once,
            _ => LoopArm::Multiple,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LoopArm::Zero => "zero",
            LoopArm::Once => "once",
            LoopArm::Multiple => "multiple",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LengthArm {
    Zero,
    One,
    Many,
}

impl LengthArm {
    pub const ALL: [LengthArm; 3] = [LengthArm::Zero, LengthArm::One, LengthArm::Many];

    pub fn of(len: u64) -> Self {
        match len {
            0 => LengthArm::Zero,
            1 => LengthArm::One,
            _ => LengthArm::Many,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LengthArm::Zero => "zero",
            LengthArm::One => "one",
            LengthArm::Many => "many",
        }
    }
}

/// Sign predicates over numeric values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SignPredicate {
    IsZero,
    LtZero,
    GtZero,
}

impl SignPredicate {
    pub const ALL: [SignPredicate; 3] = [
        SignPredicate::IsZero,
        SignPredicate::LtZero,
        SignPredicate::GtZero,
    ];

    pub fn holds(self, sign: Option<Ordering>) -> bool {
        matches!(
            (self, sign),
            (SignPredicate::IsZero, Some(Ordering::Equal))
                | (SignPredicate::LtZero, Some(Ordering::Less))
                | (SignPredicate::GtZero, Some(Ordering::Greater))
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            SignPredicate::IsZero => "is_zero",
            SignPredicate::LtZero => "lt_zero",
            SignPredicate::GtZero => "gt_zero",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReturnPredicate {
    Sign(SignPredicate),
    IsNull,
}

impl ReturnPredicate {
    pub fn name(self) -> &'static str {
        match self {
            ReturnPredicate::Sign(s) => s.name(),
            ReturnPredicate::IsNull => "is_null",
        }
    }
}

/// Inclusive line range of a function body.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LineSpan {
    pub file: String,
    pub start: u32,
    pub end: u32,
}

/// A parameterized predicate over one execution. Class and parameters form
/// the identity; the derived order is the canonical universe order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    Line {
        loc: SourceLocation,
    },
    Branch {
        branch_id: u32,
        loc: SourceLocation,
    },
    Function {
        function_id: String,
        span: LineSpan,
    },
    FunctionError {
        function_id: String,
        span: LineSpan,
    },
    DefUse {
        var: String,
        def_loc: SourceLocation,
        use_loc: SourceLocation,
    },
    Loop {
        loop_id: u32,
        loc: SourceLocation,
        arm: LoopArm,
    },
    Condition {
        condition: String,
        loc: SourceLocation,
    },
    ScalarPair {
        left: String,
        right: String,
        op: Comparison,
        loc: SourceLocation,
    },
    VariableValue {
        var: String,
        predicate: SignPredicate,
        loc: SourceLocation,
    },
    ReturnValue {
        function_id: String,
        predicate: ReturnPredicate,
        loc: SourceLocation,
    },
    NullValue {
        var: String,
        loc: SourceLocation,
    },
    Length {
        var: String,
        arm: LengthArm,
        loc: SourceLocation,
    },
    EmptyString {
        var: String,
        loc: SourceLocation,
    },
    AsciiString {
        var: String,
        loc: SourceLocation,
    },
    DigitString {
        var: String,
        loc: SourceLocation,
    },
    SpecialString {
        var: String,
        loc: SourceLocation,
    },
    EmptyBytes {
        var: String,
        loc: SourceLocation,
    },
}

impl Feature {
    pub fn class(&self) -> FeatureClass {
        match self {
            Feature::Line { .. } => FeatureClass::Line,
            Feature::Branch { .. } => FeatureClass::Branch,
            Feature::Function { .. } => FeatureClass::Function,
            Feature::FunctionError { .. } => FeatureClass::FunctionError,
            Feature::DefUse { .. } => FeatureClass::DefUse,
            Feature::Loop { .. } => FeatureClass::Loop,
            Feature::Condition { .. } => FeatureClass::Condition,
            Feature::ScalarPair { .. } => FeatureClass::ScalarPair,
            Feature::VariableValue { .. } => FeatureClass::VariableValue,
            Feature::ReturnValue { .. } => FeatureClass::ReturnValue,
            Feature::NullValue { .. } => FeatureClass::NullValue,
            Feature::Length { .. } => FeatureClass::Length,
            Feature::EmptyString { .. } => FeatureClass::EmptyString,
            Feature::AsciiString { .. } => FeatureClass::AsciiString,
            Feature::DigitString { .. } => FeatureClass::DigitString,
            Feature::SpecialString { .. } => FeatureClass::SpecialString,
            Feature::EmptyBytes { .. } => FeatureClass::EmptyBytes,
        }
    }

    pub fn is_binary(&self) -> bool {
        self.class().is_binary()
    }

    /// Source lines this feature points at.
    pub fn locations(&self) -> BTreeSet<SourceLocation> {
        match self {
            Feature::Function { span, .. } | Feature::FunctionError { span, .. } => (span.start
                ..=span.end)
                .map(|line| SourceLocation::new(span.file.clone(), line))
                .collect(),
            Feature::DefUse {
                def_loc, use_loc, ..
            } => [def_loc.clone(), use_loc.clone()].into(),
            Feature::Line { loc }
            | Feature::Branch { loc, .. }
            | Feature::Loop { loc, .. }
            | Feature::Condition { loc, .. }
            | Feature::ScalarPair { loc, .. }
            | Feature::VariableValue { loc, .. }
            | Feature::ReturnValue { loc, .. }
            | Feature::NullValue { loc, .. }
            | Feature::Length { loc, .. }
            | Feature::EmptyString { loc, .. }
            | Feature::AsciiString { loc, .. }
            | Feature::DigitString { loc, .. }
            | Feature::SpecialString { loc, .. }
            | Feature::EmptyBytes { loc, .. } => [loc.clone()].into(),
        }
    }

    /// Canonical identifier, `class:param:param:...`.
    pub fn id(&self) -> String {
        id::encode(self)
    }

    pub fn from_id(s: &str) -> Result<Self> {
        id::decode(s)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::Line { loc } => write!(f, "Line({loc})"),
            Feature::Branch { branch_id, loc } => write!(f, "Branch({branch_id}) @ {loc}"),
            Feature::Function { function_id, span } => {
                write!(
                    f,
                    "Function({function_id}) @ {}:{}-{}",
                    span.file, span.start, span.end
                )
            }
            Feature::FunctionError { function_id, span } => write!(
                f,
                "FunctionError({function_id}) @ {}:{}-{}",
                span.file, span.start, span.end
            ),
            Feature::DefUse {
                var,
                def_loc,
                use_loc,
            } => write!(f, "DefUse({var}, {def_loc}, {use_loc})"),
            Feature::Loop { loop_id, loc, arm } => {
                write!(f, "Loop({loop_id}, {}) @ {loc}", arm.name())
            }
            Feature::Condition { condition, loc } => write!(f, "Condition({condition}) @ {loc}"),
            Feature::ScalarPair {
                left,
                right,
                op,
                loc,
            } => write!(f, "ScalarPair({left}{}{right}) @ {loc}", op.symbol()),
            Feature::VariableValue {
                var,
                predicate,
                loc,
            } => write!(f, "VariableValue({var}, {}) @ {loc}", predicate.name()),
            Feature::ReturnValue {
                function_id,
                predicate,
                loc,
            } => write!(
                f,
                "ReturnValue({function_id}, {}) @ {loc}",
                predicate.name()
            ),
            Feature::NullValue { var, loc } => write!(f, "NullValue({var}) @ {loc}"),
            Feature::Length { var, arm, loc } => write!(f, "Length({var}, {}) @ {loc}", arm.name()),
            Feature::EmptyString { var, loc } => write!(f, "EmptyString({var}) @ {loc}"),
            Feature::AsciiString { var, loc } => write!(f, "AsciiString({var}) @ {loc}"),
            Feature::DigitString { var, loc } => write!(f, "DigitString({var}) @ {loc}"),
            Feature::SpecialString { var, loc } => write!(f, "SpecialString({var}) @ {loc}"),
            Feature::EmptyBytes { var, loc } => write!(f, "EmptyBytes({var}) @ {loc}"),
        }
    }
}

/// Per-run value of one feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(i8)]
pub enum FeatureValue {
    Unobserved = -1,
    NotHolds = 0,
    Holds = 1,
}

impl FeatureValue {
    pub fn as_i8(self) -> i8 {
        self as i8
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            -1 => Some(FeatureValue::Unobserved),
            0 => Some(FeatureValue::NotHolds),
            1 => Some(FeatureValue::Holds),
            _ => None,
        }
    }

    pub fn is_satisfied(self) -> bool {
        self == FeatureValue::Holds
    }
}
