//! Canonical textual feature identifiers.
//!
//! Components are joined with `:`. Free-text components (file names,
//! variables, condition text) escape `%`, `:`, `;` and line breaks as `%XX`.

use super::{Comparison, Feature, LengthArm, LineSpan, LoopArm, ReturnPredicate, SignPredicate};
use crate::error::{Error, Result};
use crate::trace::SourceLocation;

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '%' => out.push_str("%25"),
            ':' => out.push_str("%3A"),
            ';' => out.push_str("%3B"),
            '\n' => out.push_str("%0A"),
            '\r' => out.push_str("%0D"),
            c => out.push(c),
        }
    }
    out
}

fn unesc(s: &str) -> Result<String> {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(pos) = rest.find('%') {
        out.push_str(&rest[..pos]);
        let code = rest
            .get(pos + 1..pos + 3)
            .ok_or_else(|| Error::format(format!("truncated escape in {s:?}")))?;
        out.push(match code {
            "25" => '%',
            "3A" => ':',
            "3B" => ';',
            "0A" => '\n',
            "0D" => '\r',
            _ => return Err(Error::format(format!("unknown escape %{code} in {s:?}"))),
        });
        rest = &rest[pos + 3..];
    }
    out.push_str(rest);
    Ok(out)
}

fn loc(l: &SourceLocation) -> String {
    format!("{}:{}", esc(&l.file), l.line)
}

pub(super) fn encode(f: &Feature) -> String {
    let class = f.class().name();
    let params = match f {
        Feature::Line { loc: l } => loc(l),
        Feature::Branch { branch_id, loc: l } => format!("{branch_id}:{}", loc(l)),
        Feature::Function { function_id, span } | Feature::FunctionError { function_id, span } => {
            format!(
                "{}:{}:{}:{}",
                esc(function_id),
                esc(&span.file),
                span.start,
                span.end
            )
        }
        Feature::DefUse {
            var,
            def_loc,
            use_loc,
        } => format!("{}:{}:{}", esc(var), loc(def_loc), loc(use_loc)),
        Feature::Loop {
            loop_id,
            loc: l,
            arm,
        } => format!("{loop_id}:{}:{}", loc(l), arm.name()),
        Feature::Condition { condition, loc: l } => format!("{}:{}", esc(condition), loc(l)),
        Feature::ScalarPair {
            left,
            right,
            op,
            loc: l,
        } => format!("{}:{}:{}:{}", esc(left), esc(right), op.symbol(), loc(l)),
        Feature::VariableValue {
            var,
            predicate,
            loc: l,
        } => format!("{}:{}:{}", esc(var), predicate.name(), loc(l)),
        Feature::ReturnValue {
            function_id,
            predicate,
            loc: l,
        } => format!("{}:{}:{}", esc(function_id), predicate.name(), loc(l)),
        Feature::Length { var, arm, loc: l } => format!("{}:{}:{}", esc(var), arm.name(), loc(l)),
        Feature::NullValue { var, loc: l }
        | Feature::EmptyString { var, loc: l }
        | Feature::AsciiString { var, loc: l }
        | Feature::DigitString { var, loc: l }
        | Feature::SpecialString { var, loc: l }
        | Feature::EmptyBytes { var, loc: l } => format!("{}:{}", esc(var), loc(l)),
    };
    format!("{class}:{params}")
}

struct Parts<'a> {
    id: &'a str,
    items: std::vec::IntoIter<&'a str>,
}

impl<'a> Parts<'a> {
    fn bad(&self) -> Error {
        Error::format(format!("malformed feature id {:?}", self.id))
    }

    fn raw(&mut self) -> Result<&'a str> {
        self.items.next().ok_or_else(|| self.bad())
    }

    fn text(&mut self) -> Result<String> {
        unesc(self.raw()?)
    }

    fn num(&mut self) -> Result<u32> {
        self.raw()?.parse().map_err(|_| self.bad())
    }

    fn loc(&mut self) -> Result<SourceLocation> {
        let file = self.text()?;
        let line = self.num()?;
        if file.is_empty() || line == 0 {
            return Err(self.bad());
        }
        Ok(SourceLocation { file, line })
    }

    fn pick<T: Copy>(&mut self, options: &[T], name: impl Fn(T) -> &'static str) -> Result<T> {
        let raw = self.raw()?;
        options
            .iter()
            .copied()
            .find(|o| name(*o) == raw)
            .ok_or_else(|| self.bad())
    }

    fn finish(mut self, f: Feature) -> Result<Feature> {
        if self.items.next().is_some() {
            return Err(self.bad());
        }
        Ok(f)
    }
}

pub(super) fn decode(id: &str) -> Result<Feature> {
    let mut p = Parts {
        id,
        items: id.split(':').collect::<Vec<_>>().into_iter(),
    };
    let class = p.raw()?;
    let f = match class {
        "line" => Feature::Line { loc: p.loc()? },
        "branch" => Feature::Branch {
            branch_id: p.num()?,
            loc: p.loc()?,
        },
        "function" | "function_error" => {
            let function_id = p.text()?;
            let span = LineSpan {
                file: p.text()?,
                start: p.num()?,
                end: p.num()?,
            };
            if span.start == 0 || span.end < span.start {
                return Err(p.bad());
            }
            if class == "function" {
                Feature::Function { function_id, span }
            } else {
                Feature::FunctionError { function_id, span }
            }
        }
        "def_use" => Feature::DefUse {
            var: p.text()?,
            def_loc: p.loc()?,
            use_loc: p.loc()?,
        },
        "loop" => Feature::Loop {
            loop_id: p.num()?,
            loc: p.loc()?,
            arm: p.pick(&LoopArm::ALL, LoopArm::name)?,
        },
        "condition" => Feature::Condition {
            condition: p.text()?,
            loc: p.loc()?,
        },
        "scalar_pair" => {
            let left = p.text()?;
            let right = p.text()?;
            let raw = p.raw()?;
            let op = Comparison::from_symbol(raw).ok_or_else(|| p.bad())?;
            Feature::ScalarPair {
                left,
                right,
                op,
                loc: p.loc()?,
            }
        }
        "variable_value" => Feature::VariableValue {
            var: p.text()?,
            predicate: p.pick(&SignPredicate::ALL, SignPredicate::name)?,
            loc: p.loc()?,
        },
        "return_value" => {
            let function_id = p.text()?;
            let options = [
                ReturnPredicate::Sign(SignPredicate::IsZero),
                ReturnPredicate::Sign(SignPredicate::LtZero),
                ReturnPredicate::Sign(SignPredicate::GtZero),
                ReturnPredicate::IsNull,
            ];
            Feature::ReturnValue {
                function_id,
                predicate: p.pick(&options, ReturnPredicate::name)?,
                loc: p.loc()?,
            }
        }
        "length" => Feature::Length {
            var: p.text()?,
            arm: p.pick(&LengthArm::ALL, LengthArm::name)?,
            loc: p.loc()?,
        },
        "null_value" | "empty_string" | "ascii_string" | "digit_string" | "special_string"
        | "empty_bytes" => {
            let var = p.text()?;
            let loc = p.loc()?;
            match class {
                "null_value" => Feature::NullValue { var, loc },
                "empty_string" => Feature::EmptyString { var, loc },
                "ascii_string" => Feature::AsciiString { var, loc },
                "digit_string" => Feature::DigitString { var, loc },
                "special_string" => Feature::SpecialString { var, loc },
                _ => Feature::EmptyBytes { var, loc },
            }
        }
        _ => return Err(Error::format(format!("unknown feature class in id {id:?}"))),
    };
    p.finish(f)
}
