//! The line-oriented operation trace format shared by the engine, the
//! reference oracle, and the command-line harness.
//!
//! One operation per line, ASCII, space-separated, `#` starts a comment
//! line and blank lines are skipped:
//!
//! ```text
//! makeset 5
//! makeset 9
//! merge 1 2
//! search 3 7
//! split 3 5
//! shift 4 -2
//! ```
//!
//! Result ids are implicit: sets are numbered 1, 2, 3, … in creation order,
//! split assigns the `≤` part the lower of its two fresh ids, and merge
//! mints one fresh id. This makes traces replayable and diffable across the
//! engine and the oracle.

use crate::family::SetId;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TraceOp {
    MakeSet { key: i64 },
    Search { set: SetId, key: i64 },
    Split { set: SetId, key: i64 },
    Merge { a: SetId, b: SetId },
    Shift { set: SetId, delta: i64 },
}

impl TraceOp {
    pub fn kind(&self) -> &'static str {
        match self {
            TraceOp::MakeSet { .. } => "makeset",
            TraceOp::Search { .. } => "search",
            TraceOp::Split { .. } => "split",
            TraceOp::Merge { .. } => "merge",
            TraceOp::Shift { .. } => "shift",
        }
    }
}

impl fmt::Display for TraceOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceOp::MakeSet { key } => write!(f, "makeset {key}"),
            TraceOp::Search { set, key } => write!(f, "search {set} {key}"),
            TraceOp::Split { set, key } => write!(f, "split {set} {key}"),
            TraceOp::Merge { a, b } => write!(f, "merge {a} {b}"),
            TraceOp::Shift { set, delta } => write!(f, "shift {set} {delta}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
#[error("trace line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

fn bad(line: usize, reason: impl Into<String>) -> ParseError {
    ParseError {
        line,
        reason: reason.into(),
    }
}

/// Parse a whole trace. Malformed lines are rejected with their 1-based
/// line number.
pub fn parse_trace(text: &str) -> Result<Vec<TraceOp>, ParseError> {
    let mut ops = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_ascii_whitespace();
        let kind = parts.next().expect("non-empty line has a first token");
        let args: Vec<&str> = parts.collect();
        let arity = match kind {
            "makeset" => 1,
            "search" | "split" | "shift" => 2,
            "merge" => 2,
            other => return Err(bad(line_no, format!("unknown operation '{other}'"))),
        };
        if args.len() != arity {
            return Err(bad(
                line_no,
                format!("'{kind}' expects {arity} argument(s), got {}", args.len()),
            ));
        }
        let int = |s: &str, what: &str| -> Result<i64, ParseError> {
            s.parse::<i64>()
                .map_err(|_| bad(line_no, format!("invalid {what} '{s}'")))
        };
        let set_id = |s: &str| -> Result<SetId, ParseError> {
            let v = s
                .parse::<u64>()
                .map_err(|_| bad(line_no, format!("invalid set id '{s}'")))?;
            if v == 0 {
                return Err(bad(line_no, "set ids start at 1"));
            }
            Ok(SetId(v))
        };
        let op = match kind {
            "makeset" => TraceOp::MakeSet {
                key: int(args[0], "key")?,
            },
            "search" => TraceOp::Search {
                set: set_id(args[0])?,
                key: int(args[1], "key")?,
            },
            "split" => TraceOp::Split {
                set: set_id(args[0])?,
                key: int(args[1], "key")?,
            },
            "merge" => TraceOp::Merge {
                a: set_id(args[0])?,
                b: set_id(args[1])?,
            },
            "shift" => TraceOp::Shift {
                set: set_id(args[0])?,
                delta: int(args[1], "shift amount")?,
            },
            _ => unreachable!("kind validated above"),
        };
        ops.push(op);
    }
    Ok(ops)
}

/// Render ops back into the line format (inverse of `parse_trace`).
pub fn format_trace(ops: &[TraceOp]) -> String {
    let mut out = String::new();
    for op in ops {
        out.push_str(&op.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_basic_trace() {
        let ops = parse_trace("makeset 5\nmakeset 9\nmerge 1 2\nsearch 3 7\n").unwrap();
        assert_eq!(ops.len(), 4);
        assert_eq!(
            ops[2],
            TraceOp::Merge {
                a: SetId(1),
                b: SetId(2)
            }
        );
        assert_eq!(
            ops[3],
            TraceOp::Search {
                set: SetId(3),
                key: 7
            }
        );
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let ops = parse_trace("# header\n\nmakeset -5\n  # indented comment\n").unwrap();
        assert_eq!(ops, vec![TraceOp::MakeSet { key: -5 }]);
    }

    #[test]
    fn missing_argument_is_rejected_with_line_number() {
        let err = parse_trace("makeset 1\nsplit 1\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.reason.contains("expects 2"));
    }

    #[test]
    fn unknown_ops_and_bad_numbers_are_rejected() {
        assert!(parse_trace("frobnicate 1\n").is_err());
        assert!(parse_trace("makeset abc\n").is_err());
        assert!(parse_trace("merge 0 1\n").is_err());
        assert!(parse_trace("shift 1 2 3\n").is_err());
    }

    #[test]
    fn round_trips_through_format() {
        let text = "makeset 5\nmakeset 9\nmerge 1 2\nshift 3 -4\nsearch 3 7\nsplit 3 5\n";
        let ops = parse_trace(text).unwrap();
        assert_eq!(format_trace(&ops), text);
    }
}
