//! Request scripts and their line-oriented text format.
//!
//! A script is a header line followed by one event per line:
//!
//! ```text
//! page_size=10 label=bf_good seed=42
//! A 3 1
//! F 1
//! A 2 2
//! ```
//!
//! `A <size> <tag>` requests an allocation of `size` cells; `F <tag>` frees
//! the block allocated for that tag. Serialization round-trips byte-exactly.

use std::fmt;

use thiserror::Error;

/// One workload event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Alloc { size: usize, tag: u64 },
    Free { tag: u64 },
}

/// What a script was constructed to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptLabel {
    BfGood,
    WfGood,
    RandomSegment,
}

impl ScriptLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ScriptLabel::BfGood => "bf_good",
            ScriptLabel::WfGood => "wf_good",
            ScriptLabel::RandomSegment => "random_segment",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bf_good" => Some(ScriptLabel::BfGood),
            "wf_good" => Some(ScriptLabel::WfGood),
            "random_segment" => Some(ScriptLabel::RandomSegment),
            _ => None,
        }
    }
}

impl fmt::Display for ScriptLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A deterministic sequence of allocation and free events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestScript {
    pub page_size: usize,
    pub label: ScriptLabel,
    pub seed: u64,
    pub events: Vec<Event>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScriptParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("missing header line")]
    MissingHeader,
}

impl RequestScript {
    /// Serialize to the script file format.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "page_size={} label={} seed={}\n",
            self.page_size, self.label, self.seed
        );
        for event in &self.events {
            match event {
                Event::Alloc { size, tag } => out.push_str(&format!("A {size} {tag}\n")),
                Event::Free { tag } => out.push_str(&format!("F {tag}\n")),
            }
        }
        out
    }

    /// Parse the script file format.
    pub fn from_text(text: &str) -> Result<Self, ScriptParseError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(ScriptParseError::MissingHeader)?;
        let mut page_size = None;
        let mut label = None;
        let mut seed = None;
        for field in header.split_whitespace() {
            let (key, value) =
                field
                    .split_once('=')
                    .ok_or_else(|| ScriptParseError::Malformed {
                        line: 1,
                        msg: format!("header field `{field}` is not key=value"),
                    })?;
            match key {
                "page_size" => {
                    page_size =
                        Some(
                            value
                                .parse::<usize>()
                                .map_err(|_| ScriptParseError::Malformed {
                                    line: 1,
                                    msg: format!("bad page_size `{value}`"),
                                })?,
                        )
                }
                "label" => {
                    label = Some(ScriptLabel::parse(value).ok_or_else(|| {
                        ScriptParseError::Malformed {
                            line: 1,
                            msg: format!("unknown label `{value}`"),
                        }
                    })?)
                }
                "seed" => {
                    seed = Some(
                        value
                            .parse::<u64>()
                            .map_err(|_| ScriptParseError::Malformed {
                                line: 1,
                                msg: format!("bad seed `{value}`"),
                            })?,
                    )
                }
                other => {
                    return Err(ScriptParseError::Malformed {
                        line: 1,
                        msg: format!("unknown header key `{other}`"),
                    })
                }
            }
        }
        let page_size = page_size.ok_or(ScriptParseError::Malformed {
            line: 1,
            msg: "header lacks page_size".into(),
        })?;
        if page_size == 0 {
            return Err(ScriptParseError::Malformed {
                line: 1,
                msg: "page_size must be positive".into(),
            });
        }
        let label = label.ok_or(ScriptParseError::Malformed {
            line: 1,
            msg: "header lacks label".into(),
        })?;
        let seed = seed.ok_or(ScriptParseError::Malformed {
            line: 1,
            msg: "header lacks seed".into(),
        })?;

        let mut events = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let kind = parts.next().unwrap();
            let parse_u64 = |s: Option<&str>, what: &str| -> Result<u64, ScriptParseError> {
                s.and_then(|v| v.parse::<u64>().ok())
                    .ok_or_else(|| ScriptParseError::Malformed {
                        line: line_no,
                        msg: format!("bad or missing {what}"),
                    })
            };
            match kind {
                "A" => {
                    let size = parse_u64(parts.next(), "size")? as usize;
                    if size == 0 {
                        return Err(ScriptParseError::Malformed {
                            line: line_no,
                            msg: "allocation size must be positive".into(),
                        });
                    }
                    let tag = parse_u64(parts.next(), "tag")?;
                    events.push(Event::Alloc { size, tag });
                }
                "F" => {
                    let tag = parse_u64(parts.next(), "tag")?;
                    events.push(Event::Free { tag });
                }
                other => {
                    return Err(ScriptParseError::Malformed {
                        line: line_no,
                        msg: format!("unknown event kind `{other}`"),
                    })
                }
            }
            if parts.next().is_some() {
                return Err(ScriptParseError::Malformed {
                    line: line_no,
                    msg: "trailing fields".into(),
                });
            }
        }
        Ok(Self {
            page_size,
            label,
            seed,
            events,
        })
    }
}
