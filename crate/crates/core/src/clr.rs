//! `RAMSEY-CLR 1` text format.
//!
//! ```text
//! # optional comments, before the header only
//! RAMSEY-CLR 1 <m>
//! <row 0: f(0,1) f(0,2) … f(0,m-1)>
//! …
//! <row m-2: f(m-2,m-1)>
//! ```
//!
//! Rows are strings of `0`/`1` without separators; the file ends with a newline.

use std::io::{BufRead, Write};

use crate::colouring::Colouring;
use crate::error::{Error, Result};

const MAGIC: &str = "RAMSEY-CLR";
const VERSION: &str = "1";

pub fn write_clr<W: Write>(f: &Colouring, mut out: W) -> Result<()> {
    let m = f.m();
    writeln!(out, "{MAGIC} {VERSION} {m}")?;
    let mut line = String::with_capacity(m);
    for x in 0..m.saturating_sub(1) {
        line.clear();
        line.extend((x + 1..m).map(|y| if f.get(x, y) { '1' } else { '0' }));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn to_clr_string(f: &Colouring) -> String {
    let mut buf = Vec::new();
    write_clr(f, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CLR output is ASCII")
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

pub fn read_clr<R: BufRead>(input: R) -> Result<Colouring> {
    let mut lines = input.lines().enumerate();
    let m = loop {
        let Some((n, line)) = lines.next() else {
            return Err(parse_err(1, 1, "missing RAMSEY-CLR header"));
        };
        let line = line?;
        let lineno = n + 1;
        if line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(' ');
        if parts.next() != Some(MAGIC) {
            return Err(parse_err(lineno, 1, format!("expected `{MAGIC}` header")));
        }
        match parts.next() {
            Some(VERSION) => {}
            Some(v) => return Err(parse_err(lineno, MAGIC.len() + 2, format!("unsupported version `{v}`"))),
            None => return Err(parse_err(lineno, MAGIC.len() + 1, "missing version")),
        }
        let col = MAGIC.len() + VERSION.len() + 3;
        let m: usize = match parts.next() {
            Some(s) => s
                .parse()
                .map_err(|_| parse_err(lineno, col, format!("invalid vertex count `{s}`")))?,
            None => return Err(parse_err(lineno, col, "missing vertex count")),
        };
        if parts.next().is_some() {
            return Err(parse_err(lineno, col, "trailing tokens after vertex count"));
        }
        if m == 0 {
            return Err(parse_err(lineno, col, "vertex count must be at least 1"));
        }
        break (m, lineno);
    };
    let (m, header_line) = m;

    let mut f = Colouring::constant(m, false)?;
    for x in 0..m - 1 {
        let lineno = header_line + x + 1;
        let line = match lines.next() {
            Some((_, line)) => line?,
            None => {
                return Err(parse_err(
                    lineno,
                    1,
                    format!("truncated: expected {} rows, found {x}", m - 1),
                ))
            }
        };
        let expected = m - 1 - x;
        for (col, ch) in line.chars().enumerate() {
            if col >= expected {
                return Err(parse_err(
                    lineno,
                    col + 1,
                    format!("row too long, expected {expected} bits"),
                ));
            }
            match ch {
                '0' => {}
                '1' => f.set(x, x + 1 + col, true),
                other => return Err(parse_err(lineno, col + 1, format!("unexpected character `{other}`"))),
            }
        }
        let len = line.chars().count();
        if len < expected {
            return Err(parse_err(
                lineno,
                len + 1,
                format!("row too short, expected {expected} bits"),
            ));
        }
    }
    if let Some((n, line)) = lines.next() {
        let line = line?;
        if !line.is_empty() || lines.next().is_some() {
            return Err(parse_err(n + 1, 1, "unexpected content after last row"));
        }
    }
    Ok(f)
}

pub fn from_clr_str(s: &str) -> Result<Colouring> {
    read_clr(s.as_bytes())
}
