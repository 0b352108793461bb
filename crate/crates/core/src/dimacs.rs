//! DIMACS CNF reading and streaming writing.

use std::io::{self, BufRead, Write};

use crate::cnf::{CnfFormula, Literal};
use crate::error::{Error, Result};

/// Writes `p cnf <vars> <clauses>` followed by one zero-terminated clause per
/// line.
pub fn write_dimacs<W: Write>(f: &CnfFormula, w: W) -> io::Result<()> {
    write_dimacs_with_comments(f, &[], w)
}

/// Like [`write_dimacs`], preceded by one `c <line>` per comment.
pub fn write_dimacs_with_comments<W: Write>(
    f: &CnfFormula,
    comments: &[String],
    mut w: W,
) -> io::Result<()> {
    for c in comments {
        if c.is_empty() {
            w.write_all(b"c\n")?;
        } else {
            writeln!(w, "c {c}")?;
        }
    }
    writeln!(w, "p cnf {} {}", f.num_vars(), f.num_clauses())?;
    let mut line = String::with_capacity(256);
    for clause in f.clauses() {
        line.clear();
        for l in clause {
            push_int(&mut line, l.to_dimacs());
            line.push(' ');
        }
        line.push_str("0\n");
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

fn push_int(buf: &mut String, v: i32) {
    use std::fmt::Write as _;
    let _ = write!(buf, "{v}");
}

/// Parses DIMACS CNF. Clauses may span lines; every clause must end with `0`
/// and the clause count must match the header.
pub fn read_dimacs<R: BufRead>(r: R) -> Result<CnfFormula> {
    let mut formula: Option<(CnfFormula, usize)> = None;
    let mut clause: Vec<Literal> = Vec::new();
    let mut last_line = 0;
    for (no, line) in r.lines().enumerate() {
        let line_no = no + 1;
        last_line = line_no;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('c') {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        if t.starts_with('p') {
            if formula.is_some() {
                return Err(err("duplicate problem line".into()));
            }
            let parts: Vec<&str> = t.split_whitespace().collect();
            let [_, "cnf", vars, clauses] = parts.as_slice() else {
                return Err(err(format!("malformed problem line {t:?}")));
            };
            let vars: u32 = vars
                .parse()
                .ok()
                .filter(|&v| v <= i32::MAX as u32)
                .ok_or_else(|| err(format!("bad variable count {vars:?}")))?;
            let clauses: usize = clauses
                .parse()
                .map_err(|_| err(format!("bad clause count {clauses:?}")))?;
            formula = Some((
                CnfFormula::with_capacity(vars, clauses.min(1 << 24), 0),
                clauses,
            ));
            continue;
        }
        let Some((f, _)) = formula.as_mut() else {
            return Err(err("clause before problem line".into()));
        };
        for tok in t.split_whitespace() {
            let v: i32 = tok
                .parse()
                .map_err(|_| err(format!("bad literal {tok:?}")))?;
            if v == 0 {
                f.push_clause(&clause).map_err(|e| err(e.to_string()))?;
                clause.clear();
            } else {
                let l = Literal::from_dimacs(v)
                    .filter(|l| l.var() <= f.num_vars())
                    .ok_or_else(|| err(format!("literal {v} out of range")))?;
                clause.push(l);
            }
        }
    }
    let Some((f, declared)) = formula else {
        return Err(Error::Parse {
            line: last_line,
            message: "missing problem line".into(),
        });
    };
    if !clause.is_empty() {
        return Err(Error::Parse {
            line: last_line,
            message: "last clause is missing its 0 terminator".into(),
        });
    }
    if f.num_clauses() != declared {
        return Err(Error::Parse {
            line: last_line,
            message: format!(
                "header declares {declared} clauses, found {}",
                f.num_clauses()
            ),
        });
    }
    Ok(f)
}
