//! Plain-text algorithm format.
//!
//! ```text
//! # comment lines and trailing comments are ignored
//! name: bini-322-encA        (optional)
//! 3 2 2 10                   m n p q
//! U
//! 0: 0=1 2=1 4=1             row: col=coeff ...   (0-based, sparse)
//! 1: 3=1*l^1 4=1*l^1
//! ...
//! V
//! ...
//! W
//! ...
//! ```
//!
//! A coefficient is a sum of terms joined by `+`, each `num[/den][*l^k]`
//! where `l` stands for λ and `k` may be negative. Rows may be omitted or
//! left empty (`5:`) when all zero. [`print`] emits the canonical form:
//! every row listed, columns ascending, coefficients in canonical
//! [`Laurent`] notation, so `parse(print(a)) == a` holds exactly.

use std::fmt::Write as _;

use crate::algorithm::{BilinearAlgorithm, CoefMatrix};
use crate::error::{Error, Result};
use crate::laurent::Laurent;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses the text format. `default_name` is used when no `name:` line is present.
pub fn parse(text: &str, default_name: &str) -> Result<BilinearAlgorithm> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();

    let mut name = default_name.to_string();
    if let Some((_, l)) = lines.peek() {
        if let Some(rest) = l.strip_prefix("name:") {
            name = rest.trim().to_string();
            lines.next();
        }
    }

    let (hline, header) = lines.next().ok_or_else(|| perr(0, "missing `m n p q` header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|x| x.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| perr(hline, format!("bad header `{header}`")))?;
    let [m, n, p, q] = dims[..] else {
        return Err(perr(hline, "header must have exactly four integers `m n p q`"));
    };
    if m == 0 || n == 0 || p == 0 || q == 0 {
        return Err(perr(hline, "dimensions must be positive"));
    }

    let mut mats = Vec::with_capacity(3);
    for (label, rows) in [("U", m * n), ("V", n * p), ("W", m * p)] {
        match lines.next() {
            Some((_, l)) if l == label => {}
            Some((ln, l)) => return Err(perr(ln, format!("expected block `{label}`, got `{l}`"))),
            None => return Err(perr(0, format!("missing block `{label}`"))),
        }
        let mut triples = Vec::new();
        let mut seen = vec![false; rows];
        while let Some(&(ln, l)) = lines.peek() {
            if matches!(l, "U" | "V" | "W") {
                break;
            }
            lines.next();
            let (r, rest) = l
                .split_once(':')
                .ok_or_else(|| perr(ln, format!("expected `row: col=coeff ...`, got `{l}`")))?;
            let r: usize = r
                .trim()
                .parse()
                .map_err(|_| perr(ln, format!("bad row index `{}`", r.trim())))?;
            if r >= rows {
                return Err(perr(ln, format!("row {r} out of range for {label} ({rows} rows)")));
            }
            if std::mem::replace(&mut seen[r], true) {
                return Err(perr(ln, format!("row {r} of {label} listed twice")));
            }
            for ent in rest.split_whitespace() {
                let (c, x) = ent
                    .split_once('=')
                    .ok_or_else(|| perr(ln, format!("expected `col=coeff`, got `{ent}`")))?;
                let c: usize = c.parse().map_err(|_| perr(ln, format!("bad column `{c}`")))?;
                if c >= q {
                    return Err(perr(ln, format!("column {c} out of range (q = {q})")));
                }
                let x: Laurent = x.parse().map_err(|e: String| perr(ln, e))?;
                triples.push((r, c, x));
            }
        }
        mats.push(CoefMatrix::from_triples(rows, q, triples)?);
    }
    if let Some((ln, l)) = lines.next() {
        return Err(perr(ln, format!("unexpected trailing content `{l}`")));
    }
    let w = mats.pop().unwrap();
    let v = mats.pop().unwrap();
    let u = mats.pop().unwrap();
    BilinearAlgorithm::new(name, (m, n, p), u, v, w)
}

/// Canonical text form.
pub fn print(alg: &BilinearAlgorithm) -> String {
    let mut s = String::new();
    writeln!(s, "name: {}", alg.name).unwrap();
    writeln!(s, "{} {} {} {}", alg.m, alg.n, alg.p, alg.q()).unwrap();
    for (label, mat) in [("U", &alg.u), ("V", &alg.v), ("W", &alg.w)] {
        writeln!(s, "{label}").unwrap();
        for (r, row) in mat.rows().into_iter().enumerate() {
            write!(s, "{r}:").unwrap();
            for (c, x) in row {
                write!(s, " {c}={x}").unwrap();
            }
            s.push('\n');
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "\
# scalar product
1 1 1 1
U
0: 0=1
V
0: 0=1
W
0: 0=1
";

    #[test]
    fn parses_without_name_line() {
        let a = parse(TINY, "unit").unwrap();
        assert_eq!(a.name, "unit");
        assert!(a.validate().unwrap().exact);
        assert_eq!(print(&a), "name: unit\n1 1 1 1\nU\n0: 0=1\nV\n0: 0=1\nW\n0: 0=1\n");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = TINY.replace("0: 0=1\nW", "0: 3=1\nW");
        match parse(&bad, "x") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("1 1 1\n", "x"), Err(Error::Parse { .. })));
        assert!(matches!(parse(&TINY.replace("0=1\nV", "0=1/0\nV"), "x"), Err(Error::Parse { .. })));
    }

    #[test]
    fn omitted_rows_are_zero() {
        let text = "2 1 1 1\nU\n1: 0=1\nV\n0: 0=1\nW\n0:\n1: 0=1\n";
        let a = parse(text, "x").unwrap();
        assert!(a.u.get(0, 0).is_zero());
        assert_eq!(parse(&print(&a), "y").unwrap(), a);
    }
}
