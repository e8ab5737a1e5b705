//! Function mini-language.
//!
//! ```text
//! maj:n=101
//! parity:S=1,2,3;n=100
//! staircase:k=9;n=100
//! table:@path/to/file          (2^n characters '+' / '-', whitespace ignored)
//! extend:base=<spec>;N=10000
//! <spec>|perm:seed=7           (uniform permutation from the seed)
//! <spec>|perm:map=2,3,1        (explicit, 1-based)
//! ```
//!
//! Parentheses group a sub-spec, e.g. `extend:base=(maj:n=3|perm:seed=1);N=30`.

use std::path::Path;

use super::{BooleanFunction, Permutation};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// A parsed function together with any convention warnings it triggered.
#[derive(Clone, Debug)]
pub struct FunctionSpec {
    pub text: String,
    pub function: BooleanFunction,
    pub warnings: Vec<String>,
}

pub fn parse_function(text: &str) -> Result<BooleanFunction> {
    FunctionSpec::parse(text).map(|s| s.function)
}

impl FunctionSpec {
    pub fn parse(text: &str) -> Result<FunctionSpec> {
        let mut warnings = Vec::new();
        let function = parse_pipeline(text.trim(), &mut warnings)?;
        Ok(FunctionSpec {
            text: text.trim().to_string(),
            function,
            warnings,
        })
    }
}

fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn strip_parens(s: &str) -> &str {
    let t = s.trim();
    if t.starts_with('(') && t.ends_with(')') {
        // only strip when the parentheses enclose the whole string
        let inner = &t[1..t.len() - 1];
        let mut depth = 0i32;
        for c in inner.chars() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth < 0 {
                        return t;
                    }
                }
                _ => {}
            }
        }
        return strip_parens(inner);
    }
    t
}

fn parse_pipeline(text: &str, warnings: &mut Vec<String>) -> Result<BooleanFunction> {
    let stages = split_top(strip_parens(text), '|');
    let mut f = parse_term(strip_parens(stages[0]), warnings)?;
    for stage in &stages[1..] {
        f = apply_perm(&f, stage.trim())?;
    }
    Ok(f)
}

fn apply_perm(f: &BooleanFunction, stage: &str) -> Result<BooleanFunction> {
    let body = stage
        .strip_prefix("perm:")
        .ok_or_else(|| Error::parse(stage, "only `perm:` stages may follow `|`"))?;
    let kv = key_values(stage, body)?;
    if let Some(seed) = kv.iter().find(|(k, _)| *k == "seed") {
        let seed: u64 = parse_num(stage, seed.1)?;
        let perm = Permutation::random(f.n(), &mut stream_rng(seed, Stream::Orbit, 0));
        return f.permute(&perm);
    }
    if let Some(map) = kv.iter().find(|(k, _)| *k == "map") {
        let idx = parse_list(stage, map.1)?;
        let perm = Permutation::new(idx)?;
        return f.permute(&perm);
    }
    Err(Error::parse(stage, "perm needs `seed=` or `map=`"))
}

fn key_values<'a>(whole: &str, body: &'a str) -> Result<Vec<(&'a str, &'a str)>> {
    split_top(body, ';')
        .into_iter()
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::parse(whole, format!("expected key=value, got `{p}`")))
        })
        .collect()
}

fn parse_num<T: std::str::FromStr>(whole: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::parse(whole, format!("bad number `{v}`")))
}

/// 1-based comma list to 0-based indices.
fn parse_list(whole: &str, v: &str) -> Result<Vec<usize>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let i: usize = parse_num(whole, s)?;
            if i == 0 {
                return Err(Error::parse(whole, "indices are 1-based"));
            }
            Ok(i - 1)
        })
        .collect()
}

fn get<'a>(whole: &str, kv: &[(&str, &'a str)], key: &str) -> Result<&'a str> {
    kv.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::parse(whole, format!("missing `{key}=`")))
}

fn parse_term(text: &str, warnings: &mut Vec<String>) -> Result<BooleanFunction> {
    let (head, body) = text
        .split_once(':')
        .ok_or_else(|| Error::parse(text, "expected `<kind>:<params>`"))?;
    match head.trim() {
        "maj" => {
            let kv = key_values(text, body)?;
            let n: usize = parse_num(text, get(text, &kv, "n")?)?;
            if n.is_multiple_of(2) {
                warnings.push(format!("maj:n={n}: even n: sign(0):=+1 convention applies"));
            }
            BooleanFunction::majority(n)
        }
        "parity" => {
            let kv = key_values(text, body)?;
            let n: usize = parse_num(text, get(text, &kv, "n")?)?;
            let s = parse_list(text, get(text, &kv, "S")?)?;
            BooleanFunction::monomial(n, &s)
        }
        "staircase" => {
            let kv = key_values(text, body)?;
            let k: usize = parse_num(text, get(text, &kv, "k")?)?;
            let n: usize = match kv.iter().find(|(key, _)| *key == "n") {
                Some((_, v)) => parse_num(text, v)?,
                None => k,
            };
            if k.is_multiple_of(2) {
                warnings.push(format!(
                    "staircase:k={k}: even k: the defining sum can vanish, sign(0):=+1 applies"
                ));
            }
            BooleanFunction::staircase(k, n)
        }
        "table" => {
            let path = body
                .trim()
                .strip_prefix('@')
                .ok_or_else(|| Error::parse(text, "table expects `@path`"))?;
            read_table(Path::new(path))
        }
        "extend" => {
            // base=<spec>;N=<int>, with N taken from the last `;N=`
            let rest = body
                .trim()
                .strip_prefix("base=")
                .ok_or_else(|| Error::parse(text, "extend expects `base=<spec>;N=<int>`"))?;
            let cut = rest
                .rfind(";N=")
                .ok_or_else(|| Error::parse(text, "extend needs `;N=`"))?;
            let base = parse_pipeline(&rest[..cut], warnings)?;
            let big_n: usize = parse_num(text, &rest[cut + 3..])?;
            base.extend(big_n)
        }
        other => Err(Error::parse(text, format!("unknown function kind `{other}`"))),
    }
}

/// Reads `2^n` characters `+` / `-` (or `−`), ignoring whitespace.
pub fn read_table(path: &Path) -> Result<BooleanFunction> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut table = Vec::with_capacity(raw.len());
    for c in raw.chars().filter(|c| !c.is_whitespace()) {
        match c {
            '+' => table.push(1),
            '-' | '−' => table.push(-1),
            _ => {
                return Err(Error::parse(
                    path.display().to_string(),
                    format!("unexpected character `{c}` in truth table"),
                ))
            }
        }
    }
    BooleanFunction::from_table(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn basic_forms() {
        let f = parse_function("maj:n=101").unwrap();
        assert_eq!(f.n(), 101);
        let p = parse_function("parity:S=1,2,3;n=100").unwrap();
        assert_eq!(p.monomial_support().unwrap(), &[0, 1, 2]);
        let s = parse_function("staircase:k=9;n=100").unwrap();
        assert_eq!(s.staircase_order(), Some(9));
        assert_eq!(s.n(), 100);
    }

    #[test]
    fn extend_and_perm_compose() {
        let f = parse_function("extend:base=parity:S=1,2;n=4;N=16").unwrap();
        assert_eq!(f.n(), 16);
        assert_eq!(f.base().unwrap().n(), 4);
        let g = parse_function("extend:base=(maj:n=3|perm:seed=1);N=30|perm:seed=7").unwrap();
        assert_eq!(g.n(), 30);
        assert!(g.permutation().is_some());
        let h = parse_function("parity:S=1;n=3|perm:map=2,3,1").unwrap();
        // (f∘π)(x) = x_{π(1)} = x_2
        assert_eq!(h.eval(&[1, -1, 1]).unwrap(), -1);
    }

    #[test]
    fn warnings_for_tie_conventions() {
        let s = FunctionSpec::parse("maj:n=100").unwrap();
        assert!(s.warnings[0].contains("even n: sign(0):=+1 convention applies"));
        assert!(FunctionSpec::parse("maj:n=101").unwrap().warnings.is_empty());
        assert!(!FunctionSpec::parse("staircase:k=4;n=6").unwrap().warnings.is_empty());
    }

    #[test]
    fn table_file() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "+--+").unwrap();
        let f = parse_function(&format!("table:@{}", file.path().display())).unwrap();
        assert_eq!(f.n(), 2);
        assert_eq!(f.eval(&[-1, -1]).unwrap(), 1);
        assert_eq!(f.eval(&[-1, 1]).unwrap(), -1);
        assert!(matches!(
            parse_function("table:@/definitely/missing"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn errors() {
        assert!(parse_function("maj").is_err());
        assert!(parse_function("parity:S=0;n=3").is_err());
        assert!(parse_function("parity:S=4;n=3").is_err());
        assert!(parse_function("bogus:n=3").is_err());
        assert!(parse_function("extend:base=maj:n=3;N=2").is_err());
        assert!(parse_function("maj:n=3|shuffle").is_err());
    }
}
