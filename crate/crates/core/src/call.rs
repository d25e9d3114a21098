//! `name(arg, arg, ...)` family selectors used by run configurations.

use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Arg {
    Number(f64),
    Text(String),
    /// `key=value` pair, used by check selectors.
    Named(String, Box<Arg>),
}

impl Arg {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Arg::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Arg::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Number(v) => write!(f, "{v}"),
            Arg::Text(s) => write!(f, "\"{s}\""),
            Arg::Named(k, v) => write!(f, "{k}={v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Call {
    pub name: String,
    pub args: Vec<Arg>,
}

impl Call {
    pub fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        let Some(open) = text.find('(') else {
            return if is_identifier(text) {
                Ok(Call { name: text.to_string(), args: Vec::new() })
            } else {
                Err(format!("`{text}` is not a family name"))
            };
        };
        if !text.ends_with(')') {
            return Err(format!("`{text}`: missing closing parenthesis"));
        }
        let name = text[..open].trim();
        if !is_identifier(name) {
            return Err(format!("`{name}` is not a family name"));
        }
        let inner = &text[open + 1..text.len() - 1];
        let args = split_top_level(inner)
            .into_iter()
            .filter(|s| !s.trim().is_empty())
            .map(|s| parse_arg(s.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Call { name: name.to_string(), args })
    }

    pub fn numbers(&self) -> Result<Vec<f64>, String> {
        self.args
            .iter()
            .map(|a| a.as_number().ok_or_else(|| format!("{}: expected numeric argument, got {a}", self.name)))
            .collect()
    }

    pub fn named(&self, key: &str) -> Option<&Arg> {
        self.args.iter().find_map(|a| match a {
            Arg::Named(k, v) if k == key => Some(v.as_ref()),
            _ => None,
        })
    }
}

impl fmt::Display for Call {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            return write!(f, "{}", self.name);
        }
        let args: Vec<String> = self.args.iter().map(|a| a.to_string()).collect();
        write!(f, "{}({})", self.name, args.join(", "))
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn parse_arg(s: &str) -> Result<Arg, String> {
    if let Some(stripped) = s.strip_prefix('"') {
        return stripped
            .strip_suffix('"')
            .map(|t| Arg::Text(t.to_string()))
            .ok_or_else(|| format!("unterminated string `{s}`"));
    }
    if let Some((k, v)) = s.split_once('=') {
        let k = k.trim();
        if is_identifier(k) {
            return Ok(Arg::Named(k.to_string(), Box::new(parse_arg(v.trim())?)));
        }
    }
    parse_number(s).map(Arg::Number).ok_or_else(|| format!("`{s}` is neither a number nor a quoted string"))
}

/// Parses a number, accepting the unicode minus sign.
pub fn parse_number(s: &str) -> Option<f64> {
    s.trim().replace('\u{2212}', "-").parse::<f64>().ok()
}

/// Splits on commas that are not nested in parentheses or quotes.
pub fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut quoted, mut start) = (0i32, false, 0);
    for (i, c) in s.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '(' if !quoted => depth += 1,
            ')' if !quoted => depth -= 1,
            ',' if !quoted && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_calls() {
        let c = Call::parse("torus_of_revolution(2, 1)").unwrap();
        assert_eq!(c.name, "torus_of_revolution");
        assert_eq!(c.numbers().unwrap(), vec![2.0, 1.0]);
        let c = Call::parse(r#"compressible("sin(2*pi*x)", "0")"#).unwrap();
        assert_eq!(c.args[0], Arg::Text("sin(2*pi*x)".into()));
        let c = Call::parse("oracle_l1(tol=1e-6, n=256)").unwrap();
        assert_eq!(c.named("n"), Some(&Arg::Number(256.0)));
        assert_eq!(Call::parse("burgers").unwrap().args.len(), 0);
        assert!(Call::parse("bad(1").is_err());
        assert_eq!(parse_number("1e\u{2212}6"), Some(1e-6));
    }
}
