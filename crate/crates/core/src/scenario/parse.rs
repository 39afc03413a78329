//! The declarative tree format scenario files are written in.
//!
//! A file is a tree of nodes. Each line is either a leaf — a key followed by
//! whitespace-separated arguments — or opens a block with a trailing `{`,
//! closed by a lone `}`. Double quotes group an argument containing spaces;
//! `#` starts a comment. Every node remembers its line number so loading
//! errors can point at the offending line.
//!
//! ```text
//! scenario "virtual-currency" {
//!     creation consensus-based        # a leaf with two tokens
//!     parties {
//!         group "holder" count 12 start-id 101
//!     }
//! }
//! ```

use super::ScenarioError;

/// One node of a scenario file: leaf or block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub key: String,
    pub args: Vec<String>,
    pub children: Vec<Node>,
    /// 1-based line the node starts on.
    pub line: usize,
}

impl Node {
    fn new(key: String, args: Vec<String>, line: usize) -> Self {
        Node {
            key,
            args,
            children: Vec::new(),
            line,
        }
    }

    pub fn is_block(&self) -> bool {
        !self.children.is_empty()
    }

    /// The first child with this key, if any.
    pub fn child(&self, key: &str) -> Option<&Node> {
        self.children.iter().find(|c| c.key == key)
    }

    /// All children with this key, in file order.
    pub fn children_named<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Node> {
        self.children.iter().filter(move |c| c.key == key)
    }

    pub fn require_child(&self, key: &str) -> Result<&Node, ScenarioError> {
        self.child(key).ok_or_else(|| {
            ScenarioError::invalid(self.line, format!("`{}` requires a `{key}` entry", self.key))
        })
    }

    /// Positional argument `i`, or an error naming the node.
    pub fn arg(&self, i: usize) -> Result<&str, ScenarioError> {
        self.args.get(i).map(String::as_str).ok_or_else(|| {
            ScenarioError::invalid(
                self.line,
                format!("`{}` needs at least {} argument(s)", self.key, i + 1),
            )
        })
    }

    pub fn int_arg(&self, i: usize) -> Result<i64, ScenarioError> {
        let raw = self.arg(i)?;
        raw.parse::<i64>().map_err(|_| {
            ScenarioError::invalid(self.line, format!("`{}`: expected an integer, got {raw:?}", self.key))
        })
    }

    pub fn uint_arg(&self, i: usize) -> Result<u64, ScenarioError> {
        let v = self.int_arg(i)?;
        if v < 0 {
            return Err(ScenarioError::invalid(
                self.line,
                format!("`{}`: expected a non-negative integer, got {v}", self.key),
            ));
        }
        Ok(v as u64)
    }

    pub fn bool_arg(&self, i: usize) -> Result<bool, ScenarioError> {
        match self.arg(i)? {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(ScenarioError::invalid(
                self.line,
                format!("`{}`: expected true or false, got {other:?}", self.key),
            )),
        }
    }

    /// Value of a leaf child: `key <value>`.
    pub fn leaf_str(&self, key: &str) -> Result<&str, ScenarioError> {
        self.require_child(key)?.arg(0)
    }

    pub fn leaf_str_opt(&self, key: &str) -> Result<Option<&str>, ScenarioError> {
        self.child(key).map(|c| c.arg(0)).transpose()
    }

    pub fn leaf_uint(&self, key: &str) -> Result<u64, ScenarioError> {
        self.require_child(key)?.uint_arg(0)
    }

    pub fn leaf_uint_or(&self, key: &str, default: u64) -> Result<u64, ScenarioError> {
        match self.child(key) {
            Some(c) => c.uint_arg(0),
            None => Ok(default),
        }
    }

    pub fn leaf_int_or(&self, key: &str, default: i64) -> Result<i64, ScenarioError> {
        match self.child(key) {
            Some(c) => c.int_arg(0),
            None => Ok(default),
        }
    }

    /// Reject children whose key is not in `allowed`, pointing at the line.
    pub fn expect_keys(&self, allowed: &[&str]) -> Result<(), ScenarioError> {
        for c in &self.children {
            if !allowed.contains(&c.key.as_str()) {
                return Err(ScenarioError::invalid(
                    c.line,
                    format!(
                        "unknown entry `{}` in `{}` (expected one of: {})",
                        c.key,
                        self.key,
                        allowed.join(", ")
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Split one line into tokens plus whether it opens a block. `None` for
/// blank/comment lines; a lone `}` yields an empty token list.
fn tokenize(line: &str, number: usize) -> Result<Option<(Vec<String>, bool)>, ScenarioError> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    let mut current = String::new();
    let mut in_quotes = false;
    let mut any = false;

    while let Some(c) = chars.next() {
        if in_quotes {
            if c == '"' {
                in_quotes = false;
                tokens.push(std::mem::take(&mut current));
            } else {
                current.push(c);
            }
            continue;
        }
        match c {
            '#' => break,
            '"' => {
                if !current.is_empty() {
                    return Err(ScenarioError::parse(
                        number,
                        "quotes must start a fresh token".to_string(),
                    ));
                }
                in_quotes = true;
                any = true;
            }
            c if c.is_whitespace() => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            '{' | '}' => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
                any = true;
                // Nothing but whitespace/comment may follow a brace.
                let rest: String = chars.by_ref().collect();
                let rest = rest.split('#').next().unwrap_or("");
                if !rest.trim().is_empty() {
                    return Err(ScenarioError::parse(
                        number,
                        format!("unexpected content after `{c}`: {:?}", rest.trim()),
                    ));
                }
                break;
            }
            c => {
                current.push(c);
                any = true;
            }
        }
    }
    if in_quotes {
        return Err(ScenarioError::parse(number, "unclosed quote".to_string()));
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    if tokens.is_empty() && !any {
        return Ok(None);
    }

    let opens = tokens.last().map(|t| t == "{").unwrap_or(false);
    if opens {
        tokens.pop();
        if tokens.is_empty() {
            return Err(ScenarioError::parse(number, "`{` needs a key before it".to_string()));
        }
    }
    if let Some(pos) = tokens.iter().position(|t| t == "{" || t == "}") {
        if !(tokens.len() == 1 && tokens[0] == "}") {
            return Err(ScenarioError::parse(
                number,
                format!("stray `{}` inside a line", tokens[pos]),
            ));
        }
    }
    Ok(Some((tokens, opens)))
}

/// Parse a whole document into its top-level nodes.
pub fn parse_document(text: &str) -> Result<Vec<Node>, ScenarioError> {
    let mut roots: Vec<Node> = Vec::new();
    // Stack of open blocks; nodes attach to the innermost.
    let mut stack: Vec<Node> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let Some((mut tokens, opens)) = tokenize(raw, number)? else {
            continue;
        };
        if tokens.len() == 1 && tokens[0] == "}" {
            let Some(done) = stack.pop() else {
                return Err(ScenarioError::parse(number, "`}` with no open block".to_string()));
            };
            match stack.last_mut() {
                Some(parent) => parent.children.push(done),
                None => roots.push(done),
            }
            continue;
        }
        let key = tokens.remove(0);
        let node = Node::new(key, tokens, number);
        if opens {
            stack.push(node);
        } else {
            match stack.last_mut() {
                Some(parent) => parent.children.push(node),
                None => roots.push(node),
            }
        }
    }
    if let Some(open) = stack.last() {
        return Err(ScenarioError::parse(
            open.line,
            format!("block `{}` is never closed", open.key),
        ));
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_parse_into_keyed_trees() {
        let text = r#"
# a comment
scenario "demo" {
    creation consensus-based
    parties {
        group "holder" count 12 start-id 101   # trailing comment
    }
    note "free text with spaces"
}
"#;
        let roots = parse_document(text).unwrap();
        assert_eq!(roots.len(), 1);
        let s = &roots[0];
        assert_eq!(s.key, "scenario");
        assert_eq!(s.args, vec!["demo"]);
        assert_eq!(s.line, 3);
        assert_eq!(s.leaf_str("creation").unwrap(), "consensus-based");
        let group = s.require_child("parties").unwrap().child("group").unwrap();
        assert_eq!(group.args, vec!["holder", "count", "12", "start-id", "101"]);
        assert_eq!(s.leaf_str("note").unwrap(), "free text with spaces");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_document("a {\n  b\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        let err = parse_document("}\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        let err = parse_document("a\nb \"unclosed\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = parse_document("a { trailing\n}\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn node_accessors_validate_shape() {
        let roots = parse_document("top {\n  count 7\n  flag true\n  name \"x\"\n}\n").unwrap();
        let top = &roots[0];
        assert_eq!(top.leaf_uint("count").unwrap(), 7);
        assert!(top.require_child("flag").unwrap().bool_arg(0).unwrap());
        assert_eq!(top.leaf_uint_or("missing", 9).unwrap(), 9);
        let err = top.leaf_uint("name").unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
        let err = top.require_child("absent").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        assert!(top.expect_keys(&["count", "flag", "name"]).is_ok());
        let err = top.expect_keys(&["count"]).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
