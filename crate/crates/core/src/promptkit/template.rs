fn is_placeholder_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase() || c == '_')
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Substitutes `{name}` placeholders in one pass. `{{`/`}}` produce literal
/// braces and substituted values are never re-scanned.
///
/// Returns the name of the first unbound placeholder on failure.
pub fn render(template: &str, bindings: &[(&str, &str)]) -> Result<String, String> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(pos) = rest.find(['{', '}']) {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        if tail.starts_with("{{") || tail.starts_with("}}") {
            out.push_str(&tail[..1]);
            rest = &tail[2..];
            continue;
        }
        if tail.starts_with('{') {
            if let Some(end) = tail.find('}') {
                let name = &tail[1..end];
                if is_placeholder_name(name) {
                    let value = bindings
                        .iter()
                        .find(|(k, _)| *k == name)
                        .map(|(_, v)| *v)
                        .ok_or_else(|| name.to_string())?;
                    out.push_str(value);
                    rest = &tail[end + 1..];
                    continue;
                }
            }
        }
        out.push_str(&tail[..1]);
        rest = &tail[1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Placeholder-shaped markers (`{lower_snake}`) left in a rendered text.
pub fn unresolved_placeholders(text: &str) -> Vec<String> {
    let mut found = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find('{') {
        let tail = &rest[start + 1..];
        match tail.find(['}', '{']) {
            Some(end) if tail.as_bytes()[end] == b'}' => {
                if is_placeholder_name(&tail[..end]) {
                    found.push(tail[..end].to_string());
                }
                rest = &tail[end + 1..];
            }
            Some(end) => rest = &tail[end..],
            None => break,
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitutes_and_escapes() {
        let out = render("a {x} {{FEW_SHOTS}} }} {y}", &[("x", "1"), ("y", "{x}")]).unwrap();
        assert_eq!(out, "a 1 {FEW_SHOTS} } {x}");
    }

    #[test]
    fn unbound_is_reported() {
        assert_eq!(render("{a} {b}", &[("a", "")]), Err("b".to_string()));
    }

    #[test]
    fn non_placeholder_braces_pass_through() {
        assert_eq!(render("{ not one } {A}", &[]).unwrap(), "{ not one } {A}");
    }

    #[test]
    fn detects_leftovers() {
        assert_eq!(unresolved_placeholders("x {a} {FEW_SHOTS} {b_2}"), vec!["a", "b_2"]);
        assert_eq!(unresolved_placeholders("{{a}"), vec!["a"]);
        assert!(unresolved_placeholders("no braces").is_empty());
    }
}
