/// Strip wiki markup that survives plain-text extraction: `== Heading ==`
/// markers, `[[target|label]]` links, `{{templates}}`, `<ref>` tags and
/// bold/italic quote runs. Plain prose passes through unchanged.
pub fn strip_markup(text: &str) -> String {
    if !text.contains(['[', '{', '<', '=', '\'']) {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    for (i, line) in text.split('\n').enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&strip_line(strip_heading(line)));
    }
    out
}

fn strip_heading(line: &str) -> &str {
    let trimmed = line.trim();
    let depth = trimmed.chars().take_while(|&c| c == '=').count();
    if depth >= 2 && trimmed.len() > 2 * depth && trimmed.ends_with(&"=".repeat(depth)) {
        trimmed[depth..trimmed.len() - depth].trim()
    } else {
        line
    }
}

fn strip_line(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut rest = line;
    while !rest.is_empty() {
        if let Some(after) = rest.strip_prefix("[[") {
            if let Some(end) = after.find("]]") {
                let inner = &after[..end];
                out.push_str(inner.rsplit('|').next().unwrap_or(inner));
                rest = &after[end + 2..];
                continue;
            }
        }
        if let Some(after) = rest.strip_prefix("{{") {
            if let Some(end) = after.find("}}") {
                rest = &after[end + 2..];
                continue;
            }
        }
        if rest.starts_with("<ref") {
            if let Some(end) = rest.find("</ref>") {
                rest = &rest[end + "</ref>".len()..];
                continue;
            }
            if let Some(end) = rest.find("/>") {
                rest = &rest[end + 2..];
                continue;
            }
        }
        if rest.starts_with("''") {
            rest = rest.trim_start_matches('\'');
            continue;
        }
        let ch = rest.chars().next().expect("non-empty");
        out.push(ch);
        rest = &rest[ch.len_utf8()..];
    }
    out
}
