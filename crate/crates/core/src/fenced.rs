//! Fenced code-block extraction from model output.
//!
//! Model responses carry structured payloads (symbols as JSON, programs as
//! guest code) inside triple-backtick fences. Blocks come back in document
//! order with their info tag; bodies exclude the fences and are preserved
//! byte for byte. An unterminated final fence yields a block running to the
//! end of the text.

/// One fenced block: the info-string tag (possibly empty) and the raw body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FencedBlock {
    pub tag: String,
    pub body: String,
}

impl FencedBlock {
    pub fn new(tag: impl Into<String>, body: impl Into<String>) -> Self {
        Self {
            tag: tag.into(),
            body: body.into(),
        }
    }
}

/// Extract all triple-backtick fenced blocks in document order.
pub fn parse_fenced_blocks(text: &str) -> Vec<FencedBlock> {
    let mut blocks = Vec::new();
    let mut body = String::new();
    let mut tag: Option<String> = None;

    for line in split_keep_newlines(text) {
        let trimmed = line.trim_end_matches(['\n', '\r']);
        let lead_trimmed = trimmed.trim_start();
        if let Some(tag_ref) = tag.as_ref() {
            if lead_trimmed == "```" {
                blocks.push(FencedBlock::new(
                    tag_ref.clone(),
                    strip_final_newline(&body),
                ));
                body.clear();
                tag = None;
            } else {
                body.push_str(line);
            }
        } else if let Some(rest) = lead_trimmed.strip_prefix("```") {
            tag = Some(rest.trim().to_string());
        }
    }
    if let Some(tag) = tag {
        // Unterminated final fence extends to end of text.
        blocks.push(FencedBlock::new(tag, strip_final_newline(&body)));
    }
    blocks
}

/// Render blocks back into fenced markdown. Inverse of
/// [`parse_fenced_blocks`] for bodies without triple-backtick runs.
pub fn render_blocks(blocks: &[FencedBlock]) -> String {
    let mut out = String::new();
    for block in blocks {
        out.push_str("```");
        out.push_str(&block.tag);
        out.push('\n');
        out.push_str(&block.body);
        if !block.body.is_empty() {
            out.push('\n');
        }
        out.push_str("```\n");
    }
    out
}

/// Last block whose tag matches (case-insensitive).
pub fn last_block_tagged<'a>(blocks: &'a [FencedBlock], tag: &str) -> Option<&'a FencedBlock> {
    blocks
        .iter()
        .rev()
        .find(|b| b.tag.eq_ignore_ascii_case(tag))
}

/// Last block whose tag does NOT match (case-insensitive) — used to pick the
/// program block as "the last non-JSON block".
pub fn last_block_not_tagged<'a>(blocks: &'a [FencedBlock], tag: &str) -> Option<&'a FencedBlock> {
    blocks
        .iter()
        .rev()
        .find(|b| !b.tag.eq_ignore_ascii_case(tag))
}

/// Text after the final occurrence of `marker`, trimmed. `None` when the
/// marker never occurs.
pub fn after_last_marker<'a>(text: &'a str, marker: &str) -> Option<&'a str> {
    text.rfind(marker)
        .map(|idx| text[idx + marker.len()..].trim())
}

fn split_keep_newlines(text: &str) -> impl Iterator<Item = &str> {
    let mut rest = text;
    std::iter::from_fn(move || {
        if rest.is_empty() {
            return None;
        }
        match rest.find('\n') {
            Some(idx) => {
                let (line, tail) = rest.split_at(idx + 1);
                rest = tail;
                Some(line)
            }
            None => {
                let line = rest;
                rest = "";
                Some(line)
            }
        }
    })
}

fn strip_final_newline(body: &str) -> String {
    body.strip_suffix('\n')
        .map(|b| b.strip_suffix('\r').unwrap_or(b))
        .unwrap_or(body)
        .to_string()
}
