//! Visible-text extraction from raw HTML.
//!
//! A small tag scanner, not a conforming HTML5 parser. It removes
//! comments and the contents of `script`, `style`, `noscript` and
//! `template`, decodes character references, and treats block-level
//! elements as hard sentence boundaries. Style sheets and inline
//! `style` attributes are collected on the side for the CSS feature.

/// Result of scanning one HTML document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extraction {
    /// Sentences in document order.
    pub sentences: Vec<String>,
    /// Raw contents of every `<style>` element.
    pub style_sheets: Vec<String>,
    /// Number of elements carrying a `style` attribute.
    pub inline_styles: usize,
}

impl Extraction {
    /// Visible text: sentences joined by single spaces.
    pub fn text(&self) -> String {
        self.sentences.join(" ")
    }
}

const RAW_TEXT_ELEMENTS: &[&str] = &["script", "style", "noscript", "template"];

const BLOCK_ELEMENTS: &[&str] = &[
    "address",
    "article",
    "aside",
    "blockquote",
    "body",
    "br",
    "caption",
    "dd",
    "details",
    "dialog",
    "div",
    "dl",
    "dt",
    "fieldset",
    "figcaption",
    "figure",
    "footer",
    "form",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "head",
    "header",
    "hr",
    "html",
    "li",
    "main",
    "nav",
    "ol",
    "p",
    "pre",
    "section",
    "summary",
    "table",
    "tbody",
    "td",
    "tfoot",
    "th",
    "thead",
    "title",
    "tr",
    "ul",
];

/// Scan `html` and return sentences plus style information.
pub fn extract(html: &str) -> Extraction {
    let mut out = Extraction::default();
    let mut blocks: Vec<String> = Vec::new();
    let mut current = String::new();
    let bytes = html.as_bytes();
    let mut i = 0;
    let mut text_start = 0;

    while i < bytes.len() {
        if bytes[i] != b'<' {
            i += 1;
            continue;
        }
        let Some(tag) = scan_markup(html, i) else {
            // A stray '<' that does not open markup is text.
            i += 1;
            continue;
        };
        push_text(&mut current, &html[text_start..i]);
        i = tag.end;
        if let Markup::Tag {
            name,
            closing,
            has_style_attr,
        } = tag.kind
        {
            if has_style_attr && !closing {
                out.inline_styles += 1;
            }
            if !closing && RAW_TEXT_ELEMENTS.contains(&name.as_str()) {
                let (content_end, resume) = find_raw_text_end(html, i, &name);
                if name == "style" {
                    out.style_sheets.push(html[i..content_end].to_owned());
                }
                i = resume;
            } else if BLOCK_ELEMENTS.contains(&name.as_str()) {
                flush_block(&mut current, &mut blocks);
            }
        }
        text_start = i;
    }
    push_text(&mut current, &html[text_start.min(html.len())..]);
    flush_block(&mut current, &mut blocks);

    for block in &blocks {
        out.sentences.extend(split_sentences(block));
    }
    out
}

enum Markup {
    Tag {
        name: String,
        closing: bool,
        has_style_attr: bool,
    },
    Other,
}

struct ScannedMarkup {
    kind: Markup,
    end: usize,
}

/// Scan markup starting at `html[start] == '<'`.
fn scan_markup(html: &str, start: usize) -> Option<ScannedMarkup> {
    let rest = &html[start..];
    if let Some(body) = rest.strip_prefix("<!--") {
        let end = body
            .find("-->")
            .map(|p| start + 4 + p + 3)
            .unwrap_or(html.len());
        return Some(ScannedMarkup {
            kind: Markup::Other,
            end,
        });
    }
    let bytes = rest.as_bytes();
    let next = *bytes.get(1)?;
    if next == b'!' || next == b'?' {
        let end = rest.find('>').map(|p| start + p + 1).unwrap_or(html.len());
        return Some(ScannedMarkup {
            kind: Markup::Other,
            end,
        });
    }
    let closing = next == b'/';
    let name_start = if closing { 2 } else { 1 };
    if !bytes.get(name_start)?.is_ascii_alphabetic() {
        return None;
    }
    let mut j = name_start;
    while j < bytes.len()
        && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'-' || bytes[j] == b':')
    {
        j += 1;
    }
    let name = rest[name_start..j].to_ascii_lowercase();

    // Attributes: walk to the closing '>' honoring quotes.
    let mut has_style_attr = false;
    let mut quote: Option<u8> = None;
    let mut attr_start = j;
    while j < bytes.len() {
        let b = bytes[j];
        match quote {
            Some(q) if b == q => quote = None,
            Some(_) => {}
            None if b == b'"' || b == b'\'' => quote = Some(b),
            None if b == b'>' => break,
            None if b.is_ascii_whitespace() || b == b'/' => attr_start = j + 1,
            None if b == b'=' && rest[attr_start..j].trim().eq_ignore_ascii_case("style") => {
                has_style_attr = true
            }
            None => {}
        }
        j += 1;
    }
    let end = if j < bytes.len() {
        start + j + 1
    } else {
        html.len()
    };
    Some(ScannedMarkup {
        kind: Markup::Tag {
            name,
            closing,
            has_style_attr,
        },
        end,
    })
}

/// Locate `</name` (case-insensitive) at or after `from`. Returns the end of
/// the raw content and the position after the closing tag.
fn find_raw_text_end(html: &str, from: usize, name: &str) -> (usize, usize) {
    let needle = format!("</{name}");
    let lower = html[from..].to_ascii_lowercase();
    match lower.find(&needle) {
        Some(p) => {
            let content_end = from + p;
            let resume = html[content_end..]
                .find('>')
                .map(|q| content_end + q + 1)
                .unwrap_or(html.len());
            (content_end, resume)
        }
        None => (html.len(), html.len()),
    }
}

fn push_text(current: &mut String, raw: &str) {
    if raw.is_empty() {
        return;
    }
    let decoded = html_escape::decode_html_entities(raw);
    for c in decoded.chars() {
        if c.is_whitespace() {
            if !current.is_empty() && !current.ends_with(' ') {
                current.push(' ');
            }
        } else {
            current.push(c);
        }
    }
}

fn flush_block(current: &mut String, blocks: &mut Vec<String>) {
    let trimmed = current.trim();
    if !trimmed.is_empty() {
        blocks.push(trimmed.to_owned());
    }
    current.clear();
}

/// Split a whitespace-normalized block on terminal punctuation followed by
/// whitespace and an uppercase letter.
pub fn split_sentences(block: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = block.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    for k in 0..chars.len() {
        let (pos, c) = chars[k];
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let followed_by_space = chars.get(k + 1).is_some_and(|&(_, n)| n.is_whitespace());
        let then_capital = chars.get(k + 2).is_some_and(|&(_, n)| n.is_uppercase());
        if followed_by_space && then_capital {
            let end = pos + c.len_utf8();
            let s = block[start..end].trim();
            if !s.is_empty() {
                sentences.push(s.to_owned());
            }
            start = end;
        }
    }
    let tail = block[start..].trim();
    if !tail.is_empty() {
        sentences.push(tail.to_owned());
    }
    sentences
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_script_and_tags() {
        let e = extract("<p>Cats purr.</p><script>x()</script>");
        assert_eq!(e.text(), "Cats purr.");
        assert_eq!(e.sentences.len(), 1);
    }

    #[test]
    fn block_elements_split_sentences() {
        let e = extract("<div>A.</div><div>B.</div>");
        assert_eq!(e.sentences, vec!["A.", "B."]);
    }

    #[test]
    fn decodes_entities() {
        let e = extract("<p style='x'><b>Salt &amp; pepper</b> &lt;3 &#233;t&eacute;</p>");
        assert_eq!(e.text(), "Salt & pepper <3 été");
    }

    #[test]
    fn punctuation_and_capital_split_sentences() {
        let e = extract("<p>Dr. smith came. Then he left! Why? no idea</p>");
        assert_eq!(
            e.sentences,
            vec!["Dr. smith came.", "Then he left!", "Why? no idea"]
        );
    }

    #[test]
    fn comments_and_doctype_removed() {
        let e = extract("<!DOCTYPE html><!-- hidden --><p>Shown</p><style>.a{}</style>");
        assert_eq!(e.text(), "Shown");
        assert_eq!(e.style_sheets, vec![".a{}"]);
    }

    #[test]
    fn inline_tags_do_not_merge_words() {
        let e = extract("<p>one <em>two</em> three</p>");
        assert_eq!(e.text(), "one two three");
    }

    #[test]
    fn empty_html_is_empty_text() {
        let e = extract("");
        assert!(e.sentences.is_empty());
        assert_eq!(e.text(), "");
    }

    #[test]
    fn stray_angle_bracket_is_text() {
        let e = extract("<p>a < b and 3<4</p>");
        assert_eq!(e.text(), "a < b and 3<4");
    }

    #[test]
    fn unterminated_script_swallows_rest() {
        let e = extract("<p>Keep</p><script>var a = '<p>no</p>'");
        assert_eq!(e.text(), "Keep");
    }
}
