use super::{BlockRole, DeadBlock};
use crate::code_model::{classify_line_kind, guard_span, Language, LineKind};
use crate::expr::{eval_guard, exec_statement, Env, Mode};
use crate::lexer::byte_offset;

/// Guard expression text of a condition line, plus whatever follows it.
pub(crate) fn split_guard(text: &str, language: Language) -> Option<(String, String)> {
    let (start, end) = guard_span(text, language)?;
    let (bs, be) = (byte_offset(text, start), byte_offset(text, end));
    Some((text[bs..be].trim().to_string(), text[be..].to_string()))
}

fn head_word(text: &str) -> &str {
    let t = text.trim_start_matches(|c: char| c == '}' || c.is_whitespace());
    t.split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
        .next()
        .unwrap_or("")
}

fn is_jump(stmt: &str) -> bool {
    let s = stmt.trim().trim_end_matches(';').trim();
    matches!(head_word(s), "break" | "continue" | "return" | "raise" | "throw")
}

fn is_else_branch(text: &str, language: Language) -> bool {
    let t = text.trim_start_matches(|c: char| c == '}' || c.is_whitespace());
    match language {
        Language::Python => head_word(t) == "elif",
        Language::Java => t.starts_with("else"),
    }
}

/// True iff the block's dead lines can never execute: either the guard
/// folds to false (or is shadowed by an earlier true branch of its chain),
/// or an unconditional jump precedes the body. Unprovable means false.
pub fn prove_guard_false(block: &DeadBlock) -> bool {
    let lang = block.language;
    let mut env = Env::new();
    // truth of earlier branch guards of the current chain, by depth
    let mut chain: Vec<(usize, Option<bool>)> = Vec::new();
    let mut jumped_at: Option<usize> = None;
    for line in &block.lines {
        match line.role {
            BlockRole::Preamble => {
                if exec_statement(&line.text, lang, &mut env).is_err() {
                    return false;
                }
            }
            BlockRole::Scaffold => {
                if classify_line_kind(&line.text, lang) == LineKind::Condition {
                    let Some((cond, rest)) = split_guard(&line.text, lang) else {
                        return false;
                    };
                    let value = eval_guard(&cond, lang, &env, Mode::Folding).ok();
                    // one-line `if (true) break;`
                    let inline = rest.trim_start_matches(|c: char| c == ')' || c.is_whitespace());
                    if value == Some(true) && is_jump(inline) {
                        jumped_at.get_or_insert(line.depth);
                    }
                    if !is_else_branch(&line.text, lang) {
                        chain.retain(|(d, _)| *d < line.depth);
                    }
                    chain.push((line.depth, value));
                } else if is_jump(&line.text) {
                    jumped_at.get_or_insert(line.depth);
                } else if line.text.trim_start().starts_with("assert ")
                    && exec_statement(&line.text, lang, &mut env).is_err()
                {
                    return false;
                }
            }
            BlockRole::Guard => {
                if jumped_at.is_some_and(|d| d <= line.depth) {
                    return true;
                }
                let Some((cond, _)) = split_guard(&line.text, lang) else {
                    return false;
                };
                if is_else_branch(&line.text, lang) && chain.iter().any(|(d, v)| *d == line.depth && *v == Some(true)) {
                    return true;
                }
                return eval_guard(&cond, lang, &env, Mode::Folding) == Ok(false);
            }
            BlockRole::Body => {
                return jumped_at.is_some_and(|d| d <= line.depth);
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::BlockLine;

    fn block(lang: Language, lines: &[(BlockRole, usize, &str)]) -> DeadBlock {
        DeadBlock {
            pattern_id: "t".into(),
            language: lang,
            lines: lines
                .iter()
                .map(|(role, depth, text)| BlockLine {
                    role: *role,
                    depth: *depth,
                    text: text.to_string(),
                })
                .collect(),
            fresh_names: Vec::new(),
            library_names: Vec::new(),
        }
    }

    #[test]
    fn floor_guard_is_false() {
        let b = block(
            Language::Python,
            &[
                (BlockRole::Preamble, 0, "a = 3.7"),
                (BlockRole::Preamble, 0, "b = floor(a)"),
                (BlockRole::Guard, 0, "if a < b:"),
                (BlockRole::Body, 1, "t = 1"),
            ],
        );
        assert!(prove_guard_false(&b));
    }

    #[test]
    fn true_guard_is_not_dead() {
        let b = block(
            Language::Python,
            &[
                (BlockRole::Preamble, 0, "x = 1"),
                (BlockRole::Guard, 0, "if x > 0:"),
                (BlockRole::Body, 1, "t = 1"),
            ],
        );
        assert!(!prove_guard_false(&b));
    }

    #[test]
    fn unknown_names_are_unprovable() {
        let b = block(
            Language::Java,
            &[
                (BlockRole::Guard, 0, "if (host < 0) {"),
                (BlockRole::Body, 1, "int t = 1;"),
            ],
        );
        assert!(!prove_guard_false(&b));
    }

    #[test]
    fn covered_branch_either_way() {
        for k in ["2", "9"] {
            let pre = format!("int a = {k};");
            let b = block(
                Language::Java,
                &[
                    (BlockRole::Preamble, 0, &pre),
                    (BlockRole::Scaffold, 0, "if (a > 3) {"),
                    (BlockRole::Guard, 0, "} else if (a > 5) {"),
                    (BlockRole::Body, 1, "int t = 1;"),
                    (BlockRole::Scaffold, 0, "}"),
                ],
            );
            assert!(prove_guard_false(&b), "k = {k}");
        }
    }

    #[test]
    fn jumps_make_the_body_dead() {
        let b = block(
            Language::Java,
            &[
                (BlockRole::Scaffold, 0, "do {"),
                (BlockRole::Scaffold, 1, "if (true) break;"),
                (BlockRole::Body, 1, "int t = 1;"),
                (BlockRole::Scaffold, 0, "} while (false);"),
            ],
        );
        assert!(prove_guard_false(&b));
        let b = block(
            Language::Java,
            &[
                (BlockRole::Scaffold, 0, "do {"),
                (BlockRole::Scaffold, 1, "if (false) break;"),
                (BlockRole::Body, 1, "int t = 1;"),
                (BlockRole::Scaffold, 0, "} while (false);"),
            ],
        );
        assert!(!prove_guard_false(&b));
    }

    #[test]
    fn failing_assert_is_unprovable() {
        let b = block(
            Language::Python,
            &[
                (BlockRole::Preamble, 0, "a = -1"),
                (BlockRole::Scaffold, 0, "assert a > 0"),
                (BlockRole::Guard, 0, "if a > 100:"),
                (BlockRole::Body, 1, "t = 1"),
            ],
        );
        assert!(!prove_guard_false(&b));
    }
}
