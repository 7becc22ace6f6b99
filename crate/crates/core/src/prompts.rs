//! Prompt templates and slot rendering.
//!
//! `templates/` holds the fixed protocol templates (initial generation,
//! refinement, code judge, synthesis/CoT switch, algorithmicity classifier)
//! reproduced byte for byte; the engine's behavior contract depends on their
//! exact wording, so edit them only deliberately. `local/` holds auxiliary
//! prompts defined by this project (baseline CoT/PoT, retry and re-prompt
//! messages) that are safe to adapt.
//!
//! Rendering replaces `{slot}` markers in a single pass; substituted values
//! are never rescanned, so braces inside code or JSON payloads survive.

pub const GENERATE_INITIAL: &str = include_str!("../assets/prompts/templates/generate_initial.txt");
pub const REFINE: &str = include_str!("../assets/prompts/templates/refine.txt");
pub const JUDGE: &str = include_str!("../assets/prompts/templates/judge.txt");
pub const SWITCH: &str = include_str!("../assets/prompts/templates/switch.txt");
pub const ALGORITHMICITY: &str = include_str!("../assets/prompts/templates/algorithmicity.txt");

pub const COT: &str = include_str!("../assets/prompts/local/cot.txt");
pub const POT: &str = include_str!("../assets/prompts/local/pot.txt");
pub const POT_RETRY: &str = include_str!("../assets/prompts/local/pot_retry.txt");
pub const REPROMPT_BLOCKS: &str = include_str!("../assets/prompts/local/reprompt_blocks.txt");
pub const REPROMPT_REFINE: &str = include_str!("../assets/prompts/local/reprompt_refine.txt");
pub const REPROMPT_SWITCH: &str = include_str!("../assets/prompts/local/reprompt_switch.txt");
pub const REPROMPT_ALGORITHMICITY: &str =
    include_str!("../assets/prompts/local/reprompt_algorithmicity.txt");
pub const REPROMPT_FINAL_ANSWER: &str =
    include_str!("../assets/prompts/local/reprompt_final_answer.txt");

/// Replace `{name}` markers with the given slot values, single pass.
/// Unknown markers are left untouched.
pub fn render(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let after = &rest[start..];
        if let Some(end) = after.find('}') {
            let key = &after[1..end];
            if let Some((_, value)) = slots.iter().find(|(k, _)| *k == key) {
                out.push_str(value);
                rest = &after[end + 1..];
                continue;
            }
        }
        out.push('{');
        rest = &after[1..];
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_replaces_known_slots() {
        let rendered = render("a {x} b {y} c", &[("x", "1"), ("y", "2")]);
        assert_eq!(rendered, "a 1 b 2 c");
    }

    #[test]
    fn unknown_markers_left_alone() {
        let rendered = render("keep {unknown} and {x}", &[("x", "v")]);
        assert_eq!(rendered, "keep {unknown} and v");
    }

    #[test]
    fn values_are_not_rescanned() {
        let rendered = render("{code}", &[("code", "d = {x}")]);
        assert_eq!(rendered, "d = {x}");
    }

    #[test]
    fn templates_carry_their_slots() {
        assert!(GENERATE_INITIAL.contains("{question}"));
        for slot in ["{output}", "{stdout}", "{err}", "{checker_output}"] {
            assert!(REFINE.contains(slot), "refine missing {slot}");
        }
        for slot in ["{json_str}", "{code_str}", "{output}", "{stdout}", "{err}"] {
            assert!(JUDGE.contains(slot), "judge missing {slot}");
        }
        assert!(SWITCH.contains("{question}"));
        assert!(ALGORITHMICITY.contains("{question}"));
    }

    #[test]
    fn templates_keep_protocol_phrases() {
        assert!(GENERATE_INITIAL.contains("accept a single input called `symbols`"));
        assert!(REFINE.contains("output the word \"FINISHED\""));
        assert!(JUDGE.contains("judge the quality of the code"));
        assert!(SWITCH.contains("FINAL ANSWER"));
        assert!(ALGORITHMICITY.contains("at least 8 out of 10"));
    }
}
