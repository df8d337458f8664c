use std::ops::Range;

use crate::program::{Action, Program};

/// Splits a program into columns: a run of READs followed by a run of WRITEs.
///
/// Returns the source-token range and target-token range of each column.
pub fn chunks(program: &Program) -> Vec<(Range<usize>, Range<usize>)> {
    let mut out: Vec<(Range<usize>, Range<usize>)> = Vec::new();
    let (mut i, mut j) = (0, 0);
    let mut prev = None;
    for &a in program.actions() {
        let new_column = matches!((prev, a), (None, _) | (Some(Action::Write), Action::Read));
        if new_column {
            out.push((i..i, j..j));
        }
        let col = out.last_mut().expect("column opened above");
        match a {
            Action::Read => {
                i += 1;
                col.0.end = i;
            }
            Action::Write => {
                j += 1;
                col.1.end = j;
            }
        }
        prev = Some(a);
    }
    out
}

/// Two-row table: source chunks over the target chunks written after them.
pub fn render_trace<S: AsRef<str>, T: AsRef<str>>(program: &Program, source: &[S], target: &[T]) -> String {
    let join = |toks: &[&str]| toks.join(" ");
    let cells: Vec<(String, String)> = chunks(program)
        .into_iter()
        .map(|(r, w)| {
            let src: Vec<&str> = source[r.start.min(source.len())..r.end.min(source.len())]
                .iter()
                .map(AsRef::as_ref)
                .collect();
            let tgt: Vec<&str> = target[w.start.min(target.len())..w.end.min(target.len())]
                .iter()
                .map(AsRef::as_ref)
                .collect();
            (join(&src), join(&tgt))
        })
        .collect();
    let mut top = String::from("|");
    let mut bottom = String::from("|");
    for (s, t) in &cells {
        let w = s.chars().count().max(t.chars().count());
        top.push_str(&format!(" {s:<w$} |"));
        bottom.push_str(&format!(" {t:<w$} |"));
    }
    format!("{top}\n{bottom}\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Program {
        s.parse().unwrap()
    }

    #[test]
    fn alternating_gives_one_column_per_pair() {
        assert_eq!(render_trace(&p("RWRW"), &["a", "b"], &["u", "v"]), "| a | b |\n| u | v |\n");
    }

    #[test]
    fn read_block_gives_single_column() {
        assert_eq!(render_trace(&p("RRWW"), &["a", "b"], &["u", "v"]), "| a b |\n| u v |\n");
    }

    #[test]
    fn column_ranges() {
        assert_eq!(chunks(&p("RWRRWW")), vec![(0..1, 0..1), (1..3, 1..3)]);
        assert_eq!(chunks(&p("WRW")), vec![(0..0, 0..1), (0..1, 1..2)]);
        assert!(chunks(&Program::default()).is_empty());
    }
}
