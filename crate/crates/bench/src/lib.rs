//! Workload generators shared by the benches.

use softfix::{parse_program, Database};

const CLOSURE: &str = "p(X,Y) :- e(X,Y). p(X,Y) :- e(X,Z), p(Z,Y).";

/// Transitive closure over the path `1 -> 2 -> ... -> n`.
pub fn chain(n: usize) -> Database {
    let mut text = String::from(CLOSURE);
    for i in 1..n {
        text.push_str(&format!(" e({i},{}).", i + 1));
    }
    parse_program(&text).expect("generated program parses").database
}

/// The closure example: a few short edges plus the chain `10 -> ... -> 100`.
pub fn closure_example() -> Database {
    let mut text = format!("{CLOSURE} e(1,2). e(1,4). e(3,4).");
    for i in 10..100 {
        text.push_str(&format!(" e({i},{}).", i + 1));
    }
    parse_program(&text).expect("generated program parses").database
}

/// Paths that are not reversible, over a chain with a back edge every `k` nodes.
pub fn one_way(n: usize, k: usize) -> Database {
    let mut text = format!("o(X,Y) :- not p(Y,X), p(X,Y). {CLOSURE}");
    for i in 1..n {
        text.push_str(&format!(" e({i},{}).", i + 1));
        if i % k == 0 {
            text.push_str(&format!(" e({},{}).", i + 1, i + 1 - k));
        }
    }
    parse_program(&text).expect("generated program parses").database
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(chain(5).facts.len(), 4);
        assert_eq!(closure_example().facts.len(), 93);
        assert_eq!(one_way(7, 3).facts.len(), 8);
    }
}
