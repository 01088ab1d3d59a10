//! Naming of internal relations produced by the rewritings.
//!
//! User predicates never contain `__`, and may not be one of the state
//! markers, so every internal name decodes unambiguously:
//!
//! | relation            | name              | shown as       |
//! |---------------------|-------------------|----------------|
//! | adorned `p^bf`      | `p__bf`           | `p_bf`         |
//! | magic of `p^bf`     | `m__p__bf`        | `m_p_bf`       |
//! | magic seed          | `ms__p__bf`       | `m_s_p_bf`     |
//! | new state of `p`    | `new__p`          | `p^new`        |
//! | `Δ+p` / `Δ-p`       | `dplus__p` ...    | `delta+p`      |
//! | `∇+p` / `∇-p`       | `vplus__p` ...    | `nabla+p`      |

use std::fmt;

use crate::syntax::{Sign, Symbol};

pub const SEP: &str = "__";
const STATE_MARKERS: [&str; 5] = ["new", "dplus", "dminus", "vplus", "vminus"];

/// Whether a user-written predicate name collides with the internal scheme.
pub fn is_reserved(pred: &str) -> bool {
    pred.contains(SEP) || STATE_MARKERS.contains(&pred)
}

pub fn adorned(pred: &Symbol, adornment: &str) -> Symbol {
    format!("{pred}{SEP}{adornment}").into()
}

pub fn magic(adorned: &Symbol) -> Symbol {
    format!("m{SEP}{adorned}").into()
}

pub fn seed(adorned: &Symbol) -> Symbol {
    format!("ms{SEP}{adorned}").into()
}

pub fn new_state(pred: &Symbol) -> Symbol {
    format!("new{SEP}{pred}").into()
}

pub fn delta(sign: Sign, pred: &Symbol) -> Symbol {
    match sign {
        Sign::Pos => format!("dplus{SEP}{pred}").into(),
        Sign::Neg => format!("dminus{SEP}{pred}").into(),
    }
}

pub fn nabla(sign: Sign, pred: &Symbol) -> Symbol {
    match sign {
        Sign::Pos => format!("vplus{SEP}{pred}").into(),
        Sign::Neg => format!("vminus{SEP}{pred}").into(),
    }
}

/// Selector for the `index`-th defining rule of `pred` during view updating.
pub fn selector(sign: Sign, pred: &Symbol, index: usize) -> Symbol {
    let s = match sign {
        Sign::Pos => "vsplus",
        Sign::Neg => "vsminus",
    };
    format!("{s}{SEP}{pred}{SEP}r{index}").into()
}

/// Request marker used by view-update transition rules.
pub fn goal(sign: Sign, pred: &Symbol) -> Symbol {
    match sign {
        Sign::Pos => format!("gplus{SEP}{pred}").into(),
        Sign::Neg => format!("gminus{SEP}{pred}").into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    User(Symbol),
    Adorned(Box<Relation>, String),
    Magic(Box<Relation>),
    Seed(Box<Relation>),
    New(Box<Relation>),
    Delta(Sign, Box<Relation>),
    Nabla(Sign, Box<Relation>),
    Selector(Sign, Box<Relation>, String),
    Goal(Sign, Box<Relation>),
}

impl Relation {
    pub fn decode(name: &str) -> Relation {
        let parts: Vec<&str> = name.split(SEP).collect();
        decode_parts(&parts)
    }

    /// The user predicate underneath all markers.
    pub fn base(&self) -> &Symbol {
        match self {
            Relation::User(s) => s,
            Relation::Adorned(r, _)
            | Relation::Magic(r)
            | Relation::Seed(r)
            | Relation::New(r)
            | Relation::Delta(_, r)
            | Relation::Nabla(_, r)
            | Relation::Selector(_, r, _)
            | Relation::Goal(_, r) => r.base(),
        }
    }

    /// Drops adornments, keeping state markers: `new__p__bf` becomes `new__p`.
    pub fn unadorned(&self) -> Relation {
        match self {
            Relation::Adorned(r, _) => r.unadorned(),
            Relation::New(r) => Relation::New(Box::new(r.unadorned())),
            other => other.clone(),
        }
    }

    pub fn is_magic(&self) -> bool {
        matches!(self, Relation::Magic(_) | Relation::Seed(_))
    }
}

fn decode_parts(parts: &[&str]) -> Relation {
    let boxed = |p: &[&str]| Box::new(decode_parts(p));
    match parts {
        [] => Relation::User(Symbol::new("")),
        [one] => Relation::User(Symbol::new(one)),
        ["m", rest @ ..] if rest.len() >= 2 => Relation::Magic(boxed(rest)),
        ["ms", rest @ ..] if rest.len() >= 2 => Relation::Seed(boxed(rest)),
        // an adornment on a state relation sits outside the marker
        ["new" | "dplus" | "dminus", rest @ .., ad] if !rest.is_empty() => {
            Relation::Adorned(Box::new(decode_parts(&[parts[0], rest[0]])), ad.to_string())
        }
        ["new", rest @ ..] => Relation::New(boxed(rest)),
        ["dplus", rest @ ..] => Relation::Delta(Sign::Pos, boxed(rest)),
        ["dminus", rest @ ..] => Relation::Delta(Sign::Neg, boxed(rest)),
        ["vplus", rest @ ..] => Relation::Nabla(Sign::Pos, boxed(rest)),
        ["vminus", rest @ ..] => Relation::Nabla(Sign::Neg, boxed(rest)),
        ["gplus", rest @ ..] => Relation::Goal(Sign::Pos, boxed(rest)),
        ["gminus", rest @ ..] => Relation::Goal(Sign::Neg, boxed(rest)),
        ["vsplus", rest @ .., idx] => Relation::Selector(Sign::Pos, boxed(rest), idx.to_string()),
        ["vsminus", rest @ .., idx] => Relation::Selector(Sign::Neg, boxed(rest), idx.to_string()),
        [rest @ .., ad] => Relation::Adorned(boxed(rest), ad.to_string()),
    }
}

fn sign_char(s: Sign) -> char {
    match s {
        Sign::Pos => '+',
        Sign::Neg => '-',
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::User(s) => write!(f, "{s}"),
            Relation::Adorned(r, ad) => write!(f, "{r}_{ad}"),
            Relation::Magic(r) => write!(f, "m_{r}"),
            Relation::Seed(r) => write!(f, "m_s_{r}"),
            Relation::New(r) => write!(f, "{r}^new"),
            Relation::Delta(s, r) => write!(f, "delta{}{r}", sign_char(*s)),
            Relation::Nabla(s, r) => write!(f, "nabla{}{r}", sign_char(*s)),
            Relation::Selector(s, r, i) => write!(f, "sel{}{r}#{i}", sign_char(*s)),
            Relation::Goal(s, r) => write!(f, "goal{}{r}", sign_char(*s)),
        }
    }
}

/// Human-readable form of an internal predicate name.
pub fn display(pred: &Symbol) -> String {
    Relation::decode(pred.as_str()).to_string()
}
