use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsafe rule `{rule}`: variable {var} does not occur in a positive body literal")]
    UnsafeRule { rule: String, var: String },
    #[error("malformed rule `{0}`: head and body must be nonempty")]
    MalformedRule(String),
    #[error("predicate {0} is both base and derived")]
    BaseAndDerived(String),
    #[error("predicate {pred} used with arity {found}, previously {expected}")]
    ArityClash {
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("request atom {0} is not ground")]
    NonGround(String),
    #[error("predicate name {0} is reserved for internal relations")]
    ReservedName(String),
    #[error("rule set is not stratifiable: {0}")]
    Unstratifiable(String),
    #[error("operator requires definite rules and facts, found `{0}`")]
    NotDefinite(String),
    #[error("fact store is inconsistent; its model set is undefined")]
    Inconsistent,
    #[error("minimal model enumeration over {atoms} atoms exceeds the cap of {cap}")]
    ModelCap { atoms: usize, cap: usize },
    #[error("no consistent model state satisfies the integrity constraints")]
    ConstraintsUnsatisfiable,
    #[error("rewritten rule `{0}` carries no provenance")]
    MissingProvenance(String),
    #[error("negative literal `{0}` cannot be fully bound by any ordering of positive literals")]
    UnboundNegation(String),
    #[error("update is not effective: {0}")]
    IneffectiveUpdate(String),
    #[error("not a true view update: {0}")]
    NotTrueViewUpdate(String),
}
