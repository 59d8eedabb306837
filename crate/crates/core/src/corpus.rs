//! Built-in terminal functions, addressable by name.

use crate::types::{TerminalFunction, TerminalFunction2D};

/// A corpus function of either dimension.
#[derive(Debug, Clone)]
pub enum CorpusFunction {
    OneD(TerminalFunction),
    TwoD(TerminalFunction2D),
}

impl CorpusFunction {
    pub fn dimension(&self) -> usize {
        match self {
            CorpusFunction::OneD(_) => 1,
            CorpusFunction::TwoD(_) => 2,
        }
    }
}

/// Name, dimension and a one-line formula for each entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub dimension: usize,
    pub formula: &'static str,
}

const ENTRIES: &[CorpusEntry] = &[
    CorpusEntry { name: "cube", dimension: 1, formula: "x^3" },
    CorpusEntry { name: "neg-cube", dimension: 1, formula: "-x^3" },
    CorpusEntry { name: "tent", dimension: 1, formula: "max(1 - |x|, 0)" },
    CorpusEntry { name: "sine", dimension: 1, formula: "sin(x)" },
    CorpusEntry { name: "cosine", dimension: 1, formula: "cos(x)" },
    CorpusEntry { name: "sine-plus-cosine", dimension: 1, formula: "sin(x) + cos(x)" },
    CorpusEntry { name: "logistic-bump", dimension: 1, formula: "1 / (1 + exp(-x^2))" },
    CorpusEntry { name: "square", dimension: 1, formula: "x^2" },
    CorpusEntry { name: "neg-square", dimension: 1, formula: "-x^2" },
    CorpusEntry { name: "quartic", dimension: 1, formula: "x^4" },
    CorpusEntry { name: "identity", dimension: 1, formula: "x" },
    CorpusEntry { name: "additive-cube-2d", dimension: 2, formula: "x1^3 + x2^3" },
    CorpusEntry { name: "additive-square-2d", dimension: 2, formula: "x1^2 + x2^2" },
    CorpusEntry { name: "product-2d", dimension: 2, formula: "x1 x2" },
];

pub fn entries() -> &'static [CorpusEntry] {
    ENTRIES
}

/// All names, in a fixed order.
pub fn list_corpus() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

pub fn lookup(name: &str) -> Option<CorpusFunction> {
    let one = |degree, f: fn(f64) -> f64| Some(CorpusFunction::OneD(TerminalFunction::new(name, degree, f)));
    let two = |degree, f: fn(f64, f64) -> f64| {
        Some(CorpusFunction::TwoD(TerminalFunction2D::new(name, degree, f)))
    };
    match name {
        "cube" => one(2, |x| x * x * x),
        "neg-cube" => one(2, |x| -x * x * x),
        "tent" => one(0, |x| (1.0 - x.abs()).max(0.0)),
        "sine" => one(0, f64::sin),
        "cosine" => one(0, f64::cos),
        "sine-plus-cosine" => one(0, |x| x.sin() + x.cos()),
        "logistic-bump" => one(0, |x| 1.0 / (1.0 + (-x * x).exp())),
        "square" => one(1, |x| x * x),
        "neg-square" => one(1, |x| -x * x),
        "quartic" => one(3, |x| x.powi(4)),
        "identity" => one(0, |x| x),
        "additive-cube-2d" => two(2, |a, b| a * a * a + b * b * b),
        "additive-square-2d" => two(1, |a, b| a * a + b * b),
        "product-2d" => two(1, |a, b| a * b),
        _ => None,
    }
}

pub fn lookup_1d(name: &str) -> Option<TerminalFunction> {
    match lookup(name)? {
        CorpusFunction::OneD(f) => Some(f),
        CorpusFunction::TwoD(_) => None,
    }
}

pub fn lookup_2d(name: &str) -> Option<TerminalFunction2D> {
    match lookup(name)? {
        CorpusFunction::TwoD(f) => Some(f),
        CorpusFunction::OneD(_) => None,
    }
}
