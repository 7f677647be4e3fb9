//! Shapes of the built-in adversarial patterns.
//!
//! Each builder emits the lines before the dead body (preamble, scaffold and
//! guard) and the scaffold that closes it; the shared body is placed between.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{BlockLine, BlockRole, Family};
use crate::code_model::Language;

const PREFIXES: [&str; 12] = ["qz", "kk", "vx", "jq", "zw", "xk", "qv", "wz", "kq", "zx", "vq", "jx"];

/// Seeded source of fresh names and constants.
pub(crate) struct Draw {
    pub rng: ChaCha8Rng,
    prefix: &'static str,
    next: u32,
    pub names: Vec<String>,
    pub libraries: Vec<&'static str>,
}

impl Draw {
    pub fn new(mut rng: ChaCha8Rng) -> Self {
        let prefix = PREFIXES[rng.gen_range(0..PREFIXES.len())];
        let next = rng.gen_range(0..10);
        Self {
            rng,
            prefix,
            next,
            names: Vec::new(),
            libraries: Vec::new(),
        }
    }

    pub fn fresh(&mut self) -> String {
        let name = format!("{}_{}", self.prefix, self.next);
        self.next += 1;
        self.names.push(name.clone());
        name
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    /// A decimal literal with a nonzero fractional digit, e.g. `3.7`.
    pub fn decimal(&mut self) -> String {
        format!("{}.{}", self.int(1, 60), self.int(1, 9))
    }

    pub fn lib(&mut self, name: &'static str) {
        if !self.libraries.contains(&name) {
            self.libraries.push(name);
        }
    }
}

pub(crate) struct Shape {
    pub head: Vec<BlockLine>,
    pub body_depth: usize,
    pub tail: Vec<BlockLine>,
}

fn line(role: BlockRole, depth: usize, text: impl Into<String>) -> BlockLine {
    BlockLine {
        role,
        depth,
        text: text.into(),
    }
}

fn pre(text: impl Into<String>) -> BlockLine {
    line(BlockRole::Preamble, 0, text)
}

fn scaffold(depth: usize, text: impl Into<String>) -> BlockLine {
    line(BlockRole::Scaffold, depth, text)
}

fn guard(depth: usize, text: impl Into<String>) -> BlockLine {
    line(BlockRole::Guard, depth, text)
}

/// `if <cond>:` / `if (<cond>) {` followed by the body, closed for Java.
fn if_shape(lang: Language, mut head: Vec<BlockLine>, cond: &str) -> Shape {
    match lang {
        Language::Python => {
            head.push(guard(0, format!("if {cond}:")));
            Shape {
                head,
                body_depth: 1,
                tail: Vec::new(),
            }
        }
        Language::Java => {
            head.push(guard(0, format!("if ({cond}) {{")));
            Shape {
                head,
                body_depth: 1,
                tail: vec![scaffold(0, "}")],
            }
        }
    }
}

/// `<name> = <value>` with a Java declaration type.
fn bind(lang: Language, java_type: &str, name: &str, value: &str) -> BlockLine {
    match lang {
        Language::Python => pre(format!("{name} = {value}")),
        Language::Java => pre(format!("{java_type} {name} = {value};")),
    }
}

fn str_lit(lang: Language, s: &str) -> String {
    match lang {
        Language::Python => format!("'{s}'"),
        Language::Java => format!("\"{s}\""),
    }
}

const WORDS: [&str; 8] = ["alpha", "delta", "omega", "kappa", "sigma", "theta", "gamma", "zeta"];

pub(crate) struct Entry {
    pub id: &'static str,
    pub family: Family,
    pub arity: usize,
    pub description: &'static str,
    pub build: fn(Language, &mut Draw) -> Shape,
}

pub(crate) const ENTRIES: [Entry; 22] = [
    Entry {
        id: "abs_nonneg",
        family: Family::AbsNonneg,
        arity: 1,
        description: "absolute value compared below zero",
        build: |lang, d| {
            let a = d.fresh();
            let k = d.int(-40, 40).to_string();
            let cond = match lang {
                Language::Python => {
                    d.lib("abs");
                    format!("abs({a}) < 0")
                }
                Language::Java => {
                    d.lib("Math");
                    format!("Math.abs({a}) < 0")
                }
            };
            if_shape(lang, vec![bind(lang, "int", &a, &k)], &cond)
        },
    },
    Entry {
        id: "abs_triangle",
        family: Family::AbsNonneg,
        arity: 2,
        description: "triangle inequality for absolute values reversed",
        build: |lang, d| {
            let a = d.fresh();
            let b = d.fresh();
            let (ka, kb) = (d.int(-30, 30).to_string(), d.int(-30, 30).to_string());
            let f = match lang {
                Language::Python => {
                    d.lib("abs");
                    "abs"
                }
                Language::Java => {
                    d.lib("Math");
                    "Math.abs"
                }
            };
            let cond = format!("{f}({a} + {b}) > {f}({a}) + {f}({b})");
            if_shape(
                lang,
                vec![bind(lang, "int", &a, &ka), bind(lang, "int", &b, &kb)],
                &cond,
            )
        },
    },
    Entry {
        id: "after_assert",
        family: Family::AfterAssert,
        arity: 1,
        description: "guard contradicting a preceding assertion",
        build: |lang, d| {
            let a = d.fresh();
            let k = d.int(1, 50).to_string();
            let assert = match lang {
                Language::Python => scaffold(0, format!("assert {a} > 0")),
                Language::Java => scaffold(0, format!("assert {a} > 0;")),
            };
            if_shape(lang, vec![bind(lang, "int", &a, &k), assert], &format!("{a} < 0"))
        },
    },
    Entry {
        id: "after_assert_equal",
        family: Family::AfterAssert,
        arity: 1,
        description: "inequality guard after an equality assertion",
        build: |lang, d| {
            let a = d.fresh();
            let k = d.int(0, 99).to_string();
            let assert = match lang {
                Language::Python => scaffold(0, format!("assert {a} == {k}")),
                Language::Java => scaffold(0, format!("assert {a} == {k};")),
            };
            if_shape(lang, vec![bind(lang, "int", &a, &k), assert], &format!("{a} != {k}"))
        },
    },
    Entry {
        id: "after_return",
        family: Family::AfterReturn,
        arity: 1,
        description: "statements following an unconditional loop exit",
        build: |lang, d| match lang {
            Language::Python => {
                let a = d.fresh();
                d.lib("range");
                Shape {
                    head: vec![scaffold(0, format!("for {a} in range(1):")), scaffold(1, "break")],
                    body_depth: 1,
                    tail: Vec::new(),
                }
            }
            Language::Java => Shape {
                head: vec![scaffold(0, "do {"), scaffold(1, "if (true) break;")],
                body_depth: 1,
                tail: vec![scaffold(0, "} while (false);")],
            },
        },
    },
    Entry {
        id: "covered_branch",
        family: Family::CoveredBranch,
        arity: 1,
        description: "else-if guard implied by an earlier branch",
        build: |lang, d| {
            let a = d.fresh();
            let k = d.int(0, 30).to_string();
            let c = d.int(0, 15);
            let e = c + d.int(0, 6);
            covered(
                lang,
                bind(lang, "int", &a, &k),
                &format!("{a} > {c}"),
                &format!("{a} > {e}"),
            )
        },
    },
    Entry {
        id: "covered_branch_ge",
        family: Family::CoveredBranch,
        arity: 1,
        description: "else-if guard with a tighter inclusive bound",
        build: |lang, d| {
            let a = d.fresh();
            let k = d.int(0, 30).to_string();
            let c = d.int(0, 15);
            let e = c + d.int(0, 6);
            covered(
                lang,
                bind(lang, "int", &a, &k),
                &format!("{a} >= {c}"),
                &format!("{a} >= {e}"),
            )
        },
    },
    Entry {
        id: "floor_compare",
        family: Family::FloorCompare,
        arity: 2,
        description: "value compared below its own floor",
        build: |lang, d| {
            let a = d.fresh();
            let b = d.fresh();
            let x = d.decimal();
            let floor = match lang {
                Language::Python => bind(lang, "", &b, &format!("{a} // 1")),
                Language::Java => {
                    d.lib("Math");
                    bind(lang, "double", &b, &format!("Math.floor({a})"))
                }
            };
            if_shape(lang, vec![bind(lang, "double", &a, &x), floor], &format!("{a} < {b}"))
        },
    },
    Entry {
        id: "floor_compare_ceil",
        family: Family::FloorCompare,
        arity: 3,
        description: "value compared above its own ceiling",
        build: |lang, d| match lang {
            Language::Python => {
                let m = d.fresh();
                let a = d.fresh();
                let b = d.fresh();
                let x = d.decimal();
                let head = vec![
                    pre(format!("import math as {m}")),
                    pre(format!("{a} = {x}")),
                    pre(format!("{b} = {m}.ceil({a})")),
                ];
                if_shape(lang, head, &format!("{a} > {b}"))
            }
            Language::Java => {
                let a = d.fresh();
                let b = d.fresh();
                let x = d.decimal();
                d.lib("Math");
                let head = vec![
                    pre(format!("double {a} = {x};")),
                    pre(format!("double {b} = Math.ceil({a});")),
                ];
                if_shape(lang, head, &format!("{a} > {b}"))
            }
        },
    },
    Entry {
        id: "min_max",
        family: Family::MinMax,
        arity: 2,
        description: "minimum of a pair compared above its maximum",
        build: |lang, d| {
            let a = d.fresh();
            let b = d.fresh();
            let (ka, kb) = (d.int(-20, 40).to_string(), d.int(-20, 40).to_string());
            let (mn, mx) = match lang {
                Language::Python => {
                    d.lib("min");
                    d.lib("max");
                    ("min", "max")
                }
                Language::Java => {
                    d.lib("Math");
                    ("Math.min", "Math.max")
                }
            };
            let cond = format!("{mn}({a}, {b}) > {mx}({a}, {b})");
            if_shape(
                lang,
                vec![bind(lang, "int", &a, &ka), bind(lang, "int", &b, &kb)],
                &cond,
            )
        },
    },
    Entry {
        id: "min_max_bound",
        family: Family::MinMax,
        arity: 2,
        description: "minimum of a pair compared above one of its arguments",
        build: |lang, d| {
            let a = d.fresh();
            let b = d.fresh();
            let (ka, kb) = (d.int(-20, 40).to_string(), d.int(-20, 40).to_string());
            let mn = match lang {
                Language::Python => {
                    d.lib("min");
                    "min"
                }
                Language::Java => {
                    d.lib("Math");
                    "Math.min"
                }
            };
            let cond = format!("{mn}({a}, {b}) > {a}");
            if_shape(
                lang,
                vec![bind(lang, "int", &a, &ka), bind(lang, "int", &b, &kb)],
                &cond,
            )
        },
    },
    Entry {
        id: "modular_arith",
        family: Family::ModularArith,
        arity: 1,
        description: "remainder compared against its modulus",
        build: |lang, d| {
            let a = d.fresh();
            let k = d.int(-50, 99).to_string();
            let m = d.int(2, 9);
            if_shape(lang, vec![bind(lang, "int", &a, &k)], &format!("{a} % {m} >= {m}"))
        },
    },
    Entry {
        id: "modular_parity",
        family: Family::ModularArith,
        arity: 1,
        description: "doubled value tested for odd parity",
        build: |lang, d| {
            let a = d.fresh();
            let k = d.int(-50, 99).to_string();
            if_shape(lang, vec![bind(lang, "int", &a, &k)], &format!("({a} * 2) % 2 == 1"))
        },
    },
    Entry {
        id: "sorted_array",
        family: Family::SortedArray,
        arity: 1,
        description: "first element of a sorted array compared above the last",
        build: |lang, d| {
            let a = d.fresh();
            let items: Vec<String> = (0..3).map(|_| d.int(0, 20).to_string()).collect();
            let (head, last) = sorted_head(lang, d, &a, &items);
            if_shape(lang, head, &format!("{a}[0] > {last}"))
        },
    },
    Entry {
        id: "sorted_array_adjacent",
        family: Family::SortedArray,
        arity: 1,
        description: "adjacent elements of a sorted array out of order",
        build: |lang, d| {
            let a = d.fresh();
            let items: Vec<String> = (0..4).map(|_| d.int(0, 30).to_string()).collect();
            let i = d.int(0, 2);
            let (head, _) = sorted_head(lang, d, &a, &items);
            if_shape(lang, head, &format!("{a}[{i}] > {a}[{}]", i + 1))
        },
    },
    Entry {
        id: "squared_nonneg",
        family: Family::SquaredNonneg,
        arity: 1,
        description: "square compared below zero",
        build: |lang, d| {
            let a = d.fresh();
            let k = d.int(-25, 25).to_string();
            if_shape(lang, vec![bind(lang, "int", &a, &k)], &format!("{a} * {a} < 0"))
        },
    },
    Entry {
        id: "squared_sum",
        family: Family::SquaredNonneg,
        arity: 2,
        description: "sum of squares compared below zero",
        build: |lang, d| {
            let a = d.fresh();
            let b = d.fresh();
            let (ka, kb) = (d.int(-25, 25).to_string(), d.int(-25, 25).to_string());
            let cond = format!("{a} * {a} + {b} * {b} < 0");
            if_shape(
                lang,
                vec![bind(lang, "int", &a, &ka), bind(lang, "int", &b, &kb)],
                &cond,
            )
        },
    },
    Entry {
        id: "string_length",
        family: Family::StringLength,
        arity: 1,
        description: "string length compared below zero",
        build: |lang, d| {
            let a = d.fresh();
            let w = WORDS[d.int(0, WORDS.len() as i64 - 1) as usize];
            let cond = match lang {
                Language::Python => {
                    d.lib("len");
                    format!("len({a}) < 0")
                }
                Language::Java => format!("{a}.length() < 0"),
            };
            if_shape(lang, vec![bind(lang, "String", &a, &str_lit(lang, w))], &cond)
        },
    },
    Entry {
        id: "string_length_concat",
        family: Family::StringLength,
        arity: 1,
        description: "self-concatenation shorter than the original",
        build: |lang, d| {
            let a = d.fresh();
            let w = WORDS[d.int(0, WORDS.len() as i64 - 1) as usize];
            let cond = match lang {
                Language::Python => {
                    d.lib("len");
                    format!("len({a} + {a}) < len({a})")
                }
                Language::Java => format!("({a} + {a}).length() < {a}.length()"),
            };
            if_shape(lang, vec![bind(lang, "String", &a, &str_lit(lang, w))], &cond)
        },
    },
    Entry {
        id: "tautology",
        family: Family::Tautology,
        arity: 0,
        description: "comparison of two literals that is always false",
        build: |lang, d| {
            let k = d.int(0, 40);
            let l = k + d.int(1, 20);
            if_shape(lang, Vec::new(), &format!("{l} < {k}"))
        },
    },
    Entry {
        id: "type_contradiction",
        family: Family::TypeContradiction,
        arity: 1,
        description: "integer tested for being a string",
        build: |lang, d| {
            let a = d.fresh();
            let k = d.int(0, 99).to_string();
            match lang {
                Language::Python => {
                    d.lib("isinstance");
                    d.lib("str");
                    if_shape(lang, vec![bind(lang, "", &a, &k)], &format!("isinstance({a}, str)"))
                }
                Language::Java => {
                    d.lib("String");
                    if_shape(
                        lang,
                        vec![bind(lang, "Object", &a, &k)],
                        &format!("{a} instanceof String"),
                    )
                }
            }
        },
    },
    Entry {
        id: "type_contradiction_str",
        family: Family::TypeContradiction,
        arity: 1,
        description: "string tested for being an integer",
        build: |lang, d| {
            let a = d.fresh();
            let w = WORDS[d.int(0, WORDS.len() as i64 - 1) as usize];
            match lang {
                Language::Python => {
                    d.lib("isinstance");
                    d.lib("int");
                    if_shape(
                        lang,
                        vec![bind(lang, "", &a, &str_lit(lang, w))],
                        &format!("isinstance({a}, int)"),
                    )
                }
                Language::Java => {
                    d.lib("Integer");
                    if_shape(
                        lang,
                        vec![bind(lang, "Object", &a, &str_lit(lang, w))],
                        &format!("{a} instanceof Integer"),
                    )
                }
            }
        },
    },
];

fn covered(lang: Language, preamble: BlockLine, first: &str, second: &str) -> Shape {
    match lang {
        Language::Python => Shape {
            head: vec![
                preamble,
                scaffold(0, format!("if {first}:")),
                scaffold(1, "pass"),
                guard(0, format!("elif {second}:")),
            ],
            body_depth: 1,
            tail: Vec::new(),
        },
        Language::Java => Shape {
            head: vec![
                preamble,
                scaffold(0, format!("if ({first}) {{")),
                guard(0, format!("}} else if ({second}) {{")),
            ],
            body_depth: 1,
            tail: vec![scaffold(0, "}")],
        },
    }
}

/// Preamble binding `a` to a sorted array, plus the expression for its last
/// element.
fn sorted_head(lang: Language, d: &mut Draw, a: &str, items: &[String]) -> (Vec<BlockLine>, String) {
    let joined = items.join(", ");
    match lang {
        Language::Python => {
            d.lib("sorted");
            (vec![pre(format!("{a} = sorted([{joined}])"))], format!("{a}[-1]"))
        }
        Language::Java => {
            d.lib("java");
            (
                vec![
                    pre(format!("int[] {a} = {{{joined}}};")),
                    pre(format!("java.util.Arrays.sort({a});")),
                ],
                format!("{a}[{a}.length - 1]"),
            )
        }
    }
}

/// Two inert statements on a fresh local.
pub(crate) fn body(lang: Language, d: &mut Draw, depth: usize) -> Vec<BlockLine> {
    let t = d.fresh();
    let variant = d.int(0, 2);
    let (k, k2) = (d.int(1, 9), d.int(0, 99));
    let texts = match (lang, variant) {
        (Language::Python, 0) => [format!("{t} = []"), format!("{t}.append({k2})")],
        (Language::Python, 1) => [format!("{t} = {k}"), format!("{t} += {k2}")],
        (Language::Python, _) => [format!("{t} = [{k}, {k2}]"), format!("{t}.reverse()")],
        (Language::Java, 0) => [format!("int[] {t} = new int[{k}];"), format!("{t}[0] = {k2};")],
        (Language::Java, 1) => [format!("int {t} = {k};"), format!("{t} += {k2};")],
        (Language::Java, _) => {
            d.lib("StringBuilder");
            [
                format!("StringBuilder {t} = new StringBuilder();"),
                format!("{t}.append({k2});"),
            ]
        }
    };
    texts
        .into_iter()
        .map(|text| line(BlockRole::Body, depth, text))
        .collect()
}
