#![allow(dead_code, clippy::needless_range_loop)]

pub mod plant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use geotrace::exec::{run, RunConfig};
use geotrace::lang::parse;
use geotrace::net::Diagram;

/// A generated program with the environment input it expects.
pub struct Generated {
    pub source: String,
    pub config: RunConfig,
}

impl Generated {
    pub fn run(&self) -> Diagram {
        let program = parse(&self.source).unwrap_or_else(|e| panic!("{}: {e:?}", self.source));
        run(&program, &self.source, &self.config)
    }

    pub fn run_seed(&self, seed: u64) -> Diagram {
        let program = parse(&self.source).unwrap_or_else(|e| panic!("{}: {e:?}", self.source));
        run(&program, &self.source, &self.config.clone().with_seed(seed))
    }
}

struct ThreadGen {
    name: String,
    globals: Vec<String>,
    locals: Vec<String>,
    live: Vec<String>,
    tokens_held: Vec<String>,
}

/// Random well-formed program. Each thread writes only objects it owns;
/// values move between threads by message or by ownership transfer.
pub fn program(seed: u64) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_threads = rng.gen_range(1..=4);
    let mut threads: Vec<ThreadGen> = (0..n_threads)
        .map(|i| ThreadGen {
            name: format!("t{i}"),
            globals: (0..rng.gen_range(0..=2)).map(|j| format!("g{i}_{j}")).collect(),
            locals: Vec::new(),
            live: Vec::new(),
            tokens_held: Vec::new(),
        })
        .collect();
    let n_tokens = rng.gen_range(0..=2);
    let mut tokens = Vec::new();
    for k in 0..n_tokens {
        let owner = rng.gen_range(0..n_threads);
        tokens.push((format!("k{k}"), owner));
        threads[owner].tokens_held.push(format!("k{k}"));
    }

    let mut bodies: Vec<Vec<String>> = Vec::new();
    for i in 0..n_threads {
        let len = rng.gen_range(1..=6);
        let mut cmds = Vec::new();
        for step in 0..len {
            let t = &mut threads[i];
            let vars: Vec<String> = t.globals.iter().chain(&t.live).chain(&t.tokens_held).cloned().collect();
            let cmd = match rng.gen_range(0..16) {
                0 | 1 => {
                    let name = format!("l{i}_{step}");
                    t.locals.push(name.clone());
                    t.live.push(name.clone());
                    format!("new {name}")
                }
                2 if !t.live.is_empty() => {
                    let k = rng.gen_range(0..t.live.len());
                    format!("dispose {}", t.live.remove(k))
                }
                3..=6 if !vars.is_empty() => {
                    format!("{} := {}", vars.choose(&mut rng).unwrap(), random_expr(&mut rng, &vars, 2))
                }
                7 if !vars.is_empty() => format!("{} := inp?", vars.choose(&mut rng).unwrap()),
                8 | 9 => format!("out!({})", random_expr(&mut rng, &vars, 2)),
                10 => "skip".to_string(),
                11 => {
                    let e = random_expr(&mut rng, &vars, 2);
                    format!("assert {e} = {e}")
                }
                // rare unmatched rendezvous, to exercise stuck runs
                12 if rng.gen_bool(0.2) => format!("{} := {}?", vars.first().map_or("x", |v| v), "b"),
                _ => format!("assert {} <= 9", rng.gen_range(0..=9)),
            };
            cmds.push(cmd);
        }
        let live = std::mem::take(&mut threads[i].live);
        for name in live {
            if rng.gen_bool(0.9) {
                cmds.push(format!("dispose {name}"));
            }
        }
        bodies.push(cmds);
    }

    if n_threads > 1 {
        // matched messages
        for _ in 0..rng.gen_range(0..=3) {
            let (i, j) = two_distinct(&mut rng, n_threads);
            let Some(target) = threads[j].globals.first().cloned() else {
                continue;
            };
            let ch = *["a", "a", "b"].choose(&mut rng).unwrap();
            let at = rng.gen_range(0..=bodies[i].len());
            bodies[i].insert(at, format!("{ch}!({})", rng.gen_range(0..=30)));
            let at = rng.gen_range(0..=bodies[j].len());
            bodies[j].insert(at, format!("{target} := {ch}?"));
        }
        // ownership handovers of tokens
        for (name, owner) in &tokens {
            if rng.gen_bool(0.3) {
                continue;
            }
            let j = loop {
                let j = rng.gen_range(0..n_threads);
                if j != *owner {
                    break j;
                }
            };
            bodies[*owner].push(format!("release {name}"));
            bodies[j].insert(0, format!("{name} := {name} + 1"));
            bodies[j].insert(0, format!("acquire {name}"));
        }
    }
    let bodies: Vec<String> = bodies
        .iter()
        .zip(&threads)
        .map(|(cmds, t)| format!("{}:({})", t.name, cmds.join("; ")))
        .collect();

    let body = random_tree(&mut rng, bodies);
    let mut globals = Vec::new();
    for t in &threads {
        for g in &t.globals {
            globals.push(format!("{g} = {} @ {}", rng.gen_range(-5..=20), t.name));
        }
    }
    for (name, owner) in &tokens {
        globals.push(format!("{name} = {} @ {}", rng.gen_range(0..=9), threads[*owner].name));
    }
    let source = if globals.is_empty() {
        body
    } else {
        format!("globals {{ {} }} {body}", globals.join(" "))
    };
    let inputs: Vec<i64> = (0..rng.gen_range(0..=4)).map(|_| rng.gen_range(-3..=50)).collect();
    let config = RunConfig::default()
        .with_seed(rng.gen())
        .with_inputs("inp", &inputs)
        .with_offset("inp", rng.gen_range(0..100));
    Generated { source, config }
}

fn two_distinct(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let i = rng.gen_range(0..n);
    let j = (i + rng.gen_range(1..n)) % n;
    (i, j)
}

fn random_expr(rng: &mut ChaCha8Rng, vars: &[String], depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.5) {
        return if !vars.is_empty() && rng.gen_bool(0.5) {
            vars.choose(rng).unwrap().clone()
        } else {
            rng.gen_range(0..=9).to_string()
        };
    }
    let op = ["+", "-", "*", "/"].choose(rng).unwrap();
    let right = if *op == "/" {
        rng.gen_range(1..=4).to_string()
    } else {
        random_expr(rng, vars, depth - 1)
    };
    format!("({} {op} {right})", random_expr(rng, vars, depth - 1))
}

/// Combine leaves in order under random binary operators.
fn random_tree(rng: &mut ChaCha8Rng, mut items: Vec<String>) -> String {
    while items.len() > 1 {
        let k = rng.gen_range(0..items.len() - 1);
        let op = *[";", "|", "|", "|||", ">>"].choose(rng).unwrap();
        let right = items.remove(k + 1);
        let left = items.remove(k);
        items.insert(k, format!("({left} {op} {right})"));
    }
    let only = items.pop().unwrap();
    // top-level parentheses are not part of the grammar for a lone leaf
    only.strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .filter(|_| only.matches('(').count() > 1 && balanced_outer(&only))
        .map(str::to_string)
        .unwrap_or(only)
}

fn balanced_outer(s: &str) -> bool {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && i + 1 < s.len() {
            return false;
        }
    }
    true
}
