//! Call graph construction and strongly connected components.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;

/// Call graph: function name to the set of callees.
pub fn call_graph(program: &Program) -> BTreeMap<String, BTreeSet<String>> {
    let mut graph = BTreeMap::new();
    for f in &program.functions {
        let mut callees = BTreeSet::new();
        collect_calls(&f.body, &mut callees);
        graph.insert(f.name.clone(), callees);
    }
    graph
}

fn collect_calls(b: &Block, out: &mut BTreeSet<String>) {
    for s in &b.stmts {
        match &s.kind {
            StmtKind::AssignCall(_, callee, _) => {
                out.insert(callee.clone());
            }
            StmtKind::If(_, then_arm, else_arm) => {
                collect_calls(then_arm, out);
                collect_calls(else_arm, out);
            }
            StmtKind::Match {
                nil_arm, cons_arm, ..
            } => {
                collect_calls(nil_arm, out);
                collect_calls(cons_arm, out);
            }
            _ => {}
        }
    }
}

/// Strongly connected components of the call graph, in dependency order:
/// for every call from `f` to `g` across groups, `g`'s group comes first.
///
/// Tarjan's algorithm emits a component only once all components it can
/// reach are emitted, which is exactly the order analysis needs.
pub fn call_graph_sccs(program: &Program) -> Vec<Vec<String>> {
    let names: Vec<&str> = program.functions.iter().map(|f| f.name.as_str()).collect();
    let index_of: BTreeMap<&str, usize> =
        names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let graph = call_graph(program);
    let adj: Vec<Vec<usize>> = names
        .iter()
        .map(|n| {
            graph[*n]
                .iter()
                .filter_map(|callee| index_of.get(callee.as_str()).copied())
                .collect()
        })
        .collect();

    let mut state = Tarjan {
        adj: &adj,
        index: vec![None; names.len()],
        lowlink: vec![0; names.len()],
        on_stack: vec![false; names.len()],
        stack: Vec::new(),
        next_index: 0,
        components: Vec::new(),
    };
    for v in 0..names.len() {
        if state.index[v].is_none() {
            state.visit(v);
        }
    }
    state
        .components
        .into_iter()
        .map(|comp| comp.into_iter().map(|i| names[i].to_string()).collect())
        .collect()
}

struct Tarjan<'a> {
    adj: &'a [Vec<usize>],
    index: Vec<Option<usize>>,
    lowlink: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    next_index: usize,
    components: Vec<Vec<usize>>,
}

impl Tarjan<'_> {
    fn visit(&mut self, v: usize) {
        self.index[v] = Some(self.next_index);
        self.lowlink[v] = self.next_index;
        self.next_index += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
        for &w in &self.adj[v] {
            match self.index[w] {
                None => {
                    self.visit(w);
                    self.lowlink[v] = self.lowlink[v].min(self.lowlink[w]);
                }
                Some(wi) if self.on_stack[w] => {
                    self.lowlink[v] = self.lowlink[v].min(wi);
                }
                _ => {}
            }
        }
        if Some(self.lowlink[v]) == self.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = self.stack.pop().unwrap();
                self.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort();
            self.components.push(comp);
        }
    }
}
