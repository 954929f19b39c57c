//! Labels, Last sets and per-function control-flow graphs.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use crate::frontend::{
    render_bexpr, render_expr, Bexpr, ContractAst, Diagnostic, Expr, PartyRef, Rhs, Severity,
    Span, Stmt, Target,
};

pub type Label = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelKind {
    Header,
    Entry,
    Exit,
    If(Bexpr),
    Assign(Target, Rhs),
    Payout(PartyRef, Expr),
    Return,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelInfo {
    pub kind: LabelKind,
    /// Index into `ast.functions`; `None` for the header.
    pub function: Option<usize>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionLabels {
    pub entry: Label,
    pub exit: Label,
    pub last: BTreeSet<Label>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledContract {
    pub ast: ContractAst,
    pub labels: Vec<LabelInfo>,
    pub functions: Vec<FunctionLabels>,
    /// Last set of every if and every command, keyed by its label.
    last: HashMap<Label, BTreeSet<Label>>,
    /// First label after the full extent of every command within its function.
    continuation: HashMap<Label, Label>,
    /// First labels of the then and else lists of every if.
    branches: HashMap<Label, (Label, Option<Label>)>,
}

impl LabeledContract {
    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn info(&self, l: Label) -> &LabelInfo {
        &self.labels[l as usize]
    }

    /// Last set of the command (or if) labeled `l`.
    pub fn last_of(&self, l: Label) -> &BTreeSet<Label> {
        &self.last[&l]
    }

    /// Last set of function `f`, i.e. of its body.
    pub fn last_of_function(&self, f: usize) -> &BTreeSet<Label> {
        &self.functions[f].last
    }

    /// The function containing `l`.
    pub fn function_of(&self, l: Label) -> Option<usize> {
        self.labels[l as usize].function
    }

    pub fn is_exit(&self, l: Label) -> bool {
        matches!(self.labels[l as usize].kind, LabelKind::Exit)
    }

    /// First body label of `f`.
    pub fn first_body_label(&self, f: usize) -> Label {
        self.functions[f].entry + 1
    }
}

struct Labeler {
    labels: Vec<LabelInfo>,
    last: HashMap<Label, BTreeSet<Label>>,
    continuation: HashMap<Label, Label>,
    branches: HashMap<Label, (Label, Option<Label>)>,
}

impl Labeler {
    fn push(&mut self, kind: LabelKind, function: usize, span: Span) -> Label {
        self.labels.push(LabelInfo { kind, function: Some(function), span });
        (self.labels.len() - 1) as Label
    }

    /// Labels a command list; returns the labels of its top-level commands and its Last set.
    fn list(&mut self, body: &[Stmt], f: usize) -> (Vec<Label>, BTreeSet<Label>) {
        let mut heads = Vec::new();
        let mut last = BTreeSet::new();
        for st in body {
            let (head, l) = self.command(st, f);
            heads.push(head);
            last = l;
        }
        (heads, last)
    }

    fn command(&mut self, st: &Stmt, f: usize) -> (Label, BTreeSet<Label>) {
        let (l, last) = match st {
            Stmt::If { cond, then, els, span } => {
                let l = self.push(LabelKind::If(cond.clone()), f, *span);
                let (then_heads, mut last) = self.list(then, f);
                let else_head = match els {
                    Some(e) => {
                        let (heads, else_last) = self.list(e, f);
                        last.extend(else_last);
                        Some(heads[0])
                    }
                    None => {
                        last.insert(l);
                        None
                    }
                };
                self.branches.insert(l, (then_heads[0], else_head));
                (l, last)
            }
            Stmt::Assign { target, value, span } => {
                let l = self.push(LabelKind::Assign(target.clone(), value.clone()), f, *span);
                (l, BTreeSet::from([l]))
            }
            Stmt::Payout { to, amount, span } => {
                let l = self.push(LabelKind::Payout(to.clone(), amount.clone()), f, *span);
                (l, BTreeSet::from([l]))
            }
            Stmt::Return { span } => {
                let l = self.push(LabelKind::Return, f, *span);
                (l, BTreeSet::from([l]))
            }
        };
        self.last.insert(l, last.clone());
        (l, last)
    }

    /// Records, for every command, the label where control continues after it.
    fn continuations(&mut self, body: &[Stmt], heads: &[Label], after: Label) {
        for (i, st) in body.iter().enumerate() {
            let next = heads.get(i + 1).copied().unwrap_or(after);
            self.continuation.insert(heads[i], next);
            if let Stmt::If { then, els, .. } = st {
                let (t, e) = self.branches[&heads[i]];
                let then_heads = self.heads_from(then, t);
                self.continuations(then, &then_heads, next);
                if let (Some(e), Some(els)) = (e, els) {
                    let else_heads = self.heads_from(els, e);
                    self.continuations(els, &else_heads, next);
                }
            }
        }
    }

    /// Recovers the labels of the top-level commands of a list from its first label.
    fn heads_from(&self, body: &[Stmt], first: Label) -> Vec<Label> {
        let mut out = Vec::with_capacity(body.len());
        let mut l = first;
        for st in body {
            out.push(l);
            l += extent(st);
        }
        out
    }
}

/// Number of labels occupied by a command.
fn extent(st: &Stmt) -> Label {
    match st {
        Stmt::If { then, els, .. } => {
            1 + then.iter().map(extent).sum::<Label>() + els.as_ref().map_or(0, |e| e.iter().map(extent).sum())
        }
        _ => 1,
    }
}

pub fn assign_labels(ast: &ContractAst) -> LabeledContract {
    let mut lb = Labeler {
        labels: vec![LabelInfo { kind: LabelKind::Header, function: None, span: Span::default() }],
        last: HashMap::new(),
        continuation: HashMap::new(),
        branches: HashMap::new(),
    };
    let mut functions = Vec::new();
    for (fi, f) in ast.functions.iter().enumerate() {
        let entry = lb.push(LabelKind::Entry, fi, f.span);
        let (heads, last) = lb.list(&f.body, fi);
        let exit = lb.push(LabelKind::Exit, fi, f.span);
        lb.continuations(&f.body, &heads, exit);
        functions.push(FunctionLabels { entry, exit, last });
    }
    LabeledContract {
        ast: ast.clone(),
        labels: lb.labels,
        functions,
        last: lb.last,
        continuation: lb.continuation,
        branches: lb.branches,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CfgEdge {
    pub from: Label,
    pub to: Label,
    /// `None` is the always-true condition.
    pub cond: Option<Bexpr>,
}

impl PartialOrd for Bexpr {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bexpr {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        render_bexpr(self).cmp(&render_bexpr(other))
    }
}

impl std::hash::Hash for Bexpr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        render_bexpr(self).hash(state)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    pub function: usize,
    pub vertices: Vec<Label>,
    pub edges: Vec<CfgEdge>,
}

impl Cfg {
    pub fn out_edges(&self, l: Label) -> impl Iterator<Item = &CfgEdge> {
        self.edges.iter().filter(move |e| e.from == l)
    }
}

pub fn build_cfg(lc: &LabeledContract, f: usize) -> Cfg {
    let fl = &lc.functions[f];
    let vertices: Vec<Label> = (fl.entry..=fl.exit).collect();
    let is_return = |l: Label| matches!(lc.labels[l as usize].kind, LabelKind::Return);
    let mut edges: BTreeSet<CfgEdge> = BTreeSet::new();
    edges.insert(CfgEdge { from: fl.entry, to: fl.entry + 1, cond: None });
    for &l in &vertices[1..vertices.len() - 1] {
        match &lc.labels[l as usize].kind {
            LabelKind::Return => {
                edges.insert(CfgEdge { from: l, to: fl.exit, cond: None });
            }
            LabelKind::Assign(..) | LabelKind::Payout(..) => {
                let next = lc.continuation[&l];
                // Same scope: the next command of the same list.
                if next == l + 1 && next != fl.exit {
                    edges.insert(CfgEdge { from: l, to: next, cond: None });
                }
            }
            LabelKind::If(cond) => {
                let (t, e) = lc.branches[&l];
                let plus = lc.continuation[&l];
                edges.insert(CfgEdge { from: l, to: t, cond: Some(cond.clone()) });
                let not = Bexpr::Not(Box::new(cond.clone()));
                edges.insert(CfgEdge { from: l, to: e.unwrap_or(plus), cond: Some(not) });
                let mut joins = list_last(lc, t, plus);
                if let Some(e) = e {
                    joins.extend(list_last(lc, e, plus));
                }
                for j in joins {
                    // Nested ifs reach `plus` through their own negated edge.
                    if !is_return(j) && !matches!(lc.labels[j as usize].kind, LabelKind::If(_)) {
                        edges.insert(CfgEdge { from: j, to: plus, cond: None });
                    }
                }
            }
            LabelKind::Header | LabelKind::Entry | LabelKind::Exit => {}
        }
    }
    for &l in &fl.last {
        if !is_return(l) && !matches!(lc.labels[l as usize].kind, LabelKind::If(_)) {
            edges.insert(CfgEdge { from: l, to: fl.exit, cond: None });
        }
    }
    Cfg { function: f, vertices, edges: edges.into_iter().collect() }
}

/// Last set of the command list starting at `first`, which ends where control continues at `after`.
fn list_last(lc: &LabeledContract, first: Label, after: Label) -> BTreeSet<Label> {
    let mut l = first;
    loop {
        let next = lc.continuation[&l];
        if next == after {
            return lc.last[&l].clone();
        }
        l = next;
    }
}

/// Deterministic successor structure of one label, derived from the CFG.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Next {
    Goto(Label),
    Branch { cond: Bexpr, then: Label, els: Label },
    /// Exit labels and the header.
    Stop,
}

/// Successor table for every label of the contract.
pub fn successor_table(lc: &LabeledContract) -> Vec<Next> {
    let mut out = vec![Next::Stop; lc.label_count()];
    for f in 0..lc.functions.len() {
        let cfg = build_cfg(lc, f);
        for &l in &cfg.vertices {
            let outs: Vec<&CfgEdge> = cfg.out_edges(l).collect();
            out[l as usize] = match (&lc.labels[l as usize].kind, outs.as_slice()) {
                (LabelKind::Exit, []) => Next::Stop,
                (LabelKind::If(c), [a, b]) => {
                    let (t, e) = if a.cond.as_ref() == Some(c) { (a.to, b.to) } else { (b.to, a.to) };
                    Next::Branch { cond: c.clone(), then: t, els: e }
                }
                (_, [e]) => Next::Goto(e.to),
                (_, outs) => panic!("label {l} has {} out-edges", outs.len()),
            };
        }
    }
    out
}

/// Warnings for labels not reachable from their function's entry.
pub fn unreachable_warnings(lc: &LabeledContract) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for f in 0..lc.functions.len() {
        let cfg = build_cfg(lc, f);
        let mut seen: BTreeSet<Label> = BTreeSet::from([lc.functions[f].entry]);
        let mut stack = vec![lc.functions[f].entry];
        while let Some(l) = stack.pop() {
            for e in cfg.out_edges(l) {
                if seen.insert(e.to) {
                    stack.push(e.to);
                }
            }
        }
        for &l in &cfg.vertices {
            if !seen.contains(&l) && !matches!(lc.labels[l as usize].kind, LabelKind::Exit) {
                out.push(Diagnostic {
                    span: lc.labels[l as usize].span,
                    severity: Severity::Warning,
                    message: format!("label {l} in '{}' is unreachable", lc.ast.functions[f].name),
                });
            }
        }
    }
    out
}

/// Short text of the entity behind a label.
pub fn label_text(lc: &LabeledContract, l: Label) -> String {
    let info = &lc.labels[l as usize];
    let fname = info.function.map(|f| lc.ast.functions[f].name.as_str()).unwrap_or("");
    match &info.kind {
        LabelKind::Header => format!("contract {}", lc.ast.name),
        LabelKind::Entry => format!("entry {fname}"),
        LabelKind::Exit => format!("exit {fname}"),
        LabelKind::If(c) => format!("if {}", render_bexpr(c)),
        LabelKind::Assign(t, Rhs::Expr(e)) => format!("{} = {}", target_text(t), render_expr(e)),
        LabelKind::Assign(t, Rhs::Party(p)) => format!("{} = {}", target_text(t), party_text(p)),
        LabelKind::Payout(p, e) => format!("payout({}, {})", party_text(p), render_expr(e)),
        LabelKind::Return => "return".into(),
    }
}

fn party_text(p: &PartyRef) -> String {
    match p {
        PartyRef::Caller => "caller".into(),
        PartyRef::Null => "null".into(),
        PartyRef::Var(n) => n.clone(),
        PartyRef::Me => "p".into(),
    }
}

fn target_text(t: &Target) -> String {
    match t {
        Target::Var(n) => n.clone(),
        Target::MapEntry(m, i) => format!("{m}[{}]", party_text(i)),
    }
}

/// Graphviz DOT rendering of one function's CFG.
pub fn to_dot(lc: &LabeledContract, cfg: &Cfg) -> String {
    let esc = |s: String| s.replace('\\', "\\\\").replace('"', "\\\"");
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", lc.ast.functions[cfg.function].name).unwrap();
    for &l in &cfg.vertices {
        writeln!(out, "  n{l} [label=\"{l}: {}\"];", esc(label_text(lc, l))).unwrap();
    }
    for e in &cfg.edges {
        match &e.cond {
            None => writeln!(out, "  n{} -> n{};", e.from, e.to).unwrap(),
            Some(c) => writeln!(out, "  n{} -> n{} [label=\"{}\"];", e.from, e.to, esc(render_bexpr(c))).unwrap(),
        }
    }
    out.push_str("}\n");
    out
}
