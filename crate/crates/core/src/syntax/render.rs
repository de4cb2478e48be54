use std::fmt::Write;

use super::ast::{FormulaAst, NodeId, NodeKind, VarId};

// Context levels: 0 = binder body / top level, 1 = left of `|`,
// 2 = right of `|` or left of `&`, 3 = right of `&`, 4 = operand of `~`.

/// Renders `ast` in the concrete grammar; `parse_formula` inverts it.
pub fn render(ast: &FormulaAst) -> String {
    let mut out = String::new();
    render_node(ast, ast.root(), 0, &mut out);
    out
}

/// Renders the subtree rooted at `id`.
pub fn render_at(ast: &FormulaAst, id: NodeId) -> String {
    let mut out = String::new();
    render_node(ast, id, 0, &mut out);
    out
}

fn vars(ast: &FormulaAst, vs: &[VarId]) -> String {
    vs.iter().map(|v| ast.var_name(*v)).collect::<Vec<_>>().join(",")
}

fn render_node(ast: &FormulaAst, id: NodeId, ctx: u8, out: &mut String) {
    let paren = |out: &mut String, needed: bool, body: &dyn Fn(&mut String)| {
        if needed {
            out.push('(');
        }
        body(out);
        if needed {
            out.push(')');
        }
    };
    match ast.node(id) {
        NodeKind::True => out.push_str("top"),
        NodeKind::False => out.push_str("bot"),
        NodeKind::Rel(s, vs) => {
            let _ = write!(out, "{}({})", ast.vocab().name(*s), vars(ast, vs));
        }
        NodeKind::Eq(a, b) => {
            let _ = write!(out, "{} = {}", ast.var_name(*a), ast.var_name(*b));
        }
        NodeKind::Loop(l) => out.push_str(ast.label_name(*l)),
        NodeKind::Not(c) => {
            out.push('~');
            render_node(ast, *c, 4, out);
        }
        NodeKind::Or(l, r) => paren(out, ctx >= 2, &|out| {
            render_node(ast, *l, 1, out);
            out.push_str(" | ");
            render_node(ast, *r, 2, out);
        }),
        NodeKind::And(l, r) => paren(out, ctx >= 3, &|out| {
            render_node(ast, *l, 2, out);
            out.push_str(" & ");
            render_node(ast, *r, 3, out);
        }),
        kind => {
            let (head, body) = match kind {
                NodeKind::Exists(v, c) => (format!("exists {}", ast.var_name(*v)), *c),
                NodeKind::Forall(v, c) => (format!("forall {}", ast.var_name(*v)), *c),
                NodeKind::InsertElem(v, k, c) => {
                    let k = k.as_ref().map(|k| format!("[{k}]")).unwrap_or_default();
                    (format!("Ix {}{k}", ast.var_name(*v)), *c)
                }
                NodeKind::DeleteElem(v, c) => (format!("Dx {}", ast.var_name(*v)), *c),
                NodeKind::InsertTuple(s, vs, c) => (format!("ins {}({})", ast.vocab().name(*s), vars(ast, vs)), *c),
                NodeKind::DeleteTuple(s, vs, c) => (format!("del {}({})", ast.vocab().name(*s), vars(ast, vs)), *c),
                NodeKind::Label(l, k, c) => {
                    let k = k.as_ref().map(|k| format!("[{k}]")).unwrap_or_default();
                    (format!("loop {}{k}", ast.label_name(*l)), *c)
                }
                _ => unreachable!("atoms and connectives handled above"),
            };
            paren(out, ctx >= 1, &|out| {
                out.push_str(&head);
                out.push_str(" . ");
                render_node(ast, body, 0, out);
            });
        }
    }
}
