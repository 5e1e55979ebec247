use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{is_identifier_name, Ast, AstError, Node, NodeKind, NodeRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsertMode {
    /// Insert before the statement holding the target.
    Prepend,
    /// Put the replacement where the target was.
    Replace,
    /// Insert after the statement holding the target.
    Append,
}

/// Return a new tree with `replacement` placed relative to `target`.
///
/// For `Prepend` and `Append` a replacement of kind `Program` or `Block`
/// contributes all of its statements; an expression replacement is wrapped
/// in an expression statement. The input tree is left untouched; unchanged
/// subtrees are shared with it.
pub fn rewrite(
    ast: &Ast,
    target: &NodeRef,
    replacement: Node,
    mode: InsertMode,
) -> Result<Ast, AstError> {
    ast.get(target).ok_or(AstError::TargetNotInTree)?;
    match mode {
        InsertMode::Replace => {
            let root = replace_at(&ast.root, &target.0, Arc::new(replacement));
            Ok(Ast { root })
        }
        InsertMode::Prepend | InsertMode::Append => {
            let inserted: Vec<Arc<Node>> = match replacement.kind {
                NodeKind::Program | NodeKind::Block => replacement.children,
                k if k.is_statement() => vec![Arc::new(replacement)],
                _ => vec![Arc::new(Node::expression_statement(replacement))],
            };
            let (list_path, index) = if target.0.is_empty() {
                let idx = if mode == InsertMode::Prepend {
                    0
                } else {
                    ast.root.children.len()
                };
                (Vec::new(), idx)
            } else {
                let stmt = ast
                    .enclosing_statement(target)
                    .ok_or(AstError::TargetNotInTree)?;
                let (&last, parent) = stmt.0.split_last().expect("statement below root");
                let idx = if mode == InsertMode::Prepend {
                    last
                } else {
                    last + 1
                };
                (parent.to_vec(), idx)
            };
            let root = edit_at(&ast.root, &list_path, &mut |list| {
                let mut node = list.clone();
                node.children.splice(index..index, inserted.iter().cloned());
                Arc::new(node)
            });
            Ok(Ast { root })
        }
    }
}

fn replace_at(node: &Arc<Node>, path: &[usize], replacement: Arc<Node>) -> Arc<Node> {
    edit_at(node, path, &mut |_| replacement.clone())
}

fn edit_at(
    node: &Arc<Node>,
    path: &[usize],
    edit: &mut dyn FnMut(&Node) -> Arc<Node>,
) -> Arc<Node> {
    match path.split_first() {
        None => edit(node),
        Some((&i, rest)) => {
            let mut copy = Node::clone(node);
            copy.children[i] = edit_at(&node.children[i], rest, edit);
            Arc::new(copy)
        }
    }
}

/// Fill placeholders from `values`; unknown slots are left in place.
///
/// * A placeholder used as a member property takes an identifier, or a
///   string literal that is turned into `object.name` when it is a valid
///   identifier and into `object["name"]` otherwise.
/// * A placeholder expression statement whose value is a `Program` or
///   `Block` is replaced by that node's statements (possibly none).
pub fn substitute(ast: &Ast, values: &HashMap<String, Node>) -> Ast {
    Ast {
        root: subst(&ast.root, values),
    }
}

fn subst(node: &Arc<Node>, values: &HashMap<String, Node>) -> Arc<Node> {
    match node.kind {
        NodeKind::Placeholder => {
            return match values.get(node.token()) {
                Some(v) => Arc::new(v.clone()),
                None => node.clone(),
            }
        }
        NodeKind::MemberExpression if node.children[1].kind == NodeKind::Placeholder => {
            let object = subst(&node.children[0], values);
            let slot = node.children[1].token();
            let mut copy = Node::clone(node);
            copy.children[0] = object;
            if let Some(v) = values.get(slot) {
                let name = match v.kind {
                    NodeKind::Identifier | NodeKind::StringLiteral => v.token().to_string(),
                    _ => {
                        // Arbitrary expression: computed access.
                        copy.kind = NodeKind::IndexExpression;
                        copy.children[1] = Arc::new(v.clone());
                        return Arc::new(copy);
                    }
                };
                if is_identifier_name(&name) {
                    copy.children[1] = Arc::new(Node::ident(name));
                } else {
                    copy.kind = NodeKind::IndexExpression;
                    copy.children[1] = Arc::new(Node::string(name));
                }
            }
            return Arc::new(copy);
        }
        _ => {}
    }
    if node.children.is_empty() {
        return node.clone();
    }
    let is_list = matches!(node.kind, NodeKind::Program | NodeKind::Block);
    let mut children = Vec::with_capacity(node.children.len());
    let mut changed = false;
    for c in &node.children {
        if is_list
            && c.kind == NodeKind::ExpressionStatement
            && c.children[0].kind == NodeKind::Placeholder
        {
            if let Some(v) = values.get(c.children[0].token()) {
                changed = true;
                match v.kind {
                    NodeKind::Program | NodeKind::Block => {
                        children.extend(v.children.iter().cloned())
                    }
                    k if k.is_statement() => children.push(Arc::new(v.clone())),
                    _ => children.push(Arc::new(Node::expression_statement(v.clone()))),
                }
                continue;
            }
        }
        let s = subst(c, values);
        changed |= !Arc::ptr_eq(&s, c);
        children.push(s);
    }
    if !changed {
        return node.clone();
    }
    let mut copy = Node::clone(node);
    copy.children = children;
    Arc::new(copy)
}

#[cfg(test)]
mod tests {
    use super::super::{parse, print, Span};
    use super::*;

    #[test]
    fn replace_wraps_target_in_new_parent() {
        let ast = parse("marks.attr(\"r\", 3);").unwrap();
        let target = NodeRef(vec![0, 0]);
        let anchor = ast.get(&target).unwrap().clone();
        let wrapped = Node::method_call(
            anchor,
            "on",
            vec![Node::string("mouseover"), Node::ident("h")],
        );
        let out = rewrite(&ast, &target, wrapped, InsertMode::Replace).unwrap();
        assert_eq!(
            print(&out).unwrap(),
            "marks.attr(\"r\", 3).on(\"mouseover\", h);\n"
        );
        // inversion: the old anchor is now a grandchild of the new node
        let new_top = out.get(&target).unwrap();
        assert_eq!(new_top.method_name(), Some("on"));
        assert_eq!(
            new_top.child(0).unwrap().child(0).unwrap(),
            ast.get(&target).unwrap()
        );
        // original untouched
        assert_eq!(print(&ast).unwrap(), "marks.attr(\"r\", 3);\n");
    }

    #[test]
    fn append_comment_after_statement() {
        let ast = parse("a();\nb();").unwrap();
        let out = rewrite(
            &ast,
            &NodeRef(vec![0, 0]),
            Node::comment("// added"),
            InsertMode::Append,
        )
        .unwrap();
        assert_eq!(print(&out).unwrap(), "a();\n\n// added\nb();\n");
    }

    #[test]
    fn prepend_inside_block() {
        let ast = parse("f(function() {\n  a();\n});").unwrap();
        let a_call = NodeRef(vec![0, 0, 1, 0, 0, 0]);
        assert_eq!(ast.get(&a_call).unwrap().kind, NodeKind::CallExpression);
        let out = rewrite(
            &ast,
            &a_call,
            parse("z();").unwrap().root.as_ref().clone(),
            InsertMode::Prepend,
        )
        .unwrap();
        assert_eq!(
            print(&out).unwrap(),
            "f(function() {\n  z();\n  a();\n});\n"
        );
    }

    #[test]
    fn detached_target_is_rejected() {
        let ast = parse("a();").unwrap();
        let err = rewrite(
            &ast,
            &NodeRef(vec![3, 1]),
            Node::ident("x"),
            InsertMode::Replace,
        )
        .unwrap_err();
        assert_eq!(err, AstError::TargetNotInTree);
    }

    #[test]
    fn untouched_siblings_are_shared() {
        let ast = parse("a();\nb();\nc();").unwrap();
        let out = rewrite(
            &ast,
            &NodeRef(vec![1, 0]),
            Node::ident("x"),
            InsertMode::Replace,
        )
        .unwrap();
        assert!(Arc::ptr_eq(&ast.root.children[0], &out.root.children[0]));
        assert!(Arc::ptr_eq(&ast.root.children[2], &out.root.children[2]));
        assert_eq!(out.root.children[1].children[0].span, None::<Span>);
    }

    #[test]
    fn substitution_rules() {
        let ast = parse("x(d.{{A}});\ny(d.{{B}}, {{B}});\n{{EXTRA}};\nz();").unwrap();
        let mut values = HashMap::new();
        values.insert("A".to_string(), Node::string("sepalLength"));
        values.insert("B".to_string(), Node::string("Miles per gallon"));
        values.insert("EXTRA".to_string(), Node::program(vec![]));
        let out = substitute(&ast, &values);
        assert_eq!(
            print(&out).unwrap(),
            "x(d.sepalLength);\ny(d[\"Miles per gallon\"], \"Miles per gallon\");\nz();\n"
        );
    }
}
