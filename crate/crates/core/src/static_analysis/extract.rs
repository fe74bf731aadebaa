//! Definition, import and call-site extraction from one syntax tree.
//!
//! The walker keeps a scope stack (module, class, function). Function scopes
//! carry their full set of local bindings, computed before the body is visited,
//! so that a call site knows whether its head name is a local, a nested
//! definition, the method receiver, or free.

use std::collections::{BTreeMap, BTreeSet};

use rustpython_parser::ast::{self, Ranged};
use serde::Serialize;

use super::parse::ParsedModule;
use crate::model::QualifiedName;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassDef {
    pub name: QualifiedName,
    pub module: QualifiedName,
    /// Nearest enclosing component (module or class).
    pub parent: QualifiedName,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FunctionDef {
    pub signature: QualifiedName,
    pub arity: u32,
    /// Nearest enclosing component (module or class).
    pub owner: QualifiedName,
    /// Class the function is a direct method of.
    pub enclosing_class: Option<QualifiedName>,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImportKind {
    /// Unconditional module-scope import; contributes an alias.
    Plain,
    /// Inside `if`/`try`/loops at module scope; recorded only.
    Conditional,
    /// `from x import *`; recorded only.
    Star,
    /// Inside a function or class body; the name is a local binding there.
    Local,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImportBinding {
    /// Bound local name; `None` for star imports.
    pub alias: Option<String>,
    pub target: QualifiedName,
    pub kind: ImportKind,
}

/// Definitions and imports of one module.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EntityTable {
    pub module: Option<QualifiedName>,
    pub is_package: bool,
    pub classes: Vec<ClassDef>,
    pub functions: Vec<FunctionDef>,
    pub imports: Vec<ImportBinding>,
    /// Module-scope names bound by assignment, loops, `with`, and similar.
    pub module_variables: BTreeSet<String>,
    pub warnings: Vec<String>,
}

impl EntityTable {
    pub fn module_name(&self) -> &QualifiedName {
        self.module.as_ref().expect("entity table without module")
    }

    /// Active aliases; later bindings of the same name replace earlier ones.
    pub fn aliases(&self) -> BTreeMap<&str, &QualifiedName> {
        self.imports
            .iter()
            .filter(|b| b.kind == ImportKind::Plain)
            .filter_map(|b| b.alias.as_deref().map(|a| (a, &b.target)))
            .collect()
    }

    /// Names bound by conditional imports; these block resolution.
    pub fn opaque_names(&self) -> BTreeSet<&str> {
        self.imports
            .iter()
            .filter(|b| b.kind == ImportKind::Conditional)
            .filter_map(|b| b.alias.as_deref())
            .collect()
    }

    /// Top-level functions and classes by bare name.
    pub fn module_definitions(&self) -> BTreeMap<&str, &QualifiedName> {
        let module = self.module_name();
        let mut out = BTreeMap::new();
        for c in &self.classes {
            if c.name.parent().as_ref() == Some(module) {
                out.insert(c.name.last(), &c.name);
            }
        }
        for f in &self.functions {
            if f.signature.parent().as_ref() == Some(module) {
                out.insert(f.signature.last(), &f.signature);
            }
        }
        out
    }
}

/// How a call's head name is bound at the call site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "scope", content = "name")]
pub enum HeadScope {
    /// Not bound by any enclosing function, lambda or comprehension.
    Free,
    /// Parameter or local variable of an enclosing function.
    Local,
    /// Function defined inside an enclosing function.
    LocalDef(QualifiedName),
    /// First parameter of the enclosing method of this class.
    SelfReceiver(QualifiedName),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "form", content = "text")]
pub enum Callee {
    /// `f(...)`, `a.b.f(...)`.
    Dotted(Vec<String>),
    /// `<expr>.attr(...)` where the receiver is not a plain name chain.
    Attribute(String),
    /// Anything else (subscripts, lambdas, call results).
    Opaque,
}

impl Callee {
    pub fn text(&self) -> String {
        match self {
            Callee::Dotted(segs) => segs.join("."),
            Callee::Attribute(attr) => format!("<expr>.{attr}"),
            Callee::Opaque => "<expr>".to_string(),
        }
    }
}

/// Syntactic position of a call relevant to dataflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "context", content = "site")]
pub enum SiteContext {
    /// Result bound by an assignment statement or `:=`.
    AssignedValue,
    /// Direct argument of the call with this ordinal in the same caller.
    ArgumentOf(u32),
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RawCallSite {
    pub caller: QualifiedName,
    pub callee: Callee,
    /// Position within the caller, in source walk order.
    pub ordinal: u32,
    pub line: usize,
    pub head: HeadScope,
    pub context: SiteContext,
}

/// Everything extracted from one module.
#[derive(Debug, Clone, Default)]
pub struct ModuleFacts {
    pub entities: EntityTable,
    pub sites: Vec<RawCallSite>,
    /// Calls at module or class-body level, which have no enclosing operation.
    pub unattributed_calls: usize,
}

/// Definitions and import bindings of a module.
pub fn extract_entities(module: &ParsedModule) -> EntityTable {
    extract_module(module).entities
}

/// Call sites of a module, with head-name scope information.
pub fn extract_call_sites(module: &ParsedModule) -> Vec<RawCallSite> {
    extract_module(module).sites
}

pub fn extract_module(parsed: &ParsedModule) -> ModuleFacts {
    let module = parsed.file.module.clone();
    let mut walker = Walker {
        line_starts: parsed.line_starts.as_slice(),
        module: module.clone(),
        is_package: parsed.file.is_package,
        scopes: vec![Scope::Module],
        shadow_layers: Vec::new(),
        conditional_depth: 0,
        facts: ModuleFacts {
            entities: EntityTable {
                module: Some(module),
                is_package: parsed.file.is_package,
                ..EntityTable::default()
            },
            ..ModuleFacts::default()
        },
        seen_functions: BTreeSet::new(),
        next_ordinal: BTreeMap::new(),
    };
    let bindings = collect_bindings(&parsed.suite);
    walker.facts.entities.module_variables = bindings.variables;
    walker.visit_body(&parsed.suite);
    walker.facts
}

#[derive(Debug)]
struct FunctionScope {
    signature: QualifiedName,
    locals: BTreeSet<String>,
    nested_defs: BTreeMap<String, QualifiedName>,
    /// `(receiver name, class)` for methods that take an instance or class.
    receiver: Option<(String, QualifiedName)>,
}

#[derive(Debug)]
enum Scope {
    Module,
    Class(QualifiedName),
    Function(FunctionScope),
}

struct Walker<'a> {
    line_starts: &'a [usize],
    module: QualifiedName,
    #[allow(dead_code)]
    is_package: bool,
    scopes: Vec<Scope>,
    /// Lambda parameters and comprehension targets currently in scope.
    shadow_layers: Vec<BTreeSet<String>>,
    conditional_depth: usize,
    facts: ModuleFacts,
    seen_functions: BTreeSet<QualifiedName>,
    next_ordinal: BTreeMap<QualifiedName, u32>,
}

impl Walker<'_> {
    fn line_of(&self, node: &impl Ranged) -> usize {
        let offset = u32::from(node.start()) as usize;
        match self.line_starts.binary_search(&offset) {
            Ok(idx) => idx + 1,
            Err(idx) => idx,
        }
    }

    /// Qualified name prefix for definitions in the current scope.
    fn current_prefix(&self) -> QualifiedName {
        match self.scopes.last() {
            Some(Scope::Class(name)) => name.clone(),
            Some(Scope::Function(f)) => f.signature.clone(),
            _ => self.module.clone(),
        }
    }

    /// Nearest enclosing component: innermost class, else the module.
    fn current_component(&self) -> QualifiedName {
        self.scopes
            .iter()
            .rev()
            .find_map(|s| match s {
                Scope::Class(name) => Some(name.clone()),
                _ => None,
            })
            .unwrap_or_else(|| self.module.clone())
    }

    fn current_function(&self) -> Option<&FunctionScope> {
        self.scopes.iter().rev().find_map(|s| match s {
            Scope::Function(f) => Some(f),
            _ => None,
        })
    }

    fn in_function(&self) -> bool {
        self.current_function().is_some()
    }

    fn at_module_scope(&self) -> bool {
        matches!(self.scopes.last(), Some(Scope::Module))
    }

    fn warn(&mut self, message: String) {
        self.facts.entities.warnings.push(message);
    }

    fn visit_body(&mut self, body: &[ast::Stmt]) {
        for stmt in body {
            self.visit_stmt(stmt);
        }
    }

    fn visit_conditional_body(&mut self, body: &[ast::Stmt]) {
        self.conditional_depth += 1;
        self.visit_body(body);
        self.conditional_depth -= 1;
    }

    fn visit_stmt(&mut self, stmt: &ast::Stmt) {
        use ast::Stmt;
        match stmt {
            Stmt::FunctionDef(def) => {
                self.visit_function(&def.name, &def.args, &def.body, &def.decorator_list, stmt)
            }
            Stmt::AsyncFunctionDef(def) => {
                self.visit_function(&def.name, &def.args, &def.body, &def.decorator_list, stmt)
            }
            Stmt::ClassDef(def) => self.visit_class(def),
            Stmt::Import(imp) => {
                for alias in &imp.names {
                    self.record_import(alias.name.as_str(), alias.asname.as_ref().map(|a| a.as_str()), false);
                }
            }
            Stmt::ImportFrom(imp) => self.record_import_from(imp),
            Stmt::Return(s) => self.visit_opt_expr(s.value.as_deref(), SiteContext::Other),
            Stmt::Delete(s) => self.visit_exprs(&s.targets),
            Stmt::Assign(s) => {
                self.visit_exprs(&s.targets);
                self.visit_expr(&s.value, SiteContext::AssignedValue);
            }
            Stmt::AugAssign(s) => {
                self.visit_expr(&s.target, SiteContext::Other);
                self.visit_expr(&s.value, SiteContext::AssignedValue);
            }
            Stmt::AnnAssign(s) => {
                self.visit_expr(&s.target, SiteContext::Other);
                self.visit_opt_expr(s.value.as_deref(), SiteContext::AssignedValue);
            }
            Stmt::TypeAlias(_) => {}
            Stmt::For(s) => {
                self.visit_expr(&s.target, SiteContext::Other);
                self.visit_expr(&s.iter, SiteContext::Other);
                self.visit_conditional_body(&s.body);
                self.visit_conditional_body(&s.orelse);
            }
            Stmt::AsyncFor(s) => {
                self.visit_expr(&s.target, SiteContext::Other);
                self.visit_expr(&s.iter, SiteContext::Other);
                self.visit_conditional_body(&s.body);
                self.visit_conditional_body(&s.orelse);
            }
            Stmt::While(s) => {
                self.visit_expr(&s.test, SiteContext::Other);
                self.visit_conditional_body(&s.body);
                self.visit_conditional_body(&s.orelse);
            }
            Stmt::If(s) => {
                self.visit_expr(&s.test, SiteContext::Other);
                self.visit_conditional_body(&s.body);
                self.visit_conditional_body(&s.orelse);
            }
            Stmt::With(s) => {
                for item in &s.items {
                    self.visit_expr(&item.context_expr, SiteContext::Other);
                }
                self.visit_conditional_body(&s.body);
            }
            Stmt::AsyncWith(s) => {
                for item in &s.items {
                    self.visit_expr(&item.context_expr, SiteContext::Other);
                }
                self.visit_conditional_body(&s.body);
            }
            Stmt::Match(s) => {
                self.visit_expr(&s.subject, SiteContext::Other);
                for case in &s.cases {
                    self.visit_opt_expr(case.guard.as_deref(), SiteContext::Other);
                    self.visit_conditional_body(&case.body);
                }
            }
            Stmt::Raise(s) => {
                self.visit_opt_expr(s.exc.as_deref(), SiteContext::Other);
                self.visit_opt_expr(s.cause.as_deref(), SiteContext::Other);
            }
            Stmt::Try(s) => self.visit_try(&s.body, &s.handlers, &s.orelse, &s.finalbody),
            Stmt::TryStar(s) => self.visit_try(&s.body, &s.handlers, &s.orelse, &s.finalbody),
            Stmt::Assert(s) => {
                self.visit_expr(&s.test, SiteContext::Other);
                self.visit_opt_expr(s.msg.as_deref(), SiteContext::Other);
            }
            Stmt::Expr(s) => self.visit_expr(&s.value, SiteContext::Other),
            Stmt::Global(_) | Stmt::Nonlocal(_) | Stmt::Pass(_) | Stmt::Break(_) | Stmt::Continue(_) => {}
        }
    }

    fn visit_try(
        &mut self,
        body: &[ast::Stmt],
        handlers: &[ast::ExceptHandler],
        orelse: &[ast::Stmt],
        finalbody: &[ast::Stmt],
    ) {
        self.visit_conditional_body(body);
        for handler in handlers {
            let ast::ExceptHandler::ExceptHandler(h) = handler;
            self.visit_opt_expr(h.type_.as_deref(), SiteContext::Other);
            self.visit_conditional_body(&h.body);
        }
        self.visit_conditional_body(orelse);
        self.visit_conditional_body(finalbody);
    }

    fn visit_function(
        &mut self,
        name: &ast::Identifier,
        args: &ast::Arguments,
        body: &[ast::Stmt],
        decorators: &[ast::Expr],
        node: &ast::Stmt,
    ) {
        // Decorators and defaults evaluate in the enclosing scope.
        self.visit_exprs(decorators);
        for arg in args.posonlyargs.iter().chain(&args.args).chain(&args.kwonlyargs) {
            self.visit_opt_expr(arg.default.as_deref(), SiteContext::Other);
        }

        let prefix = self.current_prefix();
        let signature = match prefix.child(name.as_str()) {
            Ok(sig) => sig,
            Err(e) => {
                self.warn(format!("{}: cannot qualify function {}: {e}", self.module, name.as_str()));
                return;
            }
        };
        let enclosing_class = match self.scopes.last() {
            Some(Scope::Class(class)) => Some(class.clone()),
            _ => None,
        };
        let params = parameter_names(args);
        let arity = params.len() as u32;
        let is_static = decorators.iter().any(|d| decorator_is(d, "staticmethod"));
        let receiver = match (&enclosing_class, params.first()) {
            (Some(class), Some(first)) if !is_static => Some((first.clone(), class.clone())),
            _ => None,
        };

        if self.seen_functions.insert(signature.clone()) {
            let line = self.line_of(node);
            self.facts.entities.functions.push(FunctionDef {
                signature: signature.clone(),
                arity,
                owner: self.current_component(),
                enclosing_class,
                line,
            });
        } else {
            self.warn(format!("{signature}: redefinition ignored, first definition kept"));
        }

        let mut bindings = collect_bindings(body);
        bindings.variables.extend(params);
        let mut locals = bindings.variables;
        locals.extend(bindings.nested_defs.iter().cloned());
        locals.extend(bindings.other_names);
        for g in &bindings.globals {
            locals.remove(g);
        }
        let nested_defs = bindings
            .nested_defs
            .iter()
            .filter_map(|n| signature.child(n).ok().map(|q| (n.clone(), q)))
            .collect();

        self.scopes.push(Scope::Function(FunctionScope {
            signature,
            locals,
            nested_defs,
            receiver,
        }));
        let saved_layers = std::mem::take(&mut self.shadow_layers);
        let saved_conditional = std::mem::replace(&mut self.conditional_depth, 0);
        self.visit_body(body);
        self.conditional_depth = saved_conditional;
        self.shadow_layers = saved_layers;
        self.scopes.pop();
    }

    fn visit_class(&mut self, def: &ast::StmtClassDef) {
        self.visit_exprs(&def.decorator_list);
        self.visit_exprs(&def.bases);
        for kw in &def.keywords {
            self.visit_expr(&kw.value, SiteContext::Other);
        }
        let name = match self.current_prefix().child(def.name.as_str()) {
            Ok(n) => n,
            Err(e) => {
                self.warn(format!("{}: cannot qualify class {}: {e}", self.module, def.name.as_str()));
                return;
            }
        };
        if self.facts.entities.classes.iter().any(|c| c.name == name) {
            self.warn(format!("{name}: class redefinition ignored, first definition kept"));
        } else {
            self.facts.entities.classes.push(ClassDef {
                name: name.clone(),
                module: self.module.clone(),
                parent: self.current_component(),
            });
        }
        self.scopes.push(Scope::Class(name));
        let saved_conditional = std::mem::replace(&mut self.conditional_depth, 0);
        self.visit_body(&def.body);
        self.conditional_depth = saved_conditional;
        self.scopes.pop();
    }

    fn import_kind(&self) -> ImportKind {
        if !self.at_module_scope() {
            ImportKind::Local
        } else if self.conditional_depth > 0 {
            ImportKind::Conditional
        } else {
            ImportKind::Plain
        }
    }

    fn record_import(&mut self, dotted: &str, asname: Option<&str>, _from: bool) {
        let Ok(target) = QualifiedName::parse(dotted) else {
            self.warn(format!("{}: unparseable import {dotted}", self.module));
            return;
        };
        let kind = self.import_kind();
        let binding = match asname {
            Some(alias) => ImportBinding {
                alias: Some(alias.to_string()),
                target,
                kind,
            },
            // `import a.b` binds `a`.
            None => {
                let head = target.first().to_string();
                ImportBinding {
                    alias: Some(head.clone()),
                    target: QualifiedName::parse(&head).unwrap_or(target),
                    kind,
                }
            }
        };
        self.facts.entities.imports.push(binding);
    }

    /// Base package for a relative import of the given level.
    fn relative_base(&self, level: u32) -> Option<QualifiedName> {
        let mut base = if self.facts.entities.is_package {
            Some(self.module.clone())
        } else {
            self.module.parent()
        };
        for _ in 1..level {
            base = base.and_then(|b| b.parent());
        }
        base
    }

    fn record_import_from(&mut self, imp: &ast::StmtImportFrom) {
        let level = imp.level.as_ref().map_or(0, |l| l.to_u32());
        let source = match (level, imp.module.as_ref()) {
            (0, Some(m)) => QualifiedName::parse(m.as_str()).ok(),
            (0, None) => None,
            (lvl, m) => self.relative_base(lvl).and_then(|base| match m {
                Some(m) => QualifiedName::parse(m.as_str()).ok().map(|rest| base.join(&rest)),
                None => Some(base),
            }),
        };
        let Some(source) = source else {
            self.warn(format!(
                "{}: relative import beyond the top-level package (level {level})",
                self.module
            ));
            return;
        };
        let kind = self.import_kind();
        for alias in &imp.names {
            if alias.name.as_str() == "*" {
                self.facts.entities.imports.push(ImportBinding {
                    alias: None,
                    target: source.clone(),
                    kind: ImportKind::Star,
                });
                continue;
            }
            let Ok(target) = source.child(alias.name.as_str()) else {
                continue;
            };
            let local = alias.asname.as_ref().unwrap_or(&alias.name).as_str().to_string();
            self.facts.entities.imports.push(ImportBinding {
                alias: Some(local),
                target,
                kind,
            });
        }
    }

    fn visit_opt_expr(&mut self, expr: Option<&ast::Expr>, ctx: SiteContext) {
        if let Some(e) = expr {
            self.visit_expr(e, ctx);
        }
    }

    fn visit_exprs(&mut self, exprs: &[ast::Expr]) {
        for e in exprs {
            self.visit_expr(e, SiteContext::Other);
        }
    }

    fn head_scope(&self, head: &str) -> HeadScope {
        if self.shadow_layers.iter().any(|layer| layer.contains(head)) {
            return HeadScope::Local;
        }
        for scope in self.scopes.iter().rev() {
            let Scope::Function(f) = scope else { continue };
            if let Some(def) = f.nested_defs.get(head) {
                return HeadScope::LocalDef(def.clone());
            }
            if f.locals.contains(head) {
                return match &f.receiver {
                    Some((name, class)) if name == head => HeadScope::SelfReceiver(class.clone()),
                    _ => HeadScope::Local,
                };
            }
        }
        HeadScope::Free
    }

    fn record_call(&mut self, call: &ast::ExprCall, ctx: SiteContext) -> Option<u32> {
        let caller = match self.current_function() {
            Some(f) => f.signature.clone(),
            None => {
                self.facts.unattributed_calls += 1;
                return None;
            }
        };
        let callee = callee_of(&call.func);
        let head = match &callee {
            Callee::Dotted(segs) => self.head_scope(&segs[0]),
            _ => HeadScope::Free,
        };
        let counter = self.next_ordinal.entry(caller.clone()).or_insert(0);
        let ordinal = *counter;
        *counter += 1;
        let line = self.line_of(call);
        self.facts.sites.push(RawCallSite {
            caller,
            callee,
            ordinal,
            line,
            head,
            context: ctx,
        });
        Some(ordinal)
    }

    fn visit_comprehension(&mut self, generators: &[ast::Comprehension], elts: &[&ast::Expr]) {
        let mut layer = BTreeSet::new();
        for g in generators {
            collect_target_names(&g.target, &mut layer);
        }
        // The first iterable evaluates in the enclosing scope.
        if let Some(first) = generators.first() {
            self.visit_expr(&first.iter, SiteContext::Other);
        }
        self.shadow_layers.push(layer);
        for (i, g) in generators.iter().enumerate() {
            if i > 0 {
                self.visit_expr(&g.iter, SiteContext::Other);
            }
            self.visit_exprs(&g.ifs);
        }
        for e in elts {
            self.visit_expr(e, SiteContext::Other);
        }
        self.shadow_layers.pop();
    }

    fn visit_expr(&mut self, expr: &ast::Expr, ctx: SiteContext) {
        use ast::Expr;
        match expr {
            Expr::Call(call) => {
                let ordinal = self.record_call(call, ctx);
                self.visit_expr(&call.func, SiteContext::Other);
                let arg_ctx = ordinal.map_or(SiteContext::Other, SiteContext::ArgumentOf);
                for arg in &call.args {
                    let inner = match arg {
                        Expr::Starred(s) => &*s.value,
                        other => other,
                    };
                    self.visit_expr(inner, arg_ctx);
                }
                for kw in &call.keywords {
                    self.visit_expr(&kw.value, arg_ctx);
                }
            }
            Expr::Await(e) => self.visit_expr(&e.value, ctx),
            Expr::NamedExpr(e) => {
                self.visit_expr(&e.target, SiteContext::Other);
                self.visit_expr(&e.value, SiteContext::AssignedValue);
            }
            Expr::Lambda(l) => {
                for arg in l.args.posonlyargs.iter().chain(&l.args.args).chain(&l.args.kwonlyargs) {
                    self.visit_opt_expr(arg.default.as_deref(), SiteContext::Other);
                }
                let layer: BTreeSet<String> = parameter_names(&l.args).into_iter().collect();
                self.shadow_layers.push(layer);
                self.visit_expr(&l.body, SiteContext::Other);
                self.shadow_layers.pop();
            }
            Expr::ListComp(c) => self.visit_comprehension(&c.generators, &[&c.elt]),
            Expr::SetComp(c) => self.visit_comprehension(&c.generators, &[&c.elt]),
            Expr::GeneratorExp(c) => self.visit_comprehension(&c.generators, &[&c.elt]),
            Expr::DictComp(c) => self.visit_comprehension(&c.generators, &[&c.key, &c.value]),
            Expr::BoolOp(e) => self.visit_exprs(&e.values),
            Expr::BinOp(e) => {
                self.visit_expr(&e.left, SiteContext::Other);
                self.visit_expr(&e.right, SiteContext::Other);
            }
            Expr::UnaryOp(e) => self.visit_expr(&e.operand, SiteContext::Other),
            Expr::IfExp(e) => {
                self.visit_expr(&e.test, SiteContext::Other);
                self.visit_expr(&e.body, SiteContext::Other);
                self.visit_expr(&e.orelse, SiteContext::Other);
            }
            Expr::Dict(d) => {
                for k in d.keys.iter().flatten() {
                    self.visit_expr(k, SiteContext::Other);
                }
                self.visit_exprs(&d.values);
            }
            Expr::Set(s) => self.visit_exprs(&s.elts),
            Expr::Yield(y) => self.visit_opt_expr(y.value.as_deref(), SiteContext::Other),
            Expr::YieldFrom(y) => self.visit_expr(&y.value, SiteContext::Other),
            Expr::Compare(c) => {
                self.visit_expr(&c.left, SiteContext::Other);
                self.visit_exprs(&c.comparators);
            }
            Expr::FormattedValue(f) => {
                self.visit_expr(&f.value, SiteContext::Other);
                self.visit_opt_expr(f.format_spec.as_deref(), SiteContext::Other);
            }
            Expr::JoinedStr(j) => self.visit_exprs(&j.values),
            Expr::Attribute(a) => self.visit_expr(&a.value, SiteContext::Other),
            Expr::Subscript(s) => {
                self.visit_expr(&s.value, SiteContext::Other);
                self.visit_expr(&s.slice, SiteContext::Other);
            }
            Expr::Starred(s) => self.visit_expr(&s.value, SiteContext::Other),
            Expr::List(l) => self.visit_exprs(&l.elts),
            Expr::Tuple(t) => self.visit_exprs(&t.elts),
            Expr::Slice(s) => {
                self.visit_opt_expr(s.lower.as_deref(), SiteContext::Other);
                self.visit_opt_expr(s.upper.as_deref(), SiteContext::Other);
                self.visit_opt_expr(s.step.as_deref(), SiteContext::Other);
            }
            Expr::Constant(_) | Expr::Name(_) => {}
        }
        let _ = self.in_function();
    }
}

fn decorator_is(expr: &ast::Expr, name: &str) -> bool {
    match expr {
        ast::Expr::Name(n) => n.id.as_str() == name,
        ast::Expr::Attribute(a) => a.attr.as_str() == name,
        _ => false,
    }
}

fn callee_of(func: &ast::Expr) -> Callee {
    fn chain(expr: &ast::Expr, out: &mut Vec<String>) -> bool {
        match expr {
            ast::Expr::Name(n) => {
                out.push(n.id.as_str().to_string());
                true
            }
            ast::Expr::Attribute(a) if chain(&a.value, out) => {
                out.push(a.attr.as_str().to_string());
                true
            }
            _ => false,
        }
    }
    let mut segs = Vec::new();
    if chain(func, &mut segs) {
        return Callee::Dotted(segs);
    }
    match func {
        ast::Expr::Attribute(a) => Callee::Attribute(a.attr.as_str().to_string()),
        _ => Callee::Opaque,
    }
}

/// All declared parameter names, including `*args` and `**kwargs`.
pub(crate) fn parameter_names(args: &ast::Arguments) -> Vec<String> {
    let mut out: Vec<String> = args
        .posonlyargs
        .iter()
        .chain(&args.args)
        .map(|a| a.def.arg.as_str().to_string())
        .collect();
    if let Some(v) = &args.vararg {
        out.push(v.arg.as_str().to_string());
    }
    out.extend(args.kwonlyargs.iter().map(|a| a.def.arg.as_str().to_string()));
    if let Some(k) = &args.kwarg {
        out.push(k.arg.as_str().to_string());
    }
    out
}

#[derive(Debug, Default)]
struct Bindings {
    /// Names bound by assignment-like statements.
    variables: BTreeSet<String>,
    /// Names of nested function definitions.
    nested_defs: BTreeSet<String>,
    /// Class names and import aliases.
    other_names: BTreeSet<String>,
    globals: BTreeSet<String>,
}

fn collect_target_names(target: &ast::Expr, out: &mut BTreeSet<String>) {
    match target {
        ast::Expr::Name(n) => {
            out.insert(n.id.as_str().to_string());
        }
        ast::Expr::Tuple(t) => t.elts.iter().for_each(|e| collect_target_names(e, out)),
        ast::Expr::List(l) => l.elts.iter().for_each(|e| collect_target_names(e, out)),
        ast::Expr::Starred(s) => collect_target_names(&s.value, out),
        _ => {}
    }
}

/// Walrus targets anywhere inside an expression (they bind in the function).
fn collect_walrus(expr: &ast::Expr, out: &mut BTreeSet<String>) {
    use ast::Expr;
    let mut visit = |e: &ast::Expr| collect_walrus(e, out);
    match expr {
        Expr::NamedExpr(n) => {
            if let Expr::Name(name) = &*n.target {
                out.insert(name.id.as_str().to_string());
            }
            collect_walrus(&n.value, out);
        }
        Expr::Call(c) => {
            visit(&c.func);
            c.args.iter().for_each(&mut visit);
            c.keywords.iter().for_each(|k| collect_walrus(&k.value, out));
        }
        Expr::BoolOp(e) => e.values.iter().for_each(visit),
        Expr::BinOp(e) => {
            visit(&e.left);
            visit(&e.right);
        }
        Expr::UnaryOp(e) => visit(&e.operand),
        Expr::IfExp(e) => {
            visit(&e.test);
            visit(&e.body);
            visit(&e.orelse);
        }
        Expr::Compare(c) => {
            visit(&c.left);
            c.comparators.iter().for_each(visit);
        }
        Expr::ListComp(c) => {
            visit(&c.elt);
            for g in &c.generators {
                collect_walrus(&g.iter, out);
                g.ifs.iter().for_each(|e| collect_walrus(e, out));
            }
        }
        Expr::GeneratorExp(c) => {
            visit(&c.elt);
            for g in &c.generators {
                collect_walrus(&g.iter, out);
                g.ifs.iter().for_each(|e| collect_walrus(e, out));
            }
        }
        Expr::Await(a) => visit(&a.value),
        Expr::Tuple(t) => t.elts.iter().for_each(visit),
        Expr::List(l) => l.elts.iter().for_each(visit),
        _ => {}
    }
}

/// Local bindings of a body, not descending into nested function or class bodies.
fn collect_bindings(body: &[ast::Stmt]) -> Bindings {
    let mut b = Bindings::default();
    collect_bindings_into(body, &mut b);
    b
}

fn collect_bindings_into(body: &[ast::Stmt], b: &mut Bindings) {
    use ast::Stmt;
    for stmt in body {
        match stmt {
            Stmt::FunctionDef(d) => {
                b.nested_defs.insert(d.name.as_str().to_string());
            }
            Stmt::AsyncFunctionDef(d) => {
                b.nested_defs.insert(d.name.as_str().to_string());
            }
            Stmt::ClassDef(d) => {
                b.other_names.insert(d.name.as_str().to_string());
            }
            Stmt::Import(i) => {
                for a in &i.names {
                    let bound = match &a.asname {
                        Some(alias) => alias.as_str().to_string(),
                        None => a.name.as_str().split('.').next().unwrap_or_default().to_string(),
                    };
                    b.other_names.insert(bound);
                }
            }
            Stmt::ImportFrom(i) => {
                for a in &i.names {
                    if a.name.as_str() != "*" {
                        b.other_names
                            .insert(a.asname.as_ref().unwrap_or(&a.name).as_str().to_string());
                    }
                }
            }
            Stmt::Assign(s) => {
                s.targets.iter().for_each(|t| collect_target_names(t, &mut b.variables));
                collect_walrus(&s.value, &mut b.variables);
            }
            Stmt::AugAssign(s) => {
                collect_target_names(&s.target, &mut b.variables);
                collect_walrus(&s.value, &mut b.variables);
            }
            Stmt::AnnAssign(s) => {
                collect_target_names(&s.target, &mut b.variables);
                if let Some(v) = &s.value {
                    collect_walrus(v, &mut b.variables);
                }
            }
            Stmt::For(s) => {
                collect_target_names(&s.target, &mut b.variables);
                collect_bindings_into(&s.body, b);
                collect_bindings_into(&s.orelse, b);
            }
            Stmt::AsyncFor(s) => {
                collect_target_names(&s.target, &mut b.variables);
                collect_bindings_into(&s.body, b);
                collect_bindings_into(&s.orelse, b);
            }
            Stmt::While(s) => {
                collect_walrus(&s.test, &mut b.variables);
                collect_bindings_into(&s.body, b);
                collect_bindings_into(&s.orelse, b);
            }
            Stmt::If(s) => {
                collect_walrus(&s.test, &mut b.variables);
                collect_bindings_into(&s.body, b);
                collect_bindings_into(&s.orelse, b);
            }
            Stmt::With(s) => {
                for item in &s.items {
                    if let Some(v) = &item.optional_vars {
                        collect_target_names(v, &mut b.variables);
                    }
                }
                collect_bindings_into(&s.body, b);
            }
            Stmt::AsyncWith(s) => {
                for item in &s.items {
                    if let Some(v) = &item.optional_vars {
                        collect_target_names(v, &mut b.variables);
                    }
                }
                collect_bindings_into(&s.body, b);
            }
            Stmt::Try(s) => collect_try(&s.body, &s.handlers, &s.orelse, &s.finalbody, b),
            Stmt::TryStar(s) => collect_try(&s.body, &s.handlers, &s.orelse, &s.finalbody, b),
            Stmt::Match(s) => {
                for case in &s.cases {
                    collect_bindings_into(&case.body, b);
                }
            }
            Stmt::Delete(s) => s.targets.iter().for_each(|t| collect_target_names(t, &mut b.variables)),
            Stmt::Global(g) => {
                for n in &g.names {
                    b.globals.insert(n.as_str().to_string());
                }
            }
            Stmt::Expr(e) => collect_walrus(&e.value, &mut b.variables),
            Stmt::Return(r) => {
                if let Some(v) = &r.value {
                    collect_walrus(v, &mut b.variables);
                }
            }
            _ => {}
        }
    }
}

fn collect_try(
    body: &[ast::Stmt],
    handlers: &[ast::ExceptHandler],
    orelse: &[ast::Stmt],
    finalbody: &[ast::Stmt],
    b: &mut Bindings,
) {
    collect_bindings_into(body, b);
    for handler in handlers {
        let ast::ExceptHandler::ExceptHandler(h) = handler;
        if let Some(name) = &h.name {
            b.variables.insert(name.as_str().to_string());
        }
        collect_bindings_into(&h.body, b);
    }
    collect_bindings_into(orelse, b);
    collect_bindings_into(finalbody, b);
}
