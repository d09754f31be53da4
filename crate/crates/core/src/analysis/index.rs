use std::collections::BTreeMap;

use crate::minilang::{ClassDecl, FieldDecl, MethodDecl, MiniProgram};

/// Position of a class inside the program AST.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClassRef {
    pub file: usize,
    /// Indices into `classes` / `inner_classes` from the file root.
    pub class_path: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ClassEntry {
    pub r: ClassRef,
    pub qualified_name: String,
    pub simple_name: String,
    /// Index of the enclosing class entry, if nested.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct MethodEntry {
    /// Index of the declaring class entry.
    pub class: usize,
    /// Position within the class's method list.
    pub method: usize,
    pub qualified_name: String,
    pub simple_name: String,
}

/// Flattened view of a program: classes in depth-first file order, methods
/// in class order, with by-name lookup tables. All downstream passes use
/// these indices as stable identities.
#[derive(Debug, Clone, Default)]
pub struct ProgramIndex {
    pub classes: Vec<ClassEntry>,
    pub methods: Vec<MethodEntry>,
    class_by_qname: BTreeMap<String, usize>,
    class_by_simple: BTreeMap<String, Vec<usize>>,
    method_by_qname: BTreeMap<String, usize>,
}

impl ProgramIndex {
    pub fn build(program: &MiniProgram) -> ProgramIndex {
        let mut index = ProgramIndex::default();
        for (fi, file) in program.files.iter().enumerate() {
            for (ci, class) in file.classes.iter().enumerate() {
                add_class(&mut index, class, fi, vec![ci], None);
            }
        }
        for (i, entry) in index.classes.iter().enumerate() {
            index
                .class_by_qname
                .insert(entry.qualified_name.clone(), i);
            index
                .class_by_simple
                .entry(entry.simple_name.clone())
                .or_default()
                .push(i);
        }
        for (i, m) in index.methods.iter().enumerate() {
            index.method_by_qname.insert(m.qualified_name.clone(), i);
        }
        index
    }

    pub fn class_decl<'p>(&self, program: &'p MiniProgram, class: usize) -> &'p ClassDecl {
        let entry = &self.classes[class];
        let mut iter = entry.r.class_path.iter();
        let mut decl = &program.files[entry.r.file].classes[*iter.next().unwrap()];
        for idx in iter {
            decl = &decl.inner_classes[*idx];
        }
        decl
    }

    pub fn method_decl<'p>(&self, program: &'p MiniProgram, method: usize) -> &'p MethodDecl {
        let entry = &self.methods[method];
        &self.class_decl(program, entry.class).methods[entry.method]
    }

    pub fn field_decl<'p>(
        &self,
        program: &'p MiniProgram,
        class: usize,
        name: &str,
    ) -> Option<&'p FieldDecl> {
        self.class_decl(program, class)
            .fields
            .iter()
            .find(|f| f.name == name)
    }

    pub fn class_by_qname(&self, qname: &str) -> Option<usize> {
        self.class_by_qname.get(qname).copied()
    }

    pub fn method_by_qname(&self, qname: &str) -> Option<usize> {
        self.method_by_qname.get(qname).copied()
    }

    /// Resolves a type name to a program class: exact qualified match
    /// first, then a simple-name match when it is unambiguous.
    pub fn class_of_type(&self, type_name: &str) -> Option<usize> {
        if let Some(i) = self.class_by_qname.get(type_name) {
            return Some(*i);
        }
        match self.class_by_simple.get(type_name) {
            Some(hits) if hits.len() == 1 => Some(hits[0]),
            _ => None,
        }
    }

    /// The class and its lexical ancestors, innermost first.
    pub fn enclosing_chain(&self, class: usize) -> Vec<usize> {
        let mut chain = vec![class];
        let mut at = class;
        while let Some(parent) = self.classes[at].parent {
            chain.push(parent);
            at = parent;
        }
        chain
    }

    /// Methods of `class` plus its ancestors whose simple name matches,
    /// innermost class first.
    pub fn method_in_chain(&self, class: usize, simple_name: &str) -> Option<usize> {
        for c in self.enclosing_chain(class) {
            if let Some(i) = self
                .methods
                .iter()
                .position(|m| m.class == c && m.simple_name == simple_name)
            {
                return Some(i);
            }
        }
        None
    }

    /// The unique program method with this simple name, if exactly one.
    pub fn sole_method_named(&self, simple_name: &str) -> Option<usize> {
        let mut hits = self
            .methods
            .iter()
            .enumerate()
            .filter(|(_, m)| m.simple_name == simple_name);
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }

    /// Index of a concrete method position, if present.
    pub fn method_at(&self, class: usize, method: usize) -> Option<usize> {
        self.methods
            .iter()
            .position(|m| m.class == class && m.method == method)
    }
}

fn add_class(
    index: &mut ProgramIndex,
    class: &ClassDecl,
    file: usize,
    class_path: Vec<usize>,
    parent: Option<usize>,
) {
    let entry_idx = index.classes.len();
    index.classes.push(ClassEntry {
        r: ClassRef {
            file,
            class_path: class_path.clone(),
        },
        qualified_name: class.qualified_name.clone(),
        simple_name: class.simple_name.clone(),
        parent,
    });
    for (mi, m) in class.methods.iter().enumerate() {
        index.methods.push(MethodEntry {
            class: entry_idx,
            method: mi,
            qualified_name: m.qualified_name.clone(),
            simple_name: m.simple_name.clone(),
        });
    }
    for (ii, inner) in class.inner_classes.iter().enumerate() {
        let mut path = class_path.clone();
        path.push(ii);
        add_class(index, inner, file, path, Some(entry_idx));
    }
}
