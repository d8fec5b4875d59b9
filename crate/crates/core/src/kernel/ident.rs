use std::fmt;
use std::sync::Arc;

/// A variable name paired with the unique id assigned by uniquification.
///
/// Parsed identifiers carry id `0` until [`desugar`](super::desugar) resolves
/// them; after that every binding site owns a distinct id and references
/// share the id of the binder they resolve to.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ident {
    // id first so the derived ordering follows allocation order
    id: u32,
    name: Arc<str>,
}

impl Ident {
    pub fn new(name: impl Into<Arc<str>>, id: u32) -> Self {
        Ident { id, name: name.into() }
    }

    /// An identifier straight from the parser, before uniquification.
    pub fn unresolved(name: impl Into<Arc<str>>) -> Self {
        Ident::new(name, 0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn with_id(&self, id: u32) -> Self {
        Ident {
            id,
            name: self.name.clone(),
        }
    }

    /// `name#id`, the form used in reports.
    pub fn label(&self) -> String {
        format!("{}#{}", self.name, self.id)
    }
}

impl fmt::Debug for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.name, self.id)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Hands out fresh unique ids for one compilation pipeline.
#[derive(Debug, Clone)]
pub struct IdGen {
    next: u32,
}

impl IdGen {
    /// Ids start strictly after `max_used`.
    pub fn after(max_used: u32) -> Self {
        IdGen { next: max_used + 1 }
    }

    pub fn fresh_id(&mut self) -> u32 {
        let id = self.next;
        self.next += 1;
        id
    }

    pub fn fresh(&mut self, name: impl Into<Arc<str>>) -> Ident {
        let id = self.fresh_id();
        Ident::new(name, id)
    }
}

impl Default for IdGen {
    fn default() -> Self {
        IdGen::after(0)
    }
}
