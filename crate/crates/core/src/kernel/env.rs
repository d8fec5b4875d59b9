use std::fmt;
use std::sync::Arc;

use super::ident::Ident;

/// Persistent environment keyed by unique id.
///
/// Extension shares the tail with the original, so closures can capture an
/// environment cheaply and later extensions never disturb them.
pub struct Env<V>(Option<Arc<Node<V>>>);

struct Node<V> {
    key: Ident,
    value: V,
    next: Env<V>,
}

impl<V> Env<V> {
    pub fn empty() -> Self {
        Env(None)
    }

    pub fn extend(&self, key: Ident, value: V) -> Self {
        Env(Some(Arc::new(Node {
            key,
            value,
            next: self.clone(),
        })))
    }

    pub fn lookup(&self, key: &Ident) -> Option<&V> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if node.key.id() == key.id() && node.key.name() == key.name() {
                return Some(&node.value);
            }
            cur = &node.next.0;
        }
        None
    }

    pub fn len(&self) -> usize {
        let mut n = 0;
        let mut cur = &self.0;
        while let Some(node) = cur {
            n += 1;
            cur = &node.next.0;
        }
        n
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }
}

impl<V> Clone for Env<V> {
    fn clone(&self) -> Self {
        Env(self.0.clone())
    }
}

impl<V> Default for Env<V> {
    fn default() -> Self {
        Env::empty()
    }
}

impl<V: fmt::Debug> fmt::Debug for Env<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        let mut cur = &self.0;
        while let Some(node) = cur {
            m.entry(&node.key, &node.value);
            cur = &node.next.0;
        }
        m.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extension_leaves_original_untouched() {
        let x = Ident::new("x", 1);
        let y = Ident::new("y", 2);
        let base: Env<i32> = Env::empty().extend(x.clone(), 1);
        let ext = base.extend(y.clone(), 2).extend(x.clone(), 10);
        assert_eq!(base.lookup(&x), Some(&1));
        assert_eq!(base.lookup(&y), None);
        assert_eq!(ext.lookup(&x), Some(&10));
        assert_eq!(ext.lookup(&y), Some(&2));
        assert_eq!(ext.len(), 3);
    }

    #[test]
    fn same_name_different_id_are_distinct() {
        let a = Ident::new("x", 1);
        let b = Ident::new("x", 2);
        let env: Env<&str> = Env::empty().extend(a.clone(), "a");
        assert_eq!(env.lookup(&a), Some(&"a"));
        assert_eq!(env.lookup(&b), None);
    }
}
