use std::fmt;
use std::sync::Arc;

/// A deterministic real sequence `k -> u_k`, defined for every `k >= 0`.
///
/// Implementations must be pure: the same `k` always yields the same value.
pub trait TermSource: Send + Sync {
    fn term(&self, k: u64) -> f64;

    fn describe(&self) -> String {
        String::from("sequence")
    }
}

impl<S: TermSource + ?Sized> TermSource for Arc<S> {
    fn term(&self, k: u64) -> f64 {
        (**self).term(k)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<S: TermSource + ?Sized> TermSource for &S {
    fn term(&self, k: u64) -> f64 {
        (**self).term(k)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// A [`TermSource`] backed by a closure.
pub struct FnSource<F> {
    f: F,
    label: String,
}

impl<F: Fn(u64) -> f64 + Send + Sync> FnSource<F> {
    pub fn new(label: impl Into<String>, f: F) -> Self {
        Self {
            f,
            label: label.into(),
        }
    }
}

impl<F: Fn(u64) -> f64 + Send + Sync> TermSource for FnSource<F> {
    fn term(&self, k: u64) -> f64 {
        (self.f)(k)
    }
    fn describe(&self) -> String {
        self.label.clone()
    }
}

impl<F> fmt::Debug for FnSource<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnSource").field("label", &self.label).finish()
    }
}
