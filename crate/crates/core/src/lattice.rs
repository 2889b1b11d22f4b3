//! Fuzzy state vectors, event matrices and the max-min algebra over them.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grade::Grade;

/// A fuzzy state: one grade per crisp state.
///
/// Ordering is lexicographic on the components and only exists so that states
/// can live in ordered collections; use [`FuzzyState::is_subset_of`] for the
/// componentwise order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuzzyState<G> {
    components: Vec<G>,
}

impl<G: Grade> FuzzyState<G> {
    pub fn new(components: Vec<G>) -> Self {
        FuzzyState { components }
    }

    pub fn zero(n: usize) -> Self {
        FuzzyState::new(vec![G::zero(); n])
    }

    /// Parses every component with [`Grade::parse_grade`].
    pub fn from_strs<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        items
            .iter()
            .map(|s| G::parse_grade(s.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(FuzzyState::new)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[G] {
        &self.components
    }

    pub fn get(&self, i: usize) -> G {
        self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    /// Largest component, or zero for an empty vector.
    pub fn height(&self) -> G {
        self.components
            .iter()
            .copied()
            .max()
            .unwrap_or_else(G::zero)
    }

    /// Componentwise `≤`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| a <= b)
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl<G: fmt::Display> fmt::Display for FuzzyState<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, c) in self.components.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

impl<G: fmt::Debug> fmt::Debug for FuzzyState<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, c) in self.components.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c:?}")?;
        }
        f.write_str("]")
    }
}

/// Accepts `[0.9, 0.1, 0]`, with or without brackets.
impl<G: Grade> FromStr for FuzzyState<G> {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        let inner = match (trimmed.strip_prefix('['), trimmed.ends_with(']')) {
            (Some(rest), true) => &rest[..rest.len() - 1],
            (None, false) => trimmed,
            _ => return Err(Error::MalformedState(text.to_string())),
        };
        if inner.trim().is_empty() {
            return Err(Error::MalformedState(text.to_string()));
        }
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        FuzzyState::from_strs(&parts)
    }
}

/// A square matrix of grades, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EventMatrix<G> {
    n: usize,
    entries: Vec<G>,
}

impl<G: Grade> EventMatrix<G> {
    pub fn from_rows(rows: Vec<Vec<G>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(EventMatrix { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![G::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = G::one();
        }
        EventMatrix { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> G {
        self.entries[row * self.n + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[G]> {
        self.entries.chunks(self.n.max(1)).take(self.n)
    }

    pub fn entries(&self) -> &[G] {
        &self.entries
    }
}

impl<G: fmt::Debug> fmt::Debug for EventMatrix<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.entries.chunks(self.n.max(1)))
            .finish()
    }
}

/// A named fuzzy event with its degree of uncontrollability.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FuzzyEvent<G> {
    pub name: String,
    pub matrix: EventMatrix<G>,
    pub uc_degree: G,
}

impl<G: Grade> FuzzyEvent<G> {
    pub fn new(name: impl Into<String>, matrix: EventMatrix<G>, uc_degree: G) -> Self {
        FuzzyEvent {
            name: name.into(),
            matrix,
            uc_degree,
        }
    }
}

/// `q ∘ a`: component `j` is `max_i min(q[i], a[i][j])`.
pub fn maxmin_compose<G: Grade>(
    state: &FuzzyState<G>,
    matrix: &EventMatrix<G>,
) -> Result<FuzzyState<G>> {
    state.check_dim(matrix.dim())?;
    Ok(compose_unchecked(state, matrix))
}

pub(crate) fn compose_unchecked<G: Grade>(
    state: &FuzzyState<G>,
    matrix: &EventMatrix<G>,
) -> FuzzyState<G> {
    let n = matrix.dim();
    let components = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| state.get(i).min(matrix.get(i, j)))
                .max()
                .unwrap_or_else(G::zero)
        })
        .collect();
    FuzzyState::new(components)
}

/// `α · q`: componentwise minimum with `alpha`.
pub fn scale_product<G: Grade>(alpha: G, state: &FuzzyState<G>) -> FuzzyState<G> {
    FuzzyState::new(state.components.iter().map(|&c| c.min(alpha)).collect())
}

/// The set `{α ∈ [0, 1] : α · base = target}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScaleSolution<G> {
    Empty,
    Point(G),
    /// Every `α` in `[lower, 1]`.
    UpwardInterval {
        lower: G,
    },
}

impl<G: Grade> ScaleSolution<G> {
    pub fn is_empty(&self) -> bool {
        matches!(self, ScaleSolution::Empty)
    }

    pub fn contains(&self, alpha: G) -> bool {
        match *self {
            ScaleSolution::Empty => false,
            ScaleSolution::Point(p) => p == alpha,
            ScaleSolution::UpwardInterval { lower } => alpha >= lower,
        }
    }

    pub fn least(&self) -> Option<G> {
        match *self {
            ScaleSolution::Empty => None,
            ScaleSolution::Point(p) => Some(p),
            ScaleSolution::UpwardInterval { lower } => Some(lower),
        }
    }

    /// Intersection with `[floor, 1]`.
    pub fn at_least(self, floor: G) -> Self {
        match self {
            ScaleSolution::Empty => ScaleSolution::Empty,
            ScaleSolution::Point(p) if p >= floor => ScaleSolution::Point(p),
            ScaleSolution::Point(_) => ScaleSolution::Empty,
            ScaleSolution::UpwardInterval { lower } => ScaleSolution::UpwardInterval {
                lower: lower.max(floor),
            },
        }
    }
}

impl<G: Grade> fmt::Display for ScaleSolution<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleSolution::Empty => f.write_str("∅"),
            ScaleSolution::Point(p) => write!(f, "{{{p}}}"),
            ScaleSolution::UpwardInterval { lower } => write!(f, "[{lower}, 1]"),
        }
    }
}

/// Inverts [`scale_product`].
///
/// Per component, `target > base` is infeasible, `target == base` demands
/// `α ≥ base`, and `target < base` pins `α = target`. Conflicting pins, or a
/// pin below some lower bound, leave nothing.
pub fn solve_scale<G: Grade>(
    base: &FuzzyState<G>,
    target: &FuzzyState<G>,
) -> Result<ScaleSolution<G>> {
    target.check_dim(base.dim())?;
    let mut lower = G::zero();
    let mut pinned: Option<G> = None;
    for (&b, &t) in base.components.iter().zip(&target.components) {
        if t > b {
            return Ok(ScaleSolution::Empty);
        }
        if t == b {
            lower = lower.max(b);
        } else {
            match pinned {
                Some(p) if p != t => return Ok(ScaleSolution::Empty),
                _ => pinned = Some(t),
            }
        }
    }
    Ok(match pinned {
        Some(p) if p >= lower => ScaleSolution::Point(p),
        Some(_) => ScaleSolution::Empty,
        None => ScaleSolution::UpwardInterval { lower },
    })
}
