//! The graded index set of a truncated system and its precomputed tables.
//!
//! Indices are laid out degree first. Nilpotent words of length `k` sit at
//! `offsets[k] + value`, where `value` reads the word in base `d` with the first
//! letter most significant. Butcher forests of degree `k` follow the sorted
//! enumeration, which does not depend on the truncation level, so truncation is
//! always a prefix copy.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use super::forest::{enumerate, Forest};
use super::words;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Nilpotent,
    Butcher,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Nilpotent => "nilpotent",
            Kind::Butcher => "butcher",
        }
    }

    pub fn parse(s: &str) -> Result<Kind> {
        match s {
            "nilpotent" => Ok(Kind::Nilpotent),
            "butcher" => Ok(Kind::Butcher),
            other => Err(Error::Parse(format!("unknown system {other:?}"))),
        }
    }
}

/// Sparse image of one basis element in a product space.
pub type Image = Vec<(Vec<usize>, f64)>;

pub struct System {
    kind: Kind,
    d: usize,
    n: usize,
    offsets: Vec<usize>,
    degree: Vec<usize>,
    butcher: Option<ButcherData>,
    coproduct: Vec<Vec<(usize, usize, f64)>>,
    map_i: OnceLock<Option<Arc<Vec<Image>>>>,
    map_i_prime: OnceLock<Arc<Vec<Image>>>,
    star: Mutex<HashMap<usize, Arc<Vec<Image>>>>,
}

struct ButcherData {
    forests: Vec<Forest>,
    lookup: HashMap<Forest, usize>,
    // indices of the single-tree forests making up each forest
    trees: Vec<Vec<usize>>,
}

impl std::fmt::Debug for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "System({}, d={}, n={})",
            self.kind.name(),
            self.d,
            self.n
        )
    }
}

impl PartialEq for System {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.d == other.d && self.n == other.n
    }
}

static CACHE: OnceLock<Mutex<HashMap<(Kind, usize, usize), Arc<System>>>> = OnceLock::new();

impl System {
    pub fn get(kind: Kind, d: usize, n: usize) -> Result<Arc<System>> {
        if d == 0 {
            return Err(Error::Domain("alphabet size must be positive".into()));
        }
        let too_big = match kind {
            Kind::Nilpotent => (d as f64).powi(n as i32) > 4.0e6,
            Kind::Butcher => n > 6 || (n > 4 && d > 3),
        };
        if too_big {
            return Err(Error::Domain(format!(
                "{} system d={d} n={n} is too large",
                kind.name()
            )));
        }
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(s) = cache.lock().unwrap().get(&(kind, d, n)) {
            return Ok(s.clone());
        }
        // built outside the lock; a racing duplicate is harmless
        let sys = Arc::new(System::build(kind, d, n));
        let mut guard = cache.lock().unwrap();
        Ok(guard.entry((kind, d, n)).or_insert(sys).clone())
    }

    pub fn nilpotent(d: usize, n: usize) -> Result<Arc<System>> {
        System::get(Kind::Nilpotent, d, n)
    }

    pub fn butcher(d: usize, n: usize) -> Result<Arc<System>> {
        System::get(Kind::Butcher, d, n)
    }

    fn build(kind: Kind, d: usize, n: usize) -> System {
        let (offsets, butcher) = match kind {
            Kind::Nilpotent => {
                let mut off = vec![0];
                for k in 0..=n {
                    off.push(off[k] + d.pow(k as u32));
                }
                (off, None)
            }
            Kind::Butcher => {
                let levels = enumerate(d, n);
                let mut off = vec![0];
                let mut forests = Vec::new();
                for level in levels {
                    off.push(off.last().unwrap() + level.len());
                    forests.extend(level);
                }
                let lookup: HashMap<Forest, usize> = forests
                    .iter()
                    .cloned()
                    .enumerate()
                    .map(|(i, f)| (f, i))
                    .collect();
                let trees = forests
                    .iter()
                    .map(|f| {
                        f.trees()
                            .iter()
                            .map(|t| lookup[&Forest::single(t.clone())])
                            .collect()
                    })
                    .collect();
                (
                    off,
                    Some(ButcherData {
                        forests,
                        lookup,
                        trees,
                    }),
                )
            }
        };
        let mut degree = Vec::with_capacity(offsets[n + 1]);
        for k in 0..=n {
            degree.extend(std::iter::repeat(k).take(offsets[k + 1] - offsets[k]));
        }
        let mut sys = System {
            kind,
            d,
            n,
            offsets,
            degree,
            butcher,
            coproduct: Vec::new(),
            map_i: OnceLock::new(),
            map_i_prime: OnceLock::new(),
            star: Mutex::new(HashMap::new()),
        };
        sys.coproduct = (0..sys.dim()).map(|i| sys.build_coproduct(i)).collect();
        sys
    }

    fn build_coproduct(&self, i: usize) -> Vec<(usize, usize, f64)> {
        match &self.butcher {
            None => {
                let w = self.word(i);
                (1..w.len())
                    .map(|c| (self.word_index(&w[..c]), self.word_index(&w[c..]), 1.0))
                    .collect()
            }
            Some(b) => {
                let mut rows: Vec<(usize, usize, f64)> = b.forests[i]
                    .coproduct()
                    .into_iter()
                    .filter(|((l, r), _)| !l.is_empty() && !r.is_empty())
                    .map(|((l, r), c)| (b.lookup[&l], b.lookup[&r], c))
                    .collect();
                rows.sort_by_key(|r| (r.0, r.1));
                rows
            }
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.offsets[self.n + 1]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degree[i]
    }

    /// Index range of the degree-`k` block.
    pub fn block(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    /// The same kind and alphabet at another level.
    pub fn at_level(&self, n: usize) -> Result<Arc<System>> {
        System::get(self.kind, self.d, n)
    }

    /// Letters of a nilpotent index, 0-based.
    pub fn word(&self, i: usize) -> Vec<usize> {
        debug_assert_eq!(self.kind, Kind::Nilpotent);
        let k = self.degree[i];
        let mut v = i - self.offsets[k];
        let mut w = vec![0; k];
        for q in (0..k).rev() {
            w[q] = v % self.d;
            v /= self.d;
        }
        w
    }

    pub fn word_index(&self, w: &[usize]) -> usize {
        debug_assert!(w.len() <= self.n);
        self.offsets[w.len()] + w.iter().fold(0, |acc, &l| acc * self.d + l)
    }

    pub fn forest(&self, i: usize) -> &Forest {
        &self.butcher.as_ref().expect("butcher system").forests[i]
    }

    pub fn forest_index(&self, f: &Forest) -> Option<usize> {
        self.butcher.as_ref().and_then(|b| b.lookup.get(f).copied())
    }

    /// Single-tree factors of a forest; empty for nilpotent systems.
    pub fn tree_factors(&self, i: usize) -> &[usize] {
        match &self.butcher {
            Some(b) => &b.trees[i],
            None => &[],
        }
    }

    /// Reduced coproduct of `σ`: pairs with both degrees at least one.
    pub fn coproduct(&self, i: usize) -> &[(usize, usize, f64)] {
        &self.coproduct[i]
    }

    /// Largest table row, and at least the size of the index set.
    pub fn structural_bound(&self) -> usize {
        self.coproduct
            .iter()
            .map(|r| r.len() + 2)
            .max()
            .unwrap_or(1)
            .max(self.dim())
    }

    /// Index of the degree-one element for letter `i`.
    pub fn letter(&self, i: usize) -> usize {
        match &self.butcher {
            None => self.offsets[1] + i,
            Some(b) => b.lookup[&Forest::single(super::forest::Tree::leaf(i))],
        }
    }

    /// Human-readable name of an index.
    pub fn index_name(&self, i: usize) -> String {
        match self.kind {
            Kind::Nilpotent => {
                let w: Vec<String> = self.word(i).iter().map(|l| (l + 1).to_string()).collect();
                format!("({})", w.join(","))
            }
            Kind::Butcher => self.forest(i).to_string(),
        }
    }

    pub(crate) fn map_i_table(&self) -> Option<Arc<Vec<Image>>> {
        self.map_i
            .get_or_init(|| self.build_map_i().map(Arc::new))
            .clone()
    }

    pub(crate) fn map_i_prime_table(&self) -> Arc<Vec<Image>> {
        self.map_i_prime
            .get_or_init(|| Arc::new(self.build_map_i_prime()))
            .clone()
    }

    pub(crate) fn star_table(&self, l: usize) -> Arc<Vec<Image>> {
        let mut guard = self.star.lock().unwrap();
        guard
            .entry(l)
            .or_insert_with(|| Arc::new(self.build_star(l)))
            .clone()
    }

    fn build_map_i(&self) -> Option<Vec<Image>> {
        match self.kind {
            Kind::Nilpotent => Some(
                (0..self.dim())
                    .map(|i| {
                        let w = self.word(i);
                        let k = w.len();
                        if k < 2 {
                            return Vec::new();
                        }
                        // the last letter stays on the right; the rest splits by any non-empty subset
                        let mut img = Vec::new();
                        for mask in 1u32..(1 << (k - 1)) {
                            let mut left = Vec::new();
                            let mut right = Vec::new();
                            for (q, &l) in w[..k - 1].iter().enumerate() {
                                if mask & (1 << q) != 0 {
                                    left.push(l);
                                } else {
                                    right.push(l);
                                }
                            }
                            right.push(w[k - 1]);
                            img.push((vec![self.word_index(&left), self.word_index(&right)], 1.0));
                        }
                        merge(img)
                    })
                    .collect(),
            ),
            Kind::Butcher if self.n <= 2 => Some(
                (0..self.dim())
                    .map(|i| {
                        let f = self.forest(i);
                        match f.trees() {
                            [t] if f.size() == 2 => {
                                let leaf = self.letter(t.children.trees()[0].label);
                                vec![(vec![leaf, self.letter(t.label)], 1.0)]
                            }
                            _ => Vec::new(),
                        }
                    })
                    .collect(),
            ),
            Kind::Butcher => None,
        }
    }

    fn build_map_i_prime(&self) -> Vec<Image> {
        (0..self.dim())
            .map(|i| match self.kind {
                Kind::Nilpotent => {
                    let w = self.word(i);
                    if w.len() < 2 {
                        return Vec::new();
                    }
                    let k = w.len();
                    vec![(
                        vec![self.word_index(&w[..k - 1]), self.word_index(&w[k - 1..])],
                        1.0,
                    )]
                }
                Kind::Butcher => {
                    let f = self.forest(i);
                    match f.trees() {
                        [t] if f.size() >= 2 => {
                            let inner =
                                self.forest_index(&t.children).expect("sub-forest in table");
                            vec![(vec![inner, self.letter(t.label)], 1.0)]
                        }
                        _ => Vec::new(),
                    }
                }
            })
            .collect()
    }

    fn build_star(&self, l: usize) -> Vec<Image> {
        (0..self.dim())
            .map(|i| {
                let k = self.degree[i];
                if k < l || l == 0 {
                    return Vec::new();
                }
                match self.kind {
                    Kind::Nilpotent => {
                        let w = self.word(i);
                        let img = words::surjections(k, l)
                            .iter()
                            .map(|a| {
                                let parts = words::split(&w, a, l);
                                (parts.iter().map(|p| self.word_index(p)).collect(), 1.0)
                            })
                            .collect();
                        merge(img)
                    }
                    Kind::Butcher => {
                        let trees = self.forest(i).trees();
                        let mut seen = BTreeSet::new();
                        for a in words::surjections(trees.len(), l) {
                            let mut groups = vec![Vec::new(); l];
                            for (t, &b) in trees.iter().zip(&a) {
                                groups[b].push(t.clone());
                            }
                            let key: Vec<usize> = groups
                                .into_iter()
                                .map(|g| self.forest_index(&Forest::from_trees(g)).unwrap())
                                .collect();
                            seen.insert(key);
                        }
                        seen.into_iter().map(|k| (k, 1.0)).collect()
                    }
                }
            })
            .collect()
    }
}

fn merge(img: Image) -> Image {
    let mut m: std::collections::BTreeMap<Vec<usize>, f64> = Default::default();
    for (k, c) in img {
        *m.entry(k).or_insert(0.0) += c;
    }
    m.into_iter().collect()
}
