//! Labelled non-planar rooted trees and forests in canonical form.
//!
//! Canonical form: every children list and every forest is sorted by the
//! derived `Ord`, so structurally equal forests compare equal.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree {
    pub label: usize,
    pub children: Forest,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Forest(pub Vec<Tree>);

impl Tree {
    pub fn leaf(label: usize) -> Tree {
        Tree {
            label,
            children: Forest::empty(),
        }
    }

    /// `[σ]_label`: graft a forest onto a new root.
    pub fn graft(children: Forest, label: usize) -> Tree {
        Tree { label, children }
    }

    pub fn size(&self) -> usize {
        1 + self.children.size()
    }

    /// Tree factorial: |τ| times the factorials of the subtrees.
    pub fn factorial(&self) -> f64 {
        self.size() as f64 * self.children.0.iter().map(Tree::factorial).product::<f64>()
    }

    pub fn labels(&self, out: &mut Vec<usize>) {
        out.push(self.label);
        for c in &self.children.0 {
            c.labels(out);
        }
    }

    /// Δτ = τ⊗1 + (id⊗B₊)Δ(children); pruned part on the left, trunk on the right.
    pub fn coproduct(&self) -> HashMap<(Forest, Forest), f64> {
        let mut out = HashMap::new();
        out.insert((Forest::single(self.clone()), Forest::empty()), 1.0);
        for ((pruned, trunk), c) in self.children.coproduct() {
            let key = (pruned, Forest::single(Tree::graft(trunk, self.label)));
            *out.entry(key).or_insert(0.0) += c;
        }
        out
    }
}

impl Forest {
    pub fn empty() -> Forest {
        Forest(Vec::new())
    }

    pub fn single(t: Tree) -> Forest {
        Forest(vec![t])
    }

    pub fn from_trees(mut trees: Vec<Tree>) -> Forest {
        trees.sort();
        Forest(trees)
    }

    pub fn size(&self) -> usize {
        self.0.iter().map(Tree::size).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn trees(&self) -> &[Tree] {
        &self.0
    }

    /// Commutative forest product.
    pub fn product(&self, other: &Forest) -> Forest {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Forest::from_trees(v)
    }

    pub fn factorial(&self) -> f64 {
        self.0.iter().map(Tree::factorial).product()
    }

    pub fn labels(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for t in &self.0 {
            t.labels(&mut out);
        }
        out
    }

    /// Connes–Kreimer coproduct of a forest: the product of the tree coproducts.
    pub fn coproduct(&self) -> HashMap<(Forest, Forest), f64> {
        let mut acc: HashMap<(Forest, Forest), f64> = HashMap::new();
        acc.insert((Forest::empty(), Forest::empty()), 1.0);
        for t in &self.0 {
            let dt = t.coproduct();
            let mut next = HashMap::new();
            for ((l1, r1), c1) in &acc {
                for ((l2, r2), c2) in &dt {
                    *next.entry((l1.product(l2), r1.product(r2))).or_insert(0.0) += c1 * c2;
                }
            }
            acc = next;
        }
        acc
    }

    /// Parse the textual form produced by `Display`, with 1-based labels.
    pub fn parse(s: &str, d: usize) -> Result<Forest> {
        let bytes = s.as_bytes();
        let mut pos = 0;
        let f = parse_forest(bytes, &mut pos, d)?;
        skip_ws(bytes, &mut pos);
        if pos != bytes.len() {
            return Err(Error::Parse(format!(
                "trailing input in forest {s:?} at byte {pos}"
            )));
        }
        Ok(f)
    }
}

fn skip_ws(b: &[u8], pos: &mut usize) {
    while *pos < b.len() && b[*pos] == b' ' {
        *pos += 1;
    }
}

fn parse_forest(b: &[u8], pos: &mut usize, d: usize) -> Result<Forest> {
    let mut trees = Vec::new();
    loop {
        skip_ws(b, pos);
        if *pos >= b.len() || b[*pos] == b']' {
            break;
        }
        let start = *pos;
        while *pos < b.len() && b[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::Parse(format!("expected a label at byte {start}")));
        }
        let label: usize = std::str::from_utf8(&b[start..*pos])
            .unwrap()
            .parse()
            .unwrap();
        if label == 0 || label > d {
            return Err(Error::Parse(format!("label {label} outside 1..={d}")));
        }
        let mut children = Forest::empty();
        if *pos < b.len() && b[*pos] == b'[' {
            *pos += 1;
            children = parse_forest(b, pos, d)?;
            if *pos >= b.len() || b[*pos] != b']' {
                return Err(Error::Parse(format!("unclosed bracket at byte {pos}")));
            }
            *pos += 1;
        }
        trees.push(Tree::graft(children, label - 1));
    }
    Ok(Forest::from_trees(trees))
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label + 1)?;
        if !self.children.is_empty() {
            write!(f, "[{}]", self.children)?;
        }
        Ok(())
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// All forests of degree `0..=n` over `d` labels, grouped by degree and
/// sorted within each degree.
pub fn enumerate(d: usize, n: usize) -> Vec<Vec<Forest>> {
    let mut trees: Vec<Vec<Tree>> = vec![Vec::new(); n + 1];
    let mut forests: Vec<Vec<Forest>> = vec![Vec::new(); n + 1];
    forests[0].push(Forest::empty());
    for k in 1..=n {
        for label in 0..d {
            for f in &forests[k - 1] {
                trees[k].push(Tree::graft(f.clone(), label));
            }
        }
        trees[k].sort();
        let mut pool: Vec<Tree> = trees[1..=k].iter().flatten().cloned().collect();
        pool.sort();
        let mut out = Vec::new();
        multisets(&pool, 0, k, &mut Vec::new(), &mut out);
        out.sort();
        forests[k] = out;
    }
    forests
}

fn multisets(
    pool: &[Tree],
    from: usize,
    remaining: usize,
    cur: &mut Vec<Tree>,
    out: &mut Vec<Forest>,
) {
    if remaining == 0 {
        out.push(Forest(cur.clone()));
        return;
    }
    for i in from..pool.len() {
        let s = pool[i].size();
        if s <= remaining {
            cur.push(pool[i].clone());
            multisets(pool, i, remaining - s, cur, out);
            cur.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_known_sequences() {
        // unlabelled rooted trees: 1, 1, 2, 4, 9; forests: 1, 1, 2, 4, 9, 20
        let f = enumerate(1, 5);
        let sizes: Vec<usize> = f.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![1, 1, 2, 4, 9, 20]);
        // two labels: forests 1, 2, 7, 26
        let f = enumerate(2, 3);
        assert_eq!(
            f.iter().map(Vec::len).collect::<Vec<_>>(),
            vec![1, 2, 7, 26]
        );
    }

    #[test]
    fn ladder_coproduct() {
        let ladder = Tree::graft(Forest::single(Tree::leaf(0)), 0);
        let dl = ladder.coproduct();
        assert_eq!(dl.len(), 3);
        let dot = Forest::single(Tree::leaf(0));
        assert_eq!(dl[&(dot.clone(), dot.clone())], 1.0);
    }

    #[test]
    fn cherry_coproduct_multiplicity() {
        // [••]: cutting either leaf gives • ⊗ [•] twice
        let cherry = Tree::graft(Forest::from_trees(vec![Tree::leaf(0), Tree::leaf(0)]), 0);
        let dc = cherry.coproduct();
        let dot = Forest::single(Tree::leaf(0));
        let ladder = Forest::single(Tree::graft(dot.clone(), 0));
        assert_eq!(dc[&(dot.clone(), ladder)], 2.0);
        assert_eq!(dc[&(dot.product(&dot), dot.clone())], 1.0);
    }

    #[test]
    fn display_round_trip() {
        for level in enumerate(2, 4) {
            for f in level {
                let s = f.to_string();
                assert_eq!(Forest::parse(&s, 2).unwrap(), f, "{s}");
            }
        }
        assert!(Forest::parse("3", 2).is_err());
        assert!(Forest::parse("1[2", 2).is_err());
    }

    #[test]
    fn factorials() {
        let cherry = Tree::graft(Forest::from_trees(vec![Tree::leaf(0), Tree::leaf(0)]), 0);
        assert_eq!(cherry.factorial(), 3.0);
        let ladder3 = Tree::graft(
            Forest::single(Tree::graft(Forest::single(Tree::leaf(0)), 0)),
            0,
        );
        assert_eq!(ladder3.factorial(), 6.0);
    }
}
