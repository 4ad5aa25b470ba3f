//! Position-assignment combinatorics behind shuffles, star maps and ordered shuffles.
//!
//! An assignment of `k` positions is a vector `blocks` with `blocks[q]` the block
//! that position `q` goes to; inside a block positions keep their order.

/// Every assignment of `Σ sizes` positions to blocks of the given sizes.
pub fn assignments(sizes: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = sizes.iter().sum();
    let mut left = sizes.to_vec();
    let mut cur = Vec::with_capacity(total);
    let mut out = Vec::new();
    fill(&mut left, total, &mut cur, &mut out);
    out
}

fn fill(left: &mut [usize], total: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == total {
        out.push(cur.clone());
        return;
    }
    for b in 0..left.len() {
        if left[b] > 0 {
            left[b] -= 1;
            cur.push(b);
            fill(left, total, cur, out);
            cur.pop();
            left[b] += 1;
        }
    }
}

/// Ordered shuffles: assignments whose block-final positions increase with the block number.
pub fn ordered_shuffles(sizes: &[usize]) -> Vec<Vec<usize>> {
    if sizes.contains(&0) {
        return Vec::new();
    }
    assignments(sizes)
        .into_iter()
        .filter(|a| rising_finals(a, sizes.len()))
        .collect()
}

fn rising_finals(a: &[usize], blocks: usize) -> bool {
    let mut last = vec![0usize; blocks];
    for (q, &b) in a.iter().enumerate() {
        last[b] = q;
    }
    last.windows(2).all(|w| w[0] < w[1])
}

/// Compositions of `k` into `parts` positive integers.
pub fn compositions(k: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if parts == 0 {
        if k == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    if k < parts {
        return out;
    }
    for first in 1..=k - (parts - 1) {
        for mut rest in compositions(k - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Assignments of `k` positions onto `l` non-empty blocks.
pub fn surjections(k: usize, l: usize) -> Vec<Vec<usize>> {
    compositions(k, l)
        .iter()
        .flat_map(|c| assignments(c))
        .collect()
}

/// Split `letters` along an assignment into one subword per block.
pub fn split(letters: &[usize], blocks: &[usize], count: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); count];
    for (&l, &b) in letters.iter().zip(blocks) {
        out[b].push(l);
    }
    out
}
