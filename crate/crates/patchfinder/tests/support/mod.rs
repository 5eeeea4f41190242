//! Shared helpers for integration tests.
// not every test target uses every helper
#![allow(dead_code)]

use std::collections::HashMap;

use patchfinder::codesim::{TokenClass, TokenStream};
use rand::Rng;

/// Exhaustive maximum-coverage tiling over all non-overlapping tile sets of
/// length >= `min_match`. Independent of the greedy implementation: plain
/// search over tile choices, memoized on (position in a, used positions of
/// b). Streams must satisfy |b| <= 32.
pub fn max_tiling_coverage(a: &[u8], b: &[u8], min_match: usize) -> usize {
    assert!(b.len() <= 32);

    fn rec(
        a: &[u8],
        b: &[u8],
        min_match: usize,
        i: usize,
        mask: u32,
        memo: &mut HashMap<(usize, u32), usize>,
    ) -> usize {
        if i >= a.len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(i, mask)) {
            return v;
        }
        // skip position i of a entirely
        let mut best = rec(a, b, min_match, i + 1, mask, memo);
        // or start a tile at (i, j) of any admissible length
        for j in 0..b.len() {
            let mut len = 0;
            let mut tile_mask = 0u32;
            while i + len < a.len()
                && j + len < b.len()
                && a[i + len] == b[j + len]
                && mask & (1 << (j + len)) == 0
            {
                tile_mask |= 1 << (j + len);
                len += 1;
                if len >= min_match {
                    let v = len + rec(a, b, min_match, i + len, mask | tile_mask, memo);
                    best = best.max(v);
                }
            }
        }
        memo.insert((i, mask), best);
        best
    }

    let mut memo = HashMap::new();
    rec(a, b, min_match, 0, 0, &mut memo)
}

/// Replays a greedy tile sequence and reports whether every iteration had
/// at most one candidate match available (a forced choice). Greedy coverage
/// is only guaranteed optimal on forced runs; any iteration offering
/// several candidate runs counts as a tie.
pub fn choices_were_forced(a: &[u8], b: &[u8], min_match: usize, tiles: &[patchfinder::codesim::Tile]) -> bool {
    let mut marked_a = vec![false; a.len()];
    let mut marked_b = vec![false; b.len()];
    for tile in tiles {
        if count_maximal_runs(a, b, &marked_a, &marked_b, min_match) > 1 {
            return false;
        }
        for k in 0..tile.length {
            marked_a[tile.start_a + k] = true;
            marked_b[tile.start_b + k] = true;
        }
    }
    true
}

fn count_maximal_runs(a: &[u8], b: &[u8], marked_a: &[bool], marked_b: &[bool], min_match: usize) -> usize {
    let mut count = 0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            if marked_a[i] || marked_b[j] || a[i] != b[j] {
                continue;
            }
            // only count run starts, so each maximal run is counted once
            let extends_left = i > 0
                && j > 0
                && !marked_a[i - 1]
                && !marked_b[j - 1]
                && a[i - 1] == b[j - 1];
            if extends_left {
                continue;
            }
            let mut len = 0;
            while i + len < a.len()
                && j + len < b.len()
                && !marked_a[i + len]
                && !marked_b[j + len]
                && a[i + len] == b[j + len]
            {
                len += 1;
            }
            if len >= min_match {
                count += 1;
            }
        }
    }
    count
}

/// Wrap raw symbol codes as a token stream.
pub fn stream_of(symbols: &[u8]) -> TokenStream {
    TokenStream {
        file_path: String::new(),
        tokens: symbols.iter().map(|&s| TokenClass::Keyword(s)).collect(),
    }
}

/// Random symbol stream over an `alphabet`-letter alphabet.
pub fn random_stream<R: Rng>(rng: &mut R, max_len: usize, alphabet: u8) -> Vec<u8> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| rng.gen_range(0..alphabet)).collect()
}
