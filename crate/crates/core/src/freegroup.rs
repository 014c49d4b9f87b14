//! Exact combinatorics of free groups: reduced words, canonical conjugacy
//! classes, exhaustive enumeration, and count oracles.
//!
//! Letters are ordered generator-major with the positive letter before its
//! inverse (`a < a⁻¹ < b < b⁻¹ < …`); canonical class words are the
//! lexicographically least rotation under that order, which makes every
//! persisted artifact byte-stable.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

pub const MAX_RANK: usize = 26;

/// One letter of a free group word, packed as `2*generator + (1 if inverse)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter(pub u8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        debug_assert!(generator < MAX_RANK);
        Letter((2 * generator + usize::from(inverse)) as u8)
    }

    pub fn generator(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    /// `a`..`z` for generators, uppercase for inverses.
    pub fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.generator() as u8) as char
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a'..='z' => Some(Letter::new(c as usize - 'a' as usize, false)),
            'A'..='Z' => Some(Letter::new(c as usize - 'A' as usize, true)),
            _ => None,
        }
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

pub fn word_string(letters: &[Letter]) -> String {
    letters.iter().map(|l| l.to_char()).collect()
}

pub fn parse_word(s: &str) -> Option<Vec<Letter>> {
    s.chars().map(Letter::from_char).collect()
}

/// A freely reduced word; the empty word is the identity sentinel.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReducedWord {
    letters: Vec<Letter>,
}

impl ReducedWord {
    pub fn identity() -> Self {
        ReducedWord { letters: Vec::new() }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }
}

/// Free reduction: cancel adjacent inverse pairs until none remain.
pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> ReducedWord {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last().is_some_and(|p| *p == l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    ReducedWord { letters: out }
}

/// Canonical representative of an oriented conjugacy class: a cyclically
/// reduced word in its lexicographically least rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConjClass {
    letters: Vec<Letter>,
    period: usize,
    primitive: bool,
}

impl ConjClass {
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    pub fn word(&self) -> String {
        word_string(&self.letters)
    }

    /// The class of the k-th power, k >= 1.
    pub fn power(&self, k: usize) -> ConjClass {
        assert!(k >= 1);
        let mut letters = Vec::with_capacity(self.letters.len() * k);
        for _ in 0..k {
            letters.extend_from_slice(&self.letters);
        }
        canonical_of_cyclic(letters)
    }
}

impl fmt::Display for ConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.word())
    }
}

/// Booth's least-rotation algorithm; returns the start index of the
/// lexicographically minimal rotation.
pub fn least_rotation_index(w: &[Letter]) -> usize {
    let n = w.len();
    if n <= 1 {
        return 0;
    }
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = w[(i + k) % n];
        let b = w[(j + k) % n];
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j)
}

fn rotation_period(w: &[Letter]) -> usize {
    let n = w.len();
    for p in 1..=n {
        if n % p != 0 {
            continue;
        }
        if (0..n).all(|i| w[i] == w[(i + p) % n]) {
            return p;
        }
    }
    n
}

/// Assumes `letters` is cyclically reduced and nonempty.
fn canonical_of_cyclic(mut letters: Vec<Letter>) -> ConjClass {
    let idx = least_rotation_index(&letters);
    letters.rotate_left(idx);
    let period = rotation_period(&letters);
    let primitive = period == letters.len();
    ConjClass { letters, period, primitive }
}

/// Canonicalize a reduced word: cyclic reduction then least rotation.
pub fn canonical_class(w: &ReducedWord) -> Result<ConjClass> {
    let mut v = w.letters.clone();
    let mut start = 0usize;
    let mut end = v.len();
    while end - start >= 2 && v[start] == v[end - 1].inverse() {
        start += 1;
        end -= 1;
    }
    v.truncate(end);
    v.drain(..start);
    if v.is_empty() {
        return Err(Error::IdentityWord);
    }
    Ok(canonical_of_cyclic(v))
}

/// Canonical class of the inverse word.
pub fn invert_class(c: &ConjClass) -> ConjClass {
    let inv: Vec<Letter> = c.letters.iter().rev().map(|l| l.inverse()).collect();
    canonical_of_cyclic(inv)
}

// ---------------------------------------------------------------------------
// Count oracles
// ---------------------------------------------------------------------------

/// Trace of the n-th power of the 2r x 2r no-backtracking 0/1 matrix.
fn words_trace(rank: usize, n: usize) -> u128 {
    let m = 2 * rank;
    let mul = |a: &Vec<Vec<u128>>, b: &Vec<Vec<u128>>| -> Vec<Vec<u128>> {
        let mut c = vec![vec![0u128; m]; m];
        for i in 0..m {
            for k in 0..m {
                let aik = a[i][k];
                if aik == 0 {
                    continue;
                }
                for j in 0..m {
                    c[i][j] = c[i][j]
                        .checked_add(aik.checked_mul(b[k][j]).expect("word count overflow"))
                        .expect("word count overflow");
                }
            }
        }
        c
    };
    let mut base = vec![vec![0u128; m]; m];
    for x in 0..m {
        for y in 0..m {
            if y != x ^ 1 {
                base[x][y] = 1;
            }
        }
    }
    let mut acc: Option<Vec<Vec<u128>>> = None;
    let mut pw = base;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => pw.clone(),
                Some(a) => mul(&a, &pw),
            });
        }
        e >>= 1;
        if e > 0 {
            pw = mul(&pw, &pw);
        }
    }
    let acc = acc.expect("n >= 1");
    (0..m).map(|i| acc[i][i]).sum()
}

fn euler_phi(mut n: usize) -> usize {
    let mut res = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            res -= res / p;
        }
        p += 1;
    }
    if n > 1 {
        res -= res / n;
    }
    res
}

/// Exact counts at cyclic word length exactly `n`: (cyclically reduced words,
/// conjugacy classes). Words from the trace formula, classes by Burnside over
/// rotations.
pub fn class_count(rank: usize, n: usize) -> Result<(u128, u128)> {
    if !(2..=MAX_RANK).contains(&rank) {
        return Err(Error::BadRank(rank));
    }
    assert!(n >= 1, "class_count requires n >= 1");
    let words = words_trace(rank, n);
    let mut total: u128 = 0;
    for d in 1..=n {
        if n % d == 0 {
            total = total
                .checked_add((euler_phi(n / d) as u128) * words_trace(rank, d))
                .expect("class count overflow");
        }
    }
    debug_assert_eq!(total % n as u128, 0);
    Ok((words, total / n as u128))
}

/// Total classes of cyclic length <= n_max (powers included).
pub fn classes_up_to(rank: usize, n_max: usize) -> Result<u128> {
    let mut s: u128 = 0;
    for n in 1..=n_max {
        s += class_count(rank, n)?.1;
    }
    Ok(s)
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// Depth-first enumerator of canonical classes whose words start with a fixed
/// first letter. Shards with distinct first letters partition the stream.
pub struct ShardEnumerator {
    rank: usize,
    n_max: usize,
    include_powers: bool,
    word: Vec<Letter>,
    next_child: Vec<u8>,
    started: bool,
    done: bool,
}

impl ShardEnumerator {
    pub fn new(rank: usize, first: Letter, n_max: usize, include_powers: bool) -> Self {
        ShardEnumerator {
            rank,
            n_max,
            include_powers,
            word: vec![first],
            next_child: vec![0],
            started: false,
            done: false,
        }
    }

    fn emit(&self) -> Option<ConjClass> {
        let w = &self.word;
        let n = w.len();
        if n > 1 && w[0] == w[n - 1].inverse() {
            return None; // not cyclically reduced
        }
        if least_rotation_index(w) != 0 {
            return None; // canonical representative appears elsewhere
        }
        let period = rotation_period(w);
        let primitive = period == n;
        if !self.include_powers && !primitive {
            return None;
        }
        Some(ConjClass { letters: w.clone(), period, primitive })
    }
}

impl Iterator for ShardEnumerator {
    type Item = ConjClass;

    fn next(&mut self) -> Option<ConjClass> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if let Some(c) = self.emit() {
                return Some(c);
            }
        }
        loop {
            if self.word.len() < self.n_max {
                let last = *self.word.last().unwrap();
                let start = *self.next_child.last().unwrap();
                let limit = (2 * self.rank) as u8;
                let mut found = None;
                for v in start..limit {
                    if Letter(v) != last.inverse() {
                        found = Some(v);
                        break;
                    }
                }
                if let Some(v) = found {
                    *self.next_child.last_mut().unwrap() = v + 1;
                    self.word.push(Letter(v));
                    self.next_child.push(0);
                    if let Some(c) = self.emit() {
                        return Some(c);
                    }
                    continue;
                }
            }
            self.word.pop();
            self.next_child.pop();
            if self.word.is_empty() {
                self.done = true;
                return None;
            }
        }
    }
}

/// First letters of the disjoint prefix shards, in canonical order.
pub fn shard_letters(rank: usize) -> Vec<Letter> {
    (0..2 * rank as u8).map(Letter).collect()
}

/// Stream every conjugacy class of cyclic length <= n_max exactly once.
///
/// `budget` caps the projected class count (powers included) before any work
/// happens; `None` applies the default cap of 2e7 classes.
pub fn enumerate_classes(
    rank: usize,
    n_max: usize,
    include_powers: bool,
    budget: Option<u128>,
) -> Result<impl Iterator<Item = ConjClass>> {
    if !(2..=MAX_RANK).contains(&rank) {
        return Err(Error::BadRank(rank));
    }
    assert!(n_max >= 1);
    let budget = budget.unwrap_or(20_000_000);
    let projected = classes_up_to(rank, n_max)?;
    if projected > budget {
        return Err(Error::CutoffTooLarge { projected, budget });
    }
    let shards = shard_letters(rank);
    Ok(shards
        .into_iter()
        .flat_map(move |first| ShardEnumerator::new(rank, first, n_max, include_powers)))
}
