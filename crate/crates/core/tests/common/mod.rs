//! Oracles shared by the integration tests. Everything here is written from
//! the definitions, without calling the library's own table builders.

#![allow(dead_code)]

use rand::{Rng, RngExt};

/// Output of an elementary rule read straight off its Wolfram number.
pub fn eca_bit(rule: u8, l: u8, c: u8, r: u8) -> u8 {
    (rule >> (4 * l + 2 * c + r)) & 1
}

/// One synchronous step, one cell at a time, cyclic boundary.
pub fn naive_step(f: &dyn Fn(u8, u8, u8) -> u8, row: &[u8]) -> Vec<u8> {
    let n = row.len();
    (0..n)
        .map(|i| f(row[(i + n - 1) % n], row[i], row[(i + 1) % n]))
        .collect()
}

/// Initial row followed by `steps` successors.
pub fn naive_evolve(f: &dyn Fn(u8, u8, u8) -> u8, init: &[u8], steps: usize) -> Vec<Vec<u8>> {
    let mut rows = vec![init.to_vec()];
    for _ in 0..steps {
        let next = naive_step(f, rows.last().unwrap());
        rows.push(next);
    }
    rows
}

/// The twelve neighborhoods containing both a 1 and a 2, in the order the
/// mixed digits are bound to them.
pub const MIXED: [[u8; 3]; 12] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [2, 0, 1],
    [1, 2, 0],
    [2, 1, 0],
    [1, 1, 2],
    [1, 2, 1],
    [2, 1, 1],
    [1, 2, 2],
    [2, 1, 2],
    [2, 2, 1],
];

/// Digits of a 1-based mixed index, most significant first.
pub fn digits_of(index: u64) -> [u8; 12] {
    let mut v = index - 1;
    let mut d = [0u8; 12];
    for slot in d.iter_mut().rev() {
        *slot = (v % 3) as u8;
        v /= 3;
    }
    d
}

/// Global rule output for one neighborhood, built from the definition.
pub fn gr_output(eps: u8, eps_prime: u8, index: u64, l: u8, c: u8, r: u8) -> u8 {
    let t = [l, c, r];
    if t == [0, 0, 0] {
        let a = eca_bit(eps, 0, 0, 0);
        return if a != 0 {
            a
        } else {
            2 * eca_bit(eps_prime, 0, 0, 0)
        };
    }
    if t.iter().all(|&s| s < 2) {
        return eca_bit(eps, l, c, r);
    }
    if t.iter().all(|&s| s != 1) {
        return 2 * eca_bit(eps_prime, l / 2, c / 2, r / 2);
    }
    let pos = MIXED
        .iter()
        .position(|m| *m == t)
        .expect("mixed neighborhood");
    digits_of(index)[pos]
}

pub fn random_row<R: Rng>(rng: &mut R, width: usize, colors: u8) -> Vec<u8> {
    (0..width).map(|_| rng.random_range(0..colors)).collect()
}

/// Compressed length used by the library, recomputed with its documented
/// settings: raw deflate, level 9.
pub fn deflate_len(data: &[u8]) -> usize {
    let mut c = libdeflater::Compressor::new(libdeflater::CompressionLvl::new(9).unwrap());
    let mut out = vec![0u8; c.deflate_compress_bound(data.len())];
    c.deflate_compress(data, &mut out).unwrap()
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Digest over every shard file in a directory, in name order.
pub fn shard_digest(dir: &std::path::Path) -> String {
    let mut names: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("gr_") && n.ends_with(".csv"))
        .collect();
    names.sort();
    let mut all = Vec::new();
    for n in names {
        all.extend_from_slice(n.as_bytes());
        all.push(0);
        all.extend(std::fs::read(dir.join(&n)).unwrap());
    }
    sha256_hex(&all)
}
