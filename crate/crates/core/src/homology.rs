//! Betti numbers over a prime field.
//!
//! Ranks of boundary matrices are computed by sparse Gaussian elimination
//! with Markowitz-style pivot selection (pick the entry minimising the
//! product of its row and column counts, a cheap bound on fill-in). That is
//! plenty for complexes in the 1e6-entry range; blackbox methods are out of
//! scope here.

use std::fmt;

use thiserror::Error;

use crate::complex::FilteredComplex;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FpError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    OutOfRange {
        row: u32,
        col: u32,
        rows: usize,
        cols: usize,
    },
    #[error("complex is missing a face of {simplex}")]
    MissingFace { simplex: String },
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

/// A sparse matrix over `F_p`, stored as deduplicated coordinate triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrixFp {
    rows: usize,
    cols: usize,
    prime: u64,
    entries: Vec<(u32, u32, u64)>,
}

impl SparseMatrixFp {
    /// Build from triples. Duplicates are summed mod `p` and zeros dropped.
    pub fn new(
        rows: usize,
        cols: usize,
        prime: u64,
        mut entries: Vec<(u32, u32, u64)>,
    ) -> Result<Self, FpError> {
        if !is_prime(prime) {
            return Err(FpError::NotPrime(prime));
        }
        for &(r, c, _) in &entries {
            if r as usize >= rows || c as usize >= cols {
                return Err(FpError::OutOfRange {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut dedup: Vec<(u32, u32, u64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match dedup.last_mut() {
                Some(last) if last.0 == r && last.1 == c => {
                    last.2 = (last.2 + v) % prime;
                }
                _ => dedup.push((r, c, v % prime)),
            }
        }
        dedup.retain(|&(_, _, v)| v != 0);
        Ok(SparseMatrixFp {
            rows,
            cols,
            prime,
            entries: dedup,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn triples(&self) -> &[(u32, u32, u64)] {
        &self.entries
    }

    /// Dense product `self * other` (for tests and tiny matrices only).
    pub fn dense_product(&self, other: &SparseMatrixFp) -> Vec<Vec<u64>> {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.prime, other.prime);
        let p = self.prime;
        let mut out = vec![vec![0u64; other.cols]; self.rows];
        for &(i, k, a) in &self.entries {
            for &(k2, j, b) in &other.entries {
                if k == k2 {
                    let cell = &mut out[i as usize][j as usize];
                    *cell = (*cell + a * b) % p;
                }
            }
        }
        out
    }
}

impl fmt::Display for SparseMatrixFp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{} over F_{} ({} nonzero)",
            self.rows,
            self.cols,
            self.prime,
            self.entries.len()
        )
    }
}

/// Rank of a sparse matrix over `F_p`.
pub fn rank_fp(matrix: &SparseMatrixFp) -> usize {
    let p = matrix.prime;
    // Row-major working copies, columns sorted within each row.
    let mut rows: Vec<Vec<(u32, u64)>> = vec![Vec::new(); matrix.rows];
    for &(r, c, v) in &matrix.entries {
        rows[r as usize].push((c, v));
    }
    let mut col_count = vec![0u32; matrix.cols];
    // Rows of `entries` are already sorted by (row, col), so each row vector
    // is sorted by column.
    for row in &rows {
        for &(c, _) in row {
            col_count[c as usize] += 1;
        }
    }
    // For each column, rows that may still contain it (lazily maintained).
    let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); matrix.cols];
    for (r, row) in rows.iter().enumerate() {
        for &(c, _) in row {
            col_rows[c as usize].push(r as u32);
        }
    }
    let mut active = vec![true; matrix.rows];
    let mut rank = 0usize;

    loop {
        // Markowitz pivot: minimise (row_len - 1) * (col_count - 1).
        let mut best: Option<(u64, u32, u32)> = None;
        for (r, row) in rows.iter().enumerate() {
            if !active[r] || row.is_empty() {
                continue;
            }
            let rl = (row.len() - 1) as u64;
            for &(c, _) in row {
                let cost = rl * (col_count[c as usize] - 1) as u64;
                let key = (cost, r as u32, c);
                if best.map_or(true, |b| key < b) {
                    best = Some(key);
                }
                if cost == 0 {
                    break;
                }
            }
        }
        let Some((_, pr, pc)) = best else { break };
        let (pr, pc) = (pr as usize, pc as usize);
        rank += 1;

        let pivot_row = std::mem::take(&mut rows[pr]);
        let pivot_val = pivot_row
            .iter()
            .find(|&&(c, _)| c as usize == pc)
            .unwrap()
            .1;
        let inv = inv_mod(pivot_val, p);
        active[pr] = false;
        for &(c, _) in &pivot_row {
            col_count[c as usize] -= 1;
        }

        // Eliminate the pivot column from every other active row holding it.
        let holders = std::mem::take(&mut col_rows[pc]);
        for r in holders {
            let r = r as usize;
            if r == pr || !active[r] {
                continue;
            }
            let Ok(pos) = rows[r].binary_search_by_key(&(pc as u32), |&(c, _)| c) else {
                continue; // stale index entry
            };
            let factor = rows[r][pos].1 * inv % p;
            let scale = p - factor; // row_r += scale * pivot_row
            let old = std::mem::take(&mut rows[r]);
            let mut merged = Vec::with_capacity(old.len() + pivot_row.len());
            let (mut a, mut b) = (old.iter().peekable(), pivot_row.iter().peekable());
            loop {
                match (a.peek(), b.peek()) {
                    (Some(&&(ca, va)), Some(&&(cb, vb))) => {
                        if ca < cb {
                            merged.push((ca, va));
                            a.next();
                        } else if cb < ca {
                            let v = vb * scale % p;
                            if v != 0 {
                                merged.push((cb, v));
                                col_count[cb as usize] += 1;
                                col_rows[cb as usize].push(r as u32);
                            }
                            b.next();
                        } else {
                            let v = (va + vb * scale) % p;
                            if v != 0 {
                                merged.push((ca, v));
                            } else {
                                col_count[ca as usize] -= 1;
                            }
                            a.next();
                            b.next();
                        }
                    }
                    (Some(&&(ca, va)), None) => {
                        merged.push((ca, va));
                        a.next();
                    }
                    (None, Some(&&(cb, vb))) => {
                        let v = vb * scale % p;
                        if v != 0 {
                            merged.push((cb, v));
                            col_count[cb as usize] += 1;
                            col_rows[cb as usize].push(r as u32);
                        }
                        b.next();
                    }
                    (None, None) => break,
                }
            }
            rows[r] = merged;
        }
    }
    rank
}

/// Betti numbers beta_0 .. beta_K.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BettiVector(pub Vec<usize>);

impl fmt::Display for BettiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.0.iter().map(|b| b.to_string()).collect();
        write!(f, "({})", strs.join(", "))
    }
}

/// Betti numbers of the complex over `F_p` for dimensions `0..=max_dim`,
/// via `beta_k = |X_k| - rank d_k - rank d_{k+1}`.
///
/// `d_{max_dim + 1}` is taken from the stored simplices of dimension
/// `max_dim + 1`; if the complex was only built through `max_dim`, the top
/// Betti number is the one of that truncation.
pub fn betti(
    complex: &FilteredComplex,
    prime: u64,
    max_dim: usize,
) -> Result<BettiVector, FpError> {
    if !is_prime(prime) {
        return Err(FpError::NotPrime(prime));
    }
    // rank d_k for k = 1 ..= max_dim + 1 (d_0 = 0).
    let mut ranks = vec![0usize; max_dim + 2];
    for (k, rank) in ranks.iter_mut().enumerate().skip(1) {
        if complex.size(k) > 0 {
            *rank = rank_fp(&complex.boundary_matrix(k, prime)?);
        }
    }
    let betti = (0..=max_dim)
        .map(|k| complex.size(k) - ranks[k] - ranks[k + 1])
        .collect();
    Ok(BettiVector(betti))
}

/// Coefficients of `(1 - t)(1 - 2t) ... (1 - (n-1)t)`, unsigned: the Stirling
/// numbers of the first kind `|s(n, n-j)|` for `j = 0 .. n-1`.
///
/// Reference values for homology drivers; overflows u64 past n = 20.
pub fn stirling_reference(n: usize) -> Vec<u64> {
    assert!(n >= 1);
    let mut coeff = vec![1u64];
    for j in 1..n as u64 {
        let mut next = vec![0u64; coeff.len() + 1];
        for (i, &c) in coeff.iter().enumerate() {
            next[i] += c;
            next[i + 1] += c * j;
        }
        coeff = next;
    }
    coeff
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Simplex;

    fn matrix(rows: usize, cols: usize, p: u64, dense: &[&[u64]]) -> SparseMatrixFp {
        let mut entries = Vec::new();
        for (i, row) in dense.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v % p != 0 {
                    entries.push((i as u32, j as u32, v));
                }
            }
        }
        SparseMatrixFp::new(rows, cols, p, entries).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_fp(&matrix(2, 2, 3, &[&[1, 0], &[0, 1]])), 2);
        assert_eq!(rank_fp(&matrix(2, 2, 2, &[&[1, 1], &[1, 1]])), 1);
        // [[2]] vanishes mod 2.
        assert_eq!(rank_fp(&matrix(1, 1, 2, &[&[2]])), 0);
        assert_eq!(rank_fp(&matrix(3, 2, 5, &[&[], &[], &[]])), 0);
    }

    #[test]
    fn rank_depends_on_prime() {
        // Determinant 6: singular mod 2 and mod 3, regular mod 5.
        let dense: &[&[u64]] = &[&[1, 2], &[3, 12]];
        assert_eq!(rank_fp(&matrix(2, 2, 2, dense)), 1);
        assert_eq!(rank_fp(&matrix(2, 2, 3, dense)), 1);
        assert_eq!(rank_fp(&matrix(2, 2, 5, dense)), 2);
    }

    #[test]
    fn constructor_validates() {
        assert_eq!(
            SparseMatrixFp::new(2, 2, 4, vec![]),
            Err(FpError::NotPrime(4))
        );
        assert!(SparseMatrixFp::new(2, 2, 3, vec![(2, 0, 1)]).is_err());
        // Duplicates sum mod p.
        let m = SparseMatrixFp::new(1, 1, 3, vec![(0, 0, 2), (0, 0, 1)]).unwrap();
        assert_eq!(m.nnz(), 0);
    }

    fn triangle(filled: bool) -> FilteredComplex {
        let mut simplices = vec![
            (vec![0u32], 0.0),
            (vec![1], 0.0),
            (vec![2], 0.0),
            (vec![0, 1], 1.0),
            (vec![0, 2], 1.0),
            (vec![1, 2], 1.0),
        ];
        if filled {
            simplices.push((vec![0, 1, 2], 2.0));
        }
        FilteredComplex::from_simplices(
            simplices
                .into_iter()
                .map(|(v, w)| (Simplex::new(v).unwrap(), w)),
        )
    }

    #[test]
    fn betti_of_triangles() {
        assert_eq!(betti(&triangle(false), 2, 1).unwrap().0, vec![1, 1]);
        assert_eq!(betti(&triangle(true), 2, 1).unwrap().0, vec![1, 0]);
        assert_eq!(betti(&triangle(true), 7, 1).unwrap().0, vec![1, 0]);
    }

    #[test]
    fn betti_of_octahedron_boundary() {
        let c = crate::complex::tests::octahedron_boundary();
        assert_eq!(betti(&c, 2, 2).unwrap().0, vec![1, 0, 1]);
        assert_eq!(betti(&c, 5, 2).unwrap().0, vec![1, 0, 1]);
    }

    #[test]
    fn betti_rejects_non_prime() {
        assert_eq!(
            betti(&triangle(true), 9, 1),
            Err(FpError::NotPrime(9))
        );
    }

    #[test]
    fn stirling_values() {
        assert_eq!(stirling_reference(1), vec![1]);
        assert_eq!(stirling_reference(3), vec![1, 3, 2]);
        assert_eq!(stirling_reference(4), vec![1, 6, 11, 6]);
        assert_eq!(stirling_reference(5), vec![1, 10, 35, 50, 24]);
    }
}
