//! Integer and ring-linear normal forms.
//!
//! A vector of `R^L` is handled through its additive coordinates: every
//! element contributes one digit per cyclic summand of `(R,+)`, so `R^L` is
//! the group `A = Z/m_1 + ... + Z/m_D`. Subgroups of such groups are stored as
//! lattices `L` with `m_i e_i` in `L`, in Hermite normal form. All additive
//! orders are powers of one prime, which keeps the Smith reductions inside
//! `Z/p^K`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ring::{Elem, LocalRing};

/// Dense integer matrix with overflow-checked arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i128>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i128>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, found: bad.len() });
        }
        Ok(IntMatrix { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc: i128 = 0;
                for k in 0..self.cols {
                    let term = self[(i, k)].checked_mul(other[(k, j)]).ok_or(Error::Overflow("matrix product"))?;
                    acc = acc.checked_add(term).ok_or(Error::Overflow("matrix product"))?;
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }

    /// Determinant by fraction-free elimination (square matrices only).
    pub fn determinant(&self) -> Result<i128> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| a[(i, k)] != 0) else {
                return Ok(0);
            };
            if p != k {
                a.swap_rows(p, k);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let x = a[(i, j)]
                        .checked_mul(a[(k, k)])
                        .and_then(|x| x.checked_sub(a[(i, k)].checked_mul(a[(k, j)])?))
                        .ok_or(Error::Overflow("determinant"))?;
                    a[(i, j)] = x / prev;
                }
                a[(i, k)] = 0;
            }
            prev = a[(k, k)];
        }
        Ok(if n == 0 { 1 } else { sign * a[(n - 1, n - 1)] })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// `row[dst] += f * row[src]`
    fn add_row(&mut self, dst: usize, src: usize, f: i128) -> Result<()> {
        for j in 0..self.cols {
            let v = self[(src, j)].checked_mul(f).and_then(|x| x.checked_add(self[(dst, j)]));
            self[(dst, j)] = v.ok_or(Error::Overflow("Smith normal form"))?;
        }
        Ok(())
    }

    /// `col[dst] += f * col[src]`
    fn add_col(&mut self, dst: usize, src: usize, f: i128) -> Result<()> {
        for i in 0..self.rows {
            let v = self[(i, src)].checked_mul(f).and_then(|x| x.checked_add(self[(i, dst)]));
            self[(i, dst)] = v.ok_or(Error::Overflow("Smith normal form"))?;
        }
        Ok(())
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            self[(i, j)] = -self[(i, j)];
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = i128;
    fn index(&self, (i, j): (usize, usize)) -> &i128 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i128 {
        &mut self.data[i * self.cols + j]
    }
}

/// `u * a * v == d` with `u`, `v` unimodular and `d` diagonal, `d_i | d_{i+1}`.
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl Smith {
    pub fn diagonal(&self) -> Vec<i128> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d[(i, i)]).collect()
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> Result<Smith> {
    let (r, c) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);
    for t in 0..r.min(c) {
        loop {
            // Smallest nonzero entry of the trailing block becomes the pivot.
            let pivot = (t..r)
                .flat_map(|i| (t..c).map(move |j| (i, j)))
                .filter(|&(i, j)| d[(i, j)] != 0)
                .min_by_key(|&(i, j)| (d[(i, j)].unsigned_abs(), i, j));
            let Some((pi, pj)) = pivot else {
                return Ok(Smith { u, d, v });
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..r {
                let f = d[(i, t)].div_euclid(d[(t, t)]);
                if f != 0 {
                    d.add_row(i, t, -f)?;
                    u.add_row(i, t, -f)?;
                }
                clean &= d[(i, t)] == 0;
            }
            for j in t + 1..c {
                let f = d[(t, j)].div_euclid(d[(t, t)]);
                if f != 0 {
                    d.add_col(j, t, -f)?;
                    v.add_col(j, t, -f)?;
                }
                clean &= d[(t, j)] == 0;
            }
            if !clean {
                continue;
            }
            // Enforce the divisibility chain by folding an offending row in.
            let offending = (t + 1..r)
                .flat_map(|i| (t + 1..c).map(move |j| (i, j)))
                .find(|&(i, j)| d[(i, j)] % d[(t, t)] != 0);
            match offending {
                Some((i, _)) => {
                    d.add_row(t, i, 1)?;
                    u.add_row(t, i, 1)?;
                }
                None => break,
            }
        }
        if d[(t, t)] < 0 {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    Ok(Smith { u, d, v })
}

/// Extended gcd: `(g, s, t)` with `s*a + t*b = g >= 0`.
pub(crate) fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// An additive subgroup of `Z/m_1 + ... + Z/m_D`, stored as the Hermite
/// normal form of its preimage lattice in `Z^D`.
///
/// Row `i` has its pivot in column `i`; the pivot `d_i` divides `m_i` and a
/// row with `d_i = m_i` is the trivial relation `m_i e_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Subgroup {
    moduli: Vec<i64>,
    rows: Vec<Vec<i64>>,
}

impl Subgroup {
    pub fn zero(moduli: Vec<i64>) -> Self {
        let dim = moduli.len();
        let rows = (0..dim)
            .map(|i| {
                let mut r = vec![0; dim];
                r[i] = moduli[i];
                r
            })
            .collect();
        Subgroup { moduli, rows }
    }

    pub fn generated<I: IntoIterator<Item = Vec<i64>>>(moduli: Vec<i64>, gens: I) -> Self {
        let mut s = Self::zero(moduli);
        for g in gens {
            s.insert(g);
        }
        s.reduce_rows();
        s
    }

    pub fn moduli(&self) -> &[i64] {
        &self.moduli
    }

    pub fn dim(&self) -> usize {
        self.moduli.len()
    }

    fn insert(&mut self, mut v: Vec<i64>) {
        let dim = self.dim();
        debug_assert_eq!(v.len(), dim);
        for (x, &m) in v.iter_mut().zip(&self.moduli) {
            *x = x.rem_euclid(m);
        }
        for i in 0..dim {
            if v[i] == 0 {
                continue;
            }
            let a = self.rows[i][i];
            let b = v[i];
            let (g, s, t) = egcd(a, b);
            let (fa, fb) = (a / g, b / g);
            let row = &self.rows[i];
            let mut new_row = vec![0; dim];
            let mut rest = vec![0; dim];
            for j in i..dim {
                let m = self.moduli[j];
                new_row[j] = (s * row[j] + t * v[j]).rem_euclid(m);
                rest[j] = (fa * v[j] - fb * row[j]).rem_euclid(m);
            }
            // Column i: gcd, which divides m_i; the remainder vanishes.
            new_row[i] = g;
            rest[i] = 0;
            self.rows[i] = new_row;
            v = rest;
        }
    }

    /// Brings every off-diagonal entry into `0..d_j`.
    fn reduce_rows(&mut self) {
        let dim = self.dim();
        for i in (0..dim).rev() {
            for j in i + 1..dim {
                let dj = self.rows[j][j];
                let f = self.rows[i][j].div_euclid(dj);
                if f != 0 {
                    for k in j..dim {
                        let val = self.rows[i][k] - f * self.rows[j][k];
                        self.rows[i][k] = val.rem_euclid(self.moduli[k]);
                    }
                }
            }
        }
    }

    /// Number of elements of the subgroup.
    pub fn order(&self) -> u128 {
        self.moduli
            .iter()
            .zip(&self.rows)
            .enumerate()
            .map(|(i, (&m, r))| (m / r[i]) as u128)
            .product()
    }

    /// Rows that are not trivial relations; they generate the subgroup.
    pub fn generators(&self) -> Vec<Vec<i64>> {
        self.rows.iter().enumerate().filter(|(i, r)| r[*i] != self.moduli[*i]).map(|(_, r)| r.clone()).collect()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        let mut w: Vec<i64> = v.iter().zip(&self.moduli).map(|(x, m)| x.rem_euclid(*m)).collect();
        self.reduce_prefix(&mut w, self.dim())
    }

    /// Eliminates columns `0..upto` of `w` with the pivot rows; false if
    /// some entry is not divisible by its pivot.
    fn reduce_prefix(&self, w: &mut [i64], upto: usize) -> bool {
        let dim = self.dim();
        for i in 0..upto {
            if w[i] == 0 {
                continue;
            }
            let d = self.rows[i][i];
            if w[i] % d != 0 {
                return false;
            }
            let f = w[i] / d;
            let row = &self.rows[i];
            for k in i..dim {
                w[k] = (w[k] - f * row[k]).rem_euclid(self.moduli[k]);
            }
        }
        true
    }

    /// Exact integer coordinates of `v` with respect to the rows, if `v`
    /// (read as an integer vector) lies in the lattice.
    pub fn coords(&self, v: &[i64]) -> Result<Option<Vec<i128>>> {
        let dim = self.dim();
        let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        let mut c = vec![0i128; dim];
        for i in 0..dim {
            let d = self.rows[i][i] as i128;
            if w[i] % d != 0 {
                return Ok(None);
            }
            let f = w[i] / d;
            c[i] = f;
            if f != 0 {
                for k in i..dim {
                    let delta = f.checked_mul(self.rows[i][k] as i128).ok_or(Error::Overflow("lattice coordinates"))?;
                    w[k] = w[k].checked_sub(delta).ok_or(Error::Overflow("lattice coordinates"))?;
                }
            }
        }
        Ok(Some(c))
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.moduli == other.moduli && self.generators().iter().all(|g| other.contains(g))
    }

    pub fn intersection(&self, other: &Subgroup) -> Subgroup {
        let pairs: Vec<(Vec<i64>, Vec<i64>)> = self.generators().into_iter().map(|g| (g.clone(), g)).collect();
        preimage(&self.moduli, &self.moduli, &pairs, &other.generators())
    }
}

/// `{ x in span(sources) : phi(x) in target }` for an additive map `phi`
/// given on source generators as pairs `(phi(s), s)`.
///
/// Computed from the Hermite form of the subgroup of `T + S` spanned by the
/// graph of `phi` and by `target`: rows pivoting in the `S` block have zero
/// `T` part and span the preimage.
pub(crate) fn preimage(
    source_moduli: &[i64],
    target_moduli: &[i64],
    pairs: &[(Vec<i64>, Vec<i64>)],
    target: &[Vec<i64>],
) -> Subgroup {
    let tdim = target_moduli.len();
    let moduli: Vec<i64> = target_moduli.iter().chain(source_moduli).copied().collect();
    let gens = pairs
        .iter()
        .map(|(img, src)| img.iter().chain(src).copied().collect::<Vec<_>>())
        .chain(target.iter().map(|t| t.iter().copied().chain(std::iter::repeat_n(0, source_moduli.len())).collect()));
    let graph = Subgroup::generated(moduli, gens);
    let rows: Vec<Vec<i64>> = graph.rows[tdim..].iter().map(|r| r[tdim..].to_vec()).collect();
    let mut out = Subgroup { moduli: source_moduli.to_vec(), rows };
    out.reduce_rows();
    out
}

/// Kernel of an additive map given by the images of the unit vectors.
pub(crate) fn kernel(source_moduli: &[i64], target_moduli: &[i64], unit_images: &[Vec<i64>]) -> Subgroup {
    let pairs: Vec<(Vec<i64>, Vec<i64>)> = unit_images
        .iter()
        .enumerate()
        .map(|(i, img)| {
            let mut e = vec![0; source_moduli.len()];
            e[i] = 1;
            (img.clone(), e)
        })
        .collect();
    preimage(source_moduli, target_moduli, &pairs, &[])
}

/// Smith reduction of a square matrix over `Z/P`, `P = p^k`.
///
/// Returns the pivot valuations (`k` for a zero pivot) and the column
/// transform `V` with its inverse; rows of `T V` span the same module as
/// the diagonal.
fn smith_mod_prime_power(mut t: Vec<Vec<i64>>, p: i64, k: u32) -> (Vec<u32>, Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let modulus = p.pow(k);
    let n = t.len();
    let val = |x: i64| -> u32 {
        if x == 0 {
            return k;
        }
        let mut x = x;
        let mut v = 0;
        while x % p == 0 {
            x /= p;
            v += 1;
        }
        v
    };
    let inv = |u: i64| -> i64 {
        let (_, s, _) = egcd(u, modulus);
        s.rem_euclid(modulus)
    };
    let mut v: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    let mut vinv = v.clone();
    let mut vals = Vec::with_capacity(n);
    for s in 0..n {
        let pivot = (s..n)
            .flat_map(|i| (s..n).map(move |j| (i, j)))
            .filter(|&(i, j)| t[i][j] != 0)
            .min_by_key(|&(i, j)| (val(t[i][j]), i, j));
        let Some((pi, pj)) = pivot else {
            vals.extend(std::iter::repeat_n(k, n - s));
            break;
        };
        t.swap(s, pi);
        if pj != s {
            for row in t.iter_mut().chain(v.iter_mut()) {
                row.swap(s, pj);
            }
            vinv.swap(s, pj);
        }
        let e = val(t[s][s]);
        let unit = t[s][s] / p.pow(e);
        let ui = inv(unit);
        // Scale column s by the inverse unit so the pivot becomes p^e.
        for row in t.iter_mut().chain(v.iter_mut()) {
            row[s] = (row[s] * ui).rem_euclid(modulus);
        }
        for x in vinv[s].iter_mut() {
            *x = (*x * unit).rem_euclid(modulus);
        }
        let pe = p.pow(e);
        for i in 0..n {
            if i != s && t[i][s] != 0 {
                let f = t[i][s] / pe;
                for j in 0..n {
                    t[i][j] = (t[i][j] - f * t[s][j]).rem_euclid(modulus);
                }
            }
        }
        for j in s + 1..n {
            if t[s][j] != 0 {
                let f = t[s][j] / pe;
                for row in t.iter_mut().chain(v.iter_mut()) {
                    row[j] = (row[j] - f * row[s]).rem_euclid(modulus);
                }
                // V <- V E with E = I - f e_s e_j^T, so V^{-1} <- (I + f e_s e_j^T) V^{-1}.
                for c in 0..n {
                    vinv[s][c] = (vinv[s][c] + f * vinv[j][c]).rem_euclid(modulus);
                }
            }
        }
        vals.push(e);
    }
    (vals, v, vinv)
}

/// Additive coordinates of a ring vector.
pub(crate) fn encode(ring: &LocalRing, v: &[Elem]) -> Vec<i64> {
    v.iter().flat_map(|&x| ring.digits(x).map(|d| d as i64)).collect()
}

pub(crate) fn decode(ring: &LocalRing, x: &[i64]) -> Vec<Elem> {
    let t = ring.additive_orders().len();
    x.chunks(t)
        .map(|c| ring.from_digits(&c.iter().map(|&d| d as i128).collect::<Vec<_>>()))
        .collect()
}

pub(crate) fn ambient_moduli(ring: &LocalRing, len: usize) -> Vec<i64> {
    (0..len).flat_map(|_| ring.additive_orders().iter().map(|&m| m as i64)).collect()
}

/// The subgroup of `R^len` spanned by the R-multiples of `gens`.
pub(crate) fn span(ring: &LocalRing, len: usize, gens: &[Vec<Elem>]) -> Subgroup {
    let basis = ring.additive_basis();
    let vectors = gens.iter().flat_map(|g| basis.iter().map(move |&b| encode(ring, &ring.scale_vec(b, g))));
    Subgroup::generated(ambient_moduli(ring, len), vectors)
}

/// Matrix over a ring, row-major element codes.
#[derive(Clone)]
pub struct RingMatrix {
    ring: Arc<LocalRing>,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl fmt::Debug for RingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RingMatrix")
            .field("ring", &self.ring.name())
            .field("rows", &self.row_vecs())
            .finish()
    }
}

impl PartialEq for RingMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.ring.spec() == other.ring.spec() && self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl RingMatrix {
    pub fn new(ring: Arc<LocalRing>, rows: usize, cols: usize, data: Vec<Elem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        if let Some(&bad) = data.iter().find(|&&x| x as usize >= ring.size()) {
            return Err(Error::invalid(format!("element code {bad} out of range for {}", ring.name())));
        }
        Ok(RingMatrix { ring, rows, cols, data })
    }

    pub fn from_rows(ring: Arc<LocalRing>, cols: usize, rows: &[Vec<Elem>]) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, found: bad.len() });
        }
        Self::new(ring, rows.len(), cols, rows.concat())
    }

    pub fn zeros(ring: Arc<LocalRing>, rows: usize, cols: usize) -> Self {
        RingMatrix { ring, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ring: Arc<LocalRing>, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn ring(&self) -> &Arc<LocalRing> {
        &self.ring
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Elem) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Elem>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> RingMatrix {
        let mut t = RingMatrix::zeros(Arc::clone(&self.ring), self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &RingMatrix) -> Result<RingMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let r = &self.ring;
        let mut out = RingMatrix::zeros(Arc::clone(r), self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0;
                for k in 0..self.cols {
                    acc = r.add(acc, r.mul(self.get(i, k), other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    fn zip_with(&self, other: &RingMatrix, f: impl Fn(Elem, Elem) -> Elem) -> Result<RingMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch { expected: self.rows * self.cols, found: other.rows * other.cols });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(RingMatrix { ring: Arc::clone(&self.ring), rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &RingMatrix) -> Result<RingMatrix> {
        self.zip_with(other, |a, b| self.ring.add(a, b))
    }

    pub fn sub(&self, other: &RingMatrix) -> Result<RingMatrix> {
        self.zip_with(other, |a, b| self.ring.sub(a, b))
    }

    pub fn neg(&self) -> RingMatrix {
        let data = self.data.iter().map(|&a| self.ring.neg(a)).collect();
        RingMatrix { ring: Arc::clone(&self.ring), rows: self.rows, cols: self.cols, data }
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Columns `range` as a new matrix.
    pub fn columns(&self, range: std::ops::Range<usize>) -> RingMatrix {
        let cols = range.len();
        let data = (0..self.rows).flat_map(|i| self.row(i)[range.clone()].to_vec()).collect();
        RingMatrix { ring: Arc::clone(&self.ring), rows: self.rows, cols, data }
    }

    /// Horizontal concatenation; all blocks need the same number of rows.
    pub fn hcat(blocks: &[&RingMatrix]) -> Result<RingMatrix> {
        let first = blocks.first().ok_or_else(|| Error::invalid("no blocks to concatenate"))?;
        let rows = first.rows;
        if let Some(bad) = blocks.iter().find(|b| b.rows != rows) {
            return Err(Error::DimensionMismatch { expected: rows, found: bad.rows });
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let data = (0..rows).flat_map(|i| blocks.iter().flat_map(move |b| b.row(i).to_vec())).collect();
        Ok(RingMatrix { ring: Arc::clone(&first.ring), rows, cols, data })
    }

    /// Vertical concatenation; all blocks need the same number of columns.
    pub fn vcat(blocks: &[&RingMatrix]) -> Result<RingMatrix> {
        let first = blocks.first().ok_or_else(|| Error::invalid("no blocks to concatenate"))?;
        let cols = first.cols;
        if let Some(bad) = blocks.iter().find(|b| b.cols != cols) {
            return Err(Error::DimensionMismatch { expected: cols, found: bad.cols });
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let data = blocks.iter().flat_map(|b| b.data.clone()).collect();
        Ok(RingMatrix { ring: Arc::clone(&first.ring), rows, cols, data })
    }
}

/// A presentation of a finite subgroup of `R^len` as a direct sum of
/// cyclic groups: every element is uniquely `sum_j c_j v_j`, `0 <= c_j < m_j`.
#[derive(Clone)]
pub struct CyclicDecomposition {
    ring: Arc<LocalRing>,
    len: usize,
    generators: Vec<Vec<Elem>>,
    orders: Vec<u32>,
    encoded: Vec<Vec<i64>>,
    // Hermite form of the graph {(sum c_j v_j, c)} inside R^len + Z/m_1 + ...
    graph: Subgroup,
}

impl fmt::Debug for CyclicDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CyclicDecomposition")
            .field("generators", &self.generators)
            .field("orders", &self.orders)
            .finish()
    }
}

fn vector_order(moduli: &[i64], x: &[i64]) -> i64 {
    x.iter()
        .zip(moduli)
        .map(|(&d, &m)| m / egcd(d.rem_euclid(m), m).0)
        .fold(1, |acc, o| acc / egcd(acc, o).0 * o)
}

impl CyclicDecomposition {
    /// Decomposes the subgroup `group` of `R^len`. When the additive
    /// generators `preferred` are already independent they are used as is;
    /// otherwise summands come from a Smith reduction.
    pub(crate) fn from_subgroup(ring: &Arc<LocalRing>, len: usize, group: &Subgroup, preferred: &[Vec<i64>]) -> Result<Self> {
        let moduli = group.moduli().to_vec();
        let total = group.order();
        let candidates: Vec<Vec<i64>> = preferred.iter().filter(|v| v.iter().any(|&x| x != 0)).cloned().collect();
        let product: Option<u128> = candidates
            .iter()
            .try_fold(1u128, |acc, v| acc.checked_mul(vector_order(&moduli, v) as u128));
        let (encoded, orders) = if !candidates.is_empty() && product == Some(total) {
            let orders = candidates.iter().map(|v| vector_order(&moduli, v)).collect();
            (candidates, orders)
        } else {
            Self::smith_summands(group)?
        };
        let tail: Vec<i64> = orders.clone();
        let all_moduli: Vec<i64> = moduli.iter().chain(&tail).copied().collect();
        let rank = orders.len();
        let graph = Subgroup::generated(
            all_moduli,
            encoded.iter().enumerate().map(|(j, v)| {
                let mut row = v.clone();
                row.extend((0..rank).map(|i| (i == j) as i64));
                row
            }),
        );
        let decomposition = CyclicDecomposition {
            ring: Arc::clone(ring),
            len,
            generators: encoded.iter().map(|v| decode(ring, v)).collect(),
            orders: orders.iter().map(|&o| o as u32).collect(),
            encoded,
            graph,
        };
        if decomposition.order() != total {
            return Err(Error::consistency(format!(
                "cyclic decomposition has order {} but the group has {total} elements",
                decomposition.order()
            )));
        }
        Ok(decomposition)
    }

    fn smith_summands(group: &Subgroup) -> Result<(Vec<Vec<i64>>, Vec<i64>)> {
        let moduli = group.moduli();
        let dim = moduli.len();
        if group.order() == 1 {
            return Ok((Vec::new(), Vec::new()));
        }
        let top = *moduli.iter().max().expect("nonempty ambient");
        let p = (2..=top).find(|d| top % d == 0).expect("modulus > 1");
        let k = (1..).find(|&k| p.pow(k) == top).expect("prime power moduli");
        // Relations: coordinates of m_i e_i in the lattice basis.
        let mut t = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut e = vec![0; dim];
            e[i] = moduli[i];
            let c = group.coords(&e)?.ok_or_else(|| Error::consistency("lattice misses a trivial relation"))?;
            t.push(c.iter().map(|&x| x.rem_euclid(top as i128) as i64).collect());
        }
        let (vals, _v, vinv) = smith_mod_prime_power(t, p, k);
        let mut gens = Vec::new();
        let mut orders = Vec::new();
        for (s, &e) in vals.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let mut h = vec![0i64; dim];
            for (i, row) in group.rows.iter().enumerate() {
                let f = vinv[s][i];
                if f != 0 {
                    for c in i..dim {
                        h[c] = (h[c] + f * row[c]).rem_euclid(moduli[c]);
                    }
                }
            }
            let order = p.pow(e);
            if vector_order(moduli, &h) != order {
                return Err(Error::consistency("Smith summand has the wrong additive order"));
            }
            gens.push(h);
            orders.push(order);
        }
        Ok((gens, orders))
    }

    pub fn ring(&self) -> &Arc<LocalRing> {
        &self.ring
    }

    /// Length of the ambient vectors.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn generators(&self) -> &[Vec<Elem>] {
        &self.generators
    }

    /// Additive orders `m_j` of the generators.
    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Group order `prod m_j`.
    pub fn order(&self) -> u128 {
        self.orders.iter().map(|&m| m as u128).product()
    }

    /// The exponent tuple of `v`, or `None` if `v` is outside the group.
    pub fn membership(&self, v: &[Elem]) -> Result<Option<Vec<u32>>> {
        if v.len() != self.len {
            return Err(Error::DimensionMismatch { expected: self.len, found: v.len() });
        }
        let head = encode(&self.ring, v);
        let dim = head.len();
        let mut w: Vec<i64> = head.into_iter().chain(std::iter::repeat_n(0, self.rank())).collect();
        if !self.graph.reduce_prefix(&mut w, dim) {
            return Ok(None);
        }
        // What is left is (0 | -c) modulo the graph.
        Ok(Some(
            w[dim..].iter().zip(&self.orders).map(|(&x, &m)| (-x).rem_euclid(m as i64) as u32).collect(),
        ))
    }

    pub fn contains(&self, v: &[Elem]) -> bool {
        matches!(self.membership(v), Ok(Some(_)))
    }

    /// `sum_j c_j v_j`.
    pub fn combine(&self, tuple: &[u32]) -> Vec<Elem> {
        let moduli = self.graph.moduli();
        let dim = moduli.len() - self.rank();
        let mut acc = vec![0i64; dim];
        for (g, &c) in self.encoded.iter().zip(tuple) {
            for (i, x) in acc.iter_mut().enumerate() {
                *x = (*x + c as i64 * g[i]).rem_euclid(moduli[i]);
            }
        }
        decode(&self.ring, &acc)
    }
}

/// Cyclic decomposition of the R-span of `gens` inside `R^len`.
pub fn cyclic_decomposition(ring: &Arc<LocalRing>, len: usize, gens: &[Vec<Elem>]) -> Result<CyclicDecomposition> {
    check_lengths(len, gens)?;
    if gens.iter().all(|g| g.iter().all(|&x| x == 0)) {
        return Err(Error::invalid("cannot decompose the span of an all-zero generating set"));
    }
    decompose_span(ring, len, gens)
}

pub(crate) fn decompose_span(ring: &Arc<LocalRing>, len: usize, gens: &[Vec<Elem>]) -> Result<CyclicDecomposition> {
    let group = span(ring, len, gens);
    let basis = ring.additive_basis();
    let preferred: Vec<Vec<i64>> = gens
        .iter()
        .flat_map(|g| basis.iter().map(move |&b| encode(ring, &ring.scale_vec(b, g))))
        .collect();
    CyclicDecomposition::from_subgroup(ring, len, &group, &preferred)
}

pub(crate) fn check_lengths(len: usize, gens: &[Vec<Elem>]) -> Result<()> {
    match gens.iter().find(|g| g.len() != len) {
        Some(bad) => Err(Error::DimensionMismatch { expected: len, found: bad.len() }),
        None => Ok(()),
    }
}

/// Exponent tuple of `v` in the decomposition, or `None` if `v` lies outside.
pub fn subgroup_membership(decomposition: &CyclicDecomposition, v: &[Elem]) -> Result<Option<Vec<u32>>> {
    decomposition.membership(v)
}

/// Annihilator `{v : pairing(v, g) = 0 for all g in gens}` of a set of
/// vectors in `R^len` under an R-bilinear, nondegenerate pairing.
pub(crate) fn pairing_kernel(
    ring: &LocalRing,
    len: usize,
    gens: &[Vec<Elem>],
    pairing: impl Fn(&[Elem], &[Elem]) -> Elem,
) -> Result<Subgroup> {
    check_lengths(len, gens)?;
    let source = ambient_moduli(ring, len);
    let target = ambient_moduli(ring, gens.len());
    let basis = ring.additive_basis();
    let mut images = Vec::with_capacity(source.len());
    for pos in 0..len {
        for &b in &basis {
            let mut u = vec![0; len];
            u[pos] = b;
            let values: Vec<Elem> = gens.iter().map(|g| pairing(&u, g)).collect();
            images.push(encode(ring, &values));
        }
    }
    let ker = kernel(&source, &target, &images);
    for k in ker.generators() {
        let v = decode(ring, &k);
        if gens.iter().any(|g| pairing(&v, g) != 0) {
            return Err(Error::consistency("annihilator generator does not pair to zero"));
        }
    }
    let ambient = (ring.size() as u128).checked_pow(len as u32).ok_or(Error::Overflow("ambient size"))?;
    let spanned = span(ring, len, gens).order();
    if spanned.checked_mul(ker.order()) != Some(ambient) {
        return Err(Error::consistency(format!(
            "|C| * |C^perp| = {} * {} differs from |R|^{len} = {ambient}",
            spanned,
            ker.order()
        )));
    }
    Ok(ker)
}

/// Generators of the annihilator of `gens` under `pairing`; the cardinality
/// identity `|C| |C^perp| = |R|^len` is checked before returning.
pub fn kernel_of_pairing(
    ring: &LocalRing,
    len: usize,
    gens: &[Vec<Elem>],
    pairing: impl Fn(&[Elem], &[Elem]) -> Elem,
) -> Result<Vec<Vec<Elem>>> {
    let ker = pairing_kernel(ring, len, gens, pairing)?;
    Ok(ker.generators().iter().map(|g| decode(ring, g)).collect())
}

/// All vectors of `R^len`, in lexicographic order of codes.
pub fn ambient_vectors(ring: &LocalRing, len: usize) -> impl Iterator<Item = Vec<Elem>> + '_ {
    let q = ring.size() as u128;
    let total = q.pow(len as u32);
    (0..total).map(move |mut idx| {
        let mut v = vec![0; len];
        for slot in v.iter_mut().rev() {
            *slot = (idx % q) as Elem;
            idx /= q;
        }
        v
    })
}
