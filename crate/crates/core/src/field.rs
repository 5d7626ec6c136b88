//! Arithmetic in GF(p^e).
//!
//! An element is stored as its canonical integer encoding: the coefficient
//! vector `(c_0, .., c_{e-1})` of its polynomial representative packs into
//! `c_0 + c_1 p + .. + c_{e-1} p^{e-1}`. Comparing encodings therefore
//! compares coefficient vectors lexicographically from the top coefficient
//! down. The modulus is the smallest monic irreducible polynomial of degree
//! `e` under the same ordering of its lower coefficients, so every run (and
//! every other implementation following this rule) picks the same field.

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_FIELD_ORDER: u64 = 1 << 22;

/// Field orders at or below this get a full addition table.
const ADD_TABLE_LIMIT: u32 = 1024;

/// A field element as its canonical encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement(pub u32);

#[derive(Clone, Debug)]
pub struct Field {
    p: u32,
    e: u32,
    q: u32,
    /// Monic modulus, lowest coefficient first, length `e + 1`.
    modulus: Vec<u32>,
    primitive: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    add: Option<Vec<u32>>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Returns `(p, e)` with `q = p^e`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let mut rest = q;
    let mut e = 0;
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p as u32, e))
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// Polynomials over GF(p), lowest coefficient first, no trailing zeros.
fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = poly_trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let factor = (r[r.len() - 1] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &c) in m.iter().enumerate() {
            let sub = (factor as u64 * c as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        r = poly_trim(r);
    }
    r
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    poly_rem(&out.into_iter().map(|c| c as u32).collect::<Vec<_>>(), m, p)
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut exp = p - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    result as u32
}

fn decode(mut x: u32, p: u32, e: u32) -> Vec<u32> {
    (0..e)
        .map(|_| {
            let c = x % p;
            x /= p;
            c
        })
        .collect()
}

fn encode(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut g = decode(low as u32, p, d as u32);
            g.push(1);
            if poly_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl Field {
    pub fn new(p: u32, e: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if e == 0 {
            return Err(Error::InvalidDegree(e));
        }
        let q = (p as u64)
            .checked_pow(e)
            .filter(|&q| q <= MAX_FIELD_ORDER)
            .ok_or(Error::FieldTooLarge((p as u64).saturating_pow(e)))? as u32;

        let modulus = if e == 1 {
            vec![0, 1]
        } else {
            (0..q)
                .map(|low| {
                    let mut f = decode(low, p, e);
                    f.push(1);
                    f
                })
                .find(|f| is_irreducible(f, p))
                .expect("an irreducible polynomial exists in every degree")
        };

        let mulmod = |a: u32, b: u32| -> u32 {
            if e == 1 {
                return (a as u64 * b as u64 % p as u64) as u32;
            }
            let r = poly_mulmod(&decode(a, p, e), &decode(b, p, e), &modulus, p);
            encode(&r, p)
        };

        let group_order = (q - 1) as u64;
        let factors = prime_factors(group_order);
        let pow = |mut base: u32, mut exp: u64| -> u32 {
            let mut acc = 1u32;
            while exp > 0 {
                if exp & 1 == 1 {
                    acc = mulmod(acc, base);
                }
                base = mulmod(base, base);
                exp >>= 1;
            }
            acc
        };
        let primitive = (1..q)
            .find(|&g| factors.iter().all(|&r| pow(g, group_order / r) != 1))
            .expect("the multiplicative group is cyclic");

        let mut exp = vec![0u32; 2 * (q as usize - 1)];
        let mut log = vec![u32::MAX; q as usize];
        let mut cur = 1u32;
        for k in 0..(q - 1) as usize {
            exp[k] = cur;
            exp[k + q as usize - 1] = cur;
            log[cur as usize] = k as u32;
            cur = mulmod(cur, primitive);
        }

        let neg: Vec<u32> = (0..q)
            .map(|x| {
                let c: Vec<u32> = decode(x, p, e).into_iter().map(|c| (p - c) % p).collect();
                encode(&c, p)
            })
            .collect();

        let mut field = Field {
            p,
            e,
            q,
            modulus,
            primitive,
            exp,
            log,
            neg,
            add: None,
        };
        if q <= ADD_TABLE_LIMIT {
            let mut table = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    table[(a * q + b) as usize] = field.add_digits(a, b);
                }
            }
            field.add = Some(table);
        }
        Ok(field)
    }

    /// Builds GF(q) for a prime power `q`.
    pub fn of_order(q: u64) -> Result<Self> {
        let (p, e) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        Field::new(p, e)
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    /// Monic modulus, lowest coefficient first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn primitive_element(&self) -> u32 {
        self.primitive
    }

    pub fn coefficients(&self, x: u32) -> Vec<u32> {
        decode(x, self.p, self.e)
    }

    pub fn from_coefficients(&self, coeffs: &[u32]) -> u32 {
        assert!(coeffs.len() <= self.e as usize && coeffs.iter().all(|&c| c < self.p));
        encode(coeffs, self.p)
    }

    fn add_digits(&self, mut a: u32, mut b: u32) -> u32 {
        if self.e == 1 {
            return (a + b) % self.p;
        }
        let mut out = 0;
        let mut scale = 1;
        for _ in 0..self.e {
            out += ((a % self.p + b % self.p) % self.p) * scale;
            a /= self.p;
            b /= self.p;
            scale *= self.p;
        }
        out
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        match &self.add {
            Some(t) => t[(a * self.q + b) as usize],
            None => self.add_digits(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// Multiplicative inverse; panics on zero.
    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        assert!(a != 0, "zero has no inverse");
        let l = self.log[a as usize];
        self.exp[((self.q - 1 - l) % (self.q - 1)) as usize]
    }

    pub fn pow(&self, a: u32, k: u64) -> u32 {
        if k == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = self.log[a as usize] as u64 * (k % (self.q as u64 - 1)) % (self.q as u64 - 1);
        self.exp[l as usize]
    }

    pub fn frobenius(&self, a: u32) -> u32 {
        self.pow(a, self.p as u64)
    }

    pub fn is_square(&self, a: u32) -> bool {
        a == 0 || self.p == 2 || self.log[a as usize] % 2 == 0
    }

    /// True if `a` lies in the canonical half of GF(q)*: its encoding is
    /// smaller than that of `-a`. In characteristic 2 every nonzero element
    /// qualifies.
    #[inline]
    pub fn is_canonical_sign(&self, a: u32) -> bool {
        a != 0 && (self.p == 2 || a < self.neg(a))
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.q
    }
}
