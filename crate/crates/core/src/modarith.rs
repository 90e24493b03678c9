//! Exact arithmetic in cyclic groups `Z_m` and on the extended point set
//! `Z_m ∪ {∞}`.
//!
//! Everything here is integer arithmetic on residues reduced to `[0, m)`.
//! The extra point `∞` is a sentinel that every affine map fixes; it orders
//! strictly after all finite residues so sorted blocks always carry it last.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Largest supported modulus. Keeps pair-index tables comfortably in memory.
pub const MAX_MODULUS: u32 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModArithError {
    #[error("modulus {0} out of range (need 2 <= m <= {MAX_MODULUS})")]
    BadModulus(u32),
    #[error("{value} is not a unit modulo {modulus}")]
    NotAUnit { value: u32, modulus: u32 },
}

pub fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The cyclic group `Z_m` under addition, with the unit action for
/// multiplier maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicGroup {
    modulus: u32,
}

impl CyclicGroup {
    pub fn new(modulus: u32) -> Result<Self, ModArithError> {
        if !(2..=MAX_MODULUS).contains(&modulus) {
            return Err(ModArithError::BadModulus(modulus));
        }
        Ok(Self { modulus })
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u32 {
        (x % self.modulus as u64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.modulus as u64) as u32
    }

    #[inline]
    pub fn is_unit(&self, u: u32) -> bool {
        gcd(u % self.modulus, self.modulus) == 1
    }

    fn require_unit(&self, u: u32) -> Result<u32, ModArithError> {
        let u = u % self.modulus;
        if self.is_unit(u) {
            Ok(u)
        } else {
            Err(ModArithError::NotAUnit {
                value: u,
                modulus: self.modulus,
            })
        }
    }

    /// Least `t >= 1` with `u^t = 1 (mod m)`. Requires `gcd(u, m) = 1`.
    pub fn multiplicative_order(&self, u: u32) -> Result<u32, ModArithError> {
        let u = self.require_unit(u)?;
        let mut p = u;
        let mut t = 1;
        while p != 1 {
            p = self.mul(p, u);
            t += 1;
        }
        Ok(t)
    }

    /// The additive subgroup `<g>`, i.e. all multiples of `gcd(g, m)`,
    /// sorted ascending. Size `m / gcd(g, m)`.
    pub fn additive_subgroup(&self, g: u32) -> Vec<u32> {
        let g = g % self.modulus;
        let step = if g == 0 { 0 } else { gcd(g, self.modulus) };
        if step == 0 {
            return vec![0];
        }
        (0..self.modulus / step).map(|i| i * step).collect()
    }

    /// Euler's totient of the modulus: the number of units.
    pub fn unit_count(&self) -> u32 {
        let mut n = self.modulus;
        let mut phi = n;
        let mut p = 2;
        while p * p <= n {
            if n % p == 0 {
                phi -= phi / p;
                while n % p == 0 {
                    n /= p;
                }
            }
            p += 1;
        }
        if n > 1 {
            phi -= phi / n;
        }
        phi
    }

    /// Iterator over all units of the group, ascending.
    pub fn units(&self) -> impl Iterator<Item = u32> + '_ {
        (1..self.modulus).filter(move |&u| self.is_unit(u))
    }

    /// `x -> u*x + c` on finite residues; `∞` is fixed. Requires `u` a unit.
    pub fn affine_image(&self, p: Point, u: u32, c: u32) -> Result<Point, ModArithError> {
        let u = self.require_unit(u)?;
        Ok(match p {
            Point::Finite(x) => Point::Finite(self.add(self.mul(u, x % self.modulus), c % self.modulus)),
            Point::Infinity => Point::Infinity,
        })
    }
}

/// A point of `Z_m ∪ {∞}`. `Infinity` sorts after every finite residue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Finite(u32),
    Infinity,
}

impl Point {
    #[inline]
    pub fn finite(self) -> Option<u32> {
        match self {
            Point::Finite(x) => Some(x),
            Point::Infinity => None,
        }
    }

    #[inline]
    pub fn is_infinity(self) -> bool {
        matches!(self, Point::Infinity)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(x) => write!(f, "{x}"),
            Point::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Point::Finite(x) => s.serialize_u32(*x),
            Point::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Point;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a residue or the string \"inf\"")
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Point, E> {
                u32::try_from(v)
                    .map(Point::Finite)
                    .map_err(|_| E::custom("residue out of range"))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Point, E> {
                if v == "inf" {
                    Ok(Point::Infinity)
                } else {
                    Err(E::custom("expected \"inf\""))
                }
            }
        }
        d.deserialize_any(V)
    }
}
