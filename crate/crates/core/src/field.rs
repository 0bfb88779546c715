//! Arithmetic in the BLS12-381 scalar field.
//!
//! Elements are held in Montgomery form over four 64-bit limbs. The external
//! contract (serialization, `to_canonical`, `Display`) always uses the
//! canonical integer in `[0, p)`.

use core::fmt;
use core::iter::{Product, Sum};
use core::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rand::RngCore;
use thiserror::Error;

/// p = 0x73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001
pub const MODULUS: [u64; 4] = [
    0xffff_ffff_0000_0001,
    0x53bd_a402_fffe_5bfe,
    0x3339_d808_09a1_d805,
    0x73ed_a753_299d_7d48,
];

/// 2^256 mod p
const R: [u64; 4] = [
    0x0000_0001_ffff_fffe,
    0x5884_b7fa_0003_4802,
    0x998c_4fef_ecbc_4ff5,
    0x1824_b159_acc5_056f,
];

/// 2^512 mod p
const R2: [u64; 4] = [
    0xc999_e990_f3f2_9c6d,
    0x2b6c_edcb_8792_5c23,
    0x05d3_1496_7254_398f,
    0x0748_d9d9_9f59_ff11,
];

/// -p^{-1} mod 2^64
const INV: u64 = 0xffff_fffe_ffff_ffff;

/// p - 1 = 2^32 * T with T odd.
const TWO_ADICITY: u32 = 32;
const T: [u64; 4] = [
    0xfffe_5bfe_ffff_ffff,
    0x09a1_d805_53bd_a402,
    0x299d_7d48_3339_d808,
    0x0000_0000_73ed_a753,
];
/// (T - 1) / 2
const T_MINUS_ONE_DIV_TWO: [u64; 4] = [
    0x7fff_2dff_7fff_ffff,
    0x04d0_ec02_a9de_d201,
    0x94ce_bea4_199c_ec04,
    0x0000_0000_39f6_d3a9,
];
/// 7 generates the multiplicative group; 7^T has order 2^32.
const GENERATOR: u64 = 7;

/// Size of a serialized element.
pub const ELEM_BYTES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("attempted to invert zero (index {index})")]
    ZeroInverse { index: usize },
    #[error("batch size must be at least 2, got {0}")]
    BatchSize(usize),
    #[error("encoding is not a canonical field element")]
    NonCanonical,
}

#[inline(always)]
const fn adc(a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = (a as u128) + (b as u128) + (carry as u128);
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
const fn sbb(a: u64, b: u64, borrow: u64) -> (u64, u64) {
    let t = (a as u128).wrapping_sub((b as u128) + ((borrow >> 63) as u128));
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
const fn mac(a: u64, b: u64, c: u64, carry: u64) -> (u64, u64) {
    let t = (a as u128) + (b as u128) * (c as u128) + (carry as u128);
    (t as u64, (t >> 64) as u64)
}

/// Subtracts p when `limbs >= p`. Input must be below 2p.
#[inline(always)]
const fn reduce_once(l: [u64; 4]) -> [u64; 4] {
    let (d0, b) = sbb(l[0], MODULUS[0], 0);
    let (d1, b) = sbb(l[1], MODULUS[1], b);
    let (d2, b) = sbb(l[2], MODULUS[2], b);
    let (d3, b) = sbb(l[3], MODULUS[3], b);
    // borrow is all-ones when l < p
    let keep = b;
    [
        (l[0] & keep) | (d0 & !keep),
        (l[1] & keep) | (d1 & !keep),
        (l[2] & keep) | (d2 & !keep),
        (l[3] & keep) | (d3 & !keep),
    ]
}

const fn lt_modulus(l: &[u64; 4]) -> bool {
    let mut i = 4;
    while i > 0 {
        i -= 1;
        if l[i] < MODULUS[i] {
            return true;
        }
        if l[i] > MODULUS[i] {
            return false;
        }
    }
    false
}

const fn montgomery_reduce(t: [u64; 8]) -> [u64; 4] {
    let k = t[0].wrapping_mul(INV);
    let (_, carry) = mac(t[0], k, MODULUS[0], 0);
    let (r1, carry) = mac(t[1], k, MODULUS[1], carry);
    let (r2, carry) = mac(t[2], k, MODULUS[2], carry);
    let (r3, carry) = mac(t[3], k, MODULUS[3], carry);
    let (r4, carry2) = adc(t[4], 0, carry);

    let k = r1.wrapping_mul(INV);
    let (_, carry) = mac(r1, k, MODULUS[0], 0);
    let (r2, carry) = mac(r2, k, MODULUS[1], carry);
    let (r3, carry) = mac(r3, k, MODULUS[2], carry);
    let (r4, carry) = mac(r4, k, MODULUS[3], carry);
    let (r5, carry2) = adc(t[5], carry2, carry);

    let k = r2.wrapping_mul(INV);
    let (_, carry) = mac(r2, k, MODULUS[0], 0);
    let (r3, carry) = mac(r3, k, MODULUS[1], carry);
    let (r4, carry) = mac(r4, k, MODULUS[2], carry);
    let (r5, carry) = mac(r5, k, MODULUS[3], carry);
    let (r6, carry2) = adc(t[6], carry2, carry);

    let k = r3.wrapping_mul(INV);
    let (_, carry) = mac(r3, k, MODULUS[0], 0);
    let (r4, carry) = mac(r4, k, MODULUS[1], carry);
    let (r5, carry) = mac(r5, k, MODULUS[2], carry);
    let (r6, carry) = mac(r6, k, MODULUS[3], carry);
    let (r7, _) = adc(t[7], carry2, carry);

    reduce_once([r4, r5, r6, r7])
}

const fn mont_mul(a: &[u64; 4], b: &[u64; 4]) -> [u64; 4] {
    let (t0, carry) = mac(0, a[0], b[0], 0);
    let (t1, carry) = mac(0, a[0], b[1], carry);
    let (t2, carry) = mac(0, a[0], b[2], carry);
    let (t3, t4) = mac(0, a[0], b[3], carry);

    let (t1, carry) = mac(t1, a[1], b[0], 0);
    let (t2, carry) = mac(t2, a[1], b[1], carry);
    let (t3, carry) = mac(t3, a[1], b[2], carry);
    let (t4, t5) = mac(t4, a[1], b[3], carry);

    let (t2, carry) = mac(t2, a[2], b[0], 0);
    let (t3, carry) = mac(t3, a[2], b[1], carry);
    let (t4, carry) = mac(t4, a[2], b[2], carry);
    let (t5, t6) = mac(t5, a[2], b[3], carry);

    let (t3, carry) = mac(t3, a[3], b[0], 0);
    let (t4, carry) = mac(t4, a[3], b[1], carry);
    let (t5, carry) = mac(t5, a[3], b[2], carry);
    let (t6, t7) = mac(t6, a[3], b[3], carry);

    montgomery_reduce([t0, t1, t2, t3, t4, t5, t6, t7])
}

/// An element of the BLS12-381 scalar field.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fr([u64; 4]);

impl Fr {
    pub const ZERO: Fr = Fr([0; 4]);
    pub const ONE: Fr = Fr(R);

    /// Builds an element from canonical little-endian limbs, or `None` if `>= p`.
    pub const fn from_canonical_limbs(limbs: [u64; 4]) -> Option<Fr> {
        if lt_modulus(&limbs) {
            Some(Fr(mont_mul(&limbs, &R2)))
        } else {
            None
        }
    }

    pub const fn from_u64(v: u64) -> Fr {
        Fr(mont_mul(&[v, 0, 0, 0], &R2))
    }

    pub fn from_i64(v: i64) -> Fr {
        if v < 0 {
            -Fr::from_u64(v.unsigned_abs())
        } else {
            Fr::from_u64(v as u64)
        }
    }

    /// Canonical limbs in `[0, p)`.
    pub const fn to_canonical(&self) -> [u64; 4] {
        montgomery_reduce([self.0[0], self.0[1], self.0[2], self.0[3], 0, 0, 0, 0])
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn to_bytes_le(&self) -> [u8; ELEM_BYTES] {
        let c = self.to_canonical();
        let mut out = [0u8; ELEM_BYTES];
        for (i, limb) in c.iter().enumerate() {
            out[i * 8..(i + 1) * 8].copy_from_slice(&limb.to_le_bytes());
        }
        out
    }

    /// Decodes a canonical 32-byte little-endian integer.
    pub fn from_bytes_le(bytes: &[u8; ELEM_BYTES]) -> Result<Fr, FieldError> {
        Fr::from_canonical_limbs(bytes_to_limbs(bytes)).ok_or(FieldError::NonCanonical)
    }

    /// Reduces 64 uniformly random bytes modulo p (bias below 2^-190).
    pub fn from_uniform_bytes(bytes: &[u8; 64]) -> Fr {
        let lo = reduce_256(bytes_to_limbs(bytes[..32].try_into().unwrap()));
        let hi = reduce_256(bytes_to_limbs(bytes[32..].try_into().unwrap()));
        // lo + hi * 2^256; both already canonical
        let lo = Fr(mont_mul(&lo, &R2));
        let hi = Fr(mont_mul(&hi, &R2));
        lo + hi * Fr(mont_mul(&R, &R2))
    }

    pub fn random<G: RngCore + ?Sized>(rng: &mut G) -> Fr {
        let mut buf = [0u8; 64];
        rng.fill_bytes(&mut buf);
        Fr::from_uniform_bytes(&buf)
    }

    /// A uniformly random nonzero element.
    pub fn random_nonzero<G: RngCore + ?Sized>(rng: &mut G) -> Fr {
        loop {
            let x = Fr::random(rng);
            if !x.is_zero() {
                return x;
            }
        }
    }

    pub fn square(&self) -> Fr {
        *self * *self
    }

    pub fn double(&self) -> Fr {
        *self + *self
    }

    /// `self^exp` for a little-endian exponent.
    pub fn pow(&self, exp: &[u64]) -> Fr {
        let mut acc = Fr::ONE;
        for limb in exp.iter().rev() {
            for bit in (0..64).rev() {
                acc = acc.square();
                if (limb >> bit) & 1 == 1 {
                    acc *= *self;
                }
            }
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inverse(&self) -> Result<Fr, FieldError> {
        if self.is_zero() {
            return Err(FieldError::ZeroInverse { index: 0 });
        }
        let mut exp = MODULUS;
        exp[0] -= 2;
        Ok(self.pow(&exp))
    }

    /// Square root by Tonelli-Shanks, `None` for non-residues.
    pub fn sqrt(&self) -> Option<Fr> {
        if self.is_zero() {
            return Some(Fr::ZERO);
        }
        let mut m = TWO_ADICITY;
        let mut c = Fr::from_u64(GENERATOR).pow(&T);
        let w = self.pow(&T_MINUS_ONE_DIV_TWO);
        let mut x = *self * w;
        let mut b = x * w;
        while b != Fr::ONE {
            let mut k = 0;
            let mut b2k = b;
            while b2k != Fr::ONE {
                b2k = b2k.square();
                k += 1;
                if k == m {
                    return None;
                }
            }
            let mut omega = c;
            for _ in 0..(m - k - 1) {
                omega = omega.square();
            }
            x *= omega;
            c = omega.square();
            b *= c;
            m = k;
        }
        Some(x)
    }

    /// Canonical value when it fits in a `u64`.
    pub fn as_u64(&self) -> Option<u64> {
        let c = self.to_canonical();
        (c[1] == 0 && c[2] == 0 && c[3] == 0).then_some(c[0])
    }
}

fn bytes_to_limbs(bytes: &[u8; 32]) -> [u64; 4] {
    let mut l = [0u64; 4];
    for (i, limb) in l.iter_mut().enumerate() {
        *limb = u64::from_le_bytes(bytes[i * 8..(i + 1) * 8].try_into().unwrap());
    }
    l
}

/// Reduces any 256-bit integer below p (2^256 < 3p).
fn reduce_256(mut l: [u64; 4]) -> [u64; 4] {
    while !lt_modulus(&l) {
        let (d0, b) = sbb(l[0], MODULUS[0], 0);
        let (d1, b) = sbb(l[1], MODULUS[1], b);
        let (d2, b) = sbb(l[2], MODULUS[2], b);
        let (d3, _) = sbb(l[3], MODULUS[3], b);
        l = [d0, d1, d2, d3];
    }
    l
}

impl fmt::Debug for Fr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fr({self})")
    }
}

impl fmt::Display for Fr {
    /// Small values print in decimal, everything else as 0x-prefixed hex.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(v) = self.as_u64() {
            return write!(f, "{v}");
        }
        let c = self.to_canonical();
        write!(f, "0x{:016x}{:016x}{:016x}{:016x}", c[3], c[2], c[1], c[0])
    }
}

impl From<u64> for Fr {
    fn from(v: u64) -> Fr {
        Fr::from_u64(v)
    }
}

impl Add for Fr {
    type Output = Fr;
    #[inline]
    fn add(self, rhs: Fr) -> Fr {
        let (d0, c) = adc(self.0[0], rhs.0[0], 0);
        let (d1, c) = adc(self.0[1], rhs.0[1], c);
        let (d2, c) = adc(self.0[2], rhs.0[2], c);
        let (d3, _) = adc(self.0[3], rhs.0[3], c);
        // 2p < 2^256, so no carry out
        Fr(reduce_once([d0, d1, d2, d3]))
    }
}

impl Sub for Fr {
    type Output = Fr;
    #[inline]
    fn sub(self, rhs: Fr) -> Fr {
        let (d0, b) = sbb(self.0[0], rhs.0[0], 0);
        let (d1, b) = sbb(self.0[1], rhs.0[1], b);
        let (d2, b) = sbb(self.0[2], rhs.0[2], b);
        let (d3, b) = sbb(self.0[3], rhs.0[3], b);
        // add p back on borrow
        let (d0, c) = adc(d0, MODULUS[0] & b, 0);
        let (d1, c) = adc(d1, MODULUS[1] & b, c);
        let (d2, c) = adc(d2, MODULUS[2] & b, c);
        let (d3, _) = adc(d3, MODULUS[3] & b, c);
        Fr([d0, d1, d2, d3])
    }
}

impl Neg for Fr {
    type Output = Fr;
    fn neg(self) -> Fr {
        Fr::ZERO - self
    }
}

impl Mul for Fr {
    type Output = Fr;
    #[inline]
    fn mul(self, rhs: Fr) -> Fr {
        Fr(mont_mul(&self.0, &rhs.0))
    }
}

impl AddAssign for Fr {
    fn add_assign(&mut self, rhs: Fr) {
        *self = *self + rhs;
    }
}

impl SubAssign for Fr {
    fn sub_assign(&mut self, rhs: Fr) {
        *self = *self - rhs;
    }
}

impl MulAssign for Fr {
    fn mul_assign(&mut self, rhs: Fr) {
        *self = *self * rhs;
    }
}

impl Sum for Fr {
    fn sum<I: Iterator<Item = Fr>>(iter: I) -> Fr {
        iter.fold(Fr::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Fr> for Fr {
    fn sum<I: Iterator<Item = &'a Fr>>(iter: I) -> Fr {
        iter.fold(Fr::ZERO, |a, b| a + *b)
    }
}

impl Product for Fr {
    fn product<I: Iterator<Item = Fr>>(iter: I) -> Fr {
        iter.fold(Fr::ONE, |a, b| a * b)
    }
}

/// Inverts every element with Montgomery's trick, one inversion per batch.
///
/// Each batch of `batch_size` elements costs one inversion and
/// `3 * (batch_size - 1)` multiplications. The output does not depend on the
/// batch size.
pub fn batch_inverse(xs: &[Fr], batch_size: usize) -> Result<Vec<Fr>, FieldError> {
    if batch_size < 2 {
        return Err(FieldError::BatchSize(batch_size));
    }
    if let Some(index) = xs.iter().position(Fr::is_zero) {
        return Err(FieldError::ZeroInverse { index });
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut prefix = Vec::with_capacity(batch_size);
    for chunk in xs.chunks(batch_size) {
        prefix.clear();
        let mut acc = Fr::ONE;
        for x in chunk {
            prefix.push(acc);
            acc *= *x;
        }
        // nonzero inputs checked above
        let mut inv = acc.inverse().expect("product of nonzero elements");
        let start = out.len();
        out.resize(start + chunk.len(), Fr::ZERO);
        for (i, x) in chunk.iter().enumerate().rev() {
            out[start + i] = inv * prefix[i];
            inv *= *x;
        }
    }
    Ok(out)
}

/// `batch_inverse` with the whole input as one batch.
pub fn batch_inverse_all(xs: &[Fr]) -> Result<Vec<Fr>, FieldError> {
    batch_inverse(xs, xs.len().max(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn add_identities() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let x = Fr::random(&mut rng);
        assert_eq!(Fr::ZERO + x, x);
        let p_minus_one = -Fr::ONE;
        assert_eq!(p_minus_one + Fr::ONE, Fr::ZERO);
        assert_eq!(Fr::from(3) + Fr::from(5), Fr::from(8));
    }

    #[test]
    fn mul_identities() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let x = Fr::random(&mut rng);
        assert_eq!(Fr::ONE * x, x);
        assert_eq!(Fr::ZERO * x, Fr::ZERO);
    }

    #[test]
    fn inverse_edge_cases() {
        assert_eq!(Fr::ONE.inverse().unwrap(), Fr::ONE);
        assert_eq!((-Fr::ONE).inverse().unwrap(), -Fr::ONE);
        assert_eq!(
            Fr::ZERO.inverse(),
            Err(FieldError::ZeroInverse { index: 0 })
        );
    }

    #[test]
    fn batch_inverse_small_cases() {
        let ones = vec![Fr::ONE; 3];
        assert_eq!(batch_inverse(&ones, 2).unwrap(), ones);
        let a = Fr::from(12345);
        assert_eq!(batch_inverse(&[a], 2).unwrap(), vec![a.inverse().unwrap()]);
        assert_eq!(batch_inverse(&[a], 1), Err(FieldError::BatchSize(1)));
        let err = batch_inverse(&[a, a, Fr::ZERO, a], 2).unwrap_err();
        assert_eq!(err, FieldError::ZeroInverse { index: 2 });
    }

    #[test]
    fn byte_encoding_rejects_modulus() {
        let mut bytes = [0u8; 32];
        for (i, limb) in MODULUS.iter().enumerate() {
            bytes[i * 8..(i + 1) * 8].copy_from_slice(&limb.to_le_bytes());
        }
        assert_eq!(Fr::from_bytes_le(&bytes), Err(FieldError::NonCanonical));
        let x = Fr::from(77);
        assert_eq!(Fr::from_bytes_le(&x.to_bytes_le()).unwrap(), x);
    }

    #[test]
    fn sqrt_of_squares() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = Fr::random(&mut rng);
            let s = x.square().sqrt().unwrap();
            assert!(s == x || s == -x);
        }
        // 7 generates the group, so it is a non-residue
        assert!(Fr::from(7).sqrt().is_none());
    }

    #[test]
    fn display_small_and_large() {
        assert_eq!(Fr::from(42).to_string(), "42");
        assert!((-Fr::ONE).to_string().starts_with("0x73eda753"));
    }
}
