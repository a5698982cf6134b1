//! Exact rational arithmetic helpers and the `"p/q"` wire format.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;

/// The engine-wide capital/measure scalar. All game logic is exact.
pub type Q = BigRational;

/// Integer-valued rational.
pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `p/q` from machine integers.
pub fn q(p: i64, den: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(den))
}

/// `2^-k` for `k >= 0`.
pub fn q_pow2_neg(k: usize) -> Q {
    Q::new(BigInt::one(), BigInt::one() << k)
}

/// `2^k` for `k >= 0`.
pub fn q_pow2(k: usize) -> Q {
    Q::from_integer(BigInt::one() << k)
}

pub fn q_zero() -> Q {
    Q::zero()
}

pub fn q_one() -> Q {
    Q::one()
}

/// Renders a rational as `p/q` with the denominator always present
/// (`"3/4"`, `"1/1"`, `"-2/5"`). This is the only machine format the
/// engine emits.
pub fn fmt_frac(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_frac(s: &str) -> Result<Q, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let num = BigInt::from_str(p.trim()).map_err(|e| format!("bad numerator {p:?}: {e}"))?;
        let den = BigInt::from_str(q.trim()).map_err(|e| format!("bad denominator {q:?}: {e}"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        Ok(Q::new(num, den))
    } else {
        let num = BigInt::from_str(s).map_err(|e| format!("bad rational {s:?}: {e}"))?;
        Ok(Q::from_integer(num))
    }
}

/// Serde adapter: rationals as `"p/q"` strings.
pub mod frac_serde {
    use super::*;
    use serde::{de::Error as DeError, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&fmt_frac(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Q, D::Error> {
        let s = String::deserialize(de)?;
        parse_frac(&s).map_err(D::Error::custom)
    }
}

/// Serde adapter for `Vec<Q>`.
pub mod frac_vec_serde {
    use super::*;
    use serde::{de::Error as DeError, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Q], ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(xs.iter().map(fmt_frac))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Q>, D::Error> {
        let raw = Vec::<String>::deserialize(de)?;
        raw.iter()
            .map(|s| parse_frac(s).map_err(D::Error::custom))
            .collect()
    }
}

/// Serde adapter for `Option<Q>`.
pub mod frac_opt_serde {
    use super::*;
    use serde::{de::Error as DeError, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Q>, ser: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => ser.serialize_some(&fmt_frac(v)),
            None => ser.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Q>, D::Error> {
        let raw = Option::<String>::deserialize(de)?;
        raw.map(|s| parse_frac(&s).map_err(D::Error::custom))
            .transpose()
    }
}

/// True iff `x` is a nonnegative value.
pub fn is_nonneg(x: &Q) -> bool {
    !x.is_negative()
}
