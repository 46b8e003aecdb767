//! Exact rationals on disk as `{"num": int, "den": int}`.

use num_rational::Ratio;
use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct Repr<T> {
    num: T,
    den: T,
}

pub fn serialize<T, S>(r: &Ratio<T>, s: S) -> Result<S::Ok, S::Error>
where
    T: Clone + Serialize,
    S: Serializer,
{
    Repr { num: r.numer().clone(), den: r.denom().clone() }.serialize(s)
}

pub fn deserialize<'de, T, D>(d: D) -> Result<Ratio<T>, D::Error>
where
    T: Clone + num_integer::Integer + Deserialize<'de>,
    D: Deserializer<'de>,
{
    let r = Repr::<T>::deserialize(d)?;
    if r.den.is_zero() {
        return Err(serde::de::Error::custom("zero denominator"));
    }
    Ok(Ratio::new(r.num, r.den))
}

/// Same encoding for optional rationals, `null` when absent.
pub mod option {
    use super::*;

    pub fn serialize<T, S>(r: &Option<Ratio<T>>, s: S) -> Result<S::Ok, S::Error>
    where
        T: Clone + Serialize,
        S: Serializer,
    {
        r.as_ref().map(|r| Repr { num: r.numer().clone(), den: r.denom().clone() }).serialize(s)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Option<Ratio<T>>, D::Error>
    where
        T: Clone + num_integer::Integer + Deserialize<'de>,
        D: Deserializer<'de>,
    {
        match Option::<Repr<T>>::deserialize(d)? {
            None => Ok(None),
            Some(r) if r.den.is_zero() => Err(serde::de::Error::custom("zero denominator")),
            Some(r) => Ok(Some(Ratio::new(r.num, r.den))),
        }
    }
}

/// `max(a/b, b/a)` for positive integers.
pub fn symmetric_ratio(a: u64, b: u64) -> Ratio<u64> {
    if a == 0 || b == 0 {
        return Ratio::one();
    }
    let r = Ratio::new(a, b);
    if r >= Ratio::one() {
        r
    } else {
        r.recip()
    }
}
