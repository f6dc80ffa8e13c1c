//! Dimensionless rotor parameters and the sign schedule of the modified kick
//! sequence.
//!
//! Everything is expressed through the two dimensionless combinations
//! `k` (kick strength) and `tau` (effective Planck constant); the classical
//! stochasticity parameter `kappa = k * tau` is always derived, never stored.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::real::{rf, Real};

/// Sign of a single kick.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn factor<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }

    #[inline]
    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// The modulation function f_M(n): +1 for the first M kicks, then -1 for the
/// next M, and so on (period 2M, kicks counted from 0).
#[inline]
pub fn modulation_sign(m_period: u32, kick_index: u64) -> Sign {
    let m = u64::from(m_period.max(1));
    if kick_index % (2 * m) < m {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Which realization of the kicked rotor to propagate.
///
/// The three modified variants are physically equivalent (they share all
/// momentum distributions, and their state vectors coincide at even multiples
/// of M kicks); they differ only in how the periodic sign reversal of the
/// kick potential is implemented.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Plain kicked rotor: constant kick sign.
    PlainKr,
    /// Kick sign follows f_M(n) directly.
    MkrSignFlip,
    /// Constant kick sign; the parity operator D ((-1)^m) is applied after
    /// every M-th kick cycle.
    MkrDOperator,
    /// Constant kick sign; an extra free evolution over the delay time
    /// t_d = 2*pi*T/tau (phase exp(i*pi*m^2)) follows every M-th kick cycle.
    MkrTimeDelay,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::PlainKr => "plain_kr",
            Variant::MkrSignFlip => "mkr_sign_flip",
            Variant::MkrDOperator => "mkr_d_operator",
            Variant::MkrTimeDelay => "mkr_time_delay",
        }
    }

    pub fn is_modified(self) -> bool {
        !matches!(self, Variant::PlainKr)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "plain_kr" | "kr" | "plain" => Ok(Variant::PlainKr),
            "mkr_sign_flip" | "mkr" | "sign_flip" => Ok(Variant::MkrSignFlip),
            "mkr_d_operator" | "d_operator" => Ok(Variant::MkrDOperator),
            "mkr_time_delay" | "time_delay" => Ok(Variant::MkrTimeDelay),
            other => Err(Error::Parse(format!("unknown variant '{other}'"))),
        }
    }
}

/// Dimensionless kicked-rotor parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotorParams<T> {
    /// Kick strength k = lambda*T/hbar. Must be >= 0.
    pub k: T,
    /// Effective Planck constant tau = hbar*T/I. Must be > 0.
    pub tau: T,
    /// Sign-flip period in kicks (>= 1). Ignored by `Variant::PlainKr`.
    pub m_period: u32,
    /// Realization of the kick sequence.
    pub variant: Variant,
}

impl<T: Real> RotorParams<T> {
    pub fn new(k: T, tau: T, m_period: u32, variant: Variant) -> Result<Self> {
        RotorParams { k, tau, m_period, variant }.validate()
    }

    /// Plain kicked rotor (constant kick sign).
    pub fn plain(k: T, tau: T) -> Result<Self> {
        Self::new(k, tau, 1, Variant::PlainKr)
    }

    /// Sign-flip modified rotor with period `m_period`.
    pub fn modified(k: T, tau: T, m_period: u32) -> Result<Self> {
        Self::new(k, tau, m_period, Variant::MkrSignFlip)
    }

    /// Classical-map entry point: the classical dynamics depends only on
    /// kappa, so this fixes k = kappa and tau = 1.
    pub fn from_kappa(kappa: T) -> Result<Self> {
        Self::new(kappa, T::one(), 1, Variant::PlainKr)
    }

    /// Validates the parameter set, returning it unchanged on success.
    /// Idempotent: a validated set re-validates to itself.
    pub fn validate(self) -> Result<Self> {
        if !self.k.is_finite() || self.k < T::zero() {
            return Err(Error::InvalidParams(format!(
                "k must be finite and >= 0, got {}",
                self.k
            )));
        }
        if !self.tau.is_finite() || self.tau <= T::zero() {
            return Err(Error::InvalidParams(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.m_period < 1 {
            return Err(Error::InvalidParams("M must be >= 1".into()));
        }
        Ok(self)
    }

    /// Classical stochasticity parameter kappa = k * tau (always recomputed).
    #[inline]
    pub fn kappa(&self) -> T {
        self.k * self.tau
    }

    /// Sign of kick number `n` (counted from 0) for this variant.
    #[inline]
    pub fn kick_sign(&self, kick_index: u64) -> Sign {
        match self.variant {
            Variant::MkrSignFlip => modulation_sign(self.m_period, kick_index),
            _ => Sign::Plus,
        }
    }

    /// Whether the parity/delay factor is due after kick `n` has completed
    /// (variants that keep the kick sign constant and act every M-th cycle).
    #[inline]
    pub fn phase_operator_due(&self, kick_index: u64) -> bool {
        matches!(self.variant, Variant::MkrDOperator | Variant::MkrTimeDelay)
            && (kick_index + 1) % u64::from(self.m_period) == 0
    }

    /// Flat `key=value` text block, one entry per line. `kappa` is emitted
    /// for convenience but is never an independent input.
    pub fn to_kv_block(&self) -> String {
        format!(
            "k={}\ntau={}\nM={}\nvariant={}\nkappa={}\n",
            fmt_scalar(self.k),
            fmt_scalar(self.tau),
            self.m_period,
            self.variant,
            fmt_scalar(self.kappa()),
        )
    }

    /// Parses a `key=value` block produced by [`to_kv_block`]. Unknown keys
    /// are ignored; a `kappa` entry is checked against k*tau.
    pub fn from_kv_block(text: &str) -> Result<Self> {
        let entries = text.lines().filter_map(|line| {
            let line = line.trim().trim_start_matches('#').trim();
            if line.is_empty() {
                return None;
            }
            line.split_once('=')
                .map(|(key, value)| (key.trim(), value.trim()))
        });
        Self::from_kv_entries(entries)
    }

    /// Builds parameters from `(key, value)` pairs (used for both the flat
    /// text block and CSV metadata headers).
    pub fn from_kv_entries<'a>(
        entries: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self> {
        let mut k = None;
        let mut tau = None;
        let mut m_period = 1u32;
        let mut variant = Variant::PlainKr;
        let mut kappa_in: Option<T> = None;
        for (key, value) in entries {
            match key {
                "k" => k = Some(parse_scalar(value)?),
                "tau" => tau = Some(parse_scalar(value)?),
                "M" | "m" | "m_period" => {
                    m_period = value
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad M value '{value}'")))?
                }
                "variant" => variant = value.parse()?,
                "kappa" => kappa_in = Some(parse_scalar(value)?),
                _ => {}
            }
        }
        let k = k.ok_or_else(|| Error::Parse("missing key 'k'".into()))?;
        let tau = tau.ok_or_else(|| Error::Parse("missing key 'tau'".into()))?;
        let params = Self::new(k, tau, m_period, variant)?;
        if let Some(kappa) = kappa_in {
            if kappa != params.kappa() {
                return Err(Error::Parse(format!(
                    "inconsistent kappa: got {}, expected k*tau = {}",
                    fmt_scalar(kappa),
                    fmt_scalar(params.kappa())
                )));
            }
        }
        Ok(params)
    }

    /// JSON object with keys `{k, tau, M, variant}` plus the derived,
    /// read-only `kappa`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "k": self.k.to_f64(),
            "tau": self.tau.to_f64(),
            "M": self.m_period,
            "variant": self.variant.as_str(),
            "kappa": self.kappa().to_f64(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("params must be a JSON object".into()))?;
        let field = |name: &str| -> Result<f64> {
            obj.get(name)
                .and_then(|v| v.as_f64())
                .ok_or_else(|| Error::Parse(format!("missing or non-numeric '{name}'")))
        };
        let k = rf::<T>(field("k")?);
        let tau = rf::<T>(field("tau")?);
        let m_period = obj
            .get("M")
            .and_then(|v| v.as_u64())
            .unwrap_or(1)
            .try_into()
            .map_err(|_| Error::Parse("M out of range".into()))?;
        let variant = match obj.get("variant") {
            Some(v) => v
                .as_str()
                .ok_or_else(|| Error::Parse("variant must be a string".into()))?
                .parse()?,
            None => Variant::PlainKr,
        };
        let params = Self::new(k, tau, m_period, variant)?;
        if let Some(kappa) = obj.get("kappa").and_then(|v| v.as_f64()) {
            if rf::<T>(kappa) != params.kappa() {
                return Err(Error::Parse(
                    "inconsistent kappa: must equal k*tau (or be omitted)".into(),
                ));
            }
        }
        Ok(params)
    }
}

/// Shortest round-trip decimal formatting (via f64).
pub(crate) fn fmt_scalar<T: Real>(x: T) -> String {
    format!("{}", x.to_f64().unwrap_or(f64::NAN))
}

pub(crate) fn parse_scalar<T: Real>(s: &str) -> Result<T> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad numeric value '{s}'")))?;
    T::from_f64(v).ok_or_else(|| Error::Parse(format!("value out of range '{s}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validate_accepts_reference_case() {
        let p = RotorParams::modified(4.0, 2.0, 50).unwrap();
        assert_eq!(p.kappa(), 8.0);
    }

    #[test]
    fn validate_accepts_kick_free_limit() {
        let p = RotorParams::new(0.0, 1.0, 1, Variant::PlainKr).unwrap();
        assert_eq!(p.kappa(), 0.0);
    }

    #[test]
    fn validate_rejects_negative_tau() {
        let err = RotorParams::new(5.0, -1.0, 2, Variant::MkrSignFlip).unwrap_err();
        assert!(err.to_string().contains("tau must be positive"));
    }

    #[test]
    fn validate_rejects_negative_k_and_zero_m() {
        assert!(RotorParams::new(-1.0, 1.0, 1, Variant::PlainKr).is_err());
        assert!(RotorParams::new(1.0, 1.0, 0, Variant::MkrSignFlip).is_err());
    }

    #[test]
    fn modulation_has_period_two_m() {
        // M = 3: + + + - - - + + + ...
        let signs: Vec<Sign> = (0..8).map(|n| modulation_sign(3, n)).collect();
        assert_eq!(
            signs,
            [
                Sign::Plus,
                Sign::Plus,
                Sign::Plus,
                Sign::Minus,
                Sign::Minus,
                Sign::Minus,
                Sign::Plus,
                Sign::Plus
            ]
        );
    }

    #[test]
    fn phase_operator_fires_every_m_kicks() {
        let p = RotorParams::new(4.0, 2.0, 3, Variant::MkrDOperator).unwrap();
        let due: Vec<bool> = (0..7).map(|n| p.phase_operator_due(n)).collect();
        assert_eq!(due, [false, false, true, false, false, true, false]);
        let kr = RotorParams::plain(4.0, 2.0).unwrap();
        assert!((0..10).all(|n| !kr.phase_operator_due(n)));
    }

    #[test]
    fn kv_block_round_trips() {
        let p = RotorParams::new(4.0, 2.0, 50, Variant::MkrSignFlip).unwrap();
        let q = RotorParams::<f64>::from_kv_block(&p.to_kv_block()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn kv_block_rejects_inconsistent_kappa() {
        let text = "k=4.0\ntau=2.0\nM=50\nvariant=mkr_sign_flip\nkappa=7.5\n";
        assert!(RotorParams::<f64>::from_kv_block(text).is_err());
    }

    #[test]
    fn json_round_trips() {
        let p = RotorParams::new(5.7, 1.0, 2, Variant::MkrTimeDelay).unwrap();
        let q = RotorParams::<f64>::from_json(&p.to_json()).unwrap();
        assert_eq!(p, q);
    }

    proptest! {
        #[test]
        fn serialization_preserves_fields_bit_exactly(
            k in 0.0f64..1e6,
            tau in 1e-6f64..1e6,
            m in 1u32..10_000,
        ) {
            let p = RotorParams::new(k, tau, m, Variant::MkrSignFlip).unwrap();
            let via_kv = RotorParams::<f64>::from_kv_block(&p.to_kv_block()).unwrap();
            prop_assert_eq!(p.k.to_bits(), via_kv.k.to_bits());
            prop_assert_eq!(p.tau.to_bits(), via_kv.tau.to_bits());
            prop_assert_eq!(p.m_period, via_kv.m_period);
            let via_json = RotorParams::<f64>::from_json(&p.to_json()).unwrap();
            prop_assert_eq!(p.k.to_bits(), via_json.k.to_bits());
            prop_assert_eq!(p.tau.to_bits(), via_json.tau.to_bits());
        }

        #[test]
        fn validate_is_idempotent(k in 0.0f64..1e3, tau in 1e-3f64..1e3) {
            let p = RotorParams::new(k, tau, 7, Variant::MkrSignFlip).unwrap();
            prop_assert_eq!(p.validate().unwrap(), p);
        }
    }
}
