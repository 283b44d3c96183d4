//! Flat run configuration: a JSON document whose keys mirror the CLI flags.
//! Flags override file values; the resolved form makes every default
//! explicit and round-trips through `--print-config` unchanged.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qwalk::sweep::GridSpec;
use qwalk::CoinState;

use crate::table::fmt_f64;

/// Every tunable of every subcommand, all optional. Unknown keys are
/// rejected at parse time.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", default)]
pub struct ConfigDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tp_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tp_stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tp_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tp_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param_column: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

impl ConfigDoc {
    pub fn from_path(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Field-by-field override: values present in `flags` win.
    pub fn merged_under(self, flags: ConfigDoc) -> ConfigDoc {
        macro_rules! pick {
            ($($field:ident),* $(,)?) => {
                ConfigDoc { $($field: flags.$field.or(self.$field)),* }
            };
        }
        pick!(
            command,
            delta,
            q,
            n,
            coin,
            shots,
            seed,
            grid,
            delta_start,
            delta_stop,
            delta_count,
            delta_step,
            theta_start,
            theta_stop,
            theta_count,
            theta_step,
            t,
            tp,
            tp_start,
            tp_stop,
            tp_count,
            tp_step,
            tau,
            chi,
            cells,
            input,
            column,
            param_column,
            threshold_factor,
            output,
            format,
        )
    }

    pub fn to_pretty_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain config json");
        s.push('\n');
        s
    }
}

/// Angles accept plain radians or the literal sugar `pi`, `pi/2`, `3pi/4`,
/// `2pi`, with an optional leading sign.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s = text.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s.strip_prefix('+').unwrap_or(s)),
    };
    if let Some(idx) = body.find("pi") {
        let (coef_str, rest) = body.split_at(idx);
        let rest = &rest[2..];
        let coef = if coef_str.is_empty() {
            1.0
        } else {
            coef_str
                .trim_end_matches('*')
                .parse::<f64>()
                .map_err(|_| format!("cannot parse angle '{text}'"))?
        };
        let denom = if rest.is_empty() {
            1.0
        } else if let Some(d) = rest.strip_prefix('/') {
            let d: f64 = d
                .parse()
                .map_err(|_| format!("cannot parse angle '{text}'"))?;
            if d == 0.0 {
                return Err(format!("zero denominator in angle '{text}'"));
            }
            d
        } else {
            return Err(format!("cannot parse angle '{text}'"));
        };
        return Ok(sign * coef * PI / denom);
    }
    Err(format!("cannot parse angle '{text}'"))
}

fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty complex component".into());
    }
    if let Ok(v) = s.parse::<f64>() {
        return Ok(Complex64::new(v, 0.0));
    }
    if let Some(imag) = s.strip_suffix('i') {
        // forms: "i", "-i", "0.5i", "1+0.5i", "1-0.5i"
        let imag = imag.trim_end_matches('*');
        // split a trailing signed imaginary part off an optional real part
        let mut split = None;
        for (idx, c) in imag.char_indices().skip(1) {
            if (c == '+' || c == '-') && !matches!(imag.as_bytes()[idx - 1], b'e' | b'E') {
                split = Some(idx);
            }
        }
        let (re_str, im_str) = match split {
            Some(idx) => (&imag[..idx], &imag[idx..]),
            None => ("", imag),
        };
        let re = if re_str.is_empty() {
            0.0
        } else {
            re_str
                .parse::<f64>()
                .map_err(|_| format!("cannot parse complex '{text}'"))?
        };
        let im = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other
                .parse::<f64>()
                .map_err(|_| format!("cannot parse complex '{text}'"))?,
        };
        return Ok(Complex64::new(re, im));
    }
    Err(format!("cannot parse complex '{text}'"))
}

/// Spinors are written `alpha,beta` with complex literals like `1`, `0.5i`,
/// `1-0.5i`; the pair is normalized.
pub fn parse_spinor(text: &str) -> Result<CoinState, String> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| format!("spinor '{text}' must be 'alpha,beta'"))?;
    let alpha = parse_complex(a)?;
    let beta = parse_complex(b)?;
    // keep already-normalized amplitudes bit-exact; normalize otherwise
    CoinState::new(alpha, beta)
        .or_else(|_| CoinState::normalized(alpha, beta))
        .map_err(|e| format!("spinor '{text}' not usable: {e}"))
}

/// Canonical full-precision spinor string; re-parses to identical amplitudes.
pub fn spinor_string(coin: &CoinState) -> String {
    let c = |z: Complex64| format!("{}{}{}i", fmt_f64(z.re), if z.im < 0.0 { "" } else { "+" }, fmt_f64(z.im));
    format!("{},{}", c(coin.alpha()), c(coin.beta()))
}

pub fn validate_delta(delta: f64) -> Result<f64, String> {
    if !(0.0..=2.0 * PI + 1e-12).contains(&delta) {
        return Err(format!("delta must lie in [0, {:.4}]", 2.0 * PI));
    }
    Ok(delta)
}

/// Grid resolution: explicit count wins; otherwise a step is converted to a
/// count; otherwise the default applies.
pub fn resolve_grid(
    name: &str,
    start: f64,
    stop: f64,
    count: Option<usize>,
    step: Option<f64>,
    default_count: usize,
) -> Result<GridSpec, String> {
    let count = match (count, step) {
        (Some(c), _) => c,
        (None, Some(h)) => {
            if !(h.is_finite() && h > 0.0) {
                return Err(format!("{name}-step must be positive, got {h}"));
            }
            ((stop - start) / h).round() as usize + 1
        }
        (None, None) => default_count,
    };
    GridSpec::new(start, stop, count).map_err(|e| format!("{name} grid: {e}"))
}
