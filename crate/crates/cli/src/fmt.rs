//! Deterministic number formatting for tables: 12 significant digits,
//! trailing zeros trimmed, scientific notation outside a sane range.

const SIG_DIGITS: usize = 12;

/// Format with 12 significant digits (similar to C's `%.12g`).
pub fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= SIG_DIGITS as i32 {
        let s = format!("{:.*e}", SIG_DIGITS - 1, x);
        trim_exp(&s)
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_decimal(&s)
    }
}

fn trim_decimal(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

fn trim_exp(s: &str) -> String {
    // "1.230000000000e5" -> "1.23e5"
    match s.split_once('e') {
        Some((mantissa, exp)) => format!("{}e{}", trim_decimal(mantissa), exp),
        None => s.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representative_values() {
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(1.0), "1");
        assert_eq!(sig(-2.5), "-2.5");
        assert_eq!(sig(15.707963267949), "15.7079632679");
        assert_eq!(sig(1234.5), "1234.5");
        assert_eq!(sig(0.0001), "0.0001");
        assert_eq!(sig(1e13), "1e13");
        assert_eq!(sig(1.25e-7), "1.25e-7");
        // 12 significant digits survive.
        assert_eq!(sig(1.23456789012e0), "1.23456789012");
    }

    #[test]
    fn deterministic() {
        let vals = [std::f64::consts::PI, 1269.42372460893, 2.0 / 3.0];
        for v in vals {
            assert_eq!(sig(v), sig(v));
        }
    }
}
