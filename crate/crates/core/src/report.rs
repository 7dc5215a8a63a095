//! Stable decimal rendering of reals for reports.

/// Render `x` with 12 significant digits, `%.12g` style: fixed notation for
/// decimal exponents in `-4..12`, scientific otherwise, trailing zeros dropped.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // the exponent after rounding to 12 digits decides the notation
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(-4.0), "-4");
        assert_eq!(sig12(0.125), "0.125");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(0.809016994374947), "0.809016994375");
        assert_eq!(sig12(123456789012.0), "123456789012");
        assert_eq!(sig12(1234567890123.0), "1.23456789012e+12");
        assert_eq!(sig12(1e-5), "1e-05");
        assert_eq!(sig12(1.5e-4), "0.00015");
        assert_eq!(sig12(2.5e-13), "2.5e-13");
        assert_eq!(sig12(999999999999.9), "1e+12");
        assert_eq!(sig12(f64::NAN), "NaN");
    }

    proptest! {
        #[test]
        fn round_trips_to_twelve_digits(x in -1e9f64..1e9) {
            let back: f64 = sig12(x).parse().unwrap();
            prop_assert!((back - x).abs() <= 1e-11 * x.abs().max(1e-300));
        }
    }
}
