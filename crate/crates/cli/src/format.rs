//! Number formatting shared by all commands.

/// `x` with 17 significant digits in the style of C's `%.17g`: fixed
/// notation for decimal exponents in `-5..17`, scientific otherwise, with
/// trailing zeros removed.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), sign, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// JSON value for a possibly infinite log probability.
pub fn json_log(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::Value::from(x)
    } else {
        serde_json::Value::Null
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_examples() {
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(0.0), "0");
        assert_eq!(g17(0.45), "0.45000000000000001");
        assert_eq!(g17(0.25), "0.25");
        assert_eq!(g17(1e-300), "1e-300");
        assert_eq!(g17(1.0 / 3.0 * 1e-20), "3.3333333333333329e-21");
        assert_eq!(g17(2.5e-7), "2.4999999999999999e-07");
        assert_eq!(g17(123456.0), "123456");
        assert_eq!(g17(-0.5), "-0.5");
        assert_eq!(g17(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn g17_round_trips() {
        for x in [0.1, 1.0 / 3.0, 7.536948692733e-9, 0.999999999999, 1e-320, 5e-324, f64::MAX] {
            assert_eq!(g17(x).parse::<f64>().unwrap(), x, "{}", g17(x));
        }
    }
}
