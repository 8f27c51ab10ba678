//! Number formatting for reports.

/// `x` rounded to `digits` significant digits, without trailing zeros.
/// Very large or very small magnitudes use exponent notation.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        let s = format!("{:.*e}", digits - 1, x);
        let (mant, e) = s.split_once('e').expect("exponent form");
        return format!("{}e{}", trim(mant), e);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = trim(&format!("{x:.decimals$}")).to_string();
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
