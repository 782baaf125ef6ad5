//! Text formatting for reals in emitted files.
//!
//! Every real is written with at least nine significant digits and with
//! enough digits to parse back to the identical `f64`.

const MIN_SIGNIFICANT: usize = 9;

/// Formats `value` with at least nine significant digits, losslessly.
pub fn format_real(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    if value == 0.0 {
        let s = format!("{:.*}", MIN_SIGNIFICANT - 1, 0.0);
        return if value.is_sign_negative() { format!("-{s}") } else { s };
    }
    // Shortest round-trip form in scientific notation: "d.ddde<exp>".
    let shortest = format!("{value:e}");
    let (mantissa, exp) = shortest.split_once('e').expect("`{:e}` always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let digits = mantissa.chars().filter(char::is_ascii_digit).count();
    let significant = digits.max(MIN_SIGNIFICANT);

    if (-5..=15).contains(&exp) {
        let decimals = (significant as i32 - 1 - exp).max(0) as usize;
        format!("{value:.decimals$}")
    } else {
        format!("{:.*e}", significant - 1, value)
    }
}

/// Counts significant digits in a decimal or scientific literal.
#[cfg(test)]
fn significant_digits(text: &str) -> usize {
    let mantissa = text.split(['e', 'E']).next().unwrap();
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    digits.trim_start_matches('0').len().max(1)
}
