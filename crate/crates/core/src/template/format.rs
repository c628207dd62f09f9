//! Deterministic number formatting for captions.
//!
//! * magnitudes: at most two decimals, trailing zeros trimmed, thousands
//!   separators from 1,000 up; values below 1 keep three significant digits
//! * percentages: one decimal
//! * derived ratios (correlation, slope): three significant digits

/// Formats a measured magnitude.
pub fn magnitude(x: f64) -> String {
    if x != 0.0 && x.abs() < 1.0 {
        return significant(x, 3);
    }
    group_thousands(&trim(&format!("{:.2}", x)))
}

/// `0.6667` → `66.7%`.
pub fn percent(ratio: f64) -> String {
    format!("{}%", group_thousands(&fixed1(ratio * 100.0)))
}

/// Percent with an explicit sign for non-zero changes: `+20.0%`, `-5.0%`, `0.0%`.
pub fn signed_percent(ratio: f64) -> String {
    let body = fixed1(ratio * 100.0);
    if body == "0.0" || body.starts_with('-') {
        format!("{}%", group_thousands(&body))
    } else {
        format!("+{}%", group_thousands(&body))
    }
}

/// Three significant digits.
pub fn ratio(x: f64) -> String {
    if x.abs() >= 1000.0 {
        let magnitude = x.abs().log10().floor() as i32;
        let scale = 10f64.powi(magnitude - 2);
        return group_thousands(&trim(&format!("{:.0}", (x / scale).round() * scale)));
    }
    significant(x, 3)
}

fn significant(x: f64, digits: i32) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits - 1 - magnitude).max(0) as usize;
    let s = trim(&format!("{:.*}", decimals, x));
    // Rounding can carry into a new digit (0.9996 → 1.000); re-trim handles it.
    if s == "-0" { "0".to_owned() } else { s }
}

fn fixed1(x: f64) -> String {
    let s = format!("{:.1}", x);
    if s == "-0.0" { "0.0".to_owned() } else { s }
}

fn trim(s: &str) -> String {
    let t = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { s };
    if t == "-0" { "0".to_owned() } else { t.to_owned() }
}

fn group_thousands(s: &str) -> String {
    let (sign, rest) = s.strip_prefix('-').map_or(("", s), |r| ("-", r));
    let (int, frac) = rest.split_once('.').map_or((rest, None), |(i, f)| (i, Some(f)));
    if int.len() <= 3 {
        return s.to_owned();
    }
    let mut grouped = String::with_capacity(int.len() + int.len() / 3);
    for (i, c) in int.chars().enumerate() {
        if i > 0 && (int.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(c);
    }
    match frac {
        Some(f) => format!("{sign}{grouped}.{f}"),
        None => format!("{sign}{grouped}"),
    }
}
