//! Deterministic number formatting for output files: 12 significant digits,
//! `.` decimal separator, no locale dependence, so identical runs produce
//! byte-identical files.

/// Format with 12 significant digits, trimming trailing zeros.
pub fn fmt_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let s = format!("{:.11e}", x);
        // normalize "1.20000000000e-5" -> "1.2e-5"
        match s.split_once('e') {
            Some((mant, e)) => format!("{}e{}", trim_zeros(mant.to_string()), e),
            None => s,
        }
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}
