use padic_bessel::padic_core::SeriesValue;

/// `printf("%.17g")`: 17 significant digits, trailing zeros dropped,
/// exponent form outside `1e-4 ≤ |x| < 1e17`.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let fixed = format!("{x:.*}", (16 - exp) as usize);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub struct CsvRow {
    pub p: u32,
    pub gamma: i32,
    pub value: SeriesValue,
    pub t: Option<f64>,
    pub m: Option<f64>,
}

impl CsvRow {
    /// `gamma,norm,value,tail_bound,terms_used`.
    pub fn base_csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.gamma,
            g17((self.p as f64).powi(self.gamma)),
            g17(self.value.value),
            g17(self.value.tail_bound),
            self.value.terms_used
        )
    }

    pub fn to_csv(&self) -> String {
        let mut line = self.base_csv();
        for extra in [self.t, self.m].into_iter().flatten() {
            line.push(',');
            line.push_str(&g17(extra));
        }
        line
    }
}
