//! CSV and number formatting helpers.

/// Formats like C's %.12g: 12 significant digits, fixed or scientific
/// notation depending on magnitude, trailing zeros trimmed.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // Round to 12 significant digits first so the notation choice matches
    // the rounded value.
    let s = format!("{:.11e}", x);
    let (mantissa, exp) = s.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= 12 {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{exp:+03}")
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.into();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// RFC-4180-style CSV writer: comma separators, \r\n line endings, quoting
/// only when needed (none of the toolkit's fields require it).
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut csv = Csv {
            buf: String::new(),
            columns: header.len(),
        };
        csv.push_row(header.iter().map(|s| s.to_string()).collect());
        csv
    }

    pub fn row(&mut self, fields: Vec<String>) {
        assert_eq!(fields.len(), self.columns, "ragged CSV row");
        self.push_row(fields);
    }

    fn push_row(&mut self, fields: Vec<String>) {
        let quoted: Vec<String> = fields
            .into_iter()
            .map(|f| {
                if f.contains(',') || f.contains('"') || f.contains('\n') {
                    format!("\"{}\"", f.replace('"', "\"\""))
                } else {
                    f
                }
            })
            .collect();
        self.buf.push_str(&quoted.join(","));
        self.buf.push_str("\r\n");
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
