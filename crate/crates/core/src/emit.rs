//! Byte-stable serialization: 17 significant digits, fixed field order, LF endings.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Result;

/// Formats like C's `%.17g`: enough digits to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };

    if !(-4..17).contains(&exp) {
        let (lead, rest) = digits.split_at(1);
        let rest = rest.trim_end_matches('0');
        let frac = if rest.is_empty() {
            String::new()
        } else {
            format!(".{rest}")
        };
        let esign = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{lead}{frac}e{esign}{:02}", exp.abs());
    }
    if exp >= 0 {
        let split = exp as usize + 1;
        let (int, frac) = digits.split_at(split);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{}", digits.trim_end_matches('0'))
    }
}

/// Pretty JSON whose floats are written with [`fmt_f64`]; non-finite floats become `null`.
struct Json17 {
    inner: PrettyFormatter<'static>,
}

impl Formatter for Json17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(fmt_f64(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        Json17 {
            inner: PrettyFormatter::with_indent(b"  "),
        },
    );
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_artifact(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, contents.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(1.3125), "1.3125");
        assert_eq!(fmt_f64(2.5), "2.5");
        assert_eq!(fmt_f64(0.1), "0.10000000000000001");
        assert_eq!(fmt_f64(-3.0), "-3");
        assert_eq!(fmt_f64(1e-5), "1.0000000000000001e-05");
        assert_eq!(fmt_f64(1.5e20), "1.5e+20");
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(123456.0), "123456");
        assert_eq!(fmt_f64(0.00123), "0.00123");
    }

    #[test]
    fn json_uses_fixed_formatting() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: Vec<f64>,
            c: f64,
        }
        let s = to_json(&S {
            a: 1.3125,
            b: vec![0.1, 2.0],
            c: f64::NAN,
        })
        .unwrap();
        assert!(s.contains("\"a\": 1.3125"));
        assert!(s.contains("0.10000000000000001"));
        assert!(s.contains("\"c\": null"));
        assert!(s.ends_with("}\n"));
    }

    proptest! {
        #[test]
        fn format_roundtrips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
