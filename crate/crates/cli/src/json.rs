//! JSON emission with a fixed float format.
//!
//! Every finite float is written with 17 significant digits in scientific
//! notation, so equal values always produce equal bytes and parse back to
//! the same `f64`. Non-finite values become `null`.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

pub struct FixedDigits<F>(F);

impl<F: Formatter> Formatter for FixedDigits<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn write_with<T: Serialize + ?Sized, F: Formatter>(value: &T, fmt: F) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits(fmt));
    value
        .serialize(&mut ser)
        .expect("report types always serialize");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

/// Indented document terminated by a newline.
pub fn to_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = write_with(value, PrettyFormatter::with_indent(b"  "));
    s.push('\n');
    s
}

/// Single line without trailing newline.
pub fn to_line<T: Serialize + ?Sized>(value: &T) -> String {
    write_with(value, CompactFormatter)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 5e-324, 1e300, -2.5, 0.0] {
            let s = to_line(&v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let digits: String = s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).collect();
            assert_eq!(digits.len(), 17, "{s}");
        }
        assert_eq!(to_line(&f64::INFINITY), "null");
        assert_eq!(to_line(&vec![1u32, 2]), "[1,2]");
    }

    #[test]
    fn pretty_layout() {
        let v = serde_json::json!({"a": [1, 2]});
        assert_eq!(to_pretty(&v), "{\n  \"a\": [\n    1,\n    2\n  ]\n}\n");
    }
}
