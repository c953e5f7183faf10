//! Deterministic number formatting shared by every output path: 12
//! significant digits, lowercase exponent, signed zeros normalized. JSON and
//! CSV emitted through these helpers are byte-identical across runs.

use std::io::{self, Write};

use serde::Serialize;

/// `-0.0` folded into `0.0`, then `d.dddddddddddde±e`.
pub fn fmt_f64(x: f64) -> String {
    let v = if x == 0.0 { 0.0 } else { x };
    format!("{v:.11e}")
}

/// serde_json formatter that routes every float through [`fmt_f64`].
pub struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        writer.write_all(fmt_f64(value as f64).as_bytes())
    }
}

/// Serialize to a single-line JSON string with the fixed float format.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter);
    value.serialize(&mut ser).expect("in-memory serialization");
    let mut s = String::from_utf8(out).expect("serde_json emits utf8");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_f64(4.0 / 3.0), "1.33333333333e0");
        assert_eq!(fmt_f64(0.001), "1.00000000000e-3");
        assert_eq!(fmt_f64(-0.0), "0.00000000000e0");
        assert_eq!(fmt_f64(-1.5396007178), "-1.53960071780e0");
    }

    #[test]
    fn json_floats_use_fixed_format() {
        #[derive(Serialize)]
        struct S {
            x: [f64; 2],
        }
        assert_eq!(
            to_json(&S {
                x: [4.0 / 3.0, 0.0]
            }),
            "{\"x\":[1.33333333333e0,0.00000000000e0]}\n"
        );
    }
}
