//! Text and binary formats: `%g`-style numbers, COO matrices, ADO dumps.

use crate::error::{HeomError, Result};
use crate::liouvillian::Parity;
use crate::sparse::CsrMatrix;
use crate::C64;
use std::fmt::Write as _;

/// C `printf("%.{prec}g", x)`.
pub fn fmt_g(x: f64, prec: usize) -> String {
    let p = prec.max(1);
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // exponent after rounding to p significant digits
    let sci = format!("{:.*e}", p - 1, x);
    let (mant, exp) = sci.split_once('e').unwrap();
    let e: i32 = exp.parse().unwrap();
    if e < -4 || e >= p as i32 {
        let mant = strip_zeros(mant);
        let sign = if e < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", e.abs())
    } else {
        let decimals = (p as i32 - 1 - e) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV number formatting.
pub fn csv_num(x: f64) -> String {
    fmt_g(x, 12)
}

/// Writes a CSV with a header row.
pub fn write_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&v| csv_num(v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Coordinate list: a `# nrows ncols nnz` line, then `row col re im` per entry.
pub fn write_coo(m: &CsrMatrix) -> String {
    let mut s = String::with_capacity(64 * m.nnz() + 32);
    let _ = writeln!(s, "# {} {} {}", m.nrows(), m.ncols(), m.nnz());
    for (r, c, v) in m.triplets() {
        let _ = writeln!(s, "{r} {c} {} {}", fmt_g(v.re, 17), fmt_g(v.im, 17));
    }
    s
}

/// Largest row or column count [`parse_coo`] accepts; the CSR row pointer is allocated up front.
pub const MAX_COO_DIM: usize = 1 << 24;

/// Parses [`write_coo`] output. Without the header, the shape is the largest index + 1.
pub fn parse_coo(text: &str) -> Result<CsrMatrix> {
    let mut shape: Option<(usize, usize, usize)> = None;
    let mut trip = Vec::new();
    let bad = |line: usize, msg: &str| HeomError::Decode(format!("COO line {line}: {msg}"));
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if shape.is_none() && trip.is_empty() {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() == 3 {
                    let p = |s: &str| s.parse::<usize>().map_err(|_| bad(ln, "bad header"));
                    let (nr, nc, nnz) = (p(f[0])?, p(f[1])?, p(f[2])?);
                    if nr > MAX_COO_DIM || nc > MAX_COO_DIM {
                        return Err(bad(ln, &format!("shape {nr}x{nc} exceeds the limit of {MAX_COO_DIM}")));
                    }
                    shape = Some((nr, nc, nnz));
                }
            }
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(bad(ln, "expected `row col re im`"));
        }
        let r: usize = f[0].parse().map_err(|_| bad(ln, "bad row index"))?;
        let c: usize = f[1].parse().map_err(|_| bad(ln, "bad column index"))?;
        if r >= MAX_COO_DIM || c >= MAX_COO_DIM {
            return Err(bad(ln, "index exceeds the size limit"));
        }
        let re: f64 = f[2].parse().map_err(|_| bad(ln, "bad real part"))?;
        let im: f64 = f[3].parse().map_err(|_| bad(ln, "bad imaginary part"))?;
        if !re.is_finite() || !im.is_finite() {
            return Err(bad(ln, "non-finite value"));
        }
        trip.push((r, c, C64::new(re, im)));
    }
    let (nr, nc) = match shape {
        Some((nr, nc, nnz)) => {
            if nnz != trip.len() {
                return Err(HeomError::Decode(format!(
                    "header announces {nnz} entries, found {}",
                    trip.len()
                )));
            }
            (nr, nc)
        }
        None => (
            trip.iter().map(|t| t.0 + 1).max().unwrap_or(0),
            trip.iter().map(|t| t.1 + 1).max().unwrap_or(0),
        ),
    };
    if let Some(t) = trip.iter().find(|t| t.0 >= nr || t.1 >= nc) {
        return Err(HeomError::Decode(format!(
            "entry ({}, {}) outside a {nr}x{nc} matrix",
            t.0, t.1
        )));
    }
    CsrMatrix::from_triplets(nr, nc, trip).map_err(|e| HeomError::Decode(e.to_string()))
}

pub const DUMP_MAGIC: &[u8; 16] = b"HEOMADOS\0\0\0\0\0\0\0\0";
pub const DUMP_VERSION: u32 = 1;
const DUMP_HEADER: usize = 16 + 4 + 4 + 8 + 8 + 8;

/// Full ADO trajectory in binary form.
#[derive(Debug, Clone, PartialEq)]
pub struct AdoDump {
    pub parity: Parity,
    pub n_ados: usize,
    pub d: usize,
    /// `(t, stacked ADOs)` per frame.
    pub frames: Vec<(f64, Vec<C64>)>,
}

impl AdoDump {
    fn frame_len(&self) -> usize {
        self.n_ados * self.d * self.d
    }

    /// Little-endian: magic, version u32, parity u32 (0 even, 1 odd), n_ados u64, d u64,
    /// n_frames u64, then per frame `t` and the `(re, im)` pairs.
    pub fn encode(&self) -> Result<Vec<u8>> {
        let len = self.frame_len();
        if let Some((i, _)) = self.frames.iter().enumerate().find(|(_, f)| f.1.len() != len) {
            return Err(HeomError::Dimension(format!("frame {i} does not hold {len} entries")));
        }
        let mut out = Vec::with_capacity(DUMP_HEADER + self.frames.len() * (8 + 16 * len));
        out.extend_from_slice(DUMP_MAGIC);
        out.extend_from_slice(&DUMP_VERSION.to_le_bytes());
        out.extend_from_slice(&(matches!(self.parity, Parity::Odd) as u32).to_le_bytes());
        for v in [self.n_ados, self.d, self.frames.len()] {
            out.extend_from_slice(&(v as u64).to_le_bytes());
        }
        for (t, data) in &self.frames {
            out.extend_from_slice(&t.to_le_bytes());
            for z in data {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let err = |m: &str| HeomError::Decode(format!("ADO dump: {m}"));
        if bytes.len() < DUMP_HEADER {
            return Err(err("truncated header"));
        }
        if &bytes[..16] != DUMP_MAGIC {
            return Err(err("bad magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(16);
        if version != DUMP_VERSION {
            return Err(err(&format!("unsupported version {version}")));
        }
        let parity = match u32_at(20) {
            0 => Parity::Even,
            1 => Parity::Odd,
            p => return Err(err(&format!("bad parity tag {p}"))),
        };
        let (n_ados, d, n_frames) = (u64_at(24), u64_at(32), u64_at(40));
        let frame_bytes = n_ados
            .checked_mul(d)
            .and_then(|x| x.checked_mul(d))
            .and_then(|x| x.checked_mul(16))
            .and_then(|x| x.checked_add(8))
            .ok_or_else(|| err("dimensions overflow"))?;
        let body = (bytes.len() - DUMP_HEADER) as u64;
        if frame_bytes.checked_mul(n_frames) != Some(body) {
            return Err(err(&format!(
                "body is {body} bytes, header implies {n_frames} frames of {frame_bytes}"
            )));
        }
        let to_usize = |v: u64| usize::try_from(v).map_err(|_| err("size exceeds address space"));
        let (n_ados, d) = (to_usize(n_ados)?, to_usize(d)?);
        let len = n_ados * d * d;
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let mut frames = Vec::with_capacity(to_usize(n_frames)?);
        let mut o = DUMP_HEADER;
        for _ in 0..n_frames {
            let t = f64_at(o);
            o += 8;
            let data = (0..len)
                .map(|k| C64::new(f64_at(o + 16 * k), f64_at(o + 16 * k + 8)))
                .collect();
            o += 16 * len;
            frames.push((t, data));
        }
        Ok(Self {
            parity,
            n_ados,
            d,
            frames,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printf_g() {
        assert_eq!(fmt_g(0.0001, 12), "0.0001");
        assert_eq!(fmt_g(0.00001, 12), "1e-05");
        assert_eq!(fmt_g(123456789012.0, 12), "123456789012");
        assert_eq!(fmt_g(1234567890123.0, 12), "1.23456789012e+12");
        assert_eq!(fmt_g(-2.5, 12), "-2.5");
        assert_eq!(fmt_g(1.0 / 3.0, 17), "0.33333333333333331");
        assert_eq!(fmt_g(9.9999999999999e5, 3), "1e+06");
        assert_eq!(fmt_g(100.0, 3), "100");
    }

    #[test]
    fn g17_round_trips() {
        for x in [
            0.1,
            1.0 / 3.0,
            6.02214076e23,
            -1.2345678901234567e-300,
            f64::MAX,
            f64::MIN_POSITIVE,
        ] {
            assert_eq!(fmt_g(x, 17).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn coo_round_trip() {
        let m =
            CsrMatrix::from_triplets(3, 4, vec![(0, 1, C64::new(0.1, -2.0)), (2, 3, C64::new(1e-300, 7.0))]).unwrap();
        let back = parse_coo(&write_coo(&m)).unwrap();
        assert_eq!(back, m);
        assert!(parse_coo("# 2 2 1\n5 0 1 0\n").is_err());
        assert!(parse_coo("0 0 nan 0\n").is_err());
        assert!(parse_coo("0 0 1\n").is_err());
    }

    #[test]
    fn dump_round_trip() {
        let dump = AdoDump {
            parity: Parity::Odd,
            n_ados: 2,
            d: 2,
            frames: vec![
                (0.0, (0..8).map(|k| C64::new(k as f64, -1.0)).collect()),
                (0.5, vec![C64::new(0.25, 0.0); 8]),
            ],
        };
        let bytes = dump.encode().unwrap();
        assert_eq!(&bytes[..9], b"HEOMADOS\0");
        assert_eq!(AdoDump::decode(&bytes).unwrap(), dump);
        assert!(AdoDump::decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[16] = 2;
        assert!(AdoDump::decode(&bad).is_err());
    }
}
