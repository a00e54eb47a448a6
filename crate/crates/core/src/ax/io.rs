//! Field files.
//!
//! Binary layout (little-endian throughout):
//!
//! | offset | size | content                                   |
//! |--------|------|-------------------------------------------|
//! | 0      | 4    | magic `NKFL`                              |
//! | 4      | 4    | `u32` n (points per dimension)            |
//! | 8      | 4    | `u32` nelt                                |
//! | 12     | 4    | `u32` components per point (0 reads as 1) |
//! | 16     | ...  | `nelt * n^3 * components` `f64` values    |
//!
//! Scalar fields use one component; geometric factors use six, stored
//! component-fastest. The text format is one value per line; blank lines and
//! lines starting with `#` are ignored.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"NKFL";
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub n: u32,
    pub nelt: u32,
    pub components: u32,
    pub values: Vec<f64>,
}

impl FieldFile {
    pub fn values_per_element(&self) -> usize {
        (self.n as usize).pow(3) * self.components as usize
    }

    /// Splits the flat value array into per-element chunks.
    pub fn elements(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.values_per_element())
    }
}

pub fn write_binary<W: Write>(mut out: W, file: &FieldFile) -> Result<()> {
    let expected = file.values_per_element() * file.nelt as usize;
    if file.values.len() != expected {
        return Err(Error::contract(format!(
            "header promises {expected} values, have {}",
            file.values.len()
        )));
    }
    out.write_all(&MAGIC)?;
    out.write_all(&file.n.to_le_bytes())?;
    out.write_all(&file.nelt.to_le_bytes())?;
    out.write_all(&file.components.to_le_bytes())?;
    for v in &file.values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<FieldFile> {
    let mut header = [0u8; HEADER_LEN];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::Format("truncated header".into()))?;
    if header[0..4] != MAGIC {
        return Err(Error::Format("bad magic, expected NKFL".into()));
    }
    let word = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
    let (n, nelt) = (word(4), word(8));
    let components = word(12).max(1);
    let count = (n as usize).pow(3) * nelt as usize * components as usize;
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != count * 8 {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            count * 8,
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(FieldFile {
        n,
        nelt,
        components,
        values,
    })
}

pub fn write_text<W: Write>(mut out: W, values: &[f64]) -> Result<()> {
    for v in values {
        // Display for f64 is shortest round-trip.
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_text<R: BufRead>(input: R) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::Format(format!("line {}: not a number: {t:?}", idx + 1)))?;
        values.push(v);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_sixteen_bytes() {
        let f = FieldFile {
            n: 2,
            nelt: 1,
            components: 1,
            values: vec![1.5; 8],
        };
        let mut buf = Vec::new();
        write_binary(&mut buf, &f).unwrap();
        assert_eq!(&buf[0..4], b"NKFL");
        assert_eq!(buf.len(), HEADER_LEN + 64);
        assert_eq!(&buf[4..8], &2u32.to_le_bytes());
        assert_eq!(read_binary(&buf[..]).unwrap(), f);
    }

    #[test]
    fn zero_components_reads_as_scalar() {
        let mut buf = b"NKFL".to_vec();
        buf.extend(2u32.to_le_bytes());
        buf.extend(1u32.to_le_bytes());
        buf.extend(0u32.to_le_bytes());
        buf.extend(std::iter::repeat_n(0u8, 64));
        assert_eq!(read_binary(&buf[..]).unwrap().components, 1);
    }

    #[test]
    fn corrupt_inputs_rejected() {
        assert!(read_binary(&b"NKF"[..]).is_err());
        assert!(read_binary(&b"XXXX000000000000"[..]).is_err());
        let mut buf = Vec::new();
        let f = FieldFile {
            n: 2,
            nelt: 1,
            components: 1,
            values: vec![0.0; 8],
        };
        write_binary(&mut buf, &f).unwrap();
        buf.pop();
        assert!(read_binary(&buf[..]).is_err());
    }

    #[test]
    fn text_skips_comments() {
        let v = read_text("# u\n1.0\n\n-2.5e-3\n".as_bytes()).unwrap();
        assert_eq!(v, vec![1.0, -2.5e-3]);
        assert!(read_text("abc\n".as_bytes()).is_err());
    }
}
