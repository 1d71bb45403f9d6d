//! NPY version 1.0 files: little-endian `complex128` and `float64` arrays in
//! C order.
//!
//! Only the subset needed for this crate is supported: the two dtypes above,
//! `fortran_order: False`, and version 1.0 headers.

use std::io::Read;
use std::path::Path;

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;

use super::write_atomic;
use crate::error::{Error, Result};

const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;

/// Element types storable in a `.npy` file.
pub trait NpyElement: Copy + Sized {
    const DESCR: &'static str;
    const SIZE: usize;
    fn write_le(&self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Self;
}

impl NpyElement for f64 {
    const DESCR: &'static str = "<f8";
    const SIZE: usize = 8;
    fn write_le(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8 bytes"))
    }
}

impl NpyElement for Complex64 {
    const DESCR: &'static str = "<c16";
    const SIZE: usize = 16;
    fn write_le(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.re.to_le_bytes());
        out.extend_from_slice(&self.im.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        Complex64::new(f64::read_le(&bytes[..8]), f64::read_le(&bytes[8..]))
    }
}

fn header_text(descr: &str, shape: &[usize]) -> String {
    let dims = match shape {
        [d] => format!("({d},)"),
        _ => format!(
            "({})",
            shape.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")
        ),
    };
    format!("{{'descr': '{descr}', 'fortran_order': False, 'shape': {dims}, }}")
}

/// Serializes an array to NPY bytes.
pub fn to_bytes<T, D>(array: &ndarray::Array<T, D>) -> Vec<u8>
where
    T: NpyElement,
    D: ndarray::Dimension,
{
    let mut header = header_text(T::DESCR, array.shape());
    // magic(6) + version(2) + len(2) + header + '\n' padded to ALIGN
    let unpadded = MAGIC.len() + 2 + 2 + header.len() + 1;
    let pad = (ALIGN - unpadded % ALIGN) % ALIGN;
    header.extend(std::iter::repeat_n(' ', pad));
    header.push('\n');
    let mut out = Vec::with_capacity(unpadded + pad + array.len() * T::SIZE);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    // logical (C) order regardless of memory layout
    for v in array.iter() {
        v.write_le(&mut out);
    }
    out
}

/// Writes an array atomically (temp file, then rename).
pub fn write<T, D>(path: &Path, array: &ndarray::Array<T, D>) -> Result<()>
where
    T: NpyElement,
    D: ndarray::Dimension,
{
    write_atomic(path, &to_bytes(array))
}

fn bad(path: &Path, msg: impl Into<String>) -> Error {
    Error::Npy {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

/// Pulls the text value following `'key':` out of a header dictionary.
fn dict_value<'a>(header: &'a str, key: &str) -> Option<&'a str> {
    let pat = format!("'{key}':");
    let start = header.find(&pat)? + pat.len();
    let rest = header[start..].trim_start();
    let end = if rest.starts_with('(') {
        rest.find(')')? + 1
    } else {
        rest.find([',', '}'])?
    };
    Some(rest[..end].trim())
}

/// Parses NPY bytes into a dynamic-dimensional array.
pub fn from_bytes<T: NpyElement>(path: &Path, bytes: &[u8]) -> Result<ArrayD<T>> {
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(bad(path, "missing NPY magic string"));
    }
    if bytes[6] != 1 {
        return Err(bad(path, format!("unsupported NPY version {}.{}", bytes[6], bytes[7])));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let data_start = 10 + header_len;
    if bytes.len() < data_start {
        return Err(bad(path, "truncated header"));
    }
    let header = std::str::from_utf8(&bytes[10..data_start]).map_err(|_| bad(path, "header is not UTF-8"))?;
    let descr = dict_value(header, "descr").ok_or_else(|| bad(path, "header lacks 'descr'"))?;
    if descr.trim_matches('\'') != T::DESCR {
        return Err(bad(path, format!("dtype {descr}, expected '{}'", T::DESCR)));
    }
    match dict_value(header, "fortran_order") {
        Some("False") => {}
        Some(other) => return Err(bad(path, format!("fortran_order {other} is not supported"))),
        None => return Err(bad(path, "header lacks 'fortran_order'")),
    }
    let shape_text = dict_value(header, "shape").ok_or_else(|| bad(path, "header lacks 'shape'"))?;
    let shape: Vec<usize> = shape_text
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad(path, format!("bad shape {shape_text}")))?;
    let count: usize = shape.iter().product();
    let data = &bytes[data_start..];
    if data.len() != count * T::SIZE {
        return Err(bad(
            path,
            format!("expected {} data bytes for shape {shape:?}, found {}", count * T::SIZE, data.len()),
        ));
    }
    let values: Vec<T> = data.chunks_exact(T::SIZE).map(T::read_le).collect();
    ArrayD::from_shape_vec(IxDyn(&shape), values).map_err(|e| bad(path, e.to_string()))
}

pub fn read<T: NpyElement>(path: &Path) -> Result<ArrayD<T>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    from_bytes(path, &bytes)
}

/// Reads an array and checks its rank.
pub fn read_dim<T: NpyElement, D: ndarray::Dimension>(path: &Path) -> Result<ndarray::Array<T, D>> {
    read::<T>(path)?
        .into_dimensionality::<D>()
        .map_err(|_| bad(path, "unexpected number of dimensions"))
}
