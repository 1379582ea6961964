//! NPY v1.0 arrays of little-endian `f8` or `c16`.

use std::path::Path;

use faer::c64;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

const MAGIC: &[u8] = b"\x93NUMPY";

#[derive(Clone, Debug)]
pub enum NpyArray {
    Real(Tensor<f64>),
    Complex(Tensor<c64>),
}

impl NpyArray {
    pub fn shape(&self) -> &[usize] {
        match self {
            NpyArray::Real(t) => t.shape(),
            NpyArray::Complex(t) => t.shape(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, NpyArray::Complex(_))
    }

    pub fn into_complex(self) -> Tensor<c64> {
        match self {
            NpyArray::Complex(t) => t,
            NpyArray::Real(t) => {
                let shape = t.shape().to_vec();
                Tensor::from_vec(&shape, t.into_data().into_iter().map(|x| c64::new(x, 0.0)).collect()).unwrap()
            }
        }
    }

    /// Fails on entries with a nonzero imaginary part.
    pub fn into_real(self) -> Result<Tensor<f64>> {
        match self {
            NpyArray::Real(t) => Ok(t),
            NpyArray::Complex(t) => {
                if t.data().iter().any(|z| z.im != 0.0) {
                    return Err(Error::InvalidArgument("complex array where a real one is required".into()));
                }
                let shape = t.shape().to_vec();
                Tensor::from_vec(&shape, t.into_data().into_iter().map(|z| z.re).collect())
            }
        }
    }
}

pub fn read_npy(path: &Path) -> Result<NpyArray> {
    let bytes = std::fs::read(path)?;
    parse_npy(&bytes).map_err(|msg| Error::load(path, 0, msg))
}

pub fn write_npy<T: Scalar>(path: &Path, t: &Tensor<T>) -> Result<()> {
    std::fs::write(path, npy_bytes(t))?;
    Ok(())
}

pub fn npy_bytes<T: Scalar>(t: &Tensor<T>) -> Vec<u8> {
    let descr = if T::IS_COMPLEX { "<c16" } else { "<f8" };
    let shape = match t.shape() {
        [] => "()".to_string(),
        [n] => format!("({n},)"),
        s => format!("({})", s.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")),
    };
    let mut header = format!("{{'descr': '{descr}', 'fortran_order': False, 'shape': {shape}, }}");
    // Magic, version and length take 10 bytes; pad so the data starts on a 64-byte boundary.
    let total = (10 + header.len() + 1).div_ceil(64) * 64;
    header.push_str(&" ".repeat(total - 10 - header.len() - 1));
    header.push('\n');
    let width = if T::IS_COMPLEX { 16 } else { 8 };
    let mut out = Vec::with_capacity(total + t.len() * width);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for x in t.data() {
        let z = x.to_c64();
        out.extend_from_slice(&z.re.to_le_bytes());
        if T::IS_COMPLEX {
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

pub fn parse_npy(bytes: &[u8]) -> std::result::Result<NpyArray, String> {
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err("not an NPY file (bad magic)".into());
    }
    let (hlen, start) = match bytes[6] {
        1 => (u16::from_le_bytes([bytes[8], bytes[9]]) as usize, 10),
        2 | 3 if bytes.len() >= 12 => (u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize, 12),
        v => return Err(format!("unsupported NPY version {v}.{}", bytes[7])),
    };
    let header = bytes.get(start..start + hlen).ok_or("truncated NPY header")?;
    let header = std::str::from_utf8(header).map_err(|_| "NPY header is not text")?;
    let descr = header_value(header, "descr").ok_or("NPY header lacks 'descr'")?;
    let descr = descr.trim_matches(|c| c == '\'' || c == '"');
    let fortran = match header_value(header, "fortran_order").ok_or("NPY header lacks 'fortran_order'")? {
        "True" => true,
        "False" => false,
        v => return Err(format!("bad fortran_order {v:?}")),
    };
    let shape = parse_shape(header_value(header, "shape").ok_or("NPY header lacks 'shape'")?)?;
    let data = &bytes[start + hlen..];
    let n: usize = shape.iter().product();
    let f64_at = |k: usize| f64::from_le_bytes(data[8 * k..8 * k + 8].try_into().unwrap());
    let arr = match descr {
        "<f8" => {
            check_len(data.len(), n * 8)?;
            NpyArray::Real(to_c_order(&shape, (0..n).map(f64_at).collect(), fortran))
        }
        "<c16" => {
            check_len(data.len(), n * 16)?;
            NpyArray::Complex(to_c_order(
                &shape,
                (0..n).map(|k| c64::new(f64_at(2 * k), f64_at(2 * k + 1))).collect(),
                fortran,
            ))
        }
        d => return Err(format!("unsupported dtype {d:?}; expected '<f8' or '<c16'")),
    };
    Ok(arr)
}

fn check_len(have: usize, want: usize) -> std::result::Result<(), String> {
    if have < want {
        return Err(format!("NPY data holds {have} bytes, shape needs {want}"));
    }
    Ok(())
}

fn to_c_order<T: Scalar>(shape: &[usize], data: Vec<T>, fortran: bool) -> Tensor<T> {
    if !fortran || shape.len() < 2 {
        return Tensor::from_vec(shape, data).unwrap();
    }
    let rev: Vec<usize> = shape.iter().rev().copied().collect();
    let perm: Vec<usize> = (0..shape.len()).rev().collect();
    Tensor::from_vec(&rev, data).unwrap().permute(&perm)
}

/// Raw text of `key`'s value in a Python dict literal.
fn header_value<'a>(header: &'a str, key: &str) -> Option<&'a str> {
    let pos = header.find(&format!("'{key}'")).or_else(|| header.find(&format!("\"{key}\"")))?;
    let rest = header[pos + key.len() + 2..].trim_start().strip_prefix(':')?.trim_start();
    let end = if rest.starts_with('(') { rest.find(')')? + 1 } else { rest.find([',', '}'])? };
    Some(rest[..end].trim())
}

fn parse_shape(s: &str) -> std::result::Result<Vec<usize>, String> {
    let inner = s.strip_prefix('(').and_then(|s| s.strip_suffix(')')).ok_or_else(|| format!("bad shape {s:?}"))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| format!("bad shape entry {x:?}")))
        .collect()
}
