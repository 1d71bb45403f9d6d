//! Complex array newtypes for the probe, the object and frame stacks.

use ndarray::{Array2, Array3, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;

fn check_finite<'a>(mut it: impl Iterator<Item = &'a Complex64>, what: &str) -> Result<()> {
    if it.all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries")))
    }
}

/// Frobenius norm of any complex array.
pub fn norm<'a>(it: impl IntoIterator<Item = &'a Complex64>) -> f64 {
    it.into_iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Inner product `<a, b> = sum(conj(a) * b)`.
pub fn inner<'a>(
    a: impl IntoIterator<Item = &'a Complex64>,
    b: impl IntoIterator<Item = &'a Complex64>,
) -> Complex64 {
    a.into_iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Illumination function, `m`×`m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub values: Array2<Complex64>,
}

impl Probe {
    pub fn new(values: Array2<Complex64>) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c || r == 0 {
            return Err(Error::Shape(format!("probe must be square and non-empty, got {r}x{c}")));
        }
        check_finite(values.iter(), "probe")?;
        Ok(Probe { values })
    }

    pub fn ones(m: usize) -> Self {
        Probe {
            values: Array2::from_elem((m, m), Complex64::new(1.0, 0.0)),
        }
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }

    pub fn scaled(&self, c: Complex64) -> Probe {
        Probe {
            values: self.values.mapv(|v| v * c),
        }
    }

    pub(crate) fn check(&self, g: &ScanGeometry) -> Result<()> {
        if self.values.dim() != (g.m(), g.m()) {
            return Err(Error::Shape(format!(
                "probe is {:?}, geometry frame size is {}",
                self.values.dim(),
                g.m()
            )));
        }
        Ok(())
    }

    pub(crate) fn require_nonzero(&self) -> Result<f64> {
        let n2 = self.values.iter().map(|v| v.norm_sqr()).sum::<f64>();
        if n2 > 0.0 {
            Ok(n2)
        } else {
            Err(Error::InvalidInput("probe is identically zero".into()))
        }
    }
}

/// Specimen transmission function, `n`×`n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectImage {
    pub values: Array2<Complex64>,
}

impl ObjectImage {
    pub fn new(values: Array2<Complex64>) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c || r == 0 {
            return Err(Error::Shape(format!("object must be square and non-empty, got {r}x{c}")));
        }
        check_finite(values.iter(), "object")?;
        Ok(ObjectImage { values })
    }

    pub fn from_elem(n: usize, v: Complex64) -> Self {
        ObjectImage {
            values: Array2::from_elem((n, n), v),
        }
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }

    pub(crate) fn check(&self, g: &ScanGeometry) -> Result<()> {
        if self.values.dim() != (g.n(), g.n()) {
            return Err(Error::Shape(format!(
                "object is {:?}, geometry object size is {}",
                self.values.dim(),
                g.n()
            )));
        }
        Ok(())
    }
}

/// Stack of `K` complex `m`×`m` frames, indexed `[frame, row, col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStack {
    pub values: Array3<Complex64>,
}

impl FrameStack {
    pub fn new(values: Array3<Complex64>) -> Result<Self> {
        let (_, r, c) = values.dim();
        if r != c {
            return Err(Error::Shape(format!("frames must be square, got {r}x{c}")));
        }
        check_finite(values.iter(), "frame stack")?;
        Ok(FrameStack { values })
    }

    pub fn zeros(k: usize, m: usize) -> Self {
        FrameStack {
            values: Array3::zeros((k, m, m)),
        }
    }

    pub fn frame_count(&self) -> usize {
        self.values.dim().0
    }

    pub fn frame_size(&self) -> usize {
        self.values.dim().1
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }

    pub fn inner(&self, other: &FrameStack) -> Complex64 {
        inner(&self.values, &other.values)
    }

    /// Elementwise `self - other`.
    pub fn sub(&self, other: &FrameStack) -> FrameStack {
        FrameStack {
            values: &self.values - &other.values,
        }
    }

    /// Elementwise product with another stack of the same shape.
    pub fn hadamard(&self, other: &FrameStack) -> FrameStack {
        let mut values = self.values.clone();
        Zip::from(&mut values).and(&other.values).for_each(|a, &b| *a *= b);
        FrameStack { values }
    }

    pub(crate) fn check(&self, g: &ScanGeometry) -> Result<()> {
        if self.values.dim() != (g.k(), g.m(), g.m()) {
            return Err(Error::Shape(format!(
                "frame stack is {:?}, geometry expects ({}, {}, {})",
                self.values.dim(),
                g.k(),
                g.m(),
                g.m()
            )));
        }
        Ok(())
    }
}
