//! Parameter sets: the transferable weight space.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::model::ModelConfig;
use crate::rng;
use crate::scalar::Scalar;

const PARAM_MAGIC: &[u8; 4] = b"MLPW";
const PARAM_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum TensorValue<T> {
    Matrix(DenseMatrix<T>),
    Vector(Vec<T>),
}

/// One named trainable tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    pub name: String,
    pub value: TensorValue<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn dims(&self) -> Vec<usize> {
        match &self.value {
            TensorValue::Matrix(m) => vec![m.rows(), m.cols()],
            TensorValue::Vector(v) => vec![v.len()],
        }
    }

    pub fn values(&self) -> &[T] {
        match &self.value {
            TensorValue::Matrix(m) => m.data(),
            TensorValue::Vector(v) => v,
        }
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        match &mut self.value {
            TensorValue::Matrix(m) => m.data_mut(),
            TensorValue::Vector(v) => v,
        }
    }

    pub fn as_matrix(&self) -> &DenseMatrix<T> {
        match &self.value {
            TensorValue::Matrix(m) => m,
            TensorValue::Vector(_) => panic!("tensor {} is not a matrix", self.name),
        }
    }

    pub fn as_vector(&self) -> &[T] {
        match &self.value {
            TensorValue::Vector(v) => v,
            TensorValue::Matrix(_) => panic!("tensor {} is not a vector", self.name),
        }
    }
}

/// Ordered named tensors; the weight space `w` moved between a GNN and its
/// peer MLP.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet<T> {
    pub tensors: Vec<Tensor<T>>,
}

impl<T: Scalar> ParamSet<T> {
    pub fn get(&self, name: &str) -> Option<&Tensor<T>> {
        self.tensors.iter().find(|t| t.name == name)
    }

    /// Ordered (name, dims) signature; two sets with equal signatures live
    /// in the same weight space.
    pub fn shape_sig(&self) -> Vec<(String, Vec<usize>)> {
        self.tensors.iter().map(|t| (t.name.clone(), t.dims())).collect()
    }

    pub fn zeros_like(&self) -> Self {
        ParamSet {
            tensors: self
                .tensors
                .iter()
                .map(|t| Tensor {
                    name: t.name.clone(),
                    value: match &t.value {
                        TensorValue::Matrix(m) => {
                            TensorValue::Matrix(DenseMatrix::zeros(m.rows(), m.cols()))
                        }
                        TensorValue::Vector(v) => TensorValue::Vector(vec![T::zero(); v.len()]),
                    },
                })
                .collect(),
        }
    }

    pub fn num_values(&self) -> usize {
        self.tensors.iter().map(|t| t.values().len()).sum()
    }

    /// self += alpha * other, tensor by tensor.
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        debug_assert_eq!(self.tensors.len(), other.tensors.len());
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            for (x, &y) in a.values_mut().iter_mut().zip(b.values()) {
                *x = *x + alpha * y;
            }
        }
    }

    /// Concatenated values in declaration order, in f64.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_values());
        for t in &self.tensors {
            out.extend(t.values().iter().map(|v| v.as_f64()));
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.tensors
            .iter()
            .zip(&other.tensors)
            .flat_map(|(a, b)| {
                a.values()
                    .iter()
                    .zip(b.values())
                    .map(|(&x, &y)| (x.as_f64() - y.as_f64()).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn cast<U: Scalar>(&self) -> ParamSet<U> {
        ParamSet {
            tensors: self
                .tensors
                .iter()
                .map(|t| Tensor {
                    name: t.name.clone(),
                    value: match &t.value {
                        TensorValue::Matrix(m) => TensorValue::Matrix(m.cast()),
                        TensorValue::Vector(v) => {
                            TensorValue::Vector(v.iter().map(|x| U::from_f64(x.as_f64())).collect())
                        }
                    },
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    GlorotUniform,
}

/// Fresh parameters for a config: weights U(-a, a) with
/// a = sqrt(6 / (fan_in + fan_out)), biases zero.
pub fn init_params<T: Scalar>(config: &ModelConfig, seed: u64, scheme: InitScheme) -> ParamSet<T> {
    let InitScheme::GlorotUniform = scheme;
    let mut r = rng::stream(seed, "init");
    let tensors = config
        .param_shapes()
        .into_iter()
        .map(|(name, dims)| Tensor {
            name,
            value: match dims.as_slice() {
                [rows, cols] => {
                    let a = (6.0 / (*rows as f64 + *cols as f64)).sqrt();
                    TensorValue::Matrix(DenseMatrix::from_fn(*rows, *cols, |_, _| {
                        rng::uniform_symmetric(&mut r, a)
                    }))
                }
                [len] => TensorValue::Vector(vec![T::zero(); *len]),
                other => unreachable!("rank {} tensor in contract", other.len()),
            },
        })
        .collect();
    ParamSet { tensors }
}

/// Write the `MLPW` binary format; values are stored as f32 little-endian.
pub fn save_params<T: Scalar>(params: &ParamSet<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(PARAM_MAGIC);
    buf.extend_from_slice(&PARAM_VERSION.to_le_bytes());
    buf.extend_from_slice(&(params.tensors.len() as u32).to_le_bytes());
    for t in &params.tensors {
        let name = t.name.as_bytes();
        buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
        buf.extend_from_slice(name);
        let dims = t.dims();
        buf.extend_from_slice(&(dims.len() as u32).to_le_bytes());
        for d in &dims {
            buf.extend_from_slice(&(*d as u32).to_le_bytes());
        }
        for v in t.values() {
            buf.extend_from_slice(&v.as_f32().to_le_bytes());
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_params<T: Scalar>(path: impl AsRef<Path>) -> Result<ParamSet<T>> {
    let bytes = fs::read(path)?;
    let mut cur = bytes.as_slice();
    let mut take = |n: usize| -> Result<&[u8]> {
        if cur.len() < n {
            return Err(Error::ParamFormat("truncated file".into()));
        }
        let (head, tail) = cur.split_at(n);
        cur = tail;
        Ok(head)
    };
    if take(4)? != PARAM_MAGIC {
        return Err(Error::ParamFormat("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != PARAM_VERSION {
        return Err(Error::ParamFormat(format!("unsupported version {version}")));
    }
    let count = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let mut tensors = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let name = String::from_utf8(take(name_len)?.to_vec())
            .map_err(|_| Error::ParamFormat("name not UTF-8".into()))?;
        let rank = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize);
        }
        let len: usize = dims.iter().product();
        let raw = take(len * 4)?;
        let mut data = Vec::with_capacity(len);
        for chunk in raw.chunks_exact(4) {
            data.push(T::from_f32(f32::from_le_bytes(chunk.try_into().unwrap())));
        }
        let value = match dims.as_slice() {
            [rows, cols] => TensorValue::Matrix(DenseMatrix::from_vec(*rows, *cols, data)?),
            [_] => TensorValue::Vector(data),
            other => {
                return Err(Error::ParamFormat(format!("unsupported rank {}", other.len())))
            }
        };
        tensors.push(Tensor { name, value });
    }
    if !cur.is_empty() {
        return Err(Error::ParamFormat("trailing bytes".into()));
    }
    Ok(ParamSet { tensors })
}
