use gentensor_core::{DenseTensor, SymTensor};

/// A symmetric tensor in compact storage or a general dense tensor.
#[derive(Debug, Clone, PartialEq)]
pub enum Tensor {
    Sym(SymTensor),
    Dense(DenseTensor),
}

impl Tensor {
    pub fn norm(&self) -> f64 {
        match self {
            Tensor::Sym(t) => t.norm(),
            Tensor::Dense(t) => t.norm(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Tensor::Sym(_) => "sym",
            Tensor::Dense(_) => "dense",
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        match self {
            Tensor::Sym(t) => vec![t.dim(); t.order()],
            Tensor::Dense(t) => t.dims().to_vec(),
        }
    }

    /// `||self - other||`; both must be of the same kind and shape.
    pub fn distance(&self, other: &Tensor) -> gentensor_core::Result<f64> {
        match (self, other) {
            (Tensor::Sym(a), Tensor::Sym(b)) => a.distance(b),
            (Tensor::Dense(a), Tensor::Dense(b)) => a.distance(b),
            (Tensor::Sym(a), Tensor::Dense(b)) | (Tensor::Dense(b), Tensor::Sym(a)) => a.to_dense().distance(b),
        }
    }

    pub fn into_dense(self) -> DenseTensor {
        match self {
            Tensor::Sym(t) => t.to_dense(),
            Tensor::Dense(t) => t,
        }
    }
}
