//! Classification of tangential singularities of planar-switching Filippov systems in 3D.

pub mod algebra;
pub mod foldfold;
pub mod integrator;
pub mod linalg;
pub mod scalar;
pub mod sigma;
pub mod sliding;
pub mod system;

pub use algebra::{Poly3, VectorField3};
pub use scalar::Scalar;
pub use system::{Aabb, PiecewiseSystem, Side};

pub type Poly = Poly3<f64>;
pub type Field = VectorField3<f64>;
pub type System = PiecewiseSystem<f64>;
pub type Params = foldfold::NormalParameters<f64>;
