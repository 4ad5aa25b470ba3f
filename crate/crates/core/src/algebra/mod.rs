pub mod forest;
pub mod maps;
pub mod multi;
pub mod system;
pub mod tensor;
pub mod words;

pub use forest::{Forest, Tree};
pub use multi::Multi;
pub use system::{Kind, System};
pub use tensor::Tensor;
