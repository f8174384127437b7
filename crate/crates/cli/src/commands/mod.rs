pub mod bvp;
pub mod deform;
pub mod extend;
pub mod minimal;
pub mod path;
pub mod spectrum;
