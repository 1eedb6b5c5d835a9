pub mod geometry;
pub mod mesh;
pub mod vem_space;
pub mod mapping;
pub mod curved_space;
pub mod methods;
pub mod cases;
pub mod analysis;
pub mod study;
