pub mod cohomology;
pub mod covering;
pub mod group;
pub mod gbundle;
pub mod cardinality;
pub mod descent;
pub mod instance;
pub mod cli;
