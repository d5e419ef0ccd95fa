pub mod compare;
pub mod embed;
pub mod mirror;
pub mod simulate;
