pub mod expr;
pub mod geometry;
pub mod tensor;
pub mod connection;
pub mod curvature;
pub mod classify;
pub mod relativity;
pub mod catalog;
pub mod fdcheck;
pub mod sampling;
pub mod config;
pub mod analysis;
pub mod report;
pub mod selftest;
