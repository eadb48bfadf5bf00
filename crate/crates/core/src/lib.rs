#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod counting;
pub mod density;
pub mod dispersion;
pub mod error;
pub mod materials;
pub mod modes;
pub mod report;
pub mod seed;
pub mod sfwm;
pub mod tomography;
pub mod units;
