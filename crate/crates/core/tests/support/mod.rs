#![allow(dead_code)]

pub mod geweke;
pub mod quad;
