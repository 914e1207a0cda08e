#![allow(dead_code)]

pub mod lehn_sorger;
pub mod localization;
