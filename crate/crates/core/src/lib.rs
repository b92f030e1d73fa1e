//! Screening for cognitive impairment from the evolution of facial emotions.
//!
//! The crate covers the whole chain: depthwise-separable convolution
//! inference with exact MAC accounting ([`tensor`], [`net`]), Viola-Jones
//! style face localization ([`face`]), classifiers ([`classify`]),
//! emotion-evolution analytics ([`analytics`]) and the end-to-end screening
//! workflow ([`pipeline`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod classify;
pub mod face;
pub mod io;
pub mod net;
pub mod pipeline;
pub mod synth;
pub mod tensor;
