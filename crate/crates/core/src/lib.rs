//! Pump-dressed steady states, linearized probe response, induced
//! transparency windows and group delays of a microwave cavity coupled to
//! N ≥ 1 mechanical oscillators, with a nonlinear time-domain integrator as
//! an independent check of the linear theory.
//!
//! Runnable examples, one per capability (`cargo run --release --example <name>`):
//!
//! | example             | shows                                                      |
//! |---------------------|------------------------------------------------------------|
//! | `steady_state`      | operating point and drift-matrix eigenvalues               |
//! | `bistability`       | three-root pumping and the branch policies                 |
//! | `spectrum`          | transmission, windows, widths and cooperativities          |
//! | `width_sweep`       | window width against pump power with a line fit            |
//! | `group_delay`       | transmitted delay and reflected advance against power      |
//! | `time_domain`       | nonlinear integration compared with the linear sidebands   |
//! | `three_modes`       | a three-mode device read from the configuration format     |
//! | `reproduce_figures` | every reproduced figure dataset as CSV and SVG             |
//! | `write_configs`     | the bundled presets in the configuration format            |
//!
//! The `emit-lab` binary wraps [`cli::run`].

// Negated comparisons such as `!(x > 0.0)` are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod figures;
pub mod model;
pub mod output;
pub mod response;
pub mod steadystate;
pub mod timedomain;

pub use error::{Error, Result};
