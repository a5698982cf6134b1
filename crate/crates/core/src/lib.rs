//! Exact-rational simulation engine for adversarial betting games on binary
//! trees: capital snapshots ("gales") and their restricted classes, finite
//! game referees, constructive enumeration strategies with their reduction
//! combinators, linear-programming adversaries, and a desk-scale driver that
//! assembles a non-random real together with the test witnessing it.

pub mod alice;
pub mod baby;
pub mod construct;
pub mod gales;
pub mod lp;
pub mod play;
pub mod ratio;
pub mod referee;
pub mod stats;
pub mod strings;

pub use ratio::Q;
pub use strings::BitString;
