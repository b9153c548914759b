//! String synchronizing sets and their applications: an LCE index, a
//! BWT construction driven by wavelet trees, and an inversion-counting
//! reduction through the BWT.
//!
//! All positions in the library API are 0-based. File formats and the
//! command-line tool use 1-based positions.

pub mod bwt_builder;
pub mod error;
pub mod inversions;
pub mod lce_index;
pub mod packed_text;
pub mod reference_oracles;
pub mod succinct;
pub mod suffix_core;
pub mod sync_set;
pub mod sync_sort;

pub use error::{Error, Result};
pub use packed_text::{PackedText, SubstringKey};
