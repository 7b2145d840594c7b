//! Fractional repetition batch codes and erasure combinatorial batch codes.
//!
//! Modules, bottom-up:
//!
//! * [`gf`]: GF(p^m) arithmetic.
//! * [`incidence`]: node-by-symbol 0/1 matrices and covering queries.
//! * [`designs`]: transversal designs and affine planes.
//! * [`analysis`]: file size `M(k)`, batch parameter `t`, erasure tolerance.
//! * [`mds`]: systematic Reed-Solomon outer code.
//! * [`dss`]: storage simulator (placement, reconstruction, repair, batch reads).

pub mod analysis;
pub mod combin;
pub mod designs;
pub mod dss;
pub mod gf;
pub mod incidence;
pub mod matching;
pub mod mds;

pub use analysis::{batch_t, ecbc_t, file_size, BatchBound, CodeReport, Family, Witness};
pub use designs::{build_affine, build_td, AffinePlane, Design, TransversalDesign};
pub use dss::{random_file, BatchAssignment, RepairPlan, StorageSystem};
pub use gf::{Field, FieldElement};
pub use incidence::{BinaryIncidenceMatrix, BitSet};
pub use mds::MdsCode;
