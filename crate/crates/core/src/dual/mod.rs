//! The coalescing random walk dual of the voter model.

mod occupancy;

pub mod fourpoint;
pub mod meeting;
pub mod oracle;
pub mod path;
pub mod walkers;

pub use fourpoint::{fourpoint_bound_check, nu_moment4, FourPointReport, FourPointRun};
pub use meeting::{
    cov_eta_dual, meeting_curve_offset, meeting_prob_offset, meeting_prob_pair, meeting_prob_pair_two_walker,
    occupation_cov_dual, CovEstimate, MeetingEstimate,
};
pub use oracle::exact_duality_oracle;
pub use path::{DualPathSampler, Genealogy, Segment};
pub use walkers::{simulate_coalescing, Merge, WalkerRecord, WalkerSystem};
