//! Minimal estimation kernels.

mod cubic;
mod fundamental;
mod homography1d;

pub use cubic::solve_cubic;
pub use fundamental::{eight_point, seven_point};
pub use homography1d::{
    apply_homography_1d, coefficients_of_point, coefficients_within, compose_f,
    extract_homography_1d, homography_1d_from_3, ControlPointPair, EpipolarHomography1D,
    LineCoefficients, EPIPOLE_LINE_CLEARANCE, ON_LINE_TOLERANCE,
};
