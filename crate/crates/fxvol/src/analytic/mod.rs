//! Closed-form pricing and transforms: Black-Scholes in total-variance
//! coordinates, implied vol, the analytic up-and-out barrier, and the
//! BS2SR existence analysis.

pub mod black;
pub mod bs2sr;

pub use black::{
    black_call, bs_barrier_up_out, bs_call_intrinsic, bs_call_tiv, implied_vol, CallTiv,
};
pub use bs2sr::{bs2sr_min_tiv, bs2sr_min_vol, bs2sr_solve_vol, bs2sr_tiv, Bs2srSpec, RatePart};
