//! Optimal selling time for a Brownian motion pinned to a terminal value.
//!
//! A bond trades at a premium and will be redeemed at face value after time
//! `b`. Modelling the premium as a Brownian bridge from `0` to `-a`, the
//! holder wants the stopping time maximising the expected selling premium.
//! The answer is a square-root free boundary: sell as soon as the remaining
//! premium gap reaches `alpha * sqrt(time to redemption)`, where
//! `alpha = 0.83992...` solves
//!
//! ```text
//! alpha = (1 - alpha^2) * h2(alpha),    h2(u) = ∫_0^∞ exp(λu - λ²/2) dλ.
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`] evaluates `h2` (and its derivative) without overflow, plus an
//!   independent quadrature oracle.
//! * [`boundary`] solves for `alpha` and produces boundary curves.
//! * [`value`] evaluates the value function, region membership, the time
//!   change between bridge and infinite-horizon coordinates, and the
//!   finite-difference and smooth-fit diagnostics.
//! * [`mc`] is a seedable, deterministic-in-parallel Monte Carlo engine for
//!   bridge paths, stopping policies and supermartingale experiments.
//! * [`verify`] bundles the analytic invariants into a pass/fail report.
//!
//! ```
//! use bridgestop::{boundary, value::{self, HorizonState}};
//!
//! let fb = boundary::solve_alpha(1e-12).unwrap();
//! assert!((fb.alpha - 0.83992).abs() < 5e-6);
//!
//! let s = HorizonState::new(0.0, 1.0).unwrap();
//! let v = value::bridge_value(s, &fb).unwrap();
//! assert!((v - 0.369136).abs() < 1e-6);
//! ```

pub mod boundary;
pub mod error;
pub mod mc;
pub mod specfun;
pub mod value;
pub mod verify;

pub use boundary::FreeBoundary;
pub use error::{Error, Result};
pub use mc::{McConfig, McEstimate, Policy};
pub use value::{BridgeState, HorizonState, Region};

// The guide under `book/` is compiled as doc-tests so its snippets cannot
// drift from the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/time-change.md")]
    mod time_change {}
    #[doc = include_str!("../../../book/src/parabolic-cylinder.md")]
    mod parabolic_cylinder {}
    #[doc = include_str!("../../../book/src/free-boundary.md")]
    mod free_boundary {}
    #[doc = include_str!("../../../book/src/value-function.md")]
    mod value_function {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
