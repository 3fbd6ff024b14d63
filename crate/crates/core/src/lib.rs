//! Equilibria, decay and finite-time blow-up for the coupled system
//! `u_t − Δu = v^p`, `v_t − Δv = u^q` and its forced and Robin variants.

pub mod analysis;
pub mod discrete;
pub mod elliptic;
pub mod lab;
pub mod parabolic;
pub mod problem;
