//! TLS 1.3 handshake with self-sovereign identity authentication.
//!
//! Endpoints authenticate with X.509 chains, Verifiable Credentials or bare
//! DIDs resolved against an append-only ledger, in any of the unilateral,
//! mutual, hybrid and fallback combinations.

pub mod crypto;
pub mod exec;
pub mod handshake;
pub mod identity;
pub mod ledger;
pub mod messages;
pub mod perfmodel;
pub mod pki;
pub mod provision;
