//! Command line and HTTP/JSON front end for `flowhks`.
//!
//! Signatures are computed offline by `flowhks hks`; the server only loads
//! pathline and HKS files and answers queries over them.

pub mod cli;
pub mod json;
pub mod parse;
pub mod server;
pub mod session;
