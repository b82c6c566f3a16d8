//! Memory-model simulation by second-order model checking.
//!
//! A litmus test is turned into an event structure, the event structure into
//! a finite relational structure, and the memory model into a second-order
//! sentence. The sentence is decided over the structure, either by direct
//! enumeration ([`oracle`]) or by translation to a quantified boolean formula
//! ([`qbf`]).

pub mod check;
pub mod events;
pub mod litmus;
pub mod models;
pub mod oracle;
pub mod qbf;
pub mod so;
