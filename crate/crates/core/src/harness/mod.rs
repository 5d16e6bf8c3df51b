pub mod benchmark;
pub mod forecast;
pub mod io;
pub mod metrics;
