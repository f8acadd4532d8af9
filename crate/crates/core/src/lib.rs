pub mod curve_arithmetic;
pub mod lvalue_engine;
pub mod quadrature;
pub mod rmt_moments;
pub mod rmt_sampler;
pub mod sieve;
pub mod special_functions;
pub mod statistics_reports;
