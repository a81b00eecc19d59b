pub mod compile;
pub mod conformance;
pub mod interp;
pub mod lang;
pub mod tm;
