pub mod datalog;
pub mod dl;
pub mod hybrid;
pub mod learner;
pub mod matcher;
pub mod model;
pub mod parser;
pub mod refine;
