pub mod cli;
pub mod complexity;
pub mod corpus;
pub mod forge;
pub mod formula;
pub mod hfs;
pub mod level;
pub mod srm;
pub mod truth;
