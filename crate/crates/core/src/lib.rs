pub mod abstraction;
pub mod analysis;
pub mod cfg;
pub mod corpus;
pub mod exact;
pub mod frontend;
pub mod model;
pub mod semantics;
