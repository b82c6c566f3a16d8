pub mod corpus;
pub mod formulas;
pub mod random;
pub mod reference;
