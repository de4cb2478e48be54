pub mod atm;
pub mod cli;
pub mod game;
pub mod par;
pub mod structure;
pub mod syntax;
