pub mod attribution;
pub mod audit;
pub mod classifier;
pub mod code_model;
pub mod config;
pub mod expr;
pub mod forge;
pub mod harness;
pub mod labels;
pub mod lexer;
pub mod llm;
pub mod oracle;
