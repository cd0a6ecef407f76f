pub mod analytics;
pub mod config;
pub mod corpus;
pub mod ingest;
pub mod lexicon;
pub mod llm_gateway;
pub mod page_source;
pub mod text;
pub mod threads;
