//! Frequency-dictionary construction for literary corpora: ingest, tokenization,
//! lexicon-driven lemmatization with a human review queue, counting and
//! lexical statistics.

pub mod freqdict;
pub mod ingest;
pub mod kwic;
pub mod lemmatizer;
pub mod lexicon;
pub mod tokenizer;
pub mod quantstats;
pub mod pipeline;
