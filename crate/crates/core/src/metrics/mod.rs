//! Delay metrics over READ/WRITE programs and corpus BLEU.

mod bleu;
mod delay;

pub use bleu::{corpus_bleu, BleuScore, BleuStats, MAX_ORDER};
pub use delay::{average_lagging, average_proportion, delay_report, differentiable_al, dal_adjusted_lags, DelayReport};
