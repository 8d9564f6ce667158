pub mod advice;
pub mod lemma;
pub mod protocol;
pub mod rac;
