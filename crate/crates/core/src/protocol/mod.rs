//! The Alice/Bob session: preparation, decoys and permutation, the decoy check,
//! encoding by entanglement swapping, and decoding.

mod config;
mod decode;
mod session;
mod transcript;

pub use config::ProtocolConfig;
pub use decode::{
    announcement_distribution, build_decode_table, combined_state, first_set_width,
    outcome_triples, swap_bases, swap_sets, DecodeKey, DecodeRow, DecodeTable,
};
pub(crate) use session::transmit;
pub use session::{
    alice_encode, alice_prepare, alice_swap_measure, bob_check_decoys, bob_decode, bob_reorder,
    insert_decoys_and_permute, message_blocks, run_protocol, run_session, DecoyCheck,
    PermutedSequence, Prepared, SessionReport,
};
pub use transcript::{ConfigEcho, Event, Summary, Transcript, TranscriptDocument, SCHEMA_VERSION};
