//! Wire serialization: bit-packed codes, DEFLATE streams, byte entropy, and
//! uplink cost accounting.

mod bits;
mod entropy;
mod ledger;
mod stream;
mod wire;

pub use bits::{pack_bits, unpack_bits};
pub use entropy::byte_entropy;
pub use ledger::CostLedger;
pub use stream::{deflate, inflate, inflate_prefix};
pub use wire::{decode_packet, encode_packet, WirePacket, FORMAT_VERSION, HEADER_LEN};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PackError {
    #[error("code {code} does not fit in {bits} bits")]
    CodeOverflow { code: u8, bits: u8 },
    #[error("corrupt DEFLATE stream: {0}")]
    CorruptStream(String),
    #[error("unsupported format version {0}")]
    VersionMismatch(u8),
    #[error("packet truncated: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("unknown scheme byte {0}")]
    UnknownScheme(u8),
    #[error("empty input")]
    Empty,
    #[error("invalid field: {0}")]
    InvalidField(&'static str),
    #[error(transparent)]
    Codec(#[from] crate::codec::CodecError),
}
