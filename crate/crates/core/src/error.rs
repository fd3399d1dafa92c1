use alloc::string::String;

/// Errors reported by the toolkit.
///
/// Invalid *parameters* (out-of-range `eps`, malformed threshold vectors,
/// inconsistent frame lengths, ...) are errors; decoding a corrupted frame is
/// not — decoders always return their best guess and the simulator counts the
/// mismatch.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A numeric parameter is outside its documented domain.
    InvalidParameter(String),
    /// A quantization scheme description is malformed (unsorted values,
    /// wrong threshold count, non-positive levels, ...).
    InvalidScheme(String),
    /// A bit or run sequence violates what the operation requires
    /// (e.g. odd frame length for a rate-2/3 block encoder).
    InvalidSequence(String),
    /// Channel truncation could not terminate within the safety cap.
    TruncationOverflow { cap: u32 },
    /// Encoder reconstruction found no machine consistent with the decoding
    /// table, or the reconstructed machine failed exhaustive verification.
    Reconstruction(String),
    /// A closed-form prediction is not available for the requested
    /// code/scheme combination.
    Unsupported(String),
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            Error::InvalidScheme(m) => write!(f, "invalid quantization scheme: {m}"),
            Error::InvalidSequence(m) => write!(f, "invalid sequence: {m}"),
            Error::TruncationOverflow { cap } => {
                write!(f, "channel truncation exceeded safety cap of {cap} output levels")
            }
            Error::Reconstruction(m) => write!(f, "encoder reconstruction failed: {m}"),
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
        }
    }
}
