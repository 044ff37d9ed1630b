use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("element {value} is out of range for a group of size {cardinality}")]
    ElementOutOfRange { value: u64, cardinality: u64 },

    #[error("invalid mixed-radix layout: {0}")]
    InvalidLayout(String),

    #[error("digit vector has length {got}, layout expects {expected}")]
    DigitCountMismatch { expected: usize, got: usize },

    #[error("digit {digit} at position {position} is not below radix {radix}")]
    DigitOutOfRange { position: usize, digit: u64, radix: u64 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("duplicate element {0} in input set")]
    DuplicateElement(u64),

    #[error("group of size {cardinality} exceeds the memory cap of {cap} cells")]
    MemoryCapExceeded { cardinality: u64, cap: u64 },

    #[error("word size {word_bits} is too small to hold an element of a group of size {cardinality}")]
    WordTooSmall { word_bits: u32, cardinality: u64 },

    #[error("probe cap of {cap} exceeded")]
    ProbeCapExceeded { cap: u64 },

    #[error("cell index {index} out of range for {cells} cells")]
    CellOutOfRange { index: u64, cells: u64 },

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid butterfly parameters: {0}")]
    InvalidButterfly(String),

    #[error("node label {label} out of range for {nodes} nodes per layer")]
    LabelOutOfRange { label: u64, nodes: u64 },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("pattern is not a subset of the query set")]
    PatternInvalid,

    #[error("group of size {cardinality} is too small for n = {n}: need more than {bound} elements (2n^2 + 2n)")]
    GroupTooSmall { cardinality: u64, n: usize, bound: u64 },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("no weakness found in scheme")]
    NoWeaknessFound,

    #[error("every answer pattern on the weakness queries is achievable")]
    AchievableSetFull,

    #[error("certificate too large: {0}")]
    CertificateTooLarge(String),
}
